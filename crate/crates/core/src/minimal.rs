//! Minimal-norm classification and the separate-variable recipe.
//!
//! `H_φ` has minimal norm when `‖H_φ‖ = ‖φ‖_{H²}`. Sums of minimal-norm
//! symbols in separate variables that vanish at the origin, and products of
//! minimal-norm symbols in separate variables, are again minimal. Starting
//! from monomials (the polynomial inner functions, up to constants) this
//! gives a family of symbols that are minimal by construction, which
//! [`RecipeExpr`] describes and [`build_recipe`] validates and evaluates.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::{build_block, operator_norm, spectral_norm};
use crate::symbol::{MultiIndex, Symbol};

pub const DEFAULT_TOL: f64 = 1e-9;
const MIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimalityStatus {
    Minimal,
    NotMinimal,
}

impl fmt::Display for MinimalityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MinimalityStatus::Minimal => "minimal",
            MinimalityStatus::NotMinimal => "not-minimal",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalityVerdict {
    pub status: MinimalityStatus,
    /// `‖H_φ‖ − ‖φ‖_{H²}` (or the largest inspected block norm minus `‖φ‖_{H²}`).
    pub gap: f64,
    pub tolerance: f64,
    pub h2_norm: f64,
    /// `(k, ‖H_{φ,k}‖)` when the homogeneous path was used.
    pub block_norms: Option<Vec<(u32, f64)>>,
    /// `|gap| ≤ tolerance`: the exact answer may sit on the threshold.
    pub boundary: bool,
    pub notes: Vec<String>,
}

impl MinimalityVerdict {
    fn from_gap(gap: f64, tolerance: f64, h2_norm: f64) -> Self {
        let status = if gap <= tolerance {
            MinimalityStatus::Minimal
        } else {
            MinimalityStatus::NotMinimal
        };
        let boundary = gap.abs() <= tolerance;
        let mut notes = Vec::new();
        if boundary {
            notes.push("boundary: gap within tolerance".to_string());
        }
        MinimalityVerdict {
            status,
            gap,
            tolerance,
            h2_norm,
            block_norms: None,
            boundary,
            notes,
        }
    }

    pub fn is_minimal(&self) -> bool {
        self.status == MinimalityStatus::Minimal
    }
}

fn check_inputs(s: &Symbol, tol: f64) -> Result<()> {
    if s.is_zero() {
        return Err(Error::contract("classification of the zero symbol"));
    }
    if tol.is_nan() || tol < MIN_TOL {
        return Err(Error::domain(format!("tolerance {tol} below {MIN_TOL}")));
    }
    Ok(())
}

/// Compare `‖H_φ‖` from the full matrix with `‖φ‖_{H²}`.
pub fn classify(s: &Symbol, tol: f64) -> Result<MinimalityVerdict> {
    check_inputs(s, tol)?;
    let h2 = s.h2_norm();
    let op = operator_norm(s);
    let mut v = MinimalityVerdict::from_gap(op.value - h2, tol, h2);
    v.notes.push(format!("operator norm {} from full matrix", op.value));
    Ok(v)
}

/// Classification of an `m`-homogeneous symbol from the blocks
/// `k = 1..=⌊m/2⌋` only.
///
/// Block 0 always has norm `‖φ‖_{H²}` and block `k` has the same norm as
/// block `m−k`, so the remaining blocks carry no extra information.
pub fn classify_homogeneous(s: &Symbol, tol: f64) -> Result<MinimalityVerdict> {
    check_inputs(s, tol)?;
    let m = s
        .is_homogeneous()
        .ok_or_else(|| Error::contract("homogeneous classification of a non-homogeneous symbol"))?;
    let h2 = s.h2_norm();
    let blocks: Vec<(u32, f64)> = (1..=m / 2)
        .map(|k| Ok((k, spectral_norm(&build_block(s, k)?).value)))
        .collect::<Result<_>>()?;
    let gap = match blocks.iter().map(|&(_, n)| n).reduce(f64::max) {
        Some(top) => (top - h2).max(0.0),
        None => 0.0,
    };
    let mut v = MinimalityVerdict::from_gap(gap, tol, h2);
    if blocks.is_empty() {
        v.notes.push(format!("degree {m}: no blocks to inspect"));
    }
    v.block_norms = Some(blocks);
    Ok(v)
}

/// Pick [`classify_homogeneous`] for homogeneous symbols and [`classify`]
/// otherwise.
pub fn classify_auto(s: &Symbol, tol: f64) -> Result<MinimalityVerdict> {
    if s.is_homogeneous().is_some() {
        classify_homogeneous(s, tol)
    } else {
        classify(s, tol)
    }
}

/// In one variable a polynomial symbol has minimal norm exactly when it is a
/// single monomial: a polynomial of constant modulus on the circle is a
/// constant times `z^n`.
pub fn d1_monomial_test(s: &Symbol) -> Result<bool> {
    if s.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: s.dim(),
        });
    }
    if s.is_zero() {
        return Err(Error::contract("monomial test of the zero symbol"));
    }
    Ok(s.len() == 1)
}

/// A recipe tree: constant multiples of monomials combined by sums and
/// products of symbols in separate variables.
#[derive(Clone, Debug, PartialEq)]
pub enum RecipeExpr {
    Leaf { coeff: Complex64, index: MultiIndex },
    Sum(Vec<RecipeExpr>),
    Product(Vec<RecipeExpr>),
}

impl RecipeExpr {
    pub fn leaf(coeff: Complex64, index: impl Into<MultiIndex>) -> Self {
        RecipeExpr::Leaf {
            coeff,
            index: index.into(),
        }
    }

    /// `z_{j+1}` in `dim` variables with coefficient 1.
    pub fn var(dim: usize, j: usize) -> Self {
        RecipeExpr::leaf(Complex64::new(1.0, 0.0), MultiIndex::unit(dim, j))
    }

    pub fn leaves(&self) -> usize {
        match self {
            RecipeExpr::Leaf { .. } => 1,
            RecipeExpr::Sum(c) | RecipeExpr::Product(c) => c.iter().map(RecipeExpr::leaves).sum(),
        }
    }

    fn first_dim(&self) -> Option<usize> {
        match self {
            RecipeExpr::Leaf { index, .. } => Some(index.dim()),
            RecipeExpr::Sum(c) | RecipeExpr::Product(c) => c.iter().find_map(RecipeExpr::first_dim),
        }
    }

    /// Parse `(sum …)`, `(prod …)` and `(mono <re> <im> : <e1> … <ed>)`.
    pub fn parse(text: &str) -> Result<RecipeExpr> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let expr = parse_expr(&tokens, &mut pos)?;
        if let Some(t) = tokens.get(pos) {
            return Err(Error::parse(t.line, format!("unexpected `{}` after expression", t.text)));
        }
        Ok(expr)
    }
}

impl fmt::Display for RecipeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecipeExpr::Leaf { coeff, index } => {
                write!(f, "(mono {:?} {:?} :", coeff.re, coeff.im)?;
                for e in index.exponents() {
                    write!(f, " {e}")?;
                }
                write!(f, ")")
            }
            RecipeExpr::Sum(c) | RecipeExpr::Product(c) => {
                let head = if matches!(self, RecipeExpr::Sum(_)) { "sum" } else { "prod" };
                write!(f, "({head}")?;
                for child in c {
                    write!(f, " {child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Token {
    text: String,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let spaced = line.replace('(', " ( ").replace(')', " ) ").replace(':', " : ");
        out.extend(spaced.split_whitespace().map(|t| Token {
            text: t.to_string(),
            line: i + 1,
        }));
    }
    out
}

fn parse_expr(tokens: &[Token], pos: &mut usize) -> Result<RecipeExpr> {
    let last_line = tokens.last().map_or(1, |t| t.line);
    let next = |pos: &mut usize| -> Result<&Token> {
        let t = tokens
            .get(*pos)
            .ok_or_else(|| Error::parse(last_line, "unexpected end of recipe"))?;
        *pos += 1;
        Ok(t)
    };
    let open = next(pos)?;
    if open.text != "(" {
        return Err(Error::parse(open.line, format!("expected `(`, found `{}`", open.text)));
    }
    let head = next(pos)?;
    match head.text.as_str() {
        "mono" => {
            let line = head.line;
            let num = |t: &Token| {
                t.text
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(t.line, format!("bad number `{}`", t.text)))
            };
            let re = num(next(pos)?)?;
            let im = num(next(pos)?)?;
            let colon = next(pos)?;
            if colon.text != ":" {
                return Err(Error::parse(colon.line, "expected `:` after coefficient"));
            }
            let mut exps = Vec::new();
            loop {
                let t = next(pos)?;
                if t.text == ")" {
                    break;
                }
                exps.push(
                    t.text
                        .parse::<u32>()
                        .map_err(|_| Error::parse(t.line, format!("bad exponent `{}`", t.text)))?,
                );
            }
            if exps.is_empty() {
                return Err(Error::parse(line, "monomial without exponents"));
            }
            Ok(RecipeExpr::leaf(Complex64::new(re, im), MultiIndex::new(exps)))
        }
        "sum" | "prod" => {
            let is_sum = head.text == "sum";
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(t) if t.text == ")" => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_expr(tokens, pos)?),
                    None => return Err(Error::parse(last_line, "unclosed `(`")),
                }
            }
            Ok(if is_sum {
                RecipeExpr::Sum(children)
            } else {
                RecipeExpr::Product(children)
            })
        }
        other => Err(Error::parse(head.line, format!("unknown form `{other}`"))),
    }
}

/// Validate a recipe tree and evaluate it to a symbol.
///
/// Every leaf must be a nonzero multiple of a monomial of degree ≥ 1, every
/// internal node needs at least one child, and the children of each node must
/// depend on pairwise disjoint sets of variables. Errors name the offending
/// node by its path from the root, e.g. `root/1/0`.
pub fn build_recipe(expr: &RecipeExpr) -> Result<Symbol> {
    let dim = expr
        .first_dim()
        .ok_or_else(|| Error::recipe("root", "recipe has no leaves"))?;
    if dim == 0 {
        return Err(Error::recipe("root", "monomials need at least one variable"));
    }
    eval_node(expr, dim, "root").map(|(s, _)| s)
}

fn eval_node(expr: &RecipeExpr, dim: usize, path: &str) -> Result<(Symbol, BTreeSet<usize>)> {
    match expr {
        RecipeExpr::Leaf { coeff, index } => {
            if index.dim() != dim {
                return Err(Error::recipe(
                    path,
                    format!("monomial has {} exponents, expected {dim}", index.dim()),
                ));
            }
            if index.degree() == 0 {
                return Err(Error::recipe(path, "degree-0 leaf does not vanish at the origin"));
            }
            if *coeff == Complex64::new(0.0, 0.0) {
                return Err(Error::recipe(path, "zero coefficient"));
            }
            let vars = index.active_variables().collect();
            Ok((Symbol::monomial(index.clone(), *coeff)?, vars))
        }
        RecipeExpr::Sum(children) | RecipeExpr::Product(children) => {
            if children.is_empty() {
                return Err(Error::recipe(path, "node without children"));
            }
            let is_sum = matches!(expr, RecipeExpr::Sum(_));
            let mut acc: Option<Symbol> = None;
            let mut used = BTreeSet::new();
            for (i, child) in children.iter().enumerate() {
                let child_path = format!("{path}/{i}");
                let (s, vars) = eval_node(child, dim, &child_path)?;
                if let Some(shared) = vars.intersection(&used).next() {
                    return Err(Error::recipe(
                        path,
                        format!("child {i} reuses variable z{}", shared + 1),
                    ));
                }
                used.extend(vars);
                acc = Some(match acc {
                    None => s,
                    Some(a) if is_sum => a.checked_add(&s)?,
                    Some(a) => a.checked_mul(&s)?,
                });
            }
            Ok((acc.expect("at least one child"), used))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi2(a: f64) -> Symbol {
        Symbol::from_real(2, &[(&[2, 0], 1.0), (&[1, 1], a), (&[0, 2], 1.0)]).unwrap()
    }

    fn phi3(b: f64) -> Symbol {
        Symbol::from_real(2, &[(&[3, 0], 1.0), (&[2, 1], b), (&[1, 2], b), (&[0, 3], 1.0)]).unwrap()
    }

    #[test]
    fn classify_examples() {
        let s = Symbol::from_real(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]).unwrap();
        let v = classify(&s, DEFAULT_TOL).unwrap();
        assert!(v.is_minimal());
        assert!(v.gap.abs() < 1e-12);

        let v = classify(&phi2(1.0), DEFAULT_TOL).unwrap();
        assert_eq!(v.status, MinimalityStatus::NotMinimal);
        assert!((v.gap - (2.0 - 3f64.sqrt())).abs() < 1e-12);

        let mono = Symbol::monomial([2, 0, 5].into(), Complex64::new(-1.5, 2.0)).unwrap();
        assert!(classify(&mono, DEFAULT_TOL).unwrap().is_minimal());
    }

    #[test]
    fn classify_rejects_bad_input() {
        assert!(matches!(classify(&Symbol::zero(2), 1e-9), Err(Error::Contract(_))));
        assert!(matches!(classify(&phi2(0.1), 1e-13), Err(Error::Domain(_))));
        let mixed = Symbol::from_real(1, &[(&[0], 1.0), (&[1], 1.0)]).unwrap();
        assert!(classify_homogeneous(&mixed, 1e-9).is_err());
    }

    #[test]
    fn homogeneous_boundaries() {
        let v = classify_homogeneous(&phi2(0.5), DEFAULT_TOL).unwrap();
        assert!(v.is_minimal());
        assert!(v.boundary);
        assert_eq!(v.block_norms.as_ref().unwrap().len(), 1);
        assert!((v.block_norms.as_ref().unwrap()[0].1 - 1.5).abs() < 1e-14);

        let b = 2f64.sqrt() - 1.0;
        let v = classify_homogeneous(&phi3(b), DEFAULT_TOL).unwrap();
        assert!(v.is_minimal());
        assert!(v.boundary);
    }

    #[test]
    fn one_homogeneous_is_always_minimal() {
        let s = Symbol::new(
            3,
            [
                ([1, 0, 0].into(), Complex64::new(2.0, -1.0)),
                ([0, 1, 0].into(), Complex64::new(0.1, 0.0)),
                ([0, 0, 1].into(), Complex64::new(-3.0, 0.5)),
            ],
        )
        .unwrap();
        let v = classify_homogeneous(&s, DEFAULT_TOL).unwrap();
        assert!(v.is_minimal());
        assert_eq!(v.gap, 0.0);
        assert!(v.block_norms.unwrap().is_empty());
        assert!(classify(&s, DEFAULT_TOL).unwrap().is_minimal());
    }

    #[test]
    fn family_scans_flip_at_threshold() {
        for i in 0..=10 {
            let a = i as f64 / 10.0;
            let v = classify_homogeneous(&phi2(a), DEFAULT_TOL).unwrap();
            assert_eq!(v.is_minimal(), a <= 0.5, "a = {a}");
        }
        for i in 0..=20 {
            let b = i as f64 * 0.05;
            let v = classify_homogeneous(&phi3(b), DEFAULT_TOL).unwrap();
            assert_eq!(v.is_minimal(), b <= 2f64.sqrt() - 1.0, "b = {b}");
        }
    }

    #[test]
    fn d1_examples() {
        let m = Symbol::from_real(1, &[(&[3], 3.0)]).unwrap();
        assert!(d1_monomial_test(&m).unwrap());
        assert!(classify(&m, DEFAULT_TOL).unwrap().is_minimal());

        let one_plus_z = Symbol::from_real(1, &[(&[0], 1.0), (&[1], 1.0)]).unwrap();
        assert!(!d1_monomial_test(&one_plus_z).unwrap());
        let v = classify(&one_plus_z, DEFAULT_TOL).unwrap();
        assert!((v.gap + v.h2_norm - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);

        let z_z2 = Symbol::from_real(1, &[(&[1], 1.0), (&[2], 1.0)]).unwrap();
        assert!(!d1_monomial_test(&z_z2).unwrap());
        assert!(!classify(&z_z2, DEFAULT_TOL).unwrap().is_minimal());

        assert!(d1_monomial_test(&Symbol::variable(2, 0)).is_err());
    }

    #[test]
    fn recipe_examples() {
        let sum = RecipeExpr::Sum(vec![RecipeExpr::var(2, 0), RecipeExpr::var(2, 1)]);
        let s = build_recipe(&sum).unwrap();
        assert_eq!(s, Symbol::from_real(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]).unwrap());

        let prod = RecipeExpr::Product(vec![
            RecipeExpr::Sum(vec![RecipeExpr::var(4, 0), RecipeExpr::var(4, 1)]),
            RecipeExpr::Sum(vec![RecipeExpr::var(4, 2), RecipeExpr::var(4, 3)]),
        ]);
        let s = build_recipe(&prod).unwrap();
        let v = classify(&s, DEFAULT_TOL).unwrap();
        assert!(v.is_minimal());
        assert!((operator_norm(&s).value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn recipe_rejects_reused_variable() {
        let bad = RecipeExpr::Sum(vec![
            RecipeExpr::var(3, 0),
            RecipeExpr::Sum(vec![RecipeExpr::var(3, 1), RecipeExpr::var(3, 2)]),
            RecipeExpr::var(3, 1),
        ]);
        match build_recipe(&bad) {
            Err(Error::Recipe { node, reason }) => {
                assert_eq!(node, "root");
                assert!(reason.contains("z2"));
            }
            other => panic!("{other:?}"),
        }
        let nested = RecipeExpr::Product(vec![
            RecipeExpr::var(2, 0),
            RecipeExpr::Sum(vec![RecipeExpr::var(2, 1), RecipeExpr::var(2, 1)]),
        ]);
        assert!(matches!(build_recipe(&nested), Err(Error::Recipe { node, .. }) if node == "root/1"));
    }

    #[test]
    fn recipe_rejects_constant_leaf() {
        let bad = RecipeExpr::Sum(vec![
            RecipeExpr::leaf(Complex64::new(1.0, 0.0), [0, 0]),
            RecipeExpr::var(2, 1),
        ]);
        assert!(matches!(build_recipe(&bad), Err(Error::Recipe { node, .. }) if node == "root/0"));
        assert!(build_recipe(&RecipeExpr::Sum(vec![])).is_err());
    }

    #[test]
    fn recipe_text_round_trip() {
        let text = "# phi_2\n(prod (sum (mono 1 0 : 1 0 0 0) (mono 1 0 : 0 1 0 0))\n      (sum (mono 0.5 -2 : 0 0 1 0) (mono 1 0 : 0 0 0 3)))";
        let e = RecipeExpr::parse(text).unwrap();
        assert_eq!(e.leaves(), 4);
        let again = RecipeExpr::parse(&e.to_string()).unwrap();
        assert_eq!(again, e);
        assert!(classify(&build_recipe(&e).unwrap(), DEFAULT_TOL).unwrap().is_minimal());
    }

    #[test]
    fn recipe_parse_errors() {
        assert!(matches!(RecipeExpr::parse("(sum (mono 1 0 : 1)"), Err(Error::Parse { .. })));
        assert!(matches!(RecipeExpr::parse("(frob)"), Err(Error::Parse { .. })));
        assert!(matches!(RecipeExpr::parse("(mono 1 0 1)"), Err(Error::Parse { .. })));
        let e = RecipeExpr::parse("(sum\n (mono 1 0 : 1)\n (mono x 0 : 1))").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn status_is_scale_and_permutation_invariant() {
        let s = phi2(0.7).embed(3).unwrap();
        let base = classify(&s, DEFAULT_TOL).unwrap().status;
        let scaled = s.scale(Complex64::new(-0.3, 2.0));
        assert_eq!(classify(&scaled, DEFAULT_TOL).unwrap().status, base);
        let perm = s.permute_variables(&[2, 0, 1]).unwrap();
        assert_eq!(classify(&perm, DEFAULT_TOL).unwrap().status, base);
    }
}
