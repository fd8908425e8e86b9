//! Sparse polynomial symbols on the d-torus.
//!
//! A [`Symbol`] is a finitely supported map from exponent vectors
//! ([`MultiIndex`]) to complex Fourier coefficients. Terms are kept in graded
//! lexicographic order (total degree first, then lexicographic with `z_1`
//! ranked highest), which fixes the row and column layout of every matrix
//! built from a symbol.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponent vector `α ∈ ℕ₀^d` of the monomial `z^α`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The exponent of the coordinate function `z_{j+1}` (zero-based `j`).
    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise order: `self ≤ other` iff every exponent is ≤.
    pub fn dominated_by(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.dominated_by(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Every `β` with `β ≤ self` componentwise, in no particular order.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zeros(self.dim())];
        for (j, &top) in self.0.iter().enumerate() {
            if top == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (top as usize + 1));
            for base in &out {
                for e in 0..=top {
                    let mut b = base.clone();
                    b.0[j] = e;
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    /// Indices of variables with a positive exponent.
    pub fn active_variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, _)| j)
    }

    fn padded(&self, dim: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e.resize(dim, 0);
        MultiIndex(e)
    }
}

impl std::ops::Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), rhs.dim());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.degree().cmp(&other.degree()))
            // higher power of the earlier variable comes first: z1 before z2
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(e: &[u32]) -> Self {
        MultiIndex(e.to_vec())
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(e: [u32; N]) -> Self {
        MultiIndex(e.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A polynomial symbol `φ(z) = Σ φ̂(α) z^α` in a fixed number of variables.
///
/// Stored coefficients are never exactly zero. Symbols are immutable; every
/// operation returns a new value.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Symbol {
    /// Build a symbol from `(index, coefficient)` pairs. Repeated indices are
    /// summed before exact zeros are dropped.
    pub fn new<I>(dim: usize, terms: I) -> Result<Symbol>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::domain("symbol dimension must be positive"));
        }
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::domain(format!("non-finite coefficient at {alpha}")));
            }
            *map.entry(alpha).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(Symbol { dim, terms: map })
    }

    /// Convenience constructor for real coefficients.
    pub fn from_real(dim: usize, terms: &[(&[u32], f64)]) -> Result<Symbol> {
        Symbol::new(
            dim,
            terms
                .iter()
                .map(|(e, c)| (MultiIndex::from(*e), Complex64::new(*c, 0.0))),
        )
    }

    pub fn zero(dim: usize) -> Symbol {
        assert!(dim > 0, "symbol dimension must be positive");
        Symbol {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(alpha: MultiIndex, c: Complex64) -> Result<Symbol> {
        Symbol::new(alpha.dim(), [(alpha, c)])
    }

    /// The coordinate function `z_{j+1}`.
    pub fn variable(dim: usize, j: usize) -> Symbol {
        Symbol::monomial(MultiIndex::unit(dim, j), Complex64::new(1.0, 0.0))
            .expect("unit index matches its dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms
            .get(alpha)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `φ(0)`, the constant coefficient.
    pub fn value_at_origin(&self) -> Complex64 {
        self.coefficient(&MultiIndex::zeros(self.dim))
    }

    /// Largest total degree, `None` for the zero symbol.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    fn check_dim(&self, other: &Symbol) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        Symbol::new(
            self.dim,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(a, c)| (a.clone(), *c)),
        )
    }

    /// Full convolution product.
    pub fn checked_mul(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.push((a + b, ca * cb));
            }
        }
        Symbol::new(self.dim, out)
    }

    pub fn scale(&self, c: Complex64) -> Symbol {
        Symbol::new(self.dim, self.terms.iter().map(|(a, v)| (a.clone(), v * c)))
            .expect("scaling keeps the dimension")
    }

    /// Append zero exponents so the symbol lives in `dim` variables.
    pub fn embed(&self, dim: usize) -> Result<Symbol> {
        if dim < self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(Symbol {
            dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.padded(dim), *c))
                .collect(),
        })
    }

    /// Rename variables: variable `j` becomes variable `perm[j]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Result<Symbol> {
        if perm.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.dim];
        for &p in perm {
            if p >= self.dim || std::mem::replace(&mut seen[p], true) {
                return Err(Error::domain("not a permutation"));
            }
        }
        Symbol::new(
            self.dim,
            self.terms.iter().map(|(a, c)| {
                let mut e = vec![0; self.dim];
                for (j, &x) in a.exponents().iter().enumerate() {
                    e[perm[j]] = x;
                }
                (MultiIndex(e), *c)
            }),
        )
    }

    pub fn h2_norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    /// `‖φ‖_{H²}` by Parseval.
    pub fn h2_norm(&self) -> f64 {
        self.h2_norm_sqr().sqrt()
    }

    /// Variables that appear with a positive exponent somewhere in the support.
    pub fn variable_support(&self) -> BTreeSet<usize> {
        self.terms
            .keys()
            .flat_map(|a| a.active_variables().collect::<Vec<_>>())
            .collect()
    }

    /// True iff the two symbols depend on disjoint sets of variables.
    pub fn separate_variables(&self, other: &Symbol) -> bool {
        self.variable_support().is_disjoint(&other.variable_support())
    }

    pub fn homogeneous_part(&self, m: u32) -> Symbol {
        Symbol {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() == m)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// `Some(m)` if every term has degree `m`; the zero symbol reports `Some(0)`.
    pub fn is_homogeneous(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(MultiIndex::degree);
        match degrees.next() {
            None => Some(0),
            Some(m) => degrees.all(|k| k == m).then_some(m),
        }
    }

    /// `φ̃(z) = conj(φ(conj z))`: conjugate every coefficient.
    pub fn reflect(&self) -> Symbol {
        Symbol {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.conj())).collect(),
        }
    }

    /// Evaluate at the torus point `(e^{iθ_1}, …, e^{iθ_d})`.
    pub fn evaluate(&self, angles: &[f64]) -> Result<Complex64> {
        if angles.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: angles.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(a, c)| {
                let phase: f64 = a
                    .exponents()
                    .iter()
                    .zip(angles)
                    .map(|(&e, &t)| e as f64 * t)
                    .sum();
                c * Complex64::cis(phase)
            })
            .sum())
    }

    /// The `L²` pairing `⟨self, other⟩ = Σ self̂(α) conj(other̂(α))`.
    pub fn pairing(&self, other: &Symbol) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self
            .terms
            .iter()
            .map(|(a, c)| c * other.coefficient(a).conj())
            .sum())
    }

    /// Serialize to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("dim {}\n", self.dim);
        for (a, c) in &self.terms {
            s.push_str(&format!("{:?} {:?} :", c.re, c.im));
            for e in a.exponents() {
                s.push_str(&format!(" {e}"));
            }
            s.push('\n');
        }
        s
    }

    /// Parse the text format: a `dim <d>` header followed by
    /// `<re> <im> : <e1> … <ed>` lines. Lines starting with `#` are comments.
    pub fn parse_text(text: &str) -> Result<Symbol> {
        let mut dim: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(d) = dim else {
                let mut it = line.split_whitespace();
                if it.next() != Some("dim") {
                    return Err(Error::parse(line_no, "expected `dim <d>` header"));
                }
                let d: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&d| d > 0)
                    .ok_or_else(|| Error::parse(line_no, "dimension must be a positive integer"))?;
                if it.next().is_some() {
                    return Err(Error::parse(line_no, "trailing tokens after dimension"));
                }
                dim = Some(d);
                continue;
            };
            let (coef, exps) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "missing `:` separator"))?;
            let parts: Vec<&str> = coef.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::parse(line_no, "expected `<re> <im>` before `:`"));
            }
            let parse_f = |t: &str| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(line_no, format!("bad coefficient `{t}`")))
            };
            let c = Complex64::new(parse_f(parts[0])?, parse_f(parts[1])?);
            let e: Vec<u32> = exps
                .split_whitespace()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::parse(line_no, format!("bad exponent `{t}`")))
                })
                .collect::<Result<_>>()?;
            if e.len() != d {
                return Err(Error::parse(
                    line_no,
                    format!("expected {d} exponents, found {}", e.len()),
                ));
            }
            terms.push((MultiIndex(e), c));
        }
        let d = dim.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing `dim` header"))?;
        Symbol::new(d, terms)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for (j, &e) in a.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·z{}", j + 1)?,
                    _ => write!(f, "·z{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Symbol> {
        Symbol::parse_text(s)
    }
}
