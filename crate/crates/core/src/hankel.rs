//! Finite matrices of small Hankel operators with polynomial symbols.
//!
//! The operator `H_φ f = P̄(φ̄ f)` sends the monomial `z^β` to
//! `Σ_γ conj(φ̂(β+γ)) z̄^γ`. For a polynomial symbol only indices dominated by
//! some element of the support contribute, so the operator is represented
//! exactly by a finite matrix with `entry[γ, β] = conj(φ̂(β+γ))`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::symbol::{MultiIndex, Symbol};

/// How a [`NormEstimate`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    SpectralExact,
    GridQuadrature,
    AdaptiveQuadrature,
    MonteCarlo,
    ClosedForm,
}

impl fmt::Display for NormMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMethod::SpectralExact => "spectral-exact",
            NormMethod::GridQuadrature => "grid-quadrature",
            NormMethod::AdaptiveQuadrature => "adaptive-quadrature",
            NormMethod::MonteCarlo => "monte-carlo",
            NormMethod::ClosedForm => "closed-form",
        })
    }
}

/// A computed norm together with how it was obtained and an error bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub error_bound: f64,
    pub metadata: BTreeMap<String, String>,
}

impl NormEstimate {
    pub fn new(value: f64, method: NormMethod, error_bound: f64) -> Self {
        debug_assert!(value >= 0.0 && error_bound >= 0.0);
        NormEstimate {
            value,
            method,
            error_bound,
            metadata: BTreeMap::new(),
        }
    }

    pub fn closed_form(value: f64) -> Self {
        NormEstimate::new(value, NormMethod::ClosedForm, 0.0)
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

/// Dense matrix of `H_φ` (or one of its homogeneous blocks) on its active
/// monomial bases.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelMatrix {
    /// Input side: `z^β`.
    pub column_basis: Vec<MultiIndex>,
    /// Output side: `z̄^γ`.
    pub row_basis: Vec<MultiIndex>,
    pub entries: DMatrix<Complex64>,
}

impl HankelMatrix {
    fn assemble(s: &Symbol, column_basis: Vec<MultiIndex>, row_basis: Vec<MultiIndex>) -> Self {
        let rows = row_basis.len();
        let cols = column_basis.len();
        let max_degree = s.degree().unwrap_or(0);
        let columns: Vec<Vec<Complex64>> = par::map_slice(&column_basis, |beta| {
            row_basis
                .iter()
                .map(|gamma| {
                    if beta.degree() + gamma.degree() > max_degree {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let v = s.coefficient(&(beta + gamma)).conj();
                        // adding +0.0 clears the -0.0 that conj leaves on real entries
                        Complex64::new(v.re + 0.0, v.im + 0.0)
                    }
                })
                .collect()
        });
        let entries = DMatrix::from_fn(rows, cols, |r, c| columns[c][r]);
        HankelMatrix {
            column_basis,
            row_basis,
            entries,
        }
    }

    pub fn empty() -> Self {
        HankelMatrix {
            column_basis: Vec::new(),
            row_basis: Vec::new(),
            entries: DMatrix::zeros(0, 0),
        }
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.nrows() == 0 || self.ncols() == 0
    }

    /// Plain-text dump: `rows <n> cols <m>` then one line of `re,im` pairs
    /// per row.
    pub fn to_dump(&self) -> String {
        let mut s = format!("rows {} cols {}\n", self.nrows(), self.ncols());
        for r in 0..self.nrows() {
            let line: Vec<String> = (0..self.ncols())
                .map(|c| {
                    let v = self.entries[(r, c)];
                    format!("{:?},{:?}", v.re, v.im)
                })
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Inverse of [`HankelMatrix::to_dump`] for the entries (bases are not
    /// part of the format).
    pub fn parse_dump(text: &str) -> Result<DMatrix<Complex64>> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `rows <n> cols <m>` header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (rows, cols) = match h.as_slice() {
            ["rows", r, "cols", c] => (
                r.parse::<usize>().map_err(|_| Error::parse(1, "bad row count"))?,
                c.parse::<usize>().map_err(|_| Error::parse(1, "bad column count"))?,
            ),
            _ => return Err(Error::parse(1, "expected `rows <n> cols <m>`")),
        };
        let mut m = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| Error::parse(r + 2, "missing matrix row"))?;
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != cols {
                return Err(Error::parse(idx + 1, "wrong number of entries"));
            }
            for (c, cell) in cells.iter().enumerate() {
                let (re, im) = cell
                    .split_once(',')
                    .ok_or_else(|| Error::parse(idx + 1, "entry must be `re,im`"))?;
                let re = re.parse().map_err(|_| Error::parse(idx + 1, "bad real part"))?;
                let im = im.parse().map_err(|_| Error::parse(idx + 1, "bad imaginary part"))?;
                m[(r, c)] = Complex64::new(re, im);
            }
        }
        Ok(m)
    }
}

/// The active column and row bases of `H_φ`: every `β` dominated by some
/// element of the support, in graded lexicographic order. Both bases are the
/// same set; the zero symbol has empty bases.
pub fn active_bases(s: &Symbol) -> (Vec<MultiIndex>, Vec<MultiIndex>) {
    let mut set = BTreeSet::new();
    for (alpha, _) in s.terms() {
        set.extend(alpha.lower_set());
    }
    let basis: Vec<MultiIndex> = set.into_iter().collect();
    (basis.clone(), basis)
}

/// The full matrix of `H_φ`. All rows and columns outside the active bases
/// are identically zero.
pub fn build_matrix(s: &Symbol) -> HankelMatrix {
    if s.is_zero() {
        return HankelMatrix::empty();
    }
    let (cols, rows) = active_bases(s);
    HankelMatrix::assemble(s, cols, rows)
}

/// The block `H_{φ,k}`: `H_φ` restricted to `k`-homogeneous inputs, landing
/// in the conjugates of `(m−k)`-homogeneous functions.
pub fn build_block(s: &Symbol, k: u32) -> Result<HankelMatrix> {
    let m = s
        .is_homogeneous()
        .ok_or_else(|| Error::contract("block decomposition needs a homogeneous symbol"))?;
    if s.is_zero() || k > m {
        return Ok(HankelMatrix::empty());
    }
    let (basis, _) = active_bases(s);
    let cols: Vec<MultiIndex> = basis.iter().filter(|b| b.degree() == k).cloned().collect();
    let rows: Vec<MultiIndex> = basis.into_iter().filter(|b| b.degree() == m - k).collect();
    Ok(HankelMatrix::assemble(s, cols, rows))
}

/// Largest singular value of a complex matrix.
///
/// Computed as the square root of the top eigenvalue of the Hermitian Gram
/// matrix on the smaller side.
pub fn spectral_norm_of(m: &DMatrix<Complex64>) -> NormEstimate {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return NormEstimate::new(0.0, NormMethod::SpectralExact, 0.0)
            .with("rows", r)
            .with("cols", c);
    }
    let gram = if c <= r { m.adjoint() * m } else { m * m.adjoint() };
    let n = gram.nrows();
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    let value = top.max(0.0).sqrt();
    NormEstimate::new(value, NormMethod::SpectralExact, value * n as f64 * f64::EPSILON)
        .with("rows", r)
        .with("cols", c)
}

pub fn spectral_norm(m: &HankelMatrix) -> NormEstimate {
    spectral_norm_of(&m.entries)
}

/// `‖H_φ‖`, from the full active matrix.
pub fn operator_norm(s: &Symbol) -> NormEstimate {
    spectral_norm(&build_matrix(s))
}

/// Norms of every block `H_{φ,k}`, `k = 0..=m`, for an `m`-homogeneous symbol.
pub fn block_norms(s: &Symbol) -> Result<Vec<(u32, f64)>> {
    let m = s
        .is_homogeneous()
        .ok_or_else(|| Error::contract("block decomposition needs a homogeneous symbol"))?;
    (0..=m)
        .map(|k| Ok((k, spectral_norm(&build_block(s, k)?).value)))
        .collect()
}

/// `‖H_φ‖` for a homogeneous symbol as the maximum over its blocks.
pub fn operator_norm_by_blocks(s: &Symbol) -> Result<NormEstimate> {
    let blocks = block_norms(s)?;
    let value = blocks.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    Ok(
        NormEstimate::new(value, NormMethod::SpectralExact, value * 1e-14)
            .with("blocks", blocks.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn phi2(a: f64) -> Symbol {
        Symbol::from_real(2, &[(&[2, 0], 1.0), (&[1, 1], a), (&[0, 2], 1.0)]).unwrap()
    }

    fn phi3(b: f64) -> Symbol {
        Symbol::from_real(2, &[(&[3, 0], 1.0), (&[2, 1], b), (&[1, 2], b), (&[0, 3], 1.0)]).unwrap()
    }

    /// Independent route for the top singular value: power iteration on MᴴM.
    fn power_norm(m: &DMatrix<Complex64>) -> f64 {
        let g = m.adjoint() * m;
        let mut v = nalgebra::DVector::from_fn(g.ncols(), |i, _| c(1.0 + 0.1 * i as f64));
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w = &g * &v;
            let n = w.norm();
            if n == 0.0 {
                return 0.0;
            }
            lambda = n;
            v = w / c(n);
        }
        lambda.sqrt()
    }

    #[test]
    fn active_bases_examples() {
        let z1z2 = Symbol::from_real(2, &[(&[1, 1], 1.0)]).unwrap();
        let (cols, rows) = active_bases(&z1z2);
        let expect: Vec<MultiIndex> =
            vec![[0, 0].into(), [1, 0].into(), [0, 1].into(), [1, 1].into()];
        assert_eq!(cols, expect);
        assert_eq!(rows, expect);

        let one = Symbol::from_real(1, &[(&[0], 1.0)]).unwrap();
        assert_eq!(active_bases(&one).0, vec![MultiIndex::from([0])]);

        let (cols, _) = active_bases(&phi2(0.3));
        let degrees: Vec<u32> = cols.iter().map(MultiIndex::degree).collect();
        assert_eq!(degrees, vec![0, 1, 1, 2, 2, 2]);

        assert!(active_bases(&Symbol::zero(2)).0.is_empty());
    }

    #[test]
    fn quadratic_and_cubic_middle_blocks() {
        let a = 0.3;
        let m = build_block(&phi2(a), 1).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(1.0), c(a), c(a), c(1.0)]);
        assert_eq!(m.entries, expect);

        let b = 0.4;
        let m = build_block(&phi3(b), 1).unwrap();
        let expect = DMatrix::from_row_slice(3, 2, &[c(1.0), c(b), c(b), c(b), c(b), c(1.0)]);
        assert_eq!(m.entries, expect);
        assert!(m.row_basis.iter().all(|g| g.degree() == 2));
        assert!(m.column_basis.iter().all(|g| g.degree() == 1));
    }

    #[test]
    fn constant_symbol_matrix() {
        let s = Symbol::monomial([0, 0].into(), Complex64::new(2.0, -1.0)).unwrap();
        let m = build_matrix(&s);
        assert_eq!(m.entries.shape(), (1, 1));
        assert_eq!(m.entries[(0, 0)], Complex64::new(2.0, 1.0));
    }

    #[test]
    fn block_edge_cases() {
        let s = phi2(0.3);
        let m0 = build_block(&s, 0).unwrap();
        assert_eq!(m0.entries.shape(), (3, 1));
        assert!((spectral_norm(&m0).value - (2.0f64 + 0.09).sqrt()).abs() < 1e-14);
        assert!(build_block(&s, 3).unwrap().is_empty());
        assert!(matches!(
            build_block(&Symbol::from_real(1, &[(&[0], 1.0), (&[1], 1.0)]).unwrap(), 0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn spectral_norm_examples() {
        let a = 0.3;
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(a), c(a), c(1.0)]);
        assert!((spectral_norm_of(&m).value - 1.3).abs() < 1e-14);

        let b = 0.4;
        let m = DMatrix::from_row_slice(3, 2, &[c(1.0), c(b), c(b), c(b), c(b), c(1.0)]);
        let v = spectral_norm_of(&m).value;
        assert!((v * v - (1.0 + 2.0 * b + 3.0 * b * b)).abs() < 1e-14);

        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!((spectral_norm_of(&id).value - 1.0).abs() < 1e-15);
        assert_eq!(spectral_norm(&HankelMatrix::empty()).value, 0.0);
    }

    #[test]
    fn operator_norm_examples() {
        let z = |j| Symbol::variable(4, j);
        let p = z(0)
            .checked_add(&z(1))
            .unwrap()
            .checked_mul(&z(2).checked_add(&z(3)).unwrap())
            .unwrap();
        assert!((operator_norm(&p).value - 2.0).abs() < 1e-12);

        let s = Symbol::from_real(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]).unwrap();
        assert!((operator_norm(&s).value - 2f64.sqrt()).abs() < 1e-14);
        assert!((operator_norm(&phi2(1.0)).value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn one_plus_z_is_golden_ratio() {
        // [[1,1],[1,0]] has eigenvalues (1 ± √5)/2
        let s = Symbol::from_real(1, &[(&[0], 1.0), (&[1], 1.0)]).unwrap();
        let m = build_matrix(&s);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_norm(&m).value - golden).abs() < 1e-14);
        assert!((power_norm(&m.entries) - golden).abs() < 1e-12);
    }

    #[test]
    fn gram_route_matches_power_iteration() {
        let s = Symbol::new(
            2,
            [
                ([0, 1].into(), Complex64::new(0.5, -1.0)),
                ([2, 1].into(), Complex64::new(1.0, 0.25)),
                ([1, 3].into(), Complex64::new(-0.7, 0.0)),
            ],
        )
        .unwrap();
        let m = build_matrix(&s);
        let a = spectral_norm(&m).value;
        assert!((a - power_norm(&m.entries)).abs() < 1e-10 * a);
        // wide shape goes through the other Gram product
        let t = m.entries.columns(0, 3).transpose();
        assert!((spectral_norm_of(&t).value - power_norm(&t)).abs() < 1e-10);
    }

    #[test]
    fn dump_round_trip() {
        let m = build_block(&phi3(0.4), 1).unwrap();
        let text = m.to_dump();
        assert!(text.starts_with("rows 3 cols 2\n1.0,0.0 0.4,0.0\n"));
        assert_eq!(HankelMatrix::parse_dump(&text).unwrap(), m.entries);
        assert!(HankelMatrix::parse_dump("rows 1 cols 2\n1,0\n").is_err());
    }

    #[test]
    fn operator_norm_by_blocks_matches_full() {
        let s = phi3(0.7);
        let full = operator_norm(&s).value;
        let blocks = operator_norm_by_blocks(&s).unwrap().value;
        assert!((full - blocks).abs() < 1e-12);
    }
}
