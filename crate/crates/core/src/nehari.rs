//! Lower bounds for the Nehari constant `C_d`, the truncated counterexample
//! symbol and its diverging dual ratios, and the Nehari solution `ψ` for
//! `z₁ + z₂`.
//!
//! Every bound here comes from testing against an `H¹` function `f`:
//! `C_d ≥ |⟨f, φ⟩| / (‖H_φ‖ ‖f‖_{H¹})`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::{operator_norm, NormEstimate, NormMethod};
use crate::minimal::{build_recipe, RecipeExpr};
use crate::par;
use crate::quadrature::{h1_norm_2hom, hp_norm, hq_norm_basic, QuadratureSpec};
use crate::symbol::{MultiIndex, Symbol};

/// Absolute tolerance used for the one-dimensional `H¹` reductions.
pub const H1_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    PairProduct,
    WitnessPower,
    DualPairing,
    Search,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMethod::PairProduct => "pair-product",
            BoundMethod::WitnessPower => "witness-power",
            BoundMethod::DualPairing => "dual-pairing",
            BoundMethod::Search => "search",
        })
    }
}

/// The test function and symbol behind a dual-pairing bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub f: Symbol,
    pub phi: Symbol,
    pub pairing: Complex64,
    pub operator_norm: NormEstimate,
    pub h1_norm: NormEstimate,
}

impl Witness {
    /// `|⟨f, φ⟩| / (‖H_φ‖ ‖f‖_{H¹})`, recomputed from the stored fields.
    pub fn ratio(&self) -> f64 {
        self.pairing.norm() / (self.operator_norm.value * self.h1_norm.value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub d: usize,
    /// Lower bound for `C_d`; never below the trivial bound 1.
    pub bound_value: f64,
    pub method: BoundMethod,
    pub witness: Option<Witness>,
}

impl BoundReport {
    /// The raw pairing ratio when a witness is present, else `bound_value`.
    pub fn ratio(&self) -> f64 {
        self.witness.as_ref().map_or(self.bound_value, Witness::ratio)
    }
}

/// `‖f‖_{H¹}`, through the 1-D reduction when `f` is homogeneous in at most
/// two variables and through `spec` otherwise.
pub fn h1_norm(f: &Symbol, spec: &QuadratureSpec) -> Result<NormEstimate> {
    let reducible = f.is_homogeneous().is_some() && f.variable_support().len() <= 2;
    if reducible {
        h1_norm_2hom(f, H1_TOL)
    } else {
        hp_norm(f, 1.0, spec)
    }
}

/// The dual-pairing bound for a test function `f` and a symbol `phi`. The
/// operator norm is computed, never assumed.
pub fn dual_bound(f: &Symbol, phi: &Symbol, spec: &QuadratureSpec) -> Result<BoundReport> {
    if f.is_zero() || phi.is_zero() {
        return Err(Error::contract("dual bound needs nonzero f and φ"));
    }
    let pairing = f.pairing(phi)?;
    let op = operator_norm(phi);
    let h1 = h1_norm(f, spec)?;
    Ok(report_from(f.clone(), phi.clone(), pairing, op, h1, BoundMethod::DualPairing))
}

fn report_from(
    f: Symbol,
    phi: Symbol,
    pairing: Complex64,
    operator_norm: NormEstimate,
    h1_norm: NormEstimate,
    method: BoundMethod,
) -> BoundReport {
    let witness = Witness {
        f,
        phi,
        pairing,
        operator_norm,
        h1_norm,
    };
    BoundReport {
        d: witness.phi.dim(),
        bound_value: witness.ratio().max(1.0),
        method,
        witness: Some(witness),
    }
}

fn check_even(d: usize) -> Result<()> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::domain(format!("d = {d} must be even and at least 2")));
    }
    Ok(())
}

/// `5π / (π + 6√3)`, the two-variable bound.
pub fn c2_lower_value() -> f64 {
    5.0 * PI / (PI + 6.0 * 3f64.sqrt())
}

/// `C_d ≥ (5π/(π+6√3))^{d/2}` for even `d`.
pub fn cd_lower(d: usize) -> Result<BoundReport> {
    check_even(d)?;
    Ok(BoundReport {
        d,
        bound_value: c2_lower_value().powi((d / 2) as i32),
        method: BoundMethod::WitnessPower,
        witness: None,
    })
}

/// `C_d ≥ (π²/8)^{d/4}` for even `d`.
pub fn pair_product_lower(d: usize) -> Result<BoundReport> {
    check_even(d)?;
    let base = PI / (2.0 * 2f64.sqrt());
    Ok(BoundReport {
        d,
        bound_value: base.powi((d / 2) as i32),
        method: BoundMethod::PairProduct,
        witness: None,
    })
}

/// `z₁² + c z₁z₂ + z₂²`.
pub fn quadratic_family(c: f64) -> Symbol {
    Symbol::from_real(2, &[(&[2, 0], 1.0), (&[1, 1], c), (&[0, 2], 1.0)])
        .expect("fixed two-variable family")
}

pub const SEARCH_GRID: usize = 101;
pub const SEARCH_C_TOL: f64 = 1e-6;

/// Maximize the dual bound for `φ = z₁² + a z₁z₂ + z₂²` over test functions
/// `f = z₁² + c z₁z₂ + z₂²`, `c ∈ c_range`.
///
/// A 101-point scan locates the peak, which must be interior; golden-section
/// search then refines `c` to within 1e-6.
pub fn search_c2(a: f64, c_range: (f64, f64)) -> Result<(f64, BoundReport)> {
    if a.is_nan() || a > 0.5 {
        return Err(Error::domain(format!(
            "a = {a} > 1/2: the symbol is not minimal and the search assumes it is"
        )));
    }
    let (lo, hi) = c_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain("c range must be a finite interval with lo < hi"));
    }
    let phi = quadratic_family(a);
    let op = operator_norm(&phi);
    let objective = |c: f64| -> f64 {
        let f = quadratic_family(c);
        let pairing = f.pairing(&phi).expect("same dimension").norm();
        let h1 = h1_norm_2hom(&f, H1_TOL).expect("reducible family").value;
        pairing / (op.value * h1)
    };

    let step = (hi - lo) / (SEARCH_GRID - 1) as f64;
    let scan = par::map_indexed(SEARCH_GRID, |i| objective(lo + step * i as f64));
    let (best_i, _) = scan
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty scan");
    if best_i == 0 || best_i == SEARCH_GRID - 1 {
        return Err(Error::domain(format!(
            "dual bound peaks at the edge of [{lo}, {hi}]; widen the range"
        )));
    }
    let c = golden_section_max(
        &objective,
        lo + step * (best_i - 1) as f64,
        lo + step * (best_i + 1) as f64,
        SEARCH_C_TOL,
    );
    let f = quadratic_family(c);
    let pairing = f.pairing(&phi)?;
    let h1 = h1_norm_2hom(&f, H1_TOL)?;
    let report = report_from(f, phi, pairing, op, h1, BoundMethod::Search);
    Ok((c, report))
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// `√6/π`, the normalizing constant of the counterexample.
pub fn cex_scale() -> f64 {
    6f64.sqrt() / PI
}

/// Recipe for the counterexample truncated at `k = K`: the sum over
/// `k = 1..=K` of `(√6/π)/k` times the product of `(z_{2j−1}+z_{2j})/√2`
/// for `j` in the `k`-th block of `k` consecutive pairs.
pub fn cex_recipe(k_max: usize) -> Result<RecipeExpr> {
    if k_max == 0 {
        return Err(Error::domain("truncation K must be at least 1"));
    }
    let dim = k_max * (k_max + 1);
    let pair_scale = 1.0 / 2f64.sqrt();
    let terms = (1..=k_max)
        .map(|k| {
            let first_pair = (k - 1) * k / 2; // zero-based
            let factors = (0..k)
                .map(|i| {
                    let j = first_pair + i;
                    // the 1/k weight rides on the first factor of each product
                    let w = if i == 0 {
                        cex_scale() / k as f64 * pair_scale
                    } else {
                        pair_scale
                    };
                    let w = Complex64::new(w, 0.0);
                    RecipeExpr::Sum(vec![
                        RecipeExpr::leaf(w, MultiIndex::unit(dim, 2 * j)),
                        RecipeExpr::leaf(w, MultiIndex::unit(dim, 2 * j + 1)),
                    ])
                })
                .collect();
            RecipeExpr::Product(factors)
        })
        .collect();
    Ok(RecipeExpr::Sum(terms))
}

/// The counterexample truncated at `k = K`, in `K(K+1)` variables.
pub fn cex_truncation(k_max: usize) -> Result<Symbol> {
    build_recipe(&cex_recipe(k_max)?)
}

/// `(√6/π) √(Σ_{k≤K} k^{-2})`, the H² norm of the truncation.
pub fn cex_h2_closed_form(k_max: usize) -> f64 {
    let s: f64 = (1..=k_max).map(|k| 1.0 / (k * k) as f64).sum();
    cex_scale() * s.sqrt()
}

fn check_ratio_q(q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::domain(format!("q = {q} outside [1, 2)")));
    }
    Ok(())
}

/// `R_k(q) = (√6/π) k^{-1} r(q)^{-k}` with `r(q) = ‖(z₁+z₂)/√2‖_{H^q}`: the
/// pairing of the `k`-th product block against the counterexample divided by
/// the block's `H^q` norm.
///
/// At `q = 2` the ratio is `(√6/π)/k`, which tends to zero; it is returned
/// rather than rejected.
pub fn cex_ratio(k: usize, q: f64) -> Result<f64> {
    Ok(cex_ratios(k, q)?[k - 1])
}

/// `[R_1(q), …, R_kmax(q)]`, sharing one evaluation of `r(q)`.
pub fn cex_ratios(k_max: usize, q: f64) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    check_ratio_q(q)?;
    let r = hq_norm_basic(q)?.value;
    Ok((1..=k_max)
        .map(|k| cex_scale() / k as f64 * r.powi(-(k as i32)))
        .collect())
}

/// The smallest `k₀ ≤ k_max` such that `R_k(q)` is strictly increasing for
/// `k₀ ≤ k ≤ k_max`, or `None` when the tail is not increasing.
pub fn cex_increasing_from(q: f64, k_max: usize) -> Result<Option<usize>> {
    let r = cex_ratios(k_max, q)?;
    if k_max < 2 || r[k_max - 1] <= r[k_max - 2] {
        return Ok(None);
    }
    let mut k0 = k_max - 1;
    while k0 >= 2 && r[k0 - 1] > r[k0 - 2] {
        k0 -= 1;
    }
    Ok(Some(k0))
}

/// Symmetric partial sums `ψ_K(z) = Σ_{|k|≤K} (−1)^k/(1−2k) z₁^{1−k} z₂^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsiSeries {
    pub truncation: usize,
}

impl PsiSeries {
    pub fn new(truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::domain("truncation K must be at least 1"));
        }
        Ok(PsiSeries { truncation })
    }

    pub fn coefficient(&self, k: i64) -> f64 {
        if k.unsigned_abs() as usize > self.truncation {
            return 0.0;
        }
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign / (1 - 2 * k) as f64
    }

    /// `Σ_k c_k e^{ikt}`, so that `ψ_K(θ₁, θ₂) = e^{iθ₁} g(θ₂ − θ₁)`.
    fn reduced(&self, t: f64) -> Complex64 {
        let k = self.truncation as i64;
        (-k..=k)
            .map(|j| self.coefficient(j) * Complex64::cis(j as f64 * t))
            .sum()
    }
}

/// `ψ_K(e^{iθ₁}, e^{iθ₂})` summed term by term.
pub fn psi_evaluate(ps: &PsiSeries, theta1: f64, theta2: f64) -> Complex64 {
    let k = ps.truncation as i64;
    (-k..=k)
        .map(|j| ps.coefficient(j) * Complex64::cis((1 - j) as f64 * theta1 + j as f64 * theta2))
        .sum()
}

/// Maximum of `|ψ_K|` over the uniform `N × N` grid on `[0, 2π)²`.
///
/// Since `|ψ_K(θ₁, θ₂)|` depends only on `θ₂ − θ₁`, and on the grid that
/// difference ranges over the `N` values `2πj/N`, one sweep over `j` covers
/// the whole grid. `ψ` jumps across `θ₂ − θ₁ = π`; the slow `1/k` decay leaves
/// a tail error of order `1/(K δ)` at distance `δ` from the jump, and the grid
/// point nearest the jump sits at `δ = 2π/N`. That figure is reported as the
/// error bound.
pub fn psi_sup_estimate(truncation: usize, grid: usize) -> Result<NormEstimate> {
    let ps = PsiSeries::new(truncation)?;
    if grid < 16 {
        return Err(Error::domain("psi grid needs at least 16 points per dimension"));
    }
    let values = par::map_indexed(grid, |j| ps.reduced(TAU * j as f64 / grid as f64).norm());
    let (argmax, max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    let delta = TAU / grid as f64;
    let tail = 1.0 / (truncation as f64 * delta);
    Ok(NormEstimate::new(max, NormMethod::GridQuadrature, tail)
        .with("truncation", truncation)
        .with("grid", format!("{grid} x {grid}"))
        .with("argmax-theta2-minus-theta1", TAU * argmax as f64 / grid as f64)
        .with("tail", "error ~ 1/(K·2π/N) near the jump at θ₂−θ₁ = π")
        .with("lower-estimate", true))
}

/// The analytic part of `ψ_K`: the terms whose exponents `(1−k, k)` are both
/// nonnegative, i.e. `k ∈ {0, 1}`.
pub fn psi_projection(ps: &PsiSeries) -> Symbol {
    let k = ps.truncation as i64;
    let terms = (-k..=k)
        .filter(|&j| j >= 0 && 1 - j >= 0)
        .map(|j| {
            (
                MultiIndex::new(vec![(1 - j) as u32, j as u32]),
                Complex64::new(ps.coefficient(j), 0.0),
            )
        });
    Symbol::new(2, terms).expect("two-variable terms")
}
