//! `H^p` norms of polynomial symbols on the torus.
//!
//! Three routes are available:
//!
//! * a uniform tensor grid on `[0, 2π)^d` (periodic trapezoid rule), run at
//!   `N` and `2N` points per dimension so the difference serves as the error
//!   estimate;
//! * seeded Monte Carlo sampling with a ChaCha stream per chunk;
//! * one-dimensional adaptive Gauss–Kronrod quadrature, used when
//!   homogeneity collapses the torus integral to a single angle.
//!
//! `|φ|^p` has kinks wherever `φ` vanishes, so grid convergence is only
//! algebraic. The 1-D reductions are the accurate path.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::{NormEstimate, NormMethod};
use crate::par;
use crate::symbol::Symbol;

/// Largest dimension accepted by the tensor grid.
pub const MAX_TENSOR_DIM: usize = 4;
/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 1_000_000;
const MC_CHUNK: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    TensorUniform,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub points_per_dimension: usize,
    pub method: QuadratureMethod,
    /// Only used by Monte Carlo.
    pub seed: u64,
    /// Only used by Monte Carlo.
    pub samples: usize,
}

impl QuadratureSpec {
    pub fn tensor(points_per_dimension: usize) -> Self {
        QuadratureSpec {
            points_per_dimension,
            method: QuadratureMethod::TensorUniform,
            seed: 0,
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn monte_carlo(seed: u64, samples: usize) -> Self {
        QuadratureSpec {
            points_per_dimension: 64,
            method: QuadratureMethod::MonteCarlo,
            seed,
            samples,
        }
    }

    /// N = 256 for d ≤ 2 and N = 64 for d = 3, 4; Monte Carlo (seed 0) beyond.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            0..=2 => QuadratureSpec::tensor(256),
            3..=MAX_TENSOR_DIM => QuadratureSpec::tensor(64),
            _ => QuadratureSpec::monte_carlo(0, DEFAULT_SAMPLES),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_dimension < 4 {
            return Err(Error::domain("grid needs at least 4 points per dimension"));
        }
        if self.method == QuadratureMethod::MonteCarlo && self.samples < 1000 {
            return Err(Error::domain("monte carlo needs at least 1000 samples"));
        }
        Ok(())
    }
}

/// `|w|^p` for finite `p ≥ 1`.
fn abs_pow(w: Complex64, p: f64) -> f64 {
    if p == 1.0 {
        w.norm()
    } else if p == 2.0 {
        w.norm_sqr()
    } else {
        w.norm_sqr().powf(p / 2.0)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("exponent p = {p} must be at least 1")));
    }
    Ok(())
}

/// `‖φ‖_{H^p}` by grid quadrature or Monte Carlo. `p = f64::INFINITY` returns
/// the sampled maximum, a lower estimate of the sup norm.
pub fn hp_norm(s: &Symbol, p: f64, spec: &QuadratureSpec) -> Result<NormEstimate> {
    check_exponent(p)?;
    spec.validate()?;
    if s.is_zero() {
        return Err(Error::contract("norm of the zero symbol requested"));
    }
    match spec.method {
        QuadratureMethod::TensorUniform => tensor_norm(s, p, spec.points_per_dimension),
        QuadratureMethod::MonteCarlo => Ok(monte_carlo_norm(s, p, spec.seed, spec.samples)),
    }
}

#[derive(Clone, Copy, Default)]
struct SliceStats {
    fine: f64,
    coarse: f64,
    fine_max: f64,
    coarse_max: f64,
}

fn tensor_norm(s: &Symbol, p: f64, n: usize) -> Result<NormEstimate> {
    let d = s.dim();
    if d > MAX_TENSOR_DIM {
        return Err(Error::domain(format!(
            "tensor grid supports d ≤ {MAX_TENSOR_DIM}, got d = {d}; use monte carlo"
        )));
    }
    let m = 2 * n;
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::cis(TAU * k as f64 / m as f64))
        .collect();
    let terms: Vec<(Vec<usize>, Complex64)> = s
        .terms()
        .map(|(a, c)| (a.exponents().iter().map(|&e| e as usize % m).collect(), *c))
        .collect();
    let sup = p.is_infinite();

    let slices: Vec<SliceStats> = par::map_indexed(m, |first| {
        let mut idx = vec![0usize; d];
        idx[0] = first;
        let mut fine = Vec::with_capacity(m.pow(d as u32 - 1));
        let mut coarse = Vec::new();
        let mut st = SliceStats::default();
        loop {
            let w: Complex64 = terms
                .iter()
                .map(|(e, c)| {
                    let k = e.iter().zip(&idx).map(|(a, b)| a * b).sum::<usize>() % m;
                    c * roots[k]
                })
                .sum();
            let on_coarse = idx.iter().all(|i| i % 2 == 0);
            if sup {
                let v = w.norm();
                st.fine_max = st.fine_max.max(v);
                if on_coarse {
                    st.coarse_max = st.coarse_max.max(v);
                }
            } else {
                let v = abs_pow(w, p);
                fine.push(v);
                if on_coarse {
                    coarse.push(v);
                }
            }
            // odometer over the trailing coordinates
            let mut j = d;
            loop {
                if j == 1 {
                    st.fine = par::compensated_sum(fine);
                    st.coarse = par::compensated_sum(coarse);
                    return st;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < m {
                    break;
                }
                idx[j] = 0;
            }
        }
    });

    let coarse_points = (n as f64).powi(d as i32);
    let fine_points = (m as f64).powi(d as i32);
    let est = if sup {
        let fine = slices.iter().map(|s| s.fine_max).fold(0.0, f64::max);
        let coarse = slices.iter().map(|s| s.coarse_max).fold(0.0, f64::max);
        NormEstimate::new(fine, NormMethod::GridQuadrature, fine - coarse)
            .with("lower-estimate", true)
    } else {
        let fine_mean = par::compensated_sum(slices.iter().map(|s| s.fine)) / fine_points;
        let coarse_mean = par::compensated_sum(slices.iter().map(|s| s.coarse)) / coarse_points;
        let fine = fine_mean.powf(1.0 / p);
        let coarse = coarse_mean.powf(1.0 / p);
        // rounding floor: an exact rule still carries summation error
        let floor = 1e-13 * fine.max(f64::MIN_POSITIVE);
        NormEstimate::new(fine, NormMethod::GridQuadrature, (fine - coarse).abs() + floor)
    };
    Ok(est
        .with("p", p)
        .with("grid", format!("{n} vs {m} per dimension"))
        .with("dim", d))
}

#[derive(Clone, Copy, Default)]
struct ChunkStats {
    sum: f64,
    sum_sq: f64,
    max: f64,
}

fn monte_carlo_norm(s: &Symbol, p: f64, seed: u64, samples: usize) -> NormEstimate {
    let d = s.dim();
    let terms: Vec<(Vec<f64>, Complex64)> = s
        .terms()
        .map(|(a, c)| (a.exponents().iter().map(|&e| e as f64).collect(), *c))
        .collect();
    let chunks = samples.div_ceil(MC_CHUNK);
    let sup = p.is_infinite();
    let stats: Vec<ChunkStats> = par::map_indexed(chunks, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let count = MC_CHUNK.min(samples - i * MC_CHUNK);
        let mut angles = vec![0.0; d];
        let mut vals = Vec::with_capacity(count);
        let mut st = ChunkStats::default();
        for _ in 0..count {
            for a in angles.iter_mut() {
                *a = rng.random::<f64>() * TAU;
            }
            let w: Complex64 = terms
                .iter()
                .map(|(e, c)| {
                    let phase: f64 = e.iter().zip(&angles).map(|(x, t)| x * t).sum();
                    c * Complex64::cis(phase)
                })
                .sum();
            if sup {
                st.max = st.max.max(w.norm());
            } else {
                vals.push(abs_pow(w, p));
            }
        }
        st.sum = par::compensated_sum(vals.iter().copied());
        st.sum_sq = par::compensated_sum(vals.iter().map(|v| v * v));
        st
    });
    let base = |e: NormEstimate| {
        e.with("p", p)
            .with("seed", seed)
            .with("samples", samples)
            .with("generator", "chacha8, one stream per 10000-sample chunk")
    };
    if sup {
        let max = stats.iter().map(|s| s.max).fold(0.0, f64::max);
        return base(NormEstimate::new(max, NormMethod::MonteCarlo, 0.0).with("lower-estimate", true));
    }
    let n = samples as f64;
    let mean = par::compensated_sum(stats.iter().map(|s| s.sum)) / n;
    let mean_sq = par::compensated_sum(stats.iter().map(|s| s.sum_sq)) / n;
    let var = (mean_sq - mean * mean).max(0.0) * n / (n - 1.0);
    let se = (var / n).sqrt();
    let value = mean.powf(1.0 / p);
    // first-order propagation of 3 standard errors through x ↦ x^{1/p}
    let err = if mean > 0.0 {
        3.0 * se * value / (p * mean)
    } else {
        0.0
    };
    base(NormEstimate::new(value, NormMethod::MonteCarlo, err).with("std-error-of-mean", se))
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half, centre last).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of [`integrate_adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod quadrature: the interval with the largest
/// `|K15 − G7|` is bisected until the summed estimate drops below `tol` or
/// `max_intervals` is reached.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> AdaptiveResult {
    const INITIAL: usize = 16;
    let mut segs: Vec<(f64, f64, f64, f64)> = (0..INITIAL)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / INITIAL as f64;
            let hi = a + (b - a) * (i + 1) as f64 / INITIAL as f64;
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let total_err: f64 = segs.iter().map(|s| s.3).sum();
        if total_err <= tol || segs.len() >= max_intervals {
            break;
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one segment");
        let (lo, hi, _, _) = segs.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further in floating point
            segs.push((lo, hi, gk15(&f, lo, hi).0, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    segs.sort_by(|x, y| x.0.total_cmp(&y.0));
    AdaptiveResult {
        value: par::compensated_sum(segs.iter().map(|s| s.2)),
        error: segs.iter().map(|s| s.3).sum(),
        intervals: segs.len(),
    }
}

const BASIC_TOL: f64 = 1e-13;
const MAX_INTERVALS: usize = 20_000;

fn check_q(q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::domain(format!("q = {q} outside [1, 2]")));
    }
    Ok(())
}

/// `‖(z₁+z₂)/√2‖_{H^q(𝕋²)}` for `1 ≤ q ≤ 2`.
///
/// Homogeneity gives `|z₁+z₂| = |1+e^{iθ}| = 2|cos(θ/2)|`, so the norm is
/// `2^{-1/2} ((2/π) ∫_0^{π/2} (2 sin v)^q dv)^{1/q}`.
pub fn hq_norm_basic(q: f64) -> Result<NormEstimate> {
    check_q(q)?;
    let r = integrate_adaptive(
        |v| (2.0 * v.sin()).powf(q),
        0.0,
        PI / 2.0,
        BASIC_TOL,
        MAX_INTERVALS,
    );
    let integral = 2.0 / PI * r.value;
    let integral_err = 2.0 / PI * r.error;
    let value = integral.powf(1.0 / q) / 2f64.sqrt();
    let err = value * integral_err / (q * integral);
    Ok(NormEstimate::new(value, NormMethod::AdaptiveQuadrature, err)
        .with("q", q)
        .with("intervals", r.intervals))
}

/// `1 + (2 log 2 − 1)(2 − q)/8`, the lower bound for `1/‖(z₁+z₂)/√2‖_{H^q}`.
pub fn plower_rhs(q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(1.0 + (2.0 * 2f64.ln() - 1.0) / 8.0 * (2.0 - q))
}

/// The intermediate estimate `2^{-1/2} (1 + q/2)^{1/q}` for
/// `1/‖(z₁+z₂)/√2‖_{H^q}`, from which [`plower_rhs`] follows by a Taylor
/// expansion at `q = 2`.
pub fn hq_basic_intermediate_bound(q: f64) -> Result<f64> {
    check_q(q)?;
    Ok((1.0 + q / 2.0).powf(1.0 / q) / 2f64.sqrt())
}

/// `‖f‖_{H^p}` for a homogeneous `f` depending on at most two variables.
///
/// With `m`-homogeneity `f(e^{iθ₁}, e^{iθ₂}) = e^{imθ₁} f(1, e^{i(θ₂−θ₁)})`,
/// so the torus integral is a single integral over `t = θ₂ − θ₁`.
pub fn hp_norm_2hom(s: &Symbol, p: f64, tol: f64) -> Result<NormEstimate> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Err(Error::domain("the 1-D reduction handles finite p only"));
    }
    if s.is_zero() {
        return Err(Error::contract("norm of the zero symbol requested"));
    }
    let m = s
        .is_homogeneous()
        .ok_or_else(|| Error::contract("reduction needs a homogeneous symbol"))?;
    let vars: Vec<usize> = s.variable_support().into_iter().collect();
    if vars.len() > 2 {
        return Err(Error::contract(format!(
            "reduction needs at most 2 active variables, found {}",
            vars.len()
        )));
    }
    let base = |e: NormEstimate| e.with("p", p).with("degree", m).with("reduction", "1-D in θ₂−θ₁");
    if vars.len() < 2 {
        // a single monomial: |f| is constant on the torus
        let (_, c) = s.terms().next().expect("nonzero symbol");
        return Ok(base(NormEstimate::new(c.norm(), NormMethod::ClosedForm, 0.0)));
    }
    let second = vars[1];
    let terms: Vec<(f64, Complex64)> = s
        .terms()
        .map(|(a, c)| (a.exponents()[second] as f64, *c))
        .collect();
    let g = |t: f64| {
        let w: Complex64 = terms.iter().map(|(e, c)| c * Complex64::cis(e * t)).sum();
        abs_pow(w, p)
    };
    let r = integrate_adaptive(g, 0.0, TAU, tol * TAU, MAX_INTERVALS);
    let mean = r.value / TAU;
    let mean_err = r.error / TAU;
    let value = mean.powf(1.0 / p);
    let err = value * mean_err / (p * mean);
    Ok(base(
        NormEstimate::new(value, NormMethod::AdaptiveQuadrature, err).with("intervals", r.intervals),
    ))
}

/// `‖f‖_{H¹}` via [`hp_norm_2hom`].
pub fn h1_norm_2hom(s: &Symbol, tol: f64) -> Result<NormEstimate> {
    hp_norm_2hom(s, 1.0, tol)
}
