//! Random generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use hankel_lab::minimal::RecipeExpr;
use hankel_lab::{Complex64, MultiIndex, Symbol};
use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All multi-indices in `dim` variables of total degree exactly `m`.
pub fn indices_of_degree(dim: usize, m: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(MultiIndex::new(cur.clone()));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, m, &mut Vec::new(), &mut out);
    out
}

pub fn indices_up_to(dim: usize, max_deg: u32) -> Vec<MultiIndex> {
    (0..=max_deg).flat_map(|m| indices_of_degree(dim, m)).collect()
}

fn coefficient(rng: &mut ChaCha8Rng, complex: bool) -> Complex64 {
    let re = rng.random_range(-2.0..2.0);
    let im = if complex { rng.random_range(-2.0..2.0) } else { 0.0 };
    Complex64::new(re, im)
}

/// A nonzero symbol with at most `max_terms` terms of degree ≤ `max_deg`.
pub fn random_symbol(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_deg: u32,
    max_terms: usize,
    complex: bool,
) -> Symbol {
    let pool = indices_up_to(dim, max_deg);
    loop {
        let n = rng.random_range(1..=max_terms);
        let picked: Vec<MultiIndex> = pool.choose_multiple(rng, n).cloned().collect();
        let terms: Vec<(MultiIndex, Complex64)> = picked
            .into_iter()
            .map(|a| (a, coefficient(rng, complex)))
            .collect();
        let s = Symbol::new(dim, terms).unwrap();
        if !s.is_zero() {
            return s;
        }
    }
}

/// Like [`random_symbol`] but with no constant term.
pub fn random_vanishing_symbol(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_deg: u32,
    max_terms: usize,
) -> Symbol {
    loop {
        let s = random_symbol(rng, dim, max_deg, max_terms, true);
        let s = s.checked_add(&Symbol::monomial(MultiIndex::zeros(dim), -s.value_at_origin()).unwrap()).unwrap();
        if !s.is_zero() {
            return s;
        }
    }
}

/// A nonzero `m`-homogeneous symbol.
pub fn random_homogeneous(rng: &mut ChaCha8Rng, dim: usize, m: u32, complex: bool) -> Symbol {
    let pool = indices_of_degree(dim, m);
    loop {
        let mut terms: Vec<(MultiIndex, Complex64)> = Vec::new();
        for a in &pool {
            if rng.random_bool(0.6) {
                terms.push((a.clone(), coefficient(rng, complex)));
            }
        }
        let s = Symbol::new(dim, terms).unwrap();
        if !s.is_zero() {
            return s;
        }
    }
}

/// Largest singular value by a full SVD.
pub fn svd_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Hankel matrix over every multi-index of degree ≤ the symbol degree, with
/// no pruning to the active basis.
pub fn brute_force_matrix(s: &Symbol) -> DMatrix<Complex64> {
    let deg = s.degree().unwrap_or(0);
    let basis = indices_up_to(s.dim(), deg);
    DMatrix::from_fn(basis.len(), basis.len(), |i, j| s.coefficient(&(&basis[i] + &basis[j])).conj())
}

/// Product of `(max exponent + 1)` over variables, an upper bound on the
/// active basis size.
pub fn basis_bound(s: &Symbol) -> usize {
    let mut top = vec![0u32; s.dim()];
    for (a, _) in s.terms() {
        for (t, &e) in top.iter_mut().zip(a.exponents()) {
            *t = (*t).max(e);
        }
    }
    top.iter().map(|&e| e as usize + 1).product()
}

/// A valid recipe with at most `max_leaves` leaves in at most `max_dim`
/// variables. Leaves use pairwise disjoint variables.
pub fn random_recipe(rng: &mut ChaCha8Rng, max_leaves: usize, max_dim: usize) -> RecipeExpr {
    let leaves = rng.random_range(1..=max_leaves);
    let dim = rng.random_range(leaves..=max_dim);
    let mut vars: Vec<usize> = (0..dim).collect();
    vars.shuffle(rng);
    let mut cuts: Vec<usize> = (1..dim).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(leaves - 1).collect();
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(dim);
    let mut nodes: Vec<RecipeExpr> = bounds
        .windows(2)
        .map(|w| {
            let mut e = vec![0u32; dim];
            for &v in &vars[w[0]..w[1]] {
                e[v] = if w[1] - w[0] == 1 { rng.random_range(1..=2) } else { 1 };
            }
            let mut c = coefficient(rng, true);
            if c.norm() < 0.1 {
                c += 0.5;
            }
            RecipeExpr::leaf(c, MultiIndex::new(e))
        })
        .collect();
    while nodes.len() > 1 {
        let take = rng.random_range(2..=nodes.len().min(3));
        let at = rng.random_range(0..=nodes.len() - take);
        let group: Vec<RecipeExpr> = nodes.drain(at..at + take).collect();
        let node = if rng.random_bool(0.5) {
            RecipeExpr::Sum(group)
        } else {
            RecipeExpr::Product(group)
        };
        nodes.insert(at, node);
    }
    nodes.pop().unwrap()
}
