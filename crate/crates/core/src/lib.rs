//! Small Hankel operators `H_φ f = P̄(φ̄ f)` on the d-torus with polynomial
//! symbols.
//!
//! * [`symbol`]: sparse polynomial symbols and their text format.
//! * [`hankel`]: the operator matrix, its homogeneous blocks and spectral norms.
//! * [`minimal`]: minimal-norm classification and the separate-variable recipe.
//! * [`quadrature`]: `H^p` norms by grid, Monte Carlo and 1-D reductions.
//! * [`nehari`]: lower bounds for the Nehari constant and related diagnostics.
//! * [`cli`]: the `hankel-lab` command-line front end.

pub mod cli;
pub mod error;
pub mod hankel;
pub mod minimal;
pub mod nehari;
pub mod par;
pub mod quadrature;
pub mod symbol;

pub use error::{Error, Result};
pub use hankel::{
    active_bases, build_block, build_matrix, operator_norm, spectral_norm, HankelMatrix,
    NormEstimate, NormMethod,
};
pub use minimal::{
    build_recipe, classify, classify_homogeneous, d1_monomial_test, MinimalityStatus,
    MinimalityVerdict, RecipeExpr,
};
pub use nehari::{BoundMethod, BoundReport, PsiSeries};
pub use num_complex::Complex64;
pub use quadrature::{hp_norm, QuadratureMethod, QuadratureSpec};
pub use symbol::{MultiIndex, Symbol};
