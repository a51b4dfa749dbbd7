//! Numerics for a sixteen-component family of double Dirichlet series.
//!
//! The objects of study are the functions
//!
//! ```text
//! Z(s, w; psi, psi') = zeta2(2s + 2w - 1) * sum_{d odd >= 1} L2(s, chi_d psi) psi'(d) d^{-w}
//! ```
//!
//! where `psi, psi'` run over the four real characters mod 8, `chi_d` is the
//! quadratic character attached to `d` through the Kronecker symbol, and the
//! subscript 2 means the Euler factor at 2 has been removed.  Stacking the
//! sixteen `(psi, psi')` components into a vector, the family satisfies an
//! exact functional-equation group: a constant involution that swaps `s` and
//! `w`, and a gamma-factor matrix that reflects `s -> 1-s`.  Together they
//! generate a dihedral group of order 12 acting on `(s, w)`, which is what the
//! [`feq`] module implements and what [`critical`] uses to evaluate the vector
//! on the critical lines `Re s = Re w = 1/2`.
//!
//! Module map:
//!
//! * [`characters`] — Kronecker/Jacobi symbols, the four characters mod 8,
//!   squarefree decomposition, conductors and parities of the attached
//!   primitive characters.
//! * [`kernels`] — complex log-gamma, gamma ratios, the smoothing kernels used
//!   by the approximate functional equation and the critical-line contour
//!   integral, and vertical-line quadrature.
//! * [`lfunctions`] — quadratic L-values: a Hurwitz-zeta oracle, a smoothed
//!   approximate-functional-equation evaluator for bulk work, and a
//!   persistent cache for critical-line values.
//! * [`zcore`] — the three convergent-region representations of the
//!   sixteen-vector and truncation-tail accounting.
//! * [`feq`] — the exact swap involution, the reflection matrix blocks, their
//!   composition, the order-12 group of point maps, and analytic continuation
//!   by conjugating an evaluation into a convergent region.
//! * [`critical`] — evaluation on the critical lines through a pole-cancelling
//!   two-line contour identity.
//! * [`bounds`] — mean-value experiments: Dirichlet-polynomial integrals and
//!   tuple counts, a quadratic large-sieve ratio check, smoothed coefficient
//!   sums, dyadic block sums, growth scans and mean-square integrals on the
//!   critical lines.
//! * [`rng`] — the documented deterministic generator used by every
//!   randomized check.
//! * [`quad`] — Gauss–Legendre panel quadrature shared by the kernel and
//!   contour integrals.

pub mod bounds;
pub mod characters;
pub mod critical;
pub mod error;
pub mod feq;
pub mod kernels;
pub mod lfunctions;
pub mod parallel;
pub mod quad;
pub mod rng;
pub mod zcore;

pub use bounds::{
    bilinear_ratio, block_mean_square, block_moment_envelope, dyadic_block_sum, first_moment_ratio,
    fit_loglog, growth_scan, mean_square, near_diagonal_count, smoothed_line_sum, BlockInstance,
    Bump, DyadicSumKind, GrowthFit, GrowthSample, GrowthSlice, LineFit, MeanSquareReport,
    PhaseLayout, TupleCount,
};
pub use characters::{CharDecomposition, CharIndex};
pub use critical::{analytic_conductor, near_switch, z_critical, CriticalEngine, CriticalPoint};
pub use error::{MdsError, Result};
pub use feq::{continue_z, group_orbit, matrix_a, matrix_b, matrix_m, Continuation, FEMatrix, PointMap};
pub use kernels::KernelConfig;
pub use lfunctions::{LCache, LMethod, LQuery};
pub use quad::{Complex64, ContourSpec};
pub use zcore::{Representation, TruncationPlan, ZVector};
