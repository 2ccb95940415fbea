//! Sharp constants in pointwise gradient estimates for harmonic functions
//! in the half-space with `L^p` boundary data.
//!
//! For a harmonic function `u` on the upper half-space of `R^n` represented
//! by the Poisson integral of boundary data `f` with finite `L^p` norm, the
//! gradient satisfies the sharp bound
//!
//! ```text
//! |grad u(x)| <= C_p * x_n^{(1-n-p)/p} * ||f||_p .
//! ```
//!
//! This crate computes the dimensionless factor `C_p` along several
//! independent routes and cross-checks them:
//!
//! * [`closed_form`] — exact expressions for `p = 1, 2, infinity` and the
//!   auxiliary moment integrals behind them;
//! * [`variational`] — direction-resolved constants `C_p(beta)` by hemisphere
//!   quadrature, by a kink-split double integral, and by a smooth
//!   single-integral route for `p = infinity`, with supremum searches over
//!   the direction parameter;
//! * [`inequality`] — scannable forms of the algebraic inequality (and its
//!   two corollaries) used in the `p = infinity` analysis;
//! * [`poisson`] — direct evaluation of `u` and `grad u` from boundary data
//!   through the Poisson integral, near-extremal boundary data, and
//!   empirical sharpness ratios.
//!
//! [`special`] and [`quadrature`] supply the gamma/sphere-measure primitives
//! and the deterministic Gauss-Legendre engine everything else is built on.

pub mod closed_form;
pub mod inequality;
pub mod poisson;
pub mod quadrature;
pub mod special;
pub mod variational;

pub use closed_form::{ConstantResult, Exponent, Method};
pub use quadrature::{Estimate, QuadError, QuadratureSpec};
pub use special::Dim;
pub use variational::Direction;
