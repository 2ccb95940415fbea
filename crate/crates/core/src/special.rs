//! Gamma-function and sphere-measure primitives.
//!
//! Everything downstream routes gamma evaluations through [`log_gamma`] and
//! exponentiates only final ratios, so the closed forms stay finite for
//! dimensions well past `n = 50` even though individual gamma factors
//! overflow long before that.
//!
//! Sphere areas are indexed by the *ambient* dimension, exactly as in the
//! formulas this crate implements: `sphere_area(n)` is the surface measure
//! of the unit sphere `S^{n-1}` in `R^n`, i.e. `omega_n = 2 pi^{n/2} /
//! Gamma(n/2)`. Keep that convention in mind — the off-by-one variant
//! (`|S^n|`) is a classic source of silent factor errors.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("log_gamma requires a positive argument, got {0}")]
    NonPositive(f64),
    #[error("sphere_area requires ambient dimension n >= 1, got {0}")]
    SphereDimension(u32),
    #[error("spatial dimension must be at least 2, got {0}")]
    DimensionTooSmall(u32),
}

/// Spatial dimension `n >= 2` of the ambient space `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dim(u32);

impl Dim {
    pub fn new(n: u32) -> Result<Self, SpecialError> {
        if n >= 2 {
            Ok(Dim(n))
        } else {
            Err(SpecialError::DimensionTooSmall(n))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// The dimension as a float, for use inside formulas.
    pub fn nf(self) -> f64 {
        f64::from(self.0)
    }
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// ln(2*pi)/2
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;

/// B_{2k} / (2k (2k-1)) for the Stirling series of ln Gamma.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Natural log of the gamma function for `x > 0`.
///
/// Uses the Stirling series for `x >= 10` and the recurrence
/// `ln Gamma(x) = ln Gamma(x+1) - ln x` to shift smaller arguments into
/// that regime. Accuracy is about `1e-14` relative (absolute near the
/// zeros at `x = 1, 2`, which are returned exactly).
pub fn log_gamma(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) {
        return Err(SpecialError::NonPositive(x));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for &c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv - shift
}

/// Area `omega_n` of the unit sphere `S^{n-1}` in `R^n`.
///
/// `n = 1` is allowed internally (`omega_1 = 2`, the two-point "sphere").
pub fn sphere_area(n: u32) -> Result<f64, SpecialError> {
    Ok(ln_sphere_area(n)?.exp())
}

/// ln of [`sphere_area`]; used when sphere areas enter large ratios.
pub(crate) fn ln_sphere_area(n: u32) -> Result<f64, SpecialError> {
    if n < 1 {
        return Err(SpecialError::SphereDimension(n));
    }
    let nf = f64::from(n);
    Ok(std::f64::consts::LN_2 + 0.5 * nf * std::f64::consts::PI.ln()
        - log_gamma_unchecked(0.5 * nf))
}

/// `int_0^pi sin^k(phi) dphi = sqrt(pi) Gamma((k+1)/2) / Gamma((k+2)/2)`.
pub fn sine_moment(k: u32) -> f64 {
    let kf = f64::from(k);
    (0.5 * std::f64::consts::PI.ln() + log_gamma_unchecked(0.5 * (kf + 1.0))
        - log_gamma_unchecked(0.5 * (kf + 2.0)))
    .exp()
}
