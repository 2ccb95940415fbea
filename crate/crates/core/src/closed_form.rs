//! Closed-form expressions for the sharp constants and the auxiliary
//! integrals behind them. These are the ground truth the numerical routes
//! in [`crate::variational`] must reproduce.

use crate::special::{ln_sphere_area, log_gamma_unchecked, Dim, SpecialError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("moment integrals require n >= 3 (the sin^(n-3) weight), got n = {0}")]
    MomentsNeedN3(u32),
    #[error("finite exponent must satisfy p > 1, got {0}")]
    BadExponent(f64),
    #[error("cannot parse exponent token {0:?}: expected \"1\", \"inf\", or a decimal > 1")]
    ParseExponent(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Boundary-norm index `p` in `[1, infinity]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    One,
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// A finite exponent strictly greater than 1.
    pub fn finite(p: f64) -> Result<Self, ClosedFormError> {
        if p.is_finite() && p > 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(ClosedFormError::BadExponent(p))
        }
    }

    /// Conjugate exponent `q = p / (p - 1)`.
    pub fn conjugate(self) -> f64 {
        match self {
            Exponent::One => f64::INFINITY,
            Exponent::Finite(p) => p / (p - 1.0),
            Exponent::Infinity => 1.0,
        }
    }

    /// Exponent of `x_n` in the sharp coefficient `C_p(x) = C_p x_n^{(1-n-p)/p}`.
    pub fn xn_power(self, n: Dim) -> f64 {
        match self {
            Exponent::One => -n.nf(),
            Exponent::Finite(p) => (1.0 - n.nf() - p) / p,
            Exponent::Infinity => -1.0,
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = ClosedFormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinity);
        }
        match t.parse::<f64>() {
            Ok(v) if v == 1.0 => Ok(Exponent::One),
            Ok(v) if v.is_finite() && v > 1.0 => Ok(Exponent::Finite(v)),
            _ => Err(ClosedFormError::ParseExponent(s.to_string())),
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::One => write!(f, "1"),
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    HemisphereQuadrature,
    GammaSup,
    AlphaSup,
    DirectionScan,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::HemisphereQuadrature => "hemisphere_quadrature",
            Method::GammaSup => "gamma_sup",
            Method::AlphaSup => "alpha_sup",
            Method::DirectionScan => "direction_scan",
        }
    }
}

/// A computed constant with its error estimate and, where applicable, the
/// polar angle `beta` of the maximizing direction.
#[derive(Debug, Clone, Copy)]
pub struct ConstantResult {
    pub value: f64,
    pub abs_err: f64,
    pub argmax_beta: Option<f64>,
    pub method: Method,
}

fn ln_omega(n: u32) -> f64 {
    // n >= 1 structurally at every call site.
    ln_sphere_area(n).expect("sphere dimension >= 1")
}

/// `C_1 = 2 (n - 1) / omega_n`.
pub fn c1_closed(n: Dim) -> f64 {
    (std::f64::consts::LN_2 + (n.nf() - 1.0).ln() - ln_omega(n.get())).exp()
}

/// `C_2 = sqrt( n (n - 1) / (2^n omega_n) )`.
pub fn c2_closed(n: Dim) -> f64 {
    let nf = n.nf();
    (0.5 * (nf.ln() + (nf - 1.0).ln() - nf * std::f64::consts::LN_2 - ln_omega(n.get()))).exp()
}

/// `C_inf = 4 (n-1)^{(n-1)/2} omega_{n-1} / (n^{n/2} omega_n)`.
pub fn cinf_closed(n: Dim) -> f64 {
    let nf = n.nf();
    (2.0 * std::f64::consts::LN_2
        + 0.5 * (nf - 1.0) * (nf - 1.0).ln()
        + ln_omega(n.get() - 1)
        - 0.5 * nf * nf.ln()
        - ln_omega(n.get()))
    .exp()
}

/// The two moment integrals of the `p = 2` reduction:
///
/// ```text
/// I1 = int_0^pi sin^{n-3} phi dphi int_0^{pi/2} (n cos^2 th - 1)^2 sin^{n-2} th cos^n th dth
/// I2 = n^2 int_0^pi cos^2 phi sin^{n-3} phi dphi int_0^{pi/2} sin^n th cos^{n+2} th dth
/// ```
///
/// in closed form, `I1 = sqrt(pi) n (n-1) Gamma((n-2)/2) Gamma((n+1)/2) / (8 (n-1)!)`
/// and `I2 = I1 / (n - 1)`. Requires `n >= 3`.
pub fn moment_integrals(n: Dim) -> Result<(f64, f64), ClosedFormError> {
    if n.get() < 3 {
        return Err(ClosedFormError::MomentsNeedN3(n.get()));
    }
    let nf = n.nf();
    let ln_i2 = 0.5 * std::f64::consts::PI.ln() + nf.ln()
        + log_gamma_unchecked(0.5 * (nf - 2.0))
        + log_gamma_unchecked(0.5 * (nf + 1.0))
        - 3.0 * std::f64::consts::LN_2
        - log_gamma_unchecked(nf);
    let i2 = ln_i2.exp();
    Ok(((nf - 1.0) * i2, i2))
}

/// The auxiliary function
/// `P_n(y) = s^{n-1} / (1 + (n-1) s^2)^{(n-2)/2}` with `s = sqrt(1+y^2) + y`.
///
/// `s` is computed as `y + hypot(1, y)` for `y >= 0` and as
/// `1 / (|y| + hypot(1, y))` for `y < 0`, which avoids the catastrophic
/// cancellation of `sqrt(1+y^2) - |y|` for large `|y|`.
pub fn p_n(y: f64, n: Dim) -> f64 {
    let h = 1.0f64.hypot(y);
    let s = if y >= 0.0 { y + h } else { 1.0 / (h - y) };
    let nf = n.nf();
    ((nf - 1.0) * s.ln() - 0.5 * (nf - 2.0) * ((nf - 1.0) * s * s).ln_1p()).exp()
}

/// Coefficient of the oscillation bound
/// `|grad u(x)| <= oscillation_constant(n) / x_n * osc(u)`; equals half of
/// the sup-norm coefficient because subtracting the optimal constant from
/// `u` halves the majorant.
pub fn oscillation_constant(n: Dim) -> f64 {
    0.5 * cinf_closed(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_area;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dim {
        Dim::new(n).unwrap()
    }

    fn assert_rel(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol * want.abs().max(f64::MIN_POSITIVE),
            "got {got:.17e}, want {want:.17e}"
        );
    }

    #[test]
    fn exponent_parsing_and_conjugates() {
        assert_eq!("1".parse::<Exponent>().unwrap(), Exponent::One);
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
        assert_eq!(Exponent::Finite(2.0).conjugate(), 2.0);
        assert_eq!(Exponent::Infinity.conjugate(), 1.0);
        assert_eq!(Exponent::One.conjugate(), f64::INFINITY);
        assert!(Exponent::finite(1.0).is_err());
    }

    #[test]
    fn c1_values() {
        assert_rel(c1_closed(dim(3)), 1.0 / PI, 1e-14);
        assert_rel(c1_closed(dim(2)), 1.0 / PI, 1e-14);
        assert_rel(c1_closed(dim(4)), 6.0 / (2.0 * PI * PI), 1e-14);
    }

    #[test]
    fn c2_values() {
        assert_rel(c2_closed(dim(3)), (3.0 / (16.0 * PI)).sqrt(), 1e-14);
        assert_rel(c2_closed(dim(4)), (3.0 / (8.0 * PI * PI)).sqrt(), 1e-14);
        assert_rel(c2_closed(dim(2)), 0.5 / PI.sqrt(), 1e-14);
        assert_rel(c2_closed(dim(8)), 0.0820795398052193941, 1e-14);
    }

    #[test]
    fn cinf_values() {
        assert_rel(cinf_closed(dim(3)), 4.0 / (3.0 * 3.0f64.sqrt()), 1e-14);
        assert_rel(cinf_closed(dim(4)), 3.0 * 3.0f64.sqrt() / (2.0 * PI), 1e-14);
        assert_rel(cinf_closed(dim(2)), 2.0 / PI, 1e-14);
        assert_rel(cinf_closed(dim(5)), 0.858650103359919243, 1e-14);
        assert_rel(cinf_closed(dim(6)), 0.878719189403922294, 1e-14);
    }

    #[test]
    fn constants_positive_and_finite() {
        for n in 2..=20u32 {
            for v in [c1_closed(dim(n)), c2_closed(dim(n)), cinf_closed(dim(n))] {
                assert!(v.is_finite() && v > 0.0, "n={n}: {v}");
            }
        }
    }

    #[test]
    fn c2_internal_consistency() {
        // c2^2 * 2^n * omega_n = n (n-1)
        for n in 2..=20u32 {
            let c2 = c2_closed(dim(n));
            let lhs = c2 * c2 * 2.0f64.powi(n as i32) * sphere_area(n).unwrap();
            assert_rel(lhs, f64::from(n) * f64::from(n - 1), 1e-12);
        }
    }

    #[test]
    fn moment_integral_values() {
        // Hand integration for n = 3:
        // inner theta-integral of (3 cos^2 - 1)^2 cos^3 sin is 3/8, outer phi range pi.
        let (i1, i2) = moment_integrals(dim(3)).unwrap();
        assert_rel(i1, 3.0 * PI / 8.0, 1e-14);
        // I2 = 9 * (pi/2) * int_0^{pi/2} sin^3 cos^5 = 9 * (pi/2) / 24.
        assert_rel(i2, 3.0 * PI / 16.0, 1e-14);
        assert!(moment_integrals(dim(2)).is_err());
    }

    #[test]
    fn moment_integral_ratio_and_reference() {
        for n in 3..=20u32 {
            let (i1, i2) = moment_integrals(dim(n)).unwrap();
            assert_rel(i1 / i2, f64::from(n - 1), 1e-12);
        }
        let (i1, i2) = moment_integrals(dim(5)).unwrap();
        assert_rel(i1, 0.327249234748936796, 1e-14);
        assert_rel(i2, 0.0818123086872341989, 1e-14);
        let (i1, i2) = moment_integrals(dim(8)).unwrap();
        assert_rel(i1, 0.0572686160810639392, 1e-14);
        assert_rel(i2, 0.00818123086872341989, 1e-14);
    }

    #[test]
    fn c2_from_moments() {
        // C_2 = (2 sqrt(omega_{n-2}) / omega_n) * sqrt(I1)
        for n in 3..=20u32 {
            let (i1, _) = moment_integrals(dim(n)).unwrap();
            let v = 2.0 * sphere_area(n - 2).unwrap().sqrt() / sphere_area(n).unwrap() * i1.sqrt();
            assert_rel(v, c2_closed(dim(n)), 1e-12);
        }
    }

    #[test]
    fn p_n_values() {
        assert_rel(p_n(0.0, dim(3)), 1.0 / 3.0f64.sqrt(), 1e-14);
        for n in 2..=12u32 {
            assert_rel(p_n(0.0, dim(n)), f64::from(n).powf(0.5 * (2.0 - f64::from(n))), 1e-13);
        }
        assert_rel(p_n(1.0, dim(3)), 1.63828132680651432, 1e-14);
        assert_rel(p_n(-1.0, dim(3)), 0.148042720787830306, 1e-14);
        assert_rel(p_n(0.5, dim(4)), 0.478429997039446013, 1e-14);
        assert_rel(p_n(50.0, dim(2)), 100.00999900019995, 1e-14);
        assert_rel(p_n(50.0, dim(12)), 0.000620955188878282026, 1e-13);
        assert_rel(p_n(-30.0, dim(5)), 7.69466344475918285e-8, 1e-13);
    }

    #[test]
    fn p_n_product_identity() {
        // P_n(y) P_n(-y) = (4 (n-1) y^2 + n^2)^{(2-n)/2} <= n^{2-n}
        for n in 2..=12u32 {
            let nf = f64::from(n);
            for i in 0..200 {
                let y = -40.0 + f64::from(i) * 0.4;
                let prod = p_n(y, dim(n)) * p_n(-y, dim(n));
                let want = (4.0 * (nf - 1.0) * y * y + nf * nf).powf(0.5 * (2.0 - nf));
                assert_rel(prod, want, 1e-12);
                assert!(prod <= nf.powf(2.0 - nf) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn oscillation_constant_is_half_cinf() {
        assert_rel(oscillation_constant(dim(3)), 2.0 / (3.0 * 3.0f64.sqrt()), 1e-14);
        assert_rel(oscillation_constant(dim(2)), 1.0 / PI, 1e-14);
        assert_rel(
            oscillation_constant(dim(4)),
            3.0 * 3.0f64.sqrt() / (4.0 * PI),
            1e-14,
        );
    }
}
