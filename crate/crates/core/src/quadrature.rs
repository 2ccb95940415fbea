//! Deterministic panel-adaptive Gauss-Legendre quadrature.
//!
//! One integration engine serves every integral route in the crate: a fixed
//! Gauss-Legendre rule of `base_order` points per panel, with the panel
//! count doubled until two consecutive refinement levels agree. The
//! reported error is the difference of the last two levels, which is a
//! conservative two-level Richardson estimate.
//!
//! Integrands with an `|...|^q`-type kink lose per-panel smoothness across
//! the sign-change curve; [`integrate_2d_split`] restores spectral
//! convergence by splitting the inner integral at the kink location for
//! every outer node. All reductions run in a fixed order, so results are
//! bit-reproducible for a given spec.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum QuadError {
    #[error("quadrature did not converge after {refinements} refinements (best {value:e} +/- {abs_err:e})")]
    NonConvergence {
        value: f64,
        abs_err: f64,
        refinements: u32,
    },
    #[error("invalid integration range [{a}, {b}]")]
    InvalidRange { a: f64, b: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

/// Panel-adaptive Gauss-Legendre parameters.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per panel (>= 2).
    pub base_order: usize,
    /// Maximum number of panel doublings.
    pub max_refinements: u32,
    /// Absolute convergence tolerance.
    pub abs_tol: f64,
    /// Relative convergence tolerance; `abs_tol` and `rel_tol` must not both be zero.
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            base_order: 32,
            max_refinements: 10,
            abs_tol: 1e-12,
            rel_tol: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if self.base_order < 2 {
            return Err(QuadError::InvalidSpec(format!(
                "base_order must be >= 2, got {}",
                self.base_order
            )));
        }
        if self.max_refinements < 1 {
            return Err(QuadError::InvalidSpec(
                "max_refinements must be at least 1".into(),
            ));
        }
        if !(self.abs_tol >= 0.0) || !(self.rel_tol >= 0.0) {
            return Err(QuadError::InvalidSpec(
                "tolerances must be nonnegative".into(),
            ));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(QuadError::InvalidSpec(
                "abs_tol and rel_tol must not both be zero".into(),
            ));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

/// Inner-variable kink location as a function of the outer variable.
///
/// The curve must stay inside the inner integration range wherever it is
/// meant to split; locations outside the range are ignored.
///
/// Integrands whose derivatives blow up algebraically at the kink (a
/// fractional power `|A|^q`) or at the inner endpoints (fractional weight
/// factors) additionally need panel sizes that shrink geometrically toward
/// the singular point; the `grade_*` depths request such ladders.
pub struct KinkCurve<'a> {
    location: &'a (dyn Fn(f64) -> f64 + Sync),
    grade_kink: u32,
    grade_lo: u32,
    grade_hi: u32,
}

impl<'a> KinkCurve<'a> {
    pub fn new(location: &'a (dyn Fn(f64) -> f64 + Sync)) -> Self {
        Self {
            location,
            grade_kink: 0,
            grade_lo: 0,
            grade_hi: 0,
        }
    }

    /// Request geometric segment ladders (ratio 1/4, `depth` rungs) around
    /// the kink and toward the lower/upper inner endpoints.
    pub fn with_grading(mut self, kink: u32, lo: u32, hi: u32) -> Self {
        self.grade_kink = kink;
        self.grade_lo = lo;
        self.grade_hi = hi;
        self
    }
}

/// Appends a geometric ladder of split points accumulating toward
/// `center`, with rung distances `span / 4^j`. Points outside the open
/// interval are dropped by the caller's filtering.
pub(crate) fn push_ladder(out: &mut Vec<f64>, center: f64, span: f64, depth: u32) {
    for j in 1..=depth {
        let d = span * 0.25f64.powi(j as i32);
        out.push(center - d);
        out.push(center + d);
    }
}

/// Neumaier compensated accumulator; keeps panel sums deterministic and
/// accurate regardless of the number of panels.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

type RuleCache = Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>;

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
pub(crate) fn gauss_legendre(order: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(compute_gauss_legendre(order));
    cache
        .lock()
        .unwrap()
        .entry(order)
        .or_insert(rule)
        .clone()
}

/// Legendre polynomial P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2, "Gauss-Legendre order must be >= 2");
    let mut rule = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Asymptotic initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (p, dp) = legendre(n, x);
        x -= p / dp;
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

fn panel_pass(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let half = 0.5 * h;
    let mut acc = Accumulator::default();
    for k in 0..panels {
        let center = a + (k as f64 + 0.5) * h;
        for &(x, w) in rule {
            acc.add(w * f(center + half * x));
        }
    }
    half * acc.total()
}

/// Panel-adaptive Gauss-Legendre estimate of `int_a^b f`.
///
/// Converged when the difference of the last two refinement levels is at
/// most `max(abs_tol, rel_tol * |value|)`; otherwise the refinement budget
/// is exhausted and a [`QuadError::NonConvergence`] carrying the best
/// estimate is returned.
pub fn integrate_1d(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, QuadError> {
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(QuadError::InvalidRange { a, b });
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let rule = gauss_legendre(spec.base_order);
    let mut value = panel_pass(&mut f, a, b, 1, &rule);
    let mut abs_err = f64::INFINITY;
    for level in 1..=spec.max_refinements {
        let cur = panel_pass(&mut f, a, b, 1usize << level, &rule);
        abs_err = (cur - value).abs();
        value = cur;
        if abs_err <= spec.tolerance(value) {
            return Ok(Estimate { value, abs_err });
        }
    }
    Err(QuadError::NonConvergence {
        value,
        abs_err,
        refinements: spec.max_refinements,
    })
}

/// Like [`integrate_1d`] but the range is pre-split at the given interior
/// breakpoints (kinks, support edges). Segment values are summed; segment
/// errors add up. A non-converged segment still contributes its best
/// estimate, and the failure is reported after all segments ran.
pub fn integrate_1d_split(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate, QuadError> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|t| t.is_finite() && *t > a && *t < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    let mut lo = a;
    let mut value = Accumulator::default();
    let mut abs_err = 0.0f64;
    let mut failed = false;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        match integrate_1d(&mut f, lo, hi, spec) {
            Ok(est) => {
                value.add(est.value);
                abs_err += est.abs_err;
            }
            Err(QuadError::NonConvergence {
                value: v,
                abs_err: e,
                ..
            }) => {
                value.add(v);
                abs_err += e;
                failed = true;
            }
            Err(e) => return Err(e),
        }
        lo = hi;
    }
    if failed {
        return Err(QuadError::NonConvergence {
            value: value.total(),
            abs_err,
            refinements: spec.max_refinements,
        });
    }
    Ok(Estimate {
        value: value.total(),
        abs_err,
    })
}

/// Tensor-product integral over `outer x inner` with the inner integral
/// split at the kink curve before Gauss-Legendre is applied.
///
/// The outer variable is panel-refined exactly like [`integrate_1d`]; at
/// every outer node the inner integral is evaluated adaptively, split at
/// `kink(outer)` when that location falls inside the inner range. Inner
/// error estimates are propagated as the root-sum-square of per-panel
/// weighted errors and added to the outer two-level difference.
pub fn integrate_2d_split(
    f: impl Fn(f64, f64) -> f64,
    outer: (f64, f64),
    inner: (f64, f64),
    kink: Option<&KinkCurve<'_>>,
    spec: &QuadratureSpec,
) -> Result<Estimate, QuadError> {
    spec.validate()?;
    let (oa, ob) = outer;
    let (ia, ib) = inner;
    if !oa.is_finite() || !ob.is_finite() || oa > ob {
        return Err(QuadError::InvalidRange { a: oa, b: ob });
    }
    if !ia.is_finite() || !ib.is_finite() || ia > ib {
        return Err(QuadError::InvalidRange { a: ia, b: ib });
    }
    if oa == ob || ia == ib {
        return Ok(Estimate {
            value: 0.0,
            abs_err: 0.0,
        });
    }

    let rule = gauss_legendre(spec.base_order);
    let mut inner_failed = false;

    // Evaluates the inner integral at a fixed outer node.
    let span = ib - ia;
    let mut inner_eval = |phi: f64| -> (f64, f64) {
        let breaks: Vec<f64> = match kink {
            Some(curve) => {
                let loc = (curve.location)(phi);
                let mut b = vec![loc];
                push_ladder(&mut b, loc, span, curve.grade_kink);
                if curve.grade_lo > 0 {
                    push_ladder(&mut b, ia, span, curve.grade_lo);
                }
                if curve.grade_hi > 0 {
                    push_ladder(&mut b, ib, span, curve.grade_hi);
                }
                b
            }
            None => Vec::new(),
        };
        match integrate_1d_split(|theta| f(phi, theta), ia, ib, &breaks, spec) {
            Ok(est) => (est.value, est.abs_err),
            Err(QuadError::NonConvergence {
                value, abs_err, ..
            }) => {
                inner_failed = true;
                (value, abs_err)
            }
            // Range/spec errors cannot occur here: validated above.
            Err(_) => unreachable!("inner integral saw validated range and spec"),
        }
    };

    let pass = |panels: usize, inner_eval: &mut dyn FnMut(f64) -> (f64, f64)| -> (f64, f64) {
        let h = (ob - oa) / panels as f64;
        let half = 0.5 * h;
        let mut acc = Accumulator::default();
        let mut err_sq = Accumulator::default();
        for k in 0..panels {
            let center = oa + (k as f64 + 0.5) * h;
            let mut panel_err = 0.0;
            for &(x, w) in rule.iter() {
                let (v, e) = inner_eval(center + half * x);
                acc.add(w * v);
                panel_err += w.abs() * e;
            }
            let scaled = half * panel_err;
            err_sq.add(scaled * scaled);
        }
        (half * acc.total(), err_sq.total().sqrt())
    };

    let (mut value, mut inner_err) = pass(1, &mut inner_eval);
    let mut diff = f64::INFINITY;
    for level in 1..=spec.max_refinements {
        let (cur, cur_inner_err) = pass(1usize << level, &mut inner_eval);
        diff = (cur - value).abs();
        value = cur;
        inner_err = cur_inner_err;
        // The inner error is an accuracy floor for the outer Richardson test.
        if diff <= spec.tolerance(value) + inner_err {
            let abs_err = diff + inner_err;
            if inner_failed {
                return Err(QuadError::NonConvergence {
                    value,
                    abs_err,
                    refinements: level,
                });
            }
            return Ok(Estimate { value, abs_err });
        }
    }
    Err(QuadError::NonConvergence {
        value,
        abs_err: diff + inner_err,
        refinements: spec.max_refinements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sine_moment;
    use std::f64::consts::PI;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got:.17e}, want {want:.17e} (diff {:e})",
            (got - want).abs()
        );
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            base_order: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            abs_tol: 0.0,
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gauss_nodes_integrate_polynomials_exactly() {
        // Order m integrates degree 2m-1 exactly.
        let rule = gauss_legendre(8);
        let int: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert_close(int, 2.0 / 15.0, 1e-14);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_close(total, 2.0, 1e-14);
    }

    #[test]
    fn integrates_sine_over_period() {
        let spec = QuadratureSpec::default();
        let est = integrate_1d(f64::sin, 0.0, PI, &spec).unwrap();
        assert_close(est.value, 2.0, 1e-13);
        assert!(est.abs_err < 1e-10);
    }

    #[test]
    fn integrates_square() {
        let spec = QuadratureSpec::default();
        let est = integrate_1d(|t| t * t, 0.0, 1.0, &spec).unwrap();
        assert_close(est.value, 1.0 / 3.0, 1e-14);
    }

    #[test]
    fn near_singular_weight_matches_arcsin() {
        // (1 - t^2)^{-1/2} on [0, 1 - eps]: antiderivative is arcsin.
        let spec = QuadratureSpec {
            max_refinements: 16,
            ..Default::default()
        };
        let eps = 1e-6;
        let est = integrate_1d(|t| 1.0 / (1.0 - t * t).sqrt(), 0.0, 1.0 - eps, &spec).unwrap();
        let want = (1.0 - eps).asin();
        assert_close(est.value, want, 1e-9);
        assert!((est.value - want).abs() <= 10.0 * est.abs_err.max(1e-12));
    }

    #[test]
    fn degenerate_and_invalid_ranges() {
        let spec = QuadratureSpec::default();
        let est = integrate_1d(|t| t, 1.0, 1.0, &spec).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(integrate_1d(|t| t, 1.0, 0.0, &spec).is_err());
        assert!(integrate_1d(|t| t, 0.0, f64::INFINITY, &spec).is_err());
    }

    #[test]
    fn non_convergence_carries_best_estimate() {
        let spec = QuadratureSpec {
            base_order: 2,
            max_refinements: 2,
            abs_tol: 1e-16,
            rel_tol: 1e-16,
        };
        match integrate_1d(|t| (40.0 * t).sin().abs(), 0.0, PI, &spec) {
            Err(QuadError::NonConvergence { value, abs_err, .. }) => {
                assert!(value.is_finite());
                assert!(abs_err > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn sine_moments_match_quadrature() {
        let spec = QuadratureSpec::default();
        for k in 0..=30u32 {
            let est = integrate_1d(|t| t.sin().powi(k as i32), 0.0, PI, &spec).unwrap();
            let want = sine_moment(k);
            assert!(
                (est.value - want).abs() <= 1e-10 * want.abs().max(1.0),
                "k={k}: {} vs {}",
                est.value,
                want
            );
        }
    }

    #[test]
    fn split_absorbs_kink() {
        // |t - 1/3| over [0, 1]: exact value 1/9 + ... computed analytically.
        let spec = QuadratureSpec::default();
        let exact = {
            let c: f64 = 1.0 / 3.0;
            0.5 * c * c + 0.5 * (1.0 - c) * (1.0 - c)
        };
        let est = integrate_1d_split(|t| (t - 1.0 / 3.0).abs(), 0.0, 1.0, &[1.0 / 3.0], &spec)
            .unwrap();
        assert_close(est.value, exact, 1e-14);
    }

    #[test]
    fn constant_over_rectangle() {
        let spec = QuadratureSpec::default();
        let est = integrate_2d_split(|_, _| 1.0, (0.0, PI), (0.0, PI / 2.0), None, &spec).unwrap();
        assert_close(est.value, PI * PI / 2.0, 1e-12);
    }

    #[test]
    fn kink_split_2d_matches_analytic() {
        // f = |cos(theta) - 1/2| on [0, pi] x [0, pi/2], kink at theta = pi/3.
        let spec = QuadratureSpec::default();
        let loc = |_phi: f64| PI / 3.0;
        let kink = KinkCurve::new(&loc);
        let est = integrate_2d_split(
            |_, th| (th.cos() - 0.5).abs(),
            (0.0, PI),
            (0.0, PI / 2.0),
            Some(&kink),
            &spec,
        )
        .unwrap();
        // int_0^{pi/2} |cos - 1/2| = (sqrt(3) - 1) - pi/12, times pi for the outer range.
        let want = PI * (3.0f64.sqrt() - 1.0 - PI / 12.0);
        assert_close(est.value, want, 1e-12);
    }

    #[test]
    fn smooth_integrand_ignores_kink_curve() {
        // p = 2 squares away the kink: split and unsplit must agree
        // closely, and at gamma = 0 the integral is the first moment
        // integral: int_0^1 (3c^2-1)^2 c^3 dc = 3/8, times pi.
        let spec = QuadratureSpec::default();
        let f = |_phi: f64, th: f64| {
            let a = 3.0 * th.cos().powi(2) - 1.0;
            a * a * th.cos().powi(3) * th.sin()
        };
        let plain =
            integrate_2d_split(f, (0.0, PI), (0.0, PI / 2.0), None, &spec).unwrap();
        assert_close(plain.value, 3.0 * PI / 8.0, 1e-12);
        let loc = |_phi: f64| 0.9553166181245093; // arctan sqrt(2)
        let kink = KinkCurve::new(&loc);
        let split =
            integrate_2d_split(f, (0.0, PI), (0.0, PI / 2.0), Some(&kink), &spec).unwrap();
        assert!((plain.value - split.value).abs() <= 1e-12);

        // With the direction tilted in, the kink is real for odd powers
        // but the square keeps it C^1; split and unsplit still agree.
        let g = |phi: f64, th: f64| {
            let a = 3.0 * th.cos().powi(2) - 1.0 + 3.0 * th.cos() * th.sin() * phi.cos();
            a * a * th.cos().powi(3) * th.sin()
        };
        let plain = integrate_2d_split(g, (0.0, PI), (0.0, PI / 2.0), None, &spec).unwrap();
        let split =
            integrate_2d_split(g, (0.0, PI), (0.0, PI / 2.0), Some(&kink), &spec).unwrap();
        assert!((plain.value - split.value).abs() <= 1e-11);
    }

    #[test]
    fn doubling_order_stays_within_reported_error() {
        let spec = QuadratureSpec::default();
        let double = QuadratureSpec {
            base_order: 64,
            ..spec
        };
        for (i, f) in [
            (0, Box::new(|t: f64| (3.0 * t).sin() * t.exp()) as Box<dyn Fn(f64) -> f64>),
            (1, Box::new(|t: f64| 1.0 / (1.0 + 25.0 * t * t))),
            (2, Box::new(|t: f64| t.abs().powf(2.5))),
        ] {
            let a = integrate_1d(&*f, -1.0, 2.0, &spec).unwrap();
            let b = integrate_1d(&*f, -1.0, 2.0, &double).unwrap();
            assert!(
                (a.value - b.value).abs() <= a.abs_err.max(1e-14),
                "case {i}: {} vs {} (err {})",
                a.value,
                b.value,
                a.abs_err
            );
        }
    }
}
