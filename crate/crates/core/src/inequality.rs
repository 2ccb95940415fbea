//! Executable forms of the algebraic inequality behind the `p = infinity`
//! analysis, and its two corollaries, as scannable gap functions.
//!
//! Each `*_gap` function returns `LHS - RHS` of the corresponding
//! inequality, so validity means "gap <= 0 up to noise". Power terms are
//! combined in log space with sign tracking (the raw factors overflow for
//! large `mu` and `x`), and the identities that make the gap vanish
//! exactly (`mu = 1`, `x = 1`, `n = 2`) are returned as exact zeros rather
//! than as rounding noise.

use rayon::prelude::*;

use crate::closed_form::p_n;
use crate::quadrature::Accumulator;
use crate::special::{log_gamma_unchecked, Dim};

/// Gap of the core inequality: for `x >= 0`, `mu >= 1`,
///
/// ```text
/// ((mu+1)/(mu+x))^{mu-1} + ((mu+1)/(1+mu x))^{mu-1} x^{mu+1}
///     <= 2x + mu (3 mu + 1) / (mu+1)^2 * (1-x)^2 ,
/// ```
///
/// with equality exactly for `mu = 1` or `x = 1`. For `x > 1` the gap is
/// evaluated through the reflection `G(x) = x^2 G(1/x)`, which keeps every
/// intermediate bounded.
pub fn lemma_gap(x: f64, mu: f64) -> f64 {
    assert!(x >= 0.0, "lemma_gap needs x >= 0, got {x}");
    assert!(mu >= 1.0, "lemma_gap needs mu >= 1, got {mu}");
    if mu == 1.0 || x == 1.0 {
        // mu = 1: both sides equal 1 + x^2. x = 1: both sides equal 2.
        return 0.0;
    }
    if x > 1.0 {
        x * x * lemma_gap_direct(1.0 / x, mu)
    } else {
        lemma_gap_direct(x, mu)
    }
}

/// Unreflected evaluation; valid for any `x >= 0` but loses accuracy to
/// overflow-scale cancellation for large `x`, which is why [`lemma_gap`]
/// reflects to `x <= 1`.
fn lemma_gap_direct(x: f64, mu: f64) -> f64 {
    let t1 = ((mu - 1.0) * ((mu + 1.0).ln() - (mu + x).ln())).exp();
    let t2 = if x == 0.0 {
        0.0
    } else {
        ((mu - 1.0) * ((mu + 1.0).ln() - (1.0 + mu * x).ln()) + (mu + 1.0) * x.ln()).exp()
    };
    let omx = 1.0 - x;
    let rhs = 2.0 * x + mu * (3.0 * mu + 1.0) / ((mu + 1.0) * (mu + 1.0)) * omx * omx;
    t1 + t2 - rhs
}

/// Gap of the first corollary: for `n >= 2` and real `y`,
///
/// ```text
/// P_n(y)^2 + P_n(-y)^2 <= (2 n^2 + 4 (n-1)(3n-2) y^2) / n^n ,
/// ```
///
/// with equality exactly for `y = 0` or `n = 2`. The statement is even in
/// `y`, so negative `y` is accepted. For `n = 2` both sides are identically
/// `2 + 4 y^2` (the `mu = 1` equality case of the lemma), returned as an
/// exact zero.
pub fn corollary1_gap(y: f64, n: Dim) -> f64 {
    if n.get() == 2 {
        return 0.0;
    }
    let nf = n.nf();
    let py = p_n(y, n);
    let pm = p_n(-y, n);
    let rhs = (2.0 * nf * nf + 4.0 * (nf - 1.0) * (3.0 * nf - 2.0) * y * y)
        * (-nf * nf.ln()).exp();
    py * py + pm * pm - rhs
}

/// Gap of the second corollary (the binomial-sum form): for `x >= 0`,
/// `n >= 2`,
///
/// ```text
/// sum_{k=3}^{n+1} C(n+1, k) [ (n+x)^{2-k} + (-1)^k (1+nx)^{2-k} ] (1-x)^k <= 0 ,
/// ```
///
/// with equality exactly for `x = 1`. Binomial coefficients come from
/// `log_gamma`; every term is assembled in log space with sign tracking,
/// stable through `n = 30`.
pub fn corollary2_gap(x: f64, n: Dim) -> f64 {
    assert!(x >= 0.0, "corollary2_gap needs x >= 0, got {x}");
    if x == 1.0 {
        return 0.0; // every term carries (1-x)^k
    }
    let nf = n.nf();
    let ln_omx = (1.0 - x).abs().ln();
    let sign_omx = if x < 1.0 { 1.0 } else { -1.0 };
    let ln_npx = (nf + x).ln();
    let ln_1pnx = (1.0 + nf * x).ln();
    let ln_gamma_n2 = log_gamma_unchecked(nf + 2.0);
    let mut acc = Accumulator::default();
    for k in 3..=(n.get() + 1) {
        let kf = f64::from(k);
        let ln_binom = ln_gamma_n2
            - log_gamma_unchecked(kf + 1.0)
            - log_gamma_unchecked(nf + 2.0 - kf);
        let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
        let pow_sign = if k % 2 == 0 { 1.0 } else { sign_omx };
        // (1-x)^k has sign sign_omx^k = pow_sign for odd k, +1 for even k.
        let common = ln_binom + kf * ln_omx;
        acc.add(pow_sign * (common + (2.0 - kf) * ln_npx).exp());
        acc.add(pow_sign * sign_k * (common + (2.0 - kf) * ln_1pnx).exp());
    }
    acc.total()
}

/// A uniformly spaced parameter range.
#[derive(Debug, Clone, Copy)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        assert!(lo <= hi && count >= 2, "bad grid range");
        Self { lo, hi, count }
    }

    fn uniform(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64)
            .collect()
    }

    /// Half uniform, half log-spaced points (log leg from `hi * 1e-8` or
    /// `lo`, whichever is larger), plus the exact equality candidate
    /// `x = 1` when it falls inside the range. Used for the `x` legs of
    /// the scans, which must resolve both `x` near 0 and `x` near `hi`.
    fn uniform_plus_log(&self) -> Vec<f64> {
        let n_uni = self.count / 2;
        let n_log = self.count - n_uni;
        let mut pts = GridRange::new(self.lo, self.hi, n_uni.max(2)).uniform();
        let log_lo = self.lo.max(self.hi * 1e-8);
        if n_log >= 2 && log_lo > 0.0 && log_lo < self.hi {
            let (la, lb) = (log_lo.ln(), self.hi.ln());
            for i in 0..n_log {
                pts.push((la + (lb - la) * i as f64 / (n_log - 1) as f64).exp());
            }
        }
        if self.lo <= 1.0 && 1.0 <= self.hi {
            pts.push(1.0);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

/// Grid description for an inequality scan: an `x` (or `y`) range, a
/// second parameter range (`mu` or `n`), and the violation tolerance.
#[derive(Debug, Clone, Copy)]
pub struct ScanGrid {
    pub x: GridRange,
    pub param: GridRange,
    pub tolerance: f64,
}

impl ScanGrid {
    /// Default lemma grid: 10^4 x-points (uniform + log) on [0, 100],
    /// 200 mu-points on [1, 50], tolerance 1e-12.
    pub fn lemma_default() -> Self {
        Self {
            x: GridRange::new(0.0, 100.0, 10_000),
            param: GridRange::new(1.0, 50.0, 200),
            tolerance: 1e-12,
        }
    }

    /// Default first-corollary grid: 10^4 y-points on [0, 50], n in 2..=12.
    pub fn corollary1_default() -> Self {
        Self {
            x: GridRange::new(0.0, 50.0, 10_000),
            param: GridRange::new(2.0, 12.0, 11),
            tolerance: 1e-12,
        }
    }

    /// Default second-corollary grid: 10^3 x-points on [0, 100], n in 2..=30.
    pub fn corollary2_default() -> Self {
        Self {
            x: GridRange::new(0.0, 100.0, 1_000),
            param: GridRange::new(2.0, 30.0, 29),
            tolerance: 1e-12,
        }
    }
}

/// Equality-case margin: |gap| below this counts as an equality point.
pub const EQUALITY_MARGIN: f64 = 1e-15;

/// Scan outcome: the largest gap seen with its location, the list of
/// equality points, and the number of tolerance violations.
#[derive(Debug, Clone)]
pub struct ScanReport {
    pub max_gap: f64,
    pub argmax: (f64, f64),
    pub equality_cases: Vec<(f64, f64)>,
    pub points: usize,
    pub violations: usize,
}

fn scan(
    xs: &[f64],
    params: &[f64],
    tolerance: f64,
    gap: impl Fn(f64, f64) -> f64 + Sync,
    equality_scale: impl Fn(f64, f64) -> f64 + Sync,
) -> ScanReport {
    // One task per parameter; merged in parameter order so the report is
    // deterministic under any thread count.
    let partials: Vec<ScanReport> = params
        .par_iter()
        .map(|&p| {
            let mut max_gap = f64::NEG_INFINITY;
            let mut argmax = (xs[0], p);
            let mut equality = Vec::new();
            let mut violations = 0usize;
            for &x in xs {
                let g = gap(x, p);
                if g > max_gap {
                    max_gap = g;
                    argmax = (x, p);
                }
                if g.abs() <= EQUALITY_MARGIN * equality_scale(x, p) {
                    equality.push((x, p));
                }
                if g > tolerance {
                    violations += 1;
                }
            }
            ScanReport {
                max_gap,
                argmax,
                equality_cases: equality,
                points: xs.len(),
                violations,
            }
        })
        .collect();
    let mut report = ScanReport {
        max_gap: f64::NEG_INFINITY,
        argmax: (f64::NAN, f64::NAN),
        equality_cases: Vec::new(),
        points: 0,
        violations: 0,
    };
    for p in partials {
        if p.max_gap > report.max_gap {
            report.max_gap = p.max_gap;
            report.argmax = p.argmax;
        }
        report.equality_cases.extend(p.equality_cases);
        report.points += p.points;
        report.violations += p.violations;
    }
    report
}

pub fn scan_lemma(grid: &ScanGrid) -> ScanReport {
    let xs = grid.x.uniform_plus_log();
    let mus = grid.param.uniform();
    scan(&xs, &mus, grid.tolerance, lemma_gap, |_, _| 1.0)
}

pub fn scan_corollary1(grid: &ScanGrid) -> ScanReport {
    let ys = grid.x.uniform();
    let ns: Vec<f64> = (grid.param.lo.round() as u32..=grid.param.hi.round() as u32)
        .map(f64::from)
        .collect();
    scan(
        &ys,
        &ns,
        grid.tolerance,
        |y, nf| corollary1_gap(y, Dim::new(nf as u32).expect("n >= 2")),
        // Both sides shrink like n^{2-n}; equality must be judged against
        // the inequality's own scale or every large-n point looks equal.
        |y, nf| (2.0 * nf * nf + 4.0 * (nf - 1.0) * (3.0 * nf - 2.0) * y * y) * (-nf * nf.ln()).exp(),
    )
}

pub fn scan_corollary2(grid: &ScanGrid) -> ScanReport {
    let xs = grid.x.uniform_plus_log();
    let ns: Vec<f64> = (grid.param.lo.round() as u32..=grid.param.hi.round() as u32)
        .map(f64::from)
        .collect();
    scan(
        &xs,
        &ns,
        grid.tolerance,
        |x, nf| corollary2_gap(x, Dim::new(nf as u32).expect("n >= 2")),
        |_, _| 1.0,
    )
}
