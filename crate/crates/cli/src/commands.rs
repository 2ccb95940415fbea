//! Subcommand implementations.

use hs_sharp_core::closed_form::{c1_closed, c2_closed, cinf_closed, Exponent};
use hs_sharp_core::inequality::{
    scan_corollary1, scan_corollary2, scan_lemma, ScanGrid, ScanReport,
};
use hs_sharp_core::poisson::{
    boundary_norm, poisson_gradient, random_boundary_data, sharpness_ratio, HalfSpacePoint,
    PoissonError,
};
use hs_sharp_core::variational::{
    direction_profile, sup_over_direction, Direction, VariationalError,
};
use hs_sharp_core::{Dim, QuadError, QuadratureSpec};

use crate::output::{self, ConstantRecord, ProfileRecord, ScanRecord, VerifyRecord};
use crate::{Format, ScanTarget, VerifyMode, EXIT_NONCONVERGENCE, EXIT_USAGE, EXIT_VIOLATION};

fn parse_dim(n: u32) -> Result<Dim, String> {
    Dim::new(n).map_err(|e| e.to_string())
}

fn parse_exponent(token: &str) -> Result<Exponent, String> {
    token.parse::<Exponent>().map_err(|e| e.to_string())
}

fn closed_form_for(n: Dim, p: &Exponent) -> Option<f64> {
    match p {
        Exponent::One => Some(c1_closed(n)),
        Exponent::Infinity => Some(cinf_closed(n)),
        Exponent::Finite(pv) if *pv == 2.0 => Some(c2_closed(n)),
        Exponent::Finite(_) => None,
    }
}

fn is_nonconvergence_v(e: &VariationalError) -> bool {
    matches!(
        e,
        VariationalError::Quadrature(QuadError::NonConvergence { .. })
    )
}

fn is_nonconvergence_p(e: &PoissonError) -> bool {
    matches!(
        e,
        PoissonError::NonConvergence { .. }
            | PoissonError::Quadrature(QuadError::NonConvergence { .. })
    ) || matches!(e, PoissonError::Variational(v) if is_nonconvergence_v(v))
}

pub fn constants(n_list: &[u32], p_list: &[String], format: Format, spec: &QuadratureSpec) -> u8 {
    let mut dims = Vec::new();
    for &n in n_list {
        match parse_dim(n) {
            Ok(d) => dims.push(d),
            Err(msg) => {
                eprintln!("hs-sharp: {msg}");
                return EXIT_USAGE;
            }
        }
    }
    let mut exps = Vec::new();
    for token in p_list {
        match parse_exponent(token) {
            Ok(p) => exps.push((token.clone(), p)),
            Err(msg) => {
                eprintln!("hs-sharp: {msg}");
                return EXIT_USAGE;
            }
        }
    }

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for &n in &dims {
        for (token, p) in &exps {
            if let Exponent::Finite(pv) = p {
                if *pv < 1.1 {
                    eprintln!(
                        "hs-sharp: warning: p = {pv} < 1.1 is computed with the p = 1 \
                         supremum formula (the |A|^(p/(p-1)) integrand concentrates)"
                    );
                }
            }
            match sup_over_direction(n, *p, spec) {
                Ok(r) => {
                    let closed_form = closed_form_for(n, p);
                    let rel_gap = closed_form.map(|cf| (r.value - cf).abs() / cf);
                    records.push(ConstantRecord {
                        n: n.get(),
                        p: token.clone(),
                        method: r.method.as_str(),
                        value: r.value,
                        abs_err: r.abs_err,
                        argmax_beta: r.argmax_beta,
                        closed_form,
                        rel_gap,
                    });
                }
                Err(e) if is_nonconvergence_v(&e) => {
                    failures.push(format!("n={n}, p={token}: {e}"));
                }
                Err(e) => {
                    eprintln!("hs-sharp: n={n}, p={token}: {e}");
                    return EXIT_USAGE;
                }
            }
        }
    }

    match format {
        Format::Csv => {
            println!("{}", output::CONSTANTS_HEADER);
            for r in &records {
                println!("{}", output::constants_csv_row(r));
            }
        }
        Format::Json => output::print_json(&records),
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("hs-sharp: non-convergence: {f}");
        }
        eprintln!("hs-sharp: output is partial ({} combination(s) failed)", failures.len());
        return EXIT_NONCONVERGENCE;
    }
    0
}

pub fn profile(n: u32, p: &str, beta_count: usize, format: Format, spec: &QuadratureSpec) -> u8 {
    let (n, p) = match (parse_dim(n), parse_exponent(p)) {
        (Ok(n), Ok(p)) => (n, p),
        (Err(msg), _) | (_, Err(msg)) => {
            eprintln!("hs-sharp: {msg}");
            return EXIT_USAGE;
        }
    };
    if beta_count < 2 {
        eprintln!("hs-sharp: beta-count must be at least 2");
        return EXIT_USAGE;
    }
    match direction_profile(n, p, beta_count, spec) {
        Ok(points) => {
            let records: Vec<ProfileRecord> = points
                .iter()
                .map(|pt| ProfileRecord {
                    beta: pt.beta,
                    c_p_beta: pt.value,
                    abs_err: pt.abs_err,
                })
                .collect();
            match format {
                Format::Csv => {
                    println!("{}", output::PROFILE_HEADER);
                    for r in &records {
                        println!("{}", output::profile_csv_row(r));
                    }
                }
                Format::Json => output::print_json(&records),
            }
            0
        }
        Err(e) if is_nonconvergence_v(&e) => {
            eprintln!("hs-sharp: non-convergence: {e}");
            EXIT_NONCONVERGENCE
        }
        Err(e) => {
            eprintln!("hs-sharp: {e}");
            EXIT_USAGE
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut x = z;
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic uniform in [0, 1) derived from (seed, sample, slot).
fn unit(seed: u64, sample: u64, slot: u64) -> f64 {
    let z = splitmix64(seed ^ splitmix64(sample.wrapping_add(slot << 32)));
    (z >> 11) as f64 / (1u64 << 53) as f64
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    n: u32,
    p: &str,
    mode: VerifyMode,
    samples: u64,
    seed: u64,
    truncation: f64,
    xn: f64,
    format: Format,
    spec: &QuadratureSpec,
) -> u8 {
    let (nd, pe) = match (parse_dim(n), parse_exponent(p)) {
        (Ok(n), Ok(p)) => (n, p),
        (Err(msg), _) | (_, Err(msg)) => {
            eprintln!("hs-sharp: {msg}");
            return EXIT_USAGE;
        }
    };
    if samples < 1 {
        eprintln!("hs-sharp: samples must be at least 1");
        return EXIT_USAGE;
    }
    if !(xn > 0.0) || !xn.is_finite() {
        eprintln!("hs-sharp: xn must be positive and finite, got {xn}");
        return EXIT_USAGE;
    }
    let bound = match closed_form_for(nd, &pe) {
        Some(cf) => cf,
        None => match sup_over_direction(nd, pe, spec) {
            Ok(r) => r.value,
            Err(e) => {
                eprintln!("hs-sharp: computing the bound failed: {e}");
                return if is_nonconvergence_v(&e) {
                    EXIT_NONCONVERGENCE
                } else {
                    EXIT_USAGE
                };
            }
        },
    };

    let mut records = Vec::new();
    let mut nonconvergence = false;
    for sample in 0..samples {
        let outcome: Result<(f64, f64), PoissonError> = match mode {
            VerifyMode::Extremal => {
                let x = HalfSpacePoint::above_origin(nd, xn).expect("xn validated above");
                sharpness_ratio(&pe, nd, &x, Direction::NORMAL, truncation * xn, spec)
                    .map(|rep| (rep.ratio, rep.quadrature_err))
            }
            VerifyMode::Random => {
                let data = random_boundary_data(nd, seed, sample);
                let d = nd.get() as usize - 1;
                let xp: Vec<f64> = (0..d)
                    .map(|j| 0.6 * (unit(seed, sample, j as u64) - 0.5))
                    .collect();
                let height = 0.6 + unit(seed, sample, 17);
                let x = HalfSpacePoint::new(xp, height).expect("height positive");
                poisson_gradient(&data, &x, nd, spec).and_then(|g| {
                    let norm = boundary_norm(&data, &pe, nd, spec)?;
                    let ratio = if norm.value > 0.0 {
                        g.norm() * x.x_n().powf(-pe.xn_power(nd)) / norm.value
                    } else {
                        0.0
                    };
                    Ok((ratio, g.norm_err()))
                })
            }
        };
        match outcome {
            Ok((ratio, quadrature_err)) => records.push(VerifyRecord {
                sample,
                seed,
                n: nd.get(),
                p: p.to_string(),
                ratio,
                bound,
                gap: 1.0 - ratio / bound,
                quadrature_err,
            }),
            Err(e) => {
                eprintln!("hs-sharp: sample {sample}: {e}");
                if is_nonconvergence_p(&e) {
                    nonconvergence = true;
                } else {
                    return EXIT_USAGE;
                }
            }
        }
    }

    let max_ratio_over_bound = records
        .iter()
        .map(|r| r.ratio / r.bound)
        .fold(0.0f64, f64::max);
    match format {
        Format::Csv => {
            println!("{}", output::VERIFY_HEADER);
            for r in &records {
                println!("{}", output::verify_csv_row(r));
            }
            println!("max_ratio_over_bound={max_ratio_over_bound}");
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct VerifyReport<'a> {
                rows: &'a [VerifyRecord],
                max_ratio_over_bound: f64,
            }
            output::print_json(&VerifyReport {
                rows: &records,
                max_ratio_over_bound,
            });
        }
    }
    if nonconvergence {
        eprintln!("hs-sharp: output is partial (non-convergent samples skipped)");
        return EXIT_NONCONVERGENCE;
    }
    if max_ratio_over_bound > 1.0 + 1e-3 {
        eprintln!("hs-sharp: bound violated: max ratio/bound = {max_ratio_over_bound}");
        return EXIT_VIOLATION;
    }
    0
}

fn summarize_equalities(target: ScanTarget, report: &ScanReport) -> String {
    let mut x_eq = 0usize;
    let mut param_eq = 0usize;
    let mut other = 0usize;
    for &(x, param) in &report.equality_cases {
        let on_x = match target {
            ScanTarget::Corollary1 => x.abs() <= 1e-12,
            _ => (x - 1.0).abs() <= 1e-3,
        };
        let on_param = match target {
            ScanTarget::Lemma => (param - 1.0).abs() <= 1e-3,
            ScanTarget::Corollary1 => param == 2.0,
            _ => false,
        };
        if on_x {
            x_eq += 1;
        } else if on_param {
            param_eq += 1;
        } else {
            other += 1;
        }
    }
    let (x_name, p_name) = match target {
        ScanTarget::Lemma => ("x=1", "mu=1"),
        ScanTarget::Corollary1 => ("y=0", "n=2"),
        _ => ("x=1", "-"),
    };
    let mut parts = Vec::new();
    if x_eq > 0 {
        parts.push(format!("{x_name}({x_eq})"));
    }
    if param_eq > 0 {
        parts.push(format!("{p_name}({param_eq})"));
    }
    if other > 0 {
        parts.push(format!("other({other})"));
    }
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(";")
    }
}

pub fn scan_inequalities(
    target: ScanTarget,
    x_count: Option<usize>,
    tolerance: Option<f64>,
    format: Format,
) -> u8 {
    let run = |t: ScanTarget| -> (&'static str, ScanReport) {
        let (name, mut grid, scan): (_, _, fn(&ScanGrid) -> ScanReport) = match t {
            ScanTarget::Lemma => ("lemma", ScanGrid::lemma_default(), scan_lemma),
            ScanTarget::Corollary1 => ("corollary1", ScanGrid::corollary1_default(), scan_corollary1),
            ScanTarget::Corollary2 => ("corollary2", ScanGrid::corollary2_default(), scan_corollary2),
            ScanTarget::All => unreachable!(),
        };
        if let Some(c) = x_count {
            grid.x.count = c.max(2);
        }
        if let Some(tol) = tolerance {
            grid.tolerance = tol;
        }
        (name, scan(&grid))
    };

    let targets: Vec<ScanTarget> = match target {
        ScanTarget::All => vec![ScanTarget::Lemma, ScanTarget::Corollary1, ScanTarget::Corollary2],
        one => vec![one],
    };
    let mut records = Vec::new();
    let mut violations = 0usize;
    for t in targets {
        let (name, report) = run(t);
        violations += report.violations;
        records.push(ScanRecord {
            target: name,
            points: report.points,
            max_gap: report.max_gap,
            at_x: report.argmax.0,
            at_param: report.argmax.1,
            violations: report.violations,
            equality_cases: summarize_equalities(t, &report),
        });
    }
    match format {
        Format::Csv => {
            println!("{}", output::SCAN_HEADER);
            for r in &records {
                println!("{}", output::scan_csv_row(r));
            }
        }
        Format::Json => output::print_json(&records),
    }
    if violations > 0 {
        eprintln!("hs-sharp: {violations} grid point(s) exceed the gap tolerance");
        return EXIT_VIOLATION;
    }
    0
}
