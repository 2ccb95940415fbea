//! Report records and CSV/JSON emission. All numbers are printed in
//! shortest round-trip decimal form (both `Display` and serde_json use
//! the shortest representation that parses back to the same f64).

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ConstantRecord {
    pub n: u32,
    pub p: String,
    pub method: &'static str,
    pub value: f64,
    pub abs_err: f64,
    pub argmax_beta: Option<f64>,
    pub closed_form: Option<f64>,
    pub rel_gap: Option<f64>,
}

pub const CONSTANTS_HEADER: &str = "n,p,method,value,abs_err,argmax_beta,closed_form,rel_gap";

pub fn constants_csv_row(r: &ConstantRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.n,
        r.p,
        r.method,
        r.value,
        r.abs_err,
        opt(r.argmax_beta),
        opt(r.closed_form),
        opt(r.rel_gap),
    )
}

#[derive(Debug, Serialize)]
pub struct ProfileRecord {
    pub beta: f64,
    pub c_p_beta: f64,
    pub abs_err: f64,
}

pub const PROFILE_HEADER: &str = "beta,c_p_beta,abs_err";

pub fn profile_csv_row(r: &ProfileRecord) -> String {
    format!("{},{},{}", r.beta, r.c_p_beta, r.abs_err)
}

#[derive(Debug, Serialize)]
pub struct VerifyRecord {
    pub sample: u64,
    pub seed: u64,
    pub n: u32,
    pub p: String,
    pub ratio: f64,
    pub bound: f64,
    pub gap: f64,
    pub quadrature_err: f64,
}

pub const VERIFY_HEADER: &str = "sample,seed,n,p,ratio,bound,gap,quadrature_err";

pub fn verify_csv_row(r: &VerifyRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.sample, r.seed, r.n, r.p, r.ratio, r.bound, r.gap, r.quadrature_err
    )
}

#[derive(Debug, Serialize)]
pub struct ScanRecord {
    pub target: &'static str,
    pub points: usize,
    pub max_gap: f64,
    pub at_x: f64,
    pub at_param: f64,
    pub violations: usize,
    pub equality_cases: String,
}

pub const SCAN_HEADER: &str = "target,points,max_gap,at_x,at_param,violations,equality_cases";

pub fn scan_csv_row(r: &ScanRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.target, r.points, r.max_gap, r.at_x, r.at_param, r.violations, r.equality_cases
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn print_json<T: Serialize>(rows: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(rows).expect("report records serialize")
    );
}
