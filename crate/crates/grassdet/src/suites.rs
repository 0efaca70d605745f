//! Named suites of checks.

use std::time::Instant;

use grassdet_core::Field;

use crate::checks::*;
use crate::failure::{usage, Failure};
use crate::report::{CheckResult, Report, RunConfig};

pub type Check = fn(&RunConfig) -> CheckResult;

pub const SUITES: [&str; 8] = ["grassmann", "fredholm", "detcalc", "bundles", "orient", "staralg", "appendix-b", "all"];

/// The checks of one suite, in report order. `all` is not listed here.
pub fn suite_checks(name: &str) -> Option<Vec<Check>> {
    let checks: Vec<Check> = match name {
        "grassmann" => vec![intersection_equivalence, power_iteration_bound, chart_round_trip],
        "fredholm" => vec![index_consistency, additivity, duality],
        "detcalc" => vec![
            splitting_independence,
            naturality,
            restriction,
            composition_associativity,
            adjoint_conjugate,
        ],
        "appendix-b" => vec![sign_parity_exhaustive, block_model],
        "bundles" => vec![
            fp_cocycle,
            fr_cocycle,
            fp_nested,
            fr_nested,
            sum_dual_path,
            sum_associativity,
            transpose_ladder,
        ],
        "orient" => vec![cyclic_closure, tetrahedron, sum_versus_induction_check],
        "staralg" => vec![
            chart_bounds_check,
            unitary_section_check,
            lift_square_root_check,
            lift_function_identity,
        ],
        _ => return None,
    };
    Some(checks)
}

/// Runs `suite` under `cfg`. The orientation calculus is real-only: asking for it over
/// the complex field is a usage error, and inside `all` it runs over the reals.
pub fn run_suite(suite: &str, cfg: &RunConfig) -> Result<Report, Failure> {
    if !SUITES.contains(&suite) {
        return Err(usage(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", "))));
    }
    if suite == "orient" && cfg.field == Some(Field::Complex) {
        return Err(usage("the orient suite is defined over the real field only"));
    }
    let start = Instant::now();
    let names: Vec<&str> = if suite == "all" { SUITES[..7].to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for name in names {
        for check in suite_checks(name).expect("listed suite") {
            checks.push(check(cfg));
        }
    }
    Ok(Report {
        suite: suite.to_string(),
        config: Some(cfg.clone()),
        checks,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
