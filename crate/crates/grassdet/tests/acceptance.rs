//! Acceptance run: every criterion at its required instance count and tolerance, one
//! line each. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use grassdet::checks::*;
use grassdet::{CheckResult, RunConfig};

fn cfg(seed: u64, trials: usize, dims: usize) -> RunConfig {
    RunConfig { seed, trials, dims, ..RunConfig::default() }
}

/// A check passes the criterion when it has at least `min_cases` evaluated cases, no
/// errors, and every residual is below `tol`.
struct Requirement<'a> {
    check: &'a CheckResult,
    min_cases: usize,
    tol: f64,
}

impl Requirement<'_> {
    fn holds(&self) -> bool {
        let c = self.check;
        c.cases.len() >= self.min_cases
            && c.errors.is_empty()
            && c.cases.iter().all(|k| k.residual.is_finite() && k.residual < self.tol)
    }

    fn summary(&self) -> String {
        let c = self.check;
        let bad = c.cases.iter().filter(|k| !(k.residual.is_finite() && k.residual < self.tol)).count();
        let mut s = format!(
            "{}: {} cases (need {}), {} over {:.0e}, max {:.2e}",
            c.name,
            c.cases.len(),
            self.min_cases,
            bad,
            self.tol,
            c.max_residual()
        );
        if !c.errors.is_empty() {
            s.push_str(&format!(", {} errors (first: trial {} {})", c.errors.len(), c.errors[0].0, c.errors[0].1));
        }
        s
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn judge(reqs: &[Requirement], extra: &[(bool, String)]) -> Outcome {
    let mut pass = reqs.iter().all(Requirement::holds);
    let mut parts: Vec<String> = reqs.iter().map(Requirement::summary).collect();
    for (ok, note) in extra {
        pass &= ok;
        parts.push(note.clone());
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn index_consistency_criterion() -> Outcome {
    let (r, t) = timed(|| index_consistency(&cfg(101, 10_000, 32)));
    let fast = t < Duration::from_secs(60);
    judge(
        &[Requirement { check: &r, min_cases: 10_000, tol: 0.5 }],
        &[(fast, format!("runtime {:.1}s (limit 60s)", t.as_secs_f64()))],
    )
}

fn additivity_duality_criterion() -> Outcome {
    let a = additivity(&cfg(102, 10_000, 16));
    let d = duality(&cfg(103, 10_000, 9));
    judge(
        &[
            Requirement { check: &a, min_cases: 10_000, tol: 0.5 },
            Requirement { check: &d, min_cases: 10_000, tol: 0.5 },
        ],
        &[],
    )
}

fn intersection_criterion() -> Outcome {
    let e = intersection_equivalence(&cfg(104, 1_000, 9));
    let p = power_iteration_bound(&cfg(104, 1, 2));
    judge(
        &[
            Requirement { check: &e, min_cases: 1_000, tol: 1e-8 },
            Requirement { check: &p, min_cases: 3, tol: 1e-9 },
        ],
        &[],
    )
}

fn phi_criterion() -> Outcome {
    let s = splitting_independence(&cfg(105, 1_000, 6));
    let n = naturality(&cfg(106, 1_000, 6));
    judge(
        &[
            Requirement { check: &s, min_cases: 1_000, tol: 1e-9 },
            Requirement { check: &n, min_cases: 1_000, tol: 1e-9 },
        ],
        &[],
    )
}

fn restriction_criterion() -> Outcome {
    let r = restriction(&cfg(107, 1_000, 8));
    judge(&[Requirement { check: &r, min_cases: 1_000, tol: 1e-9 }], &[])
}

fn associativity_criterion() -> Outcome {
    let r = composition_associativity(&cfg(108, 200, 8));
    judge(&[Requirement { check: &r, min_cases: 200, tol: 1e-8 }], &[])
}

fn appendix_b_criterion() -> Outcome {
    let (e, t) = timed(|| sign_parity_exhaustive(&cfg(109, 1, 2)));
    let tables = e.cases.first().and_then(|c| c.values.get("tables")).and_then(|v| v.as_u64());
    let m = block_model(&cfg(110, 100, 2));
    judge(
        &[
            Requirement { check: &e, min_cases: 1, tol: 0.5 },
            Requirement { check: &m, min_cases: 100, tol: 0.5 },
        ],
        &[
            (tables == Some(19_683), format!("{} tables (need 3^9 = 19683)", tables.unwrap_or(0))),
            (t < Duration::from_secs(5), format!("sweep {:.2}s (limit 5s)", t.as_secs_f64())),
        ],
    )
}

fn sum_criterion() -> Outcome {
    let d = sum_dual_path(&cfg(111, 200, 10));
    let a = sum_associativity(&cfg(112, 200, 9));
    judge(
        &[
            Requirement { check: &d, min_cases: 200, tol: 1e-8 },
            Requirement { check: &a, min_cases: 200, tol: 1e-9 },
        ],
        &[],
    )
}

fn orientation_criterion() -> Outcome {
    let c = cyclic_closure(&cfg(113, 100, 10));
    let t = tetrahedron(&cfg(114, 100, 7));
    let s = sum_versus_induction_check(&cfg(115, 100, 8));
    judge(
        &[
            Requirement { check: &c, min_cases: 100, tol: 0.5 },
            Requirement { check: &t, min_cases: 100, tol: 0.5 },
            Requirement { check: &s, min_cases: 100, tol: 0.5 },
        ],
        &[],
    )
}

fn star_algebra_criterion() -> Outcome {
    let b = chart_bounds_check(&cfg(116, 120, 8));
    let norms_seen: Vec<f64> = CHART_NORMS
        .iter()
        .copied()
        .filter(|r| {
            b.cases.iter().any(|c| {
                c.values.get("norm_x").and_then(|v| v.as_f64()).is_some_and(|x| (x - r).abs() < 1e-9)
            })
        })
        .collect();
    let u = unitary_section_check(&cfg(117, 100, 8));
    let l = lift_square_root_check(&cfg(118, 100, 7));
    let f = lift_function_identity(&cfg(119, 100, 7));
    judge(
        &[
            Requirement { check: &b, min_cases: 100, tol: 1e-9 },
            Requirement { check: &u, min_cases: 100, tol: 1e-9 },
            Requirement { check: &l, min_cases: 100, tol: 1e-8 },
            Requirement { check: &f, min_cases: 100, tol: 1e-9 },
        ],
        &[(norms_seen.len() == 3, format!("chart norms covered {norms_seen:?}"))],
    )
}

fn cocycle_criterion() -> Outcome {
    let fp = fp_cocycle(&cfg(120, 400, 12));
    let fr = fr_cocycle(&cfg(121, 100, 7));
    let fpn = fp_nested(&cfg(122, 300, 9));
    let frn = fr_nested(&cfg(123, 100, 8));
    judge(
        &[
            Requirement { check: &fp, min_cases: 100, tol: 1e-8 },
            Requirement { check: &fr, min_cases: 100, tol: 1e-8 },
            Requirement { check: &fpn, min_cases: 100, tol: 1e-9 },
            Requirement { check: &frn, min_cases: 100, tol: 1e-9 },
        ],
        &[],
    )
}

/// Drops the timing line; everything else must match byte for byte.
fn without_timing(s: &str) -> String {
    s.lines().filter(|l| !l.contains("\"wall_time_s\"")).collect::<Vec<_>>().join("\n")
}

fn reproducibility_criterion() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_grassdet"))
            .args(["verify", "all", "--seed", "7", "--trials", "3", "--dims", "6"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let (sa, sb) = (String::from_utf8_lossy(&a.stdout), String::from_utf8_lossy(&b.stdout));
    let same = !sa.is_empty() && without_timing(&sa) == without_timing(&sb);
    let has_timing = sa.contains("\"wall_time_s\"");
    Outcome {
        pass: same && has_timing && a.status.code() == b.status.code(),
        detail: format!(
            "{} bytes, identical apart from timing: {same}, exit codes {:?}/{:?}",
            sa.len(),
            a.status.code(),
            b.status.code()
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("index consistency", index_consistency_criterion),
        ("additivity and duality", additivity_duality_criterion),
        ("intersection equivalence", intersection_criterion),
        ("splitting independence and naturality", phi_criterion),
        ("restriction closed form", restriction_criterion),
        ("composition associativity", associativity_criterion),
        ("sign table sweep", appendix_b_criterion),
        ("sum lift", sum_criterion),
        ("orientation calculus", orientation_criterion),
        ("star-algebra charts and lifts", star_algebra_criterion),
        ("chart cocycles", cocycle_criterion),
        ("reproducibility", reproducibility_criterion),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (o, t) = timed(f);
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<40} {} ({:.1}s) {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
