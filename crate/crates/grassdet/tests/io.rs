use grassdet::io::*;
use grassdet::report::{CheckResult, InputDigest, Report};
use grassdet::{Case, Failure, RunConfig};
use grassdet_core::grassmann::distance;
use grassdet_core::random::Sampler;
use grassdet_core::{Field, Matrix, Scalar, Tolerance};
use proptest::prelude::*;
use serde_json::json;

fn tol() -> Tolerance {
    Tolerance::default()
}

#[test]
fn real_matrix_is_row_major() {
    let m = parse_matrix(r#"{"field":"real","rows":2,"cols":3,"data":[1,2,3,4,5,6]}"#).unwrap();
    assert_eq!(m.get(0, 2), Scalar::new(3.0, 0.0));
    assert_eq!(m.get(1, 0), Scalar::new(4.0, 0.0));
    assert_eq!(m.field(), Field::Real);
}

#[test]
fn complex_entries_are_pairs() {
    let m = parse_matrix(r#"{"field":"complex","rows":1,"cols":2,"data":[[1,-2], 3]}"#).unwrap();
    assert_eq!(m.get(0, 0), Scalar::new(1.0, -2.0));
    assert_eq!(m.get(0, 1), Scalar::new(3.0, 0.0));
}

#[test]
fn malformed_matrices_are_usage_errors() {
    for text in [
        r#"{"field":"real","rows":2,"cols":2,"data":[1,2,3]}"#,
        r#"{"field":"real","rows":1,"cols":1,"data":[[1,2]]}"#,
        r#"{"field":"quaternion","rows":1,"cols":1,"data":[1]}"#,
        r#"{"field":"real","rows":1,"cols":1,"data":[1],"extra":0}"#,
        r#"[1,2,3]"#,
    ] {
        assert!(matches!(parse_matrix(text), Err(Failure::Usage(_))), "{text}");
    }
}

#[test]
fn subspace_frames_are_checked() {
    let ok = r#"{"ambient":3,"frame":{"field":"real","rows":3,"cols":1,"data":[0,1,0]}}"#;
    assert_eq!(parse_subspace(ok, &tol()).unwrap().dim(), 1);
    let wrong_rows = r#"{"ambient":4,"frame":{"field":"real","rows":3,"cols":1,"data":[0,1,0]}}"#;
    assert!(matches!(parse_subspace(wrong_rows, &tol()), Err(Failure::Usage(_))));
    let long = r#"{"ambient":3,"frame":{"field":"real","rows":3,"cols":1,"data":[0,2,0]}}"#;
    assert!(matches!(parse_subspace(long, &tol()), Err(Failure::Usage(_))));
}

#[test]
fn drift_below_the_limit_is_repaired_keeping_orientation() {
    let e = 1e-8;
    let text = format!(r#"{{"ambient":2,"frame":{{"field":"real","rows":2,"cols":2,"data":[{},{e},{e},{}]}}}}"#, 1.0 + e, -1.0);
    let s = parse_subspace(&text, &tol()).unwrap();
    assert!(s.frame().gram_residual() < 1e-14);
    // columns stay close to e₁ and −e₂
    assert!((s.basis()[(0, 0)].re - 1.0).abs() < 1e-7);
    assert!((s.basis()[(1, 1)].re + 1.0).abs() < 1e-7);
    let far = 1e-5;
    let text = format!(r#"{{"ambient":2,"frame":{{"field":"real","rows":2,"cols":1,"data":[{},0]}}}}"#, 1.0 + far);
    assert!(parse_subspace(&text, &tol()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrices_round_trip(seed in 0u64..10_000, r in 0usize..5, c in 0usize..5, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let mut g = Sampler::new(seed, field);
        let m = g.gaussian_matrix(r, c);
        let text = serde_json::to_string(&matrix_json(&m)).unwrap();
        let back: Matrix = parse_matrix(&text).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn subspaces_round_trip(seed in 0u64..10_000, n in 1usize..7, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let mut g = Sampler::new(seed, field);
        let k = g.int(0, n);
        let s = g.subspace(n, k);
        let text = serde_json::to_string(&subspace_json(&s)).unwrap();
        let back = parse_subspace(&text, &tol()).unwrap();
        prop_assert_eq!(back.dim(), k);
        prop_assert!(distance(&back, &s).unwrap() < 1e-14);
    }

    #[test]
    fn digests_separate_distinct_inputs(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        prop_assume!(a != b);
        prop_assert_ne!(InputDigest::default().number(a).finish(), InputDigest::default().number(b).finish());
        prop_assert_eq!(InputDigest::default().number(a).finish(), InputDigest::default().number(a).finish());
    }
}

fn case(residual: f64) -> Case {
    Case { trial: 0, inputs: String::new(), values: Default::default(), residual }
}

#[test]
fn report_passes_iff_every_residual_is_below_threshold() {
    let mut c = CheckResult::new("x", 1e-8);
    c.cases.push(case(1e-9));
    assert!(c.pass());
    c.cases.push(case(1e-8));
    assert!(!c.pass());
    assert_eq!(c.failures(), 1);
    let mut nan = CheckResult::new("y", 1.0);
    nan.cases.push(case(f64::NAN));
    assert!(!nan.pass());
    let mut err = CheckResult::new("z", 1.0);
    err.errors.push((3, "boom".into()));
    assert!(!err.pass());
    let r = Report { suite: "s".into(), config: Some(RunConfig::default()), checks: vec![c, nan], wall_time: 0.5 };
    let j = r.to_json();
    assert_eq!(j["schema"], 1);
    assert_eq!(j["pass"], false);
    assert_eq!(j["checks"][1]["records"][0]["residual"], json!(null));
    assert_eq!(j["config"]["field"], "mixed");
}

#[test]
fn config_bounds() {
    assert!(RunConfig::new(0, 1, 2, tol(), None).is_ok());
    assert!(RunConfig::new(0, 1, 64, tol(), None).is_ok());
    assert!(RunConfig::new(0, 0, 8, tol(), None).is_err());
    assert!(RunConfig::new(0, 1, 1, tol(), None).is_err());
    assert!(RunConfig::new(0, 1, 65, tol(), None).is_err());
}
