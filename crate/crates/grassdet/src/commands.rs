//! `index` and `detline`: single computations on user inputs or seeded random ones.

use std::path::PathBuf;
use std::time::Instant;

use grassdet_core::bundles::*;
use grassdet_core::detcalc::*;
use grassdet_core::fredholm::*;
use grassdet_core::grassmann::{intersection, span_sum};
use grassdet_core::numcore::{rel_diff, singular_values};
use grassdet_core::random::Sampler;
use grassdet_core::{CMat, Field, Matrix, Subspace};
use serde_json::{json, Map, Value};

use crate::failure::{usage, Failure};
use crate::instances::admissible;
use crate::io::{matrix_json, read_matrix, read_subspace, scalar_json, subspace_json};
use crate::report::{Case, CheckResult, InputDigest, Report, RunConfig};

/// Where a command gets its operands.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Files(Vec<PathBuf>),
    /// Seeded instance in ambient dimension at most `dim` (`cfg.dims` if `None`).
    Random { dim: Option<usize> },
}

/// Residual bound for the dual-path comparisons of `detline`.
pub const DETLINE_THRESHOLD: f64 = 1e-8;

fn single(suite: &str, check: CheckResult, cfg: &RunConfig, start: Instant) -> Report {
    Report {
        suite: suite.to_string(),
        config: Some(cfg.clone()),
        checks: vec![check],
        wall_time: start.elapsed().as_secs_f64(),
    }
}

fn one_case(name: &str, threshold: f64, inputs: InputDigest, values: Value, residual: f64) -> CheckResult {
    let mut c = CheckResult::new(name, threshold);
    let values = match values {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    c.cases.push(Case { trial: 0, inputs: inputs.finish(), values, residual });
    c
}

fn sampler(cfg: &RunConfig) -> Sampler {
    Sampler::new(cfg.seed, cfg.field.unwrap_or(Field::Real))
}

fn expect_files(files: &[PathBuf], want: &[usize], what: &str) -> Result<(), Failure> {
    if !want.contains(&files.len()) {
        return Err(usage(format!("{what} expects {} input files, got {}", describe(want), files.len())));
    }
    Ok(())
}

fn describe(want: &[usize]) -> String {
    want.iter().map(usize::to_string).collect::<Vec<_>>().join(" or ")
}

fn random_dim(dim: Option<usize>, cfg: &RunConfig, lo: usize) -> Result<usize, Failure> {
    let n = dim.unwrap_or(cfg.dims);
    if n < lo || n > crate::report::MAX_DIMS {
        return Err(usage(format!("--dim must lie in [{lo}, {}], got {n}", crate::report::MAX_DIMS)));
    }
    Ok(n)
}

fn subspaces(files: &[PathBuf], cfg: &RunConfig) -> Result<Vec<Subspace>, Failure> {
    files.iter().map(|p| read_subspace(p, &cfg.tol)).collect()
}

/// Index, relative dimension, `dim V∩W` and `codim(V+W)` of a pair, with the
/// principal-angle cosines as conditioning diagnostics.
pub fn cmd_index(source: &Source, cfg: &RunConfig) -> Result<Report, Failure> {
    let start = Instant::now();
    let tol = cfg.tol;
    let (v, w, generated) = match source {
        Source::Files(files) => {
            expect_files(files, &[2], "index")?;
            let mut s = subspaces(files, cfg)?;
            let w = s.pop().expect("two files");
            (s.pop().expect("two files"), w, false)
        }
        Source::Random { dim } => {
            let n = random_dim(*dim, cfg, 1)?;
            let mut g = sampler(cfg);
            let (v, w, _) = crate::instances::pair_with_intersection(&mut g, n, &tol);
            (v, w, true)
        }
    };
    let pair = FredholmPair::new(v.clone(), w.clone())?;
    let n = v.ambient_dim();
    let index = pair_index(&pair, &tol);
    let via_operator = pair_index_via_operator(&pair, &tol);
    let (dim_cap, codim_sum) = pair_dims(&pair, &tol);
    let relative = relative_dimension(&v, &w, &tol)?;
    let cross = Matrix::auto(v.basis().adjoint() * w.basis());
    let cosines = singular_values(&cross);
    let mut values = json!({
        "ambient": n,
        "dim_v": v.dim(),
        "dim_w": w.dim(),
        "index": index,
        "index_via_operator": via_operator,
        "relative_dimension": relative,
        "intersection_dim": dim_cap,
        "sum_codim": codim_sum,
        "principal_cosines": cosines,
        "sum_singular_values": singular_values(&Matrix::auto(crate::instances::hstack(&[v.basis(), w.basis()]))),
    });
    if generated {
        values["v"] = subspace_json(&v);
        values["w"] = subspace_json(&w);
    }
    let expect = v.dim() as i64 + w.dim() as i64 - n as i64;
    let bad = [index == expect, via_operator == expect, dim_cap as i64 - codim_sum as i64 == expect]
        .iter()
        .filter(|&&ok| !ok)
        .count();
    let check = one_case("index", 0.5, InputDigest::default().subspace(&v).subspace(&w), values, bad as f64);
    Ok(single("index", check, cfg, start))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetlineOp {
    Compose,
    Sum,
    Chart,
    Transpose,
}

impl DetlineOp {
    pub fn name(self) -> &'static str {
        match self {
            DetlineOp::Compose => "compose",
            DetlineOp::Sum => "sum",
            DetlineOp::Chart => "chart",
            DetlineOp::Transpose => "transpose",
        }
    }
}

/// Line isomorphism scales with a second evaluation path where one exists.
pub fn cmd_detline(op: DetlineOp, source: &Source, cfg: &RunConfig) -> Result<Report, Failure> {
    let start = Instant::now();
    let check = match op {
        DetlineOp::Compose => detline_compose(source, cfg)?,
        DetlineOp::Sum => detline_sum(source, cfg)?,
        DetlineOp::Chart => detline_chart(source, cfg)?,
        DetlineOp::Transpose => detline_transpose(source, cfg)?,
    };
    Ok(single(&format!("detline.{}", op.name()), check, cfg, start))
}

/// `S : X → Y`, `T : Y → Z`. The composition lift, and `φ` of the six-term sequence
/// under the orthogonal splitting against a seeded non-orthogonal one.
fn detline_compose(source: &Source, cfg: &RunConfig) -> Result<CheckResult, Failure> {
    let tol = cfg.tol;
    let mut g = sampler(cfg);
    let (s, t) = match source {
        Source::Files(files) => {
            expect_files(files, &[2], "detline compose")?;
            (read_matrix(&files[0])?, read_matrix(&files[1])?)
        }
        Source::Random { dim } => {
            let hi = random_dim(*dim, cfg, 1)?;
            let d = [g.int(1, hi), g.int(1, hi), g.int(1, hi)];
            let f = g.field();
            (Matrix::from_cmat(f, g.mixed_rank(d[1], d[0])), Matrix::from_cmat(f, g.mixed_rank(d[2], d[1])))
        }
    };
    let fs = fredholm_map(&s, &tol);
    let ft = fredholm_map(&t, &tol);
    let ts = compose_maps(&fs, &ft, &tol)?;
    let lift = compose_lift(&fs, &ft, &tol)?;
    let seq = composition_sequence(&fs, &ft, &ts)?;
    let orth = orthogonal_splitting(&seq)?;
    let ranks = seq.ranks()?;
    let comps: Vec<CMat> = ranks.iter().zip(seq.dims()).map(|(&r, &d)| g.gaussian(d, r)).collect();
    let other = splitting_from_complements(&seq, &comps)?;
    let (a, b) = (phi_scale(&seq, &orth)?, phi_scale(&seq, &other)?);
    let mut values = json!({
        "scale": scalar_json(lift.scale),
        "psi_s": scalar_json(psi_t(&fs, &tol).scale),
        "psi_t": scalar_json(psi_t(&ft, &tol).scale),
        "psi_ts": scalar_json(psi_t(&ts, &tol).scale),
        "sequence_dims": seq.dims(),
        "phi_orthogonal": scalar_json(a),
        "phi_other_splitting": scalar_json(b),
    });
    if matches!(source, Source::Random { .. }) {
        values["s"] = matrix_json(&s);
        values["t"] = matrix_json(&t);
    }
    Ok(one_case(
        "compose",
        DETLINE_THRESHOLD,
        InputDigest::default().matrix(s.data()).matrix(t.data()),
        values,
        rel_diff(a, b),
    ))
}

/// `S(X,(V,W))` through its five-term sequence and through the composition lift.
fn detline_sum(source: &Source, cfg: &RunConfig) -> Result<CheckResult, Failure> {
    let tol = cfg.tol;
    let (x, v, w) = match source {
        Source::Files(files) => {
            expect_files(files, &[3], "detline sum (X V W)")?;
            let s = subspaces(files, cfg)?;
            (s[0].clone(), s[1].clone(), s[2].clone())
        }
        Source::Random { dim } => {
            let n = random_dim(*dim, cfg, 2)?;
            let mut g = sampler(cfg);
            let dx = g.int(0, 2.min(n));
            let dv = g.int(0, n - dx);
            let dw = g.int(0, n);
            (g.subspace(n, dx), g.subspace(n, dv), g.subspace(n, dw))
        }
    };
    let r = sum_lift(&x, &FredholmPair::new(v.clone(), w.clone())?, &tol)?;
    let mut values = json!({
        "direct": scalar_json(r.direct),
        "via_composition": scalar_json(r.via_composition),
        "dims": [x.dim(), v.dim(), w.dim()],
    });
    if matches!(source, Source::Random { .. }) {
        values["x"] = subspace_json(&x);
        values["v"] = subspace_json(&v);
        values["w"] = subspace_json(&w);
    }
    Ok(one_case(
        "sum",
        DETLINE_THRESHOLD,
        InputDigest::default().subspace(&x).subspace(&v).subspace(&w),
        values,
        r.rel_diff,
    ))
}

/// The `Fp` chart map at `(V,W)` for chart space `X`; with a second chart `X′`, the
/// transition directly and through the common refinement.
fn detline_chart(source: &Source, cfg: &RunConfig) -> Result<CheckResult, Failure> {
    let tol = cfg.tol;
    let (v, w, xs) = match source {
        Source::Files(files) => {
            expect_files(files, &[3, 4], "detline chart (V W X [X2])")?;
            let s = subspaces(files, cfg)?;
            (s[0].clone(), s[1].clone(), s[2..].to_vec())
        }
        Source::Random { dim } => {
            let n = random_dim(*dim, cfg, 3)?;
            let mut g = sampler(cfg);
            let mut found = None;
            for _ in 0..100 {
                let (v, w, x) = admissible(&mut g, n, &tol);
                let pair = FredholmPair::new(v.clone(), w.clone())?;
                let c = n - span_sum(&v, &w, &tol)?.dim();
                let room = n - v.dim();
                let d2 = (c + 1).min(room);
                let shared = (x.dim() + d2).saturating_sub(room).min(x.dim()).min(d2);
                let x2 = g.subspace_sharing(n, d2, &[(&x, shared)]);
                // the transition routes through X + X2, so that must be a chart too
                let both = span_sum(&x, &x2, &tol)?;
                let ok = [&x, &x2, &both].iter().all(|x| FpChart::new((*x).clone()).check(&pair, &tol).is_ok());
                if ok {
                    found = Some((v, w, vec![x, x2]));
                    break;
                }
            }
            found.ok_or_else(|| usage("no admissible random chart found; try another seed"))?
        }
    };
    let pair = FredholmPair::new(v.clone(), w.clone())?;
    let charts: Vec<FpChart> = xs.iter().cloned().map(FpChart::new).collect();
    for ch in &charts {
        ch.check(&pair, &tol)?;
    }
    let map = fp_chart_map(&charts[0], &pair, &tol)?;
    let mut values = json!({
        "scale": scalar_json(map.scale),
        "intersection_dim": intersection(&v, &w, &tol)?.dim(),
        "chart_dims": xs.iter().map(Subspace::dim).collect::<Vec<_>>(),
    });
    let mut residual = 0.0;
    if charts.len() == 2 {
        let direct = fp_transition(&charts[0], &charts[1], &pair, &tol)?.scale;
        let via = fp_transition_via_sum(&charts[0], &charts[1], &pair, &tol)?.scale;
        values["transition"] = scalar_json(direct);
        values["transition_via_sum"] = scalar_json(via);
        residual = rel_diff(direct, via);
    }
    if matches!(source, Source::Random { .. }) {
        values["v"] = subspace_json(&v);
        values["w"] = subspace_json(&w);
        values["x"] = Value::Array(xs.iter().map(subspace_json).collect());
    }
    let inputs = xs.iter().fold(InputDigest::default().subspace(&v).subspace(&w), |d, x| d.subspace(x));
    Ok(one_case("chart", DETLINE_THRESHOLD, inputs, values, residual))
}

/// The transposition `Det(V,W) → Det(W,V)` induced through the chart `X`, with the
/// residual of its ladder squares.
fn detline_transpose(source: &Source, cfg: &RunConfig) -> Result<CheckResult, Failure> {
    let tol = cfg.tol;
    let (v, w, x) = match source {
        Source::Files(files) => {
            expect_files(files, &[3], "detline transpose (V W X)")?;
            let s = subspaces(files, cfg)?;
            (s[0].clone(), s[1].clone(), s[2].clone())
        }
        Source::Random { dim } => {
            let n = random_dim(*dim, cfg, 2)?;
            let mut g = sampler(cfg);
            let (dv, dw) = (g.int(1, n / 2), g.int(1, n / 2));
            let (v, w) = (g.subspace(n, dv), g.subspace(n, dw));
            let x = g.subspace(n, n - dv - dw);
            (v, w, x)
        }
    };
    let r = transpose_lift(&FpChart::new(x.clone()), &FredholmPair::new(v.clone(), w.clone())?, &tol)?;
    let mut values = json!({
        "lift_scale": scalar_json(r.lift.scale),
        "transposition": scalar_json(r.transposition),
        "ladder_residual": r.ladder_residual,
    });
    if matches!(source, Source::Random { .. }) {
        values["v"] = subspace_json(&v);
        values["w"] = subspace_json(&w);
        values["x"] = subspace_json(&x);
    }
    Ok(one_case(
        "transpose",
        DETLINE_THRESHOLD,
        InputDigest::default().subspace(&v).subspace(&w).subspace(&x),
        values,
        r.ladder_residual,
    ))
}
