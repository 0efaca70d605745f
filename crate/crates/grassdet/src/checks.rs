//! Seeded property checks. Each draws `cfg.trials` instances, evaluates the library on
//! them, and compares against a value known by construction or computed another way.

use grassdet_core::bundles::*;
use grassdet_core::detcalc::*;
use grassdet_core::fredholm::*;
use grassdet_core::grassmann::*;
use grassdet_core::numcore::{det, rel_diff, singular_values};
use grassdet_core::orient::*;
use grassdet_core::random::Sampler;
use grassdet_core::staralg::*;
use grassdet_core::{CMat, Error, Field, Matrix, Subspace};
use serde_json::{json, Value};

use crate::instances::*;
use crate::io::scalar_json;
use crate::report::{Case, CheckResult, InputDigest, RunConfig};

/// What one trial produced.
pub enum Outcome {
    Case { inputs: InputDigest, values: Value, residual: f64 },
    /// Instance outside the hypotheses of the property.
    Skip,
}

type TrialResult = Result<Outcome, Error>;

fn case(inputs: InputDigest, values: Value, residual: f64) -> TrialResult {
    Ok(Outcome::Case { inputs, values, residual })
}

fn mismatches(conditions: &[bool]) -> f64 {
    conditions.iter().filter(|&&ok| !ok).count() as f64
}

fn stream_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_add(salt.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Runs `trial` for each trial index with its own sampler.
pub fn run(
    name: &str,
    threshold: f64,
    salt: u64,
    cfg: &RunConfig,
    mut trial: impl FnMut(&mut Sampler, u64) -> TrialResult,
) -> CheckResult {
    let mut out = CheckResult::new(name, threshold);
    let seed = stream_seed(cfg.seed, salt);
    for t in 0..cfg.trials as u64 {
        let mut g = Sampler::for_trial(seed, t, cfg.field_for(t));
        match trial(&mut g, t) {
            Ok(Outcome::Case { inputs, values, residual }) => {
                let values = match values {
                    Value::Object(m) => m,
                    other => [("value".to_string(), other)].into_iter().collect(),
                };
                out.cases.push(Case { trial: t, inputs: inputs.finish(), values, residual });
            }
            Ok(Outcome::Skip) => out.skipped += 1,
            Err(e) => out.errors.push((t, e.to_string())),
        }
    }
    out
}

fn real_only(cfg: &RunConfig) -> RunConfig {
    RunConfig { field: Some(Field::Real), ..cfg.clone() }
}

// ---------------------------------------------------------------- grassmann

/// Transverse formula, power iteration and the SVD intersection against the block
/// `S` of a constructed pair `V = S ⊕ A`, `W = S ⊕ B`, and of a perturbation of it.
pub fn intersection_equivalence(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("grassmann.intersection-equivalence", 1e-8, 1, cfg, |g, _| {
        let field = g.field();
        let n = g.int(2, cfg.cap(2, 9));
        let (k, a, b) = transverse_dims(g, n);
        let (s, am, bm) = (g.gaussian(n, k), g.gaussian(n, a), g.gaussian(n, b));
        let base = transverse_pair(field, &s, &am, &bm, &tol);
        let eps = g.uniform(0.0, 0.05);
        let ds = g.gaussian(n, k) * cx(eps);
        let da = g.gaussian(n, a) * cx(eps);
        let db = g.gaussian(n, b) * cx(eps);
        let moved = transverse_pair(field, &(&s + ds), &(&am + da), &(&bm + db), &tol);
        let direct = intersect_transverse(&base.v, &base.w, &tol)?;
        let near = intersect_transverse_near(&base.v, &base.w, &moved.v, &moved.w, &tol)?;
        let power = intersect_power(&moved.v, &moved.w, &tol)?;
        let svd = intersection(&moved.v, &moved.w, &tol)?;
        let d = [
            distance(&direct, &base.s)?,
            distance(&near, &moved.s)?,
            distance(&power, &moved.s)?,
            distance(&svd, &moved.s)?,
            distance(&near, &power)?,
        ];
        let inputs = InputDigest::default().subspace(&moved.v).subspace(&moved.w).subspace(&base.v).subspace(&base.w);
        case(
            inputs,
            json!({"ambient": n, "intersection_dim": k, "dims": [near.dim(), power.dim(), svd.dim()], "distances": d}),
            d.iter().copied().fold(0.0, f64::max),
        )
    })
}

/// Two lines at angle `φ`: `‖(P_V P_W)ⁿ − P_{V∩W}‖ ≤ θⁿ + 1e-9` for `n ≤ 60`, where
/// `θ = ‖P_V P_W − P_{V∩W}‖`. The residual is the largest excess over `θⁿ`.
pub fn power_iteration_bound(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    let angles = [0.2f64, 0.5, 1.0];
    let cfg = RunConfig { trials: angles.len(), field: Some(Field::Real), ..cfg.clone() };
    run("grassmann.power-iteration-bound", 1e-9, 2, &cfg, |_, t| {
        let phi = angles[t as usize];
        let v = Subspace::coordinate(2, &[0]);
        let w = span(Field::Real, CMat::from_column_slice(2, 1, &[cx(phi.cos()), cx(phi.sin())]), &tol);
        let p0 = projector(&intersection(&v, &w, &tol)?).into_data();
        let theta = opnorm(&(power_iterate(&v, &w, 1)? - &p0));
        let mut excess = 0.0f64;
        for n in 1..=60 {
            let err = opnorm(&(power_iterate(&v, &w, n)? - &p0));
            excess = excess.max(err - theta.powi(n as i32));
        }
        let limit = intersect_power(&v, &w, &tol)?.dim();
        case(
            InputDigest::default().number(phi),
            json!({"angle": phi, "theta": theta, "cos_angle": phi.cos(), "limit_dim": limit}),
            excess.max(0.0) + (theta - phi.cos()).abs() + limit as f64,
        )
    })
}

/// `chart_from(chart_to(V, W)) = W` for `W` near `V`.
pub fn chart_round_trip(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("grassmann.chart-round-trip", 1e-9, 3, cfg, |g, _| {
        let n = g.int(1, cfg.cap(1, 8));
        let d = g.int(0, n);
        let v = g.subspace(n, d);
        let w = nearby(g, &v, &tol);
        let p = chart_to(&v, &w, &tol)?;
        let r = distance(&chart_from(&p), &w)?;
        case(InputDigest::default().subspace(&v).subspace(&w), json!({"ambient": n, "dim": d}), r)
    })
}

// ---------------------------------------------------------------- fredholm

/// `ind(V,W)` three ways against `dim V + dim W − n`; residual counts disagreements.
pub fn index_consistency(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("fredholm.index-consistency", 0.5, 4, cfg, |g, _| {
        let n = g.int(1, cfg.cap(1, 32));
        let (v, w, k) = pair_with_intersection(g, n, &tol);
        let expect = v.dim() as i64 + w.dim() as i64 - n as i64;
        let inputs = InputDigest::default().subspace(&v).subspace(&w);
        let p = FredholmPair::new(v, w)?;
        let (i, c) = pair_dims(&p, &tol);
        let (a, b, t) = (pair_index(&p, &tol), pair_index_via_operator(&p, &tol), pair_index(&p.transposed(), &tol));
        case(
            inputs,
            json!({"ambient": n, "expected": expect, "index": a, "via_operator": b, "transposed": t,
                   "intersection_dim": i, "sum_codim": c, "constructed_intersection_dim": k}),
            mismatches(&[i == k, a == expect, b == expect, t == expect, i as i64 - c as i64 == expect]),
        )
    })
}

/// `ind(V,Z) − ind(W,Z) = dim(V,W)` against indices known from the dimensions.
pub fn additivity(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("fredholm.additivity", 0.5, 5, cfg, |g, _| {
        let n = g.int(1, cfg.cap(1, 16));
        let (v, w, _) = pair_with_intersection(g, n, &tol);
        let dz = g.int(0, n);
        let z = if g.chance(0.5) {
            let k = g.int(0, dz.min(v.dim()));
            g.subspace_sharing(n, dz, &[(&v, k)])
        } else {
            g.subspace(n, dz)
        };
        let r = verify_additivity(&v, &w, &z, &tol)?;
        let n = n as i64;
        let want = (v.dim() as i64 + z.dim() as i64 - n, w.dim() as i64 + z.dim() as i64 - n);
        case(
            InputDigest::default().subspace(&v).subspace(&w).subspace(&z),
            json!({"index_vz": r.index_vz, "index_wz": r.index_wz, "relative_vw": r.relative_vw, "expected": [want.0, want.1]}),
            mismatches(&[
                r.holds,
                (r.index_vz, r.index_wz) == want,
                r.relative_vw == v.dim() as i64 - w.dim() as i64,
            ]),
        )
    })
}

/// `dim(ran T′, ran T) = −dim(ker T′, ker T)` for maps of prescribed rank.
pub fn duality(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("fredholm.duality", 0.5, 6, cfg, |g, _| {
        let field = g.field();
        let (r, c) = (g.int(1, cfg.cap(1, 9)), g.int(1, cfg.cap(1, 9)));
        let (k1, k2) = (g.int(0, r.min(c)), g.int(0, r.min(c)));
        let t = g.rank_deficient(r, c, k1);
        let t2 = g.rank_deficient(r, c, k2);
        let inputs = InputDigest::default().matrix(&t).matrix(&t2);
        let rep = verify_kernel_range_duality(&Matrix::from_cmat(field, t), &Matrix::from_cmat(field, t2), &tol)?;
        let want = k2 as i64 - k1 as i64;
        case(
            inputs,
            json!({"range_relative": rep.range_relative, "kernel_relative": rep.kernel_relative, "expected": want}),
            mismatches(&[rep.holds, rep.range_relative == want, rep.kernel_relative == -want]),
        )
    })
}

// ---------------------------------------------------------------- detcalc

/// The scale of `φ` under the orthogonal splitting and under one built from random
/// complements.
pub fn splitting_independence(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("detcalc.splitting-independence", 1e-9, 7, cfg, |g, _| {
        let len = g.int(2, 6);
        let seq = exact_sequence(g, len, &tol)?;
        let orth = orthogonal_splitting(&seq)?;
        let ranks = seq.ranks()?;
        let comps: Vec<CMat> = ranks.iter().zip(seq.dims()).map(|(&r, &d)| g.gaussian(d, r)).collect();
        let other = splitting_from_complements(&seq, &comps)?;
        let a = phi_scale(&seq, &orth)?;
        let b = phi_scale(&seq, &other)?;
        let mut inputs = InputDigest::default();
        for m in seq.maps().iter().chain(&comps) {
            inputs = inputs.matrix(m);
        }
        case(
            inputs,
            json!({"dims": seq.dims(), "orthogonal": scalar_json(a), "other": scalar_json(b),
                   "splitting_residuals": [splitting_residual(&seq, &orth), splitting_residual(&seq, &other)]}),
            rel_diff(a, b),
        )
    })
}

/// Moving a sequence by isomorphisms `gᵢ` multiplies `φ` by the alternating product of
/// `det gᵢ`.
pub fn naturality(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("detcalc.naturality", 1e-9, 8, cfg, |g, _| {
        let len = g.int(2, 6);
        let seq = exact_sequence(g, len, &tol)?;
        let isos: Vec<CMat> = seq.dims().iter().map(|&d| g.invertible(d)).collect();
        let moved: Vec<CMat> = (0..len - 1)
            .map(|i| &isos[i + 1] * &seq.maps()[i] * isos[i].clone().try_inverse().expect("invertible"))
            .collect();
        let seq2 = ExactSequence::new(seq.dims().to_vec(), moved, &tol)?;
        let s1 = phi_t(&seq)?.scale;
        let s2 = phi_t(&seq2)?.scale;
        let odd: grassdet_core::Scalar = isos.iter().step_by(2).map(det).product();
        let even: grassdet_core::Scalar = isos.iter().skip(1).step_by(2).map(det).product();
        let mut inputs = InputDigest::default();
        for m in seq.maps().iter().chain(&isos) {
            inputs = inputs.matrix(m);
        }
        case(
            inputs,
            json!({"dims": seq.dims(), "original": scalar_json(s1), "moved": scalar_json(s2)}),
            rel_diff(s2 * odd, s1 * even),
        )
    })
}

/// `T = [[T₀, B], [0, Q]]`: the closed form `det Q` against `ψ_T` and `ψ_{T₀}` composed
/// through the inclusions.
pub fn restriction(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("detcalc.restriction", 1e-9, 9, cfg, |g, _| {
        let field = g.field();
        let (x0, y0, z) = (g.int(0, 4), g.int(0, 4), g.int(1, 3));
        let mut m = CMat::zeros(y0 + z, x0 + z);
        let t0 = g.mixed_rank(y0, x0);
        m.view_mut((0, 0), (y0, x0)).copy_from(&t0);
        let b = g.gaussian(y0, z);
        m.view_mut((0, x0), (y0, z)).copy_from(&b);
        let q = g.invertible(z);
        m.view_mut((y0, x0), (z, z)).copy_from(&q);
        let inputs = InputDigest::default().matrix(&m).int(x0 as u64).int(y0 as u64);
        let r = restriction_compat(&Matrix::from_cmat(field, m), BlockSplit { x0, y0 }, &tol)?;
        case(
            inputs,
            json!({"closed_form": scalar_json(r.closed_form), "composed": scalar_json(r.composed), "det_q": scalar_json(det(&q))}),
            r.rel_diff.max(rel_diff(r.closed_form, det(&q))),
        )
    })
}

/// Both bracketings of three composition lifts.
pub fn composition_associativity(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("detcalc.composition-associativity", 1e-8, 10, cfg, |g, _| {
        let field = g.field();
        let hi = cfg.cap(1, 8);
        let d: Vec<usize> = (0..4).map(|_| g.int(1, hi)).collect();
        let ms: Vec<CMat> = (0..3).map(|i| g.mixed_rank(d[i + 1], d[i])).collect();
        let ts: Vec<FredholmMap> = ms.iter().map(|m| fredholm_map(&Matrix::from_cmat(field, m.clone()), &tol)).collect();
        let r = assoc_check(&ts[0], &ts[1], &ts[2], &tol)?;
        let inputs = ms.iter().fold(InputDigest::default(), |acc, m| acc.matrix(m));
        case(
            inputs,
            json!({"dims": d, "ranks": ts.iter().map(FredholmMap::rank).collect::<Vec<_>>(),
                   "left": scalar_json(r.left), "right": scalar_json(r.right)}),
            r.rel_diff,
        )
    })
}

/// `s(ψ_{T*}) = conj s(ψ_T)`.
pub fn adjoint_conjugate(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("detcalc.adjoint-conjugate", 1e-8, 11, cfg, |g, _| {
        let field = g.field();
        let (m, n) = (g.int(1, cfg.cap(1, 6)), g.int(1, cfg.cap(1, 6)));
        let a = g.mixed_rank(m, n);
        let inputs = InputDigest::default().matrix(&a);
        let t = fredholm_map(&Matrix::from_cmat(field, a), &tol);
        let r = adjoint_identity_check(&t, &tol);
        case(inputs, json!({"psi": scalar_json(r.psi), "psi_adjoint": scalar_json(r.psi_adjoint)}), r.residual)
    })
}

// ---------------------------------------------------------------- appendix-b

/// The four-term sign sum vanishes mod 2 on every table with entries in `{0,1,2}`.
pub fn sign_parity_exhaustive(cfg: &RunConfig) -> CheckResult {
    let cfg = RunConfig { trials: 1, field: Some(Field::Real), ..cfg.clone() };
    run("appendix-b.sign-parity-exhaustive", 0.5, 12, &cfg, |_, _| {
        let (tables, failures) = appendix_b_exhaustive();
        case(InputDigest::default().int(3), json!({"tables": tables, "failures": failures}), failures as f64)
    })
}

/// Signs read off the block model against the closed formula.
pub fn block_model(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    let cfg = real_only(cfg);
    run("appendix-b.block-model", 0.5, 13, &cfg, |g, _| {
        let mut d = BlockDims::default();
        let mut inputs = InputDigest::default();
        for &(h, k) in &POSITIONS {
            let v = g.int(0, 2);
            d.set(h, k, v)?;
            inputs = inputs.int(v as u64);
        }
        let r = appendix_b_model(&d, &tol)?;
        let entries: Vec<usize> = POSITIONS.iter().map(|&(h, k)| d.get(h, k)).collect();
        case(
            inputs,
            json!({"table": entries, "assoc_rel_diff": r.assoc_rel_diff, "agrees": r.pass}),
            if r.pass { 0.0 } else { 1.0 },
        )
    })
}

// ---------------------------------------------------------------- bundles

fn skip_on_precondition<T>(r: grassdet_core::Result<T>) -> Result<Option<T>, Error> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::Precondition(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `g₁₂ g₂₃ = g₁₃` for three admissible `Fp` charts around one pair.
pub fn fp_cocycle(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.fp-cocycle", 1e-8, 14, cfg, |g, _| {
        let n = cfg.cap(3, 12);
        let (v, w, x1) = admissible(g, n, &tol);
        let pair = FredholmPair::new(v, w)?;
        let c = n - span_sum(&pair.v, &pair.w, &tol)?.dim();
        let mut charts = Vec::new();
        for d in [x1.dim(), c, c + 1] {
            charts.push(FpChart::new(g.subspace(n, d.max(c).min(n))));
        }
        if charts.iter().any(|ch| ch.check(&pair, &tol).is_err()) {
            return Ok(Outcome::Skip);
        }
        let t = |a: &FpChart, b: &FpChart| fp_transition_via_sum(a, b, &pair, &tol).map(|l| l.scale);
        let Some(ab) = skip_on_precondition(t(&charts[0], &charts[1]))? else { return Ok(Outcome::Skip) };
        let Some(bc) = skip_on_precondition(t(&charts[1], &charts[2]))? else { return Ok(Outcome::Skip) };
        let Some(ac) = skip_on_precondition(t(&charts[0], &charts[2]))? else { return Ok(Outcome::Skip) };
        let inputs = charts
            .iter()
            .fold(InputDigest::default().subspace(&pair.v).subspace(&pair.w), |acc, ch| acc.subspace(&ch.x));
        case(
            inputs,
            json!({"chart_dims": charts.iter().map(|ch| ch.x.dim()).collect::<Vec<_>>(),
                   "g12": scalar_json(ab), "g23": scalar_json(bc), "g13": scalar_json(ac)}),
            rel_diff(ab * bc, ac),
        )
    })
}

/// `Fr` transitions through the common refinement: cocycle and agreement with the
/// direct ratio of chart maps.
pub fn fr_cocycle(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.fr-cocycle", 1e-8, 15, cfg, |g, _| {
        let field = g.field();
        let (m, n) = (g.int(2, cfg.cap(2, 7)), g.int(2, cfg.cap(2, 7)));
        let a = g.mixed_rank(m, n);
        let t = fredholm_map(&Matrix::from_cmat(field, a.clone()), &tol);
        let c = t.cokernel().dim();
        let mut spaces = Vec::new();
        for _ in 0..3 {
            let d = (c + g.int(0, 2)).min(m);
            spaces.push(g.subspace(m, d));
        }
        let inputs = spaces.iter().fold(InputDigest::default().matrix(&a), |acc, s| acc.subspace(s));
        let charts: Vec<FrChart> = spaces.into_iter().map(FrChart::Transversal).collect();
        let s = |i: usize, j: usize| fr_transition_via_sum(&t, &charts[i], &charts[j], &tol).map(|l| l.scale);
        let (ab, bc, ac) = (s(0, 1)?, s(1, 2)?, s(0, 2)?);
        let direct = fr_transition(&t, &charts[0], &charts[1], &tol)?.scale;
        case(
            inputs,
            json!({"g12": scalar_json(ab), "g23": scalar_json(bc), "g13": scalar_json(ac), "g12_direct": scalar_json(direct)}),
            rel_diff(ab * bc, ac).max(rel_diff(ab, direct)),
        )
    })
}

/// Nested `Fp` charts `X ⊂ X′`: the restriction closed form against the ratio of the
/// two chart maps.
pub fn fp_nested(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.fp-nested", 1e-9, 16, cfg, |g, _| {
        let n = g.int(3, cfg.cap(3, 9));
        let (v, w, x) = admissible(g, n, &tol);
        let pair = FredholmPair::new(v, w)?;
        let small = FpChart::new(x);
        let room = n - pair.v.dim() - small.x.dim();
        if small.check(&pair, &tol).is_err() || room == 0 {
            return Ok(Outcome::Skip);
        }
        let de = g.int(1, room);
        let extra = g.subspace(n, de);
        let big = FpChart::new(span_sum(&small.x, &extra, &tol)?);
        if big.check(&pair, &tol).is_err() {
            return Ok(Outcome::Skip);
        }
        let direct = fp_transition(&small, &big, &pair, &tol)?.scale;
        let nested = fp_transition_nested(&small, &big, &pair, &tol)?.scale;
        case(
            InputDigest::default().subspace(&pair.v).subspace(&pair.w).subspace(&small.x).subspace(&big.x),
            json!({"dims": [small.x.dim(), big.x.dim()], "direct": scalar_json(direct), "nested": scalar_json(nested)}),
            rel_diff(direct, nested),
        )
    })
}

/// Nested spectral `Fr` charts at two thresholds separated by one singular value.
pub fn fr_nested(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.fr-nested", 1e-9, 17, cfg, |g, _| {
        let field = g.field();
        let n = g.int(4, cfg.cap(4, 8));
        let r = g.int(2, n - 1);
        let a = g.rank_deficient(n, n, r);
        let t = fredholm_map(&Matrix::from_cmat(field, a.clone()), &tol);
        let s = singular_values(t.matrix());
        let lo = s[r - 1] * s[r - 1];
        let hi = s[r - 2] * s[r - 2];
        if hi - lo < 1e-6 * hi {
            return Ok(Outcome::Skip);
        }
        let (e0, e1) = (lo / 2.0, (lo + hi) / 2.0);
        let nested = fr_transition_nested(&t, &FrChart::Spectral(e0), &FrChart::Spectral(e1), &tol)?.scale;
        let direct = fr_transition(&t, &FrChart::Spectral(e0), &FrChart::Spectral(e1), &tol)?.scale;
        case(
            InputDigest::default().matrix(&a),
            json!({"thresholds": [e0, e1], "direct": scalar_json(direct), "nested": scalar_json(nested)}),
            rel_diff(direct, nested),
        )
    })
}

/// The sum lift through its five-term sequence and through the composition of the
/// inclusion and difference maps.
pub fn sum_dual_path(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.sum-dual-path", 1e-8, 18, cfg, |g, _| {
        let n = g.int(4, cfg.cap(4, 10));
        let dx = g.int(0, 2);
        let dv = g.int(0, n - dx);
        let dw = g.int(0, n);
        let (x, v, w) = (g.subspace(n, dx), g.subspace(n, dv), g.subspace(n, dw));
        let inputs = InputDigest::default().subspace(&x).subspace(&v).subspace(&w);
        let r = sum_lift(&x, &FredholmPair::new(v, w)?, &tol)?;
        case(
            inputs,
            json!({"direct": scalar_json(r.direct), "via_composition": scalar_json(r.via_composition)}),
            r.rel_diff,
        )
    })
}

/// `S(Y,(V,W))·S(X,(Y+V,W)) = w(X,Y)·S(X+Y,(V,W))`.
pub fn sum_associativity(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.sum-associativity", 1e-9, 19, cfg, |g, _| {
        let n = g.int(4, cfg.cap(4, 9));
        let (dx, dy) = (g.int(0, 2), g.int(0, 2));
        let dv = g.int(0, n - dx - dy);
        let dw = g.int(0, n);
        let (x, y, v, w) = (g.subspace(n, dx), g.subspace(n, dy), g.subspace(n, dv), g.subspace(n, dw));
        let inputs = InputDigest::default().subspace(&x).subspace(&y).subspace(&v).subspace(&w);
        let r = sum_assoc_check(&x, &y, &FredholmPair::new(v, w)?, &tol)?;
        case(inputs, json!({"nested": scalar_json(r.nested), "joined": scalar_json(r.joined)}), r.rel_diff)
    })
}

/// Transposition ladder squares and independence of the induced map from the chart.
pub fn transpose_ladder(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    run("bundles.transpose-ladder", 1e-8, 20, cfg, |g, _| {
        let n = g.int(4, cfg.cap(4, 9));
        let (dv, dw) = (g.int(1, n / 2), g.int(1, n / 2));
        let (v, w) = (g.subspace(n, dv), g.subspace(n, dw));
        let c = n - dv - dw;
        let (x1, x2) = (g.subspace(n, c), g.subspace(n, c));
        let inputs = InputDigest::default().subspace(&v).subspace(&w).subspace(&x1).subspace(&x2);
        let pair = FredholmPair::new(v, w)?;
        let r1 = transpose_lift(&FpChart::new(x1), &pair, &tol)?;
        let r2 = transpose_lift(&FpChart::new(x2), &pair, &tol)?;
        case(
            inputs,
            json!({"ladder_residual": r1.ladder_residual, "transposition": [scalar_json(r1.transposition), scalar_json(r2.transposition)]}),
            r1.ladder_residual.max(r2.ladder_residual).max(rel_diff(r1.transposition, r2.transposition)),
        )
    })
}

// ---------------------------------------------------------------- orient

fn orientation(v: &Subspace, w: &Subspace, sign: Sign) -> Result<Orientation, Error> {
    Ok(Orientation { pair: FredholmPair::new(v.clone(), w.clone())?, sign })
}

fn wrong_item() -> Error {
    Error::Invalid("induction returned an unexpected item".into())
}

/// Inducing any one of (V,Z), (W,Z), co-(W,V) from the other two and re-inducing
/// reproduces every sign.
pub fn cyclic_closure(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    let cfg = real_only(cfg);
    run("orient.cyclic-closure", 0.5, 21, &cfg, |g, _| {
        let n = cfg.cap(1, 10);
        let (v, w, z) = triple(g, n);
        let a = orientation(&v, &z, random_sign(g))?;
        let b = orientation(&w, &z, random_sign(g))?;
        let c = CoOrientation { w: w.clone(), v: v.clone(), sign: random_sign(g) };
        let Induced::Co(c2) = induce_third(Some(&a), Some(&b), None, &tol)? else { return Err(wrong_item()) };
        let Induced::First(a2) = induce_third(None, Some(&b), Some(&c2), &tol)? else { return Err(wrong_item()) };
        let Induced::Second(b2) = induce_third(Some(&a), None, Some(&c2), &tol)? else { return Err(wrong_item()) };
        let Induced::First(a3) = induce_third(None, Some(&b), Some(&c), &tol)? else { return Err(wrong_item()) };
        let Induced::Co(c3) = induce_third(Some(&a3), Some(&b), None, &tol)? else { return Err(wrong_item()) };
        case(
            InputDigest::default().subspace(&v).subspace(&w).subspace(&z),
            json!({"dims": [v.dim(), w.dim(), z.dim()], "induced_co": c2.sign.value(), "induced_first": a3.sign.value()}),
            mismatches(&[a2.sign == a.sign, b2.sign == b.sign, c3.sign == c.sign]),
        )
    })
}

fn face_transports(q: &[Subspace; 4], tol: &grassdet_core::Tolerance) -> Result<[Sign; 4], Error> {
    let [v, w, z, y] = q;
    let zp = z.complement();
    Ok([
        transport_sign(v, w, z, tol)?,
        transport_sign(v, w, y, tol)?,
        transport_sign(v, &zp, y, tol)?,
        transport_sign(w, &zp, y, tol)?,
    ])
}

/// Five of six tetrahedron signs determine the sixth, which closes all four faces; the
/// other value breaks one.
pub fn tetrahedron(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    let cfg = real_only(cfg);
    run("orient.tetrahedron", 0.5, 22, &cfg, |g, _| {
        let n = g.int(2, cfg.cap(2, 7));
        let q = quadruple(g, n);
        let s = face_transports(&q, &tol)?;
        let (a, b, c) = (random_sign(g), random_sign(g), random_sign(g));
        let e = a * c * s[0];
        let d = b * e * s[1];
        let f = a * b * s[2];
        let full = [a, b, c, d, e, f];
        let m = g.int(0, 5);
        let mut given = full.map(Some);
        given[m] = None;
        let [v, w, z, y] = &q;
        let r = tetrahedron_check(v, w, z, y, given, &tol)?;
        let mut other = full;
        other[m] = other[m].flip();
        let broken = FACES.iter().enumerate().any(|(k, face)| {
            let [i, j, l] = *face;
            other[i] * other[j] * other[l] * s[k] != Sign::Plus
        });
        case(
            q.iter().fold(InputDigest::default(), |acc, x| acc.subspace(x)).int(m as u64),
            json!({"missing": EDGE_NAMES[m], "filled": r.signs.map(Sign::value), "transport": s.map(Sign::value)}),
            mismatches(&[
                r.filled == m,
                r.signs == full,
                r.transport == s,
                r.faces_close.iter().all(|&x| x),
                s[0] * s[1] * s[2] * s[3] == Sign::Plus,
                broken,
            ]),
        )
    })
}

/// With `W = X + V`, the sum orientation equals the one induced from `(V,Z)` and
/// `(W,Z)`.
pub fn sum_versus_induction_check(cfg: &RunConfig) -> CheckResult {
    let tol = cfg.tol;
    let cfg = real_only(cfg);
    run("orient.sum-versus-induction", 0.5, 23, &cfg, |g, _| {
        let n = g.int(2, cfg.cap(2, 8));
        let dv = g.int(0, n - 1);
        let v = g.subspace(n, dv);
        let dx = g.int(1, n - dv);
        let x = g.subspace(n, dx);
        let dz = g.int(0, n);
        let z = if g.chance(0.5) {
            let k = g.int(0, dz.min(dv));
            g.subspace_sharing(n, dz, &[(&v, k)])
        } else {
            g.subspace(n, dz)
        };
        let o = orientation(&v, &z, random_sign(g))?;
        let xs = random_sign(g);
        let r = sum_versus_induction(&x, xs, &o, &tol)?;
        case(
            InputDigest::default().subspace(&x).subspace(&v).subspace(&z),
            json!({"by_sum": r.by_sum.value(), "by_induction": r.by_induction.value()}),
            mismatches(&[r.by_sum == r.by_induction]),
        )
    })
}

// ---------------------------------------------------------------- staralg

fn elem(m: CMat) -> Result<StarElement, Error> {
    StarElement::new(Matrix::auto(m))
}

fn root(m: CMat) -> Result<SquareRootOfOne, Error> {
    SquareRootOfOne::new(elem(m)?)
}

pub const CHART_NORMS: [f64; 3] = [0.1, 0.5, 0.8];

/// `p = x + φ_q(x)` is a symmetric root, `φ_q` matches its binomial series, the chart
/// inverts, and the three norm estimates hold. `‖x‖` cycles through [`CHART_NORMS`].
pub fn chart_bounds_check(cfg: &RunConfig) -> CheckResult {
    run("staralg.chart-bounds", 1e-9, 24, cfg, |g, t| {
        let half = (cfg.cap(2, 8) / 2).max(1);
        let (a, b) = (g.int(1, half), g.int(1, half));
        let r = CHART_NORMS[(t % 3) as usize];
        let (qm, xm) = chart_point(g, a, b, r);
        let q = root(qm.clone())?;
        let x = elem(xm.clone())?;
        let phi = chart_phi_q(&q, &x)?;
        let series = sqrt_one_minus_series(&(&xm * &xm), r * r) * &qm;
        let pm = &xm + phi.data();
        let n = a + b;
        let p = root(pm.clone())?;
        let back = chart_inverse(&q, &p)?;
        let bounds = chart_bounds(&x)?;
        let excess = [bounds.one_minus_z, bounds.z_inverse, bounds.one_minus_z_inverse]
            .iter()
            .map(|(v, bound)| (v - bound).max(0.0))
            .fold(0.0, f64::max);
        let residuals = [
            opnorm(&(phi.data() - &series)),
            opnorm(&(&pm * &pm - CMat::identity(n, n))),
            opnorm(&(&pm - pm.adjoint())),
            opnorm(&(back.data() - &xm)),
            excess,
        ];
        case(
            InputDigest::default().matrix(&qm).matrix(&xm),
            json!({"norm_x": bounds.norm_x, "one_minus_z": bounds.one_minus_z, "z_inverse": bounds.z_inverse,
                   "one_minus_z_inverse": bounds.one_minus_z_inverse, "residuals": residuals}),
            residuals.iter().copied().fold(0.0, f64::max),
        )
    })
}

/// `s(p)` is unitary and intertwines: `p·s(p) = s(p)·q`.
pub fn unitary_section_check(cfg: &RunConfig) -> CheckResult {
    run("staralg.unitary-section", 1e-9, 25, cfg, |g, _| {
        let half = (cfg.cap(2, 8) / 2).max(1);
        let (a, b) = (g.int(1, half), g.int(1, half));
        let r = g.uniform(0.0, 0.85);
        let (qm, xm) = chart_point(g, a, b, r);
        let q = root(qm.clone())?;
        let pm = &xm + chart_phi_q(&q, &elem(xm.clone())?)?.data();
        let u = unitary_section(&q, &root(pm.clone())?)?;
        let n = a + b;
        let ud = u.data();
        let res = [opnorm(&(ud.adjoint() * ud - CMat::identity(n, n))), opnorm(&(&pm * ud - ud * &qm))];
        case(
            InputDigest::default().matrix(&qm).matrix(&xm),
            json!({"norm_x": r, "unitarity": res[0], "intertwining": res[1]}),
            res[0].max(res[1]),
        )
    })
}

/// `J` with `(Q − J)² = 1` from `K = 1 − Q²`, on symmetric perturbations of roots and
/// on non-normal `Q` with eigenvalues near `±1` and far outside.
pub fn lift_square_root_check(cfg: &RunConfig) -> CheckResult {
    run("staralg.lift-square-root", 1e-8, 26, cfg, |g, t| {
        let hi = cfg.cap(2, 7);
        let q = if t % 2 == 0 {
            let n = g.int(1, hi);
            let plus = g.int(0, n);
            let q0 = root_matrix(g, n, plus);
            let e = g.gaussian(n, n);
            let e = (&e + e.adjoint()) * cx(0.5);
            &q0 + &e * cx(0.2 / opnorm(&e))
        } else {
            let n = g.int(2, hi);
            let mut d = Vec::with_capacity(n);
            for i in 0..n {
                d.push(match i % 3 {
                    0 => 1.0 + g.uniform(-0.2, 0.2),
                    1 => -1.0 + g.uniform(-0.2, 0.2),
                    _ => g.uniform(2.0, 3.0),
                });
            }
            let s = g.invertible(n);
            let sinv = s.clone().try_inverse().expect("invertible");
            &s * diag(&d) * &sinv
        };
        let n = q.nrows();
        let k = CMat::identity(n, n) - &q * &q;
        let j = lift_square_root(&elem(q.clone())?, &elem(k)?)?;
        let dq = &q - j.data();
        let residual = opnorm(&(&dq * &dq - CMat::identity(n, n)));
        case(
            InputDigest::default().matrix(&q),
            json!({"size": n, "symmetric_input": t % 2 == 0, "norm_j": opnorm(j.data())}),
            residual,
        )
    })
}

/// `f(K)²(1 − K)⁻¹ − 2f(K) − K = 0` for `‖K‖ < 0.9`.
pub fn lift_function_identity(cfg: &RunConfig) -> CheckResult {
    run("staralg.lift-function-identity", 1e-9, 27, cfg, |g, _| {
        let n = g.int(1, cfg.cap(1, 7));
        let m = g.gaussian(n, n);
        let r = g.uniform(0.0, 0.9);
        let k = &m * cx(r / opnorm(&m));
        let res = lift_identity_residual(&k)?;
        case(InputDigest::default().matrix(&k), json!({"size": n, "norm_k": r}), res)
    })
}
