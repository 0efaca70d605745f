mod common;

use common::*;
use grassdet_core::bundles::*;
use grassdet_core::detcalc::{restriction_compat, BlockSplit, DetElement};
use grassdet_core::fredholm::{fredholm_map, FredholmPair};
use grassdet_core::grassmann::{intersection, span_sum};
use grassdet_core::random::Sampler;
use grassdet_core::{CMat, Field, Matrix, Subspace, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Random pair with an admissible chart space of dimension `codim(V+W) + extra`.
fn admissible(g: &mut Sampler, n: usize) -> (Subspace, Subspace, Subspace) {
    let dv = g.int(0, n - 1);
    let dw = g.int(0, n);
    let v = g.subspace(n, dv);
    let w = if g.chance(0.3) && dv > 0 {
        let k = g.int(1, dv.min(dw.max(1)));
        g.subspace_sharing(n, dw.max(k), &[(&v, k)])
    } else {
        g.subspace(n, dw)
    };
    let c = n - span_sum(&v, &w, &tol()).unwrap().dim();
    let room = n - dv;
    let dx = (c + g.int(0, 2)).min(room);
    (v, w, g.subspace(n, dx))
}

#[test]
fn nested_fp_transition_matches_direct_ratio() {
    let mut checked = 0;
    for field in [Field::Real, Field::Complex] {
        for trial in 0..200 {
            let mut g = Sampler::for_trial(101, trial, field);
            let n = g.int(3, 9);
            let (v, w, x) = admissible(&mut g, n);
            let pair = FredholmPair::new(v.clone(), w).unwrap();
            let small = FpChart::new(x.clone());
            if small.check(&pair, &tol()).is_err() {
                continue;
            }
            let room = n - v.dim() - x.dim();
            if room == 0 {
                continue;
            }
            let de = g.int(1, room);
            let extra = g.subspace(n, de);
            let big = FpChart::new(span_sum(&x, &extra, &tol()).unwrap());
            if big.check(&pair, &tol()).is_err() {
                continue;
            }
            let direct = fp_transition(&small, &big, &pair, &tol()).unwrap().scale;
            let nested = fp_transition_nested(&small, &big, &pair, &tol()).unwrap().scale;
            assert!(close(direct, nested, 1e-8), "{direct} vs {nested}");
            checked += 1;
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn fp_cocycle_through_refinements() {
    let mut checked = 0;
    for trial in 0..300 {
        let mut g = Sampler::for_trial(102, trial, Field::Real);
        let n = 12;
        let (v, w, x1) = admissible(&mut g, n);
        let pair = FredholmPair::new(v, w).unwrap();
        let c = n - span_sum(&pair.v, &pair.w, &tol()).unwrap().dim();
        let charts: Vec<FpChart> = [x1.dim(), c, c + 1]
            .iter()
            .map(|&d| FpChart::new(g.subspace(n, d.max(c))))
            .collect();
        if charts.iter().any(|ch| ch.check(&pair, &tol()).is_err()) {
            continue;
        }
        let t = |a: &FpChart, b: &FpChart| fp_transition_via_sum(a, b, &pair, &tol()).map(|l| l.scale);
        let (Ok(a), Ok(b), Ok(ab)) = (t(&charts[0], &charts[1]), t(&charts[1], &charts[2]), t(&charts[0], &charts[2]))
        else {
            continue;
        };
        assert!(close(a * b, ab, 1e-8), "{} vs {}", a * b, ab);
        checked += 1;
    }
    assert!(checked >= 100, "{checked}");
}

#[test]
fn complement_chart_at_the_pair_is_valid() {
    let mut g = Sampler::new(7, Field::Real);
    let v = g.subspace(6, 2);
    let w = g.subspace(6, 2);
    let pair = FredholmPair::new(v.clone(), w.clone()).unwrap();
    let x = span_sum(&v, &w, &tol()).unwrap().complement();
    let iso = fp_chart_map(&FpChart::new(x), &pair, &tol()).unwrap();
    assert!(iso.scale.norm() > 1e-6);
}

#[test]
fn transverse_complementary_pair_with_zero_chart() {
    let v = Subspace::coordinate(3, &[0]);
    let w = Subspace::coordinate(3, &[1, 2]);
    let pair = FredholmPair::new(v, w).unwrap();
    let iso = fp_chart_map(&FpChart::new(Subspace::zero(3, Field::Real)), &pair, &tol()).unwrap();
    assert!((iso.scale.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn transposition_ladder_and_independence() {
    for trial in 0..200 {
        let mut g = Sampler::for_trial(103, trial, Field::Complex);
        let n = g.int(4, 9);
        let dv = g.int(1, n / 2);
        let dw = g.int(1, n / 2);
        let v = g.subspace(n, dv);
        let w = g.subspace(n, dw);
        let pair = FredholmPair::new(v.clone(), w.clone()).unwrap();
        let c = n - dv - dw;
        let x1 = FpChart::new(g.subspace(n, c));
        let x2 = FpChart::new(g.subspace(n, c));
        let r1 = transpose_lift(&x1, &pair, &tol()).unwrap();
        let r2 = transpose_lift(&x2, &pair, &tol()).unwrap();
        assert!(r1.ladder_residual < 1e-9, "{}", r1.ladder_residual);
        assert!(close(r1.transposition, r2.transposition, 1e-8), "{} {}", r1.transposition, r2.transposition);
    }
}

#[test]
fn transposition_of_equal_spaces_is_identity() {
    let mut g = Sampler::new(3, Field::Real);
    let v = g.subspace(5, 2);
    let pair = FredholmPair::new(v.clone(), v.clone()).unwrap();
    let x = FpChart::new(v.complement());
    let r = transpose_lift(&x, &pair, &tol()).unwrap();
    assert!(close(r.lift.scale, cx(1.0), 1e-12));
}

#[test]
fn fr_nested_and_cocycle() {
    let mut checked = 0;
    for trial in 0..200 {
        let mut g = Sampler::for_trial(104, trial, Field::Complex);
        let (m, n) = (g.int(2, 7), g.int(2, 7));
        let t = fredholm_map(&Matrix::from_cmat(Field::Complex, g.mixed_rank(m, n)), &tol());
        let c = t.cokernel().dim();
        let charts: Vec<FrChart> = (0..3)
            .map(|_| {
                let d = (c + g.int(0, 2)).min(m);
                FrChart::Transversal(g.subspace(m, d))
            })
            .collect();
        let s = |a: &FrChart, b: &FrChart| fr_transition_via_sum(&t, a, b, &tol()).unwrap().scale;
        let d = |a: &FrChart, b: &FrChart| fr_transition(&t, a, b, &tol()).unwrap().scale;
        let (a, b, ab) = (s(&charts[0], &charts[1]), s(&charts[1], &charts[2]), s(&charts[0], &charts[2]));
        assert!(close(a * b, ab, 1e-8));
        assert!(close(a, d(&charts[0], &charts[1]), 1e-8), "{a} vs {}", d(&charts[0], &charts[1]));
        checked += 1;
    }
    assert_eq!(checked, 200);
}

#[test]
fn spectral_charts_nest_like_restriction() {
    for trial in 0..100 {
        let mut g = Sampler::for_trial(105, trial, Field::Real);
        let n = 6;
        let t = fredholm_map(&Matrix::from_cmat(Field::Real, g.rank_deficient(n, n, 4)), &tol());
        let s = grassdet_core::numcore::singular_values(t.matrix());
        let e1 = (s[3] * s[3] + s[2] * s[2]) / 2.0;
        let e0 = s[3] * s[3] / 2.0;
        let nested = fr_transition_nested(&t, &FrChart::Spectral(e0), &FrChart::Spectral(e1), &tol())
            .unwrap()
            .scale;
        let direct = fr_transition(&t, &FrChart::Spectral(e0), &FrChart::Spectral(e1), &tol()).unwrap().scale;
        assert!(close(nested, direct, 1e-9));
        // a random transversal chart reached through the common refinement
        let x = FrChart::Transversal(g.subspace(n, 3));
        let via = fr_transition_via_sum(&t, &FrChart::Spectral(e0), &x, &tol()).unwrap().scale;
        let dir = fr_transition(&t, &FrChart::Spectral(e0), &x, &tol()).unwrap().scale;
        assert!(close(via, dir, 1e-8));
    }
}

#[test]
fn invertible_map_charts() {
    let mut g = Sampler::new(4, Field::Complex);
    let a = g.invertible(4);
    let t = fredholm_map(&Matrix::from_cmat(Field::Complex, a.clone()), &tol());
    let zero = fr_chart_map(&t, &FrChart::Transversal(Subspace::zero(4, Field::Complex)), &tol()).unwrap();
    assert!(close(zero.scale, cx(1.0), 1e-12));
    let whole = fr_chart_map(&t, &FrChart::Transversal(Subspace::whole(4, Field::Complex)), &tol()).unwrap();
    assert!(close(whole.scale * oracle_det(&a), cx(1.0), 1e-10));
}

#[test]
fn sum_lift_two_ways() {
    let mut checked = 0;
    for field in [Field::Real, Field::Complex] {
        for trial in 0..200 {
            let mut g = Sampler::for_trial(106, trial, field);
            let n = g.int(4, 10);
            let dx = g.int(0, 2);
            let dv = g.int(0, n - dx);
            let dw = g.int(0, n);
            let (x, v, w) = (g.subspace(n, dx), g.subspace(n, dv), g.subspace(n, dw));
            let r = sum_lift(&x, &FredholmPair::new(v, w).unwrap(), &tol()).unwrap();
            assert!(r.rel_diff < 1e-9, "{r:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 400);
}

#[test]
fn sum_lift_small_example() {
    let x = Subspace::coordinate(3, &[1]);
    let v = Subspace::coordinate(3, &[0]);
    let pair = FredholmPair::new(v.clone(), v).unwrap();
    let r = sum_lift(&x, &pair, &tol()).unwrap();
    assert!(r.rel_diff < 1e-12);
    let z = sum_lift(&Subspace::zero(3, Field::Real), &pair, &tol()).unwrap();
    assert!(close(z.direct, cx(1.0), 1e-12));
}

#[test]
fn sum_is_associative() {
    for trial in 0..200 {
        let mut g = Sampler::for_trial(107, trial, Field::Real);
        let n = g.int(4, 9);
        let (dx, dy) = (g.int(0, 2), g.int(0, 2));
        let dv = g.int(0, n - dx - dy);
        let dw = g.int(0, n);
        let (x, y, v, w) = (g.subspace(n, dx), g.subspace(n, dy), g.subspace(n, dv), g.subspace(n, dw));
        let r = sum_assoc_check(&x, &y, &FredholmPair::new(v, w).unwrap(), &tol()).unwrap();
        assert!(r.rel_diff < 1e-8, "{r:?}");
        let dz = g.int(0, 2);
        let z = g.subspace(n, dz);
        if let Ok((l, rr)) = wedge_square_check(&x, &y, &z, &tol()) {
            assert!(close(l, rr, 1e-10));
        }
    }
}

#[test]
fn gl_actions_group_law() {
    for trial in 0..100 {
        let mut g = Sampler::for_trial(108, trial, Field::Complex);
        let (m, n) = (g.int(1, 6), g.int(1, 6));
        let t = fredholm_map(&Matrix::from_cmat(Field::Complex, g.mixed_rank(m, n)), &tol());
        let e = DetElement::new(grassdet_core::detcalc::map_line(&t), cx(1.5));
        let g1 = Matrix::from_cmat(Field::Complex, g.invertible(m));
        let g2 = Matrix::from_cmat(Field::Complex, g.invertible(m));
        let (t1, e1) = gl_left_action(&g1, &t, &e, &tol()).unwrap();
        let (_, e2) = gl_left_action(&g2, &t1, &e1, &tol()).unwrap();
        let (_, e12) = gl_left_action(&g2.mul(&g1).unwrap(), &t, &e, &tol()).unwrap();
        assert!(close(e2.coeff, e12.coeff, 1e-9));
        let h1 = Matrix::from_cmat(Field::Complex, g.invertible(n));
        let h2 = Matrix::from_cmat(Field::Complex, g.invertible(n));
        let (s1, f1) = gl_right_action(&h1, &t, &e, &tol()).unwrap();
        let (_, f2) = gl_right_action(&h2, &s1, &f1, &tol()).unwrap();
        let (_, f12) = gl_right_action(&h1.mul(&h2).unwrap(), &t, &e, &tol()).unwrap();
        assert!(close(f2.coeff, f12.coeff, 1e-9), "{} {}", f2.coeff, f12.coeff);
        let (_, id) = gl_left_action(&Matrix::identity(m, Field::Complex), &t, &e, &tol()).unwrap();
        assert!(close(id.coeff, e.coeff, 1e-12));
    }
}

#[test]
fn scalar_left_action_on_cokernel() {
    let t = fredholm_map(&Matrix::real(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap(), &tol());
    let e = DetElement::new(grassdet_core::detcalc::map_line(&t), cx(1.0));
    let two = Matrix::real(3, 3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
    let (_, out) = gl_left_action(&two, &t, &e, &tol()).unwrap();
    assert!(close(out.coeff, cx(0.5), 1e-12));
}

#[test]
fn adjoint_lift_is_involutive() {
    for trial in 0..100 {
        let mut g = Sampler::for_trial(109, trial, Field::Complex);
        let t = fredholm_map(&Matrix::from_cmat(Field::Complex, g.mixed_rank(5, 3)), &tol());
        let e = DetElement::new(grassdet_core::detcalc::map_line(&t), g.scalar());
        let (ta, ea) = adjoint_lift(&t, &e, &tol()).unwrap();
        let (_, eb) = adjoint_lift(&ta, &ea, &tol()).unwrap();
        assert!(close(eb.coeff, e.coeff, 1e-12));
    }
}

#[test]
fn selfadjoint_section_ignores_kernel_frame() {
    for trial in 0..50 {
        let mut g = Sampler::for_trial(110, trial, Field::Real);
        let b = g.gaussian(5, 3);
        let h = &b * b.adjoint();
        let t = fredholm_map(&Matrix::from_cmat(Field::Real, h), &tol());
        assert_eq!(t.kernel().dim(), 2);
        let k = t.kernel().basis();
        let rot = g.unitary(2);
        let a = selfadjoint_coefficient(&t, k).unwrap();
        let b2 = selfadjoint_coefficient(&t, &(k * rot)).unwrap();
        assert!(close(a, b2, 1e-12));
        assert!(!section_selfadjoint(&t).unwrap().is_zero());
    }
    let t = fredholm_map(&Matrix::real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap(), &tol());
    assert!(section_selfadjoint(&t).is_err());
}

#[test]
fn section_threshold_probe() {
    let probe = |s: f64| {
        let t = fredholm_map(&Matrix::real(2, 2, &[1.0, 0.0, 0.0, s]).unwrap(), &tol());
        section_s(&t).is_zero()
    };
    assert!(probe(1e-11));
    assert!(!probe(1e-9));
}

#[test]
fn fp_action_group_law_and_unitary_fixing() {
    for trial in 0..100 {
        let mut g = Sampler::for_trial(111, trial, Field::Real);
        let n = g.int(3, 7);
        let (dv, dw) = (g.int(0, n), g.int(0, n));
        let v = g.subspace(n, dv);
        let w = g.subspace(n, dw);
        let pair = FredholmPair::new(v, w).unwrap();
        let e = DetElement::new(pair_line(&pair, &tol()).unwrap(), cx(1.0));
        let l1 = Matrix::from_cmat(Field::Real, g.invertible(n));
        let l2 = Matrix::from_cmat(Field::Real, g.invertible(n));
        let (p1, e1) = gl_action_fp(&l1, &pair, &e, &tol()).unwrap();
        let (_, e2) = gl_action_fp(&l2, &p1, &e1, &tol()).unwrap();
        let (_, e12) = gl_action_fp(&l2.mul(&l1).unwrap(), &pair, &e, &tol()).unwrap();
        assert!(close(e2.coeff, e12.coeff, 1e-9));
    }
    // reflection fixing both coordinate spaces
    let v = Subspace::coordinate(3, &[0, 1]);
    let w = Subspace::coordinate(3, &[1]);
    let pair = FredholmPair::new(v, w).unwrap();
    let e = DetElement::new(pair_line(&pair, &tol()).unwrap(), cx(1.0));
    let l = Matrix::real(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
    let (_, out) = gl_action_fp(&l, &pair, &e, &tol()).unwrap();
    // -1 on V∩W = span{e1}, -1 on (V+W)⊥ = span{e2}
    assert!(close(out.coeff, cx(1.0), 1e-12));
}

#[test]
fn grc_dims_match_projector_oracle() {
    for trial in 0..100 {
        let mut g = Sampler::for_trial(112, trial, Field::Real);
        let n = g.int(2, 8);
        let (dw, dv) = (g.int(0, n), g.int(0, n));
        let w = g.subspace(n, dw);
        let v = g.subspace(n, dv);
        let l = grc_detline(&w, &v, &tol()).unwrap();
        let pw = w.basis() * w.basis().adjoint();
        let pv = v.basis() * v.basis().adjoint();
        let id = CMat::identity(n, n);
        // dim W∩V⊥ = nullity of [I−P_W; P_V] restricted, via singular values
        let a = oracle_rank(&hstack(&[&(&id - &pw), &pv]).adjoint(), 1e-10, 1.0);
        let b = oracle_rank(&hstack(&[&pw, &(&id - &pv)]).adjoint(), 1e-10, 1.0);
        assert_eq!(l.dims(), (n - a, n - b));
    }
    let mut g = Sampler::new(1, Field::Real);
    let v = g.subspace(5, 2);
    assert_eq!(grc_detline(&v, &v, &tol()).unwrap().dims(), (0, 0));
    assert_eq!(grc_detline(&v.complement(), &v, &tol()).unwrap().dims(), (3, 2));
    let _ = intersection;
    let _ = restriction_compat;
    let _ = BlockSplit { x0: 0, y0: 0 };
}
