mod common;

use common::{cx, hstack};
use grassdet_core::grassmann::*;
use grassdet_core::numcore::operator_norm;
use grassdet_core::random::Sampler;
use grassdet_core::{CMat, Error, Field, Matrix, Subspace, Tolerance};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn norm(m: &CMat) -> f64 {
    common::raw_singular_values(m).first().copied().unwrap_or(0.0)
}

fn span(field: Field, m: CMat) -> Subspace {
    Subspace::span(&Matrix::from_cmat(field, m), &tol())
}

fn proj(s: &Subspace) -> CMat {
    projector(s).into_data()
}

fn line(phi: f64) -> Subspace {
    span(Field::Real, CMat::from_column_slice(2, 1, &[cx(phi.cos()), cx(phi.sin())]))
}

/// `V = S ⊕ A`, `W = S ⊕ B` with `dim S + dim A + dim B = n`, so that `V + W` is the
/// whole space and `V ∩ W = S` by construction.
struct Transverse {
    v: Subspace,
    w: Subspace,
    s: Subspace,
}

fn transverse(g: &mut Sampler, n: usize) -> (usize, usize, usize) {
    let k = g.int(0, n);
    let a = g.int(0, n - k);
    (k, a, n - k - a)
}

fn build(field: Field, s: &CMat, a: &CMat, b: &CMat) -> Transverse {
    Transverse {
        v: span(field, hstack(&[s, a])),
        w: span(field, hstack(&[s, b])),
        s: span(field, s.clone()),
    }
}

#[test]
fn projector_examples() {
    let p = proj(&Subspace::coordinate(2, &[0]));
    assert_eq!(p, CMat::from_row_slice(2, 2, &[cx(1.0), cx(0.0), cx(0.0), cx(0.0)]));
    assert_eq!(proj(&Subspace::whole(3, Field::Real)), CMat::identity(3, 3));
    let p = proj(&line(std::f64::consts::FRAC_PI_4));
    for z in p.iter() {
        assert!((z - cx(0.5)).norm() < 1e-12);
    }
}

#[test]
fn projectors_are_symmetric_idempotents() {
    let mut g = Sampler::new(1, Field::Complex);
    for _ in 0..50 {
        let n = g.int(1, 8);
        let d = g.int(0, n);
        let s = g.subspace(n, d);
        let p = proj(&s);
        assert!(norm(&(&p * &p - &p)) < 1e-10);
        assert!(norm(&(&p - p.adjoint())) < 1e-10);
        assert_eq!(grassdet_core::numcore::rank(&projector(&s), &tol()), d);
    }
}

#[test]
fn distance_examples() {
    let v = Subspace::coordinate(2, &[0]);
    assert_eq!(distance(&v, &v).unwrap(), 0.0);
    assert!((distance(&v, &Subspace::coordinate(2, &[1])).unwrap() - 1.0).abs() < 1e-15);
    assert!((distance(&v, &line(0.3)).unwrap() - 0.3f64.sin()).abs() < 1e-12);
    assert!(matches!(
        distance(&v, &Subspace::coordinate(3, &[0])),
        Err(Error::AmbientMismatch { left: 2, right: 3 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(seed in 0u64..100_000, n in 1usize..7) {
        let mut g = Sampler::new(seed, Field::Complex);
        let dims = [g.int(0, n), g.int(0, n), g.int(0, n)];
        let [a, b, c] = dims.map(|d| g.subspace(n, d));
        let (ab, bc, ac) = (distance(&a, &b).unwrap(), distance(&b, &c).unwrap(), distance(&a, &c).unwrap());
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(distance(&a, &a).unwrap() < 1e-12);
        if a.dim() == b.dim() {
            prop_assert!(ab <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn power_difference_identity(seed in 0u64..100_000, n in 2usize..7) {
        let mut g = Sampler::new(seed, Field::Real);
        let (k, a, _) = transverse(&mut g, n);
        let s = g.gaussian(n, k);
        let v = span(Field::Real, hstack(&[&s, &g.gaussian(n, a)]));
        let dw = g.int(k, n);
        let w = span(Field::Real, hstack(&[&s, &g.gaussian(n, dw - k)]));
        let pvw = proj(&v) * proj(&w);
        let p0 = proj(&intersection(&v, &w, &tol()).unwrap());
        let d = &pvw - &p0;
        let mut lhs = CMat::identity(n, n);
        let mut rhs = CMat::identity(n, n);
        for _ in 1..=5 {
            lhs = &lhs * &pvw;
            rhs = &rhs * &d;
            prop_assert!(norm(&(&lhs - &p0 - &rhs)) < 1e-9);
        }
        prop_assert!(norm(&d) < 1.0);
    }
}

#[test]
fn chart_examples() {
    let v = Subspace::coordinate(2, &[0]);
    let t = 0.5f64;
    let w = span(Field::Real, CMat::from_column_slice(2, 1, &[cx(1.0), cx(t)]));
    let p = chart_to(&v, &w, &tol()).unwrap();
    assert!((p.operator.get(0, 0) - cx(0.5)).norm() < 1e-12);
    let q = GraphChartPoint::new(v.clone(), Matrix::real(1, 1, &[1.0]).unwrap()).unwrap();
    assert!(distance(&chart_from(&q), &line(std::f64::consts::FRAC_PI_4)).unwrap() < 1e-12);
    let z = GraphChartPoint::new(v.clone(), Matrix::zeros(1, 1, Field::Real)).unwrap();
    assert!(distance(&chart_from(&z), &v).unwrap() < 1e-15);
    assert!(chart_to(&v, &Subspace::coordinate(2, &[1]), &tol()).is_err());
}

/// A subspace within gap distance `< 0.9` of `v`.
fn nearby(g: &mut Sampler, v: &Subspace) -> Subspace {
    loop {
        let n = v.ambient_dim();
        let e = g.gaussian(n, v.dim());
        let scale = g.uniform(0.0, 0.6);
        let w = span(g.field(), v.basis() + e * cx(scale / (1.0 + norm(&g.gaussian(1, 1)))));
        if w.dim() == v.dim() && distance(v, &w).unwrap() < 0.9 {
            return w;
        }
    }
}

#[test]
fn chart_round_trip() {
    for field in [Field::Real, Field::Complex] {
        let mut g = Sampler::new(2, field);
        for _ in 0..100 {
            let n = g.int(1, 8);
            let d = g.int(0, n);
            let v = g.subspace(n, d);
            let w = nearby(&mut g, &v);
            let p = chart_to(&v, &w, &tol()).unwrap();
            assert!(distance(&chart_from(&p), &w).unwrap() < 1e-9);
        }
    }
}

#[test]
fn chart_transitions() {
    let mut g = Sampler::new(3, Field::Real);
    for _ in 0..100 {
        let n = 6;
        let d = g.int(1, 5);
        let v = g.subspace(n, d);
        let w = nearby(&mut g, &v);
        let a = Matrix::from_cmat(Field::Real, g.gaussian(n - d, d) * cx(0.1));
        // identity on A
        let same = chart_transition(&v, &v, &a, &tol()).unwrap();
        assert!(norm(&(same.data() - a.data())) < 1e-10);
        // base point
        let zero = Matrix::zeros(n - d, d, Field::Real);
        let t0 = chart_transition(&v, &w, &zero, &tol()).unwrap();
        assert!(norm(&(t0.data() - chart_to(&w, &v, &tol()).unwrap().operator.data())) < 1e-9);
        // composed charts
        let point = chart_from(&GraphChartPoint::new(v.clone(), a.clone()).unwrap());
        if distance(&w, &point).unwrap() < 0.95 {
            let t = chart_transition(&v, &w, &a, &tol()).unwrap();
            let oracle = chart_to(&w, &point, &tol()).unwrap();
            assert!(norm(&(t.data() - oracle.operator.data())) < 1e-9);
        }
    }
}

#[test]
fn transverse_examples() {
    let v = Subspace::coordinate(3, &[0, 1]);
    let w = Subspace::coordinate(3, &[1, 2]);
    let i = intersect_transverse(&v, &w, &tol()).unwrap();
    assert!(distance(&i, &Subspace::coordinate(3, &[1])).unwrap() < 1e-12);
    let h = Subspace::whole(3, Field::Real);
    assert!(distance(&intersect_transverse(&h, &h, &tol()).unwrap(), &h).unwrap() < 1e-12);
}

#[test]
fn random_transverse_pair_in_r8() {
    let mut g = Sampler::new(4, Field::Real);
    for _ in 0..20 {
        let (s, a, b) = (g.gaussian(8, 2), g.gaussian(8, 3), g.gaussian(8, 3));
        let t = build(Field::Real, &s, &a, &b);
        assert_eq!((t.v.dim(), t.w.dim()), (5, 5));
        let i = intersect_transverse(&t.v, &t.w, &tol()).unwrap();
        assert_eq!(i.dim(), 2);
        assert!(distance(&i, &t.s).unwrap() < 1e-9);
    }
}

#[test]
fn transverse_formula_over_a_perturbed_base() {
    for field in [Field::Real, Field::Complex] {
        let mut g = Sampler::new(5, field);
        for _ in 0..200 {
            let n = g.int(2, 9);
            let (k, a, b) = transverse(&mut g, n);
            let (s, am, bm) = (g.gaussian(n, k), g.gaussian(n, a), g.gaussian(n, b));
            let base = build(field, &s, &am, &bm);
            let eps = g.uniform(0.0, 0.05);
            let moved = build(
                field,
                &(&s + g.gaussian(n, k) * cx(eps)),
                &(&am + g.gaussian(n, a) * cx(eps)),
                &(&bm + g.gaussian(n, b) * cx(eps)),
            );
            let via_formula = intersect_transverse_near(&base.v, &base.w, &moved.v, &moved.w, &tol()).unwrap();
            assert_eq!(via_formula.dim(), k);
            assert!(distance(&via_formula, &moved.s).unwrap() < 1e-8);
            let via_power = intersect_power(&moved.v, &moved.w, &tol()).unwrap();
            assert!(distance(&via_power, &moved.s).unwrap() < 1e-8);
        }
    }
}

#[test]
fn transversality_is_required() {
    let v = Subspace::coordinate(4, &[0, 1]);
    let w = Subspace::coordinate(4, &[1, 2]);
    assert!(matches!(intersect_transverse(&v, &w, &tol()), Err(Error::Precondition(_))));
}

#[test]
fn power_iteration_examples() {
    let e1 = Subspace::coordinate(2, &[0]);
    let e2 = Subspace::coordinate(2, &[1]);
    assert_eq!(intersect_power(&e1, &e2, &tol()).unwrap().dim(), 0);
    let m = power_iterate(&e1, &e2, 1).unwrap();
    assert!(norm(&m) == 0.0);
    let p = power_iterate(&e1, &e1, 1).unwrap();
    assert!(norm(&(p - proj(&e1))) < 1e-15);
    assert_eq!(intersect_power(&line(0.2), &e1, &tol()).unwrap().dim(), 0);
}

#[test]
fn power_iteration_error_on_two_lines() {
    for phi in [0.2f64, 0.5, 1.0] {
        let theta = phi.cos();
        let (v, w) = (Subspace::coordinate(2, &[0]), line(phi));
        // no intersection, so the error is ‖(P_V P_W)ⁿ‖ = cos^{2n−1}φ
        let contraction = operator_norm(&Matrix::auto(power_iterate(&v, &w, 1).unwrap()));
        assert!((contraction - theta).abs() < 1e-12);
        for n in 1..=60 {
            let err = norm(&power_iterate(&v, &w, n).unwrap());
            let closed = theta.powi(2 * n as i32 - 1);
            assert!((err - closed).abs() < 1e-12, "φ={phi} n={n}");
            assert!(err <= theta.powi(n as i32) + 1e-9);
        }
        assert_eq!(intersect_power(&v, &w, &tol()).unwrap().dim(), 0);
    }
}

#[test]
fn power_intersection_projector_is_clean() {
    let mut g = Sampler::new(6, Field::Complex);
    for _ in 0..50 {
        let n = g.int(2, 8);
        let (k, a, b) = transverse(&mut g, n);
        let t = build(Field::Complex, &g.gaussian(n, k), &g.gaussian(n, a), &g.gaussian(n, b));
        let p = proj(&intersect_power(&t.v, &t.w, &tol()).unwrap());
        assert!(norm(&(&p * &p - &p)) < 10.0 * tol().convergence_tol);
        assert!(norm(&(&p - proj(&t.s))) < 1e-8);
    }
}

#[test]
fn sum_examples() {
    let e1 = Subspace::coordinate(3, &[0]);
    let e3 = Subspace::coordinate(3, &[2]);
    let s = sum_finite(&e3, &e1, &tol()).unwrap();
    assert!(distance(&s, &Subspace::coordinate(3, &[0, 2])).unwrap() < 1e-15);
    let mut g = Sampler::new(7, Field::Real);
    for _ in 0..20 {
        let (x, v) = (g.gaussian(8, 2), g.gaussian(8, 3));
        let s = sum_finite(&span(Field::Real, x.clone()), &span(Field::Real, v.clone()), &tol()).unwrap();
        assert_eq!(s.dim(), 5);
        let oracle = grassdet_core::numcore::orthonormalize(&Matrix::auto(hstack(&[&x, &v])), &tol());
        assert!(norm(&(proj(&s) - oracle.projector())) < 1e-10);
    }
}

#[test]
fn image_and_complement() {
    let v = Subspace::coordinate(3, &[0]);
    let c = v.complement();
    assert_eq!(c.dim(), 2);
    assert!(norm(&(proj(&v) + proj(&c) - CMat::identity(3, 3))) < 1e-15);
    let zero_map = CMat::zeros(3, 3);
    assert_eq!(v.image(&zero_map, &tol()).unwrap().dim(), 0);
}
