//! Random instances with known structure, shared by the suites and the tests.

use grassdet_core::detcalc::ExactSequence;
use grassdet_core::grassmann::{distance, span_sum};
use grassdet_core::numcore::operator_norm;
use grassdet_core::orient::Sign;
use grassdet_core::random::Sampler;
use grassdet_core::{CMat, Field, Matrix, Result, Scalar, Subspace, Tolerance};

pub fn cx(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

pub fn opnorm(m: &CMat) -> f64 {
    operator_norm(&Matrix::auto(m.clone()))
}

pub fn span(field: Field, m: CMat, tol: &Tolerance) -> Subspace {
    Subspace::span(&Matrix::from_cmat(field, m), tol)
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let n = blocks[0].nrows();
    let w: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, w);
    let mut o = 0;
    for b in blocks {
        out.view_mut((0, o), (n, b.ncols())).copy_from(*b);
        o += b.ncols();
    }
    out
}

pub fn diag(v: &[f64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| if i == j { cx(v[i]) } else { cx(0.0) })
}

/// `V = S ⊕ A`, `W = S ⊕ B` spanning the whole space, so `V ∩ W = S`.
pub struct TransversePair {
    pub v: Subspace,
    pub w: Subspace,
    pub s: Subspace,
}

/// Block sizes `(dim S, dim A, dim B)` summing to `n`.
pub fn transverse_dims(g: &mut Sampler, n: usize) -> (usize, usize, usize) {
    let k = g.int(0, n);
    let a = g.int(0, n - k);
    (k, a, n - k - a)
}

pub fn transverse_pair(field: Field, s: &CMat, a: &CMat, b: &CMat, tol: &Tolerance) -> TransversePair {
    TransversePair {
        v: span(field, hstack(&[s, a]), tol),
        w: span(field, hstack(&[s, b]), tol),
        s: span(field, s.clone(), tol),
    }
}

/// A pair with `dim V∩W = k` by construction.
pub fn pair_with_intersection(g: &mut Sampler, n: usize, tol: &Tolerance) -> (Subspace, Subspace, usize) {
    let dv = g.int(0, n);
    let dw = g.int(0, n);
    let kmin = (dv + dw).saturating_sub(n);
    let k = g.int(kmin, dv.min(dw));
    let s = g.gaussian(n, k);
    let field = g.field();
    let a = g.gaussian(n, dv - k);
    let b = g.gaussian(n, dw - k);
    let v = span(field, hstack(&[&s, &a]), tol);
    let w = span(field, hstack(&[&s, &b]), tol);
    (v, w, k)
}

/// A subspace of the same dimension within gap `0.9` of `v`.
pub fn nearby(g: &mut Sampler, v: &Subspace, tol: &Tolerance) -> Subspace {
    loop {
        let n = v.ambient_dim();
        let e = g.gaussian(n, v.dim());
        let scale = g.uniform(0.0, 0.6);
        let damp = 1.0 + g.normal().abs();
        let w = span(g.field(), v.basis() + e * cx(scale / damp), tol);
        if w.dim() == v.dim() && distance(v, &w).map(|d| d < 0.9).unwrap_or(false) {
            return w;
        }
    }
}

/// Exact sequence of `len` spaces: `Xᵢ = Kᵢ ⊕ Cᵢ` with `Cᵢ → Kᵢ₊₁` invertible, moved by
/// random changes of basis. Map ranks are at most 3, so dimensions stay at most 6.
pub fn exact_sequence(g: &mut Sampler, len: usize, tol: &Tolerance) -> Result<ExactSequence> {
    let ranks: Vec<usize> = (0..len - 1).map(|_| g.int(0, 3)).collect();
    let left = |i: usize| if i > 0 { ranks[i - 1] } else { 0 };
    let dims: Vec<usize> = (0..len)
        .map(|i| left(i) + if i < len - 1 { ranks[i] } else { 0 })
        .collect();
    let changes: Vec<CMat> = dims.iter().map(|&d| g.invertible(d)).collect();
    let mut maps = Vec::with_capacity(len - 1);
    for i in 0..len - 1 {
        let mut m = CMat::zeros(dims[i + 1], dims[i]);
        let core = g.invertible(ranks[i]);
        m.view_mut((0, left(i)), (ranks[i], ranks[i])).copy_from(&core);
        let inv = changes[i].clone().try_inverse().expect("sampled change of basis is invertible");
        maps.push(&changes[i + 1] * m * inv);
    }
    ExactSequence::new(dims, maps, tol)
}

/// A pair `(V, W)` in `Kⁿ` and a chart space `X` of dimension `codim(V+W) + 0..2`.
pub fn admissible(g: &mut Sampler, n: usize, tol: &Tolerance) -> (Subspace, Subspace, Subspace) {
    let dv = g.int(0, n - 1);
    let dw = g.int(0, n);
    let v = g.subspace(n, dv);
    let w = if g.chance(0.3) && dv > 0 {
        let k = g.int(1, dv.min(dw.max(1)));
        g.subspace_sharing(n, dw.max(k), &[(&v, k)])
    } else {
        g.subspace(n, dw)
    };
    let c = n - span_sum(&v, &w, tol).expect("common ambient").dim();
    let extra = g.int(0, 2);
    let dx = (c + extra).min(n - dv);
    let x = g.subspace(n, dx);
    (v, w, x)
}

/// Three subspaces of `Kⁿ` mixing generic and shared directions.
pub fn triple(g: &mut Sampler, n: usize) -> (Subspace, Subspace, Subspace) {
    let dv = g.int(0, n);
    let v = g.subspace(n, dv);
    let dw = g.int(0, n);
    let share_vw = g.int(0, v.dim().min(dw));
    let w = if g.chance(0.5) {
        g.subspace_sharing(n, dw, &[(&v, share_vw)])
    } else if g.chance(0.5) {
        let vp = v.complement();
        let k = g.int(0, vp.dim().min(dw));
        g.subspace_sharing(n, dw, &[(&vp, k), (&v, share_vw)])
    } else {
        g.subspace(n, dw)
    };
    let dz = g.int(0, n);
    let z = if g.chance(0.4) {
        let k = g.int(0, w.dim().min(dz));
        g.subspace_sharing(n, dz, &[(&w, k)])
    } else {
        g.subspace(n, dz)
    };
    (v, w, z)
}

pub fn quadruple(g: &mut Sampler, n: usize) -> [Subspace; 4] {
    let (v, w, z) = triple(g, n);
    let dy = g.int(0, n);
    let y = if g.chance(0.5) {
        let k = g.int(0, z.dim().min(dy));
        g.subspace_sharing(n, dy, &[(&z, k)])
    } else {
        let k = g.int(0, v.dim().min(dy));
        g.subspace_sharing(n, dy, &[(&v, k)])
    };
    [v, w, z, y]
}

pub fn random_sign(g: &mut Sampler) -> Sign {
    if g.chance(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// `U·diag(1ₐ, −1_b)·Uᴴ`.
pub fn root_matrix(g: &mut Sampler, n: usize, plus: usize) -> CMat {
    let u = g.unitary(n);
    let d: Vec<f64> = (0..n).map(|i| if i < plus { 1.0 } else { -1.0 }).collect();
    &u * diag(&d) * u.adjoint()
}

/// A root `q` of size `a + b` and a symmetric `x` anticommuting with it, `‖x‖ = r`.
pub fn chart_point(g: &mut Sampler, a: usize, b: usize, r: f64) -> (CMat, CMat) {
    let n = a + b;
    let u = g.unitary(n);
    let d: Vec<f64> = (0..n).map(|i| if i < a { 1.0 } else { -1.0 }).collect();
    let blk = g.gaussian(a, b);
    let mut x = CMat::zeros(n, n);
    x.view_mut((0, a), (a, b)).copy_from(&blk);
    x.view_mut((a, 0), (b, a)).copy_from(&blk.adjoint());
    let s = opnorm(&x);
    if s > 0.0 {
        x *= cx(r / s);
    }
    (&u * diag(&d) * u.adjoint(), &u * x * u.adjoint())
}

/// `1 − Σ_{k≥1} |binom(1/2, k)| yᵏ`, truncated once the tail bound for `‖y‖ ≤ radius`
/// drops below `1e-13`.
pub fn sqrt_one_minus_series(y: &CMat, radius: f64) -> CMat {
    let n = y.nrows();
    let mut out = CMat::identity(n, n);
    let mut coef = 1.0;
    let mut power = CMat::identity(n, n);
    let mut k = 1usize;
    loop {
        coef *= (0.5 - (k as f64 - 1.0)) / k as f64;
        power = &power * y;
        out -= &power * cx(coef.abs());
        if radius.powi(k as i32 + 1) / (1.0 - radius) < 1e-13 {
            return out;
        }
        k += 1;
    }
}
