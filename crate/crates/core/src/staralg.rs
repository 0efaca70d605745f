//! Square matrices as a *-algebra under the conjugate transpose: symmetric square
//! roots of one, the graph chart around such a root, the local unitary section, and
//! lifting of approximate square roots of one.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{precondition, shape, Error, Result};
use crate::numcore::{c, clean, hermitian_eigen, hermitian_function, norm2, solve, sqrt, svd, CMat, Field, Matrix, Scalar};

/// Residual allowed in the defining identities of inputs.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Radius of the chart domain: `‖x‖ < √3/2`.
pub const CHART_RADIUS: f64 = 0.866_025_403_784_438_6;

/// Minimum distance of an eigenvalue from the boundary of `{|z²−1| < 1}`.
pub const SPLIT_GAP: f64 = 1e-8;

/// A square matrix with the conjugate transpose as involution.
#[derive(Clone, Debug, PartialEq)]
pub struct StarElement {
    matrix: Matrix,
}

impl StarElement {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(shape(format!("{}×{} is not square", matrix.rows(), matrix.cols())));
        }
        Ok(StarElement { matrix })
    }

    pub(crate) fn from_cmat(field: Field, m: CMat) -> Self {
        StarElement {
            matrix: Matrix::from_cmat(field, clean(field, m)),
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        StarElement {
            matrix: Matrix::identity(n, field),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn data(&self) -> &CMat {
        self.matrix.data()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn field(&self) -> Field {
        self.matrix.field()
    }

    pub fn adjoint(&self) -> StarElement {
        StarElement {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Operator norm.
    pub fn norm(&self) -> f64 {
        norm2(self.data())
    }

    /// `‖a − aᴴ‖`.
    pub fn symmetry_residual(&self) -> f64 {
        norm2(&(self.data() - self.data().adjoint()))
    }
}

/// `q` with `qᴴ = q` and `q² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareRootOfOne {
    q: StarElement,
}

impl SquareRootOfOne {
    pub fn new(q: StarElement) -> Result<Self> {
        let n = q.dim();
        if q.symmetry_residual() > IDENTITY_TOL {
            return Err(precondition("q is not symmetric"));
        }
        let sq = q.data() * q.data() - CMat::identity(n, n);
        if norm2(&sq) > IDENTITY_TOL {
            return Err(precondition("q² differs from the identity"));
        }
        Ok(SquareRootOfOne { q })
    }

    /// `2p − 1` for an orthogonal projector `p`.
    pub fn from_projector(p: &StarElement) -> Result<Self> {
        let n = p.dim();
        let q = p.data() * c(2.0) - CMat::identity(n, n);
        SquareRootOfOne::new(StarElement::from_cmat(p.field(), q))
    }

    pub fn element(&self) -> &StarElement {
        &self.q
    }

    pub fn data(&self) -> &CMat {
        self.q.data()
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// `(q + 1)/2`.
    pub fn projector(&self) -> CMat {
        let n = self.dim();
        (self.data() + CMat::identity(n, n)) * c(0.5)
    }
}

fn same_size(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(shape(format!("sizes {a} and {b} differ")));
    }
    Ok(())
}

fn check_symmetric(a: &StarElement, what: &str) -> Result<()> {
    if a.symmetry_residual() > IDENTITY_TOL * a.norm().max(1.0) {
        return Err(precondition(format!("{what} is not symmetric")));
    }
    Ok(())
}

/// `((a − qaq)/2, (a + qaq)/2)`: the parts of `a` anticommuting and commuting with `q`.
pub fn symmetric_split(a: &StarElement, q: &SquareRootOfOne) -> Result<(StarElement, StarElement)> {
    same_size(a.dim(), q.dim())?;
    check_symmetric(a, "a")?;
    let field = a.field().join(q.element().field());
    let qaq = q.data() * a.data() * q.data();
    let anti = (a.data() - &qaq) * c(0.5);
    let comm = (a.data() + &qaq) * c(0.5);
    Ok((StarElement::from_cmat(field, anti), StarElement::from_cmat(field, comm)))
}

/// `z = (1 − x²)^{1/2}` for symmetric `x` with `‖x‖ < 1`.
fn chart_root(x: &CMat) -> CMat {
    hermitian_function(x, |t| sqrt((1.0 - t * t).max(0.0)))
}

/// `φ_q(x) = (1 − x²)^{1/2} q` on symmetric `x` anticommuting with `q`, `‖x‖ < √3/2`.
pub fn chart_phi_q(q: &SquareRootOfOne, x: &StarElement) -> Result<StarElement> {
    same_size(x.dim(), q.dim())?;
    check_symmetric(x, "x")?;
    let anti = x.data() * q.data() + q.data() * x.data();
    if norm2(&anti) > IDENTITY_TOL * x.norm().max(1.0) {
        return Err(precondition("x does not anticommute with q"));
    }
    let nx = x.norm();
    if nx >= CHART_RADIUS {
        return Err(precondition(format!("‖x‖ = {nx} is not below √3/2")));
    }
    let field = x.field().join(q.element().field());
    Ok(StarElement::from_cmat(field, chart_root(x.data()) * q.data()))
}

/// Norms in the chart estimates together with their upper bounds in terms of `‖x‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartBounds {
    pub norm_x: f64,
    /// `‖1 − z‖` and `1 − (1 − ‖x‖²)^{1/2}`.
    pub one_minus_z: (f64, f64),
    /// `‖z⁻¹‖` and `(1 − ‖x‖²)^{−1/2}`.
    pub z_inverse: (f64, f64),
    /// `‖1 − z⁻¹‖` and `(1 − ‖x‖²)^{−1/2} − 1`.
    pub one_minus_z_inverse: (f64, f64),
}

impl ChartBounds {
    pub fn hold(&self, slack: f64) -> bool {
        [self.one_minus_z, self.z_inverse, self.one_minus_z_inverse]
            .iter()
            .all(|(v, b)| *v <= b + slack)
    }
}

pub fn chart_bounds(x: &StarElement) -> Result<ChartBounds> {
    check_symmetric(x, "x")?;
    let nx = x.norm();
    if nx >= 1.0 {
        return Err(precondition("‖x‖ must be below 1"));
    }
    let n = x.dim();
    let id = CMat::identity(n, n);
    let z = chart_root(x.data());
    let zi = hermitian_function(x.data(), |t| 1.0 / sqrt(1.0 - t * t));
    let r = sqrt(1.0 - nx * nx);
    Ok(ChartBounds {
        norm_x: nx,
        one_minus_z: (norm2(&(&id - &z)), 1.0 - r),
        z_inverse: (norm2(&zi), 1.0 / r),
        one_minus_z_inverse: (norm2(&(&id - &zi)), 1.0 / r - 1.0),
    })
}

/// The `x` with `p = x + φ_q(x)`, for `p` in the chart window around `q`.
pub fn chart_inverse(q: &SquareRootOfOne, p: &SquareRootOfOne) -> Result<StarElement> {
    same_size(p.dim(), q.dim())?;
    let (x, y) = symmetric_split(p.element(), q)?;
    let nx = x.norm();
    if nx >= CHART_RADIUS {
        return Err(precondition(format!("p is outside the chart: anticommuting part has norm {nx}")));
    }
    let dy = norm2(&(y.data() - q.data()));
    if dy >= 0.5 {
        return Err(precondition(format!("p is outside the chart: commuting part is {dy} from q")));
    }
    Ok(x)
}

/// `s(p) = (p + q)|p + q|⁻¹ q`, a unitary with `p·s(p) = s(p)·q`.
pub fn unitary_section(q: &SquareRootOfOne, p: &SquareRootOfOne) -> Result<StarElement> {
    same_size(p.dim(), q.dim())?;
    let field = p.element().field().join(q.element().field());
    let n = q.dim();
    if n == 0 {
        return Ok(StarElement::identity(0, field));
    }
    let gap = norm2(&(p.data() - q.data()));
    if gap >= 2.0 {
        return Err(precondition(format!("‖p − q‖ = {gap} is not below 2")));
    }
    let m = p.data() + q.data();
    let t = svd(&m);
    let smallest = t.s.last().copied().unwrap_or(0.0);
    if smallest <= 1e-12 * t.s[0].max(1.0) {
        return Err(precondition("p + q is singular"));
    }
    // (p+q)|p+q|⁻¹ is the polar factor U·Vᴴ
    let polar = &t.u * t.v.adjoint();
    Ok(StarElement::from_cmat(field, polar * q.data()))
}

/// `f(z) = 1 − z − (1 − z)^{1/2}` on a matrix with spectrum in the open unit disc.
pub fn lift_function(k: &CMat) -> Result<CMat> {
    let n = k.nrows();
    let id = CMat::identity(n, n);
    let m = &id - k;
    Ok(&m - principal_sqrt(&m)?)
}

/// `‖f(K)²(1 − K)⁻¹ − 2f(K) − K‖`.
pub fn lift_identity_residual(k: &CMat) -> Result<f64> {
    let n = k.nrows();
    let id = CMat::identity(n, n);
    let f = lift_function(k)?;
    let inv = solve(&(&id - k), &id).ok_or_else(|| precondition("1 − K is singular"))?;
    Ok(norm2(&(&f * &f * inv - &f * c(2.0) - k)))
}

fn is_hermitian(m: &CMat) -> bool {
    norm2(&(m - m.adjoint())) <= IDENTITY_TOL * norm2(m).max(1.0)
}

/// Principal square root of a matrix with no eigenvalue on `(−∞, 0]`.
fn principal_sqrt(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    if is_hermitian(m) {
        let (vals, _) = hermitian_eigen(m);
        if vals.iter().any(|&v| v <= 0.0) {
            return Err(precondition("matrix has a non-positive eigenvalue"));
        }
        return Ok(hermitian_function(m, sqrt));
    }
    let (u, t) = schur(m)?;
    let mut r = CMat::zeros(n, n);
    for i in 0..n {
        let d = t[(i, i)];
        if d.im.abs() <= 1e-14 * d.norm() && d.re <= 0.0 {
            return Err(precondition("matrix has an eigenvalue on the closed negative axis"));
        }
        r[(i, i)] = d.sqrt();
    }
    for j in 1..n {
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    Ok(&u * r * u.adjoint())
}

/// Complex Schur form `m = u·t·uᴴ` with `t` upper triangular.
fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    let s = m
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::NotConverged {
            iterations: 10_000,
            theta: f64::NAN,
        })?;
    let (u, mut t) = s.unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = Scalar::new(0.0, 0.0);
        }
    }
    Ok((u, t))
}

/// Swaps the adjacent diagonal entries `k`, `k+1` of the triangular factor.
fn swap_adjacent(u: &mut CMat, t: &mut CMat, k: usize) {
    let n = t.nrows();
    let f = t[(k, k + 1)];
    let g = t[(k + 1, k + 1)] - t[(k, k)];
    let (nf, ng) = (f.norm(), g.norm());
    if ng == 0.0 && nf == 0.0 {
        return;
    }
    let norm = sqrt(nf * nf + ng * ng);
    let (cs, sn) = if nf == 0.0 {
        (0.0, g.conj() / c(norm))
    } else {
        (nf / norm, (f / c(nf)) * g.conj() / c(norm))
    };
    // rows: [x; y] ← [cs·x + sn·y; cs·y − conj(sn)·x]
    for j in 0..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = x * cs + sn * y;
        t[(k + 1, j)] = y * cs - sn.conj() * x;
    }
    // columns: multiply on the right by the adjoint
    for m in [&mut *t, &mut *u] {
        for i in 0..n {
            let (x, y) = (m[(i, k)], m[(i, k + 1)]);
            m[(i, k)] = x * cs + sn.conj() * y;
            m[(i, k + 1)] = y * cs - sn * x;
        }
    }
    t[(k + 1, k)] = Scalar::new(0.0, 0.0);
}

/// Whether `z` lies in `{|z² − 1| < 1}`; errors when it is within the gap of the boundary.
fn inside_split(z: Scalar) -> Result<bool> {
    let level = (z * z - c(1.0)).norm();
    if (level - 1.0).abs() < SPLIT_GAP {
        return Err(precondition(format!(
            "eigenvalue {} of Q is within {SPLIT_GAP} of the boundary of the splitting region",
            z
        )));
    }
    Ok(level < 1.0)
}

/// A similarity `w` splitting `q` into `diag(q₀, q₁)` with `σ(q₁)` inside the splitting
/// region; returns `(w, w⁻¹, dim H₀)`.
fn spectral_split(q: &CMat) -> Result<(CMat, CMat, usize)> {
    let n = q.nrows();
    if is_hermitian(q) {
        let (vals, vecs) = hermitian_eigen(q);
        let mut outer = Vec::new();
        let mut inner = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            if inside_split(c(v))? {
                inner.push(i);
            } else {
                outer.push(i);
            }
        }
        let n0 = outer.len();
        let mut w = CMat::zeros(n, n);
        for (dst, &src) in outer.iter().chain(inner.iter()).enumerate() {
            w.set_column(dst, &vecs.column(src));
        }
        let wi = w.adjoint();
        return Ok((w, wi, n0));
    }
    let (mut u, mut t) = schur(q)?;
    let mut inside = Vec::with_capacity(n);
    for i in 0..n {
        inside.push(inside_split(t[(i, i)])?);
    }
    // bubble outer eigenvalues to the front
    for pass in 0..n {
        let mut moved = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if inside[k] && !inside[k + 1] {
                swap_adjacent(&mut u, &mut t, k);
                inside.swap(k, k + 1);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let n0 = inside.iter().filter(|&&b| !b).count();
    let n1 = n - n0;
    // t₀₀·x − x·t₁₁ = −t₀₁, column by column
    let t00 = t.view((0, 0), (n0, n0)).into_owned();
    let t01 = t.view((0, n0), (n0, n1)).into_owned();
    let t11 = t.view((n0, n0), (n1, n1)).into_owned();
    let mut x = CMat::zeros(n0, n1);
    for j in 0..n1 {
        let mut rhs = -t01.column(j).into_owned();
        for k in 0..j {
            rhs += x.column(k) * t11[(k, j)];
        }
        let mu = t11[(j, j)];
        for i in (0..n0).rev() {
            let mut s = rhs[i];
            for l in i + 1..n0 {
                s -= t00[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = s / (t00[(i, i)] - mu);
        }
    }
    let mut s = CMat::identity(n, n);
    let mut si = CMat::identity(n, n);
    s.view_mut((0, n0), (n0, n1)).copy_from(&x);
    si.view_mut((0, n0), (n0, n1)).copy_from(&(-x));
    Ok((&u * s, si * u.adjoint(), n0))
}

/// Given `Q² = 1 − K`, returns `J` with `(Q − J)² = 1`: on the spectral part of `Q`
/// outside `{|z²−1| < 1}` it is `Q₀ − 1`, on the rest `Q₁⁻¹ f(K₁)`.
pub fn lift_square_root(q: &StarElement, k: &StarElement) -> Result<StarElement> {
    same_size(q.dim(), k.dim())?;
    let n = q.dim();
    let field = q.field().join(k.field());
    let id = CMat::identity(n, n);
    let (qd, kd) = (q.data(), k.data());
    let defect = norm2(&(qd * qd - (&id - kd)));
    let scale = norm2(qd);
    if defect > 1e-9 * (scale * scale).max(1.0) {
        return Err(precondition(format!("Q² differs from 1 − K by {defect}")));
    }
    let (w, wi, n0) = spectral_split(qd)?;
    let n1 = n - n0;
    let qs = &wi * qd * &w;
    let ks = &wi * kd * &w;
    let q0 = qs.view((0, 0), (n0, n0)).into_owned();
    let q1 = qs.view((n0, n0), (n1, n1)).into_owned();
    let k1 = ks.view((n0, n0), (n1, n1)).into_owned();
    if n1 > 0 {
        let rho = svd(&k1).s[0];
        let eig_bound = spectral_radius(&k1)?;
        if eig_bound >= 1.0 - SPLIT_GAP {
            return Err(precondition(format!("spectrum of K₁ reaches the unit circle (radius {eig_bound}, norm {rho})")));
        }
    }
    let j0 = &q0 - CMat::identity(n0, n0);
    let f1 = lift_function(&k1)?;
    let j1 = solve(&q1, &f1).ok_or_else(|| precondition("Q₁ is singular"))?;
    let mut js = CMat::zeros(n, n);
    js.view_mut((0, 0), (n0, n0)).copy_from(&j0);
    js.view_mut((n0, n0), (n1, n1)).copy_from(&j1);
    let mut j = &w * js * &wi;
    if is_hermitian(qd) && is_hermitian(kd) {
        j = (&j + j.adjoint()) * c(0.5);
    }
    Ok(StarElement::from_cmat(field, j))
}

fn spectral_radius(m: &CMat) -> Result<f64> {
    if is_hermitian(m) {
        let (vals, _) = hermitian_eigen(m);
        return Ok(vals.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    let (_, t) = schur(m)?;
    Ok((0..m.nrows()).fold(0.0, |a: f64, i| a.max(t[(i, i)].norm())))
}
