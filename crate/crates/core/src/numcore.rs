//! Numerical substrate: field tags, dense matrices, tolerance policy, rank
//! decisions, deterministic orthonormalization, norms and the pseudoinverse.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{shape, Error, Result};

/// Scalars are complex numbers stored as `re`/`im` pairs; real data has `im == 0`.
pub type Scalar = Complex64;
/// Dense complex matrix used by every computation.
pub type CMat = DMatrix<Complex64>;

/// Ground field of a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Complex wins.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }

    /// `Real` iff no entry has a nonzero imaginary part.
    pub fn detect(m: &CMat) -> Field {
        if m.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// Thresholds shared by all rank and convergence decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rank_rel_tol: f64,
    pub convergence_tol: f64,
    pub max_iterations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel_tol: 1e-10,
            convergence_tol: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel_tol: f64, convergence_tol: f64, max_iterations: usize) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(rank_rel_tol) || !ok(convergence_tol) {
            return Err(Error::Invalid("tolerances must be finite and strictly positive".into()));
        }
        if max_iterations == 0 {
            return Err(Error::Invalid("max_iterations must be at least 1".into()));
        }
        Ok(Tolerance {
            rank_rel_tol,
            convergence_tol,
            max_iterations,
        })
    }

    pub fn with_rank_rel_tol(self, rank_rel_tol: f64) -> Result<Self> {
        Tolerance::new(rank_rel_tol, self.convergence_tol, self.max_iterations)
    }
}

/// A dense matrix with a field tag.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    field: Field,
    data: CMat,
}

impl Matrix {
    /// Real matrix from row-major entries.
    pub fn real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(shape(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        let data = CMat::from_fn(rows, cols, |i, j| Scalar::new(entries[i * cols + j], 0.0));
        Ok(Matrix {
            field: Field::Real,
            data,
        })
    }

    /// Complex matrix from row-major entries.
    pub fn complex(rows: usize, cols: usize, entries: &[Scalar]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(shape(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        let data = CMat::from_fn(rows, cols, |i, j| entries[i * cols + j]);
        Ok(Matrix {
            field: Field::Complex,
            data,
        })
    }

    /// Wraps `data`; imaginary parts are dropped when `field` is real.
    pub fn from_cmat(field: Field, data: CMat) -> Self {
        Matrix {
            field,
            data: clean(field, data),
        }
    }

    /// Field inferred from the entries.
    pub fn auto(data: CMat) -> Self {
        Matrix {
            field: Field::detect(&data),
            data,
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        Matrix {
            field,
            data: CMat::identity(n, n),
        }
    }

    pub fn zeros(rows: usize, cols: usize, field: Field) -> Self {
        Matrix {
            field,
            data: CMat::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.data[(i, j)]
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix {
            field: self.field,
            data: self.data.adjoint(),
        }
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.rows() {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Matrix::from_cmat(self.field.join(rhs.field), &self.data * &rhs.data))
    }
}

/// An orthonormal list of column vectors in a fixed ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    field: Field,
    columns: CMat,
}

impl Frame {
    /// Accepts `columns` if `columnsᴴ·columns = I` within `tol.convergence_tol`.
    pub fn new(columns: CMat, field: Field, tol: &Tolerance) -> Result<Self> {
        let f = Frame::trusted(columns, field);
        let r = f.gram_residual();
        if r > tol.convergence_tol {
            return Err(Error::Invalid(format!("frame columns are not orthonormal (residual {r:.3e})")));
        }
        Ok(f)
    }

    pub(crate) fn trusted(columns: CMat, field: Field) -> Self {
        Frame {
            field,
            columns: clean(field, columns),
        }
    }

    pub fn empty(ambient: usize, field: Field) -> Self {
        Frame {
            field,
            columns: CMat::zeros(ambient, 0),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn width(&self) -> usize {
        self.columns.ncols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn columns(&self) -> &CMat {
        &self.columns
    }

    pub fn projector(&self) -> CMat {
        &self.columns * self.columns.adjoint()
    }

    /// `‖FᴴF − I‖` in operator norm.
    pub fn gram_residual(&self) -> f64 {
        let k = self.width();
        norm2(&(self.columns.adjoint() * &self.columns - CMat::identity(k, k)))
    }
}

pub(crate) fn clean(field: Field, mut m: CMat) -> CMat {
    if field == Field::Real {
        for z in m.iter_mut() {
            z.im = 0.0;
        }
    }
    m
}

/// Singular value decomposition with singular values sorted in decreasing order.
pub(crate) struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub(crate) fn svd(m: &CMat) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: CMat::zeros(r, 0),
            s: Vec::new(),
            v: CMat::zeros(c, 0),
        };
    }
    if r < c {
        let t = svd(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (w, v) = jacobi_columns(m);
    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = (0..c).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut u_out = CMat::zeros(r, c);
    let mut v_out = CMat::zeros(c, c);
    let mut s = Vec::with_capacity(c);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        if sigma > 0.0 {
            u_out.set_column(dst, &(w.column(src) / Scalar::new(sigma, 0.0)));
        }
        v_out.set_column(dst, &v.column(src));
    }
    Svd { u: u_out, s, v: v_out }
}

/// One-sided Jacobi orthogonalization of the columns of a tall matrix: returns
/// `(A·V, V)` with `V` unitary and the columns of `A·V` mutually orthogonal.
///
/// Used instead of the bidiagonal SVD in nalgebra, which returns wrong singular
/// vectors on some exactly rank-deficient inputs.
fn jacobi_columns(m: &CMat) -> (CMat, CMat) {
    let (rows, n) = m.shape();
    let mut w = m.clone();
    let mut v = CMat::identity(n, n);
    // columns below roundoff of the whole matrix carry no direction
    let negligible = (f64::EPSILON * m.norm()).powi(2);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * sqrt(alpha * beta) || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = (gamma / Scalar::new(g, 0.0)).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / sqrt(1.0 + t * t);
                let sn = cs * t;
                rotate(&mut w, p, q, phase, cs, sn, rows);
                rotate(&mut v, p, q, phase, cs, sn, n);
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

fn rotate(m: &mut CMat, p: usize, q: usize, phase: Scalar, cs: f64, sn: f64, rows: usize) {
    for i in 0..rows {
        let a = m[(i, p)];
        let b = m[(i, q)] * phase;
        m[(i, p)] = a * cs - b * sn;
        m[(i, q)] = a * sn + b * cs;
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// Runs the Jacobi SVD on the positive definite shift `a + c·I`, whose singular
/// vectors are eigenvectors of `a`.
pub(crate) fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (a + a.adjoint()) * c(0.5);
    let shift = h.norm() + 1.0;
    let t = svd(&(&h + CMat::identity(n, n) * c(shift)));
    (t.s.iter().map(|s| s - shift).collect(), t.v)
}

/// `g(a)` for Hermitian `a` and a real function `g` on its spectrum.
pub(crate) fn hermitian_function(a: &CMat, g: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let d = CMat::from_fn(vals.len(), vals.len(), |i, j| if i == j { c(g(vals[i])) } else { c(0.0) });
    &vecs * d * vecs.adjoint()
}

/// Singular values, largest first.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    sorted_singular_values(m.data())
}

pub(crate) fn sorted_singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).s
}

/// Cutoff `rank_rel_tol · max(σ_max, floor) · max(rows, cols)`.
pub(crate) fn cutoff(s_max: f64, rows: usize, cols: usize, tol: &Tolerance, floor: f64) -> f64 {
    tol.rank_rel_tol * s_max.max(floor) * rows.max(cols) as f64
}

fn count_above(s: &[f64], tau: f64) -> usize {
    if s.first().map_or(true, |&x| x == 0.0) {
        return 0;
    }
    s.iter().filter(|&&x| x > tau).count()
}

/// Number of singular values strictly above `rank_rel_tol · σ_max · max(rows, cols)`.
pub fn rank(m: &Matrix, tol: &Tolerance) -> usize {
    rank_with_floor(m.data(), tol, 0.0)
}

/// Rank with the cutoff scale bounded below by `floor`.
///
/// Compressions of orthogonal projections and exact products are measured against
/// their nominal size; otherwise a map that vanishes up to roundoff would count
/// its noise as rank.
pub fn rank_with_floor(m: &CMat, tol: &Tolerance, floor: f64) -> usize {
    let s = sorted_singular_values(m);
    let tau = cutoff(s.first().copied().unwrap_or(0.0), m.nrows(), m.ncols(), tol, floor);
    count_above(&s, tau)
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    norm2(m.data())
}

pub(crate) fn norm2(m: &CMat) -> f64 {
    sorted_singular_values(m).first().copied().unwrap_or(0.0)
}

/// Moore–Penrose pseudoinverse under the rank policy.
pub fn pseudoinverse(m: &Matrix, tol: &Tolerance) -> Matrix {
    Matrix::from_cmat(m.field(), pinv_with_floor(m.data(), tol, 0.0))
}

pub(crate) fn pinv_with_floor(m: &CMat, tol: &Tolerance, floor: f64) -> CMat {
    let d = svd(m);
    let tau = cutoff(d.s.first().copied().unwrap_or(0.0), m.nrows(), m.ncols(), tol, floor);
    let r = count_above(&d.s, tau);
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for i in 0..r {
        let vi = d.v.column(i);
        let ui = d.u.column(i);
        out += (vi * ui.adjoint()) * Scalar::new(1.0 / d.s[i], 0.0);
    }
    out
}

/// Column-pivoted modified Gram–Schmidt producing `width` columns.
///
/// Pivot: largest remaining column norm, ties (relative 1e-12) to the lowest index.
/// Each new vector is re-orthogonalized against the accepted ones.
pub(crate) fn pivoted_gram_schmidt(m: &CMat, width: usize) -> CMat {
    let n = m.nrows();
    let mut a = m.clone();
    let mut q = CMat::zeros(n, width);
    for c in 0..width {
        let norms: Vec<f64> = (0..a.ncols()).map(|j| a.column(j).norm()).collect();
        let mx = norms.iter().copied().fold(0.0, f64::max);
        if mx == 0.0 {
            return q.columns(0, c).into_owned();
        }
        let j = norms
            .iter()
            .position(|&x| x >= mx * (1.0 - 1e-12))
            .unwrap_or(0);
        let mut v: DVector<Scalar> = a.column(j).into_owned();
        for _ in 0..2 {
            for p in 0..c {
                let qp = q.column(p);
                let h = qp.dotc(&v);
                v -= qp * h;
            }
        }
        let nv = v.norm();
        v /= Scalar::new(nv, 0.0);
        q.set_column(c, &v);
        let coeffs = v.adjoint() * &a;
        a -= &v * coeffs;
    }
    q
}

/// Orthonormal frame for the column space; width is the numerical rank.
pub fn orthonormalize(vectors: &Matrix, tol: &Tolerance) -> Frame {
    let r = rank(vectors, tol);
    Frame::trusted(pivoted_gram_schmidt(vectors.data(), r), vectors.field())
}

/// Canonical frame of the range of a projector: pivoted Gram–Schmidt on its columns.
pub(crate) fn frame_from_projector(p: &CMat, width: usize) -> CMat {
    pivoted_gram_schmidt(p, width)
}

/// Canonical frame of the span of `width` independent columns.
pub(crate) fn span_frame(m: &CMat, width: usize) -> CMat {
    if width == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let f = pivoted_gram_schmidt(m, width);
    frame_from_projector(&(&f * f.adjoint()), width)
}

/// Canonical frame of the orthogonal complement of an orthonormal `f`.
pub(crate) fn complement_frame(f: &CMat) -> CMat {
    let n = f.nrows();
    let p = CMat::identity(n, n) - f * f.adjoint();
    frame_from_projector(&p, n - f.ncols())
}

/// Canonical kernel frame of `m` (columns in the domain).
pub(crate) fn kernel_frame(m: &CMat, tol: &Tolerance, floor: f64) -> CMat {
    let n = m.ncols();
    let d = svd(m);
    let tau = cutoff(d.s.first().copied().unwrap_or(0.0), m.nrows(), n, tol, floor);
    let r = count_above(&d.s, tau);
    let vr = d.v.columns(0, r);
    let p = CMat::identity(n, n) - &vr * vr.adjoint();
    frame_from_projector(&p, n - r)
}

/// Canonical frames of (range, orthogonal complement of the range) of `m`.
pub(crate) fn range_and_cokernel_frames(m: &CMat, tol: &Tolerance, floor: f64) -> (CMat, CMat) {
    let n = m.nrows();
    let d = svd(m);
    let tau = cutoff(d.s.first().copied().unwrap_or(0.0), n, m.ncols(), tol, floor);
    let r = count_above(&d.s, tau);
    let ur = d.u.columns(0, r);
    let p = &ur * ur.adjoint();
    let q = CMat::identity(n, n) - &p;
    (frame_from_projector(&p, r), frame_from_projector(&q, n - r))
}

/// Canonical frame of `span(a) ∩ span(b)` for orthonormal `a`, `b`.
pub(crate) fn intersection_frame(a: &CMat, b: &CMat, tol: &Tolerance) -> CMat {
    let n = a.nrows();
    let (ka, kb) = (a.ncols(), b.ncols());
    if ka == 0 || kb == 0 {
        return CMat::zeros(n, 0);
    }
    let mut stacked = CMat::zeros(n, ka + kb);
    stacked.columns_mut(0, ka).copy_from(a);
    stacked.columns_mut(ka, kb).copy_from(&(-b));
    let null = kernel_frame(&stacked, tol, 1.0);
    if null.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    let g = a * null.rows(0, ka);
    span_frame(&g, null.ncols())
}

/// Canonical frame of `span(a) + span(b)` for orthonormal `a`, `b`.
pub(crate) fn sum_frame(a: &CMat, b: &CMat, tol: &Tolerance) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(n, a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    let r = rank_with_floor(&m, tol, 1.0);
    span_frame(&m, r)
}

/// Determinant; `1` for the empty matrix.
pub fn det(m: &CMat) -> Scalar {
    if m.nrows() == 0 && m.ncols() == 0 {
        return Scalar::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Solves `a·x = b` for square invertible `a`.
pub(crate) fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(CMat::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// `f₁ᴴ·m·f₀`: a map in ambient coordinates expressed in two frames.
pub(crate) fn coords(to: &CMat, m: &CMat, from: &CMat) -> CMat {
    to.adjoint() * m * from
}

pub(crate) fn hcat(blocks: &[&CMat]) -> CMat {
    let n = blocks.first().map_or(0, |b| b.nrows());
    let w: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, w);
    let mut off = 0;
    for b in blocks {
        out.columns_mut(off, b.ncols()).copy_from(*b);
        off += b.ncols();
    }
    out
}

pub(crate) fn vcat(blocks: &[&CMat]) -> CMat {
    let n = blocks.first().map_or(0, |b| b.ncols());
    let h: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(h, n);
    let mut off = 0;
    for b in blocks {
        out.rows_mut(off, b.nrows()).copy_from(*b);
        off += b.nrows();
    }
    out
}

/// `|a − b| / max(1, |a|)`.
pub fn rel_diff(a: Scalar, b: Scalar) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    ComplexField::sqrt(x)
}

pub(crate) fn c(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}
