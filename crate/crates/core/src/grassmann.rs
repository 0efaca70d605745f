//! Subspaces of a fixed ambient space: projectors, the gap metric, graph charts,
//! transverse intersections and finite sums.

use alloc::format;
use nalgebra::ComplexField;

use crate::error::{precondition, Error, Result};
use crate::numcore::{
    complement_frame, hcat, intersection_frame, norm2, rank_with_floor, solve, span_frame, sum_frame, CMat, Field,
    Frame, Matrix, Tolerance,
};

/// A linear subspace stored through an orthonormal frame.
///
/// The frame's ordered columns are the subspace's canonical generator. Subspaces
/// produced by this crate (spans, intersections, sums, complements) use the canonical
/// frame: pivoted Gram–Schmidt applied to the projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: Frame,
}

impl Subspace {
    /// Keeps the given frame as generator.
    pub fn from_frame(frame: Frame) -> Self {
        Subspace { frame }
    }

    pub(crate) fn from_basis(field: Field, basis: CMat) -> Self {
        Subspace {
            frame: Frame::trusted(basis, field),
        }
    }

    /// Column span of `vectors`, with canonical frame.
    pub fn span(vectors: &Matrix, tol: &Tolerance) -> Self {
        let r = crate::numcore::rank(vectors, tol);
        Subspace::from_basis(vectors.field(), span_frame(vectors.data(), r))
    }

    pub fn zero(ambient: usize, field: Field) -> Self {
        Subspace {
            frame: Frame::empty(ambient, field),
        }
    }

    pub fn whole(ambient: usize, field: Field) -> Self {
        Subspace::from_basis(field, CMat::identity(ambient, ambient))
    }

    /// Span of standard basis vectors, in the listed order.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Self {
        let mut m = CMat::zeros(ambient, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            m[(i, j)] = crate::numcore::c(1.0);
        }
        Subspace::from_basis(Field::Real, m)
    }

    pub fn dim(&self) -> usize {
        self.frame.width()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.ambient_dim()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    pub fn field(&self) -> Field {
        self.frame.field()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Frame columns.
    pub fn basis(&self) -> &CMat {
        self.frame.columns()
    }

    /// Same span, canonical frame.
    pub fn canonical(&self) -> Subspace {
        Subspace::from_basis(self.field(), span_frame(self.basis(), self.dim()))
    }

    /// Orthogonal complement with canonical frame.
    pub fn complement(&self) -> Subspace {
        Subspace::from_basis(self.field(), complement_frame(self.basis()))
    }

    /// Image under a map of the ambient space.
    pub fn image(&self, map: &CMat, tol: &Tolerance) -> Result<Subspace> {
        if map.ncols() != self.ambient_dim() {
            return Err(Error::AmbientMismatch {
                left: map.ncols(),
                right: self.ambient_dim(),
            });
        }
        let g = map * self.basis();
        let r = rank_with_floor(&g, tol, 0.0);
        Ok(Subspace::from_basis(self.field().join(Field::detect(map)), span_frame(&g, r)))
    }
}

pub(crate) fn same_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::AmbientMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    Ok(())
}

/// Orthogonal projector onto `v`.
pub fn projector(v: &Subspace) -> Matrix {
    Matrix::from_cmat(v.field(), v.frame().projector())
}

/// Gap distance `‖P_V − P_W‖`.
pub fn distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    same_ambient(v, w)?;
    Ok(norm2(&(v.frame().projector() - w.frame().projector())))
}

/// `V ∩ W` from the null space of `[V | −W]` (the SVD oracle).
pub fn intersection(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(v, w)?;
    Ok(Subspace::from_basis(
        v.field().join(w.field()),
        intersection_frame(v.basis(), w.basis(), tol),
    ))
}

/// `V + W` with no directness requirement.
pub fn span_sum(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(v, w)?;
    Ok(Subspace::from_basis(v.field().join(w.field()), sum_frame(v.basis(), w.basis(), tol)))
}

/// A point of the graph chart centred at `base`: the map `A` from base coordinates
/// to coordinates of the canonical frame of the orthogonal complement.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphChartPoint {
    pub base: Subspace,
    pub complement: Subspace,
    pub operator: Matrix,
}

impl GraphChartPoint {
    /// Chart point over `base` with complement coordinates in its canonical complement.
    pub fn new(base: Subspace, operator: Matrix) -> Result<Self> {
        let complement = base.complement();
        if operator.rows() != complement.dim() || operator.cols() != base.dim() {
            return Err(crate::error::shape(format!(
                "chart operator must be {}x{}, got {}x{}",
                complement.dim(),
                base.dim(),
                operator.rows(),
                operator.cols()
            )));
        }
        Ok(GraphChartPoint {
            base,
            complement,
            operator,
        })
    }
}

fn chart_domain_error(d: f64) -> Error {
    precondition(format!("outside the chart domain: distance {d:.6} is not below 1"))
}

/// `W` as the graph of `A: V → V⊥` (requires `dist(V, W) < 1`).
pub fn chart_to(v: &Subspace, w: &Subspace, _tol: &Tolerance) -> Result<GraphChartPoint> {
    let d = distance(v, w)?;
    if v.dim() != w.dim() || d >= 1.0 - 1e-12 {
        return Err(chart_domain_error(d));
    }
    let comp = v.complement();
    let m = v.basis().adjoint() * w.basis();
    let minv = solve(&m.adjoint(), &(w.basis().adjoint() * comp.basis()))
        .ok_or_else(|| chart_domain_error(d))?
        .adjoint();
    let field = v.field().join(w.field());
    Ok(GraphChartPoint {
        base: v.clone(),
        complement: comp,
        operator: Matrix::from_cmat(field, minv),
    })
}

/// `graf A = {v + A v}`, canonical frame.
pub fn chart_from(p: &GraphChartPoint) -> Subspace {
    let g = graph_basis(p);
    let field = p.base.field().join(p.operator.field());
    Subspace::from_basis(field, span_frame(&g, p.base.dim()))
}

fn graph_basis(p: &GraphChartPoint) -> CMat {
    p.base.basis() + p.complement.basis() * p.operator.data()
}

/// Chart change `Ψ_W ∘ Ψ_V⁻¹` evaluated at `A`.
pub fn chart_transition(v: &Subspace, w: &Subspace, a: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    same_ambient(v, w)?;
    let p = GraphChartPoint::new(v.clone(), a.clone())?;
    let g = graph_basis(&p);
    let wc = w.complement();
    let m = w.basis().adjoint() * &g;
    if v.dim() != w.dim() || rank_with_floor(&m, tol, 1.0) < m.nrows() {
        return Err(precondition("graph lies outside the target chart domain"));
    }
    let rhs = (wc.basis().adjoint() * &g).adjoint();
    let out = solve(&m.adjoint(), &rhs)
        .ok_or_else(|| precondition("graph lies outside the target chart domain"))?
        .adjoint();
    Ok(Matrix::from_cmat(v.field().join(w.field()).join(a.field()), out))
}

/// The splitting `H = H₀ ⊕ H₁ ⊕ H₂` with `H₀ = V₀∩W₀`, `V₀ = H₀⊕H₁`, `W₀ = H₀⊕H₂`.
#[derive(Clone, Debug)]
pub struct TransverseSplitting {
    pub h0: CMat,
    pub h1: CMat,
    pub h2: CMat,
}

/// Splitting for a transverse base pair, computed with the SVD oracle.
pub fn transverse_splitting(v0: &Subspace, w0: &Subspace, tol: &Tolerance) -> Result<TransverseSplitting> {
    check_transverse(v0, w0, tol)?;
    let h0 = intersection_frame(v0.basis(), w0.basis(), tol);
    let h0c = complement_frame(&h0);
    let h1 = intersection_frame(v0.basis(), &h0c, tol);
    let h2 = intersection_frame(w0.basis(), &h0c, tol);
    if h0.ncols() + h1.ncols() + h2.ncols() != v0.ambient_dim() {
        return Err(precondition("pair is not transverse"));
    }
    Ok(TransverseSplitting { h0, h1, h2 })
}

fn check_transverse(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<()> {
    same_ambient(v, w)?;
    let m = hcat(&[v.basis(), w.basis()]);
    if rank_with_floor(&m, tol, 1.0) != v.ambient_dim() {
        return Err(precondition("pair is not transverse: V + W is not the whole space"));
    }
    Ok(())
}

/// Closed resolvent form of `T(A,B)` restricted to `H₀`.
///
/// `a: H₀⊕H₁ → H₂` and `b: H₀⊕H₂ → H₁`, with `d0 = dim H₀`. Returns the `H₁` and
/// `H₂` components `((I−BA)⁻¹(B+BA), (I−AB)⁻¹(A+AB))`.
pub fn transverse_operator(a: &CMat, b: &CMat, d0: usize) -> Option<(CMat, CMat)> {
    let d1 = b.nrows();
    let d2 = a.nrows();
    let a0 = a.columns(0, d0);
    let a1 = a.columns(d0, d1);
    let b0 = b.columns(0, d0);
    let b2 = b.columns(d0, d2);
    let i1 = CMat::identity(d1, d1);
    let i2 = CMat::identity(d2, d2);
    let h1 = solve(&(&i1 - &b2 * &a1), &(&b0 + &b2 * &a0))?;
    let h2 = solve(&(&i2 - &a1 * &b2), &(&a0 + &a1 * &b0))?;
    Some((h1, h2))
}

/// `V ∩ W` for a transverse pair via the graph operator `T(A,B)`.
///
/// The splitting is taken from the pair itself (through the SVD oracle), so `A` and
/// `B` vanish; [`intersect_transverse_near`] evaluates the formula over a separate
/// base pair.
pub fn intersect_transverse(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    intersect_transverse_near(v, w, v, w, tol)
}

/// `V ∩ W` where `V`, `W` are graphs over a transverse base pair `(V₀, W₀)`.
pub fn intersect_transverse_near(
    v0: &Subspace,
    w0: &Subspace,
    v: &Subspace,
    w: &Subspace,
    tol: &Tolerance,
) -> Result<Subspace> {
    same_ambient(v0, v)?;
    same_ambient(w0, w)?;
    check_transverse(v, w, tol)?;
    if v.dim() != v0.dim() || w.dim() != w0.dim() {
        return Err(precondition("subspaces must have the dimensions of the base pair"));
    }
    let sp = transverse_splitting(v0, w0, tol)?;
    let (d0, d1, d2) = (sp.h0.ncols(), sp.h1.ncols(), sp.h2.ncols());
    let basis = hcat(&[&sp.h0, &sp.h1, &sp.h2]);
    let not_graph = || precondition("subspace is not a graph over the base splitting");
    let cv = solve(&basis, v.basis()).ok_or_else(not_graph)?;
    let cw = solve(&basis, w.basis()).ok_or_else(not_graph)?;
    let a = graph_map(&cv.rows(d0 + d1, d2).into_owned(), &cv.rows(0, d0 + d1).into_owned()).ok_or_else(not_graph)?;
    let cw_dom = crate::numcore::vcat(&[&cw.rows(0, d0).into_owned(), &cw.rows(d0 + d1, d2).into_owned()]);
    let b = graph_map(&cw.rows(d0, d1).into_owned(), &cw_dom).ok_or_else(not_graph)?;
    let (h1, h2) = transverse_operator(&a, &b, d0).ok_or_else(|| precondition("resolvent is singular"))?;
    let g = &sp.h0 + &sp.h1 * h1 + &sp.h2 * h2;
    Ok(Subspace::from_basis(v.field().join(w.field()), span_frame(&g, d0)))
}

fn graph_map(target: &CMat, domain: &CMat) -> Option<CMat> {
    Some(solve(&domain.adjoint(), &target.adjoint())?.adjoint())
}

/// `(P_V P_W)^n`.
pub fn power_iterate(v: &Subspace, w: &Subspace, n: usize) -> Result<CMat> {
    same_ambient(v, w)?;
    let m = v.frame().projector() * w.frame().projector();
    let mut out = CMat::identity(v.ambient_dim(), v.ambient_dim());
    for _ in 0..n {
        out = &out * &m;
    }
    Ok(out)
}

/// `V ∩ W` from the limit of `(P_V P_W)^n`.
///
/// Powers are advanced by repeated squaring; the iteration stops once two successive
/// computed powers differ by less than `convergence_tol` in operator norm.
pub fn intersect_power(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(v, w)?;
    let mut cur = v.frame().projector() * w.frame().projector();
    let mut diff = f64::INFINITY;
    for _ in 0..tol.max_iterations {
        let next = &cur * &cur;
        diff = norm2(&(&next - &cur));
        cur = next;
        if diff < tol.convergence_tol {
            let r = rank_with_floor(&cur, tol, 1.0);
            return Ok(Subspace::from_basis(v.field().join(w.field()), span_frame(&cur, r)));
        }
    }
    // After k squarings the error behaves like θ^(2^k).
    let k = tol.max_iterations.min(60) as i32;
    let theta = ComplexField::powf(diff, ComplexField::powi(0.5f64, k));
    Err(Error::NotConverged {
        iterations: tol.max_iterations,
        theta,
    })
}

/// `X + V` for `X ∩ V = 0`.
pub fn sum_finite(x: &Subspace, v: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(x, v)?;
    let m = hcat(&[x.basis(), v.basis()]);
    let r = rank_with_floor(&m, tol, 1.0);
    if r != x.dim() + v.dim() {
        return Err(precondition(format!(
            "X and V intersect: rank of stacked frames is {r}, expected {}",
            x.dim() + v.dim()
        )));
    }
    Ok(Subspace::from_basis(x.field().join(v.field()), span_frame(&m, r)))
}
