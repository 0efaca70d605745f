//! Local trivializations and lifted operations for the determinant bundles over
//! Fredholm pairs and over Fredholm maps.
//!
//! Quotients are modeled by orthogonal complements: `H/(V+W)` is `(V+W)⊥` with the
//! orthogonal projection, and the cokernel of a map is the complement of its range.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::detcalc::{
    compose_lift_with, four_term_scale, map_line, phi_t_j_sigma, DetElement, DetLine, ExactSequence, LineFactor,
    LineIso, SignConvention,
};
use crate::error::{precondition, shape, Error, Result};
use crate::fredholm::{fredholm_map_with_floor, FredholmMap, FredholmPair};
use crate::grassmann::{intersection, same_ambient, span_sum, Subspace};
use crate::numcore::{
    c, complement_frame, det, hcat, kernel_frame, norm2, pinv_with_floor, rank_with_floor, rel_diff, span_frame, svd,
    CMat, Matrix, Scalar, Tolerance,
};

/// Chart data shared by both chart systems: the middle map `t : D → X` of a
/// four-term sequence `0 → K → D → X → C → 0` together with frames.
#[derive(Clone, Debug)]
pub struct ChartFrames {
    /// `(X+V)∩W`, or `T⁻¹X`.
    pub domain: Subspace,
    pub target: Subspace,
    /// Ambient images of the domain frame under `t`.
    image: CMat,
    pub iso: LineIso,
}

fn rank_unit(m: &CMat, tol: &Tolerance) -> usize {
    rank_with_floor(m, tol, 1.0)
}

/// `ψ : Det(K)⊗Det(C)* → Det(D)⊗Det(X)*` for the sequence given by frames and the
/// ambient image of the domain frame.
fn chart_from_frames(k: &CMat, d: &CMat, x: &CMat, cf: &CMat, image: &CMat, tol: &Tolerance) -> LineIso {
    let i = d.adjoint() * k;
    let t = x.adjoint() * image;
    let p = cf.adjoint() * x;
    LineIso::new(
        vec![LineFactor::plain(k.ncols()), LineFactor::dual(cf.ncols())],
        vec![LineFactor::plain(d.ncols()), LineFactor::dual(x.ncols())],
        four_term_scale(&i, &t, &p, tol),
    )
}

/// Transition from a chart to a larger one (`D ⊂ D′`, `X ⊂ X′`, `t′|_D = t`):
/// `α⊗ξ* ↦ (α∧z)⊗(ξ∧t z)*` with `z` spanning `D′ ⊖ D`.
fn nested_scale(small: &ChartFrames, big: &ChartFrames) -> Result<Scalar> {
    let (d, db) = (small.domain.basis(), big.domain.basis());
    let (x, xb) = (small.target.basis(), big.target.basis());
    let zd = db * complement_frame(&(db.adjoint() * d));
    let zx = xb * complement_frame(&(xb.adjoint() * x));
    if zd.ncols() != zx.ncols() {
        return Err(precondition("charts are not nested"));
    }
    let delta_d = det(&(db.adjoint() * hcat(&[d, &zd])));
    let delta_x = det(&(xb.adjoint() * hcat(&[x, &zx])));
    let tz = &big.image * (db.adjoint() * &zd);
    let m = zx.adjoint() * tz;
    let dm = det(&m);
    if dm.norm() < 1e-12 {
        return Err(precondition("complementary block of the nested transition is singular"));
    }
    Ok(delta_d / (delta_x * dm))
}

fn contains(big: &Subspace, small: &Subspace, tol: &Tolerance) -> bool {
    rank_unit(&hcat(&[big.basis(), small.basis()]), tol) == big.dim()
}

/// An auxiliary finite-dimensional `X` trivializing `Det` over the pairs `(V,W)` with
/// `X∩V = (0)` and `X+V+W = H`.
#[derive(Clone, Debug, PartialEq)]
pub struct FpChart {
    pub x: Subspace,
}

impl FpChart {
    pub fn new(x: Subspace) -> Self {
        FpChart { x }
    }

    /// Domain membership, naming the failed condition.
    pub fn check(&self, pair: &FredholmPair, tol: &Tolerance) -> Result<()> {
        same_ambient(&self.x, &pair.v)?;
        let (x, v, w) = (self.x.basis(), pair.v.basis(), pair.w.basis());
        if rank_unit(&hcat(&[x, v]), tol) != x.ncols() + v.ncols() {
            return Err(precondition("chart domain: X ∩ V is nonzero"));
        }
        if rank_unit(&hcat(&[x, v, w]), tol) != pair.ambient_dim() {
            return Err(precondition("chart domain: X + V + W is not the whole space"));
        }
        Ok(())
    }

    /// Frames and scale of `ψ^X_{(V,W)} : Det(V,W) → Det((X+V)∩W)⊗Det(X)*`.
    pub fn frames(&self, pair: &FredholmPair, tol: &Tolerance) -> Result<ChartFrames> {
        self.check(pair, tol)?;
        let (v, w) = (&pair.v, &pair.w);
        let k = intersection(v, w, tol)?;
        let xv = span_sum(&self.x, v, tol)?;
        let a = intersection(&xv, w, tol)?;
        let cf = span_sum(v, w, tol)?.complement();
        let x = self.x.basis();
        let solve = pinv_with_floor(&hcat(&[x, v.basis()]), tol, 1.0) * a.basis();
        let image = x * solve.rows(0, x.ncols());
        let iso = chart_from_frames(k.basis(), a.basis(), x, cf.basis(), &image, tol);
        Ok(ChartFrames {
            domain: a,
            target: self.x.clone(),
            image,
            iso,
        })
    }
}

pub fn fp_chart_map(chart: &FpChart, pair: &FredholmPair, tol: &Tolerance) -> Result<LineIso> {
    Ok(chart.frames(pair, tol)?.iso)
}

/// `ψ^{X₂} ∘ (ψ^{X₁})⁻¹`, evaluated directly.
pub fn fp_transition(c1: &FpChart, c2: &FpChart, pair: &FredholmPair, tol: &Tolerance) -> Result<LineIso> {
    let a = fp_chart_map(c1, pair, tol)?;
    let b = fp_chart_map(c2, pair, tol)?;
    a.inverse().then(&b)
}

/// Transition from `X₁` to `X₂ ⊃ X₁` through the closed determinant of the
/// complementary block.
pub fn fp_transition_nested(small: &FpChart, big: &FpChart, pair: &FredholmPair, tol: &Tolerance) -> Result<LineIso> {
    if !contains(&big.x, &small.x, tol) {
        return Err(precondition("first chart space is not contained in the second"));
    }
    let s = small.frames(pair, tol)?;
    let b = big.frames(pair, tol)?;
    let scale = nested_scale(&s, &b)?;
    Ok(LineIso::new(s.iso.target.clone(), b.iso.target.clone(), scale))
}

/// Transition through the common refinement `X₁ + X₂`, which must itself be a chart
/// at the pair.
pub fn fp_transition_via_sum(c1: &FpChart, c2: &FpChart, pair: &FredholmPair, tol: &Tolerance) -> Result<LineIso> {
    let both = FpChart::new(span_sum(&c1.x, &c2.x, tol)?);
    let up = fp_transition_nested(c1, &both, pair, tol)?;
    let down = fp_transition_nested(c2, &both, pair, tol)?;
    up.then(&down.inverse())
}

/// The transposition lift at a chart admissible for `(V,W)` and `(W,V)`.
#[derive(Clone, Debug)]
pub struct TransposeReport {
    /// `Det(T_{(V,W)}) ⊗ id : Det((X+V)∩W)⊗Det(X)* → Det((X+W)∩V)⊗Det(X)*`.
    pub lift: LineIso,
    /// Induced `Det(V,W) → Det(W,V)` on the common lines `Det(V∩W)⊗Det((V+W)⊥)*`.
    pub transposition: Scalar,
    /// Largest residual of the ladder squares.
    pub ladder_residual: f64,
}

/// `T_{(V,W)} : (X+V)∩W → (X+W)∩V`, the identity on `V∩W` and `(t₂|)⁻¹∘t₁` on the
/// orthogonal complement of `V∩W`.
pub fn transpose_lift(chart: &FpChart, pair: &FredholmPair, tol: &Tolerance) -> Result<TransposeReport> {
    let f1 = chart.frames(pair, tol)?;
    let f2 = chart.frames(&pair.transposed(), tol)?;
    let k = intersection(&pair.v, &pair.w, tol)?;
    let (a1, a2) = (f1.domain.basis(), f2.domain.basis());
    let kb = k.basis();
    // complements of V∩W inside A₁, A₂
    let c1 = a1 * complement_frame(&(a1.adjoint() * kb));
    let c2 = a2 * complement_frame(&(a2.adjoint() * kb));
    let t1c = &f1.image * (a1.adjoint() * &c1);
    let t2c = &f2.image * (a2.adjoint() * &c2);
    let x = chart.x.basis();
    // coordinates of t₂ on C₂ in X; solve t₂(c₂ y) = t₁(c₁)
    let coeff = pinv_with_floor(&(x.adjoint() * &t2c), tol, 1.0) * (x.adjoint() * &t1c);
    let on_c1 = &c2 * coeff;
    // T as an ambient map on A₁: identity on K, on_c1 on C₁
    let t_amb = kb * kb.adjoint() + &on_c1 * c1.adjoint();
    let scale = det(&(a2.adjoint() * &t_amb * a1));
    let image_t = &t_amb * a1;
    let mut residual = norm2(&(&t_amb * kb - kb));
    let t2_of_t = &f2.image * (a2.adjoint() * &image_t);
    residual = residual.max(norm2(&(t2_of_t - &f1.image)));
    residual = residual.max(norm2(&(a2 * (a2.adjoint() * &image_t) - &image_t)));
    let lift = LineIso::new(f1.iso.target.clone(), f2.iso.target.clone(), scale);
    Ok(TransposeReport {
        transposition: f1.iso.scale * scale / f2.iso.scale,
        lift,
        ladder_residual: residual,
    })
}

/// Charts for `Det` over Fredholm maps.
#[derive(Clone, Debug, PartialEq)]
pub enum FrChart {
    /// `X` in the codomain with `ran T + X` everything.
    Transversal(Subspace),
    /// `X = V_ε(TT*)`, eigenvalues of `TT*` below `ε`.
    Spectral(f64),
}

/// Separation required between `ε` and the spectrum of `T*T`.
pub const SPECTRAL_GAP: f64 = 1e-8;

/// Spectral subspaces `V_ε(T*T)`, `V_ε(TT*)`.
pub fn spectral_subspaces(t: &FredholmMap, eps: f64) -> Result<(Subspace, Subspace)> {
    let (m, n) = (t.codomain_dim(), t.domain_dim());
    let d = svd(t.data());
    let mut eig: Vec<f64> = d.s.iter().map(|s| s * s).collect();
    if m.max(n) > d.s.len() {
        eig.push(0.0);
    }
    if let Some(bad) = eig.iter().find(|&&l| (l - eps).abs() <= SPECTRAL_GAP) {
        return Err(precondition(format!("ε = {eps} is within the gap tolerance of the eigenvalue {bad}")));
    }
    let big = d.s.iter().filter(|s| *s * *s > eps).count();
    let field = t.field();
    let vd = complement_frame(&span_frame(&d.v.columns(0, big).into_owned(), big));
    let ud = complement_frame(&span_frame(&d.u.columns(0, big).into_owned(), big));
    Ok((Subspace::from_basis(field, vd), Subspace::from_basis(field, ud)))
}

/// Frames and scale of `ψ_T : Det(T) → Det(T⁻¹X)⊗Det(X)*`.
pub fn fr_chart(t: &FredholmMap, chart: &FrChart, tol: &Tolerance) -> Result<ChartFrames> {
    let m = t.codomain_dim();
    let (domain, x) = match chart {
        FrChart::Transversal(x) => {
            if x.ambient_dim() != m {
                return Err(Error::AmbientMismatch {
                    left: x.ambient_dim(),
                    right: m,
                });
            }
            let joined = hcat(&[t.data(), x.basis()]);
            if rank_with_floor(&joined, tol, t.nominal().max(1.0)) != m {
                return Err(precondition("chart domain: T is not transverse to X"));
            }
            let xp = x.complement();
            let k = kernel_frame(&(xp.basis().adjoint() * t.data()), tol, t.nominal());
            (Subspace::from_basis(t.field(), k), x.clone())
        }
        FrChart::Spectral(eps) => {
            if !(*eps >= 0.0) {
                return Err(Error::Invalid(format!("ε must be nonnegative, got {eps}")));
            }
            spectral_subspaces(t, *eps)?
        }
    };
    let image = t.data() * domain.basis();
    let iso = chart_from_frames(
        t.kernel().basis(),
        domain.basis(),
        x.basis(),
        t.cokernel().basis(),
        &image,
        tol,
    );
    Ok(ChartFrames {
        domain,
        target: x,
        image,
        iso,
    })
}

pub fn fr_chart_map(t: &FredholmMap, chart: &FrChart, tol: &Tolerance) -> Result<LineIso> {
    Ok(fr_chart(t, chart, tol)?.iso)
}

/// Direct transition between two charts at `T`.
pub fn fr_transition(t: &FredholmMap, c1: &FrChart, c2: &FrChart, tol: &Tolerance) -> Result<LineIso> {
    fr_chart_map(t, c1, tol)?.inverse().then(&fr_chart_map(t, c2, tol)?)
}

/// Closed-form transition between nested charts (`X₁ ⊂ X₂`).
pub fn fr_transition_nested(t: &FredholmMap, small: &FrChart, big: &FrChart, tol: &Tolerance) -> Result<LineIso> {
    let s = fr_chart(t, small, tol)?;
    let b = fr_chart(t, big, tol)?;
    if !contains(&b.target, &s.target, tol) {
        return Err(precondition("first chart space is not contained in the second"));
    }
    let scale = nested_scale(&s, &b)?;
    Ok(LineIso::new(s.iso.target.clone(), b.iso.target.clone(), scale))
}

/// Transition through the refinement `X₁ + X₂`.
pub fn fr_transition_via_sum(t: &FredholmMap, c1: &FrChart, c2: &FrChart, tol: &Tolerance) -> Result<LineIso> {
    let x1 = fr_chart(t, c1, tol)?.target;
    let x2 = fr_chart(t, c2, tol)?.target;
    let both = FrChart::Transversal(span_sum(&x1, &x2, tol)?);
    let up = fr_transition_nested(t, c1, &both, tol)?;
    let down = fr_transition_nested(t, c2, &both, tol)?;
    up.then(&down.inverse())
}

fn element_over(t: &FredholmMap, coeff: Scalar) -> DetElement {
    DetElement::new(map_line(t), coeff)
}

fn check_element(t: &FredholmMap, e: &DetElement) -> Result<()> {
    let expect = [t.kernel().dim(), t.cokernel().dim()];
    let ok = e.lines.len() == 2
        && !e.lines[0].dual
        && e.lines[1].dual
        && e.lines[0].space.dim() == expect[0]
        && e.lines[1].space.dim() == expect[1];
    if !ok {
        return Err(shape("element does not lie in Det(T)"));
    }
    Ok(())
}

/// The section `s(T)`: `1` on the trivial line when `T` is invertible, `0` otherwise.
pub fn section_s(t: &FredholmMap) -> DetElement {
    element_over(t, c(if t.is_invertible() { 1.0 } else { 0.0 }))
}

/// Coefficient of `ξ⊗ξ*`, for `ξ` the wedge of `frame`, against the canonical
/// generator of `Det(ker T)⊗Det(coker T)*` of a self-adjoint `T`.
pub fn selfadjoint_coefficient(t: &FredholmMap, frame: &CMat) -> Result<Scalar> {
    let h = t.data();
    if h.nrows() != h.ncols() || norm2(&(h - h.adjoint())) > 1e-10 * norm2(h).max(1.0) {
        return Err(precondition("T is not self-adjoint"));
    }
    if frame.shape() != t.kernel().basis().shape() {
        return Err(shape("frame does not span ker T"));
    }
    let k = t.kernel().basis();
    let cf = t.cokernel().basis();
    Ok(det(&(k.adjoint() * frame)) / det(&(cf.adjoint() * frame)))
}

/// The nowhere-vanishing section `1 ∈ Det(ker T)⊗Det(ker T)*` of a self-adjoint `T`.
pub fn section_selfadjoint(t: &FredholmMap) -> Result<DetElement> {
    let coeff = selfadjoint_coefficient(t, t.kernel().basis())?;
    Ok(element_over(t, coeff))
}

fn invertible(g: &Matrix, n: usize, tol: &Tolerance) -> Result<CMat> {
    if g.rows() != n || g.cols() != n {
        return Err(shape(format!("G must be {n}x{n}")));
    }
    if rank_with_floor(g.data(), tol, 0.0) < n {
        return Err(precondition("G is singular"));
    }
    g.data().clone().try_inverse().ok_or_else(|| precondition("G is singular"))
}

/// `ξ⊗η* ↦ ξ⊗(Det(G̃⁻¹))*η*` from `Det(T)` to `Det(GT)`.
pub fn gl_left_action(g: &Matrix, t: &FredholmMap, e: &DetElement, tol: &Tolerance) -> Result<(FredholmMap, DetElement)> {
    check_element(t, e)?;
    invertible(g, t.codomain_dim(), tol)?;
    let gt = Matrix::from_cmat(g.field().join(t.field()), g.data() * t.data());
    let out = fredholm_map_with_floor(&gt, tol, t.floor() * norm2(g.data()));
    let kf = det(&(out.kernel().basis().adjoint() * t.kernel().basis()));
    let cf = det(&(out.cokernel().basis().adjoint() * g.data() * t.cokernel().basis()));
    let coeff = e.coeff * kf / cf;
    let el = element_over(&out, coeff);
    Ok((out, el))
}

/// `ξ⊗η* ↦ (Det(G⁻¹)ξ)⊗η*` from `Det(T)` to `Det(TG)`.
pub fn gl_right_action(g: &Matrix, t: &FredholmMap, e: &DetElement, tol: &Tolerance) -> Result<(FredholmMap, DetElement)> {
    check_element(t, e)?;
    let gi = invertible(g, t.domain_dim(), tol)?;
    let tg = Matrix::from_cmat(g.field().join(t.field()), t.data() * g.data());
    let out = fredholm_map_with_floor(&tg, tol, t.floor() * norm2(g.data()));
    let kf = det(&(out.kernel().basis().adjoint() * gi * t.kernel().basis()));
    let cf = det(&(out.cokernel().basis().adjoint() * t.cokernel().basis()));
    let coeff = e.coeff * kf / cf;
    let el = element_over(&out, coeff);
    Ok((out, el))
}

/// `ξ⊗η* ↦ η*⊗ξ` from `Det(T)` to `Det(T*)`, with `ker T* = coker T`,
/// `coker T* = ker T` and the Riesz identification of lines with their duals.
pub fn adjoint_lift(t: &FredholmMap, e: &DetElement, tol: &Tolerance) -> Result<(FredholmMap, DetElement)> {
    check_element(t, e)?;
    let adj = t.adjoint(tol);
    let kf = det(&(adj.kernel().basis().adjoint() * t.cokernel().basis()));
    let cf = det(&(adj.cokernel().basis().adjoint() * t.kernel().basis()));
    let coeff = e.coeff.conj() * kf / cf;
    let el = element_over(&adj, coeff);
    Ok((adj, el))
}

fn pair_element_check(pair: &FredholmPair, e: &DetElement, tol: &Tolerance) -> Result<(Subspace, Subspace)> {
    let k = intersection(&pair.v, &pair.w, tol)?;
    let cf = span_sum(&pair.v, &pair.w, tol)?.complement();
    let ok = e.lines.len() == 2
        && !e.lines[0].dual
        && e.lines[1].dual
        && e.lines[0].space.dim() == k.dim()
        && e.lines[1].space.dim() == cf.dim();
    if !ok {
        return Err(shape("element does not lie in Det(V,W)"));
    }
    Ok((k, cf))
}

/// The determinant line `Det(V∩W)⊗Det((V+W)⊥)*` of a pair.
pub fn pair_line(pair: &FredholmPair, tol: &Tolerance) -> Result<Vec<DetLine>> {
    let k = intersection(&pair.v, &pair.w, tol)?;
    let cf = span_sum(&pair.v, &pair.w, tol)?.complement();
    Ok(vec![DetLine { space: k, dual: false }, DetLine { space: cf, dual: true }])
}

/// `ξ⊗η* ↦ Det(L)ξ ⊗ Det(L̃⁻¹)*η*` from `Det(V,W)` to `Det(LV,LW)`.
pub fn gl_action_fp(
    l: &Matrix,
    pair: &FredholmPair,
    e: &DetElement,
    tol: &Tolerance,
) -> Result<(FredholmPair, DetElement)> {
    let n = pair.ambient_dim();
    invertible(l, n, tol)?;
    let (k, cf) = pair_element_check(pair, e, tol)?;
    let lv = pair.v.image(l.data(), tol)?;
    let lw = pair.w.image(l.data(), tol)?;
    let moved = FredholmPair::new(lv, lw)?;
    let lines = pair_line(&moved, tol)?;
    let kf = det(&(lines[0].space.basis().adjoint() * l.data() * k.basis()));
    let cfac = det(&(lines[1].space.basis().adjoint() * l.data() * cf.basis()));
    Ok((moved, DetElement::new(lines, e.coeff * kf / cfac)))
}

/// Both evaluations of the sum lift `S(X,(V,W)) : Det(X)⊗Det(V,W) → Det(X+V, W)`.
#[derive(Clone, Debug)]
pub struct SumReport {
    pub lift: LineIso,
    /// Through the five-term sequence `0 → V∩W → (X+V)∩W → X → (V+W)⊥ → (X+V+W)⊥ → 0`.
    pub direct: Scalar,
    /// Through the composition lift of the inclusion `R` and the difference map `T`.
    pub via_composition: Scalar,
    pub rel_diff: f64,
}

/// `S(X,(V,W))`.
pub fn sum_lift(x: &Subspace, pair: &FredholmPair, tol: &Tolerance) -> Result<SumReport> {
    same_ambient(x, &pair.v)?;
    let (v, w) = (&pair.v, &pair.w);
    let xb = x.basis();
    if rank_unit(&hcat(&[xb, v.basis()]), tol) != x.dim() + v.dim() {
        return Err(precondition("X ∩ V is nonzero"));
    }
    let field = x.field().join(pair.field());
    let i = intersection(v, w, tol)?;
    let xv = span_sum(x, v, tol)?;
    let a = intersection(&xv, w, tol)?;
    let c4 = span_sum(v, w, tol)?.complement();
    let c5 = span_sum(&xv, w, tol)?.complement();

    let coef = pinv_with_floor(&hcat(&[xb, v.basis()]), tol, 1.0) * a.basis();
    let t_a = coef.rows(0, x.dim()).into_owned();
    let dims = vec![i.dim(), a.dim(), x.dim(), c4.dim(), c5.dim()];
    let maps = vec![
        a.basis().adjoint() * i.basis(),
        t_a,
        c4.basis().adjoint() * xb,
        c5.basis().adjoint() * c4.basis(),
    ];
    let seq = ExactSequence::trusted(dims, maps)?;
    let direct = phi_t_j_sigma(&seq, &SignConvention::Sum)?.scale;

    // R : V ⊕ W → (X+V) ⊕ W and T : (X+V) ⊕ W → H, (u, w) ↦ u − w
    let (k, m, p) = (v.dim(), w.dim(), xv.dim());
    let mut r = CMat::zeros(p + m, k + m);
    r.view_mut((0, 0), (p, k)).copy_from(&(xv.basis().adjoint() * v.basis()));
    r.view_mut((p, k), (m, m)).copy_from(&CMat::identity(m, m));
    let tm = hcat(&[xv.basis(), &(-w.basis())]);
    let rmap = fredholm_map_with_floor(&Matrix::from_cmat(field, r.clone()), tol, 1.0);
    let tmap = fredholm_map_with_floor(&Matrix::from_cmat(field, tm.clone()), tol, 1.0);
    let trmap = fredholm_map_with_floor(&Matrix::from_cmat(field, &tm * &r), tol, 2.0);
    let s = compose_lift_with(&rmap, &tmap, &trmap)?.scale;
    let stack = |f: &CMat, top: &CMat| {
        let mut out = CMat::zeros(p + m, f.ncols());
        out.view_mut((0, 0), (p, f.ncols())).copy_from(&(top.adjoint() * f));
        out
    };
    let emb1 = {
        let mut e = CMat::zeros(k + m, i.dim());
        e.view_mut((0, 0), (k, i.dim())).copy_from(&(v.basis().adjoint() * i.basis()));
        e.view_mut((k, 0), (m, i.dim())).copy_from(&(w.basis().adjoint() * i.basis()));
        e
    };
    let emb2 = {
        let mut e = CMat::zeros(p + m, a.dim());
        e.view_mut((0, 0), (p, a.dim())).copy_from(&(xv.basis().adjoint() * a.basis()));
        e.view_mut((p, 0), (m, a.dim())).copy_from(&(w.basis().adjoint() * a.basis()));
        e
    };
    let f1 = det(&(trmap.kernel().basis().adjoint() * emb1));
    let f2 = det(&(tmap.kernel().basis().adjoint() * emb2));
    let fx = det(&(rmap.cokernel().basis().adjoint() * stack(xb, xv.basis())));
    let f4 = det(&(trmap.cokernel().basis().adjoint() * c4.basis()));
    let f5 = det(&(tmap.cokernel().basis().adjoint() * c5.basis()));
    let via_composition = fx * f1 / f4 / s * f5 / f2;

    let lift = LineIso::new(
        vec![LineFactor::plain(x.dim()), LineFactor::plain(i.dim()), LineFactor::dual(c4.dim())],
        vec![LineFactor::plain(a.dim()), LineFactor::dual(c5.dim())],
        direct,
    );
    Ok(SumReport {
        lift,
        direct,
        via_composition,
        rel_diff: rel_diff(direct, via_composition),
    })
}

/// `g_X ∧ g_Y = w · g_{X+Y}` for `X∩Y = 0`.
pub fn wedge_factor(x: &Subspace, y: &Subspace, tol: &Tolerance) -> Result<Scalar> {
    let xy = span_sum(x, y, tol)?;
    if xy.dim() != x.dim() + y.dim() {
        return Err(precondition("X ∩ Y is nonzero"));
    }
    Ok(det(&(xy.basis().adjoint() * hcat(&[x.basis(), y.basis()]))))
}

/// The two sides of the associativity square for the sum lift.
#[derive(Clone, Debug)]
pub struct SumAssocReport {
    /// `S(Y,(V,W)) · S(X,(Y+V,W))`.
    pub nested: Scalar,
    /// `w(X,Y) · S(X+Y,(V,W))`.
    pub joined: Scalar,
    pub rel_diff: f64,
}

pub fn sum_assoc_check(x: &Subspace, y: &Subspace, pair: &FredholmPair, tol: &Tolerance) -> Result<SumAssocReport> {
    let xy = span_sum(x, y, tol)?;
    if xy.dim() != x.dim() + y.dim() {
        return Err(precondition("X ∩ Y is nonzero"));
    }
    if rank_unit(&hcat(&[xy.basis(), pair.v.basis()]), tol) != xy.dim() + pair.v.dim() {
        return Err(precondition("(X + Y) ∩ V is nonzero"));
    }
    let yv = span_sum(y, &pair.v, tol)?;
    let inner = sum_lift(y, pair, tol)?.direct;
    let outer = sum_lift(x, &FredholmPair::new(yv, pair.w.clone())?, tol)?.direct;
    let joined = wedge_factor(x, y, tol)? * sum_lift(&xy, pair, tol)?.direct;
    let nested = inner * outer;
    Ok(SumAssocReport {
        nested,
        joined,
        rel_diff: rel_diff(nested, joined),
    })
}

/// Both sides of `(g_X∧g_Y)∧g_Z = g_X∧(g_Y∧g_Z)` through canonical generators of the sums.
pub fn wedge_square_check(x: &Subspace, y: &Subspace, z: &Subspace, tol: &Tolerance) -> Result<(Scalar, Scalar)> {
    let xy = span_sum(x, y, tol)?;
    let yz = span_sum(y, z, tol)?;
    let left = wedge_factor(x, y, tol)? * wedge_factor(&xy, z, tol)?;
    let right = wedge_factor(y, z, tol)? * wedge_factor(x, &yz, tol)?;
    Ok((left, right))
}

/// The fiber `Det(W∩V⊥)⊗Det((W+V⊥)⊥)*` over the pair `(W, V⊥)`, and the two
/// summands of its presentation `Det((W∩V⊥)⊕(W⊥∩V))`.
#[derive(Clone, Debug)]
pub struct GrcLine {
    pub lines: Vec<DetLine>,
    /// `W∩V⊥`.
    pub first: Subspace,
    /// `W⊥∩V`.
    pub second: Subspace,
}

impl GrcLine {
    pub fn dims(&self) -> (usize, usize) {
        (self.first.dim(), self.second.dim())
    }
}

pub fn grc_detline(w: &Subspace, v: &Subspace, tol: &Tolerance) -> Result<GrcLine> {
    same_ambient(w, v)?;
    let vp = v.complement();
    let first = intersection(w, &vp, tol)?;
    let second = intersection(&w.complement(), v, tol)?;
    let lines = pair_line(&FredholmPair::new(w.clone(), vp)?, tol)?;
    Ok(GrcLine { lines, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invertible_map_has_unit_section() {
        let t = crate::fredholm::fredholm_map(&Matrix::identity(3, crate::Field::Real), &Tolerance::default());
        assert_eq!(section_s(&t).coeff, c(1.0));
        let z = crate::fredholm::fredholm_map(&Matrix::real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap(), &Tolerance::default());
        assert!(section_s(&z).is_zero());
    }

    #[test]
    fn diagonal_spectral_chart() {
        let tol = Tolerance::default();
        let t = crate::fredholm::fredholm_map(&Matrix::real(2, 2, &[2.0, 0.0, 0.0, 0.1]).unwrap(), &tol);
        let f = fr_chart(&t, &FrChart::Spectral(0.5), &tol).unwrap();
        assert_eq!(f.domain.dim(), 1);
        assert!((f.domain.basis()[(1, 0)].re - 1.0).abs() < 1e-14);
        assert!((f.iso.scale - c(10.0)).norm() < 1e-12);
    }

    #[test]
    fn epsilon_on_the_spectrum_is_rejected() {
        let tol = Tolerance::default();
        let t = crate::fredholm::fredholm_map(&Matrix::real(2, 2, &[2.0, 0.0, 0.0, 0.1]).unwrap(), &tol);
        assert!(fr_chart(&t, &FrChart::Spectral(0.01), &tol).is_err());
    }
}
