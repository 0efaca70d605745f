//! Determinant lines of finite-dimensional spaces and the isomorphisms induced by
//! exact sequences, with their sign conventions.
//!
//! Elements of a determinant line are coefficients against the canonical generator,
//! the ordered wedge of a frame's columns. A dual line uses the dual generator. Every
//! isomorphism between tensor products of such lines is therefore a single scalar,
//! its *scale*.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{precondition, shape, Error, Result};
use crate::fredholm::{fredholm_map_with_floor, FredholmMap};
use crate::grassmann::Subspace;
use crate::numcore::{
    c, complement_frame, coords, det, hcat, norm2, pinv_with_floor, rank_with_floor, rel_diff, span_frame, svd, CMat,
    Field, Matrix, Scalar, Tolerance,
};

/// Dimension and variance of one tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineFactor {
    pub dim: usize,
    pub dual: bool,
}

impl LineFactor {
    pub fn plain(dim: usize) -> Self {
        LineFactor { dim, dual: false }
    }

    pub fn dual(dim: usize) -> Self {
        LineFactor { dim, dual: true }
    }
}

/// An isomorphism between tensor products of determinant lines, given by the
/// coefficient it assigns to the source generator against the target generator.
#[derive(Clone, Debug, PartialEq)]
pub struct LineIso {
    pub source: Vec<LineFactor>,
    pub target: Vec<LineFactor>,
    pub scale: Scalar,
}

impl LineIso {
    pub fn new(source: Vec<LineFactor>, target: Vec<LineFactor>, scale: Scalar) -> Self {
        LineIso { source, target, scale }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &LineIso) -> Result<LineIso> {
        if self.target != next.source {
            return Err(shape("line isomorphisms do not compose: factor lists differ"));
        }
        Ok(LineIso::new(self.source.clone(), next.target.clone(), self.scale * next.scale))
    }

    pub fn inverse(&self) -> LineIso {
        LineIso::new(self.target.clone(), self.source.clone(), c(1.0) / self.scale)
    }

    pub fn apply(&self, coeff: Scalar) -> Scalar {
        coeff * self.scale
    }
}

/// `Det(X)` or its dual for a concrete subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct DetLine {
    pub space: Subspace,
    pub dual: bool,
}

impl DetLine {
    pub fn factor(&self) -> LineFactor {
        LineFactor {
            dim: self.space.dim(),
            dual: self.dual,
        }
    }
}

/// A multiple of the canonical generator of a tensor product of lines.
#[derive(Clone, Debug, PartialEq)]
pub struct DetElement {
    pub lines: Vec<DetLine>,
    pub coeff: Scalar,
}

impl DetElement {
    pub fn new(lines: Vec<DetLine>, coeff: Scalar) -> Self {
        DetElement { lines, coeff }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == c(0.0)
    }
}

/// `Det(T) = Det(ker T) ⊗ Det(coker T)*`.
pub fn map_line(t: &FredholmMap) -> Vec<DetLine> {
    vec![
        DetLine {
            space: t.kernel().clone(),
            dual: false,
        },
        DetLine {
            space: t.cokernel().clone(),
            dual: true,
        },
    ]
}

fn map_factors(t: &FredholmMap) -> Vec<LineFactor> {
    vec![LineFactor::plain(t.kernel().dim()), LineFactor::dual(t.cokernel().dim())]
}

/// Coefficient of `b₁ ∧ b₂ ∧ …` against the generator of `target`, where the blocks
/// are columns lying in the span of the orthonormal `target`.
pub fn wedge_coefficient(target: &CMat, blocks: &[&CMat]) -> Scalar {
    det(&(target.adjoint() * hcat(blocks)))
}

/// `Λ_max(T)` applied to an element of `Det(X)`; zero when dimensions differ.
pub fn det_push(t: &Matrix, e: &DetElement, target: &Subspace) -> Result<DetElement> {
    let [line] = e.lines.as_slice() else {
        return Err(Error::Invalid("det_push expects a single line".into()));
    };
    if line.dual {
        return Err(Error::Invalid("det_push acts on non-dual lines".into()));
    }
    let src = &line.space;
    if t.cols() != src.ambient_dim() || t.rows() != target.ambient_dim() {
        return Err(shape(format!(
            "map is {}x{}, spaces live in dimensions {} and {}",
            t.rows(),
            t.cols(),
            src.ambient_dim(),
            target.ambient_dim()
        )));
    }
    let out = DetLine {
        space: target.clone(),
        dual: false,
    };
    if src.dim() != target.dim() {
        return Ok(DetElement::new(vec![out], c(0.0)));
    }
    let m = target.basis().adjoint() * t.data() * src.basis();
    Ok(DetElement::new(vec![out], e.coeff * det(&m)))
}

/// A finite exact sequence `0 → X₁ → … → X_n → 0` in frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSequence {
    dims: Vec<usize>,
    maps: Vec<CMat>,
}

impl ExactSequence {
    /// Checks shapes and exactness: the first map is injective, the last surjective,
    /// consecutive maps compose to zero and `dim ker T_{i+1} = rank T_i`.
    pub fn new(dims: Vec<usize>, maps: Vec<CMat>, tol: &Tolerance) -> Result<Self> {
        let seq = ExactSequence::trusted(dims, maps)?;
        seq.check_exact(tol)?;
        Ok(seq)
    }

    /// Maps between subspaces, given as ambient matrices, expressed in their frames.
    pub fn from_subspaces(spaces: &[Subspace], maps: &[Matrix], tol: &Tolerance) -> Result<Self> {
        if maps.len() + 1 != spaces.len() {
            return Err(shape("need one map fewer than spaces"));
        }
        let mut coords = Vec::with_capacity(maps.len());
        for (i, m) in maps.iter().enumerate() {
            let (a, b) = (&spaces[i], &spaces[i + 1]);
            if m.cols() != a.ambient_dim() || m.rows() != b.ambient_dim() {
                return Err(shape(format!("map {} does not fit its spaces", i + 1)));
            }
            coords.push(b.basis().adjoint() * m.data() * a.basis());
        }
        ExactSequence::new(spaces.iter().map(|s| s.dim()).collect(), coords, tol)
    }

    pub(crate) fn trusted(dims: Vec<usize>, maps: Vec<CMat>) -> Result<Self> {
        if dims.len() < 2 || maps.len() + 1 != dims.len() {
            return Err(shape("an exact sequence needs at least two spaces and one map between neighbours"));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.shape() != (dims[i + 1], dims[i]) {
                return Err(shape(format!(
                    "map {} is {}x{}, expected {}x{}",
                    i + 1,
                    m.nrows(),
                    m.ncols(),
                    dims[i + 1],
                    dims[i]
                )));
            }
        }
        Ok(ExactSequence { dims, maps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[CMat] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn field(&self) -> Field {
        self.maps.iter().fold(Field::Real, |f, m| f.join(Field::detect(m)))
    }

    /// Ranks forced by exactness: `r₁ = d₁`, `r_i = d_i − r_{i−1}`.
    pub fn ranks(&self) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(self.maps.len());
        let mut prev = 0usize;
        for (i, &d) in self.dims.iter().enumerate().take(self.maps.len()) {
            let r = d.checked_sub(prev).ok_or_else(|| inexact(i + 1))?;
            out.push(r);
            prev = r;
        }
        if prev != *self.dims.last().unwrap_or(&0) {
            return Err(inexact(self.dims.len()));
        }
        Ok(out)
    }

    fn check_exact(&self, tol: &Tolerance) -> Result<()> {
        let ranks = self.ranks()?;
        for (i, m) in self.maps.iter().enumerate() {
            if rank_with_floor(m, tol, 0.0) != ranks[i] {
                return Err(inexact(i + 1));
            }
            if let Some(next) = self.maps.get(i + 1) {
                let p = next * m;
                let scale = norm2(next) * norm2(m);
                if p.nrows() * p.ncols() > 0 && norm2(&p) > tol.rank_rel_tol * scale.max(1.0) * 1e2 {
                    return Err(inexact(i + 2));
                }
            }
        }
        Ok(())
    }
}

fn inexact(position: usize) -> Error {
    precondition(format!("sequence is not exact at position {position}"))
}

/// Maps `S_i : X_{i+1} → X_i` with `T_{i−1}S_{i−1} + S_i T_i = I` on every `X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    pub maps: Vec<CMat>,
}

/// Pseudoinverse keeping exactly the `r` largest singular values.
fn pinv_rank(m: &CMat, r: usize) -> CMat {
    let d = svd(m);
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for i in 0..r.min(d.s.len()) {
        out += (d.v.column(i) * d.u.column(i).adjoint()) * c(1.0 / d.s[i]);
    }
    out
}

/// Splitting whose complements are orthogonal: `S_i` is the pseudoinverse of `T_i`.
pub fn orthogonal_splitting(seq: &ExactSequence) -> Result<Splitting> {
    let ranks = seq.ranks()?;
    Ok(Splitting {
        maps: seq.maps.iter().zip(&ranks).map(|(m, &r)| pinv_rank(m, r)).collect(),
    })
}

/// Splitting from arbitrary complements: `complements[i]` is a basis (columns, in
/// `X_i` coordinates) of a complement of `ker T_i`, one per map.
pub fn splitting_from_complements(seq: &ExactSequence, complements: &[CMat]) -> Result<Splitting> {
    let ranks = seq.ranks()?;
    if complements.len() != seq.maps.len() {
        return Err(shape("one complement per map is required"));
    }
    for (i, v) in complements.iter().enumerate() {
        if v.shape() != (seq.dims[i], ranks[i]) {
            return Err(shape(format!("complement {} has the wrong shape", i + 1)));
        }
    }
    let mut maps = Vec::with_capacity(seq.maps.len());
    for i in 0..seq.maps.len() {
        let image = &seq.maps[i] * &complements[i];
        let next = complements
            .get(i + 1)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(seq.dims[i + 1], 0));
        let basis = hcat(&[&image, &next]);
        let zero = CMat::zeros(seq.dims[i], next.ncols());
        let lhs = hcat(&[&complements[i], &zero]);
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| precondition(format!("complement {} is not transverse to the kernel", i + 1)))?;
        maps.push(lhs * inv);
    }
    Ok(Splitting { maps })
}

/// Largest residual of `T_{i−1}S_{i−1} + S_i T_i − I` over all `X_i`.
pub fn splitting_residual(seq: &ExactSequence, s: &Splitting) -> f64 {
    let n = seq.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let d = seq.dims[i];
        let mut acc = -CMat::identity(d, d);
        if i > 0 {
            acc += &seq.maps[i - 1] * &s.maps[i - 1];
        }
        if i < n - 1 {
            acc += &s.maps[i] * &seq.maps[i];
        }
        worst = worst.max(norm2(&acc));
    }
    worst
}

/// `det Φ` for `Φ = ⊕_{odd}(T_i + S_i)`, mapping odd-position spaces (1-based) to
/// even-position ones.
pub fn phi_scale(seq: &ExactSequence, s: &Splitting) -> Result<Scalar> {
    let n = seq.len();
    let mut col_off = vec![0usize; n];
    let mut row_off = vec![0usize; n];
    let (mut cols, mut rows) = (0, 0);
    for i in 0..n {
        if i % 2 == 0 {
            col_off[i] = cols;
            cols += seq.dims[i];
        } else {
            row_off[i] = rows;
            rows += seq.dims[i];
        }
    }
    if rows != cols {
        return Err(precondition("odd and even dimensions do not balance"));
    }
    let mut phi = CMat::zeros(rows, cols);
    for i in (0..n).step_by(2) {
        let w = seq.dims[i];
        if i + 1 < n {
            let m = &seq.maps[i];
            let mut blk = phi.view_mut((row_off[i + 1], col_off[i]), (seq.dims[i + 1], w));
            blk += m;
        }
        if i > 0 {
            let m = &s.maps[i - 1];
            let mut blk = phi.view_mut((row_off[i - 1], col_off[i]), (seq.dims[i - 1], w));
            blk += m;
        }
    }
    Ok(det(&phi))
}

fn factors_by_parity(dims: &[usize], odd: bool) -> Vec<LineFactor> {
    dims.iter()
        .enumerate()
        .filter(|(i, _)| (i % 2 == 0) == odd)
        .map(|(_, &d)| LineFactor::plain(d))
        .collect()
}

/// `φ_T : ⊗_{odd} Det(X_i) → ⊗_{even} Det(X_i)` (positions counted from 1).
pub fn phi_t(seq: &ExactSequence) -> Result<LineIso> {
    let s = orthogonal_splitting(seq)?;
    Ok(LineIso::new(
        factors_by_parity(&seq.dims, true),
        factors_by_parity(&seq.dims, false),
        phi_scale(seq, &s)?,
    ))
}

/// A choice of the index set `J` of factors moved across by duality, and of the
/// sign `σ` on dimension vectors.
#[derive(Clone, Debug)]
pub enum SignConvention {
    /// `J` = odd positions, `σ ≡ 1`: plain `φ_T`.
    Plain,
    /// Four-term kernel/cokernel sequence: `J = {1,4}`, `σ = (−1)^{d₄(d₃−d₄)}`.
    Psi,
    /// Six-term composition sequence: `J = {1,3,4,6}`, `σ = (−1)^{d₄(d₂−d₁)+d₆(d₅−d₆)}`.
    Composition,
    /// Five-term sum sequence: `J = {1,3,4}`, `σ = (−1)^{d₃d₁+d₅(d₄−d₅)}`.
    Sum,
    /// Any other choice; `sigma` returns `true` for a minus sign.
    Custom { j: Vec<usize>, sigma: fn(&[usize]) -> bool },
}

fn parity(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

impl SignConvention {
    /// The index set `J` (1-based) for a sequence of `n` spaces.
    pub fn j(&self, n: usize) -> Vec<usize> {
        match self {
            SignConvention::Plain => (1..=n).step_by(2).collect(),
            SignConvention::Psi => vec![1, 4],
            SignConvention::Composition => vec![1, 3, 4, 6],
            SignConvention::Sum => vec![1, 3, 4],
            SignConvention::Custom { j, .. } => j.clone(),
        }
    }

    /// Required sequence length, if fixed.
    pub fn arity(&self) -> Option<usize> {
        match self {
            SignConvention::Psi => Some(4),
            SignConvention::Composition => Some(6),
            SignConvention::Sum => Some(5),
            _ => None,
        }
    }

    /// `σ(d) ∈ {+1, −1}`.
    pub fn sign(&self, dims: &[usize]) -> f64 {
        let d = |i: usize| dims[i - 1] as i64;
        let negative = match self {
            SignConvention::Plain => false,
            SignConvention::Psi => parity(d(4) * (d(3) - d(4))),
            SignConvention::Composition => parity(d(4) * (d(2) - d(1)) + d(6) * (d(5) - d(6))),
            SignConvention::Sum => parity(d(3) * d(1) + d(5) * (d(4) - d(5))),
            SignConvention::Custom { sigma, .. } => sigma(dims),
        };
        if negative {
            -1.0
        } else {
            1.0
        }
    }
}

/// `φ_T^{J,σ}`: factors with index in `J` cross sides as duals; the scale is `σ`
/// times the scale of `φ_T` (pairings against dual generators contribute 1).
pub fn phi_t_j_sigma(seq: &ExactSequence, conv: &SignConvention) -> Result<LineIso> {
    if let Some(n) = conv.arity() {
        if seq.len() != n {
            return Err(shape(format!("convention needs {n} spaces, sequence has {}", seq.len())));
        }
    }
    let j = conv.j(seq.len());
    let mut source = Vec::new();
    let mut target = Vec::new();
    for (i, &d) in seq.dims.iter().enumerate() {
        let pos = i + 1;
        let odd = pos % 2 == 1;
        let moved = j.contains(&pos);
        match (odd, moved) {
            (true, false) => source.push(LineFactor::plain(d)),
            (false, true) => source.push(LineFactor::dual(d)),
            (false, false) => target.push(LineFactor::plain(d)),
            (true, true) => target.push(LineFactor::dual(d)),
        }
    }
    let s = orthogonal_splitting(seq)?;
    Ok(LineIso::new(source, target, c(conv.sign(&seq.dims)) * phi_scale(seq, &s)?))
}

/// The four-term sequence `0 → ker T → X → Y → coker T → 0`.
pub fn kernel_cokernel_sequence(t: &FredholmMap) -> Result<ExactSequence> {
    let k = t.kernel().basis().clone();
    let cfr = t.cokernel().basis().adjoint();
    ExactSequence::trusted(
        vec![t.kernel().dim(), t.domain_dim(), t.codomain_dim(), t.cokernel().dim()],
        vec![k, t.data().clone(), cfr],
    )
}

/// Scale of the canonical isomorphism for `0 → A →ⁱ X →ᵗ Y →ᵖ B → 0`:
/// `α ⊗ (p_*γ)* ↦ (i_*α ∧ β) ⊗ (γ ∧ t_*β)*` with `β` spanning the orthogonal complement
/// of `ran i`. All arguments are in frame coordinates; `i` has full column rank.
pub fn four_term_scale(i: &CMat, t: &CMat, p: &CMat, tol: &Tolerance) -> Scalar {
    let ran = span_frame(i, i.ncols());
    let beta = complement_frame(&ran);
    let gamma = pinv_with_floor(p, tol, 1.0);
    det(&hcat(&[i, &beta])) / det(&hcat(&[&gamma, &(t * &beta)]))
}

/// `ψ_T : Det(ker T) ⊗ Det(coker T)* → Det(X) ⊗ Det(Y)*`.
pub fn psi_t(t: &FredholmMap, tol: &Tolerance) -> LineIso {
    let scale = psi_scale_with_frames(t.data(), t.kernel().basis(), t.cokernel().basis(), tol);
    LineIso::new(
        map_factors(t),
        vec![LineFactor::plain(t.domain_dim()), LineFactor::dual(t.codomain_dim())],
        scale,
    )
}

/// `ψ_T` scale with explicitly chosen orthonormal kernel and cokernel frames.
pub fn psi_scale_with_frames(t: &CMat, kernel: &CMat, cokernel: &CMat, tol: &Tolerance) -> Scalar {
    four_term_scale(kernel, t, &cokernel.adjoint(), tol)
}

/// Block data `X = X₀ ⊕ Z`, `Y = Y₀ ⊕ Z`: the leading `x0` coordinates of the domain
/// and `y0` of the codomain span `X₀` and `Y₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSplit {
    pub x0: usize,
    pub y0: usize,
}

/// Both evaluations of `ψ_T ∘ ψ_{T₀}⁻¹` for a block upper-triangular `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionReport {
    /// `det(Q T|_Z)`.
    pub closed_form: Scalar,
    /// `ψ_T` and `ψ_{T₀}` composed through the inclusions of kernels and cokernels.
    pub composed: Scalar,
    pub rel_diff: f64,
}

/// Compatibility of `ψ` with restriction to `T₀ = T|_{X₀} : X₀ → Y₀`.
pub fn restriction_compat(t: &Matrix, split: BlockSplit, tol: &Tolerance) -> Result<RestrictionReport> {
    let (m, n) = (t.rows(), t.cols());
    let BlockSplit { x0, y0 } = split;
    if x0 > n || y0 > m || n - x0 != m - y0 {
        return Err(shape("block sizes do not describe X₀⊕Z → Y₀⊕Z"));
    }
    let z = n - x0;
    let data = t.data();
    let lower = data.view((y0, 0), (z, x0)).into_owned();
    let scale = norm2(data).max(1.0);
    if norm2(&lower) > 1e-10 * scale {
        return Err(precondition("T does not map X₀ into Y₀"));
    }
    let qz = data.view((y0, x0), (z, z)).into_owned();
    if rank_with_floor(&qz, tol, 0.0) < z {
        return Err(precondition("the Z-block of T is singular"));
    }
    let closed_form = det(&qz);
    let full = fredholm_map_with_floor(t, tol, 0.0);
    let t0 = Matrix::from_cmat(t.field(), data.view((0, 0), (y0, x0)).into_owned());
    let part = fredholm_map_with_floor(&t0, tol, norm2(data));
    if full.kernel().dim() != part.kernel().dim() || full.cokernel().dim() != part.cokernel().dim() {
        return Err(precondition("kernel or cokernel changes under restriction"));
    }
    let ek = CMat::identity(n, x0);
    let ec = CMat::identity(m, y0);
    let iota_k = det(&(full.kernel().basis().adjoint() * &ek * part.kernel().basis()));
    let iota_c = det(&(full.cokernel().basis().adjoint() * &ec * part.cokernel().basis()));
    let s_full = psi_t(&full, tol).scale;
    let s_part = psi_t(&part, tol).scale;
    let composed = s_part * iota_c / (s_full * iota_k);
    Ok(RestrictionReport {
        closed_form,
        composed,
        rel_diff: rel_diff(closed_form, composed),
    })
}

/// `ψ_{T*}` against `ψ_T` under `ker T* = coker T` and `coker T* ≅ ker T`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointReport {
    pub psi: Scalar,
    pub psi_adjoint: Scalar,
    /// `|ψ_{T*} − conj ψ_T|`, relative.
    pub residual: f64,
}

/// Checks `s(ψ_{T*}) = conj(s(ψ_T))`, where the kernel and cokernel of `T*` carry
/// the frames of the cokernel and kernel of `T`, and functionals on `ker T` are
/// represented through the inner product.
pub fn adjoint_identity_check(t: &FredholmMap, tol: &Tolerance) -> AdjointReport {
    let psi = psi_t(t, tol).scale;
    let adj = t.data().adjoint();
    let psi_adjoint = psi_scale_with_frames(&adj, t.cokernel().basis(), t.kernel().basis(), tol);
    AdjointReport {
        psi,
        psi_adjoint,
        residual: rel_diff(psi.conj(), psi_adjoint),
    }
}

/// `TS` as a Fredholm map, rank-tested against `‖T‖‖S‖`.
pub fn compose_maps(s: &FredholmMap, t: &FredholmMap, tol: &Tolerance) -> Result<FredholmMap> {
    if s.codomain_dim() != t.domain_dim() {
        return Err(shape(format!(
            "cannot compose: S maps into dimension {}, T starts from {}",
            s.codomain_dim(),
            t.domain_dim()
        )));
    }
    let ts = Matrix::from_cmat(s.field().join(t.field()), t.data() * s.data());
    Ok(fredholm_map_with_floor(&ts, tol, s.nominal() * t.nominal()))
}

/// The six-term sequence `0 → ker S → ker TS → ker T → coker S → coker TS → coker T → 0`.
pub fn composition_sequence(s: &FredholmMap, t: &FredholmMap, ts: &FredholmMap) -> Result<ExactSequence> {
    let (k1, k2, k3) = (s.kernel().basis(), ts.kernel().basis(), t.kernel().basis());
    let (c4, c5, c6) = (s.cokernel().basis(), ts.cokernel().basis(), t.cokernel().basis());
    let maps = vec![
        k2.adjoint() * k1,
        coords(k3, s.data(), k2),
        c4.adjoint() * k3,
        coords(c5, t.data(), c4),
        c6.adjoint() * c5,
    ];
    let dims = vec![k1.ncols(), k2.ncols(), k3.ncols(), c4.ncols(), c5.ncols(), c6.ncols()];
    ExactSequence::trusted(dims, maps)
}

/// The composition lift `Det(S) ⊗ Det(T) → Det(TS)`.
pub fn compose_lift(s: &FredholmMap, t: &FredholmMap, tol: &Tolerance) -> Result<LineIso> {
    let ts = compose_maps(s, t, tol)?;
    compose_lift_with(s, t, &ts)
}

pub(crate) fn compose_lift_with(s: &FredholmMap, t: &FredholmMap, ts: &FredholmMap) -> Result<LineIso> {
    let seq = composition_sequence(s, t, ts)?;
    let iso = phi_t_j_sigma(&seq, &SignConvention::Composition)?;
    let mut source = map_factors(s);
    source.extend(map_factors(t));
    Ok(LineIso::new(source, map_factors(ts), iso.scale))
}

/// The two ways around the associativity square for `T₃T₂T₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssocReport {
    /// `s(T₂,T₃) · s(T₁, T₃T₂)`.
    pub left: Scalar,
    /// `s(T₁,T₂) · s(T₂T₁, T₃)`.
    pub right: Scalar,
    pub rel_diff: f64,
}

pub fn assoc_check(t1: &FredholmMap, t2: &FredholmMap, t3: &FredholmMap, tol: &Tolerance) -> Result<AssocReport> {
    let t32 = compose_maps(t2, t3, tol)?;
    let t21 = compose_maps(t1, t2, tol)?;
    let t321 = compose_maps(t1, &t32, tol)?;
    let left = compose_lift_with(t2, t3, &t32)?.scale * compose_lift_with(t1, &t32, &t321)?.scale;
    let right = compose_lift_with(t1, t2, &t21)?.scale * compose_lift_with(&t21, t3, &t321)?.scale;
    Ok(AssocReport {
        left,
        right,
        rel_diff: rel_diff(left, right),
    })
}

/// Block dimensions `d_{hk}`, `1 ≤ h ≤ k ≤ 4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BlockDims {
    d: [[usize; 4]; 4],
}

/// Positions `(h,k)` with `h ≤ k`, in lexicographic order.
pub const POSITIONS: [(usize, usize); 10] =
    [(1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4), (3, 3), (3, 4), (4, 4)];

/// The four index triples `i < j < l` in `{1,2,3,4}`.
pub const TRIPLES: [(usize, usize, usize); 4] = [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)];

impl BlockDims {
    pub fn get(&self, h: usize, k: usize) -> usize {
        if (1..=4).contains(&h) && (h..=4).contains(&k) {
            self.d[h - 1][k - 1]
        } else {
            0
        }
    }

    pub fn set(&mut self, h: usize, k: usize, v: usize) -> Result<()> {
        if !((1..=4).contains(&h) && (h..=4).contains(&k)) {
            return Err(Error::Invalid(format!("({h},{k}) is not a block position")));
        }
        self.d[h - 1][k - 1] = v;
        Ok(())
    }

    pub fn total(&self) -> usize {
        POSITIONS.iter().map(|&(h, k)| self.get(h, k)).sum()
    }

    /// `H_i = ⊕_{h ≤ i ≤ k} H_{hk}` as ordered `(position, size)` blocks.
    pub fn blocks(&self, i: usize) -> Vec<((usize, usize), usize)> {
        POSITIONS
            .iter()
            .filter(|&&(h, k)| h <= i && i <= k)
            .map(|&(h, k)| ((h, k), self.get(h, k)))
            .collect()
    }
}

fn check_triple(i: usize, j: usize, l: usize) -> Result<()> {
    if !(1 <= i && i < j && j < l && l <= 4) {
        return Err(Error::Invalid(format!("need 1 ≤ i < j < l ≤ 4, got ({i},{j},{l})")));
    }
    Ok(())
}

/// `σ(i,j,l) mod 2` from the closed dimension sums `σ₀ … σ₄`.
pub fn appendix_b_sign(i: usize, j: usize, l: usize, dims: &BlockDims) -> Result<u8> {
    check_triple(i, j, l)?;
    Ok(sigma_terms(i, j, l, dims).iter().sum::<usize>() as u8 % 2)
}

/// The five partial sums `σ₀ … σ₄` (not reduced).
pub fn sigma_terms(i: usize, j: usize, l: usize, dims: &BlockDims) -> [usize; 5] {
    let d = |h: usize, k: usize| if (h, k) == (1, 4) { 0 } else { dims.get(h, k) };
    let mut s = [0usize; 5];
    for h in 1..=i {
        for k in j..l {
            for hp in i + 1..=j {
                for kp in l..=4 {
                    s[0] += d(h, k) * d(hp, kp);
                }
            }
        }
    }
    for h in 1..=i {
        for hp in h + 1..=i {
            for k in j..l {
                for kp in i..j {
                    s[1] += d(h, k) * d(hp, kp);
                }
            }
        }
    }
    for h in 1..=i {
        for hp in i + 1..=j {
            for k in j..l {
                for kp in j..l {
                    s[2] += d(h, k) * d(hp, kp);
                }
            }
        }
    }
    for h in i + 1..=j {
        for hp in h + 1..=j {
            for k in l..=4 {
                for kp in j..l {
                    s[3] += d(h, k) * d(hp, kp);
                }
            }
        }
    }
    for h in i + 1..=j {
        for hp in j + 1..=l {
            for k in l..=4 {
                for kp in l..=4 {
                    s[4] += d(h, k) * d(hp, kp);
                }
            }
        }
    }
    s
}

/// Sum of the four signs; the identity says it is even.
pub fn appendix_b_total(dims: &BlockDims) -> u8 {
    TRIPLES
        .iter()
        .map(|&(i, j, l)| appendix_b_sign(i, j, l, dims).unwrap_or(0))
        .sum::<u8>()
        % 2
}

/// Checks the mod-2 identity on every table with entries in `{0,1,2}` at the nine
/// positions other than `(1,4)`. Returns `(tables, failures)`.
pub fn appendix_b_exhaustive() -> (usize, usize) {
    let free: Vec<(usize, usize)> = POSITIONS.iter().copied().filter(|&p| p != (1, 4)).collect();
    let mut failures = 0;
    let total = 3usize.pow(free.len() as u32);
    for code in 0..total {
        let mut dims = BlockDims::default();
        let mut rest = code;
        for &(h, k) in &free {
            dims.d[h - 1][k - 1] = rest % 3;
            rest /= 3;
        }
        if appendix_b_total(&dims) != 0 {
            failures += 1;
        }
    }
    (total, failures)
}

/// `T_{ij} : H_i → H_j`, the identity on the blocks `H_{hk}` with `h ≤ i` and `k ≥ j`
/// and zero elsewhere.
pub fn block_map(dims: &BlockDims, i: usize, j: usize) -> CMat {
    let src = dims.blocks(i);
    let dst = dims.blocks(j);
    let rows: usize = dst.iter().map(|b| b.1).sum();
    let cols: usize = src.iter().map(|b| b.1).sum();
    let mut m = CMat::zeros(rows, cols);
    let offset = |list: &[((usize, usize), usize)], p: (usize, usize)| {
        let mut o = 0;
        for &(q, sz) in list {
            if q == p {
                return Some(o);
            }
            o += sz;
        }
        None
    };
    for &((h, k), sz) in &src {
        if h <= i && k >= j {
            if let (Some(a), Some(b)) = (offset(&src, (h, k)), offset(&dst, (h, k))) {
                for t in 0..sz {
                    m[(b + t, a + t)] = c(1.0);
                }
            }
        }
    }
    m
}

/// Per-triple numeric sign of the composition lift against the closed formula.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleSign {
    pub triple: (usize, usize, usize),
    pub formula: u8,
    pub numeric: Scalar,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppendixBReport {
    pub triples: Vec<TripleSign>,
    pub assoc_rel_diff: f64,
    pub pass: bool,
}

/// Builds the block spaces and maps, evaluates the composition lifts and the
/// associativity square, and compares signs with [`appendix_b_sign`].
pub fn appendix_b_model(dims: &BlockDims, tol: &Tolerance) -> Result<AppendixBReport> {
    if dims.total() > 24 {
        return Err(precondition(format!("block model too large: total dimension {} > 24", dims.total())));
    }
    let map = |i: usize, j: usize| {
        fredholm_map_with_floor(&Matrix::from_cmat(Field::Real, block_map(dims, i, j)), tol, 1.0)
    };
    let mut triples = Vec::with_capacity(4);
    for &(i, j, l) in &TRIPLES {
        let s = compose_lift(&map(i, j), &map(j, l), tol)?.scale;
        let formula = appendix_b_sign(i, j, l, dims)?;
        let expected = if formula == 1 { -1.0 } else { 1.0 };
        triples.push(TripleSign {
            triple: (i, j, l),
            formula,
            numeric: s,
            agrees: rel_diff(c(expected), s) < 1e-9,
        });
    }
    let assoc = assoc_check(&map(1, 2), &map(2, 3), &map(3, 4), tol)?;
    let pass = triples.iter().all(|t| t.agrees) && assoc.rel_diff < 1e-8;
    Ok(AppendixBReport {
        triples,
        assoc_rel_diff: assoc.rel_diff,
        pass,
    })
}
