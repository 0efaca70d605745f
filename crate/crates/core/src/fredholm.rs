//! Fredholm pairs and Fredholm maps at finite dimension: indices, relative
//! dimension, kernels and cokernels, additivity and kernel/range duality.
//!
//! Every pair of subspaces of a finite-dimensional space is Fredholm and every pair
//! is a compact perturbation of every other, so these operations accept all inputs.

use crate::error::Result;
use crate::grassmann::{intersection, same_ambient, span_sum, Subspace};
use crate::numcore::{
    hcat, kernel_frame, norm2, range_and_cokernel_frames, rank_with_floor, CMat, Field, Matrix, Tolerance,
};

/// Two subspaces of one ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct FredholmPair {
    pub v: Subspace,
    pub w: Subspace,
}

impl FredholmPair {
    pub fn new(v: Subspace, w: Subspace) -> Result<Self> {
        same_ambient(&v, &w)?;
        Ok(FredholmPair { v, w })
    }

    pub fn ambient_dim(&self) -> usize {
        self.v.ambient_dim()
    }

    pub fn field(&self) -> Field {
        self.v.field().join(self.w.field())
    }

    /// `(W, V)`.
    pub fn transposed(&self) -> FredholmPair {
        FredholmPair {
            v: self.w.clone(),
            w: self.v.clone(),
        }
    }
}

/// Canonical frames of `V∩W` and `(V+W)⊥`, the spaces whose top powers form `Det(V,W)`.
#[derive(Clone, Debug)]
pub struct PairSpaces {
    pub intersection: Subspace,
    pub sum: Subspace,
    pub cokernel: Subspace,
}

pub fn pair_spaces(p: &FredholmPair, tol: &Tolerance) -> Result<PairSpaces> {
    let intersection = intersection(&p.v, &p.w, tol)?;
    let sum = span_sum(&p.v, &p.w, tol)?;
    let cokernel = sum.complement();
    Ok(PairSpaces {
        intersection,
        sum,
        cokernel,
    })
}

/// A matrix with its kernel, cokernel (orthogonal complement of the range) and index.
#[derive(Clone, Debug)]
pub struct FredholmMap {
    matrix: Matrix,
    kernel: Subspace,
    cokernel: Subspace,
    range: Subspace,
    floor: f64,
}

/// Kernel/cokernel extraction under the global rank policy.
pub fn fredholm_map(m: &Matrix, tol: &Tolerance) -> FredholmMap {
    fredholm_map_with_floor(m, tol, 0.0)
}

/// As [`fredholm_map`], measuring the rank cutoff against `max(σ_max, floor)`.
///
/// Used for compressions of projections (`floor = 1`) and for products whose nominal
/// size is the product of the factor norms.
pub fn fredholm_map_with_floor(m: &Matrix, tol: &Tolerance, floor: f64) -> FredholmMap {
    let field = m.field();
    let k = kernel_frame(m.data(), tol, floor);
    let (r, c) = range_and_cokernel_frames(m.data(), tol, floor);
    FredholmMap {
        matrix: m.clone(),
        kernel: Subspace::from_basis(field, k),
        cokernel: Subspace::from_basis(field, c),
        range: Subspace::from_basis(field, r),
        floor,
    }
}

impl FredholmMap {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn data(&self) -> &CMat {
        self.matrix.data()
    }

    pub fn field(&self) -> Field {
        self.matrix.field()
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn kernel(&self) -> &Subspace {
        &self.kernel
    }

    pub fn cokernel(&self) -> &Subspace {
        &self.cokernel
    }

    pub fn range(&self) -> &Subspace {
        &self.range
    }

    pub fn rank(&self) -> usize {
        self.range.dim()
    }

    pub fn index(&self) -> i64 {
        self.kernel.dim() as i64 - self.cokernel.dim() as i64
    }

    pub fn is_invertible(&self) -> bool {
        self.kernel.dim() == 0 && self.cokernel.dim() == 0
    }

    /// Nominal scale used for rank decisions.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Scale against which exact products with this map are rank-tested.
    pub(crate) fn nominal(&self) -> f64 {
        norm2(self.data()).max(self.floor)
    }

    /// `T*`.
    pub fn adjoint(&self, tol: &Tolerance) -> FredholmMap {
        fredholm_map_with_floor(&self.matrix.adjoint(), tol, self.floor)
    }
}

/// `dim(V∩W)` and `codim(V+W)`, both from the rank of the stacked frames.
pub fn pair_dims(p: &FredholmPair, tol: &Tolerance) -> (usize, usize) {
    let m = hcat(&[p.v.basis(), p.w.basis()]);
    let r = rank_with_floor(&m, tol, 1.0);
    (p.v.dim() + p.w.dim() - r, p.ambient_dim() - r)
}

/// `ind(V,W) = dim V∩W − codim(V+W)`.
pub fn pair_index(p: &FredholmPair, tol: &Tolerance) -> i64 {
    let (i, c) = pair_dims(p, tol);
    i as i64 - c as i64
}

/// The index of `P_{W⊥}|_V : V → W⊥` in frame coordinates.
pub fn pair_index_via_operator(p: &FredholmPair, tol: &Tolerance) -> i64 {
    compression_map(&p.v, &p.w.complement(), tol).index()
}

/// `P_B|_A : A → B` in the frames of `a` and `b`, rank-tested at unit scale.
pub fn compression_map(a: &Subspace, b: &Subspace, tol: &Tolerance) -> FredholmMap {
    let m = b.basis().adjoint() * a.basis();
    fredholm_map_with_floor(&Matrix::from_cmat(a.field().join(b.field()), m), tol, 1.0)
}

/// `dim(V,W) = ind(V, W⊥)`.
pub fn relative_dimension(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<i64> {
    same_ambient(v, w)?;
    Ok(pair_index(&FredholmPair::new(v.clone(), w.complement())?, tol))
}

/// The three expressions of the relative dimension:
/// `ind(V,W⊥)`, `dim V∩W⊥ − dim V⊥∩W`, and `ind(P_W|_V)`.
pub fn relative_dimension_forms(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<[i64; 3]> {
    same_ambient(v, w)?;
    let wp = w.complement();
    let vp = v.complement();
    let first = pair_index(&FredholmPair::new(v.clone(), wp.clone())?, tol);
    let a = pair_dims(&FredholmPair::new(v.clone(), wp)?, tol).0 as i64;
    let b = pair_dims(&FredholmPair::new(vp, w.clone())?, tol).0 as i64;
    let third = compression_map(v, w, tol).index();
    Ok([first, a - b, third])
}

/// Integers of the additivity law `ind(V,Z) = ind(W,Z) + dim(V,W)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdditivityReport {
    pub index_vz: i64,
    pub index_wz: i64,
    pub relative_vw: i64,
    pub holds: bool,
}

pub fn verify_additivity(v: &Subspace, w: &Subspace, z: &Subspace, tol: &Tolerance) -> Result<AdditivityReport> {
    let index_vz = pair_index(&FredholmPair::new(v.clone(), z.clone())?, tol);
    let index_wz = pair_index(&FredholmPair::new(w.clone(), z.clone())?, tol);
    let relative_vw = relative_dimension(v, w, tol)?;
    Ok(AdditivityReport {
        index_vz,
        index_wz,
        relative_vw,
        holds: index_vz == index_wz + relative_vw,
    })
}

/// Relative dimensions of ranges and kernels of two maps of equal shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualityReport {
    pub range_relative: i64,
    pub kernel_relative: i64,
    pub holds: bool,
}

/// `dim(ran T′, ran T) = −dim(ker T′, ker T)`.
pub fn verify_kernel_range_duality(t: &Matrix, t2: &Matrix, tol: &Tolerance) -> Result<DualityReport> {
    if t.rows() != t2.rows() || t.cols() != t2.cols() {
        return Err(crate::error::shape("maps must have equal shapes"));
    }
    let a = fredholm_map(t, tol);
    let b = fredholm_map(t2, tol);
    let range_relative = relative_dimension(b.range(), a.range(), tol)?;
    let kernel_relative = relative_dimension(b.kernel(), a.kernel(), tol)?;
    Ok(DualityReport {
        range_relative,
        kernel_relative,
        holds: range_relative == -kernel_relative,
    })
}
