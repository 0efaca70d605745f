//! Seeded instance generation.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`, so a seed names the same
//! instances on every platform. Subspaces are Gaussian matrices passed through the
//! pivoted orthonormalization.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grassmann::Subspace;
use crate::numcore::{hcat, CMat, Field, Matrix, Scalar, Tolerance};

/// Deterministic instance source.
pub struct Sampler {
    rng: ChaCha8Rng,
    field: Field,
}

impl Sampler {
    pub fn new(seed: u64, field: Field) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            field,
        }
    }

    /// Independent stream for trial `index` of a run seeded with `seed`.
    pub fn for_trial(seed: u64, index: u64, field: Field) -> Self {
        let mixed = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
        Sampler::new(mixed, field)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn scalar(&mut self) -> Scalar {
        match self.field {
            Field::Real => Scalar::new(self.normal(), 0.0),
            Field::Complex => {
                let s = core::f64::consts::FRAC_1_SQRT_2;
                Scalar::new(s * self.normal(), s * self.normal())
            }
        }
    }

    pub fn gaussian(&mut self, rows: usize, cols: usize) -> CMat {
        let mut m = CMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.scalar();
            }
        }
        m
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let g = self.gaussian(rows, cols);
        Matrix::from_cmat(self.field, g)
    }

    /// Gaussian factor product of rank `r` (generically exactly `r`).
    pub fn rank_deficient(&mut self, rows: usize, cols: usize, r: usize) -> CMat {
        let a = self.gaussian(rows, r);
        let b = self.gaussian(r, cols);
        a * b
    }

    /// Random rank between 0 and `min(rows, cols)`.
    pub fn mixed_rank(&mut self, rows: usize, cols: usize) -> CMat {
        let r = self.int(0, rows.min(cols));
        self.rank_deficient(rows, cols, r)
    }

    /// Random subspace of dimension `dim` in general position.
    pub fn subspace(&mut self, ambient: usize, dim: usize) -> Subspace {
        let g = self.gaussian(ambient, dim);
        Subspace::span(&Matrix::from_cmat(self.field, g), &Tolerance::default())
    }

    /// Random subspace of dimension `dim` that contains the first `shared` canonical
    /// columns of each listed subspace (as far as dimension allows).
    pub fn subspace_sharing(&mut self, ambient: usize, dim: usize, shared: &[(&Subspace, usize)]) -> Subspace {
        let mut parts: Vec<CMat> = Vec::new();
        let mut used = 0;
        for (s, k) in shared {
            let k = (*k).min(s.dim()).min(dim - used);
            if k > 0 {
                parts.push(s.basis().columns(0, k).into_owned());
                used += k;
            }
        }
        parts.push(self.gaussian(ambient, dim - used));
        let refs: Vec<&CMat> = parts.iter().collect();
        let m = hcat(&refs);
        Subspace::span(&Matrix::from_cmat(self.field, m), &Tolerance::default())
    }

    /// Random invertible matrix, well conditioned (identity plus a scaled Gaussian).
    pub fn invertible(&mut self, n: usize) -> CMat {
        let g = self.gaussian(n, n);
        let s = 0.3 / crate::numcore::sqrt(n.max(1) as f64);
        CMat::identity(n, n) + g * Scalar::new(s, 0.0)
    }

    /// Random unitary (orthogonal in the real case) from a full Gaussian frame.
    pub fn unitary(&mut self, n: usize) -> CMat {
        let g = self.gaussian(n, n);
        crate::numcore::pivoted_gram_schmidt(&g, n)
    }

    pub fn hermitian(&mut self, n: usize) -> CMat {
        let g = self.gaussian(n, n);
        (&g + g.adjoint()) * Scalar::new(0.5, 0.0)
    }
}
