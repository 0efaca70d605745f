#![allow(dead_code)]

use grassdet_core::{CMat, Scalar};
use nalgebra::DMatrix;

pub fn cx(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// Laplace expansion along the first row; small matrices only.
pub fn cofactor_det(m: &CMat) -> Scalar {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    match n {
        0 => cx(1.0),
        1 => m[(0, 0)],
        _ => {
            let mut acc = cx(0.0);
            for j in 0..n {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += m[(0, j)] * cofactor_det(&minor) * sign;
            }
            acc
        }
    }
}

/// Determinant: cofactor expansion up to 7, LU beyond.
pub fn oracle_det(m: &CMat) -> Scalar {
    if m.nrows() <= 7 {
        cofactor_det(m)
    } else {
        m.clone().lu().determinant()
    }
}

/// Singular values straight from nalgebra, descending.
pub fn raw_singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn oracle_rank(m: &CMat, rel: f64, floor: f64) -> usize {
    let s = raw_singular_values(m);
    let top = s.first().copied().unwrap_or(0.0).max(floor);
    if top == 0.0 {
        return 0;
    }
    let cut = rel * top * m.nrows().max(m.ncols()) as f64;
    s.iter().filter(|&&x| x > cut).count()
}

/// Some orthonormal basis of the orthogonal complement of the columns of `f`
/// (assumed orthonormal), from the eigenvectors of the complementary projector.
pub fn any_complement(f: &CMat) -> CMat {
    let n = f.nrows();
    if n == 0 || f.ncols() == n {
        return CMat::zeros(n, 0);
    }
    let p = DMatrix::<Scalar>::identity(n, n) - f * f.adjoint();
    let eig = p.symmetric_eigen();
    let mut cols = Vec::new();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.5 {
            cols.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
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

pub fn close(a: Scalar, b: Scalar, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
