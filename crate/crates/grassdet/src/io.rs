//! JSON forms of matrices and subspaces.
//!
//! A matrix is `{"field": "real"|"complex", "rows": r, "cols": c, "data": [...]}` with
//! `data` in row-major order; complex entries are `[re, im]` pairs and real entries are
//! plain numbers. A subspace is `{"ambient": n, "frame": <matrix n×k>}` whose columns
//! are orthonormal.

use std::path::Path;

use grassdet_core::{CMat, Field, Frame, Matrix, Scalar, Subspace, Tolerance};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::failure::{usage, Failure};

/// Frames further than this from orthonormal are rejected rather than repaired.
pub const FRAME_REPAIR_LIMIT: f64 = 1e-6;

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub field: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Entry>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SubspaceJson {
    pub ambient: usize,
    pub frame: MatrixJson,
}

fn parse_field(name: &str) -> Result<Field, Failure> {
    match name {
        "real" => Ok(Field::Real),
        "complex" => Ok(Field::Complex),
        other => Err(usage(format!("unknown field {other:?}"))),
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<Matrix, Failure> {
        let field = parse_field(&self.field)?;
        if self.data.len() != self.rows * self.cols {
            return Err(usage(format!(
                "matrix declares {}×{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        let mut m = CMat::zeros(self.rows, self.cols);
        for (k, e) in self.data.iter().enumerate() {
            let z = match (*e, field) {
                (Entry::Real(x), _) => Scalar::new(x, 0.0),
                (Entry::Complex([re, im]), Field::Complex) => Scalar::new(re, im),
                (Entry::Complex(_), Field::Real) => {
                    return Err(usage(format!("entry {k} is complex in a real matrix")));
                }
            };
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(usage(format!("entry {k} is not finite")));
            }
            m[(k / self.cols, k % self.cols)] = z;
        }
        Ok(Matrix::from_cmat(field, m))
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        let data = (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = m.get(i, j);
                match m.field() {
                    Field::Real => Entry::Real(z.re),
                    Field::Complex => Entry::Complex([z.re, z.im]),
                }
            })
            .collect();
        MatrixJson {
            field: m.field().name().to_string(),
            rows: m.rows(),
            cols: m.cols(),
            data,
        }
    }
}

/// Modified Gram–Schmidt in column order, so the orientation of the frame survives.
fn gram_schmidt(m: &CMat) -> CMat {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for i in 0..j {
            let qi = q.column(i).into_owned();
            let r = qi.dotc(&q.column(j));
            let mut cj = q.column_mut(j);
            cj -= qi * r;
        }
        let n = q.column(j).norm();
        q.column_mut(j).unscale_mut(n);
    }
    q
}

impl SubspaceJson {
    /// Accepts frames within [`FRAME_REPAIR_LIMIT`] of orthonormal, re-orthonormalizing
    /// the small drift.
    pub fn to_subspace(&self, tol: &Tolerance) -> Result<Subspace, Failure> {
        let m = self.frame.to_matrix()?;
        if m.rows() != self.ambient {
            return Err(usage(format!(
                "frame has {} rows but the ambient dimension is {}",
                m.rows(),
                self.ambient
            )));
        }
        if m.cols() > m.rows() {
            return Err(usage("frame has more columns than the ambient dimension"));
        }
        let k = m.cols();
        let gram = m.data().adjoint() * m.data() - CMat::identity(k, k);
        let drift = gram.norm();
        if drift >= FRAME_REPAIR_LIMIT {
            return Err(usage(format!("frame columns are not orthonormal (residual {drift:.3e})")));
        }
        let frame = Frame::new(gram_schmidt(m.data()), m.field(), tol).map_err(Failure::Core)?;
        Ok(Subspace::from_frame(frame))
    }

    pub fn from_subspace(s: &Subspace) -> Self {
        SubspaceJson {
            ambient: s.ambient_dim(),
            frame: MatrixJson::from_matrix(&Matrix::from_cmat(s.field(), s.basis().clone())),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_matrix(text: &str) -> Result<Matrix, Failure> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| usage(format!("malformed matrix: {e}")))?;
    j.to_matrix()
}

pub fn parse_subspace(text: &str, tol: &Tolerance) -> Result<Subspace, Failure> {
    let j: SubspaceJson = serde_json::from_str(text).map_err(|e| usage(format!("malformed subspace: {e}")))?;
    j.to_subspace(tol)
}

pub fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    parse_matrix(&read(path)?).map_err(|e| match e {
        Failure::Usage(m) => usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_subspace(path: &Path, tol: &Tolerance) -> Result<Subspace, Failure> {
    parse_subspace(&read(path)?, tol).map_err(|e| match e {
        Failure::Usage(m) => usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn scalar_json(z: Scalar) -> Value {
    json!([z.re, z.im])
}

pub fn subspace_json(s: &Subspace) -> Value {
    serde_json::to_value(SubspaceJson::from_subspace(s)).expect("plain data serializes")
}

pub fn matrix_json(m: &Matrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(m)).expect("plain data serializes")
}
