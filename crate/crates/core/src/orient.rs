//! Orientations of real Fredholm pairs as signs on determinant lines, and the
//! calculus relating orientations of `(V,Z)`, `(W,Z)` with co-orientations of `(W,V)`.

use alloc::format;
use alloc::string::String;

use crate::bundles::sum_lift;
use crate::detcalc::{compose_lift, compose_maps, psi_t};
use crate::error::{precondition, Error, Result};
use crate::fredholm::{fredholm_map_with_floor, FredholmMap, FredholmPair};
use crate::grassmann::{distance, intersection, same_ambient, span_sum, Subspace};
use crate::numcore::{det, CMat, Field, Matrix, Tolerance};

/// `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Result<Sign> {
        if !x.is_finite() || x == 0.0 {
            return Err(precondition(format!("cannot take the sign of {x}")));
        }
        Ok(if x > 0.0 { Sign::Plus } else { Sign::Minus })
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl core::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A sign on `Det(V,W)` relative to its canonical generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Orientation {
    pub pair: FredholmPair,
    pub sign: Sign,
}

/// A sign on `Det(W, V⊥)` relative to its canonical generator; read equally as a sign
/// on `Det(V, W⊥)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoOrientation {
    pub w: Subspace,
    pub v: Subspace,
    pub sign: Sign,
}

fn real_only(spaces: &[&Subspace]) -> Result<()> {
    if spaces.iter().any(|s| s.field() != Field::Real) {
        return Err(Error::RealFieldOnly);
    }
    Ok(())
}

fn map(m: CMat) -> FredholmMap {
    fredholm_map_with_floor(&Matrix::from_cmat(Field::Real, m), &Tolerance::default(), 1.0)
}

/// Coefficient of the generator of `Det(M)` (frames from the coordinate matrix) against
/// the generator built from the ambient frames of its kernel and cokernel.
fn frame_factor(m: &FredholmMap, dom: &CMat, cod: &CMat, kernel: &Subspace, cokernel: &Subspace) -> f64 {
    let a = det(&(kernel.basis().adjoint() * dom * m.kernel().basis()));
    let b = det(&(cokernel.basis().adjoint() * cod * m.cokernel().basis()));
    (a / b).re
}

fn pair_frames(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<(Subspace, Subspace)> {
    Ok((intersection(v, w, tol)?, span_sum(v, w, tol)?.complement()))
}

/// Scale of `Det(V, W⊥) ⊗ Det(W, Z) → Det(V, Z)`: the composition lift of
/// `P_W|_V` and `P_{Z⊥}|_W` followed by the transport from `Det(P_{Z⊥}P_W|_V)` to
/// `Det(P_{Z⊥}|_V)`.
pub fn transport_scale(v: &Subspace, w: &Subspace, z: &Subspace, tol: &Tolerance) -> Result<f64> {
    real_only(&[v, w, z])?;
    same_ambient(v, w)?;
    same_ambient(w, z)?;
    let zp = z.complement();
    let (vb, wb, zb) = (v.basis(), w.basis(), zp.basis());
    let s = map(wb.adjoint() * vb);
    let t = map(zb.adjoint() * wb);
    let q = map(zb.adjoint() * vb);
    let ts = compose_maps(&s, &t, tol)?;
    let (i1, c1) = pair_frames(v, &w.complement(), tol)?;
    let (i2, c2) = pair_frames(w, z, tol)?;
    let (i3, c3) = pair_frames(v, z, tol)?;
    let fs = frame_factor(&s, vb, wb, &i1, &c1);
    let ft = frame_factor(&t, wb, zb, &i2, &c2);
    let fq = frame_factor(&q, vb, zb, &i3, &c3);
    let lift = compose_lift(&s, &t, tol)?.scale.re;
    let transport = (psi_t(&ts, tol).scale / psi_t(&q, tol).scale).re;
    Ok(lift * transport * fq / (fs * ft))
}

/// `sgn` of [`transport_scale`].
pub fn transport_sign(v: &Subspace, w: &Subspace, z: &Subspace, tol: &Tolerance) -> Result<Sign> {
    Sign::of(transport_scale(v, w, z, tol)?)
}

/// The item produced by [`induce_third`].
#[derive(Clone, Debug, PartialEq)]
pub enum Induced {
    /// Orientation of `(V,Z)`.
    First(Orientation),
    /// Orientation of `(W,Z)`.
    Second(Orientation),
    /// Co-orientation of `(W,V)`.
    Co(CoOrientation),
}

fn same(a: &Subspace, b: &Subspace, what: &str) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::AmbientMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    if a.dim() != b.dim() || distance(a, b)? > 1e-8 {
        return Err(precondition(format!("the two inputs disagree on {what}")));
    }
    Ok(())
}

/// Given two of: an orientation `a` of `(V,Z)`, an orientation `b` of `(W,Z)`, a
/// co-orientation `c` of `(W,V)`, returns the third, with `a = κ·c·b`.
pub fn induce_third(
    a: Option<&Orientation>,
    b: Option<&Orientation>,
    c: Option<&CoOrientation>,
    tol: &Tolerance,
) -> Result<Induced> {
    match (a, b, c) {
        (None, Some(b), Some(c)) => {
            same(&b.pair.v, &c.w, "W")?;
            let (v, w, z) = (&c.v, &b.pair.v, &b.pair.w);
            let k = transport_sign(v, w, z, tol)?;
            Ok(Induced::First(Orientation {
                pair: FredholmPair::new(v.clone(), z.clone())?,
                sign: k * c.sign * b.sign,
            }))
        }
        (Some(a), None, Some(c)) => {
            same(&a.pair.v, &c.v, "V")?;
            let (v, w, z) = (&a.pair.v, &c.w, &a.pair.w);
            let k = transport_sign(v, w, z, tol)?;
            Ok(Induced::Second(Orientation {
                pair: FredholmPair::new(w.clone(), z.clone())?,
                sign: k * a.sign * c.sign,
            }))
        }
        (Some(a), Some(b), None) => {
            same(&a.pair.w, &b.pair.w, "Z")?;
            let (v, w, z) = (&a.pair.v, &b.pair.v, &a.pair.w);
            let k = transport_sign(v, w, z, tol)?;
            Ok(Induced::Co(CoOrientation {
                w: w.clone(),
                v: v.clone(),
                sign: k * a.sign * b.sign,
            }))
        }
        _ => Err(Error::Invalid("exactly two of the three signs must be given".into())),
    }
}

/// Labels of the six edges: `a = Or(V,Z)`, `b = Or(V,Y)`, `c = Or(W,Z)`,
/// `d = Or(W,Y)`, `e = coOr(W,V)`, and `f` a sign on `Det(Z⊥, Y)`, i.e. a co-orientation
/// of `(Y, Z)`.
pub const EDGE_NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Faces as edge indices; each face closes when the product of its three signs and
/// its transport sign is `+1`.
pub const FACES: [[usize; 3]; 4] = [[0, 2, 4], [1, 3, 4], [0, 1, 5], [2, 3, 5]];

#[derive(Clone, Debug, PartialEq)]
pub struct TetrahedronReport {
    pub signs: [Sign; 6],
    /// Index of the edge that was filled in.
    pub filled: usize,
    /// `κ(V,W,Z)`, `κ(V,W,Y)`, `κ(V,Z⊥,Y)`, `κ(W,Z⊥,Y)`.
    pub transport: [Sign; 4],
    pub faces_close: [bool; 4],
}

fn face_closes(face: usize, signs: &[Sign; 6], transport: &[Sign; 4]) -> bool {
    let [i, j, k] = FACES[face];
    signs[i] * signs[j] * signs[k] * transport[face] == Sign::Plus
}

fn face_name(face: usize) -> String {
    let [i, j, k] = FACES[face];
    format!("{{{},{},{}}}", EDGE_NAMES[i], EDGE_NAMES[j], EDGE_NAMES[k])
}

/// Fills the one missing sign of the tetrahedron spanned by `V, W, Z, Y`.
pub fn tetrahedron_check(
    v: &Subspace,
    w: &Subspace,
    z: &Subspace,
    y: &Subspace,
    given: [Option<Sign>; 6],
    tol: &Tolerance,
) -> Result<TetrahedronReport> {
    real_only(&[v, w, z, y])?;
    let missing: alloc::vec::Vec<usize> = (0..6).filter(|&i| given[i].is_none()).collect();
    let [m] = missing.as_slice() else {
        return Err(Error::Invalid("exactly five of the six signs must be given".into()));
    };
    let m = *m;
    let zp = z.complement();
    let transport = [
        transport_sign(v, w, z, tol)?,
        transport_sign(v, w, y, tol)?,
        transport_sign(v, &zp, y, tol)?,
        transport_sign(w, &zp, y, tol)?,
    ];
    let mut signs = [Sign::Plus; 6];
    for i in 0..6 {
        signs[i] = given[i].unwrap_or(Sign::Plus);
    }
    for face in 0..4 {
        if !FACES[face].contains(&m) && !face_closes(face, &signs, &transport) {
            return Err(precondition(format!("face {} is incompatible", face_name(face))));
        }
    }
    let first = (0..4).find(|&f| FACES[f].contains(&m)).unwrap_or(0);
    if !face_closes(first, &signs, &transport) {
        signs[m] = signs[m].flip();
    }
    let mut faces_close = [false; 4];
    for (f, out) in faces_close.iter_mut().enumerate() {
        *out = face_closes(f, &signs, &transport);
    }
    Ok(TetrahedronReport {
        signs,
        filled: m,
        transport,
        faces_close,
    })
}

/// `Or(X) ⊕ Or(V,W) → Or(X+V, W)` through the sum lift; `x_sign` is relative to the
/// frame of `x`.
pub fn orientation_sum(x: &Subspace, x_sign: Sign, pair_or: &Orientation, tol: &Tolerance) -> Result<Orientation> {
    real_only(&[x, &pair_or.pair.v, &pair_or.pair.w])?;
    let s = sum_lift(x, &pair_or.pair, tol)?;
    let xv = span_sum(x, &pair_or.pair.v, tol)?;
    Ok(Orientation {
        pair: FredholmPair::new(xv, pair_or.pair.w.clone())?,
        sign: Sign::of(s.direct.re)? * x_sign * pair_or.sign,
    })
}

/// The special case `W = X+V`: an orientation of `X` co-orients `(W,V)` through
/// `P_{V⊥}|_X : X → W∩V⊥`, and inducing from it must agree with summing.
#[derive(Clone, Debug, PartialEq)]
pub struct SumInduceReport {
    pub by_sum: Sign,
    pub by_induction: Sign,
}

pub fn sum_versus_induction(
    x: &Subspace,
    x_sign: Sign,
    pair_or: &Orientation,
    tol: &Tolerance,
) -> Result<SumInduceReport> {
    let v = &pair_or.pair.v;
    let by_sum = orientation_sum(x, x_sign, pair_or, tol)?;
    let w = by_sum.pair.v.clone();
    let vp = v.complement();
    let xp = intersection(&w, &vp, tol)?;
    if xp.dim() != x.dim() {
        return Err(precondition("W ∩ V⊥ does not match X"));
    }
    let proj = vp.basis() * vp.basis().adjoint() * x.basis();
    let co = Sign::of(det(&(xp.basis().adjoint() * proj)).re)? * x_sign;
    let induced = induce_third(
        Some(pair_or),
        None,
        Some(&CoOrientation {
            w,
            v: v.clone(),
            sign: co,
        }),
        tol,
    )?;
    let Induced::Second(b) = induced else {
        return Err(Error::Invalid("unexpected induction result".into()));
    };
    Ok(SumInduceReport {
        by_sum: by_sum.sign,
        by_induction: b.sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_algebra() {
        assert_eq!(Sign::Minus * Sign::Minus, Sign::Plus);
        assert_eq!(Sign::Plus * Sign::Minus, Sign::Minus);
        assert!(Sign::of(0.0).is_err());
    }

    #[test]
    fn complex_input_is_rejected() {
        let v = Subspace::whole(2, Field::Complex);
        let r = transport_scale(&v, &v, &v, &Tolerance::default());
        assert!(matches!(r, Err(Error::RealFieldOnly)));
    }
}
