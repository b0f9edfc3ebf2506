//! Lattice points of `Z^r` and dense indexing of lattice boxes `R(0, L)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the lattice `Z^r_{>=0}`.
///
/// The derived ordering is lexicographic; it is only used to make set outputs
/// deterministic. The partial order of the lattice is [`LatticePoint::le`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("lattice point with no coordinates".into()));
        }
        if let Some(x) = coords.iter().find(|&&x| x < 0) {
            return Err(Error::InvalidInput(format!(
                "negative coordinate {x} in lattice point {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<i64>) -> Self {
        debug_assert!(coords.iter().all(|&x| x >= 0));
        Self(coords)
    }

    pub fn zero(r: usize) -> Self {
        Self(vec![0; r])
    }

    pub fn ones(r: usize) -> Self {
        Self(vec![1; r])
    }

    pub fn unit(r: usize, i: usize) -> Self {
        let mut v = vec![0; r];
        v[i] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    /// `|l| = sum of coordinates`.
    pub fn norm(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &LatticePoint) -> bool {
        le(&self.0, &other.0)
    }

    pub fn min(&self, other: &LatticePoint) -> LatticePoint {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn max(&self, other: &LatticePoint) -> LatticePoint {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` when a coordinate would become negative.
    pub fn checked_sub(&self, other: &LatticePoint) -> Option<LatticePoint> {
        let v: Vec<i64> = self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect();
        v.iter().all(|&x| x >= 0).then_some(Self(v))
    }

    pub(crate) fn check_dim(&self, r: usize) -> Result<()> {
        if self.dim() == r {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: r, found: self.dim() })
        }
    }
}

impl TryFrom<Vec<i64>> for LatticePoint {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LatticePoint> for Vec<i64> {
    fn from(p: LatticePoint) -> Self {
        p.0
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn le(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// The box `R(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: LatticePoint,
    pub hi: LatticePoint,
}

impl LatticeBox {
    pub fn new(lo: LatticePoint, hi: LatticePoint) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        if !lo.le(&hi) {
            return Err(Error::InvalidInput(format!("box corners {lo} and {hi} are not ordered")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.lo.dim() && self.lo.le(p) && p.le(&self.hi)
    }
}

/// Mixed-radix indexing of the lattice points of `R(0, L)`.
///
/// Coordinate 0 is the most significant digit, so index order coincides with
/// the lexicographic order of points. Every predecessor `l - e_i` of a point
/// has a smaller index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridShape {
    upper: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl GridShape {
    pub fn new(upper: &[i64]) -> Self {
        assert!(upper.iter().all(|&x| x >= 0), "grid corner must be nonnegative");
        let r = upper.len();
        let mut strides = vec![0; r];
        let mut acc = 1usize;
        for i in (0..r).rev() {
            strides[i] = acc;
            acc *= (upper[i] + 1) as usize;
        }
        Self { upper: upper.to_vec(), strides, len: acc }
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    /// The corner `L` of `R(0, L)`.
    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.upper.len() && p.iter().zip(&self.upper).all(|(&x, &u)| 0 <= x && x <= u)
    }

    pub fn index(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        Some(p.iter().zip(&self.strides).map(|(&x, &s)| x as usize * s).sum())
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let mut p = vec![0; self.dim()];
        for (i, &s) in self.strides.iter().enumerate() {
            p[i] = (idx / s) as i64;
            idx %= s;
        }
        p
    }

    pub fn coord(&self, idx: usize, i: usize) -> i64 {
        ((idx / self.strides[i]) % (self.upper[i] as usize + 1)) as i64
    }

    /// Index of `p + e_i`, if still inside the box.
    pub fn step_up(&self, idx: usize, i: usize) -> Option<usize> {
        (self.coord(idx, i) < self.upper[i]).then(|| idx + self.strides[i])
    }

    /// Index of `p - e_i`, if still inside the box.
    pub fn step_down(&self, idx: usize, i: usize) -> Option<usize> {
        (self.coord(idx, i) > 0).then(|| idx - self.strides[i])
    }

    pub fn norm(&self, idx: usize) -> i64 {
        (0..self.dim()).map(|i| self.coord(idx, i)).sum()
    }

    /// Index of the point `L - p`.
    pub fn mirror(&self, idx: usize) -> usize {
        self.len - 1 - idx
    }
}

/// Visit every lattice point of `R(lo, hi)` in lexicographic order until the
/// visitor returns `true`; reports whether it did.
pub(crate) fn any_in_box(lo: &[i64], hi: &[i64], mut visit: impl FnMut(&[i64]) -> bool) -> bool {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return false;
    }
    let r = lo.len();
    let mut p = lo.to_vec();
    loop {
        if visit(&p) {
            return true;
        }
        let mut i = r;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if p[i] < hi[i] {
                p[i] += 1;
                for j in i + 1..r {
                    p[j] = lo[j];
                }
                break;
            }
        }
    }
}

/// All lattice points of `R(lo, hi)` in lexicographic order.
pub(crate) fn points_in_box(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    any_in_box(lo, hi, |p| {
        out.push(p.to_vec());
        false
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_index_roundtrip_and_lex_order() {
        let g = GridShape::new(&[2, 3, 1]);
        assert_eq!(g.len(), 3 * 4 * 2);
        let pts = points_in_box(&[0, 0, 0], &[2, 3, 1]);
        for (k, p) in pts.iter().enumerate() {
            assert_eq!(g.index(p), Some(k));
            assert_eq!(&g.point(k), p);
            assert_eq!(g.norm(k), p.iter().sum::<i64>());
        }
        assert_eq!(g.index(&[3, 0, 0]), None);
        assert_eq!(g.mirror(g.index(&[1, 1, 0]).unwrap()), g.index(&[1, 2, 1]).unwrap());
    }

    #[test]
    fn steps_respect_the_box() {
        let g = GridShape::new(&[1, 1]);
        let o = g.index(&[0, 0]).unwrap();
        assert_eq!(g.step_down(o, 0), None);
        assert_eq!(g.step_up(o, 1), g.index(&[0, 1]));
        assert_eq!(g.step_up(g.index(&[1, 1]).unwrap(), 0), None);
    }

    #[test]
    fn lattice_point_rejects_negative_coordinates() {
        assert!(LatticePoint::new(vec![1, -1]).is_err());
        assert!(LatticePoint::new(vec![]).is_err());
        let p: LatticePoint = serde_json::from_str("[3,0]").unwrap();
        assert_eq!(p.norm(), 3);
        assert!(serde_json::from_str::<LatticePoint>("[3,-2]").is_err());
    }

    #[test]
    fn empty_box_visits_nothing() {
        assert!(points_in_box(&[2], &[1]).is_empty());
        assert_eq!(points_in_box(&[0, 0], &[0, 0]), vec![vec![0, 0]]);
    }
}
