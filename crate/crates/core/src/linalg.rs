//! Exact sparse linear algebra over the rationals.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::smith::SparseMatrix;

/// A sparse rational vector, sorted by index, without explicit zeros.
pub type QVec = Vec<(usize, BigRational)>;

pub fn q_from_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `a + f * b`.
pub fn axpy(a: &QVec, f: &BigRational, b: &QVec) -> QVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() || y < b.len() {
        if y == b.len() || (x < a.len() && a[x].0 < b[y].0) {
            out.push(a[x].clone());
            x += 1;
        } else if x == a.len() || b[y].0 < a[x].0 {
            out.push((b[y].0, f * &b[y].1));
            y += 1;
        } else {
            let v = &a[x].1 + f * &b[y].1;
            if !v.is_zero() {
                out.push((a[x].0, v));
            }
            x += 1;
            y += 1;
        }
    }
    out
}

fn scale(a: &QVec, f: &BigRational) -> QVec {
    a.iter().map(|(i, v)| (*i, v * f)).collect()
}

/// Row echelon form built incrementally; every row is normalized to leading
/// entry 1 and rows have distinct leading columns.
///
/// Each row also records its expression as a combination of the accepted
/// input vectors, so that reducing a vector in the span yields coordinates.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<QVec>,
    combos: Vec<QVec>,
    inputs: Vec<QVec>,
    by_lead: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Leading columns of the rows.
    pub fn leads(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r[0].0)
    }

    /// Returns `(remainder, combo)` with `v = remainder + Σ combo_j · input_j`
    /// where no column of the remainder is a leading column.
    pub fn reduce(&self, v: &QVec) -> (QVec, QVec) {
        let mut work: BTreeMap<usize, BigRational> = v.iter().cloned().collect();
        let mut combo: QVec = Vec::new();
        let mut rem = Vec::new();
        while let Some((col, val)) = work.pop_first() {
            match self.by_lead.get(&col) {
                None => rem.push((col, val)),
                Some(&k) => {
                    for (c, x) in &self.rows[k][1..] {
                        let e = work.entry(*c).or_insert_with(BigRational::zero);
                        *e -= &val * x;
                        if e.is_zero() {
                            work.remove(c);
                        }
                    }
                    combo = axpy(&combo, &val, &self.combos[k]);
                }
            }
        }
        (rem, combo)
    }

    /// Adds `v` if it is independent of the rows; returns whether it was added.
    pub fn insert(&mut self, v: &QVec) -> bool {
        let (rem, combo) = self.reduce(v);
        if rem.is_empty() {
            return false;
        }
        let index = self.accepted();
        // rem = v - combo·inputs, and v is input number `index`
        let own = axpy(&vec![(index, BigRational::one())], &-BigRational::one(), &combo);
        let inv = rem[0].1.recip();
        self.by_lead.insert(rem[0].0, self.rows.len());
        self.rows.push(scale(&rem, &inv));
        self.combos.push(scale(&own, &inv));
        self.inputs.push(v.clone());
        true
    }

    /// The `k`-th accepted input vector.
    pub fn input(&self, k: usize) -> &QVec {
        &self.inputs[k]
    }

    fn accepted(&self) -> usize {
        self.rows.len()
    }
}

/// Basis of the kernel of `m` acting on column vectors.
pub fn nullspace(m: &SparseMatrix) -> Vec<QVec> {
    let mut ech = Echelon::new();
    for i in 0..m.rows() {
        let row: QVec = m.row(i).iter().map(|&(j, v)| (j, q_from_int(v))).collect();
        ech.insert(&row);
    }
    // reduced row echelon form by back substitution, last leading column first
    let mut rows: Vec<QVec> = ech.rows.clone();
    rows.sort_by_key(|r| r[0].0);
    for k in (0..rows.len()).rev() {
        let lead = rows[k][0].0;
        for t in 0..k {
            if let Ok(pos) = rows[t].binary_search_by_key(&lead, |e| e.0) {
                let f = -rows[t][pos].1.clone();
                rows[t] = axpy(&rows[t], &f, &rows[k]);
            }
        }
    }
    let leads: HashMap<usize, usize> = rows.iter().enumerate().map(|(k, r)| (r[0].0, k)).collect();
    (0..m.cols())
        .filter(|c| !leads.contains_key(c))
        .map(|free| {
            let mut v: QVec = vec![(free, BigRational::one())];
            for r in &rows {
                if let Ok(pos) = r.binary_search_by_key(&free, |e| e.0) {
                    v.push((r[0].0, -r[pos].1.clone()));
                }
            }
            v.sort_by_key(|e| e.0);
            v
        })
        .collect()
}

/// Dense rational matrix product.
pub fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "dimension mismatch in matrix product");
            (0..cols).map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum()).collect()
        })
        .collect()
}

/// Rank of a dense rational matrix.
pub fn dense_rank(a: &[Vec<BigRational>]) -> usize {
    let mut ech = Echelon::new();
    for row in a {
        let v: QVec = row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect();
        ech.insert(&v);
    }
    ech.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qv(v: &[i64]) -> QVec {
        v.iter().enumerate().filter(|(_, x)| **x != 0).map(|(i, x)| (i, q_from_int(*x))).collect()
    }

    fn apply(m: &SparseMatrix, v: &QVec) -> Vec<BigRational> {
        (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .map(|&(j, x)| v.iter().find(|e| e.0 == j).map_or(BigRational::zero(), |e| &e.1 * q_from_int(x)))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn echelon_coordinates() {
        let mut e = Echelon::new();
        assert!(e.insert(&qv(&[1, 1, 0])));
        assert!(e.insert(&qv(&[0, 1, 1])));
        assert!(!e.insert(&qv(&[1, 2, 1])));
        let (rem, combo) = e.reduce(&qv(&[2, 5, 3]));
        assert!(rem.is_empty());
        assert_eq!(combo, vec![(0, q_from_int(2)), (1, q_from_int(3))]);
    }

    proptest! {
        /// Kernel vectors are annihilated and their number is cols - rank,
        /// with the rank taken from the integer Smith form.
        #[test]
        fn nullspace_dimension(entries in proptest::collection::vec(-2i64..=2, 20), rows in 1usize..5, cols in 1usize..6) {
            let dense: Vec<Vec<i64>> = (0..rows).map(|i| entries[i * 5..i * 5 + cols].to_vec()).collect();
            let m = SparseMatrix::from_dense(&dense);
            let ker = nullspace(&m);
            prop_assert_eq!(ker.len(), cols - crate::smith::rank(&m));
            for v in &ker {
                prop_assert!(apply(&m, v).iter().all(|x| x.is_zero()));
            }
        }
    }
}
