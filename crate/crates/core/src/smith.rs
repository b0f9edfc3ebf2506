//! Integer Smith normal form for sparse coboundary matrices.
//!
//! Unit pivots are eliminated in machine integers; whatever remains is reduced
//! densely with arbitrary-precision integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A sparse integer matrix stored by rows; each row is sorted by column.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn from_dense(dense: &[Vec<i64>]) -> Self {
        let cols = dense.first().map_or(0, Vec::len);
        let mut m = Self::new(dense.len(), cols);
        for (i, row) in dense.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            m.data[i] = row.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| (j, *v)).collect();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Adds `value` to entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, value: i64) {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) out of range");
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(k) => {
                row[k].1 += value;
                if row[k].1 == 0 {
                    row.remove(k);
                }
            }
            Err(k) if value != 0 => row.insert(k, (j, value)),
            Err(_) => {}
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i].binary_search_by_key(&j, |e| e.0).map_or(0, |k| self.data[i][k].1)
    }

    pub fn row(&self, i: usize) -> &[(usize, i64)] {
        &self.data[i]
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        self.data
            .iter()
            .map(|row| {
                let mut d = vec![0; self.cols];
                for &(j, v) in row {
                    d[j] = v;
                }
                d
            })
            .collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::new(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for &(j, v) in row {
                t.data[j].push((i, v));
            }
        }
        t
    }
}

/// Nonzero diagonal entries of the Smith normal form, each dividing the next.
/// Their count is the rank.
pub fn invariant_factors(m: &SparseMatrix) -> Vec<BigInt> {
    match eliminate_unit_pivots(m) {
        Some((units, rest)) => {
            let mut out = vec![BigInt::one(); units];
            out.extend(dense_invariant_factors(rest));
            out
        }
        None => dense_invariant_factors(to_big(&m.data, m.cols)),
    }
}

pub fn rank(m: &SparseMatrix) -> usize {
    invariant_factors(m).len()
}

/// Invariant factors greater than one.
pub fn torsion(m: &SparseMatrix) -> Vec<BigInt> {
    invariant_factors(m).into_iter().filter(|d| !d.is_one()).collect()
}

fn to_big(rows: &[Vec<(usize, i64)>], cols: usize) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            let mut d = vec![BigInt::zero(); cols];
            for &(j, v) in row {
                d[j] = BigInt::from(v);
            }
            d
        })
        .collect()
}

/// Repeatedly pivots on `±1` entries. Each pivot contributes an invariant
/// factor 1: after clearing its column by row operations, the pivot row is
/// cleared by column operations that touch nothing else.
/// Returns `None` on `i64` overflow.
fn eliminate_unit_pivots(m: &SparseMatrix) -> Option<(usize, Vec<Vec<BigInt>>)> {
    let mut rows: Vec<Vec<(usize, i64)>> = m.data.iter().filter(|r| !r.is_empty()).cloned().collect();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m.cols];
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            col_rows[j].push(i);
        }
    }
    let mut alive = vec![true; rows.len()];
    let mut dead_col = vec![false; m.cols];
    let mut units = 0;
    loop {
        // pick the unit pivot whose row is shortest
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            if !alive[i] || best.is_some_and(|(b, _)| rows[b].len() <= row.len()) {
                continue;
            }
            if let Some(&(j, _)) = row.iter().find(|e| e.1.abs() == 1) {
                best = Some((i, j));
            }
        }
        let Some((p, pc)) = best else { break };
        alive[p] = false;
        dead_col[pc] = true;
        units += 1;
        let pivot_row = std::mem::take(&mut rows[p]);
        let pv = pivot_row.iter().find(|e| e.0 == pc).expect("pivot present").1;
        let targets: Vec<usize> = std::mem::take(&mut col_rows[pc]);
        for t in targets {
            if !alive[t] {
                continue;
            }
            let Ok(k) = rows[t].binary_search_by_key(&pc, |e| e.0) else { continue };
            let factor = rows[t][k].1 * pv; // entry / pivot since pivot = ±1
            let merged = axpy(&rows[t], &pivot_row, factor)?;
            for &(j, _) in &merged {
                if rows[t].binary_search_by_key(&j, |e| e.0).is_err() {
                    col_rows[j].push(t);
                }
            }
            rows[t] = merged;
        }
    }
    let rest: Vec<Vec<(usize, i64)>> = rows
        .into_iter()
        .zip(alive)
        .filter(|(r, a)| *a && !r.is_empty())
        .map(|(r, _)| r)
        .collect();
    Some((units, to_big(&rest, m.cols)))
}

/// `a - factor * b` for sorted sparse rows.
fn axpy(a: &[(usize, i64)], b: &[(usize, i64)], factor: i64) -> Option<Vec<(usize, i64)>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() || y < b.len() {
        let take_a = y == b.len() || (x < a.len() && a[x].0 < b[y].0);
        let take_b = x == a.len() || (y < b.len() && b[y].0 < a[x].0);
        if take_a {
            out.push(a[x]);
            x += 1;
        } else if take_b {
            out.push((b[y].0, b[y].1.checked_mul(factor)?.checked_neg()?));
            y += 1;
        } else {
            let v = a[x].1.checked_sub(b[y].1.checked_mul(factor)?)?;
            if v != 0 {
                out.push((a[x].0, v));
            }
            x += 1;
            y += 1;
        }
    }
    Some(out)
}

/// Diagonalizes by pivoting on the smallest nonzero entry, then normalizes
/// the diagonal into a divisibility chain.
fn dense_invariant_factors(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&a[t][t]);
            for j in t..cols {
                let v = &q * &a[t][j];
                a[i][j] -= v;
            }
            clean &= a[i][t].is_zero();
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&a[t][t]);
            for i in t..rows {
                let v = &q * &a[i][t];
                a[i][j] -= v;
            }
            clean &= a[t][j].is_zero();
        }
        if clean {
            diag.push(a[t][t].abs());
            t += 1;
        }
    }
    divisibility_chain(diag)
}

/// Replaces pairs `(a, b)` by `(gcd, lcm)` until each entry divides the next.
fn divisibility_chain(mut d: Vec<BigInt>) -> Vec<BigInt> {
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            if g != d[i] {
                let l = d[i].lcm(&d[j]);
                d[i] = g;
                d[j] = l;
            }
        }
    }
    d
}
