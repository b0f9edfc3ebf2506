//! Hilbert function and weight function on lattice boxes `R(0, L)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GridShape, LatticePoint};
use crate::semigroup::GoodSemigroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRole {
    Hilbert,
    Weight,
    /// 0/1 semigroup membership indicator.
    Membership,
}

/// Integer values on every lattice point of a box `R(0, L)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGrid {
    role: GridRole,
    shape: GridShape,
    values: Vec<i64>,
}

impl ValueGrid {
    pub fn new(role: GridRole, shape: GridShape, values: Vec<i64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} values for {} lattice points",
                values.len(),
                shape.len()
            )));
        }
        Ok(Self { role, shape, values })
    }

    pub fn role(&self) -> GridRole {
        self.role
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    /// Upper corner `L` of the box.
    pub fn upper(&self) -> &[i64] {
        self.shape.upper()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn at(&self, idx: usize) -> i64 {
        self.values[idx]
    }

    /// Value at `l`, or `None` outside the box.
    pub fn get(&self, l: &[i64]) -> Option<i64> {
        self.shape.index(l).map(|i| self.values[i])
    }

    pub fn value(&self, l: &LatticePoint) -> Option<i64> {
        self.get(l.coords())
    }

    /// Text dump: one row per first coordinate for `r <= 2`, a JSON array otherwise.
    pub fn dump(&self) -> String {
        let u = self.shape.upper();
        match u.len() {
            1 => join(&self.values) + "\n",
            2 => self.values.chunks(u[1] as usize + 1).map(|row| join(row) + "\n").collect(),
            _ => serde_json::to_string(&serde_json::json!({
                "upper": u,
                "values": self.values,
            }))
            .expect("serializable"),
        }
    }
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Hilbert function on `R(0, L)` with the default `L = c + 1`.
pub fn hilbert_grid_default(s: &GoodSemigroup) -> ValueGrid {
    let upper: Vec<i64> = s.conductor().coords().iter().map(|x| x + 1).collect();
    hilbert_grid(s, &upper).expect("valid semigroups have path-independent Hilbert functions")
}

/// Hilbert function on `R(0, L)`: `h(0) = 0` and `h(l + e_i) - h(l) = 1` iff
/// `Δ̄_i(l)` is nonempty.
///
/// Every incoming edge of every point is checked; an inconsistency means the
/// input is not a good semigroup.
pub fn hilbert_grid(s: &GoodSemigroup, upper: &[i64]) -> Result<ValueGrid> {
    let r = s.branches();
    if upper.len() != r {
        return Err(Error::DimensionMismatch { expected: r, found: upper.len() });
    }
    if !crate::lattice::le(s.conductor().coords(), upper) {
        return Err(Error::Precondition(format!(
            "grid upper corner {upper:?} is not above the conductor {}",
            s.conductor()
        )));
    }
    let shape = GridShape::new(upper);
    let member: Vec<bool> = (0..shape.len()).map(|idx| s.contains_coords(&shape.point(idx))).collect();
    // delta_bar[i][idx]: some member agrees with idx in coordinate i and dominates
    // it elsewhere. Witnesses can be capped at max(l, c) <= L, so a suffix OR over
    // the box in every direction j != i decides it.
    let delta_bar: Vec<Vec<bool>> = (0..r)
        .map(|i| {
            let mut d = member.clone();
            for j in (0..r).filter(|&j| j != i) {
                for idx in (0..shape.len()).rev() {
                    if let Some(up) = shape.step_up(idx, j) {
                        d[idx] |= d[up];
                    }
                }
            }
            d
        })
        .collect();
    let mut h = vec![0i64; shape.len()];
    for idx in 1..shape.len() {
        let mut value = None;
        for i in 0..r {
            let Some(prev) = shape.step_down(idx, i) else { continue };
            let v = h[prev] + i64::from(delta_bar[i][prev]);
            match value {
                None => value = Some(v),
                Some(w) if w != v => {
                    return Err(Error::NotGood(format!(
                        "Hilbert function is path dependent at {}",
                        LatticePoint::from_vec_unchecked(shape.point(idx))
                    )))
                }
                Some(_) => {}
            }
        }
        h[idx] = value.expect("nonzero index has a predecessor");
    }
    ValueGrid::new(GridRole::Hilbert, shape, h)
}

/// `w(l) = 2 h(l) - |l|`.
pub fn weight_grid(h: &ValueGrid) -> ValueGrid {
    assert_eq!(h.role, GridRole::Hilbert, "weight grid needs a Hilbert grid");
    let values = (0..h.shape.len()).map(|idx| 2 * h.values[idx] - h.shape.norm(idx)).collect();
    ValueGrid { role: GridRole::Weight, shape: h.shape.clone(), values }
}

/// Membership recovered from `h`: `l ∈ S` iff `h(l + e_i) > h(l)` for all `i`.
/// Defined on the interior box `R(0, L - 1)`.
pub fn semigroup_from_hilbert(h: &ValueGrid) -> ValueGrid {
    let inner: Vec<i64> = h.upper().iter().map(|x| x - 1).collect();
    let shape = GridShape::new(&inner);
    let values = (0..shape.len())
        .map(|idx| {
            let p = shape.point(idx);
            let base = h.shape.index(&p).expect("interior point");
            let all_up = (0..p.len()).all(|i| {
                let up = h.shape.step_up(base, i).expect("interior point");
                h.values[up] > h.values[base]
            });
            i64::from(all_up)
        })
        .collect();
    ValueGrid { role: GridRole::Membership, shape, values }
}

/// `#{s < l : s ∈ S} - #{0 <= k < l : k ∉ S}` for a numerical semigroup.
pub fn weight_irreducible_oracle(s: &GoodSemigroup, l: i64) -> Result<i64> {
    if s.branches() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: s.branches() });
    }
    Ok((0..l).map(|k| if s.contains_coords(&[k]) { 1 } else { -1 }).sum())
}

/// Restriction of a Hilbert grid to the points supported on the branches in
/// `subset`, reindexed to `Z^{#subset}`.
pub fn restrict_branches(h: &ValueGrid, subset: &[usize]) -> Result<ValueGrid> {
    let r = h.shape.dim();
    if subset.is_empty() {
        return Err(Error::InvalidInput("branch subset must be nonempty".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= r) {
        return Err(Error::InvalidInput(format!("branch index {bad} out of range 0..{r}")));
    }
    let upper: Vec<i64> = subset.iter().map(|&i| h.upper()[i]).collect();
    let shape = GridShape::new(&upper);
    let values = (0..shape.len())
        .map(|idx| {
            let mut full = vec![0; r];
            for (k, &i) in subset.iter().enumerate() {
                full[i] = shape.coord(idx, k);
            }
            h.get(&full).expect("inside the box")
        })
        .collect();
    ValueGrid::new(h.role, shape, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimumKind {
    Local,
    Generalized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Minimum {
    pub point: LatticePoint,
    pub weight: i64,
    pub kind: MinimumKind,
}

fn is_generalized_min(w: &ValueGrid, idx: usize) -> bool {
    (0..w.shape.dim()).all(|i| w.shape.step_down(idx, i).map_or(true, |j| w.values[j] > w.values[idx]))
}

fn is_local_min(w: &ValueGrid, idx: usize) -> bool {
    is_generalized_min(w, idx)
        && (0..w.shape.dim()).all(|i| w.shape.step_up(idx, i).map_or(true, |j| w.values[j] > w.values[idx]))
}

fn check_weight_grid(w: &ValueGrid, s: &GoodSemigroup) -> Result<()> {
    if w.role != GridRole::Weight {
        return Err(Error::Precondition("expected a weight grid".into()));
    }
    let c = s.conductor().coords();
    if w.upper().len() != c.len() {
        return Err(Error::DimensionMismatch { expected: c.len(), found: w.upper().len() });
    }
    if !w.upper().iter().zip(c).all(|(u, c)| *u > *c) {
        return Err(Error::Precondition("weight grid must cover R(0, c + 1)".into()));
    }
    Ok(())
}

fn collect_minima(
    w: &ValueGrid,
    s: &GoodSemigroup,
    kind: MinimumKind,
    grid_test: impl Fn(&ValueGrid, usize) -> bool,
    delta_test: impl Fn(&[i64]) -> bool,
) -> Result<Vec<Minimum>> {
    check_weight_grid(w, s)?;
    let c = s.conductor().coords();
    let mut out = Vec::new();
    for idx in 0..w.shape.len() {
        let p = w.shape.point(idx);
        let on_grid = grid_test(w, idx);
        if idx != 0 && on_grid != delta_test(&p) {
            return Err(Error::Consistency(format!(
                "grid and Δ tests disagree on whether {} is a {kind:?} minimum",
                LatticePoint::from_vec_unchecked(p)
            )));
        }
        if !on_grid {
            continue;
        }
        let point = LatticePoint::from_vec_unchecked(p);
        if !crate::lattice::le(point.coords(), c) {
            return Err(Error::Consistency(format!("minimum {point} lies outside R(0, c)")));
        }
        let weight = w.values[idx];
        if weight > 0 {
            return Err(Error::Consistency(format!("minimum {point} has positive weight {weight}")));
        }
        out.push(Minimum { point, weight, kind });
    }
    Ok(out)
}

fn minus_one(p: &[i64]) -> Vec<i64> {
    p.iter().map(|x| x - 1).collect()
}

/// Points with `w(p) < w(p ± e_i)` for every neighbour inside the box,
/// cross-checked with `p ∈ S` and `Δ(p - 1) = ∅`.
pub fn local_minima(w: &ValueGrid, s: &GoodSemigroup) -> Result<Vec<Minimum>> {
    collect_minima(w, s, MinimumKind::Local, is_local_min, |p| {
        s.contains_coords(p) && s.delta_empty(&minus_one(p))
    })
}

/// Points with `w(p) < w(p - e_i)` for every `i` with `p >= e_i`,
/// cross-checked with `Δ(p - 1) = ∅`.
pub fn generalized_local_minima(w: &ValueGrid, s: &GoodSemigroup) -> Result<Vec<Minimum>> {
    collect_minima(w, s, MinimumKind::Generalized, is_generalized_min, |p| {
        s.delta_empty(&minus_one(p))
    })
}

/// `-#{k : w(x^{k+1}) = w(x^k) - 1 and w(p - x^k) = w(p - x^{k+1}) - 1}` for
/// the increasing path given by its step directions.
pub fn path_weight(w: &ValueGrid, p: &[i64], steps: &[usize]) -> Result<i64> {
    let target = w
        .shape
        .index(p)
        .ok_or_else(|| Error::Precondition(format!("{p:?} lies outside the weight grid")))?;
    let mut counts = vec![0i64; p.len()];
    for &i in steps {
        match counts.get_mut(i) {
            Some(c) => *c += 1,
            None => return Err(Error::Precondition(format!("step direction {i} out of range"))),
        }
    }
    if counts != p {
        return Err(Error::Precondition("steps do not form an increasing path to p".into()));
    }
    Ok(path_weight_unchecked(w, target, steps))
}

/// [`path_weight`] on grid indices; `steps` must be a path from 0 to the
/// point with index `target`. Indices are linear in the coordinates, so the
/// dual point `p - x` has index `target - index(x)`.
fn path_weight_unchecked(w: &ValueGrid, target: usize, steps: &[usize]) -> i64 {
    let mut x = 0usize;
    let mut count = 0;
    for &i in steps {
        let next = x + w.shape.stride(i);
        if w.values[next] == w.values[x] - 1 && w.values[target - x] == w.values[target - next] - 1 {
            count += 1;
        }
        x = next;
    }
    -count
}

/// Paths exhaustively enumerated when there are at most this many.
const EXHAUSTIVE_PATHS: u128 = 2000;
const SAMPLED_PATHS: usize = 16;

/// Evaluates [`path_weight`] on increasing paths `0 -> p` (all of them when
/// few, otherwise the two extreme orders plus seeded random shuffles) and
/// checks that every value equals `w(p)`.
pub fn path_weight_formula_check(w: &ValueGrid, p: &LatticePoint) -> Result<bool> {
    let target = w
        .value(p)
        .ok_or_else(|| Error::Precondition(format!("{p} lies outside the weight grid")))?;
    let mut steps: Vec<usize> = Vec::new();
    for (i, &k) in p.coords().iter().enumerate() {
        steps.extend(std::iter::repeat(i).take(k as usize));
    }
    let index = w.shape.index(p.coords()).expect("checked above");
    if path_count(p.coords()) <= EXHAUSTIVE_PATHS {
        let mut ok = true;
        for_each_arrangement(&mut steps.clone(), 0, &mut |path| {
            ok &= path_weight_unchecked(w, index, path) == target;
        });
        return Ok(ok);
    }
    let mut paths = vec![steps.clone(), steps.iter().rev().copied().collect()];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..SAMPLED_PATHS {
        steps.shuffle(&mut rng);
        paths.push(steps.clone());
    }
    Ok(paths.iter().all(|path| path_weight_unchecked(w, index, path) == target))
}

fn path_count(p: &[i64]) -> u128 {
    // multinomial coefficient, saturating
    let mut total: u128 = 1;
    let mut n: u128 = 0;
    for &k in p {
        for j in 1..=k as u128 {
            n += 1;
            total = total.saturating_mul(n) / j;
            if total > EXHAUSTIVE_PATHS * 1000 {
                return u128::MAX;
            }
        }
    }
    total
}

/// Visits every distinct permutation of a sorted multiset.
fn for_each_arrangement(v: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        visit(v);
        return;
    }
    let mut seen = Vec::new();
    for k in start..v.len() {
        if seen.contains(&v[k]) {
            continue;
        }
        seen.push(v[k]);
        v.swap(start, k);
        for_each_arrangement(v, start + 1, visit);
        v.swap(start, k);
    }
}
