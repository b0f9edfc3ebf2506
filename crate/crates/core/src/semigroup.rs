//! Good semigroups stored by their small elements.
//!
//! A good semigroup `S ⊆ Z^r_{>=0}` with conductor `c` is represented by the
//! finite set `S ∩ R(0, c)`. Membership of an arbitrary point is decided by
//! `l ∈ S ⇔ min(l, c) ∈ small_elements`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{any_in_box, points_in_box, GridShape, LatticePoint};

#[derive(Clone, Debug)]
pub struct GoodSemigroup {
    conductor: LatticePoint,
    small: Vec<LatticePoint>,
    shape: GridShape,
    member: Vec<bool>,
}

impl PartialEq for GoodSemigroup {
    fn eq(&self, other: &Self) -> bool {
        self.conductor == other.conductor && self.small == other.small
    }
}

impl Eq for GoodSemigroup {}

/// The multiplicity vector together with the smooth-branch flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplicity {
    pub vector: LatticePoint,
    pub smooth: bool,
}

impl Multiplicity {
    /// `m(C,o) = sum of m_i`.
    pub fn total(&self) -> i64 {
        self.vector.norm()
    }
}

impl GoodSemigroup {
    /// Builds the representation without checking the good-semigroup axioms;
    /// see [`GoodSemigroup::validate`]. Errors only on malformed input.
    pub fn from_parts(conductor: LatticePoint, small: Vec<LatticePoint>) -> Result<Self> {
        let r = conductor.dim();
        let shape = GridShape::new(conductor.coords());
        let mut member = vec![false; shape.len()];
        let mut set = BTreeSet::new();
        for s in small {
            s.check_dim(r)?;
            if !s.le(&conductor) {
                return Err(Error::InvalidInput(format!(
                    "small element {s} is not below the conductor {conductor}"
                )));
            }
            member[shape.index(s.coords()).expect("inside R(0,c)")] = true;
            set.insert(s);
        }
        Ok(Self { conductor, small: set.into_iter().collect(), shape, member })
    }

    /// Like [`GoodSemigroup::from_parts`], but rejects inputs failing any axiom.
    pub fn new(conductor: LatticePoint, small: Vec<LatticePoint>) -> Result<Self> {
        let s = Self::from_parts(conductor, small)?;
        let report = s.validate();
        match report.violations.first() {
            None => Ok(s),
            Some(v) => Err(Error::NotGood(v.to_string())),
        }
    }

    /// `Z_{>=0}`: the semigroup of a smooth branch.
    pub fn smooth() -> Self {
        Self::from_parts(LatticePoint::zero(1), vec![LatticePoint::zero(1)]).expect("valid")
    }

    pub fn branches(&self) -> usize {
        self.conductor.dim()
    }

    pub fn conductor(&self) -> &LatticePoint {
        &self.conductor
    }

    /// Elements of `S ∩ R(0, c)` in lexicographic order.
    pub fn small_elements(&self) -> &[LatticePoint] {
        &self.small
    }

    /// Membership for a raw coordinate slice; negative coordinates are never members.
    pub(crate) fn contains_coords(&self, l: &[i64]) -> bool {
        if l.iter().any(|&x| x < 0) {
            return false;
        }
        let c = self.conductor.coords();
        let idx: usize = l
            .iter()
            .zip(c)
            .enumerate()
            .map(|(i, (&x, &ci))| x.min(ci) as usize * self.shape.stride(i))
            .sum();
        self.member[idx]
    }

    pub fn contains(&self, l: &LatticePoint) -> Result<bool> {
        l.check_dim(self.branches())?;
        Ok(self.contains_coords(l.coords()))
    }

    /// Componentwise minimum of the nonzero elements.
    pub fn multiplicity_vector(&self) -> Multiplicity {
        let r = self.branches();
        let mut m: Option<Vec<i64>> = None;
        for s in self.small.iter().filter(|s| !s.is_zero()) {
            m = Some(match m {
                None => s.coords().to_vec(),
                Some(v) => v.iter().zip(s.coords()).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        match m {
            Some(v) => Multiplicity { vector: LatticePoint::from_vec_unchecked(v), smooth: false },
            None => Multiplicity { vector: LatticePoint::ones(r), smooth: true },
        }
    }

    /// Whether `Δ̄_i(l)` is nonempty: some `s ∈ S` has `s_i = l_i` and `s_j >= l_j`.
    pub fn delta_bar_nonempty(&self, l: &LatticePoint, i: usize) -> Result<bool> {
        l.check_dim(self.branches())?;
        self.check_branch(i)?;
        Ok(self.delta_search(l.coords(), i, false))
    }

    /// Whether `Δ_i(l)` is nonempty: some `s ∈ S` has `s_i = l_i` and `s_j > l_j`.
    /// Coordinates of `l` may be negative.
    pub fn delta_nonempty(&self, l: &[i64], i: usize) -> Result<bool> {
        if l.len() != self.branches() {
            return Err(Error::DimensionMismatch { expected: self.branches(), found: l.len() });
        }
        self.check_branch(i)?;
        Ok(self.delta_search(l, i, true))
    }

    /// `Δ(l) = ∪_i Δ_i(l)` is empty.
    pub fn delta_empty(&self, l: &[i64]) -> bool {
        (0..self.branches()).all(|i| !self.delta_search(l, i, true))
    }

    // Witnesses are searched below the cap u = max(l + 1, c): if s is a witness
    // then so is min(s, u), which lies in S because u >= c does.
    pub(crate) fn delta_search(&self, l: &[i64], i: usize, strict: bool) -> bool {
        if l[i] < 0 {
            return false;
        }
        let c = self.conductor.coords();
        let bump = i64::from(strict);
        let mut lo = Vec::with_capacity(l.len());
        let mut hi = Vec::with_capacity(l.len());
        for j in 0..l.len() {
            if j == i {
                lo.push(l[i]);
                hi.push(l[i]);
            } else {
                let low = (l[j] + bump).max(0);
                lo.push(low);
                hi.push(low.max(c[j]));
            }
        }
        any_in_box(&lo, &hi, |p| self.contains_coords(p))
    }

    fn check_branch(&self, i: usize) -> Result<()> {
        if i < self.branches() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("branch index {i} out of range 0..{}", self.branches())))
        }
    }

    /// Numerical semigroup generated by `gens`.
    pub fn from_numerical_generators(gens: &[u64]) -> Result<Self> {
        if gens.is_empty() || gens.contains(&0) {
            return Err(Error::InvalidInput("generators must be a nonempty set of positive integers".into()));
        }
        let g = gens.iter().fold(0u64, |acc, &x| acc.gcd(&x));
        if g != 1 {
            return Err(Error::NoConductor(g));
        }
        let smallest = *gens.iter().min().expect("nonempty") as usize;
        // Once `smallest` consecutive integers are members, every larger integer is.
        let mut member = vec![true];
        let mut run = 1usize;
        let mut k = 0usize;
        while run < smallest {
            k += 1;
            let is = gens.iter().any(|&a| a as usize <= k && member[k - a as usize]);
            member.push(is);
            run = if is { run + 1 } else { 0 };
        }
        let conductor = (k + 1 - smallest) as i64;
        let small = (0..=conductor)
            .filter(|&x| member[x as usize])
            .map(|x| LatticePoint::from_vec_unchecked(vec![x]))
            .collect();
        Self::from_parts(LatticePoint::from_vec_unchecked(vec![conductor]), small)
    }

    /// Semigroup of the one-point union of two germs in transversal spaces:
    /// `{0} ∪ ((S' ∖ 0) × (S'' ∖ 0))`.
    pub fn wedge(a: &GoodSemigroup, b: &GoodSemigroup) -> GoodSemigroup {
        let ca: Vec<i64> = a.conductor.coords().iter().map(|&x| x.max(1)).collect();
        let cb: Vec<i64> = b.conductor.coords().iter().map(|&x| x.max(1)).collect();
        let left: Vec<Vec<i64>> = points_in_box(&vec![1; ca.len()], &ca)
            .into_iter()
            .filter(|p| a.contains_coords(p))
            .collect();
        let right: Vec<Vec<i64>> = points_in_box(&vec![1; cb.len()], &cb)
            .into_iter()
            .filter(|p| b.contains_coords(p))
            .collect();
        let r = ca.len() + cb.len();
        let mut small = vec![LatticePoint::zero(r)];
        for p in &left {
            for q in &right {
                let mut v = p.clone();
                v.extend_from_slice(q);
                small.push(LatticePoint::from_vec_unchecked(v));
            }
        }
        let mut conductor = ca;
        conductor.extend(cb);
        Self::from_parts(LatticePoint::from_vec_unchecked(conductor), small).expect("within R(0,c)")
    }

    /// Whether an increasing path from `p` to `p + m` runs inside `S`; by the
    /// path characterization of the conductor this holds iff `p >= c`.
    pub fn is_above_conductor(&self, p: &LatticePoint) -> Result<bool> {
        if !self.contains(p)? {
            return Err(Error::NotInSemigroup(p.clone()));
        }
        let m = self.multiplicity_vector().vector;
        Ok(self.increasing_path_exists(p.coords(), &p.add(&m).into_coords(), |q| self.contains_coords(q)))
    }

    pub(crate) fn increasing_path_exists(
        &self,
        from: &[i64],
        to: &[i64],
        member: impl Fn(&[i64]) -> bool,
    ) -> bool {
        let extent: Vec<i64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
        let shape = GridShape::new(&extent);
        let mut reach = vec![false; shape.len()];
        let mut q = vec![0; from.len()];
        for idx in 0..shape.len() {
            for (i, qi) in q.iter_mut().enumerate() {
                *qi = from[i] + shape.coord(idx, i);
            }
            if !member(&q) {
                continue;
            }
            reach[idx] = idx == 0 || (0..shape.dim()).any(|i| shape.step_down(idx, i).is_some_and(|j| reach[j]));
        }
        reach[shape.len() - 1]
    }

    /// Projection onto the branches in `subset`: the semigroup of the sub-curve.
    pub fn project(&self, subset: &[usize]) -> Result<GoodSemigroup> {
        if subset.is_empty() {
            return Err(Error::InvalidInput("branch subset must be nonempty".into()));
        }
        for &i in subset {
            self.check_branch(i)?;
        }
        let c = self.conductor.coords();
        let cj: Vec<i64> = subset.iter().map(|&i| c[i]).collect();
        let shape = GridShape::new(&cj);
        let mut member = vec![false; shape.len()];
        for s in &self.small {
            let p: Vec<i64> = subset.iter().map(|&i| s.coords()[i]).collect();
            member[shape.index(&p).expect("projection stays below c_J")] = true;
        }
        // Conductor of the projection: componentwise minimum of all points whose
        // upper box R(p, c_J) is made of members.
        let mut full_above = vec![false; shape.len()];
        let mut cond = cj.clone();
        for idx in (0..shape.len()).rev() {
            full_above[idx] = member[idx]
                && (0..shape.dim()).all(|i| shape.step_up(idx, i).map_or(true, |j| full_above[j]));
            if full_above[idx] {
                let p = shape.point(idx);
                for (a, b) in cond.iter_mut().zip(p) {
                    *a = (*a).min(b);
                }
            }
        }
        let small = points_in_box(&vec![0; cj.len()], &cond)
            .into_iter()
            .filter(|p| member[shape.index(p).expect("inside")])
            .map(LatticePoint::from_vec_unchecked)
            .collect();
        GoodSemigroup::from_parts(LatticePoint::from_vec_unchecked(cond), small)
    }

    /// Checks the good-semigroup axioms on the test box `R(0, c + 1)`.
    pub fn validate(&self) -> ValidationReport {
        let r = self.branches();
        let c = self.conductor.coords();
        let top: Vec<i64> = c.iter().map(|x| x + 1).collect();
        let members: Vec<Vec<i64>> = points_in_box(&vec![0; r], &top)
            .into_iter()
            .filter(|p| self.contains_coords(p))
            .collect();
        let mut violations = Vec::new();
        let pt = |v: &[i64]| LatticePoint::from_vec_unchecked(v.to_vec());

        // (1)
        if !self.member[0] {
            violations.push(Violation::new(Axiom::Positivity, vec![LatticePoint::zero(r)]));
        }
        for s in &members {
            if s.iter().any(|&x| x == 0) && s.iter().any(|&x| x != 0) {
                violations.push(Violation::new(Axiom::Positivity, vec![pt(s)]));
                break;
            }
        }
        // additivity and (2)
        'add: for (k, a) in members.iter().enumerate() {
            for b in &members[k..] {
                let sum: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if !self.contains_coords(&sum) {
                    violations.push(Violation::new(Axiom::Additivity, vec![pt(a), pt(b)]));
                    break 'add;
                }
            }
        }
        'min: for (k, a) in members.iter().enumerate() {
            for b in &members[k + 1..] {
                let m: Vec<i64> = a.iter().zip(b).map(|(x, y)| *x.min(y)).collect();
                if !self.contains_coords(&m) {
                    violations.push(Violation::new(Axiom::MinClosure, vec![pt(a), pt(b)]));
                    break 'min;
                }
            }
        }
        // (3)
        'exchange: for (k, a) in members.iter().enumerate() {
            for b in &members[k + 1..] {
                for i in 0..r {
                    if a[i] == b[i] && !self.exchange_witness(a, b, i) {
                        violations.push(Violation::new(Axiom::Exchange, vec![pt(a), pt(b)]));
                        break 'exchange;
                    }
                }
            }
        }
        // (4)
        if !self.contains_coords(c) {
            violations.push(Violation::new(Axiom::Conductor, vec![self.conductor.clone()]));
        }
        for i in 0..r {
            if c[i] == 0 {
                continue;
            }
            let mut lo = c.to_vec();
            lo[i] -= 1;
            let mut hi = c.to_vec();
            hi[i] -= 1;
            if !any_in_box(&lo, &hi, |p| !self.contains_coords(p)) {
                violations.push(Violation::new(Axiom::Conductor, vec![pt(&lo)]));
            }
        }
        // (5)
        let below: Vec<i64> = c.iter().map(|x| x - 1).collect();
        for i in 0..r {
            if self.delta_search(&below, i, true) {
                violations.push(Violation {
                    axiom: Axiom::DeltaBelowConductor,
                    witnesses: vec![],
                    note: Some(format!("Δ_{}(c - 1) is nonempty", i + 1)),
                });
            }
        }
        ValidationReport { violations }
    }

    // Witness t with t_i > a_i, t_j = min(a_j, b_j) where a_j != b_j, and
    // t >= min(a, b). A witness can be capped at max(a, b, c) + e_i.
    fn exchange_witness(&self, a: &[i64], b: &[i64], i: usize) -> bool {
        let c = self.conductor.coords();
        let r = a.len();
        let mut lo = vec![0; r];
        let mut hi = vec![0; r];
        for j in 0..r {
            let mn = a[j].min(b[j]);
            let mx = a[j].max(b[j]).max(c[j]);
            if j == i {
                lo[j] = a[i] + 1;
                hi[j] = mx + 1;
            } else if a[j] != b[j] {
                lo[j] = mn;
                hi[j] = mn;
            } else {
                lo[j] = mn;
                hi[j] = mx;
            }
        }
        any_in_box(&lo, &hi, |p| self.contains_coords(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// (1): `0 ∈ S`, and nonzero elements have no zero coordinate.
    Positivity,
    /// `S + S ⊆ S`.
    Additivity,
    /// (2): closure under componentwise minimum.
    MinClosure,
    /// (3): the exchange property.
    Exchange,
    /// (4): `c ∈ S` is the minimal point with `c + Z^r_{>=0} ⊆ S`.
    Conductor,
    /// (5): `Δ(c - 1) = ∅`.
    DeltaBelowConductor,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Positivity,
        Axiom::Additivity,
        Axiom::MinClosure,
        Axiom::Exchange,
        Axiom::Conductor,
        Axiom::DeltaBelowConductor,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Axiom::Positivity => "(1) positivity",
            Axiom::Additivity => "additivity",
            Axiom::MinClosure => "(2) min-closure",
            Axiom::Exchange => "(3) exchange",
            Axiom::Conductor => "(4) conductor",
            Axiom::DeltaBelowConductor => "(5) Δ(c-1) empty",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witnesses: Vec<LatticePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Violation {
    fn new(axiom: Axiom, witnesses: Vec<LatticePoint>) -> Self {
        Self { axiom, witnesses, note: None }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "axiom {} fails", self.axiom.label())?;
        if !self.witnesses.is_empty() {
            let w: Vec<String> = self.witnesses.iter().map(|p| p.to_string()).collect();
            write!(f, " at {}", w.join(", "))?;
        }
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed_axioms(&self) -> Vec<Axiom> {
        self.violations.iter().map(|v| v.axiom).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": if self.passed() { "pass" } else { "fail" },
            "violations": self.violations,
        })
    }
}

/// On-disk form: `{"branches": r, "conductor": [...], "small_elements": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupFile {
    pub branches: usize,
    pub conductor: Vec<i64>,
    pub small_elements: Vec<Vec<i64>>,
}

impl SemigroupFile {
    pub fn from_semigroup(s: &GoodSemigroup) -> Self {
        Self {
            branches: s.branches(),
            conductor: s.conductor.coords().to_vec(),
            small_elements: s.small.iter().map(|p| p.coords().to_vec()).collect(),
        }
    }

    /// Converts to a semigroup without checking the axioms.
    pub fn into_semigroup(self) -> Result<GoodSemigroup> {
        let r = self.branches;
        if r == 0 {
            return Err(Error::InvalidInput("branches must be at least 1".into()));
        }
        let conductor = LatticePoint::new(self.conductor)?;
        conductor.check_dim(r)?;
        let small = self
            .small_elements
            .into_iter()
            .map(|v| {
                if v.len() != r {
                    return Err(Error::DimensionMismatch { expected: r, found: v.len() });
                }
                LatticePoint::new(v)
            })
            .collect::<Result<Vec<_>>>()?;
        GoodSemigroup::from_parts(conductor, small)
    }
}

impl GoodSemigroup {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SemigroupFile::from_semigroup(self)).expect("serializable")
    }

    /// Parses the JSON file format; the axioms are not checked here.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SemigroupFile = serde_json::from_str(text)?;
        file.into_semigroup()
    }
}

/// Convenience for writing points in code and tests.
pub fn pt(coords: &[i64]) -> LatticePoint {
    LatticePoint::new(coords.to_vec()).expect("nonnegative coordinates")
}
