//! Value semigroups of curves given by polynomial parametrizations of their
//! branches, computed from ranks in truncated jet algebras.
//!
//! The image of the local ring in `⊕ Q[t_i]/(t_i^{L_i})` is the subalgebra
//! generated by the coordinate jets; `h(l)` is the rank of its projection to
//! `⊕ Q[t_i]/(t_i^{l_i})`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{semigroup_from_hilbert, GridRole, ValueGrid};
use crate::lattice::{GridShape, LatticePoint};
use crate::linalg::{Echelon, QVec};
use crate::semigroup::{GoodSemigroup, Multiplicity};

/// A univariate polynomial `Σ a_k t^k` with distinct exponents, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    terms: Vec<(u32, BigRational)>,
}

impl Polynomial {
    pub fn new(terms: impl IntoIterator<Item = (u32, BigRational)>) -> Self {
        let mut terms: Vec<(u32, BigRational)> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u32, BigRational)> = Vec::with_capacity(terms.len());
        for (e, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += a,
                _ => merged.push((e, a)),
            }
        }
        merged.retain(|t| !t.1.is_zero());
        Self { terms: merged }
    }

    /// `t^e`.
    pub fn monomial(e: u32) -> Self {
        Self::new([(e, BigRational::one())])
    }

    pub fn order(&self) -> Option<u32> {
        self.terms.first().map(|t| t.0)
    }

    pub fn terms(&self) -> &[(u32, BigRational)] {
        &self.terms
    }

    fn jet(&self, len: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); len];
        for (e, a) in &self.terms {
            if (*e as usize) < len {
                out[*e as usize] = a.clone();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    /// One polynomial per ambient coordinate.
    pub coords: Vec<Polynomial>,
    /// Largest jet order this branch may be evaluated to.
    pub truncation: u32,
}

impl Branch {
    /// Largest order among the nonzero coordinates.
    pub fn max_order(&self) -> u32 {
        self.coords.iter().filter_map(Polynomial::order).max().unwrap_or(0)
    }

    /// Smallest order among the nonzero coordinates; the branch multiplicity.
    pub fn min_order(&self) -> u32 {
        self.coords.iter().filter_map(Polynomial::order).min().unwrap_or(0)
    }

    /// `4 · (max order)^2`.
    pub fn default_truncation(coords: &[Polynomial]) -> u32 {
        let max = coords.iter().filter_map(Polynomial::order).max().unwrap_or(1);
        4 * max * max
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamCurve {
    ambient_dim: usize,
    branches: Vec<Branch>,
}

impl ParamCurve {
    pub fn new(ambient_dim: usize, branches: Vec<Branch>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be positive".into()));
        }
        if branches.is_empty() {
            return Err(Error::InvalidInput("a curve needs at least one branch".into()));
        }
        for (i, b) in branches.iter().enumerate() {
            if b.coords.len() != ambient_dim {
                return Err(Error::InvalidInput(format!(
                    "branch {i} has {} coordinates, expected {ambient_dim}",
                    b.coords.len()
                )));
            }
            if b.coords.iter().any(|p| p.order() == Some(0)) {
                return Err(Error::InvalidInput(format!("branch {i} has a coordinate with nonzero constant term")));
            }
            if b.coords.iter().all(|p| p.order().is_none()) {
                return Err(Error::InvalidInput(format!("branch {i} is the constant map")));
            }
            if b.truncation == 0 {
                return Err(Error::InvalidInput(format!("branch {i} has truncation order 0")));
            }
            let g = b.coords.iter().flat_map(|p| p.terms.iter().map(|t| t.0)).fold(0u32, |g, e| g.gcd(&e));
            if g > 1 {
                return Err(Error::InvalidInput(format!(
                    "branch {i} is not primitive: every exponent is divisible by {g}"
                )));
            }
        }
        Ok(Self { ambient_dim, branches })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Replaces every branch truncation order by `t`.
    pub fn with_truncation(mut self, t: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidInput("truncation order must be positive".into()));
        }
        for b in &mut self.branches {
            b.truncation = t;
        }
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamCurveFile = serde_json::from_str(text)?;
        file.into_curve()
    }
}

/// `{"ambient_dim": N, "branches": [{"truncation": T, "coords": [[[num, den, exp], ...], ...]}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamCurveFile {
    pub ambient_dim: usize,
    pub branches: Vec<BranchFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u32>,
    pub coords: Vec<Vec<(i64, i64, u32)>>,
}

impl ParamCurveFile {
    pub fn into_curve(self) -> Result<ParamCurve> {
        let mut branches = Vec::with_capacity(self.branches.len());
        for (i, b) in self.branches.into_iter().enumerate() {
            let mut coords = Vec::with_capacity(b.coords.len());
            for (j, terms) in b.coords.into_iter().enumerate() {
                let mut parsed = Vec::with_capacity(terms.len());
                for (num, den, exp) in terms {
                    if den == 0 {
                        return Err(Error::InvalidInput(format!("branch {i}, coordinate {j}: zero denominator")));
                    }
                    parsed.push((exp, BigRational::new(BigInt::from(num), BigInt::from(den))));
                }
                coords.push(Polynomial::new(parsed));
            }
            let truncation = b.truncation.unwrap_or_else(|| Branch::default_truncation(&coords));
            branches.push(Branch { coords, truncation });
        }
        ParamCurve::new(self.ambient_dim, branches)
    }
}

/// A polynomial in the ambient coordinates `x_1, …, x_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientPolynomial {
    pub terms: Vec<(Vec<u32>, BigRational)>,
}

impl AmbientPolynomial {
    pub fn new(terms: Vec<(Vec<u32>, BigRational)>) -> Self {
        Self { terms }
    }

    /// Convenience constructor with integer coefficients.
    pub fn from_int_terms(terms: &[(&[u32], i64)]) -> Self {
        Self::new(terms.iter().map(|(e, a)| (e.to_vec(), BigRational::from_integer(BigInt::from(*a)))).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Valuation {
    Finite(u32),
    /// The composite vanishes up to the truncation order.
    AtLeast(u32),
}

fn mul_truncated(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let len = a.len();
    let mut out = vec![BigRational::zero(); len];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b[..len - i].iter().enumerate().filter(|(_, y)| !y.is_zero()) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `ord_t g(branch(t))`, evaluated modulo `t^T`.
pub fn branch_valuation(branch: &Branch, g: &AmbientPolynomial) -> Result<Valuation> {
    let n = branch.coords.len();
    let len = branch.truncation as usize;
    let jets: Vec<Vec<BigRational>> = branch.coords.iter().map(|p| p.jet(len)).collect();
    let mut total = vec![BigRational::zero(); len];
    for (exps, coeff) in &g.terms {
        if exps.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: exps.len() });
        }
        let mut term = vec![BigRational::zero(); len];
        term[0] = coeff.clone();
        for (jet, &e) in jets.iter().zip(exps) {
            for _ in 0..e {
                term = mul_truncated(&term, jet);
            }
        }
        for (t, x) in total.iter_mut().zip(term) {
            *t += x;
        }
    }
    Ok(match total.iter().position(|x| !x.is_zero()) {
        Some(k) => Valuation::Finite(k as u32),
        None => Valuation::AtLeast(branch.truncation),
    })
}

/// The image of the local ring in `⊕ Q[t_i]/(t_i^{L_i})`, as an echelon basis
/// of concatenated jets (branch `i` occupies columns `offset_i .. offset_i + L_i`).
struct JetImage {
    upper: Vec<usize>,
    offsets: Vec<usize>,
    basis: Vec<QVec>,
}

impl JetImage {
    /// Starts from the constants and multiplies the newest basis vectors by
    /// every coordinate until a round adds nothing.
    fn new(curve: &ParamCurve, upper: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(upper.len());
        let mut width = 0;
        for &u in upper {
            offsets.push(width);
            width += u;
        }
        let coord_jets: Vec<Vec<Vec<BigRational>>> = (0..curve.ambient_dim)
            .map(|j| curve.branches.iter().zip(upper).map(|(b, &u)| b.coords[j].jet(u)).collect())
            .collect();
        let flatten = |parts: &[Vec<BigRational>]| -> QVec {
            parts
                .iter()
                .zip(&offsets)
                .flat_map(|(p, &off)| p.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(k, x)| (off + k, x.clone())))
                .collect()
        };
        let one: Vec<Vec<BigRational>> = upper
            .iter()
            .map(|&u| {
                let mut v = vec![BigRational::zero(); u];
                if u > 0 {
                    v[0] = BigRational::one();
                }
                v
            })
            .collect();
        let mut ech = Echelon::new();
        let mut basis = Vec::new();
        let mut frontier = Vec::new();
        let v = flatten(&one);
        if ech.insert(&v) {
            basis.push(v);
            frontier.push(one);
        }
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for f in &frontier {
                for xj in &coord_jets {
                    let prod: Vec<Vec<BigRational>> = f.iter().zip(xj).map(|(a, b)| mul_truncated(a, b)).collect();
                    let v = flatten(&prod);
                    if ech.insert(&v) {
                        basis.push(v);
                        next.push(prod);
                    }
                }
            }
            frontier = next;
        }
        Self { upper: upper.to_vec(), offsets, basis }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Number of pivots among the first `k` columns of `order`, for every `k`,
    /// after Gaussian elimination with columns taken in that order.
    fn prefix_ranks(&self, order: &[usize]) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.offsets.last().unwrap() + self.upper.last().unwrap()];
        for (k, &c) in order.iter().enumerate() {
            pos[c] = k;
        }
        let mut rows: Vec<Vec<BigRational>> = self
            .basis
            .iter()
            .map(|v| {
                let mut row = vec![BigRational::zero(); order.len()];
                for (c, x) in v {
                    if pos[*c] != usize::MAX {
                        row[pos[*c]] = x.clone();
                    }
                }
                row
            })
            .collect();
        let mut ranks = vec![0; order.len() + 1];
        let mut pivots = 0;
        for col in 0..order.len() {
            if let Some(p) = (pivots..rows.len()).find(|&r| !rows[r][col].is_zero()) {
                rows.swap(pivots, p);
                let inv = rows[pivots][col].recip();
                let pivot_row: Vec<BigRational> = rows[pivots][col..].iter().map(|x| x * &inv).collect();
                for row in rows.iter_mut().skip(pivots + 1) {
                    if row[col].is_zero() {
                        continue;
                    }
                    let f = row[col].clone();
                    for (x, y) in row[col..].iter_mut().zip(&pivot_row) {
                        if !y.is_zero() {
                            *x -= &f * y;
                        }
                    }
                }
                pivots += 1;
            }
            ranks[col + 1] = pivots;
        }
        ranks
    }

    /// `h` on `R(0, upper)`. The branch with the largest box side is kept last
    /// so that one elimination per prefix of the other branches serves every
    /// value of its coordinate.
    fn hilbert_grid(&self) -> ValueGrid {
        let r = self.upper.len();
        let last = (0..r).max_by_key(|&i| (self.upper[i], i)).expect("at least one branch");
        let others: Vec<usize> = (0..r).filter(|&i| i != last).collect();
        let upper: Vec<i64> = self.upper.iter().map(|&u| u as i64).collect();
        let shape = GridShape::new(&upper);
        let mut values = vec![0; shape.len()];
        let prefix_upper: Vec<i64> = others.iter().map(|&i| upper[i]).collect();
        let prefixes = GridShape::new(&prefix_upper);
        for pidx in 0..prefixes.len() {
            let prefix = prefixes.point(pidx);
            let mut order = Vec::new();
            for (&i, &li) in others.iter().zip(&prefix) {
                order.extend((0..li as usize).map(|k| self.offsets[i] + k));
            }
            let head = order.len();
            order.extend((0..self.upper[last]).map(|k| self.offsets[last] + k));
            let ranks = self.prefix_ranks(&order);
            let mut l = vec![0i64; r];
            for (&i, &li) in others.iter().zip(&prefix) {
                l[i] = li;
            }
            for ll in 0..=upper[last] {
                l[last] = ll;
                let all_zero = l.iter().all(|&x| x == 0);
                let h = if all_zero { 0 } else { ranks[head + ll as usize] as i64 };
                values[shape.index(&l).expect("inside the box")] = h;
            }
        }
        ValueGrid::new(GridRole::Hilbert, shape, values).expect("shape and values agree")
    }
}

/// `h(l) = dim O / F(l)`: the rank of the image of the local ring in
/// `⊕ Q[t_i]/(t_i^{l_i})`.
pub fn hilbert_value(curve: &ParamCurve, l: &LatticePoint) -> Result<i64> {
    l.check_dim(curve.branches.len())?;
    let mut upper = Vec::with_capacity(l.dim());
    for (i, (&li, b)) in l.coords().iter().zip(&curve.branches).enumerate() {
        if li < 0 {
            return Err(Error::InvalidInput(format!("negative coordinate in {l}")));
        }
        if li > i64::from(b.truncation) {
            return Err(Error::TruncationInsufficient { branch: i, required: li as u32 });
        }
        upper.push(li as usize);
    }
    Ok(JetImage::new(curve, &upper).rank() as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// The membership region above the conductor extends at least `2m`
    /// inside the computed box.
    #[serde(rename = "verified")]
    Verified,
    /// A conductor candidate exists but the margin could not be reached
    /// within the truncation orders.
    #[serde(rename = "truncation-limited")]
    TruncationLimited,
}

impl Certificate {
    pub fn label(self) -> &'static str {
        match self {
            Certificate::Verified => "verified",
            Certificate::TruncationLimited => "truncation-limited",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub semigroup: GoodSemigroup,
    pub multiplicity: Multiplicity,
    pub delta: i64,
    pub certificate: Certificate,
    /// `h` on the final box `R(0, L)`.
    pub hilbert: ValueGrid,
}

/// Candidate conductor from membership on a box: the componentwise minimum
/// of the points whose upper box consists of members, if that minimum is
/// itself such a point.
fn conductor_candidate(member: &ValueGrid) -> Option<Vec<i64>> {
    let shape = member.shape();
    let mut full = vec![false; shape.len()];
    let mut cand: Option<Vec<i64>> = None;
    for idx in (0..shape.len()).rev() {
        full[idx] = member.at(idx) == 1 && (0..shape.dim()).all(|i| shape.step_up(idx, i).map_or(true, |j| full[j]));
        if full[idx] {
            let p = shape.point(idx);
            cand = Some(match cand {
                None => p,
                Some(c) => c.iter().zip(&p).map(|(a, b)| *a.min(b)).collect(),
            });
        }
    }
    cand.filter(|c| full[shape.index(c).expect("inside the box")])
}

fn min_nonzero_member(member: &ValueGrid) -> Option<Vec<i64>> {
    let shape = member.shape();
    let mut m: Option<Vec<i64>> = None;
    for idx in 1..shape.len() {
        if member.at(idx) == 1 {
            let p = shape.point(idx);
            m = Some(match m {
                None => p,
                Some(v) => v.iter().zip(&p).map(|(a, b)| *a.min(b)).collect(),
            });
        }
    }
    m
}

/// Builds `h` on boxes doubled per coordinate until the conductor candidate
/// has a margin of `2m` inside the box, then validates the result.
pub fn extract_semigroup(curve: &ParamCurve) -> Result<Extraction> {
    let caps: Vec<usize> = curve.branches.iter().map(|b| b.truncation as usize).collect();
    let mut upper: Vec<usize> =
        curve.branches.iter().zip(&caps).map(|(b, &t)| (2 * b.max_order() as usize).max(2).min(t)).collect();
    loop {
        let hilbert = JetImage::new(curve, &upper).hilbert_grid();
        let member = semigroup_from_hilbert(&hilbert);
        let inner: Vec<i64> = upper.iter().map(|&u| u as i64 - 1).collect();
        let m = min_nonzero_member(&member);
        let cand = conductor_candidate(&member);
        // coordinates in which the candidate lacks an m-shift (path criterion)
        // or a 2m-shift (margin) inside the box
        let (no_path, short): (Vec<usize>, Vec<usize>) = match (&cand, &m) {
            (Some(c), Some(m)) => (
                (0..upper.len()).filter(|&i| c[i] + m[i] > inner[i]).collect(),
                (0..upper.len()).filter(|&i| c[i] + 2 * m[i] > inner[i]).collect(),
            ),
            _ => ((0..upper.len()).collect(), (0..upper.len()).collect()),
        };
        let growable: Vec<usize> = short.iter().copied().filter(|&i| upper[i] < caps[i]).collect();
        if short.is_empty() || growable.is_empty() {
            if let Some(&branch) = no_path.first() {
                return Err(Error::TruncationInsufficient { branch, required: 2 * caps[branch] as u32 });
            }
            let c = cand.expect("a path from the candidate exists");
            let certificate = if short.is_empty() { Certificate::Verified } else { Certificate::TruncationLimited };
            return finish(hilbert, &member, c, certificate);
        }
        for i in growable {
            upper[i] = (2 * upper[i]).min(caps[i]);
        }
    }
}

fn finish(hilbert: ValueGrid, member: &ValueGrid, c: Vec<i64>, certificate: Certificate) -> Result<Extraction> {
    let conductor = LatticePoint::new(c.clone())?;
    let cshape = GridShape::new(&c);
    let small: Vec<LatticePoint> = (0..cshape.len())
        .map(|idx| cshape.point(idx))
        .filter(|p| member.get(p) == Some(1))
        .map(LatticePoint::from_vec_unchecked)
        .collect();
    let semigroup = GoodSemigroup::new(conductor.clone(), small)?;
    let expected = crate::grid::hilbert_grid(&semigroup, hilbert.upper())?;
    if let Some(idx) = (0..expected.values().len()).find(|&k| expected.at(k) != hilbert.at(k)) {
        return Err(Error::Consistency(format!(
            "jet Hilbert function disagrees with the extracted semigroup at {:?}",
            hilbert.shape().point(idx)
        )));
    }
    let delta = conductor.norm() - hilbert.value(&conductor).expect("c inside the box");
    let multiplicity = semigroup.multiplicity_vector();
    Ok(Extraction { semigroup, multiplicity, delta, certificate, hilbert })
}
