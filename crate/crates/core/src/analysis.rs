//! Decision procedures built on the lattice cohomology of one instance.

use serde::Serialize;

use crate::cohomology::{LatticeCohomology, ModuleSummary};
use crate::error::{Error, Result};
use crate::grid::{
    generalized_local_minima, hilbert_grid_default, local_minima, weight_grid, Minimum, ValueGrid,
};
use crate::lattice::{GridShape, LatticePoint};
use crate::semigroup::{GoodSemigroup, Multiplicity};

/// A semigroup with its Hilbert and weight grids on `R(0, c + 1)`, its
/// lattice cohomology and its (generalized) local minima.
#[derive(Debug)]
pub struct Instance {
    pub semigroup: GoodSemigroup,
    pub hilbert: ValueGrid,
    pub weight: ValueGrid,
    pub cohomology: LatticeCohomology,
    pub local_minima: Vec<Minimum>,
    pub generalized_minima: Vec<Minimum>,
    pub multiplicity: Multiplicity,
}

impl Instance {
    /// Runs the grid and cohomology pipeline on a semigroup that is assumed
    /// to be good; see [`GoodSemigroup::validate`].
    pub fn new(semigroup: GoodSemigroup) -> Result<Self> {
        let hilbert = hilbert_grid_default(&semigroup);
        let weight = weight_grid(&hilbert);
        let cohomology = LatticeCohomology::assemble(&weight, semigroup.conductor())?;
        let local_minima = local_minima(&weight, &semigroup)?;
        let generalized_minima = generalized_local_minima(&weight, &semigroup)?;
        let multiplicity = semigroup.multiplicity_vector();
        Ok(Self { semigroup, hilbert, weight, cohomology, local_minima, generalized_minima, multiplicity })
    }

    pub fn conductor(&self) -> &LatticePoint {
        self.semigroup.conductor()
    }

    /// `δ = |c| - h(c)`.
    pub fn delta(&self) -> i64 {
        let c = self.conductor();
        c.norm() - self.hilbert.value(c).expect("grid covers c")
    }

    pub fn w(&self, l: &[i64]) -> i64 {
        self.weight.get(l).expect("point inside the weight grid")
    }

    /// Total multiplicity `m(C,o)`; 1 for a smooth branch.
    pub fn total_multiplicity(&self) -> i64 {
        if self.multiplicity.smooth {
            1
        } else {
            self.multiplicity.total()
        }
    }

    /// `w(m)`, reading `m = 1` for a smooth branch.
    pub fn weight_of_m(&self) -> i64 {
        self.w(self.multiplicity.vector.coords())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GorensteinVerdict {
    pub gorenstein: bool,
    /// `w(c) = w(0) = 0`.
    pub weight_at_conductor: bool,
    /// `w(c - l) = w(l)` on `R(0, c)`.
    pub weight_symmetry: bool,
    /// `l ∈ S ⇔ Δ(c - 1 - l) = ∅` on `R(0, c)`.
    pub semigroup_symmetry: bool,
    /// `H^0_red = 0` or `rank ker(U : H^0_0 -> H^0_{-2}) >= 2`.
    pub lattice_test: bool,
    /// `δ = h(c)`, equivalent to the weight condition.
    pub dimension_identity: bool,
}

pub fn gorenstein_battery(inst: &Instance) -> Result<GorensteinVerdict> {
    let s = &inst.semigroup;
    let c = s.conductor().coords();
    let shape = GridShape::new(c);
    let weight_at_conductor = inst.w(c) == 0;
    let mut weight_symmetry = true;
    let mut semigroup_symmetry = true;
    for idx in 0..shape.len() {
        let l = shape.point(idx);
        let mirror = shape.point(shape.mirror(idx));
        weight_symmetry &= inst.w(&l) == inst.w(&mirror);
        let below: Vec<i64> = mirror.iter().map(|x| x - 1).collect();
        semigroup_symmetry &= s.contains_coords(&l) == s.delta_empty(&below);
    }
    let lc = &inst.cohomology;
    let lattice_test = lc.h0_reduced_is_zero() || lc.ker_u_rank(0) >= 2;
    let dimension_identity = inst.delta() == inst.hilbert.value(s.conductor()).expect("grid covers c");
    let all = [weight_at_conductor, weight_symmetry, semigroup_symmetry, lattice_test, dimension_identity];
    if all.iter().any(|&b| b != all[0]) {
        return Err(Error::Consistency(format!(
            "Gorenstein conditions disagree for conductor {}: w(c)=0 {}, w symmetric {}, S symmetric {}, lattice test {}, δ=h(c) {}",
            s.conductor(),
            all[0],
            all[1],
            all[2],
            all[3],
            all[4]
        )));
    }
    Ok(GorensteinVerdict {
        gorenstein: all[0],
        weight_at_conductor,
        weight_symmetry,
        semigroup_symmetry,
        lattice_test,
        dimension_identity,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MfVerdict {
    /// `M(H^0)`.
    pub m_h0: i64,
    /// `w(m)`.
    pub weight_of_m: i64,
    pub holds: bool,
}

/// `M(H^0)` compared with `w(m)`.
pub fn multiplicity_formula(inst: &Instance) -> MfVerdict {
    let lc = &inst.cohomology;
    let m_h0 = if lc.h0_reduced_is_zero() {
        1
    } else if lc.h0_negative_is_zero() {
        0
    } else {
        (lc.n_min()..0).rev().find(|&n| lc.ker_u_rank(n) != 0).expect("the deepest level has kernel")
    };
    let weight_of_m = inst.weight_of_m();
    MfVerdict { m_h0, weight_of_m, holds: weight_of_m == m_h0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MultiplicityClass {
    #[serde(rename = "smooth")]
    Smooth,
    #[serde(rename = "mult2")]
    Two,
    #[serde(rename = "mult>=3")]
    AtLeastThree,
}

/// Reads the multiplicity class off `H^0` and checks it against `Σ m_i`.
pub fn classify_multiplicity(inst: &Instance) -> Result<MultiplicityClass> {
    let lc = &inst.cohomology;
    let class = if lc.h0_reduced_is_zero() {
        MultiplicityClass::Smooth
    } else if lc.h0_negative_is_zero() {
        MultiplicityClass::Two
    } else {
        MultiplicityClass::AtLeastThree
    };
    let expected = match inst.total_multiplicity() {
        1 => MultiplicityClass::Smooth,
        2 => MultiplicityClass::Two,
        _ => MultiplicityClass::AtLeastThree,
    };
    if class != expected {
        return Err(Error::Consistency(format!(
            "cohomology gives {class:?} but the multiplicity vector {} gives {expected:?}",
            inst.multiplicity.vector
        )));
    }
    Ok(class)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonpositivityVerdict {
    pub holds: bool,
    /// `(q, n)` with `n > 0` and `H^q_{red,2n} != 0`.
    pub witnesses: Vec<(usize, i64)>,
}

/// Reduced cohomology vanishes in positive weights and `S_n` is connected
/// for `1 <= n <= n_max`.
pub fn verify_nonpositivity(lc: &LatticeCohomology) -> NonpositivityVerdict {
    let mut witnesses = Vec::new();
    for n in 1..=lc.n_max() {
        for q in lc.reduced_nonzero(n) {
            witnesses.push((q, n));
        }
        let connected = lc.level(n).is_some_and(|l| l.components.count() == 1);
        if !connected && !witnesses.contains(&(0, n)) {
            witnesses.push((0, n));
        }
    }
    NonpositivityVerdict { holds: witnesses.is_empty(), witnesses }
}

/// First direction `i` (ascending) that is good at `l`: `l_i >= 1`,
/// `w(l - e_i) < w(l) < w(l + e_i)`, and `w(l' - e_i) < w(l')` for every
/// vertex `l'` of every cube `(l, J+, J-)` with `i ∉ J+ ∪ J-` that has `l`
/// as an M-vertex.
pub fn good_direction(w: &ValueGrid, l: &LatticePoint) -> Result<Option<usize>> {
    let r = l.dim();
    let at = |p: &[i64]| w.get(p).ok_or_else(|| Error::Precondition(format!("{p:?} lies outside the weight grid")));
    let base = l.coords();
    let wl = at(base)?;
    if wl < 2 {
        return Err(Error::Precondition(format!("good directions need w(l) >= 2, got w({l}) = {wl}")));
    }
    let shifted = |j: usize, d: i64| {
        let mut p = base.to_vec();
        p[j] += d;
        p
    };
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for j in 0..r {
        if at(&shifted(j, 1))? < wl {
            plus.push(j);
        }
        if base[j] >= 1 && at(&shifted(j, -1))? < wl {
            minus.push(j);
        }
    }
    for i in 0..r {
        if base[i] == 0 || !(at(&shifted(i, -1))? < wl && wl < at(&shifted(i, 1))?) {
            continue;
        }
        let p: Vec<usize> = plus.iter().copied().filter(|&j| j != i).collect();
        let m: Vec<usize> = minus.iter().copied().filter(|&j| j != i).collect();
        let mut ok = true;
        for vertex in m_vertex_cube_vertices(base, &p, &m) {
            let mut below = vertex.clone();
            below[i] -= 1;
            if at(&below)? >= at(&vertex)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Vertices `l + e_{K+} - e_{K-}` with `K+ ⊆ plus`, `K- ⊆ minus` disjoint:
/// the union of all cubes `(l, J+, J-)` admitting `l` as an M-vertex.
pub(crate) fn m_vertex_cube_vertices(base: &[i64], plus: &[usize], minus: &[usize]) -> Vec<Vec<i64>> {
    let mut out = vec![base.to_vec()];
    for j in 0..base.len() {
        let (p, m) = (plus.contains(&j), minus.contains(&j));
        if !p && !m {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * 3);
        for v in out {
            if p {
                let mut u = v.clone();
                u[j] += 1;
                next.push(u);
            }
            if m {
                let mut u = v.clone();
                u[j] -= 1;
                next.push(u);
            }
            next.push(v);
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GoodDirectionSweep {
    /// Points of `R(0, c)` with `w >= 2`.
    pub checked: usize,
    /// Those among them without a good direction.
    pub failures: Vec<LatticePoint>,
}

/// Runs [`good_direction`] at every lattice point of `R(0, c)` with `w >= 2`.
pub fn good_direction_sweep(inst: &Instance) -> Result<GoodDirectionSweep> {
    let shape = GridShape::new(inst.conductor().coords());
    let mut sweep = GoodDirectionSweep::default();
    for idx in 0..shape.len() {
        let l = LatticePoint::from_vec_unchecked(shape.point(idx));
        if inst.w(l.coords()) >= 2 {
            sweep.checked += 1;
            if good_direction(&inst.weight, &l)?.is_none() {
                sweep.failures.push(l);
            }
        }
    }
    Ok(sweep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroMinimaVerdict {
    /// Every generalized local minimum `p` with `w(p) = 0` has `w` symmetric on `R(0, p)`.
    pub symmetric: bool,
    /// Every such `p` with `p >= m` lies in the semigroup.
    pub above_m_in_semigroup: bool,
    /// Local minima with `w = 0`.
    pub zero_minima: Vec<LatticePoint>,
    /// When `m(C,o) >= 3`: whether the zero-weight local minima are among `{0, c}`.
    pub only_origin_and_conductor: Option<bool>,
}

impl ZeroMinimaVerdict {
    pub fn holds(&self) -> bool {
        self.symmetric && self.above_m_in_semigroup && self.only_origin_and_conductor != Some(false)
    }
}

pub fn symmetry_zero_minima_check(inst: &Instance) -> ZeroMinimaVerdict {
    let mut symmetric = true;
    let mut above_m_in_semigroup = true;
    let m = &inst.multiplicity.vector;
    for p in inst.generalized_minima.iter().filter(|m| m.weight == 0) {
        if m.le(&p.point) {
            above_m_in_semigroup &= inst.semigroup.contains_coords(p.point.coords());
        }
        let shape = GridShape::new(p.point.coords());
        symmetric &= (0..shape.len()).all(|idx| {
            inst.w(&shape.point(idx)) == inst.w(&shape.point(shape.mirror(idx)))
        });
    }
    let zero_minima: Vec<LatticePoint> =
        inst.local_minima.iter().filter(|m| m.weight == 0).map(|m| m.point.clone()).collect();
    let only_origin_and_conductor = (inst.total_multiplicity() >= 3)
        .then(|| zero_minima.iter().all(|p| p.is_zero() || p == inst.conductor()));
    ZeroMinimaVerdict { symmetric, above_m_in_semigroup, zero_minima, only_origin_and_conductor }
}

/// For Gorenstein instances of multiplicity at least 3, the components of
/// `S_0` that vanish in `S_{-1}` are exactly those of `0` and of `c`.
pub fn killed_components_are_origin_and_conductor(inst: &Instance) -> bool {
    let lc = &inst.cohomology;
    let Some(level) = lc.level(0) else { return false };
    let origin = level.components.component_of(&LatticePoint::zero(inst.conductor().dim()));
    let top = level.components.component_of(inst.conductor());
    let killed = lc.ker_u_components(0);
    let labels = level.components.labels();
    let as_labels = |k: Option<usize>| k.map(|k| labels[k].clone());
    let mut expected: Vec<LatticePoint> = [as_labels(origin), as_labels(top)].into_iter().flatten().collect();
    expected.sort();
    expected.dedup();
    lc.ker_u_rank(0) == 2 && expected.len() == 2 && killed == expected
}

#[derive(Clone, Debug, Serialize)]
pub struct MfReport {
    pub verdict: &'static str,
    #[serde(rename = "M")]
    pub m_h0: i64,
    pub w_m: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimumEntry {
    pub point: LatticePoint,
    pub weight: i64,
}

/// Everything the `analyze` command reports for one instance.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub branches: usize,
    pub multiplicity: i64,
    pub multiplicity_vector: LatticePoint,
    pub smooth: bool,
    pub delta: i64,
    pub conductor: LatticePoint,
    pub gorenstein: GorensteinVerdict,
    #[serde(rename = "M_H0")]
    pub m_h0: i64,
    pub mf: MfReport,
    pub nonpositivity: NonpositivityVerdict,
    pub classification: MultiplicityClass,
    pub local_minima: Vec<MinimumEntry>,
    pub eu: i64,
    pub module: ModuleSummary,
}

pub fn analyze(inst: &Instance) -> Result<AnalysisReport> {
    let gorenstein = gorenstein_battery(inst)?;
    let mf = multiplicity_formula(inst);
    let classification = classify_multiplicity(inst)?;
    let nonpositivity = verify_nonpositivity(&inst.cohomology);
    let module = inst.cohomology.summary();
    Ok(AnalysisReport {
        branches: inst.semigroup.branches(),
        multiplicity: inst.total_multiplicity(),
        multiplicity_vector: inst.multiplicity.vector.clone(),
        smooth: inst.multiplicity.smooth,
        delta: inst.delta(),
        conductor: inst.conductor().clone(),
        gorenstein,
        m_h0: mf.m_h0,
        mf: MfReport {
            verdict: if mf.holds { "holds" } else { "fails" },
            m_h0: mf.m_h0,
            w_m: mf.weight_of_m,
            witness: (!mf.holds).then(|| format!("w(m) = {} but M(H^0) = {}", mf.weight_of_m, mf.m_h0)),
        },
        nonpositivity,
        classification,
        local_minima: inst
            .local_minima
            .iter()
            .map(|m| MinimumEntry { point: m.point.clone(), weight: m.weight })
            .collect(),
        eu: module.eu,
        module,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::hilbert_grid;
    use crate::semigroup::pt;

    fn numerical(gens: &[u64]) -> GoodSemigroup {
        GoodSemigroup::from_numerical_generators(gens).unwrap()
    }

    fn inst(s: GoodSemigroup) -> Instance {
        Instance::new(s).unwrap()
    }

    fn wedge34() -> GoodSemigroup {
        GoodSemigroup::wedge(&numerical(&[3, 4]), &numerical(&[3, 4]))
    }

    fn triple() -> GoodSemigroup {
        let node = GoodSemigroup::wedge(&GoodSemigroup::smooth(), &GoodSemigroup::smooth());
        GoodSemigroup::wedge(&node, &GoodSemigroup::smooth())
    }

    #[test]
    fn gorenstein_fixtures() {
        let g = gorenstein_battery(&inst(numerical(&[4, 5]))).unwrap();
        assert!(g.gorenstein && g.weight_at_conductor && g.weight_symmetry && g.semigroup_symmetry && g.lattice_test);
        let i = inst(numerical(&[4, 5, 7]));
        assert!(!gorenstein_battery(&i).unwrap().gorenstein);
        assert_eq!(i.w(&[7]), -1);
        let i = inst(triple());
        assert!(!gorenstein_battery(&i).unwrap().gorenstein);
        assert_eq!(i.w(&[1, 1, 1]), -1);
        assert!(gorenstein_battery(&inst(GoodSemigroup::smooth())).unwrap().gorenstein);
    }

    #[test]
    fn multiplicity_formula_fixtures() {
        let cases = [(numerical(&[4, 5]), -2, -2, true), (numerical(&[4, 5, 7]), -1, -2, false), (wedge34(), -2, -4, false)];
        for (s, m, wm, holds) in cases {
            let v = multiplicity_formula(&inst(s));
            assert_eq!((v.m_h0, v.weight_of_m, v.holds), (m, wm, holds));
        }
        assert!(multiplicity_formula(&inst(GoodSemigroup::smooth())).holds);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_multiplicity(&inst(GoodSemigroup::smooth())).unwrap(), MultiplicityClass::Smooth);
        let i = inst(numerical(&[2, 7]));
        assert_eq!(classify_multiplicity(&i).unwrap(), MultiplicityClass::Two);
        assert!(i.weight.values().iter().all(|&x| x >= 0));
        assert_eq!(classify_multiplicity(&inst(numerical(&[4, 5]))).unwrap(), MultiplicityClass::AtLeastThree);
    }

    #[test]
    fn nonpositivity() {
        let i = inst(numerical(&[4, 5]));
        assert!(verify_nonpositivity(&i.cohomology).holds);
        assert_eq!(i.cohomology.level(1).unwrap().complex.count(0), 13);
        let i = inst(triple());
        assert!(verify_nonpositivity(&i.cohomology).holds);
        assert_eq!(i.cohomology.level(1).unwrap().complex.count(3), 1);
    }

    /// Brute-force oracle: enumerate every cube (l, J+, J-) with disjoint
    /// J+, J- and test the M-vertex conditions directly.
    fn good_direction_oracle(w: &ValueGrid, l: &[i64], i: usize) -> bool {
        let r = l.len();
        let wl = w.get(l).unwrap();
        let mut lm = l.to_vec();
        lm[i] -= 1;
        let mut lp = l.to_vec();
        lp[i] += 1;
        if l[i] == 0 || !(w.get(&lm).unwrap() < wl && wl < w.get(&lp).unwrap()) {
            return false;
        }
        // each other direction: 0 = unused, 1 = J+, 2 = J-
        let others: Vec<usize> = (0..r).filter(|&j| j != i).collect();
        for code in 0..3usize.pow(others.len() as u32) {
            let mut jp = Vec::new();
            let mut jm = Vec::new();
            let mut c = code;
            for &j in &others {
                match c % 3 {
                    1 => jp.push(j),
                    2 => jm.push(j),
                    _ => {}
                }
                c /= 3;
            }
            if jm.iter().any(|&j| l[j] == 0) {
                continue;
            }
            let is_m_vertex = jp.iter().all(|&j| {
                let mut p = l.to_vec();
                p[j] += 1;
                w.get(&p).unwrap() < wl
            }) && jm.iter().all(|&j| {
                let mut p = l.to_vec();
                p[j] -= 1;
                w.get(&p).unwrap() < wl
            });
            if !is_m_vertex {
                continue;
            }
            for kp in 0u32..1 << jp.len() {
                for km in 0u32..1 << jm.len() {
                    let mut v = l.to_vec();
                    for (t, &j) in jp.iter().enumerate() {
                        v[j] += i64::from(kp >> t & 1);
                    }
                    for (t, &j) in jm.iter().enumerate() {
                        v[j] -= i64::from(km >> t & 1);
                    }
                    let mut below = v.clone();
                    below[i] -= 1;
                    if w.get(&below).unwrap() >= w.get(&v).unwrap() {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn good_directions_match_oracle() {
        let cases = [wedge34(), GoodSemigroup::wedge(&numerical(&[2, 3]), &numerical(&[2, 3])), triple(), numerical(&[4, 5])];
        for s in cases {
            let upper: Vec<i64> = s.conductor().coords().iter().map(|c| c + 4).collect();
            let w = weight_grid(&hilbert_grid(&s, &upper).unwrap());
            let inner = GridShape::new(&upper.iter().map(|u| u - 1).collect::<Vec<_>>());
            let mut seen = 0;
            for idx in 0..inner.len() {
                let l = inner.point(idx);
                if w.get(&l).unwrap() < 2 {
                    continue;
                }
                seen += 1;
                let expected = (0..l.len()).find(|&d| good_direction_oracle(&w, &l, d));
                let got = good_direction(&w, &LatticePoint::new(l.clone()).unwrap()).unwrap();
                assert_eq!(got, expected, "{l:?}");
                assert!(got.is_some(), "{l:?}");
            }
            assert!(seen > 0, "{}", s.conductor());
        }
        let i = inst(numerical(&[4, 5]));
        assert_eq!(good_direction_sweep(&i).unwrap(), GoodDirectionSweep::default());
        assert!(matches!(good_direction(&i.weight, &pt(&[4])), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_minima() {
        let v = symmetry_zero_minima_check(&inst(numerical(&[4, 5])));
        assert!(v.holds());
        assert_eq!(v.zero_minima, vec![pt(&[0]), pt(&[12])]);
        let v = symmetry_zero_minima_check(&inst(numerical(&[2, 9])));
        assert!(v.holds());
        assert_eq!(v.only_origin_and_conductor, None);
        assert!(v.zero_minima.len() > 2);
        assert!(v.zero_minima.iter().all(|p| p.coords()[0] % 2 == 0));
        let v = symmetry_zero_minima_check(&inst(wedge34()));
        assert!(v.holds());
        assert_eq!(v.zero_minima, vec![pt(&[0, 0])]);
    }

    #[test]
    fn killed_components() {
        assert!(killed_components_are_origin_and_conductor(&inst(numerical(&[4, 5]))));
        assert!(!killed_components_are_origin_and_conductor(&inst(numerical(&[4, 5, 7]))));
    }

    #[test]
    fn report() {
        let r = analyze(&inst(numerical(&[4, 5]))).unwrap();
        assert_eq!((r.multiplicity, r.delta, r.gorenstein.gorenstein, r.mf.verdict), (4, 6, true, "holds"));
        assert!(r.nonpositivity.holds);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["classification"], "mult>=3");
        assert_eq!(json["mf"]["M"], -2);
    }
}
