//! Quantified property checks over the grids and complexes of one instance.
//! Each check returns the first violating witness, if any.

use std::fmt;

use serde::Serialize;

use crate::analysis::{
    gorenstein_battery, m_vertex_cube_vertices, symmetry_zero_minima_check, Instance,
};
use crate::grid::{path_weight_formula_check, semigroup_from_hilbert, weight_irreducible_oracle};
use crate::lattice::GridShape;

/// Full pairwise matroid checks are run when the Hilbert grid has at most
/// this many points; larger grids use the equivalent unit-square form.
const FULL_MATROID_LIMIT: usize = 150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Property {
    Matroid,
    Stability,
    ShiftMonotonicity,
    MinimumDuality,
    ZeroWeightMinima,
    TopDegreeVanishing,
    GorensteinCubeSymmetry,
    MVertexMaximality,
    MinimaBelowMultiplicity,
    MultiplicityWeight,
    PathFormula,
    HilbertRoundTrip,
    IrreducibleWeight,
    MultiplicityTwoMinima,
}

impl Property {
    pub const ALL: [Property; 14] = [
        Property::Matroid,
        Property::Stability,
        Property::ShiftMonotonicity,
        Property::MinimumDuality,
        Property::ZeroWeightMinima,
        Property::TopDegreeVanishing,
        Property::GorensteinCubeSymmetry,
        Property::MVertexMaximality,
        Property::MinimaBelowMultiplicity,
        Property::MultiplicityWeight,
        Property::PathFormula,
        Property::HilbertRoundTrip,
        Property::IrreducibleWeight,
        Property::MultiplicityTwoMinima,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Property::Matroid => "matroid",
            Property::Stability => "stability",
            Property::ShiftMonotonicity => "shift-monotonicity",
            Property::MinimumDuality => "minimum-duality",
            Property::ZeroWeightMinima => "zero-weight-minima",
            Property::TopDegreeVanishing => "top-degree-vanishing",
            Property::GorensteinCubeSymmetry => "gorenstein-cube-symmetry",
            Property::MVertexMaximality => "m-vertex-maximality",
            Property::MinimaBelowMultiplicity => "minima-below-multiplicity",
            Property::MultiplicityWeight => "multiplicity-weight",
            Property::PathFormula => "path-formula",
            Property::HilbertRoundTrip => "hilbert-round-trip",
            Property::IrreducibleWeight => "irreducible-weight",
            Property::MultiplicityTwoMinima => "multiplicity-two-minima",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantFailure {
    pub property: Property,
    pub witness: String,
}

type Check = std::result::Result<(), String>;

pub fn check(inst: &Instance, property: Property) -> Option<InvariantFailure> {
    let outcome = match property {
        Property::Matroid => matroid(inst),
        Property::Stability => stability(inst),
        Property::ShiftMonotonicity => shift_monotonicity(inst),
        Property::MinimumDuality => minimum_duality(inst),
        Property::ZeroWeightMinima => zero_weight_minima(inst),
        Property::TopDegreeVanishing => top_degree_vanishing(inst),
        Property::GorensteinCubeSymmetry => gorenstein_cube_symmetry(inst),
        Property::MVertexMaximality => m_vertex_maximality(inst),
        Property::MinimaBelowMultiplicity => minima_below_multiplicity(inst),
        Property::MultiplicityWeight => multiplicity_weight(inst),
        Property::PathFormula => path_formula(inst),
        Property::HilbertRoundTrip => hilbert_round_trip(inst),
        Property::IrreducibleWeight => irreducible_weight(inst),
        Property::MultiplicityTwoMinima => multiplicity_two_minima(inst),
    };
    outcome.err().map(|witness| InvariantFailure { property, witness })
}

pub fn check_all(inst: &Instance) -> Vec<InvariantFailure> {
    Property::ALL.iter().filter_map(|&p| check(inst, p)).collect()
}

/// `h(a) + h(b) >= h(min(a,b)) + h(max(a,b))`.
fn matroid(inst: &Instance) -> Check {
    let h = &inst.hilbert;
    let shape = h.shape();
    let r = shape.dim();
    if shape.len() <= FULL_MATROID_LIMIT {
        for a in 0..shape.len() {
            let pa = shape.point(a);
            for b in a + 1..shape.len() {
                let pb = shape.point(b);
                let lo: Vec<i64> = pa.iter().zip(&pb).map(|(x, y)| *x.min(y)).collect();
                let hi: Vec<i64> = pa.iter().zip(&pb).map(|(x, y)| *x.max(y)).collect();
                let lhs = h.at(a) + h.at(b);
                let rhs = h.get(&lo).expect("in box") + h.get(&hi).expect("in box");
                if lhs < rhs {
                    return Err(format!("h{pa:?} + h{pb:?} = {lhs} < {rhs}"));
                }
            }
        }
        return Ok(());
    }
    for idx in 0..shape.len() {
        for i in 0..r {
            let Some(ui) = shape.step_up(idx, i) else { continue };
            for j in i + 1..r {
                let (Some(uj), Some(uij)) = (shape.step_up(idx, j), shape.step_up(ui, j)) else { continue };
                if h.at(ui) + h.at(uj) < h.at(idx) + h.at(uij) {
                    return Err(format!("unit square at {:?} in directions {i},{j}", shape.point(idx)));
                }
            }
        }
    }
    Ok(())
}

/// `w(l + e_i) = w(l) - 1 ⇒ w(l + e_j + e_i) = w(l + e_j) - 1` for `j != i`,
/// which generates the statement for every shift supported off `i`.
fn stability(inst: &Instance) -> Check {
    let w = &inst.weight;
    let shape = w.shape();
    for idx in 0..shape.len() {
        for i in 0..shape.dim() {
            let Some(ui) = shape.step_up(idx, i) else { continue };
            if w.at(ui) != w.at(idx) - 1 {
                continue;
            }
            for j in (0..shape.dim()).filter(|&j| j != i) {
                let (Some(uj), Some(uij)) = (shape.step_up(idx, j), shape.step_up(ui, j)) else { continue };
                if w.at(uij) != w.at(uj) - 1 {
                    return Err(format!("l = {:?}, i = {i}, shift e_{j}", shape.point(idx)));
                }
            }
        }
    }
    Ok(())
}

/// `w(l + s) - w(l) <= w(l + s + e_i) - w(l + e_i)` for `s ∈ S`.
fn shift_monotonicity(inst: &Instance) -> Check {
    let w = &inst.weight;
    let shape = w.shape();
    let upper = shape.upper();
    let r = shape.dim();
    let points: Vec<Vec<i64>> = (0..shape.len()).map(|idx| shape.point(idx)).collect();
    let members: Vec<usize> = (0..shape.len()).filter(|&idx| inst.semigroup.contains_coords(&points[idx])).collect();
    let v = w.values();
    for (a, l) in points.iter().enumerate() {
        for &b in &members {
            let s = &points[b];
            // indices are additive while l + s + e_i stays in the grid
            if (0..r).any(|i| l[i] + s[i] > upper[i]) {
                continue;
            }
            for i in (0..r).filter(|&i| l[i] + s[i] < upper[i]) {
                let e = shape.stride(i);
                if v[a + b] - v[a] > v[a + b + e] - v[a + e] {
                    return Err(format!("l = {l:?}, s = {s:?}, i = {i}"));
                }
            }
        }
    }
    Ok(())
}

/// For a generalized local minimum `p` and `l + e_i <= p`:
/// `w(l) < w(l + e_i) ⇒ w(p - e_i - l) > w(p - l)`.
fn minimum_duality(inst: &Instance) -> Check {
    let w = &inst.weight;
    let shape = w.shape();
    let v = w.values();
    let points: Vec<Vec<i64>> = (0..shape.len()).map(|idx| shape.point(idx)).collect();
    for p in &inst.generalized_minima {
        let p = p.point.coords();
        let top = shape.index(p).expect("minima lie in the grid");
        for (idx, l) in points.iter().enumerate() {
            if l.iter().zip(p).any(|(a, b)| a > b) {
                continue;
            }
            for i in (0..l.len()).filter(|&i| l[i] < p[i]) {
                let up = idx + shape.stride(i);
                if v[idx] < v[up] && v[top - up] <= v[top - idx] {
                    return Err(format!("p = {p:?}, l = {l:?}, i = {i}"));
                }
            }
        }
    }
    Ok(())
}

fn zero_weight_minima(inst: &Instance) -> Check {
    let v = symmetry_zero_minima_check(inst);
    if v.holds() {
        Ok(())
    } else {
        Err(format!(
            "symmetric {}, above m in S {}, zero-weight minima {:?}",
            v.symmetric,
            v.above_m_in_semigroup,
            v.zero_minima.iter().map(ToString::to_string).collect::<Vec<_>>()
        ))
    }
}

/// `H^q = 0` for `q >= r` at every level.
fn top_degree_vanishing(inst: &Instance) -> Check {
    let lc = &inst.cohomology;
    let r = lc.branches();
    for level in lc.levels() {
        for (q, g) in level.groups.iter().enumerate().skip(r) {
            if !g.is_zero() {
                return Err(format!("H^{q} nonzero at n = {}", level.n));
            }
        }
    }
    Ok(())
}

/// Gorenstein instances: every `S_n` is invariant under `l ↦ c - l`.
fn gorenstein_cube_symmetry(inst: &Instance) -> Check {
    let verdict = gorenstein_battery(inst).map_err(|e| e.to_string())?;
    if !verdict.gorenstein {
        return Ok(());
    }
    let lc = &inst.cohomology;
    let table = lc.table();
    for level in lc.levels() {
        for q in 0..=table.branches() {
            for &id in level.complex.cell_ids(q) {
                if !level.complex.contains(q, table.mirror(q, id)) {
                    return Err(format!("cube {:?} at n = {}", table.cube(q, id), level.n));
                }
            }
        }
    }
    Ok(())
}

/// Every vertex of a cube admitting `l` as M-vertex has weight at most `w(l)`.
fn m_vertex_maximality(inst: &Instance) -> Check {
    let w = &inst.weight;
    let shape = GridShape::new(inst.conductor().coords());
    for idx in 0..shape.len() {
        let l = shape.point(idx);
        let wl = inst.w(&l);
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for j in 0..l.len() {
            let mut up = l.clone();
            up[j] += 1;
            if inst.w(&up) < wl {
                plus.push(j);
            }
            if l[j] >= 1 {
                let mut down = l.clone();
                down[j] -= 1;
                if inst.w(&down) < wl {
                    minus.push(j);
                }
            }
        }
        for v in m_vertex_cube_vertices(&l, &plus, &minus) {
            if w.get(&v).expect("inside the grid") > wl {
                return Err(format!("l = {l:?}, vertex {v:?}"));
            }
        }
    }
    Ok(())
}

/// Gorenstein: local minima `p` with `2m <= p <= c - 2m` have `w(p) <= w(m)`.
fn minima_below_multiplicity(inst: &Instance) -> Check {
    if inst.multiplicity.smooth {
        return Ok(());
    }
    let verdict = gorenstein_battery(inst).map_err(|e| e.to_string())?;
    if !verdict.gorenstein {
        return Ok(());
    }
    let m = inst.multiplicity.vector.coords();
    let c = inst.conductor().coords();
    let wm = inst.weight_of_m();
    for p in &inst.local_minima {
        let pc = p.point.coords();
        let inside = (0..m.len()).all(|i| 2 * m[i] <= pc[i] && pc[i] <= c[i] - 2 * m[i]);
        if inside && p.weight > wm {
            return Err(format!("p = {}, w(p) = {} > w(m) = {wm}", p.point, p.weight));
        }
    }
    Ok(())
}

/// `w(m) = 2 - m(C,o)`.
fn multiplicity_weight(inst: &Instance) -> Check {
    let expected = 2 - inst.total_multiplicity();
    let got = inst.weight_of_m();
    if got == expected {
        Ok(())
    } else {
        Err(format!("w(m) = {got}, expected {expected}"))
    }
}

/// The path formula for `w(p)` at every generalized local minimum.
fn path_formula(inst: &Instance) -> Check {
    for p in &inst.generalized_minima {
        match path_weight_formula_check(&inst.weight, &p.point) {
            Ok(true) => {}
            Ok(false) => return Err(format!("p = {}", p.point)),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

/// Membership recovered from `h` agrees with the semigroup.
fn hilbert_round_trip(inst: &Instance) -> Check {
    let member = semigroup_from_hilbert(&inst.hilbert);
    let shape = member.shape();
    for idx in 0..shape.len() {
        let p = shape.point(idx);
        if (member.at(idx) == 1) != inst.semigroup.contains_coords(&p) {
            return Err(format!("membership differs at {p:?}"));
        }
    }
    Ok(())
}

fn irreducible_weight(inst: &Instance) -> Check {
    if inst.semigroup.branches() != 1 {
        return Ok(());
    }
    for l in 0..=inst.weight.upper()[0] {
        let oracle = weight_irreducible_oracle(&inst.semigroup, l).map_err(|e| e.to_string())?;
        if oracle != inst.w(&[l]) {
            return Err(format!("w({l}) = {}, counting gives {oracle}", inst.w(&[l])));
        }
    }
    Ok(())
}

/// Irreducible multiplicity 2: local minima sit at multiples of 2.
fn multiplicity_two_minima(inst: &Instance) -> Check {
    if inst.semigroup.branches() != 1 || inst.total_multiplicity() != 2 {
        return Ok(());
    }
    match inst.local_minima.iter().find(|p| p.point.coords()[0] % 2 != 0) {
        Some(p) => Err(format!("local minimum at {}", p.point)),
        None => Ok(()),
    }
}
