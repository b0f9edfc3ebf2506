//! The bigraded `Z[U]`-module of lattice cohomology and its graded root.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cubical::{CohomologyGroup, Components, CubeTable, CubicalComplex};
use crate::error::{Error, Result};
use crate::grid::ValueGrid;
use crate::lattice::LatticePoint;
use crate::linalg::{self, Echelon, QVec};
use crate::smith::SparseMatrix;

/// One sublevel complex `S_n ∩ R(0, c)` with its cohomology.
#[derive(Debug)]
pub struct Level {
    pub n: i64,
    pub complex: CubicalComplex,
    pub components: Components,
    pub groups: Vec<CohomologyGroup>,
    bases: Vec<OnceLock<CohomologyBasis>>,
}

/// Rational cocycle representatives of a basis of `H^q ⊗ Q`, with an echelon
/// form of coboundaries followed by the representatives for reading off
/// coordinates of arbitrary cocycles.
#[derive(Debug)]
struct CohomologyBasis {
    echelon: Echelon,
    boundary_rank: usize,
    size: usize,
}

impl Level {
    fn basis(&self, q: usize) -> &CohomologyBasis {
        self.bases[q].get_or_init(|| {
            let mut echelon = Echelon::new();
            if q > 0 {
                let d = self.complex.coboundary(q - 1).transpose();
                for i in 0..d.rows() {
                    echelon.insert(&int_row(&d, i));
                }
            }
            let boundary_rank = echelon.rank();
            for z in linalg::nullspace(&self.complex.coboundary(q)) {
                echelon.insert(&z);
            }
            let size = echelon.rank() - boundary_rank;
            debug_assert_eq!(size, self.groups[q].free_rank);
            CohomologyBasis { echelon, boundary_rank, size }
        })
    }

    /// Coordinates of a cocycle's class in the chosen basis.
    fn coordinates(&self, q: usize, cocycle: &QVec) -> Vec<BigRational> {
        let basis = self.basis(q);
        let (rem, combo) = basis.echelon.reduce(cocycle);
        debug_assert!(rem.is_empty(), "restricted cochain is not a cocycle");
        let mut out = vec![BigRational::zero(); basis.size];
        for (j, v) in combo {
            if j >= basis.boundary_rank {
                out[j - basis.boundary_rank] = v;
            }
        }
        out
    }

    fn representative(&self, q: usize, k: usize) -> QVec {
        let basis = self.basis(q);
        basis.echelon.input(basis.boundary_rank + k).clone()
    }
}

fn int_row(m: &SparseMatrix, i: usize) -> QVec {
    m.row(i).iter().map(|&(j, v)| (j, linalg::q_from_int(v))).collect()
}

/// `H^q_{2n} = H^q(S_n)` for all weights `n` of `R(0, c)` together with the
/// `U`-action induced by the inclusions `S_n ⊆ S_{n+1}`.
#[derive(Debug)]
pub struct LatticeCohomology {
    table: Arc<CubeTable>,
    n_min: i64,
    n_max: i64,
    levels: Vec<Level>,
}

impl LatticeCohomology {
    /// Builds all sublevel complexes of the weight grid restricted to `R(0, c)`.
    pub fn assemble(w: &ValueGrid, conductor: &LatticePoint) -> Result<Self> {
        let table = CubeTable::weighted(w, conductor.coords())?;
        let weights: Vec<i64> = (0..table.count(0)).map(|id| table.weight(0, id)).collect();
        let n_min = *weights.iter().min().expect("nonempty box");
        let n_max = *weights.iter().max().expect("nonempty box");
        let r = table.branches();
        let levels = (n_min..=n_max)
            .map(|n| {
                let complex = CubicalComplex::sublevel(&table, n);
                let components = complex.connected_components();
                let groups = complex.cohomology_with(components.count());
                Level { n, complex, components, groups, bases: (0..=r).map(|_| OnceLock::new()).collect() }
            })
            .collect();
        Ok(Self { table, n_min, n_max, levels })
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn branches(&self) -> usize {
        self.table.branches()
    }

    pub fn table(&self) -> &Arc<CubeTable> {
        &self.table
    }

    /// The sublevel data for `n_min <= n <= n_max`.
    pub fn level(&self, n: i64) -> Option<&Level> {
        (n >= self.n_min && n <= self.n_max).then(|| &self.levels[(n - self.n_min) as usize])
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// `H^q_{2n}`; zero below `n_min`, `Z` in degree 0 and zero otherwise above `n_max`.
    pub fn group(&self, q: usize, n: i64) -> CohomologyGroup {
        if q > self.branches() {
            return CohomologyGroup::default();
        }
        match self.level(n) {
            Some(l) => l.groups[q].clone(),
            None if n > self.n_max && q == 0 => CohomologyGroup::free(1),
            None => CohomologyGroup::default(),
        }
    }

    /// Free rank of the reduced group `H^q_{red,2n}`.
    pub fn reduced_rank(&self, q: usize, n: i64) -> usize {
        let g = self.group(q, n);
        if q == 0 {
            g.free_rank.saturating_sub(1)
        } else {
            g.free_rank
        }
    }

    /// Whether some reduced group (free part or torsion) at level `n` is nonzero.
    pub fn reduced_nonzero(&self, n: i64) -> Vec<usize> {
        (0..=self.branches())
            .filter(|&q| self.reduced_rank(q, n) > 0 || !self.group(q, n).torsion.is_empty())
            .collect()
    }

    /// Matrix of the restriction `H^q(S_from) -> H^q(S_to)` for `to <= from`,
    /// in the bases of the two levels. Rows index the target basis.
    pub fn restriction_matrix(&self, q: usize, from: i64, to: i64) -> Result<Vec<Vec<BigRational>>> {
        if to > from {
            return Err(Error::InvalidInput(format!("restriction needs to <= from, got {to} > {from}")));
        }
        if q > self.branches() {
            return Ok(Vec::new());
        }
        let rows = self.group(q, to).free_rank;
        let cols = self.group(q, from).free_rank;
        if rows == 0 || cols == 0 {
            return Ok(vec![vec![BigRational::zero(); cols]; rows]);
        }
        // both levels are in range except possibly above n_max, where S_n is the whole box
        let from_c = from.min(self.n_max);
        let to_c = to.min(self.n_max);
        let src = self.level(from_c).expect("in range");
        let dst = self.level(to_c).expect("in range");
        if q == 0 {
            let mut m = vec![vec![BigRational::zero(); cols]; rows];
            for k in 0..rows {
                let v = dst.components.representative_id(k);
                let parent = src.components.component_of_vertex(v).expect("sublevel sets increase");
                m[k][parent] = BigRational::one();
            }
            return Ok(m);
        }
        let src_ids = src.complex.cell_ids(q);
        let dst_pos = dst.complex.positions(q);
        let mut m = vec![vec![BigRational::zero(); cols]; rows];
        for j in 0..cols {
            let rep = src.representative(q, j);
            let restricted: QVec = rep
                .into_iter()
                .filter_map(|(p, v)| {
                    let pos = dst_pos[src_ids[p]];
                    (pos != u32::MAX).then_some((pos as usize, v))
                })
                .collect::<BTreeMap<_, _>>()
                .into_iter()
                .collect();
            for (i, x) in dst.coordinates(q, &restricted).into_iter().enumerate() {
                m[i][j] = x;
            }
        }
        Ok(m)
    }

    /// The `U`-map `H^q_{2n+2} -> H^q_{2n}`.
    pub fn u_matrix(&self, q: usize, n: i64) -> Result<Vec<Vec<BigRational>>> {
        self.restriction_matrix(q, n + 1, n)
    }

    /// Rank of the kernel of `U : H^0_{2n} -> H^0_{2n-2}`: the number of
    /// components of `S_n` that do not meet `S_{n-1}`.
    pub fn ker_u_rank(&self, n: i64) -> usize {
        let Some(level) = self.level(n) else { return 0 };
        let Some(below) = self.level(n - 1) else { return level.components.count() };
        let mut hit = vec![false; level.components.count()];
        for &v in below.complex.cell_ids(0) {
            hit[level.components.component_of_vertex(v).expect("sublevel sets increase")] = true;
        }
        hit.iter().filter(|&&h| !h).count()
    }

    /// Components of `S_n` that do not meet `S_{n-1}`, by their labels.
    pub fn ker_u_components(&self, n: i64) -> Vec<LatticePoint> {
        let Some(level) = self.level(n) else { return Vec::new() };
        let labels = level.components.labels();
        let Some(below) = self.level(n - 1) else { return labels };
        let mut hit = vec![false; labels.len()];
        for &v in below.complex.cell_ids(0) {
            hit[level.components.component_of_vertex(v).expect("sublevel sets increase")] = true;
        }
        labels.into_iter().zip(hit).filter(|(_, h)| !h).map(|(l, _)| l).collect()
    }

    /// Whether `H^0_red` vanishes in every degree.
    pub fn h0_reduced_is_zero(&self) -> bool {
        (self.n_min..=self.n_max).all(|n| self.reduced_rank(0, n) == 0)
    }

    /// Whether `H^0_{2n} = 0` for every `n < 0`.
    pub fn h0_negative_is_zero(&self) -> bool {
        self.n_min >= 0
    }

    /// `eu(H^*) = -n_min + Σ_q (-1)^q rank H^q_red`.
    pub fn euler_characteristic(&self) -> i64 {
        let mut total = -self.n_min;
        for q in 0..=self.branches() {
            let sum: i64 = (self.n_min..=self.n_max).map(|n| self.reduced_rank(q, n) as i64).sum();
            total += if q % 2 == 0 { sum } else { -sum };
        }
        total
    }

    pub fn summary(&self) -> ModuleSummary {
        let mut reduced = BTreeMap::new();
        for q in 0..=self.branches() {
            let per_n: BTreeMap<i64, usize> = (self.n_min..=self.n_max)
                .map(|n| (n, self.reduced_rank(q, n)))
                .filter(|(_, r)| *r > 0)
                .collect();
            if !per_n.is_empty() {
                reduced.insert(q, per_n);
            }
        }
        let ker_u = (self.n_min..=self.n_max).map(|n| (n, self.ker_u_rank(n))).filter(|(_, r)| *r > 0).collect();
        ModuleSummary { n_min: self.n_min, eu: self.euler_characteristic(), reduced, ker_u }
    }

    pub fn graded_root(&self) -> GradedRoot {
        let mut levels = Vec::new();
        for level in &self.levels {
            let labels = level.components.labels();
            let parents = match self.level(level.n + 1) {
                Some(up) => (0..labels.len())
                    .map(|k| {
                        up.components
                            .component_of_vertex(level.components.representative_id(k))
                            .expect("sublevel sets increase")
                    })
                    .collect(),
                None => vec![0; labels.len()],
            };
            levels.push(RootLevel { n: level.n, vertices: labels, parents });
        }
        GradedRoot { n_min: self.n_min, stem_from: self.n_max, levels }
    }
}

/// Reduced ranks, Euler characteristic and `ker U` ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleSummary {
    pub n_min: i64,
    pub eu: i64,
    /// `q -> n -> rank H^q_{red,2n}`, nonzero entries only.
    pub reduced: BTreeMap<usize, BTreeMap<i64, usize>>,
    /// `n -> rank ker(U : H^0_{2n} -> H^0_{2n-2})`, nonzero entries only.
    #[serde(rename = "kerU")]
    pub ker_u: BTreeMap<i64, usize>,
}

impl ModuleSummary {
    pub fn total_reduced(&self, q: usize) -> usize {
        self.reduced.get(&q).map_or(0, |m| m.values().sum())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootLevel {
    pub n: i64,
    /// Component labels (lexicographically minimal vertices).
    pub vertices: Vec<LatticePoint>,
    /// Index of the component at level `n + 1` containing each vertex.
    pub parents: Vec<usize>,
}

/// The level tree of components of the sublevel filtration. From `stem_from`
/// upwards every level has a single vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedRoot {
    pub n_min: i64,
    pub stem_from: i64,
    pub levels: Vec<RootLevel>,
}

impl GradedRoot {
    pub fn level(&self, n: i64) -> Option<&RootLevel> {
        (n >= self.n_min && n <= self.stem_from).then(|| &self.levels[(n - self.n_min) as usize])
    }

    /// Number of vertices at level `n`.
    pub fn width(&self, n: i64) -> usize {
        if n > self.stem_from {
            return 1;
        }
        self.level(n).map_or(0, |l| l.vertices.len())
    }

    /// Vertices below the stem.
    pub fn finite_vertex_count(&self) -> usize {
        self.levels.iter().filter(|l| l.n < self.stem_from).map(|l| l.vertices.len()).sum()
    }

    /// Vertices with no child, as `(level, label)`.
    pub fn leaves(&self) -> Vec<(i64, LatticePoint)> {
        let mut out = Vec::new();
        for (k, level) in self.levels.iter().enumerate() {
            for (v, label) in level.vertices.iter().enumerate() {
                let has_child = k > 0 && self.levels[k - 1].parents.contains(&v);
                if !has_child {
                    out.push((level.n, label.clone()));
                }
            }
        }
        out
    }

    /// `#{vertices at levels <= 0} - 1`, which equals δ when `H^{>=1} = 0`.
    pub fn delete_positive_vertices_delta(&self, lc: &LatticeCohomology) -> Result<i64> {
        for q in 1..=lc.branches() {
            if let Some(n) = (lc.n_min..=lc.n_max).find(|&n| !lc.group(q, n).is_zero()) {
                return Err(Error::NotApplicable(format!("H^{q}_{{2·{n}}} is nonzero")));
            }
        }
        let count: usize = (self.n_min..=0).map(|n| self.width(n)).sum();
        Ok(count as i64 - 1)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph graded_root {\n  rankdir=BT;\n  node [shape=point];\n");
        for level in self.levels.iter().filter(|l| l.n < self.stem_from) {
            let _ = write!(s, "  {{ rank=same;");
            for k in 0..level.vertices.len() {
                let _ = write!(s, " {};", node_name(level.n, k));
            }
            s.push_str(" }\n");
            for (k, v) in level.vertices.iter().enumerate() {
                let _ = writeln!(s, "  {} [level={}, xlabel=\"{}\"];", node_name(level.n, k), level.n, v);
            }
        }
        let _ = writeln!(
            s,
            "  stem [shape=plaintext, level={}, label=\"stem: one vertex at every level >= {}\"];",
            self.stem_from, self.stem_from
        );
        for level in self.levels.iter().filter(|l| l.n < self.stem_from) {
            for (k, &p) in level.parents.iter().enumerate() {
                let target =
                    if level.n + 1 >= self.stem_from { "stem".to_string() } else { node_name(level.n + 1, p) };
                let _ = writeln!(s, "  {} -> {};", node_name(level.n, k), target);
            }
        }
        s.push_str("}\n");
        s
    }

    /// One line per level from the top: each vertex label with the label of
    /// the vertex above it.
    pub fn to_ascii(&self) -> String {
        let mut s = format!("n >= {}: stem\n", self.stem_from);
        let width = self.levels.iter().map(|l| l.n.to_string().len()).max().unwrap_or(1);
        for (k, level) in self.levels.iter().enumerate().rev() {
            if level.n >= self.stem_from {
                continue;
            }
            let up = &self.levels[k + 1];
            let items: Vec<String> = level
                .vertices
                .iter()
                .zip(&level.parents)
                .map(|(v, &p)| {
                    if up.n >= self.stem_from {
                        format!("{v}->stem")
                    } else {
                        format!("{v}->{}", up.vertices[p])
                    }
                })
                .collect();
            let _ = writeln!(s, "n = {:>width$}: {}", level.n, items.join("  "));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut id_of = BTreeMap::new();
        for level in &self.levels {
            for (k, v) in level.vertices.iter().enumerate() {
                let id = vertices.len();
                id_of.insert((level.n, k), id);
                vertices.push(serde_json::json!({ "id": id, "level": level.n, "label": v }));
            }
        }
        for level in self.levels.iter().filter(|l| l.n < self.stem_from) {
            for (k, &p) in level.parents.iter().enumerate() {
                edges.push(serde_json::json!([id_of[&(level.n, k)], id_of[&(level.n + 1, p)]]));
            }
        }
        serde_json::json!({
            "n_min": self.n_min,
            "stem_from": self.stem_from,
            "vertices": vertices,
            "edges": edges,
        })
    }
}

fn node_name(n: i64, k: usize) -> String {
    if n < 0 {
        format!("v_m{}_{k}", -n)
    } else {
        format!("v_{n}_{k}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hilbert_grid_default, weight_grid};
    use crate::semigroup::{pt, GoodSemigroup};

    fn numerical(gens: &[u64]) -> GoodSemigroup {
        GoodSemigroup::from_numerical_generators(gens).unwrap()
    }

    fn lc(s: &GoodSemigroup) -> LatticeCohomology {
        LatticeCohomology::assemble(&weight_grid(&hilbert_grid_default(s)), s.conductor()).unwrap()
    }

    fn wedge34() -> GoodSemigroup {
        GoodSemigroup::wedge(&numerical(&[3, 4]), &numerical(&[3, 4]))
    }

    fn triple() -> GoodSemigroup {
        let node = GoodSemigroup::wedge(&GoodSemigroup::smooth(), &GoodSemigroup::smooth());
        GoodSemigroup::wedge(&node, &GoodSemigroup::smooth())
    }

    fn h0(l: &LatticeCohomology, n: i64) -> usize {
        l.group(0, n).free_rank
    }

    #[test]
    fn h0_ranks_of_45() {
        let l = lc(&numerical(&[4, 5]));
        assert_eq!((l.n_min(), l.n_max()), (-2, 1));
        assert_eq!([h0(&l, -3), h0(&l, -2), h0(&l, -1), h0(&l, 0), h0(&l, 1), h0(&l, 7)], [0, 2, 2, 3, 1, 1]);
        assert!((l.n_min()..=l.n_max()).all(|n| l.group(1, n).is_zero()));
        let sum = l.summary();
        assert_eq!(sum.total_reduced(0), 4);
        assert_eq!(sum.reduced[&0], BTreeMap::from([(-2, 1), (-1, 1), (0, 2)]));
        assert_eq!(sum.eu, 6);
        assert_eq!(l.ker_u_rank(0), 2);
        assert_eq!(l.ker_u_components(0), vec![pt(&[0]), pt(&[12])]);
    }

    #[test]
    fn smooth_and_small_cases() {
        let l = lc(&GoodSemigroup::smooth());
        assert_eq!((l.n_min(), l.n_max()), (0, 0));
        assert_eq!(h0(&l, 0), 1);
        assert_eq!(h0(&l, 5), 1);
        assert_eq!(l.summary().total_reduced(0), 0);
        assert_eq!(l.euler_characteristic(), 0);

        let l = lc(&numerical(&[2, 3]));
        assert_eq!(l.summary().total_reduced(0), 1);
        assert_eq!(l.summary().reduced[&0], BTreeMap::from([(0, 1)]));
        assert_eq!(l.euler_characteristic(), 1);

        let l = lc(&numerical(&[3, 4]));
        assert_eq!(l.summary().total_reduced(0), 2);
        assert_eq!(l.euler_characteristic(), 3);
    }

    #[test]
    fn triple_point() {
        let l = lc(&triple());
        assert_eq!(l.euler_characteristic(), 2);
        assert_eq!(l.n_min(), -1);
    }

    #[test]
    fn graded_roots() {
        let root = lc(&numerical(&[4, 5])).graded_root();
        assert_eq!([root.width(0), root.width(-1), root.width(-2), root.width(1), root.width(9)], [3, 2, 2, 1, 1]);
        assert_eq!(root.finite_vertex_count(), 7);

        let root = lc(&numerical(&[4, 5, 6, 7])).graded_root();
        assert_eq!([root.width(0), root.width(-1), root.width(-2)], [2, 1, 1]);

        // {0}, the segment through m = 4, and {c} = {8}
        let root = lc(&numerical(&[4, 5, 6])).graded_root();
        assert_eq!(root.width(0), 3);
        assert!(root.leaves().contains(&(-2, pt(&[4]))));

        let root = lc(&wedge34()).graded_root();
        let mut negative: Vec<i64> = root.leaves().into_iter().map(|(n, _)| n).filter(|&n| n < 0).collect();
        negative.sort();
        assert_eq!(negative, vec![-4, -3, -3, -2]);
    }

    #[test]
    fn ker_u() {
        assert_eq!(lc(&numerical(&[4, 5, 7])).ker_u_rank(0), 1);
        let l = lc(&wedge34());
        assert_eq!(l.ker_u_rank(-3), 2);
        assert_eq!(l.ker_u_rank(l.n_max() + 1), 0);
        assert_eq!(l.ker_u_rank(l.n_min()), h0(&l, l.n_min()));
    }

    #[test]
    fn u_matrices_q0() {
        let l = lc(&numerical(&[4, 5]));
        let m = l.u_matrix(0, -1).unwrap();
        // H^0(S_0) = Z^3 -> H^0(S_{-1}) = Z^2: both components of S_{-1} lie in the middle segment
        let one = BigRational::one();
        let zero = BigRational::zero();
        assert_eq!(m, vec![vec![zero.clone(), one.clone(), zero.clone()], vec![zero.clone(), one.clone(), zero.clone()]]);
        assert_eq!(linalg::dense_rank(&m), 1);
        assert!(l.u_matrix(0, -3).unwrap().is_empty());
        assert_eq!(l.u_matrix(0, 4).unwrap(), vec![vec![one]]);
    }

    #[test]
    fn u_matrices_compose() {
        for s in [numerical(&[4, 5]), wedge34(), triple()] {
            let l = lc(&s);
            for q in 0..=s.branches() {
                for n in l.n_min() - 1..=l.n_max() {
                    let two = l.restriction_matrix(q, n + 2, n).unwrap();
                    let a = l.u_matrix(q, n).unwrap();
                    let b = l.u_matrix(q, n + 1).unwrap();
                    if !a.is_empty() && !b.is_empty() && !b[0].is_empty() {
                        assert_eq!(linalg::mat_mul(&a, &b), two, "q={q} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn u_maps_in_degree_one() {
        let s = GoodSemigroup::wedge(&numerical(&[4, 5]), &numerical(&[4, 5]));
        let l = lc(&s);
        let mut checked = 0;
        for n in l.n_min()..l.n_max() {
            let (a, b) = (l.group(1, n).free_rank, l.group(1, n + 1).free_rank);
            if a > 0 && b > 0 {
                let m = l.u_matrix(1, n).unwrap();
                assert_eq!((m.len(), m[0].len()), (a, b));
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn delta_from_root() {
        for (gens, delta) in [(vec![4, 5], 6), (vec![3, 4], 3), (vec![1], 0)] {
            let l = lc(&numerical(&gens));
            assert_eq!(l.graded_root().delete_positive_vertices_delta(&l).unwrap(), delta);
        }
    }

    #[test]
    fn exports() {
        let root = lc(&numerical(&[4, 5])).graded_root();
        let dot = root.to_dot();
        assert_eq!(dot.matches("[level=").count(), 7);
        assert!(dot.contains("stem"));
        let json = root.to_json();
        assert_eq!(json["vertices"].as_array().unwrap().len(), 8);
        assert_eq!(json["edges"].as_array().unwrap().len(), 7);
        let ascii = lc(&GoodSemigroup::smooth()).graded_root().to_ascii();
        assert_eq!(ascii, "n >= 0: stem\n");
        let summary = serde_json::to_value(lc(&numerical(&[4, 5])).summary()).unwrap();
        assert_eq!(summary["kerU"]["0"], 2);
        assert_eq!(summary["reduced"]["0"]["-2"], 1);
    }
}
