//! Cubical complexes inside a lattice box and their integral cohomology.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{GridRole, ValueGrid};
use crate::lattice::{GridShape, LatticePoint};
use crate::smith::{self, SparseMatrix};

/// The cube with vertices `base + e_K` for `K ⊆ dirs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cube {
    pub base: LatticePoint,
    /// Sorted direction indices.
    pub dirs: Vec<usize>,
}

impl Cube {
    pub fn new(base: LatticePoint, mut dirs: Vec<usize>) -> Result<Self> {
        dirs.sort_unstable();
        dirs.dedup();
        if let Some(&i) = dirs.iter().find(|&&i| i >= base.dim()) {
            return Err(Error::InvalidInput(format!("cube direction {i} out of range for {base}")));
        }
        Ok(Self { base, dirs })
    }

    pub fn vertex(base: LatticePoint) -> Self {
        Self { base, dirs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn vertices(&self) -> Vec<LatticePoint> {
        (0u32..1 << self.dirs.len())
            .map(|k| {
                let mut v = self.base.coords().to_vec();
                for (t, &i) in self.dirs.iter().enumerate() {
                    v[i] += i64::from(k >> t & 1);
                }
                LatticePoint::from_vec_unchecked(v)
            })
            .collect()
    }
}

/// Weight of a cube: the maximum of `w` over its vertices.
pub fn cube_weight(w: &ValueGrid, cube: &Cube) -> Result<i64> {
    cube.vertices()
        .iter()
        .map(|v| w.value(v).ok_or_else(|| Error::Precondition(format!("cube vertex {v} lies outside the grid"))))
        .try_fold(i64::MIN, |acc, x| x.map(|x| acc.max(x)))
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    base: u32,
    mask: u32,
    weight: i64,
}

/// Every cube of a box `R(0, c)`, grouped by dimension, with weights and
/// face incidences.
#[derive(Debug)]
pub struct CubeTable {
    shape: GridShape,
    cells: Vec<Vec<Cell>>,
    /// `base * 2^r + mask` to the id of the cell within its dimension.
    lookup: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl CubeTable {
    /// All cubes of `R(0, upper)` with zero weights.
    pub fn unweighted(upper: &[i64]) -> Arc<Self> {
        Arc::new(Self::build(GridShape::new(upper), |_, _| 0))
    }

    /// All cubes of `R(0, upper)` weighted by the maximum of `w` over their vertices.
    pub fn weighted(w: &ValueGrid, upper: &[i64]) -> Result<Arc<Self>> {
        if w.role() != GridRole::Weight {
            return Err(Error::Precondition("cube weights need a weight grid".into()));
        }
        if upper.len() != w.upper().len() || !crate::lattice::le(upper, w.upper()) {
            return Err(Error::Precondition(format!("box {upper:?} is not inside the weight grid")));
        }
        let shape = GridShape::new(upper);
        let vertex_weight: Vec<i64> =
            (0..shape.len()).map(|idx| w.get(&shape.point(idx)).expect("inside")).collect();
        Ok(Arc::new(Self::build(shape, |shape, cell: (usize, u32)| {
            let (base, mask) = cell;
            let mut best = i64::MIN;
            for_each_submask(mask, |sub| {
                let idx = offset(shape, base, sub);
                best = best.max(vertex_weight[idx]);
            });
            best
        })))
    }

    fn build(shape: GridShape, weight: impl Fn(&GridShape, (usize, u32)) -> i64) -> Self {
        let r = shape.dim();
        assert!(r < 31, "too many branches for a cube table");
        let mut cells = vec![Vec::new(); r + 1];
        let mut lookup = vec![ABSENT; shape.len() << r];
        for base in 0..shape.len() {
            for mask in 0u32..1 << r {
                let fits = (0..r).all(|i| mask >> i & 1 == 0 || shape.step_up(base, i).is_some());
                if !fits {
                    continue;
                }
                let q = mask.count_ones() as usize;
                lookup[(base << r) | mask as usize] = cells[q].len() as u32;
                cells[q].push(Cell { base: base as u32, mask, weight: weight(&shape, (base, mask)) });
            }
        }
        Self { shape, cells, lookup }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn branches(&self) -> usize {
        self.shape.dim()
    }

    pub fn count(&self, q: usize) -> usize {
        self.cells.get(q).map_or(0, Vec::len)
    }

    pub fn weight(&self, q: usize, id: usize) -> i64 {
        self.cells[q][id].weight
    }

    pub fn cube(&self, q: usize, id: usize) -> Cube {
        let c = self.cells[q][id];
        Cube {
            base: LatticePoint::from_vec_unchecked(self.shape.point(c.base as usize)),
            dirs: (0..self.branches()).filter(|i| c.mask >> i & 1 == 1).collect(),
        }
    }

    pub fn id_of(&self, cube: &Cube) -> Option<(usize, usize)> {
        let base = self.shape.index(cube.base.coords())?;
        let mut mask = 0u32;
        for &i in &cube.dirs {
            mask |= 1 << i;
        }
        let id = *self.lookup.get((base << self.branches()) | mask as usize)?;
        (id != ABSENT).then_some((cube.dirs.len(), id as usize))
    }

    /// Codimension-one faces of a `q`-cell with incidence signs: for the
    /// `k`-th direction `i` of the cube, `(base + e_i, I ∖ i)` carries
    /// `(-1)^k` and `(base, I ∖ i)` carries `-(-1)^k`.
    pub fn faces(&self, q: usize, id: usize) -> Vec<(usize, i64)> {
        let c = self.cells[q][id];
        let r = self.branches();
        let mut out = Vec::with_capacity(2 * q);
        let mut k = 0;
        for i in 0..r {
            if c.mask >> i & 1 == 0 {
                continue;
            }
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let mask = c.mask & !(1 << i);
            let up = self.shape.step_up(c.base as usize, i).expect("cube inside the box");
            out.push((self.lookup[(up << r) | mask as usize] as usize, sign));
            out.push((self.lookup[((c.base as usize) << r) | mask as usize] as usize, -sign));
            k += 1;
        }
        out
    }

    /// Image of a cell under `l -> upper - l`.
    pub fn mirror(&self, q: usize, id: usize) -> usize {
        let c = self.cells[q][id];
        let r = self.branches();
        let far = offset(&self.shape, c.base as usize, c.mask);
        let base = self.shape.mirror(far);
        self.lookup[(base << r) | c.mask as usize] as usize
    }
}

fn offset(shape: &GridShape, base: usize, mask: u32) -> usize {
    (0..shape.dim()).filter(|i| mask >> i & 1 == 1).map(|i| shape.stride(i)).sum::<usize>() + base
}

fn for_each_submask(mask: u32, mut f: impl FnMut(u32)) {
    let mut sub = mask;
    loop {
        f(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
}

/// A face-closed set of cubes of a [`CubeTable`].
#[derive(Clone, Debug)]
pub struct CubicalComplex {
    table: Arc<CubeTable>,
    /// Sorted cell ids per dimension.
    cells: Vec<Vec<usize>>,
}

impl PartialEq for CubicalComplex {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) && self.cells == other.cells
    }
}

impl CubicalComplex {
    /// The sublevel complex: all cubes of weight at most `n`.
    pub fn sublevel(table: &Arc<CubeTable>, n: i64) -> Self {
        let cells = (0..=table.branches())
            .map(|q| (0..table.count(q)).filter(|&id| table.weight(q, id) <= n).collect())
            .collect();
        Self { table: Arc::clone(table), cells }
    }

    /// The face closure of the given cubes.
    pub fn from_cubes(table: &Arc<CubeTable>, cubes: &[Cube]) -> Result<Self> {
        let r = table.branches();
        let mut marks: Vec<Vec<bool>> = (0..=r).map(|q| vec![false; table.count(q)]).collect();
        let mut stack = Vec::new();
        for cube in cubes {
            if cube.base.dim() != r {
                return Err(Error::DimensionMismatch { expected: r, found: cube.base.dim() });
            }
            let cell = table
                .id_of(cube)
                .ok_or_else(|| Error::InvalidInput(format!("cube {cube:?} is not inside the box")))?;
            stack.push(cell);
        }
        while let Some((q, id)) = stack.pop() {
            if std::mem::replace(&mut marks[q][id], true) {
                continue;
            }
            if q > 0 {
                stack.extend(table.faces(q, id).into_iter().map(|(f, _)| (q - 1, f)));
            }
        }
        let cells = marks
            .iter()
            .map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
            .collect();
        Ok(Self { table: Arc::clone(table), cells })
    }

    pub fn table(&self) -> &Arc<CubeTable> {
        &self.table
    }

    pub fn count(&self, q: usize) -> usize {
        self.cells.get(q).map_or(0, Vec::len)
    }

    pub fn cell_ids(&self, q: usize) -> &[usize] {
        &self.cells[q]
    }

    pub fn is_empty(&self) -> bool {
        self.cells[0].is_empty()
    }

    pub fn contains(&self, q: usize, id: usize) -> bool {
        self.cells.get(q).is_some_and(|c| c.binary_search(&id).is_ok())
    }

    pub fn cubes(&self) -> Vec<Cube> {
        (0..self.cells.len())
            .flat_map(|q| self.cells[q].iter().map(move |&id| (q, id)))
            .map(|(q, id)| self.table.cube(q, id))
            .collect()
    }

    /// Whether every cube of `self` is a cube of `other`.
    pub fn is_subcomplex_of(&self, other: &CubicalComplex) -> bool {
        (0..self.cells.len()).all(|q| self.cells[q].iter().all(|&id| other.contains(q, id)))
    }

    /// `sum_q (-1)^q #(q-cubes)`.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells.iter().enumerate().map(|(q, c)| if q % 2 == 0 { c.len() as i64 } else { -(c.len() as i64) }).sum()
    }

    /// Matrix of `δ^q : C^q -> C^{q+1}`: rows are the `(q+1)`-cells and
    /// columns the `q`-cells of the complex, in cell-id order.
    pub fn coboundary(&self, q: usize) -> SparseMatrix {
        let rows = self.count(q + 1);
        let cols = self.count(q);
        let mut m = SparseMatrix::new(rows, cols);
        if rows == 0 {
            return m;
        }
        let pos = self.positions(q);
        for (row, &id) in self.cells[q + 1].iter().enumerate() {
            for (face, sign) in self.table.faces(q + 1, id) {
                m.add(row, pos[face] as usize, sign);
            }
        }
        m
    }

    /// Position of each table cell of dimension `q` within this complex.
    pub(crate) fn positions(&self, q: usize) -> Vec<u32> {
        let mut pos = vec![ABSENT; self.table.count(q)];
        for (k, &id) in self.cells[q].iter().enumerate() {
            pos[id] = k as u32;
        }
        pos
    }

    pub fn connected_components(&self) -> Components {
        let pos = self.positions(0);
        let mut uf = UnionFind::new(self.count(0));
        if self.count(1) > 0 {
            for &id in &self.cells[1] {
                let f = self.table.faces(1, id);
                uf.union(pos[f[0].0] as usize, pos[f[1].0] as usize);
            }
        }
        // vertex ids follow the lexicographic order, so the smallest member of
        // each class is its lexicographically minimal vertex
        let mut label_of_root = vec![ABSENT; self.count(0)];
        let mut representatives = Vec::new();
        let mut labels = Vec::with_capacity(self.count(0));
        for k in 0..self.count(0) {
            let root = uf.find(k);
            if label_of_root[root] == ABSENT {
                label_of_root[root] = representatives.len() as u32;
                representatives.push(self.cells[0][k]);
            }
            labels.push(label_of_root[root] as usize);
        }
        Components { table: Arc::clone(&self.table), vertices: self.cells[0].clone(), labels, representatives }
    }

    /// Integral cohomology `H^q` for `q = 0..=r`.
    ///
    /// `δ^0` is the incidence matrix of a graph, which is totally unimodular,
    /// so its rank comes from the component count and it adds no torsion.
    pub fn cohomology(&self) -> Vec<CohomologyGroup> {
        self.cohomology_with(self.connected_components().count())
    }

    pub(crate) fn cohomology_with(&self, components: usize) -> Vec<CohomologyGroup> {
        let r = self.table.branches();
        let mut ranks = vec![0usize; r + 1];
        let mut torsions: Vec<Vec<BigInt>> = vec![Vec::new(); r + 1];
        ranks[0] = self.count(0) - components;
        for q in 1..r {
            if self.count(q + 1) == 0 {
                continue;
            }
            let f = smith::invariant_factors(&self.coboundary(q));
            ranks[q] = f.len();
            torsions[q] = f.into_iter().filter(|d| !d.is_one()).collect();
        }
        (0..=r)
            .map(|q| CohomologyGroup {
                free_rank: self.count(q) - ranks[q] - if q > 0 { ranks[q - 1] } else { 0 },
                torsion: if q > 0 { torsions[q - 1].clone() } else { Vec::new() },
            })
            .collect()
    }
}

/// Connected components of a complex, labelled by their lexicographically
/// minimal vertex.
#[derive(Clone, Debug)]
pub struct Components {
    table: Arc<CubeTable>,
    vertices: Vec<usize>,
    labels: Vec<usize>,
    representatives: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.representatives.len()
    }

    /// Representative vertices in lexicographic order.
    pub fn labels(&self) -> Vec<LatticePoint> {
        self.representatives.iter().map(|&v| self.vertex_point(v)).collect()
    }

    /// Component index of a vertex, if the vertex belongs to the complex.
    pub fn component_of(&self, p: &LatticePoint) -> Option<usize> {
        let (q, id) = self.table.id_of(&Cube::vertex(p.clone()))?;
        debug_assert_eq!(q, 0);
        self.component_of_vertex(id)
    }

    pub(crate) fn component_of_vertex(&self, id: usize) -> Option<usize> {
        self.vertices.binary_search(&id).ok().map(|k| self.labels[k])
    }

    /// Vertices of component `k`.
    pub fn members(&self, k: usize) -> Vec<LatticePoint> {
        self.vertices
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == k)
            .map(|(&v, _)| self.vertex_point(v))
            .collect()
    }

    pub(crate) fn representative_id(&self, k: usize) -> usize {
        self.representatives[k]
    }

    fn vertex_point(&self, id: usize) -> LatticePoint {
        self.table.cube(0, id).base
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.parent[hi] = lo;
        }
    }
}

/// A finitely generated abelian group `Z^free_rank ⊕ ⊕ Z/d`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CohomologyGroup {
    pub free_rank: usize,
    /// Invariant factors greater than one, each dividing the next.
    #[serde(serialize_with = "as_strings")]
    pub torsion: Vec<BigInt>,
}

impl CohomologyGroup {
    pub fn free(rank: usize) -> Self {
        Self { free_rank: rank, torsion: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

fn as_strings<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|d| d.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hilbert_grid_default, weight_grid};
    use crate::semigroup::{pt, GoodSemigroup};
    use proptest::prelude::*;

    fn numerical(gens: &[u64]) -> GoodSemigroup {
        GoodSemigroup::from_numerical_generators(gens).unwrap()
    }

    fn table_of(s: &GoodSemigroup) -> (ValueGrid, Arc<CubeTable>) {
        let w = weight_grid(&hilbert_grid_default(s));
        let t = CubeTable::weighted(&w, s.conductor().coords()).unwrap();
        (w, t)
    }

    fn triple() -> GoodSemigroup {
        let node = GoodSemigroup::wedge(&GoodSemigroup::smooth(), &GoodSemigroup::smooth());
        GoodSemigroup::wedge(&node, &GoodSemigroup::smooth())
    }

    fn ranks(groups: &[CohomologyGroup]) -> Vec<usize> {
        groups.iter().map(|g| g.free_rank).collect()
    }

    #[test]
    fn cube_weights() {
        let s = numerical(&[4, 5]);
        let w = weight_grid(&hilbert_grid_default(&s));
        assert_eq!(cube_weight(&w, &Cube::new(pt(&[3]), vec![0]).unwrap()).unwrap(), -1);
        assert_eq!(cube_weight(&w, &Cube::vertex(pt(&[4]))).unwrap(), -2);
        let w = weight_grid(&hilbert_grid_default(&triple()));
        assert_eq!(cube_weight(&w, &Cube::new(pt(&[0, 0, 0]), vec![0, 1, 2]).unwrap()).unwrap(), 1);
        assert!(cube_weight(&w, &Cube::new(pt(&[2, 2, 2]), vec![0]).unwrap()).is_err());
    }

    #[test]
    fn sublevels_of_45() {
        let (_, t) = table_of(&numerical(&[4, 5]));
        let k = CubicalComplex::sublevel(&t, -2);
        assert_eq!(k.cubes(), vec![Cube::vertex(pt(&[4])), Cube::vertex(pt(&[8]))]);
        let comps = CubicalComplex::sublevel(&t, 0).connected_components();
        assert_eq!(comps.count(), 3);
        assert_eq!(comps.labels(), vec![pt(&[0]), pt(&[2]), pt(&[12])]);
        assert_eq!(comps.members(1).len(), 9);
        assert!(CubicalComplex::sublevel(&t, -3).is_empty());
        assert_eq!(CubicalComplex::sublevel(&t, -3).connected_components().count(), 0);
        assert_eq!(ranks(&CubicalComplex::sublevel(&t, 0).cohomology()), vec![3, 0]);
        let full = CubicalComplex::sublevel(&t, 1);
        assert_eq!(full.count(0), 13);
        assert_eq!(ranks(&full.cohomology()), vec![1, 0]);
    }

    #[test]
    fn wedge_components_at_minus_one() {
        let (_, t) = table_of(&GoodSemigroup::wedge(&numerical(&[3, 4]), &numerical(&[3, 4])));
        let comps = CubicalComplex::sublevel(&t, -1).connected_components();
        for p in [[3, 3], [3, 6], [6, 3], [6, 6]] {
            assert!(comps.component_of(&pt(&p)).is_some());
        }
        assert!(comps.component_of(&pt(&[0, 0])).is_none());
    }

    #[test]
    fn triple_point_full_cube_is_a_point() {
        let (_, t) = table_of(&triple());
        let k = CubicalComplex::sublevel(&t, 1);
        assert_eq!(k.count(3), 1);
        let h = k.cohomology();
        assert_eq!(ranks(&h), vec![1, 0, 0, 0]);
        assert!(h.iter().all(|g| g.torsion.is_empty()));
    }

    #[test]
    fn hollow_square_is_a_circle() {
        let t = CubeTable::unweighted(&[1, 1]);
        let edges: Vec<Cube> = [([0, 0], 0), ([0, 0], 1), ([1, 0], 1), ([0, 1], 0)]
            .iter()
            .map(|(b, i)| Cube::new(pt(b), vec![*i]).unwrap())
            .collect();
        let k = CubicalComplex::from_cubes(&t, &edges).unwrap();
        assert_eq!((k.count(0), k.count(1), k.count(2)), (4, 4, 0));
        assert_eq!(ranks(&k.cohomology()), vec![1, 1, 0]);
    }

    #[test]
    fn hollow_cube_is_a_sphere() {
        let t = CubeTable::unweighted(&[1, 1, 1]);
        let full = CubicalComplex::from_cubes(&t, &[Cube::new(pt(&[0, 0, 0]), vec![0, 1, 2]).unwrap()]).unwrap();
        let faces: Vec<Cube> = full.cubes().into_iter().filter(|c| c.dim() == 2).collect();
        let k = CubicalComplex::from_cubes(&t, &faces).unwrap();
        assert_eq!(ranks(&k.cohomology()), vec![1, 0, 1, 0]);
    }

    #[test]
    fn coboundary_squares_to_zero() {
        let t = CubeTable::unweighted(&[2, 2, 1]);
        let k = CubicalComplex::sublevel(&t, 0);
        for q in 0..2 {
            let a = k.coboundary(q).to_dense();
            let b = k.coboundary(q + 1).to_dense();
            for (i, brow) in b.iter().enumerate() {
                for j in 0..a[0].len() {
                    let v: i64 = brow.iter().zip(&a).map(|(x, arow)| x * arow[j]).sum();
                    assert_eq!(v, 0, "q={q} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn mirror_is_an_involution() {
        let t = CubeTable::unweighted(&[3, 2]);
        for q in 0..=2 {
            for id in 0..t.count(q) {
                assert_eq!(t.mirror(q, t.mirror(q, id)), id);
            }
        }
        assert_eq!(t.cube(0, t.mirror(0, 0)).base, pt(&[3, 2]));
        let e = t.id_of(&Cube::new(pt(&[0, 0]), vec![1]).unwrap()).unwrap();
        assert_eq!(t.cube(1, t.mirror(1, e.1)), Cube::new(pt(&[3, 1]), vec![1]).unwrap());
    }

    proptest! {
        /// Random face-closed complexes in a 3×3×2 box: Euler characteristic
        /// agrees with the alternating sum of Betti numbers, and H^0 counts components.
        #[test]
        fn euler_and_components(picks in proptest::collection::vec((0usize..100, 0usize..4), 0..12)) {
            let t = CubeTable::unweighted(&[2, 2, 1]);
            let cubes: Vec<Cube> = picks
                .iter()
                .filter_map(|&(a, q)| {
                    let n = t.count(q);
                    (n > 0).then(|| t.cube(q, a % n))
                })
                .collect();
            let k = CubicalComplex::from_cubes(&t, &cubes).unwrap();
            let h = k.cohomology();
            let betti: i64 = h.iter().enumerate().map(|(q, g)| if q % 2 == 0 { g.free_rank as i64 } else { -(g.free_rank as i64) }).sum();
            prop_assert_eq!(betti, k.euler_characteristic());
            let comps = k.connected_components().count();
            prop_assert_eq!(h[0].free_rank, comps);
            prop_assert_eq!(smith::rank(&k.coboundary(0)), k.count(0) - comps);
            prop_assert!(smith::torsion(&k.coboundary(0)).is_empty());
            prop_assert!(h[3].is_zero());
        }
    }
}
