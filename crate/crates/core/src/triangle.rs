//! Tripartite nodes, triangles, triangle sets and clusters.
//!
//! Nodes live in three sides `I`, `J`, `K` of `n` nodes each. A triangle
//! `{i, j, k}` is a potentially non-zero product `A[i][j] * B[j][k]` that
//! contributes to a requested output `X[i][k]`.

use std::collections::BTreeSet;
use std::fmt;

use crate::instance::TriInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    I = 0,
    J = 1,
    K = 2,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::I, Side::J, Side::K];

    pub fn name(self) -> &'static str {
        match self {
            Side::I => "I",
            Side::J => "J",
            Side::K => "K",
        }
    }
}

/// A node of the tripartite universe `V = I ∪ J ∪ K`, `|V| = 3n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub side: Side,
    pub index: u32,
}

impl NodeId {
    pub const fn new(side: Side, index: u32) -> Self {
        NodeId { side, index }
    }

    pub const fn i(index: u32) -> Self {
        NodeId::new(Side::I, index)
    }

    pub const fn j(index: u32) -> Self {
        NodeId::new(Side::J, index)
    }

    pub const fn k(index: u32) -> Self {
        NodeId::new(Side::K, index)
    }

    /// Dense index in `0..3n`: all of `I`, then `J`, then `K`.
    #[inline]
    pub fn flat(self, n: usize) -> usize {
        self.side as usize * n + self.index as usize
    }

    #[inline]
    pub fn from_flat(flat: usize, n: usize) -> Self {
        let side = Side::ALL[flat / n];
        NodeId::new(side, (flat % n) as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side.name(), self.index)
    }
}

/// A tripartite triangle, stored by its three indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl Triangle {
    pub const fn new(i: u32, j: u32, k: u32) -> Self {
        Triangle { i, j, k }
    }

    pub fn corners(self) -> [NodeId; 3] {
        [NodeId::i(self.i), NodeId::j(self.j), NodeId::k(self.k)]
    }

    pub fn corner(self, side: Side) -> u32 {
        match side {
            Side::I => self.i,
            Side::J => self.j,
            Side::K => self.k,
        }
    }

    pub fn touches(self, node: NodeId) -> bool {
        self.corner(node.side) == node.index
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{I{}, J{}, K{}}}", self.i, self.j, self.k)
    }
}

/// A set of triangles with an eagerly maintained per-node incidence index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleSet {
    n: usize,
    triangles: BTreeSet<Triangle>,
    incidence: Vec<BTreeSet<Triangle>>,
}

impl TriangleSet {
    /// An empty set over a universe with `n` nodes per side.
    pub fn new(n: usize) -> Self {
        TriangleSet {
            n,
            triangles: BTreeSet::new(),
            incidence: vec![BTreeSet::new(); 3 * n],
        }
    }

    pub fn from_triangles<I: IntoIterator<Item = Triangle>>(n: usize, triangles: I) -> Self {
        let mut set = TriangleSet::new(n);
        set.extend(triangles);
        set
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn contains(&self, t: &Triangle) -> bool {
        self.triangles.contains(t)
    }

    /// Triangles in `(i, j, k)` order.
    pub fn iter(&self) -> impl Iterator<Item = &Triangle> + '_ {
        self.triangles.iter()
    }

    pub fn insert(&mut self, t: Triangle) -> bool {
        assert!(
            (t.i as usize) < self.n && (t.j as usize) < self.n && (t.k as usize) < self.n,
            "triangle {t} outside universe of size {}",
            self.n
        );
        if !self.triangles.insert(t) {
            return false;
        }
        for v in t.corners() {
            self.incidence[v.flat(self.n)].insert(t);
        }
        true
    }

    pub fn remove(&mut self, t: &Triangle) -> bool {
        if !self.triangles.remove(t) {
            return false;
        }
        for v in t.corners() {
            self.incidence[v.flat(self.n)].remove(t);
        }
        true
    }

    pub fn extend<I: IntoIterator<Item = Triangle>>(&mut self, triangles: I) {
        for t in triangles {
            self.insert(t);
        }
    }

    /// Number of triangles touching `node`.
    #[inline]
    pub fn load(&self, node: NodeId) -> usize {
        self.incidence.get(node.flat(self.n)).map_or(0, BTreeSet::len)
    }

    pub fn touching(&self, node: NodeId) -> impl Iterator<Item = &Triangle> + '_ {
        self.incidence[node.flat(self.n)].iter()
    }

    pub fn max_load(&self) -> usize {
        self.incidence.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Nodes touched by at least one triangle, in flat order.
    pub fn touched_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.incidence
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(f, _)| NodeId::from_flat(f, self.n))
    }

    pub fn to_vec(&self) -> Vec<Triangle> {
        self.triangles.iter().copied().collect()
    }

    /// Checks that the incidence index agrees with the set.
    pub fn incidence_consistent(&self) -> bool {
        let total: usize = self.incidence.iter().map(BTreeSet::len).sum();
        total == 3 * self.triangles.len()
            && self.triangles.iter().all(|t| {
                t.corners()
                    .iter()
                    .all(|v| self.incidence[v.flat(self.n)].contains(t))
            })
    }
}

impl<'a> IntoIterator for &'a TriangleSet {
    type Item = &'a Triangle;
    type IntoIter = std::collections::btree_set::Iter<'a, Triangle>;

    fn into_iter(self) -> Self::IntoIter {
        self.triangles.iter()
    }
}

/// All triangles of an instance: `{(i, j, k) : Â[i][j], B̂[j][k], X̂[i][k] all set}`.
pub fn enumerate_triangles(inst: &TriInstance) -> TriangleSet {
    let mut set = TriangleSet::new(inst.n);
    for i in 0..inst.n as u32 {
        for &j in inst.a.pattern.row(i) {
            for &k in inst.b.pattern.row(j) {
                if inst.x.contains(i, k) {
                    set.insert(Triangle::new(i, j, k));
                }
            }
        }
    }
    set
}

/// The graph `G(T)` on `V` whose edges are the pairs covered by some triangle.
#[derive(Clone, Debug)]
pub struct SupportGraph {
    n: usize,
    adjacency: Vec<BTreeSet<NodeId>>,
}

impl SupportGraph {
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[v.flat(self.n)].iter().copied()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.flat(self.n)].len()
    }

    /// Neighbours of `v` on a given side.
    pub fn side_degree(&self, v: NodeId, side: Side) -> usize {
        self.neighbors(v).filter(|u| u.side == side).count()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.flat(self.n)].contains(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Number of edges with one end on `a` and the other on `b` (`a != b`).
    pub fn edges_between(&self, a: Side, b: Side) -> usize {
        assert_ne!(a, b);
        (0..self.n as u32)
            .map(|x| self.side_degree(NodeId::new(a, x), b))
            .sum()
    }
}

pub fn support_graph(set: &TriangleSet) -> SupportGraph {
    let n = set.n();
    let mut adjacency = vec![BTreeSet::new(); 3 * n];
    for t in set {
        let [a, b, c] = t.corners();
        for (u, v) in [(a, b), (b, c), (a, c)] {
            adjacency[u.flat(n)].insert(v);
            adjacency[v.flat(n)].insert(u);
        }
    }
    SupportGraph { n, adjacency }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("cluster side {side} has {got} distinct nodes, expected {d}")]
    WrongSize {
        side: &'static str,
        got: usize,
        d: usize,
    },
}

/// `d` nodes from each of `I`, `J` and `K`. Member lists are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cluster {
    i: Vec<u32>,
    j: Vec<u32>,
    k: Vec<u32>,
}

impl Cluster {
    pub fn new(d: usize, i: Vec<u32>, j: Vec<u32>, k: Vec<u32>) -> Result<Self, ClusterError> {
        let norm = |mut v: Vec<u32>, side: Side| {
            v.sort_unstable();
            v.dedup();
            if v.len() == d {
                Ok(v)
            } else {
                Err(ClusterError::WrongSize {
                    side: side.name(),
                    got: v.len(),
                    d,
                })
            }
        };
        Ok(Cluster {
            i: norm(i, Side::I)?,
            j: norm(j, Side::J)?,
            k: norm(k, Side::K)?,
        })
    }

    pub fn d(&self) -> usize {
        self.i.len()
    }

    pub fn side(&self, side: Side) -> &[u32] {
        match side {
            Side::I => &self.i,
            Side::J => &self.j,
            Side::K => &self.k,
        }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.side(v.side).binary_search(&v.index).is_ok()
    }

    pub fn contains_triangle(&self, t: &Triangle) -> bool {
        t.corners().iter().all(|&v| self.contains(v))
    }

    /// Members in `I`, `J`, `K` order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        Side::ALL
            .into_iter()
            .flat_map(move |s| self.side(s).iter().map(move |&x| NodeId::new(s, x)))
    }

    pub fn is_disjoint(&self, other: &Cluster) -> bool {
        Side::ALL.iter().all(|&s| {
            let theirs = other.side(s);
            self.side(s).iter().all(|x| theirs.binary_search(x).is_err())
        })
    }
}

/// `T[U]`: the triangles of `set` lying entirely inside `cluster`.
pub fn triangles_in_cluster(set: &TriangleSet, cluster: &Cluster) -> TriangleSet {
    let mut out = TriangleSet::new(set.n());
    for &i in cluster.side(Side::I) {
        if i as usize >= set.n() {
            continue;
        }
        out.extend(
            set.touching(NodeId::i(i))
                .filter(|t| cluster.contains_triangle(t))
                .copied(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SupportedMatrix;
    use crate::pattern::SparsePattern;
    use crate::semiring::Semiring;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pattern_instance(
        n: usize,
        d: usize,
        a: SparsePattern,
        b: SparsePattern,
        x: SparsePattern,
    ) -> TriInstance {
        TriInstance::new(
            n,
            d,
            Semiring::Integer,
            SupportedMatrix::filled(a, 1),
            SupportedMatrix::filled(b, 1),
            x,
        )
        .unwrap()
    }

    fn random_pattern(rng: &mut ChaCha8Rng, n: usize, d: usize) -> SparsePattern {
        // union of d random permutations: at most d per row and column
        let mut entries = Vec::new();
        for _ in 0..d {
            let mut perm: Vec<u32> = (0..n as u32).collect();
            perm.shuffle(rng);
            for (r, &c) in perm.iter().enumerate() {
                if rng.gen_bool(0.8) {
                    entries.push((r as u32, c));
                }
            }
        }
        SparsePattern::from_entries(n, entries).unwrap()
    }

    /// Four disjoint full clusters with `d = 3` on `n = 12`.
    fn planted_full_clusters(n: usize, d: usize) -> TriInstance {
        let entries = (0..n as u32).flat_map(|r| {
            let base = r / d as u32 * d as u32;
            (0..d as u32).map(move |s| (r, base + s))
        });
        let p = SparsePattern::from_entries(n, entries).unwrap();
        pattern_instance(n, d, p.clone(), p.clone(), p)
    }

    #[test]
    fn identity_triangles_are_diagonal() {
        let p = SparsePattern::identity(3);
        let inst = pattern_instance(3, 1, p.clone(), p.clone(), p);
        let t = enumerate_triangles(&inst);
        assert_eq!(
            t.to_vec(),
            vec![
                Triangle::new(0, 0, 0),
                Triangle::new(1, 1, 1),
                Triangle::new(2, 2, 2)
            ]
        );
        assert!(t.incidence_consistent());
    }

    #[test]
    fn empty_output_pattern_gives_no_triangles() {
        let p = SparsePattern::identity(3);
        let inst = pattern_instance(3, 1, p.clone(), p, SparsePattern::empty(3));
        assert!(enumerate_triangles(&inst).is_empty());
    }

    #[test]
    fn enumeration_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..40 {
            let n = if trial < 30 { 6 } else { 40 };
            let d = 2 + trial % 3;
            let inst = pattern_instance(
                n,
                d,
                random_pattern(&mut rng, n, d),
                random_pattern(&mut rng, n, d),
                random_pattern(&mut rng, n, d),
            );
            let mut oracle = Vec::new();
            for i in 0..n as u32 {
                for j in 0..n as u32 {
                    for k in 0..n as u32 {
                        if inst.a.pattern.contains(i, j)
                            && inst.b.pattern.contains(j, k)
                            && inst.x.contains(i, k)
                        {
                            oracle.push(Triangle::new(i, j, k));
                        }
                    }
                }
            }
            let got = enumerate_triangles(&inst);
            assert_eq!(got.to_vec(), oracle);
            assert!(got.len() <= d * d * n);
            assert!(got.max_load() <= d * d);
        }
    }

    #[test]
    fn support_graph_of_one_triangle() {
        let set = TriangleSet::from_triangles(2, [Triangle::new(1, 0, 1)]);
        let g = support_graph(&set);
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(NodeId::i(1), NodeId::j(0)));
        assert!(g.has_edge(NodeId::j(0), NodeId::k(1)));
        assert!(g.has_edge(NodeId::k(1), NodeId::i(1)));
        assert_eq!(support_graph(&TriangleSet::new(2)).edge_count(), 0);
    }

    #[test]
    fn planted_clusters_support_graph_counts() {
        let (n, d) = (12, 3);
        let set = enumerate_triangles(&planted_full_clusters(n, d));
        assert_eq!(set.len(), 4 * 27);
        let g = support_graph(&set);
        // every cluster contributes d*d edges between each pair of sides
        assert_eq!(g.edges_between(Side::J, Side::K), 4 * 9);
        assert_eq!(g.edges_between(Side::I, Side::J), 4 * 9);
        assert_eq!(g.edges_between(Side::I, Side::K), 4 * 9);
        assert_eq!(g.max_degree(), 2 * d);
        assert!(g.edges_between(Side::J, Side::K) <= d * n);
    }

    #[test]
    fn cluster_triangle_extraction() {
        let (n, d) = (12, 3);
        let set = enumerate_triangles(&planted_full_clusters(n, d));
        let u = Cluster::new(d, vec![3, 4, 5], vec![3, 4, 5], vec![3, 4, 5]).unwrap();
        let inside = triangles_in_cluster(&set, &u);
        assert_eq!(inside.len(), 27);
        assert!(inside.iter().all(|t| u.contains_triangle(t)));

        let disjoint = Cluster::new(d, vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]).unwrap();
        assert!(triangles_in_cluster(&set, &disjoint).is_empty());

        let single = TriangleSet::from_triangles(n, [Triangle::new(7, 2, 9)]);
        let padded = Cluster::new(d, vec![0, 1, 7], vec![2, 5, 6], vec![9, 10, 11]).unwrap();
        assert_eq!(
            triangles_in_cluster(&single, &padded).to_vec(),
            vec![Triangle::new(7, 2, 9)]
        );
    }

    #[test]
    fn cluster_requires_exact_sizes() {
        assert!(Cluster::new(2, vec![0, 0], vec![0, 1], vec![0, 1]).is_err());
        assert!(Cluster::new(2, vec![0, 1, 2], vec![0, 1], vec![0, 1]).is_err());
        let a = Cluster::new(2, vec![0, 1], vec![0, 1], vec![0, 1]).unwrap();
        let b = Cluster::new(2, vec![2, 3], vec![2, 3], vec![1, 2]).unwrap();
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.nodes().count(), 6);
    }

    #[test]
    fn remove_keeps_incidence_consistent() {
        let mut set = TriangleSet::from_triangles(
            3,
            [
                Triangle::new(0, 1, 2),
                Triangle::new(0, 2, 2),
                Triangle::new(1, 1, 1),
            ],
        );
        assert_eq!(set.load(NodeId::i(0)), 2);
        assert!(set.remove(&Triangle::new(0, 1, 2)));
        assert!(!set.remove(&Triangle::new(0, 1, 2)));
        assert_eq!(set.load(NodeId::i(0)), 1);
        assert_eq!(set.load(NodeId::k(2)), 1);
        assert!(set.incidence_consistent());
        assert_eq!(set.touched_nodes().count(), 6);
    }
}
