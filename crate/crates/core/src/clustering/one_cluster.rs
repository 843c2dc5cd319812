use std::collections::{BTreeMap, BTreeSet};

use super::{dpow, one_cluster_bound, ClusteringError};
use crate::triangle::{Cluster, NodeId, Side, TriangleSet};

/// Per-node labels of the search: `t` triangles into `J0 x K0`, `y` edges
/// into `J0`, `z` edges into `K0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NodeLabel {
    pub t: usize,
    pub y: usize,
    pub z: usize,
}

impl NodeLabel {
    pub fn e(&self) -> usize {
        self.y + self.z
    }
}

/// Everything the single-cluster search computes on its way to a cluster.
#[derive(Clone, Debug)]
pub struct ClusterSearchState {
    /// Triangles whose `J`-`K` edge is heavy.
    pub heavy: TriangleSet,
    /// The `I` node touching the most heavy triangles.
    pub pivot: u32,
    pub pivot_load: usize,
    /// `J` and `K` corners of the pivot's heavy triangles.
    pub j0: Vec<u32>,
    pub k0: Vec<u32>,
    /// Labels for every `I` node, indexed by node.
    pub labels: Vec<NodeLabel>,
    /// The `d` nodes with the largest `t`, ties by smallest index.
    pub top: Vec<u32>,
    pub sum_top: usize,
    pub sum_rest: usize,
    pub min_top: usize,
}

/// Triangles whose `J`-`K` edge lies in at least `ceil(d^(1-eps) / 2)` triangles of `set`.
pub fn find_heavy_triangles(set: &TriangleSet, eps: f64, d: usize) -> TriangleSet {
    let threshold = (dpow(d, 1.0 - eps) / 2.0).ceil().max(1.0) as usize;
    let mut multiplicity: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for t in set {
        *multiplicity.entry((t.j, t.k)).or_default() += 1;
    }
    TriangleSet::from_triangles(
        set.n(),
        set.iter()
            .filter(|t| multiplicity[&(t.j, t.k)] >= threshold)
            .copied(),
    )
}

/// Nodes already claimed by earlier clusters of the same layer.
#[derive(Clone, Debug)]
pub(crate) struct Reserved {
    taken: [Vec<bool>; 3],
}

impl Reserved {
    pub(crate) fn new(n: usize) -> Self {
        Reserved {
            taken: [vec![false; n], vec![false; n], vec![false; n]],
        }
    }

    pub(crate) fn contains(&self, v: NodeId) -> bool {
        self.taken[v.side as usize][v.index as usize]
    }

    pub(crate) fn insert_cluster(&mut self, c: &Cluster) {
        for v in c.nodes() {
            self.taken[v.side as usize][v.index as usize] = true;
        }
    }
}

fn check_preconditions(set: &TriangleSet, eps: f64, d: usize, n: usize) -> Result<(), ClusteringError> {
    if n < d || d == 0 {
        return Err(ClusteringError::DimensionTooSmall { n, d });
    }
    let need = dpow(d, 2.0 - eps) * n as f64;
    if (set.len() as f64) < need {
        return Err(ClusteringError::TooFewTriangles {
            have: set.len(),
            need,
        });
    }
    Ok(())
}

/// Runs the search up to the choice of the top `d` nodes, skipping reserved `I` nodes.
fn search(
    set: &TriangleSet,
    eps: f64,
    d: usize,
    n: usize,
    reserved: &Reserved,
) -> Result<ClusterSearchState, ClusteringError> {
    let heavy = find_heavy_triangles(set, eps, d);

    let (pivot, pivot_load) = (0..n as u32)
        .map(|i| (i, heavy.load(NodeId::i(i))))
        .fold((0, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let need = dpow(d, 2.0 - eps) / 2.0;
    if (pivot_load as f64) < need {
        return Err(ClusteringError::Internal(format!(
            "pivot I{pivot} touches {pivot_load} heavy triangles, fewer than {need:.3}"
        )));
    }

    let mut in_j0 = vec![false; n];
    let mut in_k0 = vec![false; n];
    for t in heavy.touching(NodeId::i(pivot)) {
        in_j0[t.j as usize] = true;
        in_k0[t.k as usize] = true;
    }
    let collect = |flags: &[bool]| -> Vec<u32> {
        flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(x, _)| x as u32)
            .collect()
    };
    let j0 = collect(&in_j0);
    let k0 = collect(&in_k0);

    let mut labels = vec![NodeLabel::default(); n];
    let mut ij_edges = BTreeSet::new();
    let mut ik_edges = BTreeSet::new();
    for t in &heavy {
        let (jin, kin) = (in_j0[t.j as usize], in_k0[t.k as usize]);
        if jin && kin {
            labels[t.i as usize].t += 1;
        }
        if jin && ij_edges.insert((t.i, t.j)) {
            labels[t.i as usize].y += 1;
        }
        if kin && ik_edges.insert((t.i, t.k)) {
            labels[t.i as usize].z += 1;
        }
    }

    let mut order: Vec<u32> = (0..n as u32)
        .filter(|&i| !reserved.contains(NodeId::i(i)))
        .collect();
    if order.len() < d {
        return Err(ClusteringError::NotEnoughFreeNodes { side: "I" });
    }
    order.sort_by(|&a, &b| labels[b as usize].t.cmp(&labels[a as usize].t).then(a.cmp(&b)));
    let mut top = order[..d].to_vec();
    top.sort_unstable();
    let sum_top = top.iter().map(|&i| labels[i as usize].t).sum();
    let sum_all: usize = labels.iter().map(|l| l.t).sum();
    let min_top = top.iter().map(|&i| labels[i as usize].t).min().unwrap_or(0);

    Ok(ClusterSearchState {
        heavy,
        pivot,
        pivot_load,
        j0,
        k0,
        labels,
        top,
        sum_top,
        sum_rest: sum_all - sum_top,
        min_top,
    })
}

/// The intermediate state of the single-cluster search, for inspection.
pub fn cluster_search_state(
    set: &TriangleSet,
    eps: f64,
    d: usize,
    n: usize,
) -> Result<ClusterSearchState, ClusteringError> {
    check_preconditions(set, eps, d, n)?;
    search(set, eps, d, n, &Reserved::new(n))
}

/// Pads `base` to `d` nodes with the smallest unreserved indices.
fn pad(
    base: &[u32],
    d: usize,
    n: usize,
    side: Side,
    reserved: &Reserved,
) -> Result<Vec<u32>, ClusteringError> {
    let mut out = base.to_vec();
    let mut candidate = 0u32;
    while out.len() < d {
        if candidate as usize >= n {
            return Err(ClusteringError::NotEnoughFreeNodes { side: side.name() });
        }
        let v = NodeId::new(side, candidate);
        if !reserved.contains(v) && base.binary_search(&candidate).is_err() {
            out.push(candidate);
        }
        candidate += 1;
    }
    Ok(out)
}

/// Finds a cluster avoiding `reserved` and returns it with the triangles it holds.
///
/// Reserved nodes touch no triangle of `set` (their triangles were removed
/// along with the cluster that claimed them), so excluding them from the
/// top-`d` choice and from padding loses nothing.
pub(crate) fn find_cluster_avoiding(
    set: &TriangleSet,
    eps: f64,
    d: usize,
    n: usize,
    reserved: &Reserved,
) -> Result<(Cluster, TriangleSet), ClusteringError> {
    check_preconditions(set, eps, d, n)?;
    let state = search(set, eps, d, n, reserved)?;
    let bound = one_cluster_bound(d, eps);
    if (state.sum_top as f64) < bound {
        return Err(ClusteringError::Internal(format!(
            "top nodes hold {} triangles, below the guaranteed {bound:.3}",
            state.sum_top
        )));
    }
    let j = pad(&state.j0, d, n, Side::J, reserved)?;
    let k = pad(&state.k0, d, n, Side::K, reserved)?;
    let cluster = Cluster::new(d, state.top, j, k).map_err(|e| ClusteringError::Internal(e.to_string()))?;
    debug_assert!(cluster.nodes().all(|v| !reserved.contains(v)));
    let inside = crate::triangle::triangles_in_cluster(set, &cluster);
    debug_assert!(inside.len() >= state.sum_top);
    Ok((cluster, inside))
}

/// Finds a cluster `U` with `|T[U]| >= d^(3 - 4 eps) / 24`.
///
/// Requires `n >= d` and `|T| >= d^(2 - eps) n`. Returns the cluster and `|T[U]|`.
pub fn find_one_cluster(
    set: &TriangleSet,
    eps: f64,
    d: usize,
    n: usize,
) -> Result<(Cluster, usize), ClusteringError> {
    let (cluster, inside) = find_cluster_avoiding(set, eps, d, n, &Reserved::new(n))?;
    Ok((cluster, inside.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangle::Triangle;

    /// `n / d` disjoint full clusters on consecutive indices.
    fn planted(n: usize, d: usize) -> TriangleSet {
        let mut set = TriangleSet::new(n);
        for c in 0..(n / d) as u32 {
            let base = c * d as u32;
            for a in 0..d as u32 {
                for b in 0..d as u32 {
                    for e in 0..d as u32 {
                        set.insert(Triangle::new(base + a, base + b, base + e));
                    }
                }
            }
        }
        set
    }

    #[test]
    fn full_cluster_is_all_heavy() {
        let set = planted(4, 4);
        assert_eq!(set.len(), 64);
        assert_eq!(find_heavy_triangles(&set, 0.0, 4).len(), 64);
    }

    #[test]
    fn single_multiplicity_edges_are_light() {
        // every J-K edge carries exactly one triangle
        let set = TriangleSet::from_triangles(8, (0..8).map(|x| Triangle::new(x, x, (x + 1) % 8)));
        assert!(find_heavy_triangles(&set, 0.0, 4).is_empty());
        assert_eq!(find_heavy_triangles(&set, 1.0, 4).len(), 8);
    }

    #[test]
    fn whole_instance_is_one_cluster() {
        let set = planted(2, 2);
        assert_eq!(set.len(), 8);
        let (u, count) = find_one_cluster(&set, 0.0, 2, 2).unwrap();
        assert_eq!(count, 8);
        assert_eq!(u.nodes().count(), 6);
    }

    #[test]
    fn planted_clusters_are_recovered_whole() {
        let set = planted(32, 4);
        assert_eq!(set.len(), 512);
        let (u, count) = find_one_cluster(&set, 0.0, 4, 32).unwrap();
        assert!(count as f64 >= one_cluster_bound(4, 0.0));
        // the best possible cluster holds one full plant
        assert_eq!(count, 64);
        assert_eq!(u.side(Side::I), u.side(Side::J));
    }

    #[test]
    fn state_invariants() {
        let set = planted(32, 4);
        let s = cluster_search_state(&set, 0.0, 4, 32).unwrap();
        assert!(s.j0.len() <= 4 && s.k0.len() <= 4);
        for l in &s.labels {
            assert_eq!(l.e(), l.y + l.z);
            assert!(l.t <= l.y * l.z);
        }
        assert_eq!(s.top.len(), 4);
        assert!(s.top.iter().all(|&i| s.labels[i as usize].t >= s.min_top));
        assert!(s.sum_top + s.sum_rest >= 64);
    }

    #[test]
    fn precondition_is_checked() {
        let set = planted(8, 4);
        assert!(matches!(
            find_one_cluster(&set, 0.0, 4, 16),
            Err(ClusteringError::TooFewTriangles { .. })
        ));
        assert!(matches!(
            find_one_cluster(&set, 0.0, 4, 3),
            Err(ClusteringError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn padding_skips_reserved_nodes() {
        let mut reserved = Reserved::new(6);
        let c = Cluster::new(2, vec![0, 1], vec![0, 1], vec![0, 1]).unwrap();
        reserved.insert_cluster(&c);
        assert_eq!(pad(&[4], 2, 6, Side::J, &reserved).unwrap(), vec![4, 2]);
        assert!(pad(&[], 5, 6, Side::J, &reserved).is_err());
    }
}
