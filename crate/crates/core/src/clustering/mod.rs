//! Preprocessing: peeling clustered layers off a triangle set.
//!
//! [`find_one_cluster`] locates one cluster holding many triangles,
//! [`extract_clustered_layer`] repeats that on disjoint clusters to build
//! one clustered layer, [`decompose_layers`] stacks layers until the rest
//! is small, and [`schedule_decompose`] chains several parameter rows.
//!
//! All of this depends only on the sparsity structure and therefore costs
//! no communication rounds at runtime.
//!
//! The asymptotic guarantees of the layer routines assume `d` is "large".
//! We call `d` large for a row with slack `delta` when `d^delta >= 2`; the
//! routines run for every `d`, but the yield and layer-count bounds are
//! only promised (and only asserted by callers) in the large regime.

mod layer;
mod one_cluster;
mod schedule;

pub use layer::{decompose_layers, extract_clustered_layer};
pub use one_cluster::{
    cluster_search_state, find_heavy_triangles, find_one_cluster, ClusterSearchState, NodeLabel,
};
pub use schedule::{schedule_decompose, Decomposition, Schedule, ScheduleRow};

use std::collections::BTreeSet;

use crate::triangle::{Cluster, Triangle, TriangleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusteringError {
    #[error("need at least {need:.3} triangles, got {have}")]
    TooFewTriangles { have: usize, need: f64 },
    #[error("at most {limit:.3} triangles allowed, got {have}")]
    TooManyTriangles { have: usize, limit: f64 },
    #[error("n = {n} is smaller than d = {d}")]
    DimensionTooSmall { n: usize, d: usize },
    #[error("not enough unused {side} nodes to complete a cluster")]
    NotEnoughFreeNodes { side: &'static str },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("schedule row {row}: {reason}")]
    MalformedSchedule { row: usize, reason: String },
    #[error("schedule line {line}: {msg}")]
    ScheduleParse { line: usize, msg: String },
}

/// `d^e` as a float.
#[inline]
pub(crate) fn dpow(d: usize, e: f64) -> f64 {
    (d as f64).powf(e)
}

/// `d^delta >= 2`: the regime where the layer bounds are guaranteed.
pub fn is_large(d: usize, delta: f64) -> bool {
    dpow(d, delta) >= 2.0
}

/// Guaranteed size of the cluster found by [`find_one_cluster`]: `d^(3-4 eps) / 24`.
pub fn one_cluster_bound(d: usize, eps: f64) -> f64 {
    dpow(d, 3.0 - 4.0 * eps) / 24.0
}

/// Guaranteed layer yield: `d^(2 - 5 eps2 - 4 delta) n / 144`.
pub fn layer_yield_bound(d: usize, n: usize, eps2: f64, delta: f64) -> f64 {
    dpow(d, 2.0 - 5.0 * eps2 - 4.0 * delta) * n as f64 / 144.0
}

/// Layer-count ceiling: `144 d^(5 eps2 - eps1 + 4 delta)`.
pub fn layer_count_bound(d: usize, row: &ScheduleRow) -> f64 {
    144.0 * dpow(d, 5.0 * row.eps2 - row.eps1 + 4.0 * row.delta)
}

/// A clustered triangle set: disjoint clusters, each with the triangles it owns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusteredSet {
    pub clusters: Vec<Cluster>,
    pub per_cluster: Vec<TriangleSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusteredSetError {
    #[error("{clusters} clusters but {sets} triangle sets")]
    Misaligned { clusters: usize, sets: usize },
    #[error("clusters {0} and {1} share a node")]
    Overlap(usize, usize),
    #[error("triangle {triangle} is not inside cluster {cluster}")]
    Escapes { cluster: usize, triangle: Triangle },
}

impl ClusteredSet {
    pub fn new() -> Self {
        ClusteredSet {
            clusters: Vec::new(),
            per_cluster: Vec::new(),
        }
    }

    pub fn push(&mut self, cluster: Cluster, triangles: TriangleSet) {
        self.clusters.push(cluster);
        self.per_cluster.push(triangles);
    }

    /// Total number of triangles.
    pub fn len(&self) -> usize {
        self.per_cluster.iter().map(TriangleSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cluster, &TriangleSet)> + '_ {
        self.clusters.iter().zip(&self.per_cluster)
    }

    pub fn triangles(&self) -> impl Iterator<Item = &Triangle> + '_ {
        self.per_cluster.iter().flat_map(|s| s.iter())
    }

    /// Checks that the clusters are pairwise disjoint and own their triangles.
    pub fn validate(&self) -> Result<(), ClusteredSetError> {
        if self.clusters.len() != self.per_cluster.len() {
            return Err(ClusteredSetError::Misaligned {
                clusters: self.clusters.len(),
                sets: self.per_cluster.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for (m, c) in self.clusters.iter().enumerate() {
            for v in c.nodes() {
                if !seen.insert(v) {
                    let other = self.clusters[..m].iter().position(|o| o.contains(v)).unwrap_or(m);
                    return Err(ClusteredSetError::Overlap(other, m));
                }
            }
        }
        for (m, (c, set)) in self.iter().enumerate() {
            if let Some(t) = set.iter().find(|t| !c.contains_triangle(t)) {
                return Err(ClusteredSetError::Escapes {
                    cluster: m,
                    triangle: *t,
                });
            }
        }
        Ok(())
    }
}

impl Default for ClusteredSet {
    fn default() -> Self {
        ClusteredSet::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        assert!((one_cluster_bound(2, 0.0) - 8.0 / 24.0).abs() < 1e-12);
        assert!((one_cluster_bound(8, 0.25) - 64.0 / 24.0).abs() < 1e-9);
        // d = 4, n = 32, eps2 = 0, delta = 0.05
        let y = layer_yield_bound(4, 32, 0.0, 0.05);
        assert!((y - 4f64.powf(1.8) * 32.0 / 144.0).abs() < 1e-9);
        assert_eq!(y.ceil(), 3.0);
        // d = 16, n = 256, eps2 = 0.1, delta = 0.05
        assert_eq!(layer_yield_bound(16, 256, 0.1, 0.05).ceil(), 66.0);
        assert!(is_large(4, 0.5));
        assert!(!is_large(4, 0.05));
    }

    #[test]
    fn clustered_set_validation() {
        let c0 = Cluster::new(1, vec![0], vec![0], vec![0]).unwrap();
        let c1 = Cluster::new(1, vec![1], vec![1], vec![1]).unwrap();
        let mut set = ClusteredSet::new();
        set.push(
            c0.clone(),
            TriangleSet::from_triangles(2, [Triangle::new(0, 0, 0)]),
        );
        set.push(c1, TriangleSet::from_triangles(2, [Triangle::new(1, 1, 1)]));
        assert_eq!(set.validate(), Ok(()));
        assert_eq!(set.len(), 2);

        let mut overlapping = set.clone();
        overlapping.push(c0.clone(), TriangleSet::new(2));
        assert_eq!(overlapping.validate(), Err(ClusteredSetError::Overlap(0, 2)));

        let mut escaping = ClusteredSet::new();
        escaping.push(c0, TriangleSet::from_triangles(2, [Triangle::new(0, 1, 0)]));
        assert!(matches!(
            escaping.validate(),
            Err(ClusteredSetError::Escapes { cluster: 0, .. })
        ));
    }
}
