use super::one_cluster::{find_cluster_avoiding, Reserved};
use super::{dpow, ClusteredSet, ClusteringError, ScheduleRow};
use crate::triangle::TriangleSet;

/// Splits `set` into a clustered part `P` and a rest.
///
/// Clusters are found with slack `eps2 + delta` while at least
/// `d^(2 - eps2 - delta) n` triangles remain. Each cluster takes its inner
/// triangles into `P`; triangles merely touching it go to the rest and
/// are not revisited in this layer. Whatever remains at the end also
/// goes to the rest.
///
/// If fewer than `d` unclaimed nodes remain on some side the loop stops
/// early, since no further disjoint cluster can be formed.
pub fn extract_clustered_layer(
    set: &TriangleSet,
    eps2: f64,
    delta: f64,
    d: usize,
    n: usize,
) -> Result<(ClusteredSet, TriangleSet), ClusteringError> {
    let mut layer = ClusteredSet::new();
    let mut rest = TriangleSet::new(set.n());
    let mut work = set.clone();
    let mut reserved = Reserved::new(set.n());
    let stop_below = dpow(d, 2.0 - eps2 - delta) * n as f64;
    let eps = eps2 + delta;

    while work.len() as f64 >= stop_below && !work.is_empty() {
        let before = work.len();
        let (cluster, inside) = match find_cluster_avoiding(&work, eps, d, n, &reserved) {
            Ok(found) => found,
            Err(ClusteringError::NotEnoughFreeNodes { .. }) => break,
            Err(e) => return Err(e),
        };
        for t in &inside {
            work.remove(t);
        }
        let touching: Vec<_> = cluster
            .nodes()
            .flat_map(|v| work.touching(v).copied().collect::<Vec<_>>())
            .collect();
        for t in touching {
            if work.remove(&t) {
                rest.insert(t);
            }
        }
        reserved.insert_cluster(&cluster);
        layer.push(cluster, inside);
        if work.len() >= before {
            return Err(ClusteringError::Internal(
                "layer extraction made no progress".into(),
            ));
        }
    }
    rest.extend(work.iter().copied());
    Ok((layer, rest))
}

/// Peels clustered layers until at most `d^(2 - eps2) n` triangles remain.
///
/// Requires `|T| <= d^(2 - eps1) n`. Returns the layers and the residual.
pub fn decompose_layers(
    set: &TriangleSet,
    row: &ScheduleRow,
    d: usize,
    n: usize,
) -> Result<(Vec<ClusteredSet>, TriangleSet), ClusteringError> {
    let limit = dpow(d, 2.0 - row.eps1) * n as f64;
    if set.len() as f64 > limit {
        return Err(ClusteringError::TooManyTriangles {
            have: set.len(),
            limit,
        });
    }
    let target = dpow(d, 2.0 - row.eps2) * n as f64;
    let mut layers = Vec::new();
    let mut current = set.clone();
    while current.len() as f64 > target {
        let (layer, rest) = extract_clustered_layer(&current, row.eps2, row.delta, d, n)?;
        if layer.is_empty() {
            return Err(ClusteringError::Internal(
                "empty layer above the target size".into(),
            ));
        }
        layers.push(layer);
        current = rest;
    }
    Ok((layers, current))
}
