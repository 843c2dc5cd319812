use std::collections::{BTreeMap, BTreeSet};

use super::brute::brute_force_plan;
use super::{
    key_a, key_b, key_partial, run_plans, AlgoError, DenseEngine, Network, OutputAccumulator, PhasePlan,
};
use crate::clustering::ClusteredSet;
use crate::sim::{schedule_unicast, Demand, Expr, Transfer};
use crate::triangle::{Cluster, NodeId, Side, TriangleSet};

/// Largest `q` with `q^3 <= 3d`: the side of the processor cube.
pub fn processor_grid_side(d: usize) -> usize {
    let mut q = 1;
    while (q + 1) * (q + 1) * (q + 1) <= 3 * d {
        q += 1;
    }
    q
}

/// Three-dimensional split of the `d x d x d` index space of a cluster.
///
/// The first `q^3` cluster nodes (all `K` nodes, then `J`, then `I`, each
/// sorted) act as processors. The index at position `x` of a side belongs
/// to block `x mod q`, and processor `(a, b, c)` handles the triangles
/// whose `i`, `j`, `k` fall in blocks `a`, `b`, `c`. Stage one ships the
/// needed `A` and `B` entries to the processors, stage two ships the
/// partial sums to the output owners.
fn cube_plan(net: &Network<'_>, cluster: &Cluster, tu: &TriangleSet) -> (PhasePlan, Vec<(u32, u32)>) {
    let n = net.inst.n;
    let q = processor_grid_side(cluster.d());
    let processors: Vec<usize> = [Side::K, Side::J, Side::I]
        .into_iter()
        .flat_map(|s| cluster.side(s).iter().map(move |&x| NodeId::new(s, x).flat(n)))
        .take(q * q * q)
        .collect();
    let pos = |s: Side, x: u32| {
        cluster
            .side(s)
            .binary_search(&x)
            .expect("triangle inside the cluster")
            % q
    };

    let mut need_a = BTreeSet::new();
    let mut need_b = BTreeSet::new();
    let mut partials: BTreeMap<(usize, u32, u32), Vec<_>> = BTreeMap::new();
    for t in tu.iter() {
        let p = processors[pos(Side::I, t.i) * q * q + pos(Side::J, t.j) * q + pos(Side::K, t.k)];
        need_a.insert((p, t.i, t.j));
        need_b.insert((p, t.j, t.k));
        partials
            .entry((p, t.i, t.k))
            .or_default()
            .push((key_a(t.i, t.j), key_b(t.j, t.k)));
    }

    let load = |key| Transfer {
        key,
        expr: Expr::Load(key),
    };
    let mut stage1 = Vec::with_capacity(need_a.len() + need_b.len());
    for (p, i, j) in need_a {
        stage1.push(Demand {
            src: NodeId::i(i).flat(n),
            dst: p,
            payload: load(key_a(i, j)),
        });
    }
    for (p, j, k) in need_b {
        stage1.push(Demand {
            src: NodeId::j(j).flat(n),
            dst: p,
            payload: load(key_b(j, k)),
        });
    }

    let mut stage2 = Vec::with_capacity(partials.len());
    let mut per_output: BTreeMap<(u32, u32), Vec<_>> = BTreeMap::new();
    for ((p, i, k), pairs) in partials {
        let key = key_partial(i, k, p as u32);
        stage2.push(Demand {
            src: p,
            dst: NodeId::i(i).flat(n),
            payload: Transfer {
                key,
                expr: Expr::SumOfProducts(pairs),
            },
        });
        per_output.entry((i, k)).or_default().push(key);
    }

    let mut outputs = Vec::with_capacity(per_output.len());
    let mut readout = Vec::with_capacity(per_output.len());
    for ((i, k), keys) in per_output {
        outputs.push((i, k));
        readout.push((NodeId::i(i).flat(n), Expr::Sum(keys)));
    }
    let plan = PhasePlan {
        stages: vec![schedule_unicast(stage1), schedule_unicast(stage2)],
        readout,
    };
    (plan, outputs)
}

fn cluster_plan(
    net: &Network<'_>,
    cluster: &Cluster,
    tu: &TriangleSet,
    engine: DenseEngine,
) -> Result<(PhasePlan, Vec<(u32, u32)>), AlgoError> {
    if let Some(t) = tu.iter().find(|t| !cluster.contains_triangle(t)) {
        return Err(AlgoError::Internal(format!(
            "triangle {t} lies outside its cluster"
        )));
    }
    Ok(match engine {
        DenseEngine::Naive => brute_force_plan(net, tu),
        DenseEngine::Semiring3d => cube_plan(net, cluster, tu),
    })
}

/// Processes triangles inside one cluster using only the cluster's nodes.
pub fn process_cluster_dense(
    net: &mut Network<'_>,
    cluster: &Cluster,
    tu: &TriangleSet,
    acc: &mut OutputAccumulator,
    engine: DenseEngine,
) -> Result<u64, AlgoError> {
    let mut set = ClusteredSet::new();
    set.push(cluster.clone(), tu.clone());
    process_clustered_set(net, &set, acc, engine)
}

/// Processes every cluster of `p` at the same time; the clusters are
/// disjoint, so the cost is the slowest cluster's cost.
pub fn process_clustered_set(
    net: &mut Network<'_>,
    p: &ClusteredSet,
    acc: &mut OutputAccumulator,
    engine: DenseEngine,
) -> Result<u64, AlgoError> {
    p.validate()
        .map_err(|e| AlgoError::Internal(format!("clustered set is invalid: {e}")))?;
    if p.is_empty() {
        return Ok(0);
    }
    let mut plans = Vec::with_capacity(p.clusters.len());
    let mut outputs = Vec::with_capacity(p.clusters.len());
    for (cluster, tu) in p.iter() {
        let (plan, out) = cluster_plan(net, cluster, tu, engine)?;
        plans.push(plan);
        outputs.push(out);
    }
    let (rounds, values) = run_plans(net, plans)?;
    for (out, vals) in outputs.into_iter().zip(values) {
        for ((i, k), v) in out.into_iter().zip(vals) {
            acc.add(i, k, v)?;
        }
    }
    acc.mark_processed(p.triangles())?;
    Ok(rounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_side() {
        assert_eq!(processor_grid_side(1), 1);
        assert_eq!(processor_grid_side(3), 2);
        assert_eq!(processor_grid_side(8), 2);
        assert_eq!(processor_grid_side(9), 3);
        assert_eq!(processor_grid_side(32), 4);
        assert_eq!(processor_grid_side(64), 5);
    }
}
