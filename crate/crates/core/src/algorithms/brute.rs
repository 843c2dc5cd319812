use std::collections::BTreeMap;

use super::{key_a, key_b, run_plans, AlgoError, Network, OutputAccumulator, PhasePlan};
use crate::sim::{schedule_unicast, Demand, Expr, Transfer};
use crate::triangle::{NodeId, TriangleSet};

/// Plan in which `J_j` sends `B_jk` to `I_i` for every triangle and `I_i`
/// sums the products locally.
pub(crate) fn brute_force_plan(net: &Network<'_>, set: &TriangleSet) -> (PhasePlan, Vec<(u32, u32)>) {
    let n = net.inst.n;
    let mut demands = Vec::with_capacity(set.len());
    let mut products: BTreeMap<(u32, u32), Vec<_>> = BTreeMap::new();
    for t in set.iter() {
        demands.push(Demand {
            src: NodeId::j(t.j).flat(n),
            dst: NodeId::i(t.i).flat(n),
            payload: Transfer {
                key: key_b(t.j, t.k),
                expr: Expr::Load(key_b(t.j, t.k)),
            },
        });
        products
            .entry((t.i, t.k))
            .or_default()
            .push((key_a(t.i, t.j), key_b(t.j, t.k)));
    }
    let mut outputs = Vec::with_capacity(products.len());
    let mut readout = Vec::with_capacity(products.len());
    for ((i, k), pairs) in products {
        outputs.push((i, k));
        readout.push((NodeId::i(i).flat(n), Expr::SumOfProducts(pairs)));
    }
    let plan = PhasePlan {
        stages: vec![schedule_unicast(demands)],
        readout,
    };
    (plan, outputs)
}

/// Processes `set` by sending one `B` entry per triangle to the output
/// owner. With per-node load at most `t` this takes at most `2t - 1` rounds.
pub fn process_brute_force(
    net: &mut Network<'_>,
    set: &TriangleSet,
    acc: &mut OutputAccumulator,
) -> Result<u64, AlgoError> {
    if set.is_empty() {
        return Ok(0);
    }
    let (plan, outputs) = brute_force_plan(net, set);
    let (rounds, mut values) = run_plans(net, vec![plan])?;
    for ((i, k), v) in outputs.into_iter().zip(values.pop().unwrap_or_default()) {
        acc.add(i, k, v)?;
    }
    acc.mark_processed(set.iter())?;
    Ok(rounds)
}
