use std::collections::{BTreeMap, BTreeSet};

use super::{key_a, key_b, run_plans, AlgoError, Network, OutputAccumulator, PhasePlan};
use crate::sim::{
    broadcast_many, convergecast_many, schedule_unicast, BroadcastTask, ConvergecastTask, Demand, Expr, Key,
    Payload, Transfer,
};
use crate::smallcomp::{
    assign_helpers, build_virtual_instance, chunk_triangles, classify_bad, color_or_fallback, default_colors,
    default_load_bound, single_color, SmallCompError, VirtualInstance,
};
use crate::triangle::{NodeId, Side, TriangleSet};

/// Explicit color count; the load bound becomes `2 * max_load / colors`.
pub type ColorOverride = Option<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct SmallConfig {
    pub eps: f64,
    pub colors: ColorOverride,
    pub max_attempts: u32,
    pub seed: u64,
}

impl SmallConfig {
    pub fn new(eps: f64) -> Self {
        SmallConfig {
            eps,
            colors: None,
            max_attempts: 32,
            seed: 0,
        }
    }
}

/// Diagnostics of one small-component run, maximised over chunks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SmallComponentStats {
    pub chunks: usize,
    pub bad_nodes: usize,
    pub colors: usize,
    pub fell_back: bool,
    pub load_bound: f64,
    pub max_virtual_load: usize,
    pub virtual_nodes: usize,
    pub broadcast_rounds: u64,
    pub brute_force_rounds: u64,
    pub convergecast_rounds: u64,
}

/// Processes a set with few triangles: splits bad nodes into colored
/// copies hosted by helpers, brute-forces the virtual instance and sums
/// the copies' outputs back at the owners.
///
/// Sets larger than `d^(2 - eps) n` are cut into chunks that are handled
/// one after the other.
pub fn process_small_component(
    net: &mut Network<'_>,
    set: &TriangleSet,
    cfg: &SmallConfig,
    acc: &mut OutputAccumulator,
) -> Result<(u64, SmallComponentStats), AlgoError> {
    let (n, d) = (net.inst.n, net.inst.d);
    let mut stats = SmallComponentStats::default();
    let mut total = 0;
    for chunk in chunk_triangles(set, d, n, cfg.eps) {
        stats.chunks += 1;
        total += process_chunk(net, &chunk, cfg, acc, &mut stats)?;
    }
    Ok((total, stats))
}

fn process_chunk(
    net: &mut Network<'_>,
    chunk: &TriangleSet,
    cfg: &SmallConfig,
    acc: &mut OutputAccumulator,
    stats: &mut SmallComponentStats,
) -> Result<u64, AlgoError> {
    let inst = net.inst;
    let (n, d) = (inst.n, inst.d);
    let bad = classify_bad(chunk, d, n, cfg.eps)?;
    let (colors, bound) = match cfg.colors {
        Some(0) => return Err(AlgoError::Config("color override must be positive".into())),
        Some(k) => {
            let max_load = bad
                .bad_nodes
                .iter()
                .map(|&v| bad.bad_triangles.load(v))
                .max()
                .unwrap_or(0);
            (k, 2.0 * max_load as f64 / k as f64)
        }
        None => (default_colors(d, cfg.eps), default_load_bound(d, cfg.eps)),
    };
    let mut coloring = color_or_fallback(&bad, colors, bound, cfg.max_attempts, cfg.seed);
    let helpers = match assign_helpers(&bad, coloring.color_count, n) {
        Ok(h) => h,
        Err(SmallCompError::NotEnoughHelpers { need, have }) => {
            log::warn!("{need} helpers needed, {have} available; using a single color");
            coloring = single_color(&bad);
            assign_helpers(&bad, 1, n)?
        }
        Err(e) => return Err(e.into()),
    };
    let vi = build_virtual_instance(inst, &bad, &coloring, &helpers);
    stats.bad_nodes = stats.bad_nodes.max(bad.bad_nodes.len());
    stats.colors = stats.colors.max(coloring.color_count);
    stats.fell_back |= coloring.fell_back;
    stats.load_bound = stats.load_bound.max(coloring.load_bound);
    stats.max_virtual_load = stats.max_virtual_load.max(vi.virt_t.max_load());
    stats.virtual_nodes = stats.virtual_nodes.max(vi.node_count());

    let r1 = share_inputs(net, &vi)?;
    let (r2, partials) = virtual_brute_force(net, &vi)?;
    let r3 = recover(net, &vi, partials, acc)?;
    stats.broadcast_rounds += r1;
    stats.brute_force_rounds += r2;
    stats.convergecast_rounds += r3;
    acc.mark_processed(chunk.iter())?;
    Ok(r1 + r2 + r3)
}

/// Every split node sends its input row to its helpers.
fn share_inputs(net: &mut Network<'_>, vi: &VirtualInstance) -> Result<u64, AlgoError> {
    if vi.color_count < 2 || vi.bad_nodes.is_empty() {
        return Ok(0);
    }
    let inst = net.inst;
    let n = inst.n;
    let tasks: Vec<BroadcastTask> = vi
        .helpers
        .iter()
        .map(|(&v, hs)| {
            let messages = match v.side {
                Side::I => inst
                    .a
                    .row(v.index)
                    .map(|(j, x)| Payload::new(x, key_a(v.index, j).0))
                    .collect(),
                Side::J => inst
                    .b
                    .row(v.index)
                    .map(|(k, x)| Payload::new(x, key_b(v.index, k).0))
                    .collect(),
                Side::K => Vec::new(),
            };
            BroadcastTask {
                root: v.flat(n),
                members: hs.iter().map(|h| h.flat(n)).collect(),
                messages,
            }
        })
        .collect();
    let budget = net.remaining();
    let (rounds, received) = broadcast_many(&mut net.engine, &tasks, budget)?;
    for (node, payloads) in received.into_iter().flatten() {
        for p in payloads {
            net.memory[node].insert(Key(p.meta), p.value);
        }
    }
    Ok(rounds)
}

/// Partial outputs per `(i, color of i, k)`, computed at the host of `i_c`.
type Partials = BTreeMap<(u32, u32, u32), crate::semiring::Value>;

/// Per partial: the host that computes it and its operand pairs.
type Products = BTreeMap<(u32, u32, u32), (usize, Vec<(Key, Key)>)>;

/// Brute force on the virtual triangles: the host of `j_e` sends `B_jk`
/// to the host of `i_c`, which multiplies and sums over all copies of `k`.
fn virtual_brute_force(net: &mut Network<'_>, vi: &VirtualInstance) -> Result<(u64, Partials), AlgoError> {
    let n = net.inst.n;
    let mut sends = BTreeSet::new();
    let mut products = Products::new();
    for vt in vi.virt_t.iter() {
        let corners = vi
            .corners(vt)
            .ok_or_else(|| AlgoError::Internal(format!("virtual triangle {vt} has unknown corners")))?;
        let [iv, jv, kv] = corners;
        let (i, j, k) = (iv.node.index, jv.node.index, kv.node.index);
        let hi = vi.host(iv).flat(n);
        let hj = vi.host(jv).flat(n);
        sends.insert((hj, hi, j, k));
        products
            .entry((i, iv.color, k))
            .or_insert_with(|| (hi, Vec::new()))
            .1
            .push((key_a(i, j), key_b(j, k)));
    }
    let demands: Vec<_> = sends
        .into_iter()
        .map(|(src, dst, j, k)| Demand {
            src,
            dst,
            payload: Transfer {
                key: key_b(j, k),
                expr: Expr::Load(key_b(j, k)),
            },
        })
        .collect();
    let mut slots = Vec::with_capacity(products.len());
    let mut readout = Vec::with_capacity(products.len());
    for (slot, (host, pairs)) in products {
        slots.push(slot);
        readout.push((host, Expr::SumOfProducts(pairs)));
    }
    let plan = PhasePlan {
        stages: vec![schedule_unicast(demands)],
        readout,
    };
    let (rounds, mut values) = run_plans(net, vec![plan])?;
    let partials = slots.into_iter().zip(values.pop().unwrap_or_default()).collect();
    Ok((rounds, partials))
}

/// Folds the copies back: unsplit owners add their partials directly,
/// split `I` nodes collect them from their helpers by convergecast.
fn recover(
    net: &mut Network<'_>,
    vi: &VirtualInstance,
    partials: Partials,
    acc: &mut OutputAccumulator,
) -> Result<u64, AlgoError> {
    let inst = net.inst;
    let n = inst.n;
    let s = inst.semiring;
    let mut gathered: BTreeMap<u32, Vec<Vec<crate::semiring::Value>>> = BTreeMap::new();
    for ((i, c, k), v) in partials {
        let owner = NodeId::i(i);
        if c == 0 || vi.color_count < 2 {
            acc.add(i, k, v)?;
            continue;
        }
        let row = inst.x.row(i);
        let pos = inst
            .x
            .position(i, k)
            .ok_or_else(|| AlgoError::Internal(format!("output ({i}, {k}) was not requested")))?;
        let per_copy = gathered
            .entry(owner.index)
            .or_insert_with(|| vec![vec![s.zero(); row.len()]; vi.color_count]);
        per_copy[c as usize - 1][pos] = v;
    }
    if gathered.is_empty() {
        return Ok(0);
    }
    let mut rows = Vec::with_capacity(gathered.len());
    let tasks: Vec<ConvergecastTask> = gathered
        .into_iter()
        .map(|(i, values)| {
            rows.push(i);
            let owner = NodeId::i(i);
            ConvergecastTask {
                root: owner.flat(n),
                members: vi.helpers[&owner].iter().map(|h| h.flat(n)).collect(),
                values,
            }
        })
        .collect();
    let budget = net.remaining();
    let (rounds, sums) = convergecast_many(&mut net.engine, &tasks, s, budget)?;
    for (i, sum) in rows.into_iter().zip(sums) {
        for (&k, v) in inst.x.row(i).iter().zip(sum) {
            acc.add(i, k, v)?;
        }
    }
    Ok(rounds)
}
