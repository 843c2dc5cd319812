//! Runtime processing of triangle sets on the simulated network.
//!
//! Every routine here moves values with the simulator and then lets each
//! output owner fold what it learned into an [`OutputAccumulator`]. After
//! each phase the accumulator holds, for every requested `(i, k)`, the sum
//! of `A_ij B_jk` over exactly the triangles processed so far.

mod accumulator;
mod brute;
mod dense;
mod pipeline;
mod small;

pub use accumulator::OutputAccumulator;
pub use brute::process_brute_force;
pub use dense::{process_cluster_dense, process_clustered_set, processor_grid_side};
pub use pipeline::{
    count_triangles, multiply, DenseEngine, MultiplyOutput, Phase, PhaseRounds, PipelineConfig, RoundReport,
};
pub use small::{process_small_component, SmallComponentStats, SmallConfig};

use crate::clustering::ClusteringError;
use crate::instance::TriInstance;
use crate::semiring::Value;
use crate::sim::{
    run_dataflow, DataflowPlan, Expr, Key, Memory, RoundEngine, RoutingSchedule, SimError, Transfer,
};
use crate::smallcomp::SmallCompError;
use crate::triangle::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgoError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    SmallComp(#[from] SmallCompError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

const TAG_A: u32 = 1;
const TAG_B: u32 = 2;
const TAG_PARTIAL: u32 = 3;

pub(crate) fn key_a(i: u32, j: u32) -> Key {
    Key([TAG_A, i, j, 0])
}

pub(crate) fn key_b(j: u32, k: u32) -> Key {
    Key([TAG_B, j, k, 0])
}

pub(crate) fn key_partial(i: u32, k: u32, slot: u32) -> Key {
    Key([TAG_PARTIAL, i, k, slot])
}

/// The simulated network: `3n` nodes, their memories and a round engine.
///
/// Initially node `I_i` knows row `i` of `A` and node `J_j` knows row `j`
/// of `B`; outputs `X_ik` are owned by `I_i`.
pub struct Network<'a> {
    pub inst: &'a TriInstance,
    pub engine: RoundEngine,
    pub memory: Vec<Memory>,
    pub budget: u64,
}

impl<'a> Network<'a> {
    pub fn new(inst: &'a TriInstance, budget: u64, trace: bool) -> Self {
        let n = inst.n;
        let mut memory = vec![Memory::new(); 3 * n];
        for r in 0..n as u32 {
            for (c, v) in inst.a.row(r) {
                memory[NodeId::i(r).flat(n)].insert(key_a(r, c), v);
            }
            for (c, v) in inst.b.row(r) {
                memory[NodeId::j(r).flat(n)].insert(key_b(r, c), v);
            }
        }
        let mut engine = RoundEngine::new(3 * n);
        if trace {
            engine = engine.with_trace();
        }
        Network {
            inst,
            engine,
            memory,
            budget,
        }
    }

    pub fn flat(&self, v: NodeId) -> usize {
        v.flat(self.inst.n)
    }

    /// Rounds left before the budget is exhausted.
    pub fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.engine.total_rounds())
    }
}

/// Routing stages plus the values to read afterwards.
///
/// Stages run back to back; `readout[m] = (node, expr)` is evaluated on
/// that node's memory once the last stage has finished.
#[derive(Default)]
pub(crate) struct PhasePlan {
    pub stages: Vec<RoutingSchedule<Transfer>>,
    pub readout: Vec<(usize, Expr)>,
}

/// Runs several plans on disjoint node sets in parallel and returns the
/// rounds used (the maximum over plans) and each plan's readout values.
pub(crate) fn run_plans(
    net: &mut Network<'_>,
    plans: Vec<PhasePlan>,
) -> Result<(u64, Vec<Vec<Value>>), AlgoError> {
    let mut dataflow = DataflowPlan::new(net.engine.node_count());
    let mut readouts = Vec::with_capacity(plans.len());
    for plan in plans {
        let mut offset = 0;
        for stage in plan.stages {
            offset = dataflow.add_stage(stage, offset);
        }
        readouts.push(plan.readout);
    }
    let budget = net.remaining();
    let rounds = run_dataflow(
        &mut net.engine,
        net.inst.semiring,
        &mut net.memory,
        dataflow,
        budget,
    )?;
    let s = net.inst.semiring;
    let values = readouts
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|(node, expr)| {
                    expr.eval(&net.memory[node], s)
                        .map_err(|e| AlgoError::Internal(format!("readout at node {node}: {}", e.0)))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rounds, values))
}
