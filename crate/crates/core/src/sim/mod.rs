//! Round-synchronous low-bandwidth network simulator.
//!
//! In every round each node may send at most one message and receive at
//! most one message. A message carries one semiring element plus up to
//! four metadata words. Local computation is free.

mod dataflow;
mod engine;
mod routing;
mod tree;

pub use dataflow::{run_dataflow, DataflowPlan, Expr, Key, Memory, Transfer};
pub use engine::{NodeProgram, ProgramError, RoundEngine, TraceEvent, Violation};
pub use routing::{deliver, schedule_unicast, Demand, RoutingSchedule};
pub use tree::{
    broadcast_many, broadcast_tree, convergecast_many, convergecast_sum, tree_round_bound, BroadcastTask,
    ConvergecastTask, Deliveries, TreeSchedule, CONVERGECAST_TAG,
};

use crate::semiring::Value;

/// Physical node index in `0..node_count`.
pub type NodeIndex = usize;

/// What a message carries: one element and up to four metadata words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Payload {
    pub value: Value,
    pub meta: [u32; 4],
}

impl Payload {
    pub const fn new(value: Value, meta: [u32; 4]) -> Self {
        Payload { value, meta }
    }

    /// By convention the first metadata word is a tag.
    pub fn tag(&self) -> u32 {
        self.meta[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Message {
    pub src: NodeIndex,
    pub dst: NodeIndex,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("bandwidth violation: {0}")]
    Bandwidth(Violation),
    #[error("round budget of {budget} exhausted with work pending")]
    BudgetExhausted { budget: u64 },
    #[error("engine has {engine} nodes but {programs} programs were supplied")]
    ProgramCount { engine: usize, programs: usize },
    #[error("node {node} failed in round {round}: {msg}")]
    Program {
        node: NodeIndex,
        round: u64,
        msg: String,
    },
}
