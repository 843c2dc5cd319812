use std::fmt;

use super::{Message, NodeIndex, SimError};

/// Error raised by a node program; the engine attaches node and round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramError(pub String);

impl<S: Into<String>> From<S> for ProgramError {
    fn from(s: S) -> Self {
        ProgramError(s.into())
    }
}

/// Per-node behaviour driven by [`RoundEngine::run`].
pub trait NodeProgram {
    /// Executes round `round` at `node`.
    ///
    /// `inbox` holds the message sent to this node in the previous round.
    /// Messages to send this round are pushed onto `out`; the engine
    /// rejects more than one.
    fn step(
        &mut self,
        node: NodeIndex,
        round: u64,
        inbox: Option<Message>,
        out: &mut Vec<Message>,
    ) -> Result<(), ProgramError>;

    /// True once the node will not send anything unless it receives more.
    fn is_idle(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    MultipleSends {
        round: u64,
        node: NodeIndex,
        count: usize,
    },
    MultipleReceives {
        round: u64,
        node: NodeIndex,
        count: usize,
    },
    BadAddress {
        round: u64,
        src: NodeIndex,
        dst: NodeIndex,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::MultipleSends { round, node, count } => {
                write!(f, "node {node} sent {count} messages in round {round}")
            }
            Violation::MultipleReceives { round, node, count } => {
                write!(f, "node {node} received {count} messages in round {round}")
            }
            Violation::BadAddress { round, src, dst } => {
                write!(f, "node {src} addressed invalid node {dst} in round {round}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub round: u64,
    pub src: NodeIndex,
    pub dst: NodeIndex,
    pub tag: u32,
}

/// Drives node programs round by round and enforces the bandwidth limit.
///
/// Rounds accumulate across calls to [`run`](Self::run); trace rounds use
/// this cumulative clock.
#[derive(Debug, Clone)]
pub struct RoundEngine {
    node_count: usize,
    total_rounds: u64,
    messages: u64,
    trace: Option<Vec<TraceEvent>>,
    violations: Vec<Violation>,
}

impl RoundEngine {
    pub fn new(node_count: usize) -> Self {
        RoundEngine {
            node_count,
            total_rounds: 0,
            messages: 0,
            trace: None,
            violations: Vec::new(),
        }
    }

    /// Records every delivered message.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn total_rounds(&self) -> u64 {
        self.total_rounds
    }

    pub fn messages_sent(&self) -> u64 {
        self.messages
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Writes the trace as CSV with header `round,src,dst,tag`.
    pub fn write_trace_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "round,src,dst,tag")?;
        for e in self.trace.iter().flatten() {
            writeln!(w, "{},{},{},{}", e.round, e.src, e.dst, e.tag)?;
        }
        Ok(())
    }

    /// Adds rounds spent outside the engine, for example by a phase that
    /// is accounted analytically.
    pub fn charge(&mut self, rounds: u64) {
        self.total_rounds += rounds;
    }

    /// Runs `programs` (one per node) until every node is idle and no
    /// message is in flight. Returns the rounds used: one past the last
    /// round in which anything was sent.
    ///
    /// Fails if a round violates the bandwidth limit or if work is still
    /// pending after `budget` rounds.
    pub fn run<P: NodeProgram>(&mut self, programs: &mut [P], budget: u64) -> Result<u64, SimError> {
        if programs.len() != self.node_count {
            return Err(SimError::ProgramCount {
                engine: self.node_count,
                programs: programs.len(),
            });
        }
        let n = self.node_count;
        let mut inbox: Vec<Option<Message>> = vec![None; n];
        let mut receivers = vec![0usize; n];
        let mut sent: Vec<Message> = Vec::new();
        let mut out = Vec::with_capacity(2);
        let mut last_send: Option<u64> = None;
        let mut round = 0u64;
        loop {
            let pending = inbox.iter().any(Option::is_some);
            if !pending && programs.iter().all(NodeProgram::is_idle) {
                break;
            }
            if round >= budget {
                return Err(SimError::BudgetExhausted { budget });
            }
            sent.clear();
            for (v, prog) in programs.iter_mut().enumerate() {
                out.clear();
                prog.step(v, round, inbox[v].take(), &mut out)
                    .map_err(|e| SimError::Program {
                        node: v,
                        round: self.total_rounds + round,
                        msg: e.0,
                    })?;
                if out.len() > 1 {
                    return Err(self.violate(Violation::MultipleSends {
                        round: self.total_rounds + round,
                        node: v,
                        count: out.len(),
                    }));
                }
                for m in out.drain(..) {
                    if m.src != v || m.dst >= n || m.dst == v {
                        return Err(self.violate(Violation::BadAddress {
                            round: self.total_rounds + round,
                            src: v,
                            dst: m.dst,
                        }));
                    }
                    sent.push(m);
                }
            }
            for m in &sent {
                receivers[m.dst] += 1;
            }
            for m in &sent {
                if receivers[m.dst] > 1 {
                    let count = receivers[m.dst];
                    return Err(self.violate(Violation::MultipleReceives {
                        round: self.total_rounds + round,
                        node: m.dst,
                        count,
                    }));
                }
            }
            for m in &sent {
                receivers[m.dst] = 0;
                inbox[m.dst] = Some(*m);
                if let Some(trace) = self.trace.as_mut() {
                    trace.push(TraceEvent {
                        round: self.total_rounds + round,
                        src: m.src,
                        dst: m.dst,
                        tag: m.payload.tag(),
                    });
                }
            }
            if !sent.is_empty() {
                self.messages += sent.len() as u64;
                last_send = Some(round);
            }
            round += 1;
        }
        let used = last_send.map_or(0, |r| r + 1);
        self.total_rounds += used;
        Ok(used)
    }

    fn violate(&mut self, v: Violation) -> SimError {
        log::warn!("{v}");
        self.violations.push(v);
        SimError::Bandwidth(v)
    }
}
