use std::collections::{HashMap, VecDeque};

use super::{Message, NodeIndex, NodeProgram, Payload, ProgramError, RoundEngine, RoutingSchedule, SimError};
use crate::semiring::{Semiring, Value};

/// Name of a value held by a node; travels as the message metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key(pub [u32; 4]);

/// The values a node knows.
pub type Memory = HashMap<Key, Value>;

/// How a sender computes the value it transmits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Load(Key),
    Sum(Vec<Key>),
    SumOfProducts(Vec<(Key, Key)>),
}

impl Expr {
    pub fn eval(&self, mem: &Memory, s: Semiring) -> Result<Value, ProgramError> {
        let get = |k: &Key| {
            mem.get(k)
                .copied()
                .ok_or_else(|| ProgramError(format!("operand {k:?} is not known")))
        };
        match self {
            Expr::Load(k) => get(k),
            Expr::Sum(keys) => {
                let mut acc = s.zero();
                for k in keys {
                    acc = s.add(acc, get(k)?);
                }
                Ok(acc)
            }
            Expr::SumOfProducts(pairs) => {
                let mut acc = s.zero();
                for (a, b) in pairs {
                    acc = s.add(acc, s.mul(get(a)?, get(b)?));
                }
                Ok(acc)
            }
        }
    }
}

/// Evaluate `expr` at the sender and store the result under `key` at the receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub key: Key,
    pub expr: Expr,
}

struct Timed {
    round: u64,
    dst: NodeIndex,
    local: bool,
    transfer: Transfer,
}

/// Timed transfers for every node, assembled from routing stages.
pub struct DataflowPlan {
    per_node: Vec<Vec<Timed>>,
}

impl DataflowPlan {
    pub fn new(node_count: usize) -> Self {
        DataflowPlan {
            per_node: (0..node_count).map(|_| Vec::new()).collect(),
        }
    }

    /// Schedules `stage` to start at round `offset` and returns the round
    /// at which the next stage may start.
    ///
    /// Local transfers run at `offset`, before that round's send, so they
    /// see everything delivered by earlier stages.
    pub fn add_stage(&mut self, stage: RoutingSchedule<Transfer>, offset: u64) -> u64 {
        let end = offset + stage.color_count() as u64;
        for (d, c) in stage.demands.into_iter().zip(stage.colors) {
            self.per_node[d.src].push(Timed {
                round: offset + c.map_or(0, u64::from),
                dst: d.dst,
                local: c.is_none(),
                transfer: d.payload,
            });
        }
        end
    }

    pub fn transfer_count(&self) -> usize {
        self.per_node.iter().map(Vec::len).sum()
    }
}

struct DataflowNode {
    memory: Memory,
    queue: VecDeque<Timed>,
    semiring: Semiring,
}

impl NodeProgram for DataflowNode {
    fn step(
        &mut self,
        node: NodeIndex,
        round: u64,
        inbox: Option<Message>,
        out: &mut Vec<Message>,
    ) -> Result<(), ProgramError> {
        if let Some(m) = inbox {
            self.memory.insert(Key(m.payload.meta), m.payload.value);
        }
        while let Some(t) = self.queue.front() {
            if t.round > round {
                break;
            }
            let t = self.queue.pop_front().expect("front exists");
            let value = t.transfer.expr.eval(&self.memory, self.semiring)?;
            if t.local {
                self.memory.insert(t.transfer.key, value);
            } else {
                if t.round < round {
                    return Err("missed a send slot".into());
                }
                out.push(Message {
                    src: node,
                    dst: t.dst,
                    payload: Payload::new(value, t.transfer.key.0),
                });
            }
        }
        Ok(())
    }

    fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}

/// Executes `plan` on `engine`, reading and updating each node's memory.
pub fn run_dataflow(
    engine: &mut RoundEngine,
    semiring: Semiring,
    memory: &mut [Memory],
    plan: DataflowPlan,
    budget: u64,
) -> Result<u64, SimError> {
    if memory.len() != engine.node_count() || plan.per_node.len() != engine.node_count() {
        return Err(SimError::ProgramCount {
            engine: engine.node_count(),
            programs: memory.len().min(plan.per_node.len()),
        });
    }
    let mut nodes: Vec<DataflowNode> = plan
        .per_node
        .into_iter()
        .zip(memory.iter_mut())
        .map(|(mut timed, mem)| {
            timed.sort_by_key(|t| (t.round, !t.local));
            DataflowNode {
                memory: std::mem::take(mem),
                queue: timed.into(),
                semiring,
            }
        })
        .collect();
    let result = engine.run(&mut nodes, budget);
    for (mem, node) in memory.iter_mut().zip(nodes) {
        *mem = node.memory;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{schedule_unicast, Demand};

    fn key(a: u32) -> Key {
        Key([1, a, 0, 0])
    }

    #[test]
    fn two_stage_dot_product() {
        // nodes 1 and 2 hold a pair each; node 0 computes the sum of products
        let s = Semiring::Integer;
        let mut mem: Vec<Memory> = vec![Memory::new(); 3];
        mem[1].insert(key(0), 3);
        mem[1].insert(key(1), 4);
        mem[2].insert(key(2), 5);
        mem[2].insert(key(3), 6);
        let mut plan = DataflowPlan::new(3);
        let stage1 = schedule_unicast(vec![
            Demand {
                src: 1,
                dst: 2,
                payload: Transfer {
                    key: key(0),
                    expr: Expr::Load(key(0)),
                },
            },
            Demand {
                src: 1,
                dst: 2,
                payload: Transfer {
                    key: key(1),
                    expr: Expr::Load(key(1)),
                },
            },
        ]);
        let next = plan.add_stage(stage1, 0);
        assert_eq!(next, 2);
        let stage2 = schedule_unicast(vec![
            Demand {
                src: 2,
                dst: 2,
                payload: Transfer {
                    key: key(9),
                    expr: Expr::SumOfProducts(vec![(key(0), key(2)), (key(1), key(3))]),
                },
            },
            Demand {
                src: 2,
                dst: 0,
                payload: Transfer {
                    key: key(10),
                    expr: Expr::Load(key(9)),
                },
            },
        ]);
        let end = plan.add_stage(stage2, next);
        let mut engine = RoundEngine::new(3);
        let rounds = run_dataflow(&mut engine, s, &mut mem, plan, 100).unwrap();
        assert_eq!(rounds, end);
        assert_eq!(mem[0][&key(10)], 3 * 5 + 4 * 6);
    }

    #[test]
    fn missing_operand_is_an_error() {
        let mut mem: Vec<Memory> = vec![Memory::new(); 2];
        let mut plan = DataflowPlan::new(2);
        plan.add_stage(
            schedule_unicast(vec![Demand {
                src: 0,
                dst: 1,
                payload: Transfer {
                    key: key(0),
                    expr: Expr::Load(key(5)),
                },
            }]),
            0,
        );
        let err = run_dataflow(&mut RoundEngine::new(2), Semiring::Boolean, &mut mem, plan, 10);
        assert!(matches!(err, Err(SimError::Program { node: 0, .. })));
    }
}
