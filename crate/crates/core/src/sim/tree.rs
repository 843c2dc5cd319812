use std::collections::{HashSet, VecDeque};

use super::{Message, NodeIndex, NodeProgram, Payload, ProgramError, RoundEngine, SimError};
use crate::semiring::{Semiring, Value};

/// Tag of convergecast messages; the second metadata word is the element index.
pub const CONVERGECAST_TAG: u32 = 0xC0;

/// A complete binary tree rooted at `root` over the sorted `members`.
///
/// Position 0 is the root, position `p + 1` is the `p`-th member. The
/// children of position `p` are `2p + 1` and `2p + 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSchedule {
    order: Vec<NodeIndex>,
}

impl TreeSchedule {
    pub fn new(root: NodeIndex, members: &[NodeIndex]) -> Self {
        let mut rest: Vec<NodeIndex> = members.iter().copied().filter(|&m| m != root).collect();
        rest.sort_unstable();
        rest.dedup();
        let mut order = Vec::with_capacity(rest.len() + 1);
        order.push(root);
        order.extend(rest);
        TreeSchedule { order }
    }

    pub fn root(&self) -> NodeIndex {
        self.order[0]
    }

    /// Tree nodes by position, root first.
    pub fn nodes(&self) -> &[NodeIndex] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, pos: usize) -> Option<NodeIndex> {
        (pos > 0).then(|| self.order[(pos - 1) / 2])
    }

    pub fn children(&self, pos: usize) -> impl Iterator<Item = NodeIndex> + '_ {
        [2 * pos + 1, 2 * pos + 2]
            .into_iter()
            .filter_map(|c| self.order.get(c).copied())
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> u32 {
        usize::BITS - self.order.len().leading_zeros() - 1
    }
}

#[derive(Clone, Debug)]
pub struct BroadcastTask {
    pub root: NodeIndex,
    pub members: Vec<NodeIndex>,
    pub messages: Vec<Payload>,
}

#[derive(Clone, Debug)]
pub struct ConvergecastTask {
    pub root: NodeIndex,
    pub members: Vec<NodeIndex>,
    /// One vector per member, all of the same length.
    pub values: Vec<Vec<Value>>,
}

enum Role {
    Idle,
    Broadcast {
        children: Vec<NodeIndex>,
        queue: VecDeque<(NodeIndex, Payload)>,
        received: Vec<Payload>,
    },
    Convergecast {
        parent: Option<NodeIndex>,
        /// `None` for an only child, otherwise the round parity it uses.
        parity: Option<u64>,
        child_count: u8,
        acc: Vec<Value>,
        got: Vec<u8>,
        next: usize,
        semiring: Semiring,
    },
}

impl NodeProgram for Role {
    fn step(
        &mut self,
        node: NodeIndex,
        round: u64,
        inbox: Option<Message>,
        out: &mut Vec<Message>,
    ) -> Result<(), ProgramError> {
        match self {
            Role::Idle => {
                if inbox.is_some() {
                    return Err("message reached a node outside every tree".into());
                }
            }
            Role::Broadcast {
                children,
                queue,
                received,
            } => {
                if let Some(m) = inbox {
                    received.push(m.payload);
                    for &c in children.iter() {
                        queue.push_back((c, m.payload));
                    }
                }
                if let Some((dst, payload)) = queue.pop_front() {
                    out.push(Message {
                        src: node,
                        dst,
                        payload,
                    });
                }
            }
            Role::Convergecast {
                parent,
                parity,
                child_count,
                acc,
                got,
                next,
                semiring,
            } => {
                if let Some(m) = inbox {
                    let idx = m.payload.meta[1] as usize;
                    if m.payload.tag() != CONVERGECAST_TAG || idx >= acc.len() {
                        return Err(format!("unexpected convergecast message {m:?}").into());
                    }
                    acc[idx] = semiring.add(acc[idx], m.payload.value);
                    got[idx] += 1;
                }
                if let Some(p) = *parent {
                    let slot = parity.is_none_or(|par| round % 2 == par);
                    if slot && *next < acc.len() && got[*next] == *child_count {
                        out.push(Message {
                            src: node,
                            dst: p,
                            payload: Payload::new(acc[*next], [CONVERGECAST_TAG, *next as u32, 0, 0]),
                        });
                        *next += 1;
                    }
                }
            }
        }
        Ok(())
    }

    fn is_idle(&self) -> bool {
        match self {
            Role::Idle => true,
            Role::Broadcast { queue, .. } => queue.is_empty(),
            Role::Convergecast {
                parent, acc, next, ..
            } => parent.is_none() || *next >= acc.len(),
        }
    }
}

fn check_disjoint<'a>(trees: impl Iterator<Item = &'a TreeSchedule>, n: usize) -> Result<(), SimError> {
    let mut seen = HashSet::new();
    for t in trees {
        for &v in t.nodes() {
            if v >= n || !seen.insert(v) {
                return Err(SimError::Program {
                    node: v,
                    round: 0,
                    msg: "tree tasks overlap or leave the network".into(),
                });
            }
        }
    }
    Ok(())
}

/// Runs several broadcasts on node-disjoint trees at once.
///
/// Returns the rounds used and, per task, `(member, payloads)` pairs in
/// tree order without the root.
#[allow(clippy::type_complexity)]
pub fn broadcast_many(
    engine: &mut RoundEngine,
    tasks: &[BroadcastTask],
    budget: u64,
) -> Result<(u64, Vec<Deliveries>), SimError> {
    let trees: Vec<TreeSchedule> = tasks
        .iter()
        .map(|t| TreeSchedule::new(t.root, &t.members))
        .collect();
    check_disjoint(trees.iter(), engine.node_count())?;
    let mut roles: Vec<Role> = (0..engine.node_count()).map(|_| Role::Idle).collect();
    for (task, tree) in tasks.iter().zip(&trees) {
        for (pos, &v) in tree.nodes().iter().enumerate() {
            let children: Vec<NodeIndex> = tree.children(pos).collect();
            let mut queue = VecDeque::new();
            if pos == 0 {
                for m in &task.messages {
                    for &c in &children {
                        queue.push_back((c, *m));
                    }
                }
            }
            roles[v] = Role::Broadcast {
                children,
                queue,
                received: Vec::new(),
            };
        }
    }
    let rounds = engine.run(&mut roles, budget)?;
    let results = trees
        .iter()
        .map(|tree| {
            tree.nodes()[1..]
                .iter()
                .map(|&v| match std::mem::replace(&mut roles[v], Role::Idle) {
                    Role::Broadcast { received, .. } => (v, received),
                    _ => (v, Vec::new()),
                })
                .collect()
        })
        .collect();
    Ok((rounds, results))
}

/// What each member of one broadcast tree received, in tree order.
pub type Deliveries = Vec<(NodeIndex, Vec<Payload>)>;

/// Sends `messages` from `root` to every node of `members`.
pub fn broadcast_tree(
    engine: &mut RoundEngine,
    root: NodeIndex,
    members: &[NodeIndex],
    messages: &[Payload],
    budget: u64,
) -> Result<(u64, Deliveries), SimError> {
    let task = BroadcastTask {
        root,
        members: members.to_vec(),
        messages: messages.to_vec(),
    };
    let (rounds, mut res) = broadcast_many(engine, &[task], budget)?;
    Ok((rounds, res.pop().unwrap_or_default()))
}

/// Runs several convergecasts on node-disjoint trees at once and returns
/// the elementwise semiring sums arriving at each root.
pub fn convergecast_many(
    engine: &mut RoundEngine,
    tasks: &[ConvergecastTask],
    semiring: Semiring,
    budget: u64,
) -> Result<(u64, Vec<Vec<Value>>), SimError> {
    let trees: Vec<TreeSchedule> = tasks
        .iter()
        .map(|t| TreeSchedule::new(t.root, &t.members))
        .collect();
    check_disjoint(trees.iter(), engine.node_count())?;
    let mut roles: Vec<Role> = (0..engine.node_count()).map(|_| Role::Idle).collect();
    for (task, tree) in tasks.iter().zip(&trees) {
        if task.values.len() != task.members.len() {
            return Err(SimError::Program {
                node: task.root,
                round: 0,
                msg: "convergecast needs one value vector per member".into(),
            });
        }
        let width = task.values.first().map_or(0, Vec::len);
        let zero = semiring.zero();
        let mut own: std::collections::HashMap<NodeIndex, &Vec<Value>> = Default::default();
        for (m, vals) in task.members.iter().zip(&task.values) {
            if vals.len() != width {
                return Err(SimError::Program {
                    node: *m,
                    round: 0,
                    msg: "convergecast value vectors differ in length".into(),
                });
            }
            own.insert(*m, vals);
        }
        for (pos, &v) in tree.nodes().iter().enumerate() {
            let acc = match own.get(&v) {
                Some(vals) if pos > 0 => (*vals).clone(),
                _ => vec![zero; width],
            };
            let only_child = pos % 2 == 1 && pos + 1 >= tree.len();
            let parity = if pos == 0 || only_child {
                None
            } else {
                Some(if pos % 2 == 1 { 0 } else { 1 })
            };
            roles[v] = Role::Convergecast {
                parent: tree.parent(pos),
                parity,
                child_count: tree.children(pos).count() as u8,
                acc,
                got: vec![0; width],
                next: 0,
                semiring,
            };
        }
    }
    let rounds = engine.run(&mut roles, budget)?;
    let results = tasks
        .iter()
        .map(|task| {
            let mut sum = match std::mem::replace(&mut roles[task.root], Role::Idle) {
                Role::Convergecast { acc, .. } => acc,
                _ => Vec::new(),
            };
            for (m, vals) in task.members.iter().zip(&task.values) {
                if *m == task.root {
                    for (s, v) in sum.iter_mut().zip(vals) {
                        *s = semiring.add(*s, *v);
                    }
                }
            }
            sum
        })
        .collect();
    Ok((rounds, results))
}

/// Sums one value vector per member elementwise at `root`.
pub fn convergecast_sum(
    engine: &mut RoundEngine,
    root: NodeIndex,
    members: &[NodeIndex],
    values: &[Vec<Value>],
    semiring: Semiring,
    budget: u64,
) -> Result<(u64, Vec<Value>), SimError> {
    let task = ConvergecastTask {
        root,
        members: members.to_vec(),
        values: values.to_vec(),
    };
    let (rounds, mut res) = convergecast_many(engine, &[task], semiring, budget)?;
    Ok((rounds, res.pop().unwrap_or_default()))
}

/// `2d + 2 ceil(log2(k + 1)) + 4`: round bound for both tree protocols.
pub fn tree_round_bound(d: usize, k: usize) -> u64 {
    2 * d as u64 + 2 * ceil_log2(k as u64 + 1) + 4
}

fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        (u64::BITS - (x - 1).leading_zeros()) as u64
    }
}
