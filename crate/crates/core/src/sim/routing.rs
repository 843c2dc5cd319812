use super::{Message, NodeIndex, NodeProgram, Payload, ProgramError, RoundEngine, SimError};

/// One point-to-point transfer; `src == dst` is a local copy and free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demand<P> {
    pub src: NodeIndex,
    pub dst: NodeIndex,
    pub payload: P,
}

/// Demands with a round assignment: demand `m` is sent in round
/// `colors[m]`, or delivered locally when the color is `None`.
#[derive(Clone, Debug)]
pub struct RoutingSchedule<P> {
    pub demands: Vec<Demand<P>>,
    pub colors: Vec<Option<u32>>,
    color_count: u32,
}

impl<P> RoutingSchedule<P> {
    /// Rounds needed to deliver every remote demand.
    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    /// Largest number of remote demands sent or received by one node.
    pub fn max_degree(&self) -> usize {
        let mut deg = std::collections::HashMap::<NodeIndex, (usize, usize)>::new();
        for d in self.demands.iter().filter(|d| d.src != d.dst) {
            deg.entry(d.src).or_default().0 += 1;
            deg.entry(d.dst).or_default().1 += 1;
        }
        deg.values().map(|&(s, r)| s.max(r)).max().unwrap_or(0)
    }

    /// No node sends twice or receives twice in one round.
    pub fn is_proper(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for (d, c) in self.demands.iter().zip(&self.colors) {
            match c {
                None if d.src == d.dst => {}
                Some(c) if d.src != d.dst => {
                    if !seen.insert((0u8, d.src, *c)) || !seen.insert((1u8, d.dst, *c)) {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }
}

/// Per-node set of used colors.
#[derive(Default, Clone)]
struct ColorSet(Vec<u64>);

impl ColorSet {
    fn contains(&self, c: u32) -> bool {
        self.0
            .get((c / 64) as usize)
            .is_some_and(|w| w & (1 << (c % 64)) != 0)
    }

    fn insert(&mut self, c: u32) {
        let w = (c / 64) as usize;
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << (c % 64);
    }
}

/// Greedy edge coloring of the demand multigraph.
///
/// Demands are processed in `(src, dst)` order and each gets the smallest
/// color free at both endpoints, so at most `2 * max_degree - 1` colors
/// are used.
pub fn schedule_unicast<P>(mut demands: Vec<Demand<P>>) -> RoutingSchedule<P> {
    demands.sort_by_key(|d| (d.src, d.dst));
    let nodes = demands.iter().map(|d| d.src.max(d.dst) + 1).max().unwrap_or(0);
    let mut out_used = vec![ColorSet::default(); nodes];
    let mut in_used = vec![ColorSet::default(); nodes];
    let mut colors = Vec::with_capacity(demands.len());
    let mut color_count = 0;
    for d in &demands {
        if d.src == d.dst {
            colors.push(None);
            continue;
        }
        let c = (0u32..)
            .find(|&c| !out_used[d.src].contains(c) && !in_used[d.dst].contains(c))
            .expect("color space exhausted");
        out_used[d.src].insert(c);
        in_used[d.dst].insert(c);
        color_count = color_count.max(c + 1);
        colors.push(Some(c));
    }
    RoutingSchedule {
        demands,
        colors,
        color_count,
    }
}

struct Sender {
    /// `(round, dst, payload)` sorted by round, reversed for popping.
    queue: Vec<(u64, NodeIndex, Payload)>,
    received: Vec<Message>,
}

impl NodeProgram for Sender {
    fn step(
        &mut self,
        node: NodeIndex,
        round: u64,
        inbox: Option<Message>,
        out: &mut Vec<Message>,
    ) -> Result<(), ProgramError> {
        self.received.extend(inbox);
        if let Some(&(r, dst, payload)) = self.queue.last() {
            if r == round {
                self.queue.pop();
                out.push(Message {
                    src: node,
                    dst,
                    payload,
                });
            }
        }
        Ok(())
    }

    fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}

/// Executes `schedule` on `engine`; returns the rounds used and every
/// delivered message, local copies included.
pub fn deliver(
    engine: &mut RoundEngine,
    schedule: &RoutingSchedule<Payload>,
    budget: u64,
) -> Result<(u64, Vec<Message>), SimError> {
    let mut programs: Vec<Sender> = (0..engine.node_count())
        .map(|_| Sender {
            queue: Vec::new(),
            received: Vec::new(),
        })
        .collect();
    let mut local = Vec::new();
    for (d, c) in schedule.demands.iter().zip(&schedule.colors) {
        let msg = Message {
            src: d.src,
            dst: d.dst,
            payload: d.payload,
        };
        match c {
            Some(c) => programs[d.src].queue.push((*c as u64, d.dst, d.payload)),
            None => local.push(msg),
        }
    }
    for p in &mut programs {
        p.queue.sort_by_key(|q| std::cmp::Reverse(q.0));
    }
    let rounds = engine.run(&mut programs, budget)?;
    let mut received = local;
    for p in programs {
        received.extend(p.received);
    }
    Ok((rounds, received))
}
