//! Processing a triangle set with few triangles but possibly skewed loads.
//!
//! Nodes touching many triangles ("bad" nodes) are split into several
//! virtual copies, one per color of a triangle coloring, and each copy is
//! simulated by a separate helper node. The resulting virtual instance has
//! bounded load everywhere and can be processed by brute force; outputs
//! are then folded back by summing over the copies.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{SupportedMatrix, TriInstance};
use crate::pattern::SparsePattern;
use crate::semiring::{Semiring, Value};
use crate::triangle::{NodeId, Side, Triangle, TriangleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SmallCompError {
    #[error("at most {limit:.3} triangles allowed, got {have}")]
    TooManyTriangles { have: usize, limit: f64 },
    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEps(f64),
    #[error("{count} bad nodes exceed the bound {bound}")]
    TooManyBadNodes { count: usize, bound: usize },
    #[error("color count must be at least 1")]
    NoColors,
    #[error("no valid coloring found in {attempts} attempts")]
    ColoringExhausted { attempts: u32 },
    #[error("{need} helper slots needed but only {have} nodes exist")]
    NotEnoughHelpers { need: usize, have: usize },
}

/// `d^(2 - eps/2)`: nodes touching at least this many triangles are bad.
pub fn bad_threshold(d: usize, eps: f64) -> f64 {
    (d as f64).powf(2.0 - eps / 2.0)
}

/// `ceil(3n / d^(eps/2))`.
pub fn bad_count_bound(n: usize, d: usize, eps: f64) -> usize {
    (3.0 * n as f64 / (d as f64).powf(eps / 2.0)).ceil() as usize
}

/// `max(1, floor(d^(eps/2) / 3))`.
pub fn default_colors(d: usize, eps: f64) -> usize {
    (((d as f64).powf(eps / 2.0) / 3.0).floor() as usize).max(1)
}

/// `6 d^(2 - eps/2)`: the per-color load every bad node must respect.
pub fn default_load_bound(d: usize, eps: f64) -> f64 {
    6.0 * bad_threshold(d, eps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BadClassification {
    pub bad_nodes: BTreeSet<NodeId>,
    pub bad_triangles: TriangleSet,
    pub good_triangles: TriangleSet,
    pub threshold: f64,
}

impl BadClassification {
    pub fn is_bad(&self, v: NodeId) -> bool {
        self.bad_nodes.contains(&v)
    }
}

/// Splits `set` into triangles touching a bad node and the rest.
///
/// Requires `|set| <= d^(2 - eps) n`; larger sets must be chunked first
/// (see [`chunk_triangles`]).
pub fn classify_bad(
    set: &TriangleSet,
    d: usize,
    n: usize,
    eps: f64,
) -> Result<BadClassification, SmallCompError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(SmallCompError::InvalidEps(eps));
    }
    let limit = (d as f64).powf(2.0 - eps) * n as f64;
    if set.len() as f64 > limit {
        return Err(SmallCompError::TooManyTriangles {
            have: set.len(),
            limit,
        });
    }
    let threshold = bad_threshold(d, eps);
    let bad_nodes: BTreeSet<NodeId> = set
        .touched_nodes()
        .filter(|&v| set.load(v) as f64 >= threshold)
        .collect();
    let bound = bad_count_bound(n, d, eps);
    if bad_nodes.len() > bound {
        return Err(SmallCompError::TooManyBadNodes {
            count: bad_nodes.len(),
            bound,
        });
    }
    let mut bad_triangles = TriangleSet::new(set.n());
    let mut good_triangles = TriangleSet::new(set.n());
    for t in set.iter() {
        if t.corners().iter().any(|v| bad_nodes.contains(v)) {
            bad_triangles.insert(*t);
        } else {
            good_triangles.insert(*t);
        }
    }
    Ok(BadClassification {
        bad_nodes,
        bad_triangles,
        good_triangles,
        threshold,
    })
}

/// Splits `set` into `ceil(|set| / floor(d^(2 - eps) n))` chunks, each
/// small enough for [`classify_bad`].
pub fn chunk_triangles(set: &TriangleSet, d: usize, n: usize, eps: f64) -> Vec<TriangleSet> {
    if set.is_empty() {
        return Vec::new();
    }
    let cap = ((d as f64).powf(2.0 - eps) * n as f64).floor().max(1.0) as usize;
    let chunks = set.len().div_ceil(cap);
    let size = set.len().div_ceil(chunks);
    let all = set.to_vec();
    all.chunks(size)
        .map(|c| TriangleSet::from_triangles(set.n(), c.iter().copied()))
        .collect()
}

/// A coloring of the bad triangles with `color_count` colors `0..color_count`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleColoring {
    pub color_count: usize,
    pub color_of: BTreeMap<Triangle, u32>,
    pub load_bound: f64,
    /// Attempts used; 0 when the fallback single color was applied.
    pub attempts: u32,
    pub fell_back: bool,
}

impl TriangleColoring {
    /// Largest number of same-colored triangles at one bad node.
    pub fn max_color_load(&self, bad: &BadClassification) -> usize {
        color_loads(&self.color_of, bad, self.color_count)
            .values()
            .flat_map(|v| v.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

fn color_loads(
    color_of: &BTreeMap<Triangle, u32>,
    bad: &BadClassification,
    colors: usize,
) -> HashMap<NodeId, Vec<usize>> {
    let mut loads: HashMap<NodeId, Vec<usize>> = HashMap::new();
    for (t, &c) in color_of {
        for v in t.corners() {
            if bad.is_bad(v) {
                loads.entry(v).or_insert_with(|| vec![0; colors])[c as usize] += 1;
            }
        }
    }
    loads
}

/// Colors every bad triangle uniformly at random until each bad node has
/// at most `load_bound` triangles of each color.
///
/// Attempt `a` draws from a ChaCha8 stream `a` seeded with `seed`, so the
/// result depends only on the arguments.
pub fn color_bad_triangles(
    bad: &BadClassification,
    colors: usize,
    load_bound: f64,
    max_attempts: u32,
    seed: u64,
) -> Result<TriangleColoring, SmallCompError> {
    if colors == 0 {
        return Err(SmallCompError::NoColors);
    }
    for attempt in 1..=max_attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let color_of: BTreeMap<Triangle, u32> = bad
            .bad_triangles
            .iter()
            .map(|t| (*t, rng.gen_range(0..colors as u32)))
            .collect();
        let ok = color_loads(&color_of, bad, colors)
            .values()
            .all(|l| l.iter().all(|&x| x as f64 <= load_bound));
        if ok {
            return Ok(TriangleColoring {
                color_count: colors,
                color_of,
                load_bound,
                attempts: attempt,
                fell_back: false,
            });
        }
    }
    Err(SmallCompError::ColoringExhausted {
        attempts: max_attempts,
    })
}

/// Every bad triangle gets color 0; the bound is the largest bad-node load.
pub fn single_color(bad: &BadClassification) -> TriangleColoring {
    let max_load = bad
        .bad_nodes
        .iter()
        .map(|&v| bad.bad_triangles.load(v))
        .max()
        .unwrap_or(0);
    TriangleColoring {
        color_count: 1,
        color_of: bad.bad_triangles.iter().map(|t| (*t, 0)).collect(),
        load_bound: max_load as f64,
        attempts: 0,
        fell_back: true,
    }
}

/// [`color_bad_triangles`], falling back to [`single_color`] on exhaustion.
pub fn color_or_fallback(
    bad: &BadClassification,
    colors: usize,
    load_bound: f64,
    max_attempts: u32,
    seed: u64,
) -> TriangleColoring {
    match color_bad_triangles(bad, colors, load_bound, max_attempts, seed) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("{e}; falling back to a single color");
            single_color(bad)
        }
    }
}

/// Helper nodes per bad node, in color order: copy `c` (1-based) of bad
/// node `v` is simulated by `helpers[v][c - 1]`.
pub type Helpers = BTreeMap<NodeId, Vec<NodeId>>;

/// Assigns `colors` helpers to every bad node.
///
/// A bad node is its own first helper; the remaining `colors - 1` are the
/// smallest unused non-bad nodes in `I`, `J`, `K` order. Needs
/// `|bad| * colors <= 3n`.
pub fn assign_helpers(bad: &BadClassification, colors: usize, n: usize) -> Result<Helpers, SmallCompError> {
    if colors == 0 {
        return Err(SmallCompError::NoColors);
    }
    let need = bad.bad_nodes.len() * colors;
    if need > 3 * n {
        return Err(SmallCompError::NotEnoughHelpers { need, have: 3 * n });
    }
    let mut free = (0..3 * n)
        .map(|f| NodeId::from_flat(f, n))
        .filter(|v| !bad.is_bad(*v));
    let mut helpers = Helpers::new();
    for &v in &bad.bad_nodes {
        let mut set = Vec::with_capacity(colors);
        set.push(v);
        for _ in 1..colors {
            set.push(
                free.next()
                    .ok_or(SmallCompError::NotEnoughHelpers { need, have: 3 * n })?,
            );
        }
        helpers.insert(v, set);
    }
    Ok(helpers)
}

/// A node of the virtual instance: an original node and one of its colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VirtualNode {
    pub node: NodeId,
    pub color: u32,
}

/// The blown-up instance in which bad nodes are split by color.
///
/// Good nodes have the single color 0; bad nodes have colors
/// `1..=color_count`. Virtual indices: `v_0` and `v_1` keep the index of
/// `v`, further copies get indices from `n` upwards on their side.
#[derive(Clone, Debug)]
pub struct VirtualInstance {
    pub n: usize,
    pub virtual_n: usize,
    pub color_count: usize,
    pub bad_nodes: BTreeSet<NodeId>,
    pub helpers: Helpers,
    /// Per side: virtual index -> original node and color.
    origin: [Vec<Option<VirtualNode>>; 3],
    index: HashMap<VirtualNode, u32>,
    pub virt_a: SupportedMatrix,
    pub virt_b: SupportedMatrix,
    pub virt_t: TriangleSet,
}

impl VirtualInstance {
    /// Colors of an original node.
    pub fn color_set(&self, v: NodeId) -> Vec<u32> {
        if self.bad_nodes.contains(&v) {
            (1..=self.color_count as u32).collect()
        } else {
            vec![0]
        }
    }

    /// Number of virtual nodes over all three sides.
    pub fn node_count(&self) -> usize {
        3 * self.n + self.bad_nodes.len() * (self.color_count - 1)
    }

    pub fn index_of(&self, v: VirtualNode) -> Option<u32> {
        self.index.get(&v).copied()
    }

    pub fn origin(&self, side: Side, index: u32) -> Option<VirtualNode> {
        self.origin[side as usize].get(index as usize).copied().flatten()
    }

    /// Physical node simulating `v`.
    pub fn host(&self, v: VirtualNode) -> NodeId {
        if v.color == 0 {
            v.node
        } else {
            self.helpers[&v.node][v.color as usize - 1]
        }
    }

    /// Original triangle of a virtual triangle.
    pub fn original(&self, t: &Triangle) -> Option<Triangle> {
        Some(Triangle::new(
            self.origin(Side::I, t.i)?.node.index,
            self.origin(Side::J, t.j)?.node.index,
            self.origin(Side::K, t.k)?.node.index,
        ))
    }

    /// The virtual corners of a virtual triangle.
    pub fn corners(&self, t: &Triangle) -> Option<[VirtualNode; 3]> {
        Some([
            self.origin(Side::I, t.i)?,
            self.origin(Side::J, t.j)?,
            self.origin(Side::K, t.k)?,
        ])
    }
}

fn blow_up(m: &SupportedMatrix, row_side: Side, col_side: Side, vi: &VirtualInstance) -> SupportedMatrix {
    let mut rows = vec![Vec::new(); vi.virtual_n];
    let mut values = vec![Vec::new(); vi.virtual_n];
    for r in 0..vi.n as u32 {
        let rv = NodeId::new(row_side, r);
        let mut entries: Vec<(u32, Value)> = Vec::new();
        for (c, val) in m.row(r) {
            let cv = NodeId::new(col_side, c);
            for e in vi.color_set(cv) {
                let idx = vi.index[&VirtualNode { node: cv, color: e }];
                entries.push((idx, val));
            }
        }
        entries.sort_unstable_by_key(|x| x.0);
        for c in vi.color_set(rv) {
            let idx = vi.index[&VirtualNode { node: rv, color: c }] as usize;
            rows[idx] = entries.iter().map(|x| x.0).collect();
            values[idx] = entries.iter().map(|x| x.1).collect();
        }
    }
    SupportedMatrix::new(
        SparsePattern {
            n: vi.virtual_n,
            rows,
        },
        values,
    )
}

/// Builds the virtual instance for the triangles of `bad`.
///
/// Each good triangle maps to its copy at color 0; each bad triangle of
/// color `c` maps to the copy with its bad corners at color `c + 1` and
/// its good corners at color 0.
pub fn build_virtual_instance(
    inst: &TriInstance,
    bad: &BadClassification,
    coloring: &TriangleColoring,
    helpers: &Helpers,
) -> VirtualInstance {
    let n = inst.n;
    let k = coloring.color_count;
    let mut origin: [Vec<Option<VirtualNode>>; 3] = Default::default();
    let mut index = HashMap::new();
    let mut virtual_n = n;
    for side in Side::ALL {
        let col = &mut origin[side as usize];
        col.resize(n, None);
        let mut next = n as u32;
        for v in 0..n as u32 {
            let node = NodeId::new(side, v);
            if bad.is_bad(node) {
                for c in 1..=k as u32 {
                    let vn = VirtualNode { node, color: c };
                    let idx = if c == 1 {
                        v
                    } else {
                        next += 1;
                        next - 1
                    };
                    if idx as usize >= col.len() {
                        col.resize(idx as usize + 1, None);
                    }
                    col[idx as usize] = Some(vn);
                    index.insert(vn, idx);
                }
            } else {
                let vn = VirtualNode { node, color: 0 };
                col[v as usize] = Some(vn);
                index.insert(vn, v);
            }
        }
        virtual_n = virtual_n.max(next as usize);
    }
    for col in &mut origin {
        col.resize(virtual_n, None);
    }
    let mut vi = VirtualInstance {
        n,
        virtual_n,
        color_count: k,
        bad_nodes: bad.bad_nodes.clone(),
        helpers: helpers.clone(),
        origin,
        index,
        virt_a: SupportedMatrix::new(SparsePattern::empty(0), Vec::new()),
        virt_b: SupportedMatrix::new(SparsePattern::empty(0), Vec::new()),
        virt_t: TriangleSet::new(virtual_n),
    };
    vi.virt_a = blow_up(&inst.a, Side::I, Side::J, &vi);
    vi.virt_b = blow_up(&inst.b, Side::J, Side::K, &vi);
    let copy = |t: &Triangle, color: u32, vi: &VirtualInstance| {
        let pick = |node: NodeId| {
            let c = if bad.is_bad(node) { color } else { 0 };
            vi.index[&VirtualNode { node, color: c }]
        };
        Triangle::new(pick(NodeId::i(t.i)), pick(NodeId::j(t.j)), pick(NodeId::k(t.k)))
    };
    let mut virt_t = TriangleSet::new(virtual_n);
    for t in bad.good_triangles.iter() {
        virt_t.insert(copy(t, 0, &vi));
    }
    for (t, &c) in &coloring.color_of {
        virt_t.insert(copy(t, c + 1, &vi));
    }
    vi.virt_t = virt_t;
    vi
}

/// Folds virtual outputs back: `X_ik = sum over copies i_c, k_e of virtX[i_c][k_e]`.
pub fn recover_output(
    virt_x: &BTreeMap<(u32, u32), Value>,
    vi: &VirtualInstance,
    semiring: Semiring,
) -> BTreeMap<(u32, u32), Value> {
    let mut out = BTreeMap::new();
    for (&(vi_i, vi_k), &val) in virt_x {
        let (Some(i), Some(k)) = (vi.origin(Side::I, vi_i), vi.origin(Side::K, vi_k)) else {
            continue;
        };
        let slot = out.entry((i.node.index, k.node.index)).or_insert(semiring.zero());
        *slot = semiring.add(*slot, val);
    }
    out
}
