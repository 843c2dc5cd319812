//! Random instance generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sparsemm_core::{Semiring, SparsePattern, SupportedMatrix, TriInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Union of about `density * d` random permutation matrices per factor.
    RandomUniform,
    /// `n / d` disjoint full clusters under a random relabeling per side.
    PlantedClusters,
    /// Node `I_0` in `d^2` triangles plus random noise elsewhere.
    PlantedBadNode,
    /// Symmetric adjacency of a random graph with maximum degree `d`.
    BoundedDegreeGraph,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::RandomUniform,
        GeneratorKind::PlantedClusters,
        GeneratorKind::PlantedBadNode,
        GeneratorKind::BoundedDegreeGraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::RandomUniform => "random-uniform",
            GeneratorKind::PlantedClusters => "planted-clusters",
            GeneratorKind::PlantedBadNode => "planted-bad-node",
            GeneratorKind::BoundedDegreeGraph => "bounded-degree-graph",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = GeneratorKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown generator `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub d: usize,
    /// Fraction in `[0, 1]`; its meaning depends on the kind.
    pub density: f64,
    #[serde(with = "crate::semiring_serde")]
    pub semiring: Semiring,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("need n >= d >= 1, got n = {n}, d = {d}")]
    BadSize { n: usize, d: usize },
    #[error("density must lie in [0, 1], got {0}")]
    BadDensity(f64),
    #[error("generated instance is invalid: {0}")]
    Invalid(String),
}

/// Generates an instance; the result always passes validation.
pub fn generate(spec: &GeneratorSpec) -> Result<TriInstance, GenerateError> {
    let GeneratorSpec {
        kind,
        n,
        d,
        density,
        semiring,
        seed,
    } = *spec;
    if d == 0 || n < d {
        return Err(GenerateError::BadSize { n, d });
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(GenerateError::BadDensity(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, x) = match kind {
        GeneratorKind::RandomUniform => {
            let perms = (density * d as f64).round() as usize;
            (
                permutation_union(n, perms, &mut rng),
                permutation_union(n, perms, &mut rng),
                permutation_union(n, perms, &mut rng),
            )
        }
        GeneratorKind::PlantedClusters => planted_clusters(n, d, density, &mut rng),
        GeneratorKind::PlantedBadNode => planted_bad_node(n, d, density, &mut rng),
        GeneratorKind::BoundedDegreeGraph => {
            let g = bounded_degree_graph(n, d, density, &mut rng);
            (g.clone(), g.clone(), g)
        }
    };
    let a = random_values(a, semiring, &mut rng);
    let b = random_values(b, semiring, &mut rng);
    TriInstance::new(n, d, semiring, a, b, x).map_err(|e| GenerateError::Invalid(e.to_string()))
}

fn random_values(p: SparsePattern, s: Semiring, rng: &mut ChaCha8Rng) -> SupportedMatrix {
    let values = p
        .rows
        .iter()
        .map(|r| r.iter().map(|_| s.random_value(rng)).collect())
        .collect();
    SupportedMatrix::new(p, values)
}

fn from_entries(n: usize, mut entries: Vec<(u32, u32)>) -> SparsePattern {
    entries.sort_unstable();
    entries.dedup();
    SparsePattern::from_entries(n, entries).expect("entries are in range")
}

/// Union of `count` random `n x n` permutation matrices.
pub fn permutation_union(n: usize, count: usize, rng: &mut ChaCha8Rng) -> SparsePattern {
    let mut entries = Vec::with_capacity(n * count);
    for _ in 0..count {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(rng);
        entries.extend(perm.into_iter().enumerate().map(|(r, c)| (r as u32, c)));
    }
    from_entries(n, entries)
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    p.shuffle(rng);
    p
}

/// Cluster `c` owns positions `c*d .. (c+1)*d` on every side, mapped to
/// node indices by one random permutation per side. `A` and `B` are full
/// on each cluster; every `X` entry of a cluster is kept with probability
/// `density`.
fn planted_clusters(
    n: usize,
    d: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> (SparsePattern, SparsePattern, SparsePattern) {
    let (pi, pj, pk) = (shuffled(n, rng), shuffled(n, rng), shuffled(n, rng));
    let (mut a, mut b, mut x) = (Vec::new(), Vec::new(), Vec::new());
    for c in 0..n / d {
        let block = c * d..(c + 1) * d;
        for r in block.clone() {
            for s in block.clone() {
                a.push((pi[r], pj[s]));
                b.push((pj[r], pk[s]));
                if density >= 1.0 || rng.gen_bool(density) {
                    x.push((pi[r], pk[s]));
                }
            }
        }
    }
    (from_entries(n, a), from_entries(n, b), from_entries(n, x))
}

/// `I_0` is joined to `J_0..J_d`, those to `K_0..K_d`, and `X` row 0 asks
/// for `K_0..K_d`: `d^2` triangles at `I_0`. Indices from `d` upwards
/// carry a random-uniform instance of density `density`.
fn planted_bad_node(
    n: usize,
    d: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> (SparsePattern, SparsePattern, SparsePattern) {
    let d32 = d as u32;
    let mut a: Vec<(u32, u32)> = (0..d32).map(|j| (0, j)).collect();
    let mut b: Vec<(u32, u32)> = (0..d32).flat_map(|j| (0..d32).map(move |k| (j, k))).collect();
    let mut x: Vec<(u32, u32)> = (0..d32).map(|k| (0, k)).collect();
    let rest = n - d;
    let perms = (density * d as f64).round() as usize;
    for target in [&mut a, &mut b, &mut x] {
        let noise = permutation_union(rest, perms, rng);
        target.extend(noise.entries().map(|(r, c)| (r + d32, c + d32)));
    }
    (from_entries(n, a), from_entries(n, b), from_entries(n, x))
}

/// Random simple graph with maximum degree `d`: about `density * n * d / 2`
/// random pairs are tried and kept when both endpoints have room.
pub fn bounded_degree_graph(n: usize, d: usize, density: f64, rng: &mut ChaCha8Rng) -> SparsePattern {
    let mut degree = vec![0usize; n];
    let mut edges = std::collections::BTreeSet::new();
    let tries = (density * (n * d) as f64 / 2.0).round() as usize;
    if n >= 2 {
        for _ in 0..tries {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            let (u, v) = (u.min(v), u.max(v));
            if u == v || degree[u] >= d || degree[v] >= d || edges.contains(&(u, v)) {
                continue;
            }
            edges.insert((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let entries = edges
        .into_iter()
        .flat_map(|(u, v)| [(u as u32, v as u32), (v as u32, u as u32)])
        .collect();
    from_entries(n, entries)
}
