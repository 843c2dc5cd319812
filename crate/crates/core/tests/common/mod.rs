#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsemm_core::{Semiring, SparsePattern, SupportedMatrix, TriInstance};

/// Union of `d` random permutation matrices: every row and column has at most `d` entries.
pub fn random_pattern(n: usize, d: usize, rng: &mut ChaCha8Rng) -> SparsePattern {
    let mut entries = Vec::new();
    for _ in 0..d {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(rng);
        entries.extend(perm.into_iter().enumerate().map(|(r, c)| (r as u32, c)));
    }
    entries.sort_unstable();
    entries.dedup();
    SparsePattern::from_entries(n, entries).unwrap()
}

pub fn random_matrix(p: SparsePattern, s: Semiring, rng: &mut ChaCha8Rng) -> SupportedMatrix {
    let values = p
        .rows
        .iter()
        .map(|r| r.iter().map(|_| s.random_value(rng)).collect())
        .collect();
    SupportedMatrix::new(p, values)
}

pub fn random_instance(n: usize, d: usize, s: Semiring, seed: u64) -> TriInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_matrix(random_pattern(n, d, &mut rng), s, &mut rng);
    let b = random_matrix(random_pattern(n, d, &mut rng), s, &mut rng);
    let x = random_pattern(n, d, &mut rng);
    TriInstance::new(n, d, s, a, b, x).unwrap()
}

/// `n / d` disjoint full blocks on the diagonal of all three matrices.
pub fn block_instance(n: usize, d: usize, s: Semiring, seed: u64) -> TriInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|r| {
            let base = r / d as u32 * d as u32;
            (base..(base + d as u32).min(n as u32)).map(move |c| (r, c))
        })
        .collect();
    let p = SparsePattern::from_entries(n, entries).unwrap();
    let a = random_matrix(p.clone(), s, &mut rng);
    let b = random_matrix(p.clone(), s, &mut rng);
    TriInstance::new(n, d, s, a, b, p).unwrap()
}
