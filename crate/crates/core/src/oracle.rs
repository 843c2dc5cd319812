//! Direct reference computations used to check the distributed results.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::TriInstance;
use crate::semiring::Value;
use crate::triangle::TriangleSet;

/// `X_ik = sum over all j of A_ij B_jk` for every requested `(i, k)`.
pub fn multiply_oracle(inst: &TriInstance) -> BTreeMap<(u32, u32), Value> {
    let s = inst.semiring;
    inst.x
        .entries()
        .map(|(i, k)| {
            let v = s.sum((0..inst.n as u32).map(|j| s.mul(inst.a_value(i, j), inst.b_value(j, k))));
            ((i, k), v)
        })
        .collect()
}

/// One output entry computed directly.
pub fn oracle_entry(inst: &TriInstance, i: u32, k: u32) -> Value {
    let s = inst.semiring;
    s.sum((0..inst.n as u32).map(|j| s.mul(inst.a_value(i, j), inst.b_value(j, k))))
}

/// Sum of `A_ij B_jk` over the triangles of `set` only, for every
/// requested output (zero where no triangle contributes).
pub fn processed_sum(inst: &TriInstance, set: &TriangleSet) -> BTreeMap<(u32, u32), Value> {
    let s = inst.semiring;
    let mut out: BTreeMap<(u32, u32), Value> = inst.x.entries().map(|e| (e, s.zero())).collect();
    for t in set.iter() {
        let slot = out.entry((t.i, t.k)).or_insert(s.zero());
        *slot = s.add(*slot, s.mul(inst.a_value(t.i, t.j), inst.b_value(t.j, t.k)));
    }
    out
}

/// Largest `n` for which the full oracle is run; above it only a sample
/// of entries is checked.
pub const ORACLE_CAP: usize = 512;

/// Number of entries checked above [`ORACLE_CAP`].
pub const SPOT_CHECKS: usize = 1000;

/// Compares `output` with the oracle: every entry up to [`ORACLE_CAP`],
/// otherwise [`SPOT_CHECKS`] entries drawn with `seed`. Returns the
/// number of mismatching entries among those checked and whether the
/// check was complete.
pub fn check_output(inst: &TriInstance, output: &BTreeMap<(u32, u32), Value>, seed: u64) -> (usize, bool) {
    let entries: Vec<(u32, u32)> = inst.x.entries().collect();
    let full = inst.n <= ORACLE_CAP || entries.len() <= SPOT_CHECKS;
    let picked: Vec<(u32, u32)> = if full {
        entries
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, entries.len(), SPOT_CHECKS)
            .into_iter()
            .map(|p| entries[p])
            .collect()
    };
    let bad = picked
        .iter()
        .filter(|&&(i, k)| output.get(&(i, k)).copied() != Some(oracle_entry(inst, i, k)))
        .count();
    (bad, full)
}
