//! Library side of the `sparsemm` command-line tool: instance generators,
//! graph files, experiment sweeps and result plots.

pub mod experiment;
pub mod generate;
pub mod graph;
pub mod plot;

pub use experiment::{run_experiment, ExperimentResult, ExperimentRow, ExperimentSpec, Verdict};
pub use generate::{generate, GenerateError, GeneratorKind, GeneratorSpec};

use anyhow::{Context, Result};
use sparsemm_core::clustering::Schedule;

/// Resolves a preset name (`table1`, `table2`, `simplified`) or a path to
/// a schedule file with one `eps1 eps2 delta` row per line.
pub fn resolve_schedule(name: &str) -> Result<Schedule> {
    if let Some(s) = Schedule::preset(name) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(name)
        .with_context(|| format!("`{name}` is neither a schedule preset nor a readable file"))?;
    let stem = std::path::Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("custom");
    Ok(Schedule::parse(stem, &text)?)
}

pub(crate) mod semiring_serde {
    use serde::{Deserialize, Deserializer, Serializer};
    use sparsemm_core::Semiring;

    pub fn serialize<S: Serializer>(s: &Semiring, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(s.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Semiring, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
