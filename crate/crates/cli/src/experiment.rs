//! Parameter sweeps: generate, multiply, check against the oracle, and
//! write a CSV, a summary and a plot.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparsemm_core::algorithms::{multiply, AlgoError, DenseEngine, Phase, PipelineConfig};
use sparsemm_core::oracle::check_output;
use sparsemm_core::sim::SimError;
use sparsemm_core::Semiring;

use crate::generate::{generate, GeneratorKind, GeneratorSpec};
use crate::plot::plot_rounds;
use crate::resolve_schedule;

/// An experiment file, written in TOML:
///
/// ```toml
/// name = "clusters"
/// repetitions = 2
/// sweep = [[64, 4], [64, 8]]
///
/// [generator]
/// kind = "planted-clusters"
/// density = 1.0
/// semiring = "integer"
/// seed = 1
///
/// [pipeline]
/// schedule = "table2"
/// engine = "semiring3d"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// `(n, d)` points.
    #[serde(default)]
    pub sweep: Vec<(usize, usize)>,
    pub generator: GeneratorSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub kind: GeneratorKind,
    #[serde(default = "full_density")]
    pub density: f64,
    #[serde(default = "integer", with = "crate::semiring_serde")]
    pub semiring: Semiring,
    /// Repetition `r` uses seed `seed + r`.
    #[serde(default)]
    pub seed: u64,
}

fn full_density() -> f64 {
    1.0
}

fn integer() -> Semiring {
    Semiring::Integer
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    /// Preset name or schedule file path.
    pub schedule: String,
    pub engine: String,
    pub brute_force: bool,
    pub eps: Option<f64>,
    pub colors: Option<usize>,
    pub seed: u64,
    pub budget: u64,
    pub max_attempts: u32,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let c = PipelineConfig::default();
        PipelineSection {
            schedule: c.schedule.name().to_string(),
            engine: c.engine.name().to_string(),
            brute_force: false,
            eps: None,
            colors: None,
            seed: c.seed,
            budget: c.budget,
            max_attempts: c.max_attempts,
        }
    }
}

impl PipelineSection {
    pub fn to_config(&self) -> Result<PipelineConfig> {
        let engine: DenseEngine = self.engine.parse().map_err(anyhow::Error::msg)?;
        let config = PipelineConfig {
            schedule: resolve_schedule(&self.schedule)?,
            engine,
            small_eps: self.eps,
            seed: self.seed,
            budget: self.budget,
            trace: false,
            colors: self.colors,
            max_attempts: self.max_attempts,
            brute_force_only: self.brute_force,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Output file names, relative to the output directory. Unset names
/// default to `<name>.csv`, `<name>_summary.json` and `<name>.svg`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).context("malformed experiment file")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.generator.density) {
            bail!("density must lie in [0, 1], got {}", self.generator.density);
        }
        if let Some(&(n, d)) = self.sweep.iter().find(|&&(n, d)| d == 0 || n < d) {
            bail!("sweep point (n = {n}, d = {d}) needs n >= d >= 1");
        }
        self.pipeline.to_config()?;
        Ok(())
    }

    fn generator_spec(&self, n: usize, d: usize, rep: usize) -> GeneratorSpec {
        GeneratorSpec {
            kind: self.generator.kind,
            n,
            d,
            density: self.generator.density,
            semiring: self.generator.semiring,
            seed: self.generator.seed.wrapping_add(rep as u64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every output entry equals the oracle.
    ExactMatch,
    /// The sampled entries equal the oracle (large `n`).
    SpotMatch,
    Mismatch,
    BudgetExhausted,
    Error,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::ExactMatch => "exact-match",
            Verdict::SpotMatch => "spot-match",
            Verdict::Mismatch => "mismatch",
            Verdict::BudgetExhausted => "budget-exhausted",
            Verdict::Error => "error",
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::ExactMatch | Verdict::SpotMatch)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRow {
    pub n: usize,
    pub d: usize,
    pub rep: usize,
    pub seed: u64,
    pub triangles: usize,
    pub layers: usize,
    pub brute_force_rounds: u64,
    pub clustered_rounds: u64,
    pub small_component_rounds: u64,
    pub total_rounds: u64,
    pub messages: u64,
    pub verdict: Verdict,
}

pub const CSV_HEADER: &str = "n,d,rep,seed,triangles,layers,brute_force_rounds,clustered_rounds,\
small_component_rounds,total_rounds,messages,verdict";

impl ExperimentRow {
    fn failed(n: usize, d: usize, rep: usize, seed: u64, verdict: Verdict) -> Self {
        ExperimentRow {
            n,
            d,
            rep,
            seed,
            triangles: 0,
            layers: 0,
            brute_force_rounds: 0,
            clustered_rounds: 0,
            small_component_rounds: 0,
            total_rounds: 0,
            messages: 0,
            verdict,
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.d,
            self.rep,
            self.seed,
            self.triangles,
            self.layers,
            self.brute_force_rounds,
            self.clustered_rounds,
            self.small_component_rounds,
            self.total_rounds,
            self.messages,
            self.verdict
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopePoint {
    pub d: usize,
    pub mean_rounds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub runs: usize,
    pub verdicts: BTreeMap<String, usize>,
    pub total_rounds: u64,
    pub total_messages: u64,
    /// Least-squares slope of `log(mean rounds)` against `log d`.
    pub fitted_slope: Option<f64>,
    pub points: Vec<SlopePoint>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub summary: Summary,
}

impl ExperimentResult {
    /// The CSV; an empty sweep gives the header alone.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.verdict.is_ok())
    }
}

/// Runs one sweep point.
pub fn run_point(
    spec: &ExperimentSpec,
    config: &PipelineConfig,
    n: usize,
    d: usize,
    rep: usize,
) -> ExperimentRow {
    let gen = spec.generator_spec(n, d, rep);
    let inst = match generate(&gen) {
        Ok(inst) => inst,
        Err(e) => {
            log::error!("n = {n}, d = {d}, rep = {rep}: {e}");
            return ExperimentRow::failed(n, d, rep, gen.seed, Verdict::Error);
        }
    };
    let out = match multiply(&inst, config) {
        Ok(out) => out,
        Err(e) => {
            let verdict = match e {
                AlgoError::Sim(SimError::BudgetExhausted { .. }) => Verdict::BudgetExhausted,
                _ => Verdict::Error,
            };
            log::error!("n = {n}, d = {d}, rep = {rep}: {e}");
            return ExperimentRow::failed(n, d, rep, gen.seed, verdict);
        }
    };
    let (mismatches, full) = check_output(&inst, &out.values, gen.seed);
    let verdict = match (mismatches, full) {
        (0, true) => Verdict::ExactMatch,
        (0, false) => Verdict::SpotMatch,
        _ => Verdict::Mismatch,
    };
    let r = &out.report;
    ExperimentRow {
        n,
        d,
        rep,
        seed: gen.seed,
        triangles: out.processed.len(),
        layers: out.layers,
        brute_force_rounds: r.phase_rounds(Phase::BruteForce),
        clustered_rounds: r.phase_rounds(Phase::Clustered),
        small_component_rounds: r.phase_rounds(Phase::SmallComponent),
        total_rounds: r.total_rounds,
        messages: r.messages,
        verdict,
    }
}

/// Runs every sweep point and repetition in parallel; rows come back
/// sorted by `(n, d, rep)`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let config = spec.pipeline.to_config()?;
    let points: Vec<(usize, usize, usize)> = spec
        .sweep
        .iter()
        .flat_map(|&(n, d)| (0..spec.repetitions).map(move |rep| (n, d, rep)))
        .collect();
    let mut rows: Vec<ExperimentRow> = points
        .par_iter()
        .map(|&(n, d, rep)| run_point(spec, &config, n, d, rep))
        .collect();
    rows.sort_by_key(|r| (r.n, r.d, r.rep));
    let summary = summarize(&spec.name, &rows);
    Ok(ExperimentResult { rows, summary })
}

/// Mean total rounds per `d` over successful rows, and the fitted slope.
pub fn summarize(name: &str, rows: &[ExperimentRow]) -> Summary {
    let mut verdicts = BTreeMap::new();
    let mut per_d: BTreeMap<usize, (u64, usize)> = BTreeMap::new();
    for r in rows {
        *verdicts.entry(r.verdict.name().to_string()).or_insert(0) += 1;
        if r.verdict.is_ok() {
            let e = per_d.entry(r.d).or_insert((0, 0));
            e.0 += r.total_rounds;
            e.1 += 1;
        }
    }
    let points: Vec<SlopePoint> = per_d
        .into_iter()
        .map(|(d, (sum, count))| SlopePoint {
            d,
            mean_rounds: sum as f64 / count as f64,
        })
        .collect();
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.mean_rounds > 0.0)
        .map(|p| (p.d as f64, p.mean_rounds))
        .collect();
    Summary {
        name: name.to_string(),
        runs: rows.len(),
        verdicts,
        total_rounds: rows.iter().map(|r| r.total_rounds).sum(),
        total_messages: rows.iter().map(|r| r.messages).sum(),
        fitted_slope: loglog_slope(&xy),
        points,
    }
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer
/// than two distinct `x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Paths of the files written by [`write_outputs`].
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

/// Writes the CSV, the JSON summary and the SVG plot into `dir`.
pub fn write_outputs(spec: &ExperimentSpec, result: &ExperimentResult, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let pick = |p: &Option<PathBuf>, default: String| dir.join(p.clone().unwrap_or_else(|| default.into()));
    let paths = OutputPaths {
        csv: pick(&spec.outputs.csv, format!("{}.csv", spec.name)),
        summary: pick(&spec.outputs.summary, format!("{}_summary.json", spec.name)),
        plot: pick(&spec.outputs.plot, format!("{}.svg", spec.name)),
    };
    std::fs::write(&paths.csv, result.to_csv())
        .with_context(|| format!("cannot write {}", paths.csv.display()))?;
    let summary = serde_json::to_string_pretty(&result.summary)? + "\n";
    std::fs::write(&paths.summary, summary)
        .with_context(|| format!("cannot write {}", paths.summary.display()))?;
    plot_rounds(&spec.name, &result.rows, &paths.plot)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
name = "t"
repetitions = 2
sweep = [[16, 2], [16, 4]]

[generator]
kind = "random-uniform"
density = 0.5
seed = 3

[pipeline]
engine = "naive"
"#;

    #[test]
    fn parses_with_defaults() {
        let spec = ExperimentSpec::from_toml(SPEC).unwrap();
        assert_eq!(spec.repetitions, 2);
        assert_eq!(spec.sweep, vec![(16, 2), (16, 4)]);
        assert_eq!(spec.generator.semiring, Semiring::Integer);
        assert_eq!(spec.pipeline.schedule, "table2");
        assert!(!spec.pipeline.brute_force);
    }

    #[test]
    fn rejects_bad_specs() {
        let zero_reps = SPEC.replace("repetitions = 2", "repetitions = 0");
        assert!(ExperimentSpec::from_toml(&zero_reps).is_err());
        let bad_point = SPEC.replace("[16, 4]", "[2, 4]");
        assert!(ExperimentSpec::from_toml(&bad_point).is_err());
        let unknown = SPEC.replace("engine = \"naive\"", "engine = \"strassen\"");
        assert!(ExperimentSpec::from_toml(&unknown).is_err());
        let typo = SPEC.replace("seed = 3", "sed = 3");
        assert!(ExperimentSpec::from_toml(&typo).is_err());
    }

    #[test]
    fn rows_are_sorted_and_exact() {
        let spec = ExperimentSpec::from_toml(SPEC).unwrap();
        let result = run_experiment(&spec).unwrap();
        let keys: Vec<_> = result.rows.iter().map(|r| (r.n, r.d, r.rep)).collect();
        assert_eq!(keys, vec![(16, 2, 0), (16, 2, 1), (16, 4, 0), (16, 4, 1)]);
        assert!(result.all_ok());
        assert_eq!(result.summary.verdicts["exact-match"], 4);
    }

    #[test]
    fn tiny_budget_is_flagged() {
        let mut spec = ExperimentSpec::from_toml(SPEC).unwrap();
        spec.pipeline.budget = 1;
        spec.generator.density = 1.0;
        let result = run_experiment(&spec).unwrap();
        assert!(result.rows.iter().all(|r| r.verdict == Verdict::BudgetExhausted));
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let mut spec = ExperimentSpec::from_toml(SPEC).unwrap();
        spec.sweep.clear();
        let result = run_experiment(&spec).unwrap();
        assert_eq!(result.to_csv(), format!("{CSV_HEADER}\n"));
        assert_eq!(result.summary.fitted_slope, None);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [2.0f64, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(2.0, 1.0)]), None);
        assert_eq!(loglog_slope(&[(2.0, 1.0), (2.0, 5.0)]), None);
    }
}
