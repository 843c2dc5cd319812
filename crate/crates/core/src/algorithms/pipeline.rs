use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{
    process_brute_force, process_clustered_set, process_small_component, AlgoError, Network,
    OutputAccumulator, SmallComponentStats, SmallConfig,
};
use crate::clustering::{schedule_decompose, Schedule};
use crate::instance::{SupportedMatrix, TriInstance};
use crate::pattern::SparsePattern;
use crate::semiring::{Semiring, Value};
use crate::sim::TraceEvent;
use crate::triangle::{enumerate_triangles, TriangleSet};

/// How triangles inside one cluster are processed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DenseEngine {
    /// In-cluster brute force, `O(d^2)` rounds.
    Naive,
    /// Three-dimensional block split over the cluster nodes, `O(d^(4/3))` rounds.
    Semiring3d,
}

impl DenseEngine {
    /// Below `d = 8` the block split costs more than it saves.
    pub fn effective(self, d: usize) -> DenseEngine {
        match self {
            DenseEngine::Semiring3d if d < 8 => DenseEngine::Naive,
            e => e,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DenseEngine::Naive => "naive",
            DenseEngine::Semiring3d => "semiring3d",
        }
    }
}

impl fmt::Display for DenseEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DenseEngine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(DenseEngine::Naive),
            "semiring3d" => Ok(DenseEngine::Semiring3d),
            _ => Err(format!("unknown engine `{s}` (expected naive or semiring3d)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub schedule: Schedule,
    pub engine: DenseEngine,
    /// Small-component exponent; defaults to the schedule's value.
    pub small_eps: Option<f64>,
    pub seed: u64,
    pub budget: u64,
    pub trace: bool,
    /// Color-count override for the small component.
    pub colors: Option<usize>,
    pub max_attempts: u32,
    /// Skip the decomposition and brute-force everything.
    pub brute_force_only: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            schedule: Schedule::table2(),
            engine: DenseEngine::Semiring3d,
            small_eps: None,
            seed: 0,
            budget: 10_000_000,
            trace: false,
            colors: None,
            max_attempts: 32,
            brute_force_only: false,
        }
    }
}

impl PipelineConfig {
    pub fn small_eps(&self) -> f64 {
        self.small_eps
            .unwrap_or_else(|| self.schedule.small_component_eps())
    }

    pub fn validate(&self) -> Result<(), AlgoError> {
        let eps = self.small_eps();
        if !(0.0..1.0).contains(&eps) {
            return Err(AlgoError::Config(format!(
                "small-component eps must lie in [0, 1), got {eps}"
            )));
        }
        self.schedule.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    BruteForce,
    Clustered,
    SmallComponent,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::BruteForce => "brute-force",
            Phase::Clustered => "clustered",
            Phase::SmallComponent => "small-component",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRounds {
    pub phase: Phase,
    pub layer: Option<usize>,
    pub rounds: u64,
    pub triangles: usize,
}

/// Rounds spent per phase. Preprocessing is free and does not appear.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundReport {
    pub entries: Vec<PhaseRounds>,
    pub total_rounds: u64,
    pub messages: u64,
    pub small: Option<SmallComponentStats>,
}

impl RoundReport {
    /// CSV with header `phase,layer,rounds,triangles`; `layer` is empty
    /// for phases that are not layered.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,layer,rounds,triangles\n");
        for e in &self.entries {
            let layer = e.layer.map(|l| l.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.phase.name(),
                layer,
                e.rounds,
                e.triangles
            ));
        }
        out
    }

    pub fn phase_rounds(&self, phase: Phase) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.phase == phase)
            .map(|e| e.rounds)
            .sum()
    }
}

impl fmt::Display for RoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total rounds: {}", self.total_rounds)?;
        writeln!(f, "messages: {}", self.messages)?;
        for phase in [Phase::BruteForce, Phase::Clustered, Phase::SmallComponent] {
            let layers = self.entries.iter().filter(|e| e.phase == phase).count();
            if layers > 0 {
                writeln!(
                    f,
                    "{}: {} rounds over {} step(s)",
                    phase.name(),
                    self.phase_rounds(phase),
                    layers
                )?;
            }
        }
        if let Some(s) = &self.small {
            writeln!(
                f,
                "small component: {} bad nodes, {} colors{}, max virtual load {}",
                s.bad_nodes,
                s.colors,
                if s.fell_back { " (fallback)" } else { "" },
                s.max_virtual_load
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MultiplyOutput {
    pub output: SupportedMatrix,
    pub values: BTreeMap<(u32, u32), Value>,
    pub report: RoundReport,
    pub processed: TriangleSet,
    pub layers: usize,
    pub trace: Option<Vec<TraceEvent>>,
}

/// Computes every requested output `X_ik = sum_j A_ij B_jk`.
///
/// The triangle set is split into clustered layers and a residual during
/// preprocessing; layers run on the in-cluster engine and the residual on
/// the small-component routine. When `d < 2`, `n < d` or
/// `brute_force_only` is set, everything is brute-forced instead.
pub fn multiply(inst: &TriInstance, config: &PipelineConfig) -> Result<MultiplyOutput, AlgoError> {
    config.validate()?;
    inst.validate()
        .map_err(|e| AlgoError::Config(format!("invalid instance: {e}")))?;
    let (n, d) = (inst.n, inst.d);
    let all = enumerate_triangles(inst);
    let mut net = Network::new(inst, config.budget, config.trace);
    let mut acc = OutputAccumulator::new(inst);
    let mut report = RoundReport::default();
    let mut layers = 0;

    if config.brute_force_only || d < 2 || n < d {
        let rounds = process_brute_force(&mut net, &all, &mut acc)?;
        report.entries.push(PhaseRounds {
            phase: Phase::BruteForce,
            layer: None,
            rounds,
            triangles: all.len(),
        });
    } else {
        let dec = schedule_decompose(&all, &config.schedule, d, n)?;
        let engine = config.engine.effective(d);
        layers = dec.layers.len();
        for (m, layer) in dec.layers.iter().enumerate() {
            let rounds = process_clustered_set(&mut net, layer, &mut acc, engine)?;
            report.entries.push(PhaseRounds {
                phase: Phase::Clustered,
                layer: Some(m),
                rounds,
                triangles: layer.len(),
            });
        }
        let small = SmallConfig {
            eps: config.small_eps(),
            colors: config.colors,
            max_attempts: config.max_attempts,
            seed: config.seed,
        };
        let (rounds, stats) = process_small_component(&mut net, &dec.residual, &small, &mut acc)?;
        report.entries.push(PhaseRounds {
            phase: Phase::SmallComponent,
            layer: None,
            rounds,
            triangles: dec.residual.len(),
        });
        report.small = Some(stats);
    }

    if acc.processed() != &all {
        return Err(AlgoError::Internal(format!(
            "processed {} of {} triangles",
            acc.processed().len(),
            all.len()
        )));
    }
    report.total_rounds = net.engine.total_rounds();
    report.messages = net.engine.messages_sent();
    let trace = net.engine.trace().map(<[TraceEvent]>::to_vec);
    Ok(MultiplyOutput {
        output: acc.to_matrix(inst),
        values: acc.values().clone(),
        report,
        processed: acc.processed().clone(),
        layers,
        trace,
    })
}

/// Counts triangles whose three edges are all red.
///
/// `graph` is the symmetric support, `red` a symmetric subset of it. Both
/// factors hold 1 on red edges and 0 on the other graph edges, every graph
/// edge is requested, and the red entries of the product sum to six times
/// the number of red triangles.
pub fn count_triangles(
    graph: &SparsePattern,
    red: &SparsePattern,
    config: &PipelineConfig,
) -> Result<(u64, RoundReport), AlgoError> {
    if graph.n != red.n {
        return Err(AlgoError::Config("graph and red edges differ in size".into()));
    }
    if let Some((u, v)) = red.entries().find(|&(u, v)| !graph.contains(u, v)) {
        return Err(AlgoError::Config(format!(
            "red edge ({u}, {v}) is not a graph edge"
        )));
    }
    let n = graph.n;
    let d = graph.max_row_count().max(graph.max_col_count()).max(1);
    let values: Vec<Vec<Value>> = graph
        .rows
        .iter()
        .enumerate()
        .map(|(u, row)| {
            row.iter()
                .map(|&v| Value::from(red.contains(u as u32, v)))
                .collect()
        })
        .collect();
    let m = SupportedMatrix::new(graph.clone(), values);
    let inst = TriInstance::new(n, d, Semiring::Integer, m.clone(), m, graph.clone())
        .map_err(|e| AlgoError::Config(format!("graph does not form an instance: {e}")))?;
    let out = multiply(&inst, config)?;
    let total: i64 = red.entries().map(|(u, v)| out.values[&(u, v)]).sum();
    if total % 6 != 0 {
        return Err(AlgoError::Internal(format!(
            "red path count {total} is not a multiple of 6; are the edge sets symmetric?"
        )));
    }
    Ok(((total / 6) as u64, out.report))
}
