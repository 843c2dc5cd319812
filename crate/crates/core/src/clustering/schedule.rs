use std::fmt;
use std::str::FromStr;

use super::{decompose_layers, ClusteredSet, ClusteringError};
use crate::triangle::{Triangle, TriangleSet};

/// One decomposition round: shrink from `d^(2-eps1) n` to `d^(2-eps2) n` triangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleRow {
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
}

impl ScheduleRow {
    pub fn new(eps1: f64, eps2: f64, delta: f64) -> Result<Self, ClusteringError> {
        let row = ScheduleRow { eps1, eps2, delta };
        row.check(0)?;
        Ok(row)
    }

    fn check(&self, row: usize) -> Result<(), ClusteringError> {
        let bad = |reason: &str| ClusteringError::MalformedSchedule {
            row,
            reason: reason.to_string(),
        };
        if !(self.eps1.is_finite() && self.eps2.is_finite() && self.delta.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        if self.eps1 < 0.0 {
            return Err(bad("eps1 must be non-negative"));
        }
        if self.eps1 >= self.eps2 {
            return Err(bad("eps1 must be smaller than eps2"));
        }
        if self.delta <= 0.0 {
            return Err(bad("delta must be positive"));
        }
        Ok(())
    }
}

const fn row(eps1: f64, eps2: f64, delta: f64) -> ScheduleRow {
    ScheduleRow { eps1, eps2, delta }
}

/// Five rows for the ring setting; residual exponent below 1.814.
const TABLE1: [ScheduleRow; 5] = [
    row(0.0, 0.149775, 0.00001),
    row(0.149775, 0.179736, 0.00001),
    row(0.179736, 0.185724, 0.00001),
    row(0.185724, 0.186926, 0.00001),
    row(0.186926, 0.187166, 0.00001),
];

/// Five rows for the semiring setting; residual exponent below 1.854.
const TABLE2: [ScheduleRow; 5] = [
    row(0.0, 0.118537, 0.00001),
    row(0.118537, 0.142249, 0.00001),
    row(0.142249, 0.146986, 0.00001),
    row(0.146986, 0.147937, 0.00001),
    row(0.147937, 0.148127, 0.00001),
];

const SIMPLIFIED: [ScheduleRow; 1] = [row(0.0, 0.1, 0.05)];

/// A chained list of rows: the first starts at `eps1 = 0` and each row
/// starts where the previous one stopped.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    name: String,
    rows: Vec<ScheduleRow>,
}

impl Schedule {
    pub fn new(name: impl Into<String>, rows: Vec<ScheduleRow>) -> Result<Self, ClusteringError> {
        let s = Schedule {
            name: name.into(),
            rows,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn table1() -> Self {
        Schedule {
            name: "table1".into(),
            rows: TABLE1.to_vec(),
        }
    }

    pub fn table2() -> Self {
        Schedule {
            name: "table2".into(),
            rows: TABLE2.to_vec(),
        }
    }

    pub fn simplified() -> Self {
        Schedule {
            name: "simplified".into(),
            rows: SIMPLIFIED.to_vec(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "table1" => Some(Schedule::table1()),
            "table2" => Some(Schedule::table2()),
            "simplified" => Some(Schedule::simplified()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> &[ScheduleRow] {
        &self.rows
    }

    /// `eps2` of the last row: the residual holds at most `d^(2 - final_eps) n` triangles.
    pub fn final_eps(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.eps2)
    }

    /// Default small-component exponent for this schedule.
    ///
    /// The presets use the rounded exponents that balance both phases;
    /// custom schedules use the residual exponent directly.
    pub fn small_component_eps(&self) -> f64 {
        match self.name.as_str() {
            "table1" => 0.186,
            "table2" => 0.146,
            "simplified" => 0.1,
            _ => self.final_eps(),
        }
    }

    pub fn validate(&self) -> Result<(), ClusteringError> {
        if self.rows.is_empty() {
            return Err(ClusteringError::MalformedSchedule {
                row: 0,
                reason: "schedule is empty".into(),
            });
        }
        for (m, r) in self.rows.iter().enumerate() {
            r.check(m)?;
        }
        if self.rows[0].eps1 != 0.0 {
            return Err(ClusteringError::MalformedSchedule {
                row: 0,
                reason: "first row must start at eps1 = 0".into(),
            });
        }
        for (m, w) in self.rows.windows(2).enumerate() {
            if (w[1].eps1 - w[0].eps2).abs() > 1e-12 {
                return Err(ClusteringError::MalformedSchedule {
                    row: m + 1,
                    reason: format!("eps1 {} does not continue eps2 {}", w[1].eps1, w[0].eps2),
                });
            }
        }
        Ok(())
    }

    /// Parses `eps1 eps2 delta` rows; `#` starts a comment.
    pub fn parse(name: &str, text: &str) -> Result<Self, ClusteringError> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Result<Vec<f64>, _> = line.split_whitespace().map(f64::from_str).collect();
            match nums {
                Ok(v) if v.len() == 3 => rows.push(ScheduleRow {
                    eps1: v[0],
                    eps2: v[1],
                    delta: v[2],
                }),
                _ => {
                    return Err(ClusteringError::ScheduleParse {
                        line: idx + 1,
                        msg: format!("expected `eps1 eps2 delta`, got `{line}`"),
                    })
                }
            }
        }
        Schedule::new(name, rows)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{} {} {}", r.eps1, r.eps2, r.delta)?;
        }
        Ok(())
    }
}

/// The layered decomposition `T = P^1 ∪ ... ∪ P^L ∪ residual`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub layers: Vec<ClusteredSet>,
    /// Index of the schedule row that produced each layer.
    pub layer_rows: Vec<usize>,
    pub residual: TriangleSet,
    pub schedule: Schedule,
}

impl Decomposition {
    pub fn clustered_len(&self) -> usize {
        self.layers.iter().map(ClusteredSet::len).sum()
    }

    /// All triangles, layers first, then the residual.
    pub fn triangles(&self) -> impl Iterator<Item = &Triangle> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.triangles())
            .chain(self.residual.iter())
    }
}

/// Runs [`decompose_layers`] once per schedule row, feeding each residual
/// into the next row.
pub fn schedule_decompose(
    all: &TriangleSet,
    schedule: &Schedule,
    d: usize,
    n: usize,
) -> Result<Decomposition, ClusteringError> {
    schedule.validate()?;
    let mut layers = Vec::new();
    let mut layer_rows = Vec::new();
    let mut residual = all.clone();
    for (m, row) in schedule.rows().iter().enumerate() {
        let (new_layers, rest) = decompose_layers(&residual, row, d, n)?;
        layer_rows.extend(std::iter::repeat_n(m, new_layers.len()));
        layers.extend(new_layers);
        residual = rest;
    }
    Ok(Decomposition {
        layers,
        layer_rows,
        residual,
        schedule: schedule.clone(),
    })
}
