//! Supported-model instances: fixed sparsity structure plus runtime values.
//!
//! The text format is line based and whitespace tolerant:
//!
//! ```text
//! # comment
//! <n> <d> <semiring>
//! A
//! <row> <col> <value>
//! B
//! <row> <col> <value>
//! X
//! <row> <col>
//! PATTERN A
//! <row> <col>
//! PATTERN B
//! <row> <col>
//! ```
//!
//! Every listed `A`/`B` entry belongs to the support, whatever its value.
//! `PATTERN` sections add supported entries whose runtime value is zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::pattern::{validate_uniform_sparsity, PatternError, SparsePattern};
use crate::semiring::{Semiring, Value};

/// A value matrix aligned with its indicator pattern.
///
/// `values[r][p]` is the value of entry `(r, pattern.rows[r][p])`. Entries
/// outside the pattern are zero by construction, which is the
/// supported-model promise. Entries inside may be zero too.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportedMatrix {
    pub pattern: SparsePattern,
    pub values: Vec<Vec<Value>>,
}

impl SupportedMatrix {
    pub fn new(pattern: SparsePattern, values: Vec<Vec<Value>>) -> Self {
        SupportedMatrix { pattern, values }
    }

    /// Every supported entry set to `value`.
    pub fn filled(pattern: SparsePattern, value: Value) -> Self {
        let values = pattern.rows.iter().map(|r| vec![value; r.len()]).collect();
        SupportedMatrix { pattern, values }
    }

    /// Value at `(r, c)`, or `zero` when outside the support.
    #[inline]
    pub fn get(&self, r: u32, c: u32, zero: Value) -> Value {
        match self.pattern.position(r, c) {
            Some(p) => self.values[r as usize][p],
            None => zero,
        }
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: u32) -> impl Iterator<Item = (u32, Value)> + '_ {
        self.pattern.rows[r as usize]
            .iter()
            .copied()
            .zip(self.values[r as usize].iter().copied())
    }

    fn is_aligned(&self) -> bool {
        self.values.len() == self.pattern.rows.len()
            && self
                .values
                .iter()
                .zip(&self.pattern.rows)
                .all(|(v, r)| v.len() == r.len())
    }
}

/// Which of the three matrices an error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixName {
    A,
    B,
    X,
}

impl std::fmt::Display for MatrixName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatrixName::A => "A",
            MatrixName::B => "B",
            MatrixName::X => "X",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("matrix {matrix}: {source}")]
    Pattern {
        matrix: MatrixName,
        #[source]
        source: PatternError,
    },
    #[error("matrix {matrix} has dimension {got}, expected {n}")]
    Dimension {
        matrix: MatrixName,
        n: usize,
        got: usize,
    },
    #[error("matrix {matrix} is not uniformly {d}-sparse")]
    NotSparse { matrix: MatrixName, d: usize },
    #[error("matrix {matrix}: values are not aligned with the pattern")]
    Misaligned { matrix: MatrixName },
    #[error("matrix {matrix}: value {value} at ({row}, {col}) is not a {semiring} element")]
    BadElement {
        matrix: MatrixName,
        row: u32,
        col: u32,
        value: Value,
        semiring: Semiring,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A uniformly sparse multiplication instance in the supported model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriInstance {
    pub n: usize,
    pub d: usize,
    pub semiring: Semiring,
    pub a: SupportedMatrix,
    pub b: SupportedMatrix,
    /// Indicator of the outputs that must be computed.
    pub x: SparsePattern,
}

impl TriInstance {
    pub fn new(
        n: usize,
        d: usize,
        semiring: Semiring,
        a: SupportedMatrix,
        b: SupportedMatrix,
        x: SparsePattern,
    ) -> Result<Self, InstanceError> {
        let inst = TriInstance {
            n,
            d,
            semiring,
            a,
            b,
            x,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks structure, uniform sparsity and element membership.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let pats = [
            (MatrixName::A, &self.a.pattern),
            (MatrixName::B, &self.b.pattern),
            (MatrixName::X, &self.x),
        ];
        for (matrix, p) in pats {
            if p.n != self.n {
                return Err(InstanceError::Dimension {
                    matrix,
                    n: self.n,
                    got: p.n,
                });
            }
            let sparse = validate_uniform_sparsity(p, self.d)
                .map_err(|source| InstanceError::Pattern { matrix, source })?;
            if !sparse {
                return Err(InstanceError::NotSparse { matrix, d: self.d });
            }
        }
        for (matrix, m) in [(MatrixName::A, &self.a), (MatrixName::B, &self.b)] {
            if !m.is_aligned() {
                return Err(InstanceError::Misaligned { matrix });
            }
            for (r, row) in m.pattern.rows.iter().enumerate() {
                for (p, &c) in row.iter().enumerate() {
                    let value = m.values[r][p];
                    if !self.semiring.contains(value) {
                        return Err(InstanceError::BadElement {
                            matrix,
                            row: r as u32,
                            col: c,
                            value,
                            semiring: self.semiring,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn a_value(&self, i: u32, j: u32) -> Value {
        self.a.get(i, j, self.semiring.zero())
    }

    #[inline]
    pub fn b_value(&self, j: u32, k: u32) -> Value {
        self.b.get(j, k, self.semiring.zero())
    }

    /// Serializes to the text format described in the module docs.
    pub fn to_text(&self) -> String {
        let s = self.semiring;
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.n, self.d, s.name());
        for (name, m) in [("A", &self.a), ("B", &self.b)] {
            let _ = writeln!(out, "{name}");
            for r in 0..self.n as u32 {
                for (c, v) in m.row(r) {
                    let _ = writeln!(out, "{r} {c} {}", s.format_value(v));
                }
            }
        }
        let _ = writeln!(out, "X");
        for (r, c) in self.x.entries() {
            let _ = writeln!(out, "{r} {c}");
        }
        out
    }

    /// Parses the text format described in the module docs.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Section {
            None,
            A,
            B,
            X,
            PatA,
            PatB,
        }
        let perr = |line: usize, msg: String| InstanceError::Parse { line, msg };

        let mut header: Option<(usize, usize, Semiring)> = None;
        let mut section = Section::None;
        let mut a: BTreeMap<(u32, u32), Value> = BTreeMap::new();
        let mut b: BTreeMap<(u32, u32), Value> = BTreeMap::new();
        let mut x: Vec<(u32, u32)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some((n, _, semiring)) = header else {
                if toks.len() != 3 {
                    return Err(perr(line_no, "expected header `n d semiring`".into()));
                }
                let n = toks[0]
                    .parse()
                    .map_err(|_| perr(line_no, format!("bad n `{}`", toks[0])))?;
                let d = toks[1]
                    .parse()
                    .map_err(|_| perr(line_no, format!("bad d `{}`", toks[1])))?;
                let s = toks[2]
                    .parse::<Semiring>()
                    .map_err(|e| perr(line_no, e.to_string()))?;
                header = Some((n, d, s));
                continue;
            };
            match toks.as_slice() {
                ["A"] => section = Section::A,
                ["B"] => section = Section::B,
                ["X"] => section = Section::X,
                ["PATTERN", "A"] => section = Section::PatA,
                ["PATTERN", "B"] => section = Section::PatB,
                _ => {
                    let idx_of = |t: &str| -> Result<u32, InstanceError> {
                        let v: u32 = t.parse().map_err(|_| perr(line_no, format!("bad index `{t}`")))?;
                        if v as usize >= n {
                            return Err(perr(line_no, format!("index {v} out of range")));
                        }
                        Ok(v)
                    };
                    match (section, toks.as_slice()) {
                        (Section::A | Section::B, [r, c, v]) => {
                            let key = (idx_of(r)?, idx_of(c)?);
                            let value = semiring
                                .parse_value(v)
                                .map_err(|e| perr(line_no, e.to_string()))?;
                            let target = if section == Section::A { &mut a } else { &mut b };
                            if target.insert(key, value).is_some() {
                                return Err(perr(line_no, format!("duplicate entry {key:?}")));
                            }
                        }
                        (Section::X, [r, c]) => x.push((idx_of(r)?, idx_of(c)?)),
                        (Section::PatA | Section::PatB, [r, c]) => {
                            let key = (idx_of(r)?, idx_of(c)?);
                            let target = if section == Section::PatA { &mut a } else { &mut b };
                            target.entry(key).or_insert(semiring.zero());
                        }
                        (Section::None, _) => return Err(perr(line_no, "entry before any section".into())),
                        _ => return Err(perr(line_no, format!("malformed entry `{line}`"))),
                    }
                }
            }
        }

        let (n, d, semiring) = header.ok_or_else(|| perr(0, "missing header".into()))?;
        let build = |m: BTreeMap<(u32, u32), Value>| -> SupportedMatrix {
            let mut rows = vec![Vec::new(); n];
            let mut values = vec![Vec::new(); n];
            // BTreeMap iteration is sorted by (row, col)
            for ((r, c), v) in m {
                rows[r as usize].push(c);
                values[r as usize].push(v);
            }
            SupportedMatrix::new(SparsePattern { n, rows }, values)
        };
        let x = SparsePattern::from_entries(n, x).map_err(|source| InstanceError::Pattern {
            matrix: MatrixName::X,
            source,
        })?;
        TriInstance::new(n, d, semiring, build(a), build(b), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_instance(n: usize) -> TriInstance {
        TriInstance::new(
            n,
            1,
            Semiring::Integer,
            SupportedMatrix::filled(SparsePattern::identity(n), 2),
            SupportedMatrix::filled(SparsePattern::identity(n), 3),
            SparsePattern::identity(n),
        )
        .unwrap()
    }

    #[test]
    fn text_round_trip() {
        let inst = identity_instance(4);
        let back = TriInstance::parse(&inst.to_text()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn pattern_section_adds_zero_valued_support() {
        let text = "
            # tiny
            2 2 tropical
            A
            0 1 5
            B
            1 0 inf
            X
              0   0
            PATTERN A
            1 1
        ";
        let inst = TriInstance::parse(text).unwrap();
        assert!(inst.a.pattern.contains(1, 1));
        assert_eq!(inst.a_value(1, 1), Semiring::Tropical.zero());
        assert_eq!(inst.a_value(0, 1), 5);
        assert_eq!(inst.b_value(1, 0), Semiring::Tropical.zero());
        assert!(inst.b.pattern.contains(1, 0));
        assert_eq!(inst.x.nnz(), 1);
    }

    #[test]
    fn rejects_dense_rows_and_bad_elements() {
        let dense = "2 1 integer\nA\n0 0 1\n0 1 1\nB\nX\n";
        assert!(matches!(
            TriInstance::parse(dense),
            Err(InstanceError::NotSparse {
                matrix: MatrixName::A,
                d: 1
            })
        ));
        let bad_bool = "2 1 boolean\nA\n0 0 3\nB\nX\n";
        assert!(matches!(
            TriInstance::parse(bad_bool),
            Err(InstanceError::Parse { line: 3, .. })
        ));
        let misaligned = TriInstance::new(
            1,
            1,
            Semiring::Integer,
            SupportedMatrix::new(SparsePattern::identity(1), vec![vec![]]),
            SupportedMatrix::filled(SparsePattern::identity(1), 1),
            SparsePattern::identity(1),
        );
        assert!(matches!(misaligned, Err(InstanceError::Misaligned { .. })));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(
            TriInstance::parse("3 1 integer\n0 0 1\n"),
            Err(InstanceError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            TriInstance::parse("3 1 integer\nX\n0 9\n"),
            Err(InstanceError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            TriInstance::parse("3 1 integer\nA\n0 0 1\n0 0 2\n"),
            Err(InstanceError::Parse { line: 4, .. })
        ));
        assert!(TriInstance::parse("").is_err());
    }
}
