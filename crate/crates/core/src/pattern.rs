//! Sparse indicator patterns and the uniform-sparsity check.

/// Row-major sparsity pattern of an `n x n` indicator matrix.
///
/// `rows[r]` holds the strictly increasing column indices of row `r`.
/// The fields are public so raw data can be inspected or assembled freely;
/// [`SparsePattern::check_structure`] (and every consumer in this crate)
/// verifies well-formedness before relying on it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparsePattern {
    pub n: usize,
    pub rows: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("pattern has {rows} rows but dimension {n}")]
    RowCount { n: usize, rows: usize },
    #[error("row {row} is not strictly increasing")]
    Unsorted { row: usize },
    #[error("entry ({row}, {col}) is outside a {n}x{n} pattern")]
    OutOfRange { row: usize, col: usize, n: usize },
    #[error("dimension {0} does not fit in 32-bit indices")]
    TooLarge(usize),
}

impl SparsePattern {
    pub fn empty(n: usize) -> Self {
        SparsePattern {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparsePattern {
            n,
            rows: (0..n as u32).map(|r| vec![r]).collect(),
        }
    }

    /// The all-ones pattern. Only uniformly sparse for `d >= n`.
    pub fn full(n: usize) -> Self {
        SparsePattern {
            n,
            rows: vec![(0..n as u32).collect(); n],
        }
    }

    /// Builds a pattern from `(row, col)` pairs; duplicates collapse.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self, PatternError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        if n > u32::MAX as usize {
            return Err(PatternError::TooLarge(n));
        }
        let mut rows = vec![Vec::new(); n];
        for (r, c) in entries {
            if r as usize >= n || c as usize >= n {
                return Err(PatternError::OutOfRange {
                    row: r as usize,
                    col: c as usize,
                    n,
                });
            }
            rows[r as usize].push(c);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        Ok(SparsePattern { n, rows })
    }

    pub fn check_structure(&self) -> Result<(), PatternError> {
        if self.n > u32::MAX as usize {
            return Err(PatternError::TooLarge(self.n));
        }
        if self.rows.len() != self.n {
            return Err(PatternError::RowCount {
                n: self.n,
                rows: self.rows.len(),
            });
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(PatternError::Unsorted { row: r });
            }
            if let Some(&c) = row.iter().find(|&&c| c as usize >= self.n) {
                return Err(PatternError::OutOfRange {
                    row: r,
                    col: c as usize,
                    n: self.n,
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn row(&self, r: u32) -> &[u32] {
        &self.rows[r as usize]
    }

    /// Position of `(r, c)` inside `rows[r]`, if present.
    #[inline]
    pub fn position(&self, r: u32, c: u32) -> Option<usize> {
        self.rows.get(r as usize)?.binary_search(&c).ok()
    }

    #[inline]
    pub fn contains(&self, r: u32, c: u32) -> bool {
        self.position(r, c).is_some()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r as u32, c)))
    }

    /// Column-major view: `columns()[c]` lists the rows having an entry in column `c`.
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n];
        for (r, c) in self.entries() {
            cols[c as usize].push(r);
        }
        cols
    }

    pub fn transpose(&self) -> SparsePattern {
        SparsePattern {
            n: self.n,
            rows: self.columns(),
        }
    }

    pub fn max_row_count(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_col_count(&self) -> usize {
        let mut counts = vec![0usize; self.n];
        for (_, c) in self.entries() {
            counts[c as usize] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

/// True iff every row and every column of `pattern` has at most `d` entries.
pub fn validate_uniform_sparsity(pattern: &SparsePattern, d: usize) -> Result<bool, PatternError> {
    pattern.check_structure()?;
    Ok(pattern.max_row_count() <= d && pattern.max_col_count() <= d)
}
