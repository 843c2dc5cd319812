//! Undirected graphs as edge lists: one `u v` pair per line, 0-indexed.

use std::collections::BTreeSet;

use sparsemm_core::SparsePattern;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("vertex {vertex} is out of range for {n} vertices")]
    OutOfRange { vertex: u32, n: usize },
}

/// Parses an edge list. Blank lines and `#` comments are skipped; each
/// edge is returned as `(min, max)`, deduplicated and sorted.
pub fn parse_edge_list(text: &str) -> Result<Vec<(u32, u32)>, GraphError> {
    let mut edges = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| GraphError::Parse { line: idx + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(err(format!("expected `u v`, got `{line}`")));
        }
        let parse = |t: &str| t.parse::<u32>().map_err(|_| err(format!("bad vertex `{t}`")));
        let (u, v) = (parse(toks[0])?, parse(toks[1])?);
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        edges.insert((u.min(v), u.max(v)));
    }
    Ok(edges.into_iter().collect())
}

/// Writes each undirected edge of a symmetric pattern once, as `u v` with `u < v`.
pub fn write_edge_list(graph: &SparsePattern) -> String {
    let mut out = String::new();
    for (u, v) in graph.entries().filter(|&(u, v)| u < v) {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Number of vertices implied by an edge list: one more than the largest id.
pub fn vertex_count(edges: &[(u32, u32)]) -> usize {
    edges.iter().map(|&(_, v)| v as usize + 1).max().unwrap_or(0)
}

/// Symmetric adjacency pattern on `n` vertices.
pub fn symmetric_pattern(n: usize, edges: &[(u32, u32)]) -> Result<SparsePattern, GraphError> {
    let mut entries = Vec::with_capacity(2 * edges.len());
    for &(u, v) in edges {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for vertex in [u, v] {
            if vertex as usize >= n {
                return Err(GraphError::OutOfRange { vertex, n });
            }
        }
        entries.push((u, v));
        entries.push((v, u));
    }
    entries.sort_unstable();
    entries.dedup();
    Ok(SparsePattern::from_entries(n, entries).expect("entries were range-checked"))
}

/// Triangles with all three edges in `red`, by exhaustive enumeration.
pub fn count_triangles_exhaustive(red: &SparsePattern) -> u64 {
    let mut count = 0;
    for u in 0..red.n as u32 {
        for &v in red.row(u).iter().filter(|&&v| v > u) {
            count += red
                .row(v)
                .iter()
                .filter(|&&w| w > v && red.contains(u, w))
                .count() as u64;
        }
    }
    count
}
