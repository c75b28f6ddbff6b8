//! Weighted undirected graphs and their adjacency / Laplacian views.
//!
//! Every undirected pair is stored once with `i < j`, so edge sums such as
//! the disagreement run over each pair a single time. Zero-weight edges are
//! dropped on construction.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numkit::LinearOperator;

pub mod generate;

pub use generate::{power_law_graph, random_graph, two_community_graph};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Immutable weighted undirected simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a validated graph. Pairs may be given in either orientation;
    /// they are normalized to `i < j` and sorted.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            let (i, j) = validate_edge(n, a, b, w)?;
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateEdge(i, j));
            }
            if w > 0.0 {
                out.push(Edge { i, j, w });
            }
        }
        out.sort_by_key(|e| (e.i, e.j));
        Ok(Graph { n, edges: out })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
        }
    }

    /// Builds a graph from the strict upper triangle of a dense weight matrix.
    /// Entries below `drop_below` are treated as absent.
    pub fn from_upper_triangle(w: &DMatrix<f64>, drop_below: f64) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "adjacency must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        let n = w.nrows();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let v = w[(i, j)];
                if v > drop_below {
                    edges.push((i, j, v));
                }
            }
        }
        Graph::new(n, edges)
    }

    /// Builds a graph over all `n(n-1)/2` pairs from a weight vector laid out
    /// in [`pair_index`] order.
    pub fn from_pair_weights(n: usize, weights: &[f64], drop_below: f64) -> Result<Self> {
        crate::error::check_len(n * n.saturating_sub(1) / 2, weights.len())?;
        let mut edges = Vec::new();
        let mut p = 0;
        for i in 0..n {
            for j in i + 1..n {
                let v = weights[p];
                if v > drop_below {
                    edges.push((i, j, v));
                }
                p += 1;
            }
        }
        Graph::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .ok()
            .map(|p| self.edges[p].w)
    }

    /// Weighted degrees `d_i = sum_j W_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.i] += e.w;
            d[e.j] += e.w;
        }
        d
    }

    /// Number of nonzero adjacency entries in each row.
    pub fn neighbor_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for e in &self.edges {
            c[e.i] += 1;
            c[e.j] += 1;
        }
        c
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees().into_iter().fold(0.0, f64::max)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.i, e.j)] = e.w;
            w[(e.j, e.i)] = e.w;
        }
        w
    }

    /// Dense `L = D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.i, e.j)] -= e.w;
            l[(e.j, e.i)] -= e.w;
            l[(e.i, e.i)] += e.w;
            l[(e.j, e.j)] += e.w;
        }
        l
    }

    /// `out = L x` without forming `L`.
    pub fn laplacian_apply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for e in &self.edges {
            let diff = e.w * (x[e.i] - x[e.j]);
            out[e.i] += diff;
            out[e.j] -= diff;
        }
    }

    /// `x^T L x` as the edge sum `sum_(i,j) W_ij (x_i - x_j)^2`.
    pub fn laplacian_quadratic(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.w * (x[e.i] - x[e.j]).powi(2))
            .sum()
    }

    /// Weights for every pair `i < j`, in [`pair_index`] order.
    pub fn pair_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; pair_count(self.n)];
        for e in &self.edges {
            w[pair_index(self.n, e.i, e.j)] = e.w;
        }
        w
    }

    /// Operator view of `L + I`, which is symmetric positive definite.
    pub fn shifted_laplacian(&self) -> ShiftedLaplacian<'_> {
        ShiftedLaplacian { graph: self }
    }

    /// Serializes to the edge-list text format accepted by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for e in &self.edges {
            // `{}` on f64 is the shortest representation that round-trips.
            let _ = writeln!(out, "{},{},{}", e.i, e.j, e.w);
        }
        out
    }
}

/// `(L + I) x` for a borrowed graph.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedLaplacian<'a> {
    graph: &'a Graph,
}

impl LinearOperator for ShiftedLaplacian<'_> {
    fn dim(&self) -> usize {
        self.graph.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.graph.laplacian_apply(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += xi;
        }
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Row-major position of pair `(i, j)`, `i < j`, among all pairs of `n` nodes.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Pairs `(i, j)` in [`pair_index`] order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn validate_edge(n: usize, a: usize, b: usize, w: f64) -> Result<(usize, usize)> {
    for index in [a, b] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    if a == b {
        return Err(Error::SelfLoop(a));
    }
    let (i, j) = (a.min(b), a.max(b));
    if !w.is_finite() || w < 0.0 {
        return Err(Error::NegativeWeight { i, j, weight: w });
    }
    Ok((i, j))
}

/// Parses the line-oriented edge-list format:
///
/// ```text
/// # comment
/// n=3
/// 0,1,1.0
/// 1,2,0.5
/// ```
///
/// Fields are separated by commas or tabs. The `n=` header must precede
/// every edge line.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| Error::MalformedLine {
            line: line_no,
            reason: reason.to_string(),
        };
        let Some(count) = n else {
            let value = line
                .strip_prefix("n=")
                .ok_or_else(|| malformed("expected header `n=<count>`"))?;
            n = Some(
                value
                    .trim()
                    .parse()
                    .map_err(|_| malformed("node count is not a nonnegative integer"))?,
            );
            continue;
        };
        let fields: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
        if fields.len() != 3 {
            return Err(malformed("expected `i<sep>j<sep>w`"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| malformed("bad source index"))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| malformed("bad target index"))?;
        let w: f64 = fields[2].parse().map_err(|_| malformed("bad weight"))?;
        let (i, j) = validate_edge(count, i, j, w)?;
        if !seen.insert((i, j)) {
            return Err(Error::DuplicateEdge(i, j));
        }
        edges.push((i, j, w));
    }
    let n = n.ok_or(Error::MalformedLine {
        line: 0,
        reason: "missing `n=<count>` header".into(),
    })?;
    Graph::new(n, edges)
}
