//! Seeded test-instance generators.

use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::stream;

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi {
        Ok(())
    } else {
        Err(Error::InvalidRange { lo, hi })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn draw_weight<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Erdős–Rényi graph with weights uniform in `[wlo, whi)`.
pub fn random_graph(n: usize, p: f64, wlo: f64, whi: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    check_range(wlo, whi)?;
    let mut rng = stream(seed, 0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            // Always draw both numbers so the stream layout does not depend on p.
            let coin: f64 = rng.gen();
            let w = draw_weight(&mut rng, wlo, whi);
            if coin < p {
                edges.push((i, j, w));
            }
        }
    }
    Graph::new(n, edges)
}

/// Two equal-size communities (nodes `0..n/2` and `n/2..n`) with
/// within-community edge probability `p_in` and cross probability `p_out`.
pub fn two_community_graph(
    n: usize,
    p_in: f64,
    p_out: f64,
    wlo: f64,
    whi: f64,
    seed: u64,
) -> Result<Graph> {
    check_probability(p_in)?;
    check_probability(p_out)?;
    check_range(wlo, whi)?;
    let half = n / 2;
    let mut rng = stream(seed, 1);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if (i < half) == (j < half) { p_in } else { p_out };
            let coin: f64 = rng.gen();
            let w = draw_weight(&mut rng, wlo, whi);
            if coin < p {
                edges.push((i, j, w));
            }
        }
    }
    Graph::new(n, edges)
}

/// Preferential-attachment graph with a power-law degree tail: each new node
/// attaches to `m` distinct existing nodes chosen proportionally to degree.
/// Starts from a clique on `m + 1` nodes.
pub fn power_law_graph(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || n <= m {
        return Err(Error::InvalidParameter(format!(
            "preferential attachment needs 1 <= m < n (m = {m}, n = {n})"
        )));
    }
    let mut rng = stream(seed, 2);
    // Each endpoint appears once per incident edge.
    let mut endpoints: Vec<usize> = Vec::new();
    let mut edges = Vec::new();
    for i in 0..=m {
        for j in i + 1..=m {
            edges.push((i, j, 1.0));
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    for v in m + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        targets.sort_unstable();
        for t in targets {
            edges.push((t, v, 1.0));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::new(n, edges)
}
