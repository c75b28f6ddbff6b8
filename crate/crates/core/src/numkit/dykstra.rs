use super::max_abs_diff;
use crate::error::{Error, Result};

/// Euclidean projection onto one closed convex set.
pub type Projection<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

#[derive(Debug, Clone, Copy)]
pub struct DykstraConfig {
    pub max_cycles: usize,
    /// Both the per-cycle movement and every set's displacement must fall
    /// below this (max-norm).
    pub tol: f64,
}

impl Default for DykstraConfig {
    fn default() -> Self {
        DykstraConfig {
            max_cycles: 20_000,
            tol: 1e-10,
        }
    }
}

/// Dykstra's alternating projection: converges to the Euclidean projection
/// of `x0` onto the intersection of the sets.
pub fn dykstra_intersection(
    x0: &[f64],
    projections: &[Projection<'_>],
    cfg: DykstraConfig,
) -> Result<Vec<f64>> {
    if projections.is_empty() {
        return Ok(x0.to_vec());
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut increments = vec![vec![0.0; n]; projections.len()];
    let mut shifted = vec![0.0; n];
    let mut gap = f64::INFINITY;
    for _ in 0..cfg.max_cycles {
        let before = x.clone();
        // x can sit still for several cycles while the increments are still
        // building up, so both must settle before stopping.
        let mut inc_moved: f64 = 0.0;
        for (project, inc) in projections.iter().zip(increments.iter_mut()) {
            for k in 0..n {
                shifted[k] = x[k] + inc[k];
            }
            let y = project(&shifted);
            for k in 0..n {
                let next = shifted[k] - y[k];
                inc_moved = inc_moved.max((next - inc[k]).abs());
                inc[k] = next;
            }
            x = y;
        }
        let moved = max_abs_diff(&before, &x);
        if moved <= cfg.tol && inc_moved <= cfg.tol {
            gap = projections
                .iter()
                .map(|p| max_abs_diff(&p(&x), &x))
                .fold(0.0, f64::max);
            if gap <= cfg.tol {
                return Ok(x);
            }
        }
    }
    if gap.is_infinite() {
        gap = projections
            .iter()
            .map(|p| max_abs_diff(&p(&x), &x))
            .fold(0.0, f64::max);
    }
    Err(Error::NoConvergence(gap))
}
