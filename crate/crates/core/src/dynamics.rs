//! Friedkin–Johnsen opinion evolution.
//!
//! Each node repeatedly replaces its expressed opinion with the average of
//! its fixed internal opinion and its neighbours' expressed opinions,
//! weighted by edge weight. The unique fixed point solves `(L + I) z = s`.

use std::ops::Deref;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::numkit::{dense_solve_spd, max_abs_diff, solve_spd};

/// Below this size the equilibrium is computed by dense Cholesky.
pub const DENSE_SOLVE_LIMIT: usize = 500;

/// Relative tolerance for the iterative equilibrium solve.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Self {
        OpinionVector(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        OpinionVector(vec![c; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn in_unit_interval(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

impl Deref for OpinionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for OpinionVector {
    fn from(v: Vec<f64>) -> Self {
        OpinionVector(v)
    }
}

impl From<&[f64]> for OpinionVector {
    fn from(v: &[f64]) -> Self {
        OpinionVector(v.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `z(0), z(1), ...`; never empty.
    pub steps: Vec<OpinionVector>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the final step's change.
    pub residual: f64,
}

impl Trajectory {
    pub fn last(&self) -> &OpinionVector {
        self.steps.last().expect("trajectory holds z(0)")
    }
}

/// One synchronous update. Isolated nodes snap to their internal opinion.
pub fn fj_step(g: &Graph, s: &[f64], z: &[f64]) -> Result<OpinionVector> {
    check_len(g.n(), s.len())?;
    check_len(g.n(), z.len())?;
    let mut num = s.to_vec();
    let mut den = vec![1.0; g.n()];
    for e in g.edges() {
        num[e.i] += e.w * z[e.j];
        num[e.j] += e.w * z[e.i];
        den[e.i] += e.w;
        den[e.j] += e.w;
    }
    Ok(num.iter().zip(&den).map(|(a, b)| a / b).collect::<Vec<_>>().into())
}

/// Iterates [`fj_step`] until the max-norm change drops below `tol` or
/// `max_iter` steps have run.
pub fn fj_iterate(
    g: &Graph,
    s: &[f64],
    z0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Trajectory> {
    check_len(g.n(), s.len())?;
    check_len(g.n(), z0.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut steps = vec![OpinionVector::from(z0)];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let prev = steps.last().expect("nonempty");
        let next = fj_step(g, s, prev)?;
        residual = max_abs_diff(prev, &next);
        steps.push(next);
        if residual < tol {
            converged = true;
            break;
        }
    }
    if steps.len() == 1 {
        residual = 0.0;
    }
    Ok(Trajectory {
        iterations: steps.len() - 1,
        steps,
        converged,
        residual,
    })
}

/// Equilibrium opinions `z = (L + I)^-1 s`.
pub fn equilibrium(g: &Graph, s: &[f64]) -> Result<OpinionVector> {
    check_len(g.n(), s.len())?;
    let z = if g.n() < DENSE_SOLVE_LIMIT {
        let mut a = g.laplacian();
        for i in 0..g.n() {
            a[(i, i)] += 1.0;
        }
        dense_solve_spd(&a, s)?
    } else {
        solve_spd(&g.shifted_laplacian(), s, EQUILIBRIUM_TOL)
            .map_err(|e| Error::SolverFailure(e.to_string()))?
    };
    Ok(z.into())
}
