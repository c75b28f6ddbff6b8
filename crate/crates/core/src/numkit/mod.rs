//! Numeric kernels shared by the solvers: SPD solves, projections onto
//! simple convex sets, Dykstra's algorithm and a projected-gradient
//! minimizer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

mod cg;
mod dykstra;
mod pgd;
mod project;

pub use cg::solve_spd;
pub use dykstra::{dykstra_intersection, DykstraConfig, Projection};
pub use pgd::{
    projected_gradient_minimize, stationarity, PgResult, ProjectedGradientConfig, StopReason,
};
pub use project::{
    project_box, project_budget_simplex, project_frobenius_ball,
    project_halfspace, project_l1_ball, project_l2_ball, BudgetMode,
};

/// A symmetric linear map applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let y = self * DVector::from_column_slice(x);
        out.copy_from_slice(y.as_slice());
    }
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::SolverFailure("matrix is not positive definite".into()))
}

/// Dense Cholesky solve of `A x = b` for SPD `A`.
pub fn dense_solve_spd(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("matrix is not positive definite".into()))?;
    Ok(chol.solve(&DVector::from_column_slice(b)).as_slice().to_vec())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
