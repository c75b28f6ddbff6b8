use serde::Serialize;

use super::{dot, max_abs_diff};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectedGradientConfig {
    /// First trial step. Later trials use the Barzilai–Borwein estimate and
    /// halve on rejection.
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop when `||x - P(x - grad)||_inf` falls below this.
    pub grad_tol: f64,
    /// Stop when one iteration improves the objective by less than
    /// `objective_tol * max(1, |f|)`.
    pub objective_tol: f64,
}

impl Default for ProjectedGradientConfig {
    fn default() -> Self {
        ProjectedGradientConfig {
            step_size: 1.0,
            max_iters: 20_000,
            grad_tol: 1e-10,
            objective_tol: 1e-16,
        }
    }
}

impl ProjectedGradientConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step_size > 0.0
            && self.grad_tol > 0.0
            && self.objective_tol > 0.0
            && self.max_iters >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "projected gradient settings must be positive: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stationary,
    ObjectiveStalled,
    MaxIterations,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct PgResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    /// `||x - P(x - grad f(x))||_inf` at the returned point.
    pub stationarity: f64,
}

/// Displacement of one unit projected-gradient step from `x`.
pub fn stationarity<P>(x: &[f64], grad: &[f64], mut project: P) -> Result<f64>
where
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let trial: Vec<f64> = x.iter().zip(grad).map(|(a, g)| a - g).collect();
    Ok(max_abs_diff(x, &project(&trial)?))
}

/// Consecutive iterations below `objective_tol` before declaring a stall.
const STALL_WINDOW: usize = 10;
const ARMIJO: f64 = 1e-4;

/// Projected gradient descent with Barzilai–Borwein trial steps and Armijo
/// backtracking along the projection arc.
///
/// `objective` returns the value and gradient; `project` is the Euclidean
/// projection onto the feasible set. A trial point is accepted only if it
/// lowers the objective by at least `1e-4 * |grad . dx|`, so the trace is
/// non-increasing.
pub fn projected_gradient_minimize<F, P>(
    mut objective: F,
    mut project: P,
    x0: &[f64],
    cfg: &ProjectedGradientConfig,
) -> Result<PgResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x);
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut trace = vec![f];
    let max_step = cfg.step_size * 1e10;
    let min_step = cfg.step_size * 1e-30;
    let mut step = cfg.step_size;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    let mut stalled = 0;
    let mut stat = stationarity(&x, &g, &mut project)?;

    while iterations < cfg.max_iters {
        if stat <= cfg.grad_tol {
            stop = StopReason::Stationary;
            break;
        }
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, gi)| a - step * gi).collect();
            let candidate = project(&trial)?;
            let (fc, gc) = objective(&candidate);
            let dx: Vec<f64> = candidate.iter().zip(&x).map(|(c, a)| c - a).collect();
            let slope = dot(&g, &dx);
            if fc.is_finite() && fc <= f + ARMIJO * slope.min(0.0) && fc <= f {
                break Some((candidate, fc, gc, dx));
            }
            step *= 0.5;
            if step < min_step {
                break None;
            }
        };
        let Some((candidate, fc, gc, dx)) = accepted else {
            stop = StopReason::StepUnderflow;
            break;
        };
        iterations += 1;
        let decrease = f - fc;
        let dg: Vec<f64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
        x = candidate;
        f = fc;
        g = gc;
        trace.push(f);
        stat = stationarity(&x, &g, &mut project)?;
        if decrease <= cfg.objective_tol * f.abs().max(1.0) {
            stalled += 1;
            if stalled >= STALL_WINDOW && stat > cfg.grad_tol {
                stop = StopReason::ObjectiveStalled;
                break;
            }
        } else {
            stalled = 0;
        }
        let curvature = dot(&dx, &dg);
        step = if curvature > 0.0 {
            (dot(&dx, &dx) / curvature).clamp(min_step, max_step)
        } else {
            (2.0 * step).min(max_step)
        };
    }
    if stop == StopReason::MaxIterations && stat <= cfg.grad_tol {
        stop = StopReason::Stationary;
    }
    Ok(PgResult {
        x,
        objective: f,
        trace,
        iterations,
        stop,
        stationarity: stat,
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    use super::*;
    use crate::numkit::{dense_solve_spd, project_box};

    fn unit_box(n: usize) -> impl FnMut(&[f64]) -> Result<Vec<f64>> {
        let lo = vec![0.0; n];
        let hi = vec![1.0; n];
        move |v: &[f64]| project_box(v, &lo, &hi)
    }

    #[test]
    fn squared_norm_on_box_goes_to_origin() {
        let r = projected_gradient_minimize(
            |x| (x.iter().map(|v| v * v).sum(), x.iter().map(|v| 2.0 * v).collect()),
            unit_box(3),
            &[0.5, 0.25, 0.75],
            &ProjectedGradientConfig::default(),
        )
        .unwrap();
        assert!(r.x.iter().all(|v| v.abs() < 1e-9));
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn linear_objective_reaches_vertex() {
        let c = [1.0, -2.0, 0.5];
        let r = projected_gradient_minimize(
            |x| (dot(&c, x), c.to_vec()),
            unit_box(3),
            &[0.5; 3],
            &ProjectedGradientConfig::default(),
        )
        .unwrap();
        assert_eq!(r.x, vec![0.0, 1.0, 0.0]);
        assert_eq!(r.stop, StopReason::Stationary);
    }

    #[test]
    fn interior_quadratic_matches_closed_form() {
        // f = (x - a)^T Q (x - a) with a inside the box: minimizer is a.
        let q = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let a = DVector::from_vec(vec![0.3, 0.6]);
        let r = projected_gradient_minimize(
            |x| {
                let d = DVector::from_column_slice(x) - &a;
                let qd = &q * &d;
                (d.dot(&qd), (2.0 * qd).as_slice().to_vec())
            },
            unit_box(2),
            &[0.9, 0.1],
            &ProjectedGradientConfig::default(),
        )
        .unwrap();
        assert!((r.x[0] - 0.3).abs() < 1e-6 && (r.x[1] - 0.6).abs() < 1e-6);
    }

    #[test]
    fn psd_quadratic_matches_dense_optimum() {
        let mut rng = crate::rng::stream(5, 50);
        for trial in 0..10 {
            let n = 5 + 3 * (trial % 6);
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let q = &m * m.transpose() + DMatrix::identity(n, n) * 0.1;
            let target: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // Unconstrained: min 1/2 x^T Q x - b^T x with b = Q target, optimum = target.
            let b = &q * DVector::from_column_slice(&target);
            let optimum = dense_solve_spd(&q, b.as_slice()).unwrap();
            let r = projected_gradient_minimize(
                |x| {
                    let xv = DVector::from_column_slice(x);
                    let qx = &q * &xv;
                    (0.5 * xv.dot(&qx) - b.dot(&xv), (qx - &b).as_slice().to_vec())
                },
                |v: &[f64]| Ok(v.to_vec()),
                &vec![0.0; n],
                &ProjectedGradientConfig::default(),
            )
            .unwrap();
            assert!(max_abs_diff(&r.x, &optimum) < 1e-6, "trial {trial}: {:?} {} {} {}", r.stop, r.iterations, r.stationarity, max_abs_diff(&r.x, &optimum));
        }
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let r = projected_gradient_minimize(
            |_| (f64::NAN, vec![0.0]),
            unit_box(1),
            &[0.5],
            &ProjectedGradientConfig::default(),
        );
        assert_eq!(r.unwrap_err(), Error::NonFiniteObjective);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = ProjectedGradientConfig {
            step_size: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
