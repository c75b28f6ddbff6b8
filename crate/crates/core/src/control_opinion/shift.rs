//! Budgeted reduction of internal opinions to lower the
//! polarization–disagreement index.

use serde::Serialize;

use crate::dynamics::OpinionVector;
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::metrics::{metrics_from_internal, MetricEvaluator, MetricMatrixKind, MetricReport, MetricRoute};
use crate::numkit::{
    dykstra_intersection, project_box, project_halfspace, projected_gradient_minimize,
    DykstraConfig, ProjectedGradientConfig, StopReason,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftProblem {
    pub s: OpinionVector,
    /// Total amount opinions may be lowered by.
    pub alpha: f64,
}

impl ShiftProblem {
    pub fn new(s: Vec<f64>, alpha: f64) -> Result<Self> {
        if !OpinionVector::from(s.as_slice()).in_unit_interval() {
            return Err(Error::InvalidParameter("internal opinions must lie in [0, 1]".into()));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(ShiftProblem { s: s.into(), alpha })
    }

    /// Projection onto `{0 <= d <= s, sum(d) <= alpha}`.
    pub fn project(&self, d: &[f64]) -> Result<Vec<f64>> {
        let lo = vec![0.0; self.s.len()];
        let ones = vec![1.0; self.s.len()];
        let boxed = |v: &[f64]| project_box(v, &lo, &self.s).expect("valid box");
        let budget = |v: &[f64]| project_halfspace(v, &ones, self.alpha).expect("valid halfspace");
        dykstra_intersection(d, &[&boxed, &budget], DykstraConfig::default())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftSolution {
    pub d: OpinionVector,
    pub s_new: OpinionVector,
    pub report: MetricReport,
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub stationarity: f64,
}

/// Chooses `0 <= d <= s` with `sum(d) <= alpha` minimising the
/// polarization–disagreement index of `s - d`.
pub fn minimize_pdi_shift(
    g: &Graph,
    s: &[f64],
    alpha: f64,
    cfg: &ProjectedGradientConfig,
) -> Result<ShiftSolution> {
    check_len(g.n(), s.len())?;
    let problem = ShiftProblem::new(s.to_vec(), alpha)?;
    let eval = MetricEvaluator::new(g)?;
    let n = s.len();
    if alpha == 0.0 {
        let report = metrics_from_internal(g, s, 1.0, MetricRoute::FromS)?;
        let f = eval.pdi(s);
        return Ok(ShiftSolution {
            d: OpinionVector::constant(n, 0.0),
            s_new: s.into(),
            report,
            objective: f,
            initial_objective: f,
            iterations: 0,
            stop: StopReason::Stationary,
            stationarity: 0.0,
        });
    }
    let objective = |d: &[f64]| {
        let t: Vec<f64> = s.iter().zip(d).map(|(a, b)| a - b).collect();
        let grad = eval.gradient(MetricMatrixKind::Pdi, &t);
        (eval.pdi(&t), grad.iter().map(|v| -v).collect())
    };
    let r = projected_gradient_minimize(objective, |v: &[f64]| problem.project(v), &vec![0.0; n], cfg)?;
    let s_new: Vec<f64> = s.iter().zip(&r.x).map(|(a, b)| (a - b).max(0.0)).collect();
    let report = metrics_from_internal(g, &s_new, 1.0, MetricRoute::FromS)?;
    Ok(ShiftSolution {
        d: r.x.into(),
        s_new: s_new.into(),
        report,
        objective: r.objective,
        initial_objective: r.trace[0],
        iterations: r.iterations,
        stop: r.stop,
        stationarity: r.stationarity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{power_law_graph, random_graph};

    fn k3() -> Graph {
        Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn zero_budget_changes_nothing() {
        let g = random_graph(6, 0.5, 0.5, 1.5, 1).unwrap();
        let s = crate::rng::uniform_opinions(6, 1);
        let r = minimize_pdi_shift(&g, &s, 0.0, &Default::default()).unwrap();
        assert!(r.d.iter().all(|v| *v == 0.0));
        assert_eq!(r.objective, r.initial_objective);
    }

    #[test]
    fn full_budget_reaches_zero() {
        let g = random_graph(8, 0.5, 0.5, 1.5, 2).unwrap();
        let s = crate::rng::uniform_opinions(8, 2);
        let total: f64 = s.iter().sum();
        let r = minimize_pdi_shift(&g, &s, total + 0.1, &Default::default()).unwrap();
        assert!(r.objective <= 1e-9, "{}", r.objective);
        assert!(r.report.pdi <= 1e-9);
    }

    #[test]
    fn k3_matches_grid_search() {
        let g = k3();
        let s = [0.2, 0.5, 0.9];
        let alpha = 0.4;
        let r = minimize_pdi_shift(&g, &s, alpha, &Default::default()).unwrap();
        assert!(r.d.iter().zip(&s).all(|(d, si)| *d >= -1e-7 && *d <= si + 1e-7));
        assert!(r.d.iter().sum::<f64>() <= alpha + 1e-7);
        let eval = MetricEvaluator::new(&g).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..=20 {
            for b in 0..=50 {
                for c in 0..=90 {
                    let d = [a as f64 / 100.0, b as f64 / 100.0, c as f64 / 100.0];
                    if d.iter().sum::<f64>() > alpha + 1e-12 {
                        continue;
                    }
                    let t: Vec<f64> = s.iter().zip(&d).map(|(x, y)| x - y).collect();
                    best = best.min(eval.pdi(&t));
                }
            }
        }
        assert!(r.objective <= best + 1e-4, "{} vs grid {best}", r.objective);
        assert!(r.stationarity <= 1e-6);
    }

    #[test]
    fn large_opinions_are_reduced_most() {
        let g = power_law_graph(80, 2, 5).unwrap();
        let s = crate::rng::power_law_opinions(80, 2.0, 5);
        let r = minimize_pdi_shift(&g, &s, 3.0, &Default::default()).unwrap();
        let ms = s.iter().sum::<f64>() / 80.0;
        let md = r.d.iter().sum::<f64>() / 80.0;
        let cov: f64 = s.iter().zip(r.d.iter()).map(|(a, b)| (a - ms) * (b - md)).sum();
        assert!(cov > 0.0);
    }
}
