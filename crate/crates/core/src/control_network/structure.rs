//! Choosing edge weights to make the network itself less conflict-prone.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::graph::{pair_count, pairs, Graph};
use crate::metrics::{mean_center, MetricMatrixKind};
use crate::numkit::{
    dense_solve_spd, project_budget_simplex, projected_gradient_minimize, spd_inverse,
    stationarity, BudgetMode, PgResult, ProjectedGradientConfig, StopReason,
};

/// Pair weights below `DENSITY_CUTOFF * total` count as absent when
/// reporting how dense a solution is.
pub const DENSITY_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureBudget {
    /// Laplacian trace, i.e. twice the total edge weight.
    pub m: f64,
    /// Entrywise one-norm of the change to the adjacency matrix.
    pub k: f64,
}

impl StructureBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::InvalidParameter(format!("m must be > 0, got {}", self.m)));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidParameter(format!("k must be >= 0, got {}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureSolution {
    #[serde(skip)]
    pub graph: Graph,
    pub objective: f64,
    pub initial_objective: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    /// `||w - P(w - grad)||_inf` at the solution.
    pub stationarity: f64,
    /// Fraction of node pairs carrying weight.
    pub edge_density: f64,
}

fn solution(n: usize, r: PgResult, drop_below: f64) -> Result<StructureSolution> {
    let kept = r.x.iter().filter(|w| **w > drop_below).count();
    let total = pair_count(n).max(1);
    Ok(StructureSolution {
        graph: Graph::from_pair_weights(n, &r.x, drop_below)?,
        objective: r.objective,
        initial_objective: r.trace[0],
        edge_density: kept as f64 / total as f64,
        trace: r.trace,
        iterations: r.iterations,
        stop: r.stop,
        stationarity: r.stationarity,
    })
}

fn shifted_laplacian_from_pairs(n: usize, w: &[f64]) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::identity(n, n);
    for ((i, j), wp) in pairs(n).zip(w) {
        a[(i, i)] += wp;
        a[(j, j)] += wp;
        a[(i, j)] -= wp;
        a[(j, i)] -= wp;
    }
    a
}

/// Minimises `s_bar^T (L + I)^-1 s_bar` over all graphs whose Laplacian has
/// trace `m`, starting from the uniform complete graph.
pub fn minimize_pdi_over_laplacian(
    s: &[f64],
    m: f64,
    cfg: &ProjectedGradientConfig,
) -> Result<StructureSolution> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("m must be > 0, got {m}")));
    }
    let n = s.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two nodes".into()));
    }
    let (sbar, _) = mean_center(s)?;
    let total = m / 2.0;
    let np = pair_count(n);
    let x0 = vec![total / np as f64; np];

    let objective = |w: &[f64]| -> (f64, Vec<f64>) {
        let a = shifted_laplacian_from_pairs(n, w);
        match dense_solve_spd(&a, &sbar) {
            Ok(y) => {
                let f = crate::numkit::dot(&sbar, &y);
                let g = pairs(n).map(|(i, j)| -(y[i] - y[j]).powi(2)).collect();
                (f, g)
            }
            Err(_) => (f64::NAN, vec![0.0; w.len()]),
        }
    };
    let project = |v: &[f64]| project_budget_simplex(v, total, BudgetMode::Equality);
    let r = projected_gradient_minimize(objective, project, &x0, cfg)?;
    solution(n, r, DENSITY_CUTOFF * total)
}

/// Gradient of `Tr(M_*)` with respect to each pair weight.
fn acr_value_and_gradient(n: usize, w: &[f64], kind: MetricMatrixKind) -> Result<(f64, Vec<f64>)> {
    let m = spd_inverse(&shifted_laplacian_from_pairs(n, w))?;
    let m2 = &m * &m;
    // dM/dw_ij = -M b b^T M with b = e_i - e_j, so
    // d Tr(M) = -b^T M^2 b and d Tr(M^2) = -2 b^T M^3 b.
    let form = |a: &DMatrix<f64>, i: usize, j: usize| a[(i, i)] + a[(j, j)] - 2.0 * a[(i, j)];
    let pdi_grad = || -> Vec<f64> { pairs(n).map(|(i, j)| -form(&m2, i, j)).collect() };
    let pol_grad = || -> Vec<f64> {
        let m3 = &m2 * &m;
        pairs(n).map(|(i, j)| -2.0 * form(&m3, i, j)).collect()
    };
    Ok(match kind {
        MetricMatrixKind::Pdi => (m.trace(), pdi_grad()),
        MetricMatrixKind::Polarization => (m2.trace(), pol_grad()),
        MetricMatrixKind::Disagreement => {
            // M L M = M - M^2.
            let g: Vec<f64> = pdi_grad().iter().zip(pol_grad()).map(|(a, b)| a - b).collect();
            (m.trace() - m2.trace(), g)
        }
    })
}

/// Exact projection onto `{lo <= x <= hi, ||x - c||_1 <= r}` for a box that
/// contains `c`: soft-threshold around `c`, then clamp, with the threshold
/// found by bisection.
pub(crate) fn project_box_l1(x: &[f64], c: &[f64], lo: &[f64], hi: &[f64], r: f64) -> Vec<f64> {
    let at = |t: f64| -> Vec<f64> {
        x.iter()
            .zip(c)
            .zip(lo.iter().zip(hi))
            .map(|((xi, ci), (l, h))| {
                let u = xi - ci;
                let shrunk = u.signum() * (u.abs() - t).max(0.0);
                (ci + shrunk).clamp(*l, *h)
            })
            .collect()
    };
    let dist = |v: &[f64]| v.iter().zip(c).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let clamped = at(0.0);
    if dist(&clamped) <= r {
        return clamped;
    }
    let mut t_lo = 0.0;
    let mut t_hi = x.iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (t_lo + t_hi);
        if mid <= t_lo || mid >= t_hi {
            break;
        }
        if dist(&at(mid)) > r {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    at(t_hi)
}

/// Minimises the average-case conflict risk `Tr(M_*)` over adjacency
/// matrices with entries in `[0, 1]` within entrywise one-norm `k` of
/// `w_hat`. Only the polarization–disagreement index is convex here; for
/// the other kinds the result is a stationary point.
pub fn minimize_acr(
    w_hat: &Graph,
    kind: MetricMatrixKind,
    k: f64,
    cfg: &ProjectedGradientConfig,
) -> Result<StructureSolution> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("k must be >= 0, got {k}")));
    }
    if let Some(e) = w_hat.edges().iter().find(|e| e.w > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "weights must lie in [0, 1], edge ({}, {}) has {}",
            e.i, e.j, e.w
        )));
    }
    let n = w_hat.n();
    let x0 = w_hat.pair_weights();
    let np = x0.len();
    if k == 0.0 || np == 0 {
        let f = crate::metrics::acr(w_hat, kind)?;
        return Ok(StructureSolution {
            graph: w_hat.clone(),
            objective: f,
            initial_objective: f,
            trace: vec![f],
            iterations: 0,
            stop: StopReason::Stationary,
            stationarity: 0.0,
            edge_density: w_hat.edge_count() as f64 / np.max(1) as f64,
        });
    }
    let lo = vec![0.0; np];
    let hi = vec![1.0; np];
    // The symmetric matrix holds every pair twice.
    let radius = k / 2.0;
    let project = |v: &[f64]| Ok(project_box_l1(v, &x0, &lo, &hi, radius));
    let objective = |w: &[f64]| match acr_value_and_gradient(n, w, kind) {
        Ok(r) => r,
        Err(_) => (f64::NAN, vec![0.0; w.len()]),
    };
    let r = projected_gradient_minimize(objective, project, &x0, cfg)?;
    solution(n, r, 0.0)
}

/// KKT residual of a structure solution: displacement of one unit
/// projected-gradient step on the Laplacian-trace problem.
pub fn pdi_laplacian_stationarity(s: &[f64], m: f64, g: &Graph) -> Result<f64> {
    check_len(g.n(), s.len())?;
    let (sbar, _) = mean_center(s)?;
    let w = g.pair_weights();
    let y = dense_solve_spd(&shifted_laplacian_from_pairs(g.n(), &w), &sbar)?;
    let grad: Vec<f64> = pairs(g.n()).map(|(i, j)| -(y[i] - y[j]).powi(2)).collect();
    stationarity(&w, &grad, |v: &[f64]| {
        project_budget_simplex(v, m / 2.0, BudgetMode::Equality)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::acr;
    use crate::numkit::{dykstra_intersection, max_abs_diff, project_box, project_l1_ball, DykstraConfig};

    fn pdi_of(n: usize, w: &[f64], s: &[f64]) -> f64 {
        let (sbar, _) = mean_center(s).unwrap();
        let g = Graph::from_pair_weights(n, w, 0.0).unwrap();
        crate::metrics::MetricEvaluator::new(&g).unwrap().pdi(&sbar)
    }

    #[test]
    fn constant_opinions_give_zero_objective() {
        let r = minimize_pdi_over_laplacian(&[0.3; 4], 6.0, &Default::default()).unwrap();
        assert!(r.objective.abs() < 1e-15);
        assert!((r.graph.total_weight() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_node_laplacian_beats_grid() {
        let s = [0.0, 0.5, 1.0];
        let m = 4.0;
        let r = minimize_pdi_over_laplacian(&s, m, &Default::default()).unwrap();
        assert!((r.graph.total_weight() - 2.0).abs() < 1e-9);
        assert!(r.graph.edges().iter().all(|e| e.w >= 0.0));
        let steps = 400;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps - a {
                let w = [
                    2.0 * a as f64 / steps as f64,
                    2.0 * b as f64 / steps as f64,
                    2.0 * (steps - a - b) as f64 / steps as f64,
                ];
                best = best.min(pdi_of(3, &w, &s));
            }
        }
        assert!(r.objective <= best + 1e-9, "{} vs grid {best}", r.objective);
        let uniform = pdi_of(3, &[2.0 / 3.0; 3], &s);
        assert!(r.objective <= uniform);
        assert!(pdi_laplacian_stationarity(&s, m, &r.graph).unwrap() <= 1e-6);
    }

    #[test]
    fn laplacian_solution_is_stationary_on_random_instances() {
        for seed in 0..4 {
            let s = crate::rng::uniform_opinions(7, seed);
            let r = minimize_pdi_over_laplacian(&s, 10.0, &Default::default()).unwrap();
            assert!(r.stationarity <= 1e-6, "{:?}", r.stop);
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            assert!(r.edge_density > 0.0 && r.edge_density <= 1.0);
        }
    }

    #[test]
    fn acr_gradient_matches_finite_differences() {
        let g = crate::graph::random_graph(5, 0.6, 0.1, 0.9, 8).unwrap();
        let w = g.pair_weights();
        for kind in MetricMatrixKind::ALL {
            let (_, grad) = acr_value_and_gradient(5, &w, kind).unwrap();
            for p in 0..w.len() {
                let h = 1e-5;
                let mut up = w.clone();
                up[p] += h;
                let mut dn = w.clone();
                dn[p] -= h;
                let fd = (acr_value_and_gradient(5, &up, kind).unwrap().0
                    - acr_value_and_gradient(5, &dn, kind).unwrap().0)
                    / (2.0 * h);
                assert!((fd - grad[p]).abs() <= 1e-6 * (1.0 + fd.abs()), "{kind:?} {p}");
            }
        }
    }

    #[test]
    fn box_l1_projection_matches_dykstra() {
        let c = [0.2, 0.0, 1.0, 0.5, 0.7];
        let lo = [0.0; 5];
        let hi = [1.0; 5];
        for (x, r) in [
            ([0.9, 0.8, -0.3, 1.4, 0.1], 0.6),
            ([0.2, 0.0, 1.0, 0.5, 0.7], 0.1),
            ([3.0, -2.0, 0.5, 0.5, 0.6], 1.5),
        ] {
            let fast = project_box_l1(&x, &c, &lo, &hi, r);
            let a = |v: &[f64]| project_box(v, &lo, &hi).unwrap();
            let b = |v: &[f64]| project_l1_ball(v, &c, r).unwrap();
            let slow = dykstra_intersection(&x, &[&a, &b], DykstraConfig::default()).unwrap();
            assert!(max_abs_diff(&fast, &slow) < 1e-7, "{fast:?} vs {slow:?}");
        }
    }

    #[test]
    fn zero_budget_keeps_graph() {
        let g = crate::graph::random_graph(5, 0.5, 0.1, 0.9, 2).unwrap();
        let r = minimize_acr(&g, MetricMatrixKind::Pdi, 0.0, &Default::default()).unwrap();
        assert_eq!(r.graph, g);
        assert_eq!(r.objective, acr(&g, MetricMatrixKind::Pdi).unwrap());
    }

    #[test]
    fn rejects_weights_above_one() {
        let g = Graph::new(2, [(0, 1, 1.5)]).unwrap();
        assert!(minimize_acr(&g, MetricMatrixKind::Pdi, 1.0, &Default::default()).is_err());
    }

    #[test]
    fn large_budget_fills_in_complete_graph() {
        let mut edges: Vec<(usize, usize, f64)> = pairs(4).map(|(i, j)| (i, j, 0.8)).collect();
        edges.pop();
        let g = Graph::new(4, edges).unwrap();
        let r = minimize_acr(&g, MetricMatrixKind::Pdi, 12.0, &Default::default()).unwrap();
        assert!(r.graph.pair_weights().iter().all(|w| (w - 1.0).abs() < 1e-6));
    }

    #[test]
    fn three_node_acr_beats_grid() {
        let g = Graph::new(3, [(0, 1, 0.3), (1, 2, 0.6)]).unwrap();
        let k = 0.8;
        let r = minimize_acr(&g, MetricMatrixKind::Pdi, k, &Default::default()).unwrap();
        let w_hat = g.pair_weights();
        let feasible_gap = r
            .graph
            .pair_weights()
            .iter()
            .zip(&w_hat)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * 2.0
            - k;
        assert!(feasible_gap <= 1e-7);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let mut best = f64::INFINITY;
        for a in 0..=20 {
            for b in 0..=20 {
                for c in 0..=20 {
                    let w = [a as f64 * 0.05, b as f64 * 0.05, c as f64 * 0.05];
                    let l1: f64 = w.iter().zip(&w_hat).map(|(x, y)| (x - y).abs()).sum();
                    if 2.0 * l1 > k + 1e-12 {
                        continue;
                    }
                    let gg = Graph::from_pair_weights(3, &w, 0.0).unwrap();
                    best = best.min(acr(&gg, MetricMatrixKind::Pdi).unwrap());
                }
            }
        }
        assert!(r.objective <= best + 1e-3, "{} vs grid {best}", r.objective);
    }

    #[test]
    fn nonconvex_kinds_stay_feasible_and_improve() {
        let g = crate::graph::random_graph(6, 0.5, 0.1, 0.9, 5).unwrap();
        for kind in [MetricMatrixKind::Polarization, MetricMatrixKind::Disagreement] {
            let r = minimize_acr(&g, kind, 2.0, &Default::default()).unwrap();
            let l1: f64 = r
                .graph
                .pair_weights()
                .iter()
                .zip(g.pair_weights())
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!(2.0 * l1 <= 2.0 + 1e-7);
            assert!(r.objective <= acr(&g, kind).unwrap() + 1e-12);
        }
    }
}
