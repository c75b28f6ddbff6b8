//! Opinion dynamics with a network administrator.
//!
//! Each round the opinions settle to equilibrium, then the administrator
//! re-weights edges to minimise disagreement at those fixed opinions,
//! subject to keeping every node's total weight and staying within a
//! relative Frobenius distance `epsilon` of the original weights.
//!
//! With `z` fixed the disagreement is linear in the pair weights, so the
//! adjustment is a linear program over {W >= 0, row sums fixed} intersected
//! with a ball around the original weights. We solve it along the
//! projection path `w(t) = P_A(w_hat - t c)`: `||w(t) - w_hat||` is
//! non-decreasing in `t` and every `w(t)` is optimal for the ball of its own
//! radius, so a bisection on `t` hits the requested radius.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::{equilibrium, OpinionVector};
use crate::error::{check_len, Error, Result};
use crate::graph::{pair_count, pairs, Graph};
use crate::metrics::{disagreement, mean_center, polarization};
use crate::numkit::{norm2, max_abs_diff};

/// Outer loop stops once the weights move less than this (Frobenius).
pub const ADMIN_CONVERGENCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdminConfig {
    /// Relative Frobenius budget: `||W - W_hat||_F <= epsilon ||W_hat||_F`.
    pub epsilon: f64,
    pub rounds: usize,
    /// Row-sum accuracy of each projection, relative to the largest degree.
    pub projection_tol: f64,
    pub max_bisections: usize,
}

impl Default for AdminConfig {
    fn default() -> Self {
        AdminConfig {
            epsilon: 0.1,
            rounds: 10,
            projection_tol: 1e-10,
            max_bisections: 100,
        }
    }
}

impl AdminConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be >= 1".into()));
        }
        if !(self.projection_tol > 0.0) {
            return Err(Error::InvalidParameter("projection_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdminRound {
    pub round: usize,
    pub epsilon: f64,
    /// Equilibrium on the weights entering this round.
    pub z: OpinionVector,
    pub polarization: f64,
    pub disagreement: f64,
    /// Disagreement of the same `z` on the adjusted weights.
    pub adjusted_disagreement: f64,
    /// `||W_new - W_prev||_F`.
    pub weight_change: f64,
    #[serde(serialize_with = "serialize_edges")]
    pub graph: Graph,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdminTrace {
    pub epsilon: f64,
    pub rounds: Vec<AdminRound>,
    pub converged: bool,
    #[serde(serialize_with = "serialize_edges")]
    pub final_graph: Graph,
    /// Equilibrium on the final weights.
    pub final_z: OpinionVector,
    pub final_polarization: f64,
    pub final_disagreement: f64,
}

fn serialize_edges<S: serde::Serializer>(g: &Graph, ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = ser.serialize_struct("graph", 2)?;
    st.serialize_field("n", &g.n())?;
    let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.i, e.j, e.w)).collect();
    st.serialize_field("edges", &edges)?;
    st.end()
}

/// Euclidean projection onto `{w >= 0, sum_j W_ij = d_i}` over a set of
/// pairs, by semismooth Newton on the dual.
///
/// The primal solution is `w_p = max(0, y_p - lambda_i - lambda_j)` for the
/// multipliers `lambda` of the row-sum constraints.
pub(crate) struct RowSumProjector {
    n: usize,
    pairs: Vec<(usize, usize)>,
    targets: Vec<f64>,
    tol: f64,
}

impl RowSumProjector {
    pub(crate) fn new(n: usize, pairs: Vec<(usize, usize)>, targets: Vec<f64>, rel_tol: f64) -> Self {
        let scale = targets.iter().cloned().fold(0.0, f64::max).max(1.0);
        RowSumProjector {
            n,
            pairs,
            targets,
            tol: rel_tol * scale,
        }
    }

    fn primal(&self, y: &[f64], lambda: &[f64]) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(y)
            .map(|(&(i, j), yp)| (yp - lambda[i] - lambda[j]).max(0.0))
            .collect()
    }

    fn dual_value(&self, w: &[f64], lambda: &[f64]) -> f64 {
        0.5 * w.iter().map(|v| v * v).sum::<f64>() + crate::numkit::dot(lambda, &self.targets)
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = self.targets.iter().map(|d| -d).collect();
        for (&(i, j), wp) in self.pairs.iter().zip(w) {
            r[i] += wp;
            r[j] += wp;
        }
        r
    }

    /// Exactly minimises the dual over `lambda_i` for every row that has no
    /// positive pair, one row at a time. Newton steps crawl on such rows
    /// because the dual is linear there. Returns whether anything moved.
    fn activate_empty_rows(&self, y: &[f64], lambda: &mut [f64], w: &[f64]) -> bool {
        let mut empty = vec![true; self.n];
        for (&(i, j), wp) in self.pairs.iter().zip(w) {
            if *wp > 0.0 {
                empty[i] = false;
                empty[j] = false;
            }
        }
        let mut moved = false;
        for i in 0..self.n {
            if !empty[i] || self.targets[i] <= 0.0 {
                continue;
            }
            // Offsets a_p with w_p = max(0, a_p - lambda_i); solve
            // sum_p max(0, a_p - lambda_i) = d_i by water-filling.
            let mut a: Vec<f64> = self
                .pairs
                .iter()
                .zip(y)
                .filter_map(|(&(p, q), yp)| {
                    if p == i {
                        Some(yp - lambda[q])
                    } else if q == i {
                        Some(yp - lambda[p])
                    } else {
                        None
                    }
                })
                .collect();
            if a.is_empty() {
                continue;
            }
            a.sort_by(|x, y| y.total_cmp(x));
            let mut prefix = 0.0;
            let mut level = a[0] - self.targets[i];
            for (k, ak) in a.iter().enumerate() {
                prefix += ak;
                let candidate = (prefix - self.targets[i]) / (k + 1) as f64;
                if k + 1 == a.len() || a[k + 1] <= candidate {
                    level = candidate;
                    break;
                }
            }
            lambda[i] = level;
            moved = true;
        }
        moved
    }

    /// Projects `y`, warm-starting from and updating `lambda`.
    pub(crate) fn project(&self, y: &[f64], lambda: &mut [f64]) -> Result<Vec<f64>> {
        let mut w = self.primal(y, lambda);
        for _ in 0..500 {
            let r = self.residual(&w);
            if r.iter().all(|v| v.abs() <= self.tol) {
                return Ok(w);
            }
            if self.activate_empty_rows(y, lambda, &w) {
                w = self.primal(y, lambda);
                continue;
            }
            let mut h = DMatrix::<f64>::zeros(self.n, self.n);
            for (&(i, j), wp) in self.pairs.iter().zip(&w) {
                if *wp > 0.0 {
                    h[(i, i)] += 1.0;
                    h[(j, j)] += 1.0;
                    h[(i, j)] += 1.0;
                    h[(j, i)] += 1.0;
                }
            }
            // The active-set Hessian is singular on bipartite pieces, so it
            // gets a residual-sized ridge; rows with no active pair get a
            // unit curvature.
            let rnorm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let ridge = rnorm.clamp(1e-10, 1e-1);
            for i in 0..self.n {
                h[(i, i)] += if h[(i, i)] == 0.0 { 1.0 } else { ridge };
            }
            let chol = h
                .cholesky()
                .ok_or_else(|| Error::SolverFailure("singular row-sum Newton system".into()))?;
            let step = chol.solve(&nalgebra::DVector::from_column_slice(&r));
            // phi(lambda) = 1/2 ||w(lambda)||^2 + lambda^T d; its gradient is -r.
            let phi = self.dual_value(&w, lambda);
            let slope = -crate::numkit::dot(&r, step.as_slice());
            // The slack absorbs roundoff in phi once the residual is tiny.
            let slack = 1e-14 * (1.0 + phi.abs());
            let try_step = |alpha: f64| -> (Vec<f64>, Vec<f64>, bool) {
                let trial: Vec<f64> = (0..self.n).map(|k| lambda[k] + alpha * step[k]).collect();
                let wt = self.primal(y, &trial);
                let ok = self.dual_value(&wt, &trial) <= phi + 1e-4 * alpha * slope + slack;
                (trial, wt, ok)
            };
            let (mut trial, mut wt, ok) = try_step(1.0);
            if ok {
                // Along a flat direction of the active-set Hessian the dual
                // is linear, so keep doubling while it keeps paying off.
                let mut alpha = 1.0;
                let mut best = self.dual_value(&wt, &trial);
                for _ in 0..60 {
                    alpha *= 2.0;
                    let (t2, w2, ok2) = try_step(alpha);
                    let v2 = self.dual_value(&w2, &t2);
                    if !ok2 || v2 >= best {
                        break;
                    }
                    best = v2;
                    trial = t2;
                    wt = w2;
                }
            } else {
                let mut alpha = 1.0;
                loop {
                    alpha *= 0.5;
                    let (t2, w2, ok2) = try_step(alpha);
                    trial = t2;
                    wt = w2;
                    if ok2 || alpha < 1e-12 {
                        break;
                    }
                }
            }
            lambda.copy_from_slice(&trial);
            w = wt;
        }
        let r = self.residual(&w);
        if r.iter().all(|v| v.abs() <= self.tol * 1e3) {
            return Ok(w);
        }
        Err(Error::SolverFailure(
            "row-sum projection did not converge".into(),
        ))
    }
}

/// Re-weights `g_hat` to minimise the disagreement of the fixed opinions
/// `z`, keeping row sums and `||W - W_hat||_F <= epsilon ||W_hat||_F`.
/// Any pair may receive weight, including pairs absent from `g_hat`.
pub fn admin_adjust(g_hat: &Graph, z: &[f64], cfg: &AdminConfig) -> Result<Graph> {
    cfg.validate()?;
    check_len(g_hat.n(), z.len())?;
    let n = g_hat.n();
    // With n <= 2 the row sums pin every weight.
    if n < 3 || cfg.epsilon == 0.0 || g_hat.edge_count() == 0 {
        return Ok(g_hat.clone());
    }
    let degrees = g_hat.degrees();
    let (zbar, _) = mean_center(z)?;
    let all_hat = g_hat.pair_weights();

    // Nodes with zero degree must stay isolated, so their pairs are fixed at 0.
    let free: Vec<(usize, (usize, usize))> = pairs(n)
        .enumerate()
        .filter(|(_, (i, j))| degrees[*i] > 0.0 && degrees[*j] > 0.0)
        .collect();
    let w_hat: Vec<f64> = free.iter().map(|(p, _)| all_hat[*p]).collect();
    let cost: Vec<f64> = free
        .iter()
        .map(|(_, (i, j))| (zbar[*i] - zbar[*j]).powi(2))
        .collect();
    let cost_norm = norm2(&cost);
    if cost_norm == 0.0 {
        return Ok(g_hat.clone());
    }
    // ||W||_F counts each pair twice.
    let radius = cfg.epsilon * norm2(&all_hat);
    let projector = RowSumProjector::new(
        n,
        free.iter().map(|(_, ij)| *ij).collect(),
        degrees,
        cfg.projection_tol,
    );

    let mut lambda = vec![0.0; n];
    let along = |t: f64, lambda: &mut Vec<f64>| -> Result<(Vec<f64>, f64)> {
        let y: Vec<f64> = w_hat.iter().zip(&cost).map(|(w, c)| w - t * c).collect();
        let w = projector.project(&y, lambda)?;
        let dist = w
            .iter()
            .zip(&w_hat)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((w, dist))
    };

    // Projection is nonexpansive and w_hat is feasible, so dist(t) <= t ||c||.
    let mut t_lo = radius / cost_norm;
    let (mut best, d_lo) = along(t_lo, &mut lambda)?;
    if d_lo < radius {
        let mut t_hi = 2.0 * t_lo;
        let mut hi_found = false;
        let mut lambda_hi = lambda.clone();
        let scale = 1.0 + w_hat.iter().cloned().fold(0.0, f64::max);
        for _ in 0..40 {
            let (w, d) = along(t_hi, &mut lambda_hi)?;
            if d > radius {
                hi_found = true;
                break;
            }
            // Far enough out the path reaches the optimal face of the
            // linear program and stops moving; the ball is then slack.
            let settled = max_abs_diff(&w, &best) <= 1e3 * cfg.projection_tol * scale;
            t_lo = t_hi;
            best = w;
            lambda.copy_from_slice(&lambda_hi);
            if settled {
                break;
            }
            t_hi *= 2.0;
        }
        if hi_found {
            for _ in 0..cfg.max_bisections {
                if t_hi - t_lo <= 1e-14 * t_hi {
                    break;
                }
                let mid = 0.5 * (t_lo + t_hi);
                let mut lam = lambda.clone();
                let (w, d) = along(mid, &mut lam)?;
                if d <= radius {
                    t_lo = mid;
                    best = w;
                    lambda = lam;
                } else {
                    t_hi = mid;
                }
            }
        }
    }

    let mut full = vec![0.0; pair_count(n)];
    for ((p, _), w) in free.iter().zip(&best) {
        full[*p] = *w;
    }
    let adjusted = Graph::from_pair_weights(n, &full, 0.0)?;
    if disagreement(&adjusted, z)? > disagreement(g_hat, z)? + 1e-9 {
        return Err(Error::SolverFailure(
            "administrator step increased disagreement".into(),
        ));
    }
    Ok(adjusted)
}

fn frobenius_distance(a: &Graph, b: &Graph) -> f64 {
    let wa = a.pair_weights();
    let wb = b.pair_weights();
    std::f64::consts::SQRT_2 * wa.iter().zip(&wb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Alternates equilibrium and administrator adjustment for up to
/// `cfg.rounds` rounds, stopping early once the weights settle.
pub fn admin_loop(g0: &Graph, s: &[f64], cfg: &AdminConfig) -> Result<AdminTrace> {
    cfg.validate()?;
    check_len(g0.n(), s.len())?;
    let mut current = g0.clone();
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut converged = false;
    for round in 1..=cfg.rounds {
        let z = equilibrium(&current, s)?;
        let p = polarization(&z)?;
        let d = disagreement(&current, &z)?;
        let next = admin_adjust(g0, &z, cfg)?;
        let change = frobenius_distance(&next, &current);
        rounds.push(AdminRound {
            round,
            epsilon: cfg.epsilon,
            polarization: p,
            disagreement: d,
            adjusted_disagreement: disagreement(&next, &z)?,
            weight_change: change,
            graph: next.clone(),
            z,
        });
        current = next;
        if change < ADMIN_CONVERGENCE {
            converged = true;
            break;
        }
    }
    let final_z = equilibrium(&current, s)?;
    Ok(AdminTrace {
        epsilon: cfg.epsilon,
        converged,
        final_polarization: polarization(&final_z)?,
        final_disagreement: disagreement(&current, &final_z)?,
        final_z,
        final_graph: current,
        rounds,
    })
}

/// Checks the four administrator constraints for `w` against `w_hat`.
pub fn admin_feasibility_gap(w_hat: &Graph, w: &Graph, epsilon: f64) -> Result<f64> {
    check_len(w_hat.n(), w.n())?;
    let radius = epsilon * std::f64::consts::SQRT_2 * norm2(&w_hat.pair_weights());
    let ball = (frobenius_distance(w, w_hat) - radius).max(0.0);
    let rows = max_abs_diff(&w.degrees(), &w_hat.degrees());
    let negative = w.edges().iter().map(|e| (-e.w).max(0.0)).fold(0.0, f64::max);
    Ok(ball.max(rows).max(negative))
}
