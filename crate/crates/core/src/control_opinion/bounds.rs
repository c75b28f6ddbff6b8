use serde::Serialize;

use super::attack::AttackPlan;
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::metrics::{MetricEvaluator, MetricMatrixKind};

/// How far a plan's polarization and disagreement sit below the linear
/// bounds `P(s_hat) + 3k` and `D(s_hat) + 8 d_max k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub d_max: f64,
    pub polarization: f64,
    pub polarization_bound: f64,
    pub polarization_slack: f64,
    pub disagreement: f64,
    pub disagreement_bound: f64,
    pub disagreement_slack: f64,
}

/// Checks both bounds for the opinions produced by `plan`. Any plan with
/// opinions in `[0, 1]` satisfies them, so a violation means a bug.
pub fn check_bounds(plan: &AttackPlan, g: &Graph, s_hat: &[f64]) -> Result<BoundReport> {
    check_len(g.n(), s_hat.len())?;
    let s = plan.apply(s_hat)?;
    let eval = MetricEvaluator::new(g)?;
    let k = plan.omega.len();
    let d_max = g.max_degree();
    let p0 = eval.value(MetricMatrixKind::Polarization, s_hat);
    let d0 = eval.value(MetricMatrixKind::Disagreement, s_hat);
    let p = eval.value(MetricMatrixKind::Polarization, &s);
    let d = eval.value(MetricMatrixKind::Disagreement, &s);
    let pb = p0 + 3.0 * k as f64;
    let db = d0 + 8.0 * d_max * k as f64;
    let roundoff = |b: f64| 1e-12 * b.abs().max(1.0);
    if p > pb + roundoff(pb) {
        return Err(Error::BoundViolated { metric: "polarization", value: p, bound: pb });
    }
    if d > db + roundoff(db) {
        return Err(Error::BoundViolated { metric: "disagreement", value: d, bound: db });
    }
    Ok(BoundReport {
        k,
        d_max,
        polarization: p,
        polarization_bound: pb,
        polarization_slack: pb - p,
        disagreement: d,
        disagreement_bound: db,
        disagreement_slack: db - d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control_opinion::{AttackAlgorithm, AttackObjective};
    use crate::graph::random_graph;

    #[test]
    fn zero_budget_has_zero_additive_slack() {
        let g = random_graph(6, 0.5, 0.5, 1.5, 1).unwrap();
        let s = crate::rng::uniform_opinions(6, 1);
        let plan = AttackAlgorithm::Greedy.run(&g, &s, 0, AttackObjective::Polarization).unwrap();
        let r = check_bounds(&plan, &g, &s).unwrap();
        assert_eq!(r.polarization_slack, 0.0);
        assert_eq!(r.disagreement_slack, 0.0);
    }

    #[test]
    fn empty_graph_has_no_disagreement() {
        let g = Graph::empty(5);
        let s = crate::rng::uniform_opinions(5, 2);
        let plan = AttackAlgorithm::Greedy.run(&g, &s, 3, AttackObjective::Disagreement).unwrap();
        let r = check_bounds(&plan, &g, &s).unwrap();
        assert_eq!(r.d_max, 0.0);
        assert_eq!(r.disagreement, 0.0);
        assert_eq!(r.disagreement_bound, 0.0);
    }

    #[test]
    fn bounds_hold_for_every_algorithm() {
        for seed in 0..6 {
            let n = 10 + 8 * seed as usize;
            let g = random_graph(n, 0.2, 0.2, 2.0, seed).unwrap();
            let s = crate::rng::uniform_opinions(n, seed);
            for k in [1, 3, 5] {
                for kind in AttackObjective::ALL {
                    for alg in AttackAlgorithm::ALL.into_iter().skip(1) {
                        let plan = alg.run(&g, &s, k, kind).unwrap();
                        let r = check_bounds(&plan, &g, &s).unwrap();
                        assert!(r.polarization_slack >= 0.0 && r.disagreement_slack >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn tampered_plan_is_caught() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let s = [0.5, 0.5];
        let mut plan = AttackAlgorithm::Greedy.run(&g, &s, 1, AttackObjective::Polarization).unwrap();
        plan.values[0] = 0.5;
        assert!(check_bounds(&plan, &g, &s).is_err());
    }
}
