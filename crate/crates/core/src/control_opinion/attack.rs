//! Adversarial targeting: pick `k` nodes and pin their internal opinions to
//! 0 or 1 so that equilibrium polarization or disagreement is as large as
//! possible.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::metrics::{MetricEvaluator, MetricMatrixKind};

/// Largest `C(n, k) * 2^k` brute force will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackObjective {
    Polarization,
    Disagreement,
}

impl AttackObjective {
    pub const ALL: [AttackObjective; 2] = [AttackObjective::Polarization, AttackObjective::Disagreement];

    pub fn matrix_kind(self) -> MetricMatrixKind {
        match self {
            AttackObjective::Polarization => MetricMatrixKind::Polarization,
            AttackObjective::Disagreement => MetricMatrixKind::Disagreement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicRule {
    /// Internal opinion closest to the mean.
    MeanOpinion,
    /// Most neighbours.
    MaxConnection,
    /// Largest weighted degree.
    MaxDegree,
}

impl HeuristicRule {
    pub const ALL: [HeuristicRule; 3] = [
        HeuristicRule::MeanOpinion,
        HeuristicRule::MaxConnection,
        HeuristicRule::MaxDegree,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackAlgorithm {
    BruteForce,
    Greedy,
    MeanOpinion,
    MaxConnection,
    MaxDegree,
}

impl AttackAlgorithm {
    pub const ALL: [AttackAlgorithm; 5] = [
        AttackAlgorithm::BruteForce,
        AttackAlgorithm::Greedy,
        AttackAlgorithm::MeanOpinion,
        AttackAlgorithm::MaxConnection,
        AttackAlgorithm::MaxDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackAlgorithm::BruteForce => "brute_force",
            AttackAlgorithm::Greedy => "greedy",
            AttackAlgorithm::MeanOpinion => "mean_opinion",
            AttackAlgorithm::MaxConnection => "max_connection",
            AttackAlgorithm::MaxDegree => "max_degree",
        }
    }

    pub fn heuristic(self) -> Option<HeuristicRule> {
        match self {
            AttackAlgorithm::MeanOpinion => Some(HeuristicRule::MeanOpinion),
            AttackAlgorithm::MaxConnection => Some(HeuristicRule::MaxConnection),
            AttackAlgorithm::MaxDegree => Some(HeuristicRule::MaxDegree),
            _ => None,
        }
    }

    /// Runs this algorithm with budget `k`.
    pub fn run(self, g: &Graph, s_hat: &[f64], k: usize, kind: AttackObjective) -> Result<AttackPlan> {
        match self {
            AttackAlgorithm::BruteForce => brute_force_attack(g, s_hat, k, kind),
            AttackAlgorithm::Greedy => greedy_attack(g, s_hat, k, kind),
            other => heuristic_attack(g, s_hat, k, kind, other.heuristic().expect("heuristic")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackPlan {
    /// Targets in the order they were chosen.
    pub omega: Vec<usize>,
    /// Opinion assigned to each target, 0 or 1.
    pub values: Vec<f64>,
    /// Objective after each selection step. Brute force records only the
    /// optimum.
    pub objective_trace: Vec<f64>,
    pub kind: AttackObjective,
    /// Objective before any change.
    pub baseline: f64,
    pub objective: f64,
    /// Targets whose assigned value differs from their original opinion.
    pub hamming: usize,
    /// Number of objective evaluations spent.
    pub evaluations: u64,
}

impl AttackPlan {
    /// `s_hat` with every target set to its assigned value.
    pub fn apply(&self, s_hat: &[f64]) -> Result<Vec<f64>> {
        let mut s = s_hat.to_vec();
        let mut seen = vec![false; s.len()];
        if self.omega.len() != self.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} targets but {} values",
                self.omega.len(),
                self.values.len()
            )));
        }
        for (&j, &v) in self.omega.iter().zip(&self.values) {
            if j >= s.len() {
                return Err(Error::IndexOutOfRange { index: j, n: s.len() });
            }
            if seen[j] {
                return Err(Error::InvalidParameter(format!("target {j} appears twice")));
            }
            if v != 0.0 && v != 1.0 {
                return Err(Error::InvalidParameter(format!("target value {v} is not 0 or 1")));
            }
            seen[j] = true;
            s[j] = v;
        }
        Ok(s)
    }
}

/// Counts objective evaluations so algorithms can be compared by cost.
struct Objective<'a> {
    eval: MetricEvaluator<'a>,
    kind: MetricMatrixKind,
    calls: AtomicU64,
}

impl<'a> Objective<'a> {
    fn new(g: &'a Graph, s_hat: &[f64], kind: AttackObjective) -> Result<Self> {
        check_len(g.n(), s_hat.len())?;
        if s_hat.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(v) = s_hat.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "internal opinions must lie in [0, 1], found {v}"
            )));
        }
        Ok(Objective {
            eval: MetricEvaluator::new(g)?,
            kind: kind.matrix_kind(),
            calls: AtomicU64::new(0),
        })
    }

    fn at(&self, s: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.eval.value(self.kind, s)
    }

    /// Objective with `s[j]` replaced by `v`.
    fn with(&self, s: &[f64], j: usize, v: f64) -> f64 {
        let mut t = s.to_vec();
        t[j] = v;
        self.at(&t)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        Err(Error::KTooLarge { k, n })
    } else {
        Ok(())
    }
}

fn finish(
    kind: AttackObjective,
    s_hat: &[f64],
    omega: Vec<usize>,
    values: Vec<f64>,
    trace: Vec<f64>,
    baseline: f64,
    evaluations: u64,
) -> AttackPlan {
    let hamming = omega
        .iter()
        .zip(&values)
        .filter(|(j, v)| s_hat[**j] != **v)
        .count();
    let objective = trace.last().copied().unwrap_or(baseline);
    AttackPlan {
        omega,
        values,
        objective_trace: trace,
        kind,
        baseline,
        objective,
        hamming,
        evaluations,
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Exact optimum by enumerating every target set and every 0/1 assignment.
/// Ties go to the lexicographically smallest (targets, values).
pub fn brute_force_attack(g: &Graph, s_hat: &[f64], k: usize, kind: AttackObjective) -> Result<AttackPlan> {
    let obj = Objective::new(g, s_hat, kind)?;
    let n = s_hat.len();
    check_k(k, n)?;
    let count = binomial(n, k).saturating_mul(1u128 << k.min(100));
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(count));
    }
    let baseline = obj.at(s_hat);
    if k == 0 {
        return Ok(finish(kind, s_hat, vec![], vec![], vec![], baseline, obj.calls() - 1));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_omega = Vec::new();
    let mut best_bits = 0u32;
    let mut subset: Vec<usize> = (0..k).collect();
    let mut s = s_hat.to_vec();
    loop {
        // The first target is the most significant bit, so bits count up
        // in lexicographic order of the value vector.
        for bits in 0..(1u32 << k) {
            for (pos, &j) in subset.iter().enumerate() {
                s[j] = ((bits >> (k - 1 - pos)) & 1) as f64;
            }
            let v = obj.at(&s);
            if v > best {
                best = v;
                best_omega.clone_from(&subset);
                best_bits = bits;
            }
        }
        for &j in &subset {
            s[j] = s_hat[j];
        }
        // Next k-subset in lexicographic order.
        let mut i = k;
        while i > 0 && subset[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for t in i..k {
            subset[t] = subset[t - 1] + 1;
        }
    }
    let values = (0..k)
        .map(|pos| ((best_bits >> (k - 1 - pos)) & 1) as f64)
        .collect();
    Ok(finish(kind, s_hat, best_omega, values, vec![best], baseline, obj.calls() - 1))
}

/// Greedy selection: each round tries every untargeted node at 0 and at 1
/// and keeps the best. Comparisons use `>=`, so among equal objectives the
/// one evaluated last wins (value 1 over 0, larger index over smaller).
/// Uses exactly `2 * sum_{i<k} (n - i)` evaluations after the baseline.
pub fn greedy_attack(g: &Graph, s_hat: &[f64], k: usize, kind: AttackObjective) -> Result<AttackPlan> {
    let obj = Objective::new(g, s_hat, kind)?;
    let n = s_hat.len();
    check_k(k, n)?;
    let baseline = obj.at(s_hat);
    let mut s = s_hat.to_vec();
    let mut targeted = vec![false; n];
    let mut omega = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let candidates: Vec<usize> = (0..n).filter(|j| !targeted[*j]).collect();
        let scores: Vec<[f64; 2]> = candidates
            .par_iter()
            .map(|&j| [obj.with(&s, j, 0.0), obj.with(&s, j, 1.0)])
            .collect();
        let mut max_val = 0.0;
        let mut index = 0;
        let mut set_val = 0.0;
        for (&j, pair) in candidates.iter().zip(&scores) {
            for (v, &val) in [0.0, 1.0].iter().zip(pair) {
                if val >= max_val {
                    max_val = val;
                    index = j;
                    set_val = *v;
                }
            }
        }
        targeted[index] = true;
        s[index] = set_val;
        omega.push(index);
        values.push(set_val);
        trace.push(max_val);
    }
    Ok(finish(kind, s_hat, omega, values, trace, baseline, obj.calls() - 1))
}

/// Order in which a heuristic picks targets; the first `k` are used.
pub fn heuristic_order(g: &Graph, s_hat: &[f64], rule: HeuristicRule) -> Result<Vec<usize>> {
    check_len(g.n(), s_hat.len())?;
    let n = s_hat.len();
    let mut idx: Vec<usize> = (0..n).collect();
    match rule {
        HeuristicRule::MeanOpinion => {
            let mean = s_hat.iter().sum::<f64>() / n as f64;
            let gap: Vec<f64> = s_hat.iter().map(|v| (v - mean).abs()).collect();
            idx.sort_by(|a, b| gap[*a].total_cmp(&gap[*b]).then(a.cmp(b)));
        }
        HeuristicRule::MaxConnection => {
            let c = g.neighbor_counts();
            idx.sort_by(|a, b| c[*b].cmp(&c[*a]).then(a.cmp(b)));
        }
        HeuristicRule::MaxDegree => {
            let d = g.degrees();
            idx.sort_by(|a, b| d[*b].total_cmp(&d[*a]).then(a.cmp(b)));
        }
    }
    Ok(idx)
}

/// Picks targets by a fixed rule, then sets each in turn to whichever
/// extreme gives the larger objective given the earlier choices (1 on ties).
pub fn heuristic_attack(
    g: &Graph,
    s_hat: &[f64],
    k: usize,
    kind: AttackObjective,
    rule: HeuristicRule,
) -> Result<AttackPlan> {
    let obj = Objective::new(g, s_hat, kind)?;
    check_k(k, s_hat.len())?;
    let baseline = obj.at(s_hat);
    let omega: Vec<usize> = heuristic_order(g, s_hat, rule)?.into_iter().take(k).collect();
    let mut s = s_hat.to_vec();
    let mut values = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    for &j in &omega {
        let low = obj.with(&s, j, 0.0);
        let high = obj.with(&s, j, 1.0);
        let (v, f) = if high >= low { (1.0, high) } else { (0.0, low) };
        s[j] = v;
        values.push(v);
        trace.push(f);
    }
    Ok(finish(kind, s_hat, omega, values, trace, baseline, obj.calls() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_graph;
    use crate::metrics::{disagreement, polarization};
    use crate::dynamics::equilibrium;

    fn direct(g: &Graph, s: &[f64], kind: AttackObjective) -> f64 {
        let z = equilibrium(g, s).unwrap();
        match kind {
            AttackObjective::Polarization => polarization(&z).unwrap(),
            AttackObjective::Disagreement => disagreement(g, &z).unwrap(),
        }
    }

    #[test]
    fn zero_budget_is_baseline() {
        let g = random_graph(6, 0.5, 0.5, 1.5, 1).unwrap();
        let s = crate::rng::uniform_opinions(6, 1);
        for alg in AttackAlgorithm::ALL {
            let p = alg.run(&g, &s, 0, AttackObjective::Polarization).unwrap();
            assert!(p.omega.is_empty());
            assert_eq!(p.objective, p.baseline);
            assert!((p.baseline - direct(&g, &s, AttackObjective::Polarization)).abs() < 1e-12);
        }
    }

    #[test]
    fn k2_full_budget_splits_the_pair() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let p = brute_force_attack(&g, &[0.5, 0.5], 2, AttackObjective::Polarization).unwrap();
        assert_eq!(p.omega, vec![0, 1]);
        assert_eq!(p.values, vec![0.0, 1.0]);
        let mut best: f64 = 0.0;
        for a in [0.0, 1.0] {
            for b in [0.0, 1.0] {
                best = best.max(direct(&g, &[a, b], AttackObjective::Polarization));
            }
        }
        assert!((p.objective - best).abs() < 1e-15);
        assert!((p.objective - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn greedy_evaluation_count_is_exact() {
        let g = random_graph(9, 0.4, 0.5, 1.5, 2).unwrap();
        let s = crate::rng::uniform_opinions(9, 2);
        for k in 0..=9 {
            let p = greedy_attack(&g, &s, k, AttackObjective::Disagreement).unwrap();
            let expect: u64 = (0..k).map(|i| 2 * (9 - i) as u64).sum();
            assert_eq!(p.evaluations, expect);
        }
    }

    #[test]
    fn greedy_single_step_equals_brute_force() {
        for seed in 0..10 {
            let g = random_graph(7, 0.5, 0.5, 1.5, seed).unwrap();
            let s = crate::rng::uniform_opinions(7, seed);
            for kind in AttackObjective::ALL {
                let a = greedy_attack(&g, &s, 1, kind).unwrap();
                let b = brute_force_attack(&g, &s, 1, kind).unwrap();
                assert_eq!(a.objective.to_bits(), b.objective.to_bits());
                assert_eq!((a.omega.clone(), a.values.clone()), (b.omega, b.values));
            }
        }
    }

    #[test]
    fn greedy_ties_go_to_the_later_candidate() {
        // Empty graph, both opinions 1/2: every single change scores exactly 1/8.
        let g = Graph::empty(2);
        let p = greedy_attack(&g, &[0.5; 2], 1, AttackObjective::Polarization).unwrap();
        assert_eq!((p.omega[0], p.values[0]), (1, 1.0));
        assert_eq!(p.objective, 0.125);
        let b = brute_force_attack(&g, &[0.5; 2], 1, AttackObjective::Polarization).unwrap();
        assert_eq!((b.omega[0], b.values[0]), (0, 0.0));
        assert_eq!(p.objective, b.objective);
    }

    #[test]
    fn stack_and_traces_on_small_graphs() {
        for seed in 0..12 {
            let n = 4 + (seed as usize % 4);
            let g = random_graph(n, 0.5, 0.5, 1.5, seed).unwrap();
            let s = crate::rng::uniform_opinions(n, seed);
            for kind in AttackObjective::ALL {
                for k in 0..=2 {
                    let brute = brute_force_attack(&g, &s, k, kind).unwrap();
                    let greedy = greedy_attack(&g, &s, k, kind).unwrap();
                    assert!(brute.objective >= greedy.objective);
                    assert!(greedy.objective_trace.windows(2).all(|w| w[1] >= w[0]));
                    for rule in HeuristicRule::ALL {
                        let h = heuristic_attack(&g, &s, k, kind, rule).unwrap();
                        assert!(brute.objective >= h.objective);
                        assert_eq!(h.omega.len(), k);
                    }
                    for plan in [&brute, &greedy] {
                        let sp = plan.apply(&s).unwrap();
                        assert!((direct(&g, &sp, kind) - plan.objective).abs() < 1e-12);
                        assert!(sp.iter().zip(&s).filter(|(a, b)| a != b).count() <= k);
                    }
                }
            }
        }
    }

    #[test]
    fn heuristic_orders() {
        let g = Graph::new(4, [(0, 2, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 1, 5.0)]).unwrap();
        let s = [0.5; 4];
        assert_eq!(heuristic_order(&g, &s, HeuristicRule::MeanOpinion).unwrap()[0], 0);
        assert_eq!(heuristic_order(&g, &s, HeuristicRule::MaxConnection).unwrap()[0], 2);
        assert_eq!(heuristic_order(&g, &s, HeuristicRule::MaxDegree).unwrap(), vec![0, 1, 2, 3]);
        let star = Graph::new(5, (1..5).map(|j| (0, j, 1.0))).unwrap();
        let p = heuristic_attack(&star, &[0.2, 0.4, 0.6, 0.8, 0.5], 1, AttackObjective::Disagreement, HeuristicRule::MaxDegree).unwrap();
        assert_eq!(p.omega, vec![0]);
    }

    #[test]
    fn guards() {
        let g = random_graph(30, 0.3, 0.5, 1.5, 3).unwrap();
        let s = crate::rng::uniform_opinions(30, 3);
        assert!(matches!(
            brute_force_attack(&g, &s, 10, AttackObjective::Polarization),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            greedy_attack(&g, &s, 31, AttackObjective::Polarization),
            Err(Error::KTooLarge { .. })
        ));
        assert!(greedy_attack(&g, &vec![2.0; 30], 1, AttackObjective::Polarization).is_err());
    }

    #[test]
    fn single_coordinate_maximum_is_at_an_endpoint() {
        for seed in 0..10 {
            let g = random_graph(8, 0.4, 0.5, 1.5, seed).unwrap();
            let s = crate::rng::uniform_opinions(8, seed);
            let eval = MetricEvaluator::new(&g).unwrap();
            for kind in AttackObjective::ALL {
                for j in 0..8 {
                    let mut t = s.clone();
                    let mut at = |v: f64| {
                        t[j] = v;
                        eval.value(kind.matrix_kind(), &t)
                    };
                    let ends = at(0.0).max(at(1.0));
                    for step in 0..=100 {
                        assert!(at(step as f64 / 100.0) <= ends + 1e-12);
                    }
                }
            }
        }
    }
}
