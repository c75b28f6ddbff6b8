//! Optimization over internal opinions.

mod attack;
mod bounds;
mod shift;

pub use attack::{
    brute_force_attack, greedy_attack, heuristic_attack, heuristic_order, AttackAlgorithm,
    AttackObjective, AttackPlan, HeuristicRule, BRUTE_FORCE_LIMIT,
};
pub use bounds::{check_bounds, BoundReport};
pub use shift::{minimize_pdi_shift, ShiftProblem, ShiftSolution};
