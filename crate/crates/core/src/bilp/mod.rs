//! Exact minimum-satellite pattern search: the covering program over the
//! stacked circulant system, solved by LP-based branch-and-bound.

mod branch;
mod heuristics;
mod instance;
mod io;
mod presolve;
mod simplex;

pub use branch::{
    solve, solve_with_presolve, BranchingRule, ProgressPoint, SolveResult, SolveStatus, SolverConfig,
    BOUND_ROUNDING_SLACK,
};
pub use instance::{CoverRow, CoveringInstance, InstanceError};
pub use io::{read_instance, write_instance, DumpError};
pub use presolve::{presolve, ModelRow, PresolveOptions, PresolveStats, ReducedModel};
pub use simplex::{dual_ascent, dual_bound, DualSimplex, LpOutcome, RelaxationBound};

use crate::coverage::PatternVector;
use crate::scalar::LpScalar;

/// Greedy warm start on the unreduced instance: repeatedly adds the column
/// covering the largest remaining deficit, lowest index on ties.
pub fn greedy_incumbent(instance: &CoveringInstance) -> (Vec<PatternVector>, u64) {
    let model = presolve::unreduced(instance);
    let n = instance.num_vars();
    let x = heuristics::greedy(&model, &vec![false; n], &vec![true; n]).unwrap_or_else(|| instance.trivial_solution());
    let objective = x.iter().filter(|&&b| b).count() as u64;
    (instance.split(&x), objective)
}

/// Continuous relaxation `0 ≤ x ≤ 1` with the given fixings, on the
/// unreduced rows. Exact for exact scalars.
pub fn lp_relaxation_bound<S: LpScalar>(instance: &CoveringInstance, fixings: &[Option<bool>]) -> RelaxationBound<S> {
    let model = presolve::unreduced(instance);
    simplex::relaxation(instance.num_vars(), &model.rows, fixings)
}
