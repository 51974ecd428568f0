use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::heuristics::{greedy, local_search, lp_rounding, remove_redundant};
use super::instance::CoveringInstance;
use super::presolve::{presolve, PresolveOptions, PresolveStats, ReducedModel};
use super::simplex::{dual_ascent, dual_bound, DualSimplex, LpOutcome};
use crate::coverage::PatternVector;

/// Slack subtracted before rounding a fractional bound up.
pub const BOUND_ROUNDING_SLACK: f64 = 1e-6;

/// Nodes between best-bound restarts of the depth-first dive.
const RESTART_INTERVAL: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchingRule {
    /// Variable whose LP value is closest to 1/2; lowest index on ties.
    MostFractional,
    /// Lowest-index fractional variable.
    FirstFractional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Wall-clock limit in seconds. Ignored in deterministic mode.
    pub time_limit: f64,
    pub node_limit: u64,
    pub lp_tolerance: f64,
    pub branching_rule: BranchingRule,
    pub deterministic: bool,
    /// Steps per local-search restart at the root (0 disables it).
    pub local_search_iterations: usize,
    pub local_search_restarts: usize,
    pub seed: u64,
    pub reduced_cost_fixing: bool,
    /// Above this many columns the dense-inverse simplex is skipped: the
    /// search keeps the heuristic incumbent and reports a dual-ascent bound.
    pub dense_lp_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit: 60.0,
            node_limit: 1_000_000,
            lp_tolerance: 1e-9,
            branching_rule: BranchingRule::MostFractional,
            deterministic: false,
            local_search_iterations: 100_000,
            local_search_restarts: 4,
            seed: 0x5eed,
            reduced_cost_fixing: true,
            dense_lp_limit: 2500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped on a limit with a verified incumbent and a lower bound.
    FeasibleIncumbent,
    Infeasible,
    /// Stopped on the time limit before any incumbent existed.
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressPoint {
    pub node: u64,
    pub lower_bound: u64,
    pub incumbent: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub patterns: Vec<PatternVector>,
    pub objective: u64,
    pub status: SolveStatus,
    /// Best proven lower bound (integer-rounded).
    pub bound: u64,
    /// Relaxation value at the root.
    pub root_relaxation: f64,
    pub node_count: u64,
    pub lp_iterations: usize,
    pub wall_time: f64,
    pub greedy_objective: u64,
    pub presolve: PresolveStats,
    pub history: Vec<ProgressPoint>,
}

impl SolveResult {
    pub fn gap(&self) -> u64 {
        self.objective.saturating_sub(self.bound)
    }
}

fn count(x: &[bool]) -> u64 {
    x.iter().filter(|&&b| b).count() as u64
}

fn rounded(bound: f64) -> u64 {
    (bound - BOUND_ROUNDING_SLACK).ceil().max(0.0) as u64
}

/// Runs the simplex in chunks so a wall-clock deadline can interrupt it; an
/// interrupted solve still leaves a dual-feasible point behind.
fn solve_lp(lp: &mut DualSimplex<f64>, cap: usize, deadline: Option<Instant>) -> LpOutcome {
    const CHUNK: usize = 32;
    let mut left = cap;
    loop {
        let step = left.min(CHUNK);
        let outcome = lp.solve(step);
        left -= step;
        if outcome != LpOutcome::IterationLimit || left == 0 {
            return outcome;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            log::debug!("LP interrupted by the time limit");
            return outcome;
        }
    }
}

struct Node {
    fixings: Vec<(usize, bool)>,
    bound: f64,
}

/// Best-of-restarts local search; restarts run in parallel but the winner is
/// chosen by (count, restart index), so the outcome is thread-count free.
fn improve(
    model: &ReducedModel,
    lb: &[bool],
    ub: &[bool],
    start: &[bool],
    config: &SolverConfig,
    began: Instant,
) -> Vec<bool> {
    if config.local_search_iterations == 0 || config.local_search_restarts == 0 {
        return start.to_vec();
    }
    // Half the time budget at most; the tree search gets the rest.
    let deadline = (!config.deterministic)
        .then(|| began + std::time::Duration::from_secs_f64((config.time_limit * 0.5).clamp(0.0, 1e9)));
    let found: Vec<Option<Vec<bool>>> = (0..config.local_search_restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(k as u64));
            local_search(model, lb, ub, start, config.local_search_iterations, deadline, &mut rng)
        })
        .collect();
    let mut best = start.to_vec();
    for x in found.into_iter().flatten() {
        if count(&x) < count(&best) {
            best = x;
        }
    }
    best
}

/// Exact branch-and-bound for the covering program.
pub fn solve(instance: &CoveringInstance, config: &SolverConfig) -> SolveResult {
    solve_with_presolve(instance, config, PresolveOptions::default())
}

pub fn solve_with_presolve(
    instance: &CoveringInstance,
    config: &SolverConfig,
    options: PresolveOptions,
) -> SolveResult {
    let start = Instant::now();
    let n = instance.num_vars();
    let model = presolve(instance, options);
    log::debug!("presolve done at {:.2} s", start.elapsed().as_secs_f64());
    log::info!(
        "presolve: {} rows -> {} ({} duplicate, {} dominated), {} columns fixed",
        model.stats.input_rows,
        model.num_rows(),
        model.stats.duplicate_rows,
        model.stats.dominated_rows,
        model.fixed.iter().filter(|f| f.is_some()).count()
    );

    let root_lb: Vec<bool> = model.fixed.iter().map(|f| *f == Some(true)).collect();
    let root_ub: Vec<bool> = model.fixed.iter().map(|f| *f != Some(false)).collect();

    let mut result = SolveResult {
        patterns: instance.split(&vec![false; n]),
        objective: 0,
        status: SolveStatus::Optimal,
        bound: 0,
        root_relaxation: 0.0,
        node_count: 0,
        lp_iterations: 0,
        wall_time: 0.0,
        greedy_objective: 0,
        presolve: model.stats.clone(),
        history: Vec::new(),
    };
    if model.rows.is_empty() {
        result.wall_time = start.elapsed().as_secs_f64();
        return result;
    }

    let Some(mut incumbent) = greedy(&model, &root_lb, &root_ub) else {
        result.status = SolveStatus::Infeasible;
        result.wall_time = start.elapsed().as_secs_f64();
        return result;
    };
    remove_redundant(&model, &root_lb, &mut incumbent);
    result.greedy_objective = count(&incumbent);
    incumbent = improve(&model, &root_lb, &root_ub, &incumbent, config, start);
    log::info!(
        "incumbent: greedy {} -> local search {}",
        result.greedy_objective,
        count(&incumbent)
    );

    if n > config.dense_lp_limit {
        let y = dual_ascent(n, &model.rows, &root_lb, &root_ub);
        let (b, _, _) = dual_bound(n, &model.rows, &root_lb, &root_ub, &y);
        let inc = count(&incumbent);
        let bound = rounded(b).min(inc);
        log::info!("{n} columns exceed the dense LP limit; dual-ascent bound {b:.3}");
        result.root_relaxation = b;
        result.patterns = instance.split(&incumbent);
        result.objective = inc;
        result.bound = bound;
        result.status = if bound >= inc {
            SolveStatus::Optimal
        } else {
            SolveStatus::FeasibleIncumbent
        };
        result.history = vec![ProgressPoint {
            node: 0,
            lower_bound: bound,
            incumbent: inc,
        }];
        result.wall_time = start.elapsed().as_secs_f64();
        return result;
    }

    log::debug!("heuristics done at {:.2} s", start.elapsed().as_secs_f64());
    let mut lp = DualSimplex::<f64>::new(n, &model.rows);
    let lp_cap = 50 * (model.rows.len() + 2 * n) + 10_000;
    let mut best_bound: u64 = 0;
    let mut history = vec![ProgressPoint {
        node: 0,
        lower_bound: 0,
        incumbent: count(&incumbent),
    }];
    // Cheap floor, so a bound is reported even if the root LP is cut short.
    let floor = {
        let y = dual_ascent(n, &model.rows, &root_lb, &root_ub);
        dual_bound(n, &model.rows, &root_lb, &root_ub, &y).0
    };
    let deadline =
        (!config.deterministic).then(|| start + std::time::Duration::from_secs_f64(config.time_limit.clamp(0.0, 1e9)));
    let mut stack = vec![Node {
        fixings: Vec::new(),
        bound: floor,
    }];
    let mut nodes: u64 = 0;
    let mut hit_limit = false;
    let mut timed_out = false;

    while let Some(node) = stack.pop() {
        let inc = count(&incumbent);
        if rounded(node.bound) >= inc {
            continue;
        }
        if nodes >= config.node_limit {
            stack.push(node);
            hit_limit = true;
            break;
        }
        // The root is always solved so a bound is reported.
        if nodes > 0 && !config.deterministic && start.elapsed().as_secs_f64() > config.time_limit {
            stack.push(node);
            hit_limit = true;
            timed_out = true;
            break;
        }
        nodes += 1;

        let mut lb = root_lb.clone();
        let mut ub = root_ub.clone();
        for &(c, v) in &node.fixings {
            if v {
                lb[c] = true;
            } else {
                ub[c] = false;
            }
        }
        lp.set_bounds(&lb, &ub);
        let outcome = solve_lp(&mut lp, lp_cap, deadline);
        if outcome == LpOutcome::Infeasible {
            continue;
        }
        let y = lp.row_duals_f64();
        let (node_bound, slack, excess) = dual_bound(n, &model.rows, &lb, &ub, &y);
        let node_bound = node_bound.max(node.bound);
        if nodes == 1 {
            result.root_relaxation = node_bound;
            log::debug!("root LP done at {:.2} s", start.elapsed().as_secs_f64());
            log::info!("root relaxation {:.4} (incumbent {inc})", node_bound);
        }
        if rounded(node_bound) >= inc {
            continue;
        }

        let pi = lp.multipliers();
        let values: Vec<f64> = (0..n)
            .map(|c| {
                if lb[c] {
                    1.0
                } else if !ub[c] {
                    0.0
                } else {
                    pi[c].clamp(0.0, 1.0)
                }
            })
            .collect();

        if let Some(x) = lp_rounding(&model, &lb, &ub, &values) {
            if count(&x) < count(&incumbent) && model.is_feasible(&x) {
                incumbent = x;
                history.push(ProgressPoint {
                    node: nodes,
                    lower_bound: best_bound,
                    incumbent: count(&incumbent),
                });
                log::debug!("node {nodes}: rounding incumbent {}", count(&incumbent));
            }
        }
        let inc = count(&incumbent);
        if rounded(node_bound) >= inc {
            continue;
        }

        let mut fixings = node.fixings;
        if config.reduced_cost_fixing {
            let mut conflict = false;
            for c in 0..n {
                if lb[c] || !ub[c] {
                    continue;
                }
                let up = rounded(node_bound + slack[c]) >= inc;
                let down = rounded(node_bound + excess[c]) >= inc;
                match (up, down) {
                    (true, true) => conflict = true,
                    (true, false) => {
                        ub[c] = false;
                        fixings.push((c, false));
                    }
                    (false, true) => {
                        lb[c] = true;
                        fixings.push((c, true));
                    }
                    (false, false) => {}
                }
            }
            if conflict {
                continue;
            }
        }

        let tol = config.lp_tolerance.max(1e-9) * 1e3;
        let mut branch: Option<(f64, usize)> = None;
        for c in 0..n {
            if lb[c] || !ub[c] {
                continue;
            }
            let v = values[c];
            if v <= tol || v >= 1.0 - tol {
                continue;
            }
            let score = (v - 0.5).abs();
            let better = match (config.branching_rule, branch) {
                (_, None) => true,
                (BranchingRule::MostFractional, Some((s, _))) => score < s,
                (BranchingRule::FirstFractional, Some(_)) => false,
            };
            if better {
                branch = Some((score, c));
            }
        }

        let Some((_, c)) = branch else {
            // Integral relaxation (after fixings): the point itself covers.
            let x: Vec<bool> = (0..n).map(|c| lb[c] || (ub[c] && values[c] >= 0.5)).collect();
            if model.is_feasible(&x) {
                if count(&x) < inc {
                    incumbent = x;
                    history.push(ProgressPoint {
                        node: nodes,
                        lower_bound: best_bound,
                        incumbent: count(&incumbent),
                    });
                }
                continue;
            }
            // The relaxation stopped on its iteration cap, so the multipliers
            // are not a usable point: branch on the first free column.
            let pick = (0..n).find(|&c| !lb[c] && ub[c]);
            let Some(c) = pick else { continue };
            push_children(&mut stack, &fixings, c, node_bound);
            continue;
        };
        push_children(&mut stack, &fixings, c, node_bound);

        if nodes % RESTART_INTERVAL == 0 && !stack.is_empty() {
            let (k, _) = stack
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.bound.total_cmp(&b.1.bound).then(a.0.cmp(&b.0)))
                .expect("non-empty");
            let last = stack.len() - 1;
            stack.swap(k, last);
        }

        let open_min = stack.iter().map(|n| rounded(n.bound)).min().unwrap_or(inc).min(inc);
        if open_min > best_bound {
            best_bound = open_min;
            history.push(ProgressPoint {
                node: nodes,
                lower_bound: best_bound,
                incumbent: inc,
            });
        }
    }

    let inc = count(&incumbent);
    let open_min = stack.iter().map(|n| rounded(n.bound)).min().unwrap_or(inc).min(inc);
    let bound = if hit_limit {
        open_min.max(best_bound).min(inc)
    } else {
        inc
    };
    if history
        .last()
        .map_or(true, |p| p.lower_bound != bound || p.incumbent != inc)
    {
        history.push(ProgressPoint {
            node: nodes,
            lower_bound: bound,
            incumbent: inc,
        });
    }
    debug_assert!(instance.is_feasible(&incumbent));

    result.status = if !hit_limit || bound >= inc {
        SolveStatus::Optimal
    } else {
        SolveStatus::FeasibleIncumbent
    };
    if timed_out {
        log::info!("time limit reached after {nodes} nodes");
    }
    result.patterns = instance.split(&incumbent);
    result.objective = inc;
    result.bound = bound;
    result.node_count = nodes;
    result.lp_iterations = lp.total_iterations;
    result.history = history;
    result.wall_time = start.elapsed().as_secs_f64();
    result
}

fn push_children(stack: &mut Vec<Node>, fixings: &[(usize, bool)], c: usize, bound: f64) {
    for value in [false, true] {
        let mut f = fixings.to_vec();
        f.push((c, value));
        stack.push(Node { fixings: f, bound });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilp::instance::CoverRow;
    use crate::coverage::{CoverageProblem, CoverageRequirement};
    use crate::geodesy::AccessProfile;

    fn det() -> SolverConfig {
        SolverConfig {
            deterministic: true,
            ..Default::default()
        }
    }

    #[test]
    fn half_profile_needs_two() {
        let p = CoverageProblem::single(
            vec![AccessProfile::from_bits(&[1, 1, 0, 0])],
            vec![CoverageRequirement::constant(4, 1)],
        )
        .unwrap();
        let inst = CoveringInstance::assemble(&p).unwrap();
        let r = solve(&inst, &det());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, 2);
        assert_eq!(r.bound, 2);
        assert!(inst.is_feasible(&inst.flatten(&r.patterns).unwrap()));
    }

    #[test]
    fn all_ones_multi_fold() {
        let p = CoverageProblem::single(
            vec![AccessProfile::from_bits(&[1; 6])],
            vec![CoverageRequirement::constant(6, 3)],
        )
        .unwrap();
        let r = solve(&CoveringInstance::assemble(&p).unwrap(), &det());
        assert_eq!((r.objective, r.status), (3, SolveStatus::Optimal));
    }

    #[test]
    fn picks_the_better_subconstellation() {
        let p = CoverageProblem::new(
            vec![vec![
                AccessProfile::from_bits(&[1, 0, 0, 0]),
                AccessProfile::from_bits(&[1, 1, 1, 1]),
            ]],
            vec![CoverageRequirement::constant(4, 1)],
        )
        .unwrap();
        let r = solve(&CoveringInstance::assemble(&p).unwrap(), &det());
        assert_eq!(r.objective, 1);
        assert_eq!(r.patterns[0].satellite_count(), 0);
        assert_eq!(r.patterns[1].satellite_count(), 1);
    }

    #[test]
    fn vacuous_requirement_is_zero() {
        let p = CoverageProblem::single(
            vec![AccessProfile::from_bits(&[1, 0, 0])],
            vec![CoverageRequirement::constant(3, 0)],
        )
        .unwrap();
        let r = solve(&CoveringInstance::assemble(&p).unwrap(), &det());
        assert_eq!((r.objective, r.status), (0, SolveStatus::Optimal));
    }

    #[test]
    fn needs_branching_without_heuristics() {
        // Odd cycle: LP optimum 5/2, integer optimum 3.
        let rows = (0..5)
            .map(|k| CoverRow {
                target: 0,
                time: k,
                entries: vec![(k, 1), ((k + 1) % 5, 1)],
                rhs: 1,
            })
            .collect();
        let inst = CoveringInstance::from_rows(1, 5, rows).unwrap();
        let cfg = SolverConfig {
            local_search_iterations: 0,
            ..det()
        };
        let r = solve(&inst, &cfg);
        assert_eq!((r.objective, r.bound, r.status), (3, 3, SolveStatus::Optimal));
        assert!((r.root_relaxation - 2.5).abs() < 1e-6);
    }

    #[test]
    fn node_limit_reports_incumbent() {
        let rows = (0..9)
            .map(|k| CoverRow {
                target: 0,
                time: k,
                entries: vec![(k, 1), ((k + 1) % 9, 1)],
                rhs: 1,
            })
            .collect();
        let inst = CoveringInstance::from_rows(1, 9, rows).unwrap();
        let cfg = SolverConfig {
            node_limit: 1,
            local_search_iterations: 0,
            reduced_cost_fixing: false,
            ..det()
        };
        let r = solve(&inst, &cfg);
        assert!(inst.is_feasible(&inst.flatten(&r.patterns).unwrap()));
        assert!(r.bound <= r.objective);
        assert!(r.objective >= 5);
    }
}
