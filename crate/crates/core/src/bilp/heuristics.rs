//! Primal heuristics: greedy construction, LP rounding, redundancy removal and
//! a row-weighting local search. All of them respect `lb ≤ x ≤ ub` and are
//! deterministic for a given seed.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::presolve::{ModelRow, ReducedModel};

/// Row activities `Σ a·x` for an assignment.
fn activities(model: &ReducedModel, x: &[bool]) -> Vec<u32> {
    let mut cov = vec![0u32; model.rows.len()];
    for (c, col) in model.cols.iter().enumerate() {
        if x[c] {
            for &(r, a) in col {
                cov[r] += a;
            }
        }
    }
    cov
}

/// Repeatedly adds the free column with the largest `Σ min(residual, a)`,
/// lowest index first on ties, starting from the columns forced to one.
/// Returns `None` when the forced-zero columns make the rows uncoverable.
pub fn greedy(model: &ReducedModel, lb: &[bool], ub: &[bool]) -> Option<Vec<bool>> {
    let n = model.num_vars;
    let mut x = lb.to_vec();
    let mut residual: Vec<u32> = model
        .rows
        .iter()
        .zip(activities(model, &x))
        .map(|(r, cov)| r.rhs.saturating_sub(cov))
        .collect();
    let mut open = residual.iter().filter(|&&d| d > 0).count();
    let mut score: Vec<u64> = (0..n)
        .map(|c| {
            if x[c] || !ub[c] {
                0
            } else {
                model.cols[c].iter().map(|&(r, a)| residual[r].min(a) as u64).sum()
            }
        })
        .collect();
    while open > 0 {
        let mut best: Option<usize> = None;
        for c in 0..n {
            if x[c] || !ub[c] || score[c] == 0 {
                continue;
            }
            if best.map_or(true, |b| score[c] > score[b]) {
                best = Some(c);
            }
        }
        let c = best?;
        x[c] = true;
        for &(r, a) in &model.cols[c] {
            let before = residual[r];
            if before == 0 {
                continue;
            }
            let after = before.saturating_sub(a);
            residual[r] = after;
            if after == 0 {
                open -= 1;
            }
            for &(d, ad) in &model.rows[r].entries {
                if !x[d] && ub[d] {
                    score[d] -= (before.min(ad) - after.min(ad)) as u64;
                }
            }
        }
    }
    Some(x)
}

/// Drops selected free columns whose removal keeps every row satisfied,
/// scanning from the highest index down.
pub fn remove_redundant(model: &ReducedModel, lb: &[bool], x: &mut [bool]) {
    let mut cov = activities(model, x);
    for c in (0..model.num_vars).rev() {
        if !x[c] || lb[c] {
            continue;
        }
        let removable = model.cols[c].iter().all(|&(r, a)| cov[r] - a >= model.rows[r].rhs);
        if removable {
            x[c] = false;
            for &(r, a) in &model.cols[c] {
                cov[r] -= a;
            }
        }
    }
}

/// Rounds a fractional point: columns in decreasing LP value are added until
/// every row is met, then redundant columns are dropped.
pub fn lp_rounding(model: &ReducedModel, lb: &[bool], ub: &[bool], values: &[f64]) -> Option<Vec<bool>> {
    let n = model.num_vars;
    let mut order: Vec<usize> = (0..n).filter(|&c| ub[c] && !lb[c] && values[c] > 1e-9).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut x = lb.to_vec();
    let mut cov = activities(model, &x);
    let mut open = model.rows.iter().zip(&cov).filter(|(r, &c)| c < r.rhs).count();
    for c in order {
        if open == 0 {
            break;
        }
        let helps = model.cols[c].iter().any(|&(r, _)| cov[r] < model.rows[r].rhs);
        if !helps {
            continue;
        }
        x[c] = true;
        for &(r, a) in &model.cols[c] {
            let before = cov[r];
            cov[r] += a;
            if before < model.rows[r].rhs && cov[r] >= model.rows[r].rhs {
                open -= 1;
            }
        }
    }
    let mut x = if open == 0 {
        x
    } else {
        // Complete with the greedy rule from the partial point.
        greedy(model, &x, ub)?
    };
    remove_redundant(model, lb, &mut x);
    Some(x)
}

/// Row-weighting local search for a cover with fewer columns than `start`.
///
/// After each feasible point the column whose removal hurts the weighted
/// deficit least is dropped; otherwise one column is swapped out and one
/// column from a random uncovered row is swapped in, and the weights of rows
/// still uncovered are raised. Returns the best cover found if it improves on
/// `start`.
pub fn local_search(
    model: &ReducedModel,
    lb: &[bool],
    ub: &[bool],
    start: &[bool],
    iterations: usize,
    deadline: Option<Instant>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<bool>> {
    let n = model.num_vars;
    let rows: &[ModelRow] = &model.rows;
    if rows.is_empty() || iterations == 0 {
        return None;
    }
    let mut x = start.to_vec();
    let mut cov = activities(model, &x);
    let mut weight = vec![1u64; rows.len()];
    let mut stamp = vec![0usize; n];
    let mut best_count = x.iter().filter(|&&b| b).count();
    let mut best: Option<Vec<bool>> = None;

    let mut uncovered = UncoveredSet::new(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if cov[r] < row.rhs {
            uncovered.insert(r);
        }
    }

    let deficit = |cov: u32, rhs: u32| rhs.saturating_sub(cov) as u64;
    let mut last_added = usize::MAX;

    for step in 1..=iterations {
        if step % 16 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            log::debug!("local search: deadline reached at step {step}");
            break;
        }
        if uncovered.is_empty() {
            let count = x.iter().filter(|&&b| b).count();
            if count < best_count {
                best_count = count;
                best = Some(x.clone());
                log::trace!("local search: cover with {count} columns at step {step}");
            }
            // Try one fewer column.
            let Some(c) = pick_removal(model, lb, &x, &cov, &weight, &stamp, usize::MAX) else {
                break;
            };
            flip(model, &mut x, &mut cov, &mut uncovered, c, false);
            stamp[c] = step;
            continue;
        }

        let Some(out) = pick_removal(model, lb, &x, &cov, &weight, &stamp, last_added) else {
            break;
        };
        flip(model, &mut x, &mut cov, &mut uncovered, out, false);
        stamp[out] = step;

        if uncovered.is_empty() {
            continue;
        }
        let r = uncovered.get(rng.gen_range(0..uncovered.len()));
        let mut choice: Option<(u64, usize)> = None;
        for &(c, _) in &rows[r].entries {
            if x[c] || !ub[c] || c == out {
                continue;
            }
            let gain: u64 = model.cols[c]
                .iter()
                .map(|&(q, a)| weight[q] * (deficit(cov[q], rows[q].rhs) - deficit(cov[q] + a, rows[q].rhs)))
                .sum();
            let better = match choice {
                None => true,
                Some((g, d)) => gain > g || (gain == g && stamp[c] < stamp[d]),
            };
            if better {
                choice = Some((gain, c));
            }
        }
        if let Some((_, c)) = choice {
            flip(model, &mut x, &mut cov, &mut uncovered, c, true);
            stamp[c] = step;
            last_added = c;
        }
        for k in 0..uncovered.len() {
            weight[uncovered.get(k)] += 1;
        }
        if step % 4096 == 0 && weight.iter().any(|&w| w > 1 << 40) {
            for w in &mut weight {
                *w = (*w / 2).max(1);
            }
        }
    }
    if uncovered.is_empty() && x.iter().filter(|&&b| b).count() < best_count {
        best = Some(x);
    }
    best
}

fn pick_removal(
    model: &ReducedModel,
    lb: &[bool],
    x: &[bool],
    cov: &[u32],
    weight: &[u64],
    stamp: &[usize],
    tabu: usize,
) -> Option<usize> {
    let mut choice: Option<(u64, usize)> = None;
    for c in 0..model.num_vars {
        if !x[c] || lb[c] || c == tabu {
            continue;
        }
        let loss: u64 = model.cols[c]
            .iter()
            .map(|&(r, a)| {
                let rhs = model.rows[r].rhs;
                let before = rhs.saturating_sub(cov[r]) as u64;
                let after = rhs.saturating_sub(cov[r] - a) as u64;
                weight[r] * (after - before)
            })
            .sum();
        let better = match choice {
            None => true,
            Some((l, d)) => loss < l || (loss == l && stamp[c] < stamp[d]),
        };
        if better {
            choice = Some((loss, c));
        }
    }
    choice.map(|(_, c)| c)
}

fn flip(model: &ReducedModel, x: &mut [bool], cov: &mut [u32], uncovered: &mut UncoveredSet, c: usize, on: bool) {
    x[c] = on;
    for &(r, a) in &model.cols[c] {
        if on {
            cov[r] += a;
        } else {
            cov[r] -= a;
        }
        if cov[r] < model.rows[r].rhs {
            uncovered.insert(r);
        } else {
            uncovered.remove(r);
        }
    }
}

/// Indexable set of row ids with O(1) insert/remove.
struct UncoveredSet {
    items: Vec<usize>,
    position: Vec<usize>,
}

impl UncoveredSet {
    fn new(capacity: usize) -> Self {
        Self {
            items: Vec::new(),
            position: vec![usize::MAX; capacity],
        }
    }

    fn insert(&mut self, r: usize) {
        if self.position[r] == usize::MAX {
            self.position[r] = self.items.len();
            self.items.push(r);
        }
    }

    fn remove(&mut self, r: usize) {
        let p = self.position[r];
        if p == usize::MAX {
            return;
        }
        let last = *self.items.last().expect("non-empty");
        self.items.swap_remove(p);
        if last != r {
            self.position[last] = p;
        }
        self.position[r] = usize::MAX;
    }

    fn get(&self, k: usize) -> usize {
        self.items[k]
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}
