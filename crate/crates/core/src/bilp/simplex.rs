//! LP relaxation of the covering program, solved through its packing dual.
//!
//! With fixings `lb ≤ x ≤ ub` and `x = lb + x'`, the relaxation
//!
//! ```text
//! min 1ᵀlb + 1ᵀx'   s.t.  A x' ≥ g := f − A·lb,   0 ≤ x' ≤ u := ub − lb
//! ```
//!
//! has the dual
//!
//! ```text
//! max 1ᵀlb + gᵀy − uᵀw   s.t.  Aᵀy − w ≤ 1,   y, w ≥ 0.
//! ```
//!
//! The dual feasible region does not depend on the fixings, so a basis stays
//! feasible from one branch-and-bound node to the next and only the objective
//! changes. The slack basis is a feasible start. Primal values are read off
//! the simplex multipliers, and primal infeasibility of a node shows up as an
//! unbounded dual.

use super::presolve::ModelRow;
use crate::scalar::LpScalar;

/// Consecutive degenerate pivots before switching to Bland's rule. Floating
/// point runs perturb the budgets and rarely stall; exact runs do not.
const DEGENERATE_STREAK_EXACT: usize = 50;
const DEGENERATE_STREAK_FLOAT: usize = 2000;

/// Pivots between full recomputations of the multipliers (floating point).
const MULTIPLIER_REFRESH: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal,
    /// Iteration cap reached; the current point is dual feasible, so its
    /// objective is still a valid lower bound.
    IterationLimit,
    /// The node admits no fractional covering.
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct DualSimplex<S> {
    n: usize,
    m: usize,
    /// Column of `y_r` in the dual constraint space: row `r` of `A`.
    row_entries: Vec<Vec<(usize, S)>>,
    rhs: Vec<S>,
    /// Right-hand side of `Aᵀy − w ≤ budget`: all ones, plus a tiny
    /// deterministic perturbation in floating point to break degeneracy. Any
    /// bound taken through [`dual_bound`] stays valid regardless.
    budget: Vec<S>,
    cost: Vec<S>,
    constant: S,
    basis: Vec<usize>,
    position: Vec<usize>,
    /// Dense `B⁻¹`, row-major.
    binv: Vec<S>,
    xb: Vec<S>,
    pivots_since_check: usize,
    pub total_iterations: usize,
}

const NONBASIC: usize = usize::MAX;

impl<S: LpScalar> DualSimplex<S> {
    pub fn new(num_vars: usize, rows: &[ModelRow]) -> Self {
        let n = num_vars;
        let m = rows.len();
        let row_entries = rows
            .iter()
            .map(|r| r.entries.iter().map(|&(c, a)| (c, S::from_count(a))).collect())
            .collect();
        let mut s = Self {
            n,
            m,
            row_entries,
            rhs: rows.iter().map(|r| S::from_count(r.rhs)).collect(),
            budget: (0..n)
                .map(|c| {
                    if S::is_exact() {
                        S::one()
                    } else {
                        // 1e-7 · (1 + frac) with a cheap integer hash of c.
                        let h = (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 44;
                        S::from_f64(1.0 + 1e-7 * (1.0 + h as f64 / (1u64 << 20) as f64)).expect("finite perturbation")
                    }
                })
                .collect(),
            cost: vec![S::zero(); m + 2 * n],
            constant: S::zero(),
            basis: Vec::new(),
            position: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            pivots_since_check: 0,
            total_iterations: 0,
        };
        s.reset_basis();
        s
    }

    fn reset_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.basis = (0..n).map(|c| m + n + c).collect();
        self.position = vec![NONBASIC; m + 2 * n];
        for (k, &j) in self.basis.iter().enumerate() {
            self.position[j] = k;
        }
        self.binv = vec![S::zero(); n * n];
        for i in 0..n {
            self.binv[i * n + i] = S::one();
        }
        self.xb = self.budget.clone();
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Installs the objective for bounds `lb ≤ x ≤ ub` (0/1 each).
    pub fn set_bounds(&mut self, lb: &[bool], ub: &[bool]) {
        let (n, m) = (self.n, self.m);
        let mut constant = S::zero();
        for &l in lb {
            if l {
                constant = constant + S::one();
            }
        }
        self.constant = constant;
        for r in 0..m {
            let mut g = self.rhs[r].clone();
            for (c, a) in &self.row_entries[r] {
                if lb[*c] {
                    g = g - a.clone();
                }
            }
            self.cost[r] = g;
        }
        for c in 0..n {
            self.cost[m + c] = if ub[c] && !lb[c] { -S::one() } else { S::zero() };
            self.cost[m + n + c] = S::zero();
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, S)> {
        let (n, m) = (self.n, self.m);
        if j < m {
            self.row_entries[j].clone()
        } else if j < m + n {
            vec![(j - m, -S::one())]
        } else {
            vec![(j - m - n, S::one())]
        }
    }

    /// Simplex multipliers `π = c_Bᵀ B⁻¹`; these are the primal `x'`.
    pub fn multipliers(&self) -> Vec<S> {
        let n = self.n;
        let mut pi = vec![S::zero(); n];
        for k in 0..n {
            let cb = &self.cost[self.basis[k]];
            if cb.is_zero() {
                continue;
            }
            let row = &self.binv[k * n..(k + 1) * n];
            for (p, b) in pi.iter_mut().zip(row) {
                if !b.is_zero() {
                    *p = p.clone() + cb.clone() * b.clone();
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[S]) -> S {
        let (n, m) = (self.n, self.m);
        if j < m {
            let mut d = self.cost[j].clone();
            for (c, a) in &self.row_entries[j] {
                d = d - a.clone() * pi[*c].clone();
            }
            d
        } else if j < m + n {
            self.cost[j].clone() + pi[j - m].clone()
        } else {
            -pi[j - m - n].clone()
        }
    }

    pub fn objective(&self) -> S {
        let mut z = self.constant.clone();
        for (k, &j) in self.basis.iter().enumerate() {
            if !self.cost[j].is_zero() {
                z = z + self.cost[j].clone() * self.xb[k].clone();
            }
        }
        z
    }

    /// Current values of the row duals `y` (as `f64`, negatives clipped).
    pub fn row_duals_f64(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.m {
                y[j] = self.xb[k].to_f64_lossy().max(0.0);
            }
        }
        y
    }

    pub fn row_duals(&self) -> Vec<S> {
        let mut y = vec![S::zero(); self.m];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.m {
                y[j] = self.xb[k].clone();
            }
        }
        y
    }

    /// Primal simplex from the current basis.
    pub fn solve(&mut self, max_iterations: usize) -> LpOutcome {
        let tol = S::tolerance();
        let streak = if S::is_exact() {
            DEGENERATE_STREAK_EXACT
        } else {
            DEGENERATE_STREAK_FLOAT
        };
        let mut degenerate = 0usize;
        let mut pi = self.multipliers();
        let mut since_refresh = 0usize;
        for _ in 0..max_iterations {
            if !S::is_exact() && since_refresh >= MULTIPLIER_REFRESH {
                pi = self.multipliers();
                since_refresh = 0;
            }
            let bland = degenerate >= streak;
            let mut entering = None;
            let mut best = tol.clone();
            for j in 0..self.m + 2 * self.n {
                if self.position[j] != NONBASIC {
                    continue;
                }
                let d = self.reduced_cost(j, &pi);
                if d > best {
                    entering = Some((j, d.clone()));
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some((q, dq)) = entering else {
                self.clean_basic_values();
                return LpOutcome::Optimal;
            };

            let col = self.column(q);
            let n = self.n;
            let mut dir = vec![S::zero(); n];
            for (i, di) in dir.iter_mut().enumerate() {
                let row = &self.binv[i * n..(i + 1) * n];
                let mut acc = S::zero();
                for (c, a) in &col {
                    if !row[*c].is_zero() {
                        acc = acc + row[*c].clone() * a.clone();
                    }
                }
                *di = acc;
            }

            // Two-pass ratio test: minimum ratio, then a tie-break among the
            // rows attaining it (within tolerance for floating point).
            let ratio = |i: usize| {
                let xi = if self.xb[i] < S::zero() {
                    S::zero()
                } else {
                    self.xb[i].clone()
                };
                xi / dir[i].clone()
            };
            let mut min_ratio: Option<S> = None;
            for i in 0..n {
                if dir[i] > tol {
                    let r = ratio(i);
                    if min_ratio.as_ref().map_or(true, |m| r < *m) {
                        min_ratio = Some(r);
                    }
                }
            }
            let Some(min_ratio) = min_ratio else {
                return LpOutcome::Infeasible;
            };
            let limit = min_ratio.clone() + tol.clone();
            let mut leave: Option<(usize, S)> = None;
            for i in 0..n {
                if dir[i] <= tol {
                    continue;
                }
                let r = ratio(i);
                if r > limit {
                    continue;
                }
                let take = match &leave {
                    None => true,
                    Some((p, _)) => self.tie_break(i, *p, &dir, bland),
                };
                if take {
                    leave = Some((i, r));
                }
            }
            let (p, step) = leave.expect("minimum ratio row exists");
            if step <= tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(p, q, &dir);
            self.total_iterations += 1;
            // π' = π + d_q · (new row p of B⁻¹).
            let n = self.n;
            for (k, v) in self.binv[p * n..(p + 1) * n].iter().enumerate() {
                if !v.is_zero() {
                    pi[k] = pi[k].clone() + dq.clone() * v.clone();
                }
            }
            since_refresh += 1;
            if self.pivots_since_check == 0 {
                // The basis may just have been refactorized.
                since_refresh = MULTIPLIER_REFRESH;
            }
        }
        self.clean_basic_values();
        LpOutcome::IterationLimit
    }

    fn tie_break(&self, candidate: usize, incumbent: usize, dir: &[S], bland: bool) -> bool {
        if bland {
            self.basis[candidate] < self.basis[incumbent]
        } else {
            dir[candidate] > dir[incumbent]
        }
    }

    fn pivot(&mut self, p: usize, q: usize, dir: &[S]) {
        let n = self.n;
        let dp = dir[p].clone();
        for k in 0..n {
            let v = self.binv[p * n + k].clone();
            if !v.is_zero() {
                self.binv[p * n + k] = v / dp.clone();
            }
        }
        self.xb[p] = self.xb[p].clone() / dp;
        let pivot_row: Vec<S> = self.binv[p * n..(p + 1) * n].to_vec();
        let nz: Vec<usize> = (0..n).filter(|&k| !pivot_row[k].is_zero()).collect();
        let xp = self.xb[p].clone();
        for i in 0..n {
            if i == p || dir[i].is_zero() {
                continue;
            }
            let f = dir[i].clone();
            let row = &mut self.binv[i * n..(i + 1) * n];
            for &k in &nz {
                row[k] = row[k].clone() - f.clone() * pivot_row[k].clone();
            }
            self.xb[i] = self.xb[i].clone() - f * xp.clone();
        }
        let old = self.basis[p];
        self.position[old] = NONBASIC;
        self.basis[p] = q;
        self.position[q] = p;

        if !S::is_exact() {
            self.pivots_since_check += 1;
            if self.pivots_since_check >= 64 {
                self.pivots_since_check = 0;
                if self.factorization_error(p) > 1e-7 {
                    log::debug!("simplex: refactorizing basis after drift");
                    self.refactor();
                }
            }
        }
    }

    /// `max_k |(B⁻¹ B)_{i,k} − δ_{ik}|` for one row `i`.
    fn factorization_error(&self, i: usize) -> f64 {
        let n = self.n;
        let row = &self.binv[i * n..(i + 1) * n];
        let mut worst: f64 = 0.0;
        for (k, &j) in self.basis.iter().enumerate() {
            let mut acc = S::zero();
            for (c, a) in self.column(j) {
                acc = acc + row[c].clone() * a;
            }
            let target = if k == i { 1.0 } else { 0.0 };
            worst = worst.max((acc.to_f64_lossy() - target).abs());
        }
        worst
    }

    /// Recomputes `B⁻¹` and the basic values by Gauss-Jordan elimination.
    fn refactor(&mut self) {
        let n = self.n;
        let mut a = vec![S::zero(); n * n];
        for (k, &j) in self.basis.iter().enumerate() {
            for (c, v) in self.column(j) {
                a[c * n + k] = v;
            }
        }
        let mut inv = vec![S::zero(); n * n];
        for i in 0..n {
            inv[i * n + i] = S::one();
        }
        for col in 0..n {
            let mut piv = col;
            let mut best = S::zero();
            for r in col..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= S::tolerance() {
                log::warn!("simplex: singular basis during refactorization, restarting from slacks");
                self.reset_basis();
                return;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                    inv.swap(piv * n + k, col * n + k);
                }
            }
            let d = a[col * n + col].clone();
            for k in 0..n {
                a[col * n + k] = a[col * n + k].clone() / d.clone();
                inv[col * n + k] = inv[col * n + k].clone() / d.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col].clone();
                if f.is_zero() {
                    continue;
                }
                for k in 0..n {
                    a[r * n + k] = a[r * n + k].clone() - f.clone() * a[col * n + k].clone();
                    inv[r * n + k] = inv[r * n + k].clone() - f.clone() * inv[col * n + k].clone();
                }
            }
        }
        self.xb = (0..n)
            .map(|i| {
                inv[i * n..(i + 1) * n]
                    .iter()
                    .zip(&self.budget)
                    .fold(S::zero(), |acc, (v, b)| acc + v.clone() * b.clone())
            })
            .collect();
        self.binv = inv;
    }

    fn clean_basic_values(&mut self) {
        if S::is_exact() {
            return;
        }
        for v in &mut self.xb {
            if *v < S::zero() {
                *v = S::zero();
            }
        }
    }
}

/// Safe lower bound from an arbitrary non-negative row-dual vector `y`.
///
/// With `w_c = max(0, (Aᵀy)_c − 1)` the pair `(y, w)` is dual feasible, so
/// `1ᵀlb + gᵀy − Σ_{free c} w_c` bounds every completion from below. Also
/// returns, per column, the dual slack `max(0, 1 − (Aᵀy)_c)` and `w_c`: fixing a
/// column at 0 to one raises the bound by at least the slack, and fixing a
/// column with positive `w_c` to zero raises it by at least `w_c`.
pub fn dual_bound(
    num_vars: usize,
    rows: &[ModelRow],
    lb: &[bool],
    ub: &[bool],
    y: &[f64],
) -> (f64, Vec<f64>, Vec<f64>) {
    let mut aty = vec![0.0; num_vars];
    let mut bound = lb.iter().filter(|&&l| l).count() as f64;
    for (row, &yr) in rows.iter().zip(y) {
        let yr = yr.max(0.0);
        if yr == 0.0 {
            continue;
        }
        let mut g = row.rhs as f64;
        for &(c, a) in &row.entries {
            aty[c] += a as f64 * yr;
            if lb[c] {
                g -= a as f64;
            }
        }
        bound += g * yr;
    }
    let mut slack = vec![0.0; num_vars];
    let mut excess = vec![0.0; num_vars];
    for c in 0..num_vars {
        slack[c] = (1.0 - aty[c]).max(0.0);
        excess[c] = (aty[c] - 1.0).max(0.0);
        if ub[c] && !lb[c] {
            bound -= excess[c];
        }
    }
    (bound, slack, excess)
}

/// Greedy dual ascent: visits rows with positive residual demand, sparsest
/// first, and raises each `y_r` as far as the free columns' remaining budget
/// allows. The result is feasible for [`dual_bound`] without any LP solve.
pub fn dual_ascent(num_vars: usize, rows: &[ModelRow], lb: &[bool], ub: &[bool]) -> Vec<f64> {
    let mut budget = vec![1.0f64; num_vars];
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&r| (rows[r].entries.len(), r));
    let mut y = vec![0.0; rows.len()];
    for r in order {
        let row = &rows[r];
        let fixed: u64 = row
            .entries
            .iter()
            .filter(|&&(c, _)| lb[c])
            .map(|&(_, a)| a as u64)
            .sum();
        if fixed >= row.rhs as u64 {
            continue;
        }
        let step = row
            .entries
            .iter()
            .filter(|&&(c, _)| ub[c] && !lb[c])
            .map(|&(c, a)| budget[c] / a as f64)
            .fold(f64::INFINITY, f64::min);
        if !step.is_finite() || step <= 0.0 {
            continue;
        }
        y[r] = step;
        for &(c, a) in &row.entries {
            if ub[c] && !lb[c] {
                budget[c] = (budget[c] - a as f64 * step).max(0.0);
            }
        }
    }
    y
}

/// Result of a standalone relaxation solve.
#[derive(Debug, Clone)]
pub struct RelaxationBound<S> {
    pub outcome: LpOutcome,
    /// Relaxation optimum (exact for exact scalars).
    pub value: S,
    /// Primal point `x = lb + π`.
    pub primal: Vec<S>,
}

/// Solves the relaxation with the given fixings from scratch.
pub fn relaxation<S: LpScalar>(num_vars: usize, rows: &[ModelRow], fixings: &[Option<bool>]) -> RelaxationBound<S> {
    let lb: Vec<bool> = fixings.iter().map(|f| *f == Some(true)).collect();
    let ub: Vec<bool> = fixings.iter().map(|f| *f != Some(false)).collect();
    let mut lp = DualSimplex::<S>::new(num_vars, rows);
    lp.set_bounds(&lb, &ub);
    let cap = 100 * (rows.len() + 2 * num_vars) + 10_000;
    let outcome = lp.solve(cap);
    let pi = lp.multipliers();
    let value = if S::is_exact() || outcome == LpOutcome::Infeasible {
        lp.objective()
    } else {
        // Strip the budget perturbation: evaluate the certified bound.
        let (b, _, _) = dual_bound(num_vars, rows, &lb, &ub, &lp.row_duals_f64());
        S::from_f64(b).unwrap_or_else(|| lp.objective())
    };
    let primal = pi
        .into_iter()
        .zip(&lb)
        .map(|(p, &l)| if l { S::one() } else { p })
        .collect();
    RelaxationBound { value, outcome, primal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn cyclic(len: usize, v: &[usize], rhs: u32) -> Vec<ModelRow> {
        (0..len)
            .map(|a| {
                let mut entries: Vec<(usize, u32)> = v.iter().map(|&k| ((a + len - k) % len, 1)).collect();
                entries.sort_unstable();
                ModelRow { entries, rhs }
            })
            .collect()
    }

    #[test]
    fn half_profile_bound_is_two() {
        let rows = cyclic(4, &[0, 1], 1);
        let r = relaxation::<f64>(4, &rows, &[None; 4]);
        assert_eq!(r.outcome, LpOutcome::Optimal);
        assert!((r.value - 2.0).abs() < 1e-5);
        let r = relaxation::<BigRational>(4, &rows, &[None; 4]);
        assert_eq!(r.value, BigRational::from_integer(2.into()));
    }

    #[test]
    fn all_ones_bound_is_k() {
        let rows = cyclic(5, &[0, 1, 2, 3, 4], 3);
        let r = relaxation::<BigRational>(5, &rows, &[None; 5]);
        assert_eq!(r.value, BigRational::from_integer(3.into()));
    }

    #[test]
    fn fractional_optimum_and_fixings() {
        // Triangle: every pair must be covered; LP optimum 3/2.
        let rows = vec![
            ModelRow {
                entries: vec![(0, 1), (1, 1)],
                rhs: 1,
            },
            ModelRow {
                entries: vec![(1, 1), (2, 1)],
                rhs: 1,
            },
            ModelRow {
                entries: vec![(0, 1), (2, 1)],
                rhs: 1,
            },
        ];
        let r = relaxation::<BigRational>(3, &rows, &[None; 3]);
        assert_eq!(r.value, BigRational::new(3.into(), 2.into()));
        let r = relaxation::<f64>(3, &rows, &[Some(false), None, None]);
        assert!((r.value - 2.0).abs() < 1e-5);
        let r = relaxation::<f64>(3, &rows, &[Some(false), Some(false), None]);
        assert_eq!(r.outcome, LpOutcome::Infeasible);
        let r = relaxation::<f64>(3, &rows, &[Some(true), None, None]);
        assert!((r.value - 2.0).abs() < 1e-5);
        assert!((r.primal[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn safe_bound_agrees_at_optimum() {
        let rows = cyclic(7, &[0, 1, 3], 1);
        let mut lp = DualSimplex::<f64>::new(7, &rows);
        let lb = vec![false; 7];
        let ub = vec![true; 7];
        lp.set_bounds(&lb, &ub);
        assert_eq!(lp.solve(10_000), LpOutcome::Optimal);
        let (b, _, _) = dual_bound(7, &rows, &lb, &ub, &lp.row_duals_f64());
        assert!((b - lp.objective()).abs() < 1e-5);
        assert!((b - 7.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn dual_ascent_is_a_valid_bound() {
        let rows = cyclic(8, &[0, 1, 5], 1);
        let (lb, ub) = (vec![false; 8], vec![true; 8]);
        let y = dual_ascent(8, &rows, &lb, &ub);
        let (b, _, excess) = dual_bound(8, &rows, &lb, &ub, &y);
        assert!(excess.iter().all(|&e| e < 1e-12));
        let lp = relaxation::<f64>(8, &rows, &[None; 8]);
        assert!(b > 0.0 && b <= lp.value + 1e-9);
    }

    #[test]
    fn warm_start_matches_cold() {
        let rows = cyclic(9, &[0, 2, 3], 1);
        let mut lp = DualSimplex::<f64>::new(9, &rows);
        lp.set_bounds(&[false; 9], &[true; 9]);
        lp.solve(10_000);
        let mut lb = vec![false; 9];
        lb[4] = true;
        let mut ub = vec![true; 9];
        ub[0] = false;
        lp.set_bounds(&lb, &ub);
        assert_eq!(lp.solve(10_000), LpOutcome::Optimal);
        let mut fix = vec![None; 9];
        fix[4] = Some(true);
        fix[0] = Some(false);
        let cold = relaxation::<f64>(9, &rows, &fix);
        assert!((lp.objective() - cold.value).abs() < 1e-5);
    }
}
