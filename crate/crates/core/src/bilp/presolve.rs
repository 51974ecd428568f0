//! Reductions that preserve the set of optimal objective values:
//! coefficient clipping, duplicate and dominated row removal, empty and
//! dominated column fixing, and cyclic-symmetry fixing.

use std::collections::HashMap;

use rayon::prelude::*;

use super::instance::CoveringInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelRow {
    pub entries: Vec<(usize, u32)>,
    pub rhs: u32,
}

/// Presolved covering model in the original column space.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub num_vars: usize,
    pub rows: Vec<ModelRow>,
    /// Column-major view: `(row, coeff)` for every row containing the column.
    pub cols: Vec<Vec<(usize, u32)>>,
    /// Values forced by presolve. Fixings never cut off every optimum.
    pub fixed: Vec<Option<bool>>,
    pub stats: PresolveStats,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct PresolveStats {
    pub input_rows: usize,
    pub duplicate_rows: usize,
    pub dominated_rows: usize,
    pub empty_columns: usize,
    pub dominated_columns: usize,
    pub symmetry_fixed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresolveOptions {
    pub row_dominance: bool,
    pub column_dominance: bool,
    pub symmetry: bool,
}

impl Default for PresolveOptions {
    fn default() -> Self {
        Self {
            row_dominance: true,
            column_dominance: true,
            symmetry: true,
        }
    }
}

impl ReducedModel {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.rows.iter().all(|r| {
            r.entries
                .iter()
                .filter(|&&(c, _)| x[c])
                .map(|&(_, a)| a as u64)
                .sum::<u64>()
                >= r.rhs as u64
        })
    }

    fn build_cols(num_vars: usize, rows: &[ModelRow]) -> Vec<Vec<(usize, u32)>> {
        let mut cols = vec![Vec::new(); num_vars];
        for (r, row) in rows.iter().enumerate() {
            for &(c, a) in &row.entries {
                cols[c].push((r, a));
            }
        }
        cols
    }
}

/// The instance rows as-is (no clipping, merging or fixing).
pub fn unreduced(instance: &CoveringInstance) -> ReducedModel {
    let num_vars = instance.num_vars();
    let rows: Vec<ModelRow> = instance
        .rows()
        .iter()
        .map(|r| ModelRow {
            entries: r.entries.clone(),
            rhs: r.rhs,
        })
        .collect();
    let cols = ReducedModel::build_cols(num_vars, &rows);
    ReducedModel {
        num_vars,
        stats: PresolveStats {
            input_rows: rows.len(),
            ..Default::default()
        },
        rows,
        cols,
        fixed: vec![None; num_vars],
    }
}

/// Runs every enabled reduction.
pub fn presolve(instance: &CoveringInstance, options: PresolveOptions) -> ReducedModel {
    let num_vars = instance.num_vars();
    let mut stats = PresolveStats {
        input_rows: instance.num_rows(),
        ..Default::default()
    };

    // A coefficient above the right-hand side can be lowered to it without
    // changing the binary feasible set.
    let clipped: Vec<ModelRow> = instance
        .rows()
        .iter()
        .map(|r| ModelRow {
            entries: r.entries.iter().map(|&(c, a)| (c, a.min(r.rhs))).collect(),
            rhs: r.rhs,
        })
        .collect();

    // Identical supports: keep one copy with the largest rhs.
    let mut by_entries: HashMap<&[(usize, u32)], usize> = HashMap::new();
    let mut merged: Vec<ModelRow> = Vec::with_capacity(clipped.len());
    for row in &clipped {
        match by_entries.get(row.entries.as_slice()) {
            Some(&k) => {
                merged[k].rhs = merged[k].rhs.max(row.rhs);
                stats.duplicate_rows += 1;
            }
            None => {
                by_entries.insert(row.entries.as_slice(), merged.len());
                merged.push(row.clone());
            }
        }
    }
    // The survivor of a merge is exactly the clipped form of the row with
    // the largest rhs, which implies every row it absorbed.

    let rows = if options.row_dominance {
        let (kept, removed) = remove_dominated_rows(num_vars, merged);
        stats.dominated_rows = removed;
        kept
    } else {
        merged
    };

    let cols = ReducedModel::build_cols(num_vars, &rows);
    let mut fixed = vec![None; num_vars];
    for (c, col) in cols.iter().enumerate() {
        if col.is_empty() {
            fixed[c] = Some(false);
            stats.empty_columns += 1;
        }
    }

    let symmetric = options.symmetry && instance.num_subs() == 1 && !rows.is_empty() && instance.is_shift_invariant();
    if symmetric {
        // Some satellite can always be rotated onto shift 0.
        if fixed[0].is_none() {
            fixed[0] = Some(true);
            stats.symmetry_fixed = true;
        }
    } else if options.column_dominance && rows.iter().all(|r| r.rhs == 1) {
        stats.dominated_columns = fix_dominated_columns(num_vars, &cols, &mut fixed);
    }

    ReducedModel {
        num_vars,
        rows,
        cols,
        fixed,
        stats,
    }
}

struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    fn from_indices(n: usize, idx: impl Iterator<Item = usize>) -> Self {
        let mut words = vec![0u64; n.div_ceil(64)];
        for i in idx {
            words[i / 64] |= 1 << (i % 64);
        }
        Self { words }
    }

    fn is_subset_of(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

/// `r` implies `s` when `f_r ≥ f_s` and every coefficient of `s` is at least
/// `min(a_r, f_s)`; then any binary point meeting `r` meets `s`.
fn row_implies(r: &ModelRow, s: &ModelRow) -> bool {
    if r.rhs < s.rhs {
        return false;
    }
    let mut j = 0;
    for &(c, a) in &r.entries {
        while j < s.entries.len() && s.entries[j].0 < c {
            j += 1;
        }
        if j == s.entries.len() || s.entries[j].0 != c || s.entries[j].1 < a.min(s.rhs) {
            return false;
        }
    }
    true
}

fn remove_dominated_rows(num_vars: usize, rows: Vec<ModelRow>) -> (Vec<ModelRow>, usize) {
    let bits: Vec<Bitset> = rows
        .iter()
        .map(|r| Bitset::from_indices(num_vars, r.entries.iter().map(|&(c, _)| c)))
        .collect();
    // Every dominator of s has its support inside s's, so its first column
    // lies in s: index rows by first column.
    let mut by_first = vec![Vec::new(); num_vars];
    for (r, row) in rows.iter().enumerate() {
        if let Some(&(c, _)) = row.entries.first() {
            by_first[c].push(r);
        }
    }
    let dominated: Vec<bool> = (0..rows.len())
        .into_par_iter()
        .map(|s| {
            let s_row = &rows[s];
            s_row.entries.iter().any(|&(c, _)| {
                by_first[c].iter().any(|&r| {
                    r != s
                        && rows[r].entries.len() <= s_row.entries.len()
                        && bits[r].is_subset_of(&bits[s])
                        && row_implies(&rows[r], s_row)
                        && (!row_implies(s_row, &rows[r]) || r < s)
                })
            })
        })
        .collect();
    let removed = dominated.iter().filter(|&&d| d).count();
    let kept = rows
        .into_iter()
        .zip(dominated)
        .filter(|(_, d)| !d)
        .map(|(r, _)| r)
        .collect();
    (kept, removed)
}

/// Unicost cover with unit right-hand sides: a column whose rows are a subset
/// of another free column's rows can be swapped out of any solution.
fn fix_dominated_columns(num_vars: usize, cols: &[Vec<(usize, u32)>], fixed: &mut [Option<bool>]) -> usize {
    let num_rows = cols
        .iter()
        .flat_map(|c| c.iter().map(|&(r, _)| r + 1))
        .max()
        .unwrap_or(0);
    let bits: Vec<Bitset> = cols
        .iter()
        .map(|c| Bitset::from_indices(num_rows, c.iter().map(|&(r, _)| r)))
        .collect();
    let row_cols = {
        let mut rc = vec![Vec::new(); num_rows];
        for (c, col) in cols.iter().enumerate() {
            for &(r, _) in col {
                rc[r].push(c);
            }
        }
        rc
    };
    let free: Vec<bool> = fixed.iter().map(Option::is_none).collect();
    let dominated: Vec<bool> = (0..num_vars)
        .into_par_iter()
        .map(|c| {
            if !free[c] || cols[c].is_empty() {
                return false;
            }
            let first_row = cols[c][0].0;
            row_cols[first_row].iter().any(|&d| {
                d != c
                    && free[d]
                    && cols[d].len() >= cols[c].len()
                    && bits[c].is_subset_of(&bits[d])
                    && (cols[d].len() > cols[c].len() || d < c)
            })
        })
        .collect();
    let mut count = 0;
    for (c, d) in dominated.into_iter().enumerate() {
        if d {
            fixed[c] = Some(false);
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilp::instance::CoverRow;

    fn inst(num_vars: usize, rows: &[(&[usize], u32)]) -> CoveringInstance {
        CoveringInstance::from_rows(
            1,
            num_vars,
            rows.iter()
                .enumerate()
                .map(|(t, (cols, rhs))| CoverRow {
                    target: 0,
                    time: t,
                    entries: cols.iter().map(|&c| (c, 1)).collect(),
                    rhs: *rhs,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn duplicates_and_supersets_removed() {
        let i = inst(5, &[(&[0, 1], 1), (&[0, 1], 1), (&[0, 1, 2], 1), (&[3, 4], 1)]);
        let m = presolve(&i, PresolveOptions::default());
        assert_eq!(m.stats.duplicate_rows, 1);
        assert_eq!(m.stats.dominated_rows, 1);
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.fixed[2], Some(false));
    }

    #[test]
    fn higher_rhs_subset_not_dominated_by_lower() {
        let i = inst(3, &[(&[0, 1], 1), (&[0, 1, 2], 2)]);
        let m = presolve(&i, PresolveOptions::default());
        assert_eq!(m.rows.len(), 2);
        let i = inst(3, &[(&[0, 1], 2), (&[0, 1, 2], 1)]);
        let m = presolve(&i, PresolveOptions::default());
        assert_eq!(m.rows.len(), 1);
    }

    #[test]
    fn identical_columns_keep_lowest() {
        let i = inst(3, &[(&[0, 1], 1), (&[0, 1, 2], 1)]);
        let m = presolve(
            &i,
            PresolveOptions {
                row_dominance: false,
                ..Default::default()
            },
        );
        assert_eq!(m.fixed, vec![None, Some(false), Some(false)]);
    }

    #[test]
    fn clipping() {
        let i = CoveringInstance::from_rows(
            1,
            2,
            vec![CoverRow {
                target: 0,
                time: 0,
                entries: vec![(0, 5), (1, 1)],
                rhs: 2,
            }],
        )
        .unwrap();
        let m = presolve(&i, PresolveOptions::default());
        assert_eq!(m.rows[0].entries, vec![(0, 2), (1, 1)]);
    }
}
