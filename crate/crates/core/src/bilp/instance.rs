use thiserror::Error;

use crate::coverage::{CoverageProblem, PatternVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("access profile of target {target}, sub-constellation {sub} is all zero")]
    ZeroGenerator { target: usize, sub: usize },
    #[error("target {target} needs {rhs} satellites in view at step {time} but at most {available} can ever be")]
    Uncoverable {
        target: usize,
        time: usize,
        rhs: u32,
        available: u32,
    },
    #[error("row {row}: column {col} outside [0, {num_vars})")]
    ColumnOutOfRange { row: usize, col: usize, num_vars: usize },
    #[error("row {row}: duplicate column {col}")]
    DuplicateColumn { row: usize, col: usize },
    #[error("num_vars {num_vars} is not a multiple of sub-constellation count {subs}")]
    Shape { num_vars: usize, subs: usize },
    #[error("expected {expected} patterns, got {got}")]
    PatternCount { expected: usize, got: usize },
}

/// One covering constraint `Σ coeff·x[col] ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverRow {
    pub target: usize,
    pub time: usize,
    /// Sorted by column, coefficients positive.
    pub entries: Vec<(usize, u32)>,
    pub rhs: u32,
}

impl CoverRow {
    pub fn coefficient_sum(&self) -> u64 {
        self.entries.iter().map(|&(_, a)| a as u64).sum()
    }

    pub fn activity(&self, x: &[bool]) -> u64 {
        self.entries
            .iter()
            .filter(|&&(c, _)| x[c])
            .map(|&(_, a)| a as u64)
            .sum()
    }
}

/// Covering program `min 1ᵀx  s.t.  Σ_z V_j^(z) x^(z) ≥ f_j,  x binary`.
///
/// Columns are grouped by sub-constellation then shift (`z·L + β`); rows by
/// target then time. Vacuous rows (`f = 0`) are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringInstance {
    rows: Vec<CoverRow>,
    num_subs: usize,
    length: usize,
    num_targets: usize,
    /// Built from circulant blocks, so invariant under a common cyclic shift
    /// of every pattern when each target's requirement is constant in time.
    circulant: bool,
}

impl CoveringInstance {
    pub fn assemble(problem: &CoverageProblem) -> Result<Self, InstanceError> {
        let length = problem.length();
        let subs = problem.num_subconstellations();
        for j in 0..problem.num_targets() {
            for z in 0..subs {
                if problem.profile(j, z).is_all_zero() {
                    return Err(InstanceError::ZeroGenerator { target: j, sub: z });
                }
            }
        }
        let mut rows = Vec::new();
        for j in 0..problem.num_targets() {
            let supports: Vec<Vec<usize>> = (0..subs).map(|z| problem.profile(j, z).support().collect()).collect();
            for (alpha, &rhs) in problem.requirement(j).folds().iter().enumerate() {
                if rhs == 0 {
                    continue;
                }
                // Row α of V: columns β with v[(α − β) mod L] = 1.
                let mut entries = Vec::new();
                for (z, support) in supports.iter().enumerate() {
                    for &k in support {
                        entries.push((z * length + (alpha + length - k) % length, 1));
                    }
                }
                entries.sort_unstable();
                let row = CoverRow {
                    target: j,
                    time: alpha,
                    entries,
                    rhs,
                };
                check_coverable(&row)?;
                rows.push(row);
            }
        }
        Ok(Self {
            rows,
            num_subs: subs,
            length,
            num_targets: problem.num_targets(),
            circulant: true,
        })
    }

    /// Builds an instance from explicit rows. Entries are sorted and zero
    /// coefficients dropped; rows with `rhs = 0` are discarded.
    pub fn from_rows(num_subs: usize, num_vars: usize, rows: Vec<CoverRow>) -> Result<Self, InstanceError> {
        if num_subs == 0 || num_vars % num_subs != 0 {
            return Err(InstanceError::Shape {
                num_vars,
                subs: num_subs,
            });
        }
        let mut kept = Vec::with_capacity(rows.len());
        for (r, mut row) in rows.into_iter().enumerate() {
            if row.rhs == 0 {
                continue;
            }
            row.entries.retain(|&(_, a)| a > 0);
            row.entries.sort_unstable();
            for w in row.entries.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(InstanceError::DuplicateColumn { row: r, col: w[0].0 });
                }
            }
            if let Some(&(col, _)) = row.entries.iter().find(|&&(c, _)| c >= num_vars) {
                return Err(InstanceError::ColumnOutOfRange { row: r, col, num_vars });
            }
            check_coverable(&row)?;
            kept.push(row);
        }
        let num_targets = kept.iter().map(|r| r.target + 1).max().unwrap_or(0);
        Ok(Self {
            rows: kept,
            num_subs,
            length: num_vars / num_subs,
            num_targets,
            circulant: false,
        })
    }

    pub fn rows(&self) -> &[CoverRow] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_subs * self.length
    }

    pub fn num_subs(&self) -> usize {
        self.num_subs
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    /// Row count of the full stacked system before vacuous rows are dropped.
    pub fn logical_rows(&self) -> usize {
        self.num_targets * self.length
    }

    /// Whether a common cyclic shift of all patterns maps solutions to
    /// solutions.
    pub fn is_shift_invariant(&self) -> bool {
        if !self.circulant {
            return false;
        }
        let mut per_target: Vec<(usize, Option<u32>, bool)> = vec![(0, None, true); self.num_targets];
        for row in &self.rows {
            let entry = &mut per_target[row.target];
            entry.0 += 1;
            match entry.1 {
                None => entry.1 = Some(row.rhs),
                Some(f) if f != row.rhs => entry.2 = false,
                _ => {}
            }
        }
        per_target
            .iter()
            .all(|&(count, _, uniform)| count == 0 || (count == self.length && uniform))
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.rows.iter().all(|r| r.activity(x) >= r.rhs as u64)
    }

    /// Splits a flat assignment into per-sub-constellation patterns.
    pub fn split(&self, x: &[bool]) -> Vec<PatternVector> {
        x.chunks(self.length).map(|c| PatternVector::new(c.to_vec())).collect()
    }

    pub fn flatten(&self, patterns: &[PatternVector]) -> Result<Vec<bool>, InstanceError> {
        if patterns.len() != self.num_subs {
            return Err(InstanceError::PatternCount {
                expected: self.num_subs,
                got: patterns.len(),
            });
        }
        Ok(patterns.iter().flat_map(|p| p.bits().iter().copied()).collect())
    }

    /// All-ones assignment; feasible for every valid instance.
    pub fn trivial_solution(&self) -> Vec<bool> {
        vec![true; self.num_vars()]
    }
}

fn check_coverable(row: &CoverRow) -> Result<(), InstanceError> {
    let available = row.coefficient_sum();
    if available < row.rhs as u64 {
        return Err(InstanceError::Uncoverable {
            target: row.target,
            time: row.time,
            rhs: row.rhs,
            available: available.min(u32::MAX as u64) as u32,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverageRequirement;
    use crate::geodesy::AccessProfile;

    #[test]
    fn single_block_is_circulant() {
        let problem = CoverageProblem::single(
            vec![AccessProfile::from_bits(&[1, 1, 0, 0])],
            vec![CoverageRequirement::constant(4, 1)],
        )
        .unwrap();
        let inst = CoveringInstance::assemble(&problem).unwrap();
        assert_eq!(inst.num_rows(), 4);
        assert_eq!(inst.num_vars(), 4);
        assert_eq!(inst.rows()[0].entries, vec![(0, 1), (3, 1)]);
        assert_eq!(inst.rows()[2].entries, vec![(1, 1), (2, 1)]);
        assert!(inst.is_feasible(&[true, false, true, false]));
        assert!(!inst.is_feasible(&[true, true, false, false]));
    }

    #[test]
    fn vacuous_rows_dropped_and_stacking() {
        let problem = CoverageProblem::new(
            vec![
                vec![
                    AccessProfile::from_bits(&[1, 0, 0]),
                    AccessProfile::from_bits(&[1, 1, 1]),
                ],
                vec![
                    AccessProfile::from_bits(&[0, 1, 0]),
                    AccessProfile::from_bits(&[0, 0, 1]),
                ],
            ],
            vec![
                CoverageRequirement::new(vec![1, 0, 2]),
                CoverageRequirement::new(vec![0, 0, 1]),
            ],
        )
        .unwrap();
        let inst = CoveringInstance::assemble(&problem).unwrap();
        assert_eq!(inst.num_rows(), 3);
        assert_eq!(inst.logical_rows(), 6);
        assert_eq!(inst.num_vars(), 6);
        let r = &inst.rows()[1];
        assert_eq!((r.target, r.time, r.rhs), (0, 2, 2));
        assert_eq!(r.entries, vec![(2, 1), (3, 1), (4, 1), (5, 1)]);
        let r = &inst.rows()[2];
        assert_eq!(r.entries, vec![(1, 1), (3, 1)]);
    }

    #[test]
    fn zero_generator_and_uncoverable() {
        let problem =
            CoverageProblem::single(vec![AccessProfile::zeros(3)], vec![CoverageRequirement::constant(3, 1)]).unwrap();
        assert_eq!(
            CoveringInstance::assemble(&problem),
            Err(InstanceError::ZeroGenerator { target: 0, sub: 0 })
        );
        let problem = CoverageProblem::single(
            vec![AccessProfile::from_bits(&[1, 0, 0])],
            vec![CoverageRequirement::constant(3, 2)],
        )
        .unwrap();
        assert!(matches!(
            CoveringInstance::assemble(&problem),
            Err(InstanceError::Uncoverable {
                rhs: 2,
                available: 1,
                ..
            })
        ));
    }

    #[test]
    fn from_rows_validation() {
        let row = |entries: Vec<(usize, u32)>, rhs| CoverRow {
            target: 0,
            time: 0,
            entries,
            rhs,
        };
        assert!(CoveringInstance::from_rows(1, 3, vec![row(vec![(3, 1)], 1)]).is_err());
        assert!(CoveringInstance::from_rows(1, 3, vec![row(vec![(1, 1), (1, 2)], 1)]).is_err());
        assert!(CoveringInstance::from_rows(2, 3, vec![]).is_err());
        let inst = CoveringInstance::from_rows(1, 3, vec![row(vec![(2, 1), (0, 0)], 1), row(vec![], 0)]).unwrap();
        assert_eq!(inst.rows().len(), 1);
        assert_eq!(inst.rows()[0].entries, vec![(2, 1)]);
    }
}
