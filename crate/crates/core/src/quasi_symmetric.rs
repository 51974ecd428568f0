//! Baseline solver: (quasi-)symmetric patterns with uniform temporal spacing.
//!
//! Satellites are placed at `nint(n₁ + η(k−1)) mod L` with `η = L/N`, and the
//! search walks `N` upward from 1 and `n₁` over `[0, nint(η) − 1]` until every
//! target requirement is met.

use num_rational::Ratio;
use thiserror::Error;

use crate::coverage::{meets_requirement, CoverageRequirement, PatternVector};
use crate::geodesy::AccessProfile;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuasiSymmetricError {
    #[error("satellite count {n_sats} outside [1, {len}]")]
    SatelliteCount { n_sats: usize, len: usize },
    #[error("first shift n1 = {n1} outside [0, {len})")]
    FirstShift { n1: usize, len: usize },
    #[error("nint spacing maps satellites {first} and {second} to slot {slot}")]
    Collision { first: usize, second: usize, slot: usize },
    #[error("need at least one target")]
    NoTargets,
    #[error("expected {expected} requirements, got {got}")]
    RequirementCount { expected: usize, got: usize },
    #[error("target {target}: length {got} differs from {expected}")]
    LengthMismatch { target: usize, expected: usize, got: usize },
    #[error("target {0} has an all-zero access profile")]
    ZeroProfile(usize),
    #[error("no quasi-symmetric pattern with N <= L = {0} satisfies the requirements")]
    Infeasible(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiSymmetricSolution {
    pub pattern: PatternVector,
    pub n_sats: usize,
    pub n1: usize,
    /// `η = L/N`; `None` for the empty pattern of a vacuous requirement.
    pub spacing: Option<Ratio<usize>>,
}

/// `nint(L·m / N)` with halves rounded away from zero, in integer arithmetic.
fn nint_fraction(len: usize, m: usize, n_sats: usize) -> usize {
    (2 * len * m + n_sats) / (2 * n_sats)
}

/// Impulse indices of the quasi-symmetric pattern, in `k` order.
pub fn pattern_indices(len: usize, n_sats: usize, n1: usize) -> Result<Vec<usize>, QuasiSymmetricError> {
    if n_sats == 0 || n_sats > len {
        return Err(QuasiSymmetricError::SatelliteCount { n_sats, len });
    }
    if n1 >= len {
        return Err(QuasiSymmetricError::FirstShift { n1, len });
    }
    let mut owner = vec![usize::MAX; len];
    let mut out = Vec::with_capacity(n_sats);
    for k in 0..n_sats {
        let slot = (n1 + nint_fraction(len, k, n_sats)) % len;
        if owner[slot] != usize::MAX {
            return Err(QuasiSymmetricError::Collision {
                first: owner[slot] + 1,
                second: k + 1,
                slot,
            });
        }
        owner[slot] = k;
        out.push(slot);
    }
    Ok(out)
}

pub fn build_pattern(len: usize, n_sats: usize, n1: usize) -> Result<PatternVector, QuasiSymmetricError> {
    let idx = pattern_indices(len, n_sats, n1)?;
    Ok(PatternVector::from_indices(len, &idx).expect("collision-free indices are in range and distinct"))
}

/// Upper end (inclusive) of the `n₁` scan, `nint(η) − 1`, clamped at 0.
pub fn n1_scan_limit(len: usize, n_sats: usize) -> usize {
    nint_fraction(len, 1, n_sats).saturating_sub(1)
}

/// Smallest `N`, then first `n₁`, for which every target is satisfied.
pub fn solve(
    profiles: &[AccessProfile],
    requirements: &[CoverageRequirement],
) -> Result<QuasiSymmetricSolution, QuasiSymmetricError> {
    if profiles.is_empty() {
        return Err(QuasiSymmetricError::NoTargets);
    }
    if requirements.len() != profiles.len() {
        return Err(QuasiSymmetricError::RequirementCount {
            expected: profiles.len(),
            got: requirements.len(),
        });
    }
    let len = profiles[0].len();
    for (j, (v, f)) in profiles.iter().zip(requirements).enumerate() {
        for got in [v.len(), f.len()] {
            if got != len {
                return Err(QuasiSymmetricError::LengthMismatch {
                    target: j,
                    expected: len,
                    got,
                });
            }
        }
        if v.is_all_zero() && !f.is_vacuous() {
            return Err(QuasiSymmetricError::ZeroProfile(j));
        }
    }
    if requirements.iter().all(CoverageRequirement::is_vacuous) {
        return Ok(QuasiSymmetricSolution {
            pattern: PatternVector::zeros(len),
            n_sats: 0,
            n1: 0,
            spacing: None,
        });
    }
    // A target needing f folds at some step needs at least f satellites.
    let n_min = requirements
        .iter()
        .flat_map(|f| f.folds().iter().copied())
        .max()
        .unwrap_or(1)
        .max(1) as usize;
    for n_sats in n_min..=len {
        for n1 in 0..=n1_scan_limit(len, n_sats) {
            let idx = match pattern_indices(len, n_sats, n1) {
                Ok(idx) => idx,
                Err(QuasiSymmetricError::Collision { .. }) => continue,
                Err(e) => return Err(e),
            };
            let ok = profiles
                .iter()
                .zip(requirements)
                .all(|(v, f)| meets_requirement(v, &idx, f));
            if ok {
                log::debug!("quasi-symmetric hit at N = {n_sats}, n1 = {n1}");
                return Ok(QuasiSymmetricSolution {
                    pattern: PatternVector::from_indices(len, &idx).expect("valid indices"),
                    n_sats,
                    n1,
                    spacing: Some(Ratio::new(len, n_sats)),
                });
            }
        }
    }
    Err(QuasiSymmetricError::Infeasible(len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_one_shape() {
        let idx = pattern_indices(720, 22, 0).unwrap();
        assert_eq!(
            idx,
            vec![
                0, 33, 65, 98, 131, 164, 196, 229, 262, 295, 327, 360, 393, 425, 458, 491, 524, 556, 589, 622, 655, 687
            ]
        );
        assert_eq!(build_pattern(720, 2, 0).unwrap().indices(), vec![0, 360]);
        assert_eq!(build_pattern(6, 3, 1).unwrap().indices(), vec![1, 3, 5]);
    }

    #[test]
    fn half_rounds_away_from_zero() {
        // L/N = 2.5: 0, 2.5 -> 3, 5, 7.5 -> 8
        assert_eq!(pattern_indices(10, 4, 0).unwrap(), vec![0, 3, 5, 8]);
        assert_eq!(n1_scan_limit(10, 4), 2);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(
            build_pattern(5, 0, 0),
            Err(QuasiSymmetricError::SatelliteCount { .. })
        ));
        assert!(matches!(
            build_pattern(5, 6, 0),
            Err(QuasiSymmetricError::SatelliteCount { .. })
        ));
        assert!(matches!(
            build_pattern(5, 2, 5),
            Err(QuasiSymmetricError::FirstShift { .. })
        ));
        assert!(build_pattern(5, 5, 4).is_ok());
    }

    #[test]
    fn solves_tiny_cases() {
        let ones = AccessProfile::from_bits(&[1; 8]);
        let sol = solve(&[ones], &[CoverageRequirement::constant(8, 1)]).unwrap();
        assert_eq!((sol.n_sats, sol.n1), (1, 0));

        let v = AccessProfile::from_bits(&[1, 1, 0, 0]);
        let sol = solve(&[v], &[CoverageRequirement::constant(4, 1)]).unwrap();
        assert_eq!((sol.n_sats, sol.n1), (2, 0));
        assert_eq!(sol.pattern.indices(), vec![0, 2]);
        assert_eq!(sol.spacing, Some(Ratio::new(2, 1)));
    }

    #[test]
    fn vacuous_and_infeasible() {
        let v = AccessProfile::from_bits(&[1, 0, 0]);
        let sol = solve(&[v.clone()], &[CoverageRequirement::constant(3, 0)]).unwrap();
        assert_eq!(sol.n_sats, 0);
        assert_eq!(
            solve(&[v], &[CoverageRequirement::constant(3, 2)]),
            Err(QuasiSymmetricError::Infeasible(3))
        );
        assert_eq!(
            solve(&[AccessProfile::zeros(3)], &[CoverageRequirement::constant(3, 1)]),
            Err(QuasiSymmetricError::ZeroProfile(0))
        );
    }
}
