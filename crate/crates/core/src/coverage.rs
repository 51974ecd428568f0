//! Coverage algebra: pattern vectors, circular convolution, circulant
//! operators and the stacked multi-target / multi-sub-constellation system.
//!
//! All arithmetic is integer. A coverage timeline is the circular convolution
//! of a seed access profile with a pattern vector; summing over
//! sub-constellations and stacking over targets gives the full system.

use std::io::{self, Write};

use thiserror::Error;

use crate::geodesy::AccessProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("impulse index {index} outside [0, {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("duplicate impulse index {0}")]
    DuplicateIndex(usize),
    #[error("expected {expected} pattern vectors (one per sub-constellation), got {got}")]
    PatternCount { expected: usize, got: usize },
    #[error("expected {expected} requirements (one per target), got {got}")]
    RequirementCount { expected: usize, got: usize },
    #[error("target {target} has {got} sub-constellation profiles, expected {expected}")]
    RaggedProfiles { target: usize, expected: usize, got: usize },
    #[error("problem needs at least one target and one sub-constellation")]
    EmptyProblem,
    #[error("vectors must have positive length")]
    ZeroLength,
    #[error(
        "sub-constellation repeat periods are not synchronized: {first} s vs {other} s (sub-constellation {index})"
    )]
    Unsynchronized { first: f64, other: f64, index: usize },
}

/// Binary vector of satellite time shifts relative to the seed satellite.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternVector {
    impulses: Vec<bool>,
}

impl PatternVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            impulses: vec![false; len],
        }
    }

    pub fn new(impulses: Vec<bool>) -> Self {
        Self { impulses }
    }

    /// Unit impulse at `n` (the `δ[· − n]` vector).
    pub fn impulse(len: usize, n: usize) -> Result<Self, CoverageError> {
        Self::from_indices(len, &[n])
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self, CoverageError> {
        let mut impulses = vec![false; len];
        for &index in indices {
            if index >= len {
                return Err(CoverageError::IndexOutOfRange { index, len });
            }
            if impulses[index] {
                return Err(CoverageError::DuplicateIndex(index));
            }
            impulses[index] = true;
        }
        Ok(Self { impulses })
    }

    pub fn len(&self) -> usize {
        self.impulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.impulses.is_empty()
    }

    pub fn get(&self, n: usize) -> bool {
        self.impulses[n]
    }

    pub fn bits(&self) -> &[bool] {
        &self.impulses
    }

    /// Number of satellites `N = Σ x[n]`.
    pub fn satellite_count(&self) -> usize {
        self.impulses.iter().filter(|&&b| b).count()
    }

    /// Sorted shift indices `n_k`.
    pub fn indices(&self) -> Vec<usize> {
        self.impulses
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(n, _)| n)
            .collect()
    }

    /// Space-separated sorted index list.
    pub fn to_index_list(&self) -> String {
        self.indices()
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses an index list (whitespace or comma separated, `#` comments).
    pub fn parse_index_list(len: usize, text: &str) -> Result<Self, PatternParseError> {
        let mut indices = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                let n: usize = tok.parse().map_err(|_| PatternParseError::Token {
                    line: lineno + 1,
                    token: tok.to_string(),
                })?;
                indices.push(n);
            }
        }
        Ok(Self::from_indices(len, &indices)?)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternParseError {
    #[error("line {line}: `{token}` is not a non-negative integer index")]
    Token { line: usize, token: String },
    #[error(transparent)]
    Pattern(#[from] CoverageError),
}

/// Number of satellites in view at each step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverageTimeline {
    counts: Vec<u32>,
}

impl CoverageTimeline {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![0; len])
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max_fold(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Fraction of steps with at least one satellite in view.
    pub fn coverage_fraction(&self) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        self.counts.iter().filter(|&&c| c > 0).count() as f64 / self.counts.len() as f64
    }

    fn add_assign(&mut self, other: &CoverageTimeline) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// CSV with header `n,b,f`.
    pub fn write_csv<W: Write>(&self, requirement: &CoverageRequirement, mut w: W) -> io::Result<()> {
        writeln!(w, "n,b,f")?;
        for (n, (b, f)) in self.counts.iter().zip(requirement.folds()).enumerate() {
            writeln!(w, "{n},{b},{f}")?;
        }
        Ok(())
    }
}

/// Minimum number of satellites required in view at each step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverageRequirement {
    folds: Vec<u32>,
}

impl CoverageRequirement {
    pub fn new(folds: Vec<u32>) -> Self {
        Self { folds }
    }

    pub fn constant(len: usize, fold: u32) -> Self {
        Self::new(vec![fold; len])
    }

    pub fn folds(&self) -> &[u32] {
        &self.folds
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn is_vacuous(&self) -> bool {
        self.folds.iter().all(|&f| f == 0)
    }

    /// Steps with a non-zero requirement.
    pub fn required_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.folds.iter().enumerate().filter(|(_, &f)| f > 0).map(|(n, _)| n)
    }
}

/// Circular shift: `out[n] = v[(n − k) mod L]`.
pub fn shift(v: &AccessProfile, k: i64) -> AccessProfile {
    let len = v.len();
    if len == 0 {
        return v.clone();
    }
    let k = k.rem_euclid(len as i64) as usize;
    let samples = v.samples();
    AccessProfile::new((0..len).map(|n| samples[(n + len - k) % len]).collect())
}

/// Raw circular convolution of two binary sequences of equal length.
pub fn cyclic_convolution(a: &[bool], b: &[bool]) -> Result<Vec<u32>, CoverageError> {
    if a.len() != b.len() {
        return Err(CoverageError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let len = a.len();
    let mut out = vec![0u32; len];
    // Superpose a copy of `a` shifted to each impulse of `b`.
    for (m, _) in b.iter().enumerate().filter(|(_, &x)| x) {
        for (k, _) in a.iter().enumerate().filter(|(_, &v)| v) {
            out[(k + m) % len] += 1;
        }
    }
    Ok(out)
}

/// Coverage timeline `b = v ⊛ x`.
pub fn circular_convolve(v: &AccessProfile, x: &PatternVector) -> Result<CoverageTimeline, CoverageError> {
    Ok(CoverageTimeline::new(cyclic_convolution(v.samples(), x.bits())?))
}

/// Whether `b[n] ≥ f[n]` for every step.
pub fn satisfied(b: &CoverageTimeline, f: &CoverageRequirement) -> Result<bool, CoverageError> {
    if b.len() != f.len() {
        return Err(CoverageError::LengthMismatch {
            expected: f.len(),
            got: b.len(),
        });
    }
    Ok(b.counts.iter().zip(&f.folds).all(|(b, f)| b >= f))
}

/// Conjunction of per-target satisfaction.
pub fn all_satisfied(pairs: &[(CoverageTimeline, CoverageRequirement)]) -> Result<bool, CoverageError> {
    for (b, f) in pairs {
        if !satisfied(b, f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Early-exit check that the pattern with shift indices `impulses` meets `f`
/// over `v`, evaluating only the steps where `f` is non-zero.
pub fn meets_requirement(v: &AccessProfile, impulses: &[usize], f: &CoverageRequirement) -> bool {
    let len = v.len();
    let samples = v.samples();
    f.folds.iter().enumerate().all(|(n, &need)| {
        if need == 0 {
            return true;
        }
        let mut have = 0u32;
        for &m in impulses {
            if samples[(n + len - m % len) % len] {
                have += 1;
                if have >= need {
                    return true;
                }
            }
        }
        false
    })
}

/// Logical `L × L` circulant matrix generated by an access profile:
/// entry `(α, β) = v[(α − β) mod L]`. Never materialized except on request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantOperator {
    generator: AccessProfile,
}

impl CirculantOperator {
    pub fn new(generator: AccessProfile) -> Self {
        Self { generator }
    }

    pub fn generator(&self) -> &AccessProfile {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        let len = self.dim();
        self.generator.get((row + len - col % len) % len)
    }

    /// Column `β`: the generator shifted down by `β`.
    pub fn column(&self, col: usize) -> AccessProfile {
        shift(&self.generator, col as i64)
    }

    /// Columns `β` with a one in row `α`, ascending.
    pub fn row_support(&self, row: usize) -> Vec<usize> {
        let len = self.dim();
        let mut cols: Vec<usize> = self.generator.support().map(|k| (row + len - k) % len).collect();
        cols.sort_unstable();
        cols
    }

    pub fn apply(&self, x: &PatternVector) -> Result<CoverageTimeline, CoverageError> {
        circular_convolve(&self.generator, x)
    }

    /// Dense materialization, row-major. Intended for small instances.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let len = self.dim();
        (0..len)
            .map(|a| (0..len).map(|b| self.entry(a, b) as u8).collect())
            .collect()
    }
}

/// Default relative tolerance on repeat-period agreement across
/// sub-constellations.
pub const SYNC_TOLERANCE: f64 = 1e-9;

/// Stacked system over targets `j` and sub-constellations `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageProblem {
    /// `profiles[j][z]`.
    profiles: Vec<Vec<AccessProfile>>,
    requirements: Vec<CoverageRequirement>,
    length: usize,
}

impl CoverageProblem {
    pub fn new(
        profiles: Vec<Vec<AccessProfile>>,
        requirements: Vec<CoverageRequirement>,
    ) -> Result<Self, CoverageError> {
        let targets = profiles.len();
        if targets == 0 || profiles[0].is_empty() {
            return Err(CoverageError::EmptyProblem);
        }
        if requirements.len() != targets {
            return Err(CoverageError::RequirementCount {
                expected: targets,
                got: requirements.len(),
            });
        }
        let subs = profiles[0].len();
        let length = profiles[0][0].len();
        if length == 0 {
            return Err(CoverageError::ZeroLength);
        }
        for (j, row) in profiles.iter().enumerate() {
            if row.len() != subs {
                return Err(CoverageError::RaggedProfiles {
                    target: j,
                    expected: subs,
                    got: row.len(),
                });
            }
            for v in row {
                if v.len() != length {
                    return Err(CoverageError::LengthMismatch {
                        expected: length,
                        got: v.len(),
                    });
                }
            }
        }
        for f in &requirements {
            if f.len() != length {
                return Err(CoverageError::LengthMismatch {
                    expected: length,
                    got: f.len(),
                });
            }
        }
        Ok(Self {
            profiles,
            requirements,
            length,
        })
    }

    /// Single sub-constellation, one profile per target.
    pub fn single(profiles: Vec<AccessProfile>, requirements: Vec<CoverageRequirement>) -> Result<Self, CoverageError> {
        Self::new(profiles.into_iter().map(|v| vec![v]).collect(), requirements)
    }

    /// Rejects sub-constellations whose repeat periods differ by more than
    /// relative [`SYNC_TOLERANCE`].
    pub fn check_synchronized(repeat_periods: &[f64]) -> Result<(), CoverageError> {
        Self::check_synchronized_within(repeat_periods, SYNC_TOLERANCE)
    }

    pub fn check_synchronized_within(repeat_periods: &[f64], rel_tol: f64) -> Result<(), CoverageError> {
        if let Some(&first) = repeat_periods.first() {
            for (index, &other) in repeat_periods.iter().enumerate().skip(1) {
                if ((other - first) / first).abs() > rel_tol {
                    return Err(CoverageError::Unsynchronized { first, other, index });
                }
            }
        }
        Ok(())
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn num_targets(&self) -> usize {
        self.profiles.len()
    }

    pub fn num_subconstellations(&self) -> usize {
        self.profiles[0].len()
    }

    pub fn profile(&self, target: usize, sub: usize) -> &AccessProfile {
        &self.profiles[target][sub]
    }

    pub fn profiles(&self) -> &[Vec<AccessProfile>] {
        &self.profiles
    }

    pub fn requirement(&self, target: usize) -> &CoverageRequirement {
        &self.requirements[target]
    }

    pub fn requirements(&self) -> &[CoverageRequirement] {
        &self.requirements
    }
}

/// Result of evaluating a set of pattern vectors against a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemEvaluation {
    pub timelines: Vec<CoverageTimeline>,
    /// Per-target satisfaction `c_j`.
    pub satisfied: Vec<bool>,
    /// `standalone_coverage[j][z]`: fraction of steps where sub-constellation
    /// `z` alone has at least one satellite in view of target `j`.
    pub standalone_coverage: Vec<Vec<f64>>,
    pub satellite_counts: Vec<usize>,
}

impl SystemEvaluation {
    /// Aggregate `c_J`.
    pub fn all_satisfied(&self) -> bool {
        self.satisfied.iter().all(|&c| c)
    }

    pub fn total_satellites(&self) -> usize {
        self.satellite_counts.iter().sum()
    }

    /// Time steps where target `j` is under-covered.
    pub fn deficits(&self, problem: &CoverageProblem, target: usize) -> Vec<usize> {
        self.timelines[target]
            .counts()
            .iter()
            .zip(problem.requirement(target).folds())
            .enumerate()
            .filter(|(_, (b, f))| b < f)
            .map(|(n, _)| n)
            .collect()
    }
}

/// `b_j = Σ_z v_j^(z) ⊛ x^(z)` for every target, with satisfaction report.
pub fn evaluate_system(
    problem: &CoverageProblem,
    patterns: &[PatternVector],
) -> Result<SystemEvaluation, CoverageError> {
    let subs = problem.num_subconstellations();
    if patterns.len() != subs {
        return Err(CoverageError::PatternCount {
            expected: subs,
            got: patterns.len(),
        });
    }
    for x in patterns {
        if x.len() != problem.length {
            return Err(CoverageError::LengthMismatch {
                expected: problem.length,
                got: x.len(),
            });
        }
    }
    let mut timelines = Vec::with_capacity(problem.num_targets());
    let mut sat = Vec::with_capacity(problem.num_targets());
    let mut standalone = Vec::with_capacity(problem.num_targets());
    for (j, row) in problem.profiles.iter().enumerate() {
        let mut total = CoverageTimeline::zeros(problem.length);
        let mut fractions = Vec::with_capacity(subs);
        for (v, x) in row.iter().zip(patterns) {
            let part = circular_convolve(v, x)?;
            fractions.push(part.coverage_fraction());
            total.add_assign(&part);
        }
        sat.push(satisfied(&total, &problem.requirements[j])?);
        timelines.push(total);
        standalone.push(fractions);
    }
    Ok(SystemEvaluation {
        timelines,
        satisfied: sat,
        standalone_coverage: standalone,
        satellite_counts: patterns.iter().map(PatternVector::satellite_count).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(bits: &[u8]) -> AccessProfile {
        AccessProfile::from_bits(bits)
    }

    #[test]
    fn impulse_at_zero_is_identity() {
        let p = v(&[1, 0, 1, 1, 0]);
        let b = circular_convolve(&p, &PatternVector::impulse(5, 0).unwrap()).unwrap();
        assert_eq!(b.counts(), &[1, 0, 1, 1, 0]);
    }

    #[test]
    fn impulse_shifts_profile() {
        let p = v(&[1, 1, 0, 0, 0]);
        let b = circular_convolve(&p, &PatternVector::impulse(5, 4).unwrap()).unwrap();
        assert_eq!(b.counts(), &[1, 0, 0, 0, 1]);
        let shifted = shift(&p, 4);
        assert_eq!(shifted, v(&[1, 0, 0, 0, 1]));
    }

    #[test]
    fn two_halves_cover_everything() {
        let b = circular_convolve(&v(&[1, 1, 0, 0]), &PatternVector::from_indices(4, &[0, 2]).unwrap()).unwrap();
        assert_eq!(b.counts(), &[1, 1, 1, 1]);
    }

    #[test]
    fn shift_group_properties() {
        let p = v(&[1, 0, 0, 1, 1, 0, 0]);
        assert_eq!(shift(&p, 0), p);
        assert_eq!(shift(&p, 7), p);
        assert_eq!(shift(&p, -3), shift(&p, 4));
        assert_eq!(shift(&shift(&p, 2), 3), shift(&p, 5));
    }

    #[test]
    fn satisfaction_boundaries() {
        let f = CoverageRequirement::new(vec![1, 2, 0]);
        assert!(satisfied(&CoverageTimeline::new(vec![1, 2, 0]), &f).unwrap());
        assert!(!satisfied(&CoverageTimeline::new(vec![1, 1, 0]), &f).unwrap());
        assert!(satisfied(&CoverageTimeline::new(vec![1]), &f).is_err());
        let pairs = vec![
            (CoverageTimeline::new(vec![1, 2, 0]), f.clone()),
            (CoverageTimeline::new(vec![0, 2, 0]), f.clone()),
        ];
        assert!(!all_satisfied(&pairs).unwrap());
        assert!(all_satisfied(&pairs[..1]).unwrap());
    }

    #[test]
    fn pattern_construction_errors() {
        assert_eq!(
            PatternVector::from_indices(4, &[4]),
            Err(CoverageError::IndexOutOfRange { index: 4, len: 4 })
        );
        assert_eq!(
            PatternVector::from_indices(4, &[1, 1]),
            Err(CoverageError::DuplicateIndex(1))
        );
        let p = PatternVector::parse_index_list(10, "# header\n3, 1\n 7 # trailing\n").unwrap();
        assert_eq!(p.indices(), vec![1, 3, 7]);
        assert_eq!(p.to_index_list(), "1 3 7");
        assert!(PatternVector::parse_index_list(10, "1 x").is_err());
    }

    #[test]
    fn circulant_entries_and_rows() {
        let op = CirculantOperator::new(v(&[1, 1, 0, 0]));
        let dense = op.to_dense();
        assert_eq!(dense[0], vec![1, 0, 0, 1]);
        assert_eq!(dense[1], vec![1, 1, 0, 0]);
        assert_eq!(op.row_support(0), vec![0, 3]);
        assert_eq!(op.column(1), v(&[0, 1, 1, 0]));
    }

    #[test]
    fn meets_requirement_matches_full_evaluation() {
        let p = v(&[1, 1, 0, 0, 1, 0]);
        let f = CoverageRequirement::new(vec![1, 1, 1, 0, 1, 1]);
        for mask in 0u32..64 {
            let idx: Vec<usize> = (0..6).filter(|b| mask >> b & 1 == 1).collect();
            let x = PatternVector::from_indices(6, &idx).unwrap();
            let full = satisfied(&circular_convolve(&p, &x).unwrap(), &f).unwrap();
            assert_eq!(meets_requirement(&p, &idx, &f), full, "mask {mask}");
        }
    }

    #[test]
    fn evaluate_system_additivity_and_errors() {
        let problem = CoverageProblem::new(
            vec![vec![v(&[1, 0, 0, 0]), v(&[1, 1, 1, 1])]],
            vec![CoverageRequirement::constant(4, 1)],
        )
        .unwrap();
        let x1 = PatternVector::from_indices(4, &[0, 1]).unwrap();
        let eval = evaluate_system(&problem, &[x1.clone(), PatternVector::zeros(4)]).unwrap();
        assert_eq!(eval.timelines[0].counts(), &[1, 1, 0, 0]);
        assert!(!eval.all_satisfied());
        assert_eq!(eval.deficits(&problem, 0), vec![2, 3]);
        assert_eq!(eval.standalone_coverage[0], vec![0.5, 0.0]);
        assert!(evaluate_system(&problem, &[x1]).is_err());
        let eval = evaluate_system(
            &problem,
            &[PatternVector::zeros(4), PatternVector::impulse(4, 2).unwrap()],
        )
        .unwrap();
        assert!(eval.all_satisfied());
        assert_eq!(eval.total_satellites(), 1);
    }

    #[test]
    fn problem_validation() {
        assert_eq!(CoverageProblem::new(vec![], vec![]), Err(CoverageError::EmptyProblem));
        assert!(CoverageProblem::single(vec![v(&[1, 0])], vec![CoverageRequirement::constant(3, 1)]).is_err());
        assert!(CoverageProblem::new(
            vec![vec![v(&[1, 0])], vec![v(&[1, 0]), v(&[0, 1])]],
            vec![CoverageRequirement::constant(2, 1); 2]
        )
        .is_err());
        assert!(CoverageProblem::check_synchronized(&[86_024.0, 86_024.0 * (1.0 + 1e-12)]).is_ok());
        assert!(CoverageProblem::check_synchronized(&[86_024.0, 86_100.0]).is_err());
    }
}
