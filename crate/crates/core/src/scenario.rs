//! Scenario files and the batch pipeline: profiles → solver → independent
//! re-evaluation → reports and CSV exports.
//!
//! Scenarios are JSON. Angles are degrees, `tau` is an `"NP/ND"` string and
//! requirements expand to length-`L` fold vectors:
//!
//! ```json
//! {
//!   "schema": "apc-scenario/1",
//!   "name": "atlanta",
//!   "length": 720,
//!   "sub_constellations": [
//!     { "tau": "12/1", "e": 0, "i_deg": 102.9, "raan_deg": 98.3 }
//!   ],
//!   "targets": [
//!     { "name": "Atlanta", "lat_deg": 34.75, "lon_deg": -84.39,
//!       "min_elevation_deg": 5,
//!       "requirement": { "piecewise": { "default": 1,
//!                        "segments": [{ "from": 240, "to": 480, "fold": 2 }] } } }
//!   ],
//!   "solver": "bilp"
//! }
//! ```

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, TimeZone, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bilp::{self, CoveringInstance, InstanceError, SolveStatus, SolverConfig};
use crate::coverage::{
    evaluate_system, CoverageError, CoverageProblem, CoverageRequirement, PatternParseError, PatternVector,
    SystemEvaluation, SYNC_TOLERANCE,
};
use crate::geodesy::{sample_access_profile, AccessError, AccessProfile, ElevationMask, TargetPoint, TimeGrid};
use crate::orbit::{Epoch, OrbitError, PeriodRatio, PhysicalConstants, RgtElements, RgtOrbit};
use crate::phasing::{elements_from_pattern, expanded_track};
use crate::quasi_symmetric::{self, QuasiSymmetricError};

pub const SCHEMA_VERSION: &str = "apc-scenario/1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("sub-constellation {sub}: {source}")]
    Orbit {
        sub: String,
        #[source]
        source: OrbitError,
    },
    #[error("target {target} ({name}), sub-constellation {sub}: {source}")]
    Access {
        target: usize,
        name: String,
        sub: String,
        #[source]
        source: AccessError,
    },
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    QuasiSymmetric(#[from] QuasiSymmetricError),
    #[error("pattern file {path}: {source}")]
    Pattern {
        path: String,
        #[source]
        source: PatternParseError,
    },
    #[error("solver returned a pattern that fails re-evaluation on target {target} ({name})")]
    Verification { target: usize, name: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    QuasiSymmetric,
    Bilp,
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quasi-symmetric" | "qs" => Ok(Self::QuasiSymmetric),
            "bilp" => Ok(Self::Bilp),
            _ => Err(format!("unknown solver `{s}` (expected `quasi-symmetric` or `bilp`)")),
        }
    }
}

// ---------------------------------------------------------------- file schema

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema: String,
    name: Option<String>,
    epoch: Option<String>,
    length: i64,
    sub_constellations: Vec<SubFile>,
    targets: Vec<TargetFile>,
    solver: Option<SolverKind>,
    #[serde(default)]
    solver_config: ConfigFile,
    /// Relative repeat-period agreement required across sub-constellations.
    sync_tolerance: Option<f64>,
    output_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubFile {
    label: Option<String>,
    tau: String,
    #[serde(alias = "eccentricity")]
    e: f64,
    i_deg: f64,
    #[serde(default)]
    omega_deg: f64,
    raan_deg: f64,
    #[serde(default)]
    mean_anomaly_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    name: Option<String>,
    lat_deg: Option<f64>,
    lon_deg: Option<f64>,
    /// `[[lat, lon], ...]` sharing this entry's mask and requirement.
    points: Option<Vec<[f64; 2]>>,
    /// CSV with a header line and `lat_deg,lon_deg` rows, relative to the
    /// scenario file.
    points_file: Option<String>,
    min_elevation_deg: ElevationFile,
    requirement: RequirementSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ElevationFile {
    Scalar(f64),
    PerStep(Vec<f64>),
}

/// Requirement forms accepted in scenario files.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum RequirementSpec {
    /// `"requirement": 1` — the same fold at every step.
    Fold(u32),
    Form(RequirementForm),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RequirementForm {
    Constant {
        fold: u32,
    },
    /// Inclusive `[from, to]` segments over a default fold.
    Piecewise {
        #[serde(default)]
        default: u32,
        segments: Vec<Segment>,
    },
    /// Fold at listed steps (or `start + k·step`), zero elsewhere.
    Impulses {
        #[serde(default)]
        indices: Vec<usize>,
        start: Option<usize>,
        step: Option<usize>,
        #[serde(default = "one")]
        fold: u32,
    },
    Explicit(Vec<u32>),
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub from: usize,
    pub to: usize,
    pub fold: u32,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    time_limit: Option<f64>,
    node_limit: Option<u64>,
    lp_tolerance: Option<f64>,
    branching_rule: Option<bilp::BranchingRule>,
    deterministic: Option<bool>,
    local_search_iterations: Option<usize>,
    local_search_restarts: Option<usize>,
    seed: Option<u64>,
    dense_lp_limit: Option<usize>,
}

impl RequirementSpec {
    /// Expands to a length-`len` fold vector.
    pub fn expand(&self, len: usize) -> Result<CoverageRequirement, String> {
        let folds = match self {
            Self::Fold(k) | Self::Form(RequirementForm::Constant { fold: k }) => vec![*k; len],
            Self::Form(RequirementForm::Piecewise { default, segments }) => {
                let mut f = vec![*default; len];
                for s in segments {
                    if s.from > s.to || s.to >= len {
                        return Err(format!("segment [{}, {}] outside [0, {len})", s.from, s.to));
                    }
                    f[s.from..=s.to].fill(s.fold);
                }
                f
            }
            Self::Form(RequirementForm::Impulses {
                indices,
                start,
                step,
                fold,
            }) => {
                let mut f = vec![0; len];
                let mut all = indices.clone();
                match (start, step) {
                    (Some(s), Some(d)) if *d > 0 => all.extend((*s..len).step_by(*d)),
                    (None, None) => {}
                    _ => return Err("`start` and `step` (> 0) must be given together".into()),
                }
                for n in all {
                    if n >= len {
                        return Err(format!("impulse index {n} outside [0, {len})"));
                    }
                    f[n] = *fold;
                }
                f
            }
            Self::Form(RequirementForm::Explicit(v)) => {
                if v.len() != len {
                    return Err(format!("explicit requirement has {} entries, expected {len}", v.len()));
                }
                v.clone()
            }
        };
        Ok(CoverageRequirement::new(folds))
    }
}

// ---------------------------------------------------------- validated scenario

#[derive(Debug, Clone)]
pub struct SubConstellation {
    pub label: String,
    pub elements: RgtElements<f64>,
}

#[derive(Debug, Clone)]
pub struct Target {
    pub name: String,
    pub point: TargetPoint<f64>,
    pub requirement: CoverageRequirement,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub epoch: Epoch,
    pub length: usize,
    pub sub_constellations: Vec<SubConstellation>,
    pub targets: Vec<Target>,
    pub solver: SolverKind,
    pub config: SolverConfig,
    pub sync_tolerance: f64,
    pub output_dir: Option<PathBuf>,
    /// Directory relative paths in the file were resolved against.
    pub base_dir: PathBuf,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario_str(&text, &path.display().to_string(), &base)
}

/// Parses scenario text; `origin` labels diagnostics and `base_dir` resolves
/// relative file references.
pub fn parse_scenario_str(text: &str, origin: &str, base_dir: &Path) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.schema != SCHEMA_VERSION {
        return Err(ScenarioError::invalid(
            "schema",
            format!("unsupported schema `{}` (expected `{SCHEMA_VERSION}`)", file.schema),
        ));
    }
    if file.length <= 0 {
        return Err(ScenarioError::invalid(
            "length",
            format!("L must be positive, got {}", file.length),
        ));
    }
    let length = file.length as usize;
    let epoch = match &file.epoch {
        Some(s) => parse_epoch(s).map_err(|m| ScenarioError::invalid("epoch", m))?,
        None => Epoch::J2000,
    };

    if file.sub_constellations.is_empty() {
        return Err(ScenarioError::invalid("sub_constellations", "at least one is required"));
    }
    let mut subs = Vec::new();
    for (z, s) in file.sub_constellations.iter().enumerate() {
        let field = format!("sub_constellations[{z}]");
        let label = s.label.clone().unwrap_or_else(|| format!("z{}", z + 1));
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(ScenarioError::invalid(format!("{field}.label"), "use [A-Za-z0-9_-]+"));
        }
        if subs.iter().any(|o: &SubConstellation| o.label == label) {
            return Err(ScenarioError::invalid(
                format!("{field}.label"),
                format!("duplicate label `{label}`"),
            ));
        }
        let tau: PeriodRatio = s
            .tau
            .parse()
            .map_err(|e: OrbitError| ScenarioError::invalid(format!("{field}.tau"), e.to_string()))?;
        let elements = RgtElements::from_degrees(tau, s.e, s.i_deg, s.omega_deg, s.raan_deg, s.mean_anomaly_deg, epoch)
            .map_err(|e| ScenarioError::invalid(field.clone(), e.to_string()))?;
        subs.push(SubConstellation { label, elements });
    }

    let solver = file.solver.unwrap_or(SolverKind::Bilp);
    if solver == SolverKind::QuasiSymmetric && subs.len() != 1 {
        return Err(ScenarioError::invalid(
            "solver",
            "the quasi-symmetric solver handles exactly one sub-constellation",
        ));
    }

    if file.targets.is_empty() {
        return Err(ScenarioError::invalid("targets", "at least one target is required"));
    }
    let mut targets = Vec::new();
    for (j, t) in file.targets.iter().enumerate() {
        let field = format!("targets[{j}]");
        let requirement = t
            .requirement
            .expand(length)
            .map_err(|m| ScenarioError::invalid(format!("{field}.requirement"), m))?;
        let mask = match &t.min_elevation_deg {
            ElevationFile::Scalar(d) => ElevationMask::Constant(d.to_radians()),
            ElevationFile::PerStep(v) => {
                if v.len() != length {
                    return Err(ScenarioError::invalid(
                        format!("{field}.min_elevation_deg"),
                        format!("{} entries, expected {length}", v.len()),
                    ));
                }
                ElevationMask::PerStep(v.iter().map(|d| d.to_radians()).collect())
            }
        };
        let name = t.name.clone().unwrap_or_else(|| format!("target{}", j + 1));
        let points = target_points(t, base_dir).map_err(|m| ScenarioError::invalid(field.clone(), m))?;
        let many = points.len() > 1;
        for (k, (lat, lon)) in points.into_iter().enumerate() {
            let point = TargetPoint::new(lat.to_radians(), lon.to_radians(), mask.clone())
                .map_err(|e| ScenarioError::invalid(field.clone(), e.to_string()))?;
            targets.push(Target {
                name: if many {
                    format!("{name}#{}", k + 1)
                } else {
                    name.clone()
                },
                point,
                requirement: requirement.clone(),
            });
        }
    }

    let mut config = SolverConfig::default();
    let c = &file.solver_config;
    if let Some(v) = c.time_limit {
        if !(v > 0.0) {
            return Err(ScenarioError::invalid("solver_config.time_limit", "must be positive"));
        }
        config.time_limit = v;
    }
    if let Some(v) = c.node_limit {
        if v == 0 {
            return Err(ScenarioError::invalid("solver_config.node_limit", "must be positive"));
        }
        config.node_limit = v;
    }
    if let Some(v) = c.lp_tolerance {
        config.lp_tolerance = v;
    }
    if let Some(v) = c.branching_rule {
        config.branching_rule = v;
    }
    if let Some(v) = c.deterministic {
        config.deterministic = v;
    }
    if let Some(v) = c.local_search_iterations {
        config.local_search_iterations = v;
    }
    if let Some(v) = c.local_search_restarts {
        config.local_search_restarts = v;
    }
    if let Some(v) = c.seed {
        config.seed = v;
    }
    if let Some(v) = c.dense_lp_limit {
        config.dense_lp_limit = v;
    }
    let sync_tolerance = file.sync_tolerance.unwrap_or(SYNC_TOLERANCE);
    if !(sync_tolerance > 0.0) {
        return Err(ScenarioError::invalid("sync_tolerance", "must be positive"));
    }

    Ok(Scenario {
        name: file.name.unwrap_or_else(|| "scenario".into()),
        epoch,
        length,
        sub_constellations: subs,
        targets,
        solver,
        config,
        sync_tolerance,
        output_dir: file.output_dir.map(|d| base_dir.join(d)),
        base_dir: base_dir.to_path_buf(),
    })
}

fn target_points(t: &TargetFile, base_dir: &Path) -> Result<Vec<(f64, f64)>, String> {
    let forms = [
        t.lat_deg.is_some() || t.lon_deg.is_some(),
        t.points.is_some(),
        t.points_file.is_some(),
    ];
    if forms.iter().filter(|&&f| f).count() != 1 {
        return Err("give exactly one of `lat_deg`/`lon_deg`, `points`, `points_file`".into());
    }
    if let (Some(lat), Some(lon)) = (t.lat_deg, t.lon_deg) {
        return Ok(vec![(lat, lon)]);
    }
    if t.lat_deg.is_some() || t.lon_deg.is_some() {
        return Err("`lat_deg` and `lon_deg` must be given together".into());
    }
    let pts: Vec<(f64, f64)> = if let Some(p) = &t.points {
        p.iter().map(|&[a, b]| (a, b)).collect()
    } else {
        let file = base_dir.join(t.points_file.as_deref().unwrap_or_default());
        let text = fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
        read_points_csv(&text).map_err(|m| format!("{}: {m}", file.display()))?
    };
    if pts.is_empty() {
        return Err("empty point list".into());
    }
    Ok(pts)
}

/// `lat_deg,lon_deg` rows after one header line; blank and `#` lines skipped.
pub fn read_points_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let parse = |s: Option<&str>| -> Result<f64, String> {
            s.ok_or_else(|| format!("line {}: expected lat,lon", k + 1))?
                .parse()
                .map_err(|_| format!("line {}: bad number", k + 1))
        };
        let lat = parse(it.next())?;
        let lon = parse(it.next())?;
        out.push((lat, lon));
    }
    Ok(out)
}

/// ISO-8601 / RFC 3339 UTC instant to seconds since J2000 (2000-01-01T12:00:00Z).
pub fn parse_epoch(text: &str) -> Result<Epoch, String> {
    let t: DateTime<Utc> = DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .or_else(|_| text.parse::<DateTime<Utc>>())
        .map_err(|e| format!("cannot parse `{text}` as an ISO-8601 instant: {e}"))?;
    let j2000 = Utc.with_ymd_and_hms(2000, 1, 1, 12, 0, 0).single().expect("valid date");
    let d = t.signed_duration_since(j2000);
    let secs = d.num_seconds() as f64 + d.subsec_nanos() as f64 * 1e-9;
    Ok(Epoch::from_seconds_since_j2000(secs))
}

// ------------------------------------------------------------------- pipeline

/// Orbits, grid and stacked profiles of a scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub orbits: Vec<RgtOrbit<f64>>,
    /// Grid of the first sub-constellation: `t_step = T_r / L`.
    pub grid: TimeGrid,
    pub problem: CoverageProblem,
}

impl Scenario {
    pub fn orbits(&self) -> Result<Vec<RgtOrbit<f64>>, ScenarioError> {
        let consts = PhysicalConstants::<f64>::default();
        self.sub_constellations
            .iter()
            .map(|s| {
                RgtOrbit::new(s.elements, consts).map_err(|source| ScenarioError::Orbit {
                    sub: s.label.clone(),
                    source,
                })
            })
            .collect()
    }

    pub fn requirements(&self) -> Vec<CoverageRequirement> {
        self.targets.iter().map(|t| t.requirement.clone()).collect()
    }

    /// Propagates every seed and samples every `(target, sub)` profile.
    /// Each sub-constellation is sampled on a grid spanning its own repeat
    /// period; the periods agree to `sync_tolerance`.
    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        let orbits = self.orbits()?;
        let periods: Vec<f64> = orbits.iter().map(|o| o.periods.t_r).collect();
        CoverageProblem::check_synchronized_within(&periods, self.sync_tolerance)?;
        let grids: Vec<TimeGrid> = periods
            .iter()
            .map(|&t| TimeGrid::for_repeat_period(self.length, t))
            .collect::<Result<_, _>>()
            .map_err(|e| ScenarioError::invalid("length", e.to_string()))?;
        let subs = orbits.len();
        let pairs: Vec<(usize, usize)> = (0..self.targets.len())
            .flat_map(|j| (0..subs).map(move |z| (j, z)))
            .collect();
        let sampled: Vec<AccessProfile> = pairs
            .par_iter()
            .map(|&(j, z)| {
                let t = &self.targets[j];
                let err = |source| ScenarioError::Access {
                    target: j + 1,
                    name: t.name.clone(),
                    sub: self.sub_constellations[z].label.clone(),
                    source,
                };
                let v = sample_access_profile(&orbits[z], &t.point, &grids[z]).map_err(err)?;
                if v.is_all_zero() {
                    return Err(err(AccessError::NoAccess));
                }
                Ok(v)
            })
            .collect::<Result<_, _>>()?;
        let mut it = sampled.into_iter();
        let profiles: Vec<Vec<AccessProfile>> = (0..self.targets.len())
            .map(|_| it.by_ref().take(subs).collect())
            .collect();
        let problem = CoverageProblem::new(profiles, self.requirements())?;
        Ok(Prepared {
            grid: grids[0],
            orbits,
            problem,
        })
    }
}

// --------------------------------------------------------------------- report

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Optimal,
    FeasibleIncumbent,
    Infeasible,
    TimeLimit,
    /// Evaluation-only run; see `all_satisfied`.
    Evaluated,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub index: usize,
    pub name: String,
    pub satisfied: bool,
    pub required_steps: usize,
    /// Steps with `b[n] < f[n]`.
    pub deficit_steps: Vec<usize>,
    pub max_fold: u32,
    /// Per sub-constellation, percent of steps with at least one of its
    /// satellites in view.
    pub standalone_coverage_pct: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiSymmetricDetails {
    pub n1: usize,
    /// `η = L/N` as a reduced fraction.
    pub spacing: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BilpDetails {
    pub bound: u64,
    pub root_relaxation: f64,
    pub greedy_objective: u64,
    pub node_count: u64,
    pub lp_iterations: usize,
    pub rows: usize,
    pub logical_rows: usize,
    pub presolve: bilp::PresolveStats,
    pub history: Vec<bilp::ProgressPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: String,
    pub solver: Option<SolverKind>,
    pub length: usize,
    pub t_step: f64,
    pub repeat_periods: Vec<f64>,
    pub sub_constellations: Vec<String>,
    pub objective: usize,
    pub satellites_per_sub: Vec<usize>,
    pub patterns: Vec<Vec<usize>>,
    pub status: RunStatus,
    pub all_satisfied: bool,
    pub targets: Vec<TargetReport>,
    pub quasi_symmetric: Option<QuasiSymmetricDetails>,
    pub bilp: Option<BilpDetails>,
    /// Omitted in deterministic runs so artifacts are byte-identical.
    pub wall_time: Option<f64>,
    pub files: Vec<String>,
}

impl RunReport {
    /// Process exit code: 0 success, 2 infeasible (or unsatisfied evaluation),
    /// 4 stopped on a limit with an incumbent.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Optimal => 0,
            RunStatus::Evaluated if self.all_satisfied => 0,
            RunStatus::Evaluated | RunStatus::Infeasible => 2,
            RunStatus::FeasibleIncumbent | RunStatus::TimeLimit => 4,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |t: String| {
            s.push_str(&t);
            s.push('\n');
        };
        line(format!("scenario        {}", self.scenario));
        line(format!(
            "mode            {}{}",
            self.mode,
            self.solver
                .map(|k| format!(" ({})", solver_name(k)))
                .unwrap_or_default()
        ));
        line(format!("L               {}", self.length));
        line(format!("t_step          {:.3} s", self.t_step));
        for (label, t_r) in self.sub_constellations.iter().zip(&self.repeat_periods) {
            line(format!(
                "T_r [{label}]{:width$}{t_r:.3} s",
                "",
                width = 10usize.saturating_sub(label.len())
            ));
        }
        line(format!("status          {}", status_name(self.status)));
        let split = self
            .satellites_per_sub
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" + ");
        line(format!("satellites      {} ({split})", self.objective));
        if let Some(b) = &self.bilp {
            line(format!(
                "lower bound     {} (root relaxation {:.3}, greedy {}, {} nodes)",
                b.bound, b.root_relaxation, b.greedy_objective, b.node_count
            ));
        }
        if let Some(q) = &self.quasi_symmetric {
            line(format!(
                "n1 / spacing    {} / {}",
                q.n1,
                q.spacing.clone().unwrap_or_else(|| "-".into())
            ));
        }
        if let Some(t) = self.wall_time {
            line(format!("wall time       {t:.2} s"));
        }
        for (label, p) in self.sub_constellations.iter().zip(&self.patterns) {
            line(format!(
                "pattern [{label}]  {}",
                p.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
            ));
        }
        let ok = self.targets.iter().filter(|t| t.satisfied).count();
        line(format!(
            "satisfied       {} ({ok}/{} targets)",
            if self.all_satisfied { "yes" } else { "no" },
            self.targets.len()
        ));
        line(String::new());
        line(format!(
            "{:>5}  {:<24} {:>4} {:>8} {:>5}  standalone coverage % per sub-constellation",
            "j", "target", "ok", "deficit", "max"
        ));
        for t in &self.targets {
            let cov = t
                .standalone_coverage_pct
                .iter()
                .map(|c| format!("{c:.1}"))
                .collect::<Vec<_>>()
                .join(" ");
            line(format!(
                "{:>5}  {:<24} {:>4} {:>8} {:>5}  {cov}",
                t.index,
                t.name,
                if t.satisfied { "yes" } else { "no" },
                t.deficit_steps.len(),
                t.max_fold
            ));
        }
        for t in self.targets.iter().filter(|t| !t.satisfied) {
            let shown: Vec<String> = t.deficit_steps.iter().take(20).map(|n| n.to_string()).collect();
            let more = if t.deficit_steps.len() > 20 { " ..." } else { "" };
            line(format!("deficit steps [{}]: {}{more}", t.name, shown.join(" ")));
        }
        s
    }
}

fn solver_name(k: SolverKind) -> &'static str {
    match k {
        SolverKind::QuasiSymmetric => "quasi-symmetric",
        SolverKind::Bilp => "bilp",
    }
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Optimal => "optimal",
        RunStatus::FeasibleIncumbent => "feasible-incumbent",
        RunStatus::Infeasible => "infeasible",
        RunStatus::TimeLimit => "time-limit",
        RunStatus::Evaluated => "evaluated",
    }
}

fn target_reports(scenario: &Scenario, problem: &CoverageProblem, eval: &SystemEvaluation) -> Vec<TargetReport> {
    scenario
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| TargetReport {
            index: j + 1,
            name: t.name.clone(),
            satisfied: eval.satisfied[j],
            required_steps: t.requirement.required_steps().count(),
            deficit_steps: eval.deficits(problem, j),
            max_fold: eval.timelines[j].max_fold(),
            standalone_coverage_pct: eval.standalone_coverage[j].iter().map(|c| 100.0 * c).collect(),
        })
        .collect()
}

// ------------------------------------------------------------------ artifacts

/// Output options shared by the run modes.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's output directory.
    pub out_dir: Option<PathBuf>,
    pub solver: Option<SolverKind>,
    pub time_limit: Option<f64>,
    pub deterministic: Option<bool>,
    /// Skip writing files (library and test use).
    pub dry_run: bool,
}

impl RunOptions {
    fn apply(&self, scenario: &Scenario) -> Result<Scenario, ScenarioError> {
        let mut s = scenario.clone();
        if let Some(k) = self.solver {
            if k == SolverKind::QuasiSymmetric && s.sub_constellations.len() != 1 {
                return Err(ScenarioError::invalid(
                    "solver",
                    "the quasi-symmetric solver handles exactly one sub-constellation",
                ));
            }
            s.solver = k;
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                return Err(ScenarioError::invalid("time_limit", "must be positive"));
            }
            s.config.time_limit = t;
        }
        if let Some(d) = self.deterministic {
            s.config.deterministic = d;
        }
        if let Some(d) = &self.out_dir {
            s.output_dir = Some(d.clone());
        }
        Ok(s)
    }

    fn out_dir(&self, scenario: &Scenario) -> Option<PathBuf> {
        if self.dry_run {
            return None;
        }
        Some(
            scenario
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name)),
        )
    }
}

struct Artifacts {
    root: Option<PathBuf>,
    files: Vec<String>,
}

impl Artifacts {
    fn new(root: Option<PathBuf>) -> Self {
        Self {
            root,
            files: Vec::new(),
        }
    }

    fn write(&mut self, rel: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), ScenarioError> {
        let Some(root) = &self.root else {
            return Ok(());
        };
        let path = root.join(rel);
        let io_err = |source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        let file = fs::File::create(&path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
        self.files.push(rel.to_string());
        Ok(())
    }
}

fn write_solution_artifacts(
    art: &mut Artifacts,
    scenario: &Scenario,
    prepared: &Prepared,
    patterns: &[PatternVector],
    eval: &SystemEvaluation,
) -> Result<(), ScenarioError> {
    for (z, (sub, x)) in scenario.sub_constellations.iter().zip(patterns).enumerate() {
        art.write(&format!("patterns/{}.txt", sub.label), |w| {
            writeln!(w, "{}", x.to_index_list())
        })?;
        let members = elements_from_pattern(&sub.elements, x, &prepared.grid);
        art.write(&format!("members/{}.csv", sub.label), |w| members.write_csv(w))?;
        let track = expanded_track(&prepared.orbits[z], &prepared.grid);
        art.write(&format!("tracks/{}.csv", sub.label), |w| track.write_csv(w))?;
    }
    for (j, b) in eval.timelines.iter().enumerate() {
        let f = prepared.problem.requirement(j);
        art.write(&format!("timelines/target{:03}.csv", j + 1), |w| b.write_csv(f, w))?;
    }
    Ok(())
}

fn finish(mut art: Artifacts, mut report: RunReport) -> Result<RunReport, ScenarioError> {
    let text = report.to_text();
    art.write("report.txt", |w| w.write_all(text.as_bytes()))?;
    if art.root.is_some() {
        art.files.push("report.json".into());
    }
    report.files = art.files.clone();
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(root) = &art.root {
        let path = root.join("report.json");
        fs::write(&path, json + "\n").map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(report)
}

fn base_report(scenario: &Scenario, prepared: &Prepared, mode: &str) -> RunReport {
    RunReport {
        scenario: scenario.name.clone(),
        mode: mode.into(),
        solver: None,
        length: scenario.length,
        t_step: prepared.grid.t_step,
        repeat_periods: prepared.orbits.iter().map(|o| o.periods.t_r).collect(),
        sub_constellations: scenario.sub_constellations.iter().map(|s| s.label.clone()).collect(),
        objective: 0,
        satellites_per_sub: Vec::new(),
        patterns: Vec::new(),
        status: RunStatus::Evaluated,
        all_satisfied: false,
        targets: Vec::new(),
        quasi_symmetric: None,
        bilp: None,
        wall_time: None,
        files: Vec::new(),
    }
}

/// Solves a scenario and re-verifies the result through the independent
/// evaluation path.
pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, ScenarioError> {
    let start = Instant::now();
    let scenario = options.apply(scenario)?;
    let prepared = scenario.prepare()?;
    let problem = &prepared.problem;
    let mut report = base_report(&scenario, &prepared, "solve");
    report.solver = Some(scenario.solver);

    let (patterns, status) = match scenario.solver {
        SolverKind::QuasiSymmetric => {
            let profiles: Vec<AccessProfile> = (0..problem.num_targets())
                .map(|j| problem.profile(j, 0).clone())
                .collect();
            match quasi_symmetric::solve(&profiles, problem.requirements()) {
                Ok(sol) => {
                    report.quasi_symmetric = Some(QuasiSymmetricDetails {
                        n1: sol.n1,
                        spacing: sol.spacing.map(|r| format!("{}/{}", r.numer(), r.denom())),
                    });
                    (vec![sol.pattern], RunStatus::Optimal)
                }
                Err(QuasiSymmetricError::Infeasible(_)) => {
                    (vec![PatternVector::zeros(scenario.length)], RunStatus::Infeasible)
                }
                Err(e) => return Err(e.into()),
            }
        }
        SolverKind::Bilp => {
            let instance = CoveringInstance::assemble(problem)?;
            let result = bilp::solve(&instance, &scenario.config);
            let status = match result.status {
                SolveStatus::Optimal => RunStatus::Optimal,
                SolveStatus::FeasibleIncumbent => RunStatus::FeasibleIncumbent,
                SolveStatus::Infeasible => RunStatus::Infeasible,
                SolveStatus::TimeLimit => RunStatus::TimeLimit,
            };
            report.bilp = Some(BilpDetails {
                bound: result.bound,
                root_relaxation: result.root_relaxation,
                greedy_objective: result.greedy_objective,
                node_count: result.node_count,
                lp_iterations: result.lp_iterations,
                rows: instance.num_rows(),
                logical_rows: instance.logical_rows(),
                presolve: result.presolve.clone(),
                history: result.history.clone(),
            });
            (result.patterns, status)
        }
    };

    let eval = evaluate_system(problem, &patterns)?;
    if matches!(status, RunStatus::Optimal | RunStatus::FeasibleIncumbent) {
        if let Some(j) = eval.satisfied.iter().position(|&c| !c) {
            return Err(ScenarioError::Verification {
                target: j + 1,
                name: scenario.targets[j].name.clone(),
            });
        }
    }
    report.status = status;
    report.objective = eval.total_satellites();
    report.satellites_per_sub = eval.satellite_counts.clone();
    report.patterns = patterns.iter().map(PatternVector::indices).collect();
    report.all_satisfied = eval.all_satisfied();
    report.targets = target_reports(&scenario, problem, &eval);

    let mut art = Artifacts::new(options.out_dir(&scenario));
    if status != RunStatus::Infeasible {
        write_solution_artifacts(&mut art, &scenario, &prepared, &patterns, &eval)?;
    }
    report.wall_time = (!scenario.config.deterministic).then(|| start.elapsed().as_secs_f64());
    log::info!(
        "{}: {} satellites in {:.2} s",
        scenario.name,
        report.objective,
        start.elapsed().as_secs_f64()
    );
    finish(art, report)
}

/// Reads one index-list file per sub-constellation.
pub fn read_patterns(paths: &[PathBuf], length: usize) -> Result<Vec<PatternVector>, ScenarioError> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|source| ScenarioError::Io {
                path: p.display().to_string(),
                source,
            })?;
            PatternVector::parse_index_list(length, &text).map_err(|source| ScenarioError::Pattern {
                path: p.display().to_string(),
                source,
            })
        })
        .collect()
}

/// Verification-only run for user-supplied patterns.
pub fn evaluate(
    scenario: &Scenario,
    patterns: &[PatternVector],
    options: &RunOptions,
) -> Result<RunReport, ScenarioError> {
    let start = Instant::now();
    let scenario = options.apply(scenario)?;
    let prepared = scenario.prepare()?;
    let eval = evaluate_system(&prepared.problem, patterns)?;
    let mut report = base_report(&scenario, &prepared, "evaluate");
    report.objective = eval.total_satellites();
    report.satellites_per_sub = eval.satellite_counts.clone();
    report.patterns = patterns.iter().map(PatternVector::indices).collect();
    report.all_satisfied = eval.all_satisfied();
    report.targets = target_reports(&scenario, &prepared.problem, &eval);
    let mut art = Artifacts::new(options.out_dir(&scenario));
    write_solution_artifacts(&mut art, &scenario, &prepared, patterns, &eval)?;
    report.wall_time = (!scenario.config.deterministic).then(|| start.elapsed().as_secs_f64());
    finish(art, report)
}

/// Writes every seed access profile; returns the written paths.
pub fn export_profiles(scenario: &Scenario, out_dir: &Path) -> Result<Vec<String>, ScenarioError> {
    let prepared = scenario.prepare()?;
    let mut art = Artifacts::new(Some(out_dir.to_path_buf()));
    for j in 0..prepared.problem.num_targets() {
        for (z, sub) in scenario.sub_constellations.iter().enumerate() {
            let v = prepared.problem.profile(j, z);
            art.write(&format!("profiles/target{:03}_{}.csv", j + 1, sub.label), |w| {
                v.write_csv(w)
            })?;
        }
    }
    Ok(art.files)
}

/// Writes the expanded ground track of every seed; returns
/// `(label, span_deg, path)` per sub-constellation.
pub fn export_tracks(scenario: &Scenario, out_dir: &Path) -> Result<Vec<(String, f64, String)>, ScenarioError> {
    let orbits = scenario.orbits()?;
    let mut art = Artifacts::new(Some(out_dir.to_path_buf()));
    let mut out = Vec::new();
    for (sub, orbit) in scenario.sub_constellations.iter().zip(&orbits) {
        let grid = TimeGrid::for_repeat_period(scenario.length, orbit.periods.t_r)
            .map_err(|e| ScenarioError::invalid("length", e.to_string()))?;
        let track = expanded_track(orbit, &grid);
        let rel = format!("tracks/{}.csv", sub.label);
        art.write(&rel, |w| track.write_csv(w))?;
        out.push((sub.label.clone(), track.span_deg, rel));
    }
    Ok(out)
}
