use std::fs;
use std::path::Path;

use apc_design::scenario::{self, RunOptions, RunStatus, ScenarioError};

const SMALL: &str = r#"{
  "schema": "apc-scenario/1",
  "name": "small",
  "length": 240,
  "sub_constellations": [
    { "label": "a", "tau": "12/1", "e": 0, "i_deg": 102.9, "raan_deg": 98.3 }
  ],
  "targets": [
    { "name": "Atlanta", "lat_deg": 34.75, "lon_deg": -84.39, "min_elevation_deg": 5, "requirement": 1 },
    { "name": "Quito", "lat_deg": -0.18, "lon_deg": -78.47, "min_elevation_deg": 5,
      "requirement": { "impulses": { "start": 0, "step": 60, "fold": 1 } } }
  ],
  "solver": "bilp",
  "solver_config": { "node_limit": 30, "local_search_iterations": 5000 }
}"#;

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let s = scenario::parse_scenario_str(SMALL, "small", Path::new(".")).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for d in &dirs {
        let opts = RunOptions {
            out_dir: Some(d.path().to_path_buf()),
            deterministic: Some(true),
            ..RunOptions::default()
        };
        reports.push(scenario::run(&s, &opts).unwrap());
    }
    assert!(reports[0].all_satisfied);
    assert!(reports[0].wall_time.is_none());
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    assert_eq!(a, b);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for want in [
        "report.txt",
        "report.json",
        "patterns/a.txt",
        "members/a.csv",
        "tracks/a.csv",
        "timelines/target002.csv",
    ] {
        assert!(names.contains(&want), "missing {want} in {names:?}");
    }
    let json: serde_json::Value =
        serde_json::from_slice(&a.iter().find(|(n, _)| n == "report.json").unwrap().1).unwrap();
    assert_eq!(json["objective"].as_u64().unwrap() as usize, reports[0].objective);
    assert_eq!(json["length"], 240);
}

#[test]
fn bilp_never_needs_more_satellites_than_quasi_symmetric() {
    let s = scenario::parse_scenario_str(SMALL, "small", Path::new(".")).unwrap();
    let dry = |solver| RunOptions {
        solver: Some(solver),
        deterministic: Some(true),
        dry_run: true,
        ..RunOptions::default()
    };
    let qs = scenario::run(&s, &dry(scenario::SolverKind::QuasiSymmetric)).unwrap();
    let bilp = scenario::run(&s, &dry(scenario::SolverKind::Bilp)).unwrap();
    assert!(qs.all_satisfied && bilp.all_satisfied);
    assert!(bilp.objective <= qs.objective);
    assert!(bilp.bilp.as_ref().unwrap().bound as usize <= bilp.objective);
}

#[test]
fn evaluation_reports_deficits() {
    let s = scenario::parse_scenario_str(SMALL, "small", Path::new(".")).unwrap();
    let x = vec![apc_design::PatternVector::from_indices(240, &[0]).unwrap()];
    let r = scenario::evaluate(
        &s,
        &x,
        &RunOptions {
            dry_run: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(r.status, RunStatus::Evaluated);
    assert!(!r.all_satisfied);
    assert_eq!(r.exit_code(), 2);
    assert!(!r.targets[0].deficit_steps.is_empty());
}

#[test]
fn unreachable_target_is_named() {
    let text = SMALL
        .replace("\"lat_deg\": -0.18", "\"lat_deg\": -89.9")
        .replace("\"i_deg\": 102.9", "\"i_deg\": 30.0");
    let s = scenario::parse_scenario_str(&text, "small", Path::new(".")).unwrap();
    match s.prepare() {
        Err(ScenarioError::Access { target, name, .. }) => assert_eq!((target, name.as_str()), (2, "Quito")),
        other => panic!("expected an access error, got {other:?}"),
    }
}

#[test]
fn fixtures_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for k in 1..=5 {
        let s = scenario::parse_scenario(&dir.join(format!("example{k}.json"))).unwrap();
        assert!(!s.targets.is_empty());
    }
    let s3 = scenario::parse_scenario(&dir.join("example3.json")).unwrap();
    assert_eq!(s3.targets.len(), 94);
    let s4 = scenario::parse_scenario(&dir.join("example4.json")).unwrap();
    assert_eq!(s4.targets.len(), 56 + 30);
    assert_eq!(s4.targets[0].requirement.required_steps().count(), 12);
    assert_eq!(s4.targets[60].requirement.required_steps().count(), 24);
}

#[test]
fn vacuous_requirement_needs_no_satellites() {
    let text = SMALL
        .replace("\"requirement\": 1 }", "\"requirement\": 0 }")
        .replace("\"fold\": 1", "\"fold\": 0");
    let s = scenario::parse_scenario_str(&text, "small", Path::new(".")).unwrap();
    for solver in [scenario::SolverKind::Bilp, scenario::SolverKind::QuasiSymmetric] {
        let opts = RunOptions {
            solver: Some(solver),
            dry_run: true,
            ..RunOptions::default()
        };
        let r = scenario::run(&s, &opts).unwrap();
        assert_eq!(r.objective, 0);
        assert!(r.all_satisfied);
        assert_eq!(r.exit_code(), 0);
    }
}
