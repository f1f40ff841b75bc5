use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sflow"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SFLOW_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.json");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{
  "workload": { "shape": "parallel", "n": 8, "p": 10, "period_minutes": 30, "run_count": 2 },
  "seeds": [1, 2],
  "systems": ["sairflow_faas", "baseline"],
  "output_dir": "out"
}"#;

fn files_under(dir: &Path) -> Vec<String> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                found.push(p.strip_prefix(dir).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    found.sort();
    found
}

#[test]
fn run_writes_the_declared_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let o = sflow(&["run", "--config", config.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("makespan ratio baseline/sairflow_faas"));
    let mut expected = vec!["summary.csv".to_string()];
    for system in ["baseline", "sairflow_faas"] {
        for seed in [1, 2] {
            for f in ["events.csv", "metrics.json", "tasks.csv", "trace.json"] {
                expected.push(format!("{system}/seed-{seed}/{f}"));
            }
        }
    }
    expected.sort();
    assert_eq!(files_under(&tmp.path().join("out")), expected);
}

#[test]
fn run_output_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let c = config.to_str().unwrap();
    assert!(sflow(&["run", "--config", c, "--out", "a"], tmp.path()).status.success());
    assert!(sflow(&["run", "--config", c, "--out", "b"], tmp.path()).status.success());
    for f in files_under(&tmp.path().join("a")) {
        let a = fs::read(tmp.path().join("a").join(&f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn seed_flag_and_environment_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let c = config.to_str().unwrap();
    let o = sflow(&["run", "--config", c, "--out", "x", "--seed", "9", "--system", "sairflow_faas"], tmp.path());
    assert!(o.status.success());
    assert!(tmp.path().join("x/sairflow_faas/seed-9/trace.json").exists());
    assert!(!tmp.path().join("x/baseline").exists());

    let o = Command::new(env!("CARGO_BIN_EXE_sflow"))
        .args(["run", "--config", c, "--out", "y"])
        .current_dir(tmp.path())
        .env("SFLOW_SEED", "4")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        files_under(&tmp.path().join("y")).iter().filter(|f| f.ends_with("trace.json")).count(),
        2
    );
    assert!(tmp.path().join("y/baseline/seed-4/trace.json").exists());
}

#[test]
fn missing_config_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sflow(&["run", "--config", "nope.json", "--out", "out"], tmp.path());
    assert!(!o.status.success());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn failing_simulation_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{ "workload": { "shape": "chain", "n": 2, "p": 1000 }, "seeds": [1], "systems": ["sairflow_faas"] }"#,
    );
    let o = sflow(&["run", "--config", config.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("limit"));
    assert!(!tmp.path().join("out").exists());
}

fn cost_total(dir: &Path, name: &str) -> String {
    let text = fs::read_to_string(dir.join("cost_summary.csv")).unwrap();
    text.lines()
        .find(|l| l.split(',').next() == Some(name))
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .to_string()
}

#[test]
fn cost_of_named_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    for (scenario, total) in [("scenario1", "7.30"), ("scenario2", "7.47"), ("scenario3", "6.05"), ("scenario4", "35.69")] {
        let o = sflow(&["cost", "--scenario", scenario, "--out", scenario], tmp.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let dir = tmp.path().join(scenario);
        assert_eq!(cost_total(&dir, scenario), total);
        let ledger = fs::read_to_string(dir.join("ledger.csv")).unwrap();
        assert!(ledger.starts_with("Component,Notes,Cost\n"));
        assert!(ledger.lines().last().unwrap().starts_with("Total,"));
    }
    assert_eq!(cost_total(&tmp.path().join("scenario1"), "scenario1 baseline"), "12.26");
    let o = sflow(&["cost", "--scenario", "scenario9"], tmp.path());
    assert!(!o.status.success());
}

#[test]
fn cost_of_an_empty_trace_is_the_fixed_cost() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{ "workload": { "shape": "chain", "n": 1, "p": 10, "period_minutes": 5, "run_count": 0 }, "seeds": [1], "systems": ["sairflow_faas"] }"#,
    );
    let o = sflow(&["run", "--config", config.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = tmp.path().join("out/sairflow_faas/seed-1/trace.json");
    let o = sflow(&["cost", "--trace", trace.to_str().unwrap(), "--out", "c"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(cost_total(&tmp.path().join("c"), "sairflow_faas"), "6.03");
    let o = sflow(&["cost", "--trace", trace.to_str().unwrap(), "--no-ha", "--out", "d"], tmp.path());
    assert!(o.status.success());
    assert_eq!(cost_total(&tmp.path().join("d"), "sairflow_faas"), "3.92");
}

#[test]
fn analyze_trace_fixture_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let fixture = repo_file("crates/core/fixtures/job_3441830.csv");
    let o = sflow(&["analyze", fixture.to_str().unwrap()], tmp.path());
    assert!(o.status.success());
    let out = stdout(&o);
    for line in ["n: 34", "p_d: 439", "n_L: 8", "suggested T: 10"] {
        assert!(out.lines().any(|l| l == line), "missing {line:?} in\n{out}");
    }

    let chain = tmp.path().join("chain.json");
    fs::write(
        &chain,
        r#"{ "dag_id": "c", "period_minutes": 5, "run_count": 1, "tasks": [
            { "id": "a", "duration_s": 10 },
            { "id": "b", "duration_s": 10, "deps": ["a"] },
            { "id": "c", "duration_s": 10, "deps": ["b"] },
            { "id": "d", "duration_s": 10, "deps": ["c"] },
            { "id": "e", "duration_s": 10, "deps": ["d"] } ] }"#,
    )
    .unwrap();
    let o = sflow(&["analyze", chain.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("p_d: 50\n") && stdout(&o).contains("suggested T: 5\n"));

    let cyclic = tmp.path().join("cyclic.csv");
    fs::write(&cyclic, "M1_2,10\nM2_1,10\n").unwrap();
    let o = sflow(&["analyze", cyclic.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle"));
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[test]
fn summary_wait_median_matches_tasks_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    assert!(sflow(&["run", "--config", config.to_str().unwrap()], tmp.path()).status.success());
    let out = tmp.path().join("out");
    for system in ["sairflow_faas", "baseline"] {
        let mut waits = Vec::new();
        for seed in [1, 2] {
            let mut r = csv::Reader::from_path(out.join(format!("{system}/seed-{seed}/tasks.csv"))).unwrap();
            for rec in r.records() {
                let rec = rec.unwrap();
                let v: f64 = rec[2].parse().unwrap();
                let s: f64 = rec[3].parse().unwrap();
                waits.push(s - v);
            }
        }
        let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
        let row: Vec<&str> = summary
            .lines()
            .find(|l| l.starts_with(&format!("{system},wait,")))
            .unwrap()
            .split(',')
            .collect();
        assert_eq!(row[2].parse::<usize>().unwrap(), waits.len());
        let got: f64 = row[5].parse().unwrap();
        assert!((got - median(waits)).abs() < 2e-3, "{system}: {got}");
    }
}

#[test]
fn compare_pairs_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    assert!(sflow(&["run", "--config", config.to_str().unwrap()], tmp.path()).status.success());
    let summary = tmp.path().join("out/summary.csv");
    let s = summary.to_str().unwrap();
    let o = sflow(
        &["compare", s, s, "--a-system", "sairflow_faas", "--b-system", "baseline", "--out", "cmp.csv"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("cmp.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("metric,a_system,b_system"));
    let makespan: Vec<&str> = lines.find(|l| l.starts_with("makespan,")).unwrap().split(',').collect();
    let (a, b): (f64, f64) = (makespan[3].parse().unwrap(), makespan[4].parse().unwrap());
    let ratio: f64 = makespan[5].parse().unwrap();
    assert!((ratio - b / a).abs() < 1e-3);

    let o = sflow(&["compare", s, s, "--a-system", "nobody"], tmp.path());
    assert!(!o.status.success());
}
