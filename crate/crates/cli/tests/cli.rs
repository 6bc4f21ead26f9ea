use std::path::Path;
use std::process::{Command, Output};

fn dynoct(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynoct")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bench_writes_two_structure_rows_per_step_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "bench", "--dist", "stepwise", "--scale", "0.01", "--K", "10", "--K", "1000", "--alpha", "2", "--cutoff", "2",
        "--seed", "7", "--out", "out.csv",
    ];
    let o = dynoct(&args, tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("structure,distribution,step,build_s,update_s,nb_s,peak_mem_mb,avg_mem_mb"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 10);
    for step in 0..10 {
        let at: Vec<&str> = rows.iter().filter(|r| r[2] == step.to_string()).map(|r| r[0]).collect();
        assert_eq!(at, ["octree-K10-a2", "octree-K1000-a2"]);
    }
    assert!(rows.iter().all(|r| r.len() == 8 && r[1] == "stepwise"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "bench");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["flags"]["k"], serde_json::json!([10, 1000]));
    assert!(manifest["end_unix_ms"].as_u64() >= manifest["start_unix_ms"].as_u64());
}

#[test]
fn flat_baseline_adds_a_row_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dynoct(&["bench", "--dist", "wave", "--n", "300", "--flat"], tmp.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1 + 2 * 10);
    assert_eq!(out.lines().filter(|l| l.starts_with("flat-oracle,wave,")).count(), 10);
}

#[test]
fn no_arguments_prints_usage_and_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dynoct(&[], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_exits_1_and_help_exits_0() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(dynoct(&["frobnicate"], tmp.path()).status.code(), Some(1));
    assert_eq!(dynoct(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(dynoct(&["svgd", "--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn bad_inputs_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("x.csv"), "id,x,y,z\n0,0,0,0\n1,1,0,0\n2,2,0,0\n").unwrap();
    std::fs::write(dir.join("z.csv"), "id,x,y,z\n0,0,0,0\n1,1,0,0\n5,2,0,0\n").unwrap();
    std::fs::write(dir.join("broken.csv"), "id,x,y,z\n0,zero,0,0\n").unwrap();
    for args in [
        vec!["metrics", "--x", "x.csv", "--z", "z.csv", "--k", "1"],
        vec!["metrics", "--x", "broken.csv", "--z", "broken.csv"],
        vec!["metrics", "--x", "missing.csv", "--z", "x.csv"],
        vec!["svgd", "--target", "nonsense"],
        vec!["svgd", "--bandwidth", "-1"],
        vec!["bench", "--dist", "lognormal"],
        vec!["bench", "--scale", "0"],
        vec!["knn", "--k", "0", "--n-train", "10", "--n-test", "5"],
        vec!["index", "--vectors", "x.csv"],
    ] {
        let o = dynoct(&args, dir);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn metrics_aligns_ids_and_reports_means() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // Rows deliberately out of order in one file.
    std::fs::write(dir.join("x.csv"), "id,x,y,z\n0,0,0,0\n1,1,0,0\n2,3,0,0\n").unwrap();
    std::fs::write(dir.join("z.csv"), "id,x,y,z\n2,6,0,0\n0,0,0,0\n1,2,0,0\n").unwrap();
    std::fs::write(dir.join("t.csv"), "point_id,t,x,y,z\n0,2,4,0,0\n0,0,0,0,0\n0,1,1,0,0\n").unwrap();
    let o = dynoct(&["metrics", "--x", "x.csv", "--z", "z.csv", "--k", "1", "--traj", "t.csv"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "id,distortion,jaccard,curvature\n0,2,1,2\n1,2,1,\n2,2,1,\nmean,2,1,2\n");
}

#[test]
fn svgd_reports_initial_state_and_final_positions() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["svgd", "--n", "20", "--iters", "3", "--mode", "naive", "--positions-out", "p.csv"];
    let o = dynoct(&args, tmp.path());
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "iter,wall_ms,mean_logp");
    assert!(lines[1].starts_with("0,0,"));
    assert_eq!(lines.len(), 5);
    let positions = std::fs::read_to_string(tmp.path().join("p.csv")).unwrap();
    assert_eq!(positions.lines().count(), 21);
}

#[test]
fn validate_prints_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dynoct(&["validate", "--ops", "2000", "--points", "300", "--queries", "10"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().all(|l| !l.starts_with("FAIL")));
    assert!(out.ends_with("7 of 7 checks passed\n"));
}

#[test]
fn seed_falls_back_to_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_dynoct"))
            .args(["index", "--dim", "8", "--n", "300", "--n-queries", "3"])
            .env("DYNOCT_SEED", seed)
            .current_dir(tmp.path())
            .output()
            .unwrap()
    };
    let explicit = dynoct(&["index", "--dim", "8", "--n", "300", "--n-queries", "3", "--seed", "4"], tmp.path());
    assert_eq!(stdout(&run("4")), stdout(&explicit));
    assert_ne!(stdout(&run("5")), stdout(&explicit));
}
