use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use trademotif::synth::{flows_to_csv, trade_flows, TradeShape};
use trademotif::YearRange;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trademotif"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_shape() -> TradeShape {
    TradeShape {
        countries: 40,
        edges: 500,
        core: 10,
        core_density: 0.6,
        tail_factor: 1e6,
    }
}

fn flows_file(dir: &Path) -> PathBuf {
    let path = dir.join("flows.csv");
    let records = trade_flows(&small_shape(), YearRange::new(2004, 2008).unwrap(), 5);
    fs::write(&path, flows_to_csv(&records)).unwrap();
    path
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn motif_table_lists_thirteen_triads() {
    let out = run_ok(&["motif-table", "--k", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "canonical_id,aliases,name,edges");
    assert_eq!(lines.len(), 14);
    assert!(lines.iter().any(|l| l.starts_with("74,164,")));

    let md = String::from_utf8(run_ok(&["motif-table", "--motif-size", "3", "--format", "md"]).stdout).unwrap();
    assert_eq!(md.lines().count(), 15);

    let four = String::from_utf8(run_ok(&["motif-table", "--k", "4"]).stdout).unwrap();
    assert_eq!(four.lines().count(), 200);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = bin().args(["motif-table", "--k", "5"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin().args(["motif-table", "--format", "xml"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("xml"));
}

#[test]
fn missing_input_names_the_ingest_stage() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .args(["run", "--input", "/no/such/file.csv", "--out", s(dir.path())])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ingest"), "{err}");
    assert!(err.contains("/no/such/file.csv"), "{err}");
}

#[test]
fn split_and_motifs_subcommands() {
    let dir = TempDir::new().unwrap();
    let flows = flows_file(dir.path());
    let graph = dir.path().join("graph.csv");
    run_ok(&["ingest", "--input", s(&flows), "--years", "2004-2006", "--out", s(&graph)]);
    let text = fs::read_to_string(&graph).unwrap();
    assert!(text.starts_with("src,dst,weight\n"));

    let split_dir = dir.path().join("split");
    let hist = dir.path().join("hist.csv");
    let out = run_ok(&["split", "--input", s(&graph), "--out", s(&split_dir), "--dump-hist", s(&hist)]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("threshold\t"));
    assert!(split_dir.join("inliers.csv").exists() && split_dir.join("outliers.csv").exists());
    assert!(fs::read_to_string(&hist).unwrap().starts_with("bin_lower,bin_upper,count\n"));

    let occ = dir.path().join("occ.csv");
    let out = run_ok(&[
        "motifs",
        "--input",
        s(&split_dir.join("inliers.csv")),
        "--dump-occurrences",
        s(&occ),
    ]);
    let counts = String::from_utf8(out.stdout).unwrap();
    assert_eq!(counts.lines().next(), Some("class_id,idm,name,count,estimated"));
    assert_eq!(counts.lines().count(), 14);
    let total: u64 = counts.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(fs::read_to_string(&occ).unwrap().lines().count() as u64, total + 1);
}

fn run_pipeline(flows: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![
        "run",
        "--input",
        s(flows),
        "--years",
        "Before=2004-2006,After=2007-2008",
        "--ensemble",
        "20",
        "--seed",
        "7",
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    run_ok(&args);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let flows = flows_file(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_pipeline(&flows, &a, &["--threads", "2"]);
    run_pipeline(&flows, &b, &["--threads", "1"]);
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.contains_key(Path::new("diff.md")));
    assert!(ta.contains_key(Path::new("Before/report.csv")));
    assert_eq!(ta, tb);
}

#[test]
fn staged_commands_reproduce_run() {
    let dir = TempDir::new().unwrap();
    let flows = flows_file(dir.path());
    let full = dir.path().join("full");
    run_pipeline(&flows, &full, &[]);

    let staged = dir.path().join("staged");
    let mut stats = Vec::new();
    for (label, years) in [("Before", "2004-2006"), ("After", "2007-2008")] {
        let work = dir.path().join(label);
        let graph = work.join("graph.csv");
        run_ok(&["ingest", "--input", s(&flows), "--years", years, "--out", s(&graph)]);
        run_ok(&["split", "--input", s(&graph), "--out", s(&work)]);
        assert_eq!(fs::read(work.join("inliers.csv")).unwrap(), fs::read(full.join(label).join("inliers.csv")).unwrap());
        for ty in ["inliers", "outliers"] {
            let out = work.join(format!("{ty}.json"));
            run_ok(&[
                "significance",
                "--input",
                s(&work.join(format!("{ty}.csv"))),
                "--type",
                ty,
                "--years",
                years,
                "--ensemble",
                "20",
                "--seed",
                "7",
                "--out",
                s(&out),
            ]);
            stats.push(out);
        }
    }
    let mut args = vec!["report", "--years", "Before=2004-2006,After=2007-2008", "--out", s(&staged), "--stats"];
    args.extend(stats.iter().map(|p| s(p)));
    run_ok(&args);

    for file in ["diff.md", "Before/report.csv", "After/report.csv", "Before/report.json"] {
        assert_eq!(
            fs::read_to_string(staged.join(file)).unwrap(),
            fs::read_to_string(full.join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = TempDir::new().unwrap();
    let flows = flows_file(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "input = [{:?}]\nyears = \"Mid=2005-2006\"\nensemble = 12\nseed = 3\nfreq-filter = 0.1\n",
            s(&flows)
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    run_ok(&["run", "--config", s(&cfg), "--seed", "9", "--out", s(&out)]);
    let written: serde_json::Value = serde_json::from_slice(&fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(written["n_random"], 12);
    assert_eq!(written["seed"], 9);
    assert_eq!(written["filter"]["f_min"], 0.1);
    assert!(out.join("Mid/report.csv").exists());

    fs::write(&cfg, "ensembel = 3\n").unwrap();
    let bad = bin().args(["run", "--config", s(&cfg)]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("config"));
}
