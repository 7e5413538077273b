mod common;

use std::path::Path;
use std::process::{Command, Output};

use frontier_merge::calibration::PredictionRecord;
use frontier_merge::eval_ingest::{write_prediction_log, ResultBundle};

fn run(args: &[&str]) -> Output {
    Command::new(common::BIN).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn last_stderr_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).lines().last().unwrap_or_default().to_owned()
}

fn safetensors_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".safetensors"))
        .collect();
    names.sort();
    names
}

#[test]
fn merge_writes_checkpoint_and_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let pt = common::write_toy(dir.path(), "pt.safetensors", 1);
    let it = common::write_toy(dir.path(), "it.safetensors", 2);
    let out = dir.path().join("m.safetensors");
    let o = run(&["merge", "--pt", s(&pt), "--it", s(&it), "--method", "slerp", "--lambda", "0.5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("4 tensors"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("provenance sha256:")));
    let inspect = run(&["inspect", s(&out)]);
    assert!(stdout(&inspect).contains("frontier_merge.recipe"));
}

#[test]
fn sweep_resumes_and_is_job_independent() {
    let dir = tempfile::tempdir().unwrap();
    let pt = common::write_toy(dir.path(), "pt.safetensors", 1);
    let it = common::write_toy(dir.path(), "it.safetensors", 2);
    let out = dir.path().join("sweep");
    let args = |jobs: &'static str| {
        vec![
            "--jobs".to_owned(), jobs.to_owned(), "sweep".into(), "--pt".into(), s(&pt).into(), "--it".into(),
            s(&it).into(), "--method".into(), "dare-ties".into(), "--density".into(), "0.7".into(), "--seed".into(),
            "9".into(), "--out-dir".into(), s(&out).into(),
        ]
    };
    let o = Command::new(common::BIN).args(args("1")).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = safetensors_in(&out);
    assert_eq!(files.len(), 11, "{files:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(manifest["entries"].as_array().unwrap().len(), 11);
    let before: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();

    // Delete one output; the rerun rebuilds it with more threads and leaves
    // the others in place.
    std::fs::remove_file(out.join(&files[3])).unwrap();
    let mtime = |f: &str| std::fs::metadata(out.join(f)).unwrap().modified().unwrap();
    let kept = mtime(&files[5]);
    let o = Command::new(common::BIN).args(args("4")).output().unwrap();
    assert!(o.status.success());
    assert_eq!(mtime(&files[5]), kept);
    let after: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn calib_prints_hand_example() {
    let dir = tempfile::tempdir().unwrap();
    let mut b = ResultBundle::new("toy", Some(0.5));
    for (i, (c, ok)) in [(0.95, true), (0.95, false), (0.55, true), (0.55, true)].into_iter().enumerate() {
        b.push_record(PredictionRecord::new("qa", i.to_string(), c, ok).unwrap());
    }
    let log = dir.path().join("toy.jsonl");
    write_prediction_log(&b, &log).unwrap();
    let report = dir.path().join("report");
    let o = run(&["calib", "--log", s(&log), "--out-dir", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ece=0.450000"), "{}", stdout(&o));
    for f in ["calibration.json", "reliability.csv", "summary.csv"] {
        assert!(report.join(f).exists(), "{f}");
    }
    let reliability = std::fs::read_to_string(report.join("reliability.csv")).unwrap();
    assert_eq!(reliability.lines().count(), 11);
}

#[test]
fn frontier_on_table_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "frontier",
        "--input", s(&common::fixture("gemma12b_parents.csv")),
        "--input", s(&common::fixture("gemma12b_task_arith_sweep.csv")),
        "--acc-task", "mmlu_pro",
        "--format", "json",
        "--out-dir", s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("lambda_star=0 model_id=gemma-3-12b-pt"), "{text}");
    assert!(text.contains("degradation task=ifeval flagged=true accuracy_declining=true ece_rising=n/a half_crossing=1.8"), "{text}");
    assert!(text.contains("degradation task=mmlu_pro flagged=true"), "{text}");
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
}

#[test]
fn failures_end_with_error_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.safetensors");
    let o = run(&["inspect", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(last_stderr_line(&o).starts_with("error: IO_ERROR: "), "{}", last_stderr_line(&o));

    let garbage = dir.path().join("g.safetensors");
    std::fs::write(&garbage, b"\x10\x00\x00\x00\x00\x00\x00\x00{not json}      ").unwrap();
    let o = run(&["inspect", s(&garbage)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(last_stderr_line(&o).starts_with("error: "), "{}", last_stderr_line(&o));

    let o = run(&["merge", "--pt", "a"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(last_stderr_line(&o), "error: USAGE: invalid command-line arguments");

    let pt = common::write_toy(dir.path(), "pt.safetensors", 1);
    let out = dir.path().join("x.safetensors");
    let o = run(&["merge", "--pt", s(&pt), "--it", s(&pt), "--out", s(&out), "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(last_stderr_line(&o).starts_with("error: INVALID_RECIPE: "), "{}", last_stderr_line(&o));
}
