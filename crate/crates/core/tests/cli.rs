mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use common::{manifest_path, BIN};
use msgrewrite::cascade::read_log;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn toy() -> String {
    manifest_path("data/toy_dataset.jsonl").display().to_string()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.display().to_string()
}

const DEVICE: &str = r#"{"generate": {"*": [
  {"text": "Running late, sorry!", "token_logprobs": [-0.2, -0.4]},
  {"text": "late", "token_logprobs": [-2.0]}]},
 "score": [
  {"prefix": "Running late, sorry!", "continuation": "quality is good", "logprob": -0.1},
  {"prefix": "Running late, sorry!", "continuation": "quality is bad", "logprob": -2.5},
  {"prefix": "*", "continuation": "quality is good", "logprob": -3.0},
  {"prefix": "*", "continuation": "quality is bad", "logprob": -0.2}]}"#;

const SERVER: &str = r#"{"generate": {"*": ["I am running a little late, sorry about that."]}}"#;

#[test]
fn help_and_usage_exit_codes() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    for sub in [
        "eval",
        "stats",
        "datagen",
        "filter",
        "suffix-data",
        "reward-server",
        "cascade",
        "sweep",
        "pick-gamma",
    ] {
        assert!(stdout(&help).contains(sub), "help lists {sub}");
    }
    assert_eq!(run(&["eval", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["eval"]).status.code(), Some(2));
    assert_eq!(
        run(&["eval", "--dataset", &toy()]).status.code(),
        Some(2),
        "needs --predictions or --copy"
    );
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn eval_markdown_is_deterministic() {
    let args = ["eval", "--dataset", &toy(), "--copy", "source", "--system", "copy"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with(
        "| System | Edit Ratio | NLI | Reversed NLI | SARI | BLEU | Update-R | Length Ratio | Success Rate |"
    ));
    assert!(text.contains("| copy | 0.00 | 1.00 | 1.00 |"));
}

#[test]
fn eval_details_and_predictions_file() {
    let dir = tempfile::tempdir().unwrap();
    let details = dir.path().join("details.jsonl");
    let out = run(&[
        "eval",
        "--dataset",
        &toy(),
        "--copy",
        "target",
        "--format",
        "csv",
        "--details",
        details.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&details).unwrap().lines().count(), 20);
    let csv = stdout(&out);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "1", "copy-target BLEU");

    let preds = write(
        dir.path(),
        "preds.jsonl",
        "{\"id\":\"formalize-01\",\"prediction\":\"hi\"}\n",
    );
    let missing = run(&["eval", "--dataset", &toy(), "--predictions", &preds]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("missing predictions"), "{}", stderr(&missing));
}

#[test]
fn stats_csv_header_and_rows() {
    let out = run(&["stats", "--dataset", &toy(), "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "task,size,ins,sou,tar,len_ratio,edit_ratio,nli_st,nli_ts");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("all,20,5.3,8.75,10,"));
}

#[test]
fn stats_missing_file_is_runtime_error() {
    let out = run(&["stats", "--dataset", "/nonexistent/data.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: "));
}

#[test]
fn cascade_routes_by_gamma_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let device = write(dir.path(), "device.json", DEVICE);
    let server = write(dir.path(), "server.json", SERVER);
    let log = dir.path().join("log.jsonl");
    let base = [
        "--mock-script",
        &device,
        "--server-mock-script",
        &server,
        "cascade",
        "--prompt",
        "Shorten: late.",
    ];

    let mut args = base.to_vec();
    args.extend(["--num-samples", "2", "--log", log.to_str().unwrap()]);
    let local = run(&args);
    assert!(local.status.success(), "{}", stderr(&local));
    let decision: Value = serde_json::from_str(stdout(&local).trim()).unwrap();
    assert_eq!(decision["origin"], "on_device");
    assert_eq!(decision["chosen_text"], "Running late, sorry!");
    let records = read_log(&std::fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].candidates.len(), 2);

    let mut args = base.to_vec();
    args.extend(["--num-samples", "2", "--gamma", "0.99"]);
    let remote = run(&args);
    let decision: Value = serde_json::from_str(stdout(&remote).trim()).unwrap();
    assert_eq!(decision["origin"], "server");
    assert_eq!(decision["chosen_text"], "I am running a little late, sorry about that.");

    let mut args = base.to_vec();
    args.extend(["--gamma", "2"]);
    let bad = run(&args);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("cascade.gamma"));
}

#[test]
fn cascade_reads_mock_scripts_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let device = write(dir.path(), "device.json", DEVICE);
    let server = write(dir.path(), "server.json", SERVER);
    let out = Command::new(BIN)
        .args(["cascade", "--prompt", "hello", "--num-samples", "2", "--gamma", "0.99"])
        .env("REWRITE_MOCK_SCRIPT", &device)
        .env("REWRITE_SERVER_MOCK_SCRIPT", &server)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"origin\":\"server\""));
}

#[test]
fn cascade_without_backend_is_config_error() {
    let out = Command::new(BIN)
        .args(["cascade", "--prompt", "hello"])
        .env_remove("REWRITE_ENDPOINT")
        .env_remove("REWRITE_MOCK_SCRIPT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("backend.endpoint"), "{}", stderr(&out));
}

const LABELED_LOG: &str = concat!(
    r#"{"prompt_id":"a","candidates":[{"text":"x","suffix_score":0.9,"lm_score":-0.1}],"on_device_label":"good","server_label":"good"}"#,
    "\n",
    r#"{"prompt_id":"b","candidates":[{"text":"x","suffix_score":0.4,"lm_score":-0.5}],"on_device_label":"bad","server_label":"good"}"#,
    "\n",
    r#"{"prompt_id":"c","candidates":[{"text":"x","suffix_score":0.2,"lm_score":-2.0}],"on_device_label":"good","server_label":"bad"}"#,
    "\n",
    r#"{"prompt_id":"d","candidates":[{"text":"x","suffix_score":0.7,"lm_score":-0.3}],"on_device_label":"good","server_label":"good"}"#,
    "\n",
);

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.jsonl", LABELED_LOG);
    let out = run(&["sweep", "--log", &log, "--gammas", "0,0.5,1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "gamma,on_device_ratio,success_rate\n0,1,0.75\n0.5,0.5,0.75\n1,0,0.75\n"
    );
    let full = run(&["sweep", "--log", &log]);
    assert_eq!(stdout(&full).lines().count(), 102);
}

#[test]
fn sweep_requires_labels() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(
        dir.path(),
        "log.jsonl",
        r#"{"prompt_id":"z","candidates":[{"text":"x","suffix_score":0.9}]}"#,
    );
    let out = run(&["sweep", "--log", &log]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("records missing judge labels: z"));
}

#[test]
fn pick_gamma_largest_meeting_target() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.jsonl", LABELED_LOG);
    let out = run(&["pick-gamma", "--log", &log, "--target", "0.5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "0.4");
    let none = run(&["pick-gamma", "--log", &log, "--target", "1.5"]);
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn reward_server_survives_bad_lines() {
    let mut child = Command::new(BIN)
        .arg("reward-server")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(
            concat!(
                r#"{"id":"a","task":"proofread","source":"i has went home","prediction":"i has went home"}"#,
                "\nnot json\n",
                r#"{"id":"c","task":"shorten","source":"","prediction":"x"}"#,
                "\n",
            )
            .as_bytes(),
        )
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let replies: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(replies.len(), 3);
    assert_eq!(replies[0]["id"], "a");
    assert_eq!(replies[0]["total"], 2.0);
    assert!(replies[1]["error"].is_string());
    assert_eq!(replies[2]["id"], "c");
    assert!(replies[2]["error"].is_string());
}

#[test]
fn config_file_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[cascade]\ngamma = 1.5\n");
    let out = run(&["--config", &bad, "stats", "--dataset", &toy()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cascade.gamma"));

    let unknown = write(dir.path(), "unknown.toml", "bogus = 1\n");
    let out = run(&["--config", &unknown, "stats", "--dataset", &toy()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn filter_and_suffix_data() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = write(
        dir.path(),
        "pairs.jsonl",
        concat!(
            r#"{"instruction":"Make it shorter.","source":"I will be there at six tonight.","target":"There at six."}"#,
            "\n",
            r#"{"instruction":"Make it formal.","source":"hey whats up","target":"whats up"}"#,
            "\n",
        ),
    );
    let judge = write(
        dir.path(),
        "judge.json",
        r##"{"generate": {"*": ["GOOD"], "#Response: whats up\n": ["GOOD", "BAD"]}}"##,
    );
    let kept = run(&["--judge-mock-script", &judge, "filter", "--input", &pairs, "--k", "2"]);
    assert!(kept.status.success(), "{}", stderr(&kept));
    let lines: Vec<String> = stdout(&kept).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains("There at six."));

    let suffix = run(&[
        "--judge-mock-script",
        &judge,
        "suffix-data",
        "--input",
        &pairs,
        "--k",
        "2",
    ]);
    let rows: Vec<Value> = stdout(&suffix)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["label"], "good");
    assert_eq!(rows[1]["label"], "bad");
    assert!(rows[1]["text"].as_str().unwrap().ends_with("\n---\nquality is bad"));
}
