use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fx(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn unirep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unirep")).args(args).output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = unirep(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|e| panic!("{e}: {line}"))
}

#[test]
fn toy_fixture_scores_perfectly() {
    let v = json_ok(&["eval-analogy", "--dataset", &fx("toy_word.jsonl"), "--word-vectors", &fx("toy_words.txt")]);
    let row = &v["results"][0];
    assert_eq!(row["all"], 1.0);
    assert_eq!(row["total"], 40);
    assert_eq!(row["categories"].as_array().unwrap().len(), 7);
    assert_eq!(v["command"], "eval-analogy");
    assert_eq!(v["inputs"].as_object().unwrap().len(), 2);
    assert!(v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn bm25_on_three_pair_corpus() {
    // Test split is q1, q2, q4. q1 and q2 share their only rare terms with the
    // gold question. q4 "my account password" ties between qa1 and qa2 (same
    // length, one df=1 term and "my" each), and equal scores rank by qa_id,
    // so the gold qa2 lands second: Acc 2/3, MRR (1 + 1 + 1/2)/3.
    let v = json_ok(&[
        "faq-eval",
        "--collection",
        &fx("faq_collection.tsv"),
        "--queries",
        &fx("faq_queries.tsv"),
        "--ranker",
        "bm25",
    ]);
    let row = &v["results"][0];
    assert_eq!(row["queries"], 3);
    assert!((row["accuracy"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((row["mrr"].as_f64().unwrap() - 2.5 / 3.0).abs() < 1e-12);
}

#[test]
fn stats_reproduce_capital_common_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cc.jsonl");
    let mut lines = String::new();
    let mut n = 0;
    for i in 0..23 {
        for j in 0..23 {
            if i == j {
                continue;
            }
            n += 1;
            let q = serde_json::json!({
                "id": format!("cc-{n}"), "level": "word", "category": "capital-common",
                "a": format!("city{i}"), "b": format!("country{i}"), "c": format!("city{j}"),
                "candidates": [format!("country{j}"), "x1", "x2", "x3", "x4"], "gold": 0
            });
            lines.push_str(&format!("{q}\n"));
        }
    }
    std::fs::write(&path, lines).unwrap();
    let v = json_ok(&["stats", "--dataset", path.to_str().unwrap()]);
    let c = &v["datasets"][0]["categories"][0];
    assert_eq!((c["pairs"].as_u64(), c["questions"].as_u64(), c["candidates"].as_u64()), (Some(23), Some(506), Some(5)));
}

#[test]
fn crosslevel_counts_are_consistent() {
    let v = json_ok(&[
        "crosslevel",
        "--word-dataset",
        &fx("toy_word.jsonl"),
        "--dataset",
        &fx("toy_phrase.jsonl"),
        "--word-vectors",
        &fx("toy_words.txt"),
    ]);
    let r = &v["results"][0];
    assert_eq!(r["level"], "phrase");
    assert_eq!(r["p"].as_u64().unwrap() + r["n"].as_u64().unwrap(), 40);
    assert_eq!(r["reconstructed_accuracy"], r["higher_accuracy"]);
}

#[test]
fn built_word_dataset_keeps_gold_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.jsonl");
    let v = json_ok(&[
        "build-dataset",
        "--questions",
        &fx("toy_questions.txt"),
        "--word-vectors",
        &fx("toy_words.txt"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(v["questions"], 40);
    let ds = unirep_core::analogy::load_dataset(&out).unwrap();
    assert_eq!(ds.candidate_count("male-female"), Some(5));
    assert_eq!(ds.candidate_count("positive-negative"), Some(2));
}

#[test]
fn prep_ppdb_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = unirep(&[
        "prep-ppdb", "--input", &fx("ppdb_sample.txt"), "--per-label", "20", "--seed", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // 16 Equivalence and 15 Independent are short of 20
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["malformed"], 1);
    assert_eq!(report["merged_histogram"]["Entailment"], 30);
    assert_eq!(report["sampled"], 16 + 20 + 15);
    assert_eq!(report["paraphrase_examples"], 51 * 4);
    let lines = std::fs::read_to_string(dir.path().join("paraphrase_id.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 204);
}

#[test]
fn fingerprint_tracks_config_but_not_threads_or_destination() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["eval-analogy", "--dataset", &fx("toy_word.jsonl"), "--word-vectors", &fx("toy_words.txt")];
    let fp = |extra: &[&str]| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(extra);
        let out = unirep(&args);
        assert!(out.status.success());
        let bytes = if out.stdout.is_empty() {
            std::fs::read(dir.path().join("r.json")).unwrap()
        } else {
            out.stdout
        };
        serde_json::from_slice::<Value>(&bytes).unwrap()["config_fingerprint"].clone()
    };
    let plain = fp(&[]);
    let r = dir.path().join("r.json");
    assert_eq!(plain, fp(&["--threads", "6", "--out", r.to_str().unwrap()]));
    assert_ne!(plain, fp(&["--case-fold"]));
}

#[test]
fn failures_emit_json_records() {
    let missing = unirep(&["stats", "--dataset", "/nonexistent/x.jsonl"]);
    assert_eq!(error_record(&missing)["error"]["kind"], "io");

    let bad_provider = unirep(&["eval-analogy", "--dataset", &fx("toy_word.jsonl"), "--provider", "glove=bert:/x"]);
    assert_eq!(error_record(&bad_provider)["error"]["kind"], "usage");
    assert_eq!(bad_provider.status.code(), Some(2));

    let bad_k = unirep(&["prep-ppdb", "--input", &fx("ppdb_sample.txt"), "--k", "0", "--out", "/tmp/unused"]);
    assert_eq!(error_record(&bad_k)["error"]["kind"], "invalid-config");

    let wrong_level = unirep(&[
        "crosslevel", "--word-dataset", &fx("toy_phrase.jsonl"), "--dataset", &fx("toy_phrase.jsonl"),
        "--word-vectors", &fx("toy_words.txt"),
    ]);
    assert_eq!(error_record(&wrong_level)["error"]["kind"], "invalid-config");

    let unknown = unirep(&["translate"]);
    assert_eq!(error_record(&unknown)["error"]["kind"], "usage");
}

#[test]
fn projection_csv_shapes() {
    let out = unirep(&["project", "--items", &fx("toy_items.txt"), "--word-vectors", &fx("toy_words.txt")]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,x,y"));
    assert_eq!(lines.count(), 12);

    let out = unirep(&["project", "--pairs", &fx("toy_pairs.tsv"), "--word-vectors", &fx("toy_words.txt")]);
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("category,pair_id,c1,c2"));
    assert!(header.ends_with(",c53"));
    assert_eq!(text.lines().count(), 13);
}

