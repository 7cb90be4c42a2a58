use std::path::{Path, PathBuf};
use std::process::Command;

use belief_core::logic::{models, parse_formula, Vocabulary};

const BIN: &str = env!("CARGO_BIN_EXE_belief");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn belief(args: &[&str]) -> Run {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

fn revise(name: &str, json: bool) -> Run {
    let path = scenario(name);
    let mut args = vec!["revise", "--scenario", path.to_str().unwrap()];
    if json {
        args.push("--json");
    }
    belief(&args)
}

/// Writes `text` to a scenario file unique to this test.
fn temp_scenario(tag: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("belief-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{tag}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

const I4_TRACE: &str = "\
operator: knowledge
vocabulary: p, q
initial
  beliefs: p & q
  firmness: p=1 q=2
  known: TRUE
  state: {00:3, 01:1, 10:2, 11:0}
step 1: observe p
  beliefs: p & q
  firmness: p=inf q=2
  known: p & !q | p & q
  state: {00:inf, 01:inf, 10:2, 11:0}
step 2: observe !p | !q
  beliefs: p & !q
  firmness: p=inf !q=inf
  known: p & !q
  state: {00:inf, 01:inf, 10:0, 11:inf}
";

#[test]
fn i4_trace_golden() {
    let r = revise("i4.toml", false);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout, I4_TRACE);
}

#[test]
fn red_bird_final_beliefs() {
    for (file, last) in [
        ("red-bird-boutilier.toml", "!b & !r | !b & r"),
        ("red-bird-fl.toml", "!b & !r | !b & r"),
        ("red-bird-dp.toml", "!b & r"),
    ] {
        let r = revise(file, false);
        assert_eq!(r.code, 0);
        let beliefs: Vec<&str> = r.stdout.lines().filter_map(|l| l.strip_prefix("  beliefs: ")).collect();
        assert_eq!(beliefs.last(), Some(&last), "{file}");
    }
}

#[test]
fn json_and_text_carry_the_same_beliefs() {
    let vocab = Vocabulary::new(&["b", "r"]).unwrap();
    for file in ["red-bird-boutilier.toml", "red-bird-dp.toml", "red-bird-fl.toml"] {
        let text = revise(file, false).stdout;
        let json: serde_json::Value = serde_json::from_str(&revise(file, true).stdout).unwrap();
        let from_text: Vec<&str> = text.lines().filter_map(|l| l.strip_prefix("  beliefs: ")).collect();
        let mut from_json = vec![json["initial"]["beliefs"].as_str().unwrap()];
        from_json.extend(json["steps"].as_array().unwrap().iter().map(|s| s["beliefs"].as_str().unwrap()));
        assert_eq!(from_text, from_json);
        for b in from_json {
            assert!(!models(&parse_formula(b, &vocab).unwrap(), &vocab).is_empty());
        }
    }
}

#[test]
fn known_summary_entails_every_observation() {
    let vocab = Vocabulary::new(&["p", "q"]).unwrap();
    let json: serde_json::Value = serde_json::from_str(&revise("i4.toml", true).stdout).unwrap();
    let mut seen = Vec::new();
    for step in json["steps"].as_array().unwrap() {
        seen.push(parse_formula(step["observation"].as_str().unwrap(), &vocab).unwrap());
        let known = models(&parse_formula(step["known"].as_str().unwrap(), &vocab).unwrap(), &vocab);
        for o in &seen {
            assert!(known.is_subset(&models(o, &vocab)));
        }
    }
}

#[test]
fn knowledge_violation_exits_with_the_step() {
    let text = std::fs::read_to_string(scenario("red-bird-dp.toml"))
        .unwrap()
        .replace("\"dp\"", "\"knowledge\"");
    let path = temp_scenario("violation", &text);
    let r = belief(&["revise", "--scenario", path.to_str().unwrap()]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("step 3") && r.stderr.contains("`!b`"), "{}", r.stderr);
    assert!(r.stdout.contains("step 2: observe r") && !r.stdout.contains("step 3"));
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let base = std::fs::read_to_string(scenario("i4.toml")).unwrap();
    let bad_formula = temp_scenario("bad-formula", &base.replace("\"!p | !q\"", "\"p &\""));
    let r = belief(&["revise", "--scenario", bad_formula.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("observations[1]"), "{}", r.stderr);

    let missing_world = temp_scenario("missing-world", &base.replace(", \"00\" = 3", ""));
    let r = belief(&["revise", "--scenario", missing_world.to_str().unwrap()]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("00"), "{}", r.stderr);

    let r = belief(&["revise", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(r.code, 2);

    let r = belief(&["check", "--suite", "agm", "--operator", "dp"]);
    assert_eq!(r.code, 3);
    let r = belief(&["check", "--suite", "nope", "--operator", "dp"]);
    assert_eq!(r.code, 2);
}

#[test]
fn agm_ranking_suite_prints_eight_passes() {
    let r = belief(&["check", "--suite", "agm", "--operator", "ranking", "--vocab", "p,q"]);
    assert_eq!(r.code, 0);
    let passes = r.stdout.lines().filter(|l| l.starts_with('R') && l.contains(" PASS ")).count();
    assert_eq!(passes, 8);
}

#[test]
fn lehmann_suite_prints_the_i4_counterexample() {
    let path = scenario("i4.toml");
    let r = belief(&["check", "--suite", "lehmann", "--scenario", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("I4 FAIL"));
    assert!(r.stdout.contains("counterexample 1:"));
    assert!(r.stdout.contains("I7 VACUOUS"));
}

#[test]
fn unexpected_signature_exits_five() {
    let r = belief(&["check", "--suite", "agm-primed", "--operator", "dp", "--vocab", "p", "--max-rank", "0"]);
    assert_eq!(r.code, 5);
    assert!(r.stdout.contains("R9': expected FAIL, got PASS"));
}

#[test]
fn search_witness_replays_through_revise() {
    let r = belief(&["search", "--target", "nonfunctional-dp", "--vocab", "p,q", "--max-rank", "2", "--json"]);
    assert_eq!(r.code, 0);
    let json: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let w = &json["witness"];
    assert_eq!(w["replayed"], true);
    let mut finals = Vec::new();
    for (i, snippet) in w["scenarios"].as_array().unwrap().iter().enumerate() {
        let path = temp_scenario(&format!("witness-{i}"), snippet.as_str().unwrap());
        let out = belief(&["revise", "--scenario", path.to_str().unwrap(), "--json"]);
        assert_eq!(out.code, 0);
        let t: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        finals.push(t["steps"][0]["beliefs"].as_str().unwrap().to_string());
    }
    assert_eq!(finals, [w["revised1"].as_str().unwrap(), w["revised2"].as_str().unwrap()]);
    assert_ne!(finals[0], finals[1]);
}

#[test]
fn search_reports_missing_witnesses() {
    let r = belief(&["search", "--target", "nonfunctional-dp", "--vocab", "p", "--max-rank", "0"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("no witness at these bounds"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for json in [false, true] {
        assert_eq!(revise("i4.toml", json).stdout, revise("i4.toml", json).stdout);
    }
    let a = belief(&["search", "--target", "c2-incompat", "--vocab", "p,q", "--max-rank", "1"]);
    let b = belief(&["search", "--target", "c2-incompat", "--vocab", "p,q", "--max-rank", "1"]);
    assert_eq!(a.stdout, b.stdout);
}
