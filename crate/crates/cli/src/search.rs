use std::fmt::Write;

use belief_core::logic::{Vocabulary, World};
use belief_core::postulates::{
    c2_case_analysis, search_nonfunctional_dp, CaseAnalysis, CheckError, NonfunctionalWitness,
};
use belief_core::rankings::{Ocf, Rank};
use serde_json::json;

use crate::{to_json, Bounds, CliError, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    NonfunctionalDp,
    C2Incompat,
}

impl Target {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nonfunctional-dp" => Some(Target::NonfunctionalDp),
            "c2-incompat" => Some(Target::C2Incompat),
            _ => None,
        }
    }
}

fn core(e: CheckError) -> CliError {
    match e {
        CheckError::Config(m) => CliError::Schema(m),
        other => CliError::Domain(other.to_string()),
    }
}

fn toml_rank(r: Rank) -> String {
    match r {
        Rank::Finite(n) => n.to_string(),
        Rank::Infinite => "\"inf\"".into(),
    }
}

/// A dp scenario file that replays one half of a witness with `belief revise`.
pub fn replay_snippet(k: &Ocf, vocab: &Vocabulary, formula: &str) -> String {
    let atoms: Vec<String> = vocab.atoms().iter().map(|a| format!("{a:?}")).collect();
    let ranks: Vec<String> = k
        .ranks()
        .iter()
        .enumerate()
        .map(|(i, &r)| format!("\"{}\" = {}", World::new(vocab.len() as u8, i), toml_rank(r)))
        .collect();
    format!(
        "vocabulary = [{}]\noperator = \"dp\"\nobservations = [{formula:?}]\n\n[state]\nkind = \"ocf\"\nranks = {{ {} }}\n",
        atoms.join(", "),
        ranks.join(", ")
    )
}

fn witness_text(out: &mut String, w: &NonfunctionalWitness, vocab: &Vocabulary) {
    writeln!(out, "non-functional DP witness:").expect("string write");
    for line in w.render(vocab) {
        writeln!(out, "  {line}").expect("string write");
    }
    writeln!(out, "  replay: {}", if w.replay() { "confirmed" } else { "FAILED" }).expect("string write");
    let f = w.formula.display(vocab).to_string();
    for (name, k) in [("k1", &w.k1), ("k2", &w.k2)] {
        writeln!(out, "  scenario for {name}:").expect("string write");
        for line in replay_snippet(k, vocab, &f).lines() {
            if line.is_empty() {
                out.push('\n');
            } else {
                writeln!(out, "    {line}").expect("string write");
            }
        }
    }
}

fn witness_json(w: &NonfunctionalWitness, vocab: &Vocabulary) -> serde_json::Value {
    let f = w.formula.display(vocab).to_string();
    json!({
        "k1": w.k1,
        "k2": w.k2,
        "formula": f,
        "prior": w.prior.display(vocab).to_string(),
        "revised1": w.revised1.display(vocab).to_string(),
        "revised2": w.revised2.display(vocab).to_string(),
        "replayed": w.replay(),
        "scenarios": [replay_snippet(&w.k1, vocab, &f), replay_snippet(&w.k2, vocab, &f)],
    })
}

fn analysis_json(a: &CaseAnalysis, vocab: &Vocabulary) -> serde_json::Value {
    json!({
        "closed": a.closed,
        "truncated": a.truncated,
        "cells": a.cells,
        "forced_cells": a.forced_cells,
        "constraints": a.constraints,
        "nodes": a.nodes,
        "closed_branches": a.closed_branches,
        "contradictions_replayed": a.contradictions.iter().all(|c| c.replay(a.atoms)),
        "model_verified": a.model.as_ref().map(|_| a.verify_model()),
        "lines": a.render(vocab),
        "detail": a,
    })
}

pub fn cmd_search(target: &str, bounds: &Bounds, json_mode: bool) -> Result<Output, CliError> {
    let t = Target::parse(target).ok_or_else(|| {
        CliError::Parse(format!(
            "--target: unknown target {target:?} (expected nonfunctional-dp or c2-incompat)"
        ))
    })?;
    let cfg = bounds.config()?;
    cfg.validate().map_err(core)?;
    let vocab = &cfg.vocab;
    let witness = search_nonfunctional_dp(&cfg).map_err(core)?;
    let analysis = match t {
        Target::C2Incompat => Some(c2_case_analysis(vocab).map_err(core)?),
        Target::NonfunctionalDp => None,
    };

    let stdout = if json_mode {
        to_json(&json!({
            "target": target,
            "vocabulary": vocab.atoms(),
            "max_rank": cfg.max_rank,
            "witness": witness.as_ref().map(|w| witness_json(w, vocab)),
            "case_analysis": analysis.as_ref().map(|a| analysis_json(a, vocab)),
        }))
    } else {
        let mut out = String::new();
        writeln!(
            out,
            "search {target}, vocabulary {}, max rank {}",
            vocab.atoms().join(", "),
            cfg.max_rank
        )
        .expect("string write");
        match &witness {
            Some(w) => witness_text(&mut out, w, vocab),
            None => writeln!(out, "non-functional DP witness: no witness at these bounds").expect("string write"),
        }
        if let Some(a) = &analysis {
            writeln!(out, "C2 case analysis over belief-set revision functions:").expect("string write");
            for line in a.render(vocab) {
                writeln!(out, "  {line}").expect("string write");
            }
            if !a.contradictions.is_empty() {
                let ok = a.contradictions.iter().all(|c| c.replay(a.atoms));
                writeln!(out, "  contradictions replayed: {}", if ok { "confirmed" } else { "FAILED" })
                    .expect("string write");
            }
            if a.model.is_some() {
                writeln!(
                    out,
                    "  satisfying table verified: {}",
                    if a.verify_model() { "confirmed" } else { "FAILED" }
                )
                .expect("string write");
            }
        }
        out
    };
    Ok(Output::ok(stdout))
}
