use std::fmt::Write;
use std::path::Path;

use belief_core::logic::{BeliefSet, Formula, Vocabulary};
use belief_core::operators::{
    agm_revise, boutilier_revise, dp_revise, fl_revise, knowledge_observe, known_summary,
    KnowledgeState, OperatorKind, RevisionAssignment, RevisionError,
};
use belief_core::rankings::{bel_ocf, bel_preorder, firmness, Ocf, Rank, TotalPreorder};
use serde::Serialize;
use serde_json::json;

use crate::scenario::{load_scenario, InitialState, Scenario};
use crate::{to_json, CliError, Output, EXIT_DOMAIN};

/// The operator's running state.
enum Running {
    Preorder(TotalPreorder),
    Ocf(Ocf),
    Knowledge(KnowledgeState),
    Ranking { assignment: RevisionAssignment, k: BeliefSet },
    Fl { prior: TotalPreorder, k: BeliefSet },
}

impl Running {
    fn start(s: &Scenario) -> Result<Self, CliError> {
        let domain = |e: RevisionError| CliError::Domain(e.to_string());
        Ok(match (&s.state, s.operator) {
            (InitialState::Preorder { ranks, .. }, OperatorKind::Boutilier) => Running::Preorder(ranks.clone()),
            (InitialState::Preorder { ranks, .. }, OperatorKind::Ranking) => Running::Ranking {
                assignment: RevisionAssignment::from_prior(ranks.clone()).map_err(domain)?,
                k: bel_preorder(ranks),
            },
            (InitialState::Preorder { ranks, beliefs }, OperatorKind::Fl) => Running::Fl {
                prior: ranks.clone(),
                k: Scenario::preorder_beliefs(ranks, beliefs),
            },
            (InitialState::Ocf(k), OperatorKind::Dp) => Running::Ocf(k.clone()),
            (InitialState::Ocf(k), OperatorKind::Knowledge) => {
                Running::Knowledge(KnowledgeState::initial(k.clone()).map_err(domain)?)
            }
            (InitialState::Knowledge(ks), OperatorKind::Knowledge) => Running::Knowledge(ks.clone()),
            (InitialState::Sequence { kappa, observations }, OperatorKind::Knowledge) => {
                let s0 = KnowledgeState::initial(kappa.clone()).map_err(domain)?;
                Running::Knowledge(
                    observations
                        .iter()
                        .try_fold(s0, |st, f| knowledge_observe(&st, f))
                        .map_err(domain)?,
                )
            }
            (state, op) => {
                return Err(CliError::Schema(format!(
                    "operator: operator {op} cannot run from a {} state",
                    state.kind()
                )))
            }
        })
    }

    fn apply(&mut self, f: &Formula) -> Result<(), RevisionError> {
        match self {
            Running::Preorder(p) => *p = boutilier_revise(p, f)?,
            Running::Ocf(k) => *k = dp_revise(k, f)?,
            Running::Knowledge(s) => *s = knowledge_observe(s, f)?,
            Running::Ranking { assignment, k } => *k = agm_revise(assignment, k, f)?,
            Running::Fl { prior, k } => *k = fl_revise(prior, k, f)?,
        }
        Ok(())
    }

    fn beliefs(&self) -> BeliefSet {
        match self {
            Running::Preorder(p) => bel_preorder(p),
            Running::Ocf(k) => bel_ocf(k),
            Running::Knowledge(s) => s.bel(),
            Running::Ranking { k, .. } | Running::Fl { k, .. } => *k,
        }
    }

    fn ocf(&self) -> Option<&Ocf> {
        match self {
            Running::Ocf(k) => Some(k),
            Running::Knowledge(s) => Some(s.kappa()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    /// 1-based; 0 is the initial state.
    pub index: usize,
    pub observation: Option<String>,
    pub beliefs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub firmness: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known: Option<String>,
    pub state: serde_json::Value,
    #[serde(skip)]
    state_text: String,
}

/// `p=1` when p is believed (or neither p nor ¬p is, at firmness 0), and
/// `!p=2` when ¬p is believed.
fn firmness_table(k: &Ocf, vocab: &Vocabulary) -> Vec<(String, String)> {
    (0..vocab.len())
        .map(|a| {
            let atom = Formula::Atom(a);
            let name = &vocab.atoms()[a];
            match firmness(k, &atom) {
                Some(r) => (name.clone(), r.to_string()),
                None => {
                    let r = firmness(k, &Formula::not(atom)).unwrap_or(Rank::ZERO);
                    (format!("!{name}"), r.to_string())
                }
            }
        })
        .collect()
}

fn snapshot(r: &Running, index: usize, observation: Option<&str>, vocab: &Vocabulary) -> TraceStep {
    let beliefs = r.beliefs().display(vocab).to_string();
    let (state, state_text) = match r {
        Running::Preorder(p) => (json!(p), p.rank_table()),
        Running::Ocf(k) => (json!(k), k.rank_table()),
        Running::Knowledge(s) => (json!(s.kappa()), s.kappa().rank_table()),
        Running::Ranking { .. } | Running::Fl { .. } => (json!(beliefs), format!("Cl({beliefs})")),
    };
    TraceStep {
        index,
        observation: observation.map(str::to_string),
        beliefs: beliefs.clone(),
        firmness: r.ocf().map(|k| firmness_table(k, vocab)),
        known: match r {
            Running::Knowledge(s) => Some(known_summary(s, vocab)),
            _ => None,
        },
        state,
        state_text,
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: TraceStep,
    pub steps: Vec<TraceStep>,
    /// Step number, observation text and message of a rejected observation.
    pub error: Option<(usize, String, String)>,
}

/// Runs the scenario's operator over its observations, stopping at the first
/// rejected observation.
pub fn run_scenario(s: &Scenario) -> Result<Trace, CliError> {
    let mut r = Running::start(s)?;
    let initial = snapshot(&r, 0, None, &s.vocab);
    let mut steps = Vec::new();
    for (i, (text, f)) in s.observations.iter().enumerate() {
        if let Err(e) = r.apply(f) {
            return Ok(Trace {
                initial,
                steps,
                error: Some((i + 1, text.clone(), e.to_string())),
            });
        }
        steps.push(snapshot(&r, i + 1, Some(text), &s.vocab));
    }
    Ok(Trace {
        initial,
        steps,
        error: None,
    })
}

fn render_step(out: &mut String, step: &TraceStep) {
    match &step.observation {
        Some(o) => writeln!(out, "step {}: observe {o}", step.index),
        None => writeln!(out, "initial"),
    }
    .expect("string write");
    writeln!(out, "  beliefs: {}", step.beliefs).expect("string write");
    if let Some(f) = &step.firmness {
        let cells: Vec<String> = f.iter().map(|(a, r)| format!("{a}={r}")).collect();
        writeln!(out, "  firmness: {}", cells.join(" ")).expect("string write");
    }
    if let Some(k) = &step.known {
        writeln!(out, "  known: {k}").expect("string write");
    }
    writeln!(out, "  state: {}", step.state_text).expect("string write");
}

pub fn render_text(s: &Scenario, t: &Trace) -> String {
    let mut out = String::new();
    writeln!(out, "operator: {}", s.operator).expect("string write");
    writeln!(out, "vocabulary: {}", s.vocab.atoms().join(", ")).expect("string write");
    render_step(&mut out, &t.initial);
    for step in &t.steps {
        render_step(&mut out, step);
    }
    out
}

pub fn render_json(s: &Scenario, t: &Trace) -> serde_json::Value {
    json!({
        "operator": s.operator,
        "vocabulary": s.vocab.atoms(),
        "initial": t.initial,
        "steps": t.steps,
        "error": t.error.as_ref().map(|(step, obs, msg)| json!({
            "step": step,
            "observation": obs,
            "message": msg,
        })),
    })
}

pub fn cmd_revise(path: &Path, json_mode: bool) -> Result<Output, CliError> {
    let s = load_scenario(path)?;
    let trace = run_scenario(&s)?;
    let stdout = if json_mode {
        to_json(&render_json(&s, &trace))
    } else {
        render_text(&s, &trace)
    };
    Ok(match &trace.error {
        None => Output::ok(stdout),
        Some((step, obs, msg)) => Output {
            stdout,
            stderr: format!("error: step {step}: observation `{obs}` rejected: {msg}\n"),
            code: EXIT_DOMAIN,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn scenario(op: &str, kind: &str, ranks: &str, obs: &str) -> Scenario {
        parse_scenario(&format!(
            "vocabulary = [\"b\", \"r\"]\noperator = \"{op}\"\nobservations = [{obs}]\n[state]\nkind = \"{kind}\"\nranks = {ranks}\n"
        ))
        .unwrap()
    }

    const FLAT: &str = "{ \"00\" = 0, \"01\" = 0, \"10\" = 0, \"11\" = 0 }";
    const RED_BIRD: &str = "\"b\", \"r\", \"!b\"";

    #[test]
    fn red_bird_traces() {
        let t = run_scenario(&scenario("boutilier", "preorder", FLAT, RED_BIRD)).unwrap();
        assert_eq!(t.steps.last().unwrap().beliefs, "!b & !r | !b & r");
        let t = run_scenario(&scenario("dp", "ocf", FLAT, RED_BIRD)).unwrap();
        assert_eq!(t.steps.last().unwrap().beliefs, "!b & r");
        let t = run_scenario(&scenario("fl", "preorder", FLAT, RED_BIRD)).unwrap();
        assert_eq!(t.steps.last().unwrap().beliefs, "!b & !r | !b & r");
        let t = run_scenario(&scenario("ranking", "preorder", FLAT, RED_BIRD)).unwrap();
        assert_eq!(t.steps.len(), 3);
    }

    #[test]
    fn knowledge_violation_keeps_the_partial_trace() {
        let t = run_scenario(&scenario("knowledge", "ocf", FLAT, RED_BIRD)).unwrap();
        assert_eq!(t.steps.len(), 2);
        let (step, obs, _) = t.error.unwrap();
        assert_eq!((step, obs.as_str()), (3, "!b"));
    }

    #[test]
    fn firmness_names_the_believed_literal() {
        let s = scenario(
            "dp",
            "ocf",
            "{ \"00\" = 0, \"01\" = 2, \"10\" = 1, \"11\" = 1 }",
            "",
        );
        let t = run_scenario(&s).unwrap();
        assert_eq!(
            t.initial.firmness.unwrap(),
            vec![("!b".to_string(), "1".to_string()), ("!r".to_string(), "1".to_string())]
        );
    }
}
