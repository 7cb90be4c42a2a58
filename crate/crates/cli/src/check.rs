use std::fmt::Write;
use std::path::Path;

use belief_core::logic::{enumerate_model_sets, BeliefSet, Formula};
use belief_core::operators::{
    agm_revise, boutilier_revise, dp_revise, fl_revise, knowledge_observe, KnowledgeEvaluator,
    KnowledgeState, OperatorKind, RevisionAssignment, RevisionError,
};
use belief_core::postulates::{
    boutilier_nullification_check, check_c, check_fl, check_i_knowledge, check_r,
    check_r_primed, check_weak_i4, enumerate_knowledge_states, enumerate_ocfs,
    enumerate_preorders, CheckConfig, CheckError, CheckReport, PostulateId, Status,
};
use belief_core::rankings::{bel_ocf, bel_preorder, Ocf, TotalPreorder};
use serde_json::json;

use crate::scenario::{load_scenario, InitialState, Scenario};
use crate::{to_json, Bounds, CliError, Output, EXIT_SIGNATURE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Agm,
    AgmPrimed,
    Dp,
    Lehmann,
    WeakI4,
    Fl,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Agm,
        Suite::AgmPrimed,
        Suite::Dp,
        Suite::Lehmann,
        Suite::WeakI4,
        Suite::Fl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Agm => "agm",
            Suite::AgmPrimed => "agm-primed",
            Suite::Dp => "dp",
            Suite::Lehmann => "lehmann",
            Suite::WeakI4 => "weak-i4",
            Suite::Fl => "fl",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

fn all(ids: impl IntoIterator<Item = PostulateId>, status: Status) -> Vec<(PostulateId, Status)> {
    ids.into_iter().map(|id| (id, status)).collect()
}

/// The statuses a suite must produce for an operator, or `None` when the
/// pairing makes no sense.
pub fn expected_signature(suite: Suite, op: OperatorKind) -> Option<Vec<(PostulateId, Status)>> {
    use OperatorKind::*;
    use Status::*;
    let r = |primed| (1..=8).map(move |i| PostulateId::r(i, primed));
    let c = (1..=4).map(|i| PostulateId::c(i, true));
    Some(match (suite, op) {
        (Suite::Agm, Ranking | Fl) => all(r(false), Pass),
        (Suite::AgmPrimed, Boutilier | Dp) => {
            let mut v = all(r(true), Pass);
            v.push((PostulateId::R9_PRIME, Fail));
            if op == Boutilier {
                v.push((PostulateId::NULLIFICATION, Pass));
            }
            v
        }
        (Suite::AgmPrimed, Knowledge) => {
            let mut v = all(r(true), Pass);
            v.push((PostulateId::R9_PRIME, Pass));
            v
        }
        (Suite::Dp, Dp | Boutilier) => all(c, Pass),
        (Suite::Dp, Knowledge) => c
            .map(|id| (id, if id.index == 2 { Vacuous } else { Pass }))
            .collect(),
        (Suite::Lehmann, Knowledge) => (1..=7)
            .map(|i| {
                let s = match i {
                    4 => Fail,
                    7 => Vacuous,
                    _ => Pass,
                };
                (PostulateId::i(i), s)
            })
            .collect(),
        (Suite::WeakI4, Knowledge) => vec![(PostulateId::WEAK_I4, Pass)],
        (Suite::Fl, Fl) => {
            let mut v = all(r(false), Pass);
            v.push((PostulateId::FL, Pass));
            v
        }
        _ => return None,
    })
}

fn core(e: CheckError) -> CliError {
    match e {
        CheckError::Config(m) => CliError::Schema(m),
        other => CliError::Domain(other.to_string()),
    }
}

fn belief_sets(cfg: &CheckConfig) -> Result<Vec<BeliefSet>, CliError> {
    Ok(enumerate_model_sets(&cfg.vocab)
        .map_err(|e| CliError::Schema(e.to_string()))?
        .into_iter()
        .map(BeliefSet::from_models)
        .collect())
}

/// The prior preorders to check belief-set operators against.
fn priors(cfg: &CheckConfig, scenario: Option<&Scenario>, op: OperatorKind) -> Result<Vec<TotalPreorder>, CliError> {
    match scenario.map(|s| &s.state) {
        Some(InitialState::Preorder { ranks, .. }) => Ok(vec![ranks.clone()]),
        Some(other) => Err(CliError::Schema(format!("state: a {} state has no prior preorder", other.kind()))),
        None if op == OperatorKind::Ranking => enumerate_preorders(&cfg.vocab).map_err(core),
        None => Ok(vec![TotalPreorder::flat(cfg.vocab.len())]),
    }
}

fn merge_runs(runs: Vec<Vec<CheckReport>>, cap: usize) -> Vec<CheckReport> {
    let mut it = runs.into_iter();
    let mut acc = it.next().unwrap_or_default();
    for run in it {
        for (a, r) in acc.iter_mut().zip(run) {
            a.merge(r, cap);
        }
    }
    acc
}

fn finite_ocfs(cfg: &CheckConfig, scenario: Option<&Scenario>) -> Result<Vec<Ocf>, CliError> {
    match scenario.map(|s| &s.state) {
        Some(InitialState::Ocf(k)) => Ok(vec![k.clone()]),
        Some(other) => Err(CliError::Schema(format!(
            "state: suite needs an initial ocf state, found {}",
            other.kind()
        ))),
        None => enumerate_ocfs(&cfg.vocab, cfg.max_rank, false).map_err(core),
    }
}

fn knowledge_bel(s: &KnowledgeState) -> BeliefSet {
    s.bel()
}

fn knowledge_states(cfg: &CheckConfig, scenario: Option<&Scenario>) -> Result<Vec<KnowledgeState>, CliError> {
    match scenario.map(|s| &s.state) {
        None => enumerate_knowledge_states(&cfg.vocab, cfg.max_rank).map_err(core),
        Some(InitialState::Ocf(k)) => Ok(vec![KnowledgeState::initial(k.clone()).map_err(|e| CliError::Schema(e.to_string()))?]),
        Some(InitialState::Knowledge(s)) => Ok(vec![s.clone()]),
        Some(InitialState::Sequence { kappa, observations }) => {
            let s0 = KnowledgeState::initial(kappa.clone()).map_err(|e| CliError::Schema(e.to_string()))?;
            Ok(vec![observations
                .iter()
                .try_fold(s0, |s, f| knowledge_observe(&s, f))
                .map_err(|e| CliError::Schema(e.to_string()))?])
        }
        Some(other) => Err(CliError::Schema(format!("state: knowledge needs an ocf state, found {}", other.kind()))),
    }
}

fn ocf_states(cfg: &CheckConfig, scenario: Option<&Scenario>) -> Result<Vec<Ocf>, CliError> {
    match scenario.map(|s| &s.state) {
        None => enumerate_ocfs(&cfg.vocab, cfg.max_rank, true).map_err(core),
        Some(InitialState::Ocf(k)) => Ok(vec![k.clone()]),
        Some(other) => Err(CliError::Schema(format!("state: dp needs an ocf state, found {}", other.kind()))),
    }
}

fn preorder_states(cfg: &CheckConfig, scenario: Option<&Scenario>) -> Result<Vec<TotalPreorder>, CliError> {
    match scenario.map(|s| &s.state) {
        None => enumerate_preorders(&cfg.vocab).map_err(core),
        Some(InitialState::Preorder { ranks, .. }) => Ok(vec![ranks.clone()]),
        Some(other) => Err(CliError::Schema(format!("state: boutilier needs a preorder state, found {}", other.kind()))),
    }
}

/// Runs the suite's postulate checks, returning the reports and a short
/// description of the states quantified over.
pub fn run_suite(
    suite: Suite,
    op: OperatorKind,
    cfg: &CheckConfig,
    scenario: Option<&Scenario>,
) -> Result<(Vec<CheckReport>, String), CliError> {
    let cap = cfg.max_counterexamples;
    use OperatorKind::*;
    match (suite, op) {
        (Suite::Agm | Suite::Fl, Ranking | Fl) => {
            let domain = belief_sets(cfg)?;
            let priors = priors(cfg, scenario, op)?;
            let mut runs = Vec::new();
            for prior in &priors {
                let reports = if op == Ranking {
                    let a = RevisionAssignment::from_prior(prior.clone()).map_err(|e| CliError::Schema(e.to_string()))?;
                    let f = |k: &BeliefSet, g: &Formula| agm_revise(&a, k, g);
                    check_r(&f, &domain, cfg).map_err(core)?
                } else {
                    let f = |k: &BeliefSet, g: &Formula| fl_revise(prior, k, g);
                    let mut r = check_r(&f, &domain, cfg).map_err(core)?;
                    if suite == Suite::Fl {
                        r.push(check_fl(&f, &domain, cfg).map_err(core)?);
                    }
                    r
                };
                runs.push(reports);
            }
            let what = format!("{} prior preorder(s) x {} belief sets", priors.len(), domain.len());
            Ok((merge_runs(runs, cap), what))
        }
        (Suite::AgmPrimed, Boutilier) => {
            let states = preorder_states(cfg, scenario)?;
            let mut reports = check_r_primed(&boutilier_revise, &bel_preorder, &states, cfg).map_err(core)?;
            let runs = states
                .iter()
                .map(|p| boutilier_nullification_check(p, cfg).map(|r| vec![r]))
                .collect::<Result<Vec<_>, _>>()
                .map_err(core)?;
            reports.extend(merge_runs(runs, cap));
            Ok((reports, format!("{} preorders", states.len())))
        }
        (Suite::AgmPrimed, Dp) => {
            let states = ocf_states(cfg, scenario)?;
            let reports = check_r_primed(&dp_revise, &bel_ocf, &states, cfg).map_err(core)?;
            Ok((reports, format!("{} OCFs", states.len())))
        }
        (Suite::AgmPrimed, Knowledge) => {
            let states = knowledge_states(cfg, scenario)?;
            let reports = check_r_primed(&knowledge_observe, &knowledge_bel, &states, cfg).map_err(core)?;
            Ok((reports, format!("{} knowledge states", states.len())))
        }
        (Suite::Dp, Dp) => {
            let states = ocf_states(cfg, scenario)?;
            let reports = check_c(&dp_revise, &bel_ocf, &states, cfg, true).map_err(core)?;
            Ok((reports, format!("{} OCFs", states.len())))
        }
        (Suite::Dp, Boutilier) => {
            let states = preorder_states(cfg, scenario)?;
            let reports = check_c(&boutilier_revise, &bel_preorder, &states, cfg, true).map_err(core)?;
            Ok((reports, format!("{} preorders", states.len())))
        }
        (Suite::Dp, Knowledge) => {
            let states = knowledge_states(cfg, scenario)?;
            let reports = check_c(&knowledge_observe, &knowledge_bel, &states, cfg, true).map_err(core)?;
            Ok((reports, format!("{} knowledge states", states.len())))
        }
        (Suite::Lehmann, Knowledge) => {
            let ocfs = finite_ocfs(cfg, scenario)?;
            let reports = check_i_knowledge(&ocfs, cfg).map_err(core)?;
            Ok((reports, format!("{} initial OCFs, sequences up to length {}", ocfs.len(), cfg.sequence_length_bound)))
        }
        (Suite::WeakI4, Knowledge) => {
            let ocfs = finite_ocfs(cfg, scenario)?;
            let runs = ocfs
                .iter()
                .map(|k| {
                    let eval = KnowledgeEvaluator::from_ocf(k.clone()).map_err(|e: RevisionError| CliError::Schema(e.to_string()))?;
                    check_weak_i4(&eval, cfg).map(|r| vec![r]).map_err(core)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((merge_runs(runs, cap), format!("{} initial OCFs", ocfs.len())))
        }
        _ => Err(CliError::Schema(format!(
            "suite {} does not apply to operator {op}",
            suite.name()
        ))),
    }
}

/// Postulates whose status differs from the expected signature.
pub fn mismatches(reports: &[CheckReport], expected: &[(PostulateId, Status)]) -> Vec<String> {
    let mut out = Vec::new();
    for &(id, want) in expected {
        match reports.iter().find(|r| r.postulate == id) {
            Some(r) if r.status == want => {}
            Some(r) => out.push(format!("{id}: expected {want}, got {}", r.status)),
            None => out.push(format!("{id}: expected {want}, not checked")),
        }
    }
    out
}

const SHOWN_COUNTEREXAMPLES: usize = 3;

pub fn render_reports(out: &mut String, reports: &[CheckReport]) {
    for r in reports {
        writeln!(out, "{}", r.summary_line()).expect("string write");
        for (i, cex) in r.counterexamples.iter().take(SHOWN_COUNTEREXAMPLES).enumerate() {
            writeln!(out, "  counterexample {}:", i + 1).expect("string write");
            for b in &cex.bindings {
                writeln!(out, "    {} = {}", b.name, b.text).expect("string write");
            }
            for line in &cex.trace {
                writeln!(out, "    {line}").expect("string write");
            }
        }
        if let Some(note) = &r.note {
            writeln!(out, "  note: {note}").expect("string write");
        }
    }
}

pub fn cmd_check(
    suite: &str,
    operator: Option<&str>,
    scenario: Option<&Path>,
    bounds: &Bounds,
    json_mode: bool,
) -> Result<Output, CliError> {
    let suite_k = Suite::parse(suite).ok_or_else(|| {
        CliError::Parse(format!(
            "--suite: unknown suite {suite:?} (expected agm, agm-primed, dp, lehmann, weak-i4 or fl)"
        ))
    })?;
    let scenario = scenario.map(load_scenario).transpose()?;
    let op = match (operator, &scenario) {
        (Some(name), _) => {
            let op = OperatorKind::parse(name)
                .ok_or_else(|| CliError::Parse(format!("--operator: unknown operator {name:?}")))?;
            if let Some(s) = &scenario {
                if s.operator != op {
                    return Err(CliError::Schema(format!(
                        "--operator {op} differs from the scenario's operator {}",
                        s.operator
                    )));
                }
            }
            op
        }
        (None, Some(s)) => s.operator,
        (None, None) => return Err(CliError::Parse("--operator is required without --scenario".into())),
    };
    let expected = expected_signature(suite_k, op).ok_or_else(|| {
        CliError::Schema(format!("suite {suite} does not apply to operator {op}"))
    })?;
    let cfg = match &scenario {
        Some(s) => bounds.config_for(s.vocab.clone()),
        None => bounds.config()?,
    };
    cfg.validate().map_err(core)?;
    let (reports, scope) = run_suite(suite_k, op, &cfg, scenario.as_ref())?;
    let bad = mismatches(&reports, &expected);

    let stdout = if json_mode {
        to_json(&json!({
            "suite": suite,
            "operator": op,
            "vocabulary": cfg.vocab.atoms(),
            "max_rank": cfg.max_rank,
            "sequence_length_bound": cfg.sequence_length_bound,
            "scope": scope,
            "reports": reports,
            "expected": expected.iter().map(|(id, s)| json!({"postulate": id, "status": s})).collect::<Vec<_>>(),
            "signature_matches": bad.is_empty(),
            "mismatches": bad,
        }))
    } else {
        let mut out = String::new();
        writeln!(
            out,
            "suite {suite}, operator {op}, vocabulary {} ({scope})",
            cfg.vocab.atoms().join(", ")
        )
        .expect("string write");
        render_reports(&mut out, &reports);
        if bad.is_empty() {
            writeln!(out, "signature: as expected").expect("string write");
        } else {
            writeln!(out, "signature: UNEXPECTED").expect("string write");
            for m in &bad {
                writeln!(out, "  {m}").expect("string write");
            }
        }
        out
    };
    Ok(Output {
        stdout,
        stderr: String::new(),
        code: if bad.is_empty() { 0 } else { EXIT_SIGNATURE },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairings() {
        assert!(expected_signature(Suite::Agm, OperatorKind::Dp).is_none());
        assert!(expected_signature(Suite::Lehmann, OperatorKind::Boutilier).is_none());
        assert_eq!(expected_signature(Suite::Agm, OperatorKind::Ranking).unwrap().len(), 8);
        assert_eq!(expected_signature(Suite::Fl, OperatorKind::Fl).unwrap().len(), 9);
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
    }

    #[test]
    fn mismatch_lines() {
        let mut r = CheckReport::new(PostulateId::i(4));
        r.instances_checked = 1;
        r.status = Status::Pass;
        let bad = mismatches(&[r], &[(PostulateId::i(4), Status::Fail), (PostulateId::i(7), Status::Vacuous)]);
        assert_eq!(bad, ["I4: expected FAIL, got PASS", "I7: expected VACUOUS, not checked"]);
    }
}
