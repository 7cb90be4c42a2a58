//! I1–I7 over observation sequences, plus the weak form of I4 that holds
//! when the repeated observation is already known.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::logic::{BeliefSet, Formula, Vocabulary};
use crate::operators::{BelEvaluator, KnowledgeEvaluator, RevisionError};
use crate::rankings::Ocf;

use super::{
    merge_all, Binding, CheckConfig, CheckError, CheckReport, Counterexample, Family, Outcome,
    PostulateId,
};

/// Memoized `Bel` over the sequences the checks enumerate.
struct Cached<'a> {
    eval: &'a dyn BelEvaluator,
    table: HashMap<Vec<Formula>, Result<BeliefSet, RevisionError>>,
}

impl<'a> Cached<'a> {
    fn empty(eval: &'a dyn BelEvaluator) -> Self {
        Cached {
            eval,
            table: HashMap::new(),
        }
    }

    fn filled(eval: &'a dyn BelEvaluator, pool: &[Formula], bound: usize) -> Self {
        let mut c = Self::empty(eval);
        for len in 0..=bound {
            for seq in sequences(pool, len) {
                let r = eval.bel(&seq);
                c.table.insert(seq, r);
            }
        }
        c
    }

    /// `None` when the sequence is outside the evaluator's domain.
    fn bel(&self, seq: &[Formula]) -> Result<Option<BeliefSet>, CheckError> {
        let r = match self.table.get(seq) {
            Some(r) => r.clone(),
            None => self.eval.bel(seq),
        };
        match r {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.is_out_of_domain() => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

/// All sequences of exactly `len` pool members, in lexicographic pool order.
fn sequences(pool: &[Formula], len: usize) -> Vec<Vec<Formula>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                pool.iter().map(move |f| {
                    let mut t = s.clone();
                    t.push(f.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn cat(parts: &[&[Formula]]) -> Vec<Formula> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

macro_rules! bel_or_skip {
    ($c:expr, $seq:expr) => {
        match $c.bel($seq)? {
            Some(b) => b,
            None => return Ok(Outcome::Skip),
        }
    };
}

#[derive(Clone, Copy)]
struct Args<'a> {
    sigma: &'a [Formula],
    phi: &'a Formula,
    psi: &'a Formula,
    rho: &'a [Formula],
}

fn i_instance(c: &Cached<'_>, index: u8, a: Args<'_>, vocab: &Vocabulary) -> Result<Outcome, CheckError> {
    let atoms = vocab.len();
    let show = |b: &BeliefSet| b.display(vocab).to_string();
    let phi_m = a.phi.models_in(atoms);
    let psi_m = a.psi.models_in(atoms);
    let compare = |lhs: &str, x: BeliefSet, rhs: &str, y: BeliefSet| {
        if x == y {
            Outcome::Hold
        } else {
            Outcome::Fail(vec![format!("{lhs} = {}", show(&x)), format!("{rhs} = {}", show(&y))])
        }
    };
    Ok(match index {
        1 => {
            let b = bel_or_skip!(c, a.sigma);
            if b.is_consistent() {
                Outcome::Hold
            } else {
                Outcome::Fail(vec!["Bel(σ) is inconsistent".into()])
            }
        }
        2 => {
            let b = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi)]));
            if b.entails(&phi_m) {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![format!("Bel(σ·φ) = {} does not entail φ", show(&b))])
            }
        }
        3 => {
            let b1 = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi)]));
            if !b1.entails(&psi_m) {
                return Ok(Outcome::PreconditionFalse);
            }
            let b0 = bel_or_skip!(c, a.sigma);
            if b0.models().intersection(&phi_m).is_subset(&psi_m) {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![
                    format!("Bel(σ·φ) = {} contains ψ", show(&b1)),
                    format!("Bel(σ) = {} does not contain φ → ψ", show(&b0)),
                ])
            }
        }
        4 => {
            let b0 = bel_or_skip!(c, a.sigma);
            if !b0.entails(&phi_m) {
                return Ok(Outcome::PreconditionFalse);
            }
            let x = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi), a.rho]));
            let y = bel_or_skip!(c, &cat(&[a.sigma, a.rho]));
            let mut out = compare("Bel(σ·φ·ρ)", x, "Bel(σ·ρ)", y);
            if let Outcome::Fail(t) = &mut out {
                t.insert(0, format!("Bel(σ) = {} contains φ", show(&b0)));
            }
            out
        }
        5 => {
            if !psi_m.is_subset(&phi_m) {
                return Ok(Outcome::PreconditionFalse);
            }
            let x = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi), std::slice::from_ref(a.psi), a.rho]));
            let y = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.psi), a.rho]));
            compare("Bel(σ·φ·ψ·ρ)", x, "Bel(σ·ψ·ρ)", y)
        }
        6 => {
            let b = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi)]));
            if b.models().is_disjoint(&psi_m) {
                return Ok(Outcome::PreconditionFalse);
            }
            let conj = Formula::and(a.phi.clone(), a.psi.clone());
            let x = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi), std::slice::from_ref(a.psi), a.rho]));
            let y = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi), std::slice::from_ref(&conj), a.rho]));
            compare("Bel(σ·φ·ψ·ρ)", x, "Bel(σ·φ·(φ∧ψ)·ρ)", y)
        }
        7 => {
            let neg = Formula::not(a.phi.clone());
            let x = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(&neg), std::slice::from_ref(a.phi)]));
            let b0 = bel_or_skip!(c, a.sigma);
            let expanded = b0.expand_models(&phi_m);
            if expanded.models().is_subset(x.models()) {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![
                    format!("Bel(σ·¬φ·φ) = {}", show(&x)),
                    format!("Cl(Bel(σ) ∪ {{φ}}) = {}", show(&expanded)),
                ])
            }
        }
        _ => unreachable!("no such postulate I{index}"),
    })
}

fn weak_i4_instance(
    eval: &dyn BelEvaluator,
    c: &Cached<'_>,
    a: Args<'_>,
    vocab: &Vocabulary,
) -> Result<Outcome, CheckError> {
    let known = match eval.known(a.sigma) {
        None => return Err(not_knowledge()),
        Some(Ok(k)) => k,
        Some(Err(e)) if e.is_out_of_domain() => return Ok(Outcome::Skip),
        Some(Err(e)) => return Err(e.into()),
    };
    if !known.is_subset(&a.phi.models_in(vocab.len())) {
        return Ok(Outcome::PreconditionFalse);
    }
    let x = bel_or_skip!(c, &cat(&[a.sigma, std::slice::from_ref(a.phi), a.rho]));
    let y = bel_or_skip!(c, &cat(&[a.sigma, a.rho]));
    Ok(if x == y {
        Outcome::Hold
    } else {
        Outcome::Fail(vec![
            format!("Bel(σ·φ·ρ) = {}", x.display(vocab)),
            format!("Bel(σ·ρ) = {}", y.display(vocab)),
        ])
    })
}

fn not_knowledge() -> CheckError {
    CheckError::EvaluatorKind("weak I4 needs an evaluator that models knowledge".into())
}

fn bindings(a: Args<'_>, names: &[&str], vocab: &Vocabulary) -> Vec<Binding> {
    names
        .iter()
        .map(|&n| match n {
            "σ" => Binding::sequence(n, a.sigma, vocab),
            "ρ" => Binding::sequence(n, a.rho, vocab),
            "φ" => Binding::formula(n, a.phi, vocab),
            _ => Binding::formula(n, a.psi, vocab),
        })
        .collect()
}

fn i_ids() -> Vec<PostulateId> {
    (1..=7).map(PostulateId::i).collect()
}

/// Runs every instance of I1–I7 against one evaluator.
fn check_i_with(
    eval: &dyn BelEvaluator,
    cfg: &CheckConfig,
    prefix: &[Binding],
) -> Result<Vec<CheckReport>, CheckError> {
    let pool = cfg.revision_pool()?;
    let all = cfg.pool()?;
    let bound = cfg.sequence_length_bound;
    let cap = cfg.max_counterexamples;
    let vocab = &cfg.vocab;
    let c = Cached::filled(eval, &pool, bound);
    let mut reports: Vec<CheckReport> = i_ids().into_iter().map(CheckReport::new).collect();
    let truth = Formula::True;
    let mut record = |idx: u8, a: Args<'_>, names: &[&str]| -> Result<(), CheckError> {
        let o = i_instance(&c, idx, a, vocab)?;
        reports[idx as usize - 1].record(o, cap, || {
            let mut b = prefix.to_vec();
            b.extend(bindings(a, names, vocab));
            b
        });
        Ok(())
    };

    for len in 0..=bound {
        for sigma in sequences(&pool, len) {
            let a = Args { sigma: &sigma, phi: &truth, psi: &truth, rho: &[] };
            record(1, a, &["σ"])?;
        }
    }
    for len in 0..bound {
        for sigma in sequences(&pool, len) {
            for phi in &pool {
                let a = Args { sigma: &sigma, phi, psi: &truth, rho: &[] };
                record(2, a, &["σ", "φ"])?;
                for psi in &all {
                    record(3, Args { psi, ..a }, &["σ", "φ", "ψ"])?;
                }
            }
        }
    }
    for sl in 0..bound {
        for sigma in sequences(&pool, sl) {
            for phi in &pool {
                for rl in 0..bound - sl {
                    for rho in sequences(&pool, rl) {
                        let a = Args { sigma: &sigma, phi, psi: &truth, rho: &rho };
                        record(4, a, &["σ", "φ", "ρ"])?;
                    }
                }
            }
        }
    }
    for sl in 0..bound.saturating_sub(1) {
        for sigma in sequences(&pool, sl) {
            for phi in &pool {
                for psi in &pool {
                    for rl in 0..bound - 1 - sl {
                        for rho in sequences(&pool, rl) {
                            let a = Args { sigma: &sigma, phi, psi, rho: &rho };
                            record(5, a, &["σ", "φ", "ψ", "ρ"])?;
                            record(6, a, &["σ", "φ", "ψ", "ρ"])?;
                        }
                    }
                }
            }
            for phi in &pool {
                if Formula::not(phi.clone()).models_in(vocab.len()).is_empty() {
                    continue;
                }
                let a = Args { sigma: &sigma, phi, psi: &truth, rho: &[] };
                record(7, a, &["σ", "φ"])?;
            }
        }
    }
    Ok(reports)
}

/// Checks I1–I7 for `eval` over all sequences of pool formulas up to the
/// configured length. Sequences outside the evaluator's domain are skipped
/// and tallied.
pub fn check_i(eval: &dyn BelEvaluator, cfg: &CheckConfig) -> Result<Vec<CheckReport>, CheckError> {
    check_i_with(eval, cfg, &[])
}

/// Runs [`check_i`] for the knowledge evaluator started from each of
/// `initial` and merges the reports. Counterexamples name the initial OCF as
/// `κ0`.
pub fn check_i_knowledge(initial: &[Ocf], cfg: &CheckConfig) -> Result<Vec<CheckReport>, CheckError> {
    let parts = initial
        .par_iter()
        .map(|k| {
            let eval = KnowledgeEvaluator::from_ocf(k.clone())?;
            check_i_with(&eval, cfg, &[Binding::state("κ0", k, &cfg.vocab)])
        })
        .collect::<Result<Vec<_>, CheckError>>()?;
    Ok(merge_all(parts, &i_ids(), cfg.max_counterexamples))
}

/// If φ is known after σ then Bel(σ·φ·ρ) = Bel(σ·ρ).
pub fn check_weak_i4(eval: &dyn BelEvaluator, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    if eval.known(&[]).is_none() {
        return Err(not_knowledge());
    }
    let pool = cfg.revision_pool()?;
    let bound = cfg.sequence_length_bound;
    let c = Cached::filled(eval, &pool, bound);
    let truth = Formula::True;
    let mut report = CheckReport::new(PostulateId::WEAK_I4);
    for sl in 0..bound {
        for sigma in sequences(&pool, sl) {
            for phi in &pool {
                for rl in 0..bound - sl {
                    for rho in sequences(&pool, rl) {
                        let a = Args { sigma: &sigma, phi, psi: &truth, rho: &rho };
                        let o = weak_i4_instance(eval, &c, a, &cfg.vocab)?;
                        report.record(o, cfg.max_counterexamples, || {
                            bindings(a, &["σ", "φ", "ρ"], &cfg.vocab)
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Re-evaluates an I-family or weak-I4 counterexample against `eval`.
/// Returns whether the failure reproduces.
pub fn replay_i(
    id: PostulateId,
    cex: &Counterexample,
    eval: &dyn BelEvaluator,
    cfg: &CheckConfig,
) -> Result<bool, CheckError> {
    let truth = Formula::True;
    let sigma = cex.sequence("σ").unwrap_or(&[]);
    let rho = cex.sequence("ρ").unwrap_or(&[]);
    let phi = cex.formula("φ").unwrap_or(&truth);
    let psi = cex.formula("ψ").unwrap_or(&truth);
    let a = Args { sigma, phi, psi, rho };
    let c = Cached::empty(eval);
    let outcome = match id.family {
        Family::I => i_instance(&c, id.index, a, &cfg.vocab)?,
        Family::WeakI4 => weak_i4_instance(eval, &c, a, &cfg.vocab)?,
        _ => return Err(CheckError::Config(format!("{id} is not a sequence postulate"))),
    };
    Ok(matches!(outcome, Outcome::Fail(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, WorldSet};
    use crate::postulates::{BoundValue, Status};

    fn cfg() -> CheckConfig {
        CheckConfig::new(Vocabulary::new(&["p", "q"]).unwrap())
    }

    fn running() -> Ocf {
        // worlds 00, 01, 10, 11
        Ocf::from_finite(2, &[3, 1, 2, 0]).unwrap()
    }

    #[test]
    fn sequences_enumerate_in_order() {
        let pool = vec![Formula::Atom(0), Formula::Atom(1)];
        assert_eq!(sequences(&pool, 0), vec![Vec::<Formula>::new()]);
        let two = sequences(&pool, 2);
        assert_eq!(two.len(), 4);
        assert_eq!(two[1], vec![Formula::Atom(0), Formula::Atom(1)]);
    }

    #[test]
    fn knowledge_signature() {
        let mut cfg = cfg();
        cfg.max_counterexamples = 100_000;
        let eval = KnowledgeEvaluator::from_ocf(running()).unwrap();
        let reports = check_i(&eval, &cfg).unwrap();
        let status: Vec<Status> = reports.iter().map(|r| r.status).collect();
        use Status::*;
        assert_eq!(status, [Pass, Pass, Pass, Fail, Pass, Pass, Vacuous]);

        let v = &cfg.vocab;
        let p = WorldSet::from_mask(2, 0b1100);
        let target = parse_formula("!p | !q", v).unwrap().models_in(2);
        let i4 = &reports[3];
        let hit = i4.counterexamples.iter().find(|c| {
            matches!(c.binding("σ"), Some(BoundValue::Sequence(s)) if s.is_empty())
                && matches!(c.binding("φ"), Some(BoundValue::Formula(f)) if f.models_in(2) == p)
                && matches!(c.binding("ρ"), Some(BoundValue::Sequence(r))
                    if r.len() == 1 && r[0].models_in(2) == target)
        });
        let hit = hit.expect("the running counterexample is found");
        assert!(replay_i(i4.postulate, hit, &eval, &cfg).unwrap());
        for cex in &i4.counterexamples {
            assert!(replay_i(i4.postulate, cex, &eval, &cfg).unwrap());
        }
    }

    #[test]
    fn weak_i4_holds_for_knowledge() {
        let cfg = cfg();
        let eval = KnowledgeEvaluator::from_ocf(running()).unwrap();
        let r = check_weak_i4(&eval, &cfg).unwrap();
        assert_eq!(r.status, Status::Pass, "{}", r.summary_line());
        assert!(r.precondition_false > 0);
    }

    struct NoKnowledge;
    impl BelEvaluator for NoKnowledge {
        fn atom_count(&self) -> usize {
            2
        }
        fn bel(&self, _: &[Formula]) -> Result<BeliefSet, RevisionError> {
            Ok(BeliefSet::tautologies(2))
        }
    }

    #[test]
    fn weak_i4_rejects_other_evaluators() {
        assert!(matches!(
            check_weak_i4(&NoKnowledge, &cfg()),
            Err(CheckError::EvaluatorKind(_))
        ));
        // a constant evaluator violates I2 but nothing else in the way of I1
        let reports = check_i(&NoKnowledge, &cfg()).unwrap();
        assert_eq!(reports[0].status, Status::Pass);
        assert_eq!(reports[1].status, Status::Fail);
    }

    #[test]
    fn merged_knowledge_reports_name_the_initial_ocf() {
        let mut cfg = cfg();
        cfg.sequence_length_bound = 2;
        let ocfs = vec![Ocf::flat(2), running()];
        let reports = check_i_knowledge(&ocfs, &cfg).unwrap();
        assert_eq!(reports[3].status, Status::Fail);
        let cex = &reports[3].counterexamples[0];
        assert_eq!(cex.bindings[0].name, "κ0");
        assert!(reports.iter().all(|r| r.postulate.family == Family::I));
    }
}
