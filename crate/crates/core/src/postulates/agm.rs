//! R1–R8 on belief sets, their primed forms on epistemic states, R9′ and FL.

use rayon::prelude::*;

use crate::logic::{BeliefSet, Formula};

use super::{
    in_domain, merge_all, Binding, BelFn, CheckConfig, CheckError, CheckReport, Counterexample,
    Ctx, DomainPolicy, EpistemicState, Op, Outcome, PostulateId,
};

fn state_name(primed: bool) -> &'static str {
    if primed {
        "E"
    } else {
        "K"
    }
}

/// Evaluates postulate R`index` (9 means R9′) at one instance. `psi` is the
/// second formula for R6 (an equivalent variant of φ) and R7–R9.
pub(crate) fn r_instance<S: EpistemicState>(
    ctx: &Ctx<'_, S>,
    index: u8,
    e: &S,
    phi: &Formula,
    psi: Option<&Formula>,
) -> Result<Outcome, CheckError> {
    let atoms = ctx.vocab.len();
    let b = (ctx.bel)(e);
    let phi_m = phi.models_in(atoms);
    let outcome = match index {
        1 => {
            in_domain!(ctx.revise(e, phi));
            Outcome::Hold
        }
        2 => {
            let r = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            if r.entails(&phi_m) {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![format!("Bel(E*φ) = {} does not entail φ", ctx.show(&r))])
            }
        }
        3 => {
            let r = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            let expanded = b.expand_models(&phi_m);
            if expanded.models().is_subset(r.models()) {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![
                    format!("Bel(E*φ) = {}", ctx.show(&r)),
                    format!("Cl(Bel(E) ∪ {{φ}}) = {} is not a superset", ctx.show(&expanded)),
                ])
            }
        }
        4 => {
            let expanded = b.expand_models(&phi_m);
            if !expanded.is_consistent() {
                return Ok(Outcome::PreconditionFalse);
            }
            let r = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            if r.models().is_subset(expanded.models()) {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![
                    format!("¬φ ∉ Bel(E) = {}", ctx.show(&b)),
                    format!("Bel(E*φ) = {}", ctx.show(&r)),
                    format!("Cl(Bel(E) ∪ {{φ}}) = {} is not contained in it", ctx.show(&expanded)),
                ])
            }
        }
        5 => {
            if phi_m.is_empty() {
                return Ok(Outcome::PreconditionFalse);
            }
            let r = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            if r.is_consistent() {
                Outcome::Hold
            } else {
                Outcome::Fail(vec!["φ is consistent but Bel(E*φ) is inconsistent".into()])
            }
        }
        6 => {
            let psi = psi.expect("R6 needs a variant");
            if psi.models_in(atoms) != phi_m {
                return Ok(Outcome::PreconditionFalse);
            }
            let r1 = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            let r2 = (ctx.bel)(&in_domain!(ctx.revise(e, psi)));
            if r1 == r2 {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![
                    format!("Bel(E*φ) = {}", ctx.show(&r1)),
                    format!("Bel(E*ψ) = {}", ctx.show(&r2)),
                ])
            }
        }
        7..=9 => {
            let psi = psi.expect("needs ψ");
            let psi_m = psi.models_in(atoms);
            let conj = Formula::and(phi.clone(), psi.clone());
            if conj.models_in(atoms).is_empty() {
                return Ok(Outcome::PreconditionFalse);
            }
            let r1 = in_domain!(ctx.revise(e, phi));
            let b1 = (ctx.bel)(&r1);
            let with_psi = b1.expand_models(&psi_m);
            if index == 8 && !with_psi.is_consistent() {
                return Ok(Outcome::PreconditionFalse);
            }
            let rc = (ctx.bel)(&in_domain!(ctx.revise(e, &conj)));
            match index {
                7 if with_psi.models().is_subset(rc.models()) => Outcome::Hold,
                8 if rc.models().is_subset(with_psi.models()) => Outcome::Hold,
                9 => {
                    let r12 = (ctx.bel)(&in_domain!(ctx.revise(&r1, psi)));
                    if r12 == rc {
                        Outcome::Hold
                    } else {
                        Outcome::Fail(vec![
                            format!("Bel(E*φ*ψ) = {}", ctx.show(&r12)),
                            format!("Bel(E*(φ∧ψ)) = {}", ctx.show(&rc)),
                        ])
                    }
                }
                _ => Outcome::Fail(vec![
                    format!("Bel(E*φ) = {}", ctx.show(&b1)),
                    format!("Cl(Bel(E*φ) ∪ {{ψ}}) = {}", ctx.show(&with_psi)),
                    format!("Bel(E*(φ∧ψ)) = {}", ctx.show(&rc)),
                ]),
            }
        }
        _ => unreachable!("no such postulate R{index}"),
    };
    Ok(outcome)
}

fn double_negation(f: &Formula) -> Formula {
    Formula::not(Formula::not(f.clone()))
}

fn check_family<S: EpistemicState>(
    ctx: &Ctx<'_, S>,
    states: &[S],
    cfg: &CheckConfig,
    primed: bool,
) -> Result<Vec<CheckReport>, CheckError> {
    let pool = cfg.revision_pool()?;
    let mut ids: Vec<PostulateId> = (1..=8).map(|i| PostulateId::r(i, primed)).collect();
    if primed {
        ids.push(PostulateId::R9_PRIME);
    }
    let cap = cfg.max_counterexamples;
    let name = state_name(primed);
    let parts = states
        .par_iter()
        .map(|e| -> Result<Vec<CheckReport>, CheckError> {
            let mut reports: Vec<CheckReport> = ids.iter().map(|&id| CheckReport::new(id)).collect();
            for phi in &pool {
                let one = || vec![Binding::state(name, e, ctx.vocab), Binding::formula("φ", phi, ctx.vocab)];
                for idx in 1..=5u8 {
                    let o = r_instance(ctx, idx, e, phi, None)?;
                    reports[idx as usize - 1].record(o, cap, one);
                }
                let variant = double_negation(phi);
                let o = r_instance(ctx, 6, e, phi, Some(&variant))?;
                reports[5].record(o, cap, || {
                    let mut b = one();
                    b.push(Binding::formula("ψ", &variant, ctx.vocab));
                    b
                });
                for psi in &pool {
                    let two = || {
                        let mut b = one();
                        b.push(Binding::formula("ψ", psi, ctx.vocab));
                        b
                    };
                    for idx in 7..=if primed { 9u8 } else { 8 } {
                        let o = r_instance(ctx, idx, e, phi, Some(psi))?;
                        reports[idx as usize - 1].record(o, cap, two);
                    }
                }
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_all(parts, &ids, cap))
}

/// Checks R1–R8 for a belief-set operator over `domain` (which may include
/// the inconsistent belief set). Any rejected input is an error.
pub fn check_r(
    op: Op<'_, BeliefSet>,
    domain: &[BeliefSet],
    cfg: &CheckConfig,
) -> Result<Vec<CheckReport>, CheckError> {
    let ctx = Ctx {
        op,
        bel: &|k: &BeliefSet| *k,
        policy: DomainPolicy::Reject,
        vocab: &cfg.vocab,
    };
    check_family(&ctx, domain, cfg, false)
}

/// Checks R1′–R8′ and R9′ over the given states. Inputs outside the
/// operator's domain are tallied as skipped.
pub fn check_r_primed<S: EpistemicState>(
    op: Op<'_, S>,
    bel: BelFn<'_, S>,
    states: &[S],
    cfg: &CheckConfig,
) -> Result<Vec<CheckReport>, CheckError> {
    let ctx = Ctx {
        op,
        bel,
        policy: DomainPolicy::Skip,
        vocab: &cfg.vocab,
    };
    check_family(&ctx, states, cfg, true)
}

fn fl_instance(
    ctx: &Ctx<'_, BeliefSet>,
    k: &BeliefSet,
    phi: &Formula,
) -> Result<Outcome, CheckError> {
    let atoms = ctx.vocab.len();
    if k.expand_models(&phi.models_in(atoms)).is_consistent() {
        return Ok(Outcome::PreconditionFalse);
    }
    let r = in_domain!(ctx.revise(k, phi));
    let bottom = in_domain!(ctx.revise(&BeliefSet::inconsistent(atoms), phi));
    Ok(if r == bottom {
        Outcome::Hold
    } else {
        Outcome::Fail(vec![
            format!("K*φ = {}", ctx.show(&r)),
            format!("K_⊥*φ = {}", ctx.show(&bottom)),
        ])
    })
}

/// FL: if ¬φ ∈ K then K*φ = K_⊥*φ.
pub fn check_fl(
    op: Op<'_, BeliefSet>,
    domain: &[BeliefSet],
    cfg: &CheckConfig,
) -> Result<CheckReport, CheckError> {
    let ctx = Ctx {
        op,
        bel: &|k: &BeliefSet| *k,
        policy: DomainPolicy::Reject,
        vocab: &cfg.vocab,
    };
    let pool = cfg.revision_pool()?;
    let mut report = CheckReport::new(PostulateId::FL);
    for k in domain {
        for phi in &pool {
            let o = fl_instance(&ctx, k, phi)?;
            report.record(o, cfg.max_counterexamples, || {
                vec![Binding::state("K", k, &cfg.vocab), Binding::formula("φ", phi, &cfg.vocab)]
            });
        }
    }
    Ok(report)
}

/// Re-evaluates a counterexample from an R-family, R9′ or FL report through
/// the operator. Returns whether the failure reproduces.
pub fn replay_r<S: EpistemicState>(
    id: PostulateId,
    cex: &Counterexample,
    op: Op<'_, S>,
    bel: BelFn<'_, S>,
    cfg: &CheckConfig,
) -> Result<bool, CheckError> {
    let ctx = Ctx {
        op,
        bel,
        policy: DomainPolicy::Skip,
        vocab: &cfg.vocab,
    };
    let missing = || CheckError::Config("counterexample lacks a binding".into());
    let e: S = cex
        .state("E")
        .or_else(|| cex.state("K"))
        .ok_or_else(missing)?;
    let phi = cex.formula("φ").ok_or_else(missing)?;
    let psi = cex.formula("ψ");
    use super::Family;
    let outcome = match id.family {
        Family::R | Family::RPrime | Family::R9Prime => r_instance(&ctx, id.index, &e, phi, psi)?,
        Family::FL => {
            let k = BeliefSet::from_snapshot(&e.snapshot()).ok_or_else(missing)?;
            let op_k = |k: &BeliefSet, f: &Formula| -> Result<BeliefSet, crate::operators::RevisionError> {
                let s = S::from_snapshot(&k.snapshot()).expect("belief-set operator");
                (ctx.op)(&s, f).map(|r| (ctx.bel)(&r))
            };
            let kctx = Ctx {
                op: &op_k,
                bel: &|k: &BeliefSet| *k,
                policy: DomainPolicy::Skip,
                vocab: &cfg.vocab,
            };
            fl_instance(&kctx, &k, phi)?
        }
        _ => return Err(CheckError::Config(format!("{id} is not an AGM-style postulate"))),
    };
    Ok(matches!(outcome, Outcome::Fail(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{enumerate_model_sets, Vocabulary};
    use crate::operators::{agm_revise, fl_revise, RevisionAssignment, RevisionError};
    use crate::postulates::Status;
    use crate::rankings::TotalPreorder;

    fn cfg() -> CheckConfig {
        CheckConfig::new(Vocabulary::new(&["p", "q"]).unwrap())
    }

    fn all_belief_sets(cfg: &CheckConfig) -> Vec<BeliefSet> {
        enumerate_model_sets(&cfg.vocab)
            .unwrap()
            .into_iter()
            .map(BeliefSet::from_models)
            .collect()
    }

    #[test]
    fn ranking_revision_from_flat_prior_passes() {
        let cfg = cfg();
        let a = RevisionAssignment::from_prior(TotalPreorder::flat(2)).unwrap();
        let op = |k: &BeliefSet, f: &Formula| agm_revise(&a, k, f);
        let reports = check_r(&op, &all_belief_sets(&cfg), &cfg).unwrap();
        assert_eq!(reports.len(), 8);
        for r in &reports {
            assert_eq!(r.status, Status::Pass, "{}", r.summary_line());
        }
    }

    #[test]
    fn expand_always_violates_r5() {
        let cfg = cfg();
        let op = |k: &BeliefSet, f: &Formula| -> Result<BeliefSet, RevisionError> {
            Ok(k.expand(f))
        };
        let reports = check_r(&op, &all_belief_sets(&cfg), &cfg).unwrap();
        let r5 = &reports[4];
        assert_eq!(r5.status, Status::Fail);
        let cex = &r5.counterexamples[0];
        assert!(replay_r(r5.postulate, cex, &op, &|k: &BeliefSet| *k, &cfg).unwrap());
        // Cl(p) revised by ¬p is among the failures
        let p = BeliefSet::from_models(Formula::Atom(0).models_in(2));
        let not_p = Formula::not(Formula::Atom(0));
        let ctx = Ctx {
            op: &op,
            bel: &|k: &BeliefSet| *k,
            policy: DomainPolicy::Reject,
            vocab: &cfg.vocab,
        };
        assert!(matches!(r_instance(&ctx, 5, &p, &not_p, None).unwrap(), Outcome::Fail(_)));
    }

    #[test]
    fn fl_operator_passes_fl_and_agm() {
        let cfg = cfg();
        let prior = TotalPreorder::flat(2);
        let op = |k: &BeliefSet, f: &Formula| fl_revise(&prior, k, f);
        let domain = all_belief_sets(&cfg);
        for r in check_r(&op, &domain, &cfg).unwrap() {
            assert_eq!(r.status, Status::Pass, "{}", r.summary_line());
        }
        assert_eq!(check_fl(&op, &domain, &cfg).unwrap().status, Status::Pass);
    }

    #[test]
    fn fl_fails_for_an_operator_that_keeps_history() {
        let cfg = cfg();
        let a = RevisionAssignment::from_prior(TotalPreorder::flat(2)).unwrap();
        // revising Cl(p ∧ q) by ¬p under this assignment keeps q, which the
        // flat-prior restart does not
        let op = |k: &BeliefSet, f: &Formula| agm_revise(&a, k, f);
        let mut b = RevisionAssignment::new(TotalPreorder::flat(2));
        let k = BeliefSet::from_models(crate::logic::WorldSet::from_mask(2, 0b1000));
        b.insert(k, TotalPreorder::new(2, vec![2, 1, 2, 0]).unwrap()).unwrap();
        let op2 = |s: &BeliefSet, f: &Formula| {
            if *s == k {
                agm_revise(&b, s, f)
            } else {
                op(s, f)
            }
        };
        let r = check_fl(&op2, &all_belief_sets(&cfg), &cfg).unwrap();
        assert_eq!(r.status, Status::Fail);
        assert!(replay_r(r.postulate, &r.counterexamples[0], &op2, &|k: &BeliefSet| *k, &cfg).unwrap());
    }

    #[test]
    fn rejected_inputs_are_errors_for_belief_set_checks() {
        let cfg = cfg();
        let a = RevisionAssignment::new(TotalPreorder::flat(2));
        let op = |k: &BeliefSet, f: &Formula| agm_revise(&a, k, f);
        let err = check_r(&op, &all_belief_sets(&cfg), &cfg).unwrap_err();
        assert!(matches!(err, CheckError::Domain { .. }));
    }
}
