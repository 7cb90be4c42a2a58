//! The iterated-revision postulates C1–C4 and their state-level forms.

use rayon::prelude::*;

use crate::logic::Formula;

use super::{
    in_domain, merge_all, BelFn, Binding, CheckConfig, CheckError, CheckReport, Counterexample,
    Ctx, DomainPolicy, EpistemicState, Family, Op, Outcome, PostulateId,
};

pub(crate) fn c_instance<S: EpistemicState>(
    ctx: &Ctx<'_, S>,
    index: u8,
    e: &S,
    phi: &Formula,
    psi: &Formula,
) -> Result<Outcome, CheckError> {
    let atoms = ctx.vocab.len();
    let phi_m = phi.models_in(atoms);
    let psi_m = psi.models_in(atoms);
    match index {
        1 | 2 => {
            let applies = if index == 1 {
                phi_m.is_subset(&psi_m)
            } else {
                phi_m.is_disjoint(&psi_m)
            };
            if !applies {
                return Ok(Outcome::PreconditionFalse);
            }
            let inner = in_domain!(ctx.revise(e, psi));
            let twice = (ctx.bel)(&in_domain!(ctx.revise(&inner, phi)));
            let once = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            Ok(if twice == once {
                Outcome::Hold
            } else {
                Outcome::Fail(vec![
                    format!("Bel((E*ψ)*φ) = {}", ctx.show(&twice)),
                    format!("Bel(E*φ) = {}", ctx.show(&once)),
                ])
            })
        }
        3 | 4 => {
            let once = (ctx.bel)(&in_domain!(ctx.revise(e, phi)));
            let applies = if index == 3 {
                once.entails(&psi_m)
            } else {
                !once.models().is_disjoint(&psi_m)
            };
            if !applies {
                return Ok(Outcome::PreconditionFalse);
            }
            let inner = in_domain!(ctx.revise(e, psi));
            let twice = (ctx.bel)(&in_domain!(ctx.revise(&inner, phi)));
            let holds = if index == 3 {
                twice.entails(&psi_m)
            } else {
                !twice.models().is_disjoint(&psi_m)
            };
            Ok(if holds {
                Outcome::Hold
            } else {
                let what = if index == 3 { "ψ" } else { "¬ψ" };
                Outcome::Fail(vec![
                    format!("Bel(E*φ) = {}", ctx.show(&once)),
                    format!("Bel((E*ψ)*φ) = {} and the membership of {what} changed", ctx.show(&twice)),
                ])
            })
        }
        _ => unreachable!("no such postulate C{index}"),
    }
}

/// Checks C1–C4 (or C1′–C4′ when `primed`) over `states`. For the unprimed
/// family the states are belief sets and `bel` is the identity.
///
/// In the primed family an instance whose revisions leave the operator's
/// domain is tallied as skipped, so a postulate whose every instance is
/// disallowed comes out vacuous.
pub fn check_c<S: EpistemicState>(
    op: Op<'_, S>,
    bel: BelFn<'_, S>,
    states: &[S],
    cfg: &CheckConfig,
    primed: bool,
) -> Result<Vec<CheckReport>, CheckError> {
    let ctx = Ctx {
        op,
        bel,
        policy: if primed {
            DomainPolicy::Skip
        } else {
            DomainPolicy::Reject
        },
        vocab: &cfg.vocab,
    };
    let pool = cfg.revision_pool()?;
    let ids: Vec<PostulateId> = (1..=4).map(|i| PostulateId::c(i, primed)).collect();
    let cap = cfg.max_counterexamples;
    let name = if primed { "E" } else { "K" };
    let parts = states
        .par_iter()
        .map(|e| -> Result<Vec<CheckReport>, CheckError> {
            let mut reports: Vec<CheckReport> = ids.iter().map(|&id| CheckReport::new(id)).collect();
            for phi in &pool {
                for psi in &pool {
                    for idx in 1..=4u8 {
                        let o = c_instance(&ctx, idx, e, phi, psi)?;
                        reports[idx as usize - 1].record(o, cap, || {
                            vec![
                                Binding::state(name, e, ctx.vocab),
                                Binding::formula("φ", phi, ctx.vocab),
                                Binding::formula("ψ", psi, ctx.vocab),
                            ]
                        });
                    }
                }
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_all(parts, &ids, cap))
}

/// Re-evaluates a C-family counterexample. Returns whether it still fails.
pub fn replay_c<S: EpistemicState>(
    id: PostulateId,
    cex: &Counterexample,
    op: Op<'_, S>,
    bel: BelFn<'_, S>,
    cfg: &CheckConfig,
) -> Result<bool, CheckError> {
    if !matches!(id.family, Family::C | Family::CPrime) {
        return Err(CheckError::Config(format!("{id} is not an iterated-revision postulate")));
    }
    let missing = || CheckError::Config("counterexample lacks a binding".into());
    let e: S = cex.state("E").or_else(|| cex.state("K")).ok_or_else(missing)?;
    let phi = cex.formula("φ").ok_or_else(missing)?;
    let psi = cex.formula("ψ").ok_or_else(missing)?;
    let ctx = Ctx {
        op,
        bel,
        policy: DomainPolicy::Skip,
        vocab: &cfg.vocab,
    };
    Ok(matches!(c_instance(&ctx, id.index, &e, phi, psi)?, Outcome::Fail(_)))
}
