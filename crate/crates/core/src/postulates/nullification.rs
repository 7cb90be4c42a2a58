use crate::logic::{BeliefSet, Formula};
use crate::operators::{boutilier_revise, dp_revise};
use crate::rankings::{bel_ocf, bel_preorder, Ocf, Rank, TotalPreorder};

use super::{render_sequence, Binding, CheckConfig, CheckError, CheckReport, Outcome, PostulateId};

fn run(p0: &TotalPreorder, seq: &[Formula]) -> Result<Vec<TotalPreorder>, CheckError> {
    let mut states = vec![p0.clone()];
    for f in seq {
        let next = boutilier_revise(states.last().expect("nonempty"), f)?;
        states.push(next);
    }
    Ok(states)
}

fn instance(p0: &TotalPreorder, seq: &[Formula], cfg: &CheckConfig) -> Result<Outcome, CheckError> {
    let states = run(p0, seq)?;
    let beliefs: Vec<BeliefSet> = states.iter().map(bel_preorder).collect();
    let m = seq.len();
    let models: Vec<_> = seq.iter().map(|f| cfg.models(f)).collect();
    let consistent_with = |i: usize, f: usize| !beliefs[i].models().is_disjoint(&models[f]);
    if (0..m - 1).any(|i| !consistent_with(i, i)) {
        return Ok(Outcome::PreconditionFalse);
    }
    let last = m - 1;
    let show = |b: &BeliefSet| b.display(&cfg.vocab).to_string();
    let (expected, label) = if consistent_with(last, last) {
        let conj = seq[1..]
            .iter()
            .fold(seq[0].clone(), |acc, f| Formula::and(acc, f.clone()));
        (bel_preorder(&boutilier_revise(p0, &conj)?), "Bel(P0 * (φ1 ∧ … ∧ φn))".to_string())
    } else {
        let Some(k) = (0..=last).rev().find(|&i| consistent_with(i, last)) else {
            return Ok(Outcome::PreconditionFalse);
        };
        (
            bel_preorder(&boutilier_revise(&states[k], &seq[last])?),
            format!("Bel after φ1..φ{k} then the last observation"),
        )
    };
    Ok(if beliefs[m] == expected {
        Outcome::Hold
    } else {
        Outcome::Fail(vec![
            format!("Bel after the whole sequence = {}", show(&beliefs[m])),
            format!("{label} = {}", show(&expected)),
        ])
    })
}

/// Sequences of pool formulas of length 1..=bound, shortest first.
fn sequences(pool: &[Formula], bound: usize) -> Vec<Vec<Formula>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Formula>> = vec![Vec::new()];
    for _ in 0..bound {
        layer = layer
            .iter()
            .flat_map(|s| {
                pool.iter().map(move |f| {
                    let mut t = s.clone();
                    t.push(f.clone());
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Checks that natural revision acts as though the observations after the
/// last prefix consistent with a surprising observation never happened,
/// and that a fully consistent sequence amounts to revising by its
/// conjunction.
///
/// The report's note records the first sequence on which DP revision, run
/// from the OCF with the same ranks as `p0`, ends with different beliefs.
pub fn boutilier_nullification_check(
    p0: &TotalPreorder,
    cfg: &CheckConfig,
) -> Result<CheckReport, CheckError> {
    let pool = cfg.revision_pool()?;
    let mut report = CheckReport::new(PostulateId::NULLIFICATION);
    let k0 = Ocf::new(
        p0.atom_count(),
        p0.ranks().iter().map(|&r| Rank::Finite(r)).collect(),
    )?;
    for seq in sequences(&pool, cfg.sequence_length_bound) {
        let o = instance(p0, &seq, cfg)?;
        if report.note.is_none() && o == Outcome::Hold {
            let natural = bel_preorder(run(p0, &seq)?.last().expect("nonempty"));
            let dp = seq.iter().try_fold(k0.clone(), |k, f| dp_revise(&k, f))?;
            if bel_ocf(&dp) != natural {
                report.note = Some(format!(
                    "contrast: on <{}> natural revision ends with {} while DP ends with {}",
                    render_sequence(&seq, &cfg.vocab),
                    natural.display(&cfg.vocab),
                    bel_ocf(&dp).display(&cfg.vocab)
                ));
            }
        }
        report.record(o, cfg.max_counterexamples, || {
            vec![
                Binding::state("P0", p0, &cfg.vocab),
                Binding::sequence("σ", &seq, &cfg.vocab),
            ]
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Vocabulary};
    use crate::postulates::Status;

    fn f(v: &Vocabulary, s: &str) -> Formula {
        parse_formula(s, v).unwrap()
    }

    #[test]
    fn red_bird_loses_red() {
        let v = Vocabulary::new(&["b", "r"]).unwrap();
        let seq = [f(&v, "b"), f(&v, "r"), f(&v, "!b")];
        let states = run(&TotalPreorder::flat(2), &seq).unwrap();
        let end = bel_preorder(states.last().unwrap());
        let just_not_b = bel_preorder(&boutilier_revise(&TotalPreorder::flat(2), &f(&v, "!b")).unwrap());
        assert_eq!(end, just_not_b);
        assert!(end.contains(&f(&v, "!b")));
        assert!(!end.contains(&f(&v, "r")));
        let cfg = CheckConfig::new(v);
        assert_eq!(instance(&TotalPreorder::flat(2), &seq, &cfg).unwrap(), Outcome::Hold);
    }

    #[test]
    fn consistent_sequences_match_the_conjunction() {
        let v = Vocabulary::new(&["p", "q"]).unwrap();
        let p0 = TotalPreorder::flat(2);
        let states = run(&p0, &[f(&v, "p"), f(&v, "q")]).unwrap();
        assert_eq!(bel_preorder(&states[2]), BeliefSet::closure(&f(&v, "p & q"), &v));
    }

    #[test]
    fn holds_exhaustively_from_flat() {
        let v = Vocabulary::new(&["b", "r"]).unwrap();
        let cfg = CheckConfig::new(v);
        let r = boutilier_nullification_check(&TotalPreorder::flat(2), &cfg).unwrap();
        assert_eq!(r.status, Status::Pass, "{}", r.summary_line());
        assert!(r.precondition_false > 0);
        assert!(r.note.is_some());
    }
}
