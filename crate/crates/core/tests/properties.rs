use belief_core::logic::{models, parse_formula, BeliefSet, Formula, Vocabulary, WorldSet};
use belief_core::operators::{boutilier_revise, dp_revise, knowledge_observe, spohn_condition, KnowledgeState};
use belief_core::rankings::{bel_ocf, bel_preorder, firmness, Ocf, Rank, TotalPreorder};
use proptest::prelude::*;

const ATOMS: usize = 2;

fn ocf() -> impl Strategy<Value = Ocf> {
    proptest::collection::vec(proptest::option::weighted(0.85, 0u32..5), 1 << ATOMS)
        .prop_filter("needs a finite world", |v| v.iter().any(Option::is_some))
        .prop_map(|v| {
            let low = v.iter().flatten().min().copied().unwrap_or(0);
            let ranks = v
                .into_iter()
                .map(|r| r.map_or(Rank::Infinite, |n| Rank::Finite(n - low)))
                .collect();
            Ocf::new(ATOMS, ranks).unwrap()
        })
}

fn preorder() -> impl Strategy<Value = TotalPreorder> {
    proptest::collection::vec(0u32..4, 1 << ATOMS).prop_map(|v| {
        let low = *v.iter().min().unwrap();
        TotalPreorder::new(ATOMS, v.into_iter().map(|r| r - low).collect()).unwrap()
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    (1u64..16).prop_map(|mask| Formula::canonical(&WorldSet::from_mask(ATOMS, mask)))
}

fn alpha() -> impl Strategy<Value = Rank> {
    prop_oneof![(0u32..5).prop_map(Rank::Finite), Just(Rank::Infinite)]
}

fn diff(a: Rank, b: Rank) -> Option<i64> {
    match (a, b) {
        (Rank::Finite(x), Rank::Finite(y)) => Some(i64::from(x) - i64::from(y)),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conditioning_sets_firmness_and_keeps_relative_ranks(k in ocf(), f in formula(), a in alpha()) {
        let ms = f.models_in(ATOMS);
        prop_assume!(k.kappa_of(&ms).is_finite());
        let Ok(c) = spohn_condition(&k, &f, a) else { return Ok(()) };
        if k.kappa_of(&ms.complement()).is_finite() && !ms.complement().is_empty() {
            prop_assert_eq!(firmness(&c, &f), Some(a));
        }
        for side in [ms, ms.complement()] {
            for w in side.iter() {
                for v in side.iter() {
                    if k.rank(w).is_finite() && k.rank(v).is_finite() && c.rank(w).is_finite() {
                        prop_assert_eq!(diff(c.rank(w), c.rank(v)), diff(k.rank(w), k.rank(v)));
                    }
                }
            }
        }
    }

    #[test]
    fn dp_revision_believes_the_input(k in ocf(), f in formula()) {
        if let Ok(r) = dp_revise(&k, &f) {
            prop_assert!(bel_ocf(&r).entails(&f.models_in(ATOMS)));
        }
    }

    #[test]
    fn boutilier_moves_only_the_best_input_worlds(p in preorder(), f in formula()) {
        let r = boutilier_revise(&p, &f).unwrap();
        let best = p.min_of(&f.models_in(ATOMS)).unwrap();
        prop_assert_eq!(*bel_preorder(&r).models(), best);
        for w in best.complement().iter() {
            for v in best.complement().iter() {
                prop_assert_eq!(p.rank(w) < p.rank(v), r.rank(w) < r.rank(v));
            }
        }
    }

    #[test]
    fn knowledge_never_forgets(k in ocf(), f in formula(), g in formula()) {
        let Ok(s0) = KnowledgeState::initial(k.clone()) else { return Ok(()) };
        let Ok(s1) = knowledge_observe(&s0, &f) else { return Ok(()) };
        prop_assert!(s1.knows(&f));
        if let Ok(s2) = knowledge_observe(&s1, &g) {
            prop_assert!(s2.knows(&f) && s2.knows(&g));
            prop_assert!(s2.known_worlds().is_subset(&s1.known_worlds()));
        }
    }

    #[test]
    fn displayed_formulas_parse_back(mask in 0u64..16) {
        let vocab = Vocabulary::new(&["p", "q"]).unwrap();
        let b = BeliefSet::from_models(WorldSet::from_mask(ATOMS, mask));
        let text = b.display(&vocab).to_string();
        let f = parse_formula(&text, &vocab).unwrap();
        prop_assert_eq!(models(&f, &vocab).mask(), mask);
    }
}

#[test]
fn conditioning_on_a_certain_formula_keeps_impossible_worlds_impossible() {
    let vocab = Vocabulary::new(&["p", "q"]).unwrap();
    let k = Ocf::new(2, vec![Rank::Infinite, Rank::Infinite, Rank::Finite(1), Rank::Finite(0)]).unwrap();
    let p = parse_formula("p", &vocab).unwrap();
    let c = spohn_condition(&k, &p, Rank::Finite(2)).unwrap();
    assert_eq!(c.ranks(), k.ranks());
}
