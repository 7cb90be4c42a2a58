use belief_core::logic::{parse_formula, Formula, Vocabulary};
use belief_core::operators::{dp_revise, knowledge_observe, KnowledgeState};
use belief_core::rankings::{bel_ocf, Ocf, Rank};

fn vocab() -> Vocabulary {
    Vocabulary::new(&["p", "q"]).unwrap()
}

fn f(text: &str) -> Formula {
    parse_formula(text, &vocab()).unwrap()
}

fn ranks(s: &KnowledgeState) -> Vec<Rank> {
    s.kappa().ranks().to_vec()
}

const INF: Rank = Rank::Infinite;

fn fin(n: u32) -> Rank {
    Rank::Finite(n)
}

// World order is 00, 01, 10, 11.
fn i4_prior() -> Ocf {
    Ocf::from_finite(2, &[3, 1, 2, 0]).unwrap()
}

#[test]
fn observing_p_then_not_both() {
    let s0 = KnowledgeState::initial(i4_prior()).unwrap();
    let s1 = knowledge_observe(&s0, &f("p")).unwrap();
    assert_eq!(ranks(&s1), [INF, INF, fin(2), fin(0)]);
    let s2 = knowledge_observe(&s1, &f("!p | !q")).unwrap();
    assert_eq!(ranks(&s2), [INF, INF, fin(0), INF]);
    let b = s2.bel();
    assert!(b.contains(&f("p")) && b.contains(&f("!q")));
}

#[test]
fn observing_not_both_directly() {
    let s0 = KnowledgeState::initial(i4_prior()).unwrap();
    let s1 = knowledge_observe(&s0, &f("!p | !q")).unwrap();
    let b = s1.bel();
    assert!(b.contains(&f("q")) && b.contains(&f("!p")));
}

#[test]
fn red_bird_under_dp_keeps_red() {
    let v = Vocabulary::new(&["b", "r"]).unwrap();
    let k = ["b", "r", "!b"]
        .iter()
        .fold(Ocf::flat(2), |k, o| dp_revise(&k, &parse_formula(o, &v).unwrap()).unwrap());
    let b = bel_ocf(&k);
    assert!(b.contains(&parse_formula("!b & r", &v).unwrap()));
}
