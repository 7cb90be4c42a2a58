use crate::logic::{Formula, Vocabulary};
use crate::operators::KnowledgeState;
use crate::rankings::{Ocf, Rank, TotalPreorder};

use super::{CheckError, MAX_EXHAUSTIVE_ATOMS};

const MAX_OCFS: u64 = 5_000_000;

/// Every total preorder over the vocabulary's worlds, as normalized rank
/// vectors in lexicographic order.
pub fn enumerate_preorders(vocab: &Vocabulary) -> Result<Vec<TotalPreorder>, CheckError> {
    if vocab.len() > MAX_EXHAUSTIVE_ATOMS {
        return Err(CheckError::Config(format!(
            "preorder enumeration supports at most {MAX_EXHAUSTIVE_ATOMS} atoms"
        )));
    }
    let n = vocab.world_count();
    let mut out = Vec::new();
    let mut ranks = Vec::with_capacity(n);
    grow(n, &mut ranks, &mut out, vocab.len());
    Ok(out)
}

fn grow(n: usize, ranks: &mut Vec<u32>, out: &mut Vec<TotalPreorder>, atoms: usize) {
    let top = ranks.iter().copied().max();
    let used = {
        let mut u: Vec<u32> = ranks.clone();
        u.sort_unstable();
        u.dedup();
        u.len()
    };
    let missing = top.map_or(0, |t| t as usize + 1 - used);
    if missing > n - ranks.len() {
        return;
    }
    if ranks.len() == n {
        out.push(TotalPreorder::new(atoms, ranks.clone()).expect("length matches"));
        return;
    }
    for r in 0..n as u32 {
        ranks.push(r);
        grow(n, ranks, out, atoms);
        ranks.pop();
    }
}

/// Every OCF with ranks in `0..=max_rank` (plus ∞ when allowed) that has a
/// world at rank 0, in lexicographic order with ∞ last.
pub fn enumerate_ocfs(
    vocab: &Vocabulary,
    max_rank: u32,
    allow_inf: bool,
) -> Result<Vec<Ocf>, CheckError> {
    let values: Vec<Rank> = (0..=max_rank)
        .map(Rank::Finite)
        .chain(allow_inf.then_some(Rank::Infinite))
        .collect();
    let n = vocab.world_count();
    let total = (values.len() as u64).checked_pow(n as u32);
    if total.is_none_or(|t| t > MAX_OCFS) {
        return Err(CheckError::Config(format!(
            "OCF enumeration over {n} worlds with max rank {max_rank} is too large"
        )));
    }
    let total = total.expect("checked above");
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut ranks = vec![Rank::ZERO; n];
        for slot in ranks.iter_mut().rev() {
            *slot = values[(c % values.len() as u64) as usize];
            c /= values.len() as u64;
        }
        if let Ok(k) = Ocf::new(vocab.len(), ranks) {
            out.push(k);
        }
    }
    Ok(out)
}

/// Knowledge states built from every enumerated OCF: the worlds at ∞ are
/// exactly those excluded by a single prior observation.
pub fn enumerate_knowledge_states(
    vocab: &Vocabulary,
    max_rank: u32,
) -> Result<Vec<KnowledgeState>, CheckError> {
    enumerate_ocfs(vocab, max_rank, true)?
        .into_iter()
        .map(|k| {
            let finite = k.finite_worlds();
            let obs = if finite.is_full() {
                Vec::new()
            } else {
                vec![Formula::canonical(&finite)]
            };
            Ok(KnowledgeState::from_parts(obs, k)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn vocab(n: usize) -> Vocabulary {
        let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        Vocabulary::new(&names).unwrap()
    }

    /// Counts weak orders by brute force over all rank vectors.
    fn brute_preorders(worlds: usize) -> usize {
        let mut seen = HashSet::new();
        let total = worlds.pow(worlds as u32);
        for code in 0..total {
            let ranks: Vec<usize> = (0..worlds).map(|i| (code / worlds.pow(i as u32)) % worlds).collect();
            // the relation "rank(a) <= rank(b)" identifies the preorder
            let rel: Vec<bool> = (0..worlds)
                .flat_map(|a| (0..worlds).map(move |b| (a, b)))
                .map(|(a, b)| ranks[a] <= ranks[b])
                .collect();
            seen.insert(rel);
        }
        seen.len()
    }

    #[test]
    fn preorder_counts() {
        assert_eq!(enumerate_preorders(&vocab(1)).unwrap().len(), 3);
        assert_eq!(brute_preorders(2), 3);
        assert_eq!(enumerate_preorders(&vocab(2)).unwrap().len(), 75);
        assert_eq!(brute_preorders(4), 75);
        assert_eq!(brute_preorders(3), 13);
        assert!(enumerate_preorders(&vocab(4)).is_err());
    }

    #[test]
    fn preorders_are_distinct_and_ordered() {
        let all = enumerate_preorders(&vocab(2)).unwrap();
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.windows(2).all(|w| w[0].ranks() < w[1].ranks()));
    }

    #[test]
    fn ocf_counts() {
        let v = vocab(2);
        assert_eq!(enumerate_ocfs(&v, 2, true).unwrap().len(), 175);
        assert_eq!(enumerate_ocfs(&v, 2, false).unwrap().len(), 65);
        assert_eq!(enumerate_ocfs(&v, 0, false).unwrap(), vec![Ocf::flat(2)]);
        assert_eq!(enumerate_ocfs(&vocab(1), 1, true).unwrap().len(), 5);
        let all = enumerate_ocfs(&v, 2, true).unwrap();
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn knowledge_states_match_ocfs() {
        let v = vocab(2);
        let states = enumerate_knowledge_states(&v, 2).unwrap();
        assert_eq!(states.len(), 175);
        assert!(states.iter().all(|s| s.observations().len() <= 1));
    }
}
