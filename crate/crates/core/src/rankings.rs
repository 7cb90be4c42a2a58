//! Total preorders and ordinal conditional functions (κ-rankings) on worlds.

use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::{BeliefSet, Formula, Vocabulary, World, WorldSet};

/// A κ-rank: a natural number or ∞. ∞ is absorbing for addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u32),
    Infinite,
}

impl Rank {
    pub const ZERO: Rank = Rank::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Rank::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Rank::Finite(n) => Some(n),
            Rank::Infinite => None,
        }
    }

    /// `self − other`. `None` when the difference is undefined: ∞ − ∞, or a
    /// negative result.
    pub fn checked_sub(self, other: Rank) -> Option<Rank> {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => a.checked_sub(b).map(Rank::Finite),
            (Rank::Infinite, Rank::Finite(_)) => Some(Rank::Infinite),
            (_, Rank::Infinite) => None,
        }
    }
}

impl Add for Rank {
    type Output = Rank;

    fn add(self, rhs: Rank) -> Rank {
        match (self, rhs) {
            (Rank::Finite(a), Rank::Finite(b)) => Rank::Finite(a + b),
            _ => Rank::Infinite,
        }
    }
}

impl From<u32> for Rank {
    fn from(n: u32) -> Self {
        Rank::Finite(n)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Rank::Finite(n) => s.serialize_u32(*n),
            Rank::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Degree α to which a formula is believed: κ(φ) = 0 and κ(¬φ) = α.
pub type Firmness = Rank;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingError {
    #[error("no rank-0 world")]
    NoRankZeroWorld,
    #[error("expected {expected} ranks, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("formula has no models")]
    EmptyModels,
}

/// A total preorder on worlds, stored as normalized ranks: the ranks in use
/// are exactly `0..=k`. Structural equality is preorder equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TotalPreorder {
    atoms: u8,
    ranks: Vec<u32>,
}

impl TotalPreorder {
    /// Builds a preorder from arbitrary ranks indexed by world; the ranks are
    /// normalized.
    pub fn new(atoms: usize, ranks: Vec<u32>) -> Result<Self, RankingError> {
        let expected = 1 << atoms;
        if ranks.len() != expected {
            return Err(RankingError::WrongLength {
                expected,
                got: ranks.len(),
            });
        }
        Ok(TotalPreorder {
            atoms: atoms as u8,
            ranks: normalize(&ranks),
        })
    }

    pub fn flat(atoms: usize) -> Self {
        TotalPreorder {
            atoms: atoms as u8,
            ranks: vec![0; 1 << atoms],
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms as usize
    }

    pub fn rank(&self, w: World) -> u32 {
        self.ranks[w.index()]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn max_rank(&self) -> u32 {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    pub fn worlds_at(&self, rank: u32) -> WorldSet {
        let mut s = WorldSet::empty(self.atom_count());
        for (i, &r) in self.ranks.iter().enumerate() {
            if r == rank {
                s.insert_index(i);
            }
        }
        s
    }

    /// The ⪯-minimal worlds among `worlds`; `None` if `worlds` is empty.
    /// `{00:r, 01:r, ...}` in world order.
    pub fn rank_table(&self) -> String {
        render_ranks(self.atoms, self.ranks.iter())
    }

    pub fn min_of(&self, worlds: &WorldSet) -> Option<WorldSet> {
        let best = worlds.iter().map(|w| self.rank(w)).min()?;
        let mut s = WorldSet::empty(self.atom_count());
        for w in worlds.iter().filter(|&w| self.rank(w) == best) {
            s.insert(w);
        }
        Some(s)
    }
}

impl fmt::Debug for TotalPreorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TotalPreorder{}", render_ranks(self.atoms, self.ranks.iter()))
    }
}

impl Serialize for TotalPreorder {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(
            self.ranks
                .iter()
                .enumerate()
                .map(|(i, r)| (World::new(self.atoms, i).to_string(), *r)),
        )
    }
}

fn normalize(ranks: &[u32]) -> Vec<u32> {
    let mut used: Vec<u32> = ranks.to_vec();
    used.sort_unstable();
    used.dedup();
    ranks
        .iter()
        .map(|r| used.binary_search(r).expect("rank is present") as u32)
        .collect()
}

/// `{00:3, 01:1, ...}` in world order.
pub(crate) fn render_ranks<T: fmt::Display>(atoms: u8, ranks: impl Iterator<Item = T>) -> String {
    let body: Vec<String> = ranks
        .enumerate()
        .map(|(i, r)| format!("{}:{}", World::new(atoms, i), r))
        .collect();
    format!("{{{}}}", body.join(", "))
}

/// An ordinal conditional function: world → ℕ ∪ {∞} with some world at 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ocf {
    atoms: u8,
    ranks: Vec<Rank>,
}

impl Ocf {
    pub fn new(atoms: usize, ranks: Vec<Rank>) -> Result<Self, RankingError> {
        let expected = 1 << atoms;
        if ranks.len() != expected {
            return Err(RankingError::WrongLength {
                expected,
                got: ranks.len(),
            });
        }
        validate_ocf(&ranks)?;
        Ok(Ocf {
            atoms: atoms as u8,
            ranks,
        })
    }

    /// Convenience for finite ranks.
    pub fn from_finite(atoms: usize, ranks: &[u32]) -> Result<Self, RankingError> {
        Self::new(atoms, ranks.iter().map(|&r| Rank::Finite(r)).collect())
    }

    pub fn flat(atoms: usize) -> Self {
        Ocf {
            atoms: atoms as u8,
            ranks: vec![Rank::ZERO; 1 << atoms],
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms as usize
    }

    pub fn rank(&self, w: World) -> Rank {
        self.ranks[w.index()]
    }

    pub fn ranks(&self) -> &[Rank] {
        &self.ranks
    }

    /// κ of a set of worlds: the least rank in it, ∞ for the empty set.
    pub fn kappa_of(&self, worlds: &WorldSet) -> Rank {
        worlds
            .iter()
            .map(|w| self.rank(w))
            .min()
            .unwrap_or(Rank::Infinite)
    }

    pub fn rank_table(&self) -> String {
        render_ranks(self.atoms, self.ranks.iter())
    }

    pub fn zero_worlds(&self) -> WorldSet {
        self.worlds_where(|r| r == Rank::ZERO)
    }

    pub fn finite_worlds(&self) -> WorldSet {
        self.worlds_where(Rank::is_finite)
    }

    fn worlds_where(&self, pred: impl Fn(Rank) -> bool) -> WorldSet {
        let mut s = WorldSet::empty(self.atom_count());
        for (i, &r) in self.ranks.iter().enumerate() {
            if pred(r) {
                s.insert_index(i);
            }
        }
        s
    }

    pub(crate) fn from_raw(atoms: u8, ranks: Vec<Rank>) -> Self {
        debug_assert!(validate_ocf(&ranks).is_ok());
        Ocf { atoms, ranks }
    }
}

impl fmt::Debug for Ocf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ocf{}", render_ranks(self.atoms, self.ranks.iter()))
    }
}

impl Serialize for Ocf {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(
            self.ranks
                .iter()
                .enumerate()
                .map(|(i, r)| (World::new(self.atoms, i).to_string(), *r)),
        )
    }
}

pub fn validate_ocf(ranks: &[Rank]) -> Result<(), RankingError> {
    if ranks.contains(&Rank::ZERO) {
        Ok(())
    } else {
        Err(RankingError::NoRankZeroWorld)
    }
}

/// Models of `f` of least rank in `p`.
pub fn min_worlds(p: &TotalPreorder, f: &Formula) -> Result<WorldSet, RankingError> {
    p.min_of(&f.models_in(p.atom_count()))
        .ok_or(RankingError::EmptyModels)
}

/// Bel(⪯): the formulas true in every rank-0 world.
pub fn bel_preorder(p: &TotalPreorder) -> BeliefSet {
    BeliefSet::from_models(p.worlds_at(0))
}

/// κ(φ) = min{κ(w) : w ⊨ φ}, with κ(false) = ∞.
pub fn kappa_value(k: &Ocf, f: &Formula) -> Rank {
    k.kappa_of(&f.models_in(k.atom_count()))
}

/// The α with κ(φ) = 0 and κ(¬φ) = α, or `None` when κ(φ) ≠ 0.
pub fn firmness(k: &Ocf, f: &Formula) -> Option<Firmness> {
    let models = f.models_in(k.atom_count());
    firmness_of(k, &models)
}

pub(crate) fn firmness_of(k: &Ocf, models: &WorldSet) -> Option<Firmness> {
    (k.kappa_of(models) == Rank::ZERO).then(|| k.kappa_of(&models.complement()))
}

/// Bel(κ): formulas believed with firmness at least 1, i.e. those true in
/// every rank-0 world.
pub fn bel_ocf(k: &Ocf) -> BeliefSet {
    BeliefSet::from_models(k.zero_worlds())
}

/// Orders worlds by κ (∞ above every finite rank) and closes rank gaps.
pub fn preorder_of_ocf(k: &Ocf) -> TotalPreorder {
    let mut levels: Vec<Rank> = k.ranks.clone();
    levels.sort_unstable();
    levels.dedup();
    let ranks = k
        .ranks
        .iter()
        .map(|r| levels.binary_search(r).expect("rank is present") as u32)
        .collect();
    TotalPreorder {
        atoms: k.atoms,
        ranks,
    }
}

/// Parses a rank map keyed by world bitstrings. Every world must appear once.
pub fn ranks_from_map<'a, T: Copy + 'a>(
    vocab: &Vocabulary,
    entries: impl IntoIterator<Item = (&'a str, T)>,
) -> Result<Vec<T>, RankMapError> {
    let mut out: Vec<Option<T>> = vec![None; vocab.world_count()];
    for (key, value) in entries {
        let w = vocab
            .parse_world(key)
            .map_err(|_| RankMapError::BadWorld(key.to_string()))?;
        if out[w.index()].replace(value).is_some() {
            return Err(RankMapError::DuplicateWorld(key.to_string()));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.ok_or_else(|| {
                RankMapError::MissingWorld(World::new(vocab.len() as u8, i).to_string())
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankMapError {
    #[error("missing world {0}")]
    MissingWorld(String),
    #[error("`{0}` is not a world of the vocabulary")]
    BadWorld(String),
    #[error("world {0} listed twice")]
    DuplicateWorld(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{enumerate_formula_classes, parse_formula};

    const INF: Rank = Rank::Infinite;

    fn pq() -> Vocabulary {
        Vocabulary::new(&["p", "q"]).unwrap()
    }

    /// Ranks listed as (world, rank) pairs.
    fn ocf(v: &Vocabulary, pairs: &[(&str, Rank)]) -> Ocf {
        Ocf::new(v.len(), ranks_from_map(v, pairs.iter().copied()).unwrap()).unwrap()
    }

    fn preorder(v: &Vocabulary, pairs: &[(&str, u32)]) -> TotalPreorder {
        TotalPreorder::new(v.len(), ranks_from_map(v, pairs.iter().copied()).unwrap()).unwrap()
    }

    fn f(v: &Vocabulary, s: &str) -> Formula {
        parse_formula(s, v).unwrap()
    }

    fn names(s: &WorldSet) -> Vec<String> {
        s.iter().map(|w| w.to_string()).collect()
    }

    fn r(n: u32) -> Rank {
        Rank::Finite(n)
    }

    /// The running four-world ranking: 11:0, 01:1, 10:2, 00:3.
    fn running(v: &Vocabulary) -> Ocf {
        ocf(v, &[("11", r(0)), ("01", r(1)), ("10", r(2)), ("00", r(3))])
    }

    #[test]
    fn rank_arithmetic() {
        assert_eq!(r(2) + r(3), r(5));
        assert_eq!(r(2) + INF, INF);
        assert_eq!(INF + r(0), INF);
        assert_eq!(r(3).checked_sub(r(1)), Some(r(2)));
        assert_eq!(INF.checked_sub(r(4)), Some(INF));
        assert_eq!(INF.checked_sub(INF), None);
        assert_eq!(r(1).checked_sub(r(2)), None);
        assert!(r(1_000_000) < INF);
    }

    #[test]
    fn min_worlds_examples() {
        let v = pq();
        let flat = TotalPreorder::flat(2);
        assert_eq!(names(&min_worlds(&flat, &f(&v, "p")).unwrap()), ["10", "11"]);
        let p = preorder(&v, &[("11", 0), ("10", 1), ("01", 2), ("00", 3)]);
        assert_eq!(names(&min_worlds(&p, &f(&v, "!p")).unwrap()), ["01"]);
        assert_eq!(min_worlds(&p, &Formula::False), Err(RankingError::EmptyModels));
    }

    #[test]
    fn bel_preorder_examples() {
        let v = pq();
        assert_eq!(bel_preorder(&TotalPreorder::flat(2)), BeliefSet::tautologies(2));
        let p = preorder(&v, &[("11", 0), ("10", 1), ("01", 2), ("00", 3)]);
        assert!(bel_preorder(&p).contains(&f(&v, "p & q")));
        let p = preorder(&v, &[("11", 0), ("01", 0), ("10", 1), ("00", 1)]);
        let k = bel_preorder(&p);
        assert_eq!(names(k.models()), ["01", "11"]);
        assert!(k.contains(&f(&v, "q")));
        assert!(!k.contains(&f(&v, "p")));
    }

    #[test]
    fn preorder_normalizes() {
        let p = TotalPreorder::new(2, vec![7, 3, 3, 10]).unwrap();
        assert_eq!(p.ranks(), [1, 0, 0, 2]);
        assert!(TotalPreorder::new(2, vec![0, 0, 0]).is_err());
    }

    #[test]
    fn kappa_value_examples() {
        let v = pq();
        let k = running(&v);
        assert_eq!(kappa_value(&k, &f(&v, "!p | !q")), r(1));
        assert_eq!(kappa_value(&k, &Formula::False), INF);
        assert_eq!(kappa_value(&k, &Formula::True), r(0));
    }

    #[test]
    fn firmness_examples() {
        let v = pq();
        let k = running(&v);
        assert_eq!(firmness(&k, &f(&v, "p")), Some(r(1)));
        assert_eq!(firmness(&k, &f(&v, "q")), Some(r(2)));
        assert_eq!(firmness(&Ocf::flat(2), &f(&v, "p")), Some(r(0)));
        let k = ocf(&v, &[("11", r(1)), ("01", r(0)), ("10", r(2)), ("00", r(3))]);
        assert_eq!(firmness(&k, &f(&v, "p")), None);
    }

    #[test]
    fn bel_ocf_examples() {
        let v = pq();
        let k = running(&v);
        assert_eq!(names(bel_ocf(&k).models()), ["11"]);
        assert!(bel_ocf(&k).contains(&f(&v, "p & q")));
        assert_eq!(bel_ocf(&Ocf::flat(2)), BeliefSet::tautologies(2));
        let k = ocf(&v, &[("11", r(0)), ("01", r(0)), ("10", INF), ("00", INF)]);
        assert_eq!(names(bel_ocf(&k).models()), ["01", "11"]);
        assert!(bel_ocf(&k).contains(&f(&v, "q")));
    }

    #[test]
    fn validate_ocf_examples() {
        // world order for one atom is [0, 1]
        assert_eq!(validate_ocf(&[r(0), INF]), Ok(()));
        assert_eq!(validate_ocf(&[r(2), r(1)]), Err(RankingError::NoRankZeroWorld));
        assert_eq!(validate_ocf(&[r(0), r(0)]), Ok(()));
        assert!(Ocf::new(1, vec![INF, INF]).is_err());
    }

    #[test]
    fn preorder_of_ocf_examples() {
        let v = pq();
        let k = ocf(&v, &[("11", r(0)), ("01", r(5)), ("10", r(5)), ("00", INF)]);
        assert_eq!(
            preorder_of_ocf(&k),
            preorder(&v, &[("11", 0), ("01", 1), ("10", 1), ("00", 2)])
        );
        assert_eq!(preorder_of_ocf(&Ocf::flat(2)), TotalPreorder::flat(2));
        let one = Ocf::from_finite(1, &[3, 0]).unwrap();
        assert_eq!(preorder_of_ocf(&one).ranks(), [1, 0]);
    }

    #[test]
    fn rank_map_errors_name_the_world() {
        let v = pq();
        assert_eq!(
            ranks_from_map(&v, [("11", 0u32), ("10", 1), ("00", 2)]),
            Err(RankMapError::MissingWorld("01".into()))
        );
        assert_eq!(
            ranks_from_map(&v, [("11", 0u32), ("11", 1)]),
            Err(RankMapError::DuplicateWorld("11".into()))
        );
        assert_eq!(
            ranks_from_map(&v, [("111", 0u32)]),
            Err(RankMapError::BadWorld("111".into()))
        );
    }

    #[test]
    fn ranks_render_infinity_as_inf() {
        let k = Ocf::new(1, vec![r(0), INF]).unwrap();
        assert_eq!(format!("{k:?}"), "Ocf{0:0, 1:inf}");
    }

    /// All OCFs over four worlds with ranks in {0, 1, 2, ∞}.
    fn small_ocfs() -> Vec<Ocf> {
        let vals = [r(0), r(1), r(2), INF];
        let mut out = Vec::new();
        for code in 0..256usize {
            let ranks: Vec<Rank> = (0..4).map(|i| vals[(code >> (2 * i)) & 3]).collect();
            if let Ok(k) = Ocf::new(2, ranks) {
                out.push(k);
            }
        }
        out
    }

    #[test]
    fn ocf_laws_exhaustive_over_two_atoms() {
        let v = pq();
        let classes = enumerate_formula_classes(&v).unwrap();
        for k in small_ocfs() {
            let bel = bel_ocf(&k);
            assert!(bel.is_consistent());
            assert_eq!(bel, bel_preorder(&preorder_of_ocf(&k)));
            for a in &classes {
                if let Some(alpha) = firmness(&k, a) {
                    assert_eq!(bel.contains(a), alpha >= r(1));
                }
                for b in &classes {
                    let either = Formula::or(a.clone(), b.clone());
                    assert_eq!(
                        kappa_value(&k, &either),
                        kappa_value(&k, a).min(kappa_value(&k, b))
                    );
                }
            }
        }
    }

    #[test]
    fn preorder_laws_exhaustive_over_two_atoms() {
        for code in 0..256usize {
            let ranks: Vec<u32> = (0..4).map(|i| ((code >> (2 * i)) & 3) as u32).collect();
            let p = TotalPreorder::new(2, ranks).unwrap();
            assert!(bel_preorder(&p).is_consistent());
            assert_eq!(min_worlds(&p, &Formula::True).unwrap(), p.worlds_at(0));
            let used: std::collections::BTreeSet<u32> = p.ranks().iter().copied().collect();
            assert_eq!(used.into_iter().collect::<Vec<_>>(), (0..=p.max_rank()).collect::<Vec<_>>());
        }
    }
}
