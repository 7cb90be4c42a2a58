//! Revision operators on belief sets and on richer epistemic states.
//!
//! * ranking-induced revision of belief sets through a [`RevisionAssignment`]
//! * natural revision of total preorders ([`boutilier_revise`])
//! * Spohn conditioning and Darwiche–Pearl revision of OCFs
//! * Freund–Lehmann revision, which restarts from a fixed prior on surprise
//! * conditioning with firmness ∞ over observation sequences, where each
//!   observation becomes knowledge ([`knowledge_observe`])
//!
//! Revision by an unsatisfiable formula is rejected by every operator.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::{BeliefSet, Formula, Vocabulary, WorldSet};
use crate::rankings::{bel_ocf, bel_preorder, Ocf, Rank, TotalPreorder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RevisionError {
    #[error("revision by an unsatisfiable formula is not allowed")]
    Unsatisfiable,
    #[error("cannot condition on a formula of rank infinity")]
    ConditioningOnImpossible,
    #[error("observation contradicts what is already known")]
    KnowledgeViolation,
    #[error("belief set has no ranking in the revision assignment")]
    NotInAssignment,
    #[error("formula mentions atom #{atom} but the state has {atoms} atoms")]
    VocabularyMismatch { atom: usize, atoms: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl RevisionError {
    /// Errors that mark an input as outside the operator's domain rather than
    /// as a malformed call.
    pub fn is_out_of_domain(&self) -> bool {
        matches!(
            self,
            RevisionError::ConditioningOnImpossible | RevisionError::KnowledgeViolation
        )
    }
}

fn models_for(f: &Formula, atoms: usize) -> Result<WorldSet, RevisionError> {
    match f.max_atom() {
        Some(atom) if atom >= atoms => Err(RevisionError::VocabularyMismatch { atom, atoms }),
        _ => Ok(f.models_in(atoms)),
    }
}

fn satisfiable_models(f: &Formula, atoms: usize) -> Result<WorldSet, RevisionError> {
    let m = models_for(f, atoms)?;
    if m.is_empty() {
        return Err(RevisionError::Unsatisfiable);
    }
    Ok(m)
}

/// A family of rankings ⪯_K, one per consistent belief set, plus the
/// ranking used for K_⊥.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevisionAssignment {
    assign: BTreeMap<BeliefSet, TotalPreorder>,
    prior: TotalPreorder,
}

impl RevisionAssignment {
    /// An assignment with only the K_⊥ ranking set.
    pub fn new(prior: TotalPreorder) -> Self {
        RevisionAssignment {
            assign: BTreeMap::new(),
            prior,
        }
    }

    /// Assigns to every consistent K the ranking that puts K's models at 0 and
    /// orders the remaining worlds as `prior` does.
    pub fn from_prior(prior: TotalPreorder) -> Result<Self, RevisionError> {
        let atoms = prior.atom_count();
        if atoms > crate::logic::MAX_CLASS_ATOMS {
            return Err(RevisionError::InvalidState(format!(
                "cannot tabulate rankings for {atoms} atoms"
            )));
        }
        let mut a = Self::new(prior.clone());
        for mask in 1u64..(1u64 << (1 << atoms)) {
            let k = BeliefSet::from_models(WorldSet::from_mask(atoms, mask));
            let ranks = (0..1usize << atoms)
                .map(|i| {
                    if k.models().contains_index(i) {
                        0
                    } else {
                        prior.ranks()[i] + 1
                    }
                })
                .collect();
            let p = TotalPreorder::new(atoms, ranks).expect("length matches");
            a.assign.insert(k, p);
        }
        Ok(a)
    }

    /// Inserts ⪯_K. The ranking must induce K.
    pub fn insert(&mut self, k: BeliefSet, p: TotalPreorder) -> Result<(), RevisionError> {
        if !k.is_consistent() {
            return Err(RevisionError::InvalidState(
                "the inconsistent belief set uses the designated prior".into(),
            ));
        }
        if bel_preorder(&p) != k {
            return Err(RevisionError::InvalidState(
                "ranking does not induce the belief set it is assigned to".into(),
            ));
        }
        self.assign.insert(k, p);
        Ok(())
    }

    pub fn get(&self, k: &BeliefSet) -> Option<&TotalPreorder> {
        if k.is_consistent() {
            self.assign.get(k)
        } else {
            Some(&self.prior)
        }
    }

    pub fn prior(&self) -> &TotalPreorder {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }
}

/// K * φ: the belief set of the minimal φ-worlds under ⪯_K.
pub fn agm_revise(
    a: &RevisionAssignment,
    k: &BeliefSet,
    f: &Formula,
) -> Result<BeliefSet, RevisionError> {
    let p = a.get(k).ok_or(RevisionError::NotInAssignment)?;
    let m = satisfiable_models(f, p.atom_count())?;
    Ok(BeliefSet::from_models(p.min_of(&m).expect("nonempty")))
}

/// Natural revision: the minimal φ-worlds move to rank 0, all other worlds
/// keep their relative order. The result is normalized.
pub fn boutilier_revise(p: &TotalPreorder, f: &Formula) -> Result<TotalPreorder, RevisionError> {
    let m = satisfiable_models(f, p.atom_count())?;
    let best = p.min_of(&m).expect("nonempty");
    let ranks = p
        .ranks()
        .iter()
        .enumerate()
        .map(|(i, &r)| if best.contains_index(i) { 0 } else { r + 1 })
        .collect();
    Ok(TotalPreorder::new(p.atom_count(), ranks).expect("length matches"))
}

/// κ_{φ,α}: shifts the φ-worlds down by κ(φ) and the ¬φ-worlds so that κ(¬φ)
/// becomes α, preserving rank differences inside each side.
///
/// When every ¬φ-world is already at ∞ those worlds stay at ∞.
pub fn spohn_condition(k: &Ocf, f: &Formula, alpha: Rank) -> Result<Ocf, RevisionError> {
    let m = models_for(f, k.atom_count())?;
    condition_models(k, &m, alpha)
}

pub(crate) fn condition_models(k: &Ocf, m: &WorldSet, alpha: Rank) -> Result<Ocf, RevisionError> {
    let k_pos = k.kappa_of(m);
    if !k_pos.is_finite() {
        return Err(RevisionError::ConditioningOnImpossible);
    }
    let k_neg = k.kappa_of(&m.complement());
    let ranks = k
        .ranks()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if m.contains_index(i) {
                r.checked_sub(k_pos).expect("rank at least κ(φ)")
            } else {
                match r.checked_sub(k_neg) {
                    Some(d) => d + alpha,
                    None => Rank::Infinite,
                }
            }
        })
        .collect();
    Ok(Ocf::from_raw(k.atom_count() as u8, ranks))
}

/// κ *_DP φ: κ itself when κ(¬φ) ≥ 1, otherwise κ_{φ,1}.
pub fn dp_revise(k: &Ocf, f: &Formula) -> Result<Ocf, RevisionError> {
    let m = models_for(f, k.atom_count())?;
    if !k.kappa_of(&m).is_finite() {
        return Err(RevisionError::ConditioningOnImpossible);
    }
    if k.kappa_of(&m.complement()) >= Rank::Finite(1) {
        return Ok(k.clone());
    }
    condition_models(k, &m, Rank::Finite(1))
}

/// Freund–Lehmann revision: expansion when φ is consistent with a consistent
/// K, otherwise revision of K_⊥ through the fixed prior.
pub fn fl_revise(
    prior: &TotalPreorder,
    k: &BeliefSet,
    f: &Formula,
) -> Result<BeliefSet, RevisionError> {
    let m = satisfiable_models(f, prior.atom_count())?;
    let expanded = k.expand_models(&m);
    if expanded.is_consistent() {
        Ok(expanded)
    } else {
        Ok(BeliefSet::from_models(prior.min_of(&m).expect("nonempty")))
    }
}

/// An agent that treats observations as knowledge: the sequence observed so
/// far together with the OCF obtained by conditioning on each observation
/// with firmness ∞.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KnowledgeState {
    observations: Vec<Formula>,
    kappa: Ocf,
}

impl KnowledgeState {
    /// The state before any observation. No world may be ruled out yet.
    pub fn initial(kappa: Ocf) -> Result<Self, RevisionError> {
        Self::from_parts(Vec::new(), kappa)
    }

    /// Checks that exactly the worlds falsifying some observation are at ∞.
    pub fn from_parts(observations: Vec<Formula>, kappa: Ocf) -> Result<Self, RevisionError> {
        let atoms = kappa.atom_count();
        let mut known = WorldSet::full(atoms);
        for o in &observations {
            known = known.intersection(&models_for(o, atoms)?);
        }
        if known.is_empty() {
            return Err(RevisionError::InvalidState(
                "observations are jointly inconsistent".into(),
            ));
        }
        if kappa.finite_worlds() != known {
            return Err(RevisionError::InvalidState(
                "infinite ranks must be exactly the worlds excluded by the observations".into(),
            ));
        }
        Ok(KnowledgeState {
            observations,
            kappa,
        })
    }

    pub fn observations(&self) -> &[Formula] {
        &self.observations
    }

    pub fn kappa(&self) -> &Ocf {
        &self.kappa
    }

    pub fn atom_count(&self) -> usize {
        self.kappa.atom_count()
    }

    /// Worlds compatible with everything observed.
    pub fn known_worlds(&self) -> WorldSet {
        self.kappa.finite_worlds()
    }

    /// φ is known when κ(¬φ) = ∞.
    pub fn knows(&self, f: &Formula) -> bool {
        self.known_worlds().is_subset(&f.models_in(self.atom_count()))
    }

    pub fn bel(&self) -> BeliefSet {
        bel_ocf(&self.kappa)
    }
}

impl fmt::Debug for KnowledgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KnowledgeState")
            .field("observations", &self.observations.len())
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl Serialize for KnowledgeState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.kappa.serialize(s)
    }
}

/// Observe `f`: append it and condition on it with firmness ∞.
pub fn knowledge_observe(s: &KnowledgeState, f: &Formula) -> Result<KnowledgeState, RevisionError> {
    let m = satisfiable_models(f, s.atom_count())?;
    if m.is_disjoint(&s.known_worlds()) {
        return Err(RevisionError::KnowledgeViolation);
    }
    let kappa = condition_models(&s.kappa, &m, Rank::Infinite)?;
    let mut observations = s.observations.clone();
    observations.push(f.clone());
    Ok(KnowledgeState {
        observations,
        kappa,
    })
}

/// An observation sequence in which every formula is individually
/// satisfiable. The sequence need not be jointly consistent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequenceState {
    atoms: usize,
    observations: Vec<Formula>,
}

impl SequenceState {
    pub fn new(atoms: usize, observations: Vec<Formula>) -> Result<Self, RevisionError> {
        for o in &observations {
            satisfiable_models(o, atoms)?;
        }
        Ok(SequenceState {
            atoms,
            observations,
        })
    }

    pub fn observations(&self) -> &[Formula] {
        &self.observations
    }

    /// σ·φ.
    pub fn push(&self, f: &Formula) -> Result<Self, RevisionError> {
        satisfiable_models(f, self.atoms)?;
        let mut next = self.clone();
        next.observations.push(f.clone());
        Ok(next)
    }
}

/// Assigns a belief set to (some) observation sequences.
pub trait BelEvaluator: Sync {
    fn atom_count(&self) -> usize;

    fn bel(&self, seq: &[Formula]) -> Result<BeliefSet, RevisionError>;

    /// Worlds not ruled out by knowledge after `seq`, for evaluators that
    /// model knowledge.
    fn known(&self, _seq: &[Formula]) -> Option<Result<WorldSet, RevisionError>> {
        None
    }
}

/// Threads [`knowledge_observe`] from a fixed initial state.
#[derive(Debug, Clone)]
pub struct KnowledgeEvaluator {
    initial: KnowledgeState,
}

impl KnowledgeEvaluator {
    pub fn new(initial: KnowledgeState) -> Self {
        KnowledgeEvaluator { initial }
    }

    pub fn from_ocf(kappa: Ocf) -> Result<Self, RevisionError> {
        Ok(Self::new(KnowledgeState::initial(kappa)?))
    }

    pub fn run(&self, seq: &[Formula]) -> Result<KnowledgeState, RevisionError> {
        seq.iter()
            .try_fold(self.initial.clone(), |s, f| knowledge_observe(&s, f))
    }
}

impl BelEvaluator for KnowledgeEvaluator {
    fn atom_count(&self) -> usize {
        self.initial.atom_count()
    }

    fn bel(&self, seq: &[Formula]) -> Result<BeliefSet, RevisionError> {
        self.run(seq).map(|s| s.bel())
    }

    fn known(&self, seq: &[Formula]) -> Option<Result<WorldSet, RevisionError>> {
        Some(self.run(seq).map(|s| s.known_worlds()))
    }
}

pub fn sequence_bel(s: &SequenceState, evaluator: &dyn BelEvaluator) -> Result<BeliefSet, RevisionError> {
    evaluator.bel(s.observations())
}

/// Operator names accepted by configuration and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Ranking,
    Boutilier,
    Dp,
    Knowledge,
    Fl,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 5] = [
        OperatorKind::Ranking,
        OperatorKind::Boutilier,
        OperatorKind::Dp,
        OperatorKind::Knowledge,
        OperatorKind::Fl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Ranking => "ranking",
            OperatorKind::Boutilier => "boutilier",
            OperatorKind::Dp => "dp",
            OperatorKind::Knowledge => "knowledge",
            OperatorKind::Fl => "fl",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Renders a knowledge state's known worlds as a canonical formula.
pub fn known_summary(s: &KnowledgeState, vocab: &Vocabulary) -> String {
    BeliefSet::from_models(s.known_worlds())
        .display(vocab)
        .to_string()
}
