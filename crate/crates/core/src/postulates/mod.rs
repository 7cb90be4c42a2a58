//! Exhaustive, bounded checking of revision postulates.
//!
//! Every postulate is universally quantified over a finite pool of formulas
//! (by default one representative per equivalence class) and a finite set of
//! states. A report records how many instances were checked, how many had a
//! false precondition and how many fell outside the operator's domain, so a
//! `pass` is always relative to those bounds.

mod agm;
mod enumerate;
mod iterated;
mod lehmann;
mod nullification;
mod search;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::{
    enumerate_formula_classes, BeliefSet, Formula, LogicError, Vocabulary, WorldSet,
};
use crate::operators::{KnowledgeState, RevisionError};
use crate::rankings::{Ocf, RankingError, TotalPreorder};

pub use agm::{check_fl, check_r, check_r_primed, replay_r};
pub use enumerate::{enumerate_knowledge_states, enumerate_ocfs, enumerate_preorders};
pub use iterated::{check_c, replay_c};
pub use lehmann::{check_i, check_i_knowledge, check_weak_i4, replay_i};
pub use nullification::boutilier_nullification_check;
pub use search::{
    c2_case_analysis, search_c2_incompatibility, search_nonfunctional_dp, C2Demonstration,
    CaseAnalysis, Cell, Contradiction, Derivation, NonfunctionalWitness, Rule,
};

/// Exhaustive enumeration of formula classes is limited to this many atoms.
pub const MAX_EXHAUSTIVE_ATOMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("operator rejected an in-scope input ({input}): {source}")]
    Domain {
        input: String,
        source: RevisionError,
    },
    #[error(transparent)]
    Revision(#[from] RevisionError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error("{0}")]
    EvaluatorKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    R,
    RPrime,
    C,
    CPrime,
    FL,
    I,
    R9Prime,
    WeakI4,
    Nullification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PostulateId {
    pub family: Family,
    pub index: u8,
}

impl PostulateId {
    pub const FL: PostulateId = PostulateId::new(Family::FL, 0);
    pub const R9_PRIME: PostulateId = PostulateId::new(Family::R9Prime, 9);
    pub const WEAK_I4: PostulateId = PostulateId::new(Family::WeakI4, 4);
    pub const NULLIFICATION: PostulateId = PostulateId::new(Family::Nullification, 0);

    pub const fn new(family: Family, index: u8) -> Self {
        PostulateId { family, index }
    }

    pub fn r(index: u8, primed: bool) -> Self {
        Self::new(if primed { Family::RPrime } else { Family::R }, index)
    }

    pub fn c(index: u8, primed: bool) -> Self {
        Self::new(if primed { Family::CPrime } else { Family::C }, index)
    }

    pub fn i(index: u8) -> Self {
        Self::new(Family::I, index)
    }
}

impl fmt::Display for PostulateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::R => write!(f, "R{}", self.index),
            Family::RPrime => write!(f, "R{}'", self.index),
            Family::C => write!(f, "C{}", self.index),
            Family::CPrime => write!(f, "C{}'", self.index),
            Family::FL => f.write_str("FL"),
            Family::I => write!(f, "I{}", self.index),
            Family::R9Prime => f.write_str("R9'"),
            Family::WeakI4 => f.write_str("weak-I4"),
            Family::Nullification => f.write_str("nullification"),
        }
    }
}

impl Serialize for PostulateId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Vacuous => "VACUOUS",
        })
    }
}

/// A state captured inside a counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Snapshot {
    BeliefSet(BeliefSet),
    Preorder(TotalPreorder),
    Ocf(Ocf),
    Knowledge(KnowledgeState),
}

impl Snapshot {
    pub fn render(&self, vocab: &Vocabulary) -> String {
        match self {
            Snapshot::BeliefSet(k) => format!("Cl({})", k.display(vocab)),
            Snapshot::Preorder(p) => format!("preorder {}", p.rank_table()),
            Snapshot::Ocf(k) => format!("ocf {}", k.rank_table()),
            Snapshot::Knowledge(s) => format!(
                "knowledge obs=[{}] kappa={}",
                render_sequence(s.observations(), vocab),
                s.kappa().rank_table()
            ),
        }
    }
}

/// States the checkers can quantify over.
pub trait EpistemicState: Clone + Send + Sync {
    fn snapshot(&self) -> Snapshot;
    fn from_snapshot(s: &Snapshot) -> Option<Self>;
}

impl EpistemicState for BeliefSet {
    fn snapshot(&self) -> Snapshot {
        Snapshot::BeliefSet(*self)
    }
    fn from_snapshot(s: &Snapshot) -> Option<Self> {
        match s {
            Snapshot::BeliefSet(k) => Some(*k),
            _ => None,
        }
    }
}

impl EpistemicState for TotalPreorder {
    fn snapshot(&self) -> Snapshot {
        Snapshot::Preorder(self.clone())
    }
    fn from_snapshot(s: &Snapshot) -> Option<Self> {
        match s {
            Snapshot::Preorder(p) => Some(p.clone()),
            _ => None,
        }
    }
}

impl EpistemicState for Ocf {
    fn snapshot(&self) -> Snapshot {
        Snapshot::Ocf(self.clone())
    }
    fn from_snapshot(s: &Snapshot) -> Option<Self> {
        match s {
            Snapshot::Ocf(k) => Some(k.clone()),
            _ => None,
        }
    }
}

impl EpistemicState for KnowledgeState {
    fn snapshot(&self) -> Snapshot {
        Snapshot::Knowledge(self.clone())
    }
    fn from_snapshot(s: &Snapshot) -> Option<Self> {
        match s {
            Snapshot::Knowledge(k) => Some(k.clone()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundValue {
    State(Snapshot),
    Formula(Formula),
    Sequence(Vec<Formula>),
    BeliefSet(BeliefSet),
}

/// One bound variable of a counterexample, with its rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub name: String,
    pub text: String,
    #[serde(skip)]
    pub value: BoundValue,
}

impl Binding {
    pub fn state<S: EpistemicState>(name: &str, s: &S, vocab: &Vocabulary) -> Self {
        let snap = s.snapshot();
        Binding {
            name: name.into(),
            text: snap.render(vocab),
            value: BoundValue::State(snap),
        }
    }

    pub fn formula(name: &str, f: &Formula, vocab: &Vocabulary) -> Self {
        Binding {
            name: name.into(),
            text: f.display(vocab).to_string(),
            value: BoundValue::Formula(f.clone()),
        }
    }

    pub fn sequence(name: &str, seq: &[Formula], vocab: &Vocabulary) -> Self {
        Binding {
            name: name.into(),
            text: format!("<{}>", render_sequence(seq, vocab)),
            value: BoundValue::Sequence(seq.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub bindings: Vec<Binding>,
    pub trace: Vec<String>,
}

impl Counterexample {
    pub fn binding(&self, name: &str) -> Option<&BoundValue> {
        self.bindings.iter().find(|b| b.name == name).map(|b| &b.value)
    }

    pub(crate) fn formula(&self, name: &str) -> Option<&Formula> {
        match self.binding(name)? {
            BoundValue::Formula(f) => Some(f),
            _ => None,
        }
    }

    pub(crate) fn sequence(&self, name: &str) -> Option<&[Formula]> {
        match self.binding(name)? {
            BoundValue::Sequence(s) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn state<S: EpistemicState>(&self, name: &str) -> Option<S> {
        match self.binding(name)? {
            BoundValue::State(s) => S::from_snapshot(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub postulate: PostulateId,
    pub status: Status,
    pub instances_checked: usize,
    pub precondition_false: usize,
    pub skipped: usize,
    pub failures: usize,
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(postulate: PostulateId) -> Self {
        CheckReport {
            postulate,
            status: Status::Vacuous,
            instances_checked: 0,
            precondition_false: 0,
            skipped: 0,
            failures: 0,
            counterexamples: Vec::new(),
            note: None,
        }
    }

    /// Some instances fell outside the operator's domain, so a pass holds on
    /// the domain only.
    pub fn domain_restricted(&self) -> bool {
        self.skipped > 0
    }

    fn refresh(&mut self) {
        self.status = if self.failures > 0 {
            Status::Fail
        } else if self.instances_checked == 0 {
            Status::Vacuous
        } else {
            Status::Pass
        };
    }

    pub(crate) fn record(&mut self, outcome: Outcome, cap: usize, bindings: impl FnOnce() -> Vec<Binding>) {
        match outcome {
            Outcome::Hold => self.instances_checked += 1,
            Outcome::PreconditionFalse => self.precondition_false += 1,
            Outcome::Skip => self.skipped += 1,
            Outcome::Fail(trace) => {
                self.instances_checked += 1;
                self.failures += 1;
                if self.counterexamples.len() < cap {
                    self.counterexamples.push(Counterexample {
                        bindings: bindings(),
                        trace,
                    });
                }
            }
        }
        self.refresh();
    }

    /// Folds `other` into `self`, keeping counterexamples in order up to `cap`.
    pub fn merge(&mut self, other: CheckReport, cap: usize) {
        debug_assert_eq!(self.postulate, other.postulate);
        self.instances_checked += other.instances_checked;
        self.precondition_false += other.precondition_false;
        self.skipped += other.skipped;
        self.failures += other.failures;
        let room = cap.saturating_sub(self.counterexamples.len());
        self.counterexamples
            .extend(other.counterexamples.into_iter().take(room));
        if self.note.is_none() {
            self.note = other.note;
        }
        self.refresh();
    }

    /// `R4 PASS (checked 240, precondition false 120)` and similar.
    pub fn summary_line(&self) -> String {
        let mut parts = vec![format!("checked {}", self.instances_checked)];
        if self.precondition_false > 0 {
            parts.push(format!("precondition false {}", self.precondition_false));
        }
        if self.skipped > 0 {
            parts.push(format!("out of domain {}", self.skipped));
        }
        if self.failures > 0 {
            parts.push(format!("failures {}", self.failures));
        }
        let scope = if self.status == Status::Pass && self.domain_restricted() {
            " on domain"
        } else {
            ""
        };
        format!("{} {}{} ({})", self.postulate, self.status, scope, parts.join(", "))
    }
}

/// Merges per-unit report lists (all in the same postulate order).
pub(crate) fn merge_all(parts: Vec<Vec<CheckReport>>, ids: &[PostulateId], cap: usize) -> Vec<CheckReport> {
    let mut out: Vec<CheckReport> = ids.iter().map(|&id| CheckReport::new(id)).collect();
    for part in parts {
        for (acc, r) in out.iter_mut().zip(part) {
            acc.merge(r, cap);
        }
    }
    out
}

/// The result of evaluating one postulate instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Hold,
    Fail(Vec<String>),
    PreconditionFalse,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub vocab: Vocabulary,
    pub max_rank: u32,
    pub allow_inf: bool,
    pub formula_pool: Option<Vec<Formula>>,
    pub sequence_length_bound: usize,
    pub max_counterexamples: usize,
}

impl CheckConfig {
    pub fn new(vocab: Vocabulary) -> Self {
        CheckConfig {
            vocab,
            max_rank: 2,
            allow_inf: true,
            formula_pool: None,
            sequence_length_bound: 3,
            max_counterexamples: 16,
        }
    }

    pub fn validate(&self) -> Result<(), CheckError> {
        if self.sequence_length_bound == 0 {
            return Err(CheckError::Config("sequence length bound must be positive".into()));
        }
        if self.max_counterexamples == 0 {
            return Err(CheckError::Config("counterexample cap must be positive".into()));
        }
        match &self.formula_pool {
            None if self.vocab.len() > MAX_EXHAUSTIVE_ATOMS => Err(CheckError::Config(format!(
                "exhaustive checking supports at most {MAX_EXHAUSTIVE_ATOMS} atoms, got {}",
                self.vocab.len()
            ))),
            Some(pool) if pool.is_empty() => Err(CheckError::Config("formula pool is empty".into())),
            Some(pool) => {
                for f in pool {
                    if let Some(a) = f.max_atom() {
                        if a >= self.vocab.len() {
                            return Err(CheckError::Config(
                                "formula pool mentions atoms outside the vocabulary".into(),
                            ));
                        }
                    }
                }
                Ok(())
            }
            None => Ok(()),
        }
    }

    /// The configured pool, or one canonical formula per equivalence class.
    pub fn pool(&self) -> Result<Vec<Formula>, CheckError> {
        self.validate()?;
        match &self.formula_pool {
            Some(p) => Ok(p.clone()),
            None => Ok(enumerate_formula_classes(&self.vocab)?),
        }
    }

    /// Pool members that are legal revision inputs.
    pub fn revision_pool(&self) -> Result<Vec<Formula>, CheckError> {
        let atoms = self.vocab.len();
        Ok(self
            .pool()?
            .into_iter()
            .filter(|f| !f.models_in(atoms).is_empty())
            .collect())
    }

    pub(crate) fn models(&self, f: &Formula) -> WorldSet {
        f.models_in(self.vocab.len())
    }
}

pub(crate) fn render_sequence(seq: &[Formula], vocab: &Vocabulary) -> String {
    seq.iter()
        .map(|f| f.display(vocab).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// What to do when the operator rejects an input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DomainPolicy {
    /// Out-of-domain rejections are tallied as skipped instances.
    Skip,
    /// Any rejection aborts the check.
    Reject,
}

pub(crate) type Op<'a, S> = &'a (dyn Fn(&S, &Formula) -> Result<S, RevisionError> + Sync);
pub(crate) type BelFn<'a, S> = &'a (dyn Fn(&S) -> BeliefSet + Sync);

/// Operator plus belief map, shared by the AGM and iterated checks.
pub(crate) struct Ctx<'a, S> {
    pub op: Op<'a, S>,
    pub bel: BelFn<'a, S>,
    pub policy: DomainPolicy,
    pub vocab: &'a Vocabulary,
}

impl<S: EpistemicState> Ctx<'_, S> {
    pub fn revise(&self, s: &S, f: &Formula) -> Result<Option<S>, CheckError> {
        match (self.op)(s, f) {
            Ok(r) => Ok(Some(r)),
            Err(e) if self.policy == DomainPolicy::Skip && e.is_out_of_domain() => Ok(None),
            Err(e) => Err(CheckError::Domain {
                input: format!(
                    "{} revised by {}",
                    s.snapshot().render(self.vocab),
                    f.display(self.vocab)
                ),
                source: e,
            }),
        }
    }

    pub fn show(&self, k: &BeliefSet) -> String {
        k.display(self.vocab).to_string()
    }
}

/// Unwraps an in-domain revision result or returns `Outcome::Skip`.
macro_rules! in_domain {
    ($e:expr) => {
        match $e? {
            Some(v) => v,
            None => return Ok($crate::postulates::Outcome::Skip),
        }
    };
}
pub(crate) use in_domain;
