//! Propositional language over a finite vocabulary.
//!
//! Worlds are truth assignments encoded as integers whose binary expansion,
//! read most-significant bit first, lists the atoms in vocabulary order. The
//! integer order therefore coincides with lexicographic bitstring order.
//! Belief sets are kept extensionally as their set of models.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest vocabulary a [`WorldSet`] can hold (256 worlds).
pub const MAX_ATOMS: usize = 8;

/// Largest vocabulary for which formula classes can be enumerated.
pub const MAX_CLASS_ATOMS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown atom `{name}` at position {pos}")]
    UnknownAtom { name: String, pos: usize },
    #[error("vocabulary must contain at least one atom")]
    EmptyVocabulary,
    #[error("duplicate atom `{0}` in vocabulary")]
    DuplicateAtom(String),
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("vocabulary of {size} atoms exceeds the limit of {limit} for this operation")]
    VocabularyTooLarge { size: usize, limit: usize },
    #[error("invalid world `{text}` for a vocabulary of {atoms} atoms")]
    InvalidWorld { text: String, atoms: usize },
}

/// Ordered list of distinct atom names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    atoms: Vec<String>,
}

impl Vocabulary {
    pub fn new<S: AsRef<str>>(atoms: &[S]) -> Result<Self, LogicError> {
        if atoms.is_empty() {
            return Err(LogicError::EmptyVocabulary);
        }
        if atoms.len() > MAX_ATOMS {
            return Err(LogicError::VocabularyTooLarge {
                size: atoms.len(),
                limit: MAX_ATOMS,
            });
        }
        let mut out: Vec<String> = Vec::with_capacity(atoms.len());
        for a in atoms {
            let a = a.as_ref().trim();
            if !is_identifier(a) || matches!(a, "true" | "false" | "TRUE" | "FALSE") {
                return Err(LogicError::InvalidAtom(a.to_string()));
            }
            if out.iter().any(|x| x == a) {
                return Err(LogicError::DuplicateAtom(a.to_string()));
            }
            out.push(a.to_string());
        }
        Ok(Vocabulary { atoms: out })
    }

    /// Parses a comma-separated list such as `p,q,r`.
    pub fn parse_csv(text: &str) -> Result<Self, LogicError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() == 1 && parts[0].is_empty() {
            return Err(LogicError::EmptyVocabulary);
        }
        Self::new(&parts)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn world_count(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> + '_ {
        let n = self.atoms.len() as u8;
        (0..self.world_count()).map(move |i| World::new(n, i))
    }

    pub fn parse_world(&self, text: &str) -> Result<World, LogicError> {
        World::parse(self.len(), text)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A complete truth assignment over a vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World {
    atoms: u8,
    index: u16,
}

impl World {
    pub fn new(atoms: u8, index: usize) -> Self {
        debug_assert!(index < (1usize << atoms));
        World {
            atoms,
            index: index as u16,
        }
    }

    pub fn parse(atoms: usize, text: &str) -> Result<Self, LogicError> {
        let bad = || LogicError::InvalidWorld {
            text: text.to_string(),
            atoms,
        };
        if text.len() != atoms || atoms == 0 || atoms > MAX_ATOMS {
            return Err(bad());
        }
        let mut index = 0usize;
        for c in text.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(bad()),
                };
        }
        Ok(World::new(atoms as u8, index))
    }

    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn atom_count(self) -> usize {
        self.atoms as usize
    }

    /// Truth value of the atom at position `atom` in vocabulary order.
    pub fn value(self, atom: usize) -> bool {
        let shift = self.atoms as usize - 1 - atom;
        (self.index >> shift) & 1 == 1
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for atom in 0..self.atoms as usize {
            f.write_str(if self.value(atom) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for World {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A set of worlds over a fixed vocabulary size, stored as a 256-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldSet {
    atoms: u8,
    bits: [u64; 4],
}

impl WorldSet {
    pub fn empty(atoms: usize) -> Self {
        assert!((1..=MAX_ATOMS).contains(&atoms), "unsupported vocabulary size");
        WorldSet {
            atoms: atoms as u8,
            bits: [0; 4],
        }
    }

    pub fn full(atoms: usize) -> Self {
        let mut s = Self::empty(atoms);
        for i in 0..s.universe_len() {
            s.insert_index(i);
        }
        s
    }

    /// Builds the set whose membership is given by the low bits of `mask`,
    /// world `i` being bit `i`.
    pub fn from_mask(atoms: usize, mask: u64) -> Self {
        let mut s = Self::empty(atoms);
        for i in 0..s.universe_len().min(64) {
            if (mask >> i) & 1 == 1 {
                s.insert_index(i);
            }
        }
        s
    }

    pub fn from_worlds<I: IntoIterator<Item = World>>(atoms: usize, worlds: I) -> Self {
        let mut s = Self::empty(atoms);
        for w in worlds {
            s.insert(w);
        }
        s
    }

    pub fn atom_count(&self) -> usize {
        self.atoms as usize
    }

    pub fn universe_len(&self) -> usize {
        1 << self.atoms
    }

    pub fn insert(&mut self, w: World) {
        debug_assert_eq!(w.atom_count(), self.atom_count());
        self.insert_index(w.index());
    }

    pub fn insert_index(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, w: World) -> bool {
        self.contains_index(w.index())
    }

    pub fn contains_index(&self, i: usize) -> bool {
        (self.bits[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe_len()
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn complement(&self) -> WorldSet {
        Self::full(self.atom_count()).zip(self, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.intersection(other) == *self
    }

    pub fn is_disjoint(&self, other: &WorldSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Worlds in lexicographic bitstring order.
    pub fn iter(&self) -> impl Iterator<Item = World> + '_ {
        let n = self.atoms;
        (0..self.universe_len())
            .filter(move |&i| self.contains_index(i))
            .map(move |i| World::new(n, i))
    }

    /// Low 64 bits of the mask; exact for vocabularies of up to 6 atoms.
    pub fn mask(&self) -> u64 {
        self.bits[0]
    }

    fn zip(&self, other: &WorldSet, op: impl Fn(u64, u64) -> u64) -> WorldSet {
        assert_eq!(self.atoms, other.atoms, "world sets over different vocabularies");
        let mut bits = [0; 4];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = op(self.bits[i], other.bits[i]);
        }
        WorldSet {
            atoms: self.atoms,
            bits,
        }
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|w| w.to_string())).finish()
    }
}

impl Serialize for WorldSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|w| w.to_string()))
    }
}

/// Abstract syntax of propositional formulas. Atoms are vocabulary indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Full disjunctive normal form over `worlds`, minterms in lexicographic
    /// world order. The empty set yields `false` and the full set `true`.
    pub fn canonical(worlds: &WorldSet) -> Formula {
        if worlds.is_empty() {
            return Formula::False;
        }
        if worlds.is_full() {
            return Formula::True;
        }
        let n = worlds.atom_count();
        worlds
            .iter()
            .map(|w| {
                (0..n)
                    .map(|a| {
                        if w.value(a) {
                            Formula::Atom(a)
                        } else {
                            Formula::not(Formula::Atom(a))
                        }
                    })
                    .reduce(Formula::and)
                    .expect("vocabulary is nonempty")
            })
            .reduce(Formula::or)
            .expect("set is nonempty")
    }

    /// Largest atom index occurring in the formula, if any.
    pub fn max_atom(&self) -> Option<usize> {
        match self {
            Formula::True | Formula::False => None,
            Formula::Atom(i) => Some(*i),
            Formula::Not(a) => a.max_atom(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.max_atom().max(b.max_atom()),
        }
    }

    /// Model set over a vocabulary of `atoms` atoms.
    pub fn models_in(&self, atoms: usize) -> WorldSet {
        let mut s = WorldSet::empty(atoms);
        for i in 0..s.universe_len() {
            if eval(self, World::new(atoms as u8, i)) {
                s.insert_index(i);
            }
        }
        s
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            vocab,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) => 5,
            Formula::True | Formula::False | Formula::Atom(_) => 6,
        }
    }
}

/// Renders a formula with the minimal parentheses that re-parse to the same tree.
pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    vocab: &'a Vocabulary,
}

impl FormulaDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, node: &Formula, min_prec: u8) -> fmt::Result {
        let prec = node.precedence();
        let paren = prec < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match node {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom(i) => f.write_str(&self.vocab.atoms[*i])?,
            Formula::Not(a) => {
                f.write_str("!")?;
                self.write(f, a, 5)?;
            }
            // left-associative binary operators
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
                let op = match node {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    _ => " <-> ",
                };
                self.write(f, a, prec)?;
                f.write_str(op)?;
                self.write(f, b, prec + 1)?;
            }
            Formula::Implies(a, b) => {
                self.write(f, a, prec + 1)?;
                f.write_str(" -> ")?;
                self.write(f, b, prec)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '!' => Token::Not,
            '&' => Token::And,
            '|' => Token::Or,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '-' if text[i..].starts_with("->") => {
                i += 1;
                Token::Implies
            }
            '<' if text[i..].starts_with("<->") => {
                i += 2;
                Token::Iff
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < bytes.len()
                    && ((bytes[i + 1] as char).is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Token::Ident(text[start..=i].to_string())
            }
            _ => {
                return Err(LogicError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", text[start..].chars().next().unwrap()),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    vocab: &'a Vocabulary,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn syntax(&self, msg: &str) -> LogicError {
        LogicError::Syntax {
            pos: self.offset(),
            msg: msg.to_string(),
        }
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.implies()?;
        while self.eat(&Token::Iff) {
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.eat(&Token::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    // The uppercase forms are how belief sets print their extremes.
                    "true" | "TRUE" => Ok(Formula::True),
                    "false" | "FALSE" => Ok(Formula::False),
                    _ => self
                        .vocab
                        .index_of(&name)
                        .map(Formula::Atom)
                        .ok_or(LogicError::UnknownAtom { name, pos: at }),
                }
            }
            Some(_) => Err(self.syntax("expected an atom, constant, `!` or `(`")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

/// Parses `text` against the grammar
/// `iff := imp ("<->" imp)*`, `imp := or ("->" imp)?`, `or := and ("|" and)*`,
/// `and := un ("&" un)*`, `un := "!" un | atom | true | false | "(" iff ")"`.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, LogicError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        vocab,
    };
    let f = p.iff()?;
    if p.pos != p.tokens.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(f)
}

pub fn eval(f: &Formula, w: World) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(i) => w.value(*i),
        Formula::Not(a) => !eval(a, w),
        Formula::And(a, b) => eval(a, w) && eval(b, w),
        Formula::Or(a, b) => eval(a, w) || eval(b, w),
        Formula::Implies(a, b) => !eval(a, w) || eval(b, w),
        Formula::Iff(a, b) => eval(a, w) == eval(b, w),
    }
}

pub fn models(f: &Formula, vocab: &Vocabulary) -> WorldSet {
    f.models_in(vocab.len())
}

/// A deductively closed theory, identified with its set of models.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BeliefSet {
    models: WorldSet,
}

impl BeliefSet {
    pub fn from_models(models: WorldSet) -> Self {
        BeliefSet { models }
    }

    /// Cl(f).
    pub fn closure(f: &Formula, vocab: &Vocabulary) -> Self {
        Self::from_models(models(f, vocab))
    }

    /// The belief set of all tautologies.
    pub fn tautologies(atoms: usize) -> Self {
        Self::from_models(WorldSet::full(atoms))
    }

    /// K_⊥, which contains every formula.
    pub fn inconsistent(atoms: usize) -> Self {
        Self::from_models(WorldSet::empty(atoms))
    }

    pub fn models(&self) -> &WorldSet {
        &self.models
    }

    pub fn atom_count(&self) -> usize {
        self.models.atom_count()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.entails(&f.models_in(self.atom_count()))
    }

    /// True when every model of the belief set lies in `worlds`.
    pub fn entails(&self, worlds: &WorldSet) -> bool {
        self.models.is_subset(worlds)
    }

    /// Cl(K ∪ {f}).
    pub fn expand(&self, f: &Formula) -> BeliefSet {
        self.expand_models(&f.models_in(self.atom_count()))
    }

    pub fn expand_models(&self, worlds: &WorldSet) -> BeliefSet {
        BeliefSet::from_models(self.models.intersection(worlds))
    }

    pub fn is_consistent(&self) -> bool {
        !self.models.is_empty()
    }

    /// As a formula set, `self ⊆ other` holds iff other's models lie within ours.
    pub fn is_subset_of(&self, other: &BeliefSet) -> bool {
        other.models.is_subset(&self.models)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::canonical(&self.models)
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> BeliefDisplay<'a> {
        BeliefDisplay { set: self, vocab }
    }
}

impl fmt::Debug for BeliefSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BeliefSet{:?}", self.models)
    }
}

/// Canonical DNF rendering with `TRUE` and `FALSE` for the extremes.
pub struct BeliefDisplay<'a> {
    set: &'a BeliefSet,
    vocab: &'a Vocabulary,
}

impl fmt::Display for BeliefDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.set.models.is_empty() {
            f.write_str("FALSE")
        } else if self.set.models.is_full() {
            f.write_str("TRUE")
        } else {
            write!(f, "{}", self.set.to_formula().display(self.vocab))
        }
    }
}

pub fn contains(k: &BeliefSet, f: &Formula) -> bool {
    k.contains(f)
}

pub fn expand(k: &BeliefSet, f: &Formula) -> BeliefSet {
    k.expand(f)
}

pub fn consistent(k: &BeliefSet) -> bool {
    k.is_consistent()
}

/// One canonical representative per logical-equivalence class. Class `m`
/// has model set `{ world i : bit i of m is set }`, so the list starts with
/// `false` and ends with `true`.
pub fn enumerate_formula_classes(vocab: &Vocabulary) -> Result<Vec<Formula>, LogicError> {
    Ok(enumerate_model_sets(vocab)?
        .iter()
        .map(Formula::canonical)
        .collect())
}

/// Every subset of worlds, in class order.
pub fn enumerate_model_sets(vocab: &Vocabulary) -> Result<Vec<WorldSet>, LogicError> {
    if vocab.len() > MAX_CLASS_ATOMS {
        return Err(LogicError::VocabularyTooLarge {
            size: vocab.len(),
            limit: MAX_CLASS_ATOMS,
        });
    }
    let classes = 1u64 << vocab.world_count();
    Ok((0..classes)
        .map(|m| WorldSet::from_mask(vocab.len(), m))
        .collect())
}
