//! Witness searches: two OCFs with the same beliefs that DP revision pulls
//! apart, and a case analysis showing that no revision function on belief
//! sets satisfies R1–R4 together with C2.

use serde::Serialize;

use crate::logic::{BeliefSet, Formula, Vocabulary, WorldSet};
use crate::operators::dp_revise;
use crate::rankings::{bel_ocf, Ocf};

use super::{enumerate_ocfs, CheckConfig, CheckError, MAX_EXHAUSTIVE_ATOMS};

/// Two OCFs inducing the same belief set whose DP revisions by `formula`
/// induce different belief sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonfunctionalWitness {
    pub k1: Ocf,
    pub k2: Ocf,
    pub formula: Formula,
    pub prior: BeliefSet,
    pub revised1: BeliefSet,
    pub revised2: BeliefSet,
}

impl NonfunctionalWitness {
    /// Recomputes both revisions and confirms the witness.
    pub fn replay(&self) -> bool {
        let (Ok(r1), Ok(r2)) = (dp_revise(&self.k1, &self.formula), dp_revise(&self.k2, &self.formula)) else {
            return false;
        };
        self.k1 != self.k2
            && bel_ocf(&self.k1) == bel_ocf(&self.k2)
            && bel_ocf(&self.k1) == self.prior
            && bel_ocf(&r1) == self.revised1
            && bel_ocf(&r2) == self.revised2
            && self.revised1 != self.revised2
    }

    pub fn render(&self, vocab: &Vocabulary) -> Vec<String> {
        vec![
            format!("k1 = {}", self.k1.rank_table()),
            format!("k2 = {}", self.k2.rank_table()),
            format!("Bel(k1) = Bel(k2) = {}", self.prior.display(vocab)),
            format!("revise by {}", self.formula.display(vocab)),
            format!("Bel(k1 * f) = {}", self.revised1.display(vocab)),
            format!("Bel(k2 * f) = {}", self.revised2.display(vocab)),
        ]
    }
}

/// Scans OCF pairs in enumeration order for a [`NonfunctionalWitness`].
pub fn search_nonfunctional_dp(cfg: &CheckConfig) -> Result<Option<NonfunctionalWitness>, CheckError> {
    let pool = cfg.revision_pool()?;
    let ocfs = enumerate_ocfs(&cfg.vocab, cfg.max_rank, cfg.allow_inf)?;
    let beliefs: Vec<BeliefSet> = ocfs.iter().map(bel_ocf).collect();
    for i in 0..ocfs.len() {
        for j in i + 1..ocfs.len() {
            if beliefs[i] != beliefs[j] {
                continue;
            }
            for f in &pool {
                let (Ok(r1), Ok(r2)) = (dp_revise(&ocfs[i], f), dp_revise(&ocfs[j], f)) else {
                    continue;
                };
                let (b1, b2) = (bel_ocf(&r1), bel_ocf(&r2));
                if b1 != b2 {
                    return Ok(Some(NonfunctionalWitness {
                        k1: ocfs[i].clone(),
                        k2: ocfs[j].clone(),
                        formula: f.clone(),
                        prior: beliefs[i],
                        revised1: b1,
                        revised2: b2,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// A table cell: the value of K * φ, both given as model-set bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cell {
    pub k: u64,
    pub phi: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum Rule {
    /// K ∩ φ is nonempty, so R3 and R4 force K * φ = K ∩ φ.
    Forced,
    /// Copied across the C2 equation (K*ψ)*φ = K*φ.
    C2 { k: u64, psi: u64, phi: u64 },
    /// A branching assumption.
    Choice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub cell: Cell,
    pub value: u64,
    pub rule: Rule,
}

/// A C2 equation whose two sides received different values, together with
/// the derivations supporting every value involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contradiction {
    pub k: u64,
    pub psi: u64,
    pub phi: u64,
    /// K * ψ.
    pub via: u64,
    /// (K * ψ) * φ.
    pub composed: u64,
    /// K * φ.
    pub direct: u64,
    pub support: Vec<Derivation>,
}

impl Contradiction {
    /// Re-derives every supporting value from R1–R4 and C2 and checks that
    /// the final equation is violated.
    pub fn replay(&self, atoms: usize) -> bool {
        let full = WorldSet::full(atoms).mask();
        let mut known = std::collections::HashMap::new();
        let disjoint_nonempty = |a: u64, b: u64| a != 0 && b != 0 && a & b == 0;
        for d in &self.support {
            let Cell { k, phi } = d.cell;
            if phi == 0 || phi & !full != 0 || d.value & !phi != 0 {
                return false;
            }
            let ok = match d.rule {
                Rule::Forced => k & phi != 0 && d.value == k & phi,
                Rule::Choice => k & phi == 0,
                Rule::C2 { k: ck, psi, phi: cphi } => {
                    let Some(&m) = known.get(&(ck, psi)) else { return false };
                    cphi == phi
                        && disjoint_nonempty(psi, phi)
                        && ((d.cell == Cell { k: ck, phi } && known.get(&(m, phi)) == Some(&d.value))
                            || (d.cell == Cell { k: m, phi } && known.get(&(ck, phi)) == Some(&d.value)))
                }
            };
            if !ok || known.insert((k, phi), d.value).is_some_and(|v| v != d.value) {
                return false;
            }
        }
        disjoint_nonempty(self.psi, self.phi)
            && known.get(&(self.k, self.psi)) == Some(&self.via)
            && known.get(&(self.via, self.phi)) == Some(&self.composed)
            && known.get(&(self.k, self.phi)) == Some(&self.direct)
            && self.composed != self.direct
    }

    /// Whether the contradiction holds without any branching assumption.
    pub fn unconditional(&self) -> bool {
        self.support.iter().all(|d| d.rule != Rule::Choice)
    }
}

/// Outcome of exhausting the R1–R4-compatible tables against C2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseAnalysis {
    pub atoms: usize,
    pub cells: usize,
    pub forced_cells: usize,
    pub constraints: usize,
    pub nodes: usize,
    pub closed_branches: usize,
    /// Every branch ended in a contradiction.
    pub closed: bool,
    /// The node limit stopped the search before it finished.
    pub truncated: bool,
    /// Contradictions in the order found (capped).
    pub contradictions: Vec<Contradiction>,
    /// A table satisfying R1–R4 and C2, if one exists. Cells left out are
    /// never constrained and may take any subset of φ.
    pub model: Option<Vec<Derivation>>,
}

const NODE_LIMIT: usize = 200_000;
const KEPT_CONTRADICTIONS: usize = 16;

#[derive(Clone)]
struct Table {
    sets: usize,
    vals: Vec<Option<u64>>,
    why: Vec<Option<Rule>>,
}

impl Table {
    fn at(&self, k: u64, phi: u64) -> usize {
        k as usize * self.sets + phi as usize
    }

    fn get(&self, k: u64, phi: u64) -> Option<u64> {
        self.vals[self.at(k, phi)]
    }

    fn set(&mut self, k: u64, phi: u64, v: u64, rule: Rule) {
        let i = self.at(k, phi);
        self.vals[i] = Some(v);
        self.why[i] = Some(rule);
    }

    fn derivation(&self, k: u64, phi: u64) -> Derivation {
        let i = self.at(k, phi);
        Derivation {
            cell: Cell { k, phi },
            value: self.vals[i].expect("assigned"),
            rule: self.why[i].expect("assigned"),
        }
    }

    /// Supporting derivations of a cell, dependencies first.
    fn support(&self, k: u64, phi: u64, seen: &mut Vec<Cell>, out: &mut Vec<Derivation>) {
        let cell = Cell { k, phi };
        if seen.contains(&cell) {
            return;
        }
        seen.push(cell);
        let d = self.derivation(k, phi);
        if let Rule::C2 { k: ck, psi, phi } = d.rule {
            self.support(ck, psi, seen, out);
            let m = self.get(ck, psi).expect("assigned");
            if cell == (Cell { k: ck, phi }) {
                self.support(m, phi, seen, out);
            } else {
                self.support(ck, phi, seen, out);
            }
        }
        out.push(d);
    }
}

struct Search {
    sets: u64,
    pairs: Vec<(u64, u64)>,
    nodes: usize,
    closed_branches: usize,
    truncated: bool,
    contradictions: Vec<Contradiction>,
}

impl Search {
    fn propagate(&self, t: &mut Table) -> Result<(), (u64, u64, u64)> {
        loop {
            let mut changed = false;
            for k in 0..self.sets {
                for &(psi, phi) in &self.pairs {
                    let Some(m) = t.get(k, psi) else { continue };
                    let rule = Rule::C2 { k, psi, phi };
                    match (t.get(m, phi), t.get(k, phi)) {
                        (Some(x), Some(y)) if x != y => return Err((k, psi, phi)),
                        (Some(x), None) => {
                            t.set(k, phi, x, rule);
                            changed = true;
                        }
                        (None, Some(y)) => {
                            t.set(m, phi, y, rule);
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn contradiction(&self, t: &Table, (k, psi, phi): (u64, u64, u64)) -> Contradiction {
        let via = t.get(k, psi).expect("assigned");
        let mut seen = Vec::new();
        let mut support = Vec::new();
        t.support(k, psi, &mut seen, &mut support);
        t.support(via, phi, &mut seen, &mut support);
        t.support(k, phi, &mut seen, &mut support);
        Contradiction {
            k,
            psi,
            phi,
            via,
            composed: t.get(via, phi).expect("assigned"),
            direct: t.get(k, phi).expect("assigned"),
            support,
        }
    }

    fn dfs(&mut self, mut t: Table) -> Option<Table> {
        self.nodes += 1;
        if let Err(c) = self.propagate(&mut t) {
            self.closed_branches += 1;
            if self.contradictions.len() < KEPT_CONTRADICTIONS {
                let c = self.contradiction(&t, c);
                self.contradictions.push(c);
            }
            return None;
        }
        if self.nodes > NODE_LIMIT {
            self.truncated = true;
            return None;
        }
        let full = self.sets - 1;
        let open = (0..self.sets)
            .flat_map(|k| (1..full).map(move |phi| (k, phi)))
            .find(|&(k, phi)| t.get(k, phi).is_none());
        let Some((k, phi)) = open else {
            return Some(t);
        };
        let mut sub = phi;
        let mut choices = Vec::new();
        loop {
            choices.push(sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & phi;
        }
        choices.reverse();
        for v in choices {
            let mut next = t.clone();
            next.set(k, phi, v, Rule::Choice);
            if let Some(found) = self.dfs(next) {
                return Some(found);
            }
            if self.truncated {
                return None;
            }
        }
        None
    }
}

/// Exhausts the revision tables over the vocabulary that satisfy R1–R4,
/// looking for one that also satisfies C2.
///
/// Cells with K ∩ φ nonempty are fixed by R3 and R4. The remaining cells may
/// hold any subset of φ. C2 equations propagate values between cells, and
/// unresolved cells are branched on.
pub fn c2_case_analysis(vocab: &Vocabulary) -> Result<CaseAnalysis, CheckError> {
    let atoms = vocab.len();
    if atoms > MAX_EXHAUSTIVE_ATOMS {
        return Err(CheckError::Config(format!(
            "case analysis supports at most {MAX_EXHAUSTIVE_ATOMS} atoms"
        )));
    }
    let sets = 1u64 << (1u64 << atoms);
    let full = sets - 1;
    let pairs: Vec<(u64, u64)> = (1..sets)
        .flat_map(|psi| (1..sets).map(move |phi| (psi, phi)))
        .filter(|&(psi, phi)| psi & phi == 0)
        .collect();
    let mut t = Table {
        sets: sets as usize,
        vals: vec![None; (sets * sets) as usize],
        why: vec![None; (sets * sets) as usize],
    };
    let mut forced = 0;
    for k in 0..sets {
        for phi in 1..sets {
            if k & phi != 0 {
                t.set(k, phi, k & phi, Rule::Forced);
                forced += 1;
            }
        }
    }
    let mut s = Search {
        sets,
        pairs,
        nodes: 0,
        closed_branches: 0,
        truncated: false,
        contradictions: Vec::new(),
    };
    let found = s.dfs(t);
    let model = found.map(|t| {
        let mut out = Vec::new();
        for k in 0..sets {
            for phi in 1..full {
                if k & phi == 0 && t.get(k, phi).is_some() {
                    out.push(t.derivation(k, phi));
                }
            }
        }
        out
    });
    Ok(CaseAnalysis {
        atoms,
        cells: (sets * (sets - 1)) as usize,
        forced_cells: forced,
        constraints: sets as usize * s.pairs.len(),
        nodes: s.nodes,
        closed_branches: s.closed_branches,
        closed: model.is_none() && !s.truncated,
        truncated: s.truncated,
        contradictions: s.contradictions,
        model,
    })
}

fn show_set(atoms: usize, mask: u64, vocab: &Vocabulary) -> String {
    BeliefSet::from_models(WorldSet::from_mask(atoms, mask))
        .display(vocab)
        .to_string()
}

fn show_cell(atoms: usize, c: Cell, vocab: &Vocabulary) -> String {
    format!(
        "Cl({}) * ({})",
        show_set(atoms, c.k, vocab),
        show_set(atoms, c.phi, vocab)
    )
}

impl Derivation {
    pub fn render(&self, atoms: usize, vocab: &Vocabulary) -> String {
        let why = match self.rule {
            Rule::Forced => "forced by R3 and R4".to_string(),
            Rule::Choice => "assumed".to_string(),
            Rule::C2 { k, psi, phi } => format!(
                "C2 with K = Cl({}), psi = {}, phi = {}",
                show_set(atoms, k, vocab),
                show_set(atoms, psi, vocab),
                show_set(atoms, phi, vocab)
            ),
        };
        format!(
            "{} = Cl({})  [{why}]",
            show_cell(atoms, self.cell, vocab),
            show_set(atoms, self.value, vocab)
        )
    }
}

impl Contradiction {
    pub fn render(&self, atoms: usize, vocab: &Vocabulary) -> Vec<String> {
        let mut out: Vec<String> = self
            .support
            .iter()
            .map(|d| format!("  {}", d.render(atoms, vocab)))
            .collect();
        out.push(format!(
            "  C2 demands (K*psi)*phi = K*phi for K = Cl({}), psi = {}, phi = {}: Cl({}) differs from Cl({})",
            show_set(atoms, self.k, vocab),
            show_set(atoms, self.psi, vocab),
            show_set(atoms, self.phi, vocab),
            show_set(atoms, self.composed, vocab),
            show_set(atoms, self.direct, vocab)
        ));
        out
    }
}

impl CaseAnalysis {
    /// Checks that [`CaseAnalysis::model`] satisfies R1–R4 and every C2
    /// equation it can be asked about.
    pub fn verify_model(&self) -> bool {
        let Some(model) = &self.model else { return false };
        let sets = 1u64 << (1u64 << self.atoms);
        let value = |k: u64, phi: u64| -> Option<u64> {
            if k & phi != 0 {
                Some(k & phi)
            } else {
                model.iter().find(|d| d.cell == Cell { k, phi }).map(|d| d.value)
            }
        };
        if model.iter().any(|d| d.value & !d.cell.phi != 0) {
            return false;
        }
        for k in 0..sets {
            for psi in 1..sets {
                for phi in 1..sets {
                    if psi & phi != 0 {
                        continue;
                    }
                    let Some(m) = value(k, psi) else { return false };
                    if value(m, phi) != value(k, phi) || value(k, phi).is_none() {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn render(&self, vocab: &Vocabulary) -> Vec<String> {
        let mut out = vec![format!(
            "{} cells ({} forced by R3 and R4), {} C2 equations, {} search nodes, {} closed branches",
            self.cells, self.forced_cells, self.constraints, self.nodes, self.closed_branches
        )];
        if self.closed {
            out.push("case analysis closed: no table satisfies R1-R4 and C2".into());
        } else if self.truncated {
            out.push("case analysis inconclusive: node limit reached".into());
        } else {
            out.push("case analysis open: a table satisfies R1-R4 and C2".into());
        }
        for (i, c) in self.contradictions.iter().enumerate() {
            let kind = if c.unconditional() { "unconditional" } else { "under assumptions" };
            out.push(format!("contradiction {} ({kind}):", i + 1));
            out.extend(c.render(self.atoms, vocab));
        }
        if let Some(model) = &self.model {
            out.push("satisfying table (cells not forced by R3 and R4):".into());
            out.extend(model.iter().map(|d| format!("  {}", d.render(self.atoms, vocab))));
        }
        out
    }
}

/// Both halves of the incompatibility demonstration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C2Demonstration {
    pub nonfunctional: Option<NonfunctionalWitness>,
    pub case_analysis: CaseAnalysis,
}

pub fn search_c2_incompatibility(cfg: &CheckConfig) -> Result<C2Demonstration, CheckError> {
    Ok(C2Demonstration {
        nonfunctional: search_nonfunctional_dp(cfg)?,
        case_analysis: c2_case_analysis(&cfg.vocab)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::rankings::ranks_from_map;

    fn pq() -> Vocabulary {
        Vocabulary::new(&["p", "q"]).unwrap()
    }

    fn ocf(v: &Vocabulary, pairs: &[(&str, u32)]) -> Ocf {
        let ranks: Vec<u32> = ranks_from_map(v, pairs.iter().copied()).unwrap();
        Ocf::from_finite(v.len(), &ranks).unwrap()
    }

    #[test]
    fn known_nonfunctional_pair() {
        let v = pq();
        let k1 = ocf(&v, &[("11", 0), ("10", 1), ("01", 2), ("00", 2)]);
        let k2 = ocf(&v, &[("11", 0), ("10", 2), ("01", 1), ("00", 2)]);
        let f = parse_formula("!p | !q", &v).unwrap();
        let r1 = bel_ocf(&dp_revise(&k1, &f).unwrap());
        let r2 = bel_ocf(&dp_revise(&k2, &f).unwrap());
        let w = NonfunctionalWitness {
            prior: bel_ocf(&k1),
            k1,
            k2,
            formula: f,
            revised1: r1,
            revised2: r2,
        };
        assert!(w.replay());
        // one state ends believing p and not q, the other q and not p
        assert_eq!(r1, BeliefSet::closure(&parse_formula("p & !q", &v).unwrap(), &v));
        assert_eq!(r2, BeliefSet::closure(&parse_formula("!p & q", &v).unwrap(), &v));
    }

    #[test]
    fn search_finds_a_replayable_witness() {
        let cfg = CheckConfig::new(pq());
        let w = search_nonfunctional_dp(&cfg).unwrap().expect("witness");
        assert!(w.replay());
    }

    #[test]
    fn no_witness_with_rank_zero_only() {
        let mut cfg = CheckConfig::new(Vocabulary::new(&["p"]).unwrap());
        cfg.max_rank = 0;
        assert_eq!(search_nonfunctional_dp(&cfg).unwrap(), None);
    }

    #[test]
    fn two_atoms_close_without_branching() {
        let a = c2_case_analysis(&pq()).unwrap();
        assert!(a.closed);
        assert_eq!(a.nodes, 1);
        let c = &a.contradictions[0];
        assert!(c.unconditional());
        assert!(c.replay(2));
        let mut broken = c.clone();
        broken.direct = broken.composed;
        assert!(!broken.replay(2));
    }

    #[test]
    fn one_atom_admits_a_table() {
        let a = c2_case_analysis(&Vocabulary::new(&["p"]).unwrap()).unwrap();
        assert!(!a.closed);
        assert!(a.verify_model());
    }
}
