//! Scenario files: TOML documents naming a vocabulary, an initial state, an
//! operator and the observations to feed it.
//!
//! ```toml
//! vocabulary = ["p", "q"]
//! operator = "knowledge"
//! observations = ["p", "!p | !q"]
//!
//! [state]
//! kind = "ocf"
//! ranks = { "11" = 0, "01" = 1, "10" = 2, "00" = 3 }
//! ```
//!
//! Rank maps key worlds by bitstring (first atom first) and accept `"inf"`
//! for OCF ranks. A `preorder` state may carry `beliefs = "<formula>"` to
//! start the fl operator from a belief set other than the one the preorder
//! induces. `knowledge` and `sequence` states take a list of prior
//! `observations`; a `sequence` state's ranks default to flat.

use std::path::Path;

use belief_core::logic::{parse_formula, BeliefSet, Formula, Vocabulary};
use belief_core::operators::{knowledge_observe, KnowledgeState, OperatorKind};
use belief_core::rankings::{bel_preorder, ranks_from_map, Ocf, Rank, TotalPreorder};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    Preorder {
        ranks: TotalPreorder,
        beliefs: Option<BeliefSet>,
    },
    Ocf(Ocf),
    Knowledge(KnowledgeState),
    Sequence {
        kappa: Ocf,
        observations: Vec<Formula>,
    },
}

impl InitialState {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialState::Preorder { .. } => "preorder",
            InitialState::Ocf(_) => "ocf",
            InitialState::Knowledge(_) => "knowledge",
            InitialState::Sequence { .. } => "sequence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub vocab: Vocabulary,
    pub operator: OperatorKind,
    pub state: InitialState,
    /// Observation text as written, with its parsed formula.
    pub observations: Vec<(String, Formula)>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn schema(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{path}: {msg}"))
}

fn type_name(v: &Value) -> &'static str {
    v.type_str()
}

fn get<'a>(t: &'a Table, prefix: &str, key: &str) -> Result<&'a Value, CliError> {
    t.get(key)
        .ok_or_else(|| schema(&join(prefix, key), "missing field"))
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn string_list(v: &Value, path: &str) -> Result<Vec<String>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| schema(path, format!("expected an array, found {}", type_name(v))))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str().map(str::to_string).ok_or_else(|| {
                schema(&format!("{path}[{i}]"), format!("expected a string, found {}", type_name(x)))
            })
        })
        .collect()
}

fn formulas(v: &Value, path: &str, vocab: &Vocabulary) -> Result<Vec<(String, Formula)>, CliError> {
    string_list(v, path)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let f = parse_formula(&s, vocab)
                .map_err(|e| CliError::Parse(format!("{path}[{i}]: {e}")))?;
            Ok((s, f))
        })
        .collect()
}

fn rank_value(v: &Value, path: &str) -> Result<Rank, CliError> {
    match v {
        Value::Integer(n) if *n >= 0 && *n <= u32::MAX as i64 => Ok(Rank::Finite(*n as u32)),
        Value::String(s) if s == "inf" => Ok(Rank::Infinite),
        _ => Err(schema(path, format!("expected a natural number or \"inf\", found {v}"))),
    }
}

fn rank_map(t: &Table, prefix: &str, vocab: &Vocabulary) -> Result<Vec<Rank>, CliError> {
    let path = join(prefix, "ranks");
    let v = get(t, prefix, "ranks")?;
    let map = v
        .as_table()
        .ok_or_else(|| schema(&path, format!("expected a table, found {}", type_name(v))))?;
    let mut entries = Vec::new();
    for (world, r) in map {
        entries.push((world.as_str(), rank_value(r, &format!("{path}.{world}"))?));
    }
    ranks_from_map(vocab, entries).map_err(|e| schema(&path, e))
}

fn optional_ranks(t: &Table, prefix: &str, vocab: &Vocabulary) -> Result<Option<Vec<Rank>>, CliError> {
    if t.contains_key("ranks") {
        rank_map(t, prefix, vocab).map(Some)
    } else {
        Ok(None)
    }
}

fn finite(ranks: Vec<Rank>, path: &str) -> Result<Vec<u32>, CliError> {
    ranks
        .into_iter()
        .map(|r| r.finite().ok_or_else(|| schema(path, "preorder ranks must be finite")))
        .collect()
}

fn parse_state(t: &Table, vocab: &Vocabulary) -> Result<InitialState, CliError> {
    let p = "state";
    let kind_v = get(t, p, "kind")?;
    let kind = kind_v
        .as_str()
        .ok_or_else(|| schema("state.kind", format!("expected a string, found {}", type_name(kind_v))))?;
    let atoms = vocab.len();
    match kind {
        "preorder" => {
            let ranks = finite(rank_map(t, p, vocab)?, "state.ranks")?;
            let ranks = TotalPreorder::new(atoms, ranks).map_err(|e| schema("state.ranks", e))?;
            let beliefs = match t.get("beliefs") {
                None => None,
                Some(Value::String(s)) => Some(BeliefSet::closure(
                    &parse_formula(s, vocab).map_err(|e| CliError::Parse(format!("state.beliefs: {e}")))?,
                    vocab,
                )),
                Some(v) => return Err(schema("state.beliefs", format!("expected a string, found {}", type_name(v)))),
            };
            Ok(InitialState::Preorder { ranks, beliefs })
        }
        "ocf" => {
            let k = Ocf::new(atoms, rank_map(t, p, vocab)?).map_err(|e| schema("state.ranks", e))?;
            Ok(InitialState::Ocf(k))
        }
        "knowledge" => {
            let k = Ocf::new(atoms, rank_map(t, p, vocab)?).map_err(|e| schema("state.ranks", e))?;
            let obs = match t.get("observations") {
                Some(v) => formulas(v, "state.observations", vocab)?,
                None => Vec::new(),
            };
            let obs = obs.into_iter().map(|(_, f)| f).collect();
            let s = KnowledgeState::from_parts(obs, k).map_err(|e| schema("state", e))?;
            Ok(InitialState::Knowledge(s))
        }
        "sequence" => {
            let kappa = match optional_ranks(t, p, vocab)? {
                Some(r) => Ocf::new(atoms, r).map_err(|e| schema("state.ranks", e))?,
                None => Ocf::flat(atoms),
            };
            let observations = formulas(get(t, p, "observations")?, "state.observations", vocab)?
                .into_iter()
                .map(|(_, f)| f)
                .collect();
            Ok(InitialState::Sequence { kappa, observations })
        }
        other => Err(schema(
            "state.kind",
            format!("unknown kind {other:?} (expected preorder, ocf, knowledge or sequence)"),
        )),
    }
}

/// Whether `operator` can run from a state of this kind.
pub fn compatible(operator: OperatorKind, state: &InitialState) -> bool {
    use OperatorKind::*;
    match state {
        InitialState::Preorder { beliefs, .. } => {
            matches!(operator, Boutilier | Fl | Ranking) && (beliefs.is_none() || operator == Fl)
        }
        InitialState::Ocf(k) => operator == Dp || (operator == Knowledge && k.finite_worlds().is_full()),
        InitialState::Knowledge(_) | InitialState::Sequence { .. } => operator == Knowledge,
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string().trim_end().to_string()))?;
    for key in doc.keys() {
        if !["vocabulary", "operator", "observations", "state"].contains(&key.as_str()) {
            return Err(schema(key, "unknown field"));
        }
    }
    let names = string_list(get(&doc, "", "vocabulary")?, "vocabulary")?;
    let vocab = Vocabulary::new(&names).map_err(|e| schema("vocabulary", e))?;

    let op_v = get(&doc, "", "operator")?;
    let op_name = op_v
        .as_str()
        .ok_or_else(|| schema("operator", format!("expected a string, found {}", type_name(op_v))))?;
    let operator = OperatorKind::parse(op_name)
        .ok_or_else(|| schema("operator", format!("unknown operator {op_name:?}")))?;

    let observations = formulas(get(&doc, "", "observations")?, "observations", &vocab)?;

    let state_v = get(&doc, "", "state")?;
    let state_t = state_v
        .as_table()
        .ok_or_else(|| schema("state", format!("expected a table, found {}", type_name(state_v))))?;
    let state = parse_state(state_t, &vocab)?;

    if !compatible(operator, &state) {
        let detail = match (&state, operator) {
            (InitialState::Ocf(_), OperatorKind::Knowledge) => {
                " (an ocf state for knowledge must have no infinite ranks; use kind = \"knowledge\")".to_string()
            }
            (InitialState::Preorder { beliefs: Some(_), .. }, _) => {
                " (state.beliefs is only meaningful for fl)".to_string()
            }
            _ => String::new(),
        };
        return Err(schema(
            "operator",
            format!("operator {operator} cannot run from a {} state{detail}", state.kind()),
        ));
    }
    if let InitialState::Sequence { kappa, observations } = &state {
        let s0 = KnowledgeState::initial(kappa.clone()).map_err(|e| schema("state.ranks", e))?;
        observations
            .iter()
            .try_fold(s0, |s, f| knowledge_observe(&s, f))
            .map_err(|e| schema("state.observations", e))?;
    }
    Ok(Scenario {
        vocab,
        operator,
        state,
        observations,
    })
}

impl Scenario {
    /// The belief set a preorder state starts from.
    pub fn preorder_beliefs(ranks: &TotalPreorder, beliefs: &Option<BeliefSet>) -> BeliefSet {
        beliefs.unwrap_or_else(|| bel_preorder(ranks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I4: &str = r#"
vocabulary = ["p", "q"]
operator = "knowledge"
observations = ["p", "!p | !q"]

[state]
kind = "ocf"
ranks = { "11" = 0, "01" = 1, "10" = 2, "00" = 3 }
"#;

    fn err(text: &str) -> CliError {
        parse_scenario(text).unwrap_err()
    }

    #[test]
    fn loads_the_running_scenario() {
        let s = parse_scenario(I4).unwrap();
        assert_eq!(s.operator, OperatorKind::Knowledge);
        assert_eq!(s.observations.len(), 2);
        assert_eq!(s.observations[1].0, "!p | !q");
        assert!(matches!(s.state, InitialState::Ocf(_)));
    }

    #[test]
    fn minimal_dp_file() {
        let s = parse_scenario(
            "vocabulary = [\"p\"]\noperator = \"dp\"\nobservations = [\"p\"]\n[state]\nkind = \"ocf\"\nranks = { \"0\" = 0, \"1\" = 0 }\n",
        )
        .unwrap();
        assert_eq!(s.operator, OperatorKind::Dp);
    }

    #[test]
    fn missing_world_is_named() {
        let e = err(&I4.replace(", \"00\" = 3", ""));
        assert_eq!(e.exit_code(), 3);
        let msg = e.to_string();
        assert!(msg.contains("state.ranks") && msg.contains("00"), "{msg}");
    }

    #[test]
    fn incompatible_operator() {
        let e = err(&I4.replace("\"knowledge\"", "\"boutilier\""));
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("boutilier"));
    }

    #[test]
    fn bad_formula_is_a_parse_error() {
        let e = err(&I4.replace("\"p\", \"!p | !q\"", "\"p\", \"!p |\""));
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("observations[1]"), "{e}");
    }

    #[test]
    fn malformed_toml_is_a_parse_error() {
        assert_eq!(err("vocabulary = [").exit_code(), 2);
    }

    #[test]
    fn field_paths_for_type_errors() {
        let e = err(&I4.replace("\"01\" = 1", "\"01\" = -1"));
        assert!(e.to_string().starts_with("state.ranks.01"), "{e}");
        let e = err(&I4.replace("kind = \"ocf\"", "kind = \"tree\""));
        assert!(e.to_string().starts_with("state.kind"), "{e}");
        let e = err(&format!("extra = 1\n{I4}"));
        assert!(e.to_string().starts_with("extra"), "{e}");
    }

    #[test]
    fn knowledge_states_are_validated() {
        let text = r#"
vocabulary = ["p", "q"]
operator = "knowledge"
observations = ["!q"]
[state]
kind = "knowledge"
observations = ["p"]
ranks = { "11" = 0, "10" = 2, "01" = "inf", "00" = "inf" }
"#;
        assert!(matches!(parse_scenario(text).unwrap().state, InitialState::Knowledge(_)));
        let e = err(&text.replace("observations = [\"p\"]", "observations = [\"q\"]"));
        assert_eq!(e.exit_code(), 3);
    }
}
