//! Loading language files and deriving alphabets.
//!
//! Two JSON layouts are accepted: full model files (with a `version` field)
//! and raw automaton files `{alphabet, num_states, accepting, edges}` with
//! edges as `[from, "symbol", to]` triples and start state 0.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use regccrf::automata::{Alphabet, Edge, Nfa};
use regccrf::model::Model;
use regccrf::tagset::ConstrainedTagSet;

use crate::CliError;

pub enum LanguageFile {
    Model(Box<Model>),
    Raw(Nfa),
}

pub fn load_language(path: &Path) -> Result<LanguageFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    if value.get("version").is_some() {
        let model = Model::from_json_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(LanguageFile::Model(Box::new(model)))
    } else {
        let nfa: Nfa = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(LanguageFile::Raw(nfa))
    }
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    match load_language(path)? {
        LanguageFile::Model(model) => Ok(*model),
        LanguageFile::Raw(_) => Err(CliError::Usage(format!(
            "{} is a raw automaton; compile it first",
            path.display()
        ))),
    }
}

/// Reads the symbols of a regex source: bracketed names verbatim, any other
/// non-reserved character as a single-character symbol. Repetition counts in
/// braces are skipped. The alphabet comes out sorted.
pub fn infer_alphabet(source: &str) -> Result<Alphabet, CliError> {
    let mut names = BTreeSet::new();
    let mut chars = source.chars();
    while let Some(c) = chars.next() {
        match c {
            '[' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some(']') => break,
                        Some(c) => name.push(c),
                        None => {
                            return Err(CliError::Usage("unterminated `[` in the regex".into()))
                        }
                    }
                }
                names.insert(name);
            }
            '{' => {
                for c in chars.by_ref() {
                    if c == '}' {
                        break;
                    }
                }
            }
            '|' | '*' | '+' | '?' | '(' | ')' | ']' | '}' => {}
            c if c.is_whitespace() => {}
            c => {
                names.insert(c.to_string());
            }
        }
    }
    if names.is_empty() {
        return Err(CliError::Usage(
            "the regex mentions no symbols; pass --alphabet explicitly".into(),
        ));
    }
    Alphabet::new(names).map_err(|e| CliError::Usage(e.to_string()))
}

/// The language of all label sequences: one state, one self-loop per label.
/// Training over it is plain unconstrained training, and the resulting model
/// file decodes without any constraint.
pub fn universal_language(
    labels: impl IntoIterator<Item = String>,
) -> Result<ConstrainedTagSet, CliError> {
    let alphabet = Alphabet::new(labels).map_err(|e| CliError::Usage(e.to_string()))?;
    let edges = (0..alphabet.len())
        .map(|symbol| Edge {
            from: 0,
            symbol,
            to: 0,
        })
        .collect();
    let nfa = Nfa::new(alphabet, 1, [0], edges).map_err(|e| CliError::Failure(e.to_string()))?;
    ConstrainedTagSet::build(nfa)
        .map_err(|w| CliError::Failure(format!("single-state language cannot be ambiguous: {w}")))
}
