//! Functions on well-matched words, queried as black boxes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nested_words::{check_well_matched, LetterKind, TaggedLetter};
use crate::wvpa::Wvpa;

type NestedFn = dyn Fn(&[TaggedLetter]) -> f64 + Send + Sync;

/// A real-valued function on well-matched tagged words.
///
/// Every variant is deterministic and may be queried from several threads.
#[derive(Clone)]
pub enum FunctionOracle {
    /// Number of matched call/return pairs.
    ParenCount,
    /// Constantly one on well-matched words: the characteristic function of
    /// balanced brackets on its domain.
    DyckOne,
    Constant(f64),
    /// The behavior of an automaton.
    Automaton(Arc<Wvpa>),
    /// Any other function, with an identifier used in reports.
    Custom { id: String, f: Arc<NestedFn> },
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FunctionOracle {
    pub fn automaton(a: Wvpa) -> Self {
        FunctionOracle::Automaton(Arc::new(a))
    }

    pub fn custom(id: impl Into<String>, f: impl Fn(&[TaggedLetter]) -> f64 + Send + Sync + 'static) -> Self {
        FunctionOracle::Custom { id: id.into(), f: Arc::new(f) }
    }

    /// Resolves a builtin by name: `paren_count`, `dyck_one`, `constant0`,
    /// or `constant(<c>)`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name.trim() {
            "paren_count" => Ok(FunctionOracle::ParenCount),
            "dyck_one" => Ok(FunctionOracle::DyckOne),
            "constant0" => Ok(FunctionOracle::Constant(0.0)),
            other => other
                .strip_prefix("constant(")
                .and_then(|s| s.strip_suffix(')'))
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|c| c.is_finite())
                .map(FunctionOracle::Constant)
                .ok_or_else(|| Error::Parse(format!("unknown function `{other}`"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            FunctionOracle::ParenCount => "paren_count".into(),
            FunctionOracle::DyckOne => "dyck_one".into(),
            FunctionOracle::Constant(c) => format!("constant({c})"),
            FunctionOracle::Automaton(a) => format!("automaton(n={})", a.states()),
            FunctionOracle::Custom { id, .. } => id.clone(),
        }
    }

    /// `f(word)`; the word must be well matched.
    pub fn value(&self, word: &[TaggedLetter]) -> Result<f64> {
        check_well_matched(word)?;
        Ok(self.value_unchecked(word, &[]))
    }

    /// `f(u v)` without materializing the concatenation when possible; the
    /// concatenation must be well matched.
    pub fn value_pair(&self, u: &[TaggedLetter], v: &[TaggedLetter]) -> Result<f64> {
        if !pair_well_matched(u, v) {
            let mut w = u.to_vec();
            w.extend_from_slice(v);
            check_well_matched(&w)?;
        }
        Ok(self.value_unchecked(u, v))
    }

    /// `f` extended by zero to words that are not well matched.
    pub fn value_extended(&self, u: &[TaggedLetter], v: &[TaggedLetter]) -> f64 {
        if pair_well_matched(u, v) {
            self.value_unchecked(u, v)
        } else {
            0.0
        }
    }

    fn value_unchecked(&self, u: &[TaggedLetter], v: &[TaggedLetter]) -> f64 {
        match self {
            FunctionOracle::ParenCount => u
                .iter()
                .chain(v)
                .filter(|l| l.kind == LetterKind::Call)
                .count() as f64,
            FunctionOracle::DyckOne => 1.0,
            FunctionOracle::Constant(c) => *c,
            FunctionOracle::Automaton(a) => {
                let w = [u, v].concat();
                // letters outside the automaton's alphabet have no defined value
                a.behavior(&w).unwrap_or(f64::NAN)
            }
            FunctionOracle::Custom { f, .. } => {
                if v.is_empty() {
                    f(u)
                } else {
                    f(&[u, v].concat())
                }
            }
        }
    }
}

fn pair_well_matched(u: &[TaggedLetter], v: &[TaggedLetter]) -> bool {
    let mut depth = 0usize;
    for l in u.iter().chain(v) {
        match l.kind {
            LetterKind::Call => depth += 1,
            LetterKind::Return => match depth.checked_sub(1) {
                Some(d) => depth = d,
                None => return false,
            },
            LetterKind::Internal => {}
        }
    }
    depth == 0
}
