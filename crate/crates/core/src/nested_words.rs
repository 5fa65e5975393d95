//! Nested words and their tagged-word encodings.
//!
//! A nested word is a word `w` over a base alphabet together with a
//! non-crossing matching relation `nu` whose edges link call positions to
//! return positions. Reading calls as opening brackets and returns as closing
//! brackets gives the tagged-word encoding: a call at letter `s` becomes
//! `<s`, a return becomes `s>`, and every other position stays an internal
//! `s`. Only well-matched nested words (no pending edges) are considered.
//!
//! Positions in [`NestedWord`] are 1-based.
//!
//! The text syntax for tagged words is whitespace separated tokens, with the
//! empty word spelled `eps`:
//!
//! ```
//! use wvpa::nested_words::Alphabet;
//!
//! let sigma = Alphabet::new(["a", "b"]).unwrap();
//! let w = sigma.parse_word("b <a <a b> b>").unwrap();
//! assert!(w.is_well_matched());
//! let nw = wvpa::nested_words::decode(&w).unwrap();
//! assert_eq!(nw.nu(), &[(2, 5), (3, 4)]);
//! ```

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Text token for the empty word.
pub const EPSILON: &str = "eps";

/// A letter of the base alphabet, identified by its index in an [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseLetter(pub usize);

impl BaseLetter {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The three disjoint parts of the tagged alphabet.
///
/// The declaration order is the shortlex tie-break order:
/// internal < call < return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LetterKind {
    Internal,
    Call,
    Return,
}

/// A letter of the tagged alphabet: `<s`, `s>` or `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaggedLetter {
    pub kind: LetterKind,
    pub base: BaseLetter,
}

impl TaggedLetter {
    pub fn internal(base: BaseLetter) -> Self {
        Self { kind: LetterKind::Internal, base }
    }

    pub fn call(base: BaseLetter) -> Self {
        Self { kind: LetterKind::Call, base }
    }

    pub fn ret(base: BaseLetter) -> Self {
        Self { kind: LetterKind::Return, base }
    }
}

/// A finite base alphabet of distinct symbol names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(symbols: Vec<String>) -> Result<Self> {
        Alphabet::new(symbols)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

fn valid_symbol(s: &str) -> bool {
    !s.is_empty()
        && s != EPSILON
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '/' | ',' | '"'))
}

impl Alphabet {
    /// Builds an alphabet. Symbols must be non-empty, distinct, and free of
    /// whitespace and the reserved characters `< > / , "`.
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Parse("alphabet must be non-empty".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if !valid_symbol(s) {
                return Err(Error::Parse(format!("invalid alphabet symbol `{s}`")));
            }
            if symbols[..i].contains(s) {
                return Err(Error::Parse(format!("duplicate alphabet symbol `{s}`")));
            }
        }
        Ok(Self { symbols })
    }

    /// Parses a comma separated list such as `a,b`.
    pub fn parse_list(text: &str) -> Result<Self> {
        Self::new(text.split(',').map(str::trim))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn name(&self, letter: BaseLetter) -> &str {
        &self.symbols[letter.0]
    }

    pub fn letter(&self, name: &str) -> Result<BaseLetter> {
        self.symbols
            .iter()
            .position(|s| s == name)
            .map(BaseLetter)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    pub fn base_letters(&self) -> impl Iterator<Item = BaseLetter> + '_ {
        (0..self.symbols.len()).map(BaseLetter)
    }

    /// All tagged letters in the fixed total order used for shortlex.
    pub fn tagged_letters(&self) -> Vec<TaggedLetter> {
        let mut out = Vec::with_capacity(3 * self.len());
        for kind in [LetterKind::Internal, LetterKind::Call, LetterKind::Return] {
            out.extend(self.base_letters().map(|base| TaggedLetter { kind, base }));
        }
        out
    }

    pub fn contains(&self, letter: BaseLetter) -> bool {
        letter.0 < self.symbols.len()
    }

    pub fn parse_letter(&self, token: &str) -> Result<TaggedLetter> {
        if let Some(rest) = token.strip_prefix('<') {
            Ok(TaggedLetter::call(self.letter(rest)?))
        } else if let Some(rest) = token.strip_suffix('>') {
            Ok(TaggedLetter::ret(self.letter(rest)?))
        } else {
            Ok(TaggedLetter::internal(self.letter(token)?))
        }
    }

    /// Parses the whitespace separated text syntax. The word need not be well
    /// matched.
    pub fn parse_word(&self, text: &str) -> Result<TaggedWord> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::Parse("empty input; write `eps` for the empty word".into()));
        }
        if tokens == [EPSILON] {
            return Ok(TaggedWord::empty());
        }
        tokens
            .into_iter()
            .map(|t| self.parse_letter(t))
            .collect::<Result<Vec<_>>>()
            .map(TaggedWord::new)
    }

    pub fn format_letter(&self, letter: TaggedLetter) -> String {
        let s = self.name(letter.base);
        match letter.kind {
            LetterKind::Internal => s.to_string(),
            LetterKind::Call => format!("<{s}"),
            LetterKind::Return => format!("{s}>"),
        }
    }

    pub fn format_word(&self, word: &TaggedWord) -> String {
        if word.is_empty() {
            return EPSILON.to_string();
        }
        word.letters()
            .iter()
            .map(|&l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub(crate) fn check_word(&self, word: &[TaggedLetter]) -> Result<()> {
        match word.iter().find(|l| !self.contains(l.base)) {
            Some(l) => Err(Error::UnknownLetter(format!("#{}", l.base.0))),
            None => Ok(()),
        }
    }
}

/// A word over the tagged alphabet. Unmatched words are representable.
///
/// Words order by shortlex: shorter words first, then lexicographically by
/// the [`TaggedLetter`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TaggedWord(Vec<TaggedLetter>);

impl TaggedWord {
    pub fn new(letters: Vec<TaggedLetter>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[TaggedLetter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<TaggedLetter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &TaggedWord) -> TaggedWord {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        TaggedWord(v)
    }

    /// `<call self ret>`.
    pub fn wrap(&self, call: BaseLetter, ret: BaseLetter) -> TaggedWord {
        let mut v = Vec::with_capacity(self.len() + 2);
        v.push(TaggedLetter::call(call));
        v.extend_from_slice(&self.0);
        v.push(TaggedLetter::ret(ret));
        TaggedWord(v)
    }

    pub fn is_well_matched(&self) -> bool {
        is_well_matched(&self.0)
    }

    /// Maximal number of simultaneously open calls.
    pub fn nesting_depth(&self) -> usize {
        let mut depth = 0usize;
        let mut max = 0;
        for l in &self.0 {
            match l.kind {
                LetterKind::Call => {
                    depth += 1;
                    max = max.max(depth);
                }
                LetterKind::Return => depth = depth.saturating_sub(1),
                LetterKind::Internal => {}
            }
        }
        max
    }
}

impl From<Vec<TaggedLetter>> for TaggedWord {
    fn from(v: Vec<TaggedLetter>) -> Self {
        Self(v)
    }
}

impl Ord for TaggedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for TaggedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// True iff the open-call counter never goes negative and ends at zero.
pub fn is_well_matched(letters: &[TaggedLetter]) -> bool {
    check_well_matched(letters).is_ok()
}

/// Like [`is_well_matched`], but reports the first offending position.
pub fn check_well_matched(letters: &[TaggedLetter]) -> Result<()> {
    let mut open: Vec<usize> = Vec::new();
    for (i, l) in letters.iter().enumerate() {
        match l.kind {
            LetterKind::Call => open.push(i + 1),
            LetterKind::Return => {
                if open.pop().is_none() {
                    return Err(Error::NotWellMatched { position: i + 1 });
                }
            }
            LetterKind::Internal => {}
        }
    }
    match open.first() {
        Some(&position) => Err(Error::NotWellMatched { position }),
        None => Ok(()),
    }
}

/// A word over the base alphabet with a matching relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NestedWord {
    word: Vec<BaseLetter>,
    nu: Vec<(usize, usize)>,
}

/// One violated condition of the matching-relation definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// An edge `(i, j)` with `i >= j`.
    NotIncreasing { edge: (usize, usize) },
    /// An edge pointing outside `1..=len`; such an edge would be pending.
    Dangling { edge: (usize, usize) },
    /// A position used by more than one edge.
    PositionReused { position: usize },
    /// Two edges with `i < i' <= j < j'`.
    Crossing { outer: (usize, usize), inner: (usize, usize) },
}

impl NestedWord {
    /// Stores `nu` sorted and deduplicated. No validation happens here; see
    /// [`validate`].
    pub fn new(word: Vec<BaseLetter>, mut nu: Vec<(usize, usize)>) -> Self {
        nu.sort_unstable();
        nu.dedup();
        Self { word, nu }
    }

    pub fn word(&self) -> &[BaseLetter] {
        &self.word
    }

    pub fn nu(&self) -> &[(usize, usize)] {
        &self.nu
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> String {
        let repr = NestedWordJson {
            word: self.word.iter().map(|&b| alphabet.name(b).to_string()).collect(),
            nu: self.nu.iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string(&repr).expect("nested word serializes")
    }

    /// Parses `{"word": [...], "nu": [[i, j], ...]}` and validates the result.
    pub fn from_json(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let repr: NestedWordJson = serde_json::from_str(text)?;
        let word = repr
            .word
            .iter()
            .map(|s| alphabet.letter(s))
            .collect::<Result<Vec<_>>>()?;
        let nw = NestedWord::new(word, repr.nu.into_iter().map(|[i, j]| (i, j)).collect());
        let report = validate(&nw);
        if report.is_empty() {
            Ok(nw)
        } else {
            Err(Error::InvalidNestedWord(report))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NestedWordJson {
    word: Vec<String>,
    nu: Vec<[usize; 2]>,
}

/// Checks the matching-relation conditions. An empty report means valid.
pub fn validate(nw: &NestedWord) -> Vec<Violation> {
    let len = nw.len();
    let mut report = Vec::new();
    let mut uses: HashMap<usize, usize> = HashMap::new();
    for &(i, j) in &nw.nu {
        if i >= j {
            report.push(Violation::NotIncreasing { edge: (i, j) });
        }
        if i == 0 || j == 0 || i > len || j > len {
            report.push(Violation::Dangling { edge: (i, j) });
        }
        *uses.entry(i).or_default() += 1;
        *uses.entry(j).or_default() += 1;
    }
    let mut reused: Vec<usize> = uses
        .into_iter()
        .filter(|&(_, n)| n > 1)
        .map(|(p, _)| p)
        .collect();
    reused.sort_unstable();
    report.extend(reused.into_iter().map(|position| Violation::PositionReused { position }));
    for &(i, j) in &nw.nu {
        for &(k, l) in &nw.nu {
            if i < k && k <= j && j < l {
                report.push(Violation::Crossing { outer: (i, j), inner: (k, l) });
            }
        }
    }
    report
}

/// Encodes a valid nested word as a well-matched tagged word.
pub fn encode(nw: &NestedWord) -> Result<TaggedWord> {
    let report = validate(nw);
    if !report.is_empty() {
        return Err(Error::InvalidNestedWord(report));
    }
    let mut letters: Vec<TaggedLetter> = nw.word.iter().map(|&b| TaggedLetter::internal(b)).collect();
    for &(i, j) in &nw.nu {
        letters[i - 1].kind = LetterKind::Call;
        letters[j - 1].kind = LetterKind::Return;
    }
    Ok(TaggedWord(letters))
}

/// Decodes a well-matched tagged word; the partial inverse of [`encode`].
pub fn decode(tw: &TaggedWord) -> Result<NestedWord> {
    check_well_matched(tw.letters())?;
    let mut open = Vec::new();
    let mut nu = Vec::new();
    for (i, l) in tw.letters().iter().enumerate() {
        match l.kind {
            LetterKind::Call => open.push(i + 1),
            LetterKind::Return => nu.push((open.pop().expect("checked well matched"), i + 1)),
            LetterKind::Internal => {}
        }
    }
    Ok(NestedWord::new(tw.letters().iter().map(|l| l.base).collect(), nu))
}

/// All well-matched tagged words of length at most `max_len`, in shortlex
/// order.
pub fn enumerate_well_matched(alphabet: &Alphabet, max_len: usize) -> Vec<TaggedWord> {
    let letters = alphabet.tagged_letters();
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(max_len);
    for len in 0..=max_len {
        extend_words(&letters, len, 0, &mut buf, &mut out);
    }
    out
}

fn extend_words(
    letters: &[TaggedLetter],
    len: usize,
    depth: usize,
    buf: &mut Vec<TaggedLetter>,
    out: &mut Vec<TaggedWord>,
) {
    let remaining = len - buf.len();
    if remaining == 0 {
        if depth == 0 {
            out.push(TaggedWord(buf.clone()));
        }
        return;
    }
    for &l in letters {
        let next = match l.kind {
            LetterKind::Internal => depth,
            LetterKind::Call => depth + 1,
            LetterKind::Return if depth == 0 => continue,
            LetterKind::Return => depth - 1,
        };
        if next > remaining - 1 {
            continue;
        }
        buf.push(l);
        extend_words(letters, len, next, buf, out);
        buf.pop();
    }
}

/// All tagged words (matched or not) of length at most `max_len`, in
/// shortlex order.
pub fn enumerate_all(alphabet: &Alphabet, max_len: usize) -> Vec<TaggedWord> {
    let letters = alphabet.tagged_letters();
    let mut out = vec![TaggedWord::empty()];
    let mut start = 0;
    for _ in 0..max_len {
        let end = out.len();
        for i in start..end {
            for &l in &letters {
                let mut w = out[i].0.clone();
                w.push(l);
                out.push(TaggedWord(w));
            }
        }
        start = end;
    }
    out
}

/// Formats a word with an alphabet.
pub struct WordDisplay<'a> {
    alphabet: &'a Alphabet,
    word: &'a TaggedWord,
}

impl Alphabet {
    pub fn display<'a>(&'a self, word: &'a TaggedWord) -> WordDisplay<'a> {
        WordDisplay { alphabet: self, word }
    }
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.format_word(self.word))
    }
}
