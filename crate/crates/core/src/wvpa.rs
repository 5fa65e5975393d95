//! Weighted visibly pushdown automata and their behavior.
//!
//! An automaton with `n` states assigns an `n x n` matrix to every
//! well-matched word:
//!
//! * the empty word gets the identity,
//! * an internal letter `s` gets its internal matrix,
//! * a concatenation `uv` gets the product of the two matrices,
//! * a nested word `<c u r>` gets `sum_g Call(c, g) * M(u) * Ret(r, g)`.
//!
//! The behavior of the automaton on `w` is `alpha^T * M(w) * eta`.
//!
//! Call, return and internal letters share one base alphabet: the same base
//! letter has a call matrix per stack symbol, a return matrix per stack
//! symbol, and one internal matrix. Stack symbols are `1..=gamma`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::nested_words::{check_well_matched, Alphabet, BaseLetter, LetterKind, TaggedLetter};

/// A real-weighted visibly pushdown automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Wvpa {
    n: usize,
    alphabet: Alphabet,
    gamma: usize,
    alpha: Vector,
    eta: Vector,
    m_int: Vec<Matrix>,
    // indexed [letter][stack symbol - 1]
    m_call: Vec<Vec<Matrix>>,
    m_ret: Vec<Vec<Matrix>>,
}

impl Wvpa {
    /// Assembles an automaton and checks every shape and finiteness invariant.
    ///
    /// `m_call[s][g]` is the call matrix for base letter `s` pushing stack
    /// symbol `g + 1`; likewise `m_ret`.
    pub fn new(
        alphabet: Alphabet,
        gamma: usize,
        alpha: Vector,
        eta: Vector,
        m_int: Vec<Matrix>,
        m_call: Vec<Vec<Matrix>>,
        m_ret: Vec<Vec<Matrix>>,
    ) -> Result<Self> {
        let n = alpha.dim();
        let bad = |msg: String| Err(Error::InvalidAutomaton(msg));
        if n == 0 {
            return bad("automaton needs at least one state".into());
        }
        if gamma == 0 {
            return bad("stack alphabet must be non-empty".into());
        }
        if eta.dim() != n {
            return bad(format!("alpha has dimension {n} but eta has {}", eta.dim()));
        }
        if !alpha.iter().chain(eta.iter()).all(|x| x.is_finite()) {
            return bad("initial/final vectors must be finite".into());
        }
        let k = alphabet.len();
        if m_int.len() != k || m_call.len() != k || m_ret.len() != k {
            return bad(format!("expected matrices for {k} base letters"));
        }
        let check = |m: &Matrix, what: String| -> Result<()> {
            if m.rows() != n || m.cols() != n {
                return Err(Error::InvalidAutomaton(format!(
                    "{what} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(Error::InvalidAutomaton(format!("{what} has non-finite entries")));
            }
            Ok(())
        };
        for (s, name) in alphabet.symbols().iter().enumerate() {
            check(&m_int[s], format!("internal matrix `{name}`"))?;
            for (table, kind) in [(&m_call, "call"), (&m_ret, "return")] {
                if table[s].len() != gamma {
                    return bad(format!(
                        "{kind} letter `{name}` has {} stack matrices, expected {gamma}",
                        table[s].len()
                    ));
                }
                for (g, m) in table[s].iter().enumerate() {
                    check(m, format!("{kind} matrix `{name}/{}`", g + 1))?;
                }
            }
        }
        Ok(Self { n, alphabet, gamma, alpha, eta, m_int, m_call, m_ret })
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn alpha(&self) -> &Vector {
        &self.alpha
    }

    pub fn eta(&self) -> &Vector {
        &self.eta
    }

    pub fn internal(&self, s: BaseLetter) -> &Matrix {
        &self.m_int[s.0]
    }

    /// Call matrix for letter `c` and stack symbol `g` in `1..=gamma`.
    pub fn call(&self, c: BaseLetter, g: usize) -> &Matrix {
        &self.m_call[c.0][g - 1]
    }

    /// Return matrix for letter `r` and stack symbol `g` in `1..=gamma`.
    pub fn ret(&self, r: BaseLetter, g: usize) -> &Matrix {
        &self.m_ret[r.0][g - 1]
    }

    /// `sum_g Call(c, g) * inner * Ret(r, g)`.
    pub fn nest(&self, c: BaseLetter, r: BaseLetter, inner: &Matrix) -> Matrix {
        self.m_call[c.0]
            .iter()
            .zip(&self.m_ret[r.0])
            .fold(Matrix::zeros(self.n, self.n), |acc, (cm, rm)| &acc + &(&(cm * inner) * rm))
    }

    /// The matrix the automaton computes for a well-matched word.
    pub fn word_matrix(&self, word: &[TaggedLetter]) -> Result<Matrix> {
        self.word_matrix_traced(word).map(|(m, _)| m)
    }

    /// Like [`word_matrix`](Self::word_matrix), also returning the largest
    /// stack height reached during the scan.
    pub fn word_matrix_traced(&self, word: &[TaggedLetter]) -> Result<(Matrix, usize)> {
        self.alphabet.check_word(word)?;
        check_well_matched(word)?;
        let mut current = Matrix::identity(self.n);
        let mut stack: Vec<(Matrix, BaseLetter)> = Vec::new();
        let mut max_depth = 0;
        for l in word {
            match l.kind {
                LetterKind::Internal => current = &current * &self.m_int[l.base.0],
                LetterKind::Call => {
                    let saved = std::mem::replace(&mut current, Matrix::identity(self.n));
                    stack.push((saved, l.base));
                    max_depth = max_depth.max(stack.len());
                }
                LetterKind::Return => {
                    let (saved, c) = stack.pop().expect("checked well matched");
                    current = &saved * &self.nest(c, l.base, &current);
                }
            }
        }
        Ok((current, max_depth))
    }

    /// `alpha^T * M(word) * eta`.
    pub fn behavior(&self, word: &[TaggedLetter]) -> Result<f64> {
        let m = self.word_matrix(word)?;
        Ok(m.bilinear(&self.alpha, &self.eta))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WvpaJson::from(self)).expect("automaton serializes")
    }

    /// Parses the JSON exchange format and re-validates every invariant.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: WvpaJson = serde_json::from_str(text)?;
        repr.try_into()
    }
}

/// A random automaton with entries uniform in `[-1, 1]`, reproducible from
/// `seed`.
pub fn random_wvpa(n: usize, alphabet: &Alphabet, gamma: usize, seed: u64) -> Result<Wvpa> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_vec = |rng: &mut ChaCha8Rng| Vector::from((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect::<Vec<_>>());
    let alpha = draw_vec(&mut rng);
    let eta = draw_vec(&mut rng);
    let draw = |rng: &mut ChaCha8Rng| Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    let k = alphabet.len();
    let m_int = (0..k).map(|_| draw(&mut rng)).collect();
    let m_call = (0..k).map(|_| (0..gamma).map(|_| draw(&mut rng)).collect()).collect();
    let m_ret = (0..k).map(|_| (0..gamma).map(|_| draw(&mut rng)).collect()).collect();
    Wvpa::new(alphabet.clone(), gamma, alpha, eta, m_int, m_call, m_ret)
}

/// A two-state automaton over `{a}` that counts matched call/return pairs.
pub fn paren_count_automaton() -> Wvpa {
    let alphabet = Alphabet::new(["a"]).expect("valid alphabet");
    let m = |rows: [[f64; 2]; 2]| Matrix::from_rows(&rows).expect("2x2");
    Wvpa::new(
        alphabet,
        1,
        vec![1.0, 0.0].into(),
        vec![0.0, 1.0].into(),
        vec![Matrix::identity(2)],
        vec![vec![m([[1.0, 1.0], [0.0, 1.0]])]],
        vec![vec![Matrix::identity(2)]],
    )
    .expect("fixture is valid")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WvpaJson {
    n: usize,
    alphabet: Vec<String>,
    gamma: usize,
    alpha: Vec<f64>,
    eta: Vec<f64>,
    m_int: BTreeMap<String, Vec<Vec<f64>>>,
    m_call: BTreeMap<String, Vec<Vec<f64>>>,
    m_ret: BTreeMap<String, Vec<Vec<f64>>>,
}

impl From<&Wvpa> for WvpaJson {
    fn from(a: &Wvpa) -> Self {
        let names = a.alphabet.symbols();
        let stacked = |table: &Vec<Vec<Matrix>>| {
            let mut out = BTreeMap::new();
            for (s, per_gamma) in table.iter().enumerate() {
                for (g, m) in per_gamma.iter().enumerate() {
                    out.insert(format!("{}/{}", names[s], g + 1), m.to_rows());
                }
            }
            out
        };
        WvpaJson {
            n: a.n,
            alphabet: names.to_vec(),
            gamma: a.gamma,
            alpha: a.alpha.to_vec(),
            eta: a.eta.to_vec(),
            m_int: names
                .iter()
                .zip(&a.m_int)
                .map(|(s, m)| (s.clone(), m.to_rows()))
                .collect(),
            m_call: stacked(&a.m_call),
            m_ret: stacked(&a.m_ret),
        }
    }
}

impl TryFrom<WvpaJson> for Wvpa {
    type Error = Error;

    fn try_from(mut j: WvpaJson) -> Result<Self> {
        let alphabet = Alphabet::new(j.alphabet.clone())?;
        if j.alpha.len() != j.n {
            return Err(Error::InvalidAutomaton(format!(
                "n = {} but alpha has {} entries",
                j.n,
                j.alpha.len()
            )));
        }
        let matrix = |rows: Vec<Vec<f64>>, key: &str| {
            Matrix::from_rows(&rows)
                .map_err(|_| Error::InvalidAutomaton(format!("matrix `{key}` has ragged rows")))
        };
        let mut m_int = Vec::new();
        for s in alphabet.symbols() {
            let rows = j
                .m_int
                .remove(s)
                .ok_or_else(|| Error::InvalidAutomaton(format!("missing internal matrix `{s}`")))?;
            m_int.push(matrix(rows, s)?);
        }
        let take_stacked = |table: &mut BTreeMap<String, Vec<Vec<f64>>>, kind: &str| -> Result<Vec<Vec<Matrix>>> {
            let mut out = Vec::new();
            for s in alphabet.symbols() {
                let mut per_gamma = Vec::new();
                for g in 1..=j.gamma {
                    let key = format!("{s}/{g}");
                    let rows = table.remove(&key).ok_or_else(|| {
                        Error::InvalidAutomaton(format!("missing {kind} matrix `{key}`"))
                    })?;
                    per_gamma.push(matrix(rows, &key)?);
                }
                out.push(per_gamma);
            }
            if let Some(extra) = table.keys().next() {
                return Err(Error::InvalidAutomaton(format!("unexpected {kind} key `{extra}`")));
            }
            Ok(out)
        };
        let m_call = take_stacked(&mut j.m_call, "call")?;
        let m_ret = take_stacked(&mut j.m_ret, "return")?;
        if let Some(extra) = j.m_int.keys().next() {
            return Err(Error::InvalidAutomaton(format!("unexpected internal key `{extra}`")));
        }
        Wvpa::new(alphabet, j.gamma, j.alpha.into(), j.eta.into(), m_int, m_call, m_ret)
    }
}
