//! From a finite-rank nested Hankel matrix to an automaton.
//!
//! [`synthesize`] grows a Hankel block until its rank settles, picks
//! spanning rows, and builds two things from them:
//!
//! * the grid construction of [`grid`], whose matrices satisfy the value
//!   identities on the grid words, kept in the report as a certificate;
//! * the automaton of [`representation`], with one state per basis row,
//!   which is what the report returns and what is verified against `f`.

pub mod grid;
pub mod representation;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hankel::{select_spanning, stabilized_block, StabilizedBlock};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::nested_words::{enumerate_well_matched, Alphabet, TaggedLetter, TaggedWord};
use crate::oracle::FunctionOracle;
use crate::wvpa::Wvpa;

pub use grid::{build_call_return, build_internal, build_vectors, grid_construction, GridConstruction};
pub use representation::{fit_nesting, NestingData, NestingFit, RowBasis};

/// An `n x n` grid of spanning words.
///
/// Cell `(i, j)` holds `w_ij` with value `f(w_ij)` and
/// `beta_ij = f(w_ij) / f(w_1j)`. All values are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningGrid {
    n: usize,
    words: Vec<Vec<TaggedWord>>,
    values: Vec<Vec<f64>>,
    betas: Vec<Vec<f64>>,
    basis: Vec<TaggedWord>,
}

impl SpanningGrid {
    /// `basis` lists the distinct spanning words, which the grid cells repeat.
    pub fn new(n: usize, words: Vec<Vec<TaggedWord>>, values: Vec<Vec<f64>>, basis: Vec<TaggedWord>) -> Result<Self> {
        let square = |lens: Vec<usize>| lens.len() == n && lens.iter().all(|&l| l == n);
        if n == 0 || !square(words.iter().map(Vec::len).collect()) || !square(values.iter().map(Vec::len).collect()) {
            return Err(Error::DimensionMismatch(format!("grid must be {n}x{n} with n >= 1")));
        }
        if values.iter().flatten().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::NoNonzeroBasis("grid values must be finite and nonzero".into()));
        }
        let betas = (0..n)
            .map(|i| (0..n).map(|j| values[i][j] / values[0][j]).collect())
            .collect();
        Ok(Self { n, words, values, betas, basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[Vec<TaggedWord>] {
        &self.words
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn betas(&self) -> &[Vec<f64>] {
        &self.betas
    }

    pub fn basis(&self) -> &[TaggedWord] {
        &self.basis
    }
}

/// Knobs for [`synthesize`].
#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    pub start_len: usize,
    pub max_len: usize,
    /// Relative singular value cutoff for ranks.
    pub rank_tol: f64,
    /// Relative tolerance for span and least-squares residuals.
    pub fit_tol: f64,
    /// Words up to this length are compared against `f` after synthesis.
    pub verify_len: usize,
    /// Length of the sample words used to fit nesting; defaults to the larger
    /// of 4 and the final label length.
    pub sample_len: Option<usize>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { start_len: 2, max_len: 8, rank_tol: DEFAULT_RANK_TOL, fit_tol: 1e-8, verify_len: 8, sample_len: None }
    }
}

/// Outcome of comparing an automaton with a function on all short words.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub max_abs_error: f64,
    /// `max_abs_error / max_w |f(w)|`, or the absolute error when `f`
    /// vanishes on every checked word.
    pub max_rel_error: f64,
    pub worst_word: TaggedWord,
    pub words_checked: usize,
}

/// Compares `a` with `f` on every well-matched word of length at most
/// `max_len`.
pub fn verify_equivalence(a: &Wvpa, f: &FunctionOracle, alphabet: &Alphabet, max_len: usize) -> Result<Equivalence> {
    let words = enumerate_well_matched(alphabet, max_len);
    let diffs = words
        .par_iter()
        .map(|w| {
            let want = f.value(w.letters())?;
            let got = a.behavior(w.letters())?;
            let err = if got.is_finite() && want.is_finite() { (got - want).abs() } else { f64::INFINITY };
            Ok((err, want.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst, max_abs_error) = diffs
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &(e, _))| if e > acc.1 { (i, e) } else { acc });
    let scale = diffs.iter().fold(0.0f64, |m, &(_, v)| m.max(v));
    let max_rel_error = if scale > 0.0 { max_abs_error / scale } else { max_abs_error };
    Ok(Equivalence { max_abs_error, max_rel_error, worst_word: words[worst].clone(), words_checked: words.len() })
}

/// Value and nesting identities measured on an automaton's own word matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// Largest `|alpha^T M(w) eta - f(w)|` over grid words and internal
    /// letters, relative to `max(1, |f(w)|)`.
    pub value: f64,
    /// Largest `|alpha^T nest(c, r, M(w)) eta - f(<c w r>)|` over grid words
    /// and letter pairs, relative to `max(1, |f(<c w r>)|)`.
    pub nesting: f64,
}

pub fn identity_residuals(a: &Wvpa, g: &SpanningGrid, f: &FunctionOracle) -> Result<IdentityResiduals> {
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1.0);
    let (alpha, eta) = (a.alpha(), a.eta());
    let sigma = a.alphabet();
    let mut value: f64 = 0.0;
    let mut nesting: f64 = 0.0;
    for w in g.words().iter().flatten() {
        let m = a.word_matrix(w.letters())?;
        value = value.max(rel(m.bilinear(alpha, eta), f.value(w.letters())?));
        for c in sigma.base_letters() {
            for r in sigma.base_letters() {
                let got = a.nest(c, r, &m).bilinear(alpha, eta);
                nesting = nesting.max(rel(got, f.value(w.wrap(c, r).letters())?));
            }
        }
    }
    for s in sigma.base_letters() {
        let letter = [TaggedLetter::internal(s)];
        value = value.max(rel(a.internal(s).bilinear(alpha, eta), f.value(&letter)?));
    }
    Ok(IdentityResiduals { value, nesting })
}

/// Everything [`synthesize`] produced.
#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub automaton: Wvpa,
    pub grid: SpanningGrid,
    /// Rank of the stabilized block; also the number of states.
    pub rank: usize,
    /// Grid side, `ceil(sqrt(rank))`.
    pub n: usize,
    pub block: StabilizedBlock,
    /// The grid construction, or why it could not be built.
    pub grid_construction: std::result::Result<GridConstruction, Error>,
    /// Labelled fit residuals: one per internal letter span and one for the
    /// nesting map.
    pub residuals: Vec<(String, f64)>,
    pub nesting: NestingFit,
    pub identities: IdentityResiduals,
    pub roundtrip: Equivalence,
}

impl SynthesisReport {
    pub fn max_roundtrip_error(&self) -> f64 {
        self.roundtrip.max_abs_error
    }
}

/// Smallest `n` with `n * n >= r`.
pub fn grid_side(rank: usize) -> usize {
    let mut n = 0;
    while n * n < rank {
        n += 1;
    }
    n
}

/// Builds an automaton for `f` from a stabilized block of its nested Hankel
/// matrix and checks it on all words up to `opts.verify_len`.
pub fn synthesize(f: &FunctionOracle, alphabet: &Alphabet, opts: &SynthesisOptions) -> Result<SynthesisReport> {
    let block = stabilized_block(f, alphabet, opts.start_len, opts.max_len, opts.rank_tol)?;
    if !block.stabilized {
        return Err(Error::NotStabilized {
            max_len: opts.max_len,
            ranks: block.history.iter().map(|&(_, r)| r).collect(),
        });
    }
    let rank = block.rank;
    if rank == 0 {
        return Err(Error::NoNonzeroBasis("the function vanishes on the block".into()));
    }
    let n = grid_side(rank);
    let grid = select_spanning(&block.block, n, opts.rank_tol)?;
    let grid_construction = grid_construction(&grid, f, &block.block, alphabet, opts.fit_tol);

    let rows = RowBasis::new(f, grid.basis().to_vec(), block.block.col_labels().to_vec(), opts.fit_tol)?;
    let alpha = rows.initial()?;
    let eta = rows.final_vector()?;
    let mut residuals = Vec::new();
    let mut internal = Vec::with_capacity(alphabet.len());
    for s in alphabet.base_letters() {
        let t = rows.transition(&[TaggedLetter::internal(s)])?;
        let fitted = t.bilinear(&alpha, &eta);
        residuals.push((format!("internal `{}`", alphabet.name(s)), (fitted - f.value(&[TaggedLetter::internal(s)])?).abs()));
        internal.push(t);
    }
    let sample_len = opts.sample_len.unwrap_or(block.label_len.max(4));
    let data = NestingData::collect(&rows, alphabet, sample_len)?;
    let nesting = fit_nesting(&data, n, opts.rank_tol, opts.fit_tol)?;
    residuals.push(("nesting".into(), nesting.residual));
    let automaton = Wvpa::new(
        alphabet.clone(),
        nesting.gamma(),
        alpha,
        eta,
        internal,
        nesting.calls.clone(),
        nesting.rets.clone(),
    )?;
    let identities = identity_residuals(&automaton, &grid, f)?;
    let roundtrip = verify_equivalence(&automaton, f, alphabet, opts.verify_len)?;
    Ok(SynthesisReport { automaton, grid, rank, n, block, grid_construction, residuals, nesting, identities, roundtrip })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wvpa::{paren_count_automaton, random_wvpa};

    fn unary() -> Alphabet {
        Alphabet::new(["a"]).unwrap()
    }

    #[test]
    fn grid_side_values() {
        let sides: Vec<usize> = (0..=10).map(grid_side).collect();
        assert_eq!(sides, [0, 1, 2, 2, 2, 3, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn grid_rejects_zero_values() {
        let w = vec![vec![TaggedWord::empty()]];
        assert!(matches!(
            SpanningGrid::new(1, w.clone(), vec![vec![0.0]], vec![TaggedWord::empty()]),
            Err(Error::NoNonzeroBasis(_))
        ));
        let g = SpanningGrid::new(1, w, vec![vec![3.0]], vec![TaggedWord::empty()]).unwrap();
        assert_eq!(g.betas(), &[vec![1.0]]);
    }

    #[test]
    fn paren_count_synthesis() {
        let sigma = unary();
        let rep = synthesize(&FunctionOracle::ParenCount, &sigma, &SynthesisOptions::default()).unwrap();
        assert_eq!((rep.rank, rep.n, rep.automaton.states(), rep.automaton.gamma()), (2, 2, 2, 2));
        assert!(rep.roundtrip.max_abs_error < 1e-6, "{:?}", rep.roundtrip);
        assert!(rep.identities.value < 1e-8 && rep.identities.nesting < 1e-8, "{:?}", rep.identities);
        let gc = rep.grid_construction.as_ref().unwrap();
        assert!(gc.value_residual < 1e-8 && gc.nesting_residual < 1e-8);
    }

    #[test]
    fn dyck_one_synthesis() {
        let sigma = unary();
        let opts = SynthesisOptions { verify_len: 10, ..Default::default() };
        let rep = synthesize(&FunctionOracle::DyckOne, &sigma, &opts).unwrap();
        assert_eq!(rep.automaton.states(), 1);
        assert!(rep.roundtrip.max_abs_error < 1e-9);
    }

    #[test]
    fn zero_function_fails() {
        let err = synthesize(&FunctionOracle::Constant(0.0), &unary(), &SynthesisOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NoNonzeroBasis(_)));
    }

    #[test]
    fn random_automaton_resynthesis() {
        let sigma = unary();
        let a = random_wvpa(2, &sigma, 1, 11).unwrap();
        let f = FunctionOracle::automaton(a);
        let rep = synthesize(&f, &sigma, &SynthesisOptions::default()).unwrap();
        assert!(rep.automaton.states() <= 2);
        assert!(rep.roundtrip.max_rel_error < 1e-6, "{:?}", rep.roundtrip);
    }

    #[test]
    fn two_letter_alphabet() {
        let sigma = Alphabet::new(["a", "b"]).unwrap();
        let a = random_wvpa(2, &sigma, 1, 5).unwrap();
        let f = FunctionOracle::automaton(a);
        let opts = SynthesisOptions { max_len: 6, verify_len: 6, ..Default::default() };
        let rep = synthesize(&f, &sigma, &opts).unwrap();
        assert!(rep.roundtrip.max_rel_error < 1e-6, "{:?}", rep.roundtrip);
    }

    #[test]
    fn equivalence_checks() {
        let sigma = unary();
        let p = paren_count_automaton();
        let e = verify_equivalence(&p, &FunctionOracle::ParenCount, &sigma, 10).unwrap();
        assert!(e.max_abs_error < 1e-12);
        let e = verify_equivalence(&p, &FunctionOracle::automaton(p.clone()), &sigma, 6).unwrap();
        assert_eq!(e.max_abs_error, 0.0);
        let zero = Wvpa::new(
            sigma.clone(),
            1,
            vec![0.0].into(),
            vec![1.0].into(),
            vec![crate::linalg::Matrix::identity(1)],
            vec![vec![crate::linalg::Matrix::identity(1)]],
            vec![vec![crate::linalg::Matrix::identity(1)]],
        )
        .unwrap();
        let e = verify_equivalence(&zero, &FunctionOracle::DyckOne, &sigma, 4).unwrap();
        assert_eq!((e.max_abs_error, e.worst_word.clone()), (1.0, TaggedWord::empty()));
    }
}
