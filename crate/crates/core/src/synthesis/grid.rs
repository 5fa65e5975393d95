//! The grid construction: vectors, internal matrices and call/return matrices
//! built from an `n x n` grid of spanning words.
//!
//! The matrices defined here satisfy two identities on the grid
//! words by construction:
//!
//! * `alpha^T * M_w * eta = f(w)` for every grid word and internal letter,
//! * `alpha^T * (sum_g Call(c, g) * M_w * Ret(r, g)) * eta = f(<c w r>)`.
//!
//! Here `M_w` is the matrix assigned to the grid word, `beta * A(i, j)`. The
//! automaton assembled from these pieces evaluates the empty word to the
//! identity, which is generally not consistent with that assignment, so its
//! behavior need not equal `f`. [`GridConstruction::automaton`] exposes it
//! for inspection; synthesis uses [`super::representation`] for the automaton
//! it returns.

use crate::error::{Error, Result};
use crate::hankel::HankelBlock;
use crate::linalg::{solve_in_span, span_residual, svd_expansion, Matrix, Vector};
use crate::nested_words::{Alphabet, TaggedLetter, TaggedWord};
use crate::oracle::FunctionOracle;
use crate::wvpa::Wvpa;

use super::SpanningGrid;

/// `alpha = (1, ..., 1)` and `eta(j) = f(w_{1,j})`, so that
/// `alpha(i) * eta(j) = f(w_{1,j})` for every `i`.
pub fn build_vectors(g: &SpanningGrid) -> (Vector, Vector) {
    let n = g.n();
    (Vector::from(vec![1.0; n]), Vector::from(g.values()[0].clone()))
}

/// Matrices for the grid words and the internal letters.
#[derive(Debug, Clone)]
pub struct InternalMatrices {
    /// `M_{w_ij} = beta_ij * A(i, j)`, indexed `[i][j]`.
    pub grid: Vec<Vec<Matrix>>,
    /// One matrix per base letter, in alphabet order.
    pub letters: Vec<Matrix>,
    /// Span residual of each letter's row against the grid rows.
    pub residuals: Vec<f64>,
}

fn row_of<'a>(b: &'a HankelBlock, w: &TaggedWord, what: &str) -> Result<&'a [f64]> {
    b.row_labels()
        .iter()
        .position(|l| l == w)
        .map(|i| b.entries().row(i))
        .ok_or_else(|| Error::DimensionMismatch(format!("block has no row for {what}")))
}

/// Grid-word matrices, and `M_a = sum_ij z_ij * M_{w_ij}` where `z` writes
/// the block row of `a` in terms of the grid rows.
pub fn build_internal(g: &SpanningGrid, b: &HankelBlock, alphabet: &Alphabet, rel_tol: f64) -> Result<InternalMatrices> {
    let n = g.n();
    let grid: Vec<Vec<Matrix>> = (0..n)
        .map(|i| (0..n).map(|j| Matrix::unit(n, i, j).scaled(g.betas()[i][j])).collect())
        .collect();
    let mut grid_rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            grid_rows.push(Vector::from(row_of(b, &g.words()[i][j], "a grid word")?.to_vec()));
        }
    }
    let mut letters = Vec::with_capacity(alphabet.len());
    let mut residuals = Vec::with_capacity(alphabet.len());
    for s in alphabet.base_letters() {
        let word = TaggedWord::new(vec![TaggedLetter::internal(s)]);
        let target = row_of(b, &word, &format!("internal letter `{}`", alphabet.name(s)))?;
        let z = solve_in_span(&grid_rows, target, rel_tol).map_err(|e| match e {
            Error::NotInSpan { residual, .. } => Error::NotInSpan {
                context: format!("internal letter `{}`", alphabet.name(s)),
                residual,
            },
            other => other,
        })?;
        residuals.push(span_residual(&grid_rows, &z, target));
        letters.push(Matrix::from_fn(n, n, |i, j| z[i * n + j] * g.betas()[i][j]));
    }
    Ok(InternalMatrices { grid, letters, residuals })
}

/// Call and return matrices, indexed `[letter][stack symbol - 1]`.
pub type CallReturn = (Vec<Vec<Matrix>>, Vec<Vec<Matrix>>);

/// Factors the joint matrix `J[(c, i), (r, j)] = f(<c w_ij r>) / beta_ij` as
/// `sum_g p_g q_g^T` with `n` terms and spreads each pair over one row of a
/// call matrix and one column of a return matrix.
///
/// With one base letter `J` is `n x n` and the expansion always exists. With
/// more letters `J` may have rank above `n`, reported as
/// [`Error::InsufficientTerms`].
pub fn build_call_return(
    g: &SpanningGrid,
    f: &FunctionOracle,
    alphabet: &Alphabet,
    alpha: &[f64],
    eta: &[f64],
) -> Result<CallReturn> {
    let n = g.n();
    let k = alphabet.len();
    let mut joint = Matrix::zeros(k * n, k * n);
    for c in alphabet.base_letters() {
        for r in alphabet.base_letters() {
            for i in 0..n {
                for j in 0..n {
                    let w = g.words()[i][j].wrap(c, r);
                    joint[(c.0 * n + i, r.0 * n + j)] = f.value(w.letters())? / g.betas()[i][j];
                }
            }
        }
    }
    let pairs = svd_expansion(&joint, n)?;
    let calls = (0..k)
        .map(|c| {
            (0..n)
                .map(|gamma| {
                    let p = &pairs[gamma].0;
                    Matrix::from_fn(n, n, |l, i| if l == gamma { p[c * n + i] / alpha[gamma] } else { 0.0 })
                })
                .collect()
        })
        .collect();
    let rets = (0..k)
        .map(|r| {
            (0..n)
                .map(|gamma| {
                    let q = &pairs[gamma].1;
                    Matrix::from_fn(n, n, |j, m| if m == gamma { q[r * n + j] / eta[gamma] } else { 0.0 })
                })
                .collect()
        })
        .collect();
    Ok((calls, rets))
}

/// All pieces of the grid construction, with the identity residuals measured on
/// the grid-word matrices it defines.
#[derive(Debug, Clone)]
pub struct GridConstruction {
    pub alpha: Vector,
    pub eta: Vector,
    pub internal: InternalMatrices,
    pub automaton: Wvpa,
    /// Largest `|alpha^T M_w eta - f(w)|` over grid words and internal letters.
    pub value_residual: f64,
    /// Largest `|alpha^T nest(c, r, M_w) eta - f(<c w r>)|` over grid cells.
    pub nesting_residual: f64,
}

/// Runs [`build_vectors`], [`build_internal`] and [`build_call_return`] and
/// assembles the automaton.
pub fn grid_construction(
    g: &SpanningGrid,
    f: &FunctionOracle,
    b: &HankelBlock,
    alphabet: &Alphabet,
    rel_tol: f64,
) -> Result<GridConstruction> {
    let n = g.n();
    let (alpha, eta) = build_vectors(g);
    let internal = build_internal(g, b, alphabet, rel_tol)?;
    let (calls, rets) = build_call_return(g, f, alphabet, &alpha, &eta)?;
    let automaton = Wvpa::new(
        alphabet.clone(),
        n,
        alpha.clone(),
        eta.clone(),
        internal.letters.clone(),
        calls,
        rets,
    )?;

    let mut value: f64 = 0.0;
    let mut nesting: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let m = &internal.grid[i][j];
            value = value.max((m.bilinear(&alpha, &eta) - g.values()[i][j]).abs());
            for c in alphabet.base_letters() {
                for r in alphabet.base_letters() {
                    let w = g.words()[i][j].wrap(c, r);
                    let got = automaton.nest(c, r, m).bilinear(&alpha, &eta);
                    nesting = nesting.max((got - f.value(w.letters())?).abs());
                }
            }
        }
    }
    for (s, m) in alphabet.base_letters().zip(&internal.letters) {
        let fa = f.value(&[TaggedLetter::internal(s)])?;
        value = value.max((m.bilinear(&alpha, &eta) - fa).abs());
    }
    Ok(GridConstruction { alpha, eta, internal, automaton, value_residual: value, nesting_residual: nesting })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::{build_block, select_spanning};
    use crate::linalg::DEFAULT_RANK_TOL;
    use crate::nested_words::enumerate_well_matched;

    fn paren_setup() -> (Alphabet, HankelBlock, SpanningGrid) {
        let sigma = Alphabet::new(["a"]).unwrap();
        let labels = enumerate_well_matched(&sigma, 4);
        let b = build_block(&FunctionOracle::ParenCount, &labels, &labels).unwrap();
        let g = select_spanning(&b, 2, DEFAULT_RANK_TOL).unwrap();
        (sigma, b, g)
    }

    #[test]
    fn vectors_from_first_grid_row() {
        let (_, _, g) = paren_setup();
        let (alpha, eta) = build_vectors(&g);
        assert_eq!(alpha.to_vec(), vec![1.0, 1.0]);
        assert_eq!(eta.to_vec(), vec![1.0, 2.0]);
    }

    #[test]
    fn identities_on_grid_matrices() {
        let (sigma, b, g) = paren_setup();
        let gc = grid_construction(&g, &FunctionOracle::ParenCount, &b, &sigma, 1e-8).unwrap();
        assert!(gc.value_residual < 1e-8, "{}", gc.value_residual);
        assert!(gc.nesting_residual < 1e-8, "{}", gc.nesting_residual);
        // alpha^T M_{w_12} eta = f(<a <a a> a>) = 2
        assert!((gc.internal.grid[0][1].bilinear(&gc.alpha, &gc.eta) - 2.0).abs() < 1e-12);
        // f(a) = 0
        assert!(gc.internal.letters[0].bilinear(&gc.alpha, &gc.eta).abs() < 1e-8);
    }

    #[test]
    fn grid_automaton_misses_the_empty_word() {
        // the assembled automaton maps eps to the identity, so its value there
        // is alpha . eta = 3 rather than f(eps) = 0
        let (sigma, b, g) = paren_setup();
        let gc = grid_construction(&g, &FunctionOracle::ParenCount, &b, &sigma, 1e-8).unwrap();
        assert_eq!(gc.automaton.behavior(&[]).unwrap(), 3.0);
        let w = sigma.parse_word("<a a>").unwrap();
        assert!((gc.automaton.behavior(w.letters()).unwrap() - 1.0).abs() > 1.0);
    }

    #[test]
    fn scalar_constant_grid() {
        let sigma = Alphabet::new(["a"]).unwrap();
        let f = FunctionOracle::Constant(5.0);
        let labels = enumerate_well_matched(&sigma, 3);
        let b = build_block(&f, &labels, &labels).unwrap();
        let g = select_spanning(&b, 1, DEFAULT_RANK_TOL).unwrap();
        let gc = grid_construction(&g, &f, &b, &sigma, 1e-8).unwrap();
        assert_eq!(gc.eta.to_vec(), vec![5.0]);
        assert!((gc.internal.letters[0][(0, 0)] - 1.0).abs() < 1e-12);
        // the scalar case is a genuine automaton for the constant
        for w in enumerate_well_matched(&sigma, 6) {
            assert!((gc.automaton.behavior(w.letters()).unwrap() - 5.0).abs() < 1e-9);
        }
    }
}
