//! Finite blocks of nested Hankel matrices and their ranks.
//!
//! The nested Hankel matrix of `f` has rows and columns indexed by
//! well-matched tagged words, with entry `f(uv)` at `(u, v)`. Since a
//! concatenation of well-matched words is well matched, every entry is
//! defined. This module builds finite blocks of it, grows them until their
//! rank settles, and picks spanning rows for synthesis.
//!
//! It also builds the classical word Hankel matrix, indexed by all tagged
//! words, for comparison: there, `f` is extended by zero outside its domain.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, numerical_rank, svd, Matrix};
use crate::nested_words::{
    enumerate_all, enumerate_well_matched, Alphabet, LetterKind, TaggedLetter, TaggedWord,
};
use crate::oracle::FunctionOracle;
use crate::synthesis::SpanningGrid;

/// A finite block of a nested Hankel matrix.
#[derive(Debug, Clone)]
pub struct HankelBlock {
    row_labels: Vec<TaggedWord>,
    col_labels: Vec<TaggedWord>,
    entries: Matrix,
    oracle_id: String,
}

impl HankelBlock {
    pub fn row_labels(&self) -> &[TaggedWord] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[TaggedWord] {
        &self.col_labels
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn oracle_id(&self) -> &str {
        &self.oracle_id
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        block_rank(self, rel_tol)
    }

    /// CSV dump: the first row holds column labels, the first column row
    /// labels, entries use up to 12 significant digits.
    pub fn to_csv(&self, alphabet: &Alphabet) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once(String::new())
            .chain(self.col_labels.iter().map(|c| alphabet.format_word(c)));
        w.write_record(header).expect("in-memory write");
        for (i, label) in self.row_labels.iter().enumerate() {
            let record = std::iter::once(alphabet.format_word(label))
                .chain(self.entries.row(i).iter().map(|&x| format_sig12(x)));
            w.write_record(record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// scientific notation outside `1e-4 <= |x| < 1e12`. `-0` prints as `0`.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    let out = if (-4..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa))
    };
    if out.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        out
    }
}

/// Fills `f(uv)` for every row label `u` and column label `v`.
pub fn build_block(f: &FunctionOracle, rows: &[TaggedWord], cols: &[TaggedWord]) -> Result<HankelBlock> {
    for w in rows.iter().chain(cols) {
        crate::nested_words::check_well_matched(w.letters())?;
    }
    let data: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|u| {
            cols.iter()
                .map(|v| f.value_pair(u.letters(), v.letters()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let entries = if rows.is_empty() {
        Matrix::zeros(0, cols.len())
    } else {
        Matrix::from_rows(&data)?
    };
    Ok(HankelBlock {
        row_labels: rows.to_vec(),
        col_labels: cols.to_vec(),
        entries,
        oracle_id: f.id(),
    })
}

pub fn block_rank(b: &HankelBlock, rel_tol: f64) -> usize {
    numerical_rank(&b.entries, rel_tol)
}

/// Result of growing a block until its rank settles.
#[derive(Debug, Clone)]
pub struct StabilizedBlock {
    pub block: HankelBlock,
    pub rank: usize,
    /// False when `max_len` was reached before the rank held steady.
    pub stabilized: bool,
    /// Label length of the final block.
    pub label_len: usize,
    /// `(label length, rank)` for every block tried.
    pub history: Vec<(usize, usize)>,
}

/// Grows the label set (all well-matched words up to length `L`) from
/// `start_len` until the rank is unchanged for two consecutive increments or
/// `max_len` is reached.
pub fn stabilized_block(
    f: &FunctionOracle,
    alphabet: &Alphabet,
    start_len: usize,
    max_len: usize,
    rel_tol: f64,
) -> Result<StabilizedBlock> {
    if start_len > max_len {
        return Err(Error::DimensionMismatch(format!(
            "start length {start_len} exceeds max length {max_len}"
        )));
    }
    let mut history = Vec::new();
    let mut unchanged = 0;
    let mut len = start_len;
    loop {
        let labels = enumerate_well_matched(alphabet, len);
        let block = build_block(f, &labels, &labels)?;
        let rank = block_rank(&block, rel_tol);
        if history.last().is_some_and(|&(_, r)| r == rank) {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        history.push((len, rank));
        if unchanged >= 2 || len == max_len {
            return Ok(StabilizedBlock { block, rank, stabilized: unchanged >= 2, label_len: len, history });
        }
        len += 1;
    }
}

/// Picks spanning rows of `b` and lays them out as an `n x n` grid.
///
/// Rows are chosen by pivoted Gram-Schmidt among rows whose label has a
/// nonzero value `f(w)` (read from the empty-word column). The `r` chosen
/// rows are kept in label order and repeated cyclically to fill the `n^2`
/// cells row by row.
pub fn select_spanning(b: &HankelBlock, n: usize, rel_tol: f64) -> Result<SpanningGrid> {
    let eps_col = b
        .col_labels
        .iter()
        .position(TaggedWord::is_empty)
        .ok_or_else(|| Error::DimensionMismatch("block has no empty-word column".into()))?;
    let rank = block_rank(b, rel_tol);
    if rank == 0 {
        return Err(Error::NoNonzeroBasis("the block is zero".into()));
    }
    if rank > n * n {
        return Err(Error::DimensionMismatch(format!("rank {rank} exceeds {n}^2")));
    }
    let scale = b.entries.max_abs();
    let value = |i: usize| b.entries[(i, eps_col)];
    let candidates: Vec<usize> = (0..b.row_labels.len())
        .filter(|&i| value(i).abs() > rel_tol * scale)
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoNonzeroBasis("every row label has value zero".into()));
    }

    let sigma1 = svd(&b.entries).map(|s| s.sigma[0]).unwrap_or(0.0);
    let mut residuals: Vec<Vec<f64>> = candidates.iter().map(|&i| b.entries.row(i).to_vec()).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(rank);
    while chosen.len() < rank {
        let norms: Vec<f64> = residuals.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let best = norms
            .iter()
            .enumerate()
            .filter(|(k, _)| !chosen.contains(k))
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)));
        let Some((best, &best_norm)) = best.filter(|(_, &norm)| norm > rel_tol * sigma1) else {
            return Err(Error::NoNonzeroBasis(format!(
                "rows with nonzero value span rank {} of {rank}",
                chosen.len()
            )));
        };
        let q: Vec<f64> = residuals[best].iter().map(|x| x / best_norm).collect();
        for r in residuals.iter_mut() {
            let d: f64 = r.iter().zip(&q).map(|(a, b)| a * b).sum();
            for (x, y) in r.iter_mut().zip(&q) {
                *x -= d * y;
            }
        }
        chosen.push(best);
    }
    let mut rows: Vec<usize> = chosen.into_iter().map(|k| candidates[k]).collect();
    rows.sort_unstable();

    // the chosen rows must span every row of the block
    let basis_t = Matrix::from_fn(b.col_labels.len(), rows.len(), |c, k| b.entries[(rows[k], c)]);
    let coeffs = least_squares(&basis_t, &b.entries.transpose())?;
    let residual = (&basis_t * &coeffs).max_abs_diff(&b.entries.transpose());
    if residual > rel_tol * (1.0 + scale) * 1e3 {
        return Err(Error::NotInSpan { context: "spanning rows".into(), residual });
    }

    let basis: Vec<TaggedWord> = rows.iter().map(|&i| b.row_labels[i].clone()).collect();
    let basis_values: Vec<f64> = rows.iter().map(|&i| value(i)).collect();
    let cell = |i: usize, j: usize| (i * n + j) % rows.len();
    let words = (0..n).map(|i| (0..n).map(|j| basis[cell(i, j)].clone()).collect()).collect();
    let values = (0..n).map(|i| (0..n).map(|j| basis_values[cell(i, j)]).collect()).collect();
    SpanningGrid::new(n, words, values, basis)
}

fn prefix_closable(w: &[TaggedLetter], budget: usize) -> bool {
    let mut depth = 0usize;
    for l in w {
        match l.kind {
            LetterKind::Call => depth += 1,
            LetterKind::Return => match depth.checked_sub(1) {
                Some(d) => depth = d,
                None => return false,
            },
            LetterKind::Internal => {}
        }
    }
    depth <= budget
}

fn suffix_closable(w: &[TaggedLetter], budget: usize) -> bool {
    let mut depth = 0usize;
    for l in w.iter().rev() {
        match l.kind {
            LetterKind::Return => depth += 1,
            LetterKind::Call => match depth.checked_sub(1) {
                Some(d) => depth = d,
                None => return false,
            },
            LetterKind::Internal => {}
        }
    }
    depth <= budget
}

/// Rank of the word Hankel block indexed by all tagged words of length at
/// most `len`, with `H(u, v) = f(uv)` when `uv` is well matched and `0`
/// otherwise.
///
/// Rows and columns that are identically zero, and duplicate rows and
/// columns, do not change the rank and are dropped before the SVD.
pub fn word_hankel_rank(f: &FunctionOracle, alphabet: &Alphabet, len: usize, rel_tol: f64) -> usize {
    let all = enumerate_all(alphabet, len);
    let rows: Vec<&TaggedWord> = all.iter().filter(|w| prefix_closable(w.letters(), len)).collect();
    let cols: Vec<&TaggedWord> = all.iter().filter(|w| suffix_closable(w.letters(), len)).collect();
    let distinct_rows = distinct(rows.par_iter().map(|u| {
        cols.iter()
            .map(|v| f.value_extended(u.letters(), v.letters()))
            .collect::<Vec<f64>>()
    }));
    if distinct_rows.is_empty() {
        return 0;
    }
    let m = Matrix::from_rows(&distinct_rows).expect("rows share a length");
    let distinct_cols = distinct((0..m.cols()).into_par_iter().map(|j| m.col(j)));
    numerical_rank(&Matrix::from_rows(&distinct_cols).expect("rows share a length"), rel_tol)
}

fn distinct(rows: impl ParallelIterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let key = |r: &Vec<f64>| r.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<u64>>();
    let all: Vec<Vec<f64>> = rows.filter(|r| r.iter().any(|&x| x != 0.0)).collect();
    let mut seen = HashSet::new();
    all.into_iter().filter(|r| seen.insert(key(r))).collect()
}

/// [`word_hankel_rank`] at each length in `lengths`.
pub fn word_hankel_rank_growth(
    f: &FunctionOracle,
    alphabet: &Alphabet,
    lengths: &[usize],
    rel_tol: f64,
) -> Vec<(usize, usize)> {
    lengths
        .iter()
        .map(|&len| (len, word_hankel_rank(f, alphabet, len, rel_tol)))
        .collect()
}
