//! Automata read off a basis of Hankel rows.
//!
//! Fix spanning rows `b_1, ..., b_d` of the nested Hankel matrix. Every row
//! `r_u` is then a combination `sum_k z_k(u) r_{b_k}`, and the matrix `T_u`
//! whose `k`-th row is `z(b_k u)` satisfies `T_{uv} = T_u T_v`,
//! `z(u) = z(eps) T_u` and `f(u) = z(u) . (f(b_1), ..., f(b_d))`. These give
//! the initial vector, final vector and internal matrices.
//!
//! Nesting is learned: the map `T_v -> T_{<c v r>}` is fitted on sample words
//! as `sum_g C(c, g) T_v R(r, g)`. When the sample matrices `T_v` span the
//! whole matrix space the fit is a linear solve followed by a truncated SVD;
//! otherwise alternating least squares looks for a solution with few stack
//! symbols.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, numerical_rank, pseudo_inverse, svd_expansion, Matrix, Vector};
use crate::nested_words::{enumerate_well_matched, Alphabet, TaggedLetter, TaggedWord};
use crate::oracle::FunctionOracle;

/// Coordinates of Hankel rows in a fixed basis of rows.
pub struct RowBasis<'a> {
    f: &'a FunctionOracle,
    cols: Vec<TaggedWord>,
    basis: Vec<TaggedWord>,
    basis_rows: Matrix,
    pinv: Matrix,
    rel_tol: f64,
}

impl<'a> RowBasis<'a> {
    /// `basis` words index the rows, `cols` the columns they are restricted to.
    pub fn new(f: &'a FunctionOracle, basis: Vec<TaggedWord>, cols: Vec<TaggedWord>, rel_tol: f64) -> Result<Self> {
        let rows = basis
            .iter()
            .map(|b| Self::row_with(f, &cols, b.letters()))
            .collect::<Result<Vec<_>>>()?;
        let basis_rows = Matrix::from_rows(&rows)?;
        let pinv = pseudo_inverse(&basis_rows.transpose());
        Ok(Self { f, cols, basis, basis_rows, pinv, rel_tol })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn row_with(f: &FunctionOracle, cols: &[TaggedWord], u: &[TaggedLetter]) -> Result<Vec<f64>> {
        cols.iter().map(|v| f.value_pair(u, v.letters())).collect()
    }

    /// `z(u)` with `r_u = sum_k z_k r_{b_k}` on the block columns.
    pub fn coords(&self, u: &[TaggedLetter]) -> Result<Vector> {
        let row = Self::row_with(self.f, &self.cols, u)?;
        let z = self.pinv.mat_vec(&row);
        let fitted = self.basis_rows.vec_mat(&z);
        let residual = fitted.iter().zip(&row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if residual > self.rel_tol * (1.0 + scale) {
            return Err(Error::NotInSpan { context: format!("row of a word of length {}", u.len()), residual });
        }
        Ok(z)
    }

    /// `T_u`, with row `k` equal to `z(b_k u)`.
    pub fn transition(&self, u: &[TaggedLetter]) -> Result<Matrix> {
        let rows = self
            .basis
            .iter()
            .map(|b| self.coords(&[b.letters(), u].concat()).map(Vector::into_inner))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows)
    }

    pub fn initial(&self) -> Result<Vector> {
        self.coords(&[])
    }

    pub fn final_vector(&self) -> Result<Vector> {
        self.basis.iter().map(|b| self.f.value(b.letters())).collect::<Result<Vec<_>>>().map(Vector::from)
    }
}

/// Training data for the nesting map: `ys[c][r][v] = T_{<c v r>}` against
/// `xs[v] = T_v`.
pub struct NestingData {
    pub d: usize,
    pub xs: Vec<Matrix>,
    pub ys: Vec<Vec<Vec<Matrix>>>,
}

impl NestingData {
    pub fn collect(basis: &RowBasis<'_>, alphabet: &Alphabet, sample_len: usize) -> Result<Self> {
        let samples = enumerate_well_matched(alphabet, sample_len);
        let xs = samples.iter().map(|v| basis.transition(v.letters())).collect::<Result<Vec<_>>>()?;
        let ys = alphabet
            .base_letters()
            .map(|c| {
                alphabet
                    .base_letters()
                    .map(|r| samples.iter().map(|v| basis.transition(v.wrap(c, r).letters())).collect())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d: basis.dim(), xs, ys })
    }

    fn letters(&self) -> usize {
        self.ys.len()
    }

    fn scale(&self) -> f64 {
        self.ys.iter().flatten().flatten().fold(0.0, |m, y| m.max(y.max_abs()))
    }

    /// Largest entry of `sum_g C(c, g) X R(r, g) - Y` over all samples.
    pub fn residual(&self, calls: &[Vec<Matrix>], rets: &[Vec<Matrix>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, per_c) in self.ys.iter().enumerate() {
            for (r, ys) in per_c.iter().enumerate() {
                for (x, y) in self.xs.iter().zip(ys) {
                    let fit = calls[c]
                        .iter()
                        .zip(&rets[r])
                        .fold(Matrix::zeros(self.d, self.d), |acc, (cm, rm)| &acc + &(&(cm * x) * rm));
                    worst = worst.max(fit.max_abs_diff(y));
                }
            }
        }
        worst
    }

    /// The rearranged nesting operator, `G[(c, l, i), (r, j, m)]`, from the
    /// minimal-norm linear map `vec(T_v) -> vec(T_{<c v r>})`.
    pub fn joint_operator(&self) -> Result<Matrix> {
        let d = self.d;
        let d2 = d * d;
        let k = self.letters();
        let xmat = Matrix::from_rows(&self.xs.iter().map(Matrix::to_vec).collect::<Vec<_>>())?;
        let mut g = Matrix::zeros(k * d2, k * d2);
        for c in 0..k {
            for r in 0..k {
                let ymat = Matrix::from_rows(&self.ys[c][r].iter().map(Matrix::to_vec).collect::<Vec<_>>())?;
                // ymat = xmat * kt, with kt[(i, j), (l, m)]
                let kt = least_squares(&xmat, &ymat)?;
                for l in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            for m in 0..d {
                                g[(c * d2 + l * d + i, r * d2 + j * d + m)] = kt[(i * d + j, l * d + m)];
                            }
                        }
                    }
                }
            }
        }
        Ok(g)
    }
}

/// A fitted nesting map.
#[derive(Debug, Clone)]
pub struct NestingFit {
    /// `calls[c][g]`.
    pub calls: Vec<Vec<Matrix>>,
    /// `rets[r][g]`.
    pub rets: Vec<Vec<Matrix>>,
    pub residual: f64,
    /// Numerical rank of the joint operator.
    pub operator_rank: usize,
    /// True when alternating least squares produced the fit.
    pub alternating: bool,
}

impl NestingFit {
    pub fn gamma(&self) -> usize {
        self.calls.first().map_or(0, Vec::len)
    }
}

const ALS_ITERATIONS: usize = 300;
const ALS_RESTARTS: u64 = 6;

/// Fits the nesting map with as few stack symbols as possible, but at least
/// `min_gamma`.
///
/// Fails with [`Error::NotInSpan`] when no fit within
/// `rel_tol * (1 + max |Y|)` exists, even with as many stack symbols as the
/// joint operator has rank.
pub fn fit_nesting(data: &NestingData, min_gamma: usize, rank_tol: f64, rel_tol: f64) -> Result<NestingFit> {
    let d = data.d;
    let k = data.letters();
    let tol = rel_tol * (1.0 + data.scale());
    let g_op = data.joint_operator()?;
    let operator_rank = numerical_rank(&g_op, rank_tol);
    let full = svd_expansion(&g_op, operator_rank.max(1))?;
    let split = |pairs: &[(Vector, Vector)]| -> (Vec<Vec<Matrix>>, Vec<Vec<Matrix>>) {
        let d2 = d * d;
        let calls = (0..k)
            .map(|c| pairs.iter().map(|(p, _)| Matrix::from_fn(d, d, |l, i| p[c * d2 + l * d + i])).collect())
            .collect();
        let rets = (0..k)
            .map(|r| pairs.iter().map(|(_, q)| Matrix::from_fn(d, d, |j, m| q[r * d2 + j * d + m])).collect())
            .collect();
        (calls, rets)
    };
    let pad = |pairs: &mut Vec<(Vector, Vector)>, gamma: usize| {
        while pairs.len() < gamma {
            pairs.push((Vector::zeros(k * d * d), Vector::zeros(k * d * d)));
        }
        pairs.truncate(gamma);
    };

    let mut best_residual = f64::INFINITY;
    for gamma in min_gamma.max(1)..=operator_rank.max(min_gamma).max(1) {
        let mut init = full.clone();
        pad(&mut init, gamma);
        let (calls, rets) = split(&init);
        let residual = data.residual(&calls, &rets);
        if residual <= tol {
            return Ok(NestingFit { calls, rets, residual, operator_rank, alternating: false });
        }
        let mut starts = vec![(calls, rets)];
        let mut rng = ChaCha8Rng::seed_from_u64(gamma as u64);
        for _ in 0..ALS_RESTARTS {
            let mut draw = || Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..=1.0));
            let calls: Vec<Vec<Matrix>> = (0..k).map(|_| (0..gamma).map(|_| draw()).collect()).collect();
            let rets: Vec<Vec<Matrix>> = (0..k).map(|_| (0..gamma).map(|_| draw()).collect()).collect();
            starts.push((calls, rets));
        }
        for (calls, rets) in starts {
            let (calls, rets, residual) = alternate(data, calls, rets, tol)?;
            best_residual = best_residual.min(residual);
            if residual <= tol {
                return Ok(NestingFit { calls, rets, residual, operator_rank, alternating: true });
            }
        }
    }
    Err(Error::NotInSpan { context: "nesting map fit".into(), residual: best_residual })
}

type Factors = (Vec<Vec<Matrix>>, Vec<Vec<Matrix>>, f64);

fn alternate(data: &NestingData, mut calls: Vec<Vec<Matrix>>, mut rets: Vec<Vec<Matrix>>, tol: f64) -> Result<Factors> {
    let d = data.d;
    let gamma = calls[0].len();
    let mut residual = data.residual(&calls, &rets);
    for _ in 0..ALS_ITERATIONS {
        if residual <= tol {
            break;
        }
        for (c, call) in calls.iter_mut().enumerate() {
            // Y = [C(c, 1) .. C(c, g)] * vstack_g(X R(r, g))
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            for (ret, ys) in rets.iter().zip(&data.ys[c]) {
                for (x, y) in data.xs.iter().zip(ys) {
                    let stacked: Vec<Matrix> = ret.iter().map(|rm| x * rm).collect();
                    lhs.push(Matrix::vstack(&stacked)?);
                    rhs.push(y.clone());
                }
            }
            let a = Matrix::hstack(&lhs)?;
            let cs_t = least_squares(&a.transpose(), &Matrix::hstack(&rhs)?.transpose())?;
            *call = (0..gamma).map(|g| cs_t.row_block(g * d, d).transpose()).collect();
        }
        for (r, ret) in rets.iter_mut().enumerate() {
            // Y = hstack_g(C(c, g) X) * [R(r, 1); ..; R(r, g)]
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            for (call, per_c) in calls.iter().zip(&data.ys) {
                for (x, y) in data.xs.iter().zip(&per_c[r]) {
                    let row: Vec<Matrix> = call.iter().map(|cm| cm * x).collect();
                    lhs.push(Matrix::hstack(&row)?);
                    rhs.push(y.clone());
                }
            }
            let rs = least_squares(&Matrix::vstack(&lhs)?, &Matrix::vstack(&rhs)?)?;
            *ret = (0..gamma).map(|g| rs.row_block(g * d, d)).collect();
        }
        balance(&mut calls, &mut rets);
        residual = data.residual(&calls, &rets);
    }
    Ok((calls, rets, residual))
}

fn balance(calls: &mut [Vec<Matrix>], rets: &mut [Vec<Matrix>]) {
    let gamma = calls[0].len();
    for g in 0..gamma {
        let norm = |ms: &[Vec<Matrix>]| ms.iter().map(|m| m[g].frobenius_norm().powi(2)).sum::<f64>().sqrt();
        let (nc, nr) = (norm(calls), norm(rets));
        if nc > 0.0 && nr > 0.0 {
            let s = (nr / nc).sqrt();
            for m in calls.iter_mut() {
                m[g] = m[g].scaled(s);
            }
            for m in rets.iter_mut() {
                m[g] = m[g].scaled(1.0 / s);
            }
        }
    }
}
