//! Floating-point feasibility probe.
//!
//! Cyclic Jacobi eigensolver, projections onto the PSD cone and onto the
//! affine constraint set of the block SDP, and a Dykstra loop between them.
//! Verdicts are advisory: the exact modules always take precedence.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::clifford::{build_system, CliffordClass};
use crate::exactmat::{Rational, RationalMatrix};
use crate::sdpcert::{build_r, check_feasible, Construction, RMatrix};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_STALL: f64 = 1e-3;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("matrix is not symmetric: |s[{row},{col}] - s[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix has a non-finite entry at ({row},{col})")]
    NotFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported pair: {0}")]
    UnsupportedPair(String),
}

/// Dense row-major binary64 matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FloatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FloatMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = *x;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ProbeError> {
        if data.len() != rows * cols {
            return Err(ProbeError::DimensionMismatch(format!("{} entries for {rows}x{cols}", data.len())));
        }
        let m = FloatMatrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rational(m: &RationalMatrix) -> Self {
        FloatMatrix { rows: m.rows(), cols: m.cols(), data: m.to_f64() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn check_finite(&self) -> Result<(), ProbeError> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(p) => Err(ProbeError::NotFinite { row: p / self.cols.max(1), col: p % self.cols.max(1) }),
            None => Ok(()),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &FloatMatrix) -> Result<FloatMatrix, ProbeError> {
        if self.cols != other.rows {
            return Err(ProbeError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FloatMatrix) -> FloatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        FloatMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &FloatMatrix) -> FloatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        FloatMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// ∞-norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn check_symmetric(&self, tol: f64) -> Result<(), ProbeError> {
        if self.rows != self.cols {
            return Err(ProbeError::DimensionMismatch(format!("{}x{} is not square", self.rows, self.cols)));
        }
        self.check_finite()?;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let gap = (self[(i, j)] - self[(j, i)]).abs();
                if gap > tol {
                    return Err(ProbeError::NotSymmetric { row: i, col: j, gap });
                }
            }
        }
        Ok(())
    }

    fn block(&self, i: usize, k: usize, s: usize) -> FloatMatrix {
        let mut b = Self::zeros(s, s);
        for r in 0..s {
            for c in 0..s {
                b[(r, c)] = self[(i * s + r, k * s + c)];
            }
        }
        b
    }
}

impl Index<(usize, usize)> for FloatMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for FloatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues with eigenvectors as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: FloatMatrix,
    pub sweeps: usize,
}

impl Eigen {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn reconstruct(&self) -> FloatMatrix {
        self.reconstruct_with(|x| x)
    }

    fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> FloatMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = FloatMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = w * v[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * v[(j, k)];
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &FloatMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.data[i * n + j] * a.data[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on `a` in place, accumulating rotations into `v`.
fn jacobi_sweeps(a: &mut FloatMatrix, v: &mut FloatMatrix, tol: f64) -> usize {
    let n = a.rows;
    let target = tol * a.frobenius().max(1.0);
    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(a) <= target {
            return sweep;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.data[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a.data[q * n + q] - a.data[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    a.data[k * n + p] = c * akp - s * akq;
                    a.data[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.data[p * n + k];
                    let aqk = a.data[q * n + k];
                    a.data[p * n + k] = c * apk - s * aqk;
                    a.data[q * n + k] = s * apk + c * aqk;
                }
                a.data[p * n + q] = 0.0;
                a.data[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = c * vkp - s * vkq;
                    v.data[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    MAX_SWEEPS
}

pub fn jacobi_eigen(s: &FloatMatrix, tol: f64) -> Result<Eigen, ProbeError> {
    s.check_symmetric(1e-12 * s.max_abs().max(1.0))?;
    let mut a = s.clone();
    let mut v = FloatMatrix::identity(s.rows);
    let sweeps = jacobi_sweeps(&mut a, &mut v, tol);
    let values = (0..s.rows).map(|i| a[(i, i)]).collect();
    Ok(Eigen { values, vectors: v, sweeps })
}

/// Jacobi started from a previous eigenbasis: diagonalises VᵀSV, then rotates back.
pub fn jacobi_eigen_warm(s: &FloatMatrix, basis: &FloatMatrix, tol: f64) -> Result<Eigen, ProbeError> {
    s.check_symmetric(1e-9 * s.max_abs().max(1.0))?;
    let bt = basis.transpose();
    let mut a = bt.mul(s)?.mul(basis)?;
    let n = a.rows;
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a.data[i * n + j] + a.data[j * n + i]);
            a.data[i * n + j] = m;
            a.data[j * n + i] = m;
        }
    }
    let mut w = FloatMatrix::identity(n);
    let sweeps = jacobi_sweeps(&mut a, &mut w, tol);
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(Eigen { values, vectors: basis.mul(&w)?, sweeps })
}

const EIGEN_TOL: f64 = 1e-13;

/// Clamps negative eigenvalues to zero.
pub fn project_psd(s: &FloatMatrix) -> Result<FloatMatrix, ProbeError> {
    Ok(jacobi_eigen(s, EIGEN_TOL)?.reconstruct_with(|x| x.max(0.0)))
}

fn skew_index(l: usize, a: usize, b: usize) -> usize {
    a * l - a * (a + 1) / 2 + (b - a - 1)
}

/// Closed-form projection for one block pair i < k onto
/// {S skew : R_iS = R_k, R_kS = −R_i}, in skew coordinates.
#[derive(Clone, Debug)]
struct PairProjector {
    /// I − A⁺A, d×d.
    kernel: FloatMatrix,
    /// A⁺b.
    offset: Vec<f64>,
    consistent: bool,
}

/// Projection onto the pattern set intersected with the equation set.
#[derive(Clone, Debug)]
pub struct AffineProjector {
    l: usize,
    pairs: Vec<PairProjector>,
    r: Vec<FloatMatrix>,
}

fn pseudo_inverse_gram(a: &FloatMatrix) -> Result<FloatMatrix, ProbeError> {
    let g = a.transpose().mul(a)?;
    let e = jacobi_eigen(&g, 1e-15)?;
    let top = e.values.iter().copied().fold(0.0, f64::max);
    let cut = 1e-10 * top.max(1.0);
    Ok(e.reconstruct_with(|x| if x > cut { 1.0 / x } else { 0.0 }))
}

impl AffineProjector {
    pub fn new(r: &RMatrix) -> Result<Self, ProbeError> {
        let (m, l) = (r.m(), r.l());
        let rq: Vec<FloatMatrix> = (1..=l).map(|q| FloatMatrix::from_rational(r.block(q))).collect();
        let d = l * (l - 1) / 2;
        let mut pairs = Vec::with_capacity(d);
        for i in 0..l {
            for k in i + 1..l {
                // rows: (α, c) of R_iS − R_k, then of R_kS + R_i
                let mut a = FloatMatrix::zeros(2 * m * l, d);
                let mut b = vec![0.0; 2 * m * l];
                for (half, (left, rhs, sign)) in [(&rq[i], &rq[k], 1.0), (&rq[k], &rq[i], -1.0)].into_iter().enumerate()
                {
                    for al in 0..m {
                        for c in 0..l {
                            let row = half * m * l + al * l + c;
                            b[row] = sign * rhs[(al, c)];
                            for t in 0..l {
                                let coef = left[(al, t)];
                                if coef == 0.0 || t == c {
                                    continue;
                                }
                                if t < c {
                                    a[(row, skew_index(l, t, c))] += coef;
                                } else {
                                    a[(row, skew_index(l, c, t))] -= coef;
                                }
                            }
                        }
                    }
                }
                let pinv = pseudo_inverse_gram(&a)?.mul(&a.transpose())?;
                let bm = FloatMatrix { rows: b.len(), cols: 1, data: b.clone() };
                let offset = pinv.mul(&bm)?.data;
                let mut kernel = FloatMatrix::identity(d).sub(&pinv.mul(&a)?);
                // symmetric by construction; clean rounding
                for x in 0..d {
                    for y in x + 1..d {
                        let s = 0.5 * (kernel[(x, y)] + kernel[(y, x)]);
                        kernel[(x, y)] = s;
                        kernel[(y, x)] = s;
                    }
                }
                let om = FloatMatrix { rows: d, cols: 1, data: offset.clone() };
                let resid = a.mul(&om)?.sub(&bm).max_abs();
                pairs.push(PairProjector { kernel, offset, consistent: resid < 1e-9 });
            }
        }
        Ok(AffineProjector { l, pairs, r: rq })
    }

    /// Whether every pair's equations have an exact solution.
    pub fn consistent(&self) -> bool {
        self.pairs.iter().all(|p| p.consistent)
    }

    pub fn project(&self, b: &FloatMatrix) -> Result<FloatMatrix, ProbeError> {
        let l = self.l;
        let n = l * l;
        if b.rows != n || b.cols != n {
            return Err(ProbeError::DimensionMismatch(format!("expected {n}x{n}, got {}x{}", b.rows, b.cols)));
        }
        b.check_finite()?;
        let d = l * (l - 1) / 2;
        let mut out = FloatMatrix::identity(n);
        let mut idx = 0;
        for i in 0..l {
            for k in i + 1..l {
                let p = &self.pairs[idx];
                idx += 1;
                let mut t = vec![0.0; d];
                for x in 0..l {
                    for y in x + 1..l {
                        // skew part of (B_ik + B_kiᵀ)/2
                        let txy = 0.5 * (b[(i * l + x, k * l + y)] + b[(k * l + y, i * l + x)]);
                        let tyx = 0.5 * (b[(i * l + y, k * l + x)] + b[(k * l + x, i * l + y)]);
                        t[skew_index(l, x, y)] = 0.5 * (txy - tyx);
                    }
                }
                for x in 0..l {
                    for y in x + 1..l {
                        let e = skew_index(l, x, y);
                        let row = &p.kernel.data[e * d..(e + 1) * d];
                        let s = p.offset[e] + row.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>();
                        out[(i * l + x, k * l + y)] = s;
                        out[(i * l + y, k * l + x)] = -s;
                        out[(k * l + y, i * l + x)] = s;
                        out[(k * l + x, i * l + y)] = -s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// (pattern, equation) max absolute violations.
    pub fn residuals(&self, b: &FloatMatrix) -> (f64, f64) {
        let l = self.l;
        let n = l * l;
        let mut pattern: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let (i, j, k, h) = (r / l, r % l, c / l, c % l);
                pattern = pattern.max((b[(r, c)] - b[(c, r)]).abs());
                if i == k {
                    let want = if j == h { 1.0 } else { 0.0 };
                    pattern = pattern.max((b[(r, c)] - want).abs());
                } else {
                    pattern = pattern.max((b[(r, c)] + b[(i * l + h, k * l + j)]).abs());
                }
            }
        }
        let mut equation: f64 = 0.0;
        for i in 0..l {
            for j in 0..l {
                let prod = self.r[i].mul(&b.block(i, j, l)).expect("m x l times l x l");
                equation = equation.max(prod.sub(&self.r[j]).max_abs());
            }
        }
        (pattern, equation)
    }
}

pub fn project_affine(b: &FloatMatrix, r: &RMatrix) -> Result<FloatMatrix, ProbeError> {
    AffineProjector::new(r)?.project(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Stalled,
    BudgetExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::Stalled => "stalled",
            Verdict::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub stall_threshold: f64,
    pub attempt_rounding: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            stall_threshold: DEFAULT_STALL,
            attempt_rounding: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    pub pattern: f64,
    pub equation: f64,
    pub cone: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.pattern.max(self.equation).max(self.cone)
    }
}

/// Outcome of rounding the converged float matrix and checking it exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingAttempt {
    pub denominator: u32,
    pub feasible: bool,
    pub rank: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub m: usize,
    pub l: usize,
    pub class: CliffordClass,
    pub config: ProbeConfig,
    pub iterations: usize,
    pub residuals: Residuals,
    pub verdict: Verdict,
    pub affine_consistent: bool,
    /// (iteration, residuals) every 100 iterations.
    pub history: Vec<(usize, Residuals)>,
    pub solution: Option<FloatMatrix>,
    pub rounding: Option<RoundingAttempt>,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "probe (advisory; exact results take precedence)")?;
        writeln!(f, "pair: m={} l={} class={}", self.m, self.l, self.class)?;
        writeln!(
            f,
            "config: max_iters={} tol={:e} stall_threshold={:e}",
            self.config.max_iters, self.config.tol, self.config.stall_threshold
        )?;
        writeln!(f, "affine set consistent: {}", self.affine_consistent)?;
        writeln!(f, "history:")?;
        for (it, r) in &self.history {
            writeln!(
                f,
                "  iter {:>6}  pattern {:.3e}  equation {:.3e}  cone {:.3e}",
                it, r.pattern, r.equation, r.cone
            )?;
        }
        writeln!(f, "iterations: {}", self.iterations)?;
        writeln!(
            f,
            "residuals: pattern {:.3e} equation {:.3e} cone {:.3e}",
            self.residuals.pattern, self.residuals.equation, self.residuals.cone
        )?;
        writeln!(f, "verdict: {}", self.verdict)?;
        if self.verdict == Verdict::Stalled {
            writeln!(f, "note: stalling is empirical only and is not a proof of infeasibility")?;
        }
        match &self.rounding {
            Some(RoundingAttempt { denominator, feasible: true, rank }) => {
                writeln!(
                    f,
                    "rounding: denominator {denominator} gives an exactly feasible B of rank {}",
                    rank.unwrap_or(0)
                )
            }
            Some(RoundingAttempt { .. }) => writeln!(f, "rounding: no small-denominator rounding is exactly feasible"),
            None => writeln!(f, "rounding: not attempted"),
        }
    }
}

fn round_to(b: &FloatMatrix, den: u32) -> RationalMatrix {
    let n = b.rows;
    let mut out = RationalMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * (b[(i, j)] + b[(j, i)]);
            let num = (v * den as f64).round().to_i64().unwrap_or(0);
            let q = Rational::new(BigInt::from(num), BigInt::from(den));
            out[(i, j)] = q.clone();
            out[(j, i)] = q;
        }
    }
    out
}

/// Tries denominators 1, 2, 4, 8 and checks each rounding exactly.
pub fn attempt_rounding(b: &FloatMatrix, r: &RMatrix) -> RoundingAttempt {
    for den in [1u32, 2, 4, 8] {
        let cand = round_to(b, den);
        if let Ok(fb) = check_feasible(&cand, r, Construction::External(format!("probe-rounded/{den}"))) {
            return RoundingAttempt { denominator: den, feasible: true, rank: Some(fb.rank()) };
        }
    }
    RoundingAttempt { denominator: 8, feasible: false, rank: None }
}

/// Dykstra iteration between the affine set and the PSD cone, started from I.
pub fn feasibility_probe_r(r: &RMatrix, config: ProbeConfig) -> Result<(ProbeReport, AffineProjector), ProbeError> {
    let l = r.l();
    let n = l * l;
    let aff = AffineProjector::new(r)?;
    let mut x = aff.project(&FloatMatrix::identity(n))?;
    let mut p = FloatMatrix::zeros(n, n);
    let mut basis = FloatMatrix::identity(n);
    let mut history = Vec::new();
    let mut residuals = Residuals { pattern: f64::INFINITY, equation: f64::INFINITY, cone: f64::INFINITY };
    let mut iterations = 0;
    let mut verdict = None;
    for it in 1..=config.max_iters {
        iterations = it;
        let z = x.add(&p);
        let e = jacobi_eigen_warm(&z, &basis, EIGEN_TOL)?;
        let y = e.reconstruct_with(|v| v.max(0.0));
        basis = e.vectors;
        p = z.sub(&y);
        x = aff.project(&y)?;
        if it % 10 == 0 || it == config.max_iters {
            let (pattern, equation) = aff.residuals(&y);
            let ex = jacobi_eigen_warm(&x, &basis, EIGEN_TOL)?;
            residuals = Residuals { pattern, equation, cone: (-ex.min_value()).max(0.0) };
            if it % 100 == 0 {
                history.push((it, residuals));
            }
            if residuals.max() < config.tol {
                verdict = Some(Verdict::Converged);
                break;
            }
        }
    }
    let verdict = verdict.unwrap_or(if residuals.max() > config.stall_threshold {
        Verdict::Stalled
    } else {
        Verdict::BudgetExhausted
    });
    let converged = verdict == Verdict::Converged;
    let rounding = (converged && config.attempt_rounding).then(|| attempt_rounding(&x, r));
    let report = ProbeReport {
        m: r.m(),
        l,
        class: CliffordClass::Unique,
        config,
        iterations,
        residuals,
        verdict,
        affine_consistent: aff.consistent(),
        history,
        solution: converged.then_some(x),
        rounding,
    };
    Ok((report, aff))
}

pub fn feasibility_probe(
    m: usize,
    l: usize,
    class: CliffordClass,
    config: ProbeConfig,
) -> Result<ProbeReport, ProbeError> {
    let sys = build_system(m, l, class).map_err(|e| ProbeError::UnsupportedPair(e.to_string()))?;
    let (mut report, _) = feasibility_probe_r(&build_r(&sys), config)?;
    report.class = class;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdpcert::{b1_matrix, b2_matrix, b6_matrix};

    fn r_of(m: usize, l: usize) -> RMatrix {
        build_r(&build_system(m, l, CliffordClass::Unique).unwrap())
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn eigen_examples() {
        let e = jacobi_eigen(&FloatMatrix::identity(4), 1e-14).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        let e = jacobi_eigen(&FloatMatrix::diagonal(&[9.0, 9.0, 9.0, -3.0]), 1e-14).unwrap();
        assert_eq!(e.min_value(), -3.0);
        let b6 = FloatMatrix::from_rational(&b6_matrix());
        let e = jacobi_eigen(&b6, 1e-14).unwrap();
        let vals = sorted(e.values.clone());
        assert!(vals[..56].iter().all(|x| x.abs() < 1e-8));
        assert!(vals[56..].iter().all(|x| (x - 8.0).abs() < 1e-8));
        let err = e.reconstruct().sub(&b6).max_abs();
        assert!(err <= 1e-9 * b6.norm_inf(), "{err}");
    }

    #[test]
    fn eigen_rejects_bad_input() {
        let mut m = FloatMatrix::identity(2);
        m[(0, 1)] = 1.0;
        assert!(matches!(jacobi_eigen(&m, 1e-12), Err(ProbeError::NotSymmetric { .. })));
        m[(1, 0)] = f64::NAN;
        assert!(matches!(FloatMatrix::from_vec(2, 2, m.data.clone()), Err(ProbeError::NotFinite { .. })));
    }

    #[test]
    fn warm_start_matches_cold() {
        let b = FloatMatrix::from_rational(&b1_matrix(4));
        let cold = jacobi_eigen(&b, 1e-13).unwrap();
        let warm = jacobi_eigen_warm(&b, &cold.vectors, 1e-13).unwrap();
        assert!(warm.sweeps <= 1);
        assert!(warm.reconstruct().sub(&b).max_abs() < 1e-10);
    }

    #[test]
    fn psd_projection() {
        let p = project_psd(&FloatMatrix::diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(p, FloatMatrix::diagonal(&[1.0, 0.0]));
        let mut s = FloatMatrix::zeros(3, 3);
        for (i, v) in [1.0, -2.0, 0.5, 3.0, 0.25, -1.0, 0.0, 2.0, 1.5].into_iter().enumerate() {
            s.data[i] = v;
        }
        let s = s.add(&s.transpose());
        let p = project_psd(&s).unwrap();
        assert!(jacobi_eigen(&p, 1e-14).unwrap().min_value() >= -1e-10);
    }

    #[test]
    fn affine_projection() {
        let r = r_of(1, 3);
        let a = AffineProjector::new(&r).unwrap();
        assert!(a.consistent());
        let z = a.project(&FloatMatrix::zeros(9, 9)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for h in 0..3 {
                    assert_eq!(z[(i * 3 + j, i * 3 + h)], if j == h { 1.0 } else { 0.0 });
                }
            }
        }
        let (pat, eq) = a.residuals(&z);
        assert!(pat < 1e-12 && eq < 1e-12);
        let twice = a.project(&z).unwrap();
        assert!(twice.sub(&z).max_abs() < 1e-12);
    }

    #[test]
    fn constructions_are_fixed_points() {
        let cases = [
            (b1_matrix(3), r_of(1, 3)),
            (b1_matrix(5), r_of(1, 5)),
            (b2_matrix(4).unwrap(), r_of(2, 4)),
            (b2_matrix(6).unwrap(), r_of(2, 6)),
            (b6_matrix(), r_of(6, 8)),
        ];
        for (b, r) in cases {
            let f = FloatMatrix::from_rational(&b);
            let aff = project_affine(&f, &r).unwrap();
            assert!(aff.sub(&f).max_abs() < 1e-12);
            let psd = project_psd(&f).unwrap();
            assert!(psd.sub(&f).max_abs() < 1e-12, "{}", psd.sub(&f).max_abs());
        }
    }

    #[test]
    fn probe_m1_l3_converges() {
        let rep = feasibility_probe(1, 3, CliffordClass::Unique, ProbeConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Converged, "{rep}");
        assert!(rep.residuals.max() < 1e-7);
        assert!(rep.solution.is_some());
    }

    #[test]
    fn unsupported_pair() {
        assert!(matches!(
            feasibility_probe(4, 4, CliffordClass::Indefinite, ProbeConfig::default()),
            Err(ProbeError::UnsupportedPair(_))
        ));
    }
}
