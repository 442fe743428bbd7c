//! Dense matrices over the rationals.
//!
//! Everything here is exact: rank by fraction-free elimination, symmetric
//! LDLᵀ with PSD witnesses, Kronecker products and block (dis)assembly.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary precision rational scalar.
pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `p/q`.
pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symmetric (first asymmetry at ({row}, {col}))")]
    NotSymmetric { row: usize, col: usize },
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Row-major dense rational matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rat(rows[i][j]))
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(RationalMatrix { rows, cols, data })
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, d) in entries.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    /// The matrix unit E_{ij} (0-based) of the given size.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = Rational::one();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_skew(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == -&self[(j, i)]))
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    /// Copy of the `rows × cols` window whose top-left corner is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Principal submatrix on the given (0-based) indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])].clone())
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, m: &RationalMatrix) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)].clone();
            }
        }
    }

    pub fn checked_mul(&self, rhs: &RationalMatrix) -> Result<Self, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    fn zip_with(
        &self,
        rhs: &RationalMatrix,
        f: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<Self, MatrixError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect();
        Ok(RationalMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_add(&self, rhs: &RationalMatrix) -> Result<Self, MatrixError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &RationalMatrix) -> Result<Self, MatrixError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    /// uᵀ M u.
    pub fn quad_form(&self, u: &[Rational]) -> Rational {
        let mu = self.mul_vec(u);
        u.iter().zip(&mu).map(|(a, b)| a * b).sum()
    }

    /// Direct sum diag(A_1, ..., A_k).
    pub fn direct_sum(parts: &[RationalMatrix]) -> Self {
        let rows = parts.iter().map(|p| p.rows).sum();
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for p in parts {
            out.set_submatrix(r, c, p);
            r += p.rows;
            c += p.cols;
        }
        out
    }

    /// Horizontal concatenation.
    pub fn hstack(parts: &[RationalMatrix]) -> Result<Self, MatrixError> {
        let rows = parts.first().map_or(0, |p| p.rows);
        if parts.iter().any(|p| p.rows != rows) {
            return Err(MatrixError::DimensionMismatch("hstack row counts differ".into()));
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c = 0;
        for p in parts {
            out.set_submatrix(0, c, p);
            c += p.cols;
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.data.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;
    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_mul(rhs).expect("matrix product dimensions")
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;
    fn add(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_add(rhs).expect("matrix sum dimensions")
    }
}

impl Sub for &RationalMatrix {
    type Output = RationalMatrix;
    fn sub(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_sub(rhs).expect("matrix difference dimensions")
    }
}

impl Neg for &RationalMatrix {
    type Output = RationalMatrix;
    fn neg(self) -> RationalMatrix {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }
}

impl fmt::Display for RationalMatrix {
    /// Text format: `rows cols`, then one whitespace separated line per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Parses an integer or `p/q` token.
pub fn parse_rational(tok: &str) -> Result<Rational, String> {
    match tok.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| format!("bad numerator in {tok:?}"))?;
            let q: BigInt = q.parse().map_err(|_| format!("bad denominator in {tok:?}"))?;
            if q.is_zero() {
                return Err(format!("zero denominator in {tok:?}"));
            }
            Ok(Rational::new(p, q))
        }
        None => tok.parse::<BigInt>().map(Rational::from_integer).map_err(|_| format!("bad integer {tok:?}")),
    }
}

impl FromStr for RationalMatrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, MatrixError> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, message: String| MatrixError::Parse { line: line + 1, message };
        let (hline, header) = lines.next().ok_or_else(|| perr(0, "empty input".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(perr(hline, "header must be `rows cols`".into()));
        }
        let rows: usize = dims[0].parse().map_err(|_| perr(hline, "bad row count".into()))?;
        let cols: usize = dims[1].parse().map_err(|_| perr(hline, "bad column count".into()))?;
        let mut data = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (ln, line) in lines {
            if seen == rows {
                return Err(perr(ln, "more rows than declared".into()));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != cols {
                return Err(perr(ln, format!("expected {cols} entries, found {}", toks.len())));
            }
            for t in toks {
                data.push(parse_rational(t).map_err(|m| perr(ln, m))?);
            }
            seen += 1;
        }
        if seen != rows {
            return Err(perr(hline, format!("declared {rows} rows, found {seen}")));
        }
        Ok(RationalMatrix { rows, cols, data })
    }
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
    RationalMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        let x = &a[(i / b.rows, j / b.cols)];
        if x.is_zero() {
            Rational::zero()
        } else {
            x * &b[(i % b.rows, j % b.cols)]
        }
    })
}

/// Glues a square grid of equally sized square blocks.
pub fn assemble_blocks(grid: &[Vec<RationalMatrix>]) -> Result<RationalMatrix, MatrixError> {
    let g = grid.len();
    if g == 0 {
        return Ok(RationalMatrix::zeros(0, 0));
    }
    let s = grid[0][0].rows;
    for (i, row) in grid.iter().enumerate() {
        if row.len() != g {
            return Err(MatrixError::DimensionMismatch(format!("grid row {i} has {} blocks, expected {g}", row.len())));
        }
        for (k, b) in row.iter().enumerate() {
            if b.rows != s || b.cols != s {
                return Err(MatrixError::DimensionMismatch(format!(
                    "block ({i}, {k}) is {}x{}, expected {s}x{s}",
                    b.rows, b.cols
                )));
            }
        }
    }
    let mut out = RationalMatrix::zeros(g * s, g * s);
    for (i, row) in grid.iter().enumerate() {
        for (k, b) in row.iter().enumerate() {
            out.set_submatrix(i * s, k * s, b);
        }
    }
    Ok(out)
}

/// Inverse of [`assemble_blocks`]: cuts M into an l×l grid of l×l blocks.
pub fn split_blocks(m: &RationalMatrix, l: usize) -> Result<Vec<Vec<RationalMatrix>>, MatrixError> {
    if !m.is_square() || m.rows != l * l {
        return Err(MatrixError::DimensionMismatch(format!(
            "expected a {0}x{0} matrix, got {1}x{2}",
            l * l,
            m.rows,
            m.cols
        )));
    }
    Ok((0..l).map(|i| (0..l).map(|k| m.submatrix(i * l, k * l, l, l)).collect()).collect())
}

/// Block (i, k) (0-based) of side `s`.
pub fn block(m: &RationalMatrix, i: usize, k: usize, s: usize) -> RationalMatrix {
    m.submatrix(i * s, k * s, s, s)
}

/// Exact rank by Bareiss fraction-free elimination.
pub fn rank(m: &RationalMatrix) -> usize {
    // clear denominators row by row, then eliminate over the integers
    let mut a: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    let (rows, cols) = (m.rows, m.cols);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Outcome of [`ldl_psd`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdCertificate {
    /// M = L·diag(d)·Lᵀ with L unit lower triangular and every d ≥ 0.
    Psd { l: RationalMatrix, d: Vec<Rational> },
    /// uᵀMu = value < 0.
    NotPsd { witness: Vec<Rational>, value: Rational },
}

impl PsdCertificate {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdCertificate::Psd { .. })
    }

    /// Number of positive pivots; `None` for a NotPsd verdict.
    pub fn rank(&self) -> Option<usize> {
        match self {
            PsdCertificate::Psd { d, .. } => Some(d.iter().filter(|x| x.is_positive()).count()),
            PsdCertificate::NotPsd { .. } => None,
        }
    }

    /// Re-checks the certificate against `m` from scratch.
    pub fn verify(&self, m: &RationalMatrix) -> bool {
        match self {
            PsdCertificate::Psd { l, d } => {
                if d.iter().any(Signed::is_negative) || l.rows() != m.rows() {
                    return false;
                }
                let unit_lower =
                    (0..l.rows()).all(|i| l[(i, i)].is_one() && (i + 1..l.cols()).all(|j| l[(i, j)].is_zero()));
                unit_lower && &(l * &RationalMatrix::diagonal(d)) * &l.transpose() == *m
            }
            PsdCertificate::NotPsd { witness, value } => {
                witness.len() == m.rows() && value.is_negative() && m.quad_form(witness) == *value
            }
        }
    }
}

/// Symmetric elimination in natural pivot order; zero pivots with a zero
/// residual row are skipped, anything else yields a witness.
pub fn ldl_psd(m: &RationalMatrix) -> Result<PsdCertificate, MatrixError> {
    if let Some((row, col)) = m.first_asymmetry() {
        return Err(MatrixError::NotSymmetric { row, col });
    }
    let n = m.rows;
    let mut s = m.clone();
    let mut l = RationalMatrix::identity(n);
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let piv = s[(k, k)].clone();
        if piv.is_negative() {
            let mut y = vec![Rational::zero(); n];
            y[k] = Rational::one();
            return Ok(witness_from(m, &l, y));
        }
        if piv.is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !s[(k, j)].is_zero()) {
                // (t e_k + e_j)ᵀ S (t e_k + e_j) = 2 t s_kj + s_jj = -1
                let t = -(&s[(j, j)] + Rational::one()) / (&s[(k, j)] * rat(2));
                let mut y = vec![Rational::zero(); n];
                y[k] = t;
                y[j] = Rational::one();
                return Ok(witness_from(m, &l, y));
            }
            d.push(Rational::zero());
            continue;
        }
        for i in k + 1..n {
            if !s[(i, k)].is_zero() {
                l[(i, k)] = &s[(i, k)] / &piv;
            }
        }
        for i in k + 1..n {
            let lik = l[(i, k)].clone();
            if lik.is_zero() {
                continue;
            }
            for j in k + 1..=i {
                let skj = &s[(k, j)];
                if !skj.is_zero() {
                    let v = &s[(i, j)] - &lik * skj;
                    s[(i, j)] = v.clone();
                    s[(j, i)] = v;
                }
            }
        }
        d.push(piv);
    }
    Ok(PsdCertificate::Psd { l, d })
}

/// Maps a witness y for the current Schur complement back to M via u = L⁻ᵀy.
fn witness_from(m: &RationalMatrix, l: &RationalMatrix, y: Vec<Rational>) -> PsdCertificate {
    let n = y.len();
    let mut u = y;
    for i in (0..n).rev() {
        let mut acc = u[i].clone();
        for j in i + 1..n {
            if !l[(j, i)].is_zero() {
                acc -= &l[(j, i)] * &u[j];
            }
        }
        u[i] = acc;
    }
    let value = m.quad_form(&u);
    assert!(value.is_negative(), "witness construction produced a nonnegative value");
    PsdCertificate::NotPsd { witness: u, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j2() -> RationalMatrix {
        RationalMatrix::from_i64_rows(&[vec![0, -1], vec![1, 0]])
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RationalMatrix::identity(4)), 4);
        assert_eq!(rank(&RationalMatrix::from_fn(3, 3, |_, _| rat(1))), 1);
        assert_eq!(rank(&RationalMatrix::zeros(3, 5)), 0);
        let m = RationalMatrix::from_fn(3, 3, |i, j| frac((i * 3 + j) as i64 + 1, 2));
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn ldl_identity() {
        let c = ldl_psd(&RationalMatrix::identity(2)).unwrap();
        assert_eq!(c, PsdCertificate::Psd { l: RationalMatrix::identity(2), d: vec![rat(1), rat(1)] });
    }

    #[test]
    fn ldl_rank_one() {
        let m = RationalMatrix::from_i64_rows(&[vec![1, -1], vec![-1, 1]]);
        let c = ldl_psd(&m).unwrap();
        match &c {
            PsdCertificate::Psd { d, .. } => assert_eq!(d, &vec![rat(1), rat(0)]),
            _ => panic!("expected psd"),
        }
        assert_eq!(c.rank(), Some(1));
        assert!(c.verify(&m));
    }

    #[test]
    fn ldl_negative_diagonal() {
        let m = RationalMatrix::diagonal(&[rat(9), rat(9), rat(9), rat(-3)]);
        match ldl_psd(&m).unwrap() {
            PsdCertificate::NotPsd { witness, value } => {
                assert_eq!(witness, vec![rat(0), rat(0), rat(0), rat(1)]);
                assert_eq!(value, rat(-3));
            }
            _ => panic!("expected witness"),
        }
    }

    #[test]
    fn ldl_zero_pivot_witness() {
        let m = RationalMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]);
        let c = ldl_psd(&m).unwrap();
        assert!(!c.is_psd());
        assert!(c.verify(&m));
    }

    #[test]
    fn ldl_rejects_asymmetric() {
        assert!(matches!(ldl_psd(&j2()), Err(MatrixError::NotSymmetric { .. })));
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&RationalMatrix::identity(2), &RationalMatrix::identity(2)), RationalMatrix::identity(4));
        let k = kron(&j2(), &RationalMatrix::identity(2));
        let expect =
            RationalMatrix::from_i64_rows(&[vec![0, 0, -1, 0], vec![0, 0, 0, -1], vec![1, 0, 0, 0], vec![0, 1, 0, 0]]);
        assert_eq!(k, expect);
        let e = &RationalMatrix::unit(3, 0, 1) - &RationalMatrix::unit(3, 1, 0);
        let k = kron(&e, &RationalMatrix::identity(2));
        assert_eq!(k.count_nonzero(), 4);
        assert!(k.entries().iter().all(|x| x.is_zero() || x.abs().is_one()));
    }

    #[test]
    fn blocks() {
        let i3 = RationalMatrix::identity(3);
        assert_eq!(assemble_blocks(&[vec![i3.clone()]]).unwrap(), i3);
        let i2 = RationalMatrix::identity(2);
        let m = assemble_blocks(&[vec![i2.clone(), j2()], vec![-&j2(), i2.clone()]]).unwrap();
        assert_eq!(m.rows(), 4);
        assert!(m.is_symmetric());
        let g = split_blocks(&m, 2).unwrap();
        assert_eq!(g[0][1], j2());
        let bad = assemble_blocks(&[vec![i2.clone(), i3]]);
        assert!(matches!(bad, Err(MatrixError::DimensionMismatch(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = RationalMatrix::from_fn(2, 3, |i, j| frac(i as i64 - j as i64, 1 + j as i64));
        let s = m.to_string();
        assert_eq!(s, "2 3\n0 -1/2 -2/3\n1 0 -1/3\n");
        let back: RationalMatrix = s.parse().unwrap();
        assert_eq!(back, m);
        assert!("2 2\n1 2\n".parse::<RationalMatrix>().is_err());
        assert!("1 1\n1/0\n".parse::<RationalMatrix>().is_err());
    }
}
