//! The block SDP for G_F: R matrices, the feasibility checker, the explicit
//! feasible matrices B(1,l), B(2,l), B^(6), Gram assembly, SOS extraction and
//! rank bookkeeping.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::clifford::{build_system, dirac_family, iota, CliffordClass, CliffordSystem, ComplexRational};
use crate::exactmat::{
    assemble_blocks, block, kron, ldl_psd, parse_rational, rank, rat, MatrixError, PsdCertificate, Rational,
    RationalMatrix,
};
use crate::forms::{expand_quadratic_in_basis, MonomialVector, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdpError {
    #[error("index {index} out of range 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("B(2,l) needs an even l >= 4, got {0}")]
    OddDimension(usize),
    #[error("construction {construction} is not defined for l = {l}")]
    BadConstruction { construction: String, l: usize },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("B is not feasible for this R: {0}")]
    InfeasibleInput(String),
    #[error("negative pivot in B - RᵀR")]
    NegativePivot,
    #[error("extracted certificate does not reproduce G_F")]
    CertificateMismatch,
    #[error("m_+ = {m} is divisible by 4; a class tag is required")]
    AmbiguousClass { m: usize },
    #[error("pair ({m_plus}, {m_minus}) is not sos")]
    NotSos { m_plus: usize, m_minus: usize },
    #[error("bad multiplicity pair: {0}")]
    BadPair(String),
    #[error("certificate parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// τ_k(E): negate row k and column k (k is 1-based).
pub fn tau(k: usize, e: &RationalMatrix) -> Result<RationalMatrix, SdpError> {
    if k == 0 || k > e.rows() || k > e.cols() {
        return Err(SdpError::IndexOutOfRange { index: k, size: e.rows().min(e.cols()) });
    }
    let k = k - 1;
    Ok(RationalMatrix::from_fn(
        e.rows(),
        e.cols(),
        |i, j| {
            if (i == k) != (j == k) {
                -&e[(i, j)]
            } else {
                e[(i, j)].clone()
            }
        },
    ))
}

/// R_q for q = 1..l; row α of R_q is row q of E_{α-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RMatrix {
    m: usize,
    l: usize,
    blocks: Vec<RationalMatrix>,
}

impl RMatrix {
    pub fn from_blocks(blocks: Vec<RationalMatrix>) -> Self {
        let m = blocks.first().map_or(0, RationalMatrix::rows);
        let l = blocks.len();
        RMatrix { m, l, blocks }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// R_q with q 1-based.
    pub fn block(&self, q: usize) -> &RationalMatrix {
        &self.blocks[q - 1]
    }

    pub fn blocks(&self) -> &[RationalMatrix] {
        &self.blocks
    }

    /// R = (R_1, ..., R_l), an m × l² matrix.
    pub fn flat(&self) -> RationalMatrix {
        RationalMatrix::hstack(&self.blocks).expect("blocks share a row count")
    }

    /// Keeps the first m' rows of every R_q.
    pub fn restrict(&self, m_prime: usize) -> Result<RMatrix, SdpError> {
        if m_prime == 0 || m_prime >= self.m {
            return Err(SdpError::BadRange(format!("restriction needs 1 <= m' < {}, got {m_prime}", self.m)));
        }
        Ok(RMatrix {
            m: m_prime,
            l: self.l,
            blocks: self.blocks.iter().map(|b| b.submatrix(0, 0, m_prime, self.l)).collect(),
        })
    }
}

pub fn build_r(sys: &CliffordSystem) -> RMatrix {
    let (m, l) = (sys.m(), sys.l());
    let es: Vec<RationalMatrix> = (0..m).map(|a| sys.e_alpha(a)).collect();
    let blocks = (0..l).map(|q| RationalMatrix::from_fn(m, l, |a, c| es[a][(q, c)].clone())).collect();
    RMatrix { m, l, blocks }
}

pub fn restrict_r(r: &RMatrix, m_prime: usize) -> Result<RMatrix, SdpError> {
    r.restrict(m_prime)
}

/// Where a B matrix came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Construction {
    B1,
    B2,
    B6,
    External(String),
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::B1 => f.write_str("B1"),
            Construction::B2 => f.write_str("B2"),
            Construction::B6 => f.write_str("B6"),
            Construction::External(p) => write!(f, "file:{p}"),
        }
    }
}

impl FromStr for Construction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "B1" | "b1" => Ok(Construction::B1),
            "B2" | "b2" => Ok(Construction::B2),
            "B6" | "b6" => Ok(Construction::B6),
            _ => s
                .strip_prefix("file:")
                .map(|p| Construction::External(p.to_string()))
                .ok_or_else(|| format!("unknown construction {s:?} (expected B1, B2, B6 or file:PATH)")),
        }
    }
}

/// A B matrix that passed every check against some R.
#[derive(Clone, Debug)]
pub struct FeasibleB {
    l: usize,
    matrix: RationalMatrix,
    provenance: Construction,
    psd: PsdCertificate,
}

impl FeasibleB {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> &Construction {
        &self.provenance
    }

    pub fn psd_certificate(&self) -> &PsdCertificate {
        &self.psd
    }

    /// Block B_ik with 1-based indices.
    pub fn block(&self, i: usize, k: usize) -> RationalMatrix {
        block(&self.matrix, i - 1, k - 1, self.l)
    }

    pub fn rank(&self) -> usize {
        rank(&self.matrix)
    }
}

/// The constraint families checked by [`check_feasible`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Shape,
    IdentityDiagonal,
    Symmetry,
    Skew,
    Linear,
    Psd,
    DiagonalEntry,
    TransposedIndex,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Shape => "shape",
            Condition::IdentityDiagonal => "identity-diagonal",
            Condition::Symmetry => "symmetry",
            Condition::Skew => "skew",
            Condition::Linear => "linear",
            Condition::Psd => "psd",
            Condition::DiagonalEntry => "diagonal-entry",
            Condition::TransposedIndex => "transposed-index",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    pub location: String,
    pub lhs: String,
    pub rhs: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {} != {}", self.condition, self.location, self.lhs, self.rhs)
    }
}

/// Every violated condition, in checking order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    /// Witness u with uᵀBu < 0 when the PSD check failed.
    pub psd_witness: Option<(Vec<Rational>, Rational)>,
}

impl FeasibilityReport {
    pub fn conditions(&self) -> Vec<Condition> {
        let mut c: Vec<Condition> = self.violations.iter().map(|v| v.condition).collect();
        c.dedup();
        c
    }

    pub fn has(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

const MAX_PER_CONDITION: usize = 16;

fn row_string(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(" "))
}

/// Checks shape, B_ii = I, symmetry, skew blocks, R_iB_ij = R_j, PSD and the
/// entry relations b_{ii,kh} = δ_kh, b_{ij,kh} = -b_{ji,kh}.
pub fn check_feasible(
    b: &RationalMatrix,
    r: &RMatrix,
    provenance: Construction,
) -> Result<FeasibleB, FeasibilityReport> {
    let l = r.l();
    let mut violations = Vec::new();
    if !b.is_square() || b.rows() != l * l {
        violations.push(Violation {
            condition: Condition::Shape,
            location: "B".into(),
            lhs: format!("{}x{}", b.rows(), b.cols()),
            rhs: format!("{0}x{0}", l * l),
        });
        return Err(FeasibilityReport { violations, psd_witness: None });
    }
    let at = |i: usize, j: usize, k: usize, h: usize| &b[(i * l + j, k * l + h)];
    let push = |violations: &mut Vec<Violation>, v: Violation| {
        if violations.iter().filter(|w: &&Violation| w.condition == v.condition).count() < MAX_PER_CONDITION {
            violations.push(v);
        }
    };
    for i in 0..l {
        for j in 0..l {
            for h in 0..l {
                let want = rat((j == h) as i64);
                if *at(i, j, i, h) != want {
                    push(
                        &mut violations,
                        Violation {
                            condition: Condition::IdentityDiagonal,
                            location: format!("(B_{0}{0})_{1},{2}", i + 1, j + 1, h + 1),
                            lhs: at(i, j, i, h).to_string(),
                            rhs: want.to_string(),
                        },
                    );
                }
            }
        }
    }
    for a in 0..l * l {
        for c in a + 1..l * l {
            if b[(a, c)] != b[(c, a)] {
                push(
                    &mut violations,
                    Violation {
                        condition: Condition::Symmetry,
                        location: format!("b[{},{}] vs b[{},{}]", a + 1, c + 1, c + 1, a + 1),
                        lhs: b[(a, c)].to_string(),
                        rhs: b[(c, a)].to_string(),
                    },
                );
            }
        }
    }
    for i in 0..l {
        for k in 0..l {
            if i == k {
                continue;
            }
            for j in 0..l {
                for h in j..l {
                    if *at(i, j, k, h) != -at(i, h, k, j) {
                        push(
                            &mut violations,
                            Violation {
                                condition: Condition::Skew,
                                location: format!(
                                    "(B_{},{})_{},{} vs _{},{}",
                                    i + 1,
                                    k + 1,
                                    j + 1,
                                    h + 1,
                                    h + 1,
                                    j + 1
                                ),
                                lhs: at(i, j, k, h).to_string(),
                                rhs: (-at(i, h, k, j)).to_string(),
                            },
                        );
                    }
                }
            }
        }
    }
    let blocks: Vec<Vec<RationalMatrix>> = (0..l).map(|i| (0..l).map(|k| block(b, i, k, l)).collect()).collect();
    for (i, brow) in blocks.iter().enumerate() {
        for (j, bij) in brow.iter().enumerate() {
            let lhs = r.block(i + 1) * bij;
            let rhs = r.block(j + 1);
            if lhs != *rhs {
                let row = (0..r.m()).find(|&a| lhs.row(a) != rhs.row(a)).unwrap_or(0);
                push(
                    &mut violations,
                    Violation {
                        condition: Condition::Linear,
                        location: format!("row {} of R_{}B_{},{} = R_{}", row + 1, i + 1, i + 1, j + 1, j + 1),
                        lhs: row_string(lhs.row(row)),
                        rhs: row_string(rhs.row(row)),
                    },
                );
            }
        }
    }
    let mut psd_witness = None;
    let psd = if b.is_symmetric() {
        let cert = ldl_psd(b).expect("symmetry checked");
        if let PsdCertificate::NotPsd { witness, value } = &cert {
            push(
                &mut violations,
                Violation {
                    condition: Condition::Psd,
                    location: "uᵀBu for the attached witness".into(),
                    lhs: value.to_string(),
                    rhs: ">= 0".into(),
                },
            );
            psd_witness = Some((witness.clone(), value.clone()));
        }
        Some(cert)
    } else {
        push(
            &mut violations,
            Violation {
                condition: Condition::Psd,
                location: "B".into(),
                lhs: "asymmetric".into(),
                rhs: "symmetric".into(),
            },
        );
        None
    };
    for i in 0..l {
        for k in 0..l {
            for h in 0..l {
                let want = rat((k == h) as i64);
                if *at(i, i, k, h) != want {
                    push(
                        &mut violations,
                        Violation {
                            condition: Condition::DiagonalEntry,
                            location: format!("b_{0}{0},{1}{2}", i + 1, k + 1, h + 1),
                            lhs: at(i, i, k, h).to_string(),
                            rhs: want.to_string(),
                        },
                    );
                }
            }
        }
    }
    for i in 0..l {
        for j in 0..l {
            if i == j {
                continue;
            }
            for k in 0..l {
                for h in 0..l {
                    if *at(i, j, k, h) != -at(j, i, k, h) {
                        push(
                            &mut violations,
                            Violation {
                                condition: Condition::TransposedIndex,
                                location: format!(
                                    "b_{}{},{}{} vs b_{}{},{}{}",
                                    i + 1,
                                    j + 1,
                                    k + 1,
                                    h + 1,
                                    j + 1,
                                    i + 1,
                                    k + 1,
                                    h + 1
                                ),
                                lhs: at(i, j, k, h).to_string(),
                                rhs: (-at(j, i, k, h)).to_string(),
                            },
                        );
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(FeasibleB { l, matrix: b.clone(), provenance, psd: psd.expect("psd computed") })
    } else {
        Err(FeasibilityReport { violations, psd_witness })
    }
}

/// B(1,l): B_ii = I, B_ij = E_ij - E_ji.
pub fn b1_matrix(l: usize) -> RationalMatrix {
    let grid: Vec<Vec<RationalMatrix>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    if i == j {
                        RationalMatrix::identity(l)
                    } else {
                        &RationalMatrix::unit(l, i, j) - &RationalMatrix::unit(l, j, i)
                    }
                })
                .collect()
        })
        .collect();
    assemble_blocks(&grid).expect("uniform blocks")
}

/// B(2,l) on the index pairing (2s-1, 2s).
pub fn b2_matrix(l: usize) -> Result<RationalMatrix, SdpError> {
    if l < 4 || !l.is_multiple_of(2) {
        return Err(SdpError::OddDimension(l));
    }
    let k1 = l / 2;
    let j = iota(&ComplexRational::i());
    let i2 = RationalMatrix::identity(2);
    let e1 = -&kron(&RationalMatrix::identity(k1), &j);
    let u = |s: usize, h: usize| RationalMatrix::unit(k1, s, h);
    let mut grid = vec![vec![RationalMatrix::zeros(l, l); l]; l];
    for s in 0..k1 {
        for h in 0..k1 {
            let (o1, e1s, o2, e2s) = (2 * s, 2 * s + 1, 2 * h, 2 * h + 1);
            if s == h {
                let b = -&tau(2 * s + 2, &e1)?;
                grid[o1][o1] = RationalMatrix::identity(l);
                grid[e1s][e1s] = RationalMatrix::identity(l);
                grid[e1s][o1] = b.transpose();
                grid[o1][e1s] = b;
            } else {
                let anti = &u(s, h) - &u(h, s);
                let sym = &u(s, h) + &u(h, s);
                grid[o1][o2] = kron(&anti, &i2);
                grid[o1][e2s] = -&kron(&sym, &j);
                grid[e1s][o2] = kron(&sym, &j);
                grid[e1s][e2s] = kron(&anti, &i2);
            }
        }
    }
    Ok(assemble_blocks(&grid)?)
}

/// V^(6) = (I_8, τ_1(E_1), τ_5(E_6), τ_5(E_7), -τ_1(E_4), τ_1(E_5), -τ_1(E_2), -τ_1(E_3)).
pub fn v6_matrix() -> RationalMatrix {
    let e = dirac_family();
    let e6 = &e[1] * &e[3];
    let e7 = &e[2] * &e[3];
    let t = |k: usize, m: &RationalMatrix| tau(k, m).expect("k within 8");
    let parts = [
        RationalMatrix::identity(8),
        t(1, &e[0]),
        t(5, &e6),
        t(5, &e7),
        -&t(1, &e[3]),
        t(1, &e[4]),
        -&t(1, &e[1]),
        -&t(1, &e[2]),
    ];
    RationalMatrix::hstack(&parts).expect("equal heights")
}

/// B^(6) = (V^(6))ᵀ V^(6).
pub fn b6_matrix() -> RationalMatrix {
    let v = v6_matrix();
    &v.transpose() * &v
}

fn certified(b: RationalMatrix, sys: &CliffordSystem, c: Construction) -> Result<FeasibleB, SdpError> {
    check_feasible(&b, &build_r(sys), c).map_err(|rep| SdpError::InfeasibleInput(rep.to_string()))
}

pub fn build_b1(l: usize) -> Result<FeasibleB, SdpError> {
    if l < 3 {
        return Err(SdpError::BadConstruction { construction: "B1".into(), l });
    }
    let sys = build_system(1, l, CliffordClass::Unique).map_err(|e| SdpError::BadRange(e.to_string()))?;
    certified(b1_matrix(l), &sys, Construction::B1)
}

pub fn build_b2(l: usize) -> Result<FeasibleB, SdpError> {
    let b = b2_matrix(l)?;
    let sys = build_system(2, l, CliffordClass::Unique).map_err(|e| SdpError::BadRange(e.to_string()))?;
    certified(b, &sys, Construction::B2)
}

pub fn build_b6() -> Result<FeasibleB, SdpError> {
    let sys = build_system(6, 8, CliffordClass::Unique).map_err(|e| SdpError::BadRange(e.to_string()))?;
    certified(b6_matrix(), &sys, Construction::B6)
}

/// The raw matrix of a named construction at dimension l.
pub fn construction_matrix(c: &Construction, l: usize) -> Result<RationalMatrix, SdpError> {
    let bad = || SdpError::BadConstruction { construction: c.to_string(), l };
    match c {
        Construction::B1 if l >= 3 => Ok(b1_matrix(l)),
        Construction::B2 => b2_matrix(l).map_err(|_| bad()),
        Construction::B6 if l == 8 => Ok(b6_matrix()),
        _ => Err(bad()),
    }
}

/// Checks only R_iB_ij = R_j for all i, j.
pub fn satisfies_linear(b: &RationalMatrix, r: &RMatrix) -> bool {
    let l = r.l();
    b.rows() == l * l && (0..l).all(|i| (0..l).all(|j| &(r.block(i + 1) * &block(b, i, j, l)) == r.block(j + 1)))
}

/// B - RᵀR.
pub fn b_minus_rtr(b: &RationalMatrix, r: &RMatrix) -> RationalMatrix {
    let flat = r.flat();
    b - &(&flat.transpose() * &flat)
}

/// The n̄×n̄ Gram matrix Q over X with 4(B - RᵀR) on the mixed monomials.
pub fn gram_from_b(b: &FeasibleB, r: &RMatrix) -> Result<RationalMatrix, SdpError> {
    if b.l() != r.l() || !satisfies_linear(b.matrix(), r) {
        return Err(SdpError::InfeasibleInput("R_iB_ij = R_j fails".into()));
    }
    let l = r.l();
    let n = 2 * l;
    let x = MonomialVector::full(n);
    let xt = MonomialVector::mixed(l);
    let mc = b_minus_rtr(b.matrix(), r);
    let pos: Vec<usize> = xt.pairs().iter().map(|&(a, c)| x.index_of(a, c).expect("mixed pair in X")).collect();
    let mut q = RationalMatrix::zeros(x.len(), x.len());
    for a in 0..xt.len() {
        for c in 0..xt.len() {
            let v = &mc[(a, c)];
            if !v.is_zero() {
                q[(pos[a], pos[c])] = v * rat(4);
            }
        }
    }
    Ok(q)
}

/// Σ_j d_j (row_j · X̃)².
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosCertificate {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub rank: usize,
    pub items: Vec<(Rational, Vec<Rational>)>,
}

impl SosCertificate {
    pub fn basis(&self) -> MonomialVector {
        MonomialVector::mixed(self.l)
    }

    /// Σ d_j q_j² expanded.
    pub fn expand(&self) -> Polynomial {
        let basis = self.basis();
        let mut total = Polynomial::zero(self.n);
        for (d, row) in &self.items {
            let q = basis.linear_form(row);
            total = total.add(&q.square().scale(d));
        }
        total
    }
}

impl fmt::Display for SosCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        writeln!(f, "l {}", self.l)?;
        writeln!(f, "m {}", self.m)?;
        writeln!(f, "rank {}", self.rank)?;
        for (d, row) in &self.items {
            let toks: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{d} : {}", toks.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for SosCertificate {
    type Err = SdpError;
    fn from_str(s: &str) -> Result<Self, SdpError> {
        let mut header = [None::<usize>; 4];
        let mut items = Vec::new();
        for (ln, line) in s.lines().enumerate() {
            let perr = |message: String| SdpError::Parse { line: ln + 1, message };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((d, row)) = line.split_once(':') {
                let d = parse_rational(d.trim()).map_err(perr)?;
                let row: Vec<Rational> =
                    row.split_whitespace().map(parse_rational).collect::<Result<_, _>>().map_err(perr)?;
                items.push((d, row));
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let slot = match toks.first().copied() {
                Some("n") => 0,
                Some("l") => 1,
                Some("m") => 2,
                Some("rank") => 3,
                _ => return Err(perr(format!("unexpected line {line:?}"))),
            };
            if toks.len() != 2 {
                return Err(perr("header lines are `key value`".into()));
            }
            header[slot] = Some(toks[1].parse().map_err(|_| perr("bad header value".into()))?);
        }
        let get = |i: usize, name: &str| {
            header[i].ok_or(SdpError::Parse { line: 0, message: format!("missing header `{name}`") })
        };
        let (n, l, m, rank) = (get(0, "n")?, get(1, "l")?, get(2, "m")?, get(3, "rank")?);
        if n != 2 * l {
            return Err(SdpError::Parse { line: 0, message: format!("n = {n} but l = {l}") });
        }
        if let Some((k, _)) = items.iter().enumerate().find(|(_, (_, r))| r.len() != l * l) {
            return Err(SdpError::Parse {
                line: 0,
                message: format!("item {} does not have {} coefficients", k + 1, l * l),
            });
        }
        Ok(SosCertificate { n, l, m, rank, items })
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug)]
pub struct CertificateCheck {
    pub residual: Polynomial,
    pub claimed_rank: usize,
    pub computed_rank: usize,
    pub items: usize,
    pub weights_positive: bool,
}

impl CertificateCheck {
    pub fn rank_consistent(&self) -> bool {
        self.claimed_rank == self.computed_rank && self.computed_rank == self.items
    }

    pub fn passed(&self) -> bool {
        self.residual.is_zero() && self.rank_consistent() && self.weights_positive
    }
}

pub fn verify_certificate(cert: &SosCertificate, gf: &Polynomial) -> CertificateCheck {
    let residual = if gf.nvars() == cert.n { cert.expand().sub(gf) } else { gf.clone() };
    let rows: Vec<Rational> = cert.items.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let computed_rank =
        RationalMatrix::from_vec(cert.items.len(), cert.l * cert.l, rows).map(|m| rank(&m)).unwrap_or(0);
    CertificateCheck {
        residual,
        claimed_rank: cert.rank,
        computed_rank,
        items: cert.items.len(),
        weights_positive: cert.items.iter().all(|(d, _)| d.is_positive()),
    }
}

/// LDLᵀ of B - RᵀR turned into Σ 4d_j (L_jᵀX̃)².
pub fn extract_sos(b: &FeasibleB, r: &RMatrix, gf: &Polynomial) -> Result<SosCertificate, SdpError> {
    if b.l() != r.l() || !satisfies_linear(b.matrix(), r) {
        return Err(SdpError::InfeasibleInput("R_iB_ij = R_j fails".into()));
    }
    let mc = b_minus_rtr(b.matrix(), r);
    let PsdCertificate::Psd { l: lmat, d } = ldl_psd(&mc)? else {
        return Err(SdpError::NegativePivot);
    };
    let items: Vec<(Rational, Vec<Rational>)> =
        d.iter().enumerate().filter(|(_, dj)| dj.is_positive()).map(|(j, dj)| (dj * rat(4), lmat.column(j))).collect();
    let cert = SosCertificate { n: 2 * r.l(), l: r.l(), m: r.m(), rank: items.len(), items };
    if !verify_certificate(&cert, gf).passed() {
        return Err(SdpError::CertificateMismatch);
    }
    Ok(cert)
}

/// Xᵀ Q X expanded; convenience for identity checks.
pub fn gram_polynomial(q: &RationalMatrix, n: usize) -> Polynomial {
    expand_quadratic_in_basis(q, &MonomialVector::full(n)).expect("Q is n̄×n̄")
}

/// True when Q vanishes outside the mixed-monomial rows and columns.
pub fn gram_support_ok(q: &RationalMatrix, l: usize) -> bool {
    let x = MonomialVector::full(2 * l);
    let mixed: Vec<bool> = x.pairs().iter().map(|&(a, b)| a < l && b >= l).collect();
    (0..q.rows()).all(|a| (0..q.cols()).all(|c| (mixed[a] && mixed[c]) || q[(a, c)].is_zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SosVerdict {
    Sos,
    NonSos,
}

impl fmt::Display for SosVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SosVerdict::Sos => "sos",
            SosVerdict::NonSos => "non-sos",
        })
    }
}

fn class_for(m_plus: usize, class: Option<CliffordClass>) -> Result<CliffordClass, SdpError> {
    match class {
        None | Some(CliffordClass::Unique) if m_plus.is_multiple_of(4) => Err(SdpError::AmbiguousClass { m: m_plus }),
        Some(c) if m_plus.is_multiple_of(4) => Ok(c),
        Some(CliffordClass::Unique) | None => Ok(CliffordClass::Unique),
        Some(c) => Err(SdpError::BadPair(format!("class {c} only applies to m_+ divisible by 4"))),
    }
}

/// sos iff (1,k), (2,2k-1), (3,4), (4,3) indefinite, (5,2) or (6,1).
pub fn classify(m_plus: usize, m_minus: usize, class: Option<CliffordClass>) -> Result<SosVerdict, SdpError> {
    if m_plus == 0 || m_minus == 0 {
        return Err(SdpError::BadPair(format!("multiplicities must be positive, got ({m_plus}, {m_minus})")));
    }
    let class = class_for(m_plus, class)?;
    let sos = match (m_plus, m_minus) {
        (1, _) => true,
        (2, k) => k % 2 == 1,
        (3, 4) | (5, 2) | (6, 1) => true,
        (4, 3) => class == CliffordClass::Indefinite,
        _ => false,
    };
    Ok(if sos { SosVerdict::Sos } else { SosVerdict::NonSos })
}

/// Admissible SOS ranks for an sos pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankBounds {
    pub l: usize,
    pub lower: usize,
    pub upper: usize,
    pub lower_attainable: bool,
}

impl RankBounds {
    pub fn unique(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, r: usize) -> bool {
        self.lower <= r && r <= self.upper
    }
}

pub fn rank_bounds(m_plus: usize, m_minus: usize, class: Option<CliffordClass>) -> Result<RankBounds, SdpError> {
    if classify(m_plus, m_minus, class)? != SosVerdict::Sos {
        return Err(SdpError::NotSos { m_plus, m_minus });
    }
    let l = m_plus + m_minus + 1;
    let attainable = l == 4 || l == 8;
    Ok(match m_plus {
        1 => RankBounds { l, lower: l - 1, upper: l * (l - 1) / 2, lower_attainable: attainable },
        2 => RankBounds { l, lower: l - 2, upper: l * (l - 2) / 4, lower_attainable: attainable },
        m => RankBounds { l, lower: 8 - m, upper: 8 - m, lower_attainable: true },
    })
}

/// One constructed B tried against a system.
#[derive(Clone, Debug)]
pub struct SurveyEntry {
    pub construction: Construction,
    pub feasible: bool,
    pub rank_b: Option<usize>,
    pub certificate_rank: Option<usize>,
}

/// Tries B1, B2 and B6 (where defined at this l) against the system's R.
pub fn survey(sys: &CliffordSystem) -> Vec<SurveyEntry> {
    let r = build_r(sys);
    let l = sys.l();
    [Construction::B1, Construction::B2, Construction::B6]
        .into_iter()
        .filter_map(|c| {
            let b = construction_matrix(&c, l).ok()?;
            Some(match check_feasible(&b, &r, c.clone()) {
                Ok(fb) => {
                    let rb = fb.rank();
                    let rc = rank(&b_minus_rtr(fb.matrix(), &r));
                    SurveyEntry { construction: c, feasible: true, rank_b: Some(rb), certificate_rank: Some(rc) }
                }
                Err(_) => SurveyEntry { construction: c, feasible: false, rank_b: None, certificate_rank: None },
            })
        })
        .collect()
}

/// B_1iB_1j + B_1jB_1i = -2δ_ij I for 2 ≤ i, j ≤ l.
pub fn first_row_anticommutes(b: &RationalMatrix, l: usize) -> bool {
    let v: Vec<RationalMatrix> = (1..l).map(|k| block(b, 0, k, l)).collect();
    let id = RationalMatrix::identity(l);
    v.iter().enumerate().all(|(a, x)| {
        v.iter().enumerate().skip(a).all(|(c, y)| {
            let s = &(x * y) + &(y * x);
            if a == c {
                s == id.scale(&rat(-2))
            } else {
                s.is_zero()
            }
        })
    })
}

/// Is B - RᵀR positive semidefinite.
pub fn b_minus_rtr_psd(b: &RationalMatrix, r: &RMatrix) -> bool {
    ldl_psd(&b_minus_rtr(b, r)).map(|c| c.is_psd()).unwrap_or(false)
}

/// Is `m` an orthogonal matrix.
pub fn is_orthogonal(m: &RationalMatrix) -> bool {
    m.is_square() && (m * &m.transpose()) == RationalMatrix::identity(m.rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_system;
    use crate::forms::build_gf;

    fn sys(m: usize, l: usize) -> CliffordSystem {
        build_system(m, l, CliffordClass::Unique).unwrap()
    }

    #[test]
    fn tau_examples() {
        let i2 = RationalMatrix::identity(2);
        assert_eq!(tau(1, &i2).unwrap(), i2);
        let j = RationalMatrix::from_i64_rows(&[vec![0, -1], vec![1, 0]]);
        assert_eq!(tau(2, &j).unwrap(), RationalMatrix::from_i64_rows(&[vec![0, 1], vec![-1, 0]]));
        assert_eq!(tau(3, &j), Err(SdpError::IndexOutOfRange { index: 3, size: 2 }));
        assert_eq!(tau(1, &tau(1, &j).unwrap()).unwrap(), j);
    }

    #[test]
    fn r_for_m1() {
        let r = build_r(&sys(1, 4));
        assert_eq!(r.flat(), RationalMatrix::from_fn(1, 16, |_, c| rat((c % 5 == 0) as i64)));
    }

    #[test]
    fn r_for_m6() {
        let r = build_r(&sys(6, 8));
        let s3 = RationalMatrix::from_i64_rows(&[vec![1, 0], vec![0, -1]]);
        let i2 = RationalMatrix::identity(2);
        let z = RationalMatrix::zeros(2, 2);
        let r1 = assemble_rows(&[vec![&s3, &z, &z, &z], vec![&z, &z, &z, &i2], vec![&z, &z, &s3, &z]]);
        assert_eq!(r.block(1), &r1);
        // T = I_4 ⊗ iσ_2 and iσ_2 = -ι(i)
        let t = -&kron(&RationalMatrix::identity(4), &iota(&ComplexRational::i()));
        assert_eq!(r.block(2), &(&r1 * &t));
        for q in 1..=8 {
            assert_eq!(r.block(q) * &r.block(q).transpose(), RationalMatrix::identity(6));
        }
        let f = r.flat();
        assert_eq!(&f * &f.transpose(), RationalMatrix::identity(6).scale(&rat(8)));
    }

    fn assemble_rows(rows: &[Vec<&RationalMatrix>]) -> RationalMatrix {
        let strips: Vec<RationalMatrix> = rows
            .iter()
            .map(|r| RationalMatrix::hstack(&r.iter().map(|m| (*m).clone()).collect::<Vec<_>>()).unwrap())
            .collect();
        let cols = strips[0].cols();
        let mut out = RationalMatrix::zeros(strips.iter().map(RationalMatrix::rows).sum(), cols);
        let mut r0 = 0;
        for s in &strips {
            out.set_submatrix(r0, 0, s);
            r0 += s.rows();
        }
        out
    }

    #[test]
    fn b1_ranks_and_feasibility() {
        for (l, want) in [(3, 4), (4, 7), (8, 29)] {
            let b = build_b1(l).unwrap();
            assert_eq!(b.rank(), want);
        }
    }

    #[test]
    fn b2_ranks() {
        for (l, want) in [(4, 4), (6, 8), (8, 14)] {
            assert_eq!(build_b2(l).unwrap().rank(), want);
        }
        assert_eq!(b2_matrix(5).unwrap_err(), SdpError::OddDimension(5));
    }

    #[test]
    fn b6_rank_relations_and_feasibility() {
        let b = b6_matrix();
        assert_eq!(b.rank(), 8);
        let v: Vec<RationalMatrix> = (2..=8).map(|k| block(&b, 0, k - 1, 8)).collect();
        for (a, x) in v.iter().enumerate() {
            for (c, y) in v.iter().enumerate() {
                let s = &(x * y) + &(y * x);
                let want = RationalMatrix::identity(8).scale(&rat(if a == c { -2 } else { 0 }));
                assert_eq!(s, want, "blocks {} {}", a + 2, c + 2);
            }
        }
        let r6 = build_r(&sys(6, 8));
        for m in 3..=6 {
            let r = if m == 6 { r6.clone() } else { r6.restrict(m).unwrap() };
            assert!(check_feasible(&b, &r, Construction::B6).is_ok(), "m = {m}");
        }
        assert_eq!(build_b6().unwrap().rank(), 8);
        assert!(first_row_anticommutes(&b, 8));
        assert!(!first_row_anticommutes(&b1_matrix(4), 4));
    }

    #[test]
    fn mutated_b1_reports_skew() {
        let mut b = b1_matrix(3);
        // (B_12)_{1,2} = 1; flip it
        b[(0, 3 + 1)] = rat(-1);
        let rep = check_feasible(&b, &build_r(&sys(1, 3)), Construction::External("mutant".into())).unwrap_err();
        assert!(rep.has(Condition::Skew));
        assert!(rep.has(Condition::Symmetry));
    }

    #[test]
    fn gram_and_certificate_m1() {
        let s = sys(1, 3);
        let r = build_r(&s);
        let b = build_b1(3).unwrap();
        let gf = build_gf(&s);
        let q = gram_from_b(&b, &r).unwrap();
        assert_eq!(rank(&q), 3);
        assert!(gram_support_ok(&q, 3));
        assert_eq!(gram_polynomial(&q, 6), gf);
        let cert = extract_sos(&b, &r, &gf).unwrap();
        assert_eq!(cert.rank, 3);
        let text = cert.to_string();
        assert_eq!(text.parse::<SosCertificate>().unwrap(), cert);
    }

    #[test]
    fn certificate_mutations() {
        let s = sys(2, 4);
        let r = build_r(&s);
        let gf = build_gf(&s);
        let cert = extract_sos(&build_b2(4).unwrap(), &r, &gf).unwrap();
        assert_eq!(cert.rank, 2);
        let mut bad = cert.clone();
        bad.items[0].0 += rat(1);
        let chk = verify_certificate(&bad, &gf);
        assert!(!chk.passed() && !chk.residual.is_zero());
        let mut dup = cert.clone();
        dup.items.push(dup.items[0].clone());
        dup.rank += 1;
        let chk = verify_certificate(&dup, &gf);
        assert!(!chk.rank_consistent());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(2, 5, None).unwrap(), SosVerdict::Sos);
        assert_eq!(classify(4, 3, Some(CliffordClass::Definite)).unwrap(), SosVerdict::NonSos);
        assert_eq!(classify(4, 3, Some(CliffordClass::Indefinite)).unwrap(), SosVerdict::Sos);
        assert_eq!(classify(3, 8, None).unwrap(), SosVerdict::NonSos);
        assert_eq!(classify(4, 3, None), Err(SdpError::AmbiguousClass { m: 4 }));
        assert_eq!(classify(7, 8, None).unwrap(), SosVerdict::NonSos);
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(rank_bounds(1, 1, None).unwrap(), RankBounds { l: 3, lower: 2, upper: 3, lower_attainable: false });
        assert_eq!(rank_bounds(1, 2, None).unwrap(), RankBounds { l: 4, lower: 3, upper: 6, lower_attainable: true });
        assert_eq!(rank_bounds(2, 5, None).unwrap(), RankBounds { l: 8, lower: 6, upper: 12, lower_attainable: true });
        let b = rank_bounds(6, 1, None).unwrap();
        assert!(b.unique() && b.lower == 2);
        assert_eq!(rank_bounds(3, 8, None), Err(SdpError::NotSos { m_plus: 3, m_minus: 8 }));
    }

    #[test]
    fn restriction() {
        let r6 = build_r(&sys(6, 8));
        assert_eq!(r6.restrict(3).unwrap(), build_r(&sys(3, 8)));
        assert!(r6.restrict(6).is_err());
        assert!(r6.restrict(0).is_err());
    }

    #[test]
    fn construction_parse() {
        assert_eq!("B6".parse::<Construction>().unwrap(), Construction::B6);
        assert_eq!("file:x.txt".parse::<Construction>().unwrap(), Construction::External("x.txt".into()));
        assert!("B7".parse::<Construction>().is_err());
    }
}
