//! Clifford systems on R^{2l}: the complex-to-real embedding ι, Pauli and
//! Dirac matrices, the explicit representations E_1..E_{m-1} and the
//! symmetric matrices P_0..P_m built from them.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::exactmat::{kron, rat, Rational, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliffordError {
    #[error("no supported Clifford system for (m, l) = ({m}, {l})")]
    UnsupportedPair { m: usize, l: usize },
    #[error("class {class} does not apply to m = {m}")]
    ClassMismatch { m: usize, class: CliffordClass },
    #[error("m = {m} has several geometric classes; pass definite or indefinite")]
    AmbiguousClass { m: usize },
    #[error("relation check failed: {0}")]
    Relation(String),
}

/// Geometric class tag. Only m ≡ 0 (mod 4) distinguishes definite and indefinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CliffordClass {
    Unique,
    Definite,
    Indefinite,
}

impl CliffordClass {
    /// Resolves an optional user tag for multiplicity m.
    pub fn resolve(m: usize, tag: Option<CliffordClass>) -> Result<CliffordClass, CliffordError> {
        match (m.is_multiple_of(4), tag) {
            (true, None) | (true, Some(CliffordClass::Unique)) => Err(CliffordError::AmbiguousClass { m }),
            (true, Some(c)) => Ok(c),
            (false, None) | (false, Some(CliffordClass::Unique)) => Ok(CliffordClass::Unique),
            (false, Some(c)) => Err(CliffordError::ClassMismatch { m, class: c }),
        }
    }
}

impl fmt::Display for CliffordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CliffordClass::Unique => "unique",
            CliffordClass::Definite => "definite",
            CliffordClass::Indefinite => "indefinite",
        })
    }
}

impl FromStr for CliffordClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "unique" => Ok(CliffordClass::Unique),
            "definite" | "d" => Ok(CliffordClass::Definite),
            "indefinite" | "i" => Ok(CliffordClass::Indefinite),
            other => Err(format!("unknown class {other:?} (expected unique, definite or indefinite)")),
        }
    }
}

/// a + bi with rational parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        ComplexRational { re, im }
    }

    pub fn int(re: i64, im: i64) -> Self {
        ComplexRational { re: rat(re), im: rat(im) }
    }

    pub fn zero() -> Self {
        Self::int(0, 0)
    }

    pub fn i() -> Self {
        Self::int(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexRational { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    pub fn conj(&self) -> Self {
        ComplexRational { re: self.re.clone(), im: -&self.im }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexRationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ComplexRational>,
}

impl ComplexRationalMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ComplexRational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexRationalMatrix { rows, cols, data }
    }

    /// From rows of (re, im) integer pairs.
    pub fn from_pairs(rows: &[Vec<(i64, i64)>]) -> Self {
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(rows.len(), c, |i, j| ComplexRational::int(rows[i][j].0, rows[i][j].1))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| ComplexRational::int((i == j) as i64, 0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexRational {
        &self.data[i * self.cols + j]
    }

    pub fn scale(&self, z: &ComplexRational) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).mul(z))
    }

    pub fn neg(&self) -> Self {
        self.scale(&ComplexRational::int(-1, 0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "complex product dimensions");
        Self::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(ComplexRational::zero(), |acc, k| acc.add(&self.get(i, k).mul(o.get(k, j))))
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).add(o.get(i, j)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn kron(&self, o: &Self) -> Self {
        Self::from_fn(self.rows * o.rows, self.cols * o.cols, |i, j| {
            self.get(i / o.rows, j / o.cols).mul(o.get(i % o.rows, j % o.cols))
        })
    }
}

/// ι(a+bi) = a·I_2 + b·[[0,-1],[1,0]].
pub fn iota(z: &ComplexRational) -> RationalMatrix {
    RationalMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => z.re.clone(),
        (0, 1) => -&z.im,
        _ => z.im.clone(),
    })
}

/// Blockwise ι: a k×k complex matrix becomes a 2k×2k real one.
pub fn iota_k(e: &ComplexRationalMatrix) -> RationalMatrix {
    let mut out = RationalMatrix::zeros(2 * e.rows, 2 * e.cols);
    for i in 0..e.rows {
        for j in 0..e.cols {
            out.set_submatrix(2 * i, 2 * j, &iota(e.get(i, j)));
        }
    }
    out
}

pub fn sigma1() -> ComplexRationalMatrix {
    ComplexRationalMatrix::from_pairs(&[vec![(0, 0), (1, 0)], vec![(1, 0), (0, 0)]])
}

pub fn sigma2() -> ComplexRationalMatrix {
    ComplexRationalMatrix::from_pairs(&[vec![(0, 0), (0, -1)], vec![(0, 1), (0, 0)]])
}

pub fn sigma3() -> ComplexRationalMatrix {
    ComplexRationalMatrix::from_pairs(&[vec![(1, 0), (0, 0)], vec![(0, 0), (-1, 0)]])
}

/// γ_0 = σ_3 ⊗ I_2, γ_j = iσ_2 ⊗ σ_j, γ_5 = iγ_0γ_1γ_2γ_3.
pub fn dirac() -> [ComplexRationalMatrix; 5] {
    let i = ComplexRational::i();
    let is2 = sigma2().scale(&i);
    let g0 = sigma3().kron(&ComplexRationalMatrix::identity(2));
    let g1 = is2.kron(&sigma1());
    let g2 = is2.kron(&sigma2());
    let g3 = is2.kron(&sigma3());
    let g5 = g0.mul(&g1).mul(&g2).mul(&g3).scale(&i);
    [g0, g1, g2, g3, g5]
}

/// The 2×2 complex representation -iσ_3, iσ_2, -iσ_1 made real (three 4×4 matrices).
pub fn e_tilde() -> [RationalMatrix; 3] {
    let i = ComplexRational::i();
    let mi = ComplexRational::int(0, -1);
    [iota_k(&sigma3().scale(&mi)), iota_k(&sigma2().scale(&i)), iota_k(&sigma1().scale(&mi))]
}

/// E_1..E_5 on R^8 from iγ_0, γ_1, γ_2, γ_3, iγ_5.
pub fn dirac_family() -> Vec<RationalMatrix> {
    let i = ComplexRational::i();
    let [g0, g1, g2, g3, g5] = dirac();
    vec![iota_k(&g0.scale(&i)), iota_k(&g1), iota_k(&g2), iota_k(&g3), iota_k(&g5.scale(&i))]
}

/// Minimal dimension of an irreducible real representation of C_{m-1}.
pub fn delta(m: usize) -> usize {
    assert!(m >= 1, "delta is defined for m >= 1");
    const BASE: [usize; 8] = [1, 2, 4, 4, 8, 8, 8, 8];
    let mut d = 1;
    let mut m = m;
    while m > 8 {
        m -= 8;
        d *= 16;
    }
    d * BASE[m - 1]
}

/// One entry of the OT-FKM multiplicity table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityEntry {
    pub m: usize,
    pub k: usize,
    pub l: usize,
    pub m_plus: usize,
    pub m_minus: usize,
    /// Number of geometrically inequivalent classes (greater than one only for m ≡ 0 mod 4).
    pub classes: usize,
}

impl MultiplicityEntry {
    pub fn multi_class(&self) -> bool {
        self.classes > 1
    }
}

/// All (m_+, m_-) = (m, kδ(m) - m - 1) with m ≤ max_m, k ≤ max_k and m_- > 0.
pub fn enumerate_multiplicities(max_m: usize, max_k: usize) -> Vec<MultiplicityEntry> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        for k in 1..=max_k {
            let l = k * delta(m);
            if l <= m + 1 {
                continue;
            }
            let classes = if m % 4 == 0 { k / 2 + 1 } else { 1 };
            out.push(MultiplicityEntry { m, k, l, m_plus: m, m_minus: l - m - 1, classes });
        }
    }
    out
}

/// Explicit E_1..E_{m-1} for a supported (m, l, class).
pub fn build_e(m: usize, l: usize, class: CliffordClass) -> Result<Vec<RationalMatrix>, CliffordError> {
    let unsupported = || CliffordError::UnsupportedPair { m, l };
    let class = CliffordClass::resolve(m, Some(class))?;
    let et = e_tilde();
    let copies = |mats: &[RationalMatrix], r: usize| -> Vec<RationalMatrix> {
        mats.iter().map(|e| RationalMatrix::direct_sum(&vec![e.clone(); r])).collect()
    };
    match m {
        1 if l >= 3 => Ok(Vec::new()),
        2 if l >= 4 && l.is_multiple_of(2) => {
            let j = iota(&ComplexRational::i());
            Ok(vec![-&kron(&RationalMatrix::identity(l / 2), &j)])
        }
        3 if l == 8 => Ok(dirac_family()[..2].to_vec()),
        3 if l.is_multiple_of(4) && l > 0 => Ok(copies(&et[..2], l / 4)),
        4 if l.is_multiple_of(4) && l > 0 => match class {
            CliffordClass::Definite => Ok(copies(&et, l / 4)),
            CliffordClass::Indefinite if l == 8 => Ok(dirac_family()[..3].to_vec()),
            CliffordClass::Indefinite if l >= 12 => {
                let r = l / 4;
                Ok(et
                    .iter()
                    .map(|e| {
                        let mut parts = vec![e.clone(); r];
                        parts[r - 1] = -e;
                        RationalMatrix::direct_sum(&parts)
                    })
                    .collect())
            }
            _ => Err(unsupported()),
        },
        5 | 6 if l == 8 => Ok(dirac_family()[..m - 1].to_vec()),
        _ => Err(unsupported()),
    }
}

/// Symmetric P_0..P_m on R^{2l} with P_αP_β + P_βP_α = 2δ_{αβ}I.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordSystem {
    m: usize,
    l: usize,
    class: CliffordClass,
    e: Vec<RationalMatrix>,
    p: Vec<RationalMatrix>,
}

impl CliffordSystem {
    /// Normal form P_0 = diag(I, -I), P_1 = [[0, I], [I, 0]], P_{α+1} = [[0, E_α], [-E_α, 0]].
    pub fn from_e(l: usize, class: CliffordClass, e: Vec<RationalMatrix>) -> Self {
        let id = RationalMatrix::identity(l);
        let z = RationalMatrix::zeros(l, l);
        let two_by_two = |a: &RationalMatrix, b: &RationalMatrix, c: &RationalMatrix, d: &RationalMatrix| {
            let mut out = RationalMatrix::zeros(2 * l, 2 * l);
            out.set_submatrix(0, 0, a);
            out.set_submatrix(0, l, b);
            out.set_submatrix(l, 0, c);
            out.set_submatrix(l, l, d);
            out
        };
        let mut p = vec![two_by_two(&id, &z, &z, &-&id), two_by_two(&z, &id, &id, &z)];
        for ea in &e {
            p.push(two_by_two(&z, ea, &-ea, &z));
        }
        CliffordSystem { m: e.len() + 1, l, class, e, p }
    }

    /// Wraps arbitrary matrices without checking anything; meant for mutation tests.
    pub fn from_raw(l: usize, class: CliffordClass, e: Vec<RationalMatrix>, p: Vec<RationalMatrix>) -> Self {
        CliffordSystem { m: p.len().saturating_sub(1), l, class, e, p }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of variables 2l.
    pub fn n(&self) -> usize {
        2 * self.l
    }

    pub fn class(&self) -> CliffordClass {
        self.class
    }

    /// E_1..E_{m-1}; E_0 = I_l is implicit.
    pub fn e(&self) -> &[RationalMatrix] {
        &self.e
    }

    /// E_α for 0 ≤ α ≤ m-1, with E_0 = I_l.
    pub fn e_alpha(&self, alpha: usize) -> RationalMatrix {
        if alpha == 0 {
            RationalMatrix::identity(self.l)
        } else {
            self.e[alpha - 1].clone()
        }
    }

    /// P_0..P_m.
    pub fn p(&self) -> &[RationalMatrix] {
        &self.p
    }

    /// m_- = l - m - 1 (may be zero or negative for degenerate pairs).
    pub fn m_minus(&self) -> i64 {
        self.l as i64 - self.m as i64 - 1
    }

    /// Checks the E and P relations exactly.
    pub fn verify_relations(&self) -> Result<(), CliffordError> {
        let l = self.l;
        let fail = |s: String| Err(CliffordError::Relation(s));
        let id = RationalMatrix::identity(l);
        for (a, ea) in self.e.iter().enumerate() {
            if !ea.is_skew() {
                return fail(format!("E_{} is not skew-symmetric", a + 1));
            }
            for (b, eb) in self.e.iter().enumerate().skip(a) {
                let ac = &(ea * eb) + &(eb * ea);
                let want = if a == b { id.scale(&rat(-2)) } else { RationalMatrix::zeros(l, l) };
                if ac != want {
                    return fail(format!(
                        "E_{}E_{} + E_{}E_{} != {}",
                        a + 1,
                        b + 1,
                        b + 1,
                        a + 1,
                        if a == b { "-2I" } else { "0" }
                    ));
                }
            }
        }
        let id2 = RationalMatrix::identity(2 * l);
        for (a, pa) in self.p.iter().enumerate() {
            if !pa.is_symmetric() {
                return fail(format!("P_{a} is not symmetric"));
            }
            for (b, pb) in self.p.iter().enumerate().skip(a) {
                let ac = &(pa * pb) + &(pb * pa);
                let want = if a == b { id2.scale(&rat(2)) } else { RationalMatrix::zeros(2 * l, 2 * l) };
                if ac != want {
                    return fail(format!("P_{a}P_{b} + P_{b}P_{a} != {}", if a == b { "2I" } else { "0" }));
                }
            }
        }
        Ok(())
    }

    /// The product P_0···P_m.
    pub fn p_product(&self) -> RationalMatrix {
        self.p.iter().skip(1).fold(self.p[0].clone(), |acc, p| &acc * p)
    }

    /// Some(±1) when P_0···P_m = ±I, None otherwise.
    pub fn product_sign(&self) -> Option<i32> {
        let prod = self.p_product();
        let id = RationalMatrix::identity(2 * self.l);
        if prod == id {
            Some(1)
        } else if prod == -&id {
            Some(-1)
        } else {
            None
        }
    }
}

/// Builds and checks the system for (m, l, class).
pub fn build_system(m: usize, l: usize, class: CliffordClass) -> Result<CliffordSystem, CliffordError> {
    let class = CliffordClass::resolve(m, Some(class))?;
    let e = build_e(m, l, class)?;
    let sys = CliffordSystem::from_e(l, class, e);
    sys.verify_relations()?;
    if m.is_multiple_of(4) {
        let definite = sys.product_sign().is_some();
        if definite != (class == CliffordClass::Definite) {
            return Err(CliffordError::Relation(format!(
                "representative for class {class} has the wrong product sign"
            )));
        }
    }
    Ok(sys)
}

/// Same as [`build_system`] with an optional tag, resolved against m.
pub fn build_system_tagged(m: usize, l: usize, tag: Option<CliffordClass>) -> Result<CliffordSystem, CliffordError> {
    build_system(m, l, CliffordClass::resolve(m, tag)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iota_values() {
        assert_eq!(iota(&ComplexRational::int(1, 0)), RationalMatrix::identity(2));
        assert_eq!(iota(&ComplexRational::i()), RationalMatrix::from_i64_rows(&[vec![0, -1], vec![1, 0]]));
        assert_eq!(iota(&ComplexRational::int(0, -1)), RationalMatrix::from_i64_rows(&[vec![0, 1], vec![-1, 0]]));
    }

    #[test]
    fn iota_k_examples() {
        let z = ComplexRationalMatrix::from_pairs(&[vec![(2, 3)]]);
        assert_eq!(iota_k(&z), iota(&ComplexRational::int(2, 3)));
        assert_eq!(iota_k(&ComplexRationalMatrix::identity(2)), RationalMatrix::identity(4));
        let m = iota_k(&sigma3().scale(&ComplexRational::i()));
        let expect = RationalMatrix::direct_sum(&[iota(&ComplexRational::i()), iota(&ComplexRational::int(0, -1))]);
        assert_eq!(m, expect);
    }

    #[test]
    fn gamma5_definition() {
        let [g0, g1, g2, g3, g5] = dirac();
        let i = ComplexRational::i();
        assert_eq!(g5, g0.mul(&g1).mul(&g2).mul(&g3).scale(&i));
        // γ_5 = σ_1 ⊗ I_2 with these conventions
        assert_eq!(g5, sigma1().kron(&ComplexRationalMatrix::identity(2)));
    }

    #[test]
    fn delta_table() {
        let got: Vec<usize> = (1..=8).map(delta).collect();
        assert_eq!(got, vec![1, 2, 4, 4, 8, 8, 8, 8]);
        assert_eq!(delta(9), 16);
        assert_eq!(delta(12), 64);
    }

    #[test]
    fn multiplicity_examples() {
        let t = enumerate_multiplicities(8, 5);
        let find = |m, k| t.iter().find(|e| e.m == m && e.k == k);
        assert_eq!(find(5, 1).map(|e| (e.m_plus, e.m_minus)), Some((5, 2)));
        assert_eq!(find(2, 2).map(|e| (e.m_plus, e.m_minus)), Some((2, 1)));
        assert!(find(1, 2).is_none());
        assert_eq!(find(4, 2).unwrap().classes, 2);
        assert_eq!(find(4, 4).unwrap().classes, 3);
        assert!(!find(3, 3).unwrap().multi_class());
    }

    #[test]
    fn e_lists() {
        assert!(build_e(1, 5, CliffordClass::Unique).unwrap().is_empty());
        let e = build_e(2, 4, CliffordClass::Unique).unwrap();
        let j = iota(&ComplexRational::i());
        assert_eq!(e[0], -&kron(&RationalMatrix::identity(2), &j));
        assert!(e[0].is_skew());
        assert_eq!(&e[0] * &e[0].transpose(), RationalMatrix::identity(4));
        assert_eq!(build_e(6, 8, CliffordClass::Unique).unwrap().len(), 5);
        assert!(matches!(build_e(5, 16, CliffordClass::Unique), Err(CliffordError::UnsupportedPair { .. })));
        assert!(matches!(build_e(2, 5, CliffordClass::Unique), Err(CliffordError::UnsupportedPair { .. })));
        assert!(matches!(build_e(4, 4, CliffordClass::Indefinite), Err(CliffordError::UnsupportedPair { .. })));
    }

    #[test]
    fn class_resolution() {
        assert!(matches!(CliffordClass::resolve(4, None), Err(CliffordError::AmbiguousClass { .. })));
        assert_eq!(CliffordClass::resolve(3, None), Ok(CliffordClass::Unique));
        assert!(CliffordClass::resolve(3, Some(CliffordClass::Definite)).is_err());
    }

    #[test]
    fn definite_product() {
        let sys = build_system(4, 8, CliffordClass::Definite).unwrap();
        assert_eq!(sys.p_product(), -&RationalMatrix::identity(16));
        let ind = build_system(4, 8, CliffordClass::Indefinite).unwrap();
        assert_eq!(ind.product_sign(), None);
        let ind12 = build_system(4, 12, CliffordClass::Indefinite).unwrap();
        assert_eq!(ind12.product_sign(), None);
    }

    #[test]
    fn systems_satisfy_relations() {
        for (m, l, c) in [
            (1, 3, CliffordClass::Unique),
            (2, 6, CliffordClass::Unique),
            (3, 4, CliffordClass::Unique),
            (3, 8, CliffordClass::Unique),
            (3, 12, CliffordClass::Unique),
            (4, 8, CliffordClass::Definite),
            (5, 8, CliffordClass::Unique),
            (6, 8, CliffordClass::Unique),
        ] {
            let sys = build_system(m, l, c).unwrap();
            assert_eq!(sys.p().len(), m + 1);
            assert!(sys.p().iter().all(|p| p.rows() == 2 * l));
        }
    }
}
