//! Sparse exact polynomials, the forms F and G_F, Gram expansions over the
//! monomial vectors X and X̃, and the Cartan–Münzner identities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::clifford::CliffordSystem;
use crate::exactmat::{frac, parse_rational, rat, Rational, RationalMatrix};

/// Default seed for nonnegativity sampling.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Exponent vector of fixed length.
pub type Monomial = Vec<u8>;

/// Polynomial with rational coefficients, no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable x_i (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, rat(1));
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u8]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds c·x^e in place.
    pub fn add_term(&mut self, e: Monomial, c: Rational) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Degree set; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max()
    }

    pub fn is_homogeneous(&self, d: usize) -> bool {
        self.terms.keys().all(|e| e.iter().map(|&x| x as usize).sum::<usize>() == d)
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "variable count");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Polynomial) -> Polynomial {
        self.add(&o.scale(&rat(-1)))
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "variable count");
        let mut acc: std::collections::HashMap<Monomial, Rational> = std::collections::HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Monomial = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Polynomial { nvars: self.nvars, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn square(&self) -> Polynomial {
        self.mul(self)
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * rat(e[i] as i64));
            }
        }
        out
    }

    pub fn gradient_norm_sq(&self) -> Polynomial {
        (0..self.nvars)
            .into_par_iter()
            .map(|i| self.derivative(i).square())
            .reduce(|| Self::zero(self.nvars), |a, b| a.add(&b))
    }

    pub fn laplacian(&self) -> Polynomial {
        (0..self.nvars).fold(Self::zero(self.nvars), |acc, i| acc.add(&self.derivative(i).derivative(i)))
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let maxdeg = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        let powers: Vec<Vec<Rational>> = x
            .iter()
            .map(|xi| {
                let mut p = vec![rat(1)];
                for k in 1..=maxdeg {
                    let next = &p[k - 1] * xi;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= &powers[i][k as usize];
                }
            }
            total += t;
        }
        total
    }
}

impl fmt::Display for Polynomial {
    /// `# nvars N`, then one `coeff : e_1 ... e_n` line per term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# nvars {}", self.nvars)?;
        for (e, c) in &self.terms {
            let exps: Vec<String> = e.iter().map(ToString::to_string).collect();
            writeln!(f, "{c} : {}", exps.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = FormError;
    fn from_str(s: &str) -> Result<Self, FormError> {
        let mut nvars: Option<usize> = None;
        let mut terms = Vec::new();
        for (ln, line) in s.lines().enumerate() {
            let perr = |message: String| FormError::Parse { line: ln + 1, message };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() == 2 && toks[0] == "nvars" {
                    nvars = Some(toks[1].parse().map_err(|_| perr("bad nvars".into()))?);
                }
                continue;
            }
            let (c, exps) = line.split_once(':').ok_or_else(|| perr("expected `coeff : exponents`".into()))?;
            let c = parse_rational(c.trim()).map_err(perr)?;
            let e: Monomial = exps
                .split_whitespace()
                .map(|t| t.parse::<u8>().map_err(|_| perr(format!("bad exponent {t:?}"))))
                .collect::<Result<_, _>>()?;
            let n = *nvars.get_or_insert(e.len());
            if e.len() != n {
                return Err(perr(format!("expected {n} exponents, found {}", e.len())));
            }
            terms.push((e, c));
        }
        let nvars =
            nvars.ok_or(FormError::Parse { line: 1, message: "empty polynomial needs a `# nvars N` header".into() })?;
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        Ok(p)
    }
}

/// |x|^{2k} in n variables.
pub fn norm_pow(n: usize, k: usize) -> Polynomial {
    let mut sq = Polynomial::zero(n);
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 2;
        sq.add_term(e, rat(1));
    }
    (0..k).fold(Polynomial::constant(n, rat(1)), |acc, _| acc.mul(&sq))
}

/// ⟨Px, x⟩ for a symmetric P.
pub fn quadratic_form(p: &RationalMatrix) -> Polynomial {
    let n = p.rows();
    let mut out = Polynomial::zero(n);
    for i in 0..n {
        for j in 0..n {
            let c = &p[(i, j)];
            if !c.is_zero() {
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[j] += 1;
                out.add_term(e, c.clone());
            }
        }
    }
    out
}

fn sum_of_squared_forms(sys: &CliffordSystem) -> Polynomial {
    sys.p().iter().fold(Polynomial::zero(sys.n()), |acc, p| acc.add(&quadratic_form(p).square()))
}

/// F = |x|⁴ - 2Σ⟨P_αx,x⟩².
pub fn build_f(sys: &CliffordSystem) -> Polynomial {
    norm_pow(sys.n(), 2).sub(&sum_of_squared_forms(sys).scale(&rat(2)))
}

/// G_F = |x|⁴ - Σ⟨P_αx,x⟩² = (F + |x|⁴)/2.
pub fn build_gf(sys: &CliffordSystem) -> Polynomial {
    norm_pow(sys.n(), 2).sub(&sum_of_squared_forms(sys))
}

/// Which degree-2 monomial vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// X: x_i² for all i, then x_ix_j for i < j in lexicographic order.
    Full,
    /// X̃: x_i·x_{l+j} for 1 ≤ i, j ≤ l, lexicographic in (i, j).
    Mixed,
}

/// Ordered list of degree-2 monomials, each stored as a pair of 0-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialVector {
    kind: BasisKind,
    nvars: usize,
    pairs: Vec<(usize, usize)>,
}

impl MonomialVector {
    pub fn full(n: usize) -> Self {
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        MonomialVector { kind: BasisKind::Full, nvars: n, pairs }
    }

    pub fn mixed(l: usize) -> Self {
        let pairs = (0..l).flat_map(|i| (0..l).map(move |j| (i, l + j))).collect();
        MonomialVector { kind: BasisKind::Mixed, nvars: 2 * l, pairs }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Position of x_a·x_b (0-based, any order) in the vector.
    pub fn index_of(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match self.kind {
            BasisKind::Full => {
                let n = self.nvars;
                if b >= n {
                    None
                } else if a == b {
                    Some(a)
                } else {
                    Some(n + a * n - a * (a + 1) / 2 + (b - a - 1))
                }
            }
            BasisKind::Mixed => {
                let l = self.nvars / 2;
                (a < l && b >= l && b < 2 * l).then(|| a * l + (b - l))
            }
        }
    }

    pub fn monomial(&self, k: usize) -> Monomial {
        let (a, b) = self.pairs[k];
        let mut e = vec![0; self.nvars];
        e[a] += 1;
        e[b] += 1;
        e
    }

    /// The linear form Σ c_k z_k as a polynomial.
    pub fn linear_form(&self, coeffs: &[Rational]) -> Polynomial {
        let mut p = Polynomial::zero(self.nvars);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(self.monomial(k), c.clone());
        }
        p
    }
}

/// zᵀ Q z expanded.
pub fn expand_quadratic_in_basis(q: &RationalMatrix, basis: &MonomialVector) -> Result<Polynomial, FormError> {
    if !q.is_square() || q.rows() != basis.len() {
        return Err(FormError::DimensionMismatch(format!(
            "{}x{} matrix over a basis of length {}",
            q.rows(),
            q.cols(),
            basis.len()
        )));
    }
    let mut out = Polynomial::zero(basis.nvars());
    for a in 0..q.rows() {
        let (i, j) = basis.pairs[a];
        for b in 0..q.cols() {
            let c = &q[(a, b)];
            if c.is_zero() {
                continue;
            }
            let (k, h) = basis.pairs[b];
            let mut e = vec![0u8; basis.nvars()];
            e[i] += 1;
            e[j] += 1;
            e[k] += 1;
            e[h] += 1;
            out.add_term(e, c.clone());
        }
    }
    Ok(out)
}

/// D (all-ones on the x_i² block) and P̃ = Σ p̃_α p̃_αᵀ in the X ordering.
pub fn build_d_and_ptilde(sys: &CliffordSystem) -> (RationalMatrix, RationalMatrix) {
    let n = sys.n();
    let basis = MonomialVector::full(n);
    let nbar = basis.len();
    let d = RationalMatrix::from_fn(nbar, nbar, |a, b| if a < n && b < n { rat(1) } else { rat(0) });
    let mut pt = RationalMatrix::zeros(nbar, nbar);
    for p in sys.p() {
        let v: Vec<Rational> =
            basis.pairs().iter().map(|&(i, j)| if i == j { p[(i, i)].clone() } else { &p[(i, j)] * rat(2) }).collect();
        let support: Vec<usize> = (0..nbar).filter(|&k| !v[k].is_zero()).collect();
        for &a in &support {
            for &b in &support {
                pt[(a, b)] += &v[a] * &v[b];
            }
        }
    }
    (d, pt)
}

/// Residuals of the two Cartan–Münzner identities for g = 4.
#[derive(Clone, Debug)]
pub struct CartanMunznerReport {
    pub m_plus: usize,
    pub m_minus: i64,
    /// |∇F|² - 16|x|⁶
    pub gradient_residual: Polynomial,
    /// ΔF - 8(m_- - m_+)|x|²
    pub laplacian_residual: Polynomial,
}

impl CartanMunznerReport {
    pub fn passed(&self) -> bool {
        self.gradient_residual.is_zero() && self.laplacian_residual.is_zero()
    }
}

pub fn check_cartan_munzner(sys: &CliffordSystem) -> CartanMunznerReport {
    let n = sys.n();
    let f = build_f(sys);
    let m_plus = sys.m();
    let m_minus = sys.m_minus();
    let gradient_residual = f.gradient_norm_sq().sub(&norm_pow(n, 3).scale(&rat(16)));
    let lap_coeff = rat(8 * (m_minus - m_plus as i64));
    let laplacian_residual = f.laplacian().sub(&norm_pow(n, 1).scale(&lap_coeff));
    CartanMunznerReport { m_plus, m_minus, gradient_residual, laplacian_residual }
}

/// Outcome of evaluating a form at pseudo-random rational points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleReport {
    pub seed: u64,
    pub points: usize,
    pub negatives: usize,
    pub min_value: Rational,
}

/// Evaluates `p` at `count` points with coordinates a/b, |a| ≤ 6, 1 ≤ b ≤ 3.
pub fn sample_nonnegativity(p: &Polynomial, count: usize, seed: u64) -> SampleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<Rational>> = (0..count)
        .map(|_| (0..p.nvars()).map(|_| frac(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect())
        .collect();
    let values: Vec<Rational> = points.par_iter().map(|x| p.eval(x)).collect();
    let negatives = values.iter().filter(|v| v.is_negative()).count();
    let min_value = values.into_iter().min().unwrap_or_else(Rational::zero);
    SampleReport { seed, points: count, negatives, min_value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_system, CliffordClass};

    fn unit(n: usize, i: usize) -> Vec<Rational> {
        (0..n).map(|k| rat((k == i) as i64)).collect()
    }

    #[test]
    fn f_and_gf_values() {
        let sys = build_system(2, 4, CliffordClass::Unique).unwrap();
        let n = sys.n();
        let f = build_f(&sys);
        let g = build_gf(&sys);
        assert!(f.is_homogeneous(4));
        assert_eq!(f.eval(&unit(n, 0)), rat(-1));
        assert_eq!(g.eval(&unit(n, 0)), rat(0));
        let mut x = unit(n, 0);
        x[sys.l()] = rat(1);
        assert_eq!(g.eval(&x), rat(0));
        let mut y = unit(n, 0);
        y[1] = rat(1);
        assert_eq!(g.eval(&y), rat(0));
        assert_eq!(f.add(&norm_pow(n, 2)), g.scale(&rat(2)));
    }

    #[test]
    fn basis_indexing() {
        let x = MonomialVector::full(4);
        assert_eq!(x.len(), 10);
        for (k, &(a, b)) in x.pairs().iter().enumerate() {
            assert_eq!(x.index_of(a, b), Some(k));
            assert_eq!(x.index_of(b, a), Some(k));
        }
        let xt = MonomialVector::mixed(3);
        assert_eq!(xt.len(), 9);
        for (k, &(a, b)) in xt.pairs().iter().enumerate() {
            assert_eq!(xt.index_of(a, b), Some(k));
        }
        assert_eq!(xt.index_of(0, 1), None);
    }

    #[test]
    fn expansion_examples() {
        let xt = MonomialVector::mixed(2);
        let p = expand_quadratic_in_basis(&RationalMatrix::identity(4), &xt).unwrap();
        let mut want = Polynomial::zero(4);
        for i in 0..2 {
            for j in 0..2 {
                let mut e = vec![0; 4];
                e[i] = 2;
                e[2 + j] = 2;
                want.add_term(e, rat(1));
            }
        }
        assert_eq!(p, want);
        assert!(expand_quadratic_in_basis(&RationalMatrix::identity(3), &xt).is_err());
    }

    #[test]
    fn d_and_ptilde() {
        let sys = build_system(1, 3, CliffordClass::Unique).unwrap();
        let (d, pt) = build_d_and_ptilde(&sys);
        let n = sys.n();
        let x = MonomialVector::full(n);
        assert_eq!(d.count_nonzero(), n * n);
        assert_eq!(expand_quadratic_in_basis(&d, &x).unwrap(), norm_pow(n, 2));
        let l = sys.l();
        assert_eq!(pt[(0, l)], rat(-1));
        assert_eq!(expand_quadratic_in_basis(&(&d - &pt), &x).unwrap(), build_gf(&sys));
    }

    #[test]
    fn norm_pow_multinomial() {
        // (x+y+z)² coefficients pattern on squares: x⁴ → 1, x²y² → 2
        let p = norm_pow(3, 2);
        assert_eq!(p.coeff(&[4, 0, 0]), rat(1));
        assert_eq!(p.coeff(&[2, 2, 0]), rat(2));
        assert_eq!(p.num_terms(), 6);
    }

    #[test]
    fn cartan_munzner_small() {
        let sys = build_system(1, 3, CliffordClass::Unique).unwrap();
        assert!(check_cartan_munzner(&sys).passed());
    }

    #[test]
    fn text_round_trip() {
        let sys = build_system(1, 3, CliffordClass::Unique).unwrap();
        let g = build_gf(&sys);
        let s = g.to_string();
        let back: Polynomial = s.parse().unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_string(), s);
        let z: Polynomial = "# nvars 3\n".parse().unwrap();
        assert!(z.is_zero());
        assert!("1 : 1 2\n2 : 1\n".parse::<Polynomial>().is_err());
    }
}
