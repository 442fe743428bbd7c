//! Forced-entry propagation for partially known B matrices.
//!
//! A derivation is a script of rule applications (seeding from the linear
//! relations, the τ-block rule, block products) over a [`PartialB`] whose
//! entries are either unknown or exact rationals. Symmetry of B and skewness
//! of the off-diagonal blocks are applied eagerly after every assignment.
//! Block and entry indices in [`Step`] are 1-based.

#![allow(clippy::result_large_err)]

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::clifford::{build_system, CliffordClass};
use crate::exactmat::{rat, Rational, RationalMatrix};
use crate::sdpcert::{b6_matrix, build_r, check_feasible, is_orthogonal, tau, Construction, FeasibleB, RMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeductionError {
    #[error("step {step}: hypothesis not established: {detail}")]
    HypothesisNotEstablished { step: usize, detail: String },
    #[error("step {step}: entries not yet known: {detail}")]
    UnknownEntries { step: usize, detail: String },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("derivation finished without the expected contradiction")]
    NoContradiction,
    #[error("derivation hit an unexpected contradiction: {0}")]
    UnexpectedContradiction(ContradictionReport),
    #[error("derived matrix is incomplete or infeasible: {0}")]
    Incomplete(String),
}

/// Position of b_{ij,kh} as ((i, j), (k, h)), all 1-based.
pub type EntryIndex = ((usize, usize), (usize, usize));

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContradictionReport {
    /// B_ik = B_ij·B_jk is forced but is not skew-symmetric.
    SkewViolation { i: usize, j: usize, k: usize, block: RationalMatrix },
    /// uᵀSu < 0 on a fully known principal submatrix S.
    IndefiniteWitness { indices: Vec<(usize, usize)>, submatrix: RationalMatrix, u: Vec<Rational>, value: Rational },
    /// Two rules force different values on one entry.
    EntryConflict { entry: EntryIndex, existing: Rational, attempted: Rational },
}

impl ContradictionReport {
    pub fn kind(&self) -> &'static str {
        match self {
            ContradictionReport::SkewViolation { .. } => "SkewViolation",
            ContradictionReport::IndefiniteWitness { .. } => "IndefiniteWitness",
            ContradictionReport::EntryConflict { .. } => "EntryConflict",
        }
    }

    /// Re-checks the witness data on its own.
    pub fn reverify(&self) -> bool {
        match self {
            ContradictionReport::SkewViolation { block, .. } => !(block + &block.transpose()).is_zero(),
            ContradictionReport::IndefiniteWitness { submatrix, u, value, .. } => {
                value.is_negative() && submatrix.quad_form(u) == *value
            }
            ContradictionReport::EntryConflict { existing, attempted, .. } => existing != attempted,
        }
    }

    /// Re-checks the witness against the known entries of `p`.
    pub fn reverify_against(&self, p: &PartialB) -> bool {
        self.reverify()
            && match self {
                ContradictionReport::SkewViolation { i, j, k, block } => {
                    matches!((p.known_block(*i, *j), p.known_block(*j, *k)), (Some(a), Some(b)) if &(&a * &b) == block)
                }
                ContradictionReport::IndefiniteWitness { indices, submatrix, .. } => {
                    p.principal(indices).as_ref() == Some(submatrix)
                }
                ContradictionReport::EntryConflict { entry, existing, .. } => {
                    let ((i, j), (k, h)) = *entry;
                    p.get(i, j, k, h) == Some(existing)
                }
            }
    }
}

impl fmt::Display for ContradictionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContradictionReport::SkewViolation { i, j, k, block } => {
                write!(f, "SkewViolation: B_{i},{k} = B_{i},{j}·B_{j},{k} is not skew-symmetric\n{block}")
            }
            ContradictionReport::IndefiniteWitness { indices, u, value, .. } => {
                let idx: Vec<String> = indices.iter().map(|(a, b)| format!("({a},{b})")).collect();
                let us: Vec<String> = u.iter().map(ToString::to_string).collect();
                write!(f, "IndefiniteWitness: indices {} u = ({}) value {value}", idx.join(" "), us.join(" "))
            }
            ContradictionReport::EntryConflict { entry: ((i, j), (k, h)), existing, attempted } => {
                write!(f, "EntryConflict: b_{i}{j},{k}{h} is {existing}, rule forces {attempted}")
            }
        }
    }
}

/// B with entry-granular partial knowledge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialB {
    l: usize,
    entries: Vec<Option<Rational>>,
}

impl PartialB {
    /// Structural start: B_ii = I and zero diagonals in off-diagonal blocks.
    pub fn new(l: usize) -> Self {
        let n = l * l;
        let mut p = PartialB { l, entries: vec![None; n * n] };
        for i in 0..l {
            for j in 0..l {
                for h in 0..l {
                    p.entries[(i * l + j) * n + i * l + h] = Some(rat((j == h) as i64));
                }
            }
            for k in 0..l {
                if k != i {
                    for j in 0..l {
                        p.entries[(i * l + j) * n + k * l + j] = Some(Rational::zero());
                    }
                }
            }
        }
        p
    }

    pub fn l(&self) -> usize {
        self.l
    }

    fn slot(&self, i: usize, j: usize, k: usize, h: usize) -> usize {
        let l = self.l;
        ((i - 1) * l + j - 1) * l * l + (k - 1) * l + h - 1
    }

    /// b_{ij,kh} = (B_ik)_{jh}, 1-based.
    pub fn get(&self, i: usize, j: usize, k: usize, h: usize) -> Option<&Rational> {
        self.entries[self.slot(i, j, k, h)].as_ref()
    }

    pub fn known_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// Sets b_{ij,kh} and its symmetry/skew orbit; returns how many entries became known.
    pub fn set(&mut self, i: usize, j: usize, k: usize, h: usize, v: Rational) -> Result<usize, ContradictionReport> {
        let mut orbit = vec![((i, j, k, h), v.clone()), ((k, h, i, j), v.clone())];
        if i != k {
            orbit.push(((i, h, k, j), -&v));
            orbit.push(((k, j, i, h), -&v));
        }
        for ((a, b, c, d), w) in &orbit {
            if let Some(existing) = self.get(*a, *b, *c, *d) {
                if existing != w {
                    return Err(ContradictionReport::EntryConflict {
                        entry: ((*a, *b), (*c, *d)),
                        existing: existing.clone(),
                        attempted: w.clone(),
                    });
                }
            }
        }
        let mut fresh = 0;
        for ((a, b, c, d), w) in orbit {
            let s = self.slot(a, b, c, d);
            if self.entries[s].is_none() {
                self.entries[s] = Some(w);
                fresh += 1;
            }
        }
        Ok(fresh)
    }

    pub fn row(&self, i: usize, k: usize, j: usize) -> Vec<Option<Rational>> {
        (1..=self.l).map(|h| self.get(i, j, k, h).cloned()).collect()
    }

    /// B_ik if all its entries are known.
    pub fn known_block(&self, i: usize, k: usize) -> Option<RationalMatrix> {
        let l = self.l;
        let mut out = RationalMatrix::zeros(l, l);
        for j in 1..=l {
            for h in 1..=l {
                out[(j - 1, h - 1)] = self.get(i, j, k, h)?.clone();
            }
        }
        Some(out)
    }

    /// Principal submatrix over (block, row) flat positions, if fully known.
    pub fn principal(&self, idx: &[(usize, usize)]) -> Option<RationalMatrix> {
        let n = idx.len();
        let mut out = RationalMatrix::zeros(n, n);
        for (a, &(i, j)) in idx.iter().enumerate() {
            for (c, &(k, h)) in idx.iter().enumerate() {
                out[(a, c)] = self.get(i, j, k, h)?.clone();
            }
        }
        Some(out)
    }

    /// The full matrix when every entry is known.
    pub fn to_matrix(&self) -> Option<RationalMatrix> {
        let n = self.l * self.l;
        let data: Option<Vec<Rational>> = self.entries.iter().cloned().collect();
        RationalMatrix::from_vec(n, n, data?).ok()
    }
}

/// One rule invocation of a derivation script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// For every R_i row α equal to s·v_q: row q of B_ij = s·(row α of R_j).
    Seed,
    /// If v_jB_ik = sign·w_αR_k for all k then B_ij = -sign·τ_i(E_{α-1}).
    BTau { i: usize, j: usize, alpha: usize, sign: i8 },
    /// B_ik = B_ij·B_jk for an orthogonal B_ij.
    Bb { i: usize, j: usize, k: usize },
    /// Entry (p, q) of B_ik = B_ij·B_jk.
    BbEntry { i: usize, j: usize, k: usize, p: usize, q: usize },
    /// Checkpoint: B_ik must be fully determined by now.
    KnownBlock { i: usize, k: usize },
    /// uᵀSu over the principal submatrix on the given (block, row) positions.
    Probe { indices: Vec<(usize, usize)>, u: Vec<Rational> },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Seed => write!(f, "seed from R_iB_ij = R_j"),
            Step::BTau { i, j, alpha, sign } => {
                let s = if *sign > 0 { "+" } else { "-" };
                write!(f, "tau-block B_{i},{j} from v_{j}B_{i},k = {s}w_{alpha}R_k")
            }
            Step::Bb { i, j, k } => write!(f, "product B_{i},{k} = B_{i},{j}B_{j},{k}"),
            Step::BbEntry { i, j, k, p, q } => {
                write!(f, "product entry (B_{i},{k})_{p},{q} = row {p} of B_{i},{j} · column {q} of B_{j},{k}")
            }
            Step::KnownBlock { i, k } => write!(f, "checkpoint B_{i},{k} determined"),
            Step::Probe { indices, .. } => write!(f, "psd probe on {} positions", indices.len()),
        }
    }
}

/// A logged rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub index: usize,
    pub step: Step,
    pub justification: String,
    pub new_entries: usize,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>3}. {} [{}] (+{} entries)", self.index, self.step, self.justification, self.new_entries)
    }
}

/// Result of running a script.
#[derive(Clone, Debug)]
pub struct DerivationOutcome {
    pub state: PartialB,
    pub log: Vec<LogEntry>,
    pub contradiction: Option<ContradictionReport>,
}

/// Script runner bound to one R.
#[derive(Clone, Debug)]
pub struct Derivation {
    r: RMatrix,
    /// E_0..E_{m-1} read back from R.
    es: Vec<RationalMatrix>,
    state: PartialB,
    log: Vec<LogEntry>,
}

enum Flow {
    Continue(usize, String),
    Stop(ContradictionReport),
}

impl Derivation {
    pub fn new(r: RMatrix) -> Self {
        let (m, l) = (r.m(), r.l());
        let es = (0..m).map(|a| RationalMatrix::from_fn(l, l, |q, c| r.block(q + 1)[(a, c)].clone())).collect();
        Derivation { state: PartialB::new(l), r, es, log: Vec::new() }
    }

    pub fn state(&self) -> &PartialB {
        &self.state
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    fn check_block_index(&self, step: usize, idx: &[usize]) -> Result<(), DeductionError> {
        let l = self.r.l();
        match idx.iter().find(|&&x| x == 0 || x > l) {
            Some(x) => {
                Err(DeductionError::HypothesisNotEstablished { step, detail: format!("index {x} outside 1..={l}") })
            }
            None => Ok(()),
        }
    }

    fn assign_block(&mut self, i: usize, k: usize, m: &RationalMatrix) -> Result<usize, ContradictionReport> {
        let l = self.r.l();
        let mut fresh = 0;
        for j in 1..=l {
            for h in 1..=l {
                fresh += self.state.set(i, j, k, h, m[(j - 1, h - 1)].clone())?;
            }
        }
        Ok(fresh)
    }

    fn seed(&mut self) -> Result<Flow, DeductionError> {
        let (m, l) = (self.r.m(), self.r.l());
        let mut fresh = 0;
        let mut rows = 0;
        for i in 1..=l {
            for a in 0..m {
                let row = self.r.block(i).row(a);
                let nz: Vec<usize> = (0..l).filter(|&c| !row[c].is_zero()).collect();
                let [q] = nz[..] else { continue };
                let s = row[q].clone();
                if s != rat(1) && s != rat(-1) {
                    continue;
                }
                rows += 1;
                for j in 1..=l {
                    let target = self.r.block(j).row(a).to_vec();
                    for h in 1..=l {
                        match self.state.set(i, q + 1, j, h, &s * &target[h - 1]) {
                            Ok(n) => fresh += n,
                            Err(c) => return Ok(Flow::Stop(c)),
                        }
                    }
                }
            }
        }
        Ok(Flow::Continue(fresh, format!("{rows} signed basis rows of R_i used")))
    }

    fn btau(&mut self, step: usize, i: usize, j: usize, alpha: usize, sign: i8) -> Result<Flow, DeductionError> {
        self.check_block_index(step, &[i, j])?;
        let (m, l) = (self.r.m(), self.r.l());
        if i == j || alpha < 2 || alpha > m || (sign != 1 && sign != -1) {
            return Err(DeductionError::HypothesisNotEstablished {
                step,
                detail: format!("tau-block rule needs i != j, 2 <= alpha <= {m}, sign = ±1"),
            });
        }
        let s = rat(sign as i64);
        for k in 1..=l {
            let want: Vec<Rational> = self.r.block(k).row(alpha - 1).iter().map(|x| &s * x).collect();
            let have = self.state.row(i, k, j);
            for h in 0..l {
                match &have[h] {
                    None => {
                        return Err(DeductionError::HypothesisNotEstablished {
                            step,
                            detail: format!("entry ({j},{}) of B_{i},{k} unknown", h + 1),
                        })
                    }
                    Some(v) if *v != want[h] => {
                        return Err(DeductionError::HypothesisNotEstablished {
                            step,
                            detail: format!("row {j} of B_{i},{k} differs from the required row at column {}", h + 1),
                        })
                    }
                    _ => {}
                }
            }
        }
        let block = tau(i, &self.es[alpha - 1]).map_err(|e| DeductionError::BadRange(e.to_string()))?.scale(&-s);
        Ok(match self.assign_block(i, j, &block) {
            Ok(n) => Flow::Continue(n, format!("row {j} of B_{i},k checked for all k")),
            Err(c) => Flow::Stop(c),
        })
    }

    fn orthogonal_block(&self, step: usize, i: usize, j: usize) -> Result<RationalMatrix, DeductionError> {
        let b = self.state.known_block(i, j).ok_or_else(|| DeductionError::HypothesisNotEstablished {
            step,
            detail: format!("B_{i},{j} not fully known"),
        })?;
        if !is_orthogonal(&b) {
            return Err(DeductionError::HypothesisNotEstablished {
                step,
                detail: format!("B_{i},{j} is not orthogonal"),
            });
        }
        Ok(b)
    }

    fn bb(&mut self, step: usize, i: usize, j: usize, k: usize) -> Result<Flow, DeductionError> {
        self.check_block_index(step, &[i, j, k])?;
        let bij = self.orthogonal_block(step, i, j)?;
        let bjk = self
            .state
            .known_block(j, k)
            .ok_or_else(|| DeductionError::UnknownEntries { step, detail: format!("B_{j},{k} not fully known") })?;
        let prod = &bij * &bjk;
        if i != k && !prod.is_skew() {
            return Ok(Flow::Stop(ContradictionReport::SkewViolation { i, j, k, block: prod }));
        }
        Ok(match self.assign_block(i, k, &prod) {
            Ok(n) => Flow::Continue(n, format!("B_{i},{j} orthogonal")),
            Err(c) => Flow::Stop(c),
        })
    }

    fn bb_entry(
        &mut self,
        step: usize,
        i: usize,
        j: usize,
        k: usize,
        p: usize,
        q: usize,
    ) -> Result<Flow, DeductionError> {
        self.check_block_index(step, &[i, j, k, p, q])?;
        let bij = self.orthogonal_block(step, i, j)?;
        let mut acc = Rational::zero();
        for t in 1..=self.r.l() {
            let a = &bij[(p - 1, t - 1)];
            if a.is_zero() {
                continue;
            }
            let b = self.state.get(j, t, k, q).ok_or_else(|| DeductionError::UnknownEntries {
                step,
                detail: format!("(B_{j},{k})_{t},{q} needed"),
            })?;
            acc += a * b;
        }
        Ok(match self.state.set(i, p, k, q, acc.clone()) {
            Ok(n) => Flow::Continue(n, format!("B_{i},{j} orthogonal; value {acc}")),
            Err(c) => Flow::Stop(c),
        })
    }

    fn probe(&mut self, step: usize, indices: &[(usize, usize)], u: &[Rational]) -> Result<Flow, DeductionError> {
        if indices.len() != u.len() {
            return Err(DeductionError::BadRange(format!("{} positions but u has length {}", indices.len(), u.len())));
        }
        for &(i, j) in indices {
            self.check_block_index(step, &[i, j])?;
        }
        let s = self.state.principal(indices).ok_or_else(|| DeductionError::UnknownEntries {
            step,
            detail: "principal submatrix has unknown entries".into(),
        })?;
        let value = s.quad_form(u);
        if value.is_negative() {
            return Ok(Flow::Stop(ContradictionReport::IndefiniteWitness {
                indices: indices.to_vec(),
                submatrix: s,
                u: u.to_vec(),
                value,
            }));
        }
        Ok(Flow::Continue(0, format!("uᵀSu = {value} >= 0")))
    }

    /// Applies one step; `Some` on a contradiction.
    pub fn apply(&mut self, step: &Step) -> Result<Option<ContradictionReport>, DeductionError> {
        let index = self.log.len() + 1;
        let flow = match step {
            Step::Seed => self.seed()?,
            Step::BTau { i, j, alpha, sign } => self.btau(index, *i, *j, *alpha, *sign)?,
            Step::Bb { i, j, k } => self.bb(index, *i, *j, *k)?,
            Step::BbEntry { i, j, k, p, q } => self.bb_entry(index, *i, *j, *k, *p, *q)?,
            Step::KnownBlock { i, k } => {
                self.check_block_index(index, &[*i, *k])?;
                if self.state.known_block(*i, *k).is_none() {
                    return Err(DeductionError::HypothesisNotEstablished {
                        step: index,
                        detail: format!("B_{i},{k} not determined"),
                    });
                }
                Flow::Continue(0, "all entries known".into())
            }
            Step::Probe { indices, u } => self.probe(index, indices, u)?,
        };
        let (new_entries, justification, out) = match flow {
            Flow::Continue(n, j) => (n, j, None),
            Flow::Stop(c) => (0, format!("contradiction: {}", c.kind()), Some(c)),
        };
        self.log.push(LogEntry { index, step: step.clone(), justification, new_entries });
        Ok(out)
    }

    /// Runs steps in order, stopping at the first contradiction.
    pub fn run(mut self, steps: &[Step]) -> Result<DerivationOutcome, DeductionError> {
        let mut contradiction = None;
        for s in steps {
            if let Some(c) = self.apply(s)? {
                contradiction = Some(c);
                break;
            }
        }
        Ok(DerivationOutcome { state: self.state, log: self.log, contradiction })
    }
}

/// Re-runs the steps recorded in a log against a fresh state.
pub fn replay(log: &[LogEntry], r: &RMatrix) -> Result<DerivationOutcome, DeductionError> {
    let steps: Vec<Step> = log.iter().map(|e| e.step.clone()).collect();
    Derivation::new(r.clone()).run(&steps)
}

pub fn seed_from_linear(p: PartialB, r: &RMatrix) -> Result<PartialB, ContradictionReport> {
    let mut d = Derivation::new(r.clone());
    d.state = p;
    match d.apply(&Step::Seed) {
        Ok(None) => Ok(d.state),
        Ok(Some(c)) => Err(c),
        Err(e) => unreachable!("seeding has no hypotheses: {e}"),
    }
}

/// Standard basis positions (block b, rows r0..r0+len) for probes.
fn positions(block: usize, rows: std::ops::RangeInclusive<usize>) -> Vec<(usize, usize)> {
    rows.map(|r| (block, r)).collect()
}

/// The (4,3) definite derivation.
pub fn script_43d() -> Vec<Step> {
    vec![
        Step::Seed,
        Step::BTau { i: 1, j: 2, alpha: 2, sign: 1 },
        Step::KnownBlock { i: 1, k: 5 },
        Step::Bb { i: 2, j: 1, k: 5 },
    ]
}

/// The (3, 4r) derivation ending in the probe on K.
pub fn script_34r(r: usize) -> Result<Vec<Step>, DeductionError> {
    if r < 3 {
        return Err(DeductionError::BadRange(format!("the (3, 4r) witness needs r >= 3, got {r}")));
    }
    let mut u = vec![rat(0); 12];
    for b in 0..3 {
        u[4 * b + 3] = rat(1);
    }
    let mut indices = positions(1, 1..=4);
    indices.extend(positions(5, 5..=8));
    indices.extend(positions(9, 9..=12));
    Ok(vec![
        Step::Seed,
        Step::BTau { i: 1, j: 2, alpha: 2, sign: 1 },
        Step::BbEntry { i: 2, j: 1, k: 5, p: 8, q: 3 },
        Step::BbEntry { i: 1, j: 2, k: 5, p: 4, q: 8 },
        Step::BbEntry { i: 2, j: 1, k: 9, p: 12, q: 3 },
        Step::BbEntry { i: 1, j: 2, k: 9, p: 4, q: 12 },
        Step::BTau { i: 5, j: 6, alpha: 2, sign: 1 },
        Step::BbEntry { i: 6, j: 5, k: 9, p: 12, q: 7 },
        Step::BbEntry { i: 5, j: 6, k: 9, p: 8, q: 12 },
        Step::Probe { indices, u },
    ])
}

fn first_row_then_products(mut steps: Vec<Step>) -> Vec<Step> {
    for i in 2..=8 {
        for j in i + 1..=8 {
            steps.push(Step::Bb { i, j: 1, k: j });
        }
    }
    steps
}

/// The m = 6 derivation of the first block row, then B_ij = B_i1B_1j.
pub fn script_b6() -> Vec<Step> {
    first_row_then_products(vec![
        Step::Seed,
        Step::BTau { i: 1, j: 2, alpha: 2, sign: -1 },
        Step::BTau { i: 1, j: 7, alpha: 3, sign: 1 },
        Step::BTau { i: 1, j: 8, alpha: 4, sign: 1 },
        Step::BTau { i: 1, j: 5, alpha: 5, sign: 1 },
        Step::BTau { i: 1, j: 6, alpha: 6, sign: -1 },
        Step::BTau { i: 5, j: 3, alpha: 3, sign: -1 },
        Step::BTau { i: 5, j: 4, alpha: 4, sign: -1 },
        Step::Bb { i: 1, j: 5, k: 3 },
        Step::Bb { i: 1, j: 5, k: 4 },
    ])
}

/// Same conclusion from only the first three rows of R (m = 3 on l = 8).
pub fn script_m3_on_8() -> Vec<Step> {
    first_row_then_products(vec![
        Step::Seed,
        Step::BTau { i: 1, j: 2, alpha: 2, sign: -1 },
        Step::BTau { i: 1, j: 7, alpha: 3, sign: 1 },
        Step::BTau { i: 2, j: 8, alpha: 3, sign: 1 },
        Step::BTau { i: 4, j: 3, alpha: 2, sign: 1 },
        Step::BTau { i: 4, j: 6, alpha: 3, sign: 1 },
        Step::BTau { i: 5, j: 6, alpha: 2, sign: 1 },
        Step::BbEntry { i: 5, j: 6, k: 1, p: 8, q: 4 },
        Step::Bb { i: 1, j: 5, k: 6 },
        Step::Bb { i: 1, j: 6, k: 4 },
        Step::Bb { i: 1, j: 4, k: 3 },
        Step::Bb { i: 1, j: 2, k: 8 },
    ])
}

/// A witness derivation together with its contradiction.
#[derive(Clone, Debug)]
pub struct WitnessRun {
    pub r: RMatrix,
    pub outcome: DerivationOutcome,
    pub report: ContradictionReport,
}

fn expect_contradiction(r: RMatrix, steps: &[Step]) -> Result<WitnessRun, DeductionError> {
    let outcome = Derivation::new(r.clone()).run(steps)?;
    let report = outcome.contradiction.clone().ok_or(DeductionError::NoContradiction)?;
    Ok(WitnessRun { r, outcome, report })
}

fn system_r(m: usize, l: usize, class: CliffordClass) -> Result<RMatrix, DeductionError> {
    build_system(m, l, class).map(|s| build_r(&s)).map_err(|e| DeductionError::BadRange(e.to_string()))
}

/// (m_+, m_-) = (4, 3), definite class: a forced block that is not skew.
pub fn witness_43d() -> Result<WitnessRun, DeductionError> {
    expect_contradiction(system_r(4, 8, CliffordClass::Definite)?, &script_43d())
}

/// (m, l) = (3, 4r), r ≥ 3: an indefinite principal submatrix.
pub fn witness_34r(r: usize) -> Result<WitnessRun, DeductionError> {
    let steps = script_34r(r)?;
    expect_contradiction(system_r(3, 4 * r, CliffordClass::Unique)?, &steps)
}

/// A derivation that must determine B completely and without contradiction.
#[derive(Clone, Debug)]
pub struct DerivedB {
    pub b: FeasibleB,
    pub outcome: DerivationOutcome,
}

fn derive_complete(r: RMatrix, steps: &[Step]) -> Result<DerivedB, DeductionError> {
    let outcome = Derivation::new(r.clone()).run(steps)?;
    if let Some(c) = outcome.contradiction.clone() {
        return Err(DeductionError::UnexpectedContradiction(c));
    }
    let m = outcome.state.to_matrix().ok_or_else(|| {
        DeductionError::Incomplete(format!(
            "{} entries still unknown",
            outcome.state.entries.len() - outcome.state.known_count()
        ))
    })?;
    let b = check_feasible(&m, &r, Construction::B6).map_err(|rep| DeductionError::Incomplete(rep.to_string()))?;
    Ok(DerivedB { b, outcome })
}

/// The unique feasible B for (m, l) = (6, 8).
pub fn derive_b6() -> Result<DerivedB, DeductionError> {
    derive_complete(system_r(6, 8, CliffordClass::Unique)?, &script_b6())
}

/// The unique feasible B for (m, l) = (3, 8), derived from R^(3) alone.
pub fn derive_b6_from_m3() -> Result<DerivedB, DeductionError> {
    derive_complete(system_r(3, 8, CliffordClass::Unique)?, &script_m3_on_8())
}

/// Does a derived B agree entrywise with B^(6).
pub fn matches_b6(d: &DerivedB) -> bool {
    d.b.matrix() == &b6_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_system, e_tilde};

    fn r_of(m: usize, l: usize) -> RMatrix {
        build_r(&build_system(m, l, CliffordClass::Unique).unwrap())
    }

    #[test]
    fn structural_start() {
        let p = PartialB::new(3);
        assert_eq!(p.known_block(2, 2), Some(RationalMatrix::identity(3)));
        assert_eq!(p.get(1, 2, 3, 2), Some(&rat(0)));
        assert_eq!(p.get(1, 2, 3, 1), None);
    }

    #[test]
    fn closure_and_conflict() {
        let mut p = PartialB::new(3);
        assert_eq!(p.set(1, 1, 2, 2, rat(1)).unwrap(), 4);
        assert_eq!(p.get(2, 2, 1, 1), Some(&rat(1)));
        assert_eq!(p.get(1, 2, 2, 1), Some(&rat(-1)));
        let c = p.set(1, 2, 2, 1, rat(1)).unwrap_err();
        assert_eq!(c.kind(), "EntryConflict");
        assert!(c.reverify_against(&p));
    }

    #[test]
    fn seed_m1_rows() {
        let r = r_of(1, 4);
        let p = seed_from_linear(PartialB::new(4), &r).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                let row: Vec<Rational> = p.row(i, j, i).into_iter().map(Option::unwrap).collect();
                let want: Vec<Rational> = (1..=4).map(|h| rat((h == j) as i64)).collect();
                assert_eq!(row, want);
            }
        }
    }

    #[test]
    fn seed_43d_first_rows() {
        let r = build_r(&build_system(4, 8, CliffordClass::Definite).unwrap());
        let p = seed_from_linear(PartialB::new(8), &r).unwrap();
        for k in 1..=8 {
            for a in 0..4 {
                let row: Vec<Rational> = p.row(1, k, a + 1).into_iter().map(Option::unwrap).collect();
                assert_eq!(row, r.block(k).row(a).to_vec());
            }
        }
    }

    #[test]
    fn btau_examples() {
        let r = r_of(6, 8);
        let mut d = Derivation::new(r.clone());
        d.apply(&Step::Seed).unwrap();
        assert!(d.apply(&Step::BTau { i: 1, j: 2, alpha: 2, sign: -1 }).unwrap().is_none());
        let e1 = build_system(6, 8, CliffordClass::Unique).unwrap().e()[0].clone();
        assert_eq!(d.state().known_block(1, 2).unwrap(), tau(1, &e1).unwrap());
        assert_eq!(tau(1, &e1).unwrap(), tau(2, &e1).unwrap());

        let r = r_of(3, 12);
        let mut d = Derivation::new(r);
        d.apply(&Step::Seed).unwrap();
        d.apply(&Step::BTau { i: 1, j: 2, alpha: 2, sign: 1 }).unwrap();
        let e1 = build_system(3, 12, CliffordClass::Unique).unwrap().e()[0].clone();
        assert_eq!(d.state().known_block(1, 2).unwrap(), -&tau(1, &e1).unwrap());
    }

    #[test]
    fn btau_needs_hypothesis() {
        let mut d = Derivation::new(r_of(6, 8));
        let err = d.apply(&Step::BTau { i: 1, j: 2, alpha: 2, sign: -1 }).unwrap_err();
        assert!(matches!(err, DeductionError::HypothesisNotEstablished { .. }));
    }

    #[test]
    fn probe_examples() {
        let mut d = Derivation::new(r_of(1, 3));
        let idx = vec![(1, 1), (2, 1)];
        assert!(d.apply(&Step::Probe { indices: idx, u: vec![rat(1), rat(1)] }).unwrap().is_none());
        let err = d.apply(&Step::Probe { indices: vec![(1, 1), (2, 2)], u: vec![rat(1), rat(1)] }).unwrap_err();
        assert!(matches!(err, DeductionError::UnknownEntries { .. }));
    }

    #[test]
    fn witness_43d_block() {
        let run = witness_43d().unwrap();
        let [e1, _, _] = e_tilde();
        let mut want = RationalMatrix::zeros(8, 8);
        want.set_submatrix(0, 4, &tau(1, &e1).unwrap());
        want.set_submatrix(4, 0, &-&e1);
        match &run.report {
            ContradictionReport::SkewViolation { i: 2, k: 5, block, .. } => assert_eq!(block, &want),
            other => panic!("unexpected {other}"),
        }
        assert!(run.report.reverify_against(&run.outcome.state));
        let st = &run.outcome.state;
        let b21 = RationalMatrix::direct_sum(&[tau(1, &e1).unwrap(), e1.clone()]);
        assert_eq!(st.known_block(2, 1).unwrap(), b21);
        let mut b15 = RationalMatrix::zeros(8, 8);
        b15.set_submatrix(0, 4, &RationalMatrix::identity(4));
        b15.set_submatrix(4, 0, &-&RationalMatrix::identity(4));
        assert_eq!(st.known_block(1, 5).unwrap(), b15);
    }

    #[test]
    fn witness_34r_values() {
        for r in [3, 4] {
            let run = witness_34r(r).unwrap();
            match &run.report {
                ContradictionReport::IndefiniteWitness { value, .. } => assert_eq!(value, &rat(-3)),
                other => panic!("unexpected {other}"),
            }
            assert!(run.report.reverify_against(&run.outcome.state));
        }
        assert!(matches!(witness_34r(2), Err(DeductionError::BadRange(_))));
    }

    #[test]
    fn derive_b6_matches() {
        let d = derive_b6().unwrap();
        assert!(matches_b6(&d));
        let replayed = replay(&d.outcome.log, &r_of(6, 8)).unwrap();
        assert_eq!(replayed.state, d.outcome.state);
    }

    #[test]
    fn derive_from_m3_matches() {
        let d = derive_b6_from_m3().unwrap();
        assert!(matches_b6(&d));
    }
}
