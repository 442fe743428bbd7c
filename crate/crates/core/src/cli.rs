//! The `fkm` command line.
//!
//! Every command builds a plain-text report that depends only on its inputs
//! and the seed. Exit codes: 0 when all exact checks pass, 2 when an exact
//! check fails, 3 on usage or input errors. Probe verdicts never change the
//! exit code. Timings go to stderr and only with `--timings`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::clifford::{build_system_tagged, CliffordClass, CliffordSystem};
use crate::deduction::{
    derive_b6, derive_b6_from_m3, matches_b6, witness_34r, witness_43d, ContradictionReport, DerivedB, WitnessRun,
};
use crate::exactmat::RationalMatrix;
use crate::forms::{build_f, build_gf, check_cartan_munzner, sample_nonnegativity, DEFAULT_SEED};
use crate::probe::{feasibility_probe, ProbeConfig, DEFAULT_MAX_ITERS, DEFAULT_STALL, DEFAULT_TOL};
use crate::sdpcert::{
    build_r, check_feasible, classify, construction_matrix, extract_sos, first_row_anticommutes, gram_from_b,
    gram_polynomial, gram_support_ok, rank_bounds, survey, verify_certificate, Construction, FeasibleB, SosCertificate,
    SosVerdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fkm", version, about = "Exact SOS certificates and non-SOS witnesses for OT-FKM quartic forms")]
pub struct Cli {
    /// Output file or directory (meaning depends on the command)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for pseudo-random sampling
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Print only the status line
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Report wall-clock time on stderr
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub l: usize,
    /// definite | indefinite (required when m is divisible by 4)
    #[arg(long)]
    pub class: Option<CliffordClass>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Gf,
    F,
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    #[value(name = "4-3-definite")]
    #[serde(rename = "4-3-definite")]
    FourThreeDefinite,
    #[value(name = "3-4r")]
    #[serde(rename = "3-4r")]
    ThreeFourR,
    DeriveB6,
    DeriveM3,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a Clifford system and write P_α, E_α and a manifest to --out DIR
    Construct(PairArgs),
    /// Build F or G_F, check the Cartan–Münzner identities, sample G_F
    Form {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = FormKind::Gf)]
        which: FormKind,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Check a B against the block SDP for R(m, l)
    VerifyFeasible {
        #[command(flatten)]
        pair: PairArgs,
        /// B1 | B2 | B6 | file:PATH
        #[arg(long)]
        construction: Construction,
    },
    /// Turn a feasible B into an SOS certificate for G_F
    ExtractSos {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        construction: Construction,
    },
    /// Verify a certificate file against G_F
    VerifyCert {
        #[arg(long)]
        cert: PathBuf,
        /// Needed when the certificate's m is divisible by 4
        #[arg(long)]
        class: Option<CliffordClass>,
    },
    /// sos / non-sos verdict and rank bounds for a multiplicity pair
    Classify {
        #[arg(long)]
        m_plus: usize,
        #[arg(long)]
        m_minus: usize,
        #[arg(long)]
        class: Option<CliffordClass>,
    },
    /// Try every construction defined at l against R(m, l)
    RankSurvey(PairArgs),
    /// Run a scripted derivation
    Witness {
        #[arg(value_enum)]
        which: WitnessKind,
        /// r for the (3, 4r) witness
        #[arg(long, default_value_t = 3)]
        r: usize,
        /// Write the matrices involved to this directory
        #[arg(long)]
        emit_matrices: Option<PathBuf>,
    },
    /// Floating-point feasibility probe (advisory)
    Probe {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_STALL)]
        stall: f64,
        #[arg(long)]
        no_rounding: bool,
    },
    /// Run a TOML case file
    Suite { file: PathBuf },
    /// Rank bounds and achieved certificate ranks for the sos pairs
    Table,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Accumulated report body plus a failure flag.
#[derive(Default, Debug)]
pub struct Report {
    body: String,
    failed: bool,
}

impl Report {
    fn line(&mut self, s: impl AsRef<str>) {
        self.body.push_str(s.as_ref());
        self.body.push('\n');
    }

    fn check(&mut self, label: &str, ok: bool) {
        self.line(format!("{label}: {}", if ok { "ok" } else { "FAILED" }));
        self.failed |= !ok;
    }

    fn block(&mut self, text: &str) {
        for l in text.lines() {
            self.line(format!("  {l}"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn system(pair: &PairArgs) -> Result<CliffordSystem, CliError> {
    build_system_tagged(pair.m, pair.l, pair.class).map_err(usage)
}

fn load_b(c: &Construction, l: usize) -> Result<RationalMatrix, CliError> {
    match c {
        Construction::External(path) => {
            let p = Path::new(path);
            read_file(p)?.parse::<RationalMatrix>().map_err(|e| io_err(p, e))
        }
        _ => construction_matrix(c, l).map_err(usage),
    }
}

fn pair_line(sys: &CliffordSystem) -> String {
    format!("pair: m={} l={} class={} (m_+, m_-) = ({}, {})", sys.m(), sys.l(), sys.class(), sys.m(), sys.m_minus())
}

fn cmd_construct(pair: &PairArgs, out: Option<&Path>, rep: &mut Report) -> Result<(), CliError> {
    let sys = system(pair)?;
    rep.line(pair_line(&sys));
    rep.check("relations", sys.verify_relations().is_ok());
    let sign = match sys.product_sign() {
        Some(1) => "+I",
        Some(_) => "-I",
        None => "not ±I",
    };
    rep.line(format!("P_0···P_m: {sign}"));
    if let Some(dir) = out {
        let mut manifest = format!("m {}\nl {}\nclass {}\n", sys.m(), sys.l(), sys.class());
        for (a, p) in sys.p().iter().enumerate() {
            let name = format!("P{a}.txt");
            write_file(&dir.join(&name), &p.to_string())?;
            let _ = writeln!(manifest, "P{a} {name}");
        }
        for (a, e) in sys.e().iter().enumerate() {
            let name = format!("E{}.txt", a + 1);
            write_file(&dir.join(&name), &e.to_string())?;
            let _ = writeln!(manifest, "E{} {name}", a + 1);
        }
        write_file(&dir.join("manifest.txt"), &manifest)?;
        rep.line(format!("wrote {} matrices and manifest.txt", sys.p().len() + sys.e().len()));
    }
    Ok(())
}

fn cmd_form(
    pair: &PairArgs,
    which: FormKind,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
    rep: &mut Report,
) -> Result<(), CliError> {
    let sys = system(pair)?;
    rep.line(pair_line(&sys));
    let cm = check_cartan_munzner(&sys);
    rep.check("cartan-munzner gradient |∇F|² = 16|x|⁶", cm.gradient_residual.is_zero());
    rep.check("cartan-munzner laplacian ΔF = 8(m_- - m_+)|x|²", cm.laplacian_residual.is_zero());
    let poly = match which {
        FormKind::F => build_f(&sys),
        FormKind::Gf => build_gf(&sys),
    };
    rep.line(format!(
        "form: {} with {} terms in {} variables",
        if which == FormKind::F { "F" } else { "G_F" },
        poly.num_terms(),
        poly.nvars()
    ));
    if which == FormKind::Gf && samples > 0 {
        let s = sample_nonnegativity(&poly, samples, seed);
        rep.line(format!(
            "sampling: seed {} points {} negatives {} min {}",
            s.seed, s.points, s.negatives, s.min_value
        ));
        rep.check("sampled nonnegativity", s.negatives == 0);
    }
    if let Some(p) = out {
        write_file(p, &poly.to_string())?;
        rep.line(format!("wrote {}", p.display()));
    }
    Ok(())
}

fn feasible_or_report(
    pair: &PairArgs,
    c: &Construction,
    rep: &mut Report,
) -> Result<Option<(CliffordSystem, FeasibleB)>, CliError> {
    let sys = system(pair)?;
    rep.line(pair_line(&sys));
    rep.line(format!("construction: {c}"));
    let b = load_b(c, sys.l())?;
    let r = build_r(&sys);
    match check_feasible(&b, &r, c.clone()) {
        Ok(fb) => {
            rep.check("feasible", true);
            rep.line(format!("rank B: {}", fb.rank()));
            Ok(Some((sys, fb)))
        }
        Err(report) => {
            rep.check("feasible", false);
            rep.block(&report.to_string());
            Ok(None)
        }
    }
}

fn cmd_verify_feasible(pair: &PairArgs, c: &Construction, rep: &mut Report) -> Result<(), CliError> {
    feasible_or_report(pair, c, rep).map(|_| ())
}

fn cmd_extract(pair: &PairArgs, c: &Construction, out: Option<&Path>, rep: &mut Report) -> Result<(), CliError> {
    let Some((sys, fb)) = feasible_or_report(pair, c, rep)? else { return Ok(()) };
    let r = build_r(&sys);
    let gf = build_gf(&sys);
    let q = gram_from_b(&fb, &r).map_err(usage)?;
    rep.check("gram identity XᵀQX = G_F", gram_polynomial(&q, sys.n()) == gf);
    rep.check("gram support in mixed block", gram_support_ok(&q, sys.l()));
    match extract_sos(&fb, &r, &gf) {
        Ok(cert) => {
            let chk = verify_certificate(&cert, &gf);
            rep.check("certificate residual is zero", chk.residual.is_zero());
            rep.line(format!("certificate rank: {}", cert.rank));
            if let Some(p) = out {
                write_file(p, &cert.to_string())?;
                rep.line(format!("wrote {}", p.display()));
            }
        }
        Err(e) => {
            rep.check("extraction", false);
            rep.line(format!("  {e}"));
        }
    }
    Ok(())
}

fn cmd_verify_cert(path: &Path, class: Option<CliffordClass>, rep: &mut Report) -> Result<(), CliError> {
    let cert: SosCertificate = read_file(path)?.parse().map_err(|e| io_err(path, e))?;
    let sys = system(&PairArgs { m: cert.m, l: cert.l, class })?;
    rep.line(pair_line(&sys));
    let chk = verify_certificate(&cert, &build_gf(&sys));
    rep.line(format!("items: {} claimed rank: {} computed rank: {}", chk.items, chk.claimed_rank, chk.computed_rank));
    rep.check("weights positive", chk.weights_positive);
    rep.check("rank consistent", chk.rank_consistent());
    rep.check("residual is zero", chk.residual.is_zero());
    if !chk.residual.is_zero() {
        rep.line(format!("residual terms: {}", chk.residual.num_terms()));
    }
    Ok(())
}

fn cmd_classify(m_plus: usize, m_minus: usize, class: Option<CliffordClass>, rep: &mut Report) -> Result<(), CliError> {
    let v = classify(m_plus, m_minus, class).map_err(usage)?;
    let tag = class.map(|c| format!(" class={c}")).unwrap_or_default();
    rep.line(format!("pair: ({m_plus}, {m_minus}){tag}"));
    rep.line(format!("verdict: {v}"));
    if v == SosVerdict::Sos {
        let b = rank_bounds(m_plus, m_minus, class).map_err(usage)?;
        rep.line(format!("l: {}", b.l));
        rep.line(format!("rank bounds: [{}, {}]{}", b.lower, b.upper, if b.unique() { " (unique)" } else { "" }));
        rep.line(format!("lower bound attained: {}", if b.lower_attainable { "yes" } else { "not established" }));
    }
    Ok(())
}

fn cmd_survey(pair: &PairArgs, rep: &mut Report) -> Result<(), CliError> {
    let sys = system(pair)?;
    rep.line(pair_line(&sys));
    let entries = survey(&sys);
    if entries.is_empty() {
        rep.line("no construction is defined at this l");
    }
    for e in &entries {
        match (e.rank_b, e.certificate_rank) {
            (Some(rb), Some(rc)) => {
                rep.line(format!("{}: feasible rank B {} certificate rank {}", e.construction, rb, rc))
            }
            _ => rep.line(format!("{}: infeasible", e.construction)),
        }
    }
    if let Ok(b) = rank_bounds(sys.m(), sys.m_minus().max(0) as usize, Some(sys.class())) {
        rep.line(format!("rank bounds: [{}, {}]", b.lower, b.upper));
        for e in &entries {
            if let Some(rc) = e.certificate_rank {
                rep.check(&format!("{} rank within bounds", e.construction), b.contains(rc));
            }
        }
    }
    Ok(())
}

/// Matrices worth writing for a witness run, keyed by file stem.
pub fn witness_matrices(run: &WitnessRun) -> Vec<(String, RationalMatrix)> {
    let st = &run.outcome.state;
    let mut out = Vec::new();
    match &run.report {
        ContradictionReport::SkewViolation { i, j, k, block } => {
            for (a, b) in [(*i, *j), (*j, *k)] {
                if let Some(m) = st.known_block(a, b) {
                    out.push((format!("B{a}_{b}"), m));
                }
            }
            out.push((format!("B{i}_{k}_forced"), block.clone()));
        }
        ContradictionReport::IndefiniteWitness { submatrix, u, .. } => {
            out.push(("K".into(), submatrix.clone()));
            out.push(("u".into(), RationalMatrix::from_fn(u.len(), 1, |r, _| u[r].clone())));
        }
        ContradictionReport::EntryConflict { .. } => {}
    }
    out
}

fn emit(dir: &Path, mats: &[(String, RationalMatrix)], rep: &mut Report) -> Result<(), CliError> {
    for (name, m) in mats {
        write_file(&dir.join(format!("{name}.txt")), &m.to_string())?;
    }
    rep.line(format!("wrote {} matrices to {}", mats.len(), dir.display()));
    Ok(())
}

fn report_witness(run: &WitnessRun, rep: &mut Report) {
    rep.line(format!("system: m={} l={}", run.r.m(), run.r.l()));
    rep.line("derivation:");
    for e in &run.outcome.log {
        rep.line(format!("  {e}"));
    }
    rep.line(format!("contradiction: {}", run.report.kind()));
    rep.block(&run.report.to_string());
    rep.check("contradiction re-verified", run.report.reverify_against(&run.outcome.state));
}

fn report_derived(d: &DerivedB, rep: &mut Report) {
    rep.line("derivation:");
    for e in &d.outcome.log {
        rep.line(format!("  {e}"));
    }
    rep.check("all entries determined", d.outcome.state.is_complete());
    rep.check("feasible", true);
    rep.line(format!("rank B: {}", d.b.rank()));
    rep.check("equals B^(6)", matches_b6(d));
    rep.check("first block row anticommutes", first_row_anticommutes(d.b.matrix(), d.b.l()));
}

fn cmd_witness(which: WitnessKind, r: usize, emit_dir: Option<&Path>, rep: &mut Report) -> Result<(), CliError> {
    match which {
        WitnessKind::FourThreeDefinite | WitnessKind::ThreeFourR => {
            let run = match which {
                WitnessKind::FourThreeDefinite => witness_43d(),
                _ => witness_34r(r),
            }
            .map_err(usage)?;
            report_witness(&run, rep);
            if let Some(dir) = emit_dir {
                emit(dir, &witness_matrices(&run), rep)?;
            }
        }
        WitnessKind::DeriveB6 | WitnessKind::DeriveM3 => {
            let d = match which {
                WitnessKind::DeriveB6 => derive_b6(),
                _ => derive_b6_from_m3(),
            };
            match d {
                Ok(d) => {
                    report_derived(&d, rep);
                    if let Some(dir) = emit_dir {
                        emit(dir, &[("B".into(), d.b.matrix().clone())], rep)?;
                    }
                }
                Err(e) => {
                    rep.check("derivation", false);
                    rep.line(format!("  {e}"));
                }
            }
        }
    }
    Ok(())
}

fn cmd_probe(pair: &PairArgs, config: ProbeConfig, rep: &mut Report) -> Result<(), CliError> {
    let class = CliffordClass::resolve(pair.m, pair.class).map_err(usage)?;
    let report = feasibility_probe(pair.m, pair.l, class, config).map_err(usage)?;
    rep.body.push_str(&report.to_string());
    Ok(())
}

#[derive(Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Construct,
    CartanMunzner,
    Gram,
    Verify,
    Extract,
    Classify,
    Witness,
    Probe,
}

#[derive(Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Sos,
    NonSos,
}

/// One `[[case]]` of a suite file.
#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct CaseStudy {
    pub name: Option<String>,
    pub m: usize,
    pub l: usize,
    pub class: Option<CliffordClass>,
    #[serde(default)]
    pub actions: Vec<Action>,
    pub construction: Option<String>,
    /// Restrict R to its first m' rows before verify/extract.
    pub restrict: Option<usize>,
    pub witness: Option<WitnessKind>,
    pub r: Option<usize>,
    pub expect: Option<Expect>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    #[serde(default)]
    case: Vec<CaseStudy>,
}

impl CaseStudy {
    pub fn key(&self) -> String {
        let class = self.class.map(|c| c.to_string()).unwrap_or_else(|| "unique".into());
        let name = self.name.clone().unwrap_or_default();
        format!("{:02}-{:02}-{}{}{}", self.m, self.l, class, if name.is_empty() { "" } else { "-" }, name)
    }

    fn default_construction(&self) -> Option<Construction> {
        match (self.m, self.l) {
            (1, l) if l >= 3 => Some(Construction::B1),
            (2, l) if l >= 4 && l % 2 == 0 => Some(Construction::B2),
            (3..=6, 8) => Some(Construction::B6),
            _ => None,
        }
    }

    fn default_witness(&self) -> Option<WitnessKind> {
        match (self.m, self.l, self.class) {
            (4, 8, Some(CliffordClass::Definite)) => Some(WitnessKind::FourThreeDefinite),
            (3, l, _) if l >= 12 && l % 4 == 0 => Some(WitnessKind::ThreeFourR),
            (6, 8, _) => Some(WitnessKind::DeriveB6),
            (3, 8, _) => Some(WitnessKind::DeriveM3),
            _ => None,
        }
    }
}

/// Result of one suite case.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub key: String,
    pub passed: bool,
    pub report: String,
}

fn run_case(case: &CaseStudy) -> CaseResult {
    let mut rep = Report::default();
    if let Err(e) = run_case_inner(case, &mut rep) {
        rep.check(&format!("error: {e}"), false);
    }
    CaseResult { key: case.key(), passed: !rep.failed, report: rep.body }
}

fn run_case_inner(case: &CaseStudy, rep: &mut Report) -> Result<(), CliError> {
    let pair = PairArgs { m: case.m, l: case.l, class: case.class };
    let sys = system(&pair)?;
    rep.line(pair_line(&sys));
    let m_minus =
        usize::try_from(sys.m_minus()).ok().filter(|&x| x > 0).ok_or_else(|| usage("m_- must be positive"))?;
    let verdict = classify(case.m, m_minus, case.class).map_err(usage)?;
    let expect = case.expect.unwrap_or(if verdict == SosVerdict::Sos { Expect::Sos } else { Expect::NonSos });
    rep.line(format!("expected: {}", if expect == Expect::Sos { "sos" } else { "non-sos" }));
    let construction = match &case.construction {
        Some(s) => Some(s.parse::<Construction>().map_err(usage)?),
        None => case.default_construction(),
    };
    let mut r = build_r(&sys);
    for action in &case.actions {
        match action {
            Action::Construct => rep.check("construct: relations", sys.verify_relations().is_ok()),
            Action::CartanMunzner => rep.check("cartan-munzner", check_cartan_munzner(&sys).passed()),
            Action::Classify => {
                rep.check(&format!("classify: {verdict}"), (verdict == SosVerdict::Sos) == (expect == Expect::Sos))
            }
            Action::Gram | Action::Verify | Action::Extract => {
                let c = construction.clone().ok_or_else(|| usage("no construction for this pair"))?;
                if let Some(mp) = case.restrict {
                    r = crate::sdpcert::restrict_r(&build_r(&sys), mp).map_err(usage)?;
                }
                let b = load_b(&c, case.l)?;
                let fb = check_feasible(&b, &r, c.clone());
                let label = format!("{action:?} with {c}").to_lowercase();
                match (fb, action) {
                    (Ok(fb), Action::Verify) => {
                        rep.check(&format!("{label}: feasible rank {}", fb.rank()), expect == Expect::Sos);
                    }
                    (Ok(fb), Action::Gram) => {
                        let q = gram_from_b(&fb, &r).map_err(usage)?;
                        let gf = build_gf(&sys);
                        rep.check(&label, gram_polynomial(&q, sys.n()) == gf && gram_support_ok(&q, sys.l()));
                    }
                    (Ok(fb), _) => {
                        let gf = build_gf(&sys);
                        match extract_sos(&fb, &r, &gf) {
                            Ok(cert) => rep.check(
                                &format!("{label}: certificate rank {}", cert.rank),
                                verify_certificate(&cert, &gf).passed(),
                            ),
                            Err(e) => rep.check(&format!("{label}: {e}"), false),
                        }
                    }
                    (Err(report), _) => {
                        rep.check(
                            &format!(
                                "{label}: infeasible ({})",
                                report.conditions().iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                            ),
                            expect == Expect::NonSos,
                        );
                    }
                }
            }
            Action::Witness => {
                let w = case
                    .witness
                    .or_else(|| case.default_witness())
                    .ok_or_else(|| usage("no witness script for this pair"))?;
                let mut sub = Report::default();
                cmd_witness(w, case.r.unwrap_or(case.l / 4), None, &mut sub)?;
                let contradiction = matches!(w, WitnessKind::FourThreeDefinite | WitnessKind::ThreeFourR);
                let summary = sub
                    .body
                    .lines()
                    .find(|l| l.starts_with("contradiction:") || l.starts_with("equals B^(6)"))
                    .unwrap_or("");
                let summary = summary.trim_end_matches(": ok").trim_end_matches(": FAILED");
                let label = format!(
                    "witness {}: {summary}",
                    w.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
                );
                let ok = !sub.failed && (contradiction == (expect == Expect::NonSos));
                rep.check(&label, ok);
            }
            Action::Probe => {
                let class = CliffordClass::resolve(case.m, case.class).map_err(usage)?;
                match feasibility_probe(
                    case.m,
                    case.l,
                    class,
                    ProbeConfig { attempt_rounding: false, ..ProbeConfig::default() },
                ) {
                    Ok(p) => rep.line(format!(
                        "probe (advisory): {} after {} iterations, max residual {:.3e}",
                        p.verdict,
                        p.iterations,
                        p.residuals.max()
                    )),
                    Err(e) => rep.line(format!("probe (advisory): {e}")),
                }
            }
        }
    }
    Ok(())
}

/// Parses a suite file's text.
pub fn parse_suite(text: &str) -> Result<Vec<CaseStudy>, CliError> {
    let f: SuiteFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("suite parse error: {e}")))?;
    if f.case.is_empty() {
        return Err(CliError::Usage("suite has no [[case]] entries".into()));
    }
    Ok(f.case)
}

/// Runs all cases in parallel; results are sorted by case key.
pub fn run_suite(cases: &[CaseStudy]) -> Vec<CaseResult> {
    let mut results: Vec<CaseResult> = cases.par_iter().map(run_case).collect();
    results.sort_by(|a, b| a.key.cmp(&b.key));
    results
}

fn cmd_suite(path: &Path, out: Option<&Path>, rep: &mut Report) -> Result<(), CliError> {
    let cases = parse_suite(&read_file(path)?)?;
    let results = run_suite(&cases);
    for res in &results {
        rep.line(format!("case {}: {}", res.key, if res.passed { "pass" } else { "FAIL" }));
        rep.block(&res.report);
        rep.failed |= !res.passed;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    rep.line(format!("cases: {passed}/{} passed", results.len()));
    if let Some(dir) = out {
        for res in &results {
            write_file(&dir.join(format!("case-{}.txt", res.key)), &res.report)?;
        }
        write_file(&dir.join("summary.txt"), &rep.body)?;
    }
    Ok(())
}

/// One row of the rank table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub m_plus: usize,
    pub m_minus: usize,
    pub class: CliffordClass,
    pub l: usize,
    pub lower: usize,
    pub upper: usize,
    /// (construction, certificate rank) for every feasible construction.
    pub achieved: Vec<(String, usize)>,
    pub note: &'static str,
}

/// Sos pairs with an implemented representative.
pub fn rank_table_pairs() -> Vec<(usize, usize, CliffordClass)> {
    let mut v: Vec<(usize, usize, CliffordClass)> = (3..=8).map(|l| (1, l, CliffordClass::Unique)).collect();
    v.extend([4, 6, 8].map(|l| (2, l, CliffordClass::Unique)));
    v.push((3, 8, CliffordClass::Unique));
    v.push((4, 8, CliffordClass::Indefinite));
    v.push((5, 8, CliffordClass::Unique));
    v.push((6, 8, CliffordClass::Unique));
    v
}

/// Certificate rank of B^(6) against the first m rows of R(6, 8).
pub fn b6_restricted_rank(m: usize) -> Option<usize> {
    let r6 = build_r(&crate::clifford::build_system(6, 8, CliffordClass::Unique).ok()?);
    let r = if m == 6 { r6 } else { crate::sdpcert::restrict_r(&r6, m).ok()? };
    let fb = check_feasible(&crate::sdpcert::b6_matrix(), &r, Construction::B6).ok()?;
    Some(crate::exactmat::rank(&crate::sdpcert::b_minus_rtr(fb.matrix(), &r)))
}

pub fn rank_table_rows() -> Vec<TableRow> {
    rank_table_pairs()
        .into_par_iter()
        .map(|(m, l, class)| {
            let sys = crate::clifford::build_system(m, l, class).expect("table pairs are constructible");
            let m_minus = l - m - 1;
            let b = rank_bounds(m, m_minus, Some(class)).expect("table pairs are sos");
            let mut achieved: Vec<(String, usize)> = survey(&sys)
                .into_iter()
                .filter_map(|e| Some((e.construction.to_string(), e.certificate_rank?)))
                .collect();
            if l == 8 && !achieved.iter().any(|(c, _)| c == "B6") {
                if let Some(rk) = b6_restricted_rank(m) {
                    achieved.push(("B6|R(6,8)".into(), rk));
                }
            }
            let note = match m {
                1 => "l-1 <= r",
                2 => "l-2 <= r",
                _ => "r = 8-m",
            };
            TableRow { m_plus: m, m_minus, class, l, lower: b.lower, upper: b.upper, achieved, note }
        })
        .collect()
}

pub fn rank_table() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<18} {:>3} {:>10}  {:<24} note", "(m_+, m_-)", "l", "bounds", "achieved");
    for row in rank_table_rows() {
        let pair = match row.class {
            CliffordClass::Unique => format!("({}, {})", row.m_plus, row.m_minus),
            c => format!("({}, {}) {}", row.m_plus, row.m_minus, c),
        };
        let bounds = format!("[{}, {}]", row.lower, row.upper);
        let ach: Vec<String> = row.achieved.iter().map(|(c, r)| format!("{c}:{r}")).collect();
        let _ = writeln!(s, "{:<18} {:>3} {:>10}  {:<24} {}", pair, row.l, bounds, ach.join(" "), row.note);
    }
    s
}

fn dispatch(cli: &Cli, rep: &mut Report) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Construct(p) => cmd_construct(p, out, rep),
        Command::Form { pair, which, samples } => cmd_form(pair, *which, *samples, cli.seed, out, rep),
        Command::VerifyFeasible { pair, construction } => cmd_verify_feasible(pair, construction, rep),
        Command::ExtractSos { pair, construction } => cmd_extract(pair, construction, out, rep),
        Command::VerifyCert { cert, class } => cmd_verify_cert(cert, *class, rep),
        Command::Classify { m_plus, m_minus, class } => cmd_classify(*m_plus, *m_minus, *class, rep),
        Command::RankSurvey(p) => cmd_survey(p, rep),
        Command::Witness { which, r, emit_matrices } => cmd_witness(*which, *r, emit_matrices.as_deref(), rep),
        Command::Probe { pair, iters, tol, stall, no_rounding } => {
            let config =
                ProbeConfig { max_iters: *iters, tol: *tol, stall_threshold: *stall, attempt_rounding: !no_rounding };
            cmd_probe(pair, config, rep)
        }
        Command::Suite { file } => cmd_suite(file, out, rep),
        Command::Table => {
            rep.body.push_str(&rank_table());
            if let Some(p) = out {
                write_file(p, &rep.body)?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CliOutput { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => CliOutput { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let mut rep = Report::default();
    let result = dispatch(&cli, &mut rep);
    let mut stderr = String::new();
    if cli.timings {
        let _ = writeln!(stderr, "time: {:.3} s", start.elapsed().as_secs_f64());
    }
    let (code, status) = match result {
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return CliOutput { code: EXIT_USAGE, stdout: String::new(), stderr };
        }
        Ok(()) if rep.failed => (EXIT_FAILED, "status: FAILED"),
        Ok(()) => (EXIT_OK, "status: ok"),
    };
    let stdout = if cli.quiet {
        format!("{status}\n")
    } else {
        format!(
            "fkm {}\ncommand: {}\nseed: {}\n{}{status}\n",
            env!("CARGO_PKG_VERSION"),
            echo.join(" "),
            cli.seed,
            rep.body
        )
    };
    CliOutput { code, stdout, stderr }
}
