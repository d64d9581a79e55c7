//! Experiment configuration, test-function generators, sweep execution and
//! CSV reporting.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{stechkin_bound, tail_gamma_norm};
use crate::besov::{self, BesovParams};
use crate::error::{invalid, Error, Result};
use crate::probbounds::{self, SummandSpec, TailParams};
use crate::rng;
use crate::sparsify::{self, SparsifyConfig};
use crate::trigpoly::{self, a_theta_norm, Cuboid, Frequency, SparseSpectrum, DEFAULT_GRID_CAP};
use crate::vdp;

/// Relative slack for comparisons whose norms are exact.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Nikolskij,
    Bernstein,
    Moments,
    Stechkin,
    SparsifyLq,
    SparsifyLinf,
    Besov,
}

impl Mode {
    pub const ALL: [Mode; 7] =
        [Mode::Nikolskij, Mode::Bernstein, Mode::Moments, Mode::Stechkin, Mode::SparsifyLq, Mode::SparsifyLinf, Mode::Besov];

    pub fn label(self) -> &'static str {
        match self {
            Mode::Nikolskij => "nikolskij",
            Mode::Bernstein => "bernstein",
            Mode::Moments => "moments",
            Mode::Stechkin => "stechkin",
            Mode::SparsifyLq => "sparsify-lq",
            Mode::SparsifyLinf => "sparsify-linf",
            Mode::Besov => "besov",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::Config { field: "mode".into(), msg: format!("unknown mode `{s}`") })
    }
}

fn default_dims() -> Vec<usize> {
    vec![1]
}
fn default_m() -> Vec<usize> {
    vec![4]
}
fn default_q() -> Vec<f64> {
    vec![2.0]
}
fn default_theta() -> Vec<f64> {
    vec![1.0]
}
fn default_p() -> Vec<f64> {
    vec![4.0]
}
fn default_n_box() -> u64 {
    64
}
fn default_support() -> usize {
    100
}
fn default_trials() -> usize {
    10
}
fn default_oversample() -> usize {
    4
}
fn default_attempts() -> usize {
    sparsify::DEFAULT_MAX_ATTEMPTS
}
fn default_grid_cap() -> usize {
    DEFAULT_GRID_CAP
}
fn default_true() -> bool {
    true
}
fn default_distribution() -> String {
    "two-point:1".into()
}
fn default_mc_trials() -> usize {
    100_000
}
fn default_beta() -> Vec<f64> {
    vec![1.0, 4.0]
}
fn default_sigma() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}
fn default_b() -> Vec<f64> {
    vec![0.0, 1.0]
}
fn default_quad_points() -> usize {
    100_000
}
fn default_terms_per_block() -> usize {
    4
}
fn default_level_slack() -> u32 {
    2
}

/// Experiment description, read from a flat TOML file. Every field except
/// `mode` has a default; see the README for what each mode reads.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_m")]
    pub m_values: Vec<usize>,
    #[serde(default = "default_q")]
    pub q_values: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta_values: Vec<f64>,
    #[serde(default = "default_p")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_n_box")]
    pub n_box: u64,
    #[serde(default = "default_support")]
    pub support_size: usize,
    #[serde(default)]
    pub decay: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_grid_cap")]
    pub grid_cap: usize,
    pub out: Option<PathBuf>,
    /// Write measured wall times; `false` writes 0 so output is byte-stable.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default = "default_distribution")]
    pub distribution: String,
    #[serde(default = "default_mc_trials")]
    pub mc_trials: usize,
    #[serde(default = "default_beta")]
    pub beta_values: Vec<f64>,
    #[serde(default = "default_sigma")]
    pub sigma_values: Vec<f64>,
    #[serde(default = "default_b")]
    pub b_values: Vec<f64>,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
    #[serde(default = "default_terms_per_block")]
    pub terms_per_block: usize,
    #[serde(default = "default_level_slack")]
    pub level_slack: u32,
}

impl ExperimentConfig {
    /// All defaults for `mode`.
    pub fn for_mode(mode: Mode) -> Self {
        let mut cfg: ExperimentConfig = toml::from_str("").expect("defaults deserialize");
        cfg.mode = Some(mode);
        cfg
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            // name the key on the offending line; whole-document errors have none
            let field = e
                .span()
                .and_then(|s| text[..s.start].rsplit('\n').next().map(|pre| s.start - pre.len()))
                .and_then(|line_start| text[line_start..].lines().next())
                .and_then(|line| line.split_once('=').map(|(k, _)| k.trim().to_string()))
                .unwrap_or_else(|| "<document>".into());
            Error::Config { field, msg: e.message().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode.ok_or_else(|| Error::Config { field: "mode".into(), msg: "missing".into() })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config { field: field.into(), msg });
        let mode = self.mode()?;
        let nonempty = [
            ("dims", self.dims.is_empty()),
            ("m_values", self.m_values.is_empty()),
            ("q_values", self.q_values.is_empty()),
            ("theta_values", self.theta_values.is_empty()),
            ("p_values", self.p_values.is_empty()),
        ];
        if let Some((field, _)) = nonempty.iter().find(|x| x.1) {
            return bad(field, "must not be empty".into());
        }
        if let Some(d) = self.dims.iter().find(|&&d| d == 0 || d > 8) {
            return bad("dims", format!("dimension {d} outside 1..=8"));
        }
        if mode != Mode::Stechkin && self.m_values.contains(&0) {
            return bad("m_values", "entries must be >= 1".into());
        }
        if let Some(t) = self.theta_values.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return bad("theta_values", format!("{t} outside (0, 1]"));
        }
        if self.oversample == 0 {
            return bad("oversample", "must be >= 1".into());
        }
        if self.max_attempts == 0 {
            return bad("max_attempts", "must be >= 1".into());
        }
        if !(self.decay >= 0.0) {
            return bad("decay", format!("{} must be >= 0", self.decay));
        }
        match mode {
            Mode::Nikolskij => {
                if let Some(q) = self.q_values.iter().find(|&&q| trigpoly::even_exponent(q).is_none()) {
                    return bad("q_values", format!("{q} is not an even integer >= 2"));
                }
                if self.n_box == 0 {
                    return bad("n_box", "must be >= 1".into());
                }
            }
            Mode::Bernstein => {
                SummandSpec::from_str(&self.distribution)
                    .map_err(|e| Error::Config { field: "distribution".into(), msg: e.to_string() })?;
                if let Some(s) = self.q_values.iter().find(|&&s| !(s >= 0.0) || s.is_infinite()) {
                    return bad("q_values", format!("s multiplier {s} must be finite and >= 0"));
                }
                if self.mc_trials == 0 {
                    return bad("mc_trials", "must be >= 1".into());
                }
            }
            Mode::Moments => {
                if let Some(p) = self.p_values.iter().find(|&&p| !(p >= 1.0)) {
                    return bad("p_values", format!("moment order {p} must be >= 1"));
                }
                if self.beta_values.is_empty() || self.sigma_values.is_empty() || self.b_values.is_empty() {
                    return bad("beta_values", "beta, sigma and b lists must not be empty".into());
                }
            }
            Mode::Stechkin => {
                for (&g, &t) in self.q_values.iter().flat_map(|g| self.theta_values.iter().map(move |t| (g, t))) {
                    if !(g > t) {
                        return bad("q_values", format!("gamma {g} must exceed theta {t}"));
                    }
                }
            }
            Mode::SparsifyLq => {
                if let Some(q) = self.q_values.iter().find(|&&q| !(q >= 2.0) || q.is_infinite()) {
                    return bad("q_values", format!("{q} must be finite and >= 2"));
                }
            }
            Mode::SparsifyLinf => {
                if self.n_box == 0 {
                    return bad("n_box", "must be >= 1".into());
                }
            }
            Mode::Besov => {
                for &p in &self.p_values {
                    for &t in &self.theta_values {
                        let prm = BesovParams::embedding(p, t)
                            .map_err(|e| Error::Config { field: "p_values".into(), msg: e.to_string() })?;
                        if !prm.admissible() || !(prm.tail_exponent() > 0.0) {
                            return bad("p_values", format!("(p, theta) = ({p}, {t}) is not admissible"));
                        }
                    }
                }
                for &d in &self.dims {
                    if let Some(m) = self.m_values.iter().find(|&&m| d * m < 2) {
                        return bad("m_values", format!("d m >= 2 required, got d = {d}, m = {m}"));
                    }
                }
            }
        }
        if matches!(mode, Mode::Stechkin | Mode::SparsifyLq | Mode::SparsifyLinf) {
            let card = (2 * self.n_box as u128 + 1).checked_pow(*self.dims.iter().min().unwrap() as u32);
            if card.is_none_or(|c| c < self.support_size as u128) || self.support_size == 0 {
                return bad("support_size", format!("{} must lie in 1..=#[-n_box, n_box]^d", self.support_size));
            }
        }
        Ok(())
    }
}

/// `J` distinct uniform frequencies in `[-N, N]^d` with moduli `j^{-decay}`
/// and uniform random phases, scaled to `||t||_{A_theta} = 1`.
pub fn random_a_theta_ball(theta: f64, d: usize, support: usize, n_box: u64, decay: f64, seed: u64) -> Result<SparseSpectrum> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if support == 0 {
        return Err(invalid("support size must be >= 1"));
    }
    if !(decay >= 0.0) {
        return Err(invalid(format!("decay must be >= 0, got {decay}")));
    }
    let side = 2 * n_box as u128 + 1;
    let card = side.checked_pow(d as u32).filter(|&c| c <= usize::MAX as u128).ok_or_else(|| invalid("box too large"))?;
    if support as u128 > card {
        return Err(invalid(format!("support {support} exceeds box cardinality {card}")));
    }
    let mut r = rng::stream(seed, 0);
    let picks = index::sample(&mut r, card as usize, support);
    let mut t = SparseSpectrum::new(d);
    for (j, flat) in picks.into_iter().enumerate() {
        let mut rest = flat as u128;
        let k: Vec<i64> = (0..d)
            .map(|_| {
                let c = (rest % side) as i64 - n_box as i64;
                rest /= side;
                c
            })
            .collect();
        let phase: f64 = r.gen();
        let modulus = ((j + 1) as f64).powf(-decay);
        t.insert(Frequency::new(k), Complex64::from_polar(modulus, std::f64::consts::TAU * phase))?;
    }
    let norm = a_theta_norm(&t, theta)?;
    Ok(t.scaled(1.0 / norm))
}

/// One row of output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub mode: Mode,
    pub d: usize,
    pub m: usize,
    pub q: f64,
    pub theta: f64,
    pub seed: u64,
    pub trial: usize,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    pub accepted: bool,
    pub attempts: usize,
    pub wall_ms: f64,
    /// Whether this row takes part in the exit-code verdict.
    pub asserted: bool,
    /// Allowed relative excess of `ratio` over 1.
    pub tolerance: f64,
}

impl ExperimentRecord {
    pub fn violates(&self) -> bool {
        self.asserted && !(self.ratio <= 1.0 + self.tolerance)
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        (self.mode, self.d, self.m)
            .cmp(&(other.mode, other.d, other.m))
            .then(self.q.total_cmp(&other.q))
            .then(self.theta.total_cmp(&other.theta))
            .then(self.trial.cmp(&other.trial))
    }
}

fn ratio(measured: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        measured / bound
    } else if measured == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    mode: &'a str,
    d: usize,
    m: usize,
    q: f64,
    theta: f64,
    seed: u64,
    trial: usize,
    measured: f64,
    bound: f64,
    ratio: f64,
    accepted: bool,
    attempts: usize,
    wall_ms: f64,
}

/// Exact CSV header.
pub const CSV_HEADER: &str = "mode,d,m,q,theta,seed,trial,measured,bound,ratio,accepted,attempts,wall_ms";

pub fn write_csv<W: std::io::Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(CsvRow {
            mode: r.mode.label(),
            d: r.d,
            m: r.m,
            q: r.q,
            theta: r.theta,
            seed: r.seed,
            trial: r.trial,
            measured: r.measured,
            bound: r.bound,
            ratio: r.ratio,
            accepted: r.accepted,
            attempts: r.attempts,
            wall_ms: r.wall_ms,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One unit of work: a point of the parameter cross-product.
#[derive(Debug, Clone, Copy)]
struct Job {
    d: usize,
    m: usize,
    q: f64,
    theta: f64,
    trial: usize,
    /// Mode-specific extra coordinates (moments: sigma, B).
    extra: (f64, f64),
}

/// `mix(seed, mode, d, m, q, theta, trial)`.
pub fn trial_seed(seed: u64, mode: Mode, d: usize, m: usize, q: f64, theta: f64, trial: usize) -> u64 {
    rng::mix(&[seed, rng::label_hash(mode.label()), d as u64, m as u64, q.to_bits(), theta.to_bits(), trial as u64])
}

fn jobs(cfg: &ExperimentConfig, mode: Mode) -> Vec<Job> {
    let mut out = Vec::new();
    let none = (0.0, 0.0);
    match mode {
        Mode::Bernstein => {
            for &m in &cfg.m_values {
                for &q in &cfg.q_values {
                    out.push(Job { d: 1, m, q, theta: 0.0, trial: 0, extra: none });
                }
            }
        }
        Mode::Moments => {
            for &p in &cfg.p_values {
                for &beta in &cfg.beta_values {
                    let mut trial = 0;
                    for &sigma in &cfg.sigma_values {
                        for &b in &cfg.b_values {
                            out.push(Job { d: 0, m: 0, q: p, theta: beta, trial, extra: (sigma, b) });
                            trial += 1;
                        }
                    }
                }
            }
        }
        _ => {
            let qs: &[f64] = match mode {
                Mode::SparsifyLinf => &[0.0],
                Mode::Besov => &cfg.p_values,
                _ => &cfg.q_values,
            };
            let ms: Vec<usize> = match mode {
                Mode::Nikolskij => vec![cfg.n_box as usize],
                _ => cfg.m_values.clone(),
            };
            let thetas: &[f64] = if mode == Mode::Nikolskij { &[0.0] } else { &cfg.theta_values };
            for &d in &cfg.dims {
                for &m in &ms {
                    for &q in qs {
                        for &theta in thetas {
                            for trial in 0..cfg.trials {
                                out.push(Job { d, m, q, theta, trial, extra: none });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

struct Outcome {
    measured: f64,
    bound: f64,
    accepted: bool,
    attempts: usize,
    asserted: bool,
    tolerance: f64,
    q: f64,
}

impl Outcome {
    fn exact(measured: f64, bound: f64, q: f64) -> Self {
        Outcome { measured, bound, accepted: true, attempts: 1, asserted: true, tolerance: EXACT_TOLERANCE, q }
    }
}

fn run_job(cfg: &ExperimentConfig, mode: Mode, job: &Job, seed: u64) -> Result<Outcome> {
    let lq_cfg = |m: usize, q: f64| SparsifyConfig {
        m,
        q,
        max_attempts: cfg.max_attempts,
        oversample: cfg.oversample,
        seed,
        grid_cap: cfg.grid_cap,
    };
    match mode {
        Mode::Nikolskij => {
            let n = job.m as u64;
            let support = cfg.support_size.min((2 * n as usize + 1).pow(job.d as u32));
            let t = random_a_theta_ball(1.0, job.d, support, n, cfg.decay, seed)?;
            let linf = trigpoly::lq_norm_capped(&t, f64::INFINITY, cfg.oversample, cfg.grid_cap)?.value;
            let chk = vdp::verify_nikolskij_with_sup(&t, job.q as u32, linf)?;
            Ok(Outcome::exact(chk.ratio, chk.bound, job.q))
        }
        Mode::Bernstein => {
            let dist = SummandSpec::from_str(&cfg.distribution)?;
            let sigma = (job.m as f64 * dist.variance()).sqrt();
            let s = job.q * sigma;
            let chk = &probbounds::mc_verify_bernstein(dist, job.m, &[s], cfg.mc_trials, seed)?[0];
            let allowed = chk.bound + 3.0 * chk.std_error;
            let mut out = Outcome::exact(chk.empirical, allowed, job.q);
            out.accepted = chk.ok;
            Ok(out)
        }
        Mode::Moments => {
            let (sigma, b) = job.extra;
            let params = TailParams::new(sigma * sigma, b, job.theta)?;
            let chk = probbounds::mc_verify_moment(&params, job.q, cfg.quad_points)?;
            let mut out = Outcome::exact(chk.numeric, chk.bound, job.q);
            out.tolerance = 1e-6;
            Ok(out)
        }
        Mode::Stechkin => {
            let t = random_a_theta_ball(job.theta, job.d, cfg.support_size, cfg.n_box, cfg.decay, seed)?;
            let measured = tail_gamma_norm(&t, job.m, job.q)?;
            let bound = stechkin_bound(job.m, job.theta, job.q, a_theta_norm(&t, job.theta)?)?;
            Ok(Outcome::exact(measured, bound, job.q))
        }
        Mode::SparsifyLq => {
            let t = random_a_theta_ball(job.theta, job.d, cfg.support_size, cfg.n_box, cfg.decay, seed)?;
            let sc = lq_cfg(job.m, job.q);
            let r = sparsify::sparsify_lq(&t, &sc, job.theta)?;
            Ok(Outcome {
                measured: r.measured_error.value,
                bound: r.theorem_bound,
                accepted: r.accepted,
                attempts: r.attempts_used,
                asserted: r.m_ge_q,
                tolerance: if r.measured_error.method.is_exact() { EXACT_TOLERANCE } else { r.measured_error.est_rel_error },
                q: job.q,
            })
        }
        Mode::SparsifyLinf => {
            let t = random_a_theta_ball(job.theta, job.d, cfg.support_size, cfg.n_box, cfg.decay, seed)?;
            let q_box = Cuboid::symmetric(&vec![cfg.n_box; job.d])?;
            let r = sparsify::sparsify_linf(&t, &q_box, &lq_cfg(job.m, 2.0), job.theta)?;
            Ok(Outcome {
                measured: r.linf_error.value,
                bound: r.linf_theorem_bound,
                accepted: r.lq.accepted,
                attempts: r.lq.attempts_used,
                asserted: true,
                tolerance: EXACT_TOLERANCE,
                q: r.q_used as f64,
            })
        }
        Mode::Besov => {
            let e = besov_run(job.q, job.theta, job.d, job.m, cfg, seed)?;
            Ok(Outcome {
                measured: e.total_error(),
                bound: e.bound,
                accepted: e.sparsify.lq.accepted,
                attempts: e.sparsify.lq.attempts_used,
                asserted: true,
                tolerance: EXACT_TOLERANCE,
                q: job.q,
            })
        }
    }
}

/// One end-to-end Besov run: project a random unit-norm function, sparsify
/// the projection in `L_inf`, and measure both error pieces.
#[derive(Debug, Clone)]
pub struct BesovRun {
    pub n: u64,
    pub n_lower: f64,
    pub projection_error: f64,
    pub projection_bound: f64,
    pub sparsify: sparsify::SparsifyLinfResult,
    pub bound: f64,
}

impl BesovRun {
    /// Sum of the measured projection and sparsification sup-errors.
    pub fn total_error(&self) -> f64 {
        self.projection_error + self.sparsify.linf_error.value
    }
}

pub fn besov_run(p: f64, theta: f64, d: usize, m: usize, cfg: &ExperimentConfig, seed: u64) -> Result<BesovRun> {
    let prm = BesovParams::embedding(p, theta)?;
    let n = besov::choose_n(&prm, d, m)?;
    let n_lower = besov::choose_n_lower(&prm, d, m)?;
    let levels = n.trailing_zeros() + 1 + cfg.level_slack;
    let f = besov::random_besov_ball(&prm, d, levels, cfg.terms_per_block, seed, cfg.decay)?;
    let head = besov::project(&f, n);
    let tail = f.sub(&head)?;
    let projection_error = trigpoly::lq_norm_capped(&tail, f64::INFINITY, cfg.oversample, cfg.grid_cap)?.value;
    let projection_bound = besov::projection_tail_bound(&prm, d, n, 1.0)?;
    let q_box = Cuboid::symmetric(&vec![n; d])?;
    let sc = SparsifyConfig {
        m,
        q: 2.0,
        max_attempts: cfg.max_attempts,
        oversample: cfg.oversample,
        seed: rng::mix(&[seed, 1]),
        grid_cap: cfg.grid_cap,
    };
    let sparsify = sparsify::sparsify_linf(&head, &q_box, &sc, theta)?;
    let bound = besov::thm52_bound(&prm, d, m)?;
    Ok(BesovRun { n, n_lower, projection_error, projection_bound, sparsify, bound })
}

/// Records of a finished run, sorted by `(mode, d, m, q, theta, trial)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
}

impl RunOutput {
    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| r.violates()).count()
    }

    /// 0 iff no asserted record exceeds its bound beyond tolerance.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.violations() > 0)
    }
}

/// Executes the cross-product described by `cfg` and writes `cfg.out` if set.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mode = cfg.mode()?;
    let jobs = jobs(cfg, mode);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config { field: "workers".into(), msg: e.to_string() })?;
    let results: Vec<Result<ExperimentRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let seed = trial_seed(cfg.seed, mode, job.d, job.m, job.q, job.theta, job.trial);
                let start = Instant::now();
                let o = run_job(cfg, mode, job, seed)?;
                let wall_ms = if cfg.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
                Ok(ExperimentRecord {
                    mode,
                    d: job.d,
                    m: job.m,
                    q: o.q,
                    theta: job.theta,
                    seed,
                    trial: job.trial,
                    measured: o.measured,
                    bound: o.bound,
                    ratio: ratio(o.measured, o.bound),
                    accepted: o.accepted,
                    attempts: o.attempts,
                    wall_ms,
                    asserted: o.asserted,
                    tolerance: o.tolerance,
                })
            })
            .collect()
    });
    let mut records = results.into_iter().collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.key_cmp(b));
    if let Some(path) = &cfg.out {
        write_csv(&records, std::fs::File::create(path)?)?;
    }
    Ok(RunOutput { records })
}

/// Aggregate over one `(mode, d, theta)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mode: Mode,
    pub d: usize,
    pub theta: f64,
    pub count: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub acceptance_rate: f64,
    pub mean_attempts: f64,
}

/// Per-group statistics; independent of the order of `records`.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Mode, usize, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        // theta >= 0, so bit order equals numeric order
        groups.entry((r.mode, r.d, r.theta.to_bits())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((mode, d, theta), mut rs)| {
            rs.sort_by(|a, b| a.key_cmp(b));
            let n = rs.len() as f64;
            SummaryRow {
                mode,
                d,
                theta: f64::from_bits(theta),
                count: rs.len(),
                max_ratio: rs.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max),
                mean_ratio: rs.iter().map(|r| r.ratio).sum::<f64>() / n,
                acceptance_rate: rs.iter().filter(|r| r.accepted).count() as f64 / n,
                mean_attempts: rs.iter().map(|r| r.attempts as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Table of the Besov bounds over `dims x m_values x p_values x theta_values`
/// as CSV; inadmissible combinations are skipped.
pub fn write_bounds_table<W: std::io::Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "m", "p", "theta", "choose_n", "thm52_bound", "cor53_bound", "cor53_index"])?;
    for &d in &cfg.dims {
        for &m in &cfg.m_values {
            for &p in &cfg.p_values {
                for &theta in &cfg.theta_values {
                    let Ok(prm) = BesovParams::embedding(p, theta) else { continue };
                    let (Ok(n), Ok(b), Ok(c)) =
                        (besov::choose_n(&prm, d, m), besov::thm52_bound(&prm, d, m), besov::cor53_bound(&prm, d, m))
                    else {
                        continue;
                    };
                    w.write_record([
                        d.to_string(),
                        m.to_string(),
                        p.to_string(),
                        theta.to_string(),
                        n.to_string(),
                        b.to_string(),
                        c.to_string(),
                        besov::cor53_index(d, m).to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
