//! Randomized `4m`-term approximation in `L_q` and its `L_inf` wrapper.
//!
//! The `2m` largest terms are kept exactly; each remaining term `c_j` is
//! replaced by `c_j / p_j` with probability `p_j` (else dropped), where
//! `p_j = m |c_j| / ||t - t_m||_{A_1}`. A draw is accepted when it keeps at
//! most `2m` tail terms and its `L_q` error is at most twice the analytic
//! bound on the expected error.

use num_complex::Complex64;
use rand::Rng;

use crate::approx::threshold;
use crate::constants::{c_linf, C_EXPECTATION, C_LQ};
use crate::error::{invalid, Result};
use crate::rng::{self, Stream};
use crate::trigpoly::{self, a_theta_norm, rank, Cuboid, Frequency, NormResult, SparseSpectrum, DEFAULT_GRID_CAP};
use crate::vdp::nikolskij_bound;

/// Default number of draws before giving up on acceptance.
pub const DEFAULT_MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyConfig {
    pub m: usize,
    /// Target metric; even integers give exact norms.
    pub q: f64,
    pub max_attempts: usize,
    /// Grid oversampling for non-even `q` and for sup-norms.
    pub oversample: usize,
    pub seed: u64,
    /// Largest grid any norm evaluation may allocate.
    pub grid_cap: usize,
}

impl SparsifyConfig {
    pub fn new(m: usize, q: f64, seed: u64) -> Self {
        SparsifyConfig { m, q, max_attempts: DEFAULT_MAX_ATTEMPTS, oversample: 4, seed, grid_cap: DEFAULT_GRID_CAP }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(invalid("m must be >= 1"));
        }
        if !(self.q >= 2.0) || self.q.is_infinite() {
            return Err(invalid(format!("q must be finite and >= 2, got {}", self.q)));
        }
        if self.max_attempts == 0 {
            return Err(invalid("max_attempts must be >= 1"));
        }
        if self.oversample == 0 {
            return Err(invalid("oversample must be >= 1"));
        }
        if self.grid_cap == 0 {
            return Err(invalid("grid_cap must be >= 1"));
        }
        Ok(())
    }

    /// The regime `m >= q` in which the expectation bound simplifies.
    pub fn m_ge_q(&self) -> bool {
        self.m as f64 >= self.q
    }
}

/// Sampling probabilities of the ranked tail beyond `2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProbabilities {
    /// `(k_j, c_j, p_j)` in ranked order.
    pub entries: Vec<(Frequency, Complex64, f64)>,
    /// `||t - t_m||_{A_1}`
    pub a1_tail: f64,
    /// True if some `m |c_j| / ||t - t_m||_{A_1}` exceeded 1 and was clamped.
    pub clamp_fired: bool,
}

impl TailProbabilities {
    /// `sum p_j`, the expected number of sampled terms.
    pub fn expected_count(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }
}

pub fn tail_probabilities(t: &SparseSpectrum, m: usize) -> TailProbabilities {
    let ranked = rank(t);
    if ranked.len() <= 2 * m {
        return TailProbabilities { entries: Vec::new(), a1_tail: 0.0, clamp_fired: false };
    }
    let a1_tail: f64 = ranked.moduli().skip(m).sum();
    let mut clamp_fired = false;
    let entries = ranked.order[2 * m..]
        .iter()
        .map(|(k, c)| {
            let raw = m as f64 * c.norm() / a1_tail;
            clamp_fired |= raw > 1.0;
            (k.clone(), *c, raw.min(1.0))
        })
        .collect();
    TailProbabilities { entries, a1_tail, clamp_fired }
}

/// One draw of the sampled tail, consuming the stream in ranked order.
pub fn draw_tail(probs: &TailProbabilities, dim: usize, r: &mut Stream) -> SparseSpectrum {
    let mut out = SparseSpectrum::new(dim);
    for (k, c, p) in &probs.entries {
        if r.gen::<f64>() < *p {
            out.accumulate(k.clone(), c / *p).expect("dimension matches source");
        }
    }
    out
}

pub fn sample_tail(t: &SparseSpectrum, m: usize, r: &mut Stream) -> SparseSpectrum {
    draw_tail(&tail_probabilities(t, m), t.dim(), r)
}

/// Bound on `E ||t - t_{2m} - s_tail||_{L_q}`.
///
/// For `m >= q` this is `(8 + 16/3) sqrt(q/m) ||t - t_m||_{A_1}`; below that
/// regime the unsimplified `8 sqrt(q/m) A + (16/3)(q/m) A` is used, which
/// remains valid for every `m`.
pub fn expectation_bound(q: f64, m: usize, a1_tail: f64) -> f64 {
    let mf = m as f64;
    if mf >= q {
        C_EXPECTATION * (q / mf).sqrt() * a1_tail
    } else {
        8.0 * (q / mf).sqrt() * a1_tail + 16.0 / 3.0 * q / mf * a1_tail
    }
}

/// `C sqrt(q) m^{1/2 - 1/theta} ||t||_{A_theta}` with `C = 26 + 2/3`.
pub fn lq_theorem_bound(q: f64, m: usize, theta: f64, a_theta: f64) -> f64 {
    C_LQ * q.sqrt() * (m as f64).powf(0.5 - 1.0 / theta) * a_theta
}

/// `C_1 sqrt(d) m^{1/2 - 1/theta} (log #Q)^{1/2} ||t||_{A_theta}`.
pub fn linf_theorem_bound(d: usize, m: usize, theta: f64, log_card: f64, a_theta: f64) -> f64 {
    c_linf() * (d as f64).sqrt() * (m as f64).powf(0.5 - 1.0 / theta) * log_card.sqrt() * a_theta
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyResult {
    pub approximant: SparseSpectrum,
    pub attempts_used: usize,
    /// `c_m`, the number of sampled tail terms kept.
    pub sampled_count: usize,
    /// `||t - approximant||_{L_q}`
    pub measured_error: NormResult,
    pub expectation_bound: f64,
    /// `2 * expectation_bound`
    pub acceptance_bound: f64,
    pub theorem_bound: f64,
    pub accepted: bool,
    pub q: f64,
    pub m_ge_q: bool,
    pub clamp_fired: bool,
}

struct Attempt {
    approximant: SparseSpectrum,
    sampled_count: usize,
    error: NormResult,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1], got {theta}")));
    }
    Ok(())
}

/// Exact `L_q` error where the grid fits under the cap; for even `q` past the
/// cap, the oversampled rectangle rule instead.
fn measure(residual: &SparseSpectrum, cfg: &SparsifyConfig) -> Result<NormResult> {
    match trigpoly::lq_norm_capped(residual, cfg.q, cfg.oversample, cfg.grid_cap) {
        Err(crate::Error::GridTooLarge { .. }) if trigpoly::even_exponent(cfg.q).is_some() => {
            trigpoly::grid_lq_norm_capped(residual, cfg.q, cfg.oversample.max(2), cfg.grid_cap)
        }
        other => other,
    }
}

/// Randomized `4m`-term approximation of `t` in `L_q`.
///
/// Attempt `i` draws from the stream `(cfg.seed, i)`. If no draw is accepted
/// the result carries `accepted = false` and the best draw with `c_m <= 2m`;
/// if there is none, the deterministic `4m`-term head is returned so the
/// support bound still holds.
pub fn sparsify_lq(t: &SparseSpectrum, cfg: &SparsifyConfig, theta: f64) -> Result<SparsifyResult> {
    cfg.validate()?;
    check_theta(theta)?;
    if t.is_empty() {
        return Err(crate::Error::ZeroPolynomial);
    }
    let m = cfg.m;
    let theorem_bound = lq_theorem_bound(cfg.q, m, theta, a_theta_norm(t, theta)?);
    let probs = tail_probabilities(t, m);
    let base = |approximant, sampled_count, error, attempts_used, accepted, eb: f64| SparsifyResult {
        approximant,
        attempts_used,
        sampled_count,
        measured_error: error,
        expectation_bound: eb,
        acceptance_bound: 2.0 * eb,
        theorem_bound,
        accepted,
        q: cfg.q,
        m_ge_q: cfg.m_ge_q(),
        clamp_fired: probs.clamp_fired,
    };

    if probs.entries.is_empty() {
        let zero = trigpoly::lq_norm_capped(&SparseSpectrum::new(t.dim()), cfg.q, cfg.oversample, cfg.grid_cap)?;
        return Ok(base(t.clone(), 0, zero, 1, true, 0.0));
    }

    let split = threshold(t, 2 * m);
    let eb = expectation_bound(cfg.q, m, probs.a1_tail);
    let mut best_sparse: Option<Attempt> = None;
    for attempt in 0..cfg.max_attempts {
        let mut r = rng::stream(cfg.seed, attempt as u64);
        let sampled = draw_tail(&probs, t.dim(), &mut r);
        let residual = split.tail.sub(&sampled)?;
        let error = measure(&residual, cfg)?;
        let c_m = sampled.len();
        let sparse_ok = c_m <= 2 * m;
        if sparse_ok && error.value <= 2.0 * eb * (1.0 + error.est_rel_error) {
            let approximant = split.head.add(&sampled)?;
            return Ok(base(approximant, c_m, error, attempt + 1, true, eb));
        }
        if sparse_ok && best_sparse.as_ref().is_none_or(|b| error.value < b.error.value) {
            best_sparse = Some(Attempt { approximant: split.head.add(&sampled)?, sampled_count: c_m, error });
        }
    }
    let fallback = match best_sparse {
        Some(a) => a,
        None => {
            let head = threshold(t, 4 * m).head;
            let error = measure(&t.sub(&head)?, cfg)?;
            Attempt { approximant: head, sampled_count: 0, error }
        }
    };
    Ok(base(fallback.approximant, fallback.sampled_count, fallback.error, cfg.max_attempts, false, eb))
}

/// `ceil(2 d log #Q)` rounded up to an even integer, at least 2.
pub fn linf_exponent(d: usize, log_card: f64) -> u32 {
    let q = (2.0 * d as f64 * log_card).ceil().max(2.0) as u32;
    q + q % 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyLinfResult {
    /// `L_q` run with `q = q_used`; the approximant is in the original frame.
    pub lq: SparsifyResult,
    pub q_used: u32,
    /// Shift applied to recenter `Q` at the origin.
    pub shift: Frequency,
    pub half_widths: Vec<u64>,
    /// Grid sup-norm of `t - approximant` (a lower bound).
    pub linf_error: NormResult,
    pub linf_theorem_bound: f64,
    /// Nikol'skij constant for `[-N, N]` times the measured `L_q` error.
    pub nikolskij_chain_bound: f64,
}

/// `4m`-term approximation of `t in T(Q)` in `L_inf`, via the `L_q` result
/// at `q ~ 2 d log #Q`. Only `m`, `max_attempts`, `oversample` and `seed` of
/// `cfg` are used; `q` is replaced.
pub fn sparsify_linf(t: &SparseSpectrum, q_box: &Cuboid, cfg: &SparsifyConfig, theta: f64) -> Result<SparsifyLinfResult> {
    check_theta(theta)?;
    match q_box.cardinality() {
        Some(n) if n >= 2 => {}
        _ => return Err(invalid("#Q must be >= 2 and fit in 128 bits")),
    }
    let (centered, shift) = trigpoly::recenter(t, q_box)?;
    let d = t.dim();
    let log_card = q_box.log_cardinality();
    let q_used = linf_exponent(d, log_card);
    let lq_cfg = SparsifyConfig { q: q_used as f64, ..cfg.clone() };
    let mut lq = sparsify_lq(&centered, &lq_cfg, theta)?;

    let residual = centered.sub(&lq.approximant)?;
    let linf_error = trigpoly::lq_norm_capped(&residual, f64::INFINITY, cfg.oversample, cfg.grid_cap)?;
    let half_widths = q_box.half_widths();
    let n: Vec<u64> = half_widths.iter().map(|&x| x.max(1)).collect();
    let nikolskij_chain_bound = nikolskij_bound(q_used as f64, &n, d)? * lq.measured_error.value;
    let linf_theorem_bound = linf_theorem_bound(d, cfg.m, theta, log_card, a_theta_norm(t, theta)?);
    lq.approximant = lq.approximant.shifted(&shift.negated())?;
    Ok(SparsifyLinfResult { lq, q_used, shift, half_widths, linf_error, linf_theorem_bound, nikolskij_chain_bound })
}
