//! Dyadic blocks, the mixed-smoothness Besov quasi-norm, projections onto
//! `[-N, N]^d`, and the resulting best m-term bounds.

use std::collections::BTreeMap;
use std::f64::consts::E;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use crate::constants::c_besov;
use crate::error::{invalid, Result};
use crate::rng;
use crate::trigpoly::{self, lp_of_moduli, Frequency, SparseSpectrum};

/// Levels `l` of the block `I_l = I_{l_1} x ... x I_{l_d}` with `I_0 = {0}`
/// and `I_n = {k : 2^{n-1} <= |k| < 2^n}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicBlockIndex {
    pub levels: Vec<u32>,
}

impl DyadicBlockIndex {
    /// `|l|_1`
    pub fn level_sum(&self) -> u32 {
        self.levels.iter().sum()
    }

    /// `#I_l = 2^{|l|_1}`
    pub fn cardinality(&self) -> u128 {
        1u128 << self.level_sum()
    }

    /// The `i`-th frequency of the block, for `i < cardinality()`.
    fn element(&self, mut i: u128) -> Frequency {
        Frequency::new(
            self.levels
                .iter()
                .map(|&n| {
                    if n == 0 {
                        return 0;
                    }
                    let size = 1u128 << n;
                    let j = i % size;
                    i /= size;
                    let magnitude = (1i64 << (n - 1)) + (j / 2) as i64;
                    if j % 2 == 0 {
                        magnitude
                    } else {
                        -magnitude
                    }
                })
                .collect(),
        )
    }
}

/// `0` for `k = 0`, else `floor(log2 |k|) + 1`.
pub fn level(k: i64) -> u32 {
    64 - k.unsigned_abs().leading_zeros()
}

pub fn block_of(k: &Frequency) -> DyadicBlockIndex {
    DyadicBlockIndex { levels: k.components().iter().map(|&x| level(x)).collect() }
}

/// Parameters of `B^r_{p,theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub p: f64,
    /// `inf` selects the sup over blocks.
    pub theta: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(p: f64, theta: f64, r: f64) -> Result<Self> {
        if !(p > 1.0) || p.is_infinite() {
            return Err(invalid(format!("p must lie in (1, inf), got {p}")));
        }
        if !(theta > 0.0) {
            return Err(invalid(format!("theta must be positive, got {theta}")));
        }
        if !(r >= 0.0) || r.is_infinite() {
            return Err(invalid(format!("r must be finite and >= 0, got {r}")));
        }
        Ok(BesovParams { p, theta, r })
    }

    /// The space `B^{1/theta - 1/2}_{p,theta}` embedded in `A_theta`.
    pub fn embedding(p: f64, theta: f64) -> Result<Self> {
        BesovParams::new(p, theta, 1.0 / theta - 0.5)
    }

    /// `2 <= p < inf`, `0 < theta <= 1`, `(p, theta) != (2, 1)`.
    pub fn admissible(&self) -> bool {
        self.p >= 2.0 && self.theta <= 1.0 && !(self.p == 2.0 && self.theta == 1.0)
    }

    /// `1/theta - 1/2 - 1/p`, the decay rate of the projection tail.
    pub fn tail_exponent(&self) -> f64 {
        1.0 / self.theta - 0.5 - 1.0 / self.p
    }

    fn require_regime(&self) -> Result<()> {
        if !self.admissible() {
            return Err(invalid(format!("(p, theta) = ({}, {}) is not admissible", self.p, self.theta)));
        }
        if !(self.tail_exponent() > 0.0) {
            return Err(invalid(format!("1/theta - 1/2 - 1/p = {} must be positive", self.tail_exponent())));
        }
        Ok(())
    }
}

/// Splits `f` into its dyadic blocks.
pub fn blocks(f: &SparseSpectrum) -> BTreeMap<DyadicBlockIndex, SparseSpectrum> {
    let mut out: BTreeMap<DyadicBlockIndex, SparseSpectrum> = BTreeMap::new();
    for (k, c) in f.iter() {
        out.entry(block_of(k))
            .or_insert_with(|| SparseSpectrum::new(f.dim()))
            .insert(k.clone(), *c)
            .expect("frequencies of f are distinct");
    }
    out
}

/// `(sum_l 2^{|l|_1 r theta} ||f_l||_p^theta)^{1/theta}` over the blocks
/// `f_l` of `f`. Exact for even `p`.
pub fn besov_norm(f: &SparseSpectrum, prm: &BesovParams, oversample: usize) -> Result<f64> {
    let mut weighted = Vec::new();
    for (idx, block) in blocks(f) {
        let norm = trigpoly::lq_norm(&block, prm.p, oversample)?.value;
        weighted.push((idx.level_sum() as f64 * prm.r).exp2() * norm);
    }
    Ok(lp_of_moduli(weighted.into_iter(), prm.theta))
}

/// Restriction of `f` to `[-N, N]^d`.
pub fn project(f: &SparseSpectrum, n: u64) -> SparseSpectrum {
    f.filtered(|k| k.max_abs() <= n)
}

/// `e^{1-2/p} (d+1)^{d/p} N^{-(1/theta - 1/2 - 1/p)} * norm`, bounding
/// `||f - P_N f||_inf` for `N` a power of two.
pub fn projection_tail_bound(prm: &BesovParams, d: usize, n: u64, besov_norm_value: f64) -> Result<f64> {
    prm.require_regime()?;
    if n == 0 {
        return Err(invalid("N must be positive"));
    }
    let df = d as f64;
    Ok(E.powf(1.0 - 2.0 / prm.p) * (df + 1.0).powf(df / prm.p) * (n as f64).powf(-prm.tail_exponent()) * besov_norm_value)
}

/// `((d+1)^{d/p} m^{1/theta - 1/2})^{1/(1/theta - 1/2 - 1/p)}`, the lower end
/// of the admissible range for `N`.
pub fn choose_n_lower(prm: &BesovParams, d: usize, m: usize) -> Result<f64> {
    Ok(choose_n_log2_lower(prm, d, m)?.exp2())
}

fn choose_n_log2_lower(prm: &BesovParams, d: usize, m: usize) -> Result<f64> {
    prm.require_regime()?;
    if d == 0 || m == 0 {
        return Err(invalid("d and m must be positive"));
    }
    let df = d as f64;
    Ok((df / prm.p * (df + 1.0).log2() + (1.0 / prm.theta - 0.5) * (m as f64).log2()) / prm.tail_exponent())
}

/// Smallest power of two `N = 2^l`, `l >= 1`, at or above
/// [`choose_n_lower`]. The result lies in `[lower, 2 lower]`.
pub fn choose_n(prm: &BesovParams, d: usize, m: usize) -> Result<u64> {
    let log2_lower = choose_n_log2_lower(prm, d, m)?;
    let l = ((log2_lower - 1e-12).ceil() as i64).max(1);
    if l > 62 {
        return Err(invalid(format!("N = 2^{l} is too large")));
    }
    let lf = l as f64;
    if !(lf >= log2_lower - 1e-9 && lf <= log2_lower + 1.0 + 1e-9) {
        return Err(invalid(format!("N = 2^{l} outside [2^{log2_lower}, 2^{}]", log2_lower + 1.0)));
    }
    Ok(1u64 << l)
}

fn require_dm(d: usize, m: usize) -> Result<()> {
    if d.saturating_mul(m) < 2 {
        return Err(invalid(format!("need d m >= 2, got d = {d}, m = {m}")));
    }
    Ok(())
}

/// `C_2 d (1/theta - 1/2 - 1/p)^{-1/2} max{(d/p)^{1/2}, (1/theta - 1/2)^{1/2}}
///  m^{-(1/theta - 1/2)} log(dm)^{1/2}` with `C_2 = C_1 + 3e`.
pub fn thm52_bound(prm: &BesovParams, d: usize, m: usize) -> Result<f64> {
    prm.require_regime()?;
    require_dm(d, m)?;
    let (df, mf) = (d as f64, m as f64);
    let s = 1.0 / prm.theta - 0.5;
    Ok(c_besov()
        * df
        * prm.tail_exponent().powf(-0.5)
        * (df / prm.p).sqrt().max(s.sqrt())
        * mf.powf(-s)
        * (df * mf).ln().sqrt())
}

/// Shape of the sampling-number bound with its unspecified absolute
/// constant set to 1: `d^{3/2} sqrt((2-theta)p / ((2-theta)p - 2 theta))
/// m^{-(1/theta - 1/2)} log(dm)^{1/2}`. Not a numeric upper bound.
pub fn cor53_bound(prm: &BesovParams, d: usize, m: usize) -> Result<f64> {
    if !prm.admissible() {
        return Err(invalid(format!("(p, theta) = ({}, {}) is not admissible", prm.p, prm.theta)));
    }
    require_dm(d, m)?;
    let a = (2.0 - prm.theta) * prm.p;
    let denom = a - 2.0 * prm.theta;
    if !(denom > 0.0) {
        return Err(invalid(format!("(2 - theta) p - 2 theta = {denom} must be positive")));
    }
    let (df, mf) = (d as f64, m as f64);
    Ok(df.powf(1.5) * (a / denom).sqrt() * mf.powf(-(1.0 / prm.theta - 0.5)) * (df * mf).ln().sqrt())
}

/// Number of samples `ceil(d^2 log^2 d * m log^3 m)` at which the
/// sampling-number bound applies, with its constant set to 1.
pub fn cor53_index(d: usize, m: usize) -> f64 {
    let (df, mf) = (d as f64, m as f64);
    (df * df * df.ln().powi(2) * mf * mf.ln().powi(3)).ceil()
}

/// All block indices with `|l|_1 <= max_level_sum`, lexicographic.
pub fn block_indices(d: usize, max_level_sum: u32) -> Vec<DyadicBlockIndex> {
    fn rec(d: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<DyadicBlockIndex>) {
        if prefix.len() == d {
            out.push(DyadicBlockIndex { levels: prefix.clone() });
            return;
        }
        for n in 0..=budget {
            prefix.push(n);
            rec(d, budget - n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, max_level_sum, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Random element of the unit sphere of `B^r_{p,theta}`: up to
/// `terms_per_block` distinct uniform frequencies with unit-modulus random
/// phases in every block with `|l|_1 <= max_level_sum`; each block is scaled
/// so that `2^{|l|_1 r} ||f_l||_p = 2^{-decay |l|_1}` (equal weight when
/// `decay = 0`), then the whole spectrum is rescaled to norm 1.
pub fn random_besov_ball(
    prm: &BesovParams,
    d: usize,
    max_level_sum: u32,
    terms_per_block: usize,
    seed: u64,
    decay: f64,
) -> Result<SparseSpectrum> {
    if d == 0 {
        return Err(crate::Error::ZeroDimension);
    }
    if terms_per_block == 0 {
        return Err(invalid("terms_per_block must be positive"));
    }
    if max_level_sum > 40 {
        return Err(invalid(format!("max_level_sum {max_level_sum} is too large")));
    }
    if !(decay >= 0.0) {
        return Err(invalid(format!("decay must be >= 0, got {decay}")));
    }
    let oversample = 4;
    let mut f = SparseSpectrum::new(d);
    for (b, idx) in block_indices(d, max_level_sum).into_iter().enumerate() {
        let mut r = rng::stream(seed, b as u64);
        let card = idx.cardinality() as usize;
        let mut block = SparseSpectrum::new(d);
        for i in index::sample(&mut r, card, terms_per_block.min(card)).into_iter() {
            let phase: f64 = r.gen();
            block.insert(idx.element(i as u128), Complex64::from_polar(1.0, std::f64::consts::TAU * phase))?;
        }
        let ls = idx.level_sum() as f64;
        let norm = trigpoly::lq_norm(&block, prm.p, oversample)?.value;
        let target = (-decay * ls).exp2() / (prm.r * ls).exp2();
        for (k, c) in block.scaled(target / norm).iter() {
            f.insert(k.clone(), *c)?;
        }
    }
    let total = besov_norm(&f, prm, oversample)?;
    Ok(f.scaled(1.0 / total))
}
