//! Greedy m-term thresholding and Stechkin-type tail bounds.

use crate::error::{invalid, Result};
use crate::trigpoly::{lp_of_moduli, rank, SparseSpectrum};

/// Split of a spectrum into its `m` largest terms and the remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub head: SparseSpectrum,
    pub tail: SparseSpectrum,
    pub m_requested: usize,
    /// `min(m, J)`
    pub m_effective: usize,
}

/// Keeps the first `m` entries of the ranked spectrum.
pub fn threshold(t: &SparseSpectrum, m: usize) -> ThresholdResult {
    let ranked = rank(t);
    let m_effective = m.min(ranked.len());
    ThresholdResult {
        head: ranked.slice_spectrum(0..m_effective),
        tail: ranked.slice_spectrum(m_effective..ranked.len()),
        m_requested: m,
        m_effective,
    }
}

/// `(m+1)^{-(1/theta - 1/gamma)} * a_theta`, with `gamma = inf` allowed.
pub fn stechkin_bound(m: usize, theta: f64, gamma: f64, a_theta: f64) -> Result<f64> {
    if !(theta > 0.0) || theta.is_infinite() {
        return Err(invalid(format!("theta must be in (0, inf), got {theta}")));
    }
    if !(gamma > theta) {
        return Err(invalid(format!("need theta < gamma, got theta = {theta}, gamma = {gamma}")));
    }
    let exponent = 1.0 / theta - 1.0 / gamma;
    Ok((m as f64 + 1.0).powf(-exponent) * a_theta)
}

/// `A_gamma` norm of the ranked tail beyond the `m` largest terms; this is
/// the best m-term error in `A_gamma`.
pub fn tail_gamma_norm(t: &SparseSpectrum, m: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(lp_of_moduli(rank(t).moduli().skip(m), gamma))
}
