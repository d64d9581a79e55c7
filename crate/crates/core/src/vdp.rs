//! Modified de la Vallée Poussin multiplier and the sharpened Nikol'skij
//! inequality.
//!
//! Per axis the weight is 1 on `|k| <= N`, decreases linearly to 0 on
//! `N < |k| <= (2d+1)N` with slope `1/(2dN)`, and vanishes beyond. The ramp
//! length depends on the ambient dimension `d`.

use std::f64::consts::E;

use crate::error::{invalid, Error, Result};
use crate::trigpoly::{self, Frequency, SparseSpectrum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VdpWeights {
    dim: usize,
    n: Vec<u64>,
}

impl VdpWeights {
    pub fn new(n: Vec<u64>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if n.iter().any(|&x| x == 0) {
            return Err(invalid("spectral parameters N_j must be positive"));
        }
        Ok(VdpWeights { dim: n.len(), n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> &[u64] {
        &self.n
    }

    /// One-dimensional weight on axis `axis` at integer `k`.
    pub fn axis_weight(&self, axis: usize, k: i64) -> f64 {
        let n = self.n[axis];
        let d = self.dim as u64;
        let a = k.unsigned_abs();
        if a <= n {
            1.0
        } else if a <= (2 * d + 1) * n {
            ((2 * d + 1) * n - a) as f64 / (2 * d * n) as f64
        } else {
            0.0
        }
    }

    /// Largest frequency with nonzero weight on `axis`, `(2d+1) N_j`.
    pub fn support_radius(&self, axis: usize) -> u64 {
        (2 * self.dim as u64 + 1) * self.n[axis]
    }
}

/// `v_k = prod_j v_{k_j}`.
pub fn weight(w: &VdpWeights, k: &Frequency) -> Result<f64> {
    if k.dim() != w.dim {
        return Err(Error::DimensionMismatch { expected: w.dim, found: k.dim() });
    }
    Ok(k.components().iter().enumerate().map(|(j, &kj)| w.axis_weight(j, kj)).product())
}

/// `V_N f`: coefficientwise multiplication by `v_k`.
pub fn apply(w: &VdpWeights, f: &SparseSpectrum) -> Result<SparseSpectrum> {
    if f.dim() != w.dim {
        return Err(Error::DimensionMismatch { expected: w.dim, found: f.dim() });
    }
    Ok(f.map_coefficients(|k, c| {
        let v: f64 = k.components().iter().enumerate().map(|(j, &kj)| w.axis_weight(j, kj)).product();
        if v == 1.0 {
            c
        } else {
            c * v
        }
    }))
}

fn axis_square_sum(w: &VdpWeights, axis: usize) -> f64 {
    let r = w.support_radius(axis) as i64;
    (-r..=r).map(|k| w.axis_weight(axis, k).powi(2)).sum()
}

/// `||V_N||_{L_2 -> L_inf} = (sum_k v_k^2)^{1/2}`, via the tensor structure.
pub fn l2_to_linf_exact(w: &VdpWeights) -> f64 {
    (0..w.dim).map(|j| axis_square_sum(w, j)).product::<f64>().sqrt()
}

/// `(2d+2)^{d/2} prod_j N_j^{1/2}`.
pub fn l2_to_linf_paper_bound(w: &VdpWeights) -> f64 {
    let d = w.dim as f64;
    (2.0 * d + 2.0).powf(d / 2.0) * w.n.iter().map(|&x| (x as f64).sqrt()).product::<f64>()
}

/// `(1 + 1/d)^d`, the analytic bound on the kernel `L_1` norm.
pub fn kernel_norm_analytic_bound(dim: usize) -> f64 {
    (1.0 + 1.0 / dim as f64).powi(dim as i32)
}

/// Rectangle-rule `L_1` norm of the kernel `sum_k v_k exp(2 pi i k.x)`.
///
/// The kernel is a tensor product, so this is the product of the 1-D norms,
/// each on `grid_oversample * (2(2d+1)N_j + 1)` points.
pub fn linf_to_linf_kernel_norm(w: &VdpWeights, grid_oversample: usize) -> Result<f64> {
    if grid_oversample < 8 {
        return Err(invalid(format!("grid_oversample must be >= 8, got {grid_oversample}")));
    }
    let mut total = 1.0;
    for axis in 0..w.dim {
        let r = w.support_radius(axis) as i64;
        let kernel = SparseSpectrum::from_terms(
            1,
            (-r..=r).map(|k| (Frequency::new(vec![k]), w.axis_weight(axis, k).into())),
        )?;
        let m = grid_oversample * (2 * r as usize + 1);
        let g = trigpoly::grid_values(&kernel, &[m])?;
        total *= g.values().iter().map(|v| v.norm()).sum::<f64>() / m as f64;
    }
    Ok(total)
}

/// `e^{1-2/q} (2d+2)^{d/q} prod_j N_j^{1/q}`.
pub fn nikolskij_bound(q: f64, n: &[u64], d: usize) -> Result<f64> {
    if q.is_nan() || q < 2.0 {
        return Err(invalid(format!("q must be >= 2, got {q}")));
    }
    if n.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: n.len() });
    }
    if q.is_infinite() {
        return Ok(E);
    }
    let df = d as f64;
    let prod_n: f64 = n.iter().map(|&x| (x as f64).powf(1.0 / q)).product();
    Ok(E.powf(1.0 - 2.0 / q) * (2.0 * df + 2.0).powf(df / q) * prod_n)
}

/// Outcome of checking one polynomial against the Nikol'skij inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct NikolskijCheck {
    /// grid `||t||_inf` / exact `||t||_q`
    pub ratio: f64,
    pub bound: f64,
    pub bound_ok: bool,
}

/// Compares grid-estimated `||t||_inf / ||t||_q` with [`nikolskij_bound`],
/// `N` taken as the componentwise extent of the support. The sup-norm is a
/// grid lower bound, so `bound_ok == false` is a genuine counterexample.
pub fn verify_nikolskij(t: &SparseSpectrum, q: u32, oversample: usize) -> Result<NikolskijCheck> {
    if t.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let linf = trigpoly::lq_norm(t, f64::INFINITY, oversample)?.value;
    verify_nikolskij_with_sup(t, q, linf)
}

/// As [`verify_nikolskij`], reusing a previously computed sup-norm estimate.
pub fn verify_nikolskij_with_sup(t: &SparseSpectrum, q: u32, linf: f64) -> Result<NikolskijCheck> {
    if t.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    if trigpoly::even_exponent(q as f64).is_none() {
        return Err(invalid(format!("q must be an even integer >= 2, got {q}")));
    }
    let lq = trigpoly::lq_norm(t, q as f64, 1)?.value;
    let n: Vec<u64> = t.extent().iter().map(|&x| x.max(1)).collect();
    let bound = nikolskij_bound(q as f64, &n, t.dim())?;
    let ratio = linf / lq;
    Ok(NikolskijCheck { ratio, bound, bound_ok: ratio <= bound })
}
