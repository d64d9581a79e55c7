//! Multivariate trigonometric polynomials with finite spectrum.
//!
//! A polynomial `t(x) = sum_k c_k exp(2 pi i k.x)` on the torus `[0,1)^d` is
//! stored as a [`SparseSpectrum`]: an ordered map from integer frequencies to
//! nonzero complex coefficients. Norms are computed exactly where possible
//! (Parseval for `q = 2`, exact rectangle rule for even `q`) and otherwise on
//! an oversampled uniform grid.

mod grid;
pub mod io;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use grid::{grid_values, grid_values_capped, Grid, DEFAULT_GRID_CAP};
pub(crate) use grid::reduce_grid;

/// Integer frequency vector `k` in `Z^d`. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(Vec<i64>);

impl Frequency {
    pub fn new(components: Vec<i64>) -> Self {
        Frequency(components)
    }

    pub fn zero(dim: usize) -> Self {
        Frequency(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    /// Componentwise `self + by`.
    pub fn shifted(&self, by: &Frequency) -> Frequency {
        debug_assert_eq!(self.dim(), by.dim());
        Frequency(self.0.iter().zip(&by.0).map(|(a, b)| a + b).collect())
    }

    pub fn negated(&self) -> Frequency {
        Frequency(self.0.iter().map(|a| -a).collect())
    }

    /// `max_j |k_j|`.
    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0)
    }
}

impl From<Vec<i64>> for Frequency {
    fn from(v: Vec<i64>) -> Self {
        Frequency(v)
    }
}

impl From<&[i64]> for Frequency {
    fn from(v: &[i64]) -> Self {
        Frequency(v.to_vec())
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Finite map from frequencies to nonzero complex coefficients.
///
/// Exactly-zero coefficients are never stored. Iteration is in lexicographic
/// frequency order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    dim: usize,
    terms: BTreeMap<Frequency, Complex64>,
}

impl SparseSpectrum {
    /// Empty spectrum in dimension `dim`.
    ///
    /// Panics if `dim == 0`.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SparseSpectrum { dim, terms: BTreeMap::new() }
    }

    /// Builds a spectrum from `(frequency, coefficient)` pairs. Zero
    /// coefficients are dropped; repeated frequencies are an error.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Frequency, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut out = SparseSpectrum::new(dim);
        let mut seen = std::collections::BTreeSet::new();
        for (k, c) in terms {
            out.check_dim(&k)?;
            if !seen.insert(k.clone()) {
                return Err(Error::DuplicateFrequency(k.0));
            }
            if c != Complex64::new(0.0, 0.0) {
                out.terms.insert(k, c);
            }
        }
        Ok(out)
    }

    fn check_dim(&self, k: &Frequency) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: k.dim() });
        }
        Ok(())
    }

    /// Sets the coefficient at `k`, removing the entry if `c == 0`.
    pub fn insert(&mut self, k: Frequency, c: Complex64) -> Result<()> {
        self.check_dim(&k)?;
        if c == Complex64::new(0.0, 0.0) {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, c);
        }
        Ok(())
    }

    /// Adds `c` to the coefficient at `k`.
    pub fn accumulate(&mut self, k: Frequency, c: Complex64) -> Result<()> {
        let cur = self.get(&k).unwrap_or_default();
        self.insert(k, cur + c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Support size `J`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, k: &Frequency) -> Option<Complex64> {
        self.terms.get(k).copied()
    }

    pub fn contains(&self, k: &Frequency) -> bool {
        self.terms.contains_key(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Frequency, &Complex64)> {
        self.terms.iter()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &Frequency> {
        self.terms.keys()
    }

    /// Per-axis `N_j = max_k |k_j|` over the support (zeros if empty).
    pub fn extent(&self) -> Vec<u64> {
        let mut n = vec![0u64; self.dim];
        for k in self.terms.keys() {
            for (nj, kj) in n.iter_mut().zip(k.components()) {
                *nj = (*nj).max(kj.unsigned_abs());
            }
        }
        n
    }

    /// `self + other`, pruning cancelled coefficients.
    pub fn add(&self, other: &SparseSpectrum) -> Result<SparseSpectrum> {
        self.combine(other, 1.0)
    }

    /// `self - other`, pruning cancelled coefficients.
    pub fn sub(&self, other: &SparseSpectrum) -> Result<SparseSpectrum> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SparseSpectrum, sign: f64) -> Result<SparseSpectrum> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.accumulate(k.clone(), c * sign)?;
        }
        Ok(out)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> SparseSpectrum {
        let mut out = SparseSpectrum::new(self.dim);
        for (k, c) in &self.terms {
            let v = c * factor;
            if v != Complex64::new(0.0, 0.0) {
                out.terms.insert(k.clone(), v);
            }
        }
        out
    }

    /// Translates every frequency by `by` (multiplication by `exp(2 pi i by.x)`).
    pub fn shifted(&self, by: &Frequency) -> Result<SparseSpectrum> {
        self.check_dim(by)?;
        Ok(SparseSpectrum {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (k.shifted(by), *c)).collect(),
        })
    }

    /// Keeps the terms whose frequency satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Frequency) -> bool) -> SparseSpectrum {
        SparseSpectrum {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Maps every coefficient, dropping results that are exactly zero.
    pub fn map_coefficients(&self, mut f: impl FnMut(&Frequency, Complex64) -> Complex64) -> SparseSpectrum {
        let mut out = SparseSpectrum::new(self.dim);
        for (k, c) in &self.terms {
            let v = f(k, *c);
            if v != Complex64::new(0.0, 0.0) {
                out.terms.insert(k.clone(), v);
            }
        }
        out
    }
}

/// Coefficients sorted by non-increasing modulus, ties broken by ascending
/// lexicographic frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCoefficients {
    pub order: Vec<(Frequency, Complex64)>,
    pub source_dim: usize,
}

impl RankedCoefficients {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn moduli(&self) -> impl Iterator<Item = f64> + '_ {
        self.order.iter().map(|(_, c)| c.norm())
    }

    /// Spectrum built from the ranked entries `range`.
    pub fn slice_spectrum(&self, range: std::ops::Range<usize>) -> SparseSpectrum {
        let mut out = SparseSpectrum::new(self.source_dim);
        for (k, c) in &self.order[range] {
            out.terms.insert(k.clone(), *c);
        }
        out
    }

    pub fn to_spectrum(&self) -> SparseSpectrum {
        self.slice_spectrum(0..self.order.len())
    }
}

/// Non-increasing rearrangement of the coefficients of `t`.
pub fn rank(t: &SparseSpectrum) -> RankedCoefficients {
    let mut order: Vec<(Frequency, Complex64, f64)> =
        t.iter().map(|(k, c)| (k.clone(), *c, c.norm())).collect();
    // BTreeMap iteration is already lexicographic, so a stable sort on the
    // modulus alone yields the tie-break.
    order.sort_by(|a, b| b.2.total_cmp(&a.2));
    RankedCoefficients {
        order: order.into_iter().map(|(k, c, _)| (k, c)).collect(),
        source_dim: t.dim(),
    }
}

/// `t(x)`, summed in ranked order.
pub fn evaluate(t: &SparseSpectrum, x: &[f64]) -> Result<Complex64> {
    if x.len() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: x.len() });
    }
    Ok(rank(t)
        .order
        .iter()
        .map(|(k, c)| c * unit_exponential(k.components(), x))
        .sum())
}

pub(crate) fn unit_exponential(k: &[i64], x: &[f64]) -> Complex64 {
    let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
    Complex64::from_polar(1.0, TAU * (phase - phase.floor()))
}

/// `(sum |c|^theta)^{1/theta}` over `moduli`; `theta = inf` gives the maximum.
pub(crate) fn lp_of_moduli(moduli: impl Iterator<Item = f64>, theta: f64) -> f64 {
    if theta.is_infinite() {
        return moduli.fold(0.0, f64::max);
    }
    if theta == 1.0 {
        return moduli.sum();
    }
    if theta == 2.0 {
        return moduli.map(|a| a * a).sum::<f64>().sqrt();
    }
    moduli.map(|a| a.powf(theta)).sum::<f64>().powf(1.0 / theta)
}

/// The `A_theta` (quasi-)norm `(sum_k |c_k|^theta)^{1/theta}`.
///
/// Summation runs in ranked order so translated or re-keyed spectra with the
/// same moduli give bit-identical values.
pub fn a_theta_norm(t: &SparseSpectrum, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(invalid(format!("theta must be positive, got {theta}")));
    }
    Ok(lp_of_moduli(rank(t).moduli(), theta))
}

/// How a [`NormResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    ParsevalExact,
    EvenQQuadrature,
    OversampledGrid,
}

impl NormMethod {
    pub fn is_exact(self) -> bool {
        !matches!(self, NormMethod::OversampledGrid)
    }
}

/// A computed `L_q` norm. For `q = inf` the value is a grid maximum and
/// therefore a lower bound on the true sup-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub method: NormMethod,
    /// Grid size per axis; empty for Parseval.
    pub grid_points_per_axis: Vec<usize>,
    pub est_rel_error: f64,
}

impl NormResult {
    fn zero(method: NormMethod) -> Self {
        NormResult { value: 0.0, method, grid_points_per_axis: Vec::new(), est_rel_error: 0.0 }
    }
}

/// Returns `Some(q)` if `q` is an even integer `>= 2`.
pub fn even_exponent(q: f64) -> Option<u32> {
    if q.is_finite() && q >= 2.0 && q.fract() == 0.0 && q <= 1e6 && (q as u64) % 2 == 0 {
        Some(q as u32)
    } else {
        None
    }
}

/// `||t||_{L_q}` with the default grid cap.
pub fn lq_norm(t: &SparseSpectrum, q: f64, oversample: usize) -> Result<NormResult> {
    lq_norm_capped(t, q, oversample, DEFAULT_GRID_CAP)
}

/// `||t||_{L_q}` on the probability torus.
///
/// - `q = 2`: Parseval.
/// - even `q`: rectangle rule on `q N_j + 1` points per axis, exact because
///   `|t|^q` is a trigonometric polynomial of degree `q N_j` per axis.
/// - other finite `q`: rectangle rule on `oversample (2 N_j + 1)` points,
///   with heuristic relative error `1 / oversample^2`.
/// - `q = inf`: grid maximum on `oversample (2 N_j + 1)` points (lower bound).
pub fn lq_norm_capped(t: &SparseSpectrum, q: f64, oversample: usize, cap: usize) -> Result<NormResult> {
    if q.is_nan() || q < 1.0 {
        return Err(invalid(format!("q must be >= 1, got {q}")));
    }
    if q == 2.0 {
        let value = t.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        return Ok(NormResult { value, ..NormResult::zero(NormMethod::ParsevalExact) });
    }
    if let Some(qe) = even_exponent(q) {
        return even_q_norm_capped(t, qe, cap);
    }
    grid_lq_norm_capped(t, q, oversample, cap)
}

/// Rectangle rule on `oversample (2 N_j + 1)` points per axis for any
/// `q >= 1`, including even `q` whose exact grid would be too large.
pub fn grid_lq_norm_capped(t: &SparseSpectrum, q: f64, oversample: usize, cap: usize) -> Result<NormResult> {
    if q.is_nan() || q < 1.0 {
        return Err(invalid(format!("q must be >= 1, got {q}")));
    }
    let min_os = if q.is_infinite() { 1 } else { 2 };
    if oversample < min_os {
        return Err(invalid(format!("oversample must be >= {min_os} for q = {q}, got {oversample}")));
    }
    if t.is_empty() {
        return Ok(NormResult::zero(NormMethod::OversampledGrid));
    }
    let shape: Vec<usize> = t.extent().iter().map(|&n| oversample * (2 * n as usize + 1)).collect();
    let scale = lp_of_moduli(t.iter().map(|(_, c)| c.norm()), 1.0);
    let value = if q.is_infinite() {
        let maxima = reduce_grid(t, &shape, cap, |vals| vals.iter().map(|v| v.norm()).fold(0.0, f64::max))?;
        maxima.into_iter().fold(0.0, f64::max)
    } else {
        let sums = match even_exponent(q) {
            Some(qe) => {
                let half = (qe / 2) as i32;
                reduce_grid(t, &shape, cap, |vals| {
                    vals.iter().map(|v| (v.norm_sqr() / (scale * scale)).powi(half)).sum::<f64>()
                })?
            }
            None => reduce_grid(t, &shape, cap, |vals| vals.iter().map(|v| (v.norm() / scale).powf(q)).sum::<f64>())?,
        };
        let total: usize = shape.iter().product();
        scale * (sums.into_iter().sum::<f64>() / total as f64).powf(1.0 / q)
    };
    Ok(NormResult {
        value,
        method: NormMethod::OversampledGrid,
        grid_points_per_axis: shape,
        est_rel_error: if q.is_infinite() { 0.0 } else { 1.0 / (oversample * oversample) as f64 },
    })
}

/// Exact `||t||_{L_q}` for even `q` by rectangle rule, also at `q = 2`.
pub fn even_q_norm(t: &SparseSpectrum, q: u32) -> Result<NormResult> {
    even_q_norm_capped(t, q, DEFAULT_GRID_CAP)
}

pub fn even_q_norm_capped(t: &SparseSpectrum, q: u32, cap: usize) -> Result<NormResult> {
    if q < 2 || q % 2 != 0 {
        return Err(invalid(format!("q must be an even integer >= 2, got {q}")));
    }
    if t.is_empty() {
        return Ok(NormResult::zero(NormMethod::EvenQQuadrature));
    }
    let shape: Vec<usize> = t.extent().iter().map(|&n| q as usize * n as usize + 1).collect();
    let scale = lp_of_moduli(t.iter().map(|(_, c)| c.norm()), 1.0);
    let half = (q / 2) as i32;
    let sums = reduce_grid(t, &shape, cap, |vals| {
        vals.iter().map(|v| (v.norm_sqr() / (scale * scale)).powi(half)).sum::<f64>()
    })?;
    let total: usize = shape.iter().product();
    let value = scale * (sums.into_iter().sum::<f64>() / total as f64).powf(1.0 / q as f64);
    Ok(NormResult {
        value,
        method: NormMethod::EvenQQuadrature,
        grid_points_per_axis: shape,
        est_rel_error: 0.0,
    })
}

/// Integer cuboid `Q = [A_1, B_1] x ... x [A_d, B_d]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuboid {
    lower: Vec<i64>,
    upper: Vec<i64>,
}

impl Cuboid {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(j) = (0..lower.len()).find(|&j| lower[j] > upper[j]) {
            return Err(invalid(format!("cuboid axis {j}: lower {} > upper {}", lower[j], upper[j])));
        }
        Ok(Cuboid { lower, upper })
    }

    /// `[-N_1, N_1] x ... x [-N_d, N_d]`.
    pub fn symmetric(n: &[u64]) -> Result<Self> {
        Cuboid::new(n.iter().map(|&x| -(x as i64)).collect(), n.iter().map(|&x| x as i64).collect())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    fn side(&self, j: usize) -> u128 {
        (self.upper[j] - self.lower[j]) as u128 + 1
    }

    /// `#Q`, or `None` on overflow.
    pub fn cardinality(&self) -> Option<u128> {
        (0..self.dim()).try_fold(1u128, |acc, j| acc.checked_mul(self.side(j)))
    }

    /// `log #Q` computed axis by axis.
    pub fn log_cardinality(&self) -> f64 {
        (0..self.dim()).map(|j| (self.side(j) as f64).ln()).sum()
    }

    pub fn contains(&self, k: &Frequency) -> bool {
        k.dim() == self.dim()
            && k.components().iter().enumerate().all(|(j, &kj)| self.lower[j] <= kj && kj <= self.upper[j])
    }

    /// `N_j = floor((B_j - A_j + 1) / 2)`.
    pub fn half_widths(&self) -> Vec<u64> {
        (0..self.dim()).map(|j| (self.side(j) / 2) as u64).collect()
    }

    /// `floor((A + B) / 2)` componentwise.
    pub fn midpoint(&self) -> Frequency {
        Frequency((0..self.dim()).map(|j| (self.lower[j] + self.upper[j]).div_euclid(2)).collect())
    }
}

/// Shifts `t` so that the midpoint of `q` moves to the origin.
///
/// Returns the shifted spectrum and the applied shift `-floor((A + B) / 2)`.
/// Its support lies in `[-N, N]` with `N = q.half_widths()`.
pub fn recenter(t: &SparseSpectrum, q: &Cuboid) -> Result<(SparseSpectrum, Frequency)> {
    if q.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: q.dim() });
    }
    if let Some(k) = t.frequencies().find(|k| !q.contains(k)) {
        return Err(Error::OutsideCuboid(k.components().to_vec()));
    }
    let shift = q.midpoint().negated();
    Ok((t.shifted(&shift)?, shift))
}

#[cfg(test)]
mod tests;
