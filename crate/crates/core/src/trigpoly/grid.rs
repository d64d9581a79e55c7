//! Values of a sparse polynomial on uniform tensor grids.
//!
//! The grid is processed in slabs along axis 0. For each slab the remaining
//! axes are filled from the spectrum (frequencies reduced modulo the grid
//! size, so aliasing sums exactly as the point values require) and
//! transformed with an unnormalized inverse FFT. Slabs are independent and
//! are collected in index order, so results do not depend on scheduling.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::SparseSpectrum;
use crate::error::{invalid, Error, Result};

/// Default cap on the number of grid points: `2^28`.
pub const DEFAULT_GRID_CAP: usize = 1 << 28;

/// Complex values on the grid `{(j_1/M_1, ..., j_d/M_d)}`, row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    values: Vec<Complex64>,
}

impl Grid {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.values[self.flat_index(index)]
    }

    fn flat_index(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len());
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &m)| {
            assert!(i < m);
            acc * m + i
        })
    }

    /// Multi-index of flat position `flat`.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for (slot, &m) in idx.iter_mut().zip(&self.shape).rev() {
            *slot = flat % m;
            flat /= m;
        }
        idx
    }

    /// Torus coordinates of grid multi-index `index`.
    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        index.iter().zip(&self.shape).map(|(&j, &m)| j as f64 / m as f64).collect()
    }
}

/// `t` on the uniform grid with `points_per_axis[j]` points along axis `j`.
pub fn grid_values(t: &SparseSpectrum, points_per_axis: &[usize]) -> Result<Grid> {
    grid_values_capped(t, points_per_axis, DEFAULT_GRID_CAP)
}

pub fn grid_values_capped(t: &SparseSpectrum, points_per_axis: &[usize], cap: usize) -> Result<Grid> {
    let slabs = reduce_grid(t, points_per_axis, cap, |vals| vals.to_vec())?;
    Ok(Grid { shape: points_per_axis.to_vec(), values: slabs.concat() })
}

fn check_shape(dim: usize, shape: &[usize], cap: usize) -> Result<()> {
    if shape.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: shape.len() });
    }
    if shape.iter().any(|&m| m == 0) {
        return Err(invalid("grid sizes must be >= 1"));
    }
    let requested = shape.iter().fold(1u128, |acc, &m| acc.saturating_mul(m as u128));
    if requested > cap as u128 {
        return Err(Error::GridTooLarge { requested, cap });
    }
    Ok(())
}

struct AxisPlan {
    len: usize,
    stride: usize,
    fft: Arc<dyn Fft<f64>>,
}

fn plan_axes(shape: &[usize]) -> Vec<AxisPlan> {
    let mut planner = FftPlanner::new();
    let mut stride = 1;
    let mut plans: Vec<AxisPlan> = shape
        .iter()
        .rev()
        .map(|&len| {
            let p = AxisPlan { len, stride, fft: planner.plan_fft_inverse(len) };
            stride *= len;
            p
        })
        .collect();
    plans.reverse();
    plans
}

/// Applies the unnormalized inverse DFT along every axis of `buf`.
fn transform(buf: &mut [Complex64], plans: &[AxisPlan], line: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
    let total = buf.len();
    for p in plans {
        if p.len == 1 {
            continue;
        }
        let need = p.fft.get_inplace_scratch_len();
        if scratch.len() < need {
            scratch.resize(need, Complex64::default());
        }
        if p.stride == 1 {
            p.fft.process_with_scratch(buf, &mut scratch[..need]);
            continue;
        }
        line.resize(p.len, Complex64::default());
        let block = p.len * p.stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..p.stride {
                let base = outer + inner;
                for (l, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + l * p.stride];
                }
                p.fft.process_with_scratch(line, &mut scratch[..need]);
                for (l, v) in line.iter().enumerate() {
                    buf[base + l * p.stride] = *v;
                }
            }
        }
    }
}

/// Evaluates `t` on the grid slab by slab and returns `f(slab)` for each slab
/// of axis 0, in order. For `d = 1` there is a single slab.
pub(crate) fn reduce_grid<R, F>(t: &SparseSpectrum, shape: &[usize], cap: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&[Complex64]) -> R + Sync,
{
    check_shape(t.dim(), shape, cap)?;
    if shape.len() == 1 {
        let m = shape[0];
        let mut buf = vec![Complex64::default(); m];
        for (k, c) in t.iter() {
            buf[k.components()[0].rem_euclid(m as i64) as usize] += c;
        }
        let plans = plan_axes(shape);
        transform(&mut buf, &plans, &mut Vec::new(), &mut Vec::new());
        return Ok(vec![f(&buf)]);
    }

    let m0 = shape[0];
    let rest = &shape[1..];
    let rest_len: usize = rest.iter().product();
    let plans = plan_axes(rest);
    // (k_0 mod M_0, flat index of k_rest mod M_rest, coefficient)
    let terms: Vec<(u64, usize, Complex64)> = t
        .iter()
        .map(|(k, c)| {
            let comps = k.components();
            let idx = comps[1..]
                .iter()
                .zip(rest)
                .fold(0usize, |acc, (&kj, &mj)| acc * mj + kj.rem_euclid(mj as i64) as usize);
            (comps[0].rem_euclid(m0 as i64) as u64, idx, *c)
        })
        .collect();
    let twiddles: Vec<Complex64> =
        (0..m0).map(|r| Complex64::from_polar(1.0, TAU * r as f64 / m0 as f64)).collect();

    let out = (0..m0)
        .into_par_iter()
        .map_init(
            || (vec![Complex64::default(); rest_len], Vec::new(), Vec::new()),
            |(buf, line, scratch), j0| {
                buf.iter_mut().for_each(|v| *v = Complex64::default());
                for &(k0, idx, c) in &terms {
                    let r = ((k0 * j0 as u64) % m0 as u64) as usize;
                    buf[idx] += c * twiddles[r];
                }
                transform(buf, &plans, line, scratch);
                f(buf)
            },
        )
        .collect();
    Ok(out)
}
