//! Absolute constants of the approximation theorems.

use std::f64::consts::{E, SQRT_2};

/// Constant of the `L_q` sparsification bound, `16 + 32/3 = 26 + 2/3`.
pub const C_LQ: f64 = 16.0 + 32.0 / 3.0;

/// Half of [`C_LQ`]: the factor in front of `sqrt(q) m^{-1/2} ||t - t_m||_{A_1}`
/// bounding the expected `L_q` norm of the sampling residual.
pub const C_EXPECTATION: f64 = 8.0 + 16.0 / 3.0;

/// Constant of the `L_inf` bound, `sqrt(2) e^{5/2} C_LQ`.
pub fn c_linf() -> f64 {
    SQRT_2 * (2.5f64).exp() * C_LQ
}

/// Constant of the Besov bound, `c_linf() + 3e`.
pub fn c_besov() -> f64 {
    c_linf() + 3.0 * E
}

/// Published upper bounds for the three constants.
pub const C_LQ_CEILING: f64 = 27.0;
pub const C_LINF_CEILING: f64 = 460.0;
pub const C_BESOV_CEILING: f64 = 468.0;

/// Panics if a computed constant exceeds its published ceiling.
pub fn assert_constants() {
    assert!(C_LQ < C_LQ_CEILING, "C = {C_LQ}");
    assert!(c_linf() < C_LINF_CEILING, "C1 = {}", c_linf());
    assert!(c_besov() < C_BESOV_CEILING, "C2 = {}", c_besov());
}

const _: () = assert!(C_LQ < C_LQ_CEILING);
