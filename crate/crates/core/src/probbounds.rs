//! Bernstein tail bounds, the tails-to-moments estimate, and Monte Carlo
//! checks of both.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// Parameters of a sub-gamma tail: `sigma2` (sum of second moments),
/// `b` (uniform bound) and `beta` (tail prefactor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailParams {
    pub sigma2: f64,
    pub b: f64,
    pub beta: f64,
}

impl TailParams {
    pub fn new(sigma2: f64, b: f64, beta: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !(b >= 0.0) || !(beta > 0.0) {
            return Err(invalid(format!("need sigma2 >= 0, B >= 0, beta > 0; got {sigma2}, {b}, {beta}")));
        }
        Ok(TailParams { sigma2, b, beta })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// A tail bound both as computed and clipped to a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub raw: f64,
    pub capped: f64,
}

impl TailBound {
    fn new(raw: f64) -> Self {
        TailBound { raw, capped: raw.min(1.0) }
    }
}

fn sub_gamma_tail(s: f64, p: &TailParams, prefactor: f64, num_scale: f64, b_scale: f64) -> Result<TailBound> {
    if !(s >= 0.0) {
        return Err(invalid(format!("s must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(TailBound::new(prefactor));
    }
    let denom = p.sigma2 + p.b * s * b_scale;
    if denom == 0.0 {
        return Ok(TailBound::new(0.0));
    }
    Ok(TailBound::new(prefactor * (-(s * s * num_scale) / denom).exp()))
}

/// `2 exp(-(s^2/2) / (sigma^2 + B s / 3))` for real mean-zero summands.
pub fn bernstein_tail_real(s: f64, p: &TailParams) -> Result<TailBound> {
    sub_gamma_tail(s, p, 2.0, 0.5, 1.0 / 3.0)
}

/// `4 exp(-(s^2/8) / (sigma^2 + B s / 6))` for complex mean-zero summands.
pub fn bernstein_tail_complex(s: f64, p: &TailParams) -> Result<TailBound> {
    sub_gamma_tail(s, p, 4.0, 0.125, 1.0 / 6.0)
}

/// Moment bound `beta^{1/p} sqrt(p) sigma + 2 beta^{1/p} p B` implied by the
/// tail `P(|X| > s) <= beta exp(-s^2 / (sigma^2 + B s))`.
pub fn moment_from_tail(p_moment: f64, params: &TailParams) -> Result<f64> {
    if !(p_moment >= 1.0) {
        return Err(invalid(format!("moment order must be >= 1, got {p_moment}")));
    }
    let root = params.beta.powf(1.0 / p_moment);
    Ok(root * p_moment.sqrt() * params.sigma() + 2.0 * root * p_moment * params.b)
}

/// `x Gamma(x) <= x^x`, evaluated through `ln Gamma`. Holds for `x >= 1`; it
/// fails on `(0, 1)`, where `x Gamma(x) = Gamma(1 + x) > x^x`.
pub fn gamma_power_inequality_holds(x: f64) -> bool {
    x > 0.0 && x.ln() + ln_gamma(x) <= x * x.ln() + 1e-12
}

/// Distribution of one bounded mean-zero summand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SummandSpec {
    /// `+a` or `-a` with probability 1/2 each.
    TwoPoint { a: f64 },
    /// `c/p - c` with probability `p`, `-c` otherwise: the centered version
    /// of the variable that equals `c/p` with probability `p` and 0 else.
    CenteredBernoulli { c: f64, p: f64 },
    /// Uniform on `[-a, a]`.
    Uniform { a: f64 },
}

impl SummandSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SummandSpec::TwoPoint { a } | SummandSpec::Uniform { a } => a > 0.0 && a.is_finite(),
            SummandSpec::CenteredBernoulli { c, p } => c > 0.0 && c.is_finite() && p > 0.0 && p <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid summand spec {self}")))
        }
    }

    /// Uniform bound `B >= |X|`.
    pub fn bound(&self) -> f64 {
        match *self {
            SummandSpec::TwoPoint { a } | SummandSpec::Uniform { a } => a,
            SummandSpec::CenteredBernoulli { c, p } => c * (1.0 / p - 1.0).max(1.0),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            SummandSpec::TwoPoint { a } => a * a,
            SummandSpec::Uniform { a } => a * a / 3.0,
            SummandSpec::CenteredBernoulli { c, p } => c * c * (1.0 - p) / p,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, r: &mut R) -> f64 {
        match *self {
            SummandSpec::TwoPoint { a } => {
                if r.gen::<bool>() {
                    a
                } else {
                    -a
                }
            }
            SummandSpec::Uniform { a } => r.gen_range(-a..=a),
            SummandSpec::CenteredBernoulli { c, p } => {
                if r.gen::<f64>() < p {
                    c / p - c
                } else {
                    -c
                }
            }
        }
    }

    /// Short code used in CSV output.
    pub fn code(&self) -> u32 {
        match self {
            SummandSpec::TwoPoint { .. } => 0,
            SummandSpec::CenteredBernoulli { .. } => 1,
            SummandSpec::Uniform { .. } => 2,
        }
    }
}

impl fmt::Display for SummandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummandSpec::TwoPoint { a } => write!(f, "two-point:{a}"),
            SummandSpec::CenteredBernoulli { c, p } => write!(f, "bernoulli:{c}:{p}"),
            SummandSpec::Uniform { a } => write!(f, "uniform:{a}"),
        }
    }
}

impl FromStr for SummandSpec {
    type Err = Error;

    /// `two-point:<a>`, `bernoulli:<c>:<p>` or `uniform:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.parse::<f64>().map_err(|e| invalid(format!("bad number `{x}` in `{s}`: {e}")));
        let spec = match parts.as_slice() {
            ["two-point", a] => SummandSpec::TwoPoint { a: num(a)? },
            ["uniform", a] => SummandSpec::Uniform { a: num(a)? },
            ["bernoulli", c, p] => SummandSpec::CenteredBernoulli { c: num(c)?, p: num(p)? },
            _ => return Err(invalid(format!("unknown summand distribution `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One grid point of a Bernstein Monte Carlo check.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinCheck {
    pub s: f64,
    /// Empirical `P(|sum X_j| > s)`.
    pub empirical: f64,
    /// Raw real Bernstein bound.
    pub bound: f64,
    /// Binomial standard error of `empirical`.
    pub std_error: f64,
    /// `empirical <= bound + 3 std_error`
    pub ok: bool,
}

const TRIAL_BLOCK: usize = 2048;

/// Simulates `trials` sums of `j` iid summands and compares the empirical
/// tail at each `s` with the real Bernstein bound.
///
/// Trials run in blocks whose streams derive from `(seed, block)`, so counts
/// are identical under any thread schedule.
pub fn mc_verify_bernstein(
    dist: SummandSpec,
    j: usize,
    s_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<BernsteinCheck>> {
    dist.validate()?;
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut r = rng::stream(seed, blk as u64);
            let n = TRIAL_BLOCK.min(trials - blk * TRIAL_BLOCK);
            let mut local = vec![0u64; s_grid.len()];
            for _ in 0..n {
                let sum: f64 = (0..j).map(|_| dist.sample(&mut r)).sum();
                let a = sum.abs();
                for (cnt, &s) in local.iter_mut().zip(s_grid) {
                    if a > s {
                        *cnt += 1;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![0u64; s_grid.len()],
            |mut acc, x| {
                acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
                acc
            },
        );

    let params = TailParams::new(j as f64 * dist.variance(), dist.bound(), 1.0)?;
    s_grid
        .iter()
        .zip(counts)
        .map(|(&s, cnt)| {
            let empirical = cnt as f64 / trials as f64;
            let std_error = (empirical * (1.0 - empirical) / trials as f64).sqrt();
            let bound = bernstein_tail_real(s, &params)?.raw;
            Ok(BernsteinCheck { s, empirical, bound, std_error, ok: empirical <= bound + 3.0 * std_error })
        })
        .collect()
}

/// Outcome of a tails-to-moments check.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    /// `(E|X|^p)^{1/p}` of the variable whose tail equals the bound.
    pub numeric: f64,
    /// [`moment_from_tail`]
    pub bound: f64,
    pub ok: bool,
}

/// Tail function `min(1, beta exp(-s^2 / (sigma^2 + B s)))`.
pub fn exact_tail(params: &TailParams, s: f64) -> f64 {
    if s <= 0.0 {
        return params.beta.min(1.0);
    }
    let denom = params.sigma2 + params.b * s;
    if denom == 0.0 {
        return 0.0;
    }
    (params.beta * (-s * s / denom).exp()).min(1.0)
}

const CONVERGENCE_TOL: f64 = 1e-6;

/// `p int_0^inf T(s) s^{p-1} ds` with `T = exact_tail`.
///
/// Midpoint rule in `u = ln s` on `[ln s_lo, ln s_hi]`; the piece below
/// `s_lo` is `T(0) s_lo^p`; the piece above `s_hi` uses the tangent line of
/// the (convex) exponent `g(s) = s^2/(sigma^2 + B s)`, which is exact for
/// `sigma = 0` and an upper estimate otherwise.
fn moment_integral(params: &TailParams, p: f64, s_lo: f64, s_hi: f64, nodes: usize) -> f64 {
    let (u0, u1) = (s_lo.ln(), s_hi.ln());
    let h = (u1 - u0) / nodes as f64;
    let body: f64 = (0..nodes)
        .map(|i| {
            let u = u0 + (i as f64 + 0.5) * h;
            exact_tail(params, u.exp()) * (p * u).exp()
        })
        .sum::<f64>()
        * h
        * p;
    let below = exact_tail(params, 0.0) * s_lo.powf(p);
    body + below + tail_completion(params, p, s_hi)
}

fn tail_completion(params: &TailParams, p: f64, s0: f64) -> f64 {
    let denom = params.sigma2 + params.b * s0;
    let g = s0 * s0 / denom;
    let slope = (params.b * s0 * s0 + 2.0 * s0 * params.sigma2) / (denom * denom);
    let x = slope * s0;
    let ur = gamma_ur(p, x);
    if ur == 0.0 {
        return 0.0;
    }
    // beta e^{-g} p int_{s0}^inf e^{-slope (s - s0)} s^{p-1} ds
    params.beta * (-g + x + ln_gamma(p + 1.0) - p * slope.ln()).exp() * ur
}

/// Numerically integrates the `p`-th moment of the variable whose tail is
/// exactly [`exact_tail`] and compares with [`moment_from_tail`].
pub fn mc_verify_moment(params: &TailParams, p_moment: f64, quad_points: usize) -> Result<MomentCheck> {
    let bound = moment_from_tail(p_moment, params)?;
    if quad_points < 16 {
        return Err(invalid("quad_points must be >= 16"));
    }
    if params.sigma2 == 0.0 && params.b == 0.0 {
        return Ok(MomentCheck { numeric: 0.0, bound, ok: 0.0 <= bound });
    }
    let scale = params.sigma() + params.b;
    let s_lo = 1e-8 * scale;
    let g = |s: f64| s * s / (params.sigma2 + params.b * s);
    let mut s_hi = scale;
    while g(s_hi) - params.beta.ln() - p_moment * (s_hi / scale).max(1.0).ln() < 60.0 {
        s_hi *= 2.0;
    }
    let first = moment_integral(params, p_moment, s_lo, s_hi, quad_points);
    let span = (s_hi / s_lo).ln();
    let extended_nodes = (quad_points as f64 * (span + 2f64.ln()) / span).round() as usize;
    let second = moment_integral(params, p_moment, s_lo, 2.0 * s_hi, extended_nodes);
    let disagreement = (first - second).abs() / first.max(f64::MIN_POSITIVE);
    if disagreement > CONVERGENCE_TOL {
        return Err(Error::QuadratureNonConvergence(disagreement));
    }
    let numeric = first.powf(1.0 / p_moment);
    Ok(MomentCheck { numeric, bound, ok: numeric <= bound })
}
