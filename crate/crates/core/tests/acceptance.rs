//! End-to-end acceptance checks, one printed line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use sparsetrig::approx::{stechkin_bound, tail_gamma_norm, threshold};
use sparsetrig::besov::{self, BesovParams};
use sparsetrig::constants::{self, c_besov, c_linf, C_BESOV_CEILING, C_LINF_CEILING, C_LQ, C_LQ_CEILING};
use sparsetrig::harness::{self, random_a_theta_ball, ExperimentConfig, Mode};
use sparsetrig::probbounds::{mc_verify_bernstein, mc_verify_moment, SummandSpec, TailParams};
use sparsetrig::rng;
use sparsetrig::sparsify::{self, SparsifyConfig};
use sparsetrig::trigpoly::{self, a_theta_norm, evaluate, grid_values, Cuboid, Frequency, SparseSpectrum};
use sparsetrig::vdp::{self, VdpWeights};

const NIKOLSKIJ_TOL: f64 = 1e-9;
const STECHKIN_SLACK: f64 = 1e-12;
const BERNSTEIN_SE: f64 = 3.0;
const MOMENT_TOL: f64 = 1e-6;
const KERNEL_TOL: f64 = 1e-2;
const GRID_TOL: f64 = 1e-12;
const EXACT_TOL: f64 = 1e-9;
const LQ_CONST: f64 = 27.0;
const LINF_CONST: f64 = 460.0;
const MIN_ACCEPTANCE: f64 = 0.95;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn box_spectrum(n: &[u64], r: &mut impl Rng, unit: bool) -> SparseSpectrum {
    let d = n.len();
    let total: usize = n.iter().map(|&x| 2 * x as usize + 1).product();
    let mut t = SparseSpectrum::new(d);
    for mut flat in 0..total {
        let mut k = Vec::with_capacity(d);
        for &nj in n {
            let w = 2 * nj as usize + 1;
            k.push((flat % w) as i64 - nj as i64);
            flat /= w;
        }
        let c = if unit {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        };
        t.insert(Frequency::new(k), c).unwrap();
    }
    t
}

fn nikolskij() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut count = 0;
    for d in 1..=3usize {
        for n in [1u64, 2, 4] {
            let nv = vec![n; d];
            let mut r = rng::stream(rng::mix(&[1, d as u64, n]), 0);
            for trial in 0..200 {
                // every 10th polynomial is the all-ones kernel, where the ratio peaks
                let t = box_spectrum(&nv, &mut r, trial % 10 == 0);
                let linf = trigpoly::lq_norm(&t, f64::INFINITY, 8).unwrap().value;
                for q in [2u32, 4, 8] {
                    let c = vdp::verify_nikolskij_with_sup(&t, q, linf).unwrap();
                    count += 1;
                    worst = worst.max(c.ratio / c.bound);
                    if c.ratio > c.bound * (1.0 + NIKOLSKIJ_TOL) {
                        failures += 1;
                    }
                }
            }
        }
    }
    Outcome::new(failures == 0, format!("{count} checks, {failures} violations, max ratio/bound {worst:.4}"))
}

fn all_n_vectors(d: usize, max_n: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=max_n).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn vallee_poussin() -> Outcome {
    let mut failures = Vec::new();
    let mut r = rng::stream(2, 0);
    let mut reproduced = 0;
    let mut worst_l2: f64 = 0.0;
    let mut worst_kernel: f64 = 0.0;
    for d in 1..=4usize {
        for n in all_n_vectors(d, 8) {
            let w = VdpWeights::new(n.clone()).unwrap();
            let ratio = vdp::l2_to_linf_exact(&w) / vdp::l2_to_linf_paper_bound(&w);
            worst_l2 = worst_l2.max(ratio);
            if ratio > 1.0 {
                failures.push(format!("l2 {n:?}"));
            }
            let kernel = vdp::linf_to_linf_kernel_norm(&w, 8).unwrap();
            let analytic = vdp::kernel_norm_analytic_bound(d);
            worst_kernel = worst_kernel.max(kernel);
            if kernel > analytic + KERNEL_TOL || analytic > std::f64::consts::E + KERNEL_TOL {
                failures.push(format!("kernel {n:?}"));
            }
            if n.iter().product::<u64>() <= 64 {
                let t = box_spectrum(&n, &mut r, false);
                if vdp::apply(&w, &t).unwrap() != t {
                    failures.push(format!("reproduction {n:?}"));
                }
                reproduced += 1;
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{reproduced} reproductions, max l2 ratio {worst_l2:.4}, max kernel norm {worst_kernel:.4}, failures {:?}",
            failures
        ),
    )
}

fn stechkin() -> Outcome {
    let mut r = rng::stream(3, 0);
    let mut failures = 0;
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for s in 0..500u64 {
        let d = r.gen_range(1..=3);
        let support = r.gen_range(1..=60);
        let decay = r.gen_range(0.0..2.0);
        let t = random_a_theta_ball(1.0, d, support, if d == 1 { 100 } else { 6 }, decay, s).unwrap();
        for theta in [0.5, 1.0] {
            let a = a_theta_norm(&t, theta).unwrap();
            for gamma in [1.0, 2.0, f64::INFINITY] {
                if gamma <= theta {
                    continue;
                }
                for m in [0usize, 1, 3, 7, 15] {
                    let tail = tail_gamma_norm(&t, m, gamma).unwrap();
                    let bound = stechkin_bound(m, theta, gamma, a).unwrap();
                    count += 1;
                    if bound > 0.0 {
                        worst = worst.max(tail / bound);
                    }
                    if tail > bound + STECHKIN_SLACK * bound.max(1.0) {
                        failures += 1;
                    }
                }
            }
        }
    }
    Outcome::new(failures == 0, format!("{count} checks, {failures} violations, max tail/bound {worst:.4}"))
}

fn bernstein() -> Outcome {
    let specs = [
        SummandSpec::TwoPoint { a: 1.0 },
        SummandSpec::CenteredBernoulli { c: 1.0, p: 0.2 },
        SummandSpec::Uniform { a: 1.0 },
    ];
    let multipliers = [0.6, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 3.9];
    let mut failures = 0;
    let mut count = 0;
    let (mut hi, mut lo) = (0.0f64, 1.0f64);
    for (i, spec) in specs.iter().enumerate() {
        for j in [10usize, 100] {
            let sd = (j as f64 * spec.variance()).sqrt();
            let grid: Vec<f64> = multipliers.iter().map(|x| x * sd).collect();
            let checks = mc_verify_bernstein(*spec, j, &grid, 100_000, rng::mix(&[4, i as u64, j as u64])).unwrap();
            for c in checks {
                count += 1;
                hi = hi.max(c.empirical);
                if c.empirical > 0.0 {
                    lo = lo.min(c.empirical);
                }
                if c.empirical > c.bound + BERNSTEIN_SE * c.std_error {
                    failures += 1;
                }
            }
        }
    }
    Outcome::new(
        failures == 0,
        format!("{count} grid points, {failures} violations, empirical tails {lo:.1e}..{hi:.2}"),
    )
}

fn moments() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for beta in [1.0, 4.0] {
        for sigma in [0.0f64, 1.0, 2.0] {
            for b in [0.0, 1.0] {
                if sigma == 0.0 && b == 0.0 {
                    continue;
                }
                let params = TailParams::new(sigma * sigma, b, beta).unwrap();
                for p in [1.0, 2.0, 4.0, 8.0] {
                    count += 1;
                    match mc_verify_moment(&params, p, 100_000) {
                        Ok(c) => {
                            worst = worst.max(c.numeric / c.bound);
                            if c.numeric > c.bound * (1.0 + MOMENT_TOL) {
                                failures.push(format!("beta={beta} sigma={sigma} B={b} p={p}"));
                            }
                        }
                        Err(e) => failures.push(format!("beta={beta} sigma={sigma} B={b} p={p}: {e}")),
                    }
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{count} cases, max numeric/bound {worst:.4}, failures {failures:?}"),
    )
}

fn lq_theorem() -> Outcome {
    let mut runs = 0;
    let mut accepted = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for d in [1usize, 2] {
        for theta in [0.5, 1.0] {
            for q in [2u32, 4] {
                for m in [4usize, 16, 64] {
                    for seed in 0..20u64 {
                        let support = [50, 200, 1000][seed as usize % 3];
                        let decay = [0.0, 0.5, 1.0][seed as usize % 3];
                        let t = random_a_theta_ball(theta, d, support, if d == 1 { 600 } else { 20 }, decay, rng::mix(&[6, seed]))
                            .unwrap();
                        let cfg = SparsifyConfig::new(m, q as f64, rng::mix(&[6, d as u64, m as u64, q as u64, seed]));
                        let r = sparsify::sparsify_lq(&t, &cfg, theta).unwrap();
                        runs += 1;
                        accepted += usize::from(r.accepted);
                        let bound = LQ_CONST * (q as f64).sqrt() * (m as f64).powf(0.5 - 1.0 / theta) * a_theta_norm(&t, theta).unwrap();
                        worst = worst.max(r.measured_error.value / bound);
                        if r.approximant.len() > 4 * m {
                            failures.push(format!("support d={d} theta={theta} q={q} m={m} seed={seed}"));
                        }
                        if !r.measured_error.method.is_exact() || r.measured_error.value > bound * (1.0 + EXACT_TOL) {
                            failures.push(format!("error d={d} theta={theta} q={q} m={m} seed={seed}"));
                        }
                    }
                }
            }
        }
    }
    let rate = accepted as f64 / runs as f64;
    Outcome::new(
        failures.is_empty() && rate >= MIN_ACCEPTANCE,
        format!("{runs} runs, acceptance rate {rate:.4}, max error/bound {worst:.4}, failures {failures:?}"),
    )
}

fn linf_theorem() -> Outcome {
    let mut runs = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for d in [1usize, 2] {
        let q_box = Cuboid::symmetric(&vec![8; d]).unwrap();
        let log_card = q_box.log_cardinality();
        for theta in [0.5, 1.0] {
            for m in [4usize, 16] {
                for seed in 0..20u64 {
                    let support = if d == 1 { 17 } else { 150 };
                    let t = random_a_theta_ball(theta, d, support, 8, [0.0, 1.0][seed as usize % 2], rng::mix(&[7, seed])).unwrap();
                    let cfg = SparsifyConfig { oversample: 8, ..SparsifyConfig::new(m, 2.0, rng::mix(&[7, d as u64, m as u64, seed])) };
                    let r = sparsify::sparsify_linf(&t, &q_box, &cfg, theta).unwrap();
                    runs += 1;
                    let bound = LINF_CONST
                        * (d as f64).sqrt()
                        * (m as f64).powf(0.5 - 1.0 / theta)
                        * log_card.sqrt()
                        * a_theta_norm(&t, theta).unwrap();
                    worst = worst.max(r.linf_error.value / bound);
                    if r.linf_error.value > bound || r.lq.approximant.len() > 4 * m {
                        failures.push(format!("d={d} theta={theta} m={m} seed={seed}"));
                    }
                }
            }
        }
    }
    Outcome::new(failures.is_empty(), format!("{runs} runs, max error/bound {worst:.2e}, failures {failures:?}"))
}

/// Largest oversample in {4, 2, 1} keeping the sup-norm grid of the
/// projection tail under the default cap.
fn tail_oversample(n: u64, d: usize) -> usize {
    [4usize, 2, 1]
        .into_iter()
        .find(|&os| ((os as f64) * (4 * n - 1) as f64).powi(d as i32) <= trigpoly::DEFAULT_GRID_CAP as f64)
        .unwrap_or(1)
}

fn besov_theorem() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    let mut reduced = Vec::new();
    if c_besov() >= C_BESOV_CEILING {
        failures.push(format!("C2 = {}", c_besov()));
    }
    for (p, theta) in [(4.0, 1.0), (4.0, 0.5), (8.0, 1.0)] {
        let prm = BesovParams::embedding(p, theta).unwrap();
        for d in [1usize, 2] {
            for m in [4usize, 16] {
                let n = besov::choose_n(&prm, d, m).unwrap();
                let lower = besov::choose_n_lower(&prm, d, m).unwrap();
                if !((n as f64) >= lower && (n as f64) <= 2.0 * lower) {
                    failures.push(format!("sandwich p={p} theta={theta} d={d} m={m}: N={n}, lower={lower}"));
                }
                let os = tail_oversample(n, d);
                if os < 4 {
                    reduced.push(format!("(p={p},theta={theta},d={d},m={m}) N={n} os={os}"));
                }
                let mut cfg = ExperimentConfig::for_mode(Mode::Besov);
                cfg.level_slack = 0;
                cfg.oversample = os;
                cfg.grid_cap = 1 << 29;
                for seed in 0..2u64 {
                    let run = harness::besov_run(p, theta, d, m, &cfg, rng::mix(&[8, d as u64, m as u64, p as u64, seed]))
                        .unwrap();
                    runs += 1;
                    worst = worst.max(run.total_error() / run.bound);
                    if run.total_error() > run.bound || run.sparsify.lq.approximant.len() > 4 * m {
                        failures.push(format!("p={p} theta={theta} d={d} m={m} seed={seed}"));
                    }
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{runs} runs, C2 = {:.3}, max total/bound {worst:.2e}, reduced sup-grid cells {reduced:?}, failures {failures:?}",
            c_besov()
        ),
    )
}

fn constants_check() -> Outcome {
    let ok = std::panic::catch_unwind(constants::assert_constants).is_ok();
    Outcome::new(
        ok && C_LQ < C_LQ_CEILING && c_linf() < C_LINF_CEILING && c_besov() < C_BESOV_CEILING,
        format!("C = {C_LQ:.4} < 27, C1 = {:.4} < 460, C2 = {:.4} < 468", c_linf(), c_besov()),
    )
}

fn oracles() -> Outcome {
    let mut r = rng::stream(10, 0);
    let mut failures = Vec::new();
    for trial in 0..200u64 {
        let j = r.gen_range(1..=12usize);
        let t = random_a_theta_ball(1.0, 1, j, 20, r.gen_range(0.0..1.5), trial).unwrap();
        let moduli: Vec<f64> = t.iter().map(|(_, c)| c.norm()).collect();
        for gamma in [1.0, 2.0, f64::INFINITY] {
            for m in 0..=j {
                // best m-term tail = min over kept subsets of the dropped norm
                let mut best = f64::INFINITY;
                for mask in 0u32..(1 << j) {
                    if mask.count_ones() as usize != m {
                        continue;
                    }
                    let dropped = (0..j).filter(|i| mask & (1 << i) == 0).map(|i| moduli[i]);
                    let v = if gamma.is_infinite() {
                        dropped.fold(0.0, f64::max)
                    } else {
                        dropped.map(|x| x.powf(gamma)).sum::<f64>().powf(1.0 / gamma)
                    };
                    best = best.min(v);
                }
                let got = tail_gamma_norm(&t, m, gamma).unwrap();
                if (got - best).abs() > 1e-12 * best.max(1.0) {
                    failures.push(format!("tail j={j} m={m} gamma={gamma}"));
                }
            }
        }
        if j <= 10 {
            for m in 0..=j {
                let head: f64 = threshold(&t, m).head.iter().map(|(_, c)| c.norm()).sum();
                let best = (0u32..(1 << j))
                    .filter(|mask| mask.count_ones() as usize == m)
                    .map(|mask| (0..j).filter(|i| mask & (1 << i) != 0).map(|i| moduli[i]).sum::<f64>())
                    .fold(0.0, f64::max);
                if (head - best).abs() > 1e-12 * best.max(1.0) {
                    failures.push(format!("head j={j} m={m}"));
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for trial in 0..30u64 {
        let d = 1 + trial as usize % 3;
        let t = random_a_theta_ball(1.0, d, 30, [40, 6, 3][d - 1], 0.5, trial).unwrap();
        let a1 = a_theta_norm(&t, 1.0).unwrap();
        let shape: Vec<usize> = t.extent().iter().map(|&n| 2 * n as usize + 3).collect();
        let g = grid_values(&t, &shape).unwrap();
        for flat in 0..g.values().len() {
            let idx = g.unflatten(flat);
            let x = g.point(&idx);
            let err = (g.values()[flat] - evaluate(&t, &x).unwrap()).norm() / a1;
            worst = worst.max(err);
        }
    }
    if worst > GRID_TOL {
        failures.push(format!("grid max rel error {worst:e}"));
    }
    Outcome::new(failures.is_empty(), format!("grid max rel error {worst:.1e}, failures {failures:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("nikolskij sweep", nikolskij),
        ("de la Vallee Poussin operator", vallee_poussin),
        ("stechkin tails", stechkin),
        ("bernstein monte carlo", bernstein),
        ("tails to moments", moments),
        ("L_q sparsification", lq_theorem),
        ("L_inf sparsification", linf_theorem),
        ("besov projection plus sparsification", besov_theorem),
        ("constants", constants_check),
        ("oracle equivalences", oracles),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {status} {name} [{:.1}s]: {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
