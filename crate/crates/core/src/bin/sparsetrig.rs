use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparsetrig::harness::{self, ExperimentConfig, Mode};
use sparsetrig::sparsify::{self, SparsifyConfig};
use sparsetrig::trigpoly::{self, Cuboid};
use sparsetrig::Result;

#[derive(Parser)]
#[command(name = "sparsetrig", version, about = "Sparse trigonometric approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (flat TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path; stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Write 0 in the wall_ms column
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Clone)]
struct SpectrumArgs {
    /// Sparsify this spectrum file instead of running a sweep
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Where to write the approximant (with --spectrum)
    #[arg(long)]
    approximant: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sup-norm over L_q norm against the Nikol'skij constant
    VerifyNikolskij(Common),
    /// Monte Carlo tails of bounded sums against the Bernstein bound
    VerifyBernstein(Common),
    /// Numerical moments of exact-tail variables against the moment bound
    VerifyMoments(Common),
    /// Best m-term tail norms against the Stechkin bound
    VerifyStechkin(Common),
    /// Randomized 4m-term approximation in L_q
    Sparsify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Randomized 4m-term approximation in L_inf
    SparsifyLinf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Projection plus sparsification of random Besov-ball functions
    BesovExperiment(Common),
    /// Print bound tables as CSV
    Bounds {
        /// Table to print
        #[arg(default_value = "besov", value_parser = ["besov"])]
        table: String,
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common, mode: Mode) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_mode(mode),
    };
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(sparsetrig::Error::Config {
                field: "mode".into(),
                msg: format!("config is for `{m}` but the subcommand runs `{mode}`"),
            });
        }
    }
    cfg.mode = Some(mode);
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if common.no_timing {
        cfg.timing = false;
    }
    Ok(cfg)
}

fn sweep(common: &Common, mode: Mode) -> Result<i32> {
    let cfg = load(common, mode)?;
    let out = harness::run(&cfg)?;
    if cfg.out.is_none() {
        harness::write_csv(&out.records, std::io::stdout().lock())?;
    }
    let mut err = std::io::stderr().lock();
    for row in harness::summarize(&out.records) {
        writeln!(
            err,
            "{} d={} theta={} runs={} max_ratio={:.6} mean_ratio={:.6} acceptance={:.3} mean_attempts={:.2}",
            row.mode, row.d, row.theta, row.count, row.max_ratio, row.mean_ratio, row.acceptance_rate, row.mean_attempts
        )?;
    }
    let violations = out.violations();
    if violations > 0 {
        writeln!(err, "{violations} bound violation(s)")?;
    }
    Ok(out.exit_code())
}

fn single(common: &Common, args: &SpectrumArgs, path: &PathBuf, linf: bool) -> Result<i32> {
    let cfg = load(common, if linf { Mode::SparsifyLinf } else { Mode::SparsifyLq })?;
    let t = trigpoly::io::read_spectrum(path)?;
    let theta = cfg.theta_values[0];
    let sc = SparsifyConfig {
        m: cfg.m_values[0],
        q: cfg.q_values[0],
        max_attempts: cfg.max_attempts,
        oversample: cfg.oversample,
        seed: cfg.seed,
        grid_cap: cfg.grid_cap,
    };
    let mut out = std::io::stdout().lock();
    let (approximant, ok) = if linf {
        let (lo, hi): (Vec<i64>, Vec<i64>) = (0..t.dim())
            .map(|j| {
                let c: Vec<i64> = t.frequencies().map(|k| k.components()[j]).collect();
                (c.iter().copied().min().unwrap_or(0), c.iter().copied().max().unwrap_or(0))
            })
            .unzip();
        let q_box = Cuboid::new(lo, hi)?;
        let r = sparsify::sparsify_linf(&t, &q_box, &sc, theta)?;
        writeln!(out, "q_used={}", r.q_used)?;
        writeln!(out, "linf_error={}", r.linf_error.value)?;
        writeln!(out, "linf_theorem_bound={}", r.linf_theorem_bound)?;
        writeln!(out, "accepted={}", r.lq.accepted)?;
        writeln!(out, "attempts={}", r.lq.attempts_used)?;
        (r.lq.approximant, r.linf_error.value <= r.linf_theorem_bound)
    } else {
        let r = sparsify::sparsify_lq(&t, &sc, theta)?;
        writeln!(out, "lq_error={}", r.measured_error.value)?;
        writeln!(out, "theorem_bound={}", r.theorem_bound)?;
        writeln!(out, "accepted={}", r.accepted)?;
        writeln!(out, "attempts={}", r.attempts_used)?;
        writeln!(out, "m_ge_q={}", r.m_ge_q)?;
        let ok = !r.m_ge_q || r.measured_error.value <= r.theorem_bound * (1.0 + r.measured_error.est_rel_error);
        (r.approximant, ok)
    };
    writeln!(out, "terms={}", approximant.len())?;
    if let Some(p) = &args.approximant {
        trigpoly::io::write_spectrum(p, &approximant)?;
    }
    Ok(i32::from(!ok))
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::VerifyNikolskij(c) => sweep(&c, Mode::Nikolskij),
        Command::VerifyBernstein(c) => sweep(&c, Mode::Bernstein),
        Command::VerifyMoments(c) => sweep(&c, Mode::Moments),
        Command::VerifyStechkin(c) => sweep(&c, Mode::Stechkin),
        Command::Sparsify { common, spectrum } => match &spectrum.spectrum {
            Some(path) => single(&common, &spectrum, path, false),
            None => sweep(&common, Mode::SparsifyLq),
        },
        Command::SparsifyLinf { common, spectrum } => match &spectrum.spectrum {
            Some(path) => single(&common, &spectrum, path, true),
            None => sweep(&common, Mode::SparsifyLinf),
        },
        Command::BesovExperiment(c) => sweep(&c, Mode::Besov),
        Command::Bounds { common, .. } => {
            let cfg = load(&common, Mode::Besov)?;
            match &cfg.out {
                Some(p) => harness::write_bounds_table(&cfg, std::fs::File::create(p)?)?,
                None => harness::write_bounds_table(&cfg, std::io::stdout().lock())?,
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
