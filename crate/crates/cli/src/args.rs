//! Command-line definitions and validation.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drsplit::{AdaptiveConfig, OmegaSchedule, SolveOptions, StepsizePolicy};

#[derive(Parser, Debug, Clone)]
#[command(name = "drsplit", version, about = "Primal-dual Douglas-Rachford with adaptive stepsizes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// ℓ¹-regularized least absolute deviations `‖Ax − b‖₁ + λ‖x‖₁`.
    Lad(LadArgs),
    /// 1-D total-variation denoising `½‖x − x_δ‖² + λ‖Dx‖₁`.
    Tv(TvArgs),
    /// Eigenvalues of the linear iteration matrix and a spectral-radius scan.
    Spectrum(SpectrumArgs),
    /// Adaptive policies against constant stepsizes on one instance.
    #[command(subcommand)]
    Compare(CompareCommand),
}

#[derive(Subcommand, Debug, Clone)]
pub enum CompareCommand {
    Lad {
        #[command(flatten)]
        problem: LadProblem,
        #[command(flatten)]
        compare: CompareArgs,
    },
    Tv {
        #[command(flatten)]
        problem: TvProblem,
        #[command(flatten)]
        compare: CompareArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct LadArgs {
    #[command(flatten)]
    pub problem: LadProblem,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TvArgs {
    #[command(flatten)]
    pub problem: TvProblem,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// CSV with the clean, noisy and reconstructed signals.
    #[arg(long)]
    pub signal_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LadProblem {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows of A.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    /// Columns of A.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub lambda: f64,
}

#[derive(Args, Debug, Clone)]
pub struct TvProblem {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Signal length.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Standard deviation of the additive noise.
    #[arg(long, default_value_t = drsplit::experiments::DEFAULT_TV_NOISE, value_parser = nonnegative)]
    pub noise: f64,
    /// Standard deviation of the plateau levels.
    #[arg(long, default_value_t = drsplit::experiments::DEFAULT_LEVEL_STD, value_parser = nonnegative)]
    pub level_std: f64,
    #[arg(long, default_value_t = drsplit::experiments::DEFAULT_PLATEAUS)]
    pub plateaus: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub lambda: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyArg {
    /// `t = t0`, `s = s0` throughout.
    Constant,
    /// One shared adaptive stepsize `t = s`.
    TAdaptive,
    /// Independent adaptive primal and dual stepsizes.
    TsAdaptive,
}

#[derive(Args, Debug, Clone)]
pub struct AdaptiveArgs {
    /// Lower safeguard on the stepsize ratio.
    #[arg(long, default_value_t = 1e-4, value_parser = positive)]
    pub a: f64,
    /// Upper safeguard on the stepsize ratio.
    #[arg(long, default_value_t = 1e4, value_parser = positive)]
    pub b: f64,
    /// Dual lower safeguard; defaults to `--a`.
    #[arg(long, value_parser = positive)]
    pub a_s: Option<f64>,
    /// Dual upper safeguard; defaults to `--b`.
    #[arg(long, value_parser = positive)]
    pub b_s: Option<f64>,
    /// Upper bound on the stepsizes.
    #[arg(long, default_value_t = 1e4, value_parser = positive)]
    pub cap: f64,
    /// Relaxation ratio r in ω_k = r^k.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub omega_rate: f64,
}

impl AdaptiveArgs {
    pub fn config(&self) -> AdaptiveConfig {
        let omega = if self.omega_rate == 0.5 {
            OmegaSchedule::Halving
        } else {
            OmegaSchedule::Geometric(self.omega_rate)
        };
        AdaptiveConfig {
            a_t: self.a,
            b_t: self.b,
            a_s: self.a_s.unwrap_or(self.a),
            b_s: self.b_s.unwrap_or(self.b),
            omega_t: omega,
            omega_s: omega,
            cap: self.cap,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct IterationArgs {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub s0: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Stop once the relative change of (p, q) is at most this; 0 runs all iterations.
    #[arg(long, default_value_t = 0.0, value_parser = nonnegative)]
    pub tol: f64,
}

impl IterationArgs {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            t0: self.t0,
            s0: self.s0,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = PolicyArg::TsAdaptive)]
    pub policy: PolicyArg,
    #[command(flatten)]
    pub iteration: IterationArgs,
    #[command(flatten)]
    pub adaptive: AdaptiveArgs,
}

impl SolverArgs {
    pub fn policy(&self) -> StepsizePolicy {
        match self.policy {
            PolicyArg::Constant => StepsizePolicy::Constant {
                t: self.iteration.t0,
                s: self.iteration.s0,
            },
            PolicyArg::TAdaptive => StepsizePolicy::TAdaptive(self.adaptive.config()),
            PolicyArg::TsAdaptive => StepsizePolicy::TsAdaptive(self.adaptive.config()),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Trace CSV `k,objective,t,s,residual`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG of the objective per iteration.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// SVG of the stepsizes per iteration.
    #[arg(long)]
    pub stepsize_plot: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of each diagonal block; the matrices are 2·half_dim square.
    #[arg(long, default_value_t = 25)]
    pub half_dim: usize,
    /// Primal stepsize for the eigenvalue report.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub t: f64,
    /// Dual stepsize for the eigenvalue report.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub s: f64,
    /// Points per axis of the log-spaced (t, s) scan; 0 skips the scan.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-2, value_parser = positive)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 1e2, value_parser = positive)]
    pub grid_max: f64,
    /// Scan CSV `t,s,rho`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Eigenvalue CSV at (t, s).
    #[arg(long)]
    pub eig_out: Option<PathBuf>,
    /// SVG eigenvalue scatter at (t, s).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    /// Constant baseline `t = s`.
    #[arg(long, default_value_t = 1.1, value_parser = positive)]
    pub baseline: f64,
    /// Points per axis of an additional constant-stepsize grid; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 1e3, value_parser = positive)]
    pub grid_max: f64,
    #[command(flatten)]
    pub iteration: IterationArgs,
    #[command(flatten)]
    pub adaptive: AdaptiveArgs,
    /// Directory for per-run traces, the summary and plots.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {v}"))
    }
}

fn check_adaptive(a: &AdaptiveArgs) -> Result<(), String> {
    let cfg = a.config();
    if cfg.a_t >= cfg.b_t || cfg.a_s >= cfg.b_s {
        return Err(format!("need a < b, got [{}, {}] and [{}, {}]", cfg.a_t, cfg.b_t, cfg.a_s, cfg.b_s));
    }
    Ok(())
}

fn check_grid(min: f64, max: f64) -> Result<(), String> {
    if min < max {
        Ok(())
    } else {
        Err(format!("need --grid-min < --grid-max, got {min} and {max}"))
    }
}

fn check_lad(p: &LadProblem) -> Result<(), String> {
    if p.n == 0 || p.m <= p.n {
        return Err(format!("need m > n > 0, got m = {} and n = {}", p.m, p.n));
    }
    Ok(())
}

fn check_tv(p: &TvProblem) -> Result<(), String> {
    if p.n < 2 {
        return Err(format!("need n ≥ 2, got {}", p.n));
    }
    if p.plateaus == 0 {
        return Err("need at least one plateau".into());
    }
    Ok(())
}

impl Command {
    /// Cross-field checks that a single value parser cannot express.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Command::Lad(a) => {
                check_lad(&a.problem)?;
                check_adaptive(&a.solver.adaptive)
            }
            Command::Tv(a) => {
                check_tv(&a.problem)?;
                check_adaptive(&a.solver.adaptive)
            }
            Command::Spectrum(a) => {
                if a.half_dim == 0 {
                    return Err("need --half-dim ≥ 1".into());
                }
                check_grid(a.grid_min, a.grid_max)
            }
            Command::Compare(CompareCommand::Lad { problem, compare }) => {
                check_lad(problem)?;
                check_adaptive(&compare.adaptive)?;
                check_grid(compare.grid_min, compare.grid_max)
            }
            Command::Compare(CompareCommand::Tv { problem, compare }) => {
                check_tv(problem)?;
                check_adaptive(&compare.adaptive)?;
                check_grid(compare.grid_min, compare.grid_max)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_follow_reported_parameters() {
        let cli = Cli::try_parse_from(["drsplit", "lad"]).unwrap();
        let Command::Lad(a) = cli.command else { panic!() };
        assert_eq!(a.solver.policy(), StepsizePolicy::TsAdaptive(AdaptiveConfig::default()));
        assert_eq!(a.solver.iteration.options(), SolveOptions::default());
        assert_eq!((a.problem.m, a.problem.n, a.problem.lambda), (200, 100, 1.0));
    }

    #[test]
    fn constant_policy_uses_initial_steps() {
        let cli = Cli::try_parse_from(["drsplit", "tv", "--policy", "constant", "--t0", "0.5", "--s0", "2"]).unwrap();
        let Command::Tv(a) = cli.command else { panic!() };
        assert_eq!(a.solver.policy(), StepsizePolicy::Constant { t: 0.5, s: 2.0 });
    }

    #[test]
    fn invalid_values_are_rejected() {
        for argv in [
            vec!["drsplit", "lad", "--lambda", "-1"],
            vec!["drsplit", "lad", "--omega-rate", "1"],
            vec!["drsplit", "lad", "--cap", "nan"],
            vec!["drsplit", "lad", "--bogus"],
            vec!["drsplit", "tv", "--noise", "-0.1"],
        ] {
            assert!(Cli::try_parse_from(&argv).is_err(), "{argv:?}");
        }
        let cli = Cli::try_parse_from(["drsplit", "lad", "--m", "10", "--n", "10"]).unwrap();
        assert!(cli.command.validate().is_err());
        let cli = Cli::try_parse_from(["drsplit", "lad", "--a", "5", "--b", "2"]).unwrap();
        assert!(cli.command.validate().is_err());
    }

    #[test]
    fn geometric_omega_when_rate_differs() {
        let cli = Cli::try_parse_from(["drsplit", "lad", "--omega-rate", "0.9", "--a-s", "0.01"]).unwrap();
        let Command::Lad(a) = cli.command else { panic!() };
        let cfg = a.solver.adaptive.config();
        assert_eq!(cfg.omega_t, OmegaSchedule::Geometric(0.9));
        assert_eq!((cfg.a_t, cfg.a_s), (1e-4, 0.01));
    }
}
