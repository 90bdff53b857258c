//! Executes parsed commands. Human-readable summaries go to `out`.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use drsplit::experiments::{gen_lad, gen_monotone_pair, gen_tv_with_signal, grid_policies, run_comparison_full, TvSignal};
use drsplit::spectral::{check_disc, log_grid, radius_scan};
use drsplit::{PdProblem, SolveOptions, SolveResult, SolveTrace, StepsizePolicy};

use crate::args::{Command, CompareArgs, CompareCommand, LadProblem, OutputArgs, SpectrumArgs, TvArgs, TvProblem};
use crate::plot::{eigen_svg, objective_svg, stepsize_svg, write_svg};
use crate::trace_csv::{real, write_columns, write_eigen_csv, write_scan_csv, write_trace_csv};

pub fn run(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Lad(a) => {
            let (_, prob) = lad_problem(&a.problem)?;
            let res = solve_logged(&prob, &a.solver.policy(), &a.solver.iteration.options())?;
            emit(&res, &a.output, out)
        }
        Command::Tv(a) => run_tv(a, out),
        Command::Spectrum(a) => run_spectrum(a, out),
        Command::Compare(CompareCommand::Lad { problem, compare }) => {
            let (_, prob) = lad_problem(problem)?;
            run_compare(&prob, compare, out)
        }
        Command::Compare(CompareCommand::Tv { problem, compare }) => {
            let (_, prob) = tv_problem(problem)?;
            run_compare(&prob, compare, out)
        }
    }
}

fn lad_problem(p: &LadProblem) -> Result<(drsplit::experiments::LadInstance, PdProblem)> {
    gen_lad(p.seed, p.m, p.n, p.lambda).context("generating LAD instance")
}

fn tv_problem(p: &TvProblem) -> Result<(drsplit::experiments::TvInstance, PdProblem)> {
    let signal = TvSignal { plateaus: p.plateaus, level_std: p.level_std };
    gen_tv_with_signal(p.seed, p.n, p.noise, p.lambda, signal).context("generating TV instance")
}

fn solve_logged(prob: &PdProblem, policy: &StepsizePolicy, opts: &SolveOptions) -> Result<SolveResult> {
    drsplit::solve(prob, policy, opts).with_context(|| format!("solver aborted ({})", policy.label()))
}

fn summary_line(label: &str, trace: &SolveTrace) -> String {
    match trace.last() {
        Some(r) => format!(
            "{label}: iterations {} objective {} t {} s {} residual {:.3e}",
            trace.len(),
            real(r.objective),
            real(r.t),
            real(r.s),
            r.residual
        ),
        None => format!("{label}: no iterations"),
    }
}

fn emit(res: &SolveResult, output: &OutputArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{}", summary_line("result", &res.trace))?;
    writeln!(out, "final stepsizes t {} s {}", real(res.state.t()), real(res.state.s()))?;
    if let Some(path) = &output.out {
        write_trace_csv(&res.trace, path)?;
    }
    if let Some(path) = &output.plot {
        write_svg(&objective_svg(&[("objective", &res.trace)]), path)?;
    }
    if let Some(path) = &output.stepsize_plot {
        write_svg(&stepsize_svg(&res.trace), path)?;
    }
    Ok(())
}

fn run_tv(a: &TvArgs, out: &mut dyn Write) -> Result<()> {
    let (inst, prob) = tv_problem(&a.problem)?;
    let res = solve_logged(&prob, &a.solver.policy(), &a.solver.iteration.options())?;
    writeln!(out, "flat threshold {}", real(drsplit::experiments::tv_flat_threshold(&inst.noisy)))?;
    emit(&res, &a.output, out)?;
    if let Some(path) = &a.signal_out {
        write_columns(
            &[("clean", inst.clean.as_slice()), ("noisy", inst.noisy.as_slice()), ("x", res.x.as_slice())],
            path,
        )?;
    }
    Ok(())
}

fn run_spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    let pair = gen_monotone_pair(a.seed, a.half_dim).context("generating monotone pair")?;
    let report = check_disc(&pair, &pair.block_delta(a.t, a.s)).context("eigenvalue analysis")?;
    let violations = report.records.iter().filter(|r| !r.contained).count();
    writeln!(
        out,
        "eigenvalues {} contained {} violations {violations} spectral radius {}",
        report.records.len(),
        report.all_contained(),
        real(report.spectral_radius)
    )?;
    if let Some(path) = &a.eig_out {
        write_eigen_csv(&report.records, path)?;
    }
    if let Some(path) = &a.plot {
        write_svg(&eigen_svg(&report.eigenvalues()), path)?;
    }
    if a.grid > 0 {
        let grid = log_grid(a.grid_min, a.grid_max, a.grid);
        let scan = radius_scan(&pair, &grid, &grid).context("spectral radius scan")?;
        writeln!(
            out,
            "scan {} points, best t {} s {} rho {}",
            scan.rows.len(),
            real(scan.best.t),
            real(scan.best.s),
            real(scan.best.rho)
        )?;
        if let Some(path) = &a.out {
            write_scan_csv(&scan.rows, path)?;
        }
    }
    Ok(())
}

/// File-name-safe label.
pub fn file_stem(policy: &StepsizePolicy) -> String {
    match policy {
        StepsizePolicy::Constant { t, s } => format!("constant_t{t}_s{s}"),
        other => other.label(),
    }
}

fn run_compare(prob: &PdProblem, a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.adaptive.config();
    let mut policies = vec![
        StepsizePolicy::TsAdaptive(cfg),
        StepsizePolicy::TAdaptive(cfg),
        StepsizePolicy::Constant { t: a.baseline, s: a.baseline },
    ];
    if a.grid > 0 {
        let grid = log_grid(a.grid_min, a.grid_max, a.grid);
        policies.extend(grid_policies(&grid, &grid));
    }
    let opts = a.iteration.options();
    let results = run_comparison_full(prob, &policies, &opts).context("comparison run")?;
    for (p, r) in policies.iter().zip(&results).take(3) {
        writeln!(out, "{}", summary_line(&p.label(), &r.trace))?;
    }
    if a.grid > 0 {
        let finals = |r: &SolveResult| r.trace.last().map_or(f64::INFINITY, |l| l.objective);
        let adaptive = finals(&results[0]);
        let beaten = results[3..].iter().filter(|r| finals(r) < adaptive).count();
        writeln!(out, "grid runs with lower final objective than ts-adaptive: {beaten}/{}", results.len() - 3)?;
    }
    if let Some(dir) = &a.out_dir {
        write_compare_outputs(dir, &policies, &results)?;
    }
    Ok(())
}

fn write_compare_outputs(dir: &Path, policies: &[StepsizePolicy], results: &[SolveResult]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut summary = csv::Writer::from_path(dir.join("summary.csv")).context("creating summary.csv")?;
    summary.write_record(["policy", "iterations", "final_objective", "final_t", "final_s"])?;
    for (p, r) in policies.iter().zip(results) {
        let stem = file_stem(p);
        write_trace_csv(&r.trace, &dir.join(format!("{stem}.csv")))?;
        let obj = r.trace.last().map_or(f64::NAN, |l| l.objective);
        summary.write_record([stem, r.trace.len().to_string(), real(obj), real(r.state.t()), real(r.state.s())])?;
    }
    summary.flush()?;
    let labels: Vec<String> = policies.iter().take(3).map(|p| p.label()).collect();
    let runs: Vec<(&str, &SolveTrace)> = labels.iter().zip(results).map(|(l, r)| (l.as_str(), &r.trace)).collect();
    write_svg(&objective_svg(&runs), &dir.join("objective.svg"))?;
    write_svg(&stepsize_svg(&results[0].trace), &dir.join("stepsizes.svg"))?;
    Ok(())
}
