use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nusrec::encoders::write_samples_csv;
use nusrec::experiments::config::ScenarioConfig;
use nusrec::experiments::runner::{
    fig3_oracle_distances, prepare_multichannel_trial, prepare_trial, read_waveforms_csv, run_algorithm,
    write_fig3_oracle_csv, write_fig3_waveforms,
};
use nusrec::experiments::selftest::run_selftest;
use nusrec::experiments::{
    builtin_or_custom, emit_plot, emit_waveform_plot, read_table_csv, run_fig3, run_scenario, write_table_csv,
    Algorithm, AlgorithmSpec, MseColumn, Sampling,
};
use nusrec::kernels::{gram_matrix, GramRoute};
use nusrec::multichannel::{reconstruct_multichannel, write_multichannel_csv};
use nusrec::recon::{write_history_csv, Relaxation, DEFAULT_TOL};
use nusrec::{Error, Result};

#[derive(Parser)]
#[command(name = "nusrec", version, about = "Reconstruct bandlimited periodic signals from nonuniform generalized samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode the first trial input of a scenario and write its samples.
    Encode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the first trial of a scenario with one algorithm.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// frame, kaczmarz_cyclic, kaczmarz_random, grochenig or pocs
        #[arg(long)]
        algo: String,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in scenario (fig2a, fig2b, fig2c, fig3) or custom:<file>.
    Experiment {
        #[arg(long)]
        scenario: String,
        /// Period 315 with 100 trials.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the Gram matrix of the first trial as k,kp,h rows.
    GramTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the seeded invariant checks.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn out_dir(cfg: &ScenarioConfig, out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| cfg.output_dir());
    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    Ok(dir)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Encode { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let dir = out_dir(&cfg, out)?;
            if cfg.multichannel.is_some() {
                let (_, _, samples) = prepare_multichannel_trial(&cfg, 0)?;
                let path = dir.join("samples.csv");
                write_multichannel_csv(&path, &samples)?;
                println!("{} samples -> {}", samples.len(), path.display());
            } else {
                let trial = prepare_trial(&cfg, 0)?;
                let path = dir.join("samples.csv");
                write_samples_csv(&path, &trial.family, &trial.samples)?;
                println!("{} samples -> {}", trial.samples.len(), path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reconstruct { config, algo, lambda, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let algo = Algorithm::parse(&algo)?;
            let lambda = lambda.or_else(|| cfg.algorithms.iter().find(|a| a.algo == algo).and_then(|a| a.lambda));
            let dir = out_dir(&cfg, out)?;
            if cfg.multichannel.is_some() {
                let (y, a, samples) = prepare_multichannel_trial(&cfg, 0)?;
                let est = reconstruct_multichannel(
                    &samples,
                    &a,
                    None,
                    &Relaxation::Constant(lambda.unwrap_or(1.0)),
                    cfg.iterations,
                )?;
                for (n, (e, t)) in est.sources.iter().zip(&y).enumerate() {
                    println!("source {n}: relative L2 error {:.3e}", e.axpy(-1.0, t).norm_l2() / t.norm_l2());
                }
                println!("sample residual {:.3e}", est.residual);
                return Ok(ExitCode::SUCCESS);
            }
            let trial = prepare_trial(&cfg, 0)?;
            let op = trial.operator()?;
            let spec = AlgorithmSpec::new(algo, lambda);
            let outcome = run_algorithm(&spec, &trial, &op, cfg.iterations, None)?;
            let converged = outcome
                .history
                .last()
                .is_some_and(|h| h.step_norm / outcome.estimate.norm_l2().max(1.0) < DEFAULT_TOL);
            let path = dir.join(format!("history_{}.csv", spec.label()));
            write_history_csv(&path, &outcome.history)?;
            let last = outcome.history.last().expect("history has the initial row");
            println!(
                "{}: {} iterations, L2 error {:.3e}, Sobolev error {:.3e}, {}",
                spec.label(),
                outcome.iterations,
                last.err_l2_rel,
                last.err_sobolev_rel,
                if converged { "converged" } else { "not converged (budget exhausted)" }
            );
            if let Some(w) = outcome.warning {
                println!("warning: {w}");
            }
            println!("history -> {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { scenario, full, out } => {
            let cfg = builtin_or_custom(&scenario, full)?;
            let dir = out_dir(&cfg, out)?;
            experiment(&cfg, &dir)
        }
        Command::GramTable { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let trial = prepare_trial(&cfg, 0)?;
            let g = gram_matrix(&trial.family, &GramRoute::Spectral)?;
            let err = |source| Error::Csv { path: out.clone(), source };
            let mut w = csv::Writer::from_path(&out).map_err(err)?;
            w.write_record(["k", "kp", "h"]).map_err(err)?;
            for k in 0..g.len() {
                for kp in 0..g.len() {
                    w.write_record([k.to_string(), kp.to_string(), g.entry(k, kp).to_string()]).map_err(err)?;
                }
            }
            w.flush().map_err(|source| Error::Io { path: out.clone(), source })?;
            println!("{}x{} Gram matrix -> {}", g.len(), g.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { seed, rounds } => {
            let results = run_selftest(seed, rounds)?;
            let mut ok = true;
            for r in &results {
                ok &= r.passed;
                println!(
                    "{} {} (worst {:.2e}, tolerance {:.0e})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance
                );
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn experiment(cfg: &ScenarioConfig, dir: &Path) -> Result<ExitCode> {
    let table = dir.join(format!("{}.csv", cfg.scenario));
    let level_crossing = matches!(cfg.sampling, Sampling::LevelCrossing { .. }) && cfg.multichannel.is_none();
    if level_crossing {
        let res = run_fig3(cfg)?;
        write_table_csv(&table, &res.rows)?;
        let waves = dir.join(format!("{}_waveforms.csv", cfg.scenario));
        write_fig3_waveforms(&waves, &res, &cfg.snapshots, 2000)?;
        let oracle = dir.join(format!("{}_oracle.csv", cfg.scenario));
        write_fig3_oracle_csv(&oracle, &res)?;
        let curves = read_waveforms_csv(&waves)?;
        emit_waveform_plot(&cfg.scenario, &curves, &dir.join(format!("{}_waveforms.svg", cfg.scenario)))?;
        println!(
            "{} crossings over period {} (ratio {:.3}), spacing {:.4}",
            res.trial.family.len(),
            cfg.period,
            res.sampling_ratio(),
            res.trial.level_spacing.unwrap_or(f64::NAN)
        );
        for (tag, out) in [("zero", &res.from_zero), ("staircase", &res.from_staircase)] {
            let last = out.history.last().expect("history has the initial row");
            println!("start {tag}: final L2 error {:.3e}, Sobolev error {:.3e}", last.err_l2_rel, last.err_sobolev_rel);
        }
        for (tag, n, l2, sob) in fig3_oracle_distances(&res) {
            if n == cfg.iterations {
                println!("start {tag}: distance to the limit {l2:.3e} (L2), {sob:.3e} (Sobolev)");
            }
        }
    } else {
        let res = run_scenario(cfg)?;
        write_table_csv(&table, &res.rows)?;
        for t in &res.trials {
            for w in &t.warnings {
                println!("warning: {w}");
            }
        }
        for spec in &cfg.algorithms {
            if let Some((l2, sob)) = res.mse_at(&spec.label(), cfg.iterations) {
                println!(
                    "{:<20} MSE after {} iterations: {:.2} dB (L2), {:.2} dB (Sobolev)",
                    spec.label(),
                    cfg.iterations,
                    10.0 * l2.log10(),
                    10.0 * sob.log10()
                );
            }
        }
        println!("runs use a fixed iteration budget; convergence is not claimed");
    }
    let rows = read_table_csv(&table)?;
    emit_plot(&rows, MseColumn::L2, &dir.join(format!("{}_l2.svg", cfg.scenario)))?;
    emit_plot(&rows, MseColumn::Sobolev, &dir.join(format!("{}_sobolev.svg", cfg.scenario)))?;
    println!("results -> {}", dir.display());
    Ok(ExitCode::SUCCESS)
}
