//! Scenario execution: per-trial data generation, algorithm runs and averaging.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, AlgorithmSpec, Sampling, ScenarioConfig};
use crate::encoders::{
    add_noise, crossing_differences, instant_generator, integral_samples, level_crossings, tune_level_spacing,
    Crossing, EncodingSpec,
};
use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelFamily, KernelKind};
use crate::multichannel::{expand_and_encode, ChannelMatrix, MultiChannelOperator, MultiChannelSamples};
use crate::operators::{SampleSequence, SamplingOperator};
use crate::recon::{
    frame_algorithm_run, grochenig_run, kaczmarz_run, pocs_run, staircase_initializer, HistoryRow, KaczmarzOrder,
    ReconOutcome, ReconRun,
};
use crate::signal::{random_bandlimited, Signal};

/// One row of an experiment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub algorithm: String,
    pub iter: usize,
    pub mse_l2: f64,
    pub mse_sobolev: f64,
    pub trials: usize,
}

/// Seeds of one trial, split from the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSeeds {
    pub input: u64,
    pub instants: u64,
    pub noise: u64,
    pub algorithm: u64,
}

pub fn trial_seeds(master: u64, trial: usize) -> TrialSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64);
    TrialSeeds { input: rng.next_u64(), instants: rng.next_u64(), noise: rng.next_u64(), algorithm: rng.next_u64() }
}

/// Data of one single-channel trial.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: usize,
    pub seeds: TrialSeeds,
    pub input: Signal,
    pub family: KernelFamily,
    pub clean: SampleSequence,
    /// Observed samples (noisy when noise is configured).
    pub samples: SampleSequence,
    /// Observed point values `(t_k, v_k)` when the sampling provides them.
    pub points: Option<(Vec<f64>, Vec<f64>)>,
    pub crossings: Option<Vec<Crossing>>,
    pub level_spacing: Option<f64>,
}

impl Trial {
    pub fn operator(&self) -> Result<SamplingOperator> {
        SamplingOperator::new(self.family.clone())
    }
}

/// Generates input, instants and samples of trial `index`.
pub fn prepare_trial(cfg: &ScenarioConfig, index: usize) -> Result<Trial> {
    let seeds = trial_seeds(cfg.seed, index);
    let period = cfg.period;
    let x = random_bandlimited(period, cfg.signal_rms, seeds.input)?;
    let power = x.rms().powi(2);
    let snr = cfg.noise.map_or(f64::INFINITY, |n| n.snr_db);
    let instants = || -> Result<Vec<f64>> {
        let sc = cfg.instants.as_ref().ok_or_else(|| invalid("scenario has no instant generator"))?;
        instant_generator(sc, seeds.instants, period)
    };
    let mut crossings = None;
    let mut level_spacing = None;
    let (family, clean, samples, points) = match &cfg.sampling {
        Sampling::Point => {
            let t = instants()?;
            let family = KernelFamily::new(KernelKind::Sinc, t.clone(), period)?;
            let clean = SampleSequence::new(t.iter().map(|&s| x.eval(s)).collect(), family.weights())?;
            let noisy = add_noise(&clean, snr, power, seeds.noise)?;
            let values = noisy.values().to_vec();
            (family, clean, noisy, Some((t, values)))
        }
        Sampling::Integral { leak } => {
            let kind = if *leak > 0.0 { KernelKind::LeakyExp { alpha: *leak } } else { KernelKind::Indicator };
            let family = KernelFamily::new(kind, instants()?, period)?;
            let clean = integral_samples(&x, &family)?;
            let sample_power = clean.values().iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
            let noisy = add_noise(&clean, snr, sample_power, seeds.noise)?;
            (family, clean, noisy, None)
        }
        Sampling::Ramp => {
            let t = instants()?;
            let family = KernelFamily::new(KernelKind::Ramp, t.clone(), period)?;
            let values: Vec<f64> = t.iter().map(|&s| x.eval(s)).collect();
            let clean = differences(&values, &family)?;
            let noisy_values = add_noise(&SampleSequence::new(values, family.weights())?, snr, power, seeds.noise)?;
            let noisy = differences(noisy_values.values(), &family)?;
            (family, clean, noisy, Some((t, noisy_values.values().to_vec())))
        }
        Sampling::LevelCrossing { spacing, ratio, offset } => {
            let l = match (spacing, ratio) {
                (Some(s), _) => *s,
                (None, Some(r)) => tune_level_spacing(&x, *r, *offset)?,
                (None, None) => return Err(invalid("level crossing needs a spacing or a ratio")),
            };
            level_spacing = Some(l);
            let c = level_crossings(&x, l, *offset);
            if c.len() < 2 {
                return Err(invalid("fewer than two level crossings"));
            }
            let t: Vec<f64> = c.iter().map(|p| p.time).collect();
            let v: Vec<f64> = c.iter().map(|p| p.level).collect();
            let family = KernelFamily::new(KernelKind::Ramp, t.clone(), period)?;
            let clean = crossing_differences(&c, &family)?;
            crossings = Some(c);
            (family, clean.clone(), clean, Some((t, v)))
        }
    };
    Ok(Trial { index, seeds, input: x, family, clean, samples, points, crossings, level_spacing })
}

fn differences(values: &[f64], family: &KernelFamily) -> Result<SampleSequence> {
    let n = values.len();
    SampleSequence::new((0..n).map(|k| values[k] - values[(k + n - 1) % n]).collect(), family.weights())
}

/// Runs one algorithm on a prepared trial for exactly `iterations` steps.
pub fn run_algorithm(
    spec: &AlgorithmSpec,
    trial: &Trial,
    op: &SamplingOperator,
    iterations: usize,
    u0: Option<Signal>,
) -> Result<ReconOutcome> {
    let period = trial.family.period();
    let mut run = ReconRun::new(u0.unwrap_or_else(|| Signal::zero(period)))
        .max_iters(iterations)
        .tol(0.0)
        .truth(trial.input.clone());
    if let Some(l) = spec.lambda {
        run = run.lambda(l);
    }
    match spec.algo {
        Algorithm::Frame => frame_algorithm_run(op, &trial.samples, spec.lambda, &run),
        Algorithm::KaczmarzCyclic => kaczmarz_run(op, &trial.samples, KaczmarzOrder::Cyclic, &run),
        Algorithm::KaczmarzRandom => {
            kaczmarz_run(op, &trial.samples, KaczmarzOrder::RandomPermutation { seed: trial.seeds.algorithm }, &run)
        }
        Algorithm::Grochenig => {
            let (t, v) = trial.points.as_ref().ok_or_else(|| invalid("grochenig needs point values"))?;
            grochenig_run(t, v, period, &run)
        }
        Algorithm::Pocs => pocs_run(op, &trial.samples, &run),
    }
}

/// Histories of every algorithm on one trial, in configuration order.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub index: usize,
    pub histories: Vec<Vec<HistoryRow>>,
    pub warnings: Vec<String>,
}

/// Averaged table plus per-trial histories.
#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub rows: Vec<ResultRow>,
    pub trials: Vec<TrialResult>,
}

impl ScenarioResult {
    /// Averaged MSE rows of one algorithm label.
    pub fn series(&self, label: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.algorithm == label).collect()
    }

    /// `(mse_l2, mse_sobolev)` of `label` at iteration `iter`.
    pub fn mse_at(&self, label: &str, iter: usize) -> Option<(f64, f64)> {
        self.rows.iter().find(|r| r.algorithm == label && r.iter == iter).map(|r| (r.mse_l2, r.mse_sobolev))
    }
}

fn run_trial(cfg: &ScenarioConfig, index: usize) -> Result<TrialResult> {
    if cfg.multichannel.is_some() {
        return run_multichannel_trial(cfg, index);
    }
    let trial = prepare_trial(cfg, index)?;
    let op = trial.operator()?;
    let mut histories = Vec::with_capacity(cfg.algorithms.len());
    let mut warnings = Vec::new();
    for spec in &cfg.algorithms {
        let out = run_algorithm(spec, &trial, &op, cfg.iterations, None)?;
        if let Some(w) = out.warning {
            warnings.push(format!("trial {index}, {}: {w}", spec.label()));
        }
        histories.push(out.history);
    }
    Ok(TrialResult { index, histories, warnings })
}

/// Sources, mixing matrix and samples of one multichannel trial.
pub fn prepare_multichannel_trial(
    cfg: &ScenarioConfig,
    index: usize,
) -> Result<(Vec<Signal>, ChannelMatrix, MultiChannelSamples)> {
    let mc = cfg.multichannel.as_ref().ok_or_else(|| invalid("not a multichannel scenario"))?;
    let a = ChannelMatrix::from_rows(&mc.matrix)?;
    let seeds = trial_seeds(cfg.seed, index);
    let y = (0..a.sources())
        .map(|n| random_bandlimited(cfg.period, cfg.signal_rms, seeds.input.wrapping_add(n as u64)))
        .collect::<Result<Vec<_>>>()?;
    let sc = cfg.instants.as_ref().ok_or_else(|| invalid("scenario has no instant generator"))?;
    let specs = (0..a.channels())
        .map(|i| {
            let t = instant_generator(sc, seeds.instants.wrapping_add(i as u64), cfg.period)?;
            Ok(EncodingSpec::InstantList { instants: t, leak: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let clean = expand_and_encode(&y, &a, &specs)?;
    let samples = match cfg.noise {
        Some(n) => {
            let s = clean.sequence()?;
            let power = s.values().iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
            let noisy = add_noise(&s, n.snr_db, power, seeds.noise)?;
            clean.with_values(noisy.values())?
        }
        None => clean,
    };
    Ok((y, a, samples))
}

fn run_multichannel_trial(cfg: &ScenarioConfig, index: usize) -> Result<TrialResult> {
    let (y, a, samples) = prepare_multichannel_trial(cfg, index)?;
    let op = MultiChannelOperator::new(&samples, &a)?;
    let s = samples.sequence()?;
    let mut histories = Vec::new();
    for spec in &cfg.algorithms {
        let lambda = spec.lambda.unwrap_or(1.0);
        let mut c = nalgebra::DVector::zeros(s.len());
        let sv = s.to_vector();
        let gram = op.inner().gram();
        let mut rows = vec![source_row(0, &op, &c, &a, &y, 0.0)?];
        for n in 0..cfg.iterations {
            let step = (&sv - gram.apply(&c)) * lambda;
            c += &step;
            let step_norm = op.inner().adjoint_coords(&step).norm();
            rows.push(source_row(n + 1, &op, &c, &a, &y, step_norm)?);
        }
        histories.push(rows);
    }
    Ok(TrialResult { index, histories, warnings: Vec::new() })
}

fn source_row(
    iter: usize,
    op: &MultiChannelOperator,
    c: &nalgebra::DVector<f64>,
    a: &ChannelMatrix,
    y: &[Signal],
    step_norm: f64,
) -> Result<HistoryRow> {
    let x = op.unstack(&op.inner().adjoint_coords(c))?;
    let pinv = a.pinv();
    let (mut el2, mut nl2, mut es, mut ns) = (0.0, 0.0, 0.0, 0.0);
    for (n, yn) in y.iter().enumerate() {
        let est = x.iter().enumerate().fold(Signal::zero(yn.period()), |acc, (i, xi)| acc.axpy(pinv[(n, i)], xi));
        let e = est.axpy(-1.0, yn);
        el2 += e.norm_l2().powi(2);
        nl2 += yn.norm_l2().powi(2);
        es += e.sobolev_seminorm().powi(2);
        ns += yn.sobolev_seminorm().powi(2);
    }
    Ok(HistoryRow { iter, err_l2_rel: (el2 / nl2).sqrt(), err_sobolev_rel: (es / ns).sqrt(), step_norm })
}

/// Runs all trials (in parallel) and averages squared relative errors per iteration.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let trials: Vec<TrialResult> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (a, spec) in cfg.algorithms.iter().enumerate() {
        let label = spec.label();
        for iter in 0..=cfg.iterations {
            let (mut l2, mut sob) = (0.0, 0.0);
            for t in &trials {
                let h = &t.histories[a][iter];
                l2 += h.err_l2_rel * h.err_l2_rel;
                sob += h.err_sobolev_rel * h.err_sobolev_rel;
            }
            let n = trials.len() as f64;
            rows.push(ResultRow {
                scenario: cfg.scenario.clone(),
                algorithm: label.clone(),
                iter,
                mse_l2: l2 / n,
                mse_sobolev: sob / n,
                trials: trials.len(),
            });
        }
    }
    Ok(ScenarioResult { rows, trials })
}

/// A level-crossing reconstruction study on a single input.
#[derive(Clone, Debug)]
pub struct Fig3Result {
    pub trial: Trial,
    pub from_zero: ReconOutcome,
    pub from_staircase: ReconOutcome,
    pub staircase: Signal,
    /// Limits of the iteration from each initial estimate.
    pub oracle_zero: Signal,
    pub oracle_staircase: Signal,
    pub rows: Vec<ResultRow>,
}

impl Fig3Result {
    /// Crossings per unit time.
    pub fn sampling_ratio(&self) -> f64 {
        self.trial.family.len() as f64 / self.trial.family.period()
    }
}

/// Limit of the Grochenig iteration from `u0`: the ramp-family POCS limit plus
/// the constant that makes it interpolate the points.
pub fn grochenig_limit(op: &SamplingOperator, s: &SampleSequence, times: &[f64], values: &[f64], u0: &Signal) -> Result<Signal> {
    let shape = op.consistent_limit(s, &u0.without_mean())?;
    let offset = times.iter().zip(values).map(|(t, v)| v - shape.eval(*t)).sum::<f64>() / times.len() as f64;
    Ok(&shape + &Signal::constant(shape.period(), offset))
}

/// Grochenig from zero and from the staircase, with the oracle limits.
pub fn run_fig3(cfg: &ScenarioConfig) -> Result<Fig3Result> {
    cfg.validate()?;
    if !matches!(cfg.sampling, Sampling::LevelCrossing { .. }) {
        return Err(invalid("this study needs level-crossing sampling"));
    }
    let trial = prepare_trial(cfg, 0)?;
    let crossings = trial.crossings.clone().expect("level crossings");
    let (times, values) = trial.points.clone().expect("crossing points");
    let op = trial.operator()?;
    let staircase = staircase_initializer(&crossings, cfg.period)?;
    let lambda = cfg.algorithms.iter().find(|a| a.algo == Algorithm::Grochenig).and_then(|a| a.lambda).unwrap_or(1.0);
    let run = |u0: Signal| {
        ReconRun::new(u0).lambda(lambda).max_iters(cfg.iterations).tol(0.0).truth(trial.input.clone()).record_iterates(true)
    };
    let from_zero = grochenig_run(&times, &values, cfg.period, &run(Signal::zero(cfg.period)))?;
    let from_staircase = grochenig_run(&times, &values, cfg.period, &run(staircase.clone()))?;
    let oracle_zero = grochenig_limit(&op, &trial.samples, &times, &values, &Signal::zero(cfg.period))?;
    let oracle_staircase = grochenig_limit(&op, &trial.samples, &times, &values, &staircase)?;
    let mut rows = Vec::new();
    for (label, out) in [("grochenig_zero", &from_zero), ("grochenig_staircase", &from_staircase)] {
        for h in &out.history {
            rows.push(ResultRow {
                scenario: cfg.scenario.clone(),
                algorithm: label.into(),
                iter: h.iter,
                mse_l2: h.err_l2_rel * h.err_l2_rel,
                mse_sobolev: h.err_sobolev_rel * h.err_sobolev_rel,
                trials: 1,
            });
        }
    }
    Ok(Fig3Result { trial, from_zero, from_staircase, staircase, oracle_zero, oracle_staircase, rows })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

/// Writes rows with columns `scenario, algorithm, iter, mse_l2, mse_sobolev, trials`.
pub fn write_table_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_table_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>().map_err(csv_err(path))
}

#[derive(Serialize, Deserialize)]
struct WaveRow {
    curve: String,
    t: f64,
    value: f64,
}

/// Waveforms of the input, the staircase, the snapshots and both oracle limits
/// on a uniform grid, with columns `curve, t, value`.
pub fn write_fig3_waveforms(path: &Path, res: &Fig3Result, snapshots: &[usize], points: usize) -> Result<()> {
    let period = res.trial.family.period();
    let mut curves: Vec<(String, &Signal)> = vec![
        ("input".into(), &res.trial.input),
        ("staircase".into(), &res.staircase),
        ("oracle_zero".into(), &res.oracle_zero),
        ("oracle_staircase".into(), &res.oracle_staircase),
    ];
    for (tag, out) in [("zero", &res.from_zero), ("staircase", &res.from_staircase)] {
        for &n in snapshots {
            if let Some(u) = out.iterates.get(n) {
                curves.push((format!("{tag}_iter{n}"), u));
            }
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for (name, u) in curves {
        for i in 0..points {
            let t = period * i as f64 / points as f64;
            w.serialize(WaveRow { curve: name.clone(), t, value: u.eval(t) }).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reads waveform CSV back as named curves in file order.
pub fn read_waveforms_csv(path: &Path) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in r.deserialize::<WaveRow>() {
        let row = row.map_err(csv_err(path))?;
        match curves.last_mut() {
            Some((name, pts)) if *name == row.curve => pts.push((row.t, row.value)),
            _ => curves.push((row.curve, vec![(row.t, row.value)])),
        }
    }
    Ok(curves)
}

#[derive(Serialize)]
struct OracleRow {
    start: &'static str,
    iter: usize,
    dist_l2_rel: f64,
    dist_sobolev_rel: f64,
}

/// Distance of each iterate to its oracle limit, relative to the input norms.
pub fn fig3_oracle_distances(res: &Fig3Result) -> Vec<(&'static str, usize, f64, f64)> {
    let x = &res.trial.input;
    let mut out = Vec::new();
    for (tag, run, lim) in
        [("zero", &res.from_zero, &res.oracle_zero), ("staircase", &res.from_staircase, &res.oracle_staircase)]
    {
        for (n, u) in run.iterates.iter().enumerate() {
            let d = u.axpy(-1.0, lim);
            out.push((tag, n, d.norm_l2() / x.norm_l2(), d.sobolev_seminorm() / x.sobolev_seminorm()));
        }
    }
    out
}

pub fn write_fig3_oracle_csv(path: &Path, res: &Fig3Result) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for (start, iter, l2, sob) in fig3_oracle_distances(res) {
        w.serialize(OracleRow { start, iter, dist_l2_rel: l2, dist_sobolev_rel: sob }).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
