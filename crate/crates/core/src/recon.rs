//! Reconstruction iterations.
//!
//! * relaxed POCS `u <- u + lambda S*(s - S u)`, continuous form and the
//!   equivalent discrete recursion on the Gram matrix;
//! * Kaczmarz sweeps (cyclic or randomly permuted);
//! * the frame algorithm (POCS form with point-sampling kernels and the
//!   optimal relaxation by default);
//! * the Grochenig iteration `u <- u + lambda P_B L(x - u)` with `L` the
//!   periodic piecewise-linear interpolant.

use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoders::Crossing;
use crate::error::{invalid, mismatch, Error, Result};
use crate::kernels::indicator_coeff;
use crate::operators::{SampleSequence, SamplingOperator};
use crate::signal::{max_harmonic, omega, GridFunction, Metric, Signal};

/// Default relative step tolerance of the stop rule.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration budget.
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Relaxation coefficients `lambda_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Relaxation {
    Constant(f64),
    /// Per-iteration values; the last one repeats once the list runs out.
    Schedule(Vec<f64>),
}

impl Default for Relaxation {
    fn default() -> Self {
        Relaxation::Constant(1.0)
    }
}

impl Relaxation {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Relaxation::Constant(l) => *l,
            Relaxation::Schedule(v) => v.get(n).or(v.last()).copied().unwrap_or(1.0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Relaxation::Constant(l) => vec![*l],
            Relaxation::Schedule(v) => v.clone(),
        }
    }

    /// Checks every coefficient lies in the open interval `(0, 2)`.
    pub fn validate(&self) -> Result<()> {
        let v = self.values();
        if v.is_empty() {
            return Err(invalid("empty relaxation schedule"));
        }
        if let Some(l) = v.iter().find(|l| !(**l > 0.0 && **l < 2.0)) {
            return Err(invalid(format!("relaxation {l} is outside (0, 2)")));
        }
        Ok(())
    }
}

/// One row of an iteration history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    /// `||u^(n) - x||_2 / ||x||_2`, NaN without a reference.
    pub err_l2_rel: f64,
    /// `||(u^(n) - x)'||_2 / ||x'||_2`, NaN without a reference.
    pub err_sobolev_rel: f64,
    /// Norm of the last update (0 for the initial row).
    pub step_norm: f64,
}

/// Iteration settings shared by all algorithms.
#[derive(Clone, Debug)]
pub struct ReconRun {
    pub u0: Signal,
    pub relaxation: Relaxation,
    pub max_iters: usize,
    pub tol: f64,
    pub truth: Option<Signal>,
    pub record_iterates: bool,
}

impl ReconRun {
    pub fn new(u0: Signal) -> Self {
        Self {
            u0,
            relaxation: Relaxation::default(),
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            truth: None,
            record_iterates: false,
        }
    }

    pub fn relaxation(mut self, r: Relaxation) -> Self {
        self.relaxation = r;
        self
    }

    pub fn lambda(self, l: f64) -> Self {
        self.relaxation(Relaxation::Constant(l))
    }

    pub fn max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn truth(mut self, x: Signal) -> Self {
        self.truth = Some(x);
        self
    }

    pub fn record_iterates(mut self, yes: bool) -> Self {
        self.record_iterates = yes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(invalid("tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Final estimate plus diagnostics.
#[derive(Clone, Debug)]
pub struct ReconOutcome {
    pub estimate: Signal,
    pub history: Vec<HistoryRow>,
    pub iterations: usize,
    pub converged: bool,
    pub warning: Option<String>,
    /// `u^(0), u^(1), ...` when requested.
    pub iterates: Vec<Signal>,
}

fn history_row(iter: usize, u: &Signal, truth: Option<&Signal>, step_norm: f64) -> HistoryRow {
    let (l2, sob) = match truth {
        Some(x) => {
            let e = u.axpy(-1.0, x);
            let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
            (rel(e.norm_l2(), x.norm_l2()), rel(e.sobolev_seminorm(), x.sobolev_seminorm()))
        }
        None => (f64::NAN, f64::NAN),
    };
    HistoryRow { iter, err_l2_rel: l2, err_sobolev_rel: sob, step_norm }
}

/// Shared driver: `update(n, coords)` returns the next coordinates.
fn drive(
    op: &SamplingOperator,
    run: &ReconRun,
    mut update: impl FnMut(usize, &DVector<f64>) -> DVector<f64>,
) -> Result<ReconOutcome> {
    run.validate()?;
    let mut a = op.coords_of(&run.u0)?;
    let truth = run.truth.as_ref();
    let u = op.signal_of(&a)?;
    let mut history = vec![history_row(0, &u, truth, 0.0)];
    let mut iterates = if run.record_iterates { vec![u] } else { Vec::new() };
    let mut converged = false;
    let mut iterations = 0;
    for n in 0..run.max_iters {
        let next = update(n, &a);
        let step = (&next - &a).norm();
        a = next;
        iterations = n + 1;
        let u = op.signal_of(&a)?;
        history.push(history_row(n + 1, &u, truth, step));
        if run.record_iterates {
            iterates.push(u);
        }
        if step / a.norm().max(1.0) < run.tol {
            converged = true;
            break;
        }
    }
    Ok(ReconOutcome { estimate: op.signal_of(&a)?, history, iterations, converged, warning: None, iterates })
}

fn check_samples(op: &SamplingOperator, s: &SampleSequence) -> Result<DVector<f64>> {
    if s.weights() != op.weights() {
        return Err(mismatch("samples do not belong to this operator"));
    }
    Ok(s.to_vector())
}

/// `u + lambda S*(s - S u)`.
pub fn pocs_step(op: &SamplingOperator, s: &SampleSequence, u: &Signal, lambda: f64) -> Result<Signal> {
    let sv = check_samples(op, s)?;
    let a = op.coords_of(u)?;
    let r = sv - op.apply_coords(&a);
    op.signal_of(&(a + op.adjoint_coords(&r) * lambda))
}

/// Relaxed POCS until the stop rule or the iteration budget.
pub fn pocs_run(op: &SamplingOperator, s: &SampleSequence, run: &ReconRun) -> Result<ReconOutcome> {
    run.relaxation.validate()?;
    let sv = check_samples(op, s)?;
    drive(op, run, |n, a| {
        let r = &sv - op.apply_coords(a);
        a + op.adjoint_coords(&r) * run.relaxation.at(n)
    })
}

/// The discrete recursion `c <- c + lambda (s0 - H c)` with `s0 = s - S u0`,
/// synthesizing `u0 + S* c` once at the end.
pub fn pocs_discrete_run(
    op: &SamplingOperator,
    s: &SampleSequence,
    u0: &Signal,
    relaxation: &Relaxation,
    n_iters: usize,
) -> Result<Signal> {
    let (c, a0) = discrete_iterate(op, s, u0, relaxation, n_iters, |_| {})?;
    op.signal_of(&(a0 + op.adjoint_coords(&c)))
}

/// Like [`pocs_discrete_run`] but synthesizes every iterate `u^(0) ..= u^(n_iters)`.
pub fn pocs_discrete_trajectory(
    op: &SamplingOperator,
    s: &SampleSequence,
    u0: &Signal,
    relaxation: &Relaxation,
    n_iters: usize,
) -> Result<Vec<Signal>> {
    let mut cs = Vec::with_capacity(n_iters + 1);
    let (_, a0) = discrete_iterate(op, s, u0, relaxation, n_iters, |c| cs.push(c.clone()))?;
    cs.iter().map(|c| op.signal_of(&(&a0 + op.adjoint_coords(c)))).collect()
}

fn discrete_iterate(
    op: &SamplingOperator,
    s: &SampleSequence,
    u0: &Signal,
    relaxation: &Relaxation,
    n_iters: usize,
    mut visit: impl FnMut(&DVector<f64>),
) -> Result<(DVector<f64>, DVector<f64>)> {
    let sv = check_samples(op, s)?;
    let a0 = op.coords_of(u0)?;
    let gram = op.gram();
    if gram.len() != sv.len() {
        return Err(mismatch("Gram size differs from sample count"));
    }
    let s0 = sv - op.apply_coords(&a0);
    let mut c = DVector::zeros(s0.len());
    visit(&c);
    for n in 0..n_iters {
        c += (&s0 - gram.apply(&c)) * relaxation.at(n);
        visit(&c);
    }
    Ok((c, a0))
}

/// Order of the projections inside one Kaczmarz sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KaczmarzOrder {
    Cyclic,
    /// A fresh random permutation for every sweep.
    RandomPermutation { seed: u64 },
}

fn kaczmarz_sweep_coords(op: &SamplingOperator, sv: &DVector<f64>, a: &mut DVector<f64>, order: &[usize]) {
    let rows = op.rows();
    for &k in order {
        let r = rows.row(k);
        let nrm = r.norm_squared();
        if nrm == 0.0 {
            continue;
        }
        let coef = (sv[k] - r.dot(&a.transpose())) / nrm;
        for (ai, ri) in a.iter_mut().zip(r.iter()) {
            *ai += coef * ri;
        }
    }
}

/// One pass of successive hyperplane projections `u <- u + (s_k - <u, g~_k>) g~_k / ||g~_k||^2`.
pub fn kaczmarz_sweep(op: &SamplingOperator, s: &SampleSequence, u: &Signal, order: &[usize]) -> Result<Signal> {
    let sv = check_samples(op, s)?;
    if let Some(k) = order.iter().find(|&&k| k >= op.num_samples()) {
        return Err(Error::UnknownIndex { index: *k, len: op.num_samples() });
    }
    let mut a = op.coords_of(u)?;
    kaczmarz_sweep_coords(op, &sv, &mut a, order);
    op.signal_of(&a)
}

/// Kaczmarz sweeps; one iteration is one full sweep. Relaxation is not used.
pub fn kaczmarz_run(
    op: &SamplingOperator,
    s: &SampleSequence,
    order: KaczmarzOrder,
    run: &ReconRun,
) -> Result<ReconOutcome> {
    let sv = check_samples(op, s)?;
    let mut perm: Vec<usize> = (0..op.num_samples()).collect();
    let mut rng = match order {
        KaczmarzOrder::Cyclic => None,
        KaczmarzOrder::RandomPermutation { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    drive(op, run, |_, a| {
        if let Some(rng) = rng.as_mut() {
            perm.shuffle(rng);
        }
        let mut next = a.clone();
        kaczmarz_sweep_coords(op, &sv, &mut next, &perm);
        next
    })
}

/// Frame algorithm: the POCS recursion run with a fixed relaxation, by default
/// `2 / (gamma^2 + ||S||^2)`. A relaxation outside `(0, 2/||S||^2)` is flagged.
pub fn frame_algorithm_run(
    op: &SamplingOperator,
    s: &SampleSequence,
    lambda: Option<f64>,
    run: &ReconRun,
) -> Result<ReconOutcome> {
    let sv = check_samples(op, s)?;
    let bounds = op.spectral_bounds();
    let lambda = lambda.unwrap_or_else(|| bounds.optimal_relaxation());
    let limit = 2.0 / (bounds.norm * bounds.norm);
    let mut out = drive(op, run, |_, a| {
        let r = &sv - op.apply_coords(a);
        a + op.adjoint_coords(&r) * lambda
    })?;
    if !(lambda > 0.0 && lambda < limit) {
        out.warning = Some(format!("relaxation {lambda} outside the contraction range (0, {limit})"));
    }
    Ok(out)
}

/// Periodic piecewise-linear interpolant through `(t_k, v_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    period: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(times: Vec<f64>, values: Vec<f64>, period: f64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(mismatch("times and values differ in length"));
        }
        if times.is_empty() {
            return Err(invalid("an interpolant needs at least one point"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("interpolation instants must be strictly increasing"));
        }
        if times[times.len() - 1] - times[0] >= period {
            return Err(invalid("interpolation instants must span less than a period"));
        }
        Ok(Self { period, times, values })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn segment(&self, k: usize) -> (f64, f64, f64, f64) {
        let n = self.times.len();
        let j = (k + n - 1) % n;
        let a = if k == 0 { self.times[n - 1] - self.period } else { self.times[k - 1] };
        (a, self.times[k], self.values[j], self.values[k])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        let t0 = self.times[n - 1] - self.period;
        let s = t0 + (t - t0).rem_euclid(self.period);
        let k = self.times.partition_point(|&x| x < s);
        let (a, b, va, vb) = self.segment(k.min(n - 1));
        if b == a {
            return vb;
        }
        va + (vb - va) * (s - a) / (b - a)
    }

    /// Slope on `(t_{k-1}, t_k)`.
    pub fn slope(&self, k: usize) -> f64 {
        let (a, b, va, vb) = self.segment(k);
        (vb - va) / (b - a)
    }

    pub fn to_grid(&self, n: usize) -> Result<GridFunction> {
        GridFunction::from_fn(self.period, n, |t| self.eval(t))
    }

    /// Exact `P_B` of the interpolant with `m_max` harmonics.
    pub fn project(&self, m_max: usize) -> Result<Signal> {
        let t = self.period;
        let n = self.times.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m_max + 1];
        let mut mean = 0.0;
        for k in 0..n {
            let (a, b, va, vb) = self.segment(k);
            mean += 0.5 * (va + vb) * (b - a);
            let slope = (vb - va) / (b - a);
            if slope == 0.0 {
                continue;
            }
            for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
                *c += indicator_coeff(a, b, m, t) * slope;
            }
        }
        coeffs[0] = Complex64::new(mean / t, 0.0);
        for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c /= Complex64::new(0.0, omega(m, t));
        }
        Signal::new(t, coeffs)
    }
}

/// Periodic piecewise-linear interpolant of `(t_k, v_k)`.
pub fn linear_interpolant(times: &[f64], values: &[f64], period: f64) -> Result<PiecewiseLinear> {
    PiecewiseLinear::new(times.to_vec(), values.to_vec(), period)
}

/// `u <- u + lambda P_B L(v - u(t))`, recording errors against `run.truth`.
/// Step norms and the stop rule use the L2 norm.
pub fn grochenig_run(times: &[f64], values: &[f64], period: f64, run: &ReconRun) -> Result<ReconOutcome> {
    if times.len() < 2 {
        return Err(invalid("the iteration needs at least two points"));
    }
    run.validate()?;
    run.relaxation.validate()?;
    if run.u0.period() != period {
        return Err(Error::PeriodMismatch { left: run.u0.period(), right: period });
    }
    let m_max = max_harmonic(period);
    PiecewiseLinear::new(times.to_vec(), values.to_vec(), period)?;
    let mut u = run.u0.with_harmonics(m_max);
    let truth = run.truth.as_ref();
    let mut history = vec![history_row(0, &u, truth, 0.0)];
    let mut iterates = if run.record_iterates { vec![u.clone()] } else { Vec::new() };
    let mut converged = false;
    let mut iterations = 0;
    for n in 0..run.max_iters {
        let residual: Vec<f64> = times.iter().zip(values).map(|(t, v)| v - u.eval(*t)).collect();
        let l = PiecewiseLinear { period, times: times.to_vec(), values: residual };
        let step = &l.project(m_max)? * run.relaxation.at(n);
        u = &u + &step;
        iterations = n + 1;
        let step_norm = step.norm_l2();
        history.push(history_row(n + 1, &u, truth, step_norm));
        if run.record_iterates {
            iterates.push(u.clone());
        }
        if step_norm / u.norm_l2().max(1.0) < run.tol {
            converged = true;
            break;
        }
    }
    Ok(ReconOutcome { estimate: u, history, iterations, converged, warning: None, iterates })
}

/// Bandlimited version of the left-hold staircase through the crossings.
pub fn staircase_initializer(crossings: &[Crossing], period: f64) -> Result<Signal> {
    if crossings.is_empty() {
        return Err(invalid("no crossings to hold"));
    }
    let m_max = max_harmonic(period);
    let n = crossings.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m_max + 1];
    for k in 0..n {
        let a = crossings[k].time;
        let b = if k + 1 < n { crossings[k + 1].time } else { crossings[0].time + period };
        if b <= a {
            return Err(invalid("crossing times must be strictly increasing"));
        }
        for (m, c) in coeffs.iter_mut().enumerate() {
            *c += indicator_coeff(a, b, m, period) * crossings[k].level;
        }
    }
    coeffs[0].im = 0.0;
    Signal::new(period, coeffs)
}

/// Writes `iter, err_l2_rel, err_sobolev_rel, step_norm` rows.
pub fn write_history_csv(path: &Path, history: &[HistoryRow]) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in history {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reference limit of relaxed POCS from `u0`: `S^+ s + P_{F^perp} u0`.
pub fn pocs_limit(op: &SamplingOperator, s: &SampleSequence, u0: &Signal) -> Result<Signal> {
    op.consistent_limit(s, u0)
}

/// Norm of `u` in the operator's metric.
pub fn metric_norm(op: &SamplingOperator, u: &Signal) -> f64 {
    match op.metric() {
        Metric::L2 => u.norm_l2(),
        Metric::Sobolev => u.sobolev_seminorm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::{instant_generator, level_crossings, InstantScenario};
    use crate::kernels::{KernelFamily, KernelKind};
    use crate::signal::{grid_size, project_bandlimited, random_bandlimited};

    fn setup(kind: KernelKind, lo: f64, hi: f64, seed: u64) -> (SamplingOperator, Signal, SampleSequence) {
        let period = 63.0;
        let t = instant_generator(&InstantScenario::UniformGap { lo, hi }, seed, period).unwrap();
        let op = SamplingOperator::new(KernelFamily::new(kind, t, period).unwrap()).unwrap();
        let x = random_bandlimited(period, 1.0, seed + 100).unwrap();
        let s = op.apply(&x).unwrap();
        (op, x, s)
    }

    #[test]
    fn relaxation_schedule() {
        let r = Relaxation::Schedule(vec![0.5, 1.5]);
        assert_eq!((r.at(0), r.at(1), r.at(7)), (0.5, 1.5, 1.5));
        assert!(Relaxation::Constant(2.0).validate().is_err());
        assert!(Relaxation::Schedule(vec![1.0, 0.0]).validate().is_err());
        assert!(Relaxation::Constant(1.9).validate().is_ok());
    }

    #[test]
    fn pocs_step_trivial_cases() {
        let (op, x, s) = setup(KernelKind::Indicator, 0.3, 1.0, 1);
        for l in [0.3, 1.0, 1.7] {
            let y = pocs_step(&op, &s, &x, l).unwrap();
            assert!((&y - &x).norm_l2() < 1e-12);
        }
        let u = random_bandlimited(63.0, 1.0, 5).unwrap();
        assert!((&pocs_step(&op, &s, &u, 0.0).unwrap() - &u).norm_l2() < 1e-14);
        let single = SamplingOperator::new(KernelFamily::new(KernelKind::Indicator, vec![2.0], 63.0).unwrap()).unwrap();
        let s1 = single.samples(DVector::from_vec(vec![0.7]));
        let y = pocs_step(&single, &s1, &Signal::zero(63.0), 0.4).unwrap();
        let g = single.family().unwrap().projected_kernel(0).unwrap();
        let expected = &g * (0.4 * 0.7 / 63.0);
        assert!((&y - &expected).norm_l2() < 1e-14);
    }

    #[test]
    fn pocs_reaches_pseudo_inverse_limit() {
        let (op, x, s) = setup(KernelKind::Indicator, 0.3, 1.0, 2);
        let u0 = random_bandlimited(63.0, 0.5, 9).unwrap();
        let out = pocs_run(&op, &s, &ReconRun::new(u0.clone()).max_iters(5000)).unwrap();
        assert!(out.converged);
        let limit = pocs_limit(&op, &s, &u0).unwrap();
        assert!((&out.estimate - &limit).norm_l2() < 1e-6 * x.norm_l2());
        assert!((&out.estimate - &x).norm_l2() < 1e-6 * x.norm_l2());
    }

    #[test]
    fn discrete_path_matches_continuous_path() {
        let (op, x, s) = setup(KernelKind::LeakyExp { alpha: 0.3 }, 0.3, 1.0, 3);
        let u0 = random_bandlimited(63.0, 0.2, 1).unwrap();
        let r = Relaxation::Schedule((0..50).map(|n| 0.5 + (n % 5) as f64 * 0.3).collect());
        let run = ReconRun::new(u0.clone()).relaxation(r.clone()).max_iters(50).tol(0.0).truth(x).record_iterates(true);
        let cont = pocs_run(&op, &s, &run).unwrap();
        let disc = pocs_discrete_trajectory(&op, &s, &u0, &r, 50).unwrap();
        for (a, b) in cont.iterates.iter().zip(&disc) {
            assert!((a - b).norm_l2() < 1e-8);
        }
        let last = pocs_discrete_run(&op, &s, &u0, &r, 50).unwrap();
        assert!((&last - &cont.estimate).norm_l2() < 1e-8);
        assert!((&pocs_discrete_run(&op, &s, &u0, &r, 0).unwrap() - &u0).norm_l2() < 1e-14);
        let zero = Relaxation::Constant(0.0);
        assert!((&pocs_discrete_run(&op, &s, &u0, &zero, 10).unwrap() - &u0).norm_l2() < 1e-15);
    }

    #[test]
    fn error_is_monotone() {
        let (op, x, s) = setup(KernelKind::Indicator, 0.0, 0.5, 4);
        for l in [0.5, 1.0, 1.5, 1.9] {
            let out = pocs_run(&op, &s, &ReconRun::new(Signal::zero(63.0)).lambda(l).max_iters(60).truth(x.clone())).unwrap();
            for w in out.history.windows(2) {
                assert!(w[1].err_l2_rel <= w[0].err_l2_rel + 1e-12);
            }
        }
    }

    #[test]
    fn kaczmarz_basics() {
        let (op, x, s) = setup(KernelKind::Indicator, 0.3, 1.0, 5);
        let order: Vec<usize> = (0..op.num_samples()).collect();
        let y = kaczmarz_sweep(&op, &s, &x, &order).unwrap();
        assert!((&y - &x).norm_l2() < 1e-12);
        for ord in [KaczmarzOrder::Cyclic, KaczmarzOrder::RandomPermutation { seed: 3 }] {
            let out = kaczmarz_run(&op, &s, ord, &ReconRun::new(Signal::zero(63.0)).max_iters(400).truth(x.clone())).unwrap();
            for w in out.history.windows(2) {
                assert!(w[1].err_l2_rel <= w[0].err_l2_rel + 1e-12);
            }
            assert!(out.history.last().unwrap().err_l2_rel < 1e-6, "{ord:?}");
        }
        let single = SamplingOperator::new(KernelFamily::new(KernelKind::Sinc, vec![3.0], 63.0).unwrap()).unwrap();
        let s1 = single.samples(DVector::from_vec(vec![1.3]));
        let y = kaczmarz_sweep(&single, &s1, &Signal::zero(63.0), &[0]).unwrap();
        let g = single.family().unwrap().projected_kernel(0).unwrap();
        assert!((&y - &(&g * 1.3)).norm_l2() < 1e-12);
    }

    #[test]
    fn frame_algorithm_cases() {
        let period = 63.0;
        let uniform: Vec<f64> = (0..63).map(|k| k as f64).collect();
        let op = SamplingOperator::new(KernelFamily::new(KernelKind::Sinc, uniform, period).unwrap()).unwrap();
        let x = random_bandlimited(period, 1.0, 1).unwrap();
        let s = op.apply(&x).unwrap();
        let out = frame_algorithm_run(&op, &s, Some(1.0), &ReconRun::new(Signal::zero(period)).max_iters(1)).unwrap();
        assert!((&out.estimate - &x).norm_l2() < 1e-10);

        let (op, x, s) = setup(KernelKind::Sinc, 0.3, 1.0, 6);
        let b = op.spectral_bounds();
        let lam = b.optimal_relaxation();
        let limit = op.pseudo_inverse_apply(&s).unwrap();
        let run = ReconRun::new(Signal::zero(period)).max_iters(40).tol(0.0).record_iterates(true).truth(x);
        let out = frame_algorithm_run(&op, &s, None, &run).unwrap();
        assert!(out.warning.is_none());
        let errs: Vec<f64> = out.iterates.iter().map(|u| (u - &limit).norm_l2()).collect();
        for w in errs.windows(2).filter(|w| w[0] > 1e-9) {
            assert!(w[1] / w[0] <= b.contraction_factor(lam) + 1e-8);
        }
        let bad = frame_algorithm_run(&op, &s, Some(3.0 / b.norm.powi(2)), &ReconRun::new(Signal::zero(period)).max_iters(2)).unwrap();
        assert!(bad.warning.is_some());
        let tiny = frame_algorithm_run(&op, &s, Some(1e-9), &ReconRun::new(Signal::zero(period)).max_iters(1)).unwrap();
        assert!(tiny.history[1].step_norm < 1e-7);
    }

    #[test]
    fn interpolant_properties() {
        let l = linear_interpolant(&[1.0, 4.0], &[2.0, 2.0], 10.0).unwrap();
        for t in [0.0, 1.0, 3.3, 9.9] {
            assert_eq!(l.eval(t), 2.0);
        }
        let times = [0.5, 1.7, 3.0, 6.2];
        let vals = [1.0, -2.0, 0.5, 3.0];
        let l = linear_interpolant(&times, &vals, 8.0).unwrap();
        for (t, v) in times.iter().zip(&vals) {
            assert!((l.eval(*t) - v).abs() < 1e-15);
        }
        assert!((l.slope(2) - (0.5 + 2.0) / 1.3).abs() < 1e-14);
        assert!((l.eval(7.0) - (3.0 + (1.0 - 3.0) * 0.8 / 2.3)).abs() < 1e-14);
        assert!(linear_interpolant(&[1.0, 1.0], &[0.0, 0.0], 8.0).is_err());
        // exact projection agrees with the grid route
        let exact = l.project(max_harmonic(8.0)).unwrap();
        let grid = project_bandlimited(&l.to_grid(grid_size(8.0, 512)).unwrap(), max_harmonic(8.0)).unwrap();
        assert!((&exact - &grid).norm_l2() < 1e-4);
    }

    #[test]
    fn grochenig_fixed_point_and_dense_convergence() {
        let period = 63.0;
        let t = instant_generator(&InstantScenario::UniformGap { lo: 0.3, hi: 0.9 }, 7, period).unwrap();
        let x = random_bandlimited(period, 1.0, 70).unwrap();
        let v: Vec<f64> = t.iter().map(|&s| x.eval(s)).collect();
        let fixed = grochenig_run(&t, &v, period, &ReconRun::new(x.clone()).max_iters(3)).unwrap();
        assert!((&fixed.estimate - &x).norm_l2() < 1e-12);
        let out = grochenig_run(&t, &v, period, &ReconRun::new(Signal::zero(period)).truth(x.clone())).unwrap();
        assert!(out.history.last().unwrap().err_sobolev_rel < 1e-8);
        assert!(grochenig_run(&t[..1], &v[..1], period, &ReconRun::new(Signal::zero(period))).is_err());
    }

    #[test]
    fn grochenig_matches_ramp_pocs_up_to_constant() {
        let period = 63.0;
        let t = instant_generator(&InstantScenario::UniformGap { lo: 0.5, hi: 1.6 }, 8, period).unwrap();
        let x = random_bandlimited(period, 1.0, 80).unwrap();
        let v: Vec<f64> = t.iter().map(|&s| x.eval(s)).collect();
        let op = SamplingOperator::new(KernelFamily::new(KernelKind::Ramp, t.clone(), period).unwrap()).unwrap();
        let s = op.apply(&x).unwrap();
        let run = ReconRun::new(Signal::zero(period)).max_iters(30).tol(0.0).record_iterates(true);
        let g = grochenig_run(&t, &v, period, &run).unwrap();
        let p = pocs_run(&op, &s, &run).unwrap();
        for (a, b) in g.iterates.iter().zip(&p.iterates) {
            assert!((a - b).sobolev_seminorm() < 1e-9);
        }
    }

    #[test]
    fn staircase_cases() {
        let c = [Crossing { time: 2.0, level: 0.7 }];
        let s = staircase_initializer(&c, 15.0).unwrap();
        assert!((&s - &Signal::constant(15.0, 0.7)).norm_l2() < 1e-14);
        assert!(staircase_initializer(&[], 15.0).is_err());
        let x = random_bandlimited(63.0, 1.0, 4).unwrap();
        let cr = level_crossings(&x, 0.5, 0.0);
        let st = staircase_initializer(&cr, 63.0).unwrap();
        assert_eq!(st.harmonics(), 31);
        // left-hold staircase sampled on a fine grid, then projected
        let n = grid_size(63.0, 256);
        let held = GridFunction::from_fn(63.0, n, |t| {
            let k = cr.partition_point(|p| p.time <= t);
            if k == 0 { cr[cr.len() - 1].level } else { cr[k - 1].level }
        })
        .unwrap();
        let grid = project_bandlimited(&held, 31).unwrap();
        assert!((&grid - &st).norm_l2() < 1e-2 * st.norm_l2());
    }

    #[test]
    fn history_csv_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        let rows = [HistoryRow { iter: 0, err_l2_rel: 1.0, err_sobolev_rel: 1.0, step_norm: 0.0 }];
        write_history_csv(&p, &rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("iter,err_l2_rel,err_sobolev_rel,step_norm\n0,1.0,1.0,0.0"));
    }
}
