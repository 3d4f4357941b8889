//! Periodic bandlimited signals.
//!
//! A [`Signal`] is a real function of period `T` whose spectrum is confined to
//! the harmonics `|m| <= M` with `M = floor((T - 1e-9) / 2)`, so its bandwidth
//! never exceeds the unit Nyquist rate. Only the non-negative harmonics are
//! stored; `c_{-m} = conj(c_m)` is implied.
//!
//! A [`GridFunction`] holds arbitrary (not necessarily bandlimited) samples on a
//! uniform periodic grid and is the input of [`project_bandlimited`].

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// Slack used when deriving the harmonic cutoff from the period.
pub const BAND_EPS: f64 = 1e-9;

/// Default number of grid points per unit of time.
pub const DEFAULT_GRID_OVERSAMPLE: usize = 16;

/// Largest harmonic index allowed for `period` at unit Nyquist period.
pub fn max_harmonic(period: f64) -> usize {
    ((period - BAND_EPS) / 2.0).floor().max(0.0) as usize
}

/// Angular frequency of harmonic `m`.
#[inline]
pub fn omega(m: usize, period: f64) -> f64 {
    2.0 * PI * m as f64 / period
}

/// Inner-product structure of the ambient space.
///
/// `L2` is the canonical inner product over one period. `Sobolev` is the
/// homogeneous first-order inner product `<u', v'>_2`; constants are quotiented
/// out, so harmonic 0 carries no weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    L2,
    Sobolev,
}

impl Metric {
    pub fn inner(self, u: &Signal, v: &Signal) -> Result<f64> {
        match self {
            Metric::L2 => u.inner_l2(v),
            Metric::Sobolev => u.sobolev_inner(v),
        }
    }

    pub fn norm(self, u: &Signal) -> f64 {
        match self {
            Metric::L2 => u.norm_l2(),
            Metric::Sobolev => u.sobolev_seminorm(),
        }
    }

    /// Dimension of the real coordinate space for `M` harmonics.
    pub fn dim(self, harmonics: usize) -> usize {
        match self {
            Metric::L2 => 2 * harmonics + 1,
            Metric::Sobolev => 2 * harmonics,
        }
    }
}

/// Real `period`-periodic signal with finitely many harmonics.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    period: f64,
    coeffs: Vec<Complex64>,
}

impl Signal {
    /// Builds a signal from its harmonics `c_0 ..= c_M`.
    pub fn new(period: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        if coeffs.is_empty() {
            return Err(invalid("a signal needs at least the harmonic c_0"));
        }
        let m = coeffs.len() - 1;
        if m > max_harmonic(period) {
            return Err(invalid(format!(
                "harmonic {m} exceeds the Nyquist limit {} for period {period}",
                max_harmonic(period)
            )));
        }
        if coeffs[0].im != 0.0 {
            return Err(invalid("c_0 must be real for a real-valued signal"));
        }
        Ok(Self { period, coeffs })
    }

    /// The zero signal using the full bandwidth of `period`.
    ///
    /// Panics if `period` is not positive.
    pub fn zero(period: f64) -> Self {
        assert!(period > 0.0, "period must be positive");
        Self { period, coeffs: vec![Complex64::new(0.0, 0.0); max_harmonic(period) + 1] }
    }

    /// Constant signal equal to `value`.
    pub fn constant(period: f64, value: f64) -> Self {
        let mut s = Self::zero(period);
        s.coeffs[0] = Complex64::new(value, 0.0);
        s
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Highest stored harmonic `M`.
    pub fn harmonics(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Harmonics `c_0 ..= c_M`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Harmonic `c_m` for any signed `m`; zero outside the band.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let idx = m.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(c) if m < 0 => c.conj(),
            Some(c) => *c,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Same signal with the harmonic range widened (zero padded) or truncated to `m`.
    pub fn with_harmonics(&self, m: usize) -> Signal {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(m + 1, Complex64::new(0.0, 0.0));
        Signal { period: self.period, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Pointwise value by direct Fourier summation.
    pub fn eval(&self, t: f64) -> f64 {
        let theta = 2.0 * PI * (t / self.period).rem_euclid(1.0);
        let mut acc = 0.0;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let (s, co) = (m as f64 * theta).sin_cos();
            acc += c.re * co - c.im * s;
        }
        self.coeffs[0].re + 2.0 * acc
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut acc = self.coeffs[0].re * (b - a);
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let w = omega(m, self.period);
            let ea = Complex64::from_polar(1.0, w * a);
            let eb = Complex64::from_polar(1.0, w * b);
            acc += 2.0 * (c * (eb - ea) / Complex64::new(0.0, w)).re;
        }
        acc
    }

    /// `<self, other>_2` over one period (Parseval).
    pub fn inner_l2(&self, other: &Signal) -> Result<f64> {
        self.check_period(other)?;
        let mut acc = self.coeffs[0].re * other.coeffs[0].re;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs).skip(1) {
            acc += 2.0 * (a * b.conj()).re;
        }
        Ok(self.period * acc)
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner_l2(self).unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Root-mean-square value over one period.
    pub fn rms(&self) -> f64 {
        self.norm_l2() / self.period.sqrt()
    }

    /// Time derivative; harmonic `m` is multiplied by `i 2 pi m / T`.
    pub fn derivative(&self) -> Signal {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * Complex64::new(0.0, omega(m, self.period)))
            .collect();
        Signal { period: self.period, coeffs }
    }

    /// `<u', v'>_2`.
    pub fn sobolev_inner(&self, other: &Signal) -> Result<f64> {
        self.derivative().inner_l2(&other.derivative())
    }

    /// `||u'||_2`; zero exactly for constants.
    pub fn sobolev_seminorm(&self) -> f64 {
        self.derivative().norm_l2()
    }

    /// Copy with the constant component removed.
    pub fn without_mean(&self) -> Signal {
        let mut s = self.clone();
        s.coeffs[0] = Complex64::new(0.0, 0.0);
        s
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Signal) -> Signal {
        assert_eq!(self.period, other.period, "period mismatch");
        let m = self.harmonics().max(other.harmonics());
        let mut out = self.with_harmonics(m);
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += c * alpha;
        }
        out
    }

    /// Real coordinates in an orthonormal basis of the bandlimited space under `metric`.
    ///
    /// L2 order: `[1/sqrt(T), then for m >= 1 the pair (cos, sin)]`, each scaled to
    /// unit norm. Sobolev order drops the constant.
    pub fn to_coords(&self, metric: Metric) -> DVector<f64> {
        let m_max = self.harmonics();
        let t = self.period;
        let mut out = DVector::zeros(metric.dim(m_max));
        let mut idx = 0;
        if metric == Metric::L2 {
            out[0] = t.sqrt() * self.coeffs[0].re;
            idx = 1;
        }
        let base = (2.0 * t).sqrt();
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let scale = match metric {
                Metric::L2 => base,
                Metric::Sobolev => base * omega(m, t),
            };
            out[idx] = scale * c.re;
            out[idx + 1] = -scale * c.im;
            idx += 2;
        }
        out
    }

    /// Inverse of [`Signal::to_coords`]. Sobolev coordinates leave `c_0 = 0`.
    pub fn from_coords(period: f64, metric: Metric, coords: &DVector<f64>) -> Result<Signal> {
        let (offset, rest) = match metric {
            Metric::L2 => (1, coords.len().checked_sub(1)),
            Metric::Sobolev => (0, Some(coords.len())),
        };
        let rest = rest.ok_or_else(|| invalid("empty coordinate vector"))?;
        if rest % 2 != 0 {
            return Err(invalid("coordinate vector has an odd harmonic part"));
        }
        let m_max = rest / 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m_max + 1];
        if metric == Metric::L2 {
            coeffs[0] = Complex64::new(coords[0] / period.sqrt(), 0.0);
        }
        let base = (2.0 * period).sqrt();
        for m in 1..=m_max {
            let scale = match metric {
                Metric::L2 => base,
                Metric::Sobolev => base * omega(m, period),
            };
            let i = offset + 2 * (m - 1);
            coeffs[m] = Complex64::new(coords[i] / scale, -coords[i + 1] / scale);
        }
        Signal::new(period, coeffs)
    }

    /// Samples on a uniform grid of `n` points over one period.
    pub fn to_grid(&self, n: usize) -> GridFunction {
        let h = self.period / n as f64;
        let samples = (0..n).map(|j| self.eval(j as f64 * h)).collect();
        GridFunction { period: self.period, samples }
    }

    fn check_period(&self, other: &Signal) -> Result<()> {
        if self.period != other.period {
            return Err(Error::PeriodMismatch { left: self.period, right: other.period });
        }
        Ok(())
    }
}

impl Add<&Signal> for &Signal {
    type Output = Signal;
    fn add(self, rhs: &Signal) -> Signal {
        self.axpy(1.0, rhs)
    }
}

impl Sub<&Signal> for &Signal {
    type Output = Signal;
    fn sub(self, rhs: &Signal) -> Signal {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Signal {
    type Output = Signal;
    fn mul(self, rhs: f64) -> Signal {
        let coeffs = self.coeffs.iter().map(|c| c * rhs).collect();
        Signal { period: self.period, coeffs }
    }
}

impl Neg for &Signal {
    type Output = Signal;
    fn neg(self) -> Signal {
        self * -1.0
    }
}

/// Random bandlimited signal with i.i.d. Gaussian harmonics, scaled to `target_rms`.
pub fn random_bandlimited(period: f64, target_rms: f64, seed: u64) -> Result<Signal> {
    if !(period >= 3.0) {
        return Err(invalid(format!("random signals need period >= 3, got {period}")));
    }
    if !(target_rms >= 0.0) {
        return Err(invalid("target rms must be non-negative"));
    }
    let m_max = max_harmonic(period);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity(m_max + 1);
    coeffs.push(Complex64::new(StandardNormal.sample(&mut rng), 0.0));
    for _ in 1..=m_max {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        coeffs.push(Complex64::new(re, im));
    }
    let raw = Signal::new(period, coeffs)?;
    let rms = raw.rms();
    if target_rms == 0.0 || rms == 0.0 {
        return Ok(Signal::zero(period));
    }
    Ok(&raw * (target_rms / rms))
}

/// Real samples on the uniform grid `t_j = j T / n`, `j = 0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    period: f64,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(period: f64, samples: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(invalid("period must be positive"));
        }
        if samples.is_empty() {
            return Err(invalid("grid must be non-empty"));
        }
        Ok(Self { period, samples })
    }

    /// Samples `f` on `n` grid points.
    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = period / n as f64;
        Self::new(period, (0..n).map(|j| f(j as f64 * h)).collect())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.samples.len()).map(move |j| j as f64 * h)
    }

    /// Periodic trapezoid rule for `<self, other>_2`.
    pub fn inner_trapezoid(&self, other: &GridFunction) -> Result<f64> {
        if self.period != other.period {
            return Err(Error::PeriodMismatch { left: self.period, right: other.period });
        }
        if self.len() != other.len() {
            return Err(crate::error::mismatch("grid sizes differ"));
        }
        Ok(self.step() * self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { period: self.period, samples: self.samples.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.len() != other.len() || self.period != other.period {
            return Err(crate::error::mismatch("grid functions are not on the same grid"));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridFunction { period: self.period, samples })
    }
}

/// Grid size for `period` with `oversample` points per unit time.
pub fn grid_size(period: f64, oversample: usize) -> usize {
    (period.ceil() as usize).max(1) * oversample
}

/// L2-orthogonal projection of grid samples onto the harmonics `|m| <= cutoff`.
pub fn project_bandlimited(g: &GridFunction, cutoff: usize) -> Result<Signal> {
    let n = g.len();
    if n < 2 * cutoff + 1 {
        return Err(invalid(format!("grid of {n} points cannot resolve harmonic {cutoff}")));
    }
    if cutoff > max_harmonic(g.period) {
        return Err(invalid(format!("cutoff {cutoff} exceeds the Nyquist limit of the period")));
    }
    let mut buf: Vec<Complex64> = g.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut coeffs: Vec<Complex64> = buf[..=cutoff].iter().map(|c| c * scale).collect();
    coeffs[0].im = 0.0;
    Signal::new(g.period, coeffs)
}
