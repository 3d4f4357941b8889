//! Sampling-kernel families and their Gram matrices.
//!
//! Integration kernels live on consecutive intervals `[t_{k-1}, t_k]` of one
//! period. Interval 0 wraps around: it starts at `t_{N-1} - T` and ends at `t_0`,
//! so `N` instants always produce `N` intervals that tile the period.
//!
//! Projections onto the bandlimited space are computed from the exact Fourier
//! coefficients of each kernel, truncated to the band. A grid route
//! ([`KernelFamily::projected_kernel_grid`]) exists as a cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::signal::{
    grid_size, max_harmonic, omega, project_bandlimited, GridFunction, Metric, Signal,
};
use crate::special::FKernel;

/// Shape of the sampling kernels.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `1_[t_{k-1}, t_k]`: plain integral samples.
    Indicator,
    /// `exp(-alpha (t - t_{k-1})) 1_[t_{k-1}, t_k]`: leaky integrate-and-fire samples.
    LeakyExp { alpha: f64 },
    /// Ramp rising from 0 at `t_{k-1}` to `t_k - t_{k-1}` at `t_k`; samples are
    /// `u(t_k) - u(t_{k-1})` under the Sobolev inner product.
    Ramp,
    /// Reproducing kernel centred at `t_k`: point samples `u(t_k)`.
    Sinc,
}

/// A finite family of sampling kernels over one period.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelFamily {
    kind: KernelKind,
    instants: Vec<f64>,
    period: f64,
}

impl KernelFamily {
    pub fn new(kind: KernelKind, instants: Vec<f64>, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(invalid("period must be positive"));
        }
        if instants.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if instants.iter().any(|t| !t.is_finite()) {
            return Err(invalid("instants must be finite"));
        }
        if instants.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("instants must be strictly increasing"));
        }
        if instants[instants.len() - 1] - instants[0] >= period {
            return Err(invalid("instants must span less than one period"));
        }
        if let KernelKind::LeakyExp { alpha } = kind {
            if !(alpha >= 0.0) {
                return Err(invalid("leak must be non-negative"));
            }
        }
        Ok(Self { kind, instants, period })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn instants(&self) -> &[f64] {
        &self.instants
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    /// Harmonic cutoff of the input space.
    pub fn harmonics(&self) -> usize {
        max_harmonic(self.period)
    }

    /// Inner product of the ambient space the kernels are orthogonal in.
    pub fn metric(&self) -> Metric {
        match self.kind {
            KernelKind::Ramp => Metric::Sobolev,
            _ => Metric::L2,
        }
    }

    /// Support interval `[t_{k-1}, t_k]` of kernel `k`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        let end = self.instants[k];
        let start = if k == 0 { self.instants[self.len() - 1] - self.period } else { self.instants[k - 1] };
        (start, end)
    }

    /// All support intervals in index order.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|k| self.interval(k)).collect()
    }

    /// Largest interval length.
    pub fn max_gap(&self) -> f64 {
        self.intervals().iter().map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    /// `||g_k||^2` in the ambient space.
    pub fn weight(&self, k: usize) -> f64 {
        let (a, b) = self.interval(k);
        let len = b - a;
        match self.kind {
            KernelKind::Indicator | KernelKind::Ramp => len,
            KernelKind::LeakyExp { alpha } if alpha > 0.0 => -(-2.0 * alpha * len).exp_m1() / (2.0 * alpha),
            KernelKind::LeakyExp { .. } => len,
            KernelKind::Sinc => (2 * self.harmonics() + 1) as f64 / self.period,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.weight(k)).collect()
    }

    /// Fourier coefficient `m >= 0` of kernel `k` in the signal convention
    /// `g(t) = sum_m c_m e^{i w_m t}`. For ramps this is the coefficient of the
    /// zero-mean ramp whose derivative is the indicator minus its mean.
    pub fn kernel_coeff(&self, k: usize, m: usize) -> Complex64 {
        let t = self.period;
        let w = omega(m, t);
        let (a, b) = self.interval(k);
        match self.kind {
            KernelKind::Indicator => indicator_coeff(a, b, m, t),
            KernelKind::LeakyExp { alpha } => {
                let len = b - a;
                if m == 0 {
                    let v = if alpha > 0.0 { -(-alpha * len).exp_m1() / alpha } else { len };
                    return Complex64::new(v / t, 0.0);
                }
                let z = Complex64::new(alpha, w);
                let phase = Complex64::from_polar(1.0, -w * a);
                phase * (Complex64::new(1.0, 0.0) - (-z * len).exp()) / (z * t)
            }
            KernelKind::Ramp => {
                if m == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    indicator_coeff(a, b, m, t) / Complex64::new(0.0, w)
                }
            }
            KernelKind::Sinc => {
                if m > self.harmonics() {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(1.0 / t, -w * b)
                }
            }
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::UnknownIndex { index: k, len: self.len() });
        }
        Ok(())
    }

    /// `g~_k = P_A g_k`: the kernel truncated to the band.
    pub fn projected_kernel(&self, k: usize) -> Result<Signal> {
        self.check_index(k)?;
        let coeffs = (0..=self.harmonics()).map(|m| self.kernel_coeff(k, m)).collect();
        Signal::new(self.period, coeffs)
    }

    /// Pointwise value of kernel `k` (for ramps: of its derivative, the indicator).
    pub fn kernel_value(&self, k: usize, t: f64) -> f64 {
        let (a, b) = self.interval(k);
        let s = a + (t - a).rem_euclid(self.period);
        match self.kind {
            KernelKind::Indicator | KernelKind::Ramp => {
                if s <= b {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::LeakyExp { alpha } => {
                if s <= b {
                    (-alpha * (s - a)).exp()
                } else {
                    0.0
                }
            }
            KernelKind::Sinc => dirichlet(t - b, self.period),
        }
    }

    /// Grid route for `g~_k`: sample the kernel, project with the FFT. For ramps
    /// the derivative is projected and integrated spectrally with zero mean.
    /// Accuracy is limited by the kernel's discontinuities (first order in the grid step).
    pub fn projected_kernel_grid(&self, k: usize, oversample: usize) -> Result<Signal> {
        self.check_index(k)?;
        let n = grid_size(self.period, oversample);
        let h = self.period / n as f64;
        let samples = (0..n).map(|j| self.kernel_value(k, j as f64 * h)).collect();
        let g = GridFunction::new(self.period, samples)?;
        let p = project_bandlimited(&g, self.harmonics())?;
        if self.kind != KernelKind::Ramp {
            return Ok(p);
        }
        let coeffs = p
            .coeffs()
            .iter()
            .enumerate()
            .map(|(m, c)| if m == 0 { Complex64::new(0.0, 0.0) } else { c / Complex64::new(0.0, omega(m, self.period)) })
            .collect();
        Signal::new(self.period, coeffs)
    }

    /// Coordinates of all projected kernels, one row per kernel.
    pub fn projected_rows(&self) -> DMatrix<f64> {
        let metric = self.metric();
        let d = metric.dim(self.harmonics());
        let mut rows = DMatrix::zeros(self.len(), d);
        for k in 0..self.len() {
            let g = self.projected_kernel(k).expect("index in range");
            rows.set_row(k, &g.to_coords(metric).transpose());
        }
        rows
    }

    /// `<g_k, g_k'>` in the ambient space by Gauss-Legendre quadrature over the
    /// overlap of the supports (exactly zero when supports are disjoint).
    pub fn ambient_inner_quadrature(&self, k: usize, kp: usize) -> Result<f64> {
        self.check_index(k)?;
        self.check_index(kp)?;
        if self.kind == KernelKind::Sinc {
            return Ok(dirichlet(self.instants[k] - self.instants[kp], self.period));
        }
        let (a, b) = self.interval(k);
        let (c, d) = self.interval(kp);
        let mut total = 0.0;
        for shift in [-self.period, 0.0, self.period] {
            let lo = a.max(c + shift);
            let hi = b.min(d + shift);
            if hi > lo {
                total += quad::composite_gauss(
                    |t| self.kernel_value(k, t) * self.kernel_value(kp, t),
                    lo,
                    hi,
                    4,
                    16,
                );
            }
        }
        Ok(total)
    }
}

/// Fourier coefficient `m` of `1_[a, b]` over one period.
pub fn indicator_coeff(a: f64, b: f64, m: usize, period: f64) -> Complex64 {
    if m == 0 {
        return Complex64::new((b - a) / period, 0.0);
    }
    let w = omega(m, period);
    (Complex64::from_polar(1.0, -w * a) - Complex64::from_polar(1.0, -w * b)) / Complex64::new(0.0, w * period)
}

/// Reproducing kernel of the periodic bandlimited space, `(1/T) sum_{|m|<=M} e^{i w_m t}`.
pub fn dirichlet(t: f64, period: f64) -> f64 {
    let m = max_harmonic(period);
    let n = (2 * m + 1) as f64;
    let x = std::f64::consts::PI * t / period;
    let s = x.sin();
    if s.abs() < 1e-9 {
        let c = (n * x).cos() / x.cos();
        return n / period * c;
    }
    (n * x).sin() / (period * s)
}

/// Dense matrix `h_{k,k'} = <g~_k', g_k> / ||g_k'||^2` of the operator `S S*`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    weights: Vec<f64>,
}

impl GramMatrix {
    /// Builds from raw inner products `<g~_k', g_k>` (row `k`, column `k'`).
    pub fn from_inner_products(inner: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        if inner.nrows() != weights.len() || inner.ncols() != weights.len() {
            return Err(crate::error::mismatch("Gram size and weight count differ"));
        }
        let mut entries = inner;
        for (kp, w) in weights.iter().enumerate() {
            entries.column_mut(kp).scale_mut(1.0 / w);
        }
        Ok(Self { entries, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn entry(&self, k: usize, kp: usize) -> f64 {
        self.entries[(k, kp)]
    }

    /// `D h D^{-1}` with `D = diag(1/||g_k||)`: the symmetric form sharing `h`'s spectrum.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.len();
        let sq: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(n, n, |k, kp| self.entries[(k, kp)] * sq[kp] / sq[k])
    }

    /// `S S* c`.
    pub fn apply(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.entries * c
    }
}

/// How Gram entries are computed.
#[derive(Clone, Debug)]
pub enum GramRoute {
    /// Parseval sums over the exact projected-kernel coefficients (all kinds).
    Spectral,
    /// Single-argument closed forms (indicator and ramp via four-term `f`
    /// expansion, sinc via the Dirichlet kernel).
    ClosedForm(FKernel),
}

/// Gram matrix of `S S*` for `fam`.
pub fn gram_matrix(fam: &KernelFamily, route: &GramRoute) -> Result<GramMatrix> {
    if fam.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let n = fam.len();
    let inner = match route {
        GramRoute::Spectral => {
            let rows = fam.projected_rows();
            &rows * rows.transpose()
        }
        GramRoute::ClosedForm(f) => {
            let iv = fam.intervals();
            match fam.kind() {
                KernelKind::Indicator => {
                    DMatrix::from_fn(n, n, |k, kp| f.indicator_inner(iv[k].0, iv[k].1, iv[kp].0, iv[kp].1))
                }
                KernelKind::Ramp => DMatrix::from_fn(n, n, |k, kp| {
                    let (a, b) = iv[k];
                    let (c, d) = iv[kp];
                    f.indicator_inner(a, b, c, d) - (b - a) * (d - c) / fam.period()
                }),
                KernelKind::Sinc => {
                    let t = fam.instants();
                    DMatrix::from_fn(n, n, |k, kp| dirichlet(t[k] - t[kp], fam.period()))
                }
                KernelKind::LeakyExp { .. } => {
                    return Err(invalid("leaky kernels have no closed-form Gram; use the spectral route"))
                }
            }
        }
    };
    GramMatrix::from_inner_products(inner, fam.weights())
}
