//! Multi-channel time encoding: `M` channels observe `x = A y` for `N` sources
//! `y`, each channel takes integral samples on its own instants, and the
//! sources are recovered by POCS on the stacked operator.
//!
//! The input space is `{u in B^M : u(t) in ran(A)}`. Coordinates are stacked
//! channel by channel, and samples are ordered channel-major.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::encoders::{self, EncodingSpec};
use crate::error::{invalid, mismatch, Error, Result};
use crate::kernels::{GramMatrix, GramRoute, KernelFamily, KernelKind};
use crate::linalg::Svd;
use crate::operators::{SampleSequence, SamplingOperator, DEFAULT_RANK_CUTOFF};
use crate::recon::Relaxation;
use crate::signal::{max_harmonic, project_bandlimited, GridFunction, Metric, Signal};

/// Mixing matrix `A` with its pseudo-inverse and the projector `P = A A^+`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    a: DMatrix<f64>,
    pinv: DMatrix<f64>,
    p: DMatrix<f64>,
}

impl ChannelMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(invalid("mixing matrix must be non-empty"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("mixing matrix must be finite"));
        }
        let pinv = Svd::new(&a).pseudo_inverse(DEFAULT_RANK_CUTOFF);
        let p = &a * &pinv;
        Ok(Self { a, pinv, p })
    }

    /// Builds from row-major nested vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(mismatch("mixing matrix rows differ in length"));
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn pinv(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    /// `A A^+`, entries `a_{ii'}`.
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn channels(&self) -> usize {
        self.a.nrows()
    }

    pub fn sources(&self) -> usize {
        self.a.ncols()
    }
}

/// Pointwise linear combination `out_i = sum_j m_ij u_j` of signals.
fn mix(m: &DMatrix<f64>, u: &[Signal]) -> Result<Vec<Signal>> {
    if m.ncols() != u.len() {
        return Err(mismatch(format!("matrix has {} columns but {} signals were given", m.ncols(), u.len())));
    }
    let period = u[0].period();
    if let Some(bad) = u.iter().find(|s| s.period() != period) {
        return Err(Error::PeriodMismatch { left: bad.period(), right: period });
    }
    Ok((0..m.nrows())
        .map(|i| u.iter().enumerate().fold(Signal::zero(period), |acc, (j, s)| acc.axpy(m[(i, j)], s)))
        .collect())
}

/// Samples of one channel. An empty value list marks a channel without samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSamples {
    pub family: KernelFamily,
    pub values: Vec<f64>,
}

/// Integral samples of all channels.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelSamples {
    period: f64,
    channels: Vec<ChannelSamples>,
}

impl MultiChannelSamples {
    /// Channels must use indicator kernels on a common period.
    pub fn new(period: f64, channels: Vec<ChannelSamples>) -> Result<Self> {
        for (i, c) in channels.iter().enumerate() {
            if c.family.kind() != KernelKind::Indicator {
                return Err(invalid(format!("channel {i} does not use integral samples")));
            }
            if c.family.period() != period {
                return Err(Error::PeriodMismatch { left: c.family.period(), right: period });
            }
            if !c.values.is_empty() && c.values.len() != c.family.len() {
                return Err(mismatch(format!("channel {i} has {} values for {} kernels", c.values.len(), c.family.len())));
            }
        }
        Ok(Self { period, channels })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn channels(&self) -> &[ChannelSamples] {
        &self.channels
    }

    /// Total number of samples `|Z|`.
    pub fn len(&self) -> usize {
        self.channels.iter().map(|c| c.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat `(channel, j)` index list in channel-major order.
    pub fn index(&self) -> Vec<(usize, usize)> {
        self.channels.iter().enumerate().flat_map(|(i, c)| (0..c.values.len()).map(move |j| (i, j))).collect()
    }

    /// Flattened sample values and weights.
    pub fn sequence(&self) -> Result<SampleSequence> {
        let values = self.channels.iter().flat_map(|c| c.values.iter().copied()).collect();
        let weights = self.channels.iter().filter(|c| !c.values.is_empty()).flat_map(|c| c.family.weights()).collect();
        SampleSequence::new(values, weights)
    }

    /// Same instants with new flat values.
    pub fn with_values(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.len() {
            return Err(mismatch("flat value count differs from sample count"));
        }
        let mut offset = 0;
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let n = c.values.len();
                let out = ChannelSamples { family: c.family.clone(), values: flat[offset..offset + n].to_vec() };
                offset += n;
                out
            })
            .collect();
        Ok(Self { period: self.period, channels })
    }

    /// Copy without channel `i`'s samples (the channel stays, with no samples).
    pub fn drop_channel(&self, i: usize) -> Result<Self> {
        if i >= self.channels.len() {
            return Err(Error::UnknownIndex { index: i, len: self.channels.len() });
        }
        let mut channels = self.channels.clone();
        channels[i].values.clear();
        Ok(Self { period: self.period, channels })
    }
}

/// `x = A y`, then integral samples per channel.
pub fn expand_and_encode(y: &[Signal], a: &ChannelMatrix, specs: &[EncodingSpec]) -> Result<MultiChannelSamples> {
    if y.len() != a.sources() {
        return Err(mismatch(format!("{} sources for a matrix with {} columns", y.len(), a.sources())));
    }
    if specs.len() != a.channels() {
        return Err(mismatch(format!("{} encoder specs for {} channels", specs.len(), a.channels())));
    }
    let x = mix(a.a(), y)?;
    let mut channels = Vec::with_capacity(x.len());
    for (xi, spec) in x.iter().zip(specs) {
        let leak = match spec {
            EncodingSpec::IntegralUniformTrigger { leak, .. } | EncodingSpec::InstantList { leak, .. } => *leak,
            EncodingSpec::LevelCrossing { .. } => return Err(invalid("channels need integral samples")),
        };
        if leak != 0.0 {
            return Err(invalid("multichannel encoding supports leak-free integration only"));
        }
        let e = encoders::encode(xi, spec)?;
        channels.push(ChannelSamples { family: e.family, values: e.samples.values().to_vec() });
    }
    MultiChannelSamples::new(y[0].period(), channels)
}

/// `P_A u`: `A A^+` applied pointwise on the grid, then `P_B` per channel.
pub fn project_a(u: &[GridFunction], a: &ChannelMatrix) -> Result<Vec<Signal>> {
    if u.len() != a.channels() {
        return Err(mismatch(format!("{} channels given, matrix has {}", u.len(), a.channels())));
    }
    let n = u[0].len();
    let period = u[0].period();
    if u.iter().any(|g| g.len() != n || g.period() != period) {
        return Err(mismatch("channel grids differ"));
    }
    let p = a.projector();
    let m_max = max_harmonic(period);
    (0..a.channels())
        .map(|i| {
            let samples = (0..n).map(|k| (0..a.channels()).map(|j| p[(i, j)] * u[j].samples()[k]).sum()).collect();
            project_bandlimited(&GridFunction::new(period, samples)?, m_max)
        })
        .collect()
}

/// `P_A` for bandlimited channels (exact).
pub fn project_a_signals(u: &[Signal], a: &ChannelMatrix) -> Result<Vec<Signal>> {
    mix(a.projector(), u)
}

/// The stacked sampling operator on `B^M`.
#[derive(Debug)]
pub struct MultiChannelOperator {
    op: SamplingOperator,
    matrix: ChannelMatrix,
    dim: usize,
    /// Sample count per channel.
    counts: Vec<usize>,
}

impl MultiChannelOperator {
    pub fn new(samples: &MultiChannelSamples, a: &ChannelMatrix) -> Result<Self> {
        if samples.channels().len() != a.channels() {
            return Err(mismatch("sample channels differ from matrix rows"));
        }
        if samples.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let period = samples.period();
        let dim = Metric::L2.dim(max_harmonic(period));
        let m = a.channels();
        let p = a.projector();
        let mut rows = DMatrix::zeros(samples.len(), m * dim);
        let mut r = 0;
        for (i, ch) in samples.channels().iter().enumerate() {
            if ch.values.is_empty() {
                continue;
            }
            let scalar = ch.family.projected_rows();
            for j in 0..ch.values.len() {
                for ip in 0..m {
                    let coef = p[(ip, i)];
                    if coef == 0.0 {
                        continue;
                    }
                    for c in 0..dim {
                        rows[(r, ip * dim + c)] = coef * scalar[(j, c)];
                    }
                }
                r += 1;
            }
        }
        let weights = samples.sequence()?.weights().to_vec();
        let op = SamplingOperator::from_rows(rows, weights, Metric::L2, period)?;
        let counts = samples.channels().iter().map(|c| c.values.len()).collect();
        Ok(Self { op, matrix: a.clone(), dim, counts })
    }

    pub fn inner(&self) -> &SamplingOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ChannelMatrix {
        &self.matrix
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn stack(&self, u: &[Signal]) -> Result<DVector<f64>> {
        if u.len() != self.matrix.channels() {
            return Err(mismatch("channel count differs"));
        }
        let mut out = DVector::zeros(u.len() * self.dim);
        let period = self.op.period();
        for (i, s) in u.iter().enumerate() {
            if s.period() != period {
                return Err(Error::PeriodMismatch { left: s.period(), right: period });
            }
            let c = s.with_harmonics(max_harmonic(period)).to_coords(Metric::L2);
            out.rows_mut(i * self.dim, self.dim).copy_from(&c);
        }
        Ok(out)
    }

    pub fn unstack(&self, a: &DVector<f64>) -> Result<Vec<Signal>> {
        (0..self.matrix.channels())
            .map(|i| Signal::from_coords(self.op.period(), Metric::L2, &a.rows(i * self.dim, self.dim).into_owned()))
            .collect()
    }

    /// `S u` with `s_{ij} = <u^i, g^i_j>` after projecting `u` onto `ran(A)`.
    pub fn apply(&self, u: &[Signal]) -> Result<SampleSequence> {
        Ok(self.op.samples(self.op.apply_coords(&self.stack(u)?)))
    }

    pub fn apply_adjoint(&self, c: &SampleSequence) -> Result<Vec<Signal>> {
        if c.weights() != self.op.weights() {
            return Err(mismatch("sample weights differ"));
        }
        self.unstack(&self.op.adjoint_coords(&c.to_vector()))
    }

    /// Oracle `S^+ s`.
    pub fn pseudo_inverse_apply(&self, s: &SampleSequence) -> Result<Vec<Signal>> {
        if s.weights() != self.op.weights() {
            return Err(mismatch("sample weights differ"));
        }
        self.unstack(&self.op.pseudo_inverse_coords(&s.to_vector()))
    }
}

/// `h_{(i,j),(i',j')} = <g~^{i'}_{j'}, g^i_j>_2 a_{ii'} / ||g^{i'}_{j'}||^2`.
pub fn multichannel_gram(samples: &MultiChannelSamples, a: &ChannelMatrix, route: &GramRoute) -> Result<GramMatrix> {
    if samples.channels().len() != a.channels() {
        return Err(mismatch("sample channels differ from matrix rows"));
    }
    let idx = samples.index();
    let n = idx.len();
    if n == 0 {
        return Err(Error::EmptyFamily);
    }
    let ch = samples.channels();
    let p = a.projector();
    let scalar = scalar_inner(samples, route)?;
    let inner = DMatrix::from_fn(n, n, |r, c| scalar[(r, c)] * p[(idx[r].0, idx[c].0)]);
    let weights = idx.iter().map(|&(i, j)| ch[i].family.weight(j)).collect();
    GramMatrix::from_inner_products(inner, weights)
}

/// Scalar `<g~^{i'}_{j'}, g^i_j>_2` over all sample pairs.
fn scalar_inner(samples: &MultiChannelSamples, route: &GramRoute) -> Result<DMatrix<f64>> {
    let idx = samples.index();
    let ch = samples.channels();
    let n = idx.len();
    match route {
        GramRoute::Spectral => {
            let dim = Metric::L2.dim(max_harmonic(samples.period()));
            let mut rows = DMatrix::zeros(n, dim);
            let mut r = 0;
            for c in ch.iter().filter(|c| !c.values.is_empty()) {
                let pr = c.family.projected_rows();
                for j in 0..c.values.len() {
                    rows.set_row(r, &pr.row(j));
                    r += 1;
                }
            }
            Ok(&rows * rows.transpose())
        }
        GramRoute::ClosedForm(f) => {
            let iv: Vec<(f64, f64)> = idx.iter().map(|&(i, j)| ch[i].family.interval(j)).collect();
            Ok(DMatrix::from_fn(n, n, |r, c| f.indicator_inner(iv[r].0, iv[r].1, iv[c].0, iv[c].1)))
        }
    }
}

/// Estimates of the channel signals and the sources.
#[derive(Clone, Debug)]
pub struct MultiChannelEstimate {
    /// `x^ = u0 + S* c`, one signal per channel.
    pub channels: Vec<Signal>,
    /// `y^ = A^+ x^`, one signal per source.
    pub sources: Vec<Signal>,
    /// `||s - S x^||_D / ||s||_D`.
    pub residual: f64,
}

/// Discrete POCS on the multichannel Gram matrix, then synthesis through the
/// zero-order-hold signals `c^i(t) = sum_j (c_ij / w_ij) 1_{I^i_j}(t)`.
pub fn reconstruct_multichannel(
    samples: &MultiChannelSamples,
    a: &ChannelMatrix,
    u0: Option<&[Signal]>,
    relaxation: &Relaxation,
    n_iters: usize,
) -> Result<MultiChannelEstimate> {
    let op = MultiChannelOperator::new(samples, a)?;
    let period = samples.period();
    let zero: Vec<Signal> = (0..a.channels()).map(|_| Signal::zero(period)).collect();
    let u0 = u0.unwrap_or(&zero);
    let s = samples.sequence()?;
    let sv = s.to_vector();
    let gram = multichannel_gram(samples, a, &GramRoute::Spectral)?;
    let s0 = &sv - op.inner().apply_coords(&op.stack(u0)?);
    let mut c = DVector::zeros(sv.len());
    for n in 0..n_iters {
        c += (&s0 - gram.apply(&c)) * relaxation.at(n);
    }
    // zero-order hold per channel, projected onto B, mixed through A A^+
    let m_max = max_harmonic(period);
    let mut held = Vec::with_capacity(a.channels());
    let mut offset = 0;
    for ch in samples.channels() {
        let mut acc = Signal::zero(period);
        for j in 0..ch.values.len() {
            let g = ch.family.projected_kernel(j)?;
            acc = acc.axpy(c[offset + j] / ch.family.weight(j), &g);
        }
        offset += ch.values.len();
        held.push(acc.with_harmonics(m_max));
    }
    let update = project_a_signals(&held, a)?;
    let channels: Vec<Signal> = u0.iter().zip(&update).map(|(u, d)| u + d).collect();
    let sources = mix(a.pinv(), &channels)?;
    let fit = op.apply(&channels)?;
    let norm = s.d_norm();
    let residual = s.sub(&fit)?.d_norm() / if norm > 0.0 { norm } else { 1.0 };
    Ok(MultiChannelEstimate { channels, sources, residual })
}

#[derive(Serialize, Deserialize)]
struct MultiRow {
    channel: usize,
    j: usize,
    t_prev: f64,
    t_j: f64,
    s_ij: f64,
}

/// Writes `channel, j, t_prev, t_j, s_ij` rows.
pub fn write_multichannel_csv(path: &Path, samples: &MultiChannelSamples) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for (i, ch) in samples.channels().iter().enumerate() {
        for (j, v) in ch.values.iter().enumerate() {
            let (a, b) = ch.family.interval(j);
            w.serialize(MultiRow { channel: i, j, t_prev: a, t_j: b, s_ij: *v }).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
