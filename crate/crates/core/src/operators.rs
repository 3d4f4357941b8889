//! The sampling operator `S u = (<u, g_k>)_k`, its adjoint, spectral bounds and
//! a dense pseudo-inverse.
//!
//! Everything is computed in real orthonormal coordinates of the input space
//! (see [`Signal::to_coords`]). Row `k` of the matrix `R` holds the coordinates
//! of the projected kernel `g~_k`, so that `S a = R a` and `S* c = R^T (c / w)`.
//! The weighted sequence space is whitened by `B = diag(1/sqrt(w)) R`, whose
//! SVD yields `S^+`, the range projector and the null-space projector.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, mismatch, Error, Result};
use crate::kernels::{GramMatrix, KernelFamily};
use crate::linalg::{orthogonal_complement, Svd};
use crate::signal::{max_harmonic, Metric, Signal};

/// Relative singular-value cutoff used to decide numerical rank.
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-10;

/// Samples `s_k` together with the kernel norms `w_k = ||g_k||^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSequence {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl SampleSequence {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(mismatch(format!("{} values but {} weights", values.len(), weights.len())));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(invalid("weights must be positive and finite"));
        }
        Ok(Self { values, weights })
    }

    pub fn zeros(weights: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; weights.len()], weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }

    /// Same weights, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.weights.clone())
    }

    fn check_weights(&self, other: &SampleSequence) -> Result<()> {
        if self.weights != other.weights {
            return Err(mismatch("sample sequences carry different weights"));
        }
        Ok(())
    }

    /// `sum_k a_k b_k / w_k`.
    pub fn d_inner(&self, other: &SampleSequence) -> Result<f64> {
        self.check_weights(other)?;
        Ok(self.values.iter().zip(&other.values).zip(&self.weights).map(|((a, b), w)| a * b / w).sum())
    }

    pub fn d_norm(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(a, w)| a * a / w).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &SampleSequence) -> Result<SampleSequence> {
        self.check_weights(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { values, weights: self.weights.clone() })
    }

    pub fn add(&self, other: &SampleSequence) -> Result<SampleSequence> {
        self.check_weights(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { values, weights: self.weights.clone() })
    }

    pub fn scale(&self, alpha: f64) -> SampleSequence {
        Self { values: self.values.iter().map(|v| v * alpha).collect(), weights: self.weights.clone() }
    }
}

/// `gamma(S)`, `||S||` and the numerical rank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub gamma: f64,
    pub norm: f64,
    pub rank: usize,
}

impl SpectralBounds {
    /// Relaxation minimizing the contraction factor of the frame iteration.
    pub fn optimal_relaxation(&self) -> f64 {
        2.0 / (self.gamma * self.gamma + self.norm * self.norm)
    }

    /// `max(|1 - lambda ||S||^2|, |1 - lambda gamma^2|)`.
    pub fn contraction_factor(&self, lambda: f64) -> f64 {
        (1.0 - lambda * self.norm * self.norm).abs().max((1.0 - lambda * self.gamma * self.gamma).abs())
    }
}

struct Factorization {
    /// Left singular vectors spanning the whitened range, `N x r`.
    u_r: DMatrix<f64>,
    /// Right singular vectors spanning `F` in coordinates, `d x r`.
    v_r: DMatrix<f64>,
    sigma_r: DVector<f64>,
}

/// Dense linear sampling operator from coordinates of the input space to samples.
///
/// Built either from a [`KernelFamily`] or directly from a rows matrix (used by
/// the multichannel code, whose input space is a product of bandlimited spaces).
pub struct SamplingOperator {
    rows: DMatrix<f64>,
    weights: Vec<f64>,
    metric: Metric,
    period: f64,
    family: Option<KernelFamily>,
    rank_cutoff: f64,
    gram: OnceLock<GramMatrix>,
    factor: OnceLock<Factorization>,
    bounds: OnceLock<SpectralBounds>,
}

impl std::fmt::Debug for SamplingOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SamplingOperator")
            .field("samples", &self.rows.nrows())
            .field("dim", &self.rows.ncols())
            .field("metric", &self.metric)
            .field("period", &self.period)
            .finish()
    }
}

impl SamplingOperator {
    pub fn new(family: KernelFamily) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let rows = family.projected_rows();
        let weights = family.weights();
        let mut op = Self::from_rows(rows, weights, family.metric(), family.period())?;
        op.family = Some(family);
        Ok(op)
    }

    /// Operator with explicit coordinate rows. `rows` is `N x d`.
    pub fn from_rows(rows: DMatrix<f64>, weights: Vec<f64>, metric: Metric, period: f64) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::EmptyFamily);
        }
        if rows.nrows() != weights.len() {
            return Err(mismatch("row count differs from weight count"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("weights must be positive"));
        }
        Ok(Self {
            rows,
            weights,
            metric,
            period,
            family: None,
            rank_cutoff: DEFAULT_RANK_CUTOFF,
            gram: OnceLock::new(),
            factor: OnceLock::new(),
            bounds: OnceLock::new(),
        })
    }

    /// Replaces the relative rank cutoff.
    pub fn with_rank_cutoff(mut self, cutoff: f64) -> Self {
        self.rank_cutoff = cutoff;
        self.factor = OnceLock::new();
        self.bounds = OnceLock::new();
        self
    }

    pub fn family(&self) -> Option<&KernelFamily> {
        self.family.as_ref()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_samples(&self) -> usize {
        self.rows.nrows()
    }

    /// Dimension of the coordinate space.
    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    fn harmonics(&self) -> usize {
        max_harmonic(self.period)
    }

    /// Coordinates of `u` (padded to full band).
    pub fn coords_of(&self, u: &Signal) -> Result<DVector<f64>> {
        if u.period() != self.period {
            return Err(Error::PeriodMismatch { left: u.period(), right: self.period });
        }
        let c = u.with_harmonics(self.harmonics()).to_coords(self.metric);
        if c.len() != self.dim() {
            return Err(mismatch("signal coordinates do not match the operator"));
        }
        Ok(c)
    }

    pub fn signal_of(&self, coords: &DVector<f64>) -> Result<Signal> {
        Signal::from_coords(self.period, self.metric, coords)
    }

    fn check_samples(&self, s: &SampleSequence) -> Result<()> {
        if s.weights() != self.weights.as_slice() {
            return Err(mismatch("sample weights do not match the operator"));
        }
        Ok(())
    }

    pub fn samples(&self, values: DVector<f64>) -> SampleSequence {
        SampleSequence { values: values.as_slice().to_vec(), weights: self.weights.clone() }
    }

    pub fn apply_coords(&self, a: &DVector<f64>) -> DVector<f64> {
        &self.rows * a
    }

    pub fn adjoint_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        let scaled = DVector::from_iterator(c.len(), c.iter().zip(&self.weights).map(|(v, w)| v / w));
        self.rows.tr_mul(&scaled)
    }

    /// `S u`.
    pub fn apply(&self, u: &Signal) -> Result<SampleSequence> {
        Ok(self.samples(self.apply_coords(&self.coords_of(u)?)))
    }

    /// `S* c = sum_k (c_k / w_k) g~_k`.
    pub fn apply_adjoint(&self, c: &SampleSequence) -> Result<Signal> {
        self.check_samples(c)?;
        self.signal_of(&self.adjoint_coords(&c.to_vector()))
    }

    /// Gram matrix of `S S*`, from the projected-kernel rows.
    pub fn gram(&self) -> &GramMatrix {
        self.gram.get_or_init(|| {
            let inner = &self.rows * self.rows.transpose();
            GramMatrix::from_inner_products(inner, self.weights.clone()).expect("sizes agree by construction")
        })
    }

    fn whitened(&self) -> DMatrix<f64> {
        let mut b = self.rows.clone();
        for (k, w) in self.weights.iter().enumerate() {
            b.row_mut(k).scale_mut(1.0 / w.sqrt());
        }
        b
    }

    fn factor(&self) -> &Factorization {
        self.factor.get_or_init(|| {
            let svd = Svd::new(&self.whitened());
            let keep = svd.kept(self.rank_cutoff);
            let u_r = svd.u.select_columns(&keep);
            let v_r = svd.v.select_columns(&keep);
            let sigma_r = svd.sigma.select_rows(&keep);
            Factorization { u_r, v_r, sigma_r }
        })
    }

    /// Numerical rank of `S`.
    pub fn rank(&self) -> usize {
        self.factor().sigma_r.len()
    }

    /// `gamma(S)` and `||S||` from the eigenvalues of the symmetrized Gram matrix.
    pub fn spectral_bounds(&self) -> SpectralBounds {
        *self.bounds.get_or_init(|| {
            let eig = SymmetricEigen::new(self.gram().symmetrized()).eigenvalues;
            let top = eig.max().max(0.0);
            let gamma2 = eig
                .iter()
                .copied()
                .filter(|&e| e > self.rank_cutoff * top)
                .fold(f64::INFINITY, f64::min);
            let rank = eig.iter().filter(|&&e| e > self.rank_cutoff * top).count();
            let gamma = if gamma2.is_finite() { gamma2.sqrt() } else { 0.0 };
            SpectralBounds { gamma, norm: top.sqrt(), rank }
        })
    }

    fn whiten(&self, s: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(s.len(), s.iter().zip(&self.weights).map(|(v, w)| v / w.sqrt()))
    }

    fn unwhiten(&self, s: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(s.len(), s.iter().zip(&self.weights).map(|(v, w)| v * w.sqrt()))
    }

    /// Minimum-norm least-squares solution in coordinates.
    pub fn pseudo_inverse_coords(&self, s: &DVector<f64>) -> DVector<f64> {
        let f = self.factor();
        let mut y = f.u_r.tr_mul(&self.whiten(s));
        for (v, sigma) in y.iter_mut().zip(f.sigma_r.iter()) {
            *v /= sigma;
        }
        &f.v_r * y
    }

    /// `S^+ s`.
    pub fn pseudo_inverse_apply(&self, s: &SampleSequence) -> Result<Signal> {
        self.check_samples(s)?;
        self.signal_of(&self.pseudo_inverse_coords(&s.to_vector()))
    }

    /// `P_ran(S) s`, orthogonal in the weighted sequence metric.
    pub fn project_range(&self, s: &SampleSequence) -> Result<SampleSequence> {
        self.check_samples(s)?;
        let f = self.factor();
        let y = self.whiten(&s.to_vector());
        let p = &f.u_r * f.u_r.tr_mul(&y);
        Ok(self.samples(self.unwhiten(&p)))
    }

    /// Projection onto `F = null(S)^perp` in coordinates.
    pub fn project_f_coords(&self, a: &DVector<f64>) -> DVector<f64> {
        let f = self.factor();
        &f.v_r * f.v_r.tr_mul(a)
    }

    /// `P_F u`, where `F` is spanned by the projected kernels.
    pub fn project_f(&self, u: &Signal) -> Result<Signal> {
        self.signal_of(&self.project_f_coords(&self.coords_of(u)?))
    }

    /// `P_{F^perp} u`: the component of `u` the samples cannot see.
    pub fn project_f_perp(&self, u: &Signal) -> Result<Signal> {
        let a = self.coords_of(u)?;
        let p = &a - self.project_f_coords(&a);
        self.signal_of(&p)
    }

    /// The limit of relaxed POCS from `u0`: `S^+ s + P_{F^perp} u0`.
    pub fn consistent_limit(&self, s: &SampleSequence, u0: &Signal) -> Result<Signal> {
        self.check_samples(s)?;
        let a0 = self.coords_of(u0)?;
        let limit = self.pseudo_inverse_coords(&s.to_vector()) + &a0 - self.project_f_coords(&a0);
        self.signal_of(&limit)
    }

    /// Basis of `ran(S)^perp` in the weighted metric: sample sequences `d` with
    /// `<S u, d>_D = 0` for all `u`, orthonormal in `D`.
    pub fn range_complement_basis(&self) -> Vec<SampleSequence> {
        let basis = orthogonal_complement(&self.factor().u_r);
        basis.column_iter().map(|c| self.samples(self.unwhiten(&c.into_owned()))).collect()
    }
}
