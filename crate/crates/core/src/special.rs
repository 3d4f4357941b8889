//! Sine integral and the double antiderivative of `sinc`.
//!
//! `f(t) = int_0^t (t - tau) sinc(tau) dtau` is the single-argument function from
//! which every inner product `<P_B 1_I, 1_J>_2` between interval indicators is
//! built (four evaluations per entry). [`f_periodic`] is its exact analogue for
//! `T`-periodic signals: the second derivative of `f_T` is the Dirichlet kernel of
//! the bandlimited periodic space instead of `sinc`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::signal::{max_harmonic, omega};

/// Normalized sinc, `sin(pi t) / (pi t)`.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - (PI * t).powi(2) / 6.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`.
///
/// Power series below `|x| = 2`, continued fraction for `E1(ix)` above.
pub fn si(x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    let t = x.abs();
    if t == 0.0 {
        return 0.0;
    }
    let value = if t > 2.0 {
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / FPMIN, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..1000 {
            let a = -((i - 1) as f64).powi(2);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < EPS {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    } else {
        let t2 = t * t;
        let mut term = t;
        let mut sum = t;
        let mut k = 1;
        loop {
            term *= -t2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < EPS * sum.abs() {
                break;
            }
            k += 1;
        }
        sum
    };
    value.copysign(x)
}

/// `f(t) = int_0^t (t - tau) sinc(tau) dtau = t Si(pi t)/pi - (1 - cos(pi t))/pi^2`.
pub fn f_kernel(t: f64) -> f64 {
    let half = (0.5 * PI * t).sin();
    t * si(PI * t) / PI - 2.0 * half * half / (PI * PI)
}

/// Periodic counterpart of [`f_kernel`] for period `period` at unit Nyquist period.
///
/// `f_T(t) = t^2/(2T) + (4/T) sum_{m=1}^{M} sin^2(w_m t / 2) / w_m^2`, whose second
/// derivative is the reproducing (Dirichlet) kernel of the periodic bandlimited space.
pub fn f_periodic(t: f64, period: f64) -> f64 {
    let m_max = max_harmonic(period);
    let mut acc = 0.0;
    for m in 1..=m_max {
        let w = omega(m, period);
        let s = (0.5 * w * t).sin();
        acc += s * s / (w * w);
    }
    t * t / (2.0 * period) + 4.0 * acc / period
}

/// Uniform lookup table for [`f_kernel`] with linear interpolation.
///
/// Interpolation error is bounded by `step^2 / 8` since `|f''| = |sinc| <= 1`.
/// Arguments beyond the table range fall back to direct evaluation.
#[derive(Clone, Debug)]
pub struct FTable {
    step: f64,
    values: Vec<f64>,
}

impl FTable {
    pub const DEFAULT_STEP: f64 = 1e-3;

    pub fn new(step: f64, t_max: f64) -> Self {
        let n = (t_max / step).ceil() as usize + 1;
        let values = (0..=n).map(|i| f_kernel(i as f64 * step)).collect();
        Self { step, values }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = t.abs() / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return f_kernel(t);
        }
        let frac = x - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}

/// Which single-argument function backs the four-term Gram formula.
#[derive(Clone, Debug)]
pub enum FKernel {
    /// Line formula `f` (asymptotically valid for periodic signals).
    Line,
    /// Line formula served from a lookup table.
    Table(FTable),
    /// Exact periodic formula `f_T`.
    Periodic(f64),
}

impl FKernel {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            FKernel::Line => f_kernel(t),
            FKernel::Table(tab) => tab.eval(t),
            FKernel::Periodic(period) => f_periodic(t, *period),
        }
    }

    /// `<P 1_[c,d], 1_[a,b]>_2` via the four-term expansion.
    pub fn indicator_inner(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        self.eval(b - c) - self.eval(a - c) - self.eval(b - d) + self.eval(a - d)
    }
}
