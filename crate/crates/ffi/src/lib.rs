//! C ABI over `nusrec`.
//!
//! Every entry point returns a [`NusrecStatus`]; on failure the message is
//! available from [`nusrec_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nusrec::kernels::{KernelFamily, KernelKind};
use nusrec::operators::{SampleSequence, SamplingOperator};
use nusrec::recon::{pocs_run, ReconRun};
use nusrec::signal::{random_bandlimited, Signal};
use nusrec::Error;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NusrecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Panic = 4,
}

/// Sampling kernel families.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NusrecKernel {
    /// Integral over each inter-sample interval.
    Indicator = 0,
    /// Leaky integral; uses the `alpha` argument.
    LeakyExp = 1,
    /// Differences of point values.
    Ramp = 2,
    /// Point values of a bandlimited signal.
    Sinc = 3,
}

/// Opaque bandlimited periodic signal.
pub struct NusrecSignal(Signal);

/// Opaque sampling operator.
pub struct NusrecOperator(SamplingOperator);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(NusrecStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch(_) | Error::PeriodMismatch { .. } | Error::UnknownIndex { .. } => {
                NusrecStatus::DimensionMismatch
            }
            _ => NusrecStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(NusrecStatus::NullPointer, format!("null pointer: {what}"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NusrecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NusrecStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            NusrecStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn samples_for(op: &SamplingOperator, values: &[f64]) -> Result<SampleSequence, Fail> {
    if values.len() != op.num_samples() {
        return Err(Fail(
            NusrecStatus::DimensionMismatch,
            format!("expected {} samples, got {}", op.num_samples(), values.len()),
        ));
    }
    Ok(SampleSequence::new(values.to_vec(), op.weights().to_vec())?)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn nusrec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Random real signal of the given period, rescaled to `rms`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nusrec_signal_random(period: f64, rms: f64, seed: u64, out: *mut *mut NusrecSignal) -> NusrecStatus {
    guard(|| put(out, NusrecSignal(random_bandlimited(period, rms, seed)?)))
}

/// Signal from Fourier coefficients `c_0 .. c_{n-1}` given as real and imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `n` readable doubles; `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn nusrec_signal_from_coeffs(
    period: f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut NusrecSignal,
) -> NusrecStatus {
    guard(|| {
        let re = slice(re, n, "re")?;
        let im = slice(im, n, "im")?;
        let c = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        put(out, NusrecSignal(Signal::new(period, c)?))
    })
}

/// Writes `x(t)` to `value`.
///
/// # Safety
/// `signal` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn nusrec_signal_eval(signal: *const NusrecSignal, t: f64, value: *mut f64) -> NusrecStatus {
    guard(|| {
        let s = handle(signal, "signal")?;
        let v = value.as_mut().ok_or_else(|| null("value"))?;
        *v = s.0.eval(t);
        Ok(())
    })
}

/// Number of stored coefficients `c_0 .. c_M`.
///
/// # Safety
/// `signal` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn nusrec_signal_num_coeffs(signal: *const NusrecSignal, len: *mut usize) -> NusrecStatus {
    guard(|| {
        let s = handle(signal, "signal")?;
        *len.as_mut().ok_or_else(|| null("len"))? = s.0.coeffs().len();
        Ok(())
    })
}

/// Copies the coefficients into `re` and `im`, which must hold exactly `len` entries.
///
/// # Safety
/// `signal` must be a live handle; `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nusrec_signal_coeffs(
    signal: *const NusrecSignal,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NusrecStatus {
    guard(|| {
        let s = handle(signal, "signal")?;
        let c = s.0.coeffs();
        if len != c.len() {
            return Err(Fail(NusrecStatus::DimensionMismatch, format!("signal has {} coefficients", c.len())));
        }
        let re = slice_mut(re, len, "re")?;
        let im = slice_mut(im, len, "im")?;
        for (k, z) in c.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Releases a signal; null is ignored.
///
/// # Safety
/// `signal` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nusrec_signal_free(signal: *mut NusrecSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Sampling operator of a kernel family on increasing instants in one period.
///
/// # Safety
/// `instants` must point to `n` readable doubles and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn nusrec_operator_new(
    kernel: NusrecKernel,
    alpha: f64,
    instants: *const f64,
    n: usize,
    period: f64,
    out: *mut *mut NusrecOperator,
) -> NusrecStatus {
    guard(|| {
        let t = slice(instants, n, "instants")?.to_vec();
        let kind = match kernel {
            NusrecKernel::Indicator => KernelKind::Indicator,
            NusrecKernel::LeakyExp => KernelKind::LeakyExp { alpha },
            NusrecKernel::Ramp => KernelKind::Ramp,
            NusrecKernel::Sinc => KernelKind::Sinc,
        };
        let fam = KernelFamily::new(kind, t, period)?;
        put(out, NusrecOperator(SamplingOperator::new(fam)?))
    })
}

/// Releases an operator; null is ignored.
///
/// # Safety
/// `op` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nusrec_operator_free(op: *mut NusrecOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `op` must be a live handle and `n` writable.
#[no_mangle]
pub unsafe extern "C" fn nusrec_operator_num_samples(op: *const NusrecOperator, n: *mut usize) -> NusrecStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        *n.as_mut().ok_or_else(|| null("n"))? = op.0.num_samples();
        Ok(())
    })
}

/// Generalized samples of `signal` (projected onto the operator's space first).
///
/// # Safety
/// Handles must be live; `values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nusrec_operator_apply(
    op: *const NusrecOperator,
    signal: *const NusrecSignal,
    values: *mut f64,
    len: usize,
) -> NusrecStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        let s = handle(signal, "signal")?;
        if len != op.0.num_samples() {
            return Err(Fail(NusrecStatus::DimensionMismatch, format!("expected {} samples", op.0.num_samples())));
        }
        let out = slice_mut(values, len, "values")?;
        out.copy_from_slice(op.0.apply(&s.0)?.values());
        Ok(())
    })
}

/// Reduced minimum modulus, operator norm and numerical rank.
///
/// # Safety
/// `op` must be live; the three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nusrec_operator_spectral_bounds(
    op: *const NusrecOperator,
    gamma: *mut f64,
    norm: *mut f64,
    rank: *mut usize,
) -> NusrecStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        let (g, n, r) = (
            gamma.as_mut().ok_or_else(|| null("gamma"))?,
            norm.as_mut().ok_or_else(|| null("norm"))?,
            rank.as_mut().ok_or_else(|| null("rank"))?,
        );
        let b = op.0.spectral_bounds();
        (*g, *n, *r) = (b.gamma, b.norm, b.rank);
        Ok(())
    })
}

/// Minimum-norm least-squares estimate from `len` samples.
///
/// # Safety
/// `op` must be live, `values` readable for `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nusrec_pseudo_inverse(
    op: *const NusrecOperator,
    values: *const f64,
    len: usize,
    out: *mut *mut NusrecSignal,
) -> NusrecStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        let s = samples_for(&op.0, slice(values, len, "values")?)?;
        put(out, NusrecSignal(op.0.pseudo_inverse_apply(&s)?))
    })
}

/// Relaxed POCS from `u0` (zero when null). Writes the estimate and the number
/// of iterations performed; `converged` is set to 1 when the stop rule fired.
///
/// # Safety
/// Handles must be live or null where allowed; `values` readable for `len`
/// doubles; `out` writable; `iterations` and `converged` writable or null.
#[no_mangle]
pub unsafe extern "C" fn nusrec_pocs_run(
    op: *const NusrecOperator,
    values: *const f64,
    len: usize,
    u0: *const NusrecSignal,
    lambda: f64,
    max_iters: usize,
    tol: f64,
    out: *mut *mut NusrecSignal,
    iterations: *mut usize,
    converged: *mut i32,
) -> NusrecStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        let s = samples_for(&op.0, slice(values, len, "values")?)?;
        let start = match u0.as_ref() {
            Some(u) => u.0.clone(),
            None => Signal::zero(op.0.period()),
        };
        let run = ReconRun::new(start).lambda(lambda).max_iters(max_iters).tol(tol);
        let res = pocs_run(&op.0, &s, &run)?;
        if let Some(n) = iterations.as_mut() {
            *n = res.iterations;
        }
        if let Some(c) = converged.as_mut() {
            *c = i32::from(res.converged);
        }
        put(out, NusrecSignal(res.estimate))
    })
}

#[doc(hidden)]
#[no_mangle]
pub extern "C" fn nusrec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
