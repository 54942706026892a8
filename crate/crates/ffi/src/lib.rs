//! C ABI for foldquant.
//!
//! Objects are exposed as opaque handles created by `fq_*_new`-style
//! constructors and released with the matching `fq_*_free`. Every fallible
//! call returns an [`FqStatus`]; the message for the last failure on the
//! calling thread is available through [`fq_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use foldquant::metric;
use foldquant::quant::{self, LloydMaxConfig};
use foldquant::{Distribution, Error, FoldParams, FoldedDistribution, Quantizer};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Truncation = 3,
    Quadrature = 4,
    Unfolding = 5,
    ZeroEnergy = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

/// A base probability law.
pub struct FqDistribution(Distribution);

/// The law of a folded variable.
pub struct FqFolded(FoldedDistribution);

/// A scalar quantizer.
pub struct FqQuantizer(Quantizer);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FqStatus {
    match e {
        Error::Domain(_) => FqStatus::Domain,
        Error::Truncation { .. } => FqStatus::Truncation,
        Error::Quadrature { .. } => FqStatus::Quadrature,
        Error::Unfolding(_) => FqStatus::Unfolding,
        Error::ZeroEnergy => FqStatus::ZeroEnergy,
        Error::Config(_) => FqStatus::Config,
        Error::Io(_) => FqStatus::Io,
    }
}

fn guard<F>(f: F) -> FqStatus
where
    F: FnOnce() -> Result<(), FqStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FqStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside foldquant".into());
            FqStatus::Panic
        }
    }
}

fn check<T>(r: foldquant::Result<T>) -> Result<T, FqStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> FqStatus {
    set_error(format!("{what} is null"));
    FqStatus::NullPointer
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), FqStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn new_handle<T>(out: *mut *mut T, v: T) -> Result<(), FqStatus> {
    write_out(out, Box::into_raw(Box::new(v)))
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, FqStatus> {
    h.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], FqStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf`, truncating and
/// NUL-terminating as needed. Returns the full message length without the
/// terminator, or 0 if there is no error.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fq_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Folds `x` with gain `gain` into `[-half_range, half_range)`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn fq_fold(x: f64, gain: f64, half_range: f64, out: *mut f64) -> FqStatus {
    guard(|| {
        let p = check(FoldParams::new(gain, half_range))?;
        write_out(out, p.fold(x))
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_normal(mean: f64, std_dev: f64, out: *mut *mut FqDistribution) -> FqStatus {
    guard(|| new_handle(out, FqDistribution(check(Distribution::normal(mean, std_dev))?)))
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_uniform(lo: f64, hi: f64, out: *mut *mut FqDistribution) -> FqStatus {
    guard(|| new_handle(out, FqDistribution(check(Distribution::uniform(lo, hi))?)))
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_exponential(rate: f64, out: *mut *mut FqDistribution) -> FqStatus {
    guard(|| new_handle(out, FqDistribution(check(Distribution::exponential(rate))?)))
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_lognormal(mu: f64, sigma: f64, out: *mut *mut FqDistribution) -> FqStatus {
    guard(|| new_handle(out, FqDistribution(check(Distribution::lognormal(mu, sigma))?)))
}

/// # Safety
/// `d` must be null or a handle from an `fq_distribution_*` constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_free(d: *mut FqDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live distribution handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_cdf(d: *const FqDistribution, x: f64, out: *mut f64) -> FqStatus {
    guard(|| write_out(out, handle(d, "distribution")?.0.cdf(x)))
}

/// # Safety
/// `d` must be a live distribution handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_distribution_quantile(d: *const FqDistribution, u: f64, out: *mut f64) -> FqStatus {
    guard(|| {
        let q = check(handle(d, "distribution")?.0.quantile(u))?;
        write_out(out, q)
    })
}

/// Builds the folded law of `gain * X` wrapped into `[-half_range, half_range)`.
/// `tol` bounds the truncated series tail; pass 0 for the default.
///
/// # Safety
/// `base` must be a live distribution handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn fq_folded_new(
    base: *const FqDistribution,
    gain: f64,
    half_range: f64,
    tol: f64,
    out: *mut *mut FqFolded,
) -> FqStatus {
    guard(|| {
        let d = handle(base, "distribution")?.0;
        let p = check(FoldParams::new(gain, half_range))?;
        let tol = if tol == 0.0 { 1e-13 } else { tol };
        new_handle(out, FqFolded(check(FoldedDistribution::new(d, p, tol))?))
    })
}

/// # Safety
/// `f` must be null or a handle from [`fq_folded_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fq_folded_free(f: *mut FqFolded) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live folded handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_folded_cdf(f: *const FqFolded, theta: f64, out: *mut f64) -> FqStatus {
    guard(|| write_out(out, handle(f, "folded distribution")?.0.cdf(theta)))
}

/// # Safety
/// `f` must be a live folded handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_folded_pdf(f: *const FqFolded, theta: f64, out: *mut f64) -> FqStatus {
    guard(|| write_out(out, handle(f, "folded distribution")?.0.pdf(theta)))
}

/// Uniform mid-rise quantizer with `levels` cells on `[lo, hi]`.
///
/// # Safety
/// `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn fq_quantizer_uniform(levels: usize, lo: f64, hi: f64, out: *mut *mut FqQuantizer) -> FqStatus {
    guard(|| new_handle(out, FqQuantizer(check(Quantizer::uniform(levels, lo, hi))?)))
}

/// Lloyd-Max quantizer for `d` with `levels` cells on `[lo, hi]`.
/// `converged` may be null.
///
/// # Safety
/// `d` must be a live distribution handle, `out` a valid handle slot and
/// `converged` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_quantizer_lloyd_max(
    d: *const FqDistribution,
    levels: usize,
    lo: f64,
    hi: f64,
    converged: *mut bool,
    out: *mut *mut FqQuantizer,
) -> FqStatus {
    guard(|| {
        let d = handle(d, "distribution")?;
        let l = check(quant::lloyd_max(&d.0, &LloydMaxConfig::new(levels, lo, hi)))?;
        if !converged.is_null() {
            converged.write(l.converged);
        }
        new_handle(out, FqQuantizer(l.quantizer))
    })
}

/// # Safety
/// `q` must be null or a quantizer handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fq_quantizer_free(q: *mut FqQuantizer) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `q` must be null or a live quantizer handle.
#[no_mangle]
pub unsafe extern "C" fn fq_quantizer_len(q: *const FqQuantizer) -> usize {
    q.as_ref().map_or(0, |q| q.0.len())
}

/// Copies the reproduction levels into `levels` (`cap` entries).
///
/// # Safety
/// `q` must be a live quantizer handle and `levels` point to `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn fq_quantizer_levels(q: *const FqQuantizer, levels: *mut f64, cap: usize) -> FqStatus {
    guard(|| {
        let q = handle(q, "quantizer")?;
        let src = q.0.levels();
        if cap < src.len() {
            set_error(format!("buffer holds {cap} levels, need {}", src.len()));
            return Err(FqStatus::Domain);
        }
        if levels.is_null() {
            return Err(null("levels buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), levels, src.len());
        Ok(())
    })
}

/// Quantizes `len` values from `input` into `output`. The buffers may alias.
///
/// # Safety
/// `q` must be a live quantizer handle and both buffers hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fq_quantize(
    q: *const FqQuantizer,
    input: *const f64,
    output: *mut f64,
    len: usize,
) -> FqStatus {
    guard(|| {
        let q = handle(q, "quantizer")?;
        if len > 0 && (input.is_null() || output.is_null()) {
            return Err(null("sample buffer"));
        }
        for i in 0..len {
            *output.add(i) = q.0.quantize(*input.add(i));
        }
        Ok(())
    })
}

/// Normalized squared error of quantizing `signal`.
///
/// # Safety
/// `q` must be a live quantizer handle, `signal` hold `len` doubles and `out`
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_nmse(q: *const FqQuantizer, signal: *const f64, len: usize, out: *mut f64) -> FqStatus {
    guard(|| {
        let q = handle(q, "quantizer")?;
        let s = slice(signal, len, "signal")?;
        write_out(out, check(quant::nmse(s, &q.0))?)
    })
}

/// Order-`r` Wasserstein distance between two laws.
///
/// # Safety
/// `x` and `y` must be live distribution handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_wasserstein(
    x: *const FqDistribution,
    y: *const FqDistribution,
    r: u32,
    out: *mut f64,
) -> FqStatus {
    guard(|| {
        let x = handle(x, "distribution")?;
        let y = handle(y, "distribution")?;
        write_out(out, check(metric::wr_between(&x.0, &y.0, r))?)
    })
}

/// W1 distance between the folded law of `base` and the uniform law.
///
/// # Safety
/// `base` must be a live distribution handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fq_w1_folded_to_uniform(
    base: *const FqDistribution,
    gain: f64,
    half_range: f64,
    out: *mut f64,
) -> FqStatus {
    guard(|| {
        let d = handle(base, "distribution")?;
        let p = check(FoldParams::new(gain, half_range))?;
        write_out(out, check(metric::w1_folded_to_uniform(&d.0, &p))?)
    })
}
