//! C ABI over the bayesload samplers.
//!
//! Every function is panic-safe and returns a [`BlzStatus`]; fitted chains
//! come back as opaque `BlzChain` handles that the caller frees with
//! [`blz_chain_free`]. The most recent error message is kept per thread and
//! retrieved with [`blz_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bayesload::chain::Chain;
use bayesload::diagnostics::{summarize_samples, DEFAULT_BINS};
use bayesload::distributions::RngState;
use bayesload::error::Error;
use bayesload::im::{gibbs_im, ImDataset, ImPriors, ImRecord};
use bayesload::zip::{gibbs_zip, ZipDataset, ZipPriors};

/// Result of every fallible call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlzStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument violated a documented precondition.
    InvalidArgument = 2,
    /// The data carry no usable information for the requested fit.
    DegenerateData = 3,
    /// A numerical routine failed to converge or diverged.
    NumericFailure = 4,
    /// An internal invariant was violated; the library state is still sound.
    InternalPanic = 5,
}

/// Fitted sample chain behind the C interface.
pub struct BlzChain {
    chain: Chain,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> BlzStatus {
    match err {
        Error::DegenerateData(_) => BlzStatus::DegenerateData,
        Error::NonConvergence { .. }
        | Error::Integration { .. }
        | Error::FilterDivergence(_)
        | Error::InsufficientSamples(_) => BlzStatus::NumericFailure,
        _ => BlzStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> BlzStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null_arg(name: &str) -> BlzStatus {
    set_error(&format!("{name} must not be null"));
    BlzStatus::NullPointer
}

/// Runs `f` with panics converted to `InternalPanic`.
fn guarded<F: FnOnce() -> BlzStatus>(f: F) -> BlzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            BlzStatus::InternalPanic
        }
    }
}

fn chain_handle(chain: Chain) -> *mut BlzChain {
    let names = chain
        .param_names()
        .iter()
        .map(|n| CString::new(n.as_str()).unwrap())
        .collect();
    Box::into_raw(Box::new(BlzChain { chain, names }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn blz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the current thread's last error message into `buf` (truncated to
/// `cap − 1` bytes, always NUL-terminated when `cap > 0`) and returns the
/// full message length in bytes excluding the terminator.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null (size query).
#[no_mangle]
pub unsafe extern "C" fn blz_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Gibbs-samples the ZIP posterior from `n` paired observations under the
/// default priors. On success `*out` owns the new chain.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles; `out` must be a valid
/// pointer to a chain-handle slot.
#[no_mangle]
pub unsafe extern "C" fn blz_fit_zip(
    x: *const f64,
    y: *const f64,
    n: usize,
    seed: u64,
    iters: usize,
    burn_in: usize,
    out: *mut *mut BlzChain,
) -> BlzStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if x.is_null() {
        return null_arg("x");
    }
    if y.is_null() {
        return null_arg("y");
    }
    let xs = std::slice::from_raw_parts(x, n).to_vec();
    let ys = std::slice::from_raw_parts(y, n).to_vec();
    guarded(|| {
        let data = match ZipDataset::new(xs, ys) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let mut rng = RngState::new(seed);
        match gibbs_zip(&data, &ZipPriors::default(), iters, burn_in, &mut rng) {
            Ok(chain) => {
                *out = chain_handle(chain);
                BlzStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of columns per record in [`blz_fit_im`] input.
pub const BLZ_IM_RECORD_LEN: usize = 12;

/// Gibbs-samples the induction-motor posterior under the default priors.
///
/// `data` holds `n` row-major records of [`BLZ_IM_RECORD_LEN`] doubles in
/// the order E′_d, E′_q, I_d, I_q, U_d, U_q, ω, y_Ed, y_Eq, y_ω, y_Id, y_Iq
/// (the motor dataset CSV column order). On success `*out` owns the chain.
///
/// # Safety
/// `data` must point to `n × 12` readable doubles; `out` must be a valid
/// pointer to a chain-handle slot.
#[no_mangle]
pub unsafe extern "C" fn blz_fit_im(
    data: *const f64,
    n: usize,
    seed: u64,
    iters: usize,
    burn_in: usize,
    out: *mut *mut BlzChain,
) -> BlzStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if data.is_null() {
        return null_arg("data");
    }
    let flat = std::slice::from_raw_parts(data, n * BLZ_IM_RECORD_LEN);
    let records: Vec<ImRecord> = flat
        .chunks_exact(BLZ_IM_RECORD_LEN)
        .map(|r| ImRecord {
            ed: r[0],
            eq: r[1],
            id: r[2],
            iq: r[3],
            ud: r[4],
            uq: r[5],
            omega: r[6],
            y_ed: r[7],
            y_eq: r[8],
            y_omega: r[9],
            y_id: r[10],
            y_iq: r[11],
        })
        .collect();
    guarded(|| {
        let data = match ImDataset::new(records) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let mut rng = RngState::new(seed);
        match gibbs_im(&data, &ImPriors::default(), iters, burn_in, &mut rng) {
            Ok(chain) => {
                *out = chain_handle(chain);
                BlzStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a chain handle. Null is a no-op.
///
/// # Safety
/// `chain` must be a handle returned by a fit call, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_free(chain: *mut BlzChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of sampled parameters, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle from a fit call.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_n_params(chain: *const BlzChain) -> usize {
    chain.as_ref().map_or(0, |c| c.chain.n_params())
}

/// Number of post-burn-in samples per parameter, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle from a fit call.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_kept(chain: *const BlzChain) -> usize {
    chain.as_ref().map_or(0, |c| c.chain.kept())
}

/// Name of parameter `param`, valid while the chain is alive; null if the
/// handle is null or the index is out of range.
///
/// # Safety
/// `chain` must be null or a live handle from a fit call.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_param_name(
    chain: *const BlzChain,
    param: usize,
) -> *const c_char {
    chain
        .as_ref()
        .and_then(|c| c.names.get(param))
        .map_or(std::ptr::null(), |n| n.as_ptr())
}

/// Writes the post-burn-in mean of parameter `param` to `*out`.
///
/// # Safety
/// `chain` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_posterior_mean(
    chain: *const BlzChain,
    param: usize,
    out: *mut f64,
) -> BlzStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let Some(handle) = chain.as_ref() else {
        return null_arg("chain");
    };
    if param >= handle.chain.n_params() {
        set_error(&format!(
            "parameter index {param} out of range for {} parameters",
            handle.chain.n_params()
        ));
        return BlzStatus::InvalidArgument;
    }
    *out = handle.chain.posterior_mean(param);
    BlzStatus::Ok
}

/// Copies post-burn-in samples of parameter `param` into `buf` (up to `cap`
/// values) and stores the copied count in `*written`. A null `buf` performs
/// a size query: `*written` receives the kept sample count.
///
/// # Safety
/// `buf` must be null or point to `cap` writable doubles; `written` must be
/// writable; `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_samples(
    chain: *const BlzChain,
    param: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> BlzStatus {
    if written.is_null() {
        return null_arg("written");
    }
    let Some(handle) = chain.as_ref() else {
        return null_arg("chain");
    };
    if param >= handle.chain.n_params() {
        set_error(&format!(
            "parameter index {param} out of range for {} parameters",
            handle.chain.n_params()
        ));
        return BlzStatus::InvalidArgument;
    }
    let samples = handle.chain.post_burn_in(param);
    if buf.is_null() {
        *written = samples.len();
        return BlzStatus::Ok;
    }
    let n = samples.len().min(cap);
    std::ptr::copy_nonoverlapping(samples.as_ptr(), buf, n);
    *written = n;
    BlzStatus::Ok
}

/// Computes the equal-tailed credible interval of parameter `param` at the
/// given level and writes the bounds to `*lo` and `*hi`.
///
/// # Safety
/// `chain` must be null or a live handle; `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blz_chain_interval(
    chain: *const BlzChain,
    param: usize,
    level: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> BlzStatus {
    if lo.is_null() {
        return null_arg("lo");
    }
    if hi.is_null() {
        return null_arg("hi");
    }
    let Some(handle) = chain.as_ref() else {
        return null_arg("chain");
    };
    if param >= handle.chain.n_params() {
        set_error(&format!(
            "parameter index {param} out of range for {} parameters",
            handle.chain.n_params()
        ));
        return BlzStatus::InvalidArgument;
    }
    guarded(|| {
        match summarize_samples(&handle.chain.post_burn_in(param), level, DEFAULT_BINS) {
            Ok(s) => {
                *lo = s.ci_lo;
                *hi = s.ci_hi;
                BlzStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
