//! C interface to `graphwave`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every function returns a [`GwStatus`];
//! on failure the message is available from [`gw_last_error_message`] on the
//! same thread. Panics are caught and reported as `GW_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use graphwave::demo::path_wave_panel;
use graphwave::linalg::RealPolynomial;
use graphwave::modes::{extract_modes_stationary, ModeSet};
use graphwave::panel::SignalPanel;
use graphwave::recovery::{recover_graph, RecoveredGraph, RecoveryConfig};
use graphwave::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InsufficientSamples = 3,
    Domain = 4,
    Parse = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Node-by-time table of real samples.
pub struct GwPanel(SignalPanel);

/// Result of graph recovery.
pub struct GwRecovered(RecoveredGraph);

/// Extracted modes.
pub struct GwModes(ModeSet);

/// Recovery settings. `sqrt_c <= 0` means the wave speed is unknown;
/// `amp_norm_tol < 0` selects the relative default.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GwRecoveryOptions {
    pub n_pairs: usize,
    pub lag: usize,
    pub normalize_modes: bool,
    pub positivize: bool,
    pub sqrt_c: f64,
    pub amp_norm_tol: f64,
    pub validation_horizon: usize,
    pub retry: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) => GwStatus::InvalidInput,
            Error::InsufficientSamples(_) => GwStatus::InsufficientSamples,
            Error::Domain(_) => GwStatus::Domain,
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => GwStatus::Parse,
            Error::Io(_) => GwStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GwStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            GwStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Builds a panel from `n * len` node-major samples (`data[x * len + i]` is
/// node `x` at time `t_start + i`).
///
/// # Safety
/// `data` must point to `n * len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_panel_new(
    data: *const f64,
    n: usize,
    len: usize,
    t_start: i64,
    out: *mut *mut GwPanel,
) -> GwStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let total = n
            .checked_mul(len)
            .ok_or_else(|| Failure(GwStatus::InvalidInput, "size overflow".into()))?;
        let values = std::slice::from_raw_parts(data, total);
        let series = values.chunks(len.max(1)).take(n).map(<[f64]>::to_vec).collect();
        put_handle(out, GwPanel(SignalPanel::new(series, t_start)?))
    })
}

/// Reads a panel CSV with header `t,<labels>`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_panel_from_csv(path: *const c_char, out: *mut *mut GwPanel) -> GwStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(GwStatus::InvalidInput, "path is not UTF-8".into()))?;
        put_handle(out, GwPanel(SignalPanel::load_csv(Path::new(path))?))
    })
}

/// Wave on the `n`-node path graph from the seeded noisy ramp, sampled at
/// `t = 1..=steps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_simulate_path_wave(
    n: usize,
    sqrt_c: f64,
    steps: usize,
    seed: u64,
    noise: f64,
    out: *mut *mut GwPanel,
) -> GwStatus {
    guard(|| put_handle(out, GwPanel(path_wave_panel(n, sqrt_c, steps, seed, noise)?)))
}

/// # Safety
/// `panel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gw_panel_shape(
    panel: *const GwPanel,
    n: *mut usize,
    len: *mut usize,
    t_start: *mut i64,
) -> GwStatus {
    guard(|| {
        let p = &borrow(panel, "panel")?.0;
        put(n, p.n(), "n")?;
        put(len, p.len(), "len")?;
        put(t_start, p.t_start(), "t_start")
    })
}

/// Sample of node `x` (0-based) at time `t`.
///
/// # Safety
/// `panel` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_panel_value(panel: *const GwPanel, x: usize, t: i64, out: *mut f64) -> GwStatus {
    guard(|| {
        let p = &borrow(panel, "panel")?.0;
        if x >= p.n() {
            return Err(Failure(GwStatus::InvalidInput, format!("node {x} out of range")));
        }
        put(out, p.value(x, t)?, "out")
    })
}

/// # Safety
/// `panel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gw_panel_free(panel: *mut GwPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Library defaults for `n_pairs` pairs and `lag` shifts.
#[no_mangle]
pub extern "C" fn gw_recovery_options_default(n_pairs: usize, lag: usize) -> GwRecoveryOptions {
    let cfg = RecoveryConfig::new(n_pairs, lag);
    GwRecoveryOptions {
        n_pairs,
        lag,
        normalize_modes: cfg.normalize_modes,
        positivize: cfg.positivize,
        sqrt_c: 0.0,
        amp_norm_tol: -1.0,
        validation_horizon: cfg.validation_horizon,
        retry: cfg.retry,
    }
}

fn to_config(o: &GwRecoveryOptions) -> RecoveryConfig {
    let mut cfg = RecoveryConfig::new(o.n_pairs, o.lag);
    cfg.normalize_modes = o.normalize_modes;
    cfg.positivize = o.positivize;
    cfg.sqrt_c = (o.sqrt_c > 0.0).then_some(o.sqrt_c);
    cfg.amp_norm_tol = (o.amp_norm_tol >= 0.0).then_some(o.amp_norm_tol);
    cfg.validation_horizon = o.validation_horizon;
    cfg.retry = o.retry;
    cfg
}

/// # Safety
/// `panel` and `options` must be null or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_recover_graph(
    panel: *const GwPanel,
    options: *const GwRecoveryOptions,
    out: *mut *mut GwRecovered,
) -> GwStatus {
    guard(|| {
        let p = &borrow(panel, "panel")?.0;
        let cfg = to_config(borrow(options, "options")?);
        put_handle(out, GwRecovered(recover_graph(p, &cfg)?))
    })
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gw_recovered_node_count(graph: *const GwRecovered, out: *mut usize) -> GwStatus {
    guard(|| put(out, borrow(graph, "graph")?.0.weights.n(), "out"))
}

/// Weight between nodes `x` and `y` (0-based).
///
/// # Safety
/// `graph` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_recovered_weight(graph: *const GwRecovered, x: usize, y: usize, out: *mut f64) -> GwStatus {
    guard(|| {
        let w = &borrow(graph, "graph")?.0.weights;
        if x >= w.n() || y >= w.n() {
            return Err(Failure(
                GwStatus::InvalidInput,
                format!("node pair ({x}, {y}) out of range"),
            ));
        }
        put(out, w.get(x, y), "out")
    })
}

/// Copies the dense row-major weight matrix into `buf` (`len >= n * n`).
///
/// # Safety
/// `graph` must be null or a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gw_recovered_weights(graph: *const GwRecovered, buf: *mut f64, len: usize) -> GwStatus {
    guard(|| {
        let w = &borrow(graph, "graph")?.0.weights;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = w.n();
        if len < n * n {
            return Err(Failure(
                GwStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", n * n),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, n * n);
        for x in 0..n {
            for y in 0..n {
                dst[x * n + y] = w.get(x, y);
            }
        }
        Ok(())
    })
}

/// Whether the held-out validation flagged the fit.
///
/// # Safety
/// `graph` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_recovered_has_advisory(graph: *const GwRecovered, out: *mut bool) -> GwStatus {
    guard(|| put(out, borrow(graph, "graph")?.0.has_advisory(), "out"))
}

/// Graph and diagnostics as a JSON string. Free with [`gw_string_free`].
///
/// # Safety
/// `graph` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_recovered_to_json(graph: *const GwRecovered, out: *mut *mut c_char) -> GwStatus {
    guard(|| {
        let g = &borrow(graph, "graph")?.0;
        let text = serde_json::to_string(&g.to_json()).map_err(Error::from)?;
        let c = CString::new(text).map_err(|_| Failure(GwStatus::Parse, "JSON contains NUL".into()))?;
        put(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gw_recovered_free(graph: *mut GwRecovered) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Stationary mode extraction with `n_pairs` pairs and at least `lag` shifts.
///
/// # Safety
/// `panel` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_extract_stationary(
    panel: *const GwPanel,
    n_pairs: usize,
    lag: usize,
    normalize: bool,
    out: *mut *mut GwModes,
) -> GwStatus {
    guard(|| {
        let p = &borrow(panel, "panel")?.0;
        let (modes, _) = extract_modes_stationary(p, n_pairs, lag, normalize)?;
        put_handle(out, GwModes(modes))
    })
}

/// # Safety
/// `modes` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_modes_len(modes: *const GwModes, out: *mut usize) -> GwStatus {
    guard(|| put(out, borrow(modes, "modes")?.0.len(), "out"))
}

/// Mode `j` in canonical order (constant first, then conjugate pairs).
///
/// # Safety
/// `modes` must be null or a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_modes_get(modes: *const GwModes, j: usize, re: *mut f64, im: *mut f64) -> GwStatus {
    guard(|| {
        let m = &borrow(modes, "modes")?.0;
        let z = m
            .modes()
            .get(j)
            .ok_or_else(|| Failure(GwStatus::InvalidInput, format!("mode {j} out of range")))?;
        put(re, z.re, "re")?;
        put(im, z.im, "im")
    })
}

/// # Safety
/// `modes` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gw_modes_free(modes: *mut GwModes) {
    if !modes.is_null() {
        drop(Box::from_raw(modes));
    }
}

/// Roots of `coeffs[0] + coeffs[1] z + … + coeffs[len-1] z^(len-1)`.
/// Writes up to `cap` roots and the degree to `count`; returns
/// `GW_STATUS_BUFFER_TOO_SMALL` (with `count` set) when `cap` is short.
///
/// # Safety
/// `coeffs` must hold `len` doubles; `re` and `im` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn gw_polynomial_roots(
    coeffs: *const f64,
    len: usize,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    count: *mut usize,
) -> GwStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let p = RealPolynomial::new(std::slice::from_raw_parts(coeffs, len).to_vec())?;
        let roots = p.roots()?;
        put(count, roots.len(), "count")?;
        if cap < roots.len() {
            return Err(Failure(
                GwStatus::BufferTooSmall,
                format!("need {} slots, got {cap}", roots.len()),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("root buffers"));
        }
        for (i, z) in roots.iter().enumerate() {
            *re.add(i) = z.re;
            *im.add(i) = z.im;
        }
        Ok(())
    })
}
