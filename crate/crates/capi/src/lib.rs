//! C ABI for the exact twisted-module workbench.
//!
//! The surface follows the usual conventions for embedding: opaque handles
//! behind pointers, integer status codes, UTF-8 strings allocated by this
//! library and released through [`of_string_free`], and a thread-local
//! message for the last error. Computations and formats are identical to the
//! `orbifock` CLI; structured results (tables, reports) come back as JSON
//! text.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use orbifock::rat::Rat;
use orbifock::series::{self, ScalarSeries};
use orbifock::verify::{run_suite, SuiteOptions};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OfStatus {
    Ok = 0,
    InvalidArgument = 1,
    ComputeError = 2,
    VerifyFailed = 3,
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Message describing the most recent error on this thread. The pointer is
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn of_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string; do not free it.
#[no_mangle]
pub extern "C" fn of_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an out-parameter of
/// this library, or null.
#[no_mangle]
pub unsafe extern "C" fn of_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn out_string(out: *mut *mut c_char, text: String) -> OfStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            OfStatus::Ok
        }
        Err(_) => {
            set_error("interior NUL in output");
            OfStatus::ComputeError
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, OfStatus> {
    if p.is_null() {
        set_error(&format!("{} is null", what));
        return Err(OfStatus::InvalidArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{} is not valid UTF-8", what));
        OfStatus::InvalidArgument
    })
}

fn guarded<F: FnOnce() -> OfStatus>(f: F) -> OfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            OfStatus::Panic
        }
    }
}

// ---------------------------------------------------------------------------
// Opaque series handles
// ---------------------------------------------------------------------------

/// Opaque handle to an exact Laurent series in fractional powers.
pub struct OfSeries {
    inner: ScalarSeries,
}

/// Parse the textual series format, e.g.
/// `3/2*z^(-1/2) + z^(1) @window[-1/2,4]`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_parse(
    text: *const c_char,
    out: *mut *mut OfSeries,
) -> OfStatus {
    guarded(|| {
        let text = match read_str(text, "series text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match series::parse_series(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OfSeries { inner }));
                OfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                OfStatus::InvalidArgument
            }
        }
    })
}

/// Render a series handle in the textual format.
///
/// # Safety
/// `s` must be a live handle from this library; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_to_string(
    s: *const OfSeries,
    out: *mut *mut c_char,
) -> OfStatus {
    guarded(|| {
        if s.is_null() {
            set_error("series handle is null");
            return OfStatus::InvalidArgument;
        }
        out_string(out, (*s).inner.to_string())
    })
}

unsafe fn series_binop(
    a: *const OfSeries,
    b: *const OfSeries,
    out: *mut *mut OfSeries,
    f: impl FnOnce(&ScalarSeries, &ScalarSeries) -> Result<ScalarSeries, orbifock::Error>,
) -> OfStatus {
    if a.is_null() || b.is_null() {
        set_error("series handle is null");
        return OfStatus::InvalidArgument;
    }
    match f(&(*a).inner, &(*b).inner) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(OfSeries { inner }));
            OfStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            OfStatus::ComputeError
        }
    }
}

fn lcm_ram(a: u32, b: u32) -> u32 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    a / x.max(1) * b
}

/// Termwise sum on the intersection window.
///
/// # Safety
/// `a`, `b` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_add(
    a: *const OfSeries,
    b: *const OfSeries,
    out: *mut *mut OfSeries,
) -> OfStatus {
    guarded(|| {
        series_binop(a, b, out, |x, y| {
            let l = lcm_ram(x.ram(), y.ram());
            x.convert_ram(l)?.add(&y.convert_ram(l)?)
        })
    })
}

/// Cauchy product with the pessimistic window rule.
///
/// # Safety
/// `a`, `b` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_mul(
    a: *const OfSeries,
    b: *const OfSeries,
    out: *mut *mut OfSeries,
) -> OfStatus {
    guarded(|| {
        series_binop(a, b, out, |x, y| {
            let l = lcm_ram(x.ram(), y.ram());
            x.convert_ram(l)?.mul(&y.convert_ram(l)?)
        })
    })
}

/// Formal substitution `a(b)`; `b` must have strictly positive exponents.
///
/// # Safety
/// `a`, `b` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_compose(
    a: *const OfSeries,
    b: *const OfSeries,
    out: *mut *mut OfSeries,
) -> OfStatus {
    guarded(|| series_binop(a, b, out, |x, y| series::compose(x, y)))
}

/// Termwise `z`-derivative; the window shifts down by one.
///
/// # Safety
/// `s` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_derivative(
    s: *const OfSeries,
    out: *mut *mut OfSeries,
) -> OfStatus {
    guarded(|| {
        if s.is_null() {
            set_error("series handle is null");
            return OfStatus::InvalidArgument;
        }
        *out = Box::into_raw(Box::new(OfSeries {
            inner: (*s).inner.derivative(),
        }));
        OfStatus::Ok
    })
}

/// Coefficient of `z^(-1)` as an exact rational string; fails when the
/// window does not cover it.
///
/// # Safety
/// `s` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_series_residue(
    s: *const OfSeries,
    out: *mut *mut c_char,
) -> OfStatus {
    guarded(|| {
        if s.is_null() {
            set_error("series handle is null");
            return OfStatus::InvalidArgument;
        }
        match (*s).inner.residue() {
            Ok(r) => out_string(out, r.to_string()),
            Err(e) => {
                set_error(&e.to_string());
                OfStatus::ComputeError
            }
        }
    })
}

/// Release a series handle.
///
/// # Safety
/// `s` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn of_series_free(s: *mut OfSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Tables, suites, coinvariants
// ---------------------------------------------------------------------------

/// The expansion coefficients of the quadratic correction operator through
/// the given total degree, as JSON.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_delta_table(order: u32, out: *mut *mut c_char) -> OfStatus {
    guarded(|| {
        let table = series::delta_coefficients(order);
        let rows: Vec<serde_json::Value> = table
            .iter()
            .map(|(m, n, c)| serde_json::json!({"m": m, "n": n, "value": c.to_string()}))
            .collect();
        out_string(
            out,
            serde_json::json!({"order": order, "coefficients": rows}).to_string(),
        )
    })
}

/// Run a named verification suite with an optional JSON options object
/// (fields `deg`, `modes`, `order`, `slice`, `pole_bound`, `rho`). Returns
/// `Ok` when every check passed and `VerifyFailed` when at least one failed;
/// the JSON report is written either way.
///
/// # Safety
/// `suite` must be valid; `params_json` may be null; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn of_verify(
    suite: *const c_char,
    params_json: *const c_char,
    out: *mut *mut c_char,
) -> OfStatus {
    guarded(|| {
        let suite = match read_str(suite, "suite name") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let mut opts = SuiteOptions::default();
        if !params_json.is_null() {
            let text = match read_str(params_json, "params") {
                Ok(t) => t,
                Err(s) => return s,
            };
            let v: serde_json::Value = match serde_json::from_str(text) {
                Ok(v) => v,
                Err(e) => {
                    set_error(&format!("bad params: {}", e));
                    return OfStatus::InvalidArgument;
                }
            };
            if let Some(d) = v.get("deg").and_then(|x| x.as_i64()) {
                opts.deg = d;
            }
            if let Some(d) = v.get("slice").and_then(|x| x.as_i64()) {
                opts.slice = d;
            }
            if let Some(d) = v.get("order").and_then(|x| x.as_i64()) {
                opts.order = d;
            }
            if let Some(d) = v.get("pole_bound").and_then(|x| x.as_u64()) {
                opts.pole_bound = d as u32;
            }
            if let Some(s) = v.get("modes").and_then(|x| x.as_str()) {
                match s.parse() {
                    Ok(m) => opts.modes = m,
                    Err(_) => {
                        set_error("bad mode bound");
                        return OfStatus::InvalidArgument;
                    }
                }
            }
            if let Some(arr) = v.get("rho").and_then(|x| x.as_array()) {
                let parsed: Result<Vec<Rat>, _> = arr
                    .iter()
                    .map(|c| c.as_str().unwrap_or_default().parse::<Rat>())
                    .collect();
                match parsed {
                    Ok(r) => opts.rho = r,
                    Err(_) => {
                        set_error("bad rho coefficients");
                        return OfStatus::InvalidArgument;
                    }
                }
            }
        }
        match run_suite(suite, &opts) {
            Ok(report) => {
                let ok = report.ok;
                let text = serde_json::to_string(&report).unwrap_or_default();
                let s = out_string(out, text);
                if s != OfStatus::Ok {
                    return s;
                }
                if ok {
                    OfStatus::Ok
                } else {
                    set_error("verification checks failed");
                    OfStatus::VerifyFailed
                }
            }
            Err(e) => {
                set_error(&e.to_string());
                OfStatus::ComputeError
            }
        }
    })
}

/// Coinvariant dimension table for a JSON cover configuration; dispatches to
/// the Heisenberg or affine engine by the module specs.
///
/// # Safety
/// `config_json` must be valid; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn of_blocks(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> OfStatus {
    guarded(|| {
        let text = match read_str(config_json, "config") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match orbifock::cover::parse_config(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return OfStatus::InvalidArgument;
            }
        };
        let affine = cfg.insertions.iter().any(|i| {
            matches!(
                i.module,
                orbifock::cover::ModuleSpec::AffineVacuum { .. }
                    | orbifock::cover::ModuleSpec::AffineTwisted { .. }
            )
        });
        let table = if affine {
            orbifock::affine::affine_coinvariant_dims(&cfg)
        } else {
            orbifock::blocks::coinvariant_dims(&cfg)
        };
        match table {
            Ok(t) => out_string(out, serde_json::to_string(&t).unwrap_or_default()),
            Err(e) => {
                set_error(&e.to_string());
                OfStatus::ComputeError
            }
        }
    })
}
