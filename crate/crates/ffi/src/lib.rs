//! C ABI for the germ-moduli engine.
//!
//! Germs are opaque handles created by `gm_germ_parse` and released with
//! `gm_germ_free`. Every fallible call returns a `GmStatus`; on failure the
//! message is available from `gm_last_error` until the next call on the
//! same thread. Strings returned by the library are released with
//! `gm_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use germ_moduli::germ::MapGerm;
use germ_moduli::invariants::{milnor, tjurina, Colength};
use germ_moduli::tangent::{moduli_dimension, BaseGroup, GroupSpec, ModuliOptions, VolumeSide};
use germ_moduli::weights::{wqh_certificate, WqhQuery};
use germ_moduli::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    UnsupportedGroup = 5,
    /// A colength or Milnor number was not certified within the order bound.
    NotCertified = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

/// An owned map-germ.
pub struct GmGerm {
    inner: MapGerm,
}

/// Route A summary.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct GmModuli {
    /// Quotient dimension at the top order.
    pub top: usize,
    /// True when the last `window + 1` values agree.
    pub stabilized: bool,
    /// The stable value; meaningful only when `stabilized`.
    pub value: usize,
    pub k_max: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GmStatus {
    match e {
        Error::Syntax { .. } | Error::UnknownVariable { .. } | Error::NegativeExponent { .. } => GmStatus::Parse,
        Error::UnsupportedGroup(_) => GmStatus::UnsupportedGroup,
        Error::NonFinite(_) => GmStatus::NotCertified,
        Error::Inconsistent(_) | Error::Io(_) | Error::Atlas(_) => GmStatus::Internal,
        _ => GmStatus::InvalidArgument,
    }
}

struct Fail(GmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records its error message, and converts panics to `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GmStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            GmStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(GmStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(GmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_list(p: *const c_char, what: &str) -> Result<Option<Vec<String>>, Fail> {
    if p.is_null() {
        return Ok(None);
    }
    let s = text(p, what)?;
    Ok(Some(s.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()))
}

unsafe fn germ_ref<'a>(g: *const GmGerm) -> Result<&'a MapGerm, Fail> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| Fail(GmStatus::NullArgument, "germ is null".into()))
}

fn out_arg<T>(p: *mut T) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(GmStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

unsafe fn group(base: *const c_char, side: *const c_char) -> Result<GroupSpec, Fail> {
    let base: BaseGroup = text(base, "group")?.parse()?;
    let side: VolumeSide = if side.is_null() { VolumeSide::None } else { text(side, "side")?.parse()? };
    Ok(GroupSpec::new(base, side)?)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn gm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses comma-separated components. `source_vars` and `target_vars` are
/// comma-separated name lists, or null for the defaults.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_germ_parse(
    components: *const c_char,
    source_vars: *const c_char,
    target_vars: *const c_char,
    out: *mut *mut GmGerm,
) -> GmStatus {
    guard(|| {
        out_arg(out)?;
        *out = ptr::null_mut();
        let comps = text(components, "components")?;
        let src = opt_list(source_vars, "source_vars")?;
        let tgt = opt_list(target_vars, "target_vars")?;
        let g = MapGerm::parse(comps, src.as_deref(), tgt.as_deref())?;
        *out = Box::into_raw(Box::new(GmGerm { inner: g }));
        Ok(())
    })
}

/// Releases a germ. Null is ignored.
///
/// # Safety
/// `g` must come from `gm_germ_parse` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gm_germ_free(g: *mut GmGerm) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Source dimension `n`, or 0 for null.
///
/// # Safety
/// `g` must be null or a live germ.
#[no_mangle]
pub unsafe extern "C" fn gm_germ_source_dim(g: *const GmGerm) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n())
}

/// Target dimension `p`, or 0 for null.
///
/// # Safety
/// `g` must be null or a live germ.
#[no_mangle]
pub unsafe extern "C" fn gm_germ_target_dim(g: *const GmGerm) -> usize {
    g.as_ref().map_or(0, |g| g.inner.p())
}

/// Canonical text of the germ, e.g. `(x, x*y + y^5)`. Free with
/// `gm_string_free`.
///
/// # Safety
/// `g` must be a live germ; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_germ_format(g: *const GmGerm, out: *mut *mut c_char) -> GmStatus {
    guard(|| {
        out_arg(out)?;
        let f = germ_ref(g)?;
        *out = CString::new(f.format()).map_err(|e| Fail(GmStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Route A moduli dimension for `k = 2..=k_max`. `group_name` is one of
/// R, C, L, A, K; `side` is "source", "target", "none" or null.
///
/// # Safety
/// `g` must be a live germ; strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_moduli_dimension(
    g: *const GmGerm,
    group_name: *const c_char,
    side: *const c_char,
    k_max: u32,
    out: *mut GmModuli,
) -> GmStatus {
    guard(|| {
        out_arg(out)?;
        let f = germ_ref(g)?;
        let spec = group(group_name, side)?;
        let r = moduli_dimension(f, spec, k_max, ModuliOptions { window: 2, cobasis: false })?;
        *out = GmModuli { top: r.top(), stabilized: r.stabilized, value: r.stable_value.unwrap_or(0), k_max };
        Ok(())
    })
}

/// Weak quasihomogeneity for a volume-constrained group. On success
/// `*found` tells whether a certificate exists. When found and the buffers
/// are non-null, the source weights go to `weights` (length `n`) and the
/// target degrees to `degrees` (length `p`).
///
/// # Safety
/// `g` must be a live germ; `found` writable; buffers null or of the
/// stated lengths.
#[no_mangle]
pub unsafe extern "C" fn gm_wqh(
    g: *const GmGerm,
    group_name: *const c_char,
    side: *const c_char,
    found: *mut bool,
    weights: *mut i64,
    weights_len: usize,
    degrees: *mut i64,
    degrees_len: usize,
) -> GmStatus {
    guard(|| {
        out_arg(found)?;
        let f = germ_ref(g)?;
        let spec = group(group_name, side)?;
        let outcome = wqh_certificate(f, WqhQuery::Group(spec))?;
        *found = outcome.certificate.is_some();
        if let Some(c) = outcome.certificate {
            for (buf, len, src) in [(weights, weights_len, &c.weights.weights), (degrees, degrees_len, &c.weights.degrees)] {
                if buf.is_null() {
                    continue;
                }
                if len < src.len() {
                    return Err(Fail(GmStatus::BufferTooSmall, format!("buffer of {len} for {} entries", src.len())));
                }
                ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
            }
        }
        Ok(())
    })
}

/// Milnor number (Le-Greuel for complete intersections), certified by
/// jet order `k_max`.
///
/// # Safety
/// `g` must be a live germ; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_milnor(g: *const GmGerm, k_max: u32, out: *mut usize) -> GmStatus {
    guard(|| {
        out_arg(out)?;
        let r = milnor(germ_ref(g)?, k_max, None)?;
        if !r.certified {
            return Err(Fail(GmStatus::NotCertified, "Milnor number not certified".into()));
        }
        *out = r.value;
        Ok(())
    })
}

/// Tjurina number, certified by jet order `k_max`.
///
/// # Safety
/// `g` must be a live germ; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_tjurina(g: *const GmGerm, k_max: u32, out: *mut usize) -> GmStatus {
    guard(|| {
        out_arg(out)?;
        let r = tjurina(germ_ref(g)?, k_max)?;
        match r.value {
            Colength::Finite(v) if r.certified => {
                *out = v;
                Ok(())
            }
            _ => Err(Fail(GmStatus::NotCertified, format!("colength not certified by order {k_max}"))),
        }
    })
}

/// Runs one CLI command with `--format json` and hands back the report.
/// `argv` excludes the program name. `exit_code` receives the CLI exit
/// status (0, 1 or 2); `json` receives stdout, to be freed with
/// `gm_string_free`.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn gm_report_json(
    argv: *const *const c_char,
    argc: usize,
    exit_code: *mut i32,
    json: *mut *mut c_char,
) -> GmStatus {
    guard(|| {
        out_arg(exit_code)?;
        out_arg(json)?;
        *json = ptr::null_mut();
        if argv.is_null() && argc > 0 {
            return Err(Fail(GmStatus::NullArgument, "argv is null".into()));
        }
        let mut args = vec!["germ-moduli".to_string(), "--format".into(), "json".into()];
        for i in 0..argc {
            args.push(text(*argv.add(i), "argument")?.to_string());
        }
        let mut out = Vec::new();
        let mut err = Vec::new();
        *exit_code = germ_moduli::cli::run(args, &mut out, &mut err);
        if *exit_code == 1 {
            set_error(String::from_utf8_lossy(&err).trim().to_string());
        }
        *json = CString::new(out).map_err(|e| Fail(GmStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}
