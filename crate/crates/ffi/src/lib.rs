//! C ABI over `cesaro_core`.
//!
//! Every function returns a `CesStatus`; results go through out-pointers.
//! On failure the message is kept per thread and can be fetched with
//! `ces_last_error`. Strings handed out by the library are released with
//! `ces_string_free`, handles with their own `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cesaro_core::criteria::{classify, Budget, SpaceClassification};
use cesaro_core::sections::{exact_identities, resolvent, resolvent_residual, TriMatrix};
use cesaro_core::spectra::{member, predict, Lambda, Membership};
use cesaro_core::weights::{gallery, GalleryParams, WeightFamily, WeightsError};
use num_complex::Complex64;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownKey = 3,
    InvalidArgument = 4,
    Singular = 5,
    OutOfScope = 6,
    Panic = 99,
}

/// Membership of a point in a predicted spectrum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesMembership {
    Inside = 0,
    BoundaryIn = 1,
    BoundaryOut = 2,
    Outside = 3,
}

impl From<Membership> for CesMembership {
    fn from(m: Membership) -> Self {
        match m {
            Membership::Inside => CesMembership::Inside,
            Membership::BoundaryIn => CesMembership::BoundaryIn,
            Membership::BoundaryOut => CesMembership::BoundaryOut,
            Membership::Outside => CesMembership::Outside,
        }
    }
}

/// Weight family handle.
pub struct CesFamily(WeightFamily);
/// Classification handle.
pub struct CesClassification(SpaceClassification);
/// Lower-triangular matrix handle.
pub struct CesMatrix {
    mu: Complex64,
    m: TriMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(code: CesStatus, msg: impl Into<String>) -> CesStatus {
    set_error(msg);
    code
}

fn guard(f: impl FnOnce() -> CesStatus) -> CesStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CesStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, CesStatus> {
    if p.is_null() {
        return Err(fail(CesStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CesStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn give_string(s: String, out: *mut *mut c_char) -> CesStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            CesStatus::Ok
        }
        Err(_) => fail(CesStatus::InvalidArgument, "interior NUL in output"),
    }
}

fn weights_status(e: &WeightsError) -> CesStatus {
    match e {
        WeightsError::UnknownKey { .. } => CesStatus::UnknownKey,
        _ => CesStatus::InvalidArgument,
    }
}

/// Copy of the last error message on this thread, or NULL if none.
/// Free with `ces_string_free`.
#[no_mangle]
pub extern "C" fn ces_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(s) => s.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ces_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Gallery family by key. `params` is NULL or `"k=v;k=v"`.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ces_family_gallery(
    key: *const c_char,
    params: *const c_char,
    out: *mut *mut CesFamily,
) -> CesStatus {
    guard(|| {
        if out.is_null() {
            return fail(CesStatus::NullPointer, "out is null");
        }
        let key = match read_str(key) {
            Ok(k) => k,
            Err(s) => return s,
        };
        let mut p = GalleryParams::new();
        if !params.is_null() {
            let text = match read_str(params) {
                Ok(t) => t,
                Err(s) => return s,
            };
            for kv in text.split(';').filter(|t| !t.trim().is_empty()) {
                let Some((k, v)) = kv.split_once('=') else {
                    return fail(CesStatus::InvalidArgument, format!("parameter `{kv}` is not k=v"));
                };
                p.insert(k.trim().to_string(), v.trim().parse().unwrap());
            }
        }
        match gallery(key, &p) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(CesFamily(f)));
                CesStatus::Ok
            }
            Err(e) => fail(weights_status(&e), e.to_string()),
        }
    })
}

/// Family from a JSON definition.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ces_family_from_json(json: *const c_char, out: *mut *mut CesFamily) -> CesStatus {
    guard(|| {
        if out.is_null() {
            return fail(CesStatus::NullPointer, "out is null");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match WeightFamily::from_json(text) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(CesFamily(f)));
                CesStatus::Ok
            }
            Err(e) => fail(weights_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `f` must be NULL or a live family handle.
#[no_mangle]
pub unsafe extern "C" fn ces_family_free(f: *mut CesFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// ln a_n(i).
///
/// # Safety
/// `f` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_family_log_a(f: *const CesFamily, n: u64, i: u64, out: *mut f64) -> CesStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        if n == 0 || i == 0 {
            return fail(CesStatus::InvalidArgument, "indices start at 1");
        }
        match (*f).0.log_a(n, i) {
            Ok(v) => {
                *out = v;
                CesStatus::Ok
            }
            Err(e) => fail(CesStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Classify a family at the given budget.
///
/// # Safety
/// `f` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_classify(
    f: *const CesFamily,
    i_max: u64,
    n_max: u64,
    m_max: u64,
    out: *mut *mut CesClassification,
) -> CesStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        match classify(&(*f).0, Budget::new(i_max, n_max, m_max)) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CesClassification(c)));
                CesStatus::Ok
            }
            Err(e) => fail(CesStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `c` must be NULL or a live classification handle.
#[no_mangle]
pub unsafe extern "C" fn ces_classification_free(c: *mut CesClassification) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Classification report as JSON. Free with `ces_string_free`.
///
/// # Safety
/// `c` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_classification_json(c: *const CesClassification, out: *mut *mut c_char) -> CesStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        give_string((*c).0.to_json().to_string(), out)
    })
}

/// 1 when no equivalence is violated and no declared verdict contradicted.
///
/// # Safety
/// `c` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_classification_consistent(c: *const CesClassification, out: *mut i32) -> CesStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        *out = (*c).0.is_consistent() as i32;
        CesStatus::Ok
    })
}

/// Membership of `re + i im` in the spectrum predicted by `c`.
///
/// # Safety
/// `c` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_spectrum_member(
    c: *const CesClassification,
    re: f64,
    im: f64,
    out: *mut CesMembership,
) -> CesStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        if !re.is_finite() || !im.is_finite() {
            return fail(CesStatus::InvalidArgument, "lambda must be finite");
        }
        match predict(&(*c).0) {
            Ok(d) => {
                *out = member(&d, &Lambda::Double(Complex64::new(re, im))).into();
                CesStatus::Ok
            }
            Err(e) => fail(CesStatus::OutOfScope, e.to_string()),
        }
    })
}

/// N x N section of (C - mu I)^-1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ces_resolvent(re: f64, im: f64, n: usize, out: *mut *mut CesMatrix) -> CesStatus {
    guard(|| {
        if out.is_null() {
            return fail(CesStatus::NullPointer, "out is null");
        }
        if n == 0 {
            return fail(CesStatus::InvalidArgument, "N must be at least 1");
        }
        let mu = Complex64::new(re, im);
        match resolvent(mu, n) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(CesMatrix { mu, m }));
                CesStatus::Ok
            }
            Err(e) => fail(CesStatus::Singular, e.to_string()),
        }
    })
}

/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ces_matrix_free(m: *mut CesMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_matrix_dim(m: *const CesMatrix, out: *mut usize) -> CesStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        *out = (*m).m.dim();
        CesStatus::Ok
    })
}

/// Entry (i, j), 1-based; zero above the diagonal.
///
/// # Safety
/// `m` must be a live handle, `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_matrix_get(
    m: *const CesMatrix,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> CesStatus {
    guard(|| {
        if m.is_null() || re.is_null() || im.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        let d = (*m).m.dim();
        if i == 0 || j == 0 || i > d || j > d {
            return fail(CesStatus::InvalidArgument, format!("index ({i}, {j}) outside 1..={d}"));
        }
        let z = (*m).m.get(i, j);
        *re = z.re;
        *im = z.im;
        CesStatus::Ok
    })
}

/// max |((C - mu I) R - I)_ij| for a resolvent handle.
///
/// # Safety
/// `m` must be a live handle from `ces_resolvent`, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ces_resolvent_residual(m: *const CesMatrix, out: *mut f64) -> CesStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return fail(CesStatus::NullPointer, "null handle or out");
        }
        *out = resolvent_residual((*m).mu, &(*m).m);
        CesStatus::Ok
    })
}

/// Runs the exact identity suite at size N; `passed` gets 1 if all hold.
///
/// # Safety
/// `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ces_verify_identities(n: usize, passed: *mut i32) -> CesStatus {
    guard(|| {
        if passed.is_null() {
            return fail(CesStatus::NullPointer, "out is null");
        }
        if n < 2 {
            return fail(CesStatus::InvalidArgument, "N must be at least 2");
        }
        *passed = exact_identities(n).iter().all(|c| c.passed) as i32;
        CesStatus::Ok
    })
}
