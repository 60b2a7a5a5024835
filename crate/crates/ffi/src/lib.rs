//! C interface to `vista-eval`.
//!
//! Every fallible function returns a [`VistaStatus`]; on failure a
//! human-readable message is available from [`vista_last_error`] on the
//! same thread. Objects are handed out as opaque pointers and released
//! with their matching `_free` function. Strings returned through `char**`
//! out-parameters are owned by the caller and released with
//! [`vista_string_free`].
//!
//! The header `include/vista_eval.h` is regenerated on every build.

#![allow(clippy::missing_safety_doc)]

mod error;
mod eval;
mod mask;
mod metrics;

use std::ffi::{c_char, CStr, CString};

pub use error::{vista_last_error, VistaStatus};
pub use eval::*;
pub use mask::*;
pub use metrics::*;

use error::Failure;

/// Bit for the first-person view in [`VistaEvalOptions::views`].
pub const VISTA_VIEW_FPV: u32 = 1;
/// Bit for the third-person view in [`VistaEvalOptions::views`].
pub const VISTA_VIEW_TPV: u32 = 2;

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vista_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn vista_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if ptr.is_null() {
        Err(Failure::null(what))
    } else {
        Ok(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::new(VistaStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn get<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    let c = CString::new(s).map_err(|_| Failure::new(VistaStatus::InvalidArgument, "string contains NUL"))?;
    out.write(c.into_raw());
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}
