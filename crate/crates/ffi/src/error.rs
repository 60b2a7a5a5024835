use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};

use vista_eval::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VistaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Io = 4,
    Parse = 5,
    Constraint = 6,
    Rle = 7,
    DimensionMismatch = 8,
    Empty = 9,
    Tracker = 10,
    Unavailable = 11,
    Panic = 12,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

/// Message of the most recent failure on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vista_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

pub(crate) struct Failure {
    status: VistaStatus,
    message: String,
}

impl Failure {
    pub(crate) fn new(status: VistaStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    pub(crate) fn null(what: &str) -> Self {
        Self::new(VistaStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } | Error::Image { .. } => VistaStatus::Io,
            Error::Parse { .. } | Error::Json(_) => VistaStatus::Parse,
            Error::Rle(_) => VistaStatus::Rle,
            Error::Constraint { .. } => VistaStatus::Constraint,
            Error::DimensionMismatch(..) => VistaStatus::DimensionMismatch,
            Error::EmptyMask | Error::Empty(_) => VistaStatus::Empty,
            Error::InvalidArgument(_) => VistaStatus::InvalidArgument,
            Error::Protocol(_) | Error::Timeout(_) | Error::Driver(_) => VistaStatus::Tracker,
            Error::AttributeUnavailable { .. } | Error::NoClosedForm(_) => VistaStatus::Unavailable,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, translating failures and panics into a status code.
pub(crate) fn guard(f: impl FnOnce() -> Result<(), Failure> + UnwindSafe) -> VistaStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => VistaStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            VistaStatus::Panic
        }
    }
}
