//! C ABI for the distortion monitor and decision-region classifier.
//!
//! Handles are opaque pointers created by `*_new`/`*_load` and released with
//! the matching `*_free`. Every fallible call returns a [`PdmlStatus`]; the
//! message for the most recent failure on the calling thread is available
//! from [`pdml_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_complex::Complex64;
use pdml_core::bayes::DecisionRegionGrid;
use pdml_core::cli::io::load_regions;
use pdml_core::{Detector, DetectorKind, Error, Hypothesis, Measurement, TapVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdmlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numeric = 4,
    Input = 5,
    EmptyDataset = 6,
    Schedule = 7,
    Parse = 8,
    Version = 9,
    AxisMismatch = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdmlDetectorKind {
    /// Multi-tap maximum-likelihood post-fit residual.
    Pdml = 0,
    /// Two-tap symmetric difference.
    Sd = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdmlHypothesis {
    Clean = 0,
    Multipath = 1,
    Spoofing = 2,
    Jamming = 3,
}

impl From<Hypothesis> for PdmlHypothesis {
    fn from(h: Hypothesis) -> Self {
        match h {
            Hypothesis::H0 => PdmlHypothesis::Clean,
            Hypothesis::H1 => PdmlHypothesis::Multipath,
            Hypothesis::H2 => PdmlHypothesis::Spoofing,
            Hypothesis::H3 => PdmlHypothesis::Jamming,
        }
    }
}

/// Opaque distortion detector.
pub struct PdmlDetector {
    inner: Detector,
}

/// Opaque decision-region map.
pub struct PdmlRegions {
    inner: DecisionRegionGrid,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PdmlStatus {
    match e.category() {
        "config" => PdmlStatus::Config,
        "numeric" => PdmlStatus::Numeric,
        "input" => PdmlStatus::Input,
        "empty-dataset" => PdmlStatus::EmptyDataset,
        "schedule" => PdmlStatus::Schedule,
        "parse" => PdmlStatus::Parse,
        "version" => PdmlStatus::Version,
        "axis-mismatch" => PdmlStatus::AxisMismatch,
        _ => PdmlStatus::Io,
    }
}

enum Failure {
    Status(PdmlStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(PdmlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PdmlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PdmlStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            PdmlStatus::Panic
        }
    }
}

/// Creates a detector. `taps` is the ML tap count (odd, at least 3); the SD
/// detector ignores it and uses the default 0.5-chip spacing.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pdml_detector_new(
    kind: PdmlDetectorKind,
    taps: usize,
    out: *mut *mut PdmlDetector,
) -> PdmlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            PdmlDetectorKind::Pdml => DetectorKind::Pdml,
            PdmlDetectorKind::Sd => DetectorKind::Sd,
        };
        let inner = Detector::with_defaults(kind, taps)?;
        *out = Box::into_raw(Box::new(PdmlDetector { inner }));
        Ok(())
    })
}

/// # Safety
/// `det` must be null or a handle from [`pdml_detector_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdml_detector_free(det: *mut PdmlDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Number of correlator taps the detector expects, or 0 for a null handle.
///
/// # Safety
/// `det` must be null or a live detector handle.
#[no_mangle]
pub unsafe extern "C" fn pdml_detector_tap_count(det: *const PdmlDetector) -> usize {
    det.as_ref().map_or(0, |d| d.inner.grid().len())
}

/// Copies the tap offsets in chips into `out[0..len]`.
///
/// # Safety
/// `det` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pdml_detector_offsets(
    det: *const PdmlDetector,
    out: *mut f64,
    len: usize,
) -> PdmlStatus {
    guard(|| {
        let det = det.as_ref().ok_or_else(|| null("det"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let offsets = det.inner.grid().offsets();
        if len != offsets.len() {
            return Err(Error::TapCountMismatch {
                expected: offsets.len(),
                got: len,
            }
            .into());
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(offsets);
        Ok(())
    })
}

/// Computes the distortion of one tap vector given as separate in-phase and
/// quadrature arrays of `len` values. `noise_var` is the per-component noise
/// variance of the taps after gain control.
///
/// # Safety
/// `det` must be a live handle; `re` and `im` must each point to `len`
/// readable doubles; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn pdml_distortion(
    det: *const PdmlDetector,
    re: *const f64,
    im: *const f64,
    len: usize,
    noise_var: f64,
    out: *mut f64,
) -> PdmlStatus {
    guard(|| {
        let det = det.as_ref().ok_or_else(|| null("det"))?;
        if re.is_null() || im.is_null() || out.is_null() {
            return Err(null("re, im or out"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let im = std::slice::from_raw_parts(im, len);
        let values = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        *out = det.inner.distortion(&TapVector::new(values, noise_var))?;
        Ok(())
    })
}

/// Loads a region file written by `pdml design`.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must point to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pdml_regions_load(
    path: *const c_char,
    out: *mut *mut PdmlRegions,
) -> PdmlStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return Err(null("path or out"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| {
            Failure::Status(PdmlStatus::InvalidArgument, "path is not valid UTF-8".into())
        })?;
        let inner = load_regions(Path::new(path))?;
        *out = Box::into_raw(Box::new(PdmlRegions { inner }));
        Ok(())
    })
}

/// # Safety
/// `regions` must be null or a handle from [`pdml_regions_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdml_regions_free(regions: *mut PdmlRegions) {
    if !regions.is_null() {
        drop(Box::from_raw(regions));
    }
}

/// Classifies one (power, distortion) measurement.
///
/// # Safety
/// `regions` must be a live handle and `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn pdml_classify(
    regions: *const PdmlRegions,
    power_db: f64,
    distortion: f64,
    out: *mut PdmlHypothesis,
) -> PdmlStatus {
    guard(|| {
        let regions = regions.as_ref().ok_or_else(|| null("regions"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if power_db.is_nan() || distortion.is_nan() {
            return Err(Failure::Status(
                PdmlStatus::InvalidArgument,
                "power_db and distortion must not be NaN".into(),
            ));
        }
        let m = Measurement {
            power_db,
            distortion,
            epoch: 0,
        };
        *out = regions.inner.classify(&m).into();
        Ok(())
    })
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn pdml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn pdml_status_name(status: PdmlStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PdmlStatus::Ok => c"ok",
        PdmlStatus::NullPointer => c"null-pointer",
        PdmlStatus::InvalidArgument => c"invalid-argument",
        PdmlStatus::Config => c"config",
        PdmlStatus::Numeric => c"numeric",
        PdmlStatus::Input => c"input",
        PdmlStatus::EmptyDataset => c"empty-dataset",
        PdmlStatus::Schedule => c"schedule",
        PdmlStatus::Parse => c"parse",
        PdmlStatus::Version => c"version",
        PdmlStatus::AxisMismatch => c"axis-mismatch",
        PdmlStatus::Io => c"io",
        PdmlStatus::Panic => c"panic",
    };
    s.as_ptr()
}
