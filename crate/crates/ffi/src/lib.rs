//! C ABI over the `bacycle` library.
//!
//! Structures and scorers are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`BacStatus`]; on failure
//! `bac_last_error_message` describes the error for the calling thread.
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bacycle::applications::preference_probability;
use bacycle::calibrate::{fit_calibration, Calibration, Loss};
use bacycle::cycle::{ddg, dg_estimate, CycleInput, DesignScope, Estimator};
use bacycle::scorer::{OrderPolicy, ScorerHandle};
use bacycle::structure::{kabsch_rmsd, parse_pdb, read_pdb_file, MutationSet, PartitionSpec, StructureModel};
use bacycle::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Io = 5,
    MissingTable = 6,
    Scoring = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BacEstimator {
    Cycle = 0,
    Prev = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BacLoss {
    L1 = 0,
    L2 = 1,
}

/// Parsed multi-chain backbone.
pub struct BacStructure(StructureModel);

/// Builtin or archive-backed scorer.
pub struct BacScorer(ScorerHandle);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BacStatus {
    match e {
        Error::Parse { .. }
        | Error::EmptyStructure
        | Error::MutationSyntax(_)
        | Error::Archive { .. }
        | Error::Normalization { .. }
        | Error::Json(_)
        | Error::Csv(_) => BacStatus::Parse,
        Error::Io(_) => BacStatus::Io,
        Error::MissingTable { .. } => BacStatus::MissingTable,
        Error::Unscorable(_) | Error::DegenerateFit(_) | Error::Undefined(_) => BacStatus::Scoring,
        _ => BacStatus::InvalidArgument,
    }
}

struct Failure(BacStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> BacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BacStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BacStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(BacStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BacStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(BacStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure(BacStatus::NullPointer, format!("`{name}` is null")));
    }
    out.write(value);
    Ok(())
}

fn policy(orders: u32, seed: u64) -> FfiResult<OrderPolicy> {
    if orders == 1 {
        return Ok(OrderPolicy::Canonical);
    }
    Ok(OrderPolicy::random(orders as usize, seed)?)
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn bac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses PDB text; `id` names the model in fingerprints.
///
/// # Safety
/// `text` and `id` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bac_structure_parse_pdb(
    text: *const c_char,
    id: *const c_char,
    out: *mut *mut BacStructure,
) -> BacStatus {
    guard(|| {
        let model = parse_pdb(str_arg(text, "text")?, str_arg(id, "id")?)?;
        write_out(out, Box::into_raw(Box::new(BacStructure(model))), "out")
    })
}

/// Reads a PDB file; the model id is the file stem.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bac_structure_read_pdb(path: *const c_char, out: *mut *mut BacStructure) -> BacStatus {
    guard(|| {
        let model = read_pdb_file(Path::new(str_arg(path, "path")?))?;
        write_out(out, Box::into_raw(Box::new(BacStructure(model))), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bac_structure_free(s: *mut BacStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live structure handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bac_structure_residue_count(s: *const BacStructure, out: *mut usize) -> BacStatus {
    guard(|| write_out(out, ref_arg(s, "structure")?.0.len(), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bac_scorer_builtin(out: *mut *mut BacScorer) -> BacStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(BacScorer(ScorerHandle::builtin()))), "out"))
}

/// Loads a JSONL log-probability archive.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bac_scorer_load_archive(path: *const c_char, out: *mut *mut BacScorer) -> BacStatus {
    guard(|| {
        let scorer = ScorerHandle::load_archive(Path::new(str_arg(path, "path")?))?;
        write_out(out, Box::into_raw(Box::new(BacScorer(scorer))), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bac_scorer_free(s: *mut BacScorer) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// ΔΔG for `mutations` (e.g. `"TI38I,KB12E"`) with partners `group_a` /
/// `group_b` (chain letters). `orders` decoding orders are averaged, seeded by
/// `seed`; 1 means the canonical order. Writes the raw log-ratio to `out_r`
/// and `-kt * r + bias` to `out_ddg`.
///
/// # Safety
/// Handles must be live; strings NUL-terminated; outputs writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bac_ddg(
    structure: *const BacStructure,
    scorer: *const BacScorer,
    group_a: *const c_char,
    group_b: *const c_char,
    mutations: *const c_char,
    estimator: BacEstimator,
    orders: u32,
    seed: u64,
    kt: f64,
    bias: f64,
    out_r: *mut f64,
    out_ddg: *mut f64,
) -> BacStatus {
    guard(|| {
        let model = &ref_arg(structure, "structure")?.0;
        let scorer = &ref_arg(scorer, "scorer")?.0;
        let partition = PartitionSpec::parse(str_arg(group_a, "group_a")?, str_arg(group_b, "group_b")?)?;
        let set: MutationSet = str_arg(mutations, "mutations")?.parse()?;
        let calib = Calibration::new(kt, bias)?;
        let estimator = match estimator {
            BacEstimator::Cycle => Estimator::Cycle,
            BacEstimator::Prev => Estimator::Prev,
        };
        let input = CycleInput::new(model, &partition, &set, scorer).with_orders(policy(orders, seed)?);
        let est = ddg(&input, &calib, estimator)?;
        write_out(out_r, est.r, "out_r")?;
        write_out(out_ddg, est.energy, "out_ddg")
    })
}

/// Approximate ΔG of the native complex over all residues, or only interface
/// residues when `interface_only` is set.
///
/// # Safety
/// Handles must be live; strings NUL-terminated; outputs writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bac_dg(
    structure: *const BacStructure,
    scorer: *const BacScorer,
    group_a: *const c_char,
    group_b: *const c_char,
    interface_only: bool,
    orders: u32,
    seed: u64,
    kt: f64,
    bias: f64,
    out_r: *mut f64,
    out_dg: *mut f64,
) -> BacStatus {
    guard(|| {
        let model = &ref_arg(structure, "structure")?.0;
        let scorer = &ref_arg(scorer, "scorer")?.0;
        let partition = PartitionSpec::parse(str_arg(group_a, "group_a")?, str_arg(group_b, "group_b")?)?;
        let calib = Calibration::new(kt, bias)?;
        let scope = if interface_only {
            DesignScope::Interface
        } else {
            DesignScope::All
        };
        let est = dg_estimate(model, &partition, scorer, &calib, &policy(orders, seed)?, scope)?;
        write_out(out_r, est.r, "out_r")?;
        write_out(out_dg, est.energy, "out_dg")
    })
}

/// CA RMSD after optimal superposition of two models with equal composition.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bac_kabsch_rmsd(
    pred: *const BacStructure,
    reference: *const BacStructure,
    out: *mut f64,
) -> BacStatus {
    guard(|| {
        let rmsd = kabsch_rmsd(&ref_arg(pred, "pred")?.0, &ref_arg(reference, "reference")?.0)?;
        write_out(out, rmsd, "out")
    })
}

/// Bradley–Terry probability that the mutant is preferred.
#[no_mangle]
pub extern "C" fn bac_preference_probability(loglik_wt: f64, loglik_mut: f64) -> f64 {
    preference_probability(loglik_wt, loglik_mut)
}

/// Fits `label ≈ -kt * r + bias` over `n` pairs.
///
/// # Safety
/// `r` and `labels` must point to `n` readable doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn bac_fit_calibration(
    r: *const f64,
    labels: *const f64,
    n: usize,
    loss: BacLoss,
    out_kt: *mut f64,
    out_bias: *mut f64,
) -> BacStatus {
    guard(|| {
        if n > 0 && (r.is_null() || labels.is_null()) {
            return Err(Failure(BacStatus::NullPointer, "`r` or `labels` is null".into()));
        }
        let pairs: Vec<(f64, f64)> = if n == 0 {
            Vec::new()
        } else {
            let rs = std::slice::from_raw_parts(r, n);
            let ys = std::slice::from_raw_parts(labels, n);
            rs.iter().copied().zip(ys.iter().copied()).collect()
        };
        let loss = match loss {
            BacLoss::L1 => Loss::L1,
            BacLoss::L2 => Loss::L2,
        };
        let fit = fit_calibration(&pairs, loss)?;
        write_out(out_kt, fit.calibration.kt(), "out_kt")?;
        write_out(out_bias, fit.calibration.bias(), "out_bias")
    })
}
