//! C ABI over `geodec`. Plants and controllers are opaque handles owned by
//! the caller until freed. Every fallible call returns a [`GeodecStatus`];
//! on failure [`geodec_last_error`] describes what went wrong on this thread.
//!
//! Matrices cross the boundary as row-major `double` arrays. Strings
//! returned by the library are freed with [`geodec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use geodec::cli::{ControllerFile, PlantFile};
use geodec::ddp::{build_sm, build_vm, canonical_triples, solvability, KSearch, Plant, TripleKind};
use geodec::fixed_poles::fixed_poles_pair;
use geodec::geometry::{qstar, rstar, sstar, vstar};
use geodec::synth::{close_loop, synthesize, verify_decoupled, Controller};
use geodec::{Error, Matrix, SpectrumMultiset, Tolerances};
use num_complex::Complex64;

/// Result of a call. The first four values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodecStatus {
    Ok = 0,
    InvalidInput = 1,
    Unsolvable = 2,
    VerificationFailed = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodecTriple {
    Supremal = 0,
    Vm = 1,
    Sm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodecControllerMatrix {
    Ac = 0,
    Bc = 1,
    Cc = 2,
    Dc = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodecTolerances {
    pub rank_rel: f64,
    pub eig_match: f64,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeodecDims {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub p: usize,
    pub r: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeodecAnalysis {
    pub solvable: bool,
    pub dim_v_star: usize,
    pub dim_s_star: usize,
    pub dim_r_star: usize,
    pub dim_q_star: usize,
    /// Zero when the plant is not solvable.
    pub dim_v_m: usize,
    /// Zero when the plant is not solvable.
    pub dim_s_m: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GeodecVerification {
    pub decoupled: bool,
    pub max_markov_residual: f64,
    pub feedthrough_residual: f64,
}

/// Opaque plant handle.
pub struct GeodecPlant {
    plant: Plant,
}

/// Opaque controller handle.
pub struct GeodecController {
    controller: Controller,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(GeodecStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Unsolvable(_) => GeodecStatus::Unsolvable,
            Error::Dimension { .. }
            | Error::NonFinite(_)
            | Error::BadTolerance
            | Error::TargetSize { .. }
            | Error::NotConjugateClosed
            | Error::TargetSplit(_)
            | Error::IllPosed { .. } => GeodecStatus::InvalidInput,
            _ => GeodecStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<GeodecStatus, Fail>) -> GeodecStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            GeodecStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GeodecStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(GeodecStatus::InvalidInput, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn tolerances(tol: *const GeodecTolerances) -> Result<Tolerances, Fail> {
    let t = match tol.as_ref() {
        None => Tolerances::default(),
        Some(t) => Tolerances {
            rank_rel: t.rank_rel,
            eig_match: t.eig_match,
            residual: t.residual,
        },
    };
    t.validate()?;
    Ok(t)
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s)
        .expect("library JSON has no NUL bytes")
        .into_raw()
}

/// A row-major `rows x cols` matrix; `data` may be NULL only when empty.
unsafe fn matrix(data: *const f64, rows: usize, cols: usize, name: &str) -> Result<Matrix, Fail> {
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| invalid(format!("{name} is too large")))?;
    if len == 0 {
        return Ok(Matrix::zeros(rows, cols));
    }
    if data.is_null() {
        return Err(null(name));
    }
    let slice = std::slice::from_raw_parts(data, len);
    Ok(Matrix::from_row_slice(rows, cols, slice))
}

fn kind(t: GeodecTriple) -> TripleKind {
    match t {
        GeodecTriple::Supremal => TripleKind::Supremal,
        GeodecTriple::Vm => TripleKind::Vm,
        GeodecTriple::Sm => TripleKind::Sm,
    }
}

fn triple(
    plant: &Plant,
    which: GeodecTriple,
    tol: &Tolerances,
) -> Result<geodec::ddp::SolutionTriple, Fail> {
    let k = kind(which);
    canonical_triples(plant, tol, &KSearch::default())?
        .into_iter()
        .find(|t| t.kind == k)
        .ok_or_else(|| Fail(GeodecStatus::Internal, format!("no {k} triple")))
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn geodec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn geodec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn geodec_tolerances_default() -> GeodecTolerances {
    let t = Tolerances::default();
    GeodecTolerances {
        rank_rel: t.rank_rel,
        eig_match: t.eig_match,
        residual: t.residual,
    }
}

/// Build a plant from nine row-major matrices with the shapes implied by
/// `dims`: `a` n×n, `b` n×m, `h` n×q, `c` p×n, `d_y` p×m, `g_y` p×q, `e` r×n,
/// `d_z` r×m, `g_z` r×q.
///
/// # Safety
/// Each non-empty matrix pointer must reference `rows * cols` readable
/// doubles; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn geodec_plant_new(
    dims: GeodecDims,
    a: *const f64,
    b: *const f64,
    h: *const f64,
    c: *const f64,
    d_y: *const f64,
    g_y: *const f64,
    e: *const f64,
    d_z: *const f64,
    g_z: *const f64,
    out: *mut *mut GeodecPlant,
) -> GeodecStatus {
    guard(|| {
        let GeodecDims { n, m, q, p, r } = dims;
        let plant = Plant {
            a: matrix(a, n, n, "a")?,
            b: matrix(b, n, m, "b")?,
            h: matrix(h, n, q, "h")?,
            c: matrix(c, p, n, "c")?,
            d_y: matrix(d_y, p, m, "d_y")?,
            g_y: matrix(g_y, p, q, "g_y")?,
            e: matrix(e, r, n, "e")?,
            d_z: matrix(d_z, r, m, "d_z")?,
            g_z: matrix(g_z, r, q, "g_z")?,
        }
        .validated()?;
        write(out, Box::into_raw(Box::new(GeodecPlant { plant })), "out")?;
        Ok(GeodecStatus::Ok)
    })
}

/// Parse a plant file. Tolerances and targets in the file are ignored;
/// tolerances are passed per call.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_plant_from_json(
    json: *const c_char,
    out: *mut *mut GeodecPlant,
) -> GeodecStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let file = PlantFile::parse(text).map_err(|e| invalid(e.to_string()))?;
        let plant = file.plant;
        write(out, Box::into_raw(Box::new(GeodecPlant { plant })), "out")?;
        Ok(GeodecStatus::Ok)
    })
}

/// Canonical plant-file text; free it with [`geodec_string_free`].
///
/// # Safety
/// `plant` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_plant_to_json(
    plant: *const GeodecPlant,
    out: *mut *mut c_char,
) -> GeodecStatus {
    guard(|| {
        let p = deref(plant, "plant")?;
        let text = PlantFile::from_plant(p.plant.clone()).to_canonical();
        write(out, to_c_string(text), "out")?;
        Ok(GeodecStatus::Ok)
    })
}

/// # Safety
/// `plant` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_plant_dims(
    plant: *const GeodecPlant,
    out: *mut GeodecDims,
) -> GeodecStatus {
    guard(|| {
        let p = &deref(plant, "plant")?.plant;
        let dims = GeodecDims {
            n: p.n(),
            m: p.m(),
            q: p.q(),
            p: p.p(),
            r: p.r(),
        };
        write(out, dims, "out")?;
        Ok(GeodecStatus::Ok)
    })
}

/// # Safety
/// `plant` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn geodec_plant_free(plant: *mut GeodecPlant) {
    if !plant.is_null() {
        drop(Box::from_raw(plant));
    }
}

/// Canonical subspace dimensions and the solvability verdict. Returns
/// `Unsolvable` (with `out` filled) when the problem has no solution.
///
/// # Safety
/// `plant` must come from this library; `tol` may be NULL for defaults;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_analyze(
    plant: *const GeodecPlant,
    tol: *const GeodecTolerances,
    out: *mut GeodecAnalysis,
) -> GeodecStatus {
    guard(|| {
        let p = &deref(plant, "plant")?.plant;
        let t = tolerances(tol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ctrl = p.control_quadruple();
        let meas = p.measurement_quadruple();
        let sol = solvability(p, &t, &KSearch::default())?;
        let (dim_v_m, dim_s_m) = if sol.solvable {
            (build_vm(p, &t)?.dim(), build_sm(p, &t)?.dim())
        } else {
            (0, 0)
        };
        let a = GeodecAnalysis {
            solvable: sol.solvable,
            dim_v_star: vstar(&ctrl, &t).dim(),
            dim_s_star: sstar(&meas, &t).dim(),
            dim_r_star: rstar(&ctrl, &t)?.dim(),
            dim_q_star: qstar(&meas, &t)?.dim(),
            dim_v_m,
            dim_s_m,
        };
        write(out, a, "out")?;
        if sol.solvable {
            Ok(GeodecStatus::Ok)
        } else {
            Err(Fail(GeodecStatus::Unsolvable, sol.diagnosis))
        }
    })
}

/// Fixed poles of a canonical triple into `re[..len]`, `im[..len]`, sorted.
/// When `cap` is too small, `len` receives the required size and the call
/// returns `BufferTooSmall`.
///
/// # Safety
/// `re` and `im` must hold `cap` writable doubles (NULL allowed when `cap`
/// is 0); `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_fixed_poles(
    plant: *const GeodecPlant,
    tol: *const GeodecTolerances,
    which: GeodecTriple,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> GeodecStatus {
    guard(|| {
        let p = &deref(plant, "plant")?.plant;
        let t = tolerances(tol)?;
        let tr = triple(p, which, &t)?;
        let poles = fixed_poles_pair(p, &tr.s, &tr.v, &t)?.sorted();
        write(len, poles.len(), "len")?;
        if poles.len() > cap {
            return Err(Fail(
                GeodecStatus::BufferTooSmall,
                format!("{} fixed poles, capacity {cap}", poles.len()),
            ));
        }
        if !poles.is_empty() && (re.is_null() || im.is_null()) {
            return Err(null("re or im"));
        }
        for (i, z) in poles.iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(GeodecStatus::Ok)
    })
}

/// Synthesize a compensator for a canonical triple. `n_poles == 0` uses the
/// default targets; otherwise the list must be closed under conjugation and
/// its length must equal the number of assignable poles.
///
/// # Safety
/// `poles_re` and `poles_im` must hold `n_poles` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_synthesize(
    plant: *const GeodecPlant,
    tol: *const GeodecTolerances,
    which: GeodecTriple,
    poles_re: *const f64,
    poles_im: *const f64,
    n_poles: usize,
    out: *mut *mut GeodecController,
) -> GeodecStatus {
    guard(|| {
        let p = &deref(plant, "plant")?.plant;
        let t = tolerances(tol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let target = if n_poles == 0 {
            None
        } else {
            let (re, im) = (
                matrix(poles_re, 1, n_poles, "poles_re")?,
                matrix(poles_im, 1, n_poles, "poles_im")?,
            );
            let values: Vec<Complex64> =
                (0..n_poles).map(|i| Complex64::new(re[i], im[i])).collect();
            if values
                .iter()
                .any(|z| !(z.re.is_finite() && z.im.is_finite()))
            {
                return Err(invalid("poles must be finite"));
            }
            Some(SpectrumMultiset::new(values, t.eig_match))
        };
        if let Some(s) = &target {
            if !s.is_conjugate_closed() {
                return Err(Error::NotConjugateClosed.into());
            }
        }
        let tr = triple(p, which, &t)?;
        let controller = synthesize(p, &tr, target.as_ref(), &t)?;
        write(
            out,
            Box::into_raw(Box::new(GeodecController { controller })),
            "out",
        )?;
        Ok(GeodecStatus::Ok)
    })
}

/// Parse a controller file for the given plant.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_controller_from_json(
    plant: *const GeodecPlant,
    json: *const c_char,
    out: *mut *mut GeodecController,
) -> GeodecStatus {
    guard(|| {
        let p = &deref(plant, "plant")?.plant;
        let text = c_str(json, "json")?;
        let controller = ControllerFile::parse(text, p)
            .map_err(|e| invalid(e.to_string()))?
            .controller;
        write(
            out,
            Box::into_raw(Box::new(GeodecController { controller })),
            "out",
        )?;
        Ok(GeodecStatus::Ok)
    })
}

/// Canonical controller-file text; free it with [`geodec_string_free`].
///
/// # Safety
/// `ctrl` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_controller_to_json(
    ctrl: *const GeodecController,
    out: *mut *mut c_char,
) -> GeodecStatus {
    guard(|| {
        let c = deref(ctrl, "controller")?;
        let text = ControllerFile {
            controller: c.controller.clone(),
        }
        .to_canonical();
        write(out, to_c_string(text), "out")?;
        Ok(GeodecStatus::Ok)
    })
}

/// Controller state dimension, or 0 for NULL.
///
/// # Safety
/// `ctrl` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn geodec_controller_order(ctrl: *const GeodecController) -> usize {
    ctrl.as_ref().map_or(0, |c| c.controller.order())
}

/// Copy one controller matrix row-major into `out`. `rows` and `cols` always
/// receive the shape; `BufferTooSmall` is returned when `cap < rows * cols`.
///
/// # Safety
/// `out` must hold `cap` writable doubles (NULL allowed when `cap` is 0);
/// `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_controller_matrix(
    ctrl: *const GeodecController,
    which: GeodecControllerMatrix,
    out: *mut f64,
    cap: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> GeodecStatus {
    guard(|| {
        let c = &deref(ctrl, "controller")?.controller;
        let m = match which {
            GeodecControllerMatrix::Ac => &c.a_c,
            GeodecControllerMatrix::Bc => &c.b_c,
            GeodecControllerMatrix::Cc => &c.c_c,
            GeodecControllerMatrix::Dc => &c.d_c,
        };
        write(rows, m.nrows(), "rows")?;
        write(cols, m.ncols(), "cols")?;
        if m.len() > cap {
            return Err(Fail(
                GeodecStatus::BufferTooSmall,
                format!("{} entries, capacity {cap}", m.len()),
            ));
        }
        if !m.is_empty() && out.is_null() {
            return Err(null("out"));
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.add(i * m.ncols() + j).write(m[(i, j)]);
            }
        }
        Ok(GeodecStatus::Ok)
    })
}

/// # Safety
/// `ctrl` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn geodec_controller_free(ctrl: *mut GeodecController) {
    if !ctrl.is_null() {
        drop(Box::from_raw(ctrl));
    }
}

/// Close the loop and check that the disturbance no longer reaches `z`.
/// Returns `VerificationFailed` (with `out` filled) when it does.
///
/// # Safety
/// Handles must come from this library; `tol` may be NULL; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn geodec_verify(
    plant: *const GeodecPlant,
    ctrl: *const GeodecController,
    tol: *const GeodecTolerances,
    out: *mut GeodecVerification,
) -> GeodecStatus {
    guard(|| {
        let p = &deref(plant, "plant")?.plant;
        let c = &deref(ctrl, "controller")?.controller;
        let t = tolerances(tol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = verify_decoupled(&close_loop(p, c, &t)?, &t);
        write(
            out,
            GeodecVerification {
                decoupled: v.decoupled,
                max_markov_residual: v.max_markov_residual,
                feedthrough_residual: v.feedthrough_residual,
            },
            "out",
        )?;
        if v.decoupled {
            Ok(GeodecStatus::Ok)
        } else {
            Err(Fail(
                GeodecStatus::VerificationFailed,
                format!(
                    "not decoupled: markov {:.3e}, feedthrough {:.3e}",
                    v.max_markov_residual, v.feedthrough_residual
                ),
            ))
        }
    })
}

/// # Safety
/// `s` must be a string returned by this library, or NULL.
#[no_mangle]
pub unsafe extern "C" fn geodec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
