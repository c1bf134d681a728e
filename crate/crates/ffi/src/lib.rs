//! C ABI over `gridform`.
//!
//! Designs and trajectories are opaque heap handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`GfStatus`]; on failure [`gf_last_error_message`] describes the error for
//! the calling thread. Matrices are exchanged row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gridform::design::{damping_from_po, po_from_damping, spec_to_targets};
use gridform::metrics::step_metrics;
use gridform::placement::place_poles_with;
use gridform::powerflow::{linearize, solve_operating_point};
use gridform::sim::{simulate_nonlinear, Signal};
use gridform::statespace::{build_state_space, controllability, DEFAULT_RANK_TOL};
use gridform::{
    Error, FeedbackGain, LinearizedGains, OperatingPoint, ParameterMatrix, PerformanceSpec, PlantMatrices,
    SetpointEvent, SetpointTarget, SimConfig, SystemParams, Trajectory,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoEquilibrium = 3,
    Uncontrollable = 4,
    PlacementFailed = 5,
    NumericalBlowup = 6,
    NotSettled = 7,
    Panic = 8,
}

impl From<&Error> for GfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => GfStatus::InvalidArgument,
            Error::NoEquilibrium(_) | Error::DegenerateDroop { .. } => GfStatus::NoEquilibrium,
            Error::Uncontrollable { .. } => GfStatus::Uncontrollable,
            Error::PlacementSingular { .. } => GfStatus::PlacementFailed,
            Error::NumericalBlowup { .. } => GfStatus::NumericalBlowup,
            Error::NotSettled { .. } => GfStatus::NotSettled,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfPlacement {
    DecoupledVoltage = 0,
    Default = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfSetpoint {
    PSet = 0,
    QSet = 1,
    OmegaSet = 2,
    VSet = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfSignal {
    Delta = 0,
    Omega = 1,
    V = 2,
    P = 3,
    Q = 4,
    E1 = 5,
    E2 = 6,
}

/// Per-unit system data; `omega_b` in rad/s.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfSystemParams {
    pub omega_b: f64,
    pub omega_g: f64,
    pub v_g: f64,
    pub r_g: f64,
    pub x_g: f64,
    pub d_p: f64,
    pub d_q: f64,
    pub omega_set: f64,
    pub p_set: f64,
    pub q_set: f64,
    pub v_set: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfSample {
    pub t: f64,
    pub delta: f64,
    pub omega: f64,
    pub v: f64,
    pub p: f64,
    pub q: f64,
    pub e1: f64,
    pub e2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfStepMetrics {
    pub overshoot: f64,
    pub settling_time: f64,
    pub peak_time: f64,
    pub final_value: f64,
}

/// A completed design for one performance specification.
pub struct GfDesign {
    params: SystemParams,
    op: OperatingPoint,
    gains: LinearizedGains,
    plant: PlantMatrices,
    gain: FeedbackGain,
}

pub struct GfTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|b| *b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: GfStatus, msg: impl Into<String>) -> GfStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> GfStatus {
    fail(GfStatus::from(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> GfStatus) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(GfStatus::Panic, "internal panic"),
    }
}

impl From<GfSystemParams> for SystemParams {
    fn from(p: GfSystemParams) -> Self {
        SystemParams {
            omega_b: p.omega_b,
            omega_g: p.omega_g,
            v_g: p.v_g,
            r_g: p.r_g,
            x_g: p.x_g,
            d_p: p.d_p,
            d_q: p.d_q,
            omega_set: p.omega_set,
            p_set: p.p_set,
            q_set: p.q_set,
            v_set: p.v_set,
        }
    }
}

impl From<SystemParams> for GfSystemParams {
    fn from(p: SystemParams) -> Self {
        GfSystemParams {
            omega_b: p.omega_b,
            omega_g: p.omega_g,
            v_g: p.v_g,
            r_g: p.r_g,
            x_g: p.x_g,
            d_p: p.d_p,
            d_q: p.d_q,
            omega_set: p.omega_set,
            p_set: p.p_set,
            q_set: p.q_set,
            v_set: p.v_set,
        }
    }
}

impl From<GfSetpoint> for SetpointTarget {
    fn from(s: GfSetpoint) -> Self {
        match s {
            GfSetpoint::PSet => SetpointTarget::PSet,
            GfSetpoint::QSet => SetpointTarget::QSet,
            GfSetpoint::OmegaSet => SetpointTarget::OmegaSet,
            GfSetpoint::VSet => SetpointTarget::VSet,
        }
    }
}

impl From<GfSignal> for Signal {
    fn from(s: GfSignal) -> Self {
        match s {
            GfSignal::Delta => Signal::Delta,
            GfSignal::Omega => Signal::Omega,
            GfSignal::V => Signal::V,
            GfSignal::P => Signal::P,
            GfSignal::Q => Signal::Q,
            GfSignal::E1 => Signal::E1,
            GfSignal::E2 => Signal::E2,
        }
    }
}

/// Benchmark converter parameters.
#[no_mangle]
pub extern "C" fn gf_params_benchmark() -> GfSystemParams {
    SystemParams::benchmark().into()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

fn build_design(params: SystemParams, spec: PerformanceSpec, choice: ParameterMatrix) -> Result<GfDesign, Error> {
    params.validate()?;
    spec.validate()?;
    let op = solve_operating_point(&params)?;
    let gains = linearize(&params, &op)?;
    let plant = build_state_space(&params, &gains);
    let report = controllability(&plant, DEFAULT_RANK_TOL)?;
    if !report.controllable {
        return Err(Error::Uncontrollable { rank: report.rank });
    }
    let targets = spec_to_targets(&spec)?;
    let gain = place_poles_with(&plant, &targets, &choice)?;
    Ok(GfDesign { params, op, gains, plant, gain })
}

/// Runs the full design for damping `xi`, settling time `ts` (s) and third
/// pole `-a` (1/s). On success `*out` owns a new handle.
///
/// # Safety
/// `params` must be NULL or point to a valid `GfSystemParams`; `out` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn gf_design_new(
    params: *const GfSystemParams,
    xi: f64,
    ts: f64,
    a: f64,
    placement: GfPlacement,
    out: *mut *mut GfDesign,
) -> GfStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(GfStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let choice = match placement {
            GfPlacement::DecoupledVoltage => ParameterMatrix::DecoupledVoltage,
            GfPlacement::Default => ParameterMatrix::default(),
        };
        match build_design((*params).into(), PerformanceSpec { xi, ts, a }, choice) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(d));
                GfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `design` must be NULL or a handle from [`gf_design_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_design_free(design: *mut GfDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

unsafe fn with_design(design: *const GfDesign, f: impl FnOnce(&GfDesign) -> GfStatus) -> GfStatus {
    guard(|| match design.as_ref() {
        Some(d) => f(d),
        None => fail(GfStatus::NullPointer, "null design handle"),
    })
}

unsafe fn write_slice(dst: *mut f64, src: &[f64]) -> GfStatus {
    if dst.is_null() {
        return fail(GfStatus::NullPointer, "null output buffer");
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    GfStatus::Ok
}

/// Writes the equilibrium power angle (rad) and voltage (p.u.).
///
/// # Safety
/// `design` must be a live handle; `delta0` and `v0` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_design_operating_point(design: *const GfDesign, delta0: *mut f64, v0: *mut f64) -> GfStatus {
    with_design(design, |d| {
        if delta0.is_null() || v0.is_null() {
            return fail(GfStatus::NullPointer, "null output pointer");
        }
        *delta0 = d.op.delta0;
        *v0 = d.op.v0;
        GfStatus::Ok
    })
}

/// Writes `[k_pdelta, k_pv, k_qdelta, k_qv]`.
///
/// # Safety
/// `out` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_design_linearized_gains(design: *const GfDesign, out: *mut f64) -> GfStatus {
    with_design(design, |d| write_slice(out, &d.gains.as_array()))
}

/// Writes `A` (3x3) and `B` (3x2), row-major.
///
/// # Safety
/// `a` must hold 9 doubles and `b` 6.
#[no_mangle]
pub unsafe extern "C" fn gf_design_state_space(design: *const GfDesign, a: *mut f64, b: *mut f64) -> GfStatus {
    with_design(design, |d| {
        let am: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|ij| d.plant.a[ij]).collect();
        let bm: Vec<f64> = (0..3).flat_map(|i| (0..2).map(move |j| (i, j))).map(|ij| d.plant.b[ij]).collect();
        match write_slice(a, &am) {
            GfStatus::Ok => write_slice(b, &bm),
            s => s,
        }
    })
}

/// Writes the feedback gain `K` (2x3), row-major.
///
/// # Safety
/// `out` must hold 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_design_gain(design: *const GfDesign, out: *mut f64) -> GfStatus {
    with_design(design, |d| {
        let k: Vec<f64> = (0..2).flat_map(|i| (0..3).map(move |j| (i, j))).map(|ij| d.gain.k[ij]).collect();
        write_slice(out, &k)
    })
}

/// Writes the closed-loop eigenvalues, sorted by real then imaginary part.
///
/// # Safety
/// `re` and `im` must each hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_design_eigenvalues(design: *const GfDesign, re: *mut f64, im: *mut f64) -> GfStatus {
    with_design(design, |d| {
        let eigs = d.gain.achieved_eigs;
        match write_slice(re, &eigs.map(|z| z.re)) {
            GfStatus::Ok => write_slice(im, &eigs.map(|z| z.im)),
            s => s,
        }
    })
}

/// Simulates the nonlinear closed loop with one setpoint step of `target` to
/// `value` at `event_time`. On success `*out` owns a new trajectory.
///
/// # Safety
/// `design` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_design_simulate_step(
    design: *const GfDesign,
    target: GfSetpoint,
    event_time: f64,
    value: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
    out: *mut *mut GfTrajectory,
) -> GfStatus {
    with_design(design, |d| {
        if out.is_null() {
            return fail(GfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let cfg = SimConfig { t_end, dt, record_every };
        let ev = SetpointEvent { time: event_time, target: target.into(), value };
        match simulate_nonlinear(&d.params, &d.gain.k, &[ev], &cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GfTrajectory { inner }));
                GfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `traj` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_free(traj: *mut GfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recorded samples; 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_len(traj: *const GfTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_sample(traj: *const GfTrajectory, index: usize, out: *mut GfSample) -> GfStatus {
    guard(|| {
        let Some(t) = traj.as_ref() else {
            return fail(GfStatus::NullPointer, "null trajectory handle");
        };
        if out.is_null() {
            return fail(GfStatus::NullPointer, "null output pointer");
        }
        let Some(s) = t.inner.samples.get(index) else {
            return fail(
                GfStatus::InvalidArgument,
                format!("sample {index} out of range (len {})", t.inner.len()),
            );
        };
        *out = GfSample { t: s.t, delta: s.delta, omega: s.omega, v: s.v, p: s.p, q: s.q, e1: s.e1, e2: s.e2 };
        GfStatus::Ok
    })
}

/// Overshoot, settling and peak time of `signal` for a step at `event_time`,
/// with settling band `band` (fraction of the step).
///
/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_trajectory_step_metrics(
    traj: *const GfTrajectory,
    signal: GfSignal,
    event_time: f64,
    band: f64,
    out: *mut GfStepMetrics,
) -> GfStatus {
    guard(|| {
        let Some(t) = traj.as_ref() else {
            return fail(GfStatus::NullPointer, "null trajectory handle");
        };
        if out.is_null() {
            return fail(GfStatus::NullPointer, "null output pointer");
        }
        match step_metrics(&t.inner, signal.into(), event_time, band) {
            Ok(m) => {
                *out = GfStepMetrics {
                    overshoot: m.overshoot,
                    settling_time: m.settling_time,
                    peak_time: m.peak_time,
                    final_value: m.final_value,
                };
                GfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Percent overshoot of a second-order pair with damping `xi` in (0, 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_po_from_damping(xi: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return fail(GfStatus::NullPointer, "null output pointer");
        }
        match po_from_damping(xi) {
            Ok(v) => {
                *out = v;
                GfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Damping ratio giving percent overshoot `po` in (0, 100).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_damping_from_po(po: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return fail(GfStatus::NullPointer, "null output pointer");
        }
        match damping_from_po(po) {
            Ok(v) => {
                *out = v;
                GfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
