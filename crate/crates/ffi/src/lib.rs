//! C interface to `weyllab`.
//!
//! Objects cross the boundary as opaque handles. A handle made by a `*_new`
//! function or returned through an out-parameter belongs to the caller and is
//! released with the matching `*_free`. Every fallible call returns a
//! [`WeylStatus`]; after a failure [`weyl_last_error`] describes it on the
//! calling thread. Out-parameters are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use weyllab::error::WeylError;
use weyllab::herglotz::{stieltjes, DiscreteMeasure, ProjectiveValue};
use weyllab::jacobi::{coefficient_stripping, m_function, spectral_measure, JacobiOperator, StrippingRoute};
use weyllab::schrodinger::{
    interval_eigenvalues, weyl_m, BoundaryCondition, EigenOptions, Interpolation, OdeOptions, Potential, Tail,
    WeylMode,
};

pub const WEYL_ROUTE_OP_RECURSION: u32 = 0;
pub const WEYL_ROUTE_CONTINUED_FRACTION: u32 = 1;

pub const WEYL_INTERP_LINEAR: u32 = 0;
pub const WEYL_INTERP_CUBIC: u32 = 1;

pub const WEYL_TAIL_COMPACT: u32 = 0;
pub const WEYL_TAIL_PERIODIC: u32 = 1;
pub const WEYL_TAIL_CONSTANT: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeylStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument values, sizes or enumeration codes.
    InvalidArgument = 2,
    /// The input lies outside the method's domain.
    Domain = 3,
    /// The computation itself failed (integration, conditioning, ...).
    Numerical = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylComplex {
    pub re: f64,
    pub im: f64,
}

impl From<WeylComplex> for Complex64 {
    fn from(z: WeylComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for WeylComplex {
    fn from(z: Complex64) -> Self {
        WeylComplex { re: z.re, im: z.im }
    }
}

/// Positive discrete measure `Σ w_k δ_{λ_k}`.
pub struct WeylMeasure(DiscreteMeasure);

/// Finite Jacobi operator.
pub struct WeylJacobi(JacobiOperator);

/// Sampled Schrödinger potential.
pub struct WeylPotential(Potential);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: WeylStatus,
    message: String,
}

impl Failure {
    fn new(status: WeylStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(name: &str) -> Self {
        Failure::new(WeylStatus::NullPointer, format!("`{name}` is null"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure::new(WeylStatus::InvalidArgument, message)
    }
}

impl From<WeylError> for Failure {
    fn from(e: WeylError) -> Self {
        let status = match &e {
            WeylError::Config(_) | WeylError::Parse { .. } | WeylError::Io { .. } => WeylStatus::InvalidArgument,
            WeylError::Domain(_) | WeylError::RankDeficient { .. } => WeylStatus::Domain,
            _ => WeylStatus::Numerical,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WeylStatus {
    let failure = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return WeylStatus::Ok,
        Ok(Err(e)) => e,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Failure::new(WeylStatus::Panic, format!("panic: {msg}"))
        }
    };
    set_last_error(failure.message);
    failure.status
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(name))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::null(name));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(name));
    }
    out.write(value);
    Ok(())
}

fn route(code: u32) -> Result<StrippingRoute, Failure> {
    match code {
        WEYL_ROUTE_OP_RECURSION => Ok(StrippingRoute::OpRecursion),
        WEYL_ROUTE_CONTINUED_FRACTION => Ok(StrippingRoute::ContinuedFraction),
        c => Err(Failure::invalid(format!("unknown stripping route {c}"))),
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn weyl_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Message of the last failure on this thread, or NULL if there was none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn weyl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `positions` and `weights` must point to `len` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_measure_new(
    positions: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut *mut WeylMeasure,
) -> WeylStatus {
    guard(|| {
        let p = input(positions, len, "positions")?;
        let w = input(weights, len, "weights")?;
        let mu = DiscreteMeasure::new(p.iter().copied().zip(w.iter().copied()))?;
        put(out, Box::into_raw(Box::new(WeylMeasure(mu))), "out")
    })
}

/// # Safety
/// `measure` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn weyl_measure_free(measure: *mut WeylMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Number of atoms after merging coincident positions; 0 for NULL.
///
/// # Safety
/// `measure` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn weyl_measure_len(measure: *const WeylMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.0.len())
}

/// Copy the atoms, sorted by position, into arrays of `capacity` doubles.
///
/// # Safety
/// `measure` must be a live handle; both arrays must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn weyl_measure_atoms(
    measure: *const WeylMeasure,
    positions: *mut f64,
    weights: *mut f64,
    capacity: usize,
) -> WeylStatus {
    guard(|| {
        let mu = &handle(measure, "measure")?.0;
        if capacity < mu.len() {
            return Err(Failure::invalid(format!("capacity {capacity} below {} atoms", mu.len())));
        }
        let p = output(positions, mu.len(), "positions")?;
        let w = output(weights, mu.len(), "weights")?;
        p.copy_from_slice(mu.positions());
        w.copy_from_slice(mu.weights());
        Ok(())
    })
}

/// `∫ dμ(λ) / (λ - z)`.
///
/// # Safety
/// `measure` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_measure_stieltjes(
    measure: *const WeylMeasure,
    z: WeylComplex,
    out: *mut WeylComplex,
) -> WeylStatus {
    guard(|| {
        let f = stieltjes(&handle(measure, "measure")?.0, z.into())?;
        put(out, f.into(), "out")
    })
}

/// Recover a Jacobi operator of size `depth` from a measure (normalised to
/// unit mass first). `route` is one of the `WEYL_ROUTE_*` codes.
///
/// # Safety
/// `measure` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_measure_strip(
    measure: *const WeylMeasure,
    route_code: u32,
    depth: usize,
    out: *mut *mut WeylJacobi,
) -> WeylStatus {
    guard(|| {
        let mu = &handle(measure, "measure")?.0;
        let j = coefficient_stripping(mu, route(route_code)?, depth)?;
        put(out, Box::into_raw(Box::new(WeylJacobi(j))), "out")
    })
}

/// Operator with diagonal `b[0..n]` and off-diagonal `a[0..n-1]` (`a` may be
/// NULL when `n == 1`).
///
/// # Safety
/// `b` must hold `n` doubles, `a` `n - 1`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_jacobi_new(
    b: *const f64,
    a: *const f64,
    n: usize,
    out: *mut *mut WeylJacobi,
) -> WeylStatus {
    guard(|| {
        if n == 0 {
            return Err(Failure::invalid("operator size must be at least 1"));
        }
        let b = input(b, n, "b")?.to_vec();
        let a = input(a, n - 1, "a")?.to_vec();
        let j = JacobiOperator::new(b, a)?;
        put(out, Box::into_raw(Box::new(WeylJacobi(j))), "out")
    })
}

/// # Safety
/// `op` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn weyl_jacobi_free(op: *mut WeylJacobi) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Size of the operator; 0 for NULL.
///
/// # Safety
/// `op` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn weyl_jacobi_len(op: *const WeylJacobi) -> usize {
    op.as_ref().map_or(0, |j| j.0.len())
}

/// Copy `b` (`n` entries) and `a` (`n - 1` entries) out.
///
/// # Safety
/// `op` must be a live handle; `b` must hold `n` doubles and `a` `n - 1`.
#[no_mangle]
pub unsafe extern "C" fn weyl_jacobi_coefficients(op: *const WeylJacobi, b: *mut f64, a: *mut f64) -> WeylStatus {
    guard(|| {
        let j = &handle(op, "op")?.0;
        output(b, j.b().len(), "b")?.copy_from_slice(j.b());
        output(a, j.a().len(), "a")?.copy_from_slice(j.a());
        Ok(())
    })
}

/// Spectral measure of `δ₁`.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_jacobi_spectral_measure(op: *const WeylJacobi, out: *mut *mut WeylMeasure) -> WeylStatus {
    guard(|| {
        let mu = spectral_measure(&handle(op, "op")?.0)?;
        put(out, Box::into_raw(Box::new(WeylMeasure(mu))), "out")
    })
}

/// `m(z) = ⟨δ₁, (J_s - z)⁻¹ δ₁⟩` for the operator with its first `strip`
/// rows and columns removed.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_jacobi_m_function(
    op: *const WeylJacobi,
    z: WeylComplex,
    strip: usize,
    out: *mut WeylComplex,
) -> WeylStatus {
    guard(|| {
        let m = m_function(&handle(op, "op")?.0, z.into(), strip)?;
        put(out, m.into(), "out")
    })
}

/// Potential sampled at `n` equispaced points of `[x0, x1]`. `interpolation`
/// is a `WEYL_INTERP_*` code, `tail` a `WEYL_TAIL_*` code; `tail_value` is
/// used by `WEYL_TAIL_CONSTANT` only. A periodic tail takes `x1 - x0` as the
/// period.
///
/// # Safety
/// `samples` must hold `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_potential_new(
    x0: f64,
    x1: f64,
    samples: *const f64,
    n: usize,
    interpolation: u32,
    tail: u32,
    tail_value: f64,
    out: *mut *mut WeylPotential,
) -> WeylStatus {
    guard(|| {
        let samples = input(samples, n, "samples")?.to_vec();
        let interpolation = match interpolation {
            WEYL_INTERP_LINEAR => Interpolation::Linear,
            WEYL_INTERP_CUBIC => Interpolation::Cubic,
            c => return Err(Failure::invalid(format!("unknown interpolation {c}"))),
        };
        let tail = match tail {
            WEYL_TAIL_COMPACT => Tail::CompactSupport,
            WEYL_TAIL_PERIODIC => Tail::Periodic { period: x1 - x0 },
            WEYL_TAIL_CONSTANT => Tail::Constant { value: tail_value },
            c => return Err(Failure::invalid(format!("unknown tail {c}"))),
        };
        let p = Potential::new(x0, x1, samples, interpolation, tail)?;
        put(out, Box::into_raw(Box::new(WeylPotential(p))), "out")
    })
}

/// # Safety
/// `pot` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn weyl_potential_free(pot: *mut WeylPotential) {
    if !pot.is_null() {
        drop(Box::from_raw(pot));
    }
}

/// Weyl m-function `u₊'(x)/u₊(x)` at `z` (Riccati integration, default
/// tolerances). When `u₊(x) = 0` the value is a pole: `*is_pole` is set and
/// `*out` holds NaNs.
///
/// # Safety
/// `pot` must be a live handle; `out` and `is_pole` must be writable.
#[no_mangle]
pub unsafe extern "C" fn weyl_potential_m(
    pot: *const WeylPotential,
    z: WeylComplex,
    x: f64,
    out: *mut WeylComplex,
    is_pole: *mut bool,
) -> WeylStatus {
    guard(|| {
        let w = weyl_m(&handle(pot, "pot")?.0, z.into(), x, WeylMode::Riccati, &OdeOptions::default())?;
        let (value, pole) = match w.value {
            ProjectiveValue::Finite(m) => (m.into(), false),
            ProjectiveValue::Pole => (WeylComplex { re: f64::NAN, im: f64::NAN }, true),
        };
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        put(is_pole, pole, "is_pole")?;
        put(out, value, "out")
    })
}

/// Lowest `count` eigenvalues on `[lo, hi]` with boundary conditions
/// `u cos θ + u' sin θ = 0` at each end (`θ = 0` Dirichlet, `π/2` Neumann).
///
/// # Safety
/// `pot` must be a live handle and `out` must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn weyl_potential_eigenvalues(
    pot: *const WeylPotential,
    lo: f64,
    hi: f64,
    theta_left: f64,
    theta_right: f64,
    count: usize,
    out: *mut f64,
) -> WeylStatus {
    guard(|| {
        let p = &handle(pot, "pot")?.0;
        let dst = output(out, count, "out")?;
        let ev = interval_eigenvalues(
            p,
            (lo, hi),
            BoundaryCondition::Theta(theta_left),
            BoundaryCondition::Theta(theta_right),
            count,
            &EigenOptions::default(),
        )?;
        dst.copy_from_slice(&ev);
        Ok(())
    })
}
