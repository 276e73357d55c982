//! C ABI for `wkgeom`.
//!
//! Objects are opaque heap handles created by `wk_*_new`-style functions and
//! released with the matching `wk_*_free`. Every fallible call returns a
//! [`WkStatus`]; on failure a message is available from [`wk_last_error`]
//! until the next failing call on the same thread. Results are written
//! through out-pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use wkgeom::energy::{self, EnergyOptions};
use wkgeom::extremal::{self, ExtremalSolution, SolverConfig};
use wkgeom::polytope::{Facet, MomentumPolytope};
use wkgeom::toricgeom::SymplecticPotential;
use wkgeom::weights::{WeightFamily, WeightFunction};
use wkgeom::{exit, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Weights or potentials outside the admissible set.
    Infeasible = 3,
    /// A numerical check or iteration failed.
    NumericalFailure = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WkWeightFamily {
    /// params: `[value]`
    Constant = 0,
    /// params: `[constant, slope_1, .., slope_d]`
    Affine = 1,
    /// params: `[xi_1, .., xi_d]`
    Exponential = 2,
    /// params: `[xi_1, .., xi_d, c, alpha]`
    Power = 3,
    /// params: monomial coefficients `[c_0, c_1, ..]`, intervals only
    Polynomial = 4,
}

/// Energies of one potential. `mabuchi_rel` is NaN when not computed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkEnergyReport {
    pub h_v: f64,
    pub e_v_ric: f64,
    pub e_w: f64,
    pub c_vw: f64,
    pub mabuchi: f64,
    pub mabuchi_rel: f64,
    pub vol_v: f64,
    pub vol: f64,
}

pub struct WkPolytope(MomentumPolytope);
pub struct WkWeight(WeightFunction);
pub struct WkPotential(SymplecticPotential);
pub struct WkExtremal(ExtremalSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WkStatus {
    match e.exit_code() {
        exit::INFEASIBLE => WkStatus::Infeasible,
        exit::CONFIG => WkStatus::InvalidArgument,
        _ => WkStatus::NumericalFailure,
    }
}

fn fail(status: WkStatus, msg: impl Into<String>) -> WkStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), WkStatus>>(f: F) -> WkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WkStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(WkStatus::Panic, "internal panic"),
    }
}

fn lib<T, E: Into<Error>>(r: Result<T, E>) -> Result<T, WkStatus> {
    r.map_err(|e| {
        let e = e.into();
        let s = status_of(&e);
        fail(s, e.to_string())
    })
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, WkStatus> {
    p.as_ref()
        .ok_or_else(|| fail(WkStatus::NullPointer, "null handle"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, WkStatus> {
    p.as_mut()
        .ok_or_else(|| fail(WkStatus::NullPointer, "null output pointer"))
}

unsafe fn array<'a, T>(p: *const T, n: usize) -> Result<&'a [T], WkStatus> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(fail(WkStatus::NullPointer, "null array"))
    } else {
        Ok(slice::from_raw_parts(p, n))
    }
}

fn boxed<T>(x: T) -> *mut T {
    Box::into_raw(Box::new(x))
}

/// Message of the last failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn wk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wk_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(s) => s,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Creates the interval `[lo, hi]`.
///
/// # Safety
/// `out_p` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_polytope_interval(
    lo: f64,
    hi: f64,
    out_p: *mut *mut WkPolytope,
) -> WkStatus {
    guard(|| {
        let slot = out(out_p)?;
        let p = lib(MomentumPolytope::interval(lo, hi))?;
        *slot = boxed(WkPolytope(p));
        Ok(())
    })
}

/// Creates the polytope `{x : <n_i, x> + offset_i >= 0}` from `count` facets.
/// `normals` holds `count * dim` integers, facet by facet.
///
/// # Safety
/// `normals` must point to `count * dim` values, `offsets` to `count`
/// values, and `out_p` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_polytope_from_facets(
    normals: *const i64,
    offsets: *const f64,
    count: usize,
    dim: usize,
    out_p: *mut *mut WkPolytope,
) -> WkStatus {
    guard(|| {
        let slot = out(out_p)?;
        if dim == 0 {
            return Err(fail(
                WkStatus::InvalidArgument,
                "dimension must be positive",
            ));
        }
        let n = array(normals, count * dim)?;
        let c = array(offsets, count)?;
        let facets = n
            .chunks(dim)
            .zip(c)
            .map(|(n, &c)| Facet::new(n.to_vec(), c))
            .collect();
        *slot = boxed(WkPolytope(lib(MomentumPolytope::build(facets))?));
        Ok(())
    })
}

/// # Safety
/// `p` and `out_v` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wk_polytope_volume(p: *const WkPolytope, out_v: *mut f64) -> WkStatus {
    guard(|| {
        let p = deref(p)?;
        *out(out_v)? = p.0.volume();
        Ok(())
    })
}

/// # Safety
/// `p` and `out_d` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wk_polytope_dim(p: *const WkPolytope, out_d: *mut usize) -> WkStatus {
    guard(|| {
        let p = deref(p)?;
        *out(out_d)? = p.0.dim();
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wk_polytope_free(p: *mut WkPolytope) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Creates a weight of `family` times `scale` on `p`, which must be positive
/// on `p`. See [`WkWeightFamily`] for the parameter layout.
///
/// # Safety
/// `p` must be valid, `params` must point to `nparams` values and `out_w`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_weight_new(
    p: *const WkPolytope,
    family: WkWeightFamily,
    params: *const f64,
    nparams: usize,
    scale: f64,
    out_w: *mut *mut WkWeight,
) -> WkStatus {
    guard(|| {
        let p = deref(p)?;
        let slot = out(out_w)?;
        let x = array(params, nparams)?;
        let d = p.0.dim();
        let need = match family {
            WkWeightFamily::Constant => 1,
            WkWeightFamily::Affine => d + 1,
            WkWeightFamily::Exponential => d,
            WkWeightFamily::Power => d + 2,
            WkWeightFamily::Polynomial => nparams.max(1),
        };
        if nparams != need {
            return Err(fail(
                WkStatus::InvalidArgument,
                format!("{family:?} weight needs {need} parameters, got {nparams}"),
            ));
        }
        let fam = match family {
            WkWeightFamily::Constant => WeightFamily::Constant(x[0]),
            WkWeightFamily::Affine => WeightFamily::Affine {
                constant: x[0],
                slope: x[1..].to_vec(),
            },
            WkWeightFamily::Exponential => WeightFamily::Exponential { xi: x.to_vec() },
            WkWeightFamily::Power => WeightFamily::Power {
                xi: x[..d].to_vec(),
                c: x[d],
                alpha: x[d + 1],
            },
            WkWeightFamily::Polynomial => WeightFamily::Polynomial(x.to_vec()),
        };
        *slot = boxed(WkWeight(lib(WeightFunction::new(fam, scale, &p.0, true))?));
        Ok(())
    })
}

/// Value of `w` at the point `x` of length `dim`.
///
/// # Safety
/// `w` must be valid, `x` must point to `dim` values, `out_v` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_weight_value(
    w: *const WkWeight,
    x: *const f64,
    dim: usize,
    out_v: *mut f64,
) -> WkStatus {
    guard(|| {
        let w = deref(w)?;
        if dim != w.0.dim() {
            return Err(fail(WkStatus::InvalidArgument, "point dimension mismatch"));
        }
        *out(out_v)? = w.0.value(array(x, dim)?);
        Ok(())
    })
}

/// # Safety
/// `w` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wk_weight_free(w: *mut WkWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Symplectic potential `u_G + f` on the interval `p`, where `f` has the
/// Chebyshev coefficients `coeffs` on that interval.
///
/// # Safety
/// `p` must be valid, `coeffs` must point to `n` values and `out_u` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_potential_new(
    p: *const WkPolytope,
    coeffs: *const f64,
    n: usize,
    out_u: *mut *mut WkPotential,
) -> WkStatus {
    guard(|| {
        let p = deref(p)?;
        let slot = out(out_u)?;
        let c = array(coeffs, n)?.to_vec();
        *slot = boxed(WkPotential(lib(SymplecticPotential::from_coeffs(&p.0, c))?));
        Ok(())
    })
}

/// # Safety
/// `u` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wk_potential_free(u: *mut WkPotential) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// The constant `c_{v,w}`.
///
/// # Safety
/// All handles must be valid and `out_c` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_c_constant(
    p: *const WkPolytope,
    v: *const WkWeight,
    w: *const WkWeight,
    out_c: *mut f64,
) -> WkStatus {
    guard(|| {
        let (p, v, w) = (deref(p)?, deref(v)?, deref(w)?);
        *out(out_c)? = energy::c_constant(&p.0, &v.0, &w.0);
        Ok(())
    })
}

/// The extremal affine function `constant + <slope, x>`; `slope` receives
/// `dim(p)` values.
///
/// # Safety
/// All handles must be valid, `constant` valid for writes and `slope` valid
/// for `dim(p)` writes.
#[no_mangle]
pub unsafe extern "C" fn wk_extremal_affine(
    p: *const WkPolytope,
    v: *const WkWeight,
    w: *const WkWeight,
    constant: *mut f64,
    slope: *mut f64,
) -> WkStatus {
    guard(|| {
        let (p, v, w) = (deref(p)?, deref(v)?, deref(w)?);
        let c = out(constant)?;
        if slope.is_null() {
            return Err(fail(WkStatus::NullPointer, "null output pointer"));
        }
        let l = lib(energy::extremal_affine(&p.0, &v.0, &w.0))?;
        *c = l.constant;
        ptr::copy_nonoverlapping(l.slope.as_ptr(), slope, l.slope.len());
        Ok(())
    })
}

/// Weighted Mabuchi energy of `u` and its pieces, with default quadrature.
/// The relative energy is included when `relative` is nonzero.
///
/// # Safety
/// All handles must be valid and `report` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_mabuchi_energy(
    p: *const WkPolytope,
    u: *const WkPotential,
    v: *const WkWeight,
    w: *const WkWeight,
    relative: i32,
    report: *mut WkEnergyReport,
) -> WkStatus {
    guard(|| {
        let (p, u, v, w) = (deref(p)?, deref(u)?, deref(v)?, deref(w)?);
        let slot = out(report)?;
        let r = lib(energy::mabuchi_energy(
            &p.0,
            &u.0,
            &v.0,
            &w.0,
            relative != 0,
            &EnergyOptions::default(),
        ))?;
        *slot = WkEnergyReport {
            h_v: r.h_v,
            e_v_ric: r.e_v_ric,
            e_w: r.e_w,
            c_vw: r.c_vw,
            mabuchi: r.mabuchi,
            mabuchi_rel: r.mabuchi_rel.unwrap_or(f64::NAN),
            vol_v: r.vol_v,
            vol: r.vol,
        };
        Ok(())
    })
}

/// Geodesic distance between two potentials on the same interval.
///
/// # Safety
/// Both handles must be valid and `out_d` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_mabuchi_distance(
    u0: *const WkPotential,
    u1: *const WkPotential,
    out_d: *mut f64,
) -> WkStatus {
    guard(|| {
        let (u0, u1) = (deref(u0)?, deref(u1)?);
        if u0.0.interval() != u1.0.interval() {
            return Err(fail(
                WkStatus::InvalidArgument,
                "potentials live on different intervals",
            ));
        }
        *out(out_d)? = energy::mabuchi_distance(&u0.0, &u1.0, &EnergyOptions::default());
        Ok(())
    })
}

/// Solves for the weighted extremal profile on the interval `p`.
///
/// # Safety
/// All handles must be valid and `out_e` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_extremal_solve(
    p: *const WkPolytope,
    v: *const WkWeight,
    w: *const WkWeight,
    out_e: *mut *mut WkExtremal,
) -> WkStatus {
    guard(|| {
        let (p, v, w) = (deref(p)?, deref(v)?, deref(w)?);
        let slot = out(out_e)?;
        let s = lib(extremal::solve_extremal_profile(
            &p.0,
            &v.0,
            &w.0,
            &SolverConfig::default(),
        ))?;
        *slot = boxed(WkExtremal(s));
        Ok(())
    })
}

/// The solved profile `H` at `mu`.
///
/// # Safety
/// `e` must be valid and `out_h` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_extremal_profile(
    e: *const WkExtremal,
    mu: f64,
    out_h: *mut f64,
) -> WkStatus {
    guard(|| {
        let e = deref(e)?;
        let (a, b) = e.0.profile.interval();
        if !(a..=b).contains(&mu) {
            return Err(fail(
                WkStatus::InvalidArgument,
                format!("mu = {mu} outside [{a}, {b}]"),
            ));
        }
        *out(out_h)? = e.0.profile.h(mu);
        Ok(())
    })
}

/// `ℓ = a + b μ` and the sup residual of the extremal equation.
///
/// # Safety
/// `e` must be valid; the three outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wk_extremal_summary(
    e: *const WkExtremal,
    ell_a: *mut f64,
    ell_b: *mut f64,
    residual: *mut f64,
) -> WkStatus {
    guard(|| {
        let e = deref(e)?;
        let (a, b, r) = (out(ell_a)?, out(ell_b)?, out(residual)?);
        *a = e.0.ell.constant;
        *b = e.0.ell.slope[0];
        *r = e.0.residual_sup;
        Ok(())
    })
}

/// # Safety
/// `e` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wk_extremal_free(e: *mut WkExtremal) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
