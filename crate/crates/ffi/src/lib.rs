//! C ABI over the `boxball` library.
//!
//! Handles are opaque pointers created by `bb_*_new` and released by the
//! matching `bb_*_free`. Every fallible call returns a [`BbStatus`]; on
//! failure `bb_last_error()` describes the problem until the next failing call
//! on the same thread. Capacities are passed as `uint32_t` with `0` meaning
//! unbounded, and `epsilon` as the exact fraction `eps_num / eps_den`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use boxball::bbs::Sbbs;
use boxball::matrix::RationalMatrix;
use boxball::params::q_to_f64;
use boxball::partition::{build_partition, pushtasep_partition, BoundaryPartition};
use boxball::pushtasep::{PushTasep, PushTasepState};
use boxball::reflection::{reflection_matrix, weakly_completely_s};
use boxball::{BallConfig, Capacity, DynamicsParams, Epsilon, Error, RngStream};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Dimension = 4,
    BufferTooSmall = 5,
    Io = 6,
    Panic = 99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BbStatus {
    match e {
        Error::InvalidConfig(_) | Error::InteriorPoint(_) => BbStatus::InvalidConfig,
        Error::Dimension(_) | Error::DimensionTooLarge { .. } => BbStatus::Dimension,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => BbStatus::Io,
        _ => BbStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), BbStatus>>(f: F) -> BbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside boxball".into());
            BbStatus::Panic
        }
    }
}

fn fail(e: Error) -> BbStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> BbStatus {
    set_error(format!("{what} is null"));
    BbStatus::NullPointer
}

fn capacity(c: u32) -> Capacity {
    if c == 0 {
        Capacity::Unbounded
    } else {
        Capacity::Finite(c)
    }
}

fn epsilon(num: i64, den: i64) -> Result<Epsilon, BbStatus> {
    Epsilon::from_ratio(num, den).map_err(fail)
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], BbStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize, needed: *mut usize) -> Result<(), BbStatus> {
    if !needed.is_null() {
        *needed = src.len();
    }
    if len < src.len() {
        set_error(format!("buffer holds {len}, need {}", src.len()));
        return Err(BbStatus::BufferTooSmall);
    }
    if !src.is_empty() {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

unsafe fn handle<'a, T>(p: *mut T) -> Result<&'a mut T, BbStatus> {
    p.as_mut().ok_or_else(|| null("handle"))
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opaque SBBS simulator.
pub struct BbSbbs {
    sim: Sbbs,
    d: usize,
    steps: u64,
}

/// Creates a simulator from `d` strictly increasing positions.
///
/// # Safety
/// `positions` must point to `d` values and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn bb_sbbs_new(
    positions: *const i64,
    d: usize,
    eps_num: i64,
    eps_den: i64,
    cap: u32,
    seed: u64,
    stream: u64,
    out: *mut *mut BbSbbs,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pos = slice(positions, d, "positions")?.to_vec();
        let init = BallConfig::new(pos).map_err(fail)?;
        let params = DynamicsParams::new(epsilon(eps_num, eps_den)?, capacity(cap), d).map_err(fail)?;
        let sim = Sbbs::new(&init, &params, RngStream::new(seed, stream)).map_err(fail)?;
        *out = Box::into_raw(Box::new(BbSbbs { sim, d, steps: 0 }));
        Ok(())
    })
}

/// Advances `n` carrier sweeps.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_sbbs_step(h: *mut BbSbbs, n: u64) -> BbStatus {
    guard(|| {
        let h = handle(h)?;
        for _ in 0..n {
            h.sim.step();
        }
        h.steps += n;
        Ok(())
    })
}

/// Number of sweeps performed so far.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bb_sbbs_steps(h: *const BbSbbs) -> u64 {
    h.as_ref().map_or(0, |h| h.steps)
}

/// Copies the `d` positions into `out`; `needed` (nullable) receives `d`.
///
/// # Safety
/// `h` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bb_sbbs_positions(h: *const BbSbbs, out: *mut i64, len: usize, needed: *mut usize) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        copy_out(h.sim.positions(), out, len, needed)
    })
}

/// Copies the `d - 1` gaps into `out`.
///
/// # Safety
/// `h` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bb_sbbs_gaps(h: *const BbSbbs, out: *mut i64, len: usize, needed: *mut usize) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        let mut gaps = vec![0; h.d - 1];
        h.sim.gaps_into(&mut gaps);
        copy_out(&gaps, out, len, needed)
    })
}

/// # Safety
/// `h` must come from `bb_sbbs_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bb_sbbs_free(h: *mut BbSbbs) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Opaque continuous-time PushTASEP.
pub struct BbPushtasep {
    sim: PushTasep,
}

/// # Safety
/// `positions` must point to `d` values and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn bb_pushtasep_new(
    positions: *const i64,
    d: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut BbPushtasep,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let state = PushTasepState::new(slice(positions, d, "positions")?.to_vec()).map_err(fail)?;
        let sim = PushTasep::new(&state, RngStream::new(seed, stream)).map_err(fail)?;
        *out = Box::into_raw(Box::new(BbPushtasep { sim }));
        Ok(())
    })
}

/// Runs until `horizon`; `events` and `boundary_time` (both nullable) receive
/// the jumps made and the time spent with a zero gap during this call.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_pushtasep_run_until(
    h: *mut BbPushtasep,
    horizon: f64,
    events: *mut u64,
    boundary_time: *mut f64,
) -> BbStatus {
    guard(|| {
        let h = handle(h)?;
        if !(horizon >= h.sim.time()) {
            set_error(format!("horizon {horizon} is before the current time {}", h.sim.time()));
            return Err(BbStatus::InvalidArgument);
        }
        let (e, b) = h.sim.run_until(horizon);
        if !events.is_null() {
            *events = e;
        }
        if !boundary_time.is_null() {
            *boundary_time = b;
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bb_pushtasep_time(h: *const BbPushtasep) -> f64 {
    h.as_ref().map_or(f64::NAN, |h| h.sim.time())
}

/// # Safety
/// `h` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bb_pushtasep_positions(
    h: *const BbPushtasep,
    out: *mut i64,
    len: usize,
    needed: *mut usize,
) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        copy_out(h.sim.positions(), out, len, needed)
    })
}

/// # Safety
/// `h` must come from `bb_pushtasep_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bb_pushtasep_free(h: *mut BbPushtasep) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Opaque boundary-cell partition with its reflection matrix.
pub struct BbPartition {
    partition: BoundaryPartition,
    r: RationalMatrix,
}

fn new_partition(p: BoundaryPartition, eps: Epsilon) -> Result<*mut BbPartition, BbStatus> {
    let r = reflection_matrix(&p, eps).map_err(fail)?;
    Ok(Box::into_raw(Box::new(BbPartition { partition: p, r })))
}

/// SBBS partition for `d` balls and capacity `cap`, with reflection vectors
/// at `eps_num / eps_den`.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_new(
    d: usize,
    cap: u32,
    eps_num: i64,
    eps_den: i64,
    out: *mut *mut BbPartition,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let eps = epsilon(eps_num, eps_den)?;
        *out = new_partition(build_partition(d, capacity(cap)).map_err(fail)?, eps)?;
        Ok(())
    })
}

/// PushTASEP partition for `d` particles.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_new_pushtasep(d: usize, out: *mut *mut BbPartition) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = new_partition(pushtasep_partition(d).map_err(fail)?, Epsilon::from_ratio(1, 2).map_err(fail)?)?;
        Ok(())
    })
}

/// Number of cells `k`, or 0 for a null handle.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_cells(h: *const BbPartition) -> usize {
    h.as_ref().map_or(0, |h| h.partition.k())
}

/// Representative of cell `cell` (0-based) into `out` (`d - 1` values).
///
/// # Safety
/// `h` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_representative(
    h: *const BbPartition,
    cell: usize,
    out: *mut i64,
    len: usize,
    needed: *mut usize,
) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        let c = h.partition.cells().get(cell).ok_or_else(|| {
            set_error(format!("cell {cell} out of range"));
            BbStatus::InvalidArgument
        })?;
        copy_out(&c.representative, out, len, needed)
    })
}

/// Cell (0-based) containing the gap vector `w`, or -1 in the interior.
///
/// # Safety
/// `h` must be a live handle and `w` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_cell_of(h: *const BbPartition, w: *const i64, len: usize, cell: *mut i64) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        if cell.is_null() {
            return Err(null("cell"));
        }
        let w = slice(w, len, "w")?;
        if len + 1 != h.partition.d() || w.iter().any(|&g| g < 0) {
            set_error(format!("expected {} nonnegative gaps", h.partition.d() - 1));
            return Err(BbStatus::Dimension);
        }
        *cell = h.partition.cell_of(w).map_or(-1, |c| c as i64);
        Ok(())
    })
}

/// Reflection matrix in row-major order as doubles, `(d - 1) * k` values.
///
/// # Safety
/// `h` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_reflection(
    h: *const BbPartition,
    out: *mut f64,
    len: usize,
    needed: *mut usize,
) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        let flat: Vec<f64> = (0..h.r.rows())
            .flat_map(|i| h.r.row(i).iter().map(q_to_f64).collect::<Vec<_>>())
            .collect();
        copy_out(&flat, out, len, needed)
    })
}

/// Runs the exact weakly-completely-S search; `certified` receives 1 or 0.
///
/// # Safety
/// `h` must be a live handle and `certified` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_scertify(h: *const BbPartition, certified: *mut i32) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        if certified.is_null() {
            return Err(null("certified"));
        }
        let check = weakly_completely_s(&h.r, &h.partition.f_sets()).map_err(fail)?;
        *certified = i32::from(check.is_certified());
        Ok(())
    })
}

/// Partition and reflection matrix as JSON with `p/q` entries. Release the
/// string with `bb_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_json(h: *const BbPartition, out: *mut *mut c_char) -> BbStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut v = serde_json_value(&h.partition)?;
        v["r"] = serde_json::json!(h.r.to_strings());
        let s = CString::new(v.to_string()).map_err(|e| fail(Error::Parse(e.to_string())))?;
        *out = s.into_raw();
        Ok(())
    })
}

fn serde_json_value(p: &BoundaryPartition) -> Result<serde_json::Value, BbStatus> {
    serde_json::to_value(p).map_err(|e| fail(e.into()))
}

/// # Safety
/// `h` must come from a `bb_partition_new*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bb_partition_free(h: *mut BbPartition) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
