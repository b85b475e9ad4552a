//! C interface to the BAFO auction engine.
//!
//! Instances live behind an opaque [`BafoInstance`] handle built from the
//! JSON instance format. Every fallible call returns a [`BafoStatus`]; on
//! failure [`bafo_last_error`] describes what went wrong. Reports come back
//! as NUL-terminated JSON strings owned by the caller, to be released with
//! [`bafo_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bafo::descending::{DescOrdering, DescendingAuction};
use bafo::io::{parse_instance, LoadedInstance};
use bafo::market::efficient_allocation;
use bafo::nyb::{NybAuction, NybOrder};
use bafo::report::{to_json, Events, ReportHeader, SolveReport, Transcript};
use bafo::{experiments, Error, WorkBudget};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BafoStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad JSON, invalid instance, bad order or strategy.
    Invalid = 2,
    BudgetExceeded = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BafoFormat {
    Nyb = 0,
    Descending = 1,
}

/// Opaque instance handle.
pub struct BafoInstance {
    loaded: LoadedInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BafoStatus {
    match e {
        Error::BudgetExceeded { .. } => BafoStatus::BudgetExceeded,
        _ => BafoStatus::Invalid,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BafoStatus>) -> BafoStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BafoStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            BafoStatus::Panic
        }
    }
}

fn fail(e: Error) -> BafoStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> BafoStatus {
    set_error(&format!("{what} is null"));
    BafoStatus::NullPointer
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, BafoStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(&format!("{what} is not UTF-8"));
        BafoStatus::Invalid
    })
}

unsafe fn order_arg(order: *const usize, len: usize) -> Result<Option<Vec<usize>>, BafoStatus> {
    if len == 0 {
        return Ok(None);
    }
    if order.is_null() {
        return Err(null("order"));
    }
    Ok(Some(std::slice::from_raw_parts(order, len).to_vec()))
}

unsafe fn put_string(out: *mut *mut c_char, text: String) -> Result<(), BafoStatus> {
    let c = CString::new(text).map_err(|_| {
        set_error("report contains a NUL byte");
        BafoStatus::Panic
    })?;
    *out = c.into_raw();
    Ok(())
}

fn nyb<'a>(loaded: &'a LoadedInstance, bound: i64, order: Option<Vec<usize>>) -> Result<NybAuction<'a>, Error> {
    let n = loaded.instance.n();
    let order = match order {
        Some(o) => NybOrder::fixed(o, n)?,
        None => NybOrder::identity(n),
    };
    let a = NybAuction::new(&loaded.instance, loaded.tiebreak.clone(), order)?;
    if bound > 0 {
        a.with_bid_cap(bound)
    } else {
        Ok(a)
    }
}

fn descending<'a>(loaded: &'a LoadedInstance, bound: i64, order: Option<Vec<usize>>) -> Result<DescendingAuction<'a>, Error> {
    let ordering = match order {
        Some(o) => {
            if let Some(bad) = o.iter().find(|&&i| i >= loaded.instance.n()) {
                return Err(Error::InvalidOrder(format!("unknown seller {bad}")));
            }
            DescOrdering::FixedPriority(o)
        }
        None => DescOrdering::LowestEligibleIndex,
    };
    let a = DescendingAuction::new(&loaded.instance, loaded.tiebreak.clone(), ordering)?;
    if bound > 0 {
        a.with_h(bound)
    } else {
        Ok(a)
    }
}

/// Parses a JSON instance. On success `*out` receives a handle to release
/// with [`bafo_instance_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bafo_instance_from_json(json: *const c_char, out: *mut *mut BafoInstance) -> BafoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let loaded = parse_instance(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(BafoInstance { loaded }));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from [`bafo_instance_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bafo_instance_free(inst: *mut BafoInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Seller count, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bafo_instance_n(inst: *const BafoInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.loaded.instance.n())
}

/// Welfare-maximizing winner set as a bit mask (bit i = seller i).
///
/// # Safety
/// `inst` must be a live handle and `out_mask` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bafo_efficient_allocation(inst: *const BafoInstance, out_mask: *mut u32) -> BafoStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        if out_mask.is_null() {
            return Err(null("out_mask"));
        }
        let w = efficient_allocation(&inst.loaded.instance, &inst.loaded.tiebreak).map_err(fail)?;
        *out_mask = w.mask();
        Ok(())
    })
}

/// Plays the auction with canonical strategies and returns the transcript.
///
/// `price_bound` is the bid cap (Name-Your-BAFO) or starting price
/// (descending); pass 0 for the default. `order`/`order_len` give the
/// approach order or descending priority; pass `order_len = 0` for the
/// default.
///
/// # Safety
/// Pointers must be valid; `order` must hold `order_len` entries.
#[no_mangle]
pub unsafe extern "C" fn bafo_run_canonical(
    inst: *const BafoInstance,
    format: BafoFormat,
    price_bound: i64,
    order: *const usize,
    order_len: usize,
    out_json: *mut *mut c_char,
) -> BafoStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let order = order_arg(order, order_len)?;
        let t = match format {
            BafoFormat::Nyb => {
                let a = nyb(&inst.loaded, price_bound, order).map_err(fail)?;
                let run = a.run_canonical().map_err(fail)?;
                Transcript { header: ReportHeader::nyb(&a, None), events: Events::Nyb(run.events), outcome: run.outcome }
            }
            BafoFormat::Descending => {
                let a = descending(&inst.loaded, price_bound, order).map_err(fail)?;
                let run = a.run_canonical().map_err(fail)?;
                Transcript {
                    header: ReportHeader::descending(&a, None),
                    events: Events::Descending(run.events),
                    outcome: run.outcome,
                }
            }
        };
        put_string(out_json, to_json(&t))
    })
}

/// Computes the exact equilibrium and returns the solve report.
/// `budget = 0` uses the default work budget.
///
/// # Safety
/// As for [`bafo_run_canonical`].
#[no_mangle]
pub unsafe extern "C" fn bafo_solve(
    inst: *const BafoInstance,
    format: BafoFormat,
    price_bound: i64,
    order: *const usize,
    order_len: usize,
    budget: u64,
    out_json: *mut *mut c_char,
) -> BafoStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let order = order_arg(order, order_len)?;
        let budget = if budget == 0 { WorkBudget::default() } else { WorkBudget(budget) };
        let report = match format {
            BafoFormat::Nyb => {
                let a = nyb(&inst.loaded, price_bound, order).map_err(fail)?;
                let eq = a.solve_exact(budget).map_err(fail)?;
                SolveReport::new(ReportHeader::nyb(&a, None), &eq.outcome, eq.node_count, Events::Nyb(eq.path))
            }
            BafoFormat::Descending => {
                let a = descending(&inst.loaded, price_bound, order).map_err(fail)?;
                let eq = a.solve_exact(budget).map_err(fail)?;
                SolveReport::new(
                    ReportHeader::descending(&a, None),
                    &eq.outcome,
                    eq.state_count,
                    Events::Descending(eq.path),
                )
            }
        };
        put_string(out_json, to_json(&report))
    })
}

/// Runs a preset experiment (`n = 0` for its default size). The report's
/// `pass` field says whether every check held.
///
/// # Safety
/// `name` must be NUL-terminated and `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn bafo_experiment(name: *const c_char, n: usize, out_json: *mut *mut c_char) -> BafoStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let report = experiments::run(name, (n > 0).then_some(n), None, None).map_err(fail)?;
        put_string(out_json, to_json(&report))
    })
}

/// Message for the last failed call on this thread ("" if none). Valid
/// until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn bafo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn bafo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn bafo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
