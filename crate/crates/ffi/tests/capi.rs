use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use bafo_ffi::*;

const CHOP: &str = r#"{"version": 1, "n": 3, "costs": [50, 10, 10],
    "valuation": {"kind": "explicit", "values": [0, 100, 0, 100, 0, 100, 100, 100]}, "denomination": "cents"}"#;

const GAP4: &str = r#"{"version": 1, "n": 4, "costs": [0, 0, 0, 0],
    "valuation": {"kind": "anonymous", "values": [0, 2, 4, 4, 6]}}"#;

fn load(json: &str) -> *mut BafoInstance {
    let text = CString::new(json).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { bafo_instance_from_json(text.as_ptr(), &mut inst) }, BafoStatus::Ok);
    assert!(!inst.is_null());
    inst
}

fn take(s: *mut std::ffi::c_char) -> serde_json::Value {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { bafo_string_free(s) };
    serde_json::from_str(&text).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bafo_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn instance_lifecycle() {
    let inst = load(CHOP);
    assert_eq!(unsafe { bafo_instance_n(inst) }, 3);
    let mut mask = 0;
    assert_eq!(unsafe { bafo_efficient_allocation(inst, &mut mask) }, BafoStatus::Ok);
    assert_eq!(mask, 0b110);
    unsafe { bafo_instance_free(inst) };
    unsafe { bafo_instance_free(ptr::null_mut()) };
    assert_eq!(unsafe { bafo_instance_n(ptr::null()) }, 0);
}

#[test]
fn bad_input_sets_last_error() {
    let bad = CString::new(r#"{"version": 1}"#).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { bafo_instance_from_json(bad.as_ptr(), &mut inst) }, BafoStatus::Invalid);
    assert!(inst.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { bafo_instance_from_json(ptr::null(), &mut inst) }, BafoStatus::NullPointer);
    let mut mask = 0;
    assert_eq!(unsafe { bafo_efficient_allocation(ptr::null(), &mut mask) }, BafoStatus::NullPointer);
}

#[test]
fn canonical_nyb_run() {
    let inst = load(CHOP);
    let order = [1usize, 2, 0];
    let mut out = ptr::null_mut();
    let status = unsafe { bafo_run_canonical(inst, BafoFormat::Nyb, 0, order.as_ptr(), order.len(), &mut out) };
    assert_eq!(status, BafoStatus::Ok);
    let t = take(out);
    let bids: Vec<i64> = t["events"].as_array().unwrap().iter().map(|e| e["bid"].as_i64().unwrap()).collect();
    assert_eq!(bids, vec![40, 10, 50]);
    assert_eq!(t["outcome"]["buyer_cost"], 50);

    let bad = [0usize, 0, 1];
    let status = unsafe { bafo_run_canonical(inst, BafoFormat::Nyb, 0, bad.as_ptr(), bad.len(), &mut out) };
    assert_eq!(status, BafoStatus::Invalid);
    unsafe { bafo_instance_free(inst) };
}

#[test]
fn descending_costs_and_budget() {
    let inst = load(GAP4);
    let mut out = ptr::null_mut();
    for (h, cost) in [(2, 2), (1, 4)] {
        assert_eq!(unsafe { bafo_run_canonical(inst, BafoFormat::Descending, h, ptr::null(), 0, &mut out) }, BafoStatus::Ok);
        assert_eq!(take(out)["outcome"]["buyer_cost"], cost);
        assert_eq!(unsafe { bafo_solve(inst, BafoFormat::Descending, h, ptr::null(), 0, 0, &mut out) }, BafoStatus::Ok);
        assert_eq!(take(out)["buyer_cost"], cost);
    }
    let status = unsafe { bafo_solve(inst, BafoFormat::Nyb, 0, ptr::null(), 0, 10, &mut out) };
    assert_eq!(status, BafoStatus::BudgetExceeded);
    assert!(last_error().contains("budget"));
    unsafe { bafo_instance_free(inst) };
}

#[test]
fn experiment_reports() {
    let name = CString::new("cost-gap").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bafo_experiment(name.as_ptr(), 6, &mut out) }, BafoStatus::Ok);
    let r = take(out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["data"]["ratio"], "3");
    let unknown = CString::new("nope").unwrap();
    assert_eq!(unsafe { bafo_experiment(unknown.as_ptr(), 0, &mut out) }, BafoStatus::Invalid);
    let v = unsafe { CStr::from_ptr(bafo_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("bafo.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["bafo_instance_from_json", "bafo_solve", "bafo_last_error", "bafo_string_free"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).status() else {
        eprintln!("no C compiler found, skipping syntax check");
        return;
    };
    assert!(status.success());
}
