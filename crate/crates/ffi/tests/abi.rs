use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use nc_ergodic_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(nce_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    nce_string_free(p);
    s
}

fn gallery(name: &str) -> *mut NceScenario {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nce_scenario_from_gallery(name.as_ptr(), &mut s) }, NceStatus::Ok);
    s
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(nce_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn gallery_names_round_trip() {
    assert_eq!(nce_gallery_count(), 8);
    for i in 0..nce_gallery_count() {
        let mut name = ptr::null_mut();
        assert_eq!(unsafe { nce_gallery_name(i, &mut name) }, NceStatus::Ok);
        let name = unsafe { take_string(name) };
        let s = gallery(&name);
        unsafe { nce_scenario_free(s) };
    }
    let mut name = ptr::null_mut();
    assert_eq!(unsafe { nce_gallery_name(99, &mut name) }, NceStatus::NotFound);
    assert!(last_error().contains("99"));
}

#[test]
fn amplitude_damping_through_the_abi() {
    unsafe {
        let s = gallery("amplitude-damping");
        let mut r = ptr::null_mut();
        assert_eq!(nce_run(s, &mut r), NceStatus::Ok);
        assert!(nce_report_all_pass(r));

        let mut d = ptr::null_mut();
        assert_eq!(nce_report_decomposition(r, &mut d), NceStatus::Ok);
        assert_eq!(nce_decomposition_size(d), 2);
        assert_eq!(nce_decomposition_rank_e1(d), 1);
        assert_eq!(nce_decomposition_rank_e2(d), 1);
        assert!(nce_decomposition_passed(d));

        let mut needed = 0;
        assert_eq!(
            nce_decomposition_projection(d, 1, ptr::null_mut(), 0, &mut needed),
            NceStatus::BufferTooSmall
        );
        assert_eq!(needed, 8);
        let mut e1 = vec![0.0; needed];
        assert_eq!(nce_decomposition_projection(d, 1, e1.as_mut_ptr(), e1.len(), &mut needed), NceStatus::Ok);
        let expected = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (x, y) in e1.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{e1:?}");
        }

        nce_decomposition_decay(d, ptr::null_mut(), 0, &mut needed);
        let mut decay = vec![0.0; needed];
        assert_eq!(nce_decomposition_decay(d, decay.as_mut_ptr(), decay.len(), ptr::null_mut()), NceStatus::Ok);
        for pair in decay.chunks(2) {
            let a = pair[0];
            let expected = (1.0 - 0.5f64.powf(a)) / (a * 0.5);
            assert!((pair[1] - expected).abs() < 1e-10);
        }

        let mut json = ptr::null_mut();
        assert_eq!(nce_report_to_json(r, &mut json), NceStatus::Ok);
        assert!(take_string(json).contains("\"schema_version\""));

        nce_decomposition_free(d);
        nce_report_free(r);
        nce_scenario_free(s);
    }
}

#[test]
fn schema_errors_are_reported() {
    let json = CString::new("").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nce_scenario_from_json(json.as_ptr(), &mut s) }, NceStatus::Schema);
    assert!(s.is_null());
    assert!(last_error().contains("empty"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nce_scenario_from_json(ptr::null(), &mut s) }, NceStatus::NullPointer);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { nce_run(ptr::null(), &mut r) }, NceStatus::NullPointer);
    assert!(!unsafe { nce_report_all_pass(ptr::null()) });
    unsafe {
        nce_scenario_free(ptr::null_mut());
        nce_report_free(ptr::null_mut());
        nce_decomposition_free(ptr::null_mut());
        nce_string_free(ptr::null_mut());
    }
}

#[test]
fn scenario_json_round_trip_and_emit() {
    unsafe {
        let s = gallery("identity");
        assert_eq!(nce_scenario_set_seed(s, 7), NceStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(nce_scenario_to_json(s, &mut json), NceStatus::Ok);
        let text = CString::new(take_string(json)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(nce_scenario_from_json(text.as_ptr(), &mut back), NceStatus::Ok);

        let mut r = ptr::null_mut();
        assert_eq!(nce_run(back, &mut r), NceStatus::Ok);
        let dir = tempfile::tempdir().unwrap();
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        let fmt = CString::new("decay-csv").unwrap();
        assert_eq!(nce_report_emit(r, fmt.as_ptr(), d.as_ptr()), NceStatus::Ok);
        assert!(dir.path().join("identity.decay.csv").exists());
        let bad = CString::new("xml").unwrap();
        assert_eq!(nce_report_emit(r, bad.as_ptr(), d.as_ptr()), NceStatus::Validation);

        nce_report_free(r);
        nce_scenario_free(back);
        nce_scenario_free(s);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/nc_ergodic.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for f in [
        "nce_version",
        "nce_last_error",
        "nce_string_free",
        "nce_scenario_from_json",
        "nce_scenario_from_file",
        "nce_scenario_from_gallery",
        "nce_run",
        "nce_report_all_pass",
        "nce_report_decomposition",
        "nce_decomposition_projection",
        "nce_decomposition_free",
        "NCE_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "nc_ergodic.h"
int main(void) {
    NceScenario *s = NULL;
    NceReport *r = NULL;
    if (nce_scenario_from_gallery("identity", &s) != NCE_STATUS_OK) return 2;
    if (nce_run(s, &r) != NCE_STATUS_OK) return 2;
    int ok = nce_report_all_pass(r) ? 0 : 1;
    nce_report_free(r);
    nce_scenario_free(s);
    return ok;
}
"#,
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());

    // Link against the static library when cargo has produced it.
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libnc_ergodic_ffi.a").exists() {
        eprintln!("static library not built; skipping link step");
        return;
    }
    let exe = dir.path().join("use");
    let status = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg("-o")
        .arg(&exe)
        .arg("-L")
        .arg(&lib_dir)
        .args(["-l:libnc_ergodic_ffi.a", "-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(Command::new(&exe).status().unwrap().success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
