use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use crs_ffi::*;

fn corpus(name: &str) -> CString {
    let path = format!("{}/../core/corpus/{name}.crs", env!("CARGO_MANIFEST_DIR"));
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn parse(text: &CString) -> *mut CrsHandle {
    let mut h = ptr::null_mut();
    let status = unsafe { crs_parse(text.as_ptr(), &mut h) };
    assert_eq!(status, CrsStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = crs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn verdicts_across_the_corpus() {
    for (name, want) in [
        ("member", CrsVerdict::Confluent),
        ("gramlich", CrsVerdict::NotConfluent),
        ("asso", CrsVerdict::Unknown),
    ] {
        let h = parse(&corpus(name));
        let mut v = CrsVerdict::Unknown;
        assert_eq!(unsafe { crs_check(h, &mut v) }, CrsStatus::Ok);
        assert_eq!(v, want, "{name}");
        assert!(crs_last_error_message().is_null());
        unsafe { crs_free(h) };
    }
}

#[test]
fn peak_count_and_report() {
    let h = parse(&corpus("member"));
    let mut n = 0usize;
    assert_eq!(unsafe { crs_peak_count(h, &mut n) }, CrsStatus::Ok);
    assert_eq!(n, 2);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { crs_report_json(h, &mut json) }, CrsStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { crs_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["verdict"], "confluent");
    assert_eq!(v["criterion"], "complementary");
    unsafe { crs_free(h) };
}

#[test]
fn joinability_queries() {
    let h = parse(&corpus("not-left-linear"));
    let q = |a: &str, b: &str, d: Option<&str>| {
        let (a, b) = (CString::new(a).unwrap(), CString::new(b).unwrap());
        let d = d.map(|d| CString::new(d).unwrap());
        let mut ans = CrsAnswer::Undecided;
        let status = unsafe {
            crs_joinable(
                h,
                a.as_ptr(),
                b.as_ptr(),
                d.as_ref().map_or(ptr::null(), |d| d.as_ptr()),
                &mut ans,
            )
        };
        (status, ans)
    };
    assert_eq!(q("c", "d", None), (CrsStatus::Ok, CrsAnswer::No));
    assert_eq!(
        q("plus(0,0)", "c", Some("w+w")),
        (CrsStatus::Ok, CrsAnswer::Yes)
    );
    assert_eq!(q("plus(0,0)", "c", Some("0")).1, CrsAnswer::No);
    assert_eq!(q("plus(0,", "c", None).0, CrsStatus::TermError);
    assert!(last_error().contains("t0"));
    assert_eq!(q("c", "d", Some("w+w+1")).0, CrsStatus::InvalidArgument);
    unsafe { crs_free(h) };
}

#[test]
fn budget_changes_invalidate_the_cached_analysis() {
    let h = parse(&corpus("not-left-linear"));
    let mut v = CrsVerdict::Confluent;
    assert_eq!(unsafe { crs_check(h, &mut v) }, CrsStatus::Ok);
    assert_eq!(v, CrsVerdict::NotConfluent);
    assert_eq!(unsafe { crs_set_budget(h, 1, 0, 0, 0) }, CrsStatus::Ok);
    assert_eq!(unsafe { crs_check(h, &mut v) }, CrsStatus::Ok);
    assert_eq!(v, CrsVerdict::Unknown);
    unsafe { crs_free(h) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    let bad = CString::new("sorts n;\ncons 0 : m;\n").unwrap();
    assert_eq!(
        unsafe { crs_parse(bad.as_ptr(), &mut h) },
        CrsStatus::ParseError
    );
    assert!(h.is_null());
    assert!(last_error().starts_with("2:"), "{}", last_error());

    assert_eq!(
        unsafe { crs_parse(ptr::null(), &mut h) },
        CrsStatus::NullPointer
    );
    let empty = CString::new("").unwrap();
    assert_eq!(
        unsafe { crs_parse(empty.as_ptr(), ptr::null_mut()) },
        CrsStatus::NullPointer
    );
    let invalid = [0xffu8, 0];
    assert_eq!(
        unsafe { crs_parse(invalid.as_ptr().cast(), &mut h) },
        CrsStatus::InvalidUtf8
    );
    let mut v = CrsVerdict::Unknown;
    assert_eq!(
        unsafe { crs_check(ptr::null_mut(), &mut v) },
        CrsStatus::NullPointer
    );
    unsafe {
        crs_free(ptr::null_mut());
        crs_string_free(ptr::null_mut());
    }
    let version = unsafe { CStr::from_ptr(crs_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/crs.h")).unwrap();
    for name in [
        "crs_parse",
        "crs_free",
        "crs_set_budget",
        "crs_check",
        "crs_peak_count",
        "crs_report_json",
        "crs_joinable",
        "crs_string_free",
        "crs_last_error_message",
        "crs_version",
        "CRS_STATUS_OK",
        "CRS_VERDICT_NOT_CONFLUENT",
        "typedef struct CrsHandle CrsHandle",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles and runs a small C program against the header and static library.
#[test]
fn c_program_links_against_the_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let target_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .and_then(|deps| deps.parent())
        .map(PathBuf::from)
        .unwrap();
    let lib = target_dir.join("libcrs_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = std::env::temp_dir().join(format!("crs-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "crs.h"
int main(void) {
    const char *spec = "sorts t; cons c : t; cons d : t; func a : t;\n"
                       "rule a = c; rule a = d;\n";
    CrsHandle *h = NULL;
    if (crs_parse(spec, &h) != CRS_STATUS_OK) return 10;
    size_t peaks = 0;
    if (crs_peak_count(h, &peaks) != CRS_STATUS_OK) return 11;
    enum CrsVerdict v;
    if (crs_check(h, &v) != CRS_STATUS_OK) return 12;
    char *json = NULL;
    if (crs_report_json(h, &json) != CRS_STATUS_OK) return 13;
    printf("%zu %d %c\n", peaks, (int)v, json[0]);
    crs_string_free(json);
    crs_free(h);
    if (crs_parse("sorts", &h) == CRS_STATUS_OK) return 14;
    return crs_last_error_message() == NULL ? 15 : 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2 1 {");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
