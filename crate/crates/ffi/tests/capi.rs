use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hormander::grid::io::{distribution_to_bytes, mask_to_bytes};
use hormander::grid::{DomainMask, GridDistribution, GridShape};
use hormander_ffi::*;

fn param(json: &str) -> *mut HmParam {
    let src = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { hm_param_from_json(src.as_ptr(), &mut p) }, HmStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hm_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn evaluation_and_transforms() {
    let phi = param(r#"{"node":"power","exponent":2.0}"#);
    let mut v = 0.0;
    unsafe {
        assert_eq!(hm_param_eval(phi, 3.0, &mut v), HmStatus::Ok);
        assert_eq!(v, 9.0);
        assert_eq!(hm_param_log_eval(phi, 1e6, &mut v), HmStatus::Ok);
        assert_eq!(v, 2e6);

        let mut psi = ptr::null_mut();
        assert_eq!(hm_psi_from_phi(phi, 0.0, 4.0, &mut psi), HmStatus::Ok);
        assert_eq!(hm_param_eval(psi, 16.0, &mut v), HmStatus::Ok);
        assert!((v - 4.0).abs() < 1e-12);
        let mut back = ptr::null_mut();
        assert_eq!(hm_phi_from_psi(psi, 0.0, 4.0, &mut back), HmStatus::Ok);
        assert_eq!(hm_param_eval(back, 5.0, &mut v), HmStatus::Ok);
        assert!((v - 25.0).abs() < 1e-12);

        let mut json = ptr::null_mut();
        assert_eq!(hm_param_to_json(phi, &mut json), HmStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("power"));
        hm_string_free(json);

        hm_param_free(back);
        hm_param_free(psi);
        hm_param_free(phi);
    }
}

#[test]
fn certificates_and_indices() {
    let phi = param(r#"{"node":"power","exponent":1.5}"#);
    unsafe {
        let mut idx = HmIndices::default();
        assert_eq!(hm_matuszewska_indices(phi, 50.0, &mut idx), HmStatus::Ok);
        assert!((idx.sigma0 - 1.5).abs() < 1e-9 && (idx.sigma1 - 1.5).abs() < 1e-9);
        let mut cert = HmRoCertificate::default();
        assert_eq!(hm_ro_membership(phi, 30.0, 512, 1e6, &mut cert), HmStatus::Ok);
        assert!(cert.is_member && cert.s0 <= 1.5 && cert.s1 >= 1.5);

        let sqrt = param(r#"{"node":"power","exponent":0.5}"#);
        let mut pc = HmPseudoconcavity::default();
        assert_eq!(
            hm_pseudoconcavity_test(sqrt, 1.0, 20.0, 64.0, 1e6, &mut pc),
            HmStatus::Ok
        );
        assert!(pc.passes && pc.log_c_best.abs() < 1e-12 && pc.points > 100);
        hm_param_free(sqrt);
        hm_param_free(phi);
    }
}

#[test]
fn norms_on_grids() {
    let g = GridShape::new(vec![64], vec![std::f64::consts::TAU]).unwrap();
    let u = GridDistribution::random(g.clone(), 5).unwrap();
    let bytes = distribution_to_bytes(&u);
    let one = param(r#"{"node":"constant","value":1.0}"#);
    let phi = param(r#"{"node":"power","exponent":1.0}"#);
    unsafe {
        let mut grid = ptr::null_mut();
        assert_eq!(
            hm_grid_from_binary(bytes.as_ptr(), bytes.len(), &mut grid),
            HmStatus::Ok
        );
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(hm_hormander_norm(grid, one, &mut a), HmStatus::Ok);
        assert_eq!(hm_grid_l2_norm(grid, &mut b), HmStatus::Ok);
        assert!((a - b).abs() <= 1e-12 * b);

        let mut d = 1.0;
        assert_eq!(hm_norm_identity_check(grid, phi, 0.0, 2.0, &mut d), HmStatus::Ok);
        assert!(d <= 1e-12);

        let mask = mask_to_bytes(&DomainMask::full(g).unwrap());
        let mut q = 0.0;
        assert_eq!(
            hm_quotient_norm(grid, mask.as_ptr(), mask.len(), phi, &mut q),
            HmStatus::Ok
        );
        assert_eq!(hm_hormander_norm(grid, phi, &mut a), HmStatus::Ok);
        assert!((q - a).abs() <= 1e-12 * a);
        hm_grid_free(grid);

        let mut random = ptr::null_mut();
        assert_eq!(hm_grid_random(2, 16, 1.0, 3, &mut random), HmStatus::Ok);
        assert_eq!(hm_hormander_norm(random, one, &mut a), HmStatus::Ok);
        assert!(a > 0.0);
        hm_grid_free(random);
    }
    unsafe {
        hm_param_free(one);
        hm_param_free(phi);
    }
}

#[test]
fn counterexample_entry_points() {
    unsafe {
        let (mut bound, mut observed) = (0.0, 0.0);
        assert_eq!(hm_ratio_log_lower_bound(1, &mut bound, &mut observed), HmStatus::Ok);
        assert!((bound - 52.71).abs() < 0.01 && observed >= bound);
        assert_eq!(
            hm_ratio_log_lower_bound(0, &mut bound, &mut observed),
            HmStatus::InvalidInput
        );

        let mut y = 0.0;
        assert_eq!(hm_appendix_log_phi(1e6, &mut y), HmStatus::Ok);
        assert!(y.is_finite());
        assert_eq!(hm_appendix_log_phi(-1.0, &mut y), HmStatus::Domain);

        let psi = param(r#"{"node":"appendix"}"#);
        let mut w = 0.0;
        let t1 = (2.5 * std::f64::consts::PI).powi(4);
        let s1 = (3.0 * std::f64::consts::PI).powi(4);
        assert_eq!(hm_rank_one_witness(psi, s1, t1, &mut w), HmStatus::Ok);
        assert!(w >= bound);
        hm_param_free(psi);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new("{\"node\":\"table\",\"points\":[[1,1],[2,0]]}").unwrap();
        assert_eq!(hm_param_from_json(bad.as_ptr(), &mut p), HmStatus::InvalidInput);
        assert!(p.is_null());
        assert!(last_error().contains("invalid input"), "{}", last_error());

        assert_eq!(hm_param_from_json(ptr::null(), &mut p), HmStatus::NullPointer);
        assert!(last_error().contains("json"));

        let phi = param(r#"{"node":"log_shift"}"#);
        assert!(last_error().is_empty());
        assert_eq!(hm_param_eval(phi, 2.0, ptr::null_mut()), HmStatus::NullPointer);
        let mut v = 0.0;
        assert_eq!(hm_param_eval(ptr::null(), 2.0, &mut v), HmStatus::NullPointer);
        let mut psi = ptr::null_mut();
        assert_eq!(hm_psi_from_phi(phi, 1.0, 1.0, &mut psi), HmStatus::InvalidInput);
        assert!(psi.is_null());
        let mut grid = ptr::null_mut();
        assert_eq!(
            hm_grid_from_binary([1u8, 2, 3].as_ptr(), 3, &mut grid),
            HmStatus::InvalidInput
        );
        assert_eq!(hm_grid_random(4, 16, 1.0, 0, &mut grid), HmStatus::InvalidInput);
        hm_param_free(phi);
        hm_param_free(ptr::null_mut());
        hm_grid_free(ptr::null_mut());
        hm_string_free(ptr::null_mut());
        assert!(!CStr::from_ptr(hm_version()).to_bytes().is_empty());
    }
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/capi-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "hormander.h"

int main(void) {
    HmParam *phi = NULL;
    if (hm_param_from_json("{\"node\":\"power\",\"exponent\":2.0}", &phi) != HmStatus_Ok) return 1;
    double v = 0.0;
    if (hm_param_eval(phi, 3.0, &v) != HmStatus_Ok || v != 9.0) return 2;
    HmRoCertificate cert;
    if (hm_ro_membership(phi, 20.0, 256, 1e6, &cert) != HmStatus_Ok || !cert.is_member) return 3;
    if (hm_param_eval(NULL, 1.0, &v) != HmStatus_NullPointer) return 4;
    if (strstr(hm_last_error(), "null") == NULL) return 5;
    double bound, observed;
    if (hm_ratio_log_lower_bound(1, &bound, &observed) != HmStatus_Ok) return 6;
    hm_param_free(phi);
    printf("%.6f\n", bound);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/hormander.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "hm_param_from_json",
        "hm_ro_membership",
        "hm_quotient_norm",
        "HmStatus_Panic",
        "typedef struct HmParam HmParam",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let lib = target_dir().join("libhormander_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, C_SMOKE).unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "52.711532");
}
