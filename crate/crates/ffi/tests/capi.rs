use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use foldquant_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        fq_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn normal(mean: f64, sd: f64) -> *mut FqDistribution {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fq_distribution_normal(mean, sd, &mut d) }, FqStatus::Ok);
    d
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(fq_version()) };
    assert_eq!(v.to_str().unwrap(), foldquant::VERSION);
}

#[test]
fn fold_wraps_into_range() {
    let mut y = f64::NAN;
    assert_eq!(unsafe { fq_fold(3.5, 1.0, 1.0, &mut y) }, FqStatus::Ok);
    assert_eq!(y, -0.5);
    assert_eq!(unsafe { fq_fold(0.2, 3.0, 1.0, &mut y) }, FqStatus::Ok);
    assert!((y - 0.6).abs() < 1e-15);
}

#[test]
fn bad_parameters_set_status_and_message() {
    let mut y = 0.0;
    assert_eq!(unsafe { fq_fold(1.0, -2.0, 1.0, &mut y) }, FqStatus::Domain);
    assert!(last_error().contains("domain"), "{}", last_error());
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fq_distribution_normal(0.0, 0.0, &mut d) }, FqStatus::Domain);
    assert!(d.is_null());
    assert_eq!(unsafe { fq_fold(1.0, 1.0, 1.0, ptr::null_mut()) }, FqStatus::NullPointer);
    assert_eq!(unsafe { fq_distribution_cdf(ptr::null(), 0.0, &mut y) }, FqStatus::NullPointer);
}

#[test]
fn last_error_truncates() {
    let mut y = 0.0;
    unsafe { fq_fold(1.0, 0.0, 1.0, &mut y) };
    let mut buf = [1 as c_char; 5];
    let full = unsafe { fq_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 4);
    assert_eq!(buf[4], 0);
}

#[test]
fn distribution_and_folded_law() {
    let d = normal(0.0, 1.0);
    let mut v = 0.0;
    unsafe {
        assert_eq!(fq_distribution_cdf(d, 0.0, &mut v), FqStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(fq_distribution_quantile(d, 0.5, &mut v), FqStatus::Ok);
        assert!(v.abs() < 1e-12);
        assert_eq!(fq_distribution_quantile(d, 1.5, &mut v), FqStatus::Domain);
        fq_distribution_free(d);
    }

    // U(-1, 1) folded with unit gain into [-1, 1) is itself.
    let mut u = ptr::null_mut();
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(fq_distribution_uniform(-1.0, 1.0, &mut u), FqStatus::Ok);
        assert_eq!(fq_folded_new(u, 1.0, 1.0, 0.0, &mut f), FqStatus::Ok);
        for theta in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            assert_eq!(fq_folded_cdf(f, theta, &mut v), FqStatus::Ok);
            assert!((v - (theta + 1.0) / 2.0).abs() < 1e-12);
            assert_eq!(fq_folded_pdf(f, theta, &mut v), FqStatus::Ok);
            assert!((v - 0.5).abs() < 1e-12);
        }
        fq_folded_free(f);
        fq_distribution_free(u);
    }
}

#[test]
fn quantizers() {
    let mut q = ptr::null_mut();
    unsafe {
        assert_eq!(fq_quantizer_uniform(4, -1.0, 1.0, &mut q), FqStatus::Ok);
        assert_eq!(fq_quantizer_len(q), 4);
        let mut levels = [0.0; 4];
        assert_eq!(fq_quantizer_levels(q, levels.as_mut_ptr(), 4), FqStatus::Ok);
        assert_eq!(levels, [-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(fq_quantizer_levels(q, levels.as_mut_ptr(), 3), FqStatus::Domain);

        let mut xs = [-2.0, -0.6, 0.1, 0.9];
        let p = xs.as_mut_ptr();
        assert_eq!(fq_quantize(q, p, p, 4), FqStatus::Ok);
        assert_eq!(xs, [-0.75, -0.75, 0.25, 0.75]);

        let mut e = 0.0;
        let s = [0.5, -0.5];
        assert_eq!(fq_nmse(q, s.as_ptr(), 2, &mut e), FqStatus::Ok);
        assert!((e - 0.0625 / 0.25).abs() < 1e-15);
        assert_eq!(fq_nmse(q, [0.0].as_ptr(), 1, &mut e), FqStatus::ZeroEnergy);
        fq_quantizer_free(q);
    }

    // Two-level Lloyd-Max for N(0,1) puts its levels at ±sqrt(2/π).
    let d = normal(0.0, 1.0);
    let mut converged = false;
    unsafe {
        assert_eq!(fq_quantizer_lloyd_max(d, 2, -10.0, 10.0, &mut converged, &mut q), FqStatus::Ok);
        assert!(converged);
        let mut levels = [0.0; 2];
        fq_quantizer_levels(q, levels.as_mut_ptr(), 2);
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((levels[1] - want).abs() < 1e-8 && (levels[0] + want).abs() < 1e-8);
        fq_quantizer_free(q);
        fq_distribution_free(d);
    }
}

#[test]
fn distances() {
    let x = normal(0.0, 1.0);
    let y = normal(1.0, 2.0);
    let mut w = 0.0;
    unsafe {
        assert_eq!(fq_wasserstein(x, y, 2, &mut w), FqStatus::Ok);
        assert!((w - 2f64.sqrt()).abs() < 1e-8, "{w}");
        assert_eq!(fq_wasserstein(x, y, 0, &mut w), FqStatus::Domain);
        assert_eq!(fq_w1_folded_to_uniform(x, 50.0, 1.0, &mut w), FqStatus::Ok);
        assert!(w < 1e-12, "{w}");
        fq_distribution_free(x);
        fq_distribution_free(y);
    }
}

#[test]
fn free_accepts_null() {
    unsafe {
        fq_distribution_free(ptr::null_mut());
        fq_folded_free(ptr::null_mut());
        fq_quantizer_free(ptr::null_mut());
    }
    assert_eq!(unsafe { fq_quantizer_len(ptr::null()) }, 0);
}

#[test]
fn header_compiles_and_links_from_c() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libfoldquant_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let out = Command::new(cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
