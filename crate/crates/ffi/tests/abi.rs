use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use revqe_ffi::*;

fn last_error() -> String {
    let p = revqe_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sphere(n: usize) -> *mut RevqeProfile {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { revqe_profile_sphere(n, &mut p) }, RevqeStatus::Ok);
    p
}

#[test]
fn profile_queries_match_the_round_sphere() {
    let p = sphere(400);
    let mut v = 0.0;
    unsafe {
        assert_eq!(revqe_profile_length(p, &mut v), RevqeStatus::Ok);
        assert!((v - PI).abs() < 1e-12);
        assert_eq!(revqe_profile_radius(p, 1.0, &mut v), RevqeStatus::Ok);
        assert!((v - 1.0f64.sin()).abs() < 1e-12);
        assert_eq!(revqe_profile_orbit_volume(p, PI / 2.0, &mut v), RevqeStatus::Ok);
        assert!((v - 2.0 * PI).abs() < 1e-12);
        assert_eq!(revqe_profile_radius(p, 4.0, &mut v), RevqeStatus::InvalidArgument);
        revqe_profile_free(p);
    }
    assert!(last_error().contains("outside"));
}

#[test]
fn table_profile_from_sampled_sphere() {
    let n = 201;
    let t: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    let mut r: Vec<f64> = t.iter().map(|t| t.sin()).collect();
    r[n - 1] = 0.0; // sin(π) rounds to 1.2e-16; tables must close exactly
    let z: Vec<f64> = t.iter().map(|t| -t.cos()).collect();
    let mut p = ptr::null_mut();
    unsafe {
        let status = revqe_profile_table(t.as_ptr(), r.as_ptr(), z.as_ptr(), n, 400, &mut p);
        assert_eq!(status, RevqeStatus::Ok, "{}", last_error());
        let mut len = 0.0;
        revqe_profile_length(p, &mut len);
        assert!((len - PI).abs() < 1e-6, "{len}");
        revqe_profile_free(p);
    }
}

#[test]
fn spectrum_handle_round_trip() {
    let p = sphere(1000);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(revqe_spectrum_solve(p, -2, 1000, 5, &mut s), RevqeStatus::Ok);
        assert_eq!(revqe_spectrum_len(s), 5);
        for k in 0..5 {
            let mut e = 0.0;
            assert_eq!(revqe_spectrum_eigenvalue(s, k, &mut e), RevqeStatus::Ok);
            let l = (k + 2) as f64;
            assert!((e / (l * (l + 1.0)) - 1.0).abs() < 1e-4);
        }
        let mut n = 0;
        assert_eq!(revqe_spectrum_eigenfunction(s, 0, ptr::null_mut(), ptr::null_mut(), 0, &mut n), RevqeStatus::Ok);
        let mut theta = vec![0.0; n];
        let mut f = vec![0.0; n];
        assert_eq!(
            revqe_spectrum_eigenfunction(s, 0, theta.as_mut_ptr(), f.as_mut_ptr(), n - 1, &mut n),
            RevqeStatus::OutOfBounds
        );
        assert_eq!(revqe_spectrum_eigenfunction(s, 0, theta.as_mut_ptr(), f.as_mut_ptr(), n, &mut n), RevqeStatus::Ok);
        // compare with the closed-form harmonic through the same ABI
        for i in (1..n).step_by(97) {
            let mut y = 0.0;
            assert_eq!(revqe_ylm_radial(2, -2, theta[i], &mut y), RevqeStatus::Ok);
            assert!((f[i].abs() - y.abs()).abs() < 1e-3, "θ={}", theta[i]);
        }
        revqe_spectrum_free(s);
        revqe_profile_free(p);
        assert_eq!(revqe_spectrum_len(ptr::null()), 0);
        revqe_spectrum_free(ptr::null_mut());
        revqe_profile_free(ptr::null_mut());
    }
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(revqe_legendre_assoc(2, 1, 0.5, &mut v), RevqeStatus::Ok);
        // P_2^1(x) = -3x√(1-x²)
        assert!((v + 3.0 * 0.5 * 0.75f64.sqrt()).abs() < 1e-14);
        assert_eq!(revqe_ylm_radial(0, 0, 0.3, &mut v), RevqeStatus::Ok);
        assert!((v - (1.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
        assert_eq!(revqe_legendre_assoc(1, 3, 0.5, &mut v), RevqeStatus::InvalidArgument);
    }
}

#[test]
fn partition_through_the_abi() {
    let a: Vec<f64> = (1..=10).map(|j| (j * (j + 1)) as f64).collect();
    let mut p = vec![0usize; 10];
    let mut jk = vec![0usize; 10];
    let mut njk = 0;
    unsafe {
        assert_eq!(
            revqe_partition(a.as_ptr(), 10, 1.0 / 6.0, p.as_mut_ptr(), jk.as_mut_ptr(), 10, &mut njk),
            RevqeStatus::Ok
        );
    }
    assert_eq!(p, [1, 2, 3, 3, 5, 5, 7, 7, 7, 10]);
    assert_eq!(&jk[..njk], &[1, 2, 3, 5, 7, 10]);
    let mut small = [0usize; 2];
    unsafe {
        assert_eq!(
            revqe_partition(a.as_ptr(), 10, 1.0 / 6.0, p.as_mut_ptr(), small.as_mut_ptr(), 2, &mut njk),
            RevqeStatus::OutOfBounds
        );
        assert_eq!(
            revqe_partition(a.as_ptr(), 10, 0.0, p.as_mut_ptr(), ptr::null_mut(), 0, &mut njk),
            RevqeStatus::InvalidArgument
        );
    }
}

#[test]
fn null_pointers_and_error_reset() {
    unsafe {
        assert_eq!(revqe_profile_sphere(100, ptr::null_mut()), RevqeStatus::NullPointer);
        assert!(last_error().contains("out"));
        let mut v = 0.0;
        assert_eq!(revqe_profile_length(ptr::null(), &mut v), RevqeStatus::NullPointer);
        assert_eq!(revqe_legendre_assoc(1, 0, 0.2, &mut v), RevqeStatus::Ok);
    }
    assert!(revqe_last_error_message().is_null());
    let version = unsafe { CStr::from_ptr(revqe_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/revqe.h");
    for name in [
        "revqe_last_error_message",
        "revqe_profile_sphere",
        "revqe_profile_ellipsoid",
        "revqe_profile_table",
        "revqe_profile_free",
        "revqe_spectrum_solve",
        "revqe_spectrum_eigenfunction",
        "revqe_partition",
        "REVQE_STATUS_NUMERICAL_FAILURE",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles the C smoke program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) =
        ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = target_dir.join("librevqe_ffi.a");
    assert!(lib.exists(), "{}", lib.display());
    let crate_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let work = tempfile::tempdir().unwrap();
    let bin = work.path().join("smoke");
    let status = std::process::Command::new(cc)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
