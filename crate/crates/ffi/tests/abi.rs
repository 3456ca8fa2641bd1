use std::ffi::{CStr, CString};
use std::ptr;

use finsler_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(finsler_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

fn builtin(name: &str) -> *mut FinslerMetric {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { finsler_metric_builtin(c(name).as_ptr(), &mut m) },
        FinslerStatus::Ok
    );
    m
}

fn bundle(
    m: *const FinslerMetric,
    x: &[f64],
    y: &[f64],
) -> Result<*mut FinslerBundle, FinslerStatus> {
    let mut b = ptr::null_mut();
    match unsafe { finsler_bundle_compute(m, x.as_ptr(), y.as_ptr(), 0, 0, &mut b) } {
        FinslerStatus::Ok => Ok(b),
        s => Err(s),
    }
}

#[test]
fn h_curvature_through_the_abi() {
    let m = builtin("ex1");
    assert_eq!(unsafe { finsler_metric_dim(m) }, 4);
    let b = bundle(m, &[0.0, 1.0, 0.0, 0.0], &[1.0; 4]).unwrap();
    let (mut rank, mut len) = (0, 0);
    let name = c("chern-h");
    assert_eq!(
        unsafe { finsler_bundle_tensor_len(b, name.as_ptr(), &mut rank, &mut len) },
        FinslerStatus::Ok
    );
    assert_eq!((rank, len), (4, 256));
    let mut buf = vec![0.0; len];
    assert_eq!(
        unsafe { finsler_bundle_tensor(b, name.as_ptr(), buf.as_mut_ptr(), len) },
        FinslerStatus::Ok
    );
    // R^1_{1 1 2} at index (0,0,0,1)
    assert!((buf[1] - 5.0 / 18.0).abs() < 1e-12);
    assert_eq!(
        unsafe { finsler_bundle_tensor(b, name.as_ptr(), buf.as_mut_ptr(), 10) },
        FinslerStatus::BufferTooSmall
    );
    let mut e = 0.0;
    assert_eq!(
        unsafe { finsler_bundle_energy(b, &mut e) },
        FinslerStatus::Ok
    );
    assert!((e - 2.0).abs() < 1e-14);

    let mut basis = vec![0.0; 16];
    let mut mu = 0;
    let status = unsafe { finsler_nullity(b, name.as_ptr(), 0, 1e-8, basis.as_mut_ptr(), &mut mu) };
    assert_eq!((status, mu), (FinslerStatus::Ok, 2));
    for v in basis[..8].chunks(4) {
        assert!(v[0].abs() < 1e-10 && v[1].abs() < 1e-10);
    }
    unsafe {
        finsler_bundle_free(b);
        finsler_metric_free(m);
    }
}

#[test]
fn parsed_metric_energy_and_bracket() {
    let src = c("dim = 2\nE = y1^2 + exp(2*x1)*y2^2\n");
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { finsler_metric_parse(src.as_ptr(), &mut m) },
        FinslerStatus::Ok
    );
    let mut e = 0.0;
    let (x, y) = ([0.5, 0.0], [1.0, 2.0]);
    assert_eq!(
        unsafe { finsler_eval_energy(m, x.as_ptr(), y.as_ptr(), &mut e) },
        FinslerStatus::Ok
    );
    assert!((e - (1.0 + 4.0 * 1f64.exp())).abs() < 1e-12);

    let b = bundle(m, &x, &y).unwrap();
    let mut v = [f64::NAN; 2];
    let (a, w) = ([1.0, 0.0], [0.0, 1.0]);
    assert_eq!(
        unsafe { finsler_bracket_vertical(b, a.as_ptr(), w.as_ptr(), v.as_mut_ptr()) },
        FinslerStatus::Ok
    );
    assert!(v.iter().all(|c| c.is_finite()));
    unsafe {
        finsler_bundle_free(b);
        finsler_metric_free(m);
    }
}

#[test]
fn status_codes_and_messages() {
    let mut m = ptr::null_mut();
    let bad = c("dim = 2\nE = y1^2 + * y2\n");
    assert_eq!(
        unsafe { finsler_metric_parse(bad.as_ptr(), &mut m) },
        FinslerStatus::InvalidArgument
    );
    assert!(last_error().contains("syntax error"), "{}", last_error());
    assert!(m.is_null());

    let unknown = c("nope");
    assert_eq!(
        unsafe { finsler_metric_builtin(unknown.as_ptr(), &mut m) },
        FinslerStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { finsler_metric_builtin(ptr::null(), &mut m) },
        FinslerStatus::NullPointer
    );
    assert_eq!(unsafe { finsler_metric_dim(ptr::null()) }, 0);

    let ex2 = builtin("ex2");
    assert_eq!(
        bundle(ex2, &[1.0; 3], &[1.0, 1.0, 4.0]).unwrap_err(),
        FinslerStatus::Domain
    );

    let src = c("dim = 2\nE = y1^2\n");
    let mut deg = ptr::null_mut();
    assert_eq!(
        unsafe { finsler_metric_parse(src.as_ptr(), &mut deg) },
        FinslerStatus::Ok
    );
    assert_eq!(
        bundle(deg, &[0.0; 2], &[1.0; 2]).unwrap_err(),
        FinslerStatus::Degenerate
    );

    let mut b = ptr::null_mut();
    let (x, y) = ([0.0; 3], [0.0, 1.0, 1.0]);
    let ex3 = builtin("ex3");
    let status = unsafe { finsler_bundle_compute(ex3, x.as_ptr(), y.as_ptr(), 2, 4, &mut b) };
    assert_eq!(status, FinslerStatus::InsufficientOrders);

    let ok = bundle(ex3, &x, &y).unwrap();
    assert!(last_error().is_empty());
    let unknown_tensor = c("torsion");
    let (mut r, mut l) = (0, 0);
    assert_eq!(
        unsafe { finsler_bundle_tensor_len(ok, unknown_tensor.as_ptr(), &mut r, &mut l) },
        FinslerStatus::InvalidArgument
    );
    unsafe {
        finsler_bundle_free(ok);
        finsler_bundle_free(ptr::null_mut());
        finsler_metric_free(ex2);
        finsler_metric_free(ex3);
        finsler_metric_free(deg);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/finsler.h")).unwrap();
    for f in [
        "finsler_last_error",
        "finsler_metric_parse",
        "finsler_metric_builtin",
        "finsler_metric_dim",
        "finsler_metric_free",
        "finsler_eval_energy",
        "finsler_bundle_compute",
        "finsler_bundle_free",
        "finsler_bundle_energy",
        "finsler_bundle_tensor_len",
        "finsler_bundle_tensor",
        "finsler_nullity",
        "finsler_bracket_vertical",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("FINSLER_STATUS_DOMAIN = 3"));
}
