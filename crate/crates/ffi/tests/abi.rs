use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use rismod_ffi::*;

fn last_error() -> String {
    let p = rismod_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn link(n: usize) -> RismodLink {
    // SAFETY: every pointer passed below is null or a live local.
    unsafe {
        let mut l = RismodLink {
            elements: 0,
            rx_antennas: 0,
            kappa: 0.0,
            phase_bits: 0,
            ra_spacing_over_lambda: 0.0,
            aoa_phi: 0.0,
            rho: 0.0,
        };
        assert_eq!(rismod_link_default(n, 1, 1.0, 3, &mut l), RismodStatus::Ok);
        l
    }
}

#[test]
fn scalar_functions() {
    // SAFETY: every pointer passed below is null or a live local.
    unsafe {
        let mut l = link(64);
        l.rx_antennas = 4;
        l.rho = 2.0;
        let (mut rp, mut kp) = (0.0, 0.0);
        assert_eq!(
            rismod_equivalent_link(&l, &mut rp, &mut kp),
            RismodStatus::Ok
        );
        assert!((rp - 5.0).abs() < 1e-12 && kp == 4.0);
        assert!(rismod_last_error().is_null());

        let mut idx = 99;
        assert_eq!(
            rismod_quantize_phase(-1.0, 0.0, 1, &mut idx),
            RismodStatus::Ok
        );
        assert_eq!(idx, 1);
        assert_eq!(
            rismod_quantize_phase(0.0, 0.0, 3, &mut idx),
            RismodStatus::UndefinedPhase
        );
        assert!(last_error().contains("undefined phase"));

        let mut x = 0.0;
        assert_eq!(rismod_laguerre_half(1.0, &mut x), RismodStatus::Ok);
        assert!((x - 1.4464913440831717).abs() < 1e-12);
        assert_eq!(
            rismod_laguerre_half(-1.0, &mut x),
            RismodStatus::ConfigError
        );
        assert_eq!(
            rismod_laguerre_half(1.0, ptr::null_mut()),
            RismodStatus::NullPointer
        );
        assert!(last_error().contains("out"));

        let g = [3.0, 1.0];
        let q = [2.0, 5.0];
        assert_eq!(
            rismod_sep_qapsk_theory(g.as_ptr(), q.as_ptr(), 2, 0.0, 16, 4, &mut x),
            RismodStatus::Ok
        );
        assert!((x - 1.5).abs() < 1e-15);
        let a = [10.0; 4];
        assert_eq!(
            rismod_sep_apsk_theory(a.as_ptr(), 4, 1e6, 32, 8, &mut x),
            RismodStatus::Ok
        );
        assert!(x < 1e-12);
        assert_eq!(
            rismod_sep_apsk_theory(a.as_ptr(), 3, 1.0, 32, 8, &mut x),
            RismodStatus::ConfigError
        );
        assert_eq!(
            rismod_sep_apsk_theory(ptr::null(), 4, 1.0, 32, 8, &mut x),
            RismodStatus::NullPointer
        );
    }
}

#[test]
fn constellation_handle_lifecycle() {
    // SAFETY: every pointer passed below is null or a live local.
    unsafe {
        let l = link(64);
        let mut c = ptr::null_mut();
        assert_eq!(
            rismod_constellation_draw(&l, RismodScheme::Qapsk, 16, 4, 7, 0, &mut c),
            RismodStatus::Ok
        );
        assert_eq!(rismod_constellation_len(c), 16);
        let (mut re, mut im) = (vec![0.0; 16], vec![0.0; 16]);
        assert_eq!(
            rismod_constellation_points(c, re.as_mut_ptr(), im.as_mut_ptr(), 16),
            RismodStatus::Ok
        );
        assert_eq!(
            rismod_constellation_points(c, re.as_mut_ptr(), im.as_mut_ptr(), 15),
            RismodStatus::ConfigError
        );
        let rho = 0.01f64;
        for k in 0..16 {
            let mut idx = 99;
            let s = rismod_constellation_detect(
                c,
                re[k] * rho.sqrt(),
                im[k] * rho.sqrt(),
                rho,
                &mut idx,
            );
            assert_eq!((s, idx), (RismodStatus::Ok, k));
        }
        let mut bits = 0.0;
        assert_eq!(
            rismod_constellation_capacity(c, 1e9, 16, &mut bits),
            RismodStatus::Ok
        );
        assert!((bits - 4.0).abs() < 1e-3);
        assert_eq!(
            rismod_constellation_capacity(c, 1.0, 0, &mut bits),
            RismodStatus::ConfigError
        );
        rismod_constellation_free(c);

        // Same seed and channel index give the same points.
        let mut d = ptr::null_mut();
        assert_eq!(
            rismod_constellation_draw(&l, RismodScheme::Qapsk, 16, 4, 7, 0, &mut d),
            RismodStatus::Ok
        );
        let (mut re2, mut im2) = (vec![0.0; 16], vec![0.0; 16]);
        rismod_constellation_points(d, re2.as_mut_ptr(), im2.as_mut_ptr(), 16);
        assert_eq!((re, im), (re2, im2));
        rismod_constellation_free(d);

        let mut e = ptr::null_mut();
        assert_eq!(
            rismod_constellation_mean(&l, RismodScheme::Apsk, 16, 8, &mut e),
            RismodStatus::Ok
        );
        assert_eq!(rismod_constellation_len(e), 16);
        rismod_constellation_free(e);
        assert_eq!(
            rismod_constellation_draw(&l, RismodScheme::Apsk, 16, 16, 1, 0, &mut e),
            RismodStatus::ConfigError
        );
        assert!(
            last_error().contains("V must divide 2^B"),
            "{}",
            last_error()
        );

        assert_eq!(rismod_constellation_len(ptr::null()), 0);
        rismod_constellation_free(ptr::null_mut());
        let mut idx = 0;
        assert_eq!(
            rismod_constellation_detect(ptr::null(), 0.0, 0.0, 1.0, &mut idx),
            RismodStatus::NullPointer
        );
    }
}

#[test]
fn run_job_returns_csv() {
    // SAFETY: every pointer passed below is null or a live local.
    unsafe {
        let cfg = CString::new(
            r#"{"link":{"elements":16,"rx_antennas":1,"kappa":1.0,"phase_bits":3},
            "scheme":{"kind":"apsk","m":16,"v":4},"snr_db":[-10.0,0.0],
            "trials_per_point":200,"channels_per_point":4,"seed":3}"#,
        )
        .unwrap();
        let mut a = ptr::null_mut();
        assert_eq!(
            rismod_run_job(RismodJob::Sep, cfg.as_ptr(), 2, &mut a),
            RismodStatus::Ok
        );
        let text = CStr::from_ptr(rismod_artifact_csv(a))
            .to_str()
            .unwrap()
            .to_owned();
        assert!(text.starts_with("# rismod "));
        assert!(text.contains("\nsnr_db,metric,value,stderr,trials,channels\n"));
        assert_eq!(text.lines().filter(|l| l.contains(",sep_sim,")).count(), 2);
        rismod_artifact_free(a);

        let mut b = ptr::null_mut();
        assert_eq!(
            rismod_run_job(RismodJob::Sep, cfg.as_ptr(), 1, &mut b),
            RismodStatus::Ok
        );
        assert_eq!(
            CStr::from_ptr(rismod_artifact_csv(b)).to_str().unwrap(),
            text
        );
        rismod_artifact_free(b);

        let bad = CString::new(r#"{"link":{}}"#).unwrap();
        assert_eq!(
            rismod_run_job(RismodJob::Sep, bad.as_ptr(), 1, &mut a),
            RismodStatus::ConfigError
        );
        assert_eq!(
            rismod_run_job(RismodJob::Sep, ptr::null(), 1, &mut a),
            RismodStatus::NullPointer
        );
        assert!(rismod_artifact_csv(ptr::null()).is_null());
        let v = CStr::from_ptr(rismod_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn generated_header_declares_the_api() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/rismod.h");
    let h = std::fs::read_to_string(path).unwrap();
    for name in [
        "RISMOD_STATUS_OK = 0",
        "RISMOD_STATUS_PANIC = 7",
        "typedef struct RismodConstellation RismodConstellation;",
        "typedef struct RismodArtifact RismodArtifact;",
        "const char *rismod_last_error(void);",
        "RismodStatus rismod_constellation_draw(",
        "void rismod_constellation_free(struct RismodConstellation *c);",
        "RismodStatus rismod_run_job(",
        "const char *rismod_artifact_csv(const struct RismodArtifact *a);",
        "RismodStatus rismod_sep_qapsk_theory(",
    ] {
        assert!(h.contains(name), "header lacks `{name}`");
    }
    // The header must stand alone as C.
    let out = Command::new("cc")
        .args([
            "-std=c99",
            "-Wall",
            "-Werror",
            "-fsyntax-only",
            "-x",
            "c",
            path,
        ])
        .output();
    match out {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => panic!("no C compiler to check the header: {e}"),
    }
}
