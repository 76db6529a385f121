use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use photon_engine_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pe_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(pe_version()) }.to_str().unwrap();
    assert_eq!(v, photon_engine::VERSION);
}

#[test]
fn calibrate_derive_and_steady_state() {
    unsafe {
        let p = pe_params_experimental();
        let mut theta = 0.0;
        assert_eq!(pe_calibrate_theta(p, 8000.0, &mut theta), PeStatus::Ok);
        let mut r = PeReservoir::default();
        assert_eq!(pe_reservoir_derive(p, theta, PE_PHASE_COHERENT, &mut r), PeStatus::Ok);
        assert!((r.t_r - 8000.0).abs() < 1e-6 * 8000.0);
        assert!((r.rho_ee + r.rho_gg - 1.0).abs() < 1e-12);

        let mut s: *mut PeFieldState = ptr::null_mut();
        assert_eq!(pe_steady_state(p, theta, PE_PHASE_COHERENT, 40, &mut s), PeStatus::Ok);
        assert_eq!(pe_state_dim(s), 40);
        let (mut n, mut g2) = (0.0, 0.0);
        assert_eq!(pe_state_stats(s, &mut n, &mut g2), PeStatus::Ok);
        // displaced thermal: n = |α|² + n_th with α = −2iλ/Γ_r
        let alpha_sq = 4.0 * (r.lambda_re.powi(2) + r.lambda_im.powi(2)) / r.gamma_r.powi(2);
        assert!((n - alpha_sq - r.n_th).abs() < 1e-9, "{n}");
        let mut pops = vec![0.0; 40];
        assert_eq!(pe_state_populations(s, pops.as_mut_ptr(), pops.len()), PeStatus::Ok);
        assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut e = 0.0;
        assert_eq!(pe_state_ergotropy(s, 1.0, &mut e), PeStatus::Ok);
        assert!((e - alpha_sq).abs() < 1e-6 * alpha_sq);
        assert!(pe_state_entropy(s) > 0.0);
        pe_state_free(s);
        pe_params_free(p);
    }
}

#[test]
fn cycle_ledger_closes() {
    unsafe {
        let p = pe_params_experimental();
        let mut theta = 0.0;
        assert_eq!(
            pe_params_set_delta_ac(p, 2.0 * std::f64::consts::PI * 0.5e6),
            PeStatus::Ok
        );
        assert_eq!(pe_calibrate_theta(p, 8000.0, &mut theta), PeStatus::Ok);
        assert_eq!(pe_params_set_delta_ac(p, 0.0), PeStatus::Ok);
        let mut l = PeCycleLedger::default();
        assert_eq!(pe_cycle_run(p, theta, 0.5e6, 1.0e6, 0, &mut l), PeStatus::Ok);
        assert!(l.w_out > 0.0);
        assert!((l.w_out - (l.q_in - l.q_out)).abs() <= 1e-9 * l.q_in);
        assert!((l.eta - (1.0 - l.n_th / l.n_sr)).abs() < 1e-12);
        assert!(l.entropy_change.iter().sum::<f64>().abs() < 1e-12);

        let mut t = PeCycleLedger::default();
        assert_eq!(pe_cycle_run(p, theta, 0.5e6, 1.0e6, 1, &mut t), PeStatus::Ok);
        assert!(t.w_out.abs() < 1e-9 * t.q_in.abs().max(1e-40));
        pe_params_free(p);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut theta = 0.0;
        assert_eq!(
            pe_calibrate_theta(ptr::null(), 8000.0, &mut theta),
            PeStatus::NullPointer
        );
        assert!(last_error().contains("null"));

        let p = pe_params_experimental();
        assert_eq!(pe_calibrate_theta(p, 8000.0, ptr::null_mut()), PeStatus::NullPointer);
        let mut r = PeReservoir::default();
        assert_eq!(pe_reservoir_derive(p, 1.0, 7, &mut r), PeStatus::InvalidArgument);
        assert!(last_error().contains("phase mode"));
        assert_eq!(pe_params_set_n_bar(p, -1.0), PeStatus::InvalidArgument);

        // strong flux of nearly inverted atoms drives the cavity past threshold
        assert_eq!(pe_params_set_n_bar(p, 5.0), PeStatus::Ok);
        let mut s: *mut PeFieldState = ptr::null_mut();
        assert_eq!(pe_steady_state(p, 0.3, PE_PHASE_COHERENT, 20, &mut s), PeStatus::Masing);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(pe_calibrate_theta(p, 8000.0, &mut theta), PeStatus::Ok);
        assert!(last_error().is_empty());
        assert_eq!(pe_state_dim(ptr::null()), 0);
        assert!(pe_state_entropy(ptr::null()).is_nan());
        pe_state_free(ptr::null_mut());
        pe_params_free(p);
        pe_params_free(ptr::null_mut());
        assert!(pe_params_with_products(0.03, -1.0, 1.0).is_null());
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if !have_cc() {
        eprintln!("cc not found; skipping header check");
        return;
    }
    let header = crate_dir().join("include/photon_engine.h");
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Wextra", "-x", lang])
            .arg(&header)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/abi-* -> target/<profile>
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libphoton_engine_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_client_links_and_runs() {
    let Some(lib) = static_lib().filter(|_| have_cc()) else {
        eprintln!("static library or cc unavailable; skipping link test");
        return;
    };
    let dir = tempfile_dir();
    let bin = dir.join("smoke");
    let out = Command::new("cc")
        .arg(crate_dir().join("examples/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("T_R 8000.0"), "{text}");
}

fn tempfile_dir() -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    std::fs::create_dir_all(&d).unwrap();
    d
}
