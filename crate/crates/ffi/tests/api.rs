use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gridform_ffi::*;

fn last_error() -> String {
    let p = gf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn benchmark_design(xi: f64, ts: f64) -> *mut GfDesign {
    let params = gf_params_benchmark();
    let mut d = ptr::null_mut();
    let s = unsafe { gf_design_new(&params, xi, ts, 20.0, GfPlacement::DecoupledVoltage, &mut d) };
    assert_eq!(s, GfStatus::Ok);
    assert!(!d.is_null());
    d
}

#[test]
fn design_getters() {
    let d = benchmark_design(0.4, 1.0);
    unsafe {
        let (mut delta0, mut v0) = (0.0, 0.0);
        assert_eq!(gf_design_operating_point(d, &mut delta0, &mut v0), GfStatus::Ok);
        assert!((delta0 - 0.0435).abs() < 5e-4 && (v0 - 0.9997).abs() < 5e-4);

        let mut g = [0.0; 4];
        assert_eq!(gf_design_linearized_gains(d, g.as_mut_ptr()), GfStatus::Ok);
        assert!((g[0] - 11.4761).abs() / 11.4761 < 5e-3);

        let (mut a, mut b) = ([0.0; 9], [0.0; 6]);
        assert_eq!(gf_design_state_space(d, a.as_mut_ptr(), b.as_mut_ptr()), GfStatus::Ok);
        assert!((a[2] - 0.1148).abs() < 1e-3 && (a[5] - 0.025).abs() < 1e-9);
        assert_eq!(b[0], 1.0);
        assert!((b[4] - 100.0 * std::f64::consts::PI).abs() < 1e-12);

        let mut k = [0.0; 6];
        assert_eq!(gf_design_gain(d, k.as_mut_ptr()), GfStatus::Ok);
        assert!((k[0] - 2.7756).abs() < 5e-3);
        assert!(k[3].abs() < 1e-9);

        let (mut re, mut im) = ([0.0; 3], [0.0; 3]);
        assert_eq!(gf_design_eigenvalues(d, re.as_mut_ptr(), im.as_mut_ptr()), GfStatus::Ok);
        let mut pairs: Vec<(f64, f64)> = re.iter().copied().zip(im).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        assert!((pairs[0].0 + 20.0).abs() < 1e-9);
        assert!((pairs[1].0 + 4.0).abs() < 1e-9 && (pairs[1].1.abs() - 84f64.sqrt()).abs() < 1e-9);

        gf_design_free(d);
    }
}

#[test]
fn simulate_and_measure() {
    let d = benchmark_design(0.707, 1.0);
    unsafe {
        let mut traj = ptr::null_mut();
        let s = gf_design_simulate_step(d, GfSetpoint::PSet, 1.0, 1.0, 6.0, 1e-3, 10, &mut traj);
        assert_eq!(s, GfStatus::Ok);
        assert_eq!(gf_trajectory_len(traj), 601);

        let mut sample = std::mem::zeroed::<GfSample>();
        assert_eq!(gf_trajectory_sample(traj, 600, &mut sample), GfStatus::Ok);
        assert!((sample.t - 6.0).abs() < 1e-12 && (sample.p - 1.0).abs() < 1e-3);
        assert_eq!(gf_trajectory_sample(traj, 601, &mut sample), GfStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let mut m = std::mem::zeroed::<GfStepMetrics>();
        assert_eq!(gf_trajectory_step_metrics(traj, GfSignal::P, 1.0, 0.02, &mut m), GfStatus::Ok);
        assert!((m.overshoot - 4.25).abs() < 0.1, "{m:?}");
        assert!((m.settling_time - 1.0).abs() < 0.5);

        gf_trajectory_free(traj);
        gf_design_free(d);
    }
}

#[test]
fn error_codes() {
    let mut params = gf_params_benchmark();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(
            gf_design_new(ptr::null(), 0.4, 1.0, 20.0, GfPlacement::Default, &mut d),
            GfStatus::NullPointer
        );
        assert_eq!(gf_design_new(&params, 1.5, 1.0, 20.0, GfPlacement::Default, &mut d), GfStatus::InvalidArgument);
        assert!(d.is_null());

        params.d_p = 0.0;
        assert_eq!(gf_design_new(&params, 0.4, 1.0, 20.0, GfPlacement::Default, &mut d), GfStatus::Uncontrollable);
        assert!(last_error().contains("rank 2"), "{}", last_error());

        params.d_p = 0.01;
        params.p_set = 50.0;
        assert_eq!(gf_design_new(&params, 0.4, 1.0, 20.0, GfPlacement::Default, &mut d), GfStatus::NoEquilibrium);

        let mut x = 0.0;
        assert_eq!(gf_design_gain(ptr::null(), &mut x), GfStatus::NullPointer);
        assert_eq!(gf_trajectory_len(ptr::null()), 0);
        gf_design_free(ptr::null_mut());
        gf_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn overshoot_helpers() {
    let (mut po, mut xi) = (0.0, 0.0);
    unsafe {
        assert_eq!(gf_po_from_damping(0.4, &mut po), GfStatus::Ok);
        assert!((po - 25.38).abs() < 5e-3);
        assert_eq!(gf_damping_from_po(po, &mut xi), GfStatus::Ok);
        assert!((xi - 0.4).abs() < 1e-12);
        assert_eq!(gf_po_from_damping(0.0, &mut po), GfStatus::InvalidArgument);
    }
    let v = unsafe { CStr::from_ptr(gf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gridform.h")).unwrap();
    for name in [
        "typedef struct GfDesign GfDesign;",
        "GF_STATUS_UNCONTROLLABLE = 4",
        "gf_design_new(",
        "gf_design_free(",
        "gf_trajectory_step_metrics(",
        "gf_last_error_message(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Compiles `tests/c/smoke.c` against the header and static library when a C
/// compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("cc not found, skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libgridform_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("gridform_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("samples=601"), "{stdout}");
}
