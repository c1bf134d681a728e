//! Exit criteria for the benchmark converter. Each test prints one
//! `PASS`/`FAIL` line before asserting.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{Matrix2x3, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridform::config::DesignConfig;
use gridform::cubic::{characteristic_polynomial, C64};
use gridform::design::{spec_to_targets, target_polynomial};
use gridform::metrics::step_metrics_series;
use gridform::placement::{closed_loop_eigs, closed_loop_matrix, place_poles_with, ParameterMatrix};
use gridform::powerflow::{compute_power, linearize, solve_operating_point};
use gridform::sim::{simulate_linear, simulate_nonlinear, SetpointEvent, SetpointTarget, SimConfig};
use gridform::statespace::{build_state_space, controllability, controllability_matrix, DEFAULT_RANK_TOL};
use gridform::verify::reference_feedback;
use gridform::{LinearizedGains, OperatingPoint, PlantMatrices, SystemParams};

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!("{} criterion {id:>2} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn benchmark_plant() -> (SystemParams, PlantMatrices) {
    let params = SystemParams::benchmark();
    let op = solve_operating_point(&params).unwrap();
    let gains = linearize(&params, &op).unwrap();
    (params, build_state_space(&params, &gains))
}

fn designed_gains(plant: &PlantMatrices) -> Vec<(String, f64, f64, Matrix2x3<f64>)> {
    DesignConfig::benchmark()
        .cases
        .iter()
        .map(|c| {
            let targets = spec_to_targets(&c.spec()).unwrap();
            let fb = place_poles_with(plant, &targets, &ParameterMatrix::DecoupledVoltage).unwrap();
            (c.name.clone(), c.xi, c.ts, fb.k)
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Greedy nearest-neighbour matching of two spectra, relative to the target.
fn spectrum_error(got: &[C64], want: &[C64]) -> f64 {
    let mut used = vec![false; got.len()];
    let mut worst: f64 = 0.0;
    for w in want {
        let (j, d) = got
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, g)| (j, (g - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d / w.norm());
    }
    worst
}

#[test]
fn criterion_01_operating_point() {
    let params = SystemParams::benchmark();
    let op = solve_operating_point(&params).unwrap();
    let fastest = (0..20)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(solve_operating_point(std::hint::black_box(&params)).unwrap());
            t.elapsed()
        })
        .min()
        .unwrap();
    let err = (op.delta0 - 0.0435).abs().max((op.v0 - 0.9997).abs());
    report(
        1,
        "operating point",
        err <= 5e-4 && fastest < Duration::from_millis(1),
        format!("delta0 = {:.6}, v0 = {:.6}, max abs err = {err:.2e}, time = {fastest:?}", op.delta0, op.v0),
    );
}

#[test]
fn criterion_02_linearized_gains() {
    let params = SystemParams::benchmark();
    let g = linearize(&params, &solve_operating_point(&params).unwrap()).unwrap();
    let want = [11.4761, 0.5002, 0.5000, 11.4939];
    let err = g.as_array().iter().zip(want).map(|(a, b)| rel(*a, b)).fold(0.0, f64::max);
    report(2, "linearized gains", err <= 5e-3, format!("{:?}, max rel err = {err:.2e}", g.as_array()));
}

#[test]
fn criterion_03_state_space_and_controllability() {
    let (_, plant) = benchmark_plant();
    let got = [
        plant.a[(0, 2)],
        plant.a[(1, 2)],
        plant.b[(0, 0)],
        plant.b[(0, 1)],
        plant.b[(1, 1)],
        plant.b[(2, 0)],
    ];
    let want = [0.1148, 0.025, 1.0, 0.005, 1.5747, 314.1593];
    let ab_err = got.iter().zip(want).map(|(a, b)| rel(*a, b)).fold(0.0, f64::max);
    let zeros_ok = (0..3).all(|i| (0..3).all(|j| (i, j) == (0, 2) || (i, j) == (1, 2) || plant.a[(i, j)] == 0.0))
        && plant.b[(1, 0)] == 0.0
        && plant.b[(2, 1)] == 0.0;

    let p = controllability_matrix(&plant);
    let p_err = rel(p[(0, 2)], 36.0533).max(rel(p[(1, 2)], 7.854));
    let r = controllability(&plant, DEFAULT_RANK_TOL).unwrap();
    report(
        3,
        "state space",
        ab_err <= 1e-3 && zeros_ok && p_err <= 1e-3 && r.rank == 3,
        format!("A/B max rel err = {ab_err:.2e}, P max rel err = {p_err:.2e}, rank = {}", r.rank),
    );
}

#[test]
fn criterion_04_placement_certificate() {
    let (_, plant) = benchmark_plant();
    let mut worst_eig: f64 = 0.0;
    let mut worst_poly: f64 = 0.0;
    for c in DesignConfig::benchmark().cases {
        let targets = spec_to_targets(&c.spec()).unwrap();
        let want_poly = target_polynomial(&targets).unwrap();
        for choice in [ParameterMatrix::DecoupledVoltage, ParameterMatrix::default()] {
            let k = place_poles_with(&plant, &targets, &choice).unwrap().k;
            let m: Matrix3<f64> = closed_loop_matrix(&plant, &k);
            // general-purpose eigen solver as an independent route
            let eigs: Vec<C64> = m.complex_eigenvalues().iter().copied().collect();
            worst_eig = worst_eig.max(spectrum_error(&eigs, targets.as_array()));
            worst_eig = worst_eig.max(spectrum_error(&closed_loop_eigs(&plant, &k), targets.as_array()));
            let got_poly = characteristic_polynomial(&m);
            for i in 1..4 {
                worst_poly = worst_poly.max(rel(got_poly[i], want_poly[i]));
            }
        }
    }
    report(
        4,
        "placement certificate",
        worst_eig <= 1e-8 && worst_poly <= 1e-8,
        format!("max eigenvalue rel err = {worst_eig:.2e}, max coefficient rel err = {worst_poly:.2e}"),
    );
}

#[test]
fn criterion_05_reference_gain_cross_check() {
    let (_, plant) = benchmark_plant();
    let m = closed_loop_matrix(&plant, &reference_feedback(0));
    let eigs: Vec<C64> = m.complex_eigenvalues().iter().copied().collect();
    let want = [C64::new(-4.0, 9.165), C64::new(-4.0, -9.165), C64::new(-20.0, 0.0)];
    let err = spectrum_error(&eigs, &want);
    let roots: Vec<String> = eigs.iter().map(|z| format!("{:.4}{:+.4}j", z.re, z.im)).collect();
    report(
        5,
        "reference gain cross-check",
        err <= 0.15,
        format!("roots = [{}], max rel distance = {err:.2e}", roots.join(", ")),
    );
}

#[test]
fn criterion_06_step_response_properties() {
    let (params, plant) = benchmark_plant();
    let cfg = SimConfig::new(8.0, 1e-4, 10).unwrap();
    let ev = [SetpointEvent { time: 1.0, target: SetpointTarget::PSet, value: 1.0 }];
    let mut rows = Vec::new();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, _, ts, k) in designed_gains(&plant) {
        let t0 = Instant::now();
        let traj = simulate_nonlinear(&params, &k, &ev, &cfg).unwrap();
        let elapsed = t0.elapsed();
        let t = traj.times();
        let p = traj.signal(gridform::sim::Signal::P);
        let omega = traj.signal(gridform::sim::Signal::Omega);
        let m = step_metrics_series(&t, &p, 1.0, 0.02).unwrap();
        let tail = (t.len() as f64 * 0.05).ceil() as usize;
        let final_p = p[p.len() - tail..].iter().sum::<f64>() / tail as f64;
        let final_w = omega[omega.len() - tail..].iter().sum::<f64>() / tail as f64;
        let settle_ok = (m.settling_time - ts).abs() <= 0.5 * ts;
        let final_ok = (final_p - 1.0).abs() <= 1e-3 && (final_w - params.omega_g).abs() <= 1e-6;
        let time_ok = elapsed < Duration::from_secs(5);
        ok &= settle_ok && final_ok && time_ok;
        notes.push(format!(
            "{name}: OS {:.2}% Ts {:.3}s p_f {final_p:.6} w_f {final_w:.8} ({elapsed:.2?})",
            m.overshoot, m.settling_time
        ));
        rows.push(m);
    }
    let order_ok = rows[0].overshoot > rows[2].overshoot
        && rows[1].overshoot > rows[3].overshoot
        && rows[0].settling_time < rows[1].settling_time
        && rows[2].settling_time < rows[3].settling_time;
    report(6, "step response properties", ok && order_ok, format!("orderings ok = {order_ok}; {}", notes.join("; ")));
}

/// Central differences of `compute_power`.
fn finite_difference_gains(params: &SystemParams, delta: f64, v: f64) -> [f64; 4] {
    let hd = 1e-6 * delta.abs().max(1.0);
    let hv = 1e-6 * v;
    let pq = |d: f64, vv: f64| compute_power(params, d, vv).unwrap();
    let (pd1, qd1) = pq(delta + hd, v);
    let (pd0, qd0) = pq(delta - hd, v);
    let (pv1, qv1) = pq(delta, v + hv);
    let (pv0, qv0) = pq(delta, v - hv);
    [
        (pd1 - pd0) / (2.0 * hd),
        (pv1 - pv0) / (2.0 * hv),
        (qd1 - qd0) / (2.0 * hd),
        (qv1 - qv0) / (2.0 * hv),
    ]
}

#[test]
fn criterion_07_linearization_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let params = SystemParams {
            v_g: rng.gen_range(0.9..1.1),
            r_g: rng.gen_range(0.0..0.05),
            x_g: rng.gen_range(0.05..0.3),
            ..SystemParams::benchmark()
        };
        let op = OperatingPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.85..1.15)).unwrap();
        let g = linearize(&params, &op).unwrap();
        let fd = finite_difference_gains(&params, op.delta0, op.v0);
        for (a, b) in g.as_array().iter().zip(fd) {
            worst = worst.max(rel(*a, b));
        }
    }
    report(7, "linearization consistency", worst < 1e-5, format!("100 points, max rel err = {worst:.2e}"));
}

#[test]
fn criterion_08_small_signal_equivalence() {
    let (params, plant) = benchmark_plant();
    let step = 0.02;
    let event = 0.5;
    let cfg = SimConfig::new(5.0, 1e-4, 10).unwrap();
    let lin_cfg = SimConfig::new(5.0 - event, 1e-4, 10).unwrap();
    // a p_set step shifts e1 by -d_p * step and leaves the other states
    let magnitude = params.d_p * step;
    let mut worst: f64 = 0.0;
    for (_, _, _, k) in designed_gains(&plant) {
        let ev = [SetpointEvent { time: event, target: SetpointTarget::PSet, value: params.p_set + step }];
        let nl = simulate_nonlinear(&params, &k, &ev, &cfg).unwrap();
        let lin = simulate_linear(&plant, &k, &Vector3::new(-magnitude, 0.0, 0.0), &lin_cfg).unwrap();
        let after: Vec<_> = nl.samples.iter().filter(|s| s.t >= event - 1e-9).collect();
        assert_eq!(after.len(), lin.samples.len());
        for (a, b) in after.iter().zip(&lin.samples) {
            assert!((a.t - event - b.t).abs() < 1e-9);
            worst = worst.max((a.e1 - b.e1).abs()).max((a.e2 - b.e2).abs());
        }
    }
    report(
        8,
        "small-signal equivalence",
        worst <= 0.02 * magnitude,
        format!("max |de| = {worst:.3e} vs bound {:.3e} (2% of the e1 step)", 0.02 * magnitude),
    );
}

#[test]
fn criterion_09_controllability_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut disagreements = 0;
    let mut degenerate = 0;
    for i in 0..200 {
        let params = SystemParams {
            d_p: if i % 4 == 0 { 0.0 } else { rng.gen_range(0.001..0.1) },
            d_q: rng.gen_range(0.0..0.2),
            omega_b: rng.gen_range(50.0..400.0),
            ..SystemParams::benchmark()
        };
        let gains = LinearizedGains {
            k_pdelta: rng.gen_range(-20.0..20.0),
            k_pv: rng.gen_range(-2.0..2.0),
            k_qdelta: rng.gen_range(-2.0..2.0),
            k_qv: rng.gen_range(-20.0..20.0),
        };
        let plant = build_state_space(&params, &gains);
        let r = controllability(&plant, DEFAULT_RANK_TOL).unwrap();
        let (dp, dq) = (params.d_p, params.d_q);
        let closed_form = dp * (gains.k_pv * dq * gains.k_qdelta - gains.k_pdelta * (1.0 + dq * gains.k_qv)) != 0.0;
        if params.d_p == 0.0 {
            degenerate += 1;
            if r.rank != 2 {
                disagreements += 1;
            }
        }
        if closed_form != r.controllable {
            disagreements += 1;
        }
    }
    report(
        9,
        "controllability criterion",
        disagreements == 0,
        format!("200 draws ({degenerate} with d_p = 0), disagreements = {disagreements}"),
    );
}

fn analytic_second_order(xi: f64, wn: f64, dt: f64, t_end: f64) -> (Vec<f64>, Vec<f64>) {
    let wd = wn * (1.0 - xi * xi).sqrt();
    let phi = xi.acos();
    let n = (t_end / dt).round() as usize;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let y = t
        .iter()
        .map(|&ti| 1.0 - (-xi * wn * ti).exp() / (1.0 - xi * xi).sqrt() * (wd * ti + phi).sin())
        .collect();
    (t, y)
}

#[test]
fn criterion_10_metrics_oracle() {
    let mut ok = true;
    let mut notes = Vec::new();
    for xi in [0.4, 0.707] {
        let ts = 1.0;
        let wn = 4.0 / (xi * ts);
        let (t, y) = analytic_second_order(xi, wn, 1e-4, 8.0);
        let m = step_metrics_series(&t, &y, 0.0, 0.02).unwrap();
        let po = 100.0 * (-PI * xi / (1.0 - xi * xi).sqrt()).exp();
        let os_ok = (m.overshoot - po).abs() <= 0.2;
        let ts_ok = (m.settling_time - ts).abs() <= 0.15 * ts;
        ok &= os_ok && ts_ok;
        notes.push(format!(
            "xi {xi}: OS {:.3}% (want {po:.3}%), Ts {:.4}s (want {ts:.4}s, {:+.1}%)",
            m.overshoot,
            m.settling_time,
            100.0 * (m.settling_time - ts) / ts
        ));
    }
    report(10, "metrics extractor oracle", ok, notes.join("; "));
}
