//! Built-in regression fixtures for the benchmark converter.

use nalgebra::{Matrix2x3, Vector3};

use crate::config::DesignConfig;
use crate::cubic::C64;
use crate::design::{spec_to_targets, target_polynomial};
use crate::error::Result;
use crate::placement::{closed_loop_eigs, max_relative_error, place_poles_with, poly_relative_error, ParameterMatrix};
use crate::powerflow::{linearize, solve_operating_point, SystemParams};
use crate::sim::{simulate_linear, simulate_nonlinear, SetpointEvent, SetpointTarget, SimConfig};
use crate::statespace::{build_state_space, controllability, PlantMatrices, DEFAULT_RANK_TOL};

/// Reported operating point of the benchmark converter.
pub const REFERENCE_OPERATING_POINT: (f64, f64) = (0.0435, 0.9997);
/// Reported `(k_pdelta, k_pv, k_qdelta, k_qv)`.
pub const REFERENCE_GAINS: [f64; 4] = [11.4761, 0.5002, 0.5, 11.4939];
/// Reported nonzero entries `A[0][2], A[1][2]`, `B[0][0], B[0][1], B[1][1], B[2][0]`.
pub const REFERENCE_A: [f64; 2] = [0.1148, 0.025];
pub const REFERENCE_B: [f64; 4] = [1.0, 0.005, 1.5747, 314.1593];
/// Reported third column of the controllability matrix.
pub const REFERENCE_P_COLUMN: [f64; 2] = [36.0533, 7.854];
/// Published gain matrices of the four benchmark cases, rounded to four
/// decimals.
pub const REFERENCE_FEEDBACK: [[[f64; 3]; 2]; 4] = [
    [[2.7756, -0.0088, 0.0166], [0.0367, 12.7007, 0.0161]],
    [[0.6939, -0.0022, 0.0105], [0.0389, 12.7007, 0.0161]],
    [[0.8885, -0.0028, 0.0226], [0.0385, 12.7007, 0.0161]],
    [[0.2221, -0.0007, 0.012], [0.0399, 12.7007, 0.0161]],
];

pub fn reference_feedback(case: usize) -> Matrix2x3<f64> {
    let r = &REFERENCE_FEEDBACK[case];
    Matrix2x3::from_fn(|i, j| r[i][j])
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

pub struct Fixture {
    pub name: &'static str,
    pub default_tol: f64,
    run: fn(f64) -> Result<(bool, String)>,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture { name: "operating_point", default_tol: 5e-4, run: operating_point },
    Fixture { name: "linearized_gains", default_tol: 5e-3, run: linearized_gains },
    Fixture { name: "state_space", default_tol: 1e-3, run: state_space },
    Fixture { name: "controllability", default_tol: 1e-3, run: controllability_fixture },
    Fixture { name: "placement", default_tol: 1e-8, run: placement },
    Fixture { name: "reference_gains", default_tol: 0.15, run: reference_gains },
    Fixture { name: "small_signal", default_tol: 0.02, run: small_signal },
    Fixture { name: "steady_state", default_tol: 1e-3, run: steady_state },
];

pub fn find_fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

impl Fixture {
    /// Runs with `tol` in place of the default tolerance.
    pub fn run(&self, tol: Option<f64>) -> FixtureOutcome {
        let tolerance = tol.unwrap_or(self.default_tol);
        let (passed, detail) = match (self.run)(tolerance) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        FixtureOutcome { name: self.name, tolerance, passed, detail }
    }
}

pub fn render_outcomes(outcomes: &[FixtureOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&format!(
            "{:<5} {:<18} tol={:<8e} {}\n",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.tolerance,
            o.detail
        ));
    }
    s
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Bench {
    params: SystemParams,
    plant: PlantMatrices,
}

fn bench() -> Result<Bench> {
    let params = SystemParams::benchmark();
    let op = solve_operating_point(&params)?;
    let gains = linearize(&params, &op)?;
    Ok(Bench { params, plant: build_state_space(&params, &gains) })
}

fn operating_point(tol: f64) -> Result<(bool, String)> {
    let op = solve_operating_point(&SystemParams::benchmark())?;
    let (d, v) = REFERENCE_OPERATING_POINT;
    let err = (op.delta0 - d).abs().max((op.v0 - v).abs());
    Ok((err <= tol, format!("delta0 = {:.6}, v0 = {:.6}, max abs err = {err:.2e}", op.delta0, op.v0)))
}

fn linearized_gains(tol: f64) -> Result<(bool, String)> {
    let params = SystemParams::benchmark();
    let g = linearize(&params, &solve_operating_point(&params)?)?;
    let err = g
        .as_array()
        .iter()
        .zip(REFERENCE_GAINS.iter())
        .map(|(a, b)| rel(*a, *b))
        .fold(0.0, f64::max);
    Ok((err <= tol, format!("max rel err = {err:.2e}")))
}

fn state_space(tol: f64) -> Result<(bool, String)> {
    let Bench { plant, .. } = bench()?;
    let got = [
        plant.a[(0, 2)],
        plant.a[(1, 2)],
        plant.b[(0, 0)],
        plant.b[(0, 1)],
        plant.b[(1, 1)],
        plant.b[(2, 0)],
    ];
    let want = [REFERENCE_A[0], REFERENCE_A[1], REFERENCE_B[0], REFERENCE_B[1], REFERENCE_B[2], REFERENCE_B[3]];
    let err = got.iter().zip(want.iter()).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    let structured = plant.has_droop_structure() && (plant.a * plant.a).iter().all(|v| *v == 0.0);
    Ok((err <= tol && structured, format!("max rel err = {err:.2e}, structure ok = {structured}")))
}

fn controllability_fixture(tol: f64) -> Result<(bool, String)> {
    let Bench { plant, .. } = bench()?;
    let r = controllability(&plant, DEFAULT_RANK_TOL)?;
    let err = rel(r.p_matrix[(0, 2)], REFERENCE_P_COLUMN[0]).max(rel(r.p_matrix[(1, 2)], REFERENCE_P_COLUMN[1]));
    Ok((err <= tol && r.rank == 3, format!("rank = {}, max rel err = {err:.2e}", r.rank)))
}

fn placement(tol: f64) -> Result<(bool, String)> {
    let Bench { plant, .. } = bench()?;
    let mut worst: f64 = 0.0;
    for case in DesignConfig::benchmark().cases {
        let targets = spec_to_targets(&case.spec())?;
        let want = target_polynomial(&targets)?;
        for choice in [ParameterMatrix::default(), ParameterMatrix::DecoupledVoltage] {
            let fb = place_poles_with(&plant, &targets, &choice)?;
            let eig_err = max_relative_error(&closed_loop_eigs(&plant, &fb.k), targets.as_array());
            worst = worst.max(eig_err).max(poly_relative_error(&plant, &fb.k, &want));
        }
    }
    Ok((worst <= tol, format!("worst eigenvalue/polynomial rel err = {worst:.2e}")))
}

fn reference_gains(tol: f64) -> Result<(bool, String)> {
    let Bench { plant, .. } = bench()?;
    let targets = spec_to_targets(&DesignConfig::benchmark().cases[0].spec())?;
    let eigs = closed_loop_eigs(&plant, &reference_feedback(0));
    let err = max_relative_error(&eigs, targets.as_array());
    let roots: Vec<String> = eigs.iter().map(|z: &C64| format!("{:.4}{:+.4}j", z.re, z.im)).collect();
    Ok((err <= tol, format!("roots = [{}], max rel err = {err:.2e}", roots.join(", "))))
}

/// Largest `|e_nonlinear − e_linear|` over a small active-power step,
/// relative to the initial jump `d_p·|step|` of `e1`.
pub fn small_signal_deviation(
    params: &SystemParams,
    plant: &PlantMatrices,
    k: &Matrix2x3<f64>,
    step: f64,
    cfg: &SimConfig,
    event_time: f64,
) -> Result<f64> {
    let ev = SetpointEvent { time: event_time, target: SetpointTarget::PSet, value: params.p_set + step };
    let nl = simulate_nonlinear(params, k, &[ev], cfg)?;
    let lin_cfg = SimConfig { t_end: cfg.t_end - event_time, ..*cfg };
    let x0 = Vector3::new(-params.d_p * step, 0.0, 0.0);
    let lin = simulate_linear(plant, k, &x0, &lin_cfg)?;
    let start = nl.samples.iter().position(|s| s.t >= event_time - 1e-9).unwrap_or(0);
    let scale = (params.d_p * step).abs();
    let worst = nl.samples[start..]
        .iter()
        .zip(lin.samples.iter())
        .map(|(a, b)| (a.e1 - b.e1).abs().max((a.e2 - b.e2).abs()))
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

fn small_signal(tol: f64) -> Result<(bool, String)> {
    let Bench { params, plant } = bench()?;
    let cfg = SimConfig::new(5.0, 1e-3, 1)?;
    let mut worst: f64 = 0.0;
    for case in DesignConfig::benchmark().cases {
        let targets = spec_to_targets(&case.spec())?;
        let fb = place_poles_with(&plant, &targets, &ParameterMatrix::DecoupledVoltage)?;
        worst = worst.max(small_signal_deviation(&params, &plant, &fb.k, 0.02, &cfg, 0.5)?);
    }
    Ok((worst <= tol, format!("worst deviation = {:.3} % of the error step", worst * 100.0)))
}

fn steady_state(tol: f64) -> Result<(bool, String)> {
    let Bench { params, plant } = bench()?;
    let cfg = SimConfig::new(8.0, 1e-3, 10)?;
    let ev = SetpointEvent { time: 1.0, target: SetpointTarget::PSet, value: 1.0 };
    let mut worst: f64 = 0.0;
    for case in DesignConfig::benchmark().cases {
        let targets = spec_to_targets(&case.spec())?;
        let fb = place_poles_with(&plant, &targets, &ParameterMatrix::DecoupledVoltage)?;
        let traj = simulate_nonlinear(&params, &fb.k, &[ev], &cfg)?;
        let last = traj.last().expect("non-empty trajectory");
        worst = worst.max((last.p - 1.0).abs()).max((last.omega - params.omega_g).abs());
    }
    Ok((worst <= tol, format!("worst |p - 1|, |omega - omega_g| = {worst:.2e}")))
}
