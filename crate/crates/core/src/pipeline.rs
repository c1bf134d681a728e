//! The six-step design procedure and the per-case simulation run.

use std::thread;

use crate::config::{CaseConfig, DesignConfig};
use crate::design::{spec_to_targets, EigenvalueTargets, PerformanceSpec};
use crate::error::Error;
use crate::metrics::{step_metrics, StepMetrics};
use crate::placement::{place_poles_with, FeedbackGain, ParameterMatrix};
use crate::powerflow::{linearize, solve_operating_point, LinearizedGains, OperatingPoint, SystemParams};
use crate::sim::{simulate_nonlinear, Trajectory};
use crate::statespace::{build_state_space, controllability, ControllabilityReport, PlantMatrices, DEFAULT_RANK_TOL};

/// Everything one case produced, up to the step that failed.
#[derive(Debug, Clone)]
pub struct CaseDesign {
    pub name: String,
    pub spec: PerformanceSpec,
    pub op: Option<OperatingPoint>,
    pub gains: Option<LinearizedGains>,
    pub plant: Option<PlantMatrices>,
    pub controllability: Option<ControllabilityReport>,
    pub targets: Option<EigenvalueTargets>,
    pub gain: Option<FeedbackGain>,
    pub warnings: Vec<String>,
    pub error: Option<Error>,
}

impl CaseDesign {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.gain.is_some()
    }

    /// Short label for the failure, if any.
    pub fn status(&self) -> &'static str {
        match &self.error {
            None => "ok",
            Some(Error::Uncontrollable { .. }) => "uncontrollable",
            Some(Error::PlacementSingular { .. }) => "unsolvable",
            Some(Error::NoEquilibrium(_)) | Some(Error::DegenerateDroop { .. }) => "no equilibrium",
            Some(_) => "invalid",
        }
    }
}

/// Steps 1 to 6 for one specification. Never panics on bad input; the
/// failure is recorded in [`CaseDesign::error`].
pub fn design_case(
    name: &str,
    params: &SystemParams,
    spec: &PerformanceSpec,
    choice: &ParameterMatrix,
) -> CaseDesign {
    let mut d = CaseDesign {
        name: name.to_string(),
        spec: *spec,
        op: None,
        gains: None,
        plant: None,
        controllability: None,
        targets: None,
        gain: None,
        warnings: Vec::new(),
        error: None,
    };
    if let Err(e) = run_steps(&mut d, params, choice) {
        d.error = Some(e);
    }
    d
}

fn run_steps(d: &mut CaseDesign, params: &SystemParams, choice: &ParameterMatrix) -> Result<(), Error> {
    let op = solve_operating_point(params)?;
    d.op = Some(op);
    let gains = linearize(params, &op)?;
    d.gains = Some(gains);
    let plant = build_state_space(params, &gains);
    d.plant = Some(plant);
    let report = controllability(&plant, DEFAULT_RANK_TOL)?;
    let controllable = report.controllable;
    let rank = report.rank;
    d.controllability = Some(report);
    if !controllable {
        return Err(Error::Uncontrollable { rank });
    }
    if let Some(w) = d.spec.separation_warning() {
        log::warn!("case {}: {w}", d.name);
        d.warnings.push(w);
    }
    let targets = spec_to_targets(&d.spec)?;
    d.targets = Some(targets);
    d.gain = Some(place_poles_with(&plant, &targets, choice)?);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    pub system: SystemParams,
    pub placement: String,
    pub cases: Vec<CaseDesign>,
}

impl DesignReport {
    pub fn all_ok(&self) -> bool {
        self.cases.iter().all(CaseDesign::is_ok)
    }
}

/// Designs every case of `cfg`, concurrently. Output order follows the
/// config.
pub fn run_design(cfg: &DesignConfig) -> DesignReport {
    let choice = cfg.placement.parameter_matrix();
    let cases = thread::scope(|s| {
        let handles: Vec<_> = cfg
            .cases
            .iter()
            .map(|c: &CaseConfig| s.spawn(move || design_case(&c.name, &cfg.system, &c.spec(), &choice)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("design thread")).collect()
    });
    DesignReport {
        system: cfg.system,
        placement: cfg.placement.name().to_string(),
        cases,
    }
}

#[derive(Debug, Clone)]
pub struct CaseRun {
    pub name: String,
    pub trajectory: Result<Trajectory, Error>,
    /// `None` without events.
    pub metrics: Option<Result<StepMetrics, Error>>,
}

/// Simulates every successfully designed case with the configured events.
pub fn run_simulations(cfg: &DesignConfig, report: &DesignReport) -> Vec<CaseRun> {
    let sim_cfg = cfg.sim.sim_config();
    let signal = cfg.sim.metric_signal();
    let event_time = cfg
        .sim
        .events
        .iter()
        .map(|e| e.time)
        .min_by(|a, b| a.total_cmp(b));
    thread::scope(|s| {
        let handles: Vec<_> = report
            .cases
            .iter()
            .map(|case| {
                let sim_cfg = &sim_cfg;
                s.spawn(move || {
                    let trajectory = match (&case.gain, &case.error) {
                        (Some(g), None) => simulate_nonlinear(&cfg.system, &g.k, &cfg.sim.events, sim_cfg),
                        (_, Some(e)) => Err(e.clone()),
                        (None, None) => Err(Error::domain("case has no gain")),
                    };
                    let metrics = match (&trajectory, event_time) {
                        (Ok(traj), Some(t0)) => Some(step_metrics(traj, signal, t0, cfg.sim.band)),
                        _ => None,
                    };
                    CaseRun { name: case.name.clone(), trajectory, metrics }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread")).collect()
    })
}
