//! Closed-loop time-domain simulation with fixed-step RK4.
//!
//! The nonlinear model runs in absolute per-unit quantities: states are the
//! power angle `delta` and the two controller integrators `zeta1`, `zeta2`;
//!
//! ```text
//! omega_u = zeta1 − k13·delta        E_u = zeta2 − k23·delta
//! zeta1'  = −k11·e1 − k12·e2         zeta2' = −k21·e1 − k22·e2
//! delta'  = omega_b·(omega_u − omega_g)
//! ```
//!
//! with `e1 = (omega_u + d_p·p) − (omega_set + d_p·p_set)` and
//! `e2 = (E_u + d_q·q) − (v_set + d_q·q_set)`. The inner loops are ideal, so
//! the converter voltage equals `E_u`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2x3, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::placement::closed_loop_matrix;
use crate::powerflow::{power_flow, solve_operating_point, SystemParams};
use crate::statespace::PlantMatrices;

pub const DEFAULT_DT: f64 = 1e-4;
pub const MAX_DT: f64 = 5e-3;
const BLOWUP_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl SimConfig {
    pub fn new(t_end: f64, dt: f64, record_every: usize) -> Result<Self> {
        let cfg = SimConfig { t_end, dt, record_every };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.t_end && self.t_end.is_finite()) {
            return Err(Error::domain(format!(
                "need 0 < dt <= t_end (dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        if self.dt > MAX_DT {
            return Err(Error::domain(format!("dt must be <= {MAX_DT} s, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be >= 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetpointTarget {
    PSet,
    QSet,
    OmegaSet,
    VSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetpointEvent {
    pub time: f64,
    pub target: SetpointTarget,
    pub value: f64,
}

impl SetpointEvent {
    fn apply(&self, params: &mut SystemParams) {
        let slot = match self.target {
            SetpointTarget::PSet => &mut params.p_set,
            SetpointTarget::QSet => &mut params.q_set,
            SetpointTarget::OmegaSet => &mut params.omega_set,
            SetpointTarget::VSet => &mut params.v_set,
        };
        *slot = self.value;
    }
}

/// One recorded instant. For linear runs `delta` holds `z` and the
/// `omega`, `v`, `p`, `q` slots are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub delta: f64,
    pub omega: f64,
    pub v: f64,
    pub p: f64,
    pub q: f64,
    pub e1: f64,
    pub e2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Delta,
    Omega,
    V,
    P,
    Q,
    E1,
    E2,
}

impl Signal {
    pub const ALL: [Signal; 7] = [
        Signal::Delta,
        Signal::Omega,
        Signal::V,
        Signal::P,
        Signal::Q,
        Signal::E1,
        Signal::E2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Signal::Delta => "delta",
            Signal::Omega => "omega",
            Signal::V => "v",
            Signal::P => "p",
            Signal::Q => "q",
            Signal::E1 => "e1",
            Signal::E2 => "e2",
        }
    }

    pub fn of(&self, s: &Sample) -> f64 {
        match self {
            Signal::Delta => s.delta,
            Signal::Omega => s.omega,
            Signal::V => s.v,
            Signal::P => s.p,
            Signal::Q => s.q,
            Signal::E1 => s.e1,
            Signal::E2 => s.e2,
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Signal::ALL
            .into_iter()
            .find(|sig| sig.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown signal '{s}'")))
    }
}

/// Uniformly sampled simulation output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn signal(&self, signal: Signal) -> Vec<f64> {
        self.samples.iter().map(|s| signal.of(s)).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

fn rk4<F>(f: &F, x: &Vector3<f64>, dt: f64) -> Vector3<f64>
where
    F: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    let k1 = f(x);
    let k2 = f(&(x + k1 * (dt / 2.0)));
    let k3 = f(&(x + k2 * (dt / 2.0)));
    let k4 = f(&(x + k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn check_state(x: &Vector3<f64>, t: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite() && v.abs() <= BLOWUP_LIMIT) {
        Ok(())
    } else {
        Err(Error::NumericalBlowup { time: t })
    }
}

struct Loop<'a> {
    params: SystemParams,
    k: &'a Matrix2x3<f64>,
}

impl Loop<'_> {
    /// Algebraic outputs `(omega_u, E_u, p, q, e1, e2)` at state `x`.
    #[inline]
    fn outputs(&self, x: &Vector3<f64>) -> [f64; 6] {
        let sp = &self.params;
        let (delta, zeta1, zeta2) = (x[0], x[1], x[2]);
        let omega_u = zeta1 - self.k[(0, 2)] * delta;
        let e_u = zeta2 - self.k[(1, 2)] * delta;
        let (p, q) = power_flow(sp, delta, e_u);
        let e1 = (omega_u + sp.d_p * p) - (sp.omega_set + sp.d_p * sp.p_set);
        let e2 = (e_u + sp.d_q * q) - (sp.v_set + sp.d_q * sp.q_set);
        [omega_u, e_u, p, q, e1, e2]
    }

    #[inline]
    fn rhs(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let [omega_u, _, _, _, e1, e2] = self.outputs(x);
        let k = self.k;
        Vector3::new(
            self.params.omega_b * (omega_u - self.params.omega_g),
            -k[(0, 0)] * e1 - k[(0, 1)] * e2,
            -k[(1, 0)] * e1 - k[(1, 1)] * e2,
        )
    }

    fn sample(&self, t: f64, x: &Vector3<f64>) -> Sample {
        let [omega, v, p, q, e1, e2] = self.outputs(x);
        Sample { t, delta: x[0], omega, v, p, q, e1, e2 }
    }
}

/// Nonlinear closed-loop run from the equilibrium of `params`. Events snap to
/// the nearest integration grid point and take effect before that sample is
/// recorded.
pub fn simulate_nonlinear(
    params: &SystemParams,
    gain: &Matrix2x3<f64>,
    events: &[SetpointEvent],
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !gain.iter().all(|v| v.is_finite()) {
        return Err(Error::domain("gain matrix must be finite"));
    }
    for ev in events {
        if !(ev.time >= 0.0 && ev.time <= cfg.t_end) || !ev.value.is_finite() {
            return Err(Error::domain(format!(
                "event at t = {} outside [0, {}] or non-finite value",
                ev.time, cfg.t_end
            )));
        }
    }

    let op = solve_operating_point(params)?;
    let mut sys = Loop { params: *params, k: gain };
    let mut x = Vector3::new(
        op.delta0,
        params.omega_g + gain[(0, 2)] * op.delta0,
        op.v0 + gain[(1, 2)] * op.delta0,
    );

    let mut pending: Vec<(usize, SetpointEvent)> = events
        .iter()
        .map(|ev| ((ev.time / cfg.dt).round() as usize, *ev))
        .collect();
    pending.sort_by_key(|(idx, _)| *idx);
    let mut next_event = 0;

    let steps = cfg.steps();
    let mut traj = Trajectory {
        samples: Vec::with_capacity(steps / cfg.record_every + 1),
    };
    for i in 0..=steps {
        while next_event < pending.len() && pending[next_event].0 == i {
            pending[next_event].1.apply(&mut sys.params);
            next_event += 1;
        }
        let t = i as f64 * cfg.dt;
        if i % cfg.record_every == 0 {
            traj.samples.push(sys.sample(t, &x));
        }
        if i == steps {
            break;
        }
        x = rk4(&|s: &Vector3<f64>| sys.rhs(s), &x, cfg.dt);
        check_state(&x, t + cfg.dt)?;
    }
    Ok(traj)
}

/// Integrates `x' = (A − B K) x` for the states `(e1, e2, z)`; `z` is written
/// to the `delta` column.
pub fn simulate_linear(
    plant: &PlantMatrices,
    gain: &Matrix2x3<f64>,
    x0: &Vector3<f64>,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let m: Matrix3<f64> = closed_loop_matrix(plant, gain);
    let steps = cfg.steps();
    let mut traj = Trajectory {
        samples: Vec::with_capacity(steps / cfg.record_every + 1),
    };
    let mut x = *x0;
    check_state(&x, 0.0)?;
    for i in 0..=steps {
        let t = i as f64 * cfg.dt;
        if i % cfg.record_every == 0 {
            traj.samples.push(Sample {
                t,
                delta: x[2],
                omega: 0.0,
                v: 0.0,
                p: 0.0,
                q: 0.0,
                e1: x[0],
                e2: x[1],
            });
        }
        if i == steps {
            break;
        }
        x = rk4(&|s: &Vector3<f64>| m * s, &x, cfg.dt);
        check_state(&x, t + cfg.dt)?;
    }
    Ok(traj)
}
