//! Power transfer through a complex line impedance, the droop equilibrium and
//! its small-signal sensitivities.
//!
//! All electrical quantities are per-unit on the converter base. Only
//! `omega_b` carries physical units (rad/s).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;

/// Grid, line, droop and setpoint parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Frequency base, rad/s.
    pub omega_b: f64,
    pub omega_g: f64,
    pub v_g: f64,
    pub r_g: f64,
    pub x_g: f64,
    /// P-f droop coefficient.
    pub d_p: f64,
    /// Q-V droop coefficient.
    pub d_q: f64,
    pub omega_set: f64,
    pub p_set: f64,
    pub q_set: f64,
    pub v_set: f64,
}

impl SystemParams {
    /// 5 kW / 380 V benchmark converter on a purely inductive 8 mH line
    /// (0.087 p.u.), droop 0.01 / 0.05, exporting 0.5 p.u. active power.
    pub fn benchmark() -> Self {
        SystemParams {
            omega_b: 100.0 * std::f64::consts::PI,
            omega_g: 1.0,
            v_g: 1.0,
            r_g: 0.0,
            x_g: 0.087,
            d_p: 0.01,
            d_q: 0.05,
            omega_set: 1.0,
            p_set: 0.5,
            q_set: 0.0,
            v_set: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_b", self.omega_b),
            ("omega_g", self.omega_g),
            ("v_g", self.v_g),
            ("r_g", self.r_g),
            ("x_g", self.x_g),
            ("d_p", self.d_p),
            ("d_q", self.d_q),
            ("omega_set", self.omega_set),
            ("p_set", self.p_set),
            ("q_set", self.q_set),
            ("v_set", self.v_set),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!("{name} must be finite")));
        }
        if self.impedance_sq() <= 0.0 {
            return Err(Error::domain("line impedance must be nonzero (r_g^2 + x_g^2 > 0)"));
        }
        if self.omega_b <= 0.0 {
            return Err(Error::domain("omega_b must be > 0"));
        }
        if self.v_g <= 0.0 {
            return Err(Error::domain("v_g must be > 0"));
        }
        if self.d_p < 0.0 || self.d_q < 0.0 {
            return Err(Error::domain("droop coefficients must be >= 0"));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn impedance_sq(&self) -> f64 {
        self.r_g * self.r_g + self.x_g * self.x_g
    }

    /// Active power demanded by the frequency droop once the converter is
    /// synchronized to the grid.
    pub fn equilibrium_power(&self) -> Result<f64> {
        if self.d_p == 0.0 {
            if (self.omega_set - self.omega_g).abs() > 1e-12 {
                return Err(Error::DegenerateDroop {
                    omega_set: self.omega_set,
                    omega_g: self.omega_g,
                });
            }
            return Ok(self.p_set);
        }
        Ok(self.p_set + (self.omega_set - self.omega_g) / self.d_p)
    }
}

/// Steady-state power angle (rad) and converter voltage magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub delta0: f64,
    pub v0: f64,
}

impl OperatingPoint {
    pub fn new(delta0: f64, v0: f64) -> Result<Self> {
        let op = OperatingPoint { delta0, v0 };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return Err(Error::domain(format!("v0 must be > 0, got {}", self.v0)));
        }
        if !(self.delta0.is_finite() && self.delta0.abs() < FRAC_PI_2) {
            return Err(Error::domain(format!(
                "|delta0| must be < pi/2, got {}",
                self.delta0
            )));
        }
        Ok(())
    }
}

/// Partial derivatives of (p, q) with respect to (delta, V) at an operating
/// point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedGains {
    pub k_pdelta: f64,
    pub k_pv: f64,
    pub k_qdelta: f64,
    pub k_qv: f64,
}

impl LinearizedGains {
    pub fn as_array(&self) -> [f64; 4] {
        [self.k_pdelta, self.k_pv, self.k_qdelta, self.k_qv]
    }
}

/// Unchecked power transfer; callers guarantee a nonzero impedance.
#[inline]
pub(crate) fn power_flow(params: &SystemParams, delta: f64, v: f64) -> (f64, f64) {
    let z2 = params.impedance_sq();
    let (s, c) = delta.sin_cos();
    let vvg = v * params.v_g;
    let p = (v * v * params.r_g + vvg * (params.x_g * s - params.r_g * c)) / z2;
    let q = (v * v * params.x_g - vvg * (params.r_g * s + params.x_g * c)) / z2;
    (p, q)
}

#[inline]
fn sensitivities(params: &SystemParams, delta: f64, v: f64) -> LinearizedGains {
    let z2 = params.impedance_sq();
    let (s, c) = delta.sin_cos();
    let (r, x, vg) = (params.r_g, params.x_g, params.v_g);
    LinearizedGains {
        k_pdelta: v * vg * (r * s + x * c) / z2,
        k_pv: (2.0 * v * r + vg * (x * s - r * c)) / z2,
        k_qdelta: v * vg * (x * s - r * c) / z2,
        k_qv: (2.0 * v * x - vg * (r * s + x * c)) / z2,
    }
}

/// Active and reactive power delivered at power angle `delta` and voltage
/// magnitude `v`.
pub fn compute_power(params: &SystemParams, delta: f64, v: f64) -> Result<(f64, f64)> {
    if params.impedance_sq() <= 0.0 {
        return Err(Error::domain("line impedance must be nonzero"));
    }
    if v.is_nan() || v <= 0.0 {
        return Err(Error::domain(format!("v must be > 0, got {v}")));
    }
    Ok(power_flow(params, delta, v))
}

/// Residual of the two droop balance equations at `(delta, v)`.
pub fn droop_residual(params: &SystemParams, delta: f64, v: f64) -> Result<[f64; 2]> {
    let p_target = params.equilibrium_power()?;
    let (p, q) = compute_power(params, delta, v)?;
    Ok([
        p - p_target,
        v - params.v_set + params.d_q * (q - params.q_set),
    ])
}

/// Solves the grid-synchronized droop equilibrium by Newton iteration from
/// the no-load point `(0, v_set)`.
pub fn solve_operating_point(params: &SystemParams) -> Result<OperatingPoint> {
    params.validate()?;
    let p_target = params.equilibrium_power()?;

    let (mut delta, mut v) = (0.0, params.v_set);
    if v.is_nan() || v <= 0.0 {
        return Err(Error::NoEquilibrium(format!(
            "initial guess v_set = {v} is not a positive voltage"
        )));
    }

    for _ in 0..NEWTON_MAX_ITER {
        let (p, q) = power_flow(params, delta, v);
        let f1 = p - p_target;
        let f2 = v - params.v_set + params.d_q * (q - params.q_set);
        let norm = f1.hypot(f2);
        if norm <= NEWTON_TOL * 1e-2 {
            break;
        }

        let g = sensitivities(params, delta, v);
        let (j11, j12) = (g.k_pdelta, g.k_pv);
        let (j21, j22) = (params.d_q * g.k_qdelta, 1.0 + params.d_q * g.k_qv);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoEquilibrium("singular Jacobian".into()));
        }
        let d_delta = (j22 * f1 - j12 * f2) / det;
        let d_v = (j11 * f2 - j21 * f1) / det;
        delta -= d_delta;
        v -= d_v;

        if !(delta.is_finite() && v.is_finite()) {
            return Err(Error::NoEquilibrium("Newton iterate diverged".into()));
        }
        if d_delta.abs() + d_v.abs() < 1e-15 * (1.0 + delta.abs() + v.abs()) {
            break;
        }
    }

    let [r1, r2] = droop_residual(params, delta, v)
        .map_err(|e| Error::NoEquilibrium(format!("final iterate invalid: {e}")))?;
    if r1.hypot(r2) > NEWTON_TOL {
        return Err(Error::NoEquilibrium(format!(
            "Newton did not converge in {NEWTON_MAX_ITER} iterations (residual {:e})",
            r1.hypot(r2)
        )));
    }
    if delta.abs() >= FRAC_PI_2 || v <= 0.0 {
        return Err(Error::NoEquilibrium(format!(
            "solution (delta = {delta}, v = {v}) lies on the unstable branch"
        )));
    }
    Ok(OperatingPoint { delta0: delta, v0: v })
}

/// Small-signal gains `dp/ddelta, dp/dV, dq/ddelta, dq/dV` at `op`.
pub fn linearize(params: &SystemParams, op: &OperatingPoint) -> Result<LinearizedGains> {
    params.validate()?;
    op.validate()?;
    let g = sensitivities(params, op.delta0, op.v0);
    if !g.as_array().iter().all(|v| v.is_finite()) {
        return Err(Error::domain("non-finite linearized gain"));
    }
    Ok(g)
}
