//! Step-response overshoot and settling time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Signal, Trajectory};

pub const DEFAULT_BAND: f64 = 0.02;
/// Trailing fraction of the samples averaged for the final value.
const FINAL_WINDOW: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// Percent of the step size, never negative.
    pub overshoot: f64,
    /// Seconds after the event.
    pub settling_time: f64,
    /// Seconds after the event.
    pub peak_time: f64,
    pub final_value: f64,
}

/// Metrics of `signal` for a step applied at `event_time`.
pub fn step_metrics(
    traj: &Trajectory,
    signal: Signal,
    event_time: f64,
    band: f64,
) -> Result<StepMetrics> {
    step_metrics_series(&traj.times(), &traj.signal(signal), event_time, band)
}

/// Same as [`step_metrics`] on raw samples. `t` must be strictly increasing.
///
/// The initial value is the last sample before `event_time` (or the first
/// sample when the series starts at the event). The settling time is the
/// instant, interpolated between samples, at which the signal last re-enters
/// the `±band·|step|` envelope around the final value.
pub fn step_metrics_series(t: &[f64], y: &[f64], event_time: f64, band: f64) -> Result<StepMetrics> {
    if t.len() != y.len() || t.len() < 2 {
        return Err(Error::domain("need at least two samples of equal-length t and y"));
    }
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::domain(format!("band must be in (0,1), got {band}")));
    }
    let end = *t.last().unwrap();
    if event_time > end {
        return Err(Error::domain(format!(
            "event at {event_time} s is after the trajectory end {end} s"
        )));
    }

    let start = t.partition_point(|&ti| ti < event_time - 1e-12);
    let initial = if start > 0 { y[start - 1] } else { y[0] };

    let window = ((t.len() as f64 * FINAL_WINDOW).ceil() as usize).max(1);
    let final_value = y[t.len() - window..].iter().sum::<f64>() / window as f64;

    let step = final_value - initial;
    if step == 0.0 || !step.is_finite() {
        return Err(Error::domain("signal shows no step"));
    }
    let dir = step.signum();

    let (peak_idx, peak) = y[start..]
        .iter()
        .enumerate()
        .map(|(i, v)| (start + i, dir * v))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let overshoot = ((peak - dir * final_value) / step.abs()).max(0.0) * 100.0;

    let envelope = band * step.abs();
    let outside = |i: usize| (y[i] - final_value).abs() > envelope;
    let last_out = (start..t.len()).rev().find(|&i| outside(i));
    let settling_time = match last_out {
        None => 0.0,
        Some(i) if i + 1 == t.len() => return Err(Error::NotSettled { band }),
        Some(i) => {
            // linear interpolation of the envelope crossing between i and i+1
            let d0 = (y[i] - final_value).abs() - envelope;
            let d1 = (y[i + 1] - final_value).abs() - envelope;
            let frac = if d0 != d1 { d0 / (d0 - d1) } else { 1.0 };
            t[i] + frac.clamp(0.0, 1.0) * (t[i + 1] - t[i]) - event_time
        }
    };

    Ok(StepMetrics {
        overshoot,
        settling_time,
        peak_time: t[peak_idx] - event_time,
        final_value,
    })
}
