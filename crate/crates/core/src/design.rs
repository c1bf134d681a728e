//! Time-domain specifications and the eigenvalue targets they imply.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cubic::{cmp_complex, poly_from_roots, C64};
use crate::error::{Error, Result};

/// Separation factor below which the real pole is considered too close to
/// the dominant pair.
pub const SEPARATION_FACTOR: f64 = 5.0;

/// Damping ratio, 2% settling time and the magnitude of the third (real) pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSpec {
    pub xi: f64,
    pub ts: f64,
    pub a: f64,
}

impl PerformanceSpec {
    pub fn new(xi: f64, ts: f64, a: f64) -> Result<Self> {
        let spec = PerformanceSpec { xi, ts, a };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(Error::domain(format!("xi must be in (0,1), got {}", self.xi)));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::domain(format!("ts must be > 0, got {}", self.ts)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::domain(format!("a must be > 0, got {}", self.a)));
        }
        Ok(())
    }

    /// `ω_n = 4 / (ξ T_s)`
    pub fn natural_frequency(&self) -> f64 {
        4.0 / (self.xi * self.ts)
    }

    pub fn overshoot(&self) -> f64 {
        overshoot_percent(self.xi)
    }

    /// `None` when the real pole is at least [`SEPARATION_FACTOR`] times
    /// further left than the dominant pair's real part.
    pub fn separation_warning(&self) -> Option<String> {
        let sigma = self.xi * self.natural_frequency();
        (self.a < SEPARATION_FACTOR * sigma).then(|| {
            format!(
                "third pole -{} is within {}x of the dominant real part -{:.4}",
                self.a, SEPARATION_FACTOR, sigma
            )
        })
    }
}

fn overshoot_percent(xi: f64) -> f64 {
    100.0 * (-PI * xi / (1.0 - xi * xi).sqrt()).exp()
}

/// Percent overshoot of the standard second-order step response.
pub fn po_from_damping(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::domain(format!("xi must be in (0,1), got {xi}")));
    }
    Ok(overshoot_percent(xi))
}

/// Inverse of [`po_from_damping`].
pub fn damping_from_po(po: f64) -> Result<f64> {
    if !(po > 0.0 && po < 100.0) {
        return Err(Error::domain(format!("overshoot must be in (0,100) %, got {po}")));
    }
    let l = (po / 100.0).ln();
    Ok(-l / (PI * PI + l * l).sqrt())
}

/// Three closed-loop eigenvalue targets, closed under conjugation and
/// strictly in the open left half-plane. Stored sorted by (real, imaginary).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueTargets {
    lambdas: [C64; 3],
}

impl EigenvalueTargets {
    pub fn new(mut lambdas: [C64; 3]) -> Result<Self> {
        if lambdas.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain("eigenvalue targets must be finite"));
        }
        if lambdas.iter().any(|z| z.re >= 0.0) {
            return Err(Error::domain("eigenvalue targets must have negative real parts"));
        }
        lambdas.sort_by(cmp_complex);
        let complex: Vec<&C64> = lambdas.iter().filter(|z| z.im != 0.0).collect();
        match complex.len() {
            0 => {}
            2 => {
                let (a, b) = (complex[0], complex[1]);
                let scale = a.norm().max(b.norm());
                if (a - b.conj()).norm() > 1e-12 * scale {
                    return Err(Error::domain("eigenvalue targets are not closed under conjugation"));
                }
            }
            _ => {
                return Err(Error::domain("eigenvalue targets are not closed under conjugation"))
            }
        }
        Ok(EigenvalueTargets { lambdas })
    }

    pub fn as_array(&self) -> &[C64; 3] {
        &self.lambdas
    }

    /// The complex pair `(σ, ω)` with `ω > 0`, if any.
    pub fn complex_pair(&self) -> Option<(f64, f64)> {
        self.lambdas
            .iter()
            .find(|z| z.im > 0.0)
            .map(|z| (z.re, z.im))
    }

    /// Damping ratio and natural frequency read back from the complex pair.
    pub fn damping_and_natural_frequency(&self) -> Option<(f64, f64)> {
        self.complex_pair().map(|(s, w)| {
            let wn = s.hypot(w);
            (-s / wn, wn)
        })
    }
}

/// `{ −ξω_n ± jω_n√(1−ξ²), −a }`
pub fn spec_to_targets(spec: &PerformanceSpec) -> Result<EigenvalueTargets> {
    spec.validate()?;
    let wn = spec.natural_frequency();
    let sigma = -spec.xi * wn;
    let wd = wn * (1.0 - spec.xi * spec.xi).sqrt();
    EigenvalueTargets::new([
        C64::new(sigma, wd),
        C64::new(sigma, -wd),
        C64::new(-spec.a, 0.0),
    ])
}

/// Monic characteristic polynomial `[1, c2, c1, c0]` with the targets as roots.
pub fn target_polynomial(targets: &EigenvalueTargets) -> Result<[f64; 4]> {
    let (coeffs, residue) = poly_from_roots(targets.as_array());
    if residue >= 1e-12 {
        return Err(Error::domain(format!(
            "targets give a polynomial with imaginary residue {residue:e}"
        )));
    }
    Ok(coeffs)
}
