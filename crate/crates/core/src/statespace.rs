//! Extended open-loop plant of the error/angle dynamics.
//!
//! States are the two droop-output tracking errors `e1`, `e2` and the
//! angle-rate variable `z = d(delta)/dt`. Inputs are the rates of the
//! frequency and voltage references.

use nalgebra::{Matrix3, Matrix3x2, SMatrix};

use crate::error::{Error, Result};
use crate::powerflow::{LinearizedGains, SystemParams};

pub type Matrix3x6 = SMatrix<f64, 3, 6>;

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantMatrices {
    pub a: Matrix3<f64>,
    pub b: Matrix3x2<f64>,
}

impl PlantMatrices {
    /// Wraps arbitrary matrices. [`build_state_space`] is the structured
    /// constructor; this one exists for closed-loop re-design and tests.
    pub fn from_parts(a: Matrix3<f64>, b: Matrix3x2<f64>) -> Self {
        PlantMatrices { a, b }
    }

    /// Nonzeros of `a` only at (0,2) and (1,2), `b[(1,0)] = b[(2,1)] = 0`.
    pub fn has_droop_structure(&self) -> bool {
        let a_ok = (0..3).all(|i| {
            (0..3).all(|j| (j == 2 && i < 2) || self.a[(i, j)] == 0.0)
        });
        a_ok && self.b[(1, 0)] == 0.0 && self.b[(2, 1)] == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    /// `[B, AB, A²B]`
    pub p_matrix: Matrix3x6,
    /// Descending.
    pub singular_values: [f64; 3],
    pub rank: usize,
    pub controllable: bool,
}

pub fn build_state_space(params: &SystemParams, gains: &LinearizedGains) -> PlantMatrices {
    #[rustfmt::skip]
    let a = Matrix3::new(
        0.0, 0.0, params.d_p * gains.k_pdelta,
        0.0, 0.0, params.d_q * gains.k_qdelta,
        0.0, 0.0, 0.0,
    );
    #[rustfmt::skip]
    let b = Matrix3x2::new(
        1.0,            params.d_p * gains.k_pv,
        0.0,            1.0 + params.d_q * gains.k_qv,
        params.omega_b, 0.0,
    );
    PlantMatrices { a, b }
}

pub fn controllability_matrix(plant: &PlantMatrices) -> Matrix3x6 {
    let ab = plant.a * plant.b;
    let a2b = plant.a * ab;
    let mut p = Matrix3x6::zeros();
    p.fixed_view_mut::<3, 2>(0, 0).copy_from(&plant.b);
    p.fixed_view_mut::<3, 2>(0, 2).copy_from(&ab);
    p.fixed_view_mut::<3, 2>(0, 4).copy_from(&a2b);
    p
}

/// Numerical rank of `[B, AB, A²B]` via SVD. A singular value counts when it
/// is at least `rank_tol` times the largest one.
pub fn controllability(plant: &PlantMatrices, rank_tol: f64) -> Result<ControllabilityReport> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::domain(format!("rank_tol must be in (0, 1), got {rank_tol}")));
    }
    let p_matrix = controllability_matrix(plant);
    let svd = p_matrix.svd(false, false);
    let mut sv = [0.0; 3];
    for (dst, src) in sv.iter_mut().zip(svd.singular_values.iter()) {
        *dst = *src;
    }
    sv.sort_by(|a, b| b.total_cmp(a));

    let rank = if sv[0] > 0.0 {
        sv.iter().filter(|&&s| s >= rank_tol * sv[0]).count()
    } else {
        0
    };
    Ok(ControllabilityReport {
        p_matrix,
        singular_values: sv,
        rank,
        controllable: rank == 3,
    })
}
