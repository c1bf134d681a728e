//! Eigenvalue assignment for the 3-state, 2-input extended plant.
//!
//! The gain is found by Sylvester-equation eigenstructure assignment: for a
//! real block-diagonal `Λ` with the target spectrum and a parameter matrix
//! `G` (2×3), solve `A X − X Λ = B G` and set `K = G X⁻¹`, so that
//! `A − B K = X Λ X⁻¹`. Since the problem leaves three of the six gains free,
//! `G` selects one particular solution.
//!
//! Single-input reductions cannot be used here: `A² = 0` leaves every
//! one-column subsystem uncontrollable.

use nalgebra::{Complex, Matrix2x3, Matrix3, SMatrix, SVector, Vector2, Vector3};

use crate::cubic::{self, C64};
use crate::design::EigenvalueTargets;
use crate::error::{Error, Result};
use crate::statespace::{controllability, PlantMatrices, DEFAULT_RANK_TOL};

/// Largest accepted condition number of the eigenvector matrix `X`.
pub const MAX_CONDITION: f64 = 1e12;
/// Placement certificate threshold on the per-eigenvalue relative error.
pub const MAX_REL_ERROR: f64 = 1e-8;

pub const DEFAULT_PARAMETER_MATRIX: [[f64; 3]; 2] = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];

/// Tried in order when the default parameter matrix gives a singular `X`.
pub const RETRY_PARAMETER_MATRICES: [[[f64; 3]; 2]; 8] = [
    [[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]],
    [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]],
    [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0]],
    [[1.0, 2.0, 0.0], [1.0, 0.0, 3.0]],
    [[1.0, -1.0, 1.0], [1.0, 1.0, -1.0]],
    [[2.0, 1.0, 1.0], [1.0, 0.0, 2.0]],
    [[1.0, 0.0, 1.0], [1.0, 1.0, 0.0]],
    [[0.0, 1.0, 0.0], [1.0, 1.0, 1.0]],
];

fn to_matrix(rows: &[[f64; 3]; 2]) -> Matrix2x3<f64> {
    Matrix2x3::from_fn(|i, j| rows[i][j])
}

/// How the free parameter matrix `G` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterMatrix {
    /// A fixed `G`, followed by [`RETRY_PARAMETER_MATRICES`] if singular.
    Fixed(Matrix2x3<f64>),
    /// Confine the two slowest eigenvalues (the complex pair when present)
    /// to the `e2 = 0` subspace and drive the remaining eigenvalue through
    /// the voltage input alone. A frequency/active-power step then leaves the
    /// voltage error untouched in the linear model and the power response
    /// follows the dominant pair. Falls back to the fixed list when the
    /// targets have no usable structure.
    DecoupledVoltage,
}

impl Default for ParameterMatrix {
    fn default() -> Self {
        ParameterMatrix::Fixed(to_matrix(&DEFAULT_PARAMETER_MATRIX))
    }
}

/// A feedback gain with its eigenvalue-placement certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackGain {
    pub k: Matrix2x3<f64>,
    /// Eigenvalues of `A − B K`, recomputed from `k`.
    pub achieved_eigs: [C64; 3],
    pub max_rel_error: f64,
    /// Largest relative coefficient error of `det(λI − A + BK)` against the
    /// target polynomial.
    pub poly_rel_error: f64,
    /// The `G` that produced `k` (zero when no feedback was needed).
    pub parameter_matrix: Matrix2x3<f64>,
    /// Condition number of the eigenvector matrix `X`.
    pub condition: f64,
}

pub fn closed_loop_matrix(plant: &PlantMatrices, k: &Matrix2x3<f64>) -> Matrix3<f64> {
    plant.a - plant.b * k
}

/// Eigenvalues of `A − B K`, sorted by (real, imaginary).
pub fn closed_loop_eigs(plant: &PlantMatrices, k: &Matrix2x3<f64>) -> [C64; 3] {
    cubic::eigenvalues(&closed_loop_matrix(plant, k))
}

/// Largest relative distance between each target and its nearest unused
/// achieved eigenvalue.
pub fn max_relative_error(achieved: &[C64; 3], targets: &[C64; 3]) -> f64 {
    let mut used = [false; 3];
    let mut worst: f64 = 0.0;
    for t in targets {
        let (idx, dist) = achieved
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, a)| (i, (a - t).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("three candidates for three targets");
        used[idx] = true;
        worst = worst.max(dist / t.norm().max(f64::MIN_POSITIVE));
    }
    worst
}

/// Largest relative coefficient mismatch between `det(λI − A + BK)` and
/// `want`.
pub fn poly_relative_error(plant: &PlantMatrices, k: &Matrix2x3<f64>, want: &[f64; 4]) -> f64 {
    let got = cubic::characteristic_polynomial(&closed_loop_matrix(plant, k));
    got.iter()
        .zip(want.iter())
        .map(|(g, w)| (g - w).abs() / w.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Places the closed-loop eigenvalues with the default parameter matrix.
pub fn place_poles(plant: &PlantMatrices, targets: &EigenvalueTargets) -> Result<FeedbackGain> {
    place_poles_with(plant, targets, &ParameterMatrix::default())
}

pub fn place_poles_with(
    plant: &PlantMatrices,
    targets: &EigenvalueTargets,
    choice: &ParameterMatrix,
) -> Result<FeedbackGain> {
    let report = controllability(plant, DEFAULT_RANK_TOL)?;
    if !report.controllable {
        return Err(Error::Uncontrollable { rank: report.rank });
    }
    let lambdas = targets.as_array();

    // Spectrum already in place: nothing to assign, and the Sylvester
    // equation would be singular.
    let open = cubic::characteristic_polynomial(&plant.a);
    let (want, _) = cubic::poly_from_roots(lambdas);
    if open
        .iter()
        .zip(want.iter())
        .all(|(o, w)| (o - w).abs() <= 1e-12 * w.abs().max(1.0))
    {
        let k = Matrix2x3::zeros();
        let achieved = closed_loop_eigs(plant, &k);
        return Ok(FeedbackGain {
            k,
            achieved_eigs: achieved,
            max_rel_error: max_relative_error(&achieved, lambdas),
            poly_rel_error: poly_relative_error(plant, &k, &want),
            parameter_matrix: k,
            condition: 1.0,
        });
    }

    let blocks = TargetBlocks::new(lambdas);
    let mut candidates: Vec<Matrix2x3<f64>> = Vec::with_capacity(10);
    match choice {
        ParameterMatrix::Fixed(g) => candidates.push(*g),
        ParameterMatrix::DecoupledVoltage => {
            if let Some(g) = decoupled_parameter_matrix(plant, &blocks) {
                candidates.push(g);
            }
            candidates.push(to_matrix(&DEFAULT_PARAMETER_MATRIX));
        }
    }
    candidates.extend(RETRY_PARAMETER_MATRICES.iter().map(to_matrix));

    let mut best_condition = f64::INFINITY;
    for (attempt, g) in candidates.iter().enumerate() {
        let Some((x, condition)) = solve_sylvester(plant, &blocks.lambda, g) else {
            log::debug!("placement attempt {attempt}: singular Sylvester system");
            continue;
        };
        best_condition = best_condition.min(condition);
        if condition > MAX_CONDITION {
            log::debug!("placement attempt {attempt}: cond(X) = {condition:e}");
            continue;
        }
        let Some(x_inv) = x.try_inverse() else { continue };
        let k = g * x_inv;
        let achieved = closed_loop_eigs(plant, &k);
        let err = max_relative_error(&achieved, lambdas);
        let poly_err = poly_relative_error(plant, &k, &want);
        // Repeated eigenvalues are only determined to ~sqrt(eps); certify
        // those through the characteristic polynomial instead.
        let certified = err <= MAX_REL_ERROR || (blocks.repeated && poly_err <= MAX_REL_ERROR);
        if certified && k.iter().all(|v| v.is_finite()) {
            return Ok(FeedbackGain {
                k,
                achieved_eigs: achieved,
                max_rel_error: err,
                poly_rel_error: poly_err,
                parameter_matrix: *g,
                condition,
            });
        }
        log::debug!("placement attempt {attempt}: eigenvalue error {err:e}");
    }
    Err(Error::PlacementSingular {
        attempts: candidates.len(),
        best_condition,
    })
}

/// Real block form of the targets. Columns are ordered slowest mode first:
/// the complex pair (as a rotation-scaled 2×2 block) when present, otherwise
/// real eigenvalues by descending real part, with Jordan coupling between
/// repeated values.
struct TargetBlocks {
    lambda: Matrix3<f64>,
    /// Eigenvalues of the first two columns when they can be assigned
    /// independently (distinct, or one complex pair).
    leading: Option<LeadingPair>,
    repeated: bool,
}

enum LeadingPair {
    Complex(C64),
    Real(f64, f64),
}

impl TargetBlocks {
    fn new(lambdas: &[C64; 3]) -> Self {
        let mut lambda = Matrix3::zeros();
        if let Some(z) = lambdas.iter().find(|z| z.im > 0.0) {
            let real = lambdas.iter().find(|z| z.im == 0.0).expect("one real target");
            lambda[(0, 0)] = z.re;
            lambda[(0, 1)] = z.im;
            lambda[(1, 0)] = -z.im;
            lambda[(1, 1)] = z.re;
            lambda[(2, 2)] = real.re;
            return TargetBlocks {
                lambda,
                leading: Some(LeadingPair::Complex(*z)),
                repeated: false,
            };
        }

        let mut r = [lambdas[0].re, lambdas[1].re, lambdas[2].re];
        r.sort_by(|a, b| b.total_cmp(a));
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        for i in 0..2 {
            if same(r[i], r[i + 1]) {
                r[i + 1] = r[i];
                lambda[(i, i + 1)] = 1.0;
            }
        }
        for i in 0..3 {
            lambda[(i, i)] = r[i];
        }
        let leading = (lambda[(0, 1)] == 0.0).then_some(LeadingPair::Real(r[0], r[1]));
        let repeated = lambda[(0, 1)] != 0.0 || lambda[(1, 2)] != 0.0;
        TargetBlocks { lambda, leading, repeated }
    }
}

/// `e2ᵀ (A − λI)⁻¹ B`, the voltage-error row of the eigenvector map.
fn voltage_row(plant: &PlantMatrices, lambda: C64) -> Option<Vector2<C64>> {
    let a: Matrix3<C64> = plant.a.map(|v| Complex::new(v, 0.0));
    let shifted_t = (a - Matrix3::from_diagonal_element(lambda)).transpose();
    let e2 = Vector3::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let w = shifted_t.lu().solve(&e2)?;
    let b: SMatrix<C64, 3, 2> = plant.b.map(|v| Complex::new(v, 0.0));
    Some((w.transpose() * b).transpose())
}

/// Null direction of the voltage row, normalized with a real positive
/// leading component.
fn null_direction(row: Vector2<C64>) -> Option<Vector2<C64>> {
    let g = Vector2::new(row[1], -row[0]);
    let n = g.norm();
    if !(n > 0.0 && n.is_finite()) {
        return None;
    }
    let lead = if g[0].norm() > 0.0 { g[0] } else { g[1] };
    let phase = lead.conj() / lead.norm();
    Some(g.map(|c| c * phase / n))
}

fn decoupled_parameter_matrix(plant: &PlantMatrices, blocks: &TargetBlocks) -> Option<Matrix2x3<f64>> {
    let (c0, c1) = match blocks.leading.as_ref()? {
        LeadingPair::Complex(z) => {
            let g = null_direction(voltage_row(plant, *z)?)?;
            (g.map(|c| c.re), g.map(|c| c.im))
        }
        LeadingPair::Real(r0, r1) => {
            let g0 = null_direction(voltage_row(plant, C64::new(*r0, 0.0))?)?;
            let g1 = null_direction(voltage_row(plant, C64::new(*r1, 0.0))?)?;
            (g0.map(|c| c.re), g1.map(|c| c.re))
        }
    };
    let mut g = Matrix2x3::zeros();
    g.set_column(0, &c0);
    g.set_column(1, &c1);
    g.set_column(2, &Vector2::new(0.0, 1.0));
    Some(g)
}

/// Solves `A X − X Λ = B G` through its 9×9 Kronecker form. Returns `X` and
/// its 2-norm condition number.
fn solve_sylvester(
    plant: &PlantMatrices,
    lambda: &Matrix3<f64>,
    g: &Matrix2x3<f64>,
) -> Option<(Matrix3<f64>, f64)> {
    let mut m = SMatrix::<f64, 9, 9>::zeros();
    for j in 0..3 {
        for l in 0..3 {
            for i in 0..3 {
                for k in 0..3 {
                    let mut v = 0.0;
                    if j == l {
                        v += plant.a[(i, k)];
                    }
                    if i == k {
                        v -= lambda[(l, j)];
                    }
                    m[(3 * j + i, 3 * l + k)] = v;
                }
            }
        }
    }
    let rhs = plant.b * g;
    let rhs = SVector::<f64, 9>::from_iterator(rhs.iter().copied());
    let vec_x = m.lu().solve(&rhs)?;
    let x = Matrix3::from_iterator(vec_x.iter().copied());
    if !x.iter().all(|v| v.is_finite()) {
        return None;
    }
    let sv = x.singular_values();
    let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(mx, mn), &s| (mx.max(s), mn.min(s)));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    Some((x, condition))
}
