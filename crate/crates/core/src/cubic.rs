//! Characteristic polynomials and eigenvalues of 3×3 real matrices.
//!
//! Roots of the monic cubic are found in closed form (trigonometric branch for
//! three real roots, Cardano otherwise) and then polished with a few Newton
//! steps on the undeflated polynomial.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{Complex, Matrix3};

pub type C64 = Complex<f64>;

/// Coefficients `[1, c2, c1, c0]` of `det(λI − M) = λ³ + c2 λ² + c1 λ + c0`.
pub fn characteristic_polynomial(m: &Matrix3<f64>) -> [f64; 4] {
    let trace = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    [1.0, -trace, minors, -m.determinant()]
}

/// Eigenvalues of `m`, sorted by (real, imaginary) ascending.
pub fn eigenvalues(m: &Matrix3<f64>) -> [C64; 3] {
    let c = characteristic_polynomial(m);
    cubic_roots(c[1], c[2], c[3])
}

/// Total order on complex numbers by real part, then imaginary part.
pub fn cmp_complex(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn eval(c2: f64, c1: f64, c0: f64, x: C64) -> (C64, C64) {
    let f = ((x + c2) * x + c1) * x + c0;
    let df = (x * 3.0 + 2.0 * c2) * x + c1;
    (f, df)
}

fn polish(c2: f64, c1: f64, c0: f64, mut x: C64) -> C64 {
    for _ in 0..4 {
        let (f, df) = eval(c2, c1, c0, x);
        if df.norm() == 0.0 || f.norm() == 0.0 {
            break;
        }
        let step = f / df;
        let next = x - step;
        // Keep the polished value only while the residual keeps shrinking;
        // near multiple roots Newton stalls and may wander.
        if eval(c2, c1, c0, next).0.norm() < f.norm() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Roots of `λ³ + c2 λ² + c1 λ + c0`, sorted by (real, imaginary).
/// Complex roots come out as an exact conjugate pair.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [C64; 3] {
    let shift = c2 / 3.0;
    // depressed cubic t³ + p t + q with λ = t − c2/3
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    let mut roots = if disc < 0.0 {
        // three distinct real roots (p < 0 here)
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut r = [0.0; 3];
        for (k, slot) in r.iter_mut().enumerate() {
            let t = m * (theta - 2.0 * PI * k as f64 / 3.0).cos();
            *slot = polish(c2, c1, c0, C64::new(t - shift, 0.0)).re;
        }
        [C64::new(r[0], 0.0), C64::new(r[1], 0.0), C64::new(r[2], 0.0)]
    } else {
        let sq = disc.sqrt();
        // choose the sign that avoids cancellation
        let u = (-q / 2.0 - q.signum() * sq).cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let real = polish(c2, c1, c0, C64::new(u + v - shift, 0.0)).re;

        // deflate to λ² + b1 λ + b0
        let b1 = c2 + real;
        let b0 = if real.abs() > 1e-8 && real * real > (c1 + real * b1).abs() {
            // forward deflation is stable when the real root dominates
            c1 + real * b1
        } else if real != 0.0 {
            -c0 / real
        } else {
            c1
        };
        let qd = b1 * b1 - 4.0 * b0;
        let [r1, r2] = if qd < 0.0 {
            let z = polish(c2, c1, c0, C64::new(-b1 / 2.0, (-qd).sqrt() / 2.0));
            let z = C64::new(z.re, z.im.abs());
            [z, z.conj()]
        } else {
            let t = -(b1 + b1.signum() * qd.sqrt()) / 2.0;
            let (a, b) = if t != 0.0 { (t, b0 / t) } else { (0.0, -b1) };
            [
                polish(c2, c1, c0, C64::new(a, 0.0)),
                polish(c2, c1, c0, C64::new(b, 0.0)),
            ]
        };
        [C64::new(real, 0.0), r1, r2]
    };
    roots.sort_by(cmp_complex);
    roots
}

/// Coefficients of `(λ − r1)(λ − r2)(λ − r3)` and the largest imaginary
/// residue relative to the coefficient scale.
pub fn poly_from_roots(roots: &[C64; 3]) -> ([f64; 4], f64) {
    let one = C64::new(1.0, 0.0);
    let mut c = [one, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    for (n, r) in roots.iter().enumerate() {
        for i in (1..=n + 1).rev() {
            c[i] -= *r * c[i - 1];
        }
    }
    let residue = c
        .iter()
        .map(|z| z.im.abs() / z.re.abs().max(1.0))
        .fold(0.0, f64::max);
    ([c[0].re, c[1].re, c[2].re, c[3].re], residue)
}
