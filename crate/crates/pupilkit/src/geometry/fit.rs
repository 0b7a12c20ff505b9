//! Direct least-squares ellipse fitting.
//!
//! Solves the constrained algebraic-distance minimization of Fitzgibbon,
//! Pilu and Fisher with the numerically stabilized block decomposition of
//! Halir and Flusser: the scatter matrix is split into quadratic and linear
//! blocks so the reduced 3x3 eigenproblem stays well conditioned even when
//! the full 6x6 scatter matrix is near singular.

use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{conic::conic_to_ellipse, Ellipse, GeometryError};

const MIN_POINTS: usize = 6;

/// Fits an ellipse to a point cloud, minimizing algebraic distance under the
/// ellipse constraint `4AC - B^2 = 1`.
///
/// Requires at least 6 non-collinear points. The input is normalized
/// (centroid shift, isotropic scale) before solving, and the conic is mapped
/// back afterwards, so the fit is invariant under translation and rotation
/// of the point set up to floating-point rounding.
pub fn fit_ellipse_lsq(points: &[[f64; 2]]) -> Result<Ellipse, GeometryError> {
    if points.len() < MIN_POINTS {
        return Err(GeometryError::DegenerateInput(format!(
            "need at least {MIN_POINTS} points, got {}",
            points.len()
        )));
    }

    let (cx, cy, scale) = normalization(points);

    // Design blocks: D1 = [x^2, xy, y^2], D2 = [x, y, 1].
    let n = points.len();
    let mut d1 = DMatrix::<f64>::zeros(n, 3);
    let mut d2 = DMatrix::<f64>::zeros(n, 3);
    for (i, &[px, py]) in points.iter().enumerate() {
        let x = (px - cx) * scale;
        let y = (py - cy) * scale;
        d1[(i, 0)] = x * x;
        d1[(i, 1)] = x * y;
        d1[(i, 2)] = y * y;
        d2[(i, 0)] = x;
        d2[(i, 1)] = y;
        d2[(i, 2)] = 1.0;
    }

    let s1 = fixed3(&(d1.transpose() * &d1));
    let s2 = fixed3(&(d1.transpose() * &d2));
    let s3 = fixed3(&(d2.transpose() * &d2));

    let s3_inv = s3.try_inverse().ok_or_else(|| {
        GeometryError::DegenerateInput("linear scatter block is singular (collinear points)".into())
    })?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;

    // Reduced system: C1^-1 M a1 = lambda a1 with C1 = [[0,0,2],[0,-1,0],[2,0,0]].
    let c1_inv = Matrix3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0);
    let system = c1_inv * m;

    let a1 = constrained_eigenvector(&system).ok_or_else(|| {
        GeometryError::DegenerateInput("no eigenvector satisfies the ellipse constraint".into())
    })?;
    let a2 = t * a1;

    let coeffs = denormalize_conic([a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]], cx, cy, scale);
    let conic = Matrix3::new(
        coeffs[0],
        coeffs[1] / 2.0,
        coeffs[3] / 2.0,
        coeffs[1] / 2.0,
        coeffs[2],
        coeffs[4] / 2.0,
        coeffs[3] / 2.0,
        coeffs[4] / 2.0,
        coeffs[5],
    );

    conic_to_ellipse(&conic)
        .ok_or_else(|| GeometryError::DegenerateInput("fitted conic is not an ellipse".into()))
}

fn fixed3(m: &DMatrix<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[(r, c)])
}

/// Centroid and isotropic scale bringing the mean centroid distance to sqrt(2).
fn normalization(points: &[[f64; 2]]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    let scale = if mean_dist > 1e-12 {
        std::f64::consts::SQRT_2 / mean_dist
    } else {
        1.0
    };
    (cx, cy, scale)
}

/// Eigenvector of the (non-symmetric) reduced system satisfying the ellipse
/// constraint `4 v0 v2 - v1^2 > 0`. Eigenvalues come from the characteristic
/// cubic; eigenvectors from the adjugate of the shifted matrix.
fn constrained_eigenvector(system: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let tr = system.trace();
    let minor_sum = system[(0, 0)] * system[(1, 1)] - system[(0, 1)] * system[(1, 0)]
        + system[(0, 0)] * system[(2, 2)]
        - system[(0, 2)] * system[(2, 0)]
        + system[(1, 1)] * system[(2, 2)]
        - system[(1, 2)] * system[(2, 1)];
    let det = system.determinant();

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for lambda in real_cubic_roots(-tr, minor_sum, -det) {
        let shifted = system - Matrix3::identity() * lambda;
        let Some(v) = null_vector(&shifted) else {
            continue;
        };
        let constraint = 4.0 * v[0] * v[2] - v[1] * v[1];
        if constraint > 0.0 {
            // Exactly one admissible eigenvector exists generically; prefer
            // the smallest |lambda| if rounding produces several.
            if best.map_or(true, |(l, _)| lambda.abs() < l) {
                best = Some((lambda.abs(), v));
            }
        }
    }
    best.map(|(_, v)| v)
}

/// Null vector of a rank-2 matrix via the largest row of the adjugate.
fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let rows = [
        Vector3::new(
            m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)],
            m[(1, 2)] * m[(2, 0)] - m[(1, 0)] * m[(2, 2)],
            m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)],
        ),
        Vector3::new(
            m[(0, 2)] * m[(2, 1)] - m[(0, 1)] * m[(2, 2)],
            m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)],
            m[(0, 1)] * m[(2, 0)] - m[(0, 0)] * m[(2, 1)],
        ),
        Vector3::new(
            m[(0, 1)] * m[(1, 2)] - m[(0, 2)] * m[(1, 1)],
            m[(0, 2)] * m[(1, 0)] - m[(0, 0)] * m[(1, 2)],
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        ),
    ];
    let best = rows
        .iter()
        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
    if best.norm_squared() < 1e-28 {
        return None;
    }
    Some(best / best.norm())
}

/// Real roots of `x^3 + p2 x^2 + p1 x + p0`.
fn real_cubic_roots(p2: f64, p1: f64, p0: f64) -> Vec<f64> {
    let p = p1 - p2 * p2 / 3.0;
    let q = 2.0 * p2.powi(3) / 27.0 - p2 * p1 / 3.0 + p0;
    let shift = -p2 / 3.0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;

    if disc >= 0.0 {
        // Three real roots via the trigonometric form.
        let r = (-p / 3.0).max(0.0).sqrt();
        if r < 1e-300 {
            return vec![shift];
        }
        let cos_arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    } else {
        let sqrt_term = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = (-q / 2.0 + sqrt_term).cbrt();
        let v = (-q / 2.0 - sqrt_term).cbrt();
        vec![u + v + shift]
    }
}

/// Undo the point normalization on conic coefficients `[A,B,C,D,E,F]`:
/// substitute `x' = s(x - cx)`, `y' = s(y - cy)`.
fn denormalize_conic(c: [f64; 6], cx: f64, cy: f64, s: f64) -> [f64; 6] {
    let [a, b, cc, d, e, f] = c;
    let s2 = s * s;
    [
        a * s2,
        b * s2,
        cc * s2,
        -2.0 * a * s2 * cx - b * s2 * cy + d * s,
        -b * s2 * cx - 2.0 * cc * s2 * cy + e * s,
        a * s2 * cx * cx + b * s2 * cx * cy + cc * s2 * cy * cy - d * s * cx - e * s * cy + f,
    ]
}
