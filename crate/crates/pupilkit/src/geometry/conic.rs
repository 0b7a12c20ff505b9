//! Conic-matrix representation of ellipses and exact transformation under
//! invertible affine maps.

use nalgebra::{Matrix2, Matrix3, Vector2};

use super::{Ellipse, GeometryError};

/// An invertible 2D affine map `p -> m * p + t` in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform2D {
    pub m: Matrix2<f64>,
    pub t: Vector2<f64>,
}

impl AffineTransform2D {
    pub fn new(m: [[f64; 2]; 2], t: [f64; 2]) -> Self {
        Self {
            m: Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]),
            t: Vector2::new(t[0], t[1]),
        }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    }

    /// Anisotropic scaling about the origin.
    pub fn scale(sx: f64, sy: f64) -> Self {
        Self::new([[sx, 0.0], [0.0, sy]], [0.0, 0.0])
    }

    /// Mirror about the vertical line `x = width / 2`; `x -> width - x`.
    pub fn horizontal_flip(width: f64) -> Self {
        Self::new([[-1.0, 0.0], [0.0, 1.0]], [width, 0.0])
    }

    /// Mirror about the horizontal line `y = height / 2`; `y -> height - y`.
    pub fn vertical_flip(height: f64) -> Self {
        Self::new([[1.0, 0.0], [0.0, -1.0]], [0.0, height])
    }

    /// Quarter-turn matching `rotate90` on a `width x height` pixel array:
    /// `(x, y) -> (y, width - x)`. The rotated image is `height` wide.
    pub fn rotate90(width: f64) -> Self {
        Self::new([[0.0, 1.0], [-1.0, 0.0]], [0.0, width])
    }

    /// Half-turn on a `width x height` image: `(x, y) -> (width - x, height - y)`.
    pub fn rotate180(width: f64, height: f64) -> Self {
        Self::new([[-1.0, 0.0], [0.0, -1.0]], [width, height])
    }

    /// Three-quarter turn on a `width x height` image: `(x, y) -> (height - y, x)`.
    pub fn rotate270(height: f64) -> Self {
        Self::new([[0.0, -1.0], [1.0, 0.0]], [height, 0.0])
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: self.m * other.m,
            t: self.m * other.t + self.t,
        }
    }

    pub fn apply_point(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.m * Vector2::new(p[0], p[1]) + self.t;
        [q.x, q.y]
    }

    /// Homogeneous 3x3 form.
    fn homogeneous(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.m[(0, 0)],
            self.m[(0, 1)],
            self.t.x,
            self.m[(1, 0)],
            self.m[(1, 1)],
            self.t.y,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// Symmetric conic matrix of an ellipse: `x^T C x = 0` in homogeneous
/// coordinates, scaled so the quadratic form equals
/// `(u/a)^2 + (v/b)^2 - 1` in the ellipse frame.
pub(crate) fn ellipse_to_conic(e: &Ellipse) -> Matrix3<f64> {
    let (sin_t, cos_t) = e.theta_rad().sin_cos();
    let (ia2, ib2) = (1.0 / (e.a * e.a), 1.0 / (e.b * e.b));

    let ca = cos_t * cos_t * ia2 + sin_t * sin_t * ib2;
    let cb = 2.0 * cos_t * sin_t * (ia2 - ib2);
    let cc = sin_t * sin_t * ia2 + cos_t * cos_t * ib2;
    let cd = -2.0 * ca * e.xc - cb * e.yc;
    let ce = -cb * e.xc - 2.0 * cc * e.yc;
    let cf = ca * e.xc * e.xc + cb * e.xc * e.yc + cc * e.yc * e.yc - 1.0;

    Matrix3::new(
        ca,
        cb / 2.0,
        cd / 2.0,
        cb / 2.0,
        cc,
        ce / 2.0,
        cd / 2.0,
        ce / 2.0,
        cf,
    )
}

/// Extracts the geometric quintuple from a conic matrix.
///
/// Returns `None` when the conic is not a real ellipse (discriminant test or
/// non-positive squared axes).
pub(crate) fn conic_to_ellipse(c: &Matrix3<f64>) -> Option<Ellipse> {
    let (a, b_half, cc) = (c[(0, 0)], c[(0, 1)], c[(1, 1)]);
    let (d_half, e_half, f) = (c[(0, 2)], c[(1, 2)], c[(2, 2)]);
    let b = 2.0 * b_half;
    let d = 2.0 * d_half;
    let e = 2.0 * e_half;

    let disc = b * b - 4.0 * a * cc;
    if disc >= 0.0 {
        return None;
    }

    // Center from the gradient zero: 2A xc + B yc + D = 0, B xc + 2C yc + E = 0.
    let denom = -disc;
    let xc = (b * e - 2.0 * cc * d) / denom;
    let yc = (b * d - 2.0 * a * e) / denom;

    // Eigenvalues of the quadratic part give the axis scales.
    let sum = a + cc;
    let diff = ((a - cc).powi(2) + b * b).sqrt();
    let lambda1 = (sum + diff) / 2.0;
    let lambda2 = (sum - diff) / 2.0;

    // Conic value at the center.
    let f_c = a * xc * xc + b * xc * yc + cc * yc * yc + d * xc + e * yc + f;
    if f_c == 0.0 {
        return None;
    }

    let ax1_sq = -f_c / lambda1;
    let ax2_sq = -f_c / lambda2;
    if ax1_sq <= 0.0 || ax2_sq <= 0.0 {
        return None;
    }

    // lambda1 is the larger eigenvalue, so ax1 is the shorter axis. The
    // eigenvector of the *smaller* eigenvalue carries the major direction:
    // angle from atan2 on the quadratic part.
    let theta_rad = if b == 0.0 {
        if a <= cc {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        0.5 * b.atan2(a - cc) + std::f64::consts::FRAC_PI_2
    };

    let semi_minor = ax1_sq.sqrt();
    let semi_major = ax2_sq.sqrt();

    Ellipse::canonicalized(xc, yc, semi_major, semi_minor, theta_rad.to_degrees()).ok()
}

/// Applies an invertible affine map to an ellipse exactly via
/// `C' = T^-T C T^-1`.
pub(crate) fn transform_ellipse(
    e: &Ellipse,
    t: &AffineTransform2D,
) -> Result<Ellipse, GeometryError> {
    let det = t.det();
    if det.abs() < 1e-12 {
        return Err(GeometryError::SingularTransform { det });
    }
    let t_inv = t
        .homogeneous()
        .try_inverse()
        .ok_or(GeometryError::SingularTransform { det })?;
    let transformed = t_inv.transpose() * ellipse_to_conic(e) * t_inv;
    // An invertible affine image of an ellipse is always an ellipse.
    let out = conic_to_ellipse(&transformed)
        .unwrap_or_else(|| panic!("affine image of an ellipse must be an ellipse (det = {det})"));
    Ok(out)
}
