//! Pupil-boundary geometry: the ellipse quintuple, direct least-squares
//! fitting, exact conic transforms, parameter normalization, and the scalar
//! measures derived from them.
//!
//! Angles are degrees, measured counterclockwise from the horizontal axis,
//! canonicalized to `[0, 180)`. Pixel `(row r, col c)` of a mask covers the
//! unit square `[c, c+1) x [r, r+1)` and has its center at `(c+0.5, r+0.5)`;
//! all continuous coordinates in this module use that convention, so flipping
//! a `W`-wide image maps `x` to `W - x`.

mod conic;
mod fit;
mod mask;
mod raster;

pub use conic::AffineTransform2D;
pub use fit::fit_ellipse_lsq;
pub use mask::{largest_component, mask_to_ellipse, solidity, trace_boundary_points};
pub use raster::rasterize_ellipse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from geometric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Too few or degenerate points for fitting (collinear, coincident, or
    /// the constrained eigenproblem has no ellipse solution).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// A mask operation was given a mask with no foreground pixels.
    #[error("mask has no foreground pixels")]
    EmptyMask,
    /// The fitted contour failed the solidity filter (threshold 0.5).
    #[error("rejected by solidity filter: solidity = {value:.4} < 0.5")]
    RejectedBySolidity { value: f64 },
    /// The fitted ellipse failed the aspect-ratio filter (threshold 0.5).
    #[error("rejected by aspect-ratio filter: b/a = {value:.4} < 0.5")]
    RejectedByAspect { value: f64 },
    /// Parameter normalization requires a square image.
    #[error("normalization requires a square image, got {width}x{height}")]
    NonSquareInput { width: usize, height: usize },
    /// A normalized parameter left its declared interval.
    #[error("normalized parameter {field} = {value} out of range")]
    OutOfRange { field: &'static str, value: f64 },
    /// The affine transform is not invertible.
    #[error("affine transform is singular (det = {det:.3e})")]
    SingularTransform { det: f64 },
    /// Invalid ellipse parameters (axes not positive, minor > major, or
    /// non-finite values).
    #[error("invalid ellipse parameters: {0}")]
    InvalidEllipse(String),
}

/// An elliptical pupil boundary: center `(xc, yc)`, semi-major axis `a`,
/// semi-minor axis `b`, and rotation `theta` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    /// Center x in pixels.
    pub xc: f64,
    /// Center y in pixels.
    pub yc: f64,
    /// Semi-major axis in pixels (`a >= b`).
    pub a: f64,
    /// Semi-minor axis in pixels.
    pub b: f64,
    /// Rotation of the major axis in degrees, in `[0, 180)`.
    #[serde(rename = "theta_deg")]
    pub theta: f64,
}

impl Ellipse {
    /// Builds an ellipse, validating `a >= b > 0` and finiteness, and
    /// wrapping `theta` into `[0, 180)`. Circles report `theta = 0`.
    pub fn new(xc: f64, yc: f64, a: f64, b: f64, theta: f64) -> Result<Self, GeometryError> {
        if !(xc.is_finite() && yc.is_finite() && a.is_finite() && b.is_finite() && theta.is_finite())
        {
            return Err(GeometryError::InvalidEllipse("non-finite parameter".into()));
        }
        if b <= 0.0 {
            return Err(GeometryError::InvalidEllipse(format!(
                "semi-minor axis must be positive, got {b}"
            )));
        }
        if a < b {
            return Err(GeometryError::InvalidEllipse(format!(
                "semi-major axis {a} smaller than semi-minor axis {b}"
            )));
        }
        let theta = if a == b { 0.0 } else { wrap_angle_deg(theta) };
        Ok(Self { xc, yc, a, b, theta })
    }

    /// Builds an ellipse from possibly unordered axes: if the first axis is
    /// shorter than the second, the axes are swapped and the angle rotated
    /// by 90 degrees so the result satisfies the `a >= b` invariant.
    pub fn canonicalized(
        xc: f64,
        yc: f64,
        ax0: f64,
        ax1: f64,
        theta: f64,
    ) -> Result<Self, GeometryError> {
        if ax0 >= ax1 {
            Self::new(xc, yc, ax0, ax1, theta)
        } else {
            Self::new(xc, yc, ax1, ax0, theta + 90.0)
        }
    }

    /// Rotation angle in radians.
    pub fn theta_rad(&self) -> f64 {
        self.theta.to_radians()
    }

    /// Samples `n` points uniformly in parameter angle on the boundary.
    pub fn boundary_points(&self, n: usize) -> Vec<[f64; 2]> {
        let (sin_t, cos_t) = self.theta_rad().sin_cos();
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
                let (px, py) = (self.a * t.cos(), self.b * t.sin());
                [
                    self.xc + cos_t * px - sin_t * py,
                    self.yc + sin_t * px + cos_t * py,
                ]
            })
            .collect()
    }

    /// True if `(x, y)` lies inside or on the boundary.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (sin_t, cos_t) = self.theta_rad().sin_cos();
        let (dx, dy) = (x - self.xc, y - self.yc);
        let u = cos_t * dx + sin_t * dy;
        let v = -sin_t * dx + cos_t * dy;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }

    /// Aspect ratio `b / a`, in `(0, 1]`.
    pub fn aspect_ratio(&self) -> f64 {
        self.b / self.a
    }

    /// Applies an invertible affine map to the ellipse, exactly, via the
    /// conic matrix transform `C' = T^-T C T^-1`. Exact for anisotropic
    /// scaling, so resized ground truth stays noise-free.
    pub fn transform(&self, t: &AffineTransform2D) -> Result<Self, GeometryError> {
        conic::transform_ellipse(self, t)
    }
}

/// Pupil diameter `PD = a + b` (twice the mean semi-axis).
pub fn pupil_diameter(e: &Ellipse) -> f64 {
    e.a + e.b
}

/// Ellipse parameters scaled to unit ranges for use as regression targets.
///
/// Center coordinates and full axis lengths are divided by the image
/// dimension; the angle is divided by 180 after wrapping into `(-180, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEllipse {
    pub nxc: f64,
    pub nyc: f64,
    /// Full major axis `2a` over the image dimension.
    pub nd_major: f64,
    /// Full minor axis `2b` over the image dimension.
    pub nd_minor: f64,
    /// `theta / 180`, in `[-1, 1]`.
    pub ntheta: f64,
}

impl NormalizedEllipse {
    /// Checks the declared intervals: centers and axes in `(0, 1)`,
    /// `nd_minor <= nd_major`, angle in `[-1, 1]`.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let open_unit: [(&'static str, f64); 4] = [
            ("nxc", self.nxc),
            ("nyc", self.nyc),
            ("nd_major", self.nd_major),
            ("nd_minor", self.nd_minor),
        ];
        for (field, value) in open_unit {
            if !(value > 0.0 && value < 1.0) {
                return Err(GeometryError::OutOfRange { field, value });
            }
        }
        if self.nd_minor > self.nd_major {
            return Err(GeometryError::InvalidEllipse(format!(
                "normalized minor axis {} exceeds major axis {}",
                self.nd_minor, self.nd_major
            )));
        }
        if !(-1.0..=1.0).contains(&self.ntheta) {
            return Err(GeometryError::OutOfRange {
                field: "ntheta",
                value: self.ntheta,
            });
        }
        Ok(())
    }

    /// The five parameters as an array `[nxc, nyc, nd_major, nd_minor, ntheta]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.nxc, self.nyc, self.nd_major, self.nd_minor, self.ntheta]
    }

    /// Inverse of [`to_array`](Self::to_array); performs no validation.
    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            nxc: v[0],
            nyc: v[1],
            nd_major: v[2],
            nd_minor: v[3],
            ntheta: v[4],
        }
    }
}

/// Scales an ellipse to unit-range regression targets for a square
/// `width x height` image.
pub fn normalize_params(
    e: &Ellipse,
    width: usize,
    height: usize,
) -> Result<NormalizedEllipse, GeometryError> {
    if width != height {
        return Err(GeometryError::NonSquareInput { width, height });
    }
    let dim = width as f64;
    let n = NormalizedEllipse {
        nxc: e.xc / dim,
        nyc: e.yc / dim,
        nd_major: 2.0 * e.a / dim,
        nd_minor: 2.0 * e.b / dim,
        ntheta: wrap_angle_signed_deg(e.theta) / 180.0,
    };
    n.validate()?;
    Ok(n)
}

/// Exact inverse of [`normalize_params`] on its image. Errors if the
/// normalized tuple violates its invariants (e.g. minor axis larger than
/// major).
pub fn denormalize_params(n: &NormalizedEllipse, width: usize) -> Result<Ellipse, GeometryError> {
    n.validate()?;
    let dim = width as f64;
    Ellipse::new(
        n.nxc * dim,
        n.nyc * dim,
        n.nd_major * dim / 2.0,
        n.nd_minor * dim / 2.0,
        n.ntheta * 180.0,
    )
}

/// Lenient decoder for network outputs: the five raw activations are mapped
/// back to pixel space with axis order fixed up by swap-and-rotate instead
/// of rejected, since independent output units cannot guarantee ordering.
pub fn denormalize_prediction(raw: &NormalizedEllipse, width: usize) -> Result<Ellipse, GeometryError> {
    let dim = width as f64;
    Ellipse::canonicalized(
        raw.nxc * dim,
        raw.nyc * dim,
        raw.nd_major * dim / 2.0,
        raw.nd_minor * dim / 2.0,
        raw.ntheta * 180.0,
    )
}

/// Wraps an angle in degrees into `[0, 180)` (ellipse axes are unoriented).
pub(crate) fn wrap_angle_deg(theta: f64) -> f64 {
    let mut t = theta % 180.0;
    if t < 0.0 {
        t += 180.0;
    }
    // `-1e-16 % 180` is `-1e-16`; adding 180 rounds to 180 exactly.
    if t >= 180.0 {
        t = 0.0;
    }
    t
}

/// Wraps an angle into `(-180, 180]`.
fn wrap_angle_signed_deg(theta: f64) -> f64 {
    let mut t = theta % 360.0;
    if t <= -180.0 {
        t += 360.0;
    } else if t > 180.0 {
        t -= 360.0;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ellipse_new_validates_and_wraps() {
        let e = Ellipse::new(10.0, 20.0, 5.0, 3.0, 190.0).unwrap();
        assert_relative_eq!(e.theta, 10.0);
        let e = Ellipse::new(10.0, 20.0, 5.0, 3.0, -30.0).unwrap();
        assert_relative_eq!(e.theta, 150.0);
        assert!(Ellipse::new(0.0, 0.0, 2.0, 3.0, 0.0).is_err());
        assert!(Ellipse::new(0.0, 0.0, 2.0, 0.0, 0.0).is_err());
        assert!(Ellipse::new(f64::NAN, 0.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn circle_reports_zero_angle() {
        let e = Ellipse::new(1.0, 2.0, 4.0, 4.0, 77.0).unwrap();
        assert_eq!(e.theta, 0.0);
    }

    #[test]
    fn canonicalized_swaps_axes() {
        let e = Ellipse::canonicalized(0.0, 0.0, 2.0, 5.0, 40.0).unwrap();
        assert_relative_eq!(e.a, 5.0);
        assert_relative_eq!(e.b, 2.0);
        assert_relative_eq!(e.theta, 130.0);
    }

    #[test]
    fn pupil_diameter_is_axis_sum() {
        let e = Ellipse::new(0.0, 0.0, 30.0, 20.0, 0.0).unwrap();
        assert_relative_eq!(pupil_diameter(&e), 50.0);
        let circle = Ellipse::new(0.0, 0.0, 7.5, 7.5, 0.0).unwrap();
        assert_relative_eq!(pupil_diameter(&circle), 15.0);
        let e = Ellipse::new(0.0, 0.0, 56.0, 28.0, 0.0).unwrap();
        assert_relative_eq!(pupil_diameter(&e), 84.0);
    }

    #[test]
    fn normalize_examples() {
        let e = Ellipse::new(112.0, 112.0, 56.0, 28.0, 90.0).unwrap();
        let n = normalize_params(&e, 224, 224).unwrap();
        assert_eq!(
            n.to_array(),
            [0.5, 0.5, 0.5, 0.25, 0.5],
            "center half-image, axes half/quarter, angle 90/180"
        );

        let e0 = Ellipse::new(112.0, 112.0, 56.0, 28.0, 0.0).unwrap();
        let n0 = normalize_params(&e0, 224, 224).unwrap();
        assert_eq!(n0.to_array(), [0.5, 0.5, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn normalize_rejects_center_outside() {
        let e = Ellipse::new(300.0, 150.0, 40.0, 20.0, 45.0).unwrap();
        let err = normalize_params(&e, 224, 224).unwrap_err();
        assert!(matches!(err, GeometryError::OutOfRange { field: "nxc", .. }));
    }

    #[test]
    fn normalize_rejects_non_square() {
        let e = Ellipse::new(100.0, 100.0, 20.0, 10.0, 0.0).unwrap();
        let err = normalize_params(&e, 400, 300).unwrap_err();
        assert!(matches!(err, GeometryError::NonSquareInput { .. }));
    }

    #[test]
    fn denormalize_example() {
        let n = NormalizedEllipse::from_array([0.5, 0.5, 0.5, 0.25, 0.5]);
        let e = denormalize_params(&n, 224).unwrap();
        assert_relative_eq!(e.xc, 112.0);
        assert_relative_eq!(e.yc, 112.0);
        assert_relative_eq!(e.a, 56.0);
        assert_relative_eq!(e.b, 28.0);
        assert_relative_eq!(e.theta, 90.0);
    }

    #[test]
    fn denormalize_rejects_swapped_axes() {
        let n = NormalizedEllipse::from_array([0.5, 0.5, 0.25, 0.5, 0.0]);
        assert!(denormalize_params(&n, 224).is_err());
        // The lenient prediction decoder fixes the same tuple up instead.
        let e = denormalize_prediction(&n, 224).unwrap();
        assert_relative_eq!(e.a, 56.0);
        assert_relative_eq!(e.b, 28.0);
        assert_relative_eq!(e.theta, 90.0);
    }

    #[test]
    fn ellipse_json_shape() {
        let e = Ellipse::new(1.0, 2.0, 4.0, 3.0, 10.0).unwrap();
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["xc"], 1.0);
        assert_eq!(json["theta_deg"], 10.0);
    }
}
