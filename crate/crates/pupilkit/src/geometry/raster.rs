//! Ellipse rasterization, the inverse of mask fitting and the ground-truth
//! generator for consistency checks.

use ndarray::Array2;

use super::Ellipse;
use crate::Mask;

/// Rasterizes a filled ellipse into an `height x width` binary mask: pixel
/// `(r, c)` is foreground iff its center `(c + 0.5, r + 0.5)` lies inside or
/// on the ellipse.
pub fn rasterize_ellipse(e: &Ellipse, height: usize, width: usize) -> Mask {
    let mut mask = Array2::<u8>::zeros((height, width));

    // Tight axis-aligned bounding box of the rotated ellipse.
    let (sin_t, cos_t) = e.theta_rad().sin_cos();
    let half_x = ((e.a * cos_t).powi(2) + (e.b * sin_t).powi(2)).sqrt();
    let half_y = ((e.a * sin_t).powi(2) + (e.b * cos_t).powi(2)).sqrt();
    let r0 = ((e.yc - half_y - 1.0).floor().max(0.0)) as usize;
    let r1 = ((e.yc + half_y + 1.0).ceil().min(height as f64)) as usize;
    let c0 = ((e.xc - half_x - 1.0).floor().max(0.0)) as usize;
    let c1 = ((e.xc + half_x + 1.0).ceil().min(width as f64)) as usize;

    for r in r0..r1 {
        for c in c0..c1 {
            if e.contains(c as f64 + 0.5, r as f64 + 0.5) {
                mask[(r, c)] = 1;
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_close_to_analytic() {
        let e = Ellipse::new(112.0, 112.0, 30.0, 30.0, 0.0).unwrap();
        let mask = rasterize_ellipse(&e, 224, 224);
        let count = mask.iter().map(|&v| v as usize).sum::<usize>() as f64;
        let analytic = std::f64::consts::PI * 30.0 * 30.0;
        assert!(
            (count - analytic).abs() / analytic < 0.01,
            "pixel count {count} vs analytic {analytic}"
        );
    }

    #[test]
    fn rotated_ellipse_area_close_to_analytic() {
        let e = Ellipse::new(100.0, 90.0, 40.0, 18.0, 37.0).unwrap();
        let mask = rasterize_ellipse(&e, 224, 224);
        let count = mask.iter().map(|&v| v as usize).sum::<usize>() as f64;
        let analytic = std::f64::consts::PI * 40.0 * 18.0;
        assert!((count - analytic).abs() / analytic < 0.01);
    }

    #[test]
    fn clips_at_image_border() {
        let e = Ellipse::new(2.0, 2.0, 10.0, 10.0, 0.0).unwrap();
        let mask = rasterize_ellipse(&e, 32, 32);
        assert_eq!(mask[(0, 0)], 1);
        assert_eq!(mask[(31, 31)], 0);
    }
}
