//! Resampling primitives shared by dataset preparation and augmentation.
//!
//! Images are resized bilinearly; masks use nearest neighbour so they stay
//! binary. Both use the half-integer pixel-center convention
//! (`src = (dst + 0.5) * scale - 0.5`).

use ndarray::{Array2, Array3};

use crate::{Mask, RgbImage};

/// Bilinear resize of an 8-bit RGB image.
pub fn resize_rgb_bilinear(image: &RgbImage, out_h: usize, out_w: usize) -> RgbImage {
    let (h, w, _) = image.dim();
    let mut out = Array3::<u8>::zeros((out_h, out_w, 3));
    let scale_y = h as f64 / out_h as f64;
    let scale_x = w as f64 / out_w as f64;

    for r in 0..out_h {
        let sy = ((r as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f64;
        for c in 0..out_w {
            let sx = ((c as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f64;
            for ch in 0..3 {
                let v00 = image[(y0, x0, ch)] as f64;
                let v01 = image[(y0, x1, ch)] as f64;
                let v10 = image[(y1, x0, ch)] as f64;
                let v11 = image[(y1, x1, ch)] as f64;
                let top = v00 + (v01 - v00) * fx;
                let bot = v10 + (v11 - v10) * fx;
                out[(r, c, ch)] = (top + (bot - top) * fy).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    out
}

/// Nearest-neighbour resize of a binary mask.
pub fn resize_mask_nearest(mask: &Mask, out_h: usize, out_w: usize) -> Mask {
    let (h, w) = mask.dim();
    let mut out = Array2::<u8>::zeros((out_h, out_w));
    let scale_y = h as f64 / out_h as f64;
    let scale_x = w as f64 / out_w as f64;
    for r in 0..out_h {
        let sy = (((r as f64 + 0.5) * scale_y - 0.5).round().max(0.0) as usize).min(h - 1);
        for c in 0..out_w {
            let sx = (((c as f64 + 0.5) * scale_x - 0.5).round().max(0.0) as usize).min(w - 1);
            out[(r, c)] = mask[(sy, sx)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn identity_resize_is_noop() {
        let mut img = Array3::<u8>::zeros((8, 10, 3));
        for (i, v) in img.iter_mut().enumerate() {
            *v = (i % 251) as u8;
        }
        assert_eq!(resize_rgb_bilinear(&img, 8, 10), img);

        let mut mask = Array2::<u8>::zeros((8, 10));
        mask[(3, 4)] = 1;
        assert_eq!(resize_mask_nearest(&mask, 8, 10), mask);
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = Array3::<u8>::from_elem((30, 40, 3), 137);
        let out = resize_rgb_bilinear(&img, 22, 22);
        assert!(out.iter().all(|&v| v == 137));
    }

    #[test]
    fn mask_resize_stays_binary_and_tracks_area() {
        let mut mask = Array2::<u8>::zeros((300, 400));
        for r in 100..200 {
            for c in 150..250 {
                mask[(r, c)] = 1;
            }
        }
        let out = resize_mask_nearest(&mask, 224, 224);
        assert!(out.iter().all(|&v| v <= 1));
        let area_in = 100.0 * 100.0 / (300.0 * 400.0);
        let area_out = out.iter().map(|&v| v as f64).sum::<f64>() / (224.0 * 224.0);
        assert!((area_in - area_out).abs() < 0.01);
    }
}
