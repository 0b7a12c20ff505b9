//! sRGB <-> CIE L*a*b* conversion (D65 white point, sRGB transfer curve).

use ndarray::Array3;

use crate::RgbImage;

const XN: f64 = 0.95047;
const YN: f64 = 1.0;
const ZN: f64 = 1.08883;
// delta = 6/29 of the Lab forward function's linear/cubic split.
const DELTA: f64 = 6.0 / 29.0;

fn srgb_to_linear(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

/// Converts one sRGB triple to (L, a, b).
pub fn rgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let r = srgb_to_linear(rgb[0]);
    let g = srgb_to_linear(rgb[1]);
    let b = srgb_to_linear(rgb[2]);

    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    let fx = lab_f(x / XN);
    let fy = lab_f(y / YN);
    let fz = lab_f(z / ZN);

    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Converts one (L, a, b) triple back to sRGB with per-channel clamping.
pub fn lab_pixel_to_rgb(lab: [f64; 3]) -> [u8; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;

    let x = XN * lab_f_inv(fx);
    let y = YN * lab_f_inv(fy);
    let z = ZN * lab_f_inv(fz);

    let r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    let g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    let b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

    let to_u8 = |c: f64| (linear_to_srgb(c.clamp(0.0, 1.0)) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_u8(r), to_u8(g), to_u8(b)]
}

/// Converts an 8-bit RGB image to Lab planes (`H x W x 3` of `L, a, b`).
pub fn rgb_to_lab(image: &RgbImage) -> Array3<f64> {
    let (h, w, _) = image.dim();
    let mut out = Array3::<f64>::zeros((h, w, 3));
    for r in 0..h {
        for c in 0..w {
            let lab = rgb_pixel_to_lab([image[(r, c, 0)], image[(r, c, 1)], image[(r, c, 2)]]);
            out[(r, c, 0)] = lab[0];
            out[(r, c, 1)] = lab[1];
            out[(r, c, 2)] = lab[2];
        }
    }
    out
}

/// Converts Lab planes back to 8-bit RGB, clamping out-of-gamut values.
pub fn lab_to_rgb(lab: &Array3<f64>) -> RgbImage {
    let (h, w, _) = lab.dim();
    let mut out = Array3::<u8>::zeros((h, w, 3));
    for r in 0..h {
        for c in 0..w {
            let rgb = lab_pixel_to_rgb([lab[(r, c, 0)], lab[(r, c, 1)], lab[(r, c, 2)]]);
            out[(r, c, 0)] = rgb[0];
            out[(r, c, 1)] = rgb[1];
            out[(r, c, 2)] = rgb[2];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent straight-line oracle for one pixel, written against the
    /// published sRGB/D65 constants rather than the functions above.
    fn oracle_lab(rgb: [u8; 3]) -> [f64; 3] {
        let lin: Vec<f64> = rgb
            .iter()
            .map(|&v| {
                let c = v as f64 / 255.0;
                if c <= 0.04045 {
                    c / 12.92
                } else {
                    ((c + 0.055) / 1.055).powf(2.4)
                }
            })
            .collect();
        let x = (0.4124564 * lin[0] + 0.3575761 * lin[1] + 0.1804375 * lin[2]) / 0.95047;
        let y = 0.2126729 * lin[0] + 0.7151522 * lin[1] + 0.0721750 * lin[2];
        let z = (0.0193339 * lin[0] + 0.1191920 * lin[1] + 0.9503041 * lin[2]) / 1.08883;
        let f = |t: f64| {
            if t > 0.008856451679035631 {
                t.powf(1.0 / 3.0)
            } else {
                7.787037037037035 * t + 16.0 / 116.0
            }
        };
        [
            116.0 * f(y) - 16.0,
            500.0 * (f(x) - f(y)),
            200.0 * (f(y) - f(z)),
        ]
    }

    #[test]
    fn white_maps_to_l100_achromatic() {
        let lab = rgb_pixel_to_lab([255, 255, 255]);
        assert_relative_eq!(lab[0], 100.0, epsilon = 0.01);
        assert!(lab[1].abs() < 0.5 && lab[2].abs() < 0.5, "{lab:?}");
    }

    #[test]
    fn black_maps_to_origin() {
        let lab = rgb_pixel_to_lab([0, 0, 0]);
        assert_eq!(lab, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn mid_gray_matches_oracle_and_roundtrips() {
        let lab = rgb_pixel_to_lab([119, 119, 119]);
        let expected = oracle_lab([119, 119, 119]);
        assert_relative_eq!(lab[0], expected[0], epsilon = 1e-6);
        assert!(lab[1].abs() < 0.01 && lab[2].abs() < 0.01);
        let back = lab_pixel_to_rgb(lab);
        for ch in 0..3 {
            assert!((back[ch] as i32 - 119).abs() <= 1);
        }
    }

    #[test]
    fn assorted_pixels_match_oracle() {
        for rgb in [[12u8, 200, 33], [255, 0, 128], [73, 73, 80], [1, 2, 3]] {
            let got = rgb_pixel_to_lab(rgb);
            let want = oracle_lab(rgb);
            for ch in 0..3 {
                assert_relative_eq!(got[ch], want[ch], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn roundtrip_within_one_level() {
        for r in (0..=255).step_by(17) {
            for g in (0..=255).step_by(23) {
                for b in (0..=255).step_by(29) {
                    let rgb = [r as u8, g as u8, b as u8];
                    let back = lab_pixel_to_rgb(rgb_pixel_to_lab(rgb));
                    for ch in 0..3 {
                        assert!(
                            (back[ch] as i32 - rgb[ch] as i32).abs() <= 1,
                            "{rgb:?} -> {back:?}"
                        );
                    }
                }
            }
        }
    }
}
