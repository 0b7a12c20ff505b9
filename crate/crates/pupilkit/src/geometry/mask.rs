//! Binary-mask shape analysis: component extraction, boundary tracing,
//! solidity, and mask-to-ellipse conversion with the outlier filter.

use ndarray::Array2;

use super::{fit_ellipse_lsq, Ellipse, GeometryError};
use crate::Mask;

/// Minimum solidity and aspect ratio for an accepted pupil contour.
pub const SHAPE_FILTER_THRESHOLD: f64 = 0.5;

/// Extracts the largest 8-connected foreground component as a binary mask
/// together with its pixel count.
pub fn largest_component(mask: &Mask) -> Result<(Mask, usize), GeometryError> {
    let (h, w) = mask.dim();
    let mut labels = Array2::<u32>::zeros((h, w));
    let mut next_label = 0u32;
    let mut best: (u32, usize) = (0, 0);
    let mut stack = Vec::new();

    for r in 0..h {
        for c in 0..w {
            if mask[(r, c)] == 0 || labels[(r, c)] != 0 {
                continue;
            }
            next_label += 1;
            let label = next_label;
            let mut count = 0usize;
            stack.push((r, c));
            labels[(r, c)] = label;
            while let Some((pr, pc)) = stack.pop() {
                count += 1;
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (nr, nc) = (pr as i64 + dr, pc as i64 + dc);
                        if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                            continue;
                        }
                        let (nr, nc) = (nr as usize, nc as usize);
                        if mask[(nr, nc)] != 0 && labels[(nr, nc)] == 0 {
                            labels[(nr, nc)] = label;
                            stack.push((nr, nc));
                        }
                    }
                }
            }
            if count > best.1 {
                best = (label, count);
            }
        }
    }

    if best.1 == 0 {
        return Err(GeometryError::EmptyMask);
    }
    let component = labels.mapv(|l| u8::from(l == best.0));
    Ok((component, best.1))
}

/// Boundary samples of a binary region at pixel-grid resolution: the
/// midpoint of every foreground/background pixel-center pair (horizontal and
/// vertical neighbours, with virtual background outside the image). The
/// transition midpoint straddles the true contour without the half-pixel
/// inward bias that centers of boundary pixels carry.
pub fn trace_boundary_points(mask: &Mask) -> Vec<[f64; 2]> {
    let (h, w) = mask.dim();
    let fg = |r: i64, c: i64| -> bool {
        r >= 0 && c >= 0 && r < h as i64 && c < w as i64 && mask[(r as usize, c as usize)] != 0
    };
    let mut points = Vec::new();
    for r in 0..h as i64 {
        for c in -1..w as i64 {
            if fg(r, c) != fg(r, c + 1) {
                points.push([(c + 1) as f64, r as f64 + 0.5]);
            }
        }
    }
    for c in 0..w as i64 {
        for r in -1..h as i64 {
            if fg(r, c) != fg(r + 1, c) {
                points.push([c as f64 + 0.5, (r + 1) as f64]);
            }
        }
    }
    points
}

/// Solidity of the largest foreground component: pixel count over the pixel
/// count of the filled convex hull (hull of pixel centers, rasterized by
/// center inclusion). Convexly rasterized regions score exactly 1, and the
/// hull always covers the component, so the ratio stays in `(0, 1]`.
pub fn solidity(mask: &Mask) -> Result<f64, GeometryError> {
    let (component, count) = largest_component(mask)?;
    Ok(component_solidity(&component, count))
}

fn component_solidity(component: &Mask, count: usize) -> f64 {
    // Pixel centers sit on the half-integer grid; doubling the coordinates
    // keeps the hull and the inclusion tests in exact integer arithmetic.
    let centers = boundary_pixel_centers_doubled(component);
    let hull = convex_hull(&centers);
    if hull.len() < 3 {
        // Single pixel, row, or column: the hull degenerates and covers
        // exactly the component.
        return 1.0;
    }
    let convex_count = count_centers_in_hull(component.dim(), &hull);
    count as f64 / convex_count.max(count) as f64
}

/// Doubled center coordinates of every boundary pixel (pixels touching
/// background or the image edge). Interior pixels cannot be hull-extremal.
fn boundary_pixel_centers_doubled(component: &Mask) -> Vec<(i64, i64)> {
    let (h, w) = component.dim();
    let bg = |r: i64, c: i64| -> bool {
        r < 0 || c < 0 || r >= h as i64 || c >= w as i64 || component[(r as usize, c as usize)] == 0
    };
    let mut centers = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if component[(r, c)] == 0 {
                continue;
            }
            let (ri, ci) = (r as i64, c as i64);
            if bg(ri - 1, ci) || bg(ri + 1, ci) || bg(ri, ci - 1) || bg(ri, ci + 1) {
                centers.push((2 * ci + 1, 2 * ri + 1));
            }
        }
    }
    centers.sort_unstable();
    centers.dedup();
    centers
}

/// Counts pixel centers of the `(h, w)` grid lying inside or on the convex
/// polygon (vertices in doubled coordinates, consistent winding).
fn count_centers_in_hull(dim: (usize, usize), hull: &[(i64, i64)]) -> usize {
    let (h, w) = dim;
    let (min_x, max_x) = hull.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| {
        (lo.min(p.0), hi.max(p.0))
    });
    let (min_y, max_y) = hull.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| {
        (lo.min(p.1), hi.max(p.1))
    });
    let c_range = ((min_x - 1) / 2).max(0)..=((max_x - 1) / 2).min(w as i64 - 1);
    let r_range = ((min_y - 1) / 2).max(0)..=((max_y - 1) / 2).min(h as i64 - 1);

    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| -> i64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // Hull orientation from its signed area.
    let signed: i64 = (0..hull.len())
        .map(|i| {
            let (x1, y1) = hull[i];
            let (x2, y2) = hull[(i + 1) % hull.len()];
            x1 * y2 - x2 * y1
        })
        .sum();
    let orient = if signed >= 0 { 1 } else { -1 };

    let mut inside = 0usize;
    for r in r_range {
        'cols: for c in c_range.clone() {
            let p = (2 * c + 1, 2 * r + 1);
            for i in 0..hull.len() {
                if orient * cross(hull[i], hull[(i + 1) % hull.len()], p) < 0 {
                    continue 'cols;
                }
            }
            inside += 1;
        }
    }
    inside
}

/// Andrew monotone chain on integer points; input must be sorted and unique.
fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| -> i64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let build = |iter: &mut dyn Iterator<Item = (i64, i64)>| -> Vec<(i64, i64)> {
        let mut half: Vec<(i64, i64)> = Vec::new();
        for p in iter {
            while half.len() >= 2 && cross(half[half.len() - 2], half[half.len() - 1], p) <= 0 {
                half.pop();
            }
            half.push(p);
        }
        half.pop();
        half
    };
    let mut hull = build(&mut points.iter().copied());
    hull.extend(build(&mut points.iter().rev().copied()));
    hull
}

/// Fits an ellipse to the largest foreground component of a binary mask and
/// applies the outlier filter: results with solidity or aspect ratio below
/// 0.5 are rejected.
pub fn mask_to_ellipse(mask: &Mask) -> Result<Ellipse, GeometryError> {
    let (component, count) = largest_component(mask)?;
    let boundary = trace_boundary_points(&component);
    let ellipse = fit_ellipse_lsq(&boundary)?;

    let solidity = component_solidity(&component, count);
    if solidity < SHAPE_FILTER_THRESHOLD {
        return Err(GeometryError::RejectedBySolidity { value: solidity });
    }
    let aspect = ellipse.aspect_ratio();
    if aspect < SHAPE_FILTER_THRESHOLD {
        return Err(GeometryError::RejectedByAspect { value: aspect });
    }
    Ok(ellipse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize_ellipse;
    use approx::assert_relative_eq;
    use ndarray::Array2;

    fn disk(h: usize, w: usize, cx: f64, cy: f64, r: f64) -> Mask {
        rasterize_ellipse(&Ellipse::new(cx, cy, r, r, 0.0).unwrap(), h, w)
    }

    #[test]
    fn recovers_rasterized_disk() {
        let mask = disk(224, 224, 112.0, 112.0, 30.0);
        let e = mask_to_ellipse(&mask).unwrap();
        assert_relative_eq!(e.xc, 112.0, epsilon = 0.5);
        assert_relative_eq!(e.yc, 112.0, epsilon = 0.5);
        assert_relative_eq!(e.a, 30.0, max_relative = 0.02);
        assert_relative_eq!(e.b, 30.0, max_relative = 0.02);
    }

    #[test]
    fn empty_mask_rejected() {
        let mask = Array2::<u8>::zeros((64, 64));
        assert!(matches!(
            mask_to_ellipse(&mask),
            Err(GeometryError::EmptyMask)
        ));
        assert!(matches!(solidity(&mask), Err(GeometryError::EmptyMask)));
    }

    #[test]
    fn elongated_ellipse_rejected_by_aspect() {
        let truth = Ellipse::new(112.0, 112.0, 60.0, 10.0, 25.0).unwrap();
        let mask = rasterize_ellipse(&truth, 224, 224);
        match mask_to_ellipse(&mask) {
            Err(GeometryError::RejectedByAspect { value }) => {
                assert_relative_eq!(value, 10.0 / 60.0, epsilon = 0.02);
            }
            other => panic!("expected aspect rejection, got {other:?}"),
        }
    }

    #[test]
    fn solidity_of_convex_disk_is_one() {
        let mask = disk(128, 128, 64.0, 64.0, 30.0);
        let s = solidity(&mask).unwrap();
        assert!(s <= 1.0, "solidity {s} must not exceed 1");
        assert_relative_eq!(s, 1.0, epsilon = 0.02);
    }

    #[test]
    fn solidity_of_notched_rectangle_is_exact() {
        // 40x30 rectangle with a 20x12 notch cut into the middle of the top
        // edge: hull stays the full rectangle (corners intact), so
        // solidity = 1 - 240/1200 = 0.8; a deeper 20x24 notch gives 0.6.
        let mut mask = Array2::<u8>::zeros((60, 60));
        for r in 10..40 {
            for c in 10..50 {
                mask[(r, c)] = 1;
            }
        }
        for r in 10..34 {
            for c in 20..40 {
                mask[(r, c)] = 0;
            }
        }
        let s = solidity(&mask).unwrap();
        assert_relative_eq!(s, 0.6, epsilon = 1e-12);
    }

    #[test]
    fn solidity_of_pacman_matches_analytic_value() {
        // Disk minus a 90-degree wedge. Area = 3/4 pi r^2; the hull replaces
        // the wedge with the triangle between its edges (area r^2 / 2).
        let (h, w, cx, cy, r) = (200, 200, 100.0, 100.0, 60.0);
        let mut mask = disk(h, w, cx, cy, r);
        for row in 0..h {
            for col in 0..w {
                let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
                if x >= cx && y >= cy {
                    mask[(row, col)] = 0;
                }
            }
        }
        let area = 0.75 * std::f64::consts::PI * r * r;
        let expected = area / (area + r * r / 2.0);
        let s = solidity(&mask).unwrap();
        assert_relative_eq!(s, expected, epsilon = 0.02);
    }

    #[test]
    fn largest_component_picks_biggest_blob() {
        let mut mask = Array2::<u8>::zeros((64, 64));
        mask[(5, 5)] = 1; // lone pixel
        for r in 20..40 {
            for c in 20..40 {
                mask[(r, c)] = 1;
            }
        }
        let (component, count) = largest_component(&mask).unwrap();
        assert_eq!(count, 400);
        assert_eq!(component[(5, 5)], 0);
        assert_eq!(component[(25, 25)], 1);
    }

    #[test]
    fn boundary_points_straddle_the_contour() {
        let mask = disk(64, 64, 32.0, 32.0, 10.0);
        let pts = trace_boundary_points(&mask);
        assert!(pts.len() > 40);
        for [x, y] in pts {
            let d = ((x - 32.0).powi(2) + (y - 32.0).powi(2)).sqrt();
            assert!((d - 10.0).abs() <= 0.75, "boundary sample {d} far from r=10");
        }
    }

    #[test]
    fn single_pixel_component_is_fully_solid() {
        let mut mask = Array2::<u8>::zeros((8, 8));
        mask[(3, 3)] = 1;
        assert_relative_eq!(solidity(&mask).unwrap(), 1.0);
    }
}
