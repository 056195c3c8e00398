//! Grayscale morphology with a disk structuring element, plus Otsu
//! thresholding for segmenting top-hat responses.

use ndarray::Array2;

use crate::raster::Plane;

/// Offsets (dr, dc) of a disk structuring element: dr^2 + dc^2 <= radius^2.
pub fn disk_offsets(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut offsets = Vec::new();
    for dr in -r..=r {
        for dc in -r..=r {
            if dr * dr + dc * dc <= r * r {
                offsets.push((dr, dc));
            }
        }
    }
    offsets
}

fn apply<F>(plane: &Plane, offsets: &[(i64, i64)], init: f64, fold: F) -> Plane
where
    F: Fn(f64, f64) -> f64,
{
    let (h, w) = plane.dim();
    Array2::from_shape_fn((h, w), |(r, c)| {
        let mut acc = init;
        for &(dr, dc) in offsets {
            let nr = r as i64 + dr;
            let nc = c as i64 + dc;
            if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                continue;
            }
            acc = fold(acc, plane[(nr as usize, nc as usize)]);
        }
        acc
    })
}

/// Minimum over the structuring element; out-of-bounds offsets are skipped.
pub fn erode(plane: &Plane, offsets: &[(i64, i64)]) -> Plane {
    apply(plane, offsets, f64::INFINITY, f64::min)
}

/// Maximum over the structuring element; out-of-bounds offsets are skipped.
pub fn dilate(plane: &Plane, offsets: &[(i64, i64)]) -> Plane {
    apply(plane, offsets, f64::NEG_INFINITY, f64::max)
}

/// Morphological opening: erosion followed by dilation.
pub fn opening(plane: &Plane, radius: usize) -> Plane {
    let offsets = disk_offsets(radius);
    dilate(&erode(plane, &offsets), &offsets)
}

/// White top-hat: original minus its opening. Nonnegative everywhere and
/// large on structures narrower than the disk.
pub fn tophat(plane: &Plane, radius: usize) -> Plane {
    let opened = opening(plane, radius);
    let mut out = plane.clone();
    out.zip_mut_with(&opened, |v, o| *v -= o);
    out
}

/// Otsu threshold over a 256-bin histogram of the plane's value range.
/// Returns the level t such that foreground is `value >= t`, or None when
/// the plane is constant.
pub fn otsu_threshold(plane: &Plane) -> Option<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in plane.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return None;
    }

    const BINS: usize = 256;
    let mut hist = [0usize; BINS];
    let scale = BINS as f64 / (hi - lo);
    for &v in plane.iter() {
        let bin = (((v - lo) * scale) as usize).min(BINS - 1);
        hist[bin] += 1;
    }

    let total = plane.len() as f64;
    let total_mean: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &n)| i as f64 * n as f64)
        .sum::<f64>()
        / total;

    let mut best_t = 0usize;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for (t, &count) in hist.iter().enumerate().take(BINS - 1) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        if w0 == 0.0 || w0 == total {
            continue;
        }
        let w1 = total - w0;
        let mu0 = sum0 / w0;
        let mu1 = (total_mean * total - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best_var {
            best_var = between;
            best_t = t;
        }
    }
    Some(lo + (best_t as f64 + 1.0) / scale)
}
