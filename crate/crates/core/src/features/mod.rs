//! The per-region feature catalog.
//!
//! Region66 concatenates four region-based categories:
//! structural (14), Gaussian coefficient statistics (12), regional
//! intensity (16), gradient intensity (24). Full98 appends three
//! pixel-based categories aggregated to region level: gradient-in-intensity
//! products (24), window statistics (4), derivative means (4).
//!
//! Column order is frozen; names come from [`FeatureProfile::feature_names`].

use std::borrow::Cow;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::prep::ImagePlanes;
use crate::raster::{Mask, Plane};
use crate::regions::{candidate_mask, Pixel, Region};
use crate::table::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureProfile {
    /// 66 region-based features.
    Region66,
    /// 98 region- and pixel-based features.
    Full98,
}

pub const STRUCTURAL_NAMES: [&str; 14] = [
    "area",
    "bbox_width",
    "bbox_height",
    "convex_area",
    "filled_area",
    "euler_number",
    "extent",
    "major_axis_length",
    "minor_axis_length",
    "orientation",
    "eccentricity",
    "perimeter",
    "solidity",
    "compactness",
];

const STATS_MMM: [&str; 3] = ["max", "min", "mean"];

impl FeatureProfile {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "region66" => Some(FeatureProfile::Region66),
            "full98" => Some(FeatureProfile::Full98),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureProfile::Region66 => "region66",
            FeatureProfile::Full98 => "full98",
        }
    }

    /// Feature count per category, in column order.
    pub fn category_sizes(self) -> &'static [usize] {
        match self {
            FeatureProfile::Region66 => &[14, 12, 16, 24],
            FeatureProfile::Full98 => &[14, 12, 16, 24, 24, 4, 4],
        }
    }

    pub fn feature_count(self) -> usize {
        self.category_sizes().iter().sum()
    }

    pub fn feature_names(self) -> Vec<String> {
        let mut names: Vec<String> = STRUCTURAL_NAMES.iter().map(|s| s.to_string()).collect();
        for img in ImagePlanes::GAUSS_IMAGES {
            names.push(format!("gauss_{img}_mean"));
            names.push(format!("gauss_{img}_var"));
        }
        for plane in ImagePlanes::INTENSITY_PLANES {
            for stat in ["mean", "min", "max", "std"] {
                names.push(format!("ri_{plane}_{stat}"));
            }
        }
        for deriv in ["grad1", "grad2"] {
            for plane in ImagePlanes::GRADIENT_PLANES {
                for stat in STATS_MMM {
                    names.push(format!("{deriv}_{plane}_{stat}"));
                }
            }
        }
        if self == FeatureProfile::Full98 {
            for deriv in ["grad1", "grad2"] {
                for plane in ImagePlanes::GRADIENT_PLANES {
                    for stat in STATS_MMM {
                        names.push(format!("prod_{deriv}_{plane}_{stat}"));
                    }
                }
            }
            names.extend(
                [
                    "win3_green_max",
                    "win5_green_mean",
                    "win5_green_std",
                    "win5_neighbors",
                ]
                .map(str::to_string),
            );
            for img in ["gx", "gy", "gxx", "gyy"] {
                names.push(format!("pix_{img}_mean"));
            }
        }
        debug_assert_eq!(names.len(), self.feature_count());
        names
    }
}

/// Pixels in canonical (row, col) order; feature values must not depend on
/// the order the extractor emitted them in.
fn ordered(region: &Region) -> Cow<'_, [Pixel]> {
    if region.pixels.windows(2).all(|w| w[0] <= w[1]) {
        Cow::Borrowed(&region.pixels)
    } else {
        let mut v = region.pixels.clone();
        v.sort_unstable();
        Cow::Owned(v)
    }
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut n = 0usize;
    let mut sum = 0.0;
    for v in values.clone() {
        n += 1;
        sum += v;
    }
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.max(0.0))
}

fn stats_mmm(values: impl Iterator<Item = f64> + Clone) -> [f64; 3] {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let (mean, _) = mean_var(values.clone());
    for v in values {
        max = max.max(v);
        min = min.min(v);
    }
    [max, min, mean]
}

// ---------------------------------------------------------------------
// Structural features
// ---------------------------------------------------------------------

/// Region shape rebuilt on a bounding-box-local grid, so every structural
/// quantity is exactly translation invariant.
struct LocalShape {
    bitmap: Array2<bool>,
    pixels: Vec<Pixel>,
}

impl LocalShape {
    fn new(region: &Region) -> Self {
        let (r0, c0, r1, c1) = region.bbox();
        let dim = (r1 - r0 + 1, c1 - c0 + 1);
        let mut bitmap = Array2::from_elem(dim, false);
        let mut pixels = Vec::with_capacity(region.pixels.len());
        for &(r, c) in ordered(region).iter() {
            bitmap[(r - r0, c - c0)] = true;
            pixels.push((r - r0, c - c0));
        }
        LocalShape { bitmap, pixels }
    }

    fn perimeter(&self) -> usize {
        let (h, w) = self.bitmap.dim();
        let bg = |r: i64, c: i64| {
            r < 0 || c < 0 || r >= h as i64 || c >= w as i64 || !self.bitmap[(r as usize, c as usize)]
        };
        self.pixels
            .iter()
            .filter(|&&(r, c)| {
                let (r, c) = (r as i64, c as i64);
                bg(r - 1, c) || bg(r + 1, c) || bg(r, c - 1) || bg(r, c + 1)
            })
            .count()
    }

    /// Hole pixels: background cells unreachable from outside under
    /// 4-connectivity. Returns (hole pixel count, hole component count).
    fn holes(&self) -> (usize, usize) {
        let (h, w) = self.bitmap.dim();
        let (ph, pw) = (h + 2, w + 2);
        let foreground = |r: usize, c: usize| {
            r >= 1 && c >= 1 && r <= h && c <= w && self.bitmap[(r - 1, c - 1)]
        };
        // 0 = unvisited background, 1 = reached from outside, 2 = hole.
        let mut state = Array2::<u8>::zeros((ph, pw));
        let mut stack = vec![(0usize, 0usize)];
        state[(0, 0)] = 1;
        while let Some((r, c)) = stack.pop() {
            for (nr, nc) in neighbors4(r, c, ph, pw) {
                if state[(nr, nc)] == 0 && !foreground(nr, nc) {
                    state[(nr, nc)] = 1;
                    stack.push((nr, nc));
                }
            }
        }

        let mut hole_pixels = 0usize;
        let mut components = 0usize;
        for sr in 0..ph {
            for sc in 0..pw {
                if state[(sr, sc)] != 0 || foreground(sr, sc) {
                    continue;
                }
                components += 1;
                let mut stack = vec![(sr, sc)];
                state[(sr, sc)] = 2;
                while let Some((r, c)) = stack.pop() {
                    hole_pixels += 1;
                    for (nr, nc) in neighbors4(r, c, ph, pw) {
                        if state[(nr, nc)] == 0 && !foreground(nr, nc) {
                            state[(nr, nc)] = 2;
                            stack.push((nr, nc));
                        }
                    }
                }
            }
        }
        (hole_pixels, components)
    }

    /// Number of grid cells whose centers lie inside or on the convex hull
    /// of the pixel centers. Exact integer arithmetic.
    fn convex_area(&self) -> usize {
        let points: Vec<(i64, i64)> = self
            .pixels
            .iter()
            .map(|&(r, c)| (c as i64, r as i64))
            .collect();
        let hull = convex_hull(&points);
        if hull.len() == 1 {
            return 1;
        }
        if hull.len() == 2 {
            let (dx, dy) = (hull[1].0 - hull[0].0, hull[1].1 - hull[0].1);
            return gcd(dx.unsigned_abs(), dy.unsigned_abs()) as usize + 1;
        }
        let (h, w) = self.bitmap.dim();
        let mut count = 0usize;
        for r in 0..h as i64 {
            for c in 0..w as i64 {
                let p = (c, r);
                let inside = hull.iter().enumerate().all(|(i, &a)| {
                    let b = hull[(i + 1) % hull.len()];
                    cross(a, b, p) >= 0
                });
                if inside {
                    count += 1;
                }
            }
        }
        count
    }

    /// Second central moments of the pixel centers: (mu_cc, mu_rr, mu_rc).
    fn moments(&self) -> (f64, f64, f64) {
        let n = self.pixels.len() as f64;
        let mut mr = 0.0;
        let mut mc = 0.0;
        for &(r, c) in &self.pixels {
            mr += r as f64;
            mc += c as f64;
        }
        mr /= n;
        mc /= n;
        let (mut cc, mut rr, mut rc) = (0.0, 0.0, 0.0);
        for &(r, c) in &self.pixels {
            let dr = r as f64 - mr;
            let dc = c as f64 - mc;
            cc += dc * dc;
            rr += dr * dr;
            rc += dr * dc;
        }
        (cc / n, rr / n, rc / n)
    }
}

fn neighbors4(r: usize, c: usize, h: usize, w: usize) -> impl Iterator<Item = Pixel> {
    let mut out = [(usize::MAX, usize::MAX); 4];
    let mut n = 0;
    if r > 0 {
        out[n] = (r - 1, c);
        n += 1;
    }
    if r + 1 < h {
        out[n] = (r + 1, c);
        n += 1;
    }
    if c > 0 {
        out[n] = (r, c - 1);
        n += 1;
    }
    if c + 1 < w {
        out[n] = (r, c + 1);
        n += 1;
    }
    out.into_iter().take(n)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Monotone-chain convex hull, counterclockwise, no collinear points kept.
/// Collinear input collapses to its two extreme points (one if degenerate).
fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    if lower.len() + upper.len() < 3 {
        // All points collinear: keep the two extremes.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    lower.extend(upper);
    lower
}

/// The 14 structural features, in the order of [`STRUCTURAL_NAMES`].
/// Single-pixel regions take axis lengths 0, eccentricity 0 and
/// compactness 0 by convention.
pub fn structural_features(region: &Region) -> [f64; 14] {
    let shape = LocalShape::new(region);
    let area = shape.pixels.len();
    let (h, w) = shape.bitmap.dim();
    let convex = shape.convex_area();
    let (hole_pixels, hole_components) = shape.holes();
    let filled = area + hole_pixels;
    let euler = 1.0 - hole_components as f64;
    let extent = area as f64 / (h * w) as f64;
    let perimeter = shape.perimeter();

    let (cc, rr, rc) = shape.moments();
    let mid = (cc + rr) / 2.0;
    let disc = (((cc - rr) / 2.0).powi(2) + rc * rc).sqrt();
    let lambda1 = mid + disc;
    let lambda2 = (mid - disc).max(0.0);
    // lambda1 = 0 only for a single pixel, where axis quantities are 0 by
    // convention; compactness joins that convention.
    let (major, minor, orientation, ecc) = if lambda1 <= 0.0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (
            4.0 * lambda1.sqrt(),
            4.0 * lambda2.sqrt(),
            0.5 * (2.0 * rc).atan2(cc - rr),
            (1.0 - lambda2 / lambda1).sqrt(),
        )
    };
    let compactness = if area == 1 {
        0.0
    } else {
        perimeter as f64 * perimeter as f64 / (4.0 * std::f64::consts::PI * area as f64)
    };

    [
        area as f64,
        w as f64,
        h as f64,
        convex as f64,
        filled as f64,
        euler,
        extent,
        major,
        minor,
        orientation,
        ecc,
        perimeter as f64,
        area as f64 / convex as f64,
        compactness,
    ]
}

// ---------------------------------------------------------------------
// Intensity-based features
// ---------------------------------------------------------------------

fn over<'a>(
    pixels: &'a [Pixel],
    plane: &'a Plane,
) -> impl Iterator<Item = f64> + Clone + 'a {
    pixels.iter().map(move |&px| plane[px])
}

/// Mean and population variance over the region in each of the 6 Gaussian
/// coefficient images.
pub fn gaussian_coeff_features(region: &Region, planes: &ImagePlanes) -> [f64; 12] {
    let pixels = ordered(region);
    let mut out = [0.0; 12];
    for (i, img) in planes.gauss.iter().enumerate() {
        let (mean, var) = mean_var(over(&pixels, img));
        out[2 * i] = mean;
        out[2 * i + 1] = var;
    }
    out
}

/// Mean, min, max and population std over the region, for each of the
/// green, red, hue and intensity planes.
pub fn regional_intensity_features(region: &Region, planes: &ImagePlanes) -> [f64; 16] {
    let pixels = ordered(region);
    let mut out = [0.0; 16];
    for i in 0..4 {
        let plane = planes.intensity_plane(i);
        let [max, min, mean] = stats_mmm(over(&pixels, plane));
        let (_, var) = mean_var(over(&pixels, plane));
        out[4 * i] = mean;
        out[4 * i + 1] = min;
        out[4 * i + 2] = max;
        out[4 * i + 3] = var.sqrt();
    }
    out
}

/// Max, min and mean over the region in the 8 gradient-magnitude images
/// (first then second derivative, each over green, red, hue, saturation).
pub fn gradient_intensity_features(region: &Region, planes: &ImagePlanes) -> [f64; 24] {
    let pixels = ordered(region);
    let mut out = [0.0; 24];
    let mut slot = 0;
    for deriv in [&planes.grad1, &planes.grad2] {
        for img in deriv.iter() {
            let [max, min, mean] = stats_mmm(over(&pixels, img));
            out[slot] = max;
            out[slot + 1] = min;
            out[slot + 2] = mean;
            slot += 3;
        }
    }
    out
}

fn gradient_source(planes: &ImagePlanes, idx: usize) -> &Plane {
    match idx {
        0 => &planes.green,
        1 => &planes.red,
        2 => &planes.hue,
        _ => &planes.sat,
    }
}

/// Same statistics over the pointwise products plane * gradient image, for
/// the same 8 gradient images.
pub fn gradient_in_intensity_features(region: &Region, planes: &ImagePlanes) -> [f64; 24] {
    let pixels = ordered(region);
    let mut out = [0.0; 24];
    let mut slot = 0;
    for deriv in [&planes.grad1, &planes.grad2] {
        for (idx, img) in deriv.iter().enumerate() {
            let source = gradient_source(planes, idx);
            let values = pixels.iter().map(move |&px| source[px] * img[px]);
            let [max, min, mean] = stats_mmm(values);
            out[slot] = max;
            out[slot + 1] = min;
            out[slot + 2] = mean;
            slot += 3;
        }
    }
    out
}

fn window_bounds(center: usize, radius: usize, n: usize) -> (usize, usize) {
    (center.saturating_sub(radius), (center + radius + 1).min(n))
}

/// Per-pixel window statistics on the green plane, averaged over the
/// region: 3x3 max, 5x5 mean, 5x5 population std, and the number of
/// candidate pixels in the 5x5 window. Windows clip at image borders.
pub fn pixel_window_features(
    region: &Region,
    planes: &ImagePlanes,
    candidates: &Mask,
) -> [f64; 4] {
    let pixels = ordered(region);
    let plane = &planes.green;
    let (h, w) = plane.dim();
    let mut sums = [0.0; 4];
    for &(r, c) in pixels.iter() {
        let (r3a, r3b) = window_bounds(r, 1, h);
        let (c3a, c3b) = window_bounds(c, 1, w);
        let mut max3 = f64::NEG_INFINITY;
        for rr in r3a..r3b {
            for cc in c3a..c3b {
                max3 = max3.max(plane[(rr, cc)]);
            }
        }

        let (r5a, r5b) = window_bounds(r, 2, h);
        let (c5a, c5b) = window_bounds(c, 2, w);
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut neighbors = 0usize;
        for rr in r5a..r5b {
            for cc in c5a..c5b {
                n += 1;
                sum += plane[(rr, cc)];
                if candidates[(rr, cc)] {
                    neighbors += 1;
                }
            }
        }
        let mean5 = sum / n as f64;
        let mut var5 = 0.0;
        for rr in r5a..r5b {
            for cc in c5a..c5b {
                let d = plane[(rr, cc)] - mean5;
                var5 += d * d;
            }
        }
        var5 = (var5 / n as f64).max(0.0);

        sums[0] += max3;
        sums[1] += mean5;
        sums[2] += var5.sqrt();
        sums[3] += neighbors as f64;
    }
    let n = pixels.len() as f64;
    sums.map(|s| s / n)
}

/// Mean over the region of the Gx, Gy, Gxx and Gyy coefficient images.
pub fn pixel_intensity_features(region: &Region, planes: &ImagePlanes) -> [f64; 4] {
    let pixels = ordered(region);
    let picks = [1usize, 2, 4, 5];
    let mut out = [0.0; 4];
    for (slot, &g) in picks.iter().enumerate() {
        let (mean, _) = mean_var(over(&pixels, &planes.gauss[g]));
        out[slot] = mean;
    }
    out
}

/// One table row in frozen column order.
pub fn feature_row(
    region: &Region,
    planes: &ImagePlanes,
    candidates: &Mask,
    profile: FeatureProfile,
) -> Vec<f64> {
    let mut row = Vec::with_capacity(profile.feature_count());
    row.extend(structural_features(region));
    row.extend(gaussian_coeff_features(region, planes));
    row.extend(regional_intensity_features(region, planes));
    row.extend(gradient_intensity_features(region, planes));
    if profile == FeatureProfile::Full98 {
        row.extend(gradient_in_intensity_features(region, planes));
        row.extend(pixel_window_features(region, planes, candidates));
        row.extend(pixel_intensity_features(region, planes));
    }
    row
}

/// Accumulates rows image by image, so callers can drop each image's
/// planes before loading the next.
pub struct FeatureTableBuilder {
    profile: FeatureProfile,
    dataset_tag: String,
    values: Vec<f64>,
    labels: Vec<u32>,
    sample_ids: Vec<String>,
    image_ids: Vec<String>,
}

impl FeatureTableBuilder {
    pub fn new(profile: FeatureProfile, dataset_tag: &str) -> Self {
        FeatureTableBuilder {
            profile,
            dataset_tag: dataset_tag.to_string(),
            values: Vec::new(),
            labels: Vec::new(),
            sample_ids: Vec::new(),
            image_ids: Vec::new(),
        }
    }

    pub fn add_image(&mut self, planes: &ImagePlanes, regions: &[Region]) {
        let mask = candidate_mask(regions, planes.dim());
        for region in regions {
            let row = feature_row(region, planes, &mask, self.profile);
            self.values.extend(row);
            self.labels.push(region.label);
            self.sample_ids.push(region.region_id.clone());
            self.image_ids.push(region.image_id.clone());
        }
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn finish(self) -> Result<FeatureTable> {
        let n = self.labels.len();
        if n == 0 {
            return Err(Error::Data(
                "no candidate regions: feature table would be empty".into(),
            ));
        }
        let l = self.profile.feature_count();
        let values = Array2::from_shape_vec((n, l), self.values).expect("row-major build");
        let table = FeatureTable {
            values,
            feature_names: self.profile.feature_names(),
            labels: self.labels,
            sample_ids: self.sample_ids,
            image_ids: self.image_ids,
            dataset_tag: self.dataset_tag,
        };
        table.validate()?;
        Ok(table)
    }
}

/// Convenience wrapper over the builder for in-memory image sets.
pub fn build_feature_table(
    images: &[(&ImagePlanes, &[Region])],
    profile: FeatureProfile,
    dataset_tag: &str,
) -> Result<FeatureTable> {
    let mut builder = FeatureTableBuilder::new(profile, dataset_tag);
    for (planes, regions) in images {
        builder.add_image(planes, regions);
    }
    builder.finish()
}

#[cfg(test)]
mod tests;
