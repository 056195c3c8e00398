//! Candidate-region extraction and ground-truth label assignment.
//!
//! Candidates come in three kinds. Bright candidates are connected
//! components of green-plane pixels above mean + k*std. Red candidates are
//! the same rule on the inverted green plane after removing major vessels.
//! Vessel candidates are the small leftovers of a top-hat response after
//! the large components (the major vessels) are taken out.

pub mod cc;
pub mod morph;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::prep::config::ExtractionParams;
use crate::prep::ImagePlanes;
use crate::raster::{Mask, Plane};

pub use cc::{connected_components, Pixel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegionKind {
    Bright,
    Red,
    Vessel,
}

impl RegionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionKind::Bright => "bright",
            RegionKind::Red => "red",
            RegionKind::Vessel => "vessel",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One candidate region; the unit sample for classification.
///
/// `label` is provisional (the kind's fallback class) until
/// [`assign_labels`] has run against the ground-truth masks.
#[derive(Debug, Clone)]
pub struct Region {
    pub region_id: String,
    pub image_id: String,
    /// Sorted by (row, col); non-empty and 8-connected by construction.
    pub pixels: Vec<Pixel>,
    pub label: u32,
    pub kind: RegionKind,
}

impl Region {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Inclusive bounding box (row_min, col_min, row_max, col_max).
    pub fn bbox(&self) -> (usize, usize, usize, usize) {
        let mut r0 = usize::MAX;
        let mut c0 = usize::MAX;
        let mut r1 = 0;
        let mut c1 = 0;
        for &(r, c) in &self.pixels {
            r0 = r0.min(r);
            c0 = c0.min(c);
            r1 = r1.max(r);
            c1 = c1.max(c);
        }
        (r0, c0, r1, c1)
    }
}

fn make_regions(
    components: Vec<Vec<Pixel>>,
    image_id: &str,
    kind: RegionKind,
    area: (usize, usize),
) -> Vec<Region> {
    components
        .into_iter()
        .filter(|px| px.len() >= area.0 && px.len() <= area.1)
        .enumerate()
        .map(|(seq, pixels)| Region {
            region_id: format!("{image_id}:{kind}:{seq:04}"),
            image_id: image_id.to_string(),
            pixels,
            label: 0,
            kind,
        })
        .collect()
}

fn mean_std(plane: &Plane) -> (f64, f64) {
    let n = plane.len() as f64;
    let mean = plane.sum() / n;
    let var = plane.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Bright-lesion candidates: components of `green > mean + k*std`, with
/// area inside the configured gate. Zero candidates is a valid outcome.
pub fn extract_bright_candidates(
    planes: &ImagePlanes,
    image_id: &str,
    params: &ExtractionParams,
) -> Vec<Region> {
    let (mean, std) = mean_std(&planes.green);
    let thr = mean + params.bright_k * std;
    let mask = planes.green.mapv(|v| v > thr);
    make_regions(
        connected_components(&mask),
        image_id,
        RegionKind::Bright,
        params.bright_area,
    )
}

/// Red-lesion candidates: bright extraction on the inverted green plane
/// with major-vessel pixels removed before component labeling.
pub fn extract_red_candidates(
    planes: &ImagePlanes,
    major_mask: &Mask,
    image_id: &str,
    params: &ExtractionParams,
) -> Vec<Region> {
    let inverted = planes.green.mapv(|v| 1.0 - v);
    let (mean, std) = mean_std(&inverted);
    let thr = mean + params.red_k * std;
    let mask = Array2::from_shape_fn(inverted.dim(), |ix| inverted[ix] > thr && !major_mask[ix]);
    make_regions(
        connected_components(&mask),
        image_id,
        RegionKind::Red,
        params.red_area,
    )
}

/// Top-hat response of the inverted green plane, binarized at the Otsu
/// level. Empty when the response is constant (nothing to segment).
fn vessel_response_mask(planes: &ImagePlanes, params: &ExtractionParams) -> Mask {
    let inverted = planes.green.mapv(|v| 1.0 - v);
    let response = morph::tophat(&inverted, params.tophat_radius);
    match morph::otsu_threshold(&response) {
        Some(level) => response.mapv(|v| v >= level),
        None => Mask::from_elem(planes.dim(), false),
    }
}

/// Major-vessel mask: large connected components of the top-hat response.
pub fn extract_major_vessels(planes: &ImagePlanes, params: &ExtractionParams) -> Mask {
    let response = vessel_response_mask(planes, params);
    let mut mask = Mask::from_elem(planes.dim(), false);
    for component in connected_components(&response) {
        if component.len() >= params.major_vessel_min_area {
            for px in component {
                mask[px] = true;
            }
        }
    }
    mask
}

/// Minor-vessel candidates: top-hat response pixels outside the major
/// mask, component area inside the configured gate.
pub fn minor_vessel_candidates(
    planes: &ImagePlanes,
    major_mask: &Mask,
    image_id: &str,
    params: &ExtractionParams,
) -> Vec<Region> {
    let response = vessel_response_mask(planes, params);
    let mask = Array2::from_shape_fn(response.dim(), |ix| response[ix] && !major_mask[ix]);
    make_regions(
        connected_components(&mask),
        image_id,
        RegionKind::Vessel,
        params.minor_area,
    )
}

/// Assigns each region the class whose ground-truth mask covers at least
/// `overlap_threshold` of its pixels. Ties go to the larger overlap, then
/// the lower class id. Regions no mask claims fall back to their kind's
/// false-positive class.
pub fn assign_labels(
    mut regions: Vec<Region>,
    gt_masks: &BTreeMap<u32, Mask>,
    fallback: &BTreeMap<RegionKind, u32>,
    overlap_threshold: f64,
) -> Vec<Region> {
    for region in &mut regions {
        let mut best: Option<(f64, u32)> = None;
        for (&class, mask) in gt_masks {
            let covered = region.pixels.iter().filter(|&&px| mask[px]).count();
            let fraction = covered as f64 / region.area() as f64;
            if fraction >= overlap_threshold {
                let better = match best {
                    Some((f, _)) => fraction > f,
                    None => true,
                };
                if better {
                    best = Some((fraction, class));
                }
            }
        }
        region.label = match best {
            Some((_, class)) => class,
            None => *fallback.get(&region.kind).unwrap_or(&0),
        };
    }
    regions
}

/// Union of all region pixels, for neighborhood features.
pub fn candidate_mask(regions: &[Region], dim: (usize, usize)) -> Mask {
    let mut mask = Mask::from_elem(dim, false);
    for region in regions {
        for &px in &region.pixels {
            mask[px] = true;
        }
    }
    mask
}

/// Audit dump: one line per region with id, kind, label, area and bbox.
pub fn dump_regions(dir: &Path, image_id: &str, regions: &[Region]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("{image_id}.regions.txt"));
    let mut out = Vec::new();
    writeln!(out, "region_id\tkind\tlabel\tarea\tbbox").expect("write to vec");
    for region in regions {
        let (r0, c0, r1, c1) = region.bbox();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{},{},{},{}",
            region.region_id,
            region.kind,
            region.label,
            region.area(),
            r0,
            c0,
            r1,
            c1
        )
        .expect("write to vec");
    }
    fs::write(&path, out).map_err(|e| Error::io(&path, e))
}
