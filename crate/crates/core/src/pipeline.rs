//! Dataset ingestion glue: preprocess each image, extract candidate
//! regions for the configured region kinds, label them against the
//! ground-truth masks, and emit the feature table.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::features::FeatureTableBuilder;
use crate::prep::{self, DatasetConfig, ImagePlanes, RawSample};
use crate::raster::resize_mask_nearest;
use crate::regions::{self, Region, RegionKind};
use crate::table::FeatureTable;

/// Fraction of a region's pixels a ground-truth mask must cover to claim it.
pub const OVERLAP_THRESHOLD: f64 = 0.5;

/// Candidate regions for every region kind the config declares. The major
/// vessel mask is shared between the red-lesion and minor-vessel extractors.
pub fn extract_candidates(
    planes: &ImagePlanes,
    config: &DatasetConfig,
    image_id: &str,
) -> Vec<Region> {
    let kinds: BTreeSet<RegionKind> = config.classes.iter().map(|c| c.kind).collect();
    let params = &config.extraction;
    let major = (kinds.contains(&RegionKind::Red) || kinds.contains(&RegionKind::Vessel))
        .then(|| regions::extract_major_vessels(planes, params));
    let mut out = Vec::new();
    if kinds.contains(&RegionKind::Bright) {
        out.extend(regions::extract_bright_candidates(planes, image_id, params));
    }
    if let Some(major) = &major {
        if kinds.contains(&RegionKind::Red) {
            out.extend(regions::extract_red_candidates(planes, major, image_id, params));
        }
        if kinds.contains(&RegionKind::Vessel) {
            out.extend(regions::minor_vessel_candidates(planes, major, image_id, params));
        }
    }
    out
}

/// Labels candidates against the sample's ground-truth masks, resized to
/// plane resolution; unclaimed regions get their kind's fallback class.
pub fn label_candidates(
    candidates: Vec<Region>,
    raw: &RawSample,
    config: &DatasetConfig,
    dim: (usize, usize),
) -> Vec<Region> {
    let mut gt = BTreeMap::new();
    for (class_id, class) in config.classes.iter().enumerate() {
        if let Some(mask) = raw.gt_masks.get(&class.name) {
            gt.insert(class_id as u32, resize_mask_nearest(mask, dim.0, dim.1));
        }
    }
    let mut fallback = BTreeMap::new();
    for kind in [RegionKind::Bright, RegionKind::Red, RegionKind::Vessel] {
        if let Some(class) = config.fallback_class(kind) {
            fallback.insert(kind, class as u32);
        }
    }
    regions::assign_labels(candidates, &gt, &fallback, OVERLAP_THRESHOLD)
}

/// Full ingestion of a configured dataset into one feature table.
pub fn ingest_dataset(config: &DatasetConfig) -> Result<FeatureTable> {
    let samples = prep::load_dataset(config)?;
    if samples.is_empty() {
        return Err(Error::Data(format!(
            "no samples in dataset '{}'",
            config.name
        )));
    }
    let mut builder = FeatureTableBuilder::new(config.profile, &config.name);
    for raw in &samples {
        let planes = prep::preprocess(raw)?;
        let candidates = extract_candidates(&planes, config, &raw.image_id);
        let labeled = label_candidates(candidates, raw, config, planes.dim());
        log::info!(
            "image '{}': {} candidate regions",
            raw.image_id,
            labeled.len()
        );
        builder.add_image(&planes, &labeled);
    }
    builder.finish()
}
