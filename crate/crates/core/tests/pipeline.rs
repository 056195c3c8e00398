//! Image-to-table integration: candidate extraction and ground-truth label
//! assignment on a small generated dataset.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, Rgb, RgbImage};
use tempfile::TempDir;

use retinarank::pipeline::ingest_dataset;
use retinarank::prep::DatasetConfig;
use retinarank::SampleSource;

/// One bright 12x12 square per image on a dark background. Images listed in
/// `masked` also get a ground-truth mask over the square.
fn write_dataset(root: &Path, blobs: &[(u32, bool)]) -> PathBuf {
    let images = root.join("images");
    let masks = root.join("masks");
    fs::create_dir_all(&images).unwrap();
    fs::create_dir_all(&masks).unwrap();
    for (i, &(origin, masked)) in blobs.iter().enumerate() {
        let mut rgb = RgbImage::from_pixel(100, 100, Rgb([20, 25, 20]));
        let mut mask = GrayImage::from_pixel(100, 100, Luma([0]));
        for y in origin..origin + 12 {
            for x in origin..origin + 12 {
                rgb.put_pixel(x, y, Rgb([180, 220, 170]));
                mask.put_pixel(x, y, Luma([255]));
            }
        }
        rgb.save(images.join(format!("img{i:02}.png"))).unwrap();
        if masked {
            mask.save(masks.join(format!("img{i:02}.png"))).unwrap();
        }
    }

    let config = root.join("dataset.conf");
    fs::write(
        &config,
        "name = demo\n\
         images_dir = images\n\
         classes = fp_bright:bright, lesion:bright\n\
         mask_dir.lesion = masks\n\
         profile = region66\n",
    )
    .unwrap();
    config
}

#[test]
fn masked_blobs_get_the_lesion_class_and_unmasked_ones_fall_back() {
    let dir = TempDir::new().unwrap();
    let config_path = write_dataset(dir.path(), &[(30, true), (50, false), (40, true)]);
    let config = DatasetConfig::load(&config_path).unwrap();
    let table = ingest_dataset(&config).unwrap();

    assert_eq!(table.feature_count(), 66);
    assert_eq!(table.n(), 3, "one candidate region per image");
    table.validate().unwrap();

    let label_of = |image: &str| -> Vec<u32> {
        table
            .image_ids
            .iter()
            .zip(&table.labels)
            .filter(|(id, _)| id.as_str() == image)
            .map(|(_, &l)| l)
            .collect()
    };
    assert_eq!(label_of("img00"), vec![1], "masked blob is the lesion class");
    assert_eq!(label_of("img01"), vec![0], "unmasked blob falls back");
    assert_eq!(label_of("img02"), vec![1]);

    let mut ids: Vec<&String> = table.sample_ids.iter().collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 3, "sample ids are unique");
}

#[test]
fn ingest_is_deterministic_across_runs() {
    let dir = TempDir::new().unwrap();
    let config_path = write_dataset(dir.path(), &[(30, true), (55, false)]);
    let config = DatasetConfig::load(&config_path).unwrap();
    let a = ingest_dataset(&config).unwrap();
    let b = ingest_dataset(&config).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.sample_ids, b.sample_ids);
}
