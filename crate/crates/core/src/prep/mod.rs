//! Dataset ingestion and derived image planes.
//!
//! Raw fundus images are reduced to a fixed stack of 500x500 planes: the
//! rescaled green and red channels, the HSI conversion planes, six Gaussian
//! coefficient images of the green plane, and first/second-order gradient
//! magnitude images for the green/red/hue/saturation planes.

pub mod config;
pub mod gaussian;
pub mod gradient;
pub mod hsi;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use ndarray::{s, Array2, Array3};

use crate::error::{Error, Result};
use crate::raster::{rescale_unit, resize_bilinear, Mask, Plane};

pub use config::DatasetConfig;

/// Side length of every derived plane.
pub const PLANE_SIZE: usize = 500;

/// Default variance of the Gaussian derivative filters.
pub const DEFAULT_SIGMA_SQ: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitHint {
    Train,
    Test,
}

/// One raw dataset image plus its ground-truth masks (original resolution).
pub struct RawSample {
    pub image_id: String,
    /// `(h, w, 3)` 8-bit RGB.
    pub rgb: Array3<u8>,
    /// Class name -> binary mask, same dimensions as `rgb`.
    pub gt_masks: BTreeMap<String, Mask>,
    pub split_hint: Option<SplitHint>,
}

/// All derived planes of one image. Every plane is `PLANE_SIZE` square and
/// the channel planes lie in `[0, 1]`.
pub struct ImagePlanes {
    /// Rescaled green channel (the base plane for Gaussian filtering).
    pub green: Plane,
    pub red: Plane,
    pub hue: Plane,
    pub sat: Plane,
    pub intensity: Plane,
    /// `[G, Gx, Gy, Gxy, Gxx, Gyy]` of the green plane.
    pub gauss: [Plane; 6],
    /// First-order gradient magnitudes for [green, red, hue, sat].
    pub grad1: [Plane; 4],
    /// Second-order gradient magnitudes for [green, red, hue, sat].
    pub grad2: [Plane; 4],
}

impl ImagePlanes {
    /// Plane names backing the gradient image arrays, in column order.
    pub const GRADIENT_PLANES: [&'static str; 4] = ["green", "red", "hue", "sat"];
    /// Names of the Gaussian coefficient images, in column order.
    pub const GAUSS_IMAGES: [&'static str; 6] = ["g", "gx", "gy", "gxy", "gxx", "gyy"];
    /// Planes feeding the regional intensity statistics, in column order.
    pub const INTENSITY_PLANES: [&'static str; 4] = ["green", "red", "hue", "int"];

    /// Populate the Gaussian and gradient stacks from already prepared
    /// channel planes (all the same shape, values in `[0, 1]`).
    pub fn derive(
        green: Plane,
        red: Plane,
        hue: Plane,
        sat: Plane,
        intensity: Plane,
        sigma_sq: f64,
    ) -> Result<Self> {
        let gauss = gaussian::gaussian_derivatives(&green, sigma_sq)?;
        let sources = [&green, &red, &hue, &sat];
        let mut grad1: Vec<Plane> = Vec::with_capacity(4);
        let mut grad2: Vec<Plane> = Vec::with_capacity(4);
        for plane in sources {
            let (g1, g2) = gradient::gradient_magnitudes(plane);
            grad1.push(g1);
            grad2.push(g2);
        }
        Ok(ImagePlanes {
            green,
            red,
            hue,
            sat,
            intensity,
            gauss,
            grad1: grad1.try_into().expect("four gradient planes"),
            grad2: grad2.try_into().expect("four gradient planes"),
        })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.green.dim()
    }

    /// Intensity plane by feature-order index: green, red, hue, HSI intensity.
    pub fn intensity_plane(&self, idx: usize) -> &Plane {
        match idx {
            0 => &self.green,
            1 => &self.red,
            2 => &self.hue,
            3 => &self.intensity,
            _ => panic!("intensity plane index out of range: {idx}"),
        }
    }
}

/// Load every image declared by the dataset config, together with its
/// binarized ground-truth masks.
///
/// Mask confidence maps are binarized at `mask_threshold * max(mask)`; an
/// all-zero mask stays empty. A missing mask file is tolerated (empty mask,
/// with a warning); a mask whose dimensions disagree with the image is fatal.
pub fn load_dataset(config: &DatasetConfig) -> Result<Vec<RawSample>> {
    let image_files = list_image_files(&config.images_dir)?;
    if image_files.is_empty() {
        warn!(
            "dataset '{}': no images found in {}",
            config.name,
            config.images_dir.display()
        );
        return Ok(Vec::new());
    }
    let mut samples = Vec::with_capacity(image_files.len());
    for path in image_files {
        let image_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let rgb = load_rgb(&path)?;
        let (h, w, _) = rgb.dim();
        let mut gt_masks = BTreeMap::new();
        for class in &config.classes {
            let Some(dir) = config.mask_dirs.get(&class.name) else {
                continue;
            };
            let mask = match find_mask_file(dir, &image_id) {
                Some(mask_path) => {
                    let mask = load_mask(&mask_path, config.mask_threshold)?;
                    if mask.dim() != (h, w) {
                        return Err(Error::MaskSizeMismatch {
                            image_id: image_id.clone(),
                            class: class.name.clone(),
                        });
                    }
                    mask
                }
                None => {
                    warn!(
                        "image '{image_id}': no mask for class '{}' in {}",
                        class.name,
                        dir.display()
                    );
                    Array2::from_elem((h, w), false)
                }
            };
            gt_masks.insert(class.name.clone(), mask);
        }
        let split_hint = config.split_hints.get(&image_id).copied();
        samples.push(RawSample {
            image_id,
            rgb,
            gt_masks,
            split_hint,
        });
    }
    Ok(samples)
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pbm"];

fn list_image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    Ok(files)
}

fn find_mask_file(dir: &Path, image_id: &str) -> Option<PathBuf> {
    for ext in IMAGE_EXTENSIONS {
        let candidate = dir.join(format!("{image_id}.{ext}"));
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

fn load_rgb(path: &Path) -> Result<Array3<u8>> {
    if !path.is_file() {
        return Err(Error::MissingImage(path.to_path_buf()));
    }
    let img = image::open(path)
        .map_err(|e| Error::Data(format!("cannot decode {}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    let mut out = Array3::zeros((h as usize, w as usize, 3));
    for (x, y, pixel) in img.enumerate_pixels() {
        for c in 0..3 {
            out[(y as usize, x as usize, c)] = pixel.0[c];
        }
    }
    Ok(out)
}

fn load_mask(path: &Path, threshold: f64) -> Result<Mask> {
    let img = image::open(path)
        .map_err(|e| Error::Data(format!("cannot decode {}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = img.dimensions();
    let max = img.pixels().map(|p| p.0[0]).max().unwrap_or(0);
    if max == 0 {
        return Ok(Array2::from_elem((h as usize, w as usize), false));
    }
    let cut = threshold * max as f64;
    let mut out = Array2::from_elem((h as usize, w as usize), false);
    for (x, y, pixel) in img.enumerate_pixels() {
        out[(y as usize, x as usize)] = pixel.0[0] as f64 >= cut;
    }
    Ok(out)
}

/// Full preprocessing of one raw sample: extract the green/red channels and
/// HSI planes, resize each to 500x500 (bilinear), min-max rescale to `[0, 1]`,
/// then derive the Gaussian coefficient and gradient magnitude stacks.
pub fn preprocess(raw: &RawSample) -> Result<ImagePlanes> {
    let (h, w, _) = raw.rgb.dim();
    if h < 2 || w < 2 {
        return Err(Error::InvalidArgument(format!(
            "image '{}' is degenerate ({h}x{w})",
            raw.image_id
        )));
    }
    let rgbf = raw.rgb.mapv(|v| v as f64 / 255.0);
    let green = rgbf.slice(s![.., .., 1]).to_owned();
    let red = rgbf.slice(s![.., .., 0]).to_owned();
    let (hue, sat, intensity) = hsi::rgb_to_hsi(&rgbf);

    let prep =
        |p: &Plane, label: &str| -> Plane {
            let mut q = resize_bilinear(p, PLANE_SIZE, PLANE_SIZE);
            rescale_unit(&mut q, &format!("{} plane of '{}'", label, raw.image_id));
            q
        };
    ImagePlanes::derive(
        prep(&green, "green"),
        prep(&red, "red"),
        prep(&hue, "hue"),
        prep(&sat, "saturation"),
        prep(&intensity, "intensity"),
        DEFAULT_SIGMA_SQ,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_from_rgb(rgb: Array3<u8>) -> RawSample {
        RawSample {
            image_id: "test".into(),
            rgb,
            gt_masks: BTreeMap::new(),
            split_hint: None,
        }
    }

    #[test]
    fn odd_sized_input_yields_square_planes() {
        let rgb = Array3::from_shape_fn((605, 700, 3), |(y, x, c)| {
            ((y * 3 + x * 7 + c * 11) % 256) as u8
        });
        let planes = preprocess(&raw_from_rgb(rgb)).unwrap();
        assert_eq!(planes.green.dim(), (PLANE_SIZE, PLANE_SIZE));
        assert_eq!(planes.intensity.dim(), (PLANE_SIZE, PLANE_SIZE));
        for g in &planes.gauss {
            assert_eq!(g.dim(), (PLANE_SIZE, PLANE_SIZE));
        }
        for g in planes.grad1.iter().chain(planes.grad2.iter()) {
            assert_eq!(g.dim(), (PLANE_SIZE, PLANE_SIZE));
            assert!(g.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn rescale_endpoints_from_binary_input() {
        let mut rgb = Array3::zeros((PLANE_SIZE, PLANE_SIZE, 3));
        rgb.slice_mut(s![..250, .., 1]).fill(255u8);
        let planes = preprocess(&raw_from_rgb(rgb)).unwrap();
        let lo = planes.green.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = planes.green.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn preprocess_is_idempotent_on_full_range_unit_plane() {
        // 500x500 input whose green channel already spans 0..255: resize is
        // identity and the rescale must leave green/255 untouched.
        let rgb = Array3::from_shape_fn((PLANE_SIZE, PLANE_SIZE, 3), |(y, x, _)| {
            ((y * PLANE_SIZE + x) % 256) as u8
        });
        let planes = preprocess(&raw_from_rgb(rgb.clone())).unwrap();
        for y in 0..PLANE_SIZE {
            for x in 0..PLANE_SIZE {
                let direct = rgb[(y, x, 1)] as f64 / 255.0;
                assert!((planes.green[(y, x)] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gray_input_has_zero_saturation_plane() {
        let rgb = Array3::from_shape_fn((64, 64, 3), |(y, x, _)| ((y + x) % 256) as u8);
        let planes = preprocess(&raw_from_rgb(rgb)).unwrap();
        assert!(planes.sat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn degenerate_input_is_rejected() {
        let rgb = Array3::zeros((1, 40, 3));
        assert!(preprocess(&raw_from_rgb(rgb)).is_err());
    }

    #[test]
    fn channel_planes_stay_in_unit_interval() {
        let rgb = Array3::from_shape_fn((37, 53, 3), |(y, x, c)| {
            ((y * 13 + x * 29 + c * 101) % 256) as u8
        });
        let planes = preprocess(&raw_from_rgb(rgb)).unwrap();
        for plane in [
            &planes.green,
            &planes.red,
            &planes.hue,
            &planes.sat,
            &planes.intensity,
        ] {
            assert!(plane.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
