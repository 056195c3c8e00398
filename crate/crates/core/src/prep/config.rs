//! Plain-text key/value dataset configs.
//!
//! ```text
//! name = stare
//! images_dir = images
//! classes = non_vessel:vessel, vessel:vessel
//! mask_dir.vessel = labels-vk
//! mask_threshold = 0.75
//! profile = full98
//! ```
//!
//! Classes are declared in label order as `name:kind` pairs, where kind is
//! one of `bright`, `red`, `vessel`. Classes without a `mask_dir.<name>`
//! entry act as the fallback label for candidates of their kind. Relative
//! paths resolve against the config file's directory. Candidate-extraction
//! thresholds can be overridden with the optional keys carried by
//! [`ExtractionParams`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::features::FeatureProfile;
use crate::prep::SplitHint;
use crate::regions::RegionKind;

#[derive(Debug, Clone)]
pub struct ClassSpec {
    pub name: String,
    pub kind: RegionKind,
}

/// Tunables for the candidate-region extractors.
#[derive(Debug, Clone)]
pub struct ExtractionParams {
    /// Bright candidates: threshold at mean + k*std of the green plane.
    pub bright_k: f64,
    pub bright_area: (usize, usize),
    /// Red candidates: same rule on the inverted green plane.
    pub red_k: f64,
    pub red_area: (usize, usize),
    /// Disk radius of the top-hat structuring element, in pixels.
    pub tophat_radius: usize,
    pub major_vessel_min_area: usize,
    pub minor_area: (usize, usize),
}

impl Default for ExtractionParams {
    fn default() -> Self {
        ExtractionParams {
            bright_k: 2.0,
            bright_area: (10, 5000),
            red_k: 2.0,
            red_area: (10, 5000),
            tophat_radius: 8,
            major_vessel_min_area: 200,
            minor_area: (3, 200),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub name: String,
    pub images_dir: PathBuf,
    /// Declared classes; class id = position in this list.
    pub classes: Vec<ClassSpec>,
    /// Class name -> ground-truth mask directory.
    pub mask_dirs: BTreeMap<String, PathBuf>,
    /// Binarization level for soft masks, as a fraction of the mask maximum.
    pub mask_threshold: f64,
    pub profile: FeatureProfile,
    pub extraction: ExtractionParams,
    pub split_hints: BTreeMap<String, SplitHint>,
}

impl DatasetConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    /// Classes of the given kind that carry ground-truth masks, as
    /// `(class_id, name)` in label order.
    pub fn labeled_classes(&self, kind: RegionKind) -> Vec<(usize, &str)> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind && self.mask_dirs.contains_key(&c.name))
            .map(|(id, c)| (id, c.name.as_str()))
            .collect()
    }

    /// Fallback class id for candidates of a kind: the lowest class id of
    /// that kind without a ground-truth mask.
    pub fn fallback_class(&self, kind: RegionKind) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.kind == kind && !self.mask_dirs.contains_key(&c.name))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        let err = |message: String| Error::Config {
            path: path.to_path_buf(),
            message,
        };

        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("line {}: expected 'key = value'", lineno + 1)));
            };
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
        let get = |key: &str| -> Option<&str> {
            entries
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };

        let images_dir = base.join(
            get("images_dir").ok_or_else(|| err("missing key 'images_dir'".into()))?,
        );
        let classes_raw = get("classes").ok_or_else(|| err("missing key 'classes'".into()))?;
        let mut classes = Vec::new();
        for item in classes_raw.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (name, kind) = item
                .split_once(':')
                .ok_or_else(|| err(format!("class '{item}' must be 'name:kind'")))?;
            let kind = match kind.trim() {
                "bright" => RegionKind::Bright,
                "red" => RegionKind::Red,
                "vessel" => RegionKind::Vessel,
                other => return Err(err(format!("unknown region kind '{other}'"))),
            };
            classes.push(ClassSpec {
                name: name.trim().to_string(),
                kind,
            });
        }
        if classes.is_empty() {
            return Err(err("class list is empty".into()));
        }

        let mut mask_dirs = BTreeMap::new();
        let mut split_hints = BTreeMap::new();
        for (key, value) in &entries {
            if let Some(class) = key.strip_prefix("mask_dir.") {
                if !classes.iter().any(|c| c.name == class) {
                    return Err(err(format!("mask_dir for undeclared class '{class}'")));
                }
                mask_dirs.insert(class.to_string(), base.join(value));
            } else if let Some(image_id) = key.strip_prefix("split_hint.") {
                let hint = match value.as_str() {
                    "train" => SplitHint::Train,
                    "test" => SplitHint::Test,
                    other => return Err(err(format!("split hint must be train|test, got '{other}'"))),
                };
                split_hints.insert(image_id.to_string(), hint);
            }
        }

        let mask_threshold = match get("mask_threshold") {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| err(format!("bad mask_threshold '{v}'")))?,
            None => 0.75,
        };
        if !(0.0..=1.0).contains(&mask_threshold) {
            return Err(err(format!(
                "mask_threshold must lie in [0,1], got {mask_threshold}"
            )));
        }

        let profile = match get("profile") {
            Some("region66") | None => FeatureProfile::Region66,
            Some("full98") => FeatureProfile::Full98,
            Some(other) => return Err(err(format!("unknown profile '{other}'"))),
        };

        let mut extraction = ExtractionParams::default();
        let parse_f64 = |key: &str, slot: &mut f64| -> Result<()> {
            if let Some(v) = get(key) {
                *slot = v
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad value for {key}: '{v}'")))?;
            }
            Ok(())
        };
        let parse_usize = |key: &str, slot: &mut usize| -> Result<()> {
            if let Some(v) = get(key) {
                *slot = v
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad value for {key}: '{v}'")))?;
            }
            Ok(())
        };
        let parse_range = |key: &str, slot: &mut (usize, usize)| -> Result<()> {
            if let Some(v) = get(key) {
                let (lo, hi) = v
                    .split_once("..")
                    .ok_or_else(|| err(format!("{key} must be 'lo..hi', got '{v}'")))?;
                let lo = lo
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad lower bound in {key}: '{v}'")))?;
                let hi = hi
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad upper bound in {key}: '{v}'")))?;
                *slot = (lo, hi);
            }
            Ok(())
        };
        parse_f64("bright_k", &mut extraction.bright_k)?;
        parse_f64("red_k", &mut extraction.red_k)?;
        parse_range("bright_area", &mut extraction.bright_area)?;
        parse_range("red_area", &mut extraction.red_area)?;
        parse_range("minor_area", &mut extraction.minor_area)?;
        parse_usize("tophat_radius", &mut extraction.tophat_radius)?;
        parse_usize("major_vessel_min_area", &mut extraction.major_vessel_min_area)?;

        Ok(DatasetConfig {
            name: get("name").unwrap_or("dataset").to_string(),
            images_dir,
            classes,
            mask_dirs,
            mask_threshold,
            profile,
            extraction,
            split_hints,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
name = demo
images_dir = images
classes = fp_bright:bright, hard_exudate:bright, cotton_wool:bright, fp_red:red, hemorrhage:red, microaneurysm:red
mask_dir.hard_exudate = gt/he
mask_dir.cotton_wool = gt/cw
mask_dir.hemorrhage = gt/hm
mask_dir.microaneurysm = gt/ma
mask_threshold = 0.5
profile = region66
bright_k = 1.5
bright_area = 20..4000
split_hint.image001 = train
";

    #[test]
    fn parses_full_config() {
        let cfg = DatasetConfig::parse(SAMPLE, Path::new("/data/demo.conf")).unwrap();
        assert_eq!(cfg.name, "demo");
        assert_eq!(cfg.classes.len(), 6);
        assert_eq!(cfg.class_id("fp_red"), Some(3));
        assert_eq!(cfg.mask_threshold, 0.5);
        assert_eq!(cfg.profile, FeatureProfile::Region66);
        assert_eq!(cfg.extraction.bright_k, 1.5);
        assert_eq!(cfg.extraction.bright_area, (20, 4000));
        assert_eq!(cfg.extraction.tophat_radius, 8);
        assert_eq!(cfg.images_dir, PathBuf::from("/data/images"));
        assert_eq!(cfg.split_hints.get("image001"), Some(&SplitHint::Train));
    }

    #[test]
    fn fallback_class_is_lowest_unmasked_of_kind() {
        let cfg = DatasetConfig::parse(SAMPLE, Path::new("demo.conf")).unwrap();
        assert_eq!(cfg.fallback_class(RegionKind::Bright), Some(0));
        assert_eq!(cfg.fallback_class(RegionKind::Red), Some(3));
        assert_eq!(cfg.fallback_class(RegionKind::Vessel), None);
        let bright = cfg.labeled_classes(RegionKind::Bright);
        assert_eq!(
            bright.iter().map(|(id, _)| *id).collect::<Vec<_>>(),
            vec![1, 2]
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(DatasetConfig::parse("images_dir images", Path::new("x")).is_err());
        assert!(DatasetConfig::parse("images_dir = i\nclasses = a:nope", Path::new("x")).is_err());
        assert!(DatasetConfig::parse("images_dir = i", Path::new("x")).is_err());
    }
}
