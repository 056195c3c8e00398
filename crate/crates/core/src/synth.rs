//! Synthetic Gaussian-blob feature tables with a declared informative /
//! noise column split, used by the oracle test suites.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::table::FeatureTable;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub classes: usize,
    pub samples: usize,
    /// Leading columns whose class means are shifted by `effect` standard
    /// deviations; the remaining `noise` columns are class-independent.
    pub informative: usize,
    pub noise: usize,
    pub effect: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            classes: 2,
            samples: 5000,
            informative: 10,
            noise: 40,
            effect: 1.5,
        }
    }
}

impl SynthSpec {
    pub fn feature_count(&self) -> usize {
        self.informative + self.noise
    }

    /// Ground-truth informative column indices.
    pub fn informative_set(&self) -> Vec<usize> {
        (0..self.informative).collect()
    }
}

/// Unit normals via Box-Muller over the seeded stream, so output bytes
/// depend only on the seed.
struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Gaussian {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Labels cycle through the classes; informative column `j` has class-`c`
/// mean `effect * (c - (classes-1)/2)` with alternating sign per column.
pub fn generate(spec: &SynthSpec, seed: u64) -> Result<FeatureTable> {
    if spec.classes < 2 {
        return Err(Error::InvalidArgument(format!(
            "synthetic tables need >= 2 classes, got {}",
            spec.classes
        )));
    }
    if spec.samples < spec.classes {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot cover {} classes",
            spec.samples, spec.classes
        )));
    }
    if spec.feature_count() == 0 {
        return Err(Error::InvalidArgument(
            "synthetic tables need at least one feature column".into(),
        ));
    }

    let n = spec.samples;
    let l = spec.feature_count();
    let center = (spec.classes - 1) as f64 / 2.0;
    let mut gauss = Gaussian::new(seed);
    let mut values = Array2::zeros((n, l));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % spec.classes;
        labels.push(class as u32);
        for j in 0..l {
            let mean = if j < spec.informative {
                let direction = if j % 2 == 0 { 1.0 } else { -1.0 };
                spec.effect * (class as f64 - center) * direction
            } else {
                0.0
            };
            values[(i, j)] = mean + gauss.next();
        }
    }

    let feature_names = (0..l)
        .map(|j| {
            if j < spec.informative {
                format!("inf{j:03}")
            } else {
                format!("noise{:03}", j - spec.informative)
            }
        })
        .collect();
    let table = FeatureTable {
        values,
        feature_names,
        labels,
        sample_ids: (0..n).map(|i| format!("s{i:06}")).collect(),
        image_ids: vec!["synth".into(); n],
        dataset_tag: "synth".into(),
    };
    table.validate()?;
    Ok(table)
}
