use super::*;
use crate::prep::DEFAULT_SIGMA_SQ;
use crate::regions::RegionKind;

fn region(pixels: Vec<Pixel>) -> Region {
    Region {
        region_id: "t".into(),
        image_id: "img".into(),
        pixels,
        label: 0,
        kind: RegionKind::Bright,
    }
}

fn lcg_plane(dim: (usize, usize), seed: u64) -> Plane {
    let mut state = seed;
    Plane::from_shape_fn(dim, |_| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    })
}

fn derived_planes(dim: (usize, usize), seed: u64) -> ImagePlanes {
    ImagePlanes::derive(
        lcg_plane(dim, seed),
        lcg_plane(dim, seed + 1),
        lcg_plane(dim, seed + 2),
        lcg_plane(dim, seed + 3),
        lcg_plane(dim, seed + 4),
        DEFAULT_SIGMA_SQ,
    )
    .expect("derive planes")
}

fn manual_planes(dim: (usize, usize), fill: impl Fn(usize) -> f64) -> ImagePlanes {
    let plane = |i: usize| Plane::from_elem(dim, fill(i));
    ImagePlanes {
        green: plane(0),
        red: plane(1),
        hue: plane(2),
        sat: plane(3),
        intensity: plane(4),
        gauss: [plane(5), plane(6), plane(7), plane(8), plane(9), plane(10)],
        grad1: [plane(11), plane(12), plane(13), plane(14)],
        grad2: [plane(15), plane(16), plane(17), plane(18)],
    }
}

#[test]
fn profile_counts_and_names() {
    assert_eq!(FeatureProfile::Region66.feature_count(), 66);
    assert_eq!(FeatureProfile::Full98.feature_count(), 98);
    assert_eq!(FeatureProfile::Region66.category_sizes(), &[14, 12, 16, 24]);
    assert_eq!(
        FeatureProfile::Full98.category_sizes(),
        &[14, 12, 16, 24, 24, 4, 4]
    );

    for profile in [FeatureProfile::Region66, FeatureProfile::Full98] {
        let names = profile.feature_names();
        assert_eq!(names.len(), profile.feature_count());
        let unique: std::collections::BTreeSet<&String> = names.iter().collect();
        assert_eq!(unique.len(), names.len(), "duplicate feature name");
    }
    let names = FeatureProfile::Full98.feature_names();
    assert_eq!(names[0], "area");
    assert_eq!(names[14], "gauss_g_mean");
    assert_eq!(names[26], "ri_green_mean");
    assert_eq!(names[42], "grad1_green_max");
    assert_eq!(names[66], "prod_grad1_green_max");
    assert_eq!(names[90], "win3_green_max");
    assert_eq!(names[94], "pix_gx_mean");
}

#[test]
fn solid_square_structural() {
    let f = structural_features(&region(vec![(5, 5), (5, 6), (6, 5), (6, 6)]));
    assert_eq!(f[0], 4.0); // area
    assert_eq!(f[1], 2.0); // bbox width
    assert_eq!(f[2], 2.0); // bbox height
    assert_eq!(f[3], 4.0); // convex area
    assert_eq!(f[4], 4.0); // filled area
    assert_eq!(f[5], 1.0); // euler
    assert_eq!(f[6], 1.0); // extent
    assert_eq!(f[11], 4.0); // perimeter
    assert_eq!(f[12], 1.0); // solidity
    assert!((f[13] - 16.0 / (16.0 * std::f64::consts::PI)).abs() < 1e-12);
}

#[test]
fn square_with_hole() {
    let mut pixels = Vec::new();
    for r in 0..3 {
        for c in 0..3 {
            if (r, c) != (1, 1) {
                pixels.push((r, c));
            }
        }
    }
    let f = structural_features(&region(pixels));
    assert_eq!(f[0], 8.0); // area
    assert_eq!(f[3], 9.0); // convex area
    assert_eq!(f[4], 9.0); // filled area
    assert_eq!(f[5], 0.0); // euler: one hole
}

#[test]
fn horizontal_line_matches_moment_oracle() {
    let pixels: Vec<Pixel> = (0..10).map(|c| (3usize, c)).collect();
    let f = structural_features(&region(pixels.clone()));

    // Independent central-moment evaluation over the raw pixel list.
    let n = pixels.len() as f64;
    let mean_c = pixels.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let mu_cc = pixels
        .iter()
        .map(|p| (p.1 as f64 - mean_c).powi(2))
        .sum::<f64>()
        / n;
    assert!((f[7] - 4.0 * mu_cc.sqrt()).abs() < 1e-12, "major axis");
    assert_eq!(f[8], 0.0, "minor axis");
    assert_eq!(f[9], 0.0, "orientation");
    assert_eq!(f[10], 1.0, "eccentricity");
    assert_eq!(f[3], 10.0, "convex area of a line");
    assert_eq!(f[12], 1.0, "solidity of a line");
}

#[test]
fn single_pixel_conventions() {
    let f = structural_features(&region(vec![(7, 9)]));
    assert_eq!(f[0], 1.0);
    assert_eq!(f[3], 1.0); // convex
    assert_eq!(f[5], 1.0); // euler
    assert_eq!(f[6], 1.0); // extent
    assert_eq!(f[7], 0.0); // major axis
    assert_eq!(f[8], 0.0); // minor axis
    assert_eq!(f[10], 0.0); // eccentricity
    assert_eq!(f[11], 1.0); // perimeter
    assert_eq!(f[12], 1.0); // solidity
    assert_eq!(f[13], 0.0); // compactness
}

fn blob_pixels() -> Vec<Pixel> {
    let mut pixels = vec![
        (10, 10),
        (10, 11),
        (11, 10),
        (11, 11),
        (12, 11),
        (12, 12),
        (13, 13),
        (13, 14),
        (12, 14),
        (10, 14),
        (11, 13),
    ];
    pixels.sort_unstable();
    pixels
}

#[test]
fn structural_translation_invariance_is_exact() {
    let base = structural_features(&region(blob_pixels()));
    let shifted: Vec<Pixel> = blob_pixels().iter().map(|&(r, c)| (r + 7, c + 11)).collect();
    let moved = structural_features(&region(shifted));
    assert_eq!(base, moved);
}

#[test]
fn pixel_order_does_not_change_any_feature() {
    let planes = derived_planes((60, 60), 99);
    let sorted = region(blob_pixels());
    let mut reversed_pixels = blob_pixels();
    reversed_pixels.reverse();
    reversed_pixels.swap(0, 5);
    let reversed = region(reversed_pixels);

    let mask = candidate_mask(std::slice::from_ref(&sorted), planes.dim());
    let a = feature_row(&sorted, &planes, &mask, FeatureProfile::Full98);
    let b = feature_row(&reversed, &planes, &mask, FeatureProfile::Full98);
    assert_eq!(a, b);
}

#[test]
fn statistics_match_brute_force() {
    let planes = derived_planes((50, 50), 7);
    let reg = region(blob_pixels());
    let px = blob_pixels();
    let n = px.len() as f64;

    let brute = |plane: &Plane| -> (f64, f64, f64, f64) {
        let vals: Vec<f64> = px.iter().map(|&p| plane[p]).collect();
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (mean, var, min, max)
    };

    let gauss = gaussian_coeff_features(&reg, &planes);
    for (i, img) in planes.gauss.iter().enumerate() {
        let (mean, var, _, _) = brute(img);
        assert!((gauss[2 * i] - mean).abs() < 1e-12);
        assert!((gauss[2 * i + 1] - var).abs() < 1e-12);
    }

    let ri = regional_intensity_features(&reg, &planes);
    for i in 0..4 {
        let (mean, var, min, max) = brute(planes.intensity_plane(i));
        assert!((ri[4 * i] - mean).abs() < 1e-12);
        assert!((ri[4 * i + 1] - min).abs() < 1e-12);
        assert!((ri[4 * i + 2] - max).abs() < 1e-12);
        assert!((ri[4 * i + 3] - var.sqrt()).abs() < 1e-12);
    }

    let gi = gradient_intensity_features(&reg, &planes);
    let mut slot = 0;
    for deriv in [&planes.grad1, &planes.grad2] {
        for img in deriv.iter() {
            let (mean, _, min, max) = brute(img);
            assert!((gi[slot] - max).abs() < 1e-12);
            assert!((gi[slot + 1] - min).abs() < 1e-12);
            assert!((gi[slot + 2] - mean).abs() < 1e-12);
            slot += 3;
        }
    }

    let sources = [&planes.green, &planes.red, &planes.hue, &planes.sat];
    let prod = gradient_in_intensity_features(&reg, &planes);
    let mut slot = 0;
    for deriv in [&planes.grad1, &planes.grad2] {
        for (idx, img) in deriv.iter().enumerate() {
            let vals: Vec<f64> = px.iter().map(|&p| sources[idx][p] * img[p]).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((prod[slot] - max).abs() < 1e-12);
            assert!((prod[slot + 1] - min).abs() < 1e-12);
            assert!((prod[slot + 2] - mean).abs() < 1e-12);
            slot += 3;
        }
    }

    let pix = pixel_intensity_features(&reg, &planes);
    for (slot, g) in [1usize, 2, 4, 5].into_iter().enumerate() {
        let (mean, _, _, _) = brute(&planes.gauss[g]);
        assert!((pix[slot] - mean).abs() < 1e-12);
    }
}

#[test]
fn window_features_match_sliding_oracle() {
    let planes = derived_planes((40, 40), 21);
    let reg = region(blob_pixels());
    let mask = candidate_mask(std::slice::from_ref(&reg), planes.dim());
    let got = pixel_window_features(&reg, &planes, &mask);

    let plane = &planes.green;
    let (h, w) = plane.dim();
    let mut sums = [0.0; 4];
    for &(r, c) in &blob_pixels() {
        let mut max3 = f64::NEG_INFINITY;
        let mut vals5 = Vec::new();
        let mut count5 = 0usize;
        for rr in r.saturating_sub(2)..(r + 3).min(h) {
            for cc in c.saturating_sub(2)..(c + 3).min(w) {
                vals5.push(plane[(rr, cc)]);
                if mask[(rr, cc)] {
                    count5 += 1;
                }
                if rr.abs_diff(r) <= 1 && cc.abs_diff(c) <= 1 {
                    max3 = max3.max(plane[(rr, cc)]);
                }
            }
        }
        let m = vals5.iter().sum::<f64>() / vals5.len() as f64;
        let var = vals5.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals5.len() as f64;
        sums[0] += max3;
        sums[1] += m;
        sums[2] += var.sqrt();
        sums[3] += count5 as f64;
    }
    let n = blob_pixels().len() as f64;
    for i in 0..4 {
        assert!(
            (got[i] - sums[i] / n).abs() < 1e-12,
            "window slot {i}: {} vs {}",
            got[i],
            sums[i] / n
        );
    }
}

#[test]
fn window_features_trivial_cases() {
    let planes = manual_planes((30, 30), |i| if i == 0 { 0.7 } else { 0.0 });
    let lone = region(vec![(10, 10)]);
    let mask = candidate_mask(std::slice::from_ref(&lone), planes.dim());
    let f = pixel_window_features(&lone, &planes, &mask);
    assert_eq!(f[0], 0.7);
    assert!((f[1] - 0.7).abs() < 1e-12);
    assert!(f[2].abs() < 1e-12);
    assert_eq!(f[3], 1.0);

    // Full 5x5 candidate block around the probe pixel: 25 neighbors.
    let mut block = Vec::new();
    for r in 8..13 {
        for c in 8..13 {
            block.push((r, c));
        }
    }
    let block_region = region(block);
    let mask = candidate_mask(std::slice::from_ref(&block_region), planes.dim());
    let probe = region(vec![(10, 10)]);
    let f = pixel_window_features(&probe, &planes, &mask);
    assert_eq!(f[3], 25.0);

    // Corner pixel: the 5x5 window clips to 3x3.
    let corner = region(vec![(0, 0)]);
    let mask = candidate_mask(std::slice::from_ref(&corner), planes.dim());
    let f = pixel_window_features(&corner, &planes, &mask);
    assert_eq!(f[0], 0.7);
    assert!((f[1] - 0.7).abs() < 1e-12);
    assert_eq!(f[3], 1.0);
}

#[test]
fn constant_and_identity_planes() {
    let reg = region(blob_pixels());

    // Regional statistics over a constant plane.
    let planes = manual_planes((30, 30), |i| 0.1 * i as f64 + 0.4);
    let ri = regional_intensity_features(&reg, &planes);
    for i in 0..4 {
        let c = planes.intensity_plane(i)[(0, 0)];
        assert!((ri[4 * i] - c).abs() < 1e-12);
        assert_eq!(ri[4 * i + 1], c);
        assert_eq!(ri[4 * i + 2], c);
        assert!(ri[4 * i + 3].abs() < 1e-12);
    }

    // Plane of ones: product features equal the plain gradient features.
    let mut planes = derived_planes((30, 30), 5);
    planes.green = Plane::from_elem((30, 30), 1.0);
    planes.red = Plane::from_elem((30, 30), 1.0);
    planes.hue = Plane::from_elem((30, 30), 1.0);
    planes.sat = Plane::from_elem((30, 30), 1.0);
    let gi = gradient_intensity_features(&reg, &planes);
    let prod = gradient_in_intensity_features(&reg, &planes);
    assert_eq!(gi.to_vec(), prod.to_vec());

    // Zero plane: the corresponding product block is identically zero.
    planes.hue = Plane::zeros((30, 30));
    let prod = gradient_in_intensity_features(&reg, &planes);
    for stat in 0..3 {
        assert_eq!(prod[6 + stat], 0.0, "grad1 hue product");
        assert_eq!(prod[18 + stat], 0.0, "grad2 hue product");
    }
}

#[test]
fn derivative_features_vanish_on_constant_image() {
    let dim = (40, 40);
    let planes = ImagePlanes::derive(
        Plane::from_elem(dim, 0.3),
        Plane::from_elem(dim, 0.3),
        Plane::from_elem(dim, 0.3),
        Plane::from_elem(dim, 0.3),
        Plane::from_elem(dim, 0.3),
        DEFAULT_SIGMA_SQ,
    )
    .unwrap();
    let reg = region(blob_pixels());
    let pix = pixel_intensity_features(&reg, &planes);
    for v in pix {
        assert!(v.abs() < 1e-9, "derivative mean {v} on constant image");
    }
    let gi = gradient_intensity_features(&reg, &planes);
    for v in gi {
        assert!(v.abs() < 1e-12);
    }
}

#[test]
fn ramp_gradient_statistics_equal_slope() {
    let dim = (60, 60);
    let slope = 0.004;
    let ramp = Plane::from_shape_fn(dim, |(_, c)| slope * c as f64);
    let planes = ImagePlanes::derive(
        ramp.clone(),
        ramp.clone(),
        ramp.clone(),
        ramp.clone(),
        ramp,
        DEFAULT_SIGMA_SQ,
    )
    .unwrap();
    let reg = region(blob_pixels());
    let gi = gradient_intensity_features(&reg, &planes);
    for (stat, &g) in gi.iter().enumerate().take(3) {
        assert!((g - slope).abs() < 1e-12, "grad1 green stat {stat}: {g}");
    }
    for stat in 0..3 {
        assert!(gi[12 + stat].abs() < 1e-12, "grad2 green stat {stat}");
    }
}

#[test]
fn pixel_intensity_single_pixel_reads_responses() {
    let planes = manual_planes((20, 20), |i| i as f64 * 0.01);
    let reg = region(vec![(4, 4)]);
    let pix = pixel_intensity_features(&reg, &planes);
    assert_eq!(pix[0], planes.gauss[1][(4, 4)]);
    assert_eq!(pix[1], planes.gauss[2][(4, 4)]);
    assert_eq!(pix[2], planes.gauss[4][(4, 4)]);
    assert_eq!(pix[3], planes.gauss[5][(4, 4)]);
}

#[test]
fn build_table_shapes_and_errors() {
    let planes = derived_planes((40, 40), 3);
    let regions = vec![
        Region {
            label: 1,
            ..region(blob_pixels())
        },
        Region {
            label: 0,
            region_id: "t2".into(),
            ..region(vec![(30, 30), (30, 31), (31, 30)])
        },
    ];

    let table = build_feature_table(
        &[(&planes, regions.as_slice())],
        FeatureProfile::Region66,
        "demo",
    )
    .unwrap();
    assert_eq!(table.values.dim(), (2, 66));
    assert_eq!(table.labels, vec![1, 0]);
    assert_eq!(table.sample_ids[1], "t2");
    table.validate().unwrap();

    let table = build_feature_table(
        &[(&planes, &regions[..1])],
        FeatureProfile::Full98,
        "demo",
    )
    .unwrap();
    assert_eq!(table.values.dim(), (1, 98));

    let err = build_feature_table(&[], FeatureProfile::Region66, "demo").unwrap_err();
    assert!(err.is_data_error());
}
