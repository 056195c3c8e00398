use ndarray::Array3;

use crate::raster::Plane;

/// Hue/saturation/intensity of a single RGB pixel with channels in `[0, 1]`.
///
/// Classical arccos formulation; hue is normalized to `[0, 1]`. Degenerate
/// pixels use the zero conventions: gray pixels get hue 0, black pixels get
/// hue 0 and saturation 0.
pub fn hsi_pixel(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let sum = r + g + b;
    let intensity = sum / 3.0;
    let saturation = if sum > 0.0 {
        1.0 - 3.0 * r.min(g).min(b) / sum
    } else {
        0.0
    };
    let num = 0.5 * ((r - g) + (r - b));
    let den = ((r - g) * (r - g) + (r - b) * (g - b)).sqrt();
    let hue = if den > 0.0 {
        let theta = (num / den).clamp(-1.0, 1.0).acos();
        let angle = if b <= g {
            theta
        } else {
            2.0 * std::f64::consts::PI - theta
        };
        angle / (2.0 * std::f64::consts::PI)
    } else {
        0.0
    };
    (hue, saturation.clamp(0.0, 1.0), intensity)
}

/// Convert an `(h, w, 3)` RGB array with channels in `[0, 1]` to HSI planes.
pub fn rgb_to_hsi(rgb: &Array3<f64>) -> (Plane, Plane, Plane) {
    let (h, w, c) = rgb.dim();
    assert_eq!(c, 3, "expected an (h, w, 3) array");
    let mut hue = Plane::zeros((h, w));
    let mut sat = Plane::zeros((h, w));
    let mut int = Plane::zeros((h, w));
    for y in 0..h {
        for x in 0..w {
            let (hv, sv, iv) = hsi_pixel(rgb[(y, x, 0)], rgb[(y, x, 1)], rgb[(y, x, 2)]);
            hue[(y, x)] = hv;
            sat[(y, x)] = sv;
            int[(y, x)] = iv;
        }
    }
    (hue, sat, int)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pure_red_pixel() {
        let (h, s, i) = hsi_pixel(1.0, 0.0, 0.0);
        assert_eq!(h, 0.0);
        assert!((s - 1.0).abs() < 1e-12);
        assert!((i - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gray_pixel_has_zero_saturation() {
        let (h, s, i) = hsi_pixel(0.5, 0.5, 0.5);
        assert_eq!(h, 0.0);
        assert_eq!(s, 0.0);
        assert!((i - 0.5).abs() < 1e-12);
    }

    #[test]
    fn black_pixel_zero_convention() {
        let (h, s, i) = hsi_pixel(0.0, 0.0, 0.0);
        assert_eq!((h, s, i), (0.0, 0.0, 0.0));
    }

    #[test]
    fn primary_colors_split_the_hue_circle() {
        let (hg, _, _) = hsi_pixel(0.0, 1.0, 0.0);
        let (hb, _, _) = hsi_pixel(0.0, 0.0, 1.0);
        assert!((hg - 1.0 / 3.0).abs() < 1e-12);
        assert!((hb - 2.0 / 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hsi_always_in_unit_range(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (h, s, i) = hsi_pixel(r, g, b);
            prop_assert!((0.0..=1.0).contains(&h));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((0.0..=1.0).contains(&i));
        }
    }
}
