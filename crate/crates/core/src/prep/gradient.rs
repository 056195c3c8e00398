use crate::raster::Plane;

/// First- and second-order gradient magnitude images of a plane.
///
/// `grad1 = sqrt(dx^2 + dy^2)` from central differences, `grad2` likewise
/// from second central differences. Borders are handled by edge replication.
pub fn gradient_magnitudes(plane: &Plane) -> (Plane, Plane) {
    let (h, w) = plane.dim();
    let at = |y: isize, x: isize| -> f64 {
        let y = y.clamp(0, h as isize - 1) as usize;
        let x = x.clamp(0, w as isize - 1) as usize;
        plane[(y, x)]
    };
    let mut grad1 = Plane::zeros((h, w));
    let mut grad2 = Plane::zeros((h, w));
    for y in 0..h as isize {
        for x in 0..w as isize {
            let dx = (at(y, x + 1) - at(y, x - 1)) / 2.0;
            let dy = (at(y + 1, x) - at(y - 1, x)) / 2.0;
            let dxx = at(y, x + 1) - 2.0 * at(y, x) + at(y, x - 1);
            let dyy = at(y + 1, x) - 2.0 * at(y, x) + at(y - 1, x);
            grad1[(y as usize, x as usize)] = (dx * dx + dy * dy).sqrt();
            grad2[(y as usize, x as usize)] = (dxx * dxx + dyy * dyy).sqrt();
        }
    }
    (grad1, grad2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_plane_has_zero_gradients() {
        let plane = Plane::from_elem((8, 8), 0.42);
        let (g1, g2) = gradient_magnitudes(&plane);
        assert!(g1.iter().all(|&v| v == 0.0));
        assert!(g2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_ramp_first_order_equals_slope() {
        let slope = 0.03;
        let plane = Plane::from_shape_fn((10, 10), |(_, x)| slope * x as f64);
        let (g1, g2) = gradient_magnitudes(&plane);
        for y in 0..10 {
            for x in 1..9 {
                assert!((g1[(y, x)] - slope).abs() < 1e-9);
                assert!(g2[(y, x)].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gradient_magnitudes_are_nonnegative() {
        let plane = Plane::from_shape_fn((12, 9), |(y, x)| ((y * 7 + x * 13) % 5) as f64 * 0.2);
        let (g1, g2) = gradient_magnitudes(&plane);
        assert!(g1.iter().all(|&v| v >= 0.0));
        assert!(g2.iter().all(|&v| v >= 0.0));
    }
}
