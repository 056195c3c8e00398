use log::warn;
use ndarray::Array2;

/// One grayscale image plane, row-major, `(rows, cols)`.
pub type Plane = Array2<f64>;

/// Binary mask with the same layout as [`Plane`].
pub type Mask = Array2<bool>;

/// Bilinear resampling with pixel-center alignment. Resizing to the source
/// dimensions reproduces the input exactly.
pub fn resize_bilinear(src: &Plane, out_h: usize, out_w: usize) -> Plane {
    let (h, w) = src.dim();
    assert!(h > 0 && w > 0 && out_h > 0 && out_w > 0);
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    Array2::from_shape_fn((out_h, out_w), |(y, x)| {
        let src_y = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let src_x = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
        let y0 = src_y.floor() as usize;
        let x0 = src_x.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let x1 = (x0 + 1).min(w - 1);
        let fy = src_y - y0 as f64;
        let fx = src_x - x0 as f64;
        let top = src[(y0, x0)] * (1.0 - fx) + src[(y0, x1)] * fx;
        let bot = src[(y1, x0)] * (1.0 - fx) + src[(y1, x1)] * fx;
        top * (1.0 - fy) + bot * fy
    })
}

/// Nearest-neighbor resampling for binary masks.
pub fn resize_mask_nearest(src: &Mask, out_h: usize, out_w: usize) -> Mask {
    let (h, w) = src.dim();
    assert!(h > 0 && w > 0 && out_h > 0 && out_w > 0);
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    Array2::from_shape_fn((out_h, out_w), |(y, x)| {
        let src_y = (((y as f64 + 0.5) * sy - 0.5).round()).clamp(0.0, (h - 1) as f64) as usize;
        let src_x = (((x as f64 + 0.5) * sx - 0.5).round()).clamp(0.0, (w - 1) as f64) as usize;
        src[(src_y, src_x)]
    })
}

/// Min-max rescale to `[0, 1]` in place. A constant plane maps to all zeros
/// and emits a warning (degenerate but non-fatal).
pub fn rescale_unit(plane: &mut Plane, context: &str) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in plane.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi <= lo {
        warn!("constant-intensity plane during rescale ({context}); mapping to 0");
        plane.fill(0.0);
        return;
    }
    let span = hi - lo;
    plane.mapv_inplace(|v| (v - lo) / span);
}

/// Half-sample symmetric reflection of an out-of-range index
/// (`-1 -> 0`, `-2 -> 1`, `n -> n-1`, ...).
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    while i < 0 || i >= n {
        if i < 0 {
            i = -1 - i;
        } else {
            i = 2 * n - 1 - i;
        }
    }
    i as usize
}
