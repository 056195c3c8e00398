use crate::error::{Error, Result};
use crate::raster::{reflect, Plane};

/// Sampled 1-D Gaussian kernel and its first and second derivatives,
/// truncated at `ceil(3*sigma)`.
///
/// The 0th-order kernel is normalized to unit sum. The second-derivative
/// kernel is shifted to zero sum so that a constant image produces an exactly
/// zero response; the first-derivative kernel sums to zero by symmetry.
pub struct GaussianKernels {
    pub g: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub half_width: usize,
}

pub fn gaussian_kernels(sigma_sq: f64) -> Result<GaussianKernels> {
    if !sigma_sq.is_finite() || sigma_sq <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_sq must be positive, got {sigma_sq}"
        )));
    }
    let sigma = sigma_sq.sqrt();
    let half = (3.0 * sigma).ceil() as usize;
    let len = 2 * half + 1;
    let mut g = vec![0.0; len];
    for (i, gv) in g.iter_mut().enumerate() {
        let x = i as f64 - half as f64;
        *gv = (-x * x / (2.0 * sigma_sq)).exp();
    }
    let norm: f64 = g.iter().sum();
    for gv in g.iter_mut() {
        *gv /= norm;
    }
    let mut g1 = vec![0.0; len];
    let mut g2 = vec![0.0; len];
    for i in 0..len {
        let x = i as f64 - half as f64;
        g1[i] = -x / sigma_sq * g[i];
        g2[i] = (x * x / (sigma_sq * sigma_sq) - 1.0 / sigma_sq) * g[i];
    }
    let g2_mean: f64 = g2.iter().sum::<f64>() / len as f64;
    for v in g2.iter_mut() {
        *v -= g2_mean;
    }
    Ok(GaussianKernels {
        g,
        g1,
        g2,
        half_width: half,
    })
}

/// Separable convolution (horizontal kernel `kx`, vertical kernel `ky`) with
/// half-sample symmetric border reflection. True convolution: the kernel is
/// flipped relative to correlation, so odd kernels respond with the sign of
/// the underlying derivative.
pub fn convolve_separable(plane: &Plane, kx: &[f64], ky: &[f64]) -> Plane {
    let horizontal = convolve_rows(plane, kx);
    convolve_cols(&horizontal, ky)
}

fn convolve_rows(plane: &Plane, kernel: &[f64]) -> Plane {
    let (h, w) = plane.dim();
    let half = (kernel.len() / 2) as isize;
    let mut out = Plane::zeros((h, w));
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, &kv) in kernel.iter().enumerate() {
                let t = ki as isize - half;
                acc += kv * plane[(y, reflect(x as isize - t, w))];
            }
            out[(y, x)] = acc;
        }
    }
    out
}

fn convolve_cols(plane: &Plane, kernel: &[f64]) -> Plane {
    let (h, w) = plane.dim();
    let half = (kernel.len() / 2) as isize;
    let mut out = Plane::zeros((h, w));
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, &kv) in kernel.iter().enumerate() {
                let t = ki as isize - half;
                acc += kv * plane[(reflect(y as isize - t, h), x)];
            }
            out[(y, x)] = acc;
        }
    }
    out
}

/// The six Gaussian coefficient images `[G, Gx, Gy, Gxy, Gxx, Gyy]` of a
/// plane, with x horizontal (columns) and y vertical (rows).
pub fn gaussian_derivatives(plane: &Plane, sigma_sq: f64) -> Result<[Plane; 6]> {
    let k = gaussian_kernels(sigma_sq)?;
    Ok([
        convolve_separable(plane, &k.g, &k.g),
        convolve_separable(plane, &k.g1, &k.g),
        convolve_separable(plane, &k.g, &k.g1),
        convolve_separable(plane, &k.g1, &k.g1),
        convolve_separable(plane, &k.g2, &k.g),
        convolve_separable(plane, &k.g, &k.g2),
    ])
}
