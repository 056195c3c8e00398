//! 8-connected component labeling on boolean masks.

use ndarray::Array2;

use crate::raster::Mask;

/// Pixel coordinate as (row, col).
pub type Pixel = (usize, usize);

/// Extracts 8-connected components in scan order of their first pixel.
/// Pixels within a component are sorted by (row, col).
pub fn connected_components(mask: &Mask) -> Vec<Vec<Pixel>> {
    let (h, w) = mask.dim();
    let mut visited = Array2::<bool>::from_elem((h, w), false);
    let mut components = Vec::new();
    let mut queue: Vec<Pixel> = Vec::new();

    for r in 0..h {
        for c in 0..w {
            if !mask[(r, c)] || visited[(r, c)] {
                continue;
            }
            let mut pixels = Vec::new();
            visited[(r, c)] = true;
            queue.push((r, c));
            while let Some((pr, pc)) = queue.pop() {
                pixels.push((pr, pc));
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let nr = pr as i64 + dr;
                        let nc = pc as i64 + dc;
                        if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                            continue;
                        }
                        let np = (nr as usize, nc as usize);
                        if mask[np] && !visited[np] {
                            visited[np] = true;
                            queue.push(np);
                        }
                    }
                }
            }
            pixels.sort_unstable();
            components.push(pixels);
        }
    }
    components
}
