//! Synthetic retouch generator: deterministic edge-preserving smoothing
//! standing in for commercial beauty filters in desk-scale tests.

use crate::error::{Error, Result};
use crate::imgfeat::{ImagePlane, RgbImage};
use crate::par;

/// Bilateral-style smoothing over the whole image. Spatial sigma is
/// `3 * strength * 2`, range sigma `30 * strength`; output depends only on
/// `(rgb, strength)`.
pub fn synth_retouch(rgb: &RgbImage, strength: f64) -> Result<RgbImage> {
    if !(strength > 0.0 && strength <= 1.0) {
        return Err(Error::Domain(format!(
            "retouch strength must lie in (0, 1], got {strength}"
        )));
    }
    let sigma_spatial = 3.0 * strength * 2.0;
    let sigma_range = 30.0 * strength;
    let radius = (1.5 * sigma_spatial).ceil().max(1.0) as i64;

    let size = (2 * radius + 1) as usize;
    let mut spatial = vec![0.0; size * size];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let d2 = (dx * dx + dy * dy) as f64;
            spatial[(dy + radius) as usize * size + (dx + radius) as usize] =
                (-d2 / (2.0 * sigma_spatial * sigma_spatial)).exp();
        }
    }

    let filter_plane = |plane: &ImagePlane| -> ImagePlane {
        let (w, h) = (plane.width(), plane.height());
        let rows: Vec<usize> = (0..h).collect();
        let out_rows = par::map_collect(&rows, |&y| {
            let mut row = Vec::with_capacity(w);
            for x in 0..w {
                let center = plane.get(x, y);
                let mut weighted = 0.0;
                let mut total = 0.0;
                let y0 = (y as i64 - radius).max(0);
                let y1 = (y as i64 + radius).min(h as i64 - 1);
                let x0 = (x as i64 - radius).max(0);
                let x1 = (x as i64 + radius).min(w as i64 - 1);
                for sy in y0..=y1 {
                    for sx in x0..=x1 {
                        let value = plane.get(sx as usize, sy as usize);
                        let diff = value - center;
                        let w_range =
                            (-(diff * diff) / (2.0 * sigma_range * sigma_range)).exp();
                        let w_spatial = spatial[(sy - y as i64 + radius) as usize * size
                            + (sx - x as i64 + radius) as usize];
                        let weight = w_spatial * w_range;
                        weighted += weight * value;
                        total += weight;
                    }
                }
                row.push(weighted / total);
            }
            row
        });
        let pixels: Vec<f64> = out_rows.into_iter().flatten().collect();
        ImagePlane::new(w, h, pixels).expect("filtering preserves dimensions")
    };

    RgbImage::new(
        filter_plane(&rgb.r),
        filter_plane(&rgb.g),
        filter_plane(&rgb.b),
    )
}
