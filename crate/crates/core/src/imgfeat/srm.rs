//! SRM noise residuals: the fixed three-kernel high-pass subset standard in
//! image-forensics pipelines, applied to the luma plane with reflect
//! padding and truncation.
//!
//! Kernels are stored as integer taps with a separate divisor. Because
//! every kernel sums to zero, the correlation accumulates taps against the
//! neighbor-minus-center differences; a constant image therefore yields
//! exactly zero residuals.

use crate::error::{Error, Result};
use crate::imgfeat::{to_grayscale, ImagePlane, RgbImage};
use crate::par;

/// Default residual truncation threshold.
pub const DEFAULT_CLAMP: f64 = 2.0;

const KERNEL_SIZE: usize = 5;

/// (taps, divisor) per kernel: first-order [1,-2,1]/2, 3x3 "square"/4,
/// 5x5 "square"/12.
pub const SRM_KERNELS: [([[i32; KERNEL_SIZE]; KERNEL_SIZE], f64); 3] = [
    (
        [
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
            [0, 1, -2, 1, 0],
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
        ],
        2.0,
    ),
    (
        [
            [0, 0, 0, 0, 0],
            [0, -1, 2, -1, 0],
            [0, 2, -4, 2, 0],
            [0, -1, 2, -1, 0],
            [0, 0, 0, 0, 0],
        ],
        4.0,
    ),
    (
        [
            [-1, 2, -2, 2, -1],
            [2, -6, 8, -6, 2],
            [-2, 8, -12, 8, -2],
            [2, -6, 8, -6, 2],
            [-1, 2, -2, 2, -1],
        ],
        12.0,
    ),
];

/// One residual plane per SRM kernel, every value in
/// `[-clamp_threshold, clamp_threshold]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStack {
    pub planes: [ImagePlane; 3],
    pub clamp_threshold: f64,
}

/// Mirror index without repeating the edge sample (-1 -> 1, n -> n-2).
#[inline]
fn reflect(index: i64, len: usize) -> usize {
    let len = len as i64;
    let mut i = index;
    if i < 0 {
        i = -i;
    }
    if i >= len {
        i = 2 * len - 2 - i;
    }
    i as usize
}

fn correlate_reflect(plane: &ImagePlane, taps: &[[i32; KERNEL_SIZE]; KERNEL_SIZE], divisor: f64) -> ImagePlane {
    let (w, h) = (plane.width(), plane.height());
    let half = (KERNEL_SIZE / 2) as i64;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            // taps sum to zero, so summing tap * (value - center) equals the
            // plain correlation but is exactly zero on constant input
            let center = plane.get(x, y);
            let mut acc = 0.0;
            for (ky, row) in taps.iter().enumerate() {
                let sy = reflect(y as i64 + ky as i64 - half, h);
                for (kx, &tap) in row.iter().enumerate() {
                    if tap == 0 {
                        continue;
                    }
                    let sx = reflect(x as i64 + kx as i64 - half, w);
                    acc += f64::from(tap) * (plane.get(sx, sy) - center);
                }
            }
            out[y * w + x] = acc / divisor;
        }
    }
    ImagePlane::new(w, h, out).expect("correlation preserves dimensions")
}

/// Residuals of the luma plane under the three SRM kernels, clamped to
/// `[-clamp_threshold, clamp_threshold]`.
pub fn srm_residuals(rgb: &RgbImage, clamp_threshold: f64) -> Result<ResidualStack> {
    if rgb.width() < KERNEL_SIZE || rgb.height() < KERNEL_SIZE {
        return Err(Error::Validation(format!(
            "image {}x{} is smaller than the {KERNEL_SIZE}x{KERNEL_SIZE} SRM kernels",
            rgb.width(),
            rgb.height()
        )));
    }
    if !(clamp_threshold > 0.0) {
        return Err(Error::Domain("clamp threshold must be positive".into()));
    }
    debug_assert!(SRM_KERNELS
        .iter()
        .all(|(taps, _)| taps.iter().flatten().sum::<i32>() == 0));

    let luma = to_grayscale(rgb);
    let planes = SRM_KERNELS.map(|(taps, divisor)| {
        let residual = correlate_reflect(&luma, &taps, divisor);
        let clamped = residual
            .pixels()
            .iter()
            .map(|r| r.clamp(-clamp_threshold, clamp_threshold))
            .collect();
        ImagePlane::new(residual.width(), residual.height(), clamped)
            .expect("clamping preserves dimensions")
    });
    Ok(ResidualStack {
        planes,
        clamp_threshold,
    })
}

/// Batch residual extraction, parallel per image.
pub fn srm_residuals_batch(images: &[RgbImage], clamp_threshold: f64) -> Result<Vec<ResidualStack>> {
    par::map_collect(images, |rgb| srm_residuals(rgb, clamp_threshold))
        .into_iter()
        .collect()
}

/// Sequential twin of [`srm_residuals_batch`] for benchmark comparison.
pub fn srm_residuals_batch_seq(
    images: &[RgbImage],
    clamp_threshold: f64,
) -> Result<Vec<ResidualStack>> {
    par::map_collect_seq(images, |rgb| srm_residuals(rgb, clamp_threshold))
        .into_iter()
        .collect()
}
