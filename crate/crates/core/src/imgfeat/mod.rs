//! Image planes, face-box cropping, and forensic feature extraction.
//!
//! Pixels are reals in [0, 255] after decode. All operations are pure;
//! batch extraction parallelizes per image with no shared state.

pub mod dct;
pub mod io;
pub mod retouch;
pub mod srm;

pub use dct::{dct2, dct_features, idct2, SpectrumImage};
pub use retouch::synth_retouch;
pub use srm::{srm_residuals, ResidualStack};

use crate::error::{Error, Result};

/// Single channel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Validation(format!(
                "plane of {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation("pixel values must be finite".into()));
        }
        Ok(ImagePlane {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        ImagePlane::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        ImagePlane::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }
}

/// Detector output: integer corner (may sit outside the image before
/// clipping) and positive extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

/// Three equally sized planes.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: ImagePlane,
    pub g: ImagePlane,
    pub b: ImagePlane,
}

impl RgbImage {
    pub fn new(r: ImagePlane, g: ImagePlane, b: ImagePlane) -> Result<Self> {
        if r.width != g.width || r.width != b.width || r.height != g.height || r.height != b.height
        {
            return Err(Error::Validation(
                "rgb planes must share their dimensions".into(),
            ));
        }
        Ok(RgbImage { r, g, b })
    }

    pub fn width(&self) -> usize {
        self.r.width
    }

    pub fn height(&self) -> usize {
        self.r.height
    }

    pub fn planes(&self) -> [&ImagePlane; 3] {
        [&self.r, &self.g, &self.b]
    }
}

/// ITU-R BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
pub fn to_grayscale(rgb: &RgbImage) -> ImagePlane {
    let pixels = rgb
        .r
        .pixels
        .iter()
        .zip(&rgb.g.pixels)
        .zip(&rgb.b.pixels)
        .map(|((&r, &g), &b)| 0.299 * r + 0.587 * g + 0.114 * b)
        .collect();
    ImagePlane {
        width: rgb.width(),
        height: rgb.height(),
        pixels,
    }
}

fn clipped_region(
    width: usize,
    height: usize,
    bbox: &BoundingBox,
    margin: u32,
) -> Result<(usize, usize, usize, usize)> {
    let margin = i64::from(margin);
    let x0 = (bbox.x - margin).max(0);
    let y0 = (bbox.y - margin).max(0);
    let x1 = (bbox.x + i64::from(bbox.w) + margin).min(width as i64);
    let y1 = (bbox.y + i64::from(bbox.h) + margin).min(height as i64);
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::Validation(format!(
            "bounding box ({}, {}, {}, {}) with margin {margin} lies outside the {width}x{height} image",
            bbox.x, bbox.y, bbox.w, bbox.h
        )));
    }
    Ok((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
}

/// Sub-image of `bbox` expanded by `margin` on every side, clipped to the
/// image bounds.
pub fn crop_plane(plane: &ImagePlane, bbox: &BoundingBox, margin: u32) -> Result<ImagePlane> {
    let (x0, y0, x1, y1) = clipped_region(plane.width, plane.height, bbox, margin)?;
    let mut pixels = Vec::with_capacity((x1 - x0) * (y1 - y0));
    for y in y0..y1 {
        pixels.extend_from_slice(&plane.pixels[y * plane.width + x0..y * plane.width + x1]);
    }
    ImagePlane::new(x1 - x0, y1 - y0, pixels)
}

pub fn crop_rgb(rgb: &RgbImage, bbox: &BoundingBox, margin: u32) -> Result<RgbImage> {
    RgbImage::new(
        crop_plane(&rgb.r, bbox, margin)?,
        crop_plane(&rgb.g, bbox, margin)?,
        crop_plane(&rgb.b, bbox, margin)?,
    )
}

/// Bilinear resize with pixel-center alignment; identity when the size is
/// unchanged.
pub fn bilinear_resize(plane: &ImagePlane, new_width: usize, new_height: usize) -> Result<ImagePlane> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::Validation("resize target must be positive".into()));
    }
    let sx = plane.width as f64 / new_width as f64;
    let sy = plane.height as f64 / new_height as f64;
    ImagePlane::from_fn(new_width, new_height, |x, y| {
        let src_x = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (plane.width - 1) as f64);
        let src_y = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (plane.height - 1) as f64);
        let x0 = src_x.floor() as usize;
        let y0 = src_y.floor() as usize;
        let x1 = (x0 + 1).min(plane.width - 1);
        let y1 = (y0 + 1).min(plane.height - 1);
        let fx = src_x - x0 as f64;
        let fy = src_y - y0 as f64;
        let top = plane.get(x0, y0) * (1.0 - fx) + plane.get(x1, y0) * fx;
        let bottom = plane.get(x0, y1) * (1.0 - fx) + plane.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

pub fn bilinear_resize_rgb(rgb: &RgbImage, new_width: usize, new_height: usize) -> Result<RgbImage> {
    RgbImage::new(
        bilinear_resize(&rgb.r, new_width, new_height)?,
        bilinear_resize(&rgb.g, new_width, new_height)?,
        bilinear_resize(&rgb.b, new_width, new_height)?,
    )
}

/// Pooled block statistics: mean, population variance, and energy (mean of
/// squares) of every `block x block`-pixel tile, row-major. Edge tiles may
/// be smaller. This is the feature vector the lightweight demo detector
/// consumes.
pub fn block_stats(plane: &ImagePlane, block: usize) -> Result<Vec<f64>> {
    if block == 0 {
        return Err(Error::Domain("block size must be positive".into()));
    }
    let blocks_x = plane.width.div_ceil(block);
    let blocks_y = plane.height.div_ceil(block);
    let mut stats = Vec::with_capacity(blocks_x * blocks_y * 3);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let x1 = ((bx + 1) * block).min(plane.width);
            let y1 = ((by + 1) * block).min(plane.height);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut count = 0.0;
            for y in by * block..y1 {
                for x in bx * block..x1 {
                    let v = plane.get(x, y);
                    sum += v;
                    sum_sq += v * v;
                    count += 1.0;
                }
            }
            let mean = sum / count;
            let energy = sum_sq / count;
            stats.push(mean);
            stats.push(energy - mean * mean);
            stats.push(energy);
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_reference_values() {
        let white = RgbImage::new(
            ImagePlane::filled(2, 2, 255.0).unwrap(),
            ImagePlane::filled(2, 2, 255.0).unwrap(),
            ImagePlane::filled(2, 2, 255.0).unwrap(),
        )
        .unwrap();
        assert!((to_grayscale(&white).get(0, 0) - 255.0).abs() < 1e-9);

        let red = RgbImage::new(
            ImagePlane::filled(2, 2, 255.0).unwrap(),
            ImagePlane::filled(2, 2, 0.0).unwrap(),
            ImagePlane::filled(2, 2, 0.0).unwrap(),
        )
        .unwrap();
        assert!((to_grayscale(&red).get(0, 0) - 76.245).abs() < 1e-9);

        let gray = RgbImage::new(
            ImagePlane::filled(2, 2, 137.0).unwrap(),
            ImagePlane::filled(2, 2, 137.0).unwrap(),
            ImagePlane::filled(2, 2, 137.0).unwrap(),
        )
        .unwrap();
        assert!((to_grayscale(&gray).get(1, 1) - 137.0).abs() < 1e-9);
    }

    #[test]
    fn rgb_rejects_mismatched_planes() {
        let a = ImagePlane::filled(2, 2, 0.0).unwrap();
        let b = ImagePlane::filled(3, 2, 0.0).unwrap();
        assert!(RgbImage::new(a.clone(), b, a).is_err());
    }

    #[test]
    fn crop_without_margin() {
        let plane = ImagePlane::from_fn(512, 512, |x, y| (x + y) as f64).unwrap();
        let bbox = BoundingBox { x: 100, y: 100, w: 200, h: 200 };
        let crop = crop_plane(&plane, &bbox, 0).unwrap();
        assert_eq!((crop.width(), crop.height()), (200, 200));
        assert_eq!(crop.get(0, 0), plane.get(100, 100));
        assert_eq!(crop.get(199, 199), plane.get(299, 299));
    }

    #[test]
    fn crop_with_hundred_pixel_margin() {
        let plane = ImagePlane::filled(512, 512, 1.0).unwrap();
        let bbox = BoundingBox { x: 100, y: 100, w: 200, h: 200 };
        let crop = crop_plane(&plane, &bbox, 100).unwrap();
        assert_eq!((crop.width(), crop.height()), (400, 400));
    }

    #[test]
    fn crop_clips_at_borders() {
        let plane = ImagePlane::filled(512, 512, 1.0).unwrap();
        let bbox = BoundingBox { x: 0, y: 0, w: 200, h: 200 };
        let crop = crop_plane(&plane, &bbox, 100).unwrap();
        assert_eq!((crop.width(), crop.height()), (300, 300));
    }

    #[test]
    fn crop_fully_outside_is_an_error() {
        let plane = ImagePlane::filled(64, 64, 1.0).unwrap();
        let bbox = BoundingBox { x: 100, y: 100, w: 10, h: 10 };
        assert!(crop_plane(&plane, &bbox, 0).is_err());
    }

    #[test]
    fn crop_composition_consistency() {
        let plane = ImagePlane::from_fn(64, 64, |x, y| (x * 64 + y) as f64).unwrap();
        let bbox = BoundingBox { x: 20, y: 22, w: 10, h: 12 };
        // margin-expanded crop equals cropping the pre-expanded box
        let expanded = BoundingBox { x: 15, y: 17, w: 20, h: 22 };
        assert_eq!(
            crop_plane(&plane, &bbox, 5).unwrap(),
            crop_plane(&plane, &expanded, 0).unwrap()
        );
    }

    #[test]
    fn resize_identity_and_average() {
        let plane = ImagePlane::from_fn(8, 8, |x, y| (x * 8 + y) as f64).unwrap();
        assert_eq!(bilinear_resize(&plane, 8, 8).unwrap(), plane);

        let checker = ImagePlane::from_fn(4, 4, |x, y| ((x + y) % 2) as f64 * 100.0).unwrap();
        let half = bilinear_resize(&checker, 2, 2).unwrap();
        for &p in half.pixels() {
            assert!((p - 50.0).abs() < 1e-9);
        }
    }

    #[test]
    fn block_stats_constant_plane() {
        let plane = ImagePlane::filled(16, 16, 3.0).unwrap();
        let stats = block_stats(&plane, 8).unwrap();
        assert_eq!(stats.len(), 4 * 3);
        for chunk in stats.chunks(3) {
            assert!((chunk[0] - 3.0).abs() < 1e-12); // mean
            assert!(chunk[1].abs() < 1e-12); // variance
            assert!((chunk[2] - 9.0).abs() < 1e-12); // energy
        }
    }
}
