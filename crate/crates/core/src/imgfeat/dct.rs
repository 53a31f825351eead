//! Orthonormal 2-D DCT-II, its inverse, and the high-frequency feature map.

use crate::error::{Error, Result};
use crate::imgfeat::{bilinear_resize, ImagePlane};

/// DCT-II coefficient plane, row-major; dimensions match the source plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumImage {
    width: usize,
    height: usize,
    coefficients: Vec<f64>,
}

impl SpectrumImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        debug_assert!(u < self.width && v < self.height);
        self.coefficients[v * self.width + u]
    }
}

/// Orthonormal DCT-II basis of size `n`, row-major:
/// `basis[k][j] = alpha(k) * cos(pi * (2j + 1) * k / (2n))`.
fn basis(n: usize) -> Vec<f64> {
    let mut matrix = vec![0.0; n * n];
    let norm0 = (1.0 / n as f64).sqrt();
    let norm = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let alpha = if k == 0 { norm0 } else { norm };
        for j in 0..n {
            matrix[k * n + j] =
                alpha * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    matrix
}

/// Separable orthonormal 2-D DCT-II: rows first, then columns.
pub fn dct2(plane: &ImagePlane) -> SpectrumImage {
    let (w, h) = (plane.width(), plane.height());
    let basis_w = basis(w);
    let basis_h = basis(h);

    // rows: tmp[r][u] = sum_j x[r][j] * basis_w[u][j]
    let mut tmp = vec![0.0; w * h];
    let pixels = plane.pixels();
    for r in 0..h {
        let row = &pixels[r * w..(r + 1) * w];
        for u in 0..w {
            let b = &basis_w[u * w..(u + 1) * w];
            tmp[r * w + u] = row.iter().zip(b).map(|(x, c)| x * c).sum();
        }
    }

    // columns: out[v][u] = sum_r tmp[r][u] * basis_h[v][r]
    let mut coefficients = vec![0.0; w * h];
    for v in 0..h {
        let b = &basis_h[v * h..(v + 1) * h];
        for u in 0..w {
            let mut acc = 0.0;
            for r in 0..h {
                acc += tmp[r * w + u] * b[r];
            }
            coefficients[v * w + u] = acc;
        }
    }

    SpectrumImage {
        width: w,
        height: h,
        coefficients,
    }
}

/// Exact inverse of [`dct2`] (the basis is orthonormal, so the inverse is
/// the transposed application).
pub fn idct2(spectrum: &SpectrumImage) -> ImagePlane {
    let (w, h) = (spectrum.width, spectrum.height);
    let basis_w = basis(w);
    let basis_h = basis(h);

    // columns: tmp[r][u] = sum_v y[v][u] * basis_h[v][r]
    let mut tmp = vec![0.0; w * h];
    for r in 0..h {
        for u in 0..w {
            let mut acc = 0.0;
            for v in 0..h {
                acc += spectrum.coefficients[v * w + u] * basis_h[v * h + r];
            }
            tmp[r * w + u] = acc;
        }
    }

    // rows: x[r][j] = sum_u tmp[r][u] * basis_w[u][j]
    let mut pixels = vec![0.0; w * h];
    for r in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for u in 0..w {
                acc += tmp[r * w + u] * basis_w[u * w + j];
            }
            pixels[r * w + j] = acc;
        }
    }

    ImagePlane::new(w, h, pixels).expect("inverse transform preserves dimensions")
}

/// High-frequency DCT feature map: bilinear-resize to
/// `out_size x out_size`, transform, zero the top-left
/// `low_freq_cut x low_freq_cut` block (the coarse face structure), and
/// compress the rest with the signed log `sign(c) * ln(1 + |c|)`.
pub fn dct_features(plane: &ImagePlane, low_freq_cut: usize, out_size: usize) -> Result<ImagePlane> {
    if out_size == 0 {
        return Err(Error::Validation("dct feature size must be positive".into()));
    }
    if low_freq_cut >= out_size {
        return Err(Error::Validation(format!(
            "low_freq_cut {low_freq_cut} must be smaller than out_size {out_size}"
        )));
    }
    let resized = bilinear_resize(plane, out_size, out_size)?;
    let spectrum = dct2(&resized);
    let mut features = vec![0.0; out_size * out_size];
    for v in 0..out_size {
        for u in 0..out_size {
            if v < low_freq_cut && u < low_freq_cut {
                continue;
            }
            let c = spectrum.get(u, v);
            features[v * out_size + u] = c.signum() * c.abs().ln_1p();
        }
    }
    ImagePlane::new(out_size, out_size, features)
}
