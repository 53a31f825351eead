//! Image and tensor file I/O: PNG/PPM decode, binary PPM encode, the flat
//! binary feature-tensor format, and the bounding-box sidecar CSV.
//!
//! Tensor layout: three little-endian u32 (width, height, planes) followed
//! by `width * height * planes` little-endian f32 values, plane-major with
//! row-major planes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imgfeat::{BoundingBox, ImagePlane, RgbImage};

/// Decodes a PNG or binary PPM into real-valued planes.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let decoded = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Validation(format!("cannot decode {}: {other}", path.display())),
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut r = Vec::with_capacity(w * h);
    let mut g = Vec::with_capacity(w * h);
    let mut b = Vec::with_capacity(w * h);
    for pixel in rgb.pixels() {
        r.push(f64::from(pixel[0]));
        g.push(f64::from(pixel[1]));
        b.push(f64::from(pixel[2]));
    }
    RgbImage::new(
        ImagePlane::new(w, h, r)?,
        ImagePlane::new(w, h, g)?,
        ImagePlane::new(w, h, b)?,
    )
}

/// Writes a binary PPM (P6), rounding and clamping pixels to 8 bits.
pub fn save_ppm(rgb: &RgbImage, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    let (w, h) = (rgb.width(), rgb.height());
    write!(writer, "P6\n{w} {h}\n255\n").map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        for plane in rgb.planes() {
            bytes.push(plane.pixels()[i].round().clamp(0.0, 255.0) as u8);
        }
    }
    writer.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes the flat binary tensor for one image's feature planes.
pub fn write_tensor(path: &Path, planes: &[&ImagePlane]) -> Result<()> {
    if planes.is_empty() {
        return Err(Error::Validation("tensor needs at least one plane".into()));
    }
    let (w, h) = (planes[0].width(), planes[0].height());
    if planes.iter().any(|p| p.width() != w || p.height() != h) {
        return Err(Error::Validation(
            "tensor planes must share their dimensions".into(),
        ));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    for value in [w as u32, h as u32, planes.len() as u32] {
        writer
            .write_all(&value.to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    for plane in planes {
        for &pixel in plane.pixels() {
            writer
                .write_all(&(pixel as f32).to_le_bytes())
                .map_err(|e| Error::io(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads a tensor back as f64 planes (values pass through f32).
pub fn read_tensor(path: &Path) -> Result<Vec<ImagePlane>> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; 12];
    file.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
    let w = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let planes = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;

    let mut data = Vec::new();
    file.read_to_end(&mut data).map_err(|e| Error::io(path, e))?;
    if data.len() != w * h * planes * 4 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "tensor body holds {} bytes, header implies {}",
                data.len(),
                w * h * planes * 4
            ),
        });
    }
    let mut out = Vec::with_capacity(planes);
    for p in 0..planes {
        let pixels = (0..w * h)
            .map(|i| {
                let offset = (p * w * h + i) * 4;
                f64::from(f32::from_le_bytes(
                    data[offset..offset + 4].try_into().unwrap(),
                ))
            })
            .collect();
        out.push(ImagePlane::new(w, h, pixels)?);
    }
    Ok(out)
}

/// Loads the bounding-box sidecar CSV (`sample_id,x,y,w,h`).
pub fn load_boxes(path: &Path) -> Result<BTreeMap<String, BoundingBox>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            kind => Error::Validation(format!("cannot read boxes: {kind:?}")),
        })?;
    let headers: Vec<&str> = reader
        .headers()
        .map_err(|e| Error::Validation(format!("cannot read boxes header: {e}")))?
        .iter()
        .collect();
    if headers != ["sample_id", "x", "y", "w", "h"] {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header 'sample_id,x,y,w,h', found '{}'", headers.join(",")),
        });
    }

    let mut boxes = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Validation(format!("boxes parse failed: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if row.len() != 5 {
            return Err(parse_err(format!("expected 5 fields, found {}", row.len())));
        }
        let x: i64 = row[1].trim().parse().map_err(|_| parse_err("bad x".into()))?;
        let y: i64 = row[2].trim().parse().map_err(|_| parse_err("bad y".into()))?;
        let w: u32 = row[3].trim().parse().map_err(|_| parse_err("bad w".into()))?;
        let h: u32 = row[4].trim().parse().map_err(|_| parse_err("bad h".into()))?;
        if w == 0 || h == 0 {
            return Err(parse_err("box extent must be positive".into()));
        }
        if boxes
            .insert(row[0].to_string(), BoundingBox { x, y, w, h })
            .is_some()
        {
            return Err(parse_err(format!("duplicate box for sample '{}'", &row[0])));
        }
    }
    Ok(boxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ppm_round_trip() {
        let mut rng = crate::seeds::substream(67, "ppm", 0);
        let plane = |rng: &mut rand_chacha::ChaCha8Rng| {
            ImagePlane::from_fn(9, 7, |_, _| f64::from(rng.gen_range(0u32..=255))).unwrap()
        };
        let image = RgbImage::new(plane(&mut rng), plane(&mut rng), plane(&mut rng)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.ppm");
        save_ppm(&image, &path).unwrap();
        let loaded = load_rgb(&path).unwrap();
        assert_eq!(image, loaded);
    }

    #[test]
    fn tensor_round_trip() {
        let a = ImagePlane::from_fn(5, 4, |x, y| (x * 4 + y) as f64).unwrap();
        let b = ImagePlane::from_fn(5, 4, |x, y| (x as f64 - y as f64) * 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.bin");
        write_tensor(&path, &[&a, &b]).unwrap();
        let planes = read_tensor(&path).unwrap();
        assert_eq!(planes.len(), 2);
        assert_eq!(planes[0], a);
        assert_eq!(planes[1], b);
    }

    #[test]
    fn boxes_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("boxes.csv");
        std::fs::write(&path, "sample_id,x,y,w,h\ns1,10,-5,64,64\ns2,0,0,32,48\n").unwrap();
        let boxes = load_boxes(&path).unwrap();
        assert_eq!(boxes["s1"], BoundingBox { x: 10, y: -5, w: 64, h: 64 });
        assert_eq!(boxes.len(), 2);

        std::fs::write(&path, "sample_id,x,y,w,h\ns1,1,1,0,5\n").unwrap();
        assert!(load_boxes(&path).is_err());
    }

    #[test]
    fn missing_image_is_io() {
        assert!(load_rgb(Path::new("/nonexistent/x.png")).unwrap_err().is_io());
    }
}
