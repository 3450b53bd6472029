//! File formats: raw little-endian arrays with JSON sidecars, and 8-bit
//! grayscale images.
//!
//! A complex image `x.c128` stores `(re, im)` f64 pairs row-major, described by
//! `x.json` = `{"height", "width", "dtype": "c128"}`. Measured intensities
//! `x.f64` are described by `x.json` = `{"m", "kind", "level", "seed"}`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::noise::{NoiseModel, PhaselessData};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageHeader {
    pub height: usize,
    pub width: usize,
    pub dtype: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataHeader {
    pub m: usize,
    pub kind: String,
    pub level: f64,
    pub seed: u64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_c128(path: &Path, img: &ComplexImage) -> Result<()> {
    let mut bytes = Vec::with_capacity(img.len() * 16);
    for c in img.data() {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    write_bytes(path, &bytes)?;
    write_json(
        &sidecar_path(path),
        &ImageHeader {
            height: img.height(),
            width: img.width(),
            dtype: "c128".into(),
        },
    )
}

pub fn read_c128(path: &Path) -> Result<ComplexImage> {
    let header: ImageHeader = read_json(&sidecar_path(path))?;
    if header.dtype != "c128" {
        return Err(Error::format(
            path,
            format!("unsupported dtype {}", header.dtype),
        ));
    }
    let bytes = read_bytes(path)?;
    let n = header.height * header.width;
    if bytes.len() != n * 16 {
        return Err(Error::format(
            path,
            format!("expected {} bytes, found {}", n * 16, bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|b| {
            Complex64::new(
                f64::from_le_bytes(b[..8].try_into().unwrap()),
                f64::from_le_bytes(b[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexImage::from_vec(header.height, header.width, data)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_data(path: &Path, data: &PhaselessData) -> Result<()> {
    let bytes: Vec<u8> = data.f.iter().flat_map(|x| x.to_le_bytes()).collect();
    write_bytes(path, &bytes)?;
    write_json(
        &sidecar_path(path),
        &DataHeader {
            m: data.len(),
            kind: data.model.kind_name().into(),
            level: data.model.level(),
            seed: data.seed,
        },
    )
}

pub fn read_data(path: &Path) -> Result<PhaselessData> {
    let header: DataHeader = read_json(&sidecar_path(path))?;
    let bytes = read_bytes(path)?;
    if bytes.len() != header.m * 8 {
        return Err(Error::format(
            path,
            format!("expected {} bytes, found {}", header.m * 8, bytes.len()),
        ));
    }
    let f = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let model = match header.kind.as_str() {
        "poisson" => NoiseModel::Poisson { peak: header.level },
        "gaussian" => NoiseModel::Gaussian {
            snr_db: header.level,
        },
        other => return Err(Error::format(path, format!("unknown noise kind {other}"))),
    };
    Ok(PhaselessData {
        f,
        model,
        seed: header.seed,
    })
}

/// Reads an 8-bit grayscale (or color, converted to luma) PNG/PGM as a real
/// image with values in `[0, 1]`.
pub fn read_grayscale(path: &Path) -> Result<ComplexImage> {
    let img = image::open(path).map_err(|e| Error::format(path, e.to_string()))?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    let vals: Vec<f64> = luma.pixels().map(|p| p.0[0] as f64 / 255.0).collect();
    ComplexImage::from_real(h as usize, w as usize, &vals)
}

/// Writes `|img|` as an 8-bit PNG, scaled so the maximum maps to 255.
pub fn write_magnitude_png(path: &Path, img: &ComplexImage) -> Result<()> {
    let mag = img.magnitude();
    let max = mag.max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let pixels: Vec<u8> = mag
        .data()
        .iter()
        .map(|&x| (x * scale).round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, pixels)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::corrupt_poisson;

    #[test]
    fn complex_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.c128");
        let img = ComplexImage::random(5, 3, 1);
        write_c128(&p, &img).unwrap();
        assert_eq!(read_c128(&p).unwrap(), img);
        let header: ImageHeader = read_json(&dir.path().join("x.json")).unwrap();
        assert_eq!(header.dtype, "c128");
        assert_eq!(fs::metadata(&p).unwrap().len(), 5 * 3 * 16);
    }

    #[test]
    fn data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.f64");
        let data = corrupt_poisson(&[1.0, 2.5, 0.0, 7.0], 0.5, 3).unwrap();
        write_data(&p, &data).unwrap();
        assert_eq!(read_data(&p).unwrap(), data);
    }

    #[test]
    fn truncated_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.c128");
        write_c128(&p, &ComplexImage::random(2, 2, 1)).unwrap();
        fs::write(&p, [0u8; 10]).unwrap();
        assert!(matches!(read_c128(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn png_round_trip_scales_to_unit_range() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        let img = ComplexImage::from_fn(4, 6, |i, j| Complex64::new(0.0, (i * 6 + j) as f64));
        write_magnitude_png(&p, &img).unwrap();
        let back = read_grayscale(&p).unwrap();
        assert_eq!(back.shape(), (4, 6));
        assert_eq!(back.get(3, 5).re, 1.0);
        assert_eq!(back.get(0, 0).re, 0.0);
        assert!(back.is_real());
    }
}
