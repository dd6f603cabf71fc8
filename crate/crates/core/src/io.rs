//! PNG raster I/O and sidecar metadata.
//!
//! Images are single-channel 8- or 16-bit PNGs, mapped linearly to `[0, 1]`.
//! Masks are 8-bit PNGs holding only 0 and 255. Pixel spacing lives in an
//! optional sidecar `<stem>.meta.json` next to the raster:
//! `{"spacing_um": [x, y], "z_spacing_um": z}`.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageReader, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, Spacing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub spacing_um: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_spacing_um: Option<f64>,
}

pub fn sidecar_path(raster: &Path) -> PathBuf {
    let stem = raster
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    raster.with_file_name(format!("{stem}.meta.json"))
}

/// Reads the sidecar for `raster` if one exists.
pub fn read_sidecar(raster: &Path) -> Result<Option<Sidecar>> {
    let path = sidecar_path(raster);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Metadata {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Spacing::new(meta.spacing_um[0], meta.spacing_um[1]).map_err(|e| Error::Metadata {
        path,
        message: e.to_string(),
    })?;
    Ok(Some(meta))
}

fn write_sidecar(raster: &Path, spacing: Spacing) -> Result<()> {
    let path = sidecar_path(raster);
    let meta = Sidecar {
        spacing_um: [spacing.x, spacing.y],
        z_spacing_um: None,
    };
    fs::write(&path, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&path, e))
}

fn spacing_for(path: &Path, default: Spacing) -> Result<Spacing> {
    Ok(read_sidecar(path)?
        .map(|m| Spacing {
            x: m.spacing_um[0],
            y: m.spacing_um[1],
        })
        .unwrap_or(default))
}

enum Samples {
    U8(Vec<u8>),
    U16(Vec<u16>),
}

fn decode_single_channel(path: &Path) -> Result<(usize, usize, Samples)> {
    let reader = ImageReader::open(path).map_err(|e| Error::Unreadable {
        path: path.to_path_buf(),
        source: e,
    })?;
    let reader = reader.with_guessed_format().map_err(|e| Error::Unreadable {
        path: path.to_path_buf(),
        source: e,
    })?;
    let img = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(source) => Error::Unreadable {
            path: path.to_path_buf(),
            source,
        },
        image::ImageError::Parameter(p)
            if p.kind() == image::error::ParameterErrorKind::DimensionMismatch =>
        {
            Error::ZeroSized {
                path: path.to_path_buf(),
            }
        }
        other => {
            let message = other.to_string();
            if message.contains("zero") || message.contains("Zero") {
                Error::ZeroSized {
                    path: path.to_path_buf(),
                }
            } else {
                Error::Decode {
                    path: path.to_path_buf(),
                    message,
                }
            }
        }
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::ZeroSized {
            path: path.to_path_buf(),
        });
    }
    match img {
        DynamicImage::ImageLuma8(buf) => Ok((w, h, Samples::U8(buf.into_raw()))),
        DynamicImage::ImageLuma16(buf) => Ok((w, h, Samples::U16(buf.into_raw()))),
        other => Err(Error::MultiChannel {
            path: path.to_path_buf(),
            channels: other.color().channel_count(),
        }),
    }
}

/// Loads an image, taking spacing from its sidecar or [`Spacing::default`].
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    load_image_with_spacing(path, Spacing::default())
}

pub fn load_image_with_spacing(path: impl AsRef<Path>, default: Spacing) -> Result<GrayImage> {
    let path = path.as_ref();
    let (w, h, samples) = decode_single_channel(path)?;
    let data = match samples {
        Samples::U8(v) => v.into_iter().map(|p| f64::from(p) / 255.0).collect(),
        Samples::U16(v) => v.into_iter().map(|p| f64::from(p) / 65535.0).collect(),
    };
    GrayImage::new(w, h, data, spacing_for(path, default)?)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    load_mask_with_spacing(path, Spacing::default())
}

pub fn load_mask_with_spacing(path: impl AsRef<Path>, default: Spacing) -> Result<BinaryMask> {
    let path = path.as_ref();
    let (w, h, samples) = decode_single_channel(path)?;
    let bits = match samples {
        Samples::U8(v) => v
            .into_iter()
            .map(|p| match p {
                0 => Ok(false),
                255 => Ok(true),
                other => Err(Error::InvalidMaskValue {
                    path: path.to_path_buf(),
                    value: u16::from(other),
                }),
            })
            .collect::<Result<Vec<_>>>()?,
        Samples::U16(_) => {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                message: "masks must be 8-bit".into(),
            })
        }
    };
    BinaryMask::new(w, h, bits, spacing_for(path, default)?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn save_png<P: image::Pixel<Subpixel = S> + image::PixelWithColorType, S: image::Primitive>(
    buf: ImageBuffer<P, Vec<S>>,
    path: &Path,
) -> Result<()>
where
    [S]: image::EncodableLayout,
{
    ensure_parent(path)?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => Error::io(path, source),
            other => Error::io(path, std::io::Error::other(other.to_string())),
        })
}

/// Writes `mask` as an 8-bit PNG of 0/255. A sidecar is written only when the
/// spacing differs from the default, so plain masks stay single files.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, raw)
            .expect("buffer length matches dimensions");
    save_png(buf, path)?;
    if mask.spacing() != Spacing::default() {
        write_sidecar(path, mask.spacing())?;
    }
    Ok(())
}

/// Writes `img` quantized to the given bit depth.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    match depth {
        BitDepth::Eight => {
            let raw: Vec<u8> = img.data().iter().map(|&v| (v * 255.0).round() as u8).collect();
            save_png(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).expect("length"), path)?;
        }
        BitDepth::Sixteen => {
            let raw: Vec<u16> = img.data().iter().map(|&v| (v * 65535.0).round() as u16).collect();
            save_png(ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).expect("length"), path)?;
        }
    }
    if img.spacing() != Spacing::default() {
        write_sidecar(path, img.spacing())?;
    }
    Ok(())
}
