//! Reading frames and reading/writing masks on disk.

use std::path::{Path, PathBuf};

use image::{GrayImage, ImageFormat, ImageReader, Luma, RgbImage};

use crate::colorspace::RgbFrame;
use crate::error::{Error, Result};
use crate::morphology::BinaryMask;

/// `mask_000042.png` for index 42.
pub fn mask_file_name(index: usize) -> String {
    format!("mask_{index:06}.png")
}

/// `frame_000042.png` for index 42.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

/// Decodes a PNG or binary PPM file into an RGB frame.
pub fn read_rgb_frame(path: &Path) -> Result<RgbFrame> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::read(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::read(path, e))?
        .decode()
        .map_err(|e| Error::read(path, e))?
        .into_rgb8();
    let (w, h) = img.dimensions();
    RgbFrame::from_interleaved(w as usize, h as usize, img.as_raw())
}

/// Reads only the header to get `(width, height)`.
pub fn frame_dimensions(path: &Path) -> Result<(usize, usize)> {
    let (w, h) = ImageReader::open(path)
        .map_err(|e| Error::read(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::read(path, e))?
        .into_dimensions()
        .map_err(|e| Error::read(path, e))?;
    Ok((w as usize, h as usize))
}

pub fn write_rgb_frame(frame: &RgbFrame, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = frame.pixels().iter().flatten().copied().collect();
    let img = RgbImage::from_raw(frame.width() as u32, frame.height() as u32, bytes)
        .expect("frame buffer length matches dimensions");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::write(path, e))
}

/// Writes a mask as an 8-bit grayscale PNG, foreground 255 and background 0.
pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let img = GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        Luma([if mask.get(x as usize, y as usize) {
            255
        } else {
            0
        }])
    });
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::write(path, e))
}

/// Reads a grayscale mask; levels of 128 and above are foreground.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::read(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::read(path, e))?
        .decode()
        .map_err(|e| Error::read(path, e))?
        .into_luma8();
    let (w, h) = img.dimensions();
    let data = img.as_raw().iter().map(|&v| v >= 128).collect();
    BinaryMask::new(w as usize, h as usize, data)
}

/// Lists `mask_NNNNNN.png` files in `dir`, sorted by index.
pub fn list_masks(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::read(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::read(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(digits) = name
            .strip_prefix("mask_")
            .and_then(|rest| rest.strip_suffix(".png"))
        else {
            continue;
        };
        if let Ok(index) = digits.parse::<usize>() {
            out.push((index, entry.path()));
        }
    }
    out.sort();
    Ok(out)
}
