//! Single-channel 8-bit raster images and their file formats (PNG, PGM P5).
//!
//! `ThermalImage` is the unit of all background and composite I/O. Round-trips
//! through both formats are lossless.

use std::path::Path;

use crate::error::{Error, Result};

/// A grayscale raster with 8-bit intensities, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThermalImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl ThermalImage {
    /// Build an image from raw row-major bytes. `data.len()` must equal
    /// `width * height` and both dimensions must be positive.
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::image("image dimensions must be positive"));
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::image(format!(
                "pixel buffer has {} bytes, expected {} for {}x{}",
                data.len(),
                expected,
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::from_raw(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }
}

/// Load an 8-bit single-channel PNG or PGM (binary P5) image.
///
/// Multi-channel input is rejected; callers holding color data must convert
/// with [`crate::composite::rgb_to_grayscale`] first. Bit depths other than 8
/// are rejected as unsupported.
pub fn load_image(path: &Path) -> Result<ThermalImage> {
    match extension_of(path)? {
        ImageFormat::Png => load_png(path),
        ImageFormat::Pgm => load_pgm(path),
    }
}

/// Save an image as PNG or PGM P5, chosen by file extension.
/// `save_image` followed by [`load_image`] reproduces the pixels exactly.
pub fn save_image(image: &ThermalImage, path: &Path) -> Result<()> {
    match extension_of(path)? {
        ImageFormat::Png => save_png(image, path),
        ImageFormat::Pgm => save_pgm(image, path),
    }
}

enum ImageFormat {
    Png,
    Pgm,
}

fn extension_of(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("png") => Ok(ImageFormat::Png),
        Some(ext) if ext.eq_ignore_ascii_case("pgm") => Ok(ImageFormat::Pgm),
        other => Err(Error::image(format!(
            "unsupported image extension {:?} for {} (expected png or pgm)",
            other,
            path.display()
        ))),
    }
}

fn load_png(path: &Path) -> Result<ThermalImage> {
    let dynamic = image::open(path)
        .map_err(|e| Error::image(format!("cannot decode {}: {e}", path.display())))?;
    match dynamic {
        image::DynamicImage::ImageLuma8(gray) => {
            let (w, h) = gray.dimensions();
            ThermalImage::from_raw(w, h, gray.into_raw())
        }
        image::DynamicImage::ImageLuma16(_) => Err(Error::image(format!(
            "{}: unsupported bit depth (16-bit), expected 8-bit grayscale",
            path.display()
        ))),
        other => Err(Error::image(format!(
            "{}: multi-channel input ({:?}); convert with rgb_to_grayscale first",
            path.display(),
            other.color()
        ))),
    }
}

fn save_png(image: &ThermalImage, path: &Path) -> Result<()> {
    let buffer = image::GrayImage::from_raw(image.width, image.height, image.data.clone())
        .expect("dimensions validated at construction");
    buffer
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::image(format!("cannot write {}: {e}", path.display())))
}

fn load_pgm(path: &Path) -> Result<ThermalImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|msg| Error::image(format!("{}: {msg}", path.display())))
}

fn save_pgm(image: &ThermalImage, path: &Path) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.data);
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parse a binary PGM (P5). Header tokens may be separated by whitespace and
/// `#` comments; exactly one whitespace byte follows the maxval before the
/// raster data.
fn parse_pgm(bytes: &[u8]) -> std::result::Result<ThermalImage, String> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let mut pos = 2;
    let mut header = [0usize; 3];
    for slot in header.iter_mut() {
        skip_pgm_separators(bytes, &mut pos)?;
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err("malformed PGM header".into());
        }
        let token = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *slot = token
            .parse::<usize>()
            .map_err(|e| format!("bad header value: {e}"))?;
    }
    let [width, height, maxval] = header;
    if maxval > 255 {
        return Err(format!("unsupported bit depth (maxval {maxval} > 255)"));
    }
    if maxval == 0 {
        return Err("invalid maxval 0".into());
    }
    // Single whitespace byte between maxval and raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing separator before raster data".into());
    }
    pos += 1;
    let expected = width.checked_mul(height).ok_or("dimensions overflow")?;
    let raster = &bytes[pos..];
    if raster.len() != expected {
        return Err(format!(
            "raster has {} bytes, expected {expected}",
            raster.len()
        ));
    }
    ThermalImage::from_raw(width as u32, height as u32, raster.to_vec()).map_err(|e| e.to_string())
}

fn skip_pgm_separators(bytes: &[u8], pos: &mut usize) -> std::result::Result<(), String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            return Ok(());
        }
    }
}
