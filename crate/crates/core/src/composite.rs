//! Alpha-over compositing of rendered layers onto real thermal backgrounds,
//! plus grayscale conversion and the parameter-keyed output layout.
//!
//! Blending runs in floating point and quantizes to 8 bits exactly once with
//! half-to-even rounding, so zero-alpha pixels stay bit-identical to the
//! background and results are reproducible across implementations.

use std::path::PathBuf;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::ThermalImage;
use crate::metadata::Split;
use crate::rng::RngStream;

/// Convert a 3-channel 8-bit image to grayscale with Rec.709 luma
/// (0.2126 R + 0.7152 G + 0.0722 B), rounded half-to-even.
pub fn rgb_to_grayscale(rgb: &image::RgbImage) -> ThermalImage {
    let (w, h) = rgb.dimensions();
    let data: Vec<u8> = rgb
        .pixels()
        .map(|p| {
            let y = 0.2126 * p.0[0] as f64 + 0.7152 * p.0[1] as f64 + 0.0722 * p.0[2] as f64;
            y.round_ties_even().clamp(0.0, 255.0) as u8
        })
        .collect();
    ThermalImage::from_raw(w, h, data).expect("dimensions from a valid image")
}

/// Blend a rendered foreground over a background:
/// `out = alpha * (255 * fg) + (1 - alpha) * bg`, rounded half-to-even.
/// Pixels with alpha 0 are bit-identical to the background.
pub fn alpha_over(fg_intensity: &[f32], alpha: &[f32], bg: &ThermalImage) -> Result<ThermalImage> {
    let n = bg.width() as usize * bg.height() as usize;
    if fg_intensity.len() != n || alpha.len() != n {
        return Err(Error::data(format!(
            "buffer dimensions differ: fg {}, alpha {}, background {}x{}",
            fg_intensity.len(),
            alpha.len(),
            bg.width(),
            bg.height()
        )));
    }
    let data: Vec<u8> = bg
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let a = alpha[i] as f64;
            if a == 0.0 {
                return b;
            }
            let blended = a * (255.0 * fg_intensity[i] as f64) + (1.0 - a) * b as f64;
            blended.round_ties_even().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(ThermalImage::from_raw(bg.width(), bg.height(), data)
        .expect("same dimensions as background"))
}

/// Additive Gaussian sensor noise (standard deviation in intensity counts),
/// applied after blending and clamped to [0, 255]. Draws one sample per pixel
/// in row-major order from the given stream.
pub fn add_gaussian_noise(image: &ThermalImage, sigma: f64, rng: &mut RngStream) -> ThermalImage {
    if sigma <= 0.0 {
        return image.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated positive");
    let data: Vec<u8> = image
        .pixels()
        .iter()
        .map(|&v| {
            (v as f64 + normal.sample(rng))
                .round_ties_even()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    ThermalImage::from_raw(image.width(), image.height(), data).expect("same dimensions")
}

/// Relative output locations of one composite: image, label file, and mask.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub image: PathBuf,
    pub label: PathBuf,
    pub mask: PathBuf,
}

/// Compute the parameter-keyed locations for one composite, relative to the
/// output root: `images/<split>/angle_<pitch bucket>/<id>_cfg<k>.png` with a
/// sibling `labels/` tree for the `.txt` and `masks/` for mask dumps. The
/// pitch bucket rounds to the nearest 5 degrees.
pub fn output_paths(
    split: Split,
    pitch_deg: f64,
    background_id: &str,
    config_index: u32,
) -> OutputPaths {
    let bucket = (pitch_deg / 5.0).round() as i32 * 5;
    let bucket_dir = if bucket < 0 {
        format!("angle_-{:03}", -bucket)
    } else {
        format!("angle_{bucket:03}")
    };
    let stem = format!("{background_id}_cfg{config_index}");
    let sub = PathBuf::from(split.as_str()).join(bucket_dir);
    OutputPaths {
        image: PathBuf::from("images")
            .join(&sub)
            .join(format!("{stem}.png")),
        label: PathBuf::from("labels")
            .join(&sub)
            .join(format!("{stem}.txt")),
        mask: PathBuf::from("masks")
            .join(&sub)
            .join(format!("{stem}.png")),
    }
}
