//! Randomized virtual-scene configurations.
//!
//! Each background gets `n_config` sampled scenes. All parameters draw
//! uniformly from their configured ranges with a fixed order — distance,
//! roll, yaw, x, y, then pitch when the pitch mode is random — so a stream
//! positioned at its start always reproduces the same scene.

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Sampling bounds for scene parameters. Yaw is half-open; everything else
/// is a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParamRanges {
    /// Scene configurations generated per background.
    pub n_config: u32,
    /// Camera-to-scene-origin distance bounds, meters.
    pub d_min: f64,
    pub d_max: f64,
    /// Camera roll bounds, degrees.
    pub roll_min: f64,
    pub roll_max: f64,
    /// Object yaw bounds, degrees, sampled from [yaw_min, yaw_max).
    pub yaw_min: f64,
    pub yaw_max: f64,
    /// Object position bounds, meters.
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for SceneParamRanges {
    fn default() -> Self {
        Self {
            n_config: 2,
            d_min: 1.0,
            d_max: 10.0,
            roll_min: -10.0,
            roll_max: 10.0,
            yaw_min: 0.0,
            yaw_max: 360.0,
            x_min: -3.0,
            x_max: 3.0,
            y_min: -3.0,
            y_max: 3.0,
        }
    }
}

impl SceneParamRanges {
    pub fn validate(&self) -> Result<()> {
        if self.n_config < 1 {
            return Err(Error::config("n_config must be at least 1"));
        }
        if self.d_min <= 0.0 {
            return Err(Error::config(
                "d_min must be positive (camera cannot sit at the origin)",
            ));
        }
        let pairs = [
            ("d", self.d_min, self.d_max),
            ("roll", self.roll_min, self.roll_max),
            ("yaw", self.yaw_min, self.yaw_max),
            ("x", self.x_min, self.x_max),
            ("y", self.y_min, self.y_max),
        ];
        for (name, min, max) in pairs {
            if !min.is_finite() || !max.is_finite() {
                return Err(Error::config(format!("{name} range must be finite")));
            }
            if min > max {
                return Err(Error::config(format!(
                    "{name}_min {min} exceeds {name}_max {max}"
                )));
            }
        }
        Ok(())
    }
}

/// How the camera pitch of a scene is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PitchMode {
    /// Use the background's recorded pitch.
    Metadata,
    /// Ignore metadata and use one angle for every scene.
    Fixed(f64),
    /// Draw uniformly from [min, max] per scene.
    Random { min: f64, max: f64 },
}

/// One sampled virtual-scene realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub background_id: String,
    pub config_index: u32,
    /// Camera distance to the scene origin, meters.
    pub distance_m: f64,
    /// Resolved pitch for this scene; `None` only when the pitch mode is
    /// metadata and the background has no recorded pitch.
    pub camera_pitch_deg: Option<f64>,
    pub camera_roll_deg: f64,
    pub object_yaw_deg: f64,
    pub object_x_m: f64,
    pub object_y_m: f64,
}

/// Sample one scene. `metadata_pitch` is the background's recorded pitch and
/// is stored untouched in metadata mode; fixed mode stores the fixed angle;
/// random mode draws the pitch as the final draw of the fixed order.
pub fn sample_scene_config(
    ranges: &SceneParamRanges,
    mode: PitchMode,
    metadata_pitch: Option<f64>,
    stream: &mut RngStream,
    background_id: &str,
    config_index: u32,
) -> SceneConfig {
    let distance_m = stream.random_range(ranges.d_min..=ranges.d_max);
    let camera_roll_deg = stream.random_range(ranges.roll_min..=ranges.roll_max);
    let object_yaw_deg = if ranges.yaw_min < ranges.yaw_max {
        stream.random_range(ranges.yaw_min..ranges.yaw_max)
    } else {
        ranges.yaw_min
    };
    let object_x_m = stream.random_range(ranges.x_min..=ranges.x_max);
    let object_y_m = stream.random_range(ranges.y_min..=ranges.y_max);
    let camera_pitch_deg = match mode {
        PitchMode::Metadata => metadata_pitch,
        PitchMode::Fixed(theta) => Some(theta),
        PitchMode::Random { min, max } => Some(stream.random_range(min..=max)),
    };
    SceneConfig {
        background_id: background_id.to_string(),
        config_index,
        distance_m,
        camera_pitch_deg,
        camera_roll_deg,
        object_yaw_deg,
        object_x_m,
        object_y_m,
    }
}
