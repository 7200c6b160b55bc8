//! Pipeline configuration file (TOML).
//!
//! Unknown keys are hard errors with a nearest-match suggestion, so typos
//! like `dmax` fail loudly instead of silently falling back to a default.
//! Every default is the documented field default below; the fully resolved
//! config is echoed into the run manifest.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scene::{PitchMode, SceneParamRanges};

/// How the synthetic object's class id is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NewClassId {
    /// One past the highest class id present in the original labels (after
    /// dropped classes are removed).
    Auto,
    Fixed(u32),
}

/// Fully resolved generation settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub background_images_dir: PathBuf,
    pub background_labels_dir: PathBuf,
    pub metadata_path: PathBuf,
    pub mesh_path: PathBuf,
    pub material_sidecar_path: PathBuf,
    pub output_root: PathBuf,
    pub ranges: SceneParamRanges,
    /// Default: metadata alignment.
    pub pitch_mode: PitchMode,
    /// Originals covered at or above this fraction are dropped. Default 0.99.
    pub occlusion_threshold: f64,
    /// Default: auto.
    pub new_class_id: NewClassId,
    /// Classes stripped from originals before merging (e.g. a "don't care"
    /// class). Default: none.
    pub drop_class_ids: Vec<u32>,
    /// Default 0.
    pub master_seed: u64,
    /// Default 58 degrees, a common LWIR aerial lens.
    pub hfov_deg: f64,
    /// Samples per pixel, 1 or 4. Default 1 (binary alpha).
    pub supersample: u32,
    /// Additive Gaussian noise after blending, in intensity counts.
    /// Default 0 (off).
    pub noise_sigma: f64,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, path) in [
            ("background_images_dir", &self.background_images_dir),
            ("background_labels_dir", &self.background_labels_dir),
            ("metadata_path", &self.metadata_path),
            ("mesh_path", &self.mesh_path),
            ("material_sidecar_path", &self.material_sidecar_path),
            ("output_root", &self.output_root),
        ] {
            if path.as_os_str().is_empty() {
                return Err(Error::config(format!("{name} must not be empty")));
            }
        }
        self.ranges.validate()?;
        if !(0.0..=1.0).contains(&self.occlusion_threshold) {
            return Err(Error::config(format!(
                "occlusion_threshold {} outside [0, 1]",
                self.occlusion_threshold
            )));
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err(Error::config(format!(
                "hfov_deg {} outside (0, 180)",
                self.hfov_deg
            )));
        }
        if self.supersample != 1 && self.supersample != 4 {
            return Err(Error::config(format!(
                "supersample must be 1 or 4, got {}",
                self.supersample
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config(format!(
                "noise_sigma {} must be non-negative",
                self.noise_sigma
            )));
        }
        if let PitchMode::Random { min, max } = self.pitch_mode
            && !(min.is_finite() && max.is_finite() && min <= max)
        {
            return Err(Error::config(format!(
                "random pitch range [{min}, {max}] is invalid"
            )));
        }
        if let PitchMode::Fixed(theta) = self.pitch_mode
            && !theta.is_finite()
        {
            return Err(Error::config("fixed pitch must be finite"));
        }
        Ok(())
    }
}

const TOP_KEYS: &[&str] = &[
    "background_images_dir",
    "background_labels_dir",
    "metadata_path",
    "mesh_path",
    "material_sidecar_path",
    "output_root",
    "ranges",
    "pitch_mode",
    "occlusion_threshold",
    "new_class_id",
    "drop_class_ids",
    "master_seed",
    "hfov_deg",
    "supersample",
    "noise_sigma",
];

const RANGE_KEYS: &[&str] = &[
    "n_config", "d_min", "d_max", "roll_min", "roll_max", "yaw_min", "yaw_max", "x_min", "x_max",
    "y_min", "y_max",
];

/// Parse and validate a pipeline config.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let value: toml::Value =
        toml::from_str(text).map_err(|e| Error::config(format!("invalid TOML: {e}")))?;
    let table = value
        .as_table()
        .ok_or_else(|| Error::config("expected a TOML table"))?;

    reject_unknown_keys(table, TOP_KEYS, "")?;
    if let Some(ranges) = table.get("ranges") {
        let sub = ranges
            .as_table()
            .ok_or_else(|| Error::config("ranges must be a table"))?;
        reject_unknown_keys(sub, RANGE_KEYS, "ranges.")?;
    }

    let get_path = |key: &str| -> Result<PathBuf> {
        match table.get(key) {
            Some(v) => Ok(PathBuf::from(expect_str(v, key)?)),
            None => Err(Error::config(format!("missing required key `{key}`"))),
        }
    };

    let mut ranges = SceneParamRanges::default();
    if let Some(sub) = table.get("ranges").and_then(|v| v.as_table()) {
        if let Some(v) = sub.get("n_config") {
            ranges.n_config = expect_u64(v, "ranges.n_config")? as u32;
        }
        for (key, slot) in [
            ("d_min", &mut ranges.d_min),
            ("d_max", &mut ranges.d_max),
            ("roll_min", &mut ranges.roll_min),
            ("roll_max", &mut ranges.roll_max),
            ("yaw_min", &mut ranges.yaw_min),
            ("yaw_max", &mut ranges.yaw_max),
            ("x_min", &mut ranges.x_min),
            ("x_max", &mut ranges.x_max),
            ("y_min", &mut ranges.y_min),
            ("y_max", &mut ranges.y_max),
        ] {
            if let Some(v) = sub.get(key) {
                *slot = expect_f64(v, &format!("ranges.{key}"))?;
            }
        }
    }

    let pitch_mode = match table.get("pitch_mode") {
        None => PitchMode::Metadata,
        Some(toml::Value::String(s)) if s == "metadata" => PitchMode::Metadata,
        Some(toml::Value::String(other)) => {
            return Err(Error::config(format!(
                "pitch_mode {other:?} not recognized (use \"metadata\", {{ fixed = deg }} or \
                 {{ random = [min, max] }})"
            )));
        }
        Some(toml::Value::Table(t)) => {
            reject_unknown_keys(t, &["fixed", "random"], "pitch_mode.")?;
            if let Some(v) = t.get("fixed") {
                PitchMode::Fixed(expect_f64(v, "pitch_mode.fixed")?)
            } else if let Some(v) = t.get("random") {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::config("pitch_mode.random must be [min, max]"))?;
                if arr.len() != 2 {
                    return Err(Error::config("pitch_mode.random must be [min, max]"));
                }
                PitchMode::Random {
                    min: expect_f64(&arr[0], "pitch_mode.random[0]")?,
                    max: expect_f64(&arr[1], "pitch_mode.random[1]")?,
                }
            } else {
                return Err(Error::config("pitch_mode table needs `fixed` or `random`"));
            }
        }
        Some(_) => return Err(Error::config("pitch_mode must be a string or table")),
    };

    let new_class_id = match table.get("new_class_id") {
        None => NewClassId::Auto,
        Some(toml::Value::String(s)) if s == "auto" => NewClassId::Auto,
        Some(toml::Value::Integer(i)) if *i >= 0 => NewClassId::Fixed(*i as u32),
        Some(other) => {
            return Err(Error::config(format!(
                "new_class_id must be \"auto\" or a non-negative integer, got {other}"
            )));
        }
    };

    let mut drop_class_ids = Vec::new();
    if let Some(v) = table.get("drop_class_ids") {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::config("drop_class_ids must be an array of integers"))?;
        for item in arr {
            drop_class_ids.push(expect_u64(item, "drop_class_ids")? as u32);
        }
    }

    let config = PipelineConfig {
        background_images_dir: get_path("background_images_dir")?,
        background_labels_dir: get_path("background_labels_dir")?,
        metadata_path: get_path("metadata_path")?,
        mesh_path: get_path("mesh_path")?,
        material_sidecar_path: get_path("material_sidecar_path")?,
        output_root: get_path("output_root")?,
        ranges,
        pitch_mode,
        occlusion_threshold: opt_f64(table, "occlusion_threshold")?.unwrap_or(0.99),
        new_class_id,
        drop_class_ids,
        master_seed: opt_u64(table, "master_seed")?.unwrap_or(0),
        hfov_deg: opt_f64(table, "hfov_deg")?.unwrap_or(58.0),
        supersample: opt_u64(table, "supersample")?.unwrap_or(1) as u32,
        noise_sigma: opt_f64(table, "noise_sigma")?.unwrap_or(0.0),
    };
    config.validate()?;
    Ok(config)
}

fn reject_unknown_keys(
    table: &toml::map::Map<String, toml::Value>,
    known: &[&str],
    prefix: &str,
) -> Result<()> {
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            let suggestion = known
                .iter()
                .map(|k| (levenshtein(key, k), *k))
                .min()
                .filter(|(d, _)| *d <= 3)
                .map(|(_, k)| format!(" (did you mean `{prefix}{k}`?)"))
                .unwrap_or_default();
            return Err(Error::config(format!(
                "unknown key `{prefix}{key}`{suggestion}"
            )));
        }
    }
    Ok(())
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur.push((prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn expect_str(v: &toml::Value, key: &str) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::config(format!("{key} must be a string")))
}

fn expect_f64(v: &toml::Value, key: &str) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::config(format!("{key} must be a number"))),
    }
}

fn expect_u64(v: &toml::Value, key: &str) -> Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::config(format!(
            "{key} must be a non-negative integer"
        ))),
    }
}

fn opt_f64(table: &toml::map::Map<String, toml::Value>, key: &str) -> Result<Option<f64>> {
    table.get(key).map(|v| expect_f64(v, key)).transpose()
}

fn opt_u64(table: &toml::map::Map<String, toml::Value>, key: &str) -> Result<Option<u64>> {
    table.get(key).map(|v| expect_u64(v, key)).transpose()
}

/// Echoed config plus any extra context, as a stable JSON value for the
/// manifest header.
pub fn config_json(config: &PipelineConfig) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}
