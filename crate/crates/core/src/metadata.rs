//! Per-image flight metadata: camera pitch, altitude and dataset split.
//!
//! The carrier is comma-delimited text with a header row naming at least
//! `image_id` and `camera_pitch_deg`; `altitude_m` and `split` columns are
//! optional and empty cells mean "missing". Absent pitch is recorded as
//! missing, never defaulted, so downstream filtering can count it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dataset split of a background image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Val,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Val => "val",
        }
    }
}

/// Camera pitch below which no dataset in scope reports values; gimbal
/// overshoot can produce negative pitch, while 92 degrees is the largest
/// catalogued maximum.
pub const PITCH_MIN_DEG: f64 = -90.0;
pub const PITCH_MAX_DEG: f64 = 92.0;

/// Flight metadata for one background image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetadata {
    pub image_id: String,
    /// 0 is horizontal (eye level), 90 looks straight down.
    pub camera_pitch_deg: Option<f64>,
    pub altitude_m: Option<f64>,
    pub split: Split,
}

/// Parse a metadata table. Keys are unique image ids; rows with an empty
/// pitch cell are kept with the pitch marked missing. Rows are returned in a
/// deterministic (sorted) map.
pub fn load_metadata(table: &str) -> Result<BTreeMap<String, ImageMetadata>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(table.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Metadata {
            row: 0,
            message: format!("unreadable header: {e}"),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("image_id").ok_or_else(|| Error::Metadata {
        row: 0,
        message: "missing image_id column".into(),
    })?;
    let pitch_col = col("camera_pitch_deg").ok_or_else(|| Error::Metadata {
        row: 0,
        message: "missing camera_pitch_deg column".into(),
    })?;
    let altitude_col = col("altitude_m");
    let split_col = col("split");

    let mut out = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Metadata {
            row,
            message: format!("unreadable row: {e}"),
        })?;
        let cell = |i: Option<usize>| i.and_then(|i| record.get(i)).unwrap_or("");

        let image_id = cell(Some(id_col)).to_string();
        if image_id.is_empty() {
            return Err(Error::Metadata {
                row,
                message: "empty image_id".into(),
            });
        }

        let camera_pitch_deg =
            parse_optional_number(cell(Some(pitch_col)), "camera_pitch_deg", row)?;
        if let Some(pitch) = camera_pitch_deg
            && !(PITCH_MIN_DEG..=PITCH_MAX_DEG).contains(&pitch)
        {
            return Err(Error::Metadata {
                row,
                message: format!(
                    "camera_pitch_deg {pitch} outside [{PITCH_MIN_DEG}, {PITCH_MAX_DEG}]"
                ),
            });
        }
        let altitude_m = parse_optional_number(cell(altitude_col), "altitude_m", row)?;

        let split = match cell(split_col) {
            "" => Split::Train,
            s if s.eq_ignore_ascii_case("train") => Split::Train,
            s if s.eq_ignore_ascii_case("test") => Split::Test,
            s if s.eq_ignore_ascii_case("val") => Split::Val,
            other => {
                return Err(Error::Metadata {
                    row,
                    message: format!("unknown split {other:?} (expected train, test or val)"),
                });
            }
        };

        let meta = ImageMetadata {
            image_id: image_id.clone(),
            camera_pitch_deg,
            altitude_m,
            split,
        };
        if out.insert(image_id.clone(), meta).is_some() {
            return Err(Error::Metadata {
                row,
                message: format!("duplicate image_id {image_id:?}"),
            });
        }
    }
    Ok(out)
}

fn parse_optional_number(cell: &str, name: &str, row: usize) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    let v: f64 = cell.parse().map_err(|_| Error::Metadata {
        row,
        message: format!("unparseable {name} cell {cell:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Metadata {
            row,
            message: format!("non-finite {name} cell {cell:?}"),
        });
    }
    Ok(Some(v))
}

/// Split records into those carrying a pitch value and the fraction that do
/// not. An empty input has a dropped fraction of 0.
pub fn filter_missing_metadata(records: &[ImageMetadata]) -> (Vec<ImageMetadata>, f64) {
    let total = records.len();
    let kept: Vec<ImageMetadata> = records
        .iter()
        .filter(|r| r.camera_pitch_deg.is_some())
        .cloned()
        .collect();
    let dropped_fraction = if total == 0 {
        0.0
    } else {
        (total - kept.len()) as f64 / total as f64
    };
    (kept, dropped_fraction)
}
