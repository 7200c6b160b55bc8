//! YOLO-style label files: parsing, serialization and class filtering.
//!
//! One object per line, whitespace-separated numbers starting with an integer
//! class id. Coordinates are normalized to [0, 1] and rendered with 6
//! decimals, so parse ∘ serialize is the identity once a file has been
//! normalized.
//!
//! Line arities: AABB `class cx cy w h` (5 fields), OBB `class x1 y1 .. x4 y4`
//! (9 fields), polygon `class x1 y1 .. xn yn` (odd count, at least 7 fields).
//! Prediction files append one trailing confidence field per line.

use crate::error::{Error, Result};
use crate::geometry::{Pt, polygon_area};

/// Coordinate tolerance: values may stray this far outside [0, 1] before a
/// line is rejected; accepted values are clamped back into range.
pub const COORD_TOLERANCE: f64 = 1e-6;

/// An axis-aligned box in normalized center/size form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl Aabb {
    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Which line format a label file holds. `Mixed` disambiguates by field
/// count: 5 fields are AABB, 9 are OBB, anything else valid is a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Aabb,
    Obb,
    Polygon,
    Mixed,
}

/// One labeled object. At least one representation is always present.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub class_id: u32,
    pub aabb: Option<Aabb>,
    /// Four corners, normalized, consistent winding.
    pub obb: Option<[Pt; 4]>,
    /// At least 3 vertices, normalized.
    pub polygon: Option<Vec<Pt>>,
    /// Present on predictions only.
    pub confidence: Option<f64>,
}

impl Annotation {
    pub fn from_aabb(class_id: u32, aabb: Aabb) -> Self {
        Self {
            class_id,
            aabb: Some(aabb),
            obb: None,
            polygon: None,
            confidence: None,
        }
    }

    /// The AABB, or the axis-aligned bounds of whatever representation the
    /// annotation carries.
    pub fn effective_aabb(&self) -> Option<Aabb> {
        if let Some(aabb) = self.aabb {
            return Some(aabb);
        }
        let pts: &[Pt] = if let Some(ref obb) = self.obb {
            obb
        } else {
            self.polygon.as_ref()?
        };
        let (mut x0, mut y0, mut x1, mut y1) = (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for p in pts {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        Some(Aabb {
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0,
            h: y1 - y0,
        })
    }
}

/// All annotations of one image, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationSet {
    pub image_id: String,
    pub annotations: Vec<Annotation>,
}

impl AnnotationSet {
    pub fn new(image_id: impl Into<String>, annotations: Vec<Annotation>) -> Self {
        Self {
            image_id: image_id.into(),
            annotations,
        }
    }

    pub fn with_image_id(mut self, image_id: impl Into<String>) -> Self {
        self.image_id = image_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }
}

/// Parse a ground-truth label file. Empty files (and files of blank lines)
/// yield an empty set: objects outside the camera's field of view legitimately
/// produce no annotations.
pub fn parse_label_file(text: &str, kind: LabelKind) -> Result<AnnotationSet> {
    parse_lines(text, kind, false)
}

/// Parse a prediction label file: same formats as [`parse_label_file`] with a
/// trailing confidence in [0, 1] appended to every line.
pub fn parse_prediction_file(text: &str, kind: LabelKind) -> Result<AnnotationSet> {
    parse_lines(text, kind, true)
}

fn parse_lines(text: &str, kind: LabelKind, with_confidence: bool) -> Result<AnnotationSet> {
    let mut annotations = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        annotations.push(parse_label_line(line, idx + 1, kind, with_confidence)?);
    }
    Ok(AnnotationSet::new("", annotations))
}

/// Parse a single label line. `line_number` is 1-based and is embedded in any
/// error.
pub fn parse_label_line(
    line: &str,
    line_number: usize,
    kind: LabelKind,
    with_confidence: bool,
) -> Result<Annotation> {
    let fail = |message: String| Error::LabelParse {
        line: line_number,
        message,
    };

    let tokens: Vec<&str> = line.split_whitespace().collect();
    let n = tokens.len();
    let conf_fields = usize::from(with_confidence);

    let resolved = match kind {
        LabelKind::Aabb => LabelKind::Aabb,
        LabelKind::Obb => LabelKind::Obb,
        LabelKind::Polygon => LabelKind::Polygon,
        LabelKind::Mixed => {
            if n == 5 + conf_fields {
                LabelKind::Aabb
            } else if n == 9 + conf_fields {
                LabelKind::Obb
            } else {
                LabelKind::Polygon
            }
        }
    };

    let coord_count = n.saturating_sub(1 + conf_fields);
    match resolved {
        LabelKind::Aabb if coord_count != 4 => {
            return Err(fail(format!(
                "expected {} fields for an AABB, found {n}",
                5 + conf_fields
            )));
        }
        LabelKind::Obb if coord_count != 8 => {
            return Err(fail(format!(
                "expected {} fields for an OBB, found {n}",
                9 + conf_fields
            )));
        }
        LabelKind::Polygon if coord_count < 6 || !coord_count.is_multiple_of(2) => {
            return Err(fail(format!(
                "expected an even coordinate count of at least 6 for a polygon, found {coord_count}"
            )));
        }
        _ => {}
    }

    let class_id: u32 = tokens[0].parse().map_err(|_| {
        fail(format!(
            "invalid class id {:?}: expected a non-negative integer",
            tokens[0]
        ))
    })?;

    let mut coords = Vec::with_capacity(coord_count);
    for tok in &tokens[1..1 + coord_count] {
        let v: f64 = tok
            .parse()
            .map_err(|_| fail(format!("non-numeric coordinate {tok:?}")))?;
        if !v.is_finite() {
            return Err(fail(format!("non-finite coordinate {tok:?}")));
        }
        if !(-COORD_TOLERANCE..=1.0 + COORD_TOLERANCE).contains(&v) {
            return Err(fail(format!("coordinate {v} outside [0, 1]")));
        }
        coords.push(v.clamp(0.0, 1.0));
    }

    let confidence = if with_confidence {
        let tok = tokens[n - 1];
        let v: f64 = tok
            .parse()
            .map_err(|_| fail(format!("non-numeric confidence {tok:?}")))?;
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(fail(format!("confidence {v} outside [0, 1]")));
        }
        Some(v)
    } else {
        None
    };

    let mut annotation = Annotation {
        class_id,
        aabb: None,
        obb: None,
        polygon: None,
        confidence,
    };
    match resolved {
        LabelKind::Aabb => {
            let aabb = Aabb {
                cx: coords[0],
                cy: coords[1],
                w: coords[2],
                h: coords[3],
            };
            if aabb.w <= 0.0 || aabb.h <= 0.0 {
                return Err(fail("box width and height must be positive".into()));
            }
            for edge in [aabb.left(), aabb.right(), aabb.top(), aabb.bottom()] {
                if !(-COORD_TOLERANCE..=1.0 + COORD_TOLERANCE).contains(&edge) {
                    return Err(fail(format!("box edge {edge} outside [0, 1]")));
                }
            }
            annotation.aabb = Some(aabb);
        }
        LabelKind::Obb => {
            let corners = [
                Pt::new(coords[0], coords[1]),
                Pt::new(coords[2], coords[3]),
                Pt::new(coords[4], coords[5]),
                Pt::new(coords[6], coords[7]),
            ];
            validate_quad(&corners).map_err(fail)?;
            annotation.obb = Some(corners);
        }
        LabelKind::Polygon => {
            let pts: Vec<Pt> = coords
                .chunks_exact(2)
                .map(|c| Pt::new(c[0], c[1]))
                .collect();
            annotation.polygon = Some(pts);
        }
        LabelKind::Mixed => unreachable!("resolved above"),
    }
    Ok(annotation)
}

/// A usable OBB is a simple quadrilateral with positive area: opposite edges
/// never cross and the corners do not collapse onto a line.
pub(crate) fn validate_quad(c: &[Pt; 4]) -> std::result::Result<(), String> {
    if polygon_area(c).abs() <= 0.0 {
        return Err("oriented box has zero area".into());
    }
    if segments_cross(c[0], c[1], c[2], c[3]) || segments_cross(c[1], c[2], c[3], c[0]) {
        return Err("oriented box corners self-intersect".into());
    }
    Ok(())
}

fn segments_cross(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let orient =
        |p: Pt, q: Pt, r: Pt| ((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)).signum();
    orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0
}

/// Serialize annotations to label-file text. Coordinates render at 6 decimal
/// places and every line ends with a newline; an empty set produces an empty
/// file. With `Mixed`, each annotation uses its richest available
/// representation in the order AABB, OBB, polygon.
pub fn serialize_annotations(set: &AnnotationSet, kind: LabelKind) -> Result<String> {
    let mut out = String::new();
    for (index, ann) in set.annotations.iter().enumerate() {
        let missing = |what: &str| Error::LabelSerialize {
            index,
            message: format!("annotation has no {what} representation"),
        };
        let resolved = match kind {
            LabelKind::Mixed => {
                if ann.aabb.is_some() {
                    LabelKind::Aabb
                } else if ann.obb.is_some() {
                    LabelKind::Obb
                } else {
                    LabelKind::Polygon
                }
            }
            k => k,
        };
        out.push_str(&ann.class_id.to_string());
        match resolved {
            LabelKind::Aabb => {
                let b = ann.aabb.ok_or_else(|| missing("AABB"))?;
                for v in [b.cx, b.cy, b.w, b.h] {
                    push_coord(&mut out, v);
                }
            }
            LabelKind::Obb => {
                let c = ann.obb.ok_or_else(|| missing("OBB"))?;
                for p in c {
                    push_coord(&mut out, p.x);
                    push_coord(&mut out, p.y);
                }
            }
            LabelKind::Polygon => {
                let poly = ann.polygon.as_ref().ok_or_else(|| missing("polygon"))?;
                if poly.len() < 3 {
                    return Err(Error::LabelSerialize {
                        index,
                        message: format!("polygon has {} vertices, need at least 3", poly.len()),
                    });
                }
                for p in poly {
                    push_coord(&mut out, p.x);
                    push_coord(&mut out, p.y);
                }
            }
            LabelKind::Mixed => unreachable!("resolved above"),
        }
        if let Some(conf) = ann.confidence {
            push_coord(&mut out, conf);
        }
        out.push('\n');
    }
    Ok(out)
}

fn push_coord(out: &mut String, v: f64) {
    use std::fmt::Write;
    write!(out, " {v:.6}").expect("writing to String cannot fail");
}

/// Remove every annotation of the given class, preserving the order of the
/// rest.
pub fn drop_class(set: &AnnotationSet, class_id: u32) -> AnnotationSet {
    AnnotationSet {
        image_id: set.image_id.clone(),
        annotations: set
            .annotations
            .iter()
            .filter(|a| a.class_id != class_id)
            .cloned()
            .collect(),
    }
}
