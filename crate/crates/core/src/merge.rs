//! Occlusion-aware annotation merging.
//!
//! A newly rendered object can bury original objects; originals whose box is
//! covered by the render's silhouette beyond a threshold are removed so every
//! label left in a generated image stays visible. Coverage tests the
//! silhouette (alpha), not box-vs-box overlap, which is the stricter,
//! geometry-true reading of "completely obscured".

use crate::error::{Error, Result};
use crate::labels::{Aabb, AnnotationSet};

/// Fraction of an AABB's pixels covered by the rendered silhouette
/// (alpha >= 0.5). The box denormalizes to the enclosing pixel span, clamped
/// to the image; an empty span yields 0.
pub fn coverage(aabb: &Aabb, alpha: &[f32], width: u32, height: u32) -> f64 {
    debug_assert_eq!(alpha.len(), width as usize * height as usize);
    let x0 = ((aabb.left() * width as f64).floor().max(0.0)) as i64;
    let x1 = ((aabb.right() * width as f64).ceil().min(width as f64)) as i64;
    let y0 = ((aabb.top() * height as f64).floor().max(0.0)) as i64;
    let y1 = ((aabb.bottom() * height as f64).ceil().min(height as f64)) as i64;
    if x0 >= x1 || y0 >= y1 {
        return 0.0;
    }
    let mut covered = 0usize;
    for y in y0..y1 {
        for x in x0..x1 {
            if alpha[y as usize * width as usize + x as usize] >= 0.5 {
                covered += 1;
            }
        }
    }
    covered as f64 / ((x1 - x0) * (y1 - y0)) as f64
}

/// Merge synthetic annotations into the originals: originals covered at or
/// above `occlusion_threshold` are dropped, the rest keep their order and
/// exact field values, and all synthetic annotations append afterwards.
/// Synthetic class ids must be disjoint from the originals'.
pub fn merge_annotations(
    original: &AnnotationSet,
    synthetic: &AnnotationSet,
    alpha: &[f32],
    width: u32,
    height: u32,
    occlusion_threshold: f64,
) -> Result<AnnotationSet> {
    if !original.image_id.is_empty()
        && !synthetic.image_id.is_empty()
        && original.image_id != synthetic.image_id
    {
        return Err(Error::data(format!(
            "merging annotations of different images: {:?} vs {:?}",
            original.image_id, synthetic.image_id
        )));
    }
    let original_classes: std::collections::BTreeSet<u32> =
        original.annotations.iter().map(|a| a.class_id).collect();
    for ann in &synthetic.annotations {
        if original_classes.contains(&ann.class_id) {
            return Err(Error::data(format!(
                "synthetic class id {} collides with an original class; \
                 the new class must take an unused id",
                ann.class_id
            )));
        }
    }

    let mut merged = Vec::with_capacity(original.len() + synthetic.len());
    for ann in &original.annotations {
        let covered = match ann.effective_aabb() {
            Some(aabb) => coverage(&aabb, alpha, width, height),
            None => 0.0,
        };
        if covered < occlusion_threshold {
            merged.push(ann.clone());
        }
    }
    merged.extend(synthetic.annotations.iter().cloned());

    let image_id = if original.image_id.is_empty() {
        synthetic.image_id.clone()
    } else {
        original.image_id.clone()
    };
    Ok(AnnotationSet::new(image_id, merged))
}
