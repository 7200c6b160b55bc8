//! Detection metrics: IoU, precision/recall, AP, mAP50 and mAP50-95.
//!
//! The protocol is the COCO-style one reported by common detector tooling:
//! greedy confidence-ordered matching with one match per ground truth,
//! 101-point interpolated average precision, mAP50-95 averaged over IoU
//! thresholds 0.5 to 0.95 in steps of 0.05, and P/R quoted at the per-class
//! F1-optimal confidence on the primary-threshold curve.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, clip_polygon_convex, polygon_area};
use crate::labels::{Aabb, AnnotationSet, LabelKind, parse_label_file, parse_prediction_file};

/// The ten thresholds behind mAP50-95.
pub const COCO_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Intersection-over-union of two axis-aligned boxes; disjoint boxes give 0.
pub fn iou_aabb(a: &Aabb, b: &Aabb) -> f64 {
    let ix = (a.right().min(b.right()) - a.left().max(b.left())).max(0.0);
    let iy = (a.bottom().min(b.bottom()) - a.top().max(b.top())).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 { 0.0 } else { inter / union }
}

/// Intersection-over-union of two oriented rectangles via convex clipping
/// and shoelace areas.
pub fn iou_obb(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let clipped = clip_polygon_convex(&a.corners(), &b.corners());
    let inter = polygon_area(&clipped).abs();
    let union = a.area() + b.area() - inter;
    if union <= 0.0 { 0.0 } else { inter / union }
}

/// Match predictions of one class against ground truth, image by image.
/// Returns `(confidence, is_true_positive)` per prediction plus the ground
/// truth count. Within an image, predictions are taken in descending
/// confidence; each claims the unmatched ground truth with the highest
/// IoU at or above the threshold.
pub fn match_predictions(
    images: &[(AnnotationSet, AnnotationSet)],
    iou_threshold: f64,
    class_id: u32,
) -> Result<(Vec<(f64, bool)>, usize)> {
    let mut matches = Vec::new();
    let mut gt_count = 0usize;
    for (gts, preds) in images {
        let gt_boxes: Vec<Aabb> = gts
            .annotations
            .iter()
            .filter(|a| a.class_id == class_id)
            .filter_map(|a| a.effective_aabb())
            .collect();
        gt_count += gt_boxes.len();

        let mut class_preds: Vec<(f64, Aabb)> = Vec::new();
        for (idx, ann) in preds.annotations.iter().enumerate() {
            if ann.class_id != class_id {
                continue;
            }
            let confidence = ann.confidence.ok_or_else(|| {
                Error::data(format!(
                    "prediction {idx} of image {:?} has no confidence",
                    preds.image_id
                ))
            })?;
            if let Some(aabb) = ann.effective_aabb() {
                class_preds.push((confidence, aabb));
            }
        }
        // Stable sort keeps file order on confidence ties.
        class_preds.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite confidences"));

        let mut taken = vec![false; gt_boxes.len()];
        for (confidence, pred_box) in class_preds {
            let mut best: Option<(f64, usize)> = None;
            for (gi, gt_box) in gt_boxes.iter().enumerate() {
                if taken[gi] {
                    continue;
                }
                let iou = iou_aabb(&pred_box, gt_box);
                if iou >= iou_threshold && best.is_none_or(|(b, _)| iou > b) {
                    best = Some((iou, gi));
                }
            }
            let is_tp = match best {
                Some((_, gi)) => {
                    taken[gi] = true;
                    true
                }
                None => false,
            };
            matches.push((confidence, is_tp));
        }
    }
    Ok((matches, gt_count))
}

/// 101-point interpolated average precision. `None` when there is no ground
/// truth (the class is then excluded from means).
pub fn average_precision(matches: &[(f64, bool)], gt_count: usize) -> Option<f64> {
    if gt_count == 0 {
        return None;
    }
    if matches.is_empty() {
        return Some(0.0);
    }
    let mut sorted = matches.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite confidences"));

    // Cumulative precision/recall points; recall is non-decreasing.
    let mut points = Vec::with_capacity(sorted.len());
    let mut tp = 0usize;
    for (i, (_, is_tp)) in sorted.iter().enumerate() {
        if *is_tp {
            tp += 1;
        }
        points.push((tp as f64 / gt_count as f64, tp as f64 / (i + 1) as f64));
    }
    // Precision envelope from the right: max precision at recall >= r.
    let mut envelope = points.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i].1 = envelope[i].1.max(envelope[i + 1].1);
    }

    let mut sum = 0.0;
    for k in 0..=100 {
        let r = k as f64 / 100.0;
        // First point with recall >= r carries the envelope value.
        let value = envelope
            .iter()
            .find(|(recall, _)| *recall >= r)
            .map_or(0.0, |(_, p)| *p);
        sum += value;
    }
    Some(sum / 101.0)
}

/// Precision and recall at the F1-optimal confidence cutoff.
fn f1_optimal_pr(matches: &[(f64, bool)], gt_count: usize) -> (f64, f64) {
    if matches.is_empty() || gt_count == 0 {
        return (0.0, 0.0);
    }
    let mut sorted = matches.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite confidences"));
    let mut best = (0.0, 0.0, -1.0); // (p, r, f1)
    let mut tp = 0usize;
    for (i, (_, is_tp)) in sorted.iter().enumerate() {
        if *is_tp {
            tp += 1;
        }
        let p = tp as f64 / (i + 1) as f64;
        let r = tp as f64 / gt_count as f64;
        let f1 = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
        if f1 > best.2 {
            best = (p, r, f1);
        }
    }
    (best.0, best.1)
}

/// Per-class metric row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassEval {
    pub precision: f64,
    pub recall: f64,
    pub ap50: f64,
    pub ap50_95: f64,
    pub gt_count: usize,
    pub image_count: usize,
}

/// Evaluation report mirroring the usual detector summary table.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    /// IoU threshold behind the `ap50`, precision and recall columns
    /// (0.5 unless overridden).
    pub primary_iou: f64,
    pub per_class: BTreeMap<u32, ClassEval>,
    /// Unweighted mean over classes with at least one ground truth;
    /// `gt_count` sums instances and `image_count` counts images holding any
    /// ground truth.
    pub overall: ClassEval,
}

/// Evaluate in-memory (ground truth, prediction) pairs. Pairs are sorted by
/// image id internally, so the result is invariant to input enumeration
/// order.
pub fn evaluate_sets(
    pairs: &[(AnnotationSet, AnnotationSet)],
    primary_iou: f64,
) -> Result<EvalReport> {
    let mut pairs: Vec<&(AnnotationSet, AnnotationSet)> = pairs.iter().collect();
    pairs.sort_by(|a, b| a.0.image_id.cmp(&b.0.image_id));
    let ordered: Vec<(AnnotationSet, AnnotationSet)> = pairs.into_iter().cloned().collect();

    let mut classes: BTreeSet<u32> = BTreeSet::new();
    for (gt, pred) in &ordered {
        classes.extend(gt.annotations.iter().map(|a| a.class_id));
        classes.extend(pred.annotations.iter().map(|a| a.class_id));
    }

    let mut per_class = BTreeMap::new();
    for &class_id in &classes {
        let (primary_matches, gt_count) = match_predictions(&ordered, primary_iou, class_id)?;
        let image_count = ordered
            .iter()
            .filter(|(gt, _)| gt.annotations.iter().any(|a| a.class_id == class_id))
            .count();
        let ap50 = average_precision(&primary_matches, gt_count).unwrap_or(0.0);
        let ap50_95 = if gt_count == 0 {
            0.0
        } else {
            let mut sum = 0.0;
            for threshold in COCO_THRESHOLDS {
                let (matches, n) = match_predictions(&ordered, threshold, class_id)?;
                sum += average_precision(&matches, n).unwrap_or(0.0);
            }
            sum / COCO_THRESHOLDS.len() as f64
        };
        let (precision, recall) = f1_optimal_pr(&primary_matches, gt_count);
        per_class.insert(
            class_id,
            ClassEval {
                precision,
                recall,
                ap50,
                ap50_95,
                gt_count,
                image_count,
            },
        );
    }

    let with_gt: Vec<&ClassEval> = per_class.values().filter(|c| c.gt_count > 0).collect();
    let mean = |f: fn(&ClassEval) -> f64| {
        if with_gt.is_empty() {
            0.0
        } else {
            with_gt.iter().map(|c| f(c)).sum::<f64>() / with_gt.len() as f64
        }
    };
    let overall = ClassEval {
        precision: mean(|c| c.precision),
        recall: mean(|c| c.recall),
        ap50: mean(|c| c.ap50),
        ap50_95: mean(|c| c.ap50_95),
        gt_count: with_gt.iter().map(|c| c.gt_count).sum(),
        image_count: ordered
            .iter()
            .filter(|(gt, _)| !gt.annotations.is_empty())
            .count(),
    };
    Ok(EvalReport {
        primary_iou,
        per_class,
        overall,
    })
}

/// Evaluate label directories: ground-truth files against prediction files
/// with trailing confidences, matched by relative path. Predictions without
/// a ground-truth file count as all-false-positives.
pub fn evaluate(gt_dir: &Path, pred_dir: &Path, primary_iou: f64) -> Result<EvalReport> {
    let gt_files = collect_label_files(gt_dir)?;
    let pred_files = collect_label_files(pred_dir)?;

    let mut stems: BTreeSet<String> = gt_files.keys().cloned().collect();
    stems.extend(pred_files.keys().cloned());

    let mut pairs = Vec::with_capacity(stems.len());
    for stem in stems {
        let gt = match gt_files.get(&stem) {
            Some(path) => read_labels(path, false)?,
            None => AnnotationSet::default(),
        }
        .with_image_id(stem.clone());
        let pred = match pred_files.get(&stem) {
            Some(path) => read_labels(path, true)?,
            None => AnnotationSet::default(),
        }
        .with_image_id(stem.clone());
        pairs.push((gt, pred));
    }
    evaluate_sets(&pairs, primary_iou)
}

fn read_labels(path: &Path, predictions: bool) -> Result<AnnotationSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = if predictions {
        parse_prediction_file(&text, LabelKind::Mixed)
    } else {
        parse_label_file(&text, LabelKind::Mixed)
    };
    parsed.map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

/// Relative stem (path without extension) -> file path, for every `.txt`
/// under the root.
fn collect_label_files(root: &Path) -> Result<BTreeMap<String, std::path::PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| match e.into_io_error() {
            Some(io) => Error::io(root, io),
            None => Error::data(format!("walking {}: filesystem loop", root.display())),
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() {
            continue;
        }
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let rel = path.strip_prefix(root).expect("walked under root");
        let stem = rel.with_extension("").to_string_lossy().replace('\\', "/");
        out.insert(stem, path.to_path_buf());
    }
    Ok(out)
}

/// Render the report as an aligned text table.
pub fn format_report(report: &EvalReport) -> String {
    let map_name = if (report.primary_iou - 0.5).abs() < 1e-12 {
        "mAP50".to_string()
    } else {
        format!("mAP@{:.2}", report.primary_iou)
    };
    let mut out = format!(
        "{:<12} {:>8} {:>10} {:>7} {:>7} {:>8} {:>9}\n",
        "Class", "Images", "Instances", "P", "R", map_name, "mAP50-95"
    );
    let mut row = |name: &str, c: &ClassEval| {
        out.push_str(&format!(
            "{:<12} {:>8} {:>10} {:>7.3} {:>7.3} {:>8.3} {:>9.3}\n",
            name, c.image_count, c.gt_count, c.precision, c.recall, c.ap50, c.ap50_95
        ));
    };
    row("all", &report.overall);
    for (class_id, eval) in &report.per_class {
        row(&class_id.to_string(), eval);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pt;
    use crate::labels::Annotation;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn aabb(cx: f64, cy: f64, w: f64, h: f64) -> Aabb {
        Aabb { cx, cy, w, h }
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> OrientedBox {
        OrientedBox::from_corners([
            Pt::new(x0, y0),
            Pt::new(x1, y0),
            Pt::new(x1, y1),
            Pt::new(x0, y1),
        ])
        .unwrap()
    }

    fn rotated_unit_square(angle_deg: f64) -> OrientedBox {
        let a = angle_deg.to_radians();
        let (c, s) = (a.cos(), a.sin());
        let corners = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
            .map(|(x, y)| Pt::new(x * c - y * s + 0.5, x * s + y * c + 0.5));
        OrientedBox::from_corners(corners).unwrap()
    }

    #[test]
    fn iou_aabb_basics() {
        let a = aabb(0.5, 0.5, 0.2, 0.2);
        assert!((iou_aabb(&a, &a) - 1.0).abs() < 1e-12);
        assert_eq!(iou_aabb(&a, &aabb(0.1, 0.1, 0.05, 0.05)), 0.0);
        // Boxes covering [0,2]^2 and [1,3]^2 in some unit -> IoU 1/7. The
        // pixel-count oracle on a fine grid and direct area arithmetic agree.
        let b1 = aabb(0.1, 0.1, 0.2, 0.2); // [0, 0.2]^2
        let b2 = aabb(0.2, 0.2, 0.2, 0.2); // [0.1, 0.3]^2
        assert!((iou_aabb(&b1, &b2) - 1.0 / 7.0).abs() < 1e-12);
        let grid_iou = {
            let n = 3000usize;
            let (mut inter, mut union) = (0usize, 0usize);
            for gy in 0..n {
                for gx in 0..n {
                    let (x, y) = ((gx as f64 + 0.5) / 10000.0, (gy as f64 + 0.5) / 10000.0);
                    let in1 = x < 0.2 && y < 0.2;
                    let in2 = (0.1..0.3).contains(&x) && (0.1..0.3).contains(&y);
                    inter += usize::from(in1 && in2);
                    union += usize::from(in1 || in2);
                }
            }
            inter as f64 / union as f64
        };
        assert!(
            (grid_iou - 1.0 / 7.0).abs() < 1e-3,
            "grid oracle {grid_iou}"
        );
    }

    #[test]
    fn iou_obb_identical_and_disjoint() {
        let r = rotated_unit_square(37.0);
        assert!((iou_obb(&r, &r) - 1.0).abs() < 1e-12);
        let far = rect(5.0, 5.0, 6.0, 6.0);
        assert_eq!(iou_obb(&r, &far), 0.0);
    }

    #[test]
    fn iou_obb_unit_square_rotated_45() {
        // Octagon-intersection oracle: 2(sqrt(2)-1) / (2 - 2(sqrt(2)-1)).
        let a = rotated_unit_square(0.0);
        let b = rotated_unit_square(45.0);
        let inter = 2.0 * (2.0f64.sqrt() - 1.0);
        let expected = inter / (2.0 - inter);
        let got = iou_obb(&a, &b);
        assert!(
            (got - expected).abs() < 1e-9,
            "got {got} expected {expected}"
        );

        // Monte-Carlo cross-check of the same overlap.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut hits = 0u32;
        let total = 200_000;
        let inside = |p: Pt, angle: f64| {
            let (c, s) = ((-angle).to_radians().cos(), (-angle).to_radians().sin());
            let (x, y) = (p.x - 0.5, p.y - 0.5);
            let (rx, ry) = (x * c - y * s, x * s + y * c);
            rx.abs() <= 0.5 && ry.abs() <= 0.5
        };
        let mut in_union = 0u32;
        for _ in 0..total {
            let p = Pt::new(rng.random_range(-0.3..1.3), rng.random_range(-0.3..1.3));
            let (ia, ib) = (inside(p, 0.0), inside(p, 45.0));
            hits += u32::from(ia && ib);
            in_union += u32::from(ia || ib);
        }
        let mc = hits as f64 / in_union as f64;
        assert!((mc - expected).abs() < 0.01, "monte carlo {mc}");
    }

    #[test]
    fn iou_obb_agrees_with_aabb_on_axis_aligned_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..500 {
            let (x0, y0) = (rng.random_range(0.0..0.6), rng.random_range(0.0..0.6));
            let (w, h) = (rng.random_range(0.05..0.4), rng.random_range(0.05..0.4));
            let (x2, y2) = (rng.random_range(0.0..0.6), rng.random_range(0.0..0.6));
            let (w2, h2) = (rng.random_range(0.05..0.4), rng.random_range(0.05..0.4));
            let a_aabb = aabb(x0 + w / 2.0, y0 + h / 2.0, w, h);
            let b_aabb = aabb(x2 + w2 / 2.0, y2 + h2 / 2.0, w2, h2);
            let a_obb = rect(x0, y0, x0 + w, y0 + h);
            let b_obb = rect(x2, y2, x2 + w2, y2 + h2);
            let diff = (iou_aabb(&a_aabb, &b_aabb) - iou_obb(&a_obb, &b_obb)).abs();
            assert!(diff < 1e-9, "diff {diff}");
        }
    }

    fn pred(class_id: u32, b: Aabb, conf: f64) -> Annotation {
        let mut a = Annotation::from_aabb(class_id, b);
        a.confidence = Some(conf);
        a
    }

    fn image(
        id: &str,
        gts: Vec<Annotation>,
        preds: Vec<Annotation>,
    ) -> (AnnotationSet, AnnotationSet) {
        (AnnotationSet::new(id, gts), AnnotationSet::new(id, preds))
    }

    #[test]
    fn matching_single_true_positive() {
        // IoU 0.6 at threshold 0.5 -> TP.
        let gt = Annotation::from_aabb(0, aabb(0.5, 0.5, 0.2, 0.2));
        // Shift for IoU (w-s)/(w+s) = 0.6 -> s = w/4.
        let p = pred(0, aabb(0.55, 0.5, 0.2, 0.2), 0.9);
        let imgs = vec![image("a", vec![gt], vec![p])];
        let (matches, gt_count) = match_predictions(&imgs, 0.5, 0).unwrap();
        assert_eq!(gt_count, 1);
        assert_eq!(matches, vec![(0.9, true)]);
    }

    #[test]
    fn one_match_per_ground_truth() {
        let gt = Annotation::from_aabb(0, aabb(0.5, 0.5, 0.2, 0.2));
        let p1 = pred(0, aabb(0.5, 0.5, 0.2, 0.2), 0.8);
        let p2 = pred(0, aabb(0.51, 0.5, 0.2, 0.2), 0.95);
        let imgs = vec![image("a", vec![gt], vec![p1, p2])];
        let (matches, _) = match_predictions(&imgs, 0.5, 0).unwrap();
        // Higher confidence claims the ground truth; the other is FP.
        assert_eq!(matches, vec![(0.95, true), (0.8, false)]);
    }

    #[test]
    fn below_threshold_is_false_positive() {
        let gt = Annotation::from_aabb(0, aabb(0.5, 0.5, 0.2, 0.2));
        // IoU (w-s)/(w+s) with s chosen for 0.45.
        let s = 0.2 * (1.0 - 0.45) / (1.0 + 0.45);
        let p = pred(0, aabb(0.5 + s, 0.5, 0.2, 0.2), 0.9);
        let imgs = vec![image("a", vec![gt], vec![p])];
        let (matches, _) = match_predictions(&imgs, 0.5, 0).unwrap();
        assert_eq!(matches, vec![(0.9, false)]);
    }

    #[test]
    fn prediction_without_confidence_rejected() {
        let gt = Annotation::from_aabb(0, aabb(0.5, 0.5, 0.2, 0.2));
        let p = Annotation::from_aabb(0, aabb(0.5, 0.5, 0.2, 0.2));
        let imgs = vec![image("a", vec![gt], vec![p])];
        assert!(match_predictions(&imgs, 0.5, 0).is_err());
    }

    #[test]
    fn ap_perfect_detector() {
        assert_eq!(average_precision(&[(1.0, true)], 1), Some(1.0));
    }

    #[test]
    fn ap_zero_cases() {
        assert_eq!(average_precision(&[], 3), Some(0.0));
        assert_eq!(average_precision(&[(0.9, true)], 0), None);
    }

    #[test]
    fn ap_hand_computed_envelope() {
        // 2 ground truths, matches in confidence order TP, FP, TP:
        // envelope is 1.0 up to recall 0.5 (51 grid points) and 2/3 beyond
        // (50 points).
        let matches = [(0.9, true), (0.8, false), (0.7, true)];
        let expected = (51.0 + 50.0 * (2.0 / 3.0)) / 101.0;
        let ap = average_precision(&matches, 2).unwrap();
        assert!((ap - expected).abs() < 1e-9, "ap {ap} expected {expected}");
    }

    #[test]
    fn ap_monotone_when_fp_removed() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..200 {
            let n = rng.random_range(2usize..20);
            let gt = rng.random_range(1usize..10);
            let matches: Vec<(f64, bool)> = (0..n)
                .map(|_| (rng.random_range(0.0..=1.0), rng.random::<bool>()))
                .collect();
            let Some(fp_idx) = matches.iter().position(|(_, tp)| !tp) else {
                continue;
            };
            let tp_total = matches.iter().filter(|(_, tp)| *tp).count().min(gt);
            if tp_total == 0 {
                continue;
            }
            let mut reduced = matches.clone();
            reduced.remove(fp_idx);
            let before = average_precision(&matches, gt).unwrap();
            let after = average_precision(&reduced, gt).unwrap();
            assert!(after >= before - 1e-12, "removing an FP lowered AP");
        }
    }

    #[test]
    fn evaluate_identical_predictions_all_ones() {
        let mut pairs = Vec::new();
        for i in 0..10 {
            let gts = vec![
                Annotation::from_aabb(0, aabb(0.3, 0.3, 0.2, 0.2)),
                Annotation::from_aabb(1, aabb(0.7, 0.7, 0.15, 0.15)),
            ];
            let preds = gts
                .iter()
                .map(|g| pred(g.class_id, g.aabb.unwrap(), 1.0))
                .collect();
            pairs.push(image(&format!("img_{i}"), gts, preds));
        }
        let report = evaluate_sets(&pairs, 0.5).unwrap();
        for eval in report.per_class.values() {
            assert_eq!(eval.precision, 1.0);
            assert_eq!(eval.recall, 1.0);
            assert_eq!(eval.ap50, 1.0);
            assert_eq!(eval.ap50_95, 1.0);
        }
        assert_eq!(report.overall.ap50, 1.0);
        assert_eq!(report.overall.gt_count, 20);
        assert_eq!(report.overall.image_count, 10);
    }

    #[test]
    fn evaluate_no_predictions_zero_recall() {
        let pairs = vec![image(
            "a",
            vec![Annotation::from_aabb(0, aabb(0.5, 0.5, 0.2, 0.2))],
            vec![],
        )];
        let report = evaluate_sets(&pairs, 0.5).unwrap();
        let c = &report.per_class[&0];
        assert_eq!((c.recall, c.ap50, c.ap50_95), (0.0, 0.0, 0.0));
        assert_eq!(c.gt_count, 1);
    }

    #[test]
    fn map_50_95_never_exceeds_map50() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..100 {
            let mut pairs = Vec::new();
            for i in 0..rng.random_range(1usize..5) {
                let mut gts = Vec::new();
                let mut preds = Vec::new();
                for _ in 0..rng.random_range(0usize..6) {
                    let b = aabb(
                        rng.random_range(0.2..0.8),
                        rng.random_range(0.2..0.8),
                        rng.random_range(0.05..0.3),
                        rng.random_range(0.05..0.3),
                    );
                    gts.push(Annotation::from_aabb(rng.random_range(0..3), b));
                }
                for _ in 0..rng.random_range(0usize..6) {
                    let b = aabb(
                        rng.random_range(0.2..0.8),
                        rng.random_range(0.2..0.8),
                        rng.random_range(0.05..0.3),
                        rng.random_range(0.05..0.3),
                    );
                    preds.push(pred(rng.random_range(0..3), b, rng.random_range(0.0..=1.0)));
                }
                pairs.push(image(&format!("img_{i}"), gts, preds));
            }
            let report = evaluate_sets(&pairs, 0.5).unwrap();
            for eval in report.per_class.values() {
                assert!(
                    eval.ap50_95 <= eval.ap50 + 1e-12,
                    "mAP50-95 {} > mAP50 {}",
                    eval.ap50_95,
                    eval.ap50
                );
            }
        }
    }

    #[test]
    fn evaluate_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let mut pairs = Vec::new();
        for i in 0..20 {
            let b = aabb(rng.random_range(0.3..0.7), 0.5, 0.2, 0.2);
            let off = rng.random_range(-0.02..0.02);
            pairs.push(image(
                &format!("img_{i:02}"),
                vec![Annotation::from_aabb(0, b)],
                vec![pred(
                    0,
                    aabb(b.cx + off, b.cy, b.w, b.h),
                    rng.random_range(0.1..1.0),
                )],
            ));
        }
        let forward = evaluate_sets(&pairs, 0.5).unwrap();
        pairs.reverse();
        let backward = evaluate_sets(&pairs, 0.5).unwrap();
        assert_eq!(forward.per_class, backward.per_class);
    }

    #[test]
    fn jittered_boxes_keep_perfect_map50() {
        // Jitter-vs-IoU oracle: shifting a w-pixel box along one axis by s
        // pixels gives IoU (w - s)/(w + s), which stays at or above 0.5
        // whenever s <= w/3. With 2% of a 640-wide image (12.8 px) and boxes
        // of at least 41 px, that bound holds, so mAP50 must stay 1.0.
        let (img_w, img_h) = (640.0, 512.0);
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut pairs = Vec::new();
        for i in 0..50 {
            let w_px = rng.random_range(41.0..200.0);
            let h_px = rng.random_range(41.0..200.0);
            let cx = rng.random_range(220.0..420.0) / img_w;
            let cy = rng.random_range(220.0..290.0) / img_h;
            let b = aabb(cx, cy, w_px / img_w, h_px / img_h);
            let shift_px = rng.random_range(0.0..=12.8);
            let horizontal = rng.random::<bool>();
            let worst_iou = if horizontal {
                (w_px - shift_px) / (w_px + shift_px)
            } else {
                (h_px - shift_px) / (h_px + shift_px)
            };
            assert!(worst_iou >= 0.5, "oracle violated: {worst_iou}");
            let shifted = if horizontal {
                aabb(b.cx + shift_px / img_w, b.cy, b.w, b.h)
            } else {
                aabb(b.cx, b.cy + shift_px / img_h, b.w, b.h)
            };
            pairs.push(image(
                &format!("img_{i}"),
                vec![Annotation::from_aabb(0, b)],
                vec![pred(0, shifted, rng.random_range(0.5..1.0))],
            ));
        }
        let report = evaluate_sets(&pairs, 0.5).unwrap();
        assert_eq!(report.per_class[&0].ap50, 1.0);
    }

    #[test]
    fn directory_evaluation_handles_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let gt = dir.path().join("gt");
        let pr = dir.path().join("pred");
        std::fs::create_dir_all(gt.join("sub")).unwrap();
        std::fs::create_dir_all(pr.join("sub")).unwrap();
        std::fs::write(gt.join("a.txt"), "0 0.5 0.5 0.2 0.2\n").unwrap();
        std::fs::write(pr.join("a.txt"), "0 0.5 0.5 0.2 0.2 0.9\n").unwrap();
        // Ground truth without predictions.
        std::fs::write(gt.join("sub/b.txt"), "1 0.4 0.4 0.1 0.1\n").unwrap();
        // Prediction without ground truth: all FP. Ranked above the true
        // positive, it must drag AP below 1.
        std::fs::write(pr.join("sub/c.txt"), "0 0.6 0.6 0.2 0.2 0.95\n").unwrap();
        let report = evaluate(&gt, &pr, 0.5).unwrap();
        assert_eq!(report.per_class[&0].gt_count, 1);
        assert!((report.per_class[&0].ap50 - 0.5).abs() < 1e-12);
        assert_eq!(report.per_class[&1].recall, 0.0);
        let table = format_report(&report);
        assert!(table.contains("mAP50"), "{table}");
        assert!(table.starts_with("Class"), "{table}");
    }

    #[test]
    fn malformed_prediction_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let gt = dir.path().join("gt");
        let pr = dir.path().join("pred");
        std::fs::create_dir_all(&gt).unwrap();
        std::fs::create_dir_all(&pr).unwrap();
        std::fs::write(gt.join("a.txt"), "0 0.5 0.5 0.2 0.2\n").unwrap();
        std::fs::write(pr.join("a.txt"), "0 0.5 0.5 0.2\n").unwrap();
        assert!(evaluate(&gt, &pr, 0.5).is_err());
    }
}
