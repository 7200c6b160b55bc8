//! Pixel masks and their derived annotations.
//!
//! Masks come straight from the renderer's object-id buffer (geometry ground
//! truth, independent of background content). The outer boundary of each
//! 4-connected component is traced along pixel edges, so a traced polygon is
//! exactly the outline of the union of its pixel squares, then simplified
//! with Douglas-Peucker.

use crate::error::{Error, Result};
use crate::geometry::{Pt, polygon_area};
use crate::labels::Aabb;
use crate::render::RenderOutput;

/// A binary per-pixel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut mask = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-bounds coordinates read as unset.
    fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < self.width as i64
            && y < self.height as i64
            && self.get(x as u32, y as u32)
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// 0/255 image for mask dumps.
    pub fn to_image(&self) -> crate::image::ThermalImage {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        crate::image::ThermalImage::from_raw(self.width, self.height, data)
            .expect("buffer sized to dimensions")
    }
}

/// Bits set exactly where the render's object-id buffer matches `object_id`.
pub fn extract_mask(render: &RenderOutput, object_id: u32) -> PixelMask {
    debug_assert!(object_id > 0);
    PixelMask {
        width: render.width,
        height: render.height,
        bits: render.object_id.iter().map(|&id| id == object_id).collect(),
    }
}

/// Tight normalized AABB over the set pixels, using pixel-edge extents
/// (min..max+1). `None` for an empty mask: the caller emits an empty label
/// file.
pub fn mask_to_aabb(mask: &PixelMask) -> Option<Aabb> {
    let mut x0 = u32::MAX;
    let mut y0 = u32::MAX;
    let mut x1 = 0u32;
    let mut y1 = 0u32;
    let mut any = false;
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.get(x, y) {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if !any {
        return None;
    }
    let (w, h) = (mask.width as f64, mask.height as f64);
    Some(Aabb {
        cx: (x0 + x1 + 1) as f64 / 2.0 / w,
        cy: (y0 + y1 + 1) as f64 / 2.0 / h,
        w: (x1 + 1 - x0) as f64 / w,
        h: (y1 + 1 - y0) as f64 / h,
    })
}

/// Corner points (pixel-edge lattice) of every boundary pixel of the mask.
/// The convex hull of these equals the hull of the union of all set pixel
/// squares, so an OBB fitted to them respects frustum clipping.
pub fn mask_corner_points(mask: &PixelMask) -> Vec<Pt> {
    let mut corners = std::collections::BTreeSet::new();
    for y in 0..mask.height {
        for x in 0..mask.width {
            if !mask.get(x, y) {
                continue;
            }
            let (xi, yi) = (x as i64, y as i64);
            let interior = mask.get_i(xi - 1, yi)
                && mask.get_i(xi + 1, yi)
                && mask.get_i(xi, yi - 1)
                && mask.get_i(xi, yi + 1);
            if interior {
                continue;
            }
            for (dx, dy) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                corners.insert((x + dx, y + dy));
            }
        }
    }
    corners
        .into_iter()
        .map(|(x, y)| Pt::new(x as f64, y as f64))
        .collect()
}

/// Outer boundary polygon per 4-connected component, as pixel-lattice
/// coordinates, simplified with Douglas-Peucker at `simplify_eps` (pixels).
/// Polygons keep at least 3 vertices and positive orientation; holes are not
/// emitted.
pub fn mask_to_polygons(mask: &PixelMask, simplify_eps: f64) -> Vec<Vec<Pt>> {
    let labels = label_components(mask);
    let mut polygons = Vec::new();
    let mut seen = Vec::new();
    for y in 0..mask.height {
        for x in 0..mask.width {
            let label = labels[y as usize * mask.width as usize + x as usize];
            if label == 0 || seen.contains(&label) {
                continue;
            }
            seen.push(label);
            // (x, y) is the topmost-leftmost pixel of this component by scan
            // order; its top-left corner starts the boundary walk.
            let ring = trace_boundary(mask, &labels, label, x, y);
            let simplified = simplify_ring(&ring, simplify_eps);
            debug_assert!(polygon_area(&simplified) > 0.0);
            polygons.push(simplified);
        }
    }
    polygons
}

/// 4-connected component labels, 0 for unset pixels, 1.. in scan order.
fn label_components(mask: &PixelMask) -> Vec<u32> {
    let w = mask.width as usize;
    let mut labels = vec![0u32; w * mask.height as usize];
    let mut next = 0u32;
    let mut stack: Vec<(u32, u32)> = Vec::new();
    for y in 0..mask.height {
        for x in 0..mask.width {
            if !mask.get(x, y) || labels[y as usize * w + x as usize] != 0 {
                continue;
            }
            next += 1;
            stack.push((x, y));
            labels[y as usize * w + x as usize] = next;
            while let Some((cx, cy)) = stack.pop() {
                let neighbors = [
                    (cx.wrapping_sub(1), cy),
                    (cx + 1, cy),
                    (cx, cy.wrapping_sub(1)),
                    (cx, cy + 1),
                ];
                for (nx, ny) in neighbors {
                    if nx < mask.width
                        && ny < mask.height
                        && mask.get(nx, ny)
                        && labels[ny as usize * w + nx as usize] == 0
                    {
                        labels[ny as usize * w + nx as usize] = next;
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    labels
}

/// Directions on the pixel-corner lattice, in clockwise-on-screen order so
/// `(d+1) % 4` is a right turn.
const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)]; // E S W N

/// Walk the outer boundary of one component along pixel edges, keeping the
/// interior on the right; the result has positive orientation. Corner pinch
/// points resolve by taking the sharpest right turn, which may visit a corner
/// twice but never crosses into another lobe's interior.
fn trace_boundary(
    mask: &PixelMask,
    labels: &[u32],
    label: u32,
    start_x: u32,
    start_y: u32,
) -> Vec<Pt> {
    let w = mask.width as usize;
    let in_component = |x: i64, y: i64| -> bool {
        x >= 0
            && y >= 0
            && x < mask.width as i64
            && y < mask.height as i64
            && labels[y as usize * w + x as usize] == label
    };
    // An outgoing boundary edge exists at corner (x, y) in direction d iff
    // the pixel owning that edge is in the component and its neighbor across
    // the edge is not.
    let edge_exists = |x: i64, y: i64, d: usize| -> bool {
        match d {
            0 => in_component(x, y) && !in_component(x, y - 1), // E: top edge
            1 => in_component(x - 1, y) && !in_component(x, y), // S: right edge
            2 => in_component(x - 1, y - 1) && !in_component(x - 1, y), // W: bottom edge
            _ => in_component(x, y - 1) && !in_component(x - 1, y - 1), // N: left edge
        }
    };

    let start = (start_x as i64, start_y as i64);
    let start_dir = 0usize; // east along the top edge of the seed pixel
    debug_assert!(edge_exists(start.0, start.1, start_dir));

    let mut ring: Vec<Pt> = Vec::new();
    let (mut cx, mut cy) = start;
    let mut dir = start_dir;
    let limit = 4 * (mask.width as usize + 1) * (mask.height as usize + 1) + 8;
    for _ in 0..limit {
        push_corner(&mut ring, Pt::new(cx as f64, cy as f64));
        cx += DIRS[dir].0;
        cy += DIRS[dir].1;
        // Prefer the sharpest right turn, then straight, then left.
        let mut next_dir = None;
        for turn in [1usize, 0, 3] {
            let cand = (dir + turn) % 4;
            if edge_exists(cx, cy, cand) {
                next_dir = Some(cand);
                break;
            }
        }
        dir = next_dir.expect("boundary walk must continue until closed");
        if (cx, cy) == start && dir == start_dir {
            break;
        }
    }
    // Collapse a collinear wrap-around between the last and first corners.
    if ring.len() >= 3 {
        let n = ring.len();
        if collinear(ring[n - 2], ring[n - 1], ring[0]) {
            ring.pop();
        }
    }
    ring
}

/// Append a corner, collapsing collinear runs as the walk goes.
fn push_corner(ring: &mut Vec<Pt>, p: Pt) {
    if ring.len() >= 2 && collinear(ring[ring.len() - 2], ring[ring.len() - 1], p) {
        *ring.last_mut().unwrap() = p;
    } else {
        ring.push(p);
    }
}

fn collinear(a: Pt, b: Pt, c: Pt) -> bool {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) == 0.0
}

/// Simplify a closed ring: split at the vertex farthest from vertex 0 and
/// Douglas-Peucker both arcs. Falls back to the unsimplified ring if the
/// result would degenerate below 3 vertices.
fn simplify_ring(ring: &[Pt], eps: f64) -> Vec<Pt> {
    if eps <= 0.0 || ring.len() <= 4 {
        return ring.to_vec();
    }
    let far = (1..ring.len())
        .max_by(|&a, &b| {
            let da = dist2(ring[a], ring[0]);
            let db = dist2(ring[b], ring[0]);
            da.partial_cmp(&db).expect("finite distances")
        })
        .expect("ring has vertices");
    let mut arc1 = douglas_peucker(&ring[..=far], eps);
    let mut arc2_pts: Vec<Pt> = ring[far..].to_vec();
    arc2_pts.push(ring[0]);
    let arc2 = douglas_peucker(&arc2_pts, eps);
    arc1.extend_from_slice(&arc2[1..arc2.len() - 1]);
    if arc1.len() < 3 {
        return ring.to_vec();
    }
    arc1
}

fn dist2(a: Pt, b: Pt) -> f64 {
    (a.x - b.x).powi(2) + (a.y - b.y).powi(2)
}

/// Douglas-Peucker polyline simplification keeping both endpoints; points
/// farther than `eps` from the chord survive.
pub fn douglas_peucker(points: &[Pt], eps: f64) -> Vec<Pt> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0usize, points.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (a, b) = (points[lo], points[hi]);
        let chord = dist2(a, b).sqrt();
        let mut best = (0.0f64, lo);
        for (i, &p) in points.iter().enumerate().take(hi).skip(lo + 1) {
            let d = if chord == 0.0 {
                dist2(p, a).sqrt()
            } else {
                ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)).abs() / chord
            };
            if d > best.0 {
                best = (d, i);
            }
        }
        if best.0 > eps {
            keep[best.1] = true;
            stack.push((lo, best.1));
            stack.push((best.1, hi));
        }
    }
    points
        .iter()
        .zip(&keep)
        .filter_map(|(&p, &k)| k.then_some(p))
        .collect()
}

/// Error helper for callers that require a non-empty mask.
pub fn require_non_empty(mask: &PixelMask) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::data("mask is empty"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Even-odd point-in-polygon used as the re-rasterization oracle.
    fn polygon_contains(poly: &[Pt], x: f64, y: f64) -> bool {
        let mut inside = false;
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            if (a.y > y) != (b.y > y) {
                let t = (y - a.y) / (b.y - a.y);
                if x < a.x + t * (b.x - a.x) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn rasterize(polys: &[Vec<Pt>], w: u32, h: u32) -> PixelMask {
        PixelMask::from_fn(w, h, |x, y| {
            polys
                .iter()
                .any(|p| polygon_contains(p, x as f64 + 0.5, y as f64 + 0.5))
        })
    }

    fn mask_iou(a: &PixelMask, b: &PixelMask) -> f64 {
        let mut inter = 0usize;
        let mut union = 0usize;
        for y in 0..a.height() {
            for x in 0..a.width() {
                let (pa, pb) = (a.get(x, y), b.get(x, y));
                if pa && pb {
                    inter += 1;
                }
                if pa || pb {
                    union += 1;
                }
            }
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    #[test]
    fn single_pixel_aabb() {
        let mask = PixelMask::from_fn(640, 512, |x, y| x == 10 && y == 20);
        let b = mask_to_aabb(&mask).unwrap();
        assert!((b.w - 1.0 / 640.0).abs() < 1e-15);
        assert!((b.h - 1.0 / 512.0).abs() < 1e-15);
        assert!((b.cx - 10.5 / 640.0).abs() < 1e-15);
        assert!((b.cy - 20.5 / 512.0).abs() < 1e-15);
    }

    #[test]
    fn full_frame_aabb() {
        let mask = PixelMask::from_fn(64, 32, |_, _| true);
        let b = mask_to_aabb(&mask).unwrap();
        assert_eq!((b.cx, b.cy, b.w, b.h), (0.5, 0.5, 1.0, 1.0));
        assert!(mask_to_aabb(&PixelMask::new(8, 8)).is_none());
    }

    #[test]
    fn every_set_pixel_inside_aabb() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let mask = random_blob(&mut rng, 64, 48);
            if mask.is_empty() {
                continue;
            }
            let b = mask_to_aabb(&mask).unwrap();
            let (x0, x1) = (b.left() * 64.0, b.right() * 64.0);
            let (y0, y1) = (b.top() * 48.0, b.bottom() * 48.0);
            for y in 0..48 {
                for x in 0..64 {
                    if mask.get(x, y) {
                        let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
                        assert!(cx > x0 && cx < x1 && cy > y0 && cy < y1);
                    }
                }
            }
        }
    }

    #[test]
    fn solid_square_traces_to_four_vertices() {
        let mask = PixelMask::from_fn(32, 32, |x, y| (5..15).contains(&x) && (7..17).contains(&y));
        let polys = mask_to_polygons(&mask, 0.5);
        assert_eq!(polys.len(), 1);
        let poly = &polys[0];
        assert_eq!(poly.len(), 4, "{poly:?}");
        let xs: Vec<f64> = poly.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = poly.iter().map(|p| p.y).collect();
        assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), 5.0);
        assert_eq!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 15.0);
        assert_eq!(ys.iter().cloned().fold(f64::INFINITY, f64::min), 7.0);
        assert_eq!(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 17.0);
        assert!(polygon_area(poly) > 0.0);
    }

    #[test]
    fn two_blobs_give_two_polygons() {
        let mask = PixelMask::from_fn(32, 16, |x, y| {
            ((2..6).contains(&x) && (2..6).contains(&y))
                || ((20..30).contains(&x) && (5..9).contains(&y))
        });
        let polys = mask_to_polygons(&mask, 0.5);
        assert_eq!(polys.len(), 2);
    }

    #[test]
    fn single_pixel_polygon_survives_simplification() {
        let mask = PixelMask::from_fn(8, 8, |x, y| x == 3 && y == 4);
        let polys = mask_to_polygons(&mask, 0.5);
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].len(), 4);
    }

    #[test]
    fn diagonal_pinch_traces_without_panic() {
        // Two lobes joined around a corner pinch at (2,1).
        let set = [(0, 0), (1, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1)];
        let mask = PixelMask::from_fn(4, 4, |x, y| set.contains(&(x, y)));
        let polys = mask_to_polygons(&mask, 0.0);
        assert_eq!(polys.len(), 1);
        let area = polygon_area(&polys[0]);
        // The right-turn rule walks around the pinched hole at (1,1), so the
        // traced outline covers exactly the 7 set pixels.
        assert_eq!(area, 7.0);
    }

    fn random_blob(rng: &mut ChaCha8Rng, w: u32, h: u32) -> PixelMask {
        // Union of a few random rectangles: connected-ish organic shapes.
        let mut mask = PixelMask::new(w, h);
        for _ in 0..rng.random_range(1..5) {
            let x0 = rng.random_range(0..w - 4);
            let y0 = rng.random_range(0..h - 4);
            let bw = rng.random_range(2..(w - x0).min(20));
            let bh = rng.random_range(2..(h - y0).min(20));
            for y in y0..y0 + bh {
                for x in x0..x0 + bw {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }

    #[test]
    fn reraster_iou_at_half_pixel_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let mask = random_blob(&mut rng, 64, 48);
            if mask.is_empty() {
                continue;
            }
            let polys = mask_to_polygons(&mask, 0.5);
            let back = rasterize(&polys, 64, 48);
            let iou = mask_iou(&mask, &back);
            assert!(iou >= 0.95, "IoU {iou} too low");
        }
    }

    #[test]
    fn boundary_walk_survives_noise_masks() {
        // Salt-and-pepper masks maximize diagonal adjacencies and pinch
        // corners; the walk must terminate and every set pixel must land
        // inside some traced polygon (holes are intentionally filled).
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for case in 0..500 {
            let density = rng.random_range(0.15..0.85);
            let mask = PixelMask::from_fn(24, 16, |_, _| rng.random::<f64>() < density);
            let polys = mask_to_polygons(&mask, 0.0);
            for poly in &polys {
                assert!(poly.len() >= 3, "case {case}");
                assert!(polygon_area(poly) > 0.0, "case {case}");
            }
            for y in 0..16 {
                for x in 0..24 {
                    if mask.get(x, y) {
                        let hit = polys
                            .iter()
                            .any(|p| polygon_contains(p, x as f64 + 0.5, y as f64 + 0.5));
                        assert!(
                            hit,
                            "set pixel ({x},{y}) outside all polygons (case {case})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn extract_mask_matches_object_ids() {
        let mut render = RenderOutput {
            width: 4,
            height: 3,
            intensity: vec![0.0; 12],
            alpha: vec![0.0; 12],
            object_id: vec![0; 12],
            depth: vec![f32::INFINITY; 12],
        };
        for i in [1usize, 5, 6] {
            render.object_id[i] = 1;
            render.alpha[i] = 1.0;
            render.depth[i] = 2.0;
        }
        let mask = extract_mask(&render, 1);
        assert_eq!(mask.count(), 3);
        assert!(mask.get(1, 0) && mask.get(1, 1) && mask.get(2, 1));
        // Mask bits are a subset of alpha > 0.
        for y in 0..3 {
            for x in 0..4 {
                if mask.get(x, y) {
                    assert!(render.alpha[render.pixel_index(x, y)] > 0.0);
                }
            }
        }
        assert!(extract_mask(&render, 2).is_empty());
    }

    #[test]
    fn corner_points_cover_hull_of_pixel_squares() {
        let mask = PixelMask::from_fn(16, 16, |x, y| (2..5).contains(&x) && (3..9).contains(&y));
        let corners = mask_corner_points(&mask);
        // Extremes are the rectangle's outer corners.
        assert!(corners.contains(&Pt::new(2.0, 3.0)));
        assert!(corners.contains(&Pt::new(5.0, 9.0)));
        // Interior-only corners are skipped, every returned point is on the
        // lattice within bounds.
        for p in &corners {
            assert!(p.x >= 2.0 && p.x <= 5.0 && p.y >= 3.0 && p.y <= 9.0);
        }
    }

    #[test]
    fn douglas_peucker_keeps_extremes() {
        let line: Vec<Pt> = (0..=10).map(|i| Pt::new(i as f64, 0.0)).collect();
        assert_eq!(douglas_peucker(&line, 0.5).len(), 2);
        let mut bent = line.clone();
        bent[5] = Pt::new(5.0, 2.0);
        let kept = douglas_peucker(&bent, 0.5);
        assert!(kept.contains(&Pt::new(5.0, 2.0)));
        assert_eq!(kept.first(), Some(&Pt::new(0.0, 0.0)));
        assert_eq!(kept.last(), Some(&Pt::new(10.0, 0.0)));
    }
}
