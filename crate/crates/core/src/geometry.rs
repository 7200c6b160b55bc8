//! 2D computational geometry: convex hulls, minimum-area enclosing rectangles
//! and convex polygon clipping.
//!
//! Coordinates live in image space (x right, y down). Polygon orientation is
//! defined by the shoelace sign computed directly on stored coordinates;
//! "counter-clockwise" here means positive signed area in that frame.

use crate::error::{Error, Result};

/// A 2D point in pixel (or normalized) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pt {
    pub x: f64,
    pub y: f64,
}

impl Pt {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Cross product of (b - a) and (c - a).
pub fn cross(a: Pt, b: Pt, c: Pt) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Signed polygon area (shoelace). Positive for counter-clockwise input.
pub fn polygon_area(points: &[Pt]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        sum += a.x * b.y - b.x * a.y;
    }
    sum / 2.0
}

/// Convex hull via Andrew's monotone chain, counter-clockwise, with collinear
/// points excluded from the boundary. A single input point yields a 1-point
/// hull; collinear input collapses to the 2 extreme points.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut pts: Vec<Pt> = points.to_vec();
    pts.sort_by(|a, b| {
        (a.x, a.y)
            .partial_cmp(&(b.x, b.y))
            .expect("finite coordinates")
    });
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() <= 2 {
        return pts;
    }

    let mut hull: Vec<Pt> = Vec::with_capacity(pts.len() * 2);
    // Lower hull, then upper hull; strict turns drop collinear points.
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area enclosing rectangle, corners in counter-clockwise order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    corners: [Pt; 4],
}

impl OrientedBox {
    /// Build from 4 corners, validating that they form a rectangle: adjacent
    /// sides orthogonal and opposite sides equal within 1e-6 relative
    /// tolerance, with positive area.
    pub fn from_corners(corners: [Pt; 4]) -> Result<Self> {
        let e: Vec<(f64, f64)> = (0..4)
            .map(|i| {
                let a = corners[i];
                let b = corners[(i + 1) % 4];
                (b.x - a.x, b.y - a.y)
            })
            .collect();
        let len: Vec<f64> = e.iter().map(|(x, y)| (x * x + y * y).sqrt()).collect();
        let scale = len.iter().cloned().fold(0.0, f64::max);
        if scale <= 0.0 {
            return Err(Error::data("oriented box has zero extent"));
        }
        let tol = 1e-6 * scale;
        for i in 0..4 {
            let j = (i + 1) % 4;
            let dot = e[i].0 * e[j].0 + e[i].1 * e[j].1;
            if dot.abs() > tol * scale {
                return Err(Error::data("oriented box corners are not orthogonal"));
            }
        }
        if (len[0] - len[2]).abs() > tol || (len[1] - len[3]).abs() > tol {
            return Err(Error::data("oriented box opposite sides differ"));
        }
        let area = polygon_area(&corners);
        if area.abs() <= 0.0 {
            return Err(Error::data("oriented box has zero area"));
        }
        let corners = if area > 0.0 {
            corners
        } else {
            [corners[0], corners[3], corners[2], corners[1]]
        };
        Ok(Self { corners })
    }

    pub fn corners(&self) -> [Pt; 4] {
        self.corners
    }

    pub fn center(&self) -> Pt {
        let sx: f64 = self.corners.iter().map(|p| p.x).sum();
        let sy: f64 = self.corners.iter().map(|p| p.y).sum();
        Pt::new(sx / 4.0, sy / 4.0)
    }

    /// Side lengths (first edge, second edge).
    pub fn extents(&self) -> (f64, f64) {
        let d = |a: Pt, b: Pt| ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        (
            d(self.corners[0], self.corners[1]),
            d(self.corners[1], self.corners[2]),
        )
    }

    /// Orientation of the first edge, folded into [0, 90) degrees.
    pub fn angle_deg(&self) -> f64 {
        let dx = self.corners[1].x - self.corners[0].x;
        let dy = self.corners[1].y - self.corners[0].y;
        dy.atan2(dx).to_degrees().rem_euclid(90.0)
    }

    pub fn area(&self) -> f64 {
        let (a, b) = self.extents();
        a * b
    }
}

/// Minimum-area enclosing rectangle by rotating calipers over hull edges: the
/// optimum has one side collinear with a hull edge, so every edge direction
/// is tried and ties go to the smallest angle in [0, 90) degrees.
///
/// Degenerate hulls (1-2 points) get a 1-pixel minimum extent along the
/// collapsed axis.
pub fn min_area_rect(hull: &[Pt]) -> Result<OrientedBox> {
    match hull.len() {
        0 => Err(Error::data("cannot fit a rectangle to an empty point set")),
        1 => {
            let p = hull[0];
            OrientedBox::from_corners([
                Pt::new(p.x - 0.5, p.y - 0.5),
                Pt::new(p.x + 0.5, p.y - 0.5),
                Pt::new(p.x + 0.5, p.y + 0.5),
                Pt::new(p.x - 0.5, p.y + 0.5),
            ])
        }
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
            if len == 0.0 {
                return min_area_rect(&hull[..1]);
            }
            let ux = (b.x - a.x) / len;
            let uy = (b.y - a.y) / len;
            // Half-pixel extent across the segment.
            let (px, py) = (-uy * 0.5, ux * 0.5);
            OrientedBox::from_corners([
                Pt::new(a.x - px, a.y - py),
                Pt::new(b.x - px, b.y - py),
                Pt::new(b.x + px, b.y + py),
                Pt::new(a.x + px, a.y + py),
            ])
        }
        _ => {
            let mut best: Option<(f64, f64, usize)> = None; // (area, angle, edge index)
            for i in 0..hull.len() {
                let (area, angle) = rect_for_edge(hull, i).0;
                let better = match best {
                    None => true,
                    Some((ba, bang, _)) => {
                        area < ba * (1.0 - 1e-12)
                            || (area <= ba * (1.0 + 1e-12) && angle < bang - 1e-12)
                    }
                };
                if better {
                    best = Some((area, angle, i));
                }
            }
            let (_, _, idx) = best.expect("non-empty hull");
            let (_, corners) = rect_for_edge(hull, idx);
            OrientedBox::from_corners(corners)
        }
    }
}

/// Enclosing rectangle aligned with hull edge `i`; returns ((area, canonical
/// angle), corners).
fn rect_for_edge(hull: &[Pt], i: usize) -> ((f64, f64), [Pt; 4]) {
    let a = hull[i];
    let b = hull[(i + 1) % hull.len()];
    let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
    let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
    let (vx, vy) = (-uy, ux);
    let mut umin = f64::INFINITY;
    let mut umax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for p in hull {
        let u = p.x * ux + p.y * uy;
        let v = p.x * vx + p.y * vy;
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    let area = (umax - umin) * (vmax - vmin);
    let angle = uy.atan2(ux).to_degrees().rem_euclid(90.0);
    let corner = |u: f64, v: f64| Pt::new(u * ux + v * vx, u * uy + v * vy);
    (
        (area, angle),
        [
            corner(umin, vmin),
            corner(umax, vmin),
            corner(umax, vmax),
            corner(umin, vmax),
        ],
    )
}

/// Clip `subject` against a convex, counter-clockwise `clip` polygon
/// (Sutherland-Hodgman). Returns the clipped polygon, possibly empty.
pub fn clip_polygon_convex(subject: &[Pt], clip: &[Pt]) -> Vec<Pt> {
    let mut output: Vec<Pt> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let cur_in = cross(a, b, cur) >= 0.0;
            let prev_in = cross(a, b, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(a, b, prev, cur));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(a, b, prev, cur));
            }
        }
    }
    output
}

/// Intersection of the infinite line through (a, b) with segment (p, q).
fn line_intersection(a: Pt, b: Pt, p: Pt, q: Pt) -> Pt {
    let denom = (b.x - a.x) * (q.y - p.y) - (b.y - a.y) * (q.x - p.x);
    let num = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    let t = -num / denom;
    Pt::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// True when `p` lies inside (or within `slack` of) the counter-clockwise
/// convex polygon.
pub fn point_in_convex(p: Pt, polygon: &[Pt], slack: f64) -> bool {
    polygon.len() >= 3
        && (0..polygon.len()).all(|i| {
            let a = polygon[i];
            let b = polygon[(i + 1) % polygon.len()];
            let edge_len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
            cross(a, b, p) >= -slack * edge_len.max(1.0)
        })
}
