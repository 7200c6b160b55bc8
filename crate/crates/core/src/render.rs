//! Deterministic software rasterizer.
//!
//! Renders a thermally shaded mesh into intensity/alpha/object-id/depth
//! buffers with a z-buffer, per-face (flat) shading, back-face culling and a
//! top-left fill rule, so identical inputs always produce byte-identical
//! buffers. Alpha is binary by default; 4x supersampling produces fractional
//! coverage on edges.

use nalgebra::Vector3;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::material::{ThermalMaterial, shade_thermal};
use crate::mesh::TriangleMesh;
use crate::scene::SceneConfig;

/// Object placement: yaw about the vertical axis, then translation to
/// (x, y, 0) on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectPose {
    pub yaw_deg: f64,
    pub x_m: f64,
    pub y_m: f64,
}

impl From<&SceneConfig> for ObjectPose {
    fn from(config: &SceneConfig) -> Self {
        ObjectPose {
            yaw_deg: config.object_yaw_deg,
            x_m: config.object_x_m,
            y_m: config.object_y_m,
        }
    }
}

/// Per-pixel render buffers. Invariant: `alpha > 0`, `object_id != 0` and
/// `depth` finite all hold on exactly the same pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub width: u32,
    pub height: u32,
    /// Emission intensity in [0, 1]; 0 where empty.
    pub intensity: Vec<f32>,
    /// Coverage in [0, 1]; binary without supersampling.
    pub alpha: Vec<f32>,
    /// 0 where empty.
    pub object_id: Vec<u32>,
    /// Distance along the optical axis in meters; +inf where empty.
    pub depth: Vec<f32>,
}

/// The id written into `object_id` for rendered geometry (one object per
/// scene).
pub const RENDERED_OBJECT_ID: u32 = 1;

/// Geometry closer than this to the camera plane is clipped away.
const NEAR_PLANE: f64 = 1e-4;

impl RenderOutput {
    fn empty(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        RenderOutput {
            width,
            height,
            intensity: vec![0.0; n],
            alpha: vec![0.0; n],
            object_id: vec![0; n],
            depth: vec![f32::INFINITY; n],
        }
    }

    pub fn pixel_index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// True when the alpha/object-id/depth coherence invariant holds on every
    /// pixel.
    pub fn is_coherent(&self) -> bool {
        (0..self.alpha.len()).all(|i| {
            let covered = self.alpha[i] > 0.0;
            covered == (self.object_id[i] != 0) && covered == self.depth[i].is_finite()
        })
    }

    /// Count of covered pixels.
    pub fn covered_pixels(&self) -> usize {
        self.alpha.iter().filter(|&&a| a > 0.0).count()
    }

    /// Intensity channel quantized to 8 bits (debug dump).
    pub fn intensity_image(&self) -> crate::image::ThermalImage {
        self.quantized(|i| self.intensity[i] as f64)
    }

    /// Alpha channel quantized to 8 bits (debug dump).
    pub fn alpha_image(&self) -> crate::image::ThermalImage {
        self.quantized(|i| self.alpha[i] as f64)
    }

    /// Object ids scaled by `stride` (debug dump).
    pub fn object_id_image(&self, stride: u8) -> crate::image::ThermalImage {
        let data = self
            .object_id
            .iter()
            .map(|&id| (id.saturating_mul(stride as u32)).min(255) as u8)
            .collect();
        crate::image::ThermalImage::from_raw(self.width, self.height, data)
            .expect("buffer sized to dimensions")
    }

    /// Inverse depth normalized to the closest covered pixel (debug dump).
    pub fn inverse_depth_image(&self) -> crate::image::ThermalImage {
        let max_inv = self
            .depth
            .iter()
            .filter(|d| d.is_finite())
            .map(|&d| 1.0 / d as f64)
            .fold(0.0f64, f64::max);
        self.quantized(|i| {
            if self.depth[i].is_finite() && max_inv > 0.0 {
                (1.0 / self.depth[i] as f64) / max_inv
            } else {
                0.0
            }
        })
    }

    fn quantized(&self, value: impl Fn(usize) -> f64) -> crate::image::ThermalImage {
        let data = (0..self.alpha.len())
            .map(|i| (value(i) * 255.0).round_ties_even().clamp(0.0, 255.0) as u8)
            .collect();
        crate::image::ThermalImage::from_raw(self.width, self.height, data)
            .expect("buffer sized to dimensions")
    }
}

/// Render one posed object. `supersample` is samples per pixel, 1 or 4; with
/// 4, alpha carries fractional edge coverage and intensity averages the
/// covered samples.
pub fn render(
    mesh: &TriangleMesh,
    materials: &[ThermalMaterial],
    camera: &CameraModel,
    pose: &ObjectPose,
    supersample: u32,
) -> Result<RenderOutput> {
    let scale = match supersample {
        1 => 1u32,
        4 => 2u32,
        other => {
            return Err(Error::config(format!(
                "supersample must be 1 or 4, got {other}"
            )));
        }
    };
    mesh.validate(materials.len())?;

    // Object transform: yaw about +z, then translate onto the ground plane.
    // Yaw is normalized so 360 degrees reproduces 0 exactly.
    let yaw = pose.yaw_deg.rem_euclid(360.0).to_radians();
    let (sin_yaw, cos_yaw) = (yaw.sin(), yaw.cos());
    let offset = Vector3::new(pose.x_m, pose.y_m, 0.0);
    let to_world = |v: &Vector3<f64>| {
        Vector3::new(
            v.x * cos_yaw - v.y * sin_yaw,
            v.x * sin_yaw + v.y * cos_yaw,
            v.z,
        ) + offset
    };

    let world: Vec<Vector3<f64>> = mesh.vertices.iter().map(to_world).collect();

    let sw = camera.width * scale;
    let sh = camera.height * scale;
    let mut samples = RenderOutput::empty(sw, sh);
    let focal = camera.focal_px() * scale as f64;
    let (cx, cy) = (sw as f64 / 2.0, sh as f64 / 2.0);

    for (tri_idx, tri) in mesh.triangles.iter().enumerate() {
        let w0 = world[tri[0] as usize];
        let w1 = world[tri[1] as usize];
        let w2 = world[tri[2] as usize];

        let face = (w1 - w0).cross(&(w2 - w0));
        let face_len = face.norm();
        if face_len == 0.0 {
            continue;
        }
        let normal = face / face_len;
        let centroid = (w0 + w1 + w2) / 3.0;
        let view = camera.position - centroid;
        let view_len = view.norm();
        if view_len == 0.0 || normal.dot(&view) <= 0.0 {
            continue; // back-face or degenerate viewpoint
        }
        let cos_theta = (normal.dot(&view) / view_len).clamp(0.0, 1.0);
        let material = &materials[mesh.material_of_triangle[tri_idx] as usize];
        let shade = shade_thermal(material, cos_theta) as f32;

        // Near-plane clip in camera space, then project.
        let cam_pts = [
            camera.world_to_camera(w0),
            camera.world_to_camera(w1),
            camera.world_to_camera(w2),
        ];
        let clipped = clip_near(&cam_pts);
        if clipped.len() < 3 {
            continue;
        }
        let screen: Vec<(f64, f64, f64)> = clipped
            .iter()
            .map(|c| (cx + focal * c.x / c.z, cy + focal * c.y / c.z, c.z))
            .collect();
        for i in 1..screen.len() - 1 {
            raster_triangle(&mut samples, shade, screen[0], screen[i], screen[i + 1]);
        }
    }

    if scale == 1 {
        return Ok(samples);
    }
    Ok(downsample(&samples, camera.width, camera.height))
}

/// Clip a camera-space triangle against z = NEAR_PLANE (Sutherland-Hodgman on
/// one plane). Yields 0, 3 or 4 vertices.
fn clip_near(tri: &[Vector3<f64>; 3]) -> Vec<Vector3<f64>> {
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let cur = tri[i];
        let prev = tri[(i + 2) % 3];
        let cur_in = cur.z >= NEAR_PLANE;
        let prev_in = prev.z >= NEAR_PLANE;
        if cur_in != prev_in {
            let t = (NEAR_PLANE - prev.z) / (cur.z - prev.z);
            out.push(prev + (cur - prev) * t);
        }
        if cur_in {
            out.push(cur);
        }
    }
    out
}

/// Rasterize one screen-space triangle with pixel-center sampling and the
/// top-left tie rule: a center exactly on an edge belongs to the triangle
/// whose edge is a top edge (horizontal, pointing +x after orientation
/// normalization) or a left edge (pointing -y), so adjacent triangles never
/// double-shade or leave gaps.
fn raster_triangle(
    out: &mut RenderOutput,
    shade: f32,
    v0: (f64, f64, f64),
    mut v1: (f64, f64, f64),
    mut v2: (f64, f64, f64),
) {
    let area2 = |a: (f64, f64, f64), b: (f64, f64, f64), c: (f64, f64, f64)| {
        (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
    };
    let mut signed = area2(v0, v1, v2);
    if signed == 0.0 || !signed.is_finite() {
        return;
    }
    if signed < 0.0 {
        std::mem::swap(&mut v1, &mut v2);
        signed = -signed;
    }

    let min_x = v0.0.min(v1.0).min(v2.0);
    let max_x = v0.0.max(v1.0).max(v2.0);
    let min_y = v0.1.min(v1.1).min(v2.1);
    let max_y = v0.1.max(v1.1).max(v2.1);
    let x0 = (min_x - 0.5).ceil().max(0.0) as i64;
    let x1 = (max_x - 0.5).floor().min(out.width as f64 - 1.0) as i64;
    let y0 = (min_y - 0.5).ceil().max(0.0) as i64;
    let y1 = (max_y - 0.5).floor().min(out.height as f64 - 1.0) as i64;
    if x0 > x1 || y0 > y1 {
        return;
    }

    let edges = [(v1, v2), (v2, v0), (v0, v1)]; // opposite v0, v1, v2
    let owned: Vec<bool> = edges
        .iter()
        .map(|(a, b)| {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            dy < 0.0 || (dy == 0.0 && dx > 0.0)
        })
        .collect();
    let inv_z = [1.0 / v0.2, 1.0 / v1.2, 1.0 / v2.2];

    for py in y0..=y1 {
        let sy = py as f64 + 0.5;
        for px in x0..=x1 {
            let sx = px as f64 + 0.5;
            let p = (sx, sy, 0.0);
            let e = [
                area2(edges[0].0, edges[0].1, p),
                area2(edges[1].0, edges[1].1, p),
                area2(edges[2].0, edges[2].1, p),
            ];
            let inside = (0..3).all(|k| e[k] > 0.0 || (e[k] == 0.0 && owned[k]));
            if !inside {
                continue;
            }
            let wz = (e[0] * inv_z[0] + e[1] * inv_z[1] + e[2] * inv_z[2]) / signed;
            if wz <= 0.0 {
                continue;
            }
            let z = (1.0 / wz) as f32;
            let idx = out.pixel_index(px as u32, py as u32);
            if z < out.depth[idx] {
                out.depth[idx] = z;
                out.intensity[idx] = shade;
                out.alpha[idx] = 1.0;
                out.object_id[idx] = RENDERED_OBJECT_ID;
            }
        }
    }
}

/// Box-filter 2x2 sample buffers down to pixel resolution. Alpha becomes the
/// covered fraction, intensity the mean over covered samples, depth the
/// minimum; the coherence invariant is preserved.
fn downsample(samples: &RenderOutput, width: u32, height: u32) -> RenderOutput {
    let mut out = RenderOutput::empty(width, height);
    for y in 0..height {
        for x in 0..width {
            let mut covered = 0u32;
            let mut intensity_sum = 0.0f64;
            let mut depth_min = f32::INFINITY;
            for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let si = samples.pixel_index(x * 2 + dx, y * 2 + dy);
                if samples.alpha[si] > 0.0 {
                    covered += 1;
                    intensity_sum += samples.intensity[si] as f64;
                    depth_min = depth_min.min(samples.depth[si]);
                }
            }
            let idx = out.pixel_index(x, y);
            if covered > 0 {
                out.alpha[idx] = covered as f32 / 4.0;
                out.intensity[idx] = (intensity_sum / covered as f64) as f32;
                out.depth[idx] = depth_min;
                out.object_id[idx] = RENDERED_OBJECT_ID;
            }
        }
    }
    out
}
