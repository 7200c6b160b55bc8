//! Pinhole camera: pose construction from scene parameters and point
//! projection.
//!
//! World frame: x east, y north, z up, scene origin at (0, 0, 0). Camera
//! frame: x right, y down, z along the optical axis. With zero pitch, roll
//! and yaw the camera looks along +y; positive pitch tilts the view downward
//! (90 degrees is straight down). Image coordinates have +x right, +y down
//! and their origin at the top-left pixel corner.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::scene::{PitchMode, SceneConfig};

/// Field of view and sensor resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub hfov_deg: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err(Error::config(format!(
                "hfov_deg {} outside (0, 180)",
                self.hfov_deg
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("camera resolution must be positive"));
        }
        Ok(())
    }
}

/// A posed pinhole camera.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub position: Vector3<f64>,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub yaw_deg: f64,
    pub hfov_deg: f64,
    pub width: u32,
    pub height: u32,
    /// Rows are the camera axes (right, down, forward) in world coordinates,
    /// i.e. the world-to-camera rotation.
    world_to_cam: Matrix3<f64>,
}

/// A point projected into the image plane. `depth` is the distance along the
/// optical axis; `behind` flags points at or behind the camera plane, whose
/// pixel coordinates are meaningless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub behind: bool,
}

/// Build the camera for a sampled scene: positioned at the sampled distance
/// so the scene origin lies on the optical axis, pitched per `mode`, rolled
/// per the scene, yaw fixed at 0 (the origin stays centered; the paper-style
/// pipelines vary object position instead of camera azimuth).
pub fn build_camera(
    config: &SceneConfig,
    intrinsics: &CameraIntrinsics,
    mode: PitchMode,
) -> Result<CameraModel> {
    intrinsics.validate()?;
    let pitch_deg = match mode {
        PitchMode::Fixed(theta) => theta,
        PitchMode::Metadata | PitchMode::Random { .. } => {
            config.camera_pitch_deg.ok_or_else(|| {
                Error::data(format!(
                    "background {:?} has no pitch value; it should have been filtered upstream",
                    config.background_id
                ))
            })?
        }
    };
    Ok(CameraModel::new(
        pitch_deg,
        config.camera_roll_deg,
        0.0,
        config.distance_m,
        intrinsics,
    ))
}

impl CameraModel {
    /// Camera at `distance` from the origin along the back-projected view
    /// direction, so the origin projects to the principal point.
    pub fn new(
        pitch_deg: f64,
        roll_deg: f64,
        yaw_deg: f64,
        distance: f64,
        intrinsics: &CameraIntrinsics,
    ) -> Self {
        let pitch = pitch_deg.to_radians();
        let roll = roll_deg.to_radians();
        let yaw = yaw_deg.rem_euclid(360.0).to_radians();

        let forward = Vector3::new(
            yaw.sin() * pitch.cos(),
            yaw.cos() * pitch.cos(),
            -pitch.sin(),
        );
        let right0 = Vector3::new(yaw.cos(), -yaw.sin(), 0.0);
        let down0 = forward.cross(&right0);
        // Roll spins right/down about the optical axis.
        let right = right0 * roll.cos() + down0 * roll.sin();
        let down = down0 * roll.cos() - right0 * roll.sin();

        let world_to_cam =
            Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        CameraModel {
            position: -forward * distance,
            pitch_deg,
            roll_deg,
            yaw_deg,
            hfov_deg: intrinsics.hfov_deg,
            width: intrinsics.width,
            height: intrinsics.height,
            world_to_cam,
        }
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        (self.width as f64 / 2.0) / (self.hfov_deg.to_radians() / 2.0).tan()
    }

    /// Transform a world point into camera coordinates (x right, y down,
    /// z forward).
    pub fn world_to_camera(&self, p: Vector3<f64>) -> Vector3<f64> {
        self.world_to_cam * (p - self.position)
    }

    /// Project a world point to continuous pixel coordinates.
    pub fn project_point(&self, p: Vector3<f64>) -> Projected {
        let cam = self.world_to_camera(p);
        if cam.z <= 0.0 {
            return Projected {
                x: 0.0,
                y: 0.0,
                depth: cam.z,
                behind: true,
            };
        }
        let f = self.focal_px();
        Projected {
            x: self.width as f64 / 2.0 + f * cam.x / cam.z,
            y: self.height as f64 / 2.0 + f * cam.y / cam.z,
            depth: cam.z,
            behind: false,
        }
    }

    /// Unit ray direction (world frame) through a continuous pixel position.
    pub fn pixel_ray(&self, x: f64, y: f64) -> Vector3<f64> {
        let f = self.focal_px();
        let cam = Vector3::new(
            (x - self.width as f64 / 2.0) / f,
            (y - self.height as f64 / 2.0) / f,
            1.0,
        );
        (self.world_to_cam.transpose() * cam).normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const INTRINSICS: CameraIntrinsics = CameraIntrinsics {
        hfov_deg: 58.0,
        width: 640,
        height: 512,
    };

    fn scene(pitch: Option<f64>) -> SceneConfig {
        SceneConfig {
            background_id: "bg".into(),
            config_index: 0,
            distance_m: 5.0,
            camera_pitch_deg: pitch,
            camera_roll_deg: 0.0,
            object_yaw_deg: 0.0,
            object_x_m: 0.0,
            object_y_m: 0.0,
        }
    }

    #[test]
    fn origin_projects_to_principal_point() {
        for pitch in [0.0, 30.0, 60.0, 90.0, -10.0] {
            for roll in [-10.0, 0.0, 10.0] {
                let cam = CameraModel::new(pitch, roll, 0.0, 5.0, &INTRINSICS);
                let p = cam.project_point(Vector3::zeros());
                assert!(!p.behind);
                assert!((p.x - 320.0).abs() < 1e-9, "pitch {pitch} x {}", p.x);
                assert!((p.y - 256.0).abs() < 1e-9, "pitch {pitch} y {}", p.y);
                assert!((p.depth - 5.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lateral_offset_reaches_frustum_edge() {
        // A point offset right by d*tan(hfov/2) at distance d lands on x = width.
        let cam = CameraModel::new(0.0, 0.0, 0.0, 5.0, &INTRINSICS);
        let half = (29.0f64).to_radians().tan();
        let p = cam.project_point(Vector3::new(5.0 * half, 0.0, 0.0));
        assert!((p.x - 640.0).abs() < 1e-9, "x {}", p.x);
        assert!((p.y - 256.0).abs() < 1e-9);
    }

    #[test]
    fn pitch_zero_looks_north_pitch_ninety_looks_down() {
        let level = CameraModel::new(0.0, 0.0, 0.0, 5.0, &INTRINSICS);
        assert!((level.position - Vector3::new(0.0, -5.0, 0.0)).norm() < 1e-12);
        // A point above the origin appears in the upper image half.
        let above = level.project_point(Vector3::new(0.0, 0.0, 1.0));
        assert!(above.y < 256.0);

        let nadir = CameraModel::new(90.0, 0.0, 0.0, 5.0, &INTRINSICS);
        assert!((nadir.position - Vector3::new(0.0, 0.0, 5.0)).norm() < 1e-12);
        // East maps right, south maps down.
        let east = nadir.project_point(Vector3::new(1.0, 0.0, 0.0));
        assert!(east.x > 320.0 && (east.y - 256.0).abs() < 1e-9);
        let south = nadir.project_point(Vector3::new(0.0, -1.0, 0.0));
        assert!(south.y > 256.0 && (south.x - 320.0).abs() < 1e-9);
    }

    #[test]
    fn behind_camera_is_flagged() {
        let cam = CameraModel::new(0.0, 0.0, 0.0, 5.0, &INTRINSICS);
        let p = cam.project_point(Vector3::new(0.0, -10.0, 0.0));
        assert!(p.behind);
    }

    #[test]
    fn project_then_back_ray_reproduces_direction() {
        // Inverse-projection check: the ray through the projected pixel must
        // match the camera-to-point direction to within 1e-9 radians.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let cam = CameraModel::new(
                rng.random_range(-10.0..=92.0),
                rng.random_range(-10.0..=10.0),
                0.0,
                rng.random_range(1.0..=10.0),
                &INTRINSICS,
            );
            let p = Vector3::new(
                rng.random_range(-3.0..=3.0),
                rng.random_range(-3.0..=3.0),
                rng.random_range(0.0..=2.0),
            );
            let proj = cam.project_point(p);
            if proj.behind {
                continue;
            }
            let ray = cam.pixel_ray(proj.x, proj.y);
            let want = (p - cam.position).normalize();
            let angle = ray.cross(&want).norm().atan2(ray.dot(&want));
            assert!(angle.abs() < 1e-9, "angular error {angle}");
        }
    }

    #[test]
    fn build_camera_pitch_modes() {
        let cfg = scene(Some(60.0));
        let metadata = build_camera(&cfg, &INTRINSICS, PitchMode::Metadata).unwrap();
        assert_eq!(metadata.pitch_deg, 60.0);
        // Fixed overrides metadata entirely.
        let fixed = build_camera(&cfg, &INTRINSICS, PitchMode::Fixed(0.0)).unwrap();
        assert_eq!(fixed.pitch_deg, 0.0);
        // Missing metadata pitch is an upstream filtering bug.
        let err = build_camera(&scene(None), &INTRINSICS, PitchMode::Metadata).unwrap_err();
        assert!(err.to_string().contains("filtered upstream"), "{err}");
    }

    #[test]
    fn focal_length_positive_and_finite() {
        let cam = CameraModel::new(45.0, 0.0, 0.0, 5.0, &INTRINSICS);
        let f = cam.focal_px();
        assert!(f.is_finite() && f > 0.0);
        assert!(
            CameraIntrinsics {
                hfov_deg: 180.0,
                width: 10,
                height: 10
            }
            .validate()
            .is_err()
        );
        assert!(
            CameraIntrinsics {
                hfov_deg: 0.0,
                width: 10,
                height: 10
            }
            .validate()
            .is_err()
        );
    }
}
