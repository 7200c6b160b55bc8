//! Built-in stand-in meshes.
//!
//! Simple box-built models shipped under `assets/` for out-of-the-box runs
//! and tests: a quadcopter with hot motors/battery and a deer with one
//! uniform body temperature. Real asset pipelines would swap in authored
//! meshes through the same OBJ + sidecar interface.

use crate::error::Result;
use crate::material::ThermalMaterial;
use crate::mesh::{TriangleMesh, load_mesh};

pub const DRONE_OBJ: &str = include_str!("../../../assets/drone.obj");
pub const DRONE_MATERIALS: &str = include_str!("../../../assets/drone_materials.toml");
pub const DEER_OBJ: &str = include_str!("../../../assets/deer.obj");
pub const DEER_MATERIALS: &str = include_str!("../../../assets/deer_materials.toml");

/// The built-in quadcopter model.
pub fn drone() -> Result<(TriangleMesh, Vec<ThermalMaterial>)> {
    load_mesh(DRONE_OBJ, DRONE_MATERIALS)
}

/// The built-in deer model.
pub fn deer() -> Result<(TriangleMesh, Vec<ThermalMaterial>)> {
    load_mesh(DEER_OBJ, DEER_MATERIALS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_models_load() {
        let (drone_mesh, drone_materials) = drone().unwrap();
        assert_eq!(drone_materials.len(), 4);
        // 14 boxes, 12 triangles each.
        assert_eq!(drone_mesh.triangles.len(), 14 * 12);
        assert!(drone_mesh.part_labels.contains_key("motor"));
        assert!(drone_mesh.part_labels.contains_key("battery"));
        assert!(drone_mesh.part_labels.contains_key("frame"));

        let (deer_mesh, deer_materials) = deer().unwrap();
        assert_eq!(deer_materials.len(), 1);
        assert_eq!(deer_mesh.triangles.len(), 7 * 12);
        // Everything sits on or above the ground plane.
        let (lo, _) = deer_mesh.bounds();
        assert!(lo.z >= 0.0);
        let (lo, _) = drone_mesh.bounds();
        assert!(lo.z >= 0.0);
    }

    #[test]
    fn drone_materials_run_hotter_on_battery_than_frame() {
        let (_, materials) = drone().unwrap();
        let by_name = |name: &str| {
            materials
                .iter()
                .find(|m| m.name == name)
                .expect("material present")
                .clone()
        };
        assert!(by_name("battery").temperature_norm > by_name("frame").temperature_norm);
        assert!(by_name("motor").temperature_norm > by_name("propeller").temperature_norm);
    }
}
