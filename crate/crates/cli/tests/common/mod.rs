//! Shared fixtures for the integration and acceptance suites.

use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermoforge::config::{PipelineConfig, parse_config};
use thermoforge::image::{ThermalImage, save_image};

/// An axis-aligned closed box as OBJ text, centered at `(cx, cy, cz)` with
/// the given half extents, all faces using one material.
pub fn box_obj(cx: f64, cy: f64, cz: f64, hx: f64, hy: f64, hz: f64, material: &str) -> String {
    let mut obj = String::new();
    for (sx, sy, sz) in [
        (-1.0, -1.0, -1.0),
        (1.0, -1.0, -1.0),
        (1.0, 1.0, -1.0),
        (-1.0, 1.0, -1.0),
        (-1.0, -1.0, 1.0),
        (1.0, -1.0, 1.0),
        (1.0, 1.0, 1.0),
        (-1.0, 1.0, 1.0),
    ] {
        obj.push_str(&format!(
            "v {} {} {}\n",
            cx + sx * hx,
            cy + sy * hy,
            cz + sz * hz
        ));
    }
    obj.push_str(&format!("usemtl {material}\n"));
    for quad in [
        [1, 4, 3, 2],
        [5, 6, 7, 8],
        [1, 2, 6, 5],
        [3, 4, 8, 7],
        [1, 5, 8, 4],
        [2, 3, 7, 6],
    ] {
        obj.push_str(&format!(
            "f {} {} {} {}\n",
            quad[0], quad[1], quad[2], quad[3]
        ));
    }
    obj
}

/// Re-index a second box OBJ so two can concatenate into one file.
pub fn shift_indices(obj: &str, offset: usize) -> String {
    obj.lines()
        .map(|line| {
            if let Some(rest) = line.strip_prefix("f ") {
                let refs: Vec<String> = rest
                    .split_whitespace()
                    .map(|r| (r.parse::<usize>().unwrap() + offset).to_string())
                    .collect();
                format!("f {}", refs.join(" "))
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

pub struct Fixture {
    pub config: PipelineConfig,
    pub backgrounds: Vec<(String, PathBuf)>,
}

/// Write `n_backgrounds` random 640x512 backgrounds with labels and
/// metadata pitch values spread over [30, 90], plus a config using the
/// built-in drone asset and the stock parameter ranges (d 1-10, roll +-10,
/// yaw 0-360, x/y +-3, n_config as given).
pub fn standard_fixture(dir: &Path, n_backgrounds: usize, n_config: u32) -> Fixture {
    let images = dir.join("bg/images");
    let labels = dir.join("bg/labels");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::create_dir_all(&labels).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(20_240_640);
    let mut metadata = String::from("image_id,camera_pitch_deg,altitude_m,split\n");
    let mut backgrounds = Vec::new();
    for i in 0..n_backgrounds {
        let id = format!("bg_{i:03}");
        let data: Vec<u8> = (0..640 * 512).map(|_| rng.random()).collect();
        let img = ThermalImage::from_raw(640, 512, data).unwrap();
        let path = images.join(format!("{id}.png"));
        save_image(&img, &path).unwrap();
        std::fs::write(
            labels.join(format!("{id}.txt")),
            "0 0.200000 0.200000 0.100000 0.100000\n\
             1 0.650000 0.550000 0.200000 0.150000\n\
             4 0.850000 0.850000 0.100000 0.100000\n",
        )
        .unwrap();
        let pitch = 30.0 + 60.0 * (i as f64 / (n_backgrounds.max(2) - 1) as f64);
        metadata.push_str(&format!("{id},{pitch:.1},80.0,train\n"));
        backgrounds.push((id, path));
    }
    std::fs::write(dir.join("bg/metadata.csv"), metadata).unwrap();
    std::fs::write(dir.join("drone.obj"), thermoforge::assets::DRONE_OBJ).unwrap();
    std::fs::write(
        dir.join("drone_materials.toml"),
        thermoforge::assets::DRONE_MATERIALS,
    )
    .unwrap();

    let text = format!(
        r#"
background_images_dir = "{0}/bg/images"
background_labels_dir = "{0}/bg/labels"
metadata_path = "{0}/bg/metadata.csv"
mesh_path = "{0}/drone.obj"
material_sidecar_path = "{0}/drone_materials.toml"
output_root = "{0}/out"
master_seed = 7
drop_class_ids = [4]

[ranges]
n_config = {n_config}
"#,
        dir.display()
    );
    Fixture {
        config: parse_config(&text).unwrap(),
        backgrounds,
    }
}

/// Relative path plus SHA-256 of every file under `root`.
pub fn hash_tree(root: &Path) -> Vec<(String, [u8; 32])> {
    use sha2::{Digest, Sha256};
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.unwrap();
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap()
            .to_string_lossy()
            .replace('\\', "/");
        let digest = Sha256::digest(std::fs::read(entry.path()).unwrap());
        out.push((rel, digest.into()));
    }
    out
}
