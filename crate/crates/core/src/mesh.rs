//! Triangle mesh loading from a Wavefront OBJ subset plus a TOML material
//! sidecar.
//!
//! Supported OBJ statements: `v`, `vn`, `vt` (parsed, unused), `f` with
//! `v`, `v/vt`, `v//vn` or `v/vt/vn` references, `usemtl`, and `g`/`o` group
//! names. Polygonal faces triangulate as a fan. Faces lacking normals get
//! area-weighted vertex normals computed from the geometry.
//!
//! The sidecar maps material names to thermal parameters:
//!
//! ```toml
//! [battery]
//! temperature_norm = 0.92
//! f0 = 0.04
//! angle_falloff = 1.0
//! ramp = [[0.0, 0.0], [1.0, 1.0]]
//! ```

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::material::ThermalMaterial;

/// Indexed triangle mesh in the object frame (z up, meters).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vector3<f64>>,
    /// Per-vertex unit normals, parallel to `vertices`.
    pub normals: Vec<Vector3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    /// Material index per triangle, parallel to `triangles`.
    pub material_of_triangle: Vec<u32>,
    /// Named groups (from `g`/`o`) to the triangles they contain.
    pub part_labels: BTreeMap<String, Vec<u32>>,
}

impl TriangleMesh {
    pub fn validate(&self, material_count: usize) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::mesh("mesh has no triangles"));
        }
        if self.normals.len() != self.vertices.len() {
            return Err(Error::mesh("normals and vertices differ in length"));
        }
        if self.material_of_triangle.len() != self.triangles.len() {
            return Err(Error::mesh(
                "material indices and triangles differ in length",
            ));
        }
        let nv = self.vertices.len() as u32;
        for tri in &self.triangles {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::mesh(format!(
                    "dangling vertex index in triangle {tri:?}"
                )));
            }
        }
        for &m in &self.material_of_triangle {
            if m as usize >= material_count {
                return Err(Error::mesh(format!("dangling material index {m}")));
            }
        }
        for (i, n) in self.normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > 1e-4 {
                return Err(Error::mesh(format!("normal {i} is not unit length")));
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds of the vertices, `(min, max)`.
    pub fn bounds(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSpec {
    temperature_norm: f64,
    f0: f64,
    angle_falloff: f64,
    ramp: Vec<(f64, f64)>,
}

/// Parse the material sidecar into name -> material.
fn parse_sidecar(sidecar_text: &str) -> Result<BTreeMap<String, ThermalMaterial>> {
    let raw: BTreeMap<String, MaterialSpec> =
        toml::from_str(sidecar_text).map_err(|e| Error::mesh(format!("material sidecar: {e}")))?;
    let mut out = BTreeMap::new();
    for (name, spec) in raw {
        let material = ThermalMaterial {
            name: name.clone(),
            temperature_norm: spec.temperature_norm,
            ramp: spec.ramp,
            fresnel_f0: spec.f0,
            angle_falloff: spec.angle_falloff,
        };
        material.validate()?;
        out.insert(name, material);
    }
    Ok(out)
}

/// Load a mesh and resolve its material names against the sidecar. Materials
/// are returned in order of first use; `material_of_triangle` indexes into
/// that list. A `usemtl` naming a material absent from the sidecar is an
/// error naming it.
pub fn load_mesh(
    mesh_text: &str,
    sidecar_text: &str,
) -> Result<(TriangleMesh, Vec<ThermalMaterial>)> {
    let sidecar = parse_sidecar(sidecar_text)?;

    let mut positions: Vec<Vector3<f64>> = Vec::new();
    let mut obj_normals: Vec<Vector3<f64>> = Vec::new();

    // Output vertices are keyed by (position index, normal index) so faces
    // sharing a position but not a normal do not fuse.
    let mut vertex_key: BTreeMap<(u32, Option<u32>), u32> = BTreeMap::new();
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut vertex_normal_refs: Vec<Option<u32>> = Vec::new();

    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut material_of_triangle: Vec<u32> = Vec::new();
    let mut part_labels: BTreeMap<String, Vec<u32>> = BTreeMap::new();

    let mut materials: Vec<ThermalMaterial> = Vec::new();
    let mut material_index: BTreeMap<String, u32> = BTreeMap::new();
    let mut current_material: Option<u32> = None;
    let mut current_group: Option<String> = None;

    for (line_idx, raw_line) in mesh_text.lines().enumerate() {
        let line_no = line_idx + 1;
        let fail = |msg: String| Error::mesh(format!("OBJ line {line_no}: {msg}"));
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "v" | "vn" => {
                if rest.len() < 3 {
                    return Err(fail(format!("{keyword} needs 3 components")));
                }
                let mut xyz = [0.0f64; 3];
                for (slot, tok) in xyz.iter_mut().zip(&rest) {
                    *slot = tok
                        .parse()
                        .map_err(|_| fail(format!("bad number {tok:?}")))?;
                }
                let v = Vector3::new(xyz[0], xyz[1], xyz[2]);
                if keyword == "v" {
                    positions.push(v);
                } else {
                    let n = v.norm();
                    if n == 0.0 {
                        return Err(fail("zero-length normal".into()));
                    }
                    obj_normals.push(v / n);
                }
            }
            "vt" => {} // texture coordinates are accepted and ignored
            "usemtl" => {
                let name = rest
                    .first()
                    .ok_or_else(|| fail("usemtl needs a name".into()))?;
                let idx = match material_index.get(*name) {
                    Some(&i) => i,
                    None => {
                        let material = sidecar.get(*name).ok_or_else(|| {
                            Error::mesh(format!(
                                "material {name:?} referenced on OBJ line {line_no} is missing \
                                 from the sidecar"
                            ))
                        })?;
                        let i = materials.len() as u32;
                        materials.push(material.clone());
                        material_index.insert((*name).to_string(), i);
                        i
                    }
                };
                current_material = Some(idx);
            }
            "g" | "o" => {
                current_group = rest.first().map(|s| s.to_string());
            }
            "f" => {
                if rest.len() < 3 {
                    return Err(fail("face needs at least 3 vertices".into()));
                }
                let material =
                    current_material.ok_or_else(|| fail("face before any usemtl".into()))?;
                let mut face: Vec<u32> = Vec::with_capacity(rest.len());
                for token in &rest {
                    let (pos_idx, normal_idx) = parse_face_ref(token)
                        .map_err(|msg| fail(format!("face reference {token:?}: {msg}")))?;
                    if pos_idx == 0 || pos_idx as usize > positions.len() {
                        return Err(fail(format!("dangling vertex index {pos_idx}")));
                    }
                    if let Some(ni) = normal_idx
                        && (ni == 0 || ni as usize > obj_normals.len())
                    {
                        return Err(fail(format!("dangling normal index {ni}")));
                    }
                    let key = (pos_idx - 1, normal_idx.map(|n| n - 1));
                    let out_idx = *vertex_key.entry(key).or_insert_with(|| {
                        vertices.push(positions[(pos_idx - 1) as usize]);
                        vertex_normal_refs.push(normal_idx.map(|n| n - 1));
                        (vertices.len() - 1) as u32
                    });
                    face.push(out_idx);
                }
                for i in 1..face.len() - 1 {
                    let tri_idx = triangles.len() as u32;
                    triangles.push([face[0], face[i], face[i + 1]]);
                    material_of_triangle.push(material);
                    if let Some(group) = &current_group {
                        part_labels.entry(group.clone()).or_default().push(tri_idx);
                    }
                }
            }
            // mtllib/s and anything else in the subset's blind spot
            _ => {}
        }
    }

    if triangles.is_empty() {
        return Err(Error::mesh("mesh has no triangles"));
    }

    // Resolve normals: OBJ-provided where referenced, otherwise accumulate
    // area-weighted face normals.
    let mut normals: Vec<Vector3<f64>> = vec![Vector3::zeros(); vertices.len()];
    let mut fixed: Vec<bool> = vec![false; vertices.len()];
    for (i, normal_ref) in vertex_normal_refs.iter().enumerate() {
        if let Some(ni) = normal_ref {
            normals[i] = obj_normals[*ni as usize];
            fixed[i] = true;
        }
    }
    for tri in &triangles {
        let [a, b, c] = *tri;
        let face = (vertices[b as usize] - vertices[a as usize])
            .cross(&(vertices[c as usize] - vertices[a as usize]));
        for &i in tri {
            if !fixed[i as usize] {
                normals[i as usize] += face;
            }
        }
    }
    for (i, n) in normals.iter_mut().enumerate() {
        if !fixed[i] {
            let len = n.norm();
            *n = if len > 0.0 { *n / len } else { Vector3::z() };
        }
    }

    let mesh = TriangleMesh {
        vertices,
        normals,
        triangles,
        material_of_triangle,
        part_labels,
    };
    mesh.validate(materials.len())?;
    Ok((mesh, materials))
}

/// Parse `v`, `v/vt`, `v//vn` or `v/vt/vn` into (position, optional normal),
/// both 1-based.
fn parse_face_ref(token: &str) -> std::result::Result<(u32, Option<u32>), String> {
    let parts: Vec<&str> = token.split('/').collect();
    let pos: u32 = parts[0]
        .parse()
        .map_err(|_| "bad vertex index".to_string())?;
    let normal = match parts.len() {
        1 | 2 => None,
        3 => {
            if parts[2].is_empty() {
                None
            } else {
                Some(
                    parts[2]
                        .parse()
                        .map_err(|_| "bad normal index".to_string())?,
                )
            }
        }
        _ => return Err("too many components".into()),
    };
    Ok((pos, normal))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIDE: &str = r#"
[body]
temperature_norm = 0.7
f0 = 0.04
angle_falloff = 1.0
ramp = [[0.0, 0.0], [1.0, 1.0]]

[hot]
temperature_norm = 0.95
f0 = 0.02
angle_falloff = 1.0
ramp = [[0.0, 0.1], [1.0, 1.0]]
"#;

    /// A unit cube around the origin, quad faces, with normals.
    const CUBE: &str = r#"
v -0.5 -0.5 -0.5
v  0.5 -0.5 -0.5
v  0.5  0.5 -0.5
v -0.5  0.5 -0.5
v -0.5 -0.5  0.5
v  0.5 -0.5  0.5
v  0.5  0.5  0.5
v -0.5  0.5  0.5
vn  0  0 -1
vn  0  0  1
vn  0 -1  0
vn  0  1  0
vn -1  0  0
vn  1  0  0
usemtl body
f 1//1 4//1 3//1 2//1
f 5//2 6//2 7//2 8//2
f 1//3 2//3 6//3 5//3
f 3//4 4//4 8//4 7//4
f 1//5 5//5 8//5 4//5
f 2//6 3//6 7//6 6//6
"#;

    #[test]
    fn cube_loads_with_twelve_triangles() {
        let (mesh, materials) = load_mesh(CUBE, SIDE).unwrap();
        assert_eq!(mesh.triangles.len(), 12);
        assert_eq!(materials.len(), 1);
        assert_eq!(materials[0].name, "body");
        assert!(mesh.material_of_triangle.iter().all(|&m| m == 0));
        // 8 positions but vertices split per (position, normal) pair: each
        // corner touches 3 faces with distinct normals.
        assert_eq!(mesh.vertices.len(), 24);
        mesh.validate(materials.len()).unwrap();
    }

    #[test]
    fn quad_face_triangulates_as_fan() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nusemtl body\nf 1 2 3 4\n";
        let (mesh, _) = load_mesh(obj, SIDE).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(mesh.triangles[0], [0, 1, 2]);
        assert_eq!(mesh.triangles[1], [0, 2, 3]);
        // Missing normals got computed; the face is in the z = 0 plane.
        for n in &mesh.normals {
            assert!((n.z.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_material_names_the_culprit() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nusemtl rotor\nf 1 2 3\n";
        let err = load_mesh(obj, SIDE).unwrap_err();
        assert!(err.to_string().contains("\"rotor\""), "{err}");
    }

    #[test]
    fn dangling_indices_rejected() {
        let obj = "v 0 0 0\nv 1 0 0\nusemtl body\nf 1 2 9\n";
        let err = load_mesh(obj, SIDE).unwrap_err();
        assert!(err.to_string().contains("dangling"), "{err}");
    }

    #[test]
    fn empty_mesh_rejected() {
        assert!(load_mesh("v 0 0 0\n", SIDE).is_err());
    }

    #[test]
    fn face_before_usemtl_rejected() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 3\n";
        let err = load_mesh(obj, SIDE).unwrap_err();
        assert!(err.to_string().contains("before any usemtl"), "{err}");
    }

    #[test]
    fn groups_collect_triangles_per_material_region() {
        let obj = "\
v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1
g base
usemtl body
f 1 2 3
g top
usemtl hot
f 4 5 6
";
        let (mesh, materials) = load_mesh(obj, SIDE).unwrap();
        assert_eq!(materials.len(), 2);
        assert_eq!(mesh.part_labels["base"], vec![0]);
        assert_eq!(mesh.part_labels["top"], vec![1]);
        assert_eq!(mesh.material_of_triangle, vec![0, 1]);
    }

    #[test]
    fn sidecar_rejects_unknown_fields_and_bad_ramps() {
        let bad = "[body]\ntemperature_norm = 0.5\nf0 = 0.1\nangle_falloff = 1.0\nramp = [[0.0,0.0],[1.0,1.0]]\nextra = 3\n";
        assert!(parse_sidecar(bad).is_err());
        let bad_ramp = "[body]\ntemperature_norm = 0.5\nf0 = 0.1\nangle_falloff = 1.0\nramp = [[0.5,0.0],[1.0,1.0]]\n";
        assert!(parse_sidecar(bad_ramp).is_err());
    }
}
