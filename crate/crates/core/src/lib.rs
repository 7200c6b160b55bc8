//! Synthetic thermal aerial imagery toolkit.
//!
//! Renders thermally shaded 3D objects aligned to the viewpoints of real
//! thermal backgrounds, composites them, derives AABB/OBB/mask annotations,
//! merges labels with occlusion filtering and evaluates detections with
//! standard mAP metrics.
//!
//! The typical flow mirrors the pipeline in [`pipeline::run_generation`]:
//! sample a [`scene::SceneConfig`] per output image, build a
//! [`camera::CameraModel`] aligned with the background's recorded pitch,
//! [`render::render`] the mesh into per-pixel buffers, blend with
//! [`composite::alpha_over`], derive annotations from the object-id buffer
//! and merge them over the originals.

pub mod assets;
pub mod camera;
pub mod composite;
pub mod config;
pub mod error;
pub mod geometry;
pub mod image;
pub mod labels;
pub mod mask;
pub mod material;
pub mod merge;
pub mod mesh;
pub mod metadata;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod scene;

pub use error::{Error, Result};
pub use image::ThermalImage;
pub use labels::{Aabb, Annotation, AnnotationSet, LabelKind};
pub use render::RenderOutput;
pub use scene::{PitchMode, SceneConfig, SceneParamRanges};
