//! End-to-end generation pipeline: ingest backgrounds and metadata, sample a
//! scene per output image, render, composite, derive and merge annotations,
//! and write the parameter-keyed output tree plus an auditable manifest.
//!
//! Every output byte is a function of (config, master seed): per-image RNG
//! streams are keyed by (seed, background id, config index), jobs run in a
//! worker pool, and manifest rows are sorted before writing so scheduling
//! never shows up in the results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, build_camera};
use crate::composite::{add_gaussian_noise, alpha_over, output_paths, rgb_to_grayscale};
use crate::config::{NewClassId, PipelineConfig, config_json};
use crate::error::{Error, Result};
use crate::geometry::{Pt, convex_hull, min_area_rect};
use crate::image::{ThermalImage, load_image, save_image};
use crate::labels::{
    Annotation, AnnotationSet, LabelKind, drop_class, parse_label_file, parse_label_line,
    serialize_annotations, validate_quad,
};
use crate::mask::{PixelMask, extract_mask, mask_corner_points, mask_to_aabb, mask_to_polygons};
use crate::material::ThermalMaterial;
use crate::merge::merge_annotations;
use crate::mesh::{TriangleMesh, load_mesh};
use crate::metadata::{Split, load_metadata};
use crate::render::{ObjectPose, RENDERED_OBJECT_ID, RenderOutput, render};
use crate::rng::derive_rng_stream;
use crate::scene::{PitchMode, SceneConfig, sample_scene_config};

/// Pixel tolerance for polygon simplification of synthetic masks.
const POLYGON_SIMPLIFY_EPS: f64 = 0.5;

/// Flags for one generation run.
#[derive(Debug, Clone, Default)]
pub struct GenerationOptions {
    /// Skip (background, config) pairs whose manifest row and output files
    /// already exist. Assumes the config and seed are unchanged.
    pub resume: bool,
    /// Also write per-image binary mask PNGs under `masks/`.
    pub write_masks: bool,
    /// Write every sampled scene configuration as JSON lines to this path.
    pub dump_configs: Option<PathBuf>,
    /// Worker threads; `None` uses the default pool.
    pub threads: Option<usize>,
    /// Log per-image failures and continue instead of aborting.
    pub keep_going: bool,
}

/// Counters for a finished run. For a fresh (non-resume) run these equal the
/// written-file counts exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GenerationSummary {
    pub images_written: usize,
    pub labels_written: usize,
    /// Originals removed for being obscured, across all composites.
    pub originals_dropped: usize,
    /// Scenes whose object fell fully outside the frustum.
    pub empty_synthetic: usize,
    /// Backgrounds excluded for missing pitch metadata (metadata mode only).
    pub backgrounds_skipped: usize,
    /// Jobs reused from a previous run via `--resume`.
    pub reused: usize,
}

/// One background available to the run.
#[derive(Debug, Clone)]
struct Background {
    id: String,
    image_path: PathBuf,
    label_path: PathBuf,
    split: Split,
    pitch_deg: Option<f64>,
}

struct Context {
    config: PipelineConfig,
    mesh: TriangleMesh,
    materials: Vec<ThermalMaterial>,
    backgrounds: Vec<Background>,
    new_class_id: u32,
}

type JobResult = std::result::Result<(ManifestRow, bool), Error>;

/// One manifest line (after the leading config line).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestRow {
    background_id: String,
    config_index: u32,
    split: String,
    pitch_deg: f64,
    distance_m: f64,
    camera_roll_deg: f64,
    object_yaw_deg: f64,
    object_x_m: f64,
    object_y_m: f64,
    in_frustum: bool,
    originals_total: usize,
    originals_dropped: usize,
    synthetic_count: usize,
    image_path: String,
    label_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mask_path: Option<String>,
}

/// Everything produced for one (background, config index) pair, before any
/// file is written.
struct JobOutput {
    scene: SceneConfig,
    split: Split,
    resolved_pitch: f64,
    composite: ThermalImage,
    render: RenderOutput,
    mask: PixelMask,
    merged: AnnotationSet,
    originals_total: usize,
    originals_dropped: usize,
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Walk failures surface as I/O errors carrying the offending path.
fn walk_error(root: &Path, e: walkdir::Error) -> Error {
    let path = e
        .path()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| root.to_path_buf());
    match e.into_io_error() {
        Some(io) => Error::io(path, io),
        None => Error::data(format!("walking {}: filesystem loop", path.display())),
    }
}

fn prepare_context(config: &PipelineConfig) -> Result<(Context, usize)> {
    config.validate()?;
    let mesh_text = read_to_string(&config.mesh_path)?;
    let sidecar_text = read_to_string(&config.material_sidecar_path)?;
    let (mesh, materials) = load_mesh(&mesh_text, &sidecar_text)?;

    let metadata = load_metadata(&read_to_string(&config.metadata_path)?)?;

    let mut backgrounds = Vec::new();
    let mut stems_seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in walkdir::WalkDir::new(&config.background_images_dir).sort_by_file_name() {
        let entry = entry.map_err(|e| walk_error(&config.background_images_dir, e))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if !(ext.eq_ignore_ascii_case("png") || ext.eq_ignore_ascii_case("pgm")) {
            continue;
        }
        let rel = path
            .strip_prefix(&config.background_images_dir)
            .expect("walked under root");
        let id = rel.with_extension("").to_string_lossy().replace('\\', "/");
        if let Some(previous) = stems_seen.insert(id.clone(), path.to_path_buf()) {
            return Err(Error::data(format!(
                "background id {id:?} is ambiguous: {} and {}",
                previous.display(),
                path.display()
            )));
        }
        let meta = metadata.get(&id);
        backgrounds.push(Background {
            id,
            image_path: path.to_path_buf(),
            label_path: config.background_labels_dir.join(rel.with_extension("txt")),
            split: meta.map_or(Split::Train, |m| m.split),
            pitch_deg: meta.and_then(|m| m.camera_pitch_deg),
        });
    }
    if backgrounds.is_empty() {
        return Err(Error::data(format!(
            "no .png/.pgm backgrounds under {}",
            config.background_images_dir.display()
        )));
    }
    backgrounds.sort_by(|a, b| a.id.cmp(&b.id));
    let mut sanitized_seen: BTreeMap<String, &str> = BTreeMap::new();
    for bg in &backgrounds {
        if let Some(other) = sanitized_seen.insert(sanitize_id(&bg.id), &bg.id) {
            return Err(Error::data(format!(
                "background ids {other:?} and {:?} collide after path flattening",
                bg.id
            )));
        }
    }

    // Metadata-aligned runs can only use backgrounds with a known pitch.
    let mut skipped = 0usize;
    if matches!(config.pitch_mode, PitchMode::Metadata) {
        let total = backgrounds.len();
        backgrounds.retain(|b| b.pitch_deg.is_some());
        skipped = total - backgrounds.len();
        if backgrounds.is_empty() {
            return Err(Error::data(
                "no background has pitch metadata; cannot run in metadata pitch mode",
            ));
        }
    }

    let new_class_id = match config.new_class_id {
        NewClassId::Fixed(id) => id,
        NewClassId::Auto => {
            let mut max_id: Option<u32> = None;
            for bg in &backgrounds {
                if !bg.label_path.exists() {
                    continue;
                }
                let set = parse_label_file(&read_to_string(&bg.label_path)?, LabelKind::Mixed)
                    .map_err(|e| Error::data(format!("{}: {e}", bg.label_path.display())))?;
                for ann in &set.annotations {
                    if config.drop_class_ids.contains(&ann.class_id) {
                        continue;
                    }
                    max_id = Some(max_id.map_or(ann.class_id, |m| m.max(ann.class_id)));
                }
            }
            max_id.map_or(0, |m| m + 1)
        }
    };

    Ok((
        Context {
            config: config.clone(),
            mesh,
            materials,
            backgrounds,
            new_class_id,
        },
        skipped,
    ))
}

/// Load a background image: 8-bit grayscale PNG/PGM directly, color PNG via
/// Rec.709 grayscale conversion.
fn load_background_image(path: &Path) -> Result<ThermalImage> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("pgm") {
        return load_image(path);
    }
    let dynamic = image::open(path)
        .map_err(|e| Error::image(format!("cannot decode {}: {e}", path.display())))?;
    match dynamic {
        image::DynamicImage::ImageLuma8(gray) => {
            let (w, h) = gray.dimensions();
            ThermalImage::from_raw(w, h, gray.into_raw())
        }
        image::DynamicImage::ImageLuma16(_) => Err(Error::image(format!(
            "{}: unsupported bit depth (16-bit)",
            path.display()
        ))),
        image::DynamicImage::ImageLumaA8(la) => {
            let (w, h) = la.dimensions();
            let data = la.pixels().map(|p| p.0[0]).collect();
            ThermalImage::from_raw(w, h, data)
        }
        other @ (image::DynamicImage::ImageRgb8(_) | image::DynamicImage::ImageRgba8(_)) => {
            Ok(rgb_to_grayscale(&other.to_rgb8()))
        }
        other => Err(Error::image(format!(
            "{}: unsupported pixel format {:?}, expected 8-bit grayscale or color",
            path.display(),
            other.color()
        ))),
    }
}

/// Build the synthetic annotation for a non-empty mask: tight AABB, minimum
/// area OBB over the silhouette's pixel corners, and the largest outer
/// polygon. OBB corners are clamped into the unit square; if clamping
/// degenerates the quad (silhouette hugging a border), the AABB rectangle
/// stands in.
fn synthetic_annotation(mask: &PixelMask, class_id: u32) -> Option<Annotation> {
    let aabb = mask_to_aabb(mask)?;
    let (w, h) = (mask.width() as f64, mask.height() as f64);

    let hull = convex_hull(&mask_corner_points(mask));
    let rect = min_area_rect(&hull).ok()?;
    let clamped: [Pt; 4] = rect
        .corners()
        .map(|p| Pt::new((p.x / w).clamp(0.0, 1.0), (p.y / h).clamp(0.0, 1.0)));
    let obb = if validate_quad(&clamped).is_ok() {
        clamped
    } else {
        [
            Pt::new(aabb.left(), aabb.top()),
            Pt::new(aabb.right(), aabb.top()),
            Pt::new(aabb.right(), aabb.bottom()),
            Pt::new(aabb.left(), aabb.bottom()),
        ]
    };

    let polygon = mask_to_polygons(mask, POLYGON_SIMPLIFY_EPS)
        .into_iter()
        .max_by(|a, b| {
            let area_a = crate::geometry::polygon_area(a).abs();
            let area_b = crate::geometry::polygon_area(b).abs();
            area_a.partial_cmp(&area_b).expect("finite areas")
        })?
        .iter()
        .map(|p| Pt::new(p.x / w, p.y / h))
        .collect();

    Some(Annotation {
        class_id,
        aabb: Some(aabb),
        obb: Some(obb),
        polygon: Some(polygon),
        confidence: None,
    })
}

fn generate_one(ctx: &Context, bg: &Background, config_index: u32) -> Result<JobOutput> {
    let config = &ctx.config;
    let mut stream = derive_rng_stream(config.master_seed, &bg.id, config_index);
    let scene = sample_scene_config(
        &config.ranges,
        config.pitch_mode,
        bg.pitch_deg,
        &mut stream,
        &bg.id,
        config_index,
    );

    let background = load_background_image(&bg.image_path)?;
    let intrinsics = CameraIntrinsics {
        hfov_deg: config.hfov_deg,
        width: background.width(),
        height: background.height(),
    };
    let camera = build_camera(&scene, &intrinsics, config.pitch_mode)?;
    let rendered = render(
        &ctx.mesh,
        &ctx.materials,
        &camera,
        &ObjectPose::from(&scene),
        config.supersample,
    )?;

    let blended = alpha_over(&rendered.intensity, &rendered.alpha, &background)?;
    let composite = if config.noise_sigma > 0.0 {
        add_gaussian_noise(&blended, config.noise_sigma, &mut stream)
    } else {
        blended
    };

    let mut originals = if bg.label_path.exists() {
        parse_label_file(&read_to_string(&bg.label_path)?, LabelKind::Mixed)
            .map_err(|e| Error::data(format!("{}: {e}", bg.label_path.display())))?
    } else {
        AnnotationSet::default()
    }
    .with_image_id(bg.id.clone());
    for &class_id in &config.drop_class_ids {
        originals = drop_class(&originals, class_id);
    }
    let originals_total = originals.len();

    let mask = extract_mask(&rendered, RENDERED_OBJECT_ID);
    let synthetic = AnnotationSet::new(
        bg.id.clone(),
        synthetic_annotation(&mask, ctx.new_class_id)
            .into_iter()
            .collect(),
    );

    let merged = merge_annotations(
        &originals,
        &synthetic,
        &rendered.alpha,
        background.width(),
        background.height(),
        config.occlusion_threshold,
    )?;
    let originals_dropped = originals_total + synthetic.len() - merged.len();

    Ok(JobOutput {
        resolved_pitch: scene
            .camera_pitch_deg
            .expect("pitch resolved for retained backgrounds"),
        scene,
        split: bg.split,
        composite,
        render: rendered,
        mask,
        merged,
        originals_total,
        originals_dropped,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn sanitize_id(id: &str) -> String {
    id.replace('/', "_")
}

/// Run the full generation pipeline. Returns the summary counters; all
/// progress goes to standard error.
pub fn run_generation(
    config: &PipelineConfig,
    options: &GenerationOptions,
) -> Result<GenerationSummary> {
    match options.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;
            pool.install(|| run_generation_inner(config, options))
        }
        None => run_generation_inner(config, options),
    }
}

fn run_generation_inner(
    config: &PipelineConfig,
    options: &GenerationOptions,
) -> Result<GenerationSummary> {
    let (ctx, backgrounds_skipped) = prepare_context(config)?;
    if backgrounds_skipped > 0 {
        let total = ctx.backgrounds.len() + backgrounds_skipped;
        eprintln!(
            "excluded {backgrounds_skipped} of {total} background(s) lacking pitch metadata \
             ({:.2}%)",
            100.0 * backgrounds_skipped as f64 / total as f64
        );
    }

    let manifest_path = config.output_root.join("manifest.jsonl");
    let mut reusable: BTreeMap<(String, u32), ManifestRow> = BTreeMap::new();
    if options.resume && manifest_path.exists() {
        for line in read_to_string(&manifest_path)?.lines().skip(1) {
            let Ok(row) = serde_json::from_str::<ManifestRow>(line) else {
                continue;
            };
            let image_ok = config.output_root.join(&row.image_path).exists();
            let label_ok = config.output_root.join(&row.label_path).exists();
            let mask_ok = !options.write_masks || row.mask_path.is_some();
            if image_ok && label_ok && mask_ok {
                reusable.insert((row.background_id.clone(), row.config_index), row);
            }
        }
    }

    let jobs: Vec<(usize, u32)> = (0..ctx.backgrounds.len())
        .flat_map(|bi| (0..ctx.config.ranges.n_config).map(move |ci| (bi, ci)))
        .collect();
    let total_jobs = jobs.len();
    let done = AtomicUsize::new(0);

    let results: Vec<(usize, JobResult)> = jobs
        .par_iter()
        .enumerate()
        .map(|(job_index, &(bi, ci))| {
            let bg = &ctx.backgrounds[bi];
            let outcome = if let Some(row) = reusable.get(&(bg.id.clone(), ci)) {
                Ok((row.clone(), true))
            } else {
                run_one_job(&ctx, bg, ci, options).map(|row| (row, false))
            };
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n.is_multiple_of(200) || n == total_jobs {
                eprintln!("generated {n}/{total_jobs}");
            }
            (job_index, outcome.map_err(|e| job_error(&bg.id, ci, e)))
        })
        .collect();

    let mut rows: Vec<ManifestRow> = Vec::with_capacity(total_jobs);
    let mut summary = GenerationSummary {
        backgrounds_skipped,
        ..GenerationSummary::default()
    };
    for (_, outcome) in results {
        match outcome {
            Ok((row, reused)) => {
                if reused {
                    summary.reused += 1;
                } else {
                    summary.images_written += 1;
                    summary.labels_written += 1;
                }
                summary.originals_dropped += row.originals_dropped;
                if !row.in_frustum {
                    summary.empty_synthetic += 1;
                }
                rows.push(row);
            }
            Err(e) if options.keep_going => eprintln!("skipping image: {e}"),
            Err(e) => return Err(e),
        }
    }
    rows.sort_by(|a, b| {
        (&a.background_id, a.config_index).cmp(&(&b.background_id, b.config_index))
    });

    let mut manifest = String::new();
    manifest.push_str(
        &serde_json::json!({ "type": "config", "config": config_json(config) }).to_string(),
    );
    manifest.push('\n');
    for row in &rows {
        manifest.push_str(&serde_json::to_string(row).expect("row serializes"));
        manifest.push('\n');
    }
    write_file(&manifest_path, manifest.as_bytes())?;

    if let Some(dump_path) = &options.dump_configs {
        // Scene configs are cheap to re-derive, so the dump always covers
        // every job, including reused ones.
        let mut dump = String::new();
        for &(bi, ci) in &jobs {
            let bg = &ctx.backgrounds[bi];
            let mut stream = derive_rng_stream(ctx.config.master_seed, &bg.id, ci);
            let scene = sample_scene_config(
                &ctx.config.ranges,
                ctx.config.pitch_mode,
                bg.pitch_deg,
                &mut stream,
                &bg.id,
                ci,
            );
            dump.push_str(&serde_json::to_string(&scene).expect("scene serializes"));
            dump.push('\n');
        }
        write_file(dump_path, dump.as_bytes())?;
    }

    eprintln!(
        "done: {} image(s) written, {} reused, {} original label(s) dropped, {} empty synthetic",
        summary.images_written, summary.reused, summary.originals_dropped, summary.empty_synthetic
    );
    Ok(summary)
}

fn job_error(background_id: &str, config_index: u32, e: Error) -> Error {
    Error::Data {
        message: format!("background {background_id:?} config {config_index}: {e}"),
    }
}

fn run_one_job(
    ctx: &Context,
    bg: &Background,
    config_index: u32,
    options: &GenerationOptions,
) -> Result<ManifestRow> {
    let out = generate_one(ctx, bg, config_index)?;
    let paths = output_paths(
        out.split,
        out.resolved_pitch,
        &sanitize_id(&bg.id),
        config_index,
    );
    let root = &ctx.config.output_root;
    save_image(&out.composite, &ensure_parent(&root.join(&paths.image))?)?;
    write_file(
        &root.join(&paths.label),
        serialize_annotations(&out.merged, LabelKind::Mixed)?.as_bytes(),
    )?;
    let mask_path = if options.write_masks {
        save_image(
            &out.mask.to_image(),
            &ensure_parent(&root.join(&paths.mask))?,
        )?;
        Some(paths.mask.to_string_lossy().replace('\\', "/"))
    } else {
        None
    };

    Ok(ManifestRow {
        background_id: bg.id.clone(),
        config_index,
        split: out.split.as_str().to_string(),
        pitch_deg: out.resolved_pitch,
        distance_m: out.scene.distance_m,
        camera_roll_deg: out.scene.camera_roll_deg,
        object_yaw_deg: out.scene.object_yaw_deg,
        object_x_m: out.scene.object_x_m,
        object_y_m: out.scene.object_y_m,
        in_frustum: !out.mask.is_empty(),
        originals_total: out.originals_total,
        originals_dropped: out.originals_dropped,
        synthetic_count: out.merged.len() + out.originals_dropped - out.originals_total,
        image_path: paths.image.to_string_lossy().replace('\\', "/"),
        label_path: paths.label.to_string_lossy().replace('\\', "/"),
        mask_path,
    })
}

fn ensure_parent(path: &Path) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(path.to_path_buf())
}

/// Files written by [`preview`].
#[derive(Debug, Clone)]
pub struct PreviewOutput {
    pub directory: PathBuf,
    pub composite: PathBuf,
    pub label: PathBuf,
    pub intensity: PathBuf,
    pub alpha: PathBuf,
    pub object_id: PathBuf,
    pub inverse_depth: PathBuf,
}

/// Generate one composite (config index 0) for a single background and dump
/// every render channel next to it under `<output_root>/preview/<id>/`.
pub fn preview(config: &PipelineConfig, background_id: &str) -> Result<PreviewOutput> {
    let (ctx, _) = prepare_context(config)?;
    let bg = ctx
        .backgrounds
        .iter()
        .find(|b| b.id == background_id)
        .ok_or_else(|| {
            Error::data(format!(
                "background {background_id:?} not found (or filtered for missing pitch metadata)"
            ))
        })?;
    let out = generate_one(&ctx, bg, 0)?;

    let dir = config.output_root.join("preview").join(sanitize_id(&bg.id));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let paths = PreviewOutput {
        composite: dir.join("composite.png"),
        label: dir.join("labels.txt"),
        intensity: dir.join("intensity.pgm"),
        alpha: dir.join("alpha.pgm"),
        object_id: dir.join("object_id.pgm"),
        inverse_depth: dir.join("inverse_depth.pgm"),
        directory: dir,
    };
    save_image(&out.composite, &paths.composite)?;
    write_file(
        &paths.label,
        serialize_annotations(&out.merged, LabelKind::Mixed)?.as_bytes(),
    )?;
    save_image(&out.render.intensity_image(), &paths.intensity)?;
    save_image(&out.render.alpha_image(), &paths.alpha)?;
    save_image(&out.render.object_id_image(255), &paths.object_id)?;
    save_image(&out.render.inverse_depth_image(), &paths.inverse_depth)?;
    Ok(paths)
}

/// Normalized-area statistics over parsed boxes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BboxAreaStats {
    pub count: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Non-mutating dataset scan results.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub images_scanned: usize,
    pub labels_scanned: usize,
    /// Label files with no matching image, by relative stem.
    pub orphan_labels: Vec<String>,
    /// Images with no matching label file.
    pub orphan_images: Vec<String>,
    /// `path:line: message` for every rejected line.
    pub invalid_lines: Vec<String>,
    pub class_histogram: BTreeMap<u32, u64>,
    pub bbox_area_stats: Option<BboxAreaStats>,
}

impl ValidationReport {
    /// True when no label line was rejected.
    pub fn is_clean(&self) -> bool {
        self.invalid_lines.is_empty()
    }
}

/// Scan an images/labels tree pair, applying the label parse rules line by
/// line and collecting hygiene statistics. Never mutates the dataset.
pub fn validate_dataset(images_dir: &Path, labels_dir: &Path) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();

    let stems_of = |root: &Path, extensions: &[&str]| -> Result<BTreeMap<String, PathBuf>> {
        let mut out = BTreeMap::new();
        for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| walk_error(root, e))?;
            if !entry.file_type().is_file() {
                continue;
            }
            let path = entry.path();
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            if !extensions.iter().any(|x| ext.eq_ignore_ascii_case(x)) {
                continue;
            }
            let rel = path.strip_prefix(root).expect("walked under root");
            let stem = rel.with_extension("").to_string_lossy().replace('\\', "/");
            out.insert(stem, path.to_path_buf());
        }
        Ok(out)
    };

    let images = stems_of(images_dir, &["png", "pgm"])?;
    let labels = stems_of(labels_dir, &["txt"])?;
    report.images_scanned = images.len();
    report.labels_scanned = labels.len();
    report.orphan_labels = labels
        .keys()
        .filter(|k| !images.contains_key(*k))
        .cloned()
        .collect();
    report.orphan_images = images
        .keys()
        .filter(|k| !labels.contains_key(*k))
        .cloned()
        .collect();

    let mut areas: Vec<f64> = Vec::new();
    for (stem, path) in &labels {
        let text = read_to_string(path)?;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_label_line(line, idx + 1, LabelKind::Mixed, false) {
                Ok(ann) => {
                    *report.class_histogram.entry(ann.class_id).or_insert(0) += 1;
                    if let Some(aabb) = ann.effective_aabb() {
                        areas.push(aabb.area());
                    }
                }
                Err(e) => report
                    .invalid_lines
                    .push(format!("{stem}.txt:{}", trim_error(&e))),
            }
        }
    }
    if !areas.is_empty() {
        report.bbox_area_stats = Some(BboxAreaStats {
            count: areas.len(),
            min: areas.iter().cloned().fold(f64::INFINITY, f64::min),
            mean: areas.iter().sum::<f64>() / areas.len() as f64,
            max: areas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    Ok(report)
}

/// "label parse error at line N: msg" -> "N: msg" (the stem prefix already
/// locates the file).
fn trim_error(e: &Error) -> String {
    match e {
        Error::LabelParse { line, message } => format!("{line}: {message}"),
        other => other.to_string(),
    }
}
