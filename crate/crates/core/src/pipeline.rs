//! Frame sequence in, silhouette masks out.
//!
//! Each frame is reduced to its Value plane, classified by the configured
//! background model and cleaned with binary morphology. Frame differencing
//! and the single Gaussian consume a training prefix that produces no
//! output; the mixture initialises from frame 0 and classifies every frame.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bgmodels::{BackgroundModel, GmmParams, ModelConfig, ModelRegistry};
use crate::colorspace::{rgb_value_plane, ValuePlane};
use crate::error::{Error, Result};
use crate::imageio;
use crate::morphology::{clean_with, BinaryMask, CleanOrder, SeShape, StructuringElement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Registry name of the background model.
    pub approach: String,
    /// Frames consumed before output starts; per-approach default when unset.
    pub train_frames: Option<usize>,
    pub tau: f64,
    pub k_sigma: f64,
    pub gmm: GmmParams,
    pub se_shape: SeShape,
    pub se_radius: usize,
    pub clean_order: CleanOrder,
    pub output_dir: Option<PathBuf>,
    /// Empty-scene frame used as the frame-differencing reference instead of
    /// the first frame.
    pub reference_frame: Option<PathBuf>,
    /// Also write pre-morphology masks under `raw/`.
    pub emit_raw: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        Self {
            approach: "gmm".into(),
            train_frames: None,
            tau: model.tau,
            k_sigma: model.k_sigma,
            gmm: model.gmm,
            se_shape: SeShape::Square,
            se_radius: 1,
            clean_order: CleanOrder::OpenClose,
            output_dir: None,
            reference_frame: None,
            emit_raw: false,
        }
    }
}

impl PipelineConfig {
    pub fn for_approach(approach: &str) -> Self {
        Self {
            approach: approach.into(),
            ..Self::default()
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            tau: self.tau,
            k_sigma: self.k_sigma,
            gmm: self.gmm.clone(),
        }
    }

    pub fn structuring_element(&self) -> Result<StructuringElement> {
        StructuringElement::new(self.se_shape, self.se_radius)
    }

    pub fn validate(&self, registry: &ModelRegistry) -> Result<()> {
        registry.get(&self.approach)?;
        self.model_config().validate()?;
        self.structuring_element()?;
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Ordered frame files of uniform size.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    paths: Vec<PathBuf>,
    width: usize,
    height: usize,
}

impl FrameSequence {
    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Decodes frames lazily, in order, as Value planes.
    pub fn planes(&self) -> impl Iterator<Item = Result<ValuePlane>> + '_ {
        self.paths
            .iter()
            .map(|p| imageio::read_rgb_frame(p).map(|f| rgb_value_plane(&f)))
    }
}

fn is_frame_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("png" | "ppm")
    )
}

/// Collects files in `dir` whose names match `pattern` (a glob on the file
/// name), sorted lexicographically. With `None`, every `.png`/`.ppm` file is
/// taken.
pub fn load_sequence(dir: &Path, pattern: Option<&str>) -> Result<FrameSequence> {
    let matcher = pattern
        .map(glob::Pattern::new)
        .transpose()
        .map_err(|e| Error::Config(format!("bad frame pattern: {e}")))?;
    let entries = std::fs::read_dir(dir).map_err(|e| Error::read(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::read(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let keep = match &matcher {
            Some(m) => m.matches(name),
            None => is_frame_file(&path),
        };
        if keep {
            paths.push(path);
        }
    }
    paths.sort();
    let first = paths
        .first()
        .ok_or_else(|| Error::EmptyInput(format!("no frames found in {}", dir.display())))?;
    let (width, height) = imageio::frame_dimensions(first)?;
    for p in &paths[1..] {
        let dims = imageio::frame_dimensions(p)?;
        if dims != (width, height) {
            return Err(Error::Shape(format!(
                "{} is {}x{}, expected {width}x{height}",
                p.display(),
                dims.0,
                dims.1
            )));
        }
    }
    Ok(FrameSequence {
        paths,
        width,
        height,
    })
}

/// Masks for one input frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMasks {
    /// Index of the source frame in the sequence.
    pub index: usize,
    pub raw: BinaryMask,
    pub clean: BinaryMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timing {
    pub frames: usize,
    pub total_ms: f64,
}

impl Timing {
    pub fn ms_per_frame(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.total_ms / self.frames as f64
        }
    }

    pub fn frames_per_sec(&self) -> f64 {
        if self.total_ms == 0.0 {
            0.0
        } else {
            1000.0 * self.frames as f64 / self.total_ms
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub frames: Vec<FrameMasks>,
    pub timing: Timing,
}

impl ExtractionResult {
    pub fn clean_masks(&self) -> impl Iterator<Item = &BinaryMask> {
        self.frames.iter().map(|f| &f.clean)
    }
}

/// Where the background model comes from.
pub enum ModelSource {
    /// Build from the training prefix of the sequence.
    Train,
    /// Build from an explicit empty-scene plane instead of the sequence prefix.
    Reference(ValuePlane),
    /// Continue from previously saved state.
    Resume(Box<dyn BackgroundModel>),
}

pub struct Extraction {
    pub result: ExtractionResult,
    pub model: Box<dyn BackgroundModel>,
}

/// Runs the full pipeline over `planes`.
pub fn extract<I>(
    planes: I,
    config: &PipelineConfig,
    registry: &ModelRegistry,
    source: ModelSource,
) -> Result<Extraction>
where
    I: IntoIterator<Item = Result<ValuePlane>>,
{
    config.validate(registry)?;
    let factory = registry.get(&config.approach)?;
    let model_config = config.model_config();
    let se = config.structuring_element()?;

    let train_frames = match (&source, config.train_frames) {
        (_, Some(n)) => n,
        (ModelSource::Train, None) => factory.default_train_frames(),
        (_, None) => 0,
    };
    if matches!(source, ModelSource::Train) && train_frames < factory.min_train_frames() {
        return Err(Error::Config(format!(
            "{} needs train_frames >= {}, got {train_frames}",
            factory.name(),
            factory.min_train_frames()
        )));
    }

    let mut planes = planes.into_iter();
    let mut training = Vec::with_capacity(train_frames);
    let mut seen = 0usize;
    let mut dims = None;
    let mut check = |plane: &ValuePlane| -> Result<()> {
        match dims {
            None => dims = Some(plane.dims()),
            Some(d) if d != plane.dims() => {
                return Err(Error::Shape(format!(
                    "frame {seen} is {}x{}, sequence is {}x{}",
                    plane.width(),
                    plane.height(),
                    d.0,
                    d.1
                )))
            }
            _ => {}
        }
        seen += 1;
        Ok(())
    };

    let length_error = |have: usize| {
        Error::Config(format!(
            "train_frames ({train_frames}) must be less than the sequence length ({have})"
        ))
    };

    for _ in 0..train_frames {
        let plane = planes
            .next()
            .ok_or_else(|| length_error(training.len()))??;
        check(&plane)?;
        training.push(plane);
    }

    let started = Instant::now();
    let mut pending = None;
    let mut model = match source {
        ModelSource::Resume(model) => {
            if model.kind() != factory.kind() {
                return Err(Error::Config(format!(
                    "saved state is {}, but approach is {}",
                    model.kind(),
                    factory.name()
                )));
            }
            model
        }
        ModelSource::Reference(reference) => {
            factory.build(&model_config, std::slice::from_ref(&reference), &reference)?
        }
        ModelSource::Train => {
            let bootstrap = match training.first() {
                Some(p) => p.clone(),
                None => {
                    let plane = planes.next().ok_or_else(|| length_error(0))??;
                    check(&plane)?;
                    pending = Some(plane.clone());
                    plane
                }
            };
            factory.build(&model_config, &training, &bootstrap)?
        }
    };
    drop(training);

    let mut frames = Vec::new();
    let mut index = train_frames;
    for plane in pending.map(Ok).into_iter().chain(planes) {
        let plane = plane?;
        if plane.dims() != model.dims() {
            return Err(Error::Shape(format!(
                "frame {index} is {}x{}, model is {}x{}",
                plane.width(),
                plane.height(),
                model.dims().0,
                model.dims().1
            )));
        }
        let raw = model.classify(&plane)?;
        let clean = clean_with(&raw, &se, config.clean_order);
        frames.push(FrameMasks { index, raw, clean });
        index += 1;
    }
    if frames.is_empty() {
        return Err(length_error(index));
    }
    let timing = Timing {
        frames: frames.len(),
        total_ms: started.elapsed().as_secs_f64() * 1000.0,
    };
    Ok(Extraction {
        result: ExtractionResult { frames, timing },
        model,
    })
}

/// Loads and runs a sequence with the built-in approaches, honouring
/// `config.reference_frame`.
pub fn run_pipeline(seq: &FrameSequence, config: &PipelineConfig) -> Result<ExtractionResult> {
    let registry = ModelRegistry::builtin();
    let source = match &config.reference_frame {
        Some(path) => {
            let plane = rgb_value_plane(&imageio::read_rgb_frame(path)?);
            if plane.dims() != seq.dims() {
                return Err(Error::Shape(format!(
                    "reference frame {} is {}x{}, sequence is {}x{}",
                    path.display(),
                    plane.width(),
                    plane.height(),
                    seq.width,
                    seq.height
                )));
            }
            ModelSource::Reference(plane)
        }
        None => ModelSource::Train,
    };
    Ok(extract(seq.planes(), config, &registry, source)?.result)
}

/// Writes one `mask_NNNNNN.png` per cleaned mask, named by source frame index.
pub fn write_masks(result: &ExtractionResult, dir: &Path) -> Result<usize> {
    std::fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    for f in &result.frames {
        imageio::write_mask(&f.clean, &dir.join(imageio::mask_file_name(f.index)))?;
    }
    Ok(result.frames.len())
}

/// Writes the pre-morphology masks under `dir/raw/`.
pub fn write_raw_masks(result: &ExtractionResult, dir: &Path) -> Result<usize> {
    let raw_dir = dir.join("raw");
    std::fs::create_dir_all(&raw_dir).map_err(|e| Error::write(&raw_dir, e))?;
    for f in &result.frames {
        imageio::write_mask(&f.raw, &raw_dir.join(imageio::mask_file_name(f.index)))?;
    }
    Ok(result.frames.len())
}
