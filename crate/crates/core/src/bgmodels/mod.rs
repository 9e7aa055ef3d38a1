//! Background models over Value planes.
//!
//! Every approach implements [`BackgroundModel`] and is constructed through a
//! [`ModelFactory`] registered by name in a [`ModelRegistry`]. The pipeline and
//! CLI only ever see `Box<dyn BackgroundModel>`; picking an approach is a
//! registry lookup.

mod density;
mod frame_diff;
mod gmm;
mod single_gaussian;
pub mod snapshot;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::colorspace::ValuePlane;
use crate::error::{Error, Result};
use crate::morphology::BinaryMask;

pub use density::{gaussian_pdf, gmm_pixel_probability};
pub use frame_diff::{frame_diff_classify, FrameDiffFactory, FrameDiffModel};
pub use gmm::{
    gmm_init, gmm_update_and_classify, GmmComponent, GmmFactory, GmmModel, GmmParams, GmmPixelModel,
};
pub use single_gaussian::{
    single_gaussian_classify, single_gaussian_train, GaussianPixel, SingleGaussianFactory,
    SingleGaussianModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackgroundModelKind {
    FrameDiff,
    SingleGaussian,
    Gmm,
}

impl BackgroundModelKind {
    /// Tag byte used in state snapshots.
    pub fn tag(self) -> u8 {
        match self {
            BackgroundModelKind::FrameDiff => 0,
            BackgroundModelKind::SingleGaussian => 1,
            BackgroundModelKind::Gmm => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(BackgroundModelKind::FrameDiff),
            1 => Some(BackgroundModelKind::SingleGaussian),
            2 => Some(BackgroundModelKind::Gmm),
            _ => None,
        }
    }
}

impl fmt::Display for BackgroundModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackgroundModelKind::FrameDiff => "framediff",
            BackgroundModelKind::SingleGaussian => "gaussian",
            BackgroundModelKind::Gmm => "gmm",
        })
    }
}

/// Tunables shared by all approaches. Each model reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Absolute Value difference above which frame differencing flags a pixel.
    pub tau: f64,
    /// Single-Gaussian foreground distance in standard deviations.
    pub k_sigma: f64,
    pub gmm: GmmParams,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            k_sigma: 2.5,
            gmm: GmmParams::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!(
                "tau must lie in (0,1), got {}",
                self.tau
            )));
        }
        if !(self.k_sigma > 0.0 && self.k_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "k_sigma must be positive, got {}",
                self.k_sigma
            )));
        }
        self.gmm.validate()
    }
}

/// A per-pixel background model.
pub trait BackgroundModel: Send {
    fn kind(&self) -> BackgroundModelKind;

    /// `(width, height)` the model was built for.
    fn dims(&self) -> (usize, usize);

    /// Labels each pixel of `plane` as foreground (`true`) or background.
    /// Adaptive models also fold the plane into their state.
    fn classify(&mut self, plane: &ValuePlane) -> Result<BinaryMask>;

    /// Scalar parameters stored in the snapshot header.
    fn snapshot_params(&self) -> Vec<f64>;

    /// Row-major per-pixel state, a fixed number of values per pixel.
    fn snapshot_pixels(&self) -> Vec<f64>;
}

/// Builds one kind of [`BackgroundModel`].
pub trait ModelFactory: Send + Sync {
    /// Registry key, as typed on the command line.
    fn name(&self) -> &'static str;

    fn kind(&self) -> BackgroundModelKind;

    /// Frames consumed for training when the user does not say otherwise.
    fn default_train_frames(&self) -> usize;

    fn min_train_frames(&self) -> usize;

    /// Builds a model from the training prefix. `bootstrap` is the first
    /// frame of the sequence, used by models that initialise from it.
    fn build(
        &self,
        config: &ModelConfig,
        training: &[ValuePlane],
        bootstrap: &ValuePlane,
    ) -> Result<Box<dyn BackgroundModel>>;

    /// Rebuilds a model from snapshot contents.
    fn restore(
        &self,
        width: usize,
        height: usize,
        params: &[f64],
        pixels: &[f64],
    ) -> Result<Box<dyn BackgroundModel>>;
}

/// Name-keyed collection of model factories.
pub struct ModelRegistry {
    factories: BTreeMap<&'static str, Box<dyn ModelFactory>>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding the three built-in approaches.
    pub fn builtin() -> Self {
        let mut reg = Self::new();
        reg.register(Box::new(FrameDiffFactory));
        reg.register(Box::new(SingleGaussianFactory));
        reg.register(Box::new(GmmFactory));
        reg
    }

    /// Adds a factory, replacing any previous one with the same name.
    pub fn register(&mut self, factory: Box<dyn ModelFactory>) {
        self.factories.insert(factory.name(), factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelFactory> {
        self.factories.get(name).map(|f| f.as_ref()).ok_or_else(|| {
            Error::Config(format!(
                "unknown approach `{name}` (valid approaches: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn by_kind(&self, kind: BackgroundModelKind) -> Result<&dyn ModelFactory> {
        self.factories
            .values()
            .find(|f| f.kind() == kind)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::Config(format!("no factory registered for {kind}")))
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Classifies `plane` with `model` after checking it is of the expected kind.
pub fn model_classify(
    kind: BackgroundModelKind,
    model: &mut dyn BackgroundModel,
    plane: &ValuePlane,
) -> Result<BinaryMask> {
    if model.kind() != kind {
        return Err(Error::Config(format!(
            "requested {kind} classification but model state is {}",
            model.kind()
        )));
    }
    model.classify(plane)
}

pub(crate) fn check_dims(expected: (usize, usize), plane: &ValuePlane) -> Result<()> {
    if plane.dims() != expected {
        return Err(Error::Shape(format!(
            "plane is {}x{}, model expects {}x{}",
            plane.width(),
            plane.height(),
            expected.0,
            expected.1
        )));
    }
    Ok(())
}
