use super::{check_dims, BackgroundModel, BackgroundModelKind, ModelConfig, ModelFactory};
use crate::colorspace::ValuePlane;
use crate::error::{Error, Result};
use crate::morphology::BinaryMask;

/// Fixed reference plane compared against each incoming plane.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDiffModel {
    reference: ValuePlane,
    tau: f64,
}

impl FrameDiffModel {
    pub fn new(reference: ValuePlane, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0,1), got {tau}")));
        }
        Ok(Self { reference, tau })
    }

    pub fn reference(&self) -> &ValuePlane {
        &self.reference
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Foreground wherever `|plane - reference| > tau`.
pub fn frame_diff_classify(model: &FrameDiffModel, plane: &ValuePlane) -> Result<BinaryMask> {
    check_dims(model.reference.dims(), plane)?;
    let data = plane
        .values()
        .iter()
        .zip(model.reference.values())
        .map(|(x, r)| (x - r).abs() > model.tau)
        .collect();
    BinaryMask::new(plane.width(), plane.height(), data)
}

impl BackgroundModel for FrameDiffModel {
    fn kind(&self) -> BackgroundModelKind {
        BackgroundModelKind::FrameDiff
    }

    fn dims(&self) -> (usize, usize) {
        self.reference.dims()
    }

    fn classify(&mut self, plane: &ValuePlane) -> Result<BinaryMask> {
        frame_diff_classify(self, plane)
    }

    fn snapshot_params(&self) -> Vec<f64> {
        vec![self.tau]
    }

    fn snapshot_pixels(&self) -> Vec<f64> {
        self.reference.values().to_vec()
    }
}

pub struct FrameDiffFactory;

impl ModelFactory for FrameDiffFactory {
    fn name(&self) -> &'static str {
        "framediff"
    }

    fn kind(&self) -> BackgroundModelKind {
        BackgroundModelKind::FrameDiff
    }

    fn default_train_frames(&self) -> usize {
        1
    }

    fn min_train_frames(&self) -> usize {
        1
    }

    /// The reference is the first training plane.
    fn build(
        &self,
        config: &ModelConfig,
        training: &[ValuePlane],
        _bootstrap: &ValuePlane,
    ) -> Result<Box<dyn BackgroundModel>> {
        let reference = training.first().ok_or_else(|| {
            Error::InsufficientData("frame differencing needs a reference frame".into())
        })?;
        Ok(Box::new(FrameDiffModel::new(
            reference.clone(),
            config.tau,
        )?))
    }

    fn restore(
        &self,
        width: usize,
        height: usize,
        params: &[f64],
        pixels: &[f64],
    ) -> Result<Box<dyn BackgroundModel>> {
        let [tau] = params else {
            return Err(Error::Snapshot(format!(
                "framediff expects 1 parameter, found {}",
                params.len()
            )));
        };
        let reference = ValuePlane::new(width, height, pixels.to_vec())
            .map_err(|e| Error::Snapshot(e.to_string()))?;
        Ok(Box::new(FrameDiffModel::new(reference, *tau)?))
    }
}
