use super::{check_dims, BackgroundModel, BackgroundModelKind, ModelConfig, ModelFactory};
use crate::colorspace::ValuePlane;
use crate::error::{Error, Result};
use crate::morphology::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPixel {
    pub mu: f64,
    pub var: f64,
}

impl GaussianPixel {
    pub fn sigma(&self) -> f64 {
        self.var.sqrt()
    }
}

/// Per-pixel mean and variance learned from a human-free prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleGaussianModel {
    width: usize,
    height: usize,
    pixels: Vec<GaussianPixel>,
    k_sigma: f64,
    var_floor: f64,
}

impl SingleGaussianModel {
    pub fn pixels(&self) -> &[GaussianPixel] {
        &self.pixels
    }

    pub fn k_sigma(&self) -> f64 {
        self.k_sigma
    }

    pub fn var_floor(&self) -> f64 {
        self.var_floor
    }
}

/// Population mean and variance per pixel, variance clamped to `var_floor`.
pub fn single_gaussian_train(
    frames: &[ValuePlane],
    k_sigma: f64,
    var_floor: f64,
) -> Result<SingleGaussianModel> {
    if frames.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "single gaussian needs at least 2 training frames, got {}",
            frames.len()
        )));
    }
    if var_floor.is_nan() || var_floor <= 0.0 {
        return Err(Error::Config(format!(
            "var_floor must be positive, got {var_floor}"
        )));
    }
    let dims = frames[0].dims();
    for f in &frames[1..] {
        check_dims(dims, f)?;
    }
    let n = frames.len() as f64;
    let count = dims.0 * dims.1;
    let mut mean = vec![0.0; count];
    for f in frames {
        for (m, x) in mean.iter_mut().zip(f.values()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; count];
    for f in frames {
        for ((v, x), m) in var.iter_mut().zip(f.values()).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let pixels = mean
        .into_iter()
        .zip(var)
        .map(|(mu, ss)| GaussianPixel {
            mu,
            var: (ss / n).max(var_floor),
        })
        .collect();
    Ok(SingleGaussianModel {
        width: dims.0,
        height: dims.1,
        pixels,
        k_sigma,
        var_floor,
    })
}

/// Foreground wherever the sample lies more than `k_sigma` standard
/// deviations from the pixel mean.
pub fn single_gaussian_classify(
    model: &SingleGaussianModel,
    plane: &ValuePlane,
) -> Result<BinaryMask> {
    check_dims((model.width, model.height), plane)?;
    let data = plane
        .values()
        .iter()
        .zip(&model.pixels)
        .map(|(x, p)| (x - p.mu).abs() > model.k_sigma * p.sigma())
        .collect();
    BinaryMask::new(model.width, model.height, data)
}

impl BackgroundModel for SingleGaussianModel {
    fn kind(&self) -> BackgroundModelKind {
        BackgroundModelKind::SingleGaussian
    }

    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn classify(&mut self, plane: &ValuePlane) -> Result<BinaryMask> {
        single_gaussian_classify(self, plane)
    }

    fn snapshot_params(&self) -> Vec<f64> {
        vec![self.k_sigma, self.var_floor]
    }

    fn snapshot_pixels(&self) -> Vec<f64> {
        self.pixels.iter().flat_map(|p| [p.mu, p.var]).collect()
    }
}

pub struct SingleGaussianFactory;

impl ModelFactory for SingleGaussianFactory {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn kind(&self) -> BackgroundModelKind {
        BackgroundModelKind::SingleGaussian
    }

    fn default_train_frames(&self) -> usize {
        20
    }

    fn min_train_frames(&self) -> usize {
        2
    }

    fn build(
        &self,
        config: &ModelConfig,
        training: &[ValuePlane],
        _bootstrap: &ValuePlane,
    ) -> Result<Box<dyn BackgroundModel>> {
        Ok(Box::new(single_gaussian_train(
            training,
            config.k_sigma,
            config.gmm.var_floor,
        )?))
    }

    fn restore(
        &self,
        width: usize,
        height: usize,
        params: &[f64],
        pixels: &[f64],
    ) -> Result<Box<dyn BackgroundModel>> {
        let [k_sigma, var_floor] = params else {
            return Err(Error::Snapshot(format!(
                "gaussian expects 2 parameters, found {}",
                params.len()
            )));
        };
        if pixels.len() != width * height * 2 {
            return Err(Error::Snapshot(
                "gaussian pixel data has wrong length".into(),
            ));
        }
        let pixels = pixels
            .chunks_exact(2)
            .map(|c| GaussianPixel {
                mu: c[0],
                var: c[1],
            })
            .collect();
        Ok(Box::new(SingleGaussianModel {
            width,
            height,
            pixels,
            k_sigma: *k_sigma,
            var_floor: *var_floor,
        }))
    }
}
