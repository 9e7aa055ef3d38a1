//! Adaptive per-pixel Gaussian mixture.
//!
//! Each pixel keeps up to `k_max` weighted components ordered by fitness
//! `w / sigma`. An incoming sample is matched against the first component
//! within `match_k` standard deviations. The leading components whose
//! cumulative weight first exceeds `T` describe the background.

use serde::{Deserialize, Serialize};

use super::{check_dims, BackgroundModel, BackgroundModelKind, ModelConfig, ModelFactory};
use crate::colorspace::ValuePlane;
use crate::error::{Error, Result};
use crate::morphology::BinaryMask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmParams {
    /// Component capacity per pixel.
    pub k_max: usize,
    /// Learning rate.
    pub alpha: f64,
    /// Background portion: cumulative weight the background components must exceed.
    #[serde(rename = "T", alias = "bg_threshold")]
    pub bg_threshold: f64,
    /// Match window in standard deviations.
    pub match_k: f64,
    pub var_init: f64,
    pub var_floor: f64,
    /// Weight given to a freshly created component; `alpha` when unset.
    pub w_init: Option<f64>,
}

impl Default for GmmParams {
    fn default() -> Self {
        Self {
            k_max: 4,
            alpha: 0.01,
            bg_threshold: 0.2,
            match_k: 2.5,
            var_init: (15.0 / 255.0) * (15.0 / 255.0),
            var_floor: (2.0 / 255.0) * (2.0 / 255.0),
            w_init: None,
        }
    }
}

impl GmmParams {
    pub fn w_init(&self) -> f64 {
        self.w_init.unwrap_or(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k_max == 0 || self.k_max > u8::MAX as usize {
            return fail(format!("k_max must lie in [1,255], got {}", self.k_max));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if !(self.bg_threshold > 0.0 && self.bg_threshold < 1.0) {
            return fail(format!("T must lie in (0,1), got {}", self.bg_threshold));
        }
        if !(self.match_k > 0.0 && self.match_k.is_finite()) {
            return fail(format!("match_k must be positive, got {}", self.match_k));
        }
        if !(self.var_floor > 0.0 && self.var_floor.is_finite()) {
            return fail(format!(
                "var_floor must be positive, got {}",
                self.var_floor
            ));
        }
        if !(self.var_init >= self.var_floor && self.var_init.is_finite()) {
            return fail(format!(
                "var_init ({}) must be at least var_floor ({})",
                self.var_init, self.var_floor
            ));
        }
        let w = self.w_init();
        if !(w > 0.0 && w <= 1.0) {
            return fail(format!("w_init must lie in (0,1], got {w}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmComponent {
    pub w: f64,
    pub mu: f64,
    pub var: f64,
}

impl GmmComponent {
    pub fn fitness(&self) -> f64 {
        self.w / self.var.sqrt()
    }
}

/// Mixture state of a single pixel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GmmPixelModel {
    components: Vec<GmmComponent>,
}

impl GmmPixelModel {
    pub fn new(x: f64, params: &GmmParams) -> Self {
        let mut components = Vec::with_capacity(params.k_max);
        components.push(GmmComponent {
            w: 1.0,
            mu: x,
            var: params.var_init,
        });
        Self { components }
    }

    /// Wraps components as given, without reordering or renormalizing.
    pub fn from_components(components: Vec<GmmComponent>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|c| c.w).sum()
    }

    /// Folds one sample into the mixture; returns `true` if the sample is
    /// foreground.
    pub fn update(&mut self, x: f64, params: &GmmParams) -> bool {
        let alpha = params.alpha;
        let matched = self
            .components
            .iter()
            .position(|c| (x - c.mu).abs() <= params.match_k * c.var.sqrt());

        let touched = match matched {
            Some(i) => {
                for c in &mut self.components {
                    c.w *= 1.0 - alpha;
                }
                let c = &mut self.components[i];
                c.w += alpha;
                let rho = alpha;
                c.mu = (1.0 - rho) * c.mu + rho * x;
                let d = x - c.mu;
                c.var = ((1.0 - rho) * c.var + rho * d * d).max(params.var_floor);
                i
            }
            None => {
                let fresh = GmmComponent {
                    w: params.w_init(),
                    mu: x,
                    var: params.var_init,
                };
                let slot = if self.components.len() < params.k_max {
                    self.components.push(fresh);
                    self.components.len() - 1
                } else {
                    let last = self.components.len() - 1;
                    self.components[last] = fresh;
                    last
                };
                let total = self.weight_sum();
                for c in &mut self.components {
                    c.w /= total;
                }
                slot
            }
        };

        let pos = self.sort_tracking(touched);
        match matched {
            Some(_) => pos >= self.background_count(params.bg_threshold),
            None => true,
        }
    }

    /// Number of leading components forming the background: the smallest
    /// prefix whose cumulative weight is strictly greater than `threshold`.
    pub fn background_count(&self, threshold: f64) -> usize {
        let mut cum = 0.0;
        for (k, c) in self.components.iter().enumerate() {
            cum += c.w;
            if cum > threshold {
                return k + 1;
            }
        }
        self.components.len()
    }

    // Stable insertion sort by descending fitness; returns the new index of
    // the component that started at `tracked`.
    fn sort_tracking(&mut self, mut tracked: usize) -> usize {
        let comps = &mut self.components;
        for i in 1..comps.len() {
            let mut j = i;
            while j > 0 && comps[j - 1].fitness() < comps[j].fitness() {
                comps.swap(j - 1, j);
                if tracked == j {
                    tracked = j - 1;
                } else if tracked == j - 1 {
                    tracked = j;
                }
                j -= 1;
            }
        }
        tracked
    }
}

/// One mixture per pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    width: usize,
    height: usize,
    params: GmmParams,
    pixels: Vec<GmmPixelModel>,
}

impl GmmModel {
    pub fn params(&self) -> &GmmParams {
        &self.params
    }

    pub fn pixels(&self) -> &[GmmPixelModel] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> &GmmPixelModel {
        &self.pixels[y * self.width + x]
    }
}

/// One unit-weight component per pixel centred on the plane's value.
pub fn gmm_init(plane: &ValuePlane, params: &GmmParams) -> GmmModel {
    GmmModel {
        width: plane.width(),
        height: plane.height(),
        params: params.clone(),
        pixels: plane
            .values()
            .iter()
            .map(|&x| GmmPixelModel::new(x, params))
            .collect(),
    }
}

pub fn gmm_update_and_classify(model: &mut GmmModel, plane: &ValuePlane) -> Result<BinaryMask> {
    check_dims((model.width, model.height), plane)?;
    let params = &model.params;
    let data = model
        .pixels
        .iter_mut()
        .zip(plane.values())
        .map(|(px, &x)| px.update(x, params))
        .collect();
    BinaryMask::new(model.width, model.height, data)
}

impl BackgroundModel for GmmModel {
    fn kind(&self) -> BackgroundModelKind {
        BackgroundModelKind::Gmm
    }

    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn classify(&mut self, plane: &ValuePlane) -> Result<BinaryMask> {
        gmm_update_and_classify(self, plane)
    }

    fn snapshot_params(&self) -> Vec<f64> {
        let p = &self.params;
        vec![
            p.k_max as f64,
            p.alpha,
            p.bg_threshold,
            p.match_k,
            p.var_init,
            p.var_floor,
            p.w_init(),
        ]
    }

    /// Per pixel: component count, then `k_max` `(w, mu, var)` triples with
    /// unused slots zeroed.
    fn snapshot_pixels(&self) -> Vec<f64> {
        let k = self.params.k_max;
        let mut out = Vec::with_capacity(self.pixels.len() * (1 + 3 * k));
        for px in &self.pixels {
            out.push(px.components.len() as f64);
            for slot in 0..k {
                match px.components.get(slot) {
                    Some(c) => out.extend([c.w, c.mu, c.var]),
                    None => out.extend([0.0; 3]),
                }
            }
        }
        out
    }
}

pub struct GmmFactory;

impl ModelFactory for GmmFactory {
    fn name(&self) -> &'static str {
        "gmm"
    }

    fn kind(&self) -> BackgroundModelKind {
        BackgroundModelKind::Gmm
    }

    fn default_train_frames(&self) -> usize {
        0
    }

    fn min_train_frames(&self) -> usize {
        0
    }

    /// Initialises from `bootstrap`, then runs the update over the training
    /// planes, discarding their masks.
    fn build(
        &self,
        config: &ModelConfig,
        training: &[ValuePlane],
        bootstrap: &ValuePlane,
    ) -> Result<Box<dyn BackgroundModel>> {
        config.gmm.validate()?;
        let mut model = gmm_init(bootstrap, &config.gmm);
        for plane in training {
            gmm_update_and_classify(&mut model, plane)?;
        }
        Ok(Box::new(model))
    }

    fn restore(
        &self,
        width: usize,
        height: usize,
        params: &[f64],
        pixels: &[f64],
    ) -> Result<Box<dyn BackgroundModel>> {
        let [k_max, alpha, bg_threshold, match_k, var_init, var_floor, w_init] = params else {
            return Err(Error::Snapshot(format!(
                "gmm expects 7 parameters, found {}",
                params.len()
            )));
        };
        let params = GmmParams {
            k_max: *k_max as usize,
            alpha: *alpha,
            bg_threshold: *bg_threshold,
            match_k: *match_k,
            var_init: *var_init,
            var_floor: *var_floor,
            w_init: Some(*w_init),
        };
        params
            .validate()
            .map_err(|e| Error::Snapshot(e.to_string()))?;
        let stride = 1 + 3 * params.k_max;
        if pixels.len() != width * height * stride {
            return Err(Error::Snapshot("gmm pixel data has wrong length".into()));
        }
        let mut grid = Vec::with_capacity(width * height);
        for chunk in pixels.chunks_exact(stride) {
            let n = chunk[0] as usize;
            if n == 0 || n > params.k_max {
                return Err(Error::Snapshot(format!(
                    "invalid component count {}",
                    chunk[0]
                )));
            }
            let components = chunk[1..1 + 3 * n]
                .chunks_exact(3)
                .map(|t| GmmComponent {
                    w: t[0],
                    mu: t[1],
                    var: t[2],
                })
                .collect();
            grid.push(GmmPixelModel { components });
        }
        Ok(Box::new(GmmModel {
            width,
            height,
            params,
            pixels: grid,
        }))
    }
}
