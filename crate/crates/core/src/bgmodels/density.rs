use std::f64::consts::PI;

use super::GmmPixelModel;
use crate::error::{Error, Result};

/// Normal density with mean `mu` and variance `var` (not standard deviation).
pub fn gaussian_pdf(x: f64, mu: f64, var: f64) -> Result<f64> {
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::InputDomain(format!(
            "variance must be positive and finite, got {var}"
        )));
    }
    let d = x - mu;
    Ok((-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}

/// Mixture density `sum_i w_i * N(x; mu_i, var_i)` of one pixel's model.
pub fn gmm_pixel_probability(model: &GmmPixelModel, x: f64) -> Result<f64> {
    if model.components().is_empty() {
        return Err(Error::State("mixture has no components".into()));
    }
    model
        .components()
        .iter()
        .map(|c| gaussian_pdf(x, c.mu, c.var).map(|p| c.w * p))
        .sum()
}
