//! Brute-force reference implementations shared by the integration tests.
//! Each one is written from the definitions, not from the library code.
#![allow(dead_code)]

use silhouette::bgmodels::GmmComponent;
use silhouette::morphology::{BinaryMask, SeShape};

/// HSV from integer channels. Hue comes from channel differences directly,
/// which is scale-free, so no normalized intermediate is shared with the
/// library.
pub fn hsv_oracle(px: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = px.map(i64::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0 {
        0.0
    } else if max == r {
        let sector = (g - b) as f64 / d as f64;
        let h = 60.0 * if sector < 0.0 { sector + 6.0 } else { sector };
        if h >= 360.0 {
            h - 360.0
        } else {
            h
        }
    } else if max == g {
        60.0 * (2.0 + (b - r) as f64 / d as f64)
    } else {
        60.0 * (4.0 + (r - g) as f64 / d as f64)
    };
    let s = if max == 0 { 0.0 } else { d as f64 / max as f64 };
    (h, s, max as f64 / 255.0)
}

pub fn se_offsets(shape: SeShape, radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if shape == SeShape::Square || dx == 0 || dy == 0 {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn at(mask: &BinaryMask, x: isize, y: isize, pad: bool) -> bool {
    if x < 0 || y < 0 || x as usize >= mask.width() || y as usize >= mask.height() {
        pad
    } else {
        mask.get(x as usize, y as usize)
    }
}

pub fn dilate_naive(mask: &BinaryMask, offsets: &[(isize, isize)]) -> BinaryMask {
    let mut out = BinaryMask::empty(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let hit = offsets
                .iter()
                .any(|&(dx, dy)| at(mask, x as isize + dx, y as isize + dy, false));
            out.set(x, y, hit);
        }
    }
    out
}

/// Erosion with a configurable value for cells outside the image.
pub fn erode_naive(mask: &BinaryMask, offsets: &[(isize, isize)], pad: bool) -> BinaryMask {
    let mut out = BinaryMask::empty(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let all = offsets
                .iter()
                .all(|&(dx, dy)| at(mask, x as isize + dx, y as isize + dy, pad));
            out.set(x, y, all);
        }
    }
    out
}

/// Error percentage from explicit confusion counts.
pub fn error_oracle(pred: &BinaryMask, truth: &BinaryMask) -> f64 {
    let (mut tp, mut fp, mut tn, mut fneg) = (0u64, 0u64, 0u64, 0u64);
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            match (pred.get(x, y), truth.get(x, y)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fneg += 1,
            }
        }
    }
    100.0 * (fp + fneg) as f64 / (tp + fp + tn + fneg) as f64
}

pub fn normal_density(x: f64, mu: f64, var: f64) -> f64 {
    let z = (x - mu) * (x - mu) / var;
    (-0.5 * z).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

pub fn mixture_oracle(components: &[GmmComponent], x: f64) -> f64 {
    components
        .iter()
        .map(|c| c.w * normal_density(x, c.mu, c.var))
        .sum()
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn mask_from_bits(width: usize, height: usize, bits: &[bool]) -> BinaryMask {
    BinaryMask::new(width, height, bits.to_vec()).unwrap()
}

/// Pixels at least `r` away from every edge.
pub fn interior(mask: &BinaryMask, r: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let (w, h) = mask.dims();
    (r..h.saturating_sub(r)).flat_map(move |y| (r..w.saturating_sub(r)).map(move |x| (x, y)))
}
