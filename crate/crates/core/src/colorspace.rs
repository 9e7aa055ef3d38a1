//! RGB normalization, RGB to HSV conversion, Value-plane extraction and
//! per-layer histograms.
//!
//! All arithmetic is done in `f64`. Hue is reported in degrees in `[0, 360)`,
//! saturation and value in `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default number of histogram bins, one per 8-bit level.
pub const DEFAULT_HISTOGRAM_BINS: usize = 256;

/// An 8-bit RGB frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "rgb frame {width}x{height} needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a frame from interleaved `r, g, b` bytes.
    pub fn from_interleaved(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::Shape(format!(
                "rgb frame {width}x{height} needs {} bytes, got {}",
                width * height * 3,
                bytes.len()
            )));
        }
        let data = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }
}

/// A pixel scaled into `[0, 1]` along with its channel extrema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub cmax: f64,
    pub cmin: f64,
    pub delta: f64,
}

/// One HSV triple: hue in degrees, saturation and value unitless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

pub fn normalize_rgb(px: [u8; 3]) -> NormRgb {
    let r = f64::from(px[0]) / 255.0;
    let g = f64::from(px[1]) / 255.0;
    let b = f64::from(px[2]) / 255.0;
    let cmax = r.max(g).max(b);
    let cmin = r.min(g).min(b);
    NormRgb {
        r,
        g,
        b,
        cmax,
        cmin,
        delta: cmax - cmin,
    }
}

/// Validates integer channels before normalizing them.
pub fn normalize_rgb_checked(r: i64, g: i64, b: i64) -> Result<NormRgb> {
    Ok(normalize_rgb(checked_pixel(r, g, b)?))
}

fn checked_pixel(r: i64, g: i64, b: i64) -> Result<[u8; 3]> {
    let channel = |name: &str, v: i64| {
        u8::try_from(v)
            .map_err(|_| Error::InputDomain(format!("{name} channel {v} outside [0,255]")))
    };
    Ok([
        channel("red", r)?,
        channel("green", g)?,
        channel("blue", b)?,
    ])
}

/// Converts one pixel to HSV.
///
/// When two channels share the maximum, the red branch wins over green and
/// green over blue. A zero spread yields `h = 0` and `s = 0`.
pub fn rgb_to_hsv(px: [u8; 3]) -> Hsv {
    let n = normalize_rgb(px);
    let h = if n.delta == 0.0 {
        0.0
    } else if n.cmax == n.r {
        60.0 * ((n.g - n.b) / n.delta).rem_euclid(6.0)
    } else if n.cmax == n.g {
        60.0 * ((n.b - n.r) / n.delta + 2.0)
    } else {
        60.0 * ((n.r - n.g) / n.delta + 4.0)
    };
    let h = if h >= 360.0 { h - 360.0 } else { h };
    let s = if n.delta == 0.0 {
        0.0
    } else {
        n.delta / n.cmax
    };
    Hsv { h, s, v: n.cmax }
}

pub fn rgb_to_hsv_checked(r: i64, g: i64, b: i64) -> Result<Hsv> {
    Ok(rgb_to_hsv(checked_pixel(r, g, b)?))
}

/// An HSV frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HsvFrame {
    width: usize,
    height: usize,
    data: Vec<Hsv>,
}

impl HsvFrame {
    pub fn new(width: usize, height: usize, data: Vec<Hsv>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "hsv frame {width}x{height} needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Hsv] {
        &self.data
    }
}

pub fn frame_to_hsv(frame: &RgbFrame) -> HsvFrame {
    HsvFrame {
        width: frame.width,
        height: frame.height,
        data: frame.data.iter().map(|&px| rgb_to_hsv(px)).collect(),
    }
}

/// Single-channel plane of HSV values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuePlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ValuePlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "value plane {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

pub fn value_plane(frame: &HsvFrame) -> ValuePlane {
    ValuePlane {
        width: frame.width,
        height: frame.height,
        data: frame.data.iter().map(|p| p.v).collect(),
    }
}

/// Shortcut for `value_plane(&frame_to_hsv(frame))` without the intermediate
/// HSV frame.
pub fn rgb_value_plane(frame: &RgbFrame) -> ValuePlane {
    ValuePlane {
        width: frame.width,
        height: frame.height,
        data: frame
            .data
            .iter()
            .map(|&px| normalize_rgb(px).cmax)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Hue,
    Saturation,
    Value,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Hue, Layer::Saturation, Layer::Value];

    /// The half-open `[lo, hi)` range the layer's samples fall in.
    pub fn range(self) -> (f64, f64) {
        match self {
            Layer::Hue => (0.0, 360.0),
            Layer::Saturation | Layer::Value => (0.0, 1.0),
        }
    }

    fn sample(self, px: &Hsv) -> f64 {
        match self {
            Layer::Hue => px.h,
            Layer::Saturation => px.s,
            Layer::Value => px.v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Hue => "hue",
            Layer::Saturation => "saturation",
            Layer::Value => "value",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hue" | "h" => Ok(Layer::Hue),
            "saturation" | "s" => Ok(Layer::Saturation),
            "value" | "v" => Ok(Layer::Value),
            other => Err(Error::Config(format!(
                "unknown layer `{other}` (expected hue, saturation or value)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerHistogram {
    pub layer: Layer,
    pub counts: Vec<u64>,
    pub bin_edges: Vec<f64>,
}

impl LayerHistogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Renders `bin_start,bin_end,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,bin_end,count\n");
        for (k, count) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.bin_edges[k],
                self.bin_edges[k + 1],
                count
            ));
        }
        out
    }
}

/// Counts pixels per equal-width bin of one HSV layer. Bins are half-open
/// except the last, which is closed on the right.
pub fn layer_histogram(frame: &HsvFrame, layer: Layer, bin_count: usize) -> Result<LayerHistogram> {
    if bin_count == 0 {
        return Err(Error::InputDomain(
            "histogram needs at least one bin".into(),
        ));
    }
    let (lo, hi) = layer.range();
    let width = (hi - lo) / bin_count as f64;
    let mut bin_edges: Vec<f64> = (0..bin_count).map(|k| lo + k as f64 * width).collect();
    bin_edges.push(hi);

    let mut counts = vec![0u64; bin_count];
    for px in &frame.data {
        let x = layer.sample(px);
        let mut idx = (((x - lo) / width).floor().max(0.0) as usize).min(bin_count - 1);
        // floor() on the scaled value can land one bin off the stored edges
        while idx > 0 && x < bin_edges[idx] {
            idx -= 1;
        }
        while idx + 1 < bin_count && x >= bin_edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }
    Ok(LayerHistogram {
        layer,
        counts,
        bin_edges,
    })
}
