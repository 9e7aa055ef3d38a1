//! Binary masks and the dilation/erosion cleanup applied to raw foreground.
//!
//! Pixels outside the image are background for both operations: dilation
//! never pulls foreground in from beyond the border and erosion strips
//! foreground that touches it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major boolean grid, `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "mask {width}x{height} needs {} cells, got {}",
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

    pub fn empty(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
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

    pub fn cells(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| !b).collect(),
        }
    }

    /// True when every foreground cell of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeShape {
    Square,
    Cross,
}

impl FromStr for SeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(SeShape::Square),
            "cross" => Ok(SeShape::Cross),
            other => Err(Error::Config(format!(
                "unknown structuring element `{other}` (expected square or cross)"
            ))),
        }
    }
}

impl fmt::Display for SeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeShape::Square => "square",
            SeShape::Cross => "cross",
        })
    }
}

/// Centered, symmetric structuring element of side `2 * radius + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    shape: SeShape,
    radius: usize,
}

impl StructuringElement {
    pub fn new(shape: SeShape, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::Config(
                "structuring element radius must be >= 1".into(),
            ));
        }
        Ok(Self { shape, radius })
    }

    pub fn square(radius: usize) -> Result<Self> {
        Self::new(SeShape::Square, radius)
    }

    pub fn cross(radius: usize) -> Result<Self> {
        Self::new(SeShape::Cross, radius)
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// `(dx, dy)` offsets covered by the element.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = match self.shape {
                    SeShape::Square => true,
                    SeShape::Cross => dx == 0 || dy == 0,
                };
                if inside {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self {
            shape: SeShape::Square,
            radius: 1,
        }
    }
}

pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    match se.shape {
        SeShape::Square => square_filter(mask, se.radius, Reduce::Any),
        SeShape::Cross => offset_filter(mask, se, Reduce::Any),
    }
}

pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    match se.shape {
        SeShape::Square => square_filter(mask, se.radius, Reduce::All),
        SeShape::Cross => offset_filter(mask, se, Reduce::All),
    }
}

pub fn open(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    dilate(&erode(mask, se), se)
}

pub fn close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

#[derive(Clone, Copy)]
enum Reduce {
    Any,
    All,
}

// Square windows are the product of a horizontal and a vertical run, so the
// filter separates into two 1-D passes. Out-of-image cells are false in both.
fn square_filter(mask: &BinaryMask, radius: usize, reduce: Reduce) -> BinaryMask {
    let (w, h) = mask.dims();
    let pass = |src: &[bool], len: usize, stride: usize, count: usize, step: usize| {
        let mut out = vec![false; src.len()];
        for line in 0..count {
            let base = line * step;
            for i in 0..len {
                let lo = i.saturating_sub(radius);
                let hi = i + radius;
                let clipped = i < radius || hi >= len;
                let window = (lo..=hi.min(len - 1)).map(|j| src[base + j * stride]);
                out[base + i * stride] = match reduce {
                    Reduce::Any => window.into_iter().any(|b| b),
                    Reduce::All => !clipped && window.into_iter().all(|b| b),
                };
            }
        }
        out
    };
    if w == 0 || h == 0 {
        return mask.clone();
    }
    let rows = pass(&mask.data, w, 1, h, w);
    let data = pass(&rows, h, w, w, 1);
    BinaryMask {
        width: w,
        height: h,
        data,
    }
}

fn offset_filter(mask: &BinaryMask, se: &StructuringElement, reduce: Reduce) -> BinaryMask {
    let (w, h) = mask.dims();
    let offsets = se.offsets();
    let mut data = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut hits = offsets.iter().map(|&(dx, dy)| {
                let sx = x as isize + dx;
                let sy = y as isize + dy;
                sx >= 0
                    && sy >= 0
                    && (sx as usize) < w
                    && (sy as usize) < h
                    && mask.data[sy as usize * w + sx as usize]
            });
            data[y * w + x] = match reduce {
                Reduce::Any => hits.any(|b| b),
                Reduce::All => hits.all(|b| b),
            };
        }
    }
    BinaryMask {
        width: w,
        height: h,
        data,
    }
}

/// Order of the dilation/erosion steps applied by [`clean`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanOrder {
    /// Opening then closing: erode, dilate, dilate, erode.
    #[default]
    OpenClose,
    /// Closing then opening: dilate, erode, erode, dilate.
    CloseOpen,
    /// A single closing.
    DilateErode,
    /// A single opening.
    ErodeDilate,
    /// Morphology disabled.
    None,
}

impl CleanOrder {
    pub const NAMES: [&'static str; 5] = [
        "open_close",
        "close_open",
        "dilate_erode",
        "erode_dilate",
        "none",
    ];
}

impl FromStr for CleanOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open_close" => Ok(CleanOrder::OpenClose),
            "close_open" => Ok(CleanOrder::CloseOpen),
            "dilate_erode" => Ok(CleanOrder::DilateErode),
            "erode_dilate" => Ok(CleanOrder::ErodeDilate),
            "none" => Ok(CleanOrder::None),
            other => Err(Error::Config(format!(
                "unknown clean order `{other}` (expected one of {})",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

/// Opening followed by closing with the same element.
pub fn clean(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    clean_with(mask, se, CleanOrder::OpenClose)
}

pub fn clean_with(mask: &BinaryMask, se: &StructuringElement, order: CleanOrder) -> BinaryMask {
    match order {
        CleanOrder::OpenClose => close(&open(mask, se), se),
        CleanOrder::CloseOpen => open(&close(mask, se), se),
        CleanOrder::DilateErode => close(mask, se),
        CleanOrder::ErodeDilate => open(mask, se),
        CleanOrder::None => mask.clone(),
    }
}
