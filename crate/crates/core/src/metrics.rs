//! Pixelwise comparison of predicted masks against ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::BinaryMask;

/// Percentage of pixels on which `pred` and `truth` disagree.
pub fn error_percent(pred: &BinaryMask, truth: &BinaryMask) -> Result<f64> {
    check_dims(pred, truth)?;
    let total = pred.cells().len();
    if total == 0 {
        return Ok(0.0);
    }
    let wrong = pred
        .cells()
        .iter()
        .zip(truth.cells())
        .filter(|(p, t)| p != t)
        .count();
    Ok(100.0 * wrong as f64 / total as f64)
}

fn check_dims(pred: &BinaryMask, truth: &BinaryMask) -> Result<()> {
    if pred.dims() != truth.dims() {
        return Err(Error::Shape(format!(
            "prediction is {}x{}, truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    Ok(())
}

/// Foreground-class confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl Confusion {
    pub fn of(pred: &BinaryMask, truth: &BinaryMask) -> Result<Self> {
        check_dims(pred, truth)?;
        let mut c = Confusion::default();
        for (&p, &t) in pred.cells().iter().zip(truth.cells()) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.r#fn += 1,
            }
        }
        Ok(c)
    }

    /// `tp / (tp + fp)`, 1.0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`, 1.0 when there is no true foreground.
    pub fn recall(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.r#fn)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub frame_index: usize,
    pub error_pct: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub skip: usize,
    pub frames_evaluated: usize,
    pub mean_error_pct: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    pub frames: Vec<FrameScore>,
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# skip={} frames_evaluated={} mean_error_pct={}\n",
            self.skip, self.frames_evaluated, self.mean_error_pct
        );
        out.push_str("frame_index,error_pct,precision,recall,f1\n");
        for f in &self.frames {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                f.frame_index, f.error_pct, f.precision, f.recall, f.f1
            ));
        }
        out
    }

    pub fn summary_line(&self) -> String {
        format!(
            "RESULT mean_error_pct={:.6} mean_precision={:.6} mean_recall={:.6} mean_f1={:.6} frames={} skip={}",
            self.mean_error_pct,
            self.mean_precision,
            self.mean_recall,
            self.mean_f1,
            self.frames_evaluated,
            self.skip
        )
    }
}

/// Scores aligned prediction/truth pairs, ignoring the first `skip` pairs.
///
/// Frame indices in the report are positions in the input slices.
pub fn evaluate_sequence(
    preds: &[BinaryMask],
    truths: &[BinaryMask],
    skip: usize,
) -> Result<ErrorReport> {
    let indexed: Vec<_> = (0..preds.len()).collect();
    evaluate_indexed(&indexed, preds, truths, skip)
}

/// Like [`evaluate_sequence`] but reports the given frame indices.
pub fn evaluate_indexed(
    indices: &[usize],
    preds: &[BinaryMask],
    truths: &[BinaryMask],
    skip: usize,
) -> Result<ErrorReport> {
    if preds.len() != truths.len() || indices.len() != preds.len() {
        return Err(Error::InputDomain(format!(
            "{} predictions for {} truth masks",
            preds.len(),
            truths.len()
        )));
    }
    let mut frames = Vec::new();
    for ((&frame_index, pred), truth) in indices.iter().zip(preds).zip(truths).skip(skip) {
        let c = Confusion::of(pred, truth)?;
        frames.push(FrameScore {
            frame_index,
            error_pct: error_percent(pred, truth)?,
            precision: c.precision(),
            recall: c.recall(),
            f1: c.f1(),
        });
    }
    let n = frames.len();
    let mean = |f: fn(&FrameScore) -> f64| {
        if n == 0 {
            0.0
        } else {
            frames.iter().map(f).sum::<f64>() / n as f64
        }
    };
    Ok(ErrorReport {
        skip,
        frames_evaluated: n,
        mean_error_pct: mean(|f| f.error_pct),
        mean_precision: mean(|f| f.precision),
        mean_recall: mean(|f| f.recall),
        mean_f1: mean(|f| f.f1),
        frames,
    })
}
