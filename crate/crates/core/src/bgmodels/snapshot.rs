//! Versioned binary snapshot of a model's state.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! b"SLBM" | version: u16 | kind tag: u8 | width: u32 | height: u32
//!         | param count: u16 | params: f64 * count
//!         | per-pixel state: f64 * (width * height * stride)
//! ```
//!
//! The per-pixel stride is fixed by the kind: 1 for frame differencing
//! (reference value), 2 for the single Gaussian (mean, variance) and
//! `1 + 3 * k_max` for the mixture (component count, then weight, mean,
//! variance triples).

use std::path::Path;

use super::{BackgroundModel, BackgroundModelKind, ModelRegistry};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SLBM";
pub const VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 4 + 2;

pub fn encode(model: &dyn BackgroundModel) -> Vec<u8> {
    let (w, h) = model.dims();
    let params = model.snapshot_params();
    let pixels = model.snapshot_pixels();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (params.len() + pixels.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(model.kind().tag());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(params.len() as u16).to_le_bytes());
    for v in params.iter().chain(&pixels) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], registry: &ModelRegistry) -> Result<Box<dyn BackgroundModel>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!(
            "truncated header ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Snapshot("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let kind = BackgroundModelKind::from_tag(bytes[6])
        .ok_or_else(|| Error::Snapshot(format!("unknown kind tag {}", bytes[6])))?;
    let width = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    let n_params = u16::from_le_bytes([bytes[15], bytes[16]]) as usize;

    let body = &bytes[HEADER_LEN..];
    if !body.len().is_multiple_of(8) || body.len() / 8 < n_params {
        return Err(Error::Snapshot(
            "body is not a whole number of f64 values".into(),
        ));
    }
    let floats: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (params, pixels) = floats.split_at(n_params);
    registry
        .by_kind(kind)?
        .restore(width, height, params, pixels)
}

pub fn save(model: &dyn BackgroundModel, path: &Path) -> Result<()> {
    std::fs::write(path, encode(model)).map_err(|e| Error::write(path, e))
}

pub fn load(path: &Path, registry: &ModelRegistry) -> Result<Box<dyn BackgroundModel>> {
    let bytes = std::fs::read(path).map_err(|e| Error::read(path, e))?;
    decode(&bytes, registry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgmodels::{FrameDiffModel, ModelConfig};
    use crate::colorspace::ValuePlane;

    #[test]
    fn header_layout() {
        let plane = ValuePlane::new(2, 1, vec![0.25, 0.5]).unwrap();
        let m = FrameDiffModel::new(plane, 0.1).unwrap();
        let bytes = encode(&m);
        assert_eq!(&bytes[..4], b"SLBM");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(bytes[6], 0);
        assert_eq!(&bytes[7..11], &[2, 0, 0, 0]);
        assert_eq!(&bytes[11..15], &[1, 0, 0, 0]);
        assert_eq!(&bytes[15..17], &[1, 0]);
        assert_eq!(&bytes[17..25], &0.1f64.to_le_bytes());
        assert_eq!(&bytes[25..33], &0.25f64.to_le_bytes());
        assert_eq!(bytes.len(), 17 + 8 * 3);
    }

    #[test]
    fn corrupt_snapshots_rejected() {
        let reg = ModelRegistry::builtin();
        let plane = ValuePlane::filled(3, 3, 0.5);
        let m = reg
            .get("gmm")
            .unwrap()
            .build(&ModelConfig::default(), &[], &plane)
            .unwrap();
        let good = encode(m.as_ref());
        assert!(decode(&good, &reg).is_ok());

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad, &reg), Err(Error::Snapshot(_))));

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(decode(&bad, &reg).is_err());

        let mut bad = good.clone();
        bad[6] = 7;
        assert!(decode(&bad, &reg).is_err());

        assert!(decode(&good[..good.len() - 8], &reg).is_err());
        assert!(decode(&good[..10], &reg).is_err());
    }
}
