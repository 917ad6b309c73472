//! Binary feature file:
//!
//! ```text
//! "AADF" | u32 version | u8 tag | u32 rows | u32 cols | rows*cols f32 (row-major)
//! ```
//!
//! All integers and floats are little-endian.

use std::io::{Read, Write};

use ndarray::Array2;

use super::{FeatureMatrix, FrontendError, FrontendTag};

pub const FEATURE_MAGIC: &[u8; 4] = b"AADF";
pub const FEATURE_VERSION: u32 = 1;

pub fn write_feature_file<W: Write>(mut w: W, features: &FeatureMatrix) -> Result<(), FrontendError> {
    let data = features.data();
    let mut bytes = Vec::with_capacity(17 + 4 * data.len());
    bytes.extend_from_slice(FEATURE_MAGIC);
    bytes.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    bytes.push(features.tag().code());
    bytes.extend_from_slice(&(data.nrows() as u32).to_le_bytes());
    bytes.extend_from_slice(&(data.ncols() as u32).to_le_bytes());
    for v in data.iter() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_feature_file<R: Read>(mut r: R) -> Result<FeatureMatrix, FrontendError> {
    let mut header = [0u8; 17];
    r.read_exact(&mut header).map_err(|_| FrontendError::Format("truncated header".into()))?;
    if &header[..4] != FEATURE_MAGIC {
        return Err(FrontendError::Format("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != FEATURE_VERSION {
        return Err(FrontendError::Format(format!("unsupported version {version}")));
    }
    let tag = FrontendTag::from_code(header[8])
        .ok_or_else(|| FrontendError::Format(format!("unknown front-end code {}", header[8])))?;
    let (rows, cols) = (u32_at(9) as usize, u32_at(13) as usize);
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 4 * rows * cols {
        return Err(FrontendError::Format(format!(
            "expected {} payload bytes for {rows}x{cols}, found {}",
            4 * rows * cols,
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let data = Array2::from_shape_vec((rows, cols), values).expect("length checked");
    FeatureMatrix::new(data, tag)
}
