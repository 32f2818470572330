//! `.emb` binary matrices.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "EMB1"
//! 4       4           rows (u32 LE)
//! 8       4           cols (u32 LE)
//! 12      4           label flag (u32 LE, 0 or 1)
//! 16      4*rows*cols features, row-major f32 LE
//! ...     4*rows      labels (u32 LE), only when the flag is 1
//! ```
//!
//! Features are held as f64 in memory; writing rounds them to f32.

pub const MAGIC: &[u8; 4] = b"EMB1";
const HEADER: usize = 16;

use sinkclust_core::Matrix;

pub fn encode(features: &Matrix, labels: Option<&[usize]>) -> Result<Vec<u8>, String> {
    let rows = u32::try_from(features.rows()).map_err(|_| "too many rows for .emb".to_string())?;
    let cols = u32::try_from(features.cols()).map_err(|_| "too many columns for .emb".to_string())?;
    let mut out = Vec::with_capacity(HEADER + 4 * features.as_slice().len() + labels.map_or(0, |l| 4 * l.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&u32::from(labels.is_some()).to_le_bytes());
    for &x in features.as_slice() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    if let Some(labels) = labels {
        if labels.len() != features.rows() {
            return Err(format!("{} labels for {} rows", labels.len(), features.rows()));
        }
        for &y in labels {
            let y = u32::try_from(y).map_err(|_| format!("label {y} does not fit in u32"))?;
            out.extend_from_slice(&y.to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4-byte slice"))
}

/// Parses an `.emb` payload; errors carry the byte offset.
pub fn decode(bytes: &[u8]) -> Result<(Matrix, Option<Vec<usize>>), String> {
    if bytes.len() < HEADER {
        return Err(format!("file is {} bytes, shorter than the {HEADER}-byte header", bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err(format!("bad magic {:?} at offset 0, expected \"EMB1\"", &bytes[..4]));
    }
    let rows = u32_at(bytes, 4) as usize;
    let cols = u32_at(bytes, 8) as usize;
    let has_labels = match u32_at(bytes, 12) {
        0 => false,
        1 => true,
        other => return Err(format!("label flag at offset 12 is {other}, expected 0 or 1")),
    };
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_add(if has_labels { rows } else { 0 }))
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER))
        .ok_or_else(|| format!("declared shape {rows}x{cols} overflows"))?;
    if bytes.len() != expected {
        return Err(format!(
            "declared {rows}x{cols}{} needs {expected} bytes, file has {}",
            if has_labels { " with labels" } else { "" },
            bytes.len()
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, chunk) in bytes[HEADER..HEADER + 4 * rows * cols].chunks_exact(4).enumerate() {
        let x = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        if !x.is_finite() {
            return Err(format!("non-finite feature {x} at offset {} (row {}, col {})", HEADER + 4 * i, i / cols, i % cols));
        }
        data.push(f64::from(x));
    }
    let labels = has_labels.then(|| {
        let start = HEADER + 4 * rows * cols;
        (0..rows).map(|r| u32_at(bytes, start + 4 * r) as usize).collect()
    });
    let features = Matrix::new(rows, cols, data).map_err(|e| e.to_string())?;
    Ok((features, labels))
}
