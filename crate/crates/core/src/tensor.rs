//! Feature-grid and token-sequence types plus their on-disk format.
//!
//! The file format is deliberately minimal so features exported from any
//! model runtime can be ingested without extra dependencies:
//!
//! ```text
//! magic      4 bytes   "FVTC"
//! version    u32 LE    1
//! ndim       u32 LE    2 (token sequence) or 3 (feature grid)
//! dims       ndim x u32 LE
//! dtype      u32 LE    1 = IEEE-754 binary32
//! payload    product(dims) x f32 LE, row-major
//! ```
//!
//! Payload scalars are binary32; all in-memory math runs in binary64.
//! Writing quantizes each value to binary32, so a write/read roundtrip is
//! bit-exact precisely when every value is binary32-representable (true
//! for anything previously read from a file or produced by the synthetic
//! generators). Non-finite values are rejected on both paths.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"FVTC";
pub const FORMAT_VERSION: u32 = 1;
pub const DTYPE_F32: u32 = 1;

/// A flattened L x hidden sequence of feature vectors (one row per token).
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    length: usize,
    hidden: usize,
    data: Vec<f64>,
}

impl TokenSequence {
    /// `data` is row-major `[token][channel]`, `length * hidden` values.
    pub fn new(length: usize, hidden: usize, data: Vec<f64>) -> Result<Self> {
        if length < 1 || hidden < 1 {
            return Err(Error::Validation(format!(
                "token sequence dims must be >= 1, got {length}x{hidden}"
            )));
        }
        if data.len() != length * hidden {
            return Err(Error::Validation(format!(
                "token sequence expects {} values, got {}",
                length * hidden,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(TokenSequence {
            length,
            hidden,
            data,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, token: usize) -> &[f64] {
        &self.data[token * self.hidden..(token + 1) * self.hidden]
    }
}

/// An N x N x hidden grid of feature vectors in spatial layout.
///
/// Storage is row-major `(row, col, channel)` with channel fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    side: usize,
    hidden: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(side: usize, hidden: usize, data: Vec<f64>) -> Result<Self> {
        if side < 1 || hidden < 1 {
            return Err(Error::Validation(format!(
                "grid dims must be >= 1, got {side}x{side}x{hidden}"
            )));
        }
        if data.len() != side * side * hidden {
            return Err(Error::Validation(format!(
                "grid expects {} values, got {}",
                side * side * hidden,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(FeatureGrid { side, hidden, data })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn at(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.side + col) * self.hidden + channel]
    }
}

/// Either shape a tensor file may hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Sequence(TokenSequence),
    Grid(FeatureGrid),
}

impl Tensor {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Tensor::Sequence(s) => vec![s.length(), s.hidden()],
            Tensor::Grid(g) => vec![g.side(), g.side(), g.hidden()],
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            Tensor::Sequence(s) => s.data(),
            Tensor::Grid(g) => g.data(),
        }
    }
}

impl From<TokenSequence> for Tensor {
    fn from(s: TokenSequence) -> Self {
        Tensor::Sequence(s)
    }
}

impl From<FeatureGrid> for Tensor {
    fn from(g: FeatureGrid) -> Self {
        Tensor::Grid(g)
    }
}

fn check_finite(data: &[f64]) -> Result<()> {
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Validation(format!(
            "non-finite value at flat index {pos}"
        )));
    }
    Ok(())
}

/// Serialize a tensor to the byte layout above.
pub fn encode(tensor: &Tensor) -> Result<Vec<u8>> {
    let dims = tensor.dims();
    let data = tensor.data();
    let mut out = Vec::with_capacity(16 + 4 * dims.len() + 4 * data.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in &dims {
        out.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    for (pos, v) in data.iter().enumerate() {
        let narrowed = *v as f32;
        if !narrowed.is_finite() {
            return Err(Error::Validation(format!(
                "value {v:e} at flat index {pos} does not fit binary32"
            )));
        }
        out.extend_from_slice(&narrowed.to_le_bytes());
    }
    Ok(out)
}

/// Parse a tensor from bytes, validating header, length, and finiteness.
pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    let mut off = 0usize;
    let take = |off: &mut usize, n: usize| -> Result<&[u8]> {
        if *off + n > bytes.len() {
            return Err(Error::Format("truncated header".into()));
        }
        let s = &bytes[*off..*off + n];
        *off += n;
        Ok(s)
    };
    let read_u32 = |off: &mut usize| -> Result<u32> {
        Ok(u32::from_le_bytes(take(off, 4)?.try_into().unwrap()))
    };

    let magic = take(&mut off, 4)?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&MAGIC)
        )));
    }
    let version = read_u32(&mut off)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let ndim = read_u32(&mut off)?;
    if ndim != 2 && ndim != 3 {
        return Err(Error::Format(format!("ndim must be 2 or 3, got {ndim}")));
    }
    let mut dims = Vec::with_capacity(ndim as usize);
    for _ in 0..ndim {
        let d = read_u32(&mut off)?;
        if d < 1 {
            return Err(Error::Validation("all dims must be >= 1".into()));
        }
        dims.push(d as usize);
    }
    let dtype = read_u32(&mut off)?;
    if dtype != DTYPE_F32 {
        return Err(Error::Format(format!(
            "unsupported dtype code {dtype}, expected {DTYPE_F32} (binary32)"
        )));
    }

    let count = dims
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
        .ok_or_else(|| Error::Validation("dims product overflows".into()))?;
    let expected = count
        .checked_mul(4)
        .ok_or_else(|| Error::Validation("payload size overflows".into()))?;
    let found = (bytes.len() - off) as u64;
    if found != expected {
        return Err(Error::Length { expected, found });
    }

    let mut data = Vec::with_capacity(count as usize);
    for (i, chunk) in bytes[off..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "non-finite value at flat index {i}"
            )));
        }
        data.push(v as f64);
    }

    if ndim == 2 {
        Ok(Tensor::Sequence(TokenSequence::new(
            dims[0], dims[1], data,
        )?))
    } else {
        if dims[0] != dims[1] {
            return Err(Error::Shape(format!(
                "feature grid must be square, got {}x{}",
                dims[0], dims[1]
            )));
        }
        Ok(Tensor::Grid(FeatureGrid::new(dims[0], dims[2], data)?))
    }
}

/// Write a tensor file. Serialization is deterministic: identical tensors
/// produce byte-identical files.
pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(tensor)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read and validate a tensor file. ndim=2 yields a [`TokenSequence`],
/// ndim=3 a [`FeatureGrid`].
pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Reshape an L x h sequence into a sqrt(L) x sqrt(L) x h grid in raster
/// order: grid element (p, q, :) is sequence row p*N + q.
pub fn reshape_to_grid(seq: &TokenSequence) -> Result<FeatureGrid> {
    let side = integer_sqrt(seq.length()).ok_or_else(|| {
        Error::Shape(format!(
            "sequence length {} is not a perfect square",
            seq.length()
        ))
    })?;
    // Row-major layouts coincide, so this is a relabeling.
    FeatureGrid::new(side, seq.hidden(), seq.data().to_vec())
}

/// Exact inverse of [`reshape_to_grid`]: row p*N + q is grid element (p, q, :).
pub fn flatten_grid(grid: &FeatureGrid) -> TokenSequence {
    TokenSequence::new(grid.side() * grid.side(), grid.hidden(), grid.data().to_vec())
        .expect("a valid grid flattens to a valid sequence")
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r.saturating_sub(1)..=r + 1).find(|&cand| cand * cand == n)
}
