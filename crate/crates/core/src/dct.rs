//! Type-II DCT and its inverse, in two interchangeable implementations.
//!
//! The direct path evaluates the defining sums in O(N^2) and serves as the
//! oracle. The fast path reorders the input (even indices ascending, odd
//! indices descending), runs a complex FFT, and rotates the result by
//! exp(-i*pi*k/2N), which is O(N log N). Both paths share one output
//! contract, orthonormal by default:
//!
//! ```text
//! f_m = alpha_m * sum_i x_i * cos(pi/N * m * (i + 1/2))
//! alpha_0 = sqrt(1/N), alpha_m = sqrt(2/N) for m > 0
//! ```
//!
//! so the transform is orthogonal (coefficient energy equals signal
//! energy) and the inverse is the transpose. The raw mode (`f = 2*sum`,
//! no alpha) is kept for cross-checking against external DCT references.
//!
//! All math is binary64 regardless of how tensors are stored on disk.
//! Everything here is a pure function of its inputs; plans are immutable
//! after construction and safe to share across threads.

use std::borrow::Cow;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::tensor::FeatureGrid;

/// Output scaling of the forward transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Orthonormal scaling (the default everywhere in this crate).
    Ortho,
    /// Plain `2 * sum` scaling with no normalization factor.
    Raw,
}

/// Which implementation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DctImpl {
    /// Direct O(N^2) evaluation of the defining sums.
    Naive,
    /// FFT-based O(N log N) path.
    Fft,
}

/// DCT coefficients of one sequence, tagged with their scaling so the
/// inverse can undo exactly what the forward applied.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySequence {
    coeffs: Vec<f64>,
    normalized: bool,
}

impl FrequencySequence {
    pub fn new(coeffs: Vec<f64>, normalized: bool) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Validation("frequency sequence is empty".into()));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "frequency sequence has non-finite coefficients".into(),
            ));
        }
        Ok(FrequencySequence { coeffs, normalized })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }
}

/// DCT coefficients of a grid, channel-fastest like [`FeatureGrid`].
/// Extents may differ after low-frequency truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    rows: usize,
    cols: usize,
    hidden: usize,
    data: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(rows: usize, cols: usize, hidden: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 1 || cols < 1 || hidden < 1 {
            return Err(Error::Validation(format!(
                "frequency grid extents must be >= 1, got {rows}x{cols}x{hidden}"
            )));
        }
        if data.len() != rows * cols * hidden {
            return Err(Error::Validation(format!(
                "frequency grid expects {} values, got {}",
                rows * cols * hidden,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "frequency grid has non-finite coefficients".into(),
            ));
        }
        Ok(FrequencyGrid {
            rows,
            cols,
            hidden,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn at(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.cols + col) * self.hidden + channel]
    }

    /// Sum of squared coefficients; with orthonormal scaling this equals
    /// the signal energy of the spatial grid.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

fn alpha(m: usize, n: usize) -> f64 {
    if m == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Direct O(N^2) path
// ---------------------------------------------------------------------------

/// Forward DCT by direct evaluation, orthonormal scaling.
pub fn dct1d_naive(x: &[f64]) -> FrequencySequence {
    dct1d_naive_with(x, Normalization::Ortho)
}

pub fn dct1d_naive_with(x: &[f64], norm: Normalization) -> FrequencySequence {
    let n = x.len();
    assert!(n >= 1, "input sequence must be non-empty");
    let step = PI / n as f64;
    let mut coeffs = vec![0.0f64; n];
    for (m, out) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0f64;
        for (i, xi) in x.iter().enumerate() {
            acc += xi * (step * m as f64 * (i as f64 + 0.5)).cos();
        }
        *out = match norm {
            Normalization::Ortho => alpha(m, n) * acc,
            Normalization::Raw => 2.0 * acc,
        };
    }
    FrequencySequence {
        coeffs,
        normalized: norm == Normalization::Ortho,
    }
}

/// Inverse DCT by direct evaluation. Respects the scaling recorded in `f`.
pub fn idct1d_naive(f: &FrequencySequence) -> Vec<f64> {
    let coeffs = normalized_coeffs(f);
    let n = coeffs.len();
    let step = PI / n as f64;
    let mut x = vec![0.0f64; n];
    for (i, out) in x.iter_mut().enumerate() {
        let mut acc = 0.0f64;
        for (k, fk) in coeffs.iter().enumerate() {
            acc += alpha(k, n) * fk * (step * k as f64 * (i as f64 + 0.5)).cos();
        }
        *out = acc;
    }
    x
}

/// Raw coefficients are `2 * sum`; dividing by `2*sqrt(N)` (DC) and
/// `2*sqrt(N/2)` (the rest) lands on the orthonormal scale.
fn normalized_coeffs(f: &FrequencySequence) -> Cow<'_, [f64]> {
    if f.normalized {
        Cow::Borrowed(f.coeffs())
    } else {
        let n = f.len();
        let mut c = f.coeffs().to_vec();
        c[0] /= 2.0 * (n as f64).sqrt();
        for v in &mut c[1..] {
            *v /= 2.0 * (n as f64 / 2.0).sqrt();
        }
        Cow::Owned(c)
    }
}

// ---------------------------------------------------------------------------
// FFT-based path
// ---------------------------------------------------------------------------

/// Reusable plan for length-`n` fast transforms: FFT tables, the
/// exp(-i*pi*k/2N) rotation, and the even/odd reorder map.
///
/// `forward_rows`/`inverse_rows` process a batch of contiguous rows in one
/// call, which is how the 2D transform consumes them (one batched pass per
/// spatial axis plus transposes).
pub struct DctPlan {
    n: usize,
    fft: Fft,
    rot_cos: Vec<f64>,
    rot_sin: Vec<f64>,
    /// Forward gather map: y[k] = x[reorder[k]].
    reorder: Vec<usize>,
}

impl DctPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "transform length must be >= 1");
        let rot_cos = (0..n)
            .map(|k| (PI * k as f64 / (2.0 * n as f64)).cos())
            .collect();
        let rot_sin = (0..n)
            .map(|k| (PI * k as f64 / (2.0 * n as f64)).sin())
            .collect();
        // Even indices ascending, then odd indices descending:
        // y_k = x_{2k} for k < ceil(n/2), y_k = x_{2(n-k)-1} afterwards.
        let half = n.div_ceil(2);
        let reorder = (0..n)
            .map(|k| if k < half { 2 * k } else { 2 * (n - k) - 1 })
            .collect();
        DctPlan {
            n,
            fft: Fft::new(n),
            rot_cos,
            rot_sin,
            reorder,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Forward-transform every length-`n` row of `rows` in place.
    pub fn forward_rows(&self, rows: &mut [f64], norm: Normalization) {
        assert!(rows.len().is_multiple_of(self.n), "rows must be a multiple of n");
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let dc_scale = 1.0 / (2.0 * (n as f64).sqrt());
        let ac_scale = 1.0 / (2.0 * (n as f64 / 2.0).sqrt());
        for row in rows.chunks_exact_mut(n) {
            for (k, s) in scratch.iter_mut().enumerate() {
                *s = Complex64::new(row[self.reorder[k]], 0.0);
            }
            self.fft.forward(&mut scratch);
            for (k, out) in row.iter_mut().enumerate() {
                let z = scratch[k];
                *out = z.re * self.rot_cos[k] + z.im * self.rot_sin[k];
            }
            if norm == Normalization::Ortho {
                row[0] *= dc_scale;
                for v in &mut row[1..] {
                    *v *= ac_scale;
                }
            }
            for v in row.iter_mut() {
                *v *= 2.0;
            }
        }
    }

    /// Inverse-transform every length-`n` row of `rows` in place.
    /// `norm` must describe the scaling the coefficients carry.
    pub fn inverse_rows(&self, rows: &mut [f64], norm: Normalization) {
        assert!(rows.len().is_multiple_of(self.n), "rows must be a multiple of n");
        let n = self.n;
        let mut coeffs = vec![0.0f64; n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let dc_scale = (n as f64).sqrt();
        let ac_scale = (n as f64 / 2.0).sqrt();
        let even_count = n - n / 2;
        for row in rows.chunks_exact_mut(n) {
            coeffs.copy_from_slice(row);
            for v in coeffs.iter_mut() {
                *v *= 0.5;
            }
            if norm == Normalization::Ortho {
                coeffs[0] *= 2.0 * dc_scale;
                for v in &mut coeffs[1..] {
                    *v *= 2.0 * ac_scale;
                }
            }
            // Z_k = (X_k - i*X_{n-k}) * exp(i*pi*k/2N), with X_n read as 0.
            scratch[0] = Complex64::new(coeffs[0], 0.0);
            for k in 1..n {
                let re = coeffs[k];
                let im = -coeffs[n - k];
                scratch[k] = Complex64::new(
                    re * self.rot_cos[k] - im * self.rot_sin[k],
                    re * self.rot_sin[k] + im * self.rot_cos[k],
                );
            }
            self.fft.inverse(&mut scratch);
            // Undo the even/odd reorder: even outputs read z forward,
            // odd outputs read z backward.
            for k in 0..even_count {
                row[2 * k] = scratch[k].re;
            }
            for k in 0..n / 2 {
                row[2 * k + 1] = scratch[n - 1 - k].re;
            }
        }
    }
}

/// Forward DCT via the FFT path, orthonormal scaling.
pub fn dct1d_fft(x: &[f64]) -> FrequencySequence {
    dct1d_fft_with(x, Normalization::Ortho)
}

pub fn dct1d_fft_with(x: &[f64], norm: Normalization) -> FrequencySequence {
    assert!(!x.is_empty(), "input sequence must be non-empty");
    let plan = DctPlan::new(x.len());
    let mut row = x.to_vec();
    plan.forward_rows(&mut row, norm);
    FrequencySequence {
        coeffs: row,
        normalized: norm == Normalization::Ortho,
    }
}

/// Inverse DCT via the FFT path. Respects the scaling recorded in `f`.
pub fn idct1d_fft(f: &FrequencySequence) -> Vec<f64> {
    let plan = DctPlan::new(f.len());
    let mut row = f.coeffs().to_vec();
    let norm = if f.normalized {
        Normalization::Ortho
    } else {
        Normalization::Raw
    };
    plan.inverse_rows(&mut row, norm);
    row
}

// ---------------------------------------------------------------------------
// 2D transforms over feature grids
// ---------------------------------------------------------------------------

enum Direction {
    Forward,
    Inverse,
}

fn apply_rows(data: &mut [f64], n: usize, imp: DctImpl, dir: Direction) {
    match imp {
        DctImpl::Fft => {
            let plan = DctPlan::new(n);
            match dir {
                Direction::Forward => plan.forward_rows(data, Normalization::Ortho),
                Direction::Inverse => plan.inverse_rows(data, Normalization::Ortho),
            }
        }
        DctImpl::Naive => {
            for row in data.chunks_exact_mut(n) {
                let out = match dir {
                    Direction::Forward => dct1d_naive(row).into_coeffs(),
                    Direction::Inverse => {
                        let f = FrequencySequence {
                            coeffs: row.to_vec(),
                            normalized: true,
                        };
                        idct1d_naive(&f)
                    }
                };
                row.copy_from_slice(&out);
            }
        }
    }
}

/// (row, col, channel) channel-fastest -> per-channel planes of rows*cols.
fn to_channel_major(data: &[f64], rows: usize, cols: usize, hidden: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            let base = (r * cols + c) * hidden;
            for ch in 0..hidden {
                out[(ch * rows + r) * cols + c] = data[base + ch];
            }
        }
    }
    out
}

fn from_channel_major(planes: &[f64], rows: usize, cols: usize, hidden: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; planes.len()];
    for ch in 0..hidden {
        for r in 0..rows {
            let base = (ch * rows + r) * cols;
            for c in 0..cols {
                out[(r * cols + c) * hidden + ch] = planes[base + c];
            }
        }
    }
    out
}

/// Transpose each rows x cols plane into cols x rows.
fn transpose_planes(planes: &[f64], hidden: usize, rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; planes.len()];
    let plane = rows * cols;
    for ch in 0..hidden {
        let src = &planes[ch * plane..(ch + 1) * plane];
        let dst = &mut out[ch * plane..(ch + 1) * plane];
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }
    out
}

/// 2D forward DCT of every hidden channel: a 1D pass along each spatial
/// axis (rows, transpose, rows again, transpose back).
pub fn dct2d(grid: &FeatureGrid, imp: DctImpl) -> FrequencyGrid {
    let n = grid.side();
    let h = grid.hidden();
    let mut planes = to_channel_major(grid.data(), n, n, h);
    apply_rows(&mut planes, n, imp, Direction::Forward);
    let mut swapped = transpose_planes(&planes, h, n, n);
    apply_rows(&mut swapped, n, imp, Direction::Forward);
    let planes = transpose_planes(&swapped, h, n, n);
    FrequencyGrid::new(n, n, h, from_channel_major(&planes, n, n, h))
        .expect("transform of a valid grid is valid")
}

/// 2D inverse DCT at the grid's own (square) size.
pub fn idct2d(fgrid: &FrequencyGrid, imp: DctImpl) -> Result<FeatureGrid> {
    if fgrid.rows() != fgrid.cols() {
        return Err(Error::Shape(format!(
            "inverse 2D DCT needs square extents, got {}x{}",
            fgrid.rows(),
            fgrid.cols()
        )));
    }
    let n = fgrid.rows();
    let h = fgrid.hidden();
    let mut planes = to_channel_major(fgrid.data(), n, n, h);
    apply_rows(&mut planes, n, imp, Direction::Inverse);
    let mut swapped = transpose_planes(&planes, h, n, n);
    apply_rows(&mut swapped, n, imp, Direction::Inverse);
    let planes = transpose_planes(&swapped, h, n, n);
    FeatureGrid::new(n, h, from_channel_major(&planes, n, n, h))
}
