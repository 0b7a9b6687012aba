//! Frequency-spectrum statistics over feature grids, plus the synthetic
//! generators that make the energy-compaction claims testable offline.
//!
//! A spectrum map is built exactly the same way for synthetic and for
//! ingested real features: 2D orthonormal DCT (FFT path), absolute value,
//! mean over hidden channels per frequency bin, log10. Compaction stats
//! use squared coefficients instead, so corner fractions are exact energy
//! fractions of the input signal.
//!
//! Generators draw from ChaCha12 keyed by the caller's 64-bit seed (a
//! counter-based stream cipher, so the byte stream is pinned by the
//! algorithm), with standard-normal deviates via the ziggurat sampler of
//! `rand_distr`. Cross-language ports can match these distributionally,
//! not bitwise. Generated values are quantized to binary32 so writing a
//! grid to disk and reading it back is bit-exact.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dct::{dct2d, DctImpl};
use crate::error::{Error, Result};
use crate::tensor::FeatureGrid;

/// Bins whose mean magnitude is below this are clamped before log10,
/// so exports never contain -inf (floor: -30).
pub const LOG_CLAMP_FLOOR: f64 = 1e-30;

/// Per-bin log10 mean absolute coefficient magnitude across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    side: usize,
    values: Vec<f64>,
}

impl SpectrumMap {
    pub fn side(&self) -> usize {
        self.side
    }

    /// Row-major bin values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.side + n]
    }
}

/// Corner energy fractions for the requested truncation sides, plus the
/// flatness (coefficient of variation) of the pre-log bin means.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactionStats {
    /// `(C, fraction of total squared-coefficient mass in the CxC corner)`,
    /// in the order requested.
    pub corner_energy_fraction: Vec<(usize, f64)>,
    pub flatness: f64,
}

/// Synthetic feature-grid families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Independent standard normals everywhere.
    IidGaussian,
    /// Separable first-order autoregression along both spatial axes with
    /// unit marginal variance, independent across hidden channels:
    /// covariance rho^|dp| * rho^|dq|.
    Ar1 { rho: f64 },
    /// Every value equals `value`.
    DcOnly { value: f64 },
}

/// Mean |coefficient| per frequency bin across hidden channels, log10 with
/// the zero clamp. Uses the FFT transform path.
pub fn compute_spectrum(grid: &FeatureGrid) -> SpectrumMap {
    let freq = dct2d(grid, DctImpl::Fft);
    let n = freq.rows();
    let h = freq.hidden() as f64;
    let mut values = Vec::with_capacity(n * n);
    for m in 0..n {
        for k in 0..n {
            let mean: f64 = (0..freq.hidden())
                .map(|ch| freq.at(m, k, ch).abs())
                .sum::<f64>()
                / h;
            values.push(mean.max(LOG_CLAMP_FLOOR).log10());
        }
    }
    SpectrumMap { side: n, values }
}

/// Energy fractions of the CxC corners for each requested C, plus spectrum
/// flatness. Fractions are Parseval-exact: computed from squared
/// orthonormal coefficients.
pub fn compaction_stats(grid: &FeatureGrid, c_list: &[usize]) -> Result<CompactionStats> {
    let freq = dct2d(grid, DctImpl::Fft);
    let n = freq.rows();
    for &c in c_list {
        if c < 1 || c > n {
            return Err(Error::Shape(format!("corner side {c} outside 1..={n}")));
        }
    }

    // Per-bin energy and per-bin mean magnitude in one pass.
    let mut bin_energy = vec![0.0f64; n * n];
    let mut bin_mean = vec![0.0f64; n * n];
    for m in 0..n {
        for k in 0..n {
            let mut e = 0.0;
            let mut a = 0.0;
            for ch in 0..freq.hidden() {
                let v = freq.at(m, k, ch);
                e += v * v;
                a += v.abs();
            }
            bin_energy[m * n + k] = e;
            bin_mean[m * n + k] = a / freq.hidden() as f64;
        }
    }
    let total: f64 = bin_energy.iter().sum();

    let corner_energy_fraction = c_list
        .iter()
        .map(|&c| {
            let kept: f64 = (0..c)
                .flat_map(|m| (0..c).map(move |k| (m, k)))
                .map(|(m, k)| bin_energy[m * n + k])
                .sum();
            (c, if total > 0.0 { kept / total } else { 1.0 })
        })
        .collect();

    let mean = bin_mean.iter().sum::<f64>() / bin_mean.len() as f64;
    let var = bin_mean
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / bin_mean.len() as f64;
    let flatness = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };

    Ok(CompactionStats {
        corner_energy_fraction,
        flatness,
    })
}

/// Deterministic synthetic grid for the given `(kind, side, hidden, seed)`.
pub fn generate_synthetic(
    kind: SyntheticKind,
    side: usize,
    hidden: usize,
    seed: u64,
) -> Result<FeatureGrid> {
    if side < 1 || hidden < 1 {
        return Err(Error::Parameter(format!(
            "grid dims must be >= 1, got {side}x{side}x{hidden}"
        )));
    }
    if let SyntheticKind::Ar1 { rho } = kind {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Parameter(format!(
                "ar1 coefficient must satisfy 0 <= rho < 1, got {rho}"
            )));
        }
    }
    if let SyntheticKind::DcOnly { value } = kind {
        if !value.is_finite() {
            return Err(Error::Parameter("dc value must be finite".into()));
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut data = vec![0.0f64; side * side * hidden];
    match kind {
        SyntheticKind::DcOnly { value } => {
            let q = quantize(value);
            data.fill(q);
        }
        SyntheticKind::IidGaussian => {
            for v in &mut data {
                *v = quantize(StandardNormal.sample(&mut rng));
            }
        }
        SyntheticKind::Ar1 { rho } => {
            let innovation = (1.0 - rho * rho).sqrt();
            let mut plane = vec![0.0f64; side * side];
            for ch in 0..hidden {
                for v in &mut plane {
                    *v = StandardNormal.sample(&mut rng);
                }
                // AR(1) along columns within each row; the first element
                // keeps the stationary unit variance.
                for p in 0..side {
                    for q in 1..side {
                        plane[p * side + q] =
                            rho * plane[p * side + q - 1] + innovation * plane[p * side + q];
                    }
                }
                // Then along rows within each column.
                for p in 1..side {
                    for q in 0..side {
                        plane[p * side + q] =
                            rho * plane[(p - 1) * side + q] + innovation * plane[p * side + q];
                    }
                }
                for p in 0..side {
                    for q in 0..side {
                        data[(p * side + q) * hidden + ch] = quantize(plane[p * side + q]);
                    }
                }
            }
        }
    }
    FeatureGrid::new(side, hidden, data)
}

fn quantize(v: f64) -> f64 {
    f64::from(v as f32)
}

/// Write `m,n,log10_mean_abs` rows (row-major) with 9 significant digits.
/// Byte-reproducible for identical maps.
pub fn export_spectrum_csv(map: &SpectrumMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::with_capacity(map.values().len() * 24 + 32);
    buf.push_str("m,n,log10_mean_abs\n");
    let n = map.side();
    for m in 0..n {
        for k in 0..n {
            buf.push_str(&format!("{},{},{:.8e}\n", m, k, map.at(m, k)));
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(buf.as_bytes())
        .map_err(|e| Error::io(path, e))
}
