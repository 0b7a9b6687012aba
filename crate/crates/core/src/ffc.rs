//! Frequency feature compressor: 2D DCT, low-frequency corner truncation,
//! 2D inverse DCT at the reduced size.
//!
//! An N x N x h grid goes to the frequency domain, only the C x C
//! low-frequency corner is kept, and the inverse transform at size C
//! returns C^2 spatial tokens. The transforms are orthonormal, so the
//! fraction of squared coefficient mass kept by the truncation is exactly
//! the fraction of signal energy retained.
//!
//! Note the amplitude convention: forward normalizes over N, inverse over
//! C, so a constant input of value v reconstructs as (N/C)*v. That is the
//! faithful behavior and the default; `rescale_amplitude` opts into a C/N
//! correction for mean-preserving resampling.

use std::path::Path;

use crate::dct::{dct2d, idct2d, DctImpl, FrequencyGrid};
use crate::error::{Error, Result};
use crate::tensor::{
    flatten_grid, read_tensor, reshape_to_grid, write_tensor, FeatureGrid, Tensor, TokenSequence,
};

/// Compression settings: N^2 input tokens down to C^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FfcConfig {
    pub input_side: usize,
    pub output_side: usize,
    /// Multiply outputs by C/N so the spatial mean is preserved.
    pub rescale_amplitude: bool,
}

impl FfcConfig {
    pub fn new(input_side: usize, output_side: usize) -> Result<Self> {
        if input_side < 1 || output_side < 1 || output_side > input_side {
            return Err(Error::Shape(format!(
                "need 1 <= C <= N, got C={output_side}, N={input_side}"
            )));
        }
        Ok(FfcConfig {
            input_side,
            output_side,
            rescale_amplitude: false,
        })
    }

    pub fn with_rescale(mut self, rescale: bool) -> Self {
        self.rescale_amplitude = rescale;
        self
    }
}

/// What one compression did: token counts and the exact fraction of
/// signal energy the kept coefficients carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionReport {
    pub tokens_in: usize,
    pub tokens_out: usize,
    /// 1 - C^2/N^2.
    pub compression_ratio: f64,
    /// Kept squared-coefficient mass over total; 1.0 for an all-zero input.
    pub energy_retained: f64,
}

impl CompressionReport {
    /// Single-line `key=value` rendering.
    pub fn kv_line(&self) -> String {
        format!(
            "tokens_in={} tokens_out={} compression_ratio={:.3} energy_retained={:.9}",
            self.tokens_in, self.tokens_out, self.compression_ratio, self.energy_retained
        )
    }

    /// JSON rendering with the same keys.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"tokens_in\": {}, \"tokens_out\": {}, \"compression_ratio\": {:.3}, \"energy_retained\": {:.9}}}",
            self.tokens_in, self.tokens_out, self.compression_ratio, self.energy_retained
        )
    }
}

/// Keep the top-left `keep x keep` corner of the frequency grid for every
/// hidden channel; values are copied unmodified.
pub fn truncate_low_frequency(fgrid: &FrequencyGrid, keep: usize) -> Result<FrequencyGrid> {
    if keep < 1 || keep > fgrid.rows() || keep > fgrid.cols() {
        return Err(Error::Shape(format!(
            "truncation side {keep} outside 1..={}x{}",
            fgrid.rows(),
            fgrid.cols()
        )));
    }
    let h = fgrid.hidden();
    let mut data = Vec::with_capacity(keep * keep * h);
    for m in 0..keep {
        for n in 0..keep {
            for ch in 0..h {
                data.push(fgrid.at(m, n, ch));
            }
        }
    }
    FrequencyGrid::new(keep, keep, h, data)
}

/// Compress a token sequence of length N^2 down to C^2 tokens:
/// reshape to grid, 2D DCT, corner truncation, 2D inverse DCT at size C,
/// flatten. Uses the FFT transform path.
pub fn ffc_compress(
    seq: &TokenSequence,
    cfg: &FfcConfig,
) -> Result<(TokenSequence, CompressionReport)> {
    ffc_compress_with(seq, cfg, DctImpl::Fft)
}

/// Same pipeline with an explicit choice of transform implementation.
pub fn ffc_compress_with(
    seq: &TokenSequence,
    cfg: &FfcConfig,
    imp: DctImpl,
) -> Result<(TokenSequence, CompressionReport)> {
    let n = cfg.input_side;
    if seq.length() != n * n {
        return Err(Error::Shape(format!(
            "sequence length {} does not match N^2 = {}",
            seq.length(),
            n * n
        )));
    }
    let grid = reshape_to_grid(seq)?;
    compress_grid(&grid, cfg, imp)
}

fn compress_grid(
    grid: &FeatureGrid,
    cfg: &FfcConfig,
    imp: DctImpl,
) -> Result<(TokenSequence, CompressionReport)> {
    let n = cfg.input_side;
    let keep = cfg.output_side;
    debug_assert_eq!(grid.side(), n);

    let freq = dct2d(grid, imp);
    let total_energy = freq.energy();
    let kept = truncate_low_frequency(&freq, keep)?;
    let kept_energy = kept.energy();
    let mut out = idct2d(&kept, imp)?;

    if cfg.rescale_amplitude && keep != n {
        let scale = keep as f64 / n as f64;
        let data: Vec<f64> = out.data().iter().map(|v| v * scale).collect();
        out = FeatureGrid::new(keep, grid.hidden(), data)?;
    }

    let report = CompressionReport {
        tokens_in: n * n,
        tokens_out: keep * keep,
        compression_ratio: 1.0 - (keep * keep) as f64 / (n * n) as f64,
        energy_retained: if total_energy > 0.0 {
            kept_energy / total_energy
        } else {
            1.0
        },
    };
    Ok((flatten_grid(&out), report))
}

/// File-to-file compression; the input may hold a sequence or a grid, the
/// output is always a C^2 x h token sequence.
pub fn ffc_compress_file(
    in_path: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
    cfg: &FfcConfig,
) -> Result<CompressionReport> {
    let seq = match read_tensor(in_path)? {
        Tensor::Sequence(s) => s,
        Tensor::Grid(g) => flatten_grid(&g),
    };
    let (out, report) = ffc_compress(&seq, cfg)?;
    write_tensor(out_path, &Tensor::Sequence(out))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::dct2d;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_seq(rng: &mut ChaCha12Rng, len: usize, h: usize) -> TokenSequence {
        TokenSequence::new(
            len,
            h,
            (0..len * h).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn config_rejects_bad_sides() {
        assert!(FfcConfig::new(24, 25).is_err());
        assert!(FfcConfig::new(24, 0).is_err());
        assert!(FfcConfig::new(0, 0).is_err());
        assert!(FfcConfig::new(24, 24).is_ok());
    }

    #[test]
    fn truncation_keeps_corner_unmodified() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let grid = FeatureGrid::new(
            24,
            2,
            (0..24 * 24 * 2).map(|_| rng.gen::<f64>()).collect(),
        )
        .unwrap();
        let f = dct2d(&grid, DctImpl::Fft);
        let t = truncate_low_frequency(&f, 12).unwrap();
        assert_eq!((t.rows(), t.cols()), (12, 12));
        for m in 0..12 {
            for n in 0..12 {
                for ch in 0..2 {
                    assert_eq!(t.at(m, n, ch), f.at(m, n, ch));
                }
            }
        }
    }

    #[test]
    fn truncation_at_full_size_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(32);
        let grid = FeatureGrid::new(8, 1, (0..64).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let f = dct2d(&grid, DctImpl::Fft);
        let t = truncate_low_frequency(&f, 8).unwrap();
        assert_eq!(t, f);
    }

    #[test]
    fn truncation_bounds_checked() {
        let f = FrequencyGrid::new(4, 4, 1, vec![0.0; 16]).unwrap();
        assert!(matches!(
            truncate_low_frequency(&f, 5),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            truncate_low_frequency(&f, 0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn identity_when_keeping_every_frequency() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let seq = random_seq(&mut rng, 576, 8);
        let cfg = FfcConfig::new(24, 24).unwrap();
        for imp in [DctImpl::Naive, DctImpl::Fft] {
            let (out, report) = ffc_compress_with(&seq, &cfg, imp).unwrap();
            assert_eq!(out.length(), 576);
            assert_eq!(report.compression_ratio, 0.0);
            assert!((report.energy_retained - 1.0).abs() < 1e-12);
            for (a, b) in out.data().iter().zip(seq.data()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_grid_reconstructs_at_n_over_c_amplitude() {
        let v = 0.4;
        let seq = TokenSequence::new(16, 1, vec![v; 16]).unwrap();
        let cfg = FfcConfig::new(4, 2).unwrap();
        let (out, report) = ffc_compress(&seq, &cfg).unwrap();
        assert_eq!(out.length(), 4);
        for x in out.data() {
            assert!((x - 2.0 * v).abs() < 1e-12, "expected (N/C)*v");
        }
        // A constant grid is pure DC, so truncation loses nothing.
        assert!((report.energy_retained - 1.0).abs() < 1e-12);

        let (scaled, _) = ffc_compress(&seq, &cfg.with_rescale(true)).unwrap();
        for x in scaled.data() {
            assert!((x - v).abs() < 1e-12, "rescale should preserve the mean");
        }
    }

    #[test]
    fn llava_shape_and_ratio() {
        let mut rng = ChaCha12Rng::seed_from_u64(34);
        let seq = random_seq(&mut rng, 576, 4);
        let (out, report) = ffc_compress(&seq, &FfcConfig::new(24, 6).unwrap()).unwrap();
        assert_eq!(out.length(), 36);
        assert_eq!(out.hidden(), 4);
        assert!((report.compression_ratio - 0.9375).abs() < 1e-15);
        let (out, report) = ffc_compress(&seq, &FfcConfig::new(24, 12).unwrap()).unwrap();
        assert_eq!(out.length(), 144);
        assert!((report.compression_ratio - 0.75).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(35);
        let seq = random_seq(&mut rng, 577, 2);
        let cfg = FfcConfig::new(24, 12).unwrap();
        assert!(matches!(ffc_compress(&seq, &cfg), Err(Error::Shape(_))));
    }

    #[test]
    fn energy_retained_monotone_in_keep_side() {
        let mut rng = ChaCha12Rng::seed_from_u64(36);
        let seq = random_seq(&mut rng, 144, 8);
        let mut last = 0.0;
        for keep in 1..=12 {
            let (_, report) = ffc_compress(&seq, &FfcConfig::new(12, keep).unwrap()).unwrap();
            assert!(report.energy_retained >= last - 1e-12);
            assert!(report.energy_retained <= 1.0 + 1e-12);
            last = report.energy_retained;
        }
        assert!((last - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compression_is_linear() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let seq = random_seq(&mut rng, 64, 4);
        let scaled = TokenSequence::new(
            64,
            4,
            seq.data().iter().map(|v| 3.5 * v).collect(),
        )
        .unwrap();
        let cfg = FfcConfig::new(8, 4).unwrap();
        let (a, _) = ffc_compress(&seq, &cfg).unwrap();
        let (b, _) = ffc_compress(&scaled, &cfg).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((3.5 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn dc_mean_is_scaled_per_channel() {
        let mut rng = ChaCha12Rng::seed_from_u64(38);
        let n = 6;
        let h = 3;
        let seq = random_seq(&mut rng, n * n, h);
        let cfg = FfcConfig::new(n, 3).unwrap();
        let (out, _) = ffc_compress(&seq, &cfg).unwrap();
        let (rescaled, _) = ffc_compress(&seq, &cfg.with_rescale(true)).unwrap();
        for ch in 0..h {
            let mean_in: f64 =
                (0..n * n).map(|t| seq.row(t)[ch]).sum::<f64>() / (n * n) as f64;
            let mean_out: f64 = (0..9).map(|t| out.row(t)[ch]).sum::<f64>() / 9.0;
            let mean_rescaled: f64 =
                (0..9).map(|t| rescaled.row(t)[ch]).sum::<f64>() / 9.0;
            assert!((mean_out - 2.0 * mean_in).abs() < 1e-9, "N/C = 2");
            assert!((mean_rescaled - mean_in).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_is_idempotent_up_to_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(39);
        let seq = random_seq(&mut rng, 144, 4);
        let (once, _) = ffc_compress(&seq, &FfcConfig::new(12, 6).unwrap()).unwrap();
        let (twice, report) = ffc_compress(&once, &FfcConfig::new(6, 6).unwrap()).unwrap();
        assert!((report.energy_retained - 1.0).abs() < 1e-12);
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn report_rendering() {
        let r = CompressionReport {
            tokens_in: 576,
            tokens_out: 144,
            compression_ratio: 0.75,
            energy_retained: 0.987654321987,
        };
        assert_eq!(
            r.kv_line(),
            "tokens_in=576 tokens_out=144 compression_ratio=0.750 energy_retained=0.987654322"
        );
        assert_eq!(
            r.to_json(),
            "{\"tokens_in\": 576, \"tokens_out\": 144, \"compression_ratio\": 0.750, \"energy_retained\": 0.987654322}"
        );
    }

    #[test]
    fn file_pipeline_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.fvt");
        let output = dir.path().join("out.fvt");
        // binary32-grained values so the write is lossless.
        let data: Vec<f64> = (0..576 * 8)
            .map(|_| f64::from(rng.gen::<f32>() - 0.5))
            .collect();
        let seq = TokenSequence::new(576, 8, data).unwrap();
        write_tensor(&input, &Tensor::Sequence(seq)).unwrap();

        let report =
            ffc_compress_file(&input, &output, &FfcConfig::new(24, 16).unwrap()).unwrap();
        assert_eq!(report.tokens_out, 256);
        assert!((report.compression_ratio - (1.0 - 256.0 / 576.0)).abs() < 1e-12);
        match read_tensor(&output).unwrap() {
            Tensor::Sequence(s) => {
                assert_eq!(s.length(), 256);
                assert_eq!(s.hidden(), 8);
            }
            _ => panic!("expected sequence"),
        }
    }

    #[test]
    fn file_pipeline_rejects_bad_length() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.fvt");
        let seq = TokenSequence::new(577, 2, vec![0.5; 577 * 2]).unwrap();
        write_tensor(&input, &Tensor::Sequence(seq)).unwrap();
        let out = dir.path().join("out.fvt");
        let cfg = FfcConfig::new(24, 12).unwrap();
        assert!(matches!(
            ffc_compress_file(&input, &out, &cfg),
            Err(Error::Shape(_))
        ));
    }
}
