//! Self-checking property suites: the fast transform against the direct
//! oracle, invertibility, energy conservation, compressor identity, and
//! 2D separability. The CLI `verify` subcommand runs these in-process so
//! any build (or port) can validate itself against the definitions.
//!
//! Error metric: `max_i |got_i - want_i| / max_i |want_i|`, i.e. worst
//! absolute deviation normalized by the reference's largest magnitude.
//! Per-element relative error is ill-posed here because transforms of
//! random data routinely produce coefficients that cancel to ~0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dct::{
    dct1d_fft, dct1d_naive, dct2d, idct1d_fft, idct1d_naive, idct2d, DctImpl,
};
use crate::ffc::{ffc_compress_with, FfcConfig};
use crate::tensor::{FeatureGrid, TokenSequence};

/// Shared tolerance of every suite (normalized worst-case error).
pub const TOLERANCE: f64 = 1e-9;

/// Knobs for suite size. Defaults keep a full run near-instant; the
/// acceptance tests widen them.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Largest 1D transform length exercised.
    pub max_n: usize,
    /// Random trials per length.
    pub trials: usize,
    /// Deliberately corrupt one comparison (negative control for the
    /// harness; exercised by tests only).
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_n: 64,
            trials: 10,
            inject_fault: false,
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub worst_err: f64,
    pub tolerance: f64,
    /// `(N, seed)` of the worst case.
    pub worst_case: String,
}

impl SuiteResult {
    pub fn line(&self) -> String {
        format!(
            "{}: {} cases={} max_err={:.3e} tol={:.1e} worst_at={}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.cases,
            self.worst_err,
            self.tolerance,
            self.worst_case
        )
    }
}

/// Worst absolute deviation over the reference's largest magnitude.
pub fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    debug_assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

fn case_seed(n: usize, trial: usize) -> u64 {
    ((n as u64) << 32) | trial as u64
}

fn random_vec(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
}

fn random_grid(seed: u64, side: usize, hidden: usize) -> FeatureGrid {
    FeatureGrid::new(side, hidden, random_vec(seed, side * side * hidden))
        .expect("random grid is valid")
}

struct Tracker {
    cases: u64,
    worst: f64,
    worst_case: String,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            cases: 0,
            worst: 0.0,
            worst_case: "-".into(),
        }
    }

    fn record(&mut self, err: f64, n: usize, seed: u64) {
        self.cases += 1;
        if err > self.worst {
            self.worst = err;
            self.worst_case = format!("N={n},seed={seed}");
        }
    }

    fn finish(self, name: &'static str) -> SuiteResult {
        SuiteResult {
            name,
            passed: self.worst <= TOLERANCE,
            cases: self.cases,
            worst_err: self.worst,
            tolerance: TOLERANCE,
            worst_case: self.worst_case,
        }
    }
}

/// Fast path vs direct path, forward and inverse, every length up to
/// `max_n`.
pub fn suite_oracle_equivalence(opts: &VerifyOptions) -> SuiteResult {
    let mut t = Tracker::new();
    let mut fault_pending = opts.inject_fault;
    for n in 1..=opts.max_n {
        for trial in 0..opts.trials {
            let seed = case_seed(n, trial);
            let x = random_vec(seed, n);
            let want = dct1d_naive(&x);
            let got = dct1d_fft(&x);
            let mut fwd = got.into_coeffs();
            if fault_pending {
                fwd[0] += 1e-6;
                fault_pending = false;
            }
            t.record(max_rel_err(&fwd, want.coeffs()), n, seed);

            let back_fft = idct1d_fft(&want);
            let back_naive = idct1d_naive(&want);
            t.record(max_rel_err(&back_fft, &back_naive), n, seed);
        }
    }
    t.finish("oracle_equiv")
}

/// idct(dct(x)) == x for both implementations, 1D at every length and 2D
/// at a spread of sides.
pub fn suite_roundtrip(opts: &VerifyOptions) -> SuiteResult {
    let mut t = Tracker::new();
    for n in 1..=opts.max_n {
        for trial in 0..opts.trials {
            let seed = case_seed(n, trial);
            let x = random_vec(seed, n);
            t.record(max_rel_err(&idct1d_fft(&dct1d_fft(&x)), &x), n, seed);
            t.record(max_rel_err(&idct1d_naive(&dct1d_naive(&x)), &x), n, seed);
        }
    }
    for n in [2usize, 3, 6, 8, 12, 16, 24].into_iter().filter(|&n| n <= opts.max_n) {
        let seed = case_seed(n, 99);
        let g = random_grid(seed, n, 3);
        for imp in [DctImpl::Naive, DctImpl::Fft] {
            let back = idct2d(&dct2d(&g, imp), imp).expect("square");
            t.record(max_rel_err(back.data(), g.data()), n, seed);
        }
    }
    t.finish("roundtrip")
}

/// Coefficient 2-norm equals signal 2-norm, 1D (both paths) and 2D
/// per channel.
pub fn suite_parseval(opts: &VerifyOptions) -> SuiteResult {
    let mut t = Tracker::new();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for n in 1..=opts.max_n {
        for trial in 0..opts.trials {
            let seed = case_seed(n, trial);
            let x = random_vec(seed, n);
            let nx = norm(&x);
            for f in [dct1d_fft(&x), dct1d_naive(&x)] {
                let err = (norm(f.coeffs()) - nx).abs() / nx;
                t.record(err, n, seed);
            }
        }
    }
    for n in [4usize, 9, 12, 24].into_iter().filter(|&n| n <= opts.max_n) {
        let seed = case_seed(n, 98);
        let g = random_grid(seed, n, 4);
        let f = dct2d(&g, DctImpl::Fft);
        for ch in 0..4 {
            let sig: f64 = (0..n * n)
                .map(|i| g.data()[i * 4 + ch].powi(2))
                .sum::<f64>()
                .sqrt();
            let coeff: f64 = (0..n * n)
                .map(|i| f.data()[i * 4 + ch].powi(2))
                .sum::<f64>()
                .sqrt();
            t.record((coeff - sig).abs() / sig, n, seed);
        }
    }
    t.finish("parseval")
}

/// Compression with C == N reproduces the input, both paths.
pub fn suite_ffc_identity(opts: &VerifyOptions) -> SuiteResult {
    let mut t = Tracker::new();
    let n = opts.max_n.clamp(2, 24);
    let cfg = FfcConfig::new(n, n).expect("C == N is valid");
    for trial in 0..opts.trials.max(1) {
        let seed = case_seed(n, trial);
        let data = random_vec(seed, n * n * 64);
        let seq = TokenSequence::new(n * n, 64, data).expect("valid");
        for imp in [DctImpl::Naive, DctImpl::Fft] {
            let (out, report) = ffc_compress_with(&seq, &cfg, imp).expect("valid");
            t.record(max_rel_err(out.data(), seq.data()), n, seed);
            t.record((report.energy_retained - 1.0).abs(), n, seed);
        }
    }
    t.finish("ffc_identity")
}

/// The separable 2D transform equals the direct double sum, and spatial
/// axis order does not matter.
pub fn suite_separability(opts: &VerifyOptions) -> SuiteResult {
    let mut t = Tracker::new();
    for n in [2usize, 3, 5, 8].into_iter().filter(|&n| n <= opts.max_n.max(2)) {
        for trial in 0..opts.trials.clamp(1, 5) {
            let seed = case_seed(n, trial);
            let g = random_grid(seed, n, 2);
            let want = dct2d_double_sum(&g);
            let got = dct2d(&g, DctImpl::Fft);
            t.record(max_rel_err(got.data(), &want), n, seed);

            // Transposing spatial axes commutes with the transform.
            let gt = transpose_spatial(&g);
            let ft = dct2d(&gt, DctImpl::Fft);
            let mut worst = 0.0f64;
            let scale = got
                .data()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(1e-300);
            for m in 0..n {
                for k in 0..n {
                    for ch in 0..2 {
                        worst = worst.max((got.at(m, k, ch) - ft.at(k, m, ch)).abs());
                    }
                }
            }
            t.record(worst / scale, n, seed);
        }
    }
    t.finish("separability")
}

fn transpose_spatial(g: &FeatureGrid) -> FeatureGrid {
    let n = g.side();
    let h = g.hidden();
    let mut data = vec![0.0f64; n * n * h];
    for p in 0..n {
        for q in 0..n {
            for ch in 0..h {
                data[(q * n + p) * h + ch] = g.at(p, q, ch);
            }
        }
    }
    FeatureGrid::new(n, h, data).expect("transpose is valid")
}

/// Direct evaluation of the 2D forward definition (the quadruple loop).
fn dct2d_double_sum(grid: &FeatureGrid) -> Vec<f64> {
    use std::f64::consts::PI;
    let n = grid.side();
    let h = grid.hidden();
    let alpha = |m: usize| {
        if m == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        }
    };
    let mut out = vec![0.0f64; n * n * h];
    for m in 0..n {
        for k in 0..n {
            for ch in 0..h {
                let mut acc = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        acc += grid.at(p, q, ch)
                            * (PI / n as f64 * m as f64 * (p as f64 + 0.5)).cos()
                            * (PI / n as f64 * k as f64 * (q as f64 + 0.5)).cos();
                    }
                }
                out[(m * n + k) * h + ch] = alpha(m) * alpha(k) * acc;
            }
        }
    }
    out
}

/// Run every suite.
pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteResult> {
    vec![
        suite_oracle_equivalence(opts),
        suite_roundtrip(opts),
        suite_parseval(opts),
        suite_ffc_identity(opts),
        suite_separability(opts),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_at_default_size() {
        let opts = VerifyOptions {
            max_n: 24,
            trials: 3,
            inject_fault: false,
        };
        for result in run_all(&opts) {
            assert!(result.passed, "{}", result.line());
            assert!(result.cases > 0);
        }
    }

    #[test]
    fn injected_fault_is_detected() {
        let opts = VerifyOptions {
            max_n: 8,
            trials: 2,
            inject_fault: true,
        };
        let result = suite_oracle_equivalence(&opts);
        assert!(!result.passed);
        assert!(result.worst_err > TOLERANCE);
        assert!(result.line().contains("FAIL"));
    }

    #[test]
    fn rel_err_normalizes_by_reference_scale() {
        assert_eq!(max_rel_err(&[2.0, 0.0], &[2.0, 0.0]), 0.0);
        let err = max_rel_err(&[10.0, 1e-4], &[10.0, 0.0]);
        assert!((err - 1e-5).abs() < 1e-18);
        // Zero reference falls back to absolute error.
        assert_eq!(max_rel_err(&[1e-3], &[0.0]), 1e-3);
    }
}
