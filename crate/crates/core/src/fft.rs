//! Complex FFT used by the fast DCT path.
//!
//! Two kernels cover every length: an iterative radix-2 Cooley-Tukey for
//! powers of two, and Bluestein's chirp-z algorithm for everything else
//! (the grid sides that matter here -- 24, 16, 12, 8, 6 -- are not powers
//! of two). Bluestein turns a length-n DFT into a circular convolution,
//! carried out with the radix-2 kernel at the next power of two >= 2n-1.
//!
//! Forward direction uses the negative-exponent convention
//! `X_k = sum_n x_n exp(-2*pi*i*k*n/len)`; `inverse` applies the 1/len
//! scale. A [`Fft`] is immutable after construction and safe to share
//! across threads.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Precomputed FFT plan for one length.
pub struct Fft {
    len: usize,
    kind: Kind,
}

enum Kind {
    /// len == 1; nothing to do.
    Identity,
    /// Power-of-two length. `twiddles[k] = exp(-2*pi*i*k/len)` for k < len/2.
    Radix2 { twiddles: Vec<Complex64> },
    /// Arbitrary length via chirp-z.
    Bluestein {
        /// `chirp[k] = exp(-i*pi*k^2/len)`
        chirp: Vec<Complex64>,
        /// Forward FFT (at `inner.len`) of the chirp-conjugate kernel.
        kernel_fft: Vec<Complex64>,
        inner: Box<Fft>,
    },
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "fft length must be >= 1");
        let kind = if len == 1 {
            Kind::Identity
        } else if len.is_power_of_two() {
            Kind::Radix2 {
                twiddles: forward_twiddles(len),
            }
        } else {
            let inner_len = (2 * len - 1).next_power_of_two();
            let chirp: Vec<Complex64> = (0..len).map(|k| chirp_factor(k, len)).collect();
            // Kernel b[0] = 1, b[k] = b[inner_len-k] = conj(chirp[k]).
            let mut kernel = vec![Complex64::new(0.0, 0.0); inner_len];
            kernel[0] = Complex64::new(1.0, 0.0);
            for k in 1..len {
                let b = chirp[k].conj();
                kernel[k] = b;
                kernel[inner_len - k] = b;
            }
            let inner = Box::new(Fft::new(inner_len));
            inner.forward(&mut kernel);
            Kind::Bluestein {
                chirp,
                kernel_fft: kernel,
                inner,
            }
        };
        Fft { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward DFT of `buf` (`buf.len()` must equal `self.len()`).
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        match &self.kind {
            Kind::Identity => {}
            Kind::Radix2 { twiddles } => radix2_in_place(buf, twiddles),
            Kind::Bluestein {
                chirp,
                kernel_fft,
                inner,
            } => {
                let m = inner.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (k, x) in buf.iter().enumerate() {
                    work[k] = x * chirp[k];
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel_fft.iter()) {
                    *w *= k;
                }
                inner.inverse(&mut work);
                for (k, out) in buf.iter_mut().enumerate() {
                    *out = work[k] * chirp[k];
                }
            }
        }
    }

    /// In-place inverse DFT including the 1/len normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        if self.len == 1 {
            return;
        }
        // conj -> forward -> conj, then scale.
        for x in buf.iter_mut() {
            *x = x.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.len as f64;
        for x in buf.iter_mut() {
            *x = x.conj() * scale;
        }
    }
}

/// `exp(-i*pi*k^2/len)`, with k^2 reduced mod 2*len to keep the angle small.
fn chirp_factor(k: usize, len: usize) -> Complex64 {
    let sq = (k as u64 * k as u64) % (2 * len as u64);
    let angle = -PI * sq as f64 / len as f64;
    Complex64::new(angle.cos(), angle.sin())
}

fn forward_twiddles(len: usize) -> Vec<Complex64> {
    (0..len / 2)
        .map(|k| {
            let angle = -2.0 * PI * k as f64 / len as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Iterative decimation-in-time radix-2 FFT; `len` is a power of two.
fn radix2_in_place(buf: &mut [Complex64], twiddles: &[Complex64]) {
    let n = buf.len();
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            buf.swap(i, j);
        }
        let mut mask = n >> 1;
        while mask != 0 && j & mask != 0 {
            j ^= mask;
            mask >>= 1;
        }
        j |= mask;
    }
    // Butterfly stages.
    let mut half = 1usize;
    while half < n {
        let step = n / (2 * half);
        let mut base = 0;
        while base < n {
            for k in 0..half {
                let w = twiddles[k * step];
                let a = buf[base + k];
                let b = buf[base + k + half] * w;
                buf[base + k] = a + b;
                buf[base + k + half] = a - b;
            }
            base += 2 * half;
        }
        half *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// O(n^2) reference DFT.
    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, xi) in x.iter().enumerate() {
                    let angle = -2.0 * PI * (k * i) as f64 / n as f64;
                    acc += xi * Complex64::new(angle.cos(), angle.sin());
                }
                acc
            })
            .collect()
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn matches_reference_dft_all_small_lengths() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for n in 1..=64 {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let want = dft(&x);
            let fft = Fft::new(n);
            let mut got = x.clone();
            fft.forward(&mut got);
            let scale = want.iter().map(|c| c.norm()).fold(1e-300, f64::max);
            assert!(
                max_abs_diff(&got, &want) / scale < 1e-12,
                "forward mismatch at n={n}"
            );
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for n in [1, 2, 3, 5, 8, 12, 24, 100, 243, 256] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let fft = Fft::new(n);
            let mut buf = x.clone();
            fft.forward(&mut buf);
            fft.inverse(&mut buf);
            assert!(max_abs_diff(&buf, &x) < 1e-12, "roundtrip failed at n={n}");
        }
    }

    #[test]
    fn dc_input_concentrates_in_bin_zero() {
        let fft = Fft::new(24);
        let mut buf = vec![Complex64::new(1.0, 0.0); 24];
        fft.forward(&mut buf);
        assert!((buf[0].re - 24.0).abs() < 1e-12);
        for b in &buf[1..] {
            assert!(b.norm() < 1e-12);
        }
    }
}
