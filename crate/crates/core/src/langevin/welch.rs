//! Streaming Welch estimator for complex sample streams.
//!
//! Segments of `n` samples are Hann-windowed and transformed; the periodogram
//! `|FFT(w x)|^2 / sum(w^2)` is averaged over segments. Under this
//! normalization a white stream with `E|x|^2 = v` has a flat spectrum equal to
//! `v`, so a real unit-variance stream reads 1 at every frequency.
//!
//! Standard errors come from batch means: consecutive segments are grouped
//! into batches and the spread of the batch averages is used, which absorbs
//! the correlation between overlapping segments.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

/// Fewest segments accepted for a spectral estimate.
pub const MIN_SEGMENTS: usize = 10;

#[derive(Clone)]
pub struct WelchEstimator {
    len: usize,
    hop: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
    batch_size: usize,
    batch_sum: Vec<f64>,
    batch_fill: usize,
    total: Vec<f64>,
    batch_mean_sum: Vec<f64>,
    batch_mean_sumsq: Vec<f64>,
    batches: usize,
    segments: usize,
}

impl std::fmt::Debug for WelchEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WelchEstimator")
            .field("len", &self.len)
            .field("hop", &self.hop)
            .field("segments", &self.segments)
            .finish()
    }
}

impl WelchEstimator {
    pub fn new(len: usize, overlap: f64, batch_size: usize) -> Result<Self> {
        if len < 4 {
            return Err(Error::invalid(
                "welch_segment",
                "must be at least 4 samples",
            ));
        }
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::invalid(
                "welch_overlap",
                format!("must be in [0, 1), got {overlap}"),
            ));
        }
        let hop = (((1.0 - overlap) * len as f64).round() as usize).clamp(1, len);
        let window: Vec<f64> = (0..len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(len);
        let fft_scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            len,
            hop,
            window,
            window_power,
            fft,
            buffer: Vec::with_capacity(len),
            scratch: vec![Complex64::default(); len],
            fft_scratch,
            batch_size: batch_size.max(1),
            batch_sum: vec![0.0; len],
            batch_fill: 0,
            total: vec![0.0; len],
            batch_mean_sum: vec![0.0; len],
            batch_mean_sumsq: vec![0.0; len],
            batches: 0,
            segments: 0,
        })
    }

    pub fn segment_len(&self) -> usize {
        self.len
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Number of complete segments a stream of `samples` will produce.
    pub fn segments_for(len: usize, overlap: f64, samples: usize) -> usize {
        let hop = (((1.0 - overlap) * len as f64).round() as usize).clamp(1, len);
        if samples < len {
            0
        } else {
            (samples - len) / hop + 1
        }
    }

    pub fn push(&mut self, x: Complex64) {
        self.buffer.push(x);
        if self.buffer.len() == self.len {
            self.process_segment();
            self.buffer.drain(..self.hop);
        }
    }

    pub fn extend<I: IntoIterator<Item = Complex64>>(&mut self, xs: I) {
        for x in xs {
            self.push(x);
        }
    }

    fn process_segment(&mut self) {
        for ((s, x), w) in self.scratch.iter_mut().zip(&self.buffer).zip(&self.window) {
            *s = x * *w;
        }
        self.fft
            .process_with_scratch(&mut self.scratch, &mut self.fft_scratch);
        for (acc, s) in self.batch_sum.iter_mut().zip(&self.scratch) {
            *acc += s.norm_sqr() / self.window_power;
        }
        self.segments += 1;
        self.batch_fill += 1;
        if self.batch_fill == self.batch_size {
            let k = self.batch_size as f64;
            for i in 0..self.len {
                let mean = self.batch_sum[i] / k;
                self.total[i] += self.batch_sum[i];
                self.batch_mean_sum[i] += mean;
                self.batch_mean_sumsq[i] += mean * mean;
                self.batch_sum[i] = 0.0;
            }
            self.batch_fill = 0;
            self.batches += 1;
        }
    }

    /// Folds another estimator's accumulated segments into this one. Both must
    /// share segment length and batch size; partial buffers are discarded.
    pub fn merge(&mut self, other: &WelchEstimator) {
        assert_eq!(self.len, other.len, "segment lengths differ");
        assert_eq!(self.batch_size, other.batch_size, "batch sizes differ");
        for i in 0..self.len {
            self.total[i] += other.total[i];
            self.batch_sum[i] += other.batch_sum[i];
            self.batch_mean_sum[i] += other.batch_mean_sum[i];
            self.batch_mean_sumsq[i] += other.batch_mean_sumsq[i];
        }
        self.segments += other.segments;
        self.batches += other.batches;
        // Incomplete batches only contribute to the mean.
        self.batch_fill += other.batch_fill;
    }

    /// Angular frequency of bin `k` for sample spacing `dt`.
    pub fn bin_frequency(&self, k: usize, dt: f64) -> f64 {
        let signed = if k < self.len.div_ceil(2) {
            k as f64
        } else {
            k as f64 - self.len as f64
        };
        2.0 * PI * signed / (self.len as f64 * dt)
    }

    /// Bin closest to angular frequency `omega`.
    pub fn nearest_bin(&self, omega: f64, dt: f64) -> usize {
        let k = (omega * self.len as f64 * dt / (2.0 * PI)).round() as i64;
        k.rem_euclid(self.len as i64) as usize
    }

    pub fn finish(&self, dt: f64) -> Result<Spectrum> {
        if self.segments < MIN_SEGMENTS {
            return Err(Error::InsufficientData(format!(
                "{} Welch segments, need at least {MIN_SEGMENTS}",
                self.segments
            )));
        }
        let mut total = self.total.clone();
        for (t, b) in total.iter_mut().zip(&self.batch_sum) {
            *t += b;
        }
        let nb = self.batches as f64;
        let mut bins: Vec<(f64, f64, f64)> = (0..self.len)
            .map(|k| {
                let psd = total[k] / self.segments as f64;
                let stderr = if self.batches >= 2 {
                    let mean = self.batch_mean_sum[k] / nb;
                    let var =
                        (self.batch_mean_sumsq[k] / nb - mean * mean).max(0.0) * nb / (nb - 1.0);
                    (var / nb).sqrt()
                } else {
                    f64::NAN
                };
                (self.bin_frequency(k, dt), psd, stderr)
            })
            .collect();
        bins.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Spectrum {
            omega: bins.iter().map(|b| b.0).collect(),
            psd: bins.iter().map(|b| b.1).collect(),
            stderr: bins.iter().map(|b| b.2).collect(),
            segments: self.segments,
        })
    }
}

/// Two-sided spectrum ordered by increasing angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    pub stderr: Vec<f64>,
    pub segments: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdEstimate {
    /// Frequency of the bin actually used.
    pub omega: f64,
    pub value: f64,
    pub stderr: f64,
    pub segments: usize,
}

impl Spectrum {
    pub fn at(&self, omega: f64) -> PsdEstimate {
        let idx = self
            .omega
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - omega).abs().total_cmp(&(b.1 - omega).abs()))
            .map(|(i, _)| i)
            .expect("spectrum is never empty");
        PsdEstimate {
            omega: self.omega[idx],
            value: self.psd[idx],
            stderr: self.stderr[idx],
            segments: self.segments,
        }
    }

    /// Bins with `lo <= omega <= hi`.
    pub fn band(&self, lo: f64, hi: f64) -> impl Iterator<Item = PsdEstimate> + '_ {
        (0..self.omega.len())
            .filter(move |&i| self.omega[i] >= lo && self.omega[i] <= hi)
            .map(move |i| PsdEstimate {
                omega: self.omega[i],
                value: self.psd[i],
                stderr: self.stderr[i],
                segments: self.segments,
            })
    }
}

/// Batch size giving roughly 32 batch means for a stream of `samples`.
pub fn default_batch_size(len: usize, overlap: f64, samples: usize) -> usize {
    (WelchEstimator::segments_for(len, overlap, samples) / 32).max(1)
}

/// Welch spectrum of a complex stream sampled every `dt`.
pub fn welch_spectrum(
    samples: &[Complex64],
    dt: f64,
    len: usize,
    overlap: f64,
) -> Result<Spectrum> {
    let mut est = WelchEstimator::new(
        len,
        overlap,
        default_batch_size(len, overlap, samples.len()),
    )?;
    est.extend(samples.iter().copied());
    est.finish(dt)
}

/// Lifts a real stream into the complex estimator.
pub fn real_to_complex(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn white_stream_reads_unity() {
        let xs = real_to_complex(&white(1 << 18, 3));
        let spec = welch_spectrum(&xs, 0.01, 512, 0.5).unwrap();
        let mean: f64 = spec.psd.iter().sum::<f64>() / spec.psd.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        for &omega in &[0.0, 10.0, 100.0] {
            let e = spec.at(omega);
            assert!((e.value - 1.0).abs() < 5.0 * e.stderr, "{e:?}");
        }
    }

    #[test]
    fn sinusoid_peaks_at_its_frequency() {
        let dt = 0.01;
        let len = 1024;
        // Exactly on bin 40.
        let omega0 = 2.0 * PI * 40.0 / (len as f64 * dt);
        let xs: Vec<Complex64> = (0..len * 20)
            .map(|n| Complex64::new((omega0 * n as f64 * dt).cos(), 0.0))
            .collect();
        let spec = welch_spectrum(&xs, dt, len, 0.5).unwrap();
        let peak = spec.at(omega0);
        assert!((peak.omega - omega0).abs() < 1e-9);
        assert!(peak.value > 100.0);
        assert!(spec.at(-omega0).value > 100.0);
        assert!(spec.at(3.0 * omega0).value < 1e-10);
        assert!(spec.at(0.0).value < 1e-10);
    }

    #[test]
    fn complex_white_counts_both_quadratures() {
        let re = white(1 << 16, 5);
        let im = white(1 << 16, 6);
        let xs: Vec<Complex64> = re
            .iter()
            .zip(&im)
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect();
        let spec = welch_spectrum(&xs, 1.0, 256, 0.5).unwrap();
        let mean: f64 = spec.psd.iter().sum::<f64>() / spec.psd.len() as f64;
        assert!((mean - 2.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn stderr_tracks_scatter() {
        // Relative standard error of an exponential periodogram averaged over
        // S segments is about 1/sqrt(S_eff); check the order of magnitude.
        let xs = real_to_complex(&white(1 << 17, 8));
        let spec = welch_spectrum(&xs, 1.0, 256, 0.5).unwrap();
        let e = spec.at(1.0);
        let naive = 1.0 / (spec.segments as f64).sqrt();
        assert!(
            e.stderr > 0.5 * naive && e.stderr < 3.0 * naive,
            "{} vs {naive}",
            e.stderr
        );
    }

    #[test]
    fn insufficient_segments() {
        let xs = real_to_complex(&white(1000, 1));
        let err = welch_spectrum(&xs, 1.0, 256, 0.0).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn merge_matches_single_pass_mean() {
        let xs = real_to_complex(&white(1 << 14, 9));
        let (a, b) = xs.split_at(1 << 13);
        let mut ea = WelchEstimator::new(256, 0.0, 4).unwrap();
        let mut eb = WelchEstimator::new(256, 0.0, 4).unwrap();
        ea.extend(a.iter().copied());
        eb.extend(b.iter().copied());
        ea.merge(&eb);
        let mut whole = WelchEstimator::new(256, 0.0, 4).unwrap();
        whole.extend(xs.iter().copied());
        let (m, w) = (ea.finish(1.0).unwrap(), whole.finish(1.0).unwrap());
        for (x, y) in m.psd.iter().zip(&w.psd) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_layout() {
        let est = WelchEstimator::new(8, 0.5, 1).unwrap();
        let dt = 0.5;
        assert_eq!(est.bin_frequency(0, dt), 0.0);
        assert!((est.bin_frequency(1, dt) - PI / 2.0).abs() < 1e-15);
        assert!((est.bin_frequency(7, dt) + PI / 2.0).abs() < 1e-15);
        assert_eq!(est.nearest_bin(-PI / 2.0, dt), 7);
        assert_eq!(WelchEstimator::segments_for(8, 0.5, 20), 4);
        assert!(WelchEstimator::new(8, 1.0, 1).is_err());
    }
}
