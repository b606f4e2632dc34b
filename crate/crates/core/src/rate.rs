//! Instantaneous mutual-information rates and their Monte-Carlo averages.
//!
//! All rates are in bits per channel use. Log-determinants are evaluated on
//! whichever Gram matrix (`A·Aᴴ` or `Aᴴ·A`) is smaller; both give the same
//! value by Sylvester's identity.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{
    check_snr, conjugated_gram, draw_channels, effective_channel, reduce_with_dft, ChannelSet,
    SystemConfig,
};
use crate::error::{Error, Result};
use crate::matrix::{cholesky_logdet_in_place, dft_matrix, ComplexMatrix};

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: usize,
}

/// Gram matrix of the smaller side of `A`, ready for repeated
/// `log₂ det(I + s·Gram)` evaluations at several scales `s`.
#[derive(Debug, Clone)]
pub struct SmallGram {
    n: usize,
    gram: Vec<Complex64>,
}

impl SmallGram {
    pub fn new(a: &ComplexMatrix) -> Self {
        if a.rows() <= a.cols() {
            Self::from_matrix(&a.gram())
        } else {
            Self::from_matrix(&a.adjoint().gram())
        }
    }

    /// Gram of `[A_1, A_2, …]` (horizontal concatenation) without building it.
    pub fn of_columns(blocks: &[ComplexMatrix]) -> Self {
        let rows = blocks[0].rows();
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        if rows <= cols {
            let mut acc = blocks[0].gram();
            for b in &blocks[1..] {
                acc = acc.add(&b.gram()).expect("blocks share a row count");
            }
            Self::from_matrix(&acc)
        } else {
            let joined = ComplexMatrix::from_fn(rows, cols, |r, c| {
                let mut c = c;
                for b in blocks {
                    if c < b.cols() {
                        return b[(r, c)];
                    }
                    c -= b.cols();
                }
                unreachable!()
            });
            Self::from_matrix(&joined.adjoint().gram())
        }
    }

    fn from_matrix(g: &ComplexMatrix) -> Self {
        Self { n: g.rows(), gram: g.as_slice().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `log₂ det(I + scale·Gram)`.
    pub fn log2_det_plus(&self, scale: f64) -> Result<f64> {
        if scale == 0.0 {
            return Ok(0.0);
        }
        let n = self.n;
        let mut work: Vec<Complex64> = self.gram.iter().map(|g| g * scale).collect();
        for j in 0..n {
            work[j * n + j] += 1.0;
        }
        cholesky_logdet_in_place(&mut work, n)
            .map(|ln| ln / LN_2)
            .ok_or_else(|| Error::Domain(format!("I + {scale:e}·Gram is not positive definite")))
    }
}

/// `(1/T)·log₂ det(I + (snr/n_T)·H̃H̃ᴴ)` on the explicit stacked channel.
pub fn rate_cdd(ch: &ChannelSet, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let n_t = ch.tx_antennas() as f64;
    let eff = effective_channel(ch);
    Ok(SmallGram::new(eff.matrix()).log2_det_plus(snr / n_t)? / n_t)
}

/// `(1/T)·Σ_t log₂ det(I + snr·H'_t·H'_tᴴ)` over the parallel per-bin channels.
pub fn rate_cdd_reduced(blocks: &[ComplexMatrix], snr: f64) -> Result<f64> {
    check_snr(snr)?;
    if blocks.is_empty() {
        return Err(Error::Argument("no parallel channels".into()));
    }
    let mut total = 0.0;
    for b in blocks {
        total += SmallGram::new(b).log2_det_plus(snr)?;
    }
    Ok(total / blocks.len() as f64)
}

/// Same rate as [`rate_cdd`], evaluated through an explicit conjugation
/// `Pᴴ(I⊗D)H̃H̃ᴴ(I⊗D)ᴴP` and the sum over its `n_R × n_R` diagonal blocks.
///
/// Only the diagonal blocks are used, so a permutation that does not group
/// DFT bins yields a different number.
pub fn rate_cdd_via_permutation(ch: &ChannelSet, snr: f64, perm: &ComplexMatrix) -> Result<f64> {
    check_snr(snr)?;
    let (n_t, n_r) = (ch.tx_antennas(), ch.rx_antennas());
    if perm.rows() != n_t * n_r || !perm.is_square() {
        return Err(Error::Dimension(format!(
            "permutation is {}x{}, expected {}",
            perm.rows(),
            perm.cols(),
            n_t * n_r
        )));
    }
    let m = conjugated_gram(&effective_channel(ch), perm)?;
    let scale = snr / n_t as f64;
    let mut total = 0.0;
    for bin in 0..n_t {
        let mut block = m.block(bin * n_r, bin * n_r, n_r, n_r)?;
        // Round-off can leave a ~1e-16 asymmetry; symmetrize before factoring.
        block = block.add(&block.adjoint())?.scale(0.5);
        total += SmallGram { n: n_r, gram: block.as_slice().to_vec() }.log2_det_plus(scale)?;
    }
    Ok(total / n_t as f64)
}

/// No-CSIT sum capacity `log₂ det(I + (snr/n_T)·Σ_k H_k·H_kᴴ)`.
pub fn sum_capacity(ch: &ChannelSet, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    SmallGram::of_columns(ch.users()).log2_det_plus(snr / ch.tx_antennas() as f64)
}

/// Quantity averaged by [`ergodic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// CDD sum-rate.
    CddRate,
    /// Sum capacity without transmitter CSI.
    SumCapacity,
    /// Sum capacity minus CDD sum-rate on the same realization.
    CapacityGap,
}

impl Metric {
    fn evaluate(self, ch: &ChannelSet, dft: &ComplexMatrix, snrs: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Metric::CddRate => cdd_rates_on_grid(ch, dft, snrs, out),
            Metric::SumCapacity => capacity_on_grid(ch, snrs, out),
            Metric::CapacityGap => {
                let mut cdd = vec![0.0; snrs.len()];
                cdd_rates_on_grid(ch, dft, snrs, &mut cdd)?;
                capacity_on_grid(ch, snrs, out)?;
                for (o, r) in out.iter_mut().zip(cdd) {
                    *o -= r;
                }
                Ok(())
            }
        }
    }
}

/// CDD rate for every SNR via the per-bin reduction (one Gram per bin).
pub(crate) fn cdd_rates_on_grid(
    ch: &ChannelSet,
    dft: &ComplexMatrix,
    snrs: &[f64],
    out: &mut [f64],
) -> Result<()> {
    out.fill(0.0);
    let blocks = reduce_with_dft(ch, dft);
    let bins = blocks.len() as f64;
    for b in &blocks {
        let g = SmallGram::new(b);
        for (o, &snr) in out.iter_mut().zip(snrs) {
            *o += g.log2_det_plus(snr)?;
        }
    }
    for o in out.iter_mut() {
        *o /= bins;
    }
    Ok(())
}

pub(crate) fn capacity_on_grid(ch: &ChannelSet, snrs: &[f64], out: &mut [f64]) -> Result<()> {
    let g = SmallGram::of_columns(ch.users());
    let n_t = ch.tx_antennas() as f64;
    for (o, &snr) in out.iter_mut().zip(snrs) {
        *o = g.log2_det_plus(snr / n_t)?;
    }
    Ok(())
}

/// Ergodic average of `metric` at `cfg.snr` over `cfg.trials` realizations.
pub fn ergodic(metric: Metric, cfg: &SystemConfig) -> Result<RateEstimate> {
    Ok(ergodic_sweep(metric, cfg, &[cfg.snr])?[0])
}

/// Ergodic averages at every SNR in `snrs`, all sharing the same channel draws.
pub fn ergodic_sweep(metric: Metric, cfg: &SystemConfig, snrs: &[f64]) -> Result<Vec<RateEstimate>> {
    for &s in snrs {
        check_snr(s)?;
    }
    let dft = dft_matrix(cfg.tx_antennas)?;
    monte_carlo(cfg, snrs.len(), |ch, out| metric.evaluate(ch, &dft, snrs, out))
}

/// Trials per reduction chunk. Fixed, so the summation tree never depends
/// on the number of workers.
const CHUNK: usize = 1024;

/// Runs `per_trial` on `cfg.trials` independent channel draws, each writing
/// `outputs` values, and returns the mean and standard error of each output.
///
/// Trials are split into fixed-size chunks, reduced sequentially inside each
/// chunk and then merged in chunk order, so the result is bit-identical for
/// any rayon pool size.
pub fn monte_carlo<F>(cfg: &SystemConfig, outputs: usize, per_trial: F) -> Result<Vec<RateEstimate>>
where
    F: Fn(&ChannelSet, &mut [f64]) -> Result<()> + Sync,
{
    cfg.validate()?;
    if cfg.trials < 2 {
        return Err(Error::Argument("at least 2 trials are needed for a standard error".into()));
    }
    let chunks = cfg.trials.div_ceil(CHUNK);
    let partials: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![Moments::default(); outputs];
            let mut values = vec![0.0; outputs];
            let end = ((chunk + 1) * CHUNK).min(cfg.trials);
            for trial in chunk * CHUNK..end {
                let ch = draw_channels(cfg, trial as u64);
                per_trial(&ch, &mut values)?;
                for (m, &v) in acc.iter_mut().zip(&values) {
                    m.push(v);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![Moments::default(); outputs];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Running count, mean and sum of squared deviations (Welford / Chan).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n / n;
        self.m2 += other.m2 + delta * delta * self.n * other.n / n;
        self.n = n;
    }

    fn estimate(&self) -> RateEstimate {
        let var = if self.n > 1.0 { (self.m2 / (self.n - 1.0)).max(0.0) } else { 0.0 };
        RateEstimate { mean: self.mean, stderr: (var / self.n).sqrt(), trials: self.n as usize }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{reduce_to_parallel, sample_channels};

    fn real_channel(rows: &[&[f64]]) -> ChannelSet {
        ChannelSet::new(vec![ComplexMatrix::from_real_rows(rows).unwrap()]).unwrap()
    }

    #[test]
    fn zero_snr_gives_zero() {
        let cfg = SystemConfig::new(2, 3, 2, 0.0, 10, 1).unwrap();
        let ch = sample_channels(&cfg, 0).unwrap();
        assert_eq!(rate_cdd(&ch, 0.0).unwrap(), 0.0);
        assert_eq!(sum_capacity(&ch, 0.0).unwrap(), 0.0);
        assert_eq!(rate_cdd_reduced(&reduce_to_parallel(&ch), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_effective_channel_rate() {
        let ch = real_channel(&[&[1.0, 0.0]]);
        assert!((rate_cdd(&ch, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn siso_capacity() {
        let ch = real_channel(&[&[1.0]]);
        assert!((sum_capacity(&ch, 3.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn negative_snr_and_empty_blocks_rejected() {
        let ch = real_channel(&[&[1.0]]);
        assert!(matches!(rate_cdd(&ch, -1.0), Err(Error::Argument(_))));
        assert!(matches!(sum_capacity(&ch, -0.5), Err(Error::Argument(_))));
        assert!(matches!(rate_cdd_reduced(&[], 1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn all_zero_blocks_give_zero_rate() {
        let blocks = vec![ComplexMatrix::zeros(2, 3); 4];
        assert_eq!(rate_cdd_reduced(&blocks, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn single_receive_antenna_capacity_is_rank_one() {
        let cfg = SystemConfig::new(3, 2, 1, 4.0, 50, 9).unwrap();
        for trial in 0..50 {
            let ch = sample_channels(&cfg, trial).unwrap();
            let energy: f64 = ch.users().iter().flat_map(|h| h.as_slice()).map(|z| z.norm_sqr()).sum();
            let expected = (1.0 + 4.0 / 2.0 * energy).log2();
            assert!((sum_capacity(&ch, 4.0).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ergodic_requires_two_trials() {
        let cfg = SystemConfig::new(1, 1, 1, 1.0, 1, 0).unwrap();
        assert!(matches!(ergodic(Metric::CddRate, &cfg), Err(Error::Argument(_))));
    }

    #[test]
    fn ergodic_at_zero_snr_is_exactly_zero() {
        let cfg = SystemConfig::new(2, 2, 2, 0.0, 3000, 4).unwrap();
        for metric in [Metric::CddRate, Metric::SumCapacity] {
            let est = ergodic(metric, &cfg).unwrap();
            assert_eq!((est.mean, est.stderr, est.trials), (0.0, 0.0, 3000));
        }
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.m2 - all.m2).abs() < 1e-9);
    }

    #[test]
    fn sweep_agrees_with_single_point_calls() {
        let cfg = SystemConfig::new(2, 2, 2, 1.0, 500, 77).unwrap();
        let snrs = [0.5, 5.0];
        let sweep = ergodic_sweep(Metric::CddRate, &cfg, &snrs).unwrap();
        for (est, &snr) in sweep.iter().zip(&snrs) {
            let single = ergodic(Metric::CddRate, &cfg.with_snr(snr)).unwrap();
            assert!((est.mean - single.mean).abs() < 1e-12);
        }
    }
}
