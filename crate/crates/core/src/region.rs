//! Two-user ergodic rate regions described by their three pentagon
//! constraints, for optimal Gaussian signalling and for CDD.

use crate::channel::{reduce_with_dft, ChannelSet, SystemConfig};
use crate::error::{Error, Result};
use crate::matrix::{dft_matrix, ComplexMatrix};
use crate::rate::{capacity_on_grid, cdd_rates_on_grid, monte_carlo, RateEstimate, SmallGram};

/// A point `(r1, r2)` in bits per channel use.
pub type RatePair = (f64, f64);

/// Pentagon `{r1 ≤ i1, r2 ≤ i2, r1 + r2 ≤ i_sum}` estimated by Monte-Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEstimate {
    pub i1: RateEstimate,
    pub i2: RateEstimate,
    pub i_sum: RateEstimate,
    /// User 1 decoded last: `(i1, i_sum - i1)`.
    pub corner_a: RatePair,
    /// User 2 decoded last: `(i_sum - i2, i2)`.
    pub corner_b: RatePair,
    /// Standard errors of `(i_sum - i1, i_sum - i2)` from paired trials.
    pub corner_stderr: (f64, f64),
}

impl RegionEstimate {
    fn from_estimates(est: &[RateEstimate]) -> Self {
        let (i1, i2, i_sum) = (est[0], est[1], est[2]);
        Self {
            i1,
            i2,
            i_sum,
            corner_a: (i1.mean, i_sum.mean - i1.mean),
            corner_b: (i_sum.mean - i2.mean, i2.mean),
            corner_stderr: (est[3].stderr, est[4].stderr),
        }
    }

    /// Measured `i1 + i2 - i_sum`; positive for a proper pentagon.
    pub fn slack(&self) -> f64 {
        self.i1.mean + self.i2.mean - self.i_sum.mean
    }
}

fn check_two_users(cfg: &SystemConfig) -> Result<()> {
    if cfg.users != 2 {
        return Err(Error::Argument(format!("rate regions need K = 2, got {}", cfg.users)));
    }
    Ok(())
}

/// Writes `[i1, i2, i_sum, i_sum - i1, i_sum - i2]`.
fn fill(out: &mut [f64], i1: f64, i2: f64, i_sum: f64) {
    out.copy_from_slice(&[i1, i2, i_sum, i_sum - i1, i_sum - i2]);
}

/// Capacity region: single-user capacities with the other user absent and
/// the sum capacity, all from the same channel draws.
pub fn region_capacity(cfg: &SystemConfig) -> Result<RegionEstimate> {
    check_two_users(cfg)?;
    let snr = [cfg.snr];
    let est = monte_carlo(cfg, 5, |ch, out| {
        let mut v = [0.0; 3];
        capacity_on_grid(&ch.single_user(0), &snr, &mut v[0..1])?;
        capacity_on_grid(&ch.single_user(1), &snr, &mut v[1..2])?;
        capacity_on_grid(ch, &snr, &mut v[2..3])?;
        fill(out, v[0], v[1], v[2]);
        Ok(())
    })?;
    Ok(RegionEstimate::from_estimates(&est))
}

/// `log₂(1 + snr·‖h'_{bin,k}‖²)`, user `k` alone on DFT bin `bin`.
pub fn single_user_cdd_rate(bin_channel: &ComplexMatrix, k: usize, snr: f64) -> Result<f64> {
    let column = ComplexMatrix::from_fn(bin_channel.rows(), 1, |i, _| bin_channel[(i, k)]);
    SmallGram::new(&column).log2_det_plus(snr)
}

/// CDD region evaluated on DFT bin `bin` for the single-user constraints.
pub fn region_cdd_on_bin(cfg: &SystemConfig, bin: usize) -> Result<RegionEstimate> {
    check_two_users(cfg)?;
    if bin >= cfg.tx_antennas {
        return Err(Error::Argument(format!("bin {bin} out of range for n_T = {}", cfg.tx_antennas)));
    }
    let dft = dft_matrix(cfg.tx_antennas)?;
    let snr = [cfg.snr];
    let est = monte_carlo(cfg, 5, |ch: &ChannelSet, out| {
        let blocks = reduce_with_dft(ch, &dft);
        let i1 = single_user_cdd_rate(&blocks[bin], 0, cfg.snr)?;
        let i2 = single_user_cdd_rate(&blocks[bin], 1, cfg.snr)?;
        let mut sum = [0.0];
        cdd_rates_on_grid(ch, &dft, &snr, &mut sum)?;
        fill(out, i1, i2, sum[0]);
        Ok(())
    })?;
    Ok(RegionEstimate::from_estimates(&est))
}

/// CDD region: single-user rates from the columns of the first per-bin
/// channel `H'_1`, sum constraint from the joint CDD sum-rate.
pub fn region_cdd(cfg: &SystemConfig) -> Result<RegionEstimate> {
    region_cdd_on_bin(cfg, 0)
}

/// `samples` evenly spaced points on the segment from corner A to corner B.
pub fn pareto_segment(region: &RegionEstimate, samples: usize) -> Result<Vec<RatePair>> {
    if samples < 2 {
        return Err(Error::Argument("pareto segment needs at least 2 samples".into()));
    }
    let (a, b) = (region.corner_a, region.corner_b);
    Ok((0..samples)
        .map(|j| {
            let w = j as f64 / (samples - 1) as f64;
            (a.0 + w * (b.0 - a.0), a.1 + w * (b.1 - a.1))
        })
        .collect())
}
