//! Rayleigh MAC channels, the CDD codeword and the block-circulant
//! effective channel together with its reduction to parallel MIMO channels.
//!
//! Index conventions: user `k`, receive antenna `i`, transmit antenna (and
//! DFT bin) `t`, all zero-based. The stacked effective channel has row
//! `i·n_T + r` and column `k·n_T + c`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{dft_matrix, kron, permutation_matrix, ComplexMatrix};

/// Scenario parameters. The CDD block length always equals `tx_antennas`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub users: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    /// Linear signal-to-noise ratio.
    pub snr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(
        users: usize,
        tx_antennas: usize,
        rx_antennas: usize,
        snr: f64,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self { users, tx_antennas, rx_antennas, snr, trials, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("users", self.users),
            ("tx_antennas", self.tx_antennas),
            ("rx_antennas", self.rx_antennas),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return Err(Error::Argument(format!("{name} must be at least 1")));
            }
        }
        check_snr(self.snr)
    }

    pub fn with_snr(self, snr: f64) -> Self {
        Self { snr, ..self }
    }

    pub fn with_trials(self, trials: usize) -> Self {
        Self { trials, ..self }
    }

    #[inline]
    pub fn block_length(&self) -> usize {
        self.tx_antennas
    }
}

pub(crate) fn check_snr(snr: f64) -> Result<()> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Argument(format!("snr must be non-negative, got {snr}")));
    }
    Ok(())
}

/// One realization of every user's `n_R × n_T` channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    users: Vec<ComplexMatrix>,
}

impl ChannelSet {
    /// All matrices must share one shape.
    pub fn new(users: Vec<ComplexMatrix>) -> Result<Self> {
        let first = users
            .first()
            .ok_or_else(|| Error::Argument("channel set needs at least one user".into()))?;
        let (r, c) = (first.rows(), first.cols());
        if users.iter().any(|h| h.rows() != r || h.cols() != c) {
            return Err(Error::Dimension("user channels differ in shape".into()));
        }
        Ok(Self { users })
    }

    pub fn users(&self) -> &[ComplexMatrix] {
        &self.users
    }

    pub fn user(&self, k: usize) -> &ComplexMatrix {
        &self.users[k]
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn rx_antennas(&self) -> usize {
        self.users[0].rows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.users[0].cols()
    }

    /// Drops every user except `k`.
    pub fn single_user(&self, k: usize) -> Self {
        Self { users: vec![self.users[k].clone()] }
    }
}

/// Draws the channels of trial `trial_index`.
///
/// Each trial owns its own ChaCha8 stream keyed by `(seed, trial_index)`;
/// entries are consumed in (user, receive antenna, transmit antenna) order,
/// so the result never depends on how trials are scheduled.
pub fn sample_channels(cfg: &SystemConfig, trial_index: usize) -> Result<ChannelSet> {
    if trial_index >= cfg.trials {
        return Err(Error::Argument(format!(
            "trial index {trial_index} out of range for {} trials",
            cfg.trials
        )));
    }
    Ok(draw_channels(cfg, trial_index as u64))
}

pub(crate) fn draw_channels(cfg: &SystemConfig, trial: u64) -> ChannelSet {
    let mut rng = trial_rng(cfg.seed, trial);
    let users = (0..cfg.users)
        .map(|_| {
            ComplexMatrix::from_fn(cfg.rx_antennas, cfg.tx_antennas, |_, _| {
                complex_gaussian(&mut rng)
            })
        })
        .collect();
    ChannelSet { users }
}

pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Circularly-symmetric complex Gaussian with unit variance (Box-Muller).
pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    // 1 - u lies in (0, 1], keeping the log finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    Complex64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
}

/// CDD transmit matrix: row 0 is `x`, each later row is the previous one
/// cyclically shifted right by one.
pub fn cdd_codeword(x: &[Complex64], block_length: usize) -> Result<ComplexMatrix> {
    if block_length == 0 || x.len() != block_length {
        return Err(Error::Dimension(format!(
            "codeword of length {} for block length {block_length}",
            x.len()
        )));
    }
    let t = block_length;
    Ok(ComplexMatrix::from_fn(t, t, |r, c| x[(c + t - r) % t]))
}

/// Shift direction used for each `n_T × n_T` block of the effective channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirculantOrientation {
    /// Row `r` is the channel row shifted left by `r`; this is what the
    /// received signal `G(x)·Hᵀ` produces.
    LeftShift,
    /// Row `r` is the channel row shifted right by `r` (a true circulant).
    RightShift,
}

/// Stacked effective channel `[H̃_1, …, H̃_K]` of size `(n_R·n_T) × (n_T·K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    stacked: ComplexMatrix,
    users: usize,
    tx_antennas: usize,
    rx_antennas: usize,
}

impl EffectiveChannel {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.stacked
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }

    /// Block `H̃_{k,i}` between user `k` and receive antenna `i`.
    pub fn block(&self, k: usize, i: usize) -> ComplexMatrix {
        let t = self.tx_antennas;
        self.stacked
            .block(i * t, k * t, t, t)
            .expect("block indices inside the stacked channel")
    }
}

pub fn effective_channel(ch: &ChannelSet) -> EffectiveChannel {
    effective_channel_oriented(ch, CirculantOrientation::LeftShift)
}

pub fn effective_channel_oriented(
    ch: &ChannelSet,
    orientation: CirculantOrientation,
) -> EffectiveChannel {
    let (n_r, t, users) = (ch.rx_antennas(), ch.tx_antennas(), ch.num_users());
    let stacked = ComplexMatrix::from_fn(n_r * t, t * users, |row, col| {
        let (i, r) = (row / t, row % t);
        let (k, c) = (col / t, col % t);
        let tap = match orientation {
            CirculantOrientation::LeftShift => (r + c) % t,
            CirculantOrientation::RightShift => (c + t - r) % t,
        };
        ch.user(k)[(i, tap)]
    });
    EffectiveChannel { stacked, users, tx_antennas: t, rx_antennas: n_r }
}

/// Position in the bin-major ordering of each receive-major index:
/// `i·n_T + t ↦ t·n_R + i`.
pub fn shuffle_order(n_t: usize, n_r: usize) -> Vec<usize> {
    (0..n_r * n_t).map(|a| (a % n_t) * n_r + a / n_t).collect()
}

/// Permutation `P` with `P[i·n_T + t, t·n_R + i] = 1`.
///
/// Conjugating the DFT-transformed Gram matrix as `Pᴴ·M·P` collects the
/// entries of each DFT bin into one contiguous `n_R × n_R` diagonal block.
pub fn shuffle_permutation(n_t: usize, n_r: usize) -> Result<ComplexMatrix> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::Dimension("permutation needs n_T, n_R >= 1".into()));
    }
    permutation_matrix(&shuffle_order(n_t, n_r))
}

/// `Pᴴ (I ⊗ D) H̃ H̃ᴴ (I ⊗ D)ᴴ P` for the given permutation.
pub fn conjugated_gram(eff: &EffectiveChannel, perm: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = dft_matrix(eff.tx_antennas)?;
    let transform = kron(&ComplexMatrix::identity(eff.rx_antennas), &d);
    let inner = transform.matmul(&eff.stacked.gram())?.matmul(&transform.adjoint())?;
    perm.adjoint().matmul(&inner)?.matmul(perm)
}

/// Per-bin channels `H'_t` (`n_R × K`), `H'_t[i, k] = (D·h_i^k)[t]`.
///
/// With the unitary DFT these entries keep the unit variance of the raw
/// gains, and `Pᴴ(I⊗D)H̃H̃ᴴ(I⊗D)ᴴP = blockdiag(n_T·H'_t·H'_tᴴ)`.
pub fn reduce_to_parallel(ch: &ChannelSet) -> Vec<ComplexMatrix> {
    let d = dft_matrix(ch.tx_antennas()).expect("channel has at least one transmit antenna");
    reduce_with_dft(ch, &d)
}

pub(crate) fn reduce_with_dft(ch: &ChannelSet, d: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let (n_r, t, users) = (ch.rx_antennas(), ch.tx_antennas(), ch.num_users());
    debug_assert_eq!(d.rows(), t);
    (0..t)
        .map(|bin| {
            let twiddles = d.row(bin);
            ComplexMatrix::from_fn(n_r, users, |i, k| {
                ch.user(k).row(i).iter().zip(twiddles).map(|(h, w)| h * w).sum()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn cfg(k: usize, n_t: usize, n_r: usize) -> SystemConfig {
        SystemConfig::new(k, n_t, n_r, 1.0, 1000, 0x5eed).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(0, 1, 1, 1.0, 1, 0).is_err());
        assert!(SystemConfig::new(1, 1, 1, -1.0, 1, 0).is_err());
        assert!(SystemConfig::new(1, 1, 1, f64::NAN, 1, 0).is_err());
        assert!(SystemConfig::new(1, 1, 1, 0.0, 0, 0).is_err());
        assert_eq!(cfg(2, 3, 1).block_length(), 3);
    }

    #[test]
    fn sampling_is_deterministic_and_shaped() {
        let c = cfg(2, 3, 2);
        let a = sample_channels(&c, 7).unwrap();
        let b = sample_channels(&c, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_users(), 2);
        assert_eq!((a.rx_antennas(), a.tx_antennas()), (2, 3));
        assert_ne!(a, sample_channels(&c, 8).unwrap());
        assert!(matches!(sample_channels(&c, 1000), Err(Error::Argument(_))));
    }

    #[test]
    fn codeword_shifts_right() {
        let g = cdd_codeword(&real(&[1.0, 2.0, 3.0]), 3).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0], &[2.0, 3.0, 1.0]])
                .unwrap();
        assert_eq!(g, expected);

        let single = cdd_codeword(&real(&[4.5]), 1).unwrap();
        assert_eq!(single[(0, 0)], Complex64::new(4.5, 0.0));

        assert!(matches!(cdd_codeword(&real(&[1.0, 2.0]), 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn codeword_rows_and_columns_permute_x() {
        let x = real(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let g = cdd_codeword(&x, 5).unwrap();
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v
        };
        let target = sorted(x.iter().map(|z| z.re).collect());
        for r in 0..5 {
            assert_eq!(sorted(g.row(r).iter().map(|z| z.re).collect()), target);
            assert_eq!(sorted(g.column(r).iter().map(|z| z.re).collect()), target);
        }
    }

    #[test]
    fn effective_channel_single_antenna_layout() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0]]).unwrap();
        let eff = effective_channel(&ChannelSet::new(vec![h]).unwrap());
        let expected =
            ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 1.0], &[3.0, 1.0, 2.0]])
                .unwrap();
        assert_eq!(eff.matrix(), &expected);
    }

    #[test]
    fn delta_channel_gives_identity_block() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0, 0.0]]).unwrap();
        let ch = ChannelSet::new(vec![h]).unwrap();
        let right = effective_channel_oriented(&ch, CirculantOrientation::RightShift);
        assert_eq!(right.matrix(), &ComplexMatrix::identity(4));
        // Left shifts of a delta give the index reversal t -> -t, whose Gram is I.
        let left = effective_channel(&ch);
        assert_eq!(left.matrix(), &permutation_matrix(&[0, 3, 2, 1]).unwrap());
        assert_eq!(left.block(0, 0).gram(), ComplexMatrix::identity(4));
    }

    #[test]
    fn effective_channel_shape() {
        let ch = sample_channels(&cfg(2, 4, 2), 0).unwrap();
        let eff = effective_channel(&ch);
        assert_eq!((eff.matrix().rows(), eff.matrix().cols()), (8, 8));
        assert_eq!(eff.block(1, 1)[(0, 0)], ch.user(1)[(1, 0)]);
    }

    #[test]
    fn stride_ordering_example() {
        // The stride ordering for n_T = 4, n_R = 2.
        assert_eq!(shuffle_order(4, 2), vec![0, 2, 4, 6, 1, 3, 5, 7]);
        assert_eq!(shuffle_permutation(1, 3).unwrap(), ComplexMatrix::identity(3));
        assert!(shuffle_permutation(0, 1).is_err());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        for n_t in 1..=6 {
            for n_r in 1..=6 {
                let p = shuffle_permutation(n_t, n_r).unwrap();
                let n = n_t * n_r;
                for r in 0..n {
                    let row: f64 = p.row(r).iter().map(|z| z.re).sum();
                    let col: f64 = p.column(r).iter().map(|z| z.re).sum();
                    assert_eq!((row, col), (1.0, 1.0));
                }
                let pp = &p * &p.adjoint();
                assert_eq!(pp, ComplexMatrix::identity(n));
            }
        }
    }

    #[test]
    fn reduction_of_single_tap_is_raw_channel() {
        let ch = sample_channels(&cfg(3, 1, 2), 4).unwrap();
        let blocks = reduce_to_parallel(&ch);
        assert_eq!(blocks.len(), 1);
        for i in 0..2 {
            for k in 0..3 {
                assert!((blocks[0][(i, k)] - ch.user(k)[(i, 0)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0, 0.0]]).unwrap();
        let blocks = reduce_to_parallel(&ChannelSet::new(vec![h]).unwrap());
        for b in &blocks {
            // Unitary scaling: every bin equals 1/√T.
            assert!((b[(0, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }
}
