//! Ergodic sum-rates of cyclic delay diversity (CDD) in the multi-user
//! MIMO multiple access channel.
//!
//! Every user sends its symbols through a CDD code over `T = n_T` channel
//! uses. The resulting effective channel is block-circulant and splits into
//! `n_T` parallel `n_R × K` MIMO channels after a DFT. This crate computes
//! the exact instantaneous rates, Monte-Carlo ergodic averages, the
//! closed-form lower/upper bounds and the two-user rate regions.
//!
//! ```
//! use cdd_core::{ergodic, rc_lower_bound, Metric, SystemConfig};
//!
//! let cfg = SystemConfig::new(2, 2, 1, 10.0, 2_000, 7).unwrap();
//! let rate = ergodic(Metric::CddRate, &cfg).unwrap();
//! assert!(rate.mean > rc_lower_bound(2, 2, 1, 10.0).unwrap() - 3.0 * rate.stderr);
//! ```

pub mod bounds;
pub mod channel;
pub mod error;
pub mod matrix;
pub mod rate;
pub mod region;
pub mod verify;

pub use bounds::{
    cap_lower_bound, digamma_int, gap_high_snr, harmonic, jensen_collapsed_bounds,
    psi_limit_check, rc_lower_bound, rc_upper_bound, BoundReport, GapEstimate, EULER_GAMMA,
};
pub use channel::{
    cdd_codeword, conjugated_gram, effective_channel, effective_channel_oriented,
    reduce_to_parallel, sample_channels, shuffle_order, shuffle_permutation, ChannelSet,
    CirculantOrientation, EffectiveChannel, SystemConfig,
};
pub use error::{Error, Result};
pub use matrix::{dft_matrix, kron, logdet_hermitian_psd, permutation_matrix, ComplexMatrix};
pub use num_complex::Complex64;
pub use rate::{
    ergodic, ergodic_sweep, monte_carlo, rate_cdd, rate_cdd_reduced, rate_cdd_via_permutation,
    sum_capacity, Metric, RateEstimate, SmallGram,
};
pub use region::{pareto_segment, region_capacity, region_cdd, RatePair, RegionEstimate};
pub use verify::{run_verify, PropertyResult, VerifyOptions, VerifyReport};

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
