//! Closed-form lower and upper bounds on the CDD sum-rate and the sum
//! capacity, and their high-SNR gap expressions.
//!
//! Notation: `L = min(n_R, K)`, `M = max(n_R, K)` for the CDD rate, and
//! `L̃ = min(n_R, n_T·K)`, `M̃ = max(n_R, n_T·K)` for the capacity.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest `L` accepted by [`rc_upper_bound`].
pub const MAX_UPPER_BOUND_RANK: usize = 20;

/// `Σ_{k=1}^{n} 1/k`, zero for `n = 0`.
pub fn harmonic(n: usize) -> f64 {
    // Smallest terms first.
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// `ψ(n) = H_{n-1} - γ` for integer `n ≥ 1`; this is `E[ln λ]` for `λ`
/// a sum of `n` unit-mean exponentials.
pub fn digamma_int(n: usize) -> f64 {
    assert!(n >= 1, "digamma of a non-positive integer");
    harmonic(n - 1) - EULER_GAMMA
}

fn rank_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// `Σ_{l=1}^{L} log₂(1 + a·exp(ψ(M-l+1)))`.
fn foschini_jensen_sum(l: usize, m: usize, a: f64) -> f64 {
    (1..=l).map(|j| (1.0 + a * digamma_int(m - j + 1).exp()).log2()).sum()
}

/// `L·log₂(1 + a·exp((1/L)·Σ_l ψ(M-l+1)))`.
fn averaged_exponent_bound(l: usize, m: usize, a: f64) -> f64 {
    let mean_exponent = (1..=l).map(|j| digamma_int(m - j + 1)).sum::<f64>() / l as f64;
    l as f64 * (1.0 + a * mean_exponent.exp()).log2()
}

fn check_dims(users: usize, n_t: usize, n_r: usize, snr: f64) -> Result<()> {
    if users == 0 || n_t == 0 || n_r == 0 {
        return Err(Error::Argument("antenna and user counts must be at least 1".into()));
    }
    crate::channel::check_snr(snr)
}

/// Lower bound on the ergodic CDD sum-rate. Does not depend on `n_T`.
pub fn rc_lower_bound(users: usize, n_t: usize, n_r: usize, snr: f64) -> Result<f64> {
    check_dims(users, n_t, n_r, snr)?;
    let (l, m) = rank_pair(n_r, users);
    Ok(foschini_jensen_sum(l, m, snr))
}

/// Lower bound on the ergodic sum capacity.
pub fn cap_lower_bound(users: usize, n_t: usize, n_r: usize, snr: f64) -> Result<f64> {
    check_dims(users, n_t, n_r, snr)?;
    let (l, m) = rank_pair(n_r, n_t * users);
    Ok(foschini_jensen_sum(l, m, snr / n_t as f64))
}

/// Looser lower bounds with the exponents averaged before the logarithm:
/// `(rc_lower_jensen, cap_lower_jensen)`.
pub fn jensen_collapsed_bounds(users: usize, n_t: usize, n_r: usize, snr: f64) -> Result<(f64, f64)> {
    check_dims(users, n_t, n_r, snr)?;
    let (l, m) = rank_pair(n_r, users);
    let (lc, mc) = rank_pair(n_r, n_t * users);
    Ok((averaged_exponent_bound(l, m, snr), averaged_exponent_bound(lc, mc, snr / n_t as f64)))
}

/// Upper bound `log₂ Σ_{i=0}^{L} C(L,i)·M!/(M-i)!·snrⁱ` (log of the expected
/// determinant of a complex Wishart matrix).
///
/// Terms are accumulated as logarithms and combined with log-sum-exp.
pub fn rc_upper_bound(users: usize, n_r: usize, snr: f64) -> Result<f64> {
    check_dims(users, 1, n_r, snr)?;
    let (l, m) = rank_pair(n_r, users);
    if l > MAX_UPPER_BOUND_RANK {
        return Err(Error::Range(format!(
            "L = {l} exceeds {MAX_UPPER_BOUND_RANK} for the factorial expansion"
        )));
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    let ln_snr = snr.ln();
    let mut log_terms = Vec::with_capacity(l + 1);
    let (mut ln_binom, mut ln_falling) = (0.0_f64, 0.0_f64);
    log_terms.push(0.0);
    for i in 1..=l {
        ln_binom += ((l - i + 1) as f64).ln() - (i as f64).ln();
        ln_falling += ((m - i + 1) as f64).ln();
        log_terms.push(ln_binom + ln_falling + i as f64 * ln_snr);
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|t| (t - peak).exp()).sum();
    Ok((peak + sum.ln()) / LN_2)
}

/// High-SNR difference between sum capacity and CDD sum-rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    /// For `n_R = 1` the limit of the lower-bound difference; otherwise the
    /// general upper bound (then equal to `gap_upper`).
    pub gap: f64,
    /// `1/(K·ln 2)` for `n_R = 1`, the general sum otherwise.
    pub gap_upper: f64,
}

/// High-SNR gap between capacity and CDD rate, in bits.
///
/// The general expression is only stated for `n_R ≤ K`; larger `n_R`
/// yields [`Error::OutOfValidity`].
pub fn gap_high_snr(users: usize, n_t: usize, n_r: usize) -> Result<GapEstimate> {
    check_dims(users, n_t, n_r, 1.0)?;
    if n_r > users {
        return Err(Error::OutOfValidity(format!(
            "gap expression assumes n_R <= K (n_R = {n_r}, K = {users})"
        )));
    }
    if n_r == 1 {
        let tail: f64 = (users..n_t * users).map(|k| 1.0 / k as f64).sum();
        return Ok(GapEstimate {
            gap: (tail - (n_t as f64).ln()) / LN_2,
            gap_upper: 1.0 / (users as f64 * LN_2),
        });
    }
    let bound = general_gap_bound(users, n_t, n_r);
    Ok(GapEstimate { gap: bound, gap_upper: bound })
}

/// `(1/ln 2)·Σ_{l=1}^{n_R} 1/(K-l+1)·(1 + (K-l+1)·ln(1/n_T + (n_T-1)K/(n_T(K-l+1))))`.
fn general_gap_bound(users: usize, n_t: usize, n_r: usize) -> f64 {
    let (k, nt) = (users as f64, n_t as f64);
    let sum: f64 = (1..=n_r)
        .map(|l| {
            let r = (users - l + 1) as f64;
            (1.0 + r * (1.0 / nt + (nt - 1.0) * k / (nt * r)).ln()) / r
        })
        .sum();
    sum / LN_2
}

/// `|Σ_{k=K+1}^{n_T·K-1} 1/k - ln n_T|` for `K = 1..=k_max`.
///
/// The partial sums are advanced incrementally with compensated summation.
pub fn psi_limit_check(n_t: usize, k_max: usize) -> Result<Vec<f64>> {
    if n_t == 0 {
        return Err(Error::Argument("n_T must be at least 1".into()));
    }
    if k_max < 2 {
        return Err(Error::Argument("k_max must be at least 2".into()));
    }
    let target = (n_t as f64).ln();
    let mut sum = Neumaier::default();
    // Current window is k in (K, n_T·K); start from K = 1.
    for k in 2..n_t {
        sum.add(1.0 / k as f64);
    }
    let mut out = Vec::with_capacity(k_max);
    out.push((sum.value() - target).abs());
    for big_k in 2..=k_max {
        if n_t > 1 {
            // Window moves from (K-1, n_T(K-1)) to (K, n_T·K).
            sum.add(-1.0 / big_k as f64);
            for k in n_t * (big_k - 1)..n_t * big_k {
                sum.add(1.0 / k as f64);
            }
        }
        out.push((sum.value() - target).abs());
    }
    Ok(out)
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Every closed-form quantity for one `(K, n_T, n_R, snr)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub rc_lower: f64,
    pub rc_lower_jensen: f64,
    pub rc_upper: f64,
    pub cap_lower: f64,
    pub cap_lower_jensen: f64,
    /// `None` when `n_R > K`.
    pub gap_high_snr: Option<f64>,
    pub gap_upper: Option<f64>,
}

impl BoundReport {
    pub fn compute(users: usize, n_t: usize, n_r: usize, snr: f64) -> Result<Self> {
        let (rc_lower_jensen, cap_lower_jensen) = jensen_collapsed_bounds(users, n_t, n_r, snr)?;
        let gap = match gap_high_snr(users, n_t, n_r) {
            Ok(g) => Some(g),
            Err(Error::OutOfValidity(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            rc_lower: rc_lower_bound(users, n_t, n_r, snr)?,
            rc_lower_jensen,
            rc_upper: rc_upper_bound(users, n_r, snr)?,
            cap_lower: cap_lower_bound(users, n_t, n_r, snr)?,
            cap_lower_jensen,
            gap_high_snr: gap.map(|g| g.gap),
            gap_upper: gap.map(|g| g.gap_upper),
        })
    }
}
