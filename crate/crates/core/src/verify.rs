//! Self-check suite: the structural identities and statistical properties
//! of the library, run at reduced trial counts.

use std::fmt;

use crate::bounds::{
    cap_lower_bound, digamma_int, gap_high_snr, psi_limit_check, rc_lower_bound, rc_upper_bound,
};
use crate::channel::{
    cdd_codeword, complex_gaussian, draw_channels, effective_channel, reduce_to_parallel,
    reduce_with_dft, shuffle_order, trial_rng, SystemConfig,
};
use crate::error::Result;
use crate::matrix::{dft_matrix, permutation_matrix, ComplexMatrix};
use crate::rate::{
    ergodic_sweep, monte_carlo, rate_cdd, rate_cdd_reduced, rate_cdd_via_permutation,
    sum_capacity, Metric,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte-Carlo trials per statistical property.
    pub trials: usize,
    /// Negative control: swap two entries of the bin-grouping permutation.
    pub corrupt_permutation: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 2008, trials: 20_000, corrupt_permutation: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub properties: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            let tag = if p.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:<22} {}", p.name, p.detail)?;
        }
        let passed = self.properties.iter().filter(|p| p.passed).count();
        write!(f, "{passed}/{} properties passed", self.properties.len())
    }
}

/// Bin-grouping permutation, optionally with its first and last targets swapped.
pub fn verify_permutation(n_t: usize, n_r: usize, corrupt: bool) -> Result<ComplexMatrix> {
    let mut order = shuffle_order(n_t, n_r);
    if corrupt {
        let last = order.len() - 1;
        order.swap(0, last);
    }
    permutation_matrix(&order)
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let properties = vec![
        diagonalization(opts)?,
        dual_path(opts)?,
        dominance(opts)?,
        digamma_identity(opts)?,
        sandwich(opts)?,
        gap_convergence(opts)?,
        psi_limit()?,
    ];
    Ok(VerifyReport { properties })
}

fn grid() -> impl Iterator<Item = (usize, usize, usize)> {
    (1..=4).flat_map(|k| (1..=4).flat_map(move |nt| (1..=4).map(move |nr| (k, nt, nr))))
}

fn diagonalization(opts: &VerifyOptions) -> Result<PropertyResult> {
    let mut worst = 0.0_f64;
    for (idx, (k, nt, nr)) in grid().enumerate() {
        let cfg = SystemConfig::new(k, nt, nr, 1.0, 1, opts.seed)?;
        let ch = draw_channels(&cfg, idx as u64);
        let eff = effective_channel(&ch);
        let d = dft_matrix(nt)?;
        for user in 0..k {
            for i in 0..nr {
                for j in 0..nr {
                    let prod = eff.block(user, i).matmul(&eff.block(user, j).adjoint())?;
                    let diag = d.matmul(&prod)?.matmul(&d.adjoint())?;
                    worst = worst.max(diag.max_off_diagonal());
                }
            }
        }
        let mut rng = trial_rng(opts.seed ^ 0xc0de, idx as u64);
        let x: Vec<_> = (0..nt).map(|_| complex_gaussian(&mut rng)).collect();
        let g = cdd_codeword(&x, nt)?;
        worst = worst.max(d.matmul(&g)?.matmul(&d.adjoint())?.max_off_diagonal());
    }
    Ok(PropertyResult {
        name: "diagonalization",
        passed: worst < 1e-9,
        detail: format!("max off-diagonal {worst:.3e} (tol 1e-9)"),
    })
}

fn dual_path(opts: &VerifyOptions) -> Result<PropertyResult> {
    let mut worst = 0.0_f64;
    let snr = 5.0;
    for (idx, (k, nt, nr)) in grid().enumerate() {
        let cfg = SystemConfig::new(k, nt, nr, snr, 1, opts.seed)?;
        let perm = verify_permutation(nt, nr, opts.corrupt_permutation)?;
        for rep in 0..4u64 {
            let ch = draw_channels(&cfg, 1000 + 4 * idx as u64 + rep);
            let explicit = rate_cdd(&ch, snr)?;
            let reduced = rate_cdd_reduced(&reduce_to_parallel(&ch), snr)?;
            let permuted = rate_cdd_via_permutation(&ch, snr, &perm)?;
            worst = worst.max((explicit - reduced).abs()).max((explicit - permuted).abs());
        }
    }
    Ok(PropertyResult {
        name: "dual-path",
        passed: worst < 1e-9,
        detail: format!("max |explicit - reduced| {worst:.3e} bits (tol 1e-9)"),
    })
}

fn dominance(opts: &VerifyOptions) -> Result<PropertyResult> {
    let mut worst = f64::INFINITY;
    for (idx, (k, nt, nr)) in grid().enumerate() {
        let cfg = SystemConfig::new(k, nt, nr, 1.0, 1, opts.seed)?;
        let ch = draw_channels(&cfg, 5000 + idx as u64);
        for snr in [0.1, 10.0, 1000.0] {
            worst = worst.min(sum_capacity(&ch, snr)? - rate_cdd(&ch, snr)?);
        }
    }
    Ok(PropertyResult {
        name: "capacity-dominance",
        passed: worst >= -1e-9,
        detail: format!("min C - R_c {worst:.3e} bits"),
    })
}

fn digamma_identity(opts: &VerifyOptions) -> Result<PropertyResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for k in [1usize, 2, 4] {
        let cfg = SystemConfig::new(k, 4, 1, 1.0, opts.trials, opts.seed ^ k as u64)?;
        let dft = dft_matrix(4)?;
        let est = monte_carlo(&cfg, 1, |ch, out| {
            let blocks = reduce_with_dft(ch, &dft);
            out[0] = blocks
                .iter()
                .map(|b| b.row(0).iter().map(|z| z.norm_sqr()).sum::<f64>().ln())
                .sum::<f64>()
                / blocks.len() as f64;
            Ok(())
        })?[0];
        let err = (est.mean - digamma_int(k)).abs();
        let tol = 0.01_f64.max(3.0 * est.stderr);
        passed &= err <= tol;
        parts.push(format!("K={k}: {err:.4}"));
    }
    Ok(PropertyResult {
        name: "digamma-identity",
        passed,
        detail: format!("|E ln λ - ψ(K)| {}", parts.join(", ")),
    })
}

fn sandwich(opts: &VerifyOptions) -> Result<PropertyResult> {
    let snrs = [0.1, 1.0, 10.0, 100.0, 1000.0];
    let mut failures = 0;
    let mut checked = 0;
    for (k, nt, nr) in [(1, 2, 1), (2, 2, 2), (3, 2, 4), (4, 3, 2), (2, 4, 3)] {
        let cfg = SystemConfig::new(k, nt, nr, 1.0, opts.trials, opts.seed)?;
        let cdd = ergodic_sweep(Metric::CddRate, &cfg, &snrs)?;
        let cap = ergodic_sweep(Metric::SumCapacity, &cfg, &snrs)?;
        for ((&snr, r), c) in snrs.iter().zip(&cdd).zip(&cap) {
            let lo = rc_lower_bound(k, nt, nr, snr)?;
            let hi = rc_upper_bound(k, nr, snr)?;
            let cap_lo = cap_lower_bound(k, nt, nr, snr)?;
            checked += 1;
            if lo - 3.0 * r.stderr > r.mean
                || r.mean > hi + 3.0 * r.stderr
                || cap_lo > c.mean + 3.0 * c.stderr
            {
                failures += 1;
            }
        }
    }
    Ok(PropertyResult {
        name: "bound-sandwich",
        passed: failures == 0,
        detail: format!("{failures} of {checked} points outside bounds"),
    })
}

fn gap_convergence(opts: &VerifyOptions) -> Result<PropertyResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, nt) in [(1, 2), (1, 4), (2, 2), (4, 2)] {
        let cfg = SystemConfig::new(k, nt, 1, 1e4, opts.trials, opts.seed)?;
        let est = ergodic_sweep(Metric::CapacityGap, &cfg, &[1e4])?[0];
        let target = gap_high_snr(k, nt, 1)?.gap;
        let err = (est.mean - target).abs();
        passed &= err <= 0.05_f64.max(3.0 * est.stderr);
        parts.push(format!("({k},{nt}): {err:.4}"));
    }
    Ok(PropertyResult {
        name: "gap-convergence",
        passed,
        detail: format!("|MC gap - limit| at 40 dB {}", parts.join(", ")),
    })
}

fn psi_limit() -> Result<PropertyResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for nt in [2, 3, 4] {
        let r = psi_limit_check(nt, 10_000)?;
        let last = *r.last().expect("non-empty");
        passed &= last < 1e-4 && r.windows(2).all(|w| w[1] <= w[0]);
        parts.push(format!("n_T={nt}: {last:.2e}"));
    }
    Ok(PropertyResult {
        name: "psi-limit",
        passed,
        detail: format!("residual at K=1e4 {}", parts.join(", ")),
    })
}
