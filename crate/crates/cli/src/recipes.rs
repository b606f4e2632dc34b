//! Turns an [`ExperimentSpec`] into result rows.

use cdd_core::{
    cap_lower_bound, db_to_linear, ergodic_sweep, gap_high_snr, jensen_collapsed_bounds,
    rc_lower_bound, rc_upper_bound, region_capacity, region_cdd, Error, Metric, RateEstimate,
    RegionEstimate, SystemConfig,
};

use crate::config::{ExperimentSpec, MetricKind, Scenario};
use crate::CliError;

/// One CSV line. Closed-form rows carry `trials = 0` and `stderr = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub snr_db: f64,
    pub metric: String,
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Rows for one system, indexed as `[snr][metric]` before flattening.
struct Table {
    grid: Vec<f64>,
    rows: Vec<Vec<Row>>,
    trials: usize,
    seed: u64,
}

impl Table {
    fn new(grid: &[f64], trials: usize, seed: u64) -> Self {
        Self { grid: grid.to_vec(), rows: vec![Vec::new(); grid.len()], trials, seed }
    }

    fn push_mc(&mut self, name: &str, est: &[RateEstimate]) {
        for ((rows, &snr_db), e) in self.rows.iter_mut().zip(&self.grid).zip(est) {
            rows.push(Row {
                snr_db,
                metric: name.to_string(),
                value: e.mean,
                stderr: e.stderr,
                trials: e.trials,
                seed: self.seed,
            });
        }
    }

    fn push_closed<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: Fn(f64) -> cdd_core::Result<f64>,
    {
        for (rows, &snr_db) in self.rows.iter_mut().zip(&self.grid) {
            rows.push(Row {
                snr_db,
                metric: name.to_string(),
                value: f(db_to_linear(snr_db))?,
                stderr: 0.0,
                trials: 0,
                seed: self.seed,
            });
        }
        Ok(())
    }

    fn push_region(&mut self, prefix: &str, snr_idx: usize, r: &RegionEstimate) {
        let (snr_db, trials, seed) = (self.grid[snr_idx], self.trials, self.seed);
        let mut row = |name: &str, value: f64, stderr: f64| {
            self.rows[snr_idx].push(Row {
                snr_db,
                metric: format!("{prefix}_{name}"),
                value,
                stderr,
                trials,
                seed,
            })
        };
        row("i1", r.i1.mean, r.i1.stderr);
        row("i2", r.i2.mean, r.i2.stderr);
        row("isum", r.i_sum.mean, r.i_sum.stderr);
        row("corner_a_r1", r.corner_a.0, r.i1.stderr);
        row("corner_a_r2", r.corner_a.1, r.corner_stderr.0);
        row("corner_b_r1", r.corner_b.0, r.corner_stderr.1);
        row("corner_b_r2", r.corner_b.1, r.i2.stderr);
    }

    fn into_rows(self) -> Vec<Row> {
        self.rows.into_iter().flatten().collect()
    }
}

struct Dims {
    users: usize,
    n_t: usize,
    n_r: usize,
}

fn system(dims: &Dims, spec: &ExperimentSpec) -> Result<SystemConfig, CliError> {
    Ok(SystemConfig::new(dims.users, dims.n_t, dims.n_r, 1.0, spec.trials(), spec.seed())?)
}

/// Appends `metrics` for one system to `table`, each named `<metric><suffix>`.
fn tabulate(
    table: &mut Table,
    dims: &Dims,
    spec: &ExperimentSpec,
    metrics: &[MetricKind],
    suffix: &str,
) -> Result<(), CliError> {
    let cfg = system(dims, spec)?;
    let snrs: Vec<f64> = table.grid.iter().map(|&d| db_to_linear(d)).collect();
    let (k, nt, nr) = (dims.users, dims.n_t, dims.n_r);
    for &metric in metrics {
        let name = format!("{}{suffix}", metric.name());
        match metric {
            MetricKind::CddMc => table.push_mc(&name, &ergodic_sweep(Metric::CddRate, &cfg, &snrs)?),
            MetricKind::CapMc => {
                table.push_mc(&name, &ergodic_sweep(Metric::SumCapacity, &cfg, &snrs)?)
            }
            MetricKind::GapMc => {
                table.push_mc(&name, &ergodic_sweep(Metric::CapacityGap, &cfg, &snrs)?)
            }
            MetricKind::RcLb => table.push_closed(&name, |s| rc_lower_bound(k, nt, nr, s))?,
            MetricKind::RcUb => table.push_closed(&name, |s| rc_upper_bound(k, nr, s))?,
            MetricKind::CapLb => table.push_closed(&name, |s| cap_lower_bound(k, nt, nr, s))?,
            MetricKind::RcLbJensen => {
                table.push_closed(&name, |s| Ok(jensen_collapsed_bounds(k, nt, nr, s)?.0))?
            }
            MetricKind::CapLbJensen => {
                table.push_closed(&name, |s| Ok(jensen_collapsed_bounds(k, nt, nr, s)?.1))?
            }
            MetricKind::Gap => match gap_high_snr(k, nt, nr) {
                Ok(g) => {
                    table.push_closed(&name, |_| Ok(g.gap))?;
                    table.push_closed(&format!("gap_upper{suffix}"), |_| Ok(g.gap_upper))?;
                }
                Err(Error::OutOfValidity(msg)) => eprintln!("warning: skipping gap: {msg}"),
                Err(e) => return Err(e.into()),
            },
            MetricKind::Region => {
                for (i, &snr) in snrs.iter().enumerate() {
                    let c = cfg.with_snr(snr);
                    table.push_region(&format!("cap{suffix}"), i, &region_capacity(&c)?);
                    table.push_region(&format!("cdd{suffix}"), i, &region_cdd(&c)?);
                }
            }
        }
    }
    Ok(())
}

/// Runs the experiment on the current rayon pool. Rows are ordered by
/// system, then SNR, then metric.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>, CliError> {
    spec.validate()?;
    let grid = spec.snr_grid();
    let table = || Table::new(grid.points(), spec.trials(), spec.seed());
    use MetricKind::*;
    match spec.scenario {
        Scenario::Custom => {
            let dims = Dims { users: spec.users, n_t: spec.tx_antennas, n_r: spec.rx_antennas };
            let mut t = table();
            tabulate(&mut t, &dims, spec, &spec.metrics, "")?;
            Ok(t.into_rows())
        }
        Scenario::Figure2 => {
            let mut rows = Vec::new();
            for n_r in [1, 2] {
                let mut t = table();
                let dims = Dims { users: 1, n_t: 4, n_r };
                tabulate(&mut t, &dims, spec, &[CapMc, CddMc, GapMc, RcLb], &format!("_nr{n_r}"))?;
                rows.extend(t.into_rows());
            }
            Ok(rows)
        }
        Scenario::Figure3 => {
            let mut t = table();
            tabulate(&mut t, &Dims { users: 2, n_t: 2, n_r: 2 }, spec, &[Region], "")?;
            Ok(t.into_rows())
        }
        Scenario::Figure4 => {
            let mut t = table();
            let metrics = [CapMc, CapLb, RcUb, CddMc, RcLb, GapMc, Gap];
            tabulate(&mut t, &Dims { users: 6, n_t: 3, n_r: 3 }, spec, &metrics, "")?;
            Ok(t.into_rows())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SnrGrid;

    fn spec(scenario: Scenario, metrics: Vec<MetricKind>) -> ExperimentSpec {
        ExperimentSpec {
            scenario,
            metrics,
            snr_db: Some("0,10".parse::<SnrGrid>().unwrap()),
            trials: Some(200),
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn closed_form_rows_have_no_trials() {
        let rows = run_experiment(&spec(Scenario::Custom, vec![MetricKind::RcLb, MetricKind::CddMc])).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].metric, "rc_lb");
        assert_eq!((rows[0].trials, rows[0].stderr), (0, 0.0));
        assert_eq!(rows[1].metric, "cdd_mc");
        assert_eq!(rows[1].trials, 200);
        assert!(rows[1].stderr > 0.0);
        assert_eq!(rows[2].snr_db, 10.0);
    }

    #[test]
    fn gap_outside_validity_is_skipped() {
        let mut s = spec(Scenario::Custom, vec![MetricKind::Gap, MetricKind::RcUb]);
        s.rx_antennas = 2;
        let rows = run_experiment(&s).unwrap();
        assert!(rows.iter().all(|r| r.metric == "rc_ub"));
        s.rx_antennas = 1;
        let rows = run_experiment(&s).unwrap();
        assert_eq!(rows.iter().filter(|r| r.metric.starts_with("gap")).count(), 4);
    }

    #[test]
    fn recipe_metric_names() {
        let rows = run_experiment(&spec(Scenario::Figure2, vec![])).unwrap();
        for name in ["cap_mc_nr1", "cdd_mc_nr2", "rc_lb_nr1", "gap_mc_nr2"] {
            assert_eq!(rows.iter().filter(|r| r.metric == name).count(), 2, "{name}");
        }
        let rows = run_experiment(&spec(Scenario::Figure3, vec![])).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 7);
        assert!(rows.iter().any(|r| r.metric == "cdd_corner_b_r2"));
    }
}
