//! Experiment description: flat `key = value` files merged with
//! command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// Canned experiment layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Dimensions and metrics taken from the spec fields.
    Custom,
    /// Single user, n_T = 4, n_R ∈ {1, 2}: capacity, CDD rate, lower bound.
    Figure2,
    /// Two users, n_T = n_R = 2: capacity and CDD rate regions.
    Figure3,
    /// Six users, n_T = n_R = 3: capacity, bounds and CDD rate.
    Figure4,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "custom" => Ok(Self::Custom),
            "figure2" => Ok(Self::Figure2),
            "figure3" => Ok(Self::Figure3),
            "figure4" => Ok(Self::Figure4),
            other => Err(format!("unknown scenario `{other}` (custom, figure2, figure3, figure4)")),
        }
    }
}

impl Scenario {
    pub fn default_grid(self) -> SnrGrid {
        match self {
            Self::Figure3 => SnrGrid { points: vec![0.0, 20.0, 40.0] },
            _ => SnrGrid::range(0.0, 40.0, 5.0).expect("valid default grid"),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Custom => "custom",
            Self::Figure2 => "figure2",
            Self::Figure3 => "figure3",
            Self::Figure4 => "figure4",
        })
    }
}

/// Quantities a custom experiment can tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    CddMc,
    CapMc,
    RcLb,
    RcLbJensen,
    RcUb,
    CapLb,
    CapLbJensen,
    Gap,
    GapMc,
    Region,
}

impl MetricKind {
    pub const ALL: [MetricKind; 10] = [
        Self::CddMc,
        Self::CapMc,
        Self::RcLb,
        Self::RcLbJensen,
        Self::RcUb,
        Self::CapLb,
        Self::CapLbJensen,
        Self::Gap,
        Self::GapMc,
        Self::Region,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::CddMc => "cdd_mc",
            Self::CapMc => "cap_mc",
            Self::RcLb => "rc_lb",
            Self::RcLbJensen => "rc_lb_jensen",
            Self::RcUb => "rc_ub",
            Self::CapLb => "cap_lb",
            Self::CapLbJensen => "cap_lb_jensen",
            Self::Gap => "gap",
            Self::GapMc => "gap_mc",
            Self::Region => "region",
        }
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// Inclusive dB grid `start, start + step, …, ≤ stop`, or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    points: Vec<f64>,
}

impl SnrGrid {
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self, String> {
        if !step.is_finite() || step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(format!("empty grid {start}..{stop}"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // Rounded to 1e-9 dB so 0.1-steps print cleanly.
        let points = (0..n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl FromStr for SnrGrid {
    type Err = String;

    /// `start:stop:step`, a comma list `0,20,40`, or one value.
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}`"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => Self::range(num(a)?, num(b)?, num(c)?),
            [single] => {
                let points = single.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                if points.iter().any(|p| !p.is_finite()) {
                    return Err("non-finite SNR".into());
                }
                Ok(Self { points })
            }
            _ => Err(format!("expected start:stop:step or a list, got `{s}`")),
        }
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub users: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    /// Falls back to the scenario's grid.
    pub snr_db: Option<SnrGrid>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub metrics: Vec<MetricKind>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub plot_script: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: Scenario::Custom,
            users: 1,
            tx_antennas: 2,
            rx_antennas: 1,
            snr_db: None,
            trials: None,
            seed: None,
            metrics: vec![MetricKind::CddMc, MetricKind::CapMc],
            out: PathBuf::from("results.csv"),
            workers: None,
            plot_script: None,
        }
    }
}

/// Keys understood in config files and as `--flag` overrides.
pub const KEYS: [&str; 11] = [
    "scenario",
    "users",
    "tx_antennas",
    "rx_antennas",
    "snr_db",
    "trials",
    "seed",
    "metrics",
    "out",
    "workers",
    "plot_script",
];

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Dashes in keys are read as underscores.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage("config", format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(&key, format!("line {}: unknown key", lineno + 1)));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_field<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| CliError::usage(key, format!("`{value}`: {e}")))
}

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

impl ExperimentSpec {
    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn snr_grid(&self) -> SnrGrid {
        self.snr_db.clone().unwrap_or_else(|| self.scenario.default_grid())
    }

    /// Applies pairs in order, later ones overriding earlier ones.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (key, value) in pairs {
            match key.as_str() {
                "scenario" => self.scenario = parse_field(key, value)?,
                "users" => self.users = parse_field(key, value)?,
                "tx_antennas" => self.tx_antennas = parse_field(key, value)?,
                "rx_antennas" => self.rx_antennas = parse_field(key, value)?,
                "snr_db" => self.snr_db = Some(parse_field(key, value)?),
                "trials" => self.trials = Some(parse_field(key, value)?),
                "seed" => self.seed = Some(parse_field(key, value)?),
                "metrics" => {
                    self.metrics = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_field(key, s))
                        .collect::<Result<_, _>>()?
                }
                "out" => self.out = PathBuf::from(value),
                "workers" => self.workers = Some(parse_field(key, value)?),
                "plot_script" => self.plot_script = Some(PathBuf::from(value)),
                other => return Err(CliError::usage(other, "unknown key".into())),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("users", self.users),
            ("tx_antennas", self.tx_antennas),
            ("rx_antennas", self.rx_antennas),
        ] {
            if v == 0 {
                return Err(CliError::usage(name, "must be at least 1".into()));
            }
        }
        if self.trials() < 2 {
            return Err(CliError::usage("trials", "must be at least 2".into()));
        }
        if self.snr_grid().points().is_empty() {
            return Err(CliError::usage("snr_db", "grid is empty".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::usage("workers", "must be at least 1".into()));
        }
        if self.scenario == Scenario::Custom {
            if self.metrics.is_empty() {
                return Err(CliError::usage("metrics", "at least one metric is required".into()));
            }
            if self.metrics.contains(&MetricKind::Region) && self.users != 2 {
                return Err(CliError::usage("metrics", "region needs users = 2".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: SnrGrid = "0:40:10".parse().unwrap();
        assert_eq!(g.points(), &[0.0, 10.0, 20.0, 30.0, 40.0]);
        let g: SnrGrid = "0:0.3:0.1".parse().unwrap();
        assert_eq!(g.points(), &[0.0, 0.1, 0.2, 0.3]);
        let g: SnrGrid = "0, 20,40".parse().unwrap();
        assert_eq!(g.points(), &[0.0, 20.0, 40.0]);
        assert!("0:10:0".parse::<SnrGrid>().is_err());
        assert!("10:0:1".parse::<SnrGrid>().is_err());
        assert!("a:b".parse::<SnrGrid>().is_err());
    }

    #[test]
    fn config_text() {
        let text = "# sweep\nscenario = custom\nusers=3 # inline\n\ntx-antennas = 2\nmetrics = cdd_mc, rc_lb\n";
        let pairs = parse_pairs(text).unwrap();
        let mut spec = ExperimentSpec::default();
        spec.apply(&pairs).unwrap();
        assert_eq!(spec.users, 3);
        assert_eq!(spec.tx_antennas, 2);
        assert_eq!(spec.metrics, vec![MetricKind::CddMc, MetricKind::RcLb]);
        spec.validate().unwrap();
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_pairs("colour = blue").unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = parse_pairs("just text").unwrap_err();
        assert!(err.to_string().contains("config"));

        let mut spec = ExperimentSpec::default();
        assert_eq!(spec.trials(), DEFAULT_TRIALS);
        let err = spec.apply(&[("trials".into(), "many".into())]).unwrap_err();
        assert!(err.to_string().contains("trials"));
        let err = spec.apply(&[("metrics".into(), "cdd_mc,bogus".into())]).unwrap_err();
        assert!(err.to_string().contains("bogus"));

        let err = spec.apply(&[("trials".into(), "1".into())]).and_then(|_| spec.validate()).unwrap_err();
        assert!(err.to_string().contains("trials"));

        let spec = ExperimentSpec { users: 0, ..ExperimentSpec::default() };
        assert!(spec.validate().unwrap_err().to_string().contains("users"));
        let spec = ExperimentSpec { metrics: vec![MetricKind::Region], ..ExperimentSpec::default() };
        assert!(spec.validate().unwrap_err().to_string().contains("metrics"));
    }
}
