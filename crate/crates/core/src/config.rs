//! Scenario configuration.
//!
//! A config document is a flat list of `key: value` (or `key = value`) lines.
//! `#` starts a comment. List values are written `[a, b, c]` or `a, b, c`.
//! Missing keys take the two-tier defaults below; unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::beamforming::CoordinationStrategy;
use crate::error::{Error, Result};

/// Where microcell centers may be dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Anywhere inside the macrocell disc.
    Anywhere,
    /// Inside the annulus `edge_inner_radius_m < r < macro_radius_m`.
    EdgeAnnulus,
}

/// What the swept SNR is measured against when deriving the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseReference {
    /// `sigma^2 = P_t,macro / snr`: SNR is transmit ERP over noise.
    Transmit,
    /// `sigma^2 = P_t,macro * (d_0 / d_M)^Gamma_UMa / snr`: SNR is the
    /// shadowing-free received SNR of the whole macro ERP at the cell edge.
    MacroCellEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RateVsSnr,
    SinrVsDensity,
    RateVsDensity,
    EdgeMultiMacro,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::RateVsSnr,
        Scenario::SinrVsDensity,
        Scenario::RateVsDensity,
        Scenario::EdgeMultiMacro,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::RateVsSnr => "rate_vs_snr",
            Scenario::SinrVsDensity => "sinr_vs_density",
            Scenario::RateVsDensity => "rate_vs_density",
            Scenario::EdgeMultiMacro => "edge_multi_macro",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64
    }

    pub fn is_density(self) -> bool {
        !matches!(self, Scenario::RateVsSnr)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                format!("unknown scenario `{s}` (expected rate_vs_snr, sinr_vs_density, rate_vs_density or edge_multi_macro)")
            })
    }
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "anywhere" => Ok(Placement::Anywhere),
            "edge_annulus" | "edge" => Ok(Placement::EdgeAnnulus),
            _ => Err(format!("unknown placement `{s}` (expected anywhere or edge_annulus)")),
        }
    }
}

impl FromStr for NoiseReference {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "transmit" => Ok(NoiseReference::Transmit),
            "macro_cell_edge" => Ok(NoiseReference::MacroCellEdge),
            _ => Err(format!("unknown noise reference `{s}` (expected transmit or macro_cell_edge)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkConfig {
    pub macro_antennas: usize,
    pub micro_antennas: usize,
    pub macro_erp_dbm: f64,
    pub micro_erp_dbm: f64,
    pub macro_users: usize,
    pub micro_users: usize,
    pub macro_radius_m: f64,
    pub micro_radius_m: f64,
    pub pathloss_exponent_uma: f64,
    pub pathloss_exponent_umi: f64,
    pub shadow_sigma_db: f64,
    pub decorrelation_distance_m: f64,
    pub reference_distance_m: f64,
    pub edge_inner_radius_m: f64,
    pub inter_site_distance_m: f64,
    pub num_macrocells: usize,
    pub num_microcells: usize,
    pub placement: Placement,
    pub placement_attempts: usize,
    pub noise_reference: NoiseReference,

    pub scenario: Scenario,
    pub strategies: Vec<CoordinationStrategy>,
    /// `None` means the scenario's default grid.
    pub snr_db: Option<Vec<f64>>,
    pub microcell_counts: Option<Vec<usize>>,
    pub macro_counts: Option<Vec<usize>>,
    pub rho: f64,
    pub trials: usize,
    pub seed: u64,
    /// Draw one topology per grid point and reuse it for every trial.
    pub fixed_topology: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            macro_antennas: 4,
            micro_antennas: 2,
            macro_erp_dbm: 46.0,
            micro_erp_dbm: 30.0,
            macro_users: 6,
            micro_users: 4,
            macro_radius_m: 1000.0,
            micro_radius_m: 70.0,
            pathloss_exponent_uma: 4.0,
            pathloss_exponent_umi: 3.5,
            shadow_sigma_db: 8.0,
            decorrelation_distance_m: 10.0,
            reference_distance_m: 1.0,
            edge_inner_radius_m: 877.0,
            inter_site_distance_m: 1000.0,
            num_macrocells: 1,
            num_microcells: 2,
            placement: Placement::Anywhere,
            placement_attempts: 10_000,
            noise_reference: NoiseReference::MacroCellEdge,
            scenario: Scenario::RateVsSnr,
            strategies: CoordinationStrategy::ALL.to_vec(),
            snr_db: None,
            microcell_counts: None,
            macro_counts: None,
            rho: 1.0,
            trials: 10_000,
            seed: 1,
            fixed_topology: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "macro_antennas",
    "micro_antennas",
    "macro_erp_dbm",
    "micro_erp_dbm",
    "macro_users",
    "micro_users",
    "macro_radius_m",
    "micro_radius_m",
    "pathloss_exponent_uma",
    "pathloss_exponent_umi",
    "shadow_sigma_db",
    "decorrelation_distance_m",
    "reference_distance_m",
    "edge_inner_radius_m",
    "inter_site_distance_m",
    "num_macrocells",
    "num_microcells",
    "placement",
    "placement_attempts",
    "noise_reference",
    "scenario",
    "strategies",
    "snr_db",
    "microcell_counts",
    "macro_counts",
    "rho",
    "trials",
    "seed",
    "fixed_topology",
];

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl NetworkConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse a config document and validate it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = NetworkConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let split = line
                .find([':', '='])
                .ok_or_else(|| Error::config(line, format!("line {}: expected `key: value`", lineno + 1)))?;
            let key = line[..split].trim();
            let value = line[split + 1..].trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, "key given more than once"));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key from its textual value. Does not validate.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = unquote(value);
        match key {
            "macro_antennas" => self.macro_antennas = scalar(key, value)?,
            "micro_antennas" => self.micro_antennas = scalar(key, value)?,
            "macro_erp_dbm" => self.macro_erp_dbm = scalar(key, value)?,
            "micro_erp_dbm" => self.micro_erp_dbm = scalar(key, value)?,
            "macro_users" => self.macro_users = scalar(key, value)?,
            "micro_users" => self.micro_users = scalar(key, value)?,
            "macro_radius_m" => self.macro_radius_m = scalar(key, value)?,
            "micro_radius_m" => self.micro_radius_m = scalar(key, value)?,
            "pathloss_exponent_uma" => self.pathloss_exponent_uma = scalar(key, value)?,
            "pathloss_exponent_umi" => self.pathloss_exponent_umi = scalar(key, value)?,
            "shadow_sigma_db" => self.shadow_sigma_db = scalar(key, value)?,
            "decorrelation_distance_m" => self.decorrelation_distance_m = scalar(key, value)?,
            "reference_distance_m" => self.reference_distance_m = scalar(key, value)?,
            "edge_inner_radius_m" => self.edge_inner_radius_m = scalar(key, value)?,
            "inter_site_distance_m" => self.inter_site_distance_m = scalar(key, value)?,
            "num_macrocells" => self.num_macrocells = scalar(key, value)?,
            "num_microcells" => self.num_microcells = scalar(key, value)?,
            "placement" => self.placement = scalar(key, value)?,
            "placement_attempts" => self.placement_attempts = scalar(key, value)?,
            "noise_reference" => self.noise_reference = scalar(key, value)?,
            "scenario" => self.scenario = scalar(key, value)?,
            "strategies" => self.strategies = list(key, value)?,
            "snr_db" => self.snr_db = Some(list(key, value)?),
            "microcell_counts" => self.microcell_counts = Some(list(key, value)?),
            "macro_counts" => self.macro_counts = Some(list(key, value)?),
            "rho" => self.rho = scalar(key, value)?,
            "trials" => self.trials = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "fixed_topology" => self.fixed_topology = scalar(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be a positive number, got {v}")))
            }
        }
        fn at_least_one(key: &str, v: usize) -> Result<()> {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::config(key, "must be at least 1"))
            }
        }

        at_least_one("macro_antennas", self.macro_antennas)?;
        at_least_one("micro_antennas", self.micro_antennas)?;
        at_least_one("macro_users", self.macro_users)?;
        at_least_one("micro_users", self.micro_users)?;
        for (key, v) in [("macro_erp_dbm", self.macro_erp_dbm), ("micro_erp_dbm", self.micro_erp_dbm)] {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        positive("macro_radius_m", self.macro_radius_m)?;
        positive("micro_radius_m", self.micro_radius_m)?;
        positive("decorrelation_distance_m", self.decorrelation_distance_m)?;
        positive("reference_distance_m", self.reference_distance_m)?;
        positive("inter_site_distance_m", self.inter_site_distance_m)?;
        for (key, g) in [
            ("pathloss_exponent_uma", self.pathloss_exponent_uma),
            ("pathloss_exponent_umi", self.pathloss_exponent_umi),
        ] {
            if !(g.is_finite() && g > 2.0) {
                return Err(Error::config(key, format!("pathloss exponent must be > 2, got {g}")));
            }
        }
        if !(self.shadow_sigma_db.is_finite() && self.shadow_sigma_db >= 0.0) {
            return Err(Error::config("shadow_sigma_db", "must be >= 0"));
        }
        if self.micro_radius_m >= self.macro_radius_m {
            return Err(Error::config("micro_radius_m", "must be smaller than macro_radius_m"));
        }
        if self.reference_distance_m >= self.micro_radius_m {
            return Err(Error::config("reference_distance_m", "must be smaller than micro_radius_m"));
        }
        if !(self.edge_inner_radius_m >= 0.0 && self.edge_inner_radius_m < self.macro_radius_m) {
            return Err(Error::config("edge_inner_radius_m", "must lie in [0, macro_radius_m)"));
        }
        if !matches!(self.num_macrocells, 1 | 3) {
            return Err(Error::config("num_macrocells", "must be 1 or 3"));
        }
        at_least_one("placement_attempts", self.placement_attempts)?;
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config("rho", format!("must lie in range [0,1], got {}", self.rho)));
        }
        at_least_one("trials", self.trials)?;
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "must not be empty"));
        }
        if let Some(snr) = &self.snr_db {
            if snr.is_empty() {
                return Err(Error::config("snr_db", "must not be empty"));
            }
            if snr.iter().any(|s| !s.is_finite()) {
                return Err(Error::config("snr_db", "values must be finite"));
            }
        }
        if let Some(counts) = &self.microcell_counts {
            if counts.is_empty() {
                return Err(Error::config("microcell_counts", "must not be empty"));
            }
        }
        if let Some(macros) = &self.macro_counts {
            if macros.is_empty() || macros.iter().any(|m| !matches!(m, 1 | 3)) {
                return Err(Error::config("macro_counts", "entries must be 1 or 3"));
            }
        }
        Ok(())
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v)
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let inner = value
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(value);
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, unquote(s)))
        .collect()
}
