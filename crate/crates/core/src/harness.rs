//! Seeded Monte Carlo experiments and their reduction into curve tables.
//!
//! Every trial of a grid point draws its own topology, shadowing, fading and
//! CSI error from streams keyed by `(base_seed, scenario, macros, microcells,
//! trial)`. All strategies and all SNR values of a grid point are evaluated on
//! the same draws.

use rayon::prelude::*;
use serde::Serialize;

use crate::beamforming::{build_beamformers, CoordinationStrategy};
use crate::channel::{corrupt_csi, draw_channels, ReceivedPowerModel};
use crate::config::{db_to_linear, dbm_to_mw, linear_to_db, NetworkConfig, NoiseReference, Placement, Scenario};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_users, CellLayout, MetricsReport, UserTerms};
use crate::seed::stream;
use crate::topology::{build_topology, CellKind, Topology};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub strategies: Vec<CoordinationStrategy>,
    pub snr_grid_db: Vec<f64>,
    pub microcell_counts: Vec<usize>,
    pub macro_counts: Vec<usize>,
    pub rho: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub fixed_topology: bool,
    /// Physical parameters; the counts and placement are overridden per grid point.
    pub network: NetworkConfig,
}

impl ExperimentSpec {
    /// Fill unspecified grids with the scenario defaults.
    pub fn from_config(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let scenario = config.scenario;
        let snr_grid_db = config.snr_db.clone().unwrap_or_else(|| match scenario {
            Scenario::RateVsSnr => (-10..=40).step_by(5).map(f64::from).collect(),
            _ => vec![10.0],
        });
        let microcell_counts = config.microcell_counts.clone().unwrap_or_else(|| match scenario {
            Scenario::RateVsSnr => vec![config.num_microcells],
            _ => (1..=10).collect(),
        });
        let macro_counts = config.macro_counts.clone().unwrap_or_else(|| match scenario {
            Scenario::EdgeMultiMacro => vec![1, 3],
            _ => vec![config.num_macrocells],
        });
        let spec = ExperimentSpec {
            scenario,
            strategies: config.strategies.clone(),
            snr_grid_db,
            microcell_counts,
            macro_counts,
            rho: config.rho,
            trials: config.trials,
            base_seed: config.seed,
            fixed_topology: config.fixed_topology,
            network: config.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "must not be empty"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_db", "must not be empty"));
        }
        if self.microcell_counts.is_empty() {
            return Err(Error::config("microcell_counts", "must not be empty"));
        }
        if self.macro_counts.is_empty() || self.macro_counts.iter().any(|m| !matches!(m, 1 | 3)) {
            return Err(Error::config("macro_counts", "entries must be 1 or 3"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config("rho", format!("must lie in range [0,1], got {}", self.rho)));
        }
        Ok(())
    }

    fn imperfect(&self) -> bool {
        self.rho < 1.0
    }

    /// Network config for one (macros, microcells) grid point.
    pub fn network_at(&self, macros: usize, microcells: usize) -> NetworkConfig {
        let mut cfg = self.network.clone();
        cfg.num_macrocells = macros;
        cfg.num_microcells = microcells;
        if self.scenario == Scenario::EdgeMultiMacro {
            cfg.placement = Placement::EdgeAnnulus;
        }
        cfg
    }
}

/// Receiver noise variance in mW for a swept SNR.
pub fn noise_variance(config: &NetworkConfig, snr_db: f64) -> f64 {
    let reference = match config.noise_reference {
        NoiseReference::Transmit => dbm_to_mw(config.macro_erp_dbm),
        NoiseReference::MacroCellEdge => {
            dbm_to_mw(config.macro_erp_dbm)
                * (config.reference_distance_m / config.macro_radius_m).powf(config.pathloss_exponent_uma)
        }
    };
    reference / db_to_linear(snr_db)
}

/// Per-trial outputs of one (macros, microcells) grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResults {
    pub layout: CellLayout,
    /// `terms[trial][snr][strategy][user]`.
    pub terms: Vec<Vec<Vec<Vec<UserTerms>>>>,
}

impl PointResults {
    pub fn report(&self, snr_idx: usize, strategy_idx: usize) -> MetricsReport {
        let trials: Vec<Vec<UserTerms>> = self
            .terms
            .iter()
            .map(|t| t[snr_idx][strategy_idx].clone())
            .collect();
        MetricsReport::from_trials(&self.layout, &trials)
    }
}

fn seed_parts(spec: &ExperimentSpec, macros: usize, microcells: usize) -> [u64; 4] {
    [spec.base_seed, spec.scenario.tag(), macros as u64, microcells as u64]
}

fn with_context(err: Error, context: String) -> Error {
    match err {
        Error::PlacementInfeasible {
            requested,
            placed,
            attempts,
            ..
        } => Error::PlacementInfeasible {
            requested,
            placed,
            attempts,
            context,
        },
        e => e,
    }
}

fn run_trial(
    spec: &ExperimentSpec,
    cfg: &NetworkConfig,
    fixed: Option<&Topology>,
    trial: usize,
) -> Result<(CellLayout, Vec<Vec<Vec<UserTerms>>>)> {
    let [base, scen, macros, micros] = seed_parts(spec, cfg.num_macrocells, cfg.num_microcells);
    let key = [base, scen, macros, micros, trial as u64];
    let mut topology = match fixed {
        Some(t) => t.clone(),
        None => build_topology(cfg, 1.0, &mut stream("topology", &key)).map_err(|e| {
            with_context(
                e,
                format!(" (grid point macros={macros}, microcells={micros}, trial {trial})"),
            )
        })?,
    };
    let model = ReceivedPowerModel::from_config(cfg);
    let channels = draw_channels(&topology, &model, &mut stream("channels", &key))?;
    let channels = if spec.imperfect() {
        corrupt_csi(&channels, spec.rho, &mut stream("csi", &key))?
    } else {
        channels
    };

    let mut per_snr = Vec::with_capacity(spec.snr_grid_db.len());
    for &snr in &spec.snr_grid_db {
        topology.set_noise_variance(noise_variance(cfg, snr));
        let mut per_strategy = Vec::with_capacity(spec.strategies.len());
        for &strategy in &spec.strategies {
            let set = build_beamformers(strategy, &channels, &topology, spec.imperfect())?;
            per_strategy.push(evaluate_users(&topology, &set, &channels));
        }
        per_snr.push(per_strategy);
    }
    Ok((CellLayout::of(&topology), per_snr))
}

/// Run every trial of one (macros, microcells) grid point.
pub fn simulate_point(spec: &ExperimentSpec, macros: usize, microcells: usize) -> Result<PointResults> {
    let cfg = spec.network_at(macros, microcells);
    let fixed = if spec.fixed_topology {
        let key = seed_parts(spec, macros, microcells);
        Some(build_topology(&cfg, 1.0, &mut stream("fixed-topology", &key)).map_err(|e| {
            with_context(e, format!(" (grid point macros={macros}, microcells={microcells})"))
        })?)
    } else {
        None
    };

    let outcomes = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, &cfg, fixed.as_ref(), t))
        .collect::<Result<Vec<_>>>()?;
    let layout = outcomes[0].0.clone();
    Ok(PointResults {
        layout,
        terms: outcomes.into_iter().map(|(_, terms)| terms).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentiles {
    pub p10: f64,
    pub mean: f64,
    pub p90: f64,
}

/// Nearest-rank 10th/90th percentiles and the arithmetic mean.
pub fn summarize_percentiles(values: &[f64]) -> Result<Percentiles> {
    const MIN: usize = 10;
    if values.len() < MIN {
        return Err(Error::InsufficientData {
            needed: MIN,
            got: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = |p: f64| -> f64 {
        let r = (p / 100.0 * sorted.len() as f64).ceil() as usize;
        sorted[r.clamp(1, sorted.len()) - 1]
    };
    Ok(Percentiles {
        p10: rank(10.0),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        p90: rank(90.0),
    })
}

/// Mean and standard error (`sample std / sqrt(n)`, zero for one sample).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CurveRow {
    pub scenario: String,
    pub strategy: String,
    pub x_name: String,
    pub x_value: f64,
    pub metric: String,
    pub value: f64,
    /// `NaN` where no standard error is estimated (approximations, percentiles).
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: CurveTable) {
        self.rows.extend(other.rows);
    }

    /// Rows matching a metric and strategy, in table order.
    pub fn select<'a>(&'a self, metric: &'a str, strategy: &'a str) -> impl Iterator<Item = &'a CurveRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.metric == metric && r.strategy == strategy)
    }

    /// The single row matching metric, strategy and x value.
    pub fn value(&self, metric: &str, strategy: &str, x_value: f64) -> Option<&CurveRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.strategy == strategy && r.x_value == x_value)
    }
}

/// Metric names emitted for every (strategy, grid point).
pub mod metric {
    pub const MACRO_CELL_RATE: &str = "macro_cell_rate";
    pub const MICRO_CELL_RATE: &str = "micro_cell_rate";
    pub const MACRO_CELL_RATE_APPROX: &str = "macro_cell_rate_approx";
    pub const MICRO_CELL_RATE_APPROX: &str = "micro_cell_rate_approx";
    pub const NETWORK_RATE: &str = "network_rate";
    pub const MICRO_NETWORK_RATE: &str = "micro_network_rate";
    pub const MICRO_NETWORK_RATE_P10: &str = "micro_network_rate_p10";
    pub const MICRO_NETWORK_RATE_P90: &str = "micro_network_rate_p90";
    pub const USER_SINR_DB: &str = "mean_user_sinr_db";
    pub const USER_SINR_APPROX_DB: &str = "mean_user_sinr_approx_db";
    pub const MACRO_USER_SINR_DB: &str = "macro_user_sinr_db";
    pub const MACRO_USER_SINR_APPROX_DB: &str = "macro_user_sinr_approx_db";
    pub const MICRO_USER_SINR_DB: &str = "micro_user_sinr_db";
    pub const MICRO_USER_SINR_APPROX_DB: &str = "micro_user_sinr_approx_db";
}

struct RowSink<'a> {
    table: &'a mut CurveTable,
    scenario: String,
    strategy: String,
    x_name: &'static str,
    x_value: f64,
    trials: usize,
    seed: u64,
}

impl RowSink<'_> {
    fn push(&mut self, metric: &str, value: f64, stderr: f64) {
        self.table.rows.push(CurveRow {
            scenario: self.scenario.clone(),
            strategy: self.strategy.clone(),
            x_name: self.x_name.to_string(),
            x_value: self.x_value,
            metric: metric.to_string(),
            value,
            stderr,
            trials: self.trials,
            seed: self.seed,
        });
    }
}

fn class_mean_per_trial(report: &MetricsReport, cells: &[usize]) -> Vec<f64> {
    report
        .cell_rate_trials
        .iter()
        .map(|r| cells.iter().map(|&n| r[n]).sum::<f64>() / cells.len() as f64)
        .collect()
}

fn approx_cell_rate(report: &MetricsReport, layout: &CellLayout, cells: &[usize]) -> f64 {
    cells
        .iter()
        .map(|&n| {
            layout.users[n]
                .clone()
                .map(|k| (1.0 + report.sinr_approx[k]).log2())
                .sum::<f64>()
        })
        .sum::<f64>()
        / cells.len() as f64
}

/// Mean SINR (dB) over a user set, with a delta-method stderr from the
/// per-trial user averages.
fn sinr_db_rows(
    sink: &mut RowSink<'_>,
    point: &PointResults,
    snr_idx: usize,
    strategy_idx: usize,
    report: &MetricsReport,
    users: &[usize],
    sim_metric: &str,
    approx_metric: &str,
) {
    if users.is_empty() {
        return;
    }
    let per_trial: Vec<f64> = point
        .terms
        .iter()
        .map(|t| {
            let terms = &t[snr_idx][strategy_idx];
            users.iter().map(|&k| terms[k].sinr()).sum::<f64>() / users.len() as f64
        })
        .collect();
    let (mean, se) = mean_and_stderr(&per_trial);
    let approx = users.iter().map(|&k| report.sinr_approx[k]).sum::<f64>() / users.len() as f64;
    sink.push(sim_metric, linear_to_db(mean), 10.0 / std::f64::consts::LN_10 * se / mean);
    sink.push(approx_metric, linear_to_db(approx), f64::NAN);
}

fn scenario_key(spec: &ExperimentSpec, macros: usize, fixed: &str) -> String {
    format!("{}[macros={macros};{fixed};rho={}]", spec.scenario, spec.rho)
}

/// Run all grid points and strategies of an experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<CurveTable> {
    use metric::*;
    spec.validate()?;
    let mut table = CurveTable::default();

    for &macros in &spec.macro_counts {
        for &micros in &spec.microcell_counts {
            let point = simulate_point(spec, macros, micros)?;
            let layout = &point.layout;
            let macro_cells = layout.cells_of(CellKind::Macro);
            let micro_cells = layout.cells_of(CellKind::Micro);
            let users_in = |cells: &[usize]| -> Vec<usize> {
                cells.iter().flat_map(|&n| layout.users[n].clone()).collect()
            };
            let (macro_users, micro_users) = (users_in(&macro_cells), users_in(&micro_cells));
            let all_users: Vec<usize> = (0..layout.num_users()).collect();

            for (si, &snr) in spec.snr_grid_db.iter().enumerate() {
                let (scenario, x_name, x_value) = match spec.scenario {
                    Scenario::RateVsSnr => (
                        scenario_key(spec, macros, &format!("microcells={micros}")),
                        "snr_db",
                        snr,
                    ),
                    _ => (
                        scenario_key(spec, macros, &format!("snr_db={snr}")),
                        "microcells",
                        micros as f64,
                    ),
                };
                for (gi, strategy) in spec.strategies.iter().enumerate() {
                    let report = point.report(si, gi);
                    let mut sink = RowSink {
                        table: &mut table,
                        scenario: scenario.clone(),
                        strategy: strategy.name().to_string(),
                        x_name,
                        x_value,
                        trials: spec.trials,
                        seed: spec.base_seed,
                    };

                    let (m, se) = mean_and_stderr(&class_mean_per_trial(&report, &macro_cells));
                    sink.push(MACRO_CELL_RATE, m, se);
                    sink.push(
                        MACRO_CELL_RATE_APPROX,
                        approx_cell_rate(&report, layout, &macro_cells),
                        f64::NAN,
                    );
                    if !micro_cells.is_empty() {
                        let (m, se) = mean_and_stderr(&class_mean_per_trial(&report, &micro_cells));
                        sink.push(MICRO_CELL_RATE, m, se);
                        sink.push(
                            MICRO_CELL_RATE_APPROX,
                            approx_cell_rate(&report, layout, &micro_cells),
                            f64::NAN,
                        );
                    }

                    let network: Vec<f64> = report.cell_rate_trials.iter().map(|r| r.iter().sum()).collect();
                    let (m, se) = mean_and_stderr(&network);
                    sink.push(NETWORK_RATE, m, se);

                    if !micro_cells.is_empty() {
                        let micro_net: Vec<f64> = report
                            .cell_rate_trials
                            .iter()
                            .map(|r| micro_cells.iter().map(|&n| r[n]).sum())
                            .collect();
                        let (m, se) = mean_and_stderr(&micro_net);
                        sink.push(MICRO_NETWORK_RATE, m, se);
                        if let Ok(p) = summarize_percentiles(&micro_net) {
                            sink.push(MICRO_NETWORK_RATE_P10, p.p10, f64::NAN);
                            sink.push(MICRO_NETWORK_RATE_P90, p.p90, f64::NAN);
                        }
                    }

                    sinr_db_rows(&mut sink, &point, si, gi, &report, &all_users, USER_SINR_DB, USER_SINR_APPROX_DB);
                    sinr_db_rows(
                        &mut sink,
                        &point,
                        si,
                        gi,
                        &report,
                        &macro_users,
                        MACRO_USER_SINR_DB,
                        MACRO_USER_SINR_APPROX_DB,
                    );
                    sinr_db_rows(
                        &mut sink,
                        &point,
                        si,
                        gi,
                        &report,
                        &micro_users,
                        MICRO_USER_SINR_DB,
                        MICRO_USER_SINR_APPROX_DB,
                    );
                }
            }
        }
    }
    Ok(table)
}
