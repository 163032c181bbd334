use hetnet::config::NetworkConfig;
use hetnet::harness::{metric, run_experiment};
use hetnet::io::{to_string, Format};
use hetnet::{CoordinationStrategy, ExperimentSpec, Scenario};

use CoordinationStrategy::{FullCoord, MacroOnlyCoord, NoCoord, NoInterTier};

fn spec(cfg: NetworkConfig) -> ExperimentSpec {
    ExperimentSpec::from_config(&cfg).unwrap()
}

#[test]
fn identical_specs_give_identical_tables() {
    let s = spec(NetworkConfig {
        scenario: Scenario::RateVsDensity,
        microcell_counts: Some(vec![1, 3]),
        trials: 40,
        ..NetworkConfig::default()
    });
    let emit = || to_string(&run_experiment(&s).unwrap(), Format::Csv).unwrap();
    assert_eq!(emit(), emit());
}

#[test]
fn microcell_strategy_ordering_at_10_db() {
    let t = run_experiment(&spec(NetworkConfig {
        snr_db: Some(vec![10.0]),
        trials: 5000,
        ..NetworkConfig::default()
    }))
    .unwrap();
    let get = |s: CoordinationStrategy| t.value(metric::MICRO_CELL_RATE, s.name(), 10.0).unwrap();
    let chain = [NoInterTier, FullCoord, MacroOnlyCoord, NoCoord];
    for pair in chain.windows(2) {
        let (hi, lo) = (get(pair[0]), get(pair[1]));
        assert!(
            hi.value - lo.value >= -hi.stderr.max(lo.stderr),
            "{} {:.4} (se {:.4}) below {} {:.4} (se {:.4})",
            pair[0],
            hi.value,
            hi.stderr,
            pair[1],
            lo.value,
            lo.stderr
        );
    }
}

#[test]
fn microcell_aggregate_percentiles_are_spread() {
    let t = run_experiment(&spec(NetworkConfig {
        scenario: Scenario::RateVsDensity,
        strategies: vec![FullCoord],
        microcell_counts: Some(vec![10]),
        trials: 500,
        ..NetworkConfig::default()
    }))
    .unwrap();
    let v = |m| t.value(m, FullCoord.name(), 10.0).unwrap().value;
    let (p10, mean, p90) = (
        v(metric::MICRO_NETWORK_RATE_P10),
        v(metric::MICRO_NETWORK_RATE),
        v(metric::MICRO_NETWORK_RATE_P90),
    );
    assert!(p10 < mean && mean < p90, "{p10} {mean} {p90}");
}

#[test]
fn density_sinr_declines_for_every_strategy() {
    let t = run_experiment(&spec(NetworkConfig {
        scenario: Scenario::SinrVsDensity,
        strategies: vec![NoCoord, FullCoord, MacroOnlyCoord],
        microcell_counts: Some(vec![1, 10]),
        trials: 2000,
        ..NetworkConfig::default()
    }))
    .unwrap();
    for s in [NoCoord, FullCoord, MacroOnlyCoord] {
        let at = |n: f64| t.value(metric::USER_SINR_DB, s.name(), n).unwrap().value;
        assert!(at(10.0) < at(1.0), "{s}: {} dB at 1, {} dB at 10", at(1.0), at(10.0));
    }
}
