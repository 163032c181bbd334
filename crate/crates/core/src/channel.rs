//! Received powers, correlated log-normal shadowing, Rayleigh fading draws
//! and CSI corruption.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::{db_to_linear, dbm_to_mw, NetworkConfig};
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian_vector, CVector};
use crate::topology::{CellKind, Point, Topology};

pub const REFERENCE_DISTANCE_M: f64 = 1.0;
const CHOLESKY_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReceivedPowerModel {
    pub pathloss_exponent_uma: f64,
    pub pathloss_exponent_umi: f64,
    pub shadow_sigma_db: f64,
    pub decorrelation_distance_m: f64,
    pub reference_distance_m: f64,
}

impl Default for ReceivedPowerModel {
    fn default() -> Self {
        ReceivedPowerModel {
            pathloss_exponent_uma: 4.0,
            pathloss_exponent_umi: 3.5,
            shadow_sigma_db: 8.0,
            decorrelation_distance_m: 10.0,
            reference_distance_m: REFERENCE_DISTANCE_M,
        }
    }
}

impl ReceivedPowerModel {
    pub fn from_config(config: &NetworkConfig) -> Self {
        ReceivedPowerModel {
            pathloss_exponent_uma: config.pathloss_exponent_uma,
            pathloss_exponent_umi: config.pathloss_exponent_umi,
            shadow_sigma_db: config.shadow_sigma_db,
            decorrelation_distance_m: config.decorrelation_distance_m,
            reference_distance_m: config.reference_distance_m,
        }
    }

    pub fn exponent(&self, kind: CellKind) -> f64 {
        match kind {
            CellKind::Macro => self.pathloss_exponent_uma,
            CellKind::Micro => self.pathloss_exponent_umi,
        }
    }

    /// `(P_t / k) (d_0 / d)^gamma Phi`, with `erp_mw` already linear.
    pub fn power_linear(
        &self,
        erp_mw: f64,
        num_users: usize,
        distance_m: f64,
        gamma: f64,
        shadow_linear: f64,
    ) -> Result<f64> {
        if num_users == 0 {
            return Err(Error::Domain("received power needs at least one user".into()));
        }
        if !(distance_m >= self.reference_distance_m) {
            return Err(Error::Domain(format!(
                "distance {distance_m} m is below the reference distance {} m",
                self.reference_distance_m
            )));
        }
        Ok(erp_mw / num_users as f64 * (self.reference_distance_m / distance_m).powf(gamma) * shadow_linear)
    }
}

/// Per-user received power in mW with a 1 m reference distance.
pub fn received_power(
    erp_dbm: f64,
    num_users: usize,
    distance_m: f64,
    gamma: f64,
    shadow_linear: f64,
) -> Result<f64> {
    ReceivedPowerModel::default().power_linear(dbm_to_mw(erp_dbm), num_users, distance_m, gamma, shadow_linear)
}

/// Lower-triangular factor of the exponential correlation matrix
/// `exp(-|p_i - p_j| / decorr)` over a set of receiver positions.
///
/// Coincident positions share one factor row so their draws are identical.
#[derive(Debug, Clone)]
pub struct ShadowingField {
    factor: DMatrix<f64>,
    /// Position index -> row of `factor`.
    slot: Vec<usize>,
}

impl ShadowingField {
    pub fn new(positions: &[Point], decorrelation_m: f64) -> Result<Self> {
        if !(decorrelation_m > 0.0) {
            return Err(Error::Domain(format!(
                "decorrelation distance must be positive, got {decorrelation_m}"
            )));
        }
        let mut unique: Vec<Point> = Vec::new();
        let slot = positions
            .iter()
            .map(|p| match unique.iter().position(|q| q == p) {
                Some(i) => i,
                None => {
                    unique.push(*p);
                    unique.len() - 1
                }
            })
            .collect();
        let m = unique.len();
        let corr = DMatrix::from_fn(m, m, |i, j| (-unique[i].distance(unique[j]) / decorrelation_m).exp());
        let factor = match corr.clone().cholesky() {
            Some(c) => c.l(),
            None => {
                let jittered = corr + DMatrix::identity(m, m) * CHOLESKY_JITTER;
                jittered
                    .cholesky()
                    .ok_or_else(|| Error::Domain("shadowing covariance is not positive definite".into()))?
                    .l()
            }
        };
        Ok(ShadowingField { factor, slot })
    }

    /// Jointly Gaussian dB values, each marginally N(0, sigma_db^2).
    pub fn draw_db<R: Rng + ?Sized>(&self, sigma_db: f64, rng: &mut R) -> Vec<f64> {
        let m = self.factor.nrows();
        let z = nalgebra::DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &self.factor * z;
        self.slot.iter().map(|&i| sigma_db * x[i]).collect()
    }

    pub fn draw_linear<R: Rng + ?Sized>(&self, sigma_db: f64, rng: &mut R) -> Vec<f64> {
        self.draw_db(sigma_db, rng).into_iter().map(db_to_linear).collect()
    }
}

/// Linear shadowing factors `10^(X/10)` with Gudmundson-correlated `X`.
pub fn correlated_shadowing<R: Rng + ?Sized>(
    positions: &[Point],
    sigma_db: f64,
    decorrelation_m: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(ShadowingField::new(positions, decorrelation_m)?.draw_linear(sigma_db, rng))
}

/// One channel draw for every (BS, user) pair.
///
/// `h[n][k]` holds the `Z_n` entries of the row channel from BS `n` to user
/// `k`: the desired channel when `n` serves `k`, an interfering one otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Vec<CVector>>,
    pub power: Vec<Vec<f64>>,
    /// Channels as known at the transmitters; equal to `h` when `rho = 1`.
    pub h_hat: Vec<Vec<CVector>>,
    pub rho: f64,
}

impl ChannelRealization {
    /// Channels used for beamformer design.
    pub fn design(&self, imperfect: bool) -> &[Vec<CVector>] {
        if imperfect {
            &self.h_hat
        } else {
            &self.h
        }
    }
}

pub fn draw_channels<R: Rng + ?Sized>(
    topology: &Topology,
    model: &ReceivedPowerModel,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let positions: Vec<Point> = topology.users.iter().map(|u| u.position).collect();
    let field = if model.shadow_sigma_db > 0.0 {
        Some(ShadowingField::new(&positions, model.decorrelation_distance_m)?)
    } else {
        None
    };

    let mut power = Vec::with_capacity(topology.num_cells());
    for (n, site) in topology.sites.iter().enumerate() {
        let shadow = match &field {
            Some(f) => f.draw_linear(model.shadow_sigma_db, rng),
            None => vec![1.0; positions.len()],
        };
        let gamma = model.exponent(site.kind);
        let row = topology.distances[n]
            .iter()
            .zip(&shadow)
            .map(|(&d, &phi)| model.power_linear(site.erp_mw, site.num_users, d, gamma, phi))
            .collect::<Result<Vec<f64>>>()?;
        power.push(row);
    }

    let h: Vec<Vec<CVector>> = topology
        .sites
        .iter()
        .zip(&power)
        .map(|(site, row)| {
            row.iter()
                .map(|&p| complex_gaussian_vector(site.num_antennas, p, rng))
                .collect()
        })
        .collect();

    Ok(ChannelRealization {
        h_hat: h.clone(),
        h,
        power,
        rho: 1.0,
    })
}

/// `h_hat = rho h + sqrt(1 - rho^2) Xi` with `Xi ~ CN(0, P_{n,k})`, applied
/// to every link.
pub fn corrupt_csi<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    rho: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0,1], got {rho}")));
    }
    let mut out = realization.clone();
    out.rho = rho;
    if rho == 1.0 {
        out.h_hat = realization.h.clone();
        return Ok(out);
    }
    let mix = (1.0 - rho * rho).sqrt();
    for ((hat_row, h_row), p_row) in out.h_hat.iter_mut().zip(&realization.h).zip(&realization.power) {
        for ((hat, h), &p) in hat_row.iter_mut().zip(h_row).zip(p_row) {
            let xi = complex_gaussian_vector(h.len(), p, rng);
            *hat = h.scale(rho) + xi.scale(mix);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;
    use crate::topology::build_topology;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn received_power_hand_values() {
        let p = received_power(46.0, 6, 1000.0, 4.0, 1.0).unwrap();
        assert!(rel(p, 10f64.powf(4.6) / 6.0 * 1e-12) < 1e-12);
        assert!(rel(p, 6.635e-9) < 1e-3);

        let p = received_power(30.0, 4, 70.0, 3.5, 1.0).unwrap();
        assert!(rel(p, 1e3 / 4.0 * 70f64.powf(-3.5)) < 1e-12);
        assert!(rel(p, 8.7116e-5) < 1e-4);

        for erp in [0.0, 23.0, 46.0] {
            let p = received_power(erp, 1, 1.0, 3.7, 1.0).unwrap();
            assert_eq!(p, dbm_to_mw(erp));
        }
    }

    #[test]
    fn received_power_rejects_short_distance() {
        assert!(matches!(received_power(46.0, 6, 0.5, 4.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(received_power(46.0, 0, 10.0, 4.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn pathloss_monotone() {
        let mut prev = f64::INFINITY;
        for d in [1.5, 2.0, 10.0, 100.0, 999.0] {
            let p = received_power(46.0, 6, d, 4.0, 1.0).unwrap();
            assert!(p < prev);
            prev = p;
            let lower_gamma = received_power(46.0, 6, d, 3.5, 1.0).unwrap();
            assert!(p < lower_gamma);
        }
    }

    #[test]
    fn coincident_positions_share_factor() {
        let p = Point::new(12.0, -3.0);
        let mut rng = stream("shadow", &[0]);
        for _ in 0..100 {
            let f = correlated_shadowing(&[p, p], 8.0, 10.0, &mut rng).unwrap();
            assert_eq!(f[0], f[1]);
        }
    }

    #[test]
    fn bad_decorrelation_is_domain_error() {
        let mut rng = stream("shadow", &[0]);
        assert!(correlated_shadowing(&[Point::ORIGIN], 8.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn ten_metre_correlation_is_inverse_e() {
        let pts = [Point::ORIGIN, Point::new(10.0, 0.0)];
        let field = ShadowingField::new(&pts, 10.0).unwrap();
        let mut rng = stream("shadow", &[1]);
        let n = 100_000;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = field.draw_db(8.0, &mut rng);
            sab += x[0] * x[1];
            saa += x[0] * x[0];
            sbb += x[1] * x[1];
        }
        let corr = sab / (saa * sbb).sqrt();
        assert!((corr - (-1f64).exp()).abs() < 0.01, "corr = {corr}");
    }

    #[test]
    fn shadowing_marginal_is_n0_sigma() {
        // KS distance of pooled marginals against N(0, 8^2).
        let pts: Vec<Point> = (0..5).map(|i| Point::new(4.0 * i as f64, 0.0)).collect();
        let field = ShadowingField::new(&pts, 10.0).unwrap();
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = stream("shadow", &[2]);
        for idx in 0..pts.len() {
            let mut xs: Vec<f64> = (0..20_000).map(|_| field.draw_db(8.0, &mut rng)[idx] / 8.0).collect();
            xs.sort_by(f64::total_cmp);
            let n = xs.len() as f64;
            let d = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = std_normal.cdf(x);
                    (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
                })
                .fold(0.0, f64::max);
            assert!(d < 0.02, "KS distance {d} at position {idx}");
        }
    }

    #[test]
    fn channel_shapes() {
        let cfg = NetworkConfig::default();
        let topo = build_topology(&cfg, 1.0, &mut stream("topo", &[0])).unwrap();
        let ch = draw_channels(&topo, &ReceivedPowerModel::from_config(&cfg), &mut stream("ch", &[0])).unwrap();
        assert_eq!(ch.h.len(), 3);
        for (row, z) in ch.h.iter().zip([4, 2, 2]) {
            assert_eq!(row.len(), 14);
            assert!(row.iter().all(|v| v.len() == z));
        }

        let single = NetworkConfig {
            num_microcells: 0,
            ..NetworkConfig::default()
        };
        let topo = build_topology(&single, 1.0, &mut stream("topo", &[0])).unwrap();
        let ch = draw_channels(&topo, &ReceivedPowerModel::from_config(&single), &mut stream("ch", &[0])).unwrap();
        assert_eq!(ch.h.len(), 1);
        assert_eq!(ch.h[0].len(), 6);
        assert!(ch.h[0].iter().all(|v| v.len() == 4));
    }

    #[test]
    fn fading_variance_matches_power() {
        let cfg = NetworkConfig::default();
        let topo = build_topology(&cfg, 1.0, &mut stream("topo", &[7])).unwrap();
        let model = ReceivedPowerModel {
            shadow_sigma_db: 0.0,
            ..ReceivedPowerModel::from_config(&cfg)
        };
        let mut rng = stream("ch", &[7]);
        let trials = 10_000;
        let mut acc = vec![vec![0.0; topo.num_users()]; topo.num_cells()];
        let mut power = Vec::new();
        for _ in 0..trials {
            let ch = draw_channels(&topo, &model, &mut rng).unwrap();
            for (n, row) in ch.h.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    acc[n][k] += v.norm_squared() / v.len() as f64;
                }
            }
            power = ch.power;
        }
        for n in 0..topo.num_cells() {
            for k in 0..topo.num_users() {
                let est = acc[n][k] / trials as f64;
                assert!(rel(est, power[n][k]) < 0.05, "({n},{k}): {est} vs {}", power[n][k]);
            }
        }
    }

    fn one_link(power: f64) -> ChannelRealization {
        let mut rng = stream("link", &[power.to_bits()]);
        let h = vec![vec![complex_gaussian_vector(1, power, &mut rng)]];
        ChannelRealization {
            h_hat: h.clone(),
            h,
            power: vec![vec![power]],
            rho: 1.0,
        }
    }

    #[test]
    fn rho_one_is_exact_copy() {
        let cfg = NetworkConfig::default();
        let topo = build_topology(&cfg, 1.0, &mut stream("topo", &[0])).unwrap();
        let ch = draw_channels(&topo, &ReceivedPowerModel::from_config(&cfg), &mut stream("ch", &[0])).unwrap();
        let hat = corrupt_csi(&ch, 1.0, &mut stream("csi", &[0])).unwrap();
        assert_eq!(hat.h_hat, ch.h);
        assert!(corrupt_csi(&ch, 1.2, &mut stream("csi", &[0])).is_err());
        assert!(corrupt_csi(&ch, -0.1, &mut stream("csi", &[0])).is_err());
    }

    fn csi_correlation(rho: f64, draws: usize) -> (f64, f64) {
        let mut rng = stream("csi-corr", &[rho.to_bits()]);
        let p = 2.5;
        let (mut cross, mut hh, mut gg) = (num_complex::Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..draws {
            let mut link = one_link(p);
            link.h = vec![vec![complex_gaussian_vector(1, p, &mut rng)]];
            let c = corrupt_csi(&link, rho, &mut rng).unwrap();
            let (a, b) = (link.h[0][0][0], c.h_hat[0][0][0]);
            cross += a * b.conj();
            hh += a.norm_sqr();
            gg += b.norm_sqr();
        }
        (cross.re / (hh * gg).sqrt(), gg / draws as f64 / p)
    }

    #[test]
    fn rho_controls_correlation_and_preserves_variance() {
        let (c, var) = csi_correlation(0.9, 100_000);
        assert!((c - 0.9).abs() < 0.01, "corr {c}");
        assert!((var - 1.0).abs() < 0.05, "variance ratio {var}");

        let (c, var) = csi_correlation(0.0, 100_000);
        assert!(c.abs() < 0.01, "corr {c}");
        assert!((var - 1.0).abs() < 0.05);

        let (_, var) = csi_correlation(0.5, 10_000);
        assert!((var - 1.0).abs() < 0.05);
    }
}
