//! Per-user SINR, sum rates, the ratio-of-means mean-SINR approximation and
//! the closed-form expectation of the beamforming numerator.

use std::ops::Range;

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::beamforming::BeamformerSet;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{gain, CMatrix, CVector};
use crate::topology::{CellKind, Topology};

/// The three received-power terms of one user's SINR for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserTerms {
    pub signal: f64,
    pub intracell: f64,
    pub intercell: f64,
    pub noise: f64,
}

impl UserTerms {
    pub fn sinr(&self) -> f64 {
        self.signal / (self.noise + self.intracell + self.intercell)
    }

    pub fn rate(&self) -> f64 {
        (1.0 + self.sinr()).log2()
    }
}

/// SINR terms for `user`, evaluated on the true channels.
///
/// Under [`CoordinationStrategy::NoInterTier`] interferers of the other tier
/// are not present in the received signal.
pub fn user_terms(
    user: usize,
    topology: &Topology,
    beamformers: &BeamformerSet,
    channels: &ChannelRealization,
) -> UserTerms {
    let n = topology.users[user].serving_cell;
    let tier = topology.sites[n].kind;
    let same_tier_only = beamformers.strategy.removes_cross_tier_interference();
    let h = &channels.h[n][user];

    let signal = gain(h, beamformers.get(user));
    let intracell = topology
        .users_of(n)
        .filter(|&i| i != user)
        .map(|i| gain(h, beamformers.get(i)))
        .sum();
    let intercell = (0..topology.num_cells())
        .filter(|&j| j != n && !(same_tier_only && topology.sites[j].kind != tier))
        .map(|j| {
            let g = &channels.h[j][user];
            topology.users_of(j).map(|q| gain(g, beamformers.get(q))).sum::<f64>()
        })
        .sum();
    UserTerms {
        signal,
        intracell,
        intercell,
        noise: topology.users[user].noise_variance,
    }
}

pub fn sinr(
    user: usize,
    topology: &Topology,
    beamformers: &BeamformerSet,
    channels: &ChannelRealization,
) -> f64 {
    user_terms(user, topology, beamformers, channels).sinr()
}

pub fn evaluate_users(
    topology: &Topology,
    beamformers: &BeamformerSet,
    channels: &ChannelRealization,
) -> Vec<UserTerms> {
    (0..topology.num_users())
        .map(|k| user_terms(k, topology, beamformers, channels))
        .collect()
}

/// `tr{w^H (h^H h) w}`, the trace form of `|h w|^2`.
pub fn trace_form(w: &CVector, h: &CVector) -> f64 {
    let outer: CMatrix = h.conjugate() * h.transpose();
    (w.adjoint() * outer * w)[(0, 0)].re
}

/// `sum_k log2(1 + gamma_k)` over one cell's users.
pub fn cell_rate(sinr: &[f64], users: Range<usize>) -> f64 {
    sinr[users].iter().map(|g| (1.0 + g).log2()).sum()
}

/// Monte Carlo mean of a cell's sum rate over per-trial SINR tables.
pub fn mean_sum_rate_per_cell(trials: &[Vec<f64>], users: Range<usize>) -> f64 {
    assert!(!trials.is_empty(), "need at least one trial");
    trials.iter().map(|t| cell_rate(t, users.clone())).sum::<f64>() / trials.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRate {
    pub mean: f64,
    pub per_trial: Vec<f64>,
}

/// Mean of the double sum of user rates over the selected cells.
pub fn network_sum_rate(trials: &[Vec<f64>], cells: &[Range<usize>]) -> NetworkRate {
    assert!(!trials.is_empty(), "need at least one trial");
    assert!(!cells.is_empty(), "need at least one cell");
    let per_trial: Vec<f64> = trials
        .iter()
        .map(|t| cells.iter().map(|c| cell_rate(t, c.clone())).sum())
        .collect();
    NetworkRate {
        mean: per_trial.iter().sum::<f64>() / per_trial.len() as f64,
        per_trial,
    }
}

/// Ratio of Monte Carlo means for one user slot:
/// `E[signal] / (sigma^2 + E[intracell] + E[intercell])`.
pub fn mean_sinr_approx<'a, I>(samples: I) -> f64
where
    I: IntoIterator<Item = &'a UserTerms>,
{
    let mut acc = TermAccumulator::default();
    for t in samples {
        acc.push(t);
    }
    acc.approx()
}

/// Running sums behind [`mean_sinr_approx`].
#[derive(Debug, Clone, Copy, Default)]
pub struct TermAccumulator {
    signal: f64,
    intracell: f64,
    intercell: f64,
    noise: f64,
    count: usize,
}

impl TermAccumulator {
    pub fn push(&mut self, t: &UserTerms) {
        self.signal += t.signal;
        self.intracell += t.intracell;
        self.intercell += t.intercell;
        self.noise += t.noise;
        self.count += 1;
    }

    pub fn approx(&self) -> f64 {
        assert!(self.count > 0, "need at least one trial");
        let n = self.count as f64;
        (self.signal / n) / (self.noise / n + self.intracell / n + self.intercell / n)
    }
}

/// Closed form of `E[|h (H~^H H~ + sigma^2 I)^-1 h^H|^2]` for
/// `h ~ CN(0, P I)`, given the eigenvalues of `H~^H H~`:
/// `P^2 [ (sum_i 1/(l_i + s))^2 + sum_i 1/(l_i + s)^2 ]`.
pub fn appendix_numerator(eigenvalues: &[f64], noise_variance: f64, link_power: f64) -> Result<f64> {
    if let Some(bad) = eigenvalues.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::Domain(format!("eigenvalues must be non-negative, got {bad}")));
    }
    if !(noise_variance > 0.0) {
        return Err(Error::Domain(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    let (sum, sum_sq) = eigenvalues.iter().fold((0.0, 0.0), |(s, s2), l| {
        let inv = 1.0 / (l + noise_variance);
        (s + inv, s2 + inv * inv)
    });
    Ok(link_power * link_power * (sum * sum + sum_sq))
}

/// Eigenvalues of `H~^H H~`, clamped at zero against round-off.
pub fn leakage_gram_eigenvalues(leakage: &CMatrix) -> Vec<f64> {
    let gram = leakage.ad_mul(leakage);
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0))
        .collect()
}

/// Cell structure shared by every trial of a grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellLayout {
    pub kinds: Vec<CellKind>,
    pub users: Vec<Range<usize>>,
}

impl CellLayout {
    pub fn of(topology: &Topology) -> Self {
        CellLayout {
            kinds: topology.sites.iter().map(|s| s.kind).collect(),
            users: (0..topology.num_cells()).map(|n| topology.users_of(n)).collect(),
        }
    }

    pub fn cells_of(&self, kind: CellKind) -> Vec<usize> {
        (0..self.kinds.len()).filter(|&n| self.kinds[n] == kind).collect()
    }

    pub fn num_users(&self) -> usize {
        self.users.last().map_or(0, |r| r.end)
    }
}

/// Aggregates of one (strategy, grid point) over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Mean SINR per user slot (linear).
    pub sinr: Vec<f64>,
    /// Ratio-of-means SINR approximation per user slot (linear).
    pub sinr_approx: Vec<f64>,
    /// Mean sum rate per cell, b/s/Hz.
    pub rate_per_cell: Vec<f64>,
    /// Per-trial, per-cell sum rates.
    pub cell_rate_trials: Vec<Vec<f64>>,
    pub rate_network: f64,
    /// Mean over users and trials, linear.
    pub mean_sinr_sim: f64,
    /// Mean over user slots of `sinr_approx`, linear.
    pub mean_sinr_approx: f64,
    pub trials: usize,
}

impl MetricsReport {
    pub fn from_trials(layout: &CellLayout, trials: &[Vec<UserTerms>]) -> Self {
        assert!(!trials.is_empty(), "need at least one trial");
        let num_users = layout.num_users();
        let t = trials.len() as f64;

        let mut acc = vec![TermAccumulator::default(); num_users];
        let mut sinr_sum = vec![0.0; num_users];
        let mut cell_rate_trials = Vec::with_capacity(trials.len());
        for terms in trials {
            assert_eq!(terms.len(), num_users, "trial does not match the cell layout");
            let sinr: Vec<f64> = terms.iter().map(UserTerms::sinr).collect();
            for (k, term) in terms.iter().enumerate() {
                acc[k].push(term);
                sinr_sum[k] += sinr[k];
            }
            cell_rate_trials.push(layout.users.iter().map(|r| cell_rate(&sinr, r.clone())).collect::<Vec<_>>());
        }

        let sinr: Vec<f64> = sinr_sum.iter().map(|s| s / t).collect();
        let sinr_approx: Vec<f64> = acc.iter().map(TermAccumulator::approx).collect();
        let rate_per_cell: Vec<f64> = (0..layout.users.len())
            .map(|n| cell_rate_trials.iter().map(|r: &Vec<f64>| r[n]).sum::<f64>() / t)
            .collect();
        MetricsReport {
            mean_sinr_sim: sinr.iter().sum::<f64>() / num_users as f64,
            mean_sinr_approx: sinr_approx.iter().sum::<f64>() / num_users as f64,
            rate_network: rate_per_cell.iter().sum(),
            sinr,
            sinr_approx,
            rate_per_cell,
            cell_rate_trials,
            trials: trials.len(),
        }
    }
}
