//! Leakage-based (SLNR) beamformer synthesis under the four BS coordination
//! strategies.
//!
//! For user `k` served by BS `n` the beamformer is the normalized
//! `(H~^H H~ + sigma_k^2 I)^-1 h^H`, where the rows of `H~` are the channels
//! from BS `n` to every user it tries not to leak onto. The strategy only
//! decides which rows go into `H~`.

use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::Cholesky;
use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{gain, stack_rows, CMatrix, CVector};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinationStrategy {
    /// Each BS only avoids leaking onto its own users.
    NoCoord,
    /// Each BS avoids its own users and every user of every other cell.
    FullCoord,
    /// Macro BSs coordinate fully, microcell BSs do not.
    MacroOnlyCoord,
    /// Idealized: no cross-tier interference at all. Microcell BSs coordinate
    /// with the other microcells, macro BSs only intracell.
    NoInterTier,
}

impl CoordinationStrategy {
    pub const ALL: [CoordinationStrategy; 4] = [
        CoordinationStrategy::NoCoord,
        CoordinationStrategy::FullCoord,
        CoordinationStrategy::MacroOnlyCoord,
        CoordinationStrategy::NoInterTier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoordinationStrategy::NoCoord => "no_coord",
            CoordinationStrategy::FullCoord => "full_coord",
            CoordinationStrategy::MacroOnlyCoord => "macro_only",
            CoordinationStrategy::NoInterTier => "no_inter_tier",
        }
    }

    /// Whether signals crossing tiers are absent from the received signal.
    pub fn removes_cross_tier_interference(self) -> bool {
        self == CoordinationStrategy::NoInterTier
    }
}

impl fmt::Display for CoordinationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoordinationStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "no_coord" => Ok(CoordinationStrategy::NoCoord),
            "full_coord" => Ok(CoordinationStrategy::FullCoord),
            "macro_only" | "macro_only_coord" => Ok(CoordinationStrategy::MacroOnlyCoord),
            "no_inter_tier" => Ok(CoordinationStrategy::NoInterTier),
            _ => Err(format!(
                "unknown strategy `{s}` (expected no_coord, full_coord, macro_only or no_inter_tier)"
            )),
        }
    }
}

/// Users whose channels from `bs` form the leakage matrix for `user`.
///
/// Order: the serving cell's other users, then every other admitted cell in
/// ascending id, users ascending within a cell.
pub fn leakage_users(strategy: CoordinationStrategy, topology: &Topology, bs: usize, user: usize) -> Vec<usize> {
    use CoordinationStrategy::*;

    let is_macro = topology.sites[bs].is_macro();
    let admit_cell = |m: usize| -> bool {
        match (strategy, is_macro) {
            (NoCoord, _) | (MacroOnlyCoord, false) | (NoInterTier, true) => false,
            (FullCoord, _) | (MacroOnlyCoord, true) => true,
            (NoInterTier, false) => !topology.sites[m].is_macro(),
        }
    };

    let mut rows: Vec<usize> = topology.users_of(bs).filter(|&k| k != user).collect();
    for m in (0..topology.num_cells()).filter(|&m| m != bs) {
        if admit_cell(m) {
            rows.extend(topology.users_of(m));
        }
    }
    rows
}

/// The leakage matrix `H~_{n,k}`: one row per leakage user, `Z_n` columns.
pub fn concatenated_channel(
    strategy: CoordinationStrategy,
    bs: usize,
    user: usize,
    channels: &[Vec<CVector>],
    topology: &Topology,
) -> CMatrix {
    let cols = topology.sites[bs].num_antennas;
    let rows = leakage_users(strategy, topology, bs, user);
    stack_rows(rows.iter().map(|&k| &channels[bs][k]), cols)
}

/// Unit-norm maximizer of the signal-to-leakage-plus-noise ratio.
pub fn slnr_beamformer(desired: &CVector, leakage: &CMatrix, noise_variance: f64) -> Result<CVector> {
    if !(noise_variance > 0.0) {
        return Err(Error::Domain(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    let z = desired.len();
    if leakage.ncols() != z {
        return Err(Error::Domain(format!(
            "leakage matrix has {} columns, desired channel has {z} entries",
            leakage.ncols()
        )));
    }
    let mut regularized = leakage.ad_mul(leakage);
    for i in 0..z {
        regularized[(i, i)] += noise_variance;
    }
    let chol = Cholesky::new(regularized)
        .ok_or_else(|| Error::Domain("regularized leakage Gram matrix is not positive definite".into()))?;
    let x = chol.solve(&desired.conjugate());
    let norm = x.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Domain("beamformer direction has zero or non-finite norm".into()));
    }
    Ok(x.unscale(norm))
}

/// `|h w|^2 / (sigma^2 + sum_rows |H~_row w|^2)`.
pub fn slnr(w: &CVector, desired: &CVector, leakage: &CMatrix, noise_variance: f64) -> f64 {
    let leaked = (leakage * w).norm_squared();
    gain(desired, w) / (noise_variance + leaked)
}

/// How the design channels were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CsiQuality {
    Perfect,
    Imperfect { rho: f64 },
}

/// One unit-norm beamformer per user, held by the user's serving BS.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// Indexed by global user id.
    pub weights: Vec<CVector>,
    pub strategy: CoordinationStrategy,
    pub built_from: CsiQuality,
}

impl BeamformerSet {
    pub fn get(&self, user: usize) -> &CVector {
        &self.weights[user]
    }
}

pub fn build_beamformers(
    strategy: CoordinationStrategy,
    channels: &ChannelRealization,
    topology: &Topology,
    use_imperfect: bool,
) -> Result<BeamformerSet> {
    let design = channels.design(use_imperfect);
    let mut weights = Vec::with_capacity(topology.num_users());
    for user in &topology.users {
        let bs = user.serving_cell;
        let leakage = concatenated_channel(strategy, bs, user.id, design, topology);
        weights.push(slnr_beamformer(&design[bs][user.id], &leakage, user.noise_variance)?);
    }
    let built_from = if use_imperfect {
        CsiQuality::Imperfect { rho: channels.rho }
    } else {
        CsiQuality::Perfect
    };
    Ok(BeamformerSet {
        weights,
        strategy,
        built_from,
    })
}
