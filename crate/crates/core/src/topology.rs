//! Network layout: macro and microcell sites, user drops and the full
//! BS-to-user distance matrix.

use std::f64::consts::PI;
use std::ops::Range;

use rand::Rng;
use serde::Serialize;

use crate::config::{dbm_to_mw, NetworkConfig, Placement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(center: Point, r: f64, theta: f64) -> Self {
        Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CellKind {
    Macro,
    Micro,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSite {
    pub id: usize,
    pub kind: CellKind,
    pub position: Point,
    pub radius_m: f64,
    pub erp_dbm: f64,
    /// `erp_dbm` converted once to linear mW.
    pub erp_mw: f64,
    pub num_antennas: usize,
    pub num_users: usize,
    /// For microcells, the macrocell whose area the center was drawn in.
    pub host: Option<usize>,
}

impl CellSite {
    pub fn new(
        id: usize,
        kind: CellKind,
        position: Point,
        radius_m: f64,
        erp_dbm: f64,
        num_antennas: usize,
        num_users: usize,
    ) -> Self {
        CellSite {
            id,
            kind,
            position,
            radius_m,
            erp_dbm,
            erp_mw: dbm_to_mw(erp_dbm),
            num_antennas,
            num_users,
            host: None,
        }
    }

    pub fn macro_from(config: &NetworkConfig, id: usize, position: Point) -> Self {
        CellSite::new(
            id,
            CellKind::Macro,
            position,
            config.macro_radius_m,
            config.macro_erp_dbm,
            config.macro_antennas,
            config.macro_users,
        )
    }

    pub fn micro_from(config: &NetworkConfig, id: usize, position: Point) -> Self {
        CellSite::new(
            id,
            CellKind::Micro,
            position,
            config.micro_radius_m,
            config.micro_erp_dbm,
            config.micro_antennas,
            config.micro_users,
        )
    }

    pub fn is_macro(&self) -> bool {
        self.kind == CellKind::Macro
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserTerminal {
    pub id: usize,
    pub serving_cell: usize,
    pub position: Point,
    pub noise_variance: f64,
}

/// Region allowed for microcell centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlacementRegion {
    /// Uniform over the host disc.
    Disc,
    /// Uniform over `inner < r < host radius`.
    Annulus { inner: f64 },
}

/// Microcell site template plus the rejection-sampling budget.
#[derive(Debug, Clone)]
pub struct MicroPlacement {
    pub radius_m: f64,
    pub erp_dbm: f64,
    pub num_antennas: usize,
    pub num_users: usize,
    pub region: PlacementRegion,
    pub attempts_per_cell: usize,
    pub first_id: usize,
}

impl MicroPlacement {
    pub fn from_config(config: &NetworkConfig, first_id: usize) -> Self {
        let region = match config.placement {
            Placement::Anywhere => PlacementRegion::Disc,
            Placement::EdgeAnnulus => PlacementRegion::Annulus {
                inner: config.edge_inner_radius_m,
            },
        };
        MicroPlacement {
            radius_m: config.micro_radius_m,
            erp_dbm: config.micro_erp_dbm,
            num_antennas: config.micro_antennas,
            num_users: config.micro_users,
            region,
            attempts_per_cell: config.placement_attempts,
            first_id,
        }
    }

    pub fn min_separation(&self) -> f64 {
        2.0 * self.radius_m
    }
}

/// Uniform point in the annulus `inner <= r < outer` around `center`.
fn uniform_in_annulus<R: Rng + ?Sized>(center: Point, inner: f64, outer: f64, rng: &mut R) -> Point {
    let u: f64 = rng.random();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    let theta = rng.random::<f64>() * 2.0 * PI;
    Point::polar(center, r, theta)
}

/// Drop `count` microcells around `host` by rejection sampling.
///
/// Each center is uniform over the allowed region and at least `2 d_m` from
/// every center already placed.
pub fn place_microcells<R: Rng + ?Sized>(
    host: &CellSite,
    count: usize,
    params: &MicroPlacement,
    rng: &mut R,
) -> Result<Vec<CellSite>> {
    let (inner, outer) = match params.region {
        PlacementRegion::Disc => (0.0, host.radius_m),
        PlacementRegion::Annulus { inner } => (inner, host.radius_m),
    };
    let strict_annulus = matches!(params.region, PlacementRegion::Annulus { .. });
    let min_sep = params.min_separation();
    let mut centers: Vec<Point> = Vec::with_capacity(count);

    for placed in 0..count {
        let mut accepted = None;
        for _ in 0..params.attempts_per_cell {
            let p = uniform_in_annulus(host.position, inner, outer, rng);
            let r = p.distance(host.position);
            if r >= outer || (strict_annulus && r <= inner) {
                continue;
            }
            if centers.iter().all(|c| c.distance(p) >= min_sep) {
                accepted = Some(p);
                break;
            }
        }
        match accepted {
            Some(p) => centers.push(p),
            None => {
                return Err(Error::PlacementInfeasible {
                    requested: count,
                    placed,
                    attempts: params.attempts_per_cell,
                    context: String::new(),
                })
            }
        }
    }

    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut site = CellSite::new(
                params.first_id + i,
                CellKind::Micro,
                p,
                params.radius_m,
                params.erp_dbm,
                params.num_antennas,
                params.num_users,
            );
            site.host = Some(host.id);
            site
        })
        .collect())
}

fn drop_user_clear_of<R: Rng + ?Sized>(
    site: &CellSite,
    others: &[CellSite],
    exclusion_m: f64,
    rng: &mut R,
) -> Point {
    loop {
        let p = uniform_in_annulus(site.position, exclusion_m, site.radius_m, rng);
        let d = p.distance(site.position);
        if d < exclusion_m || d > site.radius_m {
            continue;
        }
        if others.iter().all(|o| o.position.distance(p) >= exclusion_m) {
            return p;
        }
    }
}

/// Uniform user positions over the site's disc outside a `exclusion_m`
/// radius around the BS. Ids and noise are assigned by the caller.
pub fn drop_users<R: Rng + ?Sized>(site: &CellSite, exclusion_m: f64, rng: &mut R) -> Vec<UserTerminal> {
    (0..site.num_users)
        .map(|i| UserTerminal {
            id: i,
            serving_cell: site.id,
            position: drop_user_clear_of(site, &[], exclusion_m, rng),
            noise_variance: 1.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Topology {
    pub sites: Vec<CellSite>,
    pub users: Vec<UserTerminal>,
    /// `distances[n][k]`: site `n` to user `k`, meters.
    pub distances: Vec<Vec<f64>>,
    cell_users: Vec<Range<usize>>,
}

impl Topology {
    /// Assemble a topology from sites and users; users must be grouped by
    /// serving cell in site order.
    pub fn from_parts(sites: Vec<CellSite>, users: Vec<UserTerminal>) -> Self {
        let mut cell_users = Vec::with_capacity(sites.len());
        let mut start = 0;
        for site in &sites {
            let end = start + users[start..].iter().take_while(|u| u.serving_cell == site.id).count();
            cell_users.push(start..end);
            start = end;
        }
        assert_eq!(start, users.len(), "users must be grouped by serving cell in site order");
        let distances = sites
            .iter()
            .map(|s| users.iter().map(|u| s.position.distance(u.position)).collect())
            .collect();
        Topology {
            sites,
            users,
            distances,
            cell_users,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.sites.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Global user indices served by cell `n`.
    pub fn users_of(&self, n: usize) -> Range<usize> {
        self.cell_users[n].clone()
    }

    pub fn macro_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites.iter().filter(|s| s.is_macro()).map(|s| s.id)
    }

    pub fn micro_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites.iter().filter(|s| !s.is_macro()).map(|s| s.id)
    }

    pub fn set_noise_variance(&mut self, noise_variance: f64) {
        for u in &mut self.users {
            u.noise_variance = noise_variance;
        }
    }
}

/// Macro centers: one at the origin, or three on an equilateral triangle
/// with side `inter_site_distance_m` starting at the origin.
pub fn macro_positions(count: usize, inter_site_distance_m: f64) -> Vec<Point> {
    let d = inter_site_distance_m;
    match count {
        1 => vec![Point::ORIGIN],
        3 => vec![
            Point::ORIGIN,
            Point::new(d, 0.0),
            Point::new(d / 2.0, d * 3f64.sqrt() / 2.0),
        ],
        _ => unreachable!("validated: num_macrocells is 1 or 3"),
    }
}

/// Draw a full layout. Microcells are placed around macro 0 (the reference
/// macrocell); users of every cell are dropped independently and kept at least
/// `d_0` from every BS.
pub fn build_topology<R: Rng + ?Sized>(
    config: &NetworkConfig,
    noise_variance: f64,
    rng: &mut R,
) -> Result<Topology> {
    let mut sites: Vec<CellSite> = macro_positions(config.num_macrocells, config.inter_site_distance_m)
        .into_iter()
        .enumerate()
        .map(|(id, p)| CellSite::macro_from(config, id, p))
        .collect();
    let params = MicroPlacement::from_config(config, sites.len());
    let micros = place_microcells(&sites[0], config.num_microcells, &params, rng)?;
    sites.extend(micros);

    let d0 = config.reference_distance_m;
    let mut users = Vec::new();
    for site in &sites {
        for _ in 0..site.num_users {
            users.push(UserTerminal {
                id: users.len(),
                serving_cell: site.id,
                position: drop_user_clear_of(site, &sites, d0, rng),
                noise_variance,
            });
        }
    }
    Ok(Topology::from_parts(sites, users))
}
