//! Coverage/capacity balancing.
//!
//! The two dimensioning legs are coupled through the cell load: the link
//! budget reserves an interference margin for an *assumed* load, and the
//! capacity model yields the *actual* load of a cell of the resulting size.
//! [`iterate_balance`] runs a damped fixed-point iteration on the load until
//! the two agree, then [`classify`] compares the coverage and capacity radii.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::capacity::{self, max_subs_per_cell, offered_load, sites_for_capacity, CapacityError, TrafficModel};
use crate::coverage::{self, hex_cell_area_km2, invert_to_radius, sites_for_coverage, CoverageError, LinkBudget, PropagationModel, SensitivityBandwidth};
use crate::nr::NrConfig;

pub const DEFAULT_ETA: f64 = 0.6;

// Loads this close to the pole 1/eta are rejected.
const POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BalanceError {
    #[error("LoadTooHigh: cell load {load} too high for neighbour coupling eta={eta}")]
    LoadTooHigh { load: f64, eta: f64 },
    #[error("invalid balance thresholds: {0}")]
    BadThresholds(String),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

/// Tolerances and iteration controls (the `"balance"` config section).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BalanceThresholds {
    /// Relative tolerance on the radius difference.
    pub eps_radius: f64,
    /// Absolute tolerance on the load difference.
    pub eps_load: f64,
    pub max_iter: u32,
    pub damping: f64,
    /// Neighbour-cell coupling in the interference margin; 0 decouples the legs.
    pub eta: f64,
}

impl Default for BalanceThresholds {
    fn default() -> Self {
        BalanceThresholds {
            eps_radius: 0.10,
            eps_load: 0.05,
            max_iter: 100,
            damping: 0.5,
            eta: DEFAULT_ETA,
        }
    }
}

impl BalanceThresholds {
    pub fn validate(&self) -> Result<(), BalanceError> {
        let bad = |m: &str| Err(BalanceError::BadThresholds(m.to_string()));
        if !(self.eps_radius > 0.0) || !(self.eps_load > 0.0) {
            return bad("tolerances must be > 0");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must be in (0, 1]");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad("eta must be >= 0");
        }
        Ok(())
    }
}

/// Noise-rise style margin `-10 log10(1 - eta * load)`.
///
/// ```
/// let m = gnbdim::balance::interference_margin_db(0.5, 0.6).unwrap();
/// assert!((m - 1.549).abs() < 1e-3);
/// ```
pub fn interference_margin_db(load: f64, eta: f64) -> Result<f64, BalanceError> {
    let coupled = eta * load;
    if !(load >= 0.0) || coupled >= 1.0 - POLE_GUARD {
        return Err(BalanceError::LoadTooHigh { load, eta });
    }
    Ok(-10.0 * (1.0 - coupled).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Balanced,
    /// Coverage range exceeds capacity range: cells carry more traffic than planned.
    UnderDimensioned,
    /// Capacity range exceeds coverage range: cells are under-used.
    OverDimensioned,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Balanced => "balanced",
            Classification::UnderDimensioned => "under-dimensioned",
            Classification::OverDimensioned => "over-dimensioned",
        })
    }
}

/// Balanced when the radii agree within `eps_radius` of the larger one;
/// otherwise under-dimensioned if the coverage radius is the larger.
pub fn classify(r_cov: f64, r_cap: f64, thresholds: &BalanceThresholds) -> Classification {
    if r_cov == r_cap {
        return Classification::Balanced;
    }
    let larger = r_cov.max(r_cap);
    if larger.is_finite() && (r_cov - r_cap).abs() / larger <= thresholds.eps_radius {
        Classification::Balanced
    } else if r_cov > r_cap {
        Classification::UnderDimensioned
    } else {
        Classification::OverDimensioned
    }
}

/// Site count and loading of the final deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SitePlan {
    pub deployment_radius_km: f64,
    pub n_sites_coverage: u64,
    pub n_sites_capacity: u64,
    pub n_sites_final: u64,
    /// Total offered traffic over total deployed capacity.
    pub utilization: f64,
}

pub fn final_plan(
    r_cov: f64,
    r_cap: f64,
    area_km2: f64,
    rho: f64,
    traffic: &TrafficModel,
    capacity_mbps: f64,
) -> Result<SitePlan, BalanceError> {
    let max_subs = max_subs_per_cell(capacity_mbps, traffic)?;
    let n_sites_coverage = sites_for_coverage(area_km2, r_cov);
    let n_sites_capacity = sites_for_capacity(area_km2, rho, max_subs);
    let n_sites_final = n_sites_coverage.max(n_sites_capacity);
    let offered_mbps = area_km2 * rho * traffic.demand_per_sub_mbps;
    Ok(SitePlan {
        deployment_radius_km: r_cov.min(r_cap),
        n_sites_coverage,
        n_sites_capacity,
        n_sites_final,
        utilization: offered_mbps / (n_sites_final as f64 * capacity_mbps),
    })
}

fn serialize_radius<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
    if r.is_finite() {
        s.serialize_f64(*r)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensioningResult {
    pub r_cov_km: f64,
    /// Infinite (serialized as `null`) when the area has no subscribers.
    #[serde(serialize_with = "serialize_radius")]
    pub r_cap_km: f64,
    pub assumed_load: f64,
    pub actual_load: f64,
    pub classification: Classification,
    pub mapl_db: f64,
    pub interference_margin_db: f64,
    pub cell_capacity_mbps: f64,
    pub max_subs_per_cell: u64,
    pub deployment_radius_km: f64,
    pub n_sites_coverage: u64,
    pub n_sites_capacity: u64,
    pub n_sites_final: u64,
    pub utilization: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Receiver bandwidth the link budget's noise floor is taken over.
pub fn sensitivity_bw_hz(link: &LinkBudget, cfg: &NrConfig) -> f64 {
    let bwp = cfg.edge_bwp();
    match link.sensitivity_bandwidth {
        SensitivityBandwidth::OnePrb => bwp.mu.prb_hz(),
        SensitivityBandwidth::FullBwp => bwp.occupied_hz(),
    }
}

/// The load a cell would actually carry if the link budget assumed `assumed_load`.
///
/// Returns `(actual_load, r_cov_km, mapl_db, margin_db)`.
#[allow(clippy::too_many_arguments)]
pub fn load_response(
    assumed_load: f64,
    link: &LinkBudget,
    model: &PropagationModel,
    f_mhz: f64,
    bw_hz: f64,
    r_cap: f64,
    rho: f64,
    traffic: &TrafficModel,
    capacity_mbps: f64,
    eta: f64,
) -> Result<(f64, f64, f64, f64), BalanceError> {
    let margin = interference_margin_db(assumed_load, eta)?;
    let mapl = coverage::mapl(&link.with_interference_margin(margin), bw_hz)?;
    let r_cov = invert_to_radius(model, f_mhz, mapl)?;
    let actual = offered_load(r_cov.min(r_cap), rho, traffic, capacity_mbps);
    Ok((actual, r_cov, mapl, margin))
}

/// Damped fixed-point iteration on the cell load.
///
/// Starting from `traffic.target_load`, each step recomputes the coverage
/// radius under the assumed load's interference margin, evaluates the actual
/// load of the smaller of the two radii, and moves the assumption a fraction
/// `damping` of the way toward it. Running out of iterations is reported via
/// `converged = false`, not as an error.
#[allow(clippy::too_many_arguments)]
pub fn iterate_balance(
    link: &LinkBudget,
    model: &PropagationModel,
    f_mhz: f64,
    cfg: &NrConfig,
    traffic: &TrafficModel,
    rho: f64,
    area_km2: f64,
    thresholds: &BalanceThresholds,
) -> Result<DimensioningResult, BalanceError> {
    thresholds.validate()?;
    traffic.validate()?;
    link.validate()?;
    model.validate()?;

    let capacity_mbps = capacity::cell_capacity_mbps(cfg, traffic);
    let max_subs = max_subs_per_cell(capacity_mbps, traffic)?;
    let r_cap = capacity::capacity_radius(capacity_mbps, traffic, rho)?;
    let bw_hz = sensitivity_bw_hz(link, cfg);
    let load_cap = if thresholds.eta > 0.0 { 0.999 / thresholds.eta } else { f64::INFINITY };

    let mut assumed = traffic.target_load;
    let mut iterations = 0;
    let mut converged = false;
    let (mut actual, mut r_cov, mut mapl, mut margin);
    loop {
        iterations += 1;
        (actual, r_cov, mapl, margin) =
            load_response(assumed, link, model, f_mhz, bw_hz, r_cap, rho, traffic, capacity_mbps, thresholds.eta)?;
        log::debug!("balance iter {iterations}: assumed {assumed:.6} actual {actual:.6} r_cov {r_cov:.4} km");
        if (actual - assumed).abs() <= thresholds.eps_load {
            converged = true;
            break;
        }
        if iterations >= thresholds.max_iter {
            break;
        }
        assumed += thresholds.damping * (actual.clamp(0.0, load_cap) - assumed);
    }

    let plan = final_plan(r_cov, r_cap, area_km2, rho, traffic, capacity_mbps)?;
    Ok(DimensioningResult {
        r_cov_km: r_cov,
        r_cap_km: r_cap,
        assumed_load: assumed,
        actual_load: actual,
        classification: classify(r_cov, r_cap, thresholds),
        mapl_db: mapl,
        interference_margin_db: margin,
        cell_capacity_mbps: capacity_mbps,
        max_subs_per_cell: max_subs,
        deployment_radius_km: plan.deployment_radius_km,
        n_sites_coverage: plan.n_sites_coverage,
        n_sites_capacity: plan.n_sites_capacity,
        n_sites_final: plan.n_sites_final,
        utilization: plan.utilization,
        iterations,
        converged,
    })
}

/// True when `n` sites leave either leg short over the area.
pub fn deficient(n: u64, area_km2: f64, result: &DimensioningResult, rho: f64) -> bool {
    let covered = n as f64 * hex_cell_area_km2(result.r_cov_km);
    let served = n as f64 * result.max_subs_per_cell as f64;
    covered < area_km2 || served < area_km2 * rho
}
