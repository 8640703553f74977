//! Capacity-limited cell range.
//!
//! Cell throughput is the occupied bandwidth of every BWP times an average
//! spectral efficiency, less signalling overhead. A cell can host as many
//! subscribers as fit under `target_load` of that throughput; with uniform
//! subscriber density the hexagon holding exactly that many gives the
//! capacity radius.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::{hex_cell_area_km2, HEX_AREA_FACTOR};
use crate::nr::NrConfig;

pub const DEFAULT_OVERHEAD_FRACTION: f64 = 0.14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("ZeroSubscribers: one subscriber ({demand_mbps} Mbit/s) exceeds the loadable cell capacity ({loadable_mbps} Mbit/s)")]
    ZeroSubscribers { demand_mbps: f64, loadable_mbps: f64 },
    #[error("subscriber density must be >= 0, got {0}")]
    NegativeDensity(f64),
    #[error("invalid traffic model: {0}")]
    BadTrafficModel(String),
}

fn default_overhead() -> f64 {
    DEFAULT_OVERHEAD_FRACTION
}

fn default_subs_per_weight() -> f64 {
    1.0
}

/// Busy-hour demand and cell loading assumptions (the `"traffic"` config section).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub demand_per_sub_mbps: f64,
    /// Highest planned cell load, in (0, 1].
    pub target_load: f64,
    pub se_bps_per_hz: f64,
    #[serde(default = "default_overhead")]
    pub overhead_fraction: f64,
    /// Subscribers represented by one unit of crowdsourced sample weight.
    #[serde(default = "default_subs_per_weight")]
    pub subs_per_weight: f64,
}

impl TrafficModel {
    pub fn validate(&self) -> Result<(), CapacityError> {
        let bad = |m: &str| Err(CapacityError::BadTrafficModel(m.to_string()));
        if !(self.demand_per_sub_mbps > 0.0 && self.demand_per_sub_mbps.is_finite()) {
            return bad("demand_per_sub_mbps must be > 0");
        }
        if !(self.target_load > 0.0 && self.target_load <= 1.0) {
            return bad("target_load must be in (0, 1]");
        }
        if !(self.se_bps_per_hz > 0.0 && self.se_bps_per_hz.is_finite()) {
            return bad("se_bps_per_hz must be > 0");
        }
        if !(0.0..1.0).contains(&self.overhead_fraction) {
            return bad("overhead_fraction must be in [0, 1)");
        }
        if !(self.subs_per_weight > 0.0 && self.subs_per_weight.is_finite()) {
            return bad("subs_per_weight must be > 0");
        }
        Ok(())
    }
}

/// Sum over BWPs of `n_prb * 12 * scs * SE * (1 - overhead)`, in Mbit/s.
pub fn cell_capacity_mbps(cfg: &NrConfig, t: &TrafficModel) -> f64 {
    cfg.bwps
        .iter()
        .map(|b| b.occupied_hz() * t.se_bps_per_hz * (1.0 - t.overhead_fraction))
        .sum::<f64>()
        / 1e6
}

/// Subscribers one cell can carry at the target load.
pub fn max_subs_per_cell(capacity_mbps: f64, t: &TrafficModel) -> Result<u64, CapacityError> {
    let loadable_mbps = t.target_load * capacity_mbps;
    let n = (loadable_mbps / t.demand_per_sub_mbps).floor();
    if !(n >= 1.0) {
        return Err(CapacityError::ZeroSubscribers {
            demand_mbps: t.demand_per_sub_mbps,
            loadable_mbps,
        });
    }
    Ok(n as u64)
}

/// Hexagon circumradius holding `max_subs_per_cell` subscribers at density `rho`.
///
/// An empty area (`rho == 0`) puts no bound on the range and yields infinity.
///
/// ```
/// use gnbdim::capacity::{capacity_radius, TrafficModel};
///
/// let t = TrafficModel {
///     demand_per_sub_mbps: 1.0,
///     target_load: 1.0,
///     se_bps_per_hz: 4.0,
///     overhead_fraction: 0.14,
///     subs_per_weight: 1.0,
/// };
/// let r = capacity_radius(300.0, &t, 100.0).unwrap();
/// assert!((r - 1.0746).abs() < 1e-4);
/// ```
pub fn capacity_radius(capacity_mbps: f64, t: &TrafficModel, rho_subs_per_km2: f64) -> Result<f64, CapacityError> {
    if !(rho_subs_per_km2 >= 0.0) {
        return Err(CapacityError::NegativeDensity(rho_subs_per_km2));
    }
    let max_subs = max_subs_per_cell(capacity_mbps, t)?;
    if rho_subs_per_km2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let cell_area = max_subs as f64 / rho_subs_per_km2;
    Ok((cell_area / HEX_AREA_FACTOR).sqrt())
}

/// `ceil(area * rho / max_subs_per_cell)`; zero when nobody lives there.
pub fn sites_for_capacity(area_km2: f64, rho: f64, max_subs_per_cell: u64) -> u64 {
    (area_km2 * rho / max_subs_per_cell.max(1) as f64).ceil().max(0.0) as u64
}

/// Offered traffic of a hexagonal cell divided by its capacity. May exceed 1.
pub fn offered_load(radius_km: f64, rho: f64, t: &TrafficModel, capacity_mbps: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    hex_cell_area_km2(radius_km) * rho * t.demand_per_sub_mbps / capacity_mbps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    pub cell_capacity_mbps: f64,
    pub max_subs_per_cell: u64,
    pub radius_km: f64,
    pub n_sites_capacity: u64,
    pub actual_load: f64,
}

/// Full capacity leg for a deployment area.
pub fn dimension_capacity(cfg: &NrConfig, t: &TrafficModel, rho: f64, area_km2: f64) -> Result<CapacityResult, CapacityError> {
    t.validate()?;
    let cell_capacity_mbps = cell_capacity_mbps(cfg, t);
    let max_subs = max_subs_per_cell(cell_capacity_mbps, t)?;
    let radius_km = capacity_radius(cell_capacity_mbps, t, rho)?;
    Ok(CapacityResult {
        cell_capacity_mbps,
        max_subs_per_cell: max_subs,
        radius_km,
        n_sites_capacity: sites_for_capacity(area_km2, rho, max_subs),
        actual_load: offered_load(radius_km, rho, t, cell_capacity_mbps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nr::{BwpSection, FrequencyRange, NrSection, Numerology};
    use proptest::prelude::*;

    fn traffic(demand: f64, target: f64) -> TrafficModel {
        TrafficModel {
            demand_per_sub_mbps: demand,
            target_load: target,
            se_bps_per_hz: 4.0,
            overhead_fraction: 0.14,
            subs_per_weight: 1.0,
        }
    }

    fn nr(bwps: usize) -> NrConfig {
        let bwp = BwpSection { mu: Numerology::new(1).unwrap(), bw_mhz: 100.0, purpose: "eMBB".into() };
        NrConfig::from_section(&NrSection {
            fr: FrequencyRange::FR2,
            carrier_ghz: 28.0,
            channel_bw_mhz: Some(200.0),
            bwps: vec![bwp; bwps],
            guard_fraction: 0.1,
            symbols_per_slot: 14,
            bandwidths: None,
        })
        .unwrap()
    }

    #[test]
    fn capacity_examples() {
        // 250 * 12 * 30e3 * 4 * 0.86
        assert!((cell_capacity_mbps(&nr(1), &traffic(1.0, 1.0)) - 309.6).abs() < 1e-9);
        let unit = TrafficModel { se_bps_per_hz: 1.0, overhead_fraction: 0.0, ..traffic(1.0, 1.0) };
        assert!((cell_capacity_mbps(&nr(1), &unit) - 90.0).abs() < 1e-9);
        let t = traffic(1.0, 1.0);
        assert_eq!(cell_capacity_mbps(&nr(2), &t), 2.0 * cell_capacity_mbps(&nr(1), &t));
    }

    #[test]
    fn radius_examples() {
        let t = traffic(1.0, 1.0);
        // sqrt(3 / 2.5981)
        let r = capacity_radius(300.0, &t, 100.0).unwrap();
        assert!((r - 1.074_570).abs() < 1e-6, "{r}");
        let r4 = capacity_radius(300.0, &t, 400.0).unwrap();
        assert!((r4 - r / 2.0).abs() < 1e-12);
        assert!(matches!(capacity_radius(300.0, &traffic(301.0, 1.0), 100.0), Err(CapacityError::ZeroSubscribers { .. })));
        assert_eq!(capacity_radius(300.0, &t, 0.0).unwrap(), f64::INFINITY);
        assert!(capacity_radius(300.0, &t, -1.0).is_err());
    }

    #[test]
    fn capacity_site_counts() {
        assert_eq!(sites_for_capacity(49.0, 100.0, 300), 17);
        assert_eq!(sites_for_capacity(1.0, 100.0, 300), 1);
        assert_eq!(sites_for_capacity(49.0, 0.0, 300), 0);
        for subs in [1u64, 7, 150, 300, 1000] {
            assert!(sites_for_capacity(49.0, 100.0, subs / 2 + (subs == 1) as u64) >= sites_for_capacity(49.0, 100.0, subs));
        }
    }

    #[test]
    fn load_examples() {
        let t = traffic(1.0, 1.0);
        let load = offered_load(1.0746, 100.0, &t, 300.0);
        assert!((load - 1.0).abs() < 1e-3);
        assert_eq!(offered_load(1.0746, 0.0, &t, 300.0), 0.0);
        assert!((offered_load(0.8, 200.0, &t, 300.0) - 2.0 * offered_load(0.8, 100.0, &t, 300.0)).abs() < 1e-12);
    }

    #[test]
    fn traffic_validation() {
        assert!(traffic(1.0, 0.0).validate().is_err());
        assert!(traffic(1.0, 1.1).validate().is_err());
        assert!(traffic(0.0, 0.5).validate().is_err());
        assert!(TrafficModel { overhead_fraction: 1.0, ..traffic(1.0, 0.5) }.validate().is_err());
        let json = r#"{"demand_per_sub_mbps":1,"target_load":0.8,"se_bps_per_hz":4}"#;
        let t: TrafficModel = serde_json::from_str(json).unwrap();
        assert_eq!((t.overhead_fraction, t.subs_per_weight), (0.14, 1.0));
    }

    proptest! {
        #[test]
        fn load_at_capacity_radius_is_bounded(
            cap in 10.0f64..2000.0,
            demand in 0.05f64..5.0,
            target in 0.1f64..=1.0,
            rho in 0.5f64..5000.0,
        ) {
            let t = traffic(demand, target);
            prop_assume!(target * cap >= demand);
            let r = capacity_radius(cap, &t, rho).unwrap();
            let load = offered_load(r, rho, &t, cap);
            let delta = demand / cap;
            prop_assert!(load <= target + 1e-9);
            prop_assert!(load >= target - delta - 1e-9);
        }

        #[test]
        fn radius_monotone(cap in 10.0f64..2000.0, rho in 0.5f64..5000.0) {
            let t = traffic(0.5, 0.8);
            let r = capacity_radius(cap, &t, rho).unwrap();
            prop_assert!(capacity_radius(cap, &t, rho * 1.5).unwrap() <= r);
            prop_assert!(capacity_radius(cap * 1.5, &t, rho).unwrap() >= r);
        }

        #[test]
        fn no_capacity_deficit(area in 0.1f64..500.0, rho in 0.0f64..5000.0, subs in 1u64..5000) {
            prop_assert!(sites_for_capacity(area, rho, subs) as f64 * subs as f64 >= area * rho * (1.0 - 1e-12));
        }
    }
}
