//! End-to-end dimensioning: ingest, density, coverage, capacity, balance, economics.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::balance::{self, BalanceError, DimensioningResult};
use crate::capacity::CapacityError;
use crate::config::{ConfigError, ValidatedConfig, Window};
use crate::coverage::{CoverageError, HEX_AREA_FACTOR};
use crate::density::{self, DeploymentArea, DensityError, DensityGrid, GridSpec};
use crate::economics::{self, CostReport};
use crate::nr::{Numerology, NrConfig};
use crate::opencellid::{CellRecord, IngestError};

/// Label attached to every report: the link budget models one unspecified direction.
pub const LINK_DIRECTION: &str = "direction-agnostic (single worst-link budget)";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error("writing output {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl PipelineError {
    /// 2 for input or configuration faults, 3 when the radio model itself is infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Balance(
                BalanceError::LoadTooHigh { .. }
                | BalanceError::Coverage(CoverageError::NegativeMapl(_) | CoverageError::OutOfBracket { .. })
                | BalanceError::Capacity(CapacityError::ZeroSubscribers { .. }),
            ) => 3,
            _ => 2,
        }
    }
}

/// Density raster plus the selected deployment area.
#[derive(Debug, Clone)]
pub struct DensityOutcome {
    pub grid: DensityGrid,
    pub area: DeploymentArea,
}

pub fn locate_deployment_area(records: &[CellRecord], spec: &GridSpec, window: Window) -> Result<DensityOutcome, DensityError> {
    let grid = density::bin(records, spec);
    let area = density::find_5gda(&grid, window.w_cols, window.h_rows)?;
    Ok(DensityOutcome { grid, area })
}

/// Balanced dimensioning and cost of one area of known subscriber density.
pub fn dimension_area(cfg: &ValidatedConfig, rho: f64, area_km2: f64) -> Result<(DimensioningResult, CostReport), BalanceError> {
    let run = &cfg.run;
    let result = balance::iterate_balance(
        &run.link_budget,
        &run.propagation,
        cfg.nr.carrier_mhz(),
        &cfg.nr,
        &run.traffic,
        rho,
        area_km2,
        &run.balance,
    )?;
    let cost = economics::cost_report(
        result.n_sites_final,
        result.cell_capacity_mbps,
        result.utilization,
        &run.cost,
        run.cost.duty_fraction,
    );
    Ok((result, cost))
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub density: DensityOutcome,
    pub rho: f64,
    pub result: DimensioningResult,
    pub cost: CostReport,
}

pub fn plan(records: &[CellRecord], cfg: &ValidatedConfig) -> Result<PlanOutcome, PipelineError> {
    let spec = cfg.run.grid.resolve(records)?;
    let density = locate_deployment_area(records, &spec, cfg.run.window)?;
    let rho = density::subscriber_density(&density.area, cfg.run.traffic.subs_per_weight)?;
    log::info!(
        "5GDA at col {} row {}: weight {} over {} km2, rho {rho:.3}/km2",
        density.area.col0,
        density.area.row0,
        density.area.total_weight,
        density.area.area_km2
    );
    let (result, cost) = dimension_area(cfg, rho, density.area.area_km2)?;
    Ok(PlanOutcome { density, rho, result, cost })
}

/// Hexagonal site centres with pitch `√3·R`, anchored at the area's south-west
/// corner, keeping centres that fall inside the area. Coordinates in km on
/// the grid plane.
pub fn site_lattice(width_km: f64, height_km: f64, radius_km: f64) -> Vec<(f64, f64)> {
    let pitch = 3f64.sqrt() * radius_km;
    let row_step = 1.5 * radius_km;
    let mut sites = Vec::new();
    if !(radius_km > 0.0 && radius_km.is_finite()) {
        return sites;
    }
    let eps = 1e-9 * width_km.max(height_km).max(1.0);
    let mut row = 0usize;
    loop {
        let y = row as f64 * row_step;
        if y > height_km + eps {
            break;
        }
        let offset = if row % 2 == 1 { pitch / 2.0 } else { 0.0 };
        let mut col = 0usize;
        loop {
            let x = offset + col as f64 * pitch;
            if x > width_km + eps {
                break;
            }
            sites.push((x, y));
            col += 1;
        }
        row += 1;
    }
    sites
}

pub fn sites_geojson(spec: &GridSpec, area: &DeploymentArea, radius_km: f64) -> Value {
    let (x0, y0) = area.origin_km(spec);
    let width = area.w_cols as f64 * spec.tile_km;
    let height = area.h_rows as f64 * spec.tile_km;
    let features: Vec<Value> = site_lattice(width, height, radius_km)
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let (lon, lat) = density::unproject(x0 + x, y0 + y, spec);
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [lon, lat] },
                "properties": { "site": i, "radius_km": radius_km, "cell_area_km2": HEX_AREA_FACTOR * radius_km * radius_km },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

/// Numerology of one configured BWP, as echoed in the summary.
#[derive(Debug, Clone, Serialize)]
pub struct NumerologyRow {
    pub purpose: String,
    pub mu: u8,
    pub scs_khz: f64,
    pub slot_ms: f64,
    pub bw_mhz: f64,
    pub n_prb: u32,
}

/// Note carried in every summary about how subcarrier spacing is derived.
pub const SCS_NOTE: &str = "subcarrier spacing is generated as 15*2^mu kHz, so mu=1 is 30 kHz; \
tabulations printing 20 kHz for mu=1 disagree with the 1 ms / 2^mu slot scaling and are not followed";

pub fn numerology_rows(nr: &NrConfig) -> Vec<NumerologyRow> {
    nr.bwps
        .iter()
        .map(|b| NumerologyRow {
            purpose: b.purpose.clone(),
            mu: b.mu.mu(),
            scs_khz: b.mu.scs_khz(),
            slot_ms: b.mu.slot_ms(),
            bw_mhz: b.bw_mhz,
            n_prb: b.n_prb,
        })
        .collect()
}

/// `(mu, scs_khz, slot_ms)` for every supported numerology.
pub fn numerology_table() -> Vec<(u8, f64, f64)> {
    Numerology::all().map(|m| (m.mu(), m.scs_khz(), m.slot_ms())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts_and_spacing() {
        let sites = site_lattice(7.0, 7.0, 1.0);
        assert_eq!(sites[0], (0.0, 0.0));
        let pitch = 3f64.sqrt();
        // rows at y = 0, 1.5, ..., 6.0; even rows hold 5 points, odd rows 4
        assert_eq!(sites.len(), 5 * 3 + 4 * 2);
        for (i, a) in sites.iter().enumerate() {
            for b in &sites[i + 1..] {
                let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                assert!(d >= pitch - 1e-9);
            }
        }
        assert_eq!(site_lattice(0.5, 0.5, 10.0), vec![(0.0, 0.0)]);
        assert!(site_lattice(1.0, 1.0, f64::INFINITY).is_empty());
    }

    #[test]
    fn numerology_rows_follow_formula() {
        let t = numerology_table();
        assert_eq!(t.iter().map(|r| r.1).collect::<Vec<_>>(), vec![15.0, 30.0, 60.0, 120.0, 240.0]);
        assert_eq!(t.iter().map(|r| r.2).collect::<Vec<_>>(), vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
    }
}
