//! Cost per delivered bit.
//!
//! Site cost is straight-line amortized CAPEX plus yearly OPEX. Delivered
//! bits follow from deployed capacity, its utilization, and the share of the
//! year the network runs at that utilization.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balance::DimensioningResult;

pub const SECONDS_PER_YEAR: f64 = 31_536_000.0;
pub const DEFAULT_DUTY_FRACTION: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomicsError {
    #[error("no traffic delivered: cost per bit undefined")]
    ZeroTraffic,
    #[error("cost per bit undefined for the {0} area")]
    UndefinedCost(&'static str),
    #[error("invalid cost model: {0}")]
    BadCostModel(String),
}

fn default_amortization() -> f64 {
    10.0
}

fn default_duty() -> f64 {
    DEFAULT_DUTY_FRACTION
}

fn default_multiplier() -> f64 {
    1.0
}

/// Per-site cost assumptions (the `"cost"` config section).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub capex_per_site: f64,
    #[serde(default = "default_amortization")]
    pub capex_amortization_years: f64,
    pub opex_per_site_per_year: f64,
    /// Share of the year carrying busy-hour utilization.
    #[serde(default = "default_duty")]
    pub duty_fraction: f64,
    /// Scales both CAPEX and OPEX for the area being planned.
    #[serde(default = "default_multiplier")]
    pub area_multiplier: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            capex_per_site: 100_000.0,
            capex_amortization_years: default_amortization(),
            opex_per_site_per_year: 10_000.0,
            duty_fraction: DEFAULT_DUTY_FRACTION,
            area_multiplier: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), EconomicsError> {
        let bad = |m: &str| Err(EconomicsError::BadCostModel(m.to_string()));
        if !(self.capex_per_site >= 0.0) || !(self.opex_per_site_per_year >= 0.0) {
            return bad("costs must be >= 0");
        }
        if !(self.capex_amortization_years > 0.0) {
            return bad("capex_amortization_years must be > 0");
        }
        if !(self.duty_fraction > 0.0 && self.duty_fraction <= 1.0) {
            return bad("duty_fraction must be in (0, 1]");
        }
        if !(self.area_multiplier > 0.0) {
            return bad("area_multiplier must be > 0");
        }
        Ok(())
    }
}

/// `n * (capex / years + opex)`, scaled by the area multiplier.
pub fn annual_cost(n_sites: u64, cost: &CostModel) -> f64 {
    n_sites as f64 * (cost.capex_per_site / cost.capex_amortization_years + cost.opex_per_site_per_year) * cost.area_multiplier
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub annual_cost: f64,
    pub annual_bits: f64,
    /// Absent when no traffic is delivered.
    pub cost_per_bit: Option<f64>,
    pub mean_utilization: f64,
}

/// Bits per year delivered by `n_sites` cells of `capacity_mbps`.
pub fn annual_bits(n_sites: u64, capacity_mbps: f64, utilization: f64, duty_fraction: f64) -> f64 {
    n_sites as f64 * capacity_mbps * 1e6 * utilization * duty_fraction * SECONDS_PER_YEAR
}

/// Cost report for a plan. Fails with [`EconomicsError::ZeroTraffic`] when no
/// bits are delivered; use [`cost_report`] to get the report with
/// `cost_per_bit` absent instead.
pub fn cost_per_bit(
    result: &DimensioningResult,
    capacity_mbps: f64,
    cost: &CostModel,
    duty_fraction: f64,
) -> Result<CostReport, EconomicsError> {
    let report = cost_report(result.n_sites_final, capacity_mbps, result.utilization, cost, duty_fraction);
    match report.cost_per_bit {
        Some(_) => Ok(report),
        None => Err(EconomicsError::ZeroTraffic),
    }
}

pub fn cost_report(n_sites: u64, capacity_mbps: f64, utilization: f64, cost: &CostModel, duty_fraction: f64) -> CostReport {
    let annual_cost = annual_cost(n_sites, cost);
    let annual_bits = annual_bits(n_sites, capacity_mbps, utilization, duty_fraction);
    CostReport {
        annual_cost,
        annual_bits,
        cost_per_bit: (annual_bits > 0.0).then(|| annual_cost / annual_bits),
        mean_utilization: utilization,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheaperArea {
    Dense,
    Sparse,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaComparison {
    pub cheaper: CheaperArea,
    /// `cost_per_bit(sparse) / cost_per_bit(dense)`.
    pub ratio: f64,
}

pub fn compare_areas(dense: &CostReport, sparse: &CostReport) -> Result<AreaComparison, EconomicsError> {
    let d = dense.cost_per_bit.ok_or(EconomicsError::UndefinedCost("dense"))?;
    let s = sparse.cost_per_bit.ok_or(EconomicsError::UndefinedCost("sparse"))?;
    let cheaper = match d.partial_cmp(&s) {
        Some(Ordering::Less) => CheaperArea::Dense,
        Some(Ordering::Greater) => CheaperArea::Sparse,
        _ => CheaperArea::Equal,
    };
    Ok(AreaComparison { cheaper, ratio: s / d })
}
