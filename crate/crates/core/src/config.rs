//! The single JSON run configuration.
//!
//! One document carries every section (`nr`, `link_budget`, `propagation`,
//! `traffic`, `balance`, `cost`, `grid`) plus the run's input, output and
//! window settings. Every section is validated by its owning module before
//! anything is computed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balance::BalanceThresholds;
use crate::coverage::{LinkBudget, PropagationModel};
use crate::capacity::TrafficModel;
use crate::density::{GridSpec, DensityError};
use crate::economics::CostModel;
use crate::nr::{NrConfig, NrSection};
use crate::opencellid::{CellRecord, Filters};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("config section {section}: {message}")]
    Invalid { section: &'static str, message: String },
}

fn invalid(section: &'static str, e: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        section,
        message: e.to_string(),
    }
}

/// Deployment-area window in tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub w_cols: usize,
    pub h_rows: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window { w_cols: 7, h_rows: 7 }
    }
}

impl FromStr for Window {
    type Err = String;

    /// `WxH`, e.g. `7x7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("window must look like WxH, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad window {s:?}: {e}"));
        Ok(Window {
            w_cols: parse(w)?,
            h_rows: parse(h)?,
        })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.w_cols, self.h_rows)
    }
}

fn default_tile_km() -> f64 {
    1.0
}

/// Grid geometry. Any of origin/size left out is fitted to the records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_lat: Option<f64>,
    #[serde(default = "default_tile_km")]
    pub tile_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rows: Option<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            origin_lon: None,
            origin_lat: None,
            tile_km: default_tile_km(),
            n_cols: None,
            n_rows: None,
        }
    }
}

impl GridSection {
    /// Resolves the grid for a record set: explicit values win, the rest is
    /// fitted so every record lands inside.
    pub fn resolve(&self, records: &[CellRecord]) -> Result<GridSpec, DensityError> {
        if !(self.tile_km > 0.0) {
            return Err(DensityError::BadGrid(format!("tile_km must be > 0, got {}", self.tile_km)));
        }
        let fitted = GridSpec::covering(records, self.tile_km);
        let origin_lon = self.origin_lon.or(fitted.map(|f| f.origin_lon));
        let origin_lat = self.origin_lat.or(fitted.map(|f| f.origin_lat));
        let (Some(origin_lon), Some(origin_lat)) = (origin_lon, origin_lat) else {
            return Err(DensityError::BadGrid("no records to fit the grid origin to".into()));
        };
        let mut spec = GridSpec {
            origin_lon,
            origin_lat,
            tile_km: self.tile_km,
            n_cols: 1,
            n_rows: 1,
        };
        if self.n_cols.is_none() || self.n_rows.is_none() {
            for r in records {
                let (x, y) = crate::density::project(r.lon, r.lat, &spec);
                if x >= 0.0 {
                    spec.n_cols = spec.n_cols.max((x / spec.tile_km).floor() as usize + 1);
                }
                if y >= 0.0 {
                    spec.n_rows = spec.n_rows.max((y / spec.tile_km).floor() as usize + 1);
                }
            }
        }
        spec.n_cols = self.n_cols.unwrap_or(spec.n_cols);
        spec.n_rows = self.n_rows.unwrap_or(spec.n_rows);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub window: Window,
    #[serde(default)]
    pub filters: Filters,
    #[serde(default)]
    pub grid: GridSection,
    pub nr: NrSection,
    pub link_budget: LinkBudget,
    pub propagation: PropagationModel,
    pub traffic: TrafficModel,
    #[serde(default)]
    pub balance: BalanceThresholds,
    #[serde(default)]
    pub cost: CostModel,
}

/// A configuration whose sections have all passed validation.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub run: RunConfig,
    pub nr: NrConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let cfg = serde_json::from_slice(&bytes).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        Ok((cfg, bytes))
    }

    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        let nr = NrConfig::from_section(&self.nr).map_err(|e| invalid("nr", e))?;
        self.link_budget.validate().map_err(|e| invalid("link_budget", e))?;
        self.propagation.validate().map_err(|e| invalid("propagation", e))?;
        self.traffic.validate().map_err(|e| invalid("traffic", e))?;
        self.balance.validate().map_err(|e| invalid("balance", e))?;
        self.cost.validate().map_err(|e| invalid("cost", e))?;
        self.filters.validate().map_err(|e| invalid("filters", e))?;
        if !(self.grid.tile_km > 0.0) {
            return Err(invalid("grid", "tile_km must be > 0"));
        }
        if self.window.w_cols == 0 || self.window.h_rows == 0 {
            return Err(invalid("window", "window must be at least 1x1"));
        }
        Ok(ValidatedConfig { run: self, nr })
    }
}
