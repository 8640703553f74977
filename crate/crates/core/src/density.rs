//! Traffic-density raster and 5G deployment-area (5GDA) search.
//!
//! Towers are projected onto a local kilometre plane anchored at the grid's
//! south-west corner and binned into square tiles, each accumulating the
//! `samples` weight of the towers it contains. The deployment area is the
//! fixed-size rectangular window with the largest total weight, found with a
//! summed-area table.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::opencellid::CellRecord;

/// Mean Earth radius (IUGG), kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Upper bound on the number of tiles in one grid.
pub const MAX_TILES: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("window {w_cols}x{h_rows} does not fit grid {n_cols}x{n_rows}")]
    WindowTooLarge {
        w_cols: usize,
        h_rows: usize,
        n_cols: usize,
        n_rows: usize,
    },
    #[error("subscribers-per-weight scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("deployment area must be positive, got {0} km2")]
    EmptyArea(f64),
}

fn default_tile_km() -> f64 {
    1.0
}

/// Raster geometry. Row 0 is the southern-most row, column 0 the western-most.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_lon: f64,
    pub origin_lat: f64,
    #[serde(default = "default_tile_km")]
    pub tile_km: f64,
    pub n_cols: usize,
    pub n_rows: usize,
}

impl GridSpec {
    pub fn new(origin_lon: f64, origin_lat: f64, tile_km: f64, n_cols: usize, n_rows: usize) -> Result<Self, DensityError> {
        let spec = GridSpec {
            origin_lon,
            origin_lat,
            tile_km,
            n_cols,
            n_rows,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if !(self.tile_km > 0.0 && self.tile_km.is_finite()) {
            return Err(DensityError::BadGrid(format!("tile_km must be > 0, got {}", self.tile_km)));
        }
        if self.n_cols == 0 || self.n_rows == 0 {
            return Err(DensityError::BadGrid("grid needs at least one row and one column".into()));
        }
        if (self.n_cols as u64).saturating_mul(self.n_rows as u64) > MAX_TILES {
            return Err(DensityError::BadGrid(format!(
                "{}x{} tiles exceeds the {MAX_TILES} tile limit",
                self.n_cols, self.n_rows
            )));
        }
        if !(-180.0..=180.0).contains(&self.origin_lon) || !(-90.0..90.0).contains(&self.origin_lat) {
            return Err(DensityError::BadGrid("origin outside lon/lat bounds".into()));
        }
        Ok(())
    }

    /// Smallest grid anchored at the records' south-west extreme that holds every record.
    pub fn covering(records: &[CellRecord], tile_km: f64) -> Option<GridSpec> {
        let min_lon = records.iter().map(|r| r.lon).reduce(f64::min)?;
        let min_lat = records.iter().map(|r| r.lat).reduce(f64::min)?;
        let mut spec = GridSpec {
            origin_lon: min_lon,
            origin_lat: min_lat,
            tile_km,
            n_cols: 1,
            n_rows: 1,
        };
        for r in records {
            let (x, y) = project(r.lon, r.lat, &spec);
            spec.n_cols = spec.n_cols.max((x / tile_km).floor() as usize + 1);
            spec.n_rows = spec.n_rows.max((y / tile_km).floor() as usize + 1);
        }
        Some(spec)
    }

    pub fn width_km(&self) -> f64 {
        self.n_cols as f64 * self.tile_km
    }

    pub fn height_km(&self) -> f64 {
        self.n_rows as f64 * self.tile_km
    }

    /// Tile containing a projected point, if it lies inside the grid.
    pub fn tile_of(&self, x_km: f64, y_km: f64) -> Option<(usize, usize)> {
        let col = (x_km / self.tile_km).floor();
        let row = (y_km / self.tile_km).floor();
        if col >= 0.0 && row >= 0.0 && (col as usize) < self.n_cols && (row as usize) < self.n_rows {
            Some((col as usize, row as usize))
        } else {
            None
        }
    }
}

/// Local equirectangular projection relative to the grid origin, in kilometres.
///
/// ```
/// use gnbdim::density::{project, GridSpec};
///
/// let spec = GridSpec::new(10.0, 0.0, 1.0, 10, 10).unwrap();
/// let (x, y) = project(10.01, 0.0, &spec);
/// assert!((x - 1.11195).abs() < 1e-5);
/// assert_eq!(y, 0.0);
/// ```
pub fn project(lon: f64, lat: f64, spec: &GridSpec) -> (f64, f64) {
    let k = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
    let x = k * (lon - spec.origin_lon) * spec.origin_lat.to_radians().cos();
    let y = k * (lat - spec.origin_lat);
    (x, y)
}

/// Inverse of [`project`].
pub fn unproject(x_km: f64, y_km: f64, spec: &GridSpec) -> (f64, f64) {
    let k = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
    let lon = spec.origin_lon + x_km / (k * spec.origin_lat.to_radians().cos());
    let lat = spec.origin_lat + y_km / k;
    (lon, lat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    weight: Vec<f64>,
    towers: Vec<u64>,
    /// Records that projected outside the grid.
    pub out_of_grid: u64,
}

impl DensityGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.n_cols * spec.n_rows;
        DensityGrid {
            spec,
            weight: vec![0.0; n],
            towers: vec![0; n],
            out_of_grid: 0,
        }
    }

    /// Builds a grid from row-major weights, `rows[row][col]`, row 0 southern-most.
    pub fn from_weights(rows: &[Vec<f64>]) -> Result<Self, DensityError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(DensityError::BadGrid("ragged weight matrix".into()));
        }
        if rows.iter().flatten().any(|w| !(*w >= 0.0)) {
            return Err(DensityError::BadGrid("weights must be non-negative".into()));
        }
        let spec = GridSpec::new(0.0, 0.0, 1.0, n_cols, n_rows)?;
        let mut grid = DensityGrid::zeros(spec);
        grid.weight = rows.iter().flatten().copied().collect();
        Ok(grid)
    }

    fn idx(&self, col: usize, row: usize) -> usize {
        row * self.spec.n_cols + col
    }

    pub fn weight(&self, col: usize, row: usize) -> f64 {
        self.weight[self.idx(col, row)]
    }

    pub fn towers(&self, col: usize, row: usize) -> u64 {
        self.towers[self.idx(col, row)]
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn total_towers(&self) -> u64 {
        self.towers.iter().sum()
    }

    /// Brute-force window sum; used for checks and small grids.
    pub fn window_sum(&self, col0: usize, row0: usize, w_cols: usize, h_rows: usize) -> f64 {
        (row0..row0 + h_rows)
            .flat_map(|r| (col0..col0 + w_cols).map(move |c| (c, r)))
            .map(|(c, r)| self.weight(c, r))
            .sum()
    }

    /// `row,col,weight,towers`, one line per tile, south-west first.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "weight", "towers"])?;
        for row in 0..self.spec.n_rows {
            for col in 0..self.spec.n_cols {
                w.write_record([
                    row.to_string(),
                    col.to_string(),
                    self.weight(col, row).to_string(),
                    self.towers(col, row).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// FeatureCollection of tile polygons carrying `row`, `col`, `weight`, `towers`.
    pub fn to_geojson(&self) -> Value {
        let t = self.spec.tile_km;
        let mut features = Vec::with_capacity(self.weight.len());
        for row in 0..self.spec.n_rows {
            for col in 0..self.spec.n_cols {
                let ring = rect_ring(&self.spec, col as f64 * t, row as f64 * t, t, t);
                features.push(json!({
                    "type": "Feature",
                    "geometry": { "type": "Polygon", "coordinates": [ring] },
                    "properties": {
                        "row": row,
                        "col": col,
                        "weight": self.weight(col, row),
                        "towers": self.towers(col, row),
                    },
                }));
            }
        }
        json!({ "type": "FeatureCollection", "features": features })
    }
}

fn rect_ring(spec: &GridSpec, x0: f64, y0: f64, w: f64, h: f64) -> Vec<[f64; 2]> {
    [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h), (x0, y0)]
        .iter()
        .map(|&(x, y)| {
            let (lon, lat) = unproject(x, y, spec);
            [lon, lat]
        })
        .collect()
}

/// Accumulates each in-grid record's `samples` (and one tower) into its tile.
pub fn bin(records: &[CellRecord], spec: &GridSpec) -> DensityGrid {
    let mut grid = DensityGrid::zeros(*spec);
    for r in records {
        let (x, y) = project(r.lon, r.lat, spec);
        match spec.tile_of(x, y) {
            Some((col, row)) => {
                let i = grid.idx(col, row);
                grid.weight[i] += r.samples as f64;
                grid.towers[i] += 1;
            }
            None => grid.out_of_grid += 1,
        }
    }
    grid
}

/// A window of the grid selected for deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentArea {
    pub col0: usize,
    pub row0: usize,
    pub w_cols: usize,
    pub h_rows: usize,
    pub total_weight: f64,
    pub area_km2: f64,
}

impl DeploymentArea {
    /// South-west corner of the window on the grid's kilometre plane.
    pub fn origin_km(&self, spec: &GridSpec) -> (f64, f64) {
        (self.col0 as f64 * spec.tile_km, self.row0 as f64 * spec.tile_km)
    }

    pub fn to_geojson(&self, spec: &GridSpec) -> Value {
        let (x0, y0) = self.origin_km(spec);
        let ring = rect_ring(spec, x0, y0, self.w_cols as f64 * spec.tile_km, self.h_rows as f64 * spec.tile_km);
        json!({
            "type": "Feature",
            "geometry": { "type": "Polygon", "coordinates": [ring] },
            "properties": {
                "col0": self.col0,
                "row0": self.row0,
                "w_cols": self.w_cols,
                "h_rows": self.h_rows,
                "total_weight": self.total_weight,
                "area_km2": self.area_km2,
            },
        })
    }
}

/// Finds the `w_cols`×`h_rows` window with the largest total weight.
///
/// Ties go to the smallest `row0`, then the smallest `col0`.
pub fn find_5gda(grid: &DensityGrid, w_cols: usize, h_rows: usize) -> Result<DeploymentArea, DensityError> {
    let (n_cols, n_rows) = (grid.spec.n_cols, grid.spec.n_rows);
    if w_cols == 0 || h_rows == 0 || w_cols > n_cols || h_rows > n_rows {
        return Err(DensityError::WindowTooLarge {
            w_cols,
            h_rows,
            n_cols,
            n_rows,
        });
    }
    // sat[(r, c)] = sum of weights in rows < r, cols < c
    let stride = n_cols + 1;
    let mut sat = vec![0.0f64; (n_rows + 1) * stride];
    for r in 0..n_rows {
        let mut row_sum = 0.0;
        for c in 0..n_cols {
            row_sum += grid.weight(c, r);
            sat[(r + 1) * stride + c + 1] = sat[r * stride + c + 1] + row_sum;
        }
    }
    let window = |c: usize, r: usize| {
        sat[(r + h_rows) * stride + c + w_cols] - sat[r * stride + c + w_cols] - sat[(r + h_rows) * stride + c]
            + sat[r * stride + c]
    };

    let mut best = (0, 0, f64::NEG_INFINITY);
    for r in 0..=n_rows - h_rows {
        for c in 0..=n_cols - w_cols {
            let s = window(c, r);
            if s > best.2 {
                best = (c, r, s);
            }
        }
    }
    let (col0, row0, total_weight) = best;
    Ok(DeploymentArea {
        col0,
        row0,
        w_cols,
        h_rows,
        total_weight,
        area_km2: (w_cols * h_rows) as f64 * grid.spec.tile_km * grid.spec.tile_km,
    })
}

/// Subscribers per km² inside a deployment area.
pub fn subscriber_density(area: &DeploymentArea, subs_per_weight: f64) -> Result<f64, DensityError> {
    if !(subs_per_weight > 0.0) {
        return Err(DensityError::NonPositiveScale(subs_per_weight));
    }
    if !(area.area_km2 > 0.0) {
        return Err(DensityError::EmptyArea(area.area_km2));
    }
    Ok(area.total_weight * subs_per_weight / area.area_km2)
}
