//! Link budget analysis and coverage-limited cell range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Area of a regular hexagon with unit circumradius, `3√3/2`.
pub const HEX_AREA_FACTOR: f64 = 2.598_076_211_353_316;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Bisection bracket for the coverage radius, km.
pub const MIN_RADIUS_KM: f64 = 0.01;
pub const MAX_RADIUS_KM: f64 = 100.0;

const RADIUS_REL_TOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverageError {
    #[error("bandwidth must be positive, got {0} Hz")]
    NonPositiveBandwidth(f64),
    #[error("NegativeMapl: link budget infeasible, MAPL {0:.2} dB is negative")]
    NegativeMapl(f64),
    #[error("distance and frequency must be positive (d={d_km} km, f={f_mhz} MHz)")]
    NonPositiveDistance { d_km: f64, f_mhz: f64 },
    #[error("OutOfBracket: MAPL {mapl_db:.2} dB unreachable within [{MIN_RADIUS_KM}, {MAX_RADIUS_KM}] km")]
    OutOfBracket { mapl_db: f64 },
    #[error("invalid link budget: {0}")]
    BadLinkBudget(String),
    #[error("invalid propagation model: {0}")]
    BadModel(String),
}

/// Which bandwidth the receiver noise floor is computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityBandwidth {
    /// One PRB of the cell-edge BWP.
    #[default]
    OnePrb,
    /// The whole occupied bandwidth of the cell-edge BWP.
    FullBwp,
}

/// Direction-agnostic single-link budget; all terms in dB/dBm/dBi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    #[serde(default)]
    pub tx_antenna_gain_dbi: f64,
    #[serde(default)]
    pub tx_losses_db: f64,
    #[serde(default)]
    pub rx_antenna_gain_dbi: f64,
    #[serde(default)]
    pub rx_losses_db: f64,
    pub noise_figure_db: f64,
    /// Cell-edge service target.
    pub required_sinr_db: f64,
    #[serde(default)]
    pub shadow_margin_db: f64,
    #[serde(default)]
    pub penetration_margin_db: f64,
    /// Set from the assumed cell load during balancing; not read from config.
    #[serde(skip)]
    pub interference_margin_db: f64,
    #[serde(default)]
    pub sensitivity_bandwidth: SensitivityBandwidth,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<(), CoverageError> {
        let fields = [
            self.tx_power_dbm,
            self.tx_antenna_gain_dbi,
            self.tx_losses_db,
            self.rx_antenna_gain_dbi,
            self.rx_losses_db,
            self.noise_figure_db,
            self.required_sinr_db,
            self.shadow_margin_db,
            self.penetration_margin_db,
            self.interference_margin_db,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(CoverageError::BadLinkBudget("non-finite term".into()));
        }
        if self.noise_figure_db < 0.0 {
            return Err(CoverageError::BadLinkBudget("noise figure must be >= 0".into()));
        }
        if self.shadow_margin_db < 0.0 || self.penetration_margin_db < 0.0 || self.interference_margin_db < 0.0 {
            return Err(CoverageError::BadLinkBudget("margins must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_interference_margin(mut self, margin_db: f64) -> Self {
        self.interference_margin_db = margin_db;
        self
    }
}

/// Thermal noise floor: `-174 + 10 log10(bw) + NF`.
pub fn noise_floor_dbm(bw_hz: f64, noise_figure_db: f64) -> Result<f64, CoverageError> {
    if !(bw_hz > 0.0) {
        return Err(CoverageError::NonPositiveBandwidth(bw_hz));
    }
    Ok(THERMAL_NOISE_DBM_HZ + 10.0 * bw_hz.log10() + noise_figure_db)
}

/// Maximum allowed path loss over a receiver bandwidth of `bw_hz`.
///
/// ```
/// use gnbdim::coverage::{mapl, LinkBudget};
///
/// let link = LinkBudget {
///     tx_power_dbm: 43.0,
///     tx_antenna_gain_dbi: 17.0,
///     tx_losses_db: 3.0,
///     rx_antenna_gain_dbi: 0.0,
///     rx_losses_db: 0.0,
///     noise_figure_db: 7.0,
///     required_sinr_db: -1.0,
///     shadow_margin_db: 8.0,
///     penetration_margin_db: 0.0,
///     interference_margin_db: 0.0,
///     sensitivity_bandwidth: Default::default(),
/// };
/// let m = mapl(&link, 360e3).unwrap();
/// assert!((m - 161.44).abs() < 0.01);
/// ```
pub fn mapl(link: &LinkBudget, bw_hz: f64) -> Result<f64, CoverageError> {
    link.validate()?;
    let sensitivity = noise_floor_dbm(bw_hz, link.noise_figure_db)? + link.required_sinr_db;
    let m = link.tx_power_dbm + link.tx_antenna_gain_dbi - link.tx_losses_db + link.rx_antenna_gain_dbi
        - link.rx_losses_db
        - sensitivity
        - link.shadow_margin_db
        - link.penetration_margin_db
        - link.interference_margin_db;
    if m < 0.0 {
        return Err(CoverageError::NegativeMapl(m));
    }
    Ok(m)
}

/// Distance-dependent path loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropagationModel {
    /// Friis free space: `32.45 + 20 log10(f_MHz) + 20 log10(d_km)`.
    FreeSpace,
    /// Alpha-beta-gamma close-in fit:
    /// `beta + alpha log10(d / 1 m) + 10 gamma log10(f / 1 GHz)`.
    Abg { alpha: f64, beta_db: f64, gamma: f64 },
}

impl PropagationModel {
    pub fn validate(&self) -> Result<(), CoverageError> {
        match *self {
            PropagationModel::FreeSpace => Ok(()),
            PropagationModel::Abg { alpha, beta_db, gamma } => {
                if !(alpha > 0.0) || !(gamma >= 0.0) || !beta_db.is_finite() || !alpha.is_finite() || !gamma.is_finite() {
                    Err(CoverageError::BadModel(format!(
                        "ABG needs alpha > 0 and gamma >= 0 (alpha={alpha}, gamma={gamma})"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

pub fn path_loss_db(model: &PropagationModel, f_mhz: f64, d_km: f64) -> Result<f64, CoverageError> {
    if !(d_km > 0.0 && f_mhz > 0.0) {
        return Err(CoverageError::NonPositiveDistance { d_km, f_mhz });
    }
    Ok(match *model {
        PropagationModel::FreeSpace => 32.45 + 20.0 * f_mhz.log10() + 20.0 * d_km.log10(),
        PropagationModel::Abg { alpha, beta_db, gamma } => {
            beta_db + alpha * (d_km * 1000.0).log10() + gamma * 10.0 * (f_mhz / 1000.0).log10()
        }
    })
}

/// Distance at which the model's path loss equals `mapl_db`, by bisection on
/// `[MIN_RADIUS_KM, MAX_RADIUS_KM]`.
pub fn invert_to_radius(model: &PropagationModel, f_mhz: f64, mapl_db: f64) -> Result<f64, CoverageError> {
    model.validate()?;
    let excess = |d: f64| path_loss_db(model, f_mhz, d).map(|pl| pl - mapl_db);
    let (mut lo, mut hi) = (MIN_RADIUS_KM, MAX_RADIUS_KM);
    if !(excess(lo)? <= 0.0 && excess(hi)? >= 0.0) {
        return Err(CoverageError::OutOfBracket { mapl_db });
    }
    for _ in 0..MAX_BISECTIONS {
        // geometric midpoint: path loss is affine in log d
        let mid = (lo * hi).sqrt();
        if excess(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= RADIUS_REL_TOL * lo {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hexagonal cell area for a circumradius.
pub fn hex_cell_area_km2(radius_km: f64) -> f64 {
    HEX_AREA_FACTOR * radius_km * radius_km
}

/// Omni sites needed to tile `area_km2` with hexagons of `radius_km`.
pub fn sites_for_coverage(area_km2: f64, radius_km: f64) -> u64 {
    (area_km2 / hex_cell_area_km2(radius_km)).ceil().max(1.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageResult {
    pub mapl_db: f64,
    pub radius_km: f64,
    pub cell_area_km2: f64,
    pub n_sites_coverage: u64,
}

/// Full coverage leg: MAPL, radius and site count for a deployment area.
pub fn dimension_coverage(
    link: &LinkBudget,
    bw_hz: f64,
    model: &PropagationModel,
    f_mhz: f64,
    area_km2: f64,
) -> Result<CoverageResult, CoverageError> {
    let mapl_db = mapl(link, bw_hz)?;
    let radius_km = invert_to_radius(model, f_mhz, mapl_db)?;
    Ok(CoverageResult {
        mapl_db,
        radius_km,
        cell_area_km2: hex_cell_area_km2(radius_km),
        n_sites_coverage: sites_for_coverage(area_km2, radius_km),
    })
}
