//! NR numerology, channel bandwidths and bandwidth parts.
//!
//! Numerology `mu` selects a subcarrier spacing of `15 * 2^mu` kHz and a slot
//! of `1 / 2^mu` ms. A bandwidth part (BWP) is a contiguous run of PRBs of one
//! numerology; the PRB count for a BWP is derived from its bandwidth after a
//! guard fraction, unless an explicit override is configured.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Subcarriers per physical resource block.
pub const SUBCARRIERS_PER_PRB: u32 = 12;

pub const FR1_BANDWIDTHS_MHZ: [f64; 13] = [5., 10., 15., 20., 25., 30., 40., 50., 60., 70., 80., 90., 100.];
pub const FR2_BANDWIDTHS_MHZ: [f64; 4] = [50., 100., 200., 400.];

pub const DEFAULT_GUARD_FRACTION: f64 = 0.1;
pub const DEFAULT_SYMBOLS_PER_SLOT: u32 = 14;

/// FR1 ends at this carrier frequency, inclusive.
pub const FR1_MAX_GHZ: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NrError {
    #[error("numerology mu={0} outside 0..=4")]
    BadMu(i64),
    #[error("{bw_mhz} MHz is not a supported {fr} channel bandwidth")]
    UnsupportedBandwidth { fr: FrequencyRange, bw_mhz: f64 },
    #[error("no PRB fits in {bw_mhz} MHz at mu={mu} with guard fraction {guard_fraction}")]
    NoPrbFits { bw_mhz: f64, mu: u8, guard_fraction: f64 },
    #[error("guard fraction must be in [0, 1), got {0}")]
    BadGuard(f64),
    #[error("carrier {carrier_ghz} GHz is not in {fr}")]
    CarrierMismatch { fr: FrequencyRange, carrier_ghz: f64 },
    #[error("invalid NR configuration: {0}")]
    BadConfig(String),
}

/// Numerology index `mu` in `0..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Numerology(u8);

impl Numerology {
    pub const MAX: u8 = 4;

    pub fn new(mu: i64) -> Result<Self, NrError> {
        if (0..=i64::from(Self::MAX)).contains(&mu) {
            Ok(Numerology(mu as u8))
        } else {
            Err(NrError::BadMu(mu))
        }
    }

    pub fn all() -> impl Iterator<Item = Numerology> {
        (0..=Self::MAX).map(Numerology)
    }

    pub fn mu(self) -> u8 {
        self.0
    }

    pub fn scs_khz(self) -> f64 {
        15.0 * f64::from(1u32 << self.0)
    }

    pub fn scs_hz(self) -> f64 {
        self.scs_khz() * 1e3
    }

    pub fn slot_ms(self) -> f64 {
        1.0 / f64::from(1u32 << self.0)
    }

    /// Bandwidth of one PRB.
    pub fn prb_hz(self) -> f64 {
        f64::from(SUBCARRIERS_PER_PRB) * self.scs_hz()
    }
}

impl TryFrom<i64> for Numerology {
    type Error = NrError;

    fn try_from(mu: i64) -> Result<Self, Self::Error> {
        Numerology::new(mu)
    }
}

impl From<Numerology> for u8 {
    fn from(n: Numerology) -> u8 {
        n.0
    }
}

/// Subcarrier spacing in kHz: `15 * 2^mu`.
pub fn scs_khz(mu: i64) -> Result<f64, NrError> {
    Ok(Numerology::new(mu)?.scs_khz())
}

/// Slot duration (and TTI) in ms: `1 / 2^mu`.
pub fn slot_ms(mu: i64) -> Result<f64, NrError> {
    Ok(Numerology::new(mu)?.slot_ms())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrequencyRange {
    FR1,
    FR2,
}

impl FrequencyRange {
    pub fn for_carrier(carrier_ghz: f64) -> FrequencyRange {
        if carrier_ghz <= FR1_MAX_GHZ {
            FrequencyRange::FR1
        } else {
            FrequencyRange::FR2
        }
    }
}

impl fmt::Display for FrequencyRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrequencyRange::FR1 => "FR1",
            FrequencyRange::FR2 => "FR2",
        })
    }
}

/// Explicit PRB count for one `(bandwidth, mu)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrbOverride {
    pub bw_mhz: f64,
    pub mu: Numerology,
    pub n_prb: u32,
}

/// Allowed channel bandwidths per range, plus optional PRB overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthTable {
    pub fr1_mhz: Vec<f64>,
    pub fr2_mhz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prb_overrides: Vec<PrbOverride>,
}

impl Default for BandwidthTable {
    fn default() -> Self {
        BandwidthTable {
            fr1_mhz: FR1_BANDWIDTHS_MHZ.to_vec(),
            fr2_mhz: FR2_BANDWIDTHS_MHZ.to_vec(),
            prb_overrides: Vec::new(),
        }
    }
}

impl BandwidthTable {
    pub fn allowed(&self, fr: FrequencyRange) -> &[f64] {
        match fr {
            FrequencyRange::FR1 => &self.fr1_mhz,
            FrequencyRange::FR2 => &self.fr2_mhz,
        }
    }

    pub fn validate_bandwidth(&self, fr: FrequencyRange, bw_mhz: f64) -> Result<(), NrError> {
        if self.allowed(fr).contains(&bw_mhz) {
            Ok(())
        } else {
            Err(NrError::UnsupportedBandwidth { fr, bw_mhz })
        }
    }

    /// PRB count, honouring an override for `(bw_mhz, mu)` when present.
    pub fn prb_count(&self, bw_mhz: f64, mu: Numerology, guard_fraction: f64) -> Result<u32, NrError> {
        match self.prb_overrides.iter().find(|o| o.bw_mhz == bw_mhz && o.mu == mu) {
            Some(o) => Ok(o.n_prb),
            None => prb_count(bw_mhz, mu, guard_fraction),
        }
    }
}

/// Checks `bw_mhz` against the default bandwidth set of `fr`.
pub fn validate_bandwidth(fr: FrequencyRange, bw_mhz: f64) -> Result<(), NrError> {
    BandwidthTable::default().validate_bandwidth(fr, bw_mhz)
}

/// `floor((1 - guard) * bw / (12 * scs))`.
///
/// ```
/// use gnbdim::nr::{prb_count, Numerology};
///
/// assert_eq!(prb_count(100.0, Numerology::new(1).unwrap(), 0.1).unwrap(), 250);
/// ```
pub fn prb_count(bw_mhz: f64, mu: Numerology, guard_fraction: f64) -> Result<u32, NrError> {
    if !(0.0..1.0).contains(&guard_fraction) {
        return Err(NrError::BadGuard(guard_fraction));
    }
    // integer Hz keeps exact multiples from landing one PRB short
    let usable_hz = ((1.0 - guard_fraction) * bw_mhz * 1e6).round() as u64;
    let prb_hz = u64::from(SUBCARRIERS_PER_PRB) * 15_000 * (1u64 << mu.mu());
    let n = usable_hz / prb_hz;
    if n == 0 {
        return Err(NrError::NoPrbFits {
            bw_mhz,
            mu: mu.mu(),
            guard_fraction,
        });
    }
    Ok(n.min(u64::from(u32::MAX)) as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthPart {
    pub mu: Numerology,
    pub bw_mhz: f64,
    pub n_prb: u32,
    pub purpose: String,
}

impl BandwidthPart {
    pub fn new(mu: Numerology, bw_mhz: f64, purpose: &str, table: &BandwidthTable, guard_fraction: f64) -> Result<Self, NrError> {
        let n_prb = table.prb_count(bw_mhz, mu, guard_fraction)?;
        let bwp = BandwidthPart {
            mu,
            bw_mhz,
            n_prb,
            purpose: purpose.to_string(),
        };
        if bwp.occupied_hz() > bw_mhz * 1e6 {
            return Err(NrError::BadConfig(format!(
                "{n_prb} PRBs at mu={} exceed {bw_mhz} MHz",
                mu.mu()
            )));
        }
        Ok(bwp)
    }

    /// Bandwidth actually covered by the PRBs.
    pub fn occupied_hz(&self) -> f64 {
        f64::from(self.n_prb) * self.mu.prb_hz()
    }
}

/// True when one slot of the BWP's numerology fits in the TTI budget (inclusive).
pub fn latency_feasible(bwp: &BandwidthPart, tti_budget_ms: f64) -> bool {
    bwp.mu.slot_ms() <= tti_budget_ms
}

/// One BWP as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BwpSection {
    pub mu: Numerology,
    pub bw_mhz: f64,
    #[serde(default)]
    pub purpose: String,
}

fn default_guard() -> f64 {
    DEFAULT_GUARD_FRACTION
}

fn default_symbols() -> u32 {
    DEFAULT_SYMBOLS_PER_SLOT
}

/// The `"nr"` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrSection {
    pub fr: FrequencyRange,
    pub carrier_ghz: f64,
    /// Carrier bandwidth; defaults to the sum of the BWP bandwidths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_bw_mhz: Option<f64>,
    pub bwps: Vec<BwpSection>,
    #[serde(default = "default_guard")]
    pub guard_fraction: f64,
    #[serde(default = "default_symbols")]
    pub symbols_per_slot: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidths: Option<BandwidthTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NrConfig {
    pub fr: FrequencyRange,
    pub carrier_ghz: f64,
    pub channel_bw_mhz: f64,
    pub bwps: Vec<BandwidthPart>,
    pub symbols_per_slot: u32,
}

impl NrConfig {
    pub fn from_section(s: &NrSection) -> Result<Self, NrError> {
        if !(s.carrier_ghz > 0.0) || FrequencyRange::for_carrier(s.carrier_ghz) != s.fr {
            return Err(NrError::CarrierMismatch {
                fr: s.fr,
                carrier_ghz: s.carrier_ghz,
            });
        }
        if s.bwps.is_empty() {
            return Err(NrError::BadConfig("at least one bandwidth part is required".into()));
        }
        if s.symbols_per_slot == 0 {
            return Err(NrError::BadConfig("symbols_per_slot must be positive".into()));
        }
        let table = s.bandwidths.clone().unwrap_or_default();
        let bwps = s
            .bwps
            .iter()
            .map(|b| {
                table.validate_bandwidth(s.fr, b.bw_mhz)?;
                BandwidthPart::new(b.mu, b.bw_mhz, &b.purpose, &table, s.guard_fraction)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let bwp_total: f64 = bwps.iter().map(|b| b.bw_mhz).sum();
        let channel_bw_mhz = s.channel_bw_mhz.unwrap_or(bwp_total);
        table.validate_bandwidth(s.fr, channel_bw_mhz)?;
        if bwp_total > channel_bw_mhz {
            return Err(NrError::BadConfig(format!(
                "bandwidth parts total {bwp_total} MHz exceeds the {channel_bw_mhz} MHz channel"
            )));
        }
        Ok(NrConfig {
            fr: s.fr,
            carrier_ghz: s.carrier_ghz,
            channel_bw_mhz,
            bwps,
            symbols_per_slot: s.symbols_per_slot,
        })
    }

    pub fn carrier_mhz(&self) -> f64 {
        self.carrier_ghz * 1e3
    }

    /// The BWP serving the cell-edge link budget (the first one configured).
    pub fn edge_bwp(&self) -> &BandwidthPart {
        &self.bwps[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(m: i64) -> Numerology {
        Numerology::new(m).unwrap()
    }

    #[test]
    fn numerology_table() {
        assert_eq!(scs_khz(0).unwrap(), 15.0);
        assert_eq!(scs_khz(2).unwrap(), 60.0);
        assert_eq!(scs_khz(4).unwrap(), 240.0);
        assert_eq!(slot_ms(0).unwrap(), 1.0);
        assert_eq!(slot_ms(2).unwrap(), 0.25);
        assert_eq!(slot_ms(4).unwrap(), 0.0625);
        assert_eq!(scs_khz(5), Err(NrError::BadMu(5)));
        assert_eq!(slot_ms(-1), Err(NrError::BadMu(-1)));
    }

    #[test]
    fn scs_doubles_and_duality() {
        for m in 0..4 {
            assert_eq!(scs_khz(m + 1).unwrap(), 2.0 * scs_khz(m).unwrap());
        }
        for m in Numerology::all() {
            assert_eq!(m.scs_khz() * m.slot_ms(), 15.0);
        }
    }

    #[test]
    fn bandwidth_sets() {
        assert!(validate_bandwidth(FrequencyRange::FR1, 100.0).is_ok());
        assert!(validate_bandwidth(FrequencyRange::FR2, 400.0).is_ok());
        assert!(matches!(
            validate_bandwidth(FrequencyRange::FR1, 400.0),
            Err(NrError::UnsupportedBandwidth { .. })
        ));
        let custom = BandwidthTable { fr1_mhz: vec![35.0], ..Default::default() };
        assert!(custom.validate_bandwidth(FrequencyRange::FR1, 35.0).is_ok());
        assert!(custom.validate_bandwidth(FrequencyRange::FR1, 100.0).is_err());
    }

    #[test]
    fn prb_examples() {
        // floor(0.9e8 / 360e3), floor(4.5e6 / 180e3), floor(4.5e6 / 2.88e6)
        assert_eq!(prb_count(100.0, mu(1), 0.1).unwrap(), 250);
        assert_eq!(prb_count(5.0, mu(0), 0.1).unwrap(), 25);
        assert_eq!(prb_count(5.0, mu(4), 0.1).unwrap(), 1);
        assert!(matches!(prb_count(5.0, mu(4), 0.5), Err(NrError::NoPrbFits { .. })));
        assert!(matches!(prb_count(5.0, mu(0), 1.0), Err(NrError::BadGuard(_))));
    }

    #[test]
    fn prb_override() {
        let table = BandwidthTable {
            prb_overrides: vec![PrbOverride { bw_mhz: 100.0, mu: mu(1), n_prb: 273 }],
            ..Default::default()
        };
        assert_eq!(table.prb_count(100.0, mu(1), 0.1).unwrap(), 273);
        assert_eq!(table.prb_count(100.0, mu(0), 0.1).unwrap(), 500);
    }

    #[test]
    fn prb_scans() {
        for &bw in FR1_BANDWIDTHS_MHZ.iter().chain(&FR2_BANDWIDTHS_MHZ) {
            for guard in [0.0, 0.05, 0.1, 0.3] {
                let mut last = u32::MAX;
                for m in Numerology::all() {
                    let n = prb_count(bw, m, guard).unwrap_or(0);
                    assert!(n <= last);
                    assert!(f64::from(n) * m.prb_hz() <= (1.0 - guard) * bw * 1e6 + 1e-6);
                    last = n;
                }
            }
        }
        for m in Numerology::all() {
            let mut last = 0;
            for &bw in &FR1_BANDWIDTHS_MHZ {
                let n = prb_count(bw, m, 0.1).unwrap_or(0);
                assert!(n >= last);
                last = n;
            }
        }
    }

    #[test]
    fn latency() {
        let table = BandwidthTable::default();
        let bwp = |m| BandwidthPart::new(mu(m), 20.0, "URLLC", &table, 0.1).unwrap();
        assert!(!latency_feasible(&bwp(0), 0.5));
        assert!(latency_feasible(&bwp(2), 0.5));
        for m in 0..=4 {
            assert!(latency_feasible(&bwp(m), slot_ms(m).unwrap()));
        }
    }

    #[test]
    fn config_section() {
        let json = r#"{"fr":"FR1","carrier_ghz":3.5,"bwps":[{"mu":1,"bw_mhz":100,"purpose":"eMBB"}]}"#;
        let s: NrSection = serde_json::from_str(json).unwrap();
        assert_eq!(s.guard_fraction, 0.1);
        let cfg = NrConfig::from_section(&s).unwrap();
        assert_eq!(cfg.bwps[0].n_prb, 250);
        assert_eq!(cfg.channel_bw_mhz, 100.0);
        assert_eq!(cfg.symbols_per_slot, 14);

        let bad_mu = r#"{"fr":"FR1","carrier_ghz":3.5,"bwps":[{"mu":7,"bw_mhz":100}]}"#;
        assert!(serde_json::from_str::<NrSection>(bad_mu).is_err());

        let fr_mismatch = NrSection { fr: FrequencyRange::FR2, ..s.clone() };
        assert!(matches!(NrConfig::from_section(&fr_mismatch), Err(NrError::CarrierMismatch { .. })));

        let two = NrSection {
            channel_bw_mhz: Some(50.0),
            bwps: vec![
                BwpSection { mu: mu(0), bw_mhz: 20.0, purpose: "eMBB".into() },
                BwpSection { mu: mu(2), bw_mhz: 40.0, purpose: "URLLC".into() },
            ],
            ..s.clone()
        };
        assert!(matches!(NrConfig::from_section(&two), Err(NrError::BadConfig(_))));
        let two = NrSection { channel_bw_mhz: Some(60.0), ..two };
        assert_eq!(NrConfig::from_section(&two).unwrap().bwps.len(), 2);

        let empty = NrSection { bwps: vec![], ..s };
        assert!(NrConfig::from_section(&empty).is_err());
    }
}
