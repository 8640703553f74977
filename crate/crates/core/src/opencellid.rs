//! Ingestion of crowdsourced cell-tower exports in the OpenCelliD CSV layout.
//!
//! Rows are validated one by one. A bad row is skipped and counted in the
//! [`IngestReport`]; only a missing or garbled header aborts the read.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::identifiers::{Eci, Mcc, Mnc, PlmnId, Tac};

/// Column layout of the public export, in order.
pub const HEADER: [&str; 14] = [
    "radio",
    "mcc",
    "net",
    "area",
    "cell",
    "unit",
    "lon",
    "lat",
    "range",
    "samples",
    "changeable",
    "created",
    "updated",
    "averageSignal",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Radio {
    Gsm,
    Umts,
    Lte,
    Nr,
    Cdma,
}

impl Radio {
    pub fn as_str(self) -> &'static str {
        match self {
            Radio::Gsm => "GSM",
            Radio::Umts => "UMTS",
            Radio::Lte => "LTE",
            Radio::Nr => "NR",
            Radio::Cdma => "CDMA",
        }
    }
}

impl fmt::Display for Radio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Radio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GSM" => Ok(Radio::Gsm),
            "UMTS" => Ok(Radio::Umts),
            "LTE" => Ok(Radio::Lte),
            "NR" => Ok(Radio::Nr),
            "CDMA" => Ok(Radio::Cdma),
            other => Err(format!("unknown radio type {other:?}")),
        }
    }
}

/// One tower observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub radio: Radio,
    pub plmn: PlmnId,
    pub area: Tac,
    /// ECI for LTE rows; technology-specific cell id otherwise.
    pub cell: u64,
    pub lon: f64,
    pub lat: f64,
    pub range_m: f64,
    /// Number of crowdsourced measurements; used as the traffic weight.
    pub samples: u64,
    pub created: i64,
    pub updated: i64,
    pub avg_signal: Option<f64>,
}

impl CellRecord {
    /// The cell identity as an [`Eci`], for LTE rows.
    pub fn eci(&self) -> Option<Eci> {
        match self.radio {
            Radio::Lte => Eci::new(self.cell).ok(),
            _ => None,
        }
    }
}

/// Soft, per-row rejection kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    BadCoordinate,
    BadRadio,
    BadNumeric,
    /// Wrong column count or undecodable bytes.
    MalformedRow,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub rows_rejected: u64,
    pub reject_reasons: BTreeMap<RejectReason, u64>,
}

impl IngestReport {
    fn reject(&mut self, reason: RejectReason) {
        self.rows_rejected += 1;
        *self.reject_reasons.entry(reason).or_insert(0) += 1;
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing or garbled header row: {0}")]
    MissingHeader(String),
    #[error("cannot read {path}: {source}")]
    Open { path: String, source: io::Error },
    #[error("bounding box has min > max: {0:?}")]
    BadBbox([f64; 4]),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_u64(field: &str) -> Result<u64, RejectReason> {
    field.trim().parse().map_err(|_| RejectReason::BadNumeric)
}

fn parse_i64(field: &str) -> Result<i64, RejectReason> {
    field.trim().parse().map_err(|_| RejectReason::BadNumeric)
}

fn parse_f64(field: &str) -> Result<f64, RejectReason> {
    let v: f64 = field.trim().parse().map_err(|_| RejectReason::BadNumeric)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RejectReason::BadNumeric)
    }
}

// The export stores MCC/MNC as integers, so leading zeros are lost; restore
// the minimum width (3 for MCC, 2 for MNC).
fn parse_code(field: &str, width: usize) -> Result<String, RejectReason> {
    let field = field.trim();
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RejectReason::BadNumeric);
    }
    Ok(format!("{field:0>width$}"))
}

fn parse_row(row: &csv::StringRecord) -> Result<CellRecord, RejectReason> {
    if row.len() != HEADER.len() {
        return Err(RejectReason::MalformedRow);
    }
    let radio: Radio = row[0].parse().map_err(|_| RejectReason::BadRadio)?;
    let mcc = Mcc::new(&parse_code(&row[1], 3)?).map_err(|_| RejectReason::BadNumeric)?;
    let mnc = Mnc::new(&parse_code(&row[2], 2)?).map_err(|_| RejectReason::BadNumeric)?;
    let area = u16::try_from(parse_u64(&row[3])?).map_err(|_| RejectReason::BadNumeric)?;
    let cell = parse_u64(&row[4])?;
    if radio == Radio::Lte && Eci::new(cell).is_err() {
        return Err(RejectReason::BadNumeric);
    }
    let lon = parse_f64(&row[6])?;
    let lat = parse_f64(&row[7])?;
    if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
        return Err(RejectReason::BadCoordinate);
    }
    let range_m = parse_f64(&row[8])?;
    if range_m < 0.0 {
        return Err(RejectReason::BadNumeric);
    }
    let samples = parse_u64(&row[9])?;
    let created = parse_i64(&row[11])?;
    let updated = parse_i64(&row[12])?;
    let avg_signal = match row[13].trim() {
        "" => None,
        s => Some(parse_f64(s)?),
    };
    Ok(CellRecord {
        radio,
        plmn: PlmnId::new(mcc, mnc),
        area: Tac(area),
        cell,
        lon,
        lat,
        range_m,
        samples,
        created,
        updated,
        avg_signal,
    })
}

/// Reads an OpenCelliD-layout CSV stream.
pub fn parse_csv<R: Read>(stream: R) -> Result<(Vec<CellRecord>, IngestReport), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(stream);

    let mut rows = reader.byte_records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(IngestError::MissingHeader(e.to_string())),
        None => return Err(IngestError::MissingHeader("empty input".into())),
    };
    let names: Vec<String> = header
        .iter()
        .map(|f| String::from_utf8_lossy(f).trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if names.len() != HEADER.len() || names.iter().zip(HEADER).any(|(got, want)| !got.eq_ignore_ascii_case(want)) {
        return Err(IngestError::MissingHeader(names.join(",")));
    }

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            // An unreadable record still counts as a row; io failures are fatal.
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(e.into()),
            Err(_) => {
                report.rows_read += 1;
                report.reject(RejectReason::MalformedRow);
                continue;
            }
        };
        report.rows_read += 1;
        let parsed = csv::StringRecord::from_byte_record(row)
            .map_err(|_| RejectReason::MalformedRow)
            .and_then(|r| parse_row(&r));
        match parsed {
            Ok(rec) => {
                report.rows_kept += 1;
                records.push(rec);
            }
            Err(reason) => report.reject(reason),
        }
    }
    Ok((records, report))
}

/// Reads a CSV file, transparently decompressing paths ending in `.gz`.
pub fn read_path(path: &Path) -> Result<(Vec<CellRecord>, IngestReport), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "gz") {
        parse_csv(GzDecoder::new(reader))
    } else {
        parse_csv(reader)
    }
}

/// Lon/lat rectangle `[min_lon, min_lat, max_lon, max_lat]`, edges inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Bbox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Result<Self, IngestError> {
        if !(min_lon <= max_lon && min_lat <= max_lat) {
            return Err(IngestError::BadBbox([min_lon, min_lat, max_lon, max_lat]));
        }
        Ok(Bbox {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        })
    }

    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        (self.min_lon..=self.max_lon).contains(&lon) && (self.min_lat..=self.max_lat).contains(&lat)
    }
}

impl FromStr for Bbox {
    type Err = String;

    /// `minlon,minlat,maxlon,maxlat`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad bbox {s:?}: {e}"))?;
        match parts[..] {
            [a, b, c, d] => Bbox::new(a, b, c, d).map_err(|e| e.to_string()),
            _ => Err(format!("bbox needs 4 comma-separated numbers, got {s:?}")),
        }
    }
}

/// Record predicates; `None` fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Filters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<Radio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plmn: Option<PlmnId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<Bbox>,
}

impl Filters {
    pub fn validate(&self) -> Result<(), IngestError> {
        if let Some(b) = self.bbox {
            Bbox::new(b.min_lon, b.min_lat, b.max_lon, b.max_lat)?;
        }
        Ok(())
    }

    pub fn matches(&self, rec: &CellRecord) -> bool {
        self.radio.is_none_or(|r| rec.radio == r)
            && self.plmn.as_ref().is_none_or(|p| &rec.plmn == p)
            && self.bbox.is_none_or(|b| b.contains(rec.lon, rec.lat))
    }
}

/// Keeps the records matching every present predicate, preserving order.
pub fn filter_records(records: &[CellRecord], filters: &Filters) -> Result<Vec<CellRecord>, IngestError> {
    filters.validate()?;
    Ok(records.iter().filter(|r| filters.matches(r)).cloned().collect())
}

/// Writes records back out in the 14-column layout, readable by [`parse_csv`].
pub fn write_csv<W: Write>(out: W, records: &[CellRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.radio.as_str().to_string(),
            r.plmn.mcc.as_str().to_string(),
            r.plmn.mnc.as_str().to_string(),
            r.area.0.to_string(),
            r.cell.to_string(),
            String::new(),
            r.lon.to_string(),
            r.lat.to_string(),
            r.range_m.to_string(),
            r.samples.to_string(),
            "1".to_string(),
            r.created.to_string(),
            r.updated.to_string(),
            r.avg_signal.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
