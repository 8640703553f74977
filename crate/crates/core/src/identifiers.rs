//! 3GPP LTE location identifiers.
//!
//! Global identifiers ([`PlmnId`], [`Tai`]) name an operator network and a
//! tracking area inside it. Local identifiers ([`Tac`], [`Eci`]) name a
//! tracking area, an eNB and a cell inside one operator's network. Digit
//! strings are kept as strings so that MNC `"01"` and `"001"` stay distinct.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest E-UTRAN cell identity plus one (28 bits).
pub const ECI_LIMIT: u32 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifierError {
    #[error("non-digit character in {0:?}")]
    NonDigit(String),
    #[error("bad length {len} for {what} {text:?}")]
    BadLength {
        what: &'static str,
        text: String,
        len: usize,
    },
    #[error("ECI {0} does not fit in 28 bits")]
    OutOfRange(u64),
}

fn check_digits(what: &'static str, text: &str, lens: &[usize]) -> Result<(), IdentifierError> {
    if !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(IdentifierError::NonDigit(text.to_string()));
    }
    if !lens.contains(&text.len()) {
        return Err(IdentifierError::BadLength {
            what,
            text: text.to_string(),
            len: text.len(),
        });
    }
    Ok(())
}

/// Mobile country code: exactly three decimal digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mcc(String);

impl Mcc {
    pub fn new(digits: &str) -> Result<Self, IdentifierError> {
        check_digits("MCC", digits, &[3])?;
        Ok(Mcc(digits.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Mobile network code: two or three decimal digits, leading zeros significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mnc(String);

impl Mnc {
    pub fn new(digits: &str) -> Result<Self, IdentifierError> {
        check_digits("MNC", digits, &[2, 3])?;
        Ok(Mnc(digits.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Public land mobile network identity, serialized as MCC digits followed by MNC digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlmnId {
    pub mcc: Mcc,
    pub mnc: Mnc,
}

impl PlmnId {
    pub fn new(mcc: Mcc, mnc: Mnc) -> Self {
        PlmnId { mcc, mnc }
    }
}

/// Parses a 5- or 6-digit PLMN string: the first three digits are the MCC,
/// the remainder the MNC.
///
/// ```
/// use gnbdim::identifiers::parse_plmn;
///
/// let plmn = parse_plmn("20801").unwrap();
/// assert_eq!(plmn.mcc.as_str(), "208");
/// assert_eq!(plmn.mnc.as_str(), "01");
/// ```
pub fn parse_plmn(text: &str) -> Result<PlmnId, IdentifierError> {
    check_digits("PLMN", text, &[5, 6])?;
    let (mcc, mnc) = text.split_at(3);
    Ok(PlmnId {
        mcc: Mcc(mcc.to_string()),
        mnc: Mnc(mnc.to_string()),
    })
}

impl fmt::Display for PlmnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.mcc.0, self.mnc.0)
    }
}

impl FromStr for PlmnId {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_plmn(s)
    }
}

impl Serialize for PlmnId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PlmnId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_plmn(&text).map_err(serde::de::Error::custom)
    }
}

/// Tracking area code (16 bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tac(pub u16);

/// Tracking area identity: PLMN plus TAC.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tai {
    pub plmn: PlmnId,
    pub tac: Tac,
}

pub fn make_tai(plmn: PlmnId, tac: Tac) -> Tai {
    Tai { plmn, tac }
}

/// `<plmn>-<TAC as four uppercase hex digits>`, e.g. `310260-1A2B`.
impl fmt::Display for Tai {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{:04X}", self.plmn, self.tac.0)
    }
}

/// E-UTRAN cell identity: 20-bit eNB id followed by an 8-bit cell id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Eci(u32);

impl Eci {
    pub fn new(value: u64) -> Result<Self, IdentifierError> {
        if value >= u64::from(ECI_LIMIT) {
            return Err(IdentifierError::OutOfRange(value));
        }
        Ok(Eci(value as u32))
    }

    pub fn from_parts(enb_id: u32, cell_id: u8) -> Result<Self, IdentifierError> {
        Eci::new(u64::from(enb_id) * 256 + u64::from(cell_id))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn enb_id(self) -> u32 {
        self.0 >> 8
    }

    pub fn cell_id(self) -> u8 {
        (self.0 & 0xff) as u8
    }
}

/// Splits a 28-bit ECI into `(enb_id, cell_id)`.
///
/// ```
/// assert_eq!(gnbdim::identifiers::split_eci(12_345_678).unwrap(), (48_225, 78));
/// ```
pub fn split_eci(value: u64) -> Result<(u32, u8), IdentifierError> {
    let eci = Eci::new(value)?;
    Ok((eci.enb_id(), eci.cell_id()))
}

/// Composite key grouping records by tracking area, then cell.
/// Ordering is lexicographic on `(tac, eci)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionKey {
    tac: Tac,
    eci: Eci,
}

impl RegionKey {
    pub fn tac(&self) -> Tac {
        self.tac
    }

    pub fn eci(&self) -> Eci {
        self.eci
    }
}

pub fn region_key(tac: Tac, eci: Eci) -> RegionKey {
    RegionKey { tac, eci }
}
