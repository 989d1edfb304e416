use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate};
use thiserror::Error;

use super::geo::{GeoPoint, Position};

/// Whole seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn seconds(self) -> i64 {
        self.0
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not a `YYYY-MM-DDThh:mm:ssZ` timestamp: {0:?}")]
pub struct BadTimestamp(pub String);

fn digits(bytes: &[u8]) -> Option<u32> {
    bytes.iter().try_fold(0u32, |acc, &b| {
        b.is_ascii_digit().then(|| acc * 10 + u32::from(b - b'0'))
    })
}

impl FromStr for Timestamp {
    type Err = BadTimestamp;

    /// Strict `YYYY-MM-DDThh:mm:ssZ`; no offsets, no fractional seconds.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadTimestamp(s.to_string());
        let b = s.as_bytes();
        if b.len() != 20
            || b[4] != b'-'
            || b[7] != b'-'
            || b[10] != b'T'
            || b[13] != b':'
            || b[16] != b':'
            || b[19] != b'Z'
        {
            return Err(bad());
        }
        let year = digits(&b[0..4]).ok_or_else(bad)?;
        let month = digits(&b[5..7]).ok_or_else(bad)?;
        let day = digits(&b[8..10]).ok_or_else(bad)?;
        let hour = digits(&b[11..13]).ok_or_else(bad)?;
        let min = digits(&b[14..16]).ok_or_else(bad)?;
        let sec = digits(&b[17..19]).ok_or_else(bad)?;
        let dt = NaiveDate::from_ymd_opt(year as i32, month, day)
            .and_then(|d| d.and_hms_opt(hour, min, sec))
            .ok_or_else(bad)?;
        Ok(Timestamp(dt.and_utc().timestamp()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match DateTime::from_timestamp(self.0, 0) {
            Some(dt) => write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%SZ")),
            None => write!(f, "@{}", self.0),
        }
    }
}

/// Why an input line was not turned into a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    MalformedLine,
    BadTimestamp,
    BadCoordinate,
    WindowExcluded,
    OutOfProjectionRange,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::MalformedLine => "MalformedLine",
            RejectReason::BadTimestamp => "BadTimestamp",
            RejectReason::BadCoordinate => "BadCoordinate",
            RejectReason::WindowExcluded => "WindowExcluded",
            RejectReason::OutOfProjectionRange => "OutOfProjectionRange",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line_no}: {reason}: {detail}")]
pub struct LineError {
    pub line_no: usize,
    pub reason: RejectReason,
    pub detail: String,
}

/// A parsed CDR row before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoRecord {
    pub user_id: String,
    pub t: Timestamp,
    pub geo: GeoPoint,
}

/// A validated, projected activity event.
#[derive(Debug, Clone, PartialEq)]
pub struct CdrRecord {
    pub user_id: String,
    pub t: Timestamp,
    pub pos: Position,
}

pub const CDR_HEADER: &str = "user_id,timestamp,lat,lon";

/// Parse one non-header row of the CDR CSV.
pub fn parse_cdr_line(line: &str, line_no: usize) -> Result<GeoRecord, LineError> {
    let fail = |reason, detail: String| LineError {
        line_no,
        reason,
        detail,
    };
    let mut fields = line.split(',');
    let (Some(user), Some(ts), Some(lat), Some(lon), None) = (
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
    ) else {
        let n = line.split(',').count();
        return Err(fail(
            RejectReason::MalformedLine,
            format!("expected 4 fields, found {n}"),
        ));
    };
    if user.is_empty() {
        return Err(fail(RejectReason::MalformedLine, "empty user_id".into()));
    }
    let t: Timestamp = ts
        .parse()
        .map_err(|e: BadTimestamp| fail(RejectReason::BadTimestamp, e.to_string()))?;
    let coord = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| fail(RejectReason::BadCoordinate, format!("not a number: {s:?}")))
    };
    let geo = GeoPoint::new(coord(lat)?, coord(lon)?)
        .map_err(|e| fail(RejectReason::BadCoordinate, e.to_string()))?;
    Ok(GeoRecord {
        user_id: user.to_string(),
        t,
        geo,
    })
}
