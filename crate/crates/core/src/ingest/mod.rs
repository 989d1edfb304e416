//! CDR ingestion: CSV parsing, validation and local planar projection.
//!
//! Every input line ends up either as a [`CdrRecord`] or as a counted
//! [`Rejection`]; malformed rows never abort a run.

mod geo;
mod record;

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

pub use geo::{
    project, unproject, GeoError, GeoPoint, Position, EARTH_RADIUS_KM, PROJECTION_GUARD_DEG,
};
pub use record::{
    parse_cdr_line, BadTimestamp, CdrRecord, GeoRecord, LineError, RejectReason, Timestamp,
    CDR_HEADER,
};

use crate::par;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no input row parsed successfully ({lines_read} lines read)")]
    EmptyInput { lines_read: usize },
    #[error("invalid time window: {from} is after {to}")]
    BadWindow { from: Timestamp, to: Timestamp },
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Projection reference: explicit, or the mean lat/lon of accepted rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Reference {
    #[default]
    Auto,
    Fixed(GeoPoint),
}

/// Inclusive observation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub from: Timestamp,
    pub to: Timestamp,
}

impl Window {
    pub fn new(from: Timestamp, to: Timestamp) -> Result<Self, IngestError> {
        if from > to {
            return Err(IngestError::BadWindow { from, to });
        }
        Ok(Self { from, to })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.from <= t && t <= self.to
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IngestOptions {
    pub reference: Reference,
    pub window: Option<Window>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    /// Index of the input source (0 for single-source runs).
    pub source: usize,
    pub line_no: usize,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestStats {
    pub lines_read: usize,
    pub records_ok: usize,
    pub records_rejected: usize,
    pub reject_reasons: BTreeMap<RejectReason, usize>,
    pub ref_point: Option<GeoPoint>,
}

impl IngestStats {
    fn reject(&mut self, reason: RejectReason) {
        self.records_rejected += 1;
        *self.reject_reasons.entry(reason).or_default() += 1;
    }

    /// Componentwise sum. The reference point of `self` wins when set.
    pub fn merge(&mut self, other: &IngestStats) {
        self.lines_read += other.lines_read;
        self.records_ok += other.records_ok;
        self.records_rejected += other.records_rejected;
        for (reason, n) in &other.reject_reasons {
            *self.reject_reasons.entry(*reason).or_default() += n;
        }
        if self.ref_point.is_none() {
            self.ref_point = other.ref_point;
        }
    }

    pub fn rejected_for(&self, reason: RejectReason) -> usize {
        self.reject_reasons.get(&reason).copied().unwrap_or(0)
    }

    pub fn is_consistent(&self) -> bool {
        self.lines_read == self.records_ok + self.records_rejected
            && self.reject_reasons.values().sum::<usize>() == self.records_rejected
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub records: Vec<CdrRecord>,
    pub stats: IngestStats,
    pub rejections: Vec<Rejection>,
}

/// Returns the data lines of `text` with 1-based line numbers, skipping a
/// leading header row if present.
fn data_lines(text: &str) -> Vec<(usize, &str)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    if let Some((_, first)) = lines.peek() {
        if first.trim_start_matches('\u{feff}').trim_end() == CDR_HEADER {
            lines.next();
        }
    }
    lines.collect()
}

/// Ingest one or more CSV texts as a single stream.
///
/// With [`Reference::Auto`] the reference is the mean latitude/longitude of
/// all rows that parsed and passed the window filter, across every source.
pub fn ingest_texts(texts: &[&str], opts: &IngestOptions) -> Result<Ingested, IngestError> {
    let mut stats = IngestStats::default();
    let mut rejections = Vec::new();
    let mut accepted: Vec<(usize, usize, GeoRecord)> = Vec::new();

    for (source, text) in texts.iter().enumerate() {
        let lines = data_lines(text);
        let parsed = par::map(&lines, |&(line_no, line)| parse_cdr_line(line, line_no));
        stats.lines_read += lines.len();
        for (result, &(line_no, _)) in parsed.into_iter().zip(&lines) {
            match result {
                Ok(rec) => match opts.window {
                    Some(w) if !w.contains(rec.t) => {
                        stats.reject(RejectReason::WindowExcluded);
                        rejections.push(Rejection {
                            source,
                            line_no,
                            reason: RejectReason::WindowExcluded,
                            detail: format!("{} outside window", rec.t),
                        });
                    }
                    _ => accepted.push((source, line_no, rec)),
                },
                Err(e) => {
                    stats.reject(e.reason);
                    rejections.push(Rejection {
                        source,
                        line_no: e.line_no,
                        reason: e.reason,
                        detail: e.detail,
                    });
                }
            }
        }
    }

    if accepted.is_empty() {
        return Err(IngestError::EmptyInput {
            lines_read: stats.lines_read,
        });
    }

    let reference = match opts.reference {
        Reference::Fixed(p) => p,
        Reference::Auto => {
            let n = accepted.len() as f64;
            let (slat, slon) = accepted.iter().fold((0.0, 0.0), |(a, b), (_, _, r)| {
                (a + r.geo.lat(), b + r.geo.lon())
            });
            GeoPoint::new(slat / n, slon / n)?
        }
    };
    stats.ref_point = Some(reference);

    let projected = par::map(&accepted, |(_, _, r)| project(r.geo, reference));
    let mut records = Vec::with_capacity(accepted.len());
    for ((source, line_no, rec), pos) in accepted.into_iter().zip(projected) {
        match pos {
            Ok(pos) => records.push(CdrRecord {
                user_id: rec.user_id,
                t: rec.t,
                pos,
            }),
            Err(e) => {
                stats.reject(RejectReason::OutOfProjectionRange);
                rejections.push(Rejection {
                    source,
                    line_no,
                    reason: RejectReason::OutOfProjectionRange,
                    detail: e.to_string(),
                });
            }
        }
    }
    stats.records_ok = records.len();
    if records.is_empty() {
        return Err(IngestError::EmptyInput {
            lines_read: stats.lines_read,
        });
    }
    rejections.sort_by_key(|r| (r.source, r.line_no));
    debug_assert!(stats.is_consistent());
    Ok(Ingested {
        records,
        stats,
        rejections,
    })
}

pub fn ingest_str(text: &str, opts: &IngestOptions) -> Result<Ingested, IngestError> {
    ingest_texts(&[text], opts)
}

/// Write the rejected-row report: CSV `line_no,reason`.
pub fn write_rejections<W: Write>(mut out: W, rejections: &[Rejection]) -> io::Result<()> {
    writeln!(out, "line_no,reason")?;
    for r in rejections {
        writeln!(out, "{},{}", r.line_no, r.reason)?;
    }
    Ok(())
}

/// Write records in the ingest CSV format, unprojecting with `reference`.
pub fn write_cdr_csv<W: Write>(
    mut out: W,
    records: &[CdrRecord],
    reference: GeoPoint,
) -> Result<(), IngestError> {
    writeln!(out, "{CDR_HEADER}")?;
    for r in records {
        let g = unproject(r.pos, reference)?;
        writeln!(out, "{},{},{},{}", r.user_id, r.t, g.lat(), g.lon())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "user_id,timestamp,lat,lon\n\
        a,2024-06-01T08:00:00Z,49.49,0.12\n\
        a,2024-06-01T09:00:00Z,49.50,0.12\n\
        b,2024-06-01T10:00:00Z,49.48,0.13\n";

    fn fixed() -> IngestOptions {
        IngestOptions {
            reference: Reference::Fixed(GeoPoint::new(49.49, 0.12).unwrap()),
            window: None,
        }
    }

    #[test]
    fn passes_valid_lines_through() {
        let out = ingest_str(THREE, &fixed()).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.stats.lines_read, 3);
        assert_eq!(out.stats.records_ok, 3);
        assert_eq!(out.stats.records_rejected, 0);
        assert_eq!(out.records[0].pos, Position::ORIGIN);
        assert_eq!(out.records[2].user_id, "b");
    }

    #[test]
    fn window_excludes_rows() {
        let from: Timestamp = "2024-06-01T07:00:00Z".parse().unwrap();
        let to: Timestamp = "2024-06-01T08:00:00Z".parse().unwrap();
        let opts = IngestOptions {
            window: Some(Window::new(from, to).unwrap()),
            ..fixed()
        };
        let out = ingest_str(THREE, &opts).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.stats.records_rejected, 2);
        assert_eq!(out.stats.rejected_for(RejectReason::WindowExcluded), 2);
        assert!(out.stats.is_consistent());
    }

    #[test]
    fn malformed_rows_are_counted() {
        let text = "user_id,timestamp,lat,lon\n\
            a,2024-06-01T08:00:00Z,49.49,0.12\n\
            garbage\n\
            a,2024-06-01T09:00:00Z,49.50,0.12\n";
        let out = ingest_str(text, &fixed()).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.stats.rejected_for(RejectReason::MalformedLine), 1);
        assert_eq!(out.rejections[0].line_no, 3);
        let mut report = Vec::new();
        write_rejections(&mut report, &out.rejections).unwrap();
        assert_eq!(
            String::from_utf8(report).unwrap(),
            "line_no,reason\n3,MalformedLine\n"
        );
    }

    #[test]
    fn auto_reference_is_mean_of_accepted_rows() {
        let out = ingest_str(THREE, &IngestOptions::default()).unwrap();
        let r = out.stats.ref_point.unwrap();
        assert!((r.lat() - 49.49).abs() < 1e-12);
        assert!((r.lon() - (0.12 + 0.12 + 0.13) / 3.0).abs() < 1e-12);
        let (sx, sy) = out
            .records
            .iter()
            .fold((0.0, 0.0), |(a, b), r| (a + r.pos.x, b + r.pos.y));
        assert!(sx.abs() < 1e-9 && sy.abs() < 1e-9);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            ingest_str("user_id,timestamp,lat,lon\nbad\n", &fixed()),
            Err(IngestError::EmptyInput { lines_read: 1 })
        ));
        assert!(matches!(
            ingest_str("", &fixed()),
            Err(IngestError::EmptyInput { lines_read: 0 })
        ));
    }

    #[test]
    fn distant_points_are_rejected_not_fatal() {
        let text = "a,2024-06-01T08:00:00Z,49.49,0.12\nb,2024-06-01T08:00:00Z,10.0,0.12\n";
        let out = ingest_str(text, &fixed()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.stats.rejected_for(RejectReason::OutOfProjectionRange), 1);
        assert!(out.stats.is_consistent());
    }

    #[test]
    fn stats_merge_componentwise() {
        let a = ingest_str(THREE, &fixed()).unwrap().stats;
        let b = ingest_str("x\n", &fixed()).err();
        assert!(b.is_some());
        let c = ingest_str("a,2024-06-01T08:00:00Z,49.49,0.12\nbad\n", &fixed())
            .unwrap()
            .stats;
        let mut m = a.clone();
        m.merge(&c);
        assert_eq!(m.lines_read, 5);
        assert_eq!(m.records_ok, 4);
        assert_eq!(m.records_rejected, 1);
        assert!(m.is_consistent());
    }

    #[test]
    fn write_then_ingest_round_trips() {
        let reference = GeoPoint::new(49.49, 0.12).unwrap();
        let out = ingest_str(THREE, &fixed()).unwrap();
        let mut buf = Vec::new();
        write_cdr_csv(&mut buf, &out.records, reference).unwrap();
        let again = ingest_str(std::str::from_utf8(&buf).unwrap(), &fixed()).unwrap();
        for (a, b) in out.records.iter().zip(&again.records) {
            assert_eq!(a.user_id, b.user_id);
            assert_eq!(a.t, b.t);
            assert!(a.pos.distance(&b.pos) < 1e-9);
        }
    }

    proptest::proptest! {
        #[test]
        fn every_line_is_accounted_for(lines in proptest::collection::vec(
            proptest::prop_oneof![
                proptest::strategy::Just("a,2024-06-01T08:00:00Z,49.49,0.12".to_string()),
                proptest::strategy::Just("b,2024-06-01T08:00:00Z,49.5,0.2".to_string()),
                "\\PC{0,30}",
            ],
            1..40,
        )) {
            let text = lines.join("\n");
            match ingest_str(&text, &fixed()) {
                Ok(out) => {
                    proptest::prop_assert!(out.stats.is_consistent());
                    proptest::prop_assert_eq!(out.rejections.len(), out.stats.records_rejected);
                }
                Err(IngestError::EmptyInput { .. }) => {}
                Err(e) => proptest::prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
