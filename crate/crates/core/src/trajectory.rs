//! Per-user, time-ordered trajectories.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::ingest::{CdrRecord, Position, Timestamp};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrajectoryError {
    #[error("prefix length {k} out of range 1..={n}")]
    BadPrefix { k: usize, n: usize },
    #[error("trajectory dump line {line_no}: {detail}")]
    BadDump { line_no: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub t: Timestamp,
    pub pos: Position,
}

/// Time-ordered positions of one user. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    user_id: String,
    points: Vec<TrackPoint>,
}

impl Trajectory {
    /// Builds a trajectory, stably sorting `points` by time. Returns `None`
    /// for an empty point list.
    pub fn new(user_id: impl Into<String>, mut points: Vec<TrackPoint>) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        points.sort_by_key(|p| p.t);
        Some(Self {
            user_id: user_id.into(),
            points,
        })
    }

    /// Convenience constructor for positions at consecutive one-second
    /// timestamps starting at 0.
    pub fn from_positions(user_id: impl Into<String>, positions: &[Position]) -> Option<Self> {
        let points = positions
            .iter()
            .enumerate()
            .map(|(i, &pos)| TrackPoint {
                t: Timestamp(i as i64),
                pos,
            })
            .collect();
        Self::new(user_id, points)
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = Position> + '_ {
        self.points.iter().map(|p| p.pos)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The first `k` points.
    pub fn prefix(&self, k: usize) -> Result<Trajectory, TrajectoryError> {
        let n = self.points.len();
        if k == 0 || k > n {
            return Err(TrajectoryError::BadPrefix { k, n });
        }
        Ok(Trajectory {
            user_id: self.user_id.clone(),
            points: self.points[..k].to_vec(),
        })
    }

    /// Apply `f` to every position, keeping timestamps.
    pub fn map_positions(&self, f: impl Fn(Position) -> Position) -> Trajectory {
        Trajectory {
            user_id: self.user_id.clone(),
            points: self
                .points
                .iter()
                .map(|p| TrackPoint {
                    t: p.t,
                    pos: f(p.pos),
                })
                .collect(),
        }
    }
}

/// Group records by user. Keys iterate in sorted user-id order; points
/// within a user are stably sorted by time, so equal timestamps keep input
/// order.
pub fn build_trajectories(records: &[CdrRecord]) -> BTreeMap<String, Trajectory> {
    let mut groups: HashMap<&str, Vec<TrackPoint>> = HashMap::new();
    for r in records {
        groups.entry(r.user_id.as_str()).or_default().push(TrackPoint {
            t: r.t,
            pos: r.pos,
        });
    }
    let mut trajectories: Vec<Trajectory> = groups
        .into_iter()
        .map(|(user, points)| Trajectory {
            user_id: user.to_string(),
            points,
        })
        .collect();
    par::for_each_mut(&mut trajectories, |t| t.points.sort_by_key(|p| p.t));
    trajectories
        .into_iter()
        .map(|t| (t.user_id.clone(), t))
        .collect()
}

pub const DUMP_HEADER: &str = "user_id,t,x_km,y_km";

/// Write the intermediate dump, sorted by (user_id, t). Coordinates use the
/// shortest representation that parses back to the same `f64`.
pub fn write_dump<'a, W, I>(mut out: W, trajectories: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Trajectory>,
{
    writeln!(out, "{DUMP_HEADER}")?;
    for traj in trajectories {
        for p in &traj.points {
            writeln!(out, "{},{},{:?},{:?}", traj.user_id, p.t, p.pos.x, p.pos.y)?;
        }
    }
    Ok(())
}

/// Read a dump written by [`write_dump`].
pub fn read_dump<R: BufRead>(input: R) -> Result<BTreeMap<String, Trajectory>, TrajectoryError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| TrajectoryError::BadDump {
            line_no,
            detail: e.to_string(),
        })?;
        if line_no == 1 && line == DUMP_HEADER {
            continue;
        }
        let bad = |detail: &str| TrajectoryError::BadDump {
            line_no,
            detail: detail.to_string(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [user, t, x, y] = fields[..] else {
            return Err(bad("expected 4 fields"));
        };
        let t: Timestamp = t.parse().map_err(|_| bad("bad timestamp"))?;
        let x: f64 = x.parse().map_err(|_| bad("bad x"))?;
        let y: f64 = y.parse().map_err(|_| bad("bad y"))?;
        records.push(CdrRecord {
            user_id: user.to_string(),
            t,
            pos: Position::new(x, y),
        });
    }
    Ok(build_trajectories(&records))
}
