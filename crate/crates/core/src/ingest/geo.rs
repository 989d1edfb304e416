use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

/// Mean Earth radius (IUGG), kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Maximum latitude or longitude offset from the reference point for which
/// the local projection is accepted.
pub const PROJECTION_GUARD_DEG: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("coordinate out of range: lat={lat}, lon={lon}")]
    BadCoordinate { lat: f64, lon: f64 },
    #[error("point ({lat}, {lon}) is more than {PROJECTION_GUARD_DEG} degrees from reference ({ref_lat}, {ref_lon})")]
    OutOfProjectionRange {
        lat: f64,
        lon: f64,
        ref_lat: f64,
        ref_lon: f64,
    },
}

/// A geographic position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let ok = lat.is_finite()
            && lon.is_finite()
            && (-90.0..=90.0).contains(&lat)
            && (-180.0..=180.0).contains(&lon);
        if ok {
            Ok(Self { lat, lon })
        } else {
            Err(GeoError::BadCoordinate { lat, lon })
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lat, self.lon)
    }
}

/// A point on the local planar frame: kilometres east (`x`) and north (`y`)
/// of the projection reference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotate about the origin by `angle` radians (counter-clockwise).
    pub fn rotated(&self, angle: f64) -> Position {
        let (s, c) = angle.sin_cos();
        Position {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn scaled(&self, factor: f64) -> Position {
        Position {
            x: self.x * factor,
            y: self.y * factor,
        }
    }

    /// Bitwise key for exact-equality grouping; -0.0 and 0.0 share a key.
    pub(crate) fn bits(&self) -> (u64, u64) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, rhs: Position) -> Position {
        Position::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Equirectangular projection of `p` around `reference`.
///
/// `x = R cos(ref.lat) Δlon`, `y = R Δlat` with angles in radians. Only
/// valid near the reference, so points further than
/// [`PROJECTION_GUARD_DEG`] in either coordinate are refused.
pub fn project(p: GeoPoint, reference: GeoPoint) -> Result<Position, GeoError> {
    let dlat = p.lat - reference.lat;
    let dlon = p.lon - reference.lon;
    if dlat.abs() >= PROJECTION_GUARD_DEG || dlon.abs() >= PROJECTION_GUARD_DEG {
        return Err(GeoError::OutOfProjectionRange {
            lat: p.lat,
            lon: p.lon,
            ref_lat: reference.lat,
            ref_lon: reference.lon,
        });
    }
    let x = EARTH_RADIUS_KM * reference.lat.to_radians().cos() * dlon.to_radians();
    let y = EARTH_RADIUS_KM * dlat.to_radians();
    Ok(Position { x, y })
}

/// Inverse of [`project`] for the same reference.
pub fn unproject(pos: Position, reference: GeoPoint) -> Result<GeoPoint, GeoError> {
    let dlat = (pos.y / EARTH_RADIUS_KM).to_degrees();
    let dlon = (pos.x / (EARTH_RADIUS_KM * reference.lat.to_radians().cos())).to_degrees();
    GeoPoint::new(reference.lat + dlat, reference.lon + dlon)
}
