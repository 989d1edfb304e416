use std::io::{self, Write};

use super::{summarize, KernelError};
use crate::ingest::Timestamp;
use crate::numfmt::sig9;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicPoint {
    pub t: Timestamp,
    pub u: f64,
    pub v: f64,
}

/// A trajectory expressed in its own principal frame, each axis scaled by
/// its standard deviation. Coordinates are dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicTrajectory {
    pub user_id: String,
    pub points: Vec<IntrinsicPoint>,
    pub degenerate_axis: bool,
}

/// Translate to the center of mass, rotate the major axis onto `u`, and
/// divide each axis by its standard deviation.
///
/// The sign of the frame is fixed by putting the most frequent position at
/// `u ≥ 0`. When the minor axis is degenerate, `v` is emitted as exact 0.
pub fn to_intrinsic_frame(traj: &Trajectory) -> Result<IntrinsicTrajectory, KernelError> {
    let summary = summarize(traj);
    if summary.rg == 0.0 {
        return Err(KernelError::DegenerateTrajectory {
            user_id: traj.user_id().to_string(),
        });
    }
    let (s, c) = summary.theta.sin_cos();
    let com = summary.com;
    let to_frame = |p: crate::ingest::Position| {
        let d = p - com;
        let u = (c * d.x + s * d.y) / summary.sigma_x;
        let v = if summary.degenerate_axis {
            0.0
        } else {
            (-s * d.x + c * d.y) / summary.sigma_y
        };
        (u, v)
    };
    let flip = summary
        .top_positions
        .first()
        .is_some_and(|&(p, _)| to_frame(p).0 < 0.0);
    let sign = if flip { -1.0 } else { 1.0 };
    let points = traj
        .points()
        .iter()
        .map(|p| {
            let (u, v) = to_frame(p.pos);
            IntrinsicPoint {
                t: p.t,
                u: sign * u,
                // keep exact +0.0 on a degenerate axis
                v: if summary.degenerate_axis { 0.0 } else { sign * v },
            }
        })
        .collect();
    Ok(IntrinsicTrajectory {
        user_id: traj.user_id().to_string(),
        points,
        degenerate_axis: summary.degenerate_axis,
    })
}

pub const INTRINSIC_HEADER: &str = "user_id,t,u,v";

pub fn write_intrinsic<W: Write>(mut out: W, frames: &[IntrinsicTrajectory]) -> io::Result<()> {
    writeln!(out, "{INTRINSIC_HEADER}")?;
    for f in frames {
        for p in &f.points {
            writeln!(out, "{},{},{},{}", f.user_id, p.t, sig9(p.u), sig9(p.v))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Position;

    fn traj(pts: &[(f64, f64)]) -> Trajectory {
        let ps: Vec<Position> = pts.iter().map(|&(x, y)| Position::new(x, y)).collect();
        Trajectory::from_positions("u", &ps).unwrap()
    }

    fn moments(vals: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
        let n = vals.clone().count() as f64;
        let mean = vals.clone().sum::<f64>() / n;
        let var = vals.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    #[test]
    fn corners_map_to_unit_square() {
        let f = to_intrinsic_frame(&traj(&[(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)]))
            .unwrap();
        for p in &f.points {
            assert!((p.u.abs() - 1.0).abs() < 1e-15 && (p.v.abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn standardizes_and_orients_collinear_trajectory() {
        let f = to_intrinsic_frame(&traj(&[(0.0, 0.0), (2.0, 0.0), (2.0, 0.0)])).unwrap();
        let r2 = 2f64.sqrt();
        let want = [-r2, 1.0 / r2, 1.0 / r2];
        for (p, w) in f.points.iter().zip(want) {
            assert!((p.u - w).abs() < 1e-15, "{} vs {}", p.u, w);
            assert_eq!(p.v.to_bits(), 0.0f64.to_bits());
        }
        assert!(f.degenerate_axis);
    }

    #[test]
    fn most_frequent_position_lands_on_positive_u() {
        let f = to_intrinsic_frame(&traj(&[(0.0, 0.0), (0.0, 0.0), (3.0, 1.0), (-1.0, 2.0)]))
            .unwrap();
        assert!(f.points[0].u >= 0.0);
        let (mu, su) = moments(f.points.iter().map(|p| p.u));
        let (mv, sv) = moments(f.points.iter().map(|p| p.v));
        assert!(mu.abs() < 1e-12 && mv.abs() < 1e-12);
        assert!((su - 1.0).abs() < 1e-12 && (sv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn center_of_mass_maps_to_origin() {
        // Appending the CoM itself must land at (0, 0).
        let base = [(1.0, 2.0), (4.0, 3.0), (2.0, 7.0)];
        let mut pts = base.to_vec();
        pts.push((7.0 / 3.0, 4.0));
        let f = to_intrinsic_frame(&traj(&pts)).unwrap();
        let last = f.points.last().unwrap();
        assert!(last.u.abs() < 1e-14 && last.v.abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_spread() {
        assert!(matches!(
            to_intrinsic_frame(&traj(&[(1.0, 1.0), (1.0, 1.0)])),
            Err(KernelError::DegenerateTrajectory { .. })
        ));
        assert!(to_intrinsic_frame(&traj(&[(1.0, 1.0)])).is_err());
    }
}
