//! Per-trajectory mobility characteristics.
//!
//! All second moments are taken about the trajectory's center of mass, with
//! population (`1/n`) normalisation. The principal angle is the orientation
//! of the axis of maximal spread, in `[0, π)`.

mod intrinsic;

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use thiserror::Error;

use crate::ingest::{Position, Timestamp};
use crate::numfmt::sig9;
use crate::par;
use crate::trajectory::Trajectory;

pub use intrinsic::{to_intrinsic_frame, write_intrinsic, IntrinsicPoint, IntrinsicTrajectory};

/// Tensors with `μ ≤ ISOTROPY_REL · trace` have no preferred axis.
pub const ISOTROPY_REL: f64 = 1e-12;

/// The minor axis is degenerate when `σ_y ≤ DEGENERATE_REL · σ_x`.
pub const DEGENERATE_REL: f64 = 1e-12;

/// Number of frequent positions kept on a summary.
pub const TOP_POSITIONS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("trajectory of user {user_id} has zero radius of gyration")]
    DegenerateTrajectory { user_id: String },
}

/// Symmetric 2×2 inertia tensor of a centered point cloud, in km².
///
/// `ixx = Σ y′²`, `iyy = Σ x′²`, `ixy = iyx = −Σ x′y′`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InertiaTensor {
    pub ixx: f64,
    pub iyy: f64,
    pub ixy: f64,
}

impl InertiaTensor {
    pub fn trace(&self) -> f64 {
        self.ixx + self.iyy
    }

    /// `μ = sqrt((ixx − iyy)² + 4 ixy²)`, the eigenvalue gap.
    pub fn mu(&self) -> f64 {
        (self.ixx - self.iyy).hypot(2.0 * self.ixy)
    }

    /// Eigenvalues `(λ₋, λ₊)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_trace = 0.5 * self.trace();
        let half_mu = 0.5 * self.mu();
        (half_trace - half_mu, half_trace + half_mu)
    }

    pub fn is_isotropic(&self) -> bool {
        self.mu() <= ISOTROPY_REL * self.trace()
    }

    /// Closed-form cosine of the principal angle:
    /// `cos θ = −ixy / d · 1/sqrt(1 + ixy²/d²)` with `d = (ixx − iyy + μ)/2`.
    ///
    /// `None` when `d = 0`, which happens exactly for clouds whose major axis
    /// is the x-axis (the expression is 0/0 there).
    pub fn closed_form_cos_theta(&self) -> Option<f64> {
        let d = 0.5 * self.ixx - 0.5 * self.iyy + 0.5 * self.mu();
        if d == 0.0 {
            return None;
        }
        Some(-self.ixy / d * (1.0 / (1.0 + self.ixy * self.ixy / (d * d)).sqrt()))
    }
}

pub fn mu_discriminant(t: &InertiaTensor) -> f64 {
    t.mu()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAngle {
    /// Radians in `[0, π)`.
    pub theta: f64,
    /// Set when the tensor is isotropic; `theta` is then 0 by convention.
    pub isotropic: bool,
}

/// Orientation of the eigenvector of the smaller eigenvalue, i.e. the
/// direction of maximal spread.
pub fn principal_angle(t: &InertiaTensor) -> PrincipalAngle {
    if t.is_isotropic() {
        return PrincipalAngle {
            theta: 0.0,
            isotropic: true,
        };
    }
    // Eigenvector of λ₋ for [[ixx, ixy], [ixy, iyy]] sits at half the angle
    // of (iyy − ixx, −2 ixy).
    let theta = 0.5 * (-2.0 * t.ixy).atan2(t.iyy - t.ixx);
    PrincipalAngle {
        theta: reduce_mod_pi(theta),
        isotropic: false,
    }
}

/// Reduce an angle into `[0, π)`.
pub fn reduce_mod_pi(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Arithmetic mean of all recorded positions, multiplicity included.
pub fn center_of_mass(traj: &Trajectory) -> Position {
    let n = traj.len() as f64;
    let (sx, sy) = traj
        .positions()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Position::new(sx / n, sy / n)
}

pub fn radius_of_gyration(traj: &Trajectory) -> f64 {
    let com = center_of_mass(traj);
    let ss: f64 = traj
        .positions()
        .map(|p| {
            let d = p - com;
            d.x * d.x + d.y * d.y
        })
        .sum();
    (ss / traj.len() as f64).sqrt()
}

/// Radius of gyration of every prefix: element `k` covers the first `k + 1`
/// points. Running moments are updated incrementally; the last element is
/// the two-pass value of the whole trajectory, identical to
/// [`radius_of_gyration`].
pub fn rg_time_series(traj: &Trajectory) -> Vec<(Timestamp, f64)> {
    let mut out = Vec::with_capacity(traj.len());
    let (mut mx, mut my, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for (i, p) in traj.points().iter().enumerate() {
        let k = (i + 1) as f64;
        let dx = p.pos.x - mx;
        let dy = p.pos.y - my;
        mx += dx / k;
        my += dy / k;
        m2 += dx * (p.pos.x - mx) + dy * (p.pos.y - my);
        out.push((p.t, (m2.max(0.0) / k).sqrt()));
    }
    if let Some(last) = out.last_mut() {
        last.1 = radius_of_gyration(traj);
    }
    out
}

/// Most visited positions under exact coordinate equality, by descending
/// count; ties go to the position seen first.
pub fn top_frequent_positions(traj: &Trajectory, k: usize) -> Vec<(Position, usize)> {
    let mut groups: HashMap<(u64, u64), (usize, usize, Position)> = HashMap::new();
    for (i, p) in traj.positions().enumerate() {
        groups.entry(p.bits()).or_insert((0, i, p)).0 += 1;
    }
    let mut ranked: Vec<_> = groups.into_values().collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked
        .into_iter()
        .take(k)
        .map(|(count, _, pos)| (pos, count))
        .collect()
}

fn tensor_about(traj: &Trajectory, com: Position) -> InertiaTensor {
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in traj.positions() {
        let d = p - com;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    InertiaTensor {
        ixx: syy,
        iyy: sxx,
        ixy: -sxy,
    }
}

/// Inertia tensor of the positions relative to the center of mass.
pub fn inertia_tensor(traj: &Trajectory) -> InertiaTensor {
    tensor_about(traj, center_of_mass(traj))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaAxes {
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// The input angle, or the input plus π/2 (mod π) when the axes had to
    /// be swapped to keep `sigma_x ≥ sigma_y`.
    pub theta: f64,
    pub degenerate_axis: bool,
}

fn sigma_axes_about(traj: &Trajectory, com: Position, theta: f64) -> SigmaAxes {
    let (s, c) = theta.sin_cos();
    let (mut su, mut sv) = (0.0, 0.0);
    for p in traj.positions() {
        let d = p - com;
        let u = c * d.x + s * d.y;
        let v = -s * d.x + c * d.y;
        su += u * u;
        sv += v * v;
    }
    let n = traj.len() as f64;
    let (mut sigma_x, mut sigma_y) = ((su / n).sqrt(), (sv / n).sqrt());
    let mut theta = theta;
    if sigma_x < sigma_y {
        std::mem::swap(&mut sigma_x, &mut sigma_y);
        theta = reduce_mod_pi(theta + FRAC_PI_2);
    }
    SigmaAxes {
        sigma_x,
        sigma_y,
        theta,
        degenerate_axis: sigma_y <= DEGENERATE_REL * sigma_x,
    }
}

/// Population standard deviations along the axes rotated by `theta`.
pub fn sigma_axes(traj: &Trajectory, theta: f64) -> SigmaAxes {
    sigma_axes_about(traj, center_of_mass(traj), theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySummary {
    pub user_id: String,
    pub n: usize,
    pub com: Position,
    pub rg: f64,
    pub tensor: InertiaTensor,
    pub theta: f64,
    pub mu: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub top_positions: Vec<(Position, usize)>,
    pub isotropic: bool,
    pub degenerate_axis: bool,
}

pub fn summarize(traj: &Trajectory) -> MobilitySummary {
    let com = center_of_mass(traj);
    let tensor = tensor_about(traj, com);
    let n = traj.len();
    let rg = (tensor.trace() / n as f64).sqrt();
    let angle = principal_angle(&tensor);
    let axes = sigma_axes_about(traj, com, angle.theta);
    MobilitySummary {
        user_id: traj.user_id().to_string(),
        n,
        com,
        rg,
        tensor,
        theta: axes.theta,
        mu: tensor.mu(),
        sigma_x: axes.sigma_x,
        sigma_y: axes.sigma_y,
        top_positions: top_frequent_positions(traj, TOP_POSITIONS),
        isotropic: angle.isotropic,
        degenerate_axis: axes.degenerate_axis,
    }
}

/// Summaries in user-id order, computed in parallel when enabled.
pub fn summarize_all(trajectories: &BTreeMap<String, Trajectory>) -> Vec<MobilitySummary> {
    let trajs: Vec<&Trajectory> = trajectories.values().collect();
    par::map(&trajs, |t| summarize(t))
}

pub fn summarize_all_seq(trajectories: &BTreeMap<String, Trajectory>) -> Vec<MobilitySummary> {
    trajectories.values().map(summarize).collect()
}

pub const SUMMARY_HEADER: &str = "user_id,n,x_cm,y_cm,rg_km,theta_rad,mu_km2,sigma_x_km,sigma_y_km,degenerate,top1_x,top1_y,top1_n,top2_x,top2_y,top2_n";

pub fn write_summaries<W: Write>(mut out: W, summaries: &[MobilitySummary]) -> io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summaries {
        write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.user_id,
            s.n,
            sig9(s.com.x),
            sig9(s.com.y),
            sig9(s.rg),
            sig9(s.theta),
            sig9(s.mu),
            sig9(s.sigma_x),
            sig9(s.sigma_y),
            u8::from(s.degenerate_axis),
        )?;
        for slot in 0..TOP_POSITIONS {
            match s.top_positions.get(slot) {
                Some((p, c)) => write!(out, ",{},{},{}", sig9(p.x), sig9(p.y), c)?,
                None => write!(out, ",,,")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
