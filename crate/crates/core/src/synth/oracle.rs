//! Literal, multi-pass evaluation of every summary field. Each quantity
//! gets its own pass over the data and no intermediate sums are shared
//! with [`crate::kernel`]. The principal axis comes from a general
//! symmetric eigensolver rather than the closed form used by the kernel.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, SymmetricEigen};

use crate::ingest::Position;
use crate::kernel::{InertiaTensor, MobilitySummary, DEGENERATE_REL, ISOTROPY_REL, TOP_POSITIONS};
use crate::trajectory::Trajectory;

fn mean_of(values: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    s / values.len() as f64
}

fn wrap_pi(theta: f64) -> f64 {
    let mut t = theta;
    while t < 0.0 {
        t += PI;
    }
    while t >= PI {
        t -= PI;
    }
    t
}

#[allow(clippy::needless_range_loop)]
pub fn naive_summary_oracle(traj: &Trajectory) -> MobilitySummary {
    let xs: Vec<f64> = traj.points().iter().map(|p| p.pos.x).collect();
    let ys: Vec<f64> = traj.points().iter().map(|p| p.pos.y).collect();
    let n = xs.len();

    let x_cm = mean_of(&xs);
    let y_cm = mean_of(&ys);

    let mut sq = 0.0;
    for i in 0..n {
        sq += (xs[i] - x_cm) * (xs[i] - x_cm) + (ys[i] - y_cm) * (ys[i] - y_cm);
    }
    let rg = (sq / n as f64).sqrt();

    let mut ixx = 0.0;
    for i in 0..n {
        ixx += (ys[i] - y_cm).powi(2);
    }
    let mut iyy = 0.0;
    for i in 0..n {
        iyy += (xs[i] - x_cm).powi(2);
    }
    let mut ixy = 0.0;
    for i in 0..n {
        ixy -= (xs[i] - x_cm) * (ys[i] - y_cm);
    }
    let iyx = ixy;
    let radicand = 4.0 * ixy * iyx + ixx * ixx - 2.0 * ixx * iyy + iyy * iyy;
    let mu = radicand.max(0.0).sqrt();

    let isotropic = mu <= ISOTROPY_REL * (ixx + iyy);
    let mut theta = if isotropic {
        0.0
    } else {
        let eig = SymmetricEigen::new(Matrix2::new(ixx, ixy, iyx, iyy));
        let minor = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
        let v = eig.eigenvectors.column(minor);
        wrap_pi(v[1].atan2(v[0]))
    };

    let (c, s) = (theta.cos(), theta.sin());
    let mut su = 0.0;
    for i in 0..n {
        let u = (xs[i] - x_cm) * c + (ys[i] - y_cm) * s;
        su += u * u;
    }
    let mut sv = 0.0;
    for i in 0..n {
        let v = -(xs[i] - x_cm) * s + (ys[i] - y_cm) * c;
        sv += v * v;
    }
    let mut sigma_x = (su / n as f64).sqrt();
    let mut sigma_y = (sv / n as f64).sqrt();
    if sigma_x < sigma_y {
        std::mem::swap(&mut sigma_x, &mut sigma_y);
        theta = wrap_pi(theta + FRAC_PI_2);
    }

    // Quadratic scan: count every position, keep first occurrences.
    let mut counted: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        let seen_before = (0..i).any(|j| xs[j] == xs[i] && ys[j] == ys[i]);
        if seen_before {
            continue;
        }
        let count = (0..n).filter(|&j| xs[j] == xs[i] && ys[j] == ys[i]).count();
        counted.push((i, count));
    }
    counted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top_positions = counted
        .iter()
        .take(TOP_POSITIONS)
        .map(|&(i, c)| (Position::new(xs[i], ys[i]), c))
        .collect();

    MobilitySummary {
        user_id: traj.user_id().to_string(),
        n,
        com: Position::new(x_cm, y_cm),
        rg,
        tensor: InertiaTensor { ixx, iyy, ixy },
        theta,
        mu,
        sigma_x,
        sigma_y,
        top_positions,
        isotropic,
        degenerate_axis: sigma_y <= DEGENERATE_REL * sigma_x,
    }
}
