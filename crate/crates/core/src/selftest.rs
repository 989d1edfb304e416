//! Built-in invariant suite: oracle agreement, moment identities, the
//! closed-form angle cross-check and the intrinsic-frame contract, run over
//! a seeded corpus of mixed Gaussian and commuter trajectories.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{Position, Timestamp};
use crate::kernel::{
    inertia_tensor, principal_angle, radius_of_gyration, rg_time_series, summarize,
    to_intrinsic_frame, InertiaTensor, MobilitySummary,
};
use crate::par;
use crate::synth::{gen_user, naive_summary_oracle, user_seed, UserSpec};
use crate::trajectory::Trajectory;

pub const TOLERANCE: f64 = 1e-9;
pub const CORPUS_SIZE: usize = 1000;
pub const CORPUS_SEED: u64 = 20_240_601;
pub const MAX_CORPUS_EVENTS: usize = 500;

/// `count` trajectories with `n ∈ [1, 500]`, half isotropic Gaussian clouds
/// and half two-cluster commuters, homes within 50 km of the origin and
/// cluster scales log-uniform in `[0.01, 20]` km.
pub fn mixed_corpus(count: usize, seed: u64) -> Vec<Trajectory> {
    par::map_range(count, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(user_seed(seed, i as u64));
        let n_events = rng.random_range(1..=MAX_CORPUS_EVENTS);
        let scale_km = 10f64.powf(rng.random_range(-2.0..(20f64).log10()));
        let home = Position::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let work = rng.random_bool(0.5).then(|| {
            let d = scale_km * rng.random_range(2.0..20.0);
            let a = rng.random_range(0.0..2.0 * PI);
            Position::new(home.x + d * a.cos(), home.y + d * a.sin())
        });
        let spec = UserSpec {
            user_id: format!("c{i:05}"),
            home,
            work,
            scale_km,
            n_events,
            t_start: Timestamp(1_717_200_000),
            t_end: Timestamp(1_717_804_799),
            seed: rng.random(),
        };
        gen_user(&spec).expect("valid corpus spec")
    })
}

/// `|a − b| ≤ tol · max(|a|, |b|, scale)`.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    rel_err(a, b, scale) <= tol
}

pub fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / a.abs().max(b.abs()).max(scale.abs())
}

/// Distance between two angles modulo π.
pub fn angle_gap_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Largest per-field disagreement between two summaries of the same
/// trajectory, or a description of a discrete mismatch. Lengths are
/// compared relative to the trajectory's own size, μ relative to the
/// tensor trace, angles modulo π.
pub fn summary_disagreement(a: &MobilitySummary, b: &MobilitySummary) -> Result<f64, String> {
    if a.n != b.n || a.user_id != b.user_id {
        return Err(format!("{}: identity fields differ", a.user_id));
    }
    if a.top_positions != b.top_positions {
        return Err(format!("{}: frequent positions differ", a.user_id));
    }
    if a.isotropic != b.isotropic || a.degenerate_axis != b.degenerate_axis {
        return Err(format!("{}: flags differ", a.user_id));
    }
    let len = a.rg.max(b.rg);
    let trace = a.tensor.trace().max(b.tensor.trace());
    let errs = [
        rel_err(a.com.x, b.com.x, len),
        rel_err(a.com.y, b.com.y, len),
        rel_err(a.rg, b.rg, len),
        rel_err(a.sigma_x, b.sigma_x, len),
        rel_err(a.sigma_y, b.sigma_y, len),
        rel_err(a.mu, b.mu, trace),
        rel_err(a.tensor.ixx, b.tensor.ixx, trace),
        rel_err(a.tensor.iyy, b.tensor.iyy, trace),
        rel_err(a.tensor.ixy, b.tensor.ixy, trace),
        if a.isotropic { 0.0 } else { angle_gap_mod_pi(a.theta, b.theta) },
    ];
    Ok(errs.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    /// Worst observed error, in the property's own tolerance units.
    pub worst: f64,
    pub detail: String,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (checked {}, worst {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.worst
        )?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub properties: Vec<PropertyResult>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

impl fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            writeln!(f, "{p}")?;
        }
        let failed = self.properties.iter().filter(|p| !p.passed).count();
        writeln!(f, "{} properties, {} failed", self.properties.len(), failed)
    }
}

/// Fold per-item errors into a property result.
fn collect(name: &'static str, tol: f64, items: Vec<Result<f64, String>>) -> PropertyResult {
    let checked = items.len();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for item in items {
        match item {
            Ok(e) => {
                worst = worst.max(e);
                if !(e <= tol) {
                    failures.push(format!("error {e:.3e}"));
                }
            }
            Err(msg) => failures.push(msg),
        }
    }
    let detail = match failures.len() {
        0 => String::new(),
        k => format!("{k} failure(s), first: {}", failures[0]),
    };
    PropertyResult {
        name,
        passed: failures.is_empty(),
        checked,
        worst,
        detail,
    }
}

/// Test hook applied to kernel summaries before they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tamper {
    /// Multiply every radius of gyration by this factor.
    pub rg_factor: Option<f64>,
}

impl Tamper {
    fn apply(&self, mut s: MobilitySummary) -> MobilitySummary {
        if let Some(k) = self.rg_factor {
            s.rg *= k;
        }
        s
    }

    fn rg(&self, rg: f64) -> f64 {
        self.rg_factor.map_or(rg, |k| rg * k)
    }
}

pub fn check_oracle_agreement(corpus: &[Trajectory], tamper: Tamper) -> PropertyResult {
    let items = par::map(corpus, |t| {
        summary_disagreement(&tamper.apply(summarize(t)), &naive_summary_oracle(t))
    });
    collect("oracle agreement", TOLERANCE, items)
}

/// `n · rg² = ixx + iyy`, with `rg` and the tensor from separate passes.
pub fn check_trace_identity(corpus: &[Trajectory], tamper: Tamper) -> PropertyResult {
    let items = par::map(corpus, |t| {
        let rg = tamper.rg(radius_of_gyration(t));
        let tensor = inertia_tensor(t);
        let lhs = t.len() as f64 * rg * rg;
        Ok(rel_err(lhs, tensor.trace(), 0.0))
    });
    collect("trace identity", TOLERANCE, items)
}

pub fn check_pythagorean_identity(corpus: &[Trajectory], tamper: Tamper) -> PropertyResult {
    let items = par::map(corpus, |t| {
        let s = tamper.apply(summarize(t));
        let lhs = s.sigma_x * s.sigma_x + s.sigma_y * s.sigma_y;
        Ok(rel_err(lhs, s.rg * s.rg, 0.0))
    });
    collect("pythagorean identity", TOLERANCE, items)
}

/// Tensors with an exactly zero off-diagonal term, where the closed-form
/// cosine is 0/0 or exactly 0.
pub fn axis_aligned_cases() -> Vec<(Trajectory, f64)> {
    let mk = |pts: &[(f64, f64)]| {
        let ps: Vec<Position> = pts.iter().map(|&(x, y)| Position::new(x, y)).collect();
        Trajectory::from_positions("axis", &ps).expect("non-empty")
    };
    vec![
        (mk(&[(-1.0, 0.0), (1.0, 0.0)]), 0.0),
        (mk(&[(0.0, -1.0), (0.0, 1.0)]), PI / 2.0),
        (mk(&[(-3.0, -1.0), (3.0, -1.0), (3.0, 1.0), (-3.0, 1.0)]), 0.0),
        (mk(&[(-1.0, -3.0), (1.0, -3.0), (1.0, 3.0), (-1.0, 3.0)]), PI / 2.0),
        (mk(&[(10.0, 5.0), (14.0, 5.0), (12.0, 5.0)]), 0.0),
    ]
}

fn eigen_gap(t: &InertiaTensor) -> f64 {
    let e = SymmetricEigen::new(Matrix2::new(t.ixx, t.ixy, t.ixy, t.iyy)).eigenvalues;
    (e[0] - e[1]).abs()
}

/// μ equals the eigenvalue gap from a general eigensolver, and the
/// closed-form cosine agrees with the principal angle up to sign.
pub fn check_closed_form_angle(corpus: &[Trajectory]) -> PropertyResult {
    let mut items = par::map(corpus, |t| {
        let tensor = inertia_tensor(t);
        let mu_err = rel_err(tensor.mu(), eigen_gap(&tensor), tensor.trace());
        let mu = tensor.mu();
        if tensor.ixy.abs() <= 1e-9 || mu <= 1e-9 {
            return Ok(mu_err);
        }
        let theta = principal_angle(&tensor).theta;
        let Some(cos) = tensor.closed_form_cos_theta() else {
            return Err(format!("{}: closed form undefined off-axis", t.user_id()));
        };
        let cos_err = (cos.abs() - theta.cos().abs()).abs();
        Ok(mu_err.max(cos_err))
    });
    for (t, want) in axis_aligned_cases() {
        let tensor = inertia_tensor(&t);
        let angle = principal_angle(&tensor);
        items.push(if angle.theta == want && tensor.ixy == 0.0 {
            Ok(0.0)
        } else {
            Err(format!("axis-aligned case gave θ = {}", angle.theta))
        });
    }
    collect("mu gap and closed-form angle", TOLERANCE, items)
}

/// Mean 0, unit standard deviation per axis, major axis first, most
/// frequent position on the non-negative `u` side.
pub fn check_intrinsic_frame(corpus: &[Trajectory]) -> PropertyResult {
    let items = par::map(corpus, |t| {
        if t.len() < 2 || radius_of_gyration(t) == 0.0 {
            return Ok(0.0);
        }
        let s = summarize(t);
        let frame = to_intrinsic_frame(t).map_err(|e| e.to_string())?;
        let n = frame.points.len() as f64;
        let mean_u = frame.points.iter().map(|p| p.u).sum::<f64>() / n;
        let mean_v = frame.points.iter().map(|p| p.v).sum::<f64>() / n;
        let sd = |f: &dyn Fn(&crate::kernel::IntrinsicPoint) -> f64, m: f64| {
            (frame.points.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>() / n).sqrt()
        };
        let sd_u = sd(&|p| p.u, mean_u);
        let sd_v = sd(&|p| p.v, mean_v);
        let mut err = mean_u.abs().max(mean_v.abs()).max((sd_u - 1.0).abs());
        if frame.degenerate_axis {
            if frame.points.iter().any(|p| p.v != 0.0) {
                return Err(format!("{}: degenerate axis not zeroed", t.user_id()));
            }
        } else {
            err = err.max((sd_v - 1.0).abs());
        }
        if s.sigma_x < s.sigma_y {
            return Err(format!("{}: minor axis exceeds major", t.user_id()));
        }
        let (top, _) = s.top_positions[0];
        let idx = t.positions().position(|p| p == top).expect("top position present");
        if frame.points[idx].u < 0.0 {
            return Err(format!("{}: most frequent position at u < 0", t.user_id()));
        }
        Ok(err)
    });
    collect("intrinsic frame", TOLERANCE, items)
}

/// Series endpoint equals the whole-trajectory radius of gyration exactly.
pub fn check_series_endpoint(corpus: &[Trajectory]) -> PropertyResult {
    let items = par::map(corpus, |t| {
        let series = rg_time_series(t);
        let last = series.last().map(|&(_, r)| r);
        if last == Some(radius_of_gyration(t)) && series.len() == t.len() {
            Ok(0.0)
        } else {
            Err(format!("{}: series endpoint differs", t.user_id()))
        }
    });
    collect("rg series endpoint", 0.0, items)
}

pub fn run_with(tamper: Tamper) -> SelfTestReport {
    let corpus = mixed_corpus(CORPUS_SIZE, CORPUS_SEED);
    SelfTestReport {
        properties: vec![
            check_oracle_agreement(&corpus, tamper),
            check_trace_identity(&corpus, tamper),
            check_pythagorean_identity(&corpus, tamper),
            check_closed_form_angle(&corpus),
            check_intrinsic_frame(&corpus),
            check_series_endpoint(&corpus),
        ],
    }
}

pub fn run() -> SelfTestReport {
    run_with(Tamper::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_spans_sizes() {
        let a = mixed_corpus(200, 1);
        let b = mixed_corpus(200, 1);
        assert_eq!(a, b);
        assert!(a.iter().any(|t| t.len() < 20));
        assert!(a.iter().any(|t| t.len() > 400));
        assert!(a.iter().all(|t| (1..=MAX_CORPUS_EVENTS).contains(&t.len())));
    }

    #[test]
    fn angle_gap_wraps() {
        assert!(angle_gap_mod_pi(0.0, PI - 1e-12) < 1e-11);
        assert!((angle_gap_mod_pi(0.1, 0.3) - 0.2).abs() < 1e-15);
        assert!(angle_gap_mod_pi(1.0, 1.0 + PI) < 1e-15);
    }

    #[test]
    fn tampered_rg_breaks_trace_identity() {
        let corpus = mixed_corpus(50, 3);
        assert!(check_trace_identity(&corpus, Tamper::default()).passed);
        let tampered = check_trace_identity(&corpus, Tamper { rg_factor: Some(1.01) });
        assert!(!tampered.passed);
    }
}
