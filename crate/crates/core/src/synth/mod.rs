//! Seeded synthetic populations with known ground truth, and brute-force
//! reference implementations of the kernel metrics.

mod oracle;
mod sampler;

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::ingest::{CdrRecord, Position, Timestamp};
use crate::par;
use crate::trajectory::{TrackPoint, Trajectory};

pub use oracle::naive_summary_oracle;
pub use sampler::{TruncatedPowerLawSampler, INVERSION_TOL};

/// Share of a commuter's events spent at home; the rest are at work.
pub const COMMUTER_HOME_WEIGHT: f64 = 0.7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    BadSpec(String),
}

/// 64-bit finaliser from SplitMix64; maps a counter to a well-mixed seed.
pub fn mix_seed(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of user `index` under `master`.
pub fn user_seed(master: u64, index: u64) -> u64 {
    mix_seed(mix_seed(master) ^ index)
}

/// One synthetic user: an isotropic Gaussian cloud around `home`, or a
/// two-cluster commuter when `work` is set (70% of events at home).
#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    pub user_id: String,
    pub home: Position,
    pub work: Option<Position>,
    /// Per-axis standard deviation of each cluster, km.
    pub scale_km: f64,
    pub n_events: usize,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub seed: u64,
}

impl UserSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if !(self.scale_km > 0.0) || !self.scale_km.is_finite() {
            return Err(SynthError::BadSpec(format!("scale_km must be > 0, got {}", self.scale_km)));
        }
        if self.n_events == 0 {
            return Err(SynthError::BadSpec("n_events must be ≥ 1".into()));
        }
        if self.t_start > self.t_end {
            return Err(SynthError::BadSpec("t_start after t_end".into()));
        }
        Ok(())
    }
}

pub fn gen_user(spec: &UserSpec) -> Result<Trajectory, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (t0, t1) = (spec.t_start.seconds(), spec.t_end.seconds());
    let points = (0..spec.n_events)
        .map(|_| {
            let centre = match spec.work {
                Some(work) if rng.random::<f64>() >= COMMUTER_HOME_WEIGHT => work,
                _ => spec.home,
            };
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            TrackPoint {
                t: Timestamp(rng.random_range(t0..=t1)),
                pos: Position::new(centre.x + spec.scale_km * dx, centre.y + spec.scale_km * dy),
            }
        })
        .collect();
    Ok(Trajectory::new(spec.user_id.clone(), points).expect("n_events ≥ 1"))
}

/// Truncated power-law parameters for per-user target radii of gyration.
///
/// The default (β = 1.5, κ = 50 km on [0.2, 40] km) keeps measured radii
/// above the 0.1 km start of the default log binning and every point
/// within the projection guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgSampler {
    pub beta: f64,
    pub kappa: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for RgSampler {
    fn default() -> Self {
        Self {
            beta: 1.5,
            kappa: 50.0,
            r_min: 0.2,
            r_max: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub n_users: usize,
    pub rg_sampler: RgSampler,
    /// Inclusive range of events per user.
    pub events_per_user: (usize, usize),
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    /// Homes are spread uniformly over a disc of this radius around the
    /// origin.
    pub home_radius_km: f64,
    /// Probability that a user is a two-cluster commuter.
    pub commuter_fraction: f64,
    pub master_seed: u64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            n_users: 1000,
            rg_sampler: RgSampler::default(),
            events_per_user: (50, 300),
            // 2024-06-01T00:00:00Z .. 2024-06-07T23:59:59Z
            t_start: Timestamp(1_717_200_000),
            t_end: Timestamp(1_717_804_799),
            home_radius_km: 10.0,
            commuter_fraction: 0.0,
            master_seed: 0,
        }
    }
}

/// Ground truth for one generated user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTruth {
    pub spec: UserSpec,
    pub rg_target: f64,
}

fn user_id(index: usize, n_users: usize) -> String {
    let width = n_users.saturating_sub(1).to_string().len().max(6);
    format!("u{index:0width$}")
}

impl PopulationSpec {
    fn validate(&self) -> Result<TruncatedPowerLawSampler, SynthError> {
        let (lo, hi) = self.events_per_user;
        if self.n_users == 0 || lo == 0 || lo > hi {
            return Err(SynthError::BadSpec(format!(
                "need n_users ≥ 1 and 1 ≤ events min ≤ max (got {} users, events {lo}..={hi})",
                self.n_users
            )));
        }
        if self.t_start > self.t_end {
            return Err(SynthError::BadSpec("t_start after t_end".into()));
        }
        if !(0.0..=1.0).contains(&self.commuter_fraction) || !(self.home_radius_km >= 0.0) {
            return Err(SynthError::BadSpec(
                "commuter_fraction must be in [0, 1] and home_radius_km ≥ 0".into(),
            ));
        }
        let s = self.rg_sampler;
        TruncatedPowerLawSampler::new(s.beta, s.kappa, s.r_min, s.r_max)
    }

    /// Per-user specs, derived from `master_seed` by counter.
    pub fn user_specs(&self) -> Result<Vec<UserTruth>, SynthError> {
        let sampler = self.validate()?;
        Ok(par::map_range(self.n_users, |i| self.user_truth(&sampler, i)))
    }

    fn user_truth(&self, sampler: &TruncatedPowerLawSampler, index: usize) -> UserTruth {
        let mut rng = ChaCha8Rng::seed_from_u64(user_seed(self.master_seed, index as u64));
        let rg_target = sampler.sample(&mut rng);
        let (lo, hi) = self.events_per_user;
        let n_events = rng.random_range(lo..=hi);
        let radius = self.home_radius_km * rng.random::<f64>().sqrt();
        let angle = 2.0 * PI * rng.random::<f64>();
        let home = Position::new(radius * angle.cos(), radius * angle.sin());
        let commuter = rng.random::<f64>() < self.commuter_fraction;
        let (work, scale_km) = if commuter {
            // rg² = 2σ² + w(1 − w)D²; spend a quarter of rg² on the clusters.
            let w = COMMUTER_HOME_WEIGHT;
            let sigma = rg_target / (2.0 * SQRT_2);
            let d = rg_target * (0.75 / (w * (1.0 - w))).sqrt();
            let heading = 2.0 * PI * rng.random::<f64>();
            (
                Some(Position::new(home.x + d * heading.cos(), home.y + d * heading.sin())),
                sigma,
            )
        } else {
            (None, rg_target / SQRT_2)
        };
        UserTruth {
            spec: UserSpec {
                user_id: user_id(index, self.n_users),
                home,
                work,
                scale_km,
                n_events,
                t_start: self.t_start,
                t_end: self.t_end,
                seed: rng.next_u64(),
            },
            rg_target,
        }
    }
}

/// Records of every user, ordered by user index then time.
pub fn gen_population(spec: &PopulationSpec) -> Result<Vec<CdrRecord>, SynthError> {
    Ok(gen_population_with_truth(spec)?.0)
}

pub fn gen_population_with_truth(
    spec: &PopulationSpec,
) -> Result<(Vec<CdrRecord>, Vec<UserTruth>), SynthError> {
    let truths = spec.user_specs()?;
    let per_user = par::map(&truths, |u| {
        let traj = gen_user(&u.spec).expect("validated population spec");
        traj.points()
            .iter()
            .map(|p| CdrRecord {
                user_id: u.spec.user_id.clone(),
                t: p.t,
                pos: p.pos,
            })
            .collect::<Vec<_>>()
    });
    Ok((per_user.concat(), truths))
}
