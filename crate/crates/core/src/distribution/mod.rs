//! Population-level distributions: jump sizes, waiting times, `P(r_g)`,
//! truncated power-law fitting and radius-of-gyration bands.

mod histogram;
mod powerlaw;
pub mod quadrature;
pub mod simplex;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::kernel::MobilitySummary;
use crate::par;
use crate::trajectory::Trajectory;

pub use histogram::{log_binned_histogram, Binning, Histogram, HistogramKind};
pub use powerlaw::{
    fit_truncated_power_law, log_likelihood, FitRange, PowerLawFit, R0Mode, TruncatedPowerLaw,
    FIT_MAX_ITERATIONS, FIT_X_TOL, MIN_FIT_SAMPLES, NORMALIZATION_REL_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("trajectory has {n} point(s); at least 2 are needed")]
    TooShort { n: usize },
    #[error("bad binning: {0}")]
    BadBinning(String),
    #[error("histogram edges differ")]
    EdgeMismatch,
    #[error("empty population")]
    EmptyPopulation,
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("{found} samples in fit range, at least {needed} needed")]
    TooFewSamples { found: usize, needed: usize },
    #[error("simplex refinement did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
}

/// Distances between consecutive recorded positions, km.
pub fn jump_sizes(traj: &Trajectory) -> Result<Vec<f64>, DistributionError> {
    if traj.len() < 2 {
        return Err(DistributionError::TooShort { n: traj.len() });
    }
    Ok(traj
        .points()
        .windows(2)
        .map(|w| w[0].pos.distance(&w[1].pos))
        .collect())
}

/// Seconds between consecutive activities.
pub fn waiting_times(traj: &Trajectory) -> Result<Vec<i64>, DistributionError> {
    if traj.len() < 2 {
        return Err(DistributionError::TooShort { n: traj.len() });
    }
    Ok(traj
        .points()
        .windows(2)
        .map(|w| w[1].t.seconds() - w[0].t.seconds())
        .collect())
}

/// All jump sizes of users with at least two points, in user order.
pub fn population_jumps(trajectories: &BTreeMap<String, Trajectory>) -> Vec<f64> {
    let trajs: Vec<&Trajectory> = trajectories.values().collect();
    par::map(&trajs, |t| jump_sizes(t).unwrap_or_default()).concat()
}

/// All waiting times of users with at least two points, in user order.
pub fn population_waits(trajectories: &BTreeMap<String, Trajectory>) -> Vec<i64> {
    let trajs: Vec<&Trajectory> = trajectories.values().collect();
    par::map(&trajs, |t| waiting_times(t).unwrap_or_default()).concat()
}

pub fn rg_distribution(
    summaries: &[MobilitySummary],
    binning: &Binning,
) -> Result<Histogram, DistributionError> {
    if summaries.is_empty() {
        return Err(DistributionError::EmptyPopulation);
    }
    let mut h = Histogram::empty(binning)?;
    h.extend(summaries.iter().map(|s| s.rg));
    Ok(h)
}

/// `r_g^exp(−r_g)`, evaluated literally. This is not a normalisable
/// density (it tends to 1); it is kept for display next to the fitted law.
pub fn eval_eq13_literal(rg: f64) -> Result<f64, DistributionError> {
    if !(rg > 0.0) {
        return Err(DistributionError::BadArgument(format!(
            "r_g must be positive, got {rg}"
        )));
    }
    Ok(rg.powf((-rg).exp()))
}

/// Radius-of-gyration band. Bins are lower-inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RgBand {
    /// `r_g < 10 km`
    Low,
    /// `10 ≤ r_g < 20 km`
    Mid,
    /// `r_g ≥ 20 km`
    High,
}

impl RgBand {
    pub const ALL: [RgBand; 3] = [RgBand::Low, RgBand::Mid, RgBand::High];
    pub const LOW_MID_KM: f64 = 10.0;
    pub const MID_HIGH_KM: f64 = 20.0;

    pub fn as_str(self) -> &'static str {
        match self {
            RgBand::Low => "LOW",
            RgBand::Mid => "MID",
            RgBand::High => "HIGH",
        }
    }
}

impl fmt::Display for RgBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_band(rg: f64) -> Result<RgBand, DistributionError> {
    if !rg.is_finite() || rg < 0.0 {
        return Err(DistributionError::BadArgument(format!(
            "r_g must be finite and non-negative, got {rg}"
        )));
    }
    Ok(if rg < RgBand::LOW_MID_KM {
        RgBand::Low
    } else if rg < RgBand::MID_HIGH_KM {
        RgBand::Mid
    } else {
        RgBand::High
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BandCensus {
    pub low: usize,
    pub mid: usize,
    pub high: usize,
}

impl BandCensus {
    pub fn get(&self, band: RgBand) -> usize {
        match band {
            RgBand::Low => self.low,
            RgBand::Mid => self.mid,
            RgBand::High => self.high,
        }
    }

    pub fn total(&self) -> usize {
        self.low + self.mid + self.high
    }

    /// CSV `band,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "band,count")?;
        for band in RgBand::ALL {
            writeln!(out, "{band},{}", self.get(band))?;
        }
        Ok(())
    }
}

/// Count users per band. Summaries always carry a finite, non-negative
/// `r_g`, so every user lands in exactly one band.
pub fn band_census(summaries: &[MobilitySummary]) -> BandCensus {
    let mut c = BandCensus::default();
    for s in summaries {
        match classify_band(s.rg).expect("summary r_g is finite and non-negative") {
            RgBand::Low => c.low += 1,
            RgBand::Mid => c.mid += 1,
            RgBand::High => c.high += 1,
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Position, Timestamp};
    use crate::kernel::summarize;
    use crate::trajectory::TrackPoint;

    fn traj(pts: &[(i64, f64, f64)]) -> Trajectory {
        Trajectory::new(
            "u",
            pts.iter()
                .map(|&(t, x, y)| TrackPoint {
                    t: Timestamp(t),
                    pos: Position::new(x, y),
                })
                .collect(),
        )
        .unwrap()
    }

    fn with_rg(rgs: &[f64]) -> Vec<MobilitySummary> {
        rgs.iter()
            .map(|&r| summarize(&traj(&[(0, -r, 0.0), (1, r, 0.0)])))
            .collect()
    }

    #[test]
    fn jump_examples() {
        assert_eq!(jump_sizes(&traj(&[(0, 0.0, 0.0), (1, 3.0, 4.0)])).unwrap(), [5.0]);
        assert_eq!(
            jump_sizes(&traj(&[(0, 0.0, 0.0), (1, 0.0, 0.0), (2, 0.0, 0.0)])).unwrap(),
            [0.0, 0.0]
        );
        assert_eq!(
            jump_sizes(&traj(&[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 2.0)])).unwrap(),
            [1.0, 2.0]
        );
        assert_eq!(
            jump_sizes(&traj(&[(0, 0.0, 0.0)])),
            Err(DistributionError::TooShort { n: 1 })
        );
    }

    #[test]
    fn wait_examples() {
        let w = |ts: &[i64]| {
            waiting_times(&traj(&ts.iter().map(|&t| (t, 0.0, 0.0)).collect::<Vec<_>>()))
        };
        assert_eq!(w(&[0, 60]).unwrap(), [60]);
        assert_eq!(w(&[0, 60, 60]).unwrap(), [60, 0]);
        assert_eq!(w(&[10, 25, 100]).unwrap(), [15, 75]);
        assert!(w(&[5]).is_err());
    }

    #[test]
    fn rg_distribution_examples() {
        let h = rg_distribution(&with_rg(&[1.0, 1.0, 5.0]), &Binning::Edges(vec![0.0, 2.0, 10.0]))
            .unwrap();
        assert_eq!(h.counts, [2, 1]);
        let h = rg_distribution(&with_rg(&[3.0]), &Binning::default_log()).unwrap();
        assert_eq!(h.total, 1);
        let h = rg_distribution(&with_rg(&[0.0, 0.0]), &Binning::default_log()).unwrap();
        assert_eq!(h.underflow, 2);
        assert_eq!(
            rg_distribution(&[], &Binning::default_log()),
            Err(DistributionError::EmptyPopulation)
        );
    }

    #[test]
    fn eq13_literal_examples() {
        assert_eq!(eval_eq13_literal(1.0).unwrap(), 1.0);
        // 2^(e^-2) = 2^0.135335283
        let v = eval_eq13_literal(2.0).unwrap();
        assert!((v - 2f64.powf(0.135_335_283_236_612_7)).abs() < 1e-15);
        assert!((v - 1.098348).abs() < 1e-6);
        assert!((eval_eq13_literal(700.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(eval_eq13_literal(0.0).is_err());
        assert!(eval_eq13_literal(-1.0).is_err());
    }

    #[test]
    fn band_examples() {
        assert_eq!(classify_band(5.0).unwrap(), RgBand::Low);
        assert_eq!(classify_band(15.0).unwrap(), RgBand::Mid);
        assert_eq!(classify_band(10.0).unwrap(), RgBand::Mid);
        assert_eq!(classify_band(20.0).unwrap(), RgBand::High);
        assert_eq!(classify_band(25.0).unwrap(), RgBand::High);
        assert_eq!(classify_band(0.0).unwrap(), RgBand::Low);
        assert!(classify_band(-0.1).is_err());
        assert!(classify_band(f64::NAN).is_err());
        assert!(classify_band(f64::INFINITY).is_err());
    }

    #[test]
    fn census_examples() {
        let c = band_census(&with_rg(&[1.0, 5.0, 15.0, 25.0]));
        assert_eq!(c, BandCensus { low: 2, mid: 1, high: 1 });
        assert_eq!(band_census(&[]), BandCensus::default());
        let c = band_census(&with_rg(&[0.0; 4]));
        assert_eq!(c, BandCensus { low: 4, mid: 0, high: 0 });
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "band,count\nLOW,4\nMID,0\nHIGH,0\n");
    }

    proptest::proptest! {
        #[test]
        fn bands_partition_the_half_line(rg in 0.0f64..1e6) {
            let band = classify_band(rg).unwrap();
            let hits = [rg < 10.0, (10.0..20.0).contains(&rg), rg >= 20.0];
            proptest::prop_assert_eq!(hits.iter().filter(|&&h| h).count(), 1);
            proptest::prop_assert!(hits[RgBand::ALL.iter().position(|&b| b == band).unwrap()]);
        }

        #[test]
        fn jumps_and_waits_shapes(steps in proptest::collection::vec((0i64..1000, -5.0f64..5.0, -5.0f64..5.0), 2..50)) {
            let mut t = 0;
            let pts: Vec<(i64, f64, f64)> = steps.iter().map(|&(dt, x, y)| { t += dt; (t, x, y) }).collect();
            let tr = traj(&pts);
            let j = jump_sizes(&tr).unwrap();
            let w = waiting_times(&tr).unwrap();
            proptest::prop_assert_eq!(j.len(), tr.len() - 1);
            proptest::prop_assert!(j.iter().all(|&d| d >= 0.0));
            proptest::prop_assert!(w.iter().all(|&d| d >= 0));
            let span = tr.points().last().unwrap().t.seconds() - tr.points()[0].t.seconds();
            proptest::prop_assert_eq!(w.iter().sum::<i64>(), span);
        }
    }
}
