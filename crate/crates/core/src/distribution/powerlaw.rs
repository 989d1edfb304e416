//! Truncated power law `p(r) = C (r + r0)^(−β) exp(−r/κ)` on a finite range,
//! fitted by maximum likelihood.

use std::io::{self, Write};

use super::quadrature::integrate_log;
use super::simplex::{minimize, SimplexOptions};
use super::DistributionError;
use crate::numfmt::sig9;

/// Relative accuracy of the normalising integral.
pub const NORMALIZATION_REL_TOL: f64 = 1e-12;
pub const MIN_FIT_SAMPLES: usize = 100;
pub const FIT_X_TOL: f64 = 1e-8;
pub const FIT_MAX_ITERATIONS: usize = 500;

const BETA_GRID: (f64, f64, usize) = (0.1, 5.0, 50);
const KAPPA_GRID_POINTS: usize = 40;
const R0_GRID_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R0Mode {
    FixedZero,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRange {
    pub min: f64,
    pub max: f64,
}

impl FitRange {
    pub fn new(min: f64, max: f64) -> Result<Self, DistributionError> {
        if !(min > 0.0) || !(max > min) || !max.is_finite() {
            return Err(DistributionError::BadArgument(format!(
                "fit range needs 0 < min < max (got {min}:{max})"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, r: f64) -> bool {
        self.min <= r && r <= self.max
    }
}

/// Parameters of the truncated power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPowerLaw {
    pub beta: f64,
    pub kappa: f64,
    pub r0: f64,
}

impl TruncatedPowerLaw {
    /// Unnormalised density.
    pub fn kernel(&self, r: f64) -> f64 {
        (r + self.r0).powf(-self.beta) * (-r / self.kappa).exp()
    }

    pub fn log_kernel(&self, r: f64) -> f64 {
        -self.beta * (r + self.r0).ln() - r / self.kappa
    }

    /// `∫ kernel` over the range.
    pub fn normalization(&self, range: FitRange) -> f64 {
        integrate_log(|r| self.kernel(r), range.min, range.max, NORMALIZATION_REL_TOL).value
    }

    /// True when the kernel is a normalisable density shape. `β = 0` is the
    /// pure exponential.
    pub fn is_valid(&self) -> bool {
        self.beta >= 0.0
            && self.beta.is_finite()
            && self.kappa > 0.0
            && self.kappa.is_finite()
            && self.r0 >= 0.0
            && self.r0.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub beta: f64,
    pub kappa: f64,
    pub r0: f64,
    pub log_likelihood: f64,
    pub n_samples: usize,
    pub fit_range: FitRange,
    pub iterations: usize,
}

impl PowerLawFit {
    pub fn law(&self) -> TruncatedPowerLaw {
        TruncatedPowerLaw {
            beta: self.beta,
            kappa: self.kappa,
            r0: self.r0,
        }
    }

    /// Normalised density; zero outside the fit range.
    pub fn density(&self, r: f64) -> f64 {
        if !self.fit_range.contains(r) {
            return 0.0;
        }
        let law = self.law();
        law.kernel(r) / law.normalization(self.fit_range)
    }

    /// Key=value report: `beta=… kappa=… r0=… loglik=… n=…`.
    pub fn write_report<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "beta={} kappa={} r0={} loglik={} n={}",
            sig9(self.beta),
            sig9(self.kappa),
            sig9(self.r0),
            sig9(self.log_likelihood),
            self.n_samples
        )
    }
}

/// Sufficient statistics of the in-range samples for `r0 = 0`.
struct Samples {
    values: Vec<f64>,
    sum_r: f64,
    sum_ln_r: f64,
}

impl Samples {
    fn neg_log_likelihood(&self, law: &TruncatedPowerLaw, range: FitRange) -> f64 {
        if !law.is_valid() {
            return f64::INFINITY;
        }
        let z = law.normalization(range);
        if !(z > 0.0) || !z.is_finite() {
            return f64::INFINITY;
        }
        let n = self.values.len() as f64;
        let sum_ln = if law.r0 == 0.0 {
            self.sum_ln_r
        } else {
            self.values.iter().map(|r| (r + law.r0).ln()).sum()
        };
        law.beta * sum_ln + self.sum_r / law.kappa + n * z.ln()
    }
}

/// Log-likelihood of `samples` (those inside `range`) under `law`.
pub fn log_likelihood(samples: &[f64], law: &TruncatedPowerLaw, range: FitRange) -> f64 {
    let values: Vec<f64> = samples.iter().copied().filter(|&r| range.contains(r)).collect();
    let s = Samples {
        sum_r: values.iter().sum(),
        sum_ln_r: values.iter().map(|r| r.ln()).sum(),
        values,
    };
    -s.neg_log_likelihood(law, range)
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Maximum-likelihood fit over the samples that fall inside `range`.
///
/// A coarse grid over `β ∈ [0.1, 5]`, log-spaced `κ ∈ [r_min, 100 r_max]`
/// (and `r0` when free) seeds a Nelder–Mead refinement in
/// `(β, ln κ[, √r0])`. The search is deterministic.
pub fn fit_truncated_power_law(
    samples: &[f64],
    r0_mode: R0Mode,
    range: FitRange,
) -> Result<PowerLawFit, DistributionError> {
    let values: Vec<f64> = samples.iter().copied().filter(|&r| range.contains(r)).collect();
    if values.len() < MIN_FIT_SAMPLES {
        return Err(DistributionError::TooFewSamples {
            found: values.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    let data = Samples {
        sum_r: values.iter().sum(),
        sum_ln_r: values.iter().map(|r| r.ln()).sum(),
        values,
    };

    let r0_candidates: Vec<f64> = match r0_mode {
        R0Mode::FixedZero => vec![0.0],
        R0Mode::Free => std::iter::once(0.0)
            .chain(log_space(0.01 * range.min, range.max, R0_GRID_POINTS))
            .collect(),
    };
    let (b_lo, b_hi, b_n) = BETA_GRID;
    let mut best = (f64::INFINITY, TruncatedPowerLaw { beta: 1.0, kappa: range.max, r0: 0.0 });
    for &r0 in &r0_candidates {
        for i in 0..b_n {
            let beta = b_lo + (b_hi - b_lo) * i as f64 / (b_n - 1) as f64;
            for kappa in log_space(range.min, 100.0 * range.max, KAPPA_GRID_POINTS) {
                let law = TruncatedPowerLaw { beta, kappa, r0 };
                let v = data.neg_log_likelihood(&law, range);
                if v < best.0 {
                    best = (v, law);
                }
            }
        }
    }

    let decode = |x: &[f64]| TruncatedPowerLaw {
        beta: x[0],
        kappa: x[1].exp(),
        r0: x.get(2).map_or(0.0, |s| s * s),
    };
    let start = best.1;
    let (x0, steps) = match r0_mode {
        R0Mode::FixedZero => (vec![start.beta, start.kappa.ln()], vec![0.1, 0.2]),
        R0Mode::Free => (
            vec![start.beta, start.kappa.ln(), start.r0.sqrt()],
            vec![0.1, 0.2, 0.1 * range.min.sqrt()],
        ),
    };
    // Fitted exponents are strictly positive; β ≤ 0 is a wall.
    let result = minimize(
        |x| {
            if x[0] <= 0.0 {
                return f64::INFINITY;
            }
            data.neg_log_likelihood(&decode(x), range)
        },
        &x0,
        &SimplexOptions {
            steps,
            x_tol: FIT_X_TOL,
            max_iterations: FIT_MAX_ITERATIONS,
        },
    );
    if !result.converged {
        return Err(DistributionError::NoConvergence {
            iterations: result.iterations,
        });
    }
    let law = decode(&result.x);
    Ok(PowerLawFit {
        beta: law.beta,
        kappa: law.kappa,
        r0: law.r0,
        log_likelihood: -data.neg_log_likelihood(&law, range),
        n_samples: data.values.len(),
        fit_range: range,
        iterations: result.iterations,
    })
}
