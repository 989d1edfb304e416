use rand::Rng;

use super::SynthError;
use crate::distribution::quadrature::{integrate_log, panel};
use crate::distribution::TruncatedPowerLaw;

const CDF_NODES: usize = 1024;
/// Relative width at which bisection stops.
pub const INVERSION_TOL: f64 = 1e-10;

/// Inverse-CDF sampler for `p(r) ∝ (r + r0)^(−β) exp(−r/κ)` on
/// `[r_min, r_max]`. `β = 0` gives a truncated exponential, `κ = ∞` a pure
/// power law.
#[derive(Debug, Clone)]
pub struct TruncatedPowerLawSampler {
    law: TruncatedPowerLaw,
    r_min: f64,
    r_max: f64,
    nodes: Vec<f64>,
    /// Unnormalised CDF at each node.
    cdf: Vec<f64>,
}

impl TruncatedPowerLawSampler {
    pub fn new(beta: f64, kappa: f64, r_min: f64, r_max: f64) -> Result<Self, SynthError> {
        Self::with_offset(beta, kappa, 0.0, r_min, r_max)
    }

    pub fn with_offset(
        beta: f64,
        kappa: f64,
        r0: f64,
        r_min: f64,
        r_max: f64,
    ) -> Result<Self, SynthError> {
        let ok = beta >= 0.0
            && beta.is_finite()
            && kappa > 0.0
            && r0 >= 0.0
            && r0.is_finite()
            && r_min > 0.0
            && r_max > r_min
            && r_max.is_finite();
        if !ok {
            return Err(SynthError::BadSpec(format!(
                "sampler needs β ≥ 0, κ > 0, r0 ≥ 0, 0 < r_min < r_max (got β={beta}, κ={kappa}, r0={r0}, range={r_min}:{r_max})"
            )));
        }
        let law = TruncatedPowerLaw { beta, kappa, r0 };
        let (a, b) = (r_min.ln(), r_max.ln());
        let nodes: Vec<f64> = (0..=CDF_NODES)
            .map(|i| (a + (b - a) * i as f64 / CDF_NODES as f64).exp())
            .collect();
        let mut cdf = Vec::with_capacity(nodes.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += integrate_log(|r| law.kernel(r), w[0], w[1], 1e-13).value;
            cdf.push(acc);
        }
        Ok(Self {
            law,
            r_min,
            r_max,
            nodes,
            cdf,
        })
    }

    pub fn law(&self) -> TruncatedPowerLaw {
        self.law
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    fn partial(&self, j: usize, r: f64) -> f64 {
        let law = self.law;
        self.cdf[j] + panel(|s: f64| { let x = s.exp(); law.kernel(x) * x }, self.nodes[j].ln(), r.ln())
    }

    /// CDF at `r`, normalised to `[0, 1]`.
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= self.r_min {
            return 0.0;
        }
        if r >= self.r_max {
            return 1.0;
        }
        let j = self.nodes.partition_point(|&x| x <= r) - 1;
        self.partial(j, r) / self.cdf[CDF_NODES]
    }

    /// Value with CDF equal to `u ∈ [0, 1)`, by bisection.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.cdf[CDF_NODES];
        let j = self
            .cdf
            .partition_point(|&c| c <= target)
            .clamp(1, CDF_NODES)
            - 1;
        let (mut lo, mut hi) = (self.nodes[j], self.nodes[j + 1]);
        while hi - lo > INVERSION_TOL * lo {
            let mid = 0.5 * (lo + hi);
            if self.partial(j, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn cdf_of_pure_power_law_is_exact() {
        let s = TruncatedPowerLawSampler::new(1.5, f64::INFINITY, 1.0, 100.0).unwrap();
        // F(r) = (1 - r^-0.5) / (1 - 100^-0.5)
        for r in [1.5f64, 4.0, 37.0, 99.0] {
            let exact = (1.0 - r.powf(-0.5)) / 0.9;
            assert!((s.cdf(r) - exact).abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let s = TruncatedPowerLawSampler::new(1.5, 50.0, 0.1, 1000.0).unwrap();
        for u in [0.0, 1e-6, 0.1, 0.5, 0.9, 0.999_999] {
            let r = s.quantile(u);
            assert!((s.cdf(r) - u).abs() < 1e-9, "{u}");
        }
    }

    #[test]
    fn exponential_mean() {
        // β = 0, [0.5, 2000], κ = 20: mean ≈ 0.5 + 20
        let s = TruncatedPowerLawSampler::new(0.0, 20.0, 0.5, 2000.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 50_000;
        let mean = (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 20.5).abs() < 0.4, "{mean}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TruncatedPowerLawSampler::new(-1.0, 50.0, 1.0, 10.0).is_err());
        assert!(TruncatedPowerLawSampler::new(1.0, 0.0, 1.0, 10.0).is_err());
        assert!(TruncatedPowerLawSampler::new(1.0, 50.0, 0.0, 10.0).is_err());
        assert!(TruncatedPowerLawSampler::new(1.0, 50.0, 10.0, 10.0).is_err());
    }
}
