use std::io::{self, Write};

use super::DistributionError;
use crate::numfmt::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramKind {
    Linear,
    Logarithmic,
}

/// How to lay out bin edges.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// `n_bins` equal-width bins over `[lo, hi)`.
    Linear { lo: f64, hi: f64, n_bins: usize },
    /// Edges `start · base^k` for `k = 0..=n_bins`.
    Log { base: f64, start: f64, n_bins: usize },
    /// Explicit, strictly increasing edges.
    Edges(Vec<f64>),
}

impl Binning {
    /// Base 2 from 0.1 km over 12 bins (0.1 km to 409.6 km).
    pub fn default_log() -> Self {
        Binning::Log {
            base: 2.0,
            start: 0.1,
            n_bins: 12,
        }
    }

    pub fn edges(&self) -> Result<(HistogramKind, Vec<f64>), DistributionError> {
        let bad = |msg: String| Err(DistributionError::BadBinning(msg));
        let (kind, edges) = match *self {
            Binning::Linear { lo, hi, n_bins } => {
                if n_bins == 0 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return bad(format!("linear bins need lo < hi and n_bins ≥ 1 (got {lo}:{hi}:{n_bins})"));
                }
                let width = (hi - lo) / n_bins as f64;
                let mut e: Vec<f64> = (0..n_bins).map(|k| lo + k as f64 * width).collect();
                e.push(hi);
                (HistogramKind::Linear, e)
            }
            Binning::Log {
                base,
                start,
                n_bins,
            } => {
                if n_bins == 0 || !(base > 1.0) || !(start > 0.0) || !base.is_finite() || !start.is_finite() {
                    return bad(format!("log bins need base > 1, start > 0, n_bins ≥ 1 (got {base}:{start}:{n_bins})"));
                }
                let e: Vec<f64> = (0..=n_bins).map(|k| start * base.powi(k as i32)).collect();
                (HistogramKind::Logarithmic, e)
            }
            Binning::Edges(ref e) => (HistogramKind::Linear, e.clone()),
        };
        let ok = edges.len() >= 2
            && edges.iter().all(|e| e.is_finite())
            && edges.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return bad("edges must be finite and strictly increasing".into());
        }
        Ok((kind, edges))
    }
}

/// Binned counts over half-open bins `[edge_k, edge_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub kind: HistogramKind,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn empty(binning: &Binning) -> Result<Self, DistributionError> {
        let (kind, edges) = binning.edges()?;
        Ok(Self {
            kind,
            counts: vec![0; edges.len() - 1],
            edges,
            total: 0,
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn from_values(values: &[f64], binning: &Binning) -> Result<Self, DistributionError> {
        let mut h = Self::empty(binning)?;
        h.extend(values.iter().copied());
        Ok(h)
    }

    /// Add one value. NaN, and non-positive values on a logarithmic
    /// histogram, land in underflow.
    pub fn add(&mut self, v: f64) {
        self.total += 1;
        let lo = self.edges[0];
        let hi = *self.edges.last().expect("edges");
        if v.is_nan() || v < lo || (self.kind == HistogramKind::Logarithmic && v <= 0.0) {
            self.underflow += 1;
        } else if v >= hi {
            self.overflow += 1;
        } else {
            // first edge strictly above v, minus one
            let k = self.edges.partition_point(|&e| e <= v) - 1;
            self.counts[k] += 1;
        }
    }

    pub fn extend(&mut self, values: impl IntoIterator<Item = f64>) {
        for v in values {
            self.add(v);
        }
    }

    /// Sum a partial histogram with identical edges into this one.
    pub fn merge(&mut self, other: &Histogram) -> Result<(), DistributionError> {
        if self.edges != other.edges || self.kind != other.kind {
            return Err(DistributionError::EdgeMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    /// Probability density per bin, `count / (total · width)`; all zero for
    /// an empty histogram.
    pub fn densities(&self) -> Vec<f64> {
        (0..self.n_bins())
            .map(|k| {
                if self.total == 0 {
                    0.0
                } else {
                    self.counts[k] as f64 / (self.total as f64 * self.width(k))
                }
            })
            .collect()
    }

    pub fn is_conserved(&self) -> bool {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow == self.total
    }

    /// CSV `bin_lo,bin_hi,count,density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,count,density")?;
        for (k, d) in self.densities().into_iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                sig9(self.edges[k]),
                sig9(self.edges[k + 1]),
                self.counts[k],
                sig9(d)
            )?;
        }
        Ok(())
    }
}

pub fn log_binned_histogram(
    values: &[f64],
    base: f64,
    start: f64,
    n_bins: usize,
) -> Result<Histogram, DistributionError> {
    Histogram::from_values(
        values,
        &Binning::Log {
            base,
            start,
            n_bins,
        },
    )
}
