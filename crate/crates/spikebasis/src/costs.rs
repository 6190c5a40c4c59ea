//! Cost functions over bases: the sparsity family (`l^p`, `l^0`) and the
//! statistical-dependence family (sum of coordinate-wise entropies), in
//! exact enumerated form and in empirical sample form.
//!
//! Entropies are in bits. Per-sample work is embarrassingly parallel and
//! reduced with a fixed-shape pairwise sum, so results do not depend on the
//! thread count.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::analytic::check_p;
use crate::bases::{group_indices, Basis};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum};
use crate::processes::{Dataset, DiscreteProcess, SpikeProcess};

/// Which cost a [`CostValue`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Lp,
    L0,
    EntropyEmpirical,
    EntropyExact,
}

/// A cost measurement: bits for the entropy kinds, dimensionless otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub value: f64,
    pub kind: CostKind,
}

/// Default `l^0` zero threshold; exact-arithmetic spikes produce exact
/// zeros, the tolerance only absorbs reconstruction round-off.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Bin-count rule of the histogram entropy estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinRule {
    /// `ceil(sqrt(N))` equal-width bins over the observed range.
    SqrtN,
    /// A fixed number of equal-width bins.
    Fixed(usize),
}

/// Histogram plug-in estimator for coordinate densities: equal-width bins
/// over each coordinate's observed min/max range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramEstimator {
    pub bins: BinRule,
}

impl Default for HistogramEstimator {
    fn default() -> Self {
        Self {
            bins: BinRule::SqrtN,
        }
    }
}

impl HistogramEstimator {
    pub fn bin_count(&self, n_samples: usize) -> usize {
        match self.bins {
            BinRule::SqrtN => (n_samples as f64).sqrt().ceil() as usize,
            BinRule::Fixed(m) => m.max(1),
        }
    }
}

/// Per-node additive cost kinds used by the best-basis search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdditiveKind {
    Lp { p: f64 },
    L0 { zero_tol: f64 },
}

/// Additive cost of a coefficient block: zero on the empty block, and the
/// sum of per-coordinate costs otherwise.
pub fn additive_cost(values: &[f64], kind: AdditiveKind) -> f64 {
    match kind {
        AdditiveKind::Lp { p } => values.iter().map(|v| v.abs().powf(p)).sum(),
        AdditiveKind::L0 { zero_tol } => {
            values.iter().filter(|v| v.abs() > zero_tol).count() as f64
        }
    }
}

fn analyze_all(data: &Dataset, basis: &Basis) -> Result<Vec<DVector<f64>>> {
    if data.dimension() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: data.dimension(),
        });
    }
    let samples = data.samples();
    Ok(map_indexed(samples.len(), |k| {
        basis.analysis_matrix() * &samples[k]
    }))
}

/// Sample mean of `sum_i |y_i|^p` for `y = B^{-1} x` over the dataset.
pub fn lp_cost(data: &Dataset, basis: &Basis, p: f64) -> Result<CostValue> {
    check_p(p)?;
    let transformed = analyze_all(data, basis)?;
    let per_sample: Vec<f64> = map_indexed(transformed.len(), |k| {
        additive_cost(transformed[k].as_slice(), AdditiveKind::Lp { p })
    });
    Ok(CostValue {
        value: pairwise_sum(&per_sample) / per_sample.len() as f64,
        kind: CostKind::Lp,
    })
}

/// Sample mean count of coefficients with `|y_i| > zero_tol`.
pub fn l0_cost(data: &Dataset, basis: &Basis, zero_tol: f64) -> Result<CostValue> {
    if zero_tol < 0.0 {
        return Err(Error::Domain {
            what: "zero_tol",
            value: zero_tol,
            domain: "[0, inf)",
        });
    }
    let transformed = analyze_all(data, basis)?;
    let per_sample: Vec<f64> = map_indexed(transformed.len(), |k| {
        additive_cost(transformed[k].as_slice(), AdditiveKind::L0 { zero_tol })
    });
    Ok(CostValue {
        value: pairwise_sum(&per_sample) / per_sample.len() as f64,
        kind: CostKind::L0,
    })
}

/// Exact entropy in bits of a grouped value set: probabilities are summed
/// per equality class of the transformed values.
fn grouped_entropy(values: &[f64], probabilities: &[f64], rel_tol: f64) -> f64 {
    let mut h = 0.0;
    for group in group_indices(values, rel_tol) {
        let p: f64 = group.iter().map(|&i| probabilities[i]).sum();
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Exact total coordinate-wise entropy `sum_i H(Y_i)` of a finite-outcome
/// process under `basis`, by enumerating outcomes and grouping the values
/// each coordinate can take.
pub fn entropy_exact_discrete(
    process: &DiscreteProcess,
    basis: &Basis,
    rel_tol: f64,
) -> Result<CostValue> {
    if process.dimension() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: process.dimension(),
        });
    }
    let transformed: Vec<DVector<f64>> = map_indexed(process.outcomes().len(), |j| {
        basis.analysis_matrix() * &process.outcomes()[j]
    });
    let n = basis.n();
    let per_coordinate: Vec<f64> = map_indexed(n, |i| {
        let values: Vec<f64> = transformed.iter().map(|y| y[i]).collect();
        grouped_entropy(&values, process.probabilities(), rel_tol)
    });
    Ok(CostValue {
        value: pairwise_sum(&per_coordinate),
        kind: CostKind::EntropyExact,
    })
}

/// [`entropy_exact_discrete`] for the spike process.
pub fn entropy_exact_spike(basis: &Basis, n: usize, rel_tol: f64) -> Result<CostValue> {
    entropy_exact_discrete(&SpikeProcess::new(n)?.to_discrete(), basis, rel_tol)
}

/// Result of the histogram plug-in estimate: the total cost plus
/// per-coordinate values and the coordinates flagged as degenerate
/// (zero observed range, contributing 0).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalEntropy {
    pub cost: CostValue,
    pub per_coordinate: Vec<f64>,
    pub degenerate: Vec<usize>,
}

/// Plug-in estimate of `sum_i H(Y_i)` in bits from samples: per coordinate,
/// a histogram density estimate (bin probability over bin width) evaluated
/// at the samples.
pub fn entropy_empirical(
    data: &Dataset,
    basis: &Basis,
    estimator: &HistogramEstimator,
) -> Result<EmpiricalEntropy> {
    if data.len() < 2 {
        return Err(Error::InvalidParams(
            "empirical entropy needs at least 2 samples".into(),
        ));
    }
    let transformed = analyze_all(data, basis)?;
    let n = basis.n();
    let n_samples = transformed.len();
    let bins = estimator.bin_count(n_samples);
    let per_coordinate: Vec<f64> = map_indexed(n, |i| {
        let values: Vec<f64> = transformed.iter().map(|y| y[i]).collect();
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let range = max - min;
        if range <= 0.0 || range.is_nan() {
            return f64::NAN; // degenerate marker, resolved below
        }
        let width = range / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in &values {
            let b = (((v - min) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let mut h = width.log2();
        for &c in &counts {
            if c > 0 {
                let p = c as f64 / n_samples as f64;
                h -= p * p.log2();
            }
        }
        h
    });
    let degenerate: Vec<usize> = per_coordinate
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_nan())
        .map(|(i, _)| i)
        .collect();
    let cleaned: Vec<f64> = per_coordinate
        .iter()
        .map(|v| if v.is_nan() { 0.0 } else { *v })
        .collect();
    Ok(EmpiricalEntropy {
        cost: CostValue {
            value: pairwise_sum(&cleaned),
            kind: CostKind::EntropyEmpirical,
        },
        per_coordinate: cleaned,
        degenerate,
    })
}

/// Mutual information of the spike process under `basis`:
/// `sum_i H(Y_i) - log2 n` bits. Nonnegative for every invertible basis.
pub fn mutual_information_spike(basis: &Basis, n: usize, rel_tol: f64) -> Result<f64> {
    Ok(entropy_exact_spike(basis, n, rel_tol)?.value - (n as f64).log2())
}

/// Diff-able record of one cost evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostReport {
    pub basis_provenance: String,
    pub cost_kind: CostKind,
    pub value_bits_or_raw: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_samples: usize,
    pub estimator_params: Option<HistogramEstimator>,
}
