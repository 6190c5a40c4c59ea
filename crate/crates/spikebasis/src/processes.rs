//! Generators and exact probability models for the analyzed processes.
//!
//! The spike process emits one standard basis vector of `R^n` uniformly at
//! random per realization; it is simple enough that its outcome set can be
//! enumerated, which is what makes the exact entropy computations elsewhere
//! in this crate possible. The 2D uniform process is the rotation
//! counterexample; the multi-spike generator is a variant with no attached
//! claims.
//!
//! Sampling takes an explicit seed and uses ChaCha8, so results are
//! bit-reproducible across platforms and runs. Index draws go through `u64`
//! to stay independent of the platform word size.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bases::Basis;
use crate::error::{Error, Result};

/// The n-dimensional spike process: outcomes are exactly the standard basis
/// vectors `e_1, ..., e_n`, each with probability `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeProcess {
    n: usize,
}

impl SpikeProcess {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension { min: 1, got: n });
        }
        Ok(Self { n })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// All `n` outcomes with their probabilities `1/n`.
    pub fn enumerate_outcomes(&self) -> Vec<(DVector<f64>, f64)> {
        let p = 1.0 / self.n as f64;
        (0..self.n)
            .map(|j| {
                let mut e = DVector::zeros(self.n);
                e[j] = 1.0;
                (e, p)
            })
            .collect()
    }

    /// The outcome set as an equally-weighted dataset; averages over it are
    /// exact expectations.
    pub fn outcome_dataset(&self) -> Dataset {
        Dataset::new(
            self.enumerate_outcomes()
                .into_iter()
                .map(|(x, _)| x)
                .collect(),
        )
        .expect("outcomes share the dimension")
    }

    pub fn to_discrete(&self) -> DiscreteProcess {
        let (outcomes, probabilities) = self.enumerate_outcomes().into_iter().unzip();
        DiscreteProcess {
            outcomes,
            probabilities,
        }
    }
}

/// A finite-outcome process given by an explicit probability mass function.
#[derive(Debug, Clone)]
pub struct DiscreteProcess {
    outcomes: Vec<DVector<f64>>,
    probabilities: Vec<f64>,
}

impl DiscreteProcess {
    pub fn new(outcomes: Vec<DVector<f64>>, probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptySample);
        }
        if outcomes.len() != probabilities.len() {
            return Err(Error::DimensionMismatch {
                expected: outcomes.len(),
                got: probabilities.len(),
            });
        }
        let n = outcomes[0].len();
        if outcomes.iter().any(|x| x.len() != n) {
            return Err(Error::InvalidParams("outcome dimensions differ".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            outcomes,
            probabilities,
        })
    }

    pub fn dimension(&self) -> usize {
        self.outcomes[0].len()
    }

    pub fn outcomes(&self) -> &[DVector<f64>] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Two i.i.d. coordinates, each uniform on `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform2DProcess;

/// A training set of equal-dimension samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    samples: Vec<DVector<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    n: usize,
    count: usize,
    samples: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(samples: Vec<DVector<f64>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = samples[0].len();
        for s in &samples {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.len(),
                });
            }
        }
        Ok(Self { n, samples })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }

    /// One sample per row.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for s in &self.samples {
            w.write_record(s.iter().map(|v| crate::fmt12(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(reader);
        let mut samples = Vec::new();
        for record in r.records() {
            let record = record?;
            let row: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::InvalidParams(format!("bad csv field: {e}")))?;
            samples.push(DVector::from_vec(row));
        }
        Self::new(samples)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DatasetJson {
            n: self.n,
            count: self.samples.len(),
            samples: self
                .samples
                .iter()
                .map(|s| s.iter().copied().collect())
                .collect(),
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DatasetJson = serde_json::from_str(text)?;
        Self::new(raw.samples.into_iter().map(DVector::from_vec).collect())
    }
}

/// Draws `count` spike realizations. Deterministic for a fixed seed.
pub fn sample_spike(process: &SpikeProcess, count: usize, seed: u64) -> Result<Dataset> {
    if count < 1 {
        return Err(Error::EmptySample);
    }
    let n = process.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count)
        .map(|_| {
            let j = rng.random_range(0..n as u64) as usize;
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            e
        })
        .collect();
    Dataset::new(samples)
}

/// Draws `count` samples of the 2D uniform process on `[-1, 1]^2`.
pub fn sample_uniform2d(count: usize, seed: u64) -> Result<Dataset> {
    if count < 1 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || 2.0 * rng.random::<f64>() - 1.0;
    let samples = (0..count)
        .map(|_| DVector::from_vec(vec![unit(), unit()]))
        .collect();
    Dataset::new(samples)
}

/// Places `m` distinct unit spikes uniformly at random per realization.
///
/// A generator only; none of the single-spike results are claimed for it.
pub fn sample_multispike(n: usize, m: usize, count: usize, seed: u64) -> Result<Dataset> {
    if n < 1 {
        return Err(Error::InvalidDimension { min: 1, got: n });
    }
    if m < 1 || m > n {
        return Err(Error::InvalidParams(format!(
            "spike count {m} out of range 1..={n}"
        )));
    }
    if count < 1 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = (0..n).collect();
    let samples = (0..count)
        .map(|_| {
            // partial Fisher-Yates: first m entries become the spike set
            for i in 0..m {
                let j = i + rng.random_range(0..(n - i) as u64) as usize;
                positions.swap(i, j);
            }
            let mut x = DVector::zeros(n);
            for &j in &positions[..m] {
                x[j] = 1.0;
            }
            x
        })
        .collect();
    Dataset::new(samples)
}

/// Covariance of the spike process: `R_ij = delta_ij / n - 1/n^2`.
pub fn spike_covariance(n: usize) -> Result<DMatrix<f64>> {
    if n < 1 {
        return Err(Error::InvalidDimension { min: 1, got: n });
    }
    let nf = n as f64;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        (if i == j { 1.0 / nf } else { 0.0 }) - 1.0 / (nf * nf)
    }))
}

/// Serializes a covariance (or any square) matrix as a row-major array.
pub fn covariance_to_json(matrix: &DMatrix<f64>) -> String {
    #[derive(Serialize)]
    struct CovJson {
        n: usize,
        matrix: Vec<f64>,
    }
    let n = matrix.nrows();
    let rows: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| matrix[(i, j)])
        .collect();
    serde_json::to_string_pretty(&CovJson { n, matrix: rows }).expect("serializable")
}

/// Whether `basis` is a Karhunen-Loeve basis of the spike process.
///
/// Checks the two characterizations independently -- orthonormality plus
/// diagonalization of the covariance, and orthonormality plus a column
/// parallel to the DC vector -- and insists they agree.
pub fn is_klb(basis: &Basis, n: usize, tol: f64) -> Result<bool> {
    if basis.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: basis.n(),
        });
    }
    let b = basis.synthesis_matrix();
    let orthonormal = basis.is_orthonormal(tol);

    let eigen_ok = orthonormal && {
        let m = b.transpose() * spike_covariance(n)? * b;
        let mut off_max = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off_max = off_max.max(m[(i, j)].abs());
                }
            }
        }
        off_max <= tol
    };

    let dc_ok = orthonormal && {
        let scale = 1.0 / (n as f64).sqrt();
        (0..n).any(|j| {
            let col = b.column(j);
            let dev_pos = col.iter().map(|v| (v - scale).abs()).fold(0.0, f64::max);
            let dev_neg = col.iter().map(|v| (v + scale).abs()).fold(0.0, f64::max);
            dev_pos.min(dev_neg) <= tol
        })
    };

    if eigen_ok != dc_ok {
        return Err(Error::KlbDisagreement {
            eigen: eigen_ok,
            dc: dc_ok,
        });
    }
    Ok(eigen_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spike_outcomes_are_exact() {
        let p = SpikeProcess::new(3).unwrap();
        let outs = p.enumerate_outcomes();
        assert_eq!(outs.len(), 3);
        for (x, prob) in &outs {
            assert_eq!(*prob, 1.0 / 3.0);
            assert_eq!(x.iter().filter(|v| **v == 1.0).count(), 1);
            assert_eq!(x.iter().filter(|v| **v == 0.0).count(), 2);
        }
        let p7 = SpikeProcess::new(7).unwrap();
        for (_, prob) in p7.enumerate_outcomes() {
            assert_eq!(prob, 1.0 / 7.0);
        }
        let total: f64 = p7.enumerate_outcomes().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() <= 1e-14);
        let p2 = SpikeProcess::new(2).unwrap();
        let outs = p2.enumerate_outcomes();
        assert_eq!(outs[0].0.as_slice(), &[1.0, 0.0]);
        assert_eq!(outs[1].0.as_slice(), &[0.0, 1.0]);
        assert!(SpikeProcess::new(0).is_err());
    }

    #[test]
    fn sampling_is_reproducible_and_valid() {
        let p = SpikeProcess::new(256).unwrap();
        let a = sample_spike(&p, 10, 7).unwrap();
        let b = sample_spike(&p, 10, 7).unwrap();
        assert_eq!(a, b);
        for s in a.samples() {
            assert_eq!(s.iter().filter(|v| **v == 1.0).count(), 1);
            assert_eq!(s.iter().filter(|v| **v != 0.0).count(), 1);
        }
        let c = sample_spike(&p, 10, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn one_dimensional_spike_is_constant() {
        let p = SpikeProcess::new(1).unwrap();
        let d = sample_spike(&p, 3, 123).unwrap();
        for s in d.samples() {
            assert_eq!(s.as_slice(), &[1.0]);
        }
    }

    #[test]
    fn spike_frequencies_near_uniform() {
        let n = 4;
        let count = 10_000;
        let d = sample_spike(&SpikeProcess::new(n).unwrap(), count, 0).unwrap();
        let mut freq = vec![0.0; n];
        for s in d.samples() {
            for j in 0..n {
                freq[j] += s[j];
            }
        }
        // 4 sigma binomial bound
        let bound = 4.0 * (0.25 * 0.75 / count as f64).sqrt();
        for f in freq {
            assert!((f / count as f64 - 0.25).abs() <= bound);
        }
    }

    #[test]
    fn uniform2d_moments() {
        let count = 100_000;
        let d = sample_uniform2d(count, 0).unwrap();
        for s in d.samples() {
            assert!(s[0] >= -1.0 && s[0] <= 1.0 && s[1] >= -1.0 && s[1] <= 1.0);
        }
        for coord in 0..2 {
            let mean: f64 = d.samples().iter().map(|s| s[coord]).sum::<f64>() / count as f64;
            let var: f64 = d
                .samples()
                .iter()
                .map(|s| (s[coord] - mean).powi(2))
                .sum::<f64>()
                / count as f64;
            assert!(mean.abs() <= 0.02, "mean {mean}");
            assert!((var - 1.0 / 3.0).abs() <= 0.02, "var {var}");
        }
    }

    #[test]
    fn multispike_places_distinct_spikes() {
        let d = sample_multispike(16, 3, 50, 5).unwrap();
        for s in d.samples() {
            assert_eq!(s.iter().filter(|v| **v == 1.0).count(), 3);
        }
        assert!(sample_multispike(4, 5, 1, 0).is_err());
    }

    #[test]
    fn covariance_structure() {
        let r = spike_covariance(2).unwrap();
        assert_eq!(r[(0, 0)], 0.25);
        assert_eq!(r[(0, 1)], -0.25);
        for n in 1..=12 {
            let r = spike_covariance(n).unwrap();
            assert_eq!(r, r.transpose());
            assert_abs_diff_eq!(r.trace(), (n as f64 - 1.0) / n as f64, epsilon = 1e-14);
            let ones = DVector::from_element(n, 1.0);
            assert!((&r * &ones).amax() <= 1e-14);
        }
    }

    #[test]
    fn covariance_eigenvalues_zero_and_one_over_n() {
        let n = 5;
        let eig = nalgebra::SymmetricEigen::new(spike_covariance(n).unwrap());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        assert!(vals[0].abs() <= 1e-12);
        for v in &vals[1..] {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn klb_characterizations() {
        let walsh = bases::lsdb_orthonormal(4).unwrap().remove(0);
        assert!(is_klb(&walsh, 4, 1e-10).unwrap());
        for n in 2..=6 {
            let std = bases::standard_basis(n);
            assert!(!is_klb(&std, n, 1e-10).unwrap());
        }
        let one = Basis::from_synthesis(
            DMatrix::from_element(1, 1, 1.0),
            bases::GroupTag::Orthonormal,
            "unit",
        )
        .unwrap();
        assert!(is_klb(&one, 1, 1e-10).unwrap());
        assert!(is_klb(&one, 2, 1e-10).is_err());
    }

    #[test]
    fn covariance_json_is_row_major_with_dimension() {
        let text = covariance_to_json(&spike_covariance(2).unwrap());
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["n"], 2);
        let entries = parsed["matrix"].as_array().unwrap();
        assert_eq!(entries.len(), 4);
        assert_eq!(entries[0], 0.25);
        assert_eq!(entries[1], -0.25);
    }

    #[test]
    fn dataset_csv_json_round_trip() {
        let d = sample_uniform2d(25, 3).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(&buf[..]).unwrap();
        assert_eq!(back.dimension(), 2);
        assert_eq!(back.len(), 25);
        for (a, b) in d.samples().iter().zip(back.samples()) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-11);
        }
        let back2 = Dataset::from_json(&d.to_json()).unwrap();
        assert_eq!(back2.len(), 25);
    }
}
