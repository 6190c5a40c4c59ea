//! Scalar closed forms: entropy curves, node-entropy levels, cost bounds,
//! and the mutual-information sequences of the spike process.
//!
//! Everything here is a pure function of a few reals. All entropies are in
//! bits; `0 log 0` is taken as `0`.

use crate::error::{Error, Result};

/// `x log2 x` with the `0 log 0 = 0` convention.
#[inline]
fn xlog2(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

fn check_unit_interval(what: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what,
            value: x,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

/// Binary entropy `-[x log x + (1-x) log(1-x)]` in bits.
///
/// This is the entropy of a coordinate that takes one nonzero value with
/// probability `x` and zero otherwise.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_unit_interval("binary_entropy argument", x)?;
    Ok(-(xlog2(x) + xlog2(1.0 - x)))
}

/// Entropy `-[x log(x/2) + (1-x) log(1-x)]` of a coordinate that takes the
/// values `+v` and `-v` each with probability `x/2` and zero otherwise.
///
/// Equals `binary_entropy(x) + x`; computed by the explicit formula.
pub fn signed_entropy(x: f64) -> Result<f64> {
    check_unit_interval("signed_entropy argument", x)?;
    Ok(-(if x == 0.0 { 0.0 } else { x * (x / 2.0).log2() } + xlog2(1.0 - x)))
}

/// Per-coordinate entropy of the level-`k` positive (all-sums) node for the
/// spike process on `n = 2^n0` points: `binary_entropy(2^k / n)`.
pub fn positive_node_entropy(k: usize, n0: usize) -> Result<f64> {
    if k > n0 {
        return Err(Error::DepthOutOfRange { depth: k, max: n0 });
    }
    binary_entropy((1u64 << k) as f64 / (1u64 << n0) as f64)
}

/// Per-coordinate entropy of a level-`k` negative (difference) node for the
/// spike process on `n = 2^n0` points: `signed_entropy(2^k / n)`.
pub fn negative_node_entropy(k: usize, n0: usize) -> Result<f64> {
    if k > n0 {
        return Err(Error::DepthOutOfRange { depth: k, max: n0 });
    }
    signed_entropy((1u64 << k) as f64 / (1u64 << n0) as f64)
}

/// Scaled gap `x [ (2/x) H(1/x) - (H(2/x) - H(1/x)) ]` (with `H` the binary
/// entropy) between the two candidate lower bounds on the entropy of a row
/// that is neither constant nor a single-outlier row.
///
/// Monotonically decreasing for `x >= 2`; its sign decides which bound is
/// active. The root sits near 5.3623.
pub fn class_bound_gap(x: f64) -> Result<f64> {
    if x < 2.0 {
        return Err(Error::Domain {
            what: "class_bound_gap argument",
            value: x,
            domain: "[2, inf)",
        });
    }
    let f1 = binary_entropy(1.0 / x)?;
    let f2 = binary_entropy(2.0 / x)?;
    Ok(x * ((2.0 / x) * f1 - (f2 - f1)))
}

/// Root of [`class_bound_gap`], bisected on `[5, 6]` to 1e-9.
pub fn class_bound_gap_root() -> f64 {
    let (mut lo, mut hi) = (5.0_f64, 6.0_f64);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if class_bound_gap(mid).expect("domain") > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Expected `l^p` cost of the spike process under the DC Householder
/// reflection, as a function of `x = 2/n`:
/// `(1-x)^p + (2/x - 1) x^p`.
///
/// Monotonically decreasing in `x`; for `p = 1` it reduces to `3 - 2x`.
pub fn reflection_lp_cost(x: f64, p: f64) -> Result<f64> {
    if x <= 0.0 || x > 1.0 {
        return Err(Error::Domain {
            what: "reflection_lp_cost x",
            value: x,
            domain: "(0, 1]",
        });
    }
    check_p(p)?;
    Ok((1.0 - x).powf(p) + (2.0 / x - 1.0) * x.powf(p))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            domain: "(0, 1]",
        });
    }
    Ok(())
}

fn check_n_ge2(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension { min: 2, got: n });
    }
    Ok(())
}

/// Mutual information of the spike process under the general-linear
/// least-dependent basis pair:
/// `(n-2) log n - ((n-1)^2 / n) log(n-1)` bits.
///
/// Zero at `n = 2`, strictly increasing for `n > 2`, limit `log2 e`.
pub fn gl_mutual_information(n: usize) -> Result<f64> {
    check_n_ge2(n)?;
    let x = n as f64;
    Ok((x - 2.0) * x.log2() - (x - 1.0).powi(2) / x * (x - 1.0).log2())
}

/// Natural-log variant `ln 2 * h(x)` of [`gl_mutual_information`] over a
/// real argument, used for the asymptotic expansion checks and curve output.
pub fn gl_mutual_information_nats(x: f64) -> Result<f64> {
    if x < 2.0 {
        return Err(Error::Domain {
            what: "gl_mutual_information_nats argument",
            value: x,
            domain: "[2, inf)",
        });
    }
    Ok((x - 2.0) * x.ln() - (x - 1.0).powi(2) / x * (x - 1.0).ln())
}

/// Mutual information of the spike process under the standard basis (equal
/// for the DC Householder reflection):
/// `(n-1) log(n / (n-1)) = log (1 + 1/(n-1))^(n-1)` bits.
///
/// Strictly increasing in `n`, limit `log2 e`.
pub fn og_mutual_information(n: usize) -> Result<f64> {
    check_n_ge2(n)?;
    let m = (n - 1) as f64;
    Ok(m * (1.0 / m).ln_1p() / std::f64::consts::LN_2)
}

/// Total coordinate-wise entropy of the spike process in the standard basis:
/// `n log n - (n-1) log(n-1) = n * binary_entropy(1/n)` bits.
pub fn standard_basis_cost(n: usize) -> Result<f64> {
    check_n_ge2(n)?;
    Ok(n as f64 * binary_entropy(1.0 / n as f64)?)
}

/// Lower bound on the coordinate-wise spike entropy of a row with `class_k`
/// distinct values: 0 for class 1, `H(1/n)` for class 2 (single-outlier
/// branch), `(1 + 2(k-2)/n) H(1/n)` for class 3 and up.
pub fn entropy_lower_bound(class_k: usize, n: usize) -> Result<f64> {
    if class_k < 1 || class_k > n {
        return Err(Error::InvalidParams(format!(
            "class {class_k} out of range 1..={n}"
        )));
    }
    let f1 = binary_entropy(1.0 / n as f64)?;
    Ok(match class_k {
        1 => 0.0,
        2 => f1,
        k => (1.0 + 2.0 * (k - 2) as f64 / n as f64) * f1,
    })
}

/// Exact coordinate entropy `-sum (a/n) log(a/n)` of a row whose distinct
/// values occur with multiplicities `index` (which must sum to `n`).
pub fn index_entropy(index: &[usize], n: usize) -> Result<f64> {
    let total: usize = index.iter().sum();
    if total != n {
        return Err(Error::InvalidParams(format!(
            "index sums to {total}, expected {n}"
        )));
    }
    Ok(-index
        .iter()
        .map(|&a| xlog2(a as f64 / n as f64))
        .sum::<f64>())
}

/// Samples `value_fn` on the closed grid `x0, x0+step, ..., <= x1`.
pub fn sample_curve(
    x0: f64,
    x1: f64,
    step: f64,
    value_fn: impl Fn(f64) -> Result<f64>,
) -> Result<Vec<(f64, f64)>> {
    if step <= 0.0 || step.is_nan() || x1 < x0 {
        return Err(Error::InvalidParams(format!(
            "bad grid [{x0}, {x1}] step {step}"
        )));
    }
    let count = ((x1 - x0) / step).floor() as usize + 1;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let x = (x0 + i as f64 * step).min(x1);
        points.push((x, value_fn(x)?));
    }
    Ok(points)
}
