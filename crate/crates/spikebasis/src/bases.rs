//! Basis matrices as first-class objects: group membership, analysis and
//! synthesis application, row classification, and the closed-form
//! least-dependent basis constructions.
//!
//! Conventions: the *synthesis* matrix holds the basis vectors as columns;
//! the *analysis* matrix is its inverse, and its rows applied to process
//! outcomes are what the entropy costs classify.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared group membership of a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupTag {
    Orthonormal,
    VolumePreserving,
    GeneralInvertible,
}

/// Default relative tolerance for "two row entries are equal".
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Tolerance for orthonormality and pair-identity checks.
pub const ORTHO_TOL: f64 = 1e-10;

/// Scale-aware singularity guard: a matrix counts as invertible when
/// `|det| > det_tol(n)`.
pub fn det_tol(n: usize) -> f64 {
    1e-12 * n as f64
}

/// An invertible basis with both application directions materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    synthesis: DMatrix<f64>,
    analysis: DMatrix<f64>,
    group: GroupTag,
    provenance: String,
}

#[derive(Serialize, Deserialize)]
struct BasisJson {
    n: usize,
    group_tag: GroupTag,
    matrix: Vec<f64>,
    provenance: String,
}

impl Basis {
    /// Builds a basis from its synthesis matrix, deriving the analysis side.
    ///
    /// For an orthonormal tag the analysis matrix is the exact transpose;
    /// otherwise it is the numeric inverse.
    pub fn from_synthesis(
        synthesis: DMatrix<f64>,
        group: GroupTag,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let n = check_square(&synthesis)?;
        check_group(&synthesis, group)?;
        let analysis = if group == GroupTag::Orthonormal {
            synthesis.transpose()
        } else {
            invert(&synthesis, n)?
        };
        Ok(Self {
            synthesis,
            analysis,
            group,
            provenance: provenance.into(),
        })
    }

    /// Builds a basis from its analysis matrix, deriving the synthesis side.
    pub fn from_analysis(
        analysis: DMatrix<f64>,
        group: GroupTag,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let n = check_square(&analysis)?;
        let synthesis = if group == GroupTag::Orthonormal {
            analysis.transpose()
        } else {
            invert(&analysis, n)?
        };
        check_group(&synthesis, group)?;
        Ok(Self {
            synthesis,
            analysis,
            group,
            provenance: provenance.into(),
        })
    }

    /// Builds a basis from an explicit (synthesis, analysis) pair, checking
    /// that the product is the identity within [`ORTHO_TOL`].
    pub fn from_pair(
        synthesis: DMatrix<f64>,
        analysis: DMatrix<f64>,
        group: GroupTag,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let n = check_square(&synthesis)?;
        if analysis.nrows() != n || analysis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: analysis.nrows(),
            });
        }
        let residual = (&analysis * &synthesis - DMatrix::identity(n, n)).amax();
        if residual > ORTHO_TOL {
            return Err(Error::InvalidParams(format!(
                "analysis * synthesis deviates from identity by {residual:.3e}"
            )));
        }
        check_group(&synthesis, group)?;
        Ok(Self {
            synthesis,
            analysis,
            group,
            provenance: provenance.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.synthesis.nrows()
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn synthesis_matrix(&self) -> &DMatrix<f64> {
        &self.synthesis
    }

    pub fn analysis_matrix(&self) -> &DMatrix<f64> {
        &self.analysis
    }

    /// Expansion coefficients `y = B^{-1} x`.
    pub fn analyze(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(&self.analysis * x)
    }

    /// Reconstruction `x = B y`.
    pub fn synthesize(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        Ok(&self.synthesis * y)
    }

    pub fn det(&self) -> f64 {
        self.synthesis.clone().lu().determinant()
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let n = self.n();
        (self.synthesis.transpose() * &self.synthesis - DMatrix::identity(n, n)).amax() <= tol
    }

    pub fn to_json(&self) -> String {
        let n = self.n();
        let matrix = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.synthesis[(i, j)])
            .collect();
        serde_json::to_string_pretty(&BasisJson {
            n,
            group_tag: self.group,
            matrix,
            provenance: self.provenance.clone(),
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BasisJson = serde_json::from_str(text)?;
        if raw.matrix.len() != raw.n * raw.n {
            return Err(Error::InvalidParams(format!(
                "matrix has {} entries, expected {}",
                raw.matrix.len(),
                raw.n * raw.n
            )));
        }
        Self::from_synthesis(
            DMatrix::from_row_slice(raw.n, raw.n, &raw.matrix),
            raw.group_tag,
            raw.provenance,
        )
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n.max(1),
            got: m.ncols(),
        });
    }
    Ok(n)
}

fn check_group(synthesis: &DMatrix<f64>, group: GroupTag) -> Result<()> {
    let n = synthesis.nrows();
    let det = synthesis.clone().lu().determinant();
    if det.abs() <= det_tol(n) {
        return Err(Error::Singular { det });
    }
    match group {
        GroupTag::Orthonormal => {
            let residual = (synthesis.transpose() * synthesis - DMatrix::identity(n, n)).amax();
            if residual > ORTHO_TOL {
                return Err(Error::InvalidParams(format!(
                    "tagged orthonormal but B'B deviates from I by {residual:.3e}"
                )));
            }
        }
        GroupTag::VolumePreserving => {
            if (det.abs() - 1.0).abs() > ORTHO_TOL {
                return Err(Error::InvalidParams(format!(
                    "tagged volume-preserving but |det| = {:.12}",
                    det.abs()
                )));
            }
        }
        GroupTag::GeneralInvertible => {}
    }
    Ok(())
}

fn invert(m: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    let lu = m.clone().lu();
    let det = lu.determinant();
    if det.abs() <= det_tol(n) {
        return Err(Error::Singular { det });
    }
    lu.try_inverse().ok_or(Error::Singular { det })
}

/// The standard basis of `R^n`.
pub fn standard_basis(n: usize) -> Basis {
    Basis::from_synthesis(
        DMatrix::identity(n, n),
        GroupTag::Orthonormal,
        format!("standard(n={n})"),
    )
    .expect("identity is orthonormal")
}

/// Equality classes of a row under the relative tolerance
/// `|u - v| <= rel_tol * max(1, |u|, |v|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowClassification {
    /// Number of distinct values in the row.
    pub class_k: usize,
    /// Multiplicities of the distinct values, sorted ascending; sums to `n`.
    pub index: Vec<usize>,
}

#[inline]
pub(crate) fn values_equal(u: f64, v: f64, rel_tol: f64) -> bool {
    (u - v).abs() <= rel_tol * 1.0_f64.max(u.abs()).max(v.abs())
}

/// Groups `values` into equality classes, returning the member indices of
/// each class in first-seen order.
///
/// Matching is against the first value seen in each class, which keeps the
/// grouping deterministic and independent of any sort order.
pub(crate) fn group_indices(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut reps: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match reps.iter().position(|&r| values_equal(r, v, rel_tol)) {
            Some(g) => groups[g].push(i),
            None => {
                reps.push(v);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Classifies a row by its number of distinct values and their
/// multiplicities.
pub fn classify_row(row: &[f64], rel_tol: f64) -> RowClassification {
    let groups = group_indices(row, rel_tol);
    let mut index: Vec<usize> = groups.iter().map(Vec::len).collect();
    index.sort_unstable();
    RowClassification {
        class_k: index.len(),
        index,
    }
}

/// The DC Householder reflection `I - (2/n) 1 1'`, the reflection across the
/// zero-sum hyperplane. Orthonormal, symmetric, involutory.
pub fn householder_dc(n: usize) -> Result<Basis> {
    if n < 2 {
        return Err(Error::InvalidDimension { min: 2, got: n });
    }
    let nf = n as f64;
    let m = DMatrix::from_fn(n, n, |i, j| (if i == j { 1.0 } else { 0.0 }) - 2.0 / nf);
    Basis::from_synthesis(m, GroupTag::Orthonormal, format!("householder_dc(n={n})"))
}

/// The 4x4 Walsh matrix in the arrangement used by the n = 4 optimum.
fn walsh4() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.5, 0.5, 0.5, 0.5, //
            0.5, 0.5, -0.5, -0.5, //
            0.5, -0.5, 0.5, -0.5, //
            0.5, -0.5, -0.5, 0.5,
        ],
    )
}

/// The least statistically-dependent bases among the orthonormal group.
///
/// Returns both optima for `n >= 5` (the standard basis and the DC
/// Householder reflection -- neither is privileged), and the single optimum
/// for `n` in 2..=4.
pub fn lsdb_orthonormal(n: usize) -> Result<Vec<Basis>> {
    if n < 2 {
        return Err(Error::InvalidDimension { min: 2, got: n });
    }
    let single = |m: DMatrix<f64>| {
        Basis::from_synthesis(m, GroupTag::Orthonormal, format!("lsdb_orthonormal(n={n})"))
    };
    Ok(match n {
        2 => {
            let s = 1.0 / 2.0_f64.sqrt();
            vec![single(DMatrix::from_row_slice(2, 2, &[s, s, s, -s]))?]
        }
        3 => {
            let (s3, s6, s2) = (
                1.0 / 3.0_f64.sqrt(),
                1.0 / 6.0_f64.sqrt(),
                1.0 / 2.0_f64.sqrt(),
            );
            vec![single(DMatrix::from_row_slice(
                3,
                3,
                &[s3, s6, s2, s3, s6, -s2, s3, -2.0 * s6, 0.0],
            ))?]
        }
        4 => vec![single(walsh4())?],
        _ => vec![standard_basis(n), householder_dc(n)?],
    })
}

/// Parameters of the general-linear least-dependent basis pair: the analysis
/// matrix has first row all `a` and row `k` equal to `b_k` off the diagonal
/// and `c_k` on it.
#[derive(Debug, Clone, PartialEq)]
pub struct GlLsdbParams {
    pub a: f64,
    /// Off-diagonal row values `b_2 ... b_n` (length `n - 1`).
    pub b: Vec<f64>,
    /// Diagonal row values `c_2 ... c_n` (length `n - 1`).
    pub c: Vec<f64>,
}

impl GlLsdbParams {
    pub fn new(a: f64, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if b.len() != c.len() || b.is_empty() {
            return Err(Error::InvalidParams(format!(
                "need matching nonempty b, c lists (got {} and {})",
                b.len(),
                c.len()
            )));
        }
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidParams("a must be nonzero".into()));
        }
        for (k, (&bk, &ck)) in b.iter().zip(&c).enumerate() {
            if bk == ck || !bk.is_finite() || !ck.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "b_{0} = c_{0} = {bk} makes the matrix singular",
                    k + 2
                )));
            }
        }
        Ok(Self { a, b, c })
    }

    /// Uniform parameters `a`, `b_k = b`, `c_k = c` at dimension `n`.
    pub fn uniform(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension { min: 2, got: n });
        }
        Self::new(a, vec![b; n - 1], vec![c; n - 1])
    }

    pub fn n(&self) -> usize {
        self.b.len() + 1
    }
}

/// The explicit (analysis, synthesis) matrix pair of the general-linear
/// least-dependent basis.
pub fn gl_lsdb_matrices(params: &GlLsdbParams) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = params.n();
    let a = params.a;
    let mut analysis = DMatrix::zeros(n, n);
    for j in 0..n {
        analysis[(0, j)] = a;
    }
    for i in 1..n {
        let (bk, ck) = (params.b[i - 1], params.c[i - 1]);
        for j in 0..n {
            analysis[(i, j)] = if i == j { ck } else { bk };
        }
    }
    let d: Vec<f64> = params
        .b
        .iter()
        .zip(&params.c)
        .map(|(&bk, &ck)| 1.0 / (ck - bk))
        .collect();
    let mut synthesis = DMatrix::zeros(n, n);
    let bd_sum: f64 = params.b.iter().zip(&d).map(|(&bk, &dk)| bk * dk).sum();
    synthesis[(0, 0)] = (1.0 + bd_sum) / a;
    for j in 1..n {
        synthesis[(0, j)] = -d[j - 1];
    }
    for i in 1..n {
        synthesis[(i, 0)] = -params.b[i - 1] * d[i - 1] / a;
        synthesis[(i, i)] = d[i - 1];
    }
    (analysis, synthesis)
}

/// Builds the general-linear least-dependent basis from its parameters.
///
/// Both matrices come from the closed forms (no numeric inversion); the
/// product is still checked against the identity. Tagged volume-preserving
/// when `|det|` lands on 1.
pub fn lsdb_gl_pair(params: &GlLsdbParams) -> Result<Basis> {
    let (analysis, synthesis) = gl_lsdb_matrices(params);
    let det = gl_lsdb_determinant(params);
    let group = if (det.abs() - 1.0).abs() <= ORTHO_TOL {
        GroupTag::VolumePreserving
    } else {
        GroupTag::GeneralInvertible
    };
    Basis::from_pair(
        synthesis,
        analysis,
        group,
        format!(
            "gl_lsdb(n={}, a={}, b={:?}, c={:?})",
            params.n(),
            params.a,
            params.b,
            params.c
        ),
    )
}

/// Closed-form determinant `a * prod (c_k - b_k)` of the analysis matrix.
pub fn gl_lsdb_determinant(params: &GlLsdbParams) -> f64 {
    params.a
        * params
            .b
            .iter()
            .zip(&params.c)
            .map(|(&bk, &ck)| ck - bk)
            .product::<f64>()
}

/// The positive value of `a` that makes the analysis matrix
/// volume-preserving: `a = prod (c_k - b_k)^{-1}` (either sign is valid
/// downstream).
pub fn gl_lsdb_sl_constraint(b: &[f64], c: &[f64]) -> Result<f64> {
    if b.len() != c.len() || b.is_empty() {
        return Err(Error::InvalidParams("need matching nonempty b, c".into()));
    }
    let mut prod = 1.0;
    for (&bk, &ck) in b.iter().zip(c) {
        if bk == ck {
            return Err(Error::InvalidParams("b_k = c_k".into()));
        }
        prod *= ck - bk;
    }
    Ok(prod.recip().abs())
}

/// Determinant `a^{n-1} (a + n b)` of the `n x n` matrix `a I + b J`.
pub fn delta_determinant(a: f64, b: f64, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidDimension { min: 1, got: n });
    }
    Ok(a.powi(n as i32 - 1) * (a + n as f64 * b))
}

/// Canonical form of a matrix modulo column permutations and sign flips:
/// each column is flipped so its largest-magnitude entry is positive, then
/// columns are sorted by (descending position of that entry, then
/// lexicographic order).
pub fn canonicalize(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let n = matrix.nrows();
    let mut cols: Vec<Vec<f64>> = (0..matrix.ncols())
        .map(|j| matrix.column(j).iter().copied().collect())
        .collect();
    let max_pos = |col: &[f64]| -> usize {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        best
    };
    for col in &mut cols {
        if col[max_pos(col)] < 0.0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
    }
    cols.sort_by(|x, y| {
        max_pos(y).cmp(&max_pos(x)).then_with(|| {
            for (a, b) in x.iter().zip(y) {
                match a.total_cmp(b) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Max absolute entrywise difference.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
