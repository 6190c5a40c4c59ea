//! The Haar–Walsh wavelet packet dictionary: convolution-subsampling with a
//! periodic boundary, the binary coefficient tree, per-node basis vectors,
//! and exhaustive enumeration of the admissible tree bases.
//!
//! Node `(k, l)` at level `k` holds `2^(n0-k)` coefficients and occupies the
//! column range `[l * 2^(n0-k), (l+1) * 2^(n0-k))`. The leftmost node of each
//! level is the *positive* node (its coefficients are pure sums); every other
//! node is *negative*.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lowpass/highpass filter pair satisfying the conjugate-mirror
/// (perfect-reconstruction) conditions under the periodic boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    h: Vec<f64>,
    g: Vec<f64>,
}

impl FilterPair {
    /// The length-2 pair `h = (1/sqrt2, 1/sqrt2)`, `g = (1/sqrt2, -1/sqrt2)`.
    pub fn haar_walsh() -> Self {
        let s = 1.0 / 2.0_f64.sqrt();
        Self {
            h: vec![s, s],
            g: vec![s, -s],
        }
    }

    /// Builds the highpass filter from a lowpass one via
    /// `g_l = (-1)^(l-1) h_(L-l+1)` and validates the pair.
    pub fn from_lowpass(h: Vec<f64>) -> Result<Self> {
        let len = h.len();
        let g = (0..len)
            .map(|l| {
                if l % 2 == 0 {
                    h[len - 1 - l]
                } else {
                    -h[len - 1 - l]
                }
            })
            .collect();
        Self::new(h, g)
    }

    /// Validates an arbitrary pair against the conjugate-mirror conditions
    /// on a deterministic probe set.
    pub fn new(h: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if h.len() != g.len() || h.is_empty() || !h.len().is_multiple_of(2) {
            return Err(Error::InvalidParams(
                "filters must share a positive even length".into(),
            ));
        }
        let pair = Self { h, g };
        let residual = pair.cmf_residual();
        if residual > 1e-10 {
            return Err(Error::NotConjugateMirror { residual });
        }
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.h
    }

    pub fn highpass(&self) -> &[f64] {
        &self.g
    }

    /// Largest residual of `H*H + G*G = I`, `H G* = 0`, `G H* = 0` over the
    /// probe set.
    fn cmf_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for exp in 2..=5usize {
            let n = 1 << exp;
            if n < self.len() {
                continue;
            }
            // deterministic probe vectors: ramps and alternating signs
            let probes: Vec<Vec<f64>> = vec![
                (0..n).map(|i| 1.0 + i as f64).collect(),
                (0..n)
                    .map(|i| if i % 2 == 0 { 1.0 } else { -0.5 })
                    .collect(),
                (0..n)
                    .map(|i| ((i * i + 3 * i) % 17) as f64 / 7.0 - 1.0)
                    .collect(),
            ];
            for x in &probes {
                let low = convolve_subsample(&self.h, x);
                let high = convolve_subsample(&self.g, x);
                let mut rec = upsample_anticonvolve(&self.h, &low, n);
                for (r, v) in rec.iter_mut().zip(upsample_anticonvolve(&self.g, &high, n)) {
                    *r += v;
                }
                for (r, v) in rec.iter().zip(x) {
                    worst = worst.max((r - v).abs());
                }
                let half: Vec<f64> = x[..n / 2].to_vec();
                for v in convolve_subsample(&self.h, &upsample_anticonvolve(&self.g, &half, n)) {
                    worst = worst.max(v.abs());
                }
                for v in convolve_subsample(&self.g, &upsample_anticonvolve(&self.h, &half, n)) {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }
}

/// `(Fx)_k = sum_l f_l x_(l + 2k mod n)` for `k = 0 .. n/2`.
fn convolve_subsample(filter: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n / 2)
        .map(|k| {
            filter
                .iter()
                .enumerate()
                .map(|(l, &f)| f * x[(2 * k + l) % n])
                .sum()
        })
        .collect()
}

/// Adjoint (upsample-anticonvolve): scatters `f_l y_k` to position
/// `2k + l mod out_len`.
fn upsample_anticonvolve(filter: &[f64], y: &[f64], out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len];
    for (k, &v) in y.iter().enumerate() {
        for (l, &f) in filter.iter().enumerate() {
            out[(2 * k + l) % out_len] += f * v;
        }
    }
    out
}

/// Positive or negative marking of a dictionary node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSign {
    Positive,
    Negative,
}

/// The leftmost node of each level is positive; all others are negative.
/// Only the left child of a positive node stays positive, so descendants of
/// negative nodes are negative.
pub fn node_sign(level: usize, pos: usize) -> NodeSign {
    debug_assert!(
        pos < (1usize << level),
        "node ({level}, {pos}) out of range"
    );
    if pos == 0 {
        NodeSign::Positive
    } else {
        NodeSign::Negative
    }
}

/// The `(K+1)`-level binary tree of expansion coefficients of one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryTable {
    n0: usize,
    depth: usize,
    /// `levels[k]` holds all `n` coefficients of level `k`, node-major.
    levels: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    n0: usize,
    #[serde(rename = "K")]
    k_max: usize,
    levels: Vec<Vec<f64>>,
}

impl DictionaryTable {
    /// Expands `x` to depth `k_max` with the Haar–Walsh pair.
    pub fn analyze(x: &[f64], k_max: usize) -> Result<Self> {
        Self::analyze_with(x, k_max, &FilterPair::haar_walsh())
    }

    /// Expands `x` to depth `k_max` with an arbitrary conjugate-mirror pair.
    pub fn analyze_with(x: &[f64], k_max: usize, filters: &FilterPair) -> Result<Self> {
        let n = x.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NonDyadicLength(n));
        }
        let n0 = n.trailing_zeros() as usize;
        if k_max > n0 {
            return Err(Error::DepthOutOfRange {
                depth: k_max,
                max: n0,
            });
        }
        let mut levels = Vec::with_capacity(k_max + 1);
        levels.push(x.to_vec());
        for k in 0..k_max {
            let node_len = n >> k;
            let parent = &levels[k];
            let mut next = vec![0.0; n];
            for l in 0..(1usize << k) {
                let node = &parent[l * node_len..(l + 1) * node_len];
                let low = convolve_subsample(filters.lowpass(), node);
                let high = convolve_subsample(filters.highpass(), node);
                let child_len = node_len / 2;
                let start = 2 * l * child_len;
                next[start..start + child_len].copy_from_slice(&low);
                next[start + child_len..start + 2 * child_len].copy_from_slice(&high);
            }
            levels.push(next);
        }
        Ok(Self {
            n0,
            depth: k_max,
            levels,
        })
    }

    pub fn n(&self) -> usize {
        1 << self.n0
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Coefficients of node `(level, pos)`.
    pub fn node_slice(&self, level: usize, pos: usize) -> Result<&[f64]> {
        if level > self.depth || pos >= (1 << level) {
            return Err(Error::NodeOutOfRange { level, pos });
        }
        let len = self.n() >> level;
        Ok(&self.levels[level][pos * len..(pos + 1) * len])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TableJson {
            n0: self.n0,
            k_max: self.depth,
            levels: self.levels.clone(),
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TableJson = serde_json::from_str(text)?;
        let n = 1usize << raw.n0;
        if raw.levels.len() != raw.k_max + 1 || raw.levels.iter().any(|l| l.len() != n) {
            return Err(Error::InvalidParams("malformed table levels".into()));
        }
        Ok(Self {
            n0: raw.n0,
            depth: raw.k_max,
            levels: raw.levels,
        })
    }
}

/// Synthesizes node coefficients back up to the root space.
fn synthesize_to_root(
    coeffs: &[f64],
    level: usize,
    pos: usize,
    n: usize,
    filters: &FilterPair,
) -> Vec<f64> {
    let mut v = coeffs.to_vec();
    let mut l = pos;
    for _ in 0..level {
        let out_len = v.len() * 2;
        let filter = if l.is_multiple_of(2) {
            filters.lowpass()
        } else {
            filters.highpass()
        };
        v = upsample_anticonvolve(filter, &v, out_len);
        l /= 2;
    }
    debug_assert_eq!(v.len(), n);
    v
}

/// The basis vectors spanning node `(level, pos)` as the columns of an
/// `n x 2^(n0-level)` matrix.
pub fn node_basis_matrix(n0: usize, level: usize, pos: usize) -> Result<DMatrix<f64>> {
    node_basis_matrix_with(n0, level, pos, &FilterPair::haar_walsh())
}

pub fn node_basis_matrix_with(
    n0: usize,
    level: usize,
    pos: usize,
    filters: &FilterPair,
) -> Result<DMatrix<f64>> {
    if level > n0 || pos >= (1 << level) {
        return Err(Error::NodeOutOfRange { level, pos });
    }
    let n = 1usize << n0;
    let dim = n >> level;
    let mut m = DMatrix::zeros(n, dim);
    for col in 0..dim {
        let mut unit = vec![0.0; dim];
        unit[col] = 1.0;
        let w = synthesize_to_root(&unit, level, pos, n, filters);
        for (i, v) in w.into_iter().enumerate() {
            m[(i, col)] = v;
        }
    }
    Ok(m)
}

/// A set of nodes tiling the leaf index space: an orthonormal basis choice
/// from the dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBasis {
    n0: usize,
    /// `(level, pos)` sorted by coverage start.
    nodes: Vec<(usize, usize)>,
}

impl TreeBasis {
    /// Validates that `nodes` tile `[0, 2^n0)` exactly.
    pub fn from_nodes(n0: usize, mut nodes: Vec<(usize, usize)>) -> Result<Self> {
        let n = 1usize << n0;
        for &(k, l) in &nodes {
            if k > n0 || l >= (1 << k) {
                return Err(Error::NodeOutOfRange { level: k, pos: l });
            }
        }
        nodes.sort_by_key(|&(k, l)| l << (n0 - k));
        let mut next_start = 0usize;
        for &(k, l) in &nodes {
            let width = n >> k;
            if l * width != next_start {
                return Err(Error::InvalidCover);
            }
            next_start += width;
        }
        if next_start != n {
            return Err(Error::InvalidCover);
        }
        Ok(Self { n0, nodes })
    }

    /// The root-only selection (the standard basis).
    pub fn root(n0: usize) -> Self {
        Self {
            n0,
            nodes: vec![(0, 0)],
        }
    }

    /// The maximal-depth selection (the Walsh basis).
    pub fn full_depth(n0: usize) -> Self {
        Self {
            n0,
            nodes: (0..1usize << n0).map(|l| (n0, l)).collect(),
        }
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn max_level(&self) -> usize {
        self.nodes.iter().map(|&(k, _)| k).max().unwrap_or(0)
    }

    /// The implied `n x n` orthonormal matrix (node columns concatenated in
    /// coverage order).
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        self.matrix_with(&FilterPair::haar_walsh())
    }

    pub fn matrix_with(&self, filters: &FilterPair) -> Result<DMatrix<f64>> {
        let n = 1usize << self.n0;
        let mut m = DMatrix::zeros(n, n);
        let mut col = 0;
        for &(k, l) in &self.nodes {
            let block = node_basis_matrix_with(self.n0, k, l, filters)?;
            for j in 0..block.ncols() {
                for i in 0..n {
                    m[(i, col)] = block[(i, j)];
                }
                col += 1;
            }
        }
        Ok(m)
    }

    /// Serializes as a sorted list of `[level, pos]` pairs.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[usize; 2]> = self.nodes.iter().map(|&(k, l)| [k, l]).collect();
        serde_json::to_string(&pairs).expect("serializable")
    }

    pub fn from_json(n0: usize, text: &str) -> Result<Self> {
        let pairs: Vec<[usize; 2]> = serde_json::from_str(text)?;
        Self::from_nodes(n0, pairs.into_iter().map(|[k, l]| (k, l)).collect())
    }
}

/// Exact number of tree bases of depth at most `k_max`
/// (`N_K = 1`, `N_k = N_(k+1)^2 + 1`).
pub fn tree_basis_count(k_max: usize) -> u64 {
    let mut count = 1u64;
    for _ in 0..k_max {
        count = count * count + 1;
    }
    count
}

/// Recursive split state of one subtree during enumeration.
#[derive(Debug, Clone)]
enum Shape {
    Leaf,
    Split(Box<Shape>, Box<Shape>),
}

impl Shape {
    /// Steps to the next shape in canonical (root-first, left-major) order.
    /// Returns false when this subtree's states are exhausted.
    fn advance(&mut self, depth_left: usize) -> bool {
        match self {
            Shape::Leaf => {
                if depth_left > 0 {
                    *self = Shape::Split(Box::new(Shape::Leaf), Box::new(Shape::Leaf));
                    true
                } else {
                    false
                }
            }
            Shape::Split(left, right) => {
                if right.advance(depth_left - 1) {
                    true
                } else if left.advance(depth_left - 1) {
                    **right = Shape::Leaf;
                    true
                } else {
                    false
                }
            }
        }
    }

    fn collect_leaves(&self, level: usize, pos: usize, out: &mut Vec<(usize, usize)>) {
        match self {
            Shape::Leaf => out.push((level, pos)),
            Shape::Split(left, right) => {
                left.collect_leaves(level + 1, 2 * pos, out);
                right.collect_leaves(level + 1, 2 * pos + 1, out);
            }
        }
    }
}

/// Iterator over every admissible tree basis, each exactly once, in
/// canonical depth-first root-first order.
pub struct TreeBasisIter {
    n0: usize,
    k_max: usize,
    state: Option<Shape>,
}

impl Iterator for TreeBasisIter {
    type Item = TreeBasis;

    fn next(&mut self) -> Option<TreeBasis> {
        let shape = self.state.as_mut()?;
        let mut nodes = Vec::new();
        shape.collect_leaves(0, 0, &mut nodes);
        if !shape.advance(self.k_max) {
            self.state = None;
        }
        Some(TreeBasis { n0: self.n0, nodes })
    }
}

/// Enumerates tree bases with the size guard `n0 <= 5`.
pub fn enumerate_tree_bases(n0: usize, k_max: usize) -> Result<TreeBasisIter> {
    if n0 > 5 {
        return Err(Error::EnumerationGuard(n0));
    }
    enumerate_tree_bases_unguarded(n0, k_max)
}

/// Enumeration without the explosion guard; counts grow as `N^2 + 1` per
/// level, so think before raising `k_max` past 5.
pub fn enumerate_tree_bases_unguarded(n0: usize, k_max: usize) -> Result<TreeBasisIter> {
    if k_max > n0 {
        return Err(Error::DepthOutOfRange {
            depth: k_max,
            max: n0,
        });
    }
    Ok(TreeBasisIter {
        n0,
        k_max,
        state: Some(Shape::Leaf),
    })
}

/// Rebuilds the analyzed vector from the coefficients of any tree basis.
pub fn reconstruct(table: &DictionaryTable, selection: &TreeBasis) -> Result<Vec<f64>> {
    reconstruct_with(table, selection, &FilterPair::haar_walsh())
}

pub fn reconstruct_with(
    table: &DictionaryTable,
    selection: &TreeBasis,
    filters: &FilterPair,
) -> Result<Vec<f64>> {
    if selection.n0 != table.n0() {
        return Err(Error::DimensionMismatch {
            expected: table.n0(),
            got: selection.n0,
        });
    }
    if selection.max_level() > table.depth() {
        return Err(Error::DepthOutOfRange {
            depth: selection.max_level(),
            max: table.depth(),
        });
    }
    let n = table.n();
    let mut out = vec![0.0; n];
    for &(k, l) in selection.nodes() {
        let coeffs = table.node_slice(k, l)?;
        for (o, v) in out
            .iter_mut()
            .zip(synthesize_to_root(coeffs, k, l, n, filters))
        {
            *o += v;
        }
    }
    Ok(out)
}
