//! The additive-cost best-basis search over the dictionary tree: bottom-up
//! pruning that keeps a parent node whenever its cost does not exceed the
//! sum of its children's best costs (ties keep the parent), plus an
//! exhaustive search over all enumerated tree bases as an oracle.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analytic::{check_p, negative_node_entropy, positive_node_entropy};
use crate::costs::{additive_cost, AdditiveKind, HistogramEstimator};
use crate::dictionary::{enumerate_tree_bases, DictionaryTable, TreeBasis};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum};

/// Additive node cost over one or more coefficient tables.
#[derive(Debug, Clone, PartialEq)]
pub enum DictionaryCost {
    /// Dataset mean of `sum |coef|^p` per node.
    Lp { p: f64 },
    /// Dataset mean count of `|coef| > zero_tol` per node.
    L0 { zero_tol: f64 },
    /// Sum over node coordinates of the histogram plug-in entropy across
    /// tables (needs at least two tables).
    EntropyEmpirical { estimator: HistogramEstimator },
}

impl DictionaryCost {
    fn label(&self) -> String {
        match self {
            DictionaryCost::Lp { p } => format!("lp(p={p})"),
            DictionaryCost::L0 { zero_tol } => format!("l0(zero_tol={zero_tol})"),
            DictionaryCost::EntropyEmpirical { .. } => "entropy_empirical".into(),
        }
    }
}

/// Closed-form node costs for the spike process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeCostKind {
    /// Exact coordinate entropies: `2^(n0-k)` coordinates per node, each
    /// contributing the positive- or negative-node level entropy.
    Entropy,
    /// Exact expected `l^p` node cost, `2^(-kp/2)` per node.
    Lp { p: f64 },
}

impl SpikeCostKind {
    fn label(&self) -> String {
        match self {
            SpikeCostKind::Entropy => "entropy_exact_spike".into(),
            SpikeCostKind::Lp { p } => format!("lp_exact_spike(p={p})"),
        }
    }
}

/// Per-node additive costs of a full dictionary tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCostTable {
    n0: usize,
    depth: usize,
    /// `costs[k][l]`
    costs: Vec<Vec<f64>>,
    label: String,
}

impl NodeCostTable {
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cost(&self, level: usize, pos: usize) -> Result<f64> {
        self.costs
            .get(level)
            .and_then(|row| row.get(pos))
            .copied()
            .ok_or(Error::NodeOutOfRange { level, pos })
    }

    /// Total cost of a selection: the sum of its node costs.
    pub fn selection_cost(&self, selection: &TreeBasis) -> Result<f64> {
        let mut total = 0.0;
        for &(k, l) in selection.nodes() {
            total += self.cost(k, l)?;
        }
        Ok(total)
    }

    fn as_map(&self) -> BTreeMap<(usize, usize), f64> {
        let mut map = BTreeMap::new();
        for (k, row) in self.costs.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                map.insert((k, l), c);
            }
        }
        map
    }
}

/// Node costs measured from analyzed data tables.
pub fn node_cost_table(tables: &[DictionaryTable], cost: &DictionaryCost) -> Result<NodeCostTable> {
    let first = tables.first().ok_or(Error::EmptySample)?;
    let (n0, depth) = (first.n0(), first.depth());
    if tables.iter().any(|t| t.n0() != n0 || t.depth() != depth) {
        return Err(Error::InvalidParams(
            "tables must share dimension and depth".into(),
        ));
    }
    if let DictionaryCost::Lp { p } = cost {
        check_p(*p)?;
    }
    if matches!(cost, DictionaryCost::EntropyEmpirical { .. }) && tables.len() < 2 {
        return Err(Error::InvalidParams(
            "empirical entropy needs at least 2 tables".into(),
        ));
    }
    let n_tables = tables.len();
    let mut costs = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let nodes = 1usize << k;
        let row: Vec<f64> = map_indexed(nodes, |l| match cost {
            DictionaryCost::Lp { p } => {
                let per_table: Vec<f64> = tables
                    .iter()
                    .map(|t| {
                        additive_cost(
                            t.node_slice(k, l).expect("in range"),
                            AdditiveKind::Lp { p: *p },
                        )
                    })
                    .collect();
                pairwise_sum(&per_table) / n_tables as f64
            }
            DictionaryCost::L0 { zero_tol } => {
                let per_table: Vec<f64> = tables
                    .iter()
                    .map(|t| {
                        additive_cost(
                            t.node_slice(k, l).expect("in range"),
                            AdditiveKind::L0 {
                                zero_tol: *zero_tol,
                            },
                        )
                    })
                    .collect();
                pairwise_sum(&per_table) / n_tables as f64
            }
            DictionaryCost::EntropyEmpirical { estimator } => {
                let coords = first.n() >> k;
                let bins = estimator.bin_count(n_tables);
                let mut node_total = 0.0;
                let mut values = vec![0.0; n_tables];
                for c in 0..coords {
                    for (t, table) in tables.iter().enumerate() {
                        values[t] = table.node_slice(k, l).expect("in range")[c];
                    }
                    node_total += histogram_entropy(&values, bins);
                }
                node_total
            }
        });
        costs.push(row);
    }
    Ok(NodeCostTable {
        n0,
        depth,
        costs,
        label: cost.label(),
    })
}

/// Plug-in entropy of one coordinate in bits; degenerate ranges contribute 0.
fn histogram_entropy(values: &[f64], bins: usize) -> f64 {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    if range <= 0.0 || range.is_nan() {
        return 0.0;
    }
    let width = range / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[(((v - min) / width) as usize).min(bins - 1)] += 1;
    }
    let n = values.len() as f64;
    let mut h = width.log2();
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Closed-form node costs of the spike process on `n = 2^n0` points, at
/// full depth.
pub fn node_cost_table_exact_spike(n0: usize, kind: SpikeCostKind) -> Result<NodeCostTable> {
    if !(1..=20).contains(&n0) {
        return Err(Error::InvalidParams(format!(
            "n0 = {n0} out of supported range 1..=20"
        )));
    }
    if let SpikeCostKind::Lp { p } = kind {
        check_p(p)?;
    }
    let mut costs = Vec::with_capacity(n0 + 1);
    for k in 0..=n0 {
        let coords = 1usize << (n0 - k);
        let per_node: f64 = match kind {
            SpikeCostKind::Entropy => {
                let pos = coords as f64 * positive_node_entropy(k, n0)?;
                let neg = coords as f64 * negative_node_entropy(k, n0)?;
                // positive node first; the rest of the row is filled below
                let mut row = vec![neg; 1 << k];
                row[0] = pos;
                costs.push(row);
                continue;
            }
            SpikeCostKind::Lp { p } => 2.0_f64.powf(-(k as f64) * p / 2.0),
        };
        costs.push(vec![per_node; 1 << k]);
    }
    Ok(NodeCostTable {
        n0,
        depth: n0,
        costs,
        label: kind.label(),
    })
}

/// Outcome of a best-basis search.
#[derive(Debug, Clone, PartialEq)]
pub struct BestBasisResult {
    pub selection: TreeBasis,
    pub total_cost: f64,
    /// Cost of every node in the searched tree.
    pub per_node_costs: BTreeMap<(usize, usize), f64>,
    pub cost_label: String,
}

impl BestBasisResult {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct ResultJson<'a> {
            selection: Vec<[usize; 2]>,
            total_cost: f64,
            cost_kind: &'a str,
            n0: usize,
            #[serde(rename = "K")]
            k_max: usize,
        }
        serde_json::to_string_pretty(&ResultJson {
            selection: self
                .selection
                .nodes()
                .iter()
                .map(|&(k, l)| [k, l])
                .collect(),
            total_cost: self.total_cost,
            cost_kind: &self.cost_label,
            n0: self.selection.n0(),
            k_max: self
                .per_node_costs
                .keys()
                .map(|&(k, _)| k)
                .max()
                .unwrap_or(0),
        })
        .expect("serializable")
    }
}

/// Bottom-up pruning over a node cost table. Ties keep the parent, so the
/// shallowest of equally cheap selections wins.
pub fn best_basis_from_costs(table: &NodeCostTable) -> BestBasisResult {
    let depth = table.depth;
    // best achievable cost of the subtree rooted at each node
    let mut best: Vec<Vec<f64>> = table.costs.clone();
    // whether the node itself (true) or its children (false) realize it
    let mut keep: Vec<Vec<bool>> = (0..=depth).map(|k| vec![true; 1usize << k]).collect();
    for k in (0..depth).rev() {
        for l in 0..(1usize << k) {
            let children = best[k + 1][2 * l] + best[k + 1][2 * l + 1];
            if table.costs[k][l] <= children {
                best[k][l] = table.costs[k][l];
            } else {
                best[k][l] = children;
                keep[k][l] = false;
            }
        }
    }
    let mut nodes = Vec::new();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((k, l)) = stack.pop() {
        if keep[k][l] {
            nodes.push((k, l));
        } else {
            stack.push((k + 1, 2 * l));
            stack.push((k + 1, 2 * l + 1));
        }
    }
    let selection = TreeBasis::from_nodes(table.n0, nodes).expect("pruning yields a cover");
    BestBasisResult {
        total_cost: best[0][0],
        selection,
        per_node_costs: table.as_map(),
        cost_label: table.label.clone(),
    }
}

/// Evaluates every enumerated tree basis and returns the global minimum,
/// ties broken by canonical enumeration order (root first).
pub fn exhaustive_best_basis_from_costs(table: &NodeCostTable) -> Result<BestBasisResult> {
    let mut best: Option<(TreeBasis, f64)> = None;
    for basis in enumerate_tree_bases(table.n0, table.depth)? {
        let cost = table.selection_cost(&basis)?;
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((basis, cost));
        }
    }
    let (selection, total_cost) = best.expect("enumeration is nonempty");
    Ok(BestBasisResult {
        selection,
        total_cost,
        per_node_costs: table.as_map(),
        cost_label: table.label.clone(),
    })
}

/// Best basis of one or more analyzed tables under an additive cost.
pub fn best_basis(tables: &[DictionaryTable], cost: &DictionaryCost) -> Result<BestBasisResult> {
    Ok(best_basis_from_costs(&node_cost_table(tables, cost)?))
}

/// Best basis for the spike process from the closed-form node costs.
pub fn best_basis_exact_spike(n0: usize, kind: SpikeCostKind) -> Result<BestBasisResult> {
    Ok(best_basis_from_costs(&node_cost_table_exact_spike(
        n0, kind,
    )?))
}

/// Exhaustive oracle for [`best_basis`] (sizes guarded at `n0 <= 5`).
pub fn exhaustive_best_basis(
    tables: &[DictionaryTable],
    cost: &DictionaryCost,
) -> Result<BestBasisResult> {
    exhaustive_best_basis_from_costs(&node_cost_table(tables, cost)?)
}

/// Exhaustive oracle for [`best_basis_exact_spike`].
pub fn exhaustive_best_basis_exact_spike(
    n0: usize,
    kind: SpikeCostKind,
) -> Result<BestBasisResult> {
    exhaustive_best_basis_from_costs(&node_cost_table_exact_spike(n0, kind)?)
}
