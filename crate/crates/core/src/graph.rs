//! Annotated query graphs: the representation the learned estimators consume.
//!
//! A query becomes a heterogeneous DAG with five node kinds — TABLE,
//! ATTRIBUTE, CORRELATION, PREDICATE, OP — and edges oriented toward the
//! root operator:
//!
//! ```text
//! CORRELATION ──▶ TABLE ─────────────▶ scan OP ──▶ join OP (root, joins only)
//! ATTRIBUTE ──▶ TABLE                      ▲
//! ATTRIBUTE ──▶ PREDICATE ──▶ AND ─────────┘   (AND only for 2+ predicates)
//! ```
//!
//! Features are drawn from the statistics catalog, never from raw rows, and
//! never include table or column *names* — the representation must transfer
//! across datasets. Each PREDICATE node carries the classical selectivity
//! estimate, the fraction of percentile boundaries strictly below its
//! constant (`offset`), a min-max `encoded_constant`, and a hashed
//! `constant` bucket for string literals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::baseline;
use crate::data::{ColumnType, Literal};
use crate::stats::{ColumnStats, StatValues, StatsCatalog};
use crate::workload::{PredOp, QuerySpec, WorkloadRecord};
use crate::{Error, Result};

/// Predicate operator vocabulary as it appears on PREDICATE nodes. `Is` and
/// `IsNot` are the NULL tests; `And` is the conjunction combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredOperator {
    Eq,
    Gt,
    Lt,
    Ge,
    Le,
    Is,
    IsNot,
    Between,
    And,
}

impl PredOperator {
    /// Stable index into the one-hot operator encoding.
    pub fn index(self) -> usize {
        match self {
            PredOperator::Eq => 0,
            PredOperator::Gt => 1,
            PredOperator::Lt => 2,
            PredOperator::Ge => 3,
            PredOperator::Le => 4,
            PredOperator::Is => 5,
            PredOperator::IsNot => 6,
            PredOperator::Between => 7,
            PredOperator::And => 8,
        }
    }

    pub const COUNT: usize = 9;
}

impl From<PredOp> for PredOperator {
    fn from(op: PredOp) -> Self {
        match op {
            PredOp::Eq => PredOperator::Eq,
            PredOp::Gt => PredOperator::Gt,
            PredOp::Lt => PredOperator::Lt,
            PredOp::Ge => PredOperator::Ge,
            PredOp::Le => PredOperator::Le,
            PredOp::Between => PredOperator::Between,
            PredOp::IsNull => PredOperator::Is,
            PredOp::IsNotNull => PredOperator::IsNot,
        }
    }
}

/// Plan operator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Scan,
    Join,
}

/// One graph node with its kind-specific features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Table {
        rows: f64,
    },
    Attribute {
        data_type: ColumnType,
        null_frac: f64,
        num_unique: f64,
        /// 101 numeric boundaries; all-zero for string or all-NULL columns.
        percentiles: Vec<f64>,
    },
    Correlation {
        /// 0.0 when `validity` is false (the value must be ignored).
        correlation: f64,
        validity: bool,
    },
    Predicate {
        operator: PredOperator,
        estimated_selectivity: f64,
        offset: f64,
        constant: f64,
        encoded_constant: f64,
    },
    Op {
        operator: OpKind,
    },
}

impl Node {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Node::Table { .. } => "table",
            Node::Attribute { .. } => "attribute",
            Node::Correlation { .. } => "correlation",
            Node::Predicate { .. } => "predicate",
            Node::Op { .. } => "op",
        }
    }
}

/// An annotated query graph with its true cardinality label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGraph {
    pub id: String,
    pub nodes: Vec<Node>,
    /// Directed edges (from, to), oriented toward the root.
    pub edges: Vec<(u32, u32)>,
    /// The final operator; always the last node as built here.
    pub root: u32,
    pub label: u64,
}

/// FNV-1a 64-bit hash — tiny, dependency-free, and stable across platforms,
/// which is all the hashed string-constant feature needs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Number of hash buckets for string constants.
const CONSTANT_BUCKETS: u64 = 1024;

/// Fraction of percentile boundaries strictly below the constant; 0.0 when
/// the predicate has no constant or the column has no value summary.
fn offset_feature(stats: &ColumnStats, lit: Option<&Literal>) -> f64 {
    let Some(lit) = lit else { return 0.0 };
    match (&stats.values, lit) {
        (StatValues::Numeric { percentiles, .. }, Literal::Int(_) | Literal::Float(_)) => {
            let c = match lit {
                Literal::Int(v) => *v as f64,
                Literal::Float(v) => *v,
                Literal::Str(_) => unreachable!(),
            };
            let below = percentiles.iter().filter(|&&b| b < c).count();
            below as f64 / percentiles.len() as f64
        }
        (StatValues::Text { percentiles, .. }, Literal::Str(s)) => {
            let below = percentiles.iter().filter(|b| b.as_str() < s.as_str()).count();
            below as f64 / percentiles.len() as f64
        }
        _ => 0.0,
    }
}

/// Min-max position of a numeric constant within the column's value range,
/// clamped to [0, 1]; 0.0 for strings, missing summaries, or min == max.
fn encoded_constant_feature(stats: &ColumnStats, lit: Option<&Literal>) -> f64 {
    let Some(lit) = lit else { return 0.0 };
    let c = match lit {
        Literal::Int(v) => *v as f64,
        Literal::Float(v) => *v,
        Literal::Str(_) => return 0.0,
    };
    match stats.numeric_min_max() {
        Some((min, max)) if max > min => ((c - min) / (max - min)).clamp(0.0, 1.0),
        _ => 0.0,
    }
}

/// Hash bucket of a string constant; 0.0 for everything else.
fn constant_feature(lit: Option<&Literal>) -> f64 {
    match lit {
        Some(Literal::Str(s)) => (fnv1a64(s.as_bytes()) % CONSTANT_BUCKETS) as f64,
        _ => 0.0,
    }
}

/// Build the annotated graph for one query spec.
///
/// Node order is deterministic: per scan (in canonical scan order) the TABLE
/// node, ATTRIBUTE nodes for referenced columns sorted by name, CORRELATION
/// nodes for unordered numeric pairs of those columns, PREDICATE nodes in
/// canonical predicate order, the AND combiner when two or more predicates
/// exist, then the scan OP; the join OP (if any) comes last. The root is the
/// final operator.
pub fn build_query_graph(
    catalog: &StatsCatalog,
    id: &str,
    spec: &QuerySpec,
    label: u64,
) -> Result<QueryGraph> {
    spec.validate()?;
    let mut nodes: Vec<Node> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut scan_ops: Vec<u32> = Vec::new();

    for (scan_idx, scan) in spec.scans.iter().enumerate() {
        let table = catalog.table(&scan.table)?;
        let table_id = nodes.len() as u32;
        nodes.push(Node::Table {
            rows: table.rows as f64,
        });

        // Referenced columns: filter columns plus this side's join key.
        let mut referenced: BTreeMap<&str, ()> = BTreeMap::new();
        for p in &scan.predicates {
            referenced.insert(p.column.as_str(), ());
        }
        if let Some(join) = &spec.join {
            if scan_idx == 0 {
                referenced.insert(join.left_column.as_str(), ());
            } else {
                referenced.insert(join.right_column.as_str(), ());
            }
        }

        let mut attr_ids: BTreeMap<&str, u32> = BTreeMap::new();
        for (&name, _) in &referenced {
            let stats = table.column(name)?;
            let percentiles = match stats.numeric_percentiles() {
                Some(ps) => ps.to_vec(),
                None => vec![0.0; crate::stats::PERCENTILE_POINTS],
            };
            let attr_id = nodes.len() as u32;
            nodes.push(Node::Attribute {
                data_type: stats.data_type,
                null_frac: stats.null_frac,
                num_unique: stats.num_unique as f64,
                percentiles,
            });
            edges.push((attr_id, table_id));
            attr_ids.insert(name, attr_id);
        }

        // Correlations between referenced numeric columns of this table.
        let numeric_refs: Vec<&str> = referenced
            .keys()
            .copied()
            .filter(|name| {
                table
                    .column(name)
                    .map(|s| s.data_type.is_numeric())
                    .unwrap_or(false)
            })
            .collect();
        for i in 0..numeric_refs.len() {
            for j in (i + 1)..numeric_refs.len() {
                if let Some(stat) = table.correlation(numeric_refs[i], numeric_refs[j]) {
                    let corr_id = nodes.len() as u32;
                    nodes.push(Node::Correlation {
                        correlation: if stat.validity { stat.correlation } else { 0.0 },
                        validity: stat.validity,
                    });
                    edges.push((corr_id, table_id));
                }
            }
        }

        // Predicates, then the AND combiner when there are two or more.
        let mut pred_ids = Vec::with_capacity(scan.predicates.len());
        let mut sel_product = 1.0;
        for pred in &scan.predicates {
            let stats = table.column(&pred.column)?;
            let sel = baseline::predicate_selectivity(stats, pred)?;
            sel_product *= sel;
            let first_const = pred.constants.first();
            let pred_id = nodes.len() as u32;
            nodes.push(Node::Predicate {
                operator: pred.op.into(),
                estimated_selectivity: sel,
                offset: offset_feature(stats, first_const),
                constant: constant_feature(first_const),
                encoded_constant: encoded_constant_feature(stats, first_const),
            });
            edges.push((attr_ids[pred.column.as_str()], pred_id));
            pred_ids.push(pred_id);
        }
        let filter_out = if pred_ids.len() >= 2 {
            let and_id = nodes.len() as u32;
            nodes.push(Node::Predicate {
                operator: PredOperator::And,
                estimated_selectivity: sel_product.clamp(0.0, 1.0),
                offset: 0.0,
                constant: 0.0,
                encoded_constant: 0.0,
            });
            for pid in &pred_ids {
                edges.push((*pid, and_id));
            }
            Some(and_id)
        } else {
            pred_ids.first().copied()
        };

        let op_id = nodes.len() as u32;
        nodes.push(Node::Op {
            operator: OpKind::Scan,
        });
        edges.push((table_id, op_id));
        if let Some(filter) = filter_out {
            edges.push((filter, op_id));
        }
        scan_ops.push(op_id);
    }

    let root = if spec.join.is_some() {
        let join_id = nodes.len() as u32;
        nodes.push(Node::Op {
            operator: OpKind::Join,
        });
        for scan_op in &scan_ops {
            edges.push((*scan_op, join_id));
        }
        join_id
    } else {
        scan_ops[0]
    };

    let graph = QueryGraph {
        id: id.to_string(),
        nodes,
        edges,
        root,
        label,
    };
    graph.validate()?;
    Ok(graph)
}

/// Build graphs for every `ok` record of a labeled workload.
pub fn build_graphs(
    catalog: &StatsCatalog,
    records: &[WorkloadRecord],
) -> Result<Vec<QueryGraph>> {
    records
        .iter()
        .filter(|r| r.status == crate::workload::RecordStatus::Ok)
        .map(|r| {
            let label = r.label.ok_or_else(|| {
                Error::InvalidQuerySpec(format!("record `{}` is ok but unlabeled", r.id))
            })?;
            build_query_graph(catalog, &r.id, &r.spec, label)
        })
        .collect()
}

impl QueryGraph {
    /// Structural validation: edge endpoints in range, acyclic, root is the
    /// unique sink, and every node has a directed path to the root.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.root as usize >= n {
            return Err(Error::InvalidQuerySpec(format!(
                "graph `{}`: root {} out of range",
                self.id, self.root
            )));
        }
        for &(u, v) in &self.edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidQuerySpec(format!(
                    "graph `{}`: edge ({u}, {v}) out of range",
                    self.id
                )));
            }
        }
        // Acyclicity falls out of a complete topological order.
        let order = self.topo_order()?;
        debug_assert_eq!(order.len(), n);
        // Root must have no outgoing edge; every node must reach the root.
        if self.edges.iter().any(|&(u, _)| u == self.root) {
            return Err(Error::InvalidQuerySpec(format!(
                "graph `{}`: root has an outgoing edge",
                self.id
            )));
        }
        let mut reaches = vec![false; n];
        reaches[self.root as usize] = true;
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            rev[v as usize].push(u);
        }
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for &u in &rev[v as usize] {
                if !reaches[u as usize] {
                    reaches[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        if let Some(orphan) = reaches.iter().position(|&r| !r) {
            return Err(Error::InvalidQuerySpec(format!(
                "graph `{}`: node {orphan} cannot reach the root",
                self.id
            )));
        }
        Ok(())
    }

    /// Topological order (Kahn's algorithm, smallest node id first among
    /// ready nodes, so the order is deterministic). Errors on cycles.
    pub fn topo_order(&self) -> Result<Vec<u32>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            indegree[v as usize] += 1;
            adj[u as usize].push(v);
        }
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<u32>> = (0..n as u32)
            .filter(|&v| indegree[v as usize] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            order.push(v);
            for &w in &adj[v as usize] {
                indegree[w as usize] -= 1;
                if indegree[w as usize] == 0 {
                    ready.push(std::cmp::Reverse(w));
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidQuerySpec(format!(
                "graph `{}` contains a cycle",
                self.id
            )));
        }
        Ok(order)
    }

    /// All-pairs shortest-path *bucket* matrix over the undirected skeleton:
    /// entry (i, j) is `min(distance, max_distance)`, or `max_distance + 1`
    /// as the sentinel for unreachable pairs.
    pub fn shortest_path_buckets(&self, max_distance: u16) -> Vec<Vec<u16>> {
        let n = self.nodes.len();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let sentinel = max_distance + 1;
        let mut out = vec![vec![sentinel; n]; n];
        let mut queue = std::collections::VecDeque::new();
        for src in 0..n {
            let row = &mut out[src];
            let mut dist = vec![u32::MAX; n];
            dist[src] = 0;
            queue.clear();
            queue.push_back(src as u32);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v as usize] {
                    if dist[w as usize] == u32::MAX {
                        dist[w as usize] = dist[v as usize] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for (j, &d) in dist.iter().enumerate() {
                if d != u32::MAX {
                    row[j] = (d as u16).min(max_distance);
                }
            }
        }
        out
    }
}

/// Serialize graphs as JSONL.
pub fn graphs_to_jsonl(graphs: &[QueryGraph]) -> Result<String> {
    let mut out = String::new();
    for g in graphs {
        out.push_str(&serde_json::to_string(g)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parse graphs from JSONL, validating each.
pub fn graphs_from_jsonl(text: &str) -> Result<Vec<QueryGraph>> {
    let graphs: Vec<QueryGraph> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect::<Result<_>>()?;
    for g in &graphs {
        g.validate()?;
    }
    Ok(graphs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnData, Table};
    use crate::workload::{JoinSpec, Predicate, ScanSpec};

    fn catalog() -> StatsCatalog {
        let dim = Table::new(
            "dim",
            vec![
                Column::new("id", ColumnData::Int((0..50).map(Some).collect())),
                Column::new(
                    "w",
                    ColumnData::Float((0..50).map(|i| Some(i as f64 * 0.5)).collect()),
                ),
            ],
        )
        .unwrap();
        let fact = Table::new(
            "fact",
            vec![
                Column::new("dim_fk", ColumnData::Int((0..400).map(|i| Some(i % 50)).collect())),
                Column::new("a", ColumnData::Int((0..400).map(|i| Some(i % 20)).collect())),
                Column::new("b", ColumnData::Float((0..400).map(|i| Some((i % 30) as f64)).collect())),
                Column::new(
                    "s",
                    ColumnData::Str((0..400).map(|i| Some(format!("w{:02}", i % 10))).collect()),
                ),
            ],
        )
        .unwrap();
        let ds = crate::data::Dataset::new("d", vec![dim, fact]).unwrap();
        StatsCatalog::compute(&ds).unwrap()
    }

    fn pred(column: &str, op: PredOp, constants: Vec<Literal>) -> Predicate {
        Predicate {
            column: column.into(),
            op,
            constants,
        }
    }

    fn single_spec(preds: Vec<Predicate>) -> QuerySpec {
        QuerySpec {
            scans: vec![ScanSpec {
                table: "fact".into(),
                predicates: preds,
            }],
            join: None,
        }
    }

    #[test]
    fn single_table_graph_has_expected_shape() {
        let catalog = catalog();
        // Three predicates on a, b (numeric) and s (string): one correlation
        // node for the (a, b) pair.
        let spec = single_spec(vec![
            pred("a", PredOp::Eq, vec![Literal::Int(3)]),
            pred("b", PredOp::Lt, vec![Literal::Float(11.0)]),
            pred("s", PredOp::Eq, vec![Literal::Str("w03".into())]),
        ]);
        let g = build_query_graph(&catalog, "q0", &spec, 7).unwrap();
        // 1 TABLE + 3 ATTRIBUTE + 1 CORRELATION + 3 PREDICATE + AND + OP.
        assert_eq!(g.nodes.len(), 10);
        // 3 attr->table + 1 corr->table + 3 attr->pred + 3 pred->and
        // + 1 and->op + 1 table->op.
        assert_eq!(g.edges.len(), 12);
        assert_eq!(g.root, 9);
        assert!(matches!(g.nodes[g.root as usize], Node::Op { operator: OpKind::Scan }));
        assert_eq!(g.label, 7);
    }

    #[test]
    fn one_predicate_graph_skips_the_and_combiner() {
        let catalog = catalog();
        let spec = single_spec(vec![pred("a", PredOp::Eq, vec![Literal::Int(3)])]);
        let g = build_query_graph(&catalog, "q1", &spec, 1).unwrap();
        // TABLE + ATTRIBUTE + PREDICATE + OP; no correlation (one column).
        assert_eq!(g.nodes.len(), 4);
        let ands = g
            .nodes
            .iter()
            .filter(|n| matches!(n, Node::Predicate { operator: PredOperator::And, .. }))
            .count();
        assert_eq!(ands, 0);
    }

    #[test]
    fn join_graph_roots_at_the_join_operator() {
        let catalog = catalog();
        let spec = QuerySpec {
            scans: vec![
                ScanSpec {
                    table: "dim".into(),
                    predicates: vec![pred("w", PredOp::Le, vec![Literal::Float(10.0)])],
                },
                ScanSpec {
                    table: "fact".into(),
                    predicates: vec![pred("a", PredOp::Eq, vec![Literal::Int(5)])],
                },
            ],
            join: Some(JoinSpec {
                left_table: "dim".into(),
                left_column: "id".into(),
                right_table: "fact".into(),
                right_column: "dim_fk".into(),
            }),
        };
        let g = build_query_graph(&catalog, "qj", &spec, 40).unwrap();
        assert!(matches!(g.nodes[g.root as usize], Node::Op { operator: OpKind::Join }));
        let incoming: Vec<u32> = g
            .edges
            .iter()
            .filter(|(_, v)| *v == g.root)
            .map(|(u, _)| *u)
            .collect();
        assert_eq!(incoming.len(), 2, "root takes exactly the two scan ops");
        for u in incoming {
            assert!(matches!(g.nodes[u as usize], Node::Op { operator: OpKind::Scan }));
        }
        // dim side references id (join key) and w: both numeric, so the
        // correlation node for that pair must exist with validity.
        let corrs = g
            .nodes
            .iter()
            .filter(|n| matches!(n, Node::Correlation { .. }))
            .count();
        assert_eq!(corrs, 2, "one pair on dim (id, w), one on fact (a, dim_fk)");
    }

    #[test]
    fn and_node_carries_the_selectivity_product() {
        let catalog = catalog();
        let spec = single_spec(vec![
            pred("a", PredOp::Eq, vec![Literal::Int(3)]),
            pred("s", PredOp::Eq, vec![Literal::Str("w03".into())]),
        ]);
        let g = build_query_graph(&catalog, "q2", &spec, 2).unwrap();
        let mut sels = Vec::new();
        let mut and_sel = None;
        for n in &g.nodes {
            if let Node::Predicate {
                operator,
                estimated_selectivity,
                ..
            } = n
            {
                if *operator == PredOperator::And {
                    and_sel = Some(*estimated_selectivity);
                } else {
                    sels.push(*estimated_selectivity);
                }
            }
        }
        let product: f64 = sels.iter().product();
        assert!((and_sel.unwrap() - product).abs() < 1e-12);
        assert!((product - (1.0 / 20.0) * (1.0 / 10.0)).abs() < 1e-12);
    }

    #[test]
    fn offset_and_encoded_constant_track_position() {
        let catalog = catalog();
        let stats = catalog.column("fact", "a").unwrap();
        // a has values 0..=19: below the min nothing is smaller.
        assert_eq!(offset_feature(stats, Some(&Literal::Int(0))), 0.0);
        assert_eq!(offset_feature(stats, Some(&Literal::Int(100))), 1.0);
        let mid = offset_feature(stats, Some(&Literal::Int(10)));
        assert!(mid > 0.3 && mid < 0.7, "mid-range offset: {mid}");
        // Monotone in the constant.
        let mut last = 0.0;
        for c in 0..=20 {
            let o = offset_feature(stats, Some(&Literal::Int(c)));
            assert!(o >= last, "offset must be monotone at {c}");
            last = o;
        }
        assert_eq!(encoded_constant_feature(stats, Some(&Literal::Int(0))), 0.0);
        assert_eq!(encoded_constant_feature(stats, Some(&Literal::Int(19))), 1.0);
        assert!((encoded_constant_feature(stats, Some(&Literal::Float(9.5))) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn string_constants_hash_into_buckets() {
        let v = constant_feature(Some(&Literal::Str("w03".into())));
        assert!(v >= 0.0 && v < 1024.0 && v.fract() == 0.0);
        assert_eq!(v, constant_feature(Some(&Literal::Str("w03".into()))), "stable");
        assert_eq!(constant_feature(Some(&Literal::Int(5))), 0.0);
    }

    #[test]
    fn topo_order_respects_every_edge() {
        let catalog = catalog();
        let spec = single_spec(vec![
            pred("a", PredOp::Eq, vec![Literal::Int(3)]),
            pred("b", PredOp::Gt, vec![Literal::Float(4.0)]),
        ]);
        let g = build_query_graph(&catalog, "q3", &spec, 5).unwrap();
        let order = g.topo_order().unwrap();
        let mut pos = vec![0usize; g.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i;
        }
        for &(u, v) in &g.edges {
            assert!(pos[u as usize] < pos[v as usize], "edge ({u},{v}) out of order");
        }
        assert_eq!(*order.last().unwrap(), g.root, "root is the unique sink");
    }

    #[test]
    fn distance_buckets_match_a_hand_worked_case() {
        // TABLE(0) ATTR(1) PRED(2) OP(3): attr->table, attr->pred, pred->op,
        // table->op. Undirected distances from ATTR: table 1, pred 1, op 2.
        let catalog = catalog();
        let spec = single_spec(vec![pred("a", PredOp::Eq, vec![Literal::Int(3)])]);
        let g = build_query_graph(&catalog, "q4", &spec, 5).unwrap();
        let d = g.shortest_path_buckets(8);
        assert_eq!(d[1][0], 1);
        assert_eq!(d[1][2], 1);
        assert_eq!(d[1][3], 2);
        assert_eq!(d[0][0], 0);
        // Symmetric.
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d[i][j], d[j][i]);
            }
        }
        // Clamping: with max_distance 1 the attr-op distance buckets at 1.
        let d1 = g.shortest_path_buckets(1);
        assert_eq!(d1[1][3], 1);
    }

    #[test]
    fn graphs_roundtrip_through_jsonl() {
        let catalog = catalog();
        let spec = single_spec(vec![
            pred("a", PredOp::Between, vec![Literal::Int(2), Literal::Int(9)]),
            pred("s", PredOp::Eq, vec![Literal::Str("w07".into())]),
        ]);
        let g = build_query_graph(&catalog, "q5", &spec, 33).unwrap();
        let text = graphs_to_jsonl(std::slice::from_ref(&g)).unwrap();
        let back = graphs_from_jsonl(&text).unwrap();
        assert_eq!(back, vec![g]);
    }
}
