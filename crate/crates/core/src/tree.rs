//! The probability tree.
//!
//! Level `i` of the tree corresponds to column `i` of the source table. Each
//! [`Node`] lists the distinct values seen in its column among the rows that
//! match every `(column, value)` pair on the path from the root, together
//! with the relative frequency of each value among those rows.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::table::{validate_columns, CategoricalTable, CategoricalValue, Record, TableError, ValueKind};

/// Absolute tolerance used for every "sums to one" check.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("cannot build a tree from a table with no rows or no columns")]
    EmptyTable,
    #[error("duplicate column name {0:?}")]
    DuplicateColumnName(String),
    #[error("record has {len} values but the tree has {depth} columns")]
    RecordTooLong { len: usize, depth: usize },
    #[error("tree invariant violated: {0}")]
    InvariantViolation(String),
}

/// One alternative at a [`Node`]: a value, its conditional probability and
/// the subtree for the remaining columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataNode {
    pub value: CategoricalValue,
    pub probability: f64,
    /// `None` exactly when the owning node belongs to the last column.
    pub next: Option<Box<Node>>,
}

impl DataNode {
    pub fn is_leaf(&self) -> bool {
        self.next.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub column_name: String,
    /// Sorted by probability descending, ties by ascending value.
    pub data: Vec<DataNode>,
}

impl Node {
    pub fn find(&self, value: &CategoricalValue) -> Option<&DataNode> {
        self.data.iter().find(|d| &d.value == value)
    }
}

/// Immutable probability tree built from a [`CategoricalTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTree {
    columns: Vec<String>,
    root: Node,
    source_rows: usize,
}

impl ProbabilityTree {
    /// Builds the tree by recursively partitioning the rows on each column.
    pub fn build(table: &CategoricalTable) -> Result<Self, TreeError> {
        if table.n_columns() == 0 || table.n_rows() == 0 {
            return Err(TreeError::EmptyTable);
        }
        validate_columns(table.columns()).map_err(|e| match e {
            TableError::DuplicateColumnName(name) => TreeError::DuplicateColumnName(name),
            TableError::NoColumns => TreeError::EmptyTable,
            other => TreeError::InvariantViolation(other.to_string()),
        })?;
        let rows: Vec<&Record> = table.rows().iter().collect();
        let root = build_node(table.columns(), 0, &rows);
        Ok(ProbabilityTree {
            columns: table.columns().to_vec(),
            root,
            source_rows: table.n_rows(),
        })
    }

    /// Assembles a tree from already-built parts, checking every structural
    /// invariant. Used when loading persisted trees.
    pub fn from_parts(columns: Vec<String>, root: Node, source_rows: usize) -> Result<Self, TreeError> {
        validate_columns(&columns).map_err(|e| TreeError::InvariantViolation(e.to_string()))?;
        let tree = ProbabilityTree {
            columns,
            root,
            source_rows,
        };
        tree.validate()?;
        Ok(tree)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Number of rows in the table the tree was built from.
    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn depth(&self) -> usize {
        self.columns.len()
    }

    /// Total number of [`DataNode`] entries across all nodes.
    pub fn node_count(&self) -> usize {
        fn count(node: &Node) -> usize {
            node.data
                .iter()
                .map(|d| 1 + d.next.as_deref().map_or(0, count))
                .sum()
        }
        count(&self.root)
    }

    /// Value kind of column `index`, read off the first path through the tree.
    pub fn column_kind(&self, index: usize) -> Option<ValueKind> {
        let mut node = &self.root;
        for _ in 0..index {
            node = node.data.first()?.next.as_deref()?;
        }
        node.data.first().map(|d| d.value.kind())
    }

    /// Walks `record` from the root and returns the matching data nodes.
    fn walk<'a>(&'a self, record: &[CategoricalValue]) -> Result<Option<Vec<&'a DataNode>>, TreeError> {
        if record.len() > self.depth() {
            return Err(TreeError::RecordTooLong {
                len: record.len(),
                depth: self.depth(),
            });
        }
        let mut path = Vec::with_capacity(record.len());
        let mut node = Some(&self.root);
        for value in record {
            let Some(found) = node.and_then(|n| n.find(value)) else {
                return Ok(None);
            };
            path.push(found);
            node = found.next.as_deref();
        }
        Ok(Some(path))
    }

    /// True iff `record` (possibly a prefix) is a path in the tree. The empty
    /// record is always contained.
    pub fn oracle(&self, record: &[CategoricalValue]) -> Result<bool, TreeError> {
        Ok(self.walk(record)?.is_some())
    }

    /// Product of conditional probabilities along `record`'s path; zero when
    /// the path does not exist and one for the empty record.
    pub fn record_probability(&self, record: &[CategoricalValue]) -> Result<f64, TreeError> {
        Ok(match self.walk(record)? {
            Some(path) => path.iter().map(|d| d.probability).product(),
            None => 0.0,
        })
    }

    /// Greedy descent taking the most probable alternative at each node.
    ///
    /// This is a per-vertex maximum, not the globally most probable record;
    /// use [`ProbabilityTree::leaf_paths`] with
    /// [`ProbabilityTree::record_probability`] to find the latter.
    pub fn max_record(&self) -> (Record, Vec<f64>) {
        let mut record = Vec::with_capacity(self.depth());
        let mut probabilities = Vec::with_capacity(self.depth());
        let mut node = Some(&self.root);
        while let Some(n) = node {
            let best = &n.data[0];
            record.push(best.value.clone());
            probabilities.push(best.probability);
            node = best.next.as_deref();
        }
        (record, probabilities)
    }

    /// Every root-to-leaf path with its joint probability, in pre-order.
    pub fn leaf_paths(&self) -> Vec<(Record, f64)> {
        fn visit(node: &Node, prefix: &mut Record, p: f64, out: &mut Vec<(Record, f64)>) {
            for d in &node.data {
                prefix.push(d.value.clone());
                let joint = p * d.probability;
                match d.next.as_deref() {
                    Some(child) => visit(child, prefix, joint, out),
                    None => out.push((prefix.clone(), joint)),
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        visit(&self.root, &mut Vec::new(), 1.0, &mut out);
        out
    }

    /// Exact marginal distribution of one column, obtained by summing joint
    /// path probabilities down to that level.
    pub fn marginal(&self, column_index: usize) -> Option<BTreeMap<CategoricalValue, f64>> {
        if column_index >= self.depth() {
            return None;
        }
        fn visit(
            node: &Node,
            level: usize,
            target: usize,
            p: f64,
            out: &mut BTreeMap<CategoricalValue, f64>,
        ) {
            for d in &node.data {
                let joint = p * d.probability;
                if level == target {
                    *out.entry(d.value.clone()).or_insert(0.0) += joint;
                } else if let Some(child) = d.next.as_deref() {
                    visit(child, level + 1, target, joint, out);
                }
            }
        }
        let mut out = BTreeMap::new();
        visit(&self.root, 0, column_index, 1.0, &mut out);
        Some(out)
    }

    /// Pre-order text rendering, two spaces of indent per level.
    pub fn print_tree(&self) -> String {
        fn visit(node: &Node, depth: usize, out: &mut String) {
            for d in &node.data {
                let _ = write!(
                    out,
                    "{:indent$}{} value={} p={}",
                    "",
                    node.column_name,
                    d.value,
                    d.probability,
                    indent = depth * 2
                );
                if d.is_leaf() {
                    out.push_str(" Leaf");
                }
                out.push('\n');
                if let Some(child) = d.next.as_deref() {
                    visit(child, depth + 1, out);
                }
            }
        }
        let mut out = String::new();
        visit(&self.root, 0, &mut out);
        out
    }

    /// Checks every structural invariant of the tree.
    pub fn validate(&self) -> Result<(), TreeError> {
        let mut kinds = vec![None; self.depth()];
        self.validate_node(&self.root, 0, &mut kinds, &mut Vec::new())
    }

    fn validate_node(
        &self,
        node: &Node,
        level: usize,
        kinds: &mut [Option<ValueKind>],
        path: &mut Vec<String>,
    ) -> Result<(), TreeError> {
        let fail = |msg: String| {
            let at = if path.is_empty() { "root".to_string() } else { path.join(" | ") };
            Err(TreeError::InvariantViolation(format!("{msg} (at {at})")))
        };
        if node.column_name != self.columns[level] {
            return fail(format!(
                "node column {:?} does not match level column {:?}",
                node.column_name, self.columns[level]
            ));
        }
        if node.data.is_empty() {
            return fail("node has no alternatives".into());
        }
        let last = level + 1 == self.depth();
        let mut seen = HashSet::new();
        let mut sum = 0.0;
        for (i, d) in node.data.iter().enumerate() {
            if !(d.probability > 0.0 && d.probability <= 1.0) {
                return fail(format!("probability {} outside (0, 1]", d.probability));
            }
            if !seen.insert(&d.value) {
                return fail(format!("duplicate value {}", d.value));
            }
            match kinds[level] {
                None => kinds[level] = Some(d.value.kind()),
                Some(k) if k != d.value.kind() => {
                    return fail(format!("column {:?} mixes value kinds", node.column_name))
                }
                Some(_) => {}
            }
            if i > 0 {
                let prev = &node.data[i - 1];
                let ordered = prev.probability > d.probability
                    || (prev.probability == d.probability && prev.value < d.value);
                if !ordered {
                    return fail(format!("alternatives {} and {} are out of order", prev.value, d.value));
                }
            }
            if d.next.is_some() == last {
                return fail(format!(
                    "value {} {} a subtree",
                    d.value,
                    if last { "at the last column has" } else { "is missing" }
                ));
            }
            sum += d.probability;
        }
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return fail(format!("probabilities sum to {sum}"));
        }
        for d in &node.data {
            if let Some(child) = d.next.as_deref() {
                path.push(format!("{}, v={}", node.column_name, d.value));
                self.validate_node(child, level + 1, kinds, path)?;
                path.pop();
            }
        }
        Ok(())
    }
}

fn build_node(columns: &[String], level: usize, rows: &[&Record]) -> Node {
    let mut groups: BTreeMap<&CategoricalValue, Vec<&Record>> = BTreeMap::new();
    for row in rows {
        groups.entry(&row[level]).or_default().push(row);
    }
    let total = rows.len() as f64;
    // BTreeMap iteration is ascending by value, and the sort is stable, so
    // equal counts keep ascending value order.
    let mut groups: Vec<_> = groups.into_iter().collect();
    groups.sort_by_key(|g| std::cmp::Reverse(g.1.len()));

    let last = level + 1 == columns.len();
    let data = groups
        .into_iter()
        .map(|(value, subset)| DataNode {
            value: value.clone(),
            probability: subset.len() as f64 / total,
            next: (!last).then(|| Box::new(build_node(columns, level + 1, &subset))),
        })
        .collect();
    Node {
        column_name: columns[level].clone(),
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_table() -> CategoricalTable {
        CategoricalTable::from_rows(
            &["P1.1", "P1.2", "P1.3"],
            vec![vec![1, 2, 3], vec![5, 4, 4], vec![2, 2, 2]],
        )
        .unwrap()
    }

    fn ints(v: &[i64]) -> Record {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn example_rows_give_three_equal_chains() {
        let tree = ProbabilityTree::build(&example_table()).unwrap();
        assert_eq!(tree.columns(), ["P1.1", "P1.2", "P1.3"]);
        let root = tree.root();
        assert_eq!(root.column_name, "P1.1");
        let values: Vec<_> = root.data.iter().map(|d| d.value.clone()).collect();
        assert_eq!(values, ints(&[1, 2, 5]));
        for d in &root.data {
            assert_eq!(d.probability, 1.0 / 3.0);
        }
        let under_one = root.data[0].next.as_deref().unwrap();
        assert_eq!(under_one.column_name, "P1.2");
        assert_eq!(under_one.data.len(), 1);
        assert_eq!(under_one.data[0].value, 2.into());
        assert_eq!(under_one.data[0].probability, 1.0);
        let leaf = under_one.data[0].next.as_deref().unwrap();
        assert_eq!(leaf.data[0].value, 3.into());
        assert!(leaf.data[0].is_leaf());
        assert_eq!(tree.depth(), 3);
        assert_eq!(tree.node_count(), 9);
    }

    #[test]
    fn single_column_frequencies() {
        let t = CategoricalTable::from_rows(&["A"], vec![vec!["a"], vec!["a"], vec!["b"]]).unwrap();
        let tree = ProbabilityTree::build(&t).unwrap();
        let data = &tree.root().data;
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].value, "a".into());
        assert_eq!(data[0].probability, 2.0 / 3.0);
        assert_eq!(data[1].value, "b".into());
        assert_eq!(data[1].probability, 1.0 / 3.0);
        assert!(data.iter().all(DataNode::is_leaf));
        assert_eq!(tree.columns(), ["A"]);
        assert_eq!(tree.max_record(), (vec!["a".into()], vec![2.0 / 3.0]));
    }

    #[test]
    fn empty_table_is_rejected() {
        let t = CategoricalTable::from_rows::<_, i64>(&["A", "B"], vec![]).unwrap();
        assert_eq!(ProbabilityTree::build(&t), Err(TreeError::EmptyTable));
    }

    #[test]
    fn oracle_and_probability_on_example() {
        let tree = ProbabilityTree::build(&example_table()).unwrap();
        assert!(tree.oracle(&ints(&[1, 2, 3])).unwrap());
        assert!(!tree.oracle(&ints(&[1, 4])).unwrap());
        assert!(tree.oracle(&[]).unwrap());
        assert_eq!(tree.record_probability(&ints(&[1, 2, 3])).unwrap(), 1.0 / 3.0);
        assert_eq!(tree.record_probability(&ints(&[1, 4, 4])).unwrap(), 0.0);
        assert_eq!(tree.record_probability(&[]).unwrap(), 1.0);
        assert_eq!(
            tree.oracle(&ints(&[1, 2, 3, 4])),
            Err(TreeError::RecordTooLong { len: 4, depth: 3 })
        );
        assert!(tree.record_probability(&ints(&[1, 2, 3, 4])).is_err());
    }

    #[test]
    fn greedy_max_record() {
        let tree = ProbabilityTree::build(&example_table()).unwrap();
        assert_eq!(tree.max_record(), (ints(&[1, 2, 3]), vec![1.0 / 3.0, 1.0, 1.0]));

        let one = CategoricalTable::from_rows(&["A", "B", "C"], vec![vec![7, 8, 9]]).unwrap();
        let tree = ProbabilityTree::build(&one).unwrap();
        assert_eq!(tree.max_record(), (ints(&[7, 8, 9]), vec![1.0, 1.0, 1.0]));
    }

    #[test]
    fn greedy_max_can_differ_from_global_max() {
        // Root value 1 is more frequent, but its rows split evenly below it.
        let t = CategoricalTable::from_rows(
            &["A", "B"],
            vec![vec![1, 1], vec![1, 2], vec![1, 3], vec![2, 1], vec![2, 1]],
        )
        .unwrap();
        let tree = ProbabilityTree::build(&t).unwrap();
        let (greedy, _) = tree.max_record();
        assert_eq!(greedy, ints(&[1, 1]));
        let (global, p) = tree
            .leaf_paths()
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(global, ints(&[2, 1]));
        assert!((p - 0.4).abs() < 1e-12);
    }

    #[test]
    fn print_tree_single_path() {
        let t = CategoricalTable::from_rows(&["A", "B"], vec![vec![1, 2]]).unwrap();
        let tree = ProbabilityTree::build(&t).unwrap();
        assert_eq!(tree.print_tree(), "A value=1 p=1\n  B value=2 p=1 Leaf\n");
    }

    #[test]
    fn print_tree_example_has_nine_lines_in_root_order() {
        let tree = ProbabilityTree::build(&example_table()).unwrap();
        let text = tree.print_tree();
        assert_eq!(text.lines().count(), 9);
        let roots: Vec<_> = text.lines().filter(|l| !l.starts_with(' ')).collect();
        assert_eq!(roots.len(), 3);
        assert!(roots[0].starts_with("P1.1 value=1 "));
        assert!(roots[1].starts_with("P1.1 value=2 "));
        assert!(roots[2].starts_with("P1.1 value=5 "));
        assert_eq!(text.matches("Leaf").count(), 3);
        assert_eq!(text, tree.print_tree());
    }

    #[test]
    fn constant_column_gives_probability_exactly_one() {
        let t = CategoricalTable::from_rows(&["A", "B"], vec![vec![1, 4], vec![2, 4], vec![2, 4]]).unwrap();
        let tree = ProbabilityTree::build(&t).unwrap();
        for d in &tree.root().data {
            let child = d.next.as_deref().unwrap();
            assert_eq!(child.data.len(), 1);
            assert_eq!(child.data[0].probability, 1.0);
        }
    }

    #[test]
    fn marginal_of_deeper_column() {
        let t = CategoricalTable::from_rows(
            &["A", "B"],
            vec![vec![1, 1], vec![1, 2], vec![2, 2], vec![2, 2]],
        )
        .unwrap();
        let tree = ProbabilityTree::build(&t).unwrap();
        let m = tree.marginal(1).unwrap();
        assert!((m[&1.into()] - 0.25).abs() < 1e-12);
        assert!((m[&2.into()] - 0.75).abs() < 1e-12);
        assert!(tree.marginal(2).is_none());
        assert_eq!(tree.column_kind(1), Some(ValueKind::Int));
    }

    #[test]
    fn from_parts_rejects_broken_nodes() {
        let tree = ProbabilityTree::build(&example_table()).unwrap();
        let mut root = tree.root().clone();
        root.data[0].probability = 0.1;
        let err = ProbabilityTree::from_parts(tree.columns().to_vec(), root, 3).unwrap_err();
        assert!(matches!(err, TreeError::InvariantViolation(_)));

        let mut root = tree.root().clone();
        root.data.swap(0, 2);
        assert!(ProbabilityTree::from_parts(tree.columns().to_vec(), root, 3).is_err());

        let mut root = tree.root().clone();
        root.data[0].next = None;
        assert!(ProbabilityTree::from_parts(tree.columns().to_vec(), root, 3).is_err());

        let ok = ProbabilityTree::from_parts(tree.columns().to_vec(), tree.root().clone(), 3).unwrap();
        assert_eq!(ok, tree);
    }
}
