//! Emit the tree as a DOT graph and list its per-value components.
//!
//! cargo run --example draw_graph > tree.dot && dot -Tsvg tree.dot -o tree.svg

use probtree::{connected_components, to_dot, CategoricalTable, ProbabilityTree};

fn main() {
    let table = CategoricalTable::from_rows(
        &["P1.1", "P1.2", "P1.3"],
        vec![vec![1, 2, 3], vec![5, 4, 4], vec![2, 2, 2], vec![1, 3, 3]],
    )
    .unwrap();
    let tree = ProbabilityTree::build(&table).unwrap();

    print!("{}", to_dot(&tree, false));

    for (value, edges) in connected_components(&tree) {
        eprintln!("component P1.1={value}: {} edges", edges.len());
        for e in edges {
            eprintln!("  {} -> {} ({:.3})", e.from_label, e.to_label, e.probability);
        }
    }
}
