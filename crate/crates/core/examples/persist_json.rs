//! Save a tree as JSON and load it back.
//!
//! cargo run --example persist_json

use probtree::{from_json, to_json, CategoricalTable, ProbabilityTree};

fn main() {
    let table = CategoricalTable::from_rows(
        &["colour", "size"],
        vec![vec!["red", "S"], vec!["red", "M"], vec!["blue", "M"], vec!["red", "S"]],
    )
    .unwrap();
    let tree = ProbabilityTree::build(&table).unwrap();

    let json = to_json(&tree);
    print!("{json}");

    let restored = from_json(&json).expect("document we just wrote");
    assert_eq!(restored, tree);
    assert_eq!(restored.print_tree(), tree.print_tree());
    eprintln!("round trip ok: {} nodes", restored.node_count());

    let tampered = json.replacen("7.5000000000000000e-1", "7.0000000000000000e-1", 1);
    eprintln!("tampered document: {}", from_json(&tampered).unwrap_err());
}
