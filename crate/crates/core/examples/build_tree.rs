//! Build a probability tree from a small table and query it.
//!
//! cargo run --example build_tree

use probtree::{CategoricalTable, ProbabilityTree};

fn main() {
    let table = CategoricalTable::from_rows(
        &["P1.1", "P1.2", "P1.3"],
        vec![vec![1, 2, 3], vec![5, 4, 4], vec![2, 2, 2], vec![1, 2, 2]],
    )
    .expect("well-formed table");
    let tree = ProbabilityTree::build(&table).expect("non-empty table");

    println!("columns: {:?}", tree.columns());
    println!("depth {}, {} data nodes\n", tree.depth(), tree.node_count());
    print!("{}", tree.print_tree());

    let (record, probabilities) = tree.max_record();
    println!("\ngreedy max record: {record:?} with per-level probabilities {probabilities:?}");

    for probe in [vec![1, 2], vec![1, 4], vec![1, 2, 3]] {
        let probe: Vec<_> = probe.into_iter().map(Into::into).collect();
        println!(
            "{probe:?}: contained={} p={}",
            tree.oracle(&probe).unwrap(),
            tree.record_probability(&probe).unwrap()
        );
    }
}
