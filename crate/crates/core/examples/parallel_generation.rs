//! Several generators over one shared tree, one per thread.
//!
//! Each thread's stream is reproducible from its seed. The concatenated
//! output has the right statistics but is not the same as one long stream.
//!
//! cargo run --example parallel_generation

use std::sync::Arc;
use std::thread;

use probtree::{CategoricalTable, Generator, ProbabilityTree};

fn main() {
    let table = CategoricalTable::from_rows(
        &["region", "plan"],
        vec![
            vec!["north", "basic"],
            vec!["north", "pro"],
            vec!["south", "basic"],
            vec!["south", "basic"],
            vec!["east", "pro"],
        ],
    )
    .unwrap();
    let tree = Arc::new(ProbabilityTree::build(&table).unwrap());

    let workers: Vec<_> = (0..4u64)
        .map(|seed| {
            let tree = Arc::clone(&tree);
            thread::spawn(move || Generator::new(tree, seed).get_records(25_000).unwrap())
        })
        .collect();

    let mut total = 0;
    let mut pro = 0;
    for handle in workers {
        let part = handle.join().unwrap();
        total += part.n_rows();
        pro += part.rows().iter().filter(|r| r[1] == "pro".into()).count();
    }
    println!("{total} records, share of 'pro' = {:.4} (source: 0.4)", pro as f64 / total as f64);
}
