//! Monte Carlo convergence of generated first-column frequencies.
//!
//! cargo run --release --example convergence

use std::sync::Arc;

use probtree::{convergence_study, CategoricalTable, ProbabilityTree};

fn main() {
    let counts = [52i64, 131, 224, 178, 87];
    let rows: Vec<Vec<i64>> = counts
        .iter()
        .enumerate()
        .flat_map(|(v, &c)| (0..c).map(move |i| vec![v as i64 + 1, 1 + (i * i) % 5]))
        .collect();
    let table = CategoricalTable::from_rows(&["P1.1", "P1.2"], rows).unwrap();
    let tree = Arc::new(ProbabilityTree::build(&table).unwrap());

    let report = convergence_study(&tree, 0, &[100, 1_000, 10_000, 100_000, 1_000_000], 20, 7).unwrap();
    print!("{}", report.to_csv());
    match report.fitted_slope {
        Some(s) => eprintln!("fitted log-log slope {s:.3} (1/sqrt(n) scaling gives -0.5)"),
        None => eprintln!("slope undefined"),
    }
}
