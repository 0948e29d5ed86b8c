//! Generate synthetic records and compare their frequencies with the source.
//!
//! cargo run --example generate_records -- 1000 42

use probtree::stats::FrequencyTable;
use probtree::{export, frequency_diff, l1_error, CategoricalTable, Generator, ProbabilityTree};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);

    let rows: Vec<Vec<i64>> = (0..672)
        .map(|i: i64| {
            let answer = 1 + (i * i % 17) % 5;
            vec![answer, 1 + (answer + i % 3) % 5]
        })
        .collect();
    let table = CategoricalTable::from_rows(&["P1.1", "P1.2"], rows).unwrap();
    let tree = ProbabilityTree::build(&table).unwrap();

    let mut generator = Generator::new(tree, seed);
    let generated = generator.get_records(n).unwrap();

    for column in 0..table.n_columns() {
        let data = FrequencyTable::of_column(&table, column).unwrap();
        let synth = FrequencyTable::of_column(&generated, column).unwrap();
        println!("column {}: L1 error {:.4}", data.column, l1_error(&data, &synth).unwrap());
        for (value, diff) in frequency_diff(&data, &synth).unwrap() {
            println!("  {value}: data {:.4} generated {:.4} diff {diff:+.4}", data.get(&value), synth.get(&value));
        }
    }

    println!("\nfirst generated rows:");
    for line in export::to_csv_string(&generated).lines().take(6) {
        println!("  {line}");
    }
}
