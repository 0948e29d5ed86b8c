//! Load CSV with a missing-value policy and equal-width binning of a numeric column.
//!
//! cargo run --example ingest_csv

use probtree::ingest::read_csv_from_str;
use probtree::{IngestOptions, MissingPolicy, ProbabilityTree};

const DATA: &str = "\
age,smoker,answer
23,no,agree
35,yes,disagree
41,no,agree
58,,agree
67,yes,neutral
29,no,agree
";

fn main() {
    let mut opts = IngestOptions {
        missing_policy: MissingPolicy::DropRow,
        ..Default::default()
    };
    opts.bin_spec.insert("age".into(), 3);

    let table = read_csv_from_str(DATA, &opts).expect("valid CSV");
    println!("{} rows kept after dropping incomplete ones", table.n_rows());
    for row in table.rows() {
        println!("  {row:?}");
    }

    let tree = ProbabilityTree::build(&table).unwrap();
    print!("\n{}", tree.print_tree());

    let strict = read_csv_from_str(DATA, &IngestOptions::default());
    println!("\nwith the default policy: {}", strict.unwrap_err());
}
