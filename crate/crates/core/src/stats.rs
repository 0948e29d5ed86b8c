//! Frequency tables, L1 fidelity error and the Monte Carlo convergence study.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::sampler::{Generator, RNG_ALGORITHM};
use crate::table::{CategoricalTable, CategoricalValue};
use crate::tree::ProbabilityTree;

/// Expected log-log slope of Monte Carlo frequency error against sample size.
pub const EXPECTED_SLOPE: f64 = -0.5;
/// Accepted deviation from [`EXPECTED_SLOPE`].
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("cannot build a frequency table from no values")]
    EmptyInput,
    #[error("frequency tables describe different columns ({left:?} vs {right:?})")]
    ColumnMismatch { left: String, right: String },
    #[error("invalid sizes: {0}")]
    InvalidSizes(String),
    #[error("trials must be at least 1")]
    InvalidTrials,
    #[error("column index {index} out of range for a tree with {depth} columns")]
    InvalidColumn { index: usize, depth: usize },
}

/// Relative frequencies of the distinct values of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub column: String,
    pub freqs: BTreeMap<CategoricalValue, f64>,
    pub total: usize,
}

impl FrequencyTable {
    pub fn get(&self, value: &CategoricalValue) -> f64 {
        self.freqs.get(value).copied().unwrap_or(0.0)
    }

    /// Frequencies of column `index` of `table`.
    pub fn of_column(table: &CategoricalTable, index: usize) -> Result<Self, StatsError> {
        if index >= table.n_columns() {
            return Err(StatsError::InvalidColumn {
                index,
                depth: table.n_columns(),
            });
        }
        frequency_table(&table.columns()[index], &table.column_values(index))
    }

    fn from_counts<'a>(
        column: &str,
        counts: impl IntoIterator<Item = (&'a CategoricalValue, usize)>,
        total: usize,
    ) -> Self {
        let freqs = counts
            .into_iter()
            .map(|(v, c)| (v.clone(), c as f64 / total as f64))
            .collect();
        FrequencyTable {
            column: column.to_string(),
            freqs,
            total,
        }
    }
}

pub fn frequency_table(column: &str, values: &[CategoricalValue]) -> Result<FrequencyTable, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut counts: BTreeMap<&CategoricalValue, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    Ok(FrequencyTable::from_counts(column, counts, values.len()))
}

/// The tree's exact marginal for one column. `total` is the source row count.
pub fn exact_marginal(tree: &ProbabilityTree, column_index: usize) -> Result<FrequencyTable, StatsError> {
    let freqs = tree.marginal(column_index).ok_or(StatsError::InvalidColumn {
        index: column_index,
        depth: tree.depth(),
    })?;
    Ok(FrequencyTable {
        column: tree.columns()[column_index].clone(),
        freqs,
        total: tree.source_rows().max(1),
    })
}

fn same_column(f: &FrequencyTable, g: &FrequencyTable) -> Result<(), StatsError> {
    if f.column != g.column {
        return Err(StatsError::ColumnMismatch {
            left: f.column.clone(),
            right: g.column.clone(),
        });
    }
    Ok(())
}

/// Signed differences `f[v] - g[v]` over the union of both key sets.
pub fn frequency_diff(
    f: &FrequencyTable,
    g: &FrequencyTable,
) -> Result<BTreeMap<CategoricalValue, f64>, StatsError> {
    same_column(f, g)?;
    let keys = f.freqs.keys().chain(g.freqs.keys());
    Ok(keys.map(|k| (k.clone(), f.get(k) - g.get(k))).collect())
}

/// Sum of absolute frequency differences, absent keys counting as zero.
pub fn l1_error(f: &FrequencyTable, g: &FrequencyTable) -> Result<f64, StatsError> {
    Ok(frequency_diff(f, g)?.values().map(|d| d.abs()).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub column: String,
    pub column_index: usize,
    pub sizes: Vec<usize>,
    /// Mean L1 error over all trials at each size.
    pub errors: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Least-squares slope of `log10(error)` on `log10(n)`. `None` with fewer
    /// than three sizes or when any mean error is zero.
    pub fitted_slope: Option<f64>,
    pub rng_algorithm: String,
}

impl ConvergenceReport {
    pub fn slope_within_band(&self) -> bool {
        self.fitted_slope
            .is_some_and(|s| (s - EXPECTED_SLOPE).abs() <= SLOPE_TOLERANCE)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Two columns, `n` and `mean_error`, one row per size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mean_error\n");
        for (n, e) in self.sizes.iter().zip(&self.errors) {
            out.push_str(&format!("{n},{e:e}\n"));
        }
        out
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Measures how fast generated frequencies of one column approach the tree's
/// exact marginal.
///
/// Trial `t` at every size uses seed `seed + t`. Trials run in parallel; the
/// report is identical to a sequential run.
pub fn convergence_study(
    tree: &Arc<ProbabilityTree>,
    column_index: usize,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConvergenceReport, StatsError> {
    let exact = exact_marginal(tree, column_index)?;
    if sizes.is_empty() {
        return Err(StatsError::InvalidSizes("no sizes given".into()));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < 10) {
        return Err(StatsError::InvalidSizes(format!("size {n} is below the minimum of 10")));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(StatsError::InvalidSizes("sizes must be strictly increasing".into()));
    }
    if trials == 0 {
        return Err(StatsError::InvalidTrials);
    }

    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let per_trial: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let generated = sample_column(tree, column_index, n, seed.wrapping_add(t as u64));
                l1_error(&generated, &exact).expect("same column")
            })
            .collect();
        errors.push(per_trial.iter().sum::<f64>() / trials as f64);
    }

    let fitted_slope = if sizes.len() >= 3 && errors.iter().all(|&e| e > 0.0) {
        let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).log10()).collect();
        let y: Vec<f64> = errors.iter().map(|e| e.log10()).collect();
        Some(least_squares_slope(&x, &y))
    } else {
        None
    };

    Ok(ConvergenceReport {
        column: exact.column,
        column_index,
        sizes: sizes.to_vec(),
        errors,
        trials,
        seed,
        fitted_slope,
        rng_algorithm: RNG_ALGORITHM.to_string(),
    })
}

/// Frequencies of one column over `n` freshly generated records.
fn sample_column(tree: &Arc<ProbabilityTree>, column_index: usize, n: usize, seed: u64) -> FrequencyTable {
    let mut generator = Generator::new(tree.clone(), seed);
    let mut counts: HashMap<CategoricalValue, usize> = HashMap::new();
    let mut record = Vec::with_capacity(tree.depth());
    for _ in 0..n {
        generator.fill_record(&mut record);
        let value = &record[column_index];
        match counts.get_mut(value) {
            Some(c) => *c += 1,
            None => {
                counts.insert(value.clone(), 1);
            }
        }
    }
    FrequencyTable::from_counts(&tree.columns()[column_index], counts.iter().map(|(v, &c)| (v, c)), n)
}
