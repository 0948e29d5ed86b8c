#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use probtree::{CategoricalTable, CategoricalValue, Record};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

pub fn example_table() -> CategoricalTable {
    CategoricalTable::from_rows(
        &["P1.1", "P1.2", "P1.3"],
        vec![vec![1, 2, 3], vec![5, 4, 4], vec![2, 2, 2]],
    )
    .unwrap()
}

/// Row counts of first-column values 1..=5 in the two-column stand-in for
/// the unpublished 672-record survey table. Chosen once, frozen here.
pub const FIXTURE_COUNTS: [usize; 5] = [52, 131, 224, 178, 87];

/// Two integer columns, 672 rows, first column distributed per
/// [`FIXTURE_COUNTS`], second column depending on the first.
pub fn fixture_table() -> CategoricalTable {
    let mut rows = Vec::new();
    for (v, &count) in (1i64..).zip(FIXTURE_COUNTS.iter()) {
        for i in 0..count as i64 {
            let second = 1 + (i * i + 3 * v) % 5;
            rows.push(vec![v, second]);
        }
    }
    CategoricalTable::from_rows(&["P1.1", "P1.2"], rows).unwrap()
}

pub fn ints(v: &[i64]) -> Record {
    v.iter().map(|&x| x.into()).collect()
}

/// Random integer table with the given shape ranges.
pub fn random_table(rng: &mut ChaCha8Rng, cols: (usize, usize), values: (i64, i64), rows: (usize, usize)) -> CategoricalTable {
    let n_cols = rng.random_range(cols.0..=cols.1);
    let cardinality: Vec<i64> = (0..n_cols).map(|_| rng.random_range(values.0..=values.1)).collect();
    let n_rows = rng.random_range(rows.0..=rows.1);
    let rows = (0..n_rows)
        .map(|_| cardinality.iter().map(|&k| rng.random_range(1..=k)).collect::<Vec<i64>>())
        .collect();
    let names: Vec<String> = (0..n_cols).map(|i| format!("c{i}")).collect();
    CategoricalTable::from_rows(&names, rows).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Occurrence count of every distinct row, computed by brute force.
pub fn row_counts(table: &CategoricalTable) -> HashMap<Record, usize> {
    let mut counts = HashMap::new();
    for row in table.rows() {
        *counts.entry(row.clone()).or_insert(0) += 1;
    }
    counts
}

/// Relative frequency of each value in one column, by brute force.
pub fn column_frequencies(table: &CategoricalTable, index: usize) -> BTreeMap<CategoricalValue, f64> {
    let mut counts: BTreeMap<CategoricalValue, usize> = BTreeMap::new();
    for row in table.rows() {
        *counts.entry(row[index].clone()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(v, c)| (v, c as f64 / table.n_rows() as f64))
        .collect()
}

/// Wraps a stream and counts 64-bit draws.
#[derive(Debug, Clone)]
pub struct CountingRng<R> {
    pub inner: R,
    pub draws: usize,
}

impl<R: RngCore> RngCore for CountingRng<R> {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(dst)
    }
}

/// A parsed DOT digraph: vertex id to label, and labelled edges.
#[derive(Debug, Default)]
pub struct DotGraph {
    pub vertices: BTreeMap<String, String>,
    pub edges: Vec<(String, String, String)>,
}

impl DotGraph {
    /// Number of weakly-connected components, by union-find.
    pub fn weak_components(&self) -> usize {
        let ids: Vec<&String> = self.vertices.keys().collect();
        let index: HashMap<&String, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b, _) in &self.edges {
            let ra = find(&mut parent, index[a]);
            let rb = find(&mut parent, index[b]);
            parent[ra] = rb;
        }
        (0..ids.len()).filter(|&i| find(&mut parent, i) == i).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Str(String),
    Arrow,
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '{' | '}' | '[' | ']' | '=' | ';' | ',' => {
                toks.push(Tok::Punct(c));
                chars.next();
            }
            '-' => {
                chars.next();
                if chars.next() != Some('>') {
                    return Err("expected '->'".into());
                }
                toks.push(Tok::Arrow);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('n') => s.push('\n'),
                            Some(e) => s.push(e),
                            None => return Err("dangling escape".into()),
                        },
                        Some(ch) => s.push(ch),
                        None => return Err("unterminated string".into()),
                    }
                }
                toks.push(Tok::Str(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_alphanumeric() || ch == '_' || ch == '.' {
                        s.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Id(s));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(toks)
}

/// Parses the subset of DOT used for trees: one `digraph` with node and edge
/// statements carrying `[label="..."]` attribute lists.
pub fn parse_dot(text: &str) -> Result<DotGraph, String> {
    let toks = tokenize(text)?;
    let mut pos = 0;
    let next = |pos: &mut usize| -> Result<Tok, String> {
        let t = toks.get(*pos).cloned().ok_or("unexpected end of input")?;
        *pos += 1;
        Ok(t)
    };
    if next(&mut pos)? != Tok::Id("digraph".into()) {
        return Err("expected 'digraph'".into());
    }
    let mut t = next(&mut pos)?;
    if let Tok::Id(_) | Tok::Str(_) = t {
        t = next(&mut pos)?;
    }
    if t != Tok::Punct('{') {
        return Err("expected '{'".into());
    }
    let mut graph = DotGraph::default();
    loop {
        let head = match next(&mut pos)? {
            Tok::Punct('}') => break,
            Tok::Id(id) | Tok::Str(id) => id,
            other => return Err(format!("expected statement, found {other:?}")),
        };
        let mut chain = vec![head];
        while toks.get(pos) == Some(&Tok::Arrow) {
            pos += 1;
            match next(&mut pos)? {
                Tok::Id(id) | Tok::Str(id) => chain.push(id),
                other => return Err(format!("expected edge target, found {other:?}")),
            }
        }
        let mut attrs = BTreeMap::new();
        if toks.get(pos) == Some(&Tok::Punct('[')) {
            pos += 1;
            loop {
                match next(&mut pos)? {
                    Tok::Punct(']') => break,
                    Tok::Punct(',') | Tok::Punct(';') => continue,
                    Tok::Id(key) => {
                        if next(&mut pos)? != Tok::Punct('=') {
                            return Err("expected '=' in attribute".into());
                        }
                        let value = match next(&mut pos)? {
                            Tok::Id(v) | Tok::Str(v) => v,
                            other => return Err(format!("bad attribute value {other:?}")),
                        };
                        attrs.insert(key, value);
                    }
                    other => return Err(format!("bad attribute list token {other:?}")),
                }
            }
        }
        if toks.get(pos) == Some(&Tok::Punct(';')) {
            pos += 1;
        }
        let label = attrs.get("label").cloned().unwrap_or_default();
        if chain.len() == 1 {
            graph.vertices.insert(chain.pop().unwrap(), label);
        } else {
            for w in chain.windows(2) {
                for id in w {
                    graph.vertices.entry(id.clone()).or_insert_with(|| id.clone());
                }
                graph.edges.push((w[0].clone(), w[1].clone(), label.clone()));
            }
        }
    }
    if pos != toks.len() {
        return Err("trailing tokens after graph".into());
    }
    Ok(graph)
}
