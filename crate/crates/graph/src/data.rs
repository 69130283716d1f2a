//! Categorical datasets read from and written to CSV.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::GraphError;
use htsim_core::rng::substream;

/// Columns of categorical values. Each column keeps its sorted label set and
/// rows store label indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDataset {
    names: Vec<String>,
    labels: Vec<Vec<String>>,
    rows: Vec<u16>,
    n_rows: usize,
}

impl DiscreteDataset {
    /// Build from string records; labels are collected per column and sorted.
    pub fn from_records(names: Vec<String>, records: &[Vec<String>]) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(GraphError::Dataset("empty column name".into()));
            }
            if !seen.insert(n.as_str()) {
                return Err(GraphError::Dataset(format!("duplicate column `{n}`")));
            }
        }
        if records.is_empty() {
            return Err(GraphError::Dataset("no rows".into()));
        }
        let m = names.len();
        let mut sets: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); m];
        for (i, r) in records.iter().enumerate() {
            if r.len() != m {
                return Err(GraphError::Dataset(format!(
                    "row {} has {} fields, expected {m}",
                    i + 1,
                    r.len()
                )));
            }
            for (j, v) in r.iter().enumerate() {
                sets[j].insert(v.as_str());
            }
        }
        let labels: Vec<Vec<String>> = sets
            .into_iter()
            .map(|s| s.into_iter().map(str::to_string).collect())
            .collect();
        for (j, l) in labels.iter().enumerate() {
            if l.len() > u16::MAX as usize {
                return Err(GraphError::Dataset(format!("column `{}` has too many levels", names[j])));
            }
        }
        let mut rows = Vec::with_capacity(records.len() * m);
        for r in records {
            for (j, v) in r.iter().enumerate() {
                let k = labels[j].binary_search(v).expect("label collected above");
                rows.push(k as u16);
            }
        }
        Ok(DiscreteDataset { names, labels, rows, n_rows: records.len() })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, GraphError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if names.is_empty() {
            return Err(GraphError::Dataset("no columns".into()));
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            records.push(rec.iter().map(|s| s.trim().to_string()).collect());
        }
        Self::from_records(names, &records)
    }

    pub fn from_path(path: &Path) -> Result<Self, GraphError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), GraphError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for i in 0..self.n_rows {
            w.write_record(self.row(i).iter().enumerate().map(|(j, &k)| &self.labels[j][k as usize]))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_path(&self, path: &Path) -> Result<(), GraphError> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn labels(&self, col: usize) -> &[String] {
        &self.labels[col]
    }

    pub fn cardinality(&self, col: usize) -> usize {
        self.labels[col].len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize, GraphError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| GraphError::Dataset(format!("no column `{name}`")))
    }

    pub fn row(&self, i: usize) -> &[u16] {
        let m = self.n_cols();
        &self.rows[i * m..(i + 1) * m]
    }

    pub fn value(&self, row: usize, col: usize) -> u16 {
        self.rows[row * self.n_cols() + col]
    }

    pub fn label(&self, row: usize, col: usize) -> &str {
        &self.labels[col][self.value(row, col) as usize]
    }

    /// Keep the given columns, in the given order.
    pub fn select(&self, columns: &[&str]) -> Result<Self, GraphError> {
        let idx: Vec<usize> = columns.iter().map(|c| self.column_index(c)).collect::<Result<_, _>>()?;
        let mut seen = BTreeSet::new();
        for c in columns {
            if !seen.insert(*c) {
                return Err(GraphError::Dataset(format!("column `{c}` selected twice")));
            }
        }
        let mut rows = Vec::with_capacity(self.n_rows * idx.len());
        for i in 0..self.n_rows {
            let r = self.row(i);
            rows.extend(idx.iter().map(|&j| r[j]));
        }
        Ok(DiscreteDataset {
            names: idx.iter().map(|&j| self.names[j].clone()).collect(),
            labels: idx.iter().map(|&j| self.labels[j].clone()).collect(),
            rows,
            n_rows: self.n_rows,
        })
    }

    /// Columns sorted by name.
    pub fn canonical(&self) -> Self {
        let mut names: Vec<&str> = self.names.iter().map(String::as_str).collect();
        names.sort_unstable();
        self.select(&names).expect("names come from this dataset")
    }

    fn take_rows(&self, idx: &[usize]) -> Self {
        let mut rows = Vec::with_capacity(idx.len() * self.n_cols());
        for &i in idx {
            rows.extend_from_slice(self.row(i));
        }
        DiscreteDataset {
            names: self.names.clone(),
            labels: self.labels.clone(),
            rows,
            n_rows: idx.len(),
        }
    }

    /// Random train/test split; the train part holds `round(n * fraction)` rows.
    /// Both parts keep the full label sets.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Self, Self), GraphError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(GraphError::Fraction(fraction));
        }
        let mut idx: Vec<usize> = (0..self.n_rows).collect();
        idx.shuffle(&mut substream(seed, 0));
        let k = (self.n_rows as f64 * fraction).round() as usize;
        if k == 0 || k == self.n_rows {
            return Err(GraphError::Dataset(format!(
                "split of {} rows at {fraction} leaves an empty part",
                self.n_rows
            )));
        }
        let (train, test) = idx.split_at(k);
        let mut train = train.to_vec();
        let mut test = test.to_vec();
        train.sort_unstable();
        test.sort_unstable();
        Ok((self.take_rows(&train), self.take_rows(&test)))
    }
}
