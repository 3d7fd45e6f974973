//! Cases of possibly-missing discrete observations.
//!
//! On disk a dataset is a CSV file with a header row of node names and one
//! row per case holding 0-based state indices; missing entries are `?`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::Structure;

/// A single entry: a state index or `None` when missing.
pub type Observation = Option<usize>;

pub const MISSING: &str = "?";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    cases: Vec<Vec<Observation>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, cases: Vec<Vec<Observation>>) -> Result<Self> {
        for (d, case) in cases.iter().enumerate() {
            if case.len() != names.len() {
                return Err(Error::Format(format!(
                    "case {d} has {} entries, header has {}",
                    case.len(),
                    names.len()
                )));
            }
        }
        Ok(Dataset { names, cases })
    }

    pub(crate) fn from_cases_unchecked(names: Vec<String>, cases: Vec<Vec<Observation>>) -> Self {
        Dataset { names, cases }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cases(&self) -> &[Vec<Observation>] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.cases.iter().all(|c| c.iter().all(Option::is_some))
    }

    /// Checks the header matches the structure in order and every entry is in range.
    pub fn check_aligned(&self, structure: &Structure) -> Result<()> {
        if !self.names.iter().map(String::as_str).eq(structure.names()) {
            return Err(Error::DatasetMismatch(format!(
                "header {:?} does not match node order {:?}",
                self.names,
                structure.names().collect::<Vec<_>>()
            )));
        }
        for case in &self.cases {
            structure.check_case(case)?;
        }
        Ok(())
    }

    /// Reorders columns to follow the structure's node order (matched by name).
    pub fn aligned_to(&self, structure: &Structure) -> Result<Dataset> {
        let perm = structure
            .names()
            .map(|name| {
                self.names.iter().position(|n| n == name).ok_or_else(|| {
                    Error::DatasetMismatch(format!("dataset has no column `{name}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let out = Dataset {
            names: structure.names().map(String::from).collect(),
            cases: self
                .cases
                .iter()
                .map(|c| perm.iter().map(|&p| c[p]).collect())
                .collect(),
        };
        for case in &out.cases {
            structure.check_case(case)?;
        }
        Ok(out)
    }

    /// Distinct cases with their multiplicities, in sorted case order.
    pub fn distinct_cases(&self) -> Vec<(Vec<Observation>, usize)> {
        let mut counts: std::collections::BTreeMap<&[Observation], usize> = Default::default();
        for case in &self.cases {
            *counts.entry(case.as_slice()).or_default() += 1;
        }
        counts.into_iter().map(|(c, n)| (c.to_vec(), n)).collect()
    }

    /// Copy with each listed entry `(case, column)` replaced by missing.
    pub fn with_missing(&self, entries: &[(usize, usize)]) -> Dataset {
        let mut out = self.clone();
        for &(d, c) in entries {
            out.cases[d][c] = None;
        }
        out
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let mut cases = Vec::new();
        for (d, record) in rdr.records().enumerate() {
            let record = record?;
            let case = record
                .iter()
                .map(|field| {
                    let field = field.trim();
                    if field == MISSING {
                        Ok(None)
                    } else {
                        field.parse::<usize>().map(Some).map_err(|_| {
                            Error::Format(format!("case {d}: `{field}` is not a state index"))
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            cases.push(case);
        }
        Dataset::new(names, cases)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.names)?;
        for case in &self.cases {
            wtr.write_record(case.iter().map(|o| match o {
                Some(s) => s.to_string(),
                None => MISSING.to_string(),
            }))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NodeSpec;

    #[test]
    fn csv_round_trip_with_missing() {
        let data = Dataset::new(
            vec!["A".into(), "B".into()],
            vec![vec![Some(0), None], vec![Some(2), Some(1)]],
        )
        .unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "A,B\n0,?\n2,1\n");
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), data);
    }

    #[test]
    fn distinct_cases_count_multiplicities() {
        let data = Dataset::new(
            vec!["A".into()],
            vec![vec![Some(1)], vec![None], vec![Some(1)], vec![Some(0)]],
        )
        .unwrap();
        assert_eq!(
            data.distinct_cases(),
            vec![(vec![None], 1), (vec![Some(0)], 1), (vec![Some(1)], 2)]
        );
    }

    #[test]
    fn rejects_garbage_and_ragged_rows() {
        assert!(Dataset::read_csv("A,B\n0,x\n".as_bytes()).is_err());
        assert!(Dataset::new(vec!["A".into()], vec![vec![Some(0), Some(1)]]).is_err());
    }

    #[test]
    fn align_reorders_columns_and_checks_range() {
        let s = Structure::new(vec![NodeSpec::new("A", 2, vec![]), NodeSpec::new("B", 3, vec![])])
            .unwrap();
        let data = Dataset::new(vec!["B".into(), "A".into()], vec![vec![Some(2), Some(1)]]).unwrap();
        let aligned = data.aligned_to(&s).unwrap();
        assert_eq!(aligned.cases()[0], vec![Some(1), Some(2)]);
        assert!(data.check_aligned(&s).is_err());
        let bad = Dataset::new(vec!["A".into(), "B".into()], vec![vec![Some(2), Some(0)]]).unwrap();
        assert!(matches!(bad.aligned_to(&s), Err(Error::StateOutOfRange { .. })));
    }
}
