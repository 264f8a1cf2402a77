use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::numeric::fmt_sig17;

/// One labelled comparison. `y == true` means the first action was preferred.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceRecord {
    pub x: Vec<f64>,
    pub a1: usize,
    pub a2: usize,
    pub y: bool,
}

/// Ordered preference records over a fixed context dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreferenceDataset {
    k: usize,
    records: Vec<PreferenceRecord>,
}

impl PreferenceDataset {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            records: Vec::new(),
        }
    }

    pub fn from_records(k: usize, records: Vec<PreferenceRecord>) -> Result<Self> {
        let mut ds = Self::new(k);
        for r in records {
            ds.push(r)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, record: PreferenceRecord) -> Result<()> {
        if record.x.len() != self.k {
            return Err(Error::DimensionMismatch {
                what: "record context",
                expected: self.k,
                actual: record.x.len(),
            });
        }
        self.records.push(record);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn records(&self) -> &[PreferenceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Fails if any record names an action outside `0..n_actions`.
    pub fn check_actions(&self, n_actions: usize) -> Result<()> {
        for r in &self.records {
            let bad = if r.a1 >= n_actions { r.a1 } else { r.a2 };
            if r.a1 >= n_actions || r.a2 >= n_actions {
                return Err(Error::InvalidArgument(format!(
                    "action index {bad} out of range for {n_actions} actions"
                )));
            }
        }
        Ok(())
    }

    /// Header `x0,..,x{k-1},a1_idx,a2_idx,y`, then one record per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header: Vec<String> = (0..self.k).map(|i| format!("x{i}")).collect();
        header.extend(["a1_idx".into(), "a2_idx".into(), "y".into()]);
        writeln!(out, "{}", header.join(","))?;
        for r in &self.records {
            let mut fields: Vec<String> = r.x.iter().map(|v| fmt_sig17(*v)).collect();
            fields.push(r.a1.to_string());
            fields.push(r.a2.to_string());
            fields.push(if r.y { "1" } else { "0" }.into());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::MalformedDataset {
            line: 1,
            message: "missing header".into(),
        })?;
        let header = header?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 4 || cols[cols.len() - 3..] != ["a1_idx", "a2_idx", "y"] {
            return Err(Error::MalformedDataset {
                line: 1,
                message: format!("unexpected header '{header}'"),
            });
        }
        let k = cols.len() - 3;
        for (i, c) in cols[..k].iter().enumerate() {
            if *c != format!("x{i}") {
                return Err(Error::MalformedDataset {
                    line: 1,
                    message: format!("expected column x{i}, found '{c}'"),
                });
            }
        }
        let mut ds = Self::new(k);
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            let bad = |message: String| Error::MalformedDataset {
                line: lineno,
                message,
            };
            if fields.len() != k + 3 {
                return Err(bad(format!("expected {} fields, found {}", k + 3, fields.len())));
            }
            let x = fields[..k]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("bad real '{f}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let idx_field = |f: &str| {
                f.parse::<usize>()
                    .map_err(|e| bad(format!("bad action index '{f}': {e}")))
            };
            let a1 = idx_field(fields[k])?;
            let a2 = idx_field(fields[k + 1])?;
            let y = match fields[k + 2] {
                "1" => true,
                "0" => false,
                other => return Err(bad(format!("label must be 0 or 1, found '{other}'"))),
            };
            ds.records.push(PreferenceRecord { x, a1, a2, y });
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_dimension() {
        let mut ds = PreferenceDataset::new(2);
        let r = PreferenceRecord {
            x: vec![0.1],
            a1: 0,
            a2: 1,
            y: true,
        };
        assert!(ds.push(r).is_err());
    }

    #[test]
    fn header_and_label_errors_carry_line_numbers() {
        let text = "x0,x1,a1_idx,a2_idx,y\n0.1,0.2,0,1,1\n0.3,0.4,1,0,2\n";
        match PreferenceDataset::read_csv(text.as_bytes()) {
            Err(Error::MalformedDataset { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "x0,x1,a,b,y\n";
        assert!(matches!(
            PreferenceDataset::read_csv(text.as_bytes()),
            Err(Error::MalformedDataset { line: 1, .. })
        ));
    }

    #[test]
    fn writes_seventeen_significant_digits() {
        let ds = PreferenceDataset::from_records(
            1,
            vec![PreferenceRecord {
                x: vec![1.0 / 3.0],
                a1: 2,
                a2: 0,
                y: false,
            }],
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x0,a1_idx,a2_idx,y\n0.33333333333333331,2,0,0\n"
        );
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            rows in proptest::collection::vec(
                (proptest::collection::vec(-1e6f64..1e6, 3), 0usize..10, 0usize..10, any::<bool>()),
                0..20,
            )
        ) {
            let records = rows
                .into_iter()
                .map(|(x, a1, a2, y)| PreferenceRecord { x, a1, a2, y })
                .collect();
            let ds = PreferenceDataset::from_records(3, records).unwrap();
            let mut buf = Vec::new();
            ds.write_csv(&mut buf).unwrap();
            let back = PreferenceDataset::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
