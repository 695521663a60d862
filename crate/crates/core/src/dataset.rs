//! Typed observational data tables.
//!
//! A [`DataTable`] is a set of equal-length columns, one of which is the
//! designated outcome. Every column carries a [`ColumnKind`]; categorical
//! values are stored as level indices so that all columns share a numeric
//! representation. Tables are immutable once built: every transformation
//! returns a new table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("outcome column `{0}` not found")]
    UnknownOutcomeColumn(String),
    #[error("cannot parse `{value}` as a number at row {row}, column `{column}`")]
    UnparseableNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("value `{value}` at row {row}, column `{column}` is not 0 or 1")]
    NotBinary {
        row: usize,
        column: String,
        value: String,
    },
    #[error("column `{0}` is not continuous")]
    NotContinuous(String),
    #[error("generated column name `{0}` collides with an existing column")]
    NameCollision(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column `{column}` has {found} values, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("a table needs at least one row and one column")]
    Empty,
    #[error("invalid column `{column}`: {reason}")]
    InvalidColumn { column: String, reason: String },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid value for feature `{feature}`: {reason}")]
    InvalidInstance { feature: String, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Value type of a column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnKind {
    Binary,
    Continuous,
    /// Levels are kept sorted; values hold the level index.
    Categorical { levels: Vec<String> },
}

impl ColumnKind {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, ColumnKind::Continuous)
    }

    /// Number of distinct values for discrete kinds.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            ColumnKind::Binary => Some(2),
            ColumnKind::Continuous => None,
            ColumnKind::Categorical { levels } => Some(levels.len()),
        }
    }
}

/// Per-column override used when loading CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindHint {
    Binary,
    Continuous,
    Categorical,
}

pub type SchemaHint = HashMap<String, KindHint>;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    kind: ColumnKind,
    values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| DataError::InvalidColumn {
            column: name.clone(),
            reason,
        };
        match &kind {
            ColumnKind::Binary => {
                if let Some(v) = values.iter().find(|v| **v != 0.0 && **v != 1.0) {
                    return Err(invalid(format!("binary column holds {v}")));
                }
            }
            ColumnKind::Continuous => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("non-finite value".into()));
                }
            }
            ColumnKind::Categorical { levels } => {
                if levels.is_empty() {
                    return Err(invalid("categorical column without levels".into()));
                }
                let unique: BTreeSet<&String> = levels.iter().collect();
                if unique.len() != levels.len() {
                    return Err(invalid("duplicate categorical level".into()));
                }
                let l = levels.len() as f64;
                if let Some(v) = values
                    .iter()
                    .find(|v| v.fract() != 0.0 || **v < 0.0 || **v >= l)
                {
                    return Err(invalid(format!("level index {v} out of range")));
                }
            }
        }
        Ok(Self { name, kind, values })
    }

    pub fn binary(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::new(name, ColumnKind::Binary, values)
    }

    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::new(name, ColumnKind::Continuous, values)
    }

    /// Builds a categorical column from raw labels; levels are sorted.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, labels: &[S]) -> Result<Self> {
        let levels: Vec<String> = labels
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lookup: HashMap<&str, usize> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let values = labels
            .iter()
            .map(|s| lookup[s.as_ref()] as f64)
            .collect();
        Self::new(name, ColumnKind::Categorical { levels }, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ColumnKind {
        &self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn format_value(&self, v: f64) -> String {
        match &self.kind {
            ColumnKind::Binary => {
                if v == 1.0 {
                    "1".into()
                } else {
                    "0".into()
                }
            }
            ColumnKind::Continuous => format!("{v}"),
            ColumnKind::Categorical { levels } => levels[v as usize].clone(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        Column {
            name: self.name.clone(),
            kind: self.kind.clone(),
            values: rows.iter().map(|&r| self.values[r]).collect(),
        }
    }
}

/// An individual: feature name to value. Categorical features take the
/// level index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(BTreeMap<String, f64>);

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `name=value,name=value`.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let mut inst = Instance::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = pair.split_once('=').ok_or_else(|| DataError::InvalidInstance {
                feature: pair.to_string(),
                reason: "expected name=value".into(),
            })?;
            let name = name.trim();
            let value: f64 = value.trim().parse().map_err(|_| DataError::InvalidInstance {
                feature: name.to_string(),
                reason: format!("`{}` is not a number", value.trim()),
            })?;
            if !value.is_finite() {
                return Err(DataError::InvalidInstance {
                    feature: name.to_string(),
                    reason: "value must be finite".into(),
                });
            }
            inst.set(name, value);
        }
        Ok(inst)
    }
}

impl FromIterator<(String, f64)> for Instance {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        Instance(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    columns: Vec<Column>,
    outcome: String,
    index: HashMap<String, usize>,
}

impl DataTable {
    pub fn new(columns: Vec<Column>, outcome: impl Into<String>) -> Result<Self> {
        let outcome = outcome.into();
        if columns.is_empty() || columns[0].is_empty() {
            return Err(DataError::Empty);
        }
        let n = columns[0].len();
        let mut index = HashMap::with_capacity(columns.len());
        for (i, c) in columns.iter().enumerate() {
            if c.len() != n {
                return Err(DataError::LengthMismatch {
                    column: c.name.clone(),
                    expected: n,
                    found: c.len(),
                });
            }
            if index.insert(c.name.clone(), i).is_some() {
                return Err(DataError::DuplicateColumn(c.name.clone()));
            }
        }
        if !index.contains_key(&outcome) {
            return Err(DataError::UnknownOutcomeColumn(outcome));
        }
        Ok(Self {
            columns,
            outcome,
            index,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    pub fn outcome_column(&self) -> &Column {
        &self.columns[self.index[&self.outcome]]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.column_index(name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    /// Non-outcome column names in table order.
    pub fn feature_names(&self) -> Vec<&str> {
        self.columns
            .iter()
            .map(|c| c.name.as_str())
            .filter(|n| *n != self.outcome)
            .collect()
    }

    /// Same columns with a different outcome designation.
    pub fn with_outcome(&self, outcome: &str) -> Result<Self> {
        Self::new(self.columns.clone(), outcome)
    }

    /// Feature values of row `row` (outcome excluded).
    pub fn row_instance(&self, row: usize) -> Instance {
        self.columns
            .iter()
            .filter(|c| c.name != self.outcome)
            .map(|c| (c.name.clone(), c.values[row]))
            .collect()
    }

    /// Rows `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        Self::new(
            self.columns.iter().map(|c| c.select(rows)).collect(),
            self.outcome.clone(),
        )
    }

    /// Checks that every named feature exists and each value fits its kind.
    pub fn validate_instance(&self, instance: &Instance) -> Result<()> {
        for (name, v) in instance.iter() {
            let col = self.column(name).map_err(|_| DataError::InvalidInstance {
                feature: name.to_string(),
                reason: "unknown feature".into(),
            })?;
            check_value(name, col.kind(), v)?;
        }
        Ok(())
    }
}

pub(crate) fn check_value(name: &str, kind: &ColumnKind, v: f64) -> Result<()> {
    let bad = |reason: &str| {
        Err(DataError::InvalidInstance {
            feature: name.to_string(),
            reason: reason.to_string(),
        })
    };
    if !v.is_finite() {
        return bad("value must be finite");
    }
    match kind {
        ColumnKind::Binary if v != 0.0 && v != 1.0 => bad("binary feature takes 0 or 1"),
        ColumnKind::Categorical { levels }
            if v.fract() != 0.0 || v < 0.0 || v >= levels.len() as f64 =>
        {
            bad("categorical feature takes a level index")
        }
        _ => Ok(()),
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads CSV text. The first record is the header; kinds are inferred
/// unless overridden by `hints`.
pub fn read_csv<R: Read>(reader: R, outcome: &str, hints: &SchemaHint) -> Result<DataTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(DataError::Empty);
    }
    for h in hints.keys() {
        if !header.contains(h) {
            return Err(DataError::UnknownColumn(h.clone()));
        }
    }
    if !header.iter().any(|h| h == outcome) {
        return Err(DataError::UnknownOutcomeColumn(outcome.to_string()));
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(DataError::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                return Err(DataError::MissingValue {
                    row,
                    column: header[j].clone(),
                });
            }
            cells[j].push(field.to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(DataError::Empty);
    }

    let columns = header
        .iter()
        .zip(cells)
        .map(|(name, raw)| build_column(name, &raw, hints.get(name).copied()))
        .collect::<Result<Vec<_>>>()?;
    DataTable::new(columns, outcome)
}

fn build_column(name: &str, raw: &[String], hint: Option<KindHint>) -> Result<Column> {
    let parse_all = || -> Result<Vec<f64>> {
        raw.iter()
            .enumerate()
            .map(|(i, s)| {
                parse_number(s).ok_or_else(|| DataError::UnparseableNumeric {
                    row: i + 1,
                    column: name.to_string(),
                    value: s.clone(),
                })
            })
            .collect()
    };
    match hint {
        Some(KindHint::Categorical) => Column::categorical(name, raw),
        Some(KindHint::Continuous) => Column::continuous(name, parse_all()?),
        Some(KindHint::Binary) => {
            let values = parse_all()?;
            if let Some(i) = values.iter().position(|v| *v != 0.0 && *v != 1.0) {
                return Err(DataError::NotBinary {
                    row: i + 1,
                    column: name.to_string(),
                    value: raw[i].clone(),
                });
            }
            Column::binary(name, values)
        }
        None => {
            let parsed: Option<Vec<f64>> = raw.iter().map(|s| parse_number(s)).collect();
            match parsed {
                Some(values) if values.iter().all(|v| *v == 0.0 || *v == 1.0) => {
                    Column::binary(name, values)
                }
                Some(values) => Column::continuous(name, values),
                None => Column::categorical(name, raw),
            }
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, outcome: &str, hints: &SchemaHint) -> Result<DataTable> {
    read_csv(File::open(path)?, outcome, hints)
}

pub fn write_csv<W: Write>(table: &DataTable, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(table.columns.iter().map(|c| c.name.as_str()))?;
    for r in 0..table.n_rows() {
        wtr.write_record(table.columns.iter().map(|c| c.format_value(c.values[r])))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(table: &DataTable, path: impl AsRef<Path>) -> Result<()> {
    write_csv(table, File::create(path)?)
}

pub fn to_csv_string(table: &DataTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Lower middle order statistic.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[(sorted.len() - 1) / 2]
}

/// Replaces each named continuous column by `1[value > median]`.
pub fn binarize_by_median(table: &DataTable, columns: &[&str]) -> Result<DataTable> {
    let mut cols = table.columns.clone();
    for name in columns {
        let idx = table
            .column_index(name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
        let col = &cols[idx];
        if col.kind != ColumnKind::Continuous {
            return Err(DataError::NotContinuous(name.to_string()));
        }
        let median = lower_median(&col.values);
        let values = col
            .values
            .iter()
            .map(|v| if *v > median { 1.0 } else { 0.0 })
            .collect();
        cols[idx] = Column::binary(col.name.clone(), values)?;
    }
    DataTable::new(cols, table.outcome.clone())
}

/// Expands every categorical feature into one binary column per level,
/// named `<column>.<level>`. The outcome column is left untouched.
pub fn one_hot_encode(table: &DataTable) -> Result<DataTable> {
    let mut out: Vec<Column> = Vec::with_capacity(table.n_cols());
    let mut generated = Vec::new();
    for col in &table.columns {
        match &col.kind {
            ColumnKind::Categorical { levels } if col.name != table.outcome => {
                for (li, level) in levels.iter().enumerate() {
                    let name = format!("{}.{}", col.name, level);
                    let values = col
                        .values
                        .iter()
                        .map(|v| if *v as usize == li { 1.0 } else { 0.0 })
                        .collect();
                    generated.push(name.clone());
                    out.push(Column::binary(name, values)?);
                }
            }
            _ => out.push(col.clone()),
        }
    }
    for name in &generated {
        if table.column_index(name).is_some() || out.iter().filter(|c| &c.name == name).count() > 1
        {
            return Err(DataError::NameCollision(name.clone()));
        }
    }
    DataTable::new(out, table.outcome.clone())
}

/// Restricts the table to `columns` (in the given order) plus the outcome,
/// which is always kept as the last column.
pub fn project<S: AsRef<str>>(table: &DataTable, columns: &[S]) -> Result<DataTable> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(columns.len() + 1);
    for name in columns.iter().map(AsRef::as_ref) {
        if name == table.outcome {
            continue;
        }
        if !seen.insert(name) {
            return Err(DataError::DuplicateColumn(name.to_string()));
        }
        out.push(table.column(name)?.clone());
    }
    out.push(table.outcome_column().clone());
    DataTable::new(out, table.outcome.clone())
}

/// Seeded shuffle split. The training part receives `round(fraction * n)`
/// rows, clamped so that both parts are non-empty; each part keeps the
/// original row order.
pub fn split(table: &DataTable, train_fraction: f64, seed: u64) -> Result<(DataTable, DataTable)> {
    let n = table.n_rows();
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidSplit(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    if n < 2 {
        return Err(DataError::InvalidSplit("need at least two rows".into()));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let (train, test) = order.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((table.select_rows(train)?, table.select_rows(test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, outcome: &str) -> Result<DataTable> {
        read_csv(text.as_bytes(), outcome, &SchemaHint::new())
    }

    #[test]
    fn infers_binary_continuous_and_categorical() {
        let t = load("A,B,C,Y\n0,1.5,x,1\n1,2,y,0\n1,3,x,1\n", "Y").unwrap();
        assert_eq!(t.column("A").unwrap().kind(), &ColumnKind::Binary);
        assert_eq!(t.column("B").unwrap().kind(), &ColumnKind::Continuous);
        assert_eq!(
            t.column("C").unwrap().kind(),
            &ColumnKind::Categorical {
                levels: vec!["x".into(), "y".into()]
            }
        );
        assert_eq!(t.column("C").unwrap().values(), &[0.0, 1.0, 0.0]);
        assert_eq!(t.feature_names(), vec!["A", "B", "C"]);
    }

    #[test]
    fn blank_cell_reports_row() {
        let text = "A,B,Y\n0,1,1\n1,2,0\n0,3,1\n1,4,0\n1,,1\n";
        match load(text, "Y") {
            Err(DataError::MissingValue { row, column }) => {
                assert_eq!(row, 5);
                assert_eq!(column, "B");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_unknown_outcome() {
        assert!(matches!(
            load("A,Y\n0,1\n1\n", "Y"),
            Err(DataError::RaggedRow { row: 2, .. })
        ));
        assert!(matches!(
            load("A,Y\n0,1\n", "Z"),
            Err(DataError::UnknownOutcomeColumn(_))
        ));
    }

    #[test]
    fn hint_forces_numeric_parse() {
        let mut hints = SchemaHint::new();
        hints.insert("A".into(), KindHint::Continuous);
        let err = read_csv("A,Y\n1,0\nabc,1\n".as_bytes(), "Y", &hints).unwrap_err();
        assert!(matches!(err, DataError::UnparseableNumeric { row: 2, .. }));
    }

    #[test]
    fn quoted_labels_and_crlf() {
        let t = load("Credit.history,Y\r\n\"a, b\",1\r\nc,0\r\n", "Y").unwrap();
        assert_eq!(
            t.column("Credit.history").unwrap().kind(),
            &ColumnKind::Categorical {
                levels: vec!["a, b".into(), "c".into()]
            }
        );
    }

    fn continuous_table(values: &[f64]) -> DataTable {
        DataTable::new(
            vec![
                Column::continuous("G", values.to_vec()).unwrap(),
                Column::binary("Y", vec![0.0; values.len()]).unwrap(),
            ],
            "Y",
        )
        .unwrap()
    }

    #[test]
    fn median_binarization() {
        let t = binarize_by_median(&continuous_table(&[1.0, 2.0, 3.0, 4.0, 5.0]), &["G"]).unwrap();
        assert_eq!(t.column("G").unwrap().values(), &[0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(t.column("G").unwrap().kind(), &ColumnKind::Binary);

        let t = binarize_by_median(&continuous_table(&[1.0, 2.0, 3.0, 4.0]), &["G"]).unwrap();
        assert_eq!(t.column("G").unwrap().values(), &[0.0, 0.0, 1.0, 1.0]);

        let t = binarize_by_median(&continuous_table(&[7.0, 7.0, 7.0]), &["G"]).unwrap();
        assert_eq!(t.column("G").unwrap().values(), &[0.0, 0.0, 0.0]);

        let err = binarize_by_median(&t, &["G"]).unwrap_err();
        assert!(matches!(err, DataError::NotContinuous(_)));
    }

    #[test]
    fn one_hot_partitions_levels() {
        let t = load("H,Z,Y\na,p,1\nb,q,0\na,r,1\n", "Y").unwrap();
        let e = one_hot_encode(&t).unwrap();
        assert_eq!(
            e.feature_names(),
            vec!["H.a", "H.b", "Z.p", "Z.q", "Z.r"]
        );
        assert_eq!(e.column("H.a").unwrap().values(), &[1.0, 0.0, 1.0]);
        assert_eq!(e.column("H.b").unwrap().values(), &[0.0, 1.0, 0.0]);
        for r in 0..3 {
            let s: f64 = ["Z.p", "Z.q", "Z.r"]
                .iter()
                .map(|c| e.column(c).unwrap().values()[r])
                .sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn one_hot_is_identity_without_categoricals() {
        let t = continuous_table(&[1.0, 2.0]);
        assert_eq!(one_hot_encode(&t).unwrap(), t);
    }

    #[test]
    fn one_hot_detects_collision() {
        let t = load("H,H.a,Y\na,1,1\nb,0,0\n", "Y").unwrap();
        assert!(matches!(
            one_hot_encode(&t),
            Err(DataError::NameCollision(n)) if n == "H.a"
        ));
    }

    #[test]
    fn projection_keeps_outcome() {
        let t = load("A,B,C,Y\n0,1,0,1\n1,0,1,0\n", "Y").unwrap();
        let p = project(&t, &["C", "A"]).unwrap();
        assert_eq!(
            p.columns().iter().map(|c| c.name()).collect::<Vec<_>>(),
            vec!["C", "A", "Y"]
        );
        assert_eq!(p.n_rows(), 2);
        let empty: [&str; 0] = [];
        let only_y = project(&t, &empty).unwrap();
        assert_eq!(only_y.n_cols(), 1);
        assert!(matches!(
            project(&t, &["Q"]),
            Err(DataError::UnknownColumn(_))
        ));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let values: Vec<f64> = (0..10).map(f64::from).collect();
        let t = continuous_table(&values);
        let (a, b) = split(&t, 0.7, 3).unwrap();
        assert_eq!((a.n_rows(), b.n_rows()), (7, 3));
        let (a2, b2) = split(&t, 0.7, 3).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);

        let t4 = continuous_table(&[1.0, 2.0, 3.0, 4.0]);
        let (a, b) = split(&t4, 0.5, 9).unwrap();
        assert_eq!((a.n_rows(), b.n_rows()), (2, 2));
        let mut all: Vec<f64> = a
            .column("G")
            .unwrap()
            .values()
            .iter()
            .chain(b.column("G").unwrap().values())
            .copied()
            .collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, vec![1.0, 2.0, 3.0, 4.0]);

        assert!(split(&t4, 1.0, 0).is_err());
    }

    #[test]
    fn inline_instance() {
        let inst = Instance::parse_inline("X1=1, X2=0.5").unwrap();
        assert_eq!(inst.get("X1"), Some(1.0));
        assert_eq!(inst.get("X2"), Some(0.5));
        assert!(Instance::parse_inline("X1").is_err());
        assert!(Instance::parse_inline("X1=abc").is_err());
    }

    #[test]
    fn instance_validation() {
        let t = load("A,B,Y\n0,1.5,1\n1,2,0\n", "Y").unwrap();
        assert!(t
            .validate_instance(&Instance::new().with("A", 1.0).with("B", 9.0))
            .is_ok());
        assert!(t.validate_instance(&Instance::new().with("A", 0.5)).is_err());
        assert!(t.validate_instance(&Instance::new().with("Q", 0.0)).is_err());
    }
}
