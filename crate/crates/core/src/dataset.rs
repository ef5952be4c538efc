//! Categorical tables, attribute domains and the value vocabulary.
//!
//! Cells are stored as indices into their attribute's domain. Domains are
//! built in first-appearance order while reading, after any declared values.
//! Empty cells and `?` become the literal value [`MISSING_VALUE`].

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token substituted for empty or `?` cells.
pub const MISSING_VALUE: &str = "missing";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub domain: Vec<String>,
}

impl AttributeSchema {
    pub fn cardinality(&self) -> usize {
        self.domain.len()
    }

    /// A single-valued attribute carries no information for clustering.
    pub fn is_degenerate(&self) -> bool {
        self.domain.len() == 1
    }

    pub fn position(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

/// Ground-truth classes, used only for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub names: Vec<String>,
    pub ids: Vec<usize>,
}

impl Labels {
    /// Interns raw label strings in first-appearance order.
    pub fn from_raw<S: AsRef<str>>(raw: &[S]) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let ids = raw
            .iter()
            .map(|s| {
                let s = s.as_ref();
                *lookup.entry(s.to_string()).or_insert_with(|| {
                    names.push(s.to_string());
                    names.len() - 1
                })
            })
            .collect();
        Labels { names, ids }
    }

    pub fn num_classes(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub attributes: Vec<AttributeSchema>,
    /// Row-major `n × m` domain indices.
    cells: Vec<u32>,
    n: usize,
    pub labels: Option<Labels>,
    /// Requested cluster count.
    pub k: usize,
}

impl Dataset {
    /// Builds a dataset from raw string rows, deriving domains by first
    /// appearance.
    pub fn from_rows<S: AsRef<str>>(
        name: impl Into<String>,
        attribute_names: &[S],
        rows: &[Vec<String>],
        labels: Option<Labels>,
        k: usize,
    ) -> Result<Self> {
        let mut builder = DomainBuilder::new(attribute_names, None);
        let mut cells = Vec::with_capacity(rows.len() * attribute_names.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != attribute_names.len() {
                return Err(Error::Parse {
                    row: i + 1,
                    message: format!(
                        "expected {} cells, found {}",
                        attribute_names.len(),
                        row.len()
                    ),
                });
            }
            for (j, cell) in row.iter().enumerate() {
                cells.push(builder.intern(j, cell));
            }
        }
        Self::new(name, builder.finish(), cells, labels, k)
    }

    /// Builds a dataset from encoded cells, checking every invariant that
    /// does not depend on clustering parameters.
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<AttributeSchema>,
        cells: Vec<u32>,
        labels: Option<Labels>,
        k: usize,
    ) -> Result<Self> {
        let m = attributes.len();
        if m == 0 {
            return Err(Error::Contract("dataset has no attributes".into()));
        }
        if cells.len() % m != 0 {
            return Err(Error::Shape(format!(
                "{} cells do not divide into rows of {m}",
                cells.len()
            )));
        }
        let n = cells.len() / m;
        for attr in &attributes {
            if attr.domain.is_empty() {
                return Err(Error::Contract(format!(
                    "attribute {:?} has an empty domain",
                    attr.name
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for v in &attr.domain {
                if !seen.insert(v) {
                    return Err(Error::Contract(format!(
                        "attribute {:?} lists {v:?} twice",
                        attr.name
                    )));
                }
            }
        }
        for (idx, &c) in cells.iter().enumerate() {
            let attr = &attributes[idx % m];
            if c as usize >= attr.domain.len() {
                return Err(Error::Contract(format!(
                    "row {} attribute {:?}: value id {c} outside domain of size {}",
                    idx / m,
                    attr.name,
                    attr.domain.len()
                )));
            }
        }
        if let Some(l) = &labels {
            if l.ids.len() != n {
                return Err(Error::Contract(format!(
                    "{} labels for {n} rows",
                    l.ids.len()
                )));
            }
        }
        if k == 0 {
            return Err(Error::Contract("k must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            attributes,
            cells,
            n,
            labels,
            k,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.attributes.len()
    }

    /// Domain index of cell `(i, j)`.
    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.m() + j] as usize
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let m = self.m();
        &self.cells[i * m..(i + 1) * m]
    }

    pub fn cell_value(&self, i: usize, j: usize) -> &str {
        &self.attributes[j].domain[self.cell(i, j)]
    }

    /// Checks `n ≥ 2` and `2 ≤ k ≤ n`, required before clustering.
    pub fn validate_for_clustering(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Contract(format!(
                "clustering needs at least 2 rows, dataset {:?} has {}",
                self.name, self.n
            )));
        }
        if self.k < 2 || self.k > self.n {
            return Err(Error::Contract(format!(
                "k = {} must satisfy 2 <= k <= n = {}",
                self.k, self.n
            )));
        }
        Ok(())
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    /// Writes the table back as CSV; labels go to a trailing `class` column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        if self.labels.is_some() {
            header.push("class");
        }
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.n {
            let mut rec: Vec<&str> = (0..self.m()).map(|j| self.cell_value(i, j)).collect();
            if let Some(l) = &self.labels {
                rec.push(&l.names[l.ids[i]]);
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        row,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// Field delimiter; defaults to comma.
    pub delimiter: Option<u8>,
    /// Column holding ground-truth classes; excluded from the attributes.
    pub label_column: Option<String>,
    /// Values to seed each named attribute's domain with, before observed
    /// values are appended.
    pub declared_domains: BTreeMap<String, Vec<String>>,
}

impl CsvOptions {
    pub fn with_label(label: impl Into<String>) -> Self {
        Self {
            label_column: Some(label.into()),
            ..Self::default()
        }
    }
}

struct DomainBuilder {
    attrs: Vec<AttributeSchema>,
    lookup: Vec<HashMap<String, u32>>,
}

impl DomainBuilder {
    fn new<S: AsRef<str>>(names: &[S], declared: Option<&BTreeMap<String, Vec<String>>>) -> Self {
        let mut b = DomainBuilder {
            attrs: names
                .iter()
                .map(|n| AttributeSchema {
                    name: n.as_ref().to_string(),
                    domain: Vec::new(),
                })
                .collect(),
            lookup: vec![HashMap::new(); names.len()],
        };
        if let Some(declared) = declared {
            for (j, name) in names.iter().enumerate() {
                if let Some(values) = declared.get(name.as_ref()) {
                    for v in values {
                        b.intern(j, v);
                    }
                }
            }
        }
        b
    }

    fn intern(&mut self, j: usize, raw: &str) -> u32 {
        let value = normalize_cell(raw);
        if let Some(&id) = self.lookup[j].get(value) {
            return id;
        }
        let id = self.attrs[j].domain.len() as u32;
        self.attrs[j].domain.push(value.to_string());
        self.lookup[j].insert(value.to_string(), id);
        id
    }

    fn finish(self) -> Vec<AttributeSchema> {
        self.attrs
    }
}

fn normalize_cell(raw: &str) -> &str {
    let t = raw.trim();
    if t.is_empty() || t == "?" {
        MISSING_VALUE
    } else {
        t
    }
}

/// Reads a CSV table with a header row.
pub fn load_dataset(path: impl AsRef<Path>, opts: &CsvOptions, k: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    load_dataset_from_reader(file, name, opts, k)
}

pub fn load_dataset_from_reader<R: Read>(
    reader: R,
    name: impl Into<String>,
    opts: &CsvOptions,
    k: usize,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter.unwrap_or(b','))
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyInput);
    }

    let label_idx = match &opts.label_column {
        Some(col) => Some(header.iter().position(|h| h == col).ok_or_else(|| {
            Error::Config(format!(
                "label column {col:?} not found; header has {}",
                header.join(", ")
            ))
        })?),
        None => None,
    };
    let attr_names: Vec<&str> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.as_str())
        .collect();
    if attr_names.is_empty() {
        return Err(Error::Config("no attribute columns besides the label".into()));
    }
    for name in opts.declared_domains.keys() {
        if !attr_names.contains(&name.as_str()) {
            return Err(Error::Config(format!(
                "declared domain for unknown attribute {name:?}"
            )));
        }
    }

    let mut builder = DomainBuilder::new(&attr_names, Some(&opts.declared_domains));
    let mut cells = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        // header is line 1, so the i-th record sits on row i + 2
        let row = i + 2;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                row,
                message: format!(
                    "ragged row: expected {} columns, found {}",
                    header.len(),
                    rec.len()
                ),
            });
        }
        let mut j = 0;
        for (col, field) in rec.iter().enumerate() {
            if Some(col) == label_idx {
                raw_labels.push(field.trim().to_string());
            } else {
                cells.push(builder.intern(j, field));
                j += 1;
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels = label_idx.map(|_| Labels::from_raw(&raw_labels));
    Dataset::new(name, builder.finish(), cells, labels, k)
}

/// One vocabulary entry: a value scoped to its attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VocabEntry {
    pub attribute: usize,
    pub value: String,
}

/// All distinct (attribute, value) pairs, attribute-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    offsets: Vec<usize>,
}

impl Vocabulary {
    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Vocabulary id of domain value `value` of attribute `attribute`.
    #[inline]
    pub fn id(&self, attribute: usize, value: usize) -> usize {
        self.offsets[attribute] + value
    }

    /// Column span `[start, end)` occupied by an attribute.
    pub fn span(&self, attribute: usize) -> (usize, usize) {
        let end = self
            .offsets
            .get(attribute + 1)
            .copied()
            .unwrap_or(self.entries.len());
        (self.offsets[attribute], end)
    }

    pub fn num_attributes(&self) -> usize {
        self.offsets.len()
    }
}

pub fn extract_vocabulary(ds: &Dataset) -> Vocabulary {
    let mut entries = Vec::new();
    let mut offsets = Vec::with_capacity(ds.m());
    for (j, attr) in ds.attributes.iter().enumerate() {
        offsets.push(entries.len());
        entries.extend(attr.domain.iter().map(|v| VocabEntry {
            attribute: j,
            value: v.clone(),
        }));
    }
    Vocabulary { entries, offsets }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub vocab_size: usize,
    pub mean_card: f64,
    pub max_card: usize,
    pub min_card: usize,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let cards: Vec<usize> = ds.attributes.iter().map(|a| a.cardinality()).collect();
    let vocab_size: usize = cards.iter().sum();
    DatasetStats {
        n: ds.n(),
        m: ds.m(),
        k: ds.k,
        vocab_size,
        mean_card: vocab_size as f64 / cards.len() as f64,
        max_card: cards.iter().copied().max().unwrap_or(0),
        min_card: cards.iter().copied().min().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(s: &str, opts: &CsvOptions) -> Result<Dataset> {
        load_dataset_from_reader(s.as_bytes(), "t", opts, 2)
    }

    #[test]
    fn minimal_single_row_loads() {
        let ds = load_str("a\nx\n", &CsvOptions::default()).unwrap();
        assert_eq!((ds.n(), ds.m()), (1, 1));
        assert!(ds.validate_for_clustering().is_err());
    }

    #[test]
    fn ragged_row_names_row_two() {
        let err = load_str("a,b\n1\n", &CsvOptions::default()).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(
            load_str("", &CsvOptions::default()),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            load_str("a,b\n", &CsvOptions::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let err = load_str("a,b\n1,2\n", &CsvOptions::with_label("class")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn missing_cells_become_a_value() {
        let ds = load_str("a,b\nx,?\n,y\n", &CsvOptions::default()).unwrap();
        assert_eq!(ds.attributes[0].domain, vec!["x", MISSING_VALUE]);
        assert_eq!(ds.attributes[1].domain, vec![MISSING_VALUE, "y"]);
    }

    #[test]
    fn values_are_scoped_per_attribute() {
        let ds = load_str("income,risk\nlow,low\nhigh,low\n", &CsvOptions::default()).unwrap();
        let vocab = extract_vocabulary(&ds);
        assert_eq!(vocab.len(), 3);
        assert_eq!(vocab.span(1), (2, 3));
        assert_eq!(vocab.entries()[2].value, "low");
        assert_eq!(vocab.entries()[2].attribute, 1);
    }

    #[test]
    fn single_attribute_vocabulary() {
        let ds = load_str("a\nx\ny\nx\n", &CsvOptions::default()).unwrap();
        let vocab = extract_vocabulary(&ds);
        let expected = vec![
            VocabEntry {
                attribute: 0,
                value: "x".into(),
            },
            VocabEntry {
                attribute: 0,
                value: "y".into(),
            },
        ];
        assert_eq!(vocab.entries(), expected.as_slice());
        assert_eq!(extract_vocabulary(&ds), vocab);
    }

    #[test]
    fn stats_of_binary_attribute() {
        let ds = load_str("a\na\nb\na\n", &CsvOptions::default()).unwrap();
        let s = dataset_stats(&ds);
        assert_eq!(s.vocab_size, 2);
        assert_eq!((s.max_card, s.min_card), (2, 2));
        assert_eq!(s.mean_card, 2.0);
    }

    #[test]
    fn declared_domains_come_first() {
        let mut opts = CsvOptions::default();
        opts.declared_domains
            .insert("a".into(), vec!["z".into(), "y".into()]);
        let ds = load_str("a\ny\nq\n", &opts).unwrap();
        assert_eq!(ds.attributes[0].domain, vec!["z", "y", "q"]);
        opts.declared_domains.insert("nope".into(), vec![]);
        assert!(matches!(load_str("a\ny\n", &opts), Err(Error::Config(_))));
    }

    #[test]
    fn labels_excluded_from_attributes() {
        let ds = load_str("a,class,b\n1,p,2\n3,q,2\n", &CsvOptions::with_label("class")).unwrap();
        assert_eq!(ds.m(), 2);
        let labels = ds.labels.as_ref().unwrap();
        assert_eq!(labels.ids, vec![0, 1]);
        assert_eq!(labels.names, vec!["p", "q"]);
    }

    #[test]
    fn invariants_checked_on_construction() {
        let attrs = vec![AttributeSchema {
            name: "a".into(),
            domain: vec!["x".into()],
        }];
        assert!(Dataset::new("t", attrs.clone(), vec![0, 1], None, 2).is_err());
        let bad_labels = Labels::from_raw(&["p"]);
        assert!(Dataset::new("t", attrs.clone(), vec![0, 0], Some(bad_labels), 2).is_err());
        let dup = vec![AttributeSchema {
            name: "a".into(),
            domain: vec!["x".into(), "x".into()],
        }];
        assert!(Dataset::new("t", dup, vec![0], None, 2).is_err());
        assert!(attrs[0].is_degenerate());
    }

    #[test]
    fn semicolon_delimiter() {
        let opts = CsvOptions {
            delimiter: Some(b';'),
            ..CsvOptions::default()
        };
        let ds = load_str("a;b\n\"x;1\";y\n", &opts).unwrap();
        assert_eq!(ds.cell_value(0, 0), "x;1");
    }
}
