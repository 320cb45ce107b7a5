use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{RegKind, TrialRecord};
use crate::{Error, Result};

/// Column order of the trial table.
pub const CSV_HEADER: [&str; 20] = [
    "regularizer",
    "n",
    "d",
    "c_nominal",
    "c_realized",
    "r",
    "sigma",
    "lambda",
    "seed",
    "sim_error",
    "pred_error",
    "approx_error",
    "onebit_error",
    "sparsified_error",
    "nnz_empirical",
    "sparsity_pred",
    "bound_count_empirical",
    "bound_count_pred",
    "solver_converged",
    "runtime_ms",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<V>(v: Option<V>, f: impl Fn(V) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn fields(rec: &TrialRecord) -> [String; 20] {
    [
        rec.regularizer.to_string(),
        rec.n.to_string(),
        rec.d.to_string(),
        float(rec.c_nominal),
        float(rec.c_realized),
        float(rec.r),
        float(rec.sigma),
        float(rec.lambda),
        rec.seed.to_string(),
        float(rec.sim_error),
        float(rec.pred_error),
        opt(rec.approx_error, float),
        float(rec.onebit_error),
        opt(rec.sparsified_error, float),
        opt(rec.nnz_empirical, |v| v.to_string()),
        opt(rec.sparsity_pred, |v| v.to_string()),
        opt(rec.bound_count_empirical, |v| v.to_string()),
        opt(rec.bound_count_pred, |v| v.to_string()),
        rec.solver_converged.to_string(),
        rec.runtime_ms.to_string(),
    ]
}

/// Row-at-a-time writer; every row is flushed as soon as it is written.
pub struct CsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(CSV_HEADER)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, rec: &TrialRecord) -> Result<()> {
        self.inner.write_record(fields(rec))?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

pub fn write_records<W: Write>(sink: W, records: &[TrialRecord]) -> Result<W> {
    let mut w = CsvWriter::new(sink)?;
    for rec in records {
        w.write(rec)?;
    }
    w.into_inner()
}

/// Raw table: the header and the rows as text.
pub fn read_csv<R: Read>(source: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for row in reader.records() {
        rows.push(row?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

/// Checks that `header` is exactly the trial-table header.
pub(crate) fn check_header(header: &[String]) -> Result<()> {
    if let Some(bad) = header.iter().find(|h| !CSV_HEADER.contains(&h.as_str())) {
        return Err(Error::Parse(format!("unknown column `{bad}`")));
    }
    if let Some(missing) = CSV_HEADER.iter().find(|c| !header.iter().any(|h| h == *c)) {
        return Err(Error::Parse(format!("missing column `{missing}`")));
    }
    if header.len() != CSV_HEADER.len() || header.iter().zip(CSV_HEADER).any(|(h, c)| h != c) {
        return Err(Error::Parse("columns are out of order or repeated".into()));
    }
    Ok(())
}

fn parse_row(line: usize, row: &[String]) -> Result<TrialRecord> {
    fn req<V: std::str::FromStr>(line: usize, col: usize, s: &str) -> Result<V> {
        s.parse()
            .map_err(|_| Error::Parse(format!("row {line}: bad `{}` value `{s}`", CSV_HEADER[col])))
    }
    fn opt<V: std::str::FromStr>(line: usize, col: usize, s: &str) -> Result<Option<V>> {
        if s.is_empty() {
            Ok(None)
        } else {
            req(line, col, s).map(Some)
        }
    }
    if row.len() != CSV_HEADER.len() {
        return Err(Error::Parse(format!("row {line}: expected {} fields, got {}", CSV_HEADER.len(), row.len())));
    }
    Ok(TrialRecord {
        regularizer: row[0].parse::<RegKind>()?,
        n: req(line, 1, &row[1])?,
        d: req(line, 2, &row[2])?,
        c_nominal: req(line, 3, &row[3])?,
        c_realized: req(line, 4, &row[4])?,
        r: req(line, 5, &row[5])?,
        sigma: req(line, 6, &row[6])?,
        lambda: req(line, 7, &row[7])?,
        seed: req(line, 8, &row[8])?,
        sim_error: req(line, 9, &row[9])?,
        pred_error: req(line, 10, &row[10])?,
        approx_error: opt(line, 11, &row[11])?,
        onebit_error: req(line, 12, &row[12])?,
        sparsified_error: opt(line, 13, &row[13])?,
        nnz_empirical: opt(line, 14, &row[14])?,
        sparsity_pred: opt(line, 15, &row[15])?,
        bound_count_empirical: opt(line, 16, &row[16])?,
        bound_count_pred: opt(line, 17, &row[17])?,
        solver_converged: req(line, 18, &row[18])?,
        runtime_ms: req(line, 19, &row[19])?,
    })
}

pub fn read_records<R: Read>(source: R) -> Result<Vec<TrialRecord>> {
    let (header, rows) = read_csv(source)?;
    check_header(&header)?;
    rows.iter().enumerate().map(|(i, row)| parse_row(i + 1, row)).collect()
}

pub fn read_records_file(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_records(File::open(path.as_ref())?)
}
