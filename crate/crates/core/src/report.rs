//! CSV emission for analysis outputs and chart-ready series.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use crate::analytics::{Measure, SentimentBreakdown, SentimentRow, StarRow, YearlyFeatureCounts};
use crate::records::{KindSummary, RecordKind};
use crate::sentiment::SentimentLabel;

pub const DEFAULT_NULL_MARKER: &str = "\\N";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid CSV layout: {0}")]
    Spec(String),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
}

/// A type that renders as one CSV line.
pub trait TableRow: Sized {
    const HEADER: &'static [&'static str];

    /// Cell values in header order; `None` renders as the null marker.
    fn cells(&self) -> Vec<Option<String>>;

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSpec {
    header: Vec<String>,
    null_marker: String,
    delimiter: u8,
}

impl CsvSpec {
    pub fn new(header: Vec<String>, null_marker: impl Into<String>, delimiter: u8) -> Result<Self, ReportError> {
        let null_marker = null_marker.into();
        for (i, name) in header.iter().enumerate() {
            if header[..i].contains(name) {
                return Err(ReportError::Spec(format!("duplicate column `{name}`")));
            }
        }
        if null_marker.as_bytes().contains(&delimiter) {
            return Err(ReportError::Spec(format!(
                "null marker `{null_marker}` contains the delimiter"
            )));
        }
        if matches!(delimiter, b'"' | b'\n' | b'\r') {
            return Err(ReportError::Spec("delimiter cannot be a quote or newline".into()));
        }
        Ok(CsvSpec {
            header,
            null_marker,
            delimiter,
        })
    }

    /// Comma-delimited layout for `R` with the `\N` null marker.
    pub fn for_row<R: TableRow>() -> Self {
        Self::new(
            R::HEADER.iter().map(|s| s.to_string()).collect(),
            DEFAULT_NULL_MARKER,
            b',',
        )
        .expect("row headers are unique")
    }

    pub fn with_null_marker(self, marker: impl Into<String>) -> Result<Self, ReportError> {
        Self::new(self.header, marker, self.delimiter)
    }

    pub fn with_delimiter(self, delimiter: u8) -> Result<Self, ReportError> {
        Self::new(self.header, self.null_marker, delimiter)
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn null_marker(&self) -> &str {
        &self.null_marker
    }

    pub fn delimiter(&self) -> u8 {
        self.delimiter
    }
}

struct CountingWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes a header line and one line per row. Returns the bytes written.
pub fn write_table_to<R: TableRow, W: Write>(rows: &[R], spec: &CsvSpec, out: W) -> Result<u64, ReportError> {
    let mut counter = CountingWriter { inner: out, written: 0 };
    {
        let mut w = csv::WriterBuilder::new()
            .delimiter(spec.delimiter)
            .quote_style(csv::QuoteStyle::Necessary)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut counter);
        w.write_record(&spec.header)?;
        for (i, row) in rows.iter().enumerate() {
            let cells = row.cells();
            if cells.len() != spec.header.len() {
                return Err(ReportError::Row {
                    row: i + 1,
                    reason: format!("{} cells for {} columns", cells.len(), spec.header.len()),
                });
            }
            w.write_record(cells.iter().map(|c| c.as_deref().unwrap_or(&spec.null_marker)))?;
        }
        w.flush().map_err(csv::Error::from)?;
    }
    Ok(counter.written)
}

pub fn write_table<R: TableRow>(rows: &[R], spec: &CsvSpec, path: &Path) -> Result<u64, ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let n = write_table_to(rows, spec, &mut out)?;
    out.flush().map_err(io_err)?;
    Ok(n)
}

/// Parses a table written by [`write_table_to`] back into rows.
pub fn read_table_from<R: TableRow, Rd: Read>(input: Rd, spec: &CsvSpec) -> Result<Vec<R>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != spec.header {
        return Err(ReportError::Spec(format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let cells: Vec<Option<String>> = rec
                .iter()
                .map(|c| (c != spec.null_marker).then(|| c.to_owned()))
                .collect();
            R::from_cells(&cells).map_err(|reason| ReportError::Row { row: i + 1, reason })
        })
        .collect()
}

pub fn read_table<R: TableRow>(path: &Path, spec: &CsvSpec) -> Result<Vec<R>, ReportError> {
    let file = File::open(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_table_from(file, spec)
}

/// One plotted point of the feature trend chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeriesPoint {
    pub measure: Measure,
    pub year: i32,
    pub value: u64,
}

/// Long-format (measure, year, value) triples for every non-null cell,
/// ordered by measure then year.
pub fn emit_chart_series(rows: &[YearlyFeatureCounts]) -> Vec<SeriesPoint> {
    let mut sorted: Vec<&YearlyFeatureCounts> = rows.iter().collect();
    sorted.sort_by_key(|r| r.year);
    Measure::ALL
        .into_iter()
        .flat_map(|measure| {
            sorted.iter().filter_map(move |r| {
                r.get(measure).map(|value| SeriesPoint {
                    measure,
                    year: r.year,
                    value,
                })
            })
        })
        .collect()
}

/// Label share line of the sentiment breakdown table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownRow {
    pub label: SentimentLabel,
    pub count: u64,
    pub percent: f64,
}

pub fn breakdown_rows(b: &SentimentBreakdown) -> Vec<BreakdownRow> {
    SentimentLabel::ALL
        .into_iter()
        .map(|label| BreakdownRow {
            label,
            count: b.count(label),
            percent: b.percent(label),
        })
        .collect()
}

/// One distinct state code found in the business file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateCodeRow {
    pub code: String,
    pub businesses: u64,
    pub country: Option<String>,
    pub region: Option<String>,
}

fn cell<T: ToString>(v: T) -> Option<String> {
    Some(v.to_string())
}

fn field<'a>(cells: &'a [Option<String>], i: usize, name: &str) -> Result<&'a str, String> {
    cells
        .get(i)
        .and_then(|c| c.as_deref())
        .ok_or_else(|| format!("missing {name}"))
}

fn parse_field<T: std::str::FromStr>(cells: &[Option<String>], i: usize, name: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    field(cells, i, name)?.parse().map_err(|e| format!("bad {name}: {e}"))
}

fn parse_optional(cells: &[Option<String>], i: usize, name: &str) -> Result<Option<u64>, String> {
    match cells.get(i) {
        Some(Some(v)) => v.parse().map(Some).map_err(|e| format!("bad {name}: {e}")),
        Some(None) => Ok(None),
        None => Err(format!("missing {name}")),
    }
}

fn check_width(cells: &[Option<String>], n: usize) -> Result<(), String> {
    if cells.len() == n {
        Ok(())
    } else {
        Err(format!("expected {n} cells, found {}", cells.len()))
    }
}

impl TableRow for YearlyFeatureCounts {
    const HEADER: &'static [&'static str] = &["year", "new_users", "reviews", "elite_users", "tips", "checkins"];

    fn cells(&self) -> Vec<Option<String>> {
        std::iter::once(cell(self.year))
            .chain(Measure::ALL.into_iter().map(|m| self.get(m).map(|v| v.to_string())))
            .collect()
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 6)?;
        let mut row = YearlyFeatureCounts::empty(parse_field(cells, 0, "year")?);
        for (i, m) in Measure::ALL.into_iter().enumerate() {
            row.set(m, parse_optional(cells, i + 1, m.column())?);
        }
        Ok(row)
    }
}

impl TableRow for SentimentRow {
    const HEADER: &'static [&'static str] = &["country", "state", "date", "sentiment", "count"];

    fn cells(&self) -> Vec<Option<String>> {
        vec![
            cell(&self.country),
            cell(&self.state),
            cell(self.date),
            cell(self.label),
            cell(self.count),
        ]
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 5)?;
        Ok(SentimentRow {
            country: field(cells, 0, "country")?.to_owned(),
            state: field(cells, 1, "state")?.to_owned(),
            date: parse_field::<NaiveDate>(cells, 2, "date")?,
            label: parse_field(cells, 3, "sentiment")?,
            count: parse_field(cells, 4, "count")?,
        })
    }
}

impl TableRow for StarRow {
    const HEADER: &'static [&'static str] = &["country", "state", "month", "stars", "count"];

    fn cells(&self) -> Vec<Option<String>> {
        vec![
            cell(&self.country),
            cell(&self.state),
            cell(self.month),
            cell(self.stars),
            cell(self.count),
        ]
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 5)?;
        Ok(StarRow {
            country: field(cells, 0, "country")?.to_owned(),
            state: field(cells, 1, "state")?.to_owned(),
            month: parse_field::<NaiveDate>(cells, 2, "month")?,
            stars: parse_field(cells, 3, "stars")?,
            count: parse_field(cells, 4, "count")?,
        })
    }
}

impl TableRow for SeriesPoint {
    const HEADER: &'static [&'static str] = &["measure", "year", "value"];

    fn cells(&self) -> Vec<Option<String>> {
        vec![cell(self.measure), cell(self.year), cell(self.value)]
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 3)?;
        let name = field(cells, 0, "measure")?;
        Ok(SeriesPoint {
            measure: Measure::from_label(name).ok_or_else(|| format!("unknown measure `{name}`"))?,
            year: parse_field(cells, 1, "year")?,
            value: parse_field(cells, 2, "value")?,
        })
    }
}

impl TableRow for BreakdownRow {
    const HEADER: &'static [&'static str] = &["sentiment", "count", "percent"];

    fn cells(&self) -> Vec<Option<String>> {
        vec![cell(self.label), cell(self.count), Some(format!("{:.2}", self.percent))]
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 3)?;
        Ok(BreakdownRow {
            label: parse_field(cells, 0, "sentiment")?,
            count: parse_field(cells, 1, "count")?,
            percent: parse_field(cells, 2, "percent")?,
        })
    }
}

// Timings stay out of this table so the file is reproducible; they live in
// the run report.
impl TableRow for KindSummary {
    const HEADER: &'static [&'static str] = &["kind", "records", "malformed", "bytes"];

    fn cells(&self) -> Vec<Option<String>> {
        vec![
            cell(self.kind),
            cell(self.records),
            cell(self.malformed),
            cell(self.bytes),
        ]
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 4)?;
        Ok(KindSummary {
            kind: parse_field::<RecordKind>(cells, 0, "kind")?,
            records: parse_field(cells, 1, "records")?,
            malformed: parse_field(cells, 2, "malformed")?,
            bytes: parse_field(cells, 3, "bytes")?,
            seconds: 0.0,
        })
    }
}

impl TableRow for StateCodeRow {
    const HEADER: &'static [&'static str] = &["code", "businesses", "country", "region"];

    fn cells(&self) -> Vec<Option<String>> {
        vec![
            cell(&self.code),
            cell(self.businesses),
            self.country.clone(),
            self.region.clone(),
        ]
    }

    fn from_cells(cells: &[Option<String>]) -> Result<Self, String> {
        check_width(cells, 4)?;
        Ok(StateCodeRow {
            code: field(cells, 0, "code")?.to_owned(),
            businesses: parse_field(cells, 1, "businesses")?,
            country: cells[2].clone(),
            region: cells[3].clone(),
        })
    }
}
