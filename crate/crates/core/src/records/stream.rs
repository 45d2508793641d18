use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use serde_json::json;

use super::{parse_record_bytes, ParseError, Record, RecordKind};

/// Lines handed to the worker pool per parse round.
pub const DEFAULT_BATCH_LINES: usize = 16 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot write error log: {0}")]
    ErrorLog(io::Error),
}

/// Per-file ingestion counters.
///
/// `wall_time` covers reading and parsing only; time spent in downstream
/// consumers is excluded.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestStats {
    pub lines_read: u64,
    pub records_ok: u64,
    pub records_malformed: u64,
    pub bytes_read: u64,
    pub wall_time: f64,
}

impl IngestStats {
    pub fn merge(&mut self, other: &IngestStats) {
        self.lines_read += other.lines_read;
        self.records_ok += other.records_ok;
        self.records_malformed += other.records_malformed;
        self.bytes_read += other.bytes_read;
        self.wall_time += other.wall_time;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub kind: RecordKind,
    /// 1-based line number within the source file.
    pub line: u64,
    pub error: ParseError,
}

/// NDJSON sidecar receiving one object per malformed line.
pub struct ErrorLog {
    sink: Option<BufWriter<Box<dyn Write + Send>>>,
    written: u64,
}

impl ErrorLog {
    pub fn disabled() -> Self {
        ErrorLog { sink: None, written: 0 }
    }

    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self::to_writer(Box::new(File::create(path)?)))
    }

    pub fn to_writer(writer: Box<dyn Write + Send>) -> Self {
        ErrorLog {
            sink: Some(BufWriter::new(writer)),
            written: 0,
        }
    }

    pub fn record(&mut self, source: &Path, err: &LineError) -> io::Result<()> {
        if let Some(sink) = self.sink.as_mut() {
            let entry = json!({
                "file": source.display().to_string(),
                "kind": err.kind.name(),
                "line": err.line,
                "error": err.error.to_string(),
            });
            writeln!(sink, "{entry}")?;
            self.written += 1;
        }
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn flush(&mut self) -> io::Result<()> {
        match self.sink.as_mut() {
            Some(sink) => sink.flush(),
            None => Ok(()),
        }
    }
}

/// Opens a dataset file, transparently decompressing `.gz` paths.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead + Send>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let gz = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("gz"));
    Ok(if gz {
        Box::new(BufReader::with_capacity(1 << 20, MultiGzDecoder::new(file)))
    } else {
        Box::new(BufReader::with_capacity(1 << 20, file))
    })
}

fn strip_eol(mut line: &[u8]) -> &[u8] {
    if let [rest @ .., b'\n'] = line {
        line = rest;
    }
    if let [rest @ .., b'\r'] = line {
        line = rest;
    }
    line
}

/// Sequential record iterator over one file.
///
/// Malformed lines are counted and queued in [`RecordStream::take_errors`];
/// an I/O failure ends iteration and surfaces from [`RecordStream::finish`].
pub struct RecordStream {
    path: PathBuf,
    kind: RecordKind,
    reader: Box<dyn BufRead + Send>,
    buf: Vec<u8>,
    stats: IngestStats,
    started: Instant,
    errors: Vec<LineError>,
    io_error: Option<io::Error>,
    done: bool,
}

pub fn stream_file(path: &Path, kind: RecordKind) -> Result<RecordStream, IngestError> {
    let reader = open_input(path)?;
    Ok(RecordStream {
        path: path.to_path_buf(),
        kind,
        reader,
        buf: Vec::new(),
        stats: IngestStats::default(),
        started: Instant::now(),
        errors: Vec::new(),
        io_error: None,
        done: false,
    })
}

impl RecordStream {
    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn take_errors(&mut self) -> Vec<LineError> {
        std::mem::take(&mut self.errors)
    }

    /// Drains any remaining lines and returns the final counters.
    pub fn finish(mut self) -> Result<IngestStats, IngestError> {
        while self.next().is_some() {}
        match self.io_error.take() {
            Some(source) => Err(IngestError::Io {
                path: self.path,
                source,
            }),
            None => Ok(self.stats),
        }
    }
}

impl Iterator for RecordStream {
    type Item = Record;

    fn next(&mut self) -> Option<Record> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => self.done = true,
                Ok(n) => {
                    self.stats.bytes_read += n as u64;
                    self.stats.lines_read += 1;
                    match parse_record_bytes(self.kind, strip_eol(&self.buf)) {
                        Ok(rec) => {
                            self.stats.records_ok += 1;
                            self.stats.wall_time = self.started.elapsed().as_secs_f64();
                            return Some(rec);
                        }
                        Err(error) => {
                            self.stats.records_malformed += 1;
                            self.errors.push(LineError {
                                kind: self.kind,
                                line: self.stats.lines_read,
                                error,
                            });
                        }
                    }
                }
                Err(e) => {
                    self.io_error = Some(e);
                    self.done = true;
                }
            }
        }
        self.stats.wall_time = self.started.elapsed().as_secs_f64();
        None
    }
}

/// Reads up to `max_lines` lines into one contiguous buffer.
fn fill_batch(reader: &mut dyn BufRead, data: &mut Vec<u8>, ends: &mut Vec<usize>, max_lines: usize) -> io::Result<()> {
    data.clear();
    ends.clear();
    while ends.len() < max_lines {
        if reader.read_until(b'\n', data)? == 0 {
            break;
        }
        ends.push(data.len());
    }
    Ok(())
}

/// Parses a file in batches on `pool`, handing each batch of valid records
/// (in file order) to `on_batch`.
///
/// Malformed lines are counted and written to `errors`; they never stop the
/// stream.
pub fn ingest_batches<F>(
    path: &Path,
    kind: RecordKind,
    pool: &ThreadPool,
    batch_lines: usize,
    errors: &mut ErrorLog,
    mut on_batch: F,
) -> Result<IngestStats, IngestError>
where
    F: FnMut(Vec<Record>),
{
    let started = Instant::now();
    let mut consumer_time = 0.0;
    let mut reader = open_input(path)?;
    let mut stats = IngestStats::default();
    let mut data = Vec::new();
    let mut ends = Vec::new();
    let batch_lines = batch_lines.max(1);

    loop {
        fill_batch(&mut reader, &mut data, &mut ends, batch_lines).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if ends.is_empty() {
            break;
        }
        let parsed: Vec<Result<Record, ParseError>> = pool.install(|| {
            (0..ends.len())
                .into_par_iter()
                .with_min_len(256)
                .map(|i| {
                    let start = if i == 0 { 0 } else { ends[i - 1] };
                    parse_record_bytes(kind, strip_eol(&data[start..ends[i]]))
                })
                .collect()
        });

        let first_line = stats.lines_read;
        stats.bytes_read += data.len() as u64;
        stats.lines_read += ends.len() as u64;
        let mut records = Vec::with_capacity(parsed.len());
        for (offset, result) in parsed.into_iter().enumerate() {
            match result {
                Ok(rec) => records.push(rec),
                Err(error) => {
                    let err = LineError {
                        kind,
                        line: first_line + offset as u64 + 1,
                        error,
                    };
                    errors.record(path, &err).map_err(IngestError::ErrorLog)?;
                }
            }
        }
        stats.records_ok += records.len() as u64;
        stats.records_malformed = stats.lines_read - stats.records_ok;

        let t = Instant::now();
        on_batch(records);
        consumer_time += t.elapsed().as_secs_f64();
    }

    stats.wall_time = (started.elapsed().as_secs_f64() - consumer_time).max(0.0);
    Ok(stats)
}
