use serde::Serialize;

use super::{IngestStats, RecordKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindSummary {
    pub kind: RecordKind,
    pub records: u64,
    pub malformed: u64,
    pub bytes: u64,
    pub seconds: f64,
}

/// Per-kind record totals plus overall bytes and time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub kinds: Vec<KindSummary>,
    pub total_records: u64,
    pub total_bytes: u64,
    pub total_seconds: f64,
}

impl DatasetSummary {
    pub fn records(&self, kind: RecordKind) -> u64 {
        self.kinds.iter().filter(|k| k.kind == kind).map(|k| k.records).sum()
    }

    pub fn businesses(&self) -> u64 {
        self.records(RecordKind::Business)
    }

    pub fn reviews(&self) -> u64 {
        self.records(RecordKind::Review)
    }
}

/// Folds per-file stats into a summary with one entry per record kind, in
/// [`RecordKind::ALL`] order. Kinds that were not ingested report zeros.
pub fn summarize(stats: &[(RecordKind, IngestStats)]) -> DatasetSummary {
    let kinds: Vec<KindSummary> = RecordKind::ALL
        .into_iter()
        .map(|kind| {
            let mut merged = IngestStats::default();
            for (_, s) in stats.iter().filter(|(k, _)| *k == kind) {
                merged.merge(s);
            }
            KindSummary {
                kind,
                records: merged.records_ok,
                malformed: merged.records_malformed,
                bytes: merged.bytes_read,
                seconds: merged.wall_time,
            }
        })
        .collect();
    DatasetSummary {
        total_records: kinds.iter().map(|k| k.records).sum(),
        total_bytes: kinds.iter().map(|k| k.bytes).sum(),
        total_seconds: kinds.iter().map(|k| k.seconds).sum(),
        kinds,
    }
}
