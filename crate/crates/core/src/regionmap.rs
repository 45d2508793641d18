//! State abbreviation → qualified (country, region) lookup.
//!
//! The mapper file is tab-separated `abbrev<TAB>country<TAB>region_name`,
//! one entry per line, `#` comments and blank lines ignored.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{data_lines, read_text, LoadError};

const BUNDLED_MAPPER: &str = include_str!("../data/regions.tsv");

/// Country recorded for codes missing from the mapper under
/// [`UnknownPolicy::EmitAsUnknown`].
pub const UNKNOWN_COUNTRY: &str = "Unknown";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Region {
    pub country: String,
    pub region_name: String,
}

impl Region {
    pub fn new(country: impl Into<String>, region_name: impl Into<String>) -> Self {
        Region {
            country: country.into(),
            region_name: region_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution<'m> {
    Known(&'m Region),
    Unknown(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownPolicy {
    /// Keep the row, with country [`UNKNOWN_COUNTRY`] and the raw code as region.
    #[default]
    EmitAsUnknown,
    Drop,
}

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownPolicy::EmitAsUnknown => "emit-as-unknown",
            UnknownPolicy::Drop => "drop",
        })
    }
}

impl FromStr for UnknownPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emit-as-unknown" => Ok(UnknownPolicy::EmitAsUnknown),
            "drop" => Ok(UnknownPolicy::Drop),
            other => Err(format!("unknown policy `{other}` (expected emit-as-unknown or drop)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RegionMapper {
    entries: Vec<(String, Region)>,
    index: HashMap<String, usize>,
    unknown_policy: UnknownPolicy,
}

pub fn load_mapper(path: &Path) -> Result<RegionMapper, LoadError> {
    RegionMapper::parse(&read_text(path)?)
}

impl RegionMapper {
    /// Mapper shipped with the crate: US states, Canadian provinces and
    /// territories, and the UK/Ireland codes seen in public dataset releases.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_MAPPER).expect("bundled region mapper is valid")
    }

    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let mut mapper = RegionMapper::default();
        for (line, content) in data_lines(text) {
            let cols: Vec<&str> = content.split('\t').collect();
            if cols.len() != 3 {
                return Err(LoadError::ColumnCount {
                    line,
                    expected: 3,
                    found: cols.len(),
                });
            }
            if let Some(column) = cols.iter().position(|c| c.trim().is_empty()) {
                return Err(LoadError::EmptyField {
                    line,
                    column: column + 1,
                });
            }
            let abbrev = cols[0].to_string();
            if mapper.index.contains_key(&abbrev) {
                return Err(LoadError::Duplicate { line, key: abbrev });
            }
            mapper.index.insert(abbrev.clone(), mapper.entries.len());
            mapper.entries.push((abbrev, Region::new(cols[1], cols[2])));
        }
        Ok(mapper)
    }

    pub fn with_policy(mut self, policy: UnknownPolicy) -> Self {
        self.unknown_policy = policy;
        self
    }

    pub fn unknown_policy(&self) -> UnknownPolicy {
        self.unknown_policy
    }

    /// Exact, case-sensitive lookup.
    pub fn resolve(&self, abbrev: &str) -> Resolution<'_> {
        match self.index.get(abbrev) {
            Some(&i) => Resolution::Known(&self.entries[i].1),
            None => Resolution::Unknown(abbrev.to_string()),
        }
    }

    /// Output region for a code after applying the unknown policy; `None`
    /// means the row is dropped.
    pub fn region_for(&self, abbrev: &str) -> Option<Region> {
        match self.resolve(abbrev) {
            Resolution::Known(r) => Some(r.clone()),
            Resolution::Unknown(code) => match self.unknown_policy {
                UnknownPolicy::EmitAsUnknown => Some(Region::new(UNKNOWN_COUNTRY, code)),
                UnknownPolicy::Drop => None,
            },
        }
    }

    /// Entries in file order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &Region)> {
        self.entries.iter().map(|(a, r)| (a.as_str(), r))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Renders the mapper back into its file format.
    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|(a, r)| format!("{a}\t{}\t{}\n", r.country, r.region_name))
            .collect()
    }
}
