//! Yelp-format dataset records.
//!
//! Each of the five dataset files holds one JSON object per line. [`parse_record`]
//! turns a single line into a validated [`Record`]; [`stream_file`] and
//! [`ingest_batches`] drive whole files, counting malformed lines instead of
//! failing on them.

mod stream;
mod summary;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use stream::{
    ingest_batches, open_input, stream_file, ErrorLog, IngestError, IngestStats, LineError, RecordStream,
    DEFAULT_BATCH_LINES,
};
pub use summary::{summarize, DatasetSummary, KindSummary};

/// Local wall-clock timestamp, second resolution.
pub type Timestamp = NaiveDateTime;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// Inclusive bounds for elite-year entries.
pub const ELITE_YEAR_MIN: i32 = 2004;
pub const ELITE_YEAR_MAX: i32 = 2030;

/// Which dataset file a line came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Business,
    Review,
    User,
    Tip,
    Checkin,
}

impl RecordKind {
    pub const ALL: [RecordKind; 5] = [
        RecordKind::Business,
        RecordKind::Review,
        RecordKind::User,
        RecordKind::Tip,
        RecordKind::Checkin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Business => "business",
            RecordKind::Review => "review",
            RecordKind::User => "user",
            RecordKind::Tip => "tip",
            RecordKind::Checkin => "checkin",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RecordKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown record kind `{s}`"))
    }
}

/// Why a line could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    InvalidJson(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ParseError {
    ParseError::InvalidField {
        field,
        reason: reason.into(),
    }
}

/// Business-average rating stored as a count of half stars (2..=10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfStars(u8);

impl HalfStars {
    pub fn from_f64(stars: f64) -> Option<Self> {
        let halves = stars * 2.0;
        if !(2.0..=10.0).contains(&halves) || halves.fract() != 0.0 {
            return None;
        }
        Some(HalfStars(halves as u8))
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusinessRecord {
    pub business_id: String,
    pub name: String,
    pub state_abbrev: String,
    pub city: String,
    pub stars: Option<HalfStars>,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewRecord {
    pub review_id: String,
    pub user_id: String,
    pub business_id: String,
    pub stars: u8,
    pub date: Timestamp,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub user_id: String,
    pub yelping_since: Timestamp,
    pub elite_years: BTreeSet<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TipRecord {
    pub user_id: String,
    pub business_id: String,
    pub date: Timestamp,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckinRecord {
    pub business_id: String,
    pub timestamps: Vec<Timestamp>,
}

/// One parsed dataset row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Business(BusinessRecord),
    Review(ReviewRecord),
    User(UserRecord),
    Tip(TipRecord),
    Checkin(CheckinRecord),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::Business(_) => RecordKind::Business,
            Record::Review(_) => RecordKind::Review,
            Record::User(_) => RecordKind::User,
            Record::Tip(_) => RecordKind::Tip,
            Record::Checkin(_) => RecordKind::Checkin,
        }
    }

    pub fn into_business(self) -> Option<BusinessRecord> {
        match self {
            Record::Business(b) => Some(b),
            _ => None,
        }
    }

    pub fn into_review(self) -> Option<ReviewRecord> {
        match self {
            Record::Review(r) => Some(r),
            _ => None,
        }
    }

    pub fn into_user(self) -> Option<UserRecord> {
        match self {
            Record::User(u) => Some(u),
            _ => None,
        }
    }

    pub fn into_tip(self) -> Option<TipRecord> {
        match self {
            Record::Tip(t) => Some(t),
            _ => None,
        }
    }

    pub fn into_checkin(self) -> Option<CheckinRecord> {
        match self {
            Record::Checkin(c) => Some(c),
            _ => None,
        }
    }

    /// Serializes the record back into the dataset's JSON line shape.
    ///
    /// Re-parsing the output with [`parse_record`] yields an equal record.
    pub fn to_canonical_json(&self) -> String {
        let value = match self {
            Record::Business(b) => {
                let mut v = json!({
                    "business_id": b.business_id,
                    "name": b.name,
                    "city": b.city,
                    "state": b.state_abbrev,
                    "categories": if b.categories.is_empty() {
                        Value::Null
                    } else {
                        Value::String(b.categories.join(", "))
                    },
                });
                if let Some(stars) = b.stars {
                    v["stars"] = json!(stars.as_f64());
                }
                v
            }
            Record::Review(r) => json!({
                "review_id": r.review_id,
                "user_id": r.user_id,
                "business_id": r.business_id,
                "stars": f64::from(r.stars),
                "date": format_timestamp(&r.date),
                "text": r.text,
            }),
            Record::User(u) => json!({
                "user_id": u.user_id,
                "yelping_since": format_timestamp(&u.yelping_since),
                "elite": u.elite_years.iter().map(i32::to_string).collect::<Vec<_>>().join(","),
            }),
            Record::Tip(t) => json!({
                "user_id": t.user_id,
                "business_id": t.business_id,
                "date": format_timestamp(&t.date),
                "text": t.text,
            }),
            Record::Checkin(c) => json!({
                "business_id": c.business_id,
                "date": c.timestamps.iter().map(format_timestamp).collect::<Vec<_>>().join(", "),
            }),
        };
        value.to_string()
    }
}

pub fn format_timestamp(ts: &Timestamp) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

fn digits(bytes: &[u8]) -> Option<u32> {
    if bytes.is_empty() || !bytes.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(bytes.iter().fold(0u32, |acc, b| acc * 10 + u32::from(b - b'0')))
}

/// Parses `YYYY-MM-DD HH:MM:SS`, or a bare `YYYY-MM-DD` taken as midnight.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let b = s.trim().as_bytes();
    if b.len() != 10 && b.len() != 19 {
        return None;
    }
    if b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    let date = NaiveDate::from_ymd_opt(digits(&b[0..4])? as i32, digits(&b[5..7])?, digits(&b[8..10])?)?;
    let time = if b.len() == 19 {
        if b[10] != b' ' || b[13] != b':' || b[16] != b':' {
            return None;
        }
        NaiveTime::from_hms_opt(digits(&b[11..13])?, digits(&b[14..16])?, digits(&b[17..19])?)?
    } else {
        NaiveTime::MIN
    };
    Some(date.and_time(time))
}

/// Splits the comma-separated check-in `date` field into timestamps.
///
/// An empty (or all-whitespace) field yields an empty list.
pub fn expand_checkin_dates(field: &str) -> Result<Vec<Timestamp>, ParseError> {
    if field.trim().is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(',')
        .map(|part| {
            parse_timestamp(part).ok_or_else(|| invalid("date", format!("unparseable timestamp `{}`", part.trim())))
        })
        .collect()
}

/// Parses a comma-separated elite-year string into a set.
pub fn parse_elite_field(field: &str) -> Result<BTreeSet<i32>, ParseError> {
    let mut years = BTreeSet::new();
    for part in field.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let year = parse_elite_year(part)?;
        years.insert(year);
    }
    Ok(years)
}

fn parse_elite_year(part: &str) -> Result<i32, ParseError> {
    if part.len() != 4 {
        return Err(invalid("elite", format!("`{part}` is not a 4-digit year")));
    }
    let year = digits(part.as_bytes()).ok_or_else(|| invalid("elite", format!("`{part}` is not a year")))? as i32;
    check_elite_year(year)
}

fn check_elite_year(year: i32) -> Result<i32, ParseError> {
    if (ELITE_YEAR_MIN..=ELITE_YEAR_MAX).contains(&year) {
        Ok(year)
    } else {
        Err(invalid(
            "elite",
            format!("year {year} outside {ELITE_YEAR_MIN}..={ELITE_YEAR_MAX}"),
        ))
    }
}

// Raw line shapes. Every field is optional so that missing keys can be
// reported by name rather than as a generic serde error; unknown keys are
// ignored.

#[derive(Deserialize)]
struct RawBusiness {
    business_id: Option<String>,
    name: Option<String>,
    city: Option<String>,
    state: Option<String>,
    stars: Option<f64>,
    categories: Option<Value>,
}

#[derive(Deserialize)]
struct RawReview {
    review_id: Option<String>,
    user_id: Option<String>,
    business_id: Option<String>,
    stars: Option<f64>,
    date: Option<String>,
    text: Option<String>,
}

#[derive(Deserialize)]
struct RawUser {
    user_id: Option<String>,
    yelping_since: Option<String>,
    elite: Option<Value>,
}

#[derive(Deserialize)]
struct RawTip {
    user_id: Option<String>,
    business_id: Option<String>,
    date: Option<String>,
    text: Option<String>,
}

#[derive(Deserialize)]
struct RawCheckin {
    business_id: Option<String>,
    date: Option<String>,
}

fn required(value: Option<String>, key: &'static str) -> Result<String, ParseError> {
    value.ok_or(ParseError::MissingKey(key))
}

fn required_id(value: Option<String>, key: &'static str) -> Result<String, ParseError> {
    let id = required(value, key)?;
    if id.is_empty() {
        return Err(invalid(key, "empty identifier"));
    }
    Ok(id)
}

fn required_timestamp(value: Option<String>, key: &'static str) -> Result<Timestamp, ParseError> {
    let raw = required(value, key)?;
    parse_timestamp(&raw).ok_or_else(|| invalid(key, format!("unparseable timestamp `{raw}`")))
}

fn from_json<'a, T: Deserialize<'a>>(line: &'a [u8]) -> Result<T, ParseError> {
    serde_json::from_slice(line).map_err(|e| ParseError::InvalidJson(e.to_string()))
}

fn parse_categories(value: Option<Value>) -> Result<Vec<String>, ParseError> {
    let split = |s: &str| {
        s.split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    match value {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::String(s)) => Ok(split(&s)),
        Some(Value::Array(items)) => items
            .into_iter()
            .map(|item| match item {
                Value::String(s) => Ok(s),
                other => Err(invalid("categories", format!("non-string entry {other}"))),
            })
            .collect(),
        Some(other) => Err(invalid("categories", format!("unexpected value {other}"))),
    }
}

fn parse_elite_value(value: Option<Value>) -> Result<BTreeSet<i32>, ParseError> {
    match value {
        None | Some(Value::Null) => Ok(BTreeSet::new()),
        Some(Value::String(s)) => parse_elite_field(&s),
        Some(Value::Array(items)) => items
            .into_iter()
            .map(|item| match item {
                Value::Number(n) => n
                    .as_i64()
                    .and_then(|y| i32::try_from(y).ok())
                    .ok_or_else(|| invalid("elite", format!("`{n}` is not a year")))
                    .and_then(check_elite_year),
                Value::String(s) => parse_elite_year(s.trim()),
                other => Err(invalid("elite", format!("unexpected entry {other}"))),
            })
            .collect(),
        Some(other) => Err(invalid("elite", format!("unexpected value {other}"))),
    }
}

/// Parses one NDJSON line of the given kind into a validated record.
pub fn parse_record(kind: RecordKind, line: &str) -> Result<Record, ParseError> {
    parse_record_bytes(kind, line.as_bytes())
}

/// Byte-slice variant of [`parse_record`]; invalid UTF-8 is reported as
/// invalid JSON.
pub fn parse_record_bytes(kind: RecordKind, line: &[u8]) -> Result<Record, ParseError> {
    match kind {
        RecordKind::Business => {
            let raw: RawBusiness = from_json(line)?;
            let business_id = required_id(raw.business_id, "business_id")?;
            let state_abbrev = required(raw.state, "state")?;
            let len = state_abbrev.chars().count();
            if !(2..=3).contains(&len) {
                return Err(invalid(
                    "state",
                    format!("`{state_abbrev}` is not a 2-3 character code"),
                ));
            }
            let stars = match raw.stars {
                None => None,
                Some(s) => Some(
                    HalfStars::from_f64(s)
                        .ok_or_else(|| invalid("stars", format!("{s} is not in 1.0..=5.0 by halves")))?,
                ),
            };
            Ok(Record::Business(BusinessRecord {
                business_id,
                name: raw.name.unwrap_or_default(),
                state_abbrev,
                city: raw.city.unwrap_or_default(),
                stars,
                categories: parse_categories(raw.categories)?,
            }))
        }
        RecordKind::Review => {
            let raw: RawReview = from_json(line)?;
            let review_id = required_id(raw.review_id, "review_id")?;
            let user_id = required_id(raw.user_id, "user_id")?;
            let business_id = required_id(raw.business_id, "business_id")?;
            let s = raw.stars.ok_or(ParseError::MissingKey("stars"))?;
            if s.fract() != 0.0 || !(1.0..=5.0).contains(&s) {
                return Err(invalid("stars", format!("{s} is not an integer in 1..=5")));
            }
            Ok(Record::Review(ReviewRecord {
                review_id,
                user_id,
                business_id,
                stars: s as u8,
                date: required_timestamp(raw.date, "date")?,
                text: raw.text.unwrap_or_default(),
            }))
        }
        RecordKind::User => {
            let raw: RawUser = from_json(line)?;
            Ok(Record::User(UserRecord {
                user_id: required_id(raw.user_id, "user_id")?,
                yelping_since: required_timestamp(raw.yelping_since, "yelping_since")?,
                elite_years: parse_elite_value(raw.elite)?,
            }))
        }
        RecordKind::Tip => {
            let raw: RawTip = from_json(line)?;
            Ok(Record::Tip(TipRecord {
                user_id: required_id(raw.user_id, "user_id")?,
                business_id: required_id(raw.business_id, "business_id")?,
                date: required_timestamp(raw.date, "date")?,
                text: raw.text.unwrap_or_default(),
            }))
        }
        RecordKind::Checkin => {
            let raw: RawCheckin = from_json(line)?;
            let business_id = required_id(raw.business_id, "business_id")?;
            let field = required(raw.date, "date")?;
            Ok(Record::Checkin(CheckinRecord {
                business_id,
                timestamps: expand_checkin_dates(&field)?,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).unwrap()
    }

    #[test]
    fn review_maps_fields() {
        let line = r#"{"review_id":"r1","user_id":"u1","business_id":"b1","stars":5.0,"date":"2010-06-01 10:00:00","text":"nice","useful":3}"#;
        let rec = parse_record(RecordKind::Review, line).unwrap();
        assert_eq!(
            rec,
            Record::Review(ReviewRecord {
                review_id: "r1".into(),
                user_id: "u1".into(),
                business_id: "b1".into(),
                stars: 5,
                date: ts("2010-06-01 10:00:00"),
                text: "nice".into(),
            })
        );
    }

    #[test]
    fn checkin_field_expands_per_comma() {
        let field = "2010-03-22 16:11:36, 2010-05-04 09:00:00";
        let line = format!(r#"{{"business_id":"b1","date":"{field}"}}"#);
        let Record::Checkin(c) = parse_record(RecordKind::Checkin, &line).unwrap() else {
            panic!("wrong variant");
        };
        let by_hand: Vec<&str> = field.split(", ").collect();
        assert_eq!(by_hand.len(), 2);
        assert_eq!(c.timestamps, vec![ts(by_hand[0]), ts(by_hand[1])]);
    }

    #[test]
    fn empty_checkin_field_is_empty_list() {
        let rec = parse_record(RecordKind::Checkin, r#"{"business_id":"b","date":""}"#).unwrap();
        assert_eq!(rec.into_checkin().unwrap().timestamps, vec![]);
    }

    #[test]
    fn business_without_id_is_missing_key() {
        let err = parse_record(RecordKind::Business, r#"{"name":"x","state":"NV","city":"Las Vegas"}"#).unwrap_err();
        assert_eq!(err, ParseError::MissingKey("business_id"));
    }

    #[test]
    fn out_of_range_stars_rejected() {
        let line = r#"{"review_id":"r","user_id":"u","business_id":"b","stars":6,"date":"2010-01-01"}"#;
        assert!(matches!(
            parse_record(RecordKind::Review, line),
            Err(ParseError::InvalidField { field: "stars", .. })
        ));
        let line = r#"{"business_id":"b","state":"NV","stars":4.25}"#;
        assert!(matches!(
            parse_record(RecordKind::Business, line),
            Err(ParseError::InvalidField { field: "stars", .. })
        ));
    }

    #[test]
    fn bad_date_and_bad_json() {
        let line = r#"{"user_id":"u","business_id":"b","date":"2010-02-30 00:00:00","text":""}"#;
        assert!(matches!(
            parse_record(RecordKind::Tip, line),
            Err(ParseError::InvalidField { field: "date", .. })
        ));
        assert!(matches!(
            parse_record(RecordKind::Tip, "{not json"),
            Err(ParseError::InvalidJson(_))
        ));
    }

    #[test]
    fn date_only_fallback_is_midnight() {
        assert_eq!(parse_timestamp("2019-12-31"), Some(ts("2019-12-31 00:00:00")));
        assert_eq!(parse_timestamp("2019-12-31 23:59:59"), Some(ts("2019-12-31 23:59:59")));
        assert_eq!(parse_timestamp("2019-12-31T23:59:59"), None);
        assert_eq!(parse_timestamp("2019-1-31"), None);
        assert_eq!(parse_timestamp("2019-12-31 24:00:00"), None);
    }

    #[test]
    fn elite_field_shapes() {
        assert_eq!(parse_elite_field("2012,2013").unwrap(), BTreeSet::from([2012, 2013]));
        assert_eq!(parse_elite_field("").unwrap(), BTreeSet::new());
        assert_eq!(parse_elite_field("2013,2013").unwrap(), BTreeSet::from([2013]));
        assert!(parse_elite_field("1999").is_err());
        assert!(parse_elite_field("20,20").is_err());

        let line = r#"{"user_id":"u","yelping_since":"2011-01-01 00:00:00","elite":null}"#;
        assert!(parse_record(RecordKind::User, line)
            .unwrap()
            .into_user()
            .unwrap()
            .elite_years
            .is_empty());
        let line = r#"{"user_id":"u","yelping_since":"2011-01-01 00:00:00","elite":[2014,2015]}"#;
        assert_eq!(
            parse_record(RecordKind::User, line)
                .unwrap()
                .into_user()
                .unwrap()
                .elite_years,
            BTreeSet::from([2014, 2015])
        );
    }

    #[test]
    fn business_categories_and_half_stars() {
        let line = r#"{"business_id":"b","name":"Cafe","city":"Toronto","state":"ON","stars":3.5,"categories":"Food, Coffee & Tea"}"#;
        let b = parse_record(RecordKind::Business, line)
            .unwrap()
            .into_business()
            .unwrap();
        assert_eq!(b.categories, vec!["Food", "Coffee & Tea"]);
        assert_eq!(b.stars.map(HalfStars::as_f64), Some(3.5));
        let line = r#"{"business_id":"b","state":"ONTARIO"}"#;
        assert!(parse_record(RecordKind::Business, line).is_err());
    }

    #[test]
    fn canonical_json_round_trips() {
        let line = r#"{"business_id":"b","name":"Cafe","city":"Toronto","state":"ON","stars":3.5,"categories":"Food, Coffee & Tea"}"#;
        let rec = parse_record(RecordKind::Business, line).unwrap();
        assert_eq!(
            parse_record(RecordKind::Business, &rec.to_canonical_json()).unwrap(),
            rec
        );
    }

    #[test]
    fn record_kind_names() {
        for kind in RecordKind::ALL {
            assert_eq!(kind.name().parse::<RecordKind>().unwrap(), kind);
        }
        assert!("photo".parse::<RecordKind>().is_err());
    }
}
