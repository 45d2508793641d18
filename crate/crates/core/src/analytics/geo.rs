use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

use super::engine::{CountMap, Engine, Partial};
use crate::records::{BusinessRecord, ReviewRecord, Timestamp, TipRecord};
use crate::regionmap::{Region, RegionMapper};
use crate::sentiment::{score_tip, Lexicon, SentimentLabel};

/// Interned state code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(u32);

/// business_id → state code, built from the business file.
#[derive(Debug, Clone, Default)]
pub struct BusinessIndex {
    ids: HashMap<String, StateId>,
    states: Vec<String>,
    state_ids: HashMap<String, StateId>,
    businesses_per_state: Vec<u64>,
}

impl BusinessIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a BusinessRecord>) -> Self {
        let mut index = Self::new();
        for b in records {
            index.insert(b);
        }
        index
    }

    /// Adds a business. The first record for an id wins; returns `false` for
    /// a repeated id.
    pub fn insert(&mut self, business: &BusinessRecord) -> bool {
        if self.ids.contains_key(&business.business_id) {
            return false;
        }
        let state = match self.state_ids.get(&business.state_abbrev) {
            Some(&id) => id,
            None => {
                let id = StateId(self.states.len() as u32);
                self.states.push(business.state_abbrev.clone());
                self.businesses_per_state.push(0);
                self.state_ids.insert(business.state_abbrev.clone(), id);
                id
            }
        };
        self.businesses_per_state[state.0 as usize] += 1;
        self.ids.insert(business.business_id.clone(), state);
        true
    }

    /// `None` is a join miss.
    pub fn lookup(&self, business_id: &str) -> Option<StateId> {
        self.ids.get(business_id).copied()
    }

    pub fn state_code(&self, id: StateId) -> &str {
        &self.states[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Distinct state codes with their business counts, sorted by code.
    pub fn state_counts(&self) -> Vec<(&str, u64)> {
        let mut out: Vec<(&str, u64)> = self
            .states
            .iter()
            .map(String::as_str)
            .zip(self.businesses_per_state.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Truncates a timestamp to the first day of its month.
pub fn month_bucket(ts: &Timestamp) -> NaiveDate {
    NaiveDate::from_ymd_opt(ts.year(), ts.month(), 1).expect("first of month is always valid")
}

/// Partial geo-temporal counts keyed by (state, bucket key).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoPartial<K: Hash + Eq> {
    counts: CountMap<(StateId, K)>,
    join_misses: u64,
}

impl<K: Hash + Eq> Default for GeoPartial<K> {
    fn default() -> Self {
        GeoPartial {
            counts: CountMap::new(),
            join_misses: 0,
        }
    }
}

impl<K: Hash + Eq + Send> Partial for GeoPartial<K> {
    fn merge(self, other: Self) -> Self {
        GeoPartial {
            counts: self.counts.merge(other.counts),
            join_misses: self.join_misses + other.join_misses,
        }
    }
}

impl<K: Hash + Eq> GeoPartial<K> {
    fn observe(&mut self, index: &BusinessIndex, business_id: &str, key: impl FnOnce() -> K) {
        match index.lookup(business_id) {
            Some(state) => self.counts.incr((state, key())),
            None => self.join_misses += 1,
        }
    }

    pub fn join_misses(&self) -> u64 {
        self.join_misses
    }

    pub fn joined(&self) -> u64 {
        self.counts.total()
    }
}

/// Rows of one geo-temporal analysis plus the records it excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeoOutput<R> {
    pub rows: Vec<R>,
    /// Records whose business_id is absent from the business index.
    pub join_misses: u64,
    /// Records dropped because their state code is unmapped and the mapper
    /// policy is `drop`.
    pub unknown_dropped: u64,
}

fn finish_geo<K, R>(
    partial: GeoPartial<K>,
    index: &BusinessIndex,
    mapper: &RegionMapper,
    make_row: impl Fn(Region, K, u64) -> R,
) -> GeoOutput<R>
where
    K: Hash + Eq + Ord,
{
    let mut regions: HashMap<StateId, Option<Region>> = HashMap::new();
    let mut grouped: BTreeMap<(Region, K), u64> = BTreeMap::new();
    let mut unknown_dropped = 0;
    for ((state, key), n) in partial.counts {
        let region = regions
            .entry(state)
            .or_insert_with(|| mapper.region_for(index.state_code(state)));
        match region {
            // distinct codes may map to one region, so counts are re-summed
            Some(r) => *grouped.entry((r.clone(), key)).or_insert(0) += n,
            None => unknown_dropped += n,
        }
    }
    GeoOutput {
        rows: grouped.into_iter().map(|((r, k), n)| make_row(r, k, n)).collect(),
        join_misses: partial.join_misses,
        unknown_dropped,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SentimentRow {
    pub country: String,
    pub state: String,
    pub date: NaiveDate,
    pub label: SentimentLabel,
    pub count: u64,
}

pub type SentimentPartial = GeoPartial<(NaiveDate, SentimentLabel)>;

/// Tip → (state, day, label) counter.
pub struct TipSentiment<'a> {
    lexicon: &'a Lexicon,
    index: &'a BusinessIndex,
}

impl<'a> TipSentiment<'a> {
    pub fn new(lexicon: &'a Lexicon, index: &'a BusinessIndex) -> Self {
        TipSentiment { lexicon, index }
    }

    pub fn observe(&self, partial: &mut SentimentPartial, tip: &TipRecord) {
        partial.observe(self.index, &tip.business_id, || {
            (tip.date.date(), score_tip(self.lexicon, &tip.text).label)
        });
    }

    pub fn accumulate(&self, tips: &[TipRecord], engine: &Engine) -> SentimentPartial {
        engine.fold(tips, |p, t| self.observe(p, t))
    }

    pub fn finish(&self, partial: SentimentPartial, mapper: &RegionMapper) -> GeoOutput<SentimentRow> {
        finish_geo(partial, self.index, mapper, |r, (date, label), count| SentimentRow {
            country: r.country,
            state: r.region_name,
            date,
            label,
            count,
        })
    }
}

pub fn tip_sentiment(
    tips: &[TipRecord],
    lexicon: &Lexicon,
    index: &BusinessIndex,
    mapper: &RegionMapper,
    engine: &Engine,
) -> GeoOutput<SentimentRow> {
    let analysis = TipSentiment::new(lexicon, index);
    analysis.finish(analysis.accumulate(tips, engine), mapper)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StarRow {
    pub country: String,
    pub state: String,
    pub month: NaiveDate,
    pub stars: u8,
    pub count: u64,
}

pub type StarPartial = GeoPartial<(NaiveDate, u8)>;

/// Review → (state, month, stars) counter.
pub struct StarRatings<'a> {
    index: &'a BusinessIndex,
}

impl<'a> StarRatings<'a> {
    pub fn new(index: &'a BusinessIndex) -> Self {
        StarRatings { index }
    }

    pub fn observe(&self, partial: &mut StarPartial, review: &ReviewRecord) {
        partial.observe(self.index, &review.business_id, || {
            (month_bucket(&review.date), review.stars)
        });
    }

    pub fn accumulate(&self, reviews: &[ReviewRecord], engine: &Engine) -> StarPartial {
        engine.fold(reviews, |p, r| self.observe(p, r))
    }

    pub fn finish(&self, partial: StarPartial, mapper: &RegionMapper) -> GeoOutput<StarRow> {
        finish_geo(partial, self.index, mapper, |r, (month, stars), count| StarRow {
            country: r.country,
            state: r.region_name,
            month,
            stars,
            count,
        })
    }
}

pub fn star_ratings(
    reviews: &[ReviewRecord],
    index: &BusinessIndex,
    mapper: &RegionMapper,
    engine: &Engine,
) -> GeoOutput<StarRow> {
    let analysis = StarRatings::new(index);
    analysis.finish(analysis.accumulate(reviews, engine), mapper)
}

/// Share of tips per label across all rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SentimentBreakdown {
    pub negative: u64,
    pub neutral: u64,
    pub positive: u64,
}

impl SentimentBreakdown {
    pub fn count(&self, label: SentimentLabel) -> u64 {
        match label {
            SentimentLabel::Negative => self.negative,
            SentimentLabel::Neutral => self.neutral,
            SentimentLabel::Positive => self.positive,
        }
    }

    pub fn total(&self) -> u64 {
        self.negative + self.neutral + self.positive
    }

    /// Percentage of the total, rounded to 2 decimals; 0 for an empty total.
    pub fn percent(&self, label: SentimentLabel) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let pct = 100.0 * self.count(label) as f64 / total as f64;
        (pct * 100.0).round() / 100.0
    }
}

pub fn sentiment_breakdown(rows: &[SentimentRow]) -> SentimentBreakdown {
    let mut b = SentimentBreakdown::default();
    for row in rows {
        match row.label {
            SentimentLabel::Negative => b.negative += row.count,
            SentimentLabel::Neutral => b.neutral += row.count,
            SentimentLabel::Positive => b.positive += row.count,
        }
    }
    b
}
