//! Seeded fixture generator and a naive reference implementation of the
//! three analyses. The reference works from the generator's ground truth
//! (plain tuples, linear scans, BTreeMaps) and shares no code with the crate.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// (year, month, day, hour, minute, second)
pub type Ts = (i32, u32, u32, u32, u32, u32);

pub fn fmt_ts(t: &Ts) -> String {
    format!("{:04}-{:02}-{:02} {:02}:{:02}:{:02}", t.0, t.1, t.2, t.3, t.4, t.5)
}

pub const MAPPER_TSV: &str = "# fixture mapper\nNV\tUSA\tNevada\nAZ\tUSA\tArizona\nCA\tUSA\tCalifornia\nON\tCanada\tOntario\nQC\tCanada\tQuebec\nEDH\tUnited Kingdom\tCity of Edinburgh\nNEV\tUSA\tNevada\n";
pub const LEXICON_TSV: &str = "# fixture lexicon\ngood\tpositive\ngreat\tpositive\nlove\tpositive\ntasty\tpositive\nbad\tnegative\nawful\tnegative\nslow\tnegative\nrude\tnegative\n";

const KNOWN_STATES: &[&str] = &["NV", "AZ", "CA", "ON", "QC", "EDH", "NEV"];
const UNKNOWN_STATES: &[&str] = &["XGL", "ZZ"];
const VOCAB: &[&str] = &[
    "good", "Good", "GREAT", "great", "love", "tasty", "bad", "BAD", "awful", "slow", "rude", "food", "the", "service",
    "place", "5", "star", "coffee", "café", "ok", "goodness", "badly", "x1",
];
const PUNCT: &[&str] = &[" ", " ", " ", ", ", "! ", "... ", "-", " (", ") ", "\t", "/"];

#[derive(Debug, Clone)]
pub struct GenBusiness {
    pub id: String,
    pub state: String,
}

#[derive(Debug, Clone)]
pub struct GenUser {
    pub id: String,
    pub since: Ts,
    /// May contain duplicates; the elite field is written verbatim.
    pub elite: Vec<i32>,
}

#[derive(Debug, Clone)]
pub struct GenReview {
    pub id: String,
    pub business: String,
    pub stars: u8,
    pub at: Ts,
}

#[derive(Debug, Clone)]
pub struct GenTip {
    pub business: String,
    pub at: Ts,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct GenCheckin {
    pub business: String,
    pub stamps: Vec<Ts>,
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureShape {
    pub businesses: usize,
    pub users: usize,
    pub reviews: usize,
    pub tips: usize,
    pub checkins: usize,
    /// Probability of inserting a malformed line after each valid one.
    pub malformed_rate: f64,
    /// Probability that a review/tip/checkin points at a missing business.
    pub join_miss_rate: f64,
    /// Probability that a business uses an unmapped state code.
    pub unknown_state_rate: f64,
    pub first_year: i32,
    pub last_year: i32,
    /// Elite years are drawn from `elite_from..=last_year`.
    pub elite_from: i32,
    /// Earliest year for tip dates.
    pub tips_from: i32,
    /// Earliest year for check-in timestamps.
    pub checkins_from: i32,
}

impl FixtureShape {
    pub fn total(&self) -> usize {
        self.businesses + self.users + self.reviews + self.tips + self.checkins
    }

    /// Random shape with at most `max_records` valid records.
    pub fn random(rng: &mut StdRng, max_records: usize) -> Self {
        let total = rng.gen_range(0..=max_records);
        let mut weights: Vec<f64> = (0..5).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        let part = |w: f64| ((total as f64) * w).floor() as usize;
        let first_year = rng.gen_range(2004..2012);
        let last_year = rng.gen_range(first_year..2021);
        FixtureShape {
            businesses: part(weights[0]).max(usize::from(total > 0)),
            users: part(weights[1]),
            reviews: part(weights[2]),
            tips: part(weights[3]),
            checkins: part(weights[4]),
            malformed_rate: rng.gen_range(0.0..0.05),
            join_miss_rate: rng.gen_range(0.0..0.1),
            unknown_state_rate: rng.gen_range(0.0..0.2),
            first_year,
            last_year,
            elite_from: rng.gen_range(first_year..=last_year),
            tips_from: first_year,
            checkins_from: first_year,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Fixture {
    pub businesses: Vec<GenBusiness>,
    pub users: Vec<GenUser>,
    pub reviews: Vec<GenReview>,
    pub tips: Vec<GenTip>,
    pub checkins: Vec<GenCheckin>,
    pub business_lines: Vec<String>,
    pub user_lines: Vec<String>,
    pub review_lines: Vec<String>,
    pub tip_lines: Vec<String>,
    pub checkin_lines: Vec<String>,
    pub malformed: [usize; 5],
}

fn ts(rng: &mut StdRng, first: i32, last: i32) -> Ts {
    let year = rng.gen_range(first..=last);
    let month = rng.gen_range(1..=12);
    let days = match month {
        2 if year % 4 == 0 && (year % 100 != 0 || year % 400 == 0) => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    };
    (
        year,
        month,
        rng.gen_range(1..=days),
        rng.gen_range(0..24),
        rng.gen_range(0..60),
        rng.gen_range(0..60),
    )
}

fn text(rng: &mut StdRng) -> String {
    let n = rng.gen_range(0..12);
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(VOCAB.choose(rng).unwrap());
        s.push_str(PUNCT.choose(rng).unwrap());
    }
    s
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).unwrap()
}

const BAD_LINES: &[&str] = &[
    "{broken",
    "",
    "[1,2,3]",
    r#"{"unrelated":true}"#,
    r#"{"business_id":"","state":"NV","user_id":"","review_id":"","date":"","yelping_since":""}"#,
];

fn maybe_malformed(rng: &mut StdRng, rate: f64, lines: &mut Vec<String>, count: &mut usize) {
    if rng.gen_bool(rate) {
        lines.push(BAD_LINES.choose(rng).unwrap().to_string());
        *count += 1;
    }
}

pub fn generate(seed: u64, shape: &FixtureShape) -> Fixture {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut fx = Fixture::default();
    let (y0, y1) = (shape.first_year, shape.last_year);

    for i in 0..shape.businesses {
        let state = if rng.gen_bool(shape.unknown_state_rate) {
            UNKNOWN_STATES.choose(&mut rng).unwrap()
        } else {
            KNOWN_STATES.choose(&mut rng).unwrap()
        };
        // occasional repeated id: the first record must win
        let id = if i > 0 && rng.gen_bool(0.01) {
            fx.businesses[rng.gen_range(0..i)].id.clone()
        } else {
            format!("biz{i:05}")
        };
        let b = GenBusiness {
            id,
            state: state.to_string(),
        };
        fx.business_lines.push(format!(
            r#"{{"business_id":{},"name":"Shop {i}","city":"Town","state":{},"stars":{}.{},"categories":"Food, Bars","is_open":1}}"#,
            json_str(&b.id),
            json_str(&b.state),
            rng.gen_range(1..5),
            if rng.gen_bool(0.5) { 5 } else { 0 }
        ));
        fx.businesses.push(b);
        maybe_malformed(
            &mut rng,
            shape.malformed_rate,
            &mut fx.business_lines,
            &mut fx.malformed[0],
        );
    }

    let business_ref = |rng: &mut StdRng, fx: &Fixture| -> String {
        if fx.businesses.is_empty() || rng.gen_bool(shape.join_miss_rate) {
            format!("ghost{}", rng.gen_range(0..50))
        } else {
            fx.businesses.choose(rng).unwrap().id.clone()
        }
    };

    for i in 0..shape.users {
        let since = ts(&mut rng, y0, y1);
        let n = rng.gen_range(0..4);
        let elite: Vec<i32> = (0..n).map(|_| rng.gen_range(shape.elite_from..=y1)).collect();
        let elite_field = elite.iter().map(i32::to_string).collect::<Vec<_>>().join(",");
        fx.user_lines.push(format!(
            r#"{{"user_id":"user{i}","name":"U","yelping_since":{},"elite":{},"review_count":3}}"#,
            json_str(&fmt_ts(&since)),
            json_str(&elite_field)
        ));
        fx.users.push(GenUser {
            id: format!("user{i}"),
            since,
            elite,
        });
        maybe_malformed(&mut rng, shape.malformed_rate, &mut fx.user_lines, &mut fx.malformed[2]);
    }

    for i in 0..shape.reviews {
        let r = GenReview {
            id: format!("rev{i}"),
            business: business_ref(&mut rng, &fx),
            stars: rng.gen_range(1..=5),
            at: ts(&mut rng, y0, y1),
        };
        fx.review_lines.push(format!(
            r#"{{"review_id":{},"user_id":"user0","business_id":{},"stars":{}.0,"useful":0,"date":{},"text":{}}}"#,
            json_str(&r.id),
            json_str(&r.business),
            r.stars,
            json_str(&fmt_ts(&r.at)),
            json_str(&text(&mut rng))
        ));
        fx.reviews.push(r);
        maybe_malformed(
            &mut rng,
            shape.malformed_rate,
            &mut fx.review_lines,
            &mut fx.malformed[1],
        );
    }

    for _ in 0..shape.tips {
        let t = GenTip {
            business: business_ref(&mut rng, &fx),
            at: ts(&mut rng, shape.tips_from.max(y0), y1),
            text: text(&mut rng),
        };
        fx.tip_lines.push(format!(
            r#"{{"user_id":"user1","business_id":{},"text":{},"date":{},"compliment_count":0}}"#,
            json_str(&t.business),
            json_str(&t.text),
            json_str(&fmt_ts(&t.at))
        ));
        fx.tips.push(t);
        maybe_malformed(&mut rng, shape.malformed_rate, &mut fx.tip_lines, &mut fx.malformed[3]);
    }

    for _ in 0..shape.checkins {
        let n = rng.gen_range(0..6);
        let c = GenCheckin {
            business: business_ref(&mut rng, &fx),
            stamps: (0..n).map(|_| ts(&mut rng, shape.checkins_from.max(y0), y1)).collect(),
        };
        let field = c.stamps.iter().map(fmt_ts).collect::<Vec<_>>().join(", ");
        fx.checkin_lines.push(format!(
            r#"{{"business_id":{},"date":{}}}"#,
            json_str(&c.business),
            json_str(&field)
        ));
        fx.checkins.push(c);
        maybe_malformed(
            &mut rng,
            shape.malformed_rate,
            &mut fx.checkin_lines,
            &mut fx.malformed[4],
        );
    }
    fx
}

impl Fixture {
    /// Writes the five dataset files plus `mapper.tsv` and `lexicon.tsv`.
    pub fn write_to(&self, dir: &Path) {
        fs::create_dir_all(dir).unwrap();
        for (name, lines) in [
            ("business.json", &self.business_lines),
            ("user.json", &self.user_lines),
            ("review.json", &self.review_lines),
            ("tip.json", &self.tip_lines),
            ("checkin.json", &self.checkin_lines),
        ] {
            let mut body = String::new();
            for l in lines {
                writeln!(body, "{l}").unwrap();
            }
            fs::write(dir.join(name), body).unwrap();
        }
        fs::write(dir.join("mapper.tsv"), MAPPER_TSV).unwrap();
        fs::write(dir.join("lexicon.tsv"), LEXICON_TSV).unwrap();
    }

    pub fn checkin_stamps(&self) -> usize {
        self.checkins.iter().map(|c| c.stamps.len()).sum()
    }
}

// ---------------------------------------------------------------------------
// Reference implementation

fn oracle_mapper() -> Vec<(String, String, String)> {
    MAPPER_TSV
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[0].to_string(), c[1].to_string(), c[2].to_string())
        })
        .collect()
}

fn oracle_lexicon() -> Vec<(String, i64)> {
    LEXICON_TSV
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[0].to_string(), if c[1] == "positive" { 1 } else { -1 })
        })
        .collect()
}

/// Lowercase the whole text, blank out non-alphanumerics, split on spaces.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned
        .split(' ')
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// 0 = negative, 1 = neutral, 2 = positive.
pub fn oracle_label(text: &str, lexicon: &[(String, i64)]) -> u8 {
    let mut sum = 0i64;
    for tok in oracle_tokens(text) {
        for (w, p) in lexicon {
            if *w == tok {
                sum += p;
            }
        }
    }
    if sum > 0 {
        2
    } else if sum < 0 {
        0
    } else {
        1
    }
}

pub fn label_name(l: u8) -> &'static str {
    ["negative", "neutral", "positive"][l as usize]
}

fn state_of<'a>(fx: &'a Fixture, business: &str) -> Option<&'a str> {
    fx.businesses
        .iter()
        .find(|b| b.id == business)
        .map(|b| b.state.as_str())
}

/// `None` when the code is unmapped and `drop_unknown` is set.
fn region_of(code: &str, drop_unknown: bool) -> Option<(String, String)> {
    for (abbrev, country, region) in oracle_mapper() {
        if abbrev == code {
            return Some((country, region));
        }
    }
    if drop_unknown {
        None
    } else {
        Some(("Unknown".to_string(), code.to_string()))
    }
}

/// Per-year counts in column order (new users, reviews, elite, tips, check-ins).
pub type OracleFeatureRow = (i32, [Option<u64>; 5]);

pub fn oracle_features(fx: &Fixture) -> Vec<OracleFeatureRow> {
    let mut counts: BTreeMap<i32, [u64; 5]> = BTreeMap::new();
    for u in &fx.users {
        counts.entry(u.since.0).or_default()[0] += 1;
        let mut seen: Vec<i32> = Vec::new();
        for &y in &u.elite {
            if !seen.contains(&y) {
                seen.push(y);
                counts.entry(y).or_default()[2] += 1;
            }
        }
    }
    for r in &fx.reviews {
        counts.entry(r.at.0).or_default()[1] += 1;
    }
    for t in &fx.tips {
        counts.entry(t.at.0).or_default()[3] += 1;
    }
    for c in &fx.checkins {
        for s in &c.stamps {
            counts.entry(s.0).or_default()[4] += 1;
        }
    }
    let (Some(&first), Some(&last)) = (counts.keys().next(), counts.keys().last()) else {
        return Vec::new();
    };
    (first..=last)
        .map(|y| {
            let c = counts.get(&y).copied().unwrap_or_default();
            (y, c.map(|n| if n == 0 { None } else { Some(n) }))
        })
        .collect()
}

/// ((country, state, "YYYY-MM-DD", label name), count)
pub type OracleGeoRow = (String, String, String, String, u64);

#[derive(Debug, Default, PartialEq, Eq)]
pub struct OracleGeo {
    pub rows: Vec<OracleGeoRow>,
    pub join_misses: u64,
    pub unknown_dropped: u64,
}

pub fn oracle_tip_sentiment(fx: &Fixture, drop_unknown: bool) -> OracleGeo {
    let lexicon = oracle_lexicon();
    let mut out = OracleGeo::default();
    let mut groups: BTreeMap<(String, String, String, u8), u64> = BTreeMap::new();
    for t in &fx.tips {
        let Some(code) = state_of(fx, &t.business) else {
            out.join_misses += 1;
            continue;
        };
        let Some((country, region)) = region_of(code, drop_unknown) else {
            out.unknown_dropped += 1;
            continue;
        };
        let day = format!("{:04}-{:02}-{:02}", t.at.0, t.at.1, t.at.2);
        *groups
            .entry((country, region, day, oracle_label(&t.text, &lexicon)))
            .or_default() += 1;
    }
    out.rows = groups
        .into_iter()
        .map(|((c, s, d, l), n)| (c, s, d, label_name(l).to_string(), n))
        .collect();
    out
}

pub fn oracle_star_ratings(fx: &Fixture, drop_unknown: bool) -> OracleGeo {
    let mut out = OracleGeo::default();
    let mut groups: BTreeMap<(String, String, String, u8), u64> = BTreeMap::new();
    for r in &fx.reviews {
        let Some(code) = state_of(fx, &r.business) else {
            out.join_misses += 1;
            continue;
        };
        let Some((country, region)) = region_of(code, drop_unknown) else {
            out.unknown_dropped += 1;
            continue;
        };
        let month = format!("{:04}-{:02}-01", r.at.0, r.at.1);
        *groups.entry((country, region, month, r.stars)).or_default() += 1;
    }
    out.rows = groups
        .into_iter()
        .map(|((c, s, m, stars), n)| (c, s, m, stars.to_string(), n))
        .collect();
    out
}

/// Percentages rounded to 2 decimals, in (negative, neutral, positive) order.
pub fn oracle_breakdown(rows: &[OracleGeoRow]) -> [f64; 3] {
    let mut c = [0u64; 3];
    for (_, _, _, label, n) in rows {
        let i = ["negative", "neutral", "positive"]
            .iter()
            .position(|l| l == label)
            .unwrap();
        c[i] += n;
    }
    let total: u64 = c.iter().sum();
    c.map(|n| {
        if total == 0 {
            0.0
        } else {
            (10000.0 * n as f64 / total as f64).round() / 100.0
        }
    })
}
