use std::collections::BTreeSet;
use std::fmt;

use chrono::Datelike;
use serde::Serialize;

use super::engine::{CountMap, Engine, Partial};
use crate::records::{CheckinRecord, ReviewRecord, TipRecord, UserRecord};

/// The five per-year measures, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Measure {
    NewUsers,
    Reviews,
    EliteUsers,
    Tips,
    Checkins,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::NewUsers,
        Measure::Reviews,
        Measure::EliteUsers,
        Measure::Tips,
        Measure::Checkins,
    ];

    /// Chart series name.
    pub fn label(self) -> &'static str {
        match self {
            Measure::NewUsers => "New Users",
            Measure::Reviews => "Reviews",
            Measure::EliteUsers => "Elite Users",
            Measure::Tips => "Tips",
            Measure::Checkins => "Check-Ins",
        }
    }

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Measure::NewUsers => "new_users",
            Measure::Reviews => "reviews",
            Measure::EliteUsers => "elite_users",
            Measure::Tips => "tips",
            Measure::Checkins => "checkins",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Measure::ALL.into_iter().find(|m| m.label() == label)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One output row; a zero count is stored as `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YearlyFeatureCounts {
    pub year: i32,
    pub new_users: Option<u64>,
    pub reviews: Option<u64>,
    pub elite_users: Option<u64>,
    pub tips: Option<u64>,
    pub checkins: Option<u64>,
}

impl YearlyFeatureCounts {
    pub fn empty(year: i32) -> Self {
        YearlyFeatureCounts {
            year,
            new_users: None,
            reviews: None,
            elite_users: None,
            tips: None,
            checkins: None,
        }
    }

    pub fn get(&self, measure: Measure) -> Option<u64> {
        match measure {
            Measure::NewUsers => self.new_users,
            Measure::Reviews => self.reviews,
            Measure::EliteUsers => self.elite_users,
            Measure::Tips => self.tips,
            Measure::Checkins => self.checkins,
        }
    }

    pub fn set(&mut self, measure: Measure, value: Option<u64>) {
        let slot = match measure {
            Measure::NewUsers => &mut self.new_users,
            Measure::Reviews => &mut self.reviews,
            Measure::EliteUsers => &mut self.elite_users,
            Measure::Tips => &mut self.tips,
            Measure::Checkins => &mut self.checkins,
        };
        *slot = value;
    }
}

/// Years in which the user held elite status.
pub fn elite_years(user: &UserRecord) -> &BTreeSet<i32> {
    &user.elite_years
}

/// Partial counts keyed by (year, measure).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeaturePartial {
    counts: CountMap<(i32, Measure)>,
}

impl Partial for FeaturePartial {
    fn merge(self, other: Self) -> Self {
        FeaturePartial {
            counts: self.counts.merge(other.counts),
        }
    }
}

impl FeaturePartial {
    pub fn observe_user(&mut self, user: &UserRecord) {
        self.counts.incr((user.yelping_since.year(), Measure::NewUsers));
        for &year in elite_years(user) {
            self.counts.incr((year, Measure::EliteUsers));
        }
    }

    pub fn observe_review(&mut self, review: &ReviewRecord) {
        self.counts.incr((review.date.year(), Measure::Reviews));
    }

    pub fn observe_tip(&mut self, tip: &TipRecord) {
        self.counts.incr((tip.date.year(), Measure::Tips));
    }

    pub fn observe_checkin(&mut self, checkin: &CheckinRecord) {
        for ts in &checkin.timestamps {
            self.counts.incr((ts.year(), Measure::Checkins));
        }
    }

    pub fn count(&self, year: i32, measure: Measure) -> u64 {
        self.counts.get(&(year, measure))
    }

    /// One row per year from the first to the last observed year, gap years
    /// included with every measure null.
    pub fn into_rows(self) -> Vec<YearlyFeatureCounts> {
        let sorted = self.counts.into_sorted();
        let (Some(first), Some(last)) = (
            sorted.keys().next().map(|k| k.0),
            sorted.keys().next_back().map(|k| k.0),
        ) else {
            return Vec::new();
        };
        let mut rows: Vec<YearlyFeatureCounts> = (first..=last).map(YearlyFeatureCounts::empty).collect();
        for ((year, measure), n) in sorted {
            if n > 0 {
                rows[(year - first) as usize].set(measure, Some(n));
            }
        }
        rows
    }
}

/// Fold the four record streams into yearly counts.
pub fn feature_partial(
    users: &[UserRecord],
    reviews: &[ReviewRecord],
    tips: &[TipRecord],
    checkins: &[CheckinRecord],
    engine: &Engine,
) -> FeaturePartial {
    let u: FeaturePartial = engine.fold(users, FeaturePartial::observe_user);
    let r: FeaturePartial = engine.fold(reviews, FeaturePartial::observe_review);
    let t: FeaturePartial = engine.fold(tips, FeaturePartial::observe_tip);
    let c: FeaturePartial = engine.fold(checkins, FeaturePartial::observe_checkin);
    u.merge(r).merge(t).merge(c)
}

pub fn feature_performance(
    users: &[UserRecord],
    reviews: &[ReviewRecord],
    tips: &[TipRecord],
    checkins: &[CheckinRecord],
    engine: &Engine,
) -> Vec<YearlyFeatureCounts> {
    feature_partial(users, reviews, tips, checkins, engine).into_rows()
}
