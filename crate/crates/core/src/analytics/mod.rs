//! The three aggregation pipelines.
//!
//! Every analysis follows the same shape: shard records across the
//! [`Engine`]'s workers, fold each shard into a partial key → count map,
//! merge the partials, then sort and emit on one thread. Partials can also be
//! built batch by batch and merged, which is how the CLI streams large files.

mod engine;
mod features;
mod geo;

pub use engine::{merge_partials, CountMap, Engine, EngineError, Partial};
pub use features::{elite_years, feature_partial, feature_performance, FeaturePartial, Measure, YearlyFeatureCounts};
pub use geo::{
    month_bucket, sentiment_breakdown, star_ratings, tip_sentiment, BusinessIndex, GeoOutput, GeoPartial,
    SentimentBreakdown, SentimentPartial, SentimentRow, StarPartial, StarRatings, StarRow, StateId, TipSentiment,
};
