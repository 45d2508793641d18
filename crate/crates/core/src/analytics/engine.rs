use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

/// Key → count map produced by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMap<K: Hash + Eq>(HashMap<K, u64>);

impl<K: Hash + Eq> Default for CountMap<K> {
    fn default() -> Self {
        CountMap(HashMap::new())
    }
}

impl<K: Hash + Eq> CountMap<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K, n: u64) {
        *self.0.entry(key).or_insert(0) += n;
    }

    pub fn incr(&mut self, key: K) {
        self.add(key, 1);
    }

    pub fn get(&self, key: &K) -> u64 {
        self.0.get(key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn into_sorted(self) -> BTreeMap<K, u64>
    where
        K: Ord,
    {
        self.0.into_iter().collect()
    }
}

impl<K: Hash + Eq> FromIterator<(K, u64)> for CountMap<K> {
    fn from_iter<I: IntoIterator<Item = (K, u64)>>(iter: I) -> Self {
        let mut map = CountMap::new();
        for (k, n) in iter {
            map.add(k, n);
        }
        map
    }
}

impl<K: Hash + Eq> IntoIterator for CountMap<K> {
    type Item = (K, u64);
    type IntoIter = std::collections::hash_map::IntoIter<K, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// Keywise sum of two partial aggregates. The smaller map is folded into the
/// larger one.
pub fn merge_partials<K: Hash + Eq>(a: CountMap<K>, b: CountMap<K>) -> CountMap<K> {
    let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    for (k, n) in small.0 {
        big.add(k, n);
    }
    big
}

/// Per-worker accumulator that can be combined with another of its kind.
///
/// `merge` must be commutative and associative with `Default` as identity.
pub trait Partial: Default + Send {
    fn merge(self, other: Self) -> Self;
}

impl<K: Hash + Eq + Send> Partial for CountMap<K> {
    fn merge(self, other: Self) -> Self {
        merge_partials(self, other)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("worker count must be at least 1")]
    ZeroWorkers,
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] ThreadPoolBuildError),
}

/// Fixed-size worker pool running shard → partial → merge folds.
pub struct Engine {
    pool: ThreadPool,
    workers: usize,
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self, EngineError> {
        if workers == 0 {
            return Err(EngineError::ZeroWorkers);
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("yelp-worker-{i}"))
            .build()?;
        Ok(Engine { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn pool(&self) -> &ThreadPool {
        &self.pool
    }

    /// Shards `items`, folds each shard into a fresh partial with `observe`,
    /// and merges the partials.
    pub fn fold<T, P, F>(&self, items: &[T], observe: F) -> P
    where
        T: Sync,
        P: Partial,
        F: Fn(&mut P, &T) + Sync,
    {
        if items.is_empty() {
            return P::default();
        }
        let shard = items.len().div_ceil(self.workers * 4).max(512);
        self.pool.install(|| {
            items
                .par_chunks(shard)
                .map(|chunk| {
                    let mut partial = P::default();
                    for item in chunk {
                        observe(&mut partial, item);
                    }
                    partial
                })
                .reduce(P::default, P::merge)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map_strategy() -> impl Strategy<Value = CountMap<u8>> {
        prop::collection::vec((0u8..20, 1u64..1000), 0..30).prop_map(CountMap::from_iter)
    }

    #[test]
    fn empty_is_identity() {
        let x: CountMap<&str> = [("a", 2), ("b", 5)].into_iter().collect();
        assert_eq!(merge_partials(x.clone(), CountMap::new()), x);
        assert_eq!(merge_partials(CountMap::new(), x.clone()), x);
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(matches!(Engine::new(0), Err(EngineError::ZeroWorkers)));
    }

    #[test]
    fn sharded_fold_matches_sequential() {
        let items: Vec<u32> = (0..10_000).map(|i| (i * 7919) % 113).collect();
        let mut expected = CountMap::new();
        for &i in &items {
            expected.incr(i % 17);
        }
        for workers in [1, 4] {
            let engine = Engine::new(workers).unwrap();
            let got: CountMap<u32> = engine.fold(&items, |p: &mut CountMap<u32>, &i| p.incr(i % 17));
            assert_eq!(got, expected);
        }
    }

    proptest! {
        #[test]
        fn merge_commutes(a in map_strategy(), b in map_strategy()) {
            prop_assert_eq!(merge_partials(a.clone(), b.clone()), merge_partials(b, a));
        }

        #[test]
        fn merge_associates(a in map_strategy(), b in map_strategy(), c in map_strategy()) {
            let left = merge_partials(merge_partials(a.clone(), b.clone()), c.clone());
            let right = merge_partials(a, merge_partials(b, c));
            prop_assert_eq!(left, right);
        }

        #[test]
        fn merge_preserves_total(a in map_strategy(), b in map_strategy()) {
            let total = a.total() + b.total();
            prop_assert_eq!(merge_partials(a, b).total(), total);
        }
    }
}
