//! Seeded sample boxes and an order-preserving parallel map.
//!
//! Every sample index gets its own ChaCha stream derived from `(seed, index)`,
//! so the set of points never depends on evaluation order or thread count.

use std::env;
use std::num::NonZeroUsize;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Point;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "GEOLAB_THREADS";

/// Axis-aligned box over named coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    ranges: Vec<(String, f64, f64)>,
}

impl Domain {
    pub fn new() -> Self {
        Domain { ranges: Vec::new() }
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.set(name, lo, hi);
        self
    }

    pub fn set(&mut self, name: &str, lo: f64, hi: f64) {
        assert!(lo <= hi, "empty range for {name}");
        if let Some(r) = self.ranges.iter_mut().find(|r| r.0 == name) {
            r.1 = lo;
            r.2 = hi;
        } else {
            self.ranges.push((name.to_string(), lo, hi));
        }
    }

    /// Same box over `coords`, using `[lo, hi]` for coordinates without a range.
    pub fn uniform<S: AsRef<str>>(coords: &[S], lo: f64, hi: f64) -> Self {
        let mut d = Domain::new();
        for c in coords {
            d.set(c.as_ref(), lo, hi);
        }
        d
    }

    pub fn range(&self, name: &str) -> Option<(f64, f64)> {
        self.ranges.iter().find(|r| r.0 == name).map(|r| (r.1, r.2))
    }

    pub fn ranges(&self) -> &[(String, f64, f64)] {
        &self.ranges
    }

    pub fn center(&self) -> Point {
        self.ranges.iter().map(|(n, lo, hi)| (n.clone(), 0.5 * (lo + hi))).collect()
    }

    /// Restricts (and orders) the box to `coords`, filling gaps with `fallback`.
    pub fn for_chart<S: AsRef<str>>(&self, coords: &[S], fallback: (f64, f64)) -> Domain {
        let mut d = Domain::new();
        for c in coords {
            let (lo, hi) = self.range(c.as_ref()).unwrap_or(fallback);
            d.set(c.as_ref(), lo, hi);
        }
        d
    }

    /// Point number `index` of the seeded sequence.
    pub fn sample_at(&self, seed: u64, index: u64) -> Point {
        let mut rng = sample_rng(seed, index);
        self.ranges
            .iter()
            .map(|(n, lo, hi)| {
                let v = if hi > lo { rng.gen_range(*lo..*hi) } else { *lo };
                (n.clone(), v)
            })
            .collect()
    }

    pub fn samples(&self, count: usize, seed: u64) -> Vec<Point> {
        (0..count as u64).map(|i| self.sample_at(seed, i)).collect()
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self::new()
    }
}

/// Independent RNG stream for one sample index.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn thread_count() -> usize {
    let available = thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1);
    env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .map(|n| n.min(available.max(1)))
        .unwrap_or(available)
}

/// Maps `f` over `items` on up to [`thread_count`] threads, preserving order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = thread_count().min(items.len());
    if threads <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}
