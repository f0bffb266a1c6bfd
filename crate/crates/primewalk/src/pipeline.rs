//! Segment sieving on a bounded thread pool with in-order hand-off.
//!
//! Workers claim segment indices and sieve ahead of the consumer, but never
//! more than `window` segments past the last one delivered. The consumer sees
//! segments strictly in index order, so results do not depend on the pool
//! size.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::{Condvar, Mutex};
use std::thread;

use primewalk_core::prime_stream::{SegmentPlan, SieveSegment};

/// Threads that sieve; 0 or 1 sieves on the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SievePool {
    pub threads: usize,
}

impl SievePool {
    pub fn new(threads: usize) -> Self {
        Self { threads }
    }

    /// Call `consume` on every segment of `plan`, in order.
    pub fn for_each_segment<E, F>(&self, plan: &SegmentPlan, mut consume: F) -> Result<(), E>
    where
        E: Send,
        F: FnMut(&SieveSegment) -> Result<(), E>,
    {
        if self.threads <= 1 || plan.len() <= 1 {
            let mut segment = SieveSegment::default();
            for k in 0..plan.len() {
                plan.sieve_into(k, &mut segment);
                consume(&segment)?;
            }
            return Ok(());
        }

        let window = 2 * self.threads;
        let next_claim = AtomicUsize::new(0);
        let cancelled = AtomicBool::new(false);
        let delivered = Mutex::new(0usize);
        let progress = Condvar::new();
        let (tx, rx) = mpsc::channel::<(usize, SieveSegment)>();

        thread::scope(|scope| {
            for _ in 0..self.threads {
                let tx = tx.clone();
                let (next_claim, cancelled, delivered, progress) =
                    (&next_claim, &cancelled, &delivered, &progress);
                scope.spawn(move || loop {
                    let k = next_claim.fetch_add(1, Ordering::Relaxed);
                    if k >= plan.len() {
                        break;
                    }
                    {
                        let mut done = delivered.lock().unwrap();
                        while k >= *done + window && !cancelled.load(Ordering::Relaxed) {
                            done = progress.wait(done).unwrap();
                        }
                    }
                    if cancelled.load(Ordering::Relaxed) || tx.send((k, plan.sieve(k))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);

            let mut pending = BTreeMap::new();
            let mut result = Ok(());
            'deliver: for k in 0..plan.len() {
                let segment = loop {
                    if let Some(segment) = pending.remove(&k) {
                        break segment;
                    }
                    match rx.recv() {
                        Ok((i, segment)) => {
                            pending.insert(i, segment);
                        }
                        Err(_) => unreachable!("sieve workers exited before segment {k}"),
                    }
                };
                if let Err(e) = consume(&segment) {
                    result = Err(e);
                    break 'deliver;
                }
                *delivered.lock().unwrap() = k + 1;
                progress.notify_all();
            }
            cancelled.store(true, Ordering::Relaxed);
            progress.notify_all();
            drop(rx);
            result
        })
    }

    /// Number of primes in the plan's range other than 2 and 5.
    pub fn count_walk_primes(&self, plan: &SegmentPlan) -> u64 {
        let mut total = 0;
        self.for_each_segment(plan, |segment| {
            total += segment.walk_prime_count();
            Ok::<_, std::convert::Infallible>(())
        })
        .unwrap_or_else(|never| match never {});
        total
    }
}

impl Default for SievePool {
    fn default() -> Self {
        Self::new(1)
    }
}

/// `count_walk_primes(limit)` sieved on `pool`.
pub fn count_walk_primes(limit: u64, segment_flags: usize, pool: SievePool) -> u64 {
    pool.count_walk_primes(&SegmentPlan::new(2, limit, segment_flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use primewalk_core::prime_stream::{count_walk_primes as sequential, PrimeEvents};

    #[test]
    fn pool_size_is_invisible() {
        let plan = SegmentPlan::new(2, 300_000, 1 << 10);
        let expected: Vec<u64> = PrimeEvents::new(300_000).map(|e| e.prime).collect();
        for threads in [1, 2, 3, 8] {
            let mut got = Vec::new();
            SievePool::new(threads)
                .for_each_segment(&plan, |s| {
                    got.extend(s.events().map(|e| e.prime));
                    Ok::<_, ()>(())
                })
                .unwrap();
            assert_eq!(got, expected, "threads = {threads}");
        }
        assert_eq!(
            count_walk_primes(300_000, 1 << 9, SievePool::new(4)),
            sequential(300_000)
        );
    }

    #[test]
    fn consumer_error_stops_the_pool() {
        let plan = SegmentPlan::new(2, 1_000_000, 1 << 8);
        let mut seen = 0;
        let result = SievePool::new(4).for_each_segment(&plan, |_| {
            seen += 1;
            if seen == 5 {
                Err("stop")
            } else {
                Ok(())
            }
        });
        assert_eq!(result, Err("stop"));
        assert_eq!(seen, 5);
    }
}
