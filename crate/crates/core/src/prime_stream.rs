//! Segmented sieve of Eratosthenes and the terminal-digit event stream.
//!
//! Segments store odd numbers only, one bit each, so a segment of
//! `segment_flags` bits spans `2 * segment_flags` integers. Memory stays flat
//! at any limit: the base primes up to `sqrt(limit)` plus one segment buffer.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Default number of odd-number flags per segment (512 KiB of bits).
pub const DEFAULT_SEGMENT_FLAGS: usize = 1 << 22;

/// Last decimal digit of a prime other than 2 and 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum TerminalDigit {
    One = 1,
    Three = 3,
    Seven = 7,
    Nine = 9,
}

impl TerminalDigit {
    pub const ALL: [TerminalDigit; 4] = [Self::One, Self::Three, Self::Seven, Self::Nine];

    pub fn new(digit: u64) -> Result<Self> {
        match digit {
            1 => Ok(Self::One),
            3 => Ok(Self::Three),
            7 => Ok(Self::Seven),
            9 => Ok(Self::Nine),
            other => Err(Error::InvalidDigit(other)),
        }
    }

    /// Terminal digit of `n`, or `None` when `n mod 10` is not 1, 3, 7 or 9.
    #[inline]
    pub fn of(n: u64) -> Option<Self> {
        match n % 10 {
            1 => Some(Self::One),
            3 => Some(Self::Three),
            7 => Some(Self::Seven),
            9 => Some(Self::Nine),
            _ => None,
        }
    }

    #[inline]
    pub fn value(self) -> u8 {
        self as u8
    }

    /// Position in [`TerminalDigit::ALL`].
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Self::One => 0,
            Self::Three => 1,
            Self::Seven => 2,
            Self::Nine => 3,
        }
    }
}

impl core::fmt::Display for TerminalDigit {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// One prime that drives a walk step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeDigitEvent {
    pub prime: u64,
    pub digit: TerminalDigit,
}

impl PrimeDigitEvent {
    /// Returns `None` for 2 and 5 and for any `n` whose last digit cannot end
    /// a walk prime. Primality is the caller's business.
    #[inline]
    pub fn from_prime(prime: u64) -> Option<Self> {
        if prime == 5 {
            return None;
        }
        TerminalDigit::of(prime).map(|digit| Self { prime, digit })
    }
}

/// All primes `<= limit_sqrt`, ascending. Plain sieve; only used for the
/// base primes of a segmented run, so `limit_sqrt` is at most a few million.
pub fn base_primes(limit_sqrt: u64) -> Vec<u64> {
    if limit_sqrt < 2 {
        return Vec::new();
    }
    let n = limit_sqrt as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Primality flags for the integers in `[lo, hi)`.
///
/// Only odd numbers are stored; 2 is tracked separately.
#[derive(Debug, Clone, Default)]
pub struct SieveSegment {
    lo: u64,
    hi: u64,
    first_odd: u64,
    nbits: usize,
    has_two: bool,
    words: Vec<u64>,
}

impl SieveSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// Number of stored flags (odd numbers in range).
    pub fn flag_count(&self) -> usize {
        self.nbits
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n < self.lo || n >= self.hi {
            return false;
        }
        if n == 2 {
            return self.has_two;
        }
        if n % 2 == 0 {
            return false;
        }
        let i = ((n - self.first_odd) / 2) as usize;
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Number of primes in `[lo, hi)`.
    pub fn count(&self) -> u64 {
        let odd: u64 = self.words.iter().map(|w| u64::from(w.count_ones())).sum();
        odd + u64::from(self.has_two)
    }

    /// Number of primes in `[lo, hi)` other than 2 and 5.
    pub fn walk_prime_count(&self) -> u64 {
        let mut count = self.count();
        if self.has_two {
            count -= 1;
        }
        if self.is_prime(5) {
            count -= 1;
        }
        count
    }

    /// Primes in `[lo, hi)`, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.has_two.then_some(2);
        two.into_iter().chain(self.odd_primes())
    }

    /// Walk events for the primes in this segment, ascending.
    pub fn events(&self) -> impl Iterator<Item = PrimeDigitEvent> + '_ {
        self.odd_primes().filter_map(PrimeDigitEvent::from_prime)
    }

    fn odd_primes(&self) -> impl Iterator<Item = u64> + '_ {
        let first_odd = self.first_odd;
        self.words.iter().enumerate().flat_map(move |(w, &word)| {
            let base = first_odd + 128 * w as u64;
            SetBits(word).map(move |bit| base + 2 * u64::from(bit))
        })
    }

    /// Re-sieve this buffer for `[lo, hi)` without checking preconditions.
    fn fill(&mut self, lo: u64, hi: u64, base: &[u64], presieve: Option<&Presieve>) {
        debug_assert!(lo >= 2 && hi > lo);
        self.lo = lo;
        self.hi = hi;
        self.has_two = lo <= 2 && 2 < hi;
        self.first_odd = lo | 1;
        self.nbits = if hi > self.first_odd {
            (hi - self.first_odd).div_ceil(2) as usize
        } else {
            0
        };
        let nwords = self.nbits.div_ceil(64);
        self.words.clear();
        self.words.resize(nwords, 0);

        let first_odd = self.first_odd;
        let nbits = self.nbits;
        let mut smallest = 3;
        if let Some(pattern) = presieve {
            pattern.stamp(first_odd, &mut self.words);
            // The pattern marks the small primes themselves.
            for &p in &PRESIEVE_PRIMES {
                if p >= first_odd && p < hi {
                    let i = ((p - first_odd) / 2) as usize;
                    self.words[i >> 6] &= !(1 << (i & 63));
                }
            }
            smallest = PRESIEVE_PRIMES[PRESIEVE_PRIMES.len() - 1] + 1;
        }
        for &p in base.iter().skip_while(|&&p| p < smallest) {
            if p * p >= hi {
                break;
            }
            let mut start = p * p;
            if start < first_odd {
                let rem = first_odd % p;
                start = if rem == 0 {
                    first_odd
                } else {
                    first_odd + (p - rem)
                };
                if start % 2 == 0 {
                    start += p;
                }
            }
            let mut i = ((start - first_odd) / 2) as usize;
            let step = p as usize;
            while i < nbits {
                self.words[i >> 6] |= 1 << (i & 63);
                i += step;
            }
        }

        for w in &mut self.words {
            *w = !*w;
        }
        let tail = nbits % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        // 1 is never flagged: lo >= 2 keeps it out of range.
    }
}

/// Odd primes whose multiples are stamped from a periodic pattern instead
/// of being crossed off one by one.
const PRESIEVE_PRIMES: [u64; 6] = [3, 5, 7, 11, 13, 17];
const PRESIEVE_PERIOD: usize = 3 * 5 * 7 * 11 * 13 * 17;

/// Composite marks for odd numbers, periodic in the bit index: bit `j` is set
/// when `2j + 1` has a factor in [`PRESIEVE_PRIMES`].
#[derive(Debug)]
struct Presieve {
    // PRESIEVE_PERIOD bits, followed by enough repeated bits that any 64-bit
    // window starting below the period can be read from two words.
    words: Vec<u64>,
}

impl Presieve {
    fn build() -> Self {
        let nbits = PRESIEVE_PERIOD + 128;
        let mut words = vec![0u64; nbits.div_ceil(64) + 1];
        for &p in &PRESIEVE_PRIMES {
            // 2j + 1 = 0 mod p  <=>  j = (p - 1) / 2 mod p
            let mut j = ((p - 1) / 2) as usize;
            while j < nbits {
                words[j >> 6] |= 1 << (j & 63);
                j += p as usize;
            }
        }
        Self { words }
    }

    #[inline]
    fn window(&self, q: usize) -> u64 {
        let (w, b) = (q >> 6, q & 63);
        if b == 0 {
            self.words[w]
        } else {
            (self.words[w] >> b) | (self.words[w + 1] << (64 - b))
        }
    }

    /// Overwrite `out` with the pattern for odd numbers from `first_odd`.
    fn stamp(&self, first_odd: u64, out: &mut [u64]) {
        let period = PRESIEVE_PERIOD as u64;
        let mut q = (((first_odd - 1) / 2) % period) as usize;
        for word in out {
            *word = self.window(q);
            q += 64;
            if q >= PRESIEVE_PERIOD {
                q -= PRESIEVE_PERIOD;
            }
        }
    }
}

struct SetBits(u64);

impl Iterator for SetBits {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(bit)
    }
}

/// Sieve `[lo, hi)` with the given ascending base primes.
///
/// `base` must start at 2 and include every prime `<= floor(sqrt(hi - 1))`.
pub fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Result<SieveSegment> {
    if lo < 2 || hi <= lo {
        return Err(Error::InvalidSegment { lo, hi });
    }
    let needed = (hi - 1).isqrt();
    let covered = base.last().copied().unwrap_or(1);
    if needed > covered {
        // Any integer in (covered, needed] without a base divisor is a prime
        // the caller forgot.
        for m in (covered + 1).max(2)..=needed {
            let has_factor = base
                .iter()
                .take_while(|&&p| p * p <= m)
                .any(|&p| m % p == 0);
            if !has_factor {
                return Err(Error::InsufficientBasePrimes { hi, missing: m });
            }
        }
    }
    let mut segment = SieveSegment::default();
    segment.fill(lo, hi, base, None);
    Ok(segment)
}

/// A fixed partition of `[first, limit]` into sieve segments.
///
/// Segment `k` can be sieved independently of the others, which is what the
/// threaded pipeline in the `primewalk` crate relies on.
#[derive(Debug, Clone)]
pub struct SegmentPlan {
    base: Vec<u64>,
    presieve: Option<Arc<Presieve>>,
    start: u64,
    end: u64,
    span: u64,
    segments: usize,
}

impl SegmentPlan {
    /// Plan covering the primes `p` with `first <= p <= limit`.
    pub fn new(first: u64, limit: u64, segment_flags: usize) -> Self {
        let span = 2 * segment_flags.max(1) as u64;
        let start = first.max(2);
        let end = limit.saturating_add(1);
        let segments = if end > start {
            (end - start).div_ceil(span) as usize
        } else {
            0
        };
        let base = if segments > 0 {
            base_primes(limit.isqrt())
        } else {
            Vec::new()
        };
        // Building the pattern costs about as much as sieving 2^18 integers.
        let presieve = (end - start.min(end) > 1 << 20).then(|| Arc::new(Presieve::build()));
        Self {
            base,
            presieve,
            start,
            end,
            span,
            segments,
        }
    }

    /// Plan covering the primes `p` with `after < p <= limit`.
    pub fn after(after: u64, limit: u64, segment_flags: usize) -> Self {
        Self::new(after.saturating_add(1), limit, segment_flags)
    }

    pub fn len(&self) -> usize {
        self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments == 0
    }

    pub fn base(&self) -> &[u64] {
        &self.base
    }

    /// `[lo, hi)` of segment `k`.
    pub fn bounds(&self, k: usize) -> (u64, u64) {
        let lo = self.start + k as u64 * self.span;
        (lo, (lo + self.span).min(self.end))
    }

    pub fn sieve(&self, k: usize) -> SieveSegment {
        let mut segment = SieveSegment::default();
        self.sieve_into(k, &mut segment);
        segment
    }

    /// Sieve segment `k` reusing `segment`'s buffer.
    pub fn sieve_into(&self, k: usize, segment: &mut SieveSegment) {
        assert!(k < self.segments, "segment {k} out of range");
        let (lo, hi) = self.bounds(k);
        segment.fill(lo, hi, &self.base, self.presieve.as_deref());
    }
}

/// Pull iterator over walk events, ascending.
#[derive(Debug, Clone)]
pub struct PrimeEvents {
    plan: SegmentPlan,
    next_segment: usize,
    segment: SieveSegment,
    word: usize,
    bits: u64,
}

impl PrimeEvents {
    /// Events for primes `<= limit`.
    pub fn new(limit: u64) -> Self {
        Self::from_plan(SegmentPlan::new(2, limit, DEFAULT_SEGMENT_FLAGS))
    }

    /// Events for primes in `(after, limit]`.
    pub fn between(after: u64, limit: u64, segment_flags: usize) -> Self {
        Self::from_plan(SegmentPlan::after(after, limit, segment_flags))
    }

    pub fn from_plan(plan: SegmentPlan) -> Self {
        Self {
            plan,
            next_segment: 0,
            segment: SieveSegment::default(),
            word: 0,
            bits: 0,
        }
    }
}

impl Iterator for PrimeEvents {
    type Item = PrimeDigitEvent;

    fn next(&mut self) -> Option<PrimeDigitEvent> {
        loop {
            if self.bits != 0 {
                let bit = self.bits.trailing_zeros() as u64;
                self.bits &= self.bits - 1;
                let prime = self.segment.first_odd + 128 * self.word as u64 + 2 * bit;
                match PrimeDigitEvent::from_prime(prime) {
                    Some(event) => return Some(event),
                    None => continue,
                }
            }
            self.word += 1;
            if let Some(&w) = self.segment.words.get(self.word) {
                self.bits = w;
                continue;
            }
            if self.next_segment == self.plan.len() {
                return None;
            }
            self.plan.sieve_into(self.next_segment, &mut self.segment);
            self.next_segment += 1;
            self.word = 0;
            self.bits = self.segment.words.first().copied().unwrap_or(0);
        }
    }
}

/// Push every walk event for primes `<= limit` into `sink`, ascending.
/// Returns the number of events delivered.
pub fn stream_events<F>(limit: u64, mut sink: F) -> u64
where
    F: FnMut(PrimeDigitEvent),
{
    let mut delivered = 0;
    for event in PrimeEvents::new(limit) {
        sink(event);
        delivered += 1;
    }
    delivered
}

/// Number of primes `<= limit` other than 2 and 5.
pub fn count_walk_primes(limit: u64) -> u64 {
    count_walk_primes_with(limit, DEFAULT_SEGMENT_FLAGS)
}

pub fn count_walk_primes_with(limit: u64, segment_flags: usize) -> u64 {
    let plan = SegmentPlan::new(2, limit, segment_flags);
    let mut segment = SieveSegment::default();
    (0..plan.len())
        .map(|k| {
            plan.sieve_into(k, &mut segment);
            segment.walk_prime_count()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn base_primes_small() {
        assert_eq!(base_primes(10), [2, 3, 5, 7]);
        assert_eq!(base_primes(2), [2]);
        assert!(base_primes(1).is_empty());
        let oracle: Vec<u64> = (0..=30).filter(|&n| is_prime_trial(n)).collect();
        assert_eq!(base_primes(30), oracle);
        assert_eq!(oracle, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn segment_examples() {
        let seg = sieve_segment(10, 20, &[2, 3]).unwrap();
        assert_eq!(seg.primes().collect::<Vec<_>>(), [11, 13, 17, 19]);
        let seg = sieve_segment(2, 10, &[2, 3]).unwrap();
        assert_eq!(seg.primes().collect::<Vec<_>>(), [2, 3, 5, 7]);
        let seg = sieve_segment(100, 101, &[2, 3, 5, 7]).unwrap();
        assert_eq!(seg.count(), 0);
    }

    #[test]
    fn segment_rejects_missing_base_primes() {
        assert_eq!(
            sieve_segment(10, 30, &[2, 3]).unwrap_err(),
            Error::InsufficientBasePrimes { hi: 30, missing: 5 }
        );
        assert!(matches!(
            sieve_segment(1, 10, &[2, 3]),
            Err(Error::InvalidSegment { .. })
        ));
        assert!(matches!(
            sieve_segment(10, 10, &[2, 3]),
            Err(Error::InvalidSegment { .. })
        ));
    }

    #[test]
    fn segment_flags_match_trial_division() {
        let base = base_primes(100);
        for (lo, hi) in [(2, 3), (3, 4), (2, 200), (97, 1000), (9000, 10001)] {
            let seg = sieve_segment(lo, hi, &base).unwrap();
            for n in lo..hi {
                assert_eq!(seg.is_prime(n), is_prime_trial(n), "n = {n}");
            }
        }
    }

    #[test]
    fn stream_small_limits() {
        let mut seen = Vec::new();
        let count = stream_events(20, |e| seen.push((e.prime, e.digit.value())));
        assert_eq!(count, 6);
        assert_eq!(seen, [(3, 3), (7, 7), (11, 1), (13, 3), (17, 7), (19, 9)]);
        assert_eq!(stream_events(2, |_| {}), 0);
        assert_eq!(stream_events(0, |_| {}), 0);
    }

    #[test]
    fn counts() {
        assert_eq!(count_walk_primes(100), 23);
        assert_eq!(count_walk_primes(0), 0);
        assert_eq!(count_walk_primes(5), 1);
        // pi(10^6) = 78,498
        assert_eq!(count_walk_primes(1_000_000), 78_496);
    }

    #[test]
    fn between_resumes_exactly() {
        let all: Vec<_> = PrimeEvents::new(10_000).collect();
        let head: Vec<_> = PrimeEvents::between(0, 4_000, 17).collect();
        let tail: Vec<_> = PrimeEvents::between(4_000, 10_000, 33).collect();
        assert_eq!([head, tail].concat(), all);
    }

    #[test]
    fn presieved_segments_match_plain_ones() {
        let plan = SegmentPlan::new(2, 3_000_000, 1 << 12);
        assert!(plan.presieve.is_some());
        for k in [0, 1, 2, plan.len() / 2, plan.len() - 1] {
            let (lo, hi) = plan.bounds(k);
            let plain = sieve_segment(lo, hi, plan.base()).unwrap();
            let fast = plan.sieve(k);
            assert_eq!(fast.words, plain.words, "segment {k}");
        }
        assert_eq!(
            plan.sieve(0).primes().take(8).collect::<Vec<_>>(),
            [2, 3, 5, 7, 11, 13, 17, 19]
        );
    }

    #[test]
    fn terminal_digit_domain() {
        assert_eq!(TerminalDigit::new(7), Ok(TerminalDigit::Seven));
        assert_eq!(TerminalDigit::new(5), Err(Error::InvalidDigit(5)));
        assert_eq!(PrimeDigitEvent::from_prime(5), None);
        assert_eq!(PrimeDigitEvent::from_prime(2), None);
    }
}
