//! Lattice walks driven by prime terminal digits, plus the uniform baseline.

use alloc::format;

use crate::prime_stream::{PrimeDigitEvent, PrimeEvents, TerminalDigit};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Self::Up, Self::Down, Self::Left, Self::Right];

    /// Unit lattice offset `(dx, dy)`.
    #[inline]
    pub fn delta(self) -> (i64, i64) {
        match self {
            Self::Up => (0, 1),
            Self::Down => (0, -1),
            Self::Right => (1, 0),
            Self::Left => (-1, 0),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Self::Up => Self::Down,
            Self::Down => Self::Up,
            Self::Left => Self::Right,
            Self::Right => Self::Left,
        }
    }
}

/// Assignment of the four terminal digits to the four directions.
///
/// Every other bijection is a rotation or reflection of one of these three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkRule {
    /// 1 down, 3 up, 7 right, 9 left.
    A1,
    /// 1 right, 3 up, 7 down, 9 left.
    A2,
    /// 1 left, 3 up, 7 right, 9 down.
    A3,
}

impl WalkRule {
    pub const ALL: [WalkRule; 3] = [Self::A1, Self::A2, Self::A3];

    /// Directions for digits 1, 3, 7, 9 in that order.
    pub fn table(self) -> [Direction; 4] {
        use Direction::*;
        match self {
            Self::A1 => [Down, Up, Right, Left],
            Self::A2 => [Right, Up, Down, Left],
            Self::A3 => [Left, Up, Right, Down],
        }
    }

    #[inline]
    pub fn direction(self, digit: TerminalDigit) -> Direction {
        self.table()[digit.index()]
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A1 => "a1",
            Self::A2 => "a2",
            Self::A3 => "a3",
        }
    }
}

/// Direction for a raw decimal digit under `rule`.
pub fn rule_direction(rule: WalkRule, digit: u64) -> Result<Direction> {
    TerminalDigit::new(digit).map(|d| rule.direction(d))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub x: i64,
    pub y: i64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn translate(self, direction: Direction) -> Result<Self> {
        let (dx, dy) = direction.delta();
        Ok(Self {
            x: self.x.checked_add(dx).ok_or(Error::PositionOverflow)?,
            y: self.y.checked_add(dy).ok_or(Error::PositionOverflow)?,
        })
    }

    pub fn is_origin(self) -> bool {
        self == Self::ORIGIN
    }

    pub fn l1_norm(self) -> u64 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }

    pub fn chebyshev_norm(self) -> u64 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }

    /// `x^2 + y^2`, exact.
    pub fn norm_squared(self) -> u128 {
        let x = u128::from(self.x.unsigned_abs());
        let y = u128::from(self.y.unsigned_abs());
        x * x + y * y
    }
}

/// Where a walk stands after scanning integers up to `last_n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkState {
    pub pos: Position,
    /// Number of moves made so far.
    pub steps_taken: u64,
    /// Largest `n` examined. For the random baseline this equals `steps_taken`.
    pub last_n: u64,
}

impl WalkState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Apply one move for `digit` under `rule`.
pub fn step(state: WalkState, digit: TerminalDigit, rule: WalkRule) -> Result<WalkState> {
    Ok(WalkState {
        pos: state.pos.translate(rule.direction(digit))?,
        steps_taken: state.steps_taken + 1,
        last_n: state.last_n,
    })
}

/// One move as seen by observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    /// The prime that caused the move, or the 1-based move number for the
    /// random baseline.
    pub n: u64,
    /// `None` for random-baseline moves.
    pub digit: Option<TerminalDigit>,
    pub from: Position,
    pub to: Position,
    /// Moves made including this one.
    pub steps_taken: u64,
}

/// Receives every move of a walk, in order, on the walk thread.
pub trait WalkObserver {
    fn on_step(&mut self, step: &Step) -> Result<()>;

    /// Called once the walk has examined everything up to `state.last_n`.
    fn on_finish(&mut self, _state: &WalkState) -> Result<()> {
        Ok(())
    }
}

impl<F> WalkObserver for F
where
    F: FnMut(&Step) -> Result<()>,
{
    fn on_step(&mut self, step: &Step) -> Result<()> {
        self(step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkSummary {
    pub final_pos: Position,
    pub steps_taken: u64,
    pub last_n: u64,
}

impl From<WalkState> for WalkSummary {
    fn from(state: WalkState) -> Self {
        Self {
            final_pos: state.pos,
            steps_taken: state.steps_taken,
            last_n: state.last_n,
        }
    }
}

fn notify(observers: &mut [&mut dyn WalkObserver], step: &Step) -> Result<()> {
    for observer in observers.iter_mut() {
        observer.on_step(step)?;
    }
    Ok(())
}

fn finish(observers: &mut [&mut dyn WalkObserver], state: &WalkState) -> Result<()> {
    for observer in observers.iter_mut() {
        observer.on_finish(state)?;
    }
    Ok(())
}

/// Move through `events`, which must be ascending and above `state.last_n`.
/// Observers are not told the walk has finished; see [`finish_walk`].
pub fn advance<I>(
    state: &mut WalkState,
    events: I,
    rule: WalkRule,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<()>
where
    I: IntoIterator<Item = PrimeDigitEvent>,
{
    for event in events {
        debug_assert!(event.prime > state.last_n);
        let from = state.pos;
        let to = from.translate(rule.direction(event.digit))?;
        state.pos = to;
        state.steps_taken += 1;
        state.last_n = event.prime;
        notify(
            observers,
            &Step {
                n: event.prime,
                digit: Some(event.digit),
                from,
                to,
                steps_taken: state.steps_taken,
            },
        )?;
    }
    Ok(())
}

/// Mark everything up to `limit` as examined and notify observers.
pub fn finish_walk(
    state: &mut WalkState,
    limit: u64,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<()> {
    state.last_n = state.last_n.max(limit);
    finish(observers, state)
}

/// [`advance`] through `events`, then [`finish_walk`] at `limit`.
pub fn walk_events<I>(
    state: &mut WalkState,
    events: I,
    limit: u64,
    rule: WalkRule,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<()>
where
    I: IntoIterator<Item = PrimeDigitEvent>,
{
    advance(state, events, rule, observers)?;
    finish_walk(state, limit, observers)
}

/// Walk every prime `<= limit` under `rule`, starting at the origin.
pub fn run_walk(
    limit: u64,
    rule: WalkRule,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<WalkSummary> {
    let mut state = WalkState::new();
    walk_events(&mut state, PrimeEvents::new(limit), limit, rule, observers)?;
    Ok(state.into())
}

/// Continue a walk from `state` through the primes in `(state.last_n, limit]`.
pub fn resume_walk(
    mut state: WalkState,
    limit: u64,
    rule: WalkRule,
    segment_flags: usize,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<WalkSummary> {
    let events = PrimeEvents::between(state.last_n, limit, segment_flags);
    walk_events(&mut state, events, limit, rule, observers)?;
    Ok(state.into())
}

/// Source of uniform reals in `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// SplitMix64 with the standard constants. Uniforms take the top 53 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Generator positioned after `draws` outputs from `seed`.
    pub fn at(seed: u64, draws: u64) -> Self {
        Self {
            state: seed.wrapping_add(draws.wrapping_mul(Self::GAMMA)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(Self::GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

impl UniformSource for SplitMix64 {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Direction for a uniform draw: index `floor(r / 0.25)` into
/// Down, Up, Right, Left.
pub fn pearson_direction(r: f64) -> Result<Direction> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::UniformOutOfRange(r));
    }
    use Direction::*;
    const TABLE: [Direction; 4] = [Down, Up, Right, Left];
    Ok(TABLE[libm::floor(r / 0.25) as usize])
}

/// Continue a uniform four-direction walk from `state` until it has made
/// `steps` moves. Move `k` (1-based) is reported with `n = k`.
pub fn random_walk_from<S: UniformSource>(
    state: &mut WalkState,
    steps: u64,
    source: &mut S,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<()> {
    while state.steps_taken < steps {
        let r = source.next_uniform();
        let direction = pearson_direction(r)
            .map_err(|e| Error::Observer(format!("uniform source misbehaved: {e}")))?;
        let from = state.pos;
        let to = from.translate(direction)?;
        state.pos = to;
        state.steps_taken += 1;
        state.last_n = state.steps_taken;
        notify(
            observers,
            &Step {
                n: state.steps_taken,
                digit: None,
                from,
                to,
                steps_taken: state.steps_taken,
            },
        )?;
    }
    state.last_n = state.last_n.max(steps);
    finish(observers, state)
}

/// Seeded uniform baseline walk of exactly `steps` moves.
pub fn run_random_walk(
    steps: u64,
    seed: u64,
    observers: &mut [&mut dyn WalkObserver],
) -> Result<WalkSummary> {
    let mut state = WalkState::new();
    random_walk_from(&mut state, steps, &mut SplitMix64::new(seed), observers)?;
    Ok(state.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn rule_tables() {
        assert_eq!(rule_direction(WalkRule::A1, 1), Ok(Direction::Down));
        assert_eq!(rule_direction(WalkRule::A2, 7), Ok(Direction::Down));
        assert_eq!(rule_direction(WalkRule::A3, 9), Ok(Direction::Down));
        assert_eq!(rule_direction(WalkRule::A1, 5), Err(Error::InvalidDigit(5)));
        for rule in WalkRule::ALL {
            let mut dirs = rule.table().to_vec();
            dirs.sort_by_key(|d| d.delta());
            dirs.dedup();
            assert_eq!(dirs.len(), 4, "{rule:?} must be a bijection");
        }
    }

    #[test]
    fn single_steps() {
        let s0 = WalkState::new();
        let s1 = step(s0, TerminalDigit::Three, WalkRule::A1).unwrap();
        assert_eq!(s1.pos, Position::new(0, 1));
        let s2 = step(s1, TerminalDigit::Seven, WalkRule::A1).unwrap();
        assert_eq!(s2.pos, Position::new(1, 1));
        let s3 = step(s2, TerminalDigit::One, WalkRule::A1).unwrap();
        assert_eq!(s3.pos, Position::new(1, 0));
        assert_eq!(s3.steps_taken, 3);
    }

    #[test]
    fn overflow_is_an_error() {
        let state = WalkState {
            pos: Position::new(i64::MAX, 0),
            ..WalkState::new()
        };
        assert_eq!(
            step(state, TerminalDigit::Seven, WalkRule::A1),
            Err(Error::PositionOverflow)
        );
    }

    #[test]
    fn inverse_pairs_follow_tables() {
        // Pairs derived from each table: digits whose directions are opposite.
        let pairs = [
            (WalkRule::A1, [(1, 3), (7, 9)]),
            (WalkRule::A2, [(1, 9), (3, 7)]),
            (WalkRule::A3, [(1, 7), (3, 9)]),
        ];
        for (rule, rule_pairs) in pairs {
            for (a, b) in rule_pairs {
                let da = TerminalDigit::new(a).unwrap();
                let db = TerminalDigit::new(b).unwrap();
                assert_eq!(rule.direction(da).opposite(), rule.direction(db));
                let s = WalkState {
                    pos: Position::new(5, -3),
                    ..WalkState::new()
                };
                let back = step(step(s, da, rule).unwrap(), db, rule).unwrap();
                assert_eq!(back.pos, s.pos);
            }
        }
    }

    #[test]
    fn hand_traced_walks() {
        let mut visited = Vec::new();
        let mut record = |s: &Step| {
            visited.push(s.to);
            Ok(())
        };
        let summary = run_walk(14, WalkRule::A1, &mut [&mut record]).unwrap();
        assert_eq!(summary.final_pos, Position::new(1, 1));
        assert_eq!(summary.steps_taken, 4);
        assert_eq!(summary.last_n, 14);
        assert_eq!(
            visited,
            [(0, 1), (1, 1), (1, 0), (1, 1)].map(|(x, y)| Position::new(x, y))
        );
        let summary = run_walk(10, WalkRule::A1, &mut []).unwrap();
        assert_eq!(summary.final_pos, Position::new(1, 1));
        assert_eq!(summary.steps_taken, 2);
    }

    #[test]
    fn resume_matches_direct_walk() {
        let direct = run_walk(50_000, WalkRule::A2, &mut []).unwrap();
        let half = run_walk(20_000, WalkRule::A2, &mut []).unwrap();
        let state = WalkState {
            pos: half.final_pos,
            steps_taken: half.steps_taken,
            last_n: half.last_n,
        };
        let resumed = resume_walk(state, 50_000, WalkRule::A2, 64, &mut []).unwrap();
        assert_eq!(resumed, direct);
    }

    #[test]
    fn observer_errors_propagate() {
        let mut failing = |s: &Step| {
            if s.steps_taken == 3 {
                Err(Error::Observer("stop".into()))
            } else {
                Ok(())
            }
        };
        assert_eq!(
            run_walk(100, WalkRule::A1, &mut [&mut failing]),
            Err(Error::Observer("stop".into()))
        );
    }

    #[test]
    fn pearson_index_table() {
        assert_eq!(pearson_direction(0.0), Ok(Direction::Down));
        assert_eq!(pearson_direction(0.25), Ok(Direction::Up));
        assert_eq!(pearson_direction(0.5), Ok(Direction::Right));
        assert_eq!(pearson_direction(0.999), Ok(Direction::Left));
        assert!(pearson_direction(1.0).is_err());
        assert!(pearson_direction(-0.1).is_err());
        assert!(pearson_direction(f64::NAN).is_err());
    }

    struct Rigged(vec::IntoIter<f64>);

    impl UniformSource for Rigged {
        fn next_uniform(&mut self) -> f64 {
            self.0.next().unwrap()
        }
    }

    #[test]
    fn rigged_random_walk() {
        let mut path = Vec::new();
        let mut record = |s: &Step| {
            path.push(s.to);
            Ok(())
        };
        let mut state = WalkState::new();
        let mut source = Rigged(vec![0.0, 0.25, 0.5, 0.75].into_iter());
        random_walk_from(&mut state, 4, &mut source, &mut [&mut record]).unwrap();
        assert_eq!(state.pos, Position::ORIGIN);
        assert_eq!(
            path,
            [(0, -1), (0, 0), (1, 0), (0, 0)].map(|(x, y)| Position::new(x, y))
        );
    }

    #[test]
    fn random_walk_determinism() {
        let trace = |seed| {
            let mut v = Vec::new();
            let mut rec = |s: &Step| {
                v.push(s.to);
                Ok(())
            };
            run_random_walk(1000, seed, &mut [&mut rec]).unwrap();
            v
        };
        assert_eq!(trace(7), trace(7));
        assert_ne!(trace(7), trace(8));
        assert_eq!(
            run_random_walk(0, 99, &mut []).unwrap().final_pos,
            Position::ORIGIN
        );
    }

    #[test]
    fn splitmix_jump_and_reference_output() {
        // First output of SplitMix64 seeded with 0.
        assert_eq!(SplitMix64::new(0).next_u64(), 0xE220_A839_7B1D_CDAF);
        let mut g = SplitMix64::new(42);
        for _ in 0..10 {
            g.next_u64();
        }
        assert_eq!(g, SplitMix64::at(42, 10));
    }
}
