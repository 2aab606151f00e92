//! The minority-game engine.
//!
//! Each of the `M` servers is a player holding `S` lookup tables
//! (strategies) that map the last `m` winning bits to a predicted winning
//! action, `1` = active, `0` = inactive. Every round all players commit
//! simultaneously against the same history, a central unit broadcasts the
//! one winning bit `w(t) = [c(t) <= c_th]`, and each player reinforces its
//! played strategy when the prediction matched.
//!
//! Players never observe the attendance `c(t)` or the cut-off: the only
//! inputs a [`PlayerState`] ever receives are the shared history and the
//! broadcast bit, which is what makes the scheme distributed.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 0/1 action, prediction, utility, or control bit.
pub type Bit = u8;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("memory length {0} outside 1..=16")]
    MemoryOutOfRange(u32),
    #[error("cannot draw {strategies} distinct strategies from a pool of {pool}")]
    StrategyPoolExhausted { strategies: usize, pool: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
}

/// Whether a round's outcome reinforces every strategy a player holds,
/// scored against what it would have predicted (virtual scoring, the
/// standard rule in the minority-game literature), or only the strategy
/// that was actually played (literal scoring).
///
/// Virtual is the default: under literal scoring the unplayed strategy can
/// never catch up, players lock onto whichever table takes an early lead,
/// the winning bit stops changing, and coordination never emerges — the
/// population then underperforms even random play. See the README notes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringMode {
    Literal,
    #[default]
    Virtual,
}

/// One strategy: a total map from every `m`-bit history to a predicted
/// winning bit, stored packed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    words: Vec<u64>,
}

impl Strategy {
    /// Uniform draw from the universal pool of `2^(2^m)` tables.
    fn draw<R: Rng + ?Sized>(memory: u32, rng: &mut R) -> Self {
        let entries = 1usize << memory;
        let n_words = entries.div_ceil(64);
        let mut words: Vec<u64> = (0..n_words).map(|_| rng.gen()).collect();
        if entries % 64 != 0 {
            words[n_words - 1] &= (1u64 << (entries % 64)) - 1;
        }
        Self { words }
    }

    /// The predicted winning bit for a history index.
    pub fn predict(&self, history: u32) -> Bit {
        let idx = history as usize;
        ((self.words[idx / 64] >> (idx % 64)) & 1) as Bit
    }
}

/// One player's strategies, their reinforcement scores, and a private
/// deterministic stream for the draws the algorithm calls random.
#[derive(Clone, Debug)]
pub struct PlayerState {
    strategies: Vec<Strategy>,
    scores: Vec<u64>,
    /// Index and action of the strategy played this round, set by
    /// [`select_action`](Self::select_action).
    current: Option<(usize, Bit)>,
    rng: ChaCha12Rng,
}

impl PlayerState {
    /// Draws `strategies` distinct tables from the player's own stream and
    /// zeroes every score.
    pub fn init(strategies: usize, memory: u32, mut rng: ChaCha12Rng) -> Result<Self, GameError> {
        if !(1..=16).contains(&memory) {
            return Err(GameError::MemoryOutOfRange(memory));
        }
        if strategies == 0 {
            return Err(GameError::InvalidParam("each player needs at least one strategy"));
        }
        // pool size 2^(2^m) only fits in u128 for m <= 6; beyond that it
        // cannot be exhausted by any practical S
        if memory <= 6 {
            let pool: u128 = 1u128 << (1u32 << memory);
            if strategies as u128 > pool {
                return Err(GameError::StrategyPoolExhausted { strategies, pool });
            }
        }
        let mut tables: Vec<Strategy> = Vec::with_capacity(strategies);
        while tables.len() < strategies {
            let s = Strategy::draw(memory, &mut rng);
            if !tables.contains(&s) {
                tables.push(s);
            }
        }
        Ok(Self {
            scores: vec![0; strategies],
            strategies: tables,
            current: None,
            rng,
        })
    }

    /// Picks the strategy for round `t` and returns its predicted action for
    /// `history`.
    ///
    /// At `t = 1` the strategy is uniform random; afterwards it is the score
    /// argmax with uniform random tie-breaking from the player's own stream.
    pub fn select_action(&mut self, history: u32, t: u64) -> Bit {
        let idx = if t == 1 {
            self.rng.gen_range(0..self.strategies.len())
        } else {
            let best = *self.scores.iter().max().expect("scores nonempty");
            let tied = self.scores.iter().filter(|&&v| v == best).count();
            if tied == 1 {
                self.scores.iter().position(|&v| v == best).unwrap()
            } else {
                let pick = self.rng.gen_range(0..tied);
                self.scores
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == best)
                    .nth(pick)
                    .unwrap()
                    .0
            }
        };
        let action = self.strategies[idx].predict(history);
        self.current = Some((idx, action));
        action
    }

    /// Reinforces scores against the broadcast bit `w` for the round played
    /// on `history`. Must follow [`select_action`](Self::select_action).
    pub fn update_scores(&mut self, history: u32, w: Bit, mode: ScoringMode) {
        let (played_idx, played_action) = self
            .current
            .take()
            .expect("update_scores called without a selected strategy");
        match mode {
            ScoringMode::Literal => {
                if played_action == w {
                    self.scores[played_idx] += 1;
                }
            }
            ScoringMode::Virtual => {
                for (table, score) in self.strategies.iter().zip(self.scores.iter_mut()) {
                    if table.predict(history) == w {
                        *score += 1;
                    }
                }
            }
        }
    }

    pub fn scores(&self) -> &[u64] {
        &self.scores
    }

    pub fn strategy_count(&self) -> usize {
        self.strategies.len()
    }

    #[cfg(test)]
    pub(crate) fn set_scores_for_test(&mut self, scores: Vec<u64>) {
        assert_eq!(scores.len(), self.scores.len());
        self.scores = scores;
    }
}

/// The broadcast control bit: `1` iff the attendance stayed at or under the
/// cut-off.
pub fn winning_bit(attendance: u32, cutoff: u32) -> Bit {
    (attendance <= cutoff) as Bit
}

/// Realized 0/1 utility: active servers win exactly when `c <= c_th`,
/// inactive ones exactly when `c > c_th`.
pub fn realized_utility(action: Bit, attendance: u32, cutoff: u32) -> Bit {
    if action == 1 {
        (attendance <= cutoff) as Bit
    } else {
        (attendance > cutoff) as Bit
    }
}

/// What one time slot produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: u64,
    pub actions: Vec<Bit>,
    pub attendance: u32,
    pub winning_bit: Bit,
    pub utilities: Vec<Bit>,
    /// `K_T / c(t)`; `None` on rounds nobody served.
    pub jobs_per_server: Option<f64>,
    /// `Pr[tau > T]` at this round's load; 1 when nobody served.
    pub qoe_tail: f64,
}

impl RoundRecord {
    pub fn mean_utility(&self) -> f64 {
        let total: u32 = self.utilities.iter().map(|&u| u as u32).sum();
        total as f64 / self.utilities.len() as f64
    }
}

/// Builds the record for a committed action profile. Shared by the engine
/// and the baseline policies so utilities are computed identically
/// everywhere. `load` maps an attendance to `(jobs_per_server, qoe_tail)`.
pub fn round_record(
    t: u64,
    actions: Vec<Bit>,
    cutoff: u32,
    load: &mut impl FnMut(u32) -> (Option<f64>, f64),
) -> RoundRecord {
    let attendance = actions.iter().map(|&a| a as u32).sum();
    let w = winning_bit(attendance, cutoff);
    let utilities = actions
        .iter()
        .map(|&a| realized_utility(a, attendance, cutoff))
        .collect();
    let (jobs_per_server, qoe_tail) = load(attendance);
    RoundRecord {
        t,
        actions,
        attendance,
        winning_bit: w,
        utilities,
        jobs_per_server,
        qoe_tail,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GameConfig {
    pub players: usize,
    pub strategies_per_player: usize,
    pub memory: u32,
    pub cutoff: u32,
    pub scoring: ScoringMode,
}

/// Full game state: the shared history window plus every player.
#[derive(Clone, Debug)]
pub struct Game {
    cfg: GameConfig,
    history: u32,
    round: u64,
    players: Vec<PlayerState>,
}

impl Game {
    /// `player_stream(i)` must yield an independent deterministic stream per
    /// player; `history_rng` seeds the initial `m` random winning bits.
    pub fn new(
        cfg: GameConfig,
        mut player_stream: impl FnMut(usize) -> ChaCha12Rng,
        history_rng: &mut ChaCha12Rng,
    ) -> Result<Self, GameError> {
        if cfg.players == 0 {
            return Err(GameError::InvalidParam("the game needs at least one player"));
        }
        if !(1..=16).contains(&cfg.memory) {
            return Err(GameError::MemoryOutOfRange(cfg.memory));
        }
        let players = (0..cfg.players)
            .map(|i| PlayerState::init(cfg.strategies_per_player, cfg.memory, player_stream(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let history = history_rng.gen::<u32>() & Self::mask(cfg.memory);
        Ok(Self {
            cfg,
            history,
            round: 1,
            players,
        })
    }

    fn mask(memory: u32) -> u32 {
        if memory >= 32 {
            u32::MAX
        } else {
            (1u32 << memory) - 1
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.cfg
    }

    /// The last `m` winning bits, newest in the lowest position.
    pub fn history(&self) -> u32 {
        self.history
    }

    /// The index of the next round to play (starts at 1).
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn players(&self) -> &[PlayerState] {
        &self.players
    }

    pub fn players_mut(&mut self) -> &mut [PlayerState] {
        &mut self.players
    }

    /// Plays one slot: every player commits against the same pre-round
    /// history, the winning bit is broadcast, scores update, and the history
    /// window shifts.
    pub fn play_round(
        &mut self,
        load: &mut impl FnMut(u32) -> (Option<f64>, f64),
    ) -> RoundRecord {
        let history = self.history;
        let t = self.round;
        let actions: Vec<Bit> = self
            .players
            .iter_mut()
            .map(|p| p.select_action(history, t))
            .collect();
        let record = round_record(t, actions, self.cfg.cutoff, load);
        for player in &mut self.players {
            player.update_scores(history, record.winning_bit, self.cfg.scoring);
        }
        self.advance(record.winning_bit);
        record
    }

    /// Commits the broadcast bit into the history window and bumps the
    /// round counter. Exposed so tests can drive a round piecewise.
    pub fn advance(&mut self, w: Bit) {
        self.history = ((self.history << 1) | w as u32) & Self::mask(self.cfg.memory);
        self.round += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(n: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(n)
    }

    fn no_load(_: u32) -> (Option<f64>, f64) {
        (None, 1.0)
    }

    fn game(players: usize, strategies: usize, memory: u32, cutoff: u32, seed: u64) -> Game {
        let cfg = GameConfig {
            players,
            strategies_per_player: strategies,
            memory,
            cutoff,
            scoring: ScoringMode::Literal,
        };
        Game::new(cfg, |i| rng(seed * 1000 + i as u64), &mut rng(seed)).unwrap()
    }

    #[test]
    fn winning_bit_boundary_is_inclusive() {
        assert_eq!(winning_bit(10, 15), 1);
        assert_eq!(winning_bit(16, 15), 0);
        assert_eq!(winning_bit(15, 15), 1);
    }

    #[test]
    fn utilities_are_complementary() {
        assert_eq!(realized_utility(1, 10, 15), 1);
        assert_eq!(realized_utility(0, 10, 15), 0);
        assert_eq!(realized_utility(0, 16, 15), 1);
        assert_eq!(realized_utility(1, 16, 15), 0);
    }

    #[test]
    fn init_draws_distinct_tables_and_zero_scores() {
        let p = PlayerState::init(2, 5, rng(3)).unwrap();
        assert_eq!(p.strategy_count(), 2);
        assert_eq!(p.scores(), &[0, 0]);
        assert_ne!(p.strategies[0], p.strategies[1]);
        assert_eq!(p.strategies[0].words.len(), 1);
    }

    #[test]
    fn init_exhausts_tiny_pools_gracefully() {
        // m = 1 has a 4-table universe: drawing all 4 works, 5 cannot
        let p = PlayerState::init(4, 1, rng(5)).unwrap();
        assert_eq!(p.strategy_count(), 4);
        assert!(matches!(
            PlayerState::init(5, 1, rng(5)),
            Err(GameError::StrategyPoolExhausted { .. })
        ));
        assert!(matches!(
            PlayerState::init(1, 0, rng(5)),
            Err(GameError::MemoryOutOfRange(0))
        ));
        assert!(matches!(
            PlayerState::init(1, 17, rng(5)),
            Err(GameError::MemoryOutOfRange(17))
        ));
    }

    #[test]
    fn same_seed_draws_identical_strategies() {
        let a = PlayerState::init(2, 5, rng(11)).unwrap();
        let b = PlayerState::init(2, 5, rng(11)).unwrap();
        assert_eq!(a.strategies, b.strategies);
    }

    #[test]
    fn strict_argmax_is_deterministic() {
        let mut p = PlayerState::init(2, 3, rng(7)).unwrap();
        p.set_scores_for_test(vec![5, 3]);
        for h in 0..8 {
            let a = p.select_action(h, 2);
            assert_eq!(a, p.strategies[0].predict(h));
        }
    }

    #[test]
    fn tied_scores_split_roughly_evenly() {
        let mut p = PlayerState::init(2, 3, rng(13)).unwrap();
        let mut picked_first = 0u32;
        let trials = 10_000;
        for _ in 0..trials {
            p.set_scores_for_test(vec![4, 4]);
            p.select_action(0, 2);
            if p.current.unwrap().0 == 0 {
                picked_first += 1;
            }
        }
        // chi-square with 1 dof: (o - e)^2 / e summed over the two cells,
        // 10.8 is the 0.1% critical value
        let e = trials as f64 / 2.0;
        let o = picked_first as f64;
        let chi2 = (o - e).powi(2) / e + ((trials as f64 - o) - e).powi(2) / e;
        assert!(chi2 < 10.8, "tie-breaking is biased: chi2 = {chi2}");
    }

    #[test]
    fn first_round_pick_is_uniform_despite_scores() {
        let mut counts = [0u32; 2];
        for trial in 0..4000 {
            let mut p = PlayerState::init(2, 3, rng(trial)).unwrap();
            p.set_scores_for_test(vec![0, 100]);
            p.select_action(0, 1);
            counts[p.current.unwrap().0] += 1;
        }
        let e = 2000.0;
        let chi2: f64 = counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 10.8, "t=1 selection is biased: chi2 = {chi2:?} ({counts:?})");
    }

    #[test]
    fn single_strategy_player_never_deviates() {
        let mut p = PlayerState::init(1, 4, rng(17)).unwrap();
        for t in 1..200 {
            let h = (t as u32 * 7) & 15;
            let a = p.select_action(h, t);
            assert_eq!(a, p.strategies[0].predict(h));
            p.update_scores(h, a, ScoringMode::Literal);
        }
    }

    #[test]
    fn literal_update_touches_only_the_played_strategy() {
        let mut p = PlayerState::init(2, 3, rng(19)).unwrap();
        p.set_scores_for_test(vec![3, 1]);
        let h = 5;
        let a = p.select_action(h, 2); // plays index 0
        p.update_scores(h, a, ScoringMode::Literal);
        assert_eq!(p.scores(), &[4, 1]);
        p.select_action(h, 3);
        p.update_scores(h, 1 - a, ScoringMode::Literal);
        assert_eq!(p.scores(), &[4, 1]);
    }

    #[test]
    fn virtual_update_scores_every_matching_table() {
        let mut p = PlayerState::init(2, 3, rng(23)).unwrap();
        let h = 2;
        let w = 1;
        let expect: Vec<u64> = p
            .strategies
            .iter()
            .map(|s| (s.predict(h) == w) as u64)
            .collect();
        p.select_action(h, 1);
        p.update_scores(h, w, ScoringMode::Virtual);
        assert_eq!(p.scores(), expect.as_slice());
    }

    #[test]
    #[should_panic(expected = "without a selected strategy")]
    fn update_before_select_is_a_bug() {
        let mut p = PlayerState::init(2, 3, rng(29)).unwrap();
        p.update_scores(0, 1, ScoringMode::Literal);
    }

    #[test]
    fn forced_profiles_produce_the_documented_records() {
        let all_active = round_record(1, vec![1; 21], 15, &mut no_load);
        assert_eq!(all_active.attendance, 21);
        assert_eq!(all_active.winning_bit, 0);
        assert!(all_active.utilities.iter().all(|&u| u == 0));
        assert_eq!(all_active.mean_utility(), 0.0);
        let all_inactive = round_record(2, vec![0; 21], 15, &mut no_load);
        assert_eq!(all_inactive.attendance, 0);
        assert_eq!(all_inactive.winning_bit, 1);
        assert!(all_inactive.utilities.iter().all(|&u| u == 0));
    }

    #[test]
    fn engine_rounds_are_reproducible() {
        let mut g1 = game(21, 2, 5, 15, 31);
        let mut g2 = game(21, 2, 5, 15, 31);
        for _ in 0..500 {
            assert_eq!(g1.play_round(&mut no_load), g2.play_round(&mut no_load));
        }
    }

    #[test]
    fn history_window_tracks_emitted_bits() {
        let mut g = game(9, 2, 4, 5, 37);
        let mut emitted: Vec<Bit> = Vec::new();
        for _ in 0..100 {
            let r = g.play_round(&mut no_load);
            emitted.push(r.winning_bit);
            let m = 4;
            let mut expect = 0u32;
            for &b in emitted.iter().rev().take(m).rev() {
                expect = (expect << 1) | b as u32;
            }
            if emitted.len() >= m {
                assert_eq!(g.history(), expect);
            } else {
                assert_eq!(g.history() & ((1 << emitted.len()) - 1), expect);
            }
        }
    }

    #[test]
    fn attendance_is_the_action_sum() {
        let mut g = game(13, 2, 3, 6, 41);
        for _ in 0..200 {
            let r = g.play_round(&mut no_load);
            let total: u32 = r.actions.iter().map(|&a| a as u32).sum();
            assert_eq!(r.attendance, total);
            assert!(r.attendance <= 13);
            assert_eq!(r.winning_bit, winning_bit(r.attendance, 6));
        }
    }
}
