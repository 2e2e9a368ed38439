//! The bargaining model shared by every other module.
//!
//! All payoffs inside the crate are fractions of the round-1 prize. Points
//! only appear at input/output boundaries (see [`points_to_fraction`]).

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, q, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("default payoffs must be non-negative and sum to at most 1 (got {0})")]
    InvalidDefaults(String),
    #[error("shrink factor must lie in (0, 1] (got {0})")]
    InvalidShrink(String),
    #[error("fixed recognition order has length {got}, expected {expected}")]
    InvalidOrder { expected: usize, got: usize },
    #[error("number of rounds must be at least 1")]
    InvalidRounds,
    #[error("prize must be a positive number of points")]
    InvalidPrize,
    #[error("invalid recognition model: {0}")]
    InvalidRecognition(String),
    #[error("{points} points is outside [0, {prize}]")]
    OutOfRange { points: i64, prize: i64 },
    #[error("round {round} is outside 1..={num_rounds}")]
    RoundOutOfRange { round: usize, num_rounds: usize },
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
}

/// Positional player identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
    C,
}

impl Player {
    pub const ALL: [Player; 3] = [Player::A, Player::B, Player::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Player> {
        Self::ALL.get(i).copied()
    }

    /// The two other players, in positional order.
    pub fn others(self) -> [Player; 2] {
        match self {
            Player::A => [Player::B, Player::C],
            Player::B => [Player::A, Player::C],
            Player::C => [Player::A, Player::B],
        }
    }

    pub fn parse(s: &str) -> Option<Player> {
        match s.trim() {
            "A" | "a" | "1" => Some(Player::A),
            "B" | "b" | "2" => Some(Player::B),
            "C" | "c" | "3" => Some(Player::C),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Player::A => 'A',
            Player::B => 'B',
            Player::C => 'C',
        };
        write!(f, "{c}")
    }
}

/// How much of the next round's recognition is disclosed one round ahead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoProtocol {
    /// The next proposer is announced.
    Perfect,
    /// One player who will not propose next is announced.
    Partial,
    /// Nothing is announced.
    None,
}

impl InfoProtocol {
    pub fn parse(s: &str) -> Option<InfoProtocol> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" => Some(InfoProtocol::Perfect),
            "partial" => Some(InfoProtocol::Partial),
            "none" => Some(InfoProtocol::None),
            _ => None,
        }
    }
}

impl fmt::Display for InfoProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InfoProtocol::Perfect => "perfect",
            InfoProtocol::Partial => "partial",
            InfoProtocol::None => "none",
        };
        f.write_str(s)
    }
}

/// Distribution of the recognition order `p_1..p_T`.
#[derive(Debug, Clone, PartialEq)]
pub enum RecognitionModel {
    /// Every round's proposer is drawn independently and uniformly.
    IidUniform,
    /// A known, deterministic sequence of proposers.
    FixedOrder(Vec<Player>),
    /// A general per-round conditional table: `initial[i]` is the probability
    /// that player `i` proposes first and `transitions[t - 1][i][k]` is the
    /// probability that `k` proposes in round `t + 1` given that `i` proposes
    /// in round `t`.
    Markov { initial: [Q; 3], transitions: Vec<[[Q; 3]; 3]> },
}

impl RecognitionModel {
    pub fn initial(&self) -> [Q; 3] {
        match self {
            RecognitionModel::IidUniform => [q(1, 3), q(1, 3), q(1, 3)],
            RecognitionModel::FixedOrder(order) => indicator(order[0]),
            RecognitionModel::Markov { initial, .. } => initial.clone(),
        }
    }

    /// Transition from round `round` to `round + 1`.
    pub fn transition(&self, round: usize) -> [[Q; 3]; 3] {
        match self {
            RecognitionModel::IidUniform => {
                let row = [q(1, 3), q(1, 3), q(1, 3)];
                [row.clone(), row.clone(), row]
            }
            RecognitionModel::FixedOrder(order) => {
                let row = indicator(order[round]);
                [row.clone(), row.clone(), row]
            }
            RecognitionModel::Markov { transitions, .. } => transitions[round - 1].clone(),
        }
    }
}

fn indicator(p: Player) -> [Q; 3] {
    let mut out = [rational::zero(), rational::zero(), rational::zero()];
    out[p.index()] = rational::one();
    out
}

/// One bargaining treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub id: String,
    pub num_rounds: usize,
    pub protocol: InfoProtocol,
    /// Default payoffs as fractions of the prize, indexed by positional player.
    pub defaults: [Q; 3],
    pub prize_points: u32,
    /// Fraction of the divisible budget that survives each failed round.
    pub shrink_factor: Q,
    pub recognition: RecognitionModel,
}

impl GameSpec {
    /// A spec with a 240-point prize, no shrinkage and i.i.d. uniform
    /// recognition.
    pub fn new(id: impl Into<String>, num_rounds: usize, protocol: InfoProtocol, defaults: [Q; 3]) -> Self {
        GameSpec {
            id: id.into(),
            num_rounds,
            protocol,
            defaults,
            prize_points: 240,
            shrink_factor: rational::one(),
            recognition: RecognitionModel::IidUniform,
        }
    }

    pub fn with_recognition(mut self, recognition: RecognitionModel) -> Self {
        self.recognition = recognition;
        self
    }

    pub fn with_shrink_factor(mut self, shrink_factor: Q) -> Self {
        self.shrink_factor = shrink_factor;
        self
    }

    pub fn with_prize_points(mut self, prize_points: u32) -> Self {
        self.prize_points = prize_points;
        self
    }

    /// Returns the spec unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self, GameError> {
        if self.num_rounds == 0 {
            return Err(GameError::InvalidRounds);
        }
        if self.prize_points == 0 {
            return Err(GameError::InvalidPrize);
        }
        let total: Q = self.defaults.iter().sum();
        if self.defaults.iter().any(|v| v.is_negative()) || total > rational::one() {
            let shown: Vec<String> = self.defaults.iter().map(rational::display).collect();
            return Err(GameError::InvalidDefaults(shown.join(", ")));
        }
        if !self.shrink_factor.is_positive() || self.shrink_factor > rational::one() {
            return Err(GameError::InvalidShrink(rational::display(&self.shrink_factor)));
        }
        match &self.recognition {
            RecognitionModel::IidUniform => {}
            RecognitionModel::FixedOrder(order) => {
                if order.len() != self.num_rounds {
                    return Err(GameError::InvalidOrder { expected: self.num_rounds, got: order.len() });
                }
            }
            RecognitionModel::Markov { initial, transitions } => {
                check_distribution(initial, "initial distribution")?;
                if transitions.len() + 1 != self.num_rounds {
                    return Err(GameError::InvalidRecognition(format!(
                        "{} transition tables for {} rounds",
                        transitions.len(),
                        self.num_rounds
                    )));
                }
                for (t, table) in transitions.iter().enumerate() {
                    for row in table {
                        check_distribution(row, &format!("transition {}", t + 1))?;
                    }
                }
            }
        }
        Ok(self)
    }

    /// Fraction of the round-1 prize available in `round`.
    pub fn budget(&self, round: usize) -> Q {
        rational::pow(&self.shrink_factor, round.saturating_sub(1))
    }

    /// Payoffs received when every round fails, in round-1 prize units.
    pub fn default_payoffs(&self) -> [Q; 3] {
        let scale = self.budget(self.num_rounds);
        self.defaults.clone().map(|v| v * &scale)
    }

    pub fn defaults_f64(&self) -> [f64; 3] {
        self.default_payoffs().map(|v| rational::to_f64(&v))
    }

    /// Marginal distribution of the round-`round` proposer.
    pub fn proposer_distribution(&self, round: usize) -> [Q; 3] {
        let mut dist = self.recognition.initial();
        for t in 1..round {
            let table = self.recognition.transition(t);
            let mut next = [rational::zero(), rational::zero(), rational::zero()];
            for i in 0..3 {
                for k in 0..3 {
                    next[k] += &dist[i] * &table[i][k];
                }
            }
            dist = next;
        }
        dist
    }

    /// Distribution of the disclosure made during `round` when `proposer`
    /// proposes, before anything about round `round + 1` is revealed.
    pub fn disclosure_distribution(&self, round: usize, proposer: Player) -> Vec<(Disclosure, Q)> {
        if round >= self.num_rounds || self.protocol == InfoProtocol::None {
            return vec![(Disclosure::NoInfo, rational::one())];
        }
        let row = &self.recognition.transition(round)[proposer.index()];
        match self.protocol {
            InfoProtocol::Perfect => Player::ALL
                .iter()
                .filter(|k| row[k.index()].is_positive())
                .map(|&k| (Disclosure::KnownNext(k), row[k.index()].clone()))
                .collect(),
            InfoProtocol::Partial => Player::ALL
                .iter()
                .map(|&j| {
                    let p: Q = Player::ALL.iter().filter(|&&k| k != j).map(|k| &row[k.index()] * q(1, 2)).sum();
                    (Disclosure::ExcludedNext(j), p)
                })
                .filter(|(_, p)| p.is_positive())
                .collect(),
            InfoProtocol::None => unreachable!(),
        }
    }

    /// Distribution of the round `t + 1` proposer given everything known in
    /// `state` (round `t`).
    pub fn next_proposer_distribution(&self, state: &InfoState) -> [Q; 3] {
        let row = self.recognition.transition(state.round)[state.proposer.index()].clone();
        match state.disclosure {
            Disclosure::KnownNext(k) => indicator(k),
            Disclosure::ExcludedNext(j) => {
                let mut weights = row;
                weights[j.index()] = rational::zero();
                let total: Q = weights.iter().sum();
                if total.is_zero() {
                    return weights;
                }
                weights.map(|w| w / &total)
            }
            Disclosure::NoInfo => row,
        }
    }

    /// Conditional distribution over round `t + 1` information states given
    /// the round-`t` state. Empty in the final round.
    pub fn next_states(&self, state: &InfoState) -> Vec<(InfoState, Q)> {
        if state.round >= self.num_rounds {
            return Vec::new();
        }
        let next_round = state.round + 1;
        let budget = self.budget(next_round);
        let proposer_dist = self.next_proposer_distribution(state);
        let mut out = Vec::new();
        for k in Player::ALL {
            let pk = &proposer_dist[k.index()];
            if !pk.is_positive() {
                continue;
            }
            for (disclosure, pd) in self.disclosure_distribution(next_round, k) {
                out.push((InfoState { round: next_round, proposer: k, disclosure, budget: budget.clone() }, pk * pd));
            }
        }
        out
    }
}

fn check_distribution(row: &[Q; 3], what: &str) -> Result<(), GameError> {
    let total: Q = row.iter().sum();
    if row.iter().any(|p| p.is_negative()) || !total.is_one() {
        return Err(GameError::InvalidRecognition(format!("{what} is not a probability distribution")));
    }
    Ok(())
}

/// What the players learn about the next round's proposer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "player", rename_all = "snake_case")]
pub enum Disclosure {
    KnownNext(Player),
    ExcludedNext(Player),
    NoInfo,
}

impl fmt::Display for Disclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disclosure::KnownNext(p) => write!(f, "next={p}"),
            Disclosure::ExcludedNext(p) => write!(f, "excluded={p}"),
            Disclosure::NoInfo => f.write_str("no-info"),
        }
    }
}

/// Everything the players know when a proposal is made.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfoState {
    pub round: usize,
    pub proposer: Player,
    pub disclosure: Disclosure,
    /// Fraction of the round-1 prize available this round.
    pub budget: Q,
}

impl InfoState {
    pub fn new(spec: &GameSpec, round: usize, proposer: Player, disclosure: Disclosure) -> Self {
        InfoState { round, proposer, disclosure, budget: spec.budget(round) }
    }
}

impl fmt::Display for InfoState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} proposer={} {}", self.round, self.proposer, self.disclosure)
    }
}

/// All information states reachable in `round`, each with its probability.
pub fn enumerate_info_states(spec: &GameSpec, round: usize) -> Result<Vec<(InfoState, Q)>, GameError> {
    if round == 0 || round > spec.num_rounds {
        return Err(GameError::RoundOutOfRange { round, num_rounds: spec.num_rounds });
    }
    let marginal = spec.proposer_distribution(round);
    let budget = spec.budget(round);
    let mut out = Vec::new();
    for p in Player::ALL {
        let pp = &marginal[p.index()];
        if !pp.is_positive() {
            continue;
        }
        for (disclosure, pd) in spec.disclosure_distribution(round, p) {
            out.push((InfoState { round, proposer: p, disclosure, budget: budget.clone() }, pp * pd));
        }
    }
    Ok(out)
}

/// Exact conversion of a point amount to a prize fraction.
pub fn points_to_fraction(points: i64, prize_points: i64) -> Result<Q, GameError> {
    if prize_points <= 0 || points < 0 || points > prize_points {
        return Err(GameError::OutOfRange { points, prize: prize_points });
    }
    Ok(q(points, prize_points))
}

/// Tolerance on the sum of allocation shares.
pub const ALLOCATION_TOL: f64 = 1e-9;

/// A division of the current budget, stored as fractions summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Allocation([f64; 3]);

impl Allocation {
    pub fn new(shares: [f64; 3]) -> Result<Allocation, GameError> {
        if shares.iter().any(|s| !s.is_finite() || *s < -ALLOCATION_TOL || *s > 1.0 + ALLOCATION_TOL) {
            return Err(GameError::InvalidAllocation(format!("shares {shares:?} outside [0, 1]")));
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > ALLOCATION_TOL {
            return Err(GameError::InvalidAllocation(format!("shares {shares:?} sum to {total}")));
        }
        Ok(Allocation(shares.map(|s| s.clamp(0.0, 1.0))))
    }

    /// Rescales non-negative shares to sum to one.
    pub fn normalized(raw: [f64; 3]) -> Result<Allocation, GameError> {
        let total: f64 = raw.iter().sum();
        if raw.iter().any(|s| !s.is_finite() || *s < 0.0) || total <= 0.0 {
            return Err(GameError::InvalidAllocation(format!("cannot normalize {raw:?}")));
        }
        let mut shares = raw.map(|s| s / total);
        // absorb rounding in the largest share so the sum is exactly representable
        let largest = (0..3).max_by(|&a, &b| shares[a].total_cmp(&shares[b])).unwrap_or(0);
        let rest: f64 = (0..3).filter(|&i| i != largest).map(|i| shares[i]).sum();
        shares[largest] = 1.0 - rest;
        Allocation::new(shares)
    }

    pub fn from_exact(shares: &[Q; 3]) -> Result<Allocation, GameError> {
        Allocation::new(shares.clone().map(|s| rational::to_f64(&s)))
    }

    pub fn shares(&self) -> [f64; 3] {
        self.0
    }

    pub fn share(&self, p: Player) -> f64 {
        self.0[p.index()]
    }

    /// Shares scaled to the given budget.
    pub fn scaled(&self, budget: f64) -> [f64; 3] {
        self.0.map(|s| s * budget)
    }
}

impl TryFrom<[f64; 3]> for Allocation {
    type Error = GameError;

    fn try_from(value: [f64; 3]) -> Result<Self, Self::Error> {
        Allocation::new(value)
    }
}

impl From<Allocation> for [f64; 3] {
    fn from(value: Allocation) -> Self {
        value.0
    }
}
