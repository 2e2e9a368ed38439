//! Seeded match simulation with pluggable proposer and voter agents.
//!
//! Logs use experiment-style ids: id 1 is the first proposer and the two
//! other players keep their positional order as ids 2 and 3. Inside the
//! simulator everything is positional.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{optimize_offer, BeliefError, BeliefFamily, GridSpec, ThresholdBelief};
use crate::empirics::gini;
use crate::game::{Allocation, Disclosure, GameError, GameSpec, InfoProtocol, InfoState, Player};
use crate::rational::{self, Q};
use crate::spe::{solve, EquilibriumSolution, PartnerClass, SolveError};

/// Slack for comparing a share with a continuation value or threshold.
pub const VOTE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("agent offer is invalid in round {round}: {reason}")]
    AgentOfferInvalid { round: usize, reason: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("n_matches must be at least 1")]
    NoMatches,
    #[error("cannot parse match log: {0}")]
    Parse(String),
}

/// Coefficients of the acceptance logit. Shares are fractions of the
/// round-1 prize in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub constant: f64,
    pub strong: f64,
    pub own_share: f64,
    pub gini: f64,
}

impl LogitModel {
    pub fn new(constant: f64, strong: f64, own_share: f64, gini: f64) -> LogitModel {
        LogitModel { constant, strong, own_share, gini }
    }

    pub fn index(&self, own_share: f64, strong: bool, gini: f64) -> f64 {
        self.constant + self.strong * f64::from(u8::from(strong)) + self.own_share * own_share + self.gini * gini
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.constant, self.strong, self.own_share, self.gini]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|b| b.is_finite())
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit_accept_prob(model: &LogitModel, own_share: f64, strong: bool, gini: f64) -> f64 {
    logistic(model.index(own_share, strong, gini))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoterAgent {
    /// Accepts iff offered at least the equilibrium continuation value.
    Equilibrium,
    /// Accepts iff offered at least a threshold drawn from the first
    /// marginal of `belief`.
    Threshold {
        belief: BeliefFamily,
        #[serde(default)]
        redraw_each_round: bool,
    },
    Logit {
        model: LogitModel,
    },
}

/// Shares in role coordinates: (proposer, weak partner, strong partner).
/// When the partners are equally strong the lower-index non-proposer takes
/// the weak slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposerAgent {
    Equilibrium,
    BeliefOpt { role_shares: [f64; 3] },
    FixedOffer { role_shares: [f64; 3] },
    EmpiricalOpt { role_shares: [f64; 3] },
}

impl ProposerAgent {
    /// Plays the optimizer's offer, with the belief's B slot as the weak
    /// partner.
    pub fn belief_opt(belief: &ThresholdBelief, grid: GridSpec) -> Result<ProposerAgent, SimError> {
        let opt = optimize_offer(belief, grid)?;
        Ok(ProposerAgent::BeliefOpt { role_shares: opt.offer.shares() })
    }

    pub fn fixed(role_shares: [f64; 3]) -> Result<ProposerAgent, SimError> {
        Allocation::new(role_shares).map_err(|e| SimError::AgentOfferInvalid { round: 0, reason: e.to_string() })?;
        Ok(ProposerAgent::FixedOffer { role_shares })
    }

    pub fn egalitarian_mwc() -> ProposerAgent {
        ProposerAgent::FixedOffer { role_shares: [0.5, 0.5, 0.0] }
    }

    pub fn egalitarian_gc() -> ProposerAgent {
        let third = 1.0 / 3.0;
        ProposerAgent::FixedOffer { role_shares: [1.0 - 2.0 * third, third, third] }
    }

    pub fn dictatorial() -> ProposerAgent {
        ProposerAgent::FixedOffer { role_shares: [1.0, 0.0, 0.0] }
    }
}

/// Agent assignment by positional player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agents {
    pub proposers: [ProposerAgent; 3],
    pub voters: [VoterAgent; 3],
}

impl Agents {
    pub fn uniform(proposer: ProposerAgent, voter: VoterAgent) -> Agents {
        Agents {
            proposers: [proposer.clone(), proposer.clone(), proposer],
            voters: [voter.clone(), voter.clone(), voter],
        }
    }

    pub fn equilibrium() -> Agents {
        Agents::uniform(ProposerAgent::Equilibrium, VoterAgent::Equilibrium)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "player", rename_all = "snake_case")]
pub enum LogDisclosure {
    KnownNext(u8),
    ExcludedNext(u8),
    NoInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalKind {
    PassedRound(usize),
    Defaulted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub proposer: u8,
    pub disclosure: LogDisclosure,
    /// Shares of the current budget, by id.
    pub offer: Allocation,
    /// Accept votes by id; the proposer always accepts.
    pub votes: [bool; 3],
    pub passed: bool,
    #[serde(default = "one_f64")]
    pub budget: f64,
    /// Equilibrium class of each non-proposer, keyed by id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_class: Option<BTreeMap<u8, PartnerClass>>,
    /// Threshold draws of threshold voters, keyed by id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<BTreeMap<u8, f64>>,
}

fn one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchLog {
    pub spec_id: String,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    /// Payoffs by id, in fractions of the round-1 prize.
    pub final_alloc: [f64; 3],
    pub terminal_kind: TerminalKind,
}

impl MatchLog {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("match logs always serialize")
    }

    pub fn first_round(&self) -> &RoundRecord {
        &self.rounds[0]
    }

    /// Checks the schema invariants against the spec that produced the log.
    pub fn check(&self, spec: &GameSpec) -> Result<(), String> {
        if self.rounds.is_empty() || self.rounds.len() > spec.num_rounds {
            return Err(format!("{} rounds recorded", self.rounds.len()));
        }
        for (idx, r) in self.rounds.iter().enumerate() {
            if r.round != idx + 1 {
                return Err(format!("round index {} at position {idx}", r.round));
            }
            if !(1..=3).contains(&r.proposer) {
                return Err(format!("round {}: proposer id {} out of range", r.round, r.proposer));
            }
            if !r.votes[(r.proposer - 1) as usize] {
                return Err(format!("round {}: proposer voted against", r.round));
            }
            let yes = r.votes.iter().filter(|v| **v).count();
            if r.passed != (yes >= 2) {
                return Err(format!("round {}: passed flag disagrees with {yes} accept votes", r.round));
            }
            let last = idx + 1 == self.rounds.len();
            if r.passed && !last {
                return Err(format!("round {} passed but play continued", r.round));
            }
            let total: f64 = r.offer.shares().iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(format!("round {}: offer sums to {total}", r.round));
            }
        }
        let last = self.rounds.last().expect("non-empty");
        let final_total: f64 = self.final_alloc.iter().sum();
        match self.terminal_kind {
            TerminalKind::PassedRound(t) => {
                if !last.passed || t != last.round {
                    return Err("terminal kind does not match the last round".into());
                }
                if (final_total - last.budget).abs() > 1e-9 {
                    return Err(format!("final allocation sums to {final_total}, budget {}", last.budget));
                }
                for (x, s) in self.final_alloc.iter().zip(last.offer.shares()) {
                    if (x - s * last.budget).abs() > 1e-9 {
                        return Err("final allocation differs from the passed offer".into());
                    }
                }
            }
            TerminalKind::Defaulted => {
                if last.passed || self.rounds.len() != spec.num_rounds {
                    return Err("defaulted match with a passed round or missing rounds".into());
                }
                // ids are relative to the first proposer, so compare as multisets
                let mut want = spec.defaults_f64();
                let mut got = self.final_alloc;
                want.sort_by(f64::total_cmp);
                got.sort_by(f64::total_cmp);
                if want.iter().zip(&got).any(|(a, b)| (a - b).abs() > 1e-9) {
                    return Err("defaulted match does not pay the scaled defaults".into());
                }
            }
        }
        Ok(())
    }
}

/// Positional players in id order: the first proposer, then the others.
pub fn id_order(first: Player) -> [Player; 3] {
    let [x, y] = first.others();
    [first, x, y]
}

/// Precomputed equilibrium and agents for one treatment.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub spec: GameSpec,
    pub solution: Arc<EquilibriumSolution>,
    pub agents: Agents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub spec_id: String,
    pub n_matches: usize,
    pub seed: u64,
    pub first_offer_rejection_rate: f64,
    pub mean_first_proposer_payoff: f64,
    /// Matches passing in round 1, 2, ... .
    pub pass_round_counts: Vec<usize>,
    pub defaulted: usize,
}

impl Simulator {
    pub fn new(spec: &GameSpec, agents: Agents) -> Result<Simulator, SimError> {
        let solution = solve(spec)?;
        Ok(Simulator { spec: solution.spec.clone(), solution: Arc::new(solution), agents })
    }

    pub fn with_solution(solution: Arc<EquilibriumSolution>, agents: Agents) -> Simulator {
        Simulator { spec: solution.spec.clone(), solution, agents }
    }

    pub fn run_match(&self, seed: u64) -> Result<MatchLog, SimError> {
        let spec = &self.spec;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = sample_order(spec, &mut rng);
        let disclosures: Vec<Disclosure> = (0..spec.num_rounds)
            .map(|t| {
                if t + 1 == spec.num_rounds {
                    return Disclosure::NoInfo;
                }
                let next = order[t + 1];
                match spec.protocol {
                    InfoProtocol::Perfect => Disclosure::KnownNext(next),
                    InfoProtocol::Partial => {
                        let others = next.others();
                        Disclosure::ExcludedNext(others[usize::from(rng.random::<bool>())])
                    }
                    InfoProtocol::None => Disclosure::NoInfo,
                }
            })
            .collect();

        let ids = id_order(order[0]);
        let id_of = |p: Player| ids.iter().position(|&x| x == p).expect("every player has an id") as u8 + 1;

        let mut thresholds: [Option<f64>; 3] = [None, None, None];
        let draw_thresholds = |rng: &mut ChaCha8Rng, thresholds: &mut [Option<f64>; 3]| {
            for p in Player::ALL {
                if let VoterAgent::Threshold { belief, .. } = &self.agents.voters[p.index()] {
                    thresholds[p.index()] = Some(belief.sample(rng).0);
                }
            }
        };
        draw_thresholds(&mut rng, &mut thresholds);

        let mut rounds = Vec::with_capacity(spec.num_rounds);
        for t in 1..=spec.num_rounds {
            if t > 1
                && self.agents.voters.iter().any(|v| matches!(v, VoterAgent::Threshold { redraw_each_round: true, .. }))
            {
                let mut fresh = [None, None, None];
                draw_thresholds(&mut rng, &mut fresh);
                for p in Player::ALL {
                    if let VoterAgent::Threshold { redraw_each_round: true, .. } = self.agents.voters[p.index()] {
                        thresholds[p.index()] = fresh[p.index()];
                    }
                }
            }
            let proposer = order[t - 1];
            let state = self
                .solution
                .state(t, proposer, disclosures[t - 1])
                .cloned()
                .ok_or_else(|| SolveError::UnknownState(format!("t={t} proposer={proposer}")))?;
            let budget = rational::to_f64(&state.budget);
            let classes = self.classes(&state);
            let offer = self.propose(&state, &classes, &mut rng)?;
            let offer_gini = gini(&offer.shares());
            let cont = self.solution.continuation[&state].clone().map(|c| rational::to_f64(&c));

            let mut votes = [false; 3];
            for p in Player::ALL {
                votes[p.index()] = if p == proposer {
                    true
                } else {
                    let own = offer.share(p) * budget;
                    let strong = classes[p.index()] == Some(PartnerClass::Strong);
                    match &self.agents.voters[p.index()] {
                        VoterAgent::Equilibrium => own + VOTE_TOL >= cont[p.index()],
                        VoterAgent::Threshold { .. } => own + VOTE_TOL >= thresholds[p.index()].unwrap_or(0.0),
                        VoterAgent::Logit { model } => {
                            rng.random::<f64>() < logit_accept_prob(model, own, strong, offer_gini)
                        }
                    }
                };
            }
            let passed = votes.iter().filter(|v| **v).count() >= 2;

            let by_id = |x: [f64; 3]| ids.map(|p| x[p.index()]);
            let partner_class: BTreeMap<u8, PartnerClass> =
                proposer.others().iter().filter_map(|&p| classes[p.index()].map(|c| (id_of(p), c))).collect();
            let drawn: BTreeMap<u8, f64> =
                Player::ALL.iter().filter_map(|&p| thresholds[p.index()].map(|v| (id_of(p), v))).collect();
            rounds.push(RoundRecord {
                round: t,
                proposer: id_of(proposer),
                disclosure: match disclosures[t - 1] {
                    Disclosure::KnownNext(k) => LogDisclosure::KnownNext(id_of(k)),
                    Disclosure::ExcludedNext(j) => LogDisclosure::ExcludedNext(id_of(j)),
                    Disclosure::NoInfo => LogDisclosure::NoInfo,
                },
                offer: Allocation::new(by_id(offer.shares())).expect("permuted allocation stays valid"),
                votes: ids.map(|p| votes[p.index()]),
                passed,
                budget,
                partner_class: Some(partner_class),
                thresholds: if drawn.is_empty() { None } else { Some(drawn) },
            });
            if passed {
                return Ok(MatchLog {
                    spec_id: spec.id.clone(),
                    seed,
                    final_alloc: by_id(offer.scaled(budget)),
                    rounds,
                    terminal_kind: TerminalKind::PassedRound(t),
                });
            }
        }
        let defaults = spec.defaults_f64();
        Ok(MatchLog {
            spec_id: spec.id.clone(),
            seed,
            final_alloc: ids.map(|p| defaults[p.index()]),
            rounds,
            terminal_kind: TerminalKind::Defaulted,
        })
    }

    fn classes(&self, state: &InfoState) -> [Option<PartnerClass>; 3] {
        let mut out = [None, None, None];
        for p in state.proposer.others() {
            out[p.index()] = self.solution.partner_class.get(&(state.clone(), p)).copied();
        }
        out
    }

    fn propose(
        &self,
        state: &InfoState,
        classes: &[Option<PartnerClass>; 3],
        rng: &mut ChaCha8Rng,
    ) -> Result<Allocation, SimError> {
        let proposer = state.proposer;
        let invalid = |reason: String| SimError::AgentOfferInvalid { round: state.round, reason };
        match &self.agents.proposers[proposer.index()] {
            ProposerAgent::Equilibrium => {
                let offers = &self.solution.policy[state];
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &offers[offers.len() - 1];
                for offer in offers {
                    acc += rational::to_f64(&offer.prob);
                    if u < acc {
                        chosen = offer;
                        break;
                    }
                }
                Allocation::from_exact(&chosen.shares).map_err(|e| invalid(e.to_string()))
            }
            ProposerAgent::BeliefOpt { role_shares }
            | ProposerAgent::FixedOffer { role_shares }
            | ProposerAgent::EmpiricalOpt { role_shares } => {
                let (weak, strong) = weak_strong(proposer, classes);
                let mut shares = [0.0; 3];
                shares[proposer.index()] = role_shares[0];
                shares[weak.index()] = role_shares[1];
                shares[strong.index()] = role_shares[2];
                Allocation::new(shares).map_err(|e| invalid(e.to_string()))
            }
        }
    }

    pub fn run_batch(&self, n_matches: usize, seed: u64) -> Result<(Vec<MatchLog>, BatchSummary), SimError> {
        if n_matches == 0 {
            return Err(SimError::NoMatches);
        }
        let logs: Vec<MatchLog> = (0..n_matches as u64)
            .into_par_iter()
            .map(|i| self.run_match(seed.wrapping_add(i)))
            .collect::<Result<_, _>>()?;
        let summary = summarize(&self.spec, &logs, seed);
        Ok((logs, summary))
    }
}

/// Weak and strong partner of `proposer`; ties put the lower-index player
/// in the weak slot.
pub fn weak_strong(proposer: Player, classes: &[Option<PartnerClass>; 3]) -> (Player, Player) {
    let [j, k] = proposer.others();
    if classes[k.index()] == Some(PartnerClass::Weak) {
        (k, j)
    } else {
        (j, k)
    }
}

/// Draws `p_1..p_T` from the recognition model.
pub fn sample_order<R: Rng + ?Sized>(spec: &GameSpec, rng: &mut R) -> Vec<Player> {
    let draw = |rng: &mut R, dist: &[Q; 3]| {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = Player::A;
        for p in Player::ALL {
            let w = rational::to_f64(&dist[p.index()]);
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = p;
            if u < acc {
                return p;
            }
        }
        last
    };
    let mut order = vec![draw(rng, &spec.recognition.initial())];
    for t in 1..spec.num_rounds {
        let prev = order[t - 1];
        let row = spec.recognition.transition(t)[prev.index()].clone();
        order.push(draw(rng, &row));
    }
    order
}

pub fn summarize(spec: &GameSpec, logs: &[MatchLog], seed: u64) -> BatchSummary {
    let n = logs.len();
    let rejected = logs.iter().filter(|l| !l.rounds[0].passed).count();
    let mut pass_round_counts = vec![0; spec.num_rounds];
    let mut defaulted = 0;
    for log in logs {
        match log.terminal_kind {
            TerminalKind::PassedRound(t) => pass_round_counts[t - 1] += 1,
            TerminalKind::Defaulted => defaulted += 1,
        }
    }
    BatchSummary {
        spec_id: spec.id.clone(),
        n_matches: n,
        seed,
        first_offer_rejection_rate: rejected as f64 / n.max(1) as f64,
        mean_first_proposer_payoff: logs.iter().map(|l| l.final_alloc[0]).sum::<f64>() / n.max(1) as f64,
        pass_round_counts,
        defaulted,
    }
}

pub fn run_match(spec: &GameSpec, agents: Agents, seed: u64) -> Result<MatchLog, SimError> {
    Simulator::new(spec, agents)?.run_match(seed)
}

pub fn run_batch(
    spec: &GameSpec,
    agents: Agents,
    n_matches: usize,
    seed: u64,
) -> Result<(Vec<MatchLog>, BatchSummary), SimError> {
    Simulator::new(spec, agents)?.run_batch(n_matches, seed)
}

pub fn to_jsonl(logs: &[MatchLog]) -> String {
    let mut out = String::new();
    for log in logs {
        out.push_str(&log.to_json_line());
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<Vec<MatchLog>, SimError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| SimError::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::RecognitionModel;

    fn one_round() -> GameSpec {
        GameSpec::new("1-perfect", 1, InfoProtocol::Perfect, [q(1, 20), q(1, 20), q(9, 10)])
            .with_recognition(RecognitionModel::FixedOrder(vec![Player::A]))
    }

    #[test]
    fn logit_examples() {
        let m = LogitModel::new(-2.428, -1.358, 10.851, -4.519);
        let p = logit_accept_prob(&m, 0.5, false, 1.0 / 3.0);
        assert!((m.index(0.5, false, 1.0 / 3.0) - 1.491166666).abs() < 1e-6);
        assert!((p - 0.816).abs() < 5e-4);
        let zero = LogitModel::new(-1.0, 0.0, 2.0, 0.0);
        assert_eq!(logit_accept_prob(&zero, 0.5, false, 0.2), 0.5);
        assert!(logistic(-800.0) >= 0.0 && logistic(800.0) <= 1.0);
    }

    #[test]
    fn equilibrium_one_round_match() {
        let log = run_match(&one_round(), Agents::equilibrium(), 3).unwrap();
        assert_eq!(log.terminal_kind, TerminalKind::PassedRound(1));
        let mut shares = log.final_alloc;
        shares.sort_by(f64::total_cmp);
        assert!((shares[2] - 0.95).abs() < 1e-12 && (shares[1] - 0.05).abs() < 1e-12 && shares[0] == 0.0);
        log.check(&one_round()).unwrap();
    }

    #[test]
    fn impossible_thresholds_default() {
        let spec = GameSpec::new("3-none", 3, InfoProtocol::None, [q(0, 1), q(0, 1), q(0, 1)]);
        let voter = VoterAgent::Threshold {
            belief: BeliefFamily::Discrete { points: vec![(1.0, 1.0, 1.0)] },
            redraw_each_round: false,
        };
        let log = run_match(&spec, Agents::uniform(ProposerAgent::egalitarian_mwc(), voter), 11).unwrap();
        assert_eq!(log.terminal_kind, TerminalKind::Defaulted);
        assert_eq!(log.final_alloc, [0.0; 3]);
        assert!(log.rounds.iter().all(|r| r.thresholds.as_ref().unwrap().len() == 3));
        log.check(&spec).unwrap();
    }

    #[test]
    fn invalid_offers_are_reported() {
        let agents =
            Agents::uniform(ProposerAgent::FixedOffer { role_shares: [0.7, 0.7, 0.0] }, VoterAgent::Equilibrium);
        assert!(matches!(run_match(&one_round(), agents, 0), Err(SimError::AgentOfferInvalid { .. })));
        assert!(ProposerAgent::fixed([0.7, 0.7, 0.0]).is_err());
    }

    #[test]
    fn jsonl_round_trip_and_field_names() {
        let spec = GameSpec::new("3-partial", 3, InfoProtocol::Partial, [q(0, 1), q(0, 1), q(0, 1)]);
        let (logs, summary) = run_batch(&spec, Agents::equilibrium(), 20, 5).unwrap();
        assert_eq!(summary.first_offer_rejection_rate, 0.0);
        let text = to_jsonl(&logs);
        assert_eq!(from_jsonl(&text).unwrap(), logs);
        let value: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
        let mut want = vec!["spec_id", "seed", "rounds", "final_alloc", "terminal_kind"];
        want.sort();
        let mut keys = keys;
        keys.sort();
        assert_eq!(keys, want);
    }

    #[test]
    fn batch_of_one_matches_single_run() {
        let spec = one_round();
        let sim = Simulator::new(&spec, Agents::equilibrium()).unwrap();
        let (logs, _) = sim.run_batch(1, 42).unwrap();
        assert_eq!(logs[0], sim.run_match(42).unwrap());
    }
}
