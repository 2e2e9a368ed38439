//! Subgame-perfect equilibrium by backward induction over information states.
//!
//! Voters accept whenever their share is at least their continuation value.
//! When both non-proposers are equally cheap the proposer mixes 50/50 over
//! the two minimum winning offers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    enumerate_info_states, Disclosure, GameError, GameSpec, InfoProtocol, InfoState, Player, RecognitionModel,
};
use crate::rational::{self, q, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid game spec: {0}")]
    SpecInvalid(#[from] GameError),
    #[error("state {0} is not reachable in this game")]
    UnknownState(String),
    #[error("player {0} is the proposer in this state")]
    PlayerIsProposer(Player),
    #[error("condition {condition:?} does not apply: {reason}")]
    ConditionNotApplicable { condition: Condition, reason: String },
}

/// Expected continuation payoffs, in round-1 prize units, conditional on the
/// current proposal failing.
pub type ContinuationTable = BTreeMap<InfoState, [Q; 3]>;

/// One equilibrium proposal. Shares are fractions of the current budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Offer {
    pub shares: [Q; 3],
    pub prob: Q,
}

impl Offer {
    pub fn shares_f64(&self) -> [f64; 3] {
        self.shares.clone().map(|s| rational::to_f64(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartnerClass {
    Weak,
    Strong,
    #[serde(rename = "na")]
    NA,
}

impl std::fmt::Display for PartnerClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PartnerClass::Weak => "weak",
            PartnerClass::Strong => "strong",
            PartnerClass::NA => "na",
        })
    }
}

/// Disclosure condition seen by a proposer.
///
/// `Incl` means the current proposer may also propose next round (under
/// Perfect: is announced as next proposer; under Partial: is not the
/// excluded player). `Excl` is the complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Incl,
    Excl,
    Unconditional,
}

impl Condition {
    pub fn parse(s: &str) -> Option<Condition> {
        match s.trim().to_ascii_lowercase().as_str() {
            "incl" => Some(Condition::Incl),
            "excl" => Some(Condition::Excl),
            "unconditional" | "all" => Some(Condition::Unconditional),
            _ => None,
        }
    }

    /// The condition of a state, if the state carries a disclosure.
    pub fn of_state(state: &InfoState) -> Option<Condition> {
        match state.disclosure {
            Disclosure::KnownNext(k) => Some(if k == state.proposer { Condition::Incl } else { Condition::Excl }),
            Disclosure::ExcludedNext(j) => Some(if j != state.proposer { Condition::Incl } else { Condition::Excl }),
            Disclosure::NoInfo => None,
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Condition::Incl => "incl",
            Condition::Excl => "excl",
            Condition::Unconditional => "unconditional",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub spec: GameSpec,
    pub continuation: ContinuationTable,
    pub policy: BTreeMap<InfoState, Vec<Offer>>,
    /// Expected equilibrium payoffs at each state, in round-1 prize units.
    pub values: BTreeMap<InfoState, [Q; 3]>,
    pub partner_class: BTreeMap<(InfoState, Player), PartnerClass>,
    /// Probability of each state given that its round is reached.
    pub state_prob: BTreeMap<InfoState, Q>,
    /// Expected round-1 proposer payoff.
    pub first_share: Q,
}

/// Which partner to pick when the two non-proposers are equally cheap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieChoice {
    Mix,
    First,
    Second,
}

pub fn solve(spec: &GameSpec) -> Result<EquilibriumSolution, SolveError> {
    solve_with(spec, |_| TieChoice::Mix)
}

/// Backward induction with an explicit tie-breaking rule.
pub fn solve_with(spec: &GameSpec, tie: impl Fn(&InfoState) -> TieChoice) -> Result<EquilibriumSolution, SolveError> {
    let spec = spec.clone().validate()?;
    let mut continuation = ContinuationTable::new();
    let mut policy = BTreeMap::new();
    let mut values: BTreeMap<InfoState, [Q; 3]> = BTreeMap::new();
    let mut partner_class = BTreeMap::new();
    let mut state_prob = BTreeMap::new();

    for round in (1..=spec.num_rounds).rev() {
        for (state, prob) in enumerate_info_states(&spec, round)? {
            let cont = if round == spec.num_rounds {
                spec.default_payoffs()
            } else {
                let mut acc = [rational::zero(), rational::zero(), rational::zero()];
                for (next, p) in spec.next_states(&state) {
                    let v = values.get(&next).ok_or_else(|| SolveError::UnknownState(next.to_string()))?;
                    for i in 0..3 {
                        acc[i] += &p * &v[i];
                    }
                }
                acc
            };

            let proposer = state.proposer;
            let [j, k] = proposer.others();
            let (cj, ck) = (&cont[j.index()], &cont[k.index()]);
            let (class_j, class_k) = match cj.cmp(ck) {
                std::cmp::Ordering::Less => (PartnerClass::Weak, PartnerClass::Strong),
                std::cmp::Ordering::Greater => (PartnerClass::Strong, PartnerClass::Weak),
                std::cmp::Ordering::Equal => (PartnerClass::NA, PartnerClass::NA),
            };
            partner_class.insert((state.clone(), j), class_j);
            partner_class.insert((state.clone(), k), class_k);

            let partners: Vec<(Player, Q)> = match class_j {
                PartnerClass::Weak => vec![(j, rational::one())],
                PartnerClass::Strong => vec![(k, rational::one())],
                PartnerClass::NA => match tie(&state) {
                    TieChoice::Mix => vec![(j, q(1, 2)), (k, q(1, 2))],
                    TieChoice::First => vec![(j, rational::one())],
                    TieChoice::Second => vec![(k, rational::one())],
                },
            };

            let budget = &state.budget;
            let mut offers: Vec<Offer> = Vec::new();
            let mut value = [rational::zero(), rational::zero(), rational::zero()];
            for (partner, p) in partners {
                let price = cont[partner.index()].clone();
                let mut payoff = [rational::zero(), rational::zero(), rational::zero()];
                payoff[partner.index()] = price.clone();
                payoff[proposer.index()] = budget - &price;
                let shares = payoff.clone().map(|x| x / budget);
                for i in 0..3 {
                    value[i] += &p * &payoff[i];
                }
                match offers.iter_mut().find(|o| o.shares == shares) {
                    Some(existing) => existing.prob += p,
                    None => offers.push(Offer { shares, prob: p }),
                }
            }

            continuation.insert(state.clone(), cont);
            policy.insert(state.clone(), offers);
            values.insert(state.clone(), value);
            state_prob.insert(state, prob);
        }
    }

    let first_share =
        values.iter().filter(|(s, _)| s.round == 1).map(|(s, v)| &state_prob[s] * &v[s.proposer.index()]).sum();

    Ok(EquilibriumSolution { spec, continuation, policy, values, partner_class, state_prob, first_share })
}

pub fn continuation_values(sol: &EquilibriumSolution, state: &InfoState) -> Result<[Q; 3], SolveError> {
    sol.continuation.get(state).cloned().ok_or_else(|| SolveError::UnknownState(state.to_string()))
}

pub fn classify_partner(
    sol: &EquilibriumSolution,
    state: &InfoState,
    player: Player,
) -> Result<PartnerClass, SolveError> {
    if player == state.proposer {
        return Err(SolveError::PlayerIsProposer(player));
    }
    sol.partner_class.get(&(state.clone(), player)).copied().ok_or_else(|| SolveError::UnknownState(state.to_string()))
}

/// Expected round-1 proposer payoff under a disclosure condition.
pub fn predicted_first_share(sol: &EquilibriumSolution, condition: Condition) -> Result<Q, SolveError> {
    predicted_share(sol, 1, condition)
}

/// Expected proposer payoff in `round`, as a fraction of that round's
/// budget, conditional on the round being reached and on the disclosure.
pub fn predicted_share(sol: &EquilibriumSolution, round: usize, condition: Condition) -> Result<Q, SolveError> {
    let spec = &sol.spec;
    if round == 0 || round > spec.num_rounds {
        return Err(GameError::RoundOutOfRange { round, num_rounds: spec.num_rounds }.into());
    }
    if condition != Condition::Unconditional {
        if spec.protocol == InfoProtocol::None || spec.num_rounds < 2 {
            return Err(SolveError::ConditionNotApplicable { condition, reason: "no disclosure in this game".into() });
        }
        if round == spec.num_rounds {
            return Err(SolveError::ConditionNotApplicable {
                condition,
                reason: "nothing is disclosed in the final round".into(),
            });
        }
    }
    let mut num = rational::zero();
    let mut den = rational::zero();
    for (state, value) in sol.values.iter().filter(|(s, _)| s.round == round) {
        if condition != Condition::Unconditional && Condition::of_state(state) != Some(condition) {
            continue;
        }
        let p = &sol.state_prob[state];
        num += p * &value[state.proposer.index()] / &state.budget;
        den += p;
    }
    if den.is_zero() {
        return Err(SolveError::ConditionNotApplicable { condition, reason: "condition has probability zero".into() });
    }
    Ok(num / den)
}

impl EquilibriumSolution {
    pub fn states(&self, round: usize) -> impl Iterator<Item = &InfoState> {
        self.policy.keys().filter(move |s| s.round == round)
    }

    pub fn offers(&self, state: &InfoState) -> Result<&[Offer], SolveError> {
        self.policy.get(state).map(Vec::as_slice).ok_or_else(|| SolveError::UnknownState(state.to_string()))
    }

    /// Looks a state up by its observable components.
    pub fn state(&self, round: usize, proposer: Player, disclosure: Disclosure) -> Option<&InfoState> {
        self.policy.keys().find(|s| s.round == round && s.proposer == proposer && s.disclosure == disclosure)
    }

    /// Table-1 style predicted proposer shares for every round and
    /// applicable condition.
    pub fn share_table(&self) -> Vec<(usize, Condition, Q)> {
        let mut out = Vec::new();
        for round in 1..=self.spec.num_rounds {
            for condition in [Condition::Incl, Condition::Excl, Condition::Unconditional] {
                if let Ok(share) = predicted_share(self, round, condition) {
                    out.push((round, condition, share));
                }
            }
        }
        out
    }

    /// Per-state report as CSV.
    pub fn report_csv(&self) -> String {
        let mut out = String::from(
            "round,proposer,disclosure,condition,prob,cont_A,cont_B,cont_C,class_A,class_B,class_C,offers\n",
        );
        for (state, offers) in &self.policy {
            let cont = &self.continuation[state];
            let classes: Vec<String> = Player::ALL
                .iter()
                .map(|&p| self.partner_class.get(&(state.clone(), p)).map_or("-".into(), |c| c.to_string()))
                .collect();
            let offers: Vec<String> = offers
                .iter()
                .map(|o| {
                    let s: Vec<String> = o.shares.iter().map(rational::display).collect();
                    format!("{}@({})", rational::display(&o.prob), s.join(" "))
                })
                .collect();
            let condition = Condition::of_state(state).map_or("-".to_string(), |c| format!("{c:?}").to_lowercase());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                state.round,
                state.proposer,
                state.disclosure,
                condition,
                rational::display(&self.state_prob[state]),
                rational::display(&cont[0]),
                rational::display(&cont[1]),
                rational::display(&cont[2]),
                classes[0],
                classes[1],
                classes[2],
                offers.join(";")
            );
        }
        out
    }

    pub fn report_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .policy
            .iter()
            .map(|(state, offers)| {
                let cont = &self.continuation[state];
                let classes: serde_json::Map<String, serde_json::Value> = Player::ALL
                    .iter()
                    .filter_map(|&p| {
                        self.partner_class.get(&(state.clone(), p)).map(|c| (p.to_string(), serde_json::json!(c)))
                    })
                    .collect();
                serde_json::json!({
                    "round": state.round,
                    "proposer": state.proposer,
                    "disclosure": state.disclosure,
                    "condition": Condition::of_state(state),
                    "prob": rational::display(&self.state_prob[state]),
                    "continuation": cont.iter().map(rational::display).collect::<Vec<_>>(),
                    "continuation_f64": cont.iter().map(rational::to_f64).collect::<Vec<_>>(),
                    "partner_class": classes,
                    "offers": offers.iter().map(|o| serde_json::json!({
                        "prob": rational::display(&o.prob),
                        "shares": o.shares.iter().map(rational::display).collect::<Vec<_>>(),
                        "shares_f64": o.shares_f64(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let shares: Vec<serde_json::Value> = self
            .share_table()
            .into_iter()
            .map(|(round, condition, share)| {
                serde_json::json!({
                    "round": round,
                    "condition": condition,
                    "share": rational::display(&share),
                    "share_f64": rational::to_f64(&share),
                })
            })
            .collect();
        serde_json::json!({
            "spec_id": self.spec.id,
            "first_share": rational::display(&self.first_share),
            "first_share_f64": rational::to_f64(&self.first_share),
            "predicted_shares": shares,
            "states": states,
        })
    }
}

/// Outcome of the introduction's fixed-order game.
#[derive(Debug, Clone)]
pub struct WorkedExampleReport {
    pub defaults: [Q; 3],
    /// Equilibrium proposals per round (round 1 first) with their
    /// probabilities.
    pub proposals: Vec<Vec<Offer>>,
    pub alice_share: Q,
    /// Some pure tie-breaking profile gives Alice less than the whole prize.
    pub knife_edge: bool,
    /// Distinct round-1 offers between which the first proposer is
    /// indifferent under some pure tie-breaking profile.
    pub round1_ties: Vec<[Q; 3]>,
    /// Alice receives the whole prize under the 50/50 convention.
    pub full_extraction: bool,
}

/// Solves the three-round game with known order Alice, Bob, Carol and
/// defaults `v`.
pub fn worked_example_check(v: [Q; 3]) -> Result<WorkedExampleReport, SolveError> {
    let spec = worked_example_spec(v.clone());
    let sol = solve(&spec)?;
    let proposals: Vec<Vec<Offer>> = (1..=3)
        .map(|t| {
            let state = sol.states(t).next().expect("one state per round");
            sol.policy[state].clone()
        })
        .collect();
    let alice_share = sol.first_share.clone();

    let mut knife_edge = false;
    let mut round1_ties: Vec<[Q; 3]> = Vec::new();
    for profile in 0..8u32 {
        let pure =
            solve_with(
                &spec,
                |s| {
                    if profile >> (s.round - 1) & 1 == 0 {
                        TieChoice::First
                    } else {
                        TieChoice::Second
                    }
                },
            )?;
        if pure.first_share != rational::one() {
            knife_edge = true;
        }
        let first = pure.states(1).next().expect("one round-1 state");
        if pure.partner_class[&(first.clone(), Player::B)] == PartnerClass::NA {
            // both minimum winning offers are optimal for Alice here
            let cont = &pure.continuation[first];
            for partner in [Player::B, Player::C] {
                let mut shares = [rational::zero(), rational::zero(), rational::zero()];
                shares[partner.index()] = cont[partner.index()].clone();
                shares[0] = rational::one() - &cont[partner.index()];
                if !round1_ties.contains(&shares) {
                    round1_ties.push(shares);
                }
            }
        }
    }
    round1_ties.sort();
    let full_extraction = alice_share == rational::one();
    Ok(WorkedExampleReport { defaults: v, proposals, alice_share, knife_edge, round1_ties, full_extraction })
}

pub fn worked_example_spec(v: [Q; 3]) -> GameSpec {
    GameSpec::new("intro-example", 3, InfoProtocol::Perfect, v).with_recognition(RecognitionModel::FixedOrder(vec![
        Player::A,
        Player::B,
        Player::C,
    ]))
}

/// True if every state's offers satisfy the structural equilibrium
/// properties: the proposer keeps at least half, someone gets nothing and
/// every offer passes under equilibrium voting.
pub fn check_offer_structure(sol: &EquilibriumSolution) -> Result<(), String> {
    for (state, offers) in &sol.policy {
        let cont = &sol.continuation[state];
        let prob: Q = offers.iter().map(|o| o.prob.clone()).sum();
        if prob != rational::one() {
            return Err(format!("{state}: offer probabilities sum to {}", rational::display(&prob)));
        }
        for offer in offers {
            let total: Q = offer.shares.iter().sum();
            if total != rational::one() || offer.shares.iter().any(|s| s.is_negative()) {
                return Err(format!("{state}: offer is not a division of the budget"));
            }
            if offer.shares[state.proposer.index()] < q(1, 2) {
                return Err(format!("{state}: proposer keeps less than half"));
            }
            if !offer.shares.iter().any(|s| s.is_zero()) {
                return Err(format!("{state}: nobody is excluded"));
            }
            let yes = state
                .proposer
                .others()
                .iter()
                .filter(|p| &offer.shares[p.index()] * &state.budget >= cont[p.index()])
                .count();
            if yes == 0 {
                return Err(format!("{state}: offer fails under equilibrium voting"));
            }
        }
    }
    Ok(())
}
