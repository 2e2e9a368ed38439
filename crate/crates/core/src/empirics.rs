//! Analysis of match logs: coalition taxonomy, inequality, voting logits,
//! rejection payoffs, empirical payoff surfaces and optimization rates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Allocation, Disclosure, Player};
use crate::rational::{self, Q};
use crate::sim::{logistic, LogDisclosure, LogitModel, MatchLog};
use crate::spe::{Condition, EquilibriumSolution, PartnerClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmpiricsError {
    #[error("threshold {0} outside (0, 1/3)")]
    BadThreshold(f64),
    #[error("perfect separation: {0}")]
    Separation(String),
    #[error("regressors are collinear")]
    Collinear,
    #[error("no observations in the sample")]
    EmptySample,
    #[error("grid step {0} outside (0, 0.05]")]
    BadStep(f64),
    #[error("csv: {0}")]
    Csv(String),
}

/// Gini coefficient of a three-way split, `(2/3)(max - min)`.
pub fn gini(shares: &[f64; 3]) -> f64 {
    let max = shares.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = shares.iter().cloned().fold(f64::INFINITY, f64::min);
    2.0 / 3.0 * (max - min)
}

/// Exact form of [`gini`] for rational shares.
pub fn gini_exact(shares: &[Q; 3]) -> Q {
    let max = shares.iter().max().expect("three shares");
    let min = shares.iter().min().expect("three shares");
    rational::q(2, 3) * (max - min)
}

/// Mean absolute difference form, `sum |x_i - x_j| / (2 n^2 mean)`.
pub fn gini_mean_difference(shares: &[f64]) -> f64 {
    let n = shares.len() as f64;
    let mean = shares.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let total: f64 = shares.iter().flat_map(|a| shares.iter().map(move |b| (a - b).abs())).sum();
    total / (2.0 * n * n * mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionKind {
    Dictatorial,
    Mwc,
    GrandCoalition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    Weak,
    Strong,
    #[serde(rename = "na")]
    NA,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionClass {
    pub kind: CoalitionKind,
    pub target_class: TargetClass,
    pub egalitarian: bool,
    pub hybrid_egalitarian: bool,
}

/// The five columns of the optimization-rate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionType {
    MwcWeak,
    MwcStrong,
    MwcNa,
    GrandCoalition,
    Dictatorial,
}

impl CoalitionType {
    pub const ALL: [CoalitionType; 5] = [
        CoalitionType::MwcWeak,
        CoalitionType::MwcStrong,
        CoalitionType::MwcNa,
        CoalitionType::GrandCoalition,
        CoalitionType::Dictatorial,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CoalitionType::MwcWeak => "mwc_weak",
            CoalitionType::MwcStrong => "mwc_strong",
            CoalitionType::MwcNa => "mwc_na",
            CoalitionType::GrandCoalition => "grand_coalition",
            CoalitionType::Dictatorial => "dictatorial",
        }
    }
}

impl CoalitionClass {
    pub fn coalition_type(&self) -> CoalitionType {
        match (self.kind, self.target_class) {
            (CoalitionKind::Dictatorial, _) => CoalitionType::Dictatorial,
            (CoalitionKind::GrandCoalition, _) => CoalitionType::GrandCoalition,
            (CoalitionKind::Mwc, TargetClass::Weak) => CoalitionType::MwcWeak,
            (CoalitionKind::Mwc, TargetClass::Strong) => CoalitionType::MwcStrong,
            (CoalitionKind::Mwc, _) => CoalitionType::MwcNa,
        }
    }
}

pub const DEFAULT_PARTNER_THRESHOLD: f64 = 0.05;

/// Classifies an offer made by the player at index `proposer`. `classes`
/// holds the equilibrium class of each non-proposer, indexed like the
/// offer.
pub fn classify_coalition(
    offer: &Allocation,
    proposer: usize,
    classes: &[Option<PartnerClass>; 3],
    threshold: f64,
) -> Result<CoalitionClass, EmpiricsError> {
    if !(threshold > 0.0 && threshold < 1.0 / 3.0) {
        return Err(EmpiricsError::BadThreshold(threshold));
    }
    let shares = offer.shares();
    let others: Vec<usize> = (0..3).filter(|&i| i != proposer).collect();
    let partners: Vec<usize> = others.iter().copied().filter(|&i| shares[i] >= threshold).collect();
    let kind = match partners.len() {
        0 => CoalitionKind::Dictatorial,
        1 => CoalitionKind::Mwc,
        _ => CoalitionKind::GrandCoalition,
    };
    let target_class = match kind {
        CoalitionKind::Mwc => match classes[partners[0]] {
            Some(PartnerClass::Weak) => TargetClass::Weak,
            Some(PartnerClass::Strong) => TargetClass::Strong,
            _ => TargetClass::NA,
        },
        _ => TargetClass::NotApplicable,
    };
    let within = |a: usize, b: usize| (shares[a] - shares[b]).abs() <= threshold + 1e-12;
    let egalitarian = match kind {
        CoalitionKind::Dictatorial => false,
        _ => {
            let members: Vec<usize> = std::iter::once(proposer).chain(partners.iter().copied()).collect();
            members.iter().all(|&a| members.iter().all(|&b| within(a, b)))
        }
    };
    let hybrid_egalitarian = !egalitarian
        && others.iter().any(|&low| {
            let rest: Vec<usize> = (0..3).filter(|&i| i != low).collect();
            shares[low] < 1.0 / 3.0 && within(rest[0], rest[1])
        });
    Ok(CoalitionClass { kind, target_class, egalitarian, hybrid_egalitarian })
}

/// One non-proposer vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub treatment: String,
    #[serde(rename = "match")]
    pub match_id: usize,
    pub round: usize,
    pub voter: u8,
    /// Fraction of the round-1 prize.
    pub own_share: f64,
    pub strong_flag: u8,
    pub gini: f64,
    #[serde(with = "vote_format")]
    pub vote: bool,
}

mod vote_format {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        let raw = String::deserialize(d)?;
        match raw.trim().to_ascii_lowercase().as_str() {
            "1" | "accept" | "yes" | "true" => Ok(true),
            "0" | "reject" | "no" | "false" => Ok(false),
            other => Err(serde::de::Error::custom(format!("unrecognized vote {other:?}"))),
        }
    }
}

/// Equilibrium classes of the players of a logged round, in id order. Ids
/// are read as positions when the log carries no classes.
pub fn round_classes(
    log: &MatchLog,
    round_idx: usize,
    solution: Option<&EquilibriumSolution>,
) -> [Option<PartnerClass>; 3] {
    let record = &log.rounds[round_idx];
    let mut out = [None, None, None];
    if let Some(classes) = &record.partner_class {
        for (&id, &c) in classes {
            if (1..=3).contains(&id) {
                out[(id - 1) as usize] = Some(c);
            }
        }
        return out;
    }
    let Some(sol) = solution else { return out };
    let pos = |id: u8| Player::from_index(id as usize - 1).unwrap_or(Player::A);
    let disclosure = match record.disclosure {
        LogDisclosure::KnownNext(k) => Disclosure::KnownNext(pos(k)),
        LogDisclosure::ExcludedNext(j) => Disclosure::ExcludedNext(pos(j)),
        LogDisclosure::NoInfo => Disclosure::NoInfo,
    };
    let proposer = pos(record.proposer);
    if let Some(state) = sol.state(record.round, proposer, disclosure) {
        for p in proposer.others() {
            out[p.index()] = sol.partner_class.get(&(state.clone(), p)).copied();
        }
    }
    out
}

/// Disclosure condition of a logged round.
pub fn round_condition(log: &MatchLog, round_idx: usize) -> Option<Condition> {
    let r = &log.rounds[round_idx];
    match r.disclosure {
        LogDisclosure::KnownNext(k) => Some(if k == r.proposer { Condition::Incl } else { Condition::Excl }),
        LogDisclosure::ExcludedNext(j) => Some(if j != r.proposer { Condition::Incl } else { Condition::Excl }),
        LogDisclosure::NoInfo => None,
    }
}

/// Matches whose first round falls under `condition`. `Unconditional`
/// keeps everything.
pub fn filter_condition(logs: &[MatchLog], condition: Condition) -> Vec<MatchLog> {
    logs.iter()
        .filter(|l| condition == Condition::Unconditional || round_condition(l, 0) == Some(condition))
        .cloned()
        .collect()
}

/// The second half of a session's matches.
pub fn experienced(logs: &[MatchLog]) -> &[MatchLog] {
    &logs[logs.len() / 2..]
}

/// Non-proposer votes. With `first_round_only` only round-1 votes are kept.
pub fn vote_records(
    logs: &[MatchLog],
    solution: Option<&EquilibriumSolution>,
    treatment: &str,
    first_round_only: bool,
) -> Vec<VoteRecord> {
    let mut out = Vec::new();
    for (m, log) in logs.iter().enumerate() {
        for (idx, record) in log.rounds.iter().enumerate() {
            if first_round_only && idx > 0 {
                break;
            }
            let classes = round_classes(log, idx, solution);
            let shares = record.offer.shares();
            let g = gini(&shares);
            for voter in 1..=3u8 {
                if voter == record.proposer {
                    continue;
                }
                let i = (voter - 1) as usize;
                out.push(VoteRecord {
                    treatment: treatment.to_string(),
                    match_id: m + 1,
                    round: record.round,
                    voter,
                    own_share: shares[i] * record.budget,
                    strong_flag: u8::from(classes[i] == Some(PartnerClass::Strong)),
                    gini: g,
                    vote: record.votes[i],
                });
            }
        }
    }
    out
}

pub fn read_votes_csv<R: Read>(reader: R) -> Result<Vec<VoteRecord>, EmpiricsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(|e| EmpiricsError::Csv(e.to_string()))).collect()
}

pub fn write_votes_csv<W: Write>(writer: W, records: &[VoteRecord]) -> Result<(), EmpiricsError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in records {
        wtr.serialize(r).map_err(|e| EmpiricsError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| EmpiricsError::Csv(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitFit {
    /// Unidentified coefficients are reported as 0.
    pub model: LogitModel,
    /// Observed-information standard errors, `None` when unidentified.
    pub std_errors: [Option<f64>; 4],
    pub identified: [bool; 4],
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub pseudo_r2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_obs: usize,
}

pub const LOGIT_NAMES: [&str; 4] = ["constant", "strong", "own_share", "gini"];

/// Maximum-likelihood logit of vote on (1, strong_flag, own_share, gini)
/// by iteratively reweighted least squares.
pub fn fit_logit(records: &[VoteRecord]) -> Result<LogitFit, EmpiricsError> {
    let n = records.len();
    if n == 0 {
        return Err(EmpiricsError::EmptySample);
    }
    let accepts = records.iter().filter(|r| r.vote).count();
    if accepts == 0 || accepts == n {
        return Err(EmpiricsError::Separation(format!("{accepts} of {n} votes accept")));
    }
    let full: Vec<[f64; 4]> = records.iter().map(|r| [1.0, f64::from(r.strong_flag), r.own_share, r.gini]).collect();
    let y: DVector<f64> = DVector::from_iterator(n, records.iter().map(|r| f64::from(u8::from(r.vote))));

    // a non-constant regressor that never varies is not identified
    let mut identified = [true; 4];
    for c in 1..4 {
        let first = full[0][c];
        if full.iter().all(|row| (row[c] - first).abs() < 1e-12) {
            identified[c] = false;
        }
    }
    let cols: Vec<usize> = (0..4).filter(|&c| identified[c]).collect();
    let k = cols.len();
    let x = DMatrix::from_fn(n, k, |i, j| full[i][cols[j]]);

    let gram = x.transpose() * &x;
    let eig = gram.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-10 * max_eig {
        return Err(EmpiricsError::Collinear);
    }

    let loglik = |beta: &DVector<f64>| -> f64 {
        let eta = &x * beta;
        eta.iter()
            .zip(y.iter())
            .map(|(&e, &yi)| {
                // log(1 + exp(e)) computed stably
                let softplus = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
                yi * e - softplus
            })
            .sum()
    };

    let mut beta = DVector::zeros(k);
    let mut ll = loglik(&beta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < 100 {
        iterations += 1;
        let eta = &x * &beta;
        let p: DVector<f64> = eta.map(logistic);
        let w: DVector<f64> = p.map(|pi| (pi * (1.0 - pi)).max(1e-300));
        let grad = x.transpose() * (&y - &p);
        let info = weighted_gram(&x, &w);
        let Some(step) = info.clone().cholesky().map(|c| c.solve(&grad)) else {
            return Err(EmpiricsError::Separation("information matrix became singular".into()));
        };
        // halve the step until the likelihood does not fall
        let mut scale = 1.0;
        let mut next = &beta + &step;
        let mut next_ll = loglik(&next);
        while next_ll < ll - 1e-12 && scale > 1e-6 {
            scale /= 2.0;
            next = &beta + &step * scale;
            next_ll = loglik(&next);
        }
        let change = (&step * scale).amax();
        beta = next;
        ll = next_ll;
        if change < 1e-8 {
            converged = true;
            break;
        }
    }
    if beta.amax() > 50.0 || -ll < 1e-6 * n as f64 {
        return Err(EmpiricsError::Separation("coefficients diverge".into()));
    }
    let eta = &x * &beta;
    let w: DVector<f64> = eta.map(|e| {
        let p = logistic(e);
        p * (1.0 - p)
    });
    let info = weighted_gram(&x, &w);
    let cov = info.try_inverse().ok_or(EmpiricsError::Collinear)?;

    let mut coef = [0.0; 4];
    let mut std_errors = [None; 4];
    for (j, &c) in cols.iter().enumerate() {
        coef[c] = beta[j];
        std_errors[c] = Some(cov[(j, j)].max(0.0).sqrt());
    }
    let pbar = accepts as f64 / n as f64;
    let null_ll = accepts as f64 * pbar.ln() + (n - accepts) as f64 * (1.0 - pbar).ln();
    Ok(LogitFit {
        model: LogitModel::new(coef[0], coef[1], coef[2], coef[3]),
        std_errors,
        identified,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        pseudo_r2: 1.0 - ll / null_ll,
        iterations,
        converged,
        n_obs: n,
    })
}

/// `X' diag(w) X` without forming the diagonal matrix.
fn weighted_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    x.transpose() * xw
}

/// Regressor distribution for synthetic voting data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteDesign {
    pub own_low: f64,
    pub own_high: f64,
    /// Added to the own share of strong voters.
    pub strong_shift: f64,
    pub strong_prob: f64,
    /// Probability that the rest of the prize goes to a single player
    /// rather than being split equally.
    pub concentrated_prob: f64,
}

impl Default for VoteDesign {
    fn default() -> Self {
        VoteDesign { own_low: 0.2, own_high: 0.4, strong_shift: 0.05, strong_prob: 0.5, concentrated_prob: 0.5 }
    }
}

/// Votes drawn from `model` on regressors drawn from `design`.
pub fn simulate_votes(model: &LogitModel, design: &VoteDesign, n: usize, seed: u64) -> Vec<VoteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let strong = rng.random::<f64>() < design.strong_prob;
            let own = design.own_low
                + (design.own_high - design.own_low) * rng.random::<f64>()
                + if strong { design.strong_shift } else { 0.0 };
            let rest = 1.0 - own;
            let shares = if rng.random::<f64>() < design.concentrated_prob {
                if rng.random::<bool>() {
                    [own, rest, 0.0]
                } else {
                    [own, 0.0, rest]
                }
            } else {
                [own, rest / 2.0, rest / 2.0]
            };
            let g = gini(&shares);
            let vote = rng.random::<f64>() < logistic(model.index(own, strong, g));
            VoteRecord {
                treatment: "synthetic".into(),
                match_id: i + 1,
                round: 1,
                voter: 2,
                own_share: own,
                strong_flag: u8::from(strong),
                gini: g,
                vote,
            }
        })
        .collect()
}

/// Redraws the votes of `records` from `model`, keeping their regressors.
pub fn resimulate_votes(model: &LogitModel, records: &[VoteRecord], seed: u64) -> Vec<VoteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records
        .iter()
        .map(|r| {
            let p = logistic(model.index(r.own_share, r.strong_flag == 1, r.gini));
            VoteRecord { vote: rng.random::<f64>() < p, ..r.clone() }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionPayoff {
    /// Mean first-proposer payoff over matches whose first offer failed.
    pub mrp: Option<f64>,
    pub rejection_rate: f64,
    pub n_rejected: usize,
    pub n_matches: usize,
}

pub fn mean_rejection_payoff(logs: &[MatchLog]) -> RejectionPayoff {
    let rejected: Vec<f64> = logs.iter().filter(|l| !l.rounds[0].passed).map(|l| l.final_alloc[0]).collect();
    RejectionPayoff {
        mrp: if rejected.is_empty() { None } else { Some(rejected.iter().sum::<f64>() / rejected.len() as f64) },
        rejection_rate: if logs.is_empty() { 0.0 } else { rejected.len() as f64 / logs.len() as f64 },
        n_rejected: rejected.len(),
        n_matches: logs.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub s_a: f64,
    pub s_weak: f64,
    pub s_strong: f64,
    pub pass_prob: f64,
    pub expected_payoff: f64,
}

/// Expected first-proposer payoff over role-coordinate offers
/// (proposer, weak partner, strong partner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffSurface {
    pub model: LogitModel,
    pub mrp: f64,
    /// Strong indicator of the voter in the weak and strong slot.
    pub strong_flags: [bool; 2],
    pub step: f64,
    pub cells: Vec<SurfaceCell>,
    pub optimum: SurfaceCell,
}

impl PayoffSurface {
    /// Pass probability and expected payoff of an arbitrary offer.
    pub fn evaluate(&self, role_shares: [f64; 3]) -> (f64, f64) {
        surface_point(&self.model, self.mrp, self.strong_flags, role_shares)
    }

    pub fn optimum_is_mwc(&self) -> bool {
        self.optimum.s_weak.min(self.optimum.s_strong) < self.step
    }

    /// Partner targeted by the optimal offer.
    pub fn optimum_targets_weak(&self) -> bool {
        self.optimum.s_weak >= self.optimum.s_strong
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s_A,s_weak,s_strong,pass_prob,expected_payoff\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:.6},{:.6},{:.6},{:.10},{:.10}",
                c.s_a, c.s_weak, c.s_strong, c.pass_prob, c.expected_payoff
            );
        }
        out
    }
}

fn surface_point(model: &LogitModel, mrp: f64, strong_flags: [bool; 2], s: [f64; 3]) -> (f64, f64) {
    let g = gini(&s);
    let p_weak = logistic(model.index(s[1], strong_flags[0], g));
    let p_strong = logistic(model.index(s[2], strong_flags[1], g));
    let pass = 1.0 - (1.0 - p_weak) * (1.0 - p_strong);
    (pass, s[0] * pass + mrp * (1.0 - pass))
}

pub fn payoff_surface(
    model: &LogitModel,
    mrp: f64,
    strong_flags: [bool; 2],
    step: f64,
) -> Result<PayoffSurface, EmpiricsError> {
    if !(step > 0.0 && step <= 0.05) {
        return Err(EmpiricsError::BadStep(step));
    }
    let n = (1.0 / step).round() as u32;
    let n = if (n as f64 * step - 1.0).abs() < 1e-9 { n } else { (1.0 / step).ceil() as u32 };
    let nf = n as f64;
    let cells: Vec<SurfaceCell> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..=n - i).map(move |j| {
                let s = [i as f64 / nf, j as f64 / nf, (n - i - j) as f64 / nf];
                let (pass_prob, expected_payoff) = surface_point(model, mrp, strong_flags, s);
                SurfaceCell { s_a: s[0], s_weak: s[1], s_strong: s[2], pass_prob, expected_payoff }
            })
        })
        .collect();
    let optimum = *cells
        .iter()
        .reduce(|best, c| {
            let better = c.expected_payoff > best.expected_payoff
                || (c.expected_payoff == best.expected_payoff
                    && (c.s_a > best.s_a || (c.s_a == best.s_a && c.s_weak > best.s_weak)));
            if better {
                c
            } else {
                best
            }
        })
        .expect("grid is non-empty");
    Ok(PayoffSurface { model: *model, mrp, strong_flags, step: 1.0 / nf, cells, optimum })
}

/// First-round offer of a log in role coordinates, with its class.
pub fn first_offer_roles(
    log: &MatchLog,
    solution: Option<&EquilibriumSolution>,
    threshold: f64,
) -> Result<([f64; 3], CoalitionClass), EmpiricsError> {
    let record = &log.rounds[0];
    let classes = round_classes(log, 0, solution);
    let proposer = (record.proposer - 1) as usize;
    let class = classify_coalition(&record.offer, proposer, &classes, threshold)?;
    let others: Vec<usize> = (0..3).filter(|&i| i != proposer).collect();
    let shares = record.offer.shares();
    let (weak, strong) = match (classes[others[0]], classes[others[1]]) {
        (_, Some(PartnerClass::Weak)) => (others[1], others[0]),
        (Some(PartnerClass::Weak), _) => (others[0], others[1]),
        // symmetric partners: the larger share goes in the weak slot
        _ if shares[others[1]] > shares[others[0]] => (others[1], others[0]),
        _ => (others[0], others[1]),
    };
    Ok(([shares[proposer], shares[weak], shares[strong]], class))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureTwoPayoff {
    /// The first proposer's final payoff in the match.
    Realized,
    /// The surface value of the first proposer's offer.
    ExpectedOfOffer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRate {
    pub coalition_type: CoalitionType,
    pub count: usize,
    pub mean_offer: [f64; 3],
    /// Surface value of the mean offer over the optimum, in percent.
    pub measure_one: f64,
    /// Mean payoff over the optimum, in percent.
    pub measure_two: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRates {
    pub optimal_payoff: f64,
    /// Types without offers are omitted.
    pub by_type: Vec<TypeRate>,
    pub aggregate_one: Option<f64>,
    pub aggregate_two: Option<f64>,
}

pub fn optimization_rates(
    logs: &[MatchLog],
    surface: &PayoffSurface,
    solution: Option<&EquilibriumSolution>,
    measure_two: MeasureTwoPayoff,
) -> Result<OptimizationRates, EmpiricsError> {
    let opt = surface.optimum.expected_payoff;
    let mut groups: BTreeMap<CoalitionType, Vec<([f64; 3], f64)>> = BTreeMap::new();
    for log in logs {
        let (roles, class) = first_offer_roles(log, solution, DEFAULT_PARTNER_THRESHOLD)?;
        let payoff = match measure_two {
            MeasureTwoPayoff::Realized => log.final_alloc[0],
            MeasureTwoPayoff::ExpectedOfOffer => surface.evaluate(roles).1,
        };
        groups.entry(class.coalition_type()).or_default().push((roles, payoff));
    }
    let mut by_type = Vec::new();
    for ty in CoalitionType::ALL {
        let Some(items) = groups.get(&ty) else { continue };
        let count = items.len();
        let mut mean = [0.0; 3];
        for (roles, _) in items {
            for i in 0..3 {
                mean[i] += roles[i] / count as f64;
            }
        }
        let m2 = items.iter().map(|(_, p)| p).sum::<f64>() / count as f64;
        by_type.push(TypeRate {
            coalition_type: ty,
            count,
            mean_offer: mean,
            measure_one: 100.0 * surface.evaluate(mean).1 / opt,
            measure_two: 100.0 * m2 / opt,
        });
    }
    let total: usize = by_type.iter().map(|t| t.count).sum();
    let weighted = |f: fn(&TypeRate) -> f64| {
        (total > 0).then(|| by_type.iter().map(|t| f(t) * t.count as f64).sum::<f64>() / total as f64)
    };
    Ok(OptimizationRates {
        optimal_payoff: opt,
        aggregate_one: weighted(|t| t.measure_one),
        aggregate_two: weighted(|t| t.measure_two),
        by_type,
    })
}

/// Empirical CDF as `(x, F(x))` at each distinct sample value.
pub fn ecdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => out.push((x, f)),
        }
    }
    out
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ecdf_and_ks(a: &[f64], b: &[f64]) -> Result<f64, EmpiricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(EmpiricsError::EmptySample);
    }
    let mut xs = a.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut ys = b.to_vec();
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub n_matches: usize,
    pub n_accepted_first: usize,
    pub mean_accepted_first_share: Option<f64>,
    pub coalition_counts: BTreeMap<CoalitionType, usize>,
    pub mwc_count: usize,
    pub mwc_egalitarian: usize,
    pub gc_count: usize,
    pub gc_egalitarian: usize,
    pub mwc_weak_count: usize,
    pub mwc_weak_egalitarian: usize,
    pub mwc_weak_mean_proposer_share: Option<f64>,
    /// Sorted Gini coefficients of accepted first-round offers.
    pub gini_samples: Vec<f64>,
}

impl SummaryReport {
    pub fn frequency(&self, ty: CoalitionType) -> f64 {
        if self.n_matches == 0 {
            return 0.0;
        }
        self.coalition_counts.get(&ty).copied().unwrap_or(0) as f64 / self.n_matches as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,value\n");
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
        let _ = writeln!(out, "n_matches,{}", self.n_matches);
        let _ = writeln!(out, "mean_accepted_first_share,{}", opt(self.mean_accepted_first_share));
        for ty in CoalitionType::ALL {
            let _ = writeln!(out, "freq_{},{:.6}", ty.label(), self.frequency(ty));
        }
        let ratio = |a: usize, b: usize| if b == 0 { "NA".to_string() } else { format!("{:.6}", a as f64 / b as f64) };
        let _ = writeln!(out, "egalitarian_mwc,{}", ratio(self.mwc_egalitarian, self.mwc_count));
        let _ = writeln!(out, "egalitarian_gc,{}", ratio(self.gc_egalitarian, self.gc_count));
        let _ = writeln!(out, "egalitarian_mwc_weak,{}", ratio(self.mwc_weak_egalitarian, self.mwc_weak_count));
        let _ = writeln!(out, "mwc_weak_mean_proposer_share,{}", opt(self.mwc_weak_mean_proposer_share));
        out
    }
}

/// Descriptive tables over first-round offers.
pub fn summary_tables(
    logs: &[MatchLog],
    solution: Option<&EquilibriumSolution>,
) -> Result<SummaryReport, EmpiricsError> {
    let mut coalition_counts: BTreeMap<CoalitionType, usize> = CoalitionType::ALL.iter().map(|&t| (t, 0)).collect();
    let mut report = SummaryReport {
        n_matches: logs.len(),
        n_accepted_first: 0,
        mean_accepted_first_share: None,
        coalition_counts: BTreeMap::new(),
        mwc_count: 0,
        mwc_egalitarian: 0,
        gc_count: 0,
        gc_egalitarian: 0,
        mwc_weak_count: 0,
        mwc_weak_egalitarian: 0,
        mwc_weak_mean_proposer_share: None,
        gini_samples: Vec::new(),
    };
    let mut accepted_share = 0.0;
    let mut weak_share = 0.0;
    for log in logs {
        let (roles, class) = first_offer_roles(log, solution, DEFAULT_PARTNER_THRESHOLD)?;
        *coalition_counts.entry(class.coalition_type()).or_default() += 1;
        let first = &log.rounds[0];
        if first.passed {
            report.n_accepted_first += 1;
            accepted_share += roles[0] * first.budget;
            report.gini_samples.push(gini(&first.offer.shares()));
        }
        match class.kind {
            CoalitionKind::Mwc => {
                report.mwc_count += 1;
                report.mwc_egalitarian += usize::from(class.egalitarian);
            }
            CoalitionKind::GrandCoalition => {
                report.gc_count += 1;
                report.gc_egalitarian += usize::from(class.egalitarian);
            }
            CoalitionKind::Dictatorial => {}
        }
        if class.coalition_type() == CoalitionType::MwcWeak {
            report.mwc_weak_count += 1;
            report.mwc_weak_egalitarian += usize::from(class.egalitarian);
            weak_share += roles[0] * first.budget;
        }
    }
    if report.n_accepted_first > 0 {
        report.mean_accepted_first_share = Some(accepted_share / report.n_accepted_first as f64);
    }
    if report.mwc_weak_count > 0 {
        report.mwc_weak_mean_proposer_share = Some(weak_share / report.mwc_weak_count as f64);
    }
    report.gini_samples.sort_by(f64::total_cmp);
    report.coalition_counts = coalition_counts;
    Ok(report)
}

/// Logit fit in the layout of a coefficient table.
pub fn logit_table_csv(fits: &[(String, LogitFit)]) -> String {
    let mut out = String::from("column,term,estimate,std_error\n");
    for (name, fit) in fits {
        let coef = fit.model.as_array();
        for (t, term) in LOGIT_NAMES.iter().enumerate() {
            let se = fit.std_errors[t].map_or("NA".to_string(), |s| format!("{s:.6}"));
            let est = if fit.identified[t] { format!("{:.6}", coef[t]) } else { "NA".to_string() };
            let _ = writeln!(out, "{name},{term},{est},{se}");
        }
        let _ = writeln!(out, "{name},pseudo_r2,{:.6},", fit.pseudo_r2);
        let _ = writeln!(out, "{name},observations,{},", fit.n_obs);
    }
    out
}

/// Which optimization-rate measure a table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMeasure {
    /// Surface value of the mean offer of each type.
    One,
    /// Mean payoff of each type.
    Two,
}

/// Rates per coalition type in the layout of the optimization-rate table,
/// with `--` for types without offers.
pub fn optimization_table_csv(rows: &[(String, OptimizationRates)], measure: RateMeasure) -> String {
    let mut out = String::from("treatment,optimal_payoff");
    for ty in CoalitionType::ALL {
        let _ = write!(out, ",{}", ty.label());
    }
    out.push_str(",aggregate\n");
    for (name, rates) in rows {
        let _ = write!(out, "{name},{:.4}", rates.optimal_payoff);
        for ty in CoalitionType::ALL {
            match rates.by_type.iter().find(|t| t.coalition_type == ty) {
                Some(t) => {
                    let v = if measure == RateMeasure::One { t.measure_one } else { t.measure_two };
                    let _ = write!(out, ",{v:.2}");
                }
                None => out.push_str(",--"),
            }
        }
        let agg = if measure == RateMeasure::One { rates.aggregate_one } else { rates.aggregate_two };
        let _ = writeln!(out, ",{}", agg.map_or("--".to_string(), |x| format!("{x:.2}")));
    }
    out
}
