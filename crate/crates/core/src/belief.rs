//! A proposer who is uncertain about the other players' acceptance
//! thresholds.
//!
//! A non-proposer accepts when offered at least her threshold. The proposal
//! passes when at least one of the two accepts, so the acceptance
//! probability is `F_B(s_B) + F_C(s_C) - H(s_B, s_C)` for the joint
//! threshold CDF `H`.

pub mod bvn;

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::empirics::gini;
use crate::game::Allocation;

/// Slack used when comparing a share with a threshold atom.
pub const ATOM_TOL: f64 = 1e-12;

/// Offers within this of the best grid value count as optimal.
pub const NEAR_OPTIMAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("share {0} is negative")]
    NegativeShare(f64),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("expected {expected} offers, got {got}")]
    BadArity { expected: usize, got: usize },
    #[error("number of players must be odd and at least 3 (got {0})")]
    EvenN(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cannot read discrete belief: {0}")]
    Io(String),
}

/// Joint law of the two non-proposers' thresholds `(tau_B, tau_C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BeliefFamily {
    IndependentUniform {
        tau_bar: f64,
    },
    /// `tau_B = tau_C`, uniform on `[0, tau_bar]`.
    Comonotone {
        tau_bar: f64,
    },
    /// `tau_C = tau_bar - tau_B`.
    Antithetic {
        tau_bar: f64,
    },
    /// Uniform marginals joined by a Gaussian copula with correlation `rho`.
    GaussianCopula {
        tau_bar: f64,
        rho: f64,
    },
    /// Weighted atoms `(tau_B, tau_C, weight)`.
    Discrete {
        points: Vec<(f64, f64, f64)>,
    },
    Mixture {
        components: Vec<(f64, BeliefFamily)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBelief {
    pub family: BeliefFamily,
    /// Proposer's payoff if the proposal fails.
    pub d: f64,
}

impl ThresholdBelief {
    pub fn new(family: BeliefFamily, d: f64) -> Result<ThresholdBelief, BeliefError> {
        let belief = ThresholdBelief { family, d };
        belief.validate()?;
        Ok(belief)
    }

    pub fn independent_uniform(tau_bar: f64, d: f64) -> Result<ThresholdBelief, BeliefError> {
        Self::new(BeliefFamily::IndependentUniform { tau_bar }, d)
    }

    pub fn validate(&self) -> Result<(), BeliefError> {
        if !(0.0..1.0).contains(&self.d) {
            return Err(BeliefError::InvalidBelief(format!("d = {} outside [0, 1)", self.d)));
        }
        self.family.validate()
    }

    /// Whether `H(x, x) > 0` for every `x > 0`.
    pub fn positive_diagonal_mass(&self) -> bool {
        self.family.positive_diagonal_mass()
    }

    pub fn lambda(&self, s_b: f64, s_c: f64) -> Result<f64, BeliefError> {
        lambda_accept(s_b, s_c, self)
    }
}

impl BeliefFamily {
    pub fn validate(&self) -> Result<(), BeliefError> {
        let check_tau = |tau_bar: f64| {
            if tau_bar.is_finite() && tau_bar >= 0.5 {
                Ok(())
            } else {
                Err(BeliefError::InvalidBelief(format!("tau_bar = {tau_bar} must be at least 1/2")))
            }
        };
        match self {
            BeliefFamily::IndependentUniform { tau_bar }
            | BeliefFamily::Comonotone { tau_bar }
            | BeliefFamily::Antithetic { tau_bar } => check_tau(*tau_bar),
            BeliefFamily::GaussianCopula { tau_bar, rho } => {
                check_tau(*tau_bar)?;
                if !(-1.0..=1.0).contains(rho) {
                    return Err(BeliefError::InvalidBelief(format!("rho = {rho} outside [-1, 1]")));
                }
                Ok(())
            }
            BeliefFamily::Discrete { points } => {
                if points.is_empty() {
                    return Err(BeliefError::InvalidBelief("discrete belief has no atoms".into()));
                }
                for &(b, c, w) in points {
                    if !(b.is_finite() && c.is_finite() && b >= 0.0 && c >= 0.0) {
                        return Err(BeliefError::InvalidBelief(format!("atom ({b}, {c}) outside [0, inf)^2")));
                    }
                    if !(w.is_finite() && w > 0.0) {
                        return Err(BeliefError::InvalidBelief(format!("atom weight {w} is not positive")));
                    }
                }
                check_weights(points.iter().map(|p| p.2))
            }
            BeliefFamily::Mixture { components } => {
                if components.is_empty() {
                    return Err(BeliefError::InvalidBelief("mixture has no components".into()));
                }
                for (w, family) in components {
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(BeliefError::InvalidBelief(format!("mixture weight {w} is not positive")));
                    }
                    family.validate()?;
                }
                check_weights(components.iter().map(|c| c.0))
            }
        }
    }

    pub fn positive_diagonal_mass(&self) -> bool {
        match self {
            BeliefFamily::IndependentUniform { .. } | BeliefFamily::Comonotone { .. } => true,
            BeliefFamily::Antithetic { .. } => false,
            BeliefFamily::GaussianCopula { rho, .. } => *rho > -1.0,
            BeliefFamily::Discrete { points } => points.iter().any(|&(b, c, _)| b <= 0.0 && c <= 0.0),
            BeliefFamily::Mixture { components } => components.iter().any(|(_, f)| f.positive_diagonal_mass()),
        }
    }

    fn lambda(&self, s_b: f64, s_c: f64) -> f64 {
        let uniform = |tau_bar: f64, s: f64| (s / tau_bar).clamp(0.0, 1.0);
        match self {
            BeliefFamily::IndependentUniform { tau_bar } => {
                let (u, v) = (uniform(*tau_bar, s_b), uniform(*tau_bar, s_c));
                u + v - u * v
            }
            BeliefFamily::Comonotone { tau_bar } => uniform(*tau_bar, s_b).max(uniform(*tau_bar, s_c)),
            BeliefFamily::Antithetic { tau_bar } => (uniform(*tau_bar, s_b) + uniform(*tau_bar, s_c)).min(1.0),
            BeliefFamily::GaussianCopula { tau_bar, rho } => {
                let (u, v) = (uniform(*tau_bar, s_b), uniform(*tau_bar, s_c));
                if *rho >= 1.0 {
                    u.max(v)
                } else if *rho <= -1.0 {
                    (u + v).min(1.0)
                } else {
                    (u + v - bvn::gaussian_copula(u, v, *rho)).clamp(0.0, 1.0)
                }
            }
            BeliefFamily::Discrete { points } => points
                .iter()
                .filter(|&&(b, c, _)| b <= s_b + ATOM_TOL || c <= s_c + ATOM_TOL)
                .map(|p| p.2)
                .sum::<f64>()
                .min(1.0),
            BeliefFamily::Mixture { components } => {
                components.iter().map(|(w, f)| w * f.lambda(s_b, s_c)).sum::<f64>().min(1.0)
            }
        }
    }

    /// Draws one threshold pair.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            BeliefFamily::IndependentUniform { tau_bar } => {
                (tau_bar * rng.random::<f64>(), tau_bar * rng.random::<f64>())
            }
            BeliefFamily::Comonotone { tau_bar } => {
                let t = tau_bar * rng.random::<f64>();
                (t, t)
            }
            BeliefFamily::Antithetic { tau_bar } => {
                let t = tau_bar * rng.random::<f64>();
                (t, tau_bar - t)
            }
            BeliefFamily::GaussianCopula { tau_bar, rho } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let rho = rho.clamp(-1.0, 1.0);
                let w = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
                let normal = statrs::distribution::Normal::standard();
                use statrs::distribution::ContinuousCDF;
                (tau_bar * normal.cdf(z1), tau_bar * normal.cdf(w))
            }
            BeliefFamily::Discrete { points } => {
                let idx = pick(rng, points.iter().map(|p| p.2));
                (points[idx].0, points[idx].1)
            }
            BeliefFamily::Mixture { components } => {
                let idx = pick(rng, components.iter().map(|c| c.0));
                components[idx].1.sample(rng)
            }
        }
    }

    /// Reads atoms from a CSV with columns `tau_b,tau_c,weight`. Weights are
    /// normalized to sum to one.
    pub fn discrete_from_csv<R: Read>(reader: R) -> Result<BeliefFamily, BeliefError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for record in rdr.deserialize::<(f64, f64, f64)>() {
            points.push(record.map_err(|e| BeliefError::Io(e.to_string()))?);
        }
        let total: f64 = points.iter().map(|p| p.2).sum();
        if total > 0.0 {
            for p in &mut points {
                p.2 /= total;
            }
        }
        let family = BeliefFamily::Discrete { points };
        family.validate()?;
        Ok(family)
    }

    pub fn discrete_from_csv_path(path: &Path) -> Result<BeliefFamily, BeliefError> {
        let file = std::fs::File::open(path).map_err(|e| BeliefError::Io(format!("{}: {e}", path.display())))?;
        Self::discrete_from_csv(file)
    }
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<(), BeliefError> {
    let total: f64 = weights.sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(BeliefError::InvalidBelief(format!("weights sum to {total}")));
    }
    Ok(())
}

fn pick<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Probability that at least one non-proposer accepts.
pub fn lambda_accept(s_b: f64, s_c: f64, belief: &ThresholdBelief) -> Result<f64, BeliefError> {
    for s in [s_b, s_c] {
        if s < 0.0 || s.is_nan() {
            return Err(BeliefError::NegativeShare(s));
        }
    }
    Ok(belief.family.lambda(s_b, s_c))
}

/// `d + (s_A - d) * Lambda(s_B, s_C)`.
pub fn expected_payoff(offer: &Allocation, belief: &ThresholdBelief) -> f64 {
    let [a, b, c] = offer.shares();
    belief.d + (a - belief.d) * belief.family.lambda(b, c)
}

/// The variant that never rewards an offer for failing.
pub fn expected_payoff_clamped(offer: &Allocation, belief: &ThresholdBelief) -> f64 {
    let [a, b, c] = offer.shares();
    belief.d + (a - belief.d).max(0.0) * belief.family.lambda(b, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub step: f64,
    pub refine_depth: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { step: 0.005, refine_depth: 3 }
    }
}

impl GridSpec {
    /// Number of grid intervals per unit; the effective step is `1 / n`.
    pub fn divisions(&self) -> Result<u32, BeliefError> {
        if !(self.step > 0.0 && self.step <= 0.05) {
            return Err(BeliefError::InvalidGrid(format!("step {} outside (0, 0.05]", self.step)));
        }
        let n = (1.0 / self.step).round();
        let n = if (n * self.step - 1.0).abs() < 1e-9 { n } else { (1.0 / self.step).ceil() };
        Ok(n as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferOptimum {
    pub offer: Allocation,
    pub expected_payoff: f64,
    pub accept_prob: f64,
    pub is_mwc: bool,
    pub grid_step: f64,
    pub refinement_iterations: u32,
    /// Best value found by the exhaustive scan, before refinement.
    pub grid_payoff: f64,
    pub grid_offer: Allocation,
    /// The near-optimal grid set is spread out rather than a single point
    /// (or its mirror image); `offer` is then its minimum-Gini member.
    pub degenerate: bool,
    pub near_optimal_count: usize,
}

/// Grid point in integer coordinates `(i, j)`; `k = n - i - j`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    a: f64,
    b: f64,
}

impl Candidate {
    /// Larger value wins; exact ties go to larger `s_A`, then larger `s_B`.
    fn better_than(&self, other: &Candidate) -> bool {
        if self.value != other.value {
            return self.value > other.value;
        }
        if self.a != other.a {
            return self.a > other.a;
        }
        self.b > other.b
    }
}

fn grid_point(i: u32, j: u32, n: u32) -> [f64; 3] {
    let nf = n as f64;
    [i as f64 / nf, j as f64 / nf, (n - i - j) as f64 / nf]
}

fn evaluate(shares: [f64; 3], belief: &ThresholdBelief) -> f64 {
    belief.d + (shares[0] - belief.d) * belief.family.lambda(shares[1], shares[2])
}

/// Maximizes expected payoff over the offer simplex.
pub fn optimize_offer(belief: &ThresholdBelief, grid: GridSpec) -> Result<OfferOptimum, BeliefError> {
    belief.validate()?;
    let n = grid.divisions()?;
    let step = 1.0 / n as f64;

    let rows: Vec<Vec<f64>> =
        (0..=n).into_par_iter().map(|i| (0..=n - i).map(|j| evaluate(grid_point(i, j, n), belief)).collect()).collect();

    let mut best = Candidate { value: f64::NEG_INFINITY, a: -1.0, b: -1.0 };
    let mut best_ij = (0, 0);
    for (i, row) in rows.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            let [a, b, _] = grid_point(i as u32, j as u32, n);
            let cand = Candidate { value, a, b };
            if cand.better_than(&best) {
                best = cand;
                best_ij = (i as u32, j as u32);
            }
        }
    }
    let grid_shares = grid_point(best_ij.0, best_ij.1, n);
    let grid_offer = Allocation::new(grid_shares).expect("grid point is on the simplex");

    // canonical (i, max(j, k), min(j, k)) members of the near-optimal set
    let mut near: Vec<(u32, u32, u32)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if value >= best.value - NEAR_OPTIMAL_TOL {
                let (i, j) = (i as u32, j as u32);
                let k = n - i - j;
                near.push((i, j.max(k), j.min(k)));
            }
        }
    }
    near.sort_unstable();
    near.dedup();
    let degenerate = near.len() > 4096 || diameter(&near) > 2.0;

    let (mut shares, refinement_iterations) = if degenerate {
        let (i, j, k) = *near
            .iter()
            .min_by(|x, y| {
                let gx = gini(&grid_point(x.0, x.1, n));
                let gy = gini(&grid_point(y.0, y.1, n));
                gx.total_cmp(&gy).then(y.0.cmp(&x.0)).then(y.1.cmp(&x.1))
            })
            .expect("near-optimal set contains the best point");
        // keep the orientation of the best grid point
        let (j, k) = if grid_shares[1] >= grid_shares[2] { (j, k) } else { (k, j) };
        debug_assert_eq!(i + j + k, n);
        (grid_point(i, j, n), 0)
    } else {
        refine(belief, grid_shares, best.value, step, grid.refine_depth)
    };
    let total: f64 = shares.iter().sum();
    shares[0] += 1.0 - total;
    let offer = Allocation::new(shares).expect("refined point is on the simplex");
    let value = evaluate(offer.shares(), belief);
    let accept_prob = belief.family.lambda(offer.share(crate::Player::B), offer.share(crate::Player::C));
    let [_, b, c] = offer.shares();
    Ok(OfferOptimum {
        offer,
        expected_payoff: value,
        accept_prob,
        is_mwc: b.min(c) < step,
        grid_step: step,
        refinement_iterations,
        grid_payoff: best.value,
        grid_offer,
        degenerate,
        near_optimal_count: near.len(),
    })
}

fn diameter(points: &[(u32, u32, u32)]) -> f64 {
    let mut best = 0.0f64;
    for (x, p) in points.iter().enumerate() {
        for q in &points[x + 1..] {
            let d: f64 = [(p.0, q.0), (p.1, q.1), (p.2, q.2)]
                .iter()
                .map(|&(a, b)| (a as f64 - b as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.max(d);
        }
    }
    best
}

/// Repeated local scans on a grid four times finer around the incumbent.
fn refine(belief: &ThresholdBelief, start: [f64; 3], value: f64, step: f64, depth: u32) -> ([f64; 3], u32) {
    let mut best = Candidate { value, a: start[0], b: start[1] };
    let mut h = step;
    for _ in 0..depth {
        h /= 4.0;
        let (a0, b0) = (best.a, best.b);
        for di in -4i32..=4 {
            for dj in -4i32..=4 {
                let a = a0 + di as f64 * h;
                let b = b0 + dj as f64 * h;
                let c = 1.0 - a - b;
                if a < -1e-12 || b < -1e-12 || c < -1e-12 {
                    continue;
                }
                let shares = [a.max(0.0), b.max(0.0), c.max(0.0)];
                let cand = Candidate { value: evaluate(shares, belief), a: shares[0], b: shares[1] };
                if cand.better_than(&best) {
                    best = cand;
                }
            }
        }
    }
    ([best.a, best.b, (1.0 - best.a - best.b).max(0.0)], depth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub limit: [f64; 3],
    pub rows: Vec<(OfferOptimum, f64)>,
    /// Distances never increase along the sequence.
    pub monotone: bool,
}

/// Optimizes each belief in `sequence` and measures the distance of the
/// optimum to the limiting offer `((1 + d) / 2, (1 - d) / 2, 0)`.
pub fn convergence_study(
    target_d: f64,
    sequence: &[ThresholdBelief],
    grid: GridSpec,
) -> Result<ConvergenceStudy, BeliefError> {
    let limit = [(1.0 + target_d) / 2.0, (1.0 - target_d) / 2.0, 0.0];
    let mut rows = Vec::with_capacity(sequence.len());
    for belief in sequence {
        let opt = optimize_offer(belief, grid)?;
        let [a, b, c] = opt.offer.shares();
        let canon = [a, b.max(c), b.min(c)];
        let dist = canon.iter().zip(&limit).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        rows.push((opt, dist));
    }
    let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    Ok(ConvergenceStudy { limit, rows, monotone })
}

/// Expected payoff of an n-player proposer with independent uniform
/// thresholds on `[0, tau_bar]`. The proposal passes when at least
/// `ceil(n / 2) - 1` of the others accept.
pub fn n_player_expected_payoff(offers: &[f64], n: usize, tau_bar: f64, d: f64) -> Result<f64, BeliefError> {
    if n < 3 || n % 2 == 0 {
        return Err(BeliefError::EvenN(n));
    }
    if offers.len() != n - 1 {
        return Err(BeliefError::BadArity { expected: n - 1, got: offers.len() });
    }
    if let Some(&s) = offers.iter().find(|s| **s < 0.0 || s.is_nan()) {
        return Err(BeliefError::NegativeShare(s));
    }
    if !(tau_bar.is_finite() && tau_bar > 0.0) {
        return Err(BeliefError::InvalidBelief(format!("tau_bar = {tau_bar} must be positive")));
    }
    let keep = 1.0 - offers.iter().sum::<f64>();
    let probs: Vec<f64> = offers.iter().map(|s| (s / tau_bar).min(1.0)).collect();
    let need = n.div_ceil(2) - 1;
    Ok(d + (keep - d) * poisson_binomial_tail(&probs, need))
}

/// `P(at least k successes)` for independent Bernoulli trials.
pub fn poisson_binomial_tail(probs: &[f64], k: usize) -> f64 {
    let mut dist = vec![0.0; probs.len() + 1];
    dist[0] = 1.0;
    for (m, &p) in probs.iter().enumerate() {
        for c in (0..=m + 1).rev() {
            let stay = dist[c] * (1.0 - p);
            let up = if c > 0 { dist[c - 1] * p } else { 0.0 };
            dist[c] = stay + up;
        }
    }
    dist[k.min(dist.len())..].iter().sum()
}
