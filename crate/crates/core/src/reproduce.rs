//! The reference-result checklist.
//!
//! Every criterion recomputes its quantities from scratch and compares them
//! with an [`Expectations`] fixture. The default fixture holds the published
//! values; tests perturb it to exercise the harness.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::belief::{
    convergence_study, expected_payoff, n_player_expected_payoff, optimize_offer, BeliefFamily, GridSpec,
    ThresholdBelief,
};
use crate::empirics::{fit_logit, gini, gini_exact, payoff_surface, simulate_votes, VoteDesign};
use crate::game::{Allocation, Disclosure, InfoProtocol};
use crate::presets;
use crate::rational::{self, q, Q};
use crate::sim::{run_batch, Agents, LogDisclosure, LogitModel, TerminalKind};
use crate::spe::{self, Condition, PartnerClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: String,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.budget_seconds.is_none_or(|b| self.seconds < b)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub criteria: Vec<CriterionResult>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    /// Checklist without timings, so reruns print identical text.
    pub fn to_text(&self) -> String {
        self.render(false)
    }

    pub fn to_text_timed(&self) -> String {
        self.render(true)
    }

    fn render(&self, timed: bool) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = if c.pass { "PASS" } else { "FAIL" };
            if timed {
                let _ = writeln!(out, "[{status}] {} ({:.2}s): {}", c.id, c.seconds, c.title);
            } else {
                let _ = writeln!(out, "[{status}] {}: {}", c.id, c.title);
            }
            for check in &c.checks {
                let mark = if check.pass { "ok" } else { "MISMATCH" };
                let _ = writeln!(
                    out,
                    "    {mark:8} {}: computed {} expected {}",
                    check.name, check.computed, check.expected
                );
            }
        }
        let passed = self.criteria.iter().filter(|c| c.pass).count();
        let _ = writeln!(out, "{passed}/{} criteria pass", self.criteria.len());
        out
    }
}

/// One predicted proposer share: exact value and the decimal printed in the
/// published table.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareExpectation {
    pub preset: &'static str,
    pub round: usize,
    pub condition: Condition,
    pub exact: Q,
    pub table: f64,
    /// The proposer never targets a strong partner.
    pub no_strong_target: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceExpectation {
    pub column: usize,
    pub mrp: f64,
    pub keep: f64,
    pub value: f64,
    /// Also require an MWC offer to the weak partner.
    pub mwc_weak: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectations {
    pub table1: Vec<ShareExpectation>,
    pub table_tolerance: f64,
    pub partial_value: Q,
    pub egalitarian_offer: [f64; 3],
    pub egalitarian_payoff: f64,
    pub offer_d_02: [f64; 3],
    pub gc_payoff: f64,
    pub antithetic_pair: [f64; 2],
    pub five_player: [f64; 2],
    pub convergence_distance: f64,
    pub convergence_from: usize,
    pub oracle_seeds: [u64; 5],
    pub surfaces: Vec<SurfaceExpectation>,
    pub surface_tolerance: f64,
    pub roundtrip_column: usize,
    pub roundtrip_votes: usize,
    pub roundtrip_replications: u64,
    pub roundtrip_min_pass: usize,
    pub roundtrip_tolerance: f64,
    pub gini: [(Q, [Q; 3]); 3],
    pub sim_matches: usize,
    pub sim_seed: u64,
}

impl Default for Expectations {
    fn default() -> Self {
        use Condition::{Excl, Incl, Unconditional as Any};
        let share = |preset, round, condition, exact: Q, table, no_strong_target| ShareExpectation {
            preset,
            round,
            condition,
            exact,
            table,
            no_strong_target,
        };
        let mrp = |location, treatment| presets::mrp_row(location, treatment).expect("shipped row").mrp();
        Expectations {
            table1: vec![
                share("1-perfect", 1, Any, q(19, 20), 0.95, true),
                share("2-perfect", 1, Any, q(1, 1), 1.0, true),
                share("2-perfect", 2, Any, q(19, 20), 0.95, true),
                share("3-perfect", 1, Incl, q(1, 1), 1.0, true),
                share("3-perfect", 1, Excl, q(1, 1), 1.0, true),
                share("3-perfect", 2, Incl, q(1, 1), 1.0, true),
                share("3-perfect", 2, Excl, q(1, 1), 1.0, true),
                share("3-perfect", 3, Any, q(1, 1), 1.0, false),
                share("3-partial", 1, Incl, q(11, 12), 0.92, true),
                share("3-partial", 1, Excl, q(13, 24), 0.54, false),
                share("3-partial", 2, Incl, q(1, 1), 1.0, true),
                share("3-partial", 2, Excl, q(1, 2), 0.50, false),
                share("3-partial", 3, Any, q(1, 1), 1.0, false),
                share("3-none", 1, Any, q(2, 3), 0.67, false),
                share("3-none", 2, Any, q(2, 3), 0.67, false),
                share("3-none", 3, Any, q(1, 1), 1.0, false),
            ],
            table_tolerance: 5e-3,
            partial_value: q(55, 72),
            egalitarian_offer: [0.5, 0.5, 0.0],
            egalitarian_payoff: 0.25,
            offer_d_02: [0.6, 0.4, 0.0],
            gc_payoff: 0.185,
            antithetic_pair: [0.250, 0.222],
            five_player: [0.0370, 0.0420],
            convergence_distance: 0.02,
            convergence_from: 3,
            oracle_seeds: [11, 23, 37, 41, 53],
            surfaces: vec![
                SurfaceExpectation {
                    column: 1,
                    mrp: mrp("Caltech", "1-Perfect"),
                    keep: 0.76,
                    value: 0.64,
                    mwc_weak: false,
                },
                SurfaceExpectation {
                    column: 3,
                    mrp: mrp("Caltech", "3-Perfect-Excl"),
                    keep: 0.53,
                    value: 0.46,
                    mwc_weak: true,
                },
                SurfaceExpectation {
                    column: 5,
                    mrp: mrp("UCI", "2-Perfect"),
                    keep: 0.59,
                    value: 0.49,
                    mwc_weak: false,
                },
            ],
            surface_tolerance: 0.02,
            roundtrip_column: 5,
            roundtrip_votes: 20_000,
            roundtrip_replications: 100,
            roundtrip_min_pass: 95,
            roundtrip_tolerance: 0.10,
            gini: [
                (rational::zero(), [q(1, 3), q(1, 3), q(1, 3)]),
                (q(1, 3), [rational::zero(), q(1, 2), q(1, 2)]),
                (q(2, 3), [rational::zero(), rational::zero(), q(1, 1)]),
            ],
            sim_matches: 1000,
            sim_seed: 20_240,
        }
    }
}

pub const CRITERIA: [(&str, &str); 10] = [
    ("table1", "equilibrium proposer shares by treatment, round and condition"),
    ("partial-value", "unconditional round-1 proposer value under partial disclosure"),
    ("structure", "proposer keeps half, someone gets nothing, a known next proposer is never weak"),
    ("threshold-optimum", "optimal offers and payoffs under threshold uncertainty"),
    ("convergence", "optimal offers converge to the egalitarian MWC offer"),
    ("oracle", "grid scan maximum equals exhaustive enumeration"),
    ("surface", "empirical payoff surface optima"),
    ("logit-roundtrip", "acceptance logit recovered from simulated votes"),
    ("gini", "Gini coefficient of reference splits"),
    ("simulation", "equilibrium play, disclosure consistency and seeded determinism"),
];

pub fn criterion_ids() -> impl Iterator<Item = &'static str> {
    CRITERIA.iter().map(|(id, _)| *id)
}

pub fn run_all(exp: &Expectations) -> Report {
    Report { criteria: criterion_ids().map(|id| run_criterion(id, exp).expect("known id")).collect() }
}

pub fn run_criterion(id: &str, exp: &Expectations) -> Option<CriterionResult> {
    let (id, title) = *CRITERIA.iter().find(|(c, _)| *c == id)?;
    let (run, budget): (fn(&Expectations) -> Vec<Check>, Option<f64>) = match id {
        "table1" => (table1, Some(1.0)),
        "partial-value" => (partial_value, None),
        "structure" => (structure, Some(1.0)),
        "threshold-optimum" => (threshold_optimum, Some(10.0)),
        "convergence" => (convergence, Some(60.0)),
        "oracle" => (oracle, None),
        "surface" => (surface, Some(30.0)),
        "logit-roundtrip" => (logit_roundtrip, Some(120.0)),
        "gini" => (gini_check, None),
        "simulation" => (simulation, None),
        _ => return None,
    };
    let start = Instant::now();
    let checks = run(exp);
    let seconds = start.elapsed().as_secs_f64();
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    Some(CriterionResult { id, title, checks, pass, seconds, budget_seconds: budget })
}

fn check(name: impl Into<String>, computed: impl Into<String>, expected: impl Into<String>, pass: bool) -> Check {
    Check { name: name.into(), computed: computed.into(), expected: expected.into(), pass }
}

fn close(name: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Check {
    check(name, format!("{computed:.6}"), format!("{expected} ± {tol}"), (computed - expected).abs() <= tol)
}

fn failed(name: &str, err: impl std::fmt::Display) -> Vec<Check> {
    vec![check(name, format!("error: {err}"), "success", false)]
}

fn fmt3(x: [f64; 3]) -> String {
    format!("({:.4}, {:.4}, {:.4})", x[0], x[1], x[2])
}

fn table1(exp: &Expectations) -> Vec<Check> {
    let mut out = Vec::new();
    let mut solved: Vec<(&str, spe::EquilibriumSolution)> = Vec::new();
    for e in &exp.table1 {
        if !solved.iter().any(|(p, _)| *p == e.preset) {
            let spec = match presets::treatment(e.preset) {
                Some(s) => s,
                None => return failed(e.preset, "unknown preset"),
            };
            match spe::solve(&spec) {
                Ok(sol) => solved.push((e.preset, sol)),
                Err(err) => return failed(e.preset, err),
            }
        }
        let sol = &solved.iter().find(|(p, _)| *p == e.preset).expect("solved above").1;
        let name = format!("{} round {} {}", e.preset, e.round, e.condition);
        match spe::predicted_share(sol, e.round, e.condition) {
            Ok(share) => {
                let decimal = rational::to_f64(&share);
                let pass = share == e.exact && (decimal - e.table).abs() <= exp.table_tolerance;
                out.push(check(
                    name.clone(),
                    format!("{} = {decimal:.4}", rational::display(&share)),
                    format!("{} ~ {}", rational::display(&e.exact), e.table),
                    pass,
                ));
            }
            Err(err) => out.push(check(name.clone(), format!("error: {err}"), rational::display(&e.exact), false)),
        }
        if e.no_strong_target {
            let avoids_strong = never_targets_strong(sol, e.round, e.condition);
            out.push(check(
                format!("{name} partner"),
                if avoids_strong { "not strong" } else { "strong" },
                "not strong",
                avoids_strong,
            ));
        }
    }
    out
}

/// No offer in the matching states secures the vote of a strong partner.
/// With symmetric partners neither is strong, so the condition holds.
fn never_targets_strong(sol: &spe::EquilibriumSolution, round: usize, condition: Condition) -> bool {
    for state in sol.states(round) {
        if condition != Condition::Unconditional && Condition::of_state(state) != Some(condition) {
            continue;
        }
        let cont = &sol.continuation[state];
        for offer in &sol.policy[state] {
            for p in state.proposer.others() {
                let secured = &offer.shares[p.index()] * &state.budget >= cont[p.index()];
                if secured && sol.partner_class.get(&(state.clone(), p)) == Some(&PartnerClass::Strong) {
                    return false;
                }
            }
        }
    }
    true
}

fn partial_value(exp: &Expectations) -> Vec<Check> {
    let spec = presets::treatment("3-partial").expect("shipped preset");
    match spe::solve(&spec).and_then(|sol| spe::predicted_first_share(&sol, Condition::Unconditional)) {
        Ok(v) => vec![check(
            "3-partial round 1 unconditional",
            format!("{} = {:.6}", rational::display(&v), rational::to_f64(&v)),
            rational::display(&exp.partial_value),
            v == exp.partial_value,
        )],
        Err(err) => failed("3-partial", err),
    }
}

fn structure(_exp: &Expectations) -> Vec<Check> {
    let mut specs = presets::all_treatments();
    specs.extend(presets::TREATMENTS.iter().filter_map(|n| presets::treatment(&format!("{n}-shrink"))));
    let mut out = Vec::new();
    for spec in specs {
        let sol = match spe::solve(&spec) {
            Ok(s) => s,
            Err(err) => return failed(&spec.id, err),
        };
        let mut problem = spe::check_offer_structure(&sol).err();
        let mut n_states = 0;
        for state in sol.policy.keys() {
            n_states += 1;
            if let Disclosure::KnownNext(next) = state.disclosure {
                if next != state.proposer && sol.partner_class.get(&(state.clone(), next)) == Some(&PartnerClass::Weak)
                {
                    problem.get_or_insert_with(|| format!("{state}: known next proposer classed weak"));
                }
            }
        }
        let computed = match &problem {
            None => format!("{n_states} states hold"),
            Some(p) => p.clone(),
        };
        out.push(check(spec.id.clone(), computed, "all states hold", problem.is_none()));
    }
    out
}

fn canonical(offer: &Allocation) -> [f64; 3] {
    let [a, b, c] = offer.shares();
    [a, b.max(c), b.min(c)]
}

fn within(x: [f64; 3], y: [f64; 3], tol: f64) -> bool {
    x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= tol)
}

fn threshold_optimum(exp: &Expectations) -> Vec<Check> {
    let grid = GridSpec::default();
    let mut out = Vec::new();
    let iu = |d| ThresholdBelief::independent_uniform(1.0, d).expect("valid belief");
    match optimize_offer(&iu(0.0), grid) {
        Ok(opt) => {
            let offer = canonical(&opt.offer);
            out.push(check(
                "d=0 offer",
                fmt3(offer),
                format!("{} ± 0.001", fmt3(exp.egalitarian_offer)),
                within(offer, exp.egalitarian_offer, 1e-3),
            ));
            out.push(close("d=0 payoff", opt.expected_payoff, exp.egalitarian_payoff, 1e-3));
        }
        Err(err) => out.extend(failed("d=0", err)),
    }
    match optimize_offer(&iu(0.2), grid) {
        Ok(opt) => {
            let offer = canonical(&opt.offer);
            out.push(check(
                "d=0.2 offer",
                fmt3(offer),
                format!("{} ± 0.001", fmt3(exp.offer_d_02)),
                within(offer, exp.offer_d_02, 1e-3),
            ));
        }
        Err(err) => out.extend(failed("d=0.2", err)),
    }
    let third = 1.0 / 3.0;
    let gc = Allocation::new([1.0 - 2.0 * third, third, third]).expect("valid split");
    out.push(close("grand coalition payoff", expected_payoff(&gc, &iu(0.0)), exp.gc_payoff, 1e-3));

    let anti = ThresholdBelief::new(BeliefFamily::Antithetic { tau_bar: 1.0 }, 0.0).expect("valid belief");
    match optimize_offer(&anti, grid) {
        Ok(opt) => {
            out.push(close("antithetic optimum", opt.expected_payoff, exp.antithetic_pair[0], 1e-3));
            out.push(check("antithetic degenerate", opt.degenerate.to_string(), "true", opt.degenerate));
        }
        Err(err) => out.extend(failed("antithetic", err)),
    }
    out.push(close("antithetic grand coalition", expected_payoff(&gc, &anti), exp.antithetic_pair[1], 1e-3));

    let five = [
        ("five players, three equal shares", vec![third, third, 0.0, 0.0]),
        ("five players, 0.22 to three", vec![0.22, 0.22, 0.22, 0.0]),
    ];
    for ((name, offers), want) in five.into_iter().zip(exp.five_player) {
        match n_player_expected_payoff(&offers, 5, 1.0, 0.0) {
            Ok(v) => out.push(close(name, v, want, 5e-4)),
            Err(err) => out.extend(failed(name, err)),
        }
    }
    out
}

fn convergence(exp: &Expectations) -> Vec<Check> {
    let sequence: Vec<ThresholdBelief> = (1..=10)
        .map(|n| {
            let n = n as f64;
            ThresholdBelief::new(BeliefFamily::GaussianCopula { tau_bar: 1.0, rho: 0.5 / n }, 0.1 / n)
                .expect("valid belief")
        })
        .collect();
    let study = match convergence_study(0.0, &sequence, GridSpec::default()) {
        Ok(s) => s,
        Err(err) => return failed("convergence", err),
    };
    let dists: Vec<f64> = study.rows.iter().map(|(_, d)| *d).collect();
    let tail = &dists[exp.convergence_from - 1..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let listed = tail.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(" ");
    let last = *dists.last().expect("ten rows");
    vec![
        check(format!("distances from n = {}", exp.convergence_from), listed, "non-increasing", monotone),
        check(
            "distance at n = 10",
            format!("{last:.6}"),
            format!("< {}", exp.convergence_distance),
            last < exp.convergence_distance,
        ),
    ]
}

/// Seeded belief configurations covering every family.
pub fn oracle_belief(seed: u64) -> ThresholdBelief {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau_bar = rng.random_range(0.5..1.5);
    let d = rng.random_range(0.0..0.3);
    let family = match seed % 5 {
        0 => BeliefFamily::IndependentUniform { tau_bar },
        1 => BeliefFamily::GaussianCopula { tau_bar, rho: rng.random_range(-0.9..0.9) },
        2 => BeliefFamily::Discrete {
            points: (0..6).map(|_| (rng.random_range(0.0..0.8), rng.random_range(0.0..0.8), 1.0 / 6.0)).collect(),
        },
        3 => BeliefFamily::Mixture {
            components: vec![
                (0.3, BeliefFamily::Comonotone { tau_bar }),
                (0.7, BeliefFamily::IndependentUniform { tau_bar: tau_bar.max(0.8) }),
            ],
        },
        _ => BeliefFamily::Antithetic { tau_bar },
    };
    ThresholdBelief::new(family, d).expect("valid belief")
}

/// Exhaustive scan of the 0.05 simplex, written independently of the
/// optimizer's scan.
fn enumerate_max(belief: &ThresholdBelief) -> f64 {
    let n = 20u32;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n - i {
            let k = n - i - j;
            let (a, b, c) = (f64::from(i) / f64::from(n), f64::from(j) / f64::from(n), f64::from(k) / f64::from(n));
            let lambda = belief.lambda(b, c).expect("grid shares are valid");
            best = best.max(belief.d + (a - belief.d) * lambda);
        }
    }
    best
}

fn oracle(exp: &Expectations) -> Vec<Check> {
    let grid = GridSpec { step: 0.05, refine_depth: 0 };
    exp.oracle_seeds
        .iter()
        .map(|&seed| {
            let belief = oracle_belief(seed);
            let brute = enumerate_max(&belief);
            match optimize_offer(&belief, grid) {
                Ok(opt) => check(
                    format!("seed {seed}"),
                    format!("{:.15}", opt.grid_payoff),
                    format!("{brute:.15}"),
                    opt.grid_payoff == brute,
                ),
                Err(err) => check(format!("seed {seed}"), format!("error: {err}"), format!("{brute:.15}"), false),
            }
        })
        .collect()
}

fn surface(exp: &Expectations) -> Vec<Check> {
    let mut out = Vec::new();
    for e in &exp.surfaces {
        let Some(column) = presets::logit_column(e.column) else {
            out.extend(failed(&format!("column {}", e.column), "unknown column"));
            continue;
        };
        let flags = presets::strong_flags(column);
        match payoff_surface(&column.model, e.mrp, flags, 0.005) {
            Ok(s) => {
                let name = format!("column {} mrp {:.4}", e.column, e.mrp);
                out.push(close(format!("{name} keep"), s.optimum.s_a, e.keep, exp.surface_tolerance));
                out.push(close(format!("{name} value"), s.optimum.expected_payoff, e.value, exp.surface_tolerance));
                if e.mwc_weak {
                    let ok = s.optimum_is_mwc() && s.optimum_targets_weak();
                    let o = s.optimum;
                    out.push(check(
                        format!("{name} MWC to weak"),
                        fmt3([o.s_a, o.s_weak, o.s_strong]),
                        "MWC to weak",
                        ok,
                    ));
                }
            }
            Err(err) => out.extend(failed(&format!("column {}", e.column), err)),
        }
    }
    out
}

/// Fraction of replications whose refit lies within the relative tolerance
/// on every coefficient.
pub fn logit_roundtrip_passes(model: &LogitModel, votes: usize, seeds: std::ops::Range<u64>, tol: f64) -> Vec<bool> {
    use rayon::prelude::*;
    let truth = model.as_array();
    seeds
        .into_par_iter()
        .map(|seed| {
            let records = simulate_votes(model, &VoteDesign::default(), votes, seed);
            match fit_logit(&records) {
                Ok(fit) => fit.model.as_array().iter().zip(&truth).all(|(b, t)| (b - t).abs() <= tol * t.abs()),
                Err(_) => false,
            }
        })
        .collect()
}

fn logit_roundtrip(exp: &Expectations) -> Vec<Check> {
    let Some(column) = presets::logit_column(exp.roundtrip_column) else {
        return failed("logit", "unknown column");
    };
    let passes = logit_roundtrip_passes(
        &column.model,
        exp.roundtrip_votes,
        0..exp.roundtrip_replications,
        exp.roundtrip_tolerance,
    );
    let n = passes.iter().filter(|p| **p).count();
    vec![check(
        format!("column {} refits within {}%", exp.roundtrip_column, exp.roundtrip_tolerance * 100.0),
        format!("{n}/{}", exp.roundtrip_replications),
        format!(">= {}", exp.roundtrip_min_pass),
        n >= exp.roundtrip_min_pass,
    )]
}

fn gini_check(exp: &Expectations) -> Vec<Check> {
    exp.gini
        .iter()
        .map(|(want, shares)| {
            let exact = gini_exact(shares);
            let float =
                gini(&[rational::to_f64(&shares[0]), rational::to_f64(&shares[1]), rational::to_f64(&shares[2])]);
            let shown = shares.iter().map(rational::display).collect::<Vec<_>>().join(", ");
            check(
                format!("({shown})"),
                format!("{} ({float})", rational::display(&exact)),
                rational::display(want),
                &exact == want && float == rational::to_f64(want),
            )
        })
        .collect()
}

fn simulation(exp: &Expectations) -> Vec<Check> {
    let mut out = Vec::new();
    for spec in presets::all_treatments() {
        let (logs, summary) = match run_batch(&spec, Agents::equilibrium(), exp.sim_matches, exp.sim_seed) {
            Ok(r) => r,
            Err(err) => return failed(&spec.id, err),
        };
        out.push(check(
            format!("{} first-round rejections", spec.id),
            format!("{:.4}", summary.first_offer_rejection_rate),
            "0",
            summary.first_offer_rejection_rate == 0.0,
        ));
        let mut problem = None;
        for log in &logs {
            if let Err(e) = log.check(&spec) {
                problem.get_or_insert(format!("seed {}: {e}", log.seed));
            }
            if !matches!(log.terminal_kind, TerminalKind::PassedRound(1)) {
                problem.get_or_insert(format!("seed {}: first offer failed", log.seed));
            }
        }
        out.push(check(
            format!("{} log invariants", spec.id),
            problem.clone().unwrap_or("hold".into()),
            "hold",
            problem.is_none(),
        ));
        if spec.protocol == InfoProtocol::Partial {
            let contradictions = disclosure_contradictions(&spec, exp);
            out.push(check(
                format!("{} disclosures", spec.id),
                format!("{contradictions} contradictions"),
                "0 contradictions",
                contradictions == 0,
            ));
        }
        let again = run_batch(&spec, Agents::equilibrium(), exp.sim_matches, exp.sim_seed)
            .map(|(l, _)| crate::sim::to_jsonl(&l));
        let same = again.is_ok_and(|text| text == crate::sim::to_jsonl(&logs));
        out.push(check(format!("{} reruns identical", spec.id), same.to_string(), "true", same));
    }
    out
}

/// Disclosure records contradicted by the next realized proposer. Voters
/// that reject everything force play through every round.
fn disclosure_contradictions(spec: &crate::game::GameSpec, exp: &Expectations) -> usize {
    let stubborn = crate::sim::VoterAgent::Threshold {
        belief: BeliefFamily::Discrete { points: vec![(1.5, 1.5, 1.0)] },
        redraw_each_round: false,
    };
    let agents = Agents::uniform(crate::sim::ProposerAgent::egalitarian_mwc(), stubborn);
    let Ok((logs, _)) = run_batch(spec, agents, exp.sim_matches, exp.sim_seed) else {
        return usize::MAX;
    };
    let mut bad = 0;
    for log in &logs {
        for w in log.rounds.windows(2) {
            let next = w[1].proposer;
            bad += usize::from(match w[0].disclosure {
                LogDisclosure::ExcludedNext(j) => j == next,
                LogDisclosure::KnownNext(j) => j != next,
                LogDisclosure::NoInfo => false,
            });
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_expectation_fails_only_its_row() {
        let mut exp = Expectations::default();
        exp.table1[0].exact = q(9, 10);
        let r = run_criterion("table1", &exp).unwrap();
        assert!(!r.pass);
        let failures: Vec<_> = r.failures().map(|c| c.name.clone()).collect();
        assert_eq!(failures, vec!["1-perfect round 1 unconditional".to_string()]);
        assert!(run_criterion("gini", &exp).unwrap().pass);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion("nope", &Expectations::default()).is_none());
    }

    #[test]
    fn oracle_beliefs_are_valid() {
        for seed in Expectations::default().oracle_seeds {
            oracle_belief(seed).validate().unwrap();
        }
    }
}
