use bargain_core::empirics::{
    classify_coalition, ecdf_and_ks, experienced, fit_logit, gini, gini_mean_difference, mean_rejection_payoff,
    optimization_rates, payoff_surface, simulate_votes, summary_tables, CoalitionKind, CoalitionType, EmpiricsError,
    MeasureTwoPayoff, TargetClass, VoteDesign, VoteRecord,
};
use bargain_core::game::{Allocation, GameSpec, InfoProtocol, Player, RecognitionModel};
use bargain_core::presets::{self, logit_column};
use bargain_core::rational;
use bargain_core::sim::{logistic, run_batch, Agents, LogitModel, ProposerAgent, VoterAgent};
use bargain_core::spe::{solve as solve_for, PartnerClass};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shares() -> impl Strategy<Value = [f64; 3]> {
    (0u32..=100, 0u32..=100).prop_filter_map("on the simplex", |(i, j)| {
        (i + j <= 100).then(|| [f64::from(i) / 100.0, f64::from(j) / 100.0, f64::from(100 - i - j) / 100.0])
    })
}

fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |xs: &[f64], t: f64| xs.iter().filter(|x| **x <= t).count() as f64 / xs.len() as f64;
    a.iter().chain(b).map(|&t| (cdf(a, t) - cdf(b, t)).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn gini_properties(s in shares()) {
        let g = gini(&s);
        prop_assert!((0.0..=2.0 / 3.0 + 1e-12).contains(&g));
        prop_assert!((gini(&[s[2], s[0], s[1]]) - g).abs() < 1e-12);
        prop_assert!((gini(&[s[1], s[0], s[2]]) - g).abs() < 1e-12);
        prop_assert!((gini_mean_difference(&s) - g).abs() < 1e-12);
    }

    #[test]
    fn higher_threshold_never_adds_partners(s in shares(), lo in 0.01..0.3f64, extra in 0.0..0.03f64) {
        let offer = Allocation::new(s).unwrap();
        let classes = [None, Some(PartnerClass::Weak), Some(PartnerClass::Strong)];
        let rank = |k: CoalitionKind| match k {
            CoalitionKind::Dictatorial => 0,
            CoalitionKind::Mwc => 1,
            CoalitionKind::GrandCoalition => 2,
        };
        let a = classify_coalition(&offer, 0, &classes, lo).unwrap();
        let b = classify_coalition(&offer, 0, &classes, lo + extra).unwrap();
        prop_assert!(rank(b.kind) <= rank(a.kind));
    }

    #[test]
    fn ks_matches_brute_force(
        a in prop::collection::vec(0u8..10, 1..30),
        b in prop::collection::vec(0u8..10, 1..30),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        prop_assert!((ecdf_and_ks(&a, &b).unwrap() - brute_ks(&a, &b)).abs() < 1e-12);
    }
}

#[test]
fn coalition_examples() {
    let classes = [None, Some(PartnerClass::Weak), Some(PartnerClass::Strong)];
    let classify = |s: [f64; 3]| classify_coalition(&Allocation::new(s).unwrap(), 0, &classes, 0.05).unwrap();

    let c = classify([1.0, 0.0, 0.0]);
    assert_eq!((c.kind, c.egalitarian), (CoalitionKind::Dictatorial, false));
    let c = classify([0.5, 0.5, 0.0]);
    assert_eq!((c.coalition_type(), c.egalitarian), (CoalitionType::MwcWeak, true));
    let c = classify([0.7, 0.0, 0.3]);
    assert_eq!((c.coalition_type(), c.egalitarian), (CoalitionType::MwcStrong, false));
    let third = 1.0 / 3.0;
    let c = classify([third, third, third]);
    assert_eq!(
        (c.kind, c.egalitarian, c.target_class),
        (CoalitionKind::GrandCoalition, true, TargetClass::NotApplicable)
    );
    let c = classify([0.4, 0.4, 0.2]);
    assert!(!c.egalitarian && c.hybrid_egalitarian);

    let na = classify_coalition(
        &Allocation::new([0.5, 0.5, 0.0]).unwrap(),
        0,
        &[None, Some(PartnerClass::NA), Some(PartnerClass::NA)],
        0.05,
    )
    .unwrap();
    assert_eq!(na.coalition_type(), CoalitionType::MwcNa);
    let offer = Allocation::new([0.5, 0.5, 0.0]).unwrap();
    assert!(matches!(classify_coalition(&offer, 0, &classes, 0.0), Err(EmpiricsError::BadThreshold(_))));
    assert!(classify_coalition(&offer, 0, &classes, 0.34).is_err());
}

#[test]
fn ks_example() {
    assert!((ecdf_and_ks(&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0]).unwrap() - 0.25).abs() < 1e-12);
    assert!(ecdf_and_ks(&[], &[1.0]).is_err());
}

/// A random model whose acceptance rate on the default design is moderate.
fn moderate_model(rng: &mut ChaCha8Rng) -> LogitModel {
    let design = VoteDesign::default();
    loop {
        let b: [f64; 4] = std::array::from_fn(|_| rng.random_range(-20.0..20.0));
        let model = LogitModel::new(b[0], b[1], b[2], b[3]);
        let probe = simulate_votes(&model, &design, 2000, 1);
        let mean =
            probe.iter().map(|r| logistic(model.index(r.own_share, r.strong_flag == 1, r.gini))).sum::<f64>() / 2000.0;
        if (0.25..=0.75).contains(&mean)
            && probe
                .iter()
                .all(|r| (0.01..0.99).contains(&logistic(model.index(r.own_share, r.strong_flag == 1, r.gini))))
        {
            return model;
        }
    }
}

#[test]
fn standard_errors_cover_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..3 {
        let model = moderate_model(&mut rng);
        let truth = model.as_array();
        let covered = (0..100u64)
            .filter(|&seed| {
                let fit = fit_logit(&simulate_votes(&model, &VoteDesign::default(), 2000, 1000 + seed)).unwrap();
                let est = fit.model.as_array();
                (0..4).all(|k| (est[k] - truth[k]).abs() <= 3.0 * fit.std_errors[k].unwrap())
            })
            .count();
        assert!(covered >= 95, "{model:?}: {covered}/100");
    }
}

#[test]
fn logit_identification() {
    let model = logit_column(2).unwrap().model;
    let mut records = simulate_votes(&model, &VoteDesign::default(), 800, 4);
    for r in &mut records {
        r.strong_flag = 0;
    }
    let fit = fit_logit(&records).unwrap();
    assert_eq!(fit.identified, [true, false, true, true]);
    assert_eq!(fit.std_errors[1], None);
    assert_eq!(fit.model.strong, 0.0);

    let all_yes: Vec<VoteRecord> = records.iter().map(|r| VoteRecord { vote: true, ..r.clone() }).collect();
    assert!(matches!(fit_logit(&all_yes), Err(EmpiricsError::Separation(_))));
    assert!(matches!(fit_logit(&[]), Err(EmpiricsError::EmptySample)));
}

/// Order A, B, C: in round 1 the next proposer B is strong and C is weak.
fn ordered() -> GameSpec {
    let zero = rational::zero();
    GameSpec::new("ordered", 3, InfoProtocol::Perfect, [zero.clone(), zero.clone(), zero])
        .with_recognition(RecognitionModel::FixedOrder(vec![Player::A, Player::B, Player::C]))
}

#[test]
fn surface_and_optimization_rates() {
    let model = logit_column(3).unwrap().model;
    let surface = payoff_surface(&model, 0.2, [false, true], 0.01).unwrap();
    for c in &surface.cells {
        let want = c.s_a * c.pass_prob + 0.2 * (1.0 - c.pass_prob);
        assert!((c.expected_payoff - want).abs() < 1e-12);
        assert!(c.expected_payoff <= surface.optimum.expected_payoff);
    }
    assert!(payoff_surface(&model, 0.2, [false, true], 0.1).is_err());

    let spec = ordered();
    let sol = solve_for(&spec).unwrap();
    let optimum = [surface.optimum.s_a, surface.optimum.s_weak, surface.optimum.s_strong];
    let agents = Agents::uniform(ProposerAgent::fixed(optimum).unwrap(), VoterAgent::Logit { model });
    let (logs, _) = run_batch(&spec, agents, 40, 2).unwrap();
    let rates = optimization_rates(&logs, &surface, Some(&sol), MeasureTwoPayoff::ExpectedOfOffer).unwrap();
    assert!((rates.aggregate_one.unwrap() - 100.0).abs() < 1e-9);
    assert!((rates.aggregate_two.unwrap() - 100.0).abs() < 1e-9);

    let dictator =
        Agents::uniform(ProposerAgent::dictatorial(), VoterAgent::Logit { model: logit_column(1).unwrap().model });
    let (logs, _) = run_batch(&spec, dictator, 40, 2).unwrap();
    let col1 = payoff_surface(&logit_column(1).unwrap().model, 0.2, [false, true], 0.01).unwrap();
    let rates = optimization_rates(&logs, &col1, Some(&sol), MeasureTwoPayoff::Realized).unwrap();
    assert_eq!(rates.by_type.len(), 1);
    assert_eq!(rates.by_type[0].coalition_type, CoalitionType::Dictatorial);
    assert!(rates.aggregate_one.unwrap() < 100.0);
}

#[test]
fn experienced_keeps_the_second_half() {
    let spec = presets::treatment("3-none").unwrap();
    let (logs, _) = run_batch(&spec, Agents::equilibrium(), 16, 0).unwrap();
    let kept = experienced(&logs);
    assert_eq!(kept.len(), 8);
    assert_eq!(kept[0].seed, logs[8].seed);
}

#[test]
fn summary_examples() {
    let spec = presets::treatment("1-perfect").unwrap();
    let sol = solve_for(&spec).unwrap();
    let (logs, _) = run_batch(&spec, Agents::equilibrium(), 20, 0).unwrap();
    let report = summary_tables(&logs, Some(&sol)).unwrap();
    assert!((report.mean_accepted_first_share.unwrap() - 0.95).abs() < 1e-12);
    assert_eq!(report.frequency(CoalitionType::MwcWeak), 1.0);
    assert_eq!(report.mwc_egalitarian, 0);

    let spec = presets::treatment("3-perfect").unwrap();
    let agents =
        Agents::uniform(ProposerAgent::egalitarian_gc(), VoterAgent::Logit { model: logit_column(7).unwrap().model });
    let (logs, _) = run_batch(&spec, agents, 30, 0).unwrap();
    let report = summary_tables(&logs, None).unwrap();
    assert_eq!(report.frequency(CoalitionType::GrandCoalition), 1.0);
    assert_eq!(report.gc_egalitarian, report.gc_count);
}

#[test]
fn rejection_payoff_example() {
    let spec = presets::treatment("1-perfect").unwrap();
    let stubborn = VoterAgent::Threshold {
        belief: bargain_core::belief::BeliefFamily::Discrete { points: vec![(1.5, 1.5, 1.0)] },
        redraw_each_round: false,
    };
    let (mut logs, _) = run_batch(&spec, Agents::uniform(ProposerAgent::Equilibrium, stubborn), 2, 0).unwrap();
    logs[0].final_alloc[0] = 0.10;
    logs[1].final_alloc[0] = 0.12;
    let (accepted, _) = run_batch(&spec, Agents::equilibrium(), 2, 0).unwrap();
    logs.extend(accepted);
    let mrp = mean_rejection_payoff(&logs);
    assert!((mrp.mrp.unwrap() - 0.11).abs() < 1e-12);
    assert_eq!((mrp.n_rejected, mrp.n_matches), (2, 4));
    assert!((mrp.rejection_rate - 0.5).abs() < 1e-12);
}
