use bargain_core::belief::{
    convergence_study, expected_payoff, n_player_expected_payoff, optimize_offer, BeliefFamily, GridSpec,
    ThresholdBelief,
};
use bargain_core::game::Allocation;
use bargain_core::reproduce::oracle_belief;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<BeliefFamily> {
    vec![
        BeliefFamily::IndependentUniform { tau_bar: 1.0 },
        BeliefFamily::Comonotone { tau_bar: 0.8 },
        BeliefFamily::Antithetic { tau_bar: 1.0 },
        BeliefFamily::GaussianCopula { tau_bar: 1.0, rho: 0.6 },
        BeliefFamily::GaussianCopula { tau_bar: 1.2, rho: -0.95 },
        BeliefFamily::Discrete { points: vec![(0.1, 0.4, 0.25), (0.3, 0.3, 0.25), (0.5, 0.05, 0.5)] },
        BeliefFamily::Mixture {
            components: vec![
                (0.4, BeliefFamily::Comonotone { tau_bar: 1.0 }),
                (0.6, BeliefFamily::IndependentUniform { tau_bar: 0.7 }),
            ],
        },
    ]
}

fn lambda(family: &BeliefFamily, b: f64, c: f64) -> f64 {
    ThresholdBelief::new(family.clone(), 0.0).unwrap().lambda(b, c).unwrap()
}

fn tau_bar(family: &BeliefFamily) -> Option<f64> {
    match family {
        BeliefFamily::IndependentUniform { tau_bar }
        | BeliefFamily::Comonotone { tau_bar }
        | BeliefFamily::Antithetic { tau_bar }
        | BeliefFamily::GaussianCopula { tau_bar, .. } => Some(*tau_bar),
        _ => None,
    }
}

proptest! {
    #[test]
    fn lambda_is_monotone(idx in 0usize..7, b in 0.0..1.0f64, c in 0.0..1.0f64, db in 0.0..0.5f64, dc in 0.0..0.5f64) {
        let f = &families()[idx];
        let lo = lambda(f, b, c);
        let hi = lambda(f, b + db, c + dc);
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-12, "{f:?}: {lo} > {hi}");
    }

    #[test]
    fn optimum_is_mwc_under_uniform_marginals(
        tau in 0.5..1.5f64,
        rho in -0.9..0.9f64,
        d in 0.0..0.6f64,
        which in 0usize..3,
    ) {
        let family = match which {
            0 => BeliefFamily::IndependentUniform { tau_bar: tau },
            1 => BeliefFamily::Comonotone { tau_bar: tau },
            _ => BeliefFamily::GaussianCopula { tau_bar: tau, rho },
        };
        let belief = ThresholdBelief::new(family, d).unwrap();
        prop_assert!(belief.positive_diagonal_mass());
        let opt = optimize_offer(&belief, GridSpec { step: 0.01, refine_depth: 2 }).unwrap();
        // on a near-flat plateau the reported offer is the least unequal
        // near-optimal point, so only the scan maximum is held to the claim
        let [_, b, c] = opt.grid_offer.shares();
        prop_assert!(b.min(c) < 0.01, "{:?}", opt.grid_offer);
        prop_assert!(b.max(c) <= tau + 1e-9);
        prop_assert!(opt.degenerate || opt.is_mwc, "{:?}", opt.offer);
        prop_assert!(opt.expected_payoff > d + 1e-6);
    }
}

#[test]
fn lambda_boundaries() {
    for f in families() {
        if !matches!(f, BeliefFamily::Discrete { .. }) {
            assert_eq!(lambda(&f, 0.0, 0.0), 0.0, "{f:?}");
        }
        if let Some(t) = tau_bar(&f) {
            for s in [0.0, 0.2, 0.7] {
                assert!((lambda(&f, t, s) - 1.0).abs() < 1e-12, "{f:?}");
                assert!((lambda(&f, s, t) - 1.0).abs() < 1e-12, "{f:?}");
            }
        }
    }
    // atoms are met with equality
    let atoms = BeliefFamily::Discrete { points: vec![(0.3, 0.6, 1.0)] };
    assert_eq!(lambda(&atoms, 0.3, 0.0), 1.0);
    assert_eq!(lambda(&atoms, 0.29, 0.59), 0.0);
}

#[test]
fn independent_uniform_is_inclusion_exclusion() {
    let f = BeliefFamily::IndependentUniform { tau_bar: 1.3 };
    for i in 0..=40 {
        for j in 0..=40 {
            let (b, c) = (f64::from(i) / 40.0, f64::from(j) / 40.0);
            let (u, v) = ((b / 1.3).min(1.0), (c / 1.3).min(1.0));
            assert!((lambda(&f, b, c) - (1.0 - (1.0 - u) * (1.0 - v))).abs() < 1e-12);
        }
    }
    let third = 1.0 / 3.0;
    assert!((lambda(&BeliefFamily::IndependentUniform { tau_bar: 1.0 }, third, third) - 5.0 / 9.0).abs() < 1e-12);
    assert!((lambda(&BeliefFamily::Antithetic { tau_bar: 1.0 }, 0.3, 0.45) - 0.75).abs() < 1e-12);
}

#[test]
fn lambda_matches_sampled_acceptance() {
    let n = 1_000_000;
    let points = [(0.2, 0.3), (0.5, 0.1), (0.35, 0.35), (0.05, 0.6)];
    for (k, f) in families().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + k as u64);
        let mut hits = [0u32; 4];
        for _ in 0..n {
            let (tb, tc) = f.sample(&mut rng);
            for (h, &(b, c)) in hits.iter_mut().zip(&points) {
                if tb <= b || tc <= c {
                    *h += 1;
                }
            }
        }
        for (h, &(b, c)) in hits.iter().zip(&points) {
            let p = lambda(f, b, c);
            let freq = f64::from(*h) / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-9);
            assert!((freq - p).abs() <= 3.0 * se, "{f:?} at ({b}, {c}): closed form {p}, sampled {freq}");
        }
    }
}

#[test]
fn published_payoffs() {
    let iu = ThresholdBelief::independent_uniform(1.0, 0.0).unwrap();
    let third = 1.0 / 3.0;
    let egal = Allocation::new([third, third, third]).unwrap();
    assert!((expected_payoff(&egal, &iu) - 5.0 / 27.0).abs() < 1e-12);
    assert!((expected_payoff(&Allocation::new([0.5, 0.5, 0.0]).unwrap(), &iu) - 0.25).abs() < 1e-12);

    let anti = ThresholdBelief::new(BeliefFamily::Antithetic { tau_bar: 1.0 }, 0.0).unwrap();
    assert!(!anti.positive_diagonal_mass());
    assert!((expected_payoff(&Allocation::new([0.5, 0.25, 0.25]).unwrap(), &anti) - 0.25).abs() < 1e-12);
    assert!((expected_payoff(&egal, &anti) - 2.0 / 9.0).abs() < 1e-12);

    assert!((n_player_expected_payoff(&[third, third, 0.0, 0.0], 5, 1.0, 0.0).unwrap() - 0.0370).abs() < 5e-5);
    assert!((n_player_expected_payoff(&[0.22, 0.22, 0.22, 0.0], 5, 1.0, 0.0).unwrap() - 0.0420).abs() < 5e-4);
    assert!((n_player_expected_payoff(&[0.5, 0.0], 3, 1.0, 0.0).unwrap() - 0.25).abs() < 1e-12);
    assert!(n_player_expected_payoff(&[0.5, 0.0, 0.0], 4, 1.0, 0.0).is_err());
    assert!(n_player_expected_payoff(&[0.5], 3, 1.0, 0.0).is_err());
}

/// Every 0.05 grid point, scored without the optimizer.
fn scan(belief: &ThresholdBelief) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=20u32 {
        for j in 0..=20 - i {
            let s = [f64::from(i) / 20.0, f64::from(j) / 20.0, f64::from(20 - i - j) / 20.0];
            best = best.max(belief.d + (s[0] - belief.d) * belief.lambda(s[1], s[2]).unwrap());
        }
    }
    best
}

#[test]
fn coarse_grid_matches_exhaustive_scan() {
    let grid = GridSpec { step: 0.05, refine_depth: 0 };
    for seed in 100..140 {
        let belief = oracle_belief(seed);
        let opt = optimize_offer(&belief, grid).unwrap();
        assert!((opt.grid_payoff - scan(&belief)).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn convergence_on_a_fine_grid() {
    let sequence: Vec<ThresholdBelief> = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|n| ThresholdBelief::new(BeliefFamily::GaussianCopula { tau_bar: 1.0, rho: 0.5 / n }, 0.1 / n).unwrap())
        .collect();
    let study = convergence_study(0.0, &sequence, GridSpec { step: 0.001, refine_depth: 0 }).unwrap();
    let dists: Vec<f64> = study.rows.iter().map(|r| r.1).collect();
    assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
    assert!(dists[3] < 0.01, "{dists:?}");

    let limit = vec![ThresholdBelief::independent_uniform(1.0, 0.0).unwrap(); 3];
    let study = convergence_study(0.0, &limit, GridSpec::default()).unwrap();
    assert!(study.monotone);
    assert!(study.rows.iter().all(|r| r.1 <= 0.005));

    let sixty = vec![ThresholdBelief::independent_uniform(1.0, 0.2).unwrap(); 2];
    let study = convergence_study(0.2, &sixty, GridSpec::default()).unwrap();
    assert_eq!(study.limit, [0.6, 0.4, 0.0]);
    assert!(study.rows.iter().all(|r| r.1 <= 1e-3));
}
