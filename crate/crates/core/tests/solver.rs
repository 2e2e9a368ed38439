use bargain_core::game::{enumerate_info_states, Disclosure, GameSpec, InfoProtocol, Player, RecognitionModel};
use bargain_core::presets;
use bargain_core::rational::{self, q, Q};
use bargain_core::spe::{
    check_offer_structure, classify_partner, continuation_values, predicted_first_share, solve, worked_example_check,
    worked_example_spec, Condition, PartnerClass,
};
use proptest::prelude::*;

/// Game tree of the fixed-order game solved on a grid of offers, written
/// without the solver: each proposer scans every grid offer that some voter
/// accepts and keeps the most. Ties between partners are split evenly.
fn grid_tree(order: &[usize], defaults: [f64; 3], grid: u32) -> Vec<f64> {
    let mut cont = defaults;
    let mut keeps = vec![0.0; order.len()];
    for (t, &p) in order.iter().enumerate().rev() {
        let others: Vec<usize> = (0..3).filter(|&i| i != p).collect();
        let mut best = -1.0;
        let mut partners: Vec<(usize, f64)> = Vec::new();
        for i in 0..=grid {
            for j in 0..=grid - i {
                let own = f64::from(i) / f64::from(grid);
                let xs = [f64::from(j) / f64::from(grid), f64::from(grid - i - j) / f64::from(grid)];
                let pass = (0..2).any(|k| xs[k] >= cont[others[k]] - 1e-12);
                if !pass || own < best - 1e-12 {
                    continue;
                }
                if own > best + 1e-12 {
                    best = own;
                    partners.clear();
                }
                for k in 0..2 {
                    if xs[k] >= cont[others[k]] - 1e-12 && xs[1 - k] == 0.0 {
                        partners.push((others[k], xs[k]));
                    }
                }
            }
        }
        partners.sort_by(|a, b| a.1.total_cmp(&b.1));
        let cheapest = partners[0].1;
        let chosen: Vec<(usize, f64)> = partners.into_iter().filter(|x| x.1 == cheapest).collect();
        let mut next = [0.0; 3];
        next[p] = best;
        for (who, share) in &chosen {
            next[*who] += share / chosen.len() as f64;
        }
        keeps[t] = best;
        cont = next;
    }
    keeps
}

fn fractions() -> impl Strategy<Value = [Q; 3]> {
    (0i64..=100, 0i64..=100, 0i64..=100)
        .prop_filter_map("sum at most one", |(a, b, c)| (a + b + c <= 100).then(|| [q(a, 100), q(b, 100), q(c, 100)]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fixed_order_matches_grid_tree(v in fractions()) {
        let spec = worked_example_spec(v.clone());
        let sol = solve(&spec).unwrap();
        let vf = [rational::to_f64(&v[0]), rational::to_f64(&v[1]), rational::to_f64(&v[2])];
        let tree = grid_tree(&[0, 1, 2], vf, 100);
        for (t, keep) in tree.iter().enumerate() {
            let state = sol.states(t + 1).next().unwrap();
            let exact = rational::to_f64(&sol.values[state][state.proposer.index()]);
            prop_assert!((exact - keep).abs() <= 0.01 + 1e-12, "round {}: solver {} grid {}", t + 1, exact, keep);
        }
    }

    #[test]
    fn structure_holds_for_any_defaults(
        v in fractions(),
        t in 1usize..=3,
        protocol in prop_oneof![Just(InfoProtocol::Perfect), Just(InfoProtocol::Partial), Just(InfoProtocol::None)],
        shrink in prop_oneof![Just(q(1, 1)), Just(q(19, 20)), Just(q(1, 2))],
    ) {
        let spec = GameSpec::new("p", t, protocol, v).with_shrink_factor(shrink);
        let sol = solve(&spec).unwrap();
        prop_assert!(check_offer_structure(&sol).is_ok(), "{:?}", check_offer_structure(&sol));
        for (state, cont) in &sol.continuation {
            prop_assert!(cont.iter().all(|c| *c >= rational::zero()));
            let total: Q = cont.iter().sum();
            let next_budget = if state.round < t { spec.budget(state.round + 1) } else { spec.budget(t) };
            prop_assert!(total <= next_budget);
        }
        for round in 1..=t {
            let total: Q = enumerate_info_states(&spec, round).unwrap().into_iter().map(|(_, p)| p).sum();
            prop_assert_eq!(total, rational::one());
        }
    }
}

#[test]
fn grid_tree_reproduces_introduction() {
    let keeps = grid_tree(&[0, 1, 2], [0.1, 0.3, 0.6], 100);
    assert!((keeps[0] - 1.0).abs() < 1e-12);
    assert!((keeps[1] - 0.9).abs() < 1e-12);
    assert!((keeps[2] - 0.9).abs() < 1e-12);
}

#[test]
fn introduction_proposals() {
    let r = worked_example_check([q(1, 10), q(3, 10), q(6, 10)]).unwrap();
    assert_eq!(r.proposals[2][0].shares, [q(1, 10), rational::zero(), q(9, 10)]);
    assert_eq!(r.proposals[1][0].shares, [q(1, 10), q(9, 10), rational::zero()]);
    assert_eq!(r.proposals[0][0].shares, [q(1, 1), rational::zero(), rational::zero()]);
    assert!(r.full_extraction && !r.knife_edge);

    let r = worked_example_check([q(4, 10), q(2, 10), q(4, 10)]).unwrap();
    assert_eq!(r.proposals[0][0].shares, [q(1, 1), rational::zero(), rational::zero()]);
    assert!(r.full_extraction);
}

#[test]
fn reachable_states_satisfy_structural_results() {
    for spec in presets::all_treatments() {
        let sol = solve(&spec).unwrap();
        check_offer_structure(&sol).unwrap();
        for state in sol.policy.keys() {
            if let Disclosure::KnownNext(next) = state.disclosure {
                if next != state.proposer {
                    assert_eq!(classify_partner(&sol, state, next).unwrap(), PartnerClass::Strong, "{state}");
                }
            }
        }
    }
}

#[test]
fn more_rounds_never_hurt_the_first_proposer() {
    let shares: Vec<Q> = ["1-perfect", "2-perfect", "3-perfect"]
        .iter()
        .map(|n| solve(&presets::treatment(n).unwrap()).unwrap().first_share)
        .collect();
    assert_eq!(shares, vec![q(19, 20), q(1, 1), q(1, 1)]);
    assert!(shares.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn continuation_examples() {
    let sol = solve(&presets::treatment("3-perfect").unwrap()).unwrap();
    for state in sol.states(2) {
        let Disclosure::KnownNext(next) = state.disclosure else { panic!("perfect disclosure") };
        let cont = continuation_values(&sol, state).unwrap();
        for p in Player::ALL {
            let want = if p == next { rational::one() } else { rational::zero() };
            assert_eq!(cont[p.index()], want);
        }
    }
    let incl = sol.state(1, Player::A, Disclosure::KnownNext(Player::A)).unwrap();
    assert_eq!(classify_partner(&sol, incl, Player::B).unwrap(), PartnerClass::NA);

    let one = presets::treatment("1-perfect").unwrap();
    let sol = solve(&one).unwrap();
    let state = sol.states(1).next().unwrap();
    assert_eq!(continuation_values(&sol, state).unwrap(), one.defaults);

    // the 0.90-default player is weak in round 1 of the two-round game
    let sol = solve(&presets::treatment("2-perfect").unwrap()).unwrap();
    let state = sol.states(1).next().unwrap();
    assert_eq!(classify_partner(&sol, state, Player::C).unwrap(), PartnerClass::Weak);
    assert_eq!(classify_partner(&sol, state, Player::B).unwrap(), PartnerClass::Strong);
    assert_eq!(continuation_values(&sol, state).unwrap()[1], q(19, 20));

    let sol = solve(&presets::treatment("3-none").unwrap()).unwrap();
    let state = sol.states(1).next().unwrap();
    assert_eq!(continuation_values(&sol, state).unwrap(), [q(1, 3), q(1, 3), q(1, 3)]);
    assert_eq!(classify_partner(&sol, state, Player::B).unwrap(), PartnerClass::NA);
    assert!(classify_partner(&sol, state, state.proposer).is_err());
}

#[test]
fn conditions_need_disclosure() {
    let sol = solve(&presets::treatment("3-none").unwrap()).unwrap();
    assert!(predicted_first_share(&sol, Condition::Incl).is_err());
    let sol = solve(&presets::treatment("1-perfect").unwrap()).unwrap();
    assert!(predicted_first_share(&sol, Condition::Excl).is_err());
}

#[test]
fn markov_recognition_is_solved() {
    // B never proposes after A
    let third = q(1, 3);
    let row_a = [q(1, 2), rational::zero(), q(1, 2)];
    let row = [third.clone(), third.clone(), third.clone()];
    let spec = GameSpec::new("m", 2, InfoProtocol::None, [rational::zero(), rational::zero(), rational::zero()])
        .with_recognition(RecognitionModel::Markov {
            initial: [rational::one(), rational::zero(), rational::zero()],
            transitions: vec![[row_a, row.clone(), row]],
        });
    let sol = solve(&spec).unwrap();
    let state = sol.states(1).next().unwrap();
    let cont = continuation_values(&sol, state).unwrap();
    assert_eq!(cont, [q(1, 2), rational::zero(), q(1, 2)]);
    // B is the cheap partner
    assert_eq!(sol.policy[state][0].shares, [q(1, 1), rational::zero(), rational::zero()]);
}
