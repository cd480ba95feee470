use boxball::bbs::{carrier_sweep, run_soliton_census, soliton_census_ts, step, CarrierEvent};
use boxball::gap::{bulk_increment, coin_increments, decompose_trajectory, project};
use boxball::partition::build_partition;
use boxball::reflection::reflection_matrix;
use boxball::{BallConfig, Capacity, CoinVector, DynamicsParams, Epsilon};
use proptest::prelude::*;

fn config(max_d: usize, max_gap: i64) -> impl Strategy<Value = BallConfig> {
    sized_config(1, max_d, max_gap)
}

fn sized_config(min_d: usize, max_d: usize, max_gap: i64) -> impl Strategy<Value = BallConfig> {
    (0i64..6, prop::collection::vec(0..=max_gap, min_d - 1..max_d)).prop_map(|(start, gaps)| {
        BallConfig::from_gaps(&gaps).unwrap().shifted(start).unwrap()
    })
}

fn capacity() -> impl Strategy<Value = Capacity> {
    prop_oneof![Just(Capacity::Unbounded), (1u32..5).prop_map(Capacity::Finite)]
}

fn with_coins(max_d: usize, max_gap: i64) -> impl Strategy<Value = (BallConfig, CoinVector)> {
    coins_for(sized_config(1, max_d, max_gap))
}

fn gap_coins(max_d: usize, max_gap: i64) -> impl Strategy<Value = (BallConfig, CoinVector)> {
    coins_for(sized_config(2, max_d, max_gap))
}

fn coins_for(configs: impl Strategy<Value = BallConfig>) -> impl Strategy<Value = (BallConfig, CoinVector)> {
    configs.prop_flat_map(|c| {
        let d = c.d();
        (Just(c), prop::collection::vec(any::<bool>(), d).prop_map(CoinVector::new))
    })
}

fn params(d: usize, cap: Capacity) -> DynamicsParams {
    DynamicsParams::new(Epsilon::from_ratio(1, 2).unwrap(), cap, d).unwrap()
}

proptest! {
    #[test]
    fn fast_step_matches_traced_sweep((c, coins) in with_coins(12, 4), cap in capacity()) {
        let (traced, _) = carrier_sweep(&c, &params(c.d(), cap), &coins).unwrap();
        prop_assert_eq!(step(&c, cap, &coins).unwrap(), traced);
    }

    #[test]
    fn translation_equivariance((c, coins) in with_coins(10, 4), cap in capacity(), s in 0i64..50) {
        let a = step(&c.shifted(s).unwrap(), cap, &coins).unwrap();
        let b = step(&c, cap, &coins).unwrap().shifted(s).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gap_increment_depends_only_on_gaps((c, coins) in gap_coins(8, 4), cap in capacity()) {
        let w = project(&c).unwrap();
        let next = project(&step(&c, cap, &coins).unwrap()).unwrap();
        let mask = coins.eta.iter().enumerate().fold(0usize, |m, (i, &b)| m | (usize::from(b) << i));
        let table = coin_increments(&w, cap).unwrap();
        let dw: Vec<i64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
        prop_assert_eq!(&table[mask], &dw);
    }

    #[test]
    fn interior_increment_is_bulk((c, coins) in gap_coins(8, 4), cap in capacity()) {
        let w = project(&c).unwrap();
        prop_assume!(w.iter().all(|&g| g > 0));
        let next = project(&step(&c, cap, &coins).unwrap()).unwrap();
        let dw: Vec<i64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
        prop_assert_eq!(dw, bulk_increment(&coins.eta));
    }

    #[test]
    fn balls_only_move_right((c, coins) in with_coins(12, 4), cap in capacity()) {
        let next = step(&c, cap, &coins).unwrap();
        prop_assert_eq!(next.d(), c.d());
        prop_assert!(next.positions().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(next.positions().iter().zip(c.positions()).all(|(a, b)| a >= b));
    }

    #[test]
    fn carrier_respects_capacity((c, coins) in with_coins(12, 3), cap in capacity()) {
        let (_, trace) = carrier_sweep(&c, &params(c.d(), cap), &coins).unwrap();
        prop_assert_eq!(trace.gamma[0], 0);
        prop_assert_eq!(*trace.gamma.last().unwrap(), 0);
        prop_assert!(trace.gamma.iter().all(|&g| g <= cap.limit()));
        let pickups = trace.events.iter().filter(|e| matches!(e, CarrierEvent::Pickup { .. })).count();
        let drops = trace.events.iter().filter(|e| matches!(e, CarrierEvent::Drop { .. })).count();
        prop_assert_eq!(pickups, drops);
        for e in &trace.events {
            if let CarrierEvent::Skip { ball, .. } = e {
                prop_assert!(cap != Capacity::Unbounded);
                prop_assert!(*ball < c.d());
            }
        }
    }

    #[test]
    fn deterministic_census_is_conserved(c in config(20, 5), steps in 1usize..20) {
        let before = soliton_census_ts(&c);
        prop_assert_eq!(before.iter().sum::<usize>(), c.d());
        let mut cur = c;
        for _ in 0..steps {
            cur = step(&cur, Capacity::Unbounded, &CoinVector::new(vec![true; cur.d()])).unwrap();
            prop_assert_eq!(soliton_census_ts(&cur), before.clone());
        }
    }

    #[test]
    fn census_matches_block_lengths_once_separated(c in config(10, 4)) {
        let census = soliton_census_ts(&c);
        let mut cur = c;
        for _ in 0..200 {
            cur = step(&cur, Capacity::Unbounded, &CoinVector::new(vec![true; cur.d()])).unwrap();
        }
        prop_assert_eq!(run_soliton_census(&cur), census);
    }

    #[test]
    fn decomposition_holds_on_random_paths(
        d in 2usize..5,
        cap in capacity(),
        num in 1i64..10,
        masks in prop::collection::vec(any::<u8>(), 1..60),
    ) {
        let eps = Epsilon::from_ratio(num, 10).unwrap();
        let part = build_partition(d, cap).unwrap();
        let r = reflection_matrix(&part, eps).unwrap();
        let coins: Vec<CoinVector> = masks.iter().map(|&m| CoinVector::from_mask(m as u64, d)).collect();
        let mut configs = vec![BallConfig::block(d)];
        for k in &coins {
            configs.push(step(configs.last().unwrap(), cap, k).unwrap());
        }
        let trace = decompose_trajectory(&configs, &coins, &part, &r).unwrap();
        prop_assert!(trace.verify(&r).is_ok());
        for t in 1..trace.len() {
            prop_assert!(trace.y[t].iter().zip(&trace.y[t - 1]).all(|(a, b)| a >= b && a - b <= 1));
        }
    }

    #[test]
    fn epsilon_text_round_trip(p in 0i64..=1000) {
        let e = Epsilon::from_ratio(p, 1000).unwrap();
        let back: Epsilon = e.to_string().parse().unwrap();
        prop_assert_eq!(back, e);
    }
}
