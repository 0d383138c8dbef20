mod common;

use common::*;
use netrel::kst::{build_chain, k_lifetime};
use netrel::learner::{run_al_kst, LearnerConfig};
use netrel::lifetimes::sample_pool;
use netrel::net_model::derive_variant;
use netrel::signature::{default_grid, exact_signature, mc_kst, reliability};
use netrel::{Network, StateVector};
use proptest::prelude::*;

fn any_network(seed: u64) -> (Network, Dists) {
    if seed.is_multiple_of(3) {
        random_node_network(seed)
    } else {
        random_edge_network(seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exact_counts_match_enumeration(seed in any::<u64>()) {
        let (net, _) = any_network(seed);
        prop_assume!(net.m() <= 14);
        let oracle = oracle_signature(&net);
        let table = exact_signature(&net, 26).unwrap();
        prop_assert_eq!(table.n_keys(), oracle.len());
        for idx in 0..table.n_keys() {
            let (w, n) = oracle[&table.key_of(idx).0];
            prop_assert_eq!(table.counts(idx), (w, n - w));
        }
    }

    #[test]
    fn exact_curve_matches_state_enumeration(seed in any::<u64>()) {
        let (net, dists) = any_network(seed);
        prop_assume!(net.m() <= 12);
        let grid = default_grid(net.class_sizes(), &dists, 32).unwrap();
        let curve = reliability(&exact_signature(&net, 26).unwrap(), &dists, &grid).unwrap();
        let truth = oracle_curve(&net, &dists, &grid);
        for (a, b) in curve.values.iter().zip(&truth) {
            prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn structure_function_matches_search(seed in any::<u64>(), mask in any::<u64>()) {
        let (net, _) = any_network(seed);
        let x = StateVector::from_mask(net.m(), mask & ((1 << net.m()) - 1));
        prop_assert_eq!(net.structure_function(&x).unwrap(), oracle_works(&net, &x));
    }

    #[test]
    fn k_lifetime_is_the_system_failure_time(seed in any::<u64>()) {
        let (net, dists) = any_network(seed);
        let pool = sample_pool(&net, &dists, 20, seed).unwrap();
        for s in &pool.samples {
            let k = k_lifetime(&net, s).unwrap();
            let alive = |t: f64| {
                let x = StateVector::from_bits(&s.times.iter().map(|&c| c > t).collect::<Vec<_>>());
                oracle_works(&net, &x)
            };
            if k.time.is_infinite() {
                prop_assert!(oracle_works(&net, &StateVector::zeros(net.m())));
                continue;
            }
            prop_assert!(!alive(k.time));
            let before = s.times.iter().copied().filter(|&c| c < k.time).fold(0.0, f64::max);
            prop_assert!(alive(before));
        }
    }

    #[test]
    fn chain_states_lose_one_component_at_a_time(seed in any::<u64>()) {
        let (net, dists) = any_network(seed);
        let pool = sample_pool(&net, &dists, 10, seed).unwrap();
        for s in &pool.samples {
            let chain = build_chain(&net, s).unwrap();
            let states: Vec<StateVector> = chain.vectors().collect();
            prop_assert_eq!(states.len(), net.m() + 1);
            for (i, x) in states.iter().enumerate() {
                prop_assert_eq!(x.count_ones(), net.m() - i);
                prop_assert_eq!(chain.phi(i), oracle_works(&net, x));
            }
        }
    }

    #[test]
    fn mc_kst_records_every_chain_state(seed in any::<u64>(), n in 1usize..400) {
        let (net, dists) = any_network(seed);
        let pool = sample_pool(&net, &dists, n, seed).unwrap();
        let table = mc_kst(&net, &pool).unwrap();
        prop_assert_eq!(table.total_observations(), (n * (net.m() + 1)) as u64);
        let full = table.n_keys() - 1;
        prop_assert_eq!(table.counts(full), (n as u64, 0));
        let empty = if oracle_works(&net, &StateVector::zeros(net.m())) { (n as u64, 0) } else { (0, n as u64) };
        prop_assert_eq!(table.counts(0), empty);
    }

    #[test]
    fn variant_structure_is_the_original_with_components_off(seed in any::<u64>(), pick in any::<u64>(), mask in any::<u64>()) {
        let (net, _) = any_network(seed);
        let m = net.m();
        let removed: Vec<usize> = (0..m).filter(|i| pick >> i & 1 == 1 && i % 3 == 0).collect();
        let Ok((variant, keep)) = derive_variant(&net, &removed) else { return Ok(()) };
        let x = StateVector::from_mask(variant.m(), mask & ((1 << variant.m()) - 1));
        let embedded = keep.embed(&x).unwrap();
        for &r in &removed {
            prop_assert!(!embedded.get(r));
        }
        prop_assert_eq!(oracle_works(&variant, &x), oracle_works(&net, &embedded));
    }

    #[test]
    fn learner_respects_its_budget(seed in any::<u64>()) {
        let (net, dists) = any_network(seed);
        let pool = sample_pool(&net, &dists, 600, seed).unwrap();
        let mut cfg = LearnerConfig::for_network(&net, 600, seed);
        cfg.forest.n_trees = 20;
        let out = run_al_kst(&net, &pool, &cfg).unwrap();
        let batches: usize = out.audit.checks.iter().map(|c| c.batch.len()).sum();
        prop_assert_eq!(out.audit.labeled_samples, out.audit.n_ini + batches);
        prop_assert!(out.audit.labeled_samples <= 600);
        prop_assert_eq!(out.table.total_observations(), (600 * (net.m() + 1)) as u64);
    }
}
