use proptest::prelude::*;

use maxmin::afs::{self, AfsConfig};
use maxmin::approx::{self, ApproxConfig};
use maxmin::graphs::{f_m, max_matching, FatGraph, PathSolver};
use maxmin::oracle::{brute_force_opt, enumerate_configs};
use maxmin::{load_instance, save_instance, AssertLevel, Instance, Value};

fn instance(max_players: usize, max_resources: usize) -> impl Strategy<Value = Instance> {
    (1..=max_players, 1..=max_resources)
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec((1i64..=12, 1i64..=6), m),
                prop::collection::vec(prop::collection::vec(any::<bool>(), m), n),
            )
        })
        .prop_map(|(vals, masks)| {
            let values = vals.into_iter().map(|(a, b)| Value::ratio(a, b)).collect();
            let desires = masks
                .into_iter()
                .map(|row| row.iter().enumerate().filter(|(_, &d)| d).map(|(r, _)| r).collect())
                .collect();
            Instance::new(values, desires).unwrap()
        })
}

fn permuted(inst: &Instance, players: &[usize], resources: &[usize]) -> Instance {
    let mut values = vec![Value::zero(); inst.n_resources()];
    for (r, v) in inst.values().iter().enumerate() {
        values[resources[r]] = v.clone();
    }
    let mut desires = vec![Vec::new(); inst.n_players()];
    for p in 0..inst.n_players() {
        desires[players[p]] = inst.desires(p).iter().map(|&r| resources[r]).collect();
    }
    Instance::new(values, desires).unwrap()
}

fn graph(n: usize, m: usize) -> impl Strategy<Value = FatGraph> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), m), n).prop_map(move |rows| {
        let edges = rows
            .iter()
            .enumerate()
            .flat_map(|(p, row)| row.iter().enumerate().filter(|(_, &e)| e).map(move |(r, _)| (p, r)))
            .collect::<Vec<_>>();
        FatGraph::new(n, m, edges)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_json_roundtrip(inst in instance(5, 10)) {
        let text = save_instance(&inst);
        let back = load_instance(text.as_bytes()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn configs_are_minimal_antichain(inst in instance(3, 8), num in 1i64..=24, den in 1i64..=4) {
        let target = Value::ratio(num, den);
        for p in 0..inst.n_players() {
            let configs = enumerate_configs(&inst, p, &target).unwrap();
            for c in &configs {
                prop_assert!(c.iter().all(|&r| inst.is_desired(p, r)));
                prop_assert!(inst.value_of(c) >= target);
                for skip in 0..c.len() {
                    let mut less = c.clone();
                    less.remove(skip);
                    prop_assert!(inst.value_of(&less) < target);
                }
            }
            for (i, a) in configs.iter().enumerate() {
                for b in &configs[i + 1..] {
                    prop_assert!(!a.iter().all(|r| b.contains(r)));
                    prop_assert!(!b.iter().all(|r| a.contains(r)));
                }
            }
        }
    }

    #[test]
    fn opt_ignores_labels(
        inst in instance(4, 8),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut players: Vec<usize> = (0..inst.n_players()).collect();
        let mut resources: Vec<usize> = (0..inst.n_resources()).collect();
        players.shuffle(&mut rng);
        resources.shuffle(&mut rng);
        let other = permuted(&inst, &players, &resources);
        prop_assert_eq!(brute_force_opt(&inst).unwrap().0, brute_force_opt(&other).unwrap().0);
    }

    #[test]
    fn incremental_targets_match_fresh_solve(
        g in graph(5, 5),
        src_bits in any::<u8>(),
        order in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let m = max_matching(&g);
        let sources: Vec<usize> = (0..5).filter(|&p| src_bits & (1 << p) != 0 && !m.is_matched(p)).collect();
        let mut solver = PathSolver::new(&g, &m, &sources, &[]).unwrap();
        let mut targets = Vec::new();
        for p in order {
            let predicted = solver.would_increase(p);
            let grew = solver.add_target(p).unwrap();
            targets.push(p);
            prop_assert_eq!(predicted, grew);
            prop_assert_eq!(solver.count(), f_m(&g, &m, &sources, &targets).unwrap());
            solver.paths().validate(&g, &m, &sources, &targets).unwrap();
        }
    }

    #[test]
    fn solvers_return_valid_allocations(inst in instance(4, 9)) {
        let (opt, _) = brute_force_opt(&inst).unwrap();

        let mut cfg = ApproxConfig::new(&Value::one()).unwrap();
        cfg.assert = AssertLevel::Full;
        let out = approx::solve(&inst, &cfg).unwrap();
        prop_assert!(out.allocation.is_valid(&inst));
        prop_assert!(out.min_value >= &opt * &cfg.params.lambda);
        prop_assert!(out.target >= opt);

        let cfg = AfsConfig { assert: AssertLevel::Full, ..AfsConfig::default() };
        let out = afs::solve(&inst, &cfg).unwrap();
        prop_assert!(out.allocation.is_valid(&inst));
        prop_assert!(out.min_value >= &opt * &cfg.lambda);
    }
}
