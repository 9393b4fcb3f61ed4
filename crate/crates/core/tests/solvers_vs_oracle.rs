//! Both solvers against the brute-force oracle on seeded small instances,
//! with the full invariant suite switched on.

use maxmin::afs::{self, AfsConfig};
use maxmin::approx::{self, ApproxConfig};
use maxmin::generate::{generate, GeneratorKind, GeneratorParams};
use maxmin::oracle::{brute_force_opt, check_dual};
use maxmin::search::TargetOutcome;
use maxmin::{AssertLevel, Instance, Stats, Value};

fn suite(count: u64) -> Vec<Instance> {
    (0..count)
        .map(|seed| {
            let kind = GeneratorKind::ALL[(seed % 4) as usize];
            let n = 2 + (seed % 4) as usize;
            let m = (n + 2 + (seed % 7) as usize).min(12);
            generate(kind, &GeneratorParams::new(seed, n, m)).unwrap()
        })
        .collect()
}

/// Targets at and above the optimum, to push the solvers into deep stacks
/// and stuck states that bisection alone rarely reaches.
fn probe_targets(opt: &Value) -> Vec<Value> {
    [(1, 1), (5, 4), (3, 2), (2, 1), (3, 1), (4, 1)]
        .iter()
        .map(|&(a, b)| opt * Value::ratio(a, b))
        .collect()
}

fn check_probe(inst: &Instance, opt: &Value, t: &Value, outcome: TargetOutcome, label: &str) {
    match outcome {
        TargetOutcome::Covered(alloc) => assert!(alloc.is_valid(inst), "{label}"),
        TargetOutcome::Stuck(cert) => {
            assert!(t > opt, "{label}: stuck at {t} <= opt {opt}");
            let report = check_dual(inst, t, &cert).unwrap();
            assert!(report.is_ok(), "{label}: {:?}", report.violations);
        }
    }
}

#[test]
fn approx_against_oracle() {
    for delta in [Value::one(), Value::from_integer(2)] {
        let mut cfg = ApproxConfig::new(&delta).unwrap();
        cfg.assert = AssertLevel::Full;
        let lambda = cfg.params.lambda.clone();
        for (i, inst) in suite(80).iter().enumerate() {
            let (opt, _) = brute_force_opt(inst).unwrap();
            let out = approx::solve(inst, &cfg).unwrap_or_else(|e| panic!("instance {i}: {e}"));
            assert!(out.allocation.is_valid(inst), "instance {i}");
            assert!(out.min_value >= &opt * &lambda, "instance {i}: {} vs opt {opt}", out.min_value);
            assert!(out.target >= opt, "instance {i}");
            if opt.is_zero() {
                continue;
            }
            for t in probe_targets(&opt) {
                let mut stats = Stats::default();
                let r = approx::solve_at_target(inst, &t, &cfg, &mut stats, &mut Vec::new())
                    .unwrap_or_else(|e| panic!("instance {i} at {t}: {e}"));
                check_probe(inst, &opt, &t, r, &format!("instance {i} at {t}"));
            }
        }
    }
}

#[test]
fn afs_against_oracle() {
    let cfg = AfsConfig {
        assert: AssertLevel::Full,
        ..AfsConfig::default()
    };
    for (i, inst) in suite(80).iter().enumerate() {
        let (opt, _) = brute_force_opt(inst).unwrap();
        let out = afs::solve(inst, &cfg).unwrap_or_else(|e| panic!("instance {i}: {e}"));
        assert!(out.allocation.is_valid(inst), "instance {i}");
        assert!(out.min_value >= &opt * &cfg.lambda, "instance {i}: {} vs opt {opt}", out.min_value);
        if opt.is_zero() {
            continue;
        }
        for t in probe_targets(&opt) {
            let mut stats = Stats::default();
            let r = afs::solve_at_target(inst, &t, &cfg, &mut stats, &mut Vec::new())
                .unwrap_or_else(|e| panic!("instance {i} at {t}: {e}"));
            check_probe(inst, &opt, &t, r, &format!("instance {i} at {t}"));
        }
    }
}
