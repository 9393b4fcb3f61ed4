//! Exact ground truth for small instances: the optimum by exhaustive search,
//! minimal configurations, dual checking, and disjoint paths by enumeration.
//!
//! Every function refuses inputs above its size limit instead of
//! approximating.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::dual::DualCertificate;
use crate::error::OracleError;
use crate::graphs::{FatGraph, Matching};
use crate::instance::{Allocation, Instance};
use crate::value::{common_denominator, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_players: usize,
    pub max_resources: usize,
    /// Desired resources per player for configuration enumeration.
    pub max_desired: usize,
    /// Players or resources per side for path enumeration.
    pub max_side: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_players: 6,
            max_resources: 14,
            max_desired: 20,
            max_side: 10,
        }
    }
}

fn too_big(what: &str, have: usize, limit: usize) -> OracleError {
    OracleError::SizeLimit(format!("{what} = {have} exceeds the limit {limit}"))
}

/// The optimum and a witness, with default limits.
pub fn brute_force_opt(inst: &Instance) -> Result<(Value, Allocation), OracleError> {
    brute_force_opt_with(inst, &Limits::default())
}

pub fn brute_force_opt_with(inst: &Instance, limits: &Limits) -> Result<(Value, Allocation), OracleError> {
    let (n, m) = (inst.n_players(), inst.n_resources());
    if n > limits.max_players {
        return Err(too_big("players", n, limits.max_players));
    }
    if m > limits.max_resources {
        return Err(too_big("resources", m, limits.max_resources));
    }
    let q = common_denominator(inst.values());
    let scaled: Vec<u128> = inst
        .values()
        .iter()
        .map(|v| (v.numer() * (&q / v.denom())).to_u128())
        .collect::<Option<_>>()
        .ok_or_else(|| OracleError::SizeLimit("scaled values do not fit in 128 bits".into()))?;
    let desired: Vec<u32> = (0..n)
        .map(|p| inst.desires(p).iter().fold(0u32, |acc, &r| acc | (1 << r)))
        .collect();

    let mut search = Search {
        values: &scaled,
        desired: &desired,
        memo: HashMap::new(),
    };
    let best = search.best(0, 0);

    let mut bundles = Vec::with_capacity(n);
    let mut used = 0u32;
    for p in 0..n {
        let (_, pick) = search.best_with_choice(p, used);
        bundles.push((0..m).filter(|&r| pick & (1 << r) != 0).collect());
        used |= pick;
    }
    let opt = Value::from_big(BigInt::from(best), q);
    Ok((opt, Allocation { bundles }))
}

struct Search<'a> {
    values: &'a [u128],
    desired: &'a [u32],
    memo: HashMap<(usize, u32), u128>,
}

impl Search<'_> {
    fn mask_value(&self, mask: u32) -> u128 {
        (0..self.values.len()).filter(|&r| mask & (1 << r) != 0).map(|r| self.values[r]).sum()
    }

    /// Best minimum over players `p..` given the resources in `used` are gone.
    fn best(&mut self, p: usize, used: u32) -> u128 {
        if p == self.desired.len() {
            return u128::MAX;
        }
        if let Some(&v) = self.memo.get(&(p, used)) {
            return v;
        }
        let v = self.best_with_choice(p, used).0;
        self.memo.insert((p, used), v);
        v
    }

    fn best_with_choice(&mut self, p: usize, used: u32) -> (u128, u32) {
        let avail = self.desired[p] & !used;
        if p + 1 == self.desired.len() {
            return (self.mask_value(avail), avail);
        }
        let mut best = (0u128, 0u32);
        let mut first = true;
        // Enumerate subsets of `avail`, largest first.
        let mut s = avail;
        loop {
            let mine = self.mask_value(s);
            if first || mine > best.0 {
                let rest = self.best(p + 1, used | s);
                let v = mine.min(rest);
                if first || v > best.0 {
                    best = (v, s);
                    first = false;
                }
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & avail;
        }
        best
    }
}

/// Inclusion-minimal subsets of `p`'s desired resources worth at least
/// `target`, with default limits. A non-positive target gives only `∅`.
pub fn enumerate_configs(inst: &Instance, p: usize, target: &Value) -> Result<Vec<Vec<usize>>, OracleError> {
    enumerate_configs_with(inst, p, target, &Limits::default())
}

pub fn enumerate_configs_with(
    inst: &Instance,
    p: usize,
    target: &Value,
    limits: &Limits,
) -> Result<Vec<Vec<usize>>, OracleError> {
    let d = inst.desires(p);
    if d.len() > limits.max_desired {
        return Err(too_big("desired resources", d.len(), limits.max_desired));
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << d.len()) {
        let set: Vec<usize> = (0..d.len()).filter(|&i| mask & (1 << i) != 0).map(|i| d[i]).collect();
        let total = inst.value_of(&set);
        if &total < target {
            continue;
        }
        if set.iter().all(|&r| &(&total - inst.value(r)) < target) {
            out.push(set);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DualViolation {
    Shape { expected_players: usize, expected_resources: usize },
    NegativeY { player: usize },
    NegativeZ { resource: usize },
    Constraint { player: usize, config: Vec<usize>, y: Value, z_sum: Value },
    ObjectiveMismatch { stated: Value, computed: Value },
    NonPositiveObjective { objective: Value },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualReport {
    pub target: Value,
    pub objective: Value,
    pub configs_checked: usize,
    pub violations: Vec<DualViolation>,
}

impl DualReport {
    /// A passing report certifies that no fractional assignment reaches the
    /// target.
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `cert` at `target` against every minimal configuration. Only
/// enumeration beyond the size limit is an error; everything else is
/// reported.
pub fn check_dual(inst: &Instance, target: &Value, cert: &DualCertificate) -> Result<DualReport, OracleError> {
    check_dual_with(inst, target, cert, &Limits::default())
}

pub fn check_dual_with(
    inst: &Instance,
    target: &Value,
    cert: &DualCertificate,
    limits: &Limits,
) -> Result<DualReport, OracleError> {
    let (n, m) = (inst.n_players(), inst.n_resources());
    let computed = cert.computed_objective();
    let mut report = DualReport {
        target: target.clone(),
        objective: computed.clone(),
        configs_checked: 0,
        violations: Vec::new(),
    };
    if cert.y.len() != n || cert.z.len() != m {
        report.violations.push(DualViolation::Shape {
            expected_players: n,
            expected_resources: m,
        });
        return Ok(report);
    }
    for (p, y) in cert.y.iter().enumerate() {
        if y.is_negative() {
            report.violations.push(DualViolation::NegativeY { player: p });
        }
    }
    for (r, z) in cert.z.iter().enumerate() {
        if z.is_negative() {
            report.violations.push(DualViolation::NegativeZ { resource: r });
        }
    }
    for p in 0..n {
        for config in enumerate_configs_with(inst, p, target, limits)? {
            report.configs_checked += 1;
            let z_sum: Value = config.iter().map(|&r| &cert.z[r]).sum();
            if cert.y[p] > z_sum {
                report.violations.push(DualViolation::Constraint {
                    player: p,
                    config,
                    y: cert.y[p].clone(),
                    z_sum,
                });
            }
        }
    }
    if cert.objective != computed {
        report.violations.push(DualViolation::ObjectiveMismatch {
            stated: cert.objective.clone(),
            computed: computed.clone(),
        });
    }
    if !computed.is_positive() {
        report.violations.push(DualViolation::NonPositiveObjective { objective: computed });
    }
    Ok(report)
}

/// Maximum number of node-disjoint `sources`→`targets` paths in `G_M` by
/// listing every simple path and searching over families.
pub fn brute_force_paths(
    g: &FatGraph,
    m: &Matching,
    sources: &[usize],
    targets: &[usize],
) -> Result<usize, OracleError> {
    let limit = Limits::default().max_side;
    if g.n_players() > limit {
        return Err(too_big("players", g.n_players(), limit));
    }
    if g.n_resources() > limit {
        return Err(too_big("resources", g.n_resources(), limit));
    }
    let mut is_target = vec![false; g.n_players()];
    for &t in targets {
        is_target[t] = true;
    }
    // Each path is stored as (player mask, resource mask).
    let mut paths: Vec<(u32, u32)> = Vec::new();
    let mut starts = sources.to_vec();
    starts.sort_unstable();
    starts.dedup();
    for &s in &starts {
        walk(g, m, &is_target, s, 1 << s, 0, &mut paths);
    }
    paths.sort_unstable();
    paths.dedup();
    Ok(max_disjoint(&paths, 0, 0, 0))
}

fn walk(
    g: &FatGraph,
    m: &Matching,
    is_target: &[bool],
    at: usize,
    players: u32,
    resources: u32,
    out: &mut Vec<(u32, u32)>,
) {
    if is_target[at] {
        out.push((players, resources));
    }
    for &r in g.neighbors(at) {
        if m.contains(at, r) || resources & (1 << r) != 0 {
            continue;
        }
        if let Some(q) = m.player_of(r) {
            if players & (1 << q) == 0 {
                walk(g, m, is_target, q, players | (1 << q), resources | (1 << r), out);
            }
        }
    }
}

fn max_disjoint(paths: &[(u32, u32)], from: usize, players: u32, resources: u32) -> usize {
    let mut best = 0;
    for i in from..paths.len() {
        let (pp, rr) = paths[i];
        if pp & players == 0 && rr & resources == 0 {
            best = best.max(1 + max_disjoint(paths, i + 1, players | pp, resources | rr));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::max_matching;
    use crate::instance::min_value;

    fn ex1() -> Instance {
        let tenth = Value::ratio(1, 10);
        Instance::new(
            vec![Value::one(), tenth.clone(), tenth.clone(), tenth],
            vec![vec![0], vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn ex1_optimum() {
        let inst = ex1();
        let (opt, alloc) = brute_force_opt(&inst).unwrap();
        assert_eq!(opt, Value::ratio(3, 10));
        assert_eq!(alloc.bundles, vec![vec![0], vec![1, 2, 3]]);
        assert_eq!(min_value(&inst, &alloc), opt);
    }

    #[test]
    fn single_player_gets_everything() {
        let inst = Instance::new(vec![Value::ratio(1, 3), Value::ratio(1, 6)], vec![vec![0, 1]]).unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().0, Value::ratio(1, 2));
    }

    #[test]
    fn player_desiring_nothing() {
        let inst = Instance::new(vec![Value::one()], vec![vec![0], vec![]]).unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().0, Value::zero());
    }

    #[test]
    fn size_limit_is_an_error() {
        let inst = Instance::new(vec![Value::one(); 15], vec![(0..15).collect()]).unwrap();
        assert!(matches!(brute_force_opt(&inst), Err(OracleError::SizeLimit(_))));
    }

    #[test]
    fn configs() {
        let inst = ex1();
        assert_eq!(enumerate_configs(&inst, 1, &Value::zero()).unwrap(), vec![Vec::<usize>::new()]);
        assert_eq!(enumerate_configs(&inst, 0, &Value::one()).unwrap(), vec![vec![0]]);
        assert_eq!(
            enumerate_configs(&inst, 1, &Value::ratio(1, 4)).unwrap(),
            vec![vec![0], vec![1, 2, 3]]
        );
    }

    #[test]
    fn zero_dual_fails_positivity() {
        let inst = ex1();
        let cert = DualCertificate::new(Value::one(), vec![Value::zero(); 2], vec![Value::zero(); 4]);
        let report = check_dual(&inst, &Value::one(), &cert).unwrap();
        assert!(!report.is_ok());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, DualViolation::NonPositiveObjective { .. })));
    }

    #[test]
    fn valid_dual_for_infeasible_target() {
        // Two players want the single resource.
        let inst = Instance::new(vec![Value::one()], vec![vec![0], vec![0]]).unwrap();
        let cert = DualCertificate::new(Value::one(), vec![Value::one(); 2], vec![Value::one()]);
        assert!(check_dual(&inst, &Value::one(), &cert).unwrap().is_ok());
    }

    #[test]
    fn paths_match_small_cases() {
        let g = FatGraph::new(2, 2, [(0, 0), (1, 0), (1, 1)]);
        let m = max_matching(&g);
        // Player 0 holds resource 0; player 1 holds resource 1.
        assert_eq!(brute_force_paths(&g, &m, &[], &[0]).unwrap(), 0);
        let empty = Matching::empty(2, 2);
        assert_eq!(brute_force_paths(&g, &empty, &[0, 1], &[0, 1]).unwrap(), 2);
        let one = Matching::from_pairs(2, 2, [(0, 0)]).unwrap();
        assert_eq!(brute_force_paths(&g, &one, &[1], &[0]).unwrap(), 1);
        assert_eq!(brute_force_paths(&g, &one, &[1], &[1]).unwrap(), 1);
    }
}
