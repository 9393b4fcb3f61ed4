//! The alternating-tree local search with threshold `26/99`.
//!
//! A stack of tuples `(a_i, B_i)` is grown one addable edge at a time; `B_i`
//! are the solution edges blocking `a_i`. As soon as some `a_i` is
//! unblocked, the lowest tuple whose blockers reach it in `G_M` is contracted:
//! the alternating path is flipped, the edge enters the solution and one
//! blocker is released. There is no known polynomial bound on the number of
//! steps.

use std::time::Instant;

use crate::alloc::{check_partial, classify, finalize, greedy_edge, PartialAllocation, ResourceClass, ThinEdge};
use crate::dual::DualCertificate;
use crate::error::SolveError;
use crate::graphs::{find_path, flip, FatGraph, PathSet, Reach};
use crate::instance::Instance;
use crate::search::{bisect_targets, finish_outcome, AssertLevel, SignatureTrace, SolveOutcome, TargetOutcome};
use crate::stats::Stats;
use crate::value::Value;

/// The threshold for which the certificate argument goes through.
pub fn default_lambda() -> Value {
    Value::ratio(26, 99)
}

#[derive(Debug, Clone)]
pub struct AfsConfig {
    /// Fraction of the target every player must receive. Values above
    /// `26/99` are accepted for experiments; stuck probes are then reported
    /// like any other but their certificates carry no guarantee.
    pub lambda: Value,
    pub assert: AssertLevel,
    pub probes: usize,
    pub iteration_cap: Option<u64>,
    pub timing: bool,
}

impl Default for AfsConfig {
    fn default() -> Self {
        AfsConfig {
            lambda: default_lambda(),
            assert: AssertLevel::Off,
            probes: 64,
            iteration_cap: None,
            timing: false,
        }
    }
}

/// Dual value of a stacked thin resource of value `v`.
pub fn afs_z(v: &Value, lambda: &Value) -> Value {
    let three_l = Value::from_integer(3) * lambda;
    if !v.is_positive() || v >= lambda {
        Value::zero()
    } else if v < &(lambda * Value::ratio(1, 2)) {
        &three_l * v / (Value::from_integer(2) * lambda + v)
    } else if v < &(lambda * Value::ratio(3, 4)) {
        &three_l * v / (&three_l - v)
    } else {
        lambda.clone()
    }
}

#[derive(Debug, Clone)]
struct Tuple {
    a: Option<ThinEdge>,
    b: Vec<ThinEdge>,
}

enum Finish {
    Covered,
    Stuck(DualCertificate),
}

struct Cover<'a> {
    inst: &'a Instance,
    class: &'a ResourceClass,
    pa: &'a mut PartialAllocation,
    graph: FatGraph,
    lambda: Value,
    p0: usize,
    stack: Vec<Tuple>,
    signatures: Vec<Vec<u64>>,
    level: AssertLevel,
    cap: u64,
    steps: u64,
}

impl Cover<'_> {
    fn b_players(&self, k: usize) -> Vec<usize> {
        self.stack[..k].iter().flat_map(|t| t.b.iter().map(|e| e.player)).collect()
    }

    /// `R(Σ)`: thin resources of every stacked edge.
    fn stacked(&self) -> Vec<bool> {
        let mut mask = vec![false; self.inst.n_resources()];
        for t in &self.stack {
            for e in t.a.iter().chain(&t.b) {
                for &r in &e.resources {
                    mask[r] = true;
                }
            }
        }
        mask
    }

    fn run(&mut self, stats: &mut Stats, target: &Value) -> Result<Finish, SolveError> {
        self.record_signature()?;
        loop {
            while let Some(star) = (1..self.stack.len()).find(|&i| self.stack[i].b.is_empty()) {
                self.tick()?;
                let done = self.contract(star)?;
                stats.bump("contract");
                if done {
                    return Ok(Finish::Covered);
                }
                self.maybe_check(stats)?;
                self.record_signature()?;
            }
            self.tick()?;
            if !self.build()? {
                return Ok(Finish::Stuck(self.certificate(target)?));
            }
            stats.bump("build");
            stats.note_depth(self.stack.len());
            self.maybe_check(stats)?;
            self.record_signature()?;
        }
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps > self.cap {
            return Err(SolveError::IterationCap(self.cap));
        }
        Ok(())
    }

    fn maybe_check(&self, stats: &mut Stats) -> Result<(), SolveError> {
        if self.level.should_check(self.steps) {
            self.check()?;
            stats.invariant_checks += 1;
        }
        Ok(())
    }

    fn record_signature(&mut self) -> Result<(), SolveError> {
        let mut sig: Vec<u64> = self.stack.iter().map(|t| t.b.len() as u64).collect();
        sig.push(u64::MAX);
        if let Some(prev) = self.signatures.last() {
            if sig >= *prev {
                return Err(SolveError::Invariant(format!("signature did not decrease: {prev:?} -> {sig:?}")));
            }
        }
        self.signatures.push(sig);
        Ok(())
    }

    /// Pushes an addable edge of the smallest-id addable player that has one.
    /// Returns false if there is none.
    fn build(&mut self) -> Result<bool, SolveError> {
        let reach = Reach::from_sources(&self.graph, self.pa.matching(), &self.b_players(self.stack.len()));
        let stacked = self.stacked();
        for p in 0..self.inst.n_players() {
            if !reach.players[p] {
                continue;
            }
            let cands: Vec<usize> = self
                .inst
                .desires(p)
                .iter()
                .copied()
                .filter(|&r| self.class.is_thin(r) && !stacked[r])
                .collect();
            let Some(e) = greedy_edge(self.inst, p, &cands, &self.lambda) else {
                continue;
            };
            let mut owners: Vec<usize> = e.resources.iter().filter_map(|&r| self.pa.owner_of(r)).collect();
            owners.sort_unstable();
            owners.dedup();
            let b = owners
                .into_iter()
                .map(|q| self.pa.edge_of(q).expect("owner has an edge").clone())
                .collect();
            self.stack.push(Tuple { a: Some(e), b });
            return Ok(true);
        }
        Ok(false)
    }

    /// Contracts the unblocked edge at index `star`. Returns whether `p0` is
    /// now covered.
    fn contract(&mut self, star: usize) -> Result<bool, SolveError> {
        let a = self.stack[star].a.clone().expect("only the root tuple has no edge");
        let q = a.player;
        let found = (0..star).find_map(|t| {
            let mut sources: Vec<usize> = self.stack[t].b.iter().map(|e| e.player).collect();
            sources.sort_unstable();
            find_path(&self.graph, self.pa.matching(), &sources, |x| x == q).map(|path| (t, path))
        });
        let Some((t, path)) = found else {
            return Err(SolveError::Invariant(format!(
                "no stacked blocker below index {} reaches player {q}",
                star + 1
            )));
        };
        self.stack.truncate(t + 1);
        let released = path.source();
        let flipped = flip(self.pa.matching(), &PathSet::new(vec![path]));
        self.pa.set_matching(flipped);
        if t > 0 {
            self.pa.remove_edge(released);
            self.stack[t].b.retain(|e| e.player != released);
        }
        if self.pa.is_covered(q) {
            return Err(SolveError::Invariant(format!("player {q} would be covered twice")));
        }
        self.pa.insert_edge(a);
        Ok(t == 0)
    }

    fn certificate(&self, target: &Value) -> Result<DualCertificate, SolveError> {
        let reach = Reach::from_sources(&self.graph, self.pa.matching(), &self.b_players(self.stack.len()));
        let stacked = self.stacked();
        let c = Value::one() - Value::ratio(21, 26) * &self.lambda;
        let y = reach
            .players
            .iter()
            .map(|&on| if on { c.clone() } else { Value::zero() })
            .collect();
        let z: Vec<Value> = (0..self.inst.n_resources())
            .map(|r| {
                if self.class.is_fat(r) {
                    if reach.resources[r] {
                        c.clone()
                    } else {
                        Value::zero()
                    }
                } else if stacked[r] {
                    afs_z(self.inst.value(r), &self.lambda)
                } else {
                    Value::zero()
                }
            })
            .collect();
        if self.level != AssertLevel::Off {
            self.check_edge_bounds(&z)?;
        }
        let cert = DualCertificate::new(target.clone(), y, z);
        if self.lambda == default_lambda() && cert.objective < Value::from_integer(3) * &self.lambda {
            return Err(SolveError::Invariant(format!(
                "stuck at target {target} with dual objective {} below 3λ",
                cert.objective
            )));
        }
        Ok(cert)
    }

    /// Every stacked edge `e` with least-valued resource `r0` has
    /// `Σ z ≤ 3λ/2 + z_{r0}/2`.
    fn check_edge_bounds(&self, z: &[Value]) -> Result<(), SolveError> {
        let half = Value::ratio(1, 2);
        let cap = Value::ratio(3, 2) * &self.lambda;
        for e in self.stack.iter().flat_map(|t| t.a.iter().chain(&t.b)) {
            let Some(&r0) = e.resources.iter().min_by(|&&x, &&y| self.inst.value(x).cmp(self.inst.value(y))) else {
                continue;
            };
            let sum: Value = e.resources.iter().map(|&r| &z[r]).sum();
            if sum > &cap + &half * &z[r0] {
                return Err(SolveError::Invariant(format!("edge of player {} has dual weight {sum}", e.player)));
            }
        }
        Ok(())
    }

    fn check(&self) -> Result<(), SolveError> {
        let fail = |msg: String| Err(SolveError::Invariant(msg));
        let report = check_partial(self.pa, self.inst, &self.lambda);
        if let Some(v) = report.violations.first() {
            return fail(format!("partial allocation: {v}"));
        }
        if self.stack[0].a.is_some() || self.stack[0].b != [ThinEdge::new(self.p0, Vec::new())] {
            return fail("first tuple is not the root".into());
        }
        let two_l = Value::from_integer(2) * &self.lambda;
        let mut seen = vec![false; self.inst.n_players()];
        let mut total_b = 0;
        let mut used = vec![false; self.inst.n_resources()];
        for (i, t) in self.stack.iter().enumerate().skip(1) {
            let a = t.a.as_ref().expect("tuple above the root has an edge");
            let reach = Reach::from_sources(&self.graph, self.pa.matching(), &self.b_players(i));
            if !reach.players[a.player] {
                return fail(format!("edge {} of player {} is unreachable from lower blockers", i + 1, a.player));
            }
            for &r in &a.resources {
                if used[r] {
                    return fail(format!("resource {r} is in two stacked edges"));
                }
                used[r] = true;
            }
            for e in std::iter::once(a).chain(&t.b) {
                if !e.is_minimal(self.inst, &self.lambda) || e.value(self.inst) >= two_l {
                    return fail(format!("stacked edge of player {} is not λ-minimal below 2λ", e.player));
                }
            }
            for b in &t.b {
                if self.pa.edge_of(b.player) != Some(b) {
                    return fail(format!("blocker of player {} is not in E", b.player));
                }
                if seen[b.player] {
                    return fail(format!("player {} blocks in two tuples", b.player));
                }
                seen[b.player] = true;
                if !b.shares_resource(a) {
                    return fail(format!("blocker of player {} does not block edge {}", b.player, i + 1));
                }
            }
            total_b += t.b.len();
        }
        if total_b > self.inst.n_players() {
            return fail(format!("{total_b} blockers for {} players", self.inst.n_players()));
        }
        Ok(())
    }
}

/// Runs the local search at a single target.
pub fn solve_at_target(
    inst: &Instance,
    target: &Value,
    cfg: &AfsConfig,
    stats: &mut Stats,
    traces: &mut Vec<SignatureTrace>,
) -> Result<TargetOutcome, SolveError> {
    if !target.is_positive() {
        return Err(SolveError::Precondition(format!("target must be positive, got {target}")));
    }
    if !cfg.lambda.is_positive() {
        return Err(SolveError::Precondition(format!("lambda must be positive, got {}", cfg.lambda)));
    }
    let scaled = inst.scaled(&target.recip());
    let class = classify(&scaled, &cfg.lambda);
    let mut pa = PartialAllocation::new(&scaled, &class);
    let cap = cfg
        .iteration_cap
        .unwrap_or_else(|| crate::approx::default_cap(inst.n_players()));
    for p0 in 0..inst.n_players() {
        if pa.is_covered(p0) {
            continue;
        }
        let graph = pa.graph().clone();
        let mut cover = Cover {
            inst: &scaled,
            class: &class,
            pa: &mut pa,
            graph,
            lambda: cfg.lambda.clone(),
            p0,
            stack: vec![Tuple {
                a: None,
                b: vec![ThinEdge::new(p0, Vec::new())],
            }],
            signatures: Vec::new(),
            level: cfg.assert,
            cap,
            steps: 0,
        };
        let result = cover.run(stats, target);
        traces.push(SignatureTrace::Counts(std::mem::take(&mut cover.signatures)));
        if let Finish::Stuck(cert) = result? {
            return Ok(TargetOutcome::Stuck(cert));
        }
    }
    let alloc = finalize(&pa, &scaled, &cfg.lambda).map_err(|e| SolveError::Invariant(e.to_string()))?;
    Ok(TargetOutcome::Covered(alloc))
}

pub fn solve(inst: &Instance, cfg: &AfsConfig) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    let mut stats = Stats::new("afs", &["build", "contract"]);
    let mut traces = Vec::new();
    let search = bisect_targets(inst, cfg.probes, |t| solve_at_target(inst, t, cfg, &mut stats, &mut traces))?;
    if cfg.timing {
        stats.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(finish_outcome(inst, search, stats, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::min_value;

    #[test]
    fn z_curve_anchors() {
        let l = default_lambda();
        assert_eq!(afs_z(&(&l * Value::ratio(1, 2)), &l), &l * Value::ratio(3, 5));
        assert_eq!(afs_z(&(&l * Value::ratio(3, 4)), &l), l);
        assert_eq!(afs_z(&l, &l), Value::zero());
        assert_eq!(afs_z(&Value::zero(), &l), Value::zero());
        let tiny = &l * Value::ratio(1, 1000);
        let ratio = afs_z(&tiny, &l) / &tiny;
        assert!(ratio > Value::ratio(149, 100) && ratio < Value::ratio(3, 2));
    }

    #[test]
    fn z_curve_monotone() {
        let l = default_lambda();
        let mut prev = Value::zero();
        for k in 1..400 {
            let z = afs_z(&(&l * Value::ratio(k, 400)), &l);
            assert!(z >= prev, "k = {k}");
            prev = z;
        }
    }

    #[test]
    fn ex1_meets_bound() {
        let tenth = Value::ratio(1, 10);
        let inst = Instance::new(
            vec![Value::one(), tenth.clone(), tenth.clone(), tenth],
            vec![vec![0], vec![0, 1, 2, 3]],
        )
        .unwrap();
        let cfg = AfsConfig {
            assert: AssertLevel::Full,
            ..AfsConfig::default()
        };
        let out = solve(&inst, &cfg).unwrap();
        assert!(out.allocation.is_valid(&inst));
        assert!(min_value(&inst, &out.allocation) >= Value::ratio(26, 99) * Value::ratio(3, 10));
    }

    #[test]
    fn all_fat_has_no_stack_activity() {
        let inst = Instance::new(vec![Value::from_integer(5); 3], vec![vec![0, 1], vec![1, 2], vec![0]]).unwrap();
        let out = solve(&inst, &AfsConfig::default()).unwrap();
        assert_eq!(out.stats.phase("build"), 0);
        assert_eq!(out.stats.phase("contract"), 0);
        assert_eq!(out.min_value, Value::from_integer(5));
    }

    #[test]
    fn free_thin_edge_contracts_immediately() {
        // Player 1 must take the thin resources; nothing blocks them.
        let inst = Instance::new(
            vec![Value::one(), Value::ratio(1, 5), Value::ratio(1, 5)],
            vec![vec![0], vec![1, 2]],
        )
        .unwrap();
        let mut stats = Stats::new("afs", &["build", "contract"]);
        let mut traces = Vec::new();
        let cfg = AfsConfig::default();
        let out = solve_at_target(&inst, &Value::one(), &cfg, &mut stats, &mut traces).unwrap();
        assert!(matches!(out, TargetOutcome::Covered(_)));
        assert_eq!(stats.phase("build"), 1);
        assert_eq!(stats.phase("contract"), 1);
        assert_eq!(traces[0], SignatureTrace::Counts(vec![vec![1, u64::MAX], vec![1, 0, u64::MAX]]));
    }
}
