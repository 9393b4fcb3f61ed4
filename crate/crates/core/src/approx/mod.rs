//! The layered local search with a `4 + δ` guarantee.
//!
//! Each uncovered player is handled by a stack of layers. A layer holds
//! addable thin edges that are blocked by thin edges already in the solution,
//! and the set of blockers. Building pushes a new layer; collapsing uses
//! unblocked edges reachable through node-disjoint alternating paths to
//! release blockers in the lowest layer where enough of them can be released.
//! If building produces too few addable edges while nothing can collapse, the
//! target is infeasible and a dual certificate is emitted.

mod checks;
mod state;

use std::time::Instant;

use crate::alloc::{classify, finalize, PartialAllocation};
use crate::error::SolveError;
use crate::instance::Instance;
use crate::search::{bisect_targets, finish_outcome, AssertLevel, SignatureTrace, SolveOutcome, TargetOutcome};
use crate::stats::Stats;
use crate::value::Value;

pub use state::signature;

/// Constants of one run. `β = γ²` and `μ = γ³` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverParams {
    pub delta: Value,
    pub lambda: Value,
    pub gamma: Value,
    pub beta: Value,
    pub mu: Value,
}

/// `(1 − 3γ³) / (4 + 10γ + 4γ² + 3γ³ − γ⁴)`. The certificate argument needs
/// this to exceed `λ`.
pub fn ratio_bound(gamma: &Value) -> Value {
    let g2 = gamma * gamma;
    let g3 = &g2 * gamma;
    let g4 = &g3 * gamma;
    let num = Value::one() - Value::from_integer(3) * &g3;
    let den = Value::from_integer(4) + Value::from_integer(10) * gamma + Value::from_integer(4) * &g2
        + Value::from_integer(3) * &g3
        - g4;
    num / den
}

/// Largest `γ = 1/2^k` (`2 ≤ k ≤ 64`, so `γ ≤ 1/4`) with
/// `ratio_bound(γ) > 1/(4+δ)`.
pub fn choose_gamma(delta: &Value) -> Result<SolverParams, SolveError> {
    if !delta.is_positive() {
        return Err(SolveError::Precondition(format!("delta must be positive, got {delta}")));
    }
    let lambda = (Value::from_integer(4) + delta).recip();
    let half = Value::ratio(1, 2);
    let mut gamma = Value::ratio(1, 4);
    for _ in 2..=64 {
        if ratio_bound(&gamma) > lambda {
            let beta = &gamma * &gamma;
            let mu = &beta * &gamma;
            return Ok(SolverParams {
                delta: delta.clone(),
                lambda,
                gamma,
                beta,
                mu,
            });
        }
        gamma = gamma * &half;
    }
    Err(SolveError::Precondition(format!(
        "no gamma down to 2^-64 satisfies the ratio condition for delta = {delta}"
    )))
}

#[derive(Debug, Clone)]
pub struct ApproxConfig {
    pub params: SolverParams,
    pub assert: AssertLevel,
    pub probes: usize,
    /// Overrides the default cap of `max(10000, 1000·n²)` steps per player.
    pub iteration_cap: Option<u64>,
    pub timing: bool,
}

impl ApproxConfig {
    pub fn new(delta: &Value) -> Result<Self, SolveError> {
        Ok(ApproxConfig {
            params: choose_gamma(delta)?,
            assert: AssertLevel::Off,
            probes: 64,
            iteration_cap: None,
            timing: false,
        })
    }
}

pub(crate) fn default_cap(n_players: usize) -> u64 {
    let n = n_players as u64;
    10_000u64.max(1000 * n * n)
}

/// Runs the layered search at a single target `T`: values are divided by `T`
/// and every player must reach `λ`.
pub fn solve_at_target(
    inst: &Instance,
    target: &Value,
    cfg: &ApproxConfig,
    stats: &mut Stats,
    traces: &mut Vec<SignatureTrace>,
) -> Result<TargetOutcome, SolveError> {
    if !target.is_positive() {
        return Err(SolveError::Precondition(format!("target must be positive, got {target}")));
    }
    let scaled = inst.scaled(&target.recip());
    let lambda = &cfg.params.lambda;
    let class = classify(&scaled, lambda);
    let mut pa = PartialAllocation::new(&scaled, &class);
    let cap = cfg.iteration_cap.unwrap_or_else(|| default_cap(inst.n_players()));
    for p0 in 0..inst.n_players() {
        if pa.is_covered(p0) {
            continue;
        }
        let before = pa.covered_count();
        let mut cover = state::Cover::new(&scaled, &cfg.params, &class, &mut pa, p0, cfg.assert, cap);
        let result = cover.run(stats, target);
        traces.push(SignatureTrace::Layers(std::mem::take(&mut cover.signatures)));
        match result? {
            state::Finish::Covered => {}
            state::Finish::Stuck(cert) => return Ok(TargetOutcome::Stuck(cert)),
        }
        if !pa.is_covered(p0) || pa.covered_count() != before + 1 {
            return Err(SolveError::Invariant(format!(
                "cover run for player {p0} changed coverage from {before} to {}",
                pa.covered_count()
            )));
        }
    }
    let alloc = finalize(&pa, &scaled, lambda).map_err(|e| SolveError::Invariant(e.to_string()))?;
    Ok(TargetOutcome::Covered(alloc))
}

/// Bisects over targets and returns the allocation for the largest accepted
/// one. Its minimum value is at least `λ` times that target.
pub fn solve(inst: &Instance, cfg: &ApproxConfig) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    let mut stats = Stats::new("approx", &["build", "collapse"]);
    let mut traces = Vec::new();
    let search = bisect_targets(inst, cfg.probes, |t| {
        solve_at_target(inst, t, cfg, &mut stats, &mut traces)
    })?;
    if cfg.timing {
        stats.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(finish_outcome(inst, search, stats, traces))
}
