//! Bisection over targets and the result types shared by both solvers.
//!
//! Optimal values are sums of resource values, so they lie on the grid
//! `k/Q` where `Q` is the least common multiple of the value denominators.
//! Bisecting over that grid rather than over real targets means the search
//! closes exactly: once the bracket has width one step, every rejected target
//! exceeds the optimum, and so the accepted one is at least the optimum.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dual::DualCertificate;
use crate::error::SolveError;
use crate::instance::{min_value, Allocation, Instance};
use crate::stats::Stats;
use crate::value::{common_denominator, Value};

/// How much of the invariant suite runs during a solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertLevel {
    #[default]
    Off,
    /// Every [`SAMPLE_EVERY`]-th phase transition.
    Sampled,
    Full,
}

pub const SAMPLE_EVERY: u64 = 16;

impl AssertLevel {
    pub fn should_check(self, transition: u64) -> bool {
        match self {
            AssertLevel::Off => false,
            AssertLevel::Sampled => transition % SAMPLE_EVERY == 0,
            AssertLevel::Full => true,
        }
    }
}

impl FromStr for AssertLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(AssertLevel::Off),
            "sampled" => Ok(AssertLevel::Sampled),
            "full" => Ok(AssertLevel::Full),
            other => Err(format!("unknown assertion level {other:?} (expected off, sampled or full)")),
        }
    }
}

impl fmt::Display for AssertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssertLevel::Off => "off",
            AssertLevel::Sampled => "sampled",
            AssertLevel::Full => "full",
        })
    }
}

/// Result of running a solver at one target.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetOutcome {
    /// Every player received at least `λ·target`.
    Covered(Allocation),
    /// The solver got stuck; the certificate witnesses infeasibility.
    Stuck(DualCertificate),
}

/// Signature vectors recorded during one player's cover run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SignatureTrace {
    /// Real-valued layer signatures; the last coordinate is `+∞`.
    Layers(Vec<Vec<f64>>),
    /// Blocker counts per stack tuple; the last coordinate is `u64::MAX`.
    Counts(Vec<Vec<u64>>),
}

impl SignatureTrace {
    pub fn len(&self) -> usize {
        match self {
            SignatureTrace::Layers(v) => v.len(),
            SignatureTrace::Counts(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub target: Value,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DualCertificate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    /// Largest accepted target (zero if none was accepted).
    pub target: Value,
    pub allocation: Allocation,
    pub min_value: Value,
    pub stats: Stats,
    pub probes: Vec<ProbeRecord>,
    pub traces: Vec<SignatureTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub target: Value,
    pub allocation: Allocation,
    pub probes: Vec<ProbeRecord>,
}

/// Grid step denominator and the largest sensible target: no player can get
/// more than the total of what it desires.
pub fn target_grid(inst: &Instance) -> (BigInt, Value) {
    let q = common_denominator(inst.values());
    let upper = (0..inst.n_players())
        .map(|p| inst.desired_total(p))
        .min()
        .unwrap_or_else(Value::zero);
    (q, upper)
}

/// Gives every resource to its lowest-id desirer. Used when no target is
/// accepted, which happens only when the optimum is zero.
pub fn fallback_allocation(inst: &Instance) -> Allocation {
    let mut bundles = vec![Vec::new(); inst.n_players()];
    for r in 0..inst.n_resources() {
        if let Some(&p) = inst.desired_by(r).first() {
            bundles[p].push(r);
        }
    }
    Allocation { bundles }
}

/// Bisects over grid targets, calling `probe` at most `max_probes` times.
/// The top of the grid is probed first since easy instances accept it.
pub fn bisect_targets(
    inst: &Instance,
    max_probes: usize,
    mut probe: impl FnMut(&Value) -> Result<TargetOutcome, SolveError>,
) -> Result<SearchResult, SolveError> {
    if max_probes == 0 {
        return Err(SolveError::Precondition("probe budget must be at least 1".into()));
    }
    let (q, upper) = target_grid(inst);
    let qv = Value::from(q.clone());
    let top: BigInt = (&upper * &qv).floor_int();
    let mut best: Option<(Value, Allocation)> = None;
    let mut records = Vec::new();
    if top.is_zero() {
        return Ok(SearchResult {
            target: Value::zero(),
            allocation: fallback_allocation(inst),
            probes: records,
        });
    }

    let mut lo = BigInt::zero();
    let mut hi = &top + BigInt::one();
    let mut next = top.clone();
    while records.len() < max_probes && &hi - &lo > BigInt::one() {
        let t = Value::from(next.clone()) / &qv;
        match probe(&t)? {
            TargetOutcome::Covered(alloc) => {
                records.push(ProbeRecord {
                    target: t.clone(),
                    accepted: true,
                    certificate: None,
                });
                lo = next;
                best = Some((t, alloc));
            }
            TargetOutcome::Stuck(cert) => {
                records.push(ProbeRecord {
                    target: t,
                    accepted: false,
                    certificate: Some(cert),
                });
                hi = next;
            }
        }
        next = (&lo + &hi) / 2;
    }
    let (target, allocation) = best.unwrap_or_else(|| (Value::zero(), fallback_allocation(inst)));
    Ok(SearchResult {
        target,
        allocation,
        probes: records,
    })
}

/// Assembles the final outcome and fills the search-level counters.
pub fn finish_outcome(
    inst: &Instance,
    search: SearchResult,
    mut stats: Stats,
    traces: Vec<SignatureTrace>,
) -> SolveOutcome {
    stats.probes = search.probes.len();
    stats.certificates_emitted = search.probes.iter().filter(|p| p.certificate.is_some()).count();
    stats.accepted_target = Some(search.target.clone());
    stats.signature_trace_len = traces.iter().map(SignatureTrace::len).sum();
    let mv = min_value(inst, &search.allocation);
    SolveOutcome {
        target: search.target,
        min_value: mv,
        allocation: search.allocation,
        stats,
        probes: search.probes,
        traces,
    }
}
