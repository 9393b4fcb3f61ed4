use std::collections::BTreeMap;

use serde::Serialize;

use crate::value::Value;

/// Counters collected over one solve. Everything except `wall_time_ms` is a
/// deterministic function of the input.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stats {
    pub solver: String,
    /// Phase name to number of times it ran, summed over all probes.
    pub phases: BTreeMap<String, u64>,
    pub max_stack_depth: usize,
    pub signature_trace_len: usize,
    pub certificates_emitted: usize,
    pub probes: usize,
    pub accepted_target: Option<Value>,
    /// Canonical decompositions re-derived from scratch under full assertions.
    pub decompositions_verified: usize,
    /// Phase transitions at which the invariant suite ran.
    pub invariant_checks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Stats {
    pub fn new(solver: &str, phases: &[&str]) -> Self {
        Stats {
            solver: solver.to_string(),
            phases: phases.iter().map(|p| (p.to_string(), 0)).collect(),
            ..Stats::default()
        }
    }

    pub fn bump(&mut self, phase: &str) {
        *self.phases.entry(phase.to_string()).or_insert(0) += 1;
    }

    pub fn phase(&self, phase: &str) -> u64 {
        self.phases.get(phase).copied().unwrap_or(0)
    }

    pub fn note_depth(&mut self, depth: usize) {
        self.max_stack_depth = self.max_stack_depth.max(depth);
    }
}
