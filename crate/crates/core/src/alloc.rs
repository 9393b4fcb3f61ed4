//! Fat/thin classification, thin edges, and the partial allocation shared by
//! both local-search solvers.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::AllocError;
use crate::graphs::{has_augmenting_path, max_matching, FatGraph, Matching};
use crate::instance::{Allocation, Instance};
use crate::value::Value;

/// Fat/thin split of the resources for a threshold `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceClass {
    lambda: Value,
    fat: Vec<bool>,
}

impl ResourceClass {
    pub fn lambda(&self) -> &Value {
        &self.lambda
    }

    pub fn is_fat(&self, r: usize) -> bool {
        self.fat[r]
    }

    pub fn is_thin(&self, r: usize) -> bool {
        !self.fat[r]
    }

    pub fn fat_mask(&self) -> &[bool] {
        &self.fat
    }
}

/// A resource is fat iff its value is at least `λ`.
pub fn classify(inst: &Instance, lambda: &Value) -> ResourceClass {
    ResourceClass {
        lambda: lambda.clone(),
        fat: inst.values().iter().map(|v| v >= lambda).collect(),
    }
}

/// A player together with a set of thin resources it desires.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ThinEdge {
    pub player: usize,
    pub resources: Vec<usize>,
}

impl ThinEdge {
    pub fn new(player: usize, mut resources: Vec<usize>) -> Self {
        resources.sort_unstable();
        resources.dedup();
        ThinEdge { player, resources }
    }

    pub fn value(&self, inst: &Instance) -> Value {
        inst.value_of(&self.resources)
    }

    /// `v[D] ≥ w` and every proper subset falls below `w`. With non-negative
    /// values it suffices to test the subsets missing one resource.
    pub fn is_minimal(&self, inst: &Instance, w: &Value) -> bool {
        let total = self.value(inst);
        &total >= w
            && self
                .resources
                .iter()
                .all(|&r| &(&total - inst.value(r)) < w)
    }

    pub fn shares_resource(&self, other: &ThinEdge) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.resources.len() && j < other.resources.len() {
            match self.resources[i].cmp(&other.resources[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// Trims `d` to a `w`-minimal subset by repeatedly dropping the largest
/// resource whose removal keeps the total at least `w` (ties to the lower id).
pub fn extract_minimal(
    inst: &Instance,
    p: usize,
    d: &[usize],
    w: &Value,
) -> Result<ThinEdge, AllocError> {
    let mut keep: Vec<usize> = d.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let mut total = inst.value_of(&keep);
    if &total < w {
        return Err(AllocError::InsufficientValue {
            have: total.to_string(),
            need: w.to_string(),
        });
    }
    loop {
        let slack = &total - w;
        let pick = keep
            .iter()
            .enumerate()
            .filter(|(_, &r)| inst.value(r) <= &slack)
            .max_by(|(_, &a), (_, &b)| inst.value(a).cmp(inst.value(b)).then(b.cmp(&a)));
        match pick {
            Some((i, &r)) => {
                total = &total - inst.value(r);
                keep.remove(i);
            }
            None => break,
        }
    }
    Ok(ThinEdge::new(p, keep))
}

/// Takes `candidates` in descending value (ties by id) until the total
/// reaches `w`, then trims the result to a `w`-minimal edge. `None` if the
/// candidates are worth less than `w` in total.
pub fn greedy_edge(inst: &Instance, p: usize, candidates: &[usize], w: &Value) -> Option<ThinEdge> {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| inst.value(b).cmp(inst.value(a)).then(a.cmp(&b)));
    let mut total = Value::zero();
    let mut taken = Vec::new();
    for r in order {
        if &total >= w {
            break;
        }
        total += inst.value(r);
        taken.push(r);
    }
    if &total < w {
        return None;
    }
    extract_minimal(inst, p, &taken, w).ok()
}

/// A maximum matching of the fat graph plus compatible thin edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAllocation {
    graph: FatGraph,
    matching: Matching,
    edges: BTreeMap<usize, ThinEdge>,
    thin_owner: Vec<Option<usize>>,
}

impl PartialAllocation {
    /// Starts from the deterministic maximum matching and no thin edges.
    pub fn new(inst: &Instance, class: &ResourceClass) -> Self {
        let graph = FatGraph::from_instance(inst, class.fat_mask());
        let matching = max_matching(&graph);
        PartialAllocation::from_parts(graph, matching, [])
    }

    pub fn from_parts(
        graph: FatGraph,
        matching: Matching,
        edges: impl IntoIterator<Item = ThinEdge>,
    ) -> Self {
        let mut pa = PartialAllocation {
            thin_owner: vec![None; graph.n_resources()],
            graph,
            matching,
            edges: BTreeMap::new(),
        };
        for e in edges {
            pa.insert_edge(e);
        }
        pa
    }

    pub fn graph(&self) -> &FatGraph {
        &self.graph
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn set_matching(&mut self, m: Matching) {
        self.matching = m;
    }

    pub fn edges(&self) -> impl Iterator<Item = &ThinEdge> {
        self.edges.values()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_of(&self, p: usize) -> Option<&ThinEdge> {
        self.edges.get(&p)
    }

    /// The player whose thin edge uses `r`.
    pub fn owner_of(&self, r: usize) -> Option<usize> {
        self.thin_owner[r]
    }

    pub fn is_covered(&self, p: usize) -> bool {
        self.matching.is_matched(p) || self.edges.contains_key(&p)
    }

    pub fn covered_count(&self) -> usize {
        (0..self.graph.n_players())
            .filter(|&p| self.is_covered(p))
            .count()
    }

    /// Adds an edge, replacing any previous edge of the same player.
    pub fn insert_edge(&mut self, e: ThinEdge) {
        self.remove_edge(e.player);
        for &r in &e.resources {
            self.thin_owner[r] = Some(e.player);
        }
        self.edges.insert(e.player, e);
    }

    pub fn remove_edge(&mut self, p: usize) -> Option<ThinEdge> {
        let e = self.edges.remove(&p)?;
        for &r in &e.resources {
            if self.thin_owner[r] == Some(p) {
                self.thin_owner[r] = None;
            }
        }
        Some(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartialViolation {
    /// A matched pair that is not a fat edge.
    NotFatEdge { player: usize, resource: usize },
    /// The matching admits an augmenting path.
    NotMaximum,
    UndesiredThin { player: usize, resource: usize },
    FatInThinEdge { player: usize, resource: usize },
    NotMinimal { player: usize },
    Incompatible { resource: usize, players: [usize; 2] },
    DoubleCover { player: usize },
}

impl fmt::Display for PartialViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialViolation::NotFatEdge { player, resource } => {
                write!(f, "matched pair ({player}, {resource}) is not a fat edge")
            }
            PartialViolation::NotMaximum => f.write_str("matching is not maximum"),
            PartialViolation::UndesiredThin { player, resource } => {
                write!(f, "player {player} does not desire resource {resource}")
            }
            PartialViolation::FatInThinEdge { player, resource } => {
                write!(f, "thin edge of player {player} uses fat resource {resource}")
            }
            PartialViolation::NotMinimal { player } => {
                write!(f, "thin edge of player {player} is not minimal")
            }
            PartialViolation::Incompatible { resource, players } => write!(
                f,
                "resource {resource} used by thin edges of players {} and {}",
                players[0], players[1]
            ),
            PartialViolation::DoubleCover { player } => {
                write!(f, "player {player} covered by both a fat and a thin edge")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PartialReport {
    pub violations: Vec<PartialViolation>,
}

impl PartialReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the matching is a maximum matching of fat edges, that the thin
/// edges are `λ`-minimal and pairwise compatible, and that no player is
/// covered twice.
pub fn check_partial(pa: &PartialAllocation, inst: &Instance, lambda: &Value) -> PartialReport {
    let class = classify(inst, lambda);
    let mut violations = Vec::new();
    for (p, r) in pa.matching.pairs() {
        if !class.is_fat(r) || !inst.is_desired(p, r) {
            violations.push(PartialViolation::NotFatEdge {
                player: p,
                resource: r,
            });
        }
    }
    if violations.is_empty() && has_augmenting_path(&pa.graph, &pa.matching) {
        violations.push(PartialViolation::NotMaximum);
    }
    let mut owner: Vec<Option<usize>> = vec![None; inst.n_resources()];
    for e in pa.edges.values() {
        for &r in &e.resources {
            if !inst.is_desired(e.player, r) {
                violations.push(PartialViolation::UndesiredThin {
                    player: e.player,
                    resource: r,
                });
            }
            if class.is_fat(r) {
                violations.push(PartialViolation::FatInThinEdge {
                    player: e.player,
                    resource: r,
                });
            }
            match owner[r] {
                Some(q) => violations.push(PartialViolation::Incompatible {
                    resource: r,
                    players: [q, e.player],
                }),
                None => owner[r] = Some(e.player),
            }
        }
        if !e.is_minimal(inst, lambda) {
            violations.push(PartialViolation::NotMinimal { player: e.player });
        }
        if pa.matching.is_matched(e.player) {
            violations.push(PartialViolation::DoubleCover { player: e.player });
        }
    }
    PartialReport { violations }
}

/// Turns a covering partial allocation into bundles: the matched fat resource
/// or the thin edge's resources.
pub fn finalize(
    pa: &PartialAllocation,
    inst: &Instance,
    lambda: &Value,
) -> Result<Allocation, AllocError> {
    let n = inst.n_players();
    let uncovered: Vec<usize> = (0..n).filter(|&p| !pa.is_covered(p)).collect();
    if !uncovered.is_empty() {
        return Err(AllocError::Uncovered(uncovered));
    }
    let bundles: Vec<Vec<usize>> = (0..n)
        .map(|p| match pa.matching.resource_of(p) {
            Some(r) => vec![r],
            None => pa.edges[&p].resources.clone(),
        })
        .collect();
    for b in &bundles {
        let v = inst.value_of(b);
        if &v < lambda {
            return Err(AllocError::InsufficientValue {
                have: v.to_string(),
                need: lambda.to_string(),
            });
        }
    }
    Ok(Allocation { bundles })
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn classify_boundary() {
        let inst = Instance::new(
            vec![Value::ratio(1, 5), Value::zero()],
            vec![vec![0, 1]],
        )
        .unwrap();
        let c = classify(&inst, &Value::ratio(1, 5));
        assert!(c.is_fat(0));
        assert!(c.is_thin(1));
    }

    #[test]
    fn classify_ex1() {
        let c = classify(&ex1(), &Value::ratio(2, 9));
        assert_eq!(c.fat_mask(), &[true, false, false, false]);
    }

    #[test]
    fn extract_keeps_all_three_tenths() {
        let inst = ex1();
        let w = Value::ratio(2, 9);
        let e = extract_minimal(&inst, 1, &[1, 2, 3], &w).unwrap();
        assert_eq!(e.resources, vec![1, 2, 3]);
        assert!(e.is_minimal(&inst, &w));
    }

    #[test]
    fn extract_singleton_and_insufficient() {
        let inst = ex1();
        let w = Value::ratio(1, 10);
        let e = extract_minimal(&inst, 1, &[2], &w).unwrap();
        assert_eq!(e.resources, vec![2]);
        assert!(matches!(
            extract_minimal(&inst, 1, &[1, 2], &Value::ratio(1, 2)),
            Err(AllocError::InsufficientValue { .. })
        ));
    }

    #[test]
    fn extract_drops_largest_first() {
        // values 3/10, 1/10, 1/10, 1/10 with w = 3/10: dropping 3/10 leaves
        // exactly 3/10.
        let inst = Instance::new(
            vec![
                Value::ratio(3, 10),
                Value::ratio(1, 10),
                Value::ratio(1, 10),
                Value::ratio(1, 10),
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let e = extract_minimal(&inst, 0, &[0, 1, 2, 3], &Value::ratio(3, 10)).unwrap();
        assert_eq!(e.resources, vec![1, 2, 3]);
    }

    #[test]
    fn greedy_then_trim() {
        let inst = ex1();
        let e = greedy_edge(&inst, 1, &[3, 1, 2], &Value::ratio(1, 5)).unwrap();
        assert_eq!(e.resources, vec![1, 2]);
        assert!(greedy_edge(&inst, 1, &[1, 2, 3], &Value::ratio(1, 2)).is_none());
    }

    #[test]
    fn empty_edges_pass() {
        let inst = ex1();
        let lambda = Value::ratio(2, 9);
        let pa = PartialAllocation::new(&inst, &classify(&inst, &lambda));
        assert!(check_partial(&pa, &inst, &lambda).is_ok());
    }

    #[test]
    fn incompatible_and_double_cover() {
        let inst = Instance::new(
            vec![Value::one(), Value::ratio(1, 10), Value::ratio(1, 10)],
            vec![vec![0, 1, 2], vec![1, 2]],
        )
        .unwrap();
        let lambda = Value::ratio(1, 5);
        let class = classify(&inst, &lambda);
        let mut pa = PartialAllocation::new(&inst, &class);
        pa.insert_edge(ThinEdge::new(1, vec![1]));
        pa.insert_edge(ThinEdge::new(0, vec![1]));
        let report = check_partial(&pa, &inst, &lambda);
        assert!(report
            .violations
            .contains(&PartialViolation::Incompatible { resource: 1, players: [0, 1] }));
        assert!(report
            .violations
            .contains(&PartialViolation::DoubleCover { player: 0 }));
    }

    #[test]
    fn finalize_reports_uncovered() {
        let inst = ex1();
        let lambda = Value::ratio(2, 9);
        let pa = PartialAllocation::new(&inst, &classify(&inst, &lambda));
        assert_eq!(finalize(&pa, &inst, &lambda), Err(AllocError::Uncovered(vec![1])));
    }

    #[test]
    fn finalize_ex1() {
        let inst = ex1();
        let lambda = Value::ratio(2, 9);
        let mut pa = PartialAllocation::new(&inst, &classify(&inst, &lambda));
        pa.insert_edge(extract_minimal(&inst, 1, &[1, 2, 3], &lambda).unwrap());
        assert!(check_partial(&pa, &inst, &lambda).is_ok());
        let alloc = finalize(&pa, &inst, &lambda).unwrap();
        assert!(min_value(&inst, &alloc) >= lambda);
    }

    #[test]
    fn all_fat_bundles_are_singletons() {
        let inst = Instance::new(
            vec![Value::one(), Value::from_integer(2)],
            vec![vec![0, 1], vec![0]],
        )
        .unwrap();
        let lambda = Value::ratio(1, 5);
        let pa = PartialAllocation::new(&inst, &classify(&inst, &lambda));
        let alloc = finalize(&pa, &inst, &lambda).unwrap();
        assert!(alloc.bundles.iter().all(|b| b.len() == 1));
    }
}
