use std::cmp::Ordering;

use crate::alloc::{extract_minimal, greedy_edge, PartialAllocation, ResourceClass, ThinEdge};
use crate::dual::DualCertificate;
use crate::error::SolveError;
use crate::graphs::{flip, FatGraph, Path, PathSet, PathSolver, Reach};
use crate::instance::Instance;
use crate::search::AssertLevel;
use crate::stats::Stats;
use crate::value::Value;

use super::{checks, SolverParams};

/// One layer of the stack: addable edges `A` blocked by the edges `B`.
/// `d` and `z` are recorded when the layer is built.
#[derive(Debug, Clone)]
pub(super) struct Layer {
    pub a: Vec<ThinEdge>,
    pub b: Vec<ThinEdge>,
    pub d: usize,
    pub z: usize,
}

/// Paths from `B_1 ∪ … ∪ B_{ℓ-1}` to the players of `I`, grouped by the layer
/// of their source. `parts[i]` are the sinks of `gammas[i]`.
#[derive(Debug, Clone, Default)]
pub(super) struct Decomposition {
    pub parts: Vec<Vec<usize>>,
    pub gammas: Vec<Vec<Path>>,
}

pub(super) enum Finish {
    Covered,
    Stuck(DualCertificate),
}

/// What the certificate needs from the end of a build.
pub(super) struct Snapshot {
    reach: Reach,
    inactive: Vec<bool>,
}

pub(super) struct Cover<'a> {
    pub inst: &'a Instance,
    pub params: &'a SolverParams,
    pub class: &'a ResourceClass,
    pub pa: &'a mut PartialAllocation,
    pub graph: FatGraph,
    pub p0: usize,
    pub lambda: Value,
    pub big_w: Value,
    pub beta_lambda: Value,
    pub layers: Vec<Layer>,
    pub i_edges: Vec<ThinEdge>,
    pub signatures: Vec<Vec<f64>>,
    level: AssertLevel,
    cap: u64,
    steps: u64,
}

/// Layer signature: coordinate `i` (1-based) is
/// `log_{1/(1-μ)} (|B_i| / h^{i+1})` with `h = γ³/(1+γ)`, followed by `+∞`.
/// An empty `B_i` gives `-∞`.
pub fn signature(b_sizes: &[usize], params: &SolverParams) -> Vec<f64> {
    let g = &params.gamma;
    let h = g * g * g / (Value::one() + g);
    let ln_inv_h = -h.ln();
    let base = -(Value::one() - &params.mu).ln();
    b_sizes
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let lb = if b == 0 { f64::NEG_INFINITY } else { (b as f64).ln() };
            (lb + (i + 2) as f64 * ln_inv_h) / base
        })
        .chain(std::iter::once(f64::INFINITY))
        .collect()
}

fn players(edges: &[ThinEdge]) -> Vec<usize> {
    edges.iter().map(|e| e.player).collect()
}

impl<'a> Cover<'a> {
    pub fn new(
        inst: &'a Instance,
        params: &'a SolverParams,
        class: &'a ResourceClass,
        pa: &'a mut PartialAllocation,
        p0: usize,
        level: AssertLevel,
        cap: u64,
    ) -> Self {
        let lambda = params.lambda.clone();
        Cover {
            inst,
            params,
            class,
            graph: pa.graph().clone(),
            pa,
            p0,
            big_w: (Value::one() + &params.gamma) * &lambda,
            beta_lambda: &params.beta * &lambda,
            lambda,
            layers: vec![Layer {
                a: Vec::new(),
                b: vec![ThinEdge::new(p0, Vec::new())],
                d: 0,
                z: 0,
            }],
            i_edges: Vec::new(),
            signatures: Vec::new(),
            level,
            cap,
            steps: 0,
        }
    }

    /// Players of `B_1 ∪ … ∪ B_k`.
    pub fn b_players(&self, k: usize) -> Vec<usize> {
        self.layers[..k].iter().flat_map(|l| players(&l.b)).collect()
    }

    pub fn i_players(&self) -> Vec<usize> {
        players(&self.i_edges)
    }

    pub fn b_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.b.len()).collect()
    }

    /// Value of the part of `resources` not used by a thin edge of `E`.
    pub fn free_value(&self, resources: &[usize]) -> Value {
        resources
            .iter()
            .filter(|&&r| self.pa.owner_of(r).is_none())
            .map(|&r| self.inst.value(r))
            .sum()
    }

    pub fn run(&mut self, stats: &mut Stats, target: &Value) -> Result<Finish, SolveError> {
        self.record_signature()?;
        loop {
            self.tick()?;
            let snap = self.build()?;
            stats.bump("build");
            stats.note_depth(self.layers.len());
            self.maybe_check(stats, false)?;

            let mut collapsed = false;
            loop {
                let dec = self.decompose()?;
                if self.level.should_check(self.steps) {
                    checks::verify_decomposition(self, &dec)?;
                    stats.decompositions_verified += 1;
                }
                let Some(t) = self.find_collapsible(&dec) else {
                    break;
                };
                self.tick()?;
                let done = self.collapse(t, dec)?;
                stats.bump("collapse");
                collapsed = true;
                if done {
                    return Ok(Finish::Covered);
                }
                self.maybe_check(stats, false)?;
            }

            if !collapsed {
                let ell = self.layers.len() - 1;
                let below = self.b_players(ell).len();
                let z = self.layers[ell].z;
                let bound = Value::from_integer(2) * &self.params.mu * Value::from(below as i64);
                if Value::from(z as i64) < bound {
                    return Ok(Finish::Stuck(self.certificate(&snap, target)?));
                }
            }
            self.maybe_check(stats, true)?;
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

    fn maybe_check(&self, stats: &mut Stats, settled: bool) -> Result<(), SolveError> {
        if self.level.should_check(self.steps) {
            checks::run(self, settled)?;
            stats.invariant_checks += 1;
        }
        Ok(())
    }

    fn record_signature(&mut self) -> Result<(), SolveError> {
        let sig = signature(&self.b_sizes(), self.params);
        if let Some(prev) = self.signatures.last() {
            if sig.as_slice().partial_cmp(prev.as_slice()) != Some(Ordering::Less) {
                return Err(SolveError::Invariant(format!(
                    "signature did not decrease: {prev:?} -> {sig:?}"
                )));
            }
        }
        self.signatures.push(sig);
        Ok(())
    }

    /// Pushes a new layer. Edges that can be added to the solution right away
    /// go to `I`; the rest of the addable edges go to the new `A` layer and
    /// their blockers to the new `B` layer.
    fn build(&mut self) -> Result<Snapshot, SolveError> {
        let inst = self.inst;
        let n = inst.n_players();
        let sources = self.b_players(self.layers.len());
        let matching = self.pa.matching().clone();
        let mut solver = PathSolver::new(&self.graph, &matching, &sources, &players(&self.i_edges))?;

        let mut inactive = vec![false; inst.n_resources()];
        for e in self
            .layers
            .iter()
            .flat_map(|l| l.a.iter().chain(&l.b))
            .chain(&self.i_edges)
        {
            for &r in &e.resources {
                inactive[r] = true;
            }
        }
        let active_desired = |p: usize, inactive: &[bool]| -> Vec<usize> {
            inst.desires(p)
                .iter()
                .copied()
                .filter(|&r| self.class.is_thin(r) && !inactive[r])
                .collect()
        };

        'unblocked: loop {
            let reach = solver.reach();
            for p in 0..n {
                if solver.is_target(p) || !reach.players[p] {
                    continue;
                }
                let cands: Vec<usize> = active_desired(p, &inactive)
                    .into_iter()
                    .filter(|&r| self.pa.owner_of(r).is_none())
                    .collect();
                if let Some(e) = greedy_edge(inst, p, &cands, &self.lambda) {
                    for &r in &e.resources {
                        inactive[r] = true;
                    }
                    if !solver.add_target(p)? {
                        return Err(SolveError::Invariant(format!("addable player {p} did not extend the paths")));
                    }
                    self.i_edges.push(e);
                    continue 'unblocked;
                }
            }
            break;
        }

        let mut new_a: Vec<ThinEdge> = Vec::new();
        let mut new_b: Vec<ThinEdge> = Vec::new();
        let mut in_a = vec![false; inst.n_resources()];
        'blocked: loop {
            let reach = solver.reach();
            for p in 0..n {
                if solver.is_target(p) || !reach.players[p] {
                    continue;
                }
                let cands = active_desired(p, &inactive);
                let Some(e) = greedy_edge(inst, p, &cands, &self.big_w) else {
                    continue;
                };
                if self.free_value(&e.resources) >= self.lambda {
                    return Err(SolveError::Invariant(format!("addable edge of player {p} is not blocked")));
                }
                let mut blockers: Vec<usize> = e.resources.iter().filter_map(|&r| self.pa.owner_of(r)).collect();
                blockers.sort_unstable();
                blockers.dedup();
                for q in blockers {
                    if !new_b.iter().any(|b| b.player == q) {
                        new_b.push(self.pa.edge_of(q).expect("owner has an edge").clone());
                    }
                }
                for &r in &e.resources {
                    inactive[r] = true;
                    in_a[r] = true;
                }
                if !solver.add_target(p)? {
                    return Err(SolveError::Invariant(format!("addable player {p} did not extend the paths")));
                }
                new_a.push(e);
                for b in &new_b {
                    let shared: Value = b
                        .resources
                        .iter()
                        .filter(|&&r| in_a[r])
                        .map(|&r| inst.value(r))
                        .sum();
                    if shared > self.beta_lambda {
                        for &r in &b.resources {
                            inactive[r] = true;
                        }
                    }
                }
                continue 'blocked;
            }
            break;
        }

        let snap = Snapshot {
            reach: solver.reach(),
            inactive,
        };
        self.layers.push(Layer {
            d: solver.count(),
            z: new_a.len(),
            a: new_a,
            b: new_b,
        });
        Ok(snap)
    }

    /// Canonical decomposition: an optimal family for `B_1` and `I`, extended
    /// by adding the sources of each following layer in turn.
    pub fn decompose(&self) -> Result<Decomposition, SolveError> {
        let ell = self.layers.len();
        if ell < 2 {
            return Ok(Decomposition::default());
        }
        let matching = self.pa.matching();
        let mut solver = PathSolver::new(&self.graph, matching, &players(&self.layers[0].b), &self.i_players())?;
        for layer in &self.layers[1..ell - 1] {
            solver.add_sources(&players(&layer.b))?;
        }
        if solver.count() != self.i_edges.len() {
            return Err(SolveError::Invariant(format!(
                "only {} of {} players in I are reachable",
                solver.count(),
                self.i_edges.len()
            )));
        }
        let mut layer_of = vec![usize::MAX; self.inst.n_players()];
        for (i, layer) in self.layers[..ell - 1].iter().enumerate() {
            for b in &layer.b {
                layer_of[b.player] = i;
            }
        }
        let mut dec = Decomposition {
            parts: vec![Vec::new(); ell - 1],
            gammas: vec![Vec::new(); ell - 1],
        };
        for path in solver.paths().iter() {
            let i = layer_of[path.source()];
            dec.parts[i].push(path.sink());
            dec.gammas[i].push(path.clone());
        }
        Ok(dec)
    }

    /// Smallest layer whose paths reach more than `μ|B_i|` players of `I`.
    fn find_collapsible(&self, dec: &Decomposition) -> Option<usize> {
        (0..dec.parts.len()).find(|&i| {
            Value::from(dec.parts[i].len() as i64) > &self.params.mu * Value::from(self.layers[i].b.len() as i64)
        })
    }

    /// Collapses layer `t` (0-based). Returns whether `p0` is now covered.
    fn collapse(&mut self, t: usize, dec: Decomposition) -> Result<bool, SolveError> {
        self.layers.truncate(t + 1);
        let mut part_of = vec![usize::MAX; self.inst.n_players()];
        for (i, part) in dec.parts.iter().enumerate() {
            for &p in part {
                part_of[p] = i;
            }
        }
        let (commit, keep): (Vec<ThinEdge>, Vec<ThinEdge>) =
            std::mem::take(&mut self.i_edges).into_iter().partition(|e| part_of[e.player] == t);
        self.i_edges = keep.into_iter().filter(|e| part_of[e.player] < t).collect();

        let gamma = PathSet::new(dec.gammas[t].clone());
        let flipped = flip(self.pa.matching(), &gamma);
        self.pa.set_matching(flipped);
        if t > 0 {
            let used = gamma.sources();
            let (released, kept): (Vec<ThinEdge>, Vec<ThinEdge>) = std::mem::take(&mut self.layers[t].b)
                .into_iter()
                .partition(|b| used.contains(&b.player));
            self.layers[t].b = kept;
            for b in released {
                self.pa.remove_edge(b.player);
            }
        }
        for e in commit {
            if self.pa.is_covered(e.player) {
                return Err(SolveError::Invariant(format!("player {} would be covered twice", e.player)));
            }
            self.pa.insert_edge(e);
        }
        if t == 0 {
            return Ok(true);
        }

        let matching = self.pa.matching().clone();
        let sources = self.b_players(t);
        let mut solver = PathSolver::new(&self.graph, &matching, &sources, &self.i_players())?;
        let mut remaining = Vec::new();
        for a in std::mem::take(&mut self.layers[t].a) {
            if self.free_value(&a.resources) < self.lambda {
                remaining.push(a);
                continue;
            }
            if solver.would_increase(a.player) {
                solver.add_target(a.player)?;
                let free: Vec<usize> = a
                    .resources
                    .iter()
                    .copied()
                    .filter(|&r| self.pa.owner_of(r).is_none())
                    .collect();
                let e = extract_minimal(self.inst, a.player, &free, &self.lambda)
                    .map_err(|e| SolveError::Invariant(e.to_string()))?;
                self.i_edges.push(e);
            }
        }
        self.layers[t].a = remaining;
        Ok(false)
    }

    /// Dual solution built from the last build: players and fat resources
    /// reachable from the unused sources get `1 − (1+γ)λ`, inactive thin
    /// resources get their value. Values are relative to `target`.
    fn certificate(&self, snap: &Snapshot, target: &Value) -> Result<DualCertificate, SolveError> {
        let c = Value::one() - &self.big_w;
        let y = snap
            .reach
            .players
            .iter()
            .map(|&on| if on { c.clone() } else { Value::zero() })
            .collect();
        let z = (0..self.inst.n_resources())
            .map(|r| {
                if self.class.is_fat(r) {
                    if snap.reach.resources[r] {
                        c.clone()
                    } else {
                        Value::zero()
                    }
                } else if snap.inactive[r] {
                    self.inst.value(r).clone()
                } else {
                    Value::zero()
                }
            })
            .collect();
        let cert = DualCertificate::new(target.clone(), y, z);
        if !cert.objective.is_positive() {
            return Err(SolveError::Invariant(format!(
                "stuck at target {target} but the dual objective is {}",
                cert.objective
            )));
        }
        Ok(cert)
    }
}
