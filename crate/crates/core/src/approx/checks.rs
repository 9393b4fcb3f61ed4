//! The invariant suite run under `--assert sampled|full`. Every check is a
//! recomputation from scratch; nothing here reuses the solver's incremental
//! path state.

use crate::alloc::{check_partial, ThinEdge};
use crate::error::SolveError;
use crate::graphs::{f_m, PathSet};
use crate::value::Value;

use super::state::{Cover, Decomposition};

fn fail(msg: String) -> Result<(), SolveError> {
    Err(SolveError::Invariant(msg))
}

fn count(n: usize) -> Value {
    Value::from(n as i64)
}

fn players(edges: &[ThinEdge]) -> Vec<usize> {
    edges.iter().map(|e| e.player).collect()
}

/// `settled` marks a state in which no layer is collapsible; the counting
/// bounds that rely on that are checked only then.
pub(super) fn run(c: &Cover<'_>, settled: bool) -> Result<(), SolveError> {
    let inst = c.inst;
    let params = c.params;
    let ell = c.layers.len();
    let m = c.pa.matching();

    let report = check_partial(c.pa, inst, &c.lambda);
    if let Some(v) = report.violations.first() {
        return fail(format!("partial allocation: {v}"));
    }

    if c.layers[0].b != [ThinEdge::new(c.p0, Vec::new())] || !c.layers[0].a.is_empty() {
        return fail("first layer is not the root".into());
    }

    let i_players = c.i_players();
    let below = c.b_players(ell - 1);
    let f = f_m(&c.graph, m, &below, &i_players)?;
    if f != c.i_edges.len() {
        return fail(format!("f(B<ℓ, I) = {f} but |I| = {}", c.i_edges.len()));
    }

    for j in 1..ell {
        let layer = &c.layers[j];
        let mut targets = players(&layer.a);
        targets.extend(&i_players);
        let f = f_m(&c.graph, m, &c.b_players(j), &targets)?;
        if f < layer.d {
            return fail(format!("layer {}: f = {f} < d = {}", j + 1, layer.d));
        }
        if layer.a.len() > layer.z || layer.d < layer.z {
            return fail(format!(
                "layer {}: |A| = {}, z = {}, d = {}",
                j + 1,
                layer.a.len(),
                layer.z,
                layer.d
            ));
        }
    }

    // Resource-disjointness of A edges among themselves and against I and E.
    let mut used = vec![None::<&str>; inst.n_resources()];
    for e in c.layers.iter().flat_map(|l| &l.a).chain(&c.i_edges) {
        for &r in &e.resources {
            if let Some(prev) = used[r] {
                return fail(format!("resource {r} used twice (also by {prev} edge)"));
            }
            used[r] = Some("A or I");
        }
    }
    for e in &c.i_edges {
        if !e.is_minimal(inst, &c.lambda) {
            return fail(format!("I edge of player {} is not minimal", e.player));
        }
        if let Some(&r) = e.resources.iter().find(|&&r| c.pa.owner_of(r).is_some()) {
            return fail(format!("I edge of player {} uses resource {r} of E", e.player));
        }
    }

    let mut seen_b = vec![false; inst.n_players()];
    for (j, layer) in c.layers.iter().enumerate().skip(1) {
        for b in &layer.b {
            if c.pa.edge_of(b.player) != Some(b) {
                return fail(format!("B edge of player {} is not in E", b.player));
            }
            if seen_b[b.player] {
                return fail(format!("player {} blocks in two layers", b.player));
            }
            seen_b[b.player] = true;
        }
        for a in &layer.a {
            if !a.is_minimal(inst, &c.big_w) {
                return fail(format!("A edge of player {} is not minimal", a.player));
            }
            if a.resources.iter().any(|&r| !inst.is_desired(a.player, r) || c.class.is_fat(r)) {
                return fail(format!("A edge of player {} has a fat or undesired resource", a.player));
            }
            if c.free_value(&a.resources) >= c.lambda {
                return fail(format!("A edge of player {} in layer {} is unblocked", a.player, j + 1));
            }
            for &r in &a.resources {
                if let Some(q) = c.pa.owner_of(r) {
                    if !layer.b.iter().any(|b| b.player == q) {
                        return fail(format!("blocker {q} of layer {} is missing from B", j + 1));
                    }
                }
            }
        }

        let (na, nb) = (count(layer.a.len()), count(layer.b.len()));
        let a_cap = (Value::one() + &params.beta / &params.gamma) * &nb;
        if !layer.a.is_empty() && na >= a_cap {
            return fail(format!("layer {}: |A| = {} too large for |B| = {}", j + 1, layer.a.len(), layer.b.len()));
        }
        let mut in_a = vec![false; inst.n_resources()];
        for a in &layer.a {
            for &r in &a.resources {
                in_a[r] = true;
            }
        }
        let heavy = layer
            .b
            .iter()
            .filter(|b| {
                let shared: Value = b.resources.iter().filter(|&&r| in_a[r]).map(|&r| inst.value(r)).sum();
                shared > c.beta_lambda
            })
            .count();
        let heavy_cap = (Value::from_integer(2) + &params.gamma) / &params.beta * &na;
        if heavy > 0 && count(heavy) >= heavy_cap {
            return fail(format!("layer {}: {heavy} heavily shared blockers for |A| = {}", j + 1, layer.a.len()));
        }
    }

    if settled {
        let mu = &params.mu;
        if count(c.i_edges.len()) > mu * count(below.len()) {
            return fail(format!("|I| = {} exceeds μ|B<ℓ|", c.i_edges.len()));
        }
        let g = &params.gamma;
        let h = g * g * g / (Value::one() + g);
        for j in 1..ell {
            let lower = count(c.b_players(j).len());
            let layer = &c.layers[j];
            if count(layer.a.len()) < count(layer.z) - mu * &lower {
                return fail(format!("layer {}: |A| = {} dropped below z - μ|B<i|", j + 1, layer.a.len()));
            }
            if count(layer.b.len()) < &h * &lower {
                return fail(format!("layer {}: |B| = {} below h|B<i|", j + 1, layer.b.len()));
            }
        }
    }
    Ok(())
}

/// Re-derives the properties of the canonical decomposition from scratch:
/// for every prefix of layers the paths from it reach exactly the matching
/// prefix of `I`, and every group of paths is valid in `G_M`.
pub(super) fn verify_decomposition(c: &Cover<'_>, dec: &Decomposition) -> Result<(), SolveError> {
    let m = c.pa.matching();
    let i_players = c.i_players();
    let mut prefix: Vec<usize> = Vec::new();
    let total: usize = dec.parts.iter().map(Vec::len).sum();
    if total != i_players.len() {
        return fail(format!("decomposition covers {total} of {} players in I", i_players.len()));
    }
    for (i, part) in dec.parts.iter().enumerate() {
        prefix.extend(part);
        let sources = c.b_players(i + 1);
        let to_prefix = f_m(&c.graph, m, &sources, &prefix)?;
        let to_all = f_m(&c.graph, m, &sources, &i_players)?;
        if to_prefix != prefix.len() || to_all != prefix.len() {
            return fail(format!(
                "prefix {}: f to own sinks {to_prefix}, to all of I {to_all}, expected {}",
                i + 1,
                prefix.len()
            ));
        }
        let gamma = PathSet::new(dec.gammas[i].clone());
        gamma.validate(&c.graph, m, &players(&c.layers[i].b), part)?;
    }
    Ok(())
}
