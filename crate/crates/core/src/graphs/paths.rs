//! Node-disjoint alternating paths in `G_M`.
//!
//! A family of disjoint paths `Π` from `S` to `T` corresponds to the matching
//! `M ⊕ Π`; a larger family exists iff `G_{M⊕Π}` has a path from an unused
//! source to an unused target. Growing the family one path at a time from any
//! starting family therefore reaches the optimum.

use std::collections::VecDeque;

use super::{FatGraph, Matching};
use crate::error::GraphError;

/// An alternating path `p_0 r_0 p_1 r_1 … p_k`. Trivial paths have one player
/// and no resources.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    players: Vec<usize>,
    resources: Vec<usize>,
}

impl Path {
    pub fn trivial(p: usize) -> Self {
        Path {
            players: vec![p],
            resources: Vec::new(),
        }
    }

    /// Panics unless there is exactly one more player than resources.
    pub fn new(players: Vec<usize>, resources: Vec<usize>) -> Self {
        assert_eq!(players.len(), resources.len() + 1, "malformed path");
        Path { players, resources }
    }

    pub fn source(&self) -> usize {
        self.players[0]
    }

    pub fn sink(&self) -> usize {
        *self.players.last().unwrap()
    }

    pub fn is_trivial(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn players(&self) -> &[usize] {
        &self.players
    }

    pub fn resources(&self) -> &[usize] {
        &self.resources
    }
}

/// A family of node-disjoint paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathSet {
    paths: Vec<Path>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Self {
        PathSet { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Path> {
        self.paths.iter()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn sources(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.paths.iter().map(Path::source).collect();
        v.sort_unstable();
        v
    }

    pub fn sinks(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.paths.iter().map(Path::sink).collect();
        v.sort_unstable();
        v
    }

    /// Checks that the family is a valid set of disjoint `S`→`T` paths in
    /// `G_M`.
    pub fn validate(
        &self,
        g: &FatGraph,
        m: &Matching,
        sources: &[usize],
        targets: &[usize],
    ) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidPaths(msg));
        let mut used_p = vec![false; g.n_players()];
        let mut used_r = vec![false; g.n_resources()];
        for path in &self.paths {
            if !sources.contains(&path.source()) {
                return bad(format!("path starts at non-source {}", path.source()));
            }
            if m.is_matched(path.source()) {
                return bad(format!("path starts at matched player {}", path.source()));
            }
            if !targets.contains(&path.sink()) {
                return bad(format!("path ends at non-target {}", path.sink()));
            }
            for (i, &r) in path.resources.iter().enumerate() {
                let (a, b) = (path.players[i], path.players[i + 1]);
                if !g.has_edge(a, r) || m.contains(a, r) {
                    return bad(format!("no arc from player {a} to resource {r}"));
                }
                if !m.contains(b, r) {
                    return bad(format!("no arc from resource {r} to player {b}"));
                }
                if std::mem::replace(&mut used_r[r], true) {
                    return bad(format!("resource {r} used twice"));
                }
            }
            for &p in &path.players {
                if std::mem::replace(&mut used_p[p], true) {
                    return bad(format!("player {p} used twice"));
                }
            }
        }
        Ok(())
    }
}

/// `M ⊕ Π`: every player on a nontrivial path takes the resource that follows
/// it on the path.
pub fn flip(m: &Matching, paths: &PathSet) -> Matching {
    let mut out = m.clone();
    for path in paths.iter() {
        flip_path(&mut out, path);
    }
    out
}

fn flip_path(m: &mut Matching, path: &Path) {
    for (i, &r) in path.resources.iter().enumerate() {
        let q = path.players[i + 1];
        m.remove(q, r);
    }
    for (i, &r) in path.resources.iter().enumerate() {
        m.insert(path.players[i], r);
    }
}

/// Nodes reachable in `G_M` from a set of players.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reach {
    pub players: Vec<bool>,
    pub resources: Vec<bool>,
}

impl Reach {
    pub fn from_sources(g: &FatGraph, m: &Matching, sources: &[usize]) -> Self {
        let mut players = vec![false; g.n_players()];
        let mut resources = vec![false; g.n_resources()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !players[s] {
                players[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(p) = queue.pop_front() {
            for &r in g.neighbors(p) {
                if m.contains(p, r) || resources[r] {
                    continue;
                }
                resources[r] = true;
                if let Some(q) = m.player_of(r) {
                    if !players[q] {
                        players[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        Reach { players, resources }
    }

    pub fn player_list(&self) -> Vec<usize> {
        mask_to_list(&self.players)
    }

    pub fn resource_list(&self) -> Vec<usize> {
        mask_to_list(&self.resources)
    }
}

fn mask_to_list(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

/// Breadth-first search in `G_{flipped}` from `sources` (in order) to the
/// first player satisfying `is_target`.
pub(crate) fn find_path(
    g: &FatGraph,
    flipped: &Matching,
    sources: &[usize],
    is_target: impl Fn(usize) -> bool,
) -> Option<Path> {
    if let Some(&s) = sources.iter().find(|&&s| is_target(s)) {
        return Some(Path::trivial(s));
    }
    let np = g.n_players();
    let nr = g.n_resources();
    let mut seen_p = vec![false; np];
    let mut via_r: Vec<Option<usize>> = vec![None; np];
    let mut from_p: Vec<usize> = vec![usize::MAX; nr];
    let mut seen_r = vec![false; nr];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen_p[s] {
            seen_p[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(p) = queue.pop_front() {
        for &r in g.neighbors(p) {
            if flipped.contains(p, r) || seen_r[r] {
                continue;
            }
            seen_r[r] = true;
            from_p[r] = p;
            let Some(q) = flipped.player_of(r) else {
                continue;
            };
            if seen_p[q] {
                continue;
            }
            seen_p[q] = true;
            via_r[q] = Some(r);
            if is_target(q) {
                let mut players = vec![q];
                let mut resources = Vec::new();
                let mut cur = q;
                while let Some(r) = via_r[cur] {
                    resources.push(r);
                    cur = from_p[r];
                    players.push(cur);
                }
                players.reverse();
                resources.reverse();
                return Some(Path::new(players, resources));
            }
            queue.push_back(q);
        }
    }
    None
}

/// Recovers the path family encoded by `base ⊕ next` whose endpoints lie in
/// `sources` and `sinks`.
fn decompose(
    base: &Matching,
    next: &Matching,
    sources: &[usize],
    sinks: &[bool],
) -> Result<Vec<Path>, GraphError> {
    let other_resource = |p: usize, prev: Option<usize>| -> Option<usize> {
        let a = base.resource_of(p);
        let b = next.resource_of(p);
        if a == b {
            return None;
        }
        [a, b].into_iter().flatten().find(|&r| Some(r) != prev)
    };
    let mut out = Vec::new();
    for &s in sources {
        let mut players = vec![s];
        let mut resources = Vec::new();
        let mut cur = s;
        let mut prev = None;
        // Sources are unmatched in `base`, so the walk leaves along a `next`
        // edge and returns along a `base` edge.
        while let Some(r) = other_resource(cur, prev) {
            let q = base
                .player_of(r)
                .filter(|&q| q != cur)
                .or_else(|| next.player_of(r).filter(|&q| q != cur))
                .ok_or_else(|| GraphError::InvalidPaths(format!("dangling resource {r}")))?;
            resources.push(r);
            players.push(q);
            prev = Some(r);
            cur = q;
            if players.len() > base_len(base) + 2 {
                return Err(GraphError::InvalidPaths("walk does not terminate".into()));
            }
        }
        if sinks[cur] {
            out.push(Path::new(players, resources));
        } else if resources.is_empty() {
            continue;
        } else {
            return Err(GraphError::InvalidPaths(format!(
                "walk from {s} ends at non-sink {cur}"
            )));
        }
    }
    Ok(out)
}

fn base_len(m: &Matching) -> usize {
    m.of_player.len()
}

/// Given an optimal-or-not family `paths` of disjoint `S`→`T` paths, returns a
/// family with exactly one more path. Fails with [`GraphError::AlreadyOptimal`]
/// if none exists.
pub fn augment(
    g: &FatGraph,
    m: &Matching,
    paths: &PathSet,
    sources: &[usize],
    targets: &[usize],
) -> Result<PathSet, GraphError> {
    let mut solver = PathSolver::with_paths(g, m, sources, targets, paths.clone())?;
    if solver.augment_once()? {
        Ok(solver.paths)
    } else {
        Err(GraphError::AlreadyOptimal)
    }
}

/// A maximum family of node-disjoint `S`→`T` paths in `G_M`.
pub fn solve_disjoint_paths(
    g: &FatGraph,
    m: &Matching,
    sources: &[usize],
    targets: &[usize],
) -> Result<PathSet, GraphError> {
    Ok(PathSolver::new(g, m, sources, targets)?.paths)
}

/// `f_M(S, T)`: the maximum number of node-disjoint `S`→`T` paths in `G_M`.
pub fn f_m(
    g: &FatGraph,
    m: &Matching,
    sources: &[usize],
    targets: &[usize],
) -> Result<usize, GraphError> {
    Ok(PathSolver::new(g, m, sources, targets)?.count())
}

/// An optimal path family kept up to date while sources and targets are added.
#[derive(Debug, Clone)]
pub struct PathSolver<'g> {
    graph: &'g FatGraph,
    base: Matching,
    flipped: Matching,
    is_source: Vec<bool>,
    is_target: Vec<bool>,
    used_src: Vec<bool>,
    used_sink: Vec<bool>,
    paths: PathSet,
}

impl<'g> PathSolver<'g> {
    pub fn new(
        g: &'g FatGraph,
        m: &Matching,
        sources: &[usize],
        targets: &[usize],
    ) -> Result<Self, GraphError> {
        let mut s = Self::with_paths(g, m, sources, targets, PathSet::default())?;
        s.optimize()?;
        Ok(s)
    }

    fn with_paths(
        g: &'g FatGraph,
        m: &Matching,
        sources: &[usize],
        targets: &[usize],
        paths: PathSet,
    ) -> Result<Self, GraphError> {
        let np = g.n_players();
        let mut s = PathSolver {
            graph: g,
            base: m.clone(),
            flipped: m.clone(),
            is_source: vec![false; np],
            is_target: vec![false; np],
            used_src: vec![false; np],
            used_sink: vec![false; np],
            paths: PathSet::default(),
        };
        for &p in sources {
            if m.is_matched(p) {
                return Err(GraphError::MatchedSource(p));
            }
            s.is_source[p] = true;
        }
        for &p in targets {
            s.is_target[p] = true;
        }
        if !paths.is_empty() {
            paths.validate(g, m, sources, targets)?;
            s.flipped = flip(m, &paths);
            for path in paths.iter() {
                s.used_src[path.source()] = true;
                s.used_sink[path.sink()] = true;
            }
            s.paths = paths;
        }
        Ok(s)
    }

    pub fn count(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    /// `M ⊕ Π` for the current family.
    pub fn flipped(&self) -> &Matching {
        &self.flipped
    }

    pub fn sources(&self) -> Vec<usize> {
        mask_to_list(&self.is_source)
    }

    pub fn targets(&self) -> Vec<usize> {
        mask_to_list(&self.is_target)
    }

    pub fn is_target(&self, p: usize) -> bool {
        self.is_target[p]
    }

    fn free_sources(&self) -> Vec<usize> {
        (0..self.is_source.len())
            .filter(|&p| self.is_source[p] && !self.used_src[p])
            .collect()
    }

    /// Nodes reachable in `G_{M⊕Π}` from sources not used by `Π`.
    pub fn reach(&self) -> Reach {
        Reach::from_sources(self.graph, &self.flipped, &self.free_sources())
    }

    /// Whether adding `p` as a target would increase the optimum.
    pub fn would_increase(&self, p: usize) -> bool {
        if self.is_target[p] {
            return false;
        }
        if self.is_source[p] && !self.used_src[p] {
            return true;
        }
        self.reach().players[p]
    }

    /// Adds a target and re-optimises. Returns whether the optimum grew.
    pub fn add_target(&mut self, p: usize) -> Result<bool, GraphError> {
        if self.is_target[p] {
            return Ok(false);
        }
        self.is_target[p] = true;
        let before = self.count();
        self.optimize()?;
        Ok(self.count() > before)
    }

    /// Adds sources and re-optimises.
    pub fn add_sources(&mut self, sources: &[usize]) -> Result<(), GraphError> {
        for &p in sources {
            if self.base.is_matched(p) {
                return Err(GraphError::MatchedSource(p));
            }
            self.is_source[p] = true;
        }
        self.optimize()
    }

    fn optimize(&mut self) -> Result<(), GraphError> {
        while self.augment_once()? {}
        Ok(())
    }

    fn augment_once(&mut self) -> Result<bool, GraphError> {
        let free = self.free_sources();
        let is_target = &self.is_target;
        let used_sink = &self.used_sink;
        let Some(pi) = find_path(self.graph, &self.flipped, &free, |q| {
            is_target[q] && !used_sink[q]
        }) else {
            return Ok(false);
        };
        let before = self.paths.len();
        if pi.is_trivial() {
            let s = pi.source();
            self.used_src[s] = true;
            self.used_sink[s] = true;
            self.paths.paths.push(pi);
            return Ok(true);
        }
        let mut next = self.flipped.clone();
        flip_path(&mut next, &pi);
        self.used_src[pi.source()] = true;
        self.used_sink[pi.sink()] = true;
        let sources = mask_to_list(&self.used_src);
        let paths = decompose(&self.base, &next, &sources, &self.used_sink)?;
        if paths.len() != before + 1 {
            return Err(GraphError::InvalidPaths(format!(
                "augmentation produced {} paths from {}",
                paths.len(),
                before
            )));
        }
        self.flipped = next;
        self.paths = PathSet::new(paths);
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::super::max_matching;
    use super::*;

    #[test]
    fn trivial_path_when_source_is_target() {
        let g = FatGraph::new(1, 0, []);
        let m = Matching::empty(1, 0);
        assert_eq!(f_m(&g, &m, &[0], &[0]).unwrap(), 1);
        assert_eq!(f_m(&g, &m, &[0], &[]).unwrap(), 0);
    }

    #[test]
    fn single_alternating_path() {
        // p1 holds r0; p0 likes r0.
        let g = FatGraph::new(2, 1, [(0, 0), (1, 0)]);
        let m = Matching::from_pairs(2, 1, [(1, 0)]).unwrap();
        let ps = solve_disjoint_paths(&g, &m, &[0], &[1]).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps.paths()[0].players(), &[0, 1]);
        assert_eq!(ps.paths()[0].resources(), &[0]);
        let flipped = flip(&m, &ps);
        assert_eq!(flipped.pairs(), vec![(0, 0)]);
    }

    #[test]
    fn matched_source_rejected() {
        let g = FatGraph::new(1, 1, [(0, 0)]);
        let m = max_matching(&g);
        assert_eq!(f_m(&g, &m, &[0], &[0]), Err(GraphError::MatchedSource(0)));
    }

    #[test]
    fn disjointness_limits_count() {
        // Two sources funnel through the single resource r0 held by p2.
        let g = FatGraph::new(3, 1, [(0, 0), (1, 0), (2, 0)]);
        let m = Matching::from_pairs(3, 1, [(2, 0)]).unwrap();
        assert_eq!(f_m(&g, &m, &[0, 1], &[2]).unwrap(), 1);
        // Each source is also a target: trivial paths.
        assert_eq!(f_m(&g, &m, &[0, 1], &[0, 1, 2]).unwrap(), 2);
    }

    #[test]
    fn rerouting_through_used_source() {
        // p0 - r0 - p1 ; p2 - r1 - p0? p0 is unmatched so nothing points at it.
        // Chain: p0 -> r0 -> p1 -> r1 -> p2. Targets {p1, p2}. Only one path
        // from the single source.
        let g = FatGraph::new(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)]);
        let m = Matching::from_pairs(3, 2, [(1, 0), (2, 1)]).unwrap();
        assert_eq!(f_m(&g, &m, &[0], &[1, 2]).unwrap(), 1);
    }

    #[test]
    fn augmentation_reroutes_existing_path() {
        // Sources p0, p1; targets p2, p3. Resources r0 (held by p2), r1 (held
        // by p3). p0 likes r0 and r1; p1 likes only r0.
        let g = FatGraph::new(4, 2, [(0, 0), (0, 1), (1, 0), (2, 0), (3, 1)]);
        let m = Matching::from_pairs(4, 2, [(2, 0), (3, 1)]).unwrap();
        let first = PathSet::new(vec![Path::new(vec![0, 2], vec![0])]);
        let more = augment(&g, &m, &first, &[0, 1], &[2, 3]).unwrap();
        assert_eq!(more.len(), 2);
        more.validate(&g, &m, &[0, 1], &[2, 3]).unwrap();
        assert_eq!(
            augment(&g, &m, &more, &[0, 1], &[2, 3]),
            Err(GraphError::AlreadyOptimal)
        );
    }

    #[test]
    fn incremental_targets() {
        let g = FatGraph::new(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)]);
        let m = Matching::from_pairs(3, 2, [(1, 0), (2, 1)]).unwrap();
        let mut s = PathSolver::new(&g, &m, &[0], &[]).unwrap();
        assert_eq!(s.count(), 0);
        assert!(s.would_increase(2));
        assert!(s.add_target(2).unwrap());
        assert!(!s.would_increase(1));
        assert!(!s.add_target(1).unwrap());
        assert_eq!(s.count(), 1);
    }

    #[test]
    fn reach_follows_orientation() {
        let g = FatGraph::new(2, 1, [(0, 0), (1, 0)]);
        let m = Matching::from_pairs(2, 1, [(1, 0)]).unwrap();
        let r = Reach::from_sources(&g, &m, &[0]);
        assert_eq!(r.player_list(), vec![0, 1]);
        let r = Reach::from_sources(&g, &m, &[1]);
        assert_eq!(r.player_list(), vec![1]);
        assert!(r.resource_list().is_empty());
    }
}
