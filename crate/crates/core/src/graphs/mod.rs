//! The bipartite graph of players and fat resources, maximum matchings on it,
//! and its orientation with respect to a matching.

mod paths;

pub use paths::{augment, f_m, flip, solve_disjoint_paths, Path, PathSet, PathSolver, Reach};
pub(crate) use paths::find_path;

use crate::instance::Instance;

/// Bipartite graph between players and fat resources.
///
/// Resource ids are the instance's global ids; thin resources simply have no
/// edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatGraph {
    adj: Vec<Vec<usize>>,
    radj: Vec<Vec<usize>>,
}

impl FatGraph {
    pub fn new(
        n_players: usize,
        n_resources: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut adj = vec![Vec::new(); n_players];
        let mut radj = vec![Vec::new(); n_resources];
        for (p, r) in edges {
            assert!(p < n_players && r < n_resources, "edge ({p}, {r}) out of range");
            adj[p].push(r);
            radj[r].push(p);
        }
        for l in adj.iter_mut().chain(radj.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        FatGraph { adj, radj }
    }

    /// Fat edges of `inst` for the given fat/thin split.
    pub fn from_instance(inst: &Instance, fat: &[bool]) -> Self {
        let edges = (0..inst.n_players()).flat_map(|p| {
            inst.desires(p)
                .iter()
                .filter(|&&r| fat[r])
                .map(move |&r| (p, r))
        });
        FatGraph::new(inst.n_players(), inst.n_resources(), edges)
    }

    pub fn n_players(&self) -> usize {
        self.adj.len()
    }

    pub fn n_resources(&self) -> usize {
        self.radj.len()
    }

    /// Sorted fat resources adjacent to `p`.
    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.adj[p]
    }

    pub fn players_of(&self, r: usize) -> &[usize] {
        &self.radj[r]
    }

    pub fn has_edge(&self, p: usize, r: usize) -> bool {
        self.adj[p].binary_search(&r).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(p, rs)| rs.iter().map(move |&r| (p, r)))
    }
}

/// A partial pairing of players with fat resources.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    of_player: Vec<Option<usize>>,
    of_resource: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(n_players: usize, n_resources: usize) -> Self {
        Matching {
            of_player: vec![None; n_players],
            of_resource: vec![None; n_resources],
        }
    }

    /// Builds a matching from pairs, rejecting pairs that reuse a node.
    pub fn from_pairs(
        n_players: usize,
        n_resources: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Option<Self> {
        let mut m = Matching::empty(n_players, n_resources);
        for (p, r) in pairs {
            if m.of_player[p].is_some() || m.of_resource[r].is_some() {
                return None;
            }
            m.insert(p, r);
        }
        Some(m)
    }

    pub fn resource_of(&self, p: usize) -> Option<usize> {
        self.of_player[p]
    }

    pub fn player_of(&self, r: usize) -> Option<usize> {
        self.of_resource[r]
    }

    pub fn is_matched(&self, p: usize) -> bool {
        self.of_player[p].is_some()
    }

    pub fn contains(&self, p: usize, r: usize) -> bool {
        self.of_player[p] == Some(r)
    }

    pub fn size(&self) -> usize {
        self.of_player.iter().filter(|x| x.is_some()).count()
    }

    /// Matched pairs ordered by player.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.of_player
            .iter()
            .enumerate()
            .filter_map(|(p, r)| r.map(|r| (p, r)))
            .collect()
    }

    pub(crate) fn insert(&mut self, p: usize, r: usize) {
        debug_assert!(self.of_player[p].is_none() && self.of_resource[r].is_none());
        self.of_player[p] = Some(r);
        self.of_resource[r] = Some(p);
    }

    pub(crate) fn remove(&mut self, p: usize, r: usize) {
        debug_assert!(self.contains(p, r));
        self.of_player[p] = None;
        self.of_resource[r] = None;
    }

    /// Every matched pair is an edge of `g`.
    pub fn is_matching_of(&self, g: &FatGraph) -> bool {
        self.of_player.len() == g.n_players()
            && self.of_resource.len() == g.n_resources()
            && self.pairs().iter().all(|&(p, r)| g.has_edge(p, r))
    }
}

/// Maximum-cardinality matching by repeated augmenting-path search. Players are
/// processed in id order and neighbours in id order, so the result depends
/// only on the graph.
pub fn max_matching(g: &FatGraph) -> Matching {
    let mut m = Matching::empty(g.n_players(), g.n_resources());
    let mut seen = vec![false; g.n_resources()];
    for p in 0..g.n_players() {
        seen.iter_mut().for_each(|s| *s = false);
        try_kuhn(g, &mut m, &mut seen, p);
    }
    m
}

fn try_kuhn(g: &FatGraph, m: &mut Matching, seen: &mut [bool], p: usize) -> bool {
    for &r in g.neighbors(p) {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let free = match m.player_of(r) {
            None => true,
            Some(q) => try_kuhn(g, m, seen, q),
        };
        if free {
            if let Some(old) = m.resource_of(p) {
                m.of_resource[old] = None;
            }
            m.of_player[p] = Some(r);
            m.of_resource[r] = Some(p);
            return true;
        }
    }
    false
}

/// Whether an alternating path joins an unmatched player to an unmatched
/// resource, i.e. whether `m` is not maximum.
pub fn has_augmenting_path(g: &FatGraph, m: &Matching) -> bool {
    let free: Vec<usize> = (0..g.n_players()).filter(|&p| !m.is_matched(p)).collect();
    let reach = Reach::from_sources(g, m, &free);
    (0..g.n_resources()).any(|r| reach.resources[r] && m.player_of(r).is_none())
}

/// A vertex of the oriented graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Player(usize),
    Resource(usize),
}

/// Arcs of `G_M`: matched edges point from resource to player, unmatched edges
/// from player to resource.
pub fn orient(g: &FatGraph, m: &Matching) -> Vec<(Node, Node)> {
    g.edges()
        .map(|(p, r)| {
            if m.contains(p, r) {
                (Node::Resource(r), Node::Player(p))
            } else {
                (Node::Player(p), Node::Resource(r))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_empty_matching() {
        let g = FatGraph::new(0, 0, []);
        assert_eq!(max_matching(&g).size(), 0);
        let g = FatGraph::new(3, 2, []);
        assert_eq!(max_matching(&g).size(), 0);
    }

    #[test]
    fn complete_two_by_two() {
        let g = FatGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]);
        let m = max_matching(&g);
        assert_eq!(m.size(), 2);
        assert!(m.is_matching_of(&g));
        assert!(!has_augmenting_path(&g, &m));
    }

    #[test]
    fn shared_resource_path() {
        let g = FatGraph::new(2, 1, [(0, 0), (1, 0)]);
        assert_eq!(max_matching(&g).size(), 1);
    }

    #[test]
    fn kuhn_reroutes() {
        // p0 grabs r0 first; p1 only likes r0, so p0 must move to r1.
        let g = FatGraph::new(2, 2, [(0, 0), (0, 1), (1, 0)]);
        let m = max_matching(&g);
        assert_eq!(m.pairs(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn orientation_rule() {
        let g = FatGraph::new(1, 1, [(0, 0)]);
        let matched = Matching::from_pairs(1, 1, [(0, 0)]).unwrap();
        assert_eq!(orient(&g, &matched), vec![(Node::Resource(0), Node::Player(0))]);
        let unmatched = Matching::empty(1, 1);
        assert_eq!(orient(&g, &unmatched), vec![(Node::Player(0), Node::Resource(0))]);

        let g = FatGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]);
        let m = Matching::from_pairs(2, 2, [(0, 0), (1, 1)]).unwrap();
        let mut arcs = orient(&g, &m);
        arcs.sort();
        let mut expected = vec![
            (Node::Resource(0), Node::Player(0)),
            (Node::Resource(1), Node::Player(1)),
            (Node::Player(0), Node::Resource(1)),
            (Node::Player(1), Node::Resource(0)),
        ];
        expected.sort();
        assert_eq!(arcs, expected);
    }

    #[test]
    fn from_pairs_rejects_conflicts() {
        assert!(Matching::from_pairs(2, 1, [(0, 0), (1, 0)]).is_none());
    }
}
