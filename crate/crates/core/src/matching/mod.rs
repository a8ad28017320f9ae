//! Per-layer minimum-weight perfect matching of syndrome sites.
//!
//! Each layer carries a syndrome graph for each check type. Its nodes are the
//! in-layer checks plus one virtual node per condensing boundary class, and its
//! edges are the layer's qubits. A matching is solved as a minimum T-join: the
//! terminals are the lit sites plus whichever boundary nodes are needed to fix
//! parity, and a perfect matching on the complete graph of shortest-path
//! distances between terminals gives the optimum.

mod blossom;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::gf2::BitVec;
use crate::lattice::{LayerLattice, SyndromeType};

pub use blossom::{max_weight_matching, min_weight_perfect_matching};

const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("check {site} of type {ty:?} is not on layer {layer}")]
    SiteOffLayer {
        site: usize,
        layer: usize,
        ty: SyndromeType,
    },
    #[error("layer {layer} has {sites} sites of type {ty:?} and no boundary to absorb an odd one")]
    InfeasibleParity {
        layer: usize,
        ty: SyndromeType,
        sites: usize,
    },
    #[error("layer {layer} has no pair of boundaries for syndromes of type {ty:?}")]
    NoOppositeSector { layer: usize, ty: SyndromeType },
}

/// Syndrome graph of one check type on one layer.
#[derive(Clone, Debug)]
pub struct LayerGraph {
    pub layer: usize,
    pub ty: SyndromeType,
    pub label: String,
    /// First global check id of this type on the layer.
    pub check_offset: usize,
    pub qubit_offset: usize,
    pub num_checks: usize,
    pub num_qubits: usize,
    pub num_classes: usize,
    /// Node adjacency as `(neighbour, local qubit)`.
    adj: Vec<Vec<(u32, u32)>>,
    /// Local qubits touching each boundary class.
    boundary_edges: Vec<Vec<u32>>,
}

/// Shortest-path tree from one node.
#[derive(Clone, Debug)]
struct Tree {
    dist: Vec<u32>,
    parent: Vec<(u32, u32)>,
}

impl LayerGraph {
    pub fn new(lat: &LayerLattice, layer: usize, ty: SyndromeType) -> Self {
        let l = &lat.layers[layer];
        let patch = &l.patch;
        let num_checks = l.checks(ty).len();
        let num_classes = l.boundary_classes(ty);
        let mut adj = vec![Vec::new(); num_checks + num_classes];
        let mut boundary_edges = vec![Vec::new(); num_classes];
        for e in 0..patch.num_edges() {
            let ends = match ty {
                SyndromeType::M => patch.edge_faces(e),
                SyndromeType::E => patch.edge_vertices(e),
            };
            let (a, b) = match ends.as_slice() {
                [a, b] => (*a, *b),
                [a] => {
                    debug_assert!(num_classes > 0, "dangling edge on a layer without boundary");
                    if num_classes == 0 {
                        continue;
                    }
                    let c = l.boundary_class_of(ty, e);
                    boundary_edges[c].push(e as u32);
                    (*a, num_checks + c)
                }
                _ => continue,
            };
            adj[a].push((b as u32, e as u32));
            adj[b].push((a as u32, e as u32));
        }
        LayerGraph {
            layer,
            ty,
            label: l.spec.label(),
            check_offset: l.checks(ty).start,
            qubit_offset: l.qubit_offset,
            num_checks,
            num_qubits: patch.num_edges(),
            num_classes,
            adj,
            boundary_edges,
        }
    }

    pub fn class_node(&self, class: usize) -> usize {
        self.num_checks + class
    }

    fn bfs(&self, src: usize) -> Tree {
        let n = self.adj.len();
        let mut dist = vec![UNREACHED; n];
        let mut parent = vec![(u32::MAX, u32::MAX); n];
        let mut queue = std::collections::VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &self.adj[x] {
                if dist[y as usize] == UNREACHED {
                    dist[y as usize] = dist[x] + 1;
                    parent[y as usize] = (x as u32, e);
                    queue.push_back(y as usize);
                }
            }
        }
        Tree { dist, parent }
    }

    fn path(tree: &Tree, target: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(tree.dist[target] as usize);
        let mut x = target;
        while tree.dist[x] != 0 {
            let (p, e) = tree.parent[x];
            out.push(e);
            x = p as usize;
        }
        out
    }

    /// In-layer syndrome of a local correction, as sorted local check ids.
    pub fn in_layer_syndrome(&self, correction: &BitVec) -> Vec<usize> {
        let mut lit = vec![false; self.num_checks];
        for x in 0..self.num_checks {
            for &(y, e) in &self.adj[x] {
                let _ = y;
                if correction.get(e as usize) {
                    lit[x] = !lit[x];
                }
            }
        }
        (0..self.num_checks).filter(|&x| lit[x]).collect()
    }

    /// Parity of a local correction's edges at each boundary class.
    pub fn boundary_parity(&self, correction: &BitVec) -> Vec<u8> {
        self.boundary_edges
            .iter()
            .map(|es| (es.iter().filter(|&&e| correction.get(e as usize)).count() % 2) as u8)
            .collect()
    }
}

/// Node of a matching: a lit site (local check id) or a boundary class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Terminal {
    Site(usize),
    Boundary(usize),
}

/// Complete graph over the lit sites of a layer and its boundary classes.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub base: Arc<LayerGraph>,
    /// Lit sites as sorted local check ids.
    pub sites: Vec<usize>,
    site_trees: Vec<Tree>,
    class_trees: Vec<Tree>,
}

pub fn build_matching_graph(
    base: Arc<LayerGraph>,
    global_sites: &[usize],
) -> Result<MatchingGraph, MatchingError> {
    let mut sites = Vec::with_capacity(global_sites.len());
    for &s in global_sites {
        if s < base.check_offset || s >= base.check_offset + base.num_checks {
            return Err(MatchingError::SiteOffLayer {
                site: s,
                layer: base.layer,
                ty: base.ty,
            });
        }
        sites.push(s - base.check_offset);
    }
    sites.sort_unstable();
    sites.dedup();
    let site_trees = sites.iter().map(|&s| base.bfs(s)).collect();
    let class_trees = if base.num_classes == 2 {
        vec![base.bfs(base.class_node(0))]
    } else {
        Vec::new()
    };
    Ok(MatchingGraph {
        base,
        sites,
        site_trees,
        class_trees,
    })
}

impl MatchingGraph {
    pub fn num_classes(&self) -> usize {
        self.base.num_classes
    }

    fn site_index(&self, site: usize) -> usize {
        self.sites.binary_search(&site).expect("site in graph")
    }

    /// Shortest-path length between two terminals, `None` if disconnected.
    pub fn distance(&self, a: Terminal, b: Terminal) -> Option<u32> {
        let d = match (a, b) {
            (Terminal::Site(s), t) | (t, Terminal::Site(s)) => {
                let tree = &self.site_trees[self.site_index(s)];
                match t {
                    Terminal::Site(r) => tree.dist[r],
                    Terminal::Boundary(c) => tree.dist[self.base.class_node(c)],
                }
            }
            (Terminal::Boundary(x), Terminal::Boundary(y)) => {
                if x == y {
                    0
                } else {
                    self.class_trees[0].dist[self.base.class_node(1)]
                }
            }
        };
        (d != UNREACHED).then_some(d)
    }

    /// Local qubits along a shortest path between two terminals.
    pub fn path(&self, a: Terminal, b: Terminal) -> Vec<u32> {
        match (a, b) {
            (Terminal::Site(s), t) | (t, Terminal::Site(s)) => {
                let tree = &self.site_trees[self.site_index(s)];
                let target = match t {
                    Terminal::Site(r) => r,
                    Terminal::Boundary(c) => self.base.class_node(c),
                };
                LayerGraph::path(tree, target)
            }
            (Terminal::Boundary(x), Terminal::Boundary(y)) => {
                if x == y {
                    Vec::new()
                } else {
                    LayerGraph::path(&self.class_trees[0], self.base.class_node(1))
                }
            }
        }
    }

    fn terminals(&self) -> Vec<Terminal> {
        self.sites.iter().map(|&s| Terminal::Site(s)).collect()
    }

    /// Minimum-weight perfect matching of a terminal set.
    fn solve(&self, terminals: &[Terminal]) -> Result<MatchingResult, MatchingError> {
        let infeasible = || MatchingError::InfeasibleParity {
            layer: self.base.layer,
            ty: self.base.ty,
            sites: self.sites.len(),
        };
        if terminals.len() % 2 == 1 {
            return Err(infeasible());
        }
        let big = 4 * (self.base.num_qubits as i64 + 1);
        let weight = |i: usize, j: usize| {
            self.distance(terminals[i], terminals[j])
                .map_or(big, i64::from)
        };
        let idx = min_weight_perfect_matching(terminals.len(), weight).ok_or_else(infeasible)?;
        let mut pairs: Vec<(Terminal, Terminal)> = idx
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = (terminals[i], terminals[j]);
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        pairs.sort_unstable();
        let mut correction = BitVec::zeros(self.base.num_qubits);
        let mut total = 0u32;
        for &(a, b) in &pairs {
            total += self.distance(a, b).ok_or_else(infeasible)?;
            for e in self.path(a, b) {
                correction.toggle(e as usize);
            }
        }
        let boundary_parity = self.base.boundary_parity(&correction);
        Ok(MatchingResult {
            layer: self.base.layer,
            ty: self.base.ty,
            pairs,
            correction,
            boundary_parity,
            weight: total,
        })
    }

    /// Terminal set for a given parity at boundary class 0 (two-class layers).
    fn sector_terminals(&self, p_left: usize) -> Vec<Terminal> {
        let mut t = self.terminals();
        let p_right = (self.sites.len() + p_left) % 2;
        if p_left == 1 {
            t.push(Terminal::Boundary(0));
        }
        if p_right == 1 {
            t.push(Terminal::Boundary(1));
        }
        t
    }

    /// Edge-list dump of the complete terminal graph.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "layer {} type {:?} sites {} classes {}",
            self.base.label,
            self.base.ty,
            self.sites.len(),
            self.num_classes()
        );
        let mut nodes = self.terminals();
        nodes.extend((0..self.num_classes()).map(Terminal::Boundary));
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if let Some(d) = self.distance(a, b) {
                    let path: Vec<String> = self
                        .path(a, b)
                        .iter()
                        .map(|&e| (e as usize + self.base.qubit_offset).to_string())
                        .collect();
                    let _ = writeln!(
                        out,
                        "{} {} {} {}",
                        fmt_terminal(a),
                        fmt_terminal(b),
                        d,
                        path.join(",")
                    );
                }
            }
        }
        out
    }
}

fn fmt_terminal(t: Terminal) -> String {
    match t {
        Terminal::Site(s) => format!("s{s}"),
        Terminal::Boundary(c) => format!("b{c}"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingResult {
    pub layer: usize,
    pub ty: SyndromeType,
    /// Matched terminal pairs, each ordered and the list sorted.
    pub pairs: Vec<(Terminal, Terminal)>,
    /// Correction over the layer's local qubits.
    pub correction: BitVec,
    pub boundary_parity: Vec<u8>,
    pub weight: u32,
}

impl MatchingResult {
    /// Global qubit ids of the correction.
    pub fn global_support(&self, base: &LayerGraph) -> Vec<usize> {
        self.correction
            .ones()
            .map(|e| e + base.qubit_offset)
            .collect()
    }
}

/// Minimum-weight matching of the graph's sites, boundaries absorbing any number.
pub fn mwpm(g: &MatchingGraph) -> Result<MatchingResult, MatchingError> {
    match g.num_classes() {
        0 => g.solve(&g.terminals()),
        1 => {
            let mut t = g.terminals();
            if t.len() % 2 == 1 {
                t.push(Terminal::Boundary(0));
            }
            g.solve(&t)
        }
        _ => {
            let a = g.solve(&g.sector_terminals(0))?;
            let b = g.solve(&g.sector_terminals(1))?;
            Ok(if b.weight < a.weight { b } else { a })
        }
    }
}

/// Minimum-weight matching with both boundary parities opposite to `reference`.
pub fn mwpm_minus(
    g: &MatchingGraph,
    reference: &MatchingResult,
) -> Result<MatchingResult, MatchingError> {
    if g.num_classes() < 2 {
        return Err(MatchingError::NoOppositeSector {
            layer: g.base.layer,
            ty: g.base.ty,
        });
    }
    let p_left = 1 - reference.boundary_parity[0] as usize;
    g.solve(&g.sector_terminals(p_left))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;
    use crate::lattice::build_layer_code;

    #[test]
    fn empty_grey_layer_has_identity_and_width_string() {
        let lat = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
        let grey = lat.grey(0);
        let base = Arc::new(LayerGraph::new(&lat, grey, SyndromeType::M));
        let g = build_matching_graph(base, &[]).unwrap();
        let r = mwpm(&g).unwrap();
        assert_eq!(r.weight, 0);
        assert!(r.correction.is_zero());
        let m = mwpm_minus(&g, &r).unwrap();
        // Smooth to smooth crosses W + 1 qubit columns.
        assert_eq!(m.weight as i64, lat.geometry.width + 1);
        assert_eq!(m.boundary_parity, vec![1, 1]);
    }

    #[test]
    fn single_site_near_left_boundary() {
        let lat = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
        let l = &lat.layers[lat.grey(0)];
        let base = Arc::new(LayerGraph::new(&lat, lat.grey(0), SyndromeType::M));
        let site = l.face(1, 2).unwrap();
        let g = build_matching_graph(base, &[site]).unwrap();
        let r = mwpm(&g).unwrap();
        assert_eq!(r.weight, 2);
        assert_eq!(r.boundary_parity, vec![1, 0]);
        let m = mwpm_minus(&g, &r).unwrap();
        assert_eq!(m.weight as i64, lat.geometry.width + 1 - 2);
        assert_eq!(m.boundary_parity, vec![0, 1]);
    }

    #[test]
    fn rejects_sites_from_other_layers() {
        let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
        let base = Arc::new(LayerGraph::new(&lat, lat.grey(0), SyndromeType::M));
        let other = lat.layers[lat.grey(1)].checks(SyndromeType::M).start;
        assert!(matches!(
            build_matching_graph(base, &[other]),
            Err(MatchingError::SiteOffLayer { .. })
        ));
    }

    #[test]
    fn red_layer_without_m_boundary_rejects_odd_count() {
        let lat = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
        let red = lat.red(0);
        let base = Arc::new(LayerGraph::new(&lat, red, SyndromeType::M));
        let site = lat.layers[red].checks(SyndromeType::M).start + 1;
        let g = build_matching_graph(base.clone(), &[site]).unwrap();
        assert!(matches!(
            mwpm(&g),
            Err(MatchingError::InfeasibleParity { .. })
        ));
        assert!(matches!(
            mwpm_minus(
                &g,
                &mwpm(&build_matching_graph(base, &[]).unwrap()).unwrap()
            ),
            Err(MatchingError::NoOppositeSector { .. })
        ));
    }
}
