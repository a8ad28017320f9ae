//! Unrotated surface-code patch: qubits on edges, Z-checks on faces, X-checks on vertices.
//!
//! Local coordinates run over `u ∈ [0, wu]`, `v ∈ [0, wv]`. A rough side has its
//! vertices and the edges lying along it removed, leaving dangling edges that
//! condense vertex syndromes. A smooth side keeps them, so edges along it touch
//! a single face and condense face syndromes.

use serde::{Deserialize, Serialize};

const ABSENT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeDir {
    /// From `(u, v)` to `(u + 1, v)`.
    U,
    /// From `(u, v)` to `(u, v + 1)`.
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub dir: EdgeDir,
    pub u: u32,
    pub v: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    pub wu: usize,
    pub wv: usize,
    /// The `u = 0` and `u = wu` sides are rough.
    pub rough_u: bool,
    /// The `v = 0` and `v = wv` sides are rough.
    pub rough_v: bool,
    vertex_ids: Vec<u32>,
    u_edge_ids: Vec<u32>,
    v_edge_ids: Vec<u32>,
    edges: Vec<Edge>,
    vertices: Vec<(u32, u32)>,
}

impl Patch {
    pub fn new(wu: usize, wv: usize, rough_u: bool, rough_v: bool) -> Self {
        assert!(wu >= 1 && wv >= 1, "patch must have at least one face");
        let on_u_side = |u: usize| rough_u && (u == 0 || u == wu);
        let on_v_side = |v: usize| rough_v && (v == 0 || v == wv);
        let mut p = Patch {
            wu,
            wv,
            rough_u,
            rough_v,
            vertex_ids: vec![ABSENT; (wu + 1) * (wv + 1)],
            u_edge_ids: vec![ABSENT; wu * (wv + 1)],
            v_edge_ids: vec![ABSENT; (wu + 1) * wv],
            edges: Vec::new(),
            vertices: Vec::new(),
        };
        for u in 0..=wu {
            for v in 0..=wv {
                if !on_u_side(u) && !on_v_side(v) {
                    p.vertex_ids[u * (wv + 1) + v] = p.vertices.len() as u32;
                    p.vertices.push((u as u32, v as u32));
                }
            }
        }
        // Edge order: all U-edges, then all V-edges, each in (u, v) order.
        for u in 0..wu {
            for v in 0..=wv {
                if !on_v_side(v) {
                    p.u_edge_ids[u * (wv + 1) + v] = p.edges.len() as u32;
                    p.edges.push(Edge {
                        dir: EdgeDir::U,
                        u: u as u32,
                        v: v as u32,
                    });
                }
            }
        }
        for u in 0..=wu {
            for v in 0..wv {
                if !on_u_side(u) {
                    p.v_edge_ids[u * wv + v] = p.edges.len() as u32;
                    p.edges.push(Edge {
                        dir: EdgeDir::V,
                        u: u as u32,
                        v: v as u32,
                    });
                }
            }
        }
        p
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.wu * self.wv
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn vertex_coords(&self, id: usize) -> (usize, usize) {
        let (u, v) = self.vertices[id];
        (u as usize, v as usize)
    }

    pub fn face_coords(&self, id: usize) -> (usize, usize) {
        (id / self.wv, id % self.wv)
    }

    pub fn vertex(&self, u: i64, v: i64) -> Option<usize> {
        if u < 0 || v < 0 || u as usize > self.wu || v as usize > self.wv {
            return None;
        }
        let id = self.vertex_ids[u as usize * (self.wv + 1) + v as usize];
        (id != ABSENT).then_some(id as usize)
    }

    pub fn u_edge(&self, u: i64, v: i64) -> Option<usize> {
        if u < 0 || v < 0 || u as usize >= self.wu || v as usize > self.wv {
            return None;
        }
        let id = self.u_edge_ids[u as usize * (self.wv + 1) + v as usize];
        (id != ABSENT).then_some(id as usize)
    }

    pub fn v_edge(&self, u: i64, v: i64) -> Option<usize> {
        if u < 0 || v < 0 || u as usize > self.wu || v as usize >= self.wv {
            return None;
        }
        let id = self.v_edge_ids[u as usize * self.wv + v as usize];
        (id != ABSENT).then_some(id as usize)
    }

    pub fn edge_id(&self, e: Edge) -> Option<usize> {
        match e.dir {
            EdgeDir::U => self.u_edge(e.u as i64, e.v as i64),
            EdgeDir::V => self.v_edge(e.u as i64, e.v as i64),
        }
    }

    pub fn face(&self, u: i64, v: i64) -> Option<usize> {
        if u < 0 || v < 0 || u as usize >= self.wu || v as usize >= self.wv {
            return None;
        }
        Some(u as usize * self.wv + v as usize)
    }

    /// Faces containing an edge (one or two).
    pub fn edge_faces(&self, id: usize) -> Vec<usize> {
        let e = self.edges[id];
        let (u, v) = (e.u as i64, e.v as i64);
        match e.dir {
            EdgeDir::U => [self.face(u, v - 1), self.face(u, v)],
            EdgeDir::V => [self.face(u - 1, v), self.face(u, v)],
        }
        .into_iter()
        .flatten()
        .collect()
    }

    /// Vertices at the ends of an edge that are present (one or two).
    pub fn edge_vertices(&self, id: usize) -> Vec<usize> {
        let e = self.edges[id];
        let (u, v) = (e.u as i64, e.v as i64);
        match e.dir {
            EdgeDir::U => [self.vertex(u, v), self.vertex(u + 1, v)],
            EdgeDir::V => [self.vertex(u, v), self.vertex(u, v + 1)],
        }
        .into_iter()
        .flatten()
        .collect()
    }

    pub fn face_edges(&self, id: usize) -> Vec<usize> {
        let (u, v) = self.face_coords(id);
        let (u, v) = (u as i64, v as i64);
        [
            self.u_edge(u, v),
            self.u_edge(u, v + 1),
            self.v_edge(u, v),
            self.v_edge(u + 1, v),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    pub fn vertex_edges(&self, id: usize) -> Vec<usize> {
        let (u, v) = self.vertex_coords(id);
        let (u, v) = (u as i64, v as i64);
        [
            self.u_edge(u - 1, v),
            self.u_edge(u, v),
            self.v_edge(u, v - 1),
            self.v_edge(u, v),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_counts() {
        // Smooth left/right, rough top/bottom.
        let p = Patch::new(4, 3, false, true);
        assert_eq!(p.num_edges(), 4 * 2 + 5 * 3);
        assert_eq!(p.num_vertices(), 5 * 2);
        assert_eq!(p.num_faces(), 12);
        let all_rough = Patch::new(4, 3, true, true);
        assert_eq!(all_rough.num_edges(), 4 * 2 + 3 * 3);
        let all_smooth = Patch::new(4, 3, false, false);
        assert_eq!(all_smooth.num_edges(), 4 * 4 + 5 * 3);
    }

    #[test]
    fn incidences_are_consistent() {
        for p in [
            Patch::new(3, 4, false, true),
            Patch::new(2, 2, true, true),
            Patch::new(3, 2, false, false),
        ] {
            for f in 0..p.num_faces() {
                for e in p.face_edges(f) {
                    assert!(p.edge_faces(e).contains(&f));
                }
            }
            for vtx in 0..p.num_vertices() {
                for e in p.vertex_edges(vtx) {
                    assert!(p.edge_vertices(e).contains(&vtx));
                }
            }
            for e in 0..p.num_edges() {
                assert!(!p.edge_faces(e).is_empty() || !p.edge_vertices(e).is_empty());
                assert_eq!(p.edge_id(p.edge(e)), Some(e));
            }
        }
    }
}
