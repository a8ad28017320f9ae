//! Oracles shared by integration test targets.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use layercode::codes;
use layercode::lattice::{LayerKind, LayerLattice, SyndromeType};
use layercode::matching::{build_matching_graph, mwpm, mwpm_minus, LayerGraph, Terminal};
use layercode::pauli::{PauliError, PauliKind};
use layercode::thermal::{RateModel, ThermalState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: u32 = u32::MAX / 4;

/// Layer syndrome graph rebuilt from the check matrices and coordinates alone.
pub struct OracleGraph {
    pub checks: std::ops::Range<usize>,
    pub classes: usize,
    /// All-pairs distances over checks then classes.
    pub dist: Vec<Vec<u32>>,
    /// Per layer qubit: in-layer checks (local ids) it touches.
    pub touches: Vec<Vec<usize>>,
    /// Per layer qubit: boundary class for dangling qubits.
    pub class_of: Vec<Option<usize>>,
}

impl OracleGraph {
    pub fn new(lat: &LayerLattice, layer: usize, ty: SyndromeType) -> Self {
        let l = &lat.layers[layer];
        let checks = l.checks(ty);
        let of = match ty {
            SyndromeType::M => &lat.checks.z_checks_of,
            SyndromeType::E => &lat.checks.x_checks_of,
        };
        let classes = match (l.spec.kind, ty) {
            (LayerKind::Grey, _) => 2,
            (LayerKind::Blue, SyndromeType::M) | (LayerKind::Red, SyndromeType::E) => 1,
            _ => 0,
        };
        let n = checks.len() + classes;
        let mut dist = vec![vec![INF; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0;
        }
        let mut touches = Vec::new();
        let mut class_of = Vec::new();
        for q in l.qubits() {
            let local: Vec<usize> = of
                .row(q)
                .iter()
                .map(|&c| c as usize)
                .filter(|c| checks.contains(c))
                .map(|c| c - checks.start)
                .collect();
            let mut cls = None;
            let ends: Vec<usize> = match local.len() {
                2 => local.clone(),
                1 if classes > 0 => {
                    // Grey: X-type strings end left/right (x), Z-type bottom/top (z).
                    let c = if classes == 1 {
                        0
                    } else {
                        let coord = lat.qubit_coord(q);
                        match ty {
                            SyndromeType::M => usize::from(coord[0] > lat.geometry.width),
                            SyndromeType::E => usize::from(coord[2] > lat.geometry.height),
                        }
                    };
                    cls = Some(c);
                    vec![local[0], checks.len() + c]
                }
                _ => vec![],
            };
            if ends.len() == 2 {
                dist[ends[0]][ends[1]] = 1;
                dist[ends[1]][ends[0]] = 1;
            }
            touches.push(local);
            class_of.push(cls);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        OracleGraph {
            checks,
            classes,
            dist,
            touches,
            class_of,
        }
    }

    fn class_node(&self, c: usize) -> usize {
        self.checks.len() + c
    }

    /// Minimum weight per parity at class 0, over all ways to pair sites with
    /// each other or with boundary classes (plus an optional class-to-class string).
    pub fn best_by_sector(&self, sites: &[usize]) -> [Option<u32>; 2] {
        let mut best = [None::<u32>; 2];
        let mut used = vec![false; sites.len()];
        self.rec(sites, &mut used, 0, 0, &mut best);
        if self.classes == 2 {
            let lr = self.dist[self.class_node(0)][self.class_node(1)];
            let base = best;
            for p in 0..2 {
                if let Some(w) = base[p] {
                    let cand = w + lr;
                    let slot = &mut best[1 - p];
                    if slot.is_none_or(|b| cand < b) {
                        *slot = Some(cand);
                    }
                }
            }
        }
        best
    }

    fn rec(
        &self,
        sites: &[usize],
        used: &mut Vec<bool>,
        parity: usize,
        cost: u32,
        best: &mut [Option<u32>; 2],
    ) {
        let Some(i) = used.iter().position(|u| !u) else {
            let slot = &mut best[parity];
            if slot.is_none_or(|b| cost < b) {
                *slot = Some(cost);
            }
            return;
        };
        used[i] = true;
        for j in i + 1..sites.len() {
            if !used[j] {
                let d = self.dist[sites[i]][sites[j]];
                if d < INF {
                    used[j] = true;
                    self.rec(sites, used, parity, cost + d, best);
                    used[j] = false;
                }
            }
        }
        for c in 0..self.classes {
            let d = self.dist[sites[i]][self.class_node(c)];
            if d < INF {
                let p = if self.classes == 2 && c == 0 {
                    parity ^ 1
                } else {
                    parity
                };
                self.rec(sites, used, p, cost + d, best);
            }
        }
        used[i] = false;
    }

    /// In-layer syndrome (sorted local ids) and class parities of a local correction.
    pub fn effect(&self, correction: impl Iterator<Item = usize>) -> (Vec<usize>, Vec<u8>) {
        let mut lit = vec![false; self.checks.len()];
        let mut par = vec![0u8; self.classes];
        for e in correction {
            for &c in &self.touches[e] {
                lit[c] = !lit[c];
            }
            if let Some(c) = self.class_of[e] {
                par[c] ^= 1;
            }
        }
        ((0..lit.len()).filter(|&c| lit[c]).collect(), par)
    }
}

/// Random matching instance: a layer, a syndrome type and up to `max_sites` sites.
pub fn random_instance(
    lat: &LayerLattice,
    rng: &mut impl Rng,
    max_sites: usize,
) -> (usize, SyndromeType, Vec<usize>) {
    let layer = rng.gen_range(0..lat.layers.len());
    let ty = if rng.gen_bool(0.5) {
        SyndromeType::E
    } else {
        SyndromeType::M
    };
    let l = &lat.layers[layer];
    let all: Vec<usize> = l.checks(ty).collect();
    let mut k = rng.gen_range(0..=max_sites.min(all.len()));
    if l.boundary_classes(ty) == 0 && k % 2 == 1 {
        k -= 1;
    }
    let mut sites: Vec<usize> = all.choose_multiple(rng, k).copied().collect();
    sites.sort_unstable();
    (layer, ty, sites)
}

/// Checks one instance against the oracle; returns a description of the first mismatch.
pub fn check_matching_instance(
    lat: &LayerLattice,
    layer: usize,
    ty: SyndromeType,
    sites: &[usize],
) -> Result<(), String> {
    let oracle = OracleGraph::new(lat, layer, ty);
    let local: Vec<usize> = sites.iter().map(|s| s - oracle.checks.start).collect();
    let best = oracle.best_by_sector(&local);
    let base = Arc::new(LayerGraph::new(lat, layer, ty));
    let g = build_matching_graph(base, sites).map_err(|e| e.to_string())?;
    let r = mwpm(&g).map_err(|e| e.to_string())?;
    let opt = best.iter().flatten().min().copied();
    if Some(r.weight) != opt {
        return Err(format!("mwpm weight {} vs oracle {:?}", r.weight, opt));
    }
    let pair_sum: u32 = r
        .pairs
        .iter()
        .map(|&(a, b)| g.distance(a, b).unwrap_or(u32::MAX))
        .sum();
    if pair_sum != r.weight {
        return Err(format!(
            "pair weights sum to {pair_sum}, result says {}",
            r.weight
        ));
    }
    let (syn, par) = oracle.effect(r.correction.ones());
    if syn != local {
        return Err(format!(
            "mwpm correction lights {syn:?}, expected {local:?}"
        ));
    }
    if par != r.boundary_parity {
        return Err(format!(
            "boundary parity {:?} vs recomputed {par:?}",
            r.boundary_parity
        ));
    }
    for &(a, b) in &r.pairs {
        for t in [a, b] {
            if let Terminal::Site(s) = t {
                if !local.contains(&s) {
                    return Err(format!("pair uses unknown site {s}"));
                }
            }
        }
    }
    if oracle.classes == 2 {
        let m = mwpm_minus(&g, &r).map_err(|e| e.to_string())?;
        let target = 1 - r.boundary_parity[0] as usize;
        if Some(m.weight) != best[target] {
            return Err(format!(
                "mwpm_minus weight {} vs oracle {:?}",
                m.weight, best[target]
            ));
        }
        let (syn, par) = oracle.effect(m.correction.ones());
        if syn != local {
            return Err(format!("mwpm_minus correction lights {syn:?}"));
        }
        if par.iter().zip(&r.boundary_parity).any(|(a, b)| a == b) {
            return Err(format!(
                "mwpm_minus parities {par:?} not opposite to {:?}",
                r.boundary_parity
            ));
        }
        let product = r.correction.xor(&m.correction);
        let (syn, _) = oracle.effect(product.ones());
        if !syn.is_empty() {
            return Err("product of mwpm and mwpm_minus is not syndrome free".into());
        }
    }
    Ok(())
}

/// Pauli error of one kind on the given qubits.
pub fn error_on(lat: &LayerLattice, kind: PauliKind, qubits: &[usize]) -> PauliError {
    let mut e = PauliError::identity(lat.num_qubits());
    for &q in qubits {
        e.flip(q, kind);
    }
    e
}

/// Blue interior error, an X string on the first grey layer ending two columns
/// from its left side and crossing the red layer, and a red interior error.
pub fn scenario_x(lat: &LayerLattice) -> PauliError {
    let blue = &lat.layers[lat.blue(0)];
    let grey = &lat.layers[lat.grey(0)];
    let red = &lat.layers[lat.red(0)];
    let mut q = vec![blue.u_edge(1, 2).unwrap()];
    q.extend((2..=lat.geometry.width).map(|u| grey.v_edge(u, 1).unwrap()));
    q.push(red.v_edge(5, 1).unwrap());
    error_on(lat, PauliKind::X, &q)
}

/// The Z counterpart: red interior error, a Z column on the first grey layer
/// crossing the blue layer, and a blue interior error.
pub fn scenario_z(lat: &LayerLattice) -> PauliError {
    let blue = &lat.layers[lat.blue(0)];
    let grey = &lat.layers[lat.grey(0)];
    let red = &lat.layers[lat.red(0)];
    let mut q = vec![red.v_edge(5, 1).unwrap()];
    q.extend((2..lat.geometry.height).map(|v| grey.v_edge(1, v).unwrap()));
    q.push(blue.u_edge(4, 5).unwrap());
    error_on(lat, PauliKind::Z, &q)
}

/// Time-weighted occupation of all Pauli configurations on a small code against Gibbs weights.
pub fn gibbs_total_variation(events: usize, beta: f64, seed: u64) -> f64 {
    let code = codes::four_two_two();
    let checks = code.check_matrices();
    let n = code.n;
    let model = RateModel::metropolis(beta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ThermalState::new(&checks, PauliError::identity(n));
    let key = |e: &PauliError| -> usize {
        (0..n).fold(0, |acc, q| {
            acc | (usize::from(e.x_support.get(q)) << q)
                | (usize::from(e.z_support.get(q)) << (n + q))
        })
    };
    let mut occupation: HashMap<usize, f64> = HashMap::new();
    let mut total_time = 0.0;
    for _ in 0..events {
        let k = key(s.error());
        let before = s.time;
        s.step(&model, &mut rng).unwrap();
        *occupation.entry(k).or_default() += s.time - before;
        total_time += s.time - before;
    }
    let states = 1usize << (2 * n);
    let mut weights = vec![0.0; states];
    for (k, w) in weights.iter_mut().enumerate() {
        let mut e = PauliError::identity(n);
        for q in 0..n {
            if k >> q & 1 == 1 {
                e.flip(q, PauliKind::X);
            }
            if k >> (n + q) & 1 == 1 {
                e.flip(q, PauliKind::Z);
            }
        }
        *w = (-beta * checks.energy_penalty(&e) as f64).exp();
    }
    let z: f64 = weights.iter().sum();
    0.5 * (0..states)
        .map(|k| (occupation.get(&k).copied().unwrap_or(0.0) / total_time - weights[k] / z).abs())
        .sum::<f64>()
}
