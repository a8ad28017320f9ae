//! Energy barriers, decoder barrier and distance checks, and closed-form bounds.

mod bounds;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{
    barrier_constant_report, epsilon_bound, exact_tail_log, tmem_bound, BarrierConstantReport,
    BoundParams, BoundRow, EpsilonBound, TmemBound,
};

use crate::code::{signature, CssCode, InputDecoder};
use crate::decoder::Decoder;
use crate::gf2::{BitMatrix, BitVec};
use crate::lattice::{extract_syndrome, logical_action, LayerLattice};
use crate::pauli::{CheckMatrices, PauliError, PauliKind};
use crate::thermal::ThermalState;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("search budget of {budget} states exceeded")]
    BudgetExceeded { budget: usize },
    #[error("target class {target:#b} is not reachable")]
    Unreachable { target: u64 },
    #[error("no move fits penalty budget {budget} at step {step}")]
    SamplerStuck { budget: usize, step: usize },
    #[error("distance test needs an extended lattice")]
    NotExtended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Exact search; fails once more than `max_states` distinct states are stored.
    Exhaustive { max_states: usize },
    /// Keeps the `width` best states per depth; the result is an upper bound.
    Beam { width: usize, max_depth: usize },
}

/// Which logical classes end the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierTarget {
    /// Signature bitmask against the dual logicals.
    Class(u64),
    AnyNontrivial,
}

impl BarrierTarget {
    fn hit(self, class: u64) -> bool {
        match self {
            BarrierTarget::Class(c) => class == c,
            BarrierTarget::AnyNontrivial => class != 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarrierSearchResult {
    pub kind: PauliKind,
    pub target: BarrierTarget,
    /// Signature of the class actually reached.
    pub reached: u64,
    pub path: Vec<usize>,
    pub barrier: usize,
    pub exhaustive: bool,
    pub states: usize,
}

/// A barrier problem: checks detecting one error type plus the dual logicals that classify it.
pub struct BarrierProblem<'a> {
    pub checks: &'a CheckMatrices,
    pub dual: &'a [BitVec],
    pub kind: PauliKind,
}

impl<'a> BarrierProblem<'a> {
    pub fn for_code(checks: &'a CheckMatrices, code: &'a CssCode, kind: PauliKind) -> Self {
        BarrierProblem {
            checks,
            dual: code.dual_logicals(kind),
            kind,
        }
    }

    pub fn for_lattice(lat: &'a LayerLattice, kind: PauliKind) -> Self {
        let dual = match kind {
            PauliKind::X => &lat.logicals_z,
            PauliKind::Z => &lat.logicals_x,
        };
        BarrierProblem {
            checks: &lat.checks,
            dual,
            kind,
        }
    }

    /// Class change caused by each single flip once the syndrome is cleaned by a fixed linear correction.
    fn class_steps(&self) -> Vec<u64> {
        let h = self.checks.detecting(self.kind);
        let n = self.checks.num_qubits();
        let dense: BitMatrix = h.to_dense();
        let adj = self.checks.detecting_of(self.kind);
        (0..n)
            .map(|q| {
                let s = BitVec::from_indices(h.nrows(), adj.row(q).iter().map(|&c| c as usize));
                let mut e = dense.solve(&s).expect("single-flip syndrome is consistent");
                e.toggle(q);
                signature(self.dual, &e)
            })
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct State {
    lit: Vec<u32>,
    class: u64,
}

/// Symmetric difference of two sorted lists.
fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Lowest achievable maximum penalty over flip sequences from the identity to the target class.
///
/// States are errors modulo stabilizers, i.e. (syndrome, class) pairs. The exhaustive mode
/// explores them in order of the worst penalty seen so far, so the first target popped is optimal.
pub fn energy_barrier_search(
    problem: &BarrierProblem,
    target: BarrierTarget,
    mode: SearchMode,
) -> Result<BarrierSearchResult, AnalysisError> {
    let steps = problem.class_steps();
    let adj = problem.checks.detecting_of(problem.kind);
    let n = steps.len();
    let mut states: Vec<State> = vec![State {
        lit: Vec::new(),
        class: 0,
    }];
    let mut index: HashMap<State, usize> = HashMap::from([(states[0].clone(), 0)]);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut best: Vec<usize> = vec![0];
    let finish = |states: &Vec<State>,
                  parent: &Vec<Option<(usize, usize)>>,
                  end: usize,
                  barrier: usize,
                  exhaustive| {
        let mut path = Vec::new();
        let mut at = end;
        while let Some((p, q)) = parent[at] {
            path.push(q);
            at = p;
        }
        path.reverse();
        BarrierSearchResult {
            kind: problem.kind,
            target,
            reached: states[end].class,
            path,
            barrier,
            exhaustive,
            states: states.len(),
        }
    };
    match mode {
        SearchMode::Exhaustive { max_states } => {
            let mut heap = BinaryHeap::from([Reverse((0usize, 0usize))]);
            while let Some(Reverse((b, i))) = heap.pop() {
                if b > best[i] {
                    continue;
                }
                if states[i].lit.is_empty() && target.hit(states[i].class) {
                    return Ok(finish(&states, &parent, i, b, true));
                }
                for q in 0..n {
                    let lit = sym_diff(&states[i].lit, adj.row(q));
                    let nb = b.max(lit.len());
                    let next = State {
                        lit,
                        class: states[i].class ^ steps[q],
                    };
                    match index.get(&next) {
                        Some(&j) if best[j] <= nb => {}
                        Some(&j) => {
                            best[j] = nb;
                            parent[j] = Some((i, q));
                            heap.push(Reverse((nb, j)));
                        }
                        None => {
                            if states.len() >= max_states {
                                return Err(AnalysisError::BudgetExceeded { budget: max_states });
                            }
                            let j = states.len();
                            index.insert(next.clone(), j);
                            states.push(next);
                            parent.push(Some((i, q)));
                            best.push(nb);
                            heap.push(Reverse((nb, j)));
                        }
                    }
                }
            }
            Err(AnalysisError::Unreachable {
                target: target_mask(target),
            })
        }
        SearchMode::Beam { width, max_depth } => {
            let mut frontier = vec![0usize];
            let mut found: Option<(usize, usize)> = None;
            for _ in 0..max_depth {
                let mut next_frontier = Vec::new();
                for &i in &frontier {
                    for q in 0..n {
                        let lit = sym_diff(&states[i].lit, adj.row(q));
                        let nb = best[i].max(lit.len());
                        let next = State {
                            lit,
                            class: states[i].class ^ steps[q],
                        };
                        if index.contains_key(&next) {
                            continue;
                        }
                        let j = states.len();
                        let done = next.lit.is_empty() && target.hit(next.class);
                        index.insert(next.clone(), j);
                        states.push(next);
                        parent.push(Some((i, q)));
                        best.push(nb);
                        if done && found.is_none_or(|(fb, _)| nb < fb) {
                            found = Some((nb, j));
                        }
                        next_frontier.push(j);
                    }
                }
                if let Some((b, j)) = found {
                    return Ok(finish(&states, &parent, j, b, false));
                }
                next_frontier.sort_by(|&x, &y| {
                    (best[x], states[x].lit.len(), &states[x]).cmp(&(
                        best[y],
                        states[y].lit.len(),
                        &states[y],
                    ))
                });
                next_frontier.truncate(width);
                if next_frontier.is_empty() {
                    break;
                }
                frontier = next_frontier;
            }
            Err(AnalysisError::Unreachable {
                target: target_mask(target),
            })
        }
    }
}

fn target_mask(target: BarrierTarget) -> u64 {
    match target {
        BarrierTarget::Class(c) => c,
        BarrierTarget::AnyNontrivial => u64::MAX,
    }
}

/// Replays a flip sequence: returns the largest penalty along it and the final support.
pub fn replay_path(checks: &CheckMatrices, kind: PauliKind, path: &[usize]) -> (usize, BitVec) {
    let mut support = BitVec::zeros(checks.num_qubits());
    let mut worst = 0;
    for &q in path {
        support.toggle(q);
        worst = worst.max(checks.syndrome_of(&support, kind).weight());
    }
    (worst, support)
}

/// One decoded flip sequence that failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedSequence {
    pub flips: Vec<(usize, PauliKind)>,
    pub max_penalty: usize,
    pub transcript: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierTestReport {
    pub budget: usize,
    pub samples: usize,
    pub successes: usize,
    pub failures: Vec<FailedSequence>,
}

impl BarrierTestReport {
    pub fn success_fraction(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.successes as f64 / self.samples as f64
        }
    }
}

/// Decodes the endpoint of a flip sequence; returns success and the joined X then Z transcripts.
pub fn decode_endpoint(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    e: &PauliError,
) -> (bool, Vec<String>) {
    let lat = decoder.lattice();
    let s = extract_syndrome(lat, e);
    let mut transcript = Vec::new();
    let mut total = e.clone();
    for (kind, lit) in [(PauliKind::X, &s.m_lit), (PauliKind::Z, &s.e_lit)] {
        match decoder.decode(kind, lit, input) {
            Ok(r) => {
                transcript.extend(r.transcript);
                total.mul_assign(&r.correction);
            }
            Err(err) => {
                transcript.push(format!("error {err}"));
                return (false, transcript);
            }
        }
    }
    let ok = logical_action(lat, &total).is_ok_and(|a| a.iter().all(|c| c.is_trivial()));
    (ok, transcript)
}

/// Replays a mixed flip sequence, returning its peak penalty and whether decoding its endpoint succeeds.
pub fn replay_sequence(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    flips: &[(usize, PauliKind)],
) -> (usize, bool) {
    let lat = decoder.lattice();
    let mut state = ThermalState::new(&lat.checks, PauliError::identity(lat.num_qubits()));
    let mut worst = 0;
    for &(q, kind) in flips {
        state.apply(q, kind);
        worst = worst.max(state.energy());
    }
    (worst, decode_endpoint(decoder, input, state.error()).0)
}

/// Random single-flip walks of `length` steps that never exceed `budget`, each decoded at its end.
pub fn decoder_barrier_test(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    budget: usize,
    length: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<BarrierTestReport, AnalysisError> {
    let lat = decoder.lattice();
    let mut report = BarrierTestReport {
        budget,
        samples,
        successes: 0,
        failures: Vec::new(),
    };
    for _ in 0..samples {
        let mut state = ThermalState::new(&lat.checks, PauliError::identity(lat.num_qubits()));
        let mut flips = Vec::with_capacity(length);
        let mut worst = 0;
        for step in 0..length {
            let moves = state.moves_up_to(budget as i64 - state.energy() as i64);
            if moves.is_empty() {
                return Err(AnalysisError::SamplerStuck { budget, step });
            }
            let m = moves[rng.gen_range(0..moves.len())];
            let kind = if m.is_multiple_of(2) {
                PauliKind::X
            } else {
                PauliKind::Z
            };
            state.apply(m / 2, kind);
            flips.push((m / 2, kind));
            worst = worst.max(state.energy());
        }
        let (ok, transcript) = decode_endpoint(decoder, input, state.error());
        if ok {
            report.successes += 1;
        } else {
            report.failures.push(FailedSequence {
                flips,
                max_penalty: worst,
                transcript,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub weight: usize,
    pub trials: usize,
    pub successes: usize,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub rows: Vec<WeightRow>,
    /// Largest weight up to which every error of every smaller weight was enumerated and corrected.
    pub guaranteed_weight: usize,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Success of single-type errors by weight: enumerated while `C(n, w)` per kind fits
/// `budget`, otherwise `samples` random supports per kind.
pub fn distance_fraction_test(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    kinds: &[PauliKind],
    max_weight: usize,
    budget: u64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<DistanceReport, AnalysisError> {
    let lat = decoder.lattice();
    if !lat.params.extended {
        return Err(AnalysisError::NotExtended);
    }
    let n = lat.num_qubits();
    let mut rows = vec![WeightRow {
        weight: 0,
        trials: 1,
        successes: 1,
        exhaustive: true,
    }];
    let check = |kind: PauliKind, support: &[usize]| {
        let mut e = PauliError::identity(n);
        for &q in support {
            e.flip(q, kind);
        }
        decode_endpoint(decoder, input, &e).0
    };
    for w in 1..=max_weight.min(n) {
        let exhaustive = binomial(n, w) <= budget as u128;
        let mut row = WeightRow {
            weight: w,
            trials: 0,
            successes: 0,
            exhaustive,
        };
        for &kind in kinds {
            if exhaustive {
                for_each_subset(n, w, |s| {
                    row.trials += 1;
                    row.successes += usize::from(check(kind, s));
                });
            } else {
                for _ in 0..samples {
                    let s = rand::seq::index::sample(rng, n, w).into_vec();
                    row.trials += 1;
                    row.successes += usize::from(check(kind, &s));
                }
            }
        }
        rows.push(row);
    }
    let guaranteed_weight = rows
        .iter()
        .take_while(|r| r.exhaustive && r.successes == r.trials)
        .last()
        .map_or(0, |r| r.weight);
    Ok(DistanceReport {
        rows,
        guaranteed_weight,
    })
}

/// A failing error built from a lifted logical: the smallest prefix of its support (in qubit
/// order, at least half of it) that the decoder completes to the logical instead of removing.
pub fn halved_logical_witness(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    kind: PauliKind,
    logical: usize,
) -> Option<Vec<usize>> {
    let lat = decoder.lattice();
    let support: Vec<usize> = match kind {
        PauliKind::X => lat.logicals_x[logical].ones().collect(),
        PauliKind::Z => lat.logicals_z[logical].ones().collect(),
    };
    (support.len().div_ceil(2)..=support.len()).find_map(|len| {
        let mut e = PauliError::identity(lat.num_qubits());
        for &q in &support[..len] {
            e.flip(q, kind);
        }
        (!decode_endpoint(decoder, input, &e).0).then(|| support[..len].to_vec())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_counted() {
        let mut count = 0;
        for_each_subset(6, 3, |_| count += 1);
        assert_eq!(count as u128, binomial(6, 3));
        for_each_subset(3, 0, |s| assert!(s.is_empty()));
    }

    #[test]
    fn sym_diff_of_sorted_lists() {
        assert_eq!(sym_diff(&[1, 3, 5], &[3, 4]), vec![1, 4, 5]);
    }
}
