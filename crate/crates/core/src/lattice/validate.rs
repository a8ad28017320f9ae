use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Axis, DefectColor, LayerKind, LayerLattice, SyndromeType, MAX_CHECK_WEIGHT};
use crate::pauli::PauliKind;

/// Rank computations are skipped above this many qubits.
pub const DEFAULT_RANK_LIMIT: usize = 200_000;

/// Largest per-axis spread of a check's support, in half units.
const MAX_EXTENT_HALF: i64 = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub qubits: usize,
    pub x_checks: usize,
    pub z_checks: usize,
    pub anticommuting_pairs: usize,
    /// `None` when ranks were skipped for size.
    pub k: Option<usize>,
    pub expected_k: usize,
    pub max_check_weight: usize,
    pub max_check_extent_half: i64,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_lattice(lat: &LayerLattice, expected_k: usize) -> ValidationReport {
    validate_lattice_with_limit(lat, expected_k, DEFAULT_RANK_LIMIT)
}

pub fn validate_lattice_with_limit(
    lat: &LayerLattice,
    expected_k: usize,
    rank_limit: usize,
) -> ValidationReport {
    let mut violations = Vec::new();
    let hx = lat.hx();
    let hz = lat.hz();
    let bad = hx.odd_overlaps(hz);
    for &(x, z) in bad.iter().take(5) {
        violations.push(format!("X-check {x} anticommutes with Z-check {z}"));
    }
    let k = (lat.num_qubits() <= rank_limit).then(|| lat.num_qubits() - hx.rank() - hz.rank());
    if let Some(k) = k {
        if k != expected_k {
            violations.push(format!("k = {k}, expected {expected_k}"));
        }
    }
    let max_check_weight = hx.max_row_weight().max(hz.max_row_weight());
    if max_check_weight > MAX_CHECK_WEIGHT {
        violations.push(format!(
            "check weight {max_check_weight} exceeds {MAX_CHECK_WEIGHT}"
        ));
    }
    let mut max_extent = 0;
    for m in [hx, hz] {
        for row in m.rows() {
            for axis in 0..3 {
                let coords = row.iter().map(|&q| lat.qubit_coord(q as usize)[axis]);
                let (lo, hi) =
                    coords.fold((i64::MAX, i64::MIN), |(lo, hi), c| (lo.min(c), hi.max(c)));
                if lo <= hi {
                    max_extent = max_extent.max(hi - lo);
                }
            }
        }
    }
    if max_extent > MAX_EXTENT_HALF {
        violations.push(format!("check support spans {max_extent} half units"));
    }
    for (j, (x, z)) in lat.logicals_x.iter().zip(&lat.logicals_z).enumerate() {
        if !hz.mul_vec(x).is_zero() {
            violations.push(format!("lifted X-logical {j} violates Z-checks"));
        }
        if !hx.mul_vec(z).is_zero() {
            violations.push(format!("lifted Z-logical {j} violates X-checks"));
        }
        for (jj, zz) in lat.logicals_z.iter().enumerate() {
            if x.dot(zz) != (j == jj) {
                violations.push(format!(
                    "lifted logicals {j} and {jj} have the wrong overlap"
                ));
            }
        }
    }
    ValidationReport {
        qubits: lat.num_qubits(),
        x_checks: lat.num_x_checks(),
        z_checks: lat.num_z_checks(),
        anticommuting_pairs: bad.len(),
        k,
        expected_k,
        max_check_weight,
        max_check_extent_half: max_extent,
        violations,
    }
}

/// A syndrome created on `target` by a single flip on `source` at a junction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub source: LayerKind,
    pub target: LayerKind,
    pub ty: SyndromeType,
}

/// Branching of single-qubit probes across junctions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchingReport {
    pub observed: BTreeMap<DefectColor, BTreeSet<Generator>>,
    pub expected: BTreeMap<DefectColor, BTreeSet<Generator>>,
    /// Probes that branch somewhere unexpected.
    pub stray: Vec<String>,
}

impl BranchingReport {
    pub fn passed(&self) -> bool {
        self.stray.is_empty() && self.observed == self.expected
    }
}

/// The condensation generators each junction colour must realize.
pub fn expected_generators(color: DefectColor) -> BTreeSet<Generator> {
    use LayerKind::*;
    use SyndromeType::*;
    let g = |source, target, ty| Generator { source, target, ty };
    match color {
        DefectColor::Red => [g(Grey, Red, M), g(Red, Grey, E)].into(),
        DefectColor::Blue => [g(Blue, Grey, M), g(Grey, Blue, E)].into(),
        DefectColor::Green => [g(Blue, Red, M), g(Red, Blue, E)].into(),
    }
}

fn distance_to_line(axis: Axis, position: [i64; 2], p: [i64; 3]) -> i64 {
    let (a, b) = match axis {
        Axis::X => (p[1], p[2]),
        Axis::Y => (p[0], p[2]),
        Axis::Z => (p[0], p[1]),
    };
    (a - 2 * position[0]).abs().max((b - 2 * position[1]).abs())
}

/// Flips every qubit with X and Z in turn and records which other layers light up.
pub fn certify_branching(lat: &LayerLattice) -> BranchingReport {
    let mut observed: BTreeMap<DefectColor, BTreeSet<Generator>> = BTreeMap::new();
    let mut stray = Vec::new();
    for q in 0..lat.num_qubits() {
        let own = lat.layer_of_qubit(q);
        for kind in [PauliKind::X, PauliKind::Z] {
            let ty = SyndromeType::lit_by(kind);
            let mut per_layer: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &c in lat.checks.detecting_of(kind).row(q) {
                per_layer
                    .entry(lat.layer_of_check(ty, c as usize))
                    .or_default()
                    .push(c as usize);
            }
            for (&other, lit) in &per_layer {
                if other == own {
                    continue;
                }
                if lit.len() != 1 {
                    stray.push(format!(
                        "{kind:?} on qubit {q} lights {} checks on layer {other}",
                        lit.len()
                    ));
                }
                let line = lat.defects.iter().find(|d| {
                    d.participants.contains(&own)
                        && d.participants.contains(&other)
                        && lit.iter().all(|&c| {
                            distance_to_line(d.axis, d.position, lat.check_coord(ty, c)) <= 2
                        })
                });
                match line {
                    Some(d) => {
                        observed.entry(d.color).or_default().insert(Generator {
                            source: lat.layers[own].spec.kind,
                            target: lat.layers[other].spec.kind,
                            ty,
                        });
                    }
                    None => stray.push(format!(
                        "{kind:?} on qubit {q} ({}) branches into {} away from any junction",
                        lat.layers[own].spec.label(),
                        lat.layers[other].spec.label()
                    )),
                }
            }
        }
    }
    let expected = lat
        .defects
        .iter()
        .map(|d| (d.color, expected_generators(d.color)))
        .collect();
    BranchingReport {
        observed,
        expected,
        stray,
    }
}
