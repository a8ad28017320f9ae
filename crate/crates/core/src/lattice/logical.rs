use serde::{Deserialize, Serialize};

use super::{extract_syndrome, LatticeError, LayerLattice};
use crate::gf2::BitVec;
use crate::pauli::PauliError;

/// Action of an operator on one logical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalClass {
    I,
    X,
    Z,
    Y,
}

impl LogicalClass {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => LogicalClass::I,
            (true, false) => LogicalClass::X,
            (false, true) => LogicalClass::Z,
            (true, true) => LogicalClass::Y,
        }
    }

    pub fn is_trivial(self) -> bool {
        self == LogicalClass::I
    }
}

/// Pairs up the junction points of a check layer in `y` order.
fn pair_up(ys: &mut [i64]) -> Vec<(i64, i64)> {
    ys.sort_unstable();
    debug_assert!(
        ys.len().is_multiple_of(2),
        "logical meets a check layer an odd number of times"
    );
    ys.chunks(2).map(|p| (p[0], p[1])).collect()
}

/// X-type lattice operator carrying the input X-logical `x`: a row of grey
/// edges across each grey layer in `x`, closed up by segments in the red layers.
pub fn lift_x(lat: &LayerLattice, x: &BitVec) -> BitVec {
    let geom = &lat.geometry;
    let mut out = BitVec::zeros(lat.num_qubits());
    for i in x.ones() {
        let g = &lat.layers[lat.grey(i)];
        for u in 0..=geom.width {
            out.toggle(g.v_edge(u, 0).expect("grey edge"));
        }
    }
    for b in 0..lat.code.hz.rows() {
        let r = &lat.layers[lat.red(b)];
        let mut ys: Vec<i64> = x
            .ones()
            .filter(|&i| lat.code.hz.get(b, i))
            .map(|i| geom.y_of_qubit(i))
            .collect();
        for (lo, hi) in pair_up(&mut ys) {
            for y in lo..hi {
                out.toggle(r.v_edge(y - r.spec.u_range.0, 0).expect("red edge"));
            }
        }
    }
    out
}

/// Z-type lattice operator carrying the input Z-logical `z`: a column of grey
/// edges from bottom to top, closed up by segments in the blue layers.
pub fn lift_z(lat: &LayerLattice, z: &BitVec) -> BitVec {
    let geom = &lat.geometry;
    let mut out = BitVec::zeros(lat.num_qubits());
    for i in z.ones() {
        let g = &lat.layers[lat.grey(i)];
        for v in 0..geom.height {
            out.toggle(g.v_edge(0, v).expect("grey edge"));
        }
    }
    for a in 0..lat.code.hx.rows() {
        let bl = &lat.layers[lat.blue(a)];
        let mut ys: Vec<i64> = z
            .ones()
            .filter(|&i| lat.code.hx.get(a, i))
            .map(|i| geom.y_of_qubit(i))
            .collect();
        for (lo, hi) in pair_up(&mut ys) {
            for y in lo..hi {
                out.toggle(bl.v_edge(0, y - bl.spec.v_range.0).expect("blue edge"));
            }
        }
    }
    out
}

pub(super) fn attach_lifted_logicals(lat: &mut LayerLattice) {
    let xs: Vec<BitVec> = lat.code.logicals_x.iter().map(|x| lift_x(lat, x)).collect();
    let zs: Vec<BitVec> = lat.code.logicals_z.iter().map(|z| lift_z(lat, z)).collect();
    lat.logicals_x = xs;
    lat.logicals_z = zs;
}

/// Per logical qubit, the class of a syndrome-free operator.
pub fn logical_action(
    lat: &LayerLattice,
    p: &PauliError,
) -> Result<Vec<LogicalClass>, LatticeError> {
    let s = extract_syndrome(lat, p);
    if !s.is_empty() {
        return Err(LatticeError::NonCodeOperator(s.weight()));
    }
    Ok(logical_action_unchecked(lat, p))
}

/// Logical classes without checking the syndrome.
pub fn logical_action_unchecked(lat: &LayerLattice, p: &PauliError) -> Vec<LogicalClass> {
    (0..lat.k)
        .map(|j| {
            LogicalClass::from_bits(
                p.x_support.dot(&lat.logicals_z[j]),
                p.z_support.dot(&lat.logicals_x[j]),
            )
        })
        .collect()
}
