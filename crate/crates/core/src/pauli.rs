use serde::{Deserialize, Serialize};

use crate::gf2::{BitVec, SparseMatrix};

/// The two Pauli error types of a CSS code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

impl PauliKind {
    pub fn other(self) -> PauliKind {
        match self {
            PauliKind::X => PauliKind::Z,
            PauliKind::Z => PauliKind::X,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliKind::X => 'X',
            PauliKind::Z => 'Z',
        }
    }
}

/// A Pauli frame: X and Z support over the physical qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliError {
    pub x_support: BitVec,
    pub z_support: BitVec,
}

impl PauliError {
    pub fn identity(n: usize) -> Self {
        PauliError {
            x_support: BitVec::zeros(n),
            z_support: BitVec::zeros(n),
        }
    }

    pub fn from_parts(x_support: BitVec, z_support: BitVec) -> Self {
        assert_eq!(x_support.len(), z_support.len(), "support length mismatch");
        PauliError {
            x_support,
            z_support,
        }
    }

    pub fn single(n: usize, qubit: usize, kind: PauliKind) -> Self {
        let mut p = Self::identity(n);
        p.flip(qubit, kind);
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.x_support.len()
    }

    pub fn support(&self, kind: PauliKind) -> &BitVec {
        match kind {
            PauliKind::X => &self.x_support,
            PauliKind::Z => &self.z_support,
        }
    }

    pub fn support_mut(&mut self, kind: PauliKind) -> &mut BitVec {
        match kind {
            PauliKind::X => &mut self.x_support,
            PauliKind::Z => &mut self.z_support,
        }
    }

    pub fn flip(&mut self, qubit: usize, kind: PauliKind) {
        self.support_mut(kind).toggle(qubit);
    }

    /// Multiplies in place (up to phase).
    pub fn mul_assign(&mut self, other: &PauliError) {
        self.x_support.xor_assign(&other.x_support);
        self.z_support.xor_assign(&other.z_support);
    }

    pub fn is_identity(&self) -> bool {
        self.x_support.is_zero() && self.z_support.is_zero()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits())
            .filter(|&q| self.x_support.get(q) || self.z_support.get(q))
            .count()
    }
}

/// Sparse X/Z check matrices with their column adjacency, the common input of
/// syndrome extraction, energy bookkeeping and thermal dynamics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckMatrices {
    pub hx: SparseMatrix,
    pub hz: SparseMatrix,
    /// X-checks touching each qubit.
    pub x_checks_of: SparseMatrix,
    /// Z-checks touching each qubit.
    pub z_checks_of: SparseMatrix,
}

impl CheckMatrices {
    pub fn new(hx: SparseMatrix, hz: SparseMatrix) -> Self {
        assert_eq!(
            hx.ncols(),
            hz.ncols(),
            "check matrices disagree on qubit count"
        );
        let x_checks_of = hx.transpose();
        let z_checks_of = hz.transpose();
        CheckMatrices {
            hx,
            hz,
            x_checks_of,
            z_checks_of,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.hx.ncols()
    }

    /// Checks that detect errors of `kind` (Z-checks for X errors).
    pub fn detecting(&self, kind: PauliKind) -> &SparseMatrix {
        match kind {
            PauliKind::X => &self.hz,
            PauliKind::Z => &self.hx,
        }
    }

    /// For each qubit, the checks that detect `kind` errors on it.
    pub fn detecting_of(&self, kind: PauliKind) -> &SparseMatrix {
        match kind {
            PauliKind::X => &self.z_checks_of,
            PauliKind::Z => &self.x_checks_of,
        }
    }

    /// Lit checks for a single-type error support.
    pub fn syndrome_of(&self, support: &BitVec, kind: PauliKind) -> BitVec {
        let adj = self.detecting_of(kind);
        let mut s = BitVec::zeros(self.detecting(kind).nrows());
        for q in support.ones() {
            for &c in adj.row(q) {
                s.toggle(c as usize);
            }
        }
        s
    }

    /// Number of violated checks of both types.
    pub fn energy_penalty(&self, p: &PauliError) -> usize {
        self.syndrome_of(&p.x_support, PauliKind::X).weight()
            + self.syndrome_of(&p.z_support, PauliKind::Z).weight()
    }
}
