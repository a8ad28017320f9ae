//! Three-dimensional layer codes assembled from surface-code patches.
//!
//! Every input qubit becomes a grey `xz` patch, every X-check a blue `xy` patch
//! with smooth boundaries and every Z-check a red `yz` patch with rough
//! boundaries. Patches are glued where the input Tanner graph has an edge, by
//! extra entries in the check matrices coupling neighbouring layers.

mod build;
mod io;
mod logical;
pub mod patch;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::CssCode;
use crate::gf2::{BitVec, SparseMatrix};
use crate::pauli::{CheckMatrices, PauliError, PauliKind};
pub use build::{
    build_layer_code, build_with_green, parity_green_assignment, search_green_assignments,
};
pub use io::{read_lattice, write_lattice};
pub use logical::{lift_x, lift_z, logical_action, logical_action_unchecked, LogicalClass};
pub use patch::{Edge, EdgeDir, Patch};
pub use validate::{
    certify_branching, expected_generators, validate_lattice, validate_lattice_with_limit,
    BranchingReport, Generator, ValidationReport,
};

/// Largest check weight produced by the construction.
pub const MAX_CHECK_WEIGHT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LayerKind {
    Grey,
    Blue,
    Red,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Grey => "grey",
            LayerKind::Blue => "blue",
            LayerKind::Red => "red",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    Xz,
    Xy,
    Yz,
}

/// Vertex syndromes (`E`, X-checks lit by Z errors) and face syndromes (`M`,
/// Z-checks lit by X errors).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SyndromeType {
    E,
    M,
}

impl SyndromeType {
    /// The syndrome type lit by errors of `kind`.
    pub fn lit_by(kind: PauliKind) -> SyndromeType {
        match kind {
            PauliKind::X => SyndromeType::M,
            PauliKind::Z => SyndromeType::E,
        }
    }
}

/// Placement of one layer. `u_range`/`v_range` are the patch extents in global
/// coordinates along the patch's two in-plane axes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub plane: Plane,
    pub index: usize,
    pub offset: i64,
    pub u_range: (i64, i64),
    pub v_range: (i64, i64),
}

impl LayerSpec {
    /// Global coordinates of a patch point given in half units.
    pub fn global_half(&self, u2: i64, v2: i64) -> [i64; 3] {
        let gu = u2 + 2 * self.u_range.0;
        let gv = v2 + 2 * self.v_range.0;
        let n = 2 * self.offset;
        match self.plane {
            Plane::Xz => [gu, n, gv],
            Plane::Xy => [gu, gv, n],
            Plane::Yz => [n, gu, gv],
        }
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.kind.name(), self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub patch: Patch,
    pub qubit_offset: usize,
    pub x_check_offset: usize,
    pub z_check_offset: usize,
}

impl Layer {
    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.qubit_offset..self.qubit_offset + self.patch.num_edges()
    }

    /// Global check range of a syndrome type on this layer.
    pub fn checks(&self, ty: SyndromeType) -> std::ops::Range<usize> {
        match ty {
            SyndromeType::E => self.x_check_offset..self.x_check_offset + self.patch.num_vertices(),
            SyndromeType::M => self.z_check_offset..self.z_check_offset + self.patch.num_faces(),
        }
    }

    pub fn u_edge(&self, u: i64, v: i64) -> Option<usize> {
        self.patch.u_edge(u, v).map(|e| e + self.qubit_offset)
    }

    pub fn v_edge(&self, u: i64, v: i64) -> Option<usize> {
        self.patch.v_edge(u, v).map(|e| e + self.qubit_offset)
    }

    pub fn face(&self, u: i64, v: i64) -> Option<usize> {
        self.patch.face(u, v).map(|f| f + self.z_check_offset)
    }

    pub fn vertex(&self, u: i64, v: i64) -> Option<usize> {
        self.patch.vertex(u, v).map(|x| x + self.x_check_offset)
    }

    /// Number of boundary classes condensing syndromes of `ty` on this layer.
    pub fn boundary_classes(&self, ty: SyndromeType) -> usize {
        match (self.spec.kind, ty) {
            (LayerKind::Grey, _) => 2,
            (LayerKind::Blue, SyndromeType::M) | (LayerKind::Red, SyndromeType::E) => 1,
            _ => 0,
        }
    }

    /// Boundary class absorbing the far end of a local edge with a single in-layer check of `ty`.
    ///
    /// Grey face syndromes condense on the left (0) or right (1) smooth side,
    /// grey vertex syndromes on the bottom (0) or top (1) rough side.
    pub fn boundary_class_of(&self, ty: SyndromeType, local_edge: usize) -> usize {
        if self.boundary_classes(ty) == 1 {
            return 0;
        }
        let e = self.patch.edge(local_edge);
        match ty {
            SyndromeType::M => usize::from(e.u as usize == self.patch.wu),
            SyndromeType::E => usize::from(e.v as usize + 1 == self.patch.wv),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DefectColor {
    Blue,
    Red,
    Green,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A junction line where two layers are glued.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectLine {
    pub color: DefectColor,
    pub axis: Axis,
    /// The two fixed coordinates, in axis order with `axis` skipped.
    pub position: [i64; 2],
    /// Extent along `axis`.
    pub span: (i64, i64),
    /// Layer ids of the glued layers.
    pub participants: Vec<usize>,
}

/// Per (X-check, Z-check) pair, the `y` positions where blue and red layers are glued.
pub type GreenAssignment = BTreeMap<(usize, usize), BTreeSet<i64>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildParams {
    pub surface_scale: usize,
    pub extended: bool,
}

/// Global placement of all layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub scale: i64,
    pub extended: bool,
    pub width: i64,
    pub height: i64,
    pub depth: i64,
    /// `y` span of each blue layer.
    pub blue_spans: Vec<(i64, i64)>,
    /// `y` span of each red layer.
    pub red_spans: Vec<(i64, i64)>,
}

impl Geometry {
    pub fn y_of_qubit(&self, i: usize) -> i64 {
        self.scale * (i as i64 + 1)
    }

    pub fn z_of_xcheck(&self, a: usize) -> i64 {
        self.scale * (a as i64 + 1)
    }

    pub fn x_of_zcheck(&self, b: usize) -> i64 {
        self.scale * (b as i64 + 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("surface scale must be at least 2, got {0}")]
    InvalidScale(usize),
    #[error("input code has no qubits")]
    EmptyCode,
    #[error("X-check {x_check} and Z-check {z_check} anticommute")]
    CommutationViolation { x_check: usize, z_check: usize },
    #[error("no junction assignment between X- and Z-check layers yields commuting checks")]
    DefectAssignmentFailure,
    #[error("operator has a nonempty syndrome of weight {0}")]
    NonCodeOperator(usize),
    #[error("lattice file error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("lattice file does not match its rebuilt construction: {0}")]
    Mismatch(String),
}

/// Location of a check on its layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CheckSite {
    pub layer: usize,
    pub u: usize,
    pub v: usize,
    pub ty: SyndromeType,
}

#[derive(Clone, Debug)]
pub struct LayerLattice {
    pub code: CssCode,
    pub params: BuildParams,
    pub geometry: Geometry,
    pub layers: Vec<Layer>,
    pub defects: Vec<DefectLine>,
    pub green: GreenAssignment,
    pub checks: CheckMatrices,
    pub qubit_layer: Vec<u32>,
    pub k: usize,
    /// X-type lifts of the input logicals, paired index by index with `logicals_z`.
    pub logicals_x: Vec<BitVec>,
    pub logicals_z: Vec<BitVec>,
}

impl LayerLattice {
    pub fn num_qubits(&self) -> usize {
        self.qubit_layer.len()
    }

    pub fn num_x_checks(&self) -> usize {
        self.checks.hx.nrows()
    }

    pub fn num_z_checks(&self) -> usize {
        self.checks.hz.nrows()
    }

    /// Total number of checks.
    pub fn check_count(&self) -> usize {
        self.num_x_checks() + self.num_z_checks()
    }

    /// Linear size: the largest side of the bounding box.
    pub fn linear_size(&self) -> usize {
        let g = &self.geometry;
        g.width.max(g.height).max(g.depth) as usize
    }

    pub fn hx(&self) -> &SparseMatrix {
        &self.checks.hx
    }

    pub fn hz(&self) -> &SparseMatrix {
        &self.checks.hz
    }

    pub fn grey(&self, i: usize) -> usize {
        i
    }

    pub fn blue(&self, a: usize) -> usize {
        self.code.n + a
    }

    pub fn red(&self, b: usize) -> usize {
        self.code.n + self.code.hx.rows() + b
    }

    pub fn layer_ids(&self, kind: LayerKind) -> std::ops::Range<usize> {
        let n = self.code.n;
        let mx = self.code.hx.rows();
        let mz = self.code.hz.rows();
        match kind {
            LayerKind::Grey => 0..n,
            LayerKind::Blue => n..n + mx,
            LayerKind::Red => n + mx..n + mx + mz,
        }
    }

    pub fn count_layers(&self, kind: LayerKind) -> usize {
        self.layer_ids(kind).len()
    }

    pub fn layer_of_qubit(&self, q: usize) -> usize {
        self.qubit_layer[q] as usize
    }

    /// Layer owning a check.
    pub fn layer_of_check(&self, ty: SyndromeType, c: usize) -> usize {
        let key = |l: &Layer| match ty {
            SyndromeType::E => l.x_check_offset,
            SyndromeType::M => l.z_check_offset,
        };
        let mut id = self.layers.partition_point(|l| key(l) <= c) - 1;
        // Skip layers with no checks of this type sharing the offset.
        while self.layers[id].checks(ty).is_empty() || !self.layers[id].checks(ty).contains(&c) {
            id -= 1;
        }
        id
    }

    pub fn check_site(&self, ty: SyndromeType, c: usize) -> CheckSite {
        let layer = self.layer_of_check(ty, c);
        let l = &self.layers[layer];
        let (u, v) = match ty {
            SyndromeType::E => l.patch.vertex_coords(c - l.x_check_offset),
            SyndromeType::M => l.patch.face_coords(c - l.z_check_offset),
        };
        CheckSite { layer, u, v, ty }
    }

    /// Coordinates of a qubit (edge midpoint) in half units.
    pub fn qubit_coord(&self, q: usize) -> [i64; 3] {
        let l = &self.layers[self.layer_of_qubit(q)];
        let e = l.patch.edge(q - l.qubit_offset);
        let (u2, v2) = match e.dir {
            EdgeDir::U => (2 * e.u as i64 + 1, 2 * e.v as i64),
            EdgeDir::V => (2 * e.u as i64, 2 * e.v as i64 + 1),
        };
        l.spec.global_half(u2, v2)
    }

    /// Coordinates of a check (face centre or vertex) in half units.
    pub fn check_coord(&self, ty: SyndromeType, c: usize) -> [i64; 3] {
        let site = self.check_site(ty, c);
        let (u2, v2) = match ty {
            SyndromeType::E => (2 * site.u as i64, 2 * site.v as i64),
            SyndromeType::M => (2 * site.u as i64 + 1, 2 * site.v as i64 + 1),
        };
        self.layers[site.layer].spec.global_half(u2, v2)
    }
}

/// Lit checks of a lattice Pauli operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSyndrome {
    /// Lit X-checks (vertex, `E` type).
    pub e_lit: BitVec,
    /// Lit Z-checks (face, `M` type).
    pub m_lit: BitVec,
}

impl LatticeSyndrome {
    pub fn empty(lat: &LayerLattice) -> Self {
        LatticeSyndrome {
            e_lit: BitVec::zeros(lat.num_x_checks()),
            m_lit: BitVec::zeros(lat.num_z_checks()),
        }
    }

    pub fn lit(&self, ty: SyndromeType) -> &BitVec {
        match ty {
            SyndromeType::E => &self.e_lit,
            SyndromeType::M => &self.m_lit,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.e_lit.is_zero() && self.m_lit.is_zero()
    }

    pub fn weight(&self) -> usize {
        self.e_lit.weight() + self.m_lit.weight()
    }

    /// Lit sites grouped by layer.
    pub fn by_layer(&self, lat: &LayerLattice) -> BTreeMap<usize, Vec<CheckSite>> {
        let mut out: BTreeMap<usize, Vec<CheckSite>> = BTreeMap::new();
        for ty in [SyndromeType::E, SyndromeType::M] {
            for c in self.lit(ty).ones() {
                let site = lat.check_site(ty, c);
                out.entry(site.layer).or_default().push(site);
            }
        }
        out
    }
}

pub fn extract_syndrome(lat: &LayerLattice, p: &PauliError) -> LatticeSyndrome {
    assert_eq!(
        p.num_qubits(),
        lat.num_qubits(),
        "error length must equal qubit count"
    );
    LatticeSyndrome {
        m_lit: lat.checks.syndrome_of(&p.x_support, PauliKind::X),
        e_lit: lat.checks.syndrome_of(&p.z_support, PauliKind::Z),
    }
}
