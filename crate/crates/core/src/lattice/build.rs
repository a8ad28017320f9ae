use std::collections::BTreeSet;

use super::{
    Axis, BuildParams, DefectColor, DefectLine, Geometry, GreenAssignment, LatticeError, Layer,
    LayerKind, LayerLattice, LayerSpec, Patch, Plane,
};
use crate::code::CssCode;
use crate::gf2::{BitVec, SparseMatrix};
use crate::pauli::CheckMatrices;

/// Largest number of candidate junction positions searched exhaustively.
const GREEN_SEARCH_LIMIT: usize = 20;

fn support(row: &BitVec) -> Vec<usize> {
    row.ones().collect()
}

impl Geometry {
    pub fn new(code: &CssCode, scale: usize, extended: bool) -> Result<Geometry, LatticeError> {
        if scale < 2 {
            return Err(LatticeError::InvalidScale(scale));
        }
        if code.n == 0 {
            return Err(LatticeError::EmptyCode);
        }
        let s = scale as i64;
        let depth = s * (code.n as i64 + 1);
        let span = |row: &BitVec| -> (i64, i64) {
            if extended {
                return (0, depth);
            }
            let supp = support(row);
            match (supp.first(), supp.last()) {
                (Some(&f), Some(&l)) => (s * (f as i64 + 1) - 1, s * (l as i64 + 1) + 1),
                _ => (s - 1, s + 1),
            }
        };
        Ok(Geometry {
            scale: s,
            extended,
            width: s * (code.hz.rows() as i64 + 1),
            height: s * (code.hx.rows() as i64 + 1),
            depth,
            blue_spans: code.hx.row_vecs().iter().map(span).collect(),
            red_spans: code.hz.row_vecs().iter().map(span).collect(),
        })
    }
}

/// Junction positions where the parity of shared qubits at or below `y` is odd.
pub fn parity_green_assignment(code: &CssCode, geom: &Geometry) -> GreenAssignment {
    let mut out = GreenAssignment::new();
    for a in 0..code.hx.rows() {
        for b in 0..code.hz.rows() {
            let shared: Vec<i64> = code
                .hx
                .row(a)
                .ones()
                .filter(|&i| code.hz.get(b, i))
                .map(|i| geom.y_of_qubit(i))
                .collect();
            let mut ys = BTreeSet::new();
            for pair in shared.chunks(2) {
                if let [lo, hi] = *pair {
                    ys.extend(lo..hi);
                }
            }
            if !ys.is_empty() {
                out.insert((a, b), ys);
            }
        }
    }
    out
}

fn place_layers(code: &CssCode, geom: &Geometry) -> Vec<Layer> {
    let mut layers = Vec::new();
    let push = |spec: LayerSpec, patch: Patch, layers: &mut Vec<Layer>| {
        let (q, x, z) = layers.last().map_or((0, 0, 0), |l: &Layer| {
            (
                l.qubit_offset + l.patch.num_edges(),
                l.x_check_offset + l.patch.num_vertices(),
                l.z_check_offset + l.patch.num_faces(),
            )
        });
        layers.push(Layer {
            spec,
            patch,
            qubit_offset: q,
            x_check_offset: x,
            z_check_offset: z,
        });
    };
    let (w, h) = (geom.width, geom.height);
    for i in 0..code.n {
        let spec = LayerSpec {
            kind: LayerKind::Grey,
            plane: Plane::Xz,
            index: i,
            offset: geom.y_of_qubit(i),
            u_range: (0, w),
            v_range: (0, h),
        };
        push(
            spec,
            Patch::new(w as usize, h as usize, false, true),
            &mut layers,
        );
    }
    for (a, &(lo, hi)) in geom.blue_spans.iter().enumerate() {
        let spec = LayerSpec {
            kind: LayerKind::Blue,
            plane: Plane::Xy,
            index: a,
            offset: geom.z_of_xcheck(a),
            u_range: (0, w),
            v_range: (lo, hi),
        };
        push(
            spec,
            Patch::new(w as usize, (hi - lo) as usize, false, false),
            &mut layers,
        );
    }
    for (b, &(lo, hi)) in geom.red_spans.iter().enumerate() {
        let spec = LayerSpec {
            kind: LayerKind::Red,
            plane: Plane::Yz,
            index: b,
            offset: geom.x_of_zcheck(b),
            u_range: (lo, hi),
            v_range: (0, h),
        };
        push(
            spec,
            Patch::new((hi - lo) as usize, h as usize, true, true),
            &mut layers,
        );
    }
    layers
}

struct Assembly {
    layers: Vec<Layer>,
    hx: Vec<Vec<u32>>,
    hz: Vec<Vec<u32>>,
}

fn need(x: Option<usize>) -> Result<u32, ()> {
    x.map(|v| v as u32).ok_or(())
}

/// Builds check rows for a given junction assignment. Fails when the
/// assignment references an element that does not exist.
fn assemble(code: &CssCode, geom: &Geometry, green: &GreenAssignment) -> Result<Assembly, ()> {
    let layers = place_layers(code, geom);
    let n = code.n;
    let mx = code.hx.rows();
    let grey = |i: usize| &layers[i];
    let blue = |a: usize| &layers[n + a];
    let red = |b: usize| &layers[n + mx + b];

    let mut hx: Vec<Vec<u32>> = Vec::new();
    let mut hz: Vec<Vec<u32>> = Vec::new();
    for l in &layers {
        for vtx in 0..l.patch.num_vertices() {
            hx.push(
                l.patch
                    .vertex_edges(vtx)
                    .into_iter()
                    .map(|e| (e + l.qubit_offset) as u32)
                    .collect(),
            );
        }
        for f in 0..l.patch.num_faces() {
            hz.push(
                l.patch
                    .face_edges(f)
                    .into_iter()
                    .map(|e| (e + l.qubit_offset) as u32)
                    .collect(),
            );
        }
    }

    let (w, h) = (geom.width, geom.height);
    for b in 0..code.hz.rows() {
        let r = red(b);
        let x_b = geom.x_of_zcheck(b);
        let ylo = r.spec.u_range.0;
        for i in code.hz.row(b).ones() {
            let g = grey(i);
            let y = geom.y_of_qubit(i);
            // A red face beside the junction contains the grey edge on the junction.
            for v in 0..h {
                let face = need(r.face(y - 1 - ylo, v))?;
                hz[face as usize].push(need(g.v_edge(x_b, v))?);
            }
            // A grey vertex on the junction contains the red edge leading into it.
            for v in 1..h {
                let vtx = need(g.vertex(x_b, v))?;
                hx[vtx as usize].push(need(r.u_edge(y - 1 - ylo, v))?);
            }
        }
    }
    for a in 0..mx {
        let bl = blue(a);
        let z_a = geom.z_of_xcheck(a);
        let ylo = bl.spec.v_range.0;
        for i in code.hx.row(a).ones() {
            let g = grey(i);
            let y = geom.y_of_qubit(i);
            for u in 0..w {
                let face = need(g.face(u, z_a))?;
                hz[face as usize].push(need(bl.u_edge(u, y - ylo))?);
            }
            for u in 0..=w {
                let vtx = need(bl.vertex(u, y - ylo))?;
                hx[vtx as usize].push(need(g.v_edge(u, z_a))?);
            }
        }
    }
    for (&(a, b), ys) in green {
        let bl = blue(a);
        let r = red(b);
        let x_b = geom.x_of_zcheck(b);
        let z_a = geom.z_of_xcheck(a);
        let (blo, rlo) = (bl.spec.v_range.0, r.spec.u_range.0);
        for &y in ys {
            let face = need(r.face(y - rlo, z_a))?;
            hz[face as usize].push(need(bl.v_edge(x_b, y - blo))?);
            let vtx = need(bl.vertex(x_b, y - blo))?;
            hx[vtx as usize].push(need(r.v_edge(y - rlo, z_a))?);
        }
    }
    Ok(Assembly { layers, hx, hz })
}

fn defect_lines(code: &CssCode, geom: &Geometry, green: &GreenAssignment) -> Vec<DefectLine> {
    let n = code.n;
    let mx = code.hx.rows();
    let mut out = Vec::new();
    for a in 0..mx {
        for i in code.hx.row(a).ones() {
            out.push(DefectLine {
                color: DefectColor::Blue,
                axis: Axis::X,
                position: [geom.y_of_qubit(i), geom.z_of_xcheck(a)],
                span: (0, geom.width),
                participants: vec![i, n + a],
            });
        }
    }
    for b in 0..code.hz.rows() {
        for i in code.hz.row(b).ones() {
            out.push(DefectLine {
                color: DefectColor::Red,
                axis: Axis::Z,
                position: [geom.x_of_zcheck(b), geom.y_of_qubit(i)],
                span: (0, geom.height),
                participants: vec![i, n + mx + b],
            });
        }
    }
    for (&(a, b), ys) in green {
        let ys: Vec<i64> = ys.iter().copied().collect();
        let mut start = 0;
        for j in 1..=ys.len() {
            if j == ys.len() || ys[j] != ys[j - 1] + 1 {
                out.push(DefectLine {
                    color: DefectColor::Green,
                    axis: Axis::Y,
                    position: [geom.x_of_zcheck(b), geom.z_of_xcheck(a)],
                    span: (ys[start], ys[j - 1] + 1),
                    participants: vec![n + a, n + mx + b],
                });
                start = j;
            }
        }
    }
    out
}

fn commute(hx: &SparseMatrix, hz: &SparseMatrix) -> Option<(usize, usize)> {
    hx.odd_overlaps(hz).first().copied()
}

/// Assembles a lattice with an explicit junction assignment, without searching.
pub fn build_with_green(
    code: &CssCode,
    params: BuildParams,
    green: GreenAssignment,
) -> Result<LayerLattice, LatticeError> {
    let geom = Geometry::new(code, params.surface_scale, params.extended)?;
    let asm = assemble(code, &geom, &green).map_err(|_| LatticeError::DefectAssignmentFailure)?;
    let nq = asm
        .layers
        .last()
        .map_or(0, |l| l.qubit_offset + l.patch.num_edges());
    let hx = SparseMatrix::from_rows(nq, asm.hx);
    let hz = SparseMatrix::from_rows(nq, asm.hz);
    if let Some((x_check, z_check)) = commute(&hx, &hz) {
        return Err(LatticeError::CommutationViolation { x_check, z_check });
    }
    let mut qubit_layer = Vec::with_capacity(nq);
    for (id, l) in asm.layers.iter().enumerate() {
        qubit_layer.extend(std::iter::repeat_n(id as u32, l.patch.num_edges()));
    }
    let defects = defect_lines(code, &geom, &green);
    let mut lat = LayerLattice {
        code: code.clone(),
        params,
        geometry: geom,
        layers: asm.layers,
        defects,
        green,
        checks: CheckMatrices::new(hx, hz),
        qubit_layer,
        k: code.k,
        logicals_x: Vec::new(),
        logicals_z: Vec::new(),
    };
    super::logical::attach_lifted_logicals(&mut lat);
    Ok(lat)
}

/// Candidate junction positions for each (X-check, Z-check) pair: `y` values
/// inside both layers' spans.
fn green_candidates(code: &CssCode, geom: &Geometry) -> Vec<((usize, usize), i64)> {
    let mut out = Vec::new();
    for a in 0..code.hx.rows() {
        for b in 0..code.hz.rows() {
            let (bl, bh) = geom.blue_spans[a];
            let (rl, rh) = geom.red_spans[b];
            for y in bl.max(rl)..bh.min(rh) {
                out.push(((a, b), y));
            }
        }
    }
    out
}

/// Every junction assignment over the candidate positions that yields commuting
/// checks. Returns `None` when there are more than `limit` candidates.
pub fn search_green_assignments(
    code: &CssCode,
    params: BuildParams,
    limit: usize,
) -> Result<Option<Vec<GreenAssignment>>, LatticeError> {
    let geom = Geometry::new(code, params.surface_scale, params.extended)?;
    let cands = green_candidates(code, &geom);
    if cands.len() > limit {
        return Ok(None);
    }
    let mut found = Vec::new();
    for mask in 0u64..(1u64 << cands.len()) {
        let mut green = GreenAssignment::new();
        for (j, &(key, y)) in cands.iter().enumerate() {
            if mask >> j & 1 == 1 {
                green.entry(key).or_default().insert(y);
            }
        }
        let Ok(asm) = assemble(code, &geom, &green) else {
            continue;
        };
        let nq = asm
            .layers
            .last()
            .map_or(0, |l| l.qubit_offset + l.patch.num_edges());
        let hx = SparseMatrix::from_rows(nq, asm.hx);
        let hz = SparseMatrix::from_rows(nq, asm.hz);
        if commute(&hx, &hz).is_none() {
            found.push(green);
        }
    }
    Ok(Some(found))
}

/// Builds the layer code of `code`.
///
/// Blue/red junctions follow the parity rule; should that ever fail to commute,
/// small instances fall back to an exhaustive search over junction positions.
pub fn build_layer_code(
    code: &CssCode,
    surface_scale: usize,
    extended: bool,
) -> Result<LayerLattice, LatticeError> {
    let params = BuildParams {
        surface_scale,
        extended,
    };
    let geom = Geometry::new(code, surface_scale, extended)?;
    let green = parity_green_assignment(code, &geom);
    match build_with_green(code, params, green) {
        Err(LatticeError::CommutationViolation { .. })
        | Err(LatticeError::DefectAssignmentFailure) => {
            let found = search_green_assignments(code, params, GREEN_SEARCH_LIMIT)?
                .and_then(|v| v.into_iter().next())
                .ok_or(LatticeError::DefectAssignmentFailure)?;
            build_with_green(code, params, found)
        }
        other => other,
    }
}
