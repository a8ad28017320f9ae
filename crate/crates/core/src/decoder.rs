//! Four-stage concatenated matching decoder.
//!
//! For X errors, blue layers are matched first, then grey layers, then the
//! input code is decoded on the parities of the red layers and the selected
//! grey layers are flipped to their opposite sector, and finally red layers are
//! matched. Z errors follow the same schedule with blue and red swapped.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::code::{CodeError, InputDecoder};
use crate::gf2::BitVec;
use crate::lattice::{logical_action, LatticeSyndrome, LayerKind, LayerLattice, SyndromeType};
use crate::matching::{
    build_matching_graph, mwpm, mwpm_minus, LayerGraph, MatchingError, MatchingGraph,
    MatchingResult,
};
use crate::pauli::{PauliError, PauliKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("layer parities violate meta-checks {violated:?} of the input code")]
    InvalidSyndrome { violated: Vec<usize>, sigma: BitVec },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("input decoder failed: {0}")]
    Input(#[from] CodeError),
}

/// Timing and weight of one stage.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StageReport {
    pub stage: u8,
    pub layers_matched: usize,
    pub weight: usize,
    pub wall: Duration,
    /// Slowest single-layer solve in the stage.
    pub max_layer: Duration,
}

/// Working state of one decode.
#[derive(Clone, Debug)]
pub struct DecoderState {
    /// Accumulated correction support.
    pub correction: BitVec,
    /// Lit checks of the syndrome type being decoded.
    pub xi: BitVec,
    /// Parities of the last-stage layers, set after stage 3.
    pub sigma: Option<BitVec>,
    pub stage: u8,
    pub stage_reports: Vec<StageReport>,
}

#[derive(Clone, Debug)]
pub struct DecodeReport {
    pub correction: PauliError,
    pub sigma: BitVec,
    pub input_correction: BitVec,
    pub transcript: Vec<String>,
    pub stage_reports: Vec<StageReport>,
    pub input_time: Duration,
}

impl DecodeReport {
    /// Sum over stages of the slowest layer solve, plus the input decoder time.
    pub fn critical_path(&self) -> Duration {
        self.stage_reports
            .iter()
            .map(|r| r.max_layer)
            .sum::<Duration>()
            + self.input_time
    }
}

/// Layer colours visited first and last for an error kind, and the syndrome type.
fn schedule(kind: PauliKind) -> (LayerKind, LayerKind, SyndromeType) {
    match kind {
        PauliKind::X => (LayerKind::Blue, LayerKind::Red, SyndromeType::M),
        PauliKind::Z => (LayerKind::Red, LayerKind::Blue, SyndromeType::E),
    }
}

/// Decoder bound to a lattice, holding the per-layer syndrome graphs.
pub struct Decoder<'a> {
    lat: &'a LayerLattice,
    graphs_m: Vec<Arc<LayerGraph>>,
    graphs_e: Vec<Arc<LayerGraph>>,
    /// Recompute the syndrome from scratch after every stage and compare.
    pub audit: bool,
}

struct Solved {
    layer: usize,
    graph: MatchingGraph,
    result: MatchingResult,
    elapsed: Duration,
}

impl<'a> Decoder<'a> {
    pub fn new(lat: &'a LayerLattice) -> Self {
        let graphs = |ty| {
            (0..lat.layers.len())
                .into_par_iter()
                .map(|l| Arc::new(LayerGraph::new(lat, l, ty)))
                .collect()
        };
        Decoder {
            lat,
            graphs_m: graphs(SyndromeType::M),
            graphs_e: graphs(SyndromeType::E),
            audit: false,
        }
    }

    pub fn lattice(&self) -> &LayerLattice {
        self.lat
    }

    fn graph(&self, layer: usize, ty: SyndromeType) -> &Arc<LayerGraph> {
        match ty {
            SyndromeType::M => &self.graphs_m[layer],
            SyndromeType::E => &self.graphs_e[layer],
        }
    }

    /// Applies a correction support, updating the syndrome only at touched checks.
    fn apply(
        &self,
        state: &mut DecoderState,
        kind: PauliKind,
        qubits: impl IntoIterator<Item = usize>,
    ) {
        let touch = self.lat.checks.detecting_of(kind);
        for q in qubits {
            state.correction.toggle(q);
            for &c in touch.row(q) {
                state.xi.toggle(c as usize);
            }
        }
    }

    /// Lit sites grouped by the layers of one colour, in layer order.
    fn sites_on(&self, xi: &BitVec, kind: LayerKind, ty: SyndromeType) -> Vec<(usize, Vec<usize>)> {
        let ids = self.lat.layer_ids(kind);
        let mut out: Vec<(usize, Vec<usize>)> = ids.clone().map(|l| (l, Vec::new())).collect();
        for c in xi.ones() {
            let l = self.lat.layer_of_check(ty, c);
            if ids.contains(&l) {
                out[l - ids.start].1.push(c);
            }
        }
        out
    }

    fn match_layers(
        &self,
        sites: Vec<(usize, Vec<usize>)>,
        ty: SyndromeType,
    ) -> Result<Vec<Solved>, MatchingError> {
        sites
            .into_par_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(layer, s)| {
                let t = Instant::now();
                let graph = build_matching_graph(self.graph(layer, ty).clone(), &s)?;
                let result = mwpm(&graph)?;
                Ok(Solved {
                    layer,
                    graph,
                    result,
                    elapsed: t.elapsed(),
                })
            })
            .collect()
    }

    fn merge(
        &self,
        state: &mut DecoderState,
        kind: PauliKind,
        stage: u8,
        solved: &[Solved],
        wall: Duration,
        transcript: &mut Vec<String>,
    ) {
        let mut report = StageReport {
            stage,
            wall,
            ..StageReport::default()
        };
        for s in solved {
            let base = &s.graph.base;
            self.apply(state, kind, s.result.global_support(base));
            report.layers_matched += 1;
            report.weight += s.result.weight as usize;
            report.max_layer = report.max_layer.max(s.elapsed);
            transcript.push(format!(
                "stage{stage} layer={} sites={} weight={}",
                base.label,
                s.graph.sites.len(),
                s.result.weight
            ));
        }
        state.stage = stage;
        state.stage_reports.push(report);
    }

    fn audit_state(
        &self,
        state: &DecoderState,
        initial: &BitVec,
        kind: PauliKind,
    ) -> Result<(), DecodeError> {
        if !self.audit {
            return Ok(());
        }
        let mut expected = self.lat.checks.syndrome_of(&state.correction, kind);
        expected.xor_assign(initial);
        if expected != state.xi {
            return Err(DecodeError::InternalInconsistency(format!(
                "syndrome bookkeeping diverged after stage {}",
                state.stage
            )));
        }
        Ok(())
    }

    fn require_clear(
        &self,
        xi: &BitVec,
        kind: LayerKind,
        ty: SyndromeType,
        stage: u8,
    ) -> Result<(), DecodeError> {
        if let Some((l, s)) = self
            .sites_on(xi, kind, ty)
            .into_iter()
            .find(|(_, s)| !s.is_empty())
        {
            return Err(DecodeError::InternalInconsistency(format!(
                "{} sites remain on {} after stage {stage}",
                s.len(),
                self.lat.layers[l].spec.label()
            )));
        }
        Ok(())
    }

    /// Parities of lit sites on each layer of one colour.
    fn parities(&self, xi: &BitVec, kind: LayerKind, ty: SyndromeType) -> BitVec {
        let sites = self.sites_on(xi, kind, ty);
        BitVec::from_indices(
            sites.len(),
            sites
                .iter()
                .enumerate()
                .filter(|(_, (_, s))| s.len() % 2 == 1)
                .map(|(j, _)| j),
        )
    }

    /// Decodes the `kind`-error syndrome `lit` (checks of the type `kind` errors light).
    pub fn decode(
        &self,
        kind: PauliKind,
        lit: &BitVec,
        input: &dyn InputDecoder,
    ) -> Result<DecodeReport, DecodeError> {
        let lat = self.lat;
        let (first, last, ty) = schedule(kind);
        let mut state = DecoderState {
            correction: BitVec::zeros(lat.num_qubits()),
            xi: lit.clone(),
            sigma: None,
            stage: 0,
            stage_reports: Vec::new(),
        };
        let mut transcript = Vec::new();

        // Stage 1: first colour.
        let t = Instant::now();
        let solved = self.match_layers(self.sites_on(&state.xi, first, ty), ty)?;
        self.merge(&mut state, kind, 1, &solved, t.elapsed(), &mut transcript);
        self.require_clear(&state.xi, first, ty, 1)?;
        self.audit_state(&state, lit, kind)?;

        // Stage 2: grey layers, results kept for sector flips.
        let t = Instant::now();
        let grey_solved = self.match_layers(self.sites_on(&state.xi, LayerKind::Grey, ty), ty)?;
        self.merge(
            &mut state,
            kind,
            2,
            &grey_solved,
            t.elapsed(),
            &mut transcript,
        );
        self.require_clear(&state.xi, LayerKind::Grey, ty, 2)?;
        self.audit_state(&state, lit, kind)?;

        // Stage 3: input decoder on last-colour parities, then sector flips.
        let t = Instant::now();
        let sigma = self.parities(&state.xi, last, ty);
        let violated = lat.code.violated_meta_checks(&sigma, kind);
        if !violated.is_empty() {
            return Err(DecodeError::InvalidSyndrome { violated, sigma });
        }
        let t_input = Instant::now();
        let input_correction = input.decode(&lat.code, &sigma, kind)?;
        let input_time = t_input.elapsed();
        let mut flipped = Vec::new();
        let mut report = StageReport {
            stage: 3,
            ..StageReport::default()
        };
        for i in input_correction.ones() {
            let layer = lat.grey(i);
            let t_layer = Instant::now();
            let cached = grey_solved.iter().find(|s| s.layer == layer);
            let (graph, reference) = match cached {
                Some(s) => (s.graph.clone(), s.result.clone()),
                None => {
                    let g = build_matching_graph(self.graph(layer, ty).clone(), &[])?;
                    let r = mwpm(&g)?;
                    (g, r)
                }
            };
            let minus = mwpm_minus(&graph, &reference)?;
            let flip = reference.correction.xor(&minus.correction);
            if !graph.base.in_layer_syndrome(&flip).is_empty()
                || graph.base.boundary_parity(&flip).iter().any(|&p| p != 1)
            {
                return Err(DecodeError::InternalInconsistency(format!(
                    "sector flip on {} is not a boundary-to-boundary string",
                    graph.base.label
                )));
            }
            report.weight += flip.weight();
            report.layers_matched += 1;
            report.max_layer = report.max_layer.max(t_layer.elapsed());
            self.apply(
                &mut state,
                kind,
                flip.ones().map(|e| e + graph.base.qubit_offset),
            );
            flipped.push(graph.base.label.clone());
        }
        report.wall = t.elapsed();
        state.stage_reports.push(report);
        state.stage = 3;
        transcript.push(format!(
            "stage3 parity={} input_correction={} flipped={}",
            sigma.to_bit_string(),
            input_correction.to_bit_string(),
            if flipped.is_empty() {
                "none".to_string()
            } else {
                flipped.join(",")
            }
        ));
        let after = self.parities(&state.xi, last, ty);
        if !after.is_zero() {
            return Err(DecodeError::InternalInconsistency(format!(
                "{} parity {} still odd after stage 3",
                last.name(),
                after.to_bit_string()
            )));
        }
        state.sigma = Some(sigma.clone());
        self.audit_state(&state, lit, kind)?;

        // Stage 4: last colour.
        let t = Instant::now();
        let solved = self
            .match_layers(self.sites_on(&state.xi, last, ty), ty)
            .map_err(|e| match e {
                MatchingError::InfeasibleParity { .. } => {
                    DecodeError::InternalInconsistency(e.to_string())
                }
                other => other.into(),
            })?;
        self.merge(&mut state, kind, 4, &solved, t.elapsed(), &mut transcript);
        self.audit_state(&state, lit, kind)?;
        let residual = state.xi.weight();
        transcript.push(format!("final residual={residual}"));
        if residual != 0 {
            return Err(DecodeError::InternalInconsistency(format!(
                "{residual} syndrome sites remain after stage 4"
            )));
        }

        let correction = match kind {
            PauliKind::X => {
                PauliError::from_parts(state.correction, BitVec::zeros(lat.num_qubits()))
            }
            PauliKind::Z => {
                PauliError::from_parts(BitVec::zeros(lat.num_qubits()), state.correction)
            }
        };
        Ok(DecodeReport {
            correction,
            sigma,
            input_correction,
            transcript,
            stage_reports: state.stage_reports,
            input_time,
        })
    }

    /// Corrects both error kinds of a full syndrome.
    pub fn decode_both(
        &self,
        s: &LatticeSyndrome,
        input: &dyn InputDecoder,
    ) -> Result<PauliError, DecodeError> {
        let mut r = self.decode(PauliKind::X, &s.m_lit, input)?.correction;
        r.mul_assign(&self.decode(PauliKind::Z, &s.e_lit, input)?.correction);
        Ok(r)
    }
}

/// Decodes the face (`M`) sites of `s` into an X correction.
pub fn decode_x(
    lat: &LayerLattice,
    s: &LatticeSyndrome,
    input: &dyn InputDecoder,
) -> Result<PauliError, DecodeError> {
    Ok(Decoder::new(lat)
        .decode(PauliKind::X, &s.m_lit, input)?
        .correction)
}

/// Decodes the vertex (`E`) sites of `s` into a Z correction.
pub fn decode_z(
    lat: &LayerLattice,
    s: &LatticeSyndrome,
    input: &dyn InputDecoder,
) -> Result<PauliError, DecodeError> {
    Ok(Decoder::new(lat)
        .decode(PauliKind::Z, &s.e_lit, input)?
        .correction)
}

/// Checks layer parities against the input code's meta-checks; returns the violated rows.
pub fn metacheck_validate(
    lat: &LayerLattice,
    sigma: &BitVec,
    kind: PauliKind,
) -> Result<(), Vec<usize>> {
    let violated = lat.code.violated_meta_checks(sigma, kind);
    if violated.is_empty() {
        Ok(())
    } else {
        Err(violated)
    }
}

/// Whether decoding `e`'s syndrome returns it to the code space with trivial logical action.
pub fn recovery_map_check(decoder: &Decoder, e: &PauliError, input: &dyn InputDecoder) -> bool {
    let lat = decoder.lattice();
    let s = crate::lattice::extract_syndrome(lat, e);
    let Ok(r) = decoder.decode_both(&s, input) else {
        return false;
    };
    let mut total = e.clone();
    total.mul_assign(&r);
    match logical_action(lat, &total) {
        Ok(action) => action.iter().all(|a| a.is_trivial()),
        Err(_) => false,
    }
}
