//! CSS input codes: validation, logical bases, exhaustive distance search and
//! the exact minimum-weight decoder used in place of a fast input-code decoder.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::gf2::{rank_of_rows, BitMatrix, BitVec, SparseMatrix};
use crate::pauli::{CheckMatrices, PauliError, PauliKind};

/// Upper bound on enumerated candidates in exhaustive searches.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("X-check {x_row} and Z-check {z_row} overlap on an odd number of qubits")]
    CommutationViolation { x_row: usize, z_row: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("search budget of {budget} candidates exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("syndrome violates meta-checks {violated:?}")]
    InvalidSyndrome { violated: Vec<usize> },
    #[error("code has no logical qubits")]
    NoLogicals,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A validated `[[n, k]]` CSS code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub n: usize,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    pub k: usize,
    /// `logicals_x[i]` anticommutes with `logicals_z[i]` and commutes with every other Z-logical.
    pub logicals_x: Vec<BitVec>,
    pub logicals_z: Vec<BitVec>,
    /// Maximum check weight over both check types.
    pub w: usize,
    /// Maximum number of checks (of either type) acting on one qubit.
    pub w_prime: usize,
    /// Linear dependencies among X-check rows.
    pub meta_x: Vec<BitVec>,
    /// Linear dependencies among Z-check rows.
    pub meta_z: Vec<BitVec>,
}

/// Lit checks of an input code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSyndrome {
    pub x_checks_lit: BitVec,
    pub z_checks_lit: BitVec,
}

impl InputSyndrome {
    /// Syndrome relevant to correcting errors of `kind`.
    pub fn for_kind(&self, kind: PauliKind) -> &BitVec {
        match kind {
            PauliKind::X => &self.z_checks_lit,
            PauliKind::Z => &self.x_checks_lit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinWeight {
    /// Exact minimum weight, with the lexicographically first witness.
    Exact {
        weight: usize,
        witness: BitVec,
    },
    /// Nothing found up to and including this weight.
    LowerBoundOnly(usize),
    NoLogicals,
}

pub fn validate_css(hx: BitMatrix, hz: BitMatrix) -> Result<CssCode, CodeError> {
    if hx.cols() != hz.cols() {
        return Err(CodeError::DimensionMismatch(format!(
            "hx has {} columns, hz has {}",
            hx.cols(),
            hz.cols()
        )));
    }
    let n = hx.cols();
    let prod = hx.mul_transpose(&hz);
    for x_row in 0..prod.rows() {
        if let Some(z_row) = prod.row(x_row).first_one() {
            return Err(CodeError::CommutationViolation { x_row, z_row });
        }
    }
    let k = n - hx.rank() - hz.rank();
    let xs = logical_representatives(&hz, &hx);
    let zs = logical_representatives(&hx, &hz);
    debug_assert_eq!(xs.len(), k);
    debug_assert_eq!(zs.len(), k);
    let (logicals_x, logicals_z) = symplectic_pairing(xs, zs);
    let w = hx.max_row_weight().max(hz.max_row_weight());
    let w_prime = (0..n)
        .map(|q| {
            (0..hx.rows()).filter(|&r| hx.get(r, q)).count()
                + (0..hz.rows()).filter(|&r| hz.get(r, q)).count()
        })
        .max()
        .unwrap_or(0);
    let meta_x = hx.left_kernel();
    let meta_z = hz.left_kernel();
    Ok(CssCode {
        n,
        hx,
        hz,
        k,
        logicals_x,
        logicals_z,
        w,
        w_prime,
        meta_x,
        meta_z,
    })
}

/// Vectors in `ker(commute_with)` that are independent modulo `rowspace(stabilizers)`.
fn logical_representatives(commute_with: &BitMatrix, stabilizers: &BitMatrix) -> Vec<BitVec> {
    let mut basis: Vec<BitVec> = stabilizers.row_vecs().to_vec();
    let mut rank = rank_of_rows(basis.clone());
    let mut out = Vec::new();
    for v in commute_with.kernel() {
        basis.push(v.clone());
        let r = rank_of_rows(basis.clone());
        if r > rank {
            rank = r;
            out.push(v);
        } else {
            basis.pop();
        }
    }
    out
}

/// Symplectic Gram-Schmidt: pairs X- and Z-type representatives so that the
/// overlap matrix becomes the identity.
fn symplectic_pairing(mut xs: Vec<BitVec>, mut zs: Vec<BitVec>) -> (Vec<BitVec>, Vec<BitVec>) {
    let mut px = Vec::new();
    let mut pz = Vec::new();
    while !xs.is_empty() {
        let x = xs.remove(0);
        let j = zs
            .iter()
            .position(|z| x.dot(z))
            .expect("logical sets must be symplectically dual");
        let z = zs.remove(j);
        for other in xs.iter_mut() {
            if other.dot(&z) {
                other.xor_assign(&x);
            }
        }
        for other in zs.iter_mut() {
            if x.dot(other) {
                other.xor_assign(&z);
            }
        }
        px.push(x);
        pz.push(z);
    }
    (px, pz)
}

impl CssCode {
    /// Detecting matrix for errors of `kind` (HZ for X errors).
    pub fn detecting(&self, kind: PauliKind) -> &BitMatrix {
        match kind {
            PauliKind::X => &self.hz,
            PauliKind::Z => &self.hx,
        }
    }

    /// Stabilizers of the same type as `kind` errors.
    pub fn stabilizers(&self, kind: PauliKind) -> &BitMatrix {
        match kind {
            PauliKind::X => &self.hx,
            PauliKind::Z => &self.hz,
        }
    }

    /// Logical operators of the type opposite to `kind`, used to detect logical action of `kind` errors.
    pub fn dual_logicals(&self, kind: PauliKind) -> &[BitVec] {
        match kind {
            PauliKind::X => &self.logicals_z,
            PauliKind::Z => &self.logicals_x,
        }
    }

    pub fn meta_checks(&self, kind: PauliKind) -> &[BitVec] {
        match kind {
            PauliKind::X => &self.meta_z,
            PauliKind::Z => &self.meta_x,
        }
    }

    pub fn check_matrices(&self) -> CheckMatrices {
        CheckMatrices::new(
            SparseMatrix::from_dense(&self.hx),
            SparseMatrix::from_dense(&self.hz),
        )
    }

    pub fn energy_penalty(&self, p: &PauliError) -> usize {
        self.hz.mul_vec(&p.x_support).weight() + self.hx.mul_vec(&p.z_support).weight()
    }

    /// Bitmask of dual logicals anticommuting with a `kind`-type support.
    pub fn logical_signature(&self, support: &BitVec, kind: PauliKind) -> u64 {
        signature(self.dual_logicals(kind), support)
    }

    /// Indices of meta-checks violated by a `kind`-error syndrome.
    pub fn violated_meta_checks(&self, s: &BitVec, kind: PauliKind) -> Vec<usize> {
        self.meta_checks(kind)
            .iter()
            .enumerate()
            .filter(|(_, m)| m.dot(s))
            .map(|(i, _)| i)
            .collect()
    }
}

pub(crate) fn signature(dual: &[BitVec], support: &BitVec) -> u64 {
    dual.iter().enumerate().fold(
        0u64,
        |acc, (i, l)| if l.dot(support) { acc | (1 << i) } else { acc },
    )
}

pub fn rank_gf2(m: &BitMatrix) -> usize {
    m.rank()
}

pub fn input_syndrome(code: &CssCode, e: &BitVec, kind: PauliKind) -> InputSyndrome {
    assert_eq!(e.len(), code.n, "error length must equal n");
    let mut s = InputSyndrome {
        x_checks_lit: BitVec::zeros(code.hx.rows()),
        z_checks_lit: BitVec::zeros(code.hz.rows()),
    };
    match kind {
        PauliKind::X => s.z_checks_lit = code.hz.mul_vec(e),
        PauliKind::Z => s.x_checks_lit = code.hx.mul_vec(e),
    }
    s
}

pub fn energy_penalty(code: &CssCode, e: &PauliError) -> usize {
    code.energy_penalty(e)
}

/// Enumerates supports of a fixed weight in lexicographic order whose columns
/// sum to `target`, returning the first one accepted by `accept`.
///
/// The last element is found through a column lookup table, so the cost is
/// the number of `(weight - 1)`-prefixes rather than `weight`-subsets.
struct WeightSearch<'a> {
    columns: &'a [BitVec],
    by_column: HashMap<&'a BitVec, Vec<usize>>,
    budget: u64,
    spent: u64,
}

impl<'a> WeightSearch<'a> {
    fn new(columns: &'a [BitVec], budget: u64) -> Self {
        let mut by_column: HashMap<&BitVec, Vec<usize>> = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            by_column.entry(c).or_default().push(i);
        }
        WeightSearch {
            columns,
            by_column,
            budget,
            spent: 0,
        }
    }

    fn find(
        &mut self,
        weight: usize,
        target: &BitVec,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<Option<Vec<usize>>, CodeError> {
        if weight == 0 {
            return Ok((target.is_zero() && accept(&[])).then(Vec::new));
        }
        let mut chosen = Vec::with_capacity(weight);
        let partial = BitVec::zeros(target.len());
        self.recurse(0, weight - 1, &partial, target, &mut chosen, accept)
    }

    fn recurse(
        &mut self,
        start: usize,
        remaining_prefix: usize,
        partial: &BitVec,
        target: &BitVec,
        chosen: &mut Vec<usize>,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<Option<Vec<usize>>, CodeError> {
        let n = self.columns.len();
        if remaining_prefix == 0 {
            self.spent += 1;
            if self.spent > self.budget {
                return Err(CodeError::BudgetExceeded {
                    budget: self.budget,
                });
            }
            let need = partial.xor(target);
            if let Some(cands) = self.by_column.get(&need) {
                let lo = chosen.last().map_or(0, |&l| l + 1);
                for &j in cands.iter().filter(|&&j| j >= lo) {
                    chosen.push(j);
                    let ok = accept(chosen);
                    if ok {
                        return Ok(Some(chosen.clone()));
                    }
                    chosen.pop();
                }
            }
            return Ok(None);
        }
        for i in start..n.saturating_sub(remaining_prefix) {
            let next = partial.xor(&self.columns[i]);
            chosen.push(i);
            let found = self.recurse(i + 1, remaining_prefix - 1, &next, target, chosen, accept)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

fn columns_of(m: &BitMatrix) -> Vec<BitVec> {
    (0..m.cols()).map(|c| m.column(c)).collect()
}

/// Minimum weight of a `kind`-type logical operator, by exhaustive search up to `w_max`.
pub fn min_weight_logical(
    code: &CssCode,
    kind: PauliKind,
    w_max: usize,
) -> Result<MinWeight, CodeError> {
    min_weight_logical_with_budget(code, kind, w_max, DEFAULT_SEARCH_BUDGET)
}

pub fn min_weight_logical_with_budget(
    code: &CssCode,
    kind: PauliKind,
    w_max: usize,
    budget: u64,
) -> Result<MinWeight, CodeError> {
    if code.k == 0 {
        return Ok(MinWeight::NoLogicals);
    }
    let columns = columns_of(code.detecting(kind));
    let dual = code.dual_logicals(kind);
    let n = code.n;
    let mut search = WeightSearch::new(&columns, budget);
    let zero = BitVec::zeros(code.detecting(kind).rows());
    for weight in 1..=w_max.min(n) {
        let mut accept = |support: &[usize]| {
            let v = BitVec::from_indices(n, support.iter().copied());
            dual.iter().any(|l| l.dot(&v))
        };
        if let Some(s) = search.find(weight, &zero, &mut accept)? {
            return Ok(MinWeight::Exact {
                weight,
                witness: BitVec::from_indices(n, s),
            });
        }
    }
    Ok(MinWeight::LowerBoundOnly(w_max.min(n)))
}

/// Minimum-weight error with syndrome `s`; ties go to the lexicographically smallest support.
pub fn exact_coset_decoder(
    code: &CssCode,
    s: &InputSyndrome,
    kind: PauliKind,
) -> Result<BitVec, CodeError> {
    decode_min_weight(code, s.for_kind(kind), kind, DEFAULT_SEARCH_BUDGET)
}

pub fn decode_min_weight(
    code: &CssCode,
    syndrome: &BitVec,
    kind: PauliKind,
    budget: u64,
) -> Result<BitVec, CodeError> {
    let h = code.detecting(kind);
    if syndrome.len() != h.rows() {
        return Err(CodeError::DimensionMismatch(format!(
            "syndrome has {} bits, expected {}",
            syndrome.len(),
            h.rows()
        )));
    }
    if h.solve(syndrome).is_none() {
        return Err(CodeError::InvalidSyndrome {
            violated: code.violated_meta_checks(syndrome, kind),
        });
    }
    let columns = columns_of(h);
    let mut search = WeightSearch::new(&columns, budget);
    for weight in 0..=code.n {
        if let Some(s) = search.find(weight, syndrome, &mut |_| true)? {
            return Ok(BitVec::from_indices(code.n, s));
        }
    }
    unreachable!("a solvable syndrome has a solution of weight at most n")
}

/// Decoder for the input code, called on the effective syndrome assembled from
/// layer parities.
pub trait InputDecoder: Send + Sync {
    /// Returns a `kind`-type correction whose syndrome equals `syndrome`.
    fn decode(
        &self,
        code: &CssCode,
        syndrome: &BitVec,
        kind: PauliKind,
    ) -> Result<BitVec, CodeError>;

    fn name(&self) -> &str;
}

/// Exact minimum-weight decoder with lexicographic tie-breaking.
#[derive(Clone, Copy, Debug)]
pub struct ExactCosetDecoder {
    pub budget: u64,
}

impl Default for ExactCosetDecoder {
    fn default() -> Self {
        ExactCosetDecoder {
            budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

impl InputDecoder for ExactCosetDecoder {
    fn decode(
        &self,
        code: &CssCode,
        syndrome: &BitVec,
        kind: PauliKind,
    ) -> Result<BitVec, CodeError> {
        decode_min_weight(code, syndrome, kind, self.budget)
    }

    fn name(&self) -> &str {
        "exact-coset"
    }
}

/// Parses the text input-code format:
///
/// ```text
/// n 4 xchecks 1 zchecks 1
/// 1111
/// 1111
/// ```
pub fn parse_code(text: &str) -> Result<CssCode, CodeError> {
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    });
    let (hline, header) = lines.next().ok_or(CodeError::Parse {
        line: 0,
        msg: "empty file".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || CodeError::Parse {
        line: hline,
        msg: "expected `n <n> xchecks <rx> zchecks <rz>`".into(),
    };
    if toks.len() != 6 || toks[0] != "n" || toks[2] != "xchecks" || toks[4] != "zchecks" {
        return Err(bad_header());
    }
    let parse = |t: &str| t.parse::<usize>().map_err(|_| bad_header());
    let (n, rx, rz) = (parse(toks[1])?, parse(toks[3])?, parse(toks[5])?);
    let mut rows = Vec::with_capacity(rx + rz);
    for _ in 0..rx + rz {
        let (line, l) = lines.next().ok_or(CodeError::Parse {
            line: hline,
            msg: format!("expected {} check rows", rx + rz),
        })?;
        let v = BitVec::from_bit_str(l).ok_or(CodeError::Parse {
            line,
            msg: "rows may only contain 0 and 1".into(),
        })?;
        if v.len() != n {
            return Err(CodeError::Parse {
                line,
                msg: format!("row has {} entries, expected {n}", v.len()),
            });
        }
        rows.push(v);
    }
    if let Some((line, _)) = lines.next() {
        return Err(CodeError::Parse {
            line,
            msg: "unexpected trailing content".into(),
        });
    }
    let zrows = rows.split_off(rx);
    validate_css(
        BitMatrix::from_rows(n, rows),
        BitMatrix::from_rows(n, zrows),
    )
}

pub fn format_code(code: &CssCode) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n {} xchecks {} zchecks {}",
        code.n,
        code.hx.rows(),
        code.hz.rows()
    );
    for r in code.hx.row_vecs().iter().chain(code.hz.row_vecs()) {
        let _ = writeln!(out, "{}", r.to_bit_string());
    }
    out
}
