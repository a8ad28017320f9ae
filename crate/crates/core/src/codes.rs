//! Small CSS codes used as inputs and in tests.

use crate::code::{validate_css, CssCode};
use crate::gf2::{BitMatrix, BitVec};

fn build(n: usize, hx: &[&str], hz: &[&str]) -> CssCode {
    validate_css(BitMatrix::from_strs(n, hx), BitMatrix::from_strs(n, hz))
        .expect("built-in code is valid")
}

/// `[[4,2,2]]`: one weight-4 check of each type.
pub fn four_two_two() -> CssCode {
    build(4, &["1111"], &["1111"])
}

/// `[[7,1,3]]` Steane code.
pub fn steane() -> CssCode {
    let h = ["0001111", "0110011", "1010101"];
    build(7, &h, &h)
}

/// `[[6,4,2]]`: all-ones checks on six qubits.
pub fn six_four_two() -> CssCode {
    build(6, &["111111"], &["111111"])
}

/// `[[8,3,2]]` cube code: one X-check on all qubits, Z-checks on four faces.
pub fn cube() -> CssCode {
    build(
        8,
        &["11111111"],
        &["11110000", "11001100", "10101010", "00001111"],
    )
}

/// Three-qubit repetition code with only Z-checks.
pub fn repetition3() -> CssCode {
    build(3, &[], &["110", "011"])
}

/// A single bare qubit.
pub fn bare_qubit() -> CssCode {
    build(1, &[], &[])
}

/// Parity-check matrix of the open repetition code on `len` bits.
pub fn repetition_checks(len: usize) -> BitMatrix {
    let rows = (0..len.saturating_sub(1))
        .map(|i| BitVec::from_indices(len, [i, i + 1]))
        .collect();
    BitMatrix::from_rows(len, rows)
}

/// Hypergraph product of two classical codes.
///
/// Qubits are `n1*n2` followed by `m1*m2`; `hx = [h1 ⊗ I | I ⊗ h2ᵀ]`, `hz = [I ⊗ h2 | h1ᵀ ⊗ I]`.
pub fn hypergraph_product(h1: &BitMatrix, h2: &BitMatrix) -> CssCode {
    let (m1, n1) = (h1.rows(), h1.cols());
    let (m2, n2) = (h2.rows(), h2.cols());
    let n = n1 * n2 + m1 * m2;
    let left = |a: usize, b: usize| a * n2 + b;
    let right = |c: usize, d: usize| n1 * n2 + c * m2 + d;
    let mut hx = Vec::new();
    for c in 0..m1 {
        for b in 0..n2 {
            let mut r = BitVec::zeros(n);
            for a in 0..n1 {
                if h1.get(c, a) {
                    r.set(left(a, b), true);
                }
            }
            for d in 0..m2 {
                if h2.get(d, b) {
                    r.set(right(c, d), true);
                }
            }
            hx.push(r);
        }
    }
    let mut hz = Vec::new();
    for a in 0..n1 {
        for d in 0..m2 {
            let mut r = BitVec::zeros(n);
            for b in 0..n2 {
                if h2.get(d, b) {
                    r.set(left(a, b), true);
                }
            }
            for c in 0..m1 {
                if h1.get(c, a) {
                    r.set(right(c, d), true);
                }
            }
            hz.push(r);
        }
    }
    validate_css(BitMatrix::from_rows(n, hx), BitMatrix::from_rows(n, hz))
        .expect("hypergraph products commute")
}

/// Planar surface code `[[d² + (d-1)², 1, d]]`.
pub fn planar_surface(d: usize) -> CssCode {
    let h = repetition_checks(d);
    hypergraph_product(&h, &h)
}

/// Toric code on an `l x l` torus, `[[2l², 2, l]]`, with one redundant check per type.
pub fn toric(l: usize) -> CssCode {
    let cyc = {
        let rows = (0..l)
            .map(|i| BitVec::from_indices(l, [i, (i + 1) % l]))
            .collect();
        BitMatrix::from_rows(l, rows)
    };
    hypergraph_product(&cyc, &cyc)
}

/// The small catalogue used for lattice validation sweeps.
pub fn small_catalogue() -> Vec<(&'static str, CssCode)> {
    vec![
        ("four_two_two", four_two_two()),
        ("steane", steane()),
        ("six_four_two", six_four_two()),
        ("cube", cube()),
        ("repetition3", repetition3()),
        ("surface_d2", planar_surface(2)),
        ("toric_2", toric(2)),
        ("bare_qubit", bare_qubit()),
    ]
}
