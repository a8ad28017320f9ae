//! Dense and sparse linear algebra over GF(2).
//!
//! `BitVec` and `BitMatrix` are small packed containers used for input-code
//! check matrices and Pauli frames. `SparseMatrix` holds the Layer Code check
//! matrices, which are far too large for dense storage.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.toggle(i);
        }
        v
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()?;
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        Some(v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "bit-vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the overlap `self · other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "bit-vector length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bit_string())
    }
}

/// Dense row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        }
    }

    /// Convenience constructor from `0`/`1` strings, e.g. `&["1111"]`.
    pub fn from_strs(cols: usize, rows: &[&str]) -> Self {
        let rows = rows
            .iter()
            .map(|r| BitVec::from_bit_str(r).expect("rows must be 0/1 strings"))
            .collect();
        Self::from_rows(cols, rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value)
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.data
    }

    pub fn column(&self, c: usize) -> BitVec {
        BitVec::from_indices(self.rows, (0..self.rows).filter(|&r| self.get(r, c)))
    }

    /// `H · v` over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut out = BitVec::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            if row.dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    /// `self · otherᵀ`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for (i, a) in self.data.iter().enumerate() {
            for (j, b) in other.data.iter().enumerate() {
                if a.dot(b) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row.ones() {
                out.set(c, r, true);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    pub fn max_row_weight(&self) -> usize {
        self.data.iter().map(BitVec::weight).max().unwrap_or(0)
    }

    pub fn max_col_weight(&self) -> usize {
        (0..self.cols)
            .map(|c| self.data.iter().filter(|r| r.get(c)).count())
            .max()
            .unwrap_or(0)
    }

    /// Reduced row echelon form; returns the reduced matrix and pivot columns.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..m.cols {
            if next == m.rows {
                break;
            }
            let Some(p) = (next..m.rows).find(|&r| m.data[r].get(c)) else {
                continue;
            };
            m.data.swap(next, p);
            let pivot_row = m.data[next].clone();
            for r in 0..m.rows {
                if r != next && m.data[r].get(c) {
                    m.data[r].xor_assign(&pivot_row);
                }
            }
            pivots.push(c);
            next += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(self.data.clone())
    }

    /// Basis of `{v : self · v = 0}`.
    pub fn kernel(&self) -> Vec<BitVec> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (row, &p) in pivots.iter().enumerate() {
                if r.get(row, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of `{m : mᵀ · self = 0}`: the linear dependencies among rows.
    pub fn left_kernel(&self) -> Vec<BitVec> {
        self.transpose().kernel()
    }

    /// Whether `v` lies in the row space.
    pub fn in_row_space(&self, v: &BitVec) -> bool {
        let mut rows = self.data.clone();
        let base = rank_of_rows(rows.clone());
        rows.push(v.clone());
        rank_of_rows(rows) == base
    }

    /// Some `e` with `self · e = s`, if one exists.
    pub fn solve(&self, s: &BitVec) -> Option<BitVec> {
        assert_eq!(s.len(), self.rows, "syndrome length mismatch");
        // Augment each row with its syndrome bit as an extra trailing column.
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in self.data[r].ones() {
                aug.set(r, c, true);
            }
            if s.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut e = BitVec::zeros(self.cols);
        for (row, &p) in pivots.iter().enumerate() {
            if red.get(row, self.cols) {
                e.set(p, true);
            }
        }
        Some(e)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {}", r.to_bit_string())?;
        }
        Ok(())
    }
}

/// Rank of a set of rows by forward elimination.
pub fn rank_of_rows(mut rows: Vec<BitVec>) -> usize {
    let mut rank = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row index in `rows`, pivot column)
    for i in 0..rows.len() {
        let mut row = std::mem::take(&mut rows[i]);
        for &(pi, pc) in &pivots {
            if row.get(pc) {
                row.xor_assign(&rows[pi]);
            }
        }
        if let Some(pc) = row.first_one() {
            rows[i] = row;
            pivots.push((i, pc));
            rank += 1;
        }
    }
    rank
}

/// Row-list sparse GF(2) matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<Vec<u32>>,
}

impl SparseMatrix {
    /// Builds a matrix from rows; duplicate entries in a row cancel mod 2.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<u32>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.sort_unstable();
                let mut out: Vec<u32> = Vec::with_capacity(r.len());
                for c in r {
                    assert!((c as usize) < ncols, "column {c} out of range");
                    if out.last() == Some(&c) {
                        out.pop();
                    } else {
                        out.push(c);
                    }
                }
                out
            })
            .collect();
        SparseMatrix { ncols, rows }
    }

    pub fn from_dense(m: &BitMatrix) -> Self {
        let rows = m
            .row_vecs()
            .iter()
            .map(|r| r.ones().map(|c| c as u32).collect())
            .collect();
        SparseMatrix {
            ncols: m.cols(),
            rows,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut Vec<Vec<u32>> {
        &mut self.rows
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut cols = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c as usize].push(r as u32);
            }
        }
        SparseMatrix {
            ncols: self.rows.len(),
            rows: cols,
        }
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.ncols, "vector length mismatch");
        let mut out = BitVec::zeros(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            let parity = row.iter().filter(|&&c| v.get(c as usize)).count() % 2 == 1;
            if parity {
                out.set(r, true);
            }
        }
        out
    }

    pub fn to_dense(&self) -> BitMatrix {
        let rows = self
            .rows
            .iter()
            .map(|r| BitVec::from_indices(self.ncols, r.iter().map(|&c| c as usize)))
            .collect();
        BitMatrix::from_rows(self.ncols, rows)
    }

    pub fn max_row_weight(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// GF(2) rank by sparse reduction on the largest column of each row.
    pub fn rank(&self) -> usize {
        let mut pivots: std::collections::HashMap<u32, Vec<u32>> = Default::default();
        for row in &self.rows {
            let mut r = row.clone();
            while let Some(&lead) = r.last() {
                match pivots.get(&lead) {
                    Some(p) => r = sym_diff(&r, p),
                    None => {
                        pivots.insert(lead, r);
                        break;
                    }
                }
            }
        }
        pivots.len()
    }

    /// GF(2) rank by dense elimination.
    pub fn rank_dense(&self) -> usize {
        rank_of_rows(
            self.rows
                .iter()
                .map(|r| BitVec::from_indices(self.ncols, r.iter().map(|&c| c as usize)))
                .collect(),
        )
    }

    /// Rows `(i, j)` of `self · otherᵀ` that are odd, i.e. anticommuting pairs.
    pub fn odd_overlaps(&self, other: &SparseMatrix) -> Vec<(usize, usize)> {
        assert_eq!(self.ncols, other.ncols, "column count mismatch");
        let other_t = other.transpose();
        let mut bad = Vec::new();
        let mut counts: std::collections::BTreeMap<u32, u32> = Default::default();
        for (i, row) in self.rows.iter().enumerate() {
            counts.clear();
            for &q in row {
                for &j in other_t.row(q as usize) {
                    *counts.entry(j).or_default() += 1;
                }
            }
            bad.extend(
                counts
                    .iter()
                    .filter(|(_, &c)| c % 2 == 1)
                    .map(|(&j, _)| (i, j as usize)),
            );
        }
        bad
    }
}

/// Symmetric difference of two sorted index lists.
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

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Column-major elimination written independently of `rank_of_rows`.
    fn rank_by_columns(m: &BitMatrix) -> usize {
        let mut cols: Vec<Vec<bool>> = (0..m.cols())
            .map(|c| (0..m.rows()).map(|r| m.get(r, c)).collect())
            .collect();
        let mut rank = 0;
        for r in 0..m.rows() {
            let Some(p) = (rank..cols.len()).find(|&c| cols[c][r]) else {
                continue;
            };
            cols.swap(rank, p);
            for c in 0..cols.len() {
                if c != rank && cols[c][r] {
                    for rr in 0..m.rows() {
                        let v = cols[rank][rr];
                        cols[c][rr] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rng.gen_bool(0.5));
            }
        }
        m
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
        assert_eq!(BitMatrix::from_strs(4, &["1111"]).rank(), 1);
        assert_eq!(BitMatrix::from_strs(4, &["1111", "1111"]).rank(), 1);
        assert_eq!(BitMatrix::zeros(2, 5).rank(), 0);
    }

    #[test]
    fn rank_matches_independent_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_matrix(&mut rng, 5, 7);
            assert_eq!(m.rank(), rank_by_columns(&m));
        }
    }

    #[test]
    fn kernel_and_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, 4, 9);
            let ker = m.kernel();
            assert_eq!(ker.len(), 9 - m.rank());
            for v in &ker {
                assert!(m.mul_vec(v).is_zero());
            }
            let e = BitVec::from_indices(9, (0..9).filter(|_| rng.gen_bool(0.4)));
            let s = m.mul_vec(&e);
            let sol = m.solve(&s).expect("syndrome of a real error is solvable");
            assert_eq!(m.mul_vec(&sol), s);
        }
        let dup = BitMatrix::from_strs(3, &["110", "110"]);
        assert!(dup.solve(&BitVec::from_bit_str("10").unwrap()).is_none());
        assert_eq!(dup.left_kernel().len(), 1);
    }

    #[test]
    fn sparse_dense_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 6, 10);
        let s = SparseMatrix::from_dense(&m);
        assert_eq!(s.to_dense(), m);
        assert_eq!(s.rank(), m.rank());
        let v = BitVec::from_indices(10, [1, 4, 7]);
        assert_eq!(s.mul_vec(&v), m.mul_vec(&v));
        assert_eq!(s.transpose().to_dense(), m.transpose());
    }

    #[test]
    fn sparse_rank_matches_dense_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rows = rng.gen_range(1..12);
            let cols = rng.gen_range(1..15);
            let s = SparseMatrix::from_dense(&random_matrix(&mut rng, rows, cols));
            assert_eq!(s.rank(), s.rank_dense());
        }
    }

    #[test]
    fn bitvec_ones_iterates_in_order() {
        let v = BitVec::from_indices(130, [0, 63, 64, 129]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(v.weight(), 4);
    }
}
