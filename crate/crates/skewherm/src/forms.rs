//! Symmetric bilinear forms over F_2, their congruence classes, and the
//! unitary-group double cosets over F_4 that verify the class counts by
//! exhaustion.
//!
//! F_2 matrices are bit-packed (one u64 mask per row); F_4 is two bits with
//! tabulated multiplication, so the full GL_3(F_4) sweep stays fast.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::padic::PadicMatrix;


/// Dense matrix over F_2, rows stored as bit masks. Supports up to 64 columns.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for BitMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                write!(f, "{}", self.get(i, j) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl BitMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        assert!(cols <= 64);
        BitMat {
            rows,
            cols,
            data: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_padic_mod2(a: &PadicMatrix) -> Self {
        let mut m = Self::zero(a.rows(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                m.set(i, j, a.get(i, j) % 2 == 1);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i] >> j) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        if v {
            self.data[i] |= 1 << j;
        } else {
            self.data[i] &= !(1 << j);
        }
    }

    pub fn row_mask(&self, i: usize) -> u64 {
        self.data[i]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a ^ b)
            .collect();
        BitMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            let mut acc = 0u64;
            let mut mask = self.data[i];
            while mask != 0 {
                let j = mask.trailing_zeros() as usize;
                acc ^= other.data[j];
                mask &= mask - 1;
            }
            out.data[i] = acc;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            let mut mask = self.data[i];
            while mask != 0 {
                let j = mask.trailing_zeros() as usize;
                out.data[j] |= 1 << i;
                mask &= mask - 1;
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<u64> = self.data.iter().copied().filter(|&r| r != 0).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            if let Some(pos) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) {
                rows.swap(rank, pos);
                let pivot = rows[rank];
                for (i, row) in rows.iter_mut().enumerate() {
                    if i != rank && *row & bit != 0 {
                        *row ^= pivot;
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&r| r == 0)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let bit = 1u64 << col;
            let pivot = (col..n).find(|&i| a[i] & bit != 0)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for i in 0..n {
                if i != col && a[i] & bit != 0 {
                    a[i] ^= a[col];
                    inv[i] ^= inv[col];
                }
            }
        }
        Some(BitMat {
            rows: n,
            cols: n,
            data: inv,
        })
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Basis of `{x : Ax = 0}`, returned as the columns of a matrix.
    pub fn kernel(&self) -> BitMat {
        // Column echelon bookkeeping: eliminate over a copy, remembering
        // which columns hold pivots.
        let mut rows = self.data.clone();
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; self.cols];
        let mut r = 0;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            if let Some(pos) = (r..rows.len()).find(|&i| rows[i] & bit != 0) {
                rows.swap(r, pos);
                let pivot = rows[r];
                for (i, row) in rows.iter_mut().enumerate() {
                    if i != r && *row & bit != 0 {
                        *row ^= pivot;
                    }
                }
                pivot_of_col[col] = Some(r);
                r += 1;
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| pivot_of_col[c].is_none()).collect();
        let mut out = BitMat::zero(self.cols, free.len());
        for (idx, &fc) in free.iter().enumerate() {
            out.set(fc, idx, true);
            for c in 0..self.cols {
                if let Some(pr) = pivot_of_col[c] {
                    if rows[pr] & (1 << fc) != 0 {
                        out.set(c, idx, true);
                    }
                }
            }
        }
        out
    }

    /// Reduce the columns to an independent spanning subset (first-seen
    /// pivots), returning their indices.
    pub fn independent_columns(&self) -> Vec<usize> {
        let mut basis: Vec<u64> = Vec::new();
        let mut keep = Vec::new();
        for j in 0..self.cols {
            let mut v = self.column_mask(j);
            for &b in &basis {
                let low = b.trailing_zeros();
                if v >> low & 1 == 1 {
                    v ^= b;
                }
            }
            if v != 0 {
                // Keep the reduced vector in a normalized triangular basis.
                let mut nb = v;
                for &b in &basis {
                    let low = b.trailing_zeros();
                    if nb >> low & 1 == 1 {
                        nb ^= b;
                    }
                }
                if nb != 0 {
                    basis.push(nb);
                    basis.sort_by_key(|b| b.trailing_zeros());
                    keep.push(j);
                }
            }
        }
        keep
    }

    /// Column j as a bit mask over row indices.
    pub fn column_mask(&self, j: usize) -> u64 {
        let mut m = 0u64;
        for i in 0..self.rows {
            if self.get(i, j) {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn select_columns(&self, idx: &[usize]) -> BitMat {
        let mut out = BitMat::zero(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Does the column span of `self` contain `v` (bit mask over rows)?
    pub fn span_contains(&self, v: u64) -> bool {
        let mut basis: Vec<u64> = Vec::new();
        for j in 0..self.cols {
            let mut w = self.column_mask(j);
            for &b in &basis {
                if w >> b.trailing_zeros() & 1 == 1 {
                    w ^= b;
                }
            }
            if w != 0 {
                basis.push(w);
                basis.sort_by_key(|b| b.trailing_zeros());
            }
        }
        let mut w = v;
        for &b in &basis {
            if w >> b.trailing_zeros() & 1 == 1 {
                w ^= b;
            }
        }
        w == 0
    }
}

/// Symmetric invertible matrix over F_2.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SymMatF2(BitMat);

impl SymMatF2 {
    pub fn new(m: BitMat) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Singular("symmetric matrix must be square".into()));
        }
        if m != m.transpose() {
            return Err(Error::Singular("matrix is not symmetric".into()));
        }
        if !m.is_invertible() {
            return Err(Error::Singular("matrix is singular over F_2".into()));
        }
        Ok(SymMatF2(m))
    }

    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let n = rows.len();
        let mut m = BitMat::zero(n, n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v % 2 == 1);
            }
        }
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        SymMatF2(BitMat::identity(n))
    }

    /// The hyperbolic plane [[0,1],[1,0]].
    pub fn hyperbolic() -> Self {
        Self::from_rows(&[&[0, 1], &[1, 0]]).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.0.rows()
    }

    pub fn inner(&self) -> &BitMat {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.0.get(i, j)
    }

    pub fn is_alternating(&self) -> bool {
        (0..self.rank()).all(|i| !self.get(i, i))
    }

    /// P^t * A * P for invertible P; stays in S_r.
    pub fn congruent_by(&self, p: &BitMat) -> SymMatF2 {
        SymMatF2(p.transpose().mul(&self.0).mul(p))
    }
}

/// Congruence class of a symmetric invertible F_2 form: rank plus the
/// alternating flag. The flag is a congruence invariant because the diagonal
/// vector transforms linearly: diag(P^t A P) = P^t diag(A) over F_2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymFormClassF2 {
    pub rank: usize,
    pub alternating: bool,
}

impl SymFormClassF2 {
    pub fn new(rank: usize, alternating: bool) -> Self {
        assert!(!alternating || rank % 2 == 0, "alternating forms have even rank");
        SymFormClassF2 { rank, alternating }
    }

    /// The canonical representative: hyperbolic planes first, then (1)s.
    pub fn representative(&self) -> SymMatF2 {
        let hyp_count = if self.alternating {
            self.rank / 2
        } else if self.rank % 2 == 1 {
            (self.rank - 1) / 2
        } else {
            (self.rank - 2) / 2
        };
        let ones = self.rank - 2 * hyp_count;
        let mut m = BitMat::zero(self.rank, self.rank);
        for b in 0..hyp_count {
            m.set(2 * b, 2 * b + 1, true);
            m.set(2 * b + 1, 2 * b, true);
        }
        for o in 0..ones {
            let i = 2 * hyp_count + o;
            m.set(i, i, true);
        }
        SymMatF2(m)
    }

    /// All classes in rank r: one when r is odd, two when r is even >= 2.
    pub fn all_in_rank(r: usize) -> Vec<SymFormClassF2> {
        if r == 0 {
            vec![]
        } else if r % 2 == 1 {
            vec![SymFormClassF2::new(r, false)]
        } else {
            vec![SymFormClassF2::new(r, false), SymFormClassF2::new(r, true)]
        }
    }
}

impl std::fmt::Display for SymFormClassF2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.alternating {
            write!(f, "rank {} alternating", self.rank)
        } else {
            write!(f, "rank {} non-alternating", self.rank)
        }
    }
}

pub fn congruence_class(a: &SymMatF2) -> SymFormClassF2 {
    SymFormClassF2::new(a.rank(), a.is_alternating())
}

/// Number of congruence classes of invertible symmetric r x r matrices
/// over F_2: 1 for r = 0 and odd r, 2 for even r >= 2.
pub fn m_r(r: usize) -> usize {
    if r == 0 || r % 2 == 1 {
        1
    } else {
        2
    }
}

/// Decompose into an explicit congruence `P^t A P = canonical`.
///
/// Greedy: split off (1)-vectors on nonzero diagonal, hyperbolic pairs on a
/// fully alternating remainder, then fold triples of (1)s into hyperbolic
/// planes so at most two survive.
pub fn canonical_form(a: &SymMatF2) -> (SymMatF2, BitMat) {
    let n = a.rank();
    // Current complement basis, as columns in original coordinates.
    let mut cols: Vec<u64> = (0..n).map(|j| 1u64 << j).collect();
    let form = |x: u64, y: u64| -> bool {
        // x^t A y over F_2.
        let mut acc = false;
        let mut mx = x;
        while mx != 0 {
            let i = mx.trailing_zeros() as usize;
            let mut my = y;
            while my != 0 {
                let j = my.trailing_zeros() as usize;
                acc ^= a.get(i, j);
                my &= my - 1;
            }
            mx &= mx - 1;
        }
        acc
    };
    let mut ones: Vec<u64> = Vec::new();
    let mut hyps: Vec<(u64, u64)> = Vec::new();
    while !cols.is_empty() {
        if let Some(i) = (0..cols.len()).find(|&i| form(cols[i], cols[i])) {
            let v = cols.remove(i);
            for c in cols.iter_mut() {
                if form(*c, v) {
                    *c ^= v;
                }
            }
            ones.push(v);
        } else {
            // Fully alternating remainder: nondegeneracy guarantees a pair.
            let (i, j) = (0..cols.len())
                .flat_map(|i| ((i + 1)..cols.len()).map(move |j| (i, j)))
                .find(|&(i, j)| form(cols[i], cols[j]))
                .expect("degenerate remainder contradicts invertibility");
            let (u, v) = (cols[i], cols[j]);
            cols.remove(j);
            cols.remove(i);
            for c in cols.iter_mut() {
                if form(*c, v) {
                    *c ^= u;
                }
                if form(*c, u) {
                    *c ^= v;
                }
            }
            hyps.push((u, v));
        }
    }
    while ones.len() >= 3 {
        let x = ones.pop().unwrap();
        let y = ones.pop().unwrap();
        let z = ones.pop().unwrap();
        hyps.push((x ^ y, y ^ z));
        ones.push(x ^ y ^ z);
    }
    let mut p = BitMat::zero(n, n);
    let mut col = 0;
    for &(u, v) in &hyps {
        for i in 0..n {
            p.set(i, col, u >> i & 1 == 1);
            p.set(i, col + 1, v >> i & 1 == 1);
        }
        col += 2;
    }
    for &v in &ones {
        for i in 0..n {
            p.set(i, col, v >> i & 1 == 1);
        }
        col += 1;
    }
    let canon = SymFormClassF2::new(n, ones.is_empty()).representative();
    debug_assert_eq!(a.congruent_by(&p), canon, "canonical form mismatch");
    (canon, p)
}

/// Every invertible matrix in GL_r(F_2); r <= 4 keeps this comfortably small.
pub fn gl_f2(r: usize) -> Vec<BitMat> {
    assert!(r <= 4, "full GL enumeration capped at r = 4");
    let total = 1u64 << (r * r);
    let mut out = Vec::new();
    for code in 0..total {
        let mut m = BitMat::zero(r, r);
        for i in 0..r {
            for j in 0..r {
                m.set(i, j, code >> (i * r + j) & 1 == 1);
            }
        }
        if m.is_invertible() {
            out.push(m);
        }
    }
    out
}

/// All invertible symmetric r x r matrices over F_2.
pub fn s_r_all(r: usize) -> Vec<SymMatF2> {
    assert!(r <= 4, "exhaustion capped at r = 4");
    if r == 0 {
        return vec![];
    }
    let free = r * (r + 1) / 2;
    let mut out = Vec::new();
    for code in 0..(1u64 << free) {
        let mut m = BitMat::zero(r, r);
        let mut bit = 0;
        for i in 0..r {
            for j in i..r {
                let v = code >> bit & 1 == 1;
                m.set(i, j, v);
                m.set(j, i, v);
                bit += 1;
            }
        }
        if let Ok(s) = SymMatF2::new(m) {
            out.push(s);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct OrbitF2 {
    pub class: SymFormClassF2,
    pub representative: SymMatF2,
    pub size: usize,
}

/// Exhaustive orbit decomposition of S_r under A.U = A^t U A.
/// Rejected above r = 4 (the group sweep blows up combinatorially).
pub fn enumerate_orbits_f2(r: usize) -> Result<Vec<OrbitF2>> {
    if r > 4 {
        return Err(Error::ExhaustionTooLarge { r, max: 4 });
    }
    let group = gl_f2(r);
    let all = s_r_all(r);
    let mut seen: HashSet<SymMatF2> = HashSet::new();
    let mut orbits = Vec::new();
    for start in &all {
        if seen.contains(start) {
            continue;
        }
        let mut orbit = HashSet::new();
        orbit.insert(start.clone());
        let mut frontier = vec![start.clone()];
        while let Some(u) = frontier.pop() {
            for g in &group {
                let img = u.congruent_by(g);
                if orbit.insert(img.clone()) {
                    frontier.push(img);
                }
            }
        }
        let size = orbit.len();
        for x in orbit {
            seen.insert(x);
        }
        orbits.push(OrbitF2 {
            class: congruence_class(start),
            representative: start.clone(),
            size,
        });
    }
    orbits.sort_by_key(|o| (o.class.alternating, o.size));
    Ok(orbits)
}

// ---------------------------------------------------------------------------
// F_4 arithmetic and the unitary double-coset oracle.
// ---------------------------------------------------------------------------

/// F_4 = F_2[a] with a^2 + a + 1 = 0, encoded 0, 1, a = 2, a+1 = 3.
/// Conjugation is the Frobenius x -> x^2.
pub mod f4 {
    pub const MUL: [[u8; 4]; 4] = [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
    ];
    pub const CONJ: [u8; 4] = [0, 1, 3, 2];
    pub const INV: [u8; 4] = [0, 1, 3, 2]; // x^3 = 1 for units, so x^{-1} = x^2

    pub fn add(x: u8, y: u8) -> u8 {
        x ^ y
    }

    pub fn mul(x: u8, y: u8) -> u8 {
        MUL[x as usize][y as usize]
    }

    pub fn conj(x: u8) -> u8 {
        CONJ[x as usize]
    }

    pub fn trace(x: u8) -> u8 {
        add(x, conj(x)) // 0 for F_2 elements, 1 otherwise
    }

    pub fn in_f2(x: u8) -> bool {
        x < 2
    }
}

/// Square matrix over F_4, entries row-major in 0..=3.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatF4 {
    n: usize,
    e: Vec<u8>,
}

impl std::fmt::Debug for MatF4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sym = ["0", "1", "a", "a+1"];
        writeln!(f, "MatF4 {}x{}", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<&str> = (0..self.n).map(|j| sym[self.get(i, j) as usize]).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl MatF4 {
    pub fn zero(n: usize) -> Self {
        MatF4 { n, e: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_entries(n: usize, entries: &[u8]) -> Self {
        assert_eq!(entries.len(), n * n);
        assert!(entries.iter().all(|&x| x < 4));
        MatF4 {
            n,
            e: entries.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.e[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let cur = out.get(i, j);
                    out.set(i, j, f4::add(cur, f4::mul(a, other.get(l, j))));
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn bar_t(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, f4::conj(self.get(i, j)));
            }
        }
        out
    }

    pub fn is_invertible(&self) -> bool {
        let n = self.n;
        let mut a = self.clone();
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| a.get(i, col) != 0) else {
                return false;
            };
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(p, j));
                a.set(p, j, tmp);
            }
            let inv = f4::INV[a.get(col, col) as usize];
            for j in 0..n {
                a.set(col, j, f4::mul(inv, a.get(col, j)));
            }
            for i in 0..n {
                if i != col && a.get(i, col) != 0 {
                    let f = a.get(i, col);
                    for j in 0..n {
                        let v = f4::add(a.get(i, j), f4::mul(f, a.get(col, j)));
                        a.set(i, j, v);
                    }
                }
            }
        }
        true
    }

    /// Entries all in F_2?
    pub fn is_f2(&self) -> bool {
        self.e.iter().all(|&x| f4::in_f2(x))
    }

    pub fn to_bitmat(&self) -> Option<BitMat> {
        if !self.is_f2() {
            return None;
        }
        let mut m = BitMat::zero(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(i, j) == 1);
            }
        }
        Some(m)
    }

    pub fn from_bitmat(b: &BitMat) -> Self {
        assert_eq!(b.rows(), b.cols());
        let n = b.rows();
        let mut m = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, b.get(i, j) as u8);
            }
        }
        m
    }

    /// Compact key for hashing/ordering: 2 bits per entry.
    pub fn encode(&self) -> u64 {
        assert!(self.n * self.n <= 32);
        let mut k = 0u64;
        for (idx, &v) in self.e.iter().enumerate() {
            k |= (v as u64) << (2 * idx);
        }
        k
    }
}

/// pi(U) = conj(U)^t * U, the Hermitian square.
pub fn pi_map(u: &MatF4) -> MatF4 {
    u.bar_t().mul(u)
}

fn all_matrices_f4(r: usize) -> impl Iterator<Item = MatF4> {
    let cells = r * r;
    (0..4u64.pow(cells as u32)).map(move |code| {
        let entries: Vec<u8> = (0..cells).map(|i| ((code >> (2 * i)) & 3) as u8).collect();
        MatF4::from_entries(r, &entries)
    })
}

/// Full enumeration of U(r)(F_2) = { U : conj(U)^t U = I }; r <= 3.
pub fn unitary_enum(r: usize) -> Result<Vec<MatF4>> {
    if r > 3 {
        return Err(Error::ExhaustionTooLarge { r, max: 3 });
    }
    let id = MatF4::identity(r);
    Ok(all_matrices_f4(r).filter(|u| pi_map(u) == id).collect())
}

/// Full enumeration of Y_r = { U in GL_r(F_4) : conj(U)^t U in GL_r(F_2) }.
pub fn yr_enum(r: usize) -> Result<Vec<MatF4>> {
    if r > 3 {
        return Err(Error::ExhaustionTooLarge { r, max: 3 });
    }
    Ok(all_matrices_f4(r)
        .filter(|u| {
            let p = pi_map(u);
            p.is_f2() && p.is_invertible() && u.is_invertible()
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct YrDoubleCosets {
    pub r: usize,
    pub unitary_order: usize,
    pub yr_size: usize,
    pub coset_count: usize,
    /// One Y_r representative per double coset, with its induced form class.
    pub representatives: Vec<(MatF4, SymFormClassF2)>,
}

/// Exhaustive double-coset decomposition U(r)(F_2) \ Y_r / GL_r(F_2),
/// computed by BFS over left cosets (no appeal to the form-class invariant),
/// then checked against the class bijection: the map U -> conj(U)^t U must
/// send distinct double cosets onto distinct congruence classes and cover
/// every class, with each matrix fiber a single left orbit.
pub fn yr_double_cosets(r: usize) -> Result<YrDoubleCosets> {
    if r > 3 {
        return Err(Error::ExhaustionTooLarge { r, max: 3 });
    }
    let unitary = unitary_enum(r)?;
    let yr = yr_enum(r)?;
    let gl = gl_f2(r);
    let gl_f4: Vec<MatF4> = gl.iter().map(MatF4::from_bitmat).collect();

    // Canonical representative of the left coset U(r) * U: minimal encoding.
    let canon = |u: &MatF4| -> u64 {
        unitary
            .iter()
            .map(|g| g.mul(u).encode())
            .min()
            .expect("unitary group is nonempty")
    };

    let mut coset_rep: HashMap<u64, MatF4> = HashMap::new();
    for u in &yr {
        coset_rep.entry(canon(u)).or_insert_with(|| u.clone());
    }
    // Sanity: left cosets partition Y_r into unitary-sized pieces.
    if coset_rep.len() * unitary.len() != yr.len() {
        return Err(Error::Internal(format!(
            "left cosets do not partition Y_{r}: {} cosets of size {} vs |Y_r| = {}",
            coset_rep.len(),
            unitary.len(),
            yr.len()
        )));
    }

    let mut visited: HashSet<u64> = HashSet::new();
    let mut representatives = Vec::new();
    let mut keys: Vec<u64> = coset_rep.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        if visited.contains(&key) {
            continue;
        }
        let start = coset_rep[&key].clone();
        let mut frontier = vec![start.clone()];
        visited.insert(key);
        while let Some(u) = frontier.pop() {
            for p in &gl_f4 {
                let next = u.mul(p);
                let ck = canon(&next);
                if visited.insert(ck) {
                    frontier.push(coset_rep[&ck].clone());
                }
            }
        }
        let class_mat = SymMatF2::new(
            pi_map(&start)
                .to_bitmat()
                .ok_or_else(|| Error::Internal("pi image left F_2".into()))?,
        )?;
        representatives.push((start, congruence_class(&class_mat)));
    }

    // The induced classes must be pairwise distinct and exhaust S_r/~.
    let mut classes: Vec<SymFormClassF2> = representatives.iter().map(|(_, c)| *c).collect();
    classes.sort();
    let mut dedup = classes.clone();
    dedup.dedup();
    if dedup.len() != classes.len() || classes.len() != m_r(r) {
        return Err(Error::Internal(format!(
            "double cosets of Y_{r} do not biject with form classes: got {} cosets",
            representatives.len()
        )));
    }

    // Fibers over individual matrices are principal homogeneous under the
    // unitary group; exhaustively checked for r <= 2.
    if r <= 2 {
        let mut fibers: HashMap<u64, Vec<MatF4>> = HashMap::new();
        for u in &yr {
            fibers.entry(pi_map(u).encode()).or_default().push(u.clone());
        }
        for (_, fiber) in fibers {
            if fiber.len() != unitary.len() {
                return Err(Error::Internal(format!(
                    "fiber of size {} != |U({r})(F_2)| = {}",
                    fiber.len(),
                    unitary.len()
                )));
            }
            let base = &fiber[0];
            let orbit: HashSet<u64> = unitary.iter().map(|g| g.mul(base).encode()).collect();
            if !fiber.iter().all(|u| orbit.contains(&u.encode())) {
                return Err(Error::Internal("fiber is not a single left orbit".into()));
            }
        }
    }

    Ok(YrDoubleCosets {
        r,
        unitary_order: unitary.len(),
        yr_size: yr.len(),
        coset_count: representatives.len(),
        representatives,
    })
}

/// Brute-force congruence test over GL_r(F_2), used as an oracle against
/// `congruence_class` for small ranks.
pub fn congruent_by_exhaustion(a: &SymMatF2, b: &SymMatF2) -> bool {
    if a.rank() != b.rank() {
        return false;
    }
    gl_f2(a.rank()).iter().any(|p| &a.congruent_by(p) == b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn bitmat_rank_and_inverse() {
        let mut m = BitMat::zero(3, 3);
        m.set(0, 0, true);
        m.set(0, 1, true);
        m.set(1, 1, true);
        m.set(2, 2, true);
        assert_eq!(m.rank(), 3);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), BitMat::identity(3));
    }

    #[test]
    fn bitmat_kernel_annihilates() {
        let mut rng = Rng::new(17);
        for _ in 0..500 {
            let rows = 1 + rng.below(5) as usize;
            let cols = 1 + rng.below(6) as usize;
            let mut m = BitMat::zero(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    m.set(i, j, rng.below(2) == 1);
                }
            }
            let k = m.kernel();
            assert_eq!(m.rank() + k.cols(), cols);
            if k.cols() > 0 {
                assert!(m.mul(&k).is_zero());
                assert_eq!(k.rank(), k.cols());
            }
        }
    }

    #[test]
    fn congruence_class_examples() {
        let i2 = SymMatF2::identity(2);
        assert_eq!(congruence_class(&i2), SymFormClassF2::new(2, false));
        let h = SymMatF2::hyperbolic();
        assert_eq!(congruence_class(&h), SymFormClassF2::new(2, true));
        let mixed = SymMatF2::from_rows(&[&[1, 1], &[1, 0]]).unwrap();
        assert_eq!(congruence_class(&mixed), SymFormClassF2::new(2, false));
        // [[1,1],[1,0]] is congruent to I2: exhaust the 6 elements of GL_2.
        assert!(congruent_by_exhaustion(&mixed, &i2));
        assert!(!congruent_by_exhaustion(&mixed, &h));
    }

    #[test]
    fn singular_and_asymmetric_inputs_rejected() {
        let mut m = BitMat::zero(2, 2);
        m.set(0, 1, true);
        assert!(SymMatF2::new(m).is_err()); // asymmetric
        let z = BitMat::zero(2, 2);
        assert!(SymMatF2::new(z).is_err()); // singular
    }

    #[test]
    fn canonical_form_odd_rank_three() {
        for a in s_r_all(3) {
            let (canon, p) = canonical_form(&a);
            assert_eq!(a.congruent_by(&p), canon);
            // Canonical shape: one hyperbolic plane then (1).
            let expected = SymFormClassF2::new(3, false).representative();
            assert_eq!(canon, expected);
        }
    }

    #[test]
    fn canonical_form_identity_four() {
        let i4 = SymMatF2::identity(4);
        let (canon, p) = canonical_form(&i4);
        assert_eq!(i4.congruent_by(&p), canon);
        assert_eq!(canon, SymFormClassF2::new(4, false).representative());
        // Hyperbolic block then two (1)s.
        assert!(canon.get(0, 1) && canon.get(1, 0));
        assert!(canon.get(2, 2) && canon.get(3, 3));
    }

    #[test]
    fn canonical_form_stable_under_scrambles() {
        let mut rng = Rng::new(23);
        for r in 1..=4usize {
            let gl = gl_f2(r);
            for class in SymFormClassF2::all_in_rank(r) {
                let rep = class.representative();
                for _ in 0..200 {
                    let p = &gl[rng.below(gl.len() as u64) as usize];
                    let scrambled = rep.congruent_by(p);
                    let (canon, q) = canonical_form(&scrambled);
                    assert_eq!(canon, rep);
                    assert_eq!(scrambled.congruent_by(&q), rep);
                }
            }
        }
    }

    #[test]
    fn diagonal_vector_transforms_linearly() {
        // diag(P^t A P) = P^t diag(A): exhaustive for r <= 3.
        for r in 1..=3usize {
            let gl = gl_f2(r);
            for a in s_r_all(r) {
                for p in &gl {
                    let b = a.congruent_by(p);
                    for i in 0..r {
                        let mut expect = false;
                        for j in 0..r {
                            expect ^= p.get(j, i) && a.get(j, j);
                        }
                        assert_eq!(b.get(i, i), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn m_table_matches_formula() {
        assert_eq!(
            (0..=4).map(m_r).collect::<Vec<_>>(),
            vec![1, 1, 2, 1, 2]
        );
    }

    #[test]
    fn orbit_enumeration_r2() {
        let orbits = enumerate_orbits_f2(2).unwrap();
        assert_eq!(orbits.len(), 2);
        let mut sizes: Vec<usize> = orbits.iter().map(|o| o.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3]);
        assert_eq!(s_r_all(2).len(), 4);
    }

    #[test]
    fn orbit_enumeration_r3_single_orbit() {
        let orbits = enumerate_orbits_f2(3).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].size, s_r_all(3).len());
    }

    #[test]
    fn orbit_enumeration_rejects_large_rank() {
        assert!(matches!(
            enumerate_orbits_f2(5),
            Err(Error::ExhaustionTooLarge { .. })
        ));
    }

    #[test]
    fn f4_field_axioms() {
        for x in 0..4u8 {
            assert_eq!(f4::mul(x, 1), x);
            assert_eq!(f4::conj(f4::conj(x)), x);
            if x != 0 {
                assert_eq!(f4::mul(x, f4::INV[x as usize]), 1);
                // x * conj(x) = x^3 = 1 for units.
                assert_eq!(f4::mul(x, f4::conj(x)), 1);
            }
        }
        // a^2 + a + 1 = 0
        assert_eq!(f4::add(f4::add(f4::mul(2, 2), 2), 1), 0);
        // epsilon = 1 satisfies epsilon + conj(epsilon) = 0 in characteristic 2.
        assert_eq!(f4::add(1, f4::conj(1)), 0);
    }

    #[test]
    fn trace_zero_iff_in_f2() {
        for x in 0..4u8 {
            assert_eq!(f4::trace(x) == 0, f4::in_f2(x));
        }
    }

    #[test]
    fn unitary_group_orders() {
        assert_eq!(unitary_enum(1).unwrap().len(), 3);
        assert_eq!(unitary_enum(2).unwrap().len(), 18);
        assert_eq!(unitary_enum(3).unwrap().len(), 648);
    }

    #[test]
    fn y1_is_all_units() {
        let y1 = yr_enum(1).unwrap();
        assert_eq!(y1.len(), 3);
    }

    #[test]
    fn witness_matrix_maps_to_hyperbolic() {
        // [[a, a+1], [1, a+1]] has Hermitian square [[0,1],[1,0]].
        let u = MatF4::from_entries(2, &[2, 3, 1, 3]);
        let img = pi_map(&u);
        let expected = MatF4::from_entries(2, &[0, 1, 1, 0]);
        assert_eq!(img, expected);
    }

    #[test]
    fn double_cosets_match_class_counts() {
        for r in 1..=2usize {
            let dc = yr_double_cosets(r).unwrap();
            assert_eq!(dc.coset_count, m_r(r), "r = {r}");
            assert_eq!(dc.yr_size, dc.unitary_order * s_r_all(r).len());
        }
    }

    #[test]
    fn pi_is_equivariant_for_right_translation() {
        // pi(U P) = P^t pi(U) P for P in GL_r(F_2).
        let mut rng = Rng::new(3);
        let yr = yr_enum(2).unwrap();
        let gl: Vec<MatF4> = gl_f2(2).iter().map(MatF4::from_bitmat).collect();
        for _ in 0..1000 {
            let u = &yr[rng.below(yr.len() as u64) as usize];
            let p = &gl[rng.below(gl.len() as u64) as usize];
            assert_eq!(pi_map(&u.mul(p)), p.bar_t().mul(&pi_map(u)).mul(p));
        }
    }
}
