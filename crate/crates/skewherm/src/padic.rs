//! Exact linear algebra over Z/p^k, chiefly p = 2.
//!
//! Everything downstream works with residues at a fixed, explicitly tracked
//! precision: an element "known mod p^k" is a value in `[0, p^k)` plus the
//! pair `(prime, precision)`. Addition and multiplication are exact mod p^k;
//! division is only ever by units or by explicit valuation-shifting steps
//! that reduce the recorded precision. A residue equal to 0 is reported as
//! "zero at this precision" (valuation at least k), never as exact zero.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Valuation of a residue known mod p^k: either exactly `e < k`, or
/// indistinguishable from zero at the working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// The residue is 0 mod p^k; the true valuation is at least k.
    AtLeast(u32),
}

impl Valuation {
    /// Lower bound usable in comparisons; `AtLeast(k)` floors at k.
    pub fn floor(self) -> u32 {
        match self {
            Valuation::Exact(e) => e,
            Valuation::AtLeast(k) => k,
        }
    }

    pub fn is_zero_at_precision(self) -> bool {
        matches!(self, Valuation::AtLeast(_))
    }
}

/// One residue in `[0, p^k)` carrying its context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicApprox {
    prime: u64,
    precision: u32,
    value: u64,
}

/// p^k as a u64, panicking on overflow (all supported contexts are tiny).
pub fn pow_mod_u64(p: u64, k: u32) -> u64 {
    let mut m: u64 = 1;
    for _ in 0..k {
        m = m.checked_mul(p).expect("modulus p^k must fit in u64");
    }
    m
}

impl PadicApprox {
    pub fn new(prime: u64, precision: u32, value: i64) -> Self {
        assert!(precision >= 1, "precision must be at least 1");
        let m = pow_mod_u64(prime, precision);
        let v = value.rem_euclid(m as i64) as u64;
        PadicApprox {
            prime,
            precision,
            value: v,
        }
    }

    pub fn from_residue(prime: u64, precision: u32, value: u64) -> Self {
        let m = pow_mod_u64(prime, precision);
        PadicApprox {
            prime,
            precision,
            value: value % m,
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        pow_mod_u64(self.prime, self.precision)
    }

    fn assert_same_ctx(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixed primes");
        assert_eq!(self.precision, other.precision, "mixed precisions");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let m = self.modulus();
        PadicApprox {
            value: add_mod(self.value, other.value, m),
            ..*self
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let m = self.modulus();
        PadicApprox {
            value: sub_mod(self.value, other.value, m),
            ..*self
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let m = self.modulus();
        PadicApprox {
            value: mul_mod(self.value, other.value, m),
            ..*self
        }
    }

    pub fn valuation(&self) -> Valuation {
        valuation_of(self.value, self.prime, self.precision)
    }

    pub fn is_unit(&self) -> bool {
        self.value % self.prime != 0
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Option<Self> {
        inv_mod(self.value, self.prime, self.precision).map(|v| PadicApprox { value: v, ..*self })
    }

    /// Exact division by p^e, reducing the recorded precision by e.
    pub fn shift_down(&self, e: u32) -> Result<Self> {
        if e >= self.precision {
            return Err(Error::InsufficientPrecision {
                requested: e,
                available: self.precision,
            });
        }
        let pe = pow_mod_u64(self.prime, e);
        if self.value % pe != 0 {
            return Err(Error::Singular(format!(
                "value {} is not divisible by {}^{}",
                self.value, self.prime, e
            )));
        }
        Ok(PadicApprox {
            prime: self.prime,
            precision: self.precision - e,
            value: self.value / pe,
        })
    }
}

pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + m as u128 - b as u128 % m as u128) % m as u128) as u64
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn valuation_of(value: u64, prime: u64, precision: u32) -> Valuation {
    if value == 0 {
        return Valuation::AtLeast(precision);
    }
    let mut v = value;
    let mut e = 0;
    while v % prime == 0 {
        v /= prime;
        e += 1;
    }
    debug_assert!(e < precision);
    Valuation::Exact(e)
}

/// Inverse of `a` mod p^k for `a` a unit, by lifting the mod-p inverse.
pub fn inv_mod(a: u64, prime: u64, precision: u32) -> Option<u64> {
    if a % prime == 0 {
        return None;
    }
    let m = pow_mod_u64(prime, precision);
    // Inverse mod p by Fermat (p is small and prime), then Newton doubling.
    let mut inv = pow_mod(a % prime, prime - 2, prime);
    if prime == 2 {
        inv = 1;
    }
    let mut bits = 1;
    while bits < precision {
        bits *= 2;
        // x <- x(2 - ax) doubles the number of correct digits.
        let two_minus = sub_mod(2 % m, mul_mod(a % m, inv, m), m);
        inv = mul_mod(inv, two_minus, m);
    }
    debug_assert_eq!(mul_mod(a % m, inv, m), 1);
    Some(inv)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Dense matrix of residues sharing one `(prime, precision)` context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicMatrix {
    prime: u64,
    precision: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl PadicMatrix {
    pub fn zero(prime: u64, precision: u32, rows: usize, cols: usize) -> Self {
        assert!(precision >= 1);
        // Validate the modulus fits.
        let _ = pow_mod_u64(prime, precision);
        PadicMatrix {
            prime,
            precision,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(prime: u64, precision: u32, n: usize) -> Self {
        let mut m = Self::zero(prime, precision, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Build from signed entries (row-major), reducing mod p^k.
    pub fn from_rows(prime: u64, precision: u32, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let m = pow_mod_u64(prime, precision);
        let mut out = Self::zero(prime, precision, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                out.entries[i * c + j] = x.rem_euclid(m as i64) as u64;
            }
        }
        out
    }

    pub fn from_fn(
        prime: u64,
        precision: u32,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> i64,
    ) -> Self {
        let m = pow_mod_u64(prime, precision);
        let mut out = Self::zero(prime, precision, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.entries[i * cols + j] = f(i, j).rem_euclid(m as i64) as u64;
            }
        }
        out
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        pow_mod_u64(self.prime, self.precision)
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        let m = self.modulus();
        self.entries[i * self.cols + j] = v % m;
    }

    pub fn set_signed(&mut self, i: usize, j: usize, v: i64) {
        let m = self.modulus() as i64;
        self.entries[i * self.cols + j] = v.rem_euclid(m) as u64;
    }

    pub fn entry(&self, i: usize, j: usize) -> PadicApprox {
        PadicApprox {
            prime: self.prime,
            precision: self.precision,
            value: self.get(i, j),
        }
    }

    fn assert_same_ctx(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixed primes");
        assert_eq!(self.precision, other.precision, "mixed precisions");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let m = self.modulus();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| add_mod(a, b, m))
            .collect();
        PadicMatrix {
            entries,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let m = self.modulus();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| sub_mod(a, b, m))
            .collect();
        PadicMatrix {
            entries,
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        let entries = self.entries.iter().map(|&a| sub_mod(0, a, m)).collect();
        PadicMatrix {
            entries,
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let m = self.modulus() as u128;
        let mut out = Self::zero(self.prime, self.precision, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l) as u128;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.entries[i * other.cols + j] as u128;
                    out.entries[i * other.cols + j] =
                        ((cur + a * other.get(l, j) as u128) % m) as u64;
                }
            }
        }
        out
    }

    pub fn scale(&self, c: u64) -> Self {
        let m = self.modulus();
        let entries = self.entries.iter().map(|&a| mul_mod(a, c, m)).collect();
        PadicMatrix {
            entries,
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.prime, self.precision, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Entry-wise valuation, honoring the tri-state convention.
    pub fn entry_valuation(&self, i: usize, j: usize) -> Valuation {
        valuation_of(self.get(i, j), self.prime, self.precision)
    }

    /// Truncate to a smaller precision (forgetting high digits).
    pub fn reduce_precision(&self, new_precision: u32) -> Self {
        assert!(new_precision >= 1 && new_precision <= self.precision);
        let m = pow_mod_u64(self.prime, new_precision);
        let entries = self.entries.iter().map(|&e| e % m).collect();
        PadicMatrix {
            prime: self.prime,
            precision: new_precision,
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Reinterpret at higher precision. The new digits are unknown in truth;
    /// callers use this only for constructions where the lift is canonical
    /// (e.g. 0/1 basis vectors).
    pub fn lift_precision(&self, new_precision: u32) -> Self {
        assert!(new_precision >= self.precision);
        let _ = pow_mod_u64(self.prime, new_precision);
        PadicMatrix {
            prime: self.prime,
            precision: new_precision,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.clone(),
        }
    }

    pub fn column(&self, j: usize) -> Self {
        let mut out = Self::zero(self.prime, self.precision, self.rows, 1);
        for i in 0..self.rows {
            out.set(i, 0, self.get(i, j));
        }
        out
    }

    pub fn hstack(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zero(self.prime, self.precision, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let mut out = Self::zero(
            self.prime,
            self.precision,
            self.rows + other.rows,
            self.cols + other.cols,
        );
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zero(self.prime, self.precision, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.set(i, j, self.get(row0 + i, col0 + j));
            }
        }
        out
    }

    /// Select columns by index, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zero(self.prime, self.precision, self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Inverse for matrices invertible over the local ring (unit determinant),
    /// by Gauss-Jordan with unit pivots.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let m = self.modulus();
        let mut a = self.clone();
        let mut inv = Self::identity(self.prime, self.precision, n);
        for t in 0..n {
            let pivot_row = (t..n).find(|&i| a.get(i, t) % self.prime != 0)?;
            if pivot_row != t {
                a.swap_rows(t, pivot_row);
                inv.swap_rows(t, pivot_row);
            }
            let pinv = inv_mod(a.get(t, t), self.prime, self.precision)?;
            a.scale_row(t, pinv);
            inv.scale_row(t, pinv);
            for i in 0..n {
                if i != t {
                    let f = a.get(i, t);
                    if f != 0 {
                        a.row_sub_mul(i, t, f, m);
                        inv.row_sub_mul(i, t, f, m);
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.inverse().is_some()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn scale_row(&mut self, r: usize, c: u64) {
        let m = self.modulus();
        for j in 0..self.cols {
            let v = self.entries[r * self.cols + j];
            self.entries[r * self.cols + j] = mul_mod(v, c, m);
        }
    }

    /// row_i -= f * row_t
    fn row_sub_mul(&mut self, i: usize, t: usize, f: u64, m: u64) {
        for j in 0..self.cols {
            let v = self.entries[i * self.cols + j];
            let w = mul_mod(f, self.entries[t * self.cols + j], m);
            self.entries[i * self.cols + j] = sub_mod(v, w, m);
        }
    }

    /// col_j -= f * col_t
    fn col_sub_mul(&mut self, j: usize, t: usize, f: u64, m: u64) {
        for i in 0..self.rows {
            let v = self.entries[i * self.cols + j];
            let w = mul_mod(f, self.entries[i * self.cols + t], m);
            self.entries[i * self.cols + j] = sub_mod(v, w, m);
        }
    }

    /// Random matrix with uniform residue entries.
    pub fn random(prime: u64, precision: u32, rows: usize, cols: usize, rng: &mut Rng) -> Self {
        let m = pow_mod_u64(prime, precision);
        let mut out = Self::zero(prime, precision, rows, cols);
        for e in out.entries.iter_mut() {
            *e = rng.below(m);
        }
        out
    }

    /// Random invertible matrix, retrying until the determinant is a unit.
    pub fn random_unimodular(
        prime: u64,
        precision: u32,
        n: usize,
        rng: &mut Rng,
    ) -> (Self, Self) {
        loop {
            let p = Self::random(prime, precision, n, n, rng);
            if let Some(pinv) = p.inverse() {
                return (p, pinv);
            }
        }
    }
}

/// Diagonalization over the local ring: `P * A * Q = S` with `P`, `Q`
/// invertible and `S` diagonal with entries p^{e_1} | p^{e_2} | ...
///
/// An exponent equal to the working precision means the elementary divisor is
/// zero at this precision (tri-state: it is *not* claimed to be exactly zero).
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub s: PadicMatrix,
    pub p: PadicMatrix,
    pub q: PadicMatrix,
    /// One exponent per diagonal slot, length min(rows, cols), non-decreasing.
    pub exponents: Vec<u32>,
}

impl SmithForm {
    /// Exponent for a *column* of the domain: diagonal exponent when the
    /// column meets the diagonal, otherwise precision (zero column of S).
    pub fn column_exponent(&self, j: usize) -> u32 {
        if j < self.exponents.len() {
            self.exponents[j]
        } else {
            self.s.precision()
        }
    }

    /// Number of exponents equal to e.
    pub fn count_exponent(&self, e: u32) -> usize {
        self.exponents.iter().filter(|&&x| x == e).count()
    }

    /// Sum of exponents, with zero-at-precision slots counted as precision;
    /// equals the valuation of the determinant for square full-rank input.
    pub fn det_valuation(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Smith normal form over Z/p^k. Pivot selection: smallest valuation first,
/// ties broken in row-major order, which makes the transform deterministic.
pub fn smith_form(a: &PadicMatrix) -> SmithForm {
    let prime = a.prime();
    let k = a.precision();
    let m = a.modulus();
    let rows = a.rows();
    let cols = a.cols();
    let mut s = a.clone();
    let mut p = PadicMatrix::identity(prime, k, rows);
    let mut q = PadicMatrix::identity(prime, k, cols);
    let rank_bound = rows.min(cols);
    let mut exponents = Vec::with_capacity(rank_bound);

    for t in 0..rank_bound {
        // Locate the minimal-valuation entry of the trailing block.
        let mut best: Option<(usize, usize, u32)> = None;
        for i in t..rows {
            for j in t..cols {
                if let Valuation::Exact(v) = s.entry_valuation(i, j) {
                    if best.map_or(true, |(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                        if v == 0 {
                            break;
                        }
                    }
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((bi, bj, v)) = best else {
            // Trailing block is zero at this precision.
            for _ in t..rank_bound {
                exponents.push(k);
            }
            break;
        };

        s.swap_rows(t, bi);
        p.swap_rows(t, bi);
        s.swap_cols(t, bj);
        q.swap_cols(t, bj);

        // Normalize the pivot to exactly p^v.
        let pv = pow_mod_u64(prime, v);
        let unit = s.get(t, t) / pv;
        let uinv = inv_mod(unit, prime, k).expect("unit part is invertible");
        s.scale_row(t, uinv);
        p.scale_row(t, uinv);

        // Every remaining entry in row/column t has valuation >= v, so the
        // clearing quotients are exact.
        for i in (t + 1)..rows {
            let e = s.get(i, t);
            if e != 0 {
                let f = e / pv;
                s.row_sub_mul(i, t, f, m);
                p.row_sub_mul(i, t, f, m);
            }
        }
        for j in (t + 1)..cols {
            let e = s.get(t, j);
            if e != 0 {
                let f = e / pv;
                s.col_sub_mul(j, t, f, m);
                q.col_sub_mul(j, t, f, m);
            }
        }
        exponents.push(v);
    }

    debug_assert!(exponents.windows(2).all(|w| w[0] <= w[1]));
    SmithForm { s, p, q, exponents }
}

/// Basis of the saturated kernel `{x : A x = 0 mod p^j}`: only the directions
/// that survive saturation are returned, so the output columns extend to a
/// basis of the ambient lattice.
pub fn kernel_mod(a: &PadicMatrix, j: u32) -> Result<PadicMatrix> {
    if j == 0 || j > a.precision() {
        return Err(Error::InsufficientPrecision {
            requested: j,
            available: a.precision(),
        });
    }
    let sf = smith_form(a);
    let idx: Vec<usize> = (0..a.cols())
        .filter(|&c| sf.column_exponent(c) >= j)
        .collect();
    Ok(sf.q.select_columns(&idx))
}

/// Smallest direct summand of the ambient lattice containing the span of the
/// columns of `b`. The result records its effective precision (reduced by the
/// largest power of p divided out). Errors with `PrecisionExhausted` if the
/// effective precision would drop below `floor`.
pub fn saturate(b: &PadicMatrix, floor: u32) -> Result<PadicMatrix> {
    let k = b.precision();
    let sf = smith_form(b);
    let c = b.cols();
    if c == 0 {
        return Ok(b.clone());
    }
    let max_e = (0..c).map(|j| sf.column_exponent(j)).max().unwrap();
    if max_e == 0 {
        // Already a direct summand; leave the basis untouched.
        return Ok(b.clone());
    }
    if max_e >= k || k - max_e < floor {
        return Err(Error::PrecisionExhausted {
            effective: k.saturating_sub(max_e),
            floor,
        });
    }
    // P B Q = S, so B Q = P^{-1} S and the saturation is spanned by the
    // first c columns of P^{-1}.
    let pinv = sf
        .p
        .inverse()
        .expect("smith transform is invertible by construction");
    let cols: Vec<usize> = (0..c).collect();
    Ok(pinv.select_columns(&cols).reduce_precision(k - max_e))
}

/// Solve `A X = B mod p^k` via the Smith form, dividing where the elementary
/// divisors demand it. Returns the solution together with the worst precision
/// loss among the divisions performed; the returned representative satisfies
/// the equation exactly mod p^k.
pub fn solve_exact(a: &PadicMatrix, b: &PadicMatrix) -> Result<(PadicMatrix, u32)> {
    assert_eq!(a.rows(), b.rows());
    let k = a.precision();
    let sf = smith_form(a);
    let c = sf.p.mul(b);
    let mut y = PadicMatrix::zero(a.prime(), k, a.cols(), b.cols());
    let mut loss = 0u32;
    for i in 0..a.rows() {
        let e = if i < sf.exponents.len() {
            sf.exponents[i]
        } else {
            k
        };
        if e >= k {
            // Zero row: demand consistency, contribute y_i = 0.
            for jj in 0..b.cols() {
                if c.get(i, jj) != 0 {
                    return Err(Error::Singular(format!(
                        "inconsistent linear system at row {i}"
                    )));
                }
            }
            continue;
        }
        let pe = pow_mod_u64(a.prime(), e);
        for jj in 0..b.cols() {
            let v = c.get(i, jj);
            if v % pe != 0 {
                return Err(Error::Singular(format!(
                    "inconsistent linear system at row {i}: valuation below {e}"
                )));
            }
            y.set(i, jj, v / pe);
        }
        loss = loss.max(e);
    }
    Ok((sf.q.mul(&y), loss))
}
