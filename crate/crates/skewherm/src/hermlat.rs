//! Hermitian lattices over the maximal order of a quadratic extension E/Q_p
//! with p odd: Jordan splittings into modular blocks, the scale/rank/normal
//! type, determinant classes, and the isometry decisions for the unramified
//! and ramified non-dyadic cases.
//!
//! Elements of O_E are pairs a + b*sqrt(theta) with a, b known mod p^k,
//! where theta is a non-residue unit (unramified), p itself, or a
//! non-residue unit times p (the two ramified extensions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{inv_mod, pow_mod_u64};
use crate::rng::Rng;

/// Which quadratic extension of Q_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtKind {
    /// theta = u, a non-residue unit; pi = p and v(p) = 1.
    Unramified,
    /// theta = p; pi = sqrt(p) and v(p) = 2.
    RamifiedPrime,
    /// theta = u p with u a non-residue unit; pi = sqrt(up), v(p) = 2.
    RamifiedUnitPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadExt {
    pub p: u64,
    pub kind: ExtKind,
    pub precision: u32,
}

/// Smallest positive non-residue mod p.
pub fn nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&u| legendre(u, p) == -1)
        .expect("every odd prime has a non-residue")
}

pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let mut acc = 1u64;
    let mut base = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

impl QuadExt {
    pub fn new(p: u64, kind: ExtKind, precision: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::ParameterMismatch(
                "dyadic base field rejected: the toolkit covers odd p only".into(),
            ));
        }
        if p < 3 || precision < 2 || !is_small_prime(p) {
            return Err(Error::ParameterMismatch(format!(
                "invalid extension parameters p = {p}, precision = {precision}"
            )));
        }
        Ok(QuadExt { p, kind, precision })
    }

    pub fn is_ramified(&self) -> bool {
        !matches!(self.kind, ExtKind::Unramified)
    }

    pub fn modulus(&self) -> u64 {
        pow_mod_u64(self.p, self.precision)
    }

    /// theta as the pair (unit factor, power of p): u * p^e.
    pub fn theta(&self) -> (u64, u32) {
        match self.kind {
            ExtKind::Unramified => (nonresidue(self.p), 0),
            ExtKind::RamifiedPrime => (1, 1),
            ExtKind::RamifiedUnitPrime => (nonresidue(self.p), 1),
        }
    }

    fn theta_value(&self) -> u64 {
        let (u, e) = self.theta();
        let m = self.modulus();
        if e == 0 {
            u % m
        } else {
            u % m * (self.p % m) % m
        }
    }

    /// Normalized valuation of p: 1 if unramified, 2 if ramified.
    pub fn e_times(&self) -> u32 {
        if self.is_ramified() {
            2
        } else {
            1
        }
    }
}

fn is_small_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Element a + b sqrt(theta) of O_E, coordinates mod p^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtElem {
    pub a: u64,
    pub b: u64,
}

impl ExtElem {
    pub fn zero() -> Self {
        ExtElem { a: 0, b: 0 }
    }

    pub fn from_base(ext: &QuadExt, a: i64) -> Self {
        let m = ext.modulus() as i64;
        ExtElem {
            a: a.rem_euclid(m) as u64,
            b: 0,
        }
    }

    pub fn new(ext: &QuadExt, a: i64, b: i64) -> Self {
        let m = ext.modulus() as i64;
        ExtElem {
            a: a.rem_euclid(m) as u64,
            b: b.rem_euclid(m) as u64,
        }
    }

    pub fn add(&self, o: &ExtElem, ext: &QuadExt) -> ExtElem {
        let m = ext.modulus();
        ExtElem {
            a: (self.a + o.a) % m,
            b: (self.b + o.b) % m,
        }
    }

    pub fn sub(&self, o: &ExtElem, ext: &QuadExt) -> ExtElem {
        let m = ext.modulus();
        ExtElem {
            a: (self.a + m - o.a) % m,
            b: (self.b + m - o.b) % m,
        }
    }

    pub fn mul(&self, o: &ExtElem, ext: &QuadExt) -> ExtElem {
        let m = ext.modulus() as u128;
        let th = ext.theta_value() as u128;
        let (a1, b1, a2, b2) = (
            self.a as u128,
            self.b as u128,
            o.a as u128,
            o.b as u128,
        );
        ExtElem {
            a: ((a1 * a2 + b1 * b2 % m * th) % m) as u64,
            b: ((a1 * b2 + b1 * a2) % m) as u64,
        }
    }

    pub fn conj(&self, ext: &QuadExt) -> ExtElem {
        let m = ext.modulus();
        ExtElem {
            a: self.a,
            b: (m - self.b) % m,
        }
    }

    /// Norm a^2 - theta b^2, an element of the base field.
    pub fn norm(&self, ext: &QuadExt) -> u64 {
        self.mul(&self.conj(ext), ext).a
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Valuation in units of v(pi) = 1; None when zero at this precision.
    pub fn valuation(&self, ext: &QuadExt) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let va = vp(self.a, ext.p);
        let vb = vp(self.b, ext.p);
        Some(if ext.is_ramified() {
            // v(a) = 2 v_p(a), v(b sqrt(theta)) = 2 v_p(b) + 1.
            let from_a = va.map(|v| 2 * v);
            let from_b = vb.map(|v| 2 * v + 1);
            match (from_a, from_b) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) => x,
                (None, Some(y)) => y,
                (None, None) => unreachable!(),
            }
        } else {
            match (va, vb) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) => x,
                (None, Some(y)) => y,
                (None, None) => unreachable!(),
            }
        })
    }

    /// Multiplicative inverse of a unit (valuation 0).
    pub fn invert(&self, ext: &QuadExt) -> Option<ExtElem> {
        if self.valuation(ext) != Some(0) {
            return None;
        }
        let n = self.norm(ext);
        let ninv = inv_mod_p(n, ext)?;
        let c = self.conj(ext);
        Some(ExtElem {
            a: mulm(c.a, ninv, ext),
            b: mulm(c.b, ninv, ext),
        })
    }

    /// Exact division by pi^j, reducing known digits; fails when the
    /// valuation is too small.
    pub fn div_pi(&self, j: u32, ext: &QuadExt) -> Option<ExtElem> {
        let mut cur = *self;
        if ext.is_ramified() {
            let th_unit = {
                let (u, _) = ext.theta();
                u % ext.modulus()
            };
            let th_unit_inv = inv_mod_p(th_unit, ext)?;
            for _ in 0..j {
                // (a + b sqrt(th)) / sqrt(th) = b + (a / (u p)) sqrt(th).
                if cur.a % ext.p != 0 {
                    return None;
                }
                let new_b = mulm(cur.a / ext.p, th_unit_inv, ext);
                cur = ExtElem { a: cur.b, b: new_b };
            }
            Some(cur)
        } else {
            let pj = pow_mod_u64(ext.p, j);
            if cur.a % pj != 0 || cur.b % pj != 0 {
                return None;
            }
            Some(ExtElem {
                a: cur.a / pj,
                b: cur.b / pj,
            })
        }
    }

    /// x / y for v(x) >= v(y).
    pub fn div_exact(&self, y: &ExtElem, ext: &QuadExt) -> Option<ExtElem> {
        let vy = y.valuation(ext)?;
        let y_unit = y.div_pi(vy, ext)?;
        let y_inv = y_unit.invert(ext)?;
        self.div_pi(vy, ext).map(|x| x.mul(&y_inv, ext))
    }
}

fn vp(x: u64, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    let mut x = x;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

fn mulm(a: u64, b: u64, ext: &QuadExt) -> u64 {
    ((a as u128 * b as u128) % ext.modulus() as u128) as u64
}

fn inv_mod_p(a: u64, ext: &QuadExt) -> Option<u64> {
    inv_mod(a % ext.modulus(), ext.p, ext.precision)
}

/// A Hermitian lattice: Gram matrix over O_E with conj-transpose symmetry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermLattice {
    pub ext: QuadExt,
    n: usize,
    entries: Vec<ExtElem>,
}

impl HermLattice {
    pub fn new(ext: QuadExt, entries: Vec<Vec<ExtElem>>) -> Result<Self> {
        let n = entries.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in &entries {
            if row.len() != n {
                return Err(Error::ParameterMismatch("ragged Gram matrix".into()));
            }
            flat.extend_from_slice(row);
        }
        let lat = HermLattice {
            ext,
            n,
            entries: flat,
        };
        for i in 0..n {
            for j in 0..n {
                if lat.get(j, i) != lat.get(i, j).conj(&ext) {
                    return Err(Error::InvalidModule(format!(
                        "Gram is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(lat)
    }

    /// Diagonal lattice with base-field entries u * p^e.
    pub fn diagonal(ext: QuadExt, values: &[(i64, u32)]) -> Result<Self> {
        let n = values.len();
        let mut rows = vec![vec![ExtElem::zero(); n]; n];
        for (i, &(u, e)) in values.iter().enumerate() {
            let pe = pow_mod_u64(ext.p, e) as i64;
            rows[i][i] = ExtElem::from_base(&ext, u * pe);
        }
        Self::new(ext, rows)
    }

    /// The hyperbolic plane H(i) = [[0, pi^i], [conj(pi^i), 0]].
    pub fn hyperbolic_plane(ext: QuadExt, i: u32) -> Result<Self> {
        let pi_i = pi_power(&ext, i);
        let rows = vec![
            vec![ExtElem::zero(), pi_i],
            vec![pi_i.conj(&ext), ExtElem::zero()],
        ];
        Self::new(ext, rows)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> ExtElem {
        self.entries[i * self.n + j]
    }

    pub fn direct_sum(&self, other: &HermLattice) -> Result<HermLattice> {
        if self.ext != other.ext {
            return Err(Error::ParameterMismatch(
                "summands live over different extensions".into(),
            ));
        }
        let n = self.n + other.n;
        let mut rows = vec![vec![ExtElem::zero(); n]; n];
        for i in 0..self.n {
            for j in 0..self.n {
                rows[i][j] = self.get(i, j);
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                rows[self.n + i][self.n + j] = other.get(i, j);
            }
        }
        HermLattice::new(self.ext, rows)
    }

    /// Congruence transform P^t H conj(P) for an O_E-matrix P given row-major.
    pub fn transform(&self, p_mat: &[ExtElem]) -> Result<HermLattice> {
        let n = self.n;
        assert_eq!(p_mat.len(), n * n);
        let get_p = |i: usize, j: usize| p_mat[i * n + j];
        let mut rows = vec![vec![ExtElem::zero(); n]; n];
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for j in 0..n {
                let mut acc = ExtElem::zero();
                for k in 0..n {
                    for l in 0..n {
                        let term = get_p(k, i)
                            .mul(&self.get(k, l), &self.ext)
                            .mul(&get_p(l, j).conj(&self.ext), &self.ext);
                        acc = acc.add(&term, &self.ext);
                    }
                }
                rows[i][j] = acc;
            }
        }
        HermLattice::new(self.ext, rows)
    }

    /// Seeded random change of basis by a unimodular O_E-matrix.
    pub fn disguise(&self, seed: u64) -> HermLattice {
        let mut rng = Rng::new(seed);
        let n = self.n;
        let m = self.ext.modulus();
        loop {
            let p_mat: Vec<ExtElem> = (0..n * n)
                .map(|_| ExtElem {
                    a: rng.below(m),
                    b: rng.below(m),
                })
                .collect();
            if !ext_mat_invertible(&p_mat, n, &self.ext) {
                continue;
            }
            if let Ok(t) = self.transform(&p_mat) {
                return t;
            }
        }
    }

    /// Determinant of the Gram matrix, an element of the base field.
    pub fn det(&self) -> Result<ExtElem> {
        // Fraction-free cofactor expansion is fine at these ranks.
        Ok(det_rec(&self.entries, self.n, &self.ext))
    }

    pub fn to_file(&self) -> LatticeFile {
        let (unit, _) = self.ext.theta();
        LatticeFile {
            p: self.ext.p,
            theta: ThetaDesc {
                kind: match self.ext.kind {
                    ExtKind::Unramified => "unit-nonresidue".into(),
                    ExtKind::RamifiedPrime => "prime".into(),
                    ExtKind::RamifiedUnitPrime => "unit-times-prime".into(),
                },
                unit,
            },
            precision: self.ext.precision,
            gram: (0..self.n)
                .map(|i| (0..self.n).map(|j| [self.get(i, j).a, self.get(i, j).b]).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LatticeFile = serde_json::from_str(text)?;
        file.into_lattice()
    }
}

fn pi_power(ext: &QuadExt, i: u32) -> ExtElem {
    let m = ext.modulus();
    if ext.is_ramified() {
        // pi = sqrt(theta): pi^(2c) = theta^c, pi^(2c+1) = theta^c sqrt(theta).
        let th = ext.theta_value();
        let mut val = 1u64;
        for _ in 0..(i / 2) {
            val = ((val as u128 * th as u128) % m as u128) as u64;
        }
        if i % 2 == 0 {
            ExtElem { a: val, b: 0 }
        } else {
            ExtElem { a: 0, b: val }
        }
    } else {
        ExtElem {
            a: pow_mod_u64(ext.p, i) % m,
            b: 0,
        }
    }
}

fn det_rec(entries: &[ExtElem], n: usize, ext: &QuadExt) -> ExtElem {
    if n == 0 {
        return ExtElem { a: 1, b: 0 };
    }
    if n == 1 {
        return entries[0];
    }
    let mut acc = ExtElem::zero();
    for col in 0..n {
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for i in 1..n {
            for j in 0..n {
                if j != col {
                    minor.push(entries[i * n + j]);
                }
            }
        }
        let term = entries[col].mul(&det_rec(&minor, n - 1, ext), ext);
        if col % 2 == 0 {
            acc = acc.add(&term, ext);
        } else {
            acc = acc.sub(&term, ext);
        }
    }
    acc
}

fn ext_mat_invertible(m: &[ExtElem], n: usize, ext: &QuadExt) -> bool {
    let mut a = m.to_vec();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&i| a[i * n + col].valuation(ext) == Some(0)) else {
            return false;
        };
        for j in 0..n {
            a.swap(col * n + j, pivot * n + j);
        }
        let inv = a[col * n + col].invert(ext).unwrap();
        for j in 0..n {
            a[col * n + j] = a[col * n + j].mul(&inv, ext);
        }
        for i in 0..n {
            if i != col && !a[i * n + col].is_zero() {
                let f = a[i * n + col];
                for j in 0..n {
                    let sub = f.mul(&a[col * n + j], ext);
                    a[i * n + j] = a[i * n + j].sub(&sub, ext);
                }
            }
        }
    }
    true
}

/// Determinant of a block, kept in factored form so high valuations never
/// collapse to zero at the working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockDet {
    /// v_p of the determinant.
    pub val_p: u32,
    /// The unit cofactor mod p^k.
    pub unit: u64,
}

/// One modular component of a Jordan splitting, already merged by scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanBlock {
    /// Scale exponent s(lambda): sL = (pi^scale).
    pub scale: u32,
    pub rank: usize,
    /// Norm exponent: nL = (pi^norm_exp).
    pub norm_exp: u32,
    /// normal means nL = sL.
    pub normal: bool,
    /// Determinant of the component Gram.
    pub det: BlockDet,
}

#[derive(Clone, Debug)]
pub struct JordanData {
    pub ext: QuadExt,
    pub blocks: Vec<JordanBlock>,
    /// u(lambda) exponents: the norm of the sublattice pairing into
    /// (pi^{s(lambda)}).
    pub u_exponents: Vec<u32>,
    /// f(lambda) = u(lambda) + u(lambda+1) - 2 s(lambda), lambda < t.
    pub f_exponents: Vec<i64>,
}

impl JordanData {
    pub fn type_profile(&self) -> Vec<(u32, usize, bool)> {
        self.blocks
            .iter()
            .map(|b| (b.scale, b.rank, b.normal))
            .collect()
    }
}

/// Same type: equal chains of (scale, rank, normal flag).
pub fn type_equal(a: &JordanData, b: &JordanData) -> bool {
    a.ext == b.ext && a.type_profile() == b.type_profile()
}

/// Restore exact Hermitian symmetry after division steps: the divisions are
/// only accurate one digit short of the working precision, so the defect is
/// top-digit noise; the upper triangle is kept as the canonical
/// representative.
fn hermitize(work: &mut [ExtElem], n: usize, ext: &QuadExt) {
    for l in 0..n {
        work[l * n + l].b = 0;
        for m in (l + 1)..n {
            work[m * n + l] = work[l * n + m].conj(ext);
        }
    }
}

/// Greedy Jordan splitting: repeatedly split off a minimal-scale rank-1
/// block when the scale is realized on the diagonal, otherwise a modular
/// plane on the pivot pair; normal planes are then diagonalized so odd-rank
/// components come out with orthogonal bases. Equal-scale pieces are merged
/// before type data is reported.
pub fn jordan_splitting(lattice: &HermLattice) -> Result<JordanData> {
    let ext = lattice.ext;
    // Raw pieces: (scale, gram of the piece).
    let mut pieces: Vec<(u32, Vec<ExtElem>, usize)> = Vec::new();
    let mut work: Vec<ExtElem> = lattice.entries.clone();
    let mut n = lattice.n;
    let mut spent: u32 = 0;

    while n > 0 {
        let mut best: Option<(usize, usize, u32)> = None;
        for i in 0..n {
            for j in 0..n {
                if let Some(v) = work[i * n + j].valuation(&ext) {
                    if best.map_or(true, |(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((bi, bj, v)) = best else {
            return Err(Error::Singular(
                "Gram matrix is zero at this precision: degenerate lattice".into(),
            ));
        };
        if spent + v + 2 > ext.precision * ext.e_times() {
            return Err(Error::PrecisionExhausted {
                effective: ext.precision * ext.e_times() - spent,
                floor: v + 2,
            });
        }

        let diag_pivot = (0..n).find(|&i| work[i * n + i].valuation(&ext) == Some(v));
        if let Some(i) = diag_pivot {
            let pivot = work[i * n + i];
            // Orthogonalize every other vector against e_i, then delete.
            let coeffs: Vec<ExtElem> = (0..n)
                .map(|l| {
                    if l == i {
                        ExtElem::zero()
                    } else {
                        work[l * n + i].div_exact(&pivot, &ext).expect(
                            "pivot has minimal valuation, so the quotient is integral",
                        )
                    }
                })
                .collect();
            let mut next = Vec::with_capacity((n - 1) * (n - 1));
            for l in 0..n {
                if l == i {
                    continue;
                }
                for m in 0..n {
                    if m == i {
                        continue;
                    }
                    // h(e_l - c_l e_i, e_m - c_m e_i): subtract c_l row i,
                    // then the conjugated column term vanishes against the
                    // orthogonality in the first slot.
                    let mut val = work[l * n + m].sub(&coeffs[l].mul(&work[i * n + m], &ext), &ext);
                    let cross = work[l * n + i]
                        .sub(&coeffs[l].mul(&pivot, &ext), &ext)
                        .mul(&coeffs[m].conj(&ext), &ext);
                    val = val.sub(&cross, &ext);
                    next.push(val);
                }
            }
            pieces.push((v, vec![pivot], 1));
            work = next;
            n -= 1;
            hermitize(&mut work, n, &ext);
            spent = spent.max(v);
        } else {
            // No diagonal value achieves the scale: split the plane on the
            // pivot pair (bi, bj).
            let (i, j) = (bi.min(bj), bi.max(bj));
            let gii = work[i * n + i];
            let gij = work[i * n + j];
            let gji = work[j * n + i];
            let gjj = work[j * n + j];
            let det2 = gii.mul(&gjj, &ext).sub(&gij.mul(&gji, &ext), &ext);
            // Orthogonalize the rest against the plane via the 2x2 system.
            let mut next = Vec::with_capacity((n - 2) * (n - 2));
            let mut coeff_a = vec![ExtElem::zero(); n];
            let mut coeff_b = vec![ExtElem::zero(); n];
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                let hli = work[l * n + i];
                let hlj = work[l * n + j];
                // a h(ei,ei) + b h(ej,ei) = h(el,ei);
                // a h(ei,ej) + b h(ej,ej) = h(el,ej).
                let num_a = hli.mul(&gjj, &ext).sub(&hlj.mul(&gji, &ext), &ext);
                let num_b = gii.mul(&hlj, &ext).sub(&gij.mul(&hli, &ext), &ext);
                coeff_a[l] = num_a
                    .div_exact(&det2, &ext)
                    .ok_or_else(|| Error::PrecisionExhausted {
                        effective: ext.precision * ext.e_times() - spent,
                        floor: 2 * v,
                    })?;
                coeff_b[l] = num_b
                    .div_exact(&det2, &ext)
                    .ok_or_else(|| Error::PrecisionExhausted {
                        effective: ext.precision * ext.e_times() - spent,
                        floor: 2 * v,
                    })?;
            }
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                for m in 0..n {
                    if m == i || m == j {
                        continue;
                    }
                    let mut val = work[l * n + m];
                    val = val.sub(&coeff_a[l].mul(&work[i * n + m], &ext), &ext);
                    val = val.sub(&coeff_b[l].mul(&work[j * n + m], &ext), &ext);
                    // First slot is now orthogonal to the plane, so the
                    // conjugated corrections in the second slot vanish.
                    next.push(val);
                }
            }
            let plane = vec![gii, gij, gji, gjj];
            // A normal plane (norm ideal = scale) splits further into two
            // orthogonal lines; search small combinations e_i + c e_j.
            match diagonalize_plane(&plane, v, &ext) {
                Some((d1, d2)) => {
                    pieces.push((v, vec![d1], 1));
                    pieces.push((v, vec![d2], 1));
                }
                None => pieces.push((v, plane, 2)),
            }
            work = next;
            n -= 2;
            hermitize(&mut work, n, &ext);
            spent = spent.max(2 * v);
        }
    }

    assemble_jordan(ext, pieces)
}

/// Try to find a vector of norm valuation exactly `scale` in the plane;
/// success means the plane is normal and splits into two lines.
fn diagonalize_plane(
    plane: &[ExtElem],
    scale: u32,
    ext: &QuadExt,
) -> Option<(ExtElem, ExtElem)> {
    let gii = plane[0];
    let gij = plane[1];
    let gji = plane[2];
    let gjj = plane[3];
    // Candidates c = x + y sqrt(theta) with small coordinates; the residue
    // field is covered by x, y < p.
    for x in 0..ext.p {
        for y in 0..ext.p {
            let c = ExtElem { a: x, b: y };
            // q(e_i + c e_j) = g_ii + c-bar g_ij + c g_ji + N(c) g_jj.
            let q = gii
                .add(&c.conj(ext).mul(&gij, ext), ext)
                .add(&c.mul(&gji, ext), ext)
                .add(&c.mul(&c.conj(ext), ext).mul(&gjj, ext), ext);
            if q.valuation(ext) == Some(scale) {
                // Split the line <e_i + c e_j> off; the complement line has
                // Gram det/q up to a norm.
                let det2 = gii.mul(&gjj, ext).sub(&gij.mul(&gji, ext), ext);
                let other = det2.div_exact(&q, ext)?;
                return Some((q, other));
            }
        }
    }
    None
}

fn assemble_jordan(ext: QuadExt, pieces: Vec<(u32, Vec<ExtElem>, usize)>) -> Result<JordanData> {
    use std::collections::BTreeMap;
    let mut by_scale: BTreeMap<u32, Vec<(Vec<ExtElem>, usize)>> = BTreeMap::new();
    for (scale, gram, rank) in pieces {
        by_scale.entry(scale).or_default().push((gram, rank));
    }
    let mut blocks = Vec::new();
    for (&scale, comps) in &by_scale {
        let mut rank = 0usize;
        let mut norm_exp = u32::MAX;
        let mut det = BlockDet { val_p: 0, unit: 1 };
        let mut mul_det = |value: &ExtElem| -> Result<()> {
            if value.b != 0 {
                return Err(Error::Internal(
                    "block determinant must lie in the base field".into(),
                ));
            }
            let Some(v) = vp(value.a, ext.p) else {
                return Err(Error::PrecisionExhausted {
                    effective: 0,
                    floor: 2,
                });
            };
            let unit = value.a / pow_mod_u64(ext.p, v);
            det.val_p += v;
            det.unit = ((det.unit as u128 * unit as u128) % ext.modulus() as u128) as u64;
            Ok(())
        };
        for (gram, r) in comps {
            rank += r;
            match r {
                1 => {
                    let v = gram[0].valuation(&ext).unwrap();
                    norm_exp = norm_exp.min(v);
                    mul_det(&gram[0])?;
                }
                2 => {
                    // Norm ideal of a plane: diagonal values plus the trace
                    // ideal of the off-diagonal entry.
                    for &d in [gram[0], gram[3]].iter() {
                        if let Some(v) = d.valuation(&ext) {
                            norm_exp = norm_exp.min(v);
                        }
                    }
                    if let Some(v) = gram[1].valuation(&ext) {
                        let tr = if ext.is_ramified() { v + (v % 2) } else { v };
                        norm_exp = norm_exp.min(tr);
                    }
                    let d2 = gram[0]
                        .mul(&gram[3], &ext)
                        .sub(&gram[1].mul(&gram[2], &ext), &ext);
                    mul_det(&d2)?;
                }
                _ => unreachable!(),
            }
        }
        // Odd-rank components must have come out as orthogonal lines (every
        // normal plane was diagonalized, and subnormal planes only occur at
        // odd ramified scales where no rank-1 piece can live), hence normal.
        if rank % 2 == 1 {
            if comps.iter().any(|(_, r)| *r != 1) {
                return Err(Error::Internal(
                    "odd-rank modular component was not fully diagonalized".into(),
                ));
            }
            if norm_exp != scale {
                return Err(Error::Internal(
                    "odd-rank modular component is not normal".into(),
                ));
            }
        }
        blocks.push(JordanBlock {
            scale,
            rank,
            norm_exp,
            normal: norm_exp == scale,
            det,
        });
    }

    // u(lambda): norm exponent of L_(s(lambda)) = sum over mu of
    // pi^{max(0, s(lambda)-s(mu))} L_mu; scaling a block by pi^c doubles c
    // in its norm.
    let mut u_exponents = Vec::with_capacity(blocks.len());
    for lam in &blocks {
        let mut u = u32::MAX;
        for mu in &blocks {
            let c = lam.scale.saturating_sub(mu.scale);
            u = u.min(2 * c + mu.norm_exp);
        }
        u_exponents.push(u);
    }
    let f_exponents = (0..blocks.len().saturating_sub(1))
        .map(|i| u_exponents[i] as i64 + u_exponents[i + 1] as i64 - 2 * blocks[i].scale as i64)
        .collect();
    Ok(JordanData {
        ext,
        blocks,
        u_exponents,
        f_exponents,
    })
}

/// Determinant class data: valuation (in v_p units) and the Legendre symbol
/// of the unit part. Over an unramified extension every unit is a norm, so
/// only the valuation parity carries information; over a ramified extension
/// unit norms are exactly the residue squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetClass {
    pub val: u32,
    pub val_parity: u32,
    pub unit_legendre: i8,
}

/// Determinant class of the whole lattice, computed from the factored block
/// determinants of a Jordan splitting (congruence changes the determinant by
/// a unit norm, which both components of the class ignore). This keeps high
/// valuations exact where a direct expansion would collapse to zero at the
/// working precision.
pub fn det_class(lattice: &HermLattice) -> Result<DetClass> {
    let j = jordan_splitting(lattice)?;
    let mut val = 0u32;
    let mut unit: u64 = 1;
    for b in &j.blocks {
        val += b.det.val_p;
        unit = ((unit as u128 * b.det.unit as u128) % lattice.ext.modulus() as u128) as u64;
    }
    Ok(DetClass {
        val,
        val_parity: val % 2,
        unit_legendre: if lattice.ext.is_ramified() {
            legendre(unit % lattice.ext.p, lattice.ext.p)
        } else {
            1
        },
    })
}

fn block_det_class(d: &BlockDet, ext: &QuadExt) -> DetClass {
    DetClass {
        val: d.val_p,
        val_parity: d.val_p % 2,
        unit_legendre: if ext.is_ramified() {
            legendre(d.unit % ext.p, ext.p)
        } else {
            1
        },
    }
}

/// Lattice-level determinant equivalence: equal up to the norm of a unit of
/// O_E. Unramified: equal valuations. Ramified: equal valuations and equal
/// residue classes of the unit parts.
pub fn det_class_eq(a: &DetClass, b: &DetClass, ext: &QuadExt) -> bool {
    if a.val != b.val {
        return false;
    }
    if ext.is_ramified() {
        a.unit_legendre == b.unit_legendre
    } else {
        true
    }
}

/// The isometry decision: same type always; over a ramified (non-dyadic)
/// extension additionally matching block determinant classes at every even
/// scale (odd-scale blocks are hyperbolic and carry no determinant data).
pub fn isometric(l: &HermLattice, k: &HermLattice) -> Result<bool> {
    if l.ext != k.ext {
        return Err(Error::ParameterMismatch(
            "lattices live over different extensions".into(),
        ));
    }
    let jl = jordan_splitting(l)?;
    let jk = jordan_splitting(k)?;
    if !type_equal(&jl, &jk) {
        return Ok(false);
    }
    if !l.ext.is_ramified() {
        return Ok(true);
    }
    for (bl, bk) in jl.blocks.iter().zip(&jk.blocks) {
        if bl.scale % 2 == 0 {
            let dl = block_det_class(&bl.det, &l.ext);
            let dk = block_det_class(&bk.det, &k.ext);
            if !det_class_eq(&dl, &dk, &l.ext) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Reassemble the Jordan blocks as an explicit direct sum of standard
/// pieces, for the self-consistency check: the result must be isometric to
/// the input.
pub fn reassemble(j: &JordanData) -> Result<HermLattice> {
    let ext = j.ext;
    let mut acc: Option<HermLattice> = None;
    for b in &j.blocks {
        let piece = if b.rank % 2 == 1 || b.normal {
            // Diagonal realization: (pi^scale)-scaled units with matching det.
            let mut vals = Vec::new();
            let s_p = b.scale / ext.e_times();
            for _ in 0..b.rank - 1 {
                vals.push((1i64, s_p));
            }
            vals.push((b.det.unit as i64, s_p));
            HermLattice::diagonal(ext, &vals)?
        } else {
            // Subnormal blocks have even rank; stack hyperbolic planes.
            let mut piece = HermLattice::hyperbolic_plane(ext, b.scale)?;
            for _ in 1..(b.rank / 2) {
                piece = piece.direct_sum(&HermLattice::hyperbolic_plane(ext, b.scale)?)?;
            }
            piece
        };
        acc = Some(match acc {
            None => piece,
            Some(prev) => prev.direct_sum(&piece)?,
        });
    }
    acc.ok_or_else(|| Error::Singular("empty lattice".into()))
}

/// Random lattice assembled from random standard blocks and scrambled by a
/// random basis change; the block data gives tests a known reference point.
pub fn random_lattice(ext: QuadExt, rank: usize, rng: &mut Rng) -> HermLattice {
    let mut acc: Option<HermLattice> = None;
    let mut left = rank;
    while left > 0 {
        let use_plane = left >= 2 && rng.below(3) == 0;
        let piece = if use_plane {
            let i = rng.below(3) as u32;
            left -= 2;
            HermLattice::hyperbolic_plane(ext, i).unwrap()
        } else {
            let e = rng.below(2) as u32;
            let mut u = 1 + rng.below(ext.p - 1) as i64;
            if u as u64 % ext.p == 0 {
                u = 1;
            }
            left -= 1;
            HermLattice::diagonal(ext, &[(u, e)]).unwrap()
        };
        acc = Some(match acc {
            None => piece,
            Some(prev) => prev.direct_sum(&piece).unwrap(),
        });
    }
    acc.unwrap().disguise(rng.next_u64())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaDesc {
    pub kind: String,
    pub unit: u64,
}

/// On-disk schema: each Gram entry is the pair [a, b] meaning a + b sqrt(theta).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub p: u64,
    pub theta: ThetaDesc,
    pub precision: u32,
    pub gram: Vec<Vec<[u64; 2]>>,
}

impl LatticeFile {
    pub fn into_lattice(self) -> Result<HermLattice> {
        let kind = match self.theta.kind.as_str() {
            "unit-nonresidue" => ExtKind::Unramified,
            "prime" => ExtKind::RamifiedPrime,
            "unit-times-prime" => ExtKind::RamifiedUnitPrime,
            other => {
                return Err(Error::ParameterMismatch(format!(
                    "unknown theta kind {other:?}"
                )))
            }
        };
        let ext = QuadExt::new(self.p, kind, self.precision)?;
        let modulus = ext.modulus();
        let n = self.gram.len();
        let mut rows = vec![vec![ExtElem::zero(); n]; n];
        for (i, row) in self.gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidModule(format!("gram: row {i} is ragged")));
            }
            for (j, &[a, b]) in row.iter().enumerate() {
                if a >= modulus || b >= modulus {
                    return Err(Error::InvalidModule(format!(
                        "gram entry ({i}, {j}) exceeds p^{}",
                        self.precision
                    )));
                }
                rows[i][j] = ExtElem { a, b };
            }
        }
        HermLattice::new(ext, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unram(p: u64) -> QuadExt {
        QuadExt::new(p, ExtKind::Unramified, 6).unwrap()
    }

    fn ram(p: u64) -> QuadExt {
        QuadExt::new(p, ExtKind::RamifiedPrime, 6).unwrap()
    }

    #[test]
    fn dyadic_base_is_rejected() {
        assert!(QuadExt::new(2, ExtKind::Unramified, 6).is_err());
    }

    #[test]
    fn ext_arithmetic_and_valuation() {
        let e = unram(3);
        let x = ExtElem::new(&e, 6, 3);
        assert_eq!(x.valuation(&e), Some(1));
        let r = ram(3);
        let y = ExtElem::new(&r, 6, 3); // 6 + 3 sqrt(3): v = min(2*1, 2*1+1) = 2
        assert_eq!(y.valuation(&r), Some(2));
        let z = ExtElem::new(&r, 0, 1); // sqrt(3): v = 1
        assert_eq!(z.valuation(&r), Some(1));
        assert_eq!(z.mul(&z, &r), ExtElem::from_base(&r, 3));
        // Norm of sqrt(theta) is -theta.
        assert_eq!(z.norm(&r), (3u64.pow(6) - 3) % 3u64.pow(6));
    }

    #[test]
    fn unit_inverse_round_trips() {
        let e = unram(5);
        let x = ExtElem::new(&e, 7, 3);
        let inv = x.invert(&e).unwrap();
        assert_eq!(x.mul(&inv, &e), ExtElem::from_base(&e, 1));
        let r = ram(7);
        let y = ExtElem::new(&r, 4, 9);
        let inv = y.invert(&r).unwrap();
        assert_eq!(y.mul(&inv, &r), ExtElem::from_base(&r, 1));
    }

    #[test]
    fn div_pi_shifts_valuation() {
        let r = ram(3);
        let x = ExtElem::new(&r, 9, 3); // v = min(4, 3) = 3
        let y = x.div_pi(3, &r).unwrap();
        assert_eq!(y.valuation(&r), Some(0));
        let e = unram(3);
        let x = ExtElem::new(&e, 9, 3);
        assert_eq!(x.div_pi(1, &e).unwrap(), ExtElem::new(&e, 3, 1));
    }

    #[test]
    fn jordan_of_diagonal_unramified() {
        let ext = unram(3);
        let l = HermLattice::diagonal(ext, &[(1, 0), (1, 1), (1, 1)]).unwrap();
        let j = jordan_splitting(&l).unwrap();
        assert_eq!(j.type_profile(), vec![(0, 1, true), (1, 2, true)]);
    }

    #[test]
    fn jordan_of_ramified_hyperbolic_plane() {
        let ext = ram(3);
        let l = HermLattice::hyperbolic_plane(ext, 1).unwrap();
        let j = jordan_splitting(&l).unwrap();
        assert_eq!(j.blocks.len(), 1);
        let b = &j.blocks[0];
        assert_eq!((b.scale, b.rank), (1, 2));
        assert!(!b.normal, "odd-scale ramified plane is subnormal");
    }

    #[test]
    fn unramified_h0_is_normal_and_splits() {
        // Over an unramified extension the trace ideal fills the scale, so
        // H(0) is normal and diagonalizes.
        let ext = unram(3);
        let l = HermLattice::hyperbolic_plane(ext, 0).unwrap();
        let j = jordan_splitting(&l).unwrap();
        assert_eq!(j.type_profile(), vec![(0, 2, true)]);
    }

    #[test]
    fn type_is_invariant_under_congruence() {
        let mut rng = Rng::new(99);
        for p in [3u64, 5, 7] {
            for kind in [
                ExtKind::Unramified,
                ExtKind::RamifiedPrime,
                ExtKind::RamifiedUnitPrime,
            ] {
                let ext = QuadExt::new(p, kind, 6).unwrap();
                for _ in 0..40 {
                    let rank = 1 + rng.below(4) as usize;
                    let l = random_lattice(ext, rank, &mut rng);
                    let j1 = jordan_splitting(&l).unwrap();
                    let l2 = l.disguise(rng.next_u64());
                    let j2 = jordan_splitting(&l2).unwrap();
                    assert!(
                        type_equal(&j1, &j2),
                        "type changed under congruence: p={p} {kind:?}\n{:?}\n{:?}",
                        j1.type_profile(),
                        j2.type_profile()
                    );
                }
            }
        }
    }

    #[test]
    fn u_and_f_exponents_are_congruence_invariant() {
        let mut rng = Rng::new(123);
        let ext = ram(5);
        for _ in 0..30 {
            let l = random_lattice(ext, 3, &mut rng);
            let j1 = jordan_splitting(&l).unwrap();
            let j2 = jordan_splitting(&l.disguise(rng.next_u64())).unwrap();
            assert_eq!(j1.u_exponents, j2.u_exponents);
            assert_eq!(j1.f_exponents, j2.f_exponents);
        }
    }

    #[test]
    fn det_class_examples() {
        // det H(0) = -N(1) = -1; at p = 5 (1 mod 4) the class is trivial.
        let ext = QuadExt::new(5, ExtKind::RamifiedPrime, 6).unwrap();
        let h0 = HermLattice::hyperbolic_plane(ext, 0).unwrap();
        let c = det_class(&h0).unwrap();
        assert_eq!(c.val, 0);
        assert_eq!(c.unit_legendre, 1, "-1 is a square mod 5");
        // At p = 3 (3 mod 4) the same determinant is a non-residue.
        let ext3 = ram(3);
        let h0 = HermLattice::hyperbolic_plane(ext3, 0).unwrap();
        assert_eq!(det_class(&h0).unwrap().unit_legendre, -1);
    }

    #[test]
    fn squares_share_a_class() {
        let ext = ram(3);
        let a = HermLattice::diagonal(ext, &[(1, 0), (1, 0)]).unwrap();
        let u = nonresidue(3) as i64;
        let b = HermLattice::diagonal(ext, &[(u, 0), (u, 0)]).unwrap();
        let ca = det_class(&a).unwrap();
        let cb = det_class(&b).unwrap();
        assert!(det_class_eq(&ca, &cb, &ext), "u^2 is a norm");
    }

    #[test]
    fn det_class_stable_under_disguise() {
        let mut rng = Rng::new(7);
        for kind in [ExtKind::RamifiedPrime, ExtKind::RamifiedUnitPrime] {
            let ext = QuadExt::new(7, kind, 6).unwrap();
            for _ in 0..30 {
                let l = random_lattice(ext, 3, &mut rng);
                let c1 = det_class(&l).unwrap();
                let c2 = det_class(&l.disguise(rng.next_u64())).unwrap();
                assert!(det_class_eq(&c1, &c2, &ext));
            }
        }
    }

    #[test]
    fn unramified_same_type_means_isometric() {
        let ext = unram(3);
        let u = nonresidue(3) as i64;
        let a = HermLattice::diagonal(ext, &[(1, 0), (1, 0)]).unwrap();
        let b = HermLattice::diagonal(ext, &[(u, 0), (u, 0)]).unwrap();
        assert!(isometric(&a, &b).unwrap());
        let c = HermLattice::diagonal(ext, &[(1, 0), (1, 1)]).unwrap();
        assert!(!isometric(&a, &c).unwrap());
    }

    #[test]
    fn ramified_detects_determinant_difference() {
        // Over Q_3(sqrt(3)): diag(1,1) vs diag(1,u) differ in the unit class
        // at even scale 0.
        let ext = ram(3);
        let u = nonresidue(3) as i64;
        let a = HermLattice::diagonal(ext, &[(1, 0), (1, 0)]).unwrap();
        let b = HermLattice::diagonal(ext, &[(1, 0), (u, 0)]).unwrap();
        assert!(!isometric(&a, &b).unwrap());
        assert!(isometric(&a, &a.disguise(41)).unwrap());
    }

    #[test]
    fn reassembly_is_isometric_to_input() {
        let mut rng = Rng::new(5);
        for p in [3u64, 7] {
            for kind in [ExtKind::Unramified, ExtKind::RamifiedPrime] {
                let ext = QuadExt::new(p, kind, 6).unwrap();
                for _ in 0..25 {
                    let l = random_lattice(ext, 1 + rng.below(4) as usize, &mut rng);
                    let j = jordan_splitting(&l).unwrap();
                    let r = reassemble(&j).unwrap();
                    assert!(
                        isometric(&l, &r).unwrap(),
                        "reassembly changed the class: {:?}",
                        j.type_profile()
                    );
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let ext = QuadExt::new(7, ExtKind::RamifiedUnitPrime, 6).unwrap();
        let l = random_lattice(ext, 3, &mut Rng::new(11));
        let text = l.to_json();
        let back = HermLattice::from_json(&text).unwrap();
        assert_eq!(back, l);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn isometric_is_an_equivalence_on_samples() {
        let mut rng = Rng::new(314);
        let ext = unram(5);
        let sample: Vec<HermLattice> =
            (0..8).map(|_| random_lattice(ext, 2, &mut rng)).collect();
        for a in &sample {
            assert!(isometric(a, a).unwrap());
            for b in &sample {
                assert_eq!(
                    isometric(a, b).unwrap(),
                    isometric(b, a).unwrap()
                );
                for c in &sample {
                    if isometric(a, b).unwrap() && isometric(b, c).unwrap() {
                        assert!(isometric(a, c).unwrap());
                    }
                }
            }
        }
    }
}
