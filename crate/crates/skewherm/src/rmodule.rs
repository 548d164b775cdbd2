//! Classification of Z_2-free finite modules over R = Z_2[omega].
//!
//! A module is carried by the matrix W of the omega-action on Z_2^m. For
//! p = 3 mod 8 the indecomposables are R and O_E, and the multiplicities
//! (r, s) are rank counts mod 2. For p = 7 mod 8 the algebra splits and a
//! third invariant t appears, read off the elementary divisors of
//! W - 2*alpha_1*I. `decompose_module` additionally produces a basis in
//! which W is block diagonal with the standard blocks.

use crate::error::{Error, Result};
use crate::forms::BitMat;
use crate::orders::{case_of, hensel_roots, require_nonmaximal, CaseTag};
use crate::padic::{kernel_mod, smith_form, solve_exact, PadicMatrix};

/// Classifiers refuse inputs carried at fewer than this many digits.
pub const CLASSIFY_PRECISION_FLOOR: u32 = 4;

/// Saturations and valuation shifts refuse to drop below this many digits.
pub const SATURATION_FLOOR: u32 = 2;

/// A Z_2-free R-module: rank-m lattice plus the omega-action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RModule {
    p: u64,
    precision: u32,
    w: PadicMatrix,
}

impl RModule {
    pub fn new(p: u64, w: PadicMatrix) -> Result<Self> {
        require_nonmaximal(p)?;
        assert_eq!(w.prime(), 2, "R-modules live over Z_2");
        if w.rows() != w.cols() {
            return Err(Error::NotAnRModule("omega action must be square".into()));
        }
        let m = Self::relation_defect(p, &w);
        if !m.is_zero() {
            return Err(Error::NotAnRModule(format!(
                "W^2 + 2W + (p+1)I != 0 mod 2^{}",
                w.precision()
            )));
        }
        Ok(RModule {
            p,
            precision: w.precision(),
            w,
        })
    }

    /// W^2 + 2W + (p+1)I, which must vanish at the working precision.
    fn relation_defect(p: u64, w: &PadicMatrix) -> PadicMatrix {
        let k = w.precision();
        let n = w.rows();
        let id = PadicMatrix::identity(2, k, n);
        w.mul(w)
            .add(&w.scale(2))
            .add(&id.scale((p + 1) % w.modulus()))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn rank(&self) -> usize {
        self.w.rows()
    }

    pub fn omega(&self) -> &PadicMatrix {
        &self.w
    }

    pub fn case(&self) -> CaseTag {
        case_of(self.p)
    }

    /// The regular module R itself: W is the companion matrix of
    /// X^2 + 2X + (p+1).
    pub fn regular(p: u64, precision: u32) -> Self {
        let w = PadicMatrix::from_rows(
            2,
            precision,
            &[vec![0, -((p + 1) as i64)], vec![1, -2]],
        );
        Self::new(p, w).expect("companion matrix satisfies its own polynomial")
    }

    /// O_E as an R-module on the basis (1, alpha): omega sends 1 to 2*alpha
    /// and alpha to -2*alpha - (p+1)/2.
    pub fn ring_of_integers(p: u64, precision: u32) -> Self {
        let half = ((p + 1) / 2) as i64;
        let w = PadicMatrix::from_rows(2, precision, &[vec![0, -half], vec![2, -2]]);
        Self::new(p, w).expect("the O_E action satisfies the omega relation")
    }

    /// Rank-1 module R/(omega - 2*alpha_i) in the split case.
    pub fn split_line(p: u64, precision: u32, second: bool) -> Result<Self> {
        let roots = hensel_roots(p, precision)?;
        let eigen = if second { roots.alpha2 } else { roots.alpha1 };
        let w = PadicMatrix::from_rows(2, precision, &[vec![(2 * eigen) as i64]]);
        Self::new(p, w)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.p != other.p || self.precision != other.precision {
            return Err(Error::ParameterMismatch(format!(
                "cannot sum modules over (p, k) = ({}, {}) and ({}, {})",
                self.p, self.precision, other.p, other.precision
            )));
        }
        Self::new(self.p, self.w.block_diag(&other.w))
    }

    fn require_precision(&self) -> Result<()> {
        if self.precision < CLASSIFY_PRECISION_FLOOR {
            return Err(Error::PrecisionTooLow {
                effective: self.precision,
                required: CLASSIFY_PRECISION_FLOOR,
            });
        }
        Ok(())
    }

    /// dim_{F_2} M/(2, omega)M, the corank of W mod 2.
    pub fn residue_dim(&self) -> usize {
        let wbar = BitMat::from_padic_mod2(&self.w);
        self.rank() - wbar.rank()
    }
}

/// Isomorphism type of a Z_2-free R-module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModuleShape {
    /// p = 3 mod 8: M = R^r + O_E^s, rank 2r + 2s.
    Inert { r: usize, s: usize },
    /// p = 7 mod 8: M = R^r + L(alpha_1)^s + L(alpha_2)^t, rank 2r + s + t.
    Split { r: usize, s: usize, t: usize },
}

impl ModuleShape {
    pub fn free_rank(&self) -> usize {
        match *self {
            ModuleShape::Inert { r, .. } | ModuleShape::Split { r, .. } => r,
        }
    }

    pub fn z2_rank(&self) -> usize {
        match *self {
            ModuleShape::Inert { r, s } => 2 * r + 2 * s,
            ModuleShape::Split { r, s, t } => 2 * r + s + t,
        }
    }
}

pub fn classify_module(module: &RModule) -> Result<ModuleShape> {
    module.require_precision()?;
    let m = module.rank();
    let d = module.residue_dim();
    let r = m
        .checked_sub(d)
        .ok_or_else(|| Error::Internal("residue dimension exceeds rank".into()))?;
    match module.case() {
        CaseTag::Inert => {
            if m % 2 != 0 || d < m / 2 {
                return Err(Error::NotAnRModule(format!(
                    "impossible residue dimension {d} for rank {m}"
                )));
            }
            Ok(ModuleShape::Inert { r, s: d - m / 2 })
        }
        CaseTag::Split => {
            let roots = hensel_roots(module.p, module.precision)?;
            let k = module.precision;
            let shifted = module.w.sub(
                &PadicMatrix::identity(2, k, m).scale((2 * roots.alpha1) % module.w.modulus()),
            );
            let sf = smith_form(&shifted);
            let mut zero_divs = 0usize;
            let mut torsion = 0usize;
            for j in 0..m {
                match sf.column_exponent(j) {
                    0 => {}
                    1 => torsion += 1,
                    e if e >= k => zero_divs += 1,
                    e => {
                        return Err(Error::NotAnRModule(format!(
                            "elementary divisor 2^{e} of W - 2a_1 I is impossible for an R-module"
                        )))
                    }
                }
            }
            // zero_divs = r + s and the 2-torsion dimension is t.
            let s = zero_divs
                .checked_sub(r)
                .ok_or_else(|| Error::NotAnRModule("inconsistent rank counts".into()))?;
            let t = d
                .checked_sub(zero_divs)
                .ok_or_else(|| Error::NotAnRModule("inconsistent rank counts".into()))?;
            if torsion != t || 2 * r + s + t != m {
                return Err(Error::NotAnRModule(format!(
                    "rank bookkeeping failed: m={m} d={d} free={zero_divs} torsion={torsion}"
                )));
            }
            Ok(ModuleShape::Split { r, s, t })
        }
        CaseTag::Maximal => Err(Error::MaximalOrder(module.p)),
    }
}

/// Constructive decomposition: a change of basis after which the action is
/// block diagonal with r companion blocks and the standard small blocks.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub shape: ModuleShape,
    /// Columns are the new basis in the original coordinates. Recorded at the
    /// effective precision remaining after the divisions by 2 the inert case
    /// requires (one per O_E summand split off).
    pub basis: PadicMatrix,
    /// The conjugated action basis^{-1} W basis, block diagonal.
    pub blocks: PadicMatrix,
}

pub fn decompose_module(module: &RModule) -> Result<Decomposition> {
    module.require_precision()?;
    let shape = classify_module(module)?;
    match module.case() {
        CaseTag::Inert => decompose_inert(module, shape),
        CaseTag::Split => decompose_split(module, shape),
        CaseTag::Maximal => Err(Error::MaximalOrder(module.p)),
    }
}

/// Greedy standard-vector completion: columns of `fixed` (mod 2) extended to
/// a full basis by unit vectors, picked in coordinate order.
fn complete_mod2(fixed: &PadicMatrix) -> Vec<usize> {
    let m = fixed.rows();
    let bits = BitMat::from_padic_mod2(fixed);
    let mut chosen = Vec::new();
    let mut span = bits;
    for i in 0..m {
        let v = 1u64 << i;
        if !span.span_contains(v) {
            let mut ext = BitMat::zero(m, span.cols() + 1);
            for r in 0..m {
                for c in 0..span.cols() {
                    ext.set(r, c, span.get(r, c));
                }
            }
            ext.set(i, span.cols(), true);
            span = ext;
            chosen.push(i);
        }
    }
    chosen
}

fn decompose_split(module: &RModule, shape: ModuleShape) -> Result<Decomposition> {
    let ModuleShape::Split { r, s, t } = shape else {
        unreachable!()
    };
    let p = module.p();
    let k = module.precision();
    let m = module.rank();
    let w = module.omega();
    let roots = hensel_roots(p, k)?;
    let id = PadicMatrix::identity(2, k, m);
    let modulus = w.modulus();

    let shifted1 = w.sub(&id.scale((2 * roots.alpha1) % modulus));
    let shifted2 = w.sub(&id.scale((2 * roots.alpha2) % modulus));
    let m1 = kernel_mod(&shifted1, k)?;
    let m2 = kernel_mod(&shifted2, k)?;

    // Lift a basis of M/(M^1 + M^2) by standard vectors.
    let stacked = m1.hstack(&m2);
    let free_idx = complete_mod2(&stacked);
    if free_idx.len() != r {
        return Err(Error::Internal(format!(
            "quotient dimension {} disagrees with module invariant r = {r}",
            free_idx.len()
        )));
    }

    let mut basis_cols: Vec<PadicMatrix> = Vec::new();
    for &i in &free_idx {
        let mut x = PadicMatrix::zero(2, k, m, 1);
        x.set(i, 0, 1);
        let wx = w.mul(&x);
        basis_cols.push(x);
        basis_cols.push(wx);
    }

    // F_1 inside ker(W - 2 a_1): kernel columns completing the mod-2 span of
    // (W - 2 a_2) F_0, and symmetrically for F_2. The images of the free
    // generators land in the eigenkernel exactly (the two shifts multiply to
    // the omega relation), so the selection only needs mod-2 information.
    for (eigen_kernel, shift_other, want) in [(&m1, &shifted2, s), (&m2, &shifted1, t)] {
        let mut span = BitMat::zero(m, free_idx.len());
        for (c, &i) in free_idx.iter().enumerate() {
            let mut x = PadicMatrix::zero(2, k, m, 1);
            x.set(i, 0, 1);
            let y = shift_other.mul(&x);
            for row in 0..m {
                span.set(row, c, y.get(row, 0) % 2 == 1);
            }
        }
        let kern_bits = BitMat::from_padic_mod2(eigen_kernel);
        let mut picked = Vec::new();
        for j in 0..eigen_kernel.cols() {
            if !span.span_contains(kern_bits.column_mask(j)) {
                let mut ext = BitMat::zero(m, span.cols() + 1);
                for row in 0..m {
                    for c in 0..span.cols() {
                        ext.set(row, c, span.get(row, c));
                    }
                    ext.set(row, span.cols(), kern_bits.get(row, j));
                }
                span = ext;
                picked.push(j);
            }
        }
        if picked.len() != want {
            return Err(Error::Internal(format!(
                "eigen complement rank {} disagrees with invariant {want}",
                picked.len()
            )));
        }
        let f_part = eigen_kernel.select_columns(&picked);
        for c in 0..f_part.cols() {
            basis_cols.push(f_part.column(c));
        }
    }

    let mut basis = PadicMatrix::zero(2, k, m, m);
    for (c, col) in basis_cols.iter().enumerate() {
        for row in 0..m {
            basis.set(row, c, col.get(row, 0));
        }
    }
    let binv = basis
        .inverse()
        .ok_or_else(|| Error::Internal("decomposition basis is not unimodular".into()))?;
    let blocks = binv.mul(w).mul(&basis);
    verify_split_blocks(&blocks, p, r, s, t, &roots)?;
    Ok(Decomposition {
        shape,
        basis,
        blocks,
    })
}

fn verify_split_blocks(
    blocks: &PadicMatrix,
    p: u64,
    r: usize,
    s: usize,
    t: usize,
    roots: &crate::orders::SplitRoots,
) -> Result<()> {
    let k = blocks.precision();
    let modulus = blocks.modulus();
    let mut expected = PadicMatrix::zero(2, k, 0, 0);
    let companion = PadicMatrix::from_rows(2, k, &[vec![0, -((p + 1) as i64)], vec![1, -2]]);
    for _ in 0..r {
        expected = expected.block_diag(&companion);
    }
    for _ in 0..s {
        let b = PadicMatrix::from_rows(2, k, &[vec![((2 * roots.alpha1) % modulus) as i64]]);
        expected = expected.block_diag(&b);
    }
    for _ in 0..t {
        let b = PadicMatrix::from_rows(2, k, &[vec![((2 * roots.alpha2) % modulus) as i64]]);
        expected = expected.block_diag(&b);
    }
    if blocks != &expected {
        return Err(Error::Internal(
            "conjugated action does not match the expected block form".into(),
        ));
    }
    Ok(())
}

fn decompose_inert(module: &RModule, shape: ModuleShape) -> Result<Decomposition> {
    let ModuleShape::Inert { r, s } = shape else {
        unreachable!()
    };
    let p = module.p();
    let groups = decompose_inert_groups(p, module.omega())?;
    let k_final = groups
        .iter()
        .map(|g| g.columns.precision())
        .min()
        .unwrap_or(module.precision());
    let m = module.rank();

    // Companion (R) summands first, then the O_E summands.
    let mut basis = PadicMatrix::zero(2, k_final, m, 0);
    for free in [true, false] {
        for g in &groups {
            if g.free == free {
                basis = basis.hstack(&g.columns.reduce_precision(k_final));
            }
        }
    }
    let binv = basis
        .inverse()
        .ok_or_else(|| Error::Internal("decomposition basis is not unimodular".into()))?;
    let blocks = binv
        .mul(&module.omega().reduce_precision(k_final))
        .mul(&basis);

    let companion = PadicMatrix::from_rows(2, k_final, &[vec![0, -((p + 1) as i64)], vec![1, -2]]);
    let half = ((p + 1) / 2) as i64;
    let oe_block = PadicMatrix::from_rows(2, k_final, &[vec![0, -half], vec![2, -2]]);
    let mut expected = PadicMatrix::zero(2, k_final, 0, 0);
    for _ in 0..r {
        expected = expected.block_diag(&companion);
    }
    for _ in 0..s {
        expected = expected.block_diag(&oe_block);
    }
    if blocks != expected {
        return Err(Error::Internal(
            "inert decomposition does not reach the expected block form".into(),
        ));
    }
    Ok(Decomposition {
        shape,
        basis,
        blocks,
    })
}

/// One indecomposable summand: two basis columns in the original coordinates.
struct SummandGroup {
    free: bool,
    columns: PadicMatrix,
}

/// Split off O_E summands one at a time following the residue criterion
/// (pick x with omega x = 0 mod 2 whose class survives outside omega M),
/// then read the free remainder off in companion pairs. Each O_E extraction
/// costs a digit of precision: the generator pair is (x, Wx/2) and the
/// division by 2 is only determined to that accuracy.
fn decompose_inert_groups(p: u64, w: &PadicMatrix) -> Result<Vec<SummandGroup>> {
    let k = w.precision();
    let m = w.rows();
    if m == 0 {
        return Ok(Vec::new());
    }
    let wbar = BitMat::from_padic_mod2(w);
    let kernel = wbar.kernel();
    let s2 = kernel.cols() - wbar.rank();
    debug_assert_eq!(s2 % 2, 0);

    if s2 == 0 {
        // Free module: lift a residue basis of M/(2, omega)M and pair each x
        // with Wx as a companion block.
        let free_idx = complete_mod2(w);
        if 2 * free_idx.len() != m {
            return Err(Error::Internal(format!(
                "free part residue count {} does not halve rank {m}",
                free_idx.len()
            )));
        }
        let mut groups = Vec::new();
        for &i in &free_idx {
            let mut x = PadicMatrix::zero(2, k, m, 1);
            x.set(i, 0, 1);
            let wx = w.mul(&x);
            groups.push(SummandGroup {
                free: true,
                columns: x.hstack(&wx),
            });
        }
        return Ok(groups);
    }

    // Pick the first kernel direction outside the image of omega: a vector
    // with nonzero O_E-part residue.
    let pivot = (0..kernel.cols())
        .find(|&c| !wbar.span_contains(kernel.column_mask(c)))
        .ok_or_else(|| Error::Internal("kernel collapses into the image".into()))?;
    let mut x = PadicMatrix::zero(2, k, m, 1);
    for i in 0..m {
        if kernel.get(i, pivot) {
            x.set(i, 0, 1);
        }
    }
    let wx = w.mul(&x);
    // Division soundness: the pivot lies in M_0, so omega x is even.
    for i in 0..m {
        if wx.get(i, 0) % 2 != 0 {
            return Err(Error::Internal(
                "pivot violates omega x = 0 mod 2; decomposition pivot invalid".into(),
            ));
        }
    }
    let mut y = PadicMatrix::zero(2, k, m, 1);
    for i in 0..m {
        y.set(i, 0, wx.get(i, 0) / 2);
    }

    let k_next = k - 1;
    if k_next < SATURATION_FLOOR {
        return Err(Error::PrecisionExhausted {
            effective: k_next,
            floor: SATURATION_FLOOR,
        });
    }
    let w_red = w.reduce_precision(k_next);
    let x = x.reduce_precision(k_next);
    let y = y.reduce_precision(k_next);

    let pair = x.hstack(&y);
    let rest_idx = complete_mod2(&pair);
    if rest_idx.len() != m - 2 {
        return Err(Error::Internal(
            "generator pair is not primitive mod 2".into(),
        ));
    }
    let mut u0 = PadicMatrix::zero(2, k_next, m, m);
    for row in 0..m {
        u0.set(row, 0, x.get(row, 0));
        u0.set(row, 1, y.get(row, 0));
    }
    for (c, &i) in rest_idx.iter().enumerate() {
        u0.set(i, c + 2, 1);
    }
    let u0inv = u0
        .inverse()
        .ok_or_else(|| Error::Internal("completion is not unimodular".into()))?;
    let w1 = u0inv.mul(&w_red).mul(&u0);

    // M_1 = <x, y> is omega-invariant, so the lower-left block vanishes.
    for i in 2..m {
        for j in 0..2 {
            if w1.get(i, j) != 0 {
                return Err(Error::Internal(
                    "generator pair does not span an invariant sublattice".into(),
                ));
            }
        }
    }
    let a = w1.submatrix(0, 0, 2, 2);
    let d = w1.submatrix(2, 2, m - 2, m - 2);
    let xblock = w1.submatrix(0, 2, 2, m - 2);

    // Cancel the coupling block by a shear; the extension splits, so the
    // Sylvester system A T - T D = -X is consistent.
    let t = solve_sylvester(&a, &d, &xblock.neg())?;
    let mut shear = PadicMatrix::identity(2, k_next, m);
    for i in 0..2 {
        for j in 0..(m - 2) {
            shear.set(i, 2 + j, t.get(i, j));
        }
    }
    let u1 = u0.mul(&shear);

    let rec_groups = decompose_inert_groups(p, &d)?;
    let k_final = rec_groups
        .iter()
        .map(|g| g.columns.precision())
        .min()
        .unwrap_or(k_next);
    let u1_red = u1.reduce_precision(k_final);
    let complement_cols: Vec<usize> = (2..m).collect();
    let complement = u1_red.select_columns(&complement_cols);

    let mut groups = vec![SummandGroup {
        free: false,
        columns: u1_red.select_columns(&[0, 1]),
    }];
    for g in rec_groups {
        groups.push(SummandGroup {
            free: g.free,
            columns: complement.mul(&g.columns.reduce_precision(k_final)),
        });
    }
    Ok(groups)
}

/// Solve the Sylvester equation A T - T D = C over Z/2^k by vectorizing to
/// (I (x) A - D^t (x) I) vec(T) = vec(C) and running the exact solver.
fn solve_sylvester(
    a: &PadicMatrix,
    d: &PadicMatrix,
    c: &PadicMatrix,
) -> Result<PadicMatrix> {
    let k = a.precision();
    let (ra, rd) = (a.rows(), d.rows());
    assert_eq!((c.rows(), c.cols()), (ra, rd));
    if rd == 0 {
        return Ok(PadicMatrix::zero(2, k, ra, 0));
    }
    let n = ra * rd;
    let mut op = PadicMatrix::zero(2, k, n, n);
    let modulus = op.modulus();
    // vec ordering: index (i, j) -> j * ra + i (column-major).
    for j in 0..rd {
        for i in 0..ra {
            let row = j * ra + i;
            for l in 0..ra {
                // (A T)_{ij} contributes A[i][l] T[l][j].
                let col = j * ra + l;
                let cur = op.get(row, col);
                op.set(row, col, (cur + a.get(i, l)) % modulus);
            }
            for l in 0..rd {
                // (T D)_{ij} contributes T[i][l] D[l][j], negatively.
                let col = l * ra + i;
                let cur = op.get(row, col);
                let sub = d.get(l, j) % modulus;
                op.set(row, col, (cur + modulus - sub) % modulus);
            }
        }
    }
    let mut rhs = PadicMatrix::zero(2, k, n, 1);
    for j in 0..rd {
        for i in 0..ra {
            rhs.set(j * ra + i, 0, c.get(i, j));
        }
    }
    let (sol, _) = solve_exact(&op, &rhs).map_err(|_| {
        Error::Internal("Sylvester system inconsistent: extension did not split".into())
    })?;
    let mut t = PadicMatrix::zero(2, k, ra, rd);
    for j in 0..rd {
        for i in 0..ra {
            t.set(i, j, sol.get(j * ra + i, 0));
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn regular_module_classifies_as_free() {
        let m = RModule::regular(3, 8);
        assert_eq!(classify_module(&m).unwrap(), ModuleShape::Inert { r: 1, s: 0 });
        let m7 = RModule::regular(7, 8);
        assert_eq!(
            classify_module(&m7).unwrap(),
            ModuleShape::Split { r: 1, s: 0, t: 0 }
        );
    }

    #[test]
    fn ring_of_integers_classifies_as_oe() {
        let m = RModule::ring_of_integers(3, 8);
        assert_eq!(classify_module(&m).unwrap(), ModuleShape::Inert { r: 0, s: 1 });
    }

    #[test]
    fn oe_splits_into_two_lines_when_p_is_7_mod_8() {
        // O_E = R/(omega - 2a_1) + R/(omega - 2a_2) as R-modules.
        let m = RModule::ring_of_integers(7, 8);
        assert_eq!(
            classify_module(&m).unwrap(),
            ModuleShape::Split { r: 0, s: 1, t: 1 }
        );
        let l1 = RModule::split_line(7, 8, false).unwrap();
        let l2 = RModule::split_line(7, 8, true).unwrap();
        assert_eq!(
            classify_module(&l1).unwrap(),
            ModuleShape::Split { r: 0, s: 1, t: 0 }
        );
        assert_eq!(
            classify_module(&l2).unwrap(),
            ModuleShape::Split { r: 0, s: 0, t: 1 }
        );
    }

    #[test]
    fn direct_sums_add_invariants() {
        let a = RModule::regular(3, 8);
        let b = RModule::ring_of_integers(3, 8);
        let sum = a.direct_sum(&b).unwrap();
        assert_eq!(classify_module(&sum).unwrap(), ModuleShape::Inert { r: 1, s: 1 });

        let a7 = RModule::regular(7, 8);
        let b7 = RModule::ring_of_integers(7, 8);
        let sum7 = a7.direct_sum(&b7).unwrap().direct_sum(&a7).unwrap();
        assert_eq!(
            classify_module(&sum7).unwrap(),
            ModuleShape::Split { r: 2, s: 1, t: 1 }
        );
    }

    #[test]
    fn invalid_omega_action_is_rejected() {
        let w = PadicMatrix::identity(2, 8, 2);
        assert!(matches!(
            RModule::new(3, w),
            Err(Error::NotAnRModule(_))
        ));
    }

    #[test]
    fn low_precision_is_rejected() {
        let m = RModule::regular(3, 3);
        assert!(matches!(
            classify_module(&m),
            Err(Error::PrecisionTooLow { .. })
        ));
    }

    #[test]
    fn classification_invariant_under_conjugation() {
        let mut rng = Rng::new(515);
        let seeds: Vec<RModule> = vec![
            RModule::regular(3, 8),
            RModule::ring_of_integers(3, 8),
            RModule::regular(3, 8)
                .direct_sum(&RModule::ring_of_integers(3, 8))
                .unwrap(),
            RModule::regular(7, 8),
            RModule::ring_of_integers(7, 8),
            RModule::regular(7, 8)
                .direct_sum(&RModule::split_line(7, 8, false).unwrap())
                .unwrap(),
        ];
        for _ in 0..500 {
            let seed = &seeds[rng.below(seeds.len() as u64) as usize];
            let n = seed.rank();
            let (pm, pinv) = PadicMatrix::random_unimodular(2, 8, n, &mut rng);
            let w2 = pinv.mul(seed.omega()).mul(&pm);
            let conj = RModule::new(seed.p(), w2).unwrap();
            assert_eq!(
                classify_module(&conj).unwrap(),
                classify_module(seed).unwrap()
            );
        }
    }

    #[test]
    fn decompose_canonical_split_is_identity() {
        let m = RModule::regular(7, 8);
        let d = decompose_module(&m).unwrap();
        assert_eq!(d.basis, PadicMatrix::identity(2, 8, 2));
    }

    #[test]
    fn decompose_split_diag_eigenvalues() {
        // W = diag(2a_1, 2a_2) is O_E: two lines, identity basis works.
        let roots = hensel_roots(7, 8).unwrap();
        let w = PadicMatrix::from_rows(
            2,
            8,
            &[
                vec![(2 * roots.alpha1) as i64, 0],
                vec![0, (2 * roots.alpha2) as i64],
            ],
        );
        let m = RModule::new(7, w).unwrap();
        let d = decompose_module(&m).unwrap();
        assert_eq!(d.shape, ModuleShape::Split { r: 0, s: 1, t: 1 });
        assert_eq!(d.basis, PadicMatrix::identity(2, 8, 2));
    }

    #[test]
    fn decompose_split_scrambled_restores_blocks() {
        let mut rng = Rng::new(99);
        let base = RModule::regular(7, 8)
            .direct_sum(&RModule::ring_of_integers(7, 8))
            .unwrap();
        for _ in 0..100 {
            let n = base.rank();
            let (pm, pinv) = PadicMatrix::random_unimodular(2, 8, n, &mut rng);
            let w2 = pinv.mul(base.omega()).mul(&pm);
            let m = RModule::new(7, w2).unwrap();
            let d = decompose_module(&m).unwrap();
            assert_eq!(d.shape, ModuleShape::Split { r: 1, s: 1, t: 1 });
            // Verified internally; re-check the conjugation here.
            let binv = d.basis.inverse().unwrap();
            assert_eq!(binv.mul(m.omega()).mul(&d.basis), d.blocks);
        }
    }

    #[test]
    fn decompose_inert_oe_block() {
        let m = RModule::ring_of_integers(3, 8);
        let d = decompose_module(&m).unwrap();
        assert_eq!(d.shape, ModuleShape::Inert { r: 0, s: 1 });
        assert_eq!(d.basis, PadicMatrix::identity(2, 7, 2));
    }

    #[test]
    fn decompose_inert_scrambled_restores_blocks() {
        let mut rng = Rng::new(7);
        let seeds = [
            RModule::regular(3, 8),
            RModule::ring_of_integers(3, 8),
            RModule::regular(3, 8)
                .direct_sum(&RModule::ring_of_integers(3, 8))
                .unwrap(),
            RModule::ring_of_integers(3, 8)
                .direct_sum(&RModule::ring_of_integers(3, 8))
                .unwrap(),
        ];
        for trial in 0..100 {
            let base = &seeds[trial % seeds.len()];
            let n = base.rank();
            let (pm, pinv) = PadicMatrix::random_unimodular(2, 8, n, &mut rng);
            let w2 = pinv.mul(base.omega()).mul(&pm);
            let m = RModule::new(3, w2).unwrap();
            let d = decompose_module(&m).unwrap();
            assert_eq!(d.shape, classify_module(base).unwrap());
            let binv = d.basis.inverse().unwrap();
            let k = d.basis.precision();
            assert_eq!(
                binv.mul(&m.omega().reduce_precision(k)).mul(&d.basis),
                d.blocks
            );
            // Re-classifying the block matrix reproduces the shape.
            let again = RModule::new(3, d.blocks.clone()).unwrap();
            assert_eq!(classify_module(&again).unwrap(), d.shape);
        }
    }
}
