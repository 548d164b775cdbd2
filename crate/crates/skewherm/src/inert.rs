//! Complete isometry classification in the inert case p = 3 mod 8.
//!
//! E is the unramified quadratic field over Q_2, so there is no eigenspace
//! splitting; the structure is read off the filtration
//! omega(M/2M) in M_0/2M in M/2M, where M_0 = {x : omega x in 2M}. The s
//! hyperbolic L_0-summands are split off constructively (normalizing pairing
//! values via the norm surjectivity of the principal units), and the rank-r
//! free remainder is classified by a Hermitian-square class over F_4.

use crate::error::{Error, Result};
use crate::forms::{canonical_form, congruence_class, f4, BitMat, MatF4, SymMatF2};
use crate::orders::{require_case, solve_unit_norm, CaseTag, OrderBasis};
use crate::padic::{inv_mod, kernel_mod, smith_form, solve_exact, PadicMatrix};
use crate::rmodule::{classify_module, ModuleShape};
use crate::skewmod::{InvariantTriple, SkewHermModule};

/// Dimensions of the residue filtration omega(M/2M) in M_0/2M in M/2M.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiltrationDims {
    pub dim_omega_mbar: usize,
    pub dim_m0_bar: usize,
    pub dim_mbar: usize,
}

impl FiltrationDims {
    pub fn r(&self) -> usize {
        self.dim_omega_mbar
    }

    pub fn s(&self) -> usize {
        (self.dim_m0_bar - self.dim_omega_mbar) / 2
    }
}

/// Compute the filtration dimensions together with a lattice basis of M_0.
/// The inclusion omega(M/2M) in M_0/2M and the isotropy of omega(M/2M) are
/// asserted, as is consistency with the module invariants.
pub fn m0_filtration(module: &SkewHermModule) -> Result<(FiltrationDims, PadicMatrix)> {
    require_case(module.p(), CaseTag::Inert)?;
    let m = module.rank();
    let k = module.precision();
    let wbar = BitMat::from_padic_mod2(module.omega());
    let r = wbar.rank();
    let dims = FiltrationDims {
        dim_omega_mbar: r,
        dim_m0_bar: m - r,
        dim_mbar: m,
    };

    // omega-squared kills M/2M, so the image sits inside the kernel.
    if !wbar.mul(&wbar).is_zero() {
        return Err(Error::Internal("omega^2 does not vanish mod 2".into()));
    }
    // Isotropy of omega(M/2M) under the reduced pairing.
    let gbar = BitMat::from_padic_mod2(module.gram());
    if !wbar.transpose().mul(&gbar).mul(&wbar).is_zero() {
        return Err(Error::Internal(
            "omega(M/2M) is not isotropic for the reduced pairing".into(),
        ));
    }
    let shape = classify_module(&module.underlying_module())?;
    let ModuleShape::Inert { r: rr, s } = shape else {
        unreachable!()
    };
    if rr != r || dims.dim_m0_bar != 2 * s + r {
        return Err(Error::Internal(format!(
            "filtration dims {dims:?} disagree with module invariants (r, s) = ({rr}, {s})"
        )));
    }

    // Basis of M_0: kernel lifts plus twice a completion.
    let kernel = wbar.kernel();
    let mut basis = PadicMatrix::zero(2, k, m, m);
    for c in 0..kernel.cols() {
        for i in 0..m {
            if kernel.get(i, c) {
                basis.set(i, c, 1);
            }
        }
    }
    let mut col = kernel.cols();
    let lifts = basis.submatrix(0, 0, m, kernel.cols());
    let bits = BitMat::from_padic_mod2(&lifts);
    let mut span = bits;
    for i in 0..m {
        if !span.span_contains(1u64 << i) {
            let mut ext = BitMat::zero(m, span.cols() + 1);
            for row in 0..m {
                for c in 0..span.cols() {
                    ext.set(row, c, span.get(row, c));
                }
            }
            ext.set(i, span.cols(), true);
            span = ext;
            basis.set(i, col, 2);
            col += 1;
        }
    }
    if col != m {
        return Err(Error::Internal("M_0 basis has wrong rank".into()));
    }
    Ok((dims, basis))
}

/// The quadratic residue form q(x) = psi(x, omega x / 2) mod 2 on M_0/2M,
/// evaluated on a lattice vector of M_0.
fn q0(module: &SkewHermModule, x: &PadicMatrix) -> Result<u64> {
    let wx = module.omega().mul(x);
    let mut half = PadicMatrix::zero(2, module.precision(), module.rank(), 1);
    for i in 0..module.rank() {
        let v = wx.get(i, 0);
        if v % 2 != 0 {
            return Err(Error::Internal("q0 evaluated outside M_0".into()));
        }
        half.set(i, 0, v / 2);
    }
    Ok(module.pairing(x, &half))
}

/// Search M_0/2M for a vector with psi(x, omega x/2) odd. The form is
/// quadratic with polar form b(x, y) = psi(x, omega y/2) + psi(y, omega x/2),
/// so scanning basis vectors and pairs is exhaustive.
fn find_l0_pivot(module: &SkewHermModule, m0: &PadicMatrix) -> Result<Option<PadicMatrix>> {
    let m = module.rank();
    let k = module.precision();
    // Only the kernel-lift columns matter: columns in 2M contribute evenly.
    let cols: Vec<PadicMatrix> = (0..m0.cols())
        .map(|c| m0.column(c))
        .filter(|c| (0..m).any(|i| c.get(i, 0) % 2 == 1))
        .collect();
    for x in &cols {
        if q0(module, x)? % 2 == 1 {
            return Ok(Some(x.clone()));
        }
    }
    for (i, x) in cols.iter().enumerate() {
        for y in cols.iter().skip(i + 1) {
            let sum = x.add(y);
            if q0(module, &sum)? % 2 == 1 {
                return Ok(Some(sum));
            }
        }
    }
    let _ = k;
    Ok(None)
}

/// Split off hyperbolic L_0-summands until none remains. Returns the count
/// and the free remainder, still carried at the input precision: the
/// division producing the partner vector omega x/2 determines the summand
/// one digit short, and the deviation is pushed below the classification
/// depth instead of truncating (checked by the dual-precision suite).
pub fn split_off_l0(module: &SkewHermModule) -> Result<(usize, SkewHermModule)> {
    require_case(module.p(), CaseTag::Inert)?;
    let mut current = module.clone();
    let mut count = 0usize;
    loop {
        if current.rank() == 0 {
            break;
        }
        let (_, m0) = m0_filtration(&current)?;
        let Some(x) = find_l0_pivot(&current, &m0)? else {
            break;
        };
        current = split_l0_at(&current, &x)?;
        count += 1;
    }
    let shape = classify_module(&current.underlying_module())?;
    match shape {
        ModuleShape::Inert { s: 0, .. } => Ok((count, current)),
        other => Err(Error::Internal(format!(
            "remainder is not free: {other:?} after removing {count} summands"
        ))),
    }
}

/// One splitting step at a pivot x in M_0 with q0(x) odd: normalize the
/// pairing value to 1 by a principal unit of norm a^{-1}, take the summand
/// spanned by (x, omega x/2), and peel off its orthogonal complement.
fn split_l0_at(module: &SkewHermModule, x: &PadicMatrix) -> Result<SkewHermModule> {
    let k = module.precision();
    let m = module.rank();
    let a = q0(module, x)?;
    let ainv = inv_mod(a, 2, k).expect("pivot value is odd");
    let lambda = solve_unit_norm(module.p(), k, ainv)?;
    debug_assert_eq!(lambda.basis, OrderBasis::Alpha);

    // x' = lambda . x = a x + b (W/2) x; the alpha-action is integral on M_0.
    let wx = module.omega().mul(x);
    let mut half_wx = PadicMatrix::zero(2, k, m, 1);
    for i in 0..m {
        half_wx.set(i, 0, wx.get(i, 0) / 2);
    }
    let x1 = x.scale(lambda.a).add(&half_wx.scale(lambda.b));
    let wx1 = module.omega().mul(&x1);
    let mut y1 = PadicMatrix::zero(2, k, m, 1);
    for i in 0..m {
        let v = wx1.get(i, 0);
        if v % 2 != 0 {
            return Err(Error::Internal("normalized pivot left M_0".into()));
        }
        y1.set(i, 0, v / 2);
    }
    // Halving the reduced vector omega x' leaves the top digit of y'
    // undetermined; the norm identity pins the pairing only mod 2^{k-1}.
    // Shift y' within its congruence class to land on exactly 1.
    let pairing = module.pairing(&x1, &y1);
    if pairing != 1 {
        let modulus = y1.modulus();
        let defect = (1 + modulus - pairing) % modulus;
        if defect % (modulus / 2) != 0 {
            return Err(Error::Internal(
                "unit-norm normalization failed to reach pairing 1".into(),
            ));
        }
        let gx = module.gram().transpose().mul(&x1);
        let i = (0..m)
            .find(|&i| gx.get(i, 0) % 2 == 1)
            .ok_or_else(|| Error::Internal("pivot is not primitive for the pairing".into()))?;
        let w = module.pairing(&x1, &unit_vector(k, m, i));
        let c = (defect as u128 * inv_mod(w, 2, k).unwrap() as u128 % modulus as u128) as u64;
        let mut shift = PadicMatrix::zero(2, k, m, 1);
        shift.set(i, 0, c);
        y1 = y1.add(&shift);
        if module.pairing(&x1, &y1) != 1 {
            return Err(Error::Internal(
                "unit-norm normalization failed to reach pairing 1".into(),
            ));
        }
    }

    // Orthogonal complement of <x', y'>.
    let gx = module.gram().mul(&x1);
    let gy = module.gram().mul(&y1);
    let mut rows = PadicMatrix::zero(2, k, 2, m);
    for i in 0..m {
        rows.set(0, i, gx.get(i, 0));
        rows.set(1, i, gy.get(i, 0));
    }
    let complement = kernel_mod(&rows, k)?;
    if complement.cols() != m - 2 {
        return Err(Error::Internal(
            "orthogonal complement has unexpected rank".into(),
        ));
    }
    let u = x1.hstack(&y1).hstack(&complement);
    let uinv = u
        .inverse()
        .ok_or_else(|| Error::Internal("L_0 summand does not split off".into()))?;
    let w1 = uinv.mul(module.omega()).mul(&u);
    let g1 = u.transpose().mul(module.gram()).mul(&u);

    // The Gram decouples exactly; the action decouples up to the final digit
    // carried by the divided generator, which is below the classification
    // depth. Enforce the expected shape and take the complement block.
    let modulus = w1.modulus();
    let top = modulus / 2;
    let half_trace = ((module.p() + 1) / 2) % modulus;
    for i in 0..m {
        for j in 0..2 {
            let expected = match (i, j) {
                (0, 0) => 0,
                (1, 0) => 2,
                (0, 1) => (modulus - half_trace) % modulus,
                (1, 1) => modulus - 2,
                _ => 0,
            };
            let diff = (w1.get(i, j) + modulus - expected) % modulus;
            if diff != 0 && diff != top {
                return Err(Error::Internal(format!(
                    "summand action deviates beyond the last digit at ({i}, {j})"
                )));
            }
        }
    }
    for i in 0..2 {
        for j in 2..m {
            let v = w1.get(i, j);
            if v != 0 && v != top {
                return Err(Error::Internal(format!(
                    "complement action deviates beyond the last digit at ({i}, {j})"
                )));
            }
            if g1.get(i, j) != 0 || g1.get(j, i) != 0 {
                return Err(Error::Internal("Gram fails to decouple exactly".into()));
            }
        }
    }
    SkewHermModule::new(
        module.p(),
        w1.submatrix(2, 2, m - 2, m - 2),
        g1.submatrix(2, 2, m - 2, m - 2),
    )
}

/// Try to split off an L_1 = (R, psi_1) summand: present iff the linear form
/// x -> psi(x, omega x) mod 2 is nonzero on M/2M. Returns the orthogonal
/// complement when it exists. The classifier never calls this; it exists for
/// decomposition experiments on the free part.
pub fn split_off_l1(module: &SkewHermModule) -> Result<Option<(SkewHermModule, SkewHermModule)>> {
    require_case(module.p(), CaseTag::Inert)?;
    let m = module.rank();
    let k = module.precision();
    let gw = module.gram().mul(module.omega());
    let Some(i) = (0..m).find(|&i| gw.get(i, i) % 2 == 1) else {
        return Ok(None);
    };
    let mut x = PadicMatrix::zero(2, k, m, 1);
    x.set(i, 0, 1);
    let a = module.pairing(&x, &module.omega().mul(&x));
    let ainv = inv_mod(a, 2, k).expect("diagonal value is odd");
    let lambda = solve_unit_norm(module.p(), k, ainv)?;
    // lambda = a + b alpha with b even; in the omega basis x' = a x + (b/2) W x.
    let x1 = x
        .scale(lambda.a)
        .add(&module.omega().mul(&x).scale(lambda.b / 2));
    let wx1 = module.omega().mul(&x1);
    if module.pairing(&x1, &wx1) != 1 {
        return Err(Error::Internal(
            "unit-norm normalization failed on the L_1 pivot".into(),
        ));
    }
    let gx = module.gram().mul(&x1);
    let gy = module.gram().mul(&wx1);
    let mut rows = PadicMatrix::zero(2, k, 2, m);
    for c in 0..m {
        rows.set(0, c, gx.get(c, 0));
        rows.set(1, c, gy.get(c, 0));
    }
    let complement = kernel_mod(&rows, k)?;
    let u = x1.hstack(&wx1).hstack(&complement);
    let uinv = u
        .inverse()
        .ok_or_else(|| Error::Internal("L_1 pivot does not split off a summand".into()))?;
    let w1 = uinv.mul(module.omega()).mul(&u);
    let g1 = u.transpose().mul(module.gram()).mul(&u);
    for i in 2..m {
        for j in 0..2 {
            if w1.get(i, j) != 0 || w1.get(j, i) != 0 || g1.get(i, j) != 0 || g1.get(j, i) != 0 {
                return Err(Error::Internal("L_1 summand fails to decouple".into()));
            }
        }
    }
    let summand = SkewHermModule::new(module.p(), w1.submatrix(0, 0, 2, 2), g1.submatrix(0, 0, 2, 2))?;
    let complement_mod = SkewHermModule::new(
        module.p(),
        w1.submatrix(2, 2, m - 2, m - 2),
        g1.submatrix(2, 2, m - 2, m - 2),
    )?;
    Ok(Some((summand, complement_mod)))
}

/// Data of the overlattice N = O_E M carried in its own basis: the scaled
/// pairing psi_N = 2 psi, the omega action, and the coordinates of M.
struct Overlattice {
    /// Gram of psi_N in the N-basis.
    gram: PadicMatrix,
    /// alpha-action on N (omega action divided by 2).
    alpha: PadicMatrix,
    /// Columns: the F_2-reduction of M inside N/2N, one per basis vector,
    /// already reduced to an independent set of size r.
    mbar: BitMat,
}

fn overlattice(module: &SkewHermModule) -> Result<Overlattice> {
    let k = module.precision();
    let m = module.rank();
    // 2N is generated by 2M and WM; a lattice basis falls out of the Smith
    // transform of [2I | W].
    let two_i = PadicMatrix::identity(2, k, m).scale(2);
    let stacked = two_i.hstack(module.omega());
    let sf = smith_form(&stacked);
    if sf.exponents.iter().any(|&e| e > 1) {
        return Err(Error::Internal(format!(
            "2N has impossible elementary divisors {:?}",
            sf.exponents
        )));
    }
    let pinv = sf
        .p
        .inverse()
        .ok_or_else(|| Error::Internal("smith transform not invertible".into()))?;
    let mut d = PadicMatrix::zero(2, k, m, m);
    for c in 0..m {
        let scale = 1u64 << sf.exponents[c];
        for i in 0..m {
            d.set(i, c, (pinv.get(i, c) * scale) % d.modulus());
        }
    }

    // Gram of psi_N on the halved basis: (D^t G D) / 2, even entrywise.
    let big = d.transpose().mul(module.gram()).mul(&d);
    let mut gram = PadicMatrix::zero(2, k - 1, m, m);
    for i in 0..m {
        for j in 0..m {
            let v = big.get(i, j);
            if v % 2 != 0 {
                return Err(Error::Internal(
                    "overlattice pairing is not integral".into(),
                ));
            }
            gram.set(i, j, (v / 2) % gram.modulus());
        }
    }

    // omega action on N: solve D W_N = W D; one division digit may be spent.
    let (w_n, _) = solve_exact(&d, &module.omega().mul(&d))?;
    let w_n = w_n.reduce_precision(k - 1);
    let mut alpha = PadicMatrix::zero(2, k - 2, m, m);
    for i in 0..m {
        for j in 0..m {
            let v = w_n.get(i, j);
            if v % 2 != 0 {
                return Err(Error::Internal(
                    "overlattice is not stable under the full ring of integers".into(),
                ));
            }
            alpha.set(i, j, (v / 2) % alpha.modulus());
        }
    }

    // Coordinates of M inside N: columns of 2 D^{-1}, reduced mod 2.
    let (y, _) = solve_exact(&d, &PadicMatrix::identity(2, k, m).scale(2))?;
    let ybits = BitMat::from_padic_mod2(&y);
    let idx = ybits.independent_columns();
    let mbar = ybits.select_columns(&idx);

    Ok(Overlattice { gram, alpha, mbar })
}

/// Value of the Hermitian residue form on N/2N at a pair of F_2-vectors,
/// given the two coefficient matrices of the O_E-valued lift mod 2.
fn herm_value(h0: &BitMat, h1: &BitMat, x: u64, y: u64) -> u8 {
    let mut acc = 0u8;
    let mut mx = x;
    while mx != 0 {
        let i = mx.trailing_zeros() as usize;
        let mut my = y;
        while my != 0 {
            let j = my.trailing_zeros() as usize;
            let code = (h0.get(i, j) as u8) | ((h1.get(i, j) as u8) << 1);
            acc = f4::add(acc, code);
            my &= my - 1;
        }
        mx &= mx - 1;
    }
    acc
}

/// The F_4 invariant of a free module: the congruence class of the Hermitian
/// square of the matrix expressing M/2N in a unitary basis of N/2N.
/// Also returns the witness matrix U itself.
pub fn u_matrix_f4(module: &SkewHermModule) -> Result<(MatF4, SymMatF2)> {
    require_case(module.p(), CaseTag::Inert)?;
    let shape = classify_module(&module.underlying_module())?;
    let ModuleShape::Inert { r, s } = shape else {
        unreachable!()
    };
    if s != 0 {
        return Err(Error::NotFree(s));
    }
    if r == 0 {
        return Err(Error::Singular("rank-0 module carries no form".into()));
    }
    let m = module.rank();
    debug_assert_eq!(m, 2 * r);
    let over = overlattice(module)?;
    if over.mbar.cols() != r {
        return Err(Error::Internal(format!(
            "reduction of M has dimension {}, expected {r}",
            over.mbar.cols()
        )));
    }

    // Hermitian coefficient matrices of the O_E-valued form on N, mod 2:
    // with A = psi_N Gram and B = psi_N(., alpha .), the 1-coefficient is
    // (A + (p+1) B) / p - wait, keep the exact solve: c0 = (2qA + B)/p,
    // c1 = (A + 2B)/p, and the Hermitian twist is h0 = c0 - 2q c1, h1 = A.
    let k2 = over.alpha.precision();
    let gram = over.gram.reduce_precision(k2);
    let modulus = gram.modulus();
    let q = ((module.p() + 1) / 4) % modulus;
    let p_inv = inv_mod(module.p() % modulus, 2, k2).expect("p is odd");
    let a_mat = gram.clone();
    let b_mat = gram.mul(&over.alpha);
    let c0 = a_mat.scale((2 * q) % modulus).add(&b_mat).scale(p_inv);
    let c1 = a_mat.add(&b_mat.scale(2)).scale(p_inv);
    let h0 = c0.sub(&c1.scale((2 * q) % modulus));
    let h1 = a_mat;
    let h0_bits = BitMat::from_padic_mod2(&h0);
    let h1_bits = BitMat::from_padic_mod2(&h1);
    let alpha_bits = BitMat::from_padic_mod2(&over.alpha);

    // An F_4-basis of N/2N: greedily take unit vectors independent over F_4
    // (i.e. jointly with their alpha-images over F_2).
    let mut f4_basis: Vec<u64> = Vec::new();
    let mut span = BitMat::zero(m, 0);
    for i in 0..m {
        let v = 1u64 << i;
        if span.span_contains(v) {
            continue;
        }
        f4_basis.push(v);
        let av = apply_bits(&alpha_bits, v);
        let mut ext = BitMat::zero(m, span.cols() + 2);
        for row in 0..m {
            for c in 0..span.cols() {
                ext.set(row, c, span.get(row, c));
            }
            ext.set(row, span.cols(), v >> row & 1 == 1);
            ext.set(row, span.cols() + 1, av >> row & 1 == 1);
        }
        span = ext;
        if f4_basis.len() == r {
            break;
        }
    }
    if f4_basis.len() != r {
        return Err(Error::Internal("could not find an F_4 basis of N/2N".into()));
    }

    // Hermitian Gram-Schmidt over F_4: first vector with unit length in scan
    // order, corrected by a pair combination when all lengths vanish.
    let mul_scalar = |c: u8, v: u64| -> u64 {
        // (a + b alpha) v for c = a + 2b.
        let mut out = 0u64;
        if c & 1 == 1 {
            out ^= v;
        }
        if c & 2 == 2 {
            out ^= apply_bits(&alpha_bits, v);
        }
        out
    };
    let mut pool = f4_basis.clone();
    let mut unitary: Vec<u64> = Vec::new();
    while unitary.len() < r {
        let found = pool
            .iter()
            .position(|&v| herm_value(&h0_bits, &h1_bits, v, v) == 1);
        let u = match found {
            Some(pos) => pool.remove(pos),
            None => {
                // All lengths vanish; mix a pair. Any nonzero cross value
                // admits a scalar c with Tr(conj(c) h) = 1.
                let mut fixed = None;
                'outer: for i in 0..pool.len() {
                    for j in (i + 1)..pool.len() {
                        for c in [1u8, 2, 3] {
                            let cand = pool[i] ^ mul_scalar(c, pool[j]);
                            if herm_value(&h0_bits, &h1_bits, cand, cand) == 1 {
                                fixed = Some((i, cand));
                                break 'outer;
                            }
                        }
                    }
                }
                let Some((i, cand)) = fixed else {
                    return Err(Error::Internal(
                        "Hermitian form on N/2N is degenerate".into(),
                    ));
                };
                pool.remove(i);
                cand
            }
        };
        // Orthogonalize the rest of the pool against u.
        for v in pool.iter_mut() {
            let c = herm_value(&h0_bits, &h1_bits, *v, u);
            if c != 0 {
                *v ^= mul_scalar(c, u);
            }
        }
        pool.retain(|&v| v != 0);
        unitary.push(u);
    }

    // Express the reduction of M in unitary F_4-coordinates.
    let mut coord_mat = BitMat::zero(m, m);
    for (b, &u) in unitary.iter().enumerate() {
        let au = apply_bits(&alpha_bits, u);
        for row in 0..m {
            coord_mat.set(row, 2 * b, u >> row & 1 == 1);
            coord_mat.set(row, 2 * b + 1, au >> row & 1 == 1);
        }
    }
    let coord_inv = coord_mat
        .inverse()
        .ok_or_else(|| Error::Internal("unitary vectors do not form an F_4 basis".into()))?;
    let mut u_mat = MatF4::zero(r);
    for col in 0..r {
        let v = over.mbar.column_mask(col);
        let coords = apply_bits(&coord_inv, v);
        for b in 0..r {
            let a_bit = (coords >> (2 * b)) & 1;
            let b_bit = (coords >> (2 * b + 1)) & 1;
            u_mat.set(b, col, (a_bit | (b_bit << 1)) as u8);
        }
    }
    if !u_mat.is_invertible() {
        return Err(Error::Internal(
            "module reduction does not generate the overlattice over F_4".into(),
        ));
    }
    let square = crate::forms::pi_map(&u_mat);
    let square_bits = square.to_bitmat().ok_or_else(|| {
        Error::Internal("Hermitian square has entries outside F_2: M/2N not isotropic".into())
    })?;
    let sym = SymMatF2::new(square_bits)
        .map_err(|_| Error::Internal("Hermitian square is not symmetric invertible".into()))?;

    // Cross-check: the square must be the Gram of the residue form on the
    // columns of M/2N themselves, computed without the unitary basis.
    for i in 0..r {
        for j in 0..r {
            let direct = herm_value(
                &h0_bits,
                &h1_bits,
                over.mbar.column_mask(j),
                over.mbar.column_mask(i),
            );
            let stored = sym.get(i, j) as u8;
            if direct != stored {
                return Err(Error::Internal(
                    "unitary-basis square disagrees with the direct residue Gram".into(),
                ));
            }
        }
    }
    Ok((u_mat, sym))
}

fn unit_vector(precision: u32, m: usize, i: usize) -> PadicMatrix {
    let mut v = PadicMatrix::zero(2, precision, m, 1);
    v.set(i, 0, 1);
    v
}

/// Apply an F_2 matrix to a bit-vector.
fn apply_bits(m: &BitMat, v: u64) -> u64 {
    let mut out = 0u64;
    for i in 0..m.rows() {
        let mut acc = false;
        let mut mask = m.row_mask(i) & v;
        while mask != 0 {
            acc = !acc;
            mask &= mask - 1;
        }
        if acc {
            out |= 1 << i;
        }
    }
    out
}

/// Build a module realizing the invariant (r, s, class(A)): factor A into
/// hyperbolic planes and (1)-blocks, realize (1) by L_1 and the plane by the
/// rank-4 witness inside L_0 + L_0, and pad with L_0-summands.
pub fn construct_from_symmetric(
    p: u64,
    precision: u32,
    a: &SymMatF2,
    s: usize,
) -> Result<SkewHermModule> {
    require_case(p, CaseTag::Inert)?;
    let (canon, _) = canonical_form(a);
    let r = a.rank();
    let hyp_count = (0..r)
        .step_by(2)
        .take_while(|&i| i + 1 < r && canon.get(i, i + 1))
        .count();
    let ones = r - 2 * hyp_count;

    let mut acc = SkewHermModule::zero_module(p, precision)?;
    let witness = if hyp_count > 0 {
        Some(hyperbolic_witness(p, precision)?)
    } else {
        None
    };
    for _ in 0..hyp_count {
        acc = acc.direct_sum(witness.as_ref().unwrap())?;
    }
    let l1 = SkewHermModule::standard_l1(p, precision)?;
    for _ in 0..ones {
        acc = acc.direct_sum(&l1)?;
    }
    let l0 = SkewHermModule::standard_l0(p, precision)?;
    acc = acc.direct_sum(&l0.power(s)?)?;

    // Round-trip: the construction must classify to (r, s, class(A)).
    let got = invariant(&acc)?;
    let want = InvariantTriple {
        r,
        s,
        form_class: if r == 0 {
            None
        } else {
            Some(congruence_class(a))
        },
    };
    if got != want {
        return Err(Error::Internal(format!(
            "construction realizes {got} instead of {want}"
        )));
    }
    Ok(acc)
}

/// The rank-4 free module in the alternating class: M = 2N + span of the
/// lifts of the two columns of the standard F_4 witness with Hermitian
/// square [[0,1],[1,0]], inside N = L_0 + L_0 with half its pairing.
/// Constructed with precision headroom so every entry is exact.
fn hyperbolic_witness(p: u64, precision: u32) -> Result<SkewHermModule> {
    let work = precision + 3;
    let l0 = SkewHermModule::standard_l0(p, work)?;
    let n = l0.direct_sum(&l0)?;
    // Lifts of alpha^(1) + 1^(2) and (1 + alpha)^(1) + (1 + alpha)^(2).
    let v1 = PadicMatrix::from_rows(2, work, &[vec![0], vec![1], vec![1], vec![0]]);
    let v2 = PadicMatrix::from_rows(2, work, &[vec![1], vec![1], vec![1], vec![1]]);
    let gens = v1
        .hstack(&v2)
        .hstack(&PadicMatrix::identity(2, work, 4).scale(2));
    let sf = smith_form(&gens);
    if sf.exponents != vec![0, 0, 1, 1] {
        return Err(Error::Internal(format!(
            "witness lattice has exponents {:?}",
            sf.exponents
        )));
    }
    let pinv = sf
        .p
        .inverse()
        .ok_or_else(|| Error::Internal("smith transform not invertible".into()))?;
    let mut basis = PadicMatrix::zero(2, work, 4, 4);
    for c in 0..4 {
        let scale = 1u64 << sf.exponents[c];
        for i in 0..4 {
            basis.set(i, c, (pinv.get(i, c) * scale) % basis.modulus());
        }
    }
    // psi_M = psi_N / 2 on the new basis; entries are exact small integers,
    // so the headroom digits guarantee nothing is lost truncating back.
    let big = basis.transpose().mul(n.gram()).mul(&basis);
    let mut gram = PadicMatrix::zero(2, work, 4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let v = big.get(i, j);
            if v % 2 != 0 {
                return Err(Error::Internal("witness pairing is not integral".into()));
            }
            gram.set(i, j, v / 2);
        }
    }
    let (w, _) = solve_exact(&basis, &n.omega().mul(&basis))?;
    SkewHermModule::new(p, w.reduce_precision(precision), gram.reduce_precision(precision))
}

/// The complete invariant in the inert case.
pub fn invariant(module: &SkewHermModule) -> Result<InvariantTriple> {
    require_case(module.p(), CaseTag::Inert)?;
    let shape = classify_module(&module.underlying_module())?;
    let ModuleShape::Inert { r, s } = shape else {
        unreachable!()
    };
    let (count, remainder) = split_off_l0(module)?;
    if count != s {
        return Err(Error::Internal(format!(
            "split off {count} summands, module theory predicts {s}"
        )));
    }
    let form_class = if r == 0 {
        None
    } else {
        Some(congruence_class(&u_matrix_f4(&remainder)?.1))
    };
    Ok(InvariantTriple {
        r,
        s: count,
        form_class,
    })
}

/// Isometry decision by comparison of complete invariants.
pub fn is_isomorphic(m1: &SkewHermModule, m2: &SkewHermModule) -> Result<bool> {
    if m1.p() != m2.p() {
        return Err(Error::ParameterMismatch(format!(
            "cannot compare modules over p = {} and p = {}",
            m1.p(),
            m2.p()
        )));
    }
    if m1.rank() != m2.rank() {
        return Ok(false);
    }
    Ok(invariant(m1)? == invariant(m2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{m_r, SymFormClassF2};
    use crate::rng::Rng;
    use crate::skewmod::isometric_by_exhaustion;
    use std::collections::HashSet;

    fn l0(p: u64) -> SkewHermModule {
        SkewHermModule::standard_l0(p, 8).unwrap()
    }

    fn l1(p: u64) -> SkewHermModule {
        SkewHermModule::standard_l1(p, 8).unwrap()
    }

    fn h(p: u64) -> SkewHermModule {
        SkewHermModule::standard_h(p, 8).unwrap()
    }

    #[test]
    fn filtration_dims_of_standard_modules() {
        let (d0, _) = m0_filtration(&l0(3)).unwrap();
        assert_eq!((d0.dim_omega_mbar, d0.dim_m0_bar, d0.dim_mbar), (0, 2, 2));
        let (d1, _) = m0_filtration(&l1(3)).unwrap();
        assert_eq!((d1.dim_omega_mbar, d1.dim_m0_bar, d1.dim_mbar), (1, 1, 2));
        let (dh, _) = m0_filtration(&h(3)).unwrap();
        assert_eq!((dh.dim_omega_mbar, dh.dim_m0_bar, dh.dim_mbar), (2, 2, 4));
    }

    #[test]
    fn split_off_l0_counts() {
        let (s, rem) = split_off_l0(&l0(3).power(3).unwrap()).unwrap();
        assert_eq!(s, 3);
        assert_eq!(rem.rank(), 0);

        let (s, rem) = split_off_l0(&h(3)).unwrap();
        assert_eq!(s, 0);
        assert_eq!(rem.rank(), 4);
    }

    #[test]
    fn split_off_l0_on_disguises() {
        let mut rng = Rng::new(31);
        let base = l0(3).direct_sum(&l1(3)).unwrap();
        for _ in 0..50 {
            let d = base.disguise(rng.next_u64());
            let (s, rem) = split_off_l0(&d).unwrap();
            assert_eq!(s, 1);
            assert_eq!(rem.rank(), 2);
            assert_eq!(
                invariant(&rem).unwrap(),
                invariant(&l1(3)).unwrap(),
                "remainder must stay in the L_1 class"
            );
        }
    }

    #[test]
    fn split_off_l1_behaviour() {
        // L_1 splits, with empty complement; the summand is returned in its
        // standard coordinates.
        let got = split_off_l1(&l1(3)).unwrap();
        let (summand, complement) = got.unwrap();
        assert_eq!(summand, l1(3));
        assert_eq!(complement.rank(), 0);
        // L_0 has no L_1 summand: psi(x, omega x) is always even there.
        assert!(split_off_l1(&l0(3)).unwrap().is_none());
        // Observed behaviour for H: the linear residue form vanishes, so no
        // L_1 splits off this basis-free test either.
        assert!(split_off_l1(&h(3)).unwrap().is_none());
    }

    #[test]
    fn u_matrix_rank1_is_the_unique_class() {
        let (_, sym) = u_matrix_f4(&l1(3)).unwrap();
        assert_eq!(congruence_class(&sym), SymFormClassF2::new(1, false));
    }

    #[test]
    fn u_matrix_separates_h_from_l1_squared() {
        let (_, sym_h) = u_matrix_f4(&h(3)).unwrap();
        let (_, sym_ll) = u_matrix_f4(&l1(3).direct_sum(&l1(3)).unwrap()).unwrap();
        assert_eq!(sym_h.rank(), 2);
        assert_eq!(sym_ll.rank(), 2);
        assert_ne!(
            congruence_class(&sym_h),
            congruence_class(&sym_ll),
            "exactly two classes exist in rank 2 and these realize both"
        );
        // L_1 + L_1 realizes the diagonal class, so H carries the
        // alternating one, and the explicit witness lands in H's class.
        assert!(!congruence_class(&sym_ll).alternating);
        assert!(congruence_class(&sym_h).alternating);
        let witness = construct_from_symmetric(3, 8, &SymMatF2::hyperbolic(), 0).unwrap();
        assert!(is_isomorphic(&witness, &h(3)).unwrap());
    }

    #[test]
    fn u_matrix_rejects_nonfree() {
        assert!(matches!(u_matrix_f4(&l0(3)), Err(Error::NotFree(_))));
    }

    #[test]
    fn invariants_of_standard_modules() {
        assert_eq!(
            invariant(&l0(3).power(3).unwrap()).unwrap(),
            InvariantTriple {
                r: 0,
                s: 3,
                form_class: None
            }
        );
        assert_eq!(
            invariant(&l1(3)).unwrap(),
            InvariantTriple {
                r: 1,
                s: 0,
                form_class: Some(SymFormClassF2::new(1, false))
            }
        );
        assert_eq!(invariant(&h(3)).unwrap().r, 2);
    }

    #[test]
    fn construct_from_symmetric_round_trips() {
        for r in 1..=3usize {
            for class in SymFormClassF2::all_in_rank(r) {
                for s in 0..=1usize {
                    let m =
                        construct_from_symmetric(3, 8, &class.representative(), s).unwrap();
                    let inv = invariant(&m).unwrap();
                    assert_eq!(inv.r, r);
                    assert_eq!(inv.s, s);
                    assert_eq!(inv.form_class, Some(class));
                }
            }
        }
    }

    #[test]
    fn construction_distinguishes_rank2_classes() {
        let a = construct_from_symmetric(3, 8, &SymMatF2::identity(2), 0).unwrap();
        let b = construct_from_symmetric(3, 8, &SymMatF2::hyperbolic(), 0).unwrap();
        assert!(!is_isomorphic(&a, &b).unwrap());
    }

    #[test]
    fn invariant_is_stable_under_disguise() {
        let mut rng = Rng::new(5150);
        let seeds = [
            l0(3).power(2).unwrap(),
            l1(3).direct_sum(&l0(3)).unwrap(),
            h(3),
            construct_from_symmetric(3, 8, &SymMatF2::hyperbolic(), 1).unwrap(),
        ];
        for base in &seeds {
            let expect = invariant(base).unwrap();
            for _ in 0..50 {
                let d = base.disguise(rng.next_u64());
                assert_eq!(invariant(&d).unwrap(), expect);
            }
        }
    }

    #[test]
    fn rank_two_count_matches_class_number() {
        let mut seen = HashSet::new();
        for r in 0..=2usize {
            let s = 2 - r;
            if r == 0 {
                seen.insert(invariant(&l0(3).power(s).unwrap()).unwrap());
            } else {
                for class in SymFormClassF2::all_in_rank(r) {
                    let m = construct_from_symmetric(3, 8, &class.representative(), s).unwrap();
                    seen.insert(invariant(&m).unwrap());
                }
            }
        }
        let expected: usize = (0..=2).map(m_r).sum();
        assert_eq!(seen.len(), expected);
        assert_eq!(expected, 4);
    }

    #[test]
    fn exhaustive_rank2_oracle_agrees() {
        let mut rng = Rng::new(314);
        let seeds = [l0(3), l1(3)];
        for _ in 0..40 {
            let a = &seeds[rng.below(2) as usize];
            let b = &seeds[rng.below(2) as usize];
            let da = a.disguise(rng.next_u64());
            let db = b.disguise(rng.next_u64());
            let fast = is_isomorphic(&da, &db).unwrap();
            let slow = isometric_by_exhaustion(
                &da.truncate(3).unwrap(),
                &db.truncate(3).unwrap(),
            );
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn witt_cancellation_at_invariant_level() {
        for r in 0..=2usize {
            let bases: Vec<SkewHermModule> = if r == 0 {
                vec![l0(3).power(0).unwrap()]
            } else {
                SymFormClassF2::all_in_rank(r)
                    .into_iter()
                    .map(|c| construct_from_symmetric(3, 8, &c.representative(), 0).unwrap())
                    .collect()
            };
            for base in bases {
                let base_inv = invariant(&base).unwrap();
                for extra in 1..=2usize {
                    let bigger = base.direct_sum(&l0(3).power(extra).unwrap()).unwrap();
                    let big = invariant(&bigger).unwrap();
                    assert_eq!(big.r, base_inv.r);
                    assert_eq!(big.s, base_inv.s + extra);
                    assert_eq!(big.form_class, base_inv.form_class);
                }
            }
        }
    }

    #[test]
    fn l1_splitting_experiment_on_free_classes() {
        // Recorded experiment: greedily strip L_1 summands off every free
        // class with r <= 3 and note how far the process gets. Nothing is
        // asserted about which classes decompose this way beyond
        // determinism; the residue rank is the observable.
        for r in 1..=3usize {
            for class in SymFormClassF2::all_in_rank(r) {
                let run = || {
                    let m = construct_from_symmetric(3, 8, &class.representative(), 0).unwrap();
                    let mut stripped = 0usize;
                    let mut cur = m;
                    while cur.rank() > 0 {
                        match split_off_l1(&cur).unwrap() {
                            Some((_, rest)) => {
                                stripped += 1;
                                cur = rest;
                            }
                            None => break,
                        }
                    }
                    (stripped, cur.rank())
                };
                let (stripped, residue) = run();
                println!(
                    "free class [{class}]: greedy L_1 count {stripped}, residue rank {residue}"
                );
                assert_eq!((stripped, residue), run(), "experiment must be deterministic");
                assert_eq!(2 * r, 2 * stripped + residue);
            }
        }
    }

    #[test]
    fn works_at_other_inert_primes() {
        for p in [11u64, 19] {
            let m = construct_from_symmetric(p, 8, &SymMatF2::hyperbolic(), 1).unwrap();
            let inv = invariant(&m).unwrap();
            assert_eq!(inv.r, 2);
            assert_eq!(inv.s, 1);
            assert_eq!(inv.form_class, Some(SymFormClassF2::new(2, true)));
        }
    }
}
