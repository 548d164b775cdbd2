//! Complete isometry classification in the split case p = 7 mod 8.
//!
//! E = Q_2 x Q_2, so a module M decomposes along the two eigenvalues
//! 2*alpha_1, 2*alpha_2 of omega. The classifying data is (r, s, class):
//! s hyperbolic L-summands split off constructively, and the rank-r free
//! remainder is pinned down by a symmetric invertible matrix over F_2 read
//! off the position of M inside the smallest overlattice stable under the
//! full ring of integers.

use crate::error::{Error, Result};
use crate::forms::{congruence_class, BitMat, SymMatF2};
use crate::orders::{hensel_roots, require_case, CaseTag};
use crate::padic::{inv_mod, kernel_mod, smith_form, PadicMatrix};
use crate::rmodule::{classify_module, ModuleShape};
use crate::skewmod::{InvariantTriple, SkewHermModule};

/// Bases of the two eigencomponent sublattices M^i = ker(W - 2 alpha_i) and
/// the count r with |M / (M^1 + M^2)| = 2^r.
pub struct Eigencomponents {
    pub basis1: PadicMatrix,
    pub basis2: PadicMatrix,
    pub r: usize,
}

pub fn eigencomponents(module: &SkewHermModule) -> Result<Eigencomponents> {
    require_case(module.p(), CaseTag::Split)?;
    let k = module.precision();
    let m = module.rank();
    let roots = hensel_roots(module.p(), k)?;
    let w = module.omega();
    let modulus = w.modulus();
    let id = PadicMatrix::identity(2, k, m);
    let basis1 = kernel_mod(&w.sub(&id.scale((2 * roots.alpha1) % modulus)), k)?;
    let basis2 = kernel_mod(&w.sub(&id.scale((2 * roots.alpha2) % modulus)), k)?;
    if basis1.cols() != m / 2 || basis2.cols() != m / 2 {
        return Err(Error::Internal(format!(
            "eigencomponent ranks ({}, {}) do not halve the rank {m}",
            basis1.cols(),
            basis2.cols()
        )));
    }
    let stacked = BitMat::from_padic_mod2(&basis1.hstack(&basis2));
    let r = m - stacked.rank();
    // Cross-check against the module-theoretic invariant.
    let shape = classify_module(&module.underlying_module())?;
    if shape.free_rank() != r {
        return Err(Error::Internal(format!(
            "eigencomponent corank {r} disagrees with module invariant {}",
            shape.free_rank()
        )));
    }
    Ok(Eigencomponents { basis1, basis2, r })
}

/// Elementary divisor exponents of psi restricted to M^1 + M^2: exactly 2s
/// zeros and 2r ones.
pub fn polarization_type(module: &SkewHermModule) -> Result<Vec<u32>> {
    let eig = eigencomponents(module)?;
    let c = eig.basis1.hstack(&eig.basis2);
    let gram = c.transpose().mul(module.gram()).mul(&c);
    let exps = smith_form(&gram).exponents;
    let m = module.rank();
    let r = eig.r;
    let expected_ones = 2 * r;
    let expected_zeros = m - expected_ones;
    let zeros = exps.iter().filter(|&&e| e == 0).count();
    let ones = exps.iter().filter(|&&e| e == 1).count();
    if zeros != expected_zeros || ones != expected_ones {
        return Err(Error::Internal(format!(
            "polarization type {exps:?} does not match (0^{expected_zeros}, 1^{expected_ones})"
        )));
    }
    Ok(exps)
}

/// Split off hyperbolic L-summands until none remains: returns the number of
/// summands removed and the free orthogonal remainder.
pub fn split_off_l(module: &SkewHermModule) -> Result<(usize, SkewHermModule)> {
    require_case(module.p(), CaseTag::Split)?;
    let mut current = module.clone();
    let mut count = 0usize;
    loop {
        if current.rank() == 0 {
            break;
        }
        let eig = eigencomponents(&current)?;
        let pairings = eig.basis1.transpose().mul(current.gram()).mul(&eig.basis2);
        let unit = (0..pairings.rows())
            .flat_map(|i| (0..pairings.cols()).map(move |j| (i, j)))
            .find(|&(i, j)| pairings.get(i, j) % 2 == 1);
        let Some((i, j)) = unit else {
            break;
        };
        let x = eig.basis1.column(i);
        let scale = inv_mod(pairings.get(i, j), 2, current.precision())
            .expect("odd pairing value is a unit");
        let y = eig.basis2.column(j).scale(scale);
        current = split_at_pair(&current, &x, &y)?;
        count += 1;
    }
    // The remainder must be a free module of rank r (and the loop must have
    // removed exactly s summands; the caller checks against the shape).
    let shape = classify_module(&current.underlying_module())?;
    match shape {
        ModuleShape::Split { s: 0, t: 0, .. } => Ok((count, current)),
        other => Err(Error::Internal(format!(
            "remainder is not free: {other:?} after removing {count} summands"
        ))),
    }
}

/// One splitting step: M = <x, y> + orthogonal complement, with
/// psi(x, y) = 1, x and y eigenvectors for the two projections.
fn split_at_pair(
    module: &SkewHermModule,
    x: &PadicMatrix,
    y: &PadicMatrix,
) -> Result<SkewHermModule> {
    let k = module.precision();
    let m = module.rank();
    // The complement is the kernel of the two functionals z -> psi(z, x),
    // z -> psi(z, y); both rows are primitive, so the kernel is clean.
    let gx = module.gram().mul(x);
    let gy = module.gram().mul(y);
    let mut rows = PadicMatrix::zero(2, k, 2, m);
    for row in 0..m {
        rows.set(0, row, gx.get(row, 0));
        rows.set(1, row, gy.get(row, 0));
    }
    let complement = kernel_mod(&rows, k)?;
    if complement.cols() != m - 2 {
        return Err(Error::Internal(
            "orthogonal complement has unexpected rank".into(),
        ));
    }
    let u = x.hstack(y).hstack(&complement);
    let uinv = u
        .inverse()
        .ok_or_else(|| Error::Internal("hyperbolic pair does not split off a summand".into()))?;
    let w_new = uinv.mul(module.omega()).mul(&u);
    let g_new = u.transpose().mul(module.gram()).mul(&u);
    // Off-diagonal blocks vanish exactly; peel off the leading 2x2.
    for bi in 2..m {
        for bj in 0..2 {
            if w_new.get(bi, bj) != 0
                || w_new.get(bj, bi) != 0
                || g_new.get(bi, bj) != 0
                || g_new.get(bj, bi) != 0
            {
                return Err(Error::Internal(
                    "summand and complement fail to decouple".into(),
                ));
            }
        }
    }
    SkewHermModule::new(
        module.p(),
        w_new.submatrix(2, 2, m - 2, m - 2),
        g_new.submatrix(2, 2, m - 2, m - 2),
    )
}

/// The symmetric matrix invariant of a free module (s = 0) of rank 2r:
/// position of M between 2N and N for N the smallest overlattice with an
/// action of the full ring of integers, expressed against a symplectic basis
/// of N/2N adapted to the eigen-splitting.
pub fn u_matrix(module: &SkewHermModule) -> Result<SymMatF2> {
    require_case(module.p(), CaseTag::Split)?;
    let shape = classify_module(&module.underlying_module())?;
    let ModuleShape::Split { r, s, t } = shape else {
        unreachable!()
    };
    if s != 0 || t != 0 {
        return Err(Error::NotFree(s.max(t)));
    }
    if r == 0 {
        return Err(Error::Singular("rank-0 module carries no form".into()));
    }
    let k = module.precision();
    let m = module.rank();
    debug_assert_eq!(m, 2 * r);

    let eig = eigencomponents(module)?;
    let c = eig.basis1.hstack(&eig.basis2);

    // Gram of psi_N = 2 psi on the halved basis: (C^t G C) / 2.
    let big = c.transpose().mul(module.gram()).mul(&c);
    let mut gn = PadicMatrix::zero(2, k - 1, m, m);
    for i in 0..m {
        for j in 0..m {
            let v = big.get(i, j);
            if v % 2 != 0 {
                return Err(Error::Internal(
                    "pairing on the eigencomponent sum is not everywhere even".into(),
                ));
            }
            gn.set(i, j, (v / 2) % gn.modulus());
        }
    }

    // Coordinates of M's basis inside N: columns of 2 C^{-1}.
    let sf = smith_form(&c);
    let ones = sf.exponents.iter().filter(|&&e| e == 1).count();
    let zeros = sf.exponents.iter().filter(|&&e| e == 0).count();
    if ones != r || zeros != r {
        return Err(Error::Internal(format!(
            "index of M^1 + M^2 in M has exponents {:?}, expected (0^{r}, 1^{r})",
            sf.exponents
        )));
    }
    let mut scaled = PadicMatrix::zero(2, k, m, m);
    for (i, &e) in sf.exponents.iter().enumerate() {
        scaled.set(i, i, 1 << (1 - e));
    }
    let y = sf.q.mul(&scaled).mul(&sf.p).reduce_precision(k - 1);

    // M/2N inside N/2N: pick r independent columns mod 2.
    let ybits = BitMat::from_padic_mod2(&y);
    let idx = ybits.independent_columns();
    if idx.len() != r {
        return Err(Error::Internal(format!(
            "reduction of M has dimension {}, expected {r}",
            idx.len()
        )));
    }
    let mbar = ybits.select_columns(&idx);

    // Adapted symplectic basis of N/2N: the two eigenblocks are isotropic,
    // and the cross pairing block B is invertible; keep the e_i and replace
    // the f-block so the cross pairing becomes the identity.
    let gn_bits = BitMat::from_padic_mod2(&gn);
    for i in 0..r {
        for j in 0..r {
            if gn_bits.get(i, j) || gn_bits.get(r + i, r + j) {
                return Err(Error::Internal(
                    "eigenblocks of the overlattice pairing are not isotropic".into(),
                ));
            }
        }
    }
    let mut cross = BitMat::zero(r, r);
    for i in 0..r {
        for j in 0..r {
            cross.set(i, j, gn_bits.get(i, r + j));
        }
    }
    let cross_inv = cross
        .inverse()
        .ok_or_else(|| Error::Internal("overlattice pairing is degenerate mod 2".into()))?;
    let _ = cross_inv;

    // In the adapted coordinates a vector (a; b) becomes (a; B b).
    let mut a_block = BitMat::zero(r, r);
    let mut b_block = BitMat::zero(r, r);
    for col in 0..r {
        for row in 0..r {
            a_block.set(row, col, mbar.get(row, col));
            b_block.set(row, col, mbar.get(r + row, col));
        }
    }
    let b_adapted = cross.mul(&b_block);

    // Generation on the first side: the top block must be invertible; then
    // normalize columns to e_i + (column of U).
    let a_inv = a_block.inverse().ok_or_else(|| {
        Error::Internal("module does not generate the overlattice on the first component".into())
    })?;
    let u = b_adapted.mul(&a_inv);
    SymMatF2::new(u).map_err(|_| {
        Error::Internal("overlattice position matrix is not symmetric invertible".into())
    })
}

/// Build a module realizing the invariant (r, s, class(A)): the rank-r free
/// part sits inside N = L^r as 2N plus the span of e_i + sum_j A_ji f_j,
/// carrying half the overlattice pairing.
pub fn construct_from_u(p: u64, precision: u32, a: &SymMatF2, s: usize) -> Result<SkewHermModule> {
    require_case(p, CaseTag::Split)?;
    let r = a.rank();
    let roots = hensel_roots(p, precision)?;
    let modulus = crate::padic::pow_mod_u64(2, precision);
    let free_part = if r == 0 {
        SkewHermModule::zero_module(p, precision)?
    } else {
        let m = 2 * r;
        let mut w = PadicMatrix::zero(2, precision, m, m);
        // alpha_2 - alpha_1, an odd unit, exact at the working precision.
        let half_diff = (roots.alpha2 + modulus - roots.alpha1) % modulus;
        for i in 0..r {
            w.set(i, i, (2 * roots.alpha1) % modulus);
            w.set(r + i, r + i, (2 * roots.alpha2) % modulus);
            for j in 0..r {
                if a.get(j, i) {
                    w.set(r + j, i, half_diff);
                }
            }
        }
        let mut g = PadicMatrix::zero(2, precision, m, m);
        for i in 0..r {
            g.set(i, r + i, 1);
            g.set(r + i, i, modulus - 1);
        }
        SkewHermModule::new(p, w, g)?
    };
    let l = SkewHermModule::standard_l(p, precision)?;
    free_part.direct_sum(&l.power(s)?)
}

/// The complete invariant of a self-dual skew-Hermitian module in the split
/// case. Decision procedure: split off all hyperbolic summands, then read
/// the form class of the free remainder.
pub fn invariant(module: &SkewHermModule) -> Result<InvariantTriple> {
    require_case(module.p(), CaseTag::Split)?;
    let shape = classify_module(&module.underlying_module())?;
    let ModuleShape::Split { r, s, t } = shape else {
        unreachable!()
    };
    if s != t {
        return Err(Error::InvalidModule(format!(
            "self-dual modules have balanced eigencomponents; found s = {s}, t = {t}"
        )));
    }
    let (count, remainder) = split_off_l(module)?;
    if count != s {
        return Err(Error::Internal(format!(
            "split off {count} hyperbolic summands, module theory predicts {s}"
        )));
    }
    let form_class = if r == 0 {
        None
    } else {
        Some(congruence_class(&u_matrix(&remainder)?))
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
