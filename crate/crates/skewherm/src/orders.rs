//! The quadratic orders R = Z_2[omega] and O_E = Z_2[alpha].
//!
//! For an odd prime p with p = 3 mod 4, the ring of interest is
//! R = Z_2[X]/(X^2 + 2X + (p+1)) sitting inside
//! O_E = Z_2[X]/(X^2 + X + (p+1)/4), with 2*alpha = omega. Whether E is a
//! split algebra, an unramified field, or R is already maximal depends only
//! on p mod 8, captured by `CaseTag`.

use crate::error::{Error, Result};
use crate::padic::{add_mod, inv_mod, mul_mod, pow_mod_u64, sub_mod, PadicApprox};

/// Behaviour of 2 in E = Q_2[X]/(X^2 + p).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    /// p = 7 mod 8: E is isomorphic to Q_2 x Q_2.
    Split,
    /// p = 3 mod 8: E is the unramified quadratic field extension of Q_2.
    Inert,
    /// p = 2 or p = 1 mod 4: R is already the maximal order. Accepted for
    /// documentation only; the classifiers reject it.
    Maximal,
}

pub fn case_of(p: u64) -> CaseTag {
    if p == 2 || p % 4 == 1 {
        CaseTag::Maximal
    } else if p % 8 == 7 {
        CaseTag::Split
    } else {
        debug_assert_eq!(p % 8, 3);
        CaseTag::Inert
    }
}

/// Require a non-maximal case, as every classifier does.
pub fn require_nonmaximal(p: u64) -> Result<CaseTag> {
    match case_of(p) {
        CaseTag::Maximal => Err(Error::MaximalOrder(p)),
        tag => Ok(tag),
    }
}

pub fn require_case(p: u64, expected: CaseTag) -> Result<()> {
    let found = case_of(p);
    if found == expected {
        Ok(())
    } else {
        Err(Error::WrongCase { expected, found, p })
    }
}

/// Which Z_2-basis an `OrderElem` is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderBasis {
    /// a + b*omega with omega^2 + 2*omega + (p+1) = 0; the ring R.
    Omega,
    /// a + b*alpha with alpha^2 + alpha + (p+1)/4 = 0; the ring O_E.
    Alpha,
}

/// Element of R or O_E, coordinates known mod 2^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderElem {
    pub p: u64,
    pub precision: u32,
    pub basis: OrderBasis,
    /// Coefficient on 1.
    pub a: u64,
    /// Coefficient on omega or alpha.
    pub b: u64,
}

impl OrderElem {
    pub fn new(p: u64, precision: u32, basis: OrderBasis, a: i64, b: i64) -> Self {
        assert_eq!(p % 4, 3, "orders are only defined for p = 3 mod 4");
        let m = pow_mod_u64(2, precision) as i64;
        OrderElem {
            p,
            precision,
            basis,
            a: a.rem_euclid(m) as u64,
            b: b.rem_euclid(m) as u64,
        }
    }

    pub fn one(p: u64, precision: u32, basis: OrderBasis) -> Self {
        Self::new(p, precision, basis, 1, 0)
    }

    /// The generator (omega or alpha) itself.
    pub fn generator(p: u64, precision: u32, basis: OrderBasis) -> Self {
        Self::new(p, precision, basis, 0, 1)
    }

    fn modulus(&self) -> u64 {
        pow_mod_u64(2, self.precision)
    }

    fn assert_ctx(&self, other: &Self) {
        assert_eq!(self.p, other.p);
        assert_eq!(self.precision, other.precision);
        assert_eq!(self.basis, other.basis);
    }

    /// Constant term of the minimal polynomial of the generator.
    fn gen_norm(&self) -> u64 {
        let m = self.modulus();
        match self.basis {
            OrderBasis::Omega => (self.p + 1) % m,
            OrderBasis::Alpha => ((self.p + 1) / 4) % m,
        }
    }

    /// Negated trace of the generator: omega has trace -2, alpha has trace -1.
    fn gen_neg_trace(&self) -> u64 {
        match self.basis {
            OrderBasis::Omega => 2,
            OrderBasis::Alpha => 1,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_ctx(other);
        let m = self.modulus();
        OrderElem {
            a: add_mod(self.a, other.a, m),
            b: add_mod(self.b, other.b, m),
            ..*self
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_ctx(other);
        let m = self.modulus();
        OrderElem {
            a: sub_mod(self.a, other.a, m),
            b: sub_mod(self.b, other.b, m),
            ..*self
        }
    }

    /// Product via g^2 = -t*g - n with (t, n) the trace/norm data of the
    /// generator g.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_ctx(other);
        let m = self.modulus();
        let t = self.gen_neg_trace();
        let n = self.gen_norm();
        // (a1 + b1 g)(a2 + b2 g) = a1 a2 - n b1 b2 + (a1 b2 + a2 b1 - t b1 b2) g
        let bb = mul_mod(self.b, other.b, m);
        let a = sub_mod(mul_mod(self.a, other.a, m), mul_mod(n, bb, m), m);
        let b = sub_mod(
            add_mod(
                mul_mod(self.a, other.b, m),
                mul_mod(other.a, self.b, m),
                m,
            ),
            mul_mod(t, bb, m),
            m,
        );
        OrderElem { a, b, ..*self }
    }

    /// The nontrivial involution: conj(a + b*omega) = (a - 2b) - b*omega and
    /// conj(a + b*alpha) = (a - b) - b*alpha.
    pub fn conj(&self) -> Self {
        let m = self.modulus();
        let t = self.gen_neg_trace();
        OrderElem {
            a: sub_mod(self.a, mul_mod(t, self.b, m), m),
            b: sub_mod(0, self.b, m),
            ..*self
        }
    }

    /// x * conj(x), landing in Z_2 (b-coefficient vanishes identically).
    pub fn norm(&self) -> PadicApprox {
        let prod = self.mul(&self.conj());
        debug_assert_eq!(prod.b, 0, "norm must land in the fixed ring");
        PadicApprox::from_residue(2, self.precision, prod.a)
    }

    /// x + conj(x), landing in Z_2.
    pub fn trace(&self) -> PadicApprox {
        let sum = self.add(&self.conj());
        debug_assert_eq!(sum.b, 0, "trace must land in the fixed ring");
        PadicApprox::from_residue(2, self.precision, sum.a)
    }

    /// Rewrite an R-element a + b*omega as an O_E-element a + (2b)*alpha.
    pub fn into_alpha_basis(&self) -> Self {
        match self.basis {
            OrderBasis::Alpha => *self,
            OrderBasis::Omega => {
                let m = self.modulus();
                OrderElem {
                    basis: OrderBasis::Alpha,
                    a: self.a,
                    b: mul_mod(2, self.b, m),
                    ..*self
                }
            }
        }
    }
}

/// The two roots of X^2 + X + (p+1)/4 in Z/2^k for p = 7 mod 8, with the
/// normalization fixing alpha_1 as the unit root and alpha_2 as the even one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitRoots {
    pub p: u64,
    pub precision: u32,
    pub alpha1: u64,
    pub alpha2: u64,
}

/// Hensel lifting of the two simple roots mod 2 (the polynomial factors as
/// X(X+1) there since (p+1)/4 is even exactly when p = 7 mod 8).
pub fn hensel_roots(p: u64, precision: u32) -> Result<SplitRoots> {
    if p % 8 != 7 {
        return Err(Error::WrongCase {
            expected: CaseTag::Split,
            found: case_of(p),
            p,
        });
    }
    let m = pow_mod_u64(2, precision);
    let c = ((p + 1) / 4) % m;
    let f = |x: u64| add_mod(add_mod(mul_mod(x, x, m), x, m), c, m);
    // f'(x) = 2x + 1 is always a unit, so Newton converges from either
    // residue mod 2.
    let lift = |start: u64| -> u64 {
        let mut x = start;
        loop {
            let fx = f(x);
            if fx == 0 {
                return x;
            }
            let deriv = add_mod(mul_mod(2, x, m), 1, m);
            let step = mul_mod(fx, inv_mod(deriv, 2, precision).unwrap(), m);
            x = sub_mod(x, step, m);
        }
    };
    let alpha1 = lift(1);
    let alpha2 = lift(0);
    debug_assert_eq!(alpha1 % 2, 1);
    debug_assert_eq!(alpha2 % 2, 0);
    Ok(SplitRoots {
        p,
        precision,
        alpha1,
        alpha2,
    })
}

impl SplitRoots {
    /// Check the symmetric-function identities exactly mod 2^k.
    pub fn verify(&self) -> bool {
        let m = pow_mod_u64(2, self.precision);
        let sum_ok = add_mod(self.alpha1, self.alpha2, m) == sub_mod(0, 1, m);
        let prod_ok = mul_mod(self.alpha1, self.alpha2, m) == ((self.p + 1) / 4) % m;
        sum_ok && prod_ok
    }
}

/// Solve N(lambda) = a for lambda in R^x = 1 + 2 O_E, for any odd a.
///
/// Digit-by-digit lifting: N(1 + 2^i alpha) = 1 - 2^i mod 2^{i+1} for i >= 1,
/// so multiplying by that element flips the i-th binary digit of the norm.
/// The construction is deterministic, and the result is asserted to verify.
pub fn solve_unit_norm(p: u64, precision: u32, a: u64) -> Result<OrderElem> {
    require_case(p, CaseTag::Inert)?;
    if a % 2 == 0 {
        return Err(Error::Singular(format!(
            "norm equation N(x) = {a} has no unit solution: target must be odd"
        )));
    }
    let m = pow_mod_u64(2, precision);
    let target = a % m;
    let mut lambda = OrderElem::one(p, precision, OrderBasis::Alpha);
    for i in 1..precision {
        let pow2 = pow_mod_u64(2, i);
        let cur = lambda.norm().value();
        // Compare digit i of the current norm against the target.
        if (cur ^ target) & pow2 != 0 {
            let bump = OrderElem::new(p, precision, OrderBasis::Alpha, 1, pow2 as i64);
            lambda = lambda.mul(&bump);
        }
    }
    let achieved = lambda.norm().value();
    if achieved != target {
        return Err(Error::Internal(format!(
            "unit norm lifting stalled: reached {achieved}, wanted {target}"
        )));
    }
    // lambda lies in 1 + 2 O_E = R^x.
    debug_assert_eq!(lambda.a % 2, 1);
    debug_assert_eq!(lambda.b % 2, 0);
    Ok(lambda)
}
