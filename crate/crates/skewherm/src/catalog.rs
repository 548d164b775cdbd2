//! Case-dispatching front door: classify a module whichever side of the
//! p mod 8 split it lives on, build representatives for every class, and
//! enumerate the full catalog of classes in a given rank.

use crate::error::{Error, Result};
use crate::forms::{m_r, SymFormClassF2};
use crate::inert;
use crate::orders::{require_nonmaximal, CaseTag};
use crate::skewmod::{InvariantTriple, SkewHermModule};
use crate::split;

/// Complete invariant of a self-dual skew-Hermitian module, in either case.
pub fn invariant(module: &SkewHermModule) -> Result<InvariantTriple> {
    match require_nonmaximal(module.p())? {
        CaseTag::Split => split::invariant(module),
        CaseTag::Inert => inert::invariant(module),
        CaseTag::Maximal => unreachable!(),
    }
}

pub fn is_isomorphic(a: &SkewHermModule, b: &SkewHermModule) -> Result<bool> {
    match require_nonmaximal(a.p())? {
        CaseTag::Split => split::is_isomorphic(a, b),
        CaseTag::Inert => inert::is_isomorphic(a, b),
        CaseTag::Maximal => unreachable!(),
    }
}

/// The hyperbolic standard module of the ambient case: L when p = 7 mod 8,
/// L_0 when p = 3 mod 8.
pub fn hyperbolic_summand(p: u64, precision: u32) -> Result<SkewHermModule> {
    match require_nonmaximal(p)? {
        CaseTag::Split => SkewHermModule::standard_l(p, precision),
        CaseTag::Inert => SkewHermModule::standard_l0(p, precision),
        CaseTag::Maximal => unreachable!(),
    }
}

/// Build a module with the requested invariant (r, s, class). For r = 0 the
/// class must be None; for even r > 0 both classes exist and the alternating
/// flag selects one.
pub fn construct(
    p: u64,
    precision: u32,
    r: usize,
    s: usize,
    alternating: bool,
) -> Result<SkewHermModule> {
    if r == 0 {
        return hyperbolic_summand(p, precision)?.power(s);
    }
    if alternating && r % 2 == 1 {
        return Err(Error::ParameterMismatch(format!(
            "no alternating class exists in odd rank {r}"
        )));
    }
    let class = SymFormClassF2::new(r, alternating);
    let rep = class.representative();
    match require_nonmaximal(p)? {
        CaseTag::Split => split::construct_from_u(p, precision, &rep, s),
        CaseTag::Inert => inert::construct_from_symmetric(p, precision, &rep, s),
        CaseTag::Maximal => unreachable!(),
    }
}

/// One representative per class of half-rank n: every (r, s) with r + s = n
/// and every form class in rank r.
pub fn class_seeds(
    p: u64,
    precision: u32,
    n: usize,
) -> Result<Vec<(InvariantTriple, SkewHermModule)>> {
    let mut out = Vec::new();
    for r in 0..=n {
        let s = n - r;
        if r == 0 {
            let m = construct(p, precision, 0, s, false)?;
            out.push((
                InvariantTriple {
                    r: 0,
                    s,
                    form_class: None,
                },
                m,
            ));
        } else {
            for class in SymFormClassF2::all_in_rank(r) {
                let m = construct(p, precision, r, s, class.alternating)?;
                out.push((
                    InvariantTriple {
                        r,
                        s,
                        form_class: Some(class),
                    },
                    m,
                ));
            }
        }
    }
    Ok(out)
}

/// The closed-form class count in half-rank n: sum of m_r for r = 0..n.
pub fn expected_class_count(n: usize) -> usize {
    (0..=n).map(m_r).sum()
}

/// The coarser bound n + floor(n/2), reported alongside the exact count; the
/// two differ by one for every n >= 1 and the discrepancy is flagged wherever
/// the table is printed.
pub fn coarse_bound(n: usize) -> usize {
    n + n / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_counts_first_values() {
        assert_eq!(
            (1..=4).map(expected_class_count).collect::<Vec<_>>(),
            vec![2, 4, 5, 7]
        );
        assert_eq!((1..=4).map(coarse_bound).collect::<Vec<_>>(), vec![1, 3, 4, 6]);
    }

    #[test]
    fn seeds_realize_their_invariants() {
        for p in [7u64, 3] {
            for n in 1..=3usize {
                let seeds = class_seeds(p, 8, n).unwrap();
                assert_eq!(seeds.len(), expected_class_count(n));
                for (expect, module) in &seeds {
                    assert_eq!(&invariant(module).unwrap(), expect, "p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn maximal_case_is_rejected() {
        assert!(matches!(
            construct(5, 8, 1, 0, false),
            Err(Error::MaximalOrder(5))
        ));
    }
}
