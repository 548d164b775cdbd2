//! Property tests for the algebraic substrate, in proptest form: the
//! structural identities that must hold for arbitrary inputs, not just the
//! catalog seeds.

use proptest::prelude::*;

use skewherm::catalog;
use skewherm::orders::{OrderBasis, OrderElem};
use skewherm::padic::{kernel_mod, pow_mod_u64, saturate, smith_form, PadicMatrix};
use skewherm::rng::Rng;

fn padic_matrix(n: usize, k: u32) -> impl Strategy<Value = PadicMatrix> {
    prop::collection::vec(0u64..pow_mod_u64(2, k), n * n).prop_map(move |vals| {
        let mut m = PadicMatrix::zero(2, k, n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, vals[i * n + j]);
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn smith_transforms_multiply_back(a in padic_matrix(4, 6)) {
        let sf = smith_form(&a);
        prop_assert_eq!(sf.p.mul(&a).mul(&sf.q), sf.s.clone());
        prop_assert!(sf.p.is_unimodular());
        prop_assert!(sf.q.is_unimodular());
        // Divisibility chain.
        prop_assert!(sf.exponents.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn smith_exponents_are_equivalence_invariants(a in padic_matrix(3, 6), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let (u, _) = PadicMatrix::random_unimodular(2, 6, 3, &mut rng);
        let (v, _) = PadicMatrix::random_unimodular(2, 6, 3, &mut rng);
        prop_assert_eq!(
            smith_form(&a).exponents,
            smith_form(&u.mul(&a).mul(&v)).exponents
        );
    }

    #[test]
    fn kernel_annihilates_and_saturate_is_idempotent(a in padic_matrix(4, 6), j in 1u32..=6) {
        let kern = kernel_mod(&a, j).unwrap();
        if kern.cols() > 0 {
            let prod = a.mul(&kern);
            let pj = pow_mod_u64(2, j);
            for i in 0..prod.rows() {
                for c in 0..prod.cols() {
                    prop_assert_eq!(prod.get(i, c) % pj, 0);
                }
            }
            // Kernel basis is primitive, so saturation leaves it alone.
            let s = saturate(&kern, 2).unwrap();
            prop_assert_eq!(s, kern);
        }
    }

    #[test]
    fn conjugation_is_an_involutive_ring_map(
        a1 in 0i64..256, b1 in 0i64..256, a2 in 0i64..256, b2 in 0i64..256,
        alpha_basis in any::<bool>()
    ) {
        let basis = if alpha_basis { OrderBasis::Alpha } else { OrderBasis::Omega };
        let x = OrderElem::new(3, 8, basis, a1, b1);
        let y = OrderElem::new(3, 8, basis, a2, b2);
        prop_assert_eq!(x.conj().conj(), x);
        prop_assert_eq!(x.mul(&y).conj(), x.conj().mul(&y.conj()));
        prop_assert_eq!(x.norm(), x.conj().norm());
        // Norm and trace land in the fixed ring: multiplicativity check.
        prop_assert_eq!(x.mul(&y).norm(), x.norm().mul(&y.norm()));
    }

    #[test]
    fn module_files_round_trip_bit_exactly(
        p_split in any::<bool>(), r in 0usize..=2, s in 0usize..=2, seed in any::<u64>()
    ) {
        prop_assume!(r + s > 0);
        let p = if p_split { 7 } else { 3 };
        let alternating = false;
        let m = catalog::construct(p, 8, r, s, alternating).unwrap().disguise(seed);
        let text = m.to_json();
        let back = skewherm::skewmod::SkewHermModule::from_json(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn invariants_survive_random_basis_changes(
        p_split in any::<bool>(), r in 0usize..=2, s in 0usize..=1, alt in any::<bool>(), seed in any::<u64>()
    ) {
        prop_assume!(r + s > 0);
        let alternating = alt && r == 2;
        let p = if p_split { 7 } else { 3 };
        let base = catalog::construct(p, 8, r, s, alternating).unwrap();
        let expect = catalog::invariant(&base).unwrap();
        let got = catalog::invariant(&base.disguise(seed)).unwrap();
        prop_assert_eq!(got, expect);
    }
}
