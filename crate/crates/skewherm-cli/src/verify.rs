//! Named verification suites behind `skewherm verify`. Each check runs a
//! property with a fixed seed and reports the first counterexample.

use skewherm::catalog;
use skewherm::forms::{self, SymFormClassF2};
use skewherm::hermlat::{self, ExtKind, QuadExt};
use skewherm::rng::Rng;
use skewherm::skewmod::{isometric_by_exhaustion, SkewHermModule};

pub struct Check {
    pub name: String,
    pub run: Box<dyn FnOnce() -> Result<(), String>>,
}

fn check(name: &str, run: impl FnOnce() -> Result<(), String> + 'static) -> Check {
    Check {
        name: name.to_string(),
        run: Box::new(run),
    }
}

pub fn forms_suite() -> Vec<Check> {
    vec![
        check("class counts of symmetric F_2 forms by exhaustion", || {
            let mut table = Vec::new();
            for r in 0..=4usize {
                let found = if r == 0 {
                    1
                } else {
                    forms::enumerate_orbits_f2(r).map_err(|e| e.to_string())?.len()
                };
                table.push(found);
                if found != forms::m_r(r) {
                    return Err(format!(
                        "rank {r}: exhaustion found {found}, closed form {}",
                        forms::m_r(r)
                    ));
                }
            }
            if table != vec![1, 1, 2, 1, 2] {
                return Err(format!("table {table:?} is not (1, 1, 2, 1, 2)"));
            }
            Ok(())
        }),
        check("rank-2 orbit sizes are 1 and 3", || {
            let orbits = forms::enumerate_orbits_f2(2).map_err(|e| e.to_string())?;
            let mut sizes: Vec<usize> = orbits.iter().map(|o| o.size).collect();
            sizes.sort_unstable();
            if sizes != vec![1, 3] {
                return Err(format!("orbit sizes {sizes:?}"));
            }
            Ok(())
        }),
        check("unitary double cosets match class counts (r <= 3)", || {
            for r in 1..=3usize {
                let dc = forms::yr_double_cosets(r).map_err(|e| e.to_string())?;
                if dc.coset_count != forms::m_r(r) {
                    return Err(format!(
                        "r = {r}: {} double cosets, {} classes",
                        dc.coset_count,
                        forms::m_r(r)
                    ));
                }
            }
            Ok(())
        }),
        check("Hermitian square is right-translation equivariant", || {
            let mut rng = Rng::new(17);
            let yr = forms::yr_enum(2).map_err(|e| e.to_string())?;
            let gl: Vec<forms::MatF4> = forms::gl_f2(2)
                .iter()
                .map(forms::MatF4::from_bitmat)
                .collect();
            for _ in 0..1000 {
                let u = &yr[rng.below(yr.len() as u64) as usize];
                let p = &gl[rng.below(gl.len() as u64) as usize];
                let lhs = forms::pi_map(&u.mul(p));
                let rhs = p.bar_t().mul(&forms::pi_map(u)).mul(p);
                if lhs != rhs {
                    return Err("pi(UP) != P^t pi(U) P".into());
                }
            }
            Ok(())
        }),
    ]
}

fn seed_modules(p: u64, k: u32) -> Result<Vec<SkewHermModule>, String> {
    let mut seeds = Vec::new();
    for n in 1..=3usize {
        for (_, m) in catalog::class_seeds(p, k, n).map_err(|e| e.to_string())? {
            seeds.push(m);
        }
    }
    Ok(seeds)
}

fn classifier_suite(label: &str, p: u64, seed: u64, k: u32) -> Vec<Check> {
    vec![
        check(&format!("disguise invariance ({label})"), move || {
            let mut rng = Rng::new(seed);
            for base in seed_modules(p, k)? {
                let expect = catalog::invariant(&base).map_err(|e| e.to_string())?;
                for _ in 0..200 {
                    let d = base.disguise(rng.next_u64());
                    let got = catalog::invariant(&d).map_err(|e| e.to_string())?;
                    if got != expect {
                        return Err(format!("invariant moved from {expect} to {got}"));
                    }
                }
            }
            Ok(())
        }),
        check(
            &format!("cancellation of hyperbolic summands ({label})"),
            move || {
                let hyper = catalog::hyperbolic_summand(p, k).map_err(|e| e.to_string())?;
                for r in 0..=3usize {
                    let classes: Vec<Option<SymFormClassF2>> = if r == 0 {
                        vec![None]
                    } else {
                        SymFormClassF2::all_in_rank(r).into_iter().map(Some).collect()
                    };
                    for class in classes {
                        let base = catalog::construct(
                            p,
                            k,
                            r,
                            0,
                            class.map_or(false, |c| c.alternating),
                        )
                        .map_err(|e| e.to_string())?;
                        let base_inv = catalog::invariant(&base).map_err(|e| e.to_string())?;
                        for extra in 1..=3usize {
                            let sum = base
                                .direct_sum(&hyper.power(extra).map_err(|e| e.to_string())?)
                                .map_err(|e| e.to_string())?;
                            let got = catalog::invariant(&sum).map_err(|e| e.to_string())?;
                            if got.r != base_inv.r
                                || got.s != base_inv.s + extra
                                || got.form_class != base_inv.form_class
                            {
                                return Err(format!(
                                    "adding {extra} summand(s) moved {base_inv} to {got}"
                                ));
                            }
                        }
                    }
                }
                Ok(())
            },
        ),
        check(&format!("rank-2 brute-force oracle agreement ({label})"), move || {
            let mut rng = Rng::new(seed ^ 0xabcd);
            let seeds = catalog::class_seeds(p, k, 1).map_err(|e| e.to_string())?;
            for trial in 0..100 {
                let a = &seeds[rng.below(seeds.len() as u64) as usize].1;
                let b = &seeds[rng.below(seeds.len() as u64) as usize].1;
                let da = a.disguise(rng.next_u64());
                let db = b.disguise(rng.next_u64());
                let fast = catalog::is_isomorphic(&da, &db).map_err(|e| e.to_string())?;
                let slow = isometric_by_exhaustion(
                    &da.truncate(3).map_err(|e| e.to_string())?,
                    &db.truncate(3).map_err(|e| e.to_string())?,
                );
                if fast != slow {
                    return Err(format!(
                        "trial {trial}: invariants say {fast}, exhaustive search says {slow}"
                    ));
                }
            }
            Ok(())
        }),
    ]
}

pub fn split_suite(seed: u64, k: u32) -> Vec<Check> {
    classifier_suite("split, p = 7", 7, seed, k)
}

pub fn inert_suite(seed: u64, k: u32) -> Vec<Check> {
    classifier_suite("inert, p = 3", 3, seed, k)
}

pub fn jacobowitz_suite(seed: u64) -> Vec<Check> {
    vec![
        check("Jordan type invariance under congruence", move || {
            let mut rng = Rng::new(seed);
            for p in [3u64, 5, 7] {
                for kind in [
                    ExtKind::Unramified,
                    ExtKind::RamifiedPrime,
                    ExtKind::RamifiedUnitPrime,
                ] {
                    let ext = QuadExt::new(p, kind, 6).map_err(|e| e.to_string())?;
                    for _ in 0..30 {
                        let rank = 1 + rng.below(4) as usize;
                        let l = hermlat::random_lattice(ext, rank, &mut rng);
                        let j1 = hermlat::jordan_splitting(&l).map_err(|e| e.to_string())?;
                        let j2 = hermlat::jordan_splitting(&l.disguise(rng.next_u64()))
                            .map_err(|e| e.to_string())?;
                        if !hermlat::type_equal(&j1, &j2) {
                            return Err(format!(
                                "type moved under congruence at p = {p}, {kind:?}"
                            ));
                        }
                    }
                }
            }
            Ok(())
        }),
        check("isometry is reflexive and symmetric; reassembly fixed", move || {
            let mut rng = Rng::new(seed ^ 0x5a5a);
            for p in [3u64, 7] {
                for kind in [ExtKind::Unramified, ExtKind::RamifiedPrime] {
                    let ext = QuadExt::new(p, kind, 6).map_err(|e| e.to_string())?;
                    for _ in 0..20 {
                        let l = hermlat::random_lattice(ext, 1 + rng.below(4) as usize, &mut rng);
                        if !hermlat::isometric(&l, &l).map_err(|e| e.to_string())? {
                            return Err("isometry is not reflexive".into());
                        }
                        let d = l.disguise(rng.next_u64());
                        if !(hermlat::isometric(&l, &d).map_err(|e| e.to_string())?
                            && hermlat::isometric(&d, &l).map_err(|e| e.to_string())?)
                        {
                            return Err("isometry is not symmetric on congruent pairs".into());
                        }
                        let j = hermlat::jordan_splitting(&l).map_err(|e| e.to_string())?;
                        let r = hermlat::reassemble(&j).map_err(|e| e.to_string())?;
                        if !hermlat::isometric(&l, &r).map_err(|e| e.to_string())? {
                            return Err("reassembled Jordan blocks changed the class".into());
                        }
                    }
                }
            }
            Ok(())
        }),
        check("ramified unit-determinant pair is separated", || {
            let ext = QuadExt::new(3, ExtKind::RamifiedPrime, 6).map_err(|e| e.to_string())?;
            let u = hermlat::nonresidue(3) as i64;
            let a = hermlat::HermLattice::diagonal(ext, &[(1, 0), (1, 0)])
                .map_err(|e| e.to_string())?;
            let b = hermlat::HermLattice::diagonal(ext, &[(1, 0), (u, 0)])
                .map_err(|e| e.to_string())?;
            if hermlat::isometric(&a, &b).map_err(|e| e.to_string())? {
                return Err("diag(1,1) and diag(1,u) were not separated".into());
            }
            Ok(())
        }),
    ]
}
