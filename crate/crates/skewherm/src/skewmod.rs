//! The central data type: a self-dual skew-Hermitian module (M, psi).
//!
//! A module is a pair of matrices over Z/2^k sharing one basis: the
//! omega-action W and the alternating Gram G with G[i][j] = psi(b_i, b_j).
//! Self-duality means G is invertible over Z_2, and the compatibility between
//! the two structures is the adjunction W^t G = -2G - GW coming from
//! psi(omega x, y) = psi(x, conj(omega) y).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::{case_of, hensel_roots, require_case, require_nonmaximal, CaseTag};
use crate::padic::{pow_mod_u64, PadicMatrix};
use crate::rmodule::RModule;
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewHermModule {
    p: u64,
    precision: u32,
    w: PadicMatrix,
    g: PadicMatrix,
}

/// Outcome of checking the four structural invariants, with the first
/// violating entry where applicable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// G^t = -G with zero diagonal; first offending (i, j) otherwise.
    pub alternating: std::result::Result<(), (usize, usize)>,
    /// det G is a unit (self-duality).
    pub unimodular: bool,
    /// W^t G + 2G + GW = 0; first offending (i, j) otherwise.
    pub adjunction: std::result::Result<(), (usize, usize)>,
    /// W^2 + 2W + (p+1)I = 0.
    pub omega_relation: bool,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.alternating.is_ok() && self.unimodular && self.adjunction.is_ok() && self.omega_relation
    }
}

/// Check the structural invariants of a candidate (W, G) pair.
pub fn validate(p: u64, w: &PadicMatrix, g: &PadicMatrix) -> ValidationReport {
    let m = w.rows();
    let k = w.precision();
    let modulus = w.modulus();

    let mut alternating = Ok(());
    'alt: for i in 0..m {
        for j in 0..m {
            let bad = if i == j {
                g.get(i, i) != 0
            } else {
                (g.get(i, j) + g.get(j, i)) % modulus != 0
            };
            if bad {
                alternating = Err((i, j));
                break 'alt;
            }
        }
    }

    let unimodular = g.is_unimodular();

    let lhs = w.transpose().mul(g).add(&g.scale(2)).add(&g.mul(w));
    let mut adjunction = Ok(());
    'adj: for i in 0..m {
        for j in 0..m {
            if lhs.get(i, j) != 0 {
                adjunction = Err((i, j));
                break 'adj;
            }
        }
    }

    let rel = w
        .mul(w)
        .add(&w.scale(2))
        .add(&PadicMatrix::identity(2, k, m).scale((p + 1) % modulus));
    let omega_relation = rel.is_zero();

    ValidationReport {
        alternating,
        unimodular,
        adjunction,
        omega_relation,
    }
}

impl SkewHermModule {
    pub fn new(p: u64, w: PadicMatrix, g: PadicMatrix) -> Result<Self> {
        require_nonmaximal(p)?;
        assert_eq!(w.prime(), 2);
        assert_eq!(g.prime(), 2);
        if w.rows() != w.cols() || g.rows() != g.cols() || w.rows() != g.rows() {
            return Err(Error::InvalidModule(
                "omega action and Gram must be square of equal size".into(),
            ));
        }
        if w.precision() != g.precision() {
            return Err(Error::InvalidModule(
                "omega action and Gram must share one precision".into(),
            ));
        }
        let report = validate(p, &w, &g);
        if !report.pass() {
            return Err(Error::InvalidModule(describe_failure(&report)));
        }
        Ok(SkewHermModule {
            p,
            precision: w.precision(),
            w,
            g,
        })
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

    pub fn case(&self) -> CaseTag {
        case_of(self.p)
    }

    pub fn omega(&self) -> &PadicMatrix {
        &self.w
    }

    pub fn gram(&self) -> &PadicMatrix {
        &self.g
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self.p, &self.w, &self.g)
    }

    pub fn underlying_module(&self) -> RModule {
        RModule::new(self.p, self.w.clone()).expect("validated on construction")
    }

    /// psi(x, y) = x^t G y for column vectors.
    pub fn pairing(&self, x: &PadicMatrix, y: &PadicMatrix) -> u64 {
        let v = x.transpose().mul(&self.g).mul(y);
        v.get(0, 0)
    }

    /// The rank-0 module, the identity for direct sums.
    pub fn zero_module(p: u64, precision: u32) -> Result<Self> {
        require_nonmaximal(p)?;
        let z = PadicMatrix::zero(2, precision, 0, 0);
        Ok(SkewHermModule {
            p,
            precision,
            w: z.clone(),
            g: z,
        })
    }

    /// Split case standard module L = O_E = Z_2 x Z_2 with psi(e1, e2) = 1.
    /// omega acts by the two eigenvalues 2*alpha_1, 2*alpha_2.
    pub fn standard_l(p: u64, precision: u32) -> Result<Self> {
        require_case(p, CaseTag::Split)?;
        let roots = hensel_roots(p, precision)?;
        let w = PadicMatrix::from_rows(
            2,
            precision,
            &[
                vec![(2 * roots.alpha1) as i64, 0],
                vec![0, (2 * roots.alpha2) as i64],
            ],
        );
        let g = PadicMatrix::from_rows(2, precision, &[vec![0, 1], vec![-1, 0]]);
        Self::new(p, w, g)
    }

    /// Inert case L_0 = O_E on the basis (1, alpha), psi(1, alpha) = 1.
    pub fn standard_l0(p: u64, precision: u32) -> Result<Self> {
        require_case(p, CaseTag::Inert)?;
        let half = ((p + 1) / 2) as i64;
        let w = PadicMatrix::from_rows(2, precision, &[vec![0, -half], vec![2, -2]]);
        let g = PadicMatrix::from_rows(2, precision, &[vec![0, 1], vec![-1, 0]]);
        Self::new(p, w, g)
    }

    /// Inert case L_1 = R on the basis (1, omega), psi(1, omega) = 1.
    pub fn standard_l1(p: u64, precision: u32) -> Result<Self> {
        require_case(p, CaseTag::Inert)?;
        let w = PadicMatrix::from_rows(
            2,
            precision,
            &[vec![0, -((p + 1) as i64)], vec![1, -2]],
        );
        let g = PadicMatrix::from_rows(2, precision, &[vec![0, 1], vec![-1, 0]]);
        Self::new(p, w, g)
    }

    /// Inert case H = R + R on the basis (e1, omega e1, e2, omega e2).
    ///
    /// Four pairing values pin the form down: psi(e1, omega e1) = 0,
    /// psi(e1, e2) = 0, psi(e1, omega e2) = 1, psi(e2, omega e2) = 0; the
    /// remaining entries follow from the adjunction, e.g.
    /// psi(omega e1, e2) = -1 and psi(omega e1, omega e2) = 0.
    pub fn standard_h(p: u64, precision: u32) -> Result<Self> {
        require_case(p, CaseTag::Inert)?;
        let companion = PadicMatrix::from_rows(
            2,
            precision,
            &[vec![0, -((p + 1) as i64)], vec![1, -2]],
        );
        let w = companion.block_diag(&companion);
        let g = PadicMatrix::from_rows(
            2,
            precision,
            &[
                vec![0, 0, 0, 1],
                vec![0, 0, -1, 0],
                vec![0, 1, 0, 0],
                vec![-1, 0, 0, 0],
            ],
        );
        Self::new(p, w, g)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.p != other.p || self.precision != other.precision {
            return Err(Error::ParameterMismatch(format!(
                "cannot sum modules over (p, k) = ({}, {}) and ({}, {})",
                self.p, self.precision, other.p, other.precision
            )));
        }
        Self::new(
            self.p,
            self.w.block_diag(&other.w),
            self.g.block_diag(&other.g),
        )
    }

    /// n-fold direct sum of `self`.
    pub fn power(&self, n: usize) -> Result<Self> {
        let mut acc = Self::zero_module(self.p, self.precision)?;
        for _ in 0..n {
            acc = acc.direct_sum(self)?;
        }
        Ok(acc)
    }

    /// Transport of structure along an invertible basis change P (columns of
    /// P are the new basis in old coordinates): W -> P^{-1} W P and
    /// G -> P^t G P. The result is isometric to `self` by construction.
    pub fn change_basis(&self, p_mat: &PadicMatrix) -> Result<Self> {
        let pinv = p_mat
            .inverse()
            .ok_or_else(|| Error::Singular("basis change must be invertible".into()))?;
        Self::new(
            self.p,
            pinv.mul(&self.w).mul(p_mat),
            p_mat.transpose().mul(&self.g).mul(p_mat),
        )
    }

    /// Seeded random basis change; reproducible, and invariant-preserving by
    /// construction.
    pub fn disguise(&self, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let (p_mat, _) = PadicMatrix::random_unimodular(2, self.precision, self.rank(), &mut rng);
        self.change_basis(&p_mat)
            .expect("random unimodular change of basis preserves validity")
    }

    /// Forget high digits.
    pub fn truncate(&self, new_precision: u32) -> Result<Self> {
        if new_precision > self.precision || new_precision == 0 {
            return Err(Error::InsufficientPrecision {
                requested: new_precision,
                available: self.precision,
            });
        }
        Ok(SkewHermModule {
            p: self.p,
            precision: new_precision,
            w: self.w.reduce_precision(new_precision),
            g: self.g.reduce_precision(new_precision),
        })
    }

    pub fn to_file(&self) -> ModuleFile {
        ModuleFile {
            p: self.p,
            precision: self.precision,
            rank: self.rank(),
            omega_action: matrix_to_rows(&self.w),
            gram: matrix_to_rows(&self.g),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModuleFile = serde_json::from_str(text)?;
        file.into_module()
    }
}

fn describe_failure(report: &ValidationReport) -> String {
    if let Err((i, j)) = report.alternating {
        return format!("not alternating: entry ({i}, {j})");
    }
    if !report.unimodular {
        return "not self-dual: Gram determinant is not a unit".into();
    }
    if let Err((i, j)) = report.adjunction {
        return format!("adjunction fails at entry ({i}, {j})");
    }
    "omega relation fails".into()
}

fn matrix_to_rows(m: &PadicMatrix) -> Vec<Vec<u64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
        .collect()
}

/// Interchange format: entries are residues in [0, 2^precision), row-major.
/// This is the CLI's on-disk schema and round-trips bit-exactly.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModuleFile {
    pub p: u64,
    pub precision: u32,
    pub rank: usize,
    pub omega_action: Vec<Vec<u64>>,
    pub gram: Vec<Vec<u64>>,
}

impl ModuleFile {
    pub fn into_module(self) -> Result<SkewHermModule> {
        let w = rows_to_matrix(self.precision, self.rank, &self.omega_action, "omega_action")?;
        let g = rows_to_matrix(self.precision, self.rank, &self.gram, "gram")?;
        SkewHermModule::new(self.p, w, g)
    }
}

fn rows_to_matrix(
    precision: u32,
    rank: usize,
    rows: &[Vec<u64>],
    field: &str,
) -> Result<PadicMatrix> {
    if precision == 0 || precision > 62 {
        return Err(Error::InvalidModule(format!(
            "precision {precision} out of range"
        )));
    }
    let modulus = pow_mod_u64(2, precision);
    if rows.len() != rank {
        return Err(Error::InvalidModule(format!(
            "{field}: expected {rank} rows, found {}",
            rows.len()
        )));
    }
    let mut out = PadicMatrix::zero(2, precision, rank, rank);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != rank {
            return Err(Error::InvalidModule(format!(
                "{field}: row {i} has {} entries, expected {rank}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if v >= modulus {
                return Err(Error::InvalidModule(format!(
                    "{field}: entry ({i}, {j}) = {v} exceeds 2^{precision}"
                )));
            }
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// The E-valued skew-Hermitian form recovered from psi in the inert case,
/// plus the Hermitian twist by pi. Coefficients live in (1/2) O_E, so the
/// 1-coordinates are stored doubled; alpha-coordinates are always integral.
#[derive(Clone, Debug)]
pub struct HermitianLift {
    pub p: u64,
    pub precision: u32,
    /// 2 * (coefficient of 1 in <x, y>).
    pub skew_two_c0: PadicMatrix,
    /// Coefficient of alpha in <x, y>.
    pub skew_c1: PadicMatrix,
    /// 2 * (coefficient of 1 in (x, y) = pi <x, y>).
    pub herm_two_h0: PadicMatrix,
    /// Coefficient of alpha in (x, y); equals psi itself.
    pub herm_h1: PadicMatrix,
    /// Whether (M, M) lands in O_E, equivalently whether M is stable under
    /// the alpha-action (W/2 integral).
    pub oe_valued: bool,
}

/// Solve { Tr(c) = psi(x, y), Tr(conj(alpha) c) = psi(x, alpha y) } for
/// c = <x, y> entrywise. With c = c0 + c1 alpha the system is
/// 2 c0 - c1 = psi(x, y) and -c0 + ((p+1)/2) c1 = psi(x, alpha y); its
/// determinant is the unit p. psi(x, alpha y) is half of psi(x, omega y),
/// and folding that 2 into the solution leaves every stored entry integral.
pub fn hermitian_lift(module: &SkewHermModule) -> Result<HermitianLift> {
    require_case(module.p(), CaseTag::Inert)?;
    let k = module.precision();
    let modulus = module.gram().modulus();
    let p_inv = crate::padic::inv_mod(module.p() % modulus, 2, k)
        .expect("odd p is a unit mod 2^k");
    let q = (module.p() + 1) / 4;

    let a = module.gram().clone();
    let b2 = module.gram().mul(module.omega());

    // c1 = (A + B2) / p, 2 c0 = (4 q A + B2) / p.
    let skew_c1 = a.add(&b2).scale(p_inv);
    let skew_two_c0 = a.scale((4 * q) % modulus).add(&b2).scale(p_inv);

    // Reconstruction: Tr(c) = 2 c0 - c1 must reproduce psi exactly.
    if skew_two_c0.sub(&skew_c1) != a {
        return Err(Error::Internal(
            "trace of the lifted form does not reproduce psi".into(),
        ));
    }
    // Skew-Hermitian symmetry: <y, x> = -conj(<x, y>).
    let expect_two_c0 = skew_c1.scale(2).sub(&skew_two_c0);
    if skew_two_c0.transpose() != expect_two_c0 || skew_c1.transpose() != skew_c1 {
        return Err(Error::Internal(
            "lifted form is not skew-Hermitian".into(),
        ));
    }

    // (x, y) = pi <x, y> with pi = 1 + 2 alpha:
    // coefficients (c0 - 2 q c1) + (2 c0 - c1) alpha.
    let herm_two_h0 = skew_two_c0.sub(&skew_c1.scale((4 * q) % modulus));
    let herm_h1 = a.clone();
    // Hermitian symmetry: (y, x) = conj((x, y)), i.e.
    // h0(y,x) = h0 - h1 and h1(y,x) = -h1.
    let expect_two_h0_t = herm_two_h0.sub(&herm_h1.scale(2));
    if herm_two_h0.transpose() != expect_two_h0_t || herm_h1.transpose() != herm_h1.neg() {
        return Err(Error::Internal("twisted form is not Hermitian".into()));
    }

    // O_E-invariance criterion: (M, M) in O_E iff W/2 is integral. Both
    // sides are computable; they must agree.
    let w_even = (0..module.rank())
        .all(|i| (0..module.rank()).all(|j| module.omega().get(i, j) % 2 == 0));
    let values_integral = (0..module.rank())
        .all(|i| (0..module.rank()).all(|j| herm_two_h0.get(i, j) % 2 == 0));
    if w_even != values_integral {
        return Err(Error::Internal(
            "O_E-invariance criterion disagrees with value integrality".into(),
        ));
    }

    Ok(HermitianLift {
        p: module.p(),
        precision: k,
        skew_two_c0,
        skew_c1,
        herm_two_h0,
        herm_h1,
        oe_valued: w_even,
    })
}

/// The complete isometry invariant shared by both classifiers:
/// r + s = rank/2, and the form class is present exactly when a free part
/// exists (r > 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantTriple {
    pub r: usize,
    pub s: usize,
    pub form_class: Option<crate::forms::SymFormClassF2>,
}

impl std::fmt::Display for InvariantTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.form_class {
            Some(c) => write!(f, "(r = {}, s = {}, {})", self.r, self.s, c),
            None => write!(f, "(r = {}, s = {}, no form)", self.r, self.s),
        }
    }
}

/// Brute-force isometry search: scan every invertible matrix P mod 2^k for
/// one with P W_1 = W_2 P and P^t G_2 P = G_1. Only usable for tiny ranks and
/// precisions (the loop is 2^(k m^2) candidates); serves as the independent
/// oracle for the invariant-based deciders.
pub fn isometric_by_exhaustion(m1: &SkewHermModule, m2: &SkewHermModule) -> bool {
    assert_eq!(m1.p(), m2.p());
    assert_eq!(m1.precision(), m2.precision());
    if m1.rank() != m2.rank() {
        return false;
    }
    let n = m1.rank();
    if n == 0 {
        return true;
    }
    let k = m1.precision();
    let cells = n * n;
    assert!(
        (k as usize) * cells <= 40,
        "exhaustive search is limited to tiny instances"
    );
    let modulus = pow_mod_u64(2, k);
    let total = modulus.pow(cells as u32);
    for code in 0..total {
        let mut c = code;
        let mut p = PadicMatrix::zero(2, k, n, n);
        for i in 0..n {
            for j in 0..n {
                p.set(i, j, c % modulus);
                c /= modulus;
            }
        }
        if p.inverse().is_none() {
            continue;
        }
        if p.mul(m1.omega()) == m2.omega().mul(&p)
            && p.transpose().mul(m2.gram()).mul(&p) == *m1.gram()
        {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmodule::{classify_module, ModuleShape};

    #[test]
    fn standard_modules_validate() {
        assert!(SkewHermModule::standard_l(7, 8).unwrap().validate().pass());
        assert!(SkewHermModule::standard_l0(3, 8).unwrap().validate().pass());
        assert!(SkewHermModule::standard_l1(3, 8).unwrap().validate().pass());
        assert!(SkewHermModule::standard_h(3, 8).unwrap().validate().pass());
        assert!(SkewHermModule::standard_h(11, 8).unwrap().validate().pass());
        assert!(SkewHermModule::standard_l(23, 8).unwrap().validate().pass());
    }

    #[test]
    fn l0_omega_action_matches_expected_columns() {
        let l0 = SkewHermModule::standard_l0(3, 8).unwrap();
        // omega * alpha = -2 alpha - (p+1)/2 = (-2, -2) at p = 3.
        assert_eq!(l0.omega().get(0, 1), 256 - 2);
        assert_eq!(l0.omega().get(1, 1), 256 - 2);
        assert_eq!(l0.omega().get(1, 0), 2);
    }

    #[test]
    fn h_pairing_values() {
        let h = SkewHermModule::standard_h(3, 8).unwrap();
        // psi(e1, e2) = 0 and psi(e1, omega e2) = 1 on basis positions 0, 2, 3.
        assert_eq!(h.gram().get(0, 2), 0);
        assert_eq!(h.gram().get(0, 3), 1);
        assert_eq!(h.gram().get(2, 1), 1); // psi(e2, omega e1) = 1
        assert_eq!(h.gram().get(1, 2), 256 - 1); // psi(omega e1, e2) = -1
    }

    #[test]
    fn h_underlying_module_is_free_of_rank_two() {
        let h = SkewHermModule::standard_h(3, 8).unwrap();
        assert_eq!(
            classify_module(&h.underlying_module()).unwrap(),
            ModuleShape::Inert { r: 2, s: 0 }
        );
    }

    #[test]
    fn diagonal_unit_fails_alternating() {
        let w = SkewHermModule::standard_l1(3, 8).unwrap().omega().clone();
        let g = PadicMatrix::from_rows(2, 8, &[vec![1, 1], vec![-1, 0]]);
        let report = validate(3, &w, &g);
        assert_eq!(report.alternating, Err((0, 0)));
        assert!(!report.pass());
    }

    #[test]
    fn wrong_eigenvalue_fails_adjunction() {
        // W = diag(2a1, 2a1) pairs the wrong eigenvalues against the
        // symplectic Gram: the adjunction must fail.
        let roots = hensel_roots(7, 8).unwrap();
        let w = PadicMatrix::from_rows(
            2,
            8,
            &[
                vec![(2 * roots.alpha1) as i64, 0],
                vec![0, (2 * roots.alpha1) as i64],
            ],
        );
        let g = PadicMatrix::from_rows(2, 8, &[vec![0, 1], vec![-1, 0]]);
        let report = validate(7, &w, &g);
        assert!(report.alternating.is_ok());
        assert!(report.adjunction.is_err());
    }

    #[test]
    fn direct_sum_with_zero_module_is_identity() {
        let l = SkewHermModule::standard_l(7, 8).unwrap();
        let z = SkewHermModule::zero_module(7, 8).unwrap();
        assert_eq!(l.direct_sum(&z).unwrap(), l);
        assert_eq!(z.direct_sum(&l).unwrap(), l);
    }

    #[test]
    fn change_basis_by_identity_is_identity() {
        let h = SkewHermModule::standard_h(3, 8).unwrap();
        let id = PadicMatrix::identity(2, 8, 4);
        assert_eq!(h.change_basis(&id).unwrap(), h);
    }

    #[test]
    fn disguises_validate_and_are_seed_deterministic() {
        let l = SkewHermModule::standard_l(7, 8).unwrap();
        for seed in 0..50 {
            let d = l.disguise(seed);
            assert!(d.validate().pass());
            assert_eq!(d, l.disguise(seed));
        }
        assert_ne!(l.disguise(1), l.disguise(2));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let h = SkewHermModule::standard_h(3, 8).unwrap().disguise(99);
        let text = h.to_json();
        let back = SkewHermModule::from_json(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(SkewHermModule::from_json("{").is_err());
        // Truncated rank: gram rows missing.
        let bad = r#"{"p":7,"precision":8,"rank":2,"omega_action":[[0,0],[0,0]],"gram":[[0,1]]}"#;
        assert!(SkewHermModule::from_json(bad).is_err());
        // Entry out of range.
        let big = r#"{"p":7,"precision":3,"rank":1,"omega_action":[[9]],"gram":[[1]]}"#;
        assert!(SkewHermModule::from_json(big).is_err());
    }

    #[test]
    fn hermitian_lift_reconstructs_psi() {
        for module in [
            SkewHermModule::standard_l0(3, 8).unwrap(),
            SkewHermModule::standard_l1(3, 8).unwrap(),
            SkewHermModule::standard_h(3, 8).unwrap(),
            SkewHermModule::standard_h(3, 8).unwrap().disguise(5),
            SkewHermModule::standard_l0(11, 6).unwrap(),
        ] {
            let lift = hermitian_lift(&module).unwrap();
            // Tr . lift = psi is asserted internally; re-check one entry
            // shape here: herm_h1 is exactly the Gram.
            assert_eq!(&lift.herm_h1, module.gram());
        }
    }

    #[test]
    fn l0_is_oe_valued_but_l1_is_not() {
        let l0 = SkewHermModule::standard_l0(3, 8).unwrap();
        assert!(hermitian_lift(&l0).unwrap().oe_valued);
        let l1 = SkewHermModule::standard_l1(3, 8).unwrap();
        assert!(!hermitian_lift(&l1).unwrap().oe_valued);
        let h = SkewHermModule::standard_h(3, 8).unwrap();
        assert!(!hermitian_lift(&h).unwrap().oe_valued);
    }

    #[test]
    fn hermitian_lift_rejects_split_case() {
        let l = SkewHermModule::standard_l(7, 8).unwrap();
        assert!(matches!(
            hermitian_lift(&l),
            Err(Error::WrongCase { .. })
        ));
    }

    #[test]
    fn lift_values_lie_in_half_r() {
        // 2<x,y> must lie in R: its alpha-coefficient 2*c1 is even by
        // construction, and c1 itself is integral; check c1 parity varies
        // (L_1 really uses the half denominators).
        let l1 = SkewHermModule::standard_l1(3, 8).unwrap();
        let lift = hermitian_lift(&l1).unwrap();
        // psi(1, omega 1) = 1 is odd, so <1, 1> has a genuine half part.
        assert_eq!(lift.skew_two_c0.get(0, 0) % 2, 1);
        // On L_0 every value is integral: psi(x, omega y) is always even.
        let l0 = SkewHermModule::standard_l0(3, 8).unwrap();
        let lift0 = hermitian_lift(&l0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(lift0.skew_two_c0.get(i, j) % 2, 0);
            }
        }
    }
}
