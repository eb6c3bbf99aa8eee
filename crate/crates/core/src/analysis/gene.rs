use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::instance::factor_all;
use super::torsion::residue_instance;
use super::{
    all_passed, apply_monomial_map, extend_s, matrix_from_coords, point_pow, torsion_reduce, AnalysisError, Check,
    Diagnostic, DiagnosticCode, ProblemInstance,
};
use crate::group::{power_index_in, solve_in_generators, GroupBasis};
use crate::laurent::{exact_divide, LaurentPoly};
use crate::lattice::IntMatrix;
use crate::power_sum::{divide, PowerSum};

/// A torus `G0 = G_m^{r0}` with maps `φ_P: G1 → G0`, `ψ_Q: G2 → G0` and a
/// divisor `E = {F0 = 0}` such that `φ_P(g1ʰ) = ψ_Q(g2ʰ)`, `D1 ⊂ φ*E`, `ψ*E ⊂ D2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneCertificate {
    pub r0: usize,
    #[serde(rename = "P")]
    pub p: IntMatrix,
    #[serde(rename = "Q")]
    pub q: IntMatrix,
    #[serde(rename = "F0")]
    pub f0: LaurentPoly,
    pub h: u64,
    pub q_lcm: u64,
    /// Torsion order of the coordinates; `P`, `Q` are exponents of `g1ᵏ`, `g2ᵏ`.
    pub k: u8,
    /// `F1` after dividing by the monomial that makes `f1` reduced.
    pub f1_reduced: LaurentPoly,
    /// Whether `f2 / f1` is itself a power sum.
    pub symbolic_quotient: bool,
    pub verification: Vec<Check>,
}

impl GeneCertificate {
    pub fn verified(&self) -> bool {
        all_passed(&self.verification)
    }

    /// The three conclusion conditions, replayed from scratch.
    pub fn verify(&self, inst: &ProblemInstance) -> Vec<Check> {
        let h = self.h as i64;
        let a = apply_monomial_map(&self.p, &point_pow(&inst.g1, h));
        let b = apply_monomial_map(&self.q, &point_pow(&inst.g2, h));
        let mut out = vec![Check::new("points_agree", a == b, format!("h = {}", self.h))];
        let pulled1 = self.f0.monomial_substitute(&self.p);
        let pulled2 = self.f0.monomial_substitute(&self.q);
        let divides = |num: &LaurentPoly, den: &LaurentPoly| matches!(exact_divide(num, den), Ok(Some(_)));
        match (pulled1, pulled2) {
            (Ok(e1), Ok(e2)) => {
                out.push(Check::new("D1_in_phi_pullback", divides(&e1, &inst.f1), format!("F0 o phi = {e1}")));
                out.push(Check::new("psi_pullback_in_D2", divides(&inst.f2, &e2), format!("F0 o psi = {e2}")));
            }
            _ => {
                out.push(Check::new("D1_in_phi_pullback", false, "dimension mismatch"));
                out.push(Check::new("psi_pullback_in_D2", false, "dimension mismatch"));
            }
        }
        out
    }
}

fn first_support(f: &LaurentPoly) -> Vec<i64> {
    let zero = vec![0; f.dim()];
    if !f.coeff(&zero).is_zero() {
        zero
    } else {
        f.support()[0].clone()
    }
}

/// Builds the intermediate torus from the group generated by the roots of
/// `f1` raised to the least common power index `q` inside the roots of `f2`.
pub fn certify_gene(inst: &ProblemInstance) -> Result<Result<GeneCertificate, Diagnostic>, AnalysisError> {
    let (inst, _) = extend_s(inst)?;
    let k = torsion_reduce(&inst)?.k;
    let res = residue_instance(&inst, k, 0);
    let (c1, c2) = (factor_all(&res.g1)?, factor_all(&res.g2)?);
    let solve_fail = |m: String| Ok(Err(Diagnostic::new(DiagnosticCode::SolveFail, m)));
    let (Ok(b1), Ok(b2)) = (GroupBasis::from_independent(c1.clone()), GroupBasis::from_independent(c2.clone())) else {
        return solve_fail("point coordinates are multiplicatively dependent".into());
    };
    let f1_reduced = res.f1.reduce_at(&first_support(&res.f1))?;
    let f1 = PowerSum::from_laurent(&f1_reduced, &b1).map_err(|e| AnalysisError::Input(e.to_string()))?;
    let f2 = PowerSum::from_laurent(&res.f2, &b2).map_err(|e| AnalysisError::Input(e.to_string()))?;
    let ps = |e: crate::power_sum::PowerSumError| AnalysisError::Input(e.to_string());
    let roots2 = f2.roots_group().map_err(ps)?;
    let mut q = BigInt::one();
    for gamma in f1.factored_roots().map_err(ps)? {
        match power_index_in(&gamma, &roots2) {
            Some(d) => q = q.lcm(&d),
            None => {
                return Ok(Err(Diagnostic::new(
                    DiagnosticCode::IndexInfinite,
                    format!("no power of the root {gamma} of f1 lies in the group of roots of f2"),
                )))
            }
        }
    }
    let Some(q_lcm) = q.to_u64() else {
        return Ok(Err(Diagnostic::new(DiagnosticCode::IndexInfinite, format!("index {q} exceeds 64 bits"))));
    };
    let gamma = f1.roots_group().map_err(ps)?;
    let qi = q_lcm as i64;
    let deltas: Vec<_> = gamma.basis().iter().map(|g| g.pow(qi)).collect();
    let r0 = deltas.len();
    let delta_basis = GroupBasis::from_independent(deltas.clone()).map_err(|e| AnalysisError::Input(e.to_string()))?;
    let mut p_rows = Vec::with_capacity(r0);
    let mut q_rows = Vec::with_capacity(r0);
    for d in &deltas {
        let (Some(p), Some(q)) = (solve_in_generators(d, &c1), solve_in_generators(d, &c2)) else {
            return solve_fail(format!("{d} is not a monomial in both points"));
        };
        p_rows.push(p);
        q_rows.push(q);
    }
    let p = matrix_from_coords(p_rows, inst.d1());
    let qm = matrix_from_coords(q_rows, inst.d2());
    let f0 = f1.subsample(q_lcm, 0).to_laurent(&delta_basis).map_err(ps)?;
    let h = (1..=k as u64)
        .find(|&h| {
            let h = h as i64;
            apply_monomial_map(&p, &point_pow(&inst.g1, h)) == apply_monomial_map(&qm, &point_pow(&inst.g2, h))
        })
        .unwrap_or(k as u64);
    let symbolic_quotient = matches!(divide(&f2, &f1), Ok(Some(_)));
    let mut cert = GeneCertificate {
        r0,
        p,
        q: qm,
        f0,
        h,
        q_lcm,
        k,
        f1_reduced,
        symbolic_quotient,
        verification: Vec::new(),
    };
    cert.verification = cert.verify(&inst);
    if !cert.verified() {
        let failed = cert.verification.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        return Ok(Err(Diagnostic::new(DiagnosticCode::VerifyFail, "conclusion conditions do not all hold")
            .with_failed(failed)
            .with_context(&cert)));
    }
    Ok(Ok(cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gene(i: &ProblemInstance) -> GeneCertificate {
        match certify_gene(i).unwrap() {
            Ok(c) => c,
            Err(d) => panic!("{d}"),
        }
    }

    fn t_minus_1() -> LaurentPoly {
        LaurentPoly::parse("X1 - 1", 1).unwrap()
    }

    #[test]
    fn example_es2() {
        let c = gene(&ProblemInstance::example_es2());
        assert_eq!(c.r0, 1);
        assert_eq!(c.p, IntMatrix::from_i64(&[&[1]]));
        assert_eq!(c.q, IntMatrix::from_i64(&[&[1, 0]]));
        assert_eq!(c.f0, t_minus_1());
        assert_eq!((c.h, c.q_lcm), (1, 1));
        assert_eq!(c.verification.len(), 3);
        assert!(c.symbolic_quotient);
    }

    #[test]
    fn example_es3() {
        let c = gene(&ProblemInstance::example_es3());
        assert_eq!(c.p, IntMatrix::from_i64(&[&[1]]));
        assert_eq!(c.q, IntMatrix::from_i64(&[&[2]]));
        assert_eq!(c.f0, t_minus_1());
        assert!(c.verified());
    }

    #[test]
    fn example_es_needs_h_two() {
        let c = gene(&ProblemInstance::example_es());
        assert_eq!((c.h, c.k), (2, 2));
        assert_eq!(c.p, IntMatrix::from_i64(&[&[1]]));
        assert_eq!(c.q, IntMatrix::from_i64(&[&[1]]));
        assert_eq!(c.f0, t_minus_1());
        let mut h1 = c.clone();
        h1.h = 1;
        let checks = h1.verify(&ProblemInstance::example_es());
        assert!(!checks[0].passed);
    }

    #[test]
    fn infinite_index() {
        let i = ProblemInstance::from_strs(&[2, 3], &["2"], &["3"], "X1 - 1", "X1 - 1").unwrap();
        assert_eq!(certify_gene(&i).unwrap().unwrap_err().code, DiagnosticCode::IndexInfinite);
    }

    #[test]
    fn nontrivial_index() {
        // roots of f1 = 8ⁿ − 1 reach ⟨roots of 4ⁿ − 1⟩ only after squaring
        let i = ProblemInstance::from_strs(&[2], &["8"], &["4"], "X1 - 1", "X1^3 - 1").unwrap();
        let c = gene(&i);
        assert_eq!(c.q_lcm, 2);
        assert_eq!(c.f0, t_minus_1());
        assert_eq!(c.p, IntMatrix::from_i64(&[&[2]]));
        assert_eq!(c.q, IntMatrix::from_i64(&[&[3]]));
        assert!(c.verified());
    }

    #[test]
    fn failing_condition_is_named() {
        let i = ProblemInstance::from_strs(&[2], &["2"], &["4"], "X1 - 1", "X1 + 3").unwrap();
        let d = certify_gene(&i).unwrap().unwrap_err();
        assert_eq!(d.code, DiagnosticCode::VerifyFail);
        assert_eq!(d.failed, vec!["psi_pullback_in_D2"]);
        assert!(d.context.is_some());
    }
}
