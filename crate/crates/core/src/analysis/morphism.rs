use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::instance::factor_all;
use super::{
    apply_monomial_map, extend_s, hypothesis_check, ideal_inclusion_at, matrix_from_coords, point_pow, residue_evidence,
    scan_ideal_inclusion, torsion_reduce, AnalysisError, Check, Diagnostic, DiagnosticCode, ProblemInstance,
};
use crate::arith::PrimeSet;
use crate::group::{express, group_basis};
use crate::laurent::{exact_divide, LaurentPoly};
use crate::lattice::{rank, IntMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismOptions {
    /// Evidence window `[1, n_max]`; 0 skips the numeric gate.
    pub n_max: u64,
    /// Minimal hit fraction within a residue class.
    pub threshold: f64,
    /// Number of `n` at which the implied divisibility is replayed.
    pub replay: u64,
}

impl Default for MorphismOptions {
    fn default() -> Self {
        Self {
            n_max: 50,
            threshold: 0.8,
            replay: 12,
        }
    }
}

/// `φ_A(g1ʰ) = g2ʰ` with `F1 | F2 ∘ φ_A` on residue `residue` modulo `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismCertificate {
    pub a: IntMatrix,
    pub h: u64,
    pub quotient: LaurentPoly,
    pub residue: u8,
    pub k: u8,
    pub etale: bool,
    pub s_primes: PrimeSet,
    /// Exponents of the coordinates of `g1ᵏ`, `g2ᵏ` in the common basis.
    pub m1: IntMatrix,
    pub m2: IntMatrix,
    pub verification: Vec<Check>,
}

impl MorphismCertificate {
    pub fn verified(&self) -> bool {
        super::all_passed(&self.verification)
    }

    /// Replays every invariant against `inst` (already S-extended).
    pub fn verify(&self, inst: &ProblemInstance, replay: u64) -> Vec<Check> {
        let mut out = Vec::new();
        let (d1, d2) = (inst.d1(), inst.d2());
        let shape = self.a.rows() == d2 && self.a.cols() == d1;
        out.push(Check::new("shape", shape, format!("{}x{}", self.a.rows(), self.a.cols())));
        if !shape {
            return out;
        }
        let h = self.h as i64;
        let lhs = apply_monomial_map(&self.a, &point_pow(&inst.g1, h));
        out.push(Check::new("point_relation", lhs == point_pow(&inst.g2, h), format!("h = {}", self.h)));

        let r = self.residue as i64;
        let k = self.k as i64;
        let f1 = inst.f1.scale_variables(&point_pow(&inst.g1, r)).expect("dimension checked");
        let f2 = inst.f2.scale_variables(&point_pow(&inst.g2, r)).expect("dimension checked");
        let lhs_k = apply_monomial_map(&self.a, &point_pow(&inst.g1, k));
        out.push(Check::new("residue_point_relation", lhs_k == point_pow(&inst.g2, k), ""));
        let pulled = f2.monomial_substitute(&self.a).expect("dimension checked");
        out.push(Check::new(
            "quotient_identity",
            &f1 * &self.quotient == pulled,
            format!("F1 * ({}) = F2 o phi_A", self.quotient),
        ));
        let s_integral = self.quotient.terms().all(|(_, c)| inst.s.strip(c.denom().magnitude()).is_one());
        out.push(Check::new("quotient_s_integral", s_integral, ""));
        let etale = self.a.is_square() && !self.a.det().is_zero();
        out.push(Check::new("etale_flag", etale == self.etale, ""));
        let mut bad = Vec::new();
        for m in 1..=replay {
            let n = (k as u64) * m + self.residue as u64;
            if !matches!(ideal_inclusion_at(inst, n), Ok(true)) {
                bad.push(n);
            }
        }
        out.push(Check::new(
            "replayed_divisibility",
            bad.is_empty(),
            if bad.is_empty() {
                format!("{replay} values")
            } else {
                format!("fails at n = {bad:?}")
            },
        ));
        out
    }
}

fn refuse(code: DiagnosticCode, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, message)
}

fn attempt(inst: &ProblemInstance, res: &ProblemInstance, k: u8, r: u8, replay: u64) -> Result<Result<MorphismCertificate, Diagnostic>, AnalysisError> {
    let c1 = factor_all(&res.g1)?;
    let c2 = factor_all(&res.g2)?;
    let all: Vec<_> = c1.iter().chain(&c2).cloned().collect();
    let u = group_basis(&all);
    if u.torsion_order() != 1 {
        return Ok(Err(refuse(DiagnosticCode::Torsion, "torsion survives the reduction")));
    }
    let coords = |cs: &[_]| -> Vec<Vec<BigInt>> { cs.iter().map(|c| express(c, &u).expect("generator lies in its group")).collect() };
    let m1 = matrix_from_coords(coords(&c1), u.rank());
    let m2 = matrix_from_coords(coords(&c2), u.rank());
    let g1 = res.f1.monomial_substitute(&m1)?;
    let g2 = res.f2.monomial_substitute(&m2)?;
    if exact_divide(&g2, &g1)?.is_none() {
        return Ok(Err(refuse(
            DiagnosticCode::NoSymbolicQuotient,
            format!("residue {r}: f2 / f1 is not a power sum; numeric-only evidence, no certificate"),
        )));
    }
    if m1.rows() != u.rank() || rank(&m1) != u.rank() {
        return Ok(Err(refuse(
            DiagnosticCode::RankDefect,
            format!("residue {r}: g1 spans rank {} of a rank {} group", rank(&m1), u.rank()),
        )));
    }
    let Some(m1_inv) = m1.inverse_unimodular() else {
        return Ok(Err(refuse(
            DiagnosticCode::NotUnimodular,
            format!("residue {r}: coordinates of g1 have index {} in the group", m1.det().abs()),
        )));
    };
    let a = m2.mul(&m1_inv);
    let h = (1..=k as u64)
        .find(|&h| apply_monomial_map(&a, &point_pow(&inst.g1, h as i64)) == point_pow(&inst.g2, h as i64))
        .unwrap_or(k as u64);
    let pulled = res.f2.monomial_substitute(&a)?;
    let Some(quotient) = exact_divide(&pulled, &res.f1)? else {
        return Ok(Err(refuse(DiagnosticCode::VerifyFail, format!("residue {r}: F1 does not divide F2 o phi_A"))));
    };
    let mut cert = MorphismCertificate {
        etale: a.is_square() && !a.det().is_zero(),
        a,
        h,
        quotient,
        residue: r,
        k,
        s_primes: inst.s.clone(),
        m1,
        m2,
        verification: Vec::new(),
    };
    cert.verification = cert.verify(inst, replay);
    if !cert.verified() {
        let failed = cert.verification.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        return Ok(Err(refuse(DiagnosticCode::VerifyFail, format!("residue {r}: certificate does not replay"))
            .with_failed(failed)
            .with_context(&cert)));
    }
    Ok(Ok(cert))
}

/// Reconstructs a monomial map `φ` with `φ(g1ʰ) = g2ʰ` and `D1 ⊂ φ*D2` from an
/// identity of power sums, trying each residue class modulo the torsion order.
pub fn certify_morphism(inst: &ProblemInstance, opts: &MorphismOptions) -> Result<Result<MorphismCertificate, Diagnostic>, AnalysisError> {
    let (inst, _) = extend_s(inst)?;
    let report = hypothesis_check(&inst)?;
    if !report.passed {
        return Ok(Err(refuse(DiagnosticCode::Hypothesis, "hypotheses fail")
            .with_failed(report.failures())
            .with_context(&report)));
    }
    let red = torsion_reduce(&inst)?;
    let evidence = if opts.n_max > 0 {
        let hits = scan_ideal_inclusion(&inst, opts.n_max)?;
        Some(residue_evidence(&hits, opts.n_max, red.k as u64))
    } else {
        None
    };
    let mut refusals = Vec::new();
    for (r, res) in red.residues.iter().enumerate() {
        if let Some(ev) = &evidence {
            if ev[r] < opts.threshold {
                refusals.push(refuse(
                    DiagnosticCode::InsufficientEvidence,
                    format!("residue {r}: hit fraction {:.3} below {}", ev[r], opts.threshold),
                ));
                continue;
            }
        }
        match attempt(&inst, res, red.k, r as u8, opts.replay)? {
            Ok(cert) => return Ok(Ok(cert)),
            Err(d) => refusals.push(d),
        }
    }
    let pick = refusals
        .iter()
        .find(|d| d.code != DiagnosticCode::InsufficientEvidence)
        .unwrap_or(&refusals[0])
        .clone();
    let all: Vec<String> = refusals.iter().map(ToString::to_string).collect();
    Ok(Err(if pick.context.is_some() { pick } else { pick.with_context(all) }))
}
