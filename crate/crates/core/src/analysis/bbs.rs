use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::instance::factor_all;
use super::{
    apply_monomial_map, extend_s, point_pow, scan_support_inclusion, unity_points_scan, AnalysisError, Check, Diagnostic,
    DiagnosticCode, ProblemInstance,
};
use crate::arith::{FactorConfig, FactorError, Factorization, Factorizer, PrimeSet};
use crate::group::{express, power_index, solve_in_generators, GroupBasis};
use crate::lattice::IntMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbsOptions {
    pub n_min: u64,
    pub n_max: u64,
    /// Fraction of `n ∈ [n_min, n_max]` that must show support inclusion.
    pub threshold: f64,
    /// Torsion points of `D2` are searched up to this order.
    pub unity_order: u64,
}

impl Default for BbsOptions {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 50,
            threshold: 1.0,
            unity_order: 6,
        }
    }
}

/// `g2ʰ = φ_A(g1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbsCertificate {
    pub h: u64,
    pub a: IntMatrix,
    pub evidence: f64,
    pub verification: Vec<Check>,
}

impl BbsCertificate {
    pub fn verified(&self) -> bool {
        super::all_passed(&self.verification)
    }
}

/// From support inclusion along the orbits, concludes that a power of `g2`
/// is a monomial in `g1`.
pub fn bbs_conclusion(inst: &ProblemInstance, opts: &BbsOptions) -> Result<Result<BbsCertificate, Diagnostic>, AnalysisError> {
    if opts.n_min < 1 || opts.n_min > opts.n_max {
        return Err(AnalysisError::Input(format!("empty evidence window [{}, {}]", opts.n_min, opts.n_max)));
    }
    let (inst, _) = extend_s(inst)?;
    let mut checks = Vec::new();
    let origin = inst.f1.evaluate(&vec![BigRational::one(); inst.d1()])?.is_zero();
    checks.push(Check::new("D1_contains_origin", origin, ""));
    if !origin {
        return Ok(Err(Diagnostic::new(DiagnosticCode::Hypothesis, "F1 does not vanish at the identity")
            .with_failed(vec!["D1_contains_origin".into()])));
    }
    let unity = unity_points_scan(&inst.f2, opts.unity_order)?;
    let detail = format!("{} torsion points of order dividing {}", unity.points.len(), opts.unity_order);
    checks.push(Check::new("D2_no_torsion_family", !unity.has_family(), detail));
    if unity.has_family() {
        return Ok(Err(Diagnostic::new(DiagnosticCode::Hypothesis, "D2 contains a torsion translate of a subtorus")
            .with_failed(vec!["D2_no_torsion_family".into()])
            .with_context(&unity)));
    }

    let hits = scan_support_inclusion(&inst, opts.n_max)?;
    let window = opts.n_max - opts.n_min + 1;
    let evidence = hits.iter().filter(|&&n| n >= opts.n_min).count() as f64 / window as f64;
    checks.push(Check::new(
        "support_evidence",
        evidence >= opts.threshold,
        format!("{evidence:.3} of n in [{}, {}]", opts.n_min, opts.n_max),
    ));

    let c1 = factor_all(&inst.g1)?;
    let c2 = factor_all(&inst.g2)?;
    let mut h = BigInt::one();
    for (i, y) in c2.iter().enumerate() {
        match power_index(y, &c1) {
            Some(d) => h = h.lcm(&d),
            None => {
                return Ok(Err(Diagnostic::new(
                    DiagnosticCode::MembershipFail,
                    format!(
                        "no power of coordinate {} of g2 ({y}) is a monomial in g1; support evidence {evidence:.3} contradicts the expected conclusion",
                        i + 1
                    ),
                )))
            }
        }
    }
    if evidence < opts.threshold {
        return Ok(Err(Diagnostic::new(
            DiagnosticCode::InsufficientEvidence,
            format!("support inclusion at {evidence:.3} of the window, threshold {}", opts.threshold),
        )));
    }
    let h = h.to_u64().ok_or_else(|| AnalysisError::Input(format!("index {h} exceeds 64 bits")))?;
    let mut rows = Vec::with_capacity(c2.len());
    for y in &c2 {
        match solve_in_generators(&y.pow(h as i64), &c1) {
            Some(v) => rows.push(v),
            None => return Ok(Err(Diagnostic::new(DiagnosticCode::SolveFail, format!("{y}^{h} has no exponent vector")))),
        }
    }
    let a = IntMatrix::from_rows_with_cols(rows, inst.d1());
    let relation = apply_monomial_map(&a, &inst.g1) == point_pow(&inst.g2, h as i64);
    checks.push(Check::new("power_relation", relation, format!("g2^{h} = phi_A(g1)")));
    let cert = BbsCertificate {
        h,
        a,
        evidence,
        verification: checks,
    };
    if !cert.verified() {
        return Ok(Err(Diagnostic::new(DiagnosticCode::VerifyFail, "certificate does not replay").with_context(&cert)));
    }
    Ok(Ok(cert))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub n: u64,
    /// A prime dividing `xⁿ − 1` but not `yⁿ − 1`.
    pub prime: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationFailure {
    pub n: u64,
    /// `"x^n - 1"` or `"y^n - 1"`.
    pub value: String,
    pub cofactor: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErdosReport {
    pub x: u64,
    pub y: u64,
    pub n_max: u64,
    /// Largest `N` such that both sides are fully factored and inclusion holds for all `n ≤ N`.
    pub verified_up_to: u64,
    pub violation: Option<Violation>,
    pub factorization_failure: Option<FactorizationFailure>,
    /// The gcd-based radical scan reaches the same verdicts on `[1, verified_up_to]`.
    pub radical_scan_agrees: bool,
    /// `y = xᵏ`, when every `n ≤ n_max` verified.
    pub k: Option<u64>,
}

impl ErdosReport {
    pub fn inclusion_holds(&self) -> bool {
        self.violation.is_none() && self.factorization_failure.is_none()
    }
}

/// `x = bᵉ` with `b` not a perfect power.
fn power_base(x: u64) -> (u64, u64) {
    for e in (2..=63u32).rev() {
        let r = (x as f64).powf(1.0 / e as f64).round() as u64;
        for b in r.saturating_sub(1).max(2)..=r + 1 {
            if b.checked_pow(e) == Some(x) {
                let (bb, ee) = power_base(b);
                return (bb, ee * e as u64);
            }
        }
    }
    (x, 1)
}

fn mobius(mut n: u64) -> i8 {
    let mut mu = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// `Φ_d(b) = Π_{e | d} (bᵉ − 1)^{μ(d/e)}`.
pub(crate) fn cyclotomic_value(b: u64, d: u64) -> BigUint {
    let (mut num, mut den) = (BigUint::one(), BigUint::one());
    for e in (1..=d).filter(|e| d % e == 0) {
        let v = BigUint::from(b).pow(e as u32) - BigUint::one();
        match mobius(d / e) {
            1 => num *= v,
            -1 => den *= v,
            _ => {}
        }
    }
    num / den
}

/// Factors `bᵐ − 1` through its cyclotomic parts, caching each `Φ_d(b)`.
struct CyclotomicFactorer {
    factorizer: Factorizer,
    cache: BTreeMap<(u64, u64), Factorization>,
}

impl CyclotomicFactorer {
    fn factor(&mut self, b: u64, m: u64) -> Result<Factorization, FactorError> {
        let mut out = Factorization::new();
        for d in (1..=m).filter(|d| m % d == 0) {
            if !self.cache.contains_key(&(b, d)) {
                let f = self.factorizer.factor_natural(&cyclotomic_value(b, d), &[])?;
                self.cache.insert((b, d), f);
            }
            for (p, e) in &self.cache[&(b, d)] {
                *out.entry(p.clone()).or_default() += e;
            }
        }
        Ok(out)
    }
}

/// For `x, y ≥ 2`: whether every prime dividing `xⁿ − 1` divides `yⁿ − 1` for
/// all `n ≤ n_max`, by complete factorization, and if so whether `y` is a power of `x`.
/// Primes are taken over `Z`, so `S` is empty.
pub fn erdos(x: u64, y: u64, n_max: u64, config: &FactorConfig) -> Result<ErdosReport, AnalysisError> {
    if x < 2 || y < 2 {
        return Err(AnalysisError::Input("x and y must be at least 2".into()));
    }
    let ((bx, ex), (by, ey)) = (power_base(x), power_base(y));
    let mut factorer = CyclotomicFactorer {
        factorizer: Factorizer::new(config.clone()),
        cache: BTreeMap::new(),
    };
    let mut report = ErdosReport {
        x,
        y,
        n_max,
        verified_up_to: 0,
        violation: None,
        factorization_failure: None,
        radical_scan_agrees: true,
        k: None,
    };
    for n in 1..=n_max {
        let fail = |value: &str, e: FactorError| FactorizationFailure {
            n,
            value: value.into(),
            cofactor: e.cofactor().map(ToString::to_string).unwrap_or_default(),
        };
        let fa = match factorer.factor(bx, ex * n) {
            Ok(f) => f,
            Err(e) => {
                report.factorization_failure = Some(fail("x^n - 1", e));
                break;
            }
        };
        let fb = match factorer.factor(by, ey * n) {
            Ok(f) => f,
            Err(e) => {
                report.factorization_failure = Some(fail("y^n - 1", e));
                break;
            }
        };
        if let Some(p) = fa.keys().find(|p| !fb.contains_key(*p)) {
            report.violation = Some(Violation { n, prime: p.to_string() });
            break;
        }
        report.verified_up_to = n;
    }

    let inst = ProblemInstance::new(
        PrimeSet::empty(),
        vec![BigRational::from_integer(x.into())],
        vec![BigRational::from_integer(y.into())],
        crate::laurent::LaurentPoly::parse("X1 - 1", 1)?,
        crate::laurent::LaurentPoly::parse("X1 - 1", 1)?,
    )?;
    let upto = report.violation.as_ref().map_or(report.verified_up_to, |v| v.n);
    let hits = scan_support_inclusion(&inst, upto)?;
    let expected: Vec<u64> = (1..=report.verified_up_to).collect();
    report.radical_scan_agrees = hits == expected;
    if report.inclusion_holds() {
        let xs = factor_all(&[BigRational::from_integer(x.into())])?;
        let ys = factor_all(&[BigRational::from_integer(y.into())])?;
        let basis = GroupBasis::from_independent(xs).map_err(|e| AnalysisError::Input(e.to_string()))?;
        report.k = express(&ys[0], &basis).and_then(|v| v[0].to_u64());
    }
    Ok(report)
}
