use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Check, ProblemInstance};
use crate::arith::Factorizer;
use crate::group::is_independent;
use crate::laurent::{exact_divide, stabilizer, LaurentPoly, StabilizerInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub poly: String,
    pub stabilizer: StabilizerInfo,
    pub finite_stabilizer: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub components1: Vec<ComponentReport>,
    pub components2: Vec<ComponentReport>,
    pub stabilizer_d2: StabilizerInfo,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl HypothesisReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }
}

/// Rational roots of a univariate polynomial with nonzero constant term,
/// or `None` when the coefficients are too large to enumerate divisors.
fn rational_roots(p: &LaurentPoly) -> Option<Vec<BigRational>> {
    let lcm = p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let lead = p.terms().next_back()?.1 * BigRational::from_integer(lcm.clone());
    let konst = p.coeff(&[0]) * BigRational::from_integer(lcm);
    let limit = BigUint::from(10u64).pow(15);
    let (a0, an) = (konst.numer().magnitude().clone(), lead.numer().magnitude().clone());
    if a0.is_zero() || a0 > limit || an > limit {
        return None;
    }
    let divisors = |n: &BigUint| -> Option<Vec<BigInt>> {
        let f = Factorizer::default().factor_natural(n, &[]).ok()?;
        let mut ds = vec![BigInt::one()];
        for (pr, &e) in &f {
            let mut next = Vec::new();
            for d in &ds {
                let mut pp = BigInt::one();
                for _ in 0..=e {
                    next.push(d * &pp);
                    pp *= BigInt::from(pr.clone());
                }
            }
            ds = next;
            if ds.len() > 20_000 {
                return None;
            }
        }
        Some(ds)
    };
    let (num_d, den_d) = (divisors(&a0)?, divisors(&an)?);
    let mut roots = Vec::new();
    for a in &num_d {
        for b in &den_d {
            for sgn in [1, -1] {
                let x = BigRational::new(a * sgn, b.clone());
                if !roots.contains(&x) && p.evaluate(std::slice::from_ref(&x)).ok()?.is_zero() {
                    roots.push(x);
                }
            }
        }
    }
    Some(roots)
}

/// Cheap reducibility witness: a univariate polynomial of degree ≥ 2 with a rational root.
pub(crate) fn visibly_reducible(f: &LaurentPoly) -> bool {
    if f.dim() != 1 {
        return false;
    }
    let (_, p) = f.strip_monomial();
    let deg = p.terms().map(|(e, _)| e[0]).max().unwrap_or(0);
    deg >= 2 && rational_roots(&p).is_some_and(|r| !r.is_empty())
}

fn component_checks(name: &str, f: &LaurentPoly, comps: &Option<Vec<LaurentPoly>>, checks: &mut Vec<Check>) -> Result<(), AnalysisError> {
    let Some(cs) = comps else {
        if visibly_reducible(f) {
            return Err(AnalysisError::Instance(format!(
                "{name} = {f} is reducible; supply its irreducible components"
            )));
        }
        return Ok(());
    };
    let nonconstant = cs.iter().all(|c| !c.is_unit());
    checks.push(Check::new(&format!("{name}_components_nonconstant"), nonconstant, ""));
    let product = cs.iter().fold(LaurentPoly::one(f.dim()), |acc, c| &acc * c);
    let matches = matches!(exact_divide(f, &product), Ok(Some(q)) if q.is_unit());
    checks.push(Check::new(
        &format!("{name}_components_multiply_to_{name}"),
        matches,
        format!("product {product}"),
    ));
    let mut distinct = true;
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            if cs[i].is_associate(&cs[j]) {
                distinct = false;
            }
        }
    }
    checks.push(Check::new(&format!("{name}_components_pairwise_distinct"), distinct, ""));
    Ok(())
}

fn report(cs: &[LaurentPoly]) -> Result<Vec<ComponentReport>, AnalysisError> {
    cs.iter()
        .map(|c| {
            let s = stabilizer(c)?;
            Ok(ComponentReport {
                poly: c.to_string(),
                finite_stabilizer: s.dimension == 0,
                stabilizer: s,
            })
        })
        .collect()
}

/// Every component of `D1` and `D2` must have finite stabilizer, `D2` must
/// have trivial stabilizer, and each `gᵢ` must generate a Zariski-dense
/// subgroup (multiplicatively independent coordinates).
pub fn hypothesis_check(inst: &ProblemInstance) -> Result<HypothesisReport, AnalysisError> {
    let mut checks = Vec::new();
    component_checks("F1", &inst.f1, &inst.components1, &mut checks)?;
    component_checks("F2", &inst.f2, &inst.components2, &mut checks)?;
    let c1 = report(&inst.components_of_1())?;
    let c2 = report(&inst.components_of_2())?;
    for (name, cs) in [("D1", &c1), ("D2", &c2)] {
        let bad: Vec<&str> = cs.iter().filter(|c| !c.finite_stabilizer).map(|c| c.poly.as_str()).collect();
        let detail = if bad.is_empty() {
            String::new()
        } else {
            format!("positive-dimensional stabilizer: {}", bad.join("; "))
        };
        checks.push(Check::new(&format!("{name}_components_finite_stabilizer"), bad.is_empty(), detail));
    }
    let s2 = stabilizer(&inst.f2)?;
    checks.push(Check::new(
        "D2_trivial_stabilizer",
        s2.is_trivial(),
        format!(
            "dimension {}, invariant factors [{}]",
            s2.dimension,
            s2.invariant_factors.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        ),
    ));
    checks.push(Check::new("g1_dense", is_independent(&inst.factored_g1()?), ""));
    checks.push(Check::new("g2_dense", is_independent(&inst.factored_g2()?), ""));
    let passed = checks.iter().all(|c| c.passed);
    Ok(HypothesisReport {
        components1: c1,
        components2: c2,
        stabilizer_d2: s2,
        checks,
        passed,
    })
}
