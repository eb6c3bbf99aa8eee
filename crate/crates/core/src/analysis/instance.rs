use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::arith::{format_rational, parse_rational, FactoredRational, Factorizer, PrimeSet};
use crate::laurent::LaurentPoly;

/// Two tori `G_m^{d1}`, `G_m^{d2}` with points `g1`, `g2` and divisors
/// `F1 = 0`, `F2 = 0`. Components, when given, are trusted as irreducible.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub s: PrimeSet,
    pub g1: Vec<BigRational>,
    pub g2: Vec<BigRational>,
    pub f1: LaurentPoly,
    pub f2: LaurentPoly,
    pub components1: Option<Vec<LaurentPoly>>,
    pub components2: Option<Vec<LaurentPoly>>,
}

/// Rationals may be given as JSON numbers or strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RatValue {
    Int(i64),
    Text(String),
}

impl RatValue {
    fn parse(&self) -> Result<BigRational, AnalysisError> {
        match self {
            RatValue::Int(n) => Ok(BigRational::from_integer((*n).into())),
            RatValue::Text(s) => Ok(parse_rational(s)?),
        }
    }
}

/// Wire form: `{s_primes, g1, g2, F1, F2, components1?, components2?}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    #[serde(default)]
    pub s_primes: PrimeSet,
    g1: Vec<RatValue>,
    g2: Vec<RatValue>,
    #[serde(rename = "F1")]
    pub f1: String,
    #[serde(rename = "F2")]
    pub f2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components1: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components2: Option<Vec<String>>,
}

fn parse_components(list: &Option<Vec<String>>, dim: usize) -> Result<Option<Vec<LaurentPoly>>, AnalysisError> {
    list.as_ref()
        .map(|v| {
            v.iter()
                .map(|s| LaurentPoly::parse(s, dim).map_err(AnalysisError::from))
                .collect()
        })
        .transpose()
}

impl ProblemInstance {
    pub fn new(
        s: PrimeSet,
        g1: Vec<BigRational>,
        g2: Vec<BigRational>,
        f1: LaurentPoly,
        f2: LaurentPoly,
    ) -> Result<Self, AnalysisError> {
        let inst = Self {
            s,
            g1,
            g2,
            f1,
            f2,
            components1: None,
            components2: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_components(
        mut self,
        c1: Option<Vec<LaurentPoly>>,
        c2: Option<Vec<LaurentPoly>>,
    ) -> Result<Self, AnalysisError> {
        self.components1 = c1;
        self.components2 = c2;
        self.validate()?;
        Ok(self)
    }

    /// Builds an instance from textual data; polynomials use `X1..Xd`.
    pub fn from_strs(s: &[u64], g1: &[&str], g2: &[&str], f1: &str, f2: &str) -> Result<Self, AnalysisError> {
        let s = PrimeSet::new(s.iter().map(|&p| BigUint::from(p)))?;
        let g1 = g1.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>, _>>()?;
        let g2 = g2.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>, _>>()?;
        let f1 = LaurentPoly::parse(f1, g1.len())?;
        let f2 = LaurentPoly::parse(f2, g2.len())?;
        Self::new(s, g1, g2, f1, f2)
    }

    pub fn d1(&self) -> usize {
        self.g1.len()
    }

    pub fn d2(&self) -> usize {
        self.g2.len()
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: String| Err(AnalysisError::Instance(m));
        if self.g1.is_empty() || self.g2.is_empty() {
            return bad("points must have at least one coordinate".into());
        }
        if self.g1.iter().chain(&self.g2).any(Zero::is_zero) {
            return bad("point coordinates must be nonzero".into());
        }
        if self.f1.dim() != self.d1() || self.f2.dim() != self.d2() {
            return bad("polynomial dimension differs from point dimension".into());
        }
        if self.f1.is_zero() || self.f2.is_zero() {
            return bad("divisor equations must be nonzero".into());
        }
        for (comps, d) in [(&self.components1, self.d1()), (&self.components2, self.d2())] {
            if let Some(cs) = comps {
                if cs.is_empty() {
                    return bad("component list is empty".into());
                }
                if cs.iter().any(|c| c.dim() != d) {
                    return bad("component dimension differs from point dimension".into());
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        let j: InstanceJson = serde_json::from_str(text).map_err(|e| AnalysisError::Input(format!("instance JSON: {e}")))?;
        Self::from_wire(&j)
    }

    pub fn from_wire(j: &InstanceJson) -> Result<Self, AnalysisError> {
        let g1 = j.g1.iter().map(RatValue::parse).collect::<Result<Vec<_>, _>>()?;
        let g2 = j.g2.iter().map(RatValue::parse).collect::<Result<Vec<_>, _>>()?;
        let f1 = LaurentPoly::parse(&j.f1, g1.len())?;
        let f2 = LaurentPoly::parse(&j.f2, g2.len())?;
        let c1 = parse_components(&j.components1, g1.len())?;
        let c2 = parse_components(&j.components2, g2.len())?;
        Self::new(j.s_primes.clone(), g1, g2, f1, f2)?.with_components(c1, c2)
    }

    pub fn to_wire(&self) -> InstanceJson {
        let strs = |v: &[BigRational]| v.iter().map(|q| RatValue::Text(format_rational(q))).collect();
        let comps = |c: &Option<Vec<LaurentPoly>>| c.as_ref().map(|v| v.iter().map(ToString::to_string).collect());
        InstanceJson {
            s_primes: self.s.clone(),
            g1: strs(&self.g1),
            g2: strs(&self.g2),
            f1: self.f1.to_string(),
            f2: self.f2.to_string(),
            components1: comps(&self.components1),
            components2: comps(&self.components2),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("instance serializes")
    }

    /// Components of `F1`, or `[F1]` when none were supplied.
    pub fn components_of_1(&self) -> Vec<LaurentPoly> {
        self.components1.clone().unwrap_or_else(|| vec![self.f1.clone()])
    }

    pub fn components_of_2(&self) -> Vec<LaurentPoly> {
        self.components2.clone().unwrap_or_else(|| vec![self.f2.clone()])
    }

    pub fn factored_g1(&self) -> Result<Vec<FactoredRational>, AnalysisError> {
        factor_all(&self.g1)
    }

    pub fn factored_g2(&self) -> Result<Vec<FactoredRational>, AnalysisError> {
        factor_all(&self.g2)
    }

    /// `g1 = 2, g2 = −2, F1 = F2 = X − 1, S = {2}`.
    pub fn example_es() -> Self {
        Self::from_strs(&[2], &["2"], &["-2"], "X1 - 1", "X1 - 1").expect("valid")
    }

    /// `g1 = 2, g2 = (2, 3)`, `F1 = X − 1`, `F2 = (X1 − 1)(X2 − 1)` with its two components.
    pub fn example_es2() -> Self {
        let d = Self::from_strs(&[2, 3], &["2"], &["2", "3"], "X1 - 1", "(X1 - 1)*(X2 - 1)").expect("valid");
        let c2 = vec![
            LaurentPoly::parse("X1 - 1", 2).expect("valid"),
            LaurentPoly::parse("X2 - 1", 2).expect("valid"),
        ];
        d.with_components(None, Some(c2)).expect("valid")
    }

    /// `g1 = 4, g2 = 2`, `F1 = X − 1`, `F2 = X² − 1 = (X − 1)(X + 1)`.
    pub fn example_es3() -> Self {
        let d = Self::from_strs(&[2], &["4"], &["2"], "X1 - 1", "X1^2 - 1").expect("valid");
        let c2 = vec![
            LaurentPoly::parse("X1 - 1", 1).expect("valid"),
            LaurentPoly::parse("X1 + 1", 1).expect("valid"),
        ];
        d.with_components(None, Some(c2)).expect("valid")
    }
}

pub(crate) fn factor_all(xs: &[BigRational]) -> Result<Vec<FactoredRational>, AnalysisError> {
    let fz = Factorizer::default();
    xs.iter()
        .map(|x| FactoredRational::factor_rational(x, &fz).map_err(AnalysisError::from))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendReport {
    pub s: PrimeSet,
    pub added: PrimeSet,
}

fn denominators(f: &LaurentPoly) -> Vec<BigRational> {
    f.terms()
        .filter(|(_, c)| !c.denom().is_one())
        .map(|(_, c)| BigRational::from_integer(c.denom().clone()))
        .collect()
}

/// Enlarges `S` so the coordinates of `g1`, `g2` are S-units and the
/// coefficients of `F1`, `F2` are S-integers.
pub fn extend_s(inst: &ProblemInstance) -> Result<(ProblemInstance, ExtendReport), AnalysisError> {
    let mut values: Vec<BigRational> = inst.g1.iter().chain(&inst.g2).cloned().collect();
    values.extend(denominators(&inst.f1));
    values.extend(denominators(&inst.f2));
    let mut s = inst.s.clone();
    let mut added = PrimeSet::empty();
    for f in factor_all(&values)? {
        for p in f.primes() {
            if s.insert_prime(p.clone()) {
                added.insert_prime(p.clone());
            }
        }
    }
    let mut out = inst.clone();
    out.s = s.clone();
    Ok((out, ExtendReport { s, added }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primes(ps: &[u64]) -> PrimeSet {
        PrimeSet::new(ps.iter().map(|&p| BigUint::from(p))).unwrap()
    }

    #[test]
    fn extend_examples() {
        let i = ProblemInstance::from_strs(&[], &["2"], &["2"], "X1 - 1", "X1 - 1").unwrap();
        let (e, r) = extend_s(&i).unwrap();
        assert_eq!(e.s, primes(&[2]));
        assert_eq!(r.added, primes(&[2]));

        let i = ProblemInstance::from_strs(&[2], &["2"], &["2", "3/5"], "X1 - 1", "X1 - X2").unwrap();
        let (e, r) = extend_s(&i).unwrap();
        assert_eq!(e.s, primes(&[2, 3, 5]));
        assert_eq!(r.added, primes(&[3, 5]));

        let i = ProblemInstance::example_es();
        let (e, r) = extend_s(&i).unwrap();
        assert_eq!(e, i);
        assert!(r.added.is_empty());

        let i = ProblemInstance::from_strs(&[], &["3"], &["3"], "X1 - 1/7", "X1 - 1").unwrap();
        assert_eq!(extend_s(&i).unwrap().0.s, primes(&[3, 7]));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"s_primes":[2,3],"g1":["2"],"g2":[2,"3"],"F1":"X1 - 1","F2":"(X1 - 1)*(X2 - 1)",
                      "components2":["X1 - 1","X2 - 1"]}"#;
        let i = ProblemInstance::from_json(text).unwrap();
        assert_eq!(i, ProblemInstance::example_es2());
        let back = ProblemInstance::from_json(&i.to_json()).unwrap();
        assert_eq!(back, i);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(ProblemInstance::from_json(r#"{"g1":["0"],"g2":["2"],"F1":"X1","F2":"X1"}"#).is_err());
        assert!(ProblemInstance::from_json(r#"{"g1":["2"],"g2":["2"],"F1":"X2","F2":"X1"}"#).is_err());
        assert!(ProblemInstance::from_json(r#"{"g1":["2"],"g2":["2"],"F1":"0","F2":"X1"}"#).is_err());
        assert!(ProblemInstance::from_json(r#"{"s_primes":[4],"g1":["2"],"g2":["2"],"F1":"X1","F2":"X1"}"#).is_err());
        assert!(ProblemInstance::from_json("not json").is_err());
    }
}
