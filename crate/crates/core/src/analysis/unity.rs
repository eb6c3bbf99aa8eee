use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::laurent::LaurentPoly;

/// Largest order for which cyclotomic reduction is attempted.
pub const UNITY_ORDER_BOUND: u64 = 12;

/// The point `(e(a₁/M), …, e(a_d/M))` with `e(t) = exp(2πit)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorsionPoint {
    pub exponents: Vec<u64>,
    pub order: u64,
}

impl TorsionPoint {
    /// Each coordinate as a reduced fraction `a/b` of a full turn.
    pub fn turns(&self) -> Vec<(u64, u64)> {
        self.exponents
            .iter()
            .map(|&a| {
                let g = a.gcd(&self.order);
                (a / g, self.order / g)
            })
            .collect()
    }

    pub fn is_rational(&self) -> bool {
        self.turns().iter().all(|&(_, b)| b <= 2)
    }
}

impl fmt::Display for TorsionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .turns()
            .into_iter()
            .map(|(a, b)| match b {
                1 => "1".to_string(),
                2 => "-1".to_string(),
                _ => format!("e({a}/{b})"),
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A one-parameter family `t·λ^b` inside the divisor through a found point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnityFamily {
    pub point: TorsionPoint,
    pub direction: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnityScan {
    pub order_bound: u64,
    pub points: Vec<TorsionPoint>,
    pub families: Vec<UnityFamily>,
}

impl UnityScan {
    pub fn has_family(&self) -> bool {
        !self.families.is_empty()
    }
}

/// Coefficients of `Φ_m`, lowest degree first.
pub(crate) fn cyclotomic(m: u64) -> Vec<i64> {
    // Φ_m = Π_{d | m} (z^d − 1)^{μ(m/d)}; divide z^m − 1 by Φ_d for proper divisors
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            num = exact_div_monic(&num, &cyclotomic(d));
        }
    }
    num
}

fn exact_div_monic(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = rem[i + db];
        q[i] = c;
        for (j, bj) in b.iter().enumerate() {
            rem[i + j] -= c * bj;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

/// Whether `Σ vᵢ zⁱ` vanishes at a primitive `m`-th root of unity.
fn vanishes_mod_cyclotomic(v: &[BigRational], phi: &[i64]) -> bool {
    let mut rem = v.to_vec();
    let dp = phi.len() - 1;
    for i in (dp..rem.len()).rev() {
        let c = std::mem::take(&mut rem[i]);
        if c.is_zero() {
            continue;
        }
        for (j, pj) in phi.iter().enumerate().take(dp) {
            rem[i - dp + j] -= &c * BigRational::from_integer((*pj).into());
        }
    }
    rem.iter().all(Zero::is_zero)
}

fn dot_mod(u: &[i64], a: &[u64], m: u64) -> usize {
    let m = m as i64;
    let s: i64 = u.iter().zip(a).map(|(x, &y)| (x.rem_euclid(m) * y as i64) % m).sum();
    s.rem_euclid(m) as usize
}

fn on_divisor(f: &LaurentPoly, a: &[u64], m: u64, phi: &[i64]) -> bool {
    let mut v = vec![BigRational::zero(); m as usize];
    for (u, c) in f.terms() {
        v[dot_mod(u, a, m)] += c;
    }
    vanishes_mod_cyclotomic(&v, phi)
}

/// `F(t·λ^b) = 0` identically in `λ`.
fn family_through(f: &LaurentPoly, a: &[u64], m: u64, phi: &[i64], b: &[i64]) -> bool {
    let mut groups: std::collections::BTreeMap<i64, Vec<BigRational>> = Default::default();
    for (u, c) in f.terms() {
        let key: i64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
        let v = groups.entry(key).or_insert_with(|| vec![BigRational::zero(); m as usize]);
        v[dot_mod(u, a, m)] += c;
    }
    groups.values().all(|v| vanishes_mod_cyclotomic(v, phi))
}

fn directions(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-2i64; d];
    loop {
        let first = cur.iter().find(|&&x| x != 0);
        let g = cur.iter().fold(0i64, |g, &x| g.gcd(&x));
        if first.is_some_and(|&x| x > 0) && g == 1 {
            out.push(cur.clone());
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            if cur[i] < 2 {
                cur[i] += 1;
                break;
            }
            cur[i] = -2;
            i += 1;
        }
    }
}

/// Points of `F = 0` whose coordinates are roots of unity of order dividing
/// `m`, with one-dimensional families detected along short directions.
pub fn unity_points_scan(f: &LaurentPoly, m: u64) -> Result<UnityScan, AnalysisError> {
    if m == 0 || m > UNITY_ORDER_BOUND {
        return Err(AnalysisError::Input(format!(
            "order bound {m} outside 1..={UNITY_ORDER_BOUND}"
        )));
    }
    if f.is_zero() {
        return Err(AnalysisError::Input("zero polynomial".into()));
    }
    let d = f.dim();
    let dirs = directions(d);
    let mut points = Vec::new();
    let mut families = Vec::new();
    let mut a = vec![0u64; d];
    loop {
        // the point's exact order decides which cyclotomic factor to use
        let order = a.iter().fold(m, |g, &x| g.gcd(&x));
        let ord = m / order;
        let reduced: Vec<u64> = a.iter().map(|&x| x / order).collect();
        let phi = cyclotomic(ord);
        if on_divisor(f, &reduced, ord, &phi) {
            let p = TorsionPoint {
                exponents: a.clone(),
                order: m,
            };
            for b in &dirs {
                if family_through(f, &reduced, ord, &phi, b) {
                    families.push(UnityFamily {
                        point: p.clone(),
                        direction: b.clone(),
                    });
                }
            }
            points.push(p);
        }
        let mut i = d;
        loop {
            if i == 0 {
                points.sort();
                return Ok(UnityScan {
                    order_bound: m,
                    points,
                    families,
                });
            }
            i -= 1;
            if a[i] + 1 < m {
                a[i] += 1;
                break;
            }
            a[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn p(s: &str, d: usize) -> LaurentPoly {
        LaurentPoly::parse(s, d).unwrap()
    }

    fn pts(s: &UnityScan) -> Vec<Vec<u64>> {
        s.points.iter().map(|p| p.exponents.clone()).collect()
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(2), vec![1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
        for m in 1..=12u64 {
            let deg = cyclotomic(m).len() as u64 - 1;
            assert_eq!(deg, (1..=m).filter(|k| k.gcd(&m) == 1).count() as u64);
        }
    }

    #[test]
    fn examples() {
        let s = unity_points_scan(&p("X1 + X2 - 2", 2), 1).unwrap();
        assert_eq!(pts(&s), vec![vec![0, 0]]);
        assert!(!s.has_family());

        let s = unity_points_scan(&p("(X1 - 1)*(X2 - 1)", 2), 2).unwrap();
        assert_eq!(pts(&s), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert!(s.has_family());
        assert_eq!(s.points[1].to_string(), "(1, -1)");

        assert!(unity_points_scan(&p("X1 + X2 - 7", 2), 2).unwrap().points.is_empty());
        assert!(unity_points_scan(&p("X1 - 1", 1), 13).is_err());
        assert!(unity_points_scan(&p("X1 - 1", 1), 0).is_err());
    }

    #[test]
    fn higher_orders() {
        let s = unity_points_scan(&p("X1^2 + X1 + 1", 1), 6).unwrap();
        assert_eq!(pts(&s), vec![vec![2], vec![4]]);
        assert_eq!(s.points[0].to_string(), "(e(1/3))");
        let s = unity_points_scan(&p("X1 + X2 + 1", 2), 3).unwrap();
        assert_eq!(pts(&s), vec![vec![1, 2], vec![2, 1]]);
        let s = unity_points_scan(&p("X1*X2 - 1", 2), 4).unwrap();
        assert_eq!(s.points.len(), 4);
        assert!(s.families.iter().any(|f| f.direction == vec![1, -1]));
    }

    #[test]
    fn agrees_with_floating_evaluation() {
        let f = p("X1^3*X2 + 2*X1*X2^2 - X2 + 3*X1^-1 - 1", 2);
        for m in 1..=8u64 {
            let s = unity_points_scan(&f, m).unwrap();
            for a in 0..m {
                for b in 0..m {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (u, c) in f.terms() {
                        let t = TAU * ((u[0] * a as i64 + u[1] * b as i64) as f64) / m as f64;
                        let c = c.numer().to_string().parse::<f64>().unwrap() / c.denom().to_string().parse::<f64>().unwrap();
                        re += c * t.cos();
                        im += c * t.sin();
                    }
                    let zero = re.hypot(im) < 1e-9;
                    assert_eq!(zero, pts(&s).contains(&vec![a, b]), "m={m} a={a} b={b}");
                }
            }
        }
    }
}
