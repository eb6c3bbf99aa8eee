//! Counting functions of zero sets that are finite unions of translated
//! lattices of rank 0, 1 or 2 in the complex plane.
//!
//! All modeled zeros are simple, so the truncated counting function `N₁`
//! coincides with `N`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::parse_rational;
use num_traits::ToPrimitive;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CountingError {
    #[error("invalid zero set: {0}")]
    InvalidZeroSet(String),
    #[error("about {estimate} lattice points needed, above the budget of {budget}")]
    Budget { estimate: u64, budget: u64 },
    #[error("degenerate radius grid: {0}")]
    DegenerateGrid(String),
    #[error("{0}")]
    Domain(String),
}

/// `offset + Z·ω₁ (+ Z·ω₂)`; no periods means the single point `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePart {
    pub offset: Complex64,
    pub periods: Vec<Complex64>,
}

impl LatticePart {
    pub fn new(offset: Complex64, periods: Vec<Complex64>) -> Result<Self, CountingError> {
        let bad = |m: &str| Err(CountingError::InvalidZeroSet(m.into()));
        if periods.len() > 2 {
            return bad("at most two periods");
        }
        if periods.iter().any(|w| !(w.norm() > 0.0) || !w.norm().is_finite()) || !offset.norm().is_finite() {
            return bad("periods must be finite and nonzero");
        }
        if periods.len() == 2 && ((periods[1] / periods[0]).im.abs() < 1e-12) {
            return bad("periods must be linearly independent over R");
        }
        Ok(Self { offset, periods })
    }

    fn rank(&self) -> usize {
        self.periods.len()
    }

    /// Whether `z` lies in this translated lattice, up to rounding.
    fn contains(&self, z: Complex64) -> bool {
        let d = z - self.offset;
        let scale = 1.0 + z.norm();
        let near = |x: f64| (x - x.round()).abs() <= 1e-9 * (1.0 + x.abs());
        match self.periods.as_slice() {
            [] => d.norm() <= 1e-12 * scale,
            [w] => {
                let q = d / w;
                q.im.abs() * w.norm() <= 1e-9 * scale && near(q.re)
            }
            [w1, w2] => {
                let det = w1.re * w2.im - w1.im * w2.re;
                let a = (d.re * w2.im - d.im * w2.re) / det;
                let b = (w1.re * d.im - w1.im * d.re) / det;
                near(a) && near(b)
            }
            _ => unreachable!(),
        }
    }

    fn area(&self) -> f64 {
        match self.periods.as_slice() {
            [w1, w2] => (w1.re * w2.im - w1.im * w2.re).abs(),
            _ => 0.0,
        }
    }

    fn estimate(&self, r: f64) -> f64 {
        match self.periods.as_slice() {
            [] => 1.0,
            [w] => 2.0 * (r + self.offset.norm()) / w.norm() + 3.0,
            [w1, w2] => {
                let reach = r + self.offset.norm() + w1.norm() + w2.norm();
                std::f64::consts::PI * reach * reach / self.area() + 4.0 * reach / w1.norm().min(w2.norm()) + 4.0
            }
            _ => unreachable!(),
        }
    }

    fn rotated(&self, u: Complex64) -> Self {
        Self {
            offset: self.offset * u,
            periods: self.periods.iter().map(|w| w * u).collect(),
        }
    }
}

/// Integer range containing every `m` with `|o + mω| ≤ r`, rounded outward.
fn line_range(o: Complex64, w: Complex64, r: f64) -> Option<(i64, i64)> {
    let a = w.norm_sqr();
    let b = o.re * w.re + o.im * w.im;
    let c = o.norm_sqr() - r * r;
    let disc = b * b - a * c;
    if disc < 0.0 {
        // still allow for rounding right at tangency
        if disc < -1e-9 * (b * b).max(1.0) {
            return None;
        }
    }
    let s = disc.max(0.0).sqrt();
    let lo = ((-b - s) / a).floor() as i64 - 1;
    let hi = ((-b + s) / a).ceil() as i64 + 1;
    Some((lo, hi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeZeroSet {
    pub parts: Vec<LatticePart>,
}

impl LatticeZeroSet {
    pub fn new(parts: Vec<LatticePart>) -> Self {
        Self { parts }
    }

    pub fn integers() -> Self {
        Self::new(vec![LatticePart::new(Complex64::new(0.0, 0.0), vec![Complex64::new(1.0, 0.0)]).unwrap()])
    }

    pub fn gaussian() -> Self {
        Self::lattice(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap()
    }

    pub fn lattice(w1: Complex64, w2: Complex64) -> Result<Self, CountingError> {
        Ok(Self::new(vec![LatticePart::new(Complex64::new(0.0, 0.0), vec![w1, w2])?]))
    }

    pub fn origin() -> Self {
        Self::new(vec![LatticePart::new(Complex64::new(0.0, 0.0), vec![]).unwrap()])
    }

    pub fn union(mut self, other: LatticeZeroSet) -> Self {
        self.parts.extend(other.parts);
        self
    }

    pub fn translated(&self, by: Complex64) -> Self {
        Self::new(
            self.parts
                .iter()
                .map(|p| LatticePart {
                    offset: p.offset + by,
                    periods: p.periods.clone(),
                })
                .collect(),
        )
    }

    /// Multiplies offsets and periods by `u`.
    pub fn rotated(&self, u: Complex64) -> Self {
        Self::new(self.parts.iter().map(|p| p.rotated(u)).collect())
    }

    /// A line into a cylinder and into an elliptic curve: `(Z, Z + τZ)`.
    pub fn ce(tau: Complex64) -> Result<(Self, Self), CountingError> {
        Ok((Self::integers(), Self::lattice(Complex64::new(1.0, 0.0), tau)?))
    }

    /// Pull-backs for a product of an elliptic curve with a cylinder, and
    /// with itself, along `z ↦ ([z], e^{2παz})` and `z ↦ ([z], [αz])`:
    /// `Z[i] ∪ (i/α)Z` and `Z[i] ∪ α⁻¹Z[i]`.
    pub fn ctex(alpha: f64) -> Result<(Self, Self), CountingError> {
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(CountingError::InvalidZeroSet("alpha must be finite and nonzero".into()));
        }
        let zero = Complex64::new(0.0, 0.0);
        let first = Self::gaussian().union(Self::new(vec![LatticePart::new(zero, vec![Complex64::new(0.0, 1.0 / alpha)])?]));
        let second = Self::gaussian().union(Self::lattice(Complex64::new(1.0 / alpha, 0.0), Complex64::new(0.0, 1.0 / alpha))?);
        Ok((first, second))
    }

    fn estimate(&self, r: f64) -> f64 {
        self.parts.iter().map(|p| p.estimate(r)).sum()
    }

    /// Enumeration lines covering every point within radius `r`, tagged with
    /// the index of the part they belong to.
    fn lines(&self, r: f64) -> Vec<(usize, Line)> {
        let mut out = Vec::new();
        for (j, part) in self.parts.iter().enumerate() {
            match part.periods.as_slice() {
                [] => out.push((j, Line::Point(part.offset))),
                [w] => {
                    if let Some((lo, hi)) = line_range(part.offset, *w, r) {
                        out.push((j, Line::Run { base: part.offset, step: *w, lo, hi }));
                    }
                }
                [w1, w2] => {
                    let nu = Complex64::new(0.0, 1.0) * w1 / w1.norm();
                    let dot = |z: Complex64| z.re * nu.re + z.im * nu.im;
                    let (o, step) = (dot(part.offset), dot(*w2));
                    let a = (-r - o) / step;
                    let b = (r - o) / step;
                    let lo = a.min(b).floor() as i64 - 1;
                    let hi = a.max(b).ceil() as i64 + 1;
                    for n in lo..=hi {
                        let base = part.offset + w2 * n as f64;
                        if let Some((mlo, mhi)) = line_range(base, *w1, r) {
                            out.push((j, Line::Run { base, step: *w1, lo: mlo, hi: mhi }));
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// Calls `f` with the modulus of each point of `line` inside radius `r`
    /// that no earlier part already contains.
    fn visit_line(&self, part: usize, line: Line, r: f64, mut f: impl FnMut(f64)) {
        let earlier = &self.parts[..part];
        let mut visit = |z: Complex64| {
            let rho = z.norm();
            if rho <= r && !earlier.iter().any(|p| p.contains(z)) {
                f(rho);
            }
        };
        match line {
            Line::Point(z) => visit(z),
            Line::Run { base, step, lo, hi } => {
                for m in lo..=hi {
                    visit(base + step * m as f64);
                }
            }
        }
    }

    #[cfg(test)]
    fn moduli(&self, r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (j, line) in self.lines(r) {
            self.visit_line(j, line, r, |rho| out.push(rho));
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
enum Line {
    Point(Complex64),
    Run { base: Complex64, step: Complex64, lo: i64, hi: i64 },
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(self) -> f64 {
        self.s + self.c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingConfig {
    /// Refuse radii whose disc holds more than roughly this many points.
    pub point_budget: u64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        Self { point_budget: 100_000_000 }
    }
}

const ZERO_TOL: f64 = 1e-12;

struct Profile {
    ord0: u64,
    counts: Vec<u64>,
    logs: Vec<f64>,
}

/// Points binned by the first radius of `radii` (ascending) that covers them.
fn profile(z: &LatticeZeroSet, radii: &[f64], cfg: &CountingConfig) -> Result<Profile, CountingError> {
    let r = *radii.last().expect("nonempty radii");
    let estimate = z.estimate(r);
    if estimate > cfg.point_budget as f64 {
        return Err(CountingError::Budget {
            estimate: estimate.to_u64().unwrap_or(u64::MAX),
            budget: cfg.point_budget,
        });
    }
    let k = radii.len();
    let partial: Vec<(u64, Vec<u64>, Vec<Sum>)> = z
        .lines(r)
        .into_par_iter()
        .map(|(part, line)| {
            let mut ord0 = 0;
            let mut counts = vec![0u64; k];
            let mut logs = vec![Sum::default(); k];
            z.visit_line(part, line, r, |rho| {
                if rho <= ZERO_TOL {
                    ord0 += 1;
                    return;
                }
                let j = radii.partition_point(|&t| t < rho);
                counts[j] += 1;
                logs[j].add(rho.ln());
            });
            (ord0, counts, logs)
        })
        .collect();
    let mut ord0 = 0;
    let mut counts = vec![0u64; k];
    let mut logs = vec![Sum::default(); k];
    for (o, c, l) in partial {
        ord0 += o;
        for j in 0..k {
            counts[j] += c[j];
            logs[j].add(l[j].value());
        }
    }
    Ok(Profile {
        ord0,
        counts,
        logs: logs.into_iter().map(Sum::value).collect(),
    })
}

fn check_radius(r: f64, min: f64) -> Result<(), CountingError> {
    if !(r.is_finite() && r > min) {
        return Err(CountingError::Domain(format!("radius {r} must be finite and above {min}")));
    }
    Ok(())
}

/// Number of distinct points with `|z| ≤ t`.
pub fn unreduced_count(z: &LatticeZeroSet, t: f64, cfg: &CountingConfig) -> Result<u64, CountingError> {
    check_radius(t, 0.0)?;
    let p = profile(z, &[t], cfg)?;
    Ok(p.ord0 + p.counts[0])
}

/// `N(r) = ord₀·log r + Σ_{0<|z|≤r} log(r/|z|)` at each radius of an ascending list.
pub fn counting_profile(z: &LatticeZeroSet, radii: &[f64], cfg: &CountingConfig) -> Result<Vec<f64>, CountingError> {
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    for w in radii.windows(2) {
        if !(w[0] < w[1]) {
            return Err(CountingError::DegenerateGrid("radii must increase strictly".into()));
        }
    }
    check_radius(radii[0], 1.0)?;
    let p = profile(z, radii, cfg)?;
    let mut out = Vec::with_capacity(radii.len());
    let (mut count, mut logs) = (0u64, Sum::default());
    for (j, &r) in radii.iter().enumerate() {
        count += p.counts[j];
        logs.add(p.logs[j]);
        let lr = r.ln();
        out.push((p.ord0 + count) as f64 * lr - logs.value());
    }
    Ok(out)
}

pub fn counting_function(z: &LatticeZeroSet, r: f64, cfg: &CountingConfig) -> Result<f64, CountingError> {
    Ok(counting_profile(z, &[r], cfg)?[0])
}

/// `k` radii from `r_min` to `r_max` in geometric progression.
pub fn geometric_grid(r_min: f64, r_max: f64, k: usize) -> Result<Vec<f64>, CountingError> {
    if k < 2 || !(r_min > 1.0) || !(r_max > r_min) || !r_max.is_finite() {
        return Err(CountingError::DegenerateGrid(format!("grid {r_min}..{r_max} with {k} points")));
    }
    let q = (r_max / r_min).ln() / (k - 1) as f64;
    Ok((0..k).map(|i| if i + 1 == k { r_max } else { r_min * (q * i as f64).exp() }).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Least-squares slope of `log N` against `log r`.
    pub exponent: f64,
    /// Geometric mean of `N(r) / r^p` over the grid, `p` the rounded exponent.
    pub coefficient: f64,
    pub rounded_exponent: i32,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Fits `N(r) ≈ c·r^p` over a grid of at least 10 radii spanning two decades.
pub fn growth_fit(z: &LatticeZeroSet, radii: &[f64], cfg: &CountingConfig) -> Result<GrowthFit, CountingError> {
    if radii.len() < 10 {
        return Err(CountingError::DegenerateGrid(format!("{} radii, need at least 10", radii.len())));
    }
    if radii[radii.len() - 1] / radii[0] < 100.0 * (1.0 - 1e-12) {
        return Err(CountingError::DegenerateGrid("radii must span at least two decades".into()));
    }
    let values = counting_profile(z, radii, cfg)?;
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(CountingError::DegenerateGrid("counting function vanishes on the grid".into()));
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = sxy / sxx;
    let p = exponent.round() as i32;
    let coefficient = (ys.iter().zip(&xs).map(|(y, x)| y - p as f64 * x).sum::<f64>() / n).exp();
    Ok(GrowthFit {
        exponent,
        coefficient,
        rounded_exponent: p,
        radii: radii.to_vec(),
        values,
    })
}

/// Wire form: `{parts: [{offset: [re, im], periods: [[re, im], …]}]}` with
/// each number a decimal or `a/b` string.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroSetJson {
    pub parts: Vec<PartJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartJson {
    pub offset: [String; 2],
    #[serde(default)]
    pub periods: Vec<[String; 2]>,
}

/// A decimal or `a/b` string as the nearest `f64`.
pub fn parse_real(s: &str) -> Result<f64, CountingError> {
    let t = s.trim();
    if t.contains('/') {
        let q = parse_rational(t).map_err(|e| CountingError::InvalidZeroSet(e.to_string()))?;
        return Ok(q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN));
    }
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CountingError::InvalidZeroSet(format!("not a real number: {s:?}")))
}

fn parse_complex(p: &[String; 2]) -> Result<Complex64, CountingError> {
    Ok(Complex64::new(parse_real(&p[0])?, parse_real(&p[1])?))
}

fn format_complex(z: Complex64) -> [String; 2] {
    [format!("{:e}", z.re), format!("{:e}", z.im)]
}

impl LatticeZeroSet {
    pub fn from_wire(w: &ZeroSetJson) -> Result<Self, CountingError> {
        let parts = w
            .parts
            .iter()
            .map(|p| {
                LatticePart::new(
                    parse_complex(&p.offset)?,
                    p.periods.iter().map(parse_complex).collect::<Result<_, _>>()?,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        if parts.is_empty() {
            return Err(CountingError::InvalidZeroSet("no parts".into()));
        }
        Ok(Self::new(parts))
    }

    pub fn to_wire(&self) -> ZeroSetJson {
        ZeroSetJson {
            parts: self
                .parts
                .iter()
                .map(|p| PartJson {
                    offset: format_complex(p.offset),
                    periods: p.periods.iter().map(|w| format_complex(*w)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CountingError> {
        let w: ZeroSetJson = serde_json::from_str(text).map_err(|e| CountingError::InvalidZeroSet(e.to_string()))?;
        Self::from_wire(&w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("plain data")
    }

    /// Largest covolume among the rank-2 parts, zero if there are none.
    pub fn max_covolume(&self) -> f64 {
        self.parts.iter().map(LatticePart::area).fold(0.0, f64::max)
    }

    pub fn rank(&self) -> usize {
        self.parts.iter().map(LatticePart::rank).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> CountingConfig {
        CountingConfig::default()
    }

    // independent oracle: scan a bounding box wider than any point of the disc
    fn brute_count(z: &LatticeZeroSet, t: f64) -> u64 {
        let mut pts: Vec<Complex64> = Vec::new();
        for part in &z.parts {
            let bound = match part.periods.as_slice() {
                [] => 0,
                [w] => ((t + part.offset.norm()) / w.norm()).ceil() as i64 + 2,
                [w1, w2] => {
                    let h = part.area() / w1.norm().max(w2.norm());
                    ((t + part.offset.norm()) / h).ceil() as i64 + 2
                }
                _ => unreachable!(),
            };
            let bn = if part.periods.len() == 2 { bound } else { 0 };
            for m in -bound..=bound {
                for n in -bn..=bn {
                    let mut p = part.offset;
                    if let Some(w) = part.periods.first() {
                        p += w * m as f64;
                    }
                    if let Some(w) = part.periods.get(1) {
                        p += w * n as f64;
                    }
                    if p.norm() <= t && !pts.iter().any(|q| (q - p).norm() < 1e-9) {
                        pts.push(p);
                    }
                }
            }
        }
        pts.len() as u64
    }

    #[test]
    fn count_examples() {
        assert_eq!(unreduced_count(&LatticeZeroSet::integers(), 3.5, &cfg()).unwrap(), 7);
        assert_eq!(unreduced_count(&LatticeZeroSet::gaussian(), 1.0, &cfg()).unwrap(), 5);
        let half = LatticeZeroSet::integers().translated(c(0.5, 0.0));
        assert_eq!(unreduced_count(&half, 1.0, &cfg()).unwrap(), 2);
        let twice = LatticeZeroSet::integers().union(LatticeZeroSet::integers());
        assert_eq!(unreduced_count(&twice, 3.5, &cfg()).unwrap(), 7);
    }

    #[test]
    fn counting_examples() {
        let ln10_fact: f64 = (1..=10).map(|k| (k as f64).ln()).sum();
        let want = 2.0 * (10.0 * 10f64.ln() - ln10_fact) + 10f64.ln();
        let got = counting_function(&LatticeZeroSet::integers(), 10.0, &cfg()).unwrap();
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        assert!((want - 18.1456).abs() < 1e-3);

        let e = std::f64::consts::E;
        assert!((counting_function(&LatticeZeroSet::origin(), e, &cfg()).unwrap() - 1.0).abs() < 1e-12);

        let g = counting_function(&LatticeZeroSet::gaussian(), 100.0, &cfg()).unwrap();
        let gauss = std::f64::consts::PI * 1e4 / 2.0;
        assert!((g - gauss).abs() < 0.03 * gauss);
    }

    #[test]
    fn errors() {
        assert!(counting_function(&LatticeZeroSet::integers(), 1.0, &cfg()).is_err());
        let tiny = CountingConfig { point_budget: 1000 };
        assert!(matches!(
            counting_function(&LatticeZeroSet::gaussian(), 100.0, &tiny),
            Err(CountingError::Budget { .. })
        ));
        assert!(LatticePart::new(c(0.0, 0.0), vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(growth_fit(&LatticeZeroSet::integers(), &geometric_grid(10.0, 100.0, 12).unwrap()[..9], &cfg()).is_err());
        assert!(growth_fit(&LatticeZeroSet::integers(), &geometric_grid(10.0, 50.0, 12).unwrap(), &cfg()).is_err());
        assert!(geometric_grid(0.5, 10.0, 5).is_err());
    }

    #[test]
    fn growth_examples() {
        let grid = geometric_grid(10.0, 1e3, 12).unwrap();
        let f = growth_fit(&LatticeZeroSet::integers(), &grid, &cfg()).unwrap();
        assert!((f.exponent - 1.0).abs() < 0.05, "{f:?}");
        let f = growth_fit(&LatticeZeroSet::gaussian(), &grid, &cfg()).unwrap();
        assert!((f.exponent - 2.0).abs() < 0.05);
        assert!((f.coefficient / (std::f64::consts::PI / 2.0) - 1.0).abs() < 0.05);
        let (a, b) = LatticeZeroSet::ctex(2f64.sqrt()).unwrap();
        for z in [a, b] {
            assert!((growth_fit(&z, &grid, &cfg()).unwrap().exponent - 2.0).abs() < 0.05);
        }
        let (a, b) = LatticeZeroSet::ce(c(0.3, 1.1)).unwrap();
        assert_eq!(growth_fit(&a, &grid, &cfg()).unwrap().rounded_exponent, 1);
        assert_eq!(growth_fit(&b, &grid, &cfg()).unwrap().rounded_exponent, 2);
    }

    #[test]
    fn ctex_parts_meet_only_at_zero() {
        let (a, _) = LatticeZeroSet::ctex(2f64.sqrt()).unwrap();
        let line = (2.0 * 20.0 * 2f64.sqrt()).floor() as u64 + 1;
        assert_eq!(unreduced_count(&a, 20.0, &cfg()).unwrap(), unreduced_count(&LatticeZeroSet::gaussian(), 20.0, &cfg()).unwrap() + line - 1);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"parts":[{"offset":["1/2","0"],"periods":[["1","0"]]},{"offset":["0","0"],"periods":[["1","0"],["0.25","1.5"]]}]}"#;
        let z = LatticeZeroSet::from_json(text).unwrap();
        assert_eq!(z.parts[0].offset, c(0.5, 0.0));
        assert_eq!(LatticeZeroSet::from_json(&z.to_json()).unwrap(), z);
        assert!(LatticeZeroSet::from_json(r#"{"parts":[]}"#).is_err());
        assert!(LatticeZeroSet::from_json(r#"{"parts":[{"offset":["x","0"]}]}"#).is_err());
    }

    fn arb_zero_set() -> impl Strategy<Value = LatticeZeroSet> {
        let part = (
            (-2.0f64..2.0, -2.0f64..2.0),
            (0.5f64..2.0, -1.0f64..1.0),
            (-1.0f64..1.0, 0.5f64..2.0),
            0usize..=2,
        )
            .prop_map(|(o, w1, w2, rank)| {
                let periods = [c(w1.0, w1.1), c(w2.0, w2.1)][..rank].to_vec();
                LatticePart::new(c(o.0, o.1), periods).unwrap()
            });
        proptest::collection::vec(part, 1..3).prop_map(LatticeZeroSet::new)
    }

    // adaptive Simpson on the step function (n(t) − n(0)) / t
    fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
        let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right;
        }
        quad(f, a, m, tol / 2.0, depth - 1) + quad(f, m, b, tol / 2.0, depth - 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn count_matches_brute_force(z in arb_zero_set(), t in 0.5f64..25.0) {
            prop_assert_eq!(unreduced_count(&z, t, &cfg()).unwrap(), brute_count(&z, t));
        }

        #[test]
        fn counting_matches_integral(z in arb_zero_set(), r in 2.0f64..12.0) {
            let n0 = unreduced_count(&z, 1e-13, &cfg()).unwrap() as f64;
            let mut jumps: Vec<f64> = z.moduli(r).into_iter().filter(|&m| m > ZERO_TOL).collect();
            jumps.sort_by(f64::total_cmp);
            jumps.dedup();
            // integrate piecewise between jumps so each piece is smooth
            let f = |t: f64| (unreduced_count(&z, t, &cfg()).unwrap() as f64 - n0) / t;
            let mut knots = vec![1e-9];
            knots.extend(jumps.iter().copied().filter(|&m| m < r));
            knots.push(r);
            let mut integral = 0.0;
            for w in knots.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let level = f(mid) * mid;
                integral += quad(&|t| level / t, w[0], w[1], 1e-12, 30);
            }
            let want = integral + n0 * r.ln();
            let got = counting_function(&z, r, &cfg()).unwrap();
            prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{} vs {}", got, want);
        }

        #[test]
        fn counting_is_monotone_and_rotation_invariant(z in arb_zero_set(), theta in 0.0f64..6.3) {
            let grid = geometric_grid(1.5, 30.0, 8).unwrap();
            let v = counting_profile(&z, &grid, &cfg()).unwrap();
            for w in v.windows(2) { prop_assert!(w[1] >= w[0] - 1e-9); }
            let u = Complex64::from_polar(1.0, theta);
            let rv = counting_profile(&z.rotated(u), &grid, &cfg()).unwrap();
            for (a, b) in v.iter().zip(&rv) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }
}
