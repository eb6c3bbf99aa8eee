use super::instance::factor_all;
use super::{point_pow, AnalysisError, ProblemInstance};
use crate::group::group_basis;
use crate::laurent::LaurentPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct TorsionReduction {
    /// Order of the torsion of the group generated by all coordinates.
    pub k: u8,
    /// Entry `r`: `gᵢ ↦ gᵢᵏ`, `Fᵢ(X) ↦ Fᵢ(gᵢʳ·X)`, so its value at `n` is the original at `kn + r`.
    pub residues: Vec<ProblemInstance>,
}

fn shifted(f: &LaurentPoly, t: &[num_rational::BigRational]) -> LaurentPoly {
    f.scale_variables(t).expect("dimensions validated")
}

pub fn residue_instance(inst: &ProblemInstance, k: u8, r: u8) -> ProblemInstance {
    let t1 = point_pow(&inst.g1, r as i64);
    let t2 = point_pow(&inst.g2, r as i64);
    ProblemInstance {
        s: inst.s.clone(),
        g1: point_pow(&inst.g1, k as i64),
        g2: point_pow(&inst.g2, k as i64),
        f1: shifted(&inst.f1, &t1),
        f2: shifted(&inst.f2, &t2),
        components1: inst.components1.as_ref().map(|v| v.iter().map(|c| shifted(c, &t1)).collect()),
        components2: inst.components2.as_ref().map(|v| v.iter().map(|c| shifted(c, &t2)).collect()),
    }
}

pub fn torsion_reduce(inst: &ProblemInstance) -> Result<TorsionReduction, AnalysisError> {
    let mut coords = factor_all(&inst.g1)?;
    coords.extend(factor_all(&inst.g2)?);
    let k = group_basis(&coords).torsion_order();
    let residues = (0..k).map(|r| residue_instance(inst, k, r)).collect();
    Ok(TorsionReduction { k, residues })
}
