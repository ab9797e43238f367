use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::cross_correlate;
use crate::group::{gcd, GroupSet, RealFunction};

/// An `(X, H)` pair for the nonsmoothing pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub x: GroupSet,
    pub h: GroupSet,
}

#[derive(Debug, Clone, Serialize)]
struct StructureRepr {
    x: Vec<usize>,
    h: Vec<usize>,
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureRepr {
            x: self.x.to_vec(),
            h: self.h.to_vec(),
        }
        .serialize(s)
    }
}

/// Bounded guess at `Delta ≈ X + H` with `H` of small doubling.
///
/// `H` is the progression `{0, d, .., (k-1)d}` along the most popular
/// non-zero difference `d` of `Delta`, with `k ≈ |Delta|^{1/3}`; `X` collects
/// the `x` whose translate `x + H` lands at least half inside `Delta`
/// (falling back to the best-scoring `x` when none does).
pub fn heuristic_structure(delta_set: &GroupSet) -> Result<Structure> {
    let g = delta_set.group();
    let n = g.modulus();
    if delta_set.len() < 2 {
        return Err(Error::invalid("structure search needs |Delta| >= 2"));
    }
    let ind = RealFunction::indicator(delta_set);
    let diffs = cross_correlate(&ind, &ind)?;
    let (d, _) = diffs.values()[1..]
        .iter()
        .map(|v| v.round() as usize)
        .enumerate()
        .fold((0, 0), |acc, (i, v)| if v > acc.1 { (i + 1, v) } else { acc });
    let k = ((delta_set.len() as f64).cbrt().round() as usize).clamp(2, n / gcd(d, n));
    let h = GroupSet::from_residues(g, (0..k).map(|j| g.mul(j, d)));
    let hits = cross_correlate(&RealFunction::indicator(&h), &ind)?;
    let scores: Vec<usize> = hits.values().iter().map(|v| v.round() as usize).collect();
    let half = h.len().div_ceil(2);
    let mut x = GroupSet::from_residues(g, (0..n).filter(|&t| scores[t] >= half));
    if x.is_empty() {
        let best = *scores.iter().max().expect("non-empty group");
        x = GroupSet::from_residues(g, (0..n).filter(|&t| scores[t] == best));
    }
    Ok(Structure { x, h })
}
