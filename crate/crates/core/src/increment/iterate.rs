use serde::{Deserialize, Serialize};

use super::{dispatch, IncrementResult, PipelineConfig, Provenance};
use crate::bohr::{best_translate, bohr_build, longest_ap_in};
use crate::error::{Error, Result};
use crate::group::{embed_interval, integer_3ap_witness, GroupSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    DensityAboveHalf,
    ApBelowFloor,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStep {
    pub step: usize,
    /// Prime modulus of the embedding.
    pub n: usize,
    /// Length of the integer interval before the step.
    pub interval: usize,
    pub set_size: usize,
    /// Density in `Z/N`.
    pub delta: f64,
    /// Density in the interval.
    pub interval_density: f64,
    pub factor: f64,
    pub provenance: Provenance,
    /// Longest progression inside the Bohr set.
    pub ap_length: usize,
    pub ap_difference: usize,
    /// Size of the pulled-back set on the progression.
    pub next_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub steps: Vec<IterationStep>,
    pub results: Vec<IncrementResult>,
    pub termination: Termination,
    /// Final integer set and its interval length.
    pub final_set: Vec<u64>,
    pub final_interval: usize,
}

/// Simplified density-increment iteration on `A0 ⊆ [1, n]`.
///
/// Each step embeds the current set in `Z/p` (smallest prime in `(2n, 4n]`),
/// dispatches, takes the longest progression `P = s + d{0..L-1}` inside the
/// resulting Bohr set, and pulls the best translate of `A` on `P` back to a
/// subset of `[1, L]`. A progression is a faithful copy for three-term
/// progressions, so the new set is again progression-free. Densities are
/// logged, not forced to increase: the pull-back trades the Bohr set for a
/// progression inside it.
pub fn iterate(a0: &[u64], n: u64, cfg: &PipelineConfig, max_steps: usize) -> Result<Iteration> {
    cfg.validate()?;
    if a0.is_empty() {
        return Err(Error::invalid("iteration needs a non-empty set"));
    }
    if let Some(&bad) = a0.iter().find(|&&x| x == 0 || x > n) {
        return Err(Error::invalid(format!("element {bad} outside [1, {n}]")));
    }
    if let Some(w) = integer_3ap_witness(a0) {
        return Err(Error::precondition(
            format!("A0 must be 3-AP-free; found {}, {}, {}", w.x, w.z, w.y),
            1.0,
            0.0,
        ));
    }
    let mut current: Vec<u64> = a0.to_vec();
    current.sort_unstable();
    current.dedup();
    let mut interval = n as usize;
    let mut steps = Vec::new();
    let mut results = Vec::new();
    let termination = loop {
        if current.len() as f64 / interval as f64 > 0.5 {
            break Termination::DensityAboveHalf;
        }
        if steps.len() >= max_steps {
            break Termination::MaxSteps;
        }
        let (group, set) = embed_interval(&current, interval as u64)?;
        let res = dispatch(&set, cfg)?;
        let b = bohr_build(group, &res.bohr)?;
        let ap = longest_ap_in(&b.elements)?;
        let terms = GroupSet::from_residues(group, ap.elements(group));
        let bt = best_translate(&set, &terms)?;
        let moved = set.translate(bt.t as i64);
        let next: Vec<u64> = (0..ap.length)
            .filter(|&k| moved.contains(group.add(ap.start, group.mul(k, ap.difference))))
            .map(|k| k as u64 + 1)
            .collect();
        steps.push(IterationStep {
            step: steps.len(),
            n: group.modulus(),
            interval,
            set_size: current.len(),
            delta: set.density(),
            interval_density: current.len() as f64 / interval as f64,
            factor: res.factor,
            provenance: res.provenance,
            ap_length: ap.length,
            ap_difference: ap.difference,
            next_size: next.len(),
        });
        results.push(res);
        if ap.length < cfg.ap_floor || next.is_empty() {
            break Termination::ApBelowFloor;
        }
        if integer_3ap_witness(&next).is_some() {
            return Err(Error::invariant("pull-back onto the progression created a 3-AP"));
        }
        current = next;
        interval = ap.length;
    };
    Ok(Iteration {
        steps,
        results,
        termination,
        final_set: current,
        final_interval: interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_gives_empty_trajectory() {
        let it = iterate(&[1, 2, 4, 5, 10, 11, 13, 14], 30, &PipelineConfig::default(), 0).unwrap();
        assert!(it.steps.is_empty());
        assert_eq!(it.termination, Termination::MaxSteps);
    }

    #[test]
    fn singleton_terminates_with_a_reason() {
        let it = iterate(&[1], 100, &PipelineConfig::default(), 10).unwrap();
        assert!(!it.steps.is_empty());
        assert!(it.steps.iter().all(|s| s.factor >= 1.0));
        assert_ne!(it.termination, Termination::MaxSteps);
    }

    #[test]
    fn dense_input_stops_immediately() {
        let it = iterate(&[1, 2], 3, &PipelineConfig::default(), 5).unwrap();
        assert_eq!(it.termination, Termination::DensityAboveHalf);
        assert!(it.steps.is_empty());
    }

    #[test]
    fn rejects_progressions() {
        assert!(matches!(
            iterate(&[1, 2, 3], 10, &PipelineConfig::default(), 3),
            Err(Error::Precondition { .. })
        ));
        assert!(iterate(&[0, 1], 10, &PipelineConfig::default(), 3).is_err());
    }

    #[test]
    fn pulled_back_sets_stay_progression_free() {
        let a: Vec<u64> = vec![1, 2, 4, 5, 10, 11, 13, 14, 28, 29, 31, 32, 37, 38, 40, 41];
        let it = iterate(&a, 60, &PipelineConfig::default(), 4).unwrap();
        assert!(integer_3ap_witness(&it.final_set).is_none());
        for (s, r) in it.steps.iter().zip(&it.results) {
            assert!(s.factor >= 1.0);
            assert_eq!(s.factor, r.factor);
        }
    }
}
