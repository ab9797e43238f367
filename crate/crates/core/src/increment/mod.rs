//! Density increment pipelines.
//!
//! Every pipeline ends in the same place: a Bohr set `B`, a translate `t`
//! and the exact count `|(A + t) ∩ B|`. The surrounding machinery (spectral
//! extraction, selection, energy bounds) decides which frequencies generate
//! `B`; each asymptotic hypothesis it leans on is written to the ledger with
//! both sides evaluated, so a run documents which hypotheses actually held
//! at the given scale.

mod config;
mod dispatch;
mod iterate;
mod l2;
mod large;
mod ledger;
mod mid;
mod nonsmoothing;
mod selection;
mod smoothing;
mod structure;

pub use config::PipelineConfig;
pub use dispatch::{dispatch, dispatch_with};
pub use iterate::{iterate, Iteration, IterationStep, Termination};
pub use l2::l2_increment;
pub use large::{increment_large, large_decomposition, LargeDecomposition};
pub use ledger::{Ledger, LedgerEntry};
pub use mid::increment_mid;
pub use nonsmoothing::{for_identity, increment_nonsmoothing};
pub use selection::{selection_refine, SelectionCertificate};
pub use smoothing::increment_smoothing;
pub use structure::{heuristic_structure, Structure};

use serde::{Deserialize, Serialize};

use crate::bohr::{bohr_build, build_regular, BestTranslate, BohrMaterialized, BohrSpec};
use crate::error::{Error, Result};
use crate::fourier::FourierTable;
use crate::group::{CyclicGroup, GroupSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    L2,
    Mid,
    Smoothing,
    Nonsmoothing,
    Large,
}

/// Outcome of one increment step.
///
/// `new_density = |(A + t) ∩ B| / |B|` and `factor = new_density / delta`,
/// where `B` is rebuilt from `bohr`; [`IncrementResult::recount`] checks both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementResult {
    pub provenance: Provenance,
    pub bohr: BohrSpec,
    pub t: usize,
    pub old_density: f64,
    pub new_density: f64,
    pub factor: f64,
    pub ledger: Vec<LedgerEntry>,
}

/// Factor as one division of exact integers, so equal densities give 1.
fn exact_factor(count: usize, n: usize, a: usize, b: usize) -> f64 {
    (count as f64 * n as f64) / (a as f64 * b as f64)
}

impl IncrementResult {
    pub(crate) fn from_translate(
        provenance: Provenance,
        set: &GroupSet,
        bohr: &BohrMaterialized,
        bt: &BestTranslate,
        ledger: Ledger,
    ) -> Self {
        IncrementResult {
            provenance,
            bohr: bohr.spec.clone(),
            t: bt.t,
            old_density: set.density(),
            new_density: bt.count as f64 / bohr.len() as f64,
            factor: exact_factor(bt.count, set.modulus(), set.len(), bohr.len()),
            ledger: ledger.into_entries(),
        }
    }

    /// Rebuilds `B`, recounts `|(A + t) ∩ B|` and checks both stored
    /// densities and the factor bit for bit.
    pub fn recount(&self, set: &GroupSet) -> Result<usize> {
        let b = bohr_build(set.group(), &self.bohr)?;
        let count = set.translate(self.t as i64).intersection_size(&b.elements);
        let density = count as f64 / b.len() as f64;
        let factor = exact_factor(count, set.modulus(), set.len(), b.len());
        if density != self.new_density || factor != self.factor || set.density() != self.old_density
        {
            return Err(Error::invariant(format!(
                "recount mismatch at t = {}: stored density {} factor {}, recount {} / {}",
                self.t,
                self.new_density,
                self.factor,
                count,
                b.len()
            )));
        }
        Ok(count)
    }

    pub fn all_hypotheses_hold(&self) -> bool {
        self.ledger.iter().all(|e| e.holds)
    }
}

pub(crate) fn without_zero(set: &GroupSet) -> GroupSet {
    let mut s = set.clone();
    s.remove(0);
    s
}

/// Keeps at most `max_rank` generators, preferring large `|A^(lambda)|`.
pub(crate) fn cap_rank(
    mut lambda: Vec<usize>,
    table: &FourierTable,
    max_rank: usize,
    ledger: &mut Ledger,
) -> Vec<usize> {
    if lambda.len() <= max_rank {
        return lambda;
    }
    let before = lambda.len();
    let mags = table.magnitudes();
    lambda.sort_by(|&x, &y| mags[y].total_cmp(&mags[x]).then(x.cmp(&y)));
    lambda.truncate(max_rank);
    ledger.at_most("rank cap: generators kept by descending |A^|", before as f64, max_rank as f64);
    lambda
}

/// Regular `B(lambda, gamma')` with `gamma' in [radius/2, radius]`; the whole
/// group when `lambda` is empty.
pub(crate) fn regular_bohr(
    group: CyclicGroup,
    lambda: &[usize],
    radius: f64,
) -> Result<BohrMaterialized> {
    if lambda.is_empty() {
        return bohr_build(group, &BohrSpec::new(Vec::new(), 0.5)?);
    }
    build_regular(group, &BohrSpec::new(lambda.to_vec(), radius.min(0.5))?)
}

pub(crate) fn check_density(set: &GroupSet) -> Result<()> {
    if set.is_empty() || set.len() == set.modulus() {
        return Err(Error::invalid(format!(
            "increment needs 0 < delta < 1, got |A| = {} in Z/{}",
            set.len(),
            set.modulus()
        )));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::group::{CyclicGroup, GroupSet};

    pub fn z(n: usize) -> CyclicGroup {
        CyclicGroup::new(n).unwrap()
    }

    pub fn fives() -> GroupSet {
        GroupSet::multiples(z(100), 5)
    }
}
