use super::{cap_rank, check_density, regular_bohr, without_zero, IncrementResult, Ledger};
use super::{PipelineConfig, Provenance};
use crate::bohr::best_translate;
use crate::error::{Error, Result};
use crate::fourier::FourierTable;
use crate::group::GroupSet;
use crate::span::maximal_dissociated;

/// L^2 increment from the mass `nu = sum_{r in Gamma \ 0} |A^(r)|^2 / |A|^2`.
///
/// `Gamma \ 0` is covered by a maximal dissociated `Lambda`, the Bohr set is
/// `B(Lambda, gamma')` with `gamma'` regular in `[1/(6|Lambda|), 1/(3|Lambda|)]`,
/// and the translate is the exact argmax of `|(A + t) ∩ B|`.
pub fn l2_increment(
    set: &GroupSet,
    gamma: &GroupSet,
    cfg: &PipelineConfig,
) -> Result<IncrementResult> {
    cfg.validate()?;
    set.group().check_same(&gamma.group())?;
    let nonzero = without_zero(gamma);
    if nonzero.is_empty() {
        return Err(Error::invalid("Gamma needs a non-zero frequency"));
    }
    let lambda = maximal_dissociated(&nonzero).lambda;
    l2_with_generators(set, &nonzero, lambda, Provenance::L2, cfg, Ledger::default())
}

/// L^2 step with a caller-chosen generating set (expected to span `gamma`).
pub(crate) fn l2_with_generators(
    set: &GroupSet,
    gamma: &GroupSet,
    lambda: Vec<usize>,
    provenance: Provenance,
    cfg: &PipelineConfig,
    mut ledger: Ledger,
) -> Result<IncrementResult> {
    check_density(set)?;
    let table = FourierTable::of_set(set);
    let a = set.len() as f64;
    let nu: f64 = gamma
        .iter()
        .filter(|&r| r != 0)
        .map(|r| table.coeffs()[r].norm_sqr())
        .sum::<f64>()
        / (a * a);
    ledger.record("l2: nu = sum_{Gamma \\ 0} |A^|^2 / |A|^2", nu);
    ledger.record("l2: |Gamma \\ 0|", without_zero(gamma).len() as f64);
    let lambda = cap_rank(lambda, &table, cfg.max_rank, &mut ledger);
    let rank = lambda.len();
    let radius = if rank == 0 { 0.5 } else { 1.0 / (3.0 * rank as f64) };
    let b = regular_bohr(set.group(), &lambda, radius)?;
    ledger.record("l2: rank", rank as f64);
    ledger.record("l2: regular radius", b.spec.radius);
    ledger.record("l2: |B|", b.len() as f64);
    let bt = best_translate(set, &b.elements)?;
    let mut res = IncrementResult::from_translate(provenance, set, &b, &bt, Ledger::default());
    ledger.at_least(
        "l2: factor >= 1 + nu / c_omega",
        res.factor,
        1.0 + nu / cfg.c_omega,
    );
    ledger.at_least("l2: factor >= 1 (mean translate)", res.factor, 1.0);
    res.ledger = ledger.into_entries();
    Ok(res)
}
