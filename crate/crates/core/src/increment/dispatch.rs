use super::l2::l2_with_generators;
use super::{check_density, increment_large, increment_mid, increment_nonsmoothing, increment_smoothing};
use super::{heuristic_structure, without_zero, IncrementResult, Ledger, PipelineConfig, Provenance, Structure};
use crate::bohr::{best_translate, bohr_build, BohrSpec};
use crate::error::{Error, Result};
use crate::fourier::FourierTable;
use crate::group::GroupSet;
use crate::spectrum::{case_split_from_table, dyadic_peak_from_table, smoothing_from_level, CaseVerdict, SmoothingVerdict};
use crate::span::maximal_dissociated;

/// Runs the case split and the matching pipeline, using the heuristic
/// structure search in the nonsmoothing branch.
pub fn dispatch(set: &GroupSet, cfg: &PipelineConfig) -> Result<IncrementResult> {
    dispatch_with(set, cfg, None)
}

/// As [`dispatch`], with an optional caller-supplied `(X, H)`.
///
/// If the selected pipeline fails (for instance a guard on a tiny spectrum),
/// the error is written to the ledger and the plain L^2 step runs on the
/// dyadic peak of `[delta^{1+mu}, delta^{1/10}]`; failing that, the result is
/// the trivial increment on the whole group.
pub fn dispatch_with(
    set: &GroupSet,
    cfg: &PipelineConfig,
    structure: Option<&Structure>,
) -> Result<IncrementResult> {
    cfg.validate()?;
    check_density(set)?;
    let table = FourierTable::of_set(set);
    let cs = case_split_from_table(&table, set.len(), cfg.mu)?;
    let mut ledger = Ledger::default();
    ledger.at_least("case split: MID mass >= threshold", cs.mid_mass, cs.threshold);
    ledger.at_least("case split: SML mass >= threshold", cs.sml_mass, cs.threshold);
    ledger.entry(
        "case split: delta^{mu/20} < 1 / ln(1/delta)",
        cs.side_condition.lhs,
        cs.side_condition.rhs,
        cs.side_condition.holds,
    );

    let primary = run_primary(set, &table, cs.verdict, cfg, structure, &mut ledger);

    let result = match primary {
        Ok(mut res) => {
            let mut full = ledger;
            for e in res.ledger.drain(..) {
                full.entry(e.name, e.lhs, e.rhs, e.holds);
            }
            res.ledger = full.into_entries();
            res
        }
        Err(err @ Error::Invariant(_)) => return Err(err),
        Err(err) => {
            ledger.flag(format!("dispatch: primary pipeline failed ({err}); L2 fallback"), false);
            fallback(set, &table, cfg, ledger)?
        }
    };
    result.recount(set)?;
    Ok(result)
}

fn run_primary(
    set: &GroupSet,
    table: &FourierTable,
    verdict: CaseVerdict,
    cfg: &PipelineConfig,
    structure: Option<&Structure>,
    ledger: &mut Ledger,
) -> Result<IncrementResult> {
    let (delta, mu) = (set.density(), cfg.mu);
    match verdict {
        CaseVerdict::Mid => increment_mid(set, cfg),
        CaseVerdict::Large => increment_large(set, cfg),
        CaseVerdict::Sml => {
            let peak = dyadic_peak_from_table(table, set.len(), delta.powf(1.0 + mu), delta.powf(1.0 - mu))?;
            ledger.record("dispatch: SML peak theta", peak.theta);
            let report = smoothing_from_level(&peak.level, delta, 20.0 * mu)?;
            match report.verdict {
                SmoothingVerdict::Smoothing => increment_smoothing(set, peak.theta, cfg),
                SmoothingVerdict::Nonsmoothing => {
                    let guessed;
                    let s = match structure {
                        Some(s) => s,
                        None => {
                            guessed = heuristic_structure(&peak.level.frequencies)?;
                            ledger.flag("dispatch: (X, H) from heuristic search", true);
                            &guessed
                        }
                    };
                    increment_nonsmoothing(set, &s.x, &s.h, peak.theta, cfg)
                }
            }
        }
    }
}

fn fallback(
    set: &GroupSet,
    table: &FourierTable,
    cfg: &PipelineConfig,
    ledger: Ledger,
) -> Result<IncrementResult> {
    let delta = set.density();
    let peak = dyadic_peak_from_table(table, set.len(), delta.powf(1.0 + cfg.mu), delta.powf(0.1))?;
    let gamma = without_zero(&peak.level.frequencies);
    if !gamma.is_empty() {
        let lambda = maximal_dissociated(&gamma).lambda;
        return l2_with_generators(set, &gamma, lambda, Provenance::L2, cfg, ledger);
    }
    let mut ledger = ledger;
    ledger.flag("dispatch: no non-trivial spectrum; whole-group translate", false);
    let b = bohr_build(set.group(), &BohrSpec::new(Vec::new(), 0.5)?)?;
    let bt = best_translate(set, &b.elements)?;
    Ok(IncrementResult::from_translate(Provenance::L2, set, &b, &bt, ledger))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{fives, z};
    use super::*;

    #[test]
    fn subgroup_goes_large() {
        let a = fives();
        let res = dispatch(&a, &PipelineConfig::default()).unwrap();
        assert_eq!(res.provenance, Provenance::Large);
        assert_eq!(res.factor, 5.0);
    }

    #[test]
    fn interval_goes_mid() {
        let a = GroupSet::from_elements(z(101), 0..10);
        let res = dispatch(&a, &PipelineConfig::default()).unwrap();
        assert_eq!(res.provenance, Provenance::Mid);
        assert!(res.factor >= 1.0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = z(307);
        let a = GroupSet::from_elements(g, (0..307).filter(|x| (x * 37 + x * x) % 13 == 0));
        let cfg = PipelineConfig { seed: 9, ..Default::default() };
        let r1 = dispatch(&a, &cfg).unwrap();
        let r2 = dispatch(&a, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        assert!(r1.factor >= 1.0);
    }

    #[test]
    fn rejects_full_and_empty() {
        let g = z(11);
        assert!(dispatch(&GroupSet::full(g), &PipelineConfig::default()).is_err());
        assert!(dispatch(&GroupSet::empty(g), &PipelineConfig::default()).is_err());
    }
}
