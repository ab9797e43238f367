use super::l2::l2_with_generators;
use super::{check_density, without_zero, IncrementResult, Ledger, PipelineConfig, Provenance};
use crate::error::{Error, Result};
use crate::fourier::FourierTable;
use crate::group::GroupSet;
use crate::spectrum::{log_energy_2m, smoothing_from_level, SmoothingVerdict, SpectrumLevel};
use crate::span::{bk_large_energy_extract, maximal_dissociated};

/// Increment for a `20 mu`-smoothing spectrum.
///
/// With `s = floor(ln |Delta_theta|)` the energy `E_{2s} = kappa |Delta|^{2s}`
/// drives the large-energy extraction; the L^2 step then runs on
/// `Delta_theta ∩ Span(Lambda)`.
pub fn increment_smoothing(
    set: &GroupSet,
    theta: f64,
    cfg: &PipelineConfig,
) -> Result<IncrementResult> {
    cfg.validate()?;
    check_density(set)?;
    let table = FourierTable::of_set(set);
    let level = SpectrumLevel::from_table(&table, set.len(), theta)?;
    let delta = set.density();
    let report = smoothing_from_level(&level, delta, 20.0 * cfg.mu)?;
    if report.verdict != SmoothingVerdict::Smoothing {
        return Err(Error::precondition(
            "E_8(Delta_theta) >= delta^{-20 mu} theta^8 delta |Delta_theta|^8",
            report.e8,
            report.threshold,
        ));
    }
    let mut ledger = Ledger::default();
    ledger.at_least("smoothing: E_8 >= delta^{-20 mu} theta^8 delta |D|^8", report.e8, report.threshold);
    let d = level.len() as f64;
    let s = d.ln().floor();
    if s < 2.0 {
        return Err(Error::precondition("s = floor(ln |Delta_theta|) >= 2", s, 2.0));
    }
    let s = s as u32;
    let sf = f64::from(s);
    let ln_e2s = log_energy_2m(&level.frequencies, s)?;
    ledger.record("smoothing: s", sf);
    ledger.at_least(
        "smoothing: ln E_2s >= ((s-1)/3) ln E_8 - ((s-4)/3) ln |D|",
        ln_e2s,
        (sf - 1.0) / 3.0 * report.e8.ln() - (sf - 4.0) / 3.0 * d.ln(),
    );
    let kappa = (ln_e2s - 2.0 * sf * d.ln()).exp();
    ledger.record("smoothing: kappa = E_2s / |D|^2s", kappa);
    let ext = bk_large_energy_extract(
        &level.frequencies,
        s,
        kappa,
        cfg.extraction_budget,
        cfg.c_omega,
        cfg.seed,
    )?;
    ledger.at_least(
        "smoothing: ln E_2s >= ln(10^s s^2s |D|^s)",
        ext.hypothesis_lhs,
        ext.hypothesis_rhs,
    );
    let cover = &ext.extraction.cover;
    ledger.at_least(
        "smoothing: |Span(Lambda) ∩ D| >> kappa^{1/2s} |D| ln^{-3/2} |D|",
        cover.covered.len() as f64,
        ext.extraction.target,
    );
    ledger.at_most(
        "smoothing: |Lambda| << kappa^{-1/2s} ln^{3/2} |D|",
        cover.lambda.len() as f64,
        ext.extraction.lambda_cap as f64,
    );
    let mut gamma = without_zero(&cover.covered);
    let mut lambda = cover.lambda.clone();
    if gamma.is_empty() {
        ledger.flag("smoothing: extraction produced frequencies", false);
        gamma = without_zero(&level.frequencies);
        lambda = maximal_dissociated(&gamma).lambda;
    }
    if gamma.is_empty() {
        return Err(Error::precondition("non-trivial frequencies in Delta_theta", 0.0, 1.0));
    }
    l2_with_generators(set, &gamma, lambda, Provenance::Smoothing, cfg, ledger)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::z;
    use super::*;

    #[test]
    fn subgroup_spectrum_is_smoothing() {
        // A = multiples of 10 in Z/500 minus a few points: the spectrum at a
        // moderate theta is the annihilator subgroup of order 10.
        let g = z(500);
        let mut a = GroupSet::multiples(g, 10);
        for x in [10, 30, 140] {
            a.remove(x);
        }
        let res = increment_smoothing(&a, 0.5, &PipelineConfig::default()).unwrap();
        assert_eq!(res.provenance, Provenance::Smoothing);
        assert!(res.factor > 1.0);
        res.recount(&a).unwrap();
    }

    #[test]
    fn tiny_spectrum_is_rejected() {
        // theta = 1 keeps only r = 0, so s = floor(ln 1) < 2
        let g = z(101);
        let a = GroupSet::from_elements(g, [1, 2, 3, 9, 40]);
        match increment_smoothing(&a, 1.0, &PipelineConfig::default()) {
            Err(Error::Precondition { what, .. }) => assert!(what.contains("s = floor")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }
}
