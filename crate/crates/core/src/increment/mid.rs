use super::l2::l2_with_generators;
use super::{check_density, without_zero, IncrementResult, Ledger, PipelineConfig, Provenance};
use crate::error::{Error, Result};
use crate::fourier::FourierTable;
use crate::group::GroupSet;
use crate::spectrum::{case_split_from_table, dyadic_peak_from_table, CaseVerdict};
use crate::span::{bkb_extract, maximal_dissociated};

/// Increment when the middle band `[delta^{1-mu}, delta^{1/10}]|A|` carries
/// the L^3 mass.
///
/// Picks the dyadic peak `theta`, then pulls disjoint low-dimensional pieces
/// `D_1, D_2, ...` out of `Delta_theta` with repeated extraction (each on
/// what the previous rounds left), and runs the L^2 step on their union with
/// the union of their generators.
pub fn increment_mid(set: &GroupSet, cfg: &PipelineConfig) -> Result<IncrementResult> {
    cfg.validate()?;
    check_density(set)?;
    let table = FourierTable::of_set(set);
    let cs = case_split_from_table(&table, set.len(), cfg.mu)?;
    if cs.verdict != CaseVerdict::Mid {
        return Err(Error::precondition(
            "MID band mass >= 0.1 delta^{mu/5} |A|^3",
            cs.mid_mass,
            cs.threshold,
        ));
    }
    let (delta, mu, c) = (cs.delta, cfg.mu, cfg.c_omega);
    let mut ledger = Ledger::default();
    ledger.at_least("mid: band mass >= threshold", cs.mid_mass, cs.threshold);
    let peak = dyadic_peak_from_table(&table, set.len(), delta.powf(1.0 - mu), delta.powf(0.1))?;
    let theta = peak.theta;
    let level = &peak.level.frequencies;
    let ln_inv = (1.0 / delta).ln();
    ledger.record("mid: theta", theta);
    ledger.at_least(
        "mid: |Delta_theta| >> theta^-3 delta^{mu/5} / ln(1/delta)",
        level.len() as f64,
        theta.powi(-3) * delta.powf(mu / 5.0) / ln_inv / c,
    );

    let wanted = (c * delta.powf(-mu / 2.0)).ceil().max(1.0);
    let rounds = (wanted as usize).min(cfg.max_rounds);
    ledger.at_most("mid: rounds ceil(c delta^{-mu/2}) within cap", wanted, cfg.max_rounds as f64);
    let mut residual = without_zero(level);
    let mut gamma = GroupSet::empty(set.group());
    let mut lambda = Vec::new();
    for i in 0..rounds {
        if residual.is_empty() {
            break;
        }
        let ext = bkb_extract(&residual, theta, delta, cfg.extraction_budget, c, cfg.round_seed(i));
        ledger.at_least(
            format!("mid: round {i} |D_i| >= theta |D| / c"),
            ext.cover.covered.len() as f64,
            ext.target,
        );
        let got = without_zero(&ext.cover.covered);
        if got.is_empty() {
            break;
        }
        gamma = gamma.union(&got)?;
        residual = residual.difference(&got)?;
        lambda.extend(ext.cover.lambda);
    }
    if gamma.is_empty() {
        ledger.flag("mid: extraction produced frequencies", false);
        gamma = without_zero(level);
        lambda = maximal_dissociated(&gamma).lambda;
    }
    ledger.at_least(
        "mid: |Gamma| >> delta^{-mu/4} theta^-2",
        gamma.len() as f64,
        delta.powf(-mu / 4.0) * theta.powi(-2) / c,
    );
    ledger.at_most(
        "mid: dim(Gamma) << delta^{-1+mu/3}",
        lambda.len() as f64,
        c * delta.powf(-1.0 + mu / 3.0),
    );
    if gamma.is_empty() {
        return Err(Error::precondition("non-trivial frequencies in the MID peak", 0.0, 1.0));
    }
    l2_with_generators(set, &gamma, lambda, Provenance::Mid, cfg, ledger)
}
