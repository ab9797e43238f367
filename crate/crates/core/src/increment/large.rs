use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::{cap_rank, check_density, regular_bohr, without_zero};
use super::{IncrementResult, Ledger, PipelineConfig, Provenance};
use crate::bohr::best_translate;
use crate::error::{Error, Result};
use crate::fourier::{convolve, count_3aps, count_3aps_set, cross_correlate, CountMode, FourierTable};
use crate::group::{GroupSet, RealFunction};
use crate::spectrum::{case_split_from_table, CaseVerdict, SpectrumLevel};
use crate::span::{chang_ratio, maximal_dissociated};

/// Largest modulus for which `T(f)` is counted in physical space.
const DIRECT_COUNT_LIMIT: usize = 1200;

/// Comparison of `T(1_A)` with `T(beta * 1_A)` for `beta = 1_B / |B|`.
///
/// `S1` sums `|A^(r)^2 A^(-2r)(1 - beta^(r)^2 beta^(-2r))|` over
/// `Delta_{delta^{1/10}}`; `S2` and `S3` sum
/// `|A^(r)^2 A^(-2r)| (1 + |beta^(r)^2 beta^(-2r)|)` over
/// `Delta_{delta^{1+mu}} \ Delta_{delta^{1/10}}` and the rest. All three are
/// divided by N, so the triangle inequality gives `|T(1_A) - T(f)| <= S1 + S2 + S3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeDecomposition {
    pub t_a: f64,
    pub t_f: f64,
    pub diff: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// `(2/N) sum |A^(r)|^3` over the S2 and S3 bands.
    pub cubic_s2: f64,
    pub cubic_s3: f64,
    pub holds: bool,
    /// `max |beta^(r) - 1|` over `Delta_{delta^{1/10}}`.
    pub beta_deviation: f64,
    /// `f = beta * 1_A`.
    #[serde(skip)]
    pub f: RealFunction,
}

impl LargeDecomposition {
    pub fn bound(&self) -> f64 {
        self.s1 + self.s2 + self.s3
    }
}

pub fn large_decomposition(
    set: &GroupSet,
    bohr: &GroupSet,
    mu: f64,
    tolerance: f64,
) -> Result<LargeDecomposition> {
    let g = set.group();
    g.check_same(&bohr.group())?;
    check_density(set)?;
    if bohr.is_empty() {
        return Err(Error::invalid("large decomposition needs a non-empty Bohr set"));
    }
    let n = g.modulus();
    let nf = n as f64;
    let delta = set.density();
    let at = FourierTable::of_set(set);
    let bt = FourierTable::of_set(bohr);
    let bsz = bohr.len() as f64;
    let beta: Vec<Complex64> = bt.coeffs().iter().map(|c| c / bsz).collect();
    let hi = SpectrumLevel::from_table(&at, set.len(), delta.powf(0.1))?.frequencies;
    let lo = SpectrumLevel::from_table(&at, set.len(), delta.powf(1.0 + mu))?.frequencies;

    let beta_fn = RealFunction::new(g, bohr.indicator().iter().map(|&b| f64::from(u8::from(b)) / bsz).collect())?;
    let f = convolve(&beta_fn, &RealFunction::indicator(set))?;
    let t_a = count_3aps_set(set, CountMode::Direct)?;
    let mode = if n <= DIRECT_COUNT_LIMIT { CountMode::Direct } else { CountMode::Fourier };
    let t_f = count_3aps(&f, mode);

    let (mut s1, mut s2, mut s3, mut c2, mut c3) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut beta_deviation: f64 = 0.0;
    for r in 0..n {
        let r2 = g.neg(g.add(r, r));
        let a = at.coeffs()[r];
        let term = a * a * at.coeffs()[r2];
        let m = beta[r] * beta[r] * beta[r2];
        if hi.contains(r) {
            s1 += (term * (Complex64::new(1.0, 0.0) - m)).norm();
            beta_deviation = beta_deviation.max((beta[r] - 1.0).norm());
        } else if lo.contains(r) {
            s2 += term.norm() * (1.0 + m.norm());
            c2 += 2.0 * a.norm().powi(3);
        } else {
            s3 += term.norm() * (1.0 + m.norm());
            c3 += 2.0 * a.norm().powi(3);
        }
    }
    let (s1, s2, s3) = (s1 / nf, s2 / nf, s3 / nf);
    let diff = (t_a - t_f).abs();
    let bound = s1 + s2 + s3;
    Ok(LargeDecomposition {
        t_a,
        t_f,
        diff,
        s1,
        s2,
        s3,
        cubic_s2: c2 / nf,
        cubic_s3: c3 / nf,
        holds: diff <= bound + tolerance * bound.max(t_a.abs()),
        beta_deviation,
        f,
    })
}

/// Default target factor `max(2, c mu ln(1/delta) / (ln ln(1/delta))^5)`.
pub(crate) fn default_large_l(delta: f64, mu: f64, c: f64) -> f64 {
    let ln_inv = (1.0 / delta).ln();
    let lnln = ln_inv.ln();
    if lnln <= 0.0 {
        return 2.0;
    }
    (c * mu * ln_inv / lnln.powi(5)).max(2.0)
}

/// Increment when neither the MID nor the SML band dominates.
///
/// `Delta_{delta^{1/10}}` is covered by a maximal dissociated `Lambda`; on
/// `B(Lambda, gamma')` with `gamma' <= c delta^2 / |Lambda|` every frequency
/// of that spectrum has `|beta^(r) - 1| <= 2 pi delta^2 c`. The best translate
/// is returned; the ledger carries the decomposition of `T(1_A) - T(f)` and,
/// when `max f < L delta`, the statistics of `S = {t : f(t) >= delta/2}`.
pub fn increment_large(set: &GroupSet, cfg: &PipelineConfig) -> Result<IncrementResult> {
    cfg.validate()?;
    check_density(set)?;
    let g = set.group();
    let table = FourierTable::of_set(set);
    let cs = case_split_from_table(&table, set.len(), cfg.mu)?;
    if cs.verdict != CaseVerdict::Large {
        return Err(Error::precondition(
            "MID and SML band masses below 0.1 delta^{mu/5} |A|^3",
            cs.mid_mass.max(cs.sml_mass),
            cs.threshold,
        ));
    }
    let (delta, c) = (cs.delta, cfg.c_omega);
    let mut ledger = Ledger::default();
    ledger.at_most("large: max(MID, SML) mass < threshold", cs.mid_mass.max(cs.sml_mass), cs.threshold);
    let theta = delta.powf(0.1);
    let hi = SpectrumLevel::from_table(&table, set.len(), theta)?.frequencies;
    let lambda = maximal_dissociated(&without_zero(&hi)).lambda;
    ledger.record("large: Chang ratio |Lambda| theta^2 / ln(1/delta)", chang_ratio(lambda.len(), theta, delta));
    let lambda = cap_rank(lambda, &table, cfg.max_rank, &mut ledger);
    let rank = lambda.len();
    let radius = if rank == 0 { 0.5 } else { (c * delta * delta / rank as f64).min(0.5) };
    let b = regular_bohr(g, &lambda, radius)?;
    ledger.record("large: rank", rank as f64);
    ledger.at_least("large: radius >> delta^3", b.spec.radius, delta.powi(3) / c);
    ledger.record("large: |B|", b.len() as f64);

    let dec = large_decomposition(set, &b.elements, cfg.mu, cfg.tolerance)?;
    ledger.at_most(
        "large: max |beta^(r) - 1| over Delta_{delta^{1/10}} <= 2 pi delta^2 c",
        dec.beta_deviation,
        TAU * delta * delta * c,
    );
    ledger.entry("large: |T(1_A) - T(f)| <= S1 + S2 + S3", dec.diff, dec.bound(), dec.holds);
    ledger.record("large: S1", dec.s1);
    ledger.record("large: S2", dec.s2);
    ledger.record("large: S3", dec.s3);
    ledger.at_most(
        "large: |T(1_A) - T(f)| <= S1 + (2/N) sum |A^|^3 outside Delta_{delta^{1/10}}",
        dec.diff,
        dec.s1 + dec.cubic_s2 + dec.cubic_s3,
    );
    if !dec.holds {
        return Err(Error::invariant(format!(
            "triangle bound fails: |T(1_A) - T(f)| = {} > {}",
            dec.diff,
            dec.bound()
        )));
    }

    let l = cfg.large_l.unwrap_or_else(|| default_large_l(delta, cfg.mu, c));
    ledger.record("large: L", l);
    let bt = best_translate(set, &b.elements)?;
    let res = IncrementResult::from_translate(Provenance::Large, set, &b, &bt, Ledger::default());
    if !ledger.at_least("large: max_t f(t) >= L delta", res.new_density, l * delta) {
        let counts = cross_correlate(&RealFunction::indicator(set), &RealFunction::indicator(&b.elements))?;
        let half = delta * b.len() as f64 / 2.0;
        let s = GroupSet::from_residues(
            g,
            counts
                .values()
                .iter()
                .enumerate()
                .filter(|(_, v)| v.round() >= half)
                .map(|(t, _)| g.neg(t)),
        );
        ledger.at_least("large: |S| >= N / L", s.len() as f64, g.modulus() as f64 / l);
        let t_s = count_3aps_set(&s, CountMode::Direct)?;
        ledger.at_least("large: T(f) >= (delta/2)^3 T(S)", dec.t_f, (delta / 2.0).powi(3) * t_s);
        ledger.record("large: T(S), lower bound cited not derived", t_s);
    }
    Ok(IncrementResult {
        ledger: ledger.into_entries(),
        ..res
    })
}
