use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::l2::l2_with_generators;
use super::selection::selection_refine;
use super::{cap_rank, check_density, regular_bohr, without_zero};
use super::{IncrementResult, Ledger, PipelineConfig, Provenance};
use crate::bohr::best_translate;
use crate::error::{Error, Result};
use crate::fourier::{cross_correlate, FourierTable};
use crate::group::{GroupSet, RealFunction};
use crate::spectrum::{smoothing_from_level, SpectrumLevel};
use crate::span::{bkb_extract, maximal_dissociated, span_of};

/// `|1_{A_t}^(x)|^2` for every t, where `A_t = (A + t) ∩ B`.
///
/// `1_{A_t}^(x) = sum_{y in A} u(y + t)` with `u = 1_B e(-x . / N)`, so the
/// whole row is two real cross-correlations.
fn at_coefficients(set: &GroupSet, bohr: &GroupSet, x: usize) -> Result<Vec<f64>> {
    let g = set.group();
    let n = g.modulus();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for y in bohr.iter() {
        let angle = -TAU * g.mul(x, y) as f64 / n as f64;
        re[y] = angle.cos();
        im[y] = angle.sin();
    }
    let ind = RealFunction::indicator(set);
    let cr = cross_correlate(&ind, &RealFunction::new(g, re)?)?;
    let ci = cross_correlate(&ind, &RealFunction::new(g, im)?)?;
    Ok(cr
        .values()
        .iter()
        .zip(ci.values())
        .map(|(a, b)| a * a + b * b)
        .collect())
}

/// Both sides of `sum_t |1_{A_t}^(x)|^2 = (1/N) sum_h |B^(h) A^(x + h)|^2`
/// for a symmetric `bohr`.
pub fn for_identity(set: &GroupSet, bohr: &GroupSet, x: usize) -> Result<(f64, f64)> {
    set.group().check_same(&bohr.group())?;
    let g = set.group();
    let lhs = at_coefficients(set, bohr, x)?.iter().sum();
    let a = FourierTable::of_set(set);
    let b = FourierTable::of_set(bohr);
    let rhs = (0..g.modulus())
        .map(|h| b.coeffs()[h].norm_sqr() * a.coeffs()[g.add(x, h)].norm_sqr())
        .sum::<f64>()
        / g.modulus() as f64;
    Ok((lhs, rhs))
}

/// Dyadic band `[eta, 2 eta)` above `floor` carrying the most squared mass.
fn dyadic_band(vals: &[(usize, f64)], floor: f64) -> Option<(f64, Vec<usize>)> {
    let mut bands: Vec<(f64, Vec<usize>)> = Vec::new();
    for &(x, v) in vals {
        if v < floor || v <= 0.0 {
            continue;
        }
        let j = (v / floor).log2().floor().max(0.0) as usize;
        if bands.len() <= j {
            bands.resize(j + 1, (0.0, Vec::new()));
        }
        bands[j].0 += v * v;
        bands[j].1.push(x);
    }
    let mut best: Option<usize> = None;
    for (j, band) in bands.iter().enumerate() {
        if band.1.is_empty() {
            continue;
        }
        if best.is_none_or(|b| band.0 > bands[b].0) {
            best = Some(j);
        }
    }
    best.map(|j| (floor * 2f64.powi(j as i32), std::mem::take(&mut bands[j].1)))
}

/// Increment from a supplied structure `Delta_theta ≈ X + H`.
///
/// The Bohr set is generated by a span cover of `H` at a regular radius in
/// `[1/(12|Lambda|), 1/(6|Lambda|)]`, small enough that every `h` in the span
/// has `|B^(h)| >= |B|/2`. If no translate of `A` already reaches density
/// `delta^{1-f}/c` on it, the pipeline selects `Y ⊆ X`, fixes the translate
/// with the most Fourier mass on `Y`, extracts low-dimensional pieces `Z_i`
/// of `Y` until `|U| >= delta^{-3/2}` and finishes with the L^2 step on
/// `U + H`. The better of the two candidate increments is returned.
pub fn increment_nonsmoothing(
    set: &GroupSet,
    x: &GroupSet,
    h: &GroupSet,
    theta: f64,
    cfg: &PipelineConfig,
) -> Result<IncrementResult> {
    cfg.validate()?;
    check_density(set)?;
    let g = set.group();
    g.check_same(&x.group())?;
    g.check_same(&h.group())?;
    if x.is_empty() || h.is_empty() {
        return Err(Error::invalid("nonsmoothing needs non-empty X and H"));
    }
    let n = g.modulus();
    let (c, f, delta) = (cfg.c_omega, cfg.f, set.density());
    let table = FourierTable::of_set(set);
    let level = SpectrumLevel::from_table(&table, set.len(), theta)?;
    let spec = &level.frequencies;
    let dsz = spec.len() as f64;
    let mut ledger = Ledger::default();

    let report = smoothing_from_level(&level, delta, 20.0 * cfg.mu)?;
    ledger.entry(
        "nonsmoothing: E_8 < delta^{-20 mu} theta^8 delta |D|^8",
        report.e8,
        report.threshold,
        report.e8 < report.threshold,
    );
    let (hs, xs) = (h.len() as f64, x.len() as f64);
    ledger.at_most("nonsmoothing: |H| << |D|^{1/3+21f}", hs, c * dsz.powf(1.0 / 3.0 + 21.0 * f));
    ledger.at_most("nonsmoothing: |X| << |D|^{2/3+2f}", xs, c * dsz.powf(2.0 / 3.0 + 2.0 * f));
    ledger.at_most(
        "nonsmoothing: |H+H| << |H|^{1+f}",
        h.sumset(h)?.len() as f64,
        c * hs.powf(1.0 + f),
    );
    let hits = x.sumset(h)?.intersection_size(spec) as f64;
    ledger.at_least("nonsmoothing: |(X+H) ∩ D| >> |D|^{1-21f}", hits, dsz.powf(1.0 - 21.0 * f) / c);

    let lambda_h = cap_rank(maximal_dissociated(&without_zero(h)).lambda, &table, cfg.max_rank, &mut ledger);
    let rank = lambda_h.len();
    let radius = if rank == 0 { 0.5 } else { 1.0 / (6.0 * rank as f64) };
    let b = regular_bohr(g, &lambda_h, radius)?;
    ledger.record("nonsmoothing: rank", rank as f64);
    ledger.record("nonsmoothing: regular radius", b.spec.radius);
    ledger.record("nonsmoothing: |B|", b.len() as f64);
    let span = span_of(&GroupSet::from_residues(g, lambda_h.iter().copied()));
    let b_table = FourierTable::of_set(&b.elements);
    let bsz = b.len() as f64;
    let worst = h
        .iter()
        .filter(|&v| span.contains(v))
        .map(|v| b_table.coeffs()[v].norm() / bsz)
        .fold(f64::INFINITY, f64::min);
    if worst.is_finite() {
        if worst < 0.5 - 1e-9 {
            return Err(Error::invariant(format!(
                "|B^(h)| / |B| = {worst} < 1/2 for some h in H ∩ Span(Lambda)"
            )));
        }
        ledger.at_least("nonsmoothing: min_{h in H} |B^(h)| / |B| >= 1/2", worst, 0.5);
    }

    let direct = best_translate(set, &b.elements)?;
    let mut direct_res =
        IncrementResult::from_translate(Provenance::Nonsmoothing, set, &b, &direct, Ledger::default());
    let goal = delta.powf(1.0 - f) / c;
    let finish_direct = |mut res: IncrementResult, ledger: Ledger| {
        res.ledger = ledger.into_entries();
        Ok(res)
    };
    if ledger.at_least("nonsmoothing: max_t |A_t| / |B| >= delta^{1-f} / c", direct_res.new_density, goal) {
        return finish_direct(direct_res, ledger);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut probes = vec![0usize];
    probes.extend((0..3).map(|_| rng.gen_range(0..n)));
    for p in probes {
        let (lhs, rhs) = for_identity(set, &b.elements, p)?;
        let ok = (lhs - rhs).abs() <= cfg.tolerance * rhs.abs().max(1.0);
        ledger.entry(format!("nonsmoothing: identity (for) at x = {p}"), lhs, rhs, ok);
        if !ok {
            return Err(Error::invariant(format!(
                "transform identity fails at x = {p}: {lhs} vs {rhs}"
            )));
        }
    }

    let eps = 5.0 * f;
    if hits == 0.0 {
        ledger.flag("nonsmoothing: (X+H) meets Delta_theta", false);
        return finish_direct(direct_res, ledger);
    }
    let c_sel = hits / (xs * hs.powf(1.0 - eps)) * (1.0 - 1e-12);
    let cert = selection_refine(x, h, spec, c_sel, eps, cfg.selection_samples, cfg.seed)?;
    ledger.at_least("selection: |X'| >= (c/4)|X||H|^{-eps}", cert.size_lhs, cert.size_rhs);
    ledger.flag("selection: Y-conclusion on sampled subsets", cert.y_failures == 0);
    let mut y = cert.x_prime.to_vec();
    if y.len() > cfg.y_cap {
        ledger.at_most("nonsmoothing: |Y| within cap", y.len() as f64, cfg.y_cap as f64);
        y.truncate(cfg.y_cap);
    }
    if y.is_empty() {
        return finish_direct(direct_res, ledger);
    }

    let mut mass = vec![0.0; n];
    for &xv in &y {
        for (m, v) in mass.iter_mut().zip(at_coefficients(set, &b.elements, xv)?) {
            *m += v;
        }
    }
    let t = mass
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > mass[best] { i } else { best });
    let a_t = set.translate(t as i64).intersection(&b.elements)?;
    ledger.record("nonsmoothing: chosen t", t as f64);
    ledger.record("nonsmoothing: |A_t| / (delta^2 |B|)", a_t.len() as f64 / (delta * delta * bsz));
    if a_t.is_empty() {
        ledger.flag("nonsmoothing: A_t non-empty", false);
        return finish_direct(direct_res, ledger);
    }
    let at_size = a_t.len() as f64;
    ledger.record("nonsmoothing: sum_Y |1_{A_t}^|^2 / |A_t|^2", mass[t] / (at_size * at_size));

    let at_table = FourierTable::of_set(&a_t);
    let floor = (delta.powf(0.5 + f) / c).min(1.0);
    let goal_u = delta.powf(-1.5);
    let mut remaining = y.clone();
    let mut u = GroupSet::empty(g);
    let mut lambda_u: Vec<usize> = Vec::new();
    for round in 0..cfg.max_rounds {
        if u.len() as f64 >= goal_u || remaining.is_empty() {
            break;
        }
        let vals: Vec<(usize, f64)> = remaining
            .iter()
            .map(|&v| (v, at_table.coeffs()[v].norm() / at_size))
            .collect();
        let Some((eta, band)) = dyadic_band(&vals, floor) else {
            break;
        };
        let s_set = GroupSet::from_residues(g, band);
        let ext = bkb_extract(&s_set, eta, at_size / n as f64, cfg.extraction_budget, c, cfg.round_seed(round));
        ledger.at_least(
            format!("nonsmoothing: round {round} |Z_i| >> eta |S|"),
            ext.cover.covered.len() as f64,
            ext.target,
        );
        let z = without_zero(&ext.cover.covered).difference(&u)?;
        if z.is_empty() {
            break;
        }
        remaining.retain(|&v| !z.contains(v));
        u = u.union(&z)?;
        lambda_u.extend(ext.cover.lambda);
    }
    ledger.at_least("nonsmoothing: |U| >= delta^{-3/2}", u.len() as f64, goal_u);
    if u.is_empty() {
        return finish_direct(direct_res, ledger);
    }
    let uh = u.sumset(h)?;
    ledger.at_least(
        "nonsmoothing: |U+H| >> |U||H|^{1-10f}",
        uh.len() as f64,
        u.len() as f64 * hs.powf(1.0 - 10.0 * f) / c,
    );
    let mut lambda = Vec::new();
    let mut seen = GroupSet::empty(g);
    for v in lambda_u.into_iter().chain(lambda_h) {
        if seen.insert(v) {
            lambda.push(v);
        }
    }
    ledger.record("nonsmoothing: |Lambda_U| + |Lambda_H|", lambda.len() as f64);
    let gamma = without_zero(&uh);
    let l2 = l2_with_generators(set, &gamma, lambda, Provenance::Nonsmoothing, cfg, ledger)?;
    if l2.factor >= direct_res.factor {
        return Ok(l2);
    }
    let mut ledger = Ledger::default();
    for e in &l2.ledger {
        ledger.entry(e.name.clone(), e.lhs, e.rhs, e.holds);
    }
    ledger.at_least("nonsmoothing: U+H step beats direct translate", l2.factor, direct_res.factor);
    direct_res.ledger = ledger.into_entries();
    Ok(direct_res)
}
