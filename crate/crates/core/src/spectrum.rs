//! Large spectra, dyadic level sets, higher additive energies, the smoothing
//! classifier and the three-way L^3 case split.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{CountMode, FourierTable};
use crate::group::GroupSet;

/// Magnitudes are compared after rounding to this grid so level sets are
/// reproducible across transform backends.
pub const MAGNITUDE_GRID: f64 = 1e-9;

#[inline]
pub(crate) fn round_mag(x: f64) -> f64 {
    (x / MAGNITUDE_GRID).round() * MAGNITUDE_GRID
}

/// `|coeff| >= bound` under the rounding convention.
#[inline]
pub(crate) fn at_least(coeff: f64, bound: f64) -> bool {
    round_mag(coeff) >= round_mag(bound)
}

/// The theta-spectrum `{r : |A^(r)| >= theta |A|}`.
#[derive(Debug, Clone)]
pub struct SpectrumLevel {
    pub theta: f64,
    pub frequencies: GroupSet,
    pub coeff_magnitudes: BTreeMap<usize, f64>,
}

impl SpectrumLevel {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Parseval bound `theta^-2 delta^-1` on the spectrum size.
    pub fn parseval_bound(&self, density: f64) -> f64 {
        1.0 / (self.theta * self.theta * density)
    }

    pub fn summary(&self, density: f64) -> SpectrumSummary {
        SpectrumSummary {
            theta: self.theta,
            size: self.len(),
            parseval_bound: self.parseval_bound(density),
        }
    }

    /// Extracts a level set from an existing transform of a set of size
    /// `set_size`.
    pub fn from_table(table: &FourierTable, set_size: usize, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        if set_size == 0 {
            return Err(Error::invalid("spectrum of the empty set"));
        }
        let bound = theta * set_size as f64;
        let group = table.group();
        let mut frequencies = GroupSet::empty(group);
        let mut coeff_magnitudes = BTreeMap::new();
        for (r, c) in table.coeffs().iter().enumerate() {
            let m = c.norm();
            if at_least(m, bound) {
                frequencies.insert(r);
                coeff_magnitudes.insert(r, m);
            }
        }
        Ok(SpectrumLevel {
            theta,
            frequencies,
            coeff_magnitudes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub theta: f64,
    pub size: usize,
    pub parseval_bound: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid(format!("theta must lie in (0, 1], got {theta}")));
    }
    Ok(())
}

pub fn spectrum_at(set: &GroupSet, theta: f64) -> Result<SpectrumLevel> {
    check_theta(theta)?;
    if set.is_empty() {
        return Err(Error::invalid("spectrum of the empty set"));
    }
    SpectrumLevel::from_table(&FourierTable::of_set(set), set.len(), theta)
}

#[derive(Debug, Clone)]
pub struct DyadicPeak {
    /// Lower end of the winning band.
    pub theta: f64,
    /// The full spectrum at the winning `theta`.
    pub level: SpectrumLevel,
    /// Sum of `|A^(r)|^3` over non-principal r in the winning band.
    pub l3_mass: f64,
    /// Every band as (lower end, mass).
    pub bands: Vec<(f64, f64)>,
}

/// Splits `[theta_lo, theta_hi]` into dyadic bands `[theta, 2 theta)` (the top
/// band closed at `theta_hi`) and returns the band carrying the most L^3 mass
/// among non-principal coefficients. Ties go to the lower band.
pub fn dyadic_peak_level(set: &GroupSet, theta_lo: f64, theta_hi: f64) -> Result<DyadicPeak> {
    if set.is_empty() {
        return Err(Error::invalid("dyadic peak of the empty set"));
    }
    let table = FourierTable::of_set(set);
    dyadic_peak_from_table(&table, set.len(), theta_lo, theta_hi)
}

pub(crate) fn band_count(theta_lo: f64, theta_hi: f64) -> usize {
    ((theta_hi / theta_lo).log2() - 1e-12).ceil().max(1.0) as usize
}

pub(crate) fn dyadic_peak_from_table(
    table: &FourierTable,
    set_size: usize,
    theta_lo: f64,
    theta_hi: f64,
) -> Result<DyadicPeak> {
    if !(theta_lo > 0.0 && theta_lo < theta_hi && theta_hi <= 1.0) {
        return Err(Error::invalid(format!(
            "need 0 < theta_lo < theta_hi <= 1, got [{theta_lo}, {theta_hi}]"
        )));
    }
    let a = set_size as f64;
    let k = band_count(theta_lo, theta_hi);
    let mut bands: Vec<(f64, f64)> = (0..k)
        .map(|j| (theta_lo * 2f64.powi(j as i32), 0.0))
        .collect();
    for c in &table.coeffs()[1..] {
        let m = c.norm();
        if !at_least(m, theta_lo * a) || !at_least(theta_hi * a, m) {
            continue;
        }
        // highest band whose lower end is <= m
        let j = (0..k)
            .rev()
            .find(|&j| at_least(m, bands[j].0 * a))
            .expect("m >= theta_lo |A|");
        bands[j].1 += m.powi(3);
    }
    let mut best = 0;
    for j in 1..k {
        if bands[j].1 > bands[best].1 {
            best = j;
        }
    }
    let (theta, l3_mass) = bands[best];
    let level = SpectrumLevel::from_table(table, set_size, theta)?;
    Ok(DyadicPeak {
        theta,
        level,
        l3_mass,
        bands,
    })
}

/// Cost guard for direct energy counting.
pub fn direct_energy_allowed(size: usize, m: u32) -> bool {
    (size as f64).powi(2 * m as i32) <= 1e9 || (m <= 2 && size <= 5000)
}

/// `E_{2m}(D)`: the number of 2m-tuples with `a_1+..+a_m = b_1+..+b_m`.
///
/// The direct mode counts representations `r_m(x)` by repeated integer
/// convolution and returns `sum_x r_m(x)^2`; the Fourier mode evaluates
/// `(1/N) sum_r |D^(r)|^{2m}`.
pub fn energy_2m(set: &GroupSet, m: u32, mode: CountMode) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("energy order m must be >= 1"));
    }
    match mode {
        CountMode::Direct => {
            if !direct_energy_allowed(set.len(), m) {
                return Err(Error::CostGuard(format!(
                    "direct E_{} needs |D|^{} <= 1e9 or (m <= 2 and |D| <= 5000); |D| = {}",
                    2 * m,
                    2 * m,
                    set.len()
                )));
            }
            Ok(energy_direct(set, m) as f64)
        }
        CountMode::Fourier => Ok(energy_fourier(&FourierTable::of_set(set), m)),
    }
}

fn energy_direct(set: &GroupSet, m: u32) -> u128 {
    let g = set.group();
    let n = g.modulus();
    let elems = set.to_vec();
    let mut reps: Vec<u128> = set.indicator().iter().map(|&b| b as u128).collect();
    for _ in 1..m {
        let mut next = vec![0u128; n];
        for (x, &c) in reps.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &d in &elems {
                next[g.add(x, d)] += c;
            }
        }
        reps = next;
    }
    reps.iter().map(|&c| c * c).sum()
}

pub(crate) fn energy_fourier(table: &FourierTable, m: u32) -> f64 {
    let n = table.group().modulus() as f64;
    table
        .coeffs()
        .iter()
        .map(|c| c.norm_sqr().powi(m as i32))
        .sum::<f64>()
        / n
}

/// `ln E_{2m}(D)` via normalized moments; safe for large m.
pub fn log_energy_2m(set: &GroupSet, m: u32) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::invalid("energy of the empty set"));
    }
    let table = FourierTable::of_set(set);
    let d = set.len() as f64;
    let n = set.modulus() as f64;
    let moment: f64 = table
        .coeffs()
        .iter()
        .map(|c| (c.norm() / d).powi(2 * m as i32))
        .sum();
    Ok(2.0 * m as f64 * d.ln() - n.ln() + moment.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingVerdict {
    Smoothing,
    Nonsmoothing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub theta: f64,
    pub sigma: f64,
    pub spectrum_size: usize,
    pub e8: f64,
    pub threshold: f64,
    pub verdict: SmoothingVerdict,
}

/// Compares `E_8(Delta_theta)` with `delta^-sigma theta^8 delta |Delta_theta|^8`.
pub fn smoothing_classify(set: &GroupSet, theta: f64, sigma: f64) -> Result<SmoothingReport> {
    let level = spectrum_at(set, theta)?;
    smoothing_from_level(&level, set.density(), sigma)
}

pub(crate) fn smoothing_from_level(
    level: &SpectrumLevel,
    density: f64,
    sigma: f64,
) -> Result<SmoothingReport> {
    if level.is_empty() {
        return Err(Error::invalid("smoothing classification of an empty spectrum"));
    }
    let e8 = energy_fourier(&FourierTable::of_set(&level.frequencies), 4);
    let size = level.len() as f64;
    let threshold =
        density.powf(-sigma) * level.theta.powi(8) * density * size.powi(8);
    Ok(SmoothingReport {
        theta: level.theta,
        sigma,
        spectrum_size: level.len(),
        e8,
        threshold,
        verdict: if e8 >= threshold {
            SmoothingVerdict::Smoothing
        } else {
            SmoothingVerdict::Nonsmoothing
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShkredovCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack for comparing an integer energy with a floating bound; the
/// inequality is tight for A = {0}, theta = 1.
pub const SHKREDOV_SLACK: f64 = 1e-9;

/// Evaluates `E_{2m}(Delta_theta) >= theta^{2m} delta |Delta_theta|^{2m}`.
pub fn shkredov_check(set: &GroupSet, theta: f64, m: u32) -> Result<ShkredovCheck> {
    if !(m == 2 || m == 3) {
        return Err(Error::invalid(format!("shkredov check supports m in {{2, 3}}, got {m}")));
    }
    let level = spectrum_at(set, theta)?;
    let lhs = energy_fourier(&FourierTable::of_set(&level.frequencies), m).round();
    let rhs = theta.powi(2 * m as i32) * set.density() * (level.len() as f64).powi(2 * m as i32);
    Ok(ShkredovCheck {
        lhs,
        rhs,
        holds: lhs >= rhs * (1.0 - SHKREDOV_SLACK),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CaseVerdict {
    Mid,
    Sml,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The L^3 mass of the non-principal spectrum split into three bands.
///
/// Bands (in units of |A|): MID is `[delta^{1-mu}, delta^{1/10}]`, SML is
/// `[delta^{1+mu}, delta^{1-mu})`, and `large_mass` collects every other
/// non-principal coefficient, so the three masses plus `principal_mass`
/// partition `sum_r |A^(r)|^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSplit {
    pub mu: f64,
    pub delta: f64,
    pub mid_mass: f64,
    pub sml_mass: f64,
    pub large_mass: f64,
    pub principal_mass: f64,
    pub total_mass: f64,
    pub threshold: f64,
    pub verdict: CaseVerdict,
    pub side_condition: SideCondition,
}

pub fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 0.1) {
        return Err(Error::invalid(format!("mu must lie in (0, 1/10), got {mu}")));
    }
    Ok(())
}

pub fn case_split(set: &GroupSet, mu: f64) -> Result<CaseSplit> {
    check_mu(mu)?;
    let delta = set.density();
    if set.is_empty() || set.len() == set.modulus() {
        return Err(Error::invalid(format!("case split needs 0 < delta < 1, got {delta}")));
    }
    case_split_from_table(&FourierTable::of_set(set), set.len(), mu)
}

pub(crate) fn case_split_from_table(
    table: &FourierTable,
    set_size: usize,
    mu: f64,
) -> Result<CaseSplit> {
    check_mu(mu)?;
    let a = set_size as f64;
    let delta = a / table.group().modulus() as f64;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("case split needs 0 < delta < 1, got {delta}")));
    }
    let mid_lo = delta.powf(1.0 - mu) * a;
    let mid_hi = delta.powf(0.1) * a;
    let sml_lo = delta.powf(1.0 + mu) * a;
    let principal_mass = table.coeffs()[0].norm().powi(3);
    let (mut mid, mut sml, mut large) = (0.0, 0.0, 0.0);
    for c in &table.coeffs()[1..] {
        let m = c.norm();
        let cube = m.powi(3);
        if at_least(m, mid_lo) && at_least(mid_hi, m) {
            mid += cube;
        } else if at_least(m, sml_lo) && !at_least(m, mid_lo) {
            sml += cube;
        } else {
            large += cube;
        }
    }
    let threshold = 0.1 * delta.powf(mu / 5.0) * a.powi(3);
    let verdict = if mid >= threshold {
        CaseVerdict::Mid
    } else if sml >= threshold {
        CaseVerdict::Sml
    } else {
        CaseVerdict::Large
    };
    let side_lhs = delta.powf(mu / 20.0);
    let side_rhs = 1.0 / (1.0 / delta).ln();
    Ok(CaseSplit {
        mu,
        delta,
        mid_mass: mid,
        sml_mass: sml,
        large_mass: large,
        principal_mass,
        total_mass: table.coeffs().iter().map(|c| c.norm().powi(3)).sum(),
        threshold,
        verdict,
        side_condition: SideCondition {
            lhs: side_lhs,
            rhs: side_rhs,
            holds: side_lhs < side_rhs,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CyclicGroup;

    fn z(n: usize) -> CyclicGroup {
        CyclicGroup::new(n).unwrap()
    }

    fn fives() -> GroupSet {
        GroupSet::multiples(z(100), 5)
    }

    #[test]
    fn point_mass_spectrum_is_everything() {
        let lvl = spectrum_at(&GroupSet::from_elements(z(7), [0]), 1.0).unwrap();
        assert_eq!(lvl.len(), 7);
    }

    #[test]
    fn subgroup_spectrum() {
        let lvl = spectrum_at(&fives(), 1.0).unwrap();
        assert_eq!(lvl.frequencies.to_vec(), vec![0, 20, 40, 60, 80]);
        assert!(lvl.len() as f64 <= lvl.parseval_bound(0.2) + 1e-9);
    }

    #[test]
    fn theta_near_one_keeps_only_principal() {
        let a = GroupSet::from_elements(z(7), [0, 1]);
        let lvl = spectrum_at(&a, 1.0 - 1e-6).unwrap();
        assert_eq!(lvl.frequencies.to_vec(), vec![0]);
        assert!(spectrum_at(&a, 1.01).is_err());
        assert!(spectrum_at(&a, 0.0).is_err());
        assert!(spectrum_at(&GroupSet::empty(z(7)), 0.5).is_err());
    }

    #[test]
    fn dyadic_peak_on_subgroup() {
        let peak = dyadic_peak_level(&fives(), 0.5, 1.0).unwrap();
        assert_eq!(peak.bands.len(), 1);
        assert_eq!(peak.theta, 0.5);
        assert!((peak.l3_mass - 4.0 * 20f64.powi(3)).abs() < 1e-6);
        assert!(dyadic_peak_level(&fives(), 0.5, 0.5).is_err());
    }

    #[test]
    fn dyadic_band_count() {
        assert_eq!(band_count(0.5, 1.0), 1);
        assert_eq!(band_count(0.1, 1.0), 4);
        assert_eq!(band_count(0.25, 1.0), 2);
        assert_eq!(band_count(0.3, 0.31), 1);
    }

    #[test]
    fn energy_examples() {
        let g = z(11);
        let one = GroupSet::from_elements(g, [3]);
        for m in 1..5 {
            assert_eq!(energy_2m(&one, m, CountMode::Direct).unwrap(), 1.0);
            assert!((energy_2m(&one, m, CountMode::Fourier).unwrap() - 1.0).abs() < 1e-9);
        }
        let pair = GroupSet::from_elements(g, [0, 1]);
        assert_eq!(energy_2m(&pair, 2, CountMode::Direct).unwrap(), 6.0);
        let sub = GroupSet::from_elements(z(4), [0, 2]);
        assert_eq!(energy_2m(&sub, 2, CountMode::Direct).unwrap(), 8.0);
        assert_eq!(energy_2m(&sub, 2, CountMode::Fourier).unwrap().round(), 8.0);
    }

    #[test]
    fn energy_cost_guard() {
        let big = GroupSet::from_residues(z(20000), 0..6000);
        let err = energy_2m(&big, 2, CountMode::Direct).unwrap_err();
        assert!(err.to_string().contains("5000"));
        let mid = GroupSet::from_residues(z(200), 0..40);
        assert!(energy_2m(&mid, 3, CountMode::Direct).is_err());
        assert!(energy_2m(&mid, 0, CountMode::Fourier).is_err());
    }

    #[test]
    fn log_energy_matches_plain() {
        let set = GroupSet::from_elements(z(101), [1, 5, 7, 30, 44]);
        for m in 1..5 {
            let plain = energy_2m(&set, m, CountMode::Fourier).unwrap();
            let log = log_energy_2m(&set, m).unwrap();
            assert!((plain.ln() - log).abs() < 1e-9);
        }
    }

    #[test]
    fn smoothing_on_subgroup_spectrum() {
        // Delta_1 of the multiples of 5 is a subgroup of size 5: E_8 = 5^7.
        let rep = smoothing_classify(&fives(), 1.0, 0.0).unwrap();
        assert_eq!(rep.spectrum_size, 5);
        assert!((rep.e8 - 5f64.powi(7)).abs() < 1e-3);
        let threshold = 0.2 * 5f64.powi(8);
        assert!((rep.threshold - threshold).abs() < 1e-6);
        assert_eq!(rep.verdict, SmoothingVerdict::Smoothing);
    }

    #[test]
    fn smoothing_point_mass_closed_form() {
        // A = {0} in Z/7, theta = 1: Delta = Z/7, E_8 = 7^7, threshold = (1/7) 7^8.
        let rep = smoothing_classify(&GroupSet::from_elements(z(7), [0]), 1.0, 0.0).unwrap();
        assert!((rep.e8 - 7f64.powi(7)).abs() < 1e-3);
        assert!((rep.threshold - 7f64.powi(7)).abs() < 1e-3);
    }

    #[test]
    fn shkredov_examples() {
        let chk = shkredov_check(&fives(), 1.0, 2).unwrap();
        assert_eq!(chk.lhs, 125.0);
        assert!((chk.rhs - 125.0).abs() < 1e-9);
        assert!(chk.holds);
        let chk = shkredov_check(&GroupSet::from_elements(z(13), [0]), 1.0, 3).unwrap();
        assert!(chk.holds);
        assert!(shkredov_check(&fives(), 1.0, 4).is_err());
    }

    #[test]
    fn case_split_subgroup_is_large() {
        let cs = case_split(&fives(), 0.05).unwrap();
        assert_eq!(cs.verdict, CaseVerdict::Large);
        assert_eq!(cs.mid_mass, 0.0);
        assert_eq!(cs.sml_mass, 0.0);
        assert!((cs.large_mass - 4.0 * 8000.0).abs() < 1e-6);
        assert!(case_split(&fives(), 0.2).is_err());
        assert!(case_split(&GroupSet::full(z(5)), 0.05).is_err());
    }

    #[test]
    fn case_split_interval_is_mid() {
        let a = GroupSet::from_residues(z(101), 0..10);
        let cs = case_split(&a, 0.05).unwrap();
        assert_eq!(cs.verdict, CaseVerdict::Mid);
        let parts = cs.mid_mass + cs.sml_mass + cs.large_mass + cs.principal_mass;
        assert!((parts - cs.total_mass).abs() <= 1e-6 * cs.total_mass);
    }
}
