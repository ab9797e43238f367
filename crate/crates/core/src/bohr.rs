//! Bohr sets `B(Gamma, gamma) = {x : ||t x / N|| <= gamma for all t in Gamma}`.
//!
//! Each build computes the membership threshold `rho(x) = max_t ||t x / N||`
//! once, stored exactly as the integer `N rho(x)`. Every radius question
//! (dilates, regularity) is answered from the sorted threshold array, which
//! makes the regularity certificate exact: `|B_rho|` is a step function of
//! `rho` and only its jump points need checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::cross_correlate;
use crate::group::{gcd, CyclicGroup, GroupSet, RealFunction};

/// Maximum rank used by the increment pipelines.
pub const MAX_RANK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohrSpec {
    pub gamma_set: Vec<usize>,
    pub radius: f64,
}

impl BohrSpec {
    pub fn new(gamma_set: Vec<usize>, radius: f64) -> Result<Self> {
        let spec = BohrSpec { gamma_set, radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius <= 0.5) {
            return Err(Error::invalid(format!(
                "Bohr radius must lie in (0, 1/2], got {}",
                self.radius
            )));
        }
        let mut sorted = self.gamma_set.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("Bohr frequencies must be distinct"));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.gamma_set.len()
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        BohrSpec::new(self.gamma_set.clone(), radius)
    }
}

/// Largest integer numerator `v` with `v / N <= radius`.
#[inline]
fn cutoff(radius: f64, n: usize) -> usize {
    (radius * n as f64 + 1e-9).floor() as usize
}

/// `N * max_t ||t x / N||` for every x.
pub fn threshold_numerators(group: CyclicGroup, gamma_set: &[usize]) -> Vec<usize> {
    let n = group.modulus();
    (0..n)
        .map(|x| {
            gamma_set
                .iter()
                .map(|&t| group.circle_distance(group.mul(t % n, x)))
                .max()
                .unwrap_or(0)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BohrMaterialized {
    pub spec: BohrSpec,
    pub elements: GroupSet,
    numerators: Vec<usize>,
    sorted: Vec<usize>,
    pub regular: Option<RegularityCertificate>,
}

impl BohrMaterialized {
    pub fn group(&self) -> CyclicGroup {
        self.elements.group()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `rho(x)` as reals.
    pub fn thresholds(&self) -> Vec<f64> {
        let n = self.group().modulus() as f64;
        self.numerators.iter().map(|&v| v as f64 / n).collect()
    }

    pub fn threshold_numerators(&self) -> &[usize] {
        &self.numerators
    }

    /// `|B(Gamma, rho)|` for an arbitrary radius, from the sorted thresholds.
    pub fn size_at(&self, rho: f64) -> usize {
        let cut = cutoff(rho, self.group().modulus());
        self.sorted.partition_point(|&v| v <= cut)
    }

    fn from_numerators(group: CyclicGroup, spec: BohrSpec, numerators: Vec<usize>) -> Self {
        let cut = cutoff(spec.radius, group.modulus());
        let elements = GroupSet::from_indicator(group, numerators.iter().map(|&v| v <= cut).collect())
            .expect("length matches");
        let mut sorted = numerators.clone();
        sorted.sort_unstable();
        BohrMaterialized {
            spec,
            elements,
            numerators,
            sorted,
            regular: None,
        }
    }
}

pub fn bohr_build(group: CyclicGroup, spec: &BohrSpec) -> Result<BohrMaterialized> {
    spec.validate()?;
    let nums = threshold_numerators(group, &spec.gamma_set);
    let b = BohrMaterialized::from_numerators(group, spec.clone(), nums);
    let lower = spec.radius.powi(spec.rank() as i32) * group.modulus() as f64;
    if (b.len() as f64) < lower {
        return Err(Error::invariant(format!(
            "Bohr size {} below gamma^rank N = {lower}",
            b.len()
        )));
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeDoubling {
    pub lhs: f64,
    pub mid: usize,
    pub rhs: f64,
    pub holds: bool,
}

/// Both size bounds: `gamma^|Gamma| N <= |B| <= 8^{|Gamma|+1} |B_{1/2}|`.
pub fn size_doubling_check(group: CyclicGroup, spec: &BohrSpec) -> Result<SizeDoubling> {
    spec.validate()?;
    let nums = threshold_numerators(group, &spec.gamma_set);
    let b = BohrMaterialized::from_numerators(group, spec.clone(), nums);
    let d = spec.rank() as i32;
    let lhs = spec.radius.powi(d) * group.modulus() as f64;
    let mid = b.len();
    let rhs = 8f64.powi(d + 1) * b.size_at(spec.radius / 2.0) as f64;
    Ok(SizeDoubling {
        lhs,
        mid,
        rhs,
        holds: lhs <= mid as f64 && mid as f64 <= rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub gamma_prime: f64,
    pub rank: usize,
    /// `1 / (100 rank)`.
    pub eta_max: f64,
    pub base_size: usize,
    /// Jump points inspected inside the window.
    pub jumps_checked: usize,
    /// Smallest `bound - |B_{1+eta}|` over upward jumps (non-negative when regular).
    pub upper_slack: f64,
    /// Smallest `|B_{1+eta}| - bound` over downward jumps.
    pub lower_slack: f64,
    pub holds: bool,
}

/// Exact regularity test for `B(Gamma, gamma_prime)`.
///
/// For eta > 0 the count jumps up at `eta_v = v / (N gamma') - 1`; the
/// linear upper bound is weakest right at the jump. For eta < 0 the count
/// drops just below `eta_v`, where the lower bound tends to
/// `(1 - 100 d |eta_v|) |B|` without reaching it.
pub fn certify_regular(b: &BohrMaterialized, gamma_prime: f64) -> RegularityCertificate {
    let n = b.group().modulus();
    let d = b.spec.rank().max(1);
    let slope = 100.0 * d as f64;
    let eta_max = 1.0 / slope;
    let base = b.size_at(gamma_prime);
    let base_f = base as f64;
    let nf = n as f64;
    let base_cut = cutoff(gamma_prime, n);
    let top_cut = cutoff((1.0 + eta_max) * gamma_prime, n);
    let mut upper_slack = f64::INFINITY;
    let mut lower_slack = f64::INFINITY;
    let mut jumps = 0;

    let start = b.sorted.partition_point(|&v| v <= base_cut);
    let end = b.sorted.partition_point(|&v| v <= top_cut);
    let mut i = start;
    while i < end {
        let v = b.sorted[i];
        let count = b.sorted.partition_point(|&w| w <= v);
        let eta = v as f64 / (nf * gamma_prime) - 1.0;
        upper_slack = upper_slack.min((1.0 + slope * eta) * base_f - count as f64);
        jumps += 1;
        i = count;
    }

    let low_edge = (1.0 - eta_max) * gamma_prime * nf;
    let lo = b.sorted.partition_point(|&v| (v as f64) <= low_edge);
    let mut i = lo;
    while i < start {
        let v = b.sorted[i];
        let below = b.sorted.partition_point(|&w| w < v);
        let eta = v as f64 / (nf * gamma_prime) - 1.0;
        lower_slack = lower_slack.min(below as f64 - (1.0 - slope * eta.abs()) * base_f);
        jumps += 1;
        i = b.sorted.partition_point(|&w| w <= v);
    }

    RegularityCertificate {
        gamma_prime,
        rank: b.spec.rank(),
        eta_max,
        base_size: base,
        jumps_checked: jumps,
        upper_slack,
        lower_slack,
        holds: upper_slack >= 0.0 && lower_slack >= 0.0,
    }
}

/// Grid points for the fallback scan in [`regular_radius`].
const RADIUS_GRID: usize = 512;

/// Finds `gamma' in [gamma/2, gamma]` with `B(Gamma, gamma')` regular.
///
/// Candidates, largest first: `gamma`, midpoints between consecutive
/// threshold values in the range (where the set is locally constant), then a
/// uniform grid.
pub fn regular_radius(group: CyclicGroup, spec: &BohrSpec) -> Result<RegularityCertificate> {
    spec.validate()?;
    if spec.gamma_set.is_empty() {
        return Err(Error::invalid("regular radius needs a non-empty frequency set"));
    }
    let b = BohrMaterialized::from_numerators(
        group,
        spec.clone(),
        threshold_numerators(group, &spec.gamma_set),
    );
    regular_radius_for(&b)
}

fn regular_radius_for(b: &BohrMaterialized) -> Result<RegularityCertificate> {
    let gamma = b.spec.radius;
    let lo = gamma / 2.0;
    let nf = b.group().modulus() as f64;
    let mut jumps: Vec<f64> = b
        .sorted
        .iter()
        .map(|&v| v as f64 / nf)
        .filter(|&r| r >= lo && r <= gamma)
        .collect();
    jumps.dedup();
    let mut fences = vec![lo];
    fences.extend(jumps);
    fences.push(gamma);
    let mut candidates = vec![gamma];
    candidates.extend(fences.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.extend((0..=RADIUS_GRID).map(|i| lo + (gamma - lo) * i as f64 / RADIUS_GRID as f64));
    candidates.retain(|&c| c >= lo && c <= gamma);
    candidates.sort_by(|a, b| b.partial_cmp(a).expect("finite radii"));
    candidates.dedup();
    for c in candidates {
        let cert = certify_regular(b, c);
        if cert.holds {
            return Ok(cert);
        }
    }
    Err(Error::invariant(format!(
        "no regular radius found in [{lo}, {gamma}] for rank {}",
        b.spec.rank()
    )))
}

/// Builds `B(Gamma, gamma')` at a regular radius in `[gamma/2, gamma]` and
/// attaches the certificate.
pub fn build_regular(group: CyclicGroup, spec: &BohrSpec) -> Result<BohrMaterialized> {
    let base = bohr_build(group, spec)?;
    if spec.gamma_set.is_empty() {
        return Ok(base);
    }
    let cert = regular_radius_for(&base)?;
    let mut b = BohrMaterialized::from_numerators(
        group,
        spec.with_radius(cert.gamma_prime)?,
        base.numerators,
    );
    b.regular = Some(cert);
    Ok(b)
}

/// Independent check of regularity on an evenly spaced eta grid, rebuilding
/// membership from floating-point distances.
pub fn regularity_grid_check(group: CyclicGroup, spec: &BohrSpec, points: usize) -> bool {
    let n = group.modulus();
    let d = spec.rank().max(1) as f64;
    let eta_max = 1.0 / (100.0 * d);
    let rho: Vec<f64> = (0..n)
        .map(|x| {
            spec.gamma_set
                .iter()
                .map(|&t| {
                    let frac = ((t as u128 * x as u128) % n as u128) as f64 / n as f64;
                    frac.min(1.0 - frac)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let size = |r: f64| rho.iter().filter(|&&v| v <= r + 1e-12).count() as f64;
    let base = size(spec.radius);
    (0..points).all(|i| {
        let eta = -eta_max + 2.0 * eta_max * i as f64 / (points - 1).max(1) as f64;
        let s = size((1.0 + eta) * spec.radius);
        let slack = 100.0 * d * eta.abs();
        (1.0 - slack) * base <= s + 1e-9 && s <= (1.0 + slack) * base + 1e-9
    })
}

/// `B_eta = B(Gamma, eta gamma)`, reusing the thresholds.
pub fn dilate_bohr(b: &BohrMaterialized, eta: f64) -> Result<BohrMaterialized> {
    let radius = eta * b.spec.radius;
    if !(radius > 0.0 && radius <= 0.5) {
        return Err(Error::invalid(format!(
            "dilated radius {radius} outside (0, 1/2]"
        )));
    }
    Ok(BohrMaterialized::from_numerators(
        b.group(),
        b.spec.with_radius(radius)?,
        b.numerators.clone(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestTranslate {
    pub t: usize,
    pub count: usize,
    /// `(count / |B|) / delta`.
    pub density_ratio: f64,
}

/// Exhaustive argmax of `|(A + t) ∩ B|` over t via one cross-correlation;
/// ties go to the smallest t. The winning count is re-verified directly.
pub fn best_translate(set: &GroupSet, target: &GroupSet) -> Result<BestTranslate> {
    set.group().check_same(&target.group())?;
    if target.is_empty() {
        return Err(Error::invalid("best translate into an empty set"));
    }
    let counts = cross_correlate(&RealFunction::indicator(set), &RealFunction::indicator(target))?;
    let (t, count) = counts
        .values()
        .iter()
        .map(|v| v.round() as usize)
        .enumerate()
        .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let recount = set.translate(t as i64).intersection_size(target);
    if recount != count {
        return Err(Error::invariant(format!(
            "translate count mismatch at t = {t}: transform {count}, direct {recount}"
        )));
    }
    let delta = set.density();
    Ok(BestTranslate {
        t,
        count,
        density_ratio: if delta > 0.0 {
            count as f64 / target.len() as f64 / delta
        } else {
            0.0
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApRun {
    pub start: usize,
    pub difference: usize,
    pub length: usize,
}

impl ApRun {
    pub fn elements(&self, group: CyclicGroup) -> Vec<usize> {
        (0..self.length)
            .map(|k| group.add(self.start, group.mul(k, self.difference)))
            .collect()
    }
}

/// Longest progression `start + k d` (k < length, distinct terms) inside
/// `set`. Differences `d` and `N - d` give the same progressions, so only
/// `d <= N/2` is scanned. Ties: smaller d, then smaller start.
pub fn longest_ap_in(set: &GroupSet) -> Result<ApRun> {
    if set.is_empty() {
        return Err(Error::invalid("longest progression in an empty set"));
    }
    let g = set.group();
    let n = g.modulus();
    let first = set.iter().next().expect("non-empty");
    let mut best = ApRun {
        start: first,
        difference: 1,
        length: 1,
    };
    for d in 1..=n / 2 {
        let cycle_len = n / gcd(d, n);
        let cosets = n / cycle_len;
        for c in 0..cosets {
            // walk the cycle c, c+d, c+2d, ...
            let walk: Vec<usize> = (0..cycle_len).map(|k| g.add(c, g.mul(k, d))).collect();
            let inside: Vec<bool> = walk.iter().map(|&x| set.contains(x)).collect();
            if inside.iter().all(|&b| b) {
                let start = *walk.iter().min().expect("non-empty cycle");
                let cand = ApRun {
                    start,
                    difference: d,
                    length: cycle_len,
                };
                if better_run(&cand, &best) {
                    best = cand;
                }
                continue;
            }
            // rotate so the walk starts just after a gap, then scan runs
            let gap = inside.iter().position(|&b| !b).expect("has a gap");
            let mut run_start = None;
            let mut run_len = 0;
            for step in 1..=cycle_len {
                let idx = (gap + step) % cycle_len;
                if inside[idx] {
                    if run_len == 0 {
                        run_start = Some(walk[idx]);
                    }
                    run_len += 1;
                } else {
                    if let Some(s) = run_start.take() {
                        let cand = ApRun {
                            start: s,
                            difference: d,
                            length: run_len,
                        };
                        if better_run(&cand, &best) {
                            best = cand;
                        }
                    }
                    run_len = 0;
                }
            }
        }
    }
    Ok(best)
}

fn better_run(cand: &ApRun, best: &ApRun) -> bool {
    (cand.length, std::cmp::Reverse(cand.difference), std::cmp::Reverse(cand.start))
        > (best.length, std::cmp::Reverse(best.difference), std::cmp::Reverse(best.start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: usize) -> CyclicGroup {
        CyclicGroup::new(n).unwrap()
    }

    #[test]
    fn empty_frequency_set_is_everything() {
        let b = bohr_build(z(12), &BohrSpec::new(vec![], 0.1).unwrap()).unwrap();
        assert_eq!(b.len(), 12);
    }

    #[test]
    fn single_frequency_quarter_radius() {
        let spec = BohrSpec::new(vec![1], 0.25).unwrap();
        let b = bohr_build(z(8), &spec).unwrap();
        assert_eq!(b.elements.to_vec(), vec![0, 1, 2, 6, 7]);
        let half = dilate_bohr(&b, 0.5).unwrap();
        assert_eq!(half.elements.to_vec(), vec![0, 1, 7]);
        let chk = size_doubling_check(z(8), &spec).unwrap();
        assert_eq!((chk.lhs, chk.mid, chk.rhs), (2.0, 5, 64.0 * 3.0));
        assert!(chk.holds);
    }

    #[test]
    fn subgroup_frequencies_give_multiples_of_five() {
        let spec = BohrSpec::new(vec![20, 40, 60, 80], 0.25).unwrap();
        let b = bohr_build(z(100), &spec).unwrap();
        assert_eq!(b.elements, GroupSet::multiples(z(100), 5));
    }

    #[test]
    fn radius_validation() {
        assert!(BohrSpec::new(vec![1], 0.0).is_err());
        assert!(BohrSpec::new(vec![1], 0.51).is_err());
        assert!(BohrSpec::new(vec![1, 1], 0.2).is_err());
        let b = bohr_build(z(8), &BohrSpec::new(vec![1], 0.25).unwrap()).unwrap();
        assert!(dilate_bohr(&b, 3.0).is_err());
        assert_eq!(dilate_bohr(&b, 1.0).unwrap().elements, b.elements);
        let tiny = dilate_bohr(&b, 1e-6).unwrap();
        assert_eq!(tiny.elements.to_vec(), vec![0]);
    }

    #[test]
    fn bohr_sets_are_symmetric() {
        let spec = BohrSpec::new(vec![3, 17, 40], 0.2).unwrap();
        let b = bohr_build(z(101), &spec).unwrap();
        assert!(b.elements.contains(0));
        assert_eq!(b.elements.negate(), b.elements);
    }

    #[test]
    fn regular_radius_single_frequency() {
        let spec = BohrSpec::new(vec![1], 0.25).unwrap();
        let cert = regular_radius(z(101), &spec).unwrap();
        assert!(cert.holds);
        assert!(cert.gamma_prime >= 0.125 && cert.gamma_prime <= 0.25);
        let regular = spec.with_radius(cert.gamma_prime).unwrap();
        assert!(regularity_grid_check(z(101), &regular, 1000));
    }

    #[test]
    fn threshold_radius_is_not_regular() {
        // B(1, 10/101) in Z/101 sits exactly on a jump: shrinking the radius
        // at all loses two elements.
        let spec = BohrSpec::new(vec![1], 10.0 / 101.0).unwrap();
        let b = bohr_build(z(101), &spec).unwrap();
        assert!(!certify_regular(&b, 10.0 / 101.0).holds);
        assert!(!regularity_grid_check(z(101), &spec, 1000));
    }

    #[test]
    fn constant_window_is_regular() {
        // All non-zero thresholds are >= 0.2; a radius near 0.05 sees none.
        let spec = BohrSpec::new(vec![20, 40], 0.05).unwrap();
        let b = bohr_build(z(100), &spec).unwrap();
        let cert = certify_regular(&b, 0.05);
        assert!(cert.holds);
        assert_eq!(cert.jumps_checked, 0);
    }

    #[test]
    fn best_translate_examples() {
        let g = z(100);
        let fives = GroupSet::multiples(g, 5);
        let bt = best_translate(&fives, &fives).unwrap();
        assert_eq!((bt.t, bt.count), (0, 20));
        assert!((bt.density_ratio - 5.0).abs() < 1e-12);
        assert!(best_translate(&fives, &GroupSet::empty(g)).is_err());
    }

    #[test]
    fn best_translate_breaks_ties_low() {
        let g = z(10);
        let a = GroupSet::from_elements(g, [0, 5]);
        let b = GroupSet::from_elements(g, [3]);
        let bt = best_translate(&a, &b).unwrap();
        assert_eq!((bt.t, bt.count), (3, 1));
    }

    #[test]
    fn longest_ap_examples() {
        let g = z(8);
        let run = longest_ap_in(&GroupSet::full(g)).unwrap();
        assert_eq!((run.start, run.difference, run.length), (0, 1, 8));
        let b = GroupSet::from_elements(g, [0, 1, 2, 6, 7]);
        let run = longest_ap_in(&b).unwrap();
        assert_eq!((run.start, run.difference, run.length), (6, 1, 5));
        assert_eq!(run.elements(g), vec![6, 7, 0, 1, 2]);
        let run = longest_ap_in(&GroupSet::from_elements(g, [0])).unwrap();
        assert_eq!(run.length, 1);
        assert!(longest_ap_in(&GroupSet::empty(g)).is_err());
    }

    #[test]
    fn longest_ap_uses_large_differences() {
        let g = z(30);
        let evens = GroupSet::multiples(g, 2);
        let run = longest_ap_in(&evens).unwrap();
        assert_eq!((run.difference, run.length), (2, 15));
        let set = GroupSet::from_elements(g, [1, 8, 15, 22, 29, 4]);
        let run = longest_ap_in(&set).unwrap();
        assert_eq!((run.start, run.difference, run.length), (1, 7, 5));
    }
}
