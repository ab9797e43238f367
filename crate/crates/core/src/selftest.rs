//! Runtime acceptance suite behind `roth selftest`.
//!
//! Each criterion generates its instances from a fixed seed and compares the
//! library against small brute-force oracles kept private to this module.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bohr::{bohr_build, regular_radius, regularity_grid_check, size_doubling_check, BohrSpec};
use crate::constructions::{behrend, exact_sizes, greedy_3ap_free, max_3ap_free_exact, random_set};
use crate::error::Result;
use crate::fourier::{convolve, count_3aps_set, parseval_residual, CountMode, FourierTable};
use crate::group::{CyclicGroup, GroupSet, RealFunction};
use crate::increment::{
    increment_large, iterate, l2_increment, large_decomposition, selection_refine, PipelineConfig,
};
use crate::spectrum::{direct_energy_allowed, energy_2m, shkredov_check, spectrum_at};
use crate::span::{chang_ratio, is_dissociated, maximal_dissociated, span_of};

pub const CRITERIA: [&str; 13] = [
    "parseval",
    "3ap-identity",
    "convolution",
    "energy",
    "shkredov",
    "bohr-bounds",
    "regular-radius",
    "l2-increment",
    "selection",
    "chang-cover",
    "large-decomposition",
    "exact-extremal",
    "iteration",
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<20} {:.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = Result<(bool, String)>;

/// Runs criterion `id` (1-based); an error counts as a failure.
pub fn run(id: usize, seed: u64) -> Outcome {
    let name = CRITERIA[id - 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(id as u64));
    let start = Instant::now();
    let res = match id {
        1 => parseval(&mut rng),
        2 => ap_identity(&mut rng),
        3 => convolution(&mut rng),
        4 => energy(&mut rng),
        5 => shkredov(&mut rng),
        6 => bohr_bounds(&mut rng),
        7 => regular(&mut rng),
        8 => l2(&mut rng),
        9 => selection(&mut rng),
        10 => chang(&mut rng),
        11 => large(&mut rng),
        12 => extremal(),
        13 => iteration(seed),
        _ => unreachable!("criteria are numbered 1..=13"),
    };
    let seconds = start.elapsed().as_secs_f64();
    let limit = match id {
        1 => Some(10.0),
        2 => Some(30.0),
        13 => Some(60.0),
        _ => None,
    };
    let (passed, mut detail) = match res {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| seconds < l);
    if !in_time {
        detail.push_str(&format!("; over the {}s budget", limit.unwrap_or_default()));
    }
    Outcome {
        id,
        name,
        passed: passed && in_time,
        detail,
        seconds,
    }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    (1..=CRITERIA.len()).map(|id| run(id, seed)).collect()
}

fn z(n: usize) -> CyclicGroup {
    CyclicGroup::new(n).expect("positive modulus")
}

fn rand_set(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<GroupSet> {
    let delta = rng.gen_range(lo..hi);
    random_set(z(n), delta, rng.gen())
}

/// Non-trivial set: at least one element and not the whole group.
fn proper_set(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<GroupSet> {
    loop {
        let s = rand_set(rng, n, lo, hi)?;
        if !s.is_empty() && s.len() < n {
            return Ok(s);
        }
    }
}

fn oracle_3aps(set: &GroupSet) -> u64 {
    let g = set.group();
    let mut count = 0;
    for x in set.iter() {
        for y in set.iter() {
            // x + y = 2z
            let s = g.add(x, y);
            count += (0..g.modulus()).filter(|&m| g.add(m, m) == s && set.contains(m)).count() as u64;
        }
    }
    count
}

fn oracle_energy(set: &GroupSet, m: u32) -> u128 {
    let g = set.group();
    let mut reps = vec![0u128; g.modulus()];
    reps[0] = 1;
    for _ in 0..m {
        let mut next = vec![0u128; g.modulus()];
        for (x, &c) in reps.iter().enumerate().filter(|(_, &c)| c > 0) {
            for d in set.iter() {
                next[g.add(x, d)] += c;
            }
        }
        reps = next;
    }
    reps.iter().map(|c| c * c).sum()
}

fn integer_free(set: &[u64]) -> bool {
    set.iter().all(|&a| {
        set.iter()
            .all(|&b| a >= b || (a + b) % 2 == 1 || set.binary_search(&((a + b) / 2)).is_err())
    })
}

fn parseval(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for n in [5, 101, 1009, 10007] {
        for _ in 0..50 {
            worst = worst.max(parseval_residual(&rand_set(rng, n, 0.01, 0.99)?));
        }
    }
    Ok((worst <= 1e-9, format!("200 sets, worst residual {worst:.2e}")))
}

fn ap_identity(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    let mut sets = 0;
    for n in [3, 5, 7, 9, 15, 21, 45, 101, 255, 501] {
        for _ in 0..4 {
            let a = rand_set(rng, n, 0.05, 0.95)?;
            let direct = count_3aps_set(&a, CountMode::Direct)?;
            let fourier = count_3aps_set(&a, CountMode::Fourier)?.round();
            let oracle_ok = n > 101 || oracle_3aps(&a) as f64 == direct;
            bad += usize::from(direct != fourier || !oracle_ok);
            sets += 1;
        }
    }
    let mut free = 0;
    for n in [5, 12, 30, 50] {
        for rep in [greedy_3ap_free(n)?, behrend(n)?, max_3ap_free_exact(n)?] {
            let max = *rep.set.last().expect("non-empty") as usize;
            let g = z(2 * max + 1);
            let a = GroupSet::from_residues(g, rep.set.iter().map(|&x| x as usize));
            let size = a.len() as f64;
            let direct = count_3aps_set(&a, CountMode::Direct)?;
            let fourier = count_3aps_set(&a, CountMode::Fourier)?.round();
            bad += usize::from(direct != size || fourier != size);
            free += 1;
        }
    }
    Ok((bad == 0, format!("{sets} random sets, {free} progression-free fixtures, {bad} mismatches")))
}

fn convolution(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..400);
        let g = z(n);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = convolve(&RealFunction::new(g, f.clone())?, &RealFunction::new(g, h.clone())?)?;
        for x in 0..n {
            let (mut sum, mut scale) = (0.0, 0.0);
            for t in 0..n {
                let p = f[t] * h[g.sub(x, t)];
                sum += p;
                scale += p.abs();
            }
            worst = worst.max((fast.values()[x] - sum).abs() / scale.max(f64::MIN_POSITIVE));
        }
    }
    Ok((worst <= 1e-6, format!("50 pairs, worst relative error {worst:.2e}")))
}

fn energy(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    let mut direct_runs = 0;
    for _ in 0..50 {
        let n = rng.gen_range(31..400);
        let size = rng.gen_range(1..=30);
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        let d = GroupSet::from_residues(z(n), all[..size].iter().copied());
        for m in 1..=4 {
            let oracle = oracle_energy(&d, m) as f64;
            let fourier = energy_2m(&d, m, CountMode::Fourier)?.round();
            bad += usize::from(fourier != oracle);
            if direct_energy_allowed(size, m) {
                bad += usize::from(energy_2m(&d, m, CountMode::Direct)? != oracle);
                direct_runs += 1;
            }
        }
    }
    for (n, step) in [(12, 3), (100, 5), (30, 2), (64, 8), (105, 7), (17, 17)] {
        let d = GroupSet::multiples(z(n), step);
        for m in 1..=4 {
            let saturated = (d.len() as f64).powi(2 * m as i32 - 1);
            let fourier = energy_2m(&d, m, CountMode::Fourier)?.round();
            bad += usize::from(fourier != saturated || oracle_energy(&d, m) as f64 != saturated);
        }
    }
    Ok((bad == 0, format!("200 random (D, m), {direct_runs} in direct mode, 6 subgroups; {bad} mismatches")))
}

fn structured_sets() -> Result<Vec<GroupSet>> {
    let mut v = vec![
        GroupSet::multiples(z(100), 5),
        GroupSet::multiples(z(210), 7),
        GroupSet::from_elements(z(101), 0..10),
        GroupSet::from_elements(z(257), 0..40),
        GroupSet::from_elements(z(97), [0]),
    ];
    for n in [20, 50] {
        for rep in [greedy_3ap_free(n)?, behrend(n)?] {
            v.push(GroupSet::from_residues(z(2 * n + 1), rep.set.iter().map(|&x| x as usize)));
        }
    }
    v.push(GroupSet::multiples(z(300), 10).union(&GroupSet::from_elements(z(300), 1..6))?);
    v.push(GroupSet::from_residues(z(127), (0..127).map(|x| x * x % 127)));
    Ok(v)
}

fn shkredov(rng: &mut ChaCha8Rng) -> Check {
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(10..500);
        let a = proper_set(rng, n, 0.02, 0.6)?;
        let c = shkredov_check(&a, rng.gen_range(0.05..1.0), rng.gen_range(2..=3))?;
        violations += usize::from(!c.holds);
    }
    let structured = structured_sets()?;
    let mut count = 0;
    for (i, a) in structured.iter().enumerate() {
        for theta in [0.3, 0.8] {
            let c = shkredov_check(a, theta, 2 + (i as u32 % 2))?;
            violations += usize::from(!c.holds);
            count += 1;
        }
    }
    Ok((violations == 0, format!("100 random + {count} structured, {violations} violations")))
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize, max_rank: usize, max_radius: f64) -> Result<BohrSpec> {
    let rank = rng.gen_range(1..=max_rank.min(n - 1));
    let mut freqs: Vec<usize> = (1..n).collect();
    freqs.shuffle(rng);
    freqs.truncate(rank);
    BohrSpec::new(freqs, rng.gen_range(0.01..max_radius))
}

fn bohr_bounds(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=10007);
        let spec = random_spec(rng, n, 4, 0.5)?;
        bad += usize::from(!size_doubling_check(z(n), &spec)?.holds);
    }
    Ok((bad == 0, format!("100 specs, {bad} failures")))
}

fn regular(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(50..3000);
        let spec = random_spec(rng, n, 4, 0.5)?;
        let cert = regular_radius(z(n), &spec)?;
        let in_range = cert.gamma_prime >= spec.radius / 2.0 && cert.gamma_prime <= spec.radius;
        let grid = regularity_grid_check(z(n), &spec.with_radius(cert.gamma_prime)?, 1000);
        bad += usize::from(!(in_range && cert.holds && grid));
    }
    Ok((bad == 0, format!("100 specs, {bad} failures")))
}

fn l2(rng: &mut ChaCha8Rng) -> Check {
    let cfg = PipelineConfig::default();
    let fives = GroupSet::multiples(z(100), 5);
    let gamma = spectrum_at(&fives, 0.5)?.frequencies;
    let fixture = l2_increment(&fives, &gamma, &cfg)?.factor;
    let mut bad = 0;
    for _ in 0..30 {
        let n = rng.gen_range(20..400);
        let a = proper_set(rng, n, 0.05, 0.5)?;
        let mut gamma = spectrum_at(&a, rng.gen_range(0.1..0.6))?.frequencies;
        gamma.insert(rng.gen_range(1..n));
        let res = l2_increment(&a, &gamma, &cfg)?;
        let b = bohr_build(a.group(), &res.bohr)?.elements;
        let counts: Vec<usize> = (0..n).map(|t| a.translate(t as i64).intersection_size(&b)).collect();
        let max = *counts.iter().max().expect("non-empty");
        let argmax = counts.iter().position(|&c| c == max).expect("max exists");
        let exact = res.t == argmax && res.new_density == max as f64 / b.len() as f64;
        bad += usize::from(!exact || res.factor < 1.0);
    }
    Ok((fixture == 5.0 && bad == 0, format!("fixture factor {fixture}, 30 random inputs, {bad} failures")))
}

fn selection(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    let mut made = 0;
    while made < 50 {
        let n = rng.gen_range(50..400);
        let x = proper_set(rng, n, 0.02, 0.15)?;
        let h = proper_set(rng, n, 0.02, 0.15)?;
        let sums = x.sumset(&h)?;
        let keep = rng.gen_range(0.3..1.0);
        let d = GroupSet::from_residues(z(n), sums.iter().filter(|_| rng.gen_bool(keep)));
        let s = sums.intersection_size(&d) as f64;
        let eps = rng.gen_range(0.0..0.5);
        let c = 0.95 * s / (x.len() as f64 * (h.len() as f64).powf(1.0 - eps));
        if s == 0.0 {
            continue;
        }
        let cert = selection_refine(&x, &h, &d, c, eps, 50, rng.gen())?;
        bad += usize::from(!(cert.size_holds && cert.y_failures == 0 && cert.y_checks == 51));
        made += 1;
    }
    Ok((bad == 0, format!("50 instances x 51 Y, {bad} failures")))
}

fn chang(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(20..600);
        let a = proper_set(rng, n, 0.02, 0.5)?;
        let theta = rng.gen_range(0.1..0.9);
        let spec = spectrum_at(&a, theta)?.frequencies;
        let cover = maximal_dissociated(&spec);
        let span = span_of(&cover.lambda_set());
        let ok = cover.covered == spec
            && spec.is_subset(&span)
            && is_dissociated(&cover.lambda_set())?.dissociated
            && cover.verify();
        bad += usize::from(!ok);
        worst_ratio = worst_ratio.max(chang_ratio(cover.lambda.len(), theta, a.density()));
    }
    Ok((bad == 0, format!("50 instances, {bad} failures, max Chang ratio {worst_ratio:.3}")))
}

fn large(rng: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for _ in 0..50 {
        let n = rng.gen_range(20..600);
        let a = proper_set(rng, n, 0.05, 0.6)?;
        let b = bohr_build(z(n), &random_spec(rng, n, 3, 0.5)?)?.elements;
        bad += usize::from(!large_decomposition(&a, &b, 0.05, 1e-6)?.holds);
    }
    let cfg = PipelineConfig::default();
    let fives = GroupSet::multiples(z(100), 5);
    let res = increment_large(&fives, &cfg)?;
    let b = bohr_build(fives.group(), &res.bohr)?.elements;
    let beta = FourierTable::of_set(&b);
    let delta = fives.density();
    let bound = std::f64::consts::TAU * delta * delta * cfg.c_omega;
    let hi = spectrum_at(&fives, delta.powf(0.1))?.frequencies;
    let worst = hi
        .iter()
        .map(|r| (beta.coeffs()[r] / b.len() as f64 - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    Ok((
        bad == 0 && worst <= bound,
        format!("50 decompositions, {bad} failures; subgroup max |beta^ - 1| = {worst:.2e} <= {bound:.2e}"),
    ))
}

fn extremal() -> Check {
    let mut bad = Vec::new();
    for n in 1..=12usize {
        let brute = (0u32..1 << n)
            .filter(|mask| integer_free(&(1..=n as u64).filter(|i| mask >> (i - 1) & 1 == 1).collect::<Vec<_>>()))
            .map(u32::count_ones)
            .max()
            .unwrap_or(0) as usize;
        if max_3ap_free_exact(n)?.size != brute {
            bad.push(format!("exact({n})"));
        }
    }
    let r = exact_sizes(50)?;
    for n in 1..=50 {
        let exact = max_3ap_free_exact(n)?;
        let greedy = greedy_3ap_free(n)?;
        let mut reps = vec![&exact, &greedy];
        let b;
        if n >= 2 {
            b = behrend(n)?;
            reps.push(&b);
        }
        if exact.size != r[n] || reps.iter().any(|x| x.size > exact.size) {
            bad.push(format!("dominance at {n}"));
        }
        if reps.iter().any(|x| !x.verified_free || !integer_free(&x.set)) {
            bad.push(format!("free at {n}"));
        }
    }
    Ok((bad.is_empty(), format!("r(50) = {}, issues: {:?}", r[50], bad)))
}

fn iteration(seed: u64) -> Check {
    let b = behrend(500)?;
    let cfg = PipelineConfig { seed, ..Default::default() };
    let first = iterate(&b.set, 500, &cfg, 8)?;
    let second = iterate(&b.set, 500, &cfg, 8)?;
    let same = serde_json::to_string(&first).ok() == serde_json::to_string(&second).ok();
    let monotone = first.steps.iter().all(|s| s.factor >= 1.0);
    Ok((
        same && monotone,
        format!(
            "|A0| = {}, {} steps, termination {:?}, deterministic {same}",
            b.size,
            first.steps.len(),
            first.termination
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass_and_format() {
        for id in [3, 9, 10, 11, 12] {
            let o = run(id, 1);
            assert!(o.passed, "{o}");
            assert!(o.to_string().starts_with("[PASS]"));
            assert!(o.to_string().contains(CRITERIA[id - 1]));
        }
    }
}
