//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every oracle below is local to this file.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roth_core::bohr::{bohr_build, regular_radius, BohrSpec};
use roth_core::constructions::{behrend, greedy_3ap_free, max_3ap_free_exact, random_set};
use roth_core::fourier::{convolve, count_3aps_set, parseval_residual};
use roth_core::increment::{increment_large, iterate, l2_increment, large_decomposition, selection_refine};
use roth_core::span::{chang_ratio, maximal_dissociated};
use roth_core::spectrum::{energy_2m, shkredov_check, direct_energy_allowed};
use roth_core::{CountMode, CyclicGroup, GroupSet, PipelineConfig, RealFunction};

type Verdict = (bool, String);

fn z(n: usize) -> CyclicGroup {
    CyclicGroup::new(n).unwrap()
}

fn rng_for(id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_0000 + id)
}

fn nontrivial(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> GroupSet {
    loop {
        let s = random_set(z(n), rng.gen_range(lo..hi), rng.gen()).unwrap();
        if !s.is_empty() && s.len() < n {
            return s;
        }
    }
}

fn elems(set: &GroupSet) -> Vec<usize> {
    set.iter().collect()
}

/// `A^(r)` for every r by the naive O(N^2) sum.
fn naive_transform(set: &GroupSet) -> Vec<Complex64> {
    let n = set.modulus();
    (0..n)
        .map(|r| {
            set.iter()
                .map(|x| Complex64::from_polar(1.0, -TAU * ((x * r) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Pairs (x, d) with x, x + d, x + 2d all in A.
fn progressions(set: &GroupSet) -> u64 {
    let n = set.modulus();
    let mut count = 0;
    for x in set.iter() {
        for d in 0..n {
            if set.contains((x + d) % n) && set.contains((x + 2 * d) % n) {
                count += 1;
            }
        }
    }
    count
}

/// Histogram of m-fold sums, then the sum of squared counts.
fn energy_oracle(d: &[usize], n: usize, m: u32) -> u128 {
    let mut hist: HashMap<usize, u128> = HashMap::from([(0, 1)]);
    for _ in 0..m {
        let mut next = HashMap::new();
        for (&s, &c) in &hist {
            for &x in d {
                *next.entry((s + x) % n).or_insert(0) += c;
            }
        }
        hist = next;
    }
    hist.values().map(|c| c * c).sum()
}

fn free_integers(set: &[u64]) -> bool {
    let members: std::collections::HashSet<u64> = set.iter().copied().collect();
    for (i, &a) in set.iter().enumerate() {
        for &c in &set[i + 1..] {
            let (lo, hi) = (a.min(c), a.max(c));
            if (hi - lo) % 2 == 0 && members.contains(&(lo + (hi - lo) / 2)) {
                return false;
            }
        }
    }
    true
}

fn dist(x: usize, n: usize) -> f64 {
    let r = x as f64 / n as f64;
    r.min(1.0 - r)
}

/// Bohr membership from floating distances.
fn bohr_oracle(n: usize, gamma: &[usize], radius: f64) -> Vec<usize> {
    (0..n)
        .filter(|&x| gamma.iter().all(|&t| dist(t * x % n, n) <= radius + 1e-12))
        .collect()
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize, max_rank: usize) -> BohrSpec {
    let rank = rng.gen_range(1..=max_rank.min(n - 1));
    let mut freqs: Vec<usize> = (1..n).collect();
    freqs.shuffle(rng);
    freqs.truncate(rank);
    BohrSpec::new(freqs, rng.gen_range(0.01..0.5)).unwrap()
}

fn spectrum_oracle(set: &GroupSet, theta: f64) -> Vec<usize> {
    naive_transform(set)
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() >= theta * set.len() as f64 - 1e-9)
        .map(|(r, _)| r)
        .collect()
}

fn c1_parseval() -> Verdict {
    let mut rng = rng_for(1);
    let mut worst: f64 = 0.0;
    let mut naive_checked = 0;
    for n in [5, 101, 1009, 10007] {
        for i in 0..50 {
            let a = random_set(z(n), rng.gen_range(0.01..0.99), rng.gen()).unwrap();
            worst = worst.max(parseval_residual(&a));
            if n <= 1009 && i < 3 && !a.is_empty() {
                let sum: f64 = naive_transform(&a).iter().map(|c| c.norm_sqr()).sum();
                let expected = (a.len() * n) as f64;
                worst = worst.max((sum - expected).abs() / expected);
                naive_checked += 1;
            }
        }
    }
    (worst <= 1e-9, format!("200 sets ({naive_checked} via naive DFT), worst residual {worst:.2e}"))
}

fn c2_three_ap_identity() -> Verdict {
    let mut rng = rng_for(2);
    let mut bad = 0;
    let mut total = 0;
    for n in (3..=501).step_by(2).filter(|n| n % 10 == 1 || *n <= 15) {
        let a = random_set(z(n), rng.gen_range(0.05..0.9), rng.gen()).unwrap();
        let fourier = count_3aps_set(&a, CountMode::Fourier).unwrap().round();
        let direct = count_3aps_set(&a, CountMode::Direct).unwrap();
        bad += usize::from(fourier != direct || direct != progressions(&a) as f64);
        total += 1;
    }
    let mut fixtures = 0;
    for n in [9, 20, 35, 50, 100] {
        let mut reps = vec![greedy_3ap_free(n).unwrap(), behrend(n).unwrap()];
        if n <= 50 {
            reps.push(max_3ap_free_exact(n).unwrap());
        }
        for rep in reps {
            let g = z(2 * n + 1);
            let a = GroupSet::from_residues(g, rep.set.iter().map(|&x| x as usize));
            let size = a.len() as f64;
            let fourier = count_3aps_set(&a, CountMode::Fourier).unwrap().round();
            let direct = count_3aps_set(&a, CountMode::Direct).unwrap();
            bad += usize::from(fourier != size || direct != size);
            fixtures += 1;
        }
    }
    (bad == 0, format!("{total} random odd-N sets, {fixtures} progression-free fixtures, {bad} mismatches"))
}

fn c3_convolution() -> Verdict {
    let mut rng = rng_for(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..300);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let fast = convolve(&RealFunction::new(z(n), f.clone()).unwrap(), &RealFunction::new(z(n), g.clone()).unwrap())
            .unwrap();
        for x in 0..n {
            let terms: Vec<f64> = (0..n).map(|t| f[t] * g[(x + n - t) % n]).collect();
            let exact: f64 = terms.iter().sum();
            let scale: f64 = terms.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            worst = worst.max((fast.values()[x] - exact).abs() / scale);
        }
    }
    (worst <= 1e-6, format!("50 pairs, worst relative error {worst:.2e}"))
}

fn c4_energy() -> Verdict {
    let mut rng = rng_for(4);
    let mut bad = 0;
    for _ in 0..50 {
        let n = rng.gen_range(31..300);
        let mut pool: Vec<usize> = (0..n).collect();
        pool.shuffle(&mut rng);
        let d: Vec<usize> = pool[..rng.gen_range(1..=30)].to_vec();
        let set = GroupSet::from_residues(z(n), d.iter().copied());
        for m in 1..=4 {
            let oracle = energy_oracle(&d, n, m) as f64;
            bad += usize::from(energy_2m(&set, m, CountMode::Fourier).unwrap().round() != oracle);
            if direct_energy_allowed(d.len(), m) {
                bad += usize::from(energy_2m(&set, m, CountMode::Direct).unwrap() != oracle);
            }
        }
    }
    let mut subgroups = 0;
    for (n, step) in [(4, 2), (12, 4), (60, 6), (99, 9), (128, 16), (7, 1)] {
        let set = GroupSet::multiples(z(n), step);
        let k = set.len() as f64;
        for m in 1..=4 {
            let want = k.powi(2 * m as i32 - 1);
            let fourier = energy_2m(&set, m, CountMode::Fourier).unwrap().round();
            let direct = if direct_energy_allowed(set.len(), m) {
                energy_2m(&set, m, CountMode::Direct).unwrap()
            } else {
                energy_oracle(&elems(&set), n, m) as f64
            };
            bad += usize::from(fourier != want || direct != want);
            subgroups += 1;
        }
    }
    (bad == 0, format!("50 random D x m in 1..=4, {subgroups} subgroup cases, {bad} mismatches"))
}

fn c5_shkredov() -> Verdict {
    let mut rng = rng_for(5);
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(8..400);
        let a = nontrivial(&mut rng, n, 0.02, 0.7);
        let theta = rng.gen_range(0.02..1.0);
        let m = rng.gen_range(2..=3);
        violations += usize::from(!shkredov_check(&a, theta, m).unwrap().holds);
    }
    let mut structured: Vec<GroupSet> = Vec::new();
    for (n, step) in [(60, 3), (100, 5), (128, 8), (210, 7), (81, 9)] {
        structured.push(GroupSet::multiples(z(n), step));
    }
    for (n, len) in [(101, 7), (211, 30), (64, 5)] {
        structured.push(GroupSet::from_residues(z(n), 0..len));
    }
    for n in [30, 60] {
        structured.push(GroupSet::from_residues(z(2 * n + 1), greedy_3ap_free(n).unwrap().set.iter().map(|&x| x as usize)));
    }
    assert_eq!(structured.len(), 10);
    let mut cases = 0;
    for a in &structured {
        for (theta, m) in [(0.25, 2), (0.6, 3)] {
            violations += usize::from(!shkredov_check(a, theta, m).unwrap().holds);
            cases += 1;
        }
    }
    (violations == 0, format!("100 random + {cases} structured, {violations} violations"))
}

fn c6_bohr_bounds() -> Verdict {
    let mut rng = rng_for(6);
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=10007);
        let spec = random_spec(&mut rng, n, 4);
        let d = spec.rank() as i32;
        let full = bohr_oracle(n, &spec.gamma_set, spec.radius).len() as f64;
        let half = bohr_oracle(n, &spec.gamma_set, spec.radius / 2.0).len() as f64;
        let built = bohr_build(z(n), &spec).map(|b| b.len() as f64);
        let lower = spec.radius.powi(d) * n as f64 <= full;
        let upper = full <= 8f64.powi(d + 1) * half;
        bad += usize::from(!(lower && upper && built.ok() == Some(full)));
    }
    (bad == 0, format!("100 specs with rank <= 4, N <= 10007, {bad} failures"))
}

fn c7_regular_radius() -> Verdict {
    let mut rng = rng_for(7);
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(30..2500);
        let spec = random_spec(&mut rng, n, 4);
        let cert = regular_radius(z(n), &spec).unwrap();
        let g = cert.gamma_prime;
        let d = spec.rank() as f64;
        let in_range = g >= spec.radius / 2.0 && g <= spec.radius;
        let base = bohr_oracle(n, &spec.gamma_set, g).len() as f64;
        let eta_max = 1.0 / (100.0 * d);
        let grid_ok = (0..1000).all(|i| {
            let eta = -eta_max + 2.0 * eta_max * i as f64 / 999.0;
            let s = bohr_oracle(n, &spec.gamma_set, (1.0 + eta) * g).len() as f64;
            let slack = 100.0 * d * eta.abs();
            (1.0 - slack) * base <= s + 1e-9 && s <= (1.0 + slack) * base + 1e-9
        });
        bad += usize::from(!(in_range && cert.holds && grid_ok));
    }
    (bad == 0, format!("100 specs, certificate + 1000-point grid, {bad} failures"))
}

fn c8_l2() -> Verdict {
    let cfg = PipelineConfig::default();
    let fives = GroupSet::multiples(z(100), 5);
    let gamma = GroupSet::from_residues(z(100), spectrum_oracle(&fives, 0.9));
    let fixture = l2_increment(&fives, &gamma, &cfg).unwrap().factor;
    let mut rng = rng_for(8);
    let mut bad = 0;
    for _ in 0..40 {
        let n = rng.gen_range(10..300);
        let a = nontrivial(&mut rng, n, 0.05, 0.6);
        let mut spec = spectrum_oracle(&a, rng.gen_range(0.15..0.7));
        spec.push(rng.gen_range(1..n));
        let gamma = GroupSet::from_residues(z(n), spec);
        let res = l2_increment(&a, &gamma, &cfg).unwrap();
        let b = bohr_oracle(n, &res.bohr.gamma_set, res.bohr.radius);
        let mut best = (0, 0);
        for t in 0..n {
            let c = b.iter().filter(|&&y| a.contains((y + n - t) % n)).count();
            if c > best.1 {
                best = (t, c);
            }
        }
        let density = best.1 as f64 / b.len() as f64;
        bad += usize::from(res.t != best.0 || res.new_density != density || res.factor < 1.0);
    }
    (fixture == 5.0 && bad == 0, format!("fixture factor {fixture}; 40 inputs vs exhaustive argmax, {bad} failures"))
}

fn c9_selection() -> Verdict {
    let mut rng = rng_for(9);
    let mut bad = 0;
    let mut made = 0;
    while made < 50 {
        let n = rng.gen_range(60..300);
        let x = nontrivial(&mut rng, n, 0.03, 0.12);
        let h = nontrivial(&mut rng, n, 0.03, 0.12);
        let mut sums: Vec<usize> = Vec::new();
        for a in x.iter() {
            for b in h.iter() {
                sums.push((a + b) % n);
            }
        }
        sums.sort_unstable();
        sums.dedup();
        let keep = rng.gen_range(0.4..1.0);
        let d: Vec<usize> = sums.iter().copied().filter(|_| rng.gen_bool(keep)).collect();
        if d.is_empty() {
            continue;
        }
        let eps = rng.gen_range(0.0..0.4);
        let (xs, hs) = (x.len() as f64, h.len() as f64);
        let c = 0.9 * d.len() as f64 / (xs * hs.powf(1.0 - eps));
        let dset = GroupSet::from_residues(z(n), d);
        let cert = selection_refine(&x, &h, &dset, c, eps, 50, rng.gen()).unwrap();
        // recheck the size bound and X' itself as a Y from scratch
        let xp = elems(&cert.x_prime);
        let size_ok = xp.len() as f64 >= c / 4.0 * xs * hs.powf(-eps);
        let hits = {
            let mut s: Vec<usize> = xp.iter().flat_map(|&a| h.iter().map(move |b| (a + b) % n)).collect();
            s.sort_unstable();
            s.dedup();
            s.into_iter().filter(|&v| dset.contains(v)).count() as f64
        };
        let y_ok = xp.is_empty() || hits >= c * c / 8.0 * xp.len() as f64 * hs.powf(1.0 - 2.0 * eps);
        bad += usize::from(!(cert.holds && cert.y_checks == 51 && size_ok && y_ok));
        made += 1;
    }
    (bad == 0, format!("50 instances, 50 sampled Y + X' each, {bad} failures"))
}

/// Signed 0/+-1 combinations of `gens`.
fn span_oracle(gens: &[usize], n: usize) -> Vec<bool> {
    let mut reach = vec![false; n];
    reach[0] = true;
    for &g in gens {
        let prev = reach.clone();
        for (x, &on) in prev.iter().enumerate() {
            if on {
                reach[(x + g) % n] = true;
                reach[(x + n - g % n) % n] = true;
            }
        }
    }
    reach
}

fn dissociated_oracle(gens: &[usize], n: usize) -> bool {
    (0..gens.len()).all(|i| !span_oracle(&gens[..i], n)[gens[i] % n])
}

fn c10_chang() -> Verdict {
    let mut rng = rng_for(10);
    let mut bad = 0;
    let mut ratios = Vec::new();
    for _ in 0..50 {
        let n = rng.gen_range(16..500);
        let a = nontrivial(&mut rng, n, 0.03, 0.5);
        let theta = rng.gen_range(0.1..0.9);
        let delta_theta = spectrum_oracle(&a, theta);
        let target = GroupSet::from_residues(z(n), delta_theta.iter().copied());
        let cover = maximal_dissociated(&target);
        let span = span_oracle(&cover.lambda, n);
        let exact = elems(&cover.covered) == delta_theta;
        let spanned = delta_theta.iter().all(|&r| span[r]);
        bad += usize::from(!(exact && spanned && dissociated_oracle(&cover.lambda, n)));
        ratios.push(chang_ratio(cover.lambda.len(), theta, a.density()));
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    (bad == 0, format!("50 instances, {bad} failures; Chang ratio max {max:.3}"))
}

fn c11_large() -> Verdict {
    let mut rng = rng_for(11);
    let mut bad = 0;
    for _ in 0..50 {
        let n = rng.gen_range(16..500);
        let a = nontrivial(&mut rng, n, 0.05, 0.6);
        let spec = random_spec(&mut rng, n, 3);
        let b = GroupSet::from_residues(z(n), bohr_oracle(n, &spec.gamma_set, spec.radius));
        let dec = large_decomposition(&a, &b, 0.05, 1e-6).unwrap();
        let t_a = progressions(&a) as f64;
        let within = dec.diff <= (dec.s1 + dec.s2 + dec.s3) * (1.0 + 1e-6) + 1e-6 * t_a;
        bad += usize::from(!(within && dec.holds && dec.t_a == t_a));
    }
    let cfg = PipelineConfig::default();
    let fives = GroupSet::multiples(z(100), 5);
    let res = increment_large(&fives, &cfg).unwrap();
    let b = GroupSet::from_residues(z(100), bohr_oracle(100, &res.bohr.gamma_set, res.bohr.radius));
    let beta = naive_transform(&b);
    let delta = fives.density();
    let bound = TAU * delta * delta * cfg.c_omega;
    let big = spectrum_oracle(&fives, delta.powf(0.1));
    let worst = big
        .iter()
        .map(|&r| (beta[r] / b.len() as f64 - 1.0).norm())
        .fold(0.0, f64::max);
    (
        bad == 0 && worst <= bound && !big.is_empty(),
        format!("50 decompositions, {bad} failures; subgroup |beta^ - 1| <= {worst:.1e} on {} frequencies", big.len()),
    )
}

fn c12_extremal() -> Verdict {
    let mut issues = Vec::new();
    for n in 1..=12u64 {
        let mut best = 0;
        for mask in 0u32..1 << n {
            let s: Vec<u64> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            if s.len() > best && free_integers(&s) {
                best = s.len();
            }
        }
        if max_3ap_free_exact(n as usize).unwrap().size != best {
            issues.push(format!("exact({n}) != {best}"));
        }
    }
    for n in 1..=50 {
        let exact = max_3ap_free_exact(n).unwrap();
        let mut reps = vec![greedy_3ap_free(n).unwrap()];
        if n >= 2 {
            reps.push(behrend(n).unwrap());
        }
        if reps.iter().any(|r| r.size > exact.size) {
            issues.push(format!("dominance at {n}"));
        }
        reps.push(exact);
        for r in &reps {
            let in_range = r.set.iter().all(|&x| x >= 1 && x <= n as u64);
            if !(r.verified_free && free_integers(&r.set) && in_range) {
                issues.push(format!("{} at {n} not progression-free", r.method));
            }
        }
    }
    for n in [100, 500, 2000] {
        let b = behrend(n).unwrap();
        if !(b.verified_free && free_integers(&b.set)) {
            issues.push(format!("behrend({n})"));
        }
    }
    (issues.is_empty(), format!("n <= 12 exhaustive, n <= 50 dominance; issues {issues:?}"))
}

fn c13_iteration() -> Verdict {
    let a0 = behrend(500).unwrap().set;
    let cfg = PipelineConfig { seed: 17, ..Default::default() };
    let first = iterate(&a0, 500, &cfg, 10).unwrap();
    let second = iterate(&a0, 500, &cfg, 10).unwrap();
    let deterministic = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    let factors_ok = first.steps.iter().all(|s| s.factor >= 1.0);
    let free = free_integers(&first.final_set);
    (
        deterministic && factors_ok && free && !first.steps.is_empty(),
        format!(
            "{} steps, termination {:?}, deterministic {deterministic}",
            first.steps.len(),
            first.termination
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict, Option<f64>);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("parseval", c1_parseval, Some(10.0)),
        ("3ap-identity", c2_three_ap_identity, Some(30.0)),
        ("convolution", c3_convolution, None),
        ("energy", c4_energy, None),
        ("shkredov", c5_shkredov, None),
        ("bohr-bounds", c6_bohr_bounds, None),
        ("regular-radius", c7_regular_radius, None),
        ("l2-increment", c8_l2, None),
        ("selection", c9_selection, None),
        ("chang-cover", c10_chang, None),
        ("large-decomposition", c11_large, None),
        ("exact-extremal", c12_extremal, None),
        ("iteration", c13_iteration, Some(60.0)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run);
        let secs = start.elapsed().as_secs_f64();
        let (mut ok, mut detail) = outcome.unwrap_or_else(|_| (false, "panicked".to_string()));
        if let Some(limit) = budget {
            if secs >= *limit {
                ok = false;
                detail.push_str(&format!("; exceeded {limit}s"));
            }
        }
        failures += usize::from(!ok);
        println!("{} {:>2} {name:<20} {secs:>7.2}s  {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
