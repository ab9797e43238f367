//! Progression-free sets of integers and random test sets.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{is_3ap_free_integers, CyclicGroup, GroupSet};
use crate::setfile::SetFile;

/// Largest n accepted by [`max_3ap_free_exact`].
pub const EXACT_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Behrend,
    Greedy,
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Behrend => "behrend",
            Method::Greedy => "greedy",
            Method::Exact => "exact",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "behrend" => Ok(Method::Behrend),
            "greedy" => Ok(Method::Greedy),
            "exact" => Ok(Method::Exact),
            other => Err(Error::invalid(format!("unknown construction method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub method: Method,
    pub n: usize,
    pub set: Vec<u64>,
    pub size: usize,
    /// Checked in a group of order `2 max + 1`, so no wraparound.
    pub verified_free: bool,
}

impl ConstructionReport {
    fn new(method: Method, n: usize, mut set: Vec<u64>) -> Self {
        set.sort_unstable();
        ConstructionReport {
            method,
            n,
            size: set.len(),
            verified_free: is_3ap_free_integers(&set),
            set,
        }
    }

    pub fn to_set_file(&self) -> SetFile {
        SetFile {
            n: self.n,
            elements: self.set.iter().map(|&x| x as i64).collect(),
        }
    }
}

/// CSV table with header `n,method,size`.
pub fn write_table<W: Write>(reports: &[ConstructionReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,method,size")?;
    for r in reports {
        writeln!(out, "{},{},{}", r.n, r.method, r.size)?;
    }
    Ok(())
}

/// Values `sum a_i base^i <= limit` with digits `a_i < d`, ascending, paired
/// with `sum a_i^2`.
fn sphere_points(d: u64, base: u64, k: u32, limit: u64) -> Vec<(u64, u64)> {
    fn walk(i: u32, d: u64, base: u64, value: u64, radius: u64, limit: u64, out: &mut Vec<(u64, u64)>) {
        if i == 0 {
            out.push((value, radius));
            return;
        }
        let place = base.pow(i - 1);
        for a in 0..d {
            let v = value + a * place;
            if v > limit {
                break;
            }
            walk(i - 1, d, base, v, radius + a * a, limit, out);
        }
    }
    let mut out = Vec::new();
    walk(k, d, base, 0, 0, limit, &mut out);
    out
}

/// Sphere construction: digit vectors in `[0, d)^k` read in base `2d - 1`
/// (so sums of two points never carry) with a common `sum a_i^2`. A window
/// of length n over the most populous sphere, shifted to start at 1, is the
/// output. `d` ranges over `[2, ceil(sqrt n)]` and k over `[1, ceil(ln n)]`.
pub fn behrend(n: usize) -> Result<ConstructionReport> {
    if n < 2 {
        return Err(Error::invalid(format!("behrend needs n >= 2, got {n}")));
    }
    let limit = 4 * n as u64;
    let d_max = ((n as f64).sqrt().ceil() as u64).max(2);
    let k_max = ((n as f64).ln().ceil() as u32).max(1);
    let mut best: Vec<u64> = vec![1];
    for d in 2..=d_max {
        let base = 2 * d - 1;
        for k in 1..=k_max {
            if k > 1 && base.checked_pow(k - 1).is_none_or(|p| p > limit) {
                break;
            }
            let mut spheres: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
            for (v, r) in sphere_points(d, base, k, limit) {
                spheres.entry(r).or_default().push(v);
            }
            for values in spheres.values_mut() {
                values.sort_unstable();
                let mut lo = 0;
                for hi in 0..values.len() {
                    while values[hi] - values[lo] >= n as u64 {
                        lo += 1;
                    }
                    if hi + 1 - lo > best.len() {
                        best = values[lo..=hi].iter().map(|v| v - values[lo] + 1).collect();
                    }
                }
            }
        }
    }
    Ok(ConstructionReport::new(Method::Behrend, n, best))
}

/// Scans `1..=n`, keeping x when it closes no progression with kept elements.
pub fn greedy_3ap_free(n: usize) -> Result<ConstructionReport> {
    if n < 1 {
        return Err(Error::invalid("greedy needs n >= 1"));
    }
    let mut member = vec![false; n + 1];
    let mut kept: Vec<u64> = Vec::new();
    for x in 1..=n {
        // x is the largest term: y is the middle, 2y - x the smallest
        let closes = kept.iter().any(|&y| {
            let y = y as usize;
            2 * y > x && member[2 * y - x]
        });
        if !closes {
            member[x] = true;
            kept.push(x as u64);
        }
    }
    Ok(ConstructionReport::new(Method::Greedy, n, kept))
}

/// Searches `[1, m]` for a progression-free set of size `target`; bit `i`
/// stands for the integer `i + 1`.
fn search(pos: usize, m: usize, chosen: u64, forbidden: u64, size: usize, target: usize, r: &[usize]) -> Option<u64> {
    if size == target {
        return Some(chosen);
    }
    if pos > m || size + r[m - pos + 1] < target {
        return None;
    }
    let bit = 1u64 << (pos - 1);
    if forbidden & bit == 0 {
        let mut forb = forbidden;
        let mut rest = chosen;
        while rest != 0 {
            let y = rest.trailing_zeros() as usize + 1;
            rest &= rest - 1;
            let z = 2 * pos - y;
            if z <= m {
                forb |= 1u64 << (z - 1);
            }
        }
        if let Some(s) = search(pos + 1, m, chosen | bit, forb, size + 1, target, r) {
            return Some(s);
        }
    }
    search(pos + 1, m, chosen, forbidden, size, target, r)
}

/// Exact maxima `r(0..=n)` for `[1, m]` plus a witness for `r(n)`.
///
/// Runs over `m = 1..=n` using `r(m) <= r(m-1) + 1`: a set of size
/// `r(m-1) + 1` in `[1, m]` must contain both 1 and m, and the bound
/// `size + r(remaining length)` prunes the branch.
fn solve(n: usize) -> (Vec<usize>, u64) {
    let mut r = vec![0usize; n + 1];
    let mut witness = 0u64;
    for m in 1..=n {
        let target = r[m - 1] + 1;
        // 1 is forced, so start with it chosen
        match search(2, m, 1, 0, 1, target, &r) {
            Some(s) => {
                r[m] = target;
                witness = s;
            }
            None => r[m] = r[m - 1],
        }
    }
    (r, witness)
}

fn guard(n: usize) -> Result<()> {
    if n > EXACT_LIMIT {
        return Err(Error::CostGuard(format!(
            "exact search limited to n <= {EXACT_LIMIT}, got {n}"
        )));
    }
    Ok(())
}

/// Exact maximum progression-free subset of `[1, n]`.
pub fn max_3ap_free_exact(n: usize) -> Result<ConstructionReport> {
    guard(n)?;
    let (_, witness) = solve(n);
    let set = (0..n as u64).filter(|i| witness >> i & 1 == 1).map(|i| i + 1).collect();
    Ok(ConstructionReport::new(Method::Exact, n, set))
}

/// `r(m)` for `m = 0..=n`, from one pass of the same search.
pub fn exact_sizes(n: usize) -> Result<Vec<usize>> {
    guard(n)?;
    Ok(solve(n).0)
}

/// Each element kept independently with probability `delta`.
pub fn random_set(group: CyclicGroup, delta: f64, seed: u64) -> Result<GroupSet> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ind = (0..group.modulus()).map(|_| rng.gen::<f64>() < delta).collect();
    GroupSet::from_indicator(group, ind)
}
