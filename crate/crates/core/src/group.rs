//! The ambient group Z/NZ, dense subsets of it, real-valued functions on it,
//! and the brute-force three-term progression oracles everything else is
//! checked against.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin.
///
/// The first seven prime bases are exact below 3.4e14; above that the first
/// twelve primes cover the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let bases: &[u64] = if n < 341_550_071_728_321 {
        &SMALL[..7]
    } else {
        &SMALL
    };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in bases {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Smallest prime `p` with `lo < p <= hi`, if any.
pub fn smallest_prime_in(lo: u64, hi: u64) -> Option<u64> {
    (lo + 1..=hi).find(|&p| is_prime(p))
}

/// The cyclic group Z/NZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicGroup {
    modulus: usize,
    is_prime: bool,
}

impl CyclicGroup {
    pub fn new(modulus: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::invalid(format!("modulus must be >= 2, got {modulus}")));
        }
        Ok(CyclicGroup {
            modulus,
            is_prime: is_prime(modulus as u64),
        })
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    #[inline]
    pub fn is_prime(&self) -> bool {
        self.is_prime
    }

    #[inline]
    pub fn is_odd(&self) -> bool {
        self.modulus % 2 == 1
    }

    /// Canonical representative of an arbitrary integer.
    #[inline]
    pub fn reduce(&self, x: i64) -> usize {
        x.rem_euclid(self.modulus as i64) as usize
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        ((a as u128 * b as u128) % self.modulus as u128) as usize
    }

    /// Distance of `x/N` to the nearest integer, scaled by N: `min(x, N - x)`.
    #[inline]
    pub fn circle_distance(&self, x: usize) -> usize {
        let x = x % self.modulus;
        x.min(self.modulus - x)
    }

    pub(crate) fn check_same(&self, other: &CyclicGroup) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(())
    }
}

/// A subset of Z/NZ stored as a dense indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSet {
    group: CyclicGroup,
    elements: Vec<bool>,
    size: usize,
}

impl GroupSet {
    pub fn empty(group: CyclicGroup) -> Self {
        GroupSet {
            group,
            elements: vec![false; group.modulus()],
            size: 0,
        }
    }

    pub fn full(group: CyclicGroup) -> Self {
        GroupSet {
            group,
            elements: vec![true; group.modulus()],
            size: group.modulus(),
        }
    }

    /// Builds a set from arbitrary integers, reducing each mod N.
    pub fn from_elements<I>(group: CyclicGroup, elems: I) -> Self
    where
        I: IntoIterator<Item = i64>,
    {
        let mut set = GroupSet::empty(group);
        for x in elems {
            set.insert(group.reduce(x));
        }
        set
    }

    pub fn from_residues<I>(group: CyclicGroup, elems: I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = GroupSet::empty(group);
        for x in elems {
            set.insert(x % group.modulus());
        }
        set
    }

    pub fn from_indicator(group: CyclicGroup, elements: Vec<bool>) -> Result<Self> {
        if elements.len() != group.modulus() {
            return Err(Error::invalid(format!(
                "indicator length {} does not match modulus {}",
                elements.len(),
                group.modulus()
            )));
        }
        let size = elements.iter().filter(|&&b| b).count();
        Ok(GroupSet {
            group,
            elements,
            size,
        })
    }

    /// Multiples of `step` in Z/NZ; a subgroup when `step` divides N.
    pub fn multiples(group: CyclicGroup, step: usize) -> Self {
        let mut set = GroupSet::empty(group);
        let mut x = 0usize;
        loop {
            if !set.insert(x) {
                break;
            }
            x = group.add(x, step % group.modulus());
        }
        set
    }

    /// Returns `true` if `x` was newly inserted.
    pub fn insert(&mut self, x: usize) -> bool {
        let slot = &mut self.elements[x];
        if *slot {
            false
        } else {
            *slot = true;
            self.size += 1;
            true
        }
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let slot = &mut self.elements[x];
        if *slot {
            *slot = false;
            self.size -= 1;
            true
        } else {
            false
        }
    }

    #[inline]
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.group.modulus()
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.elements[x]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn indicator(&self) -> &[bool] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn density(&self) -> f64 {
        self.size as f64 / self.modulus() as f64
    }

    pub fn density_ratio(&self) -> Ratio<usize> {
        Ratio::new(self.size, self.modulus())
    }

    pub fn is_subset(&self, other: &GroupSet) -> bool {
        self.group == other.group && self.iter().all(|x| other.contains(x))
    }

    pub fn union(&self, other: &GroupSet) -> Result<GroupSet> {
        self.group.check_same(&other.group)?;
        let ind = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(&a, &b)| a || b)
            .collect();
        GroupSet::from_indicator(self.group, ind)
    }

    pub fn intersection(&self, other: &GroupSet) -> Result<GroupSet> {
        self.group.check_same(&other.group)?;
        let ind = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(&a, &b)| a && b)
            .collect();
        GroupSet::from_indicator(self.group, ind)
    }

    pub fn difference(&self, other: &GroupSet) -> Result<GroupSet> {
        self.group.check_same(&other.group)?;
        let ind = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(&a, &b)| a && !b)
            .collect();
        GroupSet::from_indicator(self.group, ind)
    }

    pub fn intersection_size(&self, other: &GroupSet) -> usize {
        self.elements
            .iter()
            .zip(&other.elements)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// A + t.
    pub fn translate(&self, t: i64) -> GroupSet {
        let shift = self.group.reduce(t);
        let g = self.group;
        GroupSet::from_residues(g, self.iter().map(|x| g.add(x, shift)))
    }

    /// -A.
    pub fn negate(&self) -> GroupSet {
        let g = self.group;
        GroupSet::from_residues(g, self.iter().map(|x| g.neg(x)))
    }

    /// λ·A, defined only for λ coprime to N.
    pub fn dilate(&self, lambda: i64) -> Result<GroupSet> {
        let g = self.group;
        let l = g.reduce(lambda);
        if gcd(l, g.modulus()) != 1 {
            return Err(Error::invalid(format!(
                "dilation factor {lambda} is not invertible mod {}",
                g.modulus()
            )));
        }
        Ok(GroupSet::from_residues(g, self.iter().map(|x| g.mul(x, l))))
    }

    /// A + B, computed exactly.
    pub fn sumset(&self, other: &GroupSet) -> Result<GroupSet> {
        self.group.check_same(&other.group)?;
        let g = self.group;
        let mut out = GroupSet::empty(g);
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let large_elems = large.to_vec();
        for a in small.iter() {
            for &b in &large_elems {
                out.insert(g.add(a, b));
            }
            if out.len() == g.modulus() {
                break;
            }
        }
        Ok(out)
    }

    /// A - B.
    pub fn difference_set(&self, other: &GroupSet) -> Result<GroupSet> {
        self.sumset(&other.negate())
    }

    /// Doubling constant K = |A+A| / |A|.
    pub fn doubling(&self) -> Result<Ratio<usize>> {
        if self.is_empty() {
            return Err(Error::invalid("doubling of the empty set"));
        }
        let sum = self.sumset(self)?;
        Ok(Ratio::new(sum.len(), self.len()))
    }

    /// Brute-force three-term progression check: looks for x != y in A and
    /// z in A with x + y = 2z.
    pub fn find_3ap(&self) -> Option<ThreeAp> {
        let g = self.group;
        let n = g.modulus();
        // halves[v] lists z in A with 2z = v.
        let mut halves: Vec<[usize; 2]> = vec![[usize::MAX; 2]; n];
        for z in self.iter() {
            let v = g.add(z, z);
            let slot = &mut halves[v];
            if slot[0] == usize::MAX {
                slot[0] = z;
            } else {
                slot[1] = z;
            }
        }
        let elems = self.to_vec();
        for (i, &x) in elems.iter().enumerate() {
            for &y in &elems[i + 1..] {
                let h = halves[g.add(x, y)];
                if h[0] != usize::MAX {
                    return Some(ThreeAp { x, y, z: h[0] });
                }
            }
        }
        None
    }

    pub fn is_3ap_free_direct(&self) -> ThreeApCheck {
        let witness = self.find_3ap();
        ThreeApCheck {
            free: witness.is_none(),
            witness,
        }
    }
}

/// A non-trivial progression x + y = 2z with x != y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeAp {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeApCheck {
    pub free: bool,
    pub witness: Option<ThreeAp>,
}

/// Checks a set of integers for progressions in Z itself (no wraparound), by
/// embedding in a group of order larger than twice the maximum.
pub fn integer_3ap_witness(set: &[u64]) -> Option<ThreeAp> {
    let &max = set.iter().max()?;
    let group = CyclicGroup::new(2 * max as usize + 1).expect("modulus >= 1");
    GroupSet::from_residues(group, set.iter().map(|&x| x as usize)).find_3ap()
}

pub fn is_3ap_free_integers(set: &[u64]) -> bool {
    integer_3ap_witness(set).is_none()
}

/// Embeds a set of positive integers bounded by `n_prime` into Z/NZ for the
/// smallest prime N in (2N', 4N'].
pub fn embed_interval(set: &[u64], n_prime: u64) -> Result<(CyclicGroup, GroupSet)> {
    if set.is_empty() {
        return Err(Error::invalid("cannot embed an empty set"));
    }
    if n_prime == 0 {
        return Err(Error::invalid("interval length must be positive"));
    }
    if let Some(&bad) = set.iter().find(|&&x| x < 1 || x > n_prime) {
        return Err(Error::invalid(format!(
            "element {bad} outside [1, {n_prime}]"
        )));
    }
    let p = smallest_prime_in(2 * n_prime, 4 * n_prime)
        .ok_or_else(|| Error::invariant(format!("no prime in ({}, {}]", 2 * n_prime, 4 * n_prime)))?;
    let group = CyclicGroup::new(p as usize)?;
    let embedded = GroupSet::from_residues(group, set.iter().map(|&x| x as usize));
    Ok((group, embedded))
}

/// A real-valued function on Z/NZ.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFunction {
    group: CyclicGroup,
    values: Vec<f64>,
}

impl RealFunction {
    pub fn new(group: CyclicGroup, values: Vec<f64>) -> Result<Self> {
        if values.len() != group.modulus() {
            return Err(Error::invalid(format!(
                "function has {} values, modulus is {}",
                values.len(),
                group.modulus()
            )));
        }
        Ok(RealFunction { group, values })
    }

    pub fn zero(group: CyclicGroup) -> Self {
        RealFunction {
            group,
            values: vec![0.0; group.modulus()],
        }
    }

    pub fn indicator(set: &GroupSet) -> Self {
        RealFunction {
            group: set.group(),
            values: set
                .indicator()
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    #[inline]
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn scale(&self, c: f64) -> RealFunction {
        RealFunction {
            group: self.group,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

impl From<&GroupSet> for RealFunction {
    fn from(set: &GroupSet) -> Self {
        RealFunction::indicator(set)
    }
}
