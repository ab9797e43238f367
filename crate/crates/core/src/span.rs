//! Spans, dissociated sets and span covers.
//!
//! `Span(X)` is the set of signed sums `sum eps_x x` with `eps_x` in
//! {-1, 0, 1}. It is computed by closure over Z/N: processing each `x` once
//! with `S <- S ∪ (S + x) ∪ (S - x)` yields exactly the signed sums, in
//! `O(|X| N)` time.
//!
//! The two extraction routines are randomized greedy searches for a small
//! generating set whose span captures a large part of a target set. They
//! report whether the requested size was reached instead of failing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{CyclicGroup, GroupSet};

/// Incrementally maintained span.
#[derive(Debug, Clone)]
pub struct SpanBuilder {
    group: CyclicGroup,
    mask: Vec<bool>,
    members: Vec<usize>,
    generators: Vec<usize>,
}

impl SpanBuilder {
    pub fn new(group: CyclicGroup) -> Self {
        let mut mask = vec![false; group.modulus()];
        mask[0] = true;
        SpanBuilder {
            group,
            mask,
            members: vec![0],
            generators: Vec::new(),
        }
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn extend(&mut self, x: usize) {
        let g = self.group;
        let snapshot = self.members.len();
        for i in 0..snapshot {
            let s = self.members[i];
            for y in [g.add(s, x), g.sub(s, x)] {
                if !self.mask[y] {
                    self.mask[y] = true;
                    self.members.push(y);
                }
            }
        }
        self.generators.push(x);
    }

    /// Number of elements of `target` in the span after a hypothetical
    /// `extend(x)`, minus those already covered. `scratch` must be all-false
    /// and is restored before returning.
    fn gain(&self, target: &GroupSet, x: usize, scratch: &mut [bool]) -> usize {
        let g = self.group;
        let mut touched = Vec::new();
        let mut gain = 0;
        for &s in &self.members {
            for y in [g.add(s, x), g.sub(s, x)] {
                if !self.mask[y] && !scratch[y] {
                    scratch[y] = true;
                    touched.push(y);
                    if target.contains(y) {
                        gain += 1;
                    }
                }
            }
        }
        for y in touched {
            scratch[y] = false;
        }
        gain
    }

    pub fn to_set(&self) -> GroupSet {
        GroupSet::from_indicator(self.group, self.mask.clone()).expect("length matches")
    }
}

pub fn span_of(set: &GroupSet) -> GroupSet {
    let mut b = SpanBuilder::new(set.group());
    for x in set.iter() {
        b.extend(x);
        if b.len() == set.modulus() {
            break;
        }
    }
    b.to_set()
}

pub const DISSOCIATION_SIZE_LIMIT: usize = 30;

/// A vanishing signed combination: pairs of (element, sign).
pub type SignedRelation = Vec<(usize, i8)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dissociation {
    pub dissociated: bool,
    pub witness: Option<SignedRelation>,
}

/// X is dissociated iff no element lies in the span of the ones before it
/// (in any fixed order), which reduces the `3^|X|` sign search to `|X|`
/// closure steps.
pub fn is_dissociated(set: &GroupSet) -> Result<Dissociation> {
    if set.len() > DISSOCIATION_SIZE_LIMIT {
        return Err(Error::CostGuard(format!(
            "dissociation check limited to |X| <= {DISSOCIATION_SIZE_LIMIT}, got {}",
            set.len()
        )));
    }
    let g = set.group();
    let n = g.modulus();
    // parent[s] = (generator index, sign, predecessor)
    let mut parent: Vec<Option<(usize, i8, usize)>> = vec![None; n];
    let mut in_span = vec![false; n];
    in_span[0] = true;
    let mut members = vec![0usize];
    let elems = set.to_vec();
    for (i, &x) in elems.iter().enumerate() {
        if in_span[x] {
            // x = sum of earlier signed terms, so that sum - x = 0.
            let mut relation: SignedRelation = vec![(x, -1)];
            let mut cur = x;
            while cur != 0 {
                let (j, sign, prev) = parent[cur].expect("non-zero span element has a parent");
                relation.push((elems[j], sign));
                cur = prev;
            }
            relation.sort_unstable();
            return Ok(Dissociation {
                dissociated: false,
                witness: Some(relation),
            });
        }
        let snapshot = members.len();
        for k in 0..snapshot {
            let s = members[k];
            for (y, sign) in [(g.add(s, x), 1i8), (g.sub(s, x), -1i8)] {
                if !in_span[y] {
                    in_span[y] = true;
                    parent[y] = Some((i, sign, s));
                    members.push(y);
                }
            }
        }
    }
    Ok(Dissociation {
        dissociated: true,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanCover {
    /// Generating set, in the order it was chosen.
    pub lambda: Vec<usize>,
    /// `target ∩ Span(lambda)`.
    pub covered: GroupSet,
    pub span_size: usize,
}

impl SpanCover {
    pub fn lambda_set(&self) -> GroupSet {
        GroupSet::from_residues(self.covered.group(), self.lambda.iter().copied())
    }

    /// Recomputes the span from scratch and checks `covered ⊆ Span(lambda)`.
    pub fn verify(&self) -> bool {
        let span = span_of(&self.lambda_set());
        span.len() == self.span_size && self.covered.is_subset(&span)
    }
}

impl Serialize for SpanCover {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            lambda: &'a [usize],
            covered: Vec<usize>,
            span_size: usize,
        }
        Repr {
            n: self.covered.modulus(),
            lambda: &self.lambda,
            covered: self.covered.to_vec(),
            span_size: self.span_size,
        }
        .serialize(s)
    }
}

/// Greedy maximal dissociated subset in ascending frequency order. Every
/// element of `target` ends up in the span: one that is skipped already lies
/// in it.
pub fn maximal_dissociated(target: &GroupSet) -> SpanCover {
    let mut b = SpanBuilder::new(target.group());
    for d in target.iter() {
        if !b.contains(d) {
            b.extend(d);
        }
    }
    SpanCover {
        lambda: b.generators().to_vec(),
        covered: target.clone(),
        span_size: b.len(),
    }
}

/// `|Lambda| theta^2 / ln(1/delta)`, the quantity Chang's lemma bounds.
pub fn chang_ratio(lambda_size: usize, theta: f64, delta: f64) -> f64 {
    lambda_size as f64 * theta * theta / (1.0 / delta).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionParams {
    pub lambda_cap: usize,
    pub target: f64,
    /// Number of randomized restarts; zero returns the trivial cover.
    pub budget: usize,
    pub seed: u64,
}

/// Candidate generators evaluated per greedy step.
const CANDIDATE_SAMPLE: usize = 48;

#[derive(Debug, Clone, Serialize)]
pub struct Extraction {
    pub cover: SpanCover,
    pub target: f64,
    pub lambda_cap: usize,
    pub met: bool,
    pub restarts: usize,
}

/// Randomized greedy coverage search: grow Lambda ⊆ target one generator at
/// a time, each time taking the sampled candidate that adds the most target
/// elements to the span.
pub fn extract_cover(target: &GroupSet, params: ExtractionParams) -> Extraction {
    let group = target.group();
    let zero_only = |t: &GroupSet| {
        let mut c = GroupSet::empty(group);
        if t.contains(0) {
            c.insert(0);
        }
        c
    };
    let mut best = SpanCover {
        lambda: Vec::new(),
        covered: zero_only(target),
        span_size: 1,
    };
    let elems = target.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut scratch = vec![false; group.modulus()];
    let mut restarts = 0;
    for _ in 0..params.budget {
        if best.covered.len() as f64 >= params.target {
            break;
        }
        restarts += 1;
        let mut b = SpanBuilder::new(group);
        let mut covered = usize::from(target.contains(0));
        while b.generators().len() < params.lambda_cap && (covered as f64) < params.target {
            let mut pool: Vec<usize> = elems
                .iter()
                .copied()
                .filter(|x| *x != 0 && !b.generators().contains(x))
                .collect();
            if pool.is_empty() {
                break;
            }
            pool.shuffle(&mut rng);
            pool.truncate(CANDIDATE_SAMPLE);
            let (choice, gain) = pool
                .iter()
                .map(|&c| (c, b.gain(target, c, &mut scratch)))
                .fold((usize::MAX, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if gain == 0 {
                break;
            }
            b.extend(choice);
            covered += gain;
        }
        let better = covered > best.covered.len()
            || (covered == best.covered.len() && b.generators().len() < best.lambda.len());
        if better {
            let span = b.to_set();
            best = SpanCover {
                lambda: b.generators().to_vec(),
                covered: target.intersection(&span).expect("same group"),
                span_size: b.len(),
            };
        }
    }
    Extraction {
        met: best.covered.len() as f64 >= params.target,
        cover: best,
        target: params.target,
        lambda_cap: params.lambda_cap,
        restarts,
    }
}

/// Search for `D' = D ∩ Span(Lambda)` with `|D'| >= theta |D| / c` and
/// `|Lambda| <= c theta^-1 ln(1/delta)`.
pub fn bkb_extract(
    target: &GroupSet,
    theta: f64,
    delta: f64,
    budget: usize,
    c_omega: f64,
    seed: u64,
) -> Extraction {
    let cap = (c_omega * (1.0 / delta).ln() / theta).ceil().max(1.0) as usize;
    extract_cover(
        target,
        ExtractionParams {
            lambda_cap: cap,
            target: theta * target.len() as f64 / c_omega,
            budget,
            seed,
        },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyExtraction {
    pub extraction: Extraction,
    pub s: u32,
    pub kappa: f64,
    /// `ln(kappa |D|^{2s})` against `ln(10^s s^{2s} |D|^s)`.
    pub hypothesis_lhs: f64,
    pub hypothesis_rhs: f64,
    pub hypothesis_holds: bool,
}

/// Extraction driven by a large higher energy `E_{2s}(D) = kappa |D|^{2s}`:
/// target `kappa^{1/2s} |D| ln^{-3/2}|D| / c`, cap
/// `c kappa^{-1/2s} ln^{3/2}|D|`.
pub fn bk_large_energy_extract(
    target: &GroupSet,
    s: u32,
    kappa: f64,
    budget: usize,
    c_omega: f64,
    seed: u64,
) -> Result<EnergyExtraction> {
    if s == 0 {
        return Err(Error::invalid("energy order s must be >= 1"));
    }
    if !(kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let d = target.len() as f64;
    let log_d = d.ln().max(f64::MIN_POSITIVE);
    let root = kappa.powf(1.0 / (2.0 * s as f64));
    let goal = root * d * log_d.powf(-1.5) / c_omega;
    let cap = (c_omega * log_d.powf(1.5) / root).ceil().max(1.0) as usize;
    let sf = s as f64;
    let lhs = kappa.ln() + 2.0 * sf * d.ln();
    let rhs = sf * 10f64.ln() + 2.0 * sf * sf.ln() + sf * d.ln();
    let extraction = extract_cover(
        target,
        ExtractionParams {
            lambda_cap: cap,
            target: goal,
            budget,
            seed,
        },
    );
    Ok(EnergyExtraction {
        extraction,
        s,
        kappa,
        hypothesis_lhs: lhs,
        hypothesis_rhs: rhs,
        hypothesis_holds: lhs >= rhs,
    })
}
