use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupSet;

#[derive(Debug, Clone, Serialize)]
pub struct SelectionCertificate {
    #[serde(serialize_with = "ser_set")]
    pub x_prime: GroupSet,
    /// `|S|` with `S = (X + H) ∩ D`.
    pub s_size: usize,
    /// `|P|`, the high-multiplicity sums.
    pub p_size: usize,
    pub size_lhs: f64,
    pub size_rhs: f64,
    pub size_holds: bool,
    /// Subsets Y checked (the sampled ones plus X' itself).
    pub y_checks: usize,
    pub y_failures: usize,
    /// Smallest `|(Y + H) ∩ D| - (c^2/8)|Y||H|^{1-2 eps}` seen.
    pub worst_y_margin: f64,
    pub holds: bool,
}

fn ser_set<S: serde::Serializer>(set: &GroupSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.iter())
}

/// `|(Y + H) ∩ D|` for a list of Y elements.
fn sum_hits(y: &[usize], h: &[usize], d: &GroupSet) -> usize {
    let g = d.group();
    let mut seen = GroupSet::empty(g);
    for &a in y {
        for &b in h {
            let s = g.add(a, b);
            if d.contains(s) {
                seen.insert(s);
            }
        }
    }
    seen.len()
}

/// Constructive selection step.
///
/// With `S = (X + H) ∩ D` and `P = {t : (1_X * 1_H)(t) >= (2/c)|H|^eps}`, the
/// refined set is `X' = {x in X : |(x + H) ∩ (S \ P)| >= (c/4)|H|^{1-eps}}`.
/// Counts are exact integers; the certificate checks `|X'|` against
/// `(c/4)|X||H|^{-eps}` and the lower bound on `|(Y + H) ∩ D|` for `samples`
/// random `Y ⊆ X'` and for `X'` itself.
pub fn selection_refine(
    x: &GroupSet,
    h: &GroupSet,
    d: &GroupSet,
    c: f64,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<SelectionCertificate> {
    let g = x.group();
    g.check_same(&h.group())?;
    g.check_same(&d.group())?;
    if x.is_empty() || h.is_empty() {
        return Err(Error::invalid("selection needs non-empty X and H"));
    }
    if !(c > 0.0 && eps >= 0.0) {
        return Err(Error::invalid(format!("selection needs c > 0 and eps >= 0, got c = {c}, eps = {eps}")));
    }
    let hs = h.len() as f64;
    let xs = x.len() as f64;
    let xe = x.to_vec();
    let he = h.to_vec();
    let mut mult = vec![0usize; g.modulus()];
    for &a in &xe {
        for &b in &he {
            mult[g.add(a, b)] += 1;
        }
    }
    let s_set: Vec<bool> = (0..g.modulus()).map(|t| mult[t] > 0 && d.contains(t)).collect();
    let s_size = s_set.iter().filter(|&&b| b).count();
    let need = c * xs * hs.powf(1.0 - eps);
    if (s_size as f64) < need {
        return Err(Error::precondition(
            "|(X + H) ∩ D| >= c |X| |H|^{1-eps}",
            s_size as f64,
            need,
        ));
    }
    let p_cut = (2.0 / c) * hs.powf(eps);
    let in_p: Vec<bool> = mult.iter().map(|&m| m as f64 >= p_cut).collect();
    let p_size = in_p.iter().filter(|&&b| b).count();
    let row_cut = (c / 4.0) * hs.powf(1.0 - eps);
    let mut x_prime = GroupSet::empty(g);
    for &a in &xe {
        let good = he
            .iter()
            .filter(|&&b| {
                let t = g.add(a, b);
                s_set[t] && !in_p[t]
            })
            .count();
        if good as f64 >= row_cut {
            x_prime.insert(a);
        }
    }
    let size_lhs = x_prime.len() as f64;
    let size_rhs = (c / 4.0) * xs * hs.powf(-eps);
    let size_holds = size_lhs >= size_rhs;

    let ratio = c * c / 8.0 * hs.powf(1.0 - 2.0 * eps);
    let xp = x_prime.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y_checks = 0;
    let mut y_failures = 0;
    let mut worst = f64::INFINITY;
    let mut check = |y: &[usize]| {
        let margin = sum_hits(y, &he, d) as f64 - ratio * y.len() as f64;
        y_checks += 1;
        if margin < 0.0 {
            y_failures += 1;
        }
        worst = worst.min(margin);
    };
    if !xp.is_empty() {
        for _ in 0..samples {
            let k = rng.gen_range(1..=xp.len());
            let y: Vec<usize> = xp.choose_multiple(&mut rng, k).copied().collect();
            check(&y);
        }
        check(&xp);
    }
    let worst_y_margin = if worst.is_finite() { worst } else { 0.0 };
    Ok(SelectionCertificate {
        x_prime,
        s_size,
        p_size,
        size_lhs,
        size_rhs,
        size_holds,
        y_checks,
        y_failures,
        worst_y_margin,
        holds: size_holds && y_failures == 0,
    })
}
