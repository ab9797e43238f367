//! Discrete Fourier transform on Z/NZ with the convention
//! `f^(r) = sum_x f(x) e^{-2 pi i x r / N}`, plus convolution and the
//! trilinear progression count.
//!
//! Transforms go through `rustfft`, which picks mixed-radix kernels for
//! smooth N and Rader/Bluestein for prime N. Counting identities are
//! evaluated in double precision and rounded where the quantity is an integer.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{CyclicGroup, GroupSet, RealFunction};

fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse transform including the 1/N factor.
pub fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let n = buf.len() as f64;
    buf.iter_mut().for_each(|c| *c /= n);
    buf
}

#[derive(Debug, Clone)]
pub struct FourierTable {
    group: CyclicGroup,
    coeffs: Vec<Complex64>,
    source_mass: f64,
}

impl FourierTable {
    pub fn of_function(f: &RealFunction) -> Self {
        FourierTable {
            group: f.group(),
            coeffs: forward(f.values()),
            source_mass: f.sum(),
        }
    }

    pub fn of_set(set: &GroupSet) -> Self {
        Self::of_function(&RealFunction::indicator(set))
    }

    /// Wraps precomputed coefficients.
    pub fn from_coeffs(group: CyclicGroup, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != group.modulus() {
            return Err(Error::invalid("coefficient count does not match modulus"));
        }
        let source_mass = coeffs[0].re;
        Ok(FourierTable {
            group,
            coeffs,
            source_mass,
        })
    }

    #[inline]
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn source_mass(&self) -> f64 {
        self.source_mass
    }

    /// Coefficient at an arbitrary (possibly negative) frequency.
    #[inline]
    pub fn at(&self, r: i64) -> Complex64 {
        self.coeffs[self.group.reduce(r)]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    /// Pointwise product, i.e. the transform of the convolution.
    pub fn product(&self, other: &FourierTable) -> Result<FourierTable> {
        self.group.check_same(&other.group)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .collect();
        Ok(FourierTable {
            group: self.group,
            coeffs,
            source_mass: self.source_mass * other.source_mass,
        })
    }

    /// Real part of the inverse transform.
    pub fn invert_real(&self) -> RealFunction {
        let values = inverse(&self.coeffs).into_iter().map(|c| c.re).collect();
        RealFunction::new(self.group, values).expect("length preserved")
    }

    /// `(1/N) sum_r F(r)^2 F(-2r)`, the Fourier side of the progression count.
    pub fn trilinear_count(&self) -> f64 {
        let n = self.group.modulus() as i64;
        let total: Complex64 = (0..n)
            .map(|r| {
                let c = self.coeffs[r as usize];
                c * c * self.at(-2 * r)
            })
            .sum();
        total.re / n as f64
    }

    /// CSV dump with header `r,re,im,magnitude`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,re,im,magnitude")?;
        for (r, c) in self.coeffs.iter().enumerate() {
            writeln!(out, "{r},{},{},{}", c.re, c.im, c.norm())?;
        }
        Ok(())
    }
}

/// `|sum_r |A^(r)|^2 - |A| N| / (|A| N)`; zero for the empty set.
pub fn parseval_residual(set: &GroupSet) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let table = FourierTable::of_set(set);
    let energy: f64 = table.coeffs().iter().map(|c| c.norm_sqr()).sum();
    let expected = (set.len() * set.modulus()) as f64;
    (energy - expected).abs() / expected
}

/// `(f * g)(x) = sum_t f(t) g(x - t)` via the transform product.
pub fn convolve(f: &RealFunction, g: &RealFunction) -> Result<RealFunction> {
    f.group().check_same(&g.group())?;
    Ok(FourierTable::of_function(f)
        .product(&FourierTable::of_function(g))?
        .invert_real())
}

/// `c(t) = sum_x f(x) g(x + t)` via the transform.
pub fn cross_correlate(f: &RealFunction, g: &RealFunction) -> Result<RealFunction> {
    f.group().check_same(&g.group())?;
    let ff = FourierTable::of_function(f);
    let gg = FourierTable::of_function(g);
    let coeffs = ff
        .coeffs()
        .iter()
        .zip(gg.coeffs())
        .map(|(a, b)| a.conj() * b)
        .collect();
    Ok(FourierTable::from_coeffs(f.group(), coeffs)?.invert_real())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Direct,
    Fourier,
}

/// `T(f) = sum_{x + y = 2z} f(x) f(y) f(z)`, trivial triples included.
pub fn count_3aps(f: &RealFunction, mode: CountMode) -> f64 {
    match mode {
        CountMode::Direct => count_direct(f),
        CountMode::Fourier => FourierTable::of_function(f).trilinear_count(),
    }
}

/// Set version of [`count_3aps`]. The Fourier mode requires odd N.
pub fn count_3aps_set(set: &GroupSet, mode: CountMode) -> Result<f64> {
    match mode {
        CountMode::Direct => Ok(count_direct_set(set) as f64),
        CountMode::Fourier => {
            if !set.group().is_odd() {
                return Err(Error::invalid(format!(
                    "fourier progression count needs odd modulus, got {}",
                    set.modulus()
                )));
            }
            Ok(FourierTable::of_set(set).trilinear_count())
        }
    }
}

fn count_direct(f: &RealFunction) -> f64 {
    let g = f.group();
    let n = g.modulus();
    let vals = f.values();
    // weight[w] = sum of f(z) over z with 2z = w
    let mut weight = vec![0.0; n];
    for (z, &v) in vals.iter().enumerate() {
        weight[g.add(z, z)] += v;
    }
    let mut total = 0.0;
    for (x, &fx) in vals.iter().enumerate() {
        if fx == 0.0 {
            continue;
        }
        for (y, &fy) in vals.iter().enumerate() {
            total += fx * fy * weight[g.add(x, y)];
        }
    }
    total
}

fn count_direct_set(set: &GroupSet) -> u64 {
    let g = set.group();
    let mut weight = vec![0u64; g.modulus()];
    for z in set.iter() {
        weight[g.add(z, z)] += 1;
    }
    let elems = set.to_vec();
    let mut total = 0u64;
    for &x in &elems {
        for &y in &elems {
            total += weight[g.add(x, y)];
        }
    }
    total
}

/// Both sides of the Hölder split for a progression-free set:
/// `sum_{r != 0} |A^(r)|^3` against `|A|^3 / 2`.
pub fn holder_split(set: &GroupSet) -> (f64, f64) {
    let table = FourierTable::of_set(set);
    let lhs = table.coeffs()[1..].iter().map(|c| c.norm().powi(3)).sum();
    let a = set.len() as f64;
    (lhs, 0.5 * a * a * a)
}
