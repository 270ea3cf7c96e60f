//! Thermal sums over the Matsubara frequencies `u_m = 2π m T`.

use crate::error::{Error, Result};
use crate::numerics::summation::pairwise_sum;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumSpec<T> {
    /// Stop once the extrapolated tail is below `rel_tol * |partial sum|`.
    pub rel_tol: T,
    pub max_terms: usize,
    /// Terms always evaluated before the tail test is trusted.
    pub min_terms: usize,
}

impl<T: Real> Default for SumSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10).max(T::lit(50.0) * T::epsilon()),
            max_terms: 200_000,
            min_terms: 4,
        }
    }
}

impl<T: Real> SumSpec<T> {
    pub fn with_rel_tol(mut self, tol: T) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_max_terms(mut self, n: usize) -> Self {
        self.max_terms = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraEstimate<T> {
    /// Partial sum plus extrapolated tail.
    pub value: T,
    pub partial: T,
    /// Geometric extrapolation of the omitted terms; also the error estimate.
    pub tail: T,
    pub terms: usize,
}

/// Matsubara frequency of index `m`.
#[inline]
pub fn matsubara_frequency<T: Real>(m: usize, temperature: T) -> T {
    T::lit(2.0) * T::PI() * T::from_usize_lossy(m) * temperature
}

/// Evaluates `T Σ_{m≥0} (2 - δ_{m0}) f(m, u_m)`.
///
/// The closure receives the index as well as the frequency so that callers
/// can special-case the static term.
pub fn matsubara_sum<T, F>(mut f: F, temperature: T, spec: &SumSpec<T>) -> Result<MatsubaraEstimate<T>>
where
    T: Real,
    F: FnMut(usize, T) -> Result<T>,
{
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(Error::Parameter(format!(
            "Matsubara sum needs a positive finite temperature, got {}",
            temperature
        )));
    }
    if !(spec.rel_tol > T::zero()) {
        return Err(Error::Parameter("sum tolerance must be positive".into()));
    }

    let two = T::lit(2.0);
    let mut terms: Vec<T> = Vec::new();
    let mut running = T::zero();
    let min_terms = spec.min_terms.max(2);

    for m in 0..spec.max_terms {
        let u = matsubara_frequency(m, temperature);
        let weight = if m == 0 { T::one() } else { two };
        let t = temperature * weight * f(m, u)?;
        if !t.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("Matsubara term m = {} is not finite", m),
                achieved: f64::INFINITY,
                requested: spec.rel_tol.as_f64(),
            });
        }
        terms.push(t);
        running += t;

        if terms.len() < min_terms {
            continue;
        }
        let prev = terms[terms.len() - 2];
        if t == T::zero() && prev == T::zero() {
            let partial = pairwise_sum(&terms);
            return Ok(MatsubaraEstimate { value: partial, partial, tail: T::zero(), terms: terms.len() });
        }
        if prev == T::zero() {
            continue;
        }
        let q = (t / prev).abs();
        if q >= T::one() {
            continue;
        }
        let tail = t * q / (T::one() - q);
        if tail.abs() <= spec.rel_tol * running.abs() {
            let partial = pairwise_sum(&terms);
            return Ok(MatsubaraEstimate { value: partial + tail, partial, tail, terms: terms.len() });
        }
    }

    let partial = pairwise_sum(&terms);
    let last = terms.last().copied().unwrap_or_else(T::zero);
    Err(Error::NonConvergence {
        what: format!(
            "Matsubara sum after {} terms (partial {:e}, last term {:e})",
            terms.len(),
            partial.as_f64(),
            last.as_f64()
        ),
        achieved: (last / partial).abs().as_f64(),
        requested: spec.rel_tol.as_f64(),
    })
}
