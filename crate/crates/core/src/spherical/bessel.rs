//! Modified spherical Bessel functions on the positive real axis.
//!
//! Normalizations: `i_l` is the regular function (`i₀ = sinh x / x`) and
//! `k_l` is scaled so that `k₀ = e^{-x}/x`. Values are returned with the
//! exponential factored out, `ĩ_l = e^{-x} i_l` and `k̂_l = e^{x} k_l`.
//!
//! On the imaginary axis `z = ix`:
//! `j_l(ix) = i^l i_l(x)`, `h⁽¹⁾_l(ix) = -i^{-l} k_l(x)`, and
//! `f'(ix) = -i P_f F'(x)` for the phase `P_f` of either function.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A modified function value with its exponential factored out:
/// the true value is `value * e^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledModified<T> {
    pub value: T,
    pub deriv: T,
    pub exponent: T,
}

impl<T: Real> ScaledModified<T> {
    pub fn unscaled(&self) -> (T, T) {
        let s = self.exponent.exp();
        (self.value * s, self.deriv * s)
    }
}

/// Continued fraction for `i_{l+1}(x)/i_l(x)` by the modified Lentz method.
fn ratio_i<T: Real>(l: usize, x: T) -> Result<T> {
    let tiny = T::min_positive_value().sqrt();
    let two = T::lit(2.0);
    let b = |j: usize| T::from_usize_lossy(2 * (l + j) + 3) / x;
    let mut f = b(0);
    let mut c = f;
    let mut d = T::zero();
    for j in 1..200_000 {
        d = b(j) + d;
        if d == T::zero() {
            d = tiny;
        }
        c = b(j) + T::one() / c;
        if c == T::zero() {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() <= two * T::epsilon() {
            return Ok(T::one() / f);
        }
    }
    Err(Error::BesselRange { l, x: x.as_f64() })
}

/// Scaled `(ĩ_l, k̂_l)` with derivatives.
pub fn modified_pair<T: Real>(l: usize, x: T) -> Result<(ScaledModified<T>, ScaledModified<T>)> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain { what: "modified spherical Bessel", detail: format!("argument x = {} must be positive", x) });
    }
    let range = || Error::BesselRange { l, x: x.as_f64() };

    // Upward recurrence k_{n+1} = k_{n-1} + (2n+1)/x k_n is stable for k.
    let mut k = T::one() / x;
    let mut kp = (T::one() + x) / (x * x);
    for n in 1..=l {
        let next = k + T::from_usize_lossy(2 * n + 1) / x * kp;
        k = kp;
        kp = next;
    }
    finish(l, x, k, kp, range)
}

fn finish<T: Real>(
    l: usize,
    x: T,
    k: T,
    kp: T,
    range: impl Fn() -> Error,
) -> Result<(ScaledModified<T>, ScaledModified<T>)> {
    if !kp.is_finite() || !k.is_finite() {
        return Err(range());
    }
    let r = ratio_i(l, x)?;
    // Wronskian i_l k_{l+1} + i_{l+1} k_l = 1/x².
    let i = T::one() / (x * x * (kp + r * k));
    if !(i > T::zero()) || !i.is_finite() {
        return Err(range());
    }
    let lx = T::from_usize_lossy(l) / x;
    let i_val = ScaledModified { value: i, deriv: i * (lx + r), exponent: x };
    let k_val = ScaledModified { value: k, deriv: lx * k - kp, exponent: -x };
    Ok((i_val, k_val))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselKind {
    /// Spherical Bessel `j_l`.
    J,
    /// Spherical Hankel `h⁽¹⁾_l`.
    H,
}

impl BesselKind {
    pub fn name(self) -> &'static str {
        match self {
            BesselKind::J => "j",
            BesselKind::H => "h",
        }
    }
}

/// `j_l(ix)` or `h⁽¹⁾_l(ix)` as phase × scaled modified function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue<T> {
    pub kind: BesselKind,
    pub order: usize,
    /// Modulus of the imaginary argument.
    pub x: T,
    pub modified: ScaledModified<T>,
}

impl<T: Real> BesselValue<T> {
    /// `i^l` for `j`, `-i^{-l}` for `h`.
    pub fn phase(&self) -> Complex<T> {
        let il = match self.order % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
        match self.kind {
            BesselKind::J => il,
            BesselKind::H => -il.conj(),
        }
    }

    /// Unscaled complex value; overflows for large arguments.
    pub fn value(&self) -> Complex<T> {
        self.phase() * self.modified.unscaled().0
    }

    /// Unscaled complex derivative with respect to `z`.
    pub fn deriv(&self) -> Complex<T> {
        let minus_i = Complex::new(T::zero(), -T::one());
        minus_i * self.phase() * self.modified.unscaled().1
    }
}

/// `(j_l(ix), h⁽¹⁾_l(ix))` with derivatives.
pub fn sph_bessel_pair<T: Real>(l: usize, x: T) -> Result<(BesselValue<T>, BesselValue<T>)> {
    let (i, k) = modified_pair(l, x)?;
    Ok((
        BesselValue { kind: BesselKind::J, order: l, x, modified: i },
        BesselValue { kind: BesselKind::H, order: l, x, modified: k },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series `x^l/(2l+1)!! Σ (x²/2)^k / (k! (2l+3)(2l+5)…(2l+2k+1))`.
    fn series_i(l: usize, x: f64) -> f64 {
        let mut pre = 1.0;
        for n in 0..l {
            pre *= x / (2 * n + 3) as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400 {
            term *= 0.5 * x * x / (k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        pre * sum
    }

    /// Finite sum `e^{-x}/x Σ_{k≤l} (l+k)!/(k!(l-k)!) (2x)^{-k}`, returned times `e^{x}`.
    fn sum_k_scaled(l: usize, x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=l {
            // (l+k)!/(k!(l-k)!) from the previous coefficient.
            term *= ((l + k) * (l - k + 1)) as f64 / (k as f64 * 2.0 * x);
            sum += term;
        }
        sum / x
    }

    #[test]
    fn order_zero_closed_forms() {
        for &x in &[0.01, 0.5, 3.0, 40.0] {
            let (i, k) = modified_pair(0, x).unwrap();
            let want_i = (1.0 - (-2.0 * x as f64).exp()) / (2.0 * x);
            assert!((i.value - want_i).abs() < 1e-14 * want_i);
            assert!((k.value - 1.0 / x).abs() < 1e-14 / x);
        }
        let (j, h) = sph_bessel_pair(0, 1.0).unwrap();
        assert!((j.value().re - 1f64.sinh()).abs() < 1e-14 && j.value().im == 0.0);
        assert!((h.value().re + (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn wronskian_holds() {
        for l in [0usize, 1, 5, 10, 30, 60] {
            for &x in &[0.1_f64, 1.0, 3.0, 10.0, 50.0, 300.0] {
                let (i, k) = modified_pair(l, x).unwrap();
                let w = x * x * (i.value * k.deriv - i.deriv * k.value);
                assert!((w + 1.0).abs() < 1e-12, "l={} x={}: {}", l, x, w);
            }
        }
    }

    #[test]
    fn complex_wronskian() {
        let (j, h) = sph_bessel_pair(5, 3.0_f64).unwrap();
        let w = j.value() * h.deriv() - j.deriv() * h.value();
        let z2 = Complex::new(0.0, 3.0) * Complex::new(0.0, 3.0);
        let want = Complex::new(0.0, 1.0) / z2;
        assert!((w - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn matches_series_and_finite_sums() {
        for (l, x) in [(10usize, 0.1), (10, 50.0), (3, 2.0), (1, 1.0), (25, 7.5)] {
            let (i, k) = modified_pair(l, x).unwrap();
            let si = series_i(l, x) * (-x).exp();
            assert!((i.value - si).abs() < 1e-12 * si, "i l={} x={}: {} vs {}", l, x, i.value, si);
            let sk = sum_k_scaled(l, x);
            assert!((k.value - sk).abs() < 1e-12 * sk, "k l={} x={}: {} vs {}", l, x, k.value, sk);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (l, x, h) = (4usize, 1.7_f64, 1e-5);
        let (i, k) = modified_pair(l, x).unwrap();
        let (ip, kp) = modified_pair(l, x + h).unwrap();
        let (im, km) = modified_pair(l, x - h).unwrap();
        let di = (ip.unscaled().0 - im.unscaled().0) / (2.0 * h);
        let dk = (kp.unscaled().0 - km.unscaled().0) / (2.0 * h);
        assert!((i.unscaled().1 - di).abs() < 1e-8 * di.abs());
        assert!((k.unscaled().1 - dk).abs() < 1e-8 * dk.abs());
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(modified_pair(200, 1e-3_f64), Err(Error::BesselRange { l: 200, .. })));
        assert!(matches!(modified_pair(60, 1e-2_f32), Err(Error::BesselRange { .. })));
        assert!(modified_pair(0, 0.0_f64).is_err());
    }

    #[test]
    fn single_precision_wronskian() {
        let (i, k) = modified_pair(3, 2.0_f32).unwrap();
        let w = 4.0 * (i.value * k.deriv - i.deriv * k.value);
        assert!((w + 1.0).abs() < 1e-5);
    }
}
