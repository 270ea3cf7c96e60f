//! Material response on the imaginary frequency axis.
//!
//! Models describe the atomic polarizability density `α₀(iu)`; the
//! Lorentz–Lorenz relation turns it into the permittivity
//! `ε = 1 + α₀ / (1 - α₀/3)`. At `α₀ = 3` the permittivity has a pole and
//! the response is reported as [`DielectricResponse::Metallic`].

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Permittivity `ε(iu)`, or the metallic pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DielectricResponse<T> {
    /// `chi = ε - 1`, kept separately so dilute media lose no digits.
    Finite { epsilon: T, chi: T },
    Metallic,
}

impl<T: Real> DielectricResponse<T> {
    pub fn from_epsilon(epsilon: T) -> Self {
        Self::Finite { epsilon, chi: epsilon - T::one() }
    }

    pub fn from_chi(chi: T) -> Self {
        Self::Finite { epsilon: T::one() + chi, chi }
    }

    pub fn vacuum() -> Self {
        Self::Finite { epsilon: T::one(), chi: T::zero() }
    }

    pub fn is_metallic(&self) -> bool {
        matches!(self, Self::Metallic)
    }

    /// `None` for the metallic marker.
    pub fn epsilon(&self) -> Option<T> {
        match *self {
            Self::Finite { epsilon, .. } => Some(epsilon),
            Self::Metallic => None,
        }
    }

    pub fn chi(&self) -> Option<T> {
        match *self {
            Self::Finite { chi, .. } => Some(chi),
            Self::Metallic => None,
        }
    }
}

/// Sorted `(u, α₀)` samples, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedAlpha<T> {
    u: Vec<T>,
    alpha0: Vec<T>,
}

impl<T: Real> TabulatedAlpha<T> {
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parameter("tabulated model needs at least one sample".into()));
        }
        for (i, &(u, a)) in samples.iter().enumerate() {
            if !(u >= T::zero()) || !u.is_finite() {
                return Err(Error::Parameter(format!("sample {}: frequency {} must be finite and >= 0", i, u)));
            }
            if !(a >= T::zero() && a <= T::lit(3.0)) {
                return Err(Error::Parameter(format!("sample {}: alpha0 = {} outside [0, 3]", i, a)));
            }
            if i > 0 && !(u > samples[i - 1].0) {
                return Err(Error::Parameter(format!("sample {}: frequencies must increase strictly", i)));
            }
        }
        let (u, alpha0) = samples.into_iter().unzip();
        Ok(Self { u, alpha0 })
    }

    pub fn range(&self) -> (T, T) {
        (self.u[0], self.u[self.u.len() - 1])
    }

    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.u.iter().copied().zip(self.alpha0.iter().copied())
    }

    fn eval(&self, u: T) -> Result<T> {
        let (lo, hi) = self.range();
        if u < lo || u > hi {
            return Err(Error::OutOfRange { u: u.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let k = self.u.partition_point(|&x| x <= u);
        if k == self.u.len() {
            return Ok(self.alpha0[k - 1]);
        }
        let (u0, u1) = (self.u[k - 1], self.u[k]);
        let (a0, a1) = (self.alpha0[k - 1], self.alpha0[k]);
        let w = (u - u0) / (u1 - u0);
        Ok(a0 + w * (a1 - a0))
    }
}

/// Atomic polarizability density `α₀(iu)` (dimensionless).
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizabilityModel<T> {
    /// `α₀ = u_p² / (u² + u_p²/3)`, so that `ε = 1 + u_p²/u²`.
    Plasma { u_p: T },
    /// `α₀ = α_s u₀² / (u₀² + u²)`.
    Oscillator { alpha_s: T, u0: T },
    ConstantEpsilon { epsilon: T },
    Tabulated(TabulatedAlpha<T>),
}

impl<T: Real> PolarizabilityModel<T> {
    pub fn plasma(u_p: T) -> Result<Self> {
        if !(u_p > T::zero()) || !u_p.is_finite() {
            return Err(Error::Parameter(format!("plasma frequency must be positive, got {}", u_p)));
        }
        Ok(Self::Plasma { u_p })
    }

    pub fn oscillator(alpha_s: T, u0: T) -> Result<Self> {
        if !(alpha_s >= T::zero() && alpha_s <= T::lit(3.0)) {
            return Err(Error::Parameter(format!("alpha_s = {} outside [0, 3]", alpha_s)));
        }
        if !(u0 > T::zero()) || !u0.is_finite() {
            return Err(Error::Parameter(format!("resonance u0 must be positive, got {}", u0)));
        }
        Ok(Self::Oscillator { alpha_s, u0 })
    }

    pub fn constant_epsilon(epsilon: T) -> Result<Self> {
        if !(epsilon >= T::one()) || !epsilon.is_finite() {
            return Err(Error::Parameter(format!("constant epsilon must be finite and >= 1, got {}", epsilon)));
        }
        Ok(Self::ConstantEpsilon { epsilon })
    }

    pub fn tabulated(samples: Vec<(T, T)>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedAlpha::new(samples)?))
    }

    pub fn vacuum() -> Self {
        Self::ConstantEpsilon { epsilon: T::one() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Plasma { .. } => "plasma",
            Self::Oscillator { .. } => "oscillator",
            Self::ConstantEpsilon { .. } => "constant_epsilon",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// `(α₀, 1 - α₀/3)` with the second factor formed without cancellation.
    fn alpha0_parts(&self, u: T) -> Result<(T, T)> {
        if !(u >= T::zero()) {
            return Err(Error::Domain { what: "alpha0", detail: format!("frequency u = {} must be >= 0", u) });
        }
        let three = T::lit(3.0);
        Ok(match self {
            Self::Plasma { u_p } => {
                let up2 = *u_p * *u_p;
                let d = u * u + up2 / three;
                (up2 / d, u * u / d)
            }
            Self::Oscillator { alpha_s, u0 } => {
                let s = *u0 * *u0 / (*u0 * *u0 + u * u);
                let a = *alpha_s * s;
                (a, T::one() - a / three)
            }
            Self::ConstantEpsilon { epsilon } => {
                let a = inverse_lorentz_lorenz(*epsilon)?;
                (a, three / (*epsilon + T::lit(2.0)))
            }
            Self::Tabulated(t) => {
                let a = t.eval(u)?;
                (a, T::one() - a / three)
            }
        })
    }

    pub fn alpha0(&self, u: T) -> Result<T> {
        Ok(self.alpha0_parts(u)?.0)
    }

    pub fn epsilon(&self, u: T) -> Result<DielectricResponse<T>> {
        if let Self::ConstantEpsilon { epsilon } = self {
            if !(u >= T::zero()) {
                return Err(Error::Domain { what: "epsilon", detail: format!("frequency u = {} must be >= 0", u) });
            }
            return Ok(DielectricResponse::from_epsilon(*epsilon));
        }
        let (a, c) = self.alpha0_parts(u)?;
        if c == T::zero() {
            return Ok(DielectricResponse::Metallic);
        }
        if c < T::zero() {
            return Err(Error::Unphysical(format!("alpha0 = {} exceeds 3", a)));
        }
        Ok(DielectricResponse::from_chi(a / c))
    }
}

/// Lorentz–Lorenz relation `ε = 1 + α₀/(1 - α₀/3)`.
pub fn lorentz_lorenz<T: Real>(alpha0: T) -> Result<DielectricResponse<T>> {
    let three = T::lit(3.0);
    if !(alpha0 >= T::zero()) {
        return Err(Error::Unphysical(format!("alpha0 = {} is negative", alpha0)));
    }
    if alpha0 > three {
        return Err(Error::Unphysical(format!("alpha0 = {} exceeds 3", alpha0)));
    }
    if alpha0 == three {
        return Ok(DielectricResponse::Metallic);
    }
    Ok(DielectricResponse::from_chi(alpha0 / (T::one() - alpha0 / three)))
}

/// `α₀ = 3(ε - 1)/(ε + 2)`.
pub fn inverse_lorentz_lorenz<T: Real>(epsilon: T) -> Result<T> {
    if !(epsilon >= T::one()) {
        return Err(Error::Unphysical(format!("epsilon = {} is below 1", epsilon)));
    }
    if epsilon.is_infinite() {
        return Ok(T::lit(3.0));
    }
    Ok(T::lit(3.0) * (epsilon - T::one()) / (epsilon + T::lit(2.0)))
}

/// A half-space or body material: a polarizability model or an ideal mirror.
#[derive(Debug, Clone, PartialEq)]
pub enum Medium<T> {
    Model(PolarizabilityModel<T>),
    /// Metallic at every frequency, including the static limit.
    PerfectConductor,
}

impl<T: Real> Medium<T> {
    pub fn epsilon(&self, u: T) -> Result<DielectricResponse<T>> {
        match self {
            Self::Model(m) => m.epsilon(u),
            Self::PerfectConductor => Ok(DielectricResponse::Metallic),
        }
    }

    pub fn plasma_frequency(&self) -> Option<T> {
        match self {
            Self::Model(PolarizabilityModel::Plasma { u_p }) => Some(*u_p),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Model(m) => m.kind(),
            Self::PerfectConductor => "perfect_conductor",
        }
    }
}

impl<T> From<PolarizabilityModel<T>> for Medium<T> {
    fn from(m: PolarizabilityModel<T>) -> Self {
        Self::Model(m)
    }
}
