//! Two dielectric half-spaces `x < 0` and `x > a` separated by vacuum.
//!
//! All quantities are Wick rotated once: `s = iκ`, so every public function
//! takes real imaginary frequency `u` and transverse momentum `p`, and the
//! round-trip phase `e^{2 i s₀ a}` becomes `e^{-2 κ₀ a}`.

use crate::dielectric::{lorentz_lorenz, DielectricResponse, Medium};
use crate::error::{Error, Result};
use crate::numerics::{
    matsubara_sum, try_integrate_finite, try_integrate_from, QuadratureSpec, SemiInfiniteMap, SumSpec,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    TE,
    TM,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::TE, Mode::TM];

    pub fn name(self) -> &'static str {
        match self {
            Mode::TE => "TE",
            Mode::TM => "TM",
        }
    }
}

/// Prescription for the static (`u = 0`) TE reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZeroModePolicy {
    /// The TE mode does not reflect at `u = 0` for any material.
    MicroscopicZero,
    /// Continuous `u → 0` limit of the reflection coefficient.
    LifshitzLimit,
    /// Ideal mirror, `r_te = -1`.
    PerfectConductor,
}

impl ZeroModePolicy {
    pub fn name(self) -> &'static str {
        match self {
            Self::MicroscopicZero => "microscopic_zero",
            Self::LifshitzLimit => "lifshitz_limit",
            Self::PerfectConductor => "perfect_conductor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "microscopic_zero" => Some(Self::MicroscopicZero),
            "lifshitz_limit" => Some(Self::LifshitzLimit),
            "perfect_conductor" => Some(Self::PerfectConductor),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyMomentumPoint<T> {
    pub u: T,
    pub p: T,
}

impl<T: Real> FrequencyMomentumPoint<T> {
    pub fn new(u: T, p: T) -> Result<Self> {
        if !(u >= T::zero() && p >= T::zero()) || !u.is_finite() || !p.is_finite() {
            return Err(Error::Domain {
                what: "frequency-momentum point",
                detail: format!("need finite u >= 0 and p >= 0, got ({}, {})", u, p),
            });
        }
        Ok(Self { u, p })
    }

    pub fn kappa0(&self) -> T {
        self.u.hypot(self.p)
    }
}

/// `κ₀ = √(u² + p²)` and `κ₁ = √(ε u² + p²)`; `κ₁ = +∞` for a metal at `u > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedWavenumbers<T> {
    pub kappa0: T,
    pub kappa1: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair<T> {
    pub r_te: T,
    pub r_tm: T,
}

impl<T: Real> ReflectionPair<T> {
    pub fn get(&self, mode: Mode) -> T {
        match mode {
            Mode::TE => self.r_te,
            Mode::TM => self.r_tm,
        }
    }
}

pub fn rotated_wavenumbers<T: Real>(
    pt: FrequencyMomentumPoint<T>,
    eps: DielectricResponse<T>,
) -> Result<RotatedWavenumbers<T>> {
    let kappa0 = pt.kappa0();
    match eps {
        DielectricResponse::Finite { epsilon, .. } => {
            if !(epsilon >= T::one()) {
                return Err(Error::Unphysical(format!("epsilon = {} is below 1", epsilon)));
            }
            Ok(RotatedWavenumbers { kappa0, kappa1: (epsilon * pt.u * pt.u + pt.p * pt.p).sqrt() })
        }
        DielectricResponse::Metallic if pt.u > T::zero() => {
            Ok(RotatedWavenumbers { kappa0, kappa1: T::infinity() })
        }
        DielectricResponse::Metallic => Err(Error::Domain {
            what: "rotated wavenumbers",
            detail: "metallic response at u = 0 must go through the zero-mode policy".into(),
        }),
    }
}

/// Single-interface reflection coefficients.
///
/// Both are written with the contrast `χ = ε - 1` factored out:
/// `r_te = -χ u²/(κ₁+κ₀)²`, `r_tm = χ(ε u² + (1+ε) p²)/(κ₁+ε κ₀)²`.
pub fn reflection<T: Real>(pt: FrequencyMomentumPoint<T>, eps: DielectricResponse<T>) -> Result<ReflectionPair<T>> {
    if pt.u == T::zero() && pt.p == T::zero() {
        return Err(Error::Domain { what: "reflection", detail: "(u, p) = (0, 0)".into() });
    }
    match eps {
        DielectricResponse::Metallic => {
            if pt.u > T::zero() {
                Ok(ReflectionPair { r_te: -T::one(), r_tm: T::one() })
            } else {
                Err(Error::Domain {
                    what: "reflection",
                    detail: "metallic response at u = 0 must go through the zero-mode policy".into(),
                })
            }
        }
        DielectricResponse::Finite { epsilon, chi } => {
            let k = rotated_wavenumbers(pt, eps)?;
            let (u2, p2) = (pt.u * pt.u, pt.p * pt.p);
            let s = k.kappa1 + k.kappa0;
            let r_te = -chi * u2 / (s * s);
            let d = k.kappa1 + epsilon * k.kappa0;
            let r_tm = chi * (epsilon * u2 + (T::one() + epsilon) * p2) / (d * d);
            Ok(ReflectionPair { r_te, r_tm })
        }
    }
}

/// Static TE reflection of one medium under `policy`.
pub fn zero_mode_te_reflection<T: Real>(p: T, medium: &Medium<T>, policy: ZeroModePolicy) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::Domain { what: "zero-mode reflection", detail: format!("p = {} must be positive", p) });
    }
    Ok(match policy {
        ZeroModePolicy::MicroscopicZero => T::zero(),
        ZeroModePolicy::PerfectConductor => -T::one(),
        ZeroModePolicy::LifshitzLimit => match medium {
            Medium::PerfectConductor => -T::one(),
            Medium::Model(m) => match medium.plasma_frequency() {
                // ε u² → u_p², so κ₁ → √(u_p² + p²).
                Some(up) => {
                    let k1 = up.hypot(p);
                    -(up * up) / ((k1 + p) * (k1 + p))
                }
                None => match m.epsilon(T::zero())? {
                    DielectricResponse::Finite { .. } => T::zero(),
                    DielectricResponse::Metallic => {
                        return Err(Error::Domain {
                            what: "zero-mode reflection",
                            detail: format!("no static TE limit known for metallic {} model", m.kind()),
                        })
                    }
                },
            },
        },
    })
}

/// Static TM reflection: `(ε(0) - 1)/(ε(0) + 1)`, or 1 for a metal.
pub fn zero_mode_tm_reflection<T: Real>(medium: &Medium<T>) -> Result<T> {
    Ok(match medium.epsilon(T::zero())? {
        DielectricResponse::Metallic => T::one(),
        DielectricResponse::Finite { epsilon, chi } => chi / (epsilon + T::one()),
    })
}

/// Reflections of `medium` at `(u, p)`, routing `u = 0` through `policy`.
pub fn medium_reflection<T: Real>(
    pt: FrequencyMomentumPoint<T>,
    medium: &Medium<T>,
    policy: ZeroModePolicy,
) -> Result<ReflectionPair<T>> {
    if pt.u == T::zero() {
        return Ok(ReflectionPair {
            r_te: zero_mode_te_reflection(pt.p, medium, policy)?,
            r_tm: zero_mode_tm_reflection(medium)?,
        });
    }
    reflection(pt, medium.epsilon(pt.u)?)
}

/// `1 - x e^{-2κ₀a}` for `x = r_L r_R`, keeping digits when `x ≈ 1` and `κ₀a ≪ 1`.
fn one_minus_loop<T: Real>(x: T, kappa0: T, gap: T) -> T {
    let em1 = (-T::lit(2.0) * kappa0 * gap).exp_m1();
    if x > T::zero() {
        (T::one() - x) - x * em1
    } else {
        T::one() - x * (T::one() + em1)
    }
}

/// Gap, two media, temperature and static TE policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCavity<T> {
    pub gap: T,
    pub left: Medium<T>,
    pub right: Medium<T>,
    pub temperature: T,
    pub policy: ZeroModePolicy,
}

impl<T: Real> PlanarCavity<T> {
    pub fn new(gap: T, left: Medium<T>, right: Medium<T>, temperature: T, policy: ZeroModePolicy) -> Result<Self> {
        if !(gap > T::zero()) || !gap.is_finite() {
            return Err(Error::Parameter(format!("gap must be positive, got {}", gap)));
        }
        if !(temperature >= T::zero()) || !temperature.is_finite() {
            return Err(Error::Parameter(format!("temperature must be >= 0, got {}", temperature)));
        }
        Ok(Self { gap, left, right, temperature, policy })
    }

    pub fn symmetric(gap: T, medium: Medium<T>, temperature: T, policy: ZeroModePolicy) -> Result<Self> {
        Self::new(gap, medium.clone(), medium, temperature, policy)
    }

    pub fn with_gap(&self, gap: T) -> Result<Self> {
        Self::new(gap, self.left.clone(), self.right.clone(), self.temperature, self.policy)
    }

    pub fn with_temperature(&self, temperature: T) -> Result<Self> {
        Self::new(self.gap, self.left.clone(), self.right.clone(), temperature, self.policy)
    }

    pub fn with_policy(&self, policy: ZeroModePolicy) -> Self {
        Self { policy, ..self.clone() }
    }

    pub fn reflections(&self, pt: FrequencyMomentumPoint<T>) -> Result<(ReflectionPair<T>, ReflectionPair<T>)> {
        let l = medium_reflection(pt, &self.left, self.policy)?;
        let r = if self.left == self.right { l } else { medium_reflection(pt, &self.right, self.policy)? };
        Ok((l, r))
    }
}

/// `r_L r_R e^{-2κ₀a} / (1 - r_L r_R e^{-2κ₀a})`.
pub fn mode_loop_factor<T: Real>(pt: FrequencyMomentumPoint<T>, cavity: &PlanarCavity<T>, mode: Mode) -> Result<T> {
    let (l, r) = cavity.reflections(pt)?;
    loop_from_reflections(l.get(mode) * r.get(mode), pt.kappa0(), cavity.gap)
}

fn loop_from_reflections<T: Real>(rr: T, kappa0: T, gap: T) -> Result<T> {
    if rr == T::zero() {
        return Ok(T::zero());
    }
    let den = one_minus_loop(rr, kappa0, gap);
    if !(den > T::zero()) {
        return Err(Error::Singular(format!(
            "round-trip denominator {} at kappa0 = {} (|r_L r_R| = {})",
            den, kappa0, rr
        )));
    }
    Ok(rr * (-T::lit(2.0) * kappa0 * gap).exp() / den)
}

fn log_from_reflections<T: Real>(rr: T, kappa0: T, gap: T) -> Result<T> {
    if rr == T::zero() {
        return Ok(T::zero());
    }
    let y = rr * (-T::lit(2.0) * kappa0 * gap).exp();
    if y.abs() < T::lit(0.5) {
        return Ok((-y).ln_1p());
    }
    let den = one_minus_loop(rr, kappa0, gap);
    if !(den > T::zero()) {
        return Err(Error::Singular(format!("round-trip factor {} at kappa0 = {}", den, kappa0)));
    }
    Ok(den.ln())
}

/// Pressure spectral density `-κ₀ (loop_TE + loop_TM)`; negative is attractive.
pub fn pressure_integrand<T: Real>(pt: FrequencyMomentumPoint<T>, cavity: &PlanarCavity<T>) -> Result<T> {
    let (l, r) = cavity.reflections(pt)?;
    let k0 = pt.kappa0();
    let te = loop_from_reflections(l.r_te * r.r_te, k0, cavity.gap)?;
    let tm = loop_from_reflections(l.r_tm * r.r_tm, k0, cavity.gap)?;
    Ok(-k0 * (te + tm))
}

fn mode_pressure_integrand<T: Real>(pt: FrequencyMomentumPoint<T>, cavity: &PlanarCavity<T>, mode: Mode) -> Result<T> {
    Ok(-pt.kappa0() * mode_loop_factor(pt, cavity, mode)?)
}

fn mode_log_integrand<T: Real>(pt: FrequencyMomentumPoint<T>, cavity: &PlanarCavity<T>, mode: Mode) -> Result<T> {
    let (l, r) = cavity.reflections(pt)?;
    log_from_reflections(l.get(mode) * r.get(mode), pt.kappa0(), cavity.gap)
}

/// Numerical settings for the planar integrals and thermal sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarSpec<T> {
    pub quad: QuadratureSpec<T>,
    pub sum: SumSpec<T>,
}

impl<T: Real> Default for PlanarSpec<T> {
    fn default() -> Self {
        Self { quad: QuadratureSpec::default(), sum: SumSpec::default() }
    }
}

impl<T: Real> PlanarSpec<T> {
    pub fn with_tolerances(quad_tol: T, sum_tol: T) -> Self {
        Self {
            quad: QuadratureSpec::default().with_rel_tol(quad_tol),
            sum: SumSpec::default().with_rel_tol(sum_tol),
        }
    }
}

/// A pressure or free energy with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarEstimate<T> {
    pub value: T,
    pub error: T,
    /// Matsubara terms summed; 0 at zero temperature.
    pub terms: usize,
}

#[derive(Clone, Copy)]
enum Quantity {
    Pressure,
    FreeEnergy,
}

fn channel_integrand<T: Real>(
    q: Quantity,
    pt: FrequencyMomentumPoint<T>,
    cavity: &PlanarCavity<T>,
    mode: Mode,
) -> Result<T> {
    match q {
        Quantity::Pressure => mode_pressure_integrand(pt, cavity, mode),
        Quantity::FreeEnergy => mode_log_integrand(pt, cavity, mode),
    }
}

fn channel_error(err: Error, m: Option<usize>, mode: Mode) -> Error {
    match err {
        Error::NonConvergence { what, achieved, requested } => Error::NonConvergence {
            what: match m {
                Some(m) => format!("{} channel m = {}: {}", mode.name(), m, what),
                None => format!("{} channel (zero temperature): {}", mode.name(), what),
            },
            achieved,
            requested,
        },
        e => e,
    }
}

/// `∫₀^∞ p dp g(u_m, p)` for one mode, written as `∫_{u_m}^∞ κ dκ g`.
fn momentum_integral<T: Real>(
    q: Quantity,
    m: usize,
    u: T,
    cavity: &PlanarCavity<T>,
    mode: Mode,
    spec: &QuadratureSpec<T>,
) -> Result<(T, T)> {
    let scale = T::one() / (T::lit(2.0) * cavity.gap);
    let qs = spec.with_map(SemiInfiniteMap::Exponential { scale });
    let est = try_integrate_from(
        |k: T| {
            let p = ((k - u) * (k + u)).max(T::zero()).sqrt();
            if p == T::zero() && u == T::zero() {
                return Ok(T::zero());
            }
            let pt = FrequencyMomentumPoint { u, p };
            Ok(k * channel_integrand(q, pt, cavity, mode)?)
        },
        u,
        &qs,
    )
    .map_err(|e| channel_error(e, Some(m), mode))?;
    Ok((est.value, est.error))
}

fn zero_temperature<T: Real>(q: Quantity, cavity: &PlanarCavity<T>, spec: &PlanarSpec<T>) -> Result<PlanarEstimate<T>> {
    let scale = T::one() / (T::lit(2.0) * cavity.gap);
    let inner = spec.quad.with_map(SemiInfiniteMap::Exponential { scale });
    let mut worst_inner = T::zero();
    let mut total = T::zero();
    let mut error = T::zero();
    for mode in Mode::BOTH {
        // Polar coordinates u = κ cos θ, p = κ sin θ: du p dp = κ² sin θ dκ dθ.
        let est = try_integrate_finite(
            |theta: T| {
                let (s, c) = theta.sin_cos();
                let est = try_integrate_from(
                    |k: T| {
                        let pt = FrequencyMomentumPoint { u: k * c, p: k * s };
                        if k == T::zero() {
                            return Ok(T::zero());
                        }
                        Ok(k * k * channel_integrand(q, pt, cavity, mode)?)
                    },
                    T::zero(),
                    &inner,
                )?;
                if est.value != T::zero() {
                    worst_inner = worst_inner.max((est.error / est.value).abs());
                }
                Ok(s * est.value)
            },
            T::zero(),
            T::FRAC_PI_2(),
            &spec.quad,
        )
        .map_err(|e| channel_error(e, None, mode))?;
        total += est.value;
        error += est.error + worst_inner * est.value.abs();
    }
    let pi2 = T::PI() * T::PI();
    let norm = match q {
        Quantity::Pressure => T::one() / (T::lit(2.0) * pi2),
        Quantity::FreeEnergy => T::one() / (T::lit(4.0) * pi2),
    };
    Ok(PlanarEstimate { value: norm * total, error: norm * error, terms: 0 })
}

fn finite_temperature<T: Real>(q: Quantity, cavity: &PlanarCavity<T>, spec: &PlanarSpec<T>) -> Result<PlanarEstimate<T>> {
    let mut quad_error = T::zero();
    let est = matsubara_sum(
        |m, u| {
            let mut term = T::zero();
            for mode in Mode::BOTH {
                let (v, e) = momentum_integral(q, m, u, cavity, mode, &spec.quad)?;
                term += v;
                quad_error += cavity.temperature * T::lit(if m == 0 { 1.0 } else { 2.0 }) * e;
            }
            Ok(term)
        },
        cavity.temperature,
        &spec.sum,
    )?;
    let norm = match q {
        Quantity::Pressure => T::one() / (T::lit(2.0) * T::PI()),
        Quantity::FreeEnergy => T::one() / (T::lit(4.0) * T::PI()),
    };
    Ok(PlanarEstimate {
        value: norm * est.value,
        error: norm * (quad_error + est.tail.abs()),
        terms: est.terms,
    })
}

/// Zero-temperature pressure `(1/2π²) ∫du ∫p dp (-κ₀ Σ loop)`; the temperature field is ignored.
pub fn pressure_zero_temperature<T: Real>(cavity: &PlanarCavity<T>, spec: &PlanarSpec<T>) -> Result<PlanarEstimate<T>> {
    zero_temperature(Quantity::Pressure, cavity, spec)
}

/// `P = (1/2π) T Σ_m (2 - δ_{m0}) ∫p dp (-κ₀ Σ loop)` at `u_m = 2π m T`.
pub fn pressure_finite_temperature<T: Real>(
    cavity: &PlanarCavity<T>,
    spec: &PlanarSpec<T>,
) -> Result<PlanarEstimate<T>> {
    if !(cavity.temperature > T::zero()) {
        return Err(Error::Parameter("finite-temperature pressure needs T > 0".into()));
    }
    finite_temperature(Quantity::Pressure, cavity, spec)
}

/// Pressure at the cavity temperature, choosing the integral or the sum.
pub fn pressure<T: Real>(cavity: &PlanarCavity<T>, spec: &PlanarSpec<T>) -> Result<PlanarEstimate<T>> {
    if cavity.temperature > T::zero() {
        finite_temperature(Quantity::Pressure, cavity, spec)
    } else {
        zero_temperature(Quantity::Pressure, cavity, spec)
    }
}

/// Free energy per area, `(T/2π) Σ'_m ∫p dp Σ_λ ln(1 - r_L r_R e^{-2κ₀a})`.
pub fn free_energy_per_area<T: Real>(cavity: &PlanarCavity<T>, spec: &PlanarSpec<T>) -> Result<PlanarEstimate<T>> {
    if cavity.temperature > T::zero() {
        finite_temperature(Quantity::FreeEnergy, cavity, spec)
    } else {
        zero_temperature(Quantity::FreeEnergy, cavity, spec)
    }
}

/// Weighted static TE term `(T/2π) ∫p dp (-κ₀ loop_TE(0, p))` of the pressure sum.
pub fn zero_mode_te_pressure<T: Real>(cavity: &PlanarCavity<T>, spec: &PlanarSpec<T>) -> Result<T> {
    let (v, _) = momentum_integral(Quantity::Pressure, 0, T::zero(), cavity, Mode::TE, &spec.quad)?;
    Ok(cavity.temperature * v / (T::lit(2.0) * T::PI()))
}

/// Which of the two closed forms of `α²γ` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaForm<T> {
    /// Returning factor at a single interface.
    OnePlate,
    /// Round trip between two identical plates at gap `a`.
    TwoPlate { gap: T },
}

fn finite_parts<T: Real>(eps: DielectricResponse<T>) -> Option<(T, T)> {
    match eps {
        DielectricResponse::Finite { epsilon, chi } => Some((epsilon, chi)),
        DielectricResponse::Metallic => None,
    }
}

/// `α²γ_λ` in rotated variables.
///
/// One plate: `α²γ₁ = (κ₁-κ₀)²/(4κ₁κ₀)`,
/// `α²γ₂ = (κ₁-κ₀)²(p²+κ₁κ₀)²/(4 ε u⁴ κ₁κ₀)`.
/// Two plates: `α²γ₁ = (κ₁-κ₀)²/(κ₁+κ₀)² e^{-2κ₀a}` and
/// `α²γ₂ = α²γ₁ (p²+κ₁κ₀)²/(κ₁κ₀-p²)²`.
pub fn gamma_planar<T: Real>(
    pt: FrequencyMomentumPoint<T>,
    eps: DielectricResponse<T>,
    mode: Mode,
    form: GammaForm<T>,
) -> Result<T> {
    if pt.u == T::zero() && (mode == Mode::TE || pt.p == T::zero()) {
        return Err(Error::Domain {
            what: "gamma_planar",
            detail: format!("{} channel undefined at u = 0, p = {}", mode.name(), pt.p),
        });
    }
    let (u2, p2) = (pt.u * pt.u, pt.p * pt.p);
    let four = T::lit(4.0);
    match form {
        GammaForm::TwoPlate { gap } => {
            let phase = (-T::lit(2.0) * pt.kappa0() * gap).exp();
            let Some((epsilon, chi)) = finite_parts(eps) else {
                return Ok(phase);
            };
            let k = rotated_wavenumbers(pt, eps)?;
            let (k0, k1) = (k.kappa0, k.kappa1);
            // κ₁ - κ₀ = χu²/(κ₁+κ₀) and κ₁κ₀ - p² = u²(εu² + (1+ε)p²)/(κ₁κ₀+p²).
            let s = k1 + k0;
            let te = chi * u2 / (s * s);
            let r = match mode {
                Mode::TE => te,
                Mode::TM => {
                    let plus = p2 + k1 * k0;
                    chi * plus * plus / (s * s * (epsilon * u2 + (T::one() + epsilon) * p2))
                }
            };
            Ok(r * r * phase)
        }
        GammaForm::OnePlate => {
            let Some((epsilon, chi)) = finite_parts(eps) else {
                return Err(Error::Singular("one-plate gamma diverges for a metal".into()));
            };
            let k = rotated_wavenumbers(pt, eps)?;
            let (k0, k1) = (k.kappa0, k.kappa1);
            let prod = k1 * k0;
            if prod == T::zero() {
                return Err(Error::Singular("kappa1 * kappa0 = 0".into()));
            }
            let s = k1 + k0;
            Ok(match mode {
                Mode::TE => chi * chi * u2 * u2 / (four * prod * s * s),
                Mode::TM => {
                    let plus = p2 + prod;
                    chi * chi * plus * plus / (four * epsilon * prod * s * s)
                }
            })
        }
    }
}

/// One-dimensional rotated kernels of the vacuum and the medium.
///
/// TE: `g(x) = -u²/(2κ) e^{-κ|x|}`. TM, after the similarity `diag(1, i)`:
/// `K(x) = e^{-κ|x|}/(2εκ) [[p², pκ sgn x], [-pκ sgn x, -κ²]]`.
fn kernel_1d<T: Real>(mode: Mode, u: T, p: T, kappa: T, epsilon: T, x: T) -> [[T; 2]; 2] {
    let e = (-kappa * x.abs()).exp();
    match mode {
        Mode::TE => {
            let g = -u * u / (T::lit(2.0) * kappa) * e;
            [[g, T::zero()], [T::zero(), T::zero()]]
        }
        Mode::TM => {
            let c = e / (T::lit(2.0) * epsilon * kappa);
            let sg = x.signum();
            let off = p * kappa * sg * c;
            [[p * p * c, off], [-off, -kappa * kappa * c]]
        }
    }
}

fn mat2_mul<T: Real>(a: [[T; 2]; 2], b: [[T; 2]; 2]) -> [[T; 2]; 2] {
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Checks that the composed one-plate operator acts by multiplication.
///
/// The product `θ_A D¹ θ_Ā D⁰ θ_A D¹ θ_Ā` (medium `x < 0`) is integrated
/// numerically over both intermediate half-lines, divided by the kernel
/// `θ_A D¹ θ_Ā`, and compared with the closed `γ_λ`. Returns the relative
/// residual, defined as 0 in vacuum.
pub fn verify_multiplicativity<T: Real>(
    pt: FrequencyMomentumPoint<T>,
    eps: DielectricResponse<T>,
    mode: Mode,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    if !(pt.u > T::zero()) {
        return Err(Error::Domain { what: "verify_multiplicativity", detail: "needs u > 0".into() });
    }
    let Some((epsilon, chi)) = finite_parts(eps) else {
        return Err(Error::Singular("multiplicativity check needs finite epsilon".into()));
    };
    if chi == T::zero() {
        return Ok(T::zero());
    }
    let k = rotated_wavenumbers(pt, eps)?;
    let (k0, k1) = (k.kappa0, k.kappa1);
    let (u, p) = (pt.u, pt.p);

    // Observation points on either side of the interface.
    let x = -T::lit(0.37) / k1;
    let x2 = T::lit(0.53) / k1;
    let outer = spec.with_map(SemiInfiniteMap::Exponential { scale: T::one() / (k1 + k0) });
    let inner = outer;

    let mut composed = [[T::zero(); 2]; 2];
    let comps: &[(usize, usize)] = match mode {
        Mode::TE => &[(0, 0)],
        Mode::TM => &[(0, 0), (0, 1), (1, 0), (1, 1)],
    };
    for &(i, j) in comps {
        // y > 0 outside the medium, y' < 0 inside.
        let est = try_integrate_from(
            |y: T| {
                let a = kernel_1d(mode, u, p, k1, epsilon, x - y);
                let est = try_integrate_from(
                    |t: T| {
                        let yp = -t;
                        let b = kernel_1d(mode, u, p, k0, T::one(), y - yp);
                        let c = kernel_1d(mode, u, p, k1, epsilon, yp - x2);
                        Ok(mat2_mul(mat2_mul(a, b), c)[i][j])
                    },
                    T::zero(),
                    &inner,
                )?;
                Ok(est.value)
            },
            T::zero(),
            &outer,
        )?;
        composed[i][j] = est.value;
    }

    let kern = kernel_1d(mode, u, p, k1, epsilon, x - x2);
    let (mut num, mut den) = (T::zero(), T::zero());
    for &(i, j) in comps {
        num += composed[i][j] * kern[i][j];
        den += kern[i][j] * kern[i][j];
    }
    let numeric = num / den;
    let closed = gamma_planar(pt, eps, mode, GammaForm::OnePlate)? / (chi * chi);
    Ok(((numeric - closed) / closed).abs())
}

/// Scalar amplitude of the mode Green's function inside the gap, `0 < x, x' < a`.
///
/// `-u²/(2κ₀) [e^{-κ₀|x-x'|} + μ(r_L e^{-κ₀(x+x')} + r_R e^{-κ₀(2a-x-x')}
///  + 2 r_L r_R e^{-2κ₀a} cosh κ₀(x-x'))]` with `μ = 1/(1 - r_L r_R e^{-2κ₀a})`.
pub fn greens_between_plates<T: Real>(
    x: T,
    x_prime: T,
    pt: FrequencyMomentumPoint<T>,
    cavity: &PlanarCavity<T>,
    mode: Mode,
) -> Result<T> {
    let a = cavity.gap;
    for (name, v) in [("x", x), ("x'", x_prime)] {
        if !(v > T::zero() && v < a) {
            return Err(Error::Domain {
                what: "greens_between_plates",
                detail: format!("{} = {} outside the gap (0, {})", name, v, a),
            });
        }
    }
    if !(pt.u > T::zero()) {
        return Err(Error::Domain { what: "greens_between_plates", detail: "needs u > 0".into() });
    }
    let (l, r) = cavity.reflections(pt)?;
    let (rl, rr) = (l.get(mode), r.get(mode));
    let k0 = pt.kappa0();
    let round = rl * rr * (-T::lit(2.0) * k0 * a).exp();
    let mu = T::one() / one_minus_loop(rl * rr, k0, a);
    let d = x - x_prime;
    let bracket = (-k0 * d.abs()).exp()
        + mu * (rl * (-k0 * (x + x_prime)).exp()
            + rr * (-k0 * (T::lit(2.0) * a - x - x_prime)).exp()
            + round * T::lit(2.0) * (k0 * d).cosh());
    Ok(-pt.u * pt.u / (T::lit(2.0) * k0) * bracket)
}

/// Static longitudinal response of a half-space: `(transmitted, reflection)`.
///
/// The transmitted factor `1 - (α₀/2)/(1 + α₀/6)` vanishes for a metal;
/// the reflection is `(ε-1)/(ε+1)`.
pub fn longitudinal_reflection_u0<T: Real>(alpha0: T) -> Result<(T, T)> {
    if !(alpha0 >= T::zero()) || alpha0 > T::lit(6.0) {
        return Err(Error::Domain {
            what: "longitudinal_reflection_u0",
            detail: format!("alpha0 = {} outside the convergence domain [0, 6)", alpha0),
        });
    }
    let transmitted = T::one() - (alpha0 / T::lit(2.0)) / (T::one() + alpha0 / T::lit(6.0));
    let reflection = match lorentz_lorenz(alpha0)? {
        DielectricResponse::Metallic => T::one(),
        DielectricResponse::Finite { epsilon, chi } => chi / (epsilon + T::one()),
    };
    Ok((transmitted, reflection))
}

/// Convergence measure `γ = α₀/3 - (1 - α₀/3)(κ₁-κ₀)²/(4κ₁κ₀)` of the TE
/// perturbation series; the series converges when `γ < 1`.
///
/// Only defined for `u = 0` or `p² > 2u² > 0`.
pub fn te_convergence_gamma<T: Real>(pt: FrequencyMomentumPoint<T>, alpha0: T) -> Result<(T, bool)> {
    let (u2, p2) = (pt.u * pt.u, pt.p * pt.p);
    if pt.u > T::zero() && !(p2 > T::lit(2.0) * u2) {
        return Err(Error::Domain {
            what: "te_convergence_gamma",
            detail: format!("needs p^2 > 2u^2 > 0 or u = 0, got u = {}, p = {}", pt.u, pt.p),
        });
    }
    let three = T::lit(3.0);
    let base = alpha0 / three;
    let correction = match lorentz_lorenz(alpha0)? {
        DielectricResponse::Metallic => T::zero(),
        eps @ DielectricResponse::Finite { chi, .. } => {
            if pt.u == T::zero() {
                T::zero()
            } else {
                // (1 - α₀/3) χ = α₀, and (κ₁-κ₀)² = χ²u⁴/(κ₁+κ₀)².
                let k = rotated_wavenumbers(pt, eps)?;
                let s = k.kappa1 + k.kappa0;
                alpha0 * chi * u2 * u2 / (T::lit(4.0) * k.kappa1 * k.kappa0 * s * s)
            }
        }
    };
    let gamma = base - correction;
    Ok((gamma, gamma < T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::PolarizabilityModel;
    use crate::numerics::{Cholesky, DenseMatrix};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pt(u: f64, p: f64) -> FrequencyMomentumPoint<f64> {
        FrequencyMomentumPoint::new(u, p).unwrap()
    }

    #[test]
    fn weak_loop_logarithm_keeps_relative_precision() {
        let v = log_from_reflections(1e-20_f64, 1.0, 1.0).unwrap();
        assert!((v / (-1e-20 * (-2.0_f64).exp()) - 1.0).abs() < 1e-15);
        let v = log_from_reflections(0.999_f64, 1e-6, 1.0).unwrap();
        let exact = (1.0 - 0.999 * (-2e-6_f64).exp()).ln();
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn weak_te_free_energy_converges_at_tight_tolerance() {
        let l = Medium::from(PolarizabilityModel::plasma(10.0).unwrap());
        let r = Medium::from(PolarizabilityModel::oscillator(1.2, 3.0).unwrap());
        let cav = PlanarCavity::new(1.0, l, r, 0.0, ZeroModePolicy::MicroscopicZero).unwrap();
        let f = free_energy_per_area(&cav, &PlanarSpec::with_tolerances(1e-10_f64, 1e-10)).unwrap();
        assert!(f.value < 0.0 && f.error <= 1e-9 * f.value.abs());
    }

    fn eps(e: f64) -> DielectricResponse<f64> {
        DielectricResponse::from_epsilon(e)
    }

    fn medium(e: f64) -> Medium<f64> {
        Medium::Model(PolarizabilityModel::constant_epsilon(e).unwrap())
    }

    fn cavity(e: f64, gap: f64) -> PlanarCavity<f64> {
        PlanarCavity::symmetric(gap, medium(e), 0.0, ZeroModePolicy::MicroscopicZero).unwrap()
    }

    fn pc_cavity(gap: f64) -> PlanarCavity<f64> {
        PlanarCavity::symmetric(gap, Medium::PerfectConductor, 0.0, ZeroModePolicy::PerfectConductor).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn wavenumber_examples() {
        let k = rotated_wavenumbers(pt(0.0, 1.0), eps(4.0)).unwrap();
        assert_eq!((k.kappa0, k.kappa1), (1.0, 1.0));
        let k = rotated_wavenumbers(pt(3.0, 4.0), eps(1.0)).unwrap();
        assert_eq!((k.kappa0, k.kappa1), (5.0, 5.0));
        let k = rotated_wavenumbers(pt(1.0, 0.0), eps(4.0)).unwrap();
        assert_eq!((k.kappa0, k.kappa1), (1.0, 2.0));
        assert!(rotated_wavenumbers(pt(0.0, 1.0), DielectricResponse::Metallic).is_err());
    }

    #[test]
    fn reflection_examples() {
        let r = reflection(pt(0.7, 1.3), eps(1.0)).unwrap();
        assert_eq!((r.r_te, r.r_tm), (0.0, 0.0));
        let r = reflection(pt(0.0, 1.0), eps(4.0)).unwrap();
        assert_eq!(r.r_te, 0.0);
        assert!(close(r.r_tm, 3.0 / 5.0, 1e-15));
        let r = reflection(pt(1.0, 1.0), eps(1e8)).unwrap();
        assert!((r.r_te + 1.0).abs() < 1e-3 && (r.r_tm - 1.0).abs() < 1e-3);
        assert!(reflection(pt(0.0, 0.0), eps(2.0)).is_err());
    }

    #[test]
    fn reflection_frozen_values() {
        let r = reflection(pt(1.0, 1.0), eps(4.0)).unwrap();
        assert!(close(r.r_te, -0.225148226554413779, 1e-14));
        assert!(close(r.r_tm, 0.433399211801961679, 1e-14));
        let r = reflection(pt(1.0, 1.0), eps(2.0)).unwrap();
        assert!(close(r.r_te, -0.101020514433643804, 1e-14));
        assert!(close(r.r_tm, 0.240408205773457521, 1e-14));
    }

    #[test]
    fn textbook_forms_agree() {
        // -(κ₁-κ₀)/(κ₁+κ₀) and -(κ₁-εκ₀)/(κ₁+εκ₀) in their direct form.
        for &(u, p, e) in &[(1.0, 1.0, 4.0), (0.3, 2.0, 16.0), (5.0, 0.1, 1.5)] {
            let k = rotated_wavenumbers(pt(u, p), eps(e)).unwrap();
            let r = reflection(pt(u, p), eps(e)).unwrap();
            let te = -(k.kappa1 - k.kappa0) / (k.kappa1 + k.kappa0);
            let tm = -(k.kappa1 - e * k.kappa0) / (k.kappa1 + e * k.kappa0);
            assert!(close(r.r_te, te, 1e-12) && close(r.r_tm, tm, 1e-12));
        }
    }

    #[test]
    fn zero_mode_policies() {
        let plasma = Medium::Model(PolarizabilityModel::plasma(1.0).unwrap());
        assert_eq!(zero_mode_te_reflection(1.0, &plasma, ZeroModePolicy::MicroscopicZero).unwrap(), 0.0);
        let lif = zero_mode_te_reflection(1.0, &plasma, ZeroModePolicy::LifshitzLimit).unwrap();
        assert!(close(lif, -0.171572875253809902, 1e-14));
        let s = 2f64.sqrt();
        assert!(close(lif, -(s - 1.0) / (s + 1.0), 1e-14));
        // Cross-check against the dynamic coefficient just above u = 0.
        let near = reflection(pt(1e-6, 1.0), plasma.epsilon(1e-6).unwrap()).unwrap();
        assert!((near.r_te - lif).abs() < 1e-9);
        assert_eq!(zero_mode_te_reflection(1.0, &plasma, ZeroModePolicy::PerfectConductor).unwrap(), -1.0);
        let osc = Medium::Model(PolarizabilityModel::oscillator(1.5, 2.0).unwrap());
        assert_eq!(zero_mode_te_reflection(1.0, &osc, ZeroModePolicy::LifshitzLimit).unwrap(), 0.0);
        assert_eq!(zero_mode_tm_reflection(&plasma).unwrap(), 1.0);
        assert!(close(zero_mode_tm_reflection(&osc).unwrap(), 0.6, 1e-15));
    }

    #[test]
    fn loop_factor_examples() {
        let c = cavity(1.0, 1.0);
        assert_eq!(mode_loop_factor(pt(1.0, 1.0), &c, Mode::TE).unwrap(), 0.0);
        // e^{-2κ₀a} = 1/2 for an ideal mirror gives exactly 1.
        let k0 = 2f64.ln() / 2.0;
        let pc = pc_cavity(1.0);
        let v = mode_loop_factor(pt(k0 * 0.6, k0 * 0.8), &pc, Mode::TE).unwrap();
        assert!(close(v, 1.0, 1e-14));
        let c = cavity(4.0, 1.0);
        assert!(close(mode_loop_factor(pt(1.0, 1.0), &c, Mode::TE).unwrap(), 0.00300517621222311294, 1e-13));
        assert!(close(mode_loop_factor(pt(1.0, 1.0), &c, Mode::TM).unwrap(), 0.0112267614832730493, 1e-13));
        let c = cavity(2.0, 1.0);
        assert!(close(mode_loop_factor(pt(1.0, 1.0), &c, Mode::TE).unwrap(), 0.000603546723704847222, 1e-13));
        assert!(close(mode_loop_factor(pt(1.0, 1.0), &c, Mode::TM).unwrap(), 0.00342779157518699322, 1e-13));
    }

    #[test]
    fn integrand_examples() {
        assert_eq!(pressure_integrand(pt(1.0, 1.0), &cavity(1.0, 1.0)).unwrap(), 0.0);
        let k0 = 2f64.sqrt();
        let e = (-2.0 * k0).exp();
        let v = pressure_integrand(pt(1.0, 1.0), &pc_cavity(1.0)).unwrap();
        assert!(close(v, -k0 * 2.0 * e / (1.0 - e), 1e-14));
        let v = pressure_integrand(pt(1.0, 1.0), &cavity(2.0, 1.0)).unwrap();
        assert!(close(v, -0.00570117329680692268, 1e-13));
        let v = pressure_integrand(pt(1.0, 1.0), &cavity(4.0, 1.0)).unwrap();
        assert!(close(v, -0.0201269993078195644, 1e-13));
    }

    #[test]
    fn perfect_conductor_pressure_and_energy() {
        let spec = PlanarSpec::with_tolerances(1e-10, 1e-12);
        let p = pressure_zero_temperature(&pc_cavity(1.0), &spec).unwrap();
        assert!(close(p.value, -PI.powi(2) / 240.0, 1e-8), "{}", p.value);
        let f = free_energy_per_area(&pc_cavity(1.0), &spec).unwrap();
        assert!(close(f.value, -PI.powi(2) / 720.0, 1e-8), "{}", f.value);
        let p2 = pressure_zero_temperature(&pc_cavity(2.0), &spec).unwrap();
        assert!(close(p2.value, p.value / 16.0, 1e-8));
    }

    #[test]
    fn vacuum_gives_zero() {
        let spec = PlanarSpec::default();
        assert_eq!(pressure_zero_temperature(&cavity(1.0, 1.0), &spec).unwrap().value, 0.0);
        assert_eq!(free_energy_per_area(&cavity(1.0, 1.0), &spec).unwrap().value, 0.0);
    }

    #[test]
    fn frozen_dielectric_pressure() {
        let spec = PlanarSpec::with_tolerances(1e-11, 1e-12);
        let p = pressure_zero_temperature(&cavity(4.0, 1.0), &spec).unwrap();
        assert!(close(p.value, -0.0054373972505566972, 1e-9), "{}", p.value);
    }

    #[test]
    fn dilute_limit_is_quadratic() {
        // Leading order -23 δ²/(640 π² a⁴); exact value at ε = 1.01 from an independent evaluation.
        let spec = PlanarSpec::with_tolerances(1e-11, 1e-12);
        let p = pressure_zero_temperature(&cavity(1.01, 1.0), &spec).unwrap();
        assert!(close(p.value, -3.6033250945e-7, 1e-8), "{}", p.value);
        let leading = -23.0 * 1e-4 / (640.0 * PI * PI);
        assert!(close(p.value, leading, 2e-2));
    }

    #[test]
    fn low_temperature_approaches_zero_temperature() {
        let spec = PlanarSpec::with_tolerances(1e-10, 1e-10);
        let c = cavity(4.0, 1.0);
        let p0 = pressure_zero_temperature(&c, &spec).unwrap().value;
        let pt = pressure_finite_temperature(&c.with_temperature(0.01).unwrap(), &spec).unwrap().value;
        assert!(close(pt, p0, 1e-2), "{} vs {}", pt, p0);
    }

    #[test]
    fn high_temperature_perfect_conductor() {
        // Static term only: P a³/T → -ζ(3)/(4π).
        let zeta3 = 1.2020569031595942;
        let spec = PlanarSpec::with_tolerances(1e-11, 1e-12);
        let c = pc_cavity(1.0).with_temperature(20.0).unwrap();
        let p = pressure_finite_temperature(&c, &spec).unwrap().value;
        assert!(close(p / 20.0, -zeta3 / (4.0 * PI), 1e-9), "{}", p / 20.0);
        let c = c.with_policy(ZeroModePolicy::MicroscopicZero);
        let p = pressure_finite_temperature(&c, &spec).unwrap().value;
        assert!(close(p / 20.0, -zeta3 / (8.0 * PI), 1e-9));
    }

    #[test]
    fn gamma_two_plate_is_reflection_squared() {
        let grid = [0.01, 0.1, 1.0, 10.0];
        for &e in &[1.0001, 1.5, 4.0, 16.0, 1e4] {
            for &u in &grid {
                for &p in &[0.0, 0.01, 0.1, 1.0, 10.0] {
                    let r = reflection(pt(u, p), eps(e)).unwrap();
                    let ph = (-2.0 * pt(u, p).kappa0() * 0.7).exp();
                    for mode in Mode::BOTH {
                        let g = gamma_planar(pt(u, p), eps(e), mode, GammaForm::TwoPlate { gap: 0.7 }).unwrap();
                        let want = r.get(mode).powi(2) * ph;
                        assert!((g - want).abs() <= 1e-14 * want.abs().max(1e-300) + 1e-300,
                            "{:?} e={} u={} p={}: {} vs {}", mode, e, u, p, g, want);
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_frozen_values() {
        let cases = [
            (4.0, [0.00299617218683949837, 0.0111021206230792122, 0.0533985905294663831, 0.231276708913937721]),
            (2.0, [0.000603182674777689621, 0.00341608195823042269, 0.0103103630798287705, 0.0613413993878116475]),
        ];
        for (e, want) in cases {
            let two = GammaForm::TwoPlate { gap: 1.0 };
            let got = [
                gamma_planar(pt(1.0, 1.0), eps(e), Mode::TE, two).unwrap(),
                gamma_planar(pt(1.0, 1.0), eps(e), Mode::TM, two).unwrap(),
                gamma_planar(pt(1.0, 1.0), eps(e), Mode::TE, GammaForm::OnePlate).unwrap(),
                gamma_planar(pt(1.0, 1.0), eps(e), Mode::TM, GammaForm::OnePlate).unwrap(),
            ];
            for (g, w) in got.iter().zip(want) {
                assert!(close(*g, w, 1e-13), "{} vs {}", g, w);
            }
        }
        assert_eq!(gamma_planar(pt(1.0, 1.0), eps(1.0), Mode::TE, GammaForm::OnePlate).unwrap(), 0.0);
    }

    #[test]
    fn one_plate_gamma_satisfies_resummation_identity() {
        // 1/(1+α²γ₁) = 4κ₁κ₀/(κ₁+κ₀)², 1/(1+α²γ₂) = 4εκ₁κ₀u⁴/((κ₁+κ₀)²(κ₁κ₀-p²)²).
        for &(u, p, e) in &[(1.0, 1.0, 4.0), (0.1, 2.0, 16.0), (10.0, 0.1, 1.5)] {
            let k = rotated_wavenumbers(pt(u, p), eps(e)).unwrap();
            let (k0, k1) = (k.kappa0, k.kappa1);
            let g1 = gamma_planar(pt(u, p), eps(e), Mode::TE, GammaForm::OnePlate).unwrap();
            let g2 = gamma_planar(pt(u, p), eps(e), Mode::TM, GammaForm::OnePlate).unwrap();
            assert!(close(1.0 / (1.0 + g1), 4.0 * k1 * k0 / (k1 + k0).powi(2), 1e-12));
            let want = 4.0 * e * k1 * k0 * u.powi(4) / ((k1 + k0).powi(2) * (k1 * k0 - p * p).powi(2));
            assert!(close(1.0 / (1.0 + g2), want, 1e-10));
        }
    }

    #[test]
    fn multiplicativity_examples() {
        let spec = QuadratureSpec::default().with_rel_tol(1e-12);
        assert_eq!(verify_multiplicativity(pt(1.0, 1.0), eps(1.0), Mode::TE, &spec).unwrap(), 0.0);
        for &(u, p, e) in &[(1.0, 1.0, 4.0), (0.1, 2.0, 16.0)] {
            for mode in Mode::BOTH {
                let r = verify_multiplicativity(pt(u, p), eps(e), mode, &spec).unwrap();
                assert!(r < 1e-8, "{:?} ({}, {}, {}): {}", mode, u, p, e, r);
            }
        }
    }

    #[test]
    fn greens_function_vacuum_and_symmetry() {
        let p0 = pt(1.0, 1.0);
        let k0 = p0.kappa0();
        let g = greens_between_plates(0.3, 0.6, p0, &cavity(1.0, 1.0), Mode::TE).unwrap();
        assert!(close(g, -1.0 / (2.0 * k0) * (-0.3 * k0).exp(), 1e-15));
        let c = cavity(4.0, 1.0);
        for mode in Mode::BOTH {
            let a = greens_between_plates(0.3, 0.6, p0, &c, mode).unwrap();
            let b = greens_between_plates(0.6, 0.3, p0, &c, mode).unwrap();
            assert!(close(a, b, 1e-15));
        }
        assert!(greens_between_plates(1.2, 0.5, p0, &c, Mode::TE).is_err());
    }

    /// Nyström solution of `D = D⁰ + χ ∫_{x<0 ∪ x>a} D⁰ D` for the TE mode.
    fn nystrom_greens(u: f64, p: f64, e: f64, a: f64, x: f64, xp: f64) -> f64 {
        let k0 = u.hypot(p);
        let chi = e - 1.0;
        let g0 = |d: f64| -u * u / (2.0 * k0) * (-k0 * d.abs()).exp();
        // Composite Gauss–Legendre on a truncated half-line per plate.
        let gl: [(f64, f64); 8] = [
            (-0.9602898564975363, 0.1012285362903763),
            (-0.7966664774136267, 0.2223810344533745),
            (-0.5255324099163290, 0.3137066458778873),
            (-0.1834346424956498, 0.3626837833783620),
            (0.1834346424956498, 0.3626837833783620),
            (0.5255324099163290, 0.3137066458778873),
            (0.7966664774136267, 0.2223810344533745),
            (0.9602898564975363, 0.1012285362903763),
        ];
        let len = 40.0 / k0;
        let panels = 60;
        let mut nodes = Vec::new();
        for side in 0..2 {
            for i in 0..panels {
                // Geometric panels, finer near the interface.
                let t0 = (i as f64 / panels as f64).powi(2) * len;
                let t1 = ((i + 1) as f64 / panels as f64).powi(2) * len;
                for &(z, w) in &gl {
                    let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * z;
                    let y = if side == 0 { -t } else { a + t };
                    nodes.push((y, 0.5 * (t1 - t0) * w));
                }
            }
        }
        let n = nodes.len();
        // Symmetrized system (I - χ W^½ G W^½) z = W^½ g₀(· - x').
        let sys = DenseMatrix::from_fn(n, n, |i, j| {
            let (yi, wi) = nodes[i];
            let (yj, wj) = nodes[j];
            let v = -chi * wi.sqrt() * g0(yi - yj) * wj.sqrt();
            if i == j { 1.0 + v } else { v }
        });
        let rhs = DenseMatrix::from_fn(n, 1, |i, _| nodes[i].1.sqrt() * g0(nodes[i].0 - xp));
        let z = Cholesky::factor(&sys).unwrap().solve(&rhs);
        let mut acc = g0(x - xp);
        for (i, &(y, w)) in nodes.iter().enumerate() {
            acc += chi * g0(x - y) * w.sqrt() * z[(i, 0)];
        }
        acc
    }

    #[test]
    fn greens_function_matches_integral_equation() {
        let want = nystrom_greens(1.0, 1.0, 4.0, 1.0, 0.3, 0.6);
        let got = greens_between_plates(0.3, 0.6, pt(1.0, 1.0), &cavity(4.0, 1.0), Mode::TE).unwrap();
        assert!(close(got, want, 1e-4), "{} vs {}", got, want);
    }

    #[test]
    fn longitudinal_examples() {
        assert_eq!(longitudinal_reflection_u0(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(longitudinal_reflection_u0(3.0).unwrap(), (0.0, 1.0));
        let (t, r) = longitudinal_reflection_u0(1.5).unwrap();
        assert!(close(t, 0.4, 1e-15) && close(r, 0.6, 1e-15));
        assert!(matches!(longitudinal_reflection_u0(6.5), Err(Error::Domain { .. })));
        assert!(matches!(longitudinal_reflection_u0(4.0), Err(Error::Unphysical(_))));
    }

    #[test]
    fn convergence_gamma_examples() {
        assert_eq!(te_convergence_gamma(pt(0.0, 1.0), 3.0).unwrap(), (1.0, false));
        assert_eq!(te_convergence_gamma(pt(0.0, 1.0), 1.5).unwrap(), (0.5, true));
        let (g, ok) = te_convergence_gamma(pt(0.1, 1.0), 2.9).unwrap();
        assert!(ok && g < 1.0 && g > 0.9);
        assert_eq!(te_convergence_gamma(pt(0.5, 2.0), 0.0).unwrap(), (0.0, true));
        assert!(te_convergence_gamma(pt(1.0, 1.0), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn reflection_bounds(u in 0.0f64..50.0, p in 1e-6f64..50.0, e in 1.0f64..1e6) {
            let r = reflection(pt(u, p), eps(e)).unwrap();
            prop_assert!(r.r_te <= 0.0 && r.r_te > -1.0);
            prop_assert!(r.r_tm.abs() < 1.0);
        }

        #[test]
        fn static_te_vanishes(p in 1e-6f64..50.0, e in 1.0f64..1e6) {
            prop_assert_eq!(reflection(pt(0.0, p), eps(e)).unwrap().r_te, 0.0);
        }

        #[test]
        fn integrand_is_attractive(u in 1e-4f64..20.0, p in 0.0f64..20.0, e in 1.0f64..100.0, a in 0.1f64..5.0) {
            prop_assert!(pressure_integrand(pt(u, p), &cavity(e, a)).unwrap() <= 0.0);
        }
    }
}
