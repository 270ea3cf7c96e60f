//! Mode coefficients of a dielectric ball of radius `R` at imaginary frequency `u`.
//!
//! Everything is assembled from two boundary bilinear forms of spherical
//! Bessel functions, already multiplied by the contrast `α = ε - 1`, so
//! that the vacuum limit `ε → 1` is regular. With `x₀ = uR`,
//! `x₁ = √ε uR`, `I = i_l`, `K = k_l` (see [`bessel`]), and real forms
//!
//! `Ĉ₁[F,G] = -(R²/u) [F'(x₀) G(x₁) - √ε F(x₀) G'(x₁)]`,
//! `Ĉ₂[F,G] = R {α [F(x₀) + x₀F'(x₀)] G(x₁) + x₀ [F'(x₀) G(x₁) - √ε F(x₀) G'(x₁)]}`,
//!
//! the complex forms are `B[f,g] = P_f P_g Ĉ[F,G]` with `P_j P_j = P_h P_h = (-1)^l`
//! and `P_j P_h = -1`.

pub mod bessel;

pub use bessel::{modified_pair, sph_bessel_pair, BesselKind, BesselValue, ScaledModified};

use crate::dielectric::DielectricResponse;
use crate::error::{Error, Result};
use crate::planar::Mode;
use crate::scalar::Real;

/// Polarization and multipole order; `l ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SphericalMode {
    pub lambda: Mode,
    pub l: usize,
}

impl SphericalMode {
    pub fn new(lambda: Mode, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::Domain { what: "spherical mode", detail: "l = 0 carries no transverse mode".into() });
        }
        Ok(Self { lambda, l })
    }

    /// `Q = l(l+1)`.
    pub fn q(&self) -> usize {
        self.l * (self.l + 1)
    }
}

/// Ball radius, frequency and permittivity of one spherical channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallChannel<T> {
    pub radius: T,
    pub u: T,
    pub epsilon: T,
    pub chi: T,
}

impl<T: Real> BallChannel<T> {
    pub fn new(radius: T, u: T, eps: DielectricResponse<T>) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Parameter(format!("ball radius must be positive, got {}", radius)));
        }
        if !(u > T::zero()) || !u.is_finite() {
            return Err(Error::Domain { what: "ball channel", detail: format!("frequency u = {} must be positive", u) });
        }
        let DielectricResponse::Finite { epsilon, chi } = eps else {
            return Err(Error::Domain {
                what: "ball channel",
                detail: "metallic ball; use the perfect-conductor coefficients".into(),
            });
        };
        if !(epsilon >= T::one()) || !epsilon.is_finite() {
            return Err(Error::Unphysical(format!("epsilon = {} must be finite and >= 1", epsilon)));
        }
        Ok(Self { radius, u, epsilon, chi })
    }

    pub fn with_epsilon(radius: T, u: T, epsilon: T) -> Result<Self> {
        Self::new(radius, u, DielectricResponse::from_epsilon(epsilon))
    }

    pub fn x0(&self) -> T {
        self.u * self.radius
    }

    pub fn x1(&self) -> T {
        self.epsilon.sqrt() * self.u * self.radius
    }
}

/// `mantissa * e^{exponent}`, for quantities whose size is mostly exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub exponent: T,
}

impl<T: Real> Scaled<T> {
    pub fn value(&self) -> T {
        if self.mantissa == T::zero() {
            return T::zero();
        }
        self.mantissa * self.exponent.exp()
    }

    pub fn mul(self, other: Self) -> Self {
        Self { mantissa: self.mantissa * other.mantissa, exponent: self.exponent + other.exponent }
    }
}

fn sign_pow<T: Real>(l: usize) -> T {
    if l % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `P_f P_g`.
fn phase_product<T: Real>(f: BesselKind, g: BesselKind, l: usize) -> T {
    if f == g {
        sign_pow(l)
    } else {
        -T::one()
    }
}

struct ChannelFunctions<T> {
    outer: (ScaledModified<T>, ScaledModified<T>),
    inner: (ScaledModified<T>, ScaledModified<T>),
}

impl<T: Real> ChannelFunctions<T> {
    fn new(l: usize, ch: &BallChannel<T>) -> Result<Self> {
        Ok(Self { outer: modified_pair(l, ch.x0())?, inner: modified_pair(l, ch.x1())? })
    }

    fn pick(pair: &(ScaledModified<T>, ScaledModified<T>), kind: BesselKind) -> ScaledModified<T> {
        match kind {
            BesselKind::J => pair.0,
            BesselKind::H => pair.1,
        }
    }

    fn hat_1(&self, f: BesselKind, g: BesselKind, ch: &BallChannel<T>) -> Scaled<T> {
        let (a, b) = (Self::pick(&self.outer, f), Self::pick(&self.inner, g));
        let se = ch.epsilon.sqrt();
        let r = ch.radius;
        let m = -(r * r / ch.u) * (a.deriv * b.value - se * a.value * b.deriv);
        Scaled { mantissa: m, exponent: a.exponent + b.exponent }
    }

    fn hat_2(&self, f: BesselKind, g: BesselKind, ch: &BallChannel<T>) -> Scaled<T> {
        let (a, b) = (Self::pick(&self.outer, f), Self::pick(&self.inner, g));
        let se = ch.epsilon.sqrt();
        let x0 = ch.x0();
        let m = ch.radius
            * (ch.chi * (a.value + x0 * a.deriv) * b.value + x0 * (a.deriv * b.value - se * a.value * b.deriv));
        Scaled { mantissa: m, exponent: a.exponent + b.exponent }
    }
}

/// Which boundary form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormIndex {
    First,
    Second,
}

/// Real boundary form `Ĉ` (phase stripped), `α`-multiplied.
pub fn real_form<T: Real>(
    form: FormIndex,
    f: BesselKind,
    g: BesselKind,
    l: usize,
    ch: &BallChannel<T>,
) -> Result<Scaled<T>> {
    let fun = ChannelFunctions::new(l, ch)?;
    Ok(match form {
        FormIndex::First => fun.hat_1(f, g, ch),
        FormIndex::Second => fun.hat_2(f, g, ch),
    })
}

/// `B₁[f,g] = α⟨f,g⟩₁`, real because `P_f P_g = ±1`.
pub fn bilinear_form_1<T: Real>(f: BesselKind, g: BesselKind, l: usize, ch: &BallChannel<T>) -> Result<Scaled<T>> {
    let c = real_form(FormIndex::First, f, g, l, ch)?;
    Ok(Scaled { mantissa: phase_product::<T>(f, g, l) * c.mantissa, exponent: c.exponent })
}

/// `B₂[f,g] = α⟨f,g⟩₂`.
pub fn bilinear_form_2<T: Real>(f: BesselKind, g: BesselKind, l: usize, ch: &BallChannel<T>) -> Result<Scaled<T>> {
    let c = real_form(FormIndex::Second, f, g, l, ch)?;
    Ok(Scaled { mantissa: phase_product::<T>(f, g, l) * c.mantissa, exponent: c.exponent })
}

/// Unmultiplied `⟨f,g⟩ = B/α`; singular in vacuum.
pub fn raw_form<T: Real>(
    form: FormIndex,
    f: BesselKind,
    g: BesselKind,
    l: usize,
    ch: &BallChannel<T>,
) -> Result<Scaled<T>> {
    if ch.chi == T::zero() {
        return Err(Error::Singular("raw bilinear form at epsilon = 1".into()));
    }
    let b = match form {
        FormIndex::First => bilinear_form_1(f, g, l, ch)?,
        FormIndex::Second => bilinear_form_2(f, g, l, ch)?,
    };
    Ok(Scaled { mantissa: b.mantissa / ch.chi, exponent: b.exponent })
}

/// Loop quantity `α²γ_λl`.
///
/// TE: `-√ε u⁶ Ĉ₁[K,K] Ĉ₁[I,I]`; TM: `-(u²/√ε) Ĉ₂[I,I] Ĉ₂[K,K]`.
pub fn gamma_sphere<T: Real>(mode: SphericalMode, ch: &BallChannel<T>) -> Result<T> {
    let fun = ChannelFunctions::new(mode.l, ch)?;
    Ok(gamma_from(&fun, mode, ch))
}

fn gamma_from<T: Real>(fun: &ChannelFunctions<T>, mode: SphericalMode, ch: &BallChannel<T>) -> T {
    use BesselKind::{H, J};
    let se = ch.epsilon.sqrt();
    let u2 = ch.u * ch.u;
    match mode.lambda {
        Mode::TE => {
            let p = fun.hat_1(H, H, ch).mul(fun.hat_1(J, J, ch));
            -se * u2 * u2 * u2 * p.value()
        }
        Mode::TM => {
            let p = fun.hat_2(J, J, ch).mul(fun.hat_2(H, H, ch));
            -(u2 / se) * p.value()
        }
    }
}

/// Scattering coefficient `μ_λl`, scaled: the mantissa carries `e^{-2uR}` relative to the value.
///
/// TE: `(-1)^{l+1} √ε u⁶ Ĉ₁[I,I] Ĉ₁[I,K] / (1 + α²γ₁)`;
/// TM: `(-1)^{l+1} (u²/√ε) Ĉ₂[I,I] Ĉ₂[I,K] / (1 + α²γ₂)`.
pub fn mu_sphere_scaled<T: Real>(mode: SphericalMode, ch: &BallChannel<T>) -> Result<Scaled<T>> {
    use BesselKind::{H, J};
    let fun = ChannelFunctions::new(mode.l, ch)?;
    let g = gamma_from(&fun, mode, ch);
    let den = T::one() + g;
    if !(den > T::zero()) {
        return Err(Error::Singular(format!("1 + alpha^2 gamma = {} for l = {}", den, mode.l)));
    }
    let se = ch.epsilon.sqrt();
    let u2 = ch.u * ch.u;
    let sign = -sign_pow::<T>(mode.l);
    let (pre, p) = match mode.lambda {
        Mode::TE => (se * u2 * u2 * u2, fun.hat_1(J, J, ch).mul(fun.hat_1(J, H, ch))),
        Mode::TM => (u2 / se, fun.hat_2(J, J, ch).mul(fun.hat_2(J, H, ch))),
    };
    Ok(Scaled { mantissa: sign * pre * p.mantissa / den, exponent: p.exponent })
}

pub fn mu_sphere<T: Real>(mode: SphericalMode, ch: &BallChannel<T>) -> Result<T> {
    let s = mu_sphere_scaled(mode, ch)?;
    let v = s.value();
    if !v.is_finite() {
        return Err(Error::BesselRange { l: mode.l, x: ch.x0().as_f64() });
    }
    Ok(v)
}

/// Scattered part `μ u³ (-1)^l k_l(ur) k_l(ur')` of the exterior Green's function, `r, r' > R`.
pub fn exterior_greens_coefficient<T: Real>(
    mode: SphericalMode,
    ch: &BallChannel<T>,
    r: T,
    r_prime: T,
) -> Result<T> {
    for (name, v) in [("r", r), ("r'", r_prime)] {
        if !(v > ch.radius) {
            return Err(Error::Domain {
                what: "exterior Green's function",
                detail: format!("{} = {} must exceed the radius {}", name, v, ch.radius),
            });
        }
    }
    let mu = mu_sphere_scaled(mode, ch)?;
    let (_, k1) = modified_pair(mode.l, ch.u * r)?;
    let (_, k2) = modified_pair(mode.l, ch.u * r_prime)?;
    let u3 = ch.u * ch.u * ch.u;
    let total = Scaled {
        mantissa: mu.mantissa * u3 * sign_pow::<T>(mode.l) * k1.value * k2.value,
        exponent: mu.exponent + k1.exponent + k2.exponent,
    };
    Ok(total.value())
}

/// `ε → ∞` coefficient at `x = uR`: TE `(-1)^l i_l/k_l`, TM `(-1)^l (i_l + x i_l')/(k_l + x k_l')`.
pub fn perfect_conductor_mu<T: Real>(mode: SphericalMode, x: T) -> Result<T> {
    let (i, k) = modified_pair(mode.l, x)?;
    let (num, den) = match mode.lambda {
        Mode::TE => (i.value, k.value),
        Mode::TM => (i.value + x * i.deriv, k.value + x * k.deriv),
    };
    let s = Scaled { mantissa: sign_pow::<T>(mode.l) * num / den, exponent: i.exponent - k.exponent };
    Ok(s.value())
}

/// One row of a mode table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRow<T> {
    pub mode: SphericalMode,
    pub alpha2_gamma: T,
    pub mu: T,
}

/// Coefficients for `l = 1..=l_max` of one polarization, with a tail diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable<T> {
    pub rows: Vec<ModeRow<T>>,
    /// Geometric extrapolation of `Σ_{l > l_max} |α²γ|`; `None` when the last terms do not decay.
    pub tail_estimate: Option<T>,
}

pub fn mode_table<T: Real>(lambda: Mode, ch: &BallChannel<T>, l_max: usize) -> Result<ModeTable<T>> {
    let mut rows = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let mode = SphericalMode::new(lambda, l)?;
        rows.push(ModeRow { mode, alpha2_gamma: gamma_sphere(mode, ch)?, mu: mu_sphere(mode, ch)? });
    }
    let tail_estimate = match rows.as_slice() {
        [.., a, b] => {
            let (ga, gb) = (a.alpha2_gamma.abs(), b.alpha2_gamma.abs());
            if gb == T::zero() {
                Some(T::zero())
            } else if gb < ga {
                let q = gb / ga;
                Some(gb * q / (T::one() - q))
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(ModeTable { rows, tail_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_finite, try_integrate_from, QuadratureSpec, SemiInfiniteMap};
    use BesselKind::{H, J};

    fn ch(r: f64, u: f64, e: f64) -> BallChannel<f64> {
        BallChannel::with_epsilon(r, u, e).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    fn te(l: usize) -> SphericalMode {
        SphericalMode::new(Mode::TE, l).unwrap()
    }

    fn tm(l: usize) -> SphericalMode {
        SphericalMode::new(Mode::TM, l).unwrap()
    }

    /// `α ∫ ρ² F(uρ) G(√ε uρ)` on the appropriate side of the surface, scaled like `Ĉ₁`.
    fn lommel_oracle(f: BesselKind, g: BesselKind, l: usize, c: &BallChannel<f64>) -> f64 {
        let (u, v, r) = (c.u, c.u * c.epsilon.sqrt(), c.radius);
        let scale = match (f, g) {
            (J, J) => u + v,
            (H, H) => -(u + v),
            (J, H) => u - v,
            (H, J) => v - u,
        };
        let pick = |kind, x: f64| {
            let (i, k) = modified_pair(l, x).unwrap();
            match kind {
                J => i.value,
                H => k.value,
            }
        };
        // Integrand with the scaling of the boundary value at ρ = R removed.
        let integrand = |rho: f64| rho * rho * pick(f, u * rho) * pick(g, v * rho) * (scale * (rho - r)).exp();
        let spec = QuadratureSpec::default().with_rel_tol(1e-13);
        match (f, g) {
            (J, J) | (H, J) => {
                let inner = integrate_finite(integrand, 0.0, r, &spec).unwrap().value;
                let origin = if f == H { c.epsilon.powf(l as f64 / 2.0) / (u * u * u) * (-scale * r).exp() } else { 0.0 };
                c.chi * inner + origin
            }
            _ => {
                let s = spec.with_map(SemiInfiniteMap::Exponential { scale: 1.0 / scale.abs() });
                -c.chi * try_integrate_from(|x| Ok(integrand(x)), r, &s).unwrap().value
            }
        }
    }

    #[test]
    fn lommel_identity_frozen_values() {
        let c = ch(2.0, 0.5, 4.0);
        let want = [((J, J), 0.0801490419251282673), ((H, H), -2.88764996533610869), ((J, H), -0.763451664360599583)];
        for ((f, g), w) in want {
            let v = real_form(FormIndex::First, f, g, 2, &c).unwrap().value();
            assert!(close(v, w, 1e-13), "{:?}{:?}: {} vs {}", f, g, v, w);
        }
        let c = ch(1.0, 1.0, 4.0);
        let want = [((J, J), 2.17076953565325987), ((H, H), -0.273828876023251686), ((J, H), 0.414904723745537639)];
        for ((f, g), w) in want {
            let v = real_form(FormIndex::Second, f, g, 1, &c).unwrap().value();
            assert!(close(v, w, 1e-13), "{:?}{:?}: {} vs {}", f, g, v, w);
        }
    }

    #[test]
    fn lommel_identity_against_quadrature() {
        for (l, r, u, e) in [(2usize, 1.0, 1.0, 4.0), (3, 1.0, 2.0, 2.0), (1, 2.0, 0.5, 16.0)] {
            let c = ch(r, u, e);
            for (f, g) in [(J, J), (H, H), (J, H), (H, J)] {
                let b = real_form(FormIndex::First, f, g, l, &c).unwrap().mantissa;
                let q = lommel_oracle(f, g, l, &c);
                assert!(close(b, q, 1e-10), "l={} {:?}{:?}: {} vs {}", l, f, g, b, q);
            }
        }
    }

    #[test]
    fn vacuum_self_forms_vanish() {
        let c = ch(1.0, 1.3, 1.0);
        for l in 1..6 {
            assert_eq!(bilinear_form_1(J, J, l, &c).unwrap().mantissa, 0.0);
            assert_eq!(bilinear_form_1(H, H, l, &c).unwrap().mantissa, 0.0);
            assert_eq!(gamma_sphere(te(l), &c).unwrap(), 0.0);
            assert_eq!(mu_sphere(tm(l), &c).unwrap(), 0.0);
        }
        assert!(raw_form(FormIndex::First, J, J, 1, &c).is_err());
    }

    #[test]
    fn frozen_mode_coefficients() {
        let cases = [
            (1usize, 1.0, 4.0, [0.0235432611843718584, -0.0624891749188066035, 0.297209691026724064, 0.347153795078643952]),
            (1, 1.0, 2.0, [0.00389750379077067544, -0.0237778920728823850, 0.0757483099085335633, 0.186843327553570776]),
            (4, 0.5, 16.0, [0.00179855465956938284, 7.14955110201390e-10, 3.14702061934978495, -2.17406048122053633e-8]),
            (3, 2.0, 2.0, [0.00294357871651496063, -0.00680973937733670074, 0.0861579224002022134, 0.0481415649164337726]),
        ];
        for (l, x, e, want) in cases {
            let c = ch(1.0, x, e);
            let got = [
                gamma_sphere(te(l), &c).unwrap(),
                mu_sphere(te(l), &c).unwrap(),
                gamma_sphere(tm(l), &c).unwrap(),
                mu_sphere(tm(l), &c).unwrap(),
            ];
            for (g, w) in got.iter().zip(want) {
                assert!(close(*g, w, 1e-10), "l={} x={} e={}: {} vs {}", l, x, e, g, w);
            }
        }
    }

    #[test]
    fn te_gamma_decays_with_l() {
        let want = [
            0.023543261184371857,
            0.007232574316775593,
            0.002610639297276986,
            0.0011051978127340294,
            0.0005333187652727138,
            0.0002850845372656564,
        ];
        let c = ch(1.0, 1.0, 4.0);
        let mut prev = f64::INFINITY;
        for (l, w) in (1..=6).zip(want) {
            let g = gamma_sphere(te(l), &c).unwrap();
            assert!(close(g, w, 1e-12));
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn perfect_conductor_limit() {
        assert!(close(perfect_conductor_mu(te(1), 1.0).unwrap(), -0.5, 1e-14));
        assert!(close(perfect_conductor_mu(tm(1), 1.0).unwrap(), 0.731509349821775038, 1e-13));
        assert!(close(perfect_conductor_mu(te(2), 1.0).unwrap(), 0.0277897213521893019, 1e-13));
        assert!(close(perfect_conductor_mu(tm(2), 1.0).unwrap(), -0.0381839938168343608, 1e-13));
        let c = ch(1.0, 1.0, 1e6);
        for m in [te(1), tm(1), te(2), tm(2)] {
            let got = mu_sphere(m, &c).unwrap();
            let want = perfect_conductor_mu(m, 1.0).unwrap();
            assert!(close(got, want, 1e-2), "{:?}: {} vs {}", m, got, want);
        }
    }

    #[test]
    fn mu_is_linear_in_contrast() {
        // μ/δ settles as δ → 0; μ/δ² does not.
        for m in [te(1), tm(1), te(3)] {
            let a = mu_sphere(m, &ch(1.0, 1.0, 1.0 + 1e-2)).unwrap() / 1e-2;
            let b = mu_sphere(m, &ch(1.0, 1.0, 1.0 + 1e-3)).unwrap() / 1e-3;
            assert!(close(a, b, 1e-2), "{:?}: {} vs {}", m, a, b);
        }
    }

    #[test]
    fn exterior_coefficient_properties() {
        let c = ch(1.0, 1.0, 4.0);
        let a = exterior_greens_coefficient(te(1), &c, 2.0, 3.0).unwrap();
        let b = exterior_greens_coefficient(te(1), &c, 3.0, 2.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(exterior_greens_coefficient(te(2), &ch(1.0, 1.0, 1.0), 2.0, 2.0).unwrap(), 0.0);
        let v = exterior_greens_coefficient(te(1), &c, 2.0, 2.0).unwrap();
        let (_, k) = modified_pair(1, 2.0_f64).unwrap();
        let want = mu_sphere(te(1), &c).unwrap() * -k.unscaled().0.powi(2);
        assert!(close(v, want, 1e-13));
        assert!(exterior_greens_coefficient(te(1), &c, 0.5, 2.0).is_err());
    }

    #[test]
    fn large_argument_stays_finite() {
        let c = ch(1.0, 50.0, 16.0);
        for m in [te(10), tm(10)] {
            assert!(gamma_sphere(m, &c).unwrap().is_finite());
            assert!(mu_sphere_scaled(m, &c).unwrap().mantissa.is_finite());
        }
    }

    #[test]
    fn table_reports_tail() {
        let t = mode_table(Mode::TE, &ch(1.0, 1.0, 4.0), 20).unwrap();
        assert_eq!(t.rows.len(), 20);
        let tail = t.tail_estimate.unwrap();
        assert!(tail > 0.0 && tail.is_finite());
        let t = mode_table(Mode::TM, &ch(1.0, 1.0, 4.0), 20).unwrap();
        assert!(t.tail_estimate.is_none());
    }
}
