//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The panel rule is the 10-point Gauss / 21-point Kronrod pair. Panels
//! are bisected largest-error-first until the summed error estimate meets
//! `max(abs_tol, rel_tol * |I|)`.

use crate::error::{Error, Result};
use crate::numerics::summation::pairwise_sum;
use crate::scalar::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_291_582,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights belong to the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Value of an integral (or sum) together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

/// Substitution used to map `[lower, ∞)` onto `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SemiInfiniteMap<T> {
    /// `x = lower + scale * t / (1 - t)`.
    Rational { scale: T },
    /// `x = lower - scale * ln(1 - t)`; exact for `exp(-(x - lower) / scale)`.
    Exponential { scale: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
    pub map: SemiInfiniteMap<T>,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        // 1e-9 is unreachable in single precision.
        let floor = T::lit(50.0) * T::epsilon();
        Self {
            rel_tol: T::lit(1e-9).max(floor),
            abs_tol: T::zero(),
            max_subdivisions: 2000,
            map: SemiInfiniteMap::Rational { scale: T::one() },
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn with_rel_tol(mut self, tol: T) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_abs_tol(mut self, tol: T) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_map(mut self, map: SemiInfiniteMap<T>) -> Self {
        self.map = map;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() || self.abs_tol > T::zero()) {
            return Err(Error::Parameter(
                "quadrature tolerance must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Parameter("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut err = err.abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let tiny = T::min_positive_value() / (T::lit(50.0) * T::epsilon());
    if res_abs > tiny {
        let min_err = T::lit(50.0) * T::epsilon() * res_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

fn kronrod_panel<T, F>(f: &mut F, a: T, b: T) -> Result<Panel<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);

    let f_center = f(center)?;
    let mut res_k = f_center * T::lit(WGK[10]);
    let mut res_abs = res_k.abs();
    let mut res_g = T::zero();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k += w * (f1 + f2);
        res_abs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half_len.abs();
    let value = res_k * half_len;
    let error = rescale_error((res_k - res_g) * half_len, res_abs * scale, res_asc * scale);
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            what: format!("integrand is not finite on [{}, {}]", a, b),
            achieved: f64::INFINITY,
            requested: 0.0,
        });
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates a fallible integrand over `[a, b]`.
pub fn try_integrate_finite<T, F>(
    mut f: F,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    spec.validate()?;
    if a == b {
        return Ok(Estimate { value: T::zero(), error: T::zero() });
    }
    if b < a {
        let est = try_integrate_finite(f, b, a, spec)?;
        return Ok(Estimate { value: -est.value, error: est.error });
    }

    let mut panels = vec![kronrod_panel(&mut f, a, b)?];
    loop {
        let total: T = pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
        let error: T = pairwise_sum(&panels.iter().map(|p| p.error).collect::<Vec<_>>());
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if error <= target {
            return Ok(Estimate { value: total, error });
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                what: format!("adaptive quadrature on [{}, {}] (best estimate {:e})", a, b, total.as_f64()),
                achieved: error.as_f64(),
                requested: target.as_f64(),
            });
        }

        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let p = panels[worst];
        let mid = T::lit(0.5) * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel has collapsed to adjacent floating point numbers.
            return Err(Error::NonConvergence {
                what: format!("adaptive quadrature on [{}, {}]: panel underflow near {}", a, b, p.a),
                achieved: error.as_f64(),
                requested: target.as_f64(),
            });
        }
        let left = kronrod_panel(&mut f, p.a, mid)?;
        let right = kronrod_panel(&mut f, mid, p.b)?;
        panels[worst] = left;
        panels.insert(worst + 1, right);
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate_finite<T, F>(mut f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    try_integrate_finite(|x| Ok(f(x)), a, b, spec)
}

/// Integrates a fallible integrand over `[lower, ∞)` using `spec.map`.
pub fn try_integrate_from<T, F>(mut f: F, lower: T, spec: &QuadratureSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let one = T::one();
    match spec.map {
        SemiInfiniteMap::Rational { scale } => {
            if !(scale > T::zero()) {
                return Err(Error::Parameter("mapping scale must be positive".into()));
            }
            try_integrate_finite(
                |t| {
                    let s = one - t;
                    let x = lower + scale * t / s;
                    if !x.is_finite() {
                        return Ok(T::zero());
                    }
                    let v = f(x)?;
                    if v == T::zero() {
                        return Ok(v);
                    }
                    Ok(v * scale / (s * s))
                },
                T::zero(),
                one,
                spec,
            )
        }
        SemiInfiniteMap::Exponential { scale } => {
            if !(scale > T::zero()) {
                return Err(Error::Parameter("mapping scale must be positive".into()));
            }
            try_integrate_finite(
                |t| {
                    let s = one - t;
                    let x = lower - scale * s.ln();
                    if !x.is_finite() {
                        return Ok(T::zero());
                    }
                    let v = f(x)?;
                    if v == T::zero() {
                        return Ok(v);
                    }
                    Ok(v * scale / s)
                },
                T::zero(),
                one,
                spec,
            )
        }
    }
}

/// Integrates `f` over `[0, ∞)`.
pub fn integrate_semi_infinite<T, F>(mut f: F, spec: &QuadratureSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    try_integrate_from(|x| Ok(f(x)), T::zero(), spec)
}
