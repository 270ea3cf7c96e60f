//! Finite lattices of point dipoles coupled by the retarded dipole kernel.
//!
//! The free energy spectral density of a lattice is `F(u) = ½ ln det(I - M(u))`
//! with `M` the `3N × 3N` coupling matrix of blocks `√(a_i a_j) D₀(iu, x_i - x_j)`,
//! self blocks and pairs closer than the exclusion radius left out.
//! Site polarizabilities `a_i` carry volume units; a dilute continuum with
//! number density `n` has `α₀ = n a₀`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{
    matsubara_sum, spectral_radius_symmetric, try_integrate_finite, Cholesky, DenseMatrix, QuadratureSpec,
    SumSpec,
};
use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

fn sub<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm<T: Real>(v: &Vec3<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipoleLattice<T> {
    pub sites: Vec<Vec3<T>>,
    pub site_alpha0: Vec<T>,
    /// Pairs closer than this are excluded from the coupling.
    pub cutoff: T,
    pub label: String,
}

impl<T: Real> DipoleLattice<T> {
    pub fn new(sites: Vec<Vec3<T>>, site_alpha0: Vec<T>, cutoff: T, label: impl Into<String>) -> Result<Self> {
        if sites.len() != site_alpha0.len() {
            return Err(Error::Lattice(format!(
                "{} sites but {} polarizabilities",
                sites.len(),
                site_alpha0.len()
            )));
        }
        if !(cutoff >= T::zero()) || !cutoff.is_finite() {
            return Err(Error::Lattice(format!("cutoff {} must be finite and non-negative", cutoff)));
        }
        for (i, (s, a)) in sites.iter().zip(&site_alpha0).enumerate() {
            if s.iter().any(|c| !c.is_finite()) {
                return Err(Error::Lattice(format!("site {} has a non-finite coordinate", i)));
            }
            if !(*a >= T::zero()) || !a.is_finite() {
                return Err(Error::Lattice(format!("site {} has polarizability {}", i, a)));
            }
        }
        let lattice = Self { sites, site_alpha0, cutoff, label: label.into() };
        if let Some((i, j, d)) = lattice.closest_pair() {
            if d == T::zero() {
                return Err(Error::Lattice(format!("sites {} and {} coincide", i, j)));
            }
            if d < cutoff {
                return Err(Error::Lattice(format!(
                    "sites {} and {} are {} apart, closer than the cutoff {}",
                    i, j, d, cutoff
                )));
            }
        }
        Ok(lattice)
    }

    /// Same polarizability on every site.
    pub fn uniform(sites: Vec<Vec3<T>>, alpha0: T, cutoff: T, label: impl Into<String>) -> Result<Self> {
        let n = sites.len();
        Self::new(sites, vec![alpha0; n], cutoff, label)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    fn closest_pair(&self) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, usize, T)> = None;
        for i in 0..self.sites.len() {
            for j in 0..i {
                let d = norm(&sub(&self.sites[i], &self.sites[j]));
                if best.map_or(true, |b| d < b.2) {
                    best = Some((j, i, d));
                }
            }
        }
        best
    }

    pub fn min_distance(&self) -> Option<T> {
        self.closest_pair().map(|p| p.2)
    }

    /// Smallest distance between a site of `self` and a site of `other`.
    pub fn distance_to(&self, other: &Self) -> Option<T> {
        let mut best: Option<T> = None;
        for a in &self.sites {
            for b in &other.sites {
                let d = norm(&sub(a, b));
                best = Some(best.map_or(d, |x: T| x.min(d)));
            }
        }
        best
    }

    /// Rigid motion `x ↦ R x + shift`.
    pub fn transformed(&self, rotation: &Mat3<T>, shift: Vec3<T>) -> Self {
        let sites = self
            .sites
            .iter()
            .map(|s| {
                let mut out = shift;
                for (r, o) in rotation.iter().zip(out.iter_mut()) {
                    *o += r[0] * s[0] + r[1] * s[1] + r[2] * s[2];
                }
                out
            })
            .collect();
        Self { sites, ..self.clone() }
    }

    pub fn translated(&self, shift: Vec3<T>) -> Self {
        let one = T::one();
        let zero = T::zero();
        self.transformed(&[[one, zero, zero], [zero, one, zero], [zero, zero, one]], shift)
    }

    /// Sites of `self` followed by those of `other`; the larger cutoff is kept.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        let mut alpha = self.site_alpha0.clone();
        alpha.extend_from_slice(&other.site_alpha0);
        Self::new(sites, alpha, self.cutoff.max(other.cutoff), format!("{}+{}", self.label, other.label))
    }

    /// CSV with header `x,y,z,alpha0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,alpha0\n");
        for (s, a) in self.sites.iter().zip(&self.site_alpha0) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", s[0], s[1], s[2], a));
        }
        out
    }

    pub fn from_csv(text: &str, cutoff: T, label: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "x,y,z,alpha0" => {}
            _ => return Err(Error::Lattice("lattice CSV must start with the header x,y,z,alpha0".into())),
        }
        let mut sites = Vec::new();
        let mut alpha = Vec::new();
        for (n, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Lattice(format!("line {}: expected 4 fields, found {}", n + 1, fields.len())));
            }
            let mut v = [T::zero(); 4];
            for (slot, f) in v.iter_mut().zip(&fields) {
                let x: f64 = f.parse().map_err(|_| Error::Lattice(format!("line {}: bad number {:?}", n + 1, f)))?;
                *slot = T::lit(x);
            }
            sites.push([v[0], v[1], v[2]]);
            alpha.push(v[3]);
        }
        Self::new(sites, alpha, cutoff, label)
    }
}

/// `nx × ny × nz` simple cubic block with corner at `origin`; the cutoff is the spacing.
pub fn cubic_slab<T: Real>(
    counts: [usize; 3],
    spacing: T,
    alpha0: T,
    origin: Vec3<T>,
    label: impl Into<String>,
) -> Result<DipoleLattice<T>> {
    if !(spacing > T::zero()) {
        return Err(Error::Lattice(format!("spacing {} must be positive", spacing)));
    }
    let mut sites = Vec::with_capacity(counts[0] * counts[1] * counts[2]);
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for k in 0..counts[2] {
                sites.push([
                    origin[0] + spacing * T::from_usize_lossy(i),
                    origin[1] + spacing * T::from_usize_lossy(j),
                    origin[2] + spacing * T::from_usize_lossy(k),
                ]);
            }
        }
    }
    DipoleLattice::uniform(sites, alpha0, spacing, label)
}

/// `n` sites uniform in a ball, rejecting any closer than `min_distance` to an accepted site.
pub fn random_cloud<T: Real>(
    n: usize,
    center: Vec3<T>,
    radius: T,
    min_distance: T,
    alpha0: T,
    seed: u64,
    label: impl Into<String>,
) -> Result<DipoleLattice<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 10_000 * n.max(1);
    let mut sites: Vec<Vec3<T>> = Vec::with_capacity(n);
    let mut attempts = 0;
    while sites.len() < n {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Lattice(format!(
                "placed only {} of {} sites with minimum distance {} in radius {}",
                sites.len(),
                n,
                min_distance,
                radius
            )));
        }
        let p: Vec3<f64> = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if norm(&p) > 1.0 {
            continue;
        }
        let x = [center[0] + radius * T::lit(p[0]), center[1] + radius * T::lit(p[1]), center[2] + radius * T::lit(p[2])];
        if sites.iter().all(|s| norm(&sub(s, &x)) >= min_distance) {
            sites.push(x);
        }
    }
    DipoleLattice::uniform(sites, alpha0, min_distance, label)
}

/// Retarded dipole kernel `D₀(iu, x)`.
///
/// `e^{-ur}/(4πr³) [(3 + 3ur + u²r²) n nᵀ - (1 + ur + u²r²) I]`.
pub fn dyadic_kernel<T: Real>(u: T, dx: Vec3<T>) -> Result<Mat3<T>> {
    let r = norm(&dx);
    if !(r > T::zero()) {
        return Err(Error::Domain { what: "dyadic kernel", detail: "separation must be nonzero".into() });
    }
    if !(u >= T::zero()) {
        return Err(Error::Domain { what: "dyadic kernel", detail: format!("frequency u = {} is negative", u) });
    }
    let x = u * r;
    let pre = (-x).exp() / (T::lit(4.0) * T::PI() * r * r * r);
    let a = pre * (T::lit(3.0) + T::lit(3.0) * x + x * x);
    let b = pre * (T::one() + x + x * x);
    let n = [dx[0] / r, dx[1] / r, dx[2] / r];
    let mut k = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = a * n[i] * n[j];
        }
        k[i][i] -= b;
    }
    Ok(k)
}

#[derive(Debug, Clone)]
pub struct CouplingMatrix<T> {
    pub matrix: DenseMatrix<T>,
    pub u: T,
    pub spectral_radius: T,
}

/// Assembles `M(u)` with its spectral radius.
pub fn build_coupling<T: Real>(lattice: &DipoleLattice<T>, u: T) -> Result<CouplingMatrix<T>> {
    let matrix = assemble(lattice, u)?;
    let spectral_radius = spectral_radius_symmetric(&matrix, T::lit(1e-12).max(T::epsilon() * T::lit(10.0)), 10_000);
    Ok(CouplingMatrix { matrix, u, spectral_radius })
}

/// `M(u)` alone, rows in parallel.
fn assemble<T: Real>(lattice: &DipoleLattice<T>, u: T) -> Result<DenseMatrix<T>> {
    if !(u >= T::zero()) || !u.is_finite() {
        return Err(Error::Domain { what: "coupling matrix", detail: format!("frequency u = {} is invalid", u) });
    }
    let n = lattice.len();
    let dim = 3 * n;
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut block = vec![T::zero(); 3 * dim];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dx = sub(&lattice.sites[i], &lattice.sites[j]);
                if norm(&dx) < lattice.cutoff {
                    continue;
                }
                let w = (lattice.site_alpha0[i] * lattice.site_alpha0[j]).sqrt();
                let k = dyadic_kernel(u, dx).expect("distinct sites");
                for a in 0..3 {
                    for b in 0..3 {
                        block[a * dim + 3 * j + b] = w * k[a][b];
                    }
                }
            }
            block
        })
        .collect();
    Ok(DenseMatrix::from_row_major(dim, dim, rows.concat()))
}

/// Factors `I - M`; `ρ(M) < 1` holds exactly when `I + M` and `I - M` are both positive definite.
fn convergent_cholesky<T: Real>(m: &DenseMatrix<T>, u: T, what: &str) -> Result<Cholesky<T>> {
    let fail = |side: &str, e: Error| match e {
        Error::NotPositiveDefinite { .. } => {
            let rho = spectral_radius_symmetric(m, T::lit(1e-6), 10_000);
            Error::NonConvergence {
                what: format!("{} at u = {}: I {} M is not positive definite, spectral radius about {}", what, u, side, rho),
                achieved: rho.as_f64(),
                requested: 1.0,
            }
        }
        other => other,
    };
    let mut plus = m.clone();
    for i in 0..plus.rows() {
        plus[(i, i)] += T::one();
    }
    Cholesky::factor(&plus).map_err(|e| fail("+", e))?;
    Cholesky::factor_identity_minus(m).map_err(|e| fail("-", e))
}

/// `½ ln det(I - M(u))`.
pub fn free_energy_spectral<T: Real>(lattice: &DipoleLattice<T>, u: T) -> Result<T> {
    let m = assemble(lattice, u)?;
    Ok(T::lit(0.5) * convergent_cholesky(&m, u, "lattice free energy")?.logdet())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate<T> {
    pub value: T,
    /// `3N ρ^{n+1} / ((n+1)(1-ρ))`.
    pub tail_bound: T,
    pub spectral_radius: T,
}

/// `-½ Σ_{n=2}^{n_max} Tr(Mⁿ)/n`.
pub fn free_energy_series<T: Real>(lattice: &DipoleLattice<T>, u: T, n_max: usize) -> Result<SeriesEstimate<T>> {
    let c = build_coupling(lattice, u)?;
    let rho = c.spectral_radius;
    if rho >= T::one() {
        return Err(Error::NonConvergence {
            what: format!("trace series at u = {}: spectral radius {} >= 1", u, rho),
            achieved: rho.as_f64(),
            requested: 1.0,
        });
    }
    let mut value = T::zero();
    if n_max >= 2 {
        let mut power = c.matrix.matmul(&c.matrix);
        for n in 2..=n_max {
            if n > 2 {
                power = power.matmul(&c.matrix);
            }
            value -= T::lit(0.5) * power.trace() / T::from_usize_lossy(n);
        }
    }
    let next = T::from_usize_lossy(n_max.max(1) + 1);
    let tail_bound = T::from_usize_lossy(c.matrix.rows()) * rho.powf(next) / (next * (T::one() - rho));
    Ok(SeriesEstimate { value, tail_bound, spectral_radius: rho })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFreeEnergy<T> {
    pub f_a: T,
    pub f_b: T,
    pub f_ab: T,
    /// `½ ln det(I - M)` of the combined lattice, factored on its own.
    pub f_total: T,
}

impl<T: Real> SplitFreeEnergy<T> {
    pub fn residual(&self) -> T {
        (self.f_total - (self.f_a + self.f_b + self.f_ab)).abs()
    }
}

/// Interaction part of the free energy density of `A ∪ B`.
///
/// With `I - M_AA = L_A L_Aᵀ` and `Y = L_A⁻¹ M_AB L_B⁻ᵀ`, `F_AB = ½ ln det(I - Y Yᵀ)`.
pub fn split_free_energy<T: Real>(a: &DipoleLattice<T>, b: &DipoleLattice<T>, u: T) -> Result<SplitFreeEnergy<T>> {
    let parts = split_parts(a, b, u)?;
    let whole = &parts.whole;
    Ok(SplitFreeEnergy {
        f_a: parts.f_a,
        f_b: parts.f_b,
        f_ab: parts.f_ab,
        f_total: T::lit(0.5) * whole.logdet(),
    })
}

struct SplitParts<T> {
    /// Factor of `I - M` for the joint lattice.
    whole: Cholesky<T>,
    f_a: T,
    f_b: T,
    f_ab: T,
}

fn split_parts<T: Real>(a: &DipoleLattice<T>, b: &DipoleLattice<T>, u: T) -> Result<SplitParts<T>> {
    match a.distance_to(b) {
        Some(d) if d > T::zero() => {}
        Some(_) => return Err(Error::Lattice(format!("lattices {} and {} overlap", a.label, b.label))),
        None => return Err(Error::Lattice("empty lattice in split".into())),
    }
    let joint = a.union(b)?;
    let matrix = assemble(&joint, u)?;
    // Principal blocks interlace with the whole, so gating the joint matrix covers them.
    let whole = convergent_cholesky(&matrix, u, "combined lattice")?;
    let (na, nb) = (3 * a.len(), 3 * b.len());
    let chol_a = Cholesky::factor_identity_minus(&matrix.block(0, 0, na, na))?;
    let chol_b = Cholesky::factor_identity_minus(&matrix.block(na, na, nb, nb))?;
    let m_ab = matrix.block(0, na, na, nb);
    let z = chol_a.solve_lower(&m_ab);
    let y = chol_b.solve_lower(&z.transpose());
    // y is Yᵀ; I - YᵀY has the same determinant as I - YYᵀ.
    let gram = y.matmul(&y.transpose());
    let chol_ab = Cholesky::factor_identity_minus(&gram).map_err(|_| Error::NonConvergence {
        what: format!("interaction of {} and {} at u = {}", a.label, b.label, u),
        achieved: f64::NAN,
        requested: 1.0,
    })?;
    let half = T::lit(0.5);
    Ok(SplitParts { whole, f_a: half * chol_a.logdet(), f_b: half * chol_b.logdet(), f_ab: half * chol_ab.logdet() })
}

/// Free energy spectral density `F(u)`.
pub trait SpectralFreeEnergy<T: Real>: Sync {
    fn spectral(&self, u: T) -> Result<T>;
}

/// Whole-lattice `F(u)`.
pub struct LatticeTotal<'a, T>(pub &'a DipoleLattice<T>);

impl<T: Real> SpectralFreeEnergy<T> for LatticeTotal<'_, T> {
    fn spectral(&self, u: T) -> Result<T> {
        free_energy_spectral(self.0, u)
    }
}

/// Interaction `F_AB(u)` of two disjoint lattices.
pub struct PairInteraction<'a, T> {
    pub a: &'a DipoleLattice<T>,
    pub b: &'a DipoleLattice<T>,
}

impl<T: Real> SpectralFreeEnergy<T> for PairInteraction<'_, T> {
    fn spectral(&self, u: T) -> Result<T> {
        Ok(split_parts(self.a, self.b, u)?.f_ab)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec<T> {
    pub quad: QuadratureSpec<T>,
    pub sum: SumSpec<T>,
    /// Matsubara frequencies evaluated concurrently per batch.
    pub batch: usize,
}

impl<T: Real> Default for OracleSpec<T> {
    fn default() -> Self {
        Self { quad: QuadratureSpec::default(), sum: SumSpec::default(), batch: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate<T> {
    pub value: T,
    pub error: T,
    /// Matsubara terms used, or zero for the frequency integral.
    pub terms: usize,
}

/// `T Σ (2 - δ_{m0}) F(u_m)` for `T > 0`, `(1/π) ∫₀^∞ F(u) du` at `T = 0`.
pub fn total_free_energy<T: Real, S: SpectralFreeEnergy<T>>(
    source: &S,
    temperature: T,
    spec: &OracleSpec<T>,
) -> Result<OracleEstimate<T>> {
    if temperature > T::zero() {
        let mut cache: Vec<T> = Vec::new();
        let batch = spec.batch.max(1);
        let est = matsubara_sum(
            |m, _| {
                if m >= cache.len() {
                    let start = cache.len();
                    let fresh: Vec<Result<T>> = (start..start + batch)
                        .into_par_iter()
                        .map(|k| source.spectral(crate::numerics::matsubara_frequency(k, temperature)))
                        .collect();
                    for r in fresh {
                        cache.push(r?);
                    }
                }
                Ok(cache[m])
            },
            temperature,
            &spec.sum,
        )?;
        return Ok(OracleEstimate { value: est.value, error: est.tail.abs(), terms: est.terms });
    }
    if temperature < T::zero() || !temperature.is_finite() {
        return Err(Error::Parameter(format!("temperature {} must be finite and non-negative", temperature)));
    }
    // u = (1 - t)/t, du = dt/t².
    let est = try_integrate_finite(
        |t: T| {
            let u = (T::one() - t) / t;
            Ok(source.spectral(u)? / (t * t))
        },
        T::zero(),
        T::one(),
        &spec.quad,
    )?;
    Ok(OracleEstimate { value: est.value / T::PI(), error: est.error / T::PI(), terms: 0 })
}

/// Force on `B` along the unit vector `axis`: `-[F_AB(+h) - F_AB(-h)]/(2h)`.
pub fn force_between<T: Real>(
    a: &DipoleLattice<T>,
    b: &DipoleLattice<T>,
    axis: Vec3<T>,
    h: T,
    temperature: T,
    spec: &OracleSpec<T>,
) -> Result<T> {
    let len = norm(&axis);
    if !(len > T::zero()) || !(h > T::zero()) {
        return Err(Error::Parameter("force needs a nonzero axis and a positive step".into()));
    }
    let step = [axis[0] / len * h, axis[1] / len * h, axis[2] / len * h];
    let plus = b.translated(step);
    let minus = b.translated([-step[0], -step[1], -step[2]]);
    let fp = total_free_energy(&PairInteraction { a, b: &plus }, temperature, spec)?.value;
    let fm = total_free_energy(&PairInteraction { a, b: &minus }, temperature, spec)?.value;
    Ok(-(fp - fm) / (T::lit(2.0) * h))
}

/// Interaction energy of two equal dipoles a distance `d` apart.
pub fn two_dipole_energy<T: Real>(alpha0: T, d: T, temperature: T, spec: &OracleSpec<T>) -> Result<T> {
    let z = T::zero();
    let a = DipoleLattice::uniform(vec![[z, z, z]], alpha0, z, "A")?;
    let b = DipoleLattice::uniform(vec![[z, z, d]], alpha0, z, "B")?;
    Ok(total_free_energy(&PairInteraction { a: &a, b: &b }, temperature, spec)?.value)
}

/// Retarded large-distance limit `-23 a₀² / (64 π³ d⁷)`.
pub fn casimir_polder_energy<T: Real>(alpha0: T, d: T) -> T {
    -T::lit(23.0) * alpha0 * alpha0 / (T::lit(64.0) * T::PI().powi(3) * d.powi(7))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit<T> {
    pub slope: T,
    pub intercept: T,
    pub energies: Vec<T>,
}

/// Least-squares slope of `ln|E(d)|` against `ln d` for two dipoles at `T = 0`.
pub fn casimir_polder_scaling<T: Real>(alpha0: T, d_list: &[T], spec: &OracleSpec<T>) -> Result<PowerLawFit<T>> {
    if d_list.len() < 2 {
        return Err(Error::Parameter("power-law fit needs at least two separations".into()));
    }
    let energies = d_list
        .iter()
        .map(|&d| two_dipole_energy(alpha0, d, T::zero(), spec))
        .collect::<Result<Vec<T>>>()?;
    let pts: Vec<(T, T)> = d_list.iter().zip(&energies).map(|(d, e)| (d.ln(), e.abs().ln())).collect();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonConvergence {
            what: "power-law fit: zero or invalid energy".into(),
            achieved: f64::NAN,
            requested: 0.0,
        });
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    if sxx == T::zero() {
        return Err(Error::Parameter("power-law fit needs distinct separations".into()));
    }
    let slope = sxy / sxx;
    Ok(PowerLawFit { slope, intercept: my - slope * mx, energies })
}

/// `∫_{|x|<a} D₀(iu, x) d³x` including the contact term `-(1/3) I` at the origin.
///
/// The angular average of `n nᵀ` is `I/3`, leaving the radial integral
/// `-(2/3) u² ∫₀^a r e^{-ur} dr` on the diagonal.
pub fn depolarization_integral<T: Real>(u: T, a: T, spec: &QuadratureSpec<T>) -> Result<Mat3<T>> {
    if !(u >= T::zero()) || !(a > T::zero()) {
        return Err(Error::Domain { what: "depolarization integral", detail: format!("u = {}, a = {}", u, a) });
    }
    let radial = if u == T::zero() {
        T::zero()
    } else {
        try_integrate_finite(|r: T| Ok(r * (-u * r).exp()), T::zero(), a, spec)?.value
    };
    let d = -T::one() / T::lit(3.0) - T::lit(2.0) / T::lit(3.0) * u * u * radial;
    let z = T::zero();
    Ok([[d, z, z], [z, d, z], [z, z, d]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::symmetric_eigenvalues;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    fn pair(d: f64, a0: f64) -> (DipoleLattice<f64>, DipoleLattice<f64>) {
        (
            DipoleLattice::uniform(vec![[0.0, 0.0, 0.0]], a0, 0.0, "A").unwrap(),
            DipoleLattice::uniform(vec![[0.0, 0.0, d]], a0, 0.0, "B").unwrap(),
        )
    }

    #[test]
    fn kernel_values() {
        let k = dyadic_kernel(1.0, [1.0, 0.0, 0.0]).unwrap();
        let want = [0.11709966304863834, -0.08782474728647875, -0.08782474728647875];
        for i in 0..3 {
            assert!(close(k[i][i], want[i], 1e-14));
            for j in 0..3 {
                if i != j {
                    assert_eq!(k[i][j], 0.0);
                }
            }
        }
        let s = dyadic_kernel(0.0_f64, [0.3, -1.1, 0.7]).unwrap();
        assert!((s[0][0] + s[1][1] + s[2][2]).abs() < 1e-15);
        assert!(dyadic_kernel(1.0, [0.0; 3]).is_err());
    }

    #[test]
    fn kernel_matches_fourier_inversion() {
        // D₀ = (∂∂ - u² I) e^{-ur}/(4πr); radial derivatives of g = e^{-ur}/(4πr) by finite differences.
        let (u, r) = (0.8_f64, 1.3_f64);
        let g = |r: f64| (-u * r).exp() / (4.0 * std::f64::consts::PI * r);
        let h = 1e-4;
        let g1 = (g(r + h) - g(r - h)) / (2.0 * h);
        let g2 = (g(r + h) - 2.0 * g(r) + g(r - h)) / (h * h);
        let k = dyadic_kernel(u, [0.0, 0.0, r]).unwrap();
        assert!(close(k[2][2], g2 - u * u * g(r), 1e-6));
        assert!(close(k[0][0], g1 / r - u * u * g(r), 1e-6));
    }

    #[test]
    fn coupling_structure() {
        let one = DipoleLattice::uniform(vec![[0.0, 0.0, 0.0]], 0.1, 0.0, "one").unwrap();
        assert_eq!(build_coupling(&one, 1.0).unwrap().matrix.max_abs(), 0.0);
        let l = cubic_slab([3, 3, 3], 1.0, 0.01, [0.0; 3], "cube").unwrap();
        let c = build_coupling(&l, 1.0).unwrap();
        assert_eq!(c.matrix.max_asymmetry(), 0.0);
        assert!(close(c.spectral_radius, 0.004779844334511374, 1e-10));
        let ev = symmetric_eigenvalues(&c.matrix);
        let rho = ev.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        assert!(close(c.spectral_radius, rho, 1e-10));
    }

    #[test]
    fn lattice_validation() {
        assert!(DipoleLattice::uniform(vec![[0.0; 3], [0.0; 3]], 0.1, 0.0, "x").is_err());
        assert!(DipoleLattice::uniform(vec![[0.0; 3], [0.5, 0.0, 0.0]], 0.1, 1.0, "x").is_err());
        assert!(DipoleLattice::new(vec![[0.0; 3]], vec![], 0.0, "x").is_err());
        let cloud = random_cloud(12, [0.0; 3], 2.0, 0.6, 0.01, 7, "c").unwrap();
        assert!(cloud.min_distance().unwrap() >= 0.6);
        assert_eq!(cloud, random_cloud(12, [0.0; 3], 2.0, 0.6, 0.01, 7, "c").unwrap());
        assert!(random_cloud(500, [0.0; 3], 1.0, 0.9, 0.01, 7, "c").is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let l = random_cloud(5, [1.0, 2.0, 3.0], 1.5, 0.3, 0.02, 3, "c").unwrap();
        let back = DipoleLattice::from_csv(&l.to_csv(), l.cutoff, "c").unwrap();
        assert_eq!(back, l);
        assert!(DipoleLattice::<f64>::from_csv("x,y\n", 0.0, "c").is_err());
    }

    #[test]
    fn spectral_free_energy_values() {
        let l = cubic_slab([4, 4, 4], 1.0, 0.0, [0.0; 3], "zero").unwrap();
        assert_eq!(free_energy_spectral(&l, 0.5).unwrap(), 0.0);
        let l = cubic_slab([4, 4, 4], 1.0, 0.05, [0.0; 3], "cube").unwrap();
        let f = free_energy_spectral(&l, 0.5).unwrap();
        assert!(close(f, -0.007766730231931955, 1e-10));
        assert!(f < 0.0);
    }

    #[test]
    fn two_site_block_reduction() {
        let (a, b) = pair(1.3, 0.2);
        let joint = a.union(&b).unwrap();
        let dense = free_energy_spectral(&joint, 0.4).unwrap();
        let k = dyadic_kernel(0.4_f64, [0.0, 0.0, 1.3]).unwrap();
        // det(I - M) = det(I - B²) with B = a₀ D₀ diagonal here.
        let reduced: f64 = (0..3).map(|i| 0.5 * (1.0 - (0.2 * k[i][i]).powi(2)).ln()).sum();
        assert!((dense - reduced).abs() < 1e-12 * reduced.abs());
    }

    #[test]
    fn series_matches_spectral() {
        let (a, b) = pair(1.0, 0.1);
        let joint = a.union(&b).unwrap();
        let s = free_energy_series(&joint, 0.7, 2).unwrap();
        assert!(close(s.value, -0.00016515569193273358, 1e-12));
        // Strong coupling: ρ near 0.3.
        let l = cubic_slab([3, 3, 2], 1.0_f64, 0.6, [0.0; 3], "dense").unwrap();
        let exact = free_energy_spectral(&l, 0.2).unwrap();
        for n in [2usize, 5, 10, 40] {
            let s = free_energy_series(&l, 0.2, n).unwrap();
            // Below the truncation bound lies double-precision rounding of both sums.
            let rounding = 54.0 * f64::EPSILON * exact.abs();
            assert!((s.value - exact).abs() <= s.tail_bound + rounding, "n = {}", n);
        }
        let s = free_energy_series(&l, 0.2, 40).unwrap();
        assert!(s.spectral_radius > 0.2 && s.spectral_radius < 0.5, "{}", s.spectral_radius);
        assert!((s.value - exact).abs() < 1e-10 * exact.abs());
    }

    #[test]
    fn divergent_coupling_is_reported() {
        let l = cubic_slab([3, 3, 3], 1.0, 5.0, [0.0; 3], "hot").unwrap();
        assert!(matches!(free_energy_spectral(&l, 0.0), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn definiteness_gate_matches_spectral_radius() {
        let mut seen = [false; 2];
        for k in 0..60 {
            let alpha0 = 0.2 + 0.05 * k as f64;
            let l = cubic_slab([3, 3, 2], 1.0, alpha0, [0.0; 3], "g").unwrap();
            let rho = build_coupling(&l, 0.1).unwrap().spectral_radius;
            if (rho - 1.0).abs() > 1e-9 {
                assert_eq!(free_energy_spectral(&l, 0.1).is_ok(), rho < 1.0, "alpha0 = {}, rho = {}", alpha0, rho);
                seen[usize::from(rho < 1.0)] = true;
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn splitting_identity() {
        let a = cubic_slab([3, 3, 1], 1.0, 0.05, [0.0; 3], "A").unwrap();
        let b = cubic_slab([3, 3, 1], 1.0, 0.05, [0.0, 0.0, 5.0], "B").unwrap();
        let s = split_free_energy(&a, &b, 0.5).unwrap();
        assert!(close(s.f_ab, -4.5816602539877974e-08, 1e-8));
        assert!(s.residual() <= 1e-12 * s.f_total.abs());
        for seed in 0..4 {
            let a = random_cloud(8, [0.0; 3], 1.5_f64, 0.5, 0.1, seed, "A").unwrap();
            let b = random_cloud(8, [0.0, 0.0, 4.0], 1.5, 0.5, 0.1, seed + 100, "B").unwrap();
            let s = split_free_energy(&a, &b, 0.3).unwrap();
            assert!(s.residual() <= 1e-12 * s.f_total.abs());
        }
        let zero = cubic_slab([2, 1, 1], 1.0, 0.0, [0.0; 3], "A").unwrap();
        let zb = zero.translated([0.0, 0.0, 3.0]);
        let s = split_free_energy(&zero, &zb, 1.0).unwrap();
        assert_eq!((s.f_a, s.f_b, s.f_ab), (0.0, 0.0, 0.0));
        assert!(split_free_energy(&a, &a, 1.0).is_err());
    }

    #[test]
    fn rigid_motion_invariance() {
        let a = random_cloud(6, [0.0; 3], 1.2, 0.5, 0.1, 1, "A").unwrap();
        let b = random_cloud(6, [0.0, 0.0, 3.5], 1.2, 0.5, 0.1, 2, "B").unwrap();
        let (c, s) = (0.6_f64, 0.8_f64);
        let rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let shift = [1.0, -2.0, 0.5];
        let s0 = split_free_energy(&a, &b, 0.4).unwrap();
        let s1 = split_free_energy(&a.transformed(&rot, shift), &b.transformed(&rot, shift), 0.4).unwrap();
        for (x, y) in [(s0.f_a, s1.f_a), (s0.f_b, s1.f_b), (s0.f_ab, s1.f_ab)] {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn two_dipole_energies() {
        let spec = OracleSpec::default().quad.with_rel_tol(1e-11);
        let spec = OracleSpec { quad: spec, ..OracleSpec::default() };
        for (d, want) in [(1.0, -1.1590401211839151e-06), (2.0, -9.054996313336062e-09), (5.0, -1.4835705839765325e-11)] {
            let e = two_dipole_energy(0.01, d, 0.0, &spec).unwrap();
            assert!(close(e, want, 1e-8), "d = {}: {} vs {}", d, e, want);
            assert!(close(e, casimir_polder_energy(0.01, d), 1e-3));
        }
        let e1 = two_dipole_energy(0.01, 2.0, 0.0, &spec).unwrap();
        let e2 = two_dipole_energy(0.005, 2.0, 0.0, &spec).unwrap();
        assert!(close(e1 / e2, 4.0, 1e-3));
        assert_eq!(two_dipole_energy(0.0, 2.0, 0.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn low_temperature_approaches_integral() {
        let spec = OracleSpec::default();
        let zero = two_dipole_energy(0.01, 1.0, 0.0, &spec).unwrap();
        let cold = two_dipole_energy(0.01, 1.0, 0.01, &spec).unwrap();
        assert!(close(cold, zero, 1e-2));
    }

    #[test]
    fn power_law_regimes() {
        let spec = OracleSpec::default();
        let ds: Vec<f64> = (0..6).map(|k| 3.0 * 10f64.powf(k as f64 / 5.0)).collect();
        let fit = casimir_polder_scaling(0.01, &ds, &spec).unwrap();
        assert!((fit.slope + 7.0).abs() < 0.05, "{}", fit.slope);
        // Hot: the static term dominates and goes as d⁻⁶.
        let hot: Vec<f64> = ds.iter().map(|&d| two_dipole_energy(0.01, d, 20.0, &spec).unwrap()).collect();
        let slope = (hot[5].abs().ln() - hot[0].abs().ln()) / (ds[5].ln() - ds[0].ln());
        assert!((slope + 6.0).abs() < 0.01, "{}", slope);
    }

    #[test]
    fn force_is_antisymmetric() {
        let spec = OracleSpec::default();
        let (a, b) = pair(2.0, 0.05);
        let on_b = force_between(&a, &b, [0.0, 0.0, 1.0], 1e-3, 0.0, &spec).unwrap();
        let on_a = force_between(&b, &a, [0.0, 0.0, 1.0], 1e-3, 0.0, &spec).unwrap();
        assert!(on_b < 0.0);
        assert!((on_a + on_b).abs() < 1e-10 * on_b.abs());
        let (a, b) = pair(2.0, 0.0);
        assert_eq!(force_between(&a, &b, [0.0, 0.0, 1.0], 1e-3, 0.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn depolarization_limits() {
        let spec = QuadratureSpec::<f64>::default().with_rel_tol(1e-12);
        let m = depolarization_integral(1e-3, 1.0, &spec).unwrap();
        for i in 0..3 {
            assert!((m[i][i] + 1.0 / 3.0).abs() < 1e-6);
            for j in 0..3 {
                if i != j {
                    assert_eq!(m[i][j], 0.0);
                }
            }
        }
        let m = depolarization_integral(1.0, 1.0, &spec).unwrap();
        let want = -1.0 / 3.0 - 2.0 / 3.0 * (1.0 - 2.0 * (-1.0f64).exp());
        assert!((m[0][0] - want).abs() < 1e-12);
    }

    #[test]
    fn single_precision_kernel() {
        let k = dyadic_kernel(1.0_f32, [1.0, 0.0, 0.0]).unwrap();
        assert!((k[0][0] - 0.117_099_66).abs() < 1e-6);
    }
}
