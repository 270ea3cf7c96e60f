//! Reading grids, materials, lattices and numerical settings from config sections.

use std::path::Path;

use casimir_core::dipole_oracle::{cubic_slab, random_cloud, DipoleLattice};
use casimir_core::planar::{PlanarSpec, ZeroModePolicy};
use casimir_core::{Medium, PolarizabilityModel};

use crate::config::{ConfigError, ConfigResult, Section};

/// `key = v1, v2, …` or `key_min`, `key_max`, `key_count` and optional `key_spacing`.
pub fn read_grid(s: &Section, key: &str) -> ConfigResult<Vec<f64>> {
    let (kmin, kmax, kcount, kspacing) =
        (format!("{key}_min"), format!("{key}_max"), format!("{key}_count"), format!("{key}_spacing"));
    if s.has(key) {
        for k in [&kmin, &kmax, &kcount, &kspacing] {
            if s.has(k) {
                return Err(s.invalid(k, &format!("cannot be combined with an explicit `{}` list", key)));
            }
        }
        let v = s.get_list(key)?.expect("checked present");
        return Ok(v);
    }
    let lo = s.require_f64(&kmin)?;
    let hi = s.require_f64(&kmax)?;
    let n = s.get_usize(&kcount)?.ok_or_else(|| s.invalid(&kcount, "is required with a range"))?;
    if n == 0 {
        return Err(s.invalid(&kcount, "must be at least 1"));
    }
    if hi < lo {
        return Err(s.invalid(&kmax, &format!("must not be below {} = {}", kmin, lo)));
    }
    let spacing = s.get_str(&kspacing).unwrap_or("linear");
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    match spacing {
        "linear" => Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * step(i) }).collect()),
        "log" => {
            if !(lo > 0.0) {
                return Err(s.invalid(&kmin, "must be positive for log spacing"));
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..n).map(|i| if i == n - 1 { hi } else { (a + (b - a) * step(i)).exp() }).collect())
        }
        other => Err(s.invalid(&kspacing, &format!("must be `linear` or `log`, found `{}`", other))),
    }
}

/// Checks every grid value against `ok`, anchoring the error at whichever key defined the grid.
pub fn check_grid(s: &Section, key: &str, values: &[f64], rule: &str, ok: impl Fn(f64) -> bool) -> ConfigResult<()> {
    if let Some(v) = values.iter().find(|v| !ok(**v)) {
        let anchor = if s.has(key) { key.to_string() } else { format!("{key}_min") };
        return Err(s.invalid(&anchor, &format!("values must be {}, found {}", rule, v)));
    }
    Ok(())
}

fn core_err(s: &Section, key: &str, e: casimir_core::Error) -> ConfigError {
    s.invalid(key, &format!("is invalid: {}", e))
}

/// `model = …` with its parameters.
pub fn read_medium(s: &Section) -> ConfigResult<Medium<f64>> {
    let model = s.require_str("model")?;
    let m = match model {
        "perfect_conductor" => return Ok(Medium::PerfectConductor),
        "vacuum" => PolarizabilityModel::vacuum(),
        "plasma" => {
            PolarizabilityModel::plasma(s.require_f64("u_p")?).map_err(|e| core_err(s, "u_p", e))?
        }
        "oscillator" => PolarizabilityModel::oscillator(s.require_f64("alpha_s")?, s.require_f64("u0")?)
            .map_err(|e| core_err(s, "alpha_s", e))?,
        "constant_epsilon" => PolarizabilityModel::constant_epsilon(s.require_f64("epsilon")?)
            .map_err(|e| core_err(s, "epsilon", e))?,
        "tabulated" => {
            let raw = s.require_str("samples")?;
            let mut samples = Vec::new();
            for item in raw.split(',') {
                let parsed = item.split_once(':').and_then(|(u, a)| {
                    Some((u.trim().parse::<f64>().ok()?, a.trim().parse::<f64>().ok()?))
                });
                match parsed {
                    Some(p) => samples.push(p),
                    None => {
                        return Err(s.invalid("samples", &format!("expects `u:alpha0` pairs; bad item `{}`", item.trim())))
                    }
                }
            }
            PolarizabilityModel::tabulated(samples).map_err(|e| core_err(s, "samples", e))?
        }
        other => {
            return Err(s.invalid(
                "model",
                &format!(
                    "must be one of perfect_conductor, vacuum, plasma, oscillator, constant_epsilon, tabulated; found `{}`",
                    other
                ),
            ))
        }
    };
    Ok(Medium::Model(m))
}

pub fn read_policy(s: &Section) -> ConfigResult<ZeroModePolicy> {
    match s.get_str("policy") {
        None => Ok(ZeroModePolicy::MicroscopicZero),
        Some(p) => ZeroModePolicy::parse(p).ok_or_else(|| {
            s.invalid("policy", &format!("must be microscopic_zero, lifshitz_limit or perfect_conductor; found `{}`", p))
        }),
    }
}

/// Numerical settings shared by all scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub quad_tol: f64,
    pub sum_tol: f64,
    pub l_max: usize,
    pub n_max: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { quad_tol: 1e-9, sum_tol: 1e-10, l_max: 10, n_max: 40 }
    }
}

impl Numerics {
    pub fn read(s: Option<&Section>) -> ConfigResult<Self> {
        let mut n = Self::default();
        let Some(s) = s else { return Ok(n) };
        let tol = |v: f64| v > 0.0 && v < 1.0;
        if let Some(v) = s.get_checked("quad_tol", "in (0, 1)", tol)? {
            n.quad_tol = v;
        }
        if let Some(v) = s.get_checked("sum_tol", "in (0, 1)", tol)? {
            n.sum_tol = v;
        }
        if let Some(v) = s.get_usize("l_max")? {
            if v == 0 {
                return Err(s.invalid("l_max", "must be at least 1"));
            }
            n.l_max = v;
        }
        if let Some(v) = s.get_usize("n_max")? {
            n.n_max = v;
        }
        Ok(n)
    }

    pub fn planar(&self) -> PlanarSpec<f64> {
        PlanarSpec::with_tolerances(self.quad_tol, self.sum_tol)
    }
}

fn read_vec3(s: &Section, key: &str, default: Option<[f64; 3]>) -> ConfigResult<[f64; 3]> {
    match s.get_list(key)? {
        Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        Some(v) => Err(s.invalid(key, &format!("needs 3 components, found {}", v.len()))),
        None => default.ok_or_else(|| s.invalid(key, "is required")),
    }
}

/// `kind = cubic_slab | random_cloud | csv`.
pub fn read_lattice(s: &Section, label: &str, base_dir: &Path) -> ConfigResult<DipoleLattice<f64>> {
    let kind = s.require_str("kind")?;
    let non_negative = |v: f64| v >= 0.0;
    let result = match kind {
        "cubic_slab" => {
            let counts = s.get_list("counts")?.ok_or_else(|| s.invalid("counts", "is required"))?;
            if counts.len() != 3 || counts.iter().any(|c| *c < 1.0 || c.fract() != 0.0) {
                return Err(s.invalid("counts", "needs three positive integers"));
            }
            let spacing = s.require_positive("spacing")?;
            let alpha0 = s.require_checked("alpha0", "non-negative", non_negative)?;
            let origin = read_vec3(s, "origin", Some([0.0; 3]))?;
            cubic_slab([counts[0] as usize, counts[1] as usize, counts[2] as usize], spacing, alpha0, origin, label)
                .map_err(|e| core_err(s, "kind", e))
        }
        "random_cloud" => {
            let n = s.get_usize("n")?.ok_or_else(|| s.invalid("n", "is required"))?;
            let center = read_vec3(s, "center", Some([0.0; 3]))?;
            let radius = s.require_positive("radius")?;
            let min_distance = s.require_positive("min_distance")?;
            let alpha0 = s.require_checked("alpha0", "non-negative", non_negative)?;
            let seed = s.get_u64("seed")?.unwrap_or(0);
            random_cloud(n, center, radius, min_distance, alpha0, seed, label).map_err(|e| core_err(s, "n", e))
        }
        "csv" => {
            let file = s.require_str("file")?;
            let cutoff = s.get_checked("cutoff", "non-negative", non_negative)?.unwrap_or(0.0);
            let path = base_dir.join(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| s.invalid("file", &format!("cannot be read ({}): {}", path.display(), e)))?;
            DipoleLattice::from_csv(&text, cutoff, label).map_err(|e| core_err(s, "file", e))
        }
        other => {
            return Err(s.invalid("kind", &format!("must be cubic_slab, random_cloud or csv; found `{}`", other)))
        }
    }?;
    if result.is_empty() {
        return Err(s.invalid("kind", "produced an empty lattice"));
    }
    Ok(result)
}

pub fn read_axis(s: &Section) -> ConfigResult<[f64; 3]> {
    let axis = read_vec3(s, "axis", Some([0.0, 0.0, 1.0]))?;
    if axis.iter().all(|c| *c == 0.0) {
        return Err(s.invalid("axis", "must be a nonzero vector"));
    }
    Ok(axis)
}
