//! One runner per scenario kind; each turns a parsed config into a table.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{Map, Value};

use casimir_core::dipole_oracle::{
    build_coupling, force_between, free_energy_series, free_energy_spectral, split_free_energy, total_free_energy,
    DipoleLattice, LatticeTotal, OracleSpec, PairInteraction,
};
use casimir_core::numerics::{QuadratureSpec, SumSpec};
use casimir_core::planar::{
    free_energy_per_area, medium_reflection, pressure, FrequencyMomentumPoint, PlanarCavity, PlanarSpec,
    ZeroModePolicy,
};
use casimir_core::spherical::{mode_table, BallChannel};
use casimir_core::validation::run_suite;
use casimir_core::{DielectricResponse, Medium};

use crate::config::{Config, ConfigError};
use crate::inputs::{check_grid, read_axis, read_grid, read_lattice, read_medium, read_policy, Numerics};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Pressure,
    TemperatureSweep,
    ReflectionTable,
    SphereModes,
    OracleRun,
    Validate,
}

impl ScenarioKind {
    pub const ALL: [Self; 6] = [
        Self::Pressure,
        Self::TemperatureSweep,
        Self::ReflectionTable,
        Self::SphereModes,
        Self::OracleRun,
        Self::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pressure => "pressure",
            Self::TemperatureSweep => "temperature_sweep",
            Self::ReflectionTable => "reflection_table",
            Self::SphereModes => "sphere_modes",
            Self::OracleRun => "oracle_run",
            Self::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric { context: String, error: casimir_core::Error },
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

fn numeric(context: impl FnOnce() -> String) -> impl FnOnce(casimir_core::Error) -> RunError {
    move |error| RunError::Numeric { context: context(), error }
}

type RunResult<T> = Result<T, RunError>;

#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    /// Descriptive names of the formulas evaluated.
    pub formulas: Vec<&'static str>,
    pub tolerances: Map<String, Value>,
    pub error_estimates: Map<String, Value>,
    /// Additional files to write, relative to the config directory.
    pub extra_files: Vec<(PathBuf, String)>,
    /// Whether every check passed; only the validation suite can fail this way.
    pub passed: bool,
}

impl Outcome {
    fn new(table: Table, formulas: Vec<&'static str>) -> Self {
        Self {
            table,
            formulas,
            tolerances: Map::new(),
            error_estimates: Map::new(),
            extra_files: Vec::new(),
            passed: true,
        }
    }
}

fn json(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn run(kind: ScenarioKind, config: &Config, base_dir: &Path) -> RunResult<Outcome> {
    let outcome = match kind {
        ScenarioKind::Pressure => run_pressure(config)?,
        ScenarioKind::TemperatureSweep => run_sweep(config)?,
        ScenarioKind::ReflectionTable => run_reflection(config)?,
        ScenarioKind::SphereModes => run_sphere(config)?,
        ScenarioKind::OracleRun => run_oracle(config, base_dir)?,
        ScenarioKind::Validate => run_validate(),
    };
    config.finish()?;
    Ok(outcome)
}

const PLANAR_COLUMNS: [&str; 8] = [
    "gap",
    "temperature",
    "pressure",
    "pressure_error",
    "pressure_times_gap4",
    "free_energy",
    "free_energy_error",
    "matsubara_terms",
];

fn planar_formulas(any_thermal: bool) -> Vec<&'static str> {
    let mut f = vec![
        "Lifshitz pressure between half-spaces as an imaginary-frequency momentum integral",
        "Free energy per area as the logarithm of the round-trip loop factor",
        "Fresnel reflection coefficients continued to imaginary frequency",
        "Lorentz-Lorenz relation between polarizability density and permittivity",
    ];
    if any_thermal {
        f.push("Matsubara sum over imaginary frequencies with half weight on the static term");
        f.push("Static TE reflection selected by the zero-mode policy");
    }
    f
}

fn read_plates(config: &Config) -> RunResult<(Medium<f64>, Medium<f64>)> {
    if let Some(both) = config.section("plates") {
        for side in ["left", "right"] {
            if let Some(s) = config.section(side) {
                return Err(ConfigError::at(s.line, format!("[{}] cannot be combined with [plates]", side)).into());
            }
        }
        let m = read_medium(both)?;
        return Ok((m.clone(), m));
    }
    if !config.has_section("left") && !config.has_section("right") {
        return Err(ConfigError::global("materials need either [plates] or both [left] and [right]").into());
    }
    let left = read_medium(config.require_section("left")?)?;
    let right = read_medium(config.require_section("right")?)?;
    Ok((left, right))
}

fn planar_rows(
    points: &[(f64, f64)],
    left: &Medium<f64>,
    right: &Medium<f64>,
    policy: ZeroModePolicy,
    spec: &PlanarSpec<f64>,
) -> RunResult<Outcome> {
    let rows: Vec<RunResult<Vec<Cell>>> = points
        .par_iter()
        .map(|&(gap, t)| {
            let at = || format!("planar cavity at gap = {}, temperature = {}", gap, t);
            let cav = PlanarCavity::new(gap, left.clone(), right.clone(), t, policy).map_err(numeric(at))?;
            let p = pressure(&cav, spec).map_err(numeric(at))?;
            let f = free_energy_per_area(&cav, spec).map_err(numeric(at))?;
            Ok(vec![
                gap.into(),
                t.into(),
                p.value.into(),
                p.error.into(),
                (p.value * gap.powi(4)).into(),
                f.value.into(),
                f.error.into(),
                p.terms.into(),
            ])
        })
        .collect();
    let mut table = Table::new(PLANAR_COLUMNS.to_vec());
    let mut worst_p = 0.0_f64;
    let mut worst_f = 0.0_f64;
    for row in rows {
        let row = row?;
        if let (Cell::Real(p), Cell::Real(pe), Cell::Real(f), Cell::Real(fe)) = (&row[2], &row[3], &row[5], &row[6]) {
            worst_p = worst_p.max(pe / p.abs());
            worst_f = worst_f.max(fe / f.abs());
        }
        table.push(row);
    }
    let mut out = Outcome::new(table, planar_formulas(points.iter().any(|p| p.1 > 0.0)));
    out.tolerances.insert("quad_tol".into(), json(spec.quad.rel_tol));
    out.tolerances.insert("sum_tol".into(), json(spec.sum.rel_tol));
    out.error_estimates.insert("max_relative_pressure_error".into(), json(worst_p));
    out.error_estimates.insert("max_relative_free_energy_error".into(), json(worst_f));
    out.error_estimates.insert("zero_mode_policy".into(), Value::from(policy.name()));
    Ok(out)
}

fn run_pressure(config: &Config) -> RunResult<Outcome> {
    let cav = config.require_section("cavity")?;
    let gaps = read_grid(cav, "gap")?;
    check_grid(cav, "gap", &gaps, "positive", |g| g > 0.0)?;
    let t = cav.get_checked("temperature", "non-negative", |t| t >= 0.0)?.unwrap_or(0.0);
    let policy = read_policy(cav)?;
    let (left, right) = read_plates(config)?;
    let numerics = Numerics::read(config.section("numerics"))?;
    let points: Vec<(f64, f64)> = gaps.iter().map(|&g| (g, t)).collect();
    planar_rows(&points, &left, &right, policy, &numerics.planar())
}

fn run_sweep(config: &Config) -> RunResult<Outcome> {
    let cav = config.require_section("cavity")?;
    let sweep = config.require_section("sweep")?;
    let variable = sweep.get_str("variable").unwrap_or("temperature");
    let policy = read_policy(cav)?;
    let points: Vec<(f64, f64)> = match variable {
        "temperature" => {
            let gap = cav.require_positive("gap")?;
            let ts = read_grid(sweep, "temperature")?;
            check_grid(sweep, "temperature", &ts, "non-negative", |t| t >= 0.0)?;
            ts.into_iter().map(|t| (gap, t)).collect()
        }
        "gap" => {
            let t = cav.get_checked("temperature", "non-negative", |t| t >= 0.0)?.unwrap_or(0.0);
            let gaps = read_grid(sweep, "gap")?;
            check_grid(sweep, "gap", &gaps, "positive", |g| g > 0.0)?;
            gaps.into_iter().map(|g| (g, t)).collect()
        }
        other => {
            return Err(sweep.invalid("variable", &format!("must be `temperature` or `gap`, found `{}`", other)).into())
        }
    };
    let (left, right) = read_plates(config)?;
    let numerics = Numerics::read(config.section("numerics"))?;
    let mut out = planar_rows(&points, &left, &right, policy, &numerics.planar())?;
    out.error_estimates.insert("sweep_variable".into(), Value::from(variable));
    Ok(out)
}

fn run_reflection(config: &Config) -> RunResult<Outcome> {
    let ms = config.require_section("medium")?;
    let medium = read_medium(ms)?;
    let policy = read_policy(ms)?;
    let grid = config.require_section("grid")?;
    let us = read_grid(grid, "u")?;
    check_grid(grid, "u", &us, "non-negative", |u| u >= 0.0)?;
    let ps = read_grid(grid, "p")?;
    check_grid(grid, "p", &ps, "non-negative", |p| p >= 0.0)?;
    if us.contains(&0.0) && ps.contains(&0.0) {
        return Err(grid.invalid("p", "must be positive where u = 0; the point u = p = 0 is undefined").into());
    }
    Numerics::read(config.section("numerics"))?;
    let mut table = Table::new(vec!["u", "p", "epsilon", "r_te", "r_tm"]);
    for &u in &us {
        let eps = medium.epsilon(u).map_err(numeric(|| format!("permittivity at u = {}", u)))?;
        let eps = match eps {
            DielectricResponse::Finite { epsilon, .. } => epsilon,
            DielectricResponse::Metallic => f64::INFINITY,
        };
        for &p in &ps {
            let at = || format!("reflection at u = {}, p = {}", u, p);
            let pt = FrequencyMomentumPoint::new(u, p).map_err(numeric(at))?;
            let r = medium_reflection(pt, &medium, policy).map_err(numeric(at))?;
            table.push(vec![u.into(), p.into(), eps.into(), r.r_te.into(), r.r_tm.into()]);
        }
    }
    let mut out = Outcome::new(
        table,
        vec![
            "Fresnel reflection coefficients continued to imaginary frequency",
            "Lorentz-Lorenz relation between polarizability density and permittivity",
            "Static TE reflection selected by the zero-mode policy",
        ],
    );
    out.error_estimates.insert("zero_mode_policy".into(), Value::from(policy.name()));
    out.error_estimates.insert("method".into(), Value::from("closed form"));
    Ok(out)
}

fn run_sphere(config: &Config) -> RunResult<Outcome> {
    let ball = config.require_section("ball")?;
    let radius = ball.require_positive("radius")?;
    let medium = read_medium(ball)?;
    if medium == Medium::PerfectConductor {
        return Err(ball.invalid("model", "must have a finite permittivity for the sphere scenario").into());
    }
    let grid = config.require_section("grid")?;
    let us = read_grid(grid, "u")?;
    check_grid(grid, "u", &us, "positive", |u| u > 0.0)?;
    let numerics = Numerics::read(config.section("numerics"))?;

    let mut table = Table::new(vec!["u", "x0", "epsilon", "polarization", "l", "alpha2_gamma", "mu"]);
    let mut worst_te_tail = 0.0_f64;
    let mut undetermined = 0usize;
    for &u in &us {
        let at = || format!("sphere channel at u = {}", u);
        let eps = medium.epsilon(u).map_err(numeric(at))?;
        let ch = BallChannel::new(radius, u, eps).map_err(numeric(at))?;
        for lambda in casimir_core::planar::Mode::BOTH {
            let at = || format!("sphere channel at u = {}, polarization {}", u, lambda.name());
            let t = mode_table(lambda, &ch, numerics.l_max).map_err(numeric(at))?;
            let total: f64 = t.rows.iter().map(|r| r.alpha2_gamma.abs()).sum();
            match t.tail_estimate {
                Some(tail) if lambda == casimir_core::planar::Mode::TE && total > 0.0 => {
                    worst_te_tail = worst_te_tail.max(tail / total)
                }
                Some(_) => {}
                None => undetermined += 1,
            }
            for r in t.rows {
                table.push(vec![
                    u.into(),
                    ch.x0().into(),
                    ch.epsilon.into(),
                    lambda.name().into(),
                    r.mode.l.into(),
                    r.alpha2_gamma.into(),
                    r.mu.into(),
                ]);
            }
        }
    }
    let mut out = Outcome::new(
        table,
        vec![
            "Boundary bilinear forms of modified spherical Bessel functions",
            "Ball loop quantity alpha^2 gamma from the interior and exterior bilinear forms",
            "Ball scattering coefficient mu from the mixed bilinear form",
            "Lorentz-Lorenz relation between polarizability density and permittivity",
        ],
    );
    out.tolerances.insert("l_max".into(), Value::from(numerics.l_max));
    out.error_estimates.insert("max_relative_te_tail".into(), json(worst_te_tail));
    out.error_estimates.insert("channels_without_tail_estimate".into(), Value::from(undetermined));
    Ok(out)
}

fn run_oracle(config: &Config, base_dir: &Path) -> RunResult<Outcome> {
    let mut extra = Vec::new();
    let mut load = |name: &str, label: &str| -> RunResult<Option<DipoleLattice<f64>>> {
        let Some(s) = config.section(name) else { return Ok(None) };
        let l = read_lattice(s, label, base_dir)?;
        if let Some(path) = s.get_str("export") {
            extra.push((PathBuf::from(path), l.to_csv()));
        }
        Ok(Some(l))
    };
    let a = load("lattice_a", "A")?.ok_or_else(|| ConfigError::global("missing section [lattice_a]"))?;
    let b = load("lattice_b", "B")?;
    let os = config.require_section("oracle")?;
    let numerics = Numerics::read(config.section("numerics"))?;
    let spec = OracleSpec {
        quad: QuadratureSpec::default().with_rel_tol(numerics.quad_tol),
        sum: SumSpec::default().with_rel_tol(numerics.sum_tol),
        batch: rayon::current_num_threads().max(1),
    };
    if let Some(b) = &b {
        if a.distance_to(b).map_or(true, |d| d <= 0.0) {
            return Err(ConfigError::global("[lattice_a] and [lattice_b] overlap").into());
        }
    }
    let quantity = os.require_str("quantity")?;
    let mut out = match quantity {
        "spectral" => {
            let us = read_grid(os, "u")?;
            check_grid(os, "u", &us, "non-negative", |u| u >= 0.0)?;
            oracle_spectral(&a, b.as_ref(), &us, numerics.n_max)?
        }
        "free_energy" => {
            let t = os.get_checked("temperature", "non-negative", |t| t >= 0.0)?.unwrap_or(0.0);
            let at = || format!("oracle free energy at temperature {}", t);
            let est = match &b {
                Some(b) => total_free_energy(&PairInteraction { a: &a, b }, t, &spec),
                None => total_free_energy(&LatticeTotal(&a), t, &spec),
            }
            .map_err(numeric(at))?;
            let mut table = Table::new(vec!["temperature", "free_energy", "error", "matsubara_terms"]);
            table.push(vec![t.into(), est.value.into(), est.error.into(), est.terms.into()]);
            let mut out = Outcome::new(table, oracle_formulas(b.is_some(), true));
            out.error_estimates.insert("free_energy_error".into(), json(est.error));
            out
        }
        "force" => {
            let Some(b) = &b else {
                return Err(os.invalid("quantity", "`force` needs both [lattice_a] and [lattice_b]").into());
            };
            let t = os.get_checked("temperature", "non-negative", |t| t >= 0.0)?.unwrap_or(0.0);
            let axis = read_axis(os)?;
            let h = os.require_positive("step")?;
            let f = force_between(&a, b, axis, h, t, &spec)
                .map_err(numeric(|| format!("oracle force at temperature {}", t)))?;
            let mut table = Table::new(vec!["temperature", "step", "force"]);
            table.push(vec![t.into(), h.into(), f.into()]);
            let mut out = Outcome::new(table, oracle_formulas(true, true));
            out.formulas.push("Central difference of the interaction free energy in the separation");
            out.tolerances.insert("step".into(), json(h));
            out
        }
        other => {
            return Err(os
                .invalid("quantity", &format!("must be spectral, free_energy or force; found `{}`", other))
                .into())
        }
    };
    out.tolerances.insert("quad_tol".into(), json(numerics.quad_tol));
    out.tolerances.insert("sum_tol".into(), json(numerics.sum_tol));
    out.tolerances.insert("n_max".into(), Value::from(numerics.n_max));
    out.extra_files = extra;
    Ok(out)
}

fn oracle_formulas(pair: bool, integrated: bool) -> Vec<&'static str> {
    let mut f = vec![
        "Retarded dipole kernel on the imaginary frequency axis",
        "Free energy spectral density as one half the log-determinant of I - M",
    ];
    if pair {
        f.push("Interaction free energy from the Schur complement of the two-lattice coupling");
    }
    if integrated {
        f.push("Matsubara sum or zero-temperature frequency integral of the spectral density");
    }
    f
}

fn oracle_spectral(
    a: &DipoleLattice<f64>,
    b: Option<&DipoleLattice<f64>>,
    us: &[f64],
    n_max: usize,
) -> RunResult<Outcome> {
    let mut worst = 0.0_f64;
    let table = match b {
        None => {
            let mut table =
                Table::new(vec!["u", "spectral_radius", "free_energy", "series", "series_tail_bound"]);
            for &u in us {
                let at = || format!("lattice spectral density at u = {}", u);
                let f = free_energy_spectral(a, u).map_err(numeric(at))?;
                let s = free_energy_series(a, u, n_max).map_err(numeric(at))?;
                worst = worst.max(s.tail_bound);
                table.push(vec![u.into(), s.spectral_radius.into(), f.into(), s.value.into(), s.tail_bound.into()]);
            }
            table
        }
        Some(b) => {
            let joint = a.union(b).map_err(numeric(|| "combining lattices".into()))?;
            let mut table = Table::new(vec!["u", "spectral_radius", "f_a", "f_b", "f_ab", "f_total", "split_residual"]);
            for &u in us {
                let at = || format!("split spectral density at u = {}", u);
                let rho = build_coupling(&joint, u).map_err(numeric(at))?.spectral_radius;
                let s = split_free_energy(a, b, u).map_err(numeric(at))?;
                worst = worst.max(s.residual());
                table.push(vec![
                    u.into(),
                    rho.into(),
                    s.f_a.into(),
                    s.f_b.into(),
                    s.f_ab.into(),
                    s.f_total.into(),
                    s.residual().into(),
                ]);
            }
            table
        }
    };
    let mut out = Outcome::new(table, oracle_formulas(b.is_some(), false));
    if b.is_none() {
        out.formulas.push("Truncated trace series of the log-determinant with geometric tail bound");
        out.error_estimates.insert("max_series_tail_bound".into(), json(worst));
    } else {
        out.error_estimates.insert("max_split_residual".into(), json(worst));
    }
    Ok(out)
}

fn run_validate() -> Outcome {
    let checks = run_suite();
    let mut table = Table::new(vec!["check", "measured", "tolerance", "status", "failure"]);
    let mut passed = true;
    for c in &checks {
        passed &= c.passed;
        table.push(vec![
            c.name.into(),
            c.measured.into(),
            c.tolerance.into(),
            (if c.passed { "PASS" } else { "FAIL" }).into(),
            c.failure.as_deref().unwrap_or("").into(),
        ]);
    }
    let mut out = Outcome::new(table, vec!["Self-consistency checks of every computational module"]);
    out.error_estimates.insert("checks_failed".into(), Value::from(checks.iter().filter(|c| !c.passed).count()));
    out.passed = passed;
    out
}
