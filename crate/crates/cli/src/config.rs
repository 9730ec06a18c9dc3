//! TOML scenario configuration, flattened to `section.key` paths.

use std::collections::BTreeMap;
use std::path::Path;

use qlbe_core::diffusion::DiffusionQuadrature;
use qlbe_core::gas::constant_amplitude_cross_section;
use qlbe_core::kinematics::intercollision_time;
use qlbe_core::units::ReportConversions;
use qlbe_core::{
    AmplitudeModel, Complex64, GasComponent, GasMixture, GeneratorConfig, Masses, MomentumGrid, ScatteringAmplitude, UnitSystem,
};
use toml::Value;

use crate::format::fmt_f64;

/// Rejected configuration, naming the offending key path.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config is not valid TOML: {0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Key { key: String, message: String },
}

fn key_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        key: key.to_string(),
        message: message.into(),
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "masses.particle",
    "masses.molecule",
    "gas.beta",
    "gas.density",
    "amplitude.model",
    "amplitude.f0",
    "amplitude.width",
    "amplitude.sigma",
    "collision.tau",
    "collision.derive_tau",
    "collision.coupling",
    "grid.n",
    "grid.dp",
    "grid.shifts",
    "quadrature.k_order",
    "quadrature.radial_order",
    "quadrature.perp_order",
    "quadrature.tol",
    "quadrature.window_periods",
    "quadrature.nodes_per_period",
    "evolution.dt",
    "evolution.n_steps",
    "evolution.record_every",
    "evolution.positivity_tol",
    "evolution.edge_population_tol",
    "evolution.include_hamiltonian",
    "initial.kind",
    "initial.center",
    "initial.width",
    "decohere.ladder",
    "decohere.pair",
    "units.energy",
    "units.time",
    "units.length",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    /// Pure Gaussian wave packet.
    Gaussian,
    /// Diagonal state with Gaussian populations.
    Diagonal,
    /// Maximally mixed state.
    Mixed,
    /// Equal superposition of the two `decohere.pair` grid points.
    Superposition,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub masses: Masses,
    pub gas: GasMixture,
    pub amplitude: ScatteringAmplitude,
    pub tau: f64,
    pub coupling: Option<f64>,
    pub grid: MomentumGrid,
    pub shifts: Vec<i64>,
    pub k_order: usize,
    pub diffusion: DiffusionQuadrature,
    pub dt: Option<f64>,
    pub n_steps: usize,
    pub record_every: usize,
    pub positivity_tol: f64,
    pub edge_population_tol: f64,
    pub include_hamiltonian: bool,
    pub initial: InitialKind,
    pub initial_center: f64,
    pub initial_width: f64,
    pub ladder: Vec<f64>,
    pub pair: (usize, usize),
    pub units: UnitSystem,
    /// Every key with its resolved value, for artifact headers.
    pub resolved: BTreeMap<String, String>,
}

impl ScenarioConfig {
    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            masses: self.masses,
            gas: self.gas.clone(),
            amplitude: self.amplitude,
            tau: self.tau,
            k_order: self.k_order,
            shifts: self.shifts.clone(),
            include_hamiltonian: self.include_hamiltonian,
            coupling: self.coupling,
        }
    }
}

struct Flat {
    values: BTreeMap<String, Value>,
    resolved: BTreeMap<String, String>,
}

impl Flat {
    fn new(doc: toml::Table) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (section, body) in doc {
            let Value::Table(table) = body else {
                return Err(key_err(&section, "expected a [section] table"));
            };
            for (key, value) in table {
                let path = format!("{section}.{key}");
                if !KNOWN_KEYS.contains(&path.as_str()) {
                    return Err(key_err(&path, "unknown key"));
                }
                values.insert(path, value);
            }
        }
        Ok(Self {
            values,
            resolved: BTreeMap::new(),
        })
    }

    fn note(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = match self.values.get(key) {
            None => return Ok(None),
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(_) => return Err(key_err(key, "expected a number")),
        };
        if !v.is_finite() {
            return Err(key_err(key, format!("must be finite, got {v}")));
        }
        self.note(key, fmt_f64(v));
        Ok(Some(v))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.opt_f64(key)?.unwrap_or(default);
        self.note(key, fmt_f64(v));
        Ok(v)
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return Err(key_err(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let v = match self.values.get(key) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as usize,
            Some(_) => return Err(key_err(key, "expected a non-negative integer")),
        };
        self.note(key, v.to_string());
        Ok(v)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let v = match self.values.get(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => return Err(key_err(key, "expected true or false")),
        };
        self.note(key, v.to_string());
        Ok(v)
    }

    fn str_or(&mut self, key: &str, default: &str) -> Result<String, ConfigError> {
        let v = match self.values.get(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(key_err(key, "expected a string")),
        };
        self.note(key, format!("\"{v}\""));
        Ok(v)
    }

    /// Scalar or array of numbers.
    fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let items: Vec<f64> = match self.values.get(key) {
            None => default.to_vec(),
            Some(Value::Float(x)) => vec![*x],
            Some(Value::Integer(i)) => vec![*i as f64],
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(key_err(key, "expected numbers")),
                })
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(key_err(key, "expected a number or an array of numbers")),
        };
        if items.is_empty() {
            return Err(key_err(key, "must not be empty"));
        }
        if let Some(bad) = items.iter().find(|x| !x.is_finite()) {
            return Err(key_err(key, format!("must be finite, got {bad}")));
        }
        self.note(key, format!("[{}]", items.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")));
        Ok(items)
    }

    fn i64_list(&mut self, key: &str) -> Result<Option<Vec<i64>>, ConfigError> {
        let items: Vec<i64> = match self.values.get(key) {
            None => return Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_integer().ok_or_else(|| key_err(key, "expected integers")))
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(key_err(key, "expected an array of integers")),
        };
        Ok(Some(items))
    }
}

pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let mut flat = Flat::new(doc)?;

    let particle = flat.positive("masses.particle", 1.0)?;
    let molecule = flat.positive("masses.molecule", 1.0)?;
    let masses = Masses::new(particle, molecule).map_err(|e| key_err("masses.particle", e.to_string()))?;

    let betas = flat.f64_list("gas.beta", &[1.0])?;
    if let Some(b) = betas.iter().find(|b| **b <= 0.0) {
        return Err(key_err("gas.beta", format!("must be positive, got {b}")));
    }
    let densities = flat.f64_list("gas.density", &[1.0])?;
    if let Some(n) = densities.iter().find(|n| **n < 0.0) {
        return Err(key_err("gas.density", format!("must be non-negative, got {n}")));
    }
    let densities = match (betas.len(), densities.len()) {
        (a, b) if a == b => densities,
        (a, 1) => vec![densities[0]; a],
        (a, b) => return Err(key_err("gas.density", format!("has {b} entries for {a} temperatures"))),
    };
    let components = betas
        .iter()
        .zip(&densities)
        .map(|(&beta, &n)| GasComponent::new(molecule, beta, n))
        .collect::<qlbe_core::Result<Vec<_>>>()
        .map_err(|e| key_err("gas.beta", e.to_string()))?;
    let gas = GasMixture::new(components).map_err(|e| key_err("gas.beta", e.to_string()))?;

    let model = flat.str_or("amplitude.model", "constant")?;
    let f0 = flat.f64_or("amplitude.f0", 0.5)?;
    let default_sigma = constant_amplitude_cross_section(Complex64::new(f0, 0.0));
    let sigma = flat.positive("amplitude.sigma", default_sigma)?;
    let amplitude_model = match model.as_str() {
        "constant" => {
            if flat.values.contains_key("amplitude.width") {
                return Err(key_err("amplitude.width", "only used by the gaussian model"));
            }
            AmplitudeModel::Constant {
                f0: Complex64::new(f0, 0.0),
            }
        }
        "gaussian" => {
            if !flat.values.contains_key("amplitude.width") {
                return Err(key_err("amplitude.width", "required by the gaussian model"));
            }
            let width = flat.positive("amplitude.width", 1.0)?;
            AmplitudeModel::Gaussian {
                f0: Complex64::new(f0, 0.0),
                width,
            }
        }
        other => return Err(key_err("amplitude.model", format!("expected \"constant\" or \"gaussian\", got \"{other}\""))),
    };
    let amplitude = ScatteringAmplitude::new(amplitude_model, sigma).map_err(|e| key_err("amplitude.sigma", e.to_string()))?;

    let derive = flat.bool_or("collision.derive_tau", false)?;
    let tau = if derive {
        if flat.values.contains_key("collision.tau") {
            return Err(key_err("collision.tau", "cannot be combined with collision.derive_tau = true"));
        }
        let [component] = gas.components() else {
            return Err(key_err("collision.derive_tau", "needs exactly one gas component"));
        };
        if component.density <= 0.0 {
            return Err(key_err("gas.density", "must be positive to derive tau"));
        }
        let tau = intercollision_time(component.beta, component.mass, sigma, component.density)
            .map_err(|e| key_err("collision.derive_tau", e.to_string()))?;
        flat.note("collision.tau", fmt_f64(tau));
        tau
    } else {
        match flat.opt_f64("collision.tau")? {
            Some(t) if t > 0.0 => t,
            Some(t) => return Err(key_err("collision.tau", format!("must be positive, got {t}"))),
            None => return Err(key_err("collision.tau", "missing; set it or collision.derive_tau = true")),
        }
    };
    let coupling = flat.opt_f64("collision.coupling")?;
    if let Some(c) = coupling {
        if c < 0.0 {
            return Err(key_err("collision.coupling", format!("must be non-negative, got {c}")));
        }
    } else {
        flat.note("collision.coupling", format!("{} (2 pi / m*^2)", fmt_f64(2.0 * std::f64::consts::PI / masses.reduced().powi(2))));
    }

    let n = flat.usize_or("grid.n", 64)?;
    let dp = flat.positive("grid.dp", 0.25)?;
    let grid = MomentumGrid::new(n, dp).map_err(|e| key_err("grid.n", e.to_string()))?;
    let shifts = match flat.i64_list("grid.shifts")? {
        Some(s) => s,
        None => (1..=4.min(n as i64 - 1)).flat_map(|s| [-s, s]).collect(),
    };
    if shifts.is_empty() {
        return Err(key_err("grid.shifts", "must not be empty"));
    }
    if let Some(s) = shifts.iter().find(|s| **s == 0 || s.unsigned_abs() as usize >= n) {
        return Err(key_err("grid.shifts", format!("shift {s} is not a nonzero transfer on {n} points")));
    }
    flat.note("grid.shifts", format!("[{}]", shifts.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")));

    let k_order = flat.usize_or("quadrature.k_order", 64)?;
    if k_order < 2 {
        return Err(key_err("quadrature.k_order", "must be at least 2"));
    }
    let d = DiffusionQuadrature::default();
    let diffusion = DiffusionQuadrature {
        radial_order: flat.usize_or("quadrature.radial_order", d.radial_order)?,
        perp_order: flat.usize_or("quadrature.perp_order", d.perp_order)?,
        tol: flat.positive("quadrature.tol", d.tol)?,
        window_periods: flat.usize_or("quadrature.window_periods", d.window_periods)?,
        nodes_per_period: flat.usize_or("quadrature.nodes_per_period", d.nodes_per_period)?,
    };
    for (key, v, min) in [
        ("quadrature.radial_order", diffusion.radial_order, 2),
        ("quadrature.perp_order", diffusion.perp_order, 2),
        ("quadrature.window_periods", diffusion.window_periods, 1),
    ] {
        if v < min {
            return Err(key_err(key, format!("must be at least {min}, got {v}")));
        }
    }

    let dt = match flat.opt_f64("evolution.dt")? {
        Some(v) if v <= 0.0 => return Err(key_err("evolution.dt", format!("must be positive, got {v}"))),
        Some(v) => Some(v),
        None => {
            flat.note("evolution.dt", "\"auto\"".into());
            None
        }
    };
    let n_steps = flat.usize_or("evolution.n_steps", 1000)?;
    let record_every = flat.usize_or("evolution.record_every", 10)?;
    if record_every == 0 {
        return Err(key_err("evolution.record_every", "must be at least 1"));
    }
    let positivity_tol = flat.f64_or("evolution.positivity_tol", 1e-8)?;
    if positivity_tol < 0.0 {
        return Err(key_err("evolution.positivity_tol", "must be non-negative"));
    }
    let edge_population_tol = flat.f64_or("evolution.edge_population_tol", 1e-6)?;
    if edge_population_tol < 0.0 {
        return Err(key_err("evolution.edge_population_tol", "must be non-negative"));
    }
    let include_hamiltonian = flat.bool_or("evolution.include_hamiltonian", true)?;

    let initial = match flat.str_or("initial.kind", "gaussian")?.as_str() {
        "gaussian" => InitialKind::Gaussian,
        "diagonal" => InitialKind::Diagonal,
        "mixed" => InitialKind::Mixed,
        "superposition" => InitialKind::Superposition,
        other => {
            return Err(key_err(
                "initial.kind",
                format!("expected gaussian, diagonal, mixed or superposition, got \"{other}\""),
            ))
        }
    };
    let initial_center = flat.f64_or("initial.center", 0.0)?;
    let initial_width = flat.positive("initial.width", 0.5)?;

    let ladder = flat.f64_list("decohere.ladder", &[tau, 2.0 * tau, 4.0 * tau])?;
    if let Some(t) = ladder.iter().find(|t| **t <= 0.0) {
        return Err(key_err("decohere.ladder", format!("intercollision times must be positive, got {t}")));
    }
    let pair = match flat.i64_list("decohere.pair")? {
        Some(p) => match p.as_slice() {
            [i, j] if *i >= 0 && *j >= 0 && i != j && (*i as usize) < n && (*j as usize) < n => (*i as usize, *j as usize),
            _ => return Err(key_err("decohere.pair", format!("expected two distinct indices below {n}"))),
        },
        None => {
            let i = (n / 2).saturating_sub(5);
            (i, n - 1 - i)
        }
    };
    if pair.0 == pair.1 {
        return Err(key_err("decohere.pair", "grid too small for the default pair"));
    }
    flat.note("decohere.pair", format!("[{}, {}]", pair.0, pair.1));

    let unit_keys = ["units.energy", "units.time", "units.length"];
    let given = unit_keys.iter().filter(|k| flat.values.contains_key(**k)).count();
    let units = match given {
        0 => {
            for k in unit_keys {
                flat.note(k, "\"natural\"".into());
            }
            UnitSystem::natural()
        }
        3 => UnitSystem::with_conversions(ReportConversions {
            energy: flat.positive("units.energy", 1.0)?,
            time: flat.positive("units.time", 1.0)?,
            length: flat.positive("units.length", 1.0)?,
        }),
        _ => return Err(key_err("units", "set all of units.energy, units.time, units.length or none")),
    };

    let resolved = flat.resolved;
    Ok(ScenarioConfig {
        masses,
        gas,
        amplitude,
        tau,
        coupling,
        grid,
        shifts,
        k_order,
        diffusion,
        dt,
        n_steps,
        record_every,
        positivity_tol,
        edge_population_tol,
        include_hamiltonian,
        initial,
        initial_center,
        initial_width,
        ladder,
        pair,
        units,
        resolved,
    })
}
