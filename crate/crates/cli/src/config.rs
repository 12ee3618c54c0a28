//! Experiment configuration: a TOML file with fixed sections. Unknown keys are
//! rejected; missing keys take the defaults below and are listed in the report.

use std::path::Path;

use quench_core::operators::{
    CoefficientField, CoefficientPreset, EllipticityParams, Modulus, OperatorSpec, PenalizationParams,
};
use quench_core::solver::BoundaryPreset;
use quench_core::{make_grid, SpaceTimeGrid};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MEASUREMENTS: [&str; 6] = ["fb_growth", "gradient_ratio", "lipschitz", "holder", "time_oscillation", "parabolicity"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    pub operator: OperatorSection,
    pub penalization: PenalizationSection,
    pub boundary: BoundarySection,
    pub estimator: EstimatorSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub name: String,
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { name: "experiment".into(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub d: usize,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    /// Horizon: the run covers (−t, 0].
    pub t: f64,
    /// Storage time step; the solver substeps below it.
    pub dt: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { d: 1, a: -1.0, b: 1.0, n: 129, t: 0.5, dt: 1.0 / 64.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorSection {
    /// `laplacian`, `pucci_minus`, `pucci_plus` or `linear`.
    pub variant: String,
    pub lambda: f64,
    pub cap_lambda: f64,
    /// Coefficient preset for `linear`: `identity` or `sin_modulated`.
    pub coefficient: String,
    /// `zero` or `linear`.
    pub modulus: String,
    pub modulus_constant: f64,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            variant: "laplacian".into(),
            lambda: 1.0,
            cap_lambda: 1.0,
            coefficient: "identity".into(),
            modulus: "zero".into(),
            modulus_constant: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenalizationSection {
    pub gamma: f64,
    pub sigma0: f64,
    pub eps: Vec<f64>,
}

impl Default for PenalizationSection {
    fn default() -> Self {
        PenalizationSection { gamma: 0.5, sigma0: PenalizationParams::DEFAULT_SIGMA0, eps: vec![0.05] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundarySection {
    pub preset: String,
    pub shift: bool,
    /// Level of `positive_constant`.
    pub value: f64,
    /// Height of `bump`.
    pub amplitude: f64,
    /// Free-boundary position of `exact_profile`.
    pub x0: f64,
}

impl Default for BoundarySection {
    fn default() -> Self {
        BoundarySection { preset: "exact_profile".into(), shift: false, value: 1.0, amplitude: 1.0, x0: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub measurements: Vec<String>,
    pub radii_count: usize,
    /// Largest radius is `2^{−first_radius}(b−a)/2`.
    pub first_radius: u32,
    pub mu: f64,
    /// Gradient ratio exponent; defaults to γ/2.
    pub theta: Option<f64>,
    /// Reference growth exponent; defaults to 1+α.
    pub beta_reference: Option<f64>,
    pub fb_tolerance: f64,
    pub sandwich_tolerance: f64,
    /// Largest admissible max/min of the gradient ratio across an ε sweep.
    pub gradient_drift: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection {
            measurements: MEASUREMENTS.iter().map(|s| s.to_string()).collect(),
            radii_count: 4,
            first_radius: 2,
            mu: 0.5,
            theta: None,
            beta_reference: None,
            fb_tolerance: 0.07,
            sandwich_tolerance: 1e-6,
            gradient_drift: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    /// `all` writes every stored level to the CSV, `final` only the last one.
    pub fields: String,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into(), fields: "all".into(), plots: true }
    }
}

fn bad(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config { key: key.to_string(), message: message.into() }
}

/// A parsed config together with the keys that were filled from defaults.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub defaulted: Vec<String>,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Loaded, CliError> {
    let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    let config: ExperimentConfig = toml::from_str(text).map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    let config = config.resolved()?;
    let echo = toml::Value::try_from(&config).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut defaulted = Vec::new();
    if let toml::Value::Table(sections) = echo {
        for (section, body) in sections {
            if let toml::Value::Table(keys) = body {
                let given = raw.get(&section).and_then(|v| v.as_table());
                for key in keys.keys() {
                    if !given.is_some_and(|g| g.contains_key(key)) {
                        defaulted.push(format!("{section}.{key}"));
                    }
                }
            }
        }
    }
    Ok(Loaded { config, defaulted })
}

impl ExperimentConfig {
    /// Validates every field and fills the γ-dependent defaults.
    pub fn resolved(mut self) -> Result<Self, CliError> {
        let g = &self.grid;
        if !(g.d == 1 || g.d == 2) {
            return Err(bad("grid.d", format!("must be 1 or 2, got {}", g.d)));
        }
        if !(g.a.is_finite() && g.b.is_finite() && g.a < g.b) {
            return Err(bad("grid.a", format!("need finite a < b, got [{}, {}]", g.a, g.b)));
        }
        if g.n < 3 {
            return Err(bad("grid.n", format!("need at least 3 nodes, got {}", g.n)));
        }
        if !(g.t > 0.0 && g.t.is_finite()) {
            return Err(bad("grid.t", format!("must be positive, got {}", g.t)));
        }
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            return Err(bad("grid.dt", format!("must be positive, got {}", g.dt)));
        }
        let p = &self.penalization;
        if !(p.gamma > 0.0 && p.gamma < 1.0) {
            return Err(bad("penalization.gamma", format!("must lie in (0, 1), got {}", p.gamma)));
        }
        if !(p.sigma0 > 0.0 && p.sigma0 < 1.0) {
            return Err(bad("penalization.sigma0", format!("must lie in (0, 1), got {}", p.sigma0)));
        }
        if p.eps.is_empty() {
            return Err(bad("penalization.eps", "needs at least one value"));
        }
        if let Some(e) = p.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(bad("penalization.eps", format!("values must be positive, got {e}")));
        }
        let o = &self.operator;
        if !["laplacian", "pucci_minus", "pucci_plus", "linear"].contains(&o.variant.as_str()) {
            return Err(bad("operator.variant", format!("unknown variant `{}`", o.variant)));
        }
        if !(o.lambda > 0.0 && o.lambda <= o.cap_lambda && o.cap_lambda.is_finite()) {
            return Err(bad("operator.lambda", format!("need 0 < lambda ≤ cap_lambda, got {} and {}", o.lambda, o.cap_lambda)));
        }
        CoefficientPreset::from_name(&o.coefficient).map_err(|e| bad("operator.coefficient", e.to_string()))?;
        if !["zero", "linear"].contains(&o.modulus.as_str()) {
            return Err(bad("operator.modulus", format!("unknown modulus `{}`", o.modulus)));
        }
        if !(o.modulus_constant >= 0.0 && o.modulus_constant.is_finite()) {
            return Err(bad("operator.modulus_constant", format!("must be nonnegative, got {}", o.modulus_constant)));
        }
        BoundaryPreset::from_name(&self.boundary.preset).map_err(|e| bad("boundary.preset", e.to_string()))?;
        let e = &self.estimator;
        if let Some(m) = e.measurements.iter().find(|m| !MEASUREMENTS.contains(&m.as_str())) {
            return Err(bad("estimator.measurements", format!("unknown measurement `{m}`; known: {}", MEASUREMENTS.join(", "))));
        }
        if e.radii_count < 3 {
            return Err(bad("estimator.radii_count", format!("need at least 3 radii, got {}", e.radii_count)));
        }
        if !(e.mu > 0.0 && e.mu < 1.0) {
            return Err(bad("estimator.mu", format!("must lie in (0, 1), got {}", e.mu)));
        }
        let gamma = self.penalization.gamma;
        let theta = e.theta.unwrap_or(gamma / 2.0);
        if !(theta > 0.0 && theta < gamma) {
            return Err(bad("estimator.theta", format!("must lie in (0, gamma) = (0, {gamma}), got {theta}")));
        }
        for (key, v) in [
            ("estimator.fb_tolerance", e.fb_tolerance),
            ("estimator.sandwich_tolerance", e.sandwich_tolerance),
            ("estimator.gradient_drift", e.gradient_drift),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, format!("must be positive, got {v}")));
            }
        }
        if !["all", "final"].contains(&self.output.fields.as_str()) {
            return Err(bad("output.fields", format!("must be `all` or `final`, got `{}`", self.output.fields)));
        }
        let beta = e.beta_reference.unwrap_or(2.0 / (2.0 - gamma));
        self.estimator.theta = Some(theta);
        self.estimator.beta_reference = Some(beta);
        // constructing the core objects catches anything left
        self.grid()?;
        for &eps in &self.penalization.eps {
            self.penalization(eps)?;
        }
        self.operator()?;
        Ok(self)
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid, CliError> {
        let g = &self.grid;
        make_grid(g.d, g.a, g.b, g.n, g.t, g.dt).map_err(|e| bad("grid", e.to_string()))
    }

    pub fn penalization(&self, eps: f64) -> Result<PenalizationParams, CliError> {
        let p = &self.penalization;
        PenalizationParams::new(p.gamma, p.sigma0, eps).map_err(|e| bad("penalization", e.to_string()))
    }

    pub fn operator(&self) -> Result<OperatorSpec, CliError> {
        let o = &self.operator;
        let grid = self.grid()?;
        let modulus = match o.modulus.as_str() {
            "linear" => Modulus::Linear(o.modulus_constant),
            _ => Modulus::Zero,
        };
        let ell = EllipticityParams::new(o.lambda, o.cap_lambda, modulus).map_err(|e| bad("operator.lambda", e.to_string()))?;
        Ok(match o.variant.as_str() {
            "laplacian" => OperatorSpec::laplacian(&grid),
            "pucci_minus" => OperatorSpec::pucci_minus(grid.dim(), ell),
            "pucci_plus" => OperatorSpec::pucci_plus(grid.dim(), ell),
            _ => {
                let preset = CoefficientPreset::from_name(&o.coefficient).map_err(|e| bad("operator.coefficient", e.to_string()))?;
                let field = CoefficientField::on_grid(preset, &grid).map_err(|e| bad("operator.coefficient", e.to_string()))?;
                OperatorSpec::linear(field, ell, &grid).map_err(|e| bad("operator.coefficient", e.to_string()))?
            }
        })
    }

    pub fn boundary(&self) -> BoundaryPreset {
        let b = &self.boundary;
        match b.preset.as_str() {
            "zero" => BoundaryPreset::Zero,
            "positive_constant" => BoundaryPreset::PositiveConstant { value: b.value },
            "bump" => BoundaryPreset::Bump { amplitude: b.amplitude },
            _ => BoundaryPreset::ExactProfile { x0: b.x0 },
        }
    }

    pub fn wants(&self, measurement: &str) -> bool {
        self.estimator.measurements.iter().any(|m| m == measurement)
    }
}
