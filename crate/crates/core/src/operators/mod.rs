//! Operator catalog `F(x, t, M)`, structural checks, and the penalized source term.

mod penalization;
mod pucci;
pub(crate) mod quadrature;

pub use penalization::{alpha_of_gamma, Bump, PenalizationParams, SourceTerm};
pub use pucci::{pucci_minus, pucci_plus};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Point, SpaceTimeGrid};
use crate::matrix::SymMatrix;

const CHECK_TOL: f64 = 1e-10;

/// Preset moduli of continuity ω with ω(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Modulus {
    Zero,
    Linear(f64),
}

impl Modulus {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Modulus::Zero => 0.0,
            Modulus::Linear(k) => k * r.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityParams {
    lambda: f64,
    cap_lambda: f64,
    modulus: Modulus,
}

impl EllipticityParams {
    pub fn new(lambda: f64, cap_lambda: f64, modulus: Modulus) -> Result<Self> {
        if !(lambda.is_finite() && cap_lambda.is_finite() && 0.0 < lambda && lambda <= cap_lambda) {
            return Err(Error::invalid("lambda", format!("need 0 < λ ≤ Λ, got λ = {lambda}, Λ = {cap_lambda}")));
        }
        if let Modulus::Linear(k) = modulus {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::invalid("modulus", format!("slope must be nonnegative, got {k}")));
            }
        }
        if modulus.eval(0.0) != 0.0 {
            return Err(Error::invalid("modulus", "ω(0) must vanish"));
        }
        let samples: Vec<f64> = (0..=64).map(|i| modulus.eval(i as f64 / 16.0)).collect();
        if samples.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("modulus", "ω must be nondecreasing"));
        }
        Ok(EllipticityParams { lambda, cap_lambda, modulus })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn cap_lambda(&self) -> f64 {
        self.cap_lambda
    }
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }
}

/// Coefficient matrices `A(x, t)` of a linear nondivergence operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoefficientPreset {
    /// A ≡ I (the Laplacian).
    Identity,
    /// A(x) = (1 + ½ sin(π x₁)) I, spectrum in [½, 3/2].
    SinModulated,
    /// A ≡ fixed matrix.
    Constant(SymMatrix),
}

impl CoefficientPreset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "identity" | "laplacian" => Ok(CoefficientPreset::Identity),
            "sin_modulated" => Ok(CoefficientPreset::SinModulated),
            _ => Err(Error::UnknownPreset { kind: "coefficient", name: name.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    preset: CoefficientPreset,
    dim: usize,
    lo: f64,
    hi: f64,
    /// Evaluation happens at (space_scale · x, time_scale · t).
    space_scale: f64,
    time_scale: f64,
}

impl CoefficientField {
    /// Field on the box `[lo, hi]^dim`.
    pub fn new(preset: CoefficientPreset, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if let CoefficientPreset::Constant(m) = preset {
            if m.dim() != dim {
                return Err(Error::invalid("coefficient", "matrix dimension differs from grid dimension"));
            }
        }
        Ok(CoefficientField { preset, dim, lo, hi, space_scale: 1.0, time_scale: 1.0 })
    }

    pub fn on_grid(preset: CoefficientPreset, grid: &SpaceTimeGrid) -> Result<Self> {
        Self::new(preset, grid.dim(), grid.lo(), grid.hi())
    }

    pub fn preset(&self) -> CoefficientPreset {
        self.preset
    }

    pub fn eval(&self, x: Point, t: f64) -> Result<SymMatrix> {
        let y = [x[0] * self.space_scale, x[1] * self.space_scale];
        let _t = t * self.time_scale;
        let tol = 1e-12 * (self.hi - self.lo);
        if (0..self.dim).any(|k| y[k] < self.lo - tol || y[k] > self.hi + tol) {
            return Err(Error::OutsideDomain { x: y[0], y: y[1] });
        }
        Ok(match self.preset {
            CoefficientPreset::Identity => SymMatrix::identity(self.dim),
            CoefficientPreset::SinModulated => {
                SymMatrix::identity(self.dim).scale(1.0 + 0.5 * (std::f64::consts::PI * y[0]).sin())
            }
            CoefficientPreset::Constant(m) => m,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorVariant {
    PucciMinus,
    PucciPlus,
    LinearNondivergence(CoefficientField),
}

/// A catalog operator with its ellipticity constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    variant: OperatorVariant,
    ellipticity: EllipticityParams,
    dim: usize,
}

impl OperatorSpec {
    pub fn pucci_minus(dim: usize, ellipticity: EllipticityParams) -> Self {
        OperatorSpec { variant: OperatorVariant::PucciMinus, ellipticity, dim }
    }

    pub fn pucci_plus(dim: usize, ellipticity: EllipticityParams) -> Self {
        OperatorSpec { variant: OperatorVariant::PucciPlus, ellipticity, dim }
    }

    /// The Laplacian (λ = Λ = 1) on the grid's box.
    pub fn laplacian(grid: &SpaceTimeGrid) -> Self {
        let field = CoefficientField::on_grid(CoefficientPreset::Identity, grid)
            .expect("identity field always matches the grid");
        let ellipticity = EllipticityParams::new(1.0, 1.0, Modulus::Zero).expect("valid constants");
        OperatorSpec { variant: OperatorVariant::LinearNondivergence(field), ellipticity, dim: grid.dim() }
    }

    /// Linear operator whose coefficients are checked to be symmetric with
    /// spectrum in [λ, Λ] at every node of `grid`.
    pub fn linear(field: CoefficientField, ellipticity: EllipticityParams, grid: &SpaceTimeGrid) -> Result<Self> {
        let spec = Self::linear_unchecked(field, ellipticity);
        for level in [0, grid.final_level()] {
            let t = grid.time(level);
            for node in 0..grid.node_count() {
                let a = field.eval(grid.point(node), t)?;
                let e = a.spectrum();
                let tol = 1e-12 * ellipticity.cap_lambda;
                if e.iter().any(|&v| v < ellipticity.lambda - tol || v > ellipticity.cap_lambda + tol) {
                    return Err(Error::invalid(
                        "coefficient",
                        format!(
                            "eigenvalues {e:?} at node {node} leave [{}, {}]",
                            ellipticity.lambda, ellipticity.cap_lambda
                        ),
                    ));
                }
            }
        }
        Ok(spec)
    }

    /// Linear operator without the spectrum check (used to exercise the checkers).
    pub fn linear_unchecked(field: CoefficientField, ellipticity: EllipticityParams) -> Self {
        OperatorSpec { variant: OperatorVariant::LinearNondivergence(field), ellipticity, dim: field.dim }
    }

    pub fn variant(&self) -> &OperatorVariant {
        &self.variant
    }
    pub fn ellipticity(&self) -> &EllipticityParams {
        &self.ellipticity
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether F depends on (x, t).
    pub fn is_homogeneous_in_space(&self) -> bool {
        match self.variant {
            OperatorVariant::LinearNondivergence(field) => !matches!(field.preset, CoefficientPreset::SinModulated),
            _ => true,
        }
    }

    /// `F_κ(x, t, M) = F(κx, κ²t, M)`: the operator seen by `v(κx, κ²t)/κ^θ`
    /// once 1-homogeneity absorbs the powers of κ.
    pub fn rescaled(&self, kappa: f64) -> Self {
        let mut out = *self;
        if let OperatorVariant::LinearNondivergence(mut field) = self.variant {
            field.space_scale *= kappa;
            field.time_scale *= kappa * kappa;
            out.variant = OperatorVariant::LinearNondivergence(field);
        }
        out
    }
}

/// Evaluates F(x, t, M).
#[allow(non_snake_case)]
pub fn evaluate_F(spec: &OperatorSpec, x: Point, t: f64, m: &SymMatrix) -> Result<f64> {
    let e = &spec.ellipticity;
    Ok(match &spec.variant {
        OperatorVariant::PucciMinus => pucci_minus(m, e.lambda, e.cap_lambda),
        OperatorVariant::PucciPlus => pucci_plus(m, e.lambda, e.cap_lambda),
        OperatorVariant::LinearNondivergence(field) => field.eval(x, t)?.trace_product(m),
    })
}

/// Witness for a failed structural check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: Point,
    pub t: f64,
    pub m: SymMatrix,
    pub n: SymMatrix,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub samples: usize,
    pub passed: bool,
    /// Smallest slack seen (negative means violation).
    pub worst_margin: f64,
    pub witness: Option<Witness>,
}

struct Sampler {
    rng: ChaCha8Rng,
    dim: usize,
    lo: f64,
    hi: f64,
}

impl Sampler {
    fn new(spec: &OperatorSpec, seed: u64) -> Self {
        let (lo, hi) = match spec.variant {
            OperatorVariant::LinearNondivergence(f) => (f.lo, f.hi),
            _ => (-1.0, 1.0),
        };
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), dim: spec.dim, lo, hi }
    }

    fn point(&mut self) -> (Point, f64) {
        let x = self.rng.gen_range(self.lo..=self.hi);
        let y = if self.dim == 2 { self.rng.gen_range(self.lo..=self.hi) } else { 0.0 };
        ([x, y], self.rng.gen_range(-1.0..=0.0))
    }

    fn matrix(&mut self) -> SymMatrix {
        let scale = 10f64.powf(self.rng.gen_range(-2.0..2.0));
        let mut entry = || scale * self.rng.gen_range(-1.0..1.0);
        match self.dim {
            1 => SymMatrix::scalar(entry()),
            _ => SymMatrix::new2(entry(), entry(), entry()),
        }
    }
}

/// Samples the two-sided (λ, Λ)-parabolicity inequality
/// `M⁻(N) ≤ F(x,t,M+N) − F(x,t,M) ≤ M⁺(N)`.
pub fn check_uniform_parabolicity(spec: &OperatorSpec, sample_count: usize, rng_seed: u64) -> Result<CheckReport> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count", "need at least one sample"));
    }
    let (lambda, cap) = (spec.ellipticity.lambda, spec.ellipticity.cap_lambda);
    let mut sampler = Sampler::new(spec, rng_seed);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..sample_count {
        let (x, t) = sampler.point();
        let (m, n) = (sampler.matrix(), sampler.matrix());
        let inc = evaluate_F(spec, x, t, &m.add(&n))? - evaluate_F(spec, x, t, &m)?;
        let scale = 1.0 + m.frobenius() + n.frobenius();
        let margin = (inc - pucci_minus(&n, lambda, cap)).min(pucci_plus(&n, lambda, cap) - inc) / scale;
        if margin < worst {
            worst = margin;
            if margin < -CHECK_TOL {
                witness.get_or_insert(Witness { x, t, m, n, tau: 1.0 });
            }
        }
    }
    Ok(CheckReport { name: "uniform_parabolicity", samples: sample_count, passed: witness.is_none(), worst_margin: worst, witness })
}

/// Samples 1-homogeneity `F(x,t,τM) = τ F(x,t,M)` for τ ≥ 0 (τ = 0 and τ = 1 always included).
pub fn check_homogeneity(spec: &OperatorSpec, sample_count: usize, rng_seed: u64) -> Result<CheckReport> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count", "need at least one sample"));
    }
    let mut sampler = Sampler::new(spec, rng_seed);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for k in 0..sample_count {
        let (x, t) = sampler.point();
        let m = sampler.matrix();
        let tau = match k {
            0 => 0.0,
            1 => 1.0,
            _ => sampler.rng.gen_range(0.0..10.0),
        };
        let excess = (evaluate_F(spec, x, t, &m.scale(tau))? - tau * evaluate_F(spec, x, t, &m)?).abs();
        let margin = CHECK_TOL * (1.0 + tau * m.frobenius()) - excess;
        worst = worst.min(margin);
        if margin < 0.0 && witness.is_none() {
            witness = Some(Witness { x, t, m, n: SymMatrix::zero(spec.dim), tau });
        }
    }
    Ok(CheckReport { name: "homogeneity", samples: sample_count, passed: witness.is_none(), worst_margin: worst, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_relative_eq;

    fn ell(l: f64, u: f64) -> EllipticityParams {
        EllipticityParams::new(l, u, Modulus::Zero).unwrap()
    }

    #[test]
    fn ellipticity_validation() {
        assert!(EllipticityParams::new(2.0, 1.0, Modulus::Zero).is_err());
        assert!(EllipticityParams::new(0.0, 1.0, Modulus::Zero).is_err());
        assert!(EllipticityParams::new(1.0, 1.0, Modulus::Linear(-1.0)).is_err());
        assert!(EllipticityParams::new(1.0, 1.0, Modulus::Linear(2.0)).is_ok());
        assert_eq!(Modulus::Linear(3.0).eval(0.0), 0.0);
    }

    #[test]
    fn laplacian_is_trace() {
        let g = make_grid(2, -1.0, 1.0, 5, 1.0, 1.0).unwrap();
        let spec = OperatorSpec::laplacian(&g);
        let m = SymMatrix::new2(1.5, -7.0, 2.25);
        assert_eq!(evaluate_F(&spec, [0.3, 0.1], -0.5, &m).unwrap(), m.trace());
    }

    #[test]
    fn sin_modulated_evaluation() {
        let g = make_grid(1, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let field = CoefficientField::on_grid(CoefficientPreset::SinModulated, &g).unwrap();
        let spec = OperatorSpec::linear(field, ell(0.5, 1.5), &g).unwrap();
        let v = evaluate_F(&spec, [0.5, 0.0], 0.0, &SymMatrix::scalar(2.0)).unwrap();
        assert_relative_eq!(v, 1.5 * 2.0, epsilon = 1e-15);
        assert!(matches!(
            evaluate_F(&spec, [1.5, 0.0], 0.0, &SymMatrix::scalar(1.0)),
            Err(Error::OutsideDomain { .. })
        ));
        // narrower constants are rejected at construction
        assert!(OperatorSpec::linear(field, ell(0.6, 1.5), &g).is_err());
    }

    #[test]
    fn pucci_ignores_position() {
        let spec = OperatorSpec::pucci_minus(2, ell(1.0, 2.0));
        let m = SymMatrix::new2(1.0, 0.5, -2.0);
        let a = evaluate_F(&spec, [0.0, 0.0], 0.0, &m).unwrap();
        let b = evaluate_F(&spec, [0.9, -0.4], -0.7, &m).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, pucci_minus(&m, 1.0, 2.0));
    }

    #[test]
    fn catalog_passes_structural_checks() {
        let g = make_grid(2, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let g1 = make_grid(1, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let field = CoefficientField::on_grid(CoefficientPreset::SinModulated, &g1).unwrap();
        let specs = [
            OperatorSpec::pucci_minus(2, ell(1.0, 2.0)),
            OperatorSpec::pucci_plus(2, ell(0.3, 4.0)),
            OperatorSpec::pucci_minus(1, ell(1.0, 2.0)),
            OperatorSpec::laplacian(&g),
            OperatorSpec::linear(field, ell(0.5, 1.5), &g1).unwrap(),
        ];
        for spec in &specs {
            let up = check_uniform_parabolicity(spec, 2000, 3).unwrap();
            assert!(up.passed, "{spec:?}: {up:?}");
            let hom = check_homogeneity(spec, 2000, 5).unwrap();
            assert!(hom.passed, "{spec:?}: {hom:?}");
        }
        let lap = check_uniform_parabolicity(&OperatorSpec::laplacian(&g), 500, 1).unwrap();
        assert!(lap.worst_margin.abs() < 1e-12, "Laplacian margins are zero: {}", lap.worst_margin);
    }

    #[test]
    fn planted_eigenvalue_violation_is_caught() {
        let g = make_grid(2, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let planted = SymMatrix::diag(2, 1.0, 4.0); // eigenvalue 2Λ with Λ = 2
        let field = CoefficientField::on_grid(CoefficientPreset::Constant(planted), &g).unwrap();
        assert!(OperatorSpec::linear(field, ell(1.0, 2.0), &g).is_err());
        let spec = OperatorSpec::linear_unchecked(field, ell(1.0, 2.0));
        let report = check_uniform_parabolicity(&spec, 500, 9).unwrap();
        assert!(!report.passed);
        let w = report.witness.expect("witness recorded");
        let inc = evaluate_F(&spec, w.x, w.t, &w.m.add(&w.n)).unwrap() - evaluate_F(&spec, w.x, w.t, &w.m).unwrap();
        assert!(inc > pucci_plus(&w.n, 1.0, 2.0) + 1e-10 || inc < pucci_minus(&w.n, 1.0, 2.0) - 1e-10);
    }

    #[test]
    fn homogeneity_examples() {
        let spec = OperatorSpec::pucci_plus(2, ell(1.0, 2.0));
        let m = SymMatrix::diag(2, 1.0, -1.0);
        let f = |tau: f64| evaluate_F(&spec, [0.0; 2], 0.0, &m.scale(tau)).unwrap();
        assert_eq!(f(0.0), 0.0);
        assert_eq!(f(1.0), 1.0);
        assert_eq!(f(2.0), 2.0 * f(1.0));
    }

    #[test]
    fn rescaled_operator_evaluates_at_scaled_point() {
        let g = make_grid(1, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let field = CoefficientField::on_grid(CoefficientPreset::SinModulated, &g).unwrap();
        let spec = OperatorSpec::linear(field, ell(0.5, 1.5), &g).unwrap();
        let m = SymMatrix::scalar(1.0);
        let scaled = spec.rescaled(0.5);
        assert_eq!(
            evaluate_F(&scaled, [1.0, 0.0], 0.0, &m).unwrap(),
            evaluate_F(&spec, [0.5, 0.0], 0.0, &m).unwrap()
        );
        // x = 2 maps back into the original box
        assert!(evaluate_F(&scaled, [2.0, 0.0], 0.0, &m).is_ok());
    }
}
