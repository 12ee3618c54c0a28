use std::sync::OnceLock;

use serde::Serialize;

use super::quadrature::adaptive_simpson;
use crate::error::{Error, Result};

/// `α = γ / (2 − γ)` for γ ∈ (0, 1).
pub fn alpha_of_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    Ok(gamma / (2.0 - gamma))
}

fn raw_bump(theta: f64) -> f64 {
    if theta <= 0.0 || theta >= 1.0 {
        0.0
    } else {
        (-1.0 / (theta * (1.0 - theta))).exp()
    }
}

const TABLE_CELLS: usize = 2048;

/// The normalized smooth bump `ϱ(θ) = exp(−1/(θ(1−θ))) / Z` on (0, 1), with a
/// tabulated primitive for fast evaluation of `∫₀^z ϱ`.
#[derive(Debug)]
pub struct Bump {
    norm: f64,
    /// Primitive at θ_i = i / TABLE_CELLS.
    primitive: Vec<f64>,
    /// ϱ at θ_i.
    density: Vec<f64>,
}

impl Bump {
    fn build() -> Bump {
        let norm = adaptive_simpson(&raw_bump, 0.0, 1.0, 1e-16);
        let width = 1.0 / TABLE_CELLS as f64;
        let mut primitive = Vec::with_capacity(TABLE_CELLS + 1);
        let mut acc = 0.0;
        primitive.push(0.0);
        for i in 0..TABLE_CELLS {
            let a = i as f64 * width;
            acc += adaptive_simpson(&raw_bump, a, a + width, 1e-19) / norm;
            primitive.push(acc);
        }
        let density = (0..=TABLE_CELLS).map(|i| raw_bump(i as f64 * width) / norm).collect();
        Bump { norm, primitive, density }
    }

    /// Shared instance; normalization is computed once per process.
    pub fn standard() -> &'static Bump {
        static BUMP: OnceLock<Bump> = OnceLock::new();
        BUMP.get_or_init(Bump::build)
    }

    /// Normalization constant Z.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, theta: f64) -> f64 {
        raw_bump(theta) / self.norm
    }

    /// Largest value of ϱ, attained at θ = 1/2.
    pub fn peak(&self) -> f64 {
        self.density(0.5)
    }

    /// `∫₀^z ϱ(θ) dθ`, by cubic Hermite interpolation of the tabulated primitive
    /// with exact derivatives; 0 for z ≤ 0 and 1 for z ≥ 1.
    pub fn cumulative(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return 1.0;
        }
        let width = 1.0 / TABLE_CELLS as f64;
        let pos = z * TABLE_CELLS as f64;
        let i = (pos.floor() as usize).min(TABLE_CELLS - 1);
        let s = pos - i as f64;
        let (p0, p1) = (self.primitive[i], self.primitive[i + 1]);
        let (d0, d1) = (self.density[i] * width, self.density[i + 1] * width);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * d1;
        value.clamp(0.0, 1.0)
    }
}

/// Penalization parameters `(γ, σ₀, ε)` with the standard bump.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PenalizationParams {
    gamma: f64,
    sigma0: f64,
    eps: f64,
    #[serde(skip)]
    bump: &'static Bump,
}

impl PartialEq for PenalizationParams {
    fn eq(&self, other: &Self) -> bool {
        self.gamma == other.gamma && self.sigma0 == other.sigma0 && self.eps == other.eps
    }
}

impl PenalizationParams {
    pub const DEFAULT_SIGMA0: f64 = 0.1;

    pub fn new(gamma: f64, sigma0: f64, eps: f64) -> Result<Self> {
        alpha_of_gamma(gamma)?;
        if !(sigma0 > 0.0 && sigma0 < 1.0) {
            return Err(Error::invalid("sigma0", format!("must lie in (0, 1), got {sigma0}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::invalid("eps", format!("must be finite and positive, got {eps}")));
        }
        Ok(PenalizationParams { gamma, sigma0, eps, bump: Bump::standard() })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.gamma, self.sigma0, eps)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn bump_fn(&self) -> &'static Bump {
        self.bump
    }

    pub fn alpha(&self) -> f64 {
        self.gamma / (2.0 - self.gamma)
    }

    /// ε^{1+α}, the width of the penalization layer.
    pub fn layer(&self) -> f64 {
        self.eps.powf(1.0 + self.alpha())
    }

    pub fn tau_low(&self) -> f64 {
        self.sigma0 * self.layer()
    }

    pub fn tau_high(&self) -> f64 {
        (1.0 + self.sigma0) * self.layer()
    }

    pub fn bump(&self, theta: f64) -> f64 {
        self.bump.density(theta)
    }

    /// B_ε(s) = γ ∫₀^{(s − σ₀ε^{1+α})/ε^{1+α}} ϱ.
    pub fn beta_eps(&self, s: f64) -> f64 {
        let layer = self.layer();
        self.gamma * self.bump.cumulative((s - self.sigma0 * layer) / layer)
    }

    /// B_ε(s) s^{γ−1}, identically zero for s ≤ σ₀ε^{1+α}.
    pub fn source(&self, s: f64) -> f64 {
        if s <= self.tau_low() {
            0.0
        } else {
            self.beta_eps(s) * s.powf(self.gamma - 1.0)
        }
    }

    /// Exact derivative of [`Self::source`] (zero below the layer).
    pub fn source_derivative(&self, s: f64) -> f64 {
        if s <= self.tau_low() {
            return 0.0;
        }
        let layer = self.layer();
        let z = (s - self.sigma0 * layer) / layer;
        let db = self.gamma * self.bump.density(z) / layer;
        db * s.powf(self.gamma - 1.0) + self.beta_eps(s) * (self.gamma - 1.0) * s.powf(self.gamma - 2.0)
    }

    /// γ σ₀^{γ−1} ε^{(1+α)(γ−1)}.
    pub fn source_bound(&self) -> f64 {
        self.gamma * self.sigma0.powf(self.gamma - 1.0) * self.eps.powf((1.0 + self.alpha()) * (self.gamma - 1.0))
    }

    /// Sampled sup |d/ds source| over [τ_low/2, 2τ_high] and a geometric tail;
    /// scales like ε^{−2}.
    pub fn source_lipschitz(&self) -> f64 {
        const LAYER_SAMPLES: usize = 8192;
        let (a, b) = (0.5 * self.tau_low(), 2.0 * self.tau_high());
        let layer_max = (0..=LAYER_SAMPLES)
            .map(|i| a + (b - a) * i as f64 / LAYER_SAMPLES as f64)
            .map(|s| self.source_derivative(s).abs())
            .fold(0.0, f64::max);
        // above τ_high the slope is γ(1−γ)s^{γ−2}, decreasing in s
        let tail_max = (0..64)
            .map(|k| b * 1.25f64.powi(k))
            .map(|s| self.source_derivative(s).abs())
            .fold(0.0, f64::max);
        layer_max.max(tail_max)
    }

    /// Exact sup of dB_ε/ds = γ ϱ(½) / ε^{1+α}.
    pub fn beta_lipschitz(&self) -> f64 {
        self.gamma * self.bump.peak() / self.layer()
    }
}

/// Right-hand side `g(u)` of `F(x,t,D²u) − ∂ₜu = g(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SourceTerm {
    Zero,
    Constant(f64),
    /// `prefactor · B_ε(u) u^{γ−1}`.
    Penalized { params: PenalizationParams, prefactor: f64 },
}

impl SourceTerm {
    pub fn penalized(params: PenalizationParams) -> Self {
        SourceTerm::Penalized { params, prefactor: 1.0 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            SourceTerm::Zero => 0.0,
            SourceTerm::Constant(c) => *c,
            SourceTerm::Penalized { params, prefactor } => prefactor * params.source(s),
        }
    }

    /// Lipschitz constant in u (zero for state-independent sources).
    pub fn lipschitz(&self) -> f64 {
        match self {
            SourceTerm::Zero | SourceTerm::Constant(_) => 0.0,
            SourceTerm::Penalized { params, prefactor } => prefactor.abs() * params.source_lipschitz(),
        }
    }
}
