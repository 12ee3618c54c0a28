//! Numerical checks of the structural identities behind the estimates: the
//! power transform `v = u^{(2−γ)/2}`, parabolic rescaling, discrete comparison
//! for Pucci equations with a quadratic gradient term, and the quadratic
//! barriers controlling time oscillation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ball_nodes, gradient_at, hessian_at, GridFunction, Point, SpaceTimeGrid};
use crate::matrix::SymMatrix;
use crate::operators::{alpha_of_gamma, evaluate_F, EllipticityParams, OperatorSpec, PenalizationParams, SourceTerm};
use crate::par::{self, Execution};

/// `v = u^{(2−γ)/2}`, so that `v^{1+α} = u`.
pub fn transform_v(u: &GridFunction, gamma: f64) -> Result<GridFunction> {
    alpha_of_gamma(gamma)?;
    check_nonnegative(u)?;
    u.map(|s| s.powf((2.0 - gamma) / 2.0))
}

/// Inverse of [`transform_v`]: `u = v^{1+α}`.
pub fn inverse_transform(v: &GridFunction, gamma: f64) -> Result<GridFunction> {
    let alpha = alpha_of_gamma(gamma)?;
    check_nonnegative(v)?;
    v.map(|s| s.powf(1.0 + alpha))
}

fn check_nonnegative(gf: &GridFunction) -> Result<()> {
    let nodes = gf.grid().node_count();
    match gf.values().iter().position(|&s| s < 0.0) {
        Some(idx) => Err(Error::Negative { value: gf.values()[idx], node: idx % nodes, level: idx / nodes }),
        None => Ok(()),
    }
}

/// Smooth positive test functions u(x, t) for the transform identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AnalyticField {
    Constant(f64),
    /// `2 + sin x`.
    SinShift,
    /// `2 + sin x · cos t`.
    SinCos,
    /// `exp(x y)` (2D).
    ExpProduct,
}

impl AnalyticField {
    pub const CATALOG: [AnalyticField; 3] = [AnalyticField::SinShift, AnalyticField::SinCos, AnalyticField::ExpProduct];

    pub fn dim(&self) -> usize {
        match self {
            AnalyticField::ExpProduct => 2,
            _ => 1,
        }
    }

    pub fn eval(&self, x: Point, t: f64) -> f64 {
        match *self {
            AnalyticField::Constant(c) => c,
            AnalyticField::SinShift => 2.0 + x[0].sin(),
            AnalyticField::SinCos => 2.0 + x[0].sin() * t.cos(),
            AnalyticField::ExpProduct => (x[0] * x[1]).exp(),
        }
    }
}

/// Central-difference gradient and Hessian of `f` at `p` with step `h`;
/// errors if `f ≤ 0` anywhere on the stencil.
fn stencil(f: impl Fn(Point) -> f64, p: Point, h: f64, dim: usize) -> Result<(f64, Point, SymMatrix)> {
    let at = |dx: f64, dy: f64| -> Result<f64> {
        let q = [p[0] + dx * h, p[1] + dy * h];
        let v = f(q);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Precondition(format!("field is {v} at ({}, {}), need a positive value", q[0], q[1])))
        }
    };
    let c = at(0.0, 0.0)?;
    let (xp, xm) = (at(1.0, 0.0)?, at(-1.0, 0.0)?);
    let gx = (xp - xm) / (2.0 * h);
    let dxx = (xp - 2.0 * c + xm) / (h * h);
    if dim == 1 {
        return Ok((c, [gx, 0.0], SymMatrix::scalar(dxx)));
    }
    let (yp, ym) = (at(0.0, 1.0)?, at(0.0, -1.0)?);
    let cross = (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h);
    Ok((c, [gx, (yp - ym) / (2.0 * h)], SymMatrix::new2(dxx, cross, (yp - 2.0 * c + ym) / (h * h))))
}

/// Frobenius norm of `D²v + α v⁻¹∇v⊗∇v − (1+α)⁻¹ v⁻¹ u^{1−γ} D²u` at `(point, t)`, with
/// every derivative taken by central differences of step `h`. Accepts `γ ∈ [0, 1)`.
pub fn transform_identity_residual(field: AnalyticField, gamma: f64, point: Point, t: f64, h: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid("gamma", format!("must lie in [0, 1), got {gamma}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", format!("must be positive, got {h}")));
    }
    let alpha = gamma / (2.0 - gamma);
    let p = (2.0 - gamma) / 2.0;
    let dim = field.dim();
    let (u, _, d2u) = stencil(|q| field.eval(q, t), point, h, dim)?;
    let (v, dv, d2v) = stencil(|q| field.eval(q, t).powf(p), point, h, dim)?;
    let lhs = d2v.add(&SymMatrix::outer(dim, dv).scale(alpha / v));
    let rhs = d2u.scale(u.powf(1.0 - gamma) / ((1.0 + alpha) * v));
    Ok(lhs.sub(&rhs).frobenius())
}

/// Right-hand side coefficient `f(x,t)` in `F(D²v + δv⁻¹∇v⊗∇v) − ∂ₜv = f v⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SourceField {
    Zero,
    Constant(f64),
    /// `f = B_ε(v^{1+α})/(1+α)`, the source inherited by `v = u^{(2−γ)/2}`.
    Implied(PenalizationParams),
}

impl SourceField {
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            SourceField::Zero => 0.0,
            SourceField::Constant(c) => *c,
            SourceField::Implied(p) => p.beta_eps(v.powf(1.0 + p.alpha())) / (1.0 + p.alpha()),
        }
    }

    /// A priori bound on `‖f‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            SourceField::Zero => 0.0,
            SourceField::Constant(c) => c.abs(),
            SourceField::Implied(p) => p.gamma() / (1.0 + p.alpha()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralEqSpec {
    pub operator: OperatorSpec,
    pub delta: f64,
    pub source: SourceField,
}

impl GeneralEqSpec {
    pub fn new(operator: OperatorSpec, delta: f64, source: SourceField) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta", format!("must be finite and nonnegative, got {delta}")));
        }
        if let SourceField::Constant(c) = source {
            if !c.is_finite() {
                return Err(Error::invalid("f", "must be finite"));
            }
        }
        Ok(GeneralEqSpec { operator, delta, source })
    }

    /// The equation satisfied by `v = u^{(2−γ)/2}` when `u` solves the penalized problem.
    pub fn for_transformed(operator: OperatorSpec, params: PenalizationParams) -> Self {
        GeneralEqSpec { operator, delta: params.alpha(), source: SourceField::Implied(params) }
    }
}

/// `|F(x,t, D²v + δv⁻¹∇v⊗∇v) − ∂ₜv − f v⁻¹|` per interior node (backward time
/// difference); zero at level 0 and on the spatial boundary.
pub fn general_eq_residual(v: &GridFunction, geq: &GeneralEqSpec) -> Result<GridFunction> {
    let grid = v.grid();
    if grid.levels() < 2 {
        return Err(Error::Precondition("residual needs at least 2 levels".into()));
    }
    let nodes = grid.node_count();
    for level in 0..grid.levels() {
        for node in grid.interior_nodes() {
            let s = v.at(node, level);
            if s <= 0.0 {
                return Err(Error::Precondition(format!("v = {s} ≤ 0 at node {node}, level {level}")));
            }
        }
    }
    let mut values = vec![0.0; nodes * grid.levels()];
    for level in 1..grid.levels() {
        let (prev, cur) = (v.level(level - 1), v.level(level));
        let t = grid.time(level);
        for node in grid.interior_nodes() {
            let s = cur[node];
            let m = hessian_at(grid, cur, node).add(&SymMatrix::outer(grid.dim(), gradient_at(grid, cur, node)).scale(geq.delta / s));
            let f = evaluate_F(&geq.operator, grid.point(node), t, &m)?;
            values[level * nodes + node] = (f - (s - prev[node]) / grid.dt() - geq.source.eval(s) / s).abs();
        }
    }
    GridFunction::new(grid.clone(), values)
}

/// Largest implied source value `B_ε(v^{1+α})/(1+α)` over interior nodes.
pub fn implied_source_max(v: &GridFunction, params: &PenalizationParams) -> f64 {
    let f = SourceField::Implied(*params);
    let grid = v.grid();
    (0..grid.levels())
        .flat_map(|level| grid.interior_nodes().map(move |node| (node, level)))
        .map(|(node, level)| f.eval(v.at(node, level)))
        .fold(0.0, f64::max)
}

/// `v_κ(x,t) = v(κx, κ²t)/κ^θ` with dyadic `κ = 2^{−m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RescaleParams {
    kappa: f64,
    theta: f64,
}

impl RescaleParams {
    pub fn new(kappa: f64, theta: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::invalid("kappa", format!("must lie in (0, 1], got {kappa}")));
        }
        let m = -kappa.log2();
        if (m - m.round()).abs() > 1e-12 {
            return Err(Error::invalid("kappa", format!("{kappa} is not a power 2^-m")));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::invalid("theta", format!("must be finite and nonnegative, got {theta}")));
        }
        Ok(RescaleParams { kappa: 2f64.powi(-(m.round() as i32)), theta })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `e(θ, γ) = θ(γ−1) + 2 − θ`, the power of κ multiplying the rescaled source.
pub fn rescaled_source_exponent(theta: f64, gamma: f64) -> f64 {
    theta * (gamma - 1.0) + 2.0 - theta
}

/// `ε·κ^{−θ/(1+α)}`, the penalization parameter seen by `v_κ`.
pub fn rescaled_eps(params: &PenalizationParams, rp: &RescaleParams) -> f64 {
    params.eps() * rp.kappa.powf(-rp.theta / (1.0 + params.alpha()))
}

/// Source of the rescaled problem: `κ^{e} B_{ε'}(v_κ) v_κ^{γ−1}`.
pub fn rescaled_source(params: &PenalizationParams, rp: &RescaleParams) -> Result<SourceTerm> {
    let scaled = params.with_eps(rescaled_eps(params, rp))?;
    let prefactor = rp.kappa.powf(rescaled_source_exponent(rp.theta, params.gamma()));
    Ok(SourceTerm::Penalized { params: scaled, prefactor })
}

/// Resamples `v` into `v_κ` on the same box with spacing `h/κ` and time step
/// `dt/κ²`. Every sample lands exactly on a node of the original grid, so the
/// box must contain the origin as a node and `(N−1)κ` must be an integer.
pub fn rescale_field(v: &GridFunction, rp: &RescaleParams) -> Result<GridFunction> {
    let grid = v.grid();
    let kappa = rp.kappa;
    let origin = -grid.lo() / grid.h();
    if grid.lo() > 0.0 || grid.hi() < 0.0 || (origin - origin.round()).abs() > 1e-9 {
        return Err(Error::Precondition("rescaling needs the origin to be a grid node".into()));
    }
    let cells = (grid.n() - 1) as f64 * kappa;
    if (cells - cells.round()).abs() > 1e-9 || cells.round() < 2.0 {
        return Err(Error::Precondition(format!("(N−1)κ = {cells} must be an integer ≥ 2")));
    }
    let n_new = cells.round() as usize + 1;
    let scaled = SpaceTimeGrid::from_parts(grid.dim(), grid.lo(), grid.hi(), n_new, grid.dt() / (kappa * kappa), grid.levels());
    let o_new = -scaled.lo() / scaled.h();
    if (o_new - o_new.round()).abs() > 1e-9 {
        return Err(Error::Precondition("origin is not a node of the rescaled grid".into()));
    }
    // κ x'_j = (j − o') κ h' = (j − o') h, which is old node o + (j − o')
    let shift = origin.round() as isize - o_new.round() as isize;
    let map_axis = |j: usize| (j as isize + shift) as usize;
    let scale = kappa.powf(rp.theta);
    let nodes_old = grid.node_count();
    let mut values = Vec::with_capacity(scaled.node_count() * scaled.levels());
    for level in 0..scaled.levels() {
        let src = &v.values()[level * nodes_old..(level + 1) * nodes_old];
        for node in 0..scaled.node_count() {
            let [i, j] = scaled.multi_index(node);
            let old = match grid.dim() {
                1 => grid.node_index([map_axis(i), 0]),
                _ => grid.node_index([map_axis(i), map_axis(j)]),
            };
            values.push(src[old] / scale);
        }
    }
    GridFunction::new(scaled, values)
}

/// Sign of the Pucci operator in a comparison trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PucciSign {
    Plus,
    Minus,
}

/// `M^±_{λ,Λ}(D²v) + c|∇v|² − ∂ₜv + M_const = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonEquation {
    pub sign: PucciSign,
    pub ellipticity: EllipticityParams,
    pub c: f64,
    pub m_const: f64,
    pub safety: f64,
}

impl ComparisonEquation {
    pub fn new(sign: PucciSign, ellipticity: EllipticityParams, c: f64, m_const: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid("c", format!("must be finite and nonnegative, got {c}")));
        }
        if !m_const.is_finite() {
            return Err(Error::invalid("M_const", "must be finite"));
        }
        Ok(ComparisonEquation { sign, ellipticity, c, m_const, safety: 0.5 })
    }

    fn operator(&self, dim: usize) -> OperatorSpec {
        match self.sign {
            PucciSign::Plus => OperatorSpec::pucci_plus(dim, self.ellipticity),
            PucciSign::Minus => OperatorSpec::pucci_minus(dim, self.ellipticity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub passed: bool,
    pub tol: f64,
    /// `max(v_sub − v_super)` over all nodes and levels.
    pub worst_gap: f64,
    /// First (level, node) in storage order with `v_sub > v_super + tol`.
    pub first_violation: Option<(usize, usize)>,
    pub steps: usize,
}

/// Evolves `sub0 ≤ super0` (initial level; boundary nodes stay fixed) under the
/// explicit scheme for the comparison equation and checks the ordering at
/// every stored level. `dt = safety/(2dΛ/h² + 2c·G/h)` with `G` the current
/// largest central-difference gradient of either field.
pub fn comparison_trial(
    grid: &SpaceTimeGrid,
    sub0: &[f64],
    super0: &[f64],
    eq: &ComparisonEquation,
    exec: Execution,
) -> Result<ComparisonReport> {
    let nodes = grid.node_count();
    if sub0.len() != nodes || super0.len() != nodes {
        return Err(Error::GridMismatch);
    }
    if let Some(node) = sub0.iter().zip(super0).position(|(a, b)| a > b || !a.is_finite() || !b.is_finite()) {
        return Err(Error::Precondition(format!("data are not ordered at node {node}")));
    }
    const TOL: f64 = 1e-8;
    let op = eq.operator(grid.dim());
    let h = grid.h();
    let diffusion = 2.0 * grid.dim() as f64 * eq.ellipticity.cap_lambda() / (h * h);
    let max_grad = |u: &[f64]| {
        grid.interior_nodes()
            .map(|node| gradient_at(grid, u, node).iter().fold(0.0f64, |m, g| m.max(g.abs())))
            .fold(0.0, f64::max)
    };
    let advance = |u: &[f64], dt: f64, out: &mut [f64]| {
        par::fill_indexed(exec, out, |node| {
            if !grid.is_interior(node) {
                return u[node];
            }
            let g = gradient_at(grid, u, node);
            let f = evaluate_F(&op, grid.point(node), 0.0, &hessian_at(grid, u, node)).unwrap_or(f64::NAN);
            u[node] + dt * (f + eq.c * (g[0] * g[0] + g[1] * g[1]) + eq.m_const)
        });
    };
    let (mut a, mut b) = (sub0.to_vec(), super0.to_vec());
    let (mut na, mut nb) = (vec![0.0; nodes], vec![0.0; nodes]);
    let mut worst = a.iter().zip(&b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max);
    let mut first = None;
    let mut steps = 0;
    for level in 1..grid.levels() {
        let mut remaining = grid.dt();
        while remaining > 0.0 {
            let g = max_grad(&a).max(max_grad(&b));
            let mut dt = eq.safety / (diffusion + 2.0 * eq.c * g / h);
            if dt >= remaining * (1.0 - 1e-12) {
                dt = remaining;
            }
            advance(&a, dt, &mut na);
            advance(&b, dt, &mut nb);
            std::mem::swap(&mut a, &mut na);
            std::mem::swap(&mut b, &mut nb);
            remaining -= dt;
            steps += 1;
            if let Some(node) = a.iter().chain(&b).position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { node: node % nodes, level });
            }
        }
        for (node, (x, y)) in a.iter().zip(&b).enumerate() {
            let gap = x - y;
            worst = worst.max(gap);
            if gap > TOL && first.is_none() {
                first = Some((level, node));
            }
        }
    }
    Ok(ComparisonReport { passed: first.is_none(), tol: TOL, worst_gap: worst, first_violation: first, steps })
}

/// One randomized trial of [`random_comparison_trials`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub sign: PucciSign,
    pub c: f64,
    pub m_const: f64,
    pub report: ComparisonReport,
}

/// Runs `count` trials on `[−1,1]` with `n` nodes over `(−0.05, 0]`, cycling
/// through both signs, `c ∈ {0, 0.5}` and `M_const ∈ {0, 1}`. Data are random
/// trigonometric sums with `super0 = sub0 + (nonnegative random perturbation)`.
/// Trials run in parallel under `exec`; trial `i` uses seed `seed + i`.
pub fn random_comparison_trials(count: usize, n: usize, seed: u64, exec: Execution) -> Result<Vec<TrialRecord>> {
    let grid = SpaceTimeGrid::from_parts(1, -1.0, 1.0, n, 0.01, 6);
    let ellipticity = EllipticityParams::new(0.5, 2.0, crate::operators::Modulus::Zero)?;
    par::try_map_range(exec, count, |index| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
        let sign = if index % 2 == 0 { PucciSign::Plus } else { PucciSign::Minus };
        let c = if (index / 2) % 2 == 0 { 0.0 } else { 0.5 };
        let m_const = if (index / 4) % 2 == 0 { 0.0 } else { 1.0 };
        let eq = ComparisonEquation::new(sign, ellipticity, c, m_const)?;
        let modes: Vec<(f64, f64)> = (1..=4).map(|k| (rng.gen_range(-0.5..0.5) / k as f64, rng.gen_range(0.0..6.3))).collect();
        let bumps: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(0.0..0.3), rng.gen_range(-0.8..0.8))).collect();
        let lift = rng.gen_range(0.0..0.2);
        let x = |node: usize| grid.point(node)[0];
        let sub0: Vec<f64> = (0..grid.node_count())
            .map(|node| modes.iter().enumerate().map(|(k, (a, ph))| a * ((k + 1) as f64 * 3.0 * x(node) + ph).sin()).sum())
            .collect();
        let super0: Vec<f64> = (0..grid.node_count())
            .map(|node| sub0[node] + lift + bumps.iter().map(|(a, m)| a * (-(x(node) - m).powi(2) * 20.0).exp()).sum::<f64>())
            .collect();
        let report = comparison_trial(&grid, &sub0, &super0, &eq, Execution::Sequential)?;
        Ok(TrialRecord { index, sign, c, m_const, report })
    })
}

/// Constants of the quadratic time barriers `h±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBarrierParams {
    pub l: f64,
    pub k: f64,
    pub k_bar: f64,
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
    pub n: usize,
    pub cap_lambda: f64,
}

impl TimeBarrierParams {
    /// `K = 2L` and `K̄ = 2nΛK + 4c₁K² + M`.
    pub fn canonical(l: f64, c1: f64, c2: f64, m: f64, n: usize, cap_lambda: f64) -> Result<Self> {
        if !(l > 1.0) {
            return Err(Error::invalid("L", format!("must exceed 1, got {l}")));
        }
        if c1 < 0.0 || c2 < 0.0 || m < 0.0 {
            return Err(Error::invalid("c1, c2, M", "must be nonnegative"));
        }
        let k = 2.0 * l;
        let k_bar = 2.0 * n as f64 * cap_lambda * k + 4.0 * c1 * k * k + m;
        Ok(TimeBarrierParams { l, k, k_bar, c1, c2, m, n, cap_lambda })
    }
}

/// `h±(x,t) = v0 ± L ± K|x|² ± K̄(t−τ₁)` sampled on `grid`.
pub fn time_barrier(grid: &SpaceTimeGrid, v0: f64, tbp: &TimeBarrierParams, tau1: f64) -> Result<(GridFunction, GridFunction)> {
    let shape = move |x: Point, t: f64| tbp.l + tbp.k * (x[0] * x[0] + x[1] * x[1]) + tbp.k_bar * (t - tau1);
    let lower = GridFunction::from_fn(grid.clone(), |x, t| v0 - shape(x, t))?;
    let upper = GridFunction::from_fn(grid.clone(), |x, t| v0 + shape(x, t))?;
    Ok((lower, upper))
}

/// `¼ min{1, 2L/(M + 4nΛL + 16c₁L²)}`, defined for `L > 1`.
pub fn kappa0(l: f64, m: f64, n: usize, cap_lambda: f64, c1: f64) -> Result<f64> {
    if !(l > 1.0) {
        return Err(Error::invalid("L", format!("must exceed 1, got {l}")));
    }
    Ok(0.25 * (2.0 * l / (m + 4.0 * n as f64 * cap_lambda * l + 16.0 * c1 * l * l)).min(1.0))
}

/// `¼ min{1, 8C/(‖f‖_∞ + 16nΛC + 64δΛC²)}`.
pub fn kappa0_thm(c: f64, f_inf: f64, n: usize, cap_lambda: f64, delta: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::invalid("C", format!("must be positive, got {c}")));
    }
    let n = n as f64;
    Ok(0.25 * (8.0 * c / (f_inf + 16.0 * n * cap_lambda * c + 64.0 * delta * cap_lambda * c * c)).min(1.0))
}

/// `sup_{t ∈ (−window, 0]} sup_{|x−y| ≤ radius} |v(x,t) − v(y,t)|` around `center`.
pub fn spatial_oscillation_bound(v: &GridFunction, center: usize, radius: f64, window: f64) -> f64 {
    let grid = v.grid();
    let ball = ball_nodes(grid, center, radius);
    levels_in_window(grid, window)
        .map(|level| {
            let c = v.at(center, level);
            ball.iter().map(|&node| (v.at(node, level) - c).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `sup_{t ∈ (−window, 0]} |v(y,0) − v(y,t)|`.
pub fn time_oscillation(v: &GridFunction, node: usize, window: f64) -> f64 {
    let grid = v.grid();
    let last = v.at(node, grid.final_level());
    levels_in_window(grid, window).map(|level| (last - v.at(node, level)).abs()).fold(0.0, f64::max)
}

/// Stored levels with `t ∈ (−window, 0]`.
pub(crate) fn levels_in_window(grid: &SpaceTimeGrid, window: f64) -> impl Iterator<Item = usize> + '_ {
    let cut = -window + 1e-9 * grid.dt();
    (0..grid.levels()).filter(move |&level| grid.time(level) > cut)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeOscillationReport {
    pub l: f64,
    pub kappa0: f64,
    pub oscillation: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Measures `L` on unit-ball slices over `t ∈ (−1/4, 0]`, computes κ₀ with
/// `c₁ = δΛ` and `M = m`, and checks `sup_{(−κ₀,0]} |v(0,0) − v(0,t)| ≤ 8L + 10⁻⁶`.
pub fn check_time_oscillation(v: &GridFunction, center: usize, m: f64, delta: f64, cap_lambda: f64) -> Result<TimeOscillationReport> {
    let grid = v.grid();
    if grid.horizon() < 0.25 - 1e-12 {
        return Err(Error::Precondition(format!("need a horizon of at least 1/4, got {}", grid.horizon())));
    }
    let l = spatial_oscillation_bound(v, center, 1.0, 0.25);
    let k0 = kappa0(l, m, grid.dim(), cap_lambda, delta * cap_lambda)?;
    let oscillation = time_oscillation(v, center, k0);
    let bound = 8.0 * l + 1e-6;
    Ok(TimeOscillationReport { l, kappa0: k0, oscillation, bound, passed: oscillation <= bound })
}
