//! Oscillation measurements over intrinsic cylinders, Hölder quotients,
//! gradient-to-power ratios, free-boundary growth, and log-log exponent fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ball_nodes, cylinder_nodes, discrete_gradient, gradient_at, Cylinder, GridFunction, SpaceTimeGrid};
use crate::operators::PenalizationParams;
use crate::verification::levels_in_window;

/// `max |u − u(y,s)|` over the cylinder.
pub fn oscillation(gf: &GridFunction, cyl: &Cylinder) -> Result<f64> {
    let c = gf.at(cyl.node, cyl.level);
    Ok(cylinder_nodes(gf.grid(), cyl)?
        .into_iter()
        .map(|(node, level)| (gf.at(node, level) - c).abs())
        .fold(0.0, f64::max))
}

/// `max u − u(y,s)` over the cylinder (one-sided growth from the center value).
pub fn growth_above(gf: &GridFunction, cyl: &Cylinder) -> Result<f64> {
    let c = gf.at(cyl.node, cyl.level);
    Ok(cylinder_nodes(gf.grid(), cyl)?
        .into_iter()
        .map(|(node, level)| gf.at(node, level) - c)
        .fold(0.0, f64::max))
}

/// `max |u(x,t) − u(y,s) − ∇u(y,s)·(x−y)|` over the cylinder, with the
/// central-difference gradient at the center.
pub fn plane_oscillation(gf: &GridFunction, cyl: &Cylinder) -> Result<f64> {
    let grid = gf.grid();
    let g = discrete_gradient(gf, cyl.node, cyl.level)?;
    let y = grid.point(cyl.node);
    let c = gf.at(cyl.node, cyl.level);
    Ok(cylinder_nodes(grid, cyl)?
        .into_iter()
        .map(|(node, level)| {
            let x = grid.point(node);
            (gf.at(node, level) - c - g[0] * (x[0] - y[0]) - g[1] * (x[1] - y[1])).abs()
        })
        .fold(0.0, f64::max))
}

/// Least-squares fit of `log value = slope · log radius + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    /// `log Ĉ`.
    pub intercept: f64,
    pub r2: f64,
    pub reference: Option<f64>,
    /// Points with a non-positive value left out of the fit.
    pub dropped: usize,
}

impl ExponentFit {
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }

    pub fn deviation(&self) -> Option<f64> {
        self.reference.map(|r| self.slope - r)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.deviation().is_some_and(|d| d.abs() <= tol)
    }

    pub fn record(&self, quantity: &str, center: Vec<f64>, pass: bool) -> FitRecord {
        FitRecord {
            quantity: quantity.to_string(),
            center,
            radii: self.radii.clone(),
            values: self.values.clone(),
            slope: self.slope,
            intercept: self.intercept,
            r2: self.r2,
            reference: self.reference,
            pass,
        }
    }
}

/// Serialized form of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub quantity: String,
    /// Spatial coordinates followed by the time.
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub reference: Option<f64>,
    pub pass: bool,
}

pub fn fit_exponent(radii: &[f64], values: &[f64], reference: Option<f64>) -> Result<ExponentFit> {
    if radii.len() != values.len() {
        return Err(Error::invalid("values", format!("{} radii but {} values", radii.len(), values.len())));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii", format!("must be positive and finite, got {r}")));
    }
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    let dropped = radii.len() - pts.len();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints { usable: pts.len(), dropped });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("radii", "need at least two distinct radii"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(ExponentFit { radii: radii.to_vec(), values: values.to_vec(), slope, intercept, r2, reference, dropped })
}

/// `ρ_m = 2^{−m}(b−a)/2` for `m = first, first+1, …`, at most `count` of them,
/// stopping before ρ drops below `4h`.
pub fn dyadic_radii(grid: &SpaceTimeGrid, first: u32, count: usize) -> Result<Vec<f64>> {
    let half = (grid.hi() - grid.lo()) / 2.0;
    let radii: Vec<f64> = (first..first + count as u32)
        .map(|m| half * 0.5f64.powi(m as i32))
        .take_while(|&r| r >= 4.0 * grid.h() * (1.0 - 1e-12))
        .collect();
    if radii.len() < 3 {
        return Err(Error::Precondition(format!(
            "only {} dyadic radii ≥ 4h are available (h = {})",
            radii.len(),
            grid.h()
        )));
    }
    Ok(radii)
}

/// Nodes within distance (b−a)/4 of the box center.
fn inner_half(grid: &SpaceTimeGrid) -> Vec<usize> {
    let mid = 0.5 * (grid.lo() + grid.hi());
    let center = grid.nearest_node([mid, if grid.dim() == 2 { mid } else { 0.0 }]);
    ball_nodes(grid, center, (grid.hi() - grid.lo()) / 4.0)
}

/// `max |v(x,t) − v(y,t)| / |x−y|^μ` over node pairs of the inner half-domain at one level.
pub fn spatial_holder_quotient(v: &GridFunction, mu: f64, level: usize) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::invalid("mu", format!("must lie in (0, 1), got {mu}")));
    }
    let grid = v.grid();
    if level >= grid.levels() {
        return Err(Error::OutOfRange { node: 0, level });
    }
    let nodes = inner_half(grid);
    let u = v.level(level);
    let mut best = 0.0f64;
    for (k, &a) in nodes.iter().enumerate() {
        let pa = grid.point(a);
        for &b in &nodes[k + 1..] {
            let pb = grid.point(b);
            let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            best = best.max((u[a] - u[b]).abs() / d.powf(mu));
        }
    }
    Ok(best)
}

/// `max |v(x,t) − v(x,s)| / |t−s|^{μ/2}` over level pairs with `t, s ∈ (−window, 0]`.
/// The time-regularity statement uses `window = κ₀/2`.
pub fn temporal_holder_quotient(v: &GridFunction, mu: f64, node: usize, window: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::invalid("mu", format!("must lie in (0, 1), got {mu}")));
    }
    let grid = v.grid();
    if node >= grid.node_count() {
        return Err(Error::OutOfRange { node, level: 0 });
    }
    let levels: Vec<usize> = levels_in_window(grid, window).collect();
    let mut best = 0.0f64;
    for (k, &a) in levels.iter().enumerate() {
        for &b in &levels[k + 1..] {
            let dt = (grid.time(a) - grid.time(b)).abs();
            best = best.max((v.at(node, a) - v.at(node, b)).abs() / dt.powf(mu / 2.0));
        }
    }
    Ok(best)
}

/// `max |∇u|²/u^θ` over interior nodes with `u > floor`, restricted to `region` if given.
pub fn gradient_bound_ratio(u: &GridFunction, theta: f64, floor: f64, region: Option<&Cylinder>) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid("theta", format!("must lie in (0, 1), got {theta}")));
    }
    if !(floor > 0.0) {
        return Err(Error::invalid("floor", format!("must be positive, got {floor}")));
    }
    let grid = u.grid();
    let candidates: Vec<(usize, usize)> = match region {
        Some(cyl) => cylinder_nodes(grid, cyl)?,
        None => (0..grid.levels()).flat_map(|l| (0..grid.node_count()).map(move |n| (n, l))).collect(),
    };
    let mut best: Option<f64> = None;
    for (node, level) in candidates {
        let s = u.at(node, level);
        if !grid.is_interior(node) || s <= floor {
            continue;
        }
        let g = gradient_at(grid, u.level(level), node);
        let ratio = (g[0] * g[0] + g[1] * g[1]) / s.powf(theta);
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| Error::NoQualifyingNodes(format!("no interior node with u > {floor}")))
}

/// Nodes on either side of the level set `{u = τ}`, per stored level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeBoundarySet {
    pub threshold: f64,
    /// For each level, `(node, above)` where `above` tells the side of the threshold.
    pub levels: Vec<Vec<(usize, bool)>>,
}

impl FreeBoundarySet {
    /// Threshold at the top of the penalization layer, `(1+σ₀)ε^{1+α}`.
    pub fn default_threshold(params: &PenalizationParams) -> f64 {
        params.tau_high()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(Vec::is_empty)
    }

    /// Nodes with `u ≤ τ` next to a node with `u > τ` at `level`.
    pub fn below(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        self.levels[level].iter().filter(|(_, above)| !above).map(|(n, _)| *n)
    }

    /// The below-threshold node of the crossing with the largest node index,
    /// the free-boundary point used for growth measurements.
    pub fn anchor(&self, level: usize) -> Option<usize> {
        self.below(level).max()
    }
}

fn neighbours(grid: &SpaceTimeGrid, node: usize) -> impl Iterator<Item = usize> + '_ {
    let [i, j] = grid.multi_index(node);
    let n = grid.n();
    let mut out = Vec::with_capacity(4);
    if i > 0 {
        out.push(grid.node_index([i - 1, j]));
    }
    if i + 1 < n {
        out.push(grid.node_index([i + 1, j]));
    }
    if grid.dim() == 2 {
        if j > 0 {
            out.push(grid.node_index([i, j - 1]));
        }
        if j + 1 < n {
            out.push(grid.node_index([i, j + 1]));
        }
    }
    out.into_iter()
}

pub fn detect_free_boundary(u: &GridFunction, tau: f64) -> Result<FreeBoundarySet> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
    }
    let grid = u.grid();
    let levels = (0..grid.levels())
        .map(|level| {
            let vals = u.level(level);
            (0..grid.node_count())
                .filter_map(|node| {
                    let above = vals[node] > tau;
                    neighbours(grid, node).any(|m| (vals[m] > tau) != above).then_some((node, above))
                })
                .collect()
        })
        .collect();
    Ok(FreeBoundarySet { threshold: tau, levels })
}

/// Fits `sup_{G_ρ(y,s)} (u − u(y,s))` against ρ at a free-boundary point.
///
/// Measuring growth relative to the value at the anchor keeps the fitted exponent
/// free of the constant offset the penalization layer leaves at the crossing.
pub fn fb_growth(u: &GridFunction, fb_node: usize, level: usize, radii: &[f64], reference: Option<f64>) -> Result<ExponentFit> {
    let values = radii
        .iter()
        .map(|&r| growth_above(u, &Cylinder::new(fb_node, level, r)?))
        .collect::<Result<Vec<f64>>>()?;
    fit_exponent(radii, &values, reference)
}

/// `max_r sup_{G_r} |u − u(y,s)| / r` over the given radii.
pub fn lipschitz_constant(u: &GridFunction, node: usize, level: usize, radii: &[f64]) -> Result<f64> {
    radii.iter().try_fold(0.0f64, |best, &r| Ok(best.max(oscillation(u, &Cylinder::new(node, level, r)?)? / r)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub radius: f64,
    pub sup: f64,
    pub bound: f64,
    pub passed: bool,
}

/// For each radius, compares `sup_{G_r} u` with `(Ĉ r^μ + u(y,s)^{1/(1+α)})^{1+α}` where Ĉ is
/// the measured parabolic Hölder constant of `v = u^{1/(1+α)}` on the largest cylinder:
/// its spatial quotient over the levels of that cylinder plus its temporal quotient at the center.
pub fn growth_bound_check(
    u: &GridFunction,
    alpha: f64,
    node: usize,
    level: usize,
    radii: &[f64],
    mu: f64,
) -> Result<Vec<GrowthCheck>> {
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let v = u.map(|s| s.max(0.0).powf(1.0 / (1.0 + alpha)))?;
    let grid = u.grid();
    let window = r_max * r_max;
    let spatial = levels_in_window(grid, window)
        .filter(|&l| l <= level)
        .try_fold(0.0f64, |m, l| Ok::<_, Error>(m.max(spatial_holder_quotient(&v, mu, l)?)))?;
    let temporal = temporal_holder_quotient(&v, mu, node, window)?;
    let c_hat = spatial + temporal;
    radii
        .iter()
        .map(|&r| {
            let sup = cylinder_nodes(grid, &Cylinder::new(node, level, r)?)?
                .into_iter()
                .map(|(n, l)| u.at(n, l))
                .fold(f64::NEG_INFINITY, f64::max);
            let bound = (c_hat * r.powf(mu) + v.at(node, level)).powf(1.0 + alpha);
            Ok(GrowthCheck { radius: r, sup, bound, passed: sup <= bound * (1.0 + 1e-12) })
        })
        .collect()
}
