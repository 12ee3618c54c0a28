//! Uniform space-time grids on boxes, grid functions and central-difference calculus.
//!
//! Time runs over `(-T, 0]` with the final stored level exactly at `t = 0`.
//! Nodes are numbered `i + n * j` in 2D, `i` running along the first axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Face, Result};
use crate::matrix::SymMatrix;

/// A point in space, padded with zeros beyond the grid dimension.
pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    dim: usize,
    lo: f64,
    hi: f64,
    n: usize,
    h: f64,
    horizon: f64,
    dt: f64,
    levels: usize,
}

/// Builds a grid on `[a, b]^d × (-T, 0]` with `n` nodes per axis and stored time step `dt`.
///
/// The number of levels is `ceil(T / dt) + 1`; the initial level sits at
/// `-(levels - 1) dt`, which equals `-T` whenever `dt` divides `T`.
pub fn make_grid(d: usize, a: f64, b: f64, n: usize, horizon: f64, dt: f64) -> Result<SpaceTimeGrid> {
    if !(d == 1 || d == 2) {
        return Err(Error::invalid("d", format!("{d} not in {{1, 2}}")));
    }
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::invalid("a, b", format!("need finite a < b, got [{a}, {b}]")));
    }
    if n < 3 {
        return Err(Error::invalid("N", format!("need at least 3 nodes per axis, got {n}")));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::invalid("T", format!("must be finite and positive, got {horizon}")));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::invalid("dt", format!("must be finite and positive, got {dt}")));
    }
    let ratio = horizon / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    if steps > 1e8 {
        return Err(Error::invalid("dt", format!("{steps} stored levels is too many")));
    }
    Ok(SpaceTimeGrid {
        dim: d,
        lo: a,
        hi: b,
        n,
        h: (b - a) / (n - 1) as f64,
        horizon,
        dt,
        levels: steps as usize + 1,
    })
}

impl SpaceTimeGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn levels(&self) -> usize {
        self.levels
    }
    pub fn node_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }
    pub fn final_level(&self) -> usize {
        self.levels - 1
    }

    pub fn time(&self, level: usize) -> f64 {
        -((self.levels - 1 - level) as f64) * self.dt
    }

    pub fn initial_time(&self) -> f64 {
        self.time(0)
    }

    pub fn coord(&self, index: usize) -> f64 {
        self.lo + index as f64 * self.h
    }

    pub fn multi_index(&self, node: usize) -> [usize; 2] {
        match self.dim {
            1 => [node, 0],
            _ => [node % self.n, node / self.n],
        }
    }

    pub fn node_index(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] + self.n * idx[1],
        }
    }

    pub fn point(&self, node: usize) -> Point {
        let [i, j] = self.multi_index(node);
        match self.dim {
            1 => [self.coord(i), 0.0],
            _ => [self.coord(i), self.coord(j)],
        }
    }

    pub fn is_interior(&self, node: usize) -> bool {
        let idx = self.multi_index(node);
        (0..self.dim).all(|k| idx[k] > 0 && idx[k] < self.n - 1)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&node| self.is_interior(node))
    }

    /// Node nearest to `p` (coordinates clamped to the box).
    pub fn nearest_node(&self, p: Point) -> usize {
        let mut idx = [0usize; 2];
        for k in 0..self.dim {
            let r = ((p[k] - self.lo) / self.h).round();
            idx[k] = r.clamp(0.0, (self.n - 1) as f64) as usize;
        }
        self.node_index(idx)
    }

    /// Stored level nearest to time `t`.
    pub fn nearest_level(&self, t: f64) -> usize {
        let k = (self.levels - 1) as f64 + t / self.dt;
        k.round().clamp(0.0, (self.levels - 1) as f64) as usize
    }

    /// The same spatial grid restricted to levels `first..levels`.
    pub fn time_window(&self, first: usize) -> Result<SpaceTimeGrid> {
        if first >= self.levels - 1 {
            return Err(Error::Precondition(format!(
                "time window must keep at least 2 levels (first = {first}, levels = {})",
                self.levels
            )));
        }
        let steps = self.levels - 1 - first;
        Ok(SpaceTimeGrid { horizon: steps as f64 * self.dt, levels: steps + 1, ..self.clone() })
    }

    /// Same geometry with a different stored time step (fresh level count).
    pub fn with_dt(&self, dt: f64) -> Result<SpaceTimeGrid> {
        make_grid(self.dim, self.lo, self.hi, self.n, self.horizon, dt)
    }

    pub(crate) fn from_parts(
        dim: usize,
        lo: f64,
        hi: f64,
        n: usize,
        dt: f64,
        levels: usize,
    ) -> SpaceTimeGrid {
        SpaceTimeGrid {
            dim,
            lo,
            hi,
            n,
            h: (hi - lo) / (n - 1) as f64,
            horizon: (levels - 1) as f64 * dt,
            dt,
            levels,
        }
    }
}

/// A real field on every (node, level) pair of a grid; level-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.node_count() * grid.levels();
        if values.len() != expected {
            return Err(Error::Precondition(format!(
                "grid function needs {expected} values, got {}",
                values.len()
            )));
        }
        let nodes = grid.node_count();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: pos % nodes, level: pos / nodes });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        let len = grid.node_count() * grid.levels();
        GridFunction { grid, values: vec![0.0; len] }
    }

    /// Samples `f(x, t)` at every node and level.
    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(Point, f64) -> f64) -> Result<Self> {
        let nodes = grid.node_count();
        let mut values = Vec::with_capacity(nodes * grid.levels());
        for level in 0..grid.levels() {
            let t = grid.time(level);
            values.extend((0..nodes).map(|node| f(grid.point(node), t)));
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, node: usize, level: usize) -> f64 {
        self.values[level * self.grid.node_count() + node]
    }

    pub fn level(&self, level: usize) -> &[f64] {
        let nodes = self.grid.node_count();
        &self.values[level * nodes..(level + 1) * nodes]
    }

    pub fn final_level(&self) -> &[f64] {
        self.level(self.grid.final_level())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise map; fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Restriction to levels `first..` (see [`SpaceTimeGrid::time_window`]).
    pub fn time_window(&self, first: usize) -> Result<Self> {
        let grid = self.grid.time_window(first)?;
        let nodes = self.grid.node_count();
        Ok(GridFunction { values: self.values[first * nodes..].to_vec(), grid })
    }

    /// Largest |self − other| over all nodes and levels.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_stencil(&self, node: usize, level: usize) -> Result<()> {
        if node >= self.grid.node_count() || level >= self.grid.levels() {
            return Err(Error::OutOfRange { node, level });
        }
        if !self.grid.is_interior(node) {
            return Err(Error::BoundaryNode { node });
        }
        Ok(())
    }
}

/// Central-difference gradient `(u[i+1] - u[i-1]) / 2h` per axis.
pub fn discrete_gradient(gf: &GridFunction, node: usize, level: usize) -> Result<Point> {
    gf.check_stencil(node, level)?;
    Ok(gradient_at(gf.grid(), gf.level(level), node))
}

/// Central-difference Hessian; the cross term uses the four-point corner stencil.
pub fn discrete_hessian(gf: &GridFunction, node: usize, level: usize) -> Result<SymMatrix> {
    gf.check_stencil(node, level)?;
    Ok(hessian_at(gf.grid(), gf.level(level), node))
}

/// Unchecked gradient on one level slice; `node` must be interior.
pub(crate) fn gradient_at(grid: &SpaceTimeGrid, u: &[f64], node: usize) -> Point {
    let inv2h = 0.5 / grid.h();
    match grid.dim() {
        1 => [(u[node + 1] - u[node - 1]) * inv2h, 0.0],
        _ => {
            let n = grid.n();
            [(u[node + 1] - u[node - 1]) * inv2h, (u[node + n] - u[node - n]) * inv2h]
        }
    }
}

/// Unchecked Hessian on one level slice; `node` must be interior.
pub(crate) fn hessian_at(grid: &SpaceTimeGrid, u: &[f64], node: usize) -> SymMatrix {
    let h2 = grid.h() * grid.h();
    let c = u[node];
    match grid.dim() {
        1 => SymMatrix::scalar((u[node + 1] - 2.0 * c + u[node - 1]) / h2),
        _ => {
            let n = grid.n();
            let xx = (u[node + 1] - 2.0 * c + u[node - 1]) / h2;
            let yy = (u[node + n] - 2.0 * c + u[node - n]) / h2;
            let xy = (u[node + 1 + n] - u[node + 1 - n] - u[node - 1 + n] + u[node - 1 - n])
                / (4.0 * h2);
            SymMatrix::new2(xx, xy, yy)
        }
    }
}

/// Intrinsic parabolic cylinder `B_radius(center) × (s - radius², s]`, centered on a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub node: usize,
    pub level: usize,
    pub radius: f64,
}

impl Cylinder {
    pub fn new(node: usize, level: usize, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Cylinder { node, level, radius })
    }

    /// Checks that the closed ball and the time interval lie within the grid.
    pub fn check_inside(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if self.node >= grid.node_count() || self.level >= grid.levels() {
            return Err(Error::OutOfRange { node: self.node, level: self.level });
        }
        let tol = 1e-12 * (grid.hi() - grid.lo());
        let center = grid.point(self.node);
        for (axis, &c) in center.iter().enumerate().take(grid.dim()) {
            if c - self.radius < grid.lo() - tol {
                return Err(Error::CylinderEscapes { face: Face::Lower(axis), radius: self.radius });
            }
            if c + self.radius > grid.hi() + tol {
                return Err(Error::CylinderEscapes { face: Face::Upper(axis), radius: self.radius });
            }
        }
        let s = grid.time(self.level);
        if s - self.radius * self.radius < grid.initial_time() - 1e-9 * grid.dt() {
            return Err(Error::CylinderEscapes { face: Face::Initial, radius: self.radius });
        }
        Ok(())
    }
}

/// All (node, level) pairs with |x − y| ≤ ρ and s − ρ² < t ≤ s, in enumeration order
/// (level-major, node ascending).
pub fn cylinder_nodes(grid: &SpaceTimeGrid, cyl: &Cylinder) -> Result<Vec<(usize, usize)>> {
    cyl.check_inside(grid)?;
    let spatial = ball_nodes(grid, cyl.node, cyl.radius);
    let s = grid.time(cyl.level);
    let t_open = s - cyl.radius * cyl.radius + 1e-9 * grid.dt();
    let mut out = Vec::new();
    for level in (0..=cyl.level).filter(|&k| grid.time(k) > t_open) {
        out.extend(spatial.iter().map(|&node| (node, level)));
    }
    Ok(out)
}

/// Nodes in the closed Euclidean ball of radius `radius` around `center`.
pub(crate) fn ball_nodes(grid: &SpaceTimeGrid, center: usize, radius: f64) -> Vec<usize> {
    let c = grid.multi_index(center);
    let reach = (radius / grid.h() + 1e-9).floor() as isize;
    let r2 = radius * radius * (1.0 + 1e-12);
    let h = grid.h();
    let n = grid.n() as isize;
    let mut out = Vec::new();
    let range = |ci: usize| {
        let ci = ci as isize;
        (ci - reach).max(0)..=(ci + reach).min(n - 1)
    };
    match grid.dim() {
        1 => {
            for i in range(c[0]) {
                let dx = (i - c[0] as isize) as f64 * h;
                if dx * dx <= r2 {
                    out.push(i as usize);
                }
            }
        }
        _ => {
            for j in range(c[1]) {
                for i in range(c[0]) {
                    let dx = (i - c[0] as isize) as f64 * h;
                    let dy = (j - c[1] as isize) as f64 * h;
                    if dx * dx + dy * dy <= r2 {
                        out.push(grid.node_index([i as usize, j as usize]));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_1d(n: usize) -> SpaceTimeGrid {
        make_grid(1, -1.0, 1.0, n, 1.0, 0.25).unwrap()
    }

    #[test]
    fn make_grid_examples() {
        let g = make_grid(1, -1.0, 1.0, 3, 1.0, 1.0).unwrap();
        assert_eq!(g.h(), 1.0);
        assert_eq!(g.levels(), 2);
        assert_eq!(g.time(g.final_level()), 0.0);
        assert_eq!(g.initial_time(), -1.0);
        assert_relative_eq!(make_grid(1, 0.0, 1.0, 101, 1.0, 0.1).unwrap().h(), 0.01, epsilon = 1e-15);
        assert_eq!(make_grid(2, -1.0, 1.0, 65, 1.0, 0.1).unwrap().h(), 0.03125);
    }

    #[test]
    fn make_grid_rejects_bad_sizes() {
        assert!(make_grid(1, 0.0, 1.0, 2, 1.0, 0.1).is_err());
        assert!(make_grid(1, 1.0, 1.0, 5, 1.0, 0.1).is_err());
        assert!(make_grid(1, 0.0, 1.0, 5, 0.0, 0.1).is_err());
        assert!(make_grid(1, 0.0, 1.0, 5, 1.0, -0.1).is_err());
        assert!(make_grid(1, 0.0, f64::NAN, 5, 1.0, 0.1).is_err());
        assert!(make_grid(3, 0.0, 1.0, 5, 1.0, 0.1).is_err());
        assert!(make_grid(1, 0.0, 1.0, 5, f64::INFINITY, 0.1).is_err());
    }

    #[test]
    fn levels_round_up_for_non_divisible_horizon() {
        let g = make_grid(1, 0.0, 1.0, 5, 1.0, 0.3).unwrap();
        assert_eq!(g.levels(), 5);
        assert!(g.initial_time() <= -1.0);
        // 0.3 / 0.1 is not exactly 3 in floating point
        assert_eq!(make_grid(1, 0.0, 1.0, 5, 0.3, 0.1).unwrap().levels(), 4);
    }

    #[test]
    fn coordinates_reproduce_from_indices() {
        let g = make_grid(2, -1.0, 1.0, 9, 1.0, 0.5).unwrap();
        for node in 0..g.node_count() {
            let idx = g.multi_index(node);
            assert_eq!(g.node_index(idx), node);
            let p = g.point(node);
            assert_eq!(p[0], -1.0 + idx[0] as f64 * 0.25);
            assert_eq!(p[1], -1.0 + idx[1] as f64 * 0.25);
        }
    }

    #[test]
    fn gradient_exact_on_affine_and_quadratic() {
        let g = unit_1d(21);
        let affine = GridFunction::from_fn(g.clone(), |p, _| p[0]).unwrap();
        let constant = GridFunction::from_fn(g.clone(), |_, _| 3.5).unwrap();
        for node in g.interior_nodes() {
            assert_relative_eq!(discrete_gradient(&affine, node, 0).unwrap()[0], 1.0, epsilon = 1e-13);
            assert_eq!(discrete_gradient(&constant, node, 0).unwrap()[0], 0.0);
        }
        let g = make_grid(1, 0.0, 1.0, 11, 1.0, 1.0).unwrap();
        let sq = GridFunction::from_fn(g.clone(), |p, _| p[0] * p[0]).unwrap();
        assert_relative_eq!(discrete_gradient(&sq, 5, 0).unwrap()[0], 1.0, epsilon = 1e-13);
    }

    #[test]
    fn stencils_reject_boundary_nodes() {
        let g = unit_1d(5);
        let f = GridFunction::zeros(g);
        assert!(matches!(discrete_gradient(&f, 0, 0), Err(Error::BoundaryNode { node: 0 })));
        assert!(matches!(discrete_hessian(&f, 4, 0), Err(Error::BoundaryNode { node: 4 })));
        assert!(matches!(discrete_hessian(&f, 2, 99), Err(Error::OutOfRange { .. })));
        let g2 = make_grid(2, -1.0, 1.0, 5, 1.0, 1.0).unwrap();
        let f2 = GridFunction::zeros(g2.clone());
        assert!(discrete_hessian(&f2, g2.node_index([2, 0]), 0).is_err());
        assert!(discrete_hessian(&f2, g2.node_index([2, 2]), 0).is_ok());
    }

    #[test]
    fn hessian_exact_on_quadratics_and_bilinear() {
        for n in [5, 17, 33] {
            let g = unit_1d(n);
            let sq = GridFunction::from_fn(g.clone(), |p, _| p[0] * p[0]).unwrap();
            for node in g.interior_nodes() {
                assert_relative_eq!(discrete_hessian(&sq, node, 1).unwrap().get(0, 0), 2.0, epsilon = 1e-10);
            }
        }
        let g = make_grid(2, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let xy = GridFunction::from_fn(g.clone(), |p, _| p[0] * p[1]).unwrap();
        for node in g.interior_nodes() {
            let m = discrete_hessian(&xy, node, 0).unwrap();
            assert!(m.get(0, 0).abs() < 1e-12 && m.get(1, 1).abs() < 1e-12);
            assert_relative_eq!(m.get(0, 1), 1.0, epsilon = 1e-12);
            assert_eq!(m.rows()[0][1].to_bits(), m.rows()[1][0].to_bits());
        }
    }

    #[test]
    fn hessian_second_order_on_quartic() {
        // u = x^4, exact u'' = 12 x^2 at x = 1; oracle is the analytic value.
        let err = |n: usize| {
            let g = make_grid(1, 0.0, 2.0, n, 1.0, 1.0).unwrap();
            let f = GridFunction::from_fn(g.clone(), |p, _| p[0].powi(4)).unwrap();
            let node = g.nearest_node([1.0, 0.0]);
            assert_eq!(g.point(node)[0], 1.0);
            (discrete_hessian(&f, node, 0).unwrap().get(0, 0) - 12.0).abs()
        };
        let (e1, e2) = (err(21), err(41));
        assert_relative_eq!(e1 / e2, 4.0, epsilon = 1e-3);
    }

    #[test]
    fn cylinder_examples() {
        let g = make_grid(1, -1.0, 1.0, 5, 1.0, 0.25).unwrap();
        let center = g.nearest_node([0.0, 0.0]);
        let last = g.final_level();
        // ρ < h and ρ² < dt: only the center
        let tiny = cylinder_nodes(&g, &Cylinder::new(center, last, 0.3).unwrap()).unwrap();
        assert_eq!(tiny, vec![(center, last)]);
        // h = 0.5, dt = 0.25, ρ = 0.5: three nodes at t = 0, the level t = -0.25 excluded
        let c = cylinder_nodes(&g, &Cylinder::new(center, last, 0.5).unwrap()).unwrap();
        let xs: Vec<f64> = c.iter().map(|&(node, _)| g.point(node)[0]).collect();
        assert_eq!(xs, vec![-0.5, 0.0, 0.5]);
        assert!(c.iter().all(|&(_, level)| level == last));
        // distance to boundary + h escapes
        let err = cylinder_nodes(&g, &Cylinder::new(center, last, 1.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CylinderEscapes { face: Face::Lower(0), .. }));
        let right = g.nearest_node([0.5, 0.0]);
        let err = cylinder_nodes(&g, &Cylinder::new(right, last, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CylinderEscapes { .. }));
        assert!(err.to_string().contains("face"));
        // touching the boundary is allowed
        assert!(cylinder_nodes(&g, &Cylinder::new(center, last, 1.0).unwrap()).is_ok());
        // too deep in time
        let err = cylinder_nodes(&g, &Cylinder::new(center, 1, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CylinderEscapes { face: Face::Initial, .. }));
    }

    #[test]
    fn cylinder_uses_euclidean_ball_in_2d() {
        let g = make_grid(2, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
        let c = g.nearest_node([0.0, 0.0]);
        let nodes = cylinder_nodes(&g, &Cylinder::new(c, 1, 0.25).unwrap()).unwrap();
        // the four axis neighbours and the center; diagonals are at distance 0.354
        assert_eq!(nodes.len(), 5);
        let nodes = cylinder_nodes(&g, &Cylinder::new(c, 1, 0.5).unwrap()).unwrap();
        assert_eq!(nodes.len(), 13);
    }

    #[test]
    fn grid_function_rejects_nan_and_wrong_shape() {
        let g = unit_1d(5);
        assert!(GridFunction::new(g.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![0.0; g.node_count() * g.levels()];
        v[7] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(Error::NonFinite { node: 2, level: 1 })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cylinder_nodes_monotone_in_radius(r1 in 0.01f64..0.9, r2 in 0.01f64..0.9, i in 5usize..12) {
                let g = make_grid(2, -1.0, 1.0, 17, 1.0, 0.0625).unwrap();
                let (small, large) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                let center = g.node_index([i, 8]);
                let last = g.final_level();
                let a = cylinder_nodes(&g, &Cylinder::new(center, last, small).unwrap());
                let b = cylinder_nodes(&g, &Cylinder::new(center, last, large).unwrap());
                if let (Ok(a), Ok(b)) = (a, b) {
                    prop_assert!(a.iter().all(|p| b.contains(p)));
                }
            }

            #[test]
            fn hessian_exact_on_random_quadratic(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
                                                 p in -1.0f64..1.0, q in -1.0f64..1.0) {
                let g = make_grid(2, -1.0, 1.0, 9, 1.0, 1.0).unwrap();
                let f = GridFunction::from_fn(g.clone(), |x, _| {
                    a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + c * x[1] * x[1] + p * x[0] + q * x[1]
                }).unwrap();
                for node in g.interior_nodes() {
                    let m = discrete_hessian(&f, node, 0).unwrap();
                    prop_assert!((m.get(0, 0) - 2.0 * a).abs() < 1e-9);
                    prop_assert!((m.get(0, 1) - 2.0 * b).abs() < 1e-9);
                    prop_assert!((m.get(1, 1) - 2.0 * c).abs() < 1e-9);
                    let grad = discrete_gradient(&f, node, 0).unwrap();
                    let x = g.point(node);
                    prop_assert!((grad[0] - (2.0 * a * x[0] + 2.0 * b * x[1] + p)).abs() < 1e-9);
                }
            }
        }
    }
}
