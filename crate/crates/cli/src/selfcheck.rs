//! Operator and penalization property suites, run without a config.

use quench_core::operators::{
    check_homogeneity, check_uniform_parabolicity, pucci_minus, pucci_plus, Bump, EllipticityParams, Modulus, OperatorSpec,
    PenalizationParams,
};
use quench_core::verification::random_comparison_trials;
use quench_core::{make_grid, Execution, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

pub struct Line {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn line(name: &str, passed: bool, detail: String) -> Line {
    Line { name: name.into(), passed, detail }
}

fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

pub fn run(seed: u64) -> Result<Vec<Line>, CliError> {
    let core = |e: quench_core::Error| CliError::Numerics(e.to_string());
    let mut out = Vec::new();
    let ell = EllipticityParams::new(1.0, 2.0, Modulus::Zero).map_err(core)?;
    let grid = make_grid(2, -1.0, 1.0, 17, 0.5, 0.25).map_err(core)?;
    let catalog = [
        ("pucci_minus", OperatorSpec::pucci_minus(2, ell)),
        ("pucci_plus", OperatorSpec::pucci_plus(2, ell)),
        ("laplacian", OperatorSpec::laplacian(&grid)),
    ];
    for (name, spec) in &catalog {
        let up = check_uniform_parabolicity(spec, 2000, seed).map_err(core)?;
        out.push(line(&format!("parabolicity/{name}"), up.passed, format!("worst margin {:.3e}", up.worst_margin)));
        let hom = check_homogeneity(spec, 2000, seed.wrapping_add(1)).map_err(core)?;
        out.push(line(&format!("homogeneity/{name}"), hom.passed, format!("worst margin {:.3e}", hom.worst_margin)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut duality, mut envelope) = (0.0f64, true);
    for _ in 0..2000 {
        let m = SymMatrix::new2(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (lo, hi) = (pucci_minus(&m, 0.7, 2.3), pucci_plus(&m, 0.7, 2.3));
        duality = duality.max((hi + pucci_minus(&m.scale(-1.0), 0.7, 2.3)).abs());
        let c = rng.gen_range(0.7..=2.3);
        envelope &= lo <= c * m.trace() + 1e-12 && c * m.trace() <= hi + 1e-12;
    }
    out.push(line("pucci duality", duality <= 1e-12, format!("max |M⁺(M) + M⁻(−M)| = {duality:.1e}")));
    out.push(line("pucci envelope", envelope, "M⁻(M) ≤ c tr M ≤ M⁺(M), c ∈ [λ, Λ]".into()));

    let bump = Bump::standard();
    let mass = composite_simpson(|t| bump.density(t), 0.0, 1.0, 2000);
    out.push(line("bump mass", (mass - 1.0).abs() < 1e-10, format!("∫ϱ = {mass:.12}")));

    let p = PenalizationParams::new(0.5, 0.1, 0.1).map_err(core)?;
    let (mut prev, mut monotone, mut bounded) = (0.0, true, true);
    for k in 0..=20_000 {
        let s = -0.01 + 0.08 * k as f64 / 20_000.0;
        let b = p.beta_eps(s);
        monotone &= b + 1e-12 >= prev && (0.0..=p.gamma()).contains(&b);
        bounded &= p.source(s) <= p.source_bound() && (s > p.tau_low() || p.source(s) == 0.0);
        prev = b;
    }
    out.push(line("beta monotone in [0, γ]", monotone, "20001 samples".into()));
    out.push(line("source bounded", bounded, format!("bound {:.4}", p.source_bound())));

    let trials = random_comparison_trials(50, 129, seed, Execution::default()).map_err(core)?;
    let failed = trials.iter().filter(|t| !t.report.passed).count();
    let gap = trials.iter().map(|t| t.report.worst_gap).fold(f64::INFINITY, f64::min);
    out.push(line("comparison trials", failed == 0, format!("{failed}/50 failed, smallest gap {gap:.3e}")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = composite_simpson(|x| x * x * x - x, 0.0, 2.0, 3);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn suites_pass() {
        let lines = run(7).unwrap();
        assert!(lines.iter().all(|l| l.passed), "{:?}", lines.iter().filter(|l| !l.passed).map(|l| &l.name).collect::<Vec<_>>());
    }
}
