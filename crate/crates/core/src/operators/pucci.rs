use crate::matrix::SymMatrix;

/// λ Σ_{e>0} e + Λ Σ_{e<0} e over the eigenvalues of `m`.
pub fn pucci_minus(m: &SymMatrix, lambda: f64, cap_lambda: f64) -> f64 {
    m.spectrum()
        .into_iter()
        .map(|e| if e > 0.0 { lambda * e } else { cap_lambda * e })
        .sum()
}

/// Λ Σ_{e>0} e + λ Σ_{e<0} e over the eigenvalues of `m`.
pub fn pucci_plus(m: &SymMatrix, lambda: f64, cap_lambda: f64) -> f64 {
    m.spectrum()
        .into_iter()
        .map(|e| if e > 0.0 { cap_lambda * e } else { lambda * e })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pucci_examples() {
        let id = SymMatrix::identity(2);
        assert_eq!(pucci_minus(&id, 1.0, 2.0), 2.0);
        assert_eq!(pucci_plus(&id, 1.0, 2.0), 4.0);
        assert_eq!(pucci_minus(&SymMatrix::diag(2, 1.0, -1.0), 1.0, 2.0), -1.0);
        assert_eq!(pucci_minus(&SymMatrix::zero(2), 1.0, 2.0), 0.0);
        assert_eq!(pucci_plus(&SymMatrix::zero(1), 1.0, 2.0), 0.0);
        assert_eq!(pucci_plus(&SymMatrix::scalar(-3.0), 1.0, 2.0), -3.0);
    }

    fn random_sym(rng: &mut ChaCha8Rng, dim: usize) -> SymMatrix {
        match dim {
            1 => SymMatrix::scalar(rng.gen_range(-5.0..5.0)),
            _ => SymMatrix::new2(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
        }
    }

    #[test]
    fn duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2] {
            for _ in 0..500 {
                let m = random_sym(&mut rng, dim);
                assert_relative_eq!(
                    pucci_plus(&m, 0.7, 2.3),
                    -pucci_minus(&m.scale(-1.0), 0.7, 2.3),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn envelope_of_linear_operators() {
        // A = λI + (Λ − λ) Q D Qᵀ with D ∈ [0,1] diagonal ranges over A_{λ,Λ}.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (lambda, cap) = (0.5, 3.0);
        for dim in [1, 2] {
            for _ in 0..1000 {
                let m = random_sym(&mut rng, dim);
                let d = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                let q = SymMatrix::from_spectral(dim, rng.gen_range(0.0..std::f64::consts::PI), d);
                let a = SymMatrix::identity(dim).scale(lambda).add(&q.scale(cap - lambda));
                let tr = a.trace_product(&m);
                assert!(pucci_minus(&m, lambda, cap) <= tr + 1e-10);
                assert!(tr <= pucci_plus(&m, lambda, cap) + 1e-10);
            }
        }
    }
}
