use super::Objective;
use crate::error::{Error, Result};

/// `||performance(a) - target||^2`.
pub fn least_squares_cost(
    performance: impl Fn(&[f64]) -> Vec<f64>,
    target: &[f64],
    a: &[f64],
) -> Result<f64> {
    let g = performance(a);
    if g.len() != target.len() {
        return Err(Error::invalid(format!(
            "performance vector has length {}, target has length {}",
            g.len(),
            target.len()
        )));
    }
    Ok(g.iter().zip(target).map(|(x, t)| (x - t) * (x - t)).sum())
}

/// Least-squares misfit of a vector-valued performance model against a
/// target, usable as an [`Objective`].
pub struct LeastSquares<F> {
    dimension: usize,
    performance: F,
    target: Vec<f64>,
}

impl<F> LeastSquares<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dimension: usize, performance: F, target: Vec<f64>) -> Self {
        LeastSquares {
            dimension,
            performance,
            target,
        }
    }
}

impl<F> Objective for LeastSquares<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, a: &[f64]) -> Result<f64> {
        least_squares_cost(&self.performance, &self.target, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::CostFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_fit_is_zero() {
        let target = [1.0, -2.0, 0.5];
        let c = least_squares_cost(|a| a.to_vec(), &target, &target).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn pythagorean_residual() {
        let c = least_squares_cost(|a| vec![a[0] + 3.0, a[1] + 4.0], &[0.0, 0.0], &[0.0, 0.0])
            .unwrap();
        assert_eq!(c, 25.0);
    }

    #[test]
    fn random_residual_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut oracle = 0.0;
        for x in &r {
            oracle += x * x;
        }
        let target = vec![0.0; 5];
        let c = least_squares_cost(|_| r.clone(), &target, &[0.0]).unwrap();
        assert!((c - oracle).abs() <= 1e-14 * oracle.max(1.0));
    }

    #[test]
    fn length_mismatch_is_invalid() {
        let err = least_squares_cost(|a| a.to_vec(), &[0.0; 3], &[0.0; 2]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn wraps_as_cost_function() {
        let ls = LeastSquares::new(2, |a: &[f64]| vec![a[0] * a[1], a[0] - a[1]], vec![2.0, 0.0]);
        let cost = CostFunction::new(ls);
        assert_eq!(cost.evaluate(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cost.evaluate(&[2.0f64.sqrt(), 2.0f64.sqrt()]).unwrap() < 1e-15, true);
    }
}
