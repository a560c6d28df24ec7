use std::f64::consts::{E, TAU};

use super::Objective;
use crate::error::{Error, Result};
use crate::vector;

fn check(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::invalid("ackley needs at least one component"));
    }
    if !vector::all_finite(a) {
        return Err(Error::invalid("ackley input has non-finite components"));
    }
    Ok(())
}

/// Ackley's function, minimized at the origin where it is zero.
pub fn ackley(a: &[f64]) -> Result<f64> {
    check(a)?;
    let n = a.len() as f64;
    let radial = (-0.2 * vector::norm(a) / n.sqrt()).exp();
    let mean_cos = a.iter().map(|x| (TAU * x).cos()).sum::<f64>() / n;
    Ok(-20.0 * radial - mean_cos.exp() + E + 20.0)
}

/// Gradient of [`ackley`]. The norm term has a kink at the origin; the
/// gradient there is taken to be zero.
pub fn ackley_gradient(a: &[f64]) -> Result<Vec<f64>> {
    check(a)?;
    let n = a.len() as f64;
    let norm = vector::norm(a);
    if norm == 0.0 {
        return Ok(vec![0.0; a.len()]);
    }
    let radial = 4.0 / (n.sqrt() * norm) * (-0.2 * norm / n.sqrt()).exp();
    let mean_cos = a.iter().map(|x| (TAU * x).cos()).sum::<f64>() / n;
    let periodic = TAU / n * mean_cos.exp();
    Ok(a.iter()
        .map(|&x| radial * x + periodic * (TAU * x).sin())
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct Ackley {
    dimension: usize,
}

impl Ackley {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("ackley dimension must be at least 1"));
        }
        Ok(Ackley { dimension })
    }
}

impl Objective for Ackley {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, a: &[f64]) -> Result<f64> {
        ackley(a)
    }

    fn gradient(&self, a: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(ackley_gradient(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Term-by-term scalar re-evaluation, kept apart from the vector helpers.
    fn ackley_scalar(a: &[f64]) -> f64 {
        let n = a.len() as f64;
        let mut sq = 0.0;
        let mut cs = 0.0;
        for &x in a {
            sq += x * x;
            cs += (2.0 * std::f64::consts::PI * x).cos();
        }
        let t1 = -20.0 * f64::exp(-0.2 * f64::sqrt(sq) / f64::sqrt(n));
        let t2 = -f64::exp(cs / n);
        t1 + t2 + f64::exp(1.0) + 20.0
    }

    fn fd_gradient(a: &[f64], h: f64) -> Vec<f64> {
        (0..a.len())
            .map(|i| {
                let mut p = a.to_vec();
                let mut m = a.to_vec();
                p[i] += h;
                m[i] -= h;
                (ackley(&p).unwrap() - ackley(&m).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        vector::distance(a, b) / vector::norm(b).max(1e-12)
    }

    #[test]
    fn zero_at_origin() {
        for n in [1, 2, 7, 200] {
            assert!(ackley(&vec![0.0; n]).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn value_at_one_one_matches_scalar_oracle() {
        let got = ackley(&[1.0, 1.0]).unwrap();
        let want = ackley_scalar(&[1.0, 1.0]);
        // frozen from the scalar oracle: 20 - 20 e^{-0.2} - e + e = 20(1 - e^{-0.2})
        assert!((want - 3.625_384_938_440_363).abs() < 1e-12);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert!(ackley(&[f64::NAN, 0.0]).is_err());
        assert!(ackley_gradient(&[f64::INFINITY]).is_err());
        assert!(ackley(&[]).is_err());
    }

    #[test]
    fn gradient_zero_at_origin() {
        assert_eq!(ackley_gradient(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 100 {
            let n = rng.random_range(1..=8);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            if vector::norm(&a) <= 0.1 {
                continue;
            }
            let g = ackley_gradient(&a).unwrap();
            let fd = fd_gradient(&a, 1e-6);
            assert!(rel_err(&g, &fd) < 1e-5, "a = {a:?}: {g:?} vs {fd:?}");
            checked += 1;
        }
    }

    #[test]
    fn origin_is_global_minimum_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 32] {
            for _ in 0..1000 {
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                assert!(ackley(&a).unwrap() >= 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn even_in_every_component(a in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            prop_assert_eq!(ackley(&a).unwrap(), ackley(&neg).unwrap());
            let g = ackley_gradient(&a).unwrap();
            let gn = ackley_gradient(&neg).unwrap();
            for (x, y) in g.iter().zip(&gn) {
                prop_assert_eq!(*x, -*y);
            }
        }

        #[test]
        fn matches_scalar_oracle(a in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
            prop_assert!((ackley(&a).unwrap() - ackley_scalar(&a)).abs() < 1e-12);
        }
    }
}
