//! Small dense-vector helpers shared by the numerical modules.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Central finite-difference gradient of `f` at `a` with per-component step
/// `h * (1 + |a_i|)`.
pub fn central_gradient<E>(
    mut f: impl FnMut(&[f64]) -> Result<f64, E>,
    a: &[f64],
    h: f64,
) -> Result<Vec<f64>, E> {
    let mut probe = a.to_vec();
    let mut grad = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let step = h * (1.0 + a[i].abs());
        probe[i] = a[i] + step;
        let plus = f(&probe)?;
        probe[i] = a[i] - step;
        let minus = f(&probe)?;
        probe[i] = a[i];
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}
