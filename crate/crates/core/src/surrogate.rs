//! Polyharmonic spline surrogate of the cost function.
//!
//! The model is `D(a) = sum_i w_i b_i(a) + mu` with `b_i(a) = r^p` (p odd) or
//! `r^p log r` (p even), `r = |a - c_i|`. Weights solve the symmetric
//! saddle-point system
//!
//! ```text
//! [ B  1 ] [ w  ]   [ d   ]
//! [ 1' 0 ] [ mu ] = [ eps ]
//! ```
//!
//! so the model interpolates the data exactly while the weights sum to a
//! small positive `eps`, which makes the spline grow like `eps * r^p (log r)`
//! far from the data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector;

/// Interpolation residual tolerance, relative to `1 + |d_i|`.
pub const INTERPOLATION_TOLERANCE: f64 = 1e-8;
/// Weight-sum residual tolerance, relative to `eps * n_c`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-10;
/// Condition estimates above this are treated as numerically singular.
pub const MAX_CONDITION: f64 = 1e15;

/// Polyharmonic radial basis `r^p` (odd `p`) or `r^p log r` (even `p`), zero
/// at `a = c`.
pub fn basis(a: &[f64], c: &[f64], order: u32) -> f64 {
    radial(vector::distance(a, c), order)
}

fn radial(r: f64, order: u32) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let rp = r.powi(order as i32);
    if order % 2 == 1 {
        rp
    } else {
        rp * r.ln()
    }
}

/// `(d b / d r) / r`, so that `grad b = (a - c) * radial_slope(r)`. Zero at
/// `r = 0` (the even-order `0 * log 0` limit).
fn radial_slope(r: f64, order: u32) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let p = order as i32;
    let rp2 = r.powi(p - 2);
    if order % 2 == 1 {
        order as f64 * rp2
    } else {
        (1.0 + order as f64 * r.ln()) * rp2
    }
}

/// Neumaier-compensated sum.
fn accurate_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `eps = 1e-6 * max(1, mean |d_i|)`.
pub fn default_weight_sum(values: &[f64]) -> f64 {
    let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len().max(1) as f64;
    1e-6 * mean.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateOptions {
    /// Spline order `p >= 2`.
    pub order: u32,
    /// Target weight sum; `None` recomputes [`default_weight_sum`] on every
    /// fit.
    pub weight_sum: Option<f64>,
    /// Candidate points closer than this to an existing control point are
    /// rejected.
    pub min_separation: f64,
}

impl Default for SurrogateOptions {
    fn default() -> Self {
        SurrogateOptions {
            order: 2,
            weight_sum: None,
            min_separation: 1e-9,
        }
    }
}

impl SurrogateOptions {
    /// Separation threshold of `1e-6` times the given domain diameter.
    pub fn with_domain_diameter(mut self, diameter: f64) -> Self {
        self.min_separation = 1e-6 * diameter;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::invalid(format!(
                "spline order must be at least 2, got {}",
                self.order
            )));
        }
        if let Some(eps) = self.weight_sum {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::invalid("weight sum must be positive"));
            }
        }
        if !(self.min_separation.is_finite() && self.min_separation > 0.0) {
            return Err(Error::invalid("minimum separation must be positive"));
        }
        Ok(())
    }
}

/// Outcome of [`PolyharmonicSurrogate::add_control_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enrichment {
    Accepted,
    /// Too close to control point `nearest`; the surrogate is unchanged.
    Rejected { nearest: usize, distance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyharmonicSurrogate {
    options: SurrogateOptions,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    weights: Vec<f64>,
    offset: f64,
    weight_sum: f64,
    condition: f64,
}

impl PolyharmonicSurrogate {
    pub fn fit(points: Vec<Vec<f64>>, values: Vec<f64>, options: SurrogateOptions) -> Result<Self> {
        options.validate()?;
        if points.is_empty() {
            return Err(Error::invalid("need at least one control point"));
        }
        if points.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} control points but {} values",
                points.len(),
                values.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("control points must share a positive dimension"));
        }
        if !values.iter().all(|v| v.is_finite()) || !points.iter().all(|p| vector::all_finite(p)) {
            return Err(Error::invalid("control points and values must be finite"));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if vector::distance(&points[i], &points[j]) < options.min_separation {
                    return Err(Error::DuplicatePoint {
                        first: j,
                        second: i,
                        min_separation: options.min_separation,
                    });
                }
            }
        }
        Self::solve(points, values, options)
    }

    fn solve(points: Vec<Vec<f64>>, values: Vec<f64>, options: SurrogateOptions) -> Result<Self> {
        let n = points.len();
        let order = options.order;
        let weight_sum = options
            .weight_sum
            .unwrap_or_else(|| default_weight_sum(&values));

        let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..i {
                let b = basis(&points[i], &points[j], order);
                kkt[(i, j)] = b;
                kkt[(j, i)] = b;
            }
            kkt[(i, n)] = 1.0;
            kkt[(n, i)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from_slice(&values);
        rhs[n] = weight_sum;

        let lu = kkt.clone().lu();
        let mut x = lu.solve(&rhs).ok_or_else(|| Error::FitFailure {
            condition: f64::INFINITY,
            reason: "saddle-point matrix is singular".into(),
        })?;
        let condition = kkt.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
            * inverse_norm1_estimate(&lu, n + 1);
        if !condition.is_finite() || condition > MAX_CONDITION || !x.iter().all(|v| v.is_finite()) {
            return Err(Error::FitFailure {
                condition,
                reason: "saddle-point matrix is numerically rank-deficient".into(),
            });
        }

        // two steps of iterative refinement; the constraint row is summed
        // with compensation since eps is tiny next to the weights
        for _ in 0..2 {
            let mut residual = &rhs - &kkt * &x;
            residual[n] = weight_sum - accurate_sum(&x.as_slice()[..n]);
            if let Some(dx) = lu.solve(&residual) {
                x += dx;
            }
        }

        let mut weights: Vec<f64> = x.as_slice()[..n].to_vec();
        let offset = x[n];
        // put the last rounding-level constraint defect on the smallest
        // weight, where it perturbs the interpolant least
        let smallest = (0..n)
            .min_by(|&a, &b| weights[a].abs().total_cmp(&weights[b].abs()))
            .expect("n >= 1");
        for _ in 0..2 {
            weights[smallest] += weight_sum - accurate_sum(&weights);
        }

        let surrogate = PolyharmonicSurrogate {
            options,
            points,
            values,
            weights,
            offset,
            weight_sum,
            condition,
        };
        let interp = surrogate.interpolation_residual();
        let constraint = surrogate.weight_sum_residual();
        if interp > INTERPOLATION_TOLERANCE
            || constraint > WEIGHT_SUM_TOLERANCE * weight_sum * n as f64
        {
            return Err(Error::FitFailure {
                condition,
                reason: format!(
                    "solution misses the fit conditions (interpolation {interp:e}, weight sum {constraint:e})"
                ),
            });
        }
        Ok(surrogate)
    }

    /// Append a control point and refit. Points within `min_separation` of an
    /// existing one are rejected. On error the surrogate is left untouched.
    pub fn add_control_point(&mut self, point: &[f64], value: f64) -> Result<Enrichment> {
        if point.len() != self.dimension() || !vector::all_finite(point) || !value.is_finite() {
            return Err(Error::invalid("control point must be finite and match the dimension"));
        }
        if let Some((nearest, distance)) = self.nearest(point) {
            if distance < self.options.min_separation {
                return Ok(Enrichment::Rejected { nearest, distance });
            }
        }
        let mut points = self.points.clone();
        let mut values = self.values.clone();
        points.push(point.to_vec());
        values.push(value);
        *self = Self::solve(points, values, self.options)?;
        Ok(Enrichment::Accepted)
    }

    /// Index of and distance to the closest control point.
    pub fn nearest(&self, a: &[f64]) -> Option<(usize, f64)> {
        self.points
            .iter()
            .map(|c| vector::distance(a, c))
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(&y.1))
    }

    pub fn predict(&self, a: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dimension());
        let order = self.options.order;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * basis(a, c, order))
            .sum::<f64>()
            + self.offset
    }

    /// Analytic gradient `[grad b(a)] w`.
    pub fn gradient(&self, a: &[f64]) -> Vec<f64> {
        debug_assert_eq!(a.len(), self.dimension());
        let order = self.options.order;
        let mut grad = vec![0.0; a.len()];
        for (c, w) in self.points.iter().zip(&self.weights) {
            let slope = w * radial_slope(vector::distance(a, c), order);
            if slope != 0.0 {
                for ((g, x), y) in grad.iter_mut().zip(a).zip(c) {
                    *g += slope * (x - y);
                }
            }
        }
        grad
    }

    /// `max_i |predict(c_i) - d_i| / (1 + |d_i|)`.
    pub fn interpolation_residual(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(c, d)| (self.predict(c) - d).abs() / (1.0 + d.abs()))
            .fold(0.0, f64::max)
    }

    /// `|sum_i w_i - eps|`, summed with compensation.
    pub fn weight_sum_residual(&self) -> f64 {
        (accurate_sum(&self.weights) - self.weight_sum).abs()
    }

    pub fn order(&self) -> u32 {
        self.options.order
    }

    pub fn options(&self) -> &SurrogateOptions {
        &self.options
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn min_separation(&self) -> f64 {
        self.options.min_separation
    }

    /// 1-norm condition estimate of the saddle-point matrix at the last fit.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Restore a checkpoint written by [`PolyharmonicSurrogate::to_json`].
    pub fn from_json(json: &str) -> Result<Self> {
        let s: PolyharmonicSurrogate = serde_json::from_str(json)?;
        s.options.validate()?;
        let n = s.points.len();
        if n == 0
            || s.values.len() != n
            || s.weights.len() != n
            || s.points.iter().any(|p| p.len() != s.points[0].len())
        {
            return Err(Error::invalid("inconsistent surrogate checkpoint"));
        }
        Ok(s)
    }
}

/// Hager's estimate of `||A^-1||_1` from an LU factorization. The saddle
/// point matrix is symmetric, so `A^-T` solves reuse the same factors.
fn inverse_norm1_estimate(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> f64 {
    let mut x = DVector::<f64>::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else {
            return f64::INFINITY;
        };
        estimate = y.abs().sum();
        let sign = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = lu.solve(&sign) else {
            return f64::INFINITY;
        };
        let (j, zmax) = z
            .iter()
            .map(|v| v.abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n >= 1");
        if zmax <= z.dot(&x) {
            break;
        }
        x.fill(0.0);
        x[j] = 1.0;
    }
    estimate
}
