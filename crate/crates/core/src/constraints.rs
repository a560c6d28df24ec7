//! Regularized indicator functions of the admissible region.
//!
//! Each tanh factor `(1 + tanh(x)) / 2` equals `logistic(2x)`, so its log is
//! `-softplus(-2x)`. Everything here is computed in that form; the raw product
//! underflows a few smoothing widths outside the region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothing width as a fraction of the box width when none is given.
pub const DEFAULT_ALPHA_FRACTION: f64 = 0.03;

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `d/dx log((1 + tanh x) / 2) = 1 - tanh x`, evaluated without cancellation
/// as `2 / (1 + exp(2x))`.
fn tanh_complement(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-2.0 * x).exp();
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + (2.0 * x).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpec", into = "RegionSpec")]
pub struct AdmissibleRegion {
    kind: RegionKind,
    alpha: Vec<f64>,
    /// Upper corner of the box used to draw initial points for positivity
    /// regions.
    seed_upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionKind {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Positive,
}

impl AdmissibleRegion {
    /// `l_i < a_i < u_i`. With `alpha = None` the widths default to
    /// `0.03 * (u_i - l_i)`.
    pub fn bounded(lower: Vec<f64>, upper: Vec<f64>, alpha: Option<Vec<f64>>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid(format!(
                "box bounds must be non-empty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::invalid(format!(
                "box bound {i}: lower {} must be below upper {}",
                lower[i], upper[i]
            )));
        }
        if !lower.iter().chain(&upper).all(|x| x.is_finite()) {
            return Err(Error::invalid("box bounds must be finite"));
        }
        let alpha = match alpha {
            Some(a) => a,
            None => lower
                .iter()
                .zip(&upper)
                .map(|(l, u)| DEFAULT_ALPHA_FRACTION * (u - l))
                .collect(),
        };
        check_alpha(&alpha, lower.len())?;
        Ok(AdmissibleRegion {
            kind: RegionKind::Box { lower, upper },
            alpha,
            seed_upper: None,
        })
    }

    /// `a_i > 0`.
    pub fn positive(alpha: Vec<f64>) -> Result<Self> {
        check_alpha(&alpha, alpha.len())?;
        if alpha.is_empty() {
            return Err(Error::invalid("region dimension must be at least 1"));
        }
        Ok(AdmissibleRegion {
            kind: RegionKind::Positive,
            alpha,
            seed_upper: None,
        })
    }

    /// Bounded box `[0, u0]` from which initial points are drawn in a
    /// positivity region.
    pub fn with_seed_upper(mut self, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != self.dimension() || !upper.iter().all(|u| u.is_finite() && *u > 0.0) {
            return Err(Error::invalid(
                "seeding box upper corner must be positive and match the dimension",
            ));
        }
        self.seed_upper = Some(upper);
        Ok(self)
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len()
    }

    /// Hard membership test.
    pub fn contains(&self, a: &[f64]) -> bool {
        match &self.kind {
            RegionKind::Box { lower, upper } => a
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, u))| l < x && x < u),
            RegionKind::Positive => a.iter().all(|x| *x > 0.0),
        }
    }

    /// Box from which random initial points are drawn, if the region has one.
    pub fn sampling_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            RegionKind::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            RegionKind::Positive => self
                .seed_upper
                .as_ref()
                .map(|u| (vec![0.0; u.len()], u.clone())),
        }
    }

    /// Largest coordinate extent of the sampling box, used to scale
    /// separation thresholds.
    pub fn diameter(&self) -> Option<f64> {
        self.sampling_box().map(|(l, u)| {
            l.iter()
                .zip(&u)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt()
        })
    }

    /// `log 1l^reg(a)`; always `<= 0` and finite for finite `a`.
    pub fn log_indicator(&self, a: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dimension());
        match &self.kind {
            RegionKind::Box { lower, upper } => (0..a.len())
                .map(|i| {
                    let from_lower = (a[i] - lower[i]) / self.alpha[i];
                    let from_upper = (upper[i] - a[i]) / self.alpha[i];
                    -softplus(-2.0 * from_lower) - softplus(-2.0 * from_upper)
                })
                .sum(),
            RegionKind::Positive => a
                .iter()
                .zip(&self.alpha)
                .map(|(x, alpha)| -softplus(-2.0 * x / alpha))
                .sum(),
        }
    }

    /// Gradient of [`AdmissibleRegion::log_indicator`]; component `i` is
    /// bounded by `2 / alpha_i` in magnitude.
    pub fn log_indicator_gradient(&self, a: &[f64]) -> Vec<f64> {
        debug_assert_eq!(a.len(), self.dimension());
        match &self.kind {
            RegionKind::Box { lower, upper } => (0..a.len())
                .map(|i| {
                    let alpha = self.alpha[i];
                    (tanh_complement((a[i] - lower[i]) / alpha)
                        - tanh_complement((upper[i] - a[i]) / alpha))
                        / alpha
                })
                .collect(),
            RegionKind::Positive => a
                .iter()
                .zip(&self.alpha)
                .map(|(x, alpha)| tanh_complement(x / alpha) / alpha)
                .collect(),
        }
    }
}

fn check_alpha(alpha: &[f64], n: usize) -> Result<()> {
    if alpha.len() != n {
        return Err(Error::invalid(format!(
            "expected {n} smoothing widths, got {}",
            alpha.len()
        )));
    }
    if !alpha.iter().all(|a| a.is_finite() && *a > 0.0) {
        return Err(Error::invalid("smoothing widths must be positive"));
    }
    Ok(())
}

/// A scalar or per-component vector in region configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Bound {
    fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            Bound::Scalar(x) => vec![*x; n],
            Bound::Vector(v) => v.clone(),
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Bound::Scalar(_) => None,
            Bound::Vector(v) => Some(v.len()),
        }
    }
}

/// JSON shape of a region: `{"kind":"box","lower":[..],"upper":[..],"alpha":[..]}`
/// or `{"kind":"positive","alpha":[..],"seed_upper":[..]}`.
///
/// Scalars are accepted wherever a vector is; they are broadcast to the
/// length of the vector-valued fields or to `dimension`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Box {
        lower: Bound,
        upper: Bound,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<Bound>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dimension: Option<usize>,
    },
    Positive {
        alpha: Bound,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed_upper: Option<Bound>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dimension: Option<usize>,
    },
}

impl RegionSpec {
    /// Resolve against the objective dimension when the spec uses scalars.
    pub fn build(&self, default_dimension: Option<usize>) -> Result<AdmissibleRegion> {
        match self {
            RegionSpec::Box {
                lower,
                upper,
                alpha,
                dimension,
            } => {
                let n = dimension
                    .or(lower.len())
                    .or(upper.len())
                    .or(alpha.as_ref().and_then(Bound::len))
                    .or(default_dimension)
                    .ok_or_else(|| Error::invalid("box region dimension is not determined"))?;
                AdmissibleRegion::bounded(
                    lower.expand(n),
                    upper.expand(n),
                    alpha.as_ref().map(|a| a.expand(n)),
                )
            }
            RegionSpec::Positive {
                alpha,
                seed_upper,
                dimension,
            } => {
                let n = dimension
                    .or(alpha.len())
                    .or(seed_upper.as_ref().and_then(Bound::len))
                    .or(default_dimension)
                    .ok_or_else(|| Error::invalid("positive region dimension is not determined"))?;
                let region = AdmissibleRegion::positive(alpha.expand(n))?;
                match seed_upper {
                    Some(u) => region.with_seed_upper(u.expand(n)),
                    None => Ok(region),
                }
            }
        }
    }
}

impl TryFrom<RegionSpec> for AdmissibleRegion {
    type Error = Error;

    fn try_from(spec: RegionSpec) -> Result<Self> {
        spec.build(None)
    }
}

impl From<AdmissibleRegion> for RegionSpec {
    fn from(region: AdmissibleRegion) -> Self {
        let alpha = Bound::Vector(region.alpha);
        match region.kind {
            RegionKind::Box { lower, upper } => RegionSpec::Box {
                lower: Bound::Vector(lower),
                upper: Bound::Vector(upper),
                alpha: Some(alpha),
                dimension: None,
            },
            RegionKind::Positive => RegionSpec::Positive {
                alpha,
                seed_upper: region.seed_upper.map(Bound::Vector),
                dimension: None,
            },
        }
    }
}
