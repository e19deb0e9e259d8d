//! Lorentzian metrics in coordinates `(x0, .., xn)` with their connection and geodesics.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprjet::{Expression, ParseError};
use crate::linalg;
use crate::ode::rk4_step;

/// `|det g|` at or below this is treated as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Default relative tolerance for [`MetricField::causal_character`].
pub const DEFAULT_CAUSAL_TOL: f64 = 1e-9;

/// A symmetric `(n+1) x (n+1)` metric whose entries are expressions in `x0 .. xn`.
///
/// Only the upper triangle is stored, so symmetry holds structurally.
#[derive(Debug, Clone)]
pub struct MetricField {
    n: usize,
    /// Row-major upper triangle; `None` for the flat metric `diag(-1, 1, .., 1)`.
    entries: Option<Vec<Expression>>,
    minkowski: bool,
}

/// Metric value and its first coordinate derivatives at one point.
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub g: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub det: f64,
    /// `dg[c][(a, b)] = d g_ab / d x_c`.
    pub dg: Vec<DMatrix<f64>>,
}

/// Christoffel symbols `Gamma^c_ab` of the Levi-Civita connection.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(dim: usize) -> Self {
        Christoffel {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Gamma^upper_{a b}`.
    pub fn get(&self, upper: usize, a: usize, b: usize) -> f64 {
        self.data[(upper * self.dim + a) * self.dim + b]
    }

    fn set_sym(&mut self, upper: usize, a: usize, b: usize, v: f64) {
        let d = self.dim;
        self.data[(upper * d + a) * d + b] = v;
        self.data[(upper * d + b) * d + a] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CausalCharacter {
    TimeLike,
    SpaceLike,
    LightLike,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub step: f64,
    pub samples: Vec<GeodesicSample>,
}

impl MetricField {
    /// The flat metric of `R^{n+1}_1`.
    pub fn minkowski(n: usize) -> MetricField {
        MetricField {
            n,
            entries: None,
            minkowski: true,
        }
    }

    /// Builds a metric from `(n+1)(n+2)/2` upper-triangle entries in row-major order.
    pub fn from_upper_triangle(n: usize, entries: Vec<Expression>) -> Result<MetricField> {
        let dim = n + 1;
        if entries.len() != dim * (dim + 1) / 2 {
            return Err(Error::invalid(format!(
                "metric of dimension {dim} needs {} upper-triangle entries, got {}",
                dim * (dim + 1) / 2,
                entries.len()
            )));
        }
        if let Some(bad) = entries
            .iter()
            .find(|e| e.first_index() != 0 || e.arity() != dim)
        {
            return Err(Error::invalid(format!(
                "metric entry `{bad}` must be an expression in x0..x{n}"
            )));
        }
        let mut minkowski = true;
        let mut k = 0;
        for a in 0..dim {
            for b in a..dim {
                let flat = match (a, b) {
                    (0, 0) => -1.0,
                    _ if a == b => 1.0,
                    _ => 0.0,
                };
                minkowski &= entries[k].as_constant() == Some(flat);
                k += 1;
            }
        }
        Ok(MetricField {
            n,
            entries: Some(entries),
            minkowski,
        })
    }

    /// Parses upper-triangle entry strings over `x0 .. xn`.
    pub fn parse_upper_triangle<S: AsRef<str>>(n: usize, entries: &[S]) -> Result<MetricField> {
        let parsed = entries
            .iter()
            .map(|s| Expression::parse_indexed(s.as_ref(), 0, n + 1))
            .collect::<Result<Vec<_>, ParseError>>()?;
        Self::from_upper_triangle(n, parsed)
    }

    /// Number of spatial coordinates; the manifold has dimension `n + 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn is_minkowski(&self) -> bool {
        self.minkowski
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point {p:?} has {} coordinates, metric needs {}",
                p.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn flat(&self) -> DMatrix<f64> {
        let mut g = DMatrix::identity(self.dim(), self.dim());
        g[(0, 0)] = -1.0;
        g
    }

    fn nondegenerate(&self, g: &DMatrix<f64>, p: &[f64]) -> Result<f64> {
        let det = linalg::det(g);
        if !(det.abs() > DEGENERACY_FLOOR) {
            return Err(Error::DegenerateMetric {
                point: p.to_vec(),
                det,
            });
        }
        Ok(det)
    }

    /// `g(p)` as a symmetric matrix.
    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        let Some(entries) = &self.entries else {
            return Ok(self.flat());
        };
        let dim = self.dim();
        let mut g = DMatrix::zeros(dim, dim);
        let mut k = 0;
        for a in 0..dim {
            for b in a..dim {
                let v = entries[k].eval(p)?;
                g[(a, b)] = v;
                g[(b, a)] = v;
                k += 1;
            }
        }
        self.nondegenerate(&g, p)?;
        Ok(g)
    }

    /// Metric, inverse and first derivatives at `p`.
    pub fn sample(&self, p: &[f64]) -> Result<MetricSample> {
        self.check_point(p)?;
        let dim = self.dim();
        let Some(entries) = &self.entries else {
            let g = self.flat();
            return Ok(MetricSample {
                inverse: g.clone(),
                g,
                det: -1.0,
                dg: vec![DMatrix::zeros(dim, dim); dim],
            });
        };
        let mut g = DMatrix::zeros(dim, dim);
        let mut dg = vec![DMatrix::zeros(dim, dim); dim];
        let mut k = 0;
        for a in 0..dim {
            for b in a..dim {
                let jet = entries[k].eval_jet3(p)?;
                g[(a, b)] = jet.value();
                g[(b, a)] = jet.value();
                for (c, d) in dg.iter_mut().enumerate() {
                    d[(a, b)] = jet.d1(c);
                    d[(b, a)] = jet.d1(c);
                }
                k += 1;
            }
        }
        let det = self.nondegenerate(&g, p)?;
        let inverse = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateMetric {
                point: p.to_vec(),
                det,
            })?;
        Ok(MetricSample {
            g,
            inverse,
            det,
            dg,
        })
    }

    /// Checks that the eigenvalue signature at `base` is `(-, +, .., +)`.
    pub fn validate_signature(&self, base: &[f64]) -> Result<()> {
        let g = self.metric_at(base)?;
        let eig = SymmetricEigen::new(g);
        let negative = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
        let positive = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
        if negative != 1 || positive != self.n {
            return Err(Error::WrongSignature {
                point: base.to_vec(),
                negative,
                positive,
                expected_positive: self.n,
            });
        }
        Ok(())
    }

    /// `Gamma^c_ab = 1/2 g^{cd} (d_a g_db + d_b g_ad - d_d g_ab)`.
    pub fn christoffel_at(&self, p: &[f64]) -> Result<Christoffel> {
        let sample = self.sample(p)?;
        Ok(christoffel_from_sample(&sample))
    }

    /// `g_p(u, v)`.
    pub fn inner(&self, p: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let g = self.metric_at(p)?;
        Ok(bilinear(&g, u, v))
    }

    /// Sign of `g_p(v, v)`, with `|g_p(v, v)| <= tol * |v|^2` reported light-like.
    pub fn causal_character(&self, p: &[f64], v: &[f64], tol: f64) -> Result<CausalCharacter> {
        self.check_point(v)?;
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        let q = self.inner(p, v, v)?;
        Ok(if q.abs() <= tol * norm2 {
            CausalCharacter::LightLike
        } else if q < 0.0 {
            CausalCharacter::TimeLike
        } else {
            CausalCharacter::SpaceLike
        })
    }

    /// Fixed-step RK4 on `x'' = -Gamma(x'; x')` over `t_span` with `steps` steps.
    pub fn integrate_geodesic(
        &self,
        start: &[f64],
        velocity: &[f64],
        t_span: (f64, f64),
        steps: usize,
    ) -> Result<GeodesicPath> {
        self.check_point(start)?;
        self.check_point(velocity)?;
        if steps < 2 {
            return Err(Error::invalid(
                "geodesic integration needs at least 2 steps",
            ));
        }
        let dim = self.dim();
        let h = (t_span.1 - t_span.0) / steps as f64;
        if !(h > 0.0) {
            return Err(Error::invalid("geodesic time span must be increasing"));
        }
        let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
            let (x, v) = y.split_at(dim);
            let mut out = Vec::with_capacity(2 * dim);
            out.extend_from_slice(v);
            if self.minkowski {
                out.extend(std::iter::repeat_n(0.0, dim));
                return Ok(out);
            }
            let gamma = self.christoffel_at(x)?;
            for c in 0..dim {
                let mut acc = 0.0;
                for a in 0..dim {
                    for b in 0..dim {
                        acc += gamma.get(c, a, b) * v[a] * v[b];
                    }
                }
                out.push(-acc);
            }
            Ok(out)
        };

        let mut samples = Vec::with_capacity(steps + 1);
        let mut y: Vec<f64> = start.iter().chain(velocity).copied().collect();
        samples.push(GeodesicSample {
            t: t_span.0,
            position: start.to_vec(),
            velocity: velocity.to_vec(),
        });
        for k in 0..steps {
            let t = t_span.0 + k as f64 * h;
            match rk4_step(&rhs, t, &y, h) {
                Ok(next) => y = next,
                Err(source) => {
                    return Err(Error::GeodesicBreakdown {
                        t,
                        partial: Box::new(GeodesicPath { step: h, samples }),
                        source: Box::new(source),
                    })
                }
            }
            // Evaluate t from the step index so flat paths stay exactly affine.
            let t_next = if k + 1 == steps {
                t_span.1
            } else {
                t_span.0 + (k + 1) as f64 * h
            };
            samples.push(GeodesicSample {
                t: t_next,
                position: y[..dim].to_vec(),
                velocity: y[dim..].to_vec(),
            });
        }
        Ok(GeodesicPath { step: h, samples })
    }
}

pub(crate) fn christoffel_from_sample(s: &MetricSample) -> Christoffel {
    let dim = s.g.nrows();
    let mut gamma = Christoffel::zeros(dim);
    if s.dg.iter().all(|d| d.iter().all(|&x| x == 0.0)) {
        return gamma;
    }
    for c in 0..dim {
        for a in 0..dim {
            for b in a..dim {
                let mut acc = 0.0;
                for d in 0..dim {
                    let lowered = s.dg[a][(d, b)] + s.dg[b][(a, d)] - s.dg[d][(a, b)];
                    acc += s.inverse[(c, d)] * lowered;
                }
                gamma.set_sym(c, a, b, 0.5 * acc);
            }
        }
    }
    gamma
}

pub(crate) fn bilinear(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for a in 0..u.len() {
        for b in 0..v.len() {
            acc += g[(a, b)] * u[a] * v[b];
        }
    }
    acc
}
