//! Graph hypersurfaces `F(x1, .., xn) = (f(x), x1, .., xn)` and their pointwise operators.
//!
//! The light-likeness function is `B = det(s)`, the determinant of the induced metric. Its sign
//! separates space-like (`B > 0`) from time-like (`B < 0`) points, and it vanishes where the
//! induced metric degenerates. In Minkowski space it reduces to `1 - |grad f|^2`.
//!
//! The mean-curvature-type operator `A` has two evaluation routes:
//!
//! * the explicit flat-space route `A = R * f_nn + S` with
//!   `R = 1 - sum_{j<n} f_j^2` and
//!   `S = sum_{k<n} (1 - f_n^2 - sum_{j<n, j!=k} f_j^2) f_kk + 2 sum_{j<k<n} f_j f_k f_jk
//!        + 2 sum_{j<n} f_j f_n f_jn`;
//! * the generic route `A = sum_ij cof_ij g(D_i F_j, nu) / rho`, valid for any metric, with
//!   `nu` the generalized cross product of the tangents and `rho = -sqrt|det g|`. This
//!   normalization makes both routes agree in Minkowski space.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprjet::{Expression, Jet3};
use crate::linalg;
use crate::lorentz::{bilinear, christoffel_from_sample, Christoffel, MetricField, MetricSample};
use crate::reduction::NormalizedGraph;

/// Default for the light-likeness gradient threshold.
pub const DEFAULT_TOL_GRAD: f64 = 1e-7;

/// The graph function: either a parsed expression or a re-graphed surface.
#[derive(Debug, Clone)]
pub enum GraphFunction {
    Expr(Expression),
    Normalized(Arc<NormalizedGraph>),
}

impl GraphFunction {
    pub fn jet(&self, x: &[f64]) -> Result<Jet3> {
        match self {
            GraphFunction::Expr(e) => e.eval_jet3(x),
            GraphFunction::Normalized(g) => g.jet(x),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            GraphFunction::Expr(e) => e.eval(x),
            GraphFunction::Normalized(g) => g.value(x),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GraphFunction::Expr(e) => e.arity(),
            GraphFunction::Normalized(g) => g.n(),
        }
    }
}

impl From<Expression> for GraphFunction {
    fn from(e: Expression) -> Self {
        GraphFunction::Expr(e)
    }
}

/// Axis-aligned box `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Domain> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::invalid(format!(
                "empty or malformed box {lo:?} .. {hi:?}"
            )));
        }
        Ok(Domain { lo, hi })
    }

    pub fn cube(n: usize, half_width: f64) -> Domain {
        Domain {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Tensor grid over a [`Domain`], `counts[i] >= 2` nodes along axis `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub counts: Vec<usize>,
}

impl Grid {
    pub fn new(counts: Vec<usize>) -> Result<Grid> {
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::invalid("grid needs at least 2 nodes per axis"));
        }
        Ok(Grid { counts })
    }

    pub fn uniform(n: usize, count: usize) -> Grid {
        Grid {
            counts: vec![count; n],
        }
    }

    pub fn coordinate(&self, domain: &Domain, axis: usize, k: usize) -> f64 {
        let (lo, hi) = (domain.lo[axis], domain.hi[axis]);
        if k + 1 == self.counts[axis] {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (self.counts[axis] - 1) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of the `flat`-th node, last axis fastest.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.counts.len()];
        for (slot, &c) in idx.iter_mut().zip(&self.counts).rev() {
            *slot = flat % c;
            flat /= c;
        }
        idx
    }

    pub fn node(&self, domain: &Domain, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(axis, &k)| self.coordinate(domain, axis, k))
            .collect()
    }

    /// All nodes in row-major order (last axis fastest).
    pub fn nodes(&self, domain: &Domain) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|f| self.node(domain, &self.index(f)))
            .collect()
    }

    fn check(&self, domain: &Domain) -> Result<()> {
        if self.counts.len() != domain.dim() {
            return Err(Error::invalid("grid and domain dimensions differ"));
        }
        Grid::new(self.counts.clone()).map(|_| ())
    }
}

#[derive(Debug, Clone)]
pub struct GraphHypersurface {
    n: usize,
    f: GraphFunction,
    metric: MetricField,
    phi: Expression,
    domain: Domain,
}

/// Induced metric, its cofactor matrix, `B = det(s)` and `grad B`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstFundamental {
    pub s: DMatrix<f64>,
    pub cof: DMatrix<f64>,
    pub b: f64,
    pub grad_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    SpaceLike,
    TimeLike,
    LightLike { degenerate: bool },
}

impl PointKind {
    pub fn label(self) -> &'static str {
        match self {
            PointKind::SpaceLike => "SpaceLike",
            PointKind::TimeLike => "TimeLike",
            PointKind::LightLike { degenerate: false } => "LightLike",
            PointKind::LightLike { degenerate: true } => "DegenerateLightLike",
        }
    }

    pub fn is_light_like(self) -> bool {
        matches!(self, PointKind::LightLike { .. })
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, PointKind::LightLike { degenerate: true })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointClass {
    pub kind: PointKind,
    pub b: f64,
    pub grad_norm: f64,
}

/// Classification thresholds. `tol_b = None` selects `1e-9 * (1 + |s|_F)` per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyTolerances {
    pub tol_b: Option<f64>,
    pub tol_grad: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances {
            tol_b: None,
            tol_grad: DEFAULT_TOL_GRAD,
        }
    }
}

impl ClassifyTolerances {
    pub fn tol_b_for(&self, s: &DMatrix<f64>) -> f64 {
        self.tol_b.unwrap_or_else(|| 1e-9 * (1.0 + s.norm()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusPoint {
    /// Axis the grid line runs along (0-based).
    pub axis: usize,
    /// Row-major index of the line among lines along `axis`.
    pub line: usize,
    pub x: Vec<f64>,
    pub class: PointClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusScan {
    pub points: Vec<LocusPoint>,
    /// Set when `|B| <= tol_b` at every grid node; bisection is skipped.
    pub identically_light_like: bool,
}

/// Everything the pointwise operators need at one parameter point.
pub(crate) struct PointData {
    n: usize,
    df: Vec<f64>,
    ddf: DMatrix<f64>,
    metric: MetricSample,
    gamma: Option<Christoffel>,
}

impl PointData {
    fn g(&self, a: usize, b: usize) -> f64 {
        self.metric.g[(a, b)]
    }

    /// `d ghat_ab / d x_k` along the graph.
    fn dg_hat(&self, k: usize, a: usize, b: usize) -> f64 {
        self.metric.dg[0][(a, b)] * self.df[k] + self.metric.dg[k + 1][(a, b)]
    }

    fn induced(&self) -> DMatrix<f64> {
        let n = self.n;
        let f = &self.df;
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f[i] * f[j] * self.g(0, 0)
                    + f[i] * self.g(0, j + 1)
                    + f[j] * self.g(i + 1, 0)
                    + self.g(i + 1, j + 1);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    fn d_induced(&self, k: usize) -> DMatrix<f64> {
        let n = self.n;
        let f = &self.df;
        let h = &self.ddf;
        let mut ds = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let (ii, jj) = (i + 1, j + 1);
                let v = (h[(i, k)] * f[j] + f[i] * h[(j, k)]) * self.g(0, 0)
                    + f[i] * f[j] * self.dg_hat(k, 0, 0)
                    + h[(i, k)] * self.g(0, jj)
                    + f[i] * self.dg_hat(k, 0, jj)
                    + h[(j, k)] * self.g(ii, 0)
                    + f[j] * self.dg_hat(k, ii, 0)
                    + self.dg_hat(k, ii, jj);
                ds[(i, j)] = v;
                ds[(j, i)] = v;
            }
        }
        ds
    }

    fn first_fundamental(&self) -> FirstFundamental {
        let s = self.induced();
        let cof = linalg::cofactor_symmetric(&s);
        let b = linalg::det(&s);
        let grad_b = (0..self.n)
            .map(|k| cof.component_mul(&self.d_induced(k)).sum())
            .collect();
        FirstFundamental { s, cof, b, grad_b }
    }

    fn tangents(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n + 1);
        for i in 0..n {
            m[(i, 0)] = self.df[i];
            m[(i, i + 1)] = 1.0;
        }
        m
    }

    /// Covector `omega(X) = det[X; F_1; ..; F_n]`.
    fn annihilator(&self) -> Vec<f64> {
        let m = self.tangents();
        (0..=self.n)
            .map(|beta| {
                let sign = if beta % 2 == 0 { 1.0 } else { -1.0 };
                sign * linalg::det(&m.clone().remove_column(beta))
            })
            .collect()
    }

    fn normal(&self) -> Vec<f64> {
        let omega = nalgebra::DVector::from_vec(self.annihilator());
        let scale = -self.metric.det.abs().sqrt();
        (&self.metric.inverse * omega * scale)
            .iter()
            .copied()
            .collect()
    }

    fn covariant_derivative(&self, i: usize, j: usize) -> Vec<f64> {
        let dim = self.n + 1;
        let f = &self.df;
        let mut out = vec![0.0; dim];
        out[0] = self.ddf[(i, j)];
        if let Some(gamma) = &self.gamma {
            for (alpha, o) in out.iter_mut().enumerate() {
                *o += f[i] * f[j] * gamma.get(alpha, 0, 0)
                    + f[i] * gamma.get(alpha, 0, j + 1)
                    + f[j] * gamma.get(alpha, i + 1, 0)
                    + gamma.get(alpha, i + 1, j + 1);
            }
        }
        out
    }

    fn operator_a_generic(&self) -> f64 {
        let cof = linalg::cofactor_symmetric(&self.induced());
        let nu = self.normal();
        let rho = -self.metric.det.abs().sqrt();
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = self.covariant_derivative(i, j);
                acc += cof[(i, j)] * bilinear(&self.metric.g, &d, &nu);
            }
        }
        acc / rho
    }

    fn operator_a_explicit(&self) -> f64 {
        let n = self.n;
        let last = n - 1;
        let f = &self.df;
        let h = &self.ddf;
        let r = 1.0 - (0..last).map(|j| f[j] * f[j]).sum::<f64>();
        let mut s = 0.0;
        for k in 0..last {
            let others: f64 = (0..last).filter(|&j| j != k).map(|j| f[j] * f[j]).sum();
            s += (1.0 - f[last] * f[last] - others) * h[(k, k)];
        }
        for j in 0..last {
            for k in j + 1..last {
                s += 2.0 * f[j] * f[k] * h[(j, k)];
            }
        }
        for j in 0..last {
            s += 2.0 * f[j] * f[last] * h[(j, last)];
        }
        r * h[(last, last)] + s
    }
}

impl GraphHypersurface {
    /// A graph over the spatial coordinates of `metric`, with `phi = 0` and domain `[-1, 1]^n`.
    pub fn new(f: impl Into<GraphFunction>, metric: MetricField) -> Result<GraphHypersurface> {
        let f = f.into();
        let n = metric.n();
        if n < 2 {
            return Err(Error::invalid("graph hypersurfaces need n >= 2"));
        }
        if f.arity() != n {
            return Err(Error::invalid(format!(
                "graph function has {} variables, metric needs {n}",
                f.arity()
            )));
        }
        Ok(GraphHypersurface {
            n,
            f,
            metric,
            phi: Expression::constant(0.0, n),
            domain: Domain::cube(n, 1.0),
        })
    }

    /// Parses `f` over `x1 .. xn` and pairs it with the flat metric.
    pub fn minkowski(f: &str, n: usize) -> Result<GraphHypersurface> {
        GraphHypersurface::new(Expression::parse(f, n)?, MetricField::minkowski(n))
    }

    pub fn with_phi(mut self, phi: Expression) -> Result<GraphHypersurface> {
        if phi.arity() != self.n || phi.first_index() != 1 {
            return Err(Error::invalid("phi must be an expression in x1..xn"));
        }
        self.phi = phi;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<GraphHypersurface> {
        if domain.dim() != self.n {
            return Err(Error::invalid("domain dimension differs from n"));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> &GraphFunction {
        &self.f
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn phi(&self) -> &Expression {
        &self.phi
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// True when `phi` is the constant zero.
    pub fn phi_is_zero(&self) -> bool {
        self.phi.as_constant() == Some(0.0)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "point {x:?} has {} coordinates, surface needs {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `F(x) = (f(x), x)`.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut p = Vec::with_capacity(self.n + 1);
        p.push(self.f.value(x)?);
        p.extend_from_slice(x);
        Ok(p)
    }

    /// Pointwise data from a (possibly synthetic) jet of `f` at `x`.
    pub(crate) fn point_data(&self, x: &[f64], jet: &Jet3, with_gamma: bool) -> Result<PointData> {
        let n = self.n;
        let mut p = Vec::with_capacity(n + 1);
        p.push(jet.value());
        p.extend_from_slice(x);
        let metric = self.metric.sample(&p)?;
        let gamma =
            (with_gamma && !self.metric.is_minkowski()).then(|| christoffel_from_sample(&metric));
        Ok(PointData {
            n,
            df: jet.grad().to_vec(),
            ddf: DMatrix::from_fn(n, n, |i, j| jet.d2(i, j)),
            metric,
            gamma,
        })
    }

    fn data(&self, x: &[f64], with_gamma: bool) -> Result<PointData> {
        self.check_point(x)?;
        let jet = self.f.jet(x)?;
        self.point_data(x, &jet, with_gamma)
    }

    pub fn first_fundamental(&self, x: &[f64]) -> Result<FirstFundamental> {
        Ok(self.data(x, false)?.first_fundamental())
    }

    /// Induced metric `s_ij` and its cofactor matrix.
    pub fn induced_metric(&self, x: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let s = self.data(x, false)?.induced();
        let cof = linalg::cofactor_symmetric(&s);
        Ok((s, cof))
    }

    /// `B = det(s)`.
    pub fn b_value(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::det(&self.data(x, false)?.induced()))
    }

    /// `grad B` through `dB/dx_k = sum_ij cof_ij ds_ij/dx_k`.
    pub fn gradient_b(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.first_fundamental(x)?.grad_b)
    }

    /// Normal field `nu^a = -sqrt|det g| g^{ab} det[e_b; F_1; ..; F_n]`.
    pub fn normal_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.data(x, false)?.normal())
    }

    /// Tangent vectors `F_{x_i} = f_i d_0 + d_i` as rows.
    pub fn tangents(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.data(x, false)?.tangents())
    }

    /// `A` through the connection and the normal field; valid for any metric.
    pub fn operator_a_generic(&self, x: &[f64]) -> Result<f64> {
        Ok(self.data(x, true)?.operator_a_generic())
    }

    /// `A = R f_nn + S` in flat space.
    pub fn operator_a_explicit(&self, x: &[f64]) -> Result<f64> {
        if !self.metric.is_minkowski() {
            return Err(Error::invalid(
                "the explicit operator route needs the flat metric",
            ));
        }
        Ok(self.data(x, false)?.operator_a_explicit())
    }

    /// `A`, explicit in flat space and generic otherwise.
    pub fn operator_a(&self, x: &[f64]) -> Result<f64> {
        let data = self.data(x, true)?;
        Ok(if self.metric.is_minkowski() {
            data.operator_a_explicit()
        } else {
            data.operator_a_generic()
        })
    }

    /// `A - phi B`.
    pub fn operator_tilde_a(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let jet = self.f.jet(x)?;
        self.tilde_a_from_jet(x, &jet)
    }

    pub(crate) fn tilde_a_from_jet(&self, x: &[f64], jet: &Jet3) -> Result<f64> {
        let data = self.point_data(x, jet, true)?;
        let a = if self.metric.is_minkowski() {
            data.operator_a_explicit()
        } else {
            data.operator_a_generic()
        };
        if self.phi_is_zero() {
            return Ok(a);
        }
        let b = linalg::det(&data.induced());
        Ok(a - self.phi.eval(x)? * b)
    }

    pub fn classify_point(&self, x: &[f64], tol: &ClassifyTolerances) -> Result<PointClass> {
        let ff = self.first_fundamental(x)?;
        Ok(classify(&ff, tol))
    }

    /// Classification of every grid node, row-major (last axis fastest).
    pub fn classify_grid(
        &self,
        grid: &Grid,
        tol: &ClassifyTolerances,
    ) -> Result<Vec<(Vec<f64>, PointClass)>> {
        grid.check(&self.domain)?;
        grid.nodes(&self.domain)
            .into_par_iter()
            .map(|x| {
                let class = self.classify_point(&x, tol)?;
                Ok((x, class))
            })
            .collect()
    }

    /// Light-like points found by bracketing sign changes of `B` along every grid line.
    ///
    /// Lines are ordered by axis, then by the row-major index of the remaining coordinates;
    /// points on a line are ordered by parameter. Grid nodes where `|B| <= tol_b` are reported
    /// once, from the lines along axis 0.
    pub fn scan_lightlike_locus(&self, grid: &Grid, tol: &ClassifyTolerances) -> Result<LocusScan> {
        grid.check(&self.domain)?;
        let nodes = grid.nodes(&self.domain);
        let values: Vec<(f64, f64)> = nodes
            .par_iter()
            .map(|x| {
                let s = self.data(x, false)?.induced();
                Ok((linalg::det(&s), tol.tol_b_for(&s)))
            })
            .collect::<Result<_>>()?;
        if values.iter().all(|(b, t)| b.abs() <= *t) {
            return Ok(LocusScan {
                points: Vec::new(),
                identically_light_like: true,
            });
        }

        let mut lines = Vec::new();
        for axis in 0..self.n {
            let mut other = grid.counts.clone();
            other[axis] = 1;
            let other_grid = Grid { counts: other };
            for line in 0..other_grid.len() {
                lines.push((axis, line, other_grid.index(line)));
            }
        }
        let flat = |idx: &[usize]| {
            idx.iter()
                .zip(&grid.counts)
                .fold(0, |acc, (&i, &c)| acc * c + i)
        };

        let per_line: Vec<Vec<LocusPoint>> = lines
            .par_iter()
            .map(|(axis, line, base)| {
                let (axis, line) = (*axis, *line);
                let mut found = Vec::new();
                let mut idx = base.clone();
                let count = grid.counts[axis];
                for k in 0..count {
                    idx[axis] = k;
                    let (bk, tk) = values[flat(&idx)];
                    if bk.abs() <= tk {
                        if axis == 0 {
                            let x = grid.node(&self.domain, &idx);
                            let class = self.classify_point(&x, tol)?;
                            found.push(LocusPoint {
                                axis,
                                line,
                                x,
                                class,
                            });
                        }
                        continue;
                    }
                    if k + 1 == count {
                        break;
                    }
                    let mut next = idx.clone();
                    next[axis] = k + 1;
                    let (bn, tn) = values[flat(&next)];
                    if bn.abs() <= tn || bk.signum() == bn.signum() {
                        continue;
                    }
                    let x0 = grid.node(&self.domain, &idx);
                    let x1 = grid.node(&self.domain, &next);
                    if let Some(x) = self.bisect(&x0, &x1, axis, bk, tol)? {
                        let class = self.classify_point(&x, tol)?;
                        found.push(LocusPoint {
                            axis,
                            line,
                            x,
                            class,
                        });
                    }
                }
                Ok(found)
            })
            .collect::<Result<_>>()?;

        Ok(LocusScan {
            points: per_line.into_iter().flatten().collect(),
            identically_light_like: false,
        })
    }

    fn bisect(
        &self,
        x0: &[f64],
        x1: &[f64],
        axis: usize,
        b0: f64,
        tol: &ClassifyTolerances,
    ) -> Result<Option<Vec<f64>>> {
        let (mut lo, mut hi) = (x0[axis], x1[axis]);
        let mut x = x0.to_vec();
        let mut best = (f64::INFINITY, lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            x[axis] = mid;
            let b = self.b_value(&x)?;
            if b.abs() < best.0 {
                best = (b.abs(), mid);
            }
            if b == 0.0 {
                break;
            }
            if b.signum() == b0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x[axis] = best.1;
        let s = self.data(&x, false)?.induced();
        Ok((best.0 <= tol.tol_b_for(&s)).then_some(x))
    }
}

fn classify(ff: &FirstFundamental, tol: &ClassifyTolerances) -> PointClass {
    let grad_norm = ff.grad_b.iter().map(|g| g * g).sum::<f64>().sqrt();
    let kind = if ff.b.abs() <= tol.tol_b_for(&ff.s) {
        PointKind::LightLike {
            degenerate: grad_norm <= tol.tol_grad,
        }
    } else if ff.b > 0.0 {
        PointKind::SpaceLike
    } else {
        PointKind::TimeLike
    };
    PointClass {
        kind,
        b: ff.b,
        grad_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mink(f: &str, n: usize) -> GraphHypersurface {
        GraphHypersurface::minkowski(f, n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn flat_plane_is_space_like() {
        let s = mink("0", 3);
        let x = [0.3, -0.2, 0.9];
        let (g, cof) = s.induced_metric(&x).unwrap();
        assert_eq!(g, DMatrix::identity(3, 3));
        assert_eq!(cof, DMatrix::identity(3, 3));
        assert_eq!(s.b_value(&x).unwrap(), 1.0);
        assert_eq!(s.gradient_b(&x).unwrap(), vec![0.0; 3]);
        let nu = s.normal_vector(&x).unwrap();
        assert!(nu[0] > 0.0 && nu[1..].iter().all(|&v| v == 0.0));
        let class = s
            .classify_point(&x, &ClassifyTolerances::default())
            .unwrap();
        assert_eq!(class.kind, PointKind::SpaceLike);
        assert_eq!(class.b, 1.0);
    }

    #[test]
    fn null_plane_is_degenerate_everywhere() {
        let s = mink("xn", 3);
        let x = [0.5, 0.1, -0.7];
        let (g, _) = s.induced_metric(&x).unwrap();
        assert_eq!(
            g,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0]))
        );
        assert_eq!(s.b_value(&x).unwrap(), 0.0);
        assert_eq!(s.gradient_b(&x).unwrap(), vec![0.0; 3]);
        let nu = s.normal_vector(&x).unwrap();
        assert!(nu[0] > 0.0 && close(nu[0], nu[3], 1e-15) && nu[1] == 0.0 && nu[2] == 0.0);
        assert_eq!(s.operator_a(&x).unwrap(), 0.0);
        let class = s
            .classify_point(&x, &ClassifyTolerances::default())
            .unwrap();
        assert_eq!(class.kind, PointKind::LightLike { degenerate: true });
    }

    #[test]
    fn tanh_graph_pointwise_values() {
        let s = mink("x1*tanh(x2)", 2);
        let (g, _) = s.induced_metric(&[1.0, 0.0]).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let nu = s.normal_vector(&[1.0, 0.0]).unwrap();
        assert!(close(nu[0], 1.0, 1e-15) && close(nu[1], 0.0, 1e-15) && close(nu[2], 1.0, 1e-15));

        let x = [1f64.cosh(), 1.0];
        let sech = 1.0 / 1f64.cosh();
        assert!(s.b_value(&x).unwrap().abs() < 1e-15);
        let grad = s.gradient_b(&x).unwrap();
        assert!(close(grad[0], -2.0 * 1f64.cosh() * sech.powi(4), 1e-14));
        let class = s
            .classify_point(&x, &ClassifyTolerances::default())
            .unwrap();
        assert_eq!(class.kind, PointKind::LightLike { degenerate: false });
    }

    #[test]
    fn gradient_b_matches_closed_form_and_differences() {
        let s = mink("x1*tanh(x2)", 2);
        let closed = |x1: f64, x2: f64| {
            let sech2 = 1.0 / x2.cosh().powi(2);
            sech2 * (1.0 - x1 * x1 * sech2)
        };
        for &(x1, x2) in &[(0.3, -0.4), (1.2, 0.8), (-2.0, 1.5)] {
            let b = s.b_value(&[x1, x2]).unwrap();
            assert!(close(b, closed(x1, x2), 1e-14));
            let grad = s.gradient_b(&[x1, x2]).unwrap();
            let h = 1e-5;
            let d1 = (closed(x1 + h, x2) - closed(x1 - h, x2)) / (2.0 * h);
            let d2 = (closed(x1, x2 + h) - closed(x1, x2 - h)) / (2.0 * h);
            assert!(close(grad[0], d1, 1e-8) && close(grad[1], d2, 1e-8));
        }
    }

    #[test]
    fn operator_a_examples() {
        let s = mink("x1*tanh(x2)", 2);
        for &x in &[[0.3, -0.4], [1.2, 0.8], [-2.0, 1.5]] {
            assert!(s.operator_a_explicit(&x).unwrap().abs() < 1e-14);
            assert!(s.operator_a_generic(&x).unwrap().abs() < 1e-14);
        }
        let s = mink("x1^2/2", 2);
        assert_eq!(s.operator_a_explicit(&[0.0, 0.0]).unwrap(), 1.0);
        assert!(close(
            s.operator_a_generic(&[0.0, 0.0]).unwrap(),
            1.0,
            1e-15
        ));
    }

    #[test]
    fn tilde_a_subtracts_phi_b() {
        let s = mink("0", 2)
            .with_phi(Expression::parse("1", 2).unwrap())
            .unwrap();
        assert_eq!(s.operator_tilde_a(&[0.2, 0.4]).unwrap(), -1.0);
        let s = mink("x1*x2 + x2^3", 2);
        let x = [0.1, 0.2];
        assert_eq!(s.operator_tilde_a(&x).unwrap(), s.operator_a(&x).unwrap());
    }

    #[test]
    fn explicit_route_needs_flat_metric() {
        let g =
            MetricField::parse_upper_triangle(2, &["-(1+x1^2)", "0", "0", "1", "0", "1"]).unwrap();
        let s = GraphHypersurface::new(Expression::parse("x1", 2).unwrap(), g).unwrap();
        assert!(matches!(
            s.operator_a_explicit(&[0.0, 0.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(s.operator_a(&[0.0, 0.0]).is_ok());
    }

    #[test]
    fn normal_is_orthogonal_in_curved_metric() {
        let g = MetricField::parse_upper_triangle(
            2,
            &["-(1+0.3*x1^2)", "0.1*x2", "0", "1+0.2*x0^2", "0.05", "1"],
        )
        .unwrap();
        let s = GraphHypersurface::new(
            Expression::parse("0.4*x1 + 0.2*x2^2", 2).unwrap(),
            g.clone(),
        )
        .unwrap();
        let x = [0.3, -0.5];
        let p = s.embed(&x).unwrap();
        let nu = s.normal_vector(&x).unwrap();
        let tangents = s.tangents(&x).unwrap();
        for i in 0..2 {
            let t: Vec<f64> = tangents.row(i).iter().copied().collect();
            assert!(g.inner(&p, &nu, &t).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn grid_ordering_is_row_major() {
        let grid = Grid::new(vec![2, 3]).unwrap();
        let d = Domain::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let nodes = grid.nodes(&d);
        assert_eq!(nodes[0], vec![0.0, 0.0]);
        assert_eq!(nodes[1], vec![0.0, 1.0]);
        assert_eq!(nodes[3], vec![1.0, 0.0]);
        assert!(Grid::new(vec![1, 3]).is_err());
        assert!(Domain::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn locus_examples() {
        let tol = ClassifyTolerances::default();
        let s = mink("0", 2).with_domain(Domain::cube(2, 1.0)).unwrap();
        let scan = s.scan_lightlike_locus(&Grid::uniform(2, 11), &tol).unwrap();
        assert!(scan.points.is_empty() && !scan.identically_light_like);

        let s = mink("xn", 2);
        let scan = s.scan_lightlike_locus(&Grid::uniform(2, 5), &tol).unwrap();
        assert!(scan.points.is_empty() && scan.identically_light_like);

        let s = mink("x1*tanh(x2)", 2)
            .with_domain(Domain::cube(2, 3.0))
            .unwrap();
        let scan = s
            .scan_lightlike_locus(&Grid::uniform(2, 101), &tol)
            .unwrap();
        assert!(!scan.points.is_empty());
        for p in &scan.points {
            let off = (p.x[0].abs() - p.x[1].cosh()).abs();
            assert!(off < 1e-6, "{:?} off by {off}", p.x);
            assert_eq!(p.class.kind, PointKind::LightLike { degenerate: false });
        }
        // Ordering: axis, then line, then parameter.
        for w in scan.points.windows(2) {
            let key = |p: &LocusPoint| (p.axis, p.line);
            assert!(key(&w[0]) <= key(&w[1]));
            if key(&w[0]) == key(&w[1]) {
                assert!(w[0].x[w[0].axis] < w[1].x[w[1].axis]);
            }
        }
    }
}
