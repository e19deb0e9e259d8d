//! Reduction of the zero mean curvature equation to an ODE system along the `xn`-axis.
//!
//! Writing `y = xn` and `f = a(y) + sum_i b_i(y) x_i + c(x, y)`, the restrictions of `A` and
//! `A_{x_l}` to the axis are
//!
//! ```text
//! alpha   = C a'' + sum_j c_jj (D + b_j^2) + 2 sum_{i<j} b_i b_j c_ij + 2 sum_i a' b_i b'_i
//! alpha_l = C b_l'' - 2 (sum_j b_j c_jl) a'' + sum_j (D + b_j^2) c_jjl
//!         - 2 sum_j (a' b'_l + sum_{i!=j} b_i c_il) c_jj
//!         + 2 sum_{i<j} (b_j c_il c_ij + b_i c_jl c_ij + b_i b_j c_ijl)
//!         + 2 sum_i (c_il a' b'_i + b_i b'_l b'_i + b_i a' c'_il)
//! ```
//!
//! with `C = 1 - sum b_i^2` and `D = 1 - a'^2 - sum b_i^2` (flat metric). Solving `alpha = 0`
//! for `a''` and then each `alpha_l = 0` for `b_l''` gives the normal form
//! `a'' = P(y, a, a', b, b')`, `b_l'' = Q_l(y, a, a', b, b')`, where the `c` blocks and `phi`
//! are frozen functions of `y` read off the surface.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprjet::{Expression, Jet3};
use crate::surface::{Domain, GraphFunction, GraphHypersurface};

/// `|C|` below this makes the normal form singular.
pub const SINGULAR_C_FLOOR: f64 = 1e-8;

/// Axis identities are checked to this absolute residual.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Restriction data of `f` and `phi` at the axis point `(0, .., 0, y)`.
///
/// Spatial indices run over `0 .. n-1` (the coordinates `x1 .. x_{n-1}`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisProfile {
    pub y: f64,
    pub a: f64,
    pub a_prime: f64,
    pub a_second: f64,
    pub b: Vec<f64>,
    pub b_prime: Vec<f64>,
    pub b_second: Vec<f64>,
    /// `c_ij = f_{x_i x_j}` on the axis.
    pub c2: Vec<Vec<f64>>,
    /// `c'_ij = f_{x_i x_j y}` on the axis.
    pub c2_prime: Vec<Vec<f64>>,
    /// `c_ijk = f_{x_i x_j x_k}` on the axis.
    pub c3: Vec<Vec<Vec<f64>>>,
    pub phi: f64,
    pub phi_grad: Vec<f64>,
}

/// State of the first-order form of the reduced system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeState {
    pub y: f64,
    pub a: f64,
    pub a_prime: f64,
    pub b: Vec<f64>,
    pub b_prime: Vec<f64>,
}

impl OdeState {
    /// Initial data of a degenerate light-like point: `a = 0, a' = 1, b = b' = 0`.
    pub fn degenerate_initial(n: usize, y: f64) -> OdeState {
        OdeState {
            y,
            a: 0.0,
            a_prime: 1.0,
            b: vec![0.0; n - 1],
            b_prime: vec![0.0; n - 1],
        }
    }

    /// `[a, a', b.., b'..]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.a, self.a_prime];
        v.extend_from_slice(&self.b);
        v.extend_from_slice(&self.b_prime);
        v
    }

    pub fn from_vec(y: f64, v: &[f64]) -> OdeState {
        let m = (v.len() - 2) / 2;
        OdeState {
            y,
            a: v[0],
            a_prime: v[1],
            b: v[2..2 + m].to_vec(),
            b_prime: v[2 + m..].to_vec(),
        }
    }

    /// `C = 1 - sum b_i^2`.
    pub fn c_coefficient(&self) -> f64 {
        1.0 - self.b.iter().map(|b| b * b).sum::<f64>()
    }
}

impl AxisProfile {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn c_coefficient(&self) -> f64 {
        1.0 - self.b.iter().map(|b| b * b).sum::<f64>()
    }

    pub fn d_coefficient(&self) -> f64 {
        self.c_coefficient() - self.a_prime * self.a_prime
    }

    /// Replaces the unknowns with `state`, keeping the frozen `c` and `phi` data.
    pub fn with_state(&self, state: &OdeState) -> AxisProfile {
        AxisProfile {
            y: state.y,
            a: state.a,
            a_prime: state.a_prime,
            b: state.b.clone(),
            b_prime: state.b_prime.clone(),
            ..self.clone()
        }
    }

    /// `dB/dx_l` on the axis in flat space: `-2 (sum_j b_j c_jl + a' b'_l)`.
    fn b_derivative(&self, l: usize) -> f64 {
        let s: f64 = (0..self.m()).map(|j| self.b[j] * self.c2[j][l]).sum();
        -2.0 * (s + self.a_prime * self.b_prime[l])
    }
}

/// Restriction of `A` to the axis (flat metric).
pub fn alpha(p: &AxisProfile) -> f64 {
    let m = p.m();
    let c = p.c_coefficient();
    let d = p.d_coefficient();
    let b = &p.b;
    let mut acc = c * p.a_second;
    for j in 0..m {
        acc += p.c2[j][j] * (d + b[j] * b[j]);
    }
    for i in 0..m {
        for j in i + 1..m {
            acc += 2.0 * b[i] * b[j] * p.c2[i][j];
        }
    }
    for i in 0..m {
        acc += 2.0 * p.a_prime * b[i] * p.b_prime[i];
    }
    acc
}

/// Restriction of `A_{x_l}` to the axis (flat metric); `l` is 0-based.
pub fn alpha_l(p: &AxisProfile, l: usize) -> f64 {
    let m = p.m();
    let c = p.c_coefficient();
    let d = p.d_coefficient();
    let (b, bp, c2, c3) = (&p.b, &p.b_prime, &p.c2, &p.c3);
    let ap = p.a_prime;

    let mut acc = c * p.b_second[l];
    let bc: f64 = (0..m).map(|j| b[j] * c2[j][l]).sum();
    acc -= 2.0 * bc * p.a_second;
    for j in 0..m {
        acc += (d + b[j] * b[j]) * c3[j][j][l];
    }
    for j in 0..m {
        let inner: f64 = (0..m).filter(|&i| i != j).map(|i| b[i] * c2[i][l]).sum();
        acc -= 2.0 * (ap * bp[l] + inner) * c2[j][j];
    }
    for i in 0..m {
        for j in i + 1..m {
            acc += 2.0
                * (b[j] * c2[i][l] * c2[i][j]
                    + b[i] * c2[j][l] * c2[i][j]
                    + b[i] * b[j] * c3[i][j][l]);
        }
    }
    for i in 0..m {
        acc += 2.0 * (c2[i][l] * ap * bp[i] + b[i] * bp[l] * bp[i] + b[i] * ap * p.c2_prime[i][l]);
    }
    acc
}

/// Restrictions of `A - phi B` and its `x_l` derivatives to the axis (flat metric).
pub fn tilde_alpha(p: &AxisProfile) -> (f64, Vec<f64>) {
    let d = p.d_coefficient();
    let a0 = alpha(p) - p.phi * d;
    let al = (0..p.m())
        .map(|l| alpha_l(p, l) - p.phi_grad[l] * d - p.phi * p.b_derivative(l))
        .collect();
    (a0, al)
}

fn axis_point(n: usize, y: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[n - 1] = y;
    x
}

/// Reads the axis profile at `y` off the surface and checks the decomposition identities.
pub fn decompose(s: &GraphHypersurface, y: f64) -> Result<AxisProfile> {
    let n = s.n();
    let m = n - 1;
    let x = axis_point(n, y);
    let f = s.f().jet(&x)?;
    let phi = s.phi().eval_jet3(&x)?;

    let profile = AxisProfile {
        y,
        a: f.value(),
        a_prime: f.d1(m),
        a_second: f.d2(m, m),
        b: (0..m).map(|i| f.d1(i)).collect(),
        b_prime: (0..m).map(|i| f.d2(i, m)).collect(),
        b_second: (0..m).map(|i| f.d3(i, m, m)).collect(),
        c2: (0..m)
            .map(|i| (0..m).map(|j| f.d2(i, j)).collect())
            .collect(),
        c2_prime: (0..m)
            .map(|i| (0..m).map(|j| f.d3(i, j, m)).collect())
            .collect(),
        c3: (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..m).map(|k| f.d3(i, j, k)).collect())
                    .collect()
            })
            .collect(),
        phi: phi.value(),
        phi_grad: (0..m).map(|i| phi.d1(i)).collect(),
    };
    check_identities(&profile, &f)?;
    Ok(profile)
}

/// Rebuilds the jet of `c = f - a(y) - sum b_i(y) x_i` on the axis and checks that `c`,
/// `c_{x_i}`, `c_y`, `c_{y x_i}`, `c_{yy x_i}` vanish and that `c_{x_i x_j x_k}`, `c_{y x_i x_j}`
/// match the corresponding derivatives of `f`.
fn check_identities(p: &AxisProfile, f: &Jet3) -> Result<()> {
    let n = f.arity();
    let m = n - 1;
    let lift = |v: f64, d1: f64, d2: f64, d3: f64| {
        Jet3::from_parts(
            v,
            &(0..n)
                .map(|k| if k == m { d1 } else { 0.0 })
                .collect::<Vec<_>>(),
            |i, j| if i == m && j == m { d2 } else { 0.0 },
            |i, j, k| if i == m && j == m && k == m { d3 } else { 0.0 },
        )
    };
    let mut c = f - &lift(p.a, p.a_prime, p.a_second, f.d3(m, m, m));
    for i in 0..m {
        let bi = lift(p.b[i], p.b_prime[i], p.b_second[i], 0.0);
        let xi = Jet3::variable(0.0, i, n);
        c = &c - &(&bi * &xi);
    }

    let fail = |which: String, residual: f64| Error::IdentityViolation {
        which,
        y: p.y,
        residual,
    };
    let mut checks = vec![("c".to_string(), c.value()), ("c_y".to_string(), c.d1(m))];
    for i in 0..m {
        checks.push((format!("c_x{}", i + 1), c.d1(i)));
        checks.push((format!("c_yx{}", i + 1), c.d2(m, i)));
        checks.push((format!("c_yyx{}", i + 1), c.d3(m, m, i)));
        for j in 0..m {
            checks.push((
                format!("c_yx{}x{} - f_yx{}x{}", i + 1, j + 1, i + 1, j + 1),
                c.d3(m, i, j) - f.d3(m, i, j),
            ));
            for k in 0..m {
                checks.push((
                    format!(
                        "c_x{}x{}x{} - f_x{}x{}x{}",
                        i + 1,
                        j + 1,
                        k + 1,
                        i + 1,
                        j + 1,
                        k + 1
                    ),
                    c.d3(i, j, k) - f.d3(i, j, k),
                ));
            }
        }
    }
    for (which, residual) in checks {
        if !(residual.abs() <= IDENTITY_TOL) {
            return Err(fail(which, residual));
        }
    }
    Ok(())
}

/// `|a|, |a' - 1|, |b_i|, |b'_i| <= tol`.
pub fn is_degenerate_initial(p: &AxisProfile, tol: f64) -> bool {
    p.a.abs() <= tol
        && (p.a_prime - 1.0).abs() <= tol
        && p.b.iter().all(|b| b.abs() <= tol)
        && p.b_prime.iter().all(|b| b.abs() <= tol)
}

fn check_state(s: &GraphHypersurface, state: &OdeState) -> Result<()> {
    let m = s.n() - 1;
    if state.b.len() != m || state.b_prime.len() != m {
        return Err(Error::invalid(format!(
            "ODE state needs b, b' of length {m}"
        )));
    }
    let c = state.c_coefficient();
    if !(c.abs() >= SINGULAR_C_FLOOR) {
        return Err(Error::SingularC { y: state.y, c });
    }
    Ok(())
}

/// Right-hand side `(a'', b'')` of the normal form at `state`.
///
/// Uses the explicit flat-space restrictions when the metric is Minkowski and
/// [`ode_rhs_generic`] otherwise.
pub fn ode_rhs(s: &GraphHypersurface, state: &OdeState) -> Result<(f64, Vec<f64>)> {
    if !s.metric().is_minkowski() {
        return ode_rhs_generic(s, state);
    }
    check_state(s, state)?;
    let frozen = decompose(s, state.y)?;
    let mut p = frozen.with_state(state);
    let c = p.c_coefficient();

    p.a_second = 0.0;
    p.b_second = vec![0.0; p.m()];
    let (rest, _) = tilde_alpha(&p);
    let a_second = -rest / c;

    p.a_second = a_second;
    let (_, rest_l) = tilde_alpha(&p);
    let b_second = rest_l.iter().map(|r| -r / c).collect();
    Ok((a_second, b_second))
}

/// Cubic Taylor jet of `f` at `(offset, y)` built from the profile, with `f_yyy = 0`.
fn taylor_jet(p: &AxisProfile, offset: &[f64]) -> Jet3 {
    let m = p.m();
    let n = m + 1;
    let grad: Vec<f64> = (0..n)
        .map(|i| if i == m { p.a_prime } else { p.b[i] })
        .collect();
    let hess = |i: usize, j: usize| match (i == m, j == m) {
        (true, true) => p.a_second,
        (true, false) => p.b_prime[j],
        (false, true) => p.b_prime[i],
        (false, false) => p.c2[i][j],
    };
    let third = |i: usize, j: usize, k: usize| {
        let mut idx = [i, j, k];
        idx.sort_unstable();
        let ys = idx.iter().filter(|&&t| t == m).count();
        match ys {
            0 => p.c3[idx[0]][idx[1]][idx[2]],
            1 => p.c2_prime[idx[0]][idx[1]],
            2 => p.b_second[idx[0]],
            _ => 0.0,
        }
    };
    let base = Jet3::from_parts(p.a, &grad, hess, third);
    if offset.iter().all(|&d| d == 0.0) {
        return base;
    }
    // Shift the cubic Taylor polynomial to the offset point.
    let mut d = offset.to_vec();
    d.push(0.0);
    let g = |i: usize| {
        let mut v = base.d1(i);
        for j in 0..n {
            v += base.d2(i, j) * d[j];
            for k in 0..n {
                v += 0.5 * base.d3(i, j, k) * d[j] * d[k];
            }
        }
        v
    };
    let mut value = base.value();
    for i in 0..n {
        value += base.d1(i) * d[i];
        for j in 0..n {
            value += 0.5 * base.d2(i, j) * d[i] * d[j];
            for k in 0..n {
                value += base.d3(i, j, k) * d[i] * d[j] * d[k] / 6.0;
            }
        }
    }
    let grad: Vec<f64> = (0..n).map(g).collect();
    Jet3::from_parts(
        value,
        &grad,
        |i, j| base.d2(i, j) + (0..n).map(|k| base.d3(i, j, k) * d[k]).sum::<f64>(),
        |i, j, k| base.d3(i, j, k),
    )
}

/// Step for the central differences of `A - phi B` across the axis.
const GENERIC_FD_STEP: f64 = 1e-3;

/// Normal form through pointwise evaluation of `A - phi B` on a Taylor model of the surface.
///
/// `A` is affine in `f_nn` with slope `R`, and `A_{x_l}` is affine in `f_{nn x_l}` with the same
/// slope; the `x_l` derivative is a Richardson-extrapolated central difference.
pub fn ode_rhs_generic(s: &GraphHypersurface, state: &OdeState) -> Result<(f64, Vec<f64>)> {
    let m = s.n() - 1;
    if state.b.len() != m || state.b_prime.len() != m {
        return Err(Error::invalid(format!(
            "ODE state needs b, b' of length {m}"
        )));
    }
    let frozen = decompose(s, state.y)?;
    let mut p = frozen.with_state(state);
    p.a_second = 0.0;
    p.b_second = vec![0.0; m];
    let axis = axis_point(s.n(), state.y);
    let zero = vec![0.0; m];

    let rest = s.tilde_a_from_jet(&axis, &taylor_jet(&p, &zero))?;
    p.a_second = 1.0;
    let slope = s.tilde_a_from_jet(&axis, &taylor_jet(&p, &zero))? - rest;
    if !(slope.abs() >= SINGULAR_C_FLOOR) {
        return Err(Error::SingularC {
            y: state.y,
            c: slope,
        });
    }
    let a_second = -rest / slope;
    p.a_second = a_second;

    let mut b_second = Vec::with_capacity(m);
    for l in 0..m {
        let central = |h: f64| -> Result<f64> {
            let eval = |sign: f64| {
                let mut off = zero.clone();
                off[l] = sign * h;
                let mut x = axis.clone();
                x[l] = sign * h;
                s.tilde_a_from_jet(&x, &taylor_jet(&p, &off))
            };
            Ok((eval(1.0)? - eval(-1.0)?) / (2.0 * h))
        };
        let coarse = central(GENERIC_FD_STEP)?;
        let fine = central(0.5 * GENERIC_FD_STEP)?;
        let derivative = (4.0 * fine - coarse) / 3.0;
        b_second.push(-derivative / slope);
    }
    Ok((a_second, b_second))
}

/// A graph re-expressed in Lorentz-transformed flat coordinates `X = L (p - F(q))`.
#[derive(Debug, Clone)]
pub struct NormalizedGraph {
    n: usize,
    base: Expression,
    q: Vec<f64>,
    origin: Vec<f64>,
    transform: DMatrix<f64>,
}

/// Newton iterations allowed when solving for the preimage of a point.
const REGRAPH_MAX_ITER: usize = 50;

impl NormalizedGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The Lorentz transformation applied after translating `F(q)` to the origin.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    fn map_spatial_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n;
        let jet = self.base.eval_jet3(x)?;
        let mut rel = DVector::zeros(n + 1);
        rel[0] = jet.value() - self.origin[0];
        for i in 0..n {
            rel[i + 1] = x[i] - self.q[i];
        }
        let mapped = &self.transform * rel;
        let jac = DMatrix::from_fn(n, n, |k, i| {
            self.transform[(k + 1, 0)] * jet.d1(i) + self.transform[(k + 1, i + 1)]
        });
        Ok((mapped, jac))
    }

    fn preimage(&self, target: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.n;
        let fail = || Error::ReGraphFailure {
            point: target.to_vec(),
        };
        let (_, jac0) = self.map_spatial_jacobian(&self.q)?;
        let lu0 = jac0.lu();
        let guess = lu0
            .solve(&DVector::from_column_slice(target))
            .ok_or_else(fail)?;
        let mut x: Vec<f64> = (0..n).map(|i| self.q[i] + guess[i]).collect();
        for _ in 0..REGRAPH_MAX_ITER {
            let (mapped, jac) = self.map_spatial_jacobian(&x)?;
            let residual = DVector::from_fn(n, |k, _| mapped[k + 1] - target[k]);
            let scale = 1.0 + target.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            if residual.amax() <= 1e-14 * scale {
                return Ok((x, jac));
            }
            let step = jac.clone().lu().solve(&residual).ok_or_else(fail)?;
            for i in 0..n {
                x[i] -= step[i];
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(fail());
            }
        }
        Err(fail())
    }

    pub fn value(&self, target: &[f64]) -> Result<f64> {
        let (x, _) = self.preimage(target)?;
        let (mapped, _) = self.map_spatial_jacobian(&x)?;
        Ok(mapped[0])
    }

    /// Jet of the re-graphed function, by Newton iteration in jet arithmetic with the Jacobian
    /// frozen at the solution. Each sweep gains one derivative order.
    pub fn jet(&self, target: &[f64]) -> Result<Jet3> {
        let n = self.n;
        let (x, jac) = self.preimage(target)?;
        let inv = jac.try_inverse().ok_or_else(|| Error::ReGraphFailure {
            point: target.to_vec(),
        })?;
        let targets = Jet3::seed(target);
        let mut xs: Vec<Jet3> = x.iter().map(|&v| Jet3::constant(v, n)).collect();
        let rel = |xs: &[Jet3]| -> Result<Vec<Jet3>> {
            let fx = self.base.eval_with(xs)?;
            let mut rel = vec![fx.add_const(-self.origin[0])];
            rel.extend(xs.iter().zip(&self.q).map(|(xi, qi)| xi.add_const(-qi)));
            Ok((0..=n)
                .map(|k| {
                    rel.iter()
                        .enumerate()
                        .fold(Jet3::constant(0.0, n), |acc, (c, r)| {
                            &acc + &r.scale(self.transform[(k, c)])
                        })
                })
                .collect())
        };
        for _ in 0..4 {
            let mapped = rel(&xs)?;
            let residual: Vec<Jet3> = (0..n).map(|k| &mapped[k + 1] - &targets[k]).collect();
            xs = (0..n)
                .map(|i| {
                    (0..n).fold(xs[i].clone(), |acc, k| {
                        &acc - &residual[k].scale(inv[(i, k)])
                    })
                })
                .collect();
        }
        Ok(rel(&xs)?.swap_remove(0))
    }
}

/// Moves `F(q)` to the origin and applies a Lorentz transformation sending `dF(v)` to
/// `(1, 0, .., 0, 1)`, then re-expresses the surface as a graph `X0 = g(X1, .., Xn)`.
///
/// Flat metric and `phi = 0` only. The returned domain is a cube around the origin sized from
/// the distance of `q` to the boundary of the original domain.
pub fn normalize_graph(s: &GraphHypersurface, q: &[f64], v: &[f64]) -> Result<GraphHypersurface> {
    let n = s.n();
    if !s.metric().is_minkowski() {
        return Err(Error::invalid(
            "normalization is implemented for the flat metric only",
        ));
    }
    if !s.phi_is_zero() {
        return Err(Error::invalid("normalization requires phi = 0"));
    }
    let GraphFunction::Expr(base) = s.f() else {
        return Err(Error::invalid("surface is already normalized"));
    };
    if q.len() != n || v.len() != n {
        return Err(Error::invalid(
            "base point and direction need n coordinates",
        ));
    }
    let jet = base.eval_jet3(q)?;
    let mut w: Vec<f64> = std::iter::once((0..n).map(|i| jet.d1(i) * v[i]).sum())
        .chain(v.iter().copied())
        .collect();
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    if norm2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q_norm = -w[0] * w[0] + w[1..].iter().map(|x| x * x).sum::<f64>();
    if q_norm.abs() > 1e-9 * norm2 {
        return Err(Error::NotLightLike { norm: q_norm });
    }
    if w[0] < 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
    }
    let w0 = w[0];

    // Reflection of the spatial part onto the last axis.
    let u: Vec<f64> = w[1..].iter().map(|x| x / w0).collect();
    let mut refl = DMatrix::<f64>::identity(n, n);
    let mut r = u.clone();
    r[n - 1] -= 1.0;
    let rr: f64 = r.iter().map(|x| x * x).sum();
    if rr > 1e-30 {
        for i in 0..n {
            for j in 0..n {
                refl[(i, j)] -= 2.0 * r[i] * r[j] / rr;
            }
        }
    }
    let mut rotation = DMatrix::<f64>::identity(n + 1, n + 1);
    rotation.view_mut((1, 1), (n, n)).copy_from(&refl);

    // Boost in the (x0, xn) plane scaling the null vector (w0, .., w0) to (1, .., 1).
    let theta = w0.ln();
    let (ch, sh) = (theta.cosh(), theta.sinh());
    let mut boost = DMatrix::<f64>::identity(n + 1, n + 1);
    boost[(0, 0)] = ch;
    boost[(0, n)] = -sh;
    boost[(n, 0)] = -sh;
    boost[(n, n)] = ch;

    let transform = boost * rotation;
    let origin = s.embed(q)?;
    let graph = NormalizedGraph {
        n,
        base: base.clone(),
        q: q.to_vec(),
        origin,
        transform,
    };

    let dom = s.domain();
    let dist = (0..n)
        .map(|i| (q[i] - dom.lo[i]).min(dom.hi[i] - q[i]))
        .fold(f64::INFINITY, f64::min);
    let half = 0.5 * dist.max(0.0) * w0.min(1.0 / w0);
    let half = if half > 0.0 { half } else { 0.1 };

    GraphHypersurface::new(
        GraphFunction::Normalized(std::sync::Arc::new(graph)),
        s.metric().clone(),
    )?
    .with_domain(Domain::cube(n, half))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(m: usize) -> AxisProfile {
        AxisProfile {
            y: 0.0,
            a: 0.0,
            a_prime: 0.0,
            a_second: 0.0,
            b: vec![0.0; m],
            b_prime: vec![0.0; m],
            b_second: vec![0.0; m],
            c2: vec![vec![0.0; m]; m],
            c2_prime: vec![vec![0.0; m]; m],
            c3: vec![vec![vec![0.0; m]; m]; m],
            phi: 0.0,
            phi_grad: vec![0.0; m],
        }
    }

    #[test]
    fn plane_profile_has_vanishing_restrictions() {
        let mut p = synthetic(2);
        p.a = 0.3;
        p.a_prime = 1.0;
        assert_eq!(alpha(&p), 0.0);
        assert_eq!(alpha_l(&p, 0), 0.0);
        assert_eq!(alpha_l(&p, 1), 0.0);
    }

    #[test]
    fn synthetic_alpha_value() {
        let mut p = synthetic(1);
        p.a_prime = 1.0;
        p.a_second = 2.0;
        p.b = vec![0.5];
        p.b_prime = vec![1.0];
        p.c2 = vec![vec![3.0]];
        assert_eq!(p.c_coefficient(), 0.75);
        assert_eq!(p.d_coefficient(), -0.25);
        assert!((alpha(&p) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_initial_predicate() {
        let mut p = synthetic(1);
        p.a_prime = 1.0;
        assert!(is_degenerate_initial(&p, 1e-9));
        p.b = vec![0.1];
        assert!(!is_degenerate_initial(&p, 1e-9));
        p.b = vec![0.0];
        p.a = 1e-12;
        p.a_prime = 1.0 + 1e-12;
        assert!(is_degenerate_initial(&p, 1e-9));
    }

    #[test]
    fn taylor_jet_reproduces_profile_at_zero_offset() {
        let mut p = synthetic(2);
        p.a = 0.1;
        p.a_prime = 0.9;
        p.a_second = 0.2;
        p.b = vec![0.3, -0.1];
        p.b_prime = vec![0.05, 0.4];
        p.b_second = vec![1.5, -2.0];
        p.c2 = vec![vec![1.0, 0.5], vec![0.5, -0.7]];
        p.c2_prime = vec![vec![0.2, 0.1], vec![0.1, 0.3]];
        let j = taylor_jet(&p, &[0.0, 0.0]);
        assert_eq!(j.d1(2), 0.9);
        assert_eq!(j.d2(0, 2), 0.05);
        assert_eq!(j.d3(2, 1, 2), -2.0);
        assert_eq!(j.d3(1, 2, 0), 0.1);
        // Shifted jet is the exact jet of the cubic polynomial.
        let h = 1e-3;
        let shifted = taylor_jet(&p, &[h, 0.0]);
        let expected = p.c2[0][0] + p.c3[0][0][0] * h;
        assert!((shifted.d2(0, 0) - expected).abs() < 1e-15);
        assert!((shifted.d2(2, 2) - (p.a_second + p.b_second[0] * h)).abs() < 1e-15);
    }
}
