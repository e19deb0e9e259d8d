//! Machine check of the light-like geodesic theorem on a concrete surface.
//!
//! For a surface normalized so that the origin is a degenerate light-like point with null
//! direction `(1, 0, .., 0, 1)`, the verifier collects two independent lines of evidence:
//! direct residuals along `sigma(t) = (t, 0, .., 0, t)` (containment in the graph and
//! degeneracy of every axis point), and the reduced ODE integrated from the initial data
//! `a = 0, a' = 1, b = b' = 0`, which must stay on the trivial solution `a = y, b = 0`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::reduction::{decompose, is_degenerate_initial, ode_rhs, OdeState, SINGULAR_C_FLOOR};
use crate::surface::{GraphHypersurface, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyTolerances {
    pub containment: f64,
    pub b: f64,
    pub grad_b: f64,
    pub ode: f64,
    pub zmc: f64,
    /// Tolerance for the degenerate initial conditions at `y = 0`.
    pub initial: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            containment: 1e-8,
            b: 1e-8,
            grad_b: 1e-6,
            ode: 1e-6,
            zmc: 1e-7,
            initial: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Verdict {
    Pass,
    Fail(String),
    Inapplicable(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail(_) => "FAIL",
            Verdict::Inapplicable(_) => "INAPPLICABLE",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(r) | Verdict::Inapplicable(r) => Some(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZmcScan {
    pub max: f64,
    pub location: Vec<f64>,
}

/// Box of ODE states: `y`, `a`, `a'`, every `b_i` and `b'_i` within `half_width` of `center`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateBox {
    pub center: OdeState,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzOptions {
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for LipschitzOptions {
    fn default() -> Self {
        LipschitzOptions {
            half_width: 0.25,
            samples: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub t_span: (f64, f64),
    pub steps: usize,
    pub grid: Grid,
    pub tolerances: VerifyTolerances,
    pub lipschitz: LipschitzOptions,
}

impl VerifyOptions {
    pub fn new(n: usize) -> VerifyOptions {
        VerifyOptions {
            t_span: (-1.0, 1.0),
            steps: 1000,
            grid: Grid::uniform(n, 21),
            tolerances: VerifyTolerances::default(),
            lipschitz: LipschitzOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub n: usize,
    /// `"explicit"` for the flat metric, `"generic"` otherwise.
    pub route: &'static str,
    pub t_span: (f64, f64),
    pub steps: usize,
    pub zmc_residual_max: f64,
    pub zmc_location: Vec<f64>,
    pub degenerate_initial: Option<bool>,
    pub containment_max: Option<f64>,
    pub geodesic_deviation: Option<f64>,
    pub degeneracy_b_max: Option<f64>,
    pub degeneracy_grad_max: Option<f64>,
    pub ode_deviation: Option<f64>,
    pub lipschitz_estimate: Option<f64>,
    pub lipschitz_seed: u64,
    pub verdict: Verdict,
    pub tolerances: VerifyTolerances,
}

/// Largest `|A - phi B|` over the grid; ties resolve to the first node in row-major order.
pub fn zmc_residual_scan(s: &GraphHypersurface, grid: &Grid) -> Result<ZmcScan> {
    let nodes = grid.nodes(s.domain());
    if grid.counts.len() != s.n() {
        return Err(Error::invalid("grid and surface dimensions differ"));
    }
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|x| s.operator_tilde_a(x).map(f64::abs))
        .collect::<Result<_>>()?;
    let (mut best, mut at) = (f64::NEG_INFINITY, 0);
    for (k, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            at = k;
        }
    }
    Ok(ZmcScan {
        max: best,
        location: nodes[at].clone(),
    })
}

/// RK4 trajectory of the reduced system from `init` at `y_span.0` to `y_span.1`.
///
/// `y_span.1 < y_span.0` integrates backwards.
pub fn integrate_reduced_ode(
    s: &GraphHypersurface,
    y_span: (f64, f64),
    steps: usize,
    init: &OdeState,
) -> Result<Vec<OdeState>> {
    if steps == 0 {
        return Err(Error::invalid(
            "reduced ODE integration needs at least 1 step",
        ));
    }
    let mut state = init.clone();
    state.y = y_span.0;
    let c = state.c_coefficient();
    if !(c.abs() >= SINGULAR_C_FLOOR) {
        return Err(Error::SingularC { y: state.y, c });
    }
    ode_rhs(s, &state)?;

    let m = s.n() - 1;
    let rhs = |y: f64, u: &[f64]| -> Result<Vec<f64>> {
        let st = OdeState::from_vec(y, u);
        let (a2, b2) = ode_rhs(s, &st)?;
        let mut out = Vec::with_capacity(u.len());
        out.push(st.a_prime);
        out.push(a2);
        out.extend_from_slice(&st.b_prime);
        out.extend(b2);
        debug_assert_eq!(out.len(), 2 + 2 * m);
        Ok(out)
    };

    let h = (y_span.1 - y_span.0) / steps as f64;
    let mut traj = Vec::with_capacity(steps + 1);
    let mut u = state.to_vec();
    traj.push(state);
    for k in 0..steps {
        let y = y_span.0 + k as f64 * h;
        match rk4_step(&rhs, y, &u, h) {
            Ok(next) => u = next,
            Err(source) => {
                return Err(Error::OdeBreakdown {
                    y,
                    partial: Box::new(traj),
                    source: Box::new(source),
                })
            }
        }
        let y_next = if k + 1 == steps {
            y_span.1
        } else {
            y_span.0 + (k + 1) as f64 * h
        };
        let next = OdeState::from_vec(y_next, &u);
        // A step can jump across C = 0 without any stage landing near it.
        let c_next = next.c_coefficient();
        if !(c_next.abs() >= SINGULAR_C_FLOOR) || c_next.signum() != c.signum() {
            return Err(Error::OdeBreakdown {
                y,
                partial: Box::new(traj),
                source: Box::new(Error::SingularC {
                    y: y_next,
                    c: c_next,
                }),
            });
        }
        traj.push(next);
    }
    Ok(traj)
}

/// Largest sampled difference quotient `|(P, Q)(s1) - (P, Q)(s2)| / |s1 - s2|` over pairs of
/// states sharing `y`, drawn uniformly from the box with a seeded generator.
pub fn estimate_lipschitz(
    s: &GraphHypersurface,
    state_box: &StateBox,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::invalid(
            "Lipschitz estimation needs at least 2 samples",
        ));
    }
    let c = &state_box.center;
    let r = state_box.half_width;
    let worst_b2: f64 = c.b.iter().map(|b| (b.abs() + r).powi(2)).sum();
    if 1.0 - worst_b2 < SINGULAR_C_FLOOR {
        return Err(Error::SingularC {
            y: c.y,
            c: 1.0 - worst_b2,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = c.to_vec();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        center
            .iter()
            .map(|&v| v + rng.random_range(-r..=r))
            .collect()
    };
    let pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|_| {
            let y = c.y + rng.random_range(-r..=r);
            let u1 = draw(&mut rng);
            let u2 = draw(&mut rng);
            (y, u1, u2)
        })
        .collect();

    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|(y, u1, u2)| {
            let (p1, q1) = ode_rhs(s, &OdeState::from_vec(*y, u1))?;
            let (p2, q2) = ode_rhs(s, &OdeState::from_vec(*y, u2))?;
            let num = (p1 - p2).powi(2)
                + q1.iter()
                    .zip(&q2)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>();
            let den: f64 = u1.iter().zip(u2).map(|(a, b)| (a - b).powi(2)).sum();
            Ok(if den > 0.0 { (num / den).sqrt() } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

fn axis(n: usize, t: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[n - 1] = t;
    x
}

fn sample_times(t_span: (f64, f64), steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| {
            if k == steps {
                t_span.1
            } else {
                t_span.0 + (t_span.1 - t_span.0) * k as f64 / steps as f64
            }
        })
        .collect()
}

/// Splits `steps` between the backward and forward legs from `y = 0`.
fn leg_steps(t_span: (f64, f64), steps: usize) -> (usize, usize) {
    let width = t_span.1 - t_span.0;
    let back = if t_span.0 < 0.0 {
        ((steps as f64) * (-t_span.0) / width).round().max(1.0) as usize
    } else {
        0
    };
    let fwd = if t_span.1 > 0.0 {
        steps.saturating_sub(back).max(1)
    } else {
        0
    };
    (back, fwd)
}

fn ode_deviation(s: &GraphHypersurface, t_span: (f64, f64), steps: usize) -> Result<f64> {
    let n = s.n();
    let init = OdeState::degenerate_initial(n, 0.0);
    let (back, fwd) = leg_steps(t_span, steps);
    let mut traj = Vec::new();
    if back > 0 {
        traj.extend(integrate_reduced_ode(s, (0.0, t_span.0), back, &init)?);
    }
    if fwd > 0 {
        traj.extend(integrate_reduced_ode(s, (0.0, t_span.1), fwd, &init)?);
    }
    Ok(traj
        .iter()
        .map(|st| {
            let mut d = (st.a - st.y).powi(2);
            d += st.b.iter().map(|b| b * b).sum::<f64>();
            d.sqrt()
        })
        .fold(0.0, f64::max))
}

fn geodesic_deviation(s: &GraphHypersurface, t_span: (f64, f64), steps: usize) -> Result<f64> {
    let n = s.n();
    let dim = n + 1;
    let origin = vec![0.0; dim];
    let mut null = vec![0.0; dim];
    null[0] = 1.0;
    null[n] = 1.0;
    let sigma = |t: f64, p: &[f64]| -> f64 {
        p.iter()
            .enumerate()
            .map(|(k, &x)| (x - if k == 0 || k == n { t } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    };
    let (back, fwd) = leg_steps(t_span, steps);
    let mut worst: f64 = 0.0;
    if fwd > 0 {
        let path = s
            .metric()
            .integrate_geodesic(&origin, &null, (0.0, t_span.1), fwd.max(2))?;
        for smp in &path.samples {
            worst = worst.max(sigma(smp.t, &smp.position));
        }
    }
    if back > 0 {
        let reversed: Vec<f64> = null.iter().map(|v| -v).collect();
        let path =
            s.metric()
                .integrate_geodesic(&origin, &reversed, (0.0, -t_span.0), back.max(2))?;
        for smp in &path.samples {
            worst = worst.max(sigma(-smp.t, &smp.position));
        }
    }
    Ok(worst)
}

/// Checks the hypotheses first and then the theorem's residuals.
///
/// Failures are encoded in the verdict; evaluation errors mid-check produce `FAIL` with the
/// error text.
pub fn verify_theorem(s: &GraphHypersurface, opts: &VerifyOptions) -> TheoremReport {
    let tol = opts.tolerances;
    let mut report = TheoremReport {
        n: s.n(),
        route: if s.metric().is_minkowski() {
            "explicit"
        } else {
            "generic"
        },
        t_span: opts.t_span,
        steps: opts.steps,
        zmc_residual_max: f64::NAN,
        zmc_location: Vec::new(),
        degenerate_initial: None,
        containment_max: None,
        geodesic_deviation: None,
        degeneracy_b_max: None,
        degeneracy_grad_max: None,
        ode_deviation: None,
        lipschitz_estimate: None,
        lipschitz_seed: opts.lipschitz.seed,
        verdict: Verdict::Pass,
        tolerances: tol,
    };

    match zmc_residual_scan(s, &opts.grid) {
        Ok(scan) => {
            report.zmc_residual_max = scan.max;
            report.zmc_location = scan.location;
        }
        Err(e) => {
            report.verdict = Verdict::Inapplicable(format!("hypothesis scan failed: {e}"));
            return report;
        }
    }
    if !(report.zmc_residual_max <= tol.zmc) {
        report.verdict = Verdict::Inapplicable(format!(
            "zero mean curvature hypothesis fails: max |A - phi B| = {:e} at {:?}",
            report.zmc_residual_max, report.zmc_location
        ));
        return report;
    }

    let profile = match decompose(s, 0.0) {
        Ok(p) => p,
        Err(e) => {
            report.verdict =
                Verdict::Inapplicable(format!("axis profile unavailable at y = 0: {e}"));
            return report;
        }
    };
    let degenerate = is_degenerate_initial(&profile, tol.initial);
    report.degenerate_initial = Some(degenerate);
    if !degenerate {
        report.verdict = Verdict::Inapplicable(format!(
            "origin is not a degenerate light-like point in normal position: a = {:e}, a' - 1 = {:e}, b = {:?}, b' = {:?}",
            profile.a,
            profile.a_prime - 1.0,
            profile.b,
            profile.b_prime
        ));
        return report;
    }

    if opts.t_span.0 > 0.0 || opts.t_span.1 < 0.0 || opts.t_span.0 >= opts.t_span.1 {
        report.verdict = Verdict::Inapplicable("t span must contain 0".into());
        return report;
    }

    let mut failures = Vec::new();
    let n = s.n();
    let times = sample_times(opts.t_span, opts.steps);

    let residuals: Result<Vec<(f64, f64, f64)>> = times
        .par_iter()
        .map(|&t| {
            let x = axis(n, t);
            let contained = (s.f().value(&x)? - t).abs();
            let ff = s.first_fundamental(&x)?;
            let grad = ff.grad_b.iter().map(|g| g * g).sum::<f64>().sqrt();
            Ok((contained, ff.b.abs(), grad))
        })
        .collect();
    match residuals {
        Ok(rs) => {
            let max = |sel: fn(&(f64, f64, f64)) -> f64| rs.iter().map(sel).fold(0.0, f64::max);
            report.containment_max = Some(max(|r| r.0));
            report.degeneracy_b_max = Some(max(|r| r.1));
            report.degeneracy_grad_max = Some(max(|r| r.2));
        }
        Err(e) => failures.push(format!("axis residuals: {e}")),
    }

    match geodesic_deviation(s, opts.t_span, opts.steps) {
        Ok(d) => report.geodesic_deviation = Some(d),
        Err(e) => failures.push(format!("geodesic: {e}")),
    }

    match ode_deviation(s, opts.t_span, opts.steps) {
        Ok(d) => report.ode_deviation = Some(d),
        Err(e) => failures.push(format!("reduced ODE: {e}")),
    }

    let state_box = StateBox {
        center: OdeState::degenerate_initial(n, 0.0),
        half_width: opts.lipschitz.half_width,
    };
    match estimate_lipschitz(s, &state_box, opts.lipschitz.samples, opts.lipschitz.seed) {
        Ok(l) => report.lipschitz_estimate = Some(l),
        Err(e) => failures.push(format!("Lipschitz estimate: {e}")),
    }

    let checks = [
        ("containment", report.containment_max, tol.containment),
        (
            "geodesic deviation",
            report.geodesic_deviation,
            tol.containment,
        ),
        ("|B| along sigma", report.degeneracy_b_max, tol.b),
        (
            "|grad B| along sigma",
            report.degeneracy_grad_max,
            tol.grad_b,
        ),
        ("ODE deviation", report.ode_deviation, tol.ode),
    ];
    for (name, value, limit) in checks {
        if let Some(v) = value {
            if !(v <= limit) {
                failures.push(format!("{name} = {v:e} exceeds {limit:e}"));
            }
        }
    }
    if let Some(l) = report.lipschitz_estimate {
        if !l.is_finite() {
            failures.push("Lipschitz estimate is not finite".into());
        }
    }
    if !failures.is_empty() {
        report.verdict = Verdict::Fail(failures.join("; "));
    }
    report
}
