//! JSON run configuration.

use lightcone_core::exprjet::ParseError;
use lightcone_core::{
    ClassifyTolerances, Domain, Expression, GraphHypersurface, Grid, MetricField, OdeState,
    VerifyOptions,
};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Keyword(String),
    Entries(Vec<String>),
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::Keyword("minkowski".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub tol_b: Option<f64>,
    pub tol_grad: Option<f64>,
    pub containment: Option<f64>,
    pub b: Option<f64>,
    pub grad_b: Option<f64>,
    pub ode: Option<f64>,
    pub zmc: Option<f64>,
    pub initial: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSpec {
    pub y_span: Option<[f64; 2]>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub a: f64,
    pub a_prime: f64,
    pub b: Vec<f64>,
    pub b_prime: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub y_span: Option<[f64; 2]>,
    pub steps: Option<usize>,
    pub init: Option<InitSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    pub start: Option<Vec<f64>>,
    pub velocity: Option<Vec<f64>>,
    pub t_span: Option<[f64; 2]>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeSpec {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzSpec {
    pub half_width: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub t_span: Option<[f64; 2]>,
    pub steps: Option<usize>,
    pub grid: Option<GridSpec>,
    pub normalize: Option<NormalizeSpec>,
    #[serde(default)]
    pub lipschitz: LipschitzSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub f: String,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default = "zero")]
    pub phi: String,
    pub domain: Option<DomainSpec>,
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: TolSpec,
    #[serde(default)]
    pub reduce: ReduceSpec,
    #[serde(default)]
    pub ode: OdeSpec,
    #[serde(default)]
    pub geodesic: GeodesicSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn zero() -> String {
    "0".into()
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol_b: Option<f64>,
    pub tol_grad: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

pub struct GeodesicSetup {
    pub start: Vec<f64>,
    pub velocity: Vec<f64>,
    pub t_span: (f64, f64),
    pub steps: usize,
}

/// Validated configuration ready for the commands.
pub struct Run {
    pub config: RunConfig,
    pub surface: GraphHypersurface,
    pub grid: Grid,
    pub overrides: Overrides,
}

/// 1-based line and column of byte offset `pos` in `text`.
fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Locates the string literal holding `value` after the key `key` in the raw config.
fn locate(text: &str, key: &str, value: &str, offset: usize) -> Option<(usize, usize)> {
    let key_pat = format!("\"{key}\"");
    let quoted = serde_json::to_string(value).ok()?;
    let start = text.find(&key_pat)?;
    let rel = text[start..].find(&quoted)?;
    // +1 skips the opening quote; escapes inside expressions are not expected.
    Some(line_col(text, start + rel + 1 + offset))
}

fn expr_error(text: &str, key: &str, value: &str, err: &ParseError) -> String {
    let pos = match err {
        ParseError::Syntax { pos, .. }
        | ParseError::UnknownIdentifier { pos, .. }
        | ParseError::VariableOutOfRange { pos, .. } => *pos,
    };
    match locate(text, key, value, pos) {
        Some((line, col)) => {
            format!("config error at line {line}, column {col} (field \"{key}\"): {err}")
        }
        None => format!("config error in field \"{key}\": {err}"),
    }
}

fn build_grid(spec: &GridSpec, n: usize, what: &str) -> Result<Grid, String> {
    let counts = match spec {
        GridSpec::Uniform(k) => vec![*k; n],
        GridSpec::PerAxis(v) => v.clone(),
    };
    if counts.len() != n {
        return Err(format!(
            "config error: {what} needs {n} counts, got {}",
            counts.len()
        ));
    }
    if counts.iter().any(|&c| c < 2) {
        return Err(format!(
            "config error: {what} needs at least 2 nodes per axis"
        ));
    }
    Grid::new(counts).map_err(|e| format!("config error: {what}: {e}"))
}

pub fn load(text: &str, overrides: Overrides) -> Result<Run, String> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| {
        format!(
            "config error at line {}, column {}: {e}",
            e.line(),
            e.column()
        )
    })?;
    let n = config.n;
    let t = &config.tolerances;
    let tolerances = [
        ("tol_b", overrides.tol_b.or(t.tol_b)),
        ("tol_grad", overrides.tol_grad.or(t.tol_grad)),
        ("containment", t.containment),
        ("b", t.b),
        ("grad_b", t.grad_b),
        ("ode", t.ode),
        ("zmc", t.zmc),
        ("initial", t.initial),
    ];
    for (name, value) in tolerances {
        if value.is_some_and(|v| v.is_nan() || v < 0.0) {
            return Err(format!(
                "config error: tolerance {name} must be non-negative"
            ));
        }
    }
    if n < 2 {
        return Err("config error: n must be at least 2".into());
    }

    let f = Expression::parse(&config.f, n).map_err(|e| expr_error(text, "f", &config.f, &e))?;
    let phi =
        Expression::parse(&config.phi, n).map_err(|e| expr_error(text, "phi", &config.phi, &e))?;
    let metric = match &config.metric {
        MetricSpec::Keyword(k) if k == "minkowski" => MetricField::minkowski(n),
        MetricSpec::Keyword(k) => {
            return Err(format!(
                "config error: metric must be \"minkowski\" or a list of entries, got \"{k}\""
            ))
        }
        MetricSpec::Entries(entries) => {
            let dim = n + 1;
            if entries.len() != dim * (dim + 1) / 2 {
                return Err(format!(
                    "config error: metric needs {} upper-triangle entries for n = {n}, got {}",
                    dim * (dim + 1) / 2,
                    entries.len()
                ));
            }
            let parsed = entries
                .iter()
                .map(|e| {
                    Expression::parse_indexed(e, 0, dim)
                        .map_err(|err| expr_error(text, "metric", e, &err))
                })
                .collect::<Result<Vec<_>, _>>()?;
            MetricField::from_upper_triangle(n, parsed)
                .map_err(|e| format!("config error: metric: {e}"))?
        }
    };

    let domain = match &config.domain {
        Some(d) => {
            if d.lo.len() != n || d.hi.len() != n {
                return Err(format!("config error: domain bounds need {n} coordinates"));
            }
            Domain::new(d.lo.clone(), d.hi.clone())
                .map_err(|e| format!("config error: domain: {e}"))?
        }
        None => Domain::cube(n, 1.0),
    };
    let grid = build_grid(
        config.grid.as_ref().unwrap_or(&GridSpec::Uniform(21)),
        n,
        "grid",
    )?;

    let surface = GraphHypersurface::new(f, metric)
        .and_then(|s| s.with_phi(phi))
        .and_then(|s| s.with_domain(domain))
        .map_err(|e| format!("config error: {e}"))?;
    let d = surface.domain();
    let center: Vec<f64> = (0..n).map(|i| 0.5 * (d.lo[i] + d.hi[i])).collect();
    surface
        .embed(&center)
        .and_then(|p| surface.metric().validate_signature(&p))
        .map_err(|e| format!("config error: metric: {e}"))?;

    Ok(Run {
        config,
        surface,
        grid,
        overrides,
    })
}

impl Run {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn classify_tolerances(&self) -> ClassifyTolerances {
        let t = &self.config.tolerances;
        let default = ClassifyTolerances::default();
        ClassifyTolerances {
            tol_b: self.overrides.tol_b.or(t.tol_b),
            tol_grad: self
                .overrides
                .tol_grad
                .or(t.tol_grad)
                .unwrap_or(default.tol_grad),
        }
    }

    pub fn ode_init(&self) -> Result<OdeState, String> {
        let n = self.n();
        let y = self.ode_span().0;
        match &self.config.ode.init {
            None => Ok(OdeState::degenerate_initial(n, y)),
            Some(i) => {
                if i.b.len() != n - 1 || i.b_prime.len() != n - 1 {
                    return Err(format!(
                        "config error: ode.init needs b and b_prime of length {}",
                        n - 1
                    ));
                }
                Ok(OdeState {
                    y,
                    a: i.a,
                    a_prime: i.a_prime,
                    b: i.b.clone(),
                    b_prime: i.b_prime.clone(),
                })
            }
        }
    }

    pub fn ode_span(&self) -> (f64, f64) {
        let s = self.config.ode.y_span.unwrap_or([0.0, 1.0]);
        (s[0], s[1])
    }

    pub fn ode_steps(&self) -> usize {
        self.overrides
            .steps
            .or(self.config.ode.steps)
            .unwrap_or(100)
    }

    pub fn reduce_span(&self) -> (f64, f64) {
        let d = self.surface.domain();
        let last = self.n() - 1;
        let s = self
            .config
            .reduce
            .y_span
            .unwrap_or([d.lo[last], d.hi[last]]);
        (s[0], s[1])
    }

    pub fn reduce_samples(&self) -> usize {
        self.config.reduce.samples.unwrap_or(21)
    }

    pub fn geodesic_setup(&self) -> Result<GeodesicSetup, String> {
        let dim = self.n() + 1;
        let g = &self.config.geodesic;
        let start = g.start.clone().unwrap_or_else(|| vec![0.0; dim]);
        let velocity = g.velocity.clone().unwrap_or_else(|| {
            let mut v = vec![0.0; dim];
            v[0] = 1.0;
            v[dim - 1] = 1.0;
            v
        });
        if start.len() != dim || velocity.len() != dim {
            return Err(format!(
                "config error: geodesic start and velocity need {dim} coordinates"
            ));
        }
        let span = g.t_span.unwrap_or([0.0, 1.0]);
        let steps = self.overrides.steps.or(g.steps).unwrap_or(100);
        Ok(GeodesicSetup {
            start,
            velocity,
            t_span: (span[0], span[1]),
            steps,
        })
    }

    pub fn verify_options(&self, n: usize) -> Result<VerifyOptions, String> {
        let v = &self.config.verify;
        let t = &self.config.tolerances;
        let mut opts = VerifyOptions::new(n);
        if let Some(span) = v.t_span {
            opts.t_span = (span[0], span[1]);
        }
        if let Some(steps) = self.overrides.steps.or(v.steps) {
            if steps == 0 {
                return Err("config error: verify.steps must be positive".into());
            }
            opts.steps = steps;
        }
        if let Some(g) = &v.grid {
            opts.grid = build_grid(g, n, "verify.grid")?;
        }
        let tol = &mut opts.tolerances;
        let pairs = [
            (&mut tol.containment, t.containment),
            (&mut tol.b, self.overrides.tol_b.or(t.b)),
            (&mut tol.grad_b, self.overrides.tol_grad.or(t.grad_b)),
            (&mut tol.ode, t.ode),
            (&mut tol.zmc, t.zmc),
            (&mut tol.initial, t.initial),
        ];
        for (slot, value) in pairs {
            if let Some(x) = value {
                *slot = x;
            }
        }
        let l = &v.lipschitz;
        if let Some(h) = l.half_width {
            opts.lipschitz.half_width = h;
        }
        if let Some(s) = l.samples {
            opts.lipschitz.samples = s;
        }
        if let Some(seed) = self.overrides.seed.or(l.seed) {
            opts.lipschitz.seed = seed;
        }
        Ok(opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_errors_carry_position() {
        let err = load("{\n  \"n\": 2,\n  \"f\": \"x1\",,\n}", Overrides::default())
            .err()
            .unwrap();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn expression_errors_carry_position() {
        let err = load(
            "{\n  \"n\": 2,\n  \"f\": \"x1 + foo\"\n}",
            Overrides::default(),
        )
        .err()
        .unwrap();
        assert!(
            err.starts_with("config error at line 3, column 14"),
            "{err}"
        );
    }

    #[test]
    fn arity_is_checked() {
        let err = load(r#"{"n": 2, "f": "x3"}"#, Overrides::default())
            .err()
            .unwrap();
        assert!(err.contains("x3"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(load(r#"{"n": 2, "f": "x1", "bogus": 1}"#, Overrides::default()).is_err());
    }

    #[test]
    fn grid_needs_two_nodes() {
        assert!(load(
            r#"{"n": 2, "f": "x1", "grid": [1, 5]}"#,
            Overrides::default()
        )
        .is_err());
    }
}
