use std::path::Path;

use lightcone_core::reduction::{alpha, alpha_l, decompose, normalize_graph};
use lightcone_core::verify::{integrate_reduced_ode, verify_theorem, zmc_residual_scan};
use lightcone_core::{Error, GeodesicPath, OdeState, PointKind, TheoremReport, Verdict};

use crate::config::{MetricSpec, Run};
use crate::emit::{floats, num, write_file, Json, Table};

pub type Handler = fn(&Run, &Path) -> Result<Outcome, String>;

/// Outcome of a subcommand: the exit code and a one-line summary for stdout.
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

fn ok(summary: String) -> Result<Outcome, String> {
    Ok(Outcome { code: 0, summary })
}

fn xs(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn surface_header(run: &Run) -> Vec<(&'static str, Json)> {
    let metric = match &run.config.metric {
        MetricSpec::Keyword(k) => Json::Str(k.clone()),
        MetricSpec::Entries(e) => Json::Arr(e.iter().map(|s| Json::Str(s.clone())).collect()),
    };
    let d = run.surface.domain();
    vec![
        ("n", run.n().into()),
        ("f", run.config.f.as_str().into()),
        ("phi", run.config.phi.as_str().into()),
        ("metric", metric),
        (
            "domain",
            Json::Obj(vec![("lo", floats(&d.lo)), ("hi", floats(&d.hi))]),
        ),
    ]
}

pub fn classify(run: &Run, out: &Path) -> Result<Outcome, String> {
    let n = run.n();
    let tol = run.classify_tolerances();
    let classes = run
        .surface
        .classify_grid(&run.grid, &tol)
        .map_err(|e| e.to_string())?;

    let mut header = xs("x", 1..n + 1);
    header.extend(["B", "grad_norm", "class"].map(String::from));
    let mut table = Table::new(&header);
    let kinds = [
        PointKind::SpaceLike,
        PointKind::TimeLike,
        PointKind::LightLike { degenerate: false },
        PointKind::LightLike { degenerate: true },
    ];
    let mut counts = [0usize; 4];
    for (x, c) in &classes {
        let mut row: Vec<String> = x.iter().map(|&v| num(v)).collect();
        row.extend([num(c.b), num(c.grad_norm), c.kind.label().to_string()]);
        table.row(&row);
        counts[kinds.iter().position(|k| *k == c.kind).expect("known kind")] += 1;
    }
    write_file(out, "classify.csv", &table.into_bytes())?;

    let mut fields = vec![("command", "classify".into())];
    fields.extend(surface_header(run));
    fields.extend([
        (
            "grid",
            Json::Arr(run.grid.counts.iter().map(|&c| c.into()).collect()),
        ),
        ("tol_b", tol.tol_b.into()),
        ("tol_grad", tol.tol_grad.into()),
        ("total", classes.len().into()),
        (
            "counts",
            Json::Obj(
                kinds
                    .iter()
                    .zip(counts)
                    .map(|(k, c)| (k.label(), c.into()))
                    .collect(),
            ),
        ),
    ]);
    write_file(out, "classify.json", Json::Obj(fields).render().as_bytes())?;
    ok(format!(
        "classify: {} points, {} space-like, {} time-like, {} light-like, {} degenerate light-like",
        classes.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3]
    ))
}

pub fn locus(run: &Run, out: &Path) -> Result<Outcome, String> {
    let n = run.n();
    let tol = run.classify_tolerances();
    let scan = run
        .surface
        .scan_lightlike_locus(&run.grid, &tol)
        .map_err(|e| e.to_string())?;
    let mut header: Vec<String> = vec!["axis".into(), "line".into()];
    header.extend(xs("x", 1..n + 1));
    header.extend(["B", "grad_norm", "class"].map(String::from));
    let mut table = Table::new(&header);
    for p in &scan.points {
        let mut row = vec![(p.axis + 1).to_string(), p.line.to_string()];
        row.extend(p.x.iter().map(|&v| num(v)));
        row.extend([
            num(p.class.b),
            num(p.class.grad_norm),
            p.class.kind.label().to_string(),
        ]);
        table.row(&row);
    }
    write_file(out, "locus.csv", &table.into_bytes())?;
    let summary = if scan.identically_light_like {
        "locus: B vanishes at every grid node; the region is identically light-like".to_string()
    } else {
        format!("locus: {} light-like points", scan.points.len())
    };
    ok(summary)
}

pub fn residual(run: &Run, out: &Path) -> Result<Outcome, String> {
    let scan = zmc_residual_scan(&run.surface, &run.grid).map_err(|e| e.to_string())?;
    let mut fields = vec![("command", "residual".into())];
    fields.extend(surface_header(run));
    fields.extend([
        (
            "grid",
            Json::Arr(run.grid.counts.iter().map(|&c| c.into()).collect()),
        ),
        ("max_abs_tilde_a", scan.max.into()),
        ("location", floats(&scan.location)),
    ]);
    write_file(out, "residual.json", Json::Obj(fields).render().as_bytes())?;
    ok(format!("residual: max |A - phi B| = {}", num(scan.max)))
}

pub fn reduce(run: &Run, out: &Path) -> Result<Outcome, String> {
    let m = run.n() - 1;
    let (y0, y1) = run.reduce_span();
    let samples = run.reduce_samples();
    if samples < 2 {
        return Err("config error: reduce.samples must be at least 2".into());
    }
    let mut header: Vec<String> = ["y", "a", "a_prime", "a_second"].map(String::from).to_vec();
    header.extend(xs("b", 1..m + 1));
    header.extend(xs("b_prime", 1..m + 1));
    header.extend(xs("b_second", 1..m + 1));
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let triples: Vec<(usize, usize, usize)> = (0..m)
        .flat_map(|i| (i..m).flat_map(move |j| (j..m).map(move |k| (i, j, k))))
        .collect();
    header.extend(pairs.iter().map(|(i, j)| format!("c{}{}", i + 1, j + 1)));
    header.extend(
        pairs
            .iter()
            .map(|(i, j)| format!("c_prime{}{}", i + 1, j + 1)),
    );
    header.extend(
        triples
            .iter()
            .map(|(i, j, k)| format!("c{}{}{}", i + 1, j + 1, k + 1)),
    );
    header.push("phi".into());
    header.extend(xs("phi_x", 1..m + 1));
    header.extend(["C", "D", "alpha"].map(String::from));
    header.extend(xs("alpha_", 1..m + 1));

    let mut table = Table::new(&header);
    for k in 0..samples {
        let y = if k + 1 == samples {
            y1
        } else {
            y0 + (y1 - y0) * k as f64 / (samples - 1) as f64
        };
        let p = decompose(&run.surface, y).map_err(|e| e.to_string())?;
        let mut row = vec![num(y), num(p.a), num(p.a_prime), num(p.a_second)];
        row.extend(
            p.b.iter()
                .chain(&p.b_prime)
                .chain(&p.b_second)
                .map(|&v| num(v)),
        );
        row.extend(pairs.iter().map(|&(i, j)| num(p.c2[i][j])));
        row.extend(pairs.iter().map(|&(i, j)| num(p.c2_prime[i][j])));
        row.extend(triples.iter().map(|&(i, j, k)| num(p.c3[i][j][k])));
        row.push(num(p.phi));
        row.extend(p.phi_grad.iter().map(|&v| num(v)));
        row.extend([
            num(p.c_coefficient()),
            num(p.d_coefficient()),
            num(alpha(&p)),
        ]);
        row.extend((0..m).map(|l| num(alpha_l(&p, l))));
        table.row(&row);
    }
    write_file(out, "reduce.csv", &table.into_bytes())?;
    ok(format!(
        "reduce: {samples} axis samples on [{}, {}]",
        num(y0),
        num(y1)
    ))
}

fn ode_table(m: usize, traj: &[OdeState]) -> Vec<u8> {
    let mut header: Vec<String> = vec!["y".into(), "a".into(), "a_prime".into()];
    header.extend(xs("b", 1..m + 1));
    header.extend(xs("b_prime", 1..m + 1));
    header.push("C".into());
    let mut table = Table::new(&header);
    for st in traj {
        let mut row = vec![num(st.y), num(st.a), num(st.a_prime)];
        row.extend(st.b.iter().chain(&st.b_prime).map(|&v| num(v)));
        row.push(num(st.c_coefficient()));
        table.row(&row);
    }
    table.into_bytes()
}

pub fn ode(run: &Run, out: &Path) -> Result<Outcome, String> {
    let m = run.n() - 1;
    let init = run.ode_init()?;
    let span = run.ode_span();
    let steps = run.ode_steps();
    match integrate_reduced_ode(&run.surface, span, steps, &init) {
        Ok(traj) => {
            write_file(out, "ode.csv", &ode_table(m, &traj))?;
            ok(format!(
                "ode: {} states on [{}, {}]",
                traj.len(),
                num(span.0),
                num(span.1)
            ))
        }
        Err(Error::OdeBreakdown { y, partial, source }) => {
            write_file(out, "ode.csv", &ode_table(m, &partial))?;
            Err(format!(
                "reduced ODE broke down at y = {}: {source} (partial trajectory written)",
                num(y)
            ))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn geodesic_table(run: &Run, path: &GeodesicPath) -> Result<Vec<u8>, String> {
    let dim = run.n() + 1;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(xs("x", 0..dim));
    header.extend(xs("v", 0..dim));
    header.push("g_vv".into());
    let mut table = Table::new(&header);
    for s in &path.samples {
        let g = run
            .surface
            .metric()
            .inner(&s.position, &s.velocity, &s.velocity)
            .map_err(|e| e.to_string())?;
        let mut row = vec![num(s.t)];
        row.extend(s.position.iter().chain(&s.velocity).map(|&v| num(v)));
        row.push(num(g));
        table.row(&row);
    }
    Ok(table.into_bytes())
}

pub fn geodesic(run: &Run, out: &Path) -> Result<Outcome, String> {
    let setup = run.geodesic_setup()?;
    let span = setup.t_span;
    match run
        .surface
        .metric()
        .integrate_geodesic(&setup.start, &setup.velocity, span, setup.steps)
    {
        Ok(path) => {
            write_file(out, "geodesic.csv", &geodesic_table(run, &path)?)?;
            ok(format!(
                "geodesic: {} samples on [{}, {}]",
                path.samples.len(),
                num(span.0),
                num(span.1)
            ))
        }
        Err(Error::GeodesicBreakdown { t, partial, source }) => {
            write_file(out, "geodesic.csv", &geodesic_table(run, &partial)?)?;
            Err(format!(
                "geodesic broke down at t = {}: {source} (partial path written)",
                num(t)
            ))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn report_json(
    run: &Run,
    report: &TheoremReport,
    normalized: bool,
    opts: &lightcone_core::VerifyOptions,
) -> Json {
    let tol = &report.tolerances;
    let normalize = match (&run.config.verify.normalize, normalized) {
        (Some(spec), true) => Json::Obj(vec![("q", floats(&spec.q)), ("v", floats(&spec.v))]),
        _ => Json::Null,
    };
    let mut fields = vec![("command", "verify".into())];
    fields.extend(surface_header(run));
    fields.extend([
        ("normalize", normalize),
        ("route", report.route.into()),
        ("t_span", floats(&[report.t_span.0, report.t_span.1])),
        ("steps", report.steps.into()),
        (
            "grid",
            Json::Arr(opts.grid.counts.iter().map(|&c| c.into()).collect()),
        ),
        ("zmc_residual_max", report.zmc_residual_max.into()),
        ("zmc_location", floats(&report.zmc_location)),
        ("degenerate_initial", report.degenerate_initial.into()),
        ("containment_max", report.containment_max.into()),
        ("geodesic_deviation", report.geodesic_deviation.into()),
        (
            "degeneracy_max",
            Json::Obj(vec![
                ("b", report.degeneracy_b_max.into()),
                ("grad_b", report.degeneracy_grad_max.into()),
            ]),
        ),
        ("ode_deviation", report.ode_deviation.into()),
        ("lipschitz_estimate", report.lipschitz_estimate.into()),
        (
            "lipschitz",
            Json::Obj(vec![
                ("seed", report.lipschitz_seed.into()),
                ("samples", opts.lipschitz.samples.into()),
                ("half_width", opts.lipschitz.half_width.into()),
            ]),
        ),
        ("verdict", report.verdict.label().into()),
        ("reason", report.verdict.reason().map(str::to_string).into()),
        (
            "tolerances",
            Json::Obj(vec![
                ("containment", tol.containment.into()),
                ("b", tol.b.into()),
                ("grad_b", tol.grad_b.into()),
                ("ode", tol.ode.into()),
                ("zmc", tol.zmc.into()),
                ("initial", tol.initial.into()),
            ]),
        ),
    ]);
    Json::Obj(fields)
}

pub fn verify(run: &Run, out: &Path) -> Result<Outcome, String> {
    let n = run.n();
    let opts = run.verify_options(n)?;
    let normalized = match &run.config.verify.normalize {
        Some(spec) => Some(
            normalize_graph(&run.surface, &spec.q, &spec.v)
                .map_err(|e| format!("normalization: {e}"))?,
        ),
        None => None,
    };
    let surface = normalized.as_ref().unwrap_or(&run.surface);
    let report = verify_theorem(surface, &opts);
    write_file(
        out,
        "verify.json",
        report_json(run, &report, normalized.is_some(), &opts)
            .render()
            .as_bytes(),
    )?;
    let code = match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail(_) => 2,
        Verdict::Inapplicable(_) => 3,
    };
    let summary = match report.verdict.reason() {
        Some(r) => format!("verify: {} ({r})", report.verdict.label()),
        None => format!("verify: {}", report.verdict.label()),
    };
    Ok(Outcome { code, summary })
}
