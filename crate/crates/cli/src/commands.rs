//! Dispatch from a [`RunConfig`] to module operations, plus artifact emission.

use crate::acceptance::{run_acceptance, AcceptanceConfig};
use crate::config::{parse_sampling, parse_worldline, read_json, Command, MatrixSource, RunConfig, StateSpec, SweepParameter};
use crate::error::CliError;
use crate::report::{timestamp, Check, Quantity, ReportEnvelope};
use num_complex::Complex64;
use qeilab_core::field::{hausdorff, normal_eig, nu_field, numerical_range_sweep, sigma_field};
use qeilab_core::geometry::{embed_in_torus, kappa_upper_curve, length_grid, timelike_diameter, torus_proposition_check, Padding, TorusScenario};
use qeilab_core::qi::{aqi_to_dqi, dqi_to_aqi_inf, independence_check, sharp_aqi, sharp_dqi, triviality_estimate, QiRef, TrivialityConfig};
use qeilab_core::scalar::{build_twopoint, massless_static_closed_form, wick_dqi_bound, wick_dqi_bound_path, BoundReport, StateKind};
use qeilab_core::worlds::{check_state_natural, demo_scenario_json, lpe_check, ScenarioJson};
use qeilab_core::{linalg, AbstractField, CMat, FieldAssignment, SupportRegion, ToyScenario};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const TOOL: &str = "qeilab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A numeric table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A gnuplot script reading one of the tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub body: String,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    pub timings: BTreeMap<String, f64>,
}

/// Torus scenario file: the scenario plus a schema version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusScenarioFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub scenario: TorusScenario,
}

/// Validates, dispatches and writes the requested artifacts.
pub fn run(cfg: &RunConfig) -> Result<ReportEnvelope, CliError> {
    cfg.validate()?;
    let started_at = timestamp();
    let start = Instant::now();
    let mut outcome = execute(cfg)?;
    outcome.timings.insert("total".into(), start.elapsed().as_secs_f64());
    let hash = cfg.hash();
    let mut artifacts = Vec::new();
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.clone(), source: e })?;
        if cfg.formats.csv {
            for t in &outcome.tables {
                let name = format!("{}.csv", t.name);
                write(dir, &name, &table_csv(t, cfg.seed, &hash))?;
                artifacts.push(name);
            }
        }
        if cfg.formats.plot {
            for p in &outcome.plots {
                let name = format!("{}.gp", p.name);
                write(dir, &name, &format!("# {TOOL} {VERSION} seed={} config={hash}\n{}", cfg.seed, p.body))?;
                artifacts.push(name);
            }
        }
        artifacts.push("report.json".into());
    }
    let envelope = ReportEnvelope {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: cfg.command_name(),
        config_hash: hash,
        seed: cfg.seed,
        started_at,
        finished_at: timestamp(),
        timings: outcome.timings,
        pass: outcome.checks.iter().all(|c| c.pass),
        checks: outcome.checks,
        results: outcome.results,
        artifacts,
    };
    if let Some(dir) = &cfg.output_dir {
        write(dir, "report.json", &serde_json::to_string_pretty(&envelope).expect("report serializes"))?;
    }
    Ok(envelope)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| CliError::Io { path, source: e })
}

pub fn table_csv(t: &Table, seed: u64, hash: &str) -> String {
    let mut s = format!("# {TOOL} {VERSION} seed={seed} config={hash}\n{}\n", t.header.join(","));
    for r in &t.rows {
        s.push_str(&r.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn plot(name: &str, table: &str, logx: bool, logy: bool, using: &str, style: &str) -> Plot {
    let mut body = String::from("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n");
    if logx {
        body.push_str("set logscale x\n");
    }
    if logy {
        body.push_str("set logscale y\n");
    }
    body.push_str(&format!("set terminal pngcairo size 900,600\nset output '{name}.png'\nplot '{table}.csv' using {using} with {style}\n"));
    Plot { name: name.into(), body }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seed = cfg.seed;
    match &cfg.command {
        Command::QeiBound { state, g, worldline, path } => qei_bound(state, g, worldline, *path),
        Command::QeiSweep { state, g, worldline, parameter, values } => qei_sweep(state, g, worldline, *parameter, values),
        Command::GeomEll { points, padding } => geom_ell(points, *padding),
        Command::GeomKappa { mass, lmin, lmax, steps } => geom_kappa(*mass, *lmin, *lmax, *steps),
        Command::GeomTorusCheck { scenario, gap_tolerance } => geom_torus(scenario, *gap_tolerance),
        Command::ToyLpe { scenario } => toy_lpe(scenario, seed),
        Command::ToyCheckProps { scenario } => toy_props(scenario, seed),
        Command::QiSharp { scenario } => qi_sharp(scenario, seed),
        Command::QiConvert { scenario, samples } => qi_convert(scenario, *samples, seed),
        Command::QiTriviality { scenario, world, scale, budget } => qi_triviality(scenario, world.as_deref(), *scale, *budget, seed),
        Command::FieldNumrange { matrix, angles } => field_numrange(matrix, *angles, seed),
        Command::FieldSpectrum { scenario } => field_spectrum(scenario, seed),
        Command::FieldCheckCoSigmaNu { scenario } => field_co_sigma_nu(scenario, seed),
        Command::Acceptance { only } => acceptance(only, cfg),
    }
}

fn bound_value(r: &BoundReport) -> Quantity {
    Quantity::estimate(r.value, r.total_error)
}

fn qei_bound(state: &StateSpec, g: &str, worldline: &str, path: Option<qeilab_core::scalar::EvalPath>) -> Result<Outcome, CliError> {
    let g = parse_sampling(g)?;
    let wl = parse_worldline(worldline)?;
    let kind = state.kind()?;
    let omega = build_twopoint(kind.clone(), &wl)?;
    let r = match path {
        Some(p) => wick_dqi_bound_path(&g, &wl, &omega, p)?,
        None => wick_dqi_bound(&g, &wl, &omega)?,
    };
    let mut checks = vec![Check::new("bound converged", r.converged), Check::new("bound is positive", r.value > 0.0)];
    let mut results = json!({ "sampling": g, "worldline": worldline, "state": kind, "bound": r, "value": bound_value(&r) });
    if kind == StateKind::vacuum(0.0) && wl.is_static() {
        let closed = massless_static_closed_form(&g);
        results["closed_form"] = to_value(&Quantity::estimate(closed, 0.0));
        checks.push(Check::new("agrees with the closed form", (r.value - closed).abs() <= r.total_error + 1e-6 * closed));
    }
    Ok(Outcome { results, checks, ..Default::default() })
}

fn qei_sweep(state: &StateSpec, g: &str, worldline: &str, parameter: SweepParameter, values: &[f64]) -> Result<Outcome, CliError> {
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CliError::Invalid("sweep values must be positive and finite".into()));
    }
    let g0 = parse_sampling(g)?;
    let wl = parse_worldline(worldline)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut checks = Vec::new();
    for &v in values {
        let (g, kind) = match parameter {
            SweepParameter::Width => (g0.dilate(v), state.kind()?),
            SweepParameter::Temperature => (g0.clone(), StateKind::thermal(v, state.mass)),
        };
        let r = wick_dqi_bound(&g, &wl, &build_twopoint(kind, &wl)?)?;
        checks.push(Check::new(format!("converged at {v}"), r.converged));
        rows.push(vec![v, r.value, r.total_error]);
        points.push(json!({ "parameter": v, "bound": bound_value(&r) }));
    }
    let name = match parameter {
        SweepParameter::Width => "width",
        SweepParameter::Temperature => "temperature",
    };
    Ok(Outcome {
        results: json!({ "parameter": name, "sampling": g0, "points": points }),
        checks,
        tables: vec![Table { name: "sweep".into(), header: vec![name.into(), "bound".into(), "error".into()], rows }],
        plots: vec![plot("sweep", "sweep", true, true, "1:2:3", "yerrorlines")],
        ..Default::default()
    })
}

/// Events from CSV lines `t,x,y,z`; blank, comment and non-numeric header lines are skipped.
pub fn read_points_csv(path: &Path) -> Result<Vec<[f64; 4]>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 4 => out.push([v[0], v[1], v[2], v[3]]),
            Err(_) if i == 0 => continue,
            _ => return Err(CliError::Invalid(format!("{}:{}: expected four numbers t,x,y,z", path.display(), i + 1))),
        }
    }
    Ok(out)
}

fn geom_ell(points: &[[f64; 4]], padding: Option<Padding>) -> Result<Outcome, CliError> {
    let region = match padding {
        Some(p) => SupportRegion::with_padding(points.to_vec(), p)?,
        None => SupportRegion::new(points.to_vec())?,
    };
    let r = timelike_diameter(&region);
    let torus = embed_in_torus(r.cone.as_ref());
    let checks = vec![Check::new("every point respects the padding", r.degenerate || r.margin >= r.padding * (1.0 - 1e-6) - 1e-12)];
    let inside = torus_points_inside(&region, &torus);
    Ok(Outcome {
        results: json!({ "points": points.len(), "diameter": r, "torus": torus, "points_in_fundamental_domain": inside }),
        checks,
        ..Default::default()
    })
}

fn torus_points_inside(region: &SupportRegion, torus: &qeilab_core::geometry::TorusEmbedding) -> usize {
    region.points.iter().filter(|p| torus.in_fundamental_domain(p)).count()
}

fn geom_kappa(mass: f64, lmin: f64, lmax: f64, steps: usize) -> Result<Outcome, CliError> {
    let grid = length_grid(lmin, lmax, steps)?;
    let curve = kappa_upper_curve(mass, &grid)?;
    let rows = curve.rows.iter().map(|r| vec![r.length, r.value, r.tail_estimate]).collect();
    let checks = vec![Check::new("lattice sums finite", curve.rows.iter().all(|r| r.value.is_finite()))];
    Ok(Outcome {
        results: to_value(&curve),
        checks,
        tables: vec![Table { name: "kappa".into(), header: vec!["L".into(), "kappa_bar".into(), "tail_estimate".into()], rows }],
        plots: vec![plot("kappa", "kappa", false, true, "1:2", "linespoints")],
        ..Default::default()
    })
}

pub fn load_torus_scenario(path: &Path) -> Result<TorusScenario, CliError> {
    let f: TorusScenarioFile = read_json(path)?;
    if f.schema_version != crate::config::CONFIG_SCHEMA_VERSION {
        return Err(CliError::Schema { path: "schema_version".into(), message: format!("unsupported version {}", f.schema_version) });
    }
    Ok(f.scenario)
}

fn geom_torus(scenario: &TorusScenario, gap: f64) -> Result<Outcome, CliError> {
    let mut sc = scenario.clone();
    sc.sampling = sc.sampling.rebuild()?;
    let r = torus_proposition_check(&sc, gap)?;
    let rows = r.refinement.iter().map(|x| vec![x.length, x.rhs]).collect();
    let checks = vec![
        Check::new("sampled infimum below the torus bound", r.holds),
        Check::new("torus vacuum saturates the bound", r.saturated),
        Check::new("absolute bound consistent", r.absolute_bound_consistent),
    ];
    Ok(Outcome {
        results: to_value(&r),
        checks,
        tables: vec![Table { name: "torus_refinement".into(), header: vec!["L".into(), "rhs".into()], rows }],
        plots: vec![plot("torus_refinement", "torus_refinement", false, false, "1:2", "linespoints")],
        ..Default::default()
    })
}

/// A scenario file, or the built-in demo for `demo`. Without a stored field a
/// seeded hermitian natural field is drawn.
pub fn load_scenario(name: &str, seed: u64) -> Result<(ToyScenario, FieldAssignment), CliError> {
    let j: ScenarioJson = if name == "demo" { demo_scenario_json() } else { read_json(&PathBuf::from(name))? };
    let (s, field) = ToyScenario::from_json(&j)?;
    let phi = field.unwrap_or_else(|| s.random_natural_field(seed, true));
    Ok((s, phi))
}

fn toy_lpe(scenario: &str, seed: u64) -> Result<Outcome, CliError> {
    let (s, _) = load_scenario(scenario, seed)?;
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for psi in s.proper_morphisms() {
        let r = lpe_check(&s, psi)?;
        checks.push(Check::new(format!("LPE along {}", psi.id), r.pass));
        reports.push(r);
    }
    Ok(Outcome { results: json!({ "morphisms": reports }), checks, ..Default::default() })
}

fn covariance_defect(s: &ToyScenario, q: &qeilab_core::AbsoluteQI) -> f64 {
    let mut worst: f64 = 0.0;
    for psi in s.proper_morphisms() {
        for (f, pf) in &psi.test_push {
            if let (Some(a), Some(b)) = (q.scalar(&psi.target, pf), q.scalar(&psi.source, f)) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

fn toy_props(scenario: &str, seed: u64) -> Result<Outcome, CliError> {
    let (s, phi) = load_scenario(scenario, seed)?;
    let tests = s.test_sets();
    let subfunctor = s.check_subfunctor(&tests);
    let natural = s.check_field(&phi)?;
    let lpe: Vec<_> = s.proper_morphisms().map(|p| lpe_check(&s, p)).collect::<Result<_, _>>()?;
    let qa = sharp_aqi(&s, &phi, &tests)?;
    let aqi = qa.validate(&s, &phi)?;
    let qd = sharp_dqi(&s, &phi, &tests)?;
    let dqi = qd.validate(&s, &phi, 8, seed)?;
    let q = qd.bound.clone();
    let state_natural = check_state_natural(&s, &tests, &move |w, l, r| q(w, l, r), 4, seed)?;
    let cov = covariance_defect(&s, &qa);
    let all_lpe = lpe.iter().all(|r| r.pass);
    let checks = vec![
        Check::new("category laws", true),
        Check::new("test subfunctor", subfunctor.pass),
        Check::new("field naturality", natural.pass),
        Check::new("sharp absolute bound valid", aqi.pass),
        Check::new("sharp difference bound valid", dqi.pass),
        Check::new("difference bound natural over states", state_natural.pass),
        Check::new("sharp bound covariance", !all_lpe || cov <= 1e-9),
    ];
    Ok(Outcome {
        results: json!({
            "worlds": s.worlds.len(),
            "morphisms": s.morphisms.len(),
            "iso_classes": s.iso_index(),
            "subfunctor": subfunctor,
            "field_naturality": natural,
            "lpe": lpe,
            "aqi_validation": aqi,
            "dqi_validation": dqi,
            "dqi_state_naturality": state_natural,
            "covariance_defect": Quantity::estimate(cov, 0.0),
        }),
        checks,
        ..Default::default()
    })
}

fn bound_table(q: &qeilab_core::AbsoluteQI) -> Value {
    let mut m = serde_json::Map::new();
    for (w, l, a) in q.bound.entries() {
        let v = a.trace().re / a.nrows() as f64;
        m.insert(format!("{w}/{l}"), to_value(&Quantity::estimate(v, qeilab_core::tol::ALGEBRAIC * (1.0 + v.abs()))));
    }
    Value::Object(m)
}

fn qi_sharp(scenario: &str, seed: u64) -> Result<Outcome, CliError> {
    let (s, phi) = load_scenario(scenario, seed)?;
    let qa = sharp_aqi(&s, &phi, &s.test_sets())?;
    let v = qa.validate(&s, &phi)?;
    Ok(Outcome { results: json!({ "sharp_aqi": bound_table(&qa), "validation": v }), checks: vec![Check::new("sharp bound valid", v.pass)], ..Default::default() })
}

fn qi_convert(scenario: &str, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    let (s, phi) = load_scenario(scenario, seed)?;
    let qa = sharp_aqi(&s, &phi, &s.test_sets())?;
    let qd = aqi_to_dqi(&qa, &phi);
    let back = dqi_to_aqi_inf(&s, &qd, &phi)?;
    let defect = back.entries.iter().map(|e| (qa.scalar(&e.world, &e.label).unwrap_or(f64::NAN) - e.value).abs()).fold(0.0, f64::max);
    let ind = independence_check(&s, &qd, &phi, samples, seed)?;
    Ok(Outcome {
        results: json!({
            "sharp_aqi": bound_table(&qa),
            "recovered": back.entries,
            "round_trip_defect": Quantity::estimate(defect, 0.0),
            "independence": ind,
        }),
        checks: vec![Check::new("round trip recovers the absolute bound", defect <= 1e-8), Check::new("difference bound is reference independent", ind.pass)],
        ..Default::default()
    })
}

fn qi_triviality(scenario: &str, world: Option<&str>, scale: f64, budget: usize, seed: u64) -> Result<Outcome, CliError> {
    let (s, phi) = load_scenario(scenario, seed)?;
    let qa = sharp_aqi(&s, &phi, &s.test_sets())?;
    let cfg = TrivialityConfig { scale, budget, seed, ..Default::default() };
    let worlds: Vec<String> = match world {
        Some(w) => vec![w.to_string()],
        None => s.worlds.keys().cloned().collect(),
    };
    let reports = worlds.iter().map(|w| triviality_estimate(&s, &phi, QiRef::Absolute(&qa), w, &cfg)).collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome { results: json!({ "reports": reports }), ..Default::default() })
}

fn matrix_from(source: &MatrixSource, seed: u64) -> Result<CMat, CliError> {
    match source {
        MatrixSource::Jordan { size } => {
            if *size == 0 {
                return Err(CliError::Invalid("Jordan block needs size >= 1".into()));
            }
            let mut j = linalg::zeros(*size);
            for i in 0..size - 1 {
                j[(i, i + 1)] = Complex64::new(1.0, 0.0);
            }
            Ok(j)
        }
        MatrixSource::Inline { rows } => {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Invalid("inline matrix must be square and non-empty".into()));
            }
            Ok(CMat::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
        }
        MatrixSource::Scenario { scenario, world, label } => {
            let (_, phi) = load_scenario(scenario, seed)?;
            phi.get(world, label).cloned().ok_or_else(|| CliError::Invalid(format!("no component {world}/{label}")))
        }
    }
}

fn field_numrange(source: &MatrixSource, angles: usize, seed: u64) -> Result<Outcome, CliError> {
    if angles < 3 {
        return Err(CliError::Invalid("at least three angles are required".into()));
    }
    let a = matrix_from(source, seed)?;
    let r = numerical_range_sweep(&a, angles);
    let eig = qeilab_core::field::eigenvalues(&a);
    let outside = eig.iter().map(|z| r.distance(*z)).fold(0.0, f64::max);
    let mut rows: Vec<Vec<f64>> = r.vertices.iter().map(|z| vec![z.re, z.im]).collect();
    if let Some(first) = rows.first().cloned() {
        rows.push(first);
    }
    let chord = (std::f64::consts::PI / angles as f64).tan() * linalg::op_norm(&a);
    Ok(Outcome {
        results: json!({ "region": r, "eigenvalues": eig, "max_eigenvalue_distance": Quantity::estimate(outside, chord) }),
        checks: vec![Check::new("eigenvalues lie in the numerical range", outside <= chord + 1e-12)],
        tables: vec![Table { name: "numrange".into(), header: vec!["re".into(), "im".into()], rows }],
        plots: vec![plot("numrange", "numrange", false, false, "1:2", "lines")],
        ..Default::default()
    })
}

fn field_spectrum(scenario: &str, seed: u64) -> Result<Outcome, CliError> {
    let (s, phi) = load_scenario(scenario, seed)?;
    let f = AbstractField::full(&s, phi)?;
    let sigma = sigma_field(&s, &f);
    let nu = nu_field(&s, &f)?;
    let outside = sigma.points.iter().map(|z| nu.distance(*z)).fold(0.0, f64::max);
    let rows = sigma.points.iter().map(|z| vec![z.re, z.im]).collect();
    Ok(Outcome {
        results: json!({ "spectrum": sigma, "numerical_range": nu, "max_distance_outside_range": Quantity::estimate(outside, 0.0) }),
        checks: vec![Check::new("spectrum inside the numerical range", outside <= 1e-8)],
        tables: vec![Table { name: "spectrum".into(), header: vec!["re".into(), "im".into()], rows }],
        plots: vec![plot("spectrum", "spectrum", false, false, "1:2", "points")],
        ..Default::default()
    })
}

fn field_co_sigma_nu(scenario: &str, seed: u64) -> Result<Outcome, CliError> {
    let (s, phi) = load_scenario(scenario, seed)?;
    let normal = phi.entries().all(|(_, _, a)| normal_eig(a).is_ok());
    let f = AbstractField::full(&s, phi)?;
    let nu = nu_field(&s, &f)?;
    let hull = sigma_field(&s, &f).hull();
    let h = hausdorff(&nu, &hull);
    let contained = hull.vertices.iter().map(|z| nu.distance(*z)).fold(0.0, f64::max);
    let check = if normal {
        Check::new("convex hull of the spectrum equals the numerical range", h <= 1e-8)
    } else {
        Check::new("convex hull of the spectrum lies in the numerical range", contained <= 1e-8)
    };
    Ok(Outcome {
        results: json!({ "normal": normal, "hausdorff": Quantity::estimate(h, 0.0), "numerical_range": nu, "spectrum_hull": hull }),
        checks: vec![check],
        ..Default::default()
    })
}

fn acceptance(only: &[String], cfg: &RunConfig) -> Result<Outcome, CliError> {
    let acfg = AcceptanceConfig { seed: cfg.seed, only: only.to_vec(), tolerances: cfg.tolerances.clone() };
    let mut report = run_acceptance(&acfg).map_err(CliError::Invalid)?;
    let timings = std::mem::take(&mut report.timings).into_iter().map(|(k, v)| (format!("criterion.{k}"), v)).collect();
    let checks = report.criteria.iter().map(|c| Check::new(format!("criterion {}: {}", c.id, c.title), c.pass)).collect();
    Ok(Outcome { results: to_value(&report), checks, timings, ..Default::default() })
}

/// The pass/fail matrix of an acceptance envelope.
pub fn acceptance_matrix(envelope: &ReportEnvelope) -> Vec<String> {
    serde_json::from_value::<crate::acceptance::SuiteReport>(envelope.results.clone()).map(|r| r.matrix()).unwrap_or_default()
}

