//! The acceptance suite: fourteen criteria run with frozen seeds.

use crate::report::{Check, Quantity};
use num_complex::Complex64;
use qeilab_core::field::{
    field_mul, field_star, field_zero, functional_calculus, hausdorff, nu_field, numerical_range_sweep, separating_state_check, sigma_field,
};
use qeilab_core::geometry::{kappa_upper_curve, length_grid, timelike_diameter, torus_proposition_check, Padding, Poincare, TorusScenario};
use qeilab_core::qi::{aqi_to_dqi, dqi_to_aqi_inf, fock_operators, fock_toy, independence_check, order_leq, sharp_aqi};
use qeilab_core::scalar::{
    build_twopoint, independence_identity_check, kappa_bar, massless_static_closed_form, thermal_scaling_probe, wick_dqi_bound,
    wick_dqi_bound_path, wick_one_point, EvalPath, MASSLESS_STATIC_CONSTANT,
};
use qeilab_core::worlds::{demo_scenario, lpe_check};
use qeilab_core::{linalg, oracle, AbstractField, CMat, FieldAssignment, SamplingFunction, StateKind, StateSpace, SupportRegion, ToyScenario, ToyWorld, Worldline};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

pub const DEFAULT_SEED: u64 = 1729;

/// `1/(8 pi^2)`.
const FROZEN_CONSTANT: f64 = 0.012665147955292222;
/// `C int g'^2` for the unit bump.
const FROZEN_BUMP_CLOSED_FORM: f64 = 5.187480725007098e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Module names or criterion numbers; empty selects everything.
    #[serde(default)]
    pub only: Vec<String>,
    /// Keys `"<id>"` or `"<id>.<name>"`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, only: Vec::new(), tolerances: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub module: String,
    pub pass: bool,
    /// Failed while running with an overridden tolerance.
    pub configuration_induced: bool,
    pub tolerances: BTreeMap<String, f64>,
    pub measurements: BTreeMap<String, Quantity>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn matrix_line(&self) -> String {
        let verdict = match (self.pass, self.configuration_induced) {
            (true, _) => "PASS",
            (false, true) => "FAIL (configuration-induced)",
            (false, false) => "FAIL",
        };
        format!("criterion {:>2}  {:<16} {:<44} {}", self.id, self.module, self.title, verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub selected: Vec<u8>,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
    /// Wall-clock seconds per criterion.
    pub timings: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn matrix(&self) -> Vec<String> {
        self.criteria.iter().map(CriterionResult::matrix_line).collect()
    }
}

type Run = fn(&mut Ctx<'_>) -> qeilab_core::Result<()>;

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub module: &'static str,
    run: Run,
}

pub const CRITERIA: [Criterion; 14] = [
    Criterion { id: 1, title: "massless static closed form", module: "scalar-qei", run: c01_closed_form },
    Criterion { id: 2, title: "stationary and general path agreement", module: "scalar-qei", run: c02_paths },
    Criterion { id: 3, title: "independence identity", module: "scalar-qei", run: c03_independence },
    Criterion { id: 4, title: "thermal scaling exponents", module: "scalar-qei", run: c04_thermal_scaling },
    Criterion { id: 5, title: "torus lattice sum", module: "scalar-qei", run: c05_lattice },
    Criterion { id: 6, title: "torus proposition", module: "causal-geometry", run: c06_torus_proposition },
    Criterion { id: 7, title: "timelike diameter", module: "causal-geometry", run: c07_diameter },
    Criterion { id: 8, title: "matrix-model sharp bounds", module: "qi-core", run: c08_sharp },
    Criterion { id: 9, title: "local physical equivalence and covariance", module: "matrix-worlds", run: c09_lpe },
    Criterion { id: 10, title: "numerical range and spectrum", module: "field-analysis", run: c10_range },
    Criterion { id: 11, title: "separating state", module: "field-analysis", run: c11_separating },
    Criterion { id: 12, title: "Fock toy model", module: "qi-core", run: c12_fock },
    Criterion { id: 13, title: "dilation scaling", module: "scalar-qei", run: c13_dilation },
    Criterion { id: 14, title: "determinism", module: "qi-cli", run: c14_placeholder },
];

/// Criterion numbers picked by `only`; unknown selectors are reported as an error.
pub fn select(only: &[String]) -> Result<Vec<u8>, String> {
    if only.is_empty() || only.iter().any(|s| s == "all") {
        return Ok(CRITERIA.iter().map(|c| c.id).collect());
    }
    let mut ids = Vec::new();
    for sel in only {
        let hits: Vec<u8> = CRITERIA.iter().filter(|c| c.module == sel || c.id.to_string() == *sel).map(|c| c.id).collect();
        if hits.is_empty() {
            return Err(format!("unknown acceptance selector `{sel}`"));
        }
        ids.extend(hits);
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

pub struct Ctx<'a> {
    id: u8,
    seed: u64,
    overrides: &'a BTreeMap<String, f64>,
    overridden: bool,
    tolerances: BTreeMap<String, f64>,
    measurements: BTreeMap<String, Quantity>,
    checks: Vec<Check>,
    notes: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl<'a> Ctx<'a> {
    fn new(id: u8, seed: u64, overrides: &'a BTreeMap<String, f64>) -> Self {
        Self {
            id,
            seed,
            overrides,
            overridden: false,
            tolerances: BTreeMap::new(),
            measurements: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    fn tol(&mut self, name: &str, default: f64) -> f64 {
        let specific = format!("{}.{name}", self.id);
        let v = match self.overrides.get(&specific).or_else(|| self.overrides.get(&self.id.to_string())) {
            Some(v) => {
                self.overridden = true;
                *v
            }
            None => default,
        };
        self.tolerances.insert(name.to_string(), v);
        v
    }

    fn measure(&mut self, name: impl Into<String>, q: Quantity) {
        self.measurements.insert(name.into(), q);
    }

    fn check(&mut self, name: impl Into<String>, pass: bool) -> bool {
        self.checks.push(Check::new(name, pass));
        pass
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn budget(&mut self, name: &str, limit: f64, start: Instant) {
        let t = start.elapsed().as_secs_f64();
        self.timings.insert(name.to_string(), t);
        self.check(format!("{name} runtime < {limit} s"), t < limit);
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let s = self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((self.id as u64) << 32) ^ stream;
        ChaCha8Rng::seed_from_u64(s)
    }

    fn finish(self, c: &Criterion, outcome: qeilab_core::Result<()>) -> (CriterionResult, BTreeMap<String, f64>) {
        let error = outcome.err().map(|e| e.to_string());
        let pass = error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|k| k.pass);
        let result = CriterionResult {
            id: c.id,
            title: c.title.into(),
            module: c.module.into(),
            pass,
            configuration_induced: !pass && self.overridden,
            tolerances: self.tolerances,
            measurements: self.measurements,
            checks: self.checks,
            notes: self.notes,
            error,
        };
        (result, self.timings)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn run_ids(ids: &[u8], cfg: &AcceptanceConfig) -> (Vec<CriterionResult>, BTreeMap<String, f64>) {
    let mut out = Vec::new();
    let mut timings = BTreeMap::new();
    for c in CRITERIA.iter().filter(|c| ids.contains(&c.id) && c.id != 14) {
        let start = Instant::now();
        let mut cx = Ctx::new(c.id, cfg.seed, &cfg.tolerances);
        let outcome = (c.run)(&mut cx);
        let (r, steps) = cx.finish(c, outcome);
        for (k, v) in steps {
            timings.insert(format!("{}.{k}", c.id), v);
        }
        timings.insert(c.id.to_string(), start.elapsed().as_secs_f64());
        out.push(r);
    }
    (out, timings)
}

/// Runs the selected criteria. Determinism reruns the other selected
/// criteria, or all of them when it is selected alone.
pub fn run_acceptance(cfg: &AcceptanceConfig) -> Result<SuiteReport, String> {
    let selected = select(&cfg.only)?;
    let (mut criteria, mut timings) = run_ids(&selected, cfg);
    if selected.contains(&14) {
        let start = Instant::now();
        let base: Vec<u8> = selected.iter().copied().filter(|&i| i != 14).collect();
        let (first, second_ids) = if base.is_empty() {
            let all: Vec<u8> = (1..14).collect();
            (run_ids(&all, cfg).0, all)
        } else {
            (criteria.clone(), base)
        };
        let second = run_ids(&second_ids, cfg).0;
        let a = serde_json::to_string_pretty(&first).expect("serializes");
        let b = serde_json::to_string_pretty(&second).expect("serializes");
        let mut cx = Ctx::new(14, cfg.seed, &cfg.tolerances);
        cx.measure("criteria_compared", Quantity::count(second_ids.len()));
        cx.measure("report_bytes", Quantity::count(a.len()));
        let first_diff = a.bytes().zip(b.bytes()).position(|(x, y)| x != y);
        cx.check("repeated run is byte-identical", a == b);
        if let Some(p) = first_diff {
            cx.note(format!("reports differ from byte {p}"));
        }
        let (r, _) = cx.finish(&CRITERIA[13], Ok(()));
        timings.insert("14".into(), start.elapsed().as_secs_f64());
        criteria.push(r);
    }
    let pass = criteria.iter().all(|c| c.pass);
    Ok(SuiteReport { seed: cfg.seed, selected, pass, criteria, timings })
}

fn c14_placeholder(_: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    Ok(())
}

fn c01_closed_form(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("relative", 1e-4);
    let g = SamplingFunction::bump(1.0);
    let wl = Worldline::static_origin();
    let vac = build_twopoint(StateKind::vacuum(0.0), &wl)?;
    let start = Instant::now();
    let r = wick_dqi_bound_path(&g, &wl, &vac, EvalPath::General)?;
    cx.budget("general path", 10.0, start);
    let closed = massless_static_closed_form(&g);
    cx.measure("general_path", Quantity::estimate(r.value, r.total_error));
    cx.measure("closed_form", Quantity::estimate(closed, (closed - FROZEN_BUMP_CLOSED_FORM).abs()));
    cx.measure("constant", Quantity::exact(MASSLESS_STATIC_CONSTANT));
    let e = rel(r.value, closed);
    cx.measure("relative_error", Quantity::estimate(e, r.total_error / closed));
    cx.check("general path matches the closed form", e <= tol);
    cx.check("general path converged", r.converged);
    cx.check("constant matches frozen value", MASSLESS_STATIC_CONSTANT == FROZEN_CONSTANT);
    cx.check("closed form matches frozen value", rel(closed, FROZEN_BUMP_CLOSED_FORM) <= 1e-12);
    Ok(())
}

fn c02_paths(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let factor = cx.tol("error_multiple", 1.0);
    let wl = Worldline::static_origin();
    let start = Instant::now();
    let scenarios = [
        ("bump0.5_vacuum", 0.5, StateKind::vacuum(0.0)),
        ("bump1_vacuum", 1.0, StateKind::vacuum(0.0)),
        ("bump2_vacuum", 2.0, StateKind::vacuum(0.0)),
        ("bump1_vacuum_m1", 1.0, StateKind::vacuum(1.0)),
        ("bump0.5_thermal1", 0.5, StateKind::thermal(1.0, 0.0)),
        ("bump1_thermal1", 1.0, StateKind::thermal(1.0, 0.0)),
        ("bump2_thermal1", 2.0, StateKind::thermal(1.0, 0.0)),
    ];
    for (label, w, kind) in scenarios.iter().cloned() {
        let g = SamplingFunction::bump(w);
        let omega = build_twopoint(kind, &wl)?;
        let s = wick_dqi_bound_path(&g, &wl, &omega, EvalPath::Stationary)?;
        let q = wick_dqi_bound_path(&g, &wl, &omega, EvalPath::General)?;
        cx.measure(format!("{label}.stationary"), Quantity::estimate(s.value, s.total_error));
        cx.measure(format!("{label}.general"), Quantity::estimate(q.value, q.total_error));
        let budget = factor * (s.total_error + q.total_error);
        cx.check(format!("{label}: |difference| <= summed errors"), (s.value - q.value).abs() <= budget);
    }
    cx.measure("scenarios", Quantity::count(scenarios.len()));
    cx.budget("all scenarios", 60.0, start);
    Ok(())
}

fn c03_independence(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("relative", 1e-4);
    let g = SamplingFunction::bump(1.0);
    let wl = Worldline::static_origin();
    let states = [
        ("vacuum", StateKind::vacuum(0.0)),
        ("thermal0.5", StateKind::thermal(0.5, 0.0)),
        ("thermal1", StateKind::thermal(1.0, 0.0)),
        ("thermal2", StateKind::thermal(2.0, 0.0)),
    ];
    let twopoints = states.iter().map(|(_, k)| build_twopoint(k.clone(), &wl)).collect::<qeilab_core::Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let d = independence_identity_check(&g, &wl, &twopoints[j], &twopoints[i])?;
            worst = worst.max(d.relative);
            cx.measure(format!("{}-{}.relative_defect", states[j].0, states[i].0), Quantity::estimate(d.relative, d.tolerance));
        }
    }
    cx.check("largest relative defect below tolerance", worst <= tol);
    let mut absolute = Vec::new();
    for ((label, _), tp) in states.iter().zip(&twopoints) {
        let q = wick_dqi_bound(&g, &wl, tp)?;
        let one = wick_one_point(tp, &g, &wl)?;
        let a = Quantity::estimate(q.value - one.value, q.total_error + one.error);
        cx.measure(format!("{label}.absolute_bound"), a);
        absolute.push(a.value);
    }
    let lo = absolute.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = absolute.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / hi.abs().max(lo.abs());
    cx.measure("absolute_bound.relative_spread", Quantity::exact(spread));
    cx.check("rearranged absolute bound is reference independent", spread <= tol);
    Ok(())
}

fn c04_thermal_scaling(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("exponent", 0.05);
    let g = SamplingFunction::bump(1.0);
    let wl = Worldline::static_origin();
    let temps = [2.5, 5.0, 10.0, 25.0];
    let start = Instant::now();
    let r = thermal_scaling_probe(&temps, &g, &wl, 1.0 / 6.0)?;
    cx.budget("probe", 60.0, start);
    cx.measure("wick_exponent", Quantity::exact(r.wick_exponent));
    cx.measure("energy_exponent", Quantity::exact(r.energy_exponent));
    for (t, (w, e)) in temps.iter().zip(r.wick_values.iter().zip(&r.energy_values)) {
        cx.measure(format!("T{t}.wick"), Quantity::estimate(w.value, w.error));
        cx.measure(format!("T{t}.energy"), Quantity::estimate(e.value, e.error));
    }
    cx.check("temperatures span a decade", temps[temps.len() - 1] / temps[0] >= 10.0);
    cx.check("Wick-square exponent is 2", (r.wick_exponent - 2.0).abs() <= tol);
    cx.check("energy-density exponent is 4", (r.energy_exponent - 4.0).abs() <= tol);
    cx.check("high-temperature regime", !r.regime_warning);
    Ok(())
}

fn c05_lattice(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol_oracle = cx.tol("mode_sum", 1e-6);
    let tol_collapse = cx.tol("collapse", 1e-8);
    let tol_rate = cx.tol("decay_rate", 0.05);
    let k = kappa_bar(1.0, 1.0)?;
    let modes = oracle::kappa_mode_sum(1.0, 1.0);
    cx.measure("kappa(1,1)", Quantity::estimate(k.value, k.tail_estimate));
    cx.measure("mode_sum(1,1)", Quantity::estimate(modes, (modes - k.value).abs()));
    cx.check("lattice sum matches the mode-sum oracle", rel(k.value, modes) <= tol_oracle);
    let masses = [0.5, 1.0, 1.5, 2.0, 3.0];
    let lengths = [0.5, 1.0, 2.0, 3.0, 5.0];
    let mut worst: f64 = 0.0;
    for m in masses {
        for l in lengths {
            let direct = kappa_bar(m, l)?.value;
            let scaled = m * m * kappa_bar(1.0, m * l)?.value;
            worst = worst.max(rel(direct, scaled));
        }
    }
    cx.measure("collapse.max_relative_defect", Quantity::exact(worst));
    cx.check("kappa(m, L) = m^2 F(mL) on a 5x5 grid", worst <= tol_collapse);
    for m in [1.0, 2.0] {
        let grid = length_grid(4.0 / m, 16.0 / m, 13)?;
        let curve = kappa_upper_curve(m, &grid)?;
        let Some(fit) = curve.fit else {
            cx.check(format!("m={m}: exponential fit available"), false);
            continue;
        };
        cx.measure(format!("m{m}.decay_rate"), Quantity::estimate(fit.rate, fit.rms_residual));
        cx.check(format!("m={m}: decay rate within tolerance of m"), rel(fit.rate, m) <= tol_rate);
    }
    Ok(())
}

fn c06_torus_proposition(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let gap_tol = cx.tol("gap", 1e-6);
    let scenarios = [
        ("cos2_0.5_m1", SamplingFunction::cos2(0.5), 1.0),
        ("bump1_m1", SamplingFunction::bump(1.0), 1.0),
        ("bump0.5_m2", SamplingFunction::bump(0.5), 2.0),
    ];
    for (label, g, mass) in scenarios {
        let sc = TorusScenario { sampling: g, mass, temperatures: vec![0.5, 1.0, 2.0], length_factors: vec![1.0, 1.25, 1.5, 2.0, 3.0] };
        let r = torus_proposition_check(&sc, gap_tol)?;
        cx.measure(format!("{label}.ell"), Quantity::exact(r.ell));
        cx.measure(format!("{label}.rhs"), Quantity::estimate(r.rhs, r.saturation_tolerance));
        cx.measure(format!("{label}.infimum"), Quantity::estimate(r.infimum, r.samples.iter().map(|s| s.error).fold(0.0, f64::max)));
        cx.measure(format!("{label}.gap"), Quantity::estimate(r.gap, r.saturation_tolerance));
        cx.measure(format!("{label}.saturation_defect"), Quantity::estimate(r.saturation_defect, r.saturation_tolerance));
        cx.check(format!("{label}: sampled infimum within the bound"), r.gap >= -gap_tol);
        cx.check(format!("{label}: torus vacuum saturates the bound"), r.saturated);
    }
    Ok(())
}

fn c07_diameter(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol_ball = cx.tol("ball", 5e-3);
    let tol_drift = cx.tol("drift", 1e-8);
    let r = 1.0;
    let ball = SupportRegion::sphere([0.0; 4], r, 60)?;
    let rep = timelike_diameter(&ball);
    let grid = oracle::grid_diameter(&ball.points, rep.padding, 6);
    cx.measure("ball.ell", Quantity::estimate(rep.ell, (rep.ell - grid).abs()));
    cx.measure("ball.grid_oracle", Quantity::estimate(grid, (rep.ell - grid).abs()));
    cx.check("ball diameter is 2r", rel(rep.ell, 2.0 * r) <= tol_ball);
    cx.check("ball diameter matches the grid oracle", rel(rep.ell, grid) <= tol_ball);

    let mut rng = cx.rng(0);
    let points: Vec<[f64; 4]> =
        (0..12).map(|_| [rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let cloud = SupportRegion::with_padding(points, Padding::Absolute { margin: 0.02 })?;
    let base = timelike_diameter(&cloud).ell;
    let start = Instant::now();
    let mut drift: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for _ in 0..100 {
        let map = Poincare::random(&mut rng, 1.0, 3.0);
        defect = defect.max(map.isometry_defect());
        let ell = timelike_diameter(&cloud.transformed(&map)).ell;
        drift = drift.max(rel(ell, base));
    }
    cx.timings.insert("isometries".into(), start.elapsed().as_secs_f64());
    cx.measure("cloud.ell", Quantity::estimate(base, drift * base));
    cx.measure("cloud.max_relative_drift", Quantity::exact(drift));
    cx.measure("max_isometry_defect", Quantity::exact(defect));
    cx.check("Poincare drift over 100 isometries", drift <= tol_drift);
    Ok(())
}

fn single_world(a: &CMat) -> qeilab_core::Result<(ToyScenario, FieldAssignment)> {
    let s = ToyScenario::from_generators(vec![ToyWorld::new("M", a.nrows(), &["f"])], vec![])?;
    let mut phi = FieldAssignment::new(BTreeMap::new());
    phi.set("M", "f", a.clone());
    Ok((s, phi))
}

fn c08_sharp(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol_min = cx.tol("lambda_min", 1e-10);
    let tol_round = cx.tol("round_trip", 1e-8);
    let mut rng = cx.rng(0);
    let (mut worst_min, mut worst_round, mut worst_rearranged): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut independent = 0;
    for i in 0..100 {
        let n = 2 + i % 5;
        let a = linalg::random_hermitian(n, &mut rng);
        let (s, phi) = single_world(&a)?;
        let tests = s.test_sets();
        let qa = sharp_aqi(&s, &phi, &tests)?;
        let q = qa.bound.get("M", "f").map(|m| m[(0, 0)].re).unwrap_or(f64::NAN);
        worst_min = worst_min.max((q + oracle::char_poly_lambda_min(&a)).abs());
        let qd = aqi_to_dqi(&qa, &phi);
        let inf = dqi_to_aqi_inf(&s, &qd, &phi)?;
        let back = inf.entries[0].value;
        worst_round = worst_round.max((back - q).abs());
        let ind = independence_check(&s, &qd, &phi, 8, rng.random())?;
        if ind.pass {
            independent += 1;
            for _ in 0..5 {
                let rho = linalg::random_density(n, &mut rng);
                let rearranged = qd.scalar("M", "f", &rho)? - linalg::expectation(&rho, &a).re;
                worst_rearranged = worst_rearranged.max((rearranged - q).abs());
            }
        }
    }
    cx.measure("max |Q + lambda_min|", Quantity::exact(worst_min));
    cx.measure("max round-trip defect", Quantity::exact(worst_round));
    cx.measure("max rearrangement defect", Quantity::exact(worst_rearranged));
    cx.measure("independent_instances", Quantity::count(independent));
    cx.check("sharp bound equals -lambda_min", worst_min <= tol_min);
    cx.check("infimum recovers the absolute bound", worst_round <= tol_round);
    cx.check("rearrangement matches on independent instances", worst_rearranged <= tol_round);
    cx.check("independence observed", independent > 0);
    Ok(())
}

fn c09_lpe(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("covariance", 1e-9);
    let s = demo_scenario();
    let proper: Vec<_> = s.proper_morphisms().cloned().collect();
    let mut lpe_pass = 0;
    for psi in &proper {
        let r = lpe_check(&s, psi)?;
        lpe_pass += r.pass as usize;
    }
    cx.measure("morphisms", Quantity::count(proper.len()));
    cx.measure("lpe_passes", Quantity::count(lpe_pass));
    cx.check("LPE holds for every morphism", lpe_pass == proper.len());

    let phi = s.random_natural_field(cx.rng(0).random(), true);
    let tests = s.test_sets();
    let q = |s: &ToyScenario| -> qeilab_core::Result<BTreeMap<(String, String), f64>> {
        let qa = sharp_aqi(s, &phi, &tests)?;
        Ok(qa.bound.entries().map(|(w, l, m)| ((w.clone(), l.clone()), m[(0, 0)].re)).collect())
    };
    let full = q(&s)?;
    let mut worst: f64 = 0.0;
    for psi in &proper {
        for (f, pf) in &psi.test_push {
            worst = worst.max((full[&(psi.target.clone(), pf.clone())] - full[&(psi.source.clone(), f.clone())]).abs());
        }
    }
    cx.measure("max covariance defect", Quantity::exact(worst));
    cx.check("sharp bound is covariant", worst <= tol);

    let mut rng = cx.rng(1);
    let hull: Vec<CMat> = (0..4).map(|_| linalg::random_density(8, &mut rng)).collect();
    let restricted = s.with_state_space("C", StateSpace::Hull(hull))?;
    let qr = q(&restricted)?;
    let (mut violation, mut strict, mut lpe_fail): (f64, usize, usize) = (0.0, 0, 0);
    for psi in restricted.proper_morphisms() {
        for (f, pf) in &psi.test_push {
            let (qn, qm) = (qr[&(psi.target.clone(), pf.clone())], qr[&(psi.source.clone(), f.clone())]);
            violation = violation.max(qn - qm);
            if qm - qn > 1e-6 {
                strict += 1;
            }
        }
        if psi.target == "C" && !lpe_check(&restricted, psi)?.pass {
            lpe_fail += 1;
        }
    }
    cx.measure("restricted.max one-sided violation", Quantity::exact(violation.max(0.0)));
    cx.measure("restricted.strict_inequalities", Quantity::count(strict));
    cx.measure("restricted.lpe_failures", Quantity::count(lpe_fail));
    cx.check("one-sided inequality holds with a restricted target", violation <= tol);
    cx.check("equality fails with a restricted target", strict > 0);
    cx.check("LPE fails into the restricted world", lpe_fail > 0);
    Ok(())
}

fn c10_range(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol_disk = cx.tol("jordan", 1e-3);
    let tol_hull = cx.tol("co_sigma_nu", 1e-8);
    let tol_pos = cx.tol("positivity", 1e-9);
    let mut j = linalg::zeros(2);
    j[(0, 1)] = Complex64::new(1.0, 0.0);
    let sweep = numerical_range_sweep(&j, 720);
    let sampled = oracle::sampled_numerical_range(&j, 1_000_000, cx.rng(0).random());
    let h = hausdorff(&sweep, &sampled);
    let radius = sweep.vertices.iter().map(|z| (z.norm() - 0.5).abs()).fold(0.0, f64::max);
    cx.measure("jordan.hausdorff_vs_sampling", Quantity::exact(h));
    cx.measure("jordan.max_radius_defect", Quantity::exact(radius));
    cx.check("Jordan block range matches sampling", h <= tol_disk);
    cx.check("Jordan block range is the disk of radius 1/2", radius <= tol_disk);

    let s = demo_scenario();
    let tests = s.test_sets();
    let mut rng = cx.rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let phi = AbstractField::full(&s, s.random_natural_field(rng.random(), true))?;
        let nu = nu_field(&s, &phi)?;
        worst = worst.max(hausdorff(&nu, &sigma_field(&s, &phi).hull()));
    }
    cx.measure("max hausdorff(co sigma, nu)", Quantity::exact(worst));
    cx.check("co sigma = nu on 50 hermitian fields", worst <= tol_hull);

    let zero = field_zero(&s, &tests)?;
    let mut consistent = [0usize; 2];
    for (k, positive) in [(0, true), (1, false)] {
        for _ in 0..50 {
            let phi = if positive {
                let psi = AbstractField::full(&s, s.random_natural_field(rng.random(), false))?;
                field_mul(&s, &field_star(&s, &psi)?, &psi)?
            } else {
                AbstractField::full(&s, s.random_natural_field(rng.random(), true))?
            };
            let scale = 1.0 + phi.norm;
            let order = order_leq(&zero.assignment, &phi.assignment, &tests)?;
            let by_nu = nu_field(&s, &phi)?.real_interval().is_some_and(|(lo, _)| lo >= -tol_pos * scale);
            let spec = sigma_field(&s, &phi);
            let by_sigma = spec.points.iter().all(|z| z.re >= -tol_pos * scale && z.im.abs() <= tol_pos * scale);
            let root = functional_calculus(&s, &phi, &|z| Complex64::new(z.re.max(0.0).sqrt(), 0.0))?;
            let sq = field_mul(&s, &root, &root)?;
            let by_square = phi
                .assignment
                .entries()
                .all(|(w, l, a)| linalg::max_abs(&(sq.get(w, l) - a)) <= tol_pos * scale && linalg::hermitian_defect(root.get(w, l)) <= tol_pos * scale);
            let votes = [order, by_nu, by_sigma, by_square];
            if votes.iter().all(|v| *v == positive) {
                consistent[k] += 1;
            }
        }
    }
    cx.measure("positive.consistent", Quantity::count(consistent[0]));
    cx.measure("indefinite.consistent", Quantity::count(consistent[1]));
    cx.check("four positivity tests agree on 50 positive fields", consistent[0] == 50);
    cx.check("four positivity tests agree on 50 indefinite fields", consistent[1] == 50);
    Ok(())
}

fn c11_separating(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("norm", 1e-9);
    let mut rng = cx.rng(0);
    let (mut attained, mut worst): (usize, f64) = (0, 0.0);
    for i in 0..50 {
        let n = 2 + i % 4;
        let u = linalg::random_unitary(n, &mut rng);
        let nu0: f64 = rng.random_range(-2.0..2.0);
        let a = match i % 3 {
            0 => &u * linalg::identity(n) * Complex64::new(nu0, 0.0) * u.adjoint(),
            1 => linalg::random_hermitian(n, &mut rng),
            _ => {
                let p = linalg::random_pure(n, &mut rng);
                linalg::identity(n) * Complex64::new(nu0, 0.0) + p
            }
        };
        let rho = linalg::random_density(n, &mut rng);
        let (hit, _) = separating_state_check(&a, &rho, tol)?;
        if hit {
            attained += 1;
            let lmin = linalg::lambda_min(&a);
            worst = worst.max(linalg::op_norm(&(&a - linalg::identity(n) * Complex64::new(lmin, 0.0))));
        }
    }
    cx.measure("attaining_scenarios", Quantity::count(attained));
    cx.measure("max ||A - nu0||", Quantity::exact(worst));
    cx.check("attained minimum forces a scalar component", worst < tol);
    cx.check("attainment observed", attained > 0);
    Ok(())
}

fn c12_fock(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("ratio", 1e-12);
    let n = 6;
    let families: [(&str, fn(usize) -> f64); 2] = [("linear", |i| i as f64), ("log", |i| ((i + 1) as f64).ln())];
    for (label, f) in families {
        let lam: Vec<f64> = (1..=n).map(f).collect();
        let rep = fock_toy(&lam, n, None, 1.0)?;
        let (t, q) = fock_operators(&lam, n)?;
        let slack = linalg::lambda_min(&(t - q * Complex64::new(rep.lower, 0.0)));
        cx.measure(format!("{label}.basis_size"), Quantity::count(rep.basis_size as usize));
        cx.measure(format!("{label}.min(T - lambda0 N)"), Quantity::exact(slack));
        cx.check(format!("{label}: T >= lambda0 N on the truncated basis"), rep.inequality_holds && slack >= 0.0);
        let mut worst: f64 = 0.0;
        for m in 1..=n {
            let closed = lam[..m].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let brute = oracle::fock_ratio_brute(&lam, m);
            worst = worst.max((rep.ratio_curve[m - 1] - closed).abs()).max((brute - closed).abs());
        }
        cx.measure(format!("{label}.max ratio defect"), Quantity::exact(worst));
        cx.check(format!("{label}: ratio growth matches the diagonal closed form"), worst <= tol);
    }
    Ok(())
}

fn c13_dilation(cx: &mut Ctx<'_>) -> qeilab_core::Result<()> {
    let tol = cx.tol("relative", 1e-3);
    let g = SamplingFunction::bump(1.0);
    let wl = Worldline::static_origin();
    let vac = build_twopoint(StateKind::vacuum(0.0), &wl)?;
    let base = wick_dqi_bound(&g, &wl, &vac)?;
    cx.measure("lambda1", Quantity::estimate(base.value, base.total_error));
    for lambda in [0.5, 2.0] {
        let r = wick_dqi_bound(&g.dilate(lambda), &wl, &vac)?;
        cx.measure(format!("lambda{lambda}"), Quantity::estimate(r.value, r.total_error));
        let e = rel(r.value * lambda * lambda, base.value);
        cx.check(format!("lambda={lambda}: bound scales as lambda^-2"), e <= tol);
    }
    Ok(())
}
