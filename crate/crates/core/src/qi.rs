//! Absolute and difference quantum inequalities over matrix worlds.

use crate::category::ValidationReport;
use crate::error::{Error, Result};
use crate::linalg::{self, c, serde_cmat, CMat};
use crate::tol;
use crate::worlds::{check_state_natural, project_simplex, FieldAssignment, StateSpace, TestSets, ToyScenario, ToyWorld};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// State-dependent bound `(world, label, ρ₀) ↦ Q^d_M(f, ω₀)`.
pub type DqiMap = Arc<dyn Fn(&str, &str, &CMat) -> Result<CMat> + Send + Sync>;

/// `Φ|_F ≥ −Q^a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbsoluteQI {
    pub tests: TestSets,
    pub bound: FieldAssignment,
}

/// `ω(Φ(f)) − ω₀(Φ(f)) ≥ −ω(Q^d(f, ω₀))`.
#[derive(Clone)]
pub struct DifferenceQI {
    pub tests: TestSets,
    pub bound: DqiMap,
}

impl std::fmt::Debug for DifferenceQI {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DifferenceQI").field("tests", &self.tests).finish_non_exhaustive()
    }
}

fn require_hermitian(phi: &FieldAssignment, tests: &TestSets) -> Result<()> {
    for (w, ls) in tests {
        for l in ls {
            let a = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
            let d = linalg::hermitian_defect(a);
            if d > tol::ALGEBRAIC * (1.0 + linalg::max_abs(a)) {
                return Err(Error::NonHermitian(d));
            }
        }
    }
    Ok(())
}

/// Scalar `q` when `a = q·1` within tolerance.
pub fn scalar_part(a: &CMat) -> Option<f64> {
    let n = a.nrows();
    let q = a.trace().re / n as f64;
    (linalg::max_abs(&(a - linalg::identity(n) * c(q, 0.0))) <= 1e-10 * (1.0 + q.abs())).then_some(q)
}

/// `inf_ω ω(A)` over the world's state space.
pub fn state_min(w: &ToyWorld, a: &CMat) -> f64 {
    match &w.state_space {
        StateSpace::All => linalg::lambda_min(a),
        StateSpace::Hull(v) => v.iter().map(|r| linalg::expectation(r, a).re).fold(f64::INFINITY, f64::min),
    }
}

fn state_max(w: &ToyWorld, a: &CMat) -> f64 {
    -state_min(w, &-a)
}

/// `Φ ≥ Ψ` on `tests`: every difference component is positive semidefinite.
pub fn order_leq(psi: &FieldAssignment, phi: &FieldAssignment, tests: &TestSets) -> Result<bool> {
    require_hermitian(phi, tests)?;
    require_hermitian(psi, tests)?;
    for (w, ls) in tests {
        for l in ls {
            let d = phi.get(w, l).expect("checked") - psi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
            if linalg::lambda_min(&d) < -tol::ALGEBRAIC {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl AbsoluteQI {
    pub fn scalar(&self, world: &str, label: &str) -> Option<f64> {
        self.bound.get(world, label).and_then(scalar_part)
    }

    /// Lower-bound property on every state and naturality on the test subsets.
    pub fn validate(&self, s: &ToyScenario, phi: &FieldAssignment) -> Result<ValidationReport> {
        let mut v = Vec::new();
        for (w, ls) in &self.tests {
            let world = s.world(w)?;
            for l in ls {
                let sum = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?
                    + self.bound.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
                let m = state_min(world, &sum);
                if m < -1e-10 {
                    v.push(crate::category::Violation { law: "lower-bound".into(), witness: vec![w.clone(), l.clone()], detail: format!("min expectation {m:e}") });
                }
            }
        }
        let sub = s.check_subfunctor(&self.tests);
        v.extend(sub.violations);
        if v.is_empty() {
            v.extend(s.check_field_on(&self.bound, &self.tests)?.violations);
        }
        Ok(ValidationReport::from_violations(v))
    }
}

impl DifferenceQI {
    pub fn eval(&self, world: &str, label: &str, rho0: &CMat) -> Result<CMat> {
        (self.bound)(world, label, rho0)
    }

    /// Scalar value of `Q^d(f, ω₀)`.
    pub fn scalar(&self, world: &str, label: &str, rho0: &CMat) -> Result<f64> {
        let q = self.eval(world, label, rho0)?;
        scalar_part(&q).ok_or_else(|| Error::InvalidParameter(format!("bound for {world}/{label} is not a multiple of the identity")))
    }

    /// Difference inequality on sampled state pairs plus naturality over `<F, S^op>`.
    pub fn validate(&self, s: &ToyScenario, phi: &FieldAssignment, samples: usize, seed: u64) -> Result<ValidationReport> {
        let mut v = Vec::new();
        for (w, ls) in &self.tests {
            let world = s.world(w)?;
            let states = sample_states(world, samples, seed);
            for l in ls {
                let a = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
                for r0 in &states {
                    let q = self.eval(w, l, r0)?;
                    let base = linalg::expectation(r0, a).re;
                    let worst = state_min(world, &(a + &q)) - base;
                    if worst < -1e-10 {
                        v.push(crate::category::Violation { law: "difference-bound".into(), witness: vec![w.clone(), l.clone()], detail: format!("defect {worst:e}") });
                        break;
                    }
                }
            }
        }
        v.extend(s.check_subfunctor(&self.tests).violations);
        if v.is_empty() {
            let q = self.bound.clone();
            v.extend(check_state_natural(s, &self.tests, &move |w, l, r| q(w, l, r), 2, seed)?.violations);
        }
        Ok(ValidationReport::from_violations(v))
    }
}

/// Probe states of a world followed by seeded random mixed states.
pub fn sample_states(w: &ToyWorld, extra: usize, seed: u64) -> Vec<CMat> {
    let mut out = w.probe_states(2, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    for _ in 0..extra {
        out.push(match &w.state_space {
            StateSpace::All => linalg::random_density(w.dim, &mut rng),
            StateSpace::Hull(h) => random_hull_point(h, &mut rng),
        });
    }
    out
}

fn random_hull_point(h: &[CMat], rng: &mut impl rand::Rng) -> CMat {
    let w: Vec<f64> = (0..h.len()).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let t: f64 = w.iter().sum();
    h.iter().zip(&w).fold(linalg::zeros(h[0].nrows()), |acc, (r, x)| acc + r * c(x / t, 0.0))
}

/// `Q̃^a_M(f) = −inf_ω ω(Φ_M(f))`, as scalar multiples of the identity.
pub fn sharp_aqi(s: &ToyScenario, phi: &FieldAssignment, tests: &TestSets) -> Result<AbsoluteQI> {
    require_hermitian(phi, tests)?;
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    for (w, ls) in tests {
        let world = s.world(w)?;
        let m = comps.entry(w.clone()).or_default();
        for l in ls {
            let q = -state_min(world, phi.get(w, l).expect("checked"));
            m.insert(l.clone(), linalg::identity(world.dim) * c(q, 0.0));
        }
    }
    Ok(AbsoluteQI { tests: tests.clone(), bound: FieldAssignment::new(comps) })
}

/// `Q^d_M(f, ω₀) = Q^a_M(f) + ω₀(Φ_M(f))·1`.
pub fn aqi_to_dqi(qa: &AbsoluteQI, phi: &FieldAssignment) -> DifferenceQI {
    let (qa, phi) = (qa.clone(), phi.clone());
    DifferenceQI {
        tests: qa.tests.clone(),
        bound: Arc::new(move |w, l, r0| {
            let a = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
            let q = qa.bound.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
            Ok(q + linalg::identity(a.nrows()) * linalg::expectation(r0, a))
        }),
    }
}

/// `Q̃^d_M(f, ω₀) = Q̃^a_M(f) + ω₀(Φ_M(f))`.
pub fn sharp_dqi(s: &ToyScenario, phi: &FieldAssignment, tests: &TestSets) -> Result<DifferenceQI> {
    Ok(aqi_to_dqi(&sharp_aqi(s, phi, tests)?, phi))
}

/// `(ΔΦ)_M(f, ω) = Φ_M(f) − ω(Φ_M(f))·1`.
pub fn delta_field(phi: &FieldAssignment) -> DqiMap {
    let phi = phi.clone();
    Arc::new(move |w, l, r| {
        let a = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
        Ok(a - linalg::identity(a.nrows()) * linalg::expectation(r, a))
    })
}

/// One component of the infimum construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfimumEntry {
    pub world: String,
    pub label: String,
    pub value: f64,
    pub affine: bool,
    pub converged: bool,
    /// Largest disagreement between solver restarts.
    pub restart_spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfimumReport {
    pub aqi: AbsoluteQI,
    pub entries: Vec<InfimumEntry>,
}

/// Fit `g(ρ) = Tr(ρK)` on a tomographically complete set of states.
fn fit_affine(n: usize, g: &dyn Fn(&CMat) -> Result<f64>) -> Result<Option<CMat>> {
    let states = linalg::tomographic_pure_states(n);
    let basis = linalg::hermitian_basis(n);
    let m = basis.len();
    let a = nalgebra::DMatrix::<f64>::from_fn(states.len(), m, |i, j| linalg::expectation(&states[i], &basis[j]).re);
    let b = nalgebra::DVector::<f64>::from_iterator(states.len(), states.iter().map(g).collect::<Result<Vec<_>>>()?);
    let Some(x) = a.clone().svd(true, true).solve(&b, 1e-13).ok() else { return Ok(None) };
    let k = basis.iter().zip(x.iter()).fold(linalg::zeros(n), |acc, (e, x)| acc + e * c(*x, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(0xaff1);
    for _ in 0..5 {
        let r = linalg::random_density(n, &mut rng);
        let (gv, lv) = (g(&r)?, linalg::expectation(&r, &k).re);
        if (gv - lv).abs() > 1e-9 * (1.0 + gv.abs()) {
            return Ok(None);
        }
    }
    Ok(Some(k))
}

/// Projected gradient for `min h(ρ)` over density operators (or hull weights).
fn minimize_states(w: &ToyWorld, h: &(dyn Fn(&CMat) -> Result<f64> + Sync), restarts: usize, seed: u64) -> Result<(f64, bool, f64)> {
    let n = w.dim;
    let basis = linalg::hermitian_basis(n);
    let results: Vec<Result<(f64, bool)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            match &w.state_space {
                StateSpace::All => {
                    let mut rho = linalg::random_density(n, &mut rng);
                    let mut val = h(&rho)?;
                    let mut step = 1.0;
                    for _ in 0..tol::PROJECTION_ITER_CAP {
                        let dh = 1e-6;
                        let grad = basis.iter().try_fold(linalg::zeros(n), |acc, e| -> Result<CMat> {
                            let d = (h(&(&rho + e * c(dh, 0.0)))? - h(&(&rho - e * c(dh, 0.0)))?) / (2.0 * dh);
                            Ok(acc + e * c(d, 0.0))
                        })?;
                        let mut moved = false;
                        while step > 1e-14 {
                            let cand = project_density(&(&rho - &grad * c(step, 0.0)));
                            let cv = h(&cand)?;
                            if cv < val - 1e-16 {
                                let change = linalg::max_abs(&(&cand - &rho));
                                rho = cand;
                                val = cv;
                                moved = change > 1e-13;
                                step *= 2.0;
                                break;
                            }
                            step *= 0.5;
                        }
                        if !moved {
                            return Ok((val, true));
                        }
                    }
                    Ok((val, false))
                }
                StateSpace::Hull(hv) => {
                    let m = hv.len();
                    let mix = |wts: &[f64]| hv.iter().zip(wts).fold(linalg::zeros(n), |acc, (r, x)| acc + r * c(*x, 0.0));
                    let mut wts = project_simplex(&(0..m).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
                    let mut val = h(&mix(&wts))?;
                    let mut step = 1.0;
                    for _ in 0..tol::PROJECTION_ITER_CAP {
                        let grad: Vec<f64> = hv.iter().map(|r| {
                            let dh = 1e-6;
                            let p = mix(&wts);
                            Ok((h(&(&p + (r - &p) * c(dh, 0.0)))? - val) / dh)
                        }).collect::<Result<_>>()?;
                        let mut moved = false;
                        while step > 1e-14 {
                            let cand = project_simplex(&wts.iter().zip(&grad).map(|(x, g)| x - step * g).collect::<Vec<_>>());
                            let cv = h(&mix(&cand))?;
                            if cv < val - 1e-16 {
                                moved = cand.iter().zip(&wts).any(|(a, b)| (a - b).abs() > 1e-13);
                                wts = cand;
                                val = cv;
                                step *= 2.0;
                                break;
                            }
                            step *= 0.5;
                        }
                        if !moved {
                            return Ok((val, true));
                        }
                    }
                    Ok((val, false))
                }
            }
        })
        .collect();
    let vals = results.into_iter().collect::<Result<Vec<_>>>()?;
    let best = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let worst = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    Ok((best, vals.iter().all(|v| v.1), worst - best))
}

/// Nearest density operator in Hilbert-Schmidt norm.
pub fn project_density(a: &CMat) -> CMat {
    let (vals, vecs) = linalg::herm_eig(a);
    let p = project_simplex(&vals);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(p.len(), p.iter().map(|x| c(*x, 0.0))));
    &vecs * d * vecs.adjoint()
}

/// `Q̃^a_M(f) = inf_{ω'} (Q̃^d_M(f, ω') − ω'(Φ_M(f)))`.
pub fn dqi_to_aqi_inf(s: &ToyScenario, qd: &DifferenceQI, phi: &FieldAssignment) -> Result<InfimumReport> {
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    let mut entries = Vec::new();
    for (w, ls) in &qd.tests {
        let world = s.world(w)?;
        for l in ls {
            let a = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?.clone();
            let g = |r: &CMat| qd.scalar(w, l, r);
            let (value, affine, converged, spread) = match fit_affine(world.dim, &g)? {
                Some(k) => (state_min(world, &(k - &a)), true, true, 0.0),
                None => {
                    let h = |r: &CMat| Ok(qd.scalar(w, l, r)? - linalg::expectation(r, &a).re);
                    let (v, conv, spread) = minimize_states(world, &h, 50, 0x1f5)?;
                    (v, false, conv, spread)
                }
            };
            comps.entry(w.clone()).or_default().insert(l.clone(), linalg::identity(world.dim) * c(value, 0.0));
            entries.push(InfimumEntry { world: w.clone(), label: l.clone(), value, affine, converged, restart_spread: spread });
        }
    }
    Ok(InfimumReport { aqi: AbsoluteQI { tests: qd.tests.clone(), bound: FieldAssignment::new(comps) }, entries })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub pass: bool,
    pub max_defect: f64,
    pub pairs: usize,
}

/// `Q^d(f, ω₀) − Q^d(f, ω₁) = (ω₀(Φ(f)) − ω₁(Φ(f)))·1` on sampled pairs.
pub fn independence_check(s: &ToyScenario, qd: &DifferenceQI, phi: &FieldAssignment, samples: usize, seed: u64) -> Result<IndependenceReport> {
    let mut max_defect: f64 = 0.0;
    let mut pairs = 0;
    for (w, ls) in &qd.tests {
        let states = sample_states(s.world(w)?, samples, seed);
        for l in ls {
            let a = phi.get(w, l).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}")))?;
            let evals = states.iter().map(|r| qd.eval(w, l, r)).collect::<Result<Vec<_>>>()?;
            for i in 0..states.len() {
                for j in i + 1..states.len() {
                    let shift = linalg::expectation(&states[i], a) - linalg::expectation(&states[j], a);
                    let d = &evals[i] - &evals[j] - linalg::identity(a.nrows()) * shift;
                    max_defect = max_defect.max(linalg::max_abs(&d));
                    pairs += 1;
                }
            }
        }
    }
    Ok(IndependenceReport { pass: max_defect <= 1e-10, max_defect, pairs })
}

/// Bound entering the triviality ratio.
#[derive(Clone, Copy)]
pub enum QiRef<'a> {
    Absolute(&'a AbsoluteQI),
    Difference(&'a DifferenceQI),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrivialityVerdict {
    TrivialEvidence,
    NontrivialWitness,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrivialityReport {
    pub world: String,
    /// Test label attaining the largest ratio.
    pub label: String,
    pub ratio_estimate: f64,
    /// Certified upper bound on the supremum, when one is available.
    pub certified_bound: Option<f64>,
    pub samples: usize,
    pub verdict: TrivialityVerdict,
    #[serde(default, with = "serde_cmat::option", skip_serializing_if = "Option::is_none")]
    pub witness: Option<CMat>,
    /// Running maximum after each start.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrivialityConfig {
    pub scale: f64,
    pub budget: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for TrivialityConfig {
    fn default() -> Self {
        Self { scale: 1.0, budget: 64, seed: 1, threshold: 1e6 }
    }
}

fn ratio_of(psi: &nalgebra::DVector<num_complex::Complex64>, a: &CMat, b: &CMat, scale: f64) -> (f64, f64, f64) {
    let x = (psi.adjoint() * a * psi)[(0, 0)].re;
    let y = (psi.adjoint() * b * psi)[(0, 0)].re;
    (x.abs() / (y.abs() + scale), x, y)
}

/// Ascent of `|⟨ψ,Aψ⟩| / (|⟨ψ,Bψ⟩| + c)` over unit vectors.
fn ascend(mut psi: nalgebra::DVector<num_complex::Complex64>, a: &CMat, b: &CMat, scale: f64) -> (f64, nalgebra::DVector<num_complex::Complex64>) {
    let norm = linalg::op_norm(a) + linalg::op_norm(b) + scale;
    let mut eta = 1.0 / norm;
    let (mut r, mut x, mut y) = ratio_of(&psi, a, b, scale);
    for _ in 0..200 {
        let den = y.abs() + scale;
        let g = (a * &psi) * c(x.signum() * den, 0.0) - (b * &psi) * c(x.abs() * y.signum(), 0.0);
        let g = g / c(den * den, 0.0);
        let mut improved = false;
        while eta > 1e-12 / norm {
            let cand = (&psi + &g * c(eta, 0.0)).normalize();
            let (rc, xc, yc) = ratio_of(&cand, a, b, scale);
            if rc > r {
                psi = cand;
                (r, x, y) = (rc, xc, yc);
                eta *= 2.0;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (r, psi)
}

/// Estimate `sup_ω |ω(Φ(f))| / (|ω(Q(f))| + c)` and certify or refute finiteness.
pub fn triviality_estimate(s: &ToyScenario, phi: &FieldAssignment, q: QiRef<'_>, world: &str, cfg: &TrivialityConfig) -> Result<TrivialityReport> {
    if !(cfg.scale > 0.0) {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let w = s.world(world)?;
    let tests = match q {
        QiRef::Absolute(a) => &a.tests,
        QiRef::Difference(d) => &d.tests,
    };
    let labels: Vec<&String> = tests.get(world).into_iter().flatten().collect();
    let refs: Vec<CMat> = match q {
        QiRef::Absolute(_) => vec![linalg::identity(w.dim) / c(w.dim as f64, 0.0)],
        QiRef::Difference(_) => w.probe_states(0, cfg.seed),
    };
    let mut history = Vec::new();
    let mut best = (0.0, String::new(), None);
    let mut certified: Option<f64> = Some(0.0);
    let mut samples = 0;
    for l in &labels {
        let a = phi.get(world, l).ok_or_else(|| Error::ComponentMissing(format!("{world}/{l}")))?;
        for r0 in &refs {
            let b = match q {
                QiRef::Absolute(qa) => qa.bound.get(world, l).ok_or_else(|| Error::ComponentMissing(format!("{world}/{l}")))?.clone(),
                QiRef::Difference(qd) => qd.eval(world, l, r0)?,
            };
            let bh = linalg::hermitian_part(&b);
            let amax = state_max(w, a).abs().max(state_min(w, a).abs());
            let mut bound = amax / cfg.scale;
            if linalg::max_abs(&(&b + a)) <= 1e-10 * (1.0 + linalg::max_abs(a)) {
                bound = bound.min(1.0);
            }
            if let Some(qs) = scalar_part(&b) {
                bound = bound.min(amax / (qs.abs() + cfg.scale));
            }
            certified = certified.map(|c0| c0.max(bound));
            let mut starts: Vec<nalgebra::DVector<num_complex::Complex64>> = {
                let (_, vecs) = linalg::herm_eig(a);
                (0..w.dim).map(|i| vecs.column(i).into_owned()).collect()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..cfg.budget {
                starts.push(linalg::random_unit_vector(w.dim, &mut rng));
            }
            let hermitian_a = linalg::hermitian_part(a);
            for st in starts {
                let (r, psi) = match &w.state_space {
                    StateSpace::All => ascend(st, &hermitian_a, &bh, cfg.scale),
                    StateSpace::Hull(_) => (ratio_of(&st, &hermitian_a, &bh, cfg.scale).0, st),
                };
                samples += 1;
                if r > best.0 {
                    best = (r, l.to_string(), Some(linalg::projector(&psi)));
                }
                history.push(best.0);
            }
            if let StateSpace::Hull(hv) = &w.state_space {
                for rho in hv {
                    let x = linalg::expectation(rho, a).re;
                    let y = linalg::expectation(rho, &bh).re;
                    let r = x.abs() / (y.abs() + cfg.scale);
                    samples += 1;
                    if r > best.0 {
                        best = (r, l.to_string(), Some(rho.clone()));
                    }
                    history.push(best.0);
                }
            }
        }
    }
    let verdict = if best.0 > cfg.threshold {
        TrivialityVerdict::NontrivialWitness
    } else if certified.is_some_and(|b| b <= cfg.threshold) {
        TrivialityVerdict::TrivialEvidence
    } else {
        TrivialityVerdict::Inconclusive
    };
    let witness = if verdict == TrivialityVerdict::NontrivialWitness { best.2 } else { None };
    Ok(TrivialityReport { world: world.into(), label: best.1, ratio_estimate: best.0, certified_bound: certified, samples, verdict, witness, history })
}

/// Truncated Fock-space example `T = Σ λ_i a_i* a_i ≥ λ₀ N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FockReport {
    pub modes: usize,
    pub basis_size: u128,
    pub lower: f64,
    pub inequality_holds: bool,
    /// `sup ⟨T⟩/⟨N⟩` over number eigenstates using modes `1..=m`, for `m = 1..=n`.
    pub ratio_curve: Vec<f64>,
    /// `sup ⟨T⟩/(λ₀⟨N⟩ + c)` over eigenstates with at most `m` quanta in modes `1..=m`.
    pub triviality_curve: Vec<f64>,
}

pub const FOCK_BASIS_CAP: u128 = 1_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of the truncated Fock space with `n` modes and at most `n` quanta.
pub fn fock_dimension(n: usize) -> u128 {
    binomial(2 * n as u128, n as u128)
}

/// Occupation vectors with total at most `n` over `n` modes.
pub fn fock_basis(n: usize) -> Result<Vec<Vec<u32>>> {
    let size = fock_dimension(n);
    if size > FOCK_BASIS_CAP {
        return Err(Error::DimensionOverflow { size, cap: FOCK_BASIS_CAP });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut occ = vec![0u32; n];
    fn rec(i: usize, left: u32, occ: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == occ.len() {
            out.push(occ.clone());
            return;
        }
        for k in 0..=left {
            occ[i] = k;
            rec(i + 1, left - k, occ, out);
        }
        occ[i] = 0;
    }
    rec(0, n as u32, &mut occ, &mut out);
    Ok(out)
}

/// `lambdas[i]` is the coefficient of mode `i + 1`.
pub fn fock_toy(lambdas: &[f64], n: usize, lower: Option<f64>, scale: f64) -> Result<FockReport> {
    if n == 0 || lambdas.len() < n {
        return Err(Error::InvalidParameter("need one coefficient per mode".into()));
    }
    let lam = &lambdas[..n];
    let lower = lower.unwrap_or_else(|| lam.iter().cloned().fold(f64::INFINITY, f64::min));
    if lam.iter().any(|l| *l < lower) {
        return Err(Error::InvalidParameter("coefficient below the lower bound".into()));
    }
    let basis = fock_basis(n)?;
    let inequality_holds = basis.iter().all(|occ| {
        let t: f64 = occ.iter().zip(lam).map(|(k, l)| *k as f64 * l).sum();
        let q: f64 = occ.iter().map(|k| *k as f64).sum();
        t >= lower * q - tol::ALGEBRAIC * (1.0 + t.abs())
    });
    let mut ratio_curve = Vec::with_capacity(n);
    let mut triviality_curve = Vec::with_capacity(n);
    let mut running = f64::NEG_INFINITY;
    for m in 1..=n {
        running = running.max(lam[m - 1]);
        ratio_curve.push(running);
        let k = m as f64;
        triviality_curve.push((0..m).map(|i| (k * lam[i]).abs() / (lower * k + scale).abs()).fold(0.0, f64::max));
    }
    Ok(FockReport { modes: n, basis_size: basis.len() as u128, lower, inequality_holds, ratio_curve, triviality_curve })
}

/// Dense diagonal `T` and `N` on the truncated Fock space.
pub fn fock_operators(lambdas: &[f64], n: usize) -> Result<(CMat, CMat)> {
    let basis = fock_basis(n)?;
    let t: Vec<f64> = basis.iter().map(|o| o.iter().zip(lambdas).map(|(k, l)| *k as f64 * l).sum()).collect();
    let q: Vec<f64> = basis.iter().map(|o| o.iter().map(|k| *k as f64).sum()).collect();
    Ok((linalg::diag(&t), linalg::diag(&q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_counts() {
        assert_eq!(fock_basis(3).unwrap().len(), 20);
        assert!(matches!(fock_basis(12), Err(Error::DimensionOverflow { .. })));
        let lam: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let r = fock_toy(&lam, 10, Some(0.0), 1.0).unwrap();
        assert_eq!(*r.ratio_curve.last().unwrap(), 10.0);
        assert!(r.inequality_holds);
    }

    #[test]
    fn density_projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = linalg::random_density(3, &mut rng);
        assert!(linalg::max_abs(&(project_density(&r) - &r)) < 1e-12);
    }
}
