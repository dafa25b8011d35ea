//! Finite-dimensional model theories: worlds carry full matrix algebras,
//! embeddings act by block repetition followed by unitary conjugation,
//! states are density operators.

use crate::category::{
    canonicalize, check_natural, Category, FiniteCategory, Functor, IsoClassIndex, MorphismSpec, NatTransData,
    Opposite, ValidationReport, Variance,
};
use crate::error::{Error, Result};
use crate::linalg::{self, c, serde_cmat, CMat};
use crate::tol;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// State space of a world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpace {
    /// All density operators.
    All,
    /// Convex hull of the listed density operators.
    Hull(#[serde(with = "serde_cmat::vec")] Vec<CMat>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyWorld {
    pub id: String,
    pub dim: usize,
    pub tests: BTreeSet<String>,
    pub state_space: StateSpace,
}

impl ToyWorld {
    pub fn new(id: &str, dim: usize, tests: &[&str]) -> Self {
        Self { id: id.into(), dim, tests: tests.iter().map(|s| s.to_string()).collect(), state_space: StateSpace::All }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter(format!("world `{}` has dimension 0", self.id)));
        }
        if let StateSpace::Hull(v) = &self.state_space {
            if v.is_empty() {
                return Err(Error::InvalidState(format!("world `{}` has an empty hull", self.id)));
            }
            for rho in v {
                DensityState::new(&self.id, rho.clone())?;
                if rho.nrows() != self.dim {
                    return Err(Error::InvalidState(format!("hull state of wrong size in `{}`", self.id)));
                }
            }
        }
        Ok(())
    }

    /// Extreme points used to probe the state space: hull vertices, or a
    /// tomographically complete set of pure states plus seeded random ones.
    pub fn probe_states(&self, extra_random: usize, seed: u64) -> Vec<CMat> {
        match &self.state_space {
            StateSpace::Hull(v) => v.clone(),
            StateSpace::All => {
                let mut out = linalg::tomographic_pure_states(self.dim);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..extra_random {
                    out.push(linalg::random_pure(self.dim, &mut rng));
                }
                out
            }
        }
    }
}

/// Density operator on a world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityState {
    pub world: String,
    #[serde(with = "serde_cmat")]
    pub rho: CMat,
}

impl DensityState {
    pub fn new(world: &str, rho: CMat) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidState("density operator is not square".into()));
        }
        let tr = rho.trace();
        if (tr - c(1.0, 0.0)).norm() > tol::ALGEBRAIC * 10.0 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if linalg::hermitian_defect(&rho) > tol::ALGEBRAIC * 10.0 {
            return Err(Error::InvalidState("density operator is not hermitian".into()));
        }
        let lmin = linalg::lambda_min(&rho);
        if lmin < -tol::ALGEBRAIC * 10.0 {
            return Err(Error::InvalidState(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(Self { world: world.into(), rho })
    }

    pub fn maximally_mixed(world: &str, n: usize) -> Self {
        Self { world: world.into(), rho: linalg::identity(n) / c(n as f64, 0.0) }
    }

    pub fn expect(&self, a: &CMat) -> num_complex::Complex64 {
        linalg::expectation(&self.rho, a)
    }
}

/// Unital injective *-homomorphism `A ↦ U (1_k ⊗ A) U*` with a test push.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyMorphism {
    pub id: String,
    pub source: String,
    pub target: String,
    pub multiplicity: usize,
    #[serde(with = "serde_cmat")]
    pub unitary: CMat,
    pub test_push: BTreeMap<String, String>,
}

impl ToyMorphism {
    pub fn identity(w: &ToyWorld) -> Self {
        Self {
            id: format!("id_{}", w.id),
            source: w.id.clone(),
            target: w.id.clone(),
            multiplicity: 1,
            unitary: linalg::identity(w.dim),
            test_push: w.tests.iter().map(|t| (t.clone(), t.clone())).collect(),
        }
    }

    pub fn apply(&self, a: &CMat) -> CMat {
        &self.unitary * linalg::block_repeat(a, self.multiplicity) * self.unitary.adjoint()
    }

    pub fn push(&self, label: &str) -> Option<&str> {
        self.test_push.get(label).map(|s| s.as_str())
    }

    /// State pullback: `trace(ρ' A) = trace(ρ α(A))`.
    pub fn pullback_matrix(&self, rho: &CMat) -> CMat {
        let n = rho.nrows() / self.multiplicity;
        linalg::block_trace(&(self.unitary.adjoint() * rho * &self.unitary), n, self.multiplicity)
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &ToyMorphism) -> Result<ToyMorphism> {
        if f.target != self.source {
            return Err(Error::InvalidMorphism(format!("`{}` ∘ `{}` is not composable", self.id, f.id)));
        }
        let mut push = BTreeMap::new();
        for (k, v) in &f.test_push {
            let w = self.push(v).ok_or_else(|| Error::InvalidMorphism(format!("label `{v}` not pushed by `{}`", self.id)))?;
            push.insert(k.clone(), w.to_string());
        }
        Ok(ToyMorphism {
            id: format!("{}∘{}", self.id, f.id),
            source: f.source.clone(),
            target: self.target.clone(),
            multiplicity: self.multiplicity * f.multiplicity,
            unitary: &self.unitary * linalg::block_repeat(&f.unitary, self.multiplicity),
            test_push: push,
        })
    }

    /// Same endpoints, same test push, same algebra map on matrix units.
    pub fn same_map(&self, o: &ToyMorphism, src_dim: usize) -> bool {
        self.source == o.source
            && self.target == o.target
            && self.test_push == o.test_push
            && linalg::matrix_units(src_dim)
                .iter()
                .all(|e| linalg::max_abs(&(self.apply(e) - o.apply(e))) < 1e-10)
    }

    /// Check unitality, multiplicativity, *-preservation and injectivity on
    /// matrix units, plus injectivity of the test push.
    pub fn validate(&self, src: &ToyWorld, dst: &ToyWorld) -> Result<()> {
        if self.source != src.id || self.target != dst.id {
            return Err(Error::WorldMismatch { expected: format!("{} -> {}", src.id, dst.id), found: format!("{} -> {}", self.source, self.target) });
        }
        if self.multiplicity == 0 || src.dim * self.multiplicity != dst.dim || self.unitary.nrows() != dst.dim {
            return Err(Error::InvalidMorphism(format!("`{}`: dimensions do not match block size", self.id)));
        }
        if linalg::unitary_defect(&self.unitary) > tol::ALGEBRAIC * 100.0 {
            return Err(Error::InvalidMorphism(format!("`{}`: conjugating matrix is not unitary", self.id)));
        }
        let units = linalg::matrix_units(src.dim);
        let one = self.apply(&linalg::identity(src.dim));
        if linalg::max_abs(&(one - linalg::identity(dst.dim))) > tol::ALGEBRAIC * 100.0 {
            return Err(Error::InvalidMorphism(format!("`{}` is not unital", self.id)));
        }
        for a in &units {
            let aa = self.apply(a);
            if linalg::max_abs(&(self.apply(&a.adjoint()) - aa.adjoint())) > tol::ALGEBRAIC * 100.0 {
                return Err(Error::InvalidMorphism(format!("`{}` does not preserve adjoints", self.id)));
            }
            for b in &units {
                if linalg::max_abs(&(self.apply(&(a * b)) - &aa * self.apply(b))) > tol::ALGEBRAIC * 100.0 {
                    return Err(Error::InvalidMorphism(format!("`{}` is not multiplicative", self.id)));
                }
            }
            let nrm = linalg::expectation(&aa.adjoint(), &aa).re;
            if (nrm - self.multiplicity as f64).abs() > 1e-9 {
                return Err(Error::InvalidMorphism(format!("`{}` is not injective", self.id)));
            }
        }
        let mut seen = BTreeSet::new();
        for (k, v) in &self.test_push {
            if !src.tests.contains(k) || !dst.tests.contains(v) || !seen.insert(v) {
                return Err(Error::InvalidMorphism(format!("`{}`: test push is not an injection", self.id)));
            }
        }
        if self.test_push.len() != src.tests.len() {
            return Err(Error::InvalidMorphism(format!("`{}`: test push is not total", self.id)));
        }
        Ok(())
    }
}

/// Per-world assignment of algebra elements to test labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAssignment {
    pub components: BTreeMap<String, BTreeMap<String, SerMat>>,
    pub hermitian: bool,
}

/// Per-world test subsets, the restricted test functor of a QI.
pub type TestSets = BTreeMap<String, BTreeSet<String>>;

/// Serializable matrix wrapper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SerMat(#[serde(with = "serde_cmat")] pub CMat);

impl FieldAssignment {
    pub fn new(components: BTreeMap<String, BTreeMap<String, CMat>>) -> Self {
        let hermitian = components.values().flat_map(|m| m.values()).all(|a| linalg::is_hermitian(a, tol::ALGEBRAIC));
        Self {
            components: components.into_iter().map(|(w, m)| (w, m.into_iter().map(|(k, v)| (k, SerMat(v))).collect())).collect(),
            hermitian,
        }
    }

    pub fn get(&self, world: &str, label: &str) -> Option<&CMat> {
        self.components.get(world).and_then(|m| m.get(label)).map(|s| &s.0)
    }

    pub fn world(&self, world: &str) -> impl Iterator<Item = (&String, &CMat)> {
        self.components.get(world).into_iter().flat_map(|m| m.iter().map(|(k, v)| (k, &v.0)))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String, &CMat)> {
        self.components.iter().flat_map(|(w, m)| m.iter().map(move |(k, v)| (w, k, &v.0)))
    }

    /// Componentwise map.
    pub fn map(&self, f: impl Fn(&str, &str, &CMat) -> CMat) -> FieldAssignment {
        let comps = self
            .components
            .iter()
            .map(|(w, m)| (w.clone(), m.iter().map(|(k, v)| (k.clone(), f(w, k, &v.0))).collect()))
            .collect();
        FieldAssignment::new(comps)
    }

    pub fn set(&mut self, world: &str, label: &str, a: CMat) {
        self.components.entry(world.into()).or_default().insert(label.into(), SerMat(a));
        let h = self.entries().all(|(_, _, a)| linalg::is_hermitian(a, tol::ALGEBRAIC));
        self.hermitian = h;
    }
}

/// Worlds, embeddings closed under composition, and the induced category.
#[derive(Debug, Clone)]
pub struct ToyScenario {
    pub worlds: BTreeMap<String, ToyWorld>,
    pub morphisms: BTreeMap<String, ToyMorphism>,
    pub category: FiniteCategory,
}

/// Generator entry of a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorphismJson {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(default = "one")]
    pub multiplicity: usize,
    #[serde(default, with = "serde_cmat::option", skip_serializing_if = "Option::is_none")]
    pub unitary: Option<CMat>,
    pub test_push: BTreeMap<String, String>,
    /// Also add the inverse morphism under this identifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_id: Option<String>,
}

fn one() -> usize {
    1
}

/// Scenario file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub schema_version: u32,
    pub worlds: Vec<ToyWorld>,
    pub morphisms: Vec<MorphismJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<BTreeMap<String, BTreeMap<String, SerMat>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_seed: Option<u64>,
}

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;
const CLOSURE_CAP: usize = 2000;

impl ToyScenario {
    /// Close the generators under composition and build the category.
    pub fn from_generators(worlds: Vec<ToyWorld>, generators: Vec<ToyMorphism>) -> Result<Self> {
        let mut wmap = BTreeMap::new();
        for w in worlds {
            w.validate()?;
            if wmap.insert(w.id.clone(), w).is_some() {
                return Err(Error::MalformedTable("duplicate world identifier".into()));
            }
        }
        let mut mors: Vec<ToyMorphism> = wmap.values().map(ToyMorphism::identity).collect();
        for g in generators {
            let (s, t) = (
                wmap.get(&g.source).ok_or_else(|| Error::Unknown(g.source.clone()))?,
                wmap.get(&g.target).ok_or_else(|| Error::Unknown(g.target.clone()))?,
            );
            g.validate(s, t)?;
            if mors.iter().any(|m| m.id == g.id) {
                return Err(Error::MalformedTable(format!("duplicate morphism `{}`", g.id)));
            }
            if let Some(existing) = mors.iter().find(|m| m.same_map(&g, s.dim)) {
                return Err(Error::MalformedTable(format!("generator `{}` duplicates `{}`", g.id, existing.id)));
            }
            mors.push(g);
        }
        let mut compose: BTreeMap<(String, String), String> = BTreeMap::new();
        loop {
            let mut added = false;
            let snapshot = mors.clone();
            for g in &snapshot {
                for f in snapshot.iter().filter(|f| f.target == g.source) {
                    if compose.contains_key(&(g.id.clone(), f.id.clone())) {
                        continue;
                    }
                    let gf = g.after(f)?;
                    let dim = wmap[&gf.source].dim;
                    let id = match mors.iter().find(|m| m.same_map(&gf, dim)) {
                        Some(m) => m.id.clone(),
                        None => {
                            let id = gf.id.clone();
                            mors.push(gf);
                            added = true;
                            id
                        }
                    };
                    compose.insert((g.id.clone(), f.id.clone()), id);
                }
            }
            if mors.len() > CLOSURE_CAP {
                return Err(Error::MalformedTable("composition closure exceeds cap".into()));
            }
            if !added && mors.iter().all(|g| mors.iter().filter(|f| f.target == g.source).all(|f| compose.contains_key(&(g.id.clone(), f.id.clone())))) {
                break;
            }
        }
        let objects: Vec<String> = wmap.keys().cloned().collect();
        let specs = mors.iter().map(|m| MorphismSpec { id: m.id.clone(), src: m.source.clone(), dst: m.target.clone() }).collect();
        let ids = wmap.keys().map(|w| (w.clone(), format!("id_{w}"))).collect();
        let category = FiniteCategory::new(
            objects,
            specs,
            compose.into_iter().map(|((g, f), gf)| (g, f, gf)).collect(),
            ids,
        )?;
        Ok(Self { worlds: wmap, morphisms: mors.into_iter().map(|m| (m.id.clone(), m)).collect(), category })
    }

    pub fn from_json(j: &ScenarioJson) -> Result<(Self, Option<FieldAssignment>)> {
        if j.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!("unsupported scenario schema version {}", j.schema_version)));
        }
        let dims: BTreeMap<&str, usize> = j.worlds.iter().map(|w| (w.id.as_str(), w.dim)).collect();
        let mut gens = Vec::new();
        for m in &j.morphisms {
            let tdim = *dims.get(m.target.as_str()).ok_or_else(|| Error::Unknown(m.target.clone()))?;
            let u = m.unitary.clone().unwrap_or_else(|| linalg::identity(tdim));
            let g = ToyMorphism { id: m.id.clone(), source: m.source.clone(), target: m.target.clone(), multiplicity: m.multiplicity, unitary: u, test_push: m.test_push.clone() };
            if let Some(inv) = &m.inverse_id {
                if m.multiplicity != 1 {
                    return Err(Error::InvalidMorphism(format!("`{}` has multiplicity > 1 and no inverse", m.id)));
                }
                gens.push(ToyMorphism {
                    id: inv.clone(),
                    source: g.target.clone(),
                    target: g.source.clone(),
                    multiplicity: 1,
                    unitary: g.unitary.adjoint(),
                    test_push: g.test_push.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
                });
            }
            gens.push(g);
        }
        let s = Self::from_generators(j.worlds.clone(), gens)?;
        let field = match (&j.field, j.field_seed) {
            (Some(f), _) => Some(FieldAssignment::new(f.iter().map(|(w, m)| (w.clone(), m.iter().map(|(k, v)| (k.clone(), v.0.clone())).collect())).collect())),
            (None, Some(seed)) => Some(s.random_natural_field(seed, true)),
            _ => None,
        };
        Ok((s, field))
    }

    pub fn world(&self, id: &str) -> Result<&ToyWorld> {
        self.worlds.get(id).ok_or_else(|| Error::Unknown(id.into()))
    }

    pub fn morphism(&self, id: &str) -> Result<&ToyMorphism> {
        self.morphisms.get(id).ok_or_else(|| Error::Unknown(id.into()))
    }

    /// Non-identity morphisms in lexicographic order.
    pub fn proper_morphisms(&self) -> impl Iterator<Item = &ToyMorphism> {
        self.morphisms.values().filter(|m| !m.id.starts_with("id_"))
    }

    pub fn test_sets(&self) -> TestSets {
        self.worlds.iter().map(|(k, w)| (k.clone(), w.tests.clone())).collect()
    }

    /// Subfunctor condition: every push maps `F(M)` into `F(N)`.
    pub fn check_subfunctor(&self, tests: &TestSets) -> ValidationReport {
        let mut v = Vec::new();
        for m in self.morphisms.values() {
            let (fs, fd) = (tests.get(&m.source), tests.get(&m.target));
            let ok = fs.is_none_or(|fs| fs.iter().all(|l| m.push(l).is_some_and(|t| fd.is_some_and(|fd| fd.contains(t)))));
            if !ok {
                v.push(crate::category::Violation {
                    law: "subfunctor".into(),
                    witness: vec![m.id.clone()],
                    detail: format!("push along `{}` leaves the restricted test set", m.id),
                });
            }
        }
        ValidationReport::from_violations(v)
    }

    /// Naturality of a field restricted to `tests`.
    pub fn check_field_on(&self, phi: &FieldAssignment, tests: &TestSets) -> Result<ValidationReport> {
        let t = NatTransData {
            source: TestFunctor::restricted(self, 1, tests),
            target: AlgebraFunctor::new(self),
            components: self
                .worlds
                .keys()
                .map(|w| {
                    let table = tests
                        .get(w)
                        .into_iter()
                        .flatten()
                        .map(|l| phi.get(w, l).cloned().map(|a| (l.clone(), a)).ok_or_else(|| Error::ComponentMissing(format!("{w}/{l}"))))
                        .collect::<Result<_>>()?;
                    Ok((w.clone(), ConcreteMor::Assign { src: ConcreteObj::Tests(w.clone(), 1), dst: ConcreteObj::Algebra(w.clone()), table }))
                })
                .collect::<Result<_>>()?,
        };
        check_natural(&t)
    }

    pub fn iso_index(&self) -> IsoClassIndex {
        canonicalize(&self.category)
    }

    pub fn with_state_space(&self, world: &str, s: StateSpace) -> Result<Self> {
        let mut out = self.clone();
        let w = out.worlds.get_mut(world).ok_or_else(|| Error::Unknown(world.into()))?;
        w.state_space = s;
        w.validate()?;
        Ok(out)
    }

    /// Build a natural field: free components where a label is not the
    /// image of a lower world, pushed forward elsewhere.
    pub fn natural_field(&self, mut free: impl FnMut(&ToyWorld, &str) -> CMat) -> FieldAssignment {
        let idx = self.iso_index();
        let mut order: Vec<&ToyWorld> = self.worlds.values().collect();
        order.sort_by_key(|w| (w.dim, idx.representative[&w.id] != w.id, w.id.clone()));
        let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
        for w in order {
            let mut m = BTreeMap::new();
            for l in &w.tests {
                let pushed = self.proper_morphisms().filter(|p| p.target == w.id && comps.contains_key(&p.source)).find_map(|p| {
                    p.test_push.iter().find(|(_, v)| *v == l).map(|(k, _)| p.apply(&comps[&p.source][k]))
                });
                m.insert(l.clone(), pushed.unwrap_or_else(|| free(w, l)));
            }
            comps.insert(w.id.clone(), m);
        }
        FieldAssignment::new(comps)
    }

    pub fn random_natural_field(&self, seed: u64, hermitian: bool) -> FieldAssignment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.natural_field(|w, _| {
            if hermitian {
                linalg::random_hermitian(w.dim, &mut rng)
            } else {
                linalg::ginibre(w.dim, &mut rng)
            }
        })
    }

    /// Naturality of a field via the generic checker.
    pub fn check_field(&self, phi: &FieldAssignment) -> Result<ValidationReport> {
        self.check_field_on(phi, &self.test_sets())
    }
}

/// Naturality of a state-dependent assignment `(f, ω₀) ↦ Q_M(f, ω₀)` over
/// `<D, S^op>`: `α_ψ(Q_M(f, α_ψ^* ω₀)) = Q_N(ψ_* f, ω₀)` for probe states ω₀ on N.
pub fn check_state_natural(
    s: &ToyScenario,
    tests: &TestSets,
    q: &dyn Fn(&str, &str, &CMat) -> Result<CMat>,
    extra_probes: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let mut v = Vec::new();
    for psi in s.proper_morphisms() {
        let probes = s.world(&psi.target)?.probe_states(extra_probes, seed);
        let mut worst: f64 = 0.0;
        for f in tests.get(&psi.source).into_iter().flatten() {
            let Some(pf) = psi.push(f) else { continue };
            for w0 in &probes {
                let lhs = psi.apply(&q(&psi.source, f, &psi.pullback_matrix(w0))?);
                let rhs = q(&psi.target, pf, w0)?;
                worst = worst.max(linalg::max_abs(&(lhs - &rhs)) / (1.0 + linalg::max_abs(&rhs)));
            }
        }
        if worst > 1e-10 {
            v.push(crate::category::Violation {
                law: "naturality".into(),
                witness: vec![psi.id.clone()],
                detail: format!("square for `{}` fails by {worst:e}", psi.id),
            });
        }
    }
    Ok(ValidationReport::from_violations(v))
}

/// The demo scenario: five worlds in three isomorphism classes.
pub fn demo_scenario() -> ToyScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_917);
    let worlds = vec![
        ToyWorld::new("A", 2, &["a1", "a2"]),
        ToyWorld::new("Ap", 2, &["ap1", "ap2"]),
        ToyWorld::new("B", 4, &["b1", "b2", "b3"]),
        ToyWorld::new("Bp", 4, &["bp1", "bp2", "bp3"]),
        ToyWorld::new("C", 8, &["c1", "c2", "c3", "c4"]),
    ];
    let push = |pairs: &[(&str, &str)]| pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<BTreeMap<_, _>>();
    let ua = linalg::random_unitary(2, &mut rng);
    let ub = linalg::random_unitary(4, &mut rng);
    let ue = linalg::random_unitary(4, &mut rng);
    let uh = linalg::random_unitary(8, &mut rng);
    let gens = vec![
        ToyMorphism { id: "iA".into(), source: "A".into(), target: "Ap".into(), multiplicity: 1, unitary: ua.clone(), test_push: push(&[("a1", "ap1"), ("a2", "ap2")]) },
        ToyMorphism { id: "jA".into(), source: "Ap".into(), target: "A".into(), multiplicity: 1, unitary: ua.adjoint(), test_push: push(&[("ap1", "a1"), ("ap2", "a2")]) },
        ToyMorphism { id: "iB".into(), source: "B".into(), target: "Bp".into(), multiplicity: 1, unitary: ub.clone(), test_push: push(&[("b1", "bp1"), ("b2", "bp2"), ("b3", "bp3")]) },
        ToyMorphism { id: "jB".into(), source: "Bp".into(), target: "B".into(), multiplicity: 1, unitary: ub.adjoint(), test_push: push(&[("bp1", "b1"), ("bp2", "b2"), ("bp3", "b3")]) },
        ToyMorphism { id: "e".into(), source: "A".into(), target: "B".into(), multiplicity: 2, unitary: ue, test_push: push(&[("a1", "b1"), ("a2", "b2")]) },
        ToyMorphism { id: "h".into(), source: "B".into(), target: "C".into(), multiplicity: 2, unitary: uh, test_push: push(&[("b1", "c1"), ("b2", "c2"), ("b3", "c3")]) },
    ];
    ToyScenario::from_generators(worlds, gens).expect("demo scenario is well formed")
}

/// Serializable demo scenario file.
pub fn demo_scenario_json() -> ScenarioJson {
    let s = demo_scenario();
    let generators = ["e", "h", "iA", "iB"];
    ScenarioJson {
        schema_version: SCENARIO_SCHEMA_VERSION,
        worlds: s.worlds.values().cloned().collect(),
        morphisms: generators
            .iter()
            .map(|g| {
                let m = &s.morphisms[*g];
                MorphismJson {
                    id: m.id.clone(),
                    source: m.source.clone(),
                    target: m.target.clone(),
                    multiplicity: m.multiplicity,
                    unitary: Some(m.unitary.clone()),
                    test_push: m.test_push.clone(),
                    inverse_id: if g.starts_with('i') { Some(g.replacen('i', "j", 1)) } else { None },
                }
            })
            .collect(),
        field: None,
        field_seed: Some(7),
    }
}

/// Objects of the concrete category used for naturality checks.
#[derive(Debug, Clone, PartialEq)]
pub enum ConcreteObj {
    /// Test labels of a world, as single labels (arity 1) or pairs (arity 2).
    Tests(String, usize),
    Algebra(String),
    States(String),
}

/// Morphisms of the concrete category.
#[derive(Debug, Clone)]
pub enum ConcreteMor {
    Labels { src: ConcreteObj, dst: ConcreteObj, map: BTreeMap<String, String> },
    Embed { src: ConcreteObj, dst: ConcreteObj, unitary: CMat, multiplicity: usize },
    Assign { src: ConcreteObj, dst: ConcreteObj, table: BTreeMap<String, CMat> },
    Pullback { src: ConcreteObj, dst: ConcreteObj, maps: Vec<(CMat, usize)> },
}

impl ConcreteMor {
    fn ends(&self) -> (&ConcreteObj, &ConcreteObj) {
        match self {
            ConcreteMor::Labels { src, dst, .. }
            | ConcreteMor::Embed { src, dst, .. }
            | ConcreteMor::Assign { src, dst, .. }
            | ConcreteMor::Pullback { src, dst, .. } => (src, dst),
        }
    }
}

/// Category of label sets, matrix algebras and state spaces with concrete maps.
#[derive(Debug, Clone)]
pub struct Concrete {
    dims: BTreeMap<String, usize>,
    labels: BTreeMap<String, BTreeSet<String>>,
}

impl Concrete {
    fn new(s: &ToyScenario) -> Self {
        Self::with_labels(s, &s.test_sets())
    }

    fn with_labels(s: &ToyScenario, tests: &TestSets) -> Self {
        Self { dims: s.worlds.iter().map(|(k, w)| (k.clone(), w.dim)).collect(), labels: tests.clone() }
    }

    fn pull(maps: &[(CMat, usize)], rho: &CMat) -> CMat {
        maps.iter().fold(rho.clone(), |r, (u, k)| {
            let n = r.nrows() / k;
            linalg::block_trace(&(u.adjoint() * r * u), n, *k)
        })
    }

    fn label_set(&self, o: &ConcreteObj) -> Vec<String> {
        match o {
            ConcreteObj::Tests(w, 1) => self.labels[w].iter().cloned().collect(),
            ConcreteObj::Tests(w, _) => {
                let l = &self.labels[w];
                l.iter().flat_map(|a| l.iter().map(move |b| pair_label(a, b))).collect()
            }
            _ => vec![],
        }
    }
}

pub(crate) fn pair_label(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

impl Category for Concrete {
    type Object = ConcreteObj;
    type Morphism = ConcreteMor;
    fn source(&self, m: &ConcreteMor) -> ConcreteObj {
        m.ends().0.clone()
    }
    fn target(&self, m: &ConcreteMor) -> ConcreteObj {
        m.ends().1.clone()
    }
    fn identity(&self, o: &ConcreteObj) -> ConcreteMor {
        match o {
            ConcreteObj::Tests(..) => ConcreteMor::Labels { src: o.clone(), dst: o.clone(), map: self.label_set(o).into_iter().map(|l| (l.clone(), l)).collect() },
            ConcreteObj::Algebra(w) => ConcreteMor::Embed { src: o.clone(), dst: o.clone(), unitary: linalg::identity(self.dims[w]), multiplicity: 1 },
            ConcreteObj::States(_) => ConcreteMor::Pullback { src: o.clone(), dst: o.clone(), maps: vec![] },
        }
    }
    fn compose(&self, g: &ConcreteMor, f: &ConcreteMor) -> Option<ConcreteMor> {
        if f.ends().1 != g.ends().0 {
            return None;
        }
        let (src, dst) = (f.ends().0.clone(), g.ends().1.clone());
        use ConcreteMor::*;
        Some(match (g, f) {
            (Labels { map: mg, .. }, Labels { map: mf, .. }) => {
                Labels { src, dst, map: mf.iter().map(|(k, v)| mg.get(v).map(|w| (k.clone(), w.clone()))).collect::<Option<_>>()? }
            }
            (Embed { unitary: ug, multiplicity: kg, .. }, Embed { unitary: uf, multiplicity: kf, .. }) => {
                Embed { src, dst, unitary: ug * linalg::block_repeat(uf, *kg), multiplicity: kg * kf }
            }
            (Assign { table, .. }, Labels { map, .. }) => {
                Assign { src, dst, table: map.iter().map(|(k, v)| table.get(v).map(|a| (k.clone(), a.clone()))).collect::<Option<_>>()? }
            }
            (Embed { unitary, multiplicity, .. }, Assign { table, .. }) => Assign {
                src,
                dst,
                table: table.iter().map(|(k, a)| (k.clone(), unitary * linalg::block_repeat(a, *multiplicity) * unitary.adjoint())).collect(),
            },
            (Pullback { maps: mg, .. }, Pullback { maps: mf, .. }) => Pullback { src, dst, maps: mf.iter().chain(mg.iter()).cloned().collect() },
            _ => return None,
        })
    }
    fn morphisms_equal(&self, a: &ConcreteMor, b: &ConcreteMor) -> bool {
        use ConcreteMor::*;
        if a.ends() != b.ends() {
            return false;
        }
        match (a, b) {
            (Labels { map: x, .. }, Labels { map: y, .. }) => x == y,
            (Embed { src: ConcreteObj::Algebra(w), unitary: u1, multiplicity: k1, .. }, Embed { unitary: u2, multiplicity: k2, .. }) => linalg::matrix_units(self.dims[w]).iter().all(|e| {
                let x = u1 * linalg::block_repeat(e, *k1) * u1.adjoint();
                let y = u2 * linalg::block_repeat(e, *k2) * u2.adjoint();
                linalg::max_abs(&(x - y)) < 1e-10
            }),
            (Assign { table: x, .. }, Assign { table: y, .. }) => {
                x.len() == y.len() && x.iter().all(|(k, m)| y.get(k).is_some_and(|n| linalg::max_abs(&(m - n)) < 1e-10 * (1.0 + linalg::max_abs(m))))
            }
            (Pullback { src: ConcreteObj::States(w), maps: x, .. }, Pullback { maps: y, .. }) => linalg::tomographic_pure_states(self.dims[w])
                .iter()
                .all(|r| linalg::max_abs(&(Self::pull(x, r) - Self::pull(y, r))) < 1e-10),
            _ => false,
        }
    }
}

/// Test functor `D` (arity 1) or `D × D` (arity 2).
#[derive(Debug, Clone)]
pub struct TestFunctor {
    base: FiniteCategory,
    cod: Concrete,
    morphisms: BTreeMap<String, ToyMorphism>,
    arity: usize,
}

impl TestFunctor {
    pub fn new(s: &ToyScenario, arity: usize) -> Self {
        Self::restricted(s, arity, &s.test_sets())
    }

    /// Subfunctor on the given test subsets; pushes are restricted to them.
    pub fn restricted(s: &ToyScenario, arity: usize, tests: &TestSets) -> Self {
        let morphisms = s
            .morphisms
            .iter()
            .map(|(k, m)| {
                let mut m = m.clone();
                let keep = tests.get(&m.source).cloned().unwrap_or_default();
                m.test_push.retain(|l, _| keep.contains(l));
                (k.clone(), m)
            })
            .collect();
        Self { base: s.category.clone(), cod: Concrete::with_labels(s, tests), morphisms, arity }
    }
}

impl Functor for TestFunctor {
    type Target = Concrete;
    fn base(&self) -> &FiniteCategory {
        &self.base
    }
    fn codomain(&self) -> &Concrete {
        &self.cod
    }
    fn map_object(&self, o: &str) -> Result<ConcreteObj> {
        Ok(ConcreteObj::Tests(o.into(), self.arity))
    }
    fn map_morphism(&self, m: &str) -> Result<ConcreteMor> {
        let t = self.morphisms.get(m).ok_or_else(|| Error::MalformedTable(format!("unknown morphism `{m}`")))?;
        let map = if self.arity == 1 {
            t.test_push.clone()
        } else {
            t.test_push.iter().flat_map(|(a, fa)| t.test_push.iter().map(move |(b, fb)| (pair_label(a, b), pair_label(fa, fb)))).collect()
        };
        Ok(ConcreteMor::Labels { src: ConcreteObj::Tests(t.source.clone(), self.arity), dst: ConcreteObj::Tests(t.target.clone(), self.arity), map })
    }
}

/// Algebra functor `A`.
#[derive(Debug, Clone)]
pub struct AlgebraFunctor {
    base: FiniteCategory,
    cod: Concrete,
    morphisms: BTreeMap<String, ToyMorphism>,
}

impl AlgebraFunctor {
    pub fn new(s: &ToyScenario) -> Self {
        Self { base: s.category.clone(), cod: Concrete::new(s), morphisms: s.morphisms.clone() }
    }
}

impl Functor for AlgebraFunctor {
    type Target = Concrete;
    fn base(&self) -> &FiniteCategory {
        &self.base
    }
    fn codomain(&self) -> &Concrete {
        &self.cod
    }
    fn map_object(&self, o: &str) -> Result<ConcreteObj> {
        Ok(ConcreteObj::Algebra(o.into()))
    }
    fn map_morphism(&self, m: &str) -> Result<ConcreteMor> {
        let t = self.morphisms.get(m).ok_or_else(|| Error::MalformedTable(format!("unknown morphism `{m}`")))?;
        Ok(ConcreteMor::Embed { src: ConcreteObj::Algebra(t.source.clone()), dst: ConcreteObj::Algebra(t.target.clone()), unitary: t.unitary.clone(), multiplicity: t.multiplicity })
    }
}

/// State functor `S`, contravariant into the concrete category.
#[derive(Debug, Clone)]
pub struct StateFunctor {
    base: FiniteCategory,
    cod: Concrete,
    morphisms: BTreeMap<String, ToyMorphism>,
}

impl StateFunctor {
    pub fn new(s: &ToyScenario) -> Self {
        Self { base: s.category.clone(), cod: Concrete::new(s), morphisms: s.morphisms.clone() }
    }

    /// The same data viewed as a covariant functor into the opposite category.
    pub fn op(self) -> StateFunctorOp {
        let cod = Opposite(self.cod.clone());
        StateFunctorOp { inner: self, cod }
    }
}

impl Functor for StateFunctor {
    type Target = Concrete;
    fn base(&self) -> &FiniteCategory {
        &self.base
    }
    fn codomain(&self) -> &Concrete {
        &self.cod
    }
    fn variance(&self) -> Variance {
        Variance::Contravariant
    }
    fn map_object(&self, o: &str) -> Result<ConcreteObj> {
        Ok(ConcreteObj::States(o.into()))
    }
    fn map_morphism(&self, m: &str) -> Result<ConcreteMor> {
        let t = self.morphisms.get(m).ok_or_else(|| Error::MalformedTable(format!("unknown morphism `{m}`")))?;
        Ok(ConcreteMor::Pullback { src: ConcreteObj::States(t.target.clone()), dst: ConcreteObj::States(t.source.clone()), maps: vec![(t.unitary.clone(), t.multiplicity)] })
    }
}

/// `S^op`: covariant into the opposite concrete category.
#[derive(Debug, Clone)]
pub struct StateFunctorOp {
    inner: StateFunctor,
    cod: Opposite<Concrete>,
}

impl Functor for StateFunctorOp {
    type Target = Opposite<Concrete>;
    fn base(&self) -> &FiniteCategory {
        &self.inner.base
    }
    fn codomain(&self) -> &Opposite<Concrete> {
        &self.cod
    }
    fn map_object(&self, o: &str) -> Result<ConcreteObj> {
        self.inner.map_object(o)
    }
    fn map_morphism(&self, m: &str) -> Result<ConcreteMor> {
        self.inner.map_morphism(m)
    }
}

/// `ω' = ω ∘ α_ψ`.
pub fn pullback_state(psi: &ToyMorphism, omega: &DensityState) -> Result<DensityState> {
    if omega.world != psi.target {
        return Err(Error::WorldMismatch { expected: psi.target.clone(), found: omega.world.clone() });
    }
    if omega.rho.nrows() % psi.multiplicity != 0 || psi.unitary.nrows() != omega.rho.nrows() {
        return Err(Error::WorldMismatch { expected: psi.target.clone(), found: format!("state of size {}", omega.rho.nrows()) });
    }
    Ok(DensityState { world: psi.source.clone(), rho: psi.pullback_matrix(&omega.rho) })
}

/// `ω_A(B) = ω(A* B A) / ω(A* A)`.
pub fn induced_state(omega: &DensityState, a: &CMat) -> Result<DensityState> {
    let norm = linalg::expectation(&omega.rho, &(a.adjoint() * a)).re;
    if norm <= tol::ALGEBRAIC {
        return Err(Error::NullOperation(norm));
    }
    let rho = a * &omega.rho * a.adjoint() / c(norm, 0.0);
    Ok(DensityState { world: omega.world.clone(), rho: linalg::hermitian_part(&rho) })
}

/// Convex combination of induced states reproducing a target state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FellWitness {
    pub weights: Vec<f64>,
    #[serde(with = "serde_cmat::vec")]
    pub operators: Vec<CMat>,
    pub max_error: f64,
}

/// Finite rank construction: for `target = Σ p_r |v_r><v_r|` take
/// `A_r = sqrt(p_r / <v_r|σ|v_r>) |v_r><v_r|`, whose induced state is `|v_r>`.
pub fn fell_density_witness(world: &ToyWorld, faithful: &DensityState, target: &DensityState, eps: f64) -> Result<FellWitness> {
    for s in [faithful, target] {
        if s.world != world.id {
            return Err(Error::WorldMismatch { expected: world.id.clone(), found: s.world.clone() });
        }
    }
    let lmin = linalg::lambda_min(&faithful.rho);
    if lmin <= tol::FAITHFUL {
        return Err(Error::NotFaithful(lmin));
    }
    let n = world.dim;
    let (weights, operators) = if linalg::max_abs(&(&faithful.rho - &target.rho)) < tol::ALGEBRAIC {
        (vec![1.0], vec![linalg::identity(n)])
    } else {
        let (vals, vecs) = linalg::herm_eig(&target.rho);
        let mut w = Vec::new();
        let mut ops = Vec::new();
        for (r, p) in vals.iter().enumerate().rev() {
            if *p <= tol::ALGEBRAIC {
                continue;
            }
            let v = vecs.column(r).into_owned();
            let proj = &v * v.adjoint();
            let s = linalg::expectation(&faithful.rho, &proj).re;
            ops.push(proj * c((p / s).sqrt(), 0.0));
            w.push(*p);
        }
        let total: f64 = w.iter().sum();
        (w.iter().map(|x| x / total).collect(), ops)
    };
    let mut approx = linalg::zeros(n);
    for (l, a) in weights.iter().zip(&operators) {
        approx += induced_state(faithful, a)?.rho * c(*l, 0.0);
    }
    let max_error = linalg::max_abs(&(approx - &target.rho));
    if max_error > eps.max(1e-10) {
        return Err(Error::InvalidState(format!("reconstruction error {max_error:e} exceeds {eps:e}")));
    }
    Ok(FellWitness { weights, operators, max_error })
}

/// Outcome of a local physical equivalence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpeReport {
    pub morphism: String,
    pub pass: bool,
    pub verdict: Verdict,
    pub max_defect: f64,
    pub probes: usize,
    #[serde(default, with = "serde_cmat::option", skip_serializing_if = "Option::is_none")]
    pub witness: Option<CMat>,
}

fn defect(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs(&(a - b))
}

/// Alternating projection between `{X : pullback(X) = ω}` and the PSD cone.
fn extend_all(psi: &ToyMorphism, omega: &CMat) -> (Option<CMat>, f64) {
    let nt = psi.unitary.nrows();
    let k = psi.multiplicity as f64;
    let mut x = linalg::identity(nt) / c(nt as f64, 0.0);
    let mut best = f64::INFINITY;
    for _ in 0..tol::PROJECTION_ITER_CAP {
        let r = psi.pullback_matrix(&x) - omega;
        x -= psi.apply(&r) / c(k, 0.0);
        let y = linalg::psd_project(&x);
        let d = defect(&psi.pullback_matrix(&y), omega);
        best = best.min(d);
        if d < tol::OPTIMIZATION * 0.1 {
            return (Some(y), d);
        }
        x = y;
    }
    (None, best)
}

/// Projected gradient over simplex weights of hull vertices.
fn extend_hull(psi: &ToyMorphism, omega: &CMat, hull: &[CMat]) -> (Verdict, f64) {
    let pulled: Vec<CMat> = hull.iter().map(|s| psi.pullback_matrix(s)).collect();
    let m = pulled.len();
    let gram: Vec<Vec<f64>> = pulled.iter().map(|a| pulled.iter().map(|b| linalg::expectation(a, b).re).collect()).collect();
    let lip = gram.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(1e-12, f64::max);
    let lin: Vec<f64> = pulled.iter().map(|a| linalg::expectation(a, omega).re).collect();
    let mut w = vec![1.0 / m as f64; m];
    let mut settled = false;
    for _ in 0..tol::PROJECTION_ITER_CAP {
        let grad: Vec<f64> = (0..m).map(|i| (0..m).map(|j| gram[i][j] * w[j]).sum::<f64>() - lin[i]).collect();
        let step: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - g / lip).collect();
        let nw = project_simplex(&step);
        let change = nw.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = nw;
        if change < 1e-15 {
            settled = true;
            break;
        }
    }
    let mut approx = linalg::zeros(omega.nrows());
    for (x, p) in w.iter().zip(&pulled) {
        approx += p * c(*x, 0.0);
    }
    let d = defect(&approx, omega);
    let verdict = if d < tol::OPTIMIZATION {
        Verdict::Pass
    } else if settled {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    (verdict, d)
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Local physical equivalence of `psi` within `scenario`.
pub fn lpe_check(scenario: &ToyScenario, psi: &ToyMorphism) -> Result<LpeReport> {
    let src = scenario.world(&psi.source)?;
    let dst = scenario.world(&psi.target)?;
    let probes = src.probe_states(4, 0x5eed);
    let mut max_defect: f64 = 0.0;
    let mut verdict = Verdict::Pass;
    let mut witness = None;
    for omega in &probes {
        let (v, d) = match &dst.state_space {
            StateSpace::All => match extend_all(psi, omega) {
                (Some(_), d) => (Verdict::Pass, d),
                (None, d) => (Verdict::Inconclusive, d),
            },
            StateSpace::Hull(h) => extend_hull(psi, omega, h),
        };
        max_defect = max_defect.max(d);
        match v {
            Verdict::Fail => {
                verdict = Verdict::Fail;
                witness.get_or_insert_with(|| omega.clone());
            }
            Verdict::Inconclusive if verdict == Verdict::Pass => verdict = Verdict::Inconclusive,
            _ => {}
        }
    }
    Ok(LpeReport { morphism: psi.id.clone(), pass: verdict == Verdict::Pass, verdict, max_defect, probes: probes.len(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_closure_and_classes() {
        let s = demo_scenario();
        assert!(s.category.validate().pass);
        let idx = s.iso_index();
        assert_eq!(idx.representatives(), vec!["A".to_string(), "B".into(), "C".into()]);
    }

    #[test]
    fn demo_field_is_natural() {
        let s = demo_scenario();
        let phi = s.random_natural_field(3, true);
        assert!(phi.hermitian);
        let r = s.check_field(&phi).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn negated_component_breaks_naturality() {
        let s = demo_scenario();
        let mut phi = s.random_natural_field(3, true);
        let a = phi.get("A", "a1").unwrap().clone();
        phi.set("A", "a1", -a);
        let r = s.check_field(&phi).unwrap();
        assert!(!r.pass);
        let w = &r.violations[0].witness[0];
        assert_eq!(s.morphisms[w].source, "A");
        assert_ne!(s.morphisms[w].target, "A");
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let q = project_simplex(&[2.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0]);
    }
}
