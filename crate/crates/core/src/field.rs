//! Numerical ranges, spectra and the algebra of fields.

use crate::category::{check_natural, NatTransData, ValidationReport};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::tol;
use crate::worlds::{pair_label, AlgebraFunctor, ConcreteMor, ConcreteObj, FieldAssignment, StateSpace, TestFunctor, TestSets, ToyMorphism, ToyScenario, ToyWorld};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Closed convex polygon in the complex plane, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexRegion {
    pub vertices: Vec<Complex64>,
    pub exact: bool,
    /// Angular resolution of the sweep, when one was used.
    pub angles: Option<usize>,
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Monotone-chain hull; collinear and duplicate points removed.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup_by(|a, b| (*a - *b).norm() <= 1e-14 * (1.0 + a.norm()));
    if p.len() <= 2 {
        return p;
    }
    let scale = p.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = 1e-13 * scale * scale;
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &z in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], z) <= eps {
                hull.pop();
            }
            hull.push(z);
        }
        hull.pop();
    }
    if hull.len() == 2 && (hull[0] - hull[1]).norm() <= 1e-14 * (1.0 + scale) {
        hull.pop();
    }
    hull
}

impl ConvexRegion {
    pub fn from_points(points: &[Complex64], exact: bool, angles: Option<usize>) -> Self {
        Self { vertices: convex_hull(points), exact, angles }
    }

    pub fn point(z: Complex64) -> Self {
        Self { vertices: vec![z], exact: true, angles: None }
    }

    /// Real interval `[lo, hi]` when the region lies on the real axis.
    pub fn real_interval(&self) -> Option<(f64, f64)> {
        let scale = self.vertices.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if self.vertices.iter().all(|z| z.im.abs() <= 1e-12 * scale) {
            let lo = self.vertices.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let hi = self.vertices.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            Some((lo, hi))
        } else {
            None
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// Euclidean distance from `z` to the region.
    pub fn distance(&self, z: Complex64) -> f64 {
        let v = &self.vertices;
        match v.len() {
            0 => f64::INFINITY,
            1 => (z - v[0]).norm(),
            2 => seg_dist(z, v[0], v[1]),
            n => {
                let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], z) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n).map(|i| seg_dist(z, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn union_hull(regions: &[ConvexRegion]) -> ConvexRegion {
        let pts: Vec<Complex64> = regions.iter().flat_map(|r| r.vertices.iter().cloned()).collect();
        ConvexRegion::from_points(&pts, regions.iter().all(|r| r.exact), regions.iter().filter_map(|r| r.angles).max())
    }

    /// Vertex list as CSV `re,im`, closing the chain.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for z in self.vertices.iter().chain(self.vertices.first()) {
            s.push_str(&format!("{:.17e},{:.17e}\n", z.re, z.im));
        }
        s
    }
}

fn seg_dist(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Hausdorff distance between two convex polygons.
pub fn hausdorff(a: &ConvexRegion, b: &ConvexRegion) -> f64 {
    let one = |p: &ConvexRegion, q: &ConvexRegion| p.vertices.iter().map(|z| q.distance(*z)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

/// Numerical range by supporting-line sweep over `angles` directions.
pub fn numerical_range_sweep(a: &CMat, angles: usize) -> ConvexRegion {
    let n = a.nrows();
    if n == 1 {
        return ConvexRegion::point(a[(0, 0)]);
    }
    let lines: Vec<(f64, f64)> = (0..angles)
        .into_par_iter()
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / angles as f64;
            let e = Complex64::from_polar(1.0, th);
            let h = (a * e + a.adjoint() * e.conj()) * c(0.5, 0.0);
            (th, linalg::lambda_max(&h))
        })
        .collect();
    let mut pts = Vec::with_capacity(angles);
    for k in 0..angles {
        let (t1, l1) = lines[k];
        let (t2, l2) = lines[(k + 1) % angles];
        // x cos t − y sin t = l
        let det = -t1.cos() * t2.sin() + t1.sin() * t2.cos();
        let x = (-l1 * t2.sin() + l2 * t1.sin()) / det;
        let y = (t1.cos() * l2 - t2.cos() * l1) / det;
        pts.push(Complex64::new(x, y));
    }
    let hermitian = linalg::hermitian_defect(a) <= tol::ALGEBRAIC * (1.0 + linalg::max_abs(a));
    let scalar = linalg::max_abs(&(a - linalg::identity(n) * a.trace() / c(n as f64, 0.0))) <= tol::ALGEBRAIC * (1.0 + linalg::max_abs(a));
    if scalar {
        return ConvexRegion::point(a.trace() / c(n as f64, 0.0));
    }
    if hermitian {
        let (lo, hi) = (linalg::lambda_min(a), linalg::lambda_max(a));
        return ConvexRegion { vertices: vec![Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)], exact: true, angles: Some(angles) };
    }
    ConvexRegion::from_points(&pts, false, Some(angles))
}

/// `N(A) = {ω(A) : ω ∈ S}`.
pub fn numerical_range(a: &CMat, space: &StateSpace) -> ConvexRegion {
    match space {
        StateSpace::All => numerical_range_sweep(a, tol::SWEEP_ANGLES),
        StateSpace::Hull(v) => ConvexRegion::from_points(&v.iter().map(|r| linalg::expectation(r, a)).collect::<Vec<_>>(), true, None),
    }
}

/// Union of spectra as points and real intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    pub points: Vec<Complex64>,
    pub intervals: Vec<(f64, f64)>,
}

impl SpectrumSet {
    pub fn from_points(mut pts: Vec<Complex64>) -> Self {
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut out: Vec<Complex64> = Vec::new();
        for z in pts {
            if !out.iter().any(|w| (w - z).norm() <= 1e-10 * (1.0 + z.norm())) {
                out.push(z);
            }
        }
        Self { points: out, intervals: vec![] }
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        let p = self.points.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
        let i = self
            .intervals
            .iter()
            .map(|(a, b)| if z.re < *a { (z - a).norm() } else if z.re > *b { (z - b).norm() } else { z.im.abs() })
            .fold(f64::INFINITY, f64::min);
        p.min(i)
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.points.iter().map(|z| z.re).collect()
    }

    pub fn hull(&self) -> ConvexRegion {
        let mut pts = self.points.clone();
        for (a, b) in &self.intervals {
            pts.push(Complex64::new(*a, 0.0));
            pts.push(Complex64::new(*b, 0.0));
        }
        ConvexRegion::from_points(&pts, true, None)
    }

    pub fn is_conjugation_closed(&self, tol: f64) -> bool {
        self.points.iter().all(|z| self.distance(z.conj()) <= tol)
    }
}

/// Eigenvalues of an arbitrary square complex matrix.
pub fn eigenvalues(a: &CMat) -> Vec<Complex64> {
    if linalg::hermitian_defect(a) <= tol::ALGEBRAIC * (1.0 + linalg::max_abs(a)) {
        return linalg::herm_eig(a).0.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    }
    let (_, t) = nalgebra::Schur::new(a.clone()).unpack();
    t.diagonal().iter().cloned().collect()
}

/// Unitary diagonalisation `A = V diag(λ) V*` of a normal matrix.
pub fn normal_eig(a: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    let d = linalg::normal_defect(a);
    if d > 1e-10 * (1.0 + linalg::max_abs(a).powi(2)) {
        return Err(Error::NonNormal(d));
    }
    if linalg::hermitian_defect(a) <= tol::ALGEBRAIC * (1.0 + linalg::max_abs(a)) {
        let (v, u) = linalg::herm_eig(a);
        return Ok((v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(), u));
    }
    let (q, t) = nalgebra::Schur::new(a.clone()).unpack();
    Ok((t.diagonal().iter().cloned().collect(), q))
}

/// A field restricted to test subsets, with its sup-norm over representatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbstractField {
    pub assignment: FieldAssignment,
    pub tests: TestSets,
    pub norm: f64,
}

impl AbstractField {
    pub fn new(s: &ToyScenario, assignment: FieldAssignment, tests: TestSets) -> Result<Self> {
        for (w, ls) in &tests {
            for l in ls {
                if assignment.get(w, l).is_none() {
                    return Err(Error::ComponentMissing(format!("{w}/{l}")));
                }
            }
        }
        let norm = field_norm_over(&assignment, &tests, &s.iso_index().representatives());
        Ok(Self { assignment, tests, norm })
    }

    pub fn full(s: &ToyScenario, assignment: FieldAssignment) -> Result<Self> {
        let tests = s.test_sets();
        Self::new(s, assignment, tests)
    }

    pub fn get(&self, w: &str, l: &str) -> &CMat {
        self.assignment.get(w, l).expect("validated on construction")
    }

    fn components(&self) -> impl Iterator<Item = (&String, &String, &CMat)> {
        self.tests.iter().flat_map(move |(w, ls)| ls.iter().map(move |l| (w, l, self.get(w, l))))
    }
}

fn field_norm_over(phi: &FieldAssignment, tests: &TestSets, worlds: &[String]) -> f64 {
    worlds
        .iter()
        .filter_map(|w| tests.get(w).map(|ls| (w, ls)))
        .flat_map(|(w, ls)| ls.iter().map(move |l| linalg::op_norm(phi.get(w, l).expect("present"))))
        .fold(0.0, f64::max)
}

/// Sup-norm over canonical representatives.
pub fn field_norm(s: &ToyScenario, phi: &AbstractField) -> f64 {
    field_norm_over(&phi.assignment, &phi.tests, &s.iso_index().representatives())
}

/// Sup-norm over every world.
pub fn field_norm_all(phi: &AbstractField) -> f64 {
    phi.components().map(|(_, _, a)| linalg::op_norm(a)).fold(0.0, f64::max)
}

fn combine(s: &ToyScenario, a: &AbstractField, b: &AbstractField, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<AbstractField> {
    if a.tests != b.tests {
        return Err(Error::TestSetMismatch("fields are defined on different test sets".into()));
    }
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    for (w, l, x) in a.components() {
        comps.entry(w.clone()).or_default().insert(l.clone(), f(x, b.get(w, l)));
    }
    AbstractField::new(s, FieldAssignment::new(comps), a.tests.clone())
}

fn map_field(s: &ToyScenario, a: &AbstractField, f: impl Fn(&str, &CMat) -> Result<CMat>) -> Result<AbstractField> {
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    for (w, l, x) in a.components() {
        comps.entry(w.clone()).or_default().insert(l.clone(), f(w, x)?);
    }
    AbstractField::new(s, FieldAssignment::new(comps), a.tests.clone())
}

pub fn field_add(s: &ToyScenario, a: &AbstractField, b: &AbstractField) -> Result<AbstractField> {
    combine(s, a, b, |x, y| x + y)
}

pub fn field_mul(s: &ToyScenario, a: &AbstractField, b: &AbstractField) -> Result<AbstractField> {
    combine(s, a, b, |x, y| x * y)
}

pub fn field_scale(s: &ToyScenario, a: &AbstractField, z: Complex64) -> Result<AbstractField> {
    map_field(s, a, |_, x| Ok(x * z))
}

pub fn field_star(s: &ToyScenario, a: &AbstractField) -> Result<AbstractField> {
    map_field(s, a, |_, x| Ok(x.adjoint()))
}

/// Unit field on the given test sets.
pub fn field_unit(s: &ToyScenario, tests: &TestSets) -> Result<AbstractField> {
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    for (w, ls) in tests {
        let n = s.world(w)?.dim;
        for l in ls {
            comps.entry(w.clone()).or_default().insert(l.clone(), linalg::identity(n));
        }
    }
    AbstractField::new(s, FieldAssignment::new(comps), tests.clone())
}

pub fn field_zero(s: &ToyScenario, tests: &TestSets) -> Result<AbstractField> {
    let u = field_unit(s, tests)?;
    field_scale(s, &u, c(0.0, 0.0))
}

/// Naturality of an abstract field.
pub fn check_field_natural(s: &ToyScenario, phi: &AbstractField) -> Result<ValidationReport> {
    let mut r = s.check_subfunctor(&phi.tests);
    if r.pass {
        r = s.check_field_on(&phi.assignment, &phi.tests)?;
    }
    Ok(r)
}

/// `ν(Φ)`: hull of the numerical ranges of all components on the given worlds.
pub fn nu_field_over(s: &ToyScenario, phi: &AbstractField, worlds: &[String]) -> Result<ConvexRegion> {
    let mut regions = Vec::new();
    for w in worlds {
        let world = s.world(w)?;
        for l in phi.tests.get(w).into_iter().flatten() {
            regions.push(numerical_range(phi.get(w, l), &world.state_space));
        }
    }
    Ok(ConvexRegion::union_hull(&regions))
}

/// `ν(Φ)` over canonical representatives.
pub fn nu_field(s: &ToyScenario, phi: &AbstractField) -> Result<ConvexRegion> {
    nu_field_over(s, phi, &s.iso_index().representatives())
}

/// `σ(Φ)`: union of component spectra over canonical representatives.
pub fn sigma_field(s: &ToyScenario, phi: &AbstractField) -> SpectrumSet {
    sigma_field_over(phi, &s.iso_index().representatives())
}

pub fn sigma_field_over(phi: &AbstractField, worlds: &[String]) -> SpectrumSet {
    let mut pts = Vec::new();
    for w in worlds {
        for l in phi.tests.get(w).into_iter().flatten() {
            pts.extend(eigenvalues(phi.get(w, l)));
        }
    }
    SpectrumSet::from_points(pts)
}

/// `sup_{M,f} ‖(Φ_M(f) − λ)^{-1}‖`, `None` when some resolvent does not exist.
pub fn resolvent_bound(phi: &AbstractField, lambda: Complex64) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for (_, _, a) in phi.components() {
        let n = a.nrows();
        let sv = (a - linalg::identity(n) * lambda).singular_values();
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin <= 1e-13 * (1.0 + linalg::max_abs(a)) {
            return None;
        }
        worst = worst.max(1.0 / smin);
    }
    Some(worst)
}

/// Continuous functional calculus on a field with normal components.
pub fn functional_calculus(s: &ToyScenario, phi: &AbstractField, f: &(dyn Fn(Complex64) -> Complex64 + Sync)) -> Result<AbstractField> {
    map_field(s, phi, |_, a| {
        let (vals, v) = normal_eig(a)?;
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|z| f(*z))));
        Ok(&v * d * v.adjoint())
    })
}

/// Largest distance between `σ(φ(Φ))` and `φ(σ(Φ))`.
pub fn spectral_mapping_defect(s: &ToyScenario, phi: &AbstractField, image: &AbstractField, f: &dyn Fn(Complex64) -> Complex64) -> f64 {
    let lhs = sigma_field(s, image);
    let rhs = SpectrumSet::from_points(sigma_field(s, phi).points.iter().map(|z| f(*z)).collect());
    let a = lhs.points.iter().map(|z| rhs.distance(*z)).fold(0.0, f64::max);
    let b = rhs.points.iter().map(|z| lhs.distance(*z)).fold(0.0, f64::max);
    a.max(b)
}

/// `(f, g) ↦ Φ_M(f) Ψ_M(g)` keyed by pair labels.
pub fn bilocal_product(phi: &AbstractField, psi: &AbstractField) -> Result<FieldAssignment> {
    if phi.tests != psi.tests {
        return Err(Error::TestSetMismatch("bilocal factors use different test sets".into()));
    }
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    for (w, ls) in &phi.tests {
        let m = comps.entry(w.clone()).or_default();
        for f in ls {
            for g in ls {
                m.insert(pair_label(f, g), phi.get(w, f) * psi.get(w, g));
            }
        }
    }
    Ok(FieldAssignment::new(comps))
}

/// Pair label `(f,g)`.
pub fn bilocal_label(f: &str, g: &str) -> String {
    pair_label(f, g)
}

/// Naturality of a bilocal assignment over the pairing `<D, D>`.
pub fn check_bilocal_natural(s: &ToyScenario, b: &FieldAssignment) -> Result<ValidationReport> {
    let t = NatTransData {
        source: TestFunctor::new(s, 2),
        target: AlgebraFunctor::new(s),
        components: s
            .worlds
            .keys()
            .map(|w| {
                let table = b.world(w).map(|(k, v)| (k.clone(), v.clone())).collect();
                (w.clone(), ConcreteMor::Assign { src: ConcreteObj::Tests(w.clone(), 2), dst: ConcreteObj::Algebra(w.clone()), table })
            })
            .collect(),
    };
    check_natural(&t)
}

/// Per-world isomorphism data `A ↦ V A V*` and label bijection.
#[derive(Debug, Clone)]
pub struct WorldIso {
    pub unitary: CMat,
    pub labels: BTreeMap<String, String>,
}

/// Transport of a field along per-world isomorphisms; returns the transported
/// scenario and field `(ιΦ)_M = α_M ∘ Φ_M ∘ δ_M^{-1}`.
pub fn iota_transport(s: &ToyScenario, phi: &AbstractField, isos: &BTreeMap<String, WorldIso>) -> Result<(ToyScenario, AbstractField)> {
    for (w, world) in &s.worlds {
        let iso = isos.get(w).ok_or_else(|| Error::NonIsomorphism(format!("no isomorphism for `{w}`")))?;
        if iso.unitary.nrows() != world.dim || linalg::unitary_defect(&iso.unitary) > 1e-10 {
            return Err(Error::NonIsomorphism(format!("algebra map for `{w}` is not a *-isomorphism")));
        }
        let dom: BTreeSet<&String> = iso.labels.keys().collect();
        let img: BTreeSet<&String> = iso.labels.values().collect();
        if dom != world.tests.iter().collect() || img.len() != dom.len() {
            return Err(Error::NonIsomorphism(format!("label map for `{w}` is not a bijection")));
        }
    }
    let worlds: Vec<ToyWorld> = s
        .worlds
        .values()
        .map(|w| {
            let iso = &isos[&w.id];
            let conj = |r: &CMat| &iso.unitary * r * iso.unitary.adjoint();
            ToyWorld {
                id: w.id.clone(),
                dim: w.dim,
                tests: w.tests.iter().map(|l| iso.labels[l].clone()).collect(),
                state_space: match &w.state_space {
                    StateSpace::All => StateSpace::All,
                    StateSpace::Hull(v) => StateSpace::Hull(v.iter().map(conj).collect()),
                },
            }
        })
        .collect();
    let gens: Vec<ToyMorphism> = s
        .proper_morphisms()
        .filter(|m| !m.id.contains('∘'))
        .map(|m| {
            let (vs, vt) = (&isos[&m.source], &isos[&m.target]);
            ToyMorphism {
                id: m.id.clone(),
                source: m.source.clone(),
                target: m.target.clone(),
                multiplicity: m.multiplicity,
                unitary: &vt.unitary * &m.unitary * linalg::block_repeat(&vs.unitary.adjoint(), m.multiplicity),
                test_push: m.test_push.iter().map(|(k, v)| (vs.labels[k].clone(), vt.labels[v].clone())).collect(),
            }
        })
        .collect();
    let t = ToyScenario::from_generators(worlds, gens)?;
    let mut comps: BTreeMap<String, BTreeMap<String, CMat>> = BTreeMap::new();
    let mut tests: TestSets = BTreeMap::new();
    for (w, ls) in &phi.tests {
        let iso = &isos[w];
        for l in ls {
            let nl = iso.labels[l].clone();
            comps.entry(w.clone()).or_default().insert(nl.clone(), &iso.unitary * phi.get(w, l) * iso.unitary.adjoint());
            tests.entry(w.clone()).or_default().insert(nl);
        }
    }
    let field = AbstractField::new(&t, FieldAssignment::new(comps), tests)?;
    Ok((t, field))
}

/// Inverse of a family of world isomorphisms.
pub fn invert_isos(isos: &BTreeMap<String, WorldIso>) -> BTreeMap<String, WorldIso> {
    isos.iter()
        .map(|(w, i)| (w.clone(), WorldIso { unitary: i.unitary.adjoint(), labels: i.labels.iter().map(|(k, v)| (v.clone(), k.clone())).collect() }))
        .collect()
}

/// If a faithful state attains the minimum expectation of `a`, then `a` is
/// that minimum times the identity. Returns `(attained, scalar)`.
pub fn separating_state_check(a: &CMat, rho: &CMat, tol: f64) -> Result<(bool, bool)> {
    let lmin = linalg::lambda_min(rho);
    if lmin <= tol::FAITHFUL {
        return Err(Error::NotFaithful(lmin));
    }
    let nu0 = linalg::lambda_min(a);
    let attained = (linalg::expectation(rho, a).re - nu0).abs() <= tol;
    let scalar = linalg::max_abs(&(a - linalg::identity(a.nrows()) * c(nu0, 0.0))) <= tol.max(1e-10);
    Ok((attained, scalar))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square() {
        let p = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5), c(1.0, 0.5)];
        let h = convex_hull(&p);
        assert_eq!(h.len(), 4);
        let r = ConvexRegion { vertices: h, exact: true, angles: None };
        assert_eq!(r.distance(c(0.5, 0.5)), 0.0);
        assert!((r.distance(c(2.0, 0.5)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jordan_block_is_a_disk() {
        let mut a = linalg::zeros(2);
        a[(0, 1)] = c(1.0, 0.0);
        let r = numerical_range_sweep(&a, 720);
        for z in &r.vertices {
            assert!((z.norm() - 0.5).abs() < 1e-5);
        }
    }

    #[test]
    fn schur_eigenvalues() {
        let mut a = linalg::zeros(2);
        a[(0, 0)] = c(1.0, 1.0);
        a[(0, 1)] = c(3.0, 0.0);
        a[(1, 1)] = c(-2.0, 0.0);
        let mut e = eigenvalues(&a);
        e.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((e[0] - c(-2.0, 0.0)).norm() < 1e-12 && (e[1] - c(1.0, 1.0)).norm() < 1e-12);
    }
}
