//! Finite categories, functors and natural transformations as explicit data,
//! with checkers for identity, associativity, functoriality and naturality.
//!
//! Violations are reported for the first witness in lexicographic order of
//! identifiers, so reports are reproducible.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

/// Abstract category interface used by the generic checkers.
pub trait Category {
    type Object: Clone + PartialEq + Debug;
    type Morphism: Clone + Debug;
    fn source(&self, m: &Self::Morphism) -> Self::Object;
    fn target(&self, m: &Self::Morphism) -> Self::Object;
    fn identity(&self, o: &Self::Object) -> Self::Morphism;
    /// `g ∘ f`, or `None` when the pair is not composable.
    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Option<Self::Morphism>;
    fn morphisms_equal(&self, a: &Self::Morphism, b: &Self::Morphism) -> bool;
}

/// One morphism entry of a finite category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismSpec {
    pub id: String,
    pub src: String,
    pub dst: String,
}

/// A violated law with the identifiers witnessing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub law: String,
    pub witness: Vec<String>,
    pub detail: String,
}

/// Outcome of a law check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self { pass: violations.is_empty(), violations }
    }

    pub fn first_witness(&self) -> Option<&[String]> {
        self.violations.first().map(|v| v.witness.as_slice())
    }
}

fn violation(law: &str, witness: &[&str], detail: impl Into<String>) -> Violation {
    Violation { law: law.into(), witness: witness.iter().map(|s| s.to_string()).collect(), detail: detail.into() }
}

/// A finite category given by explicit tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    morphisms: BTreeMap<String, MorphismSpec>,
    compose: BTreeMap<(String, String), String>,
    identities: BTreeMap<String, String>,
}

/// JSON layout of a category description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryJson {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismSpec>,
    pub compose: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<BTreeMap<String, String>>,
}

impl FiniteCategory {
    /// Build from tables. Every referenced identifier must exist and each
    /// composition entry must respect endpoints; law checks are separate.
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<MorphismSpec>,
        compose: Vec<(String, String, String)>,
        identities: BTreeMap<String, String>,
    ) -> Result<Self> {
        let obj_set: BTreeSet<&String> = objects.iter().collect();
        if obj_set.len() != objects.len() {
            return Err(Error::MalformedTable("duplicate object identifier".into()));
        }
        let mut mors = BTreeMap::new();
        for m in morphisms {
            if !obj_set.contains(&m.src) || !obj_set.contains(&m.dst) {
                return Err(Error::MalformedTable(format!("morphism `{}` has unknown endpoint", m.id)));
            }
            if mors.insert(m.id.clone(), m.clone()).is_some() {
                return Err(Error::MalformedTable(format!("duplicate morphism `{}`", m.id)));
            }
        }
        let mut table = BTreeMap::new();
        for (g, f, gf) in compose {
            let (mg, mf, mgf) = match (mors.get(&g), mors.get(&f), mors.get(&gf)) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(Error::MalformedTable(format!("composition entry ({g}, {f}, {gf}) names an unknown morphism"))),
            };
            if mf.dst != mg.src || mgf.src != mf.src || mgf.dst != mg.dst {
                return Err(Error::MalformedTable(format!("composition entry ({g}, {f}, {gf}) has inconsistent endpoints")));
            }
            table.insert((g, f), gf);
        }
        for o in &objects {
            let id = identities.get(o).ok_or_else(|| Error::MalformedTable(format!("object `{o}` has no identity")))?;
            let m = mors.get(id).ok_or_else(|| Error::MalformedTable(format!("identity `{id}` is not a morphism")))?;
            if &m.src != o || &m.dst != o {
                return Err(Error::MalformedTable(format!("identity `{id}` is not an endomorphism of `{o}`")));
            }
        }
        Ok(Self { objects, morphisms: mors, compose: table, identities })
    }

    /// Free category on objects and non-identity generators whose only
    /// composites are with identities. Suitable when no two non-identity
    /// arrows are composable.
    pub fn from_generators(objects: &[&str], arrows: &[(&str, &str, &str)]) -> Result<Self> {
        let mut morphisms = Vec::new();
        let mut ids = BTreeMap::new();
        let mut compose = Vec::new();
        for o in objects {
            let id = format!("id_{o}");
            morphisms.push(MorphismSpec { id: id.clone(), src: o.to_string(), dst: o.to_string() });
            compose.push((id.clone(), id.clone(), id.clone()));
            ids.insert(o.to_string(), id);
        }
        for (id, s, d) in arrows {
            morphisms.push(MorphismSpec { id: id.to_string(), src: s.to_string(), dst: d.to_string() });
            compose.push((format!("id_{d}"), id.to_string(), id.to_string()));
            compose.push((id.to_string(), format!("id_{s}"), id.to_string()));
        }
        Self::new(objects.iter().map(|s| s.to_string()).collect(), morphisms, compose, ids)
    }

    pub fn from_json(j: &CategoryJson) -> Result<Self> {
        let compose: Vec<_> = j.compose.iter().map(|[g, f, gf]| (g.clone(), f.clone(), gf.clone())).collect();
        let identities = match &j.identities {
            Some(i) => i.clone(),
            None => infer_identities(&j.objects, &j.morphisms, &compose)?,
        };
        Self::new(j.objects.clone(), j.morphisms.clone(), compose, identities)
    }

    pub fn to_json(&self) -> CategoryJson {
        CategoryJson {
            objects: self.objects.clone(),
            morphisms: self.morphisms.values().cloned().collect(),
            compose: self.compose.iter().map(|((g, f), gf)| [g.clone(), f.clone(), gf.clone()]).collect(),
            identities: Some(self.identities.clone()),
        }
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    /// Objects in lexicographic order.
    pub fn sorted_objects(&self) -> Vec<String> {
        let mut o = self.objects.clone();
        o.sort();
        o
    }

    /// Morphisms in lexicographic order of identifiers.
    pub fn morphisms(&self) -> impl Iterator<Item = &MorphismSpec> {
        self.morphisms.values()
    }

    pub fn morphism(&self, id: &str) -> Option<&MorphismSpec> {
        self.morphisms.get(id)
    }

    pub fn identity_of(&self, o: &str) -> Option<&str> {
        self.identities.get(o).map(|s| s.as_str())
    }

    pub fn has_object(&self, o: &str) -> bool {
        self.identities.contains_key(o)
    }

    pub fn compose_ids(&self, g: &str, f: &str) -> Option<&str> {
        self.compose.get(&(g.to_string(), f.to_string())).map(|s| s.as_str())
    }

    pub fn hom(&self, a: &str, b: &str) -> Vec<&MorphismSpec> {
        self.morphisms.values().filter(|m| m.src == a && m.dst == b).collect()
    }

    /// Exhaustive check of composability, identity and associativity laws.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let ms: Vec<&MorphismSpec> = self.morphisms.values().collect();
        for g in &ms {
            for f in &ms {
                let defined = self.compose.contains_key(&(g.id.clone(), f.id.clone()));
                let composable = f.dst == g.src;
                if defined != composable {
                    v.push(violation(
                        "composition-domain",
                        &[&g.id, &f.id],
                        if composable { "composable pair missing from table" } else { "non-composable pair in table" },
                    ));
                }
            }
        }
        for f in &ms {
            let ids = &self.identities[&f.dst];
            if self.compose_ids(ids, &f.id) != Some(f.id.as_str()) {
                v.push(violation("left-identity", &[ids, &f.id], "id ∘ f != f"));
            }
            let ids = &self.identities[&f.src];
            if self.compose_ids(&f.id, ids) != Some(f.id.as_str()) {
                v.push(violation("right-identity", &[&f.id, ids], "f ∘ id != f"));
            }
        }
        for h in &ms {
            for g in ms.iter().filter(|g| g.dst == h.src) {
                for f in ms.iter().filter(|f| f.dst == g.src) {
                    let hg = self.compose_ids(&h.id, &g.id);
                    let gf = self.compose_ids(&g.id, &f.id);
                    let left = hg.and_then(|hg| self.compose_ids(hg, &f.id));
                    let right = gf.and_then(|gf| self.compose_ids(&h.id, gf));
                    if left.is_none() || left != right {
                        v.push(violation("associativity", &[&h.id, &g.id, &f.id], format!("{left:?} != {right:?}")));
                    }
                }
            }
        }
        ValidationReport::from_violations(v)
    }

    /// Morphism `f` is an isomorphism with inverse `g`.
    pub fn is_inverse_pair(&self, f: &str, g: &str) -> bool {
        let (Some(mf), Some(mg)) = (self.morphism(f), self.morphism(g)) else { return false };
        if mf.src != mg.dst || mf.dst != mg.src {
            return false;
        }
        self.compose_ids(g, f) == self.identity_of(&mf.src) && self.compose_ids(f, g) == self.identity_of(&mf.dst)
    }
}

fn infer_identities(
    objects: &[String],
    morphisms: &[MorphismSpec],
    compose: &[(String, String, String)],
) -> Result<BTreeMap<String, String>> {
    let table: BTreeMap<(&str, &str), &str> =
        compose.iter().map(|(g, f, gf)| ((g.as_str(), f.as_str()), gf.as_str())).collect();
    let mut out = BTreeMap::new();
    for o in objects {
        let cand = morphisms.iter().filter(|m| &m.src == o && &m.dst == o).find(|i| {
            morphisms.iter().all(|f| {
                (f.dst != *o || table.get(&(i.id.as_str(), f.id.as_str())) == Some(&f.id.as_str()))
                    && (f.src != *o || table.get(&(f.id.as_str(), i.id.as_str())) == Some(&f.id.as_str()))
            })
        });
        match cand {
            Some(i) => {
                out.insert(o.clone(), i.id.clone());
            }
            None => return Err(Error::MalformedTable(format!("no identity found for object `{o}`"))),
        }
    }
    Ok(out)
}

impl Category for FiniteCategory {
    type Object = String;
    type Morphism = String;
    fn source(&self, m: &String) -> String {
        self.morphisms.get(m).map(|s| s.src.clone()).unwrap_or_default()
    }
    fn target(&self, m: &String) -> String {
        self.morphisms.get(m).map(|s| s.dst.clone()).unwrap_or_default()
    }
    fn identity(&self, o: &String) -> String {
        self.identities.get(o).cloned().unwrap_or_default()
    }
    fn compose(&self, g: &String, f: &String) -> Option<String> {
        self.compose_ids(g, f).map(|s| s.to_string())
    }
    fn morphisms_equal(&self, a: &String, b: &String) -> bool {
        a == b
    }
}

/// The opposite category: same identifiers, endpoints swapped,
/// `f^op ∘ g^op = (g ∘ f)^op`.
pub fn opposite(c: &FiniteCategory) -> FiniteCategory {
    FiniteCategory {
        objects: c.objects.clone(),
        morphisms: c
            .morphisms
            .iter()
            .map(|(k, m)| (k.clone(), MorphismSpec { id: m.id.clone(), src: m.dst.clone(), dst: m.src.clone() }))
            .collect(),
        compose: c.compose.iter().map(|((g, f), gf)| ((f.clone(), g.clone()), gf.clone())).collect(),
        identities: c.identities.clone(),
    }
}

/// Generic opposite of any category.
#[derive(Debug, Clone)]
pub struct Opposite<C>(pub C);

impl<C: Category> Category for Opposite<C> {
    type Object = C::Object;
    type Morphism = C::Morphism;
    fn source(&self, m: &Self::Morphism) -> Self::Object {
        self.0.target(m)
    }
    fn target(&self, m: &Self::Morphism) -> Self::Object {
        self.0.source(m)
    }
    fn identity(&self, o: &Self::Object) -> Self::Morphism {
        self.0.identity(o)
    }
    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Option<Self::Morphism> {
        self.0.compose(f, g)
    }
    fn morphisms_equal(&self, a: &Self::Morphism, b: &Self::Morphism) -> bool {
        self.0.morphisms_equal(a, b)
    }
}

/// Generic product of two categories.
#[derive(Debug, Clone)]
pub struct Product<C1, C2>(pub C1, pub C2);

impl<C1: Category, C2: Category> Category for Product<C1, C2> {
    type Object = (C1::Object, C2::Object);
    type Morphism = (C1::Morphism, C2::Morphism);
    fn source(&self, m: &Self::Morphism) -> Self::Object {
        (self.0.source(&m.0), self.1.source(&m.1))
    }
    fn target(&self, m: &Self::Morphism) -> Self::Object {
        (self.0.target(&m.0), self.1.target(&m.1))
    }
    fn identity(&self, o: &Self::Object) -> Self::Morphism {
        (self.0.identity(&o.0), self.1.identity(&o.1))
    }
    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Option<Self::Morphism> {
        Some((self.0.compose(&g.0, &f.0)?, self.1.compose(&g.1, &f.1)?))
    }
    fn morphisms_equal(&self, a: &Self::Morphism, b: &Self::Morphism) -> bool {
        self.0.morphisms_equal(&a.0, &b.0) && self.1.morphisms_equal(&a.1, &b.1)
    }
}

fn pair_id(a: &str, b: &str) -> String {
    format!("<{a},{b}>")
}

/// Explicit finite product category with identifiers `<a,b>`.
pub fn product_category(c1: &FiniteCategory, c2: &FiniteCategory) -> FiniteCategory {
    let mut objects = Vec::new();
    let mut identities = BTreeMap::new();
    for a in &c1.objects {
        for b in &c2.objects {
            objects.push(pair_id(a, b));
            identities.insert(pair_id(a, b), pair_id(&c1.identities[a], &c2.identities[b]));
        }
    }
    let mut morphisms = BTreeMap::new();
    for m1 in c1.morphisms.values() {
        for m2 in c2.morphisms.values() {
            let id = pair_id(&m1.id, &m2.id);
            morphisms.insert(id.clone(), MorphismSpec { id, src: pair_id(&m1.src, &m2.src), dst: pair_id(&m1.dst, &m2.dst) });
        }
    }
    let mut compose = BTreeMap::new();
    for ((g1, f1), gf1) in &c1.compose {
        for ((g2, f2), gf2) in &c2.compose {
            compose.insert((pair_id(g1, g2), pair_id(f1, f2)), pair_id(gf1, gf2));
        }
    }
    FiniteCategory { objects, morphisms, compose, identities }
}

/// Direction in which a functor acts on arrows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// A functor out of a finite base category into any category.
pub trait Functor {
    type Target: Category;
    fn base(&self) -> &FiniteCategory;
    fn codomain(&self) -> &Self::Target;
    fn variance(&self) -> Variance {
        Variance::Covariant
    }
    fn map_object(&self, o: &str) -> Result<<Self::Target as Category>::Object>;
    fn map_morphism(&self, m: &str) -> Result<<Self::Target as Category>::Morphism>;
}

/// Functor between finite categories given by tables.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctorData {
    pub source: FiniteCategory,
    pub target: FiniteCategory,
    pub object_map: BTreeMap<String, String>,
    pub morphism_map: BTreeMap<String, String>,
    pub variance: Variance,
}

impl FunctorData {
    pub fn identity(c: &FiniteCategory) -> Self {
        Self {
            source: c.clone(),
            target: c.clone(),
            object_map: c.objects.iter().map(|o| (o.clone(), o.clone())).collect(),
            morphism_map: c.morphisms.keys().map(|m| (m.clone(), m.clone())).collect(),
            variance: Variance::Covariant,
        }
    }

    /// Constant functor onto object `o` of `target`.
    pub fn constant(source: &FiniteCategory, target: &FiniteCategory, o: &str) -> Result<Self> {
        let id = target.identity_of(o).ok_or_else(|| Error::Unknown(o.into()))?.to_string();
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            object_map: source.objects.iter().map(|x| (x.clone(), o.to_string())).collect(),
            morphism_map: source.morphisms.keys().map(|m| (m.clone(), id.clone())).collect(),
            variance: Variance::Covariant,
        })
    }

    /// `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &FunctorData) -> Result<Self> {
        if self.target != other.source {
            return Err(Error::SourceMismatch("composite functor: codomain differs from next domain".into()));
        }
        let variance = if self.variance == other.variance { Variance::Covariant } else { Variance::Contravariant };
        let mut object_map = BTreeMap::new();
        for (k, v) in &self.object_map {
            object_map.insert(k.clone(), other.object_map.get(v).cloned().ok_or_else(|| Error::Unknown(v.clone()))?);
        }
        let mut morphism_map = BTreeMap::new();
        for (k, v) in &self.morphism_map {
            morphism_map.insert(k.clone(), other.morphism_map.get(v).cloned().ok_or_else(|| Error::Unknown(v.clone()))?);
        }
        Ok(Self { source: self.source.clone(), target: other.target.clone(), object_map, morphism_map, variance })
    }

    /// Projection of a product onto one factor (`first = true` for the left).
    pub fn projection(c1: &FiniteCategory, c2: &FiniteCategory, first: bool) -> Self {
        let p = product_category(c1, c2);
        let mut object_map = BTreeMap::new();
        for a in &c1.objects {
            for b in &c2.objects {
                object_map.insert(pair_id(a, b), if first { a.clone() } else { b.clone() });
            }
        }
        let mut morphism_map = BTreeMap::new();
        for a in c1.morphisms.keys() {
            for b in c2.morphisms.keys() {
                morphism_map.insert(pair_id(a, b), if first { a.clone() } else { b.clone() });
            }
        }
        Self { source: p, target: if first { c1.clone() } else { c2.clone() }, object_map, morphism_map, variance: Variance::Covariant }
    }
}

impl Functor for FunctorData {
    type Target = FiniteCategory;
    fn base(&self) -> &FiniteCategory {
        &self.source
    }
    fn codomain(&self) -> &FiniteCategory {
        &self.target
    }
    fn variance(&self) -> Variance {
        self.variance
    }
    fn map_object(&self, o: &str) -> Result<String> {
        let v = self.object_map.get(o).ok_or_else(|| Error::MalformedTable(format!("object `{o}` is not mapped")))?;
        if !self.target.has_object(v) {
            return Err(Error::MalformedTable(format!("object `{o}` maps to unknown `{v}`")));
        }
        Ok(v.clone())
    }
    fn map_morphism(&self, m: &str) -> Result<String> {
        let v = self.morphism_map.get(m).ok_or_else(|| Error::MalformedTable(format!("morphism `{m}` is not mapped")))?;
        if self.target.morphism(v).is_none() {
            return Err(Error::MalformedTable(format!("morphism `{m}` maps to unknown `{v}`")));
        }
        Ok(v.clone())
    }
}

/// Check that `f` preserves identities, endpoints, and composition (reversed
/// for contravariant functors).
pub fn check_functor<F: Functor>(f: &F) -> Result<ValidationReport> {
    let base = f.base();
    let cod = f.codomain();
    let contra = f.variance() == Variance::Contravariant;
    let mut v = Vec::new();
    for o in base.sorted_objects() {
        let fo = f.map_object(&o)?;
        let fid = f.map_morphism(base.identity_of(&o).expect("validated"))?;
        if !cod.morphisms_equal(&fid, &cod.identity(&fo)) {
            v.push(violation("identity-preservation", &[&o], "F(id) != id"));
        }
    }
    for m in base.morphisms() {
        let fm = f.map_morphism(&m.id)?;
        let (fs, fd) = (f.map_object(&m.src)?, f.map_object(&m.dst)?);
        let (es, ed) = if contra { (fd, fs) } else { (fs, fd) };
        if cod.source(&fm) != es || cod.target(&fm) != ed {
            v.push(violation("endpoint-preservation", &[&m.id], format!("F({}) has endpoints {:?} -> {:?}", m.id, cod.source(&fm), cod.target(&fm))));
        }
    }
    if !v.is_empty() {
        return Ok(ValidationReport::from_violations(v));
    }
    for g in base.morphisms() {
        for fm in base.morphisms().filter(|x| x.dst == g.src) {
            let gf = base.compose_ids(&g.id, &fm.id).ok_or_else(|| Error::MalformedTable(format!("({}, {}) not in table", g.id, fm.id)))?;
            let lhs = f.map_morphism(gf)?;
            let (a, b) = (f.map_morphism(&g.id)?, f.map_morphism(&fm.id)?);
            let rhs = if contra { cod.compose(&b, &a) } else { cod.compose(&a, &b) };
            match rhs {
                Some(r) if cod.morphisms_equal(&lhs, &r) => {}
                _ => v.push(violation("composition-preservation", &[&g.id, &fm.id], "F(g∘f) != F(g)∘F(f)")),
            }
        }
    }
    Ok(ValidationReport::from_violations(v))
}

/// Pairing of two functors with a common base, into the product category.
#[derive(Debug, Clone)]
pub struct PairFunctor<F1: Functor, F2: Functor> {
    pub first: F1,
    pub second: F2,
    product: Product<F1::Target, F2::Target>,
}

impl<F1: Functor, F2: Functor> PairFunctor<F1, F2>
where
    F1::Target: Clone,
    F2::Target: Clone,
{
    pub fn new(first: F1, second: F2) -> Result<Self> {
        if first.base() != second.base() {
            return Err(Error::SourceMismatch("paired functors have different base categories".into()));
        }
        if first.variance() != second.variance() {
            return Err(Error::SourceMismatch("paired functors have different variance".into()));
        }
        let product = Product(first.codomain().clone(), second.codomain().clone());
        Ok(Self { first, second, product })
    }
}

impl<F1: Functor, F2: Functor> Functor for PairFunctor<F1, F2> {
    type Target = Product<F1::Target, F2::Target>;
    fn base(&self) -> &FiniteCategory {
        self.first.base()
    }
    fn codomain(&self) -> &Self::Target {
        &self.product
    }
    fn variance(&self) -> Variance {
        self.first.variance()
    }
    fn map_object(&self, o: &str) -> Result<<Self::Target as Category>::Object> {
        Ok((self.first.map_object(o)?, self.second.map_object(o)?))
    }
    fn map_morphism(&self, m: &str) -> Result<<Self::Target as Category>::Morphism> {
        Ok((self.first.map_morphism(m)?, self.second.map_morphism(m)?))
    }
}

/// `A ↦ <F1(A), F2(A)>`, `f ↦ <F1(f), F2(f)>` as explicit tables.
pub fn product_pair(f1: &FunctorData, f2: &FunctorData) -> Result<FunctorData> {
    if f1.source != f2.source {
        return Err(Error::SourceMismatch("paired functors have different source categories".into()));
    }
    if f1.variance != f2.variance {
        return Err(Error::SourceMismatch("paired functors have different variance".into()));
    }
    let target = product_category(&f1.target, &f2.target);
    let mut object_map = BTreeMap::new();
    for o in &f1.source.objects {
        object_map.insert(o.clone(), pair_id(&f1.map_object(o)?, &f2.map_object(o)?));
    }
    let mut morphism_map = BTreeMap::new();
    for m in f1.source.morphisms.keys() {
        morphism_map.insert(m.clone(), pair_id(&f1.map_morphism(m)?, &f2.map_morphism(m)?));
    }
    Ok(FunctorData { source: f1.source.clone(), target, object_map, morphism_map, variance: f1.variance })
}

/// Natural transformation `τ: F ⇒ G` given by per-object components.
#[derive(Debug, Clone)]
pub struct NatTransData<F: Functor, G: Functor<Target = F::Target>> {
    pub source: F,
    pub target: G,
    pub components: BTreeMap<String, <F::Target as Category>::Morphism>,
}

/// Check every naturality square; the first failing base morphism (in
/// lexicographic order) is the witness.
pub fn check_natural<F, G>(t: &NatTransData<F, G>) -> Result<ValidationReport>
where
    F: Functor,
    G: Functor<Target = F::Target>,
{
    let base = t.source.base();
    if base != t.target.base() {
        return Err(Error::SourceMismatch("functors of a natural transformation differ in base".into()));
    }
    let cod = t.source.codomain();
    let contra = t.source.variance() == Variance::Contravariant;
    let mut v = Vec::new();
    for o in base.sorted_objects() {
        let c = t.components.get(&o).ok_or_else(|| Error::ComponentMissing(o.clone()))?;
        let (fo, go) = (t.source.map_object(&o)?, t.target.map_object(&o)?);
        if cod.source(c) != fo || cod.target(c) != go {
            v.push(violation("component-endpoints", &[&o], "τ_A is not F(A) -> G(A)"));
        }
    }
    for m in base.morphisms() {
        let (fm, gm) = (t.source.map_morphism(&m.id)?, t.target.map_morphism(&m.id)?);
        let (ta, tb) = (&t.components[&m.src], &t.components[&m.dst]);
        let (lhs, rhs) = if contra {
            (cod.compose(ta, &fm), cod.compose(&gm, tb))
        } else {
            (cod.compose(tb, &fm), cod.compose(&gm, ta))
        };
        match (lhs, rhs) {
            (Some(l), Some(r)) if cod.morphisms_equal(&l, &r) => {}
            _ => v.push(violation("naturality", &[&m.id], format!("square for `{}` does not commute", m.id))),
        }
    }
    Ok(ValidationReport::from_violations(v))
}

/// Canonical representatives of isomorphism classes of objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoClassIndex {
    /// Object ↦ representative.
    pub representative: BTreeMap<String, String>,
    /// Object ↦ chosen isomorphism object → representative.
    pub to_rep: BTreeMap<String, String>,
    /// Object ↦ inverse of `to_rep`.
    pub from_rep: BTreeMap<String, String>,
}

impl IsoClassIndex {
    pub fn representatives(&self) -> Vec<String> {
        let s: BTreeSet<&String> = self.representative.values().collect();
        s.into_iter().cloned().collect()
    }

    pub fn class_of(&self, rep: &str) -> Vec<String> {
        self.representative.iter().filter(|(_, r)| *r == rep).map(|(o, _)| o.clone()).collect()
    }
}

/// Brute-force search over candidate pairs `(f, g)` with `g∘f = id` and
/// `f∘g = id`; representatives are the lexicographically smallest objects.
pub fn canonicalize(c: &FiniteCategory) -> IsoClassIndex {
    let mut representative = BTreeMap::new();
    let mut to_rep = BTreeMap::new();
    let mut from_rep = BTreeMap::new();
    let mut reps: Vec<String> = Vec::new();
    for o in c.sorted_objects() {
        let mut found = None;
        'search: for r in &reps {
            for f in c.hom(&o, r) {
                for g in c.hom(r, &o) {
                    if c.is_inverse_pair(&f.id, &g.id) {
                        found = Some((r.clone(), f.id.clone(), g.id.clone()));
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some((r, f, g)) => {
                representative.insert(o.clone(), r);
                to_rep.insert(o.clone(), f);
                from_rep.insert(o, g);
            }
            None => {
                let id = c.identity_of(&o).expect("validated").to_string();
                representative.insert(o.clone(), o.clone());
                to_rep.insert(o.clone(), id.clone());
                from_rep.insert(o.clone(), id);
                reps.push(o);
            }
        }
    }
    IsoClassIndex { representative, to_rep, from_rep }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> FiniteCategory {
        let objects = vec!["A".to_string(), "B".into(), "C".into()];
        let mut morphisms = vec![];
        let mut ids = BTreeMap::new();
        let mut compose = vec![];
        for o in &objects {
            morphisms.push(MorphismSpec { id: format!("id_{o}"), src: o.clone(), dst: o.clone() });
            ids.insert(o.clone(), format!("id_{o}"));
        }
        for (id, s, d) in [("f", "A", "B"), ("g", "B", "C"), ("gf", "A", "C")] {
            morphisms.push(MorphismSpec { id: id.into(), src: s.into(), dst: d.into() });
        }
        for m in morphisms.clone() {
            compose.push((format!("id_{}", m.dst), m.id.clone(), m.id.clone()));
            if m.src != m.dst {
                compose.push((m.id.clone(), format!("id_{}", m.src), m.id.clone()));
            }
        }
        compose.push(("g".into(), "f".into(), "gf".into()));
        FiniteCategory::new(objects, morphisms, compose, ids).unwrap()
    }

    #[test]
    fn chain_is_valid_and_opposite_reverses() {
        let c = chain();
        assert!(c.validate().pass, "{:?}", c.validate());
        let op = opposite(&c);
        assert!(op.validate().pass);
        assert_eq!(op.morphism("f").unwrap().src, "B");
        assert_eq!(op.compose_ids("f", "g"), Some("gf"));
        assert_eq!(opposite(&op), c);
    }

    #[test]
    fn identity_and_endpoint_mismatch() {
        let c = FiniteCategory::from_generators(&["A", "B"], &[("f", "A", "B")]).unwrap();
        assert!(check_functor(&FunctorData::identity(&c)).unwrap().pass);
        let mut bad = FunctorData::identity(&c);
        bad.morphism_map.insert("f".into(), "id_A".into());
        let r = check_functor(&bad).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_witness().unwrap(), &["f".to_string()]);
    }

    #[test]
    fn json_roundtrip_with_inferred_identities() {
        let c = chain();
        let mut j = c.to_json();
        j.identities = None;
        let c2 = FiniteCategory::from_json(&j).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn pair_with_constant_projects_back() {
        let c = chain();
        let one = FiniteCategory::from_generators(&["*"], &[]).unwrap();
        let k = FunctorData::constant(&c, &one, "*").unwrap();
        let id = FunctorData::identity(&c);
        let p = product_pair(&id, &k).unwrap();
        assert!(check_functor(&p).unwrap().pass);
        let back = p.then(&FunctorData::projection(&c, &one, true)).unwrap();
        assert_eq!(back.object_map, id.object_map);
        assert_eq!(back.morphism_map, id.morphism_map);
    }

    #[test]
    fn identity_transformation_is_natural() {
        let c = chain();
        let id = FunctorData::identity(&c);
        let comps = c.objects().iter().map(|o| (o.clone(), c.identity_of(o).unwrap().to_string())).collect();
        let t = NatTransData { source: id.clone(), target: id, components: comps };
        assert!(check_natural(&t).unwrap().pass);
    }

    #[test]
    fn missing_component_is_error() {
        let c = chain();
        let id = FunctorData::identity(&c);
        let t = NatTransData { source: id.clone(), target: id, components: BTreeMap::new() };
        assert!(matches!(check_natural(&t), Err(Error::ComponentMissing(_))));
    }
}
