//! Causal geometry of compact regions in Minkowski space: timelike diameters,
//! double cones, their embedding into spatial tori, and the comparison of
//! Minkowski one-point functions with torus lattice sums.

use nalgebra::{Matrix4, Matrix5, UnitQuaternion, Vector3, Vector4, Vector5};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{
    build_twopoint, kappa_bar, wick_aqi_by_rearrangement, wick_one_point, SamplingFunction, StateKind, Worldline,
};

/// Minkowski event `(t, x, y, z)`.
pub type Event = [f64; 4];

const MULTI_STARTS: usize = 32;
const POLISHED_STARTS: usize = 3;
const DEFAULT_PADDING: f64 = 0.01;
const EXACT_ROUTE_MAX_POINTS: usize = 256;

fn spatial_norm(v: &Event) -> f64 {
    (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt()
}

fn sub(a: &Event, b: &Event) -> Event {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// Proper time of `v` if it is future timelike, otherwise minus its distance
/// from the future light cone measured along `t`.
pub fn signed_proper_time(v: &Event) -> f64 {
    let r = spatial_norm(v);
    if v[0] > r {
        ((v[0] - r) * (v[0] + r)).sqrt()
    } else {
        v[0] - r
    }
}

/// Affine Poincaré map `x -> lorentz x + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poincare {
    pub lorentz: Matrix4<f64>,
    pub shift: Vector4<f64>,
}

impl Poincare {
    pub fn identity() -> Self {
        Self { lorentz: Matrix4::identity(), shift: Vector4::zeros() }
    }

    /// Boost that brings a particle with velocity `tanh|eta| eta/|eta|` to rest.
    pub fn boost(eta: [f64; 3]) -> Self {
        let e = Vector3::from(eta);
        let phi = e.norm();
        if phi == 0.0 {
            return Self::identity();
        }
        let n = e / phi;
        let (ch, sh) = (phi.cosh(), phi.sinh());
        let mut m = Matrix4::identity();
        m[(0, 0)] = ch;
        for i in 0..3 {
            m[(0, i + 1)] = -sh * n[i];
            m[(i + 1, 0)] = -sh * n[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] += (ch - 1.0) * n[i] * n[j];
            }
        }
        Self { lorentz: m, shift: Vector4::zeros() }
    }

    pub fn rotation(q: &UnitQuaternion<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(q.to_rotation_matrix().matrix());
        Self { lorentz: m, shift: Vector4::zeros() }
    }

    pub fn translation(a: Event) -> Self {
        Self { lorentz: Matrix4::identity(), shift: Vector4::from(a) }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { lorentz: self.lorentz * other.lorentz, shift: self.lorentz * other.shift + self.shift }
    }

    pub fn inverse(&self) -> Self {
        // Lambda^{-1} = eta Lambda^T eta
        let eta = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0));
        let inv = eta * self.lorentz.transpose() * eta;
        Self { lorentz: inv, shift: -(inv * self.shift) }
    }

    pub fn apply(&self, e: &Event) -> Event {
        let v = self.lorentz * Vector4::from(*e) + self.shift;
        [v[0], v[1], v[2], v[3]]
    }

    /// Orthochronous isometry with rapidity at most `max_rapidity` and shifts in `[-max_shift, max_shift]`.
    pub fn random(rng: &mut impl Rng, max_rapidity: f64, max_shift: f64) -> Self {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let rot = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
        let dir: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let d = Vector3::from(dir).normalize() * rng.random_range(0.0..=max_rapidity);
        let shift: Event = std::array::from_fn(|_| rng.random_range(-max_shift..=max_shift));
        Self::translation(shift).compose(&Self::boost([d[0], d[1], d[2]])).compose(&Self::rotation(&rot))
    }

    /// Largest violation of `Lambda^T eta Lambda = eta`.
    pub fn isometry_defect(&self) -> f64 {
        let eta = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0));
        (self.lorentz.transpose() * eta * self.lorentz - eta).abs().max()
    }
}

/// How far sample points must lie inside the cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "padding", rename_all = "lowercase")]
pub enum Padding {
    /// Proper-time margin in units of length.
    Absolute { margin: f64 },
    /// Margin as a fraction of the unpadded timelike diameter.
    Relative { fraction: f64 },
}

/// Point cloud sampling a compact support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRegion {
    pub points: Vec<Event>,
    pub padding: Padding,
}

impl SupportRegion {
    pub fn new(points: Vec<Event>) -> Result<Self> {
        Self::with_padding(points, Padding::Relative { fraction: DEFAULT_PADDING })
    }

    pub fn with_padding(points: Vec<Event>, padding: Padding) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("support region needs at least one point".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("support points must be finite".into()));
        }
        let bad = match padding {
            Padding::Absolute { margin } => !(margin >= 0.0) || !margin.is_finite(),
            Padding::Relative { fraction } => !(fraction >= 0.0) || !fraction.is_finite(),
        };
        if bad {
            return Err(Error::InvalidParameter(format!("padding must be finite and nonnegative: {padding:?}")));
        }
        Ok(Self { points, padding })
    }

    /// Sphere of radius `r` about `center` at fixed time, sampled by a Fibonacci lattice.
    pub fn sphere(center: Event, r: f64, n: usize) -> Result<Self> {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let n = n.max(1);
        let points = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let rho = (1.0 - z * z).sqrt();
                let th = golden * i as f64;
                [center[0], center[1] + r * rho * th.cos(), center[2] + r * rho * th.sin(), center[3] + r * z]
            })
            .collect();
        Self::new(points)
    }

    /// Events of `wl` over the support of `g`.
    pub fn from_worldline(wl: &Worldline, g: &SamplingFunction, samples: usize) -> Result<Self> {
        let (a, b) = g.support();
        let n = samples.max(2);
        let points = (0..n).map(|i| wl.position(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
        Self::with_padding(points, Padding::Absolute { margin: 0.0 })
    }

    pub fn transformed(&self, map: &Poincare) -> Self {
        Self { points: self.points.iter().map(|p| map.apply(p)).collect(), padding: self.padding }
    }

    fn centroid(&self) -> Event {
        let n = self.points.len() as f64;
        let mut c = [0.0; 4];
        for p in &self.points {
            for k in 0..4 {
                c[k] += p[k] / n;
            }
        }
        c
    }

    fn extent(&self) -> f64 {
        let c = self.centroid();
        self.points.iter().map(|p| sub(p, &c).iter().map(|v| v.abs()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }
}

/// `I^+(lower) cap I^-(upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleCone {
    pub lower: Event,
    pub upper: Event,
}

impl DoubleCone {
    pub fn new(lower: Event, upper: Event) -> Result<Self> {
        let d = sub(&upper, &lower);
        if !(signed_proper_time(&d) > 0.0) {
            return Err(Error::InvalidParameter(format!("tips {lower:?}, {upper:?} are not chronologically related")));
        }
        Ok(Self { lower, upper })
    }

    pub fn interval(&self) -> f64 {
        signed_proper_time(&sub(&self.upper, &self.lower)).max(0.0)
    }

    /// Smallest proper time from a tip to `e`; negative when `e` lies outside.
    pub fn margin(&self, e: &Event) -> f64 {
        signed_proper_time(&sub(e, &self.lower)).min(signed_proper_time(&sub(&self.upper, e)))
    }

    pub fn transformed(&self, map: &Poincare) -> Self {
        Self { lower: map.apply(&self.lower), upper: map.apply(&self.upper) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterMethod {
    /// The support lies in the causal diamond of two of its points.
    CausalHull,
    /// Boost search around a convex problem in the cone's rest frame.
    Optimized,
}

/// Timelike diameter and the cone achieving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    pub ell: f64,
    pub cone: Option<DoubleCone>,
    pub degenerate: bool,
    /// Smallest proper-time margin of a sample point inside the cone.
    pub margin: f64,
    pub padding: f64,
    pub method: DiameterMethod,
    /// Rapidity of the cone's rest frame relative to the input frame.
    pub rapidity: [f64; 3],
}

/// Rest-frame cost `max_i (t_i + r_i) + max_i (-t_i + r_i)`, `r_i = sqrt(|x_i - c|^2 + pad^2)`.
fn rest_frame_cost(points: &[Event], c: &[f64; 3], pad: f64) -> (f64, f64, f64) {
    let mut up = f64::NEG_INFINITY;
    let mut down = f64::NEG_INFINITY;
    for p in points {
        let r = ((p[1] - c[0]).powi(2) + (p[2] - c[1]).powi(2) + (p[3] - c[2]).powi(2) + pad * pad).sqrt();
        up = up.max(p[0] + r);
        down = down.max(-p[0] + r);
    }
    (up + down, -down, up)
}

/// Minimizes the rest-frame cost over the common spatial position of the
/// tips by a log-barrier path-following Newton method on the second-order
/// cone formulation. Returns the position `c`.
fn rest_frame_center(points: &[Event], pad: f64, scale: f64) -> [f64; 3] {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for k in 0..3 {
            c[k] += p[k + 1] / n;
        }
    }
    let (_, lo, hi) = rest_frame_cost(points, &c, pad);
    let mut z = Vector5::new(c[0], c[1], c[2], hi + scale, -lo + scale);
    // barrier change between two points, evaluated as a sum of log ratios; None outside the domain
    let barrier_change = |from: &Vector5<f64>, to: &Vector5<f64>| -> Option<f64> {
        let mut f = 0.0;
        for p in points {
            let d0 = (p[1] - from[0]).powi(2) + (p[2] - from[1]).powi(2) + (p[3] - from[2]).powi(2) + pad * pad;
            let d1 = (p[1] - to[0]).powi(2) + (p[2] - to[1]).powi(2) + (p[3] - to[2]).powi(2) + pad * pad;
            for (s0, s1) in [(from[3] - p[0], to[3] - p[0]), (from[4] + p[0], to[4] + p[0])] {
                let q1 = s1 * s1 - d1;
                if !(s1 > 0.0 && q1 > 0.0) {
                    return None;
                }
                f -= (q1 / (s0 * s0 - d0)).ln();
            }
        }
        Some(f)
    };
    let mut mu = 4.0 * n / scale;
    let gap_target = 1e-11 * scale;
    for _ in 0..60 {
        for _ in 0..40 {
            let mut grad = Vector5::new(0.0, 0.0, 0.0, mu, mu);
            let mut hess = Matrix5::zeros();
            for p in points {
                let d = Vector3::new(p[1] - z[0], p[2] - z[1], p[3] - z[2]);
                let d2 = d.norm_squared() + pad * pad;
                for (slot, s) in [(3usize, z[3] - p[0]), (4usize, z[4] + p[0])] {
                    let q = s * s - d2;
                    let mut dq = Vector5::zeros();
                    dq[0] = 2.0 * d[0];
                    dq[1] = 2.0 * d[1];
                    dq[2] = 2.0 * d[2];
                    dq[slot] = 2.0 * s;
                    grad -= dq / q;
                    hess += dq * dq.transpose() / (q * q);
                    for k in 0..3 {
                        hess[(k, k)] += 2.0 / q;
                    }
                    hess[(slot, slot)] -= 2.0 / q;
                }
            }
            let step = match hess.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => match hess.lu().solve(&(-grad)) {
                    Some(s) => s,
                    None => break,
                },
            };
            let decrement = -grad.dot(&step);
            if !(decrement > 1e-12) {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial = z + step * t;
                if let Some(db) = barrier_change(&z, &trial) {
                    let df = mu * t * (step[3] + step[4]) + db;
                    if df <= -0.25 * t * decrement {
                        z = trial;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved || decrement < 1e-9 {
                break;
            }
        }
        if 4.0 * n / mu < gap_target {
            break;
        }
        mu *= 16.0;
    }
    [z[0], z[1], z[2]]
}

/// Rest-frame problem after boosting by `eta`.
fn boosted_cost(points: &[Event], eta: [f64; 3], pad: f64, scale: f64) -> (f64, [f64; 3], f64, f64) {
    let b = Poincare::boost(eta);
    let moved: Vec<Event> = points.iter().map(|p| b.apply(p)).collect();
    let c = rest_frame_center(&moved, pad, scale);
    let (cost, lo, hi) = rest_frame_cost(&moved, &c, pad);
    (cost, c, lo, hi)
}

fn nelder_mead(f: &dyn Fn([f64; 3]) -> f64, start: [f64; 3], step: f64, ftol: f64, xtol: f64, max_iter: usize) -> ([f64; 3], f64) {
    let mut simplex: Vec<([f64; 3], f64)> = (0..4)
        .map(|i| {
            let mut x = start;
            if i > 0 {
                x[i - 1] += step;
            }
            (x, f(x))
        })
        .collect();
    let lin = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] { std::array::from_fn(|k| a[k] + t * (b[k] - a[k])) };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[3].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| (0..3).map(|k| (x[k] - simplex[0].0[k]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= ftol && size <= xtol {
            break;
        }
        let centroid: [f64; 3] = std::array::from_fn(|k| simplex[..3].iter().map(|(x, _)| x[k]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let reflected = lin(&centroid, &worst.0, -1.0);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lin(&centroid, &worst.0, -2.0);
            let fe = f(expanded);
            simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 { lin(&centroid, &worst.0, -0.5) } else { lin(&centroid, &worst.0, 0.5) };
            let fc = f(contracted);
            if fc < worst.1.min(fr) {
                simplex[3] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x = lin(&best, &v.0, 0.5);
                    *v = (x, f(x));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

fn start_rapidities() -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let radii = [0.3, 0.7, 1.2, 2.0];
    let m = MULTI_STARTS - 1;
    let mut out = vec![[0.0; 3]];
    for i in 0..m {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
        let rho = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        let r = radii[i % radii.len()];
        out.push([r * rho * th.cos(), r * rho * th.sin(), r * z]);
    }
    out
}

/// Exact diameter when two sample points bound all others causally.
fn causal_hull(points: &[Event]) -> Option<(Event, Event)> {
    if points.len() > EXACT_ROUTE_MAX_POINTS {
        return None;
    }
    let below = |a: &Event| points.iter().all(|p| signed_proper_time(&sub(p, a)) >= 0.0);
    let above = |b: &Event| points.iter().all(|p| signed_proper_time(&sub(b, p)) >= 0.0);
    let lo = points.iter().find(|a| below(a))?;
    let hi = points.iter().find(|b| above(b))?;
    Some((*lo, *hi))
}

fn optimized(region: &[Event], pad: f64, scale: f64, warm: Option<[f64; 3]>) -> (f64, [f64; 3], DoubleCone) {
    let cost = |eta: [f64; 3]| boosted_cost(region, eta, pad, scale).0;
    let starts: Vec<[f64; 3]> = match warm {
        Some(e) => vec![e],
        None => {
            let mut scored: Vec<([f64; 3], f64)> = start_rapidities().into_par_iter().map(|e| (e, cost(e))).collect();
            scored.sort_by(|a, b| a.1.total_cmp(&b.1));
            scored.into_iter().take(POLISHED_STARTS).map(|(e, _)| e).collect()
        }
    };
    let polished: Vec<([f64; 3], f64)> = starts
        .par_iter()
        .map(|&e| {
            let (x, _) = nelder_mead(&cost, e, 0.2, 1e-10 * scale, 1e-5, 1000);
            nelder_mead(&cost, x, 1e-3, 1e-12 * scale, 1e-7, 1000)
        })
        .collect();
    let (eta, _) = polished.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("at least one start");
    let (ell, c, lo, hi) = boosted_cost(region, eta, pad, scale);
    let back = Poincare::boost(eta).inverse();
    let cone = DoubleCone { lower: back.apply(&[lo, c[0], c[1], c[2]]), upper: back.apply(&[hi, c[0], c[1], c[2]]) };
    (ell, eta, cone)
}

fn diameter_with_pad(region: &SupportRegion, pad: f64, warm: Option<[f64; 3]>) -> DiameterReport {
    let origin = region.centroid();
    let pts: Vec<Event> = region.points.iter().map(|p| sub(p, &origin)).collect();
    let scale = region.extent().max(pad).max(f64::MIN_POSITIVE);
    let shift = Poincare::translation(origin);
    if pad == 0.0 {
        if let Some((a, b)) = causal_hull(&pts) {
            let ell = signed_proper_time(&sub(&b, &a)).max(0.0);
            let degenerate = ell <= 1e-12 * scale;
            let d = sub(&b, &a);
            let v = spatial_norm(&d);
            let rapidity = if v > 0.0 && d[0] > v {
                let phi = (v / d[0]).atanh();
                [phi * d[1] / v, phi * d[2] / v, phi * d[3] / v]
            } else {
                [0.0; 3]
            };
            let cone = (!degenerate).then(|| DoubleCone { lower: shift.apply(&a), upper: shift.apply(&b) });
            return DiameterReport {
                ell: if degenerate { 0.0 } else { ell },
                cone,
                degenerate,
                margin: 0.0,
                padding: 0.0,
                method: DiameterMethod::CausalHull,
                rapidity,
            };
        }
    }
    let (ell, eta, cone) = optimized(&pts, pad, scale, warm);
    let cone = cone.transformed(&shift);
    let margin = region.points.iter().map(|p| cone.margin(p)).fold(f64::INFINITY, f64::min);
    let degenerate = ell <= 1e-12 * scale;
    DiameterReport {
        ell,
        cone: (!degenerate).then_some(cone),
        degenerate,
        margin,
        padding: pad,
        method: DiameterMethod::Optimized,
        rapidity: eta,
    }
}

/// Infimum of `tau(p-, p+)` over double cones containing every sample point
/// with the requested proper-time margin.
pub fn timelike_diameter(region: &SupportRegion) -> DiameterReport {
    match region.padding {
        Padding::Absolute { margin } => diameter_with_pad(region, margin, None),
        Padding::Relative { fraction } => {
            let bare = diameter_with_pad(region, 0.0, None);
            if fraction == 0.0 || bare.ell == 0.0 {
                return bare;
            }
            diameter_with_pad(region, fraction * bare.ell, Some(bare.rapidity))
        }
    }
}

/// Smallest torus admitting the cone, with the frame that places the tips at `(-+L/2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusEmbedding {
    pub length: f64,
    pub degenerate: bool,
    pub frame: Poincare,
}

impl TorusEmbedding {
    /// `|t| + |x| < L/2` in the embedding frame.
    pub fn in_fundamental_domain(&self, e: &Event) -> bool {
        let p = self.frame.apply(e);
        p[0].abs() + spatial_norm(&p) < 0.5 * self.length
    }
}

pub fn embed_in_torus(cone: Option<&DoubleCone>) -> TorusEmbedding {
    let Some(cone) = cone else {
        return TorusEmbedding { length: 0.0, degenerate: true, frame: Poincare::identity() };
    };
    let d = sub(&cone.upper, &cone.lower);
    let v = spatial_norm(&d);
    let boost = if v > 0.0 {
        let phi = (v / d[0]).atanh();
        Poincare::boost([phi * d[1] / v, phi * d[2] / v, phi * d[3] / v])
    } else {
        Poincare::identity()
    };
    let mid: Event = std::array::from_fn(|k| 0.5 * (cone.upper[k] + cone.lower[k]));
    let frame = boost.compose(&Poincare::translation(mid.map(|x| -x)));
    let length = cone.interval();
    TorusEmbedding { length, degenerate: length == 0.0, frame }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub length: f64,
    pub value: f64,
    pub tail_estimate: f64,
    pub shells: usize,
}

/// Least-squares fit `ln(kappa L^{3/2}) = intercept - rate L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTailFit {
    pub rate: f64,
    pub intercept: f64,
    pub points: usize,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaCurve {
    pub mass: f64,
    pub rows: Vec<KappaRow>,
    pub decreasing: bool,
    pub fit: Option<ExpTailFit>,
}

pub fn fit_exponential_tail(rows: &[KappaRow]) -> Option<ExpTailFit> {
    let mut sorted: Vec<&KappaRow> = rows.iter().filter(|r| r.value > 0.0).collect();
    sorted.sort_by(|a, b| a.length.total_cmp(&b.length));
    let used = &sorted[sorted.len() / 2..];
    if used.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = used.iter().map(|r| r.length).collect();
    let ys: Vec<f64> = used.iter().map(|r| (r.value * r.length.powf(1.5)).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Some(ExpTailFit { rate: -slope, intercept, points: used.len(), rms_residual: rms })
}

/// `L -> kappa-bar(L)` for the massive field, with the large-`L` decay rate.
pub fn kappa_upper_curve(mass: f64, lengths: &[f64]) -> Result<KappaCurve> {
    let rows: Vec<KappaRow> = lengths
        .par_iter()
        .map(|&l| {
            kappa_bar(mass, l).map(|s| KappaRow { length: l, value: s.value, tail_estimate: s.tail_estimate, shells: s.shells })
        })
        .collect::<Result<_>>()?;
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.length.total_cmp(&b.length));
    let decreasing = sorted.windows(2).all(|w| w[1].value <= w[0].value);
    let fit = fit_exponential_tail(&rows);
    Ok(KappaCurve { mass, rows, decreasing, fit })
}

/// Evenly spaced lengths.
pub fn length_grid(lmin: f64, lmax: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lmin > 0.0 && lmax >= lmin && steps >= 1) {
        return Err(Error::InvalidParameter(format!("bad length grid [{lmin}, {lmax}] x {steps}")));
    }
    if steps == 1 {
        return Ok(vec![lmin]);
    }
    Ok((0..steps).map(|i| lmin + (lmax - lmin) * i as f64 / (steps - 1) as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub label: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthRhs {
    pub length: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPropositionReport {
    pub mass: f64,
    pub ell: f64,
    pub integral_f: f64,
    pub kappa_at_ell: f64,
    pub rhs: f64,
    pub samples: Vec<StateSample>,
    pub infimum: f64,
    /// `rhs - infimum`.
    pub gap: f64,
    pub holds: bool,
    pub saturation_defect: f64,
    pub saturation_tolerance: f64,
    pub saturated: bool,
    /// Right side for each tested torus length `L' >= ell`.
    pub refinement: Vec<LengthRhs>,
    /// Length among the tested ones giving the smallest right side.
    pub tightest_length: f64,
    /// `Q^a(f)` from the rearranged difference bound.
    pub absolute_bound: f64,
    pub absolute_bound_error: f64,
    /// `Q^a(f) >= -kappa(ell) int f` within errors.
    pub absolute_bound_consistent: bool,
}

/// Scenario for [`torus_proposition_check`] along a static worldline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusScenario {
    pub sampling: SamplingFunction,
    pub mass: f64,
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    #[serde(default = "default_factors")]
    pub length_factors: Vec<f64>,
}

fn default_temperatures() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_factors() -> Vec<f64> {
    vec![1.0, 1.25, 1.5, 2.0, 3.0]
}

/// Compares `inf_omega omega(phi^2(f))` over sampled Minkowski states with
/// `kappa-bar(ell(f)) int f` for `f = g^2` along a static worldline.
pub fn torus_proposition_check(scenario: &TorusScenario, gap_tolerance: f64) -> Result<TorusPropositionReport> {
    let TorusScenario { sampling: g, mass, temperatures, length_factors } = scenario;
    let m = *mass;
    if !(m > 0.0) {
        return Err(Error::MasslessTorus);
    }
    if length_factors.iter().any(|&f| !(f >= 1.0)) {
        return Err(Error::InvalidParameter("torus lengths must not undercut the diameter".into()));
    }
    let wl = Worldline::static_origin();
    let integral_f = g.l2_squared();
    if g.is_zero() {
        return Ok(TorusPropositionReport {
            mass: m,
            ell: 0.0,
            integral_f: 0.0,
            kappa_at_ell: 0.0,
            rhs: 0.0,
            samples: vec![StateSample { label: "vacuum".into(), value: 0.0, error: 0.0 }],
            infimum: 0.0,
            gap: 0.0,
            holds: true,
            saturation_defect: 0.0,
            saturation_tolerance: 0.0,
            saturated: true,
            refinement: Vec::new(),
            tightest_length: 0.0,
            absolute_bound: 0.0,
            absolute_bound_error: 0.0,
            absolute_bound_consistent: true,
        });
    }
    let region = SupportRegion::from_worldline(&wl, g, 65)?;
    let ell = timelike_diameter(&region).ell;
    let kappa = kappa_bar(m, ell)?;
    let rhs = kappa.value * integral_f;
    let rhs_err = kappa.tail_estimate * integral_f;

    let mut samples = vec![StateSample { label: "vacuum".into(), value: 0.0, error: 0.0 }];
    for &t in temperatures {
        let w = build_twopoint(StateKind::thermal(t, m), &wl)?;
        let e = wick_one_point(&w, g, &wl)?;
        samples.push(StateSample { label: format!("thermal T={t}"), value: e.value, error: e.error });
    }
    let mut torus_at_ell = None;
    let mut refinement = Vec::new();
    for &factor in length_factors {
        let l = factor * ell;
        let twl = wl.clone().in_torus(l)?;
        let w = build_twopoint(StateKind::torus(l, m), &twl)?;
        let e = wick_one_point(&w, g, &twl)?;
        if factor == 1.0 {
            torus_at_ell = Some(e);
        }
        samples.push(StateSample { label: format!("torus L={l}"), value: e.value, error: e.error });
        refinement.push(LengthRhs { length: l, rhs: kappa_bar(m, l)?.value * integral_f });
    }
    let inf = samples.iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("vacuum sample").clone();
    let gap = rhs - inf.value;
    let torus = match torus_at_ell {
        Some(e) => e,
        None => {
            let twl = wl.clone().in_torus(ell)?;
            wick_one_point(&build_twopoint(StateKind::torus(ell, m), &twl)?, g, &twl)?
        }
    };
    let saturation_defect = (torus.value - rhs).abs();
    let saturation_tolerance = torus.error + rhs_err + 1e-10 * rhs.abs();
    let tightest_length =
        refinement.iter().min_by(|a, b| a.rhs.total_cmp(&b.rhs)).map(|r| r.length).unwrap_or(ell);

    let refs = [build_twopoint(StateKind::vacuum(m), &wl)?, build_twopoint(StateKind::thermal(1.0, m), &wl)?];
    let aqi = wick_aqi_by_rearrangement(g, &wl, &refs)?;
    let absolute_bound_consistent = aqi.value + aqi.total_error + rhs_err >= -rhs;

    Ok(TorusPropositionReport {
        mass: m,
        ell,
        integral_f,
        kappa_at_ell: kappa.value,
        rhs,
        samples,
        infimum: inf.value,
        gap,
        holds: gap >= -gap_tolerance,
        saturation_defect,
        saturation_tolerance,
        saturated: saturation_defect <= saturation_tolerance,
        refinement,
        tightest_length,
        absolute_bound: aqi.value,
        absolute_bound_error: aqi.total_error,
        absolute_bound_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_point_is_degenerate() {
        let r = SupportRegion::new(vec![[1.0, 2.0, 3.0, 4.0]]).unwrap();
        let d = timelike_diameter(&r);
        assert_eq!(d.ell, 0.0);
        assert!(d.degenerate);
        assert!(embed_in_torus(d.cone.as_ref()).degenerate);
    }

    #[test]
    fn timelike_pair_uses_its_endpoints() {
        let a = [0.0, 0.0, 0.0, 0.0];
        let b = [2.0, 1.0, 0.0, 0.0];
        let r = SupportRegion::with_padding(vec![a, b], Padding::Absolute { margin: 0.0 }).unwrap();
        let d = timelike_diameter(&r);
        assert!((d.ell - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(d.cone.unwrap().lower, a);
    }

    #[test]
    fn sphere_diameter() {
        let r = 0.7;
        let s = SupportRegion::sphere([0.0; 4], r, 40).unwrap();
        let s = SupportRegion::with_padding(s.points, Padding::Absolute { margin: 0.0 }).unwrap();
        let d = timelike_diameter(&s);
        assert!((d.ell - 2.0 * r).abs() < 1e-8, "{}", d.ell);
        assert!(d.margin > -1e-9);
    }

    #[test]
    fn poincare_inverse_and_isometry() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = Poincare::random(&mut rng, 1.0, 2.0);
        assert!(p.isometry_defect() < 1e-12);
        let e = [0.3, -1.0, 2.0, 0.5];
        let back = p.inverse().apply(&p.apply(&e));
        assert!(e.iter().zip(back).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn embedding_places_tips_on_axis() {
        let cone = DoubleCone::new([0.0, 0.0, 0.0, 0.0], [3.0, 1.0, 1.0, 0.0]).unwrap();
        let e = embed_in_torus(Some(&cone));
        assert!((e.length - 7f64.sqrt()).abs() < 1e-14);
        let lo = e.frame.apply(&cone.lower);
        assert!((lo[0] + 0.5 * e.length).abs() < 1e-12 && spatial_norm(&lo) < 1e-12);
    }
}
