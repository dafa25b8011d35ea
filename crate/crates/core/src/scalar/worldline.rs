use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Minkowski event `(t, x, y, z)`.
pub type Point4 = [f64; 4];

const TIMELIKE_MARGIN: f64 = 1e-8;

/// Spacetime in which the worldline lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ambient", rename_all = "lowercase")]
pub enum Ambient {
    Minkowski,
    Torus { length: f64 },
}

/// Natural cubic spline of one coordinate against a parameter.
#[derive(Debug, Clone, PartialEq)]
struct Cubic {
    x: Vec<f64>,
    coef: Vec<[f64; 4]>,
}

impl Cubic {
    fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                upper[i] = h[i + 1];
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
            }
            for i in 1..k {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        let coef = (0..n - 1)
            .map(|i| {
                let hi = h[i];
                let slope = (y[i + 1] - y[i]) / hi - hi * (2.0 * m[i] + m[i + 1]) / 6.0;
                [y[i], slope, m[i] / 2.0, (m[i + 1] - m[i]) / (6.0 * hi)]
            })
            .collect();
        Self { x: x.to_vec(), coef }
    }

    fn seg(&self, s: f64) -> (usize, f64) {
        let i = self.x.partition_point(|&t| t <= s).saturating_sub(1).min(self.coef.len() - 1);
        (i, s - self.x[i])
    }

    fn eval(&self, s: f64) -> (f64, f64) {
        let (i, d) = self.seg(s);
        let p = self.coef[i];
        (p[0] + d * (p[1] + d * (p[2] + d * p[3])), p[1] + d * (2.0 * p[2] + 3.0 * d * p[3]))
    }
}

/// Spline curve with its proper-time map.
#[derive(Debug, Clone, PartialEq)]
struct Tabulated {
    coords: [Cubic; 4],
    lambda: Vec<f64>,
    // proper time at each lambda node
    tau_at: Vec<f64>,
}

impl Tabulated {
    fn tangent(&self, s: f64) -> Point4 {
        let mut v = [0.0; 4];
        for (k, c) in self.coords.iter().enumerate() {
            v[k] = c.eval(s).1;
        }
        v
    }

    fn speed(&self, s: f64) -> f64 {
        let v = self.tangent(s);
        (v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3]).max(0.0).sqrt()
    }

    fn tau_of(&self, s: f64) -> f64 {
        let i = self.lambda.partition_point(|&t| t <= s).saturating_sub(1).min(self.lambda.len() - 2);
        self.tau_at[i] + quad::gl(16).integrate(self.lambda[i], s, |x| self.speed(x))
    }

    fn lambda_of(&self, tau: f64) -> f64 {
        let n = self.lambda.len();
        let i = self.tau_at.partition_point(|&t| t <= tau).saturating_sub(1).min(n - 2);
        let (mut lo, mut hi) = (self.lambda[i], self.lambda[i + 1]);
        let mut s = lo + (hi - lo) * (tau - self.tau_at[i]) / (self.tau_at[i + 1] - self.tau_at[i]);
        for _ in 0..60 {
            let f = self.tau_of(s) - tau;
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let step = f / self.speed(s);
            if step.abs() < 1e-15 * (1.0 + s.abs()) || hi - lo < 1e-15 * (1.0 + s.abs()) {
                break;
            }
            let next = s - step;
            s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        s
    }
}

/// Curve type of a worldline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "lowercase")]
pub enum Curve {
    /// `gamma(tau) = origin + tau * (cosh, sinh * n)` with 3-velocity `velocity`.
    Inertial { velocity: [f64; 3], origin: Point4 },
    /// Samples of a timelike curve in any increasing parameter.
    Tabulated { parameter: Vec<f64>, points: Vec<Point4> },
}

/// A smooth, future-directed timelike curve parameterized by proper time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worldline {
    pub ambient: Ambient,
    pub curve: Curve,
    #[serde(skip)]
    tab: Option<Tabulated>,
}

impl Worldline {
    /// The static observer at the spatial origin.
    pub fn static_origin() -> Self {
        Self::inertial([0.0; 3]).expect("static is timelike")
    }

    pub fn inertial(velocity: [f64; 3]) -> Result<Self> {
        Self::build(Ambient::Minkowski, Curve::Inertial { velocity, origin: [0.0; 4] })
    }

    pub fn tabulated(parameter: Vec<f64>, points: Vec<Point4>) -> Result<Self> {
        Self::build(Ambient::Minkowski, Curve::Tabulated { parameter, points })
    }

    pub fn in_torus(mut self, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("torus length must be positive, got {length}")));
        }
        self.ambient = Ambient::Torus { length };
        Ok(self)
    }

    pub fn with_origin(self, origin: Point4) -> Result<Self> {
        match self.curve {
            Curve::Inertial { velocity, .. } => Self::build(self.ambient, Curve::Inertial { velocity, origin }),
            Curve::Tabulated { .. } => Err(Error::Unsupported("origin shift of a tabulated curve".into())),
        }
    }

    /// Validates the curve and precomputes the proper-time map.
    pub fn build(ambient: Ambient, curve: Curve) -> Result<Self> {
        let tab = match &curve {
            Curve::Inertial { velocity, origin } => {
                let v2: f64 = velocity.iter().map(|v| v * v).sum();
                if !(v2 < 1.0 - TIMELIKE_MARGIN) || origin.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NotTimelike(format!("speed^2 = {v2} is not below 1")));
                }
                None
            }
            Curve::Tabulated { parameter, points } => {
                if parameter.len() < 4 || parameter.len() != points.len() {
                    return Err(Error::InvalidParameter("tabulated curve needs >= 4 matching samples".into()));
                }
                if parameter.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter("curve parameter must increase".into()));
                }
                let coords = [0, 1, 2, 3].map(|k| {
                    let y: Vec<f64> = points.iter().map(|p| p[k]).collect();
                    Cubic::natural(parameter, &y)
                });
                let mut tab = Tabulated { coords, lambda: parameter.clone(), tau_at: vec![0.0; parameter.len()] };
                // check at nodes and midpoints
                for w in parameter.windows(2) {
                    for s in [w[0], 0.5 * (w[0] + w[1]), w[1]] {
                        let v = tab.tangent(s);
                        let norm2 = v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3];
                        let scale = v[0] * v[0];
                        if !(v[0] > 0.0) || norm2 <= TIMELIKE_MARGIN * scale.max(1.0) {
                            return Err(Error::NotTimelike(format!("tangent at parameter {s} has norm^2 {norm2:e}")));
                        }
                    }
                }
                for i in 1..parameter.len() {
                    let seg = quad::adaptive(parameter[i - 1], parameter[i], 1e-15, 1e-14, 200, |x| tab.speed(x));
                    tab.tau_at[i] = tab.tau_at[i - 1] + seg.value;
                }
                Some(tab)
            }
        };
        Ok(Self { ambient, curve, tab })
    }

    /// Restores derived data after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        Self::build(self.ambient, self.curve)
    }

    /// Proper-time range; unbounded for inertial curves.
    pub fn proper_time_range(&self) -> (f64, f64) {
        match &self.tab {
            Some(t) => (0.0, *t.tau_at.last().unwrap_or(&0.0)),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn is_inertial(&self) -> bool {
        matches!(self.curve, Curve::Inertial { .. })
    }

    pub fn is_static(&self) -> bool {
        matches!(self.curve, Curve::Inertial { velocity, .. } if velocity == [0.0; 3])
    }

    pub fn position(&self, tau: f64) -> Point4 {
        match (&self.curve, &self.tab) {
            (Curve::Inertial { velocity, origin }, _) => {
                let u = four_velocity(velocity);
                [0, 1, 2, 3].map(|k| origin[k] + tau * u[k])
            }
            (_, Some(t)) => {
                let s = t.lambda_of(tau);
                [0, 1, 2, 3].map(|k| t.coords[k].eval(s).0)
            }
            _ => unreachable!("tabulated worldline without spline data"),
        }
    }

    /// Unit tangent `d gamma / d tau`.
    pub fn velocity(&self, tau: f64) -> Point4 {
        match (&self.curve, &self.tab) {
            (Curve::Inertial { velocity, .. }, _) => four_velocity(velocity),
            (_, Some(t)) => {
                let s = t.lambda_of(tau);
                let v = t.tangent(s);
                let n = t.speed(s);
                v.map(|x| x / n)
            }
            _ => unreachable!("tabulated worldline without spline data"),
        }
    }

    /// Largest `| |u|^2 - 1 |` over a sample of proper times.
    pub fn normalization_defect(&self, samples: usize) -> f64 {
        let (a, b) = self.proper_time_range();
        let (a, b) = if a.is_finite() { (a, b) } else { (-1.0, 1.0) };
        (0..=samples)
            .map(|i| {
                let tau = a + (b - a) * i as f64 / samples as f64;
                let u = self.velocity(tau);
                (u[0] * u[0] - u[1] * u[1] - u[2] * u[2] - u[3] * u[3] - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn four_velocity(v: &[f64; 3]) -> Point4 {
    let v2: f64 = v.iter().map(|x| x * x).sum();
    let g = 1.0 / (1.0 - v2).sqrt();
    [g, g * v[0], g * v[1], g * v[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertial_is_unit_timelike() {
        let w = Worldline::inertial([0.3, -0.2, 0.1]).unwrap();
        assert!(w.normalization_defect(10) < 1e-14);
        assert!(Worldline::inertial([1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tabulated_boosted_line_recovers_proper_time() {
        // x = 0.6 t sampled in coordinate time
        let ts: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let pts: Vec<Point4> = ts.iter().map(|&t| [t, 0.6 * t, 0.0, 0.0]).collect();
        let w = Worldline::tabulated(ts, pts).unwrap();
        let (_, end) = w.proper_time_range();
        assert!((end - 2.0 * 0.8).abs() < 1e-12);
        assert!(w.normalization_defect(50) < 1e-8);
        let p = w.position(0.8);
        assert!((p[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spacelike_samples_rejected() {
        let ts: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let pts: Vec<Point4> = ts.iter().map(|&t| [t, 1.5 * t, 0.0, 0.0]).collect();
        assert!(matches!(Worldline::tabulated(ts, pts), Err(Error::NotTimelike(_))));
    }
}
