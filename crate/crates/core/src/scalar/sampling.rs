use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

const BUMP_NODES_LOW: usize = 1024;
const BUMP_NODES_HIGH: usize = 4096;

/// Shape family of a sampling function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `exp(-1/(1-x^2))` on `|x| < 1`.
    Bump,
    /// `cos^2(pi x / 2)` on `|x| <= 1`.
    Cos2,
    /// Clamped cubic spline through `(knots, values)` in the unscaled variable.
    Spline { knots: Vec<f64>, values: Vec<f64> },
}

/// A real, compactly supported sampling function `g(t) = amp * shape((t - center)/scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingFunction {
    #[serde(flatten)]
    pub family: Family,
    pub center: f64,
    pub scale: f64,
    pub amplitude: f64,
    #[serde(skip)]
    spline: Option<SplineCoeffs>,
}

#[derive(Debug, Clone, PartialEq)]
struct SplineCoeffs {
    knots: Vec<f64>,
    // per interval: a + b d + c d^2 + e d^3
    coef: Vec<[f64; 4]>,
}

impl SplineCoeffs {
    fn build(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(Error::InvalidParameter("spline needs at least 3 knots with matching values".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("spline knots must be strictly increasing".into()));
        }
        if values[0].abs() > 0.0 || values[n - 1].abs() > 0.0 {
            return Err(Error::InvalidParameter("spline must vanish at both ends".into()));
        }
        // clamped spline, zero end slopes: solve for second derivatives M_i
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        b[0] = 2.0 * h[0];
        c[0] = h[0];
        r[0] = 6.0 * ((values[1] - values[0]) / h[0]);
        for i in 1..n - 1 {
            a[i] = h[i - 1];
            b[i] = 2.0 * (h[i - 1] + h[i]);
            c[i] = h[i];
            r[i] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        a[n - 1] = h[n - 2];
        b[n - 1] = 2.0 * h[n - 2];
        r[n - 1] = -6.0 * ((values[n - 1] - values[n - 2]) / h[n - 2]);
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        let mut coef = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hi = h[i];
            let slope = (values[i + 1] - values[i]) / hi - hi * (2.0 * m[i] + m[i + 1]) / 6.0;
            coef.push([values[i], slope, m[i] / 2.0, (m[i + 1] - m[i]) / (6.0 * hi)]);
        }
        let s = Self { knots: knots.to_vec(), coef };
        for (i, p) in s.coef.iter().enumerate() {
            if p.iter().all(|x| x.abs() < 1e-300) {
                return Err(Error::InvalidParameter(format!(
                    "spline vanishes identically on [{}, {}]",
                    knots[i],
                    knots[i + 1]
                )));
            }
        }
        Ok(s)
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let k = &self.knots;
        if x < k[0] || x > k[k.len() - 1] {
            return None;
        }
        Some(k.partition_point(|&t| t <= x).saturating_sub(1).min(self.coef.len() - 1))
    }

    fn value(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(i) => {
                let d = x - self.knots[i];
                let p = self.coef[i];
                p[0] + d * (p[1] + d * (p[2] + d * p[3]))
            }
            None => 0.0,
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(i) => {
                let d = x - self.knots[i];
                let p = self.coef[i];
                p[1] + d * (2.0 * p[2] + 3.0 * d * p[3])
            }
            None => 0.0,
        }
    }

    /// `int shape(x) e^{i k x} dx`, exact per cubic piece.
    fn fourier(&self, k: f64) -> Complex64 {
        let gl = quad::gl(12);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, p) in self.coef.iter().enumerate() {
            let x0 = self.knots[i];
            let h = self.knots[i + 1] - x0;
            if (k * h).abs() < 1.0 {
                let mut re = 0.0;
                let mut im = 0.0;
                for (d, w) in gl.mapped(0.0, h) {
                    let v = p[0] + d * (p[1] + d * (p[2] + d * p[3]));
                    re += w * v * (k * (x0 + d)).cos();
                    im += w * v * (k * (x0 + d)).sin();
                }
                acc += Complex64::new(re, im);
            } else {
                // int_0^h P(d) e^{ikd} dd = [e^{ikd} sum_j (-1)^j P^{(j)}(d)/(ik)^{j+1}]_0^h
                let ik = Complex64::new(0.0, k);
                let prim = |d: f64| {
                    let derivs = [
                        p[0] + d * (p[1] + d * (p[2] + d * p[3])),
                        p[1] + d * (2.0 * p[2] + 3.0 * d * p[3]),
                        2.0 * p[2] + 6.0 * d * p[3],
                        6.0 * p[3],
                    ];
                    let mut s = Complex64::new(0.0, 0.0);
                    let mut pw = ik;
                    for (j, dv) in derivs.iter().enumerate() {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        s += sign * dv / pw;
                        pw *= ik;
                    }
                    s * Complex64::from_polar(1.0, k * d)
                };
                acc += (prim(h) - prim(0.0)) * Complex64::from_polar(1.0, k * x0);
            }
        }
        acc
    }
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn bump_deriv(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - x * x;
        bump(x) * (-2.0 * x / (q * q))
    }
}

/// Trapezoid weights `w_j bump(j h)` for `j >= 0` on `[-1, 1]` folded onto the half line.
fn bump_table(n: usize) -> (f64, &'static [f64]) {
    use std::sync::OnceLock;
    static LOW: OnceLock<Vec<f64>> = OnceLock::new();
    static HIGH: OnceLock<Vec<f64>> = OnceLock::new();
    let cell = if n == BUMP_NODES_LOW { &LOW } else { &HIGH };
    let h = 2.0 / n as f64;
    let t = cell.get_or_init(|| (0..n / 2).map(|j| if j == 0 { bump(0.0) } else { 2.0 * bump(j as f64 * h) }).collect());
    (h, t)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

impl SamplingFunction {
    pub fn bump(half_width: f64) -> Self {
        Self::new(Family::Bump, 0.0, half_width).expect("positive width")
    }

    pub fn cos2(half_width: f64) -> Self {
        Self::new(Family::Cos2, 0.0, half_width).expect("positive width")
    }

    pub fn new(family: Family, center: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter(format!("sampling scale must be positive, got {scale}")));
        }
        let spline = match &family {
            Family::Spline { knots, values } => Some(SplineCoeffs::build(knots, values)?),
            _ => None,
        };
        Ok(Self { family, center, scale, amplitude: 1.0, spline })
    }

    /// Spline through tabulated `(t, g)` samples; the support is the knot range.
    pub fn spline(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Family::Spline { knots, values }, 0.0, 1.0)
    }

    /// The zero function, supported on `[-half_width, half_width]`.
    pub fn zero(half_width: f64) -> Self {
        let mut g = Self::bump(half_width);
        g.amplitude = 0.0;
        g
    }

    /// Restores derived data after deserialization.
    pub fn rebuild(mut self) -> Result<Self> {
        let amp = self.amplitude;
        self = Self::new(self.family, self.center, self.scale)?;
        self.amplitude = amp;
        Ok(self)
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn with_amplitude(mut self, amp: f64) -> Self {
        self.amplitude = amp;
        self
    }

    /// `g(t/lambda) / sqrt(lambda)`: preserves `int g^2`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut g = self.clone();
        g.scale *= lambda;
        g.center *= lambda;
        g.amplitude /= lambda.sqrt();
        g
    }

    fn unit_support(&self) -> (f64, f64) {
        match &self.family {
            Family::Bump | Family::Cos2 => (-1.0, 1.0),
            Family::Spline { knots, .. } => (knots[0], knots[knots.len() - 1]),
        }
    }

    /// Support interval `[a, b]`.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.unit_support();
        (self.center + self.scale * a, self.center + self.scale * b)
    }

    pub fn width(&self) -> f64 {
        let (a, b) = self.support();
        b - a
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    fn shape(&self, x: f64) -> f64 {
        match &self.family {
            Family::Bump => bump(x),
            Family::Cos2 => {
                if x.abs() > 1.0 {
                    0.0
                } else {
                    (0.5 * PI * x).cos().powi(2)
                }
            }
            Family::Spline { .. } => self.spline.as_ref().map_or(0.0, |s| s.value(x)),
        }
    }

    fn shape_deriv(&self, x: f64) -> f64 {
        match &self.family {
            Family::Bump => bump_deriv(x),
            Family::Cos2 => {
                if x.abs() > 1.0 {
                    0.0
                } else {
                    -0.5 * PI * (PI * x).sin()
                }
            }
            Family::Spline { .. } => self.spline.as_ref().map_or(0.0, |s| s.deriv(x)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.shape((t - self.center) / self.scale)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.amplitude * self.shape_deriv((t - self.center) / self.scale) / self.scale
    }

    /// Interior breakpoints where the integrand may lose smoothness.
    fn breaks(&self) -> Vec<f64> {
        match &self.family {
            Family::Spline { knots, .. } => knots.iter().map(|k| self.center + self.scale * k).collect(),
            _ => {
                let (a, b) = self.support();
                (0..=16).map(|i| a + (b - a) * i as f64 / 16.0).collect()
            }
        }
    }

    /// Integral of `h(g(t), g'(t), t)` over the support.
    pub fn integrate(&self, h: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let gl = quad::gl(24);
        let br = self.breaks();
        let mut parts = Vec::new();
        for w in br.windows(2) {
            let panels = if matches!(self.family, Family::Spline { .. }) { 1 } else { 4 };
            for (t, wt) in gl.composite(w[0], w[1], panels) {
                parts.push(wt * h(self.value(t), self.deriv(t), t));
            }
        }
        quad::pairwise_sum(parts.into_iter())
    }

    pub fn l2_squared(&self) -> f64 {
        self.integrate(|g, _, _| g * g)
    }

    pub fn deriv_l2_squared(&self) -> f64 {
        self.integrate(|_, d, _| d * d)
    }

    /// `g^(u) = int g(t) e^{iut} dt`.
    pub fn fourier(&self, u: f64) -> Complex64 {
        if self.amplitude == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = u * self.scale;
        let unit = match &self.family {
            Family::Cos2 => {
                let ka = k.abs();
                let re = if ka < 0.5 * PI {
                    PI * PI * sinc(k) / (PI * PI - k * k)
                } else {
                    PI * PI * sinc(PI - ka) / (ka * (PI + ka))
                };
                Complex64::new(re, 0.0)
            }
            Family::Bump => {
                // trapezoid on an even, flat-ended integrand
                let (h, table) = if k.abs() < 100.0 { bump_table(BUMP_NODES_LOW) } else { bump_table(BUMP_NODES_HIGH) };
                let parts = table.iter().enumerate().map(|(j, v)| v * (k * h * j as f64).cos());
                Complex64::new(h * quad::pairwise_sum(parts), 0.0)
            }
            Family::Spline { .. } => self.spline.as_ref().map_or(Complex64::new(0.0, 0.0), |s| s.fourier(k)),
        };
        unit * self.scale * self.amplitude * Complex64::from_polar(1.0, u * self.center)
    }

    pub fn fourier_abs2(&self, u: f64) -> f64 {
        self.fourier(u).norm_sqr()
    }

    /// Autocorrelation `A(sigma) = int g(t) g(t - sigma) dt`.
    pub fn autocorrelation(&self, sigma: f64) -> f64 {
        let (a, b) = self.support();
        let lo = a.max(a + sigma);
        let hi = b.min(b + sigma);
        if hi <= lo || self.amplitude == 0.0 {
            return 0.0;
        }
        let gl = quad::gl(24);
        let panels = 8;
        let mut parts = Vec::with_capacity(24 * panels);
        for (t, w) in gl.composite(lo, hi, panels) {
            parts.push(w * self.value(t) * self.value(t - sigma));
        }
        quad::pairwise_sum(parts.into_iter())
    }

    /// Frequency beyond which `|g^|^2` is negligible for the family.
    pub fn frequency_scale(&self) -> f64 {
        1.0 / self.scale
    }
}

impl FromStr for SamplingFunction {
    type Err = Error;

    /// `bump:<half-width>[@<center>]` or `cos2:<half-width>[@<center>]`.
    fn from_str(s: &str) -> Result<Self> {
        let (fam, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("sampling spec `{s}` lacks `family:`")))?;
        let (w, c) = match rest.split_once('@') {
            Some((w, c)) => (w, Some(c)),
            None => (rest, None),
        };
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{x}` in sampling spec")))
        };
        let width = parse(w)?;
        let center = c.map(parse).transpose()?.unwrap_or(0.0);
        let family = match fam {
            "bump" => Family::Bump,
            "cos2" => Family::Cos2,
            other => return Err(Error::Unknown(other.to_string())),
        };
        Self::new(family, center, width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_fourier(g: &SamplingFunction, u: f64) -> Complex64 {
        let (a, b) = g.support();
        let re = quad::adaptive(a, b, 1e-14, 1e-13, 2000, |t| g.value(t) * (u * t).cos()).value;
        let im = quad::adaptive(a, b, 1e-14, 1e-13, 2000, |t| g.value(t) * (u * t).sin()).value;
        Complex64::new(re, im)
    }

    #[test]
    fn fourier_matches_direct_quadrature() {
        let fams = [
            SamplingFunction::bump(1.3).with_center(0.4),
            SamplingFunction::cos2(0.7).with_center(-0.2),
            SamplingFunction::spline(vec![-1.0, -0.3, 0.2, 1.0], vec![0.0, 0.8, 0.5, 0.0]).unwrap(),
        ];
        for g in &fams {
            for &u in &[0.0, 0.3, 2.0, 4.0 / g.scale, 4.4, 17.0] {
                let d = direct_fourier(g, u);
                assert!((g.fourier(u) - d).norm() < 1e-10, "{:?} u={u}", g.family);
            }
        }
    }

    #[test]
    fn cos2_near_removable_points() {
        let g = SamplingFunction::cos2(1.0);
        for &u in &[PI - 1e-9, PI, PI + 1e-9] {
            assert!((g.fourier(u).re - 0.5).abs() < 1e-8);
        }
        assert!((g.fourier(0.0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dilation_preserves_l2() {
        let g = SamplingFunction::bump(1.0);
        let h = g.dilate(2.0);
        assert!((g.l2_squared() - h.l2_squared()).abs() < 1e-12);
        assert!((g.deriv_l2_squared() / 4.0 - h.deriv_l2_squared()).abs() < 1e-12);
    }

    #[test]
    fn spline_rejects_flat_interval() {
        let r = SamplingFunction::spline(vec![-1.0, 0.0, 0.5, 1.0], vec![0.0, 0.0, 0.0, 0.0]);
        assert!(r.is_err());
        assert!("bump:1@0.5".parse::<SamplingFunction>().is_ok());
        assert!("tri:1".parse::<SamplingFunction>().is_err());
    }
}
