use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{self, euclidean_kernel};
use super::worldline::{Ambient, Point4, Worldline};
use crate::error::{Error, Result};
use crate::quad;
use crate::special::bessel_k1_complex;
use crate::tol;

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Quasi-free state of the free scalar field whose two-point function is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum StateKind {
    Vacuum { mass: f64 },
    Thermal { temperature: f64, mass: f64 },
    Torus { length: f64, mass: f64 },
    /// Kernel of `a` minus kernel of `b`.
    Difference { a: Box<StateKind>, b: Box<StateKind> },
}

impl StateKind {
    pub fn vacuum(mass: f64) -> Self {
        Self::Vacuum { mass }
    }

    pub fn thermal(temperature: f64, mass: f64) -> Self {
        Self::Thermal { temperature, mass }
    }

    pub fn torus(length: f64, mass: f64) -> Self {
        Self::Torus { length, mass }
    }

    pub fn difference(a: StateKind, b: StateKind) -> Self {
        Self::Difference { a: Box::new(a), b: Box::new(b) }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Self::Vacuum { mass } | Self::Thermal { mass, .. } | Self::Torus { mass, .. } => *mass,
            Self::Difference { a, .. } => a.mass(),
        }
    }

    /// Largest temperature appearing in the kernel, zero if none.
    pub fn temperature(&self) -> f64 {
        match self {
            Self::Thermal { temperature, .. } => *temperature,
            Self::Difference { a, b } => a.temperature().max(b.temperature()),
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} must be {}, got {v}", if what == "mass" { "finite and >= 0" } else { "finite and > 0" })));
        let check_mass = |m: f64| if m.is_finite() && m >= 0.0 { Ok(()) } else { bad("mass", m) };
        match self {
            Self::Vacuum { mass } => check_mass(*mass),
            Self::Thermal { temperature, mass } => {
                check_mass(*mass)?;
                if temperature.is_finite() && *temperature > 0.0 {
                    Ok(())
                } else {
                    bad("temperature", *temperature)
                }
            }
            Self::Torus { length, mass } => {
                check_mass(*mass)?;
                if *mass == 0.0 {
                    return Err(Error::MasslessTorus);
                }
                if length.is_finite() && *length > 0.0 {
                    Ok(())
                } else {
                    bad("torus length", *length)
                }
            }
            Self::Difference { a, b } => {
                a.validate()?;
                b.validate()
            }
        }
    }

    /// Spacetime kernel at separation `(dt, dx)` with `dt -> dt - i eps`.
    pub fn kernel(&self, dt: f64, dx: [f64; 3], eps: f64) -> Complex64 {
        let r = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt();
        match self {
            Self::Vacuum { mass } => vacuum_kernel(*mass, Complex64::new(dt, -eps), r),
            Self::Thermal { temperature, mass } => thermal_kernel(*temperature, *mass, dt, eps, r),
            Self::Torus { length, mass } => torus_kernel(*length, *mass, Complex64::new(dt, -eps), dx),
            Self::Difference { a, b } => a.kernel(dt, dx, eps) - b.kernel(dt, dx, eps),
        }
    }

    /// Spectral density `rho(omega)` of the kernel seen by a static observer,
    /// normalized so that `Lambda(sigma) = int rho(omega) e^{-i omega sigma} d omega / (2 pi)`.
    /// `None` for discrete spectra.
    pub fn density(&self, omega: f64) -> Option<f64> {
        match self {
            Self::Vacuum { mass } => Some(if omega > *mass { (omega * omega - mass * mass).sqrt() / (2.0 * PI) } else { 0.0 }),
            Self::Thermal { temperature, mass } => Some(thermal_density(*temperature, *mass, omega)),
            Self::Torus { .. } => None,
            Self::Difference { a, b } => Some(a.density(omega)? - b.density(omega)?),
        }
    }
}

/// `omega sgn(omega) sqrt(omega^2 - m^2) / (2 pi (1 - e^{-omega/T}))` for `|omega| > m`.
pub fn thermal_density(t: f64, m: f64, omega: f64) -> f64 {
    let a = omega.abs();
    if a <= m {
        return if m == 0.0 && omega == 0.0 { t / (2.0 * PI) } else { 0.0 };
    }
    let root = (omega * omega - m * m).sqrt();
    let x = a / t;
    let occupation = if omega > 0.0 { -1.0 / (-x).exp_m1() } else { 1.0 / x.exp_m1() };
    root * occupation / (2.0 * PI)
}

/// Minkowski vacuum kernel for complex time separation `s` and distance `r`.
pub fn vacuum_kernel(m: f64, s: Complex64, r: f64) -> Complex64 {
    if m == 0.0 {
        return -(s * s - r * r).inv() / FOUR_PI2;
    }
    let z = (Complex64::new(r * r, 0.0) - s * s).sqrt();
    bessel_k1_complex(z * m) * m / (z * FOUR_PI2)
}

/// Thermal kernel at inverse temperature `1/t`.
pub fn thermal_kernel(t: f64, m: f64, dt: f64, eps: f64, r: f64) -> Complex64 {
    if m == 0.0 {
        let a = PI * t;
        let s = Complex64::new(dt, -eps);
        let x = s * a;
        if a * r < 1e-3 {
            let sh = x.sinh();
            let csch2 = (sh * sh).inv();
            let coth = x.cosh() / sh;
            let corr = (coth * coth * 4.0 * csch2 + csch2 * csch2 * 2.0) * (a * a * r * r / 6.0);
            return -(csch2 + corr) * (t * t / 4.0);
        }
        let coth = |w: Complex64| w.cosh() / w.sinh();
        let rr = Complex64::new(r, 0.0);
        return (coth((rr - s) * a) + coth((rr + s) * a)) * (t / (8.0 * PI * r));
    }
    let beta = 1.0 / t;
    let theta = Complex64::new(eps, dt);
    let term = |n: i64| {
        let w = theta + beta * n as f64;
        let z = (w * w + r * r).sqrt();
        bessel_k1_complex(z * m) * m / (z * FOUR_PI2)
    };
    let mut sum = term(0);
    let cap: i64 = 4000;
    let mut n: i64 = 1;
    loop {
        let pair = term(n) + term(-n);
        sum += pair;
        let far = n as f64 * beta > 4.0 * (theta.norm() + r);
        if far && (pair.norm() < 1e-16 * sum.norm() || n >= cap) {
            break;
        }
        n += 1;
    }
    // remaining images: both signs, smooth in n
    let start = (n as f64 + 0.5) * beta;
    if m * start < 60.0 {
        let tail = quad::semi_infinite(start, 1.0 / m, f64::INFINITY, 1e-10, 1e-14, |x| euclidean_kernel(m, (x * x + r * r).sqrt()));
        sum += Complex64::new(2.0 * tail.value / beta, 0.0);
    }
    sum
}

/// Torus kernel: image sum of massive Minkowski kernels over `L Z^3`.
pub fn torus_kernel(length: f64, m: f64, s: Complex64, dx: [f64; 3]) -> Complex64 {
    let r0 = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt();
    let mut sum = vacuum_kernel(m, s, r0);
    let rel = tol::LATTICE_SHELL_REL;
    if r0 < 1e-14 * length {
        // shells of equal |n|
        let mut table = lattice::r3(4096);
        let mut n = 1usize;
        loop {
            if n >= table.len() {
                table = lattice::r3(2 * n);
            }
            let r = length * (n as f64).sqrt();
            let c = table[n];
            let term = if c > 0 { vacuum_kernel(m, s, r) * c as f64 } else { Complex64::new(0.0, 0.0) };
            sum += term;
            let f = euclidean_kernel(m, r);
            let tail = 4.0 * PI * r * r * f / (length.powi(3) * m) * (1.0 + 2.0 / (m * r));
            if m * r > 2.0 + m * s.norm() && tail <= rel * sum.norm() {
                break;
            }
            n += 1;
        }
        return sum;
    }
    let reach = r0 + length + 40.0 / m;
    let nmax = (reach / length).ceil() as i64;
    let mut parts = Vec::new();
    for i in -nmax..=nmax {
        for j in -nmax..=nmax {
            for k in -nmax..=nmax {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let y = [dx[0] + i as f64 * length, dx[1] + j as f64 * length, dx[2] + k as f64 * length];
                let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                if r > reach {
                    continue;
                }
                parts.push(vacuum_kernel(m, s, r));
            }
        }
    }
    let re = quad::pairwise_sum(parts.iter().map(|z| z.re));
    let im = quad::pairwise_sum(parts.iter().map(|z| z.im));
    sum + Complex64::new(re, im)
}

/// A two-point function pulled back along a worldline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointFunction {
    pub kind: StateKind,
    pub worldline: Worldline,
}

/// Builds the pulled-back two-point function of `kind` along `wl`.
pub fn build_twopoint(kind: StateKind, wl: &Worldline) -> Result<TwoPointFunction> {
    kind.validate()?;
    if let (StateKind::Torus { length, .. }, Ambient::Torus { length: l2 }) = (&kind, wl.ambient) {
        if (length - l2).abs() > 1e-12 * length {
            return Err(Error::InvalidParameter(format!("worldline lives on torus L={l2}, state on L={length}")));
        }
    }
    Ok(TwoPointFunction { kind, worldline: wl.clone() })
}

impl TwoPointFunction {
    pub fn spacetime_kernel(&self, x: Point4, y: Point4, eps: f64) -> Complex64 {
        self.kind.kernel(x[0] - y[0], [x[1] - y[1], x[2] - y[2], x[3] - y[3]], eps)
    }

    /// `Lambda_eps(gamma(tau), gamma(tau2))`.
    pub fn kernel(&self, tau: f64, tau2: f64, eps: f64) -> Complex64 {
        let x = self.worldline.position(tau);
        let y = self.worldline.position(tau2);
        self.spacetime_kernel(x, y, eps)
    }

    /// Kernel as a function of `sigma = tau - tau2` for translation-invariant cases.
    pub fn stationary_kernel(&self, sigma: f64, eps: f64) -> Complex64 {
        let u = self.worldline.velocity(0.0);
        self.kind.kernel(sigma * u[0], [sigma * u[1], sigma * u[2], sigma * u[3]], eps)
    }

    /// The kernel depends on `tau - tau2` only.
    pub fn is_translation_invariant(&self) -> bool {
        self.worldline.is_inertial()
    }

    /// Whether a frequency-space evaluation is available: a spectral density
    /// or a discrete torus spectrum seen by a static (or, for the vacuum, inertial) observer.
    pub fn has_frequency_form(&self) -> bool {
        fn ok(k: &StateKind, wl: &Worldline) -> bool {
            match k {
                StateKind::Vacuum { .. } => wl.is_inertial(),
                StateKind::Thermal { .. } | StateKind::Torus { .. } => wl.is_static(),
                StateKind::Difference { a, b } => ok(a, wl) && ok(b, wl),
            }
        }
        ok(&self.kind, &self.worldline)
    }

    pub fn density(&self, omega: f64) -> Option<f64> {
        if self.has_frequency_form() {
            self.kind.density(omega)
        } else {
            None
        }
    }

    pub fn mass(&self) -> f64 {
        self.kind.mass()
    }

    /// Hermiticity defect `max |Lambda(t, t') - conj Lambda(t', t)|` over node pairs.
    pub fn hermiticity_defect(&self, nodes: &[f64], eps: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &a in nodes {
            for &b in nodes {
                if a != b {
                    worst = worst.max((self.kernel(a, b, eps) - self.kernel(b, a, eps).conj()).norm());
                }
            }
        }
        worst
    }

    /// `min_c sum conj(c_i) c_j Lambda(t_i, t_j)` over unit `c`, i.e. the
    /// smallest eigenvalue of the kernel matrix.
    pub fn positive_type_margin(&self, nodes: &[f64], eps: f64) -> f64 {
        let n = nodes.len();
        let m = crate::linalg::CMat::from_fn(n, n, |i, j| self.kernel(nodes[i], nodes[j], eps));
        let h = crate::linalg::hermitian_part(&m);
        crate::linalg::lambda_min(&h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn massive_kernel_approaches_massless() {
        let s = Complex64::new(0.3, -0.05);
        let a = vacuum_kernel(1e-7, s, 0.1);
        let b = vacuum_kernel(0.0, s, 0.1);
        assert!((a - b).norm() / b.norm() < 1e-9);
    }

    #[test]
    fn massless_thermal_forms_agree() {
        let t = 1.3;
        for &r in &[0.0, 1e-5, 0.3] {
            let small = thermal_kernel(t, 0.0, 0.4, 0.05, r);
            let images = thermal_kernel(t, 1e-9, 0.4, 0.05, r.max(1e-12));
            assert!((small - images).norm() / small.norm() < 1e-6, "r={r}");
        }
    }

    #[test]
    fn thermal_density_limits() {
        let rho = thermal_density(2.0, 0.0, 1e-9);
        assert!((rho - 2.0 / (2.0 * PI)).abs() < 1e-8);
        // detailed balance
        let w = 0.7;
        let ratio = thermal_density(1.0, 0.2, -w) / thermal_density(1.0, 0.2, w);
        assert!((ratio - (-w).exp()).abs() < 1e-14);
    }

    #[test]
    fn massless_torus_is_rejected() {
        let wl = Worldline::static_origin();
        assert_eq!(build_twopoint(StateKind::torus(1.0, 0.0), &wl).unwrap_err(), Error::MasslessTorus);
    }
}
