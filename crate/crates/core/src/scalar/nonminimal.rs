use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sampling::SamplingFunction;
use super::twopoint::StateKind;
use super::wick::{coincidence_difference, Estimate};
use super::bound::EPS_WIDTH_RATIO;
use super::worldline::Worldline;
use crate::error::{Error, Result};
use crate::quad;

/// Curvature data along the worldline, taken constant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Curvature {
    /// `Ric(u, u)` for the unit tangent `u`.
    pub ricci_uu: f64,
    /// Ricci scalar `R`.
    pub scalar: f64,
}

/// Smearing `S(f)` of the Wick square arising from non-minimal coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonMinimalSmearing {
    pub xi: f64,
    pub curvature: Curvature,
    /// `u u : W = xi Ric(u,u) - xi (1 - 4 xi) R / 2`.
    pub w_uu: f64,
    /// `int g^2 (u u : W) d tau`, the state-independent part.
    pub uw_term: f64,
    /// `int (g^2 (u u : W) + 2 xi g'^2) d tau`.
    pub total_weight: f64,
    /// Set when `xi` lies outside `[0, 1/4]`.
    pub xi_out_of_range: bool,
    #[serde(skip)]
    g: Option<SamplingFunction>,
}

impl NonMinimalSmearing {
    /// Weight function multiplying `u(gamma(tau))`.
    pub fn weight(&self, tau: f64) -> f64 {
        match &self.g {
            Some(g) => {
                let v = g.value(tau);
                let d = g.deriv(tau);
                v * v * self.w_uu + 2.0 * self.xi * d * d
            }
            None => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.total_weight == 0.0 && self.uw_term == 0.0
    }
}

/// Builds `S(f)` for coupling `xi` along `wl`.
pub fn nonminimal_smearing(g: &SamplingFunction, _wl: &Worldline, xi: f64, curvature: Curvature) -> NonMinimalSmearing {
    let w_uu = xi * curvature.ricci_uu - 0.5 * xi * (1.0 - 4.0 * xi) * curvature.scalar;
    let (uw, der) = if xi == 0.0 { (0.0, 0.0) } else { (w_uu * g.l2_squared(), 2.0 * xi * g.deriv_l2_squared()) };
    NonMinimalSmearing {
        xi,
        curvature,
        w_uu,
        uw_term: uw,
        total_weight: uw + der,
        xi_out_of_range: !(0.0..=0.25).contains(&xi),
        g: Some(g.clone()),
    }
}

/// Temperatures, channel values and fitted power-law exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub temperatures: Vec<f64>,
    pub wick_values: Vec<Estimate>,
    pub energy_values: Vec<Estimate>,
    pub wick_exponent: f64,
    pub energy_exponent: f64,
    pub regime_warning: bool,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Thermal energy density `int d^3k/(2 pi)^3 omega_k / (e^{omega_k/T} - 1)` by quadrature.
pub fn thermal_energy_density(t: f64, m: f64) -> Estimate {
    let r = quad::semi_infinite(0.0, t, f64::INFINITY, 1e-13, 1e-16, |k| {
        let w = (k * k + m * m).sqrt();
        if w == 0.0 {
            return 0.0;
        }
        k * k * w / (2.0 * PI * PI) / (w / t).exp_m1()
    });
    Estimate { value: r.value, error: r.quadrature_error + r.tail_error }
}

/// Fits the temperature scaling of the non-minimal Wick-square smearing and
/// of the smeared energy density for the massless field.
pub fn thermal_scaling_probe(
    temperatures: &[f64],
    g: &SamplingFunction,
    wl: &Worldline,
    xi: f64,
) -> Result<ScalingReport> {
    if temperatures.len() < 4 {
        return Err(Error::InvalidParameter("at least four temperatures are required".into()));
    }
    if temperatures.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidParameter("temperatures must be positive".into()));
    }
    if !wl.is_static() {
        return Err(Error::Unsupported("thermal scaling probe needs a static worldline".into()));
    }
    let s = nonminimal_smearing(g, wl, xi, Curvature::default());
    if s.total_weight == 0.0 {
        return Err(Error::InvalidParameter("the smearing vanishes for this coupling".into()));
    }
    let width = g.width();
    let l2 = g.l2_squared();
    let mut wick = Vec::new();
    let mut energy = Vec::new();
    for &t in temperatures {
        let d = coincidence_difference(&StateKind::thermal(t, 0.0), &StateKind::vacuum(0.0), width / EPS_WIDTH_RATIO)?;
        wick.push(Estimate { value: d.value * s.total_weight, error: d.error * s.total_weight.abs() });
        let e = thermal_energy_density(t, 0.0);
        energy.push(Estimate { value: e.value * l2, error: e.error * l2 });
    }
    let wv: Vec<f64> = wick.iter().map(|e| e.value).collect();
    let ev: Vec<f64> = energy.iter().map(|e| e.value).collect();
    Ok(ScalingReport {
        temperatures: temperatures.to_vec(),
        wick_exponent: loglog_slope(temperatures, &wv),
        energy_exponent: loglog_slope(temperatures, &ev),
        wick_values: wick,
        energy_values: energy,
        regime_warning: temperatures.iter().any(|t| t * width < 5.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_flat_weight() {
        let g = SamplingFunction::bump(1.0);
        let wl = Worldline::static_origin();
        let s = nonminimal_smearing(&g, &wl, 1.0 / 6.0, Curvature::default());
        let d = g.deriv(0.3);
        assert!((s.weight(0.3) - d * d / 3.0).abs() < 1e-15);
        assert!(nonminimal_smearing(&g, &wl, 0.0, Curvature { ricci_uu: 2.0, scalar: 1.0 }).is_zero());
    }

    #[test]
    fn energy_density_closed_form() {
        let e = thermal_energy_density(2.0, 0.0);
        let exact = PI * PI * 16.0 / 30.0;
        assert!((e.value - exact).abs() / exact < 1e-11);
    }
}
