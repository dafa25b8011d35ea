use serde::{Deserialize, Serialize};

use super::bound::{wick_dqi_bound, BoundReport, EPS_LEVELS, EPS_WIDTH_RATIO};
use super::sampling::SamplingFunction;
use super::twopoint::{build_twopoint, StateKind, TwoPointFunction};
use super::worldline::Worldline;
use crate::error::{Error, Result};
use crate::quad::Richardson;

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

fn length_scale(kind: &StateKind) -> f64 {
    match kind {
        StateKind::Torus { length, .. } => *length,
        StateKind::Difference { a, b } => length_scale(a).min(length_scale(b)),
        _ => f64::INFINITY,
    }
}

/// Coincidence limit `lim_{eps -> 0} (Lambda_a - Lambda_b)(x, x)` with the
/// points split by `eps` in imaginary time. All implemented states are
/// translation invariant, so the limit does not depend on `x`.
pub fn coincidence_difference(a: &StateKind, b: &StateKind, eps0: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    let t = a.temperature().max(b.temperature());
    let mut e0 = eps0;
    if t > 0.0 {
        e0 = e0.min(0.25 / t);
    }
    e0 = e0.min(0.25 * length_scale(a).min(length_scale(b)));
    let epsilons: Vec<f64> = (0..EPS_LEVELS).map(|k| e0 * 0.5f64.powi(k as i32)).collect();
    let mut magnitude: f64 = 0.0;
    let values: Vec<f64> = epsilons
        .iter()
        .map(|&e| {
            let ka = a.kernel(0.0, [0.0; 3], e);
            let kb = b.kernel(0.0, [0.0; 3], e);
            magnitude = magnitude.max(ka.norm()).max(kb.norm());
            (ka - kb).re
        })
        .collect();
    // the difference of two Hadamard kernels is even in the splitting
    let rich = Richardson::new(&values, 2.0, 2.0, 2);
    let best = rich.best();
    let floor = 1e-13 * magnitude + 1e-12 * best.abs();
    if !rich.cauchy_ok(0.5, floor) {
        return Err(Error::SingularDifference(format!(
            "coincidence values {values:?} do not settle (increments {:?})",
            rich.increments()
        )));
    }
    Ok(Estimate { value: best, error: rich.error() + floor })
}

fn same_worldline(omega: &TwoPointFunction, omega0: &TwoPointFunction, wl: &Worldline) -> Result<()> {
    if &omega.worldline != wl || &omega0.worldline != wl {
        return Err(Error::WorldMismatch {
            expected: "kernels pulled back along the given worldline".into(),
            found: "a kernel on another worldline".into(),
        });
    }
    Ok(())
}

/// `int g(tau)^2 (Lambda_omega - Lambda_omega0)(tau, tau) d tau`.
pub fn wick_difference_expectation(
    omega: &TwoPointFunction,
    omega0: &TwoPointFunction,
    g: &SamplingFunction,
    wl: &Worldline,
) -> Result<Estimate> {
    same_worldline(omega, omega0, wl)?;
    if omega.kind == omega0.kind || g.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let d = coincidence_difference(&omega.kind, &omega0.kind, g.width() / EPS_WIDTH_RATIO)?;
    let l2 = g.l2_squared();
    Ok(Estimate { value: d.value * l2, error: d.error * l2 + 1e-14 * (d.value * l2).abs() })
}

/// `omega(phi^2(g^2 along wl))`, normalized so the Minkowski vacuum of the same mass gives zero.
pub fn wick_one_point(omega: &TwoPointFunction, g: &SamplingFunction, wl: &Worldline) -> Result<Estimate> {
    let vac = build_twopoint(StateKind::vacuum(omega.mass()), wl)?;
    wick_difference_expectation(omega, &vac, g, wl)
}

/// Outcome of the independence identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceDefect {
    /// `Q(f, omega) - Q(f, omega0)`.
    pub bound_difference: f64,
    /// `omega(phi^2(f)) - omega0(phi^2(f))`.
    pub expectation_difference: f64,
    pub defect: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `Q(f, omega) - Q(f, omega0) = omega(phi^2(f)) - omega0(phi^2(f))`.
pub fn independence_identity_check(
    g: &SamplingFunction,
    wl: &Worldline,
    omega: &TwoPointFunction,
    omega0: &TwoPointFunction,
) -> Result<IndependenceDefect> {
    same_worldline(omega, omega0, wl)?;
    if omega.kind == omega0.kind {
        return Ok(IndependenceDefect {
            bound_difference: 0.0,
            expectation_difference: 0.0,
            defect: 0.0,
            relative: 0.0,
            tolerance: 0.0,
            pass: true,
        });
    }
    let q = wick_dqi_bound(g, wl, omega)?;
    let q0 = wick_dqi_bound(g, wl, omega0)?;
    let diff = wick_difference_expectation(omega, omega0, g, wl)?;
    let lhs = q.value - q0.value;
    let defect = (lhs - diff.value).abs();
    let tolerance = q.total_error + q0.total_error + diff.error;
    let scale = q0.value.abs().max(q.value.abs()).max(f64::MIN_POSITIVE);
    Ok(IndependenceDefect {
        bound_difference: lhs,
        expectation_difference: diff.value,
        defect,
        relative: defect / scale,
        tolerance,
        pass: defect <= tolerance.max(1e-9 * scale),
    })
}

/// Absolute bound `Q(f, omega0) - omega0(phi^2(f))`, evaluated for every
/// reference and required to agree across them.
pub fn wick_aqi_by_rearrangement(
    g: &SamplingFunction,
    wl: &Worldline,
    references: &[TwoPointFunction],
) -> Result<BoundReport> {
    let first = references
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one reference state is required".into()))?;
    let mass = first.mass();
    if references.iter().any(|r| r.mass() != mass) {
        return Err(Error::InvalidParameter("references must share one mass".into()));
    }
    let mut reports = Vec::with_capacity(references.len());
    for r in references {
        let q = wick_dqi_bound(g, wl, r)?;
        let one = wick_one_point(r, g, wl)?;
        let mut rep = q.clone();
        rep.value = q.value - one.value;
        rep.total_error = q.total_error + one.error;
        reports.push(rep);
    }
    let lo = reports.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let hi = reports.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let worst = reports.iter().map(|r| r.total_error).fold(0.0, f64::max);
    let spread = hi - lo;
    let tol = 2.0 * worst + 1e-9 * hi.abs().max(lo.abs());
    if spread > tol {
        return Err(Error::ReferenceDependence { spread, tol });
    }
    let mut out = reports.swap_remove(0);
    out.total_error = out.total_error.max(spread);
    Ok(out)
}

/// Wick-ordering ambiguity `phi^2 -> phi^2 + (c1 R + c2 m^2) 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingShift {
    pub c1: f64,
    pub c2: f64,
    pub curvature_scalar: f64,
    pub mass: f64,
}

/// Expectations before and after an ordering shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedExpectations {
    pub shift: f64,
    pub one_point: Vec<f64>,
    pub shifted_one_point: Vec<f64>,
    /// Largest change of any pairwise difference of one-point functions.
    pub difference_drift: f64,
}

/// Applies the ordering shift to one-point functions of `phi^2(f)` with `int f = integral_f`.
pub fn wick_ordering_shift(one_point: &[f64], integral_f: f64, s: OrderingShift) -> ShiftedExpectations {
    let shift = (s.c1 * s.curvature_scalar + s.c2 * s.mass * s.mass) * integral_f;
    let shifted: Vec<f64> = one_point.iter().map(|v| v + shift).collect();
    let mut drift: f64 = 0.0;
    for i in 0..one_point.len() {
        for j in 0..one_point.len() {
            let before = one_point[i] - one_point[j];
            let after = shifted[i] - shifted[j];
            drift = drift.max((after - before).abs());
        }
    }
    ShiftedExpectations { shift, one_point: one_point.to_vec(), shifted_one_point: shifted, difference_drift: drift }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_coincidence_is_t_squared_over_twelve() {
        for t in [0.5, 1.0, 2.0] {
            let d = coincidence_difference(&StateKind::thermal(t, 0.0), &StateKind::vacuum(0.0), 0.04).unwrap();
            assert!((d.value - t * t / 12.0).abs() < 1e-10, "T={t}: {}", d.value);
        }
    }

    #[test]
    fn unequal_masses_are_singular() {
        let r = coincidence_difference(&StateKind::vacuum(1.0), &StateKind::vacuum(0.0), 0.04);
        assert!(matches!(r, Err(Error::SingularDifference(_))));
    }

    #[test]
    fn ordering_shift_leaves_differences() {
        let s = OrderingShift { c1: 1.0 / 6.0, c2: 0.0, curvature_scalar: 12.0, mass: 0.0 };
        let out = wick_ordering_shift(&[0.1, 0.4], 1.5, s);
        assert!((out.shift - 3.0).abs() < 1e-15);
        assert!(out.difference_drift < 1e-12);
    }
}
