use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice;
use super::sampling::SamplingFunction;
use super::twopoint::{StateKind, TwoPointFunction};
use super::worldline::Worldline;
use crate::error::{Error, Result};
use crate::quad::{self, Richardson};
use crate::tol;

/// Unit tag of Wick-square bounds in four dimensions.
pub const BOUND_UNIT: &str = "length^-2";

/// Number of levels in the epsilon ladder.
pub const EPS_LEVELS: usize = 7;
/// Support width divided by the first ladder step.
pub const EPS_WIDTH_RATIO: f64 = 50.0;
/// Richardson order used on the ladder.
pub const RICHARDSON_ORDER: usize = 2;

const INNER_REL: f64 = 1e-11;
const OUTER_REL: f64 = 1e-10;
const PANEL_PHASE: f64 = 20.0;
// relative weight of frequencies beyond the working cutoff
const CUT_REL: f64 = 1e-13;
// the same for the epsilon ladder, whose accuracy is set by the extrapolation
const GENERAL_CUT_REL: f64 = 1e-10;

/// Evaluation route for the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    Stationary,
    General,
}

/// Diagnostics of the epsilon ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    pub order: usize,
    pub error: f64,
}

/// A quantum-inequality bound together with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub unit: String,
    pub path: EvalPath,
    pub alpha_truncation_error: f64,
    pub inner_quadrature_error: f64,
    pub extrapolation: Option<Extrapolation>,
    pub total_error: f64,
    pub converged: bool,
}

impl BoundReport {
    fn exact(value: f64, path: EvalPath) -> Self {
        Self {
            value,
            unit: BOUND_UNIT.into(),
            path,
            alpha_truncation_error: 0.0,
            inner_quadrature_error: 0.0,
            extrapolation: None,
            total_error: 0.0,
            converged: true,
        }
    }
}

fn check_compatible(wl: &Worldline, reference: &TwoPointFunction) -> Result<()> {
    if &reference.worldline != wl {
        return Err(Error::WorldMismatch {
            expected: "worldline of the reference two-point function".into(),
            found: "a different worldline".into(),
        });
    }
    if let StateKind::Difference { .. } = reference.kind {
        return Err(Error::InvalidState("a difference kernel is not a reference state".into()));
    }
    Ok(())
}

/// The difference-QEI bound `(1/pi) int_0^inf I(alpha) d alpha`, choosing the
/// stationary route when a frequency form exists.
pub fn wick_dqi_bound(g: &SamplingFunction, wl: &Worldline, reference: &TwoPointFunction) -> Result<BoundReport> {
    let path = if reference.has_frequency_form() { EvalPath::Stationary } else { EvalPath::General };
    wick_dqi_bound_path(g, wl, reference, path)
}

pub fn wick_dqi_bound_path(
    g: &SamplingFunction,
    wl: &Worldline,
    reference: &TwoPointFunction,
    path: EvalPath,
) -> Result<BoundReport> {
    check_compatible(wl, reference)?;
    if g.is_zero() {
        return Ok(BoundReport::exact(0.0, path));
    }
    let (a, b) = wl.proper_time_range();
    let (ga, gb) = g.support();
    if ga < a || gb > b {
        return Err(Error::InvalidParameter(format!(
            "sampling support [{ga}, {gb}] exceeds the worldline range [{a}, {b}]"
        )));
    }
    match path {
        EvalPath::Stationary => {
            if !reference.has_frequency_form() {
                return Err(Error::Unsupported("no frequency form for this state along this worldline".into()));
            }
            match reference.kind {
                StateKind::Torus { length, mass } => torus_stationary(g, length, mass),
                _ => density_stationary(g, reference),
            }
        }
        EvalPath::General => general_path(g, reference),
    }
}

/// `R(u) = int_{-inf}^u rho`, split at the mass gap and evaluated with a square-root substitution there.
struct Cumulative<'a> {
    rho: &'a dyn Fn(f64) -> f64,
    m: f64,
    temperature: f64,
    below_gap: f64,
}

impl<'a> Cumulative<'a> {
    fn new(rho: &'a dyn Fn(f64) -> f64, m: f64, temperature: f64) -> Self {
        let mut c = Self { rho, m, temperature, below_gap: 0.0 };
        c.below_gap = c.negative_tail(m);
        c
    }

    /// `int_a^inf rho(-w) dw` for `a >= m`.
    fn negative_tail(&self, a: f64) -> f64 {
        if self.temperature <= 0.0 {
            return 0.0;
        }
        let rho = self.rho;
        let m = self.m;
        let t = self.temperature;
        if m > 0.0 {
            let v0 = (a - m).max(0.0).sqrt();
            quad::semi_infinite(v0, t.sqrt(), f64::INFINITY, INNER_REL, 1e-15, |v| 2.0 * v * rho(-(m + v * v))).value
        } else {
            quad::semi_infinite(a, t, f64::INFINITY, INNER_REL, 1e-15, |w| rho(-w)).value
        }
    }

    fn at(&self, u: f64) -> f64 {
        let m = self.m;
        if u <= -m {
            self.negative_tail(-u)
        } else if u <= m {
            self.below_gap
        } else if m > 0.0 {
            let rho = self.rho;
            self.below_gap
                + quad::adaptive(0.0, (u - m).sqrt(), 0.0, INNER_REL, 200, |v| 2.0 * v * rho(m + v * v)).value
        } else {
            let rho = self.rho;
            self.below_gap + quad::adaptive(0.0, u, 0.0, INNER_REL, 200, rho).value
        }
    }
}

/// `(1/2 pi^2) int |g^(u)|^2 R(u) du`: the alpha integral of the per-alpha
/// spectral integrand taken in closed form.
fn density_stationary(g: &SamplingFunction, reference: &TwoPointFunction) -> Result<BoundReport> {
    let m = reference.mass();
    let temperature = reference.kind.temperature();
    let rho = |w: f64| reference.kind.density(w).unwrap_or(0.0);
    let cumulative = Cumulative::new(&rho, m, temperature);
    let cut = frequency_cutoff(g, CUT_REL).max(2.0 * m);
    let su = g.frequency_scale();
    let upper = quad::semi_infinite(m, su, cut, OUTER_REL, tol::ALPHA_TAIL_REL, |u| g.fourier_abs2(u) * cumulative.at(u));
    let mut value = upper.value;
    let mut qerr = upper.quadrature_error;
    let mut tail = upper.tail_error;
    let mut converged = upper.converged;
    if temperature > 0.0 {
        if m > 0.0 {
            let gap = quad::adaptive(-m, m, 0.0, OUTER_REL, 200, |u| g.fourier_abs2(u));
            value += gap.value * cumulative.below_gap;
            qerr += gap.error * cumulative.below_gap;
            converged &= gap.converged;
        }
        let lower =
            quad::semi_infinite(m, su.min(temperature), cut, OUTER_REL, tol::ALPHA_TAIL_REL, |w| g.fourier_abs2(-w) * cumulative.at(-w));
        value += lower.value;
        qerr += lower.quadrature_error;
        tail += lower.tail_error;
        converged &= lower.converged;
    }
    let norm = 1.0 / (2.0 * PI * PI);
    let value = value * norm;
    let tail = tail * norm + CUT_REL * value.abs();
    let qerr = qerr * norm;
    let inner = 10.0 * INNER_REL * value.abs();
    Ok(BoundReport {
        value,
        unit: BOUND_UNIT.into(),
        path: EvalPath::Stationary,
        alpha_truncation_error: tail,
        inner_quadrature_error: inner + qerr,
        extrapolation: None,
        total_error: tail + inner + qerr,
        converged,
    })
}

/// `G(omega) = int_omega^inf |g^(u)|^2 du`.
fn upper_power(g: &SamplingFunction, omega: f64) -> f64 {
    quad::semi_infinite(omega, g.frequency_scale(), f64::INFINITY, 1e-13, 1e-15, |u| g.fourier_abs2(u)).value
}

/// Torus vacuum along a static worldline: `(1/pi) sum_N r3(N) G(omega_N) / (2 omega_N L^3)`
/// over the discrete spectrum, with a continuum estimate for the remaining shells.
fn torus_stationary(g: &SamplingFunction, length: f64, m: f64) -> Result<BoundReport> {
    let dk = 2.0 * PI / length;
    let su = g.frequency_scale();
    let mut kmax = 64.0 * su;
    let cap = 4_000_000usize;
    loop {
        let nmax = ((kmax / dk).powi(2).floor() as usize).max(1).min(cap);
        let table = lattice::r3(nmax);
        let shells: Vec<usize> = (0..=nmax).filter(|&n| table[n] > 0).collect();
        let omegas: Vec<f64> = shells.iter().map(|&n| (m * m + dk * dk * n as f64).sqrt()).collect();
        let mut big_g = vec![0.0; shells.len()];
        let last = shells.len() - 1;
        big_g[last] = upper_power(g, omegas[last]);
        for i in (0..last).rev() {
            let (a, b) = (omegas[i], omegas[i + 1]);
            let piece = if (b - a) * g.scale > 0.25 {
                quad::adaptive(a, b, 0.0, 1e-13, 200, |u| g.fourier_abs2(u)).value
            } else {
                quad::gl(8).integrate(a, b, |u| g.fourier_abs2(u))
            };
            big_g[i] = big_g[i + 1] + piece;
        }
        let sum = quad::pairwise_sum(
            shells.iter().zip(&omegas).zip(&big_g).map(|((&n, &w), &gg)| table[n] as f64 * gg / (2.0 * w * length.powi(3))),
        ) / PI;
        let count: u64 = shells.iter().map(|&n| table[n]).sum();
        let kc = dk * (3.0 * count as f64 / (4.0 * PI)).cbrt();
        let tail = quad::semi_infinite(kc, su, f64::INFINITY, 1e-8, 1e-12, |k| {
            let w = (m * m + k * k).sqrt();
            4.0 * PI * k * k / (2.0 * PI).powi(3) * upper_power(g, w) / (2.0 * w)
        });
        let tail_value = tail.value / PI;
        let tail_err = tail_value.abs() * (2.0 * PI / (kc * length)).min(1.0);
        let value = sum + tail_value;
        if tail_err <= 1e-10 * value.abs() || nmax >= cap {
            return Ok(BoundReport {
                value,
                unit: BOUND_UNIT.into(),
                path: EvalPath::Stationary,
                alpha_truncation_error: tail_err,
                inner_quadrature_error: 1e-12 * value.abs(),
                extrapolation: None,
                total_error: tail_err + 1e-12 * value.abs(),
                converged: tail_err <= 1e-10 * value.abs(),
            });
        }
        kmax *= 2.0;
    }
}

/// Frequency beyond which `int u^2 |g^|^2` has a relative tail below `rel`.
pub fn frequency_cutoff(g: &SamplingFunction, rel: f64) -> f64 {
    let r = quad::semi_infinite(0.0, g.frequency_scale(), f64::INFINITY, 1e-10, rel, |u| u * u * g.fourier_abs2(u));
    r.cutoff
}

/// First ladder step for a reference kernel.
pub fn eps_start(g: &SamplingFunction, kind: &StateKind) -> f64 {
    let base = g.width() / EPS_WIDTH_RATIO;
    let t = kind.temperature();
    if t > 0.0 {
        base.min(0.25 / t)
    } else {
        base
    }
}

/// Quadrature nodes on `[0, width]`: geometric panels towards zero below `h`,
/// uniform panels of width `h` above.
fn sigma_nodes(width: f64, h: f64, eps: f64, refine: bool) -> Vec<(f64, f64)> {
    let rule = quad::gl(32);
    let mut panels = Vec::new();
    let mut hi = h.min(width);
    while hi > 0.5 * eps {
        panels.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    panels.push((0.0, hi));
    let mut lo = h;
    while lo < width {
        let up = (lo + h).min(width);
        panels.push((lo, up));
        lo = up;
    }
    let mut nodes = Vec::new();
    for (a, b) in panels {
        if refine {
            let m = 0.5 * (a + b);
            nodes.extend(rule.mapped(a, m));
            nodes.extend(rule.mapped(m, b));
        } else {
            nodes.extend(rule.mapped(a, b));
        }
    }
    nodes
}

/// `B(sigma) = int g(tau) g(tau - sigma) Lambda(tau, tau - sigma) d tau`.
fn b_values(g: &SamplingFunction, reference: &TwoPointFunction, nodes: &[(f64, f64)], eps: f64) -> Vec<Complex64> {
    if reference.is_translation_invariant() {
        nodes
            .par_iter()
            .map(|&(s, _)| reference.stationary_kernel(s, eps) * g.autocorrelation(s))
            .collect()
    } else {
        let (a, b) = g.support();
        nodes
            .par_iter()
            .map(|&(s, _)| {
                let lo = a.max(a + s);
                let hi = b.min(b + s);
                if hi <= lo {
                    return Complex64::new(0.0, 0.0);
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, w) in quad::gl(24).composite(lo, hi, 8) {
                    acc += reference.kernel(t, t - s, eps) * (w * g.value(t) * g.value(t - s));
                }
                acc
            })
            .collect()
    }
}

struct Level {
    value: f64,
    qerr: f64,
    tail: f64,
}

fn level_value(
    g: &SamplingFunction,
    reference: &TwoPointFunction,
    eps: f64,
    alpha_max: f64,
    refine: bool,
) -> Result<Level> {
    let width = g.width();
    let h = (width / 64.0).min(PANEL_PHASE / alpha_max);
    let nodes = sigma_nodes(width, h, eps, refine);
    let bs = b_values(g, reference, &nodes, eps);
    let weighted: Vec<(f64, Complex64)> = nodes.iter().zip(&bs).map(|(&(s, w), &b)| (s, b * w)).collect();
    let integrand = |alpha: f64| {
        2.0 * quad::pairwise_sum(weighted.iter().map(|&(s, b)| {
            let (sn, cs) = (alpha * s).sin_cos();
            b.re * cs + b.im * sn
        }))
    };
    let i0 = integrand(0.0);
    let floor = 1e-9 * i0.abs() + 1e-13;
    let bad = Cell::new(None::<(f64, f64)>);
    let r = quad::semi_infinite(0.0, g.frequency_scale(), alpha_max, OUTER_REL, tol::ALPHA_TAIL_REL, |alpha| {
        let v = integrand(alpha);
        if v < -floor && bad.get().is_none() {
            bad.set(Some((alpha, v)));
        }
        v
    });
    if let Some((alpha, value)) = bad.get() {
        return Err(Error::NegativeIntegrand { alpha, value });
    }
    Ok(Level { value: r.value / PI, qerr: r.quadrature_error / PI, tail: r.tail_error / PI })
}

fn general_path(g: &SamplingFunction, reference: &TwoPointFunction) -> Result<BoundReport> {
    let alpha_max = frequency_cutoff(g, GENERAL_CUT_REL);
    let eps0 = eps_start(g, &reference.kind);
    let epsilons: Vec<f64> = (0..EPS_LEVELS).map(|k| eps0 * 0.5f64.powi(k as i32)).collect();
    let levels: Vec<Level> = epsilons
        .iter()
        .map(|&e| level_value(g, reference, e, alpha_max, false))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = levels.iter().map(|l| l.value).collect();
    let rich = Richardson::new(&values, 2.0, 1.0, RICHARDSON_ORDER);
    let best = rich.best();
    let floor = 1e-11 * best.abs().max(1e-300);
    if !rich.cauchy_ok(0.9, floor) {
        return Err(Error::ExtrapolationDivergence(format!("ladder increments {:?}", rich.increments())));
    }
    let finest = epsilons[EPS_LEVELS - 1];
    let refined = level_value(g, reference, finest, alpha_max, true)?;
    let sigma_err = (refined.value - values[EPS_LEVELS - 1]).abs();
    let last = &levels[EPS_LEVELS - 1];
    let cut_err = GENERAL_CUT_REL * best.abs();
    let alpha_err = last.tail + cut_err;
    let inner = last.qerr + sigma_err;
    let extrap = Extrapolation {
        epsilons,
        values,
        increments: rich.increments(),
        order: RICHARDSON_ORDER,
        error: rich.error(),
    };
    Ok(BoundReport {
        value: best,
        unit: BOUND_UNIT.into(),
        path: EvalPath::General,
        alpha_truncation_error: alpha_err,
        inner_quadrature_error: inner,
        total_error: alpha_err + inner + extrap.error,
        extrapolation: Some(extrap),
        converged: true,
    })
}

/// The massless static closed form `C int g'^2` with `C = 1/(8 pi^2)`.
pub const MASSLESS_STATIC_CONSTANT: f64 = 1.0 / (8.0 * PI * PI);

pub fn massless_static_closed_form(g: &SamplingFunction) -> f64 {
    MASSLESS_STATIC_CONSTANT * g.deriv_l2_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::twopoint::build_twopoint;

    #[test]
    fn stationary_massless_matches_closed_form() {
        let wl = Worldline::static_origin();
        let tp = build_twopoint(StateKind::vacuum(0.0), &wl).unwrap();
        for g in [SamplingFunction::bump(1.0), SamplingFunction::cos2(0.8)] {
            let r = wick_dqi_bound(&g, &wl, &tp).unwrap();
            let exact = massless_static_closed_form(&g);
            assert!((r.value - exact).abs() / exact < 1e-8, "{} vs {exact}", r.value);
        }
    }

    #[test]
    fn zero_sampling_gives_zero() {
        let wl = Worldline::static_origin();
        let tp = build_twopoint(StateKind::vacuum(1.0), &wl).unwrap();
        let r = wick_dqi_bound(&SamplingFunction::zero(1.0), &wl, &tp).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
