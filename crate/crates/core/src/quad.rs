//! Quadrature rules: Gauss-Legendre, adaptive Gauss-Kronrod on finite and
//! semi-infinite ranges, and Richardson extrapolation.

use std::collections::BinaryHeap;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        pairwise_sum(self.mapped(a, b).map(|(x, w)| w * f(x)))
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let lo = a + h * p as f64;
                self.mapped(lo, lo + h).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Shared Gauss-Legendre rules of common orders.
pub fn gl(n: usize) -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static R8: OnceLock<GaussLegendre> = OnceLock::new();
    static R12: OnceLock<GaussLegendre> = OnceLock::new();
    static R16: OnceLock<GaussLegendre> = OnceLock::new();
    static R24: OnceLock<GaussLegendre> = OnceLock::new();
    static R32: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = match n {
        8 => &R8,
        12 => &R12,
        16 => &R16,
        24 => &R24,
        32 => &R32,
        _ => panic!("no shared Gauss-Legendre rule of order {n}"),
    };
    cell.get_or_init(|| GaussLegendre::new(n))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    pairwise(&v)
}

fn pairwise(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let m = v.len() / 2;
        pairwise(&v[..m]) + pairwise(&v[m..])
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (Kronrod value, |Kronrod - Gauss|).
pub fn gk15(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Adaptive Gauss-Kronrod integration on `[a, b]` with a global error heap.
pub fn adaptive(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Integral {
    adaptive_with_breaks(&[a, b], abs_tol, rel_tol, max_panels, &mut f)
}

/// Adaptive integration starting from a given partition.
pub fn adaptive_with_breaks(
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
    f: &mut impl FnMut(f64) -> f64,
) -> Integral {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(w[0], w[1], f);
            evals += 15;
            heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
        }
    }
    let totals = |h: &BinaryHeap<Panel>| {
        let mut ps: Vec<Panel> = h.iter().copied().collect();
        ps.sort_by(|x, y| x.a.total_cmp(&y.a));
        (pairwise_sum(ps.iter().map(|p| p.value)), pairwise_sum(ps.iter().map(|p| p.err)))
    };
    let (mut value, mut err) = totals(&heap);
    let mut converged = err <= abs_tol.max(rel_tol * value.abs());
    while !converged && heap.len() < max_panels {
        let p = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(p.a, m, f);
        let (v2, e2) = gk15(m, p.b, f);
        evals += 30;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
        value += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        converged = err <= abs_tol.max(rel_tol * value.abs());
    }
    let (value, err) = totals(&heap);
    Integral { value, error: err, evaluations: evals, converged: converged || err <= abs_tol.max(rel_tol * value.abs()) }
}

/// Result of a semi-infinite integration with explicit tail accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral {
    pub value: f64,
    pub quadrature_error: f64,
    pub tail_error: f64,
    pub cutoff: f64,
    pub converged: bool,
}

const CHUNK_PANELS: usize = 8;

/// Integrate over `[a, upper)` by doubling chunks starting at width `scale`
/// until a chunk contributes less than `tail_rel` of the running total.
/// `upper` may be infinite.
pub fn semi_infinite(
    a: f64,
    scale: f64,
    upper: f64,
    rel_tol: f64,
    tail_rel: f64,
    mut f: impl FnMut(f64) -> f64,
) -> TailIntegral {
    let mut lo = a;
    let mut width = scale;
    let mut total: f64 = 0.0;
    let mut qerr = 0.0;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for chunk in 0..80 {
        let hi = (lo + width).min(upper);
        // several starting panels guard against accidental Gauss-Kronrod agreement on wide chunks
        let breaks: Vec<f64> = (0..=CHUNK_PANELS).map(|k| lo + (hi - lo) * k as f64 / CHUNK_PANELS as f64).collect();
        let r = adaptive_with_breaks(&breaks, rel_tol * total.abs(), rel_tol, 400, &mut f);
        total += r.value;
        qerr += r.error;
        let small = r.value.abs() <= tail_rel * total.abs() || (total == 0.0 && r.value == 0.0);
        let shrinking = r.value.abs() <= last;
        last = r.value.abs();
        lo = hi;
        if hi >= upper {
            converged = true;
            last = 0.0;
            break;
        }
        if chunk >= 2 && small && shrinking {
            converged = true;
            break;
        }
        width *= 2.0;
    }
    TailIntegral { value: total, quadrature_error: qerr, tail_error: last, cutoff: lo, converged }
}

/// Richardson tableau for values at step sizes `h_k = h_0 r^{-k}` whose error
/// expansion contains powers `h^{p}, h^{2p}, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Richardson {
    pub tableau: Vec<Vec<f64>>,
    pub order: usize,
}

impl Richardson {
    pub fn new(values: &[f64], ratio: f64, power: f64, order: usize) -> Self {
        let n = values.len();
        let mut t = vec![vec![f64::NAN; order + 1]; n];
        for k in 0..n {
            t[k][0] = values[k];
            for j in 1..=order.min(k) {
                let f = ratio.powf(power * j as f64);
                t[k][j] = t[k][j - 1] + (t[k][j - 1] - t[k - 1][j - 1]) / (f - 1.0);
            }
        }
        Self { tableau: t, order }
    }

    fn col(&self) -> usize {
        self.order.min(self.tableau.len().saturating_sub(1))
    }

    pub fn best(&self) -> f64 {
        self.tableau[self.tableau.len() - 1][self.col()]
    }

    /// Successive differences of the highest-order column.
    pub fn increments(&self) -> Vec<f64> {
        let j = self.col();
        let col: Vec<f64> = self.tableau.iter().skip(j).map(|r| r[j]).collect();
        col.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    pub fn error(&self) -> f64 {
        self.increments().last().copied().unwrap_or(f64::INFINITY)
    }

    /// Cauchy criterion: the last increment is no larger than the first, and
    /// the last two increments are not growing by more than `slack`.
    pub fn cauchy_ok(&self, slack: f64, floor: f64) -> bool {
        let inc = self.increments();
        if inc.len() < 2 {
            return true;
        }
        let last = inc[inc.len() - 1];
        let prev = inc[inc.len() - 2];
        last <= floor || (last <= slack * prev.max(floor) && last <= inc[0].max(floor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gk15_exact_on_polynomials() {
        let (v, _) = gk15(-1.0, 1.0, &mut |x| x.powi(20) + x.powi(3));
        assert!((v - 2.0 / 21.0).abs() < 1e-14);
        let (_, e) = gk15(-1.0, 1.0, &mut |x| x.powi(12));
        assert!(e < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let r = adaptive(-1.0, 1.0, 0.0, 1e-12, 2000, |x| 1e-3 / (x * x + 1e-6));
        let exact = 2.0 * (1.0f64 / 1e-3).atan();
        assert!((r.value - exact).abs() < 1e-10 * exact, "{r:?}");
    }

    #[test]
    fn semi_infinite_power_tail() {
        let r = semi_infinite(0.0, 1.0, f64::INFINITY, 1e-12, 1e-13, |x| 1.0 / (1.0 + x).powi(4));
        assert!((r.value - 1.0 / 3.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn richardson_removes_powers() {
        let h0: f64 = 0.1;
        let vals: Vec<f64> = (0..6).map(|k| {
            let h = h0 / 2f64.powi(k);
            3.0 + 2.0 * h - 5.0 * h * h + h.powi(3)
        }).collect();
        let r = Richardson::new(&vals, 2.0, 1.0, 3);
        assert!((r.best() - 3.0).abs() < 1e-13);
    }
}
