//! Reference computations that share no numerical machinery with the
//! production paths they check: brute-force enumerations, random sampling,
//! plain composite rules and polynomial root bracketing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::field::ConvexRegion;
use crate::geometry::Event;
use crate::linalg::CMat;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `int d^3k / ((2 pi)^3 2 omega) 2 n(omega)` for the Bose occupation `n`,
/// the thermal shift of the coincident Wick square.
pub fn bose_wick_square(t: f64, m: f64) -> f64 {
    // k = t s^2 removes the k -> 0 endpoint behaviour
    let upper = (60.0f64 + m / t).sqrt();
    simpson(0.0, upper, 20_000, |s| {
        if s == 0.0 {
            return 0.0;
        }
        let k = t * s * s;
        let w = (k * k + m * m).sqrt();
        k * k / (w * (w / t).exp_m1()) * 2.0 * t * s
    }) / (2.0 * PI * PI)
}

/// Thermal energy density `int d^3k / (2 pi)^3 omega n(omega)`.
pub fn bose_energy_density(t: f64, m: f64) -> f64 {
    let upper = (60.0f64 + m / t).sqrt();
    simpson(0.0, upper, 20_000, |s| {
        if s == 0.0 {
            return 0.0;
        }
        let k = t * s * s;
        let w = (k * k + m * m).sqrt();
        k * k * w / (w / t).exp_m1() * 2.0 * t * s
    }) / (2.0 * PI * PI)
}

/// Neville extrapolation to `x = 0` of the polynomial through `(x_i, y_i)`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

/// Torus-vacuum minus Minkowski-vacuum coincidence value from the mode sum
/// `(1/L^3) sum_k e^{-omega delta}/(2 omega)` minus its continuum counterpart
/// `m K_1(m delta)/(4 pi^2 delta)`, extrapolated in `delta^2` to zero.
pub fn kappa_mode_sum(m: f64, length: f64) -> f64 {
    let deltas: Vec<f64> = [0.3, 0.25, 0.2, 0.15, 0.12].iter().map(|f| f * length).collect();
    let values: Vec<f64> = deltas.iter().map(|&d| mode_sum_difference(m, length, d)).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| d * d).collect();
    neville_at_zero(&xs, &values)
}

fn mode_sum_difference(m: f64, length: f64, delta: f64) -> f64 {
    let dk = 2.0 * PI / length;
    let kmax = (45.0 / delta).max(m);
    let nmax = (kmax / dk).ceil() as i64;
    let planes: Vec<f64> = (-nmax..=nmax)
        .into_par_iter()
        .map(|a| {
            let mut plane = Vec::with_capacity(((2 * nmax + 1) * (2 * nmax + 1)) as usize);
            for b in -nmax..=nmax {
                for c in -nmax..=nmax {
                    let k2 = dk * dk * (a * a + b * b + c * c) as f64;
                    let w = (k2 + m * m).sqrt();
                    plane.push((-w * delta).exp() / (2.0 * w));
                }
            }
            crate::quad::pairwise_sum(plane.into_iter())
        })
        .collect();
    let lattice = crate::quad::pairwise_sum(planes.into_iter()) / length.powi(3);
    // continuum: (1/2 pi^2) int k^2 e^{-omega delta} / (2 omega) dk
    let continuum = simpson(0.0, kmax, 400_000, |k| {
        let w = (k * k + m * m).sqrt();
        k * k * (-w * delta).exp() / (2.0 * w)
    }) / (2.0 * PI * PI);
    lattice - continuum
}

/// Timelike diameter restricted to tips sharing a spatial position in the
/// given frame, minimized over that position on nested grids.
pub fn grid_diameter(points: &[Event], pad: f64, levels: usize) -> f64 {
    let cost = |c: [f64; 3]| {
        let mut up = f64::NEG_INFINITY;
        let mut down = f64::NEG_INFINITY;
        for p in points {
            let r = ((p[1] - c[0]).powi(2) + (p[2] - c[1]).powi(2) + (p[3] - c[2]).powi(2) + pad * pad).sqrt();
            up = up.max(p[0] + r);
            down = down.max(-p[0] + r);
        }
        up + down
    };
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k + 1]);
            hi[k] = hi[k].max(p[k + 1]);
        }
    }
    let mut center: [f64; 3] = std::array::from_fn(|k| 0.5 * (lo[k] + hi[k]));
    let mut half = (0..3).map(|k| 0.5 * (hi[k] - lo[k])).fold(0.0, f64::max).max(1e-12);
    let steps = 20i32;
    let mut best = cost(center);
    for _ in 0..levels {
        let h = half / steps as f64;
        let mut arg = center;
        for i in -steps..=steps {
            for j in -steps..=steps {
                for l in -steps..=steps {
                    let c = [center[0] + h * i as f64, center[1] + h * j as f64, center[2] + h * l as f64];
                    let v = cost(c);
                    if v < best {
                        best = v;
                        arg = c;
                    }
                }
            }
        }
        center = arg;
        half = 2.0 * h;
    }
    best
}

fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Hull of `<psi, A psi>` over random unit vectors.
pub fn sampled_numerical_range(a: &CMat, samples: usize, seed: u64) -> ConvexRegion {
    let n = a.nrows();
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let pts: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
            let mut hull_pts = Vec::with_capacity(per);
            for _ in 0..per {
                let psi = random_unit(n, &mut rng);
                let mut z = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        z += psi[i].conj() * a[(i, j)] * psi[j];
                    }
                }
                hull_pts.push(z);
            }
            crate::field::convex_hull(&hull_pts)
        })
        .collect();
    ConvexRegion::from_points(&pts, false, None)
}

/// Smallest `trace(rho A)` over random density matrices of random rank.
pub fn sampled_min_expectation(a: &CMat, samples: usize, seed: u64) -> f64 {
    let n = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let rank = rng.random_range(1..=n);
        let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let mut v = 0.0;
        for w in weights {
            let psi = random_unit(n, &mut rng);
            let mut z = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    z += psi[i].conj() * a[(i, j)] * psi[j];
                }
            }
            v += w / total * z.re;
        }
        best = best.min(v);
    }
    best
}

/// `det(lambda - A)` for hermitian `A` by Gaussian elimination with partial pivoting.
pub fn char_poly(a: &CMat, lambda: f64) -> f64 {
    let n = a.nrows();
    let mut m: Vec<Vec<Complex64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { lambda - a[(i, j)] } else { -a[(i, j)] }).collect()).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).expect("nonempty");
        if m[piv][col].norm() == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                let sub = f * m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    det.re
}

/// Smallest eigenvalue of hermitian `A` as the first sign change of the
/// characteristic polynomial above a Gershgorin lower bound, refined by bisection.
pub fn char_poly_lambda_min(a: &CMat) -> f64 {
    let n = a.nrows();
    let radius = (0..n).map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let lo0 = -radius - 1.0;
    let hi0 = radius + 1.0;
    let grid = 20_000;
    let h = (hi0 - lo0) / grid as f64;
    let mut x = lo0;
    let mut fx = char_poly(a, x);
    for _ in 0..grid {
        let y = x + h;
        let fy = char_poly(a, y);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() != fy.signum() {
            let (mut l, mut r, mut fl) = (x, y, fx);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                let fm = char_poly(a, mid);
                if fm == 0.0 {
                    return mid;
                }
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            return 0.5 * (l + r);
        }
        x = y;
        fx = fy;
    }
    f64::NAN
}

/// `max <T>/<N>` over number eigenstates of the first `m` modes by enumeration
/// of occupations with at most `m` quanta.
pub fn fock_ratio_brute(lambdas: &[f64], m: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut occ = vec![0u32; m];
    fn rec(i: usize, left: u32, occ: &mut Vec<u32>, lam: &[f64], best: &mut f64) {
        if i == occ.len() {
            let q: u32 = occ.iter().sum();
            if q > 0 {
                let t: f64 = occ.iter().zip(lam).map(|(k, l)| *k as f64 * l).sum();
                *best = best.max(t / q as f64);
            }
            return;
        }
        for k in 0..=left {
            occ[i] = k;
            rec(i + 1, left - k, occ, lam, best);
        }
        occ[i] = 0;
    }
    rec(0, m as u32, &mut occ, lambdas, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bose_integrals_massless() {
        let t = 1.3;
        assert!((bose_wick_square(t, 0.0) - t * t / 12.0).abs() < 1e-10);
        assert!((bose_energy_density(t, 0.0) - PI * PI * t.powi(4) / 30.0).abs() < 1e-9);
    }

    #[test]
    fn char_poly_on_diagonal() {
        let a = crate::linalg::diag(&[2.0, -0.5, 1.0]);
        assert!((char_poly_lambda_min(&a) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [0.1, 0.2, 0.3];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x - x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 2.0).abs() < 1e-13);
    }
}
