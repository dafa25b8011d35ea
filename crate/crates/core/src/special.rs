//! Modified Bessel functions of the second kind.

use num_complex::Complex64;

/// `e^x K_nu(x)` for real `x > 0` and integer order `nu` in {0, 1}, by the
/// trapezoid rule on `K_nu(x) = int_0^inf e^{-x cosh t} cosh(nu t) dt`.
pub fn bessel_k_scaled(nu: u32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k requires x > 0");
    let h = (0.7 / x.sqrt()).min(0.2);
    let nuf = nu as f64;
    let mut sum = 0.5;
    let mut k = 1usize;
    loop {
        let t = h * k as f64;
        let e = -x * (t.cosh() - 1.0) + nuf * t;
        let term = e.exp() * if nu == 0 { 1.0 } else { 0.5 * (1.0 + (-2.0 * nuf * t).exp()) };
        sum += term;
        if e < -45.0 {
            break;
        }
        k += 1;
    }
    h * sum
}

pub fn bessel_k0(x: f64) -> f64 {
    bessel_k_scaled(0, x) * (-x).exp()
}

pub fn bessel_k1(x: f64) -> f64 {
    bessel_k_scaled(1, x) * (-x).exp()
}

/// `K_1(z)` for complex `z` with `Re z > 0` (principal branch).
pub fn bessel_k1_complex(z: Complex64) -> Complex64 {
    if z.norm() <= 2.0 {
        k1_series(z)
    } else {
        k1_integral(z)
    }
}

fn k1_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut i1 = Complex64::new(0.0, 0.0);
    let mut rest = Complex64::new(0.0, 0.0);
    // psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
    let gamma = 0.577_215_664_901_532_9;
    let mut harmonic = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            harmonic += 1.0 / kf;
            term = term * q / (kf * (kf + 1.0));
        }
        let psi = -2.0 * gamma + 2.0 * harmonic + 1.0 / (kf + 1.0);
        i1 += term;
        rest += term * psi;
        if term.norm() < 1e-18 * i1.norm() && k > 2 {
            break;
        }
    }
    let i1 = i1 * z * 0.5;
    z.inv() + (z * 0.5).ln() * i1 - rest * z * 0.25
}

fn k1_integral(z: Complex64) -> Complex64 {
    let h = 0.1;
    let inv2z = (z * 2.0).inv();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k = 1;
    loop {
        let s = h * k as f64;
        let s2 = s * s;
        let w = s2 * (-s2).exp();
        sum += (Complex64::new(1.0, 0.0) + inv2z * s2).sqrt() * w;
        if s2 > 42.0 {
            break;
        }
        k += 1;
    }
    // integral over [0, inf) of 2 s^2 e^{-s^2} sqrt(1 + s^2/(2z)) ds
    let integral = sum * (2.0 * h);
    let pref = (Complex64::new(std::f64::consts::PI, 0.0) / (z * 2.0)).sqrt() * (-z).exp();
    pref * integral * (2.0 / std::f64::consts::PI.sqrt())
}

/// Sum of squares representation counts `r_3(N)` for `0 <= N <= n_max`.
pub fn r3_table(n_max: usize) -> Vec<u64> {
    let root = (n_max as f64).sqrt() as usize + 1;
    let mut r2 = vec![0u64; n_max + 1];
    for a in 0..=root {
        let a2 = a * a;
        if a2 > n_max {
            break;
        }
        for b in 0..=root {
            let s = a2 + b * b;
            if s > n_max {
                break;
            }
            let mult = if a == 0 { 1 } else { 2 } * if b == 0 { 1 } else { 2 };
            r2[s] += mult;
        }
    }
    let mut r3 = vec![0u64; n_max + 1];
    for cc in 0..=root {
        let c2 = cc * cc;
        if c2 > n_max {
            break;
        }
        let mult = if cc == 0 { 1 } else { 2 };
        for n in c2..=n_max {
            r3[n] += mult * r2[n - c2];
        }
    }
    r3
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn real_values() {
        assert!(rel(bessel_k1(1.0), 0.601_907_230_197_234_6) < 1e-14);
        assert!(rel(bessel_k1(2.0), 0.139_865_881_816_522_43) < 1e-14);
        assert!(rel(bessel_k1(0.01), 99.973_894_118_296_25) < 1e-13);
        assert!(rel(bessel_k1(10.0), 1.864_877_345_382_558_5e-5) < 1e-13);
        assert!(rel(bessel_k1(50.0), 3.444_102_226_717_555_6e-23) < 1e-12);
        assert!(rel(bessel_k0(1.0), 0.421_024_438_240_708_33) < 1e-14);
    }

    #[test]
    fn complex_values() {
        let cases = [
            ((0.3, 0.7), (0.028_648_708_215_322_5, -1.356_034_081_592_052)),
            ((1.5, -1.2), (-0.012_455_290_925_479_12, 0.231_271_733_417_372_63)),
            ((0.01, 3.0), (-0.528_386_887_688_258_8, 0.504_166_813_224_318_3)),
            ((4.0, 5.0), (0.006_602_542_839_923_762, 0.006_711_546_172_049_11)),
            ((0.05, 25.0), (0.187_449_984_698_104_6, -0.147_487_177_983_655_6)),
            ((2.5, 0.0), (0.073_890_816_347_747_06, 0.0)),
        ];
        for ((zr, zi), (vr, vi)) in cases {
            let v = bessel_k1_complex(Complex64::new(zr, zi));
            let e = Complex64::new(vr, vi);
            assert!((v - e).norm() < 1e-13 * e.norm().max(1e-3), "z=({zr},{zi}) got {v} want {e}");
        }
    }

    #[test]
    fn r3_small() {
        let t = r3_table(10);
        assert_eq!(&t[..], &[1, 6, 12, 8, 6, 24, 24, 0, 12, 30, 24]);
    }
}
