use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;
use crate::tol;

/// Shared, growing table of `r_3(N)`.
pub fn r3(n_max: usize) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<Mutex<Arc<Vec<u64>>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| Mutex::new(Arc::new(special::r3_table(1024))));
    let mut guard = cell.lock().expect("r3 cache poisoned");
    if guard.len() <= n_max {
        let mut size = guard.len();
        while size <= n_max {
            size *= 2;
        }
        *guard = Arc::new(special::r3_table(size));
    }
    guard.clone()
}

/// Euclidean massive kernel `m K_1(m r) / (4 pi^2 r)` for real `r > 0`.
pub fn euclidean_kernel(m: f64, r: f64) -> f64 {
    m * special::bessel_k1(m * r) / (4.0 * PI * PI * r)
}

/// Result of a truncated lattice sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub value: f64,
    pub shells: usize,
    pub tail_estimate: f64,
}

/// Sum `sum_{N >= 1} r_3(N) F(L sqrt N)` for a positive, eventually
/// exponentially decaying `F`, stopping once the remaining tail is below
/// `rel` of the running total.
pub fn shell_sum(m: f64, length: f64, rel: f64, f: impl Fn(f64) -> f64) -> LatticeSum {
    let mut total = 0.0;
    let mut n = 1usize;
    let mut table = r3(4096);
    loop {
        if n >= table.len() {
            table = r3(2 * n);
        }
        let r = length * (n as f64).sqrt();
        let c = table[n];
        if c > 0 {
            total += c as f64 * f(r);
        }
        // continuum tail beyond radius r for an e^{-m r} decay
        let tail = 4.0 * PI * r * r * f(r) / (length.powi(3) * m) * (1.0 + 2.0 / (m * r));
        if m * r > 2.0 && tail.abs() <= rel * total.abs() {
            return LatticeSum { value: total, shells: n, tail_estimate: tail.abs() };
        }
        n += 1;
    }
}

/// `kappa-bar(L) = sum_{n != 0} m K_1(m L |n|) / (4 pi^2 L |n|)`: the coincidence
/// limit of the torus-vacuum minus Minkowski-vacuum Wick-square kernel.
pub fn kappa_bar(m: f64, length: f64) -> Result<LatticeSum> {
    if m == 0.0 {
        return Err(Error::MasslessTorus);
    }
    if !(m > 0.0) || !(length > 0.0) || !m.is_finite() || !length.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa-bar needs m > 0 and L > 0, got m={m}, L={length}")));
    }
    Ok(shell_sum(m, length, 0.1 * tol::LATTICE_SHELL_REL, |r| euclidean_kernel(m, r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_shell_dominates_for_large_l() {
        let m = 1.0;
        let l = 20.0;
        let k = kappa_bar(m, l).unwrap().value;
        let lead = 6.0 * euclidean_kernel(m, l);
        assert!((k - lead) / k < 1e-3);
        assert!(k > lead);
    }

    #[test]
    fn massless_rejected() {
        assert_eq!(kappa_bar(0.0, 1.0).unwrap_err(), Error::MasslessTorus);
    }
}
