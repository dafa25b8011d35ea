//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    let mut m = zeros(n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v, 0.0);
    }
    m
}

/// Largest absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    hermitian_defect(a) <= tol * (1.0 + max_abs(a))
}

pub fn normal_defect(a: &CMat) -> f64 {
    let ad = a.adjoint();
    max_abs(&(a * &ad - &ad * a))
}

/// Hermitian part `(A + A*)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of the hermitian part of `a`, eigenvalues ascending,
/// eigenvectors as the columns of the returned matrix in the same order.
pub fn herm_eig(a: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(a);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = zeros(n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn lambda_min(a: &CMat) -> f64 {
    herm_eig(a).0[0]
}

pub fn lambda_max(a: &CMat) -> f64 {
    *herm_eig(a).0.last().expect("nonempty matrix")
}

/// Operator (spectral) norm.
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// `trace(rho A)`.
pub fn expectation(rho: &CMat, a: &CMat) -> Complex64 {
    let n = rho.nrows();
    let mut s = c(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += rho[(i, j)] * a[(j, i)];
        }
    }
    s
}

pub fn trace(a: &CMat) -> Complex64 {
    a.trace()
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Block-diagonal repetition `diag(A, ..., A)` with `k` copies.
pub fn block_repeat(a: &CMat, k: usize) -> CMat {
    kron(&identity(k), a)
}

/// Sum of the `k` diagonal `n x n` blocks of a `(kn) x (kn)` matrix.
pub fn block_trace(x: &CMat, n: usize, k: usize) -> CMat {
    let mut out = zeros(n);
    for b in 0..k {
        out += x.view((b * n, b * n), (n, n));
    }
    out
}

/// Hermitian projection onto the positive semidefinite cone.
pub fn psd_project(a: &CMat) -> CMat {
    apply_hermitian(a, |x| x.max(0.0))
}

/// `f(A)` for the hermitian part of `A` via its eigen-decomposition.
pub fn apply_hermitian(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eig(a);
    let d = diag(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>());
    &vecs * d * vecs.adjoint()
}

/// Matrix units `E_ij`, a basis of the full matrix algebra.
pub fn matrix_units(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = zeros(n);
            e[(i, j)] = c(1.0, 0.0);
            out.push(e);
        }
    }
    out
}

/// Orthonormal (Hilbert-Schmidt) basis of hermitian `n x n` matrices.
pub fn hermitian_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i..n {
            if i == j {
                let mut e = zeros(n);
                e[(i, i)] = c(1.0, 0.0);
                out.push(e);
            } else {
                let mut e = zeros(n);
                e[(i, j)] = c(s, 0.0);
                e[(j, i)] = c(s, 0.0);
                out.push(e);
                let mut f = zeros(n);
                f[(i, j)] = c(0.0, -s);
                f[(j, i)] = c(0.0, s);
                out.push(f);
            }
        }
    }
    out
}

/// Pure states spanning the affine hull of all density matrices.
pub fn tomographic_pure_states(n: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        v[i] = c(1.0, 0.0);
        out.push(projector(&v));
        for j in (i + 1)..n {
            let mut v = nalgebra::DVector::<Complex64>::zeros(n);
            v[i] = c(s, 0.0);
            v[j] = c(s, 0.0);
            out.push(projector(&v));
            let mut w = nalgebra::DVector::<Complex64>::zeros(n);
            w[i] = c(s, 0.0);
            w[j] = c(0.0, s);
            out.push(projector(&w));
        }
    }
    out
}

/// `|v><v|` for a normalised copy of `v`.
pub fn projector(v: &nalgebra::DVector<Complex64>) -> CMat {
    let v = v / c(v.norm(), 0.0);
    &v * v.adjoint()
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(n: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| gaussian(rng))
}

/// Random hermitian matrix from the Gaussian unitary ensemble.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    hermitian_part(&ginibre(n, rng))
}

/// Random full-rank density matrix `G G* / tr(G G*)`.
pub fn random_density(n: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(n, rng);
    let r = &g * g.adjoint();
    let t = r.trace();
    r / t
}

/// Random unit vector, Haar distributed.
pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> nalgebra::DVector<Complex64> {
    let v = nalgebra::DVector::from_fn(n, |_, _| gaussian(rng));
    let nv = v.norm();
    v / c(nv, 0.0)
}

pub fn random_pure(n: usize, rng: &mut impl Rng) -> CMat {
    projector(&random_unit_vector(n, rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let qr = ginibre(n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut d = zeros(n);
    for i in 0..n {
        let x = r[(i, i)];
        d[(i, i)] = if x.norm() > 0.0 { x / x.norm() } else { c(1.0, 0.0) };
    }
    q * d
}

/// Unitary defect `max |U*U - 1|`.
pub fn unitary_defect(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Serde adaptor: matrices as row-major arrays of `[re, im]` pairs.
pub mod serde_cmat {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_pairs(m: &CMat) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        out
    }

    pub fn from_pairs(p: &[[f64; 2]]) -> Option<CMat> {
        let n = (p.len() as f64).sqrt().round() as usize;
        if n * n != p.len() {
            return None;
        }
        Some(CMat::from_fn(n, n, |i, j| c(p[i * n + j][0], p[i * n + j][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        to_pairs(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let p = Vec::<[f64; 2]>::deserialize(d)?;
        from_pairs(&p).ok_or_else(|| D::Error::custom("matrix entry count is not a perfect square"))
    }

    pub mod option {
        use super::*;
        pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_pairs).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMat>, D::Error> {
            match Option::<Vec<[f64; 2]>>::deserialize(d)? {
                None => Ok(None),
                Some(p) => from_pairs(&p)
                    .map(Some)
                    .ok_or_else(|| D::Error::custom("matrix entry count is not a perfect square")),
            }
        }
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(m: &[CMat], s: S) -> Result<S::Ok, S::Error> {
            m.iter().map(to_pairs).collect::<Vec<_>>().serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
            Vec::<Vec<[f64; 2]>>::deserialize(d)?
                .iter()
                .map(|p| from_pairs(p).ok_or_else(|| D::Error::custom("matrix entry count is not a perfect square")))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eig_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(5, &mut rng);
        let (vals, vecs) = herm_eig(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let rec = &vecs * diag(&vals) * vecs.adjoint();
        assert!(max_abs(&(rec - a)) < 1e-12);
    }

    #[test]
    fn block_trace_is_adjoint_of_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(2, &mut rng);
        let x = random_hermitian(6, &mut rng);
        let lhs = expectation(&x, &block_repeat(&a, 3));
        let rhs = expectation(&block_trace(&x, 2, 3), &a);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(unitary_defect(&random_unitary(4, &mut rng)) < 1e-12);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = expectation(x, y).re;
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
