//! Dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Inputs whose 1-norm condition estimate exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let x = a.clone().lu().solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Inverse of `a` together with the 1-norm condition number `|a|_1 |a^-1|_1`.
/// Returns `None` when LU hits an exactly zero pivot.
pub fn inverse_with_condition(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let inv = a.clone().lu().try_inverse()?;
    if inv.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let cond = norm_1(a) * norm_1(&inv);
    Some((inv, cond))
}

/// Maximum absolute column sum.
pub fn norm_1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Minimum-norm solution of `a x = b` for symmetric `a`, discarding
/// eigenvalues below `rel_cutoff * max|lambda|`. Also returns the residual
/// `|a x - b|_inf`, which is zero (up to rounding) iff `b` lies in the range.
pub fn symmetric_pseudo_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> (DVector<f64>, f64) {
    let eig = SymmetricEigen::new(a.clone());
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut x = DVector::zeros(a.nrows());
    if scale > 0.0 {
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda.abs() > rel_cutoff * scale {
                let v = eig.eigenvectors.column(k);
                x += v * (v.dot(b) / lambda);
            }
        }
    }
    let residual = (a * &x - b).amax();
    (x, residual)
}

/// Spectral radius of `diag(shares) * g` for symmetric nonnegative `g` and
/// nonnegative `shares`.
///
/// The product is similar to the symmetric matrix `D g D` with
/// `D = diag(sqrt(shares))`, so its spectrum is real and the spectral radius
/// is the Perron root. Power iteration runs on `D g D + I`, which removes the
/// `-rho` eigenvalue of bipartite supports without moving the Perron vector.
pub fn spectral_radius_sigma_g(g: &DMatrix<f64>, shares: &[f64]) -> f64 {
    let support: Vec<usize> = (0..shares.len()).filter(|&i| shares[i] > 0.0).collect();
    let m = support.len();
    if m == 0 {
        return 0.0;
    }
    let root: Vec<f64> = support.iter().map(|&i| shares[i].sqrt()).collect();
    let b = DMatrix::from_fn(m, m, |r, c| root[r] * g[(support[r], support[c])] * root[c]);
    power_iteration_symmetric(&b)
}

/// Largest eigenvalue of a symmetric nonnegative matrix.
pub fn power_iteration_symmetric(b: &DMatrix<f64>) -> f64 {
    let m = b.nrows();
    if b.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let mut v = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    let mut lambda = v.dot(&(b * &v));
    for _ in 0..POWER_MAX_ITER {
        let bv = b * &v;
        let next = &bv + &v;
        let norm = next.norm();
        v = next / norm;
        let bv = b * &v;
        let updated = v.dot(&bv);
        let residual = (&bv - &v * updated).norm();
        let settled = (updated - lambda).abs() <= POWER_TOL * updated.abs().max(f64::MIN_POSITIVE);
        lambda = updated;
        if settled && residual <= 1e-10 * lambda.abs().max(1e-300) {
            return lambda;
        }
    }
    log::warn!("power iteration did not settle; falling back to a full eigendecomposition");
    SymmetricEigen::new(b.clone()).eigenvalues.max()
}
