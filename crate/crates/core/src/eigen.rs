//! Dense Hermitian eigenvalues by cyclic two-sided Jacobi rotations.
//!
//! Small matrices only (the RIC path caps k at 64). Each rotation first
//! strips the phase of the pivot entry, reducing the 2x2 block to the real
//! symmetric case, then applies the classic Jacobi angle.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("matrix is not Hermitian within 1e-12")]
    NotHermitian,
    #[error("dimension {0} exceeds the dense-solver cap of 64")]
    TooLarge(usize),
}

const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 60;

/// All eigenvalues of a Hermitian matrix given row-major, ascending.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Result<Vec<f64>, EigenError> {
    assert_eq!(h.len(), n * n);
    if n > MAX_DIM {
        return Err(EigenError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = (h[i * n + j] - h[j * n + i].conj()).norm();
            if d > 1e-12 {
                return Err(EigenError::NotHermitian);
            }
            scale = scale.max(h[i * n + j].norm());
        }
    }
    let mut a = h.to_vec();
    let tol = (scale.max(1e-300)) * 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[p * n + q].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, n, p, q);
            }
        }
    }
    let mut evs: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(evs)
}

/// (lambda_min, lambda_max).
pub fn extreme_eigenvalues(h: &[Complex64], n: usize) -> Result<(f64, f64), EigenError> {
    let evs = hermitian_eigenvalues(h, n)?;
    Ok((evs[0], evs[n - 1]))
}

/// One Jacobi rotation annihilating the (p, q) entry.
fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let d = apq.norm();
    if d < 1e-300 {
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / d; // e^{i phi}
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // classic Jacobi angle for the phase-stripped real block
    let theta = (aqq - app) / (2.0 * d);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // unitary columns: J[:,p] = (c, -s conj(phase)), J[:,q] = (s phase, c)
    // right-multiply: col_p' = c col_p - s conj(phase) col_q (row-wise on a)
    for i in 0..n {
        let aip = a[i * n + p];
        let aiq = a[i * n + q];
        a[i * n + p] = aip * c - aiq * s * phase.conj();
        a[i * n + q] = aip * s * phase + aiq * c;
    }
    // left-multiply by J^H
    for j in 0..n {
        let apj = a[p * n + j];
        let aqj = a[q * n + j];
        a[p * n + j] = apj * c - aqj * s * phase;
        a[q * n + j] = apj * s * phase.conj() + aqj * c;
    }
    // exact annihilation and real diagonal
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p] = Complex64::new(app - t * d, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * d, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_diagonal() {
        let id = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(extreme_eigenvalues(&id, 2).unwrap(), (1.0, 1.0));
        let diag = vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)];
        assert_eq!(extreme_eigenvalues(&diag, 2).unwrap(), (0.5, 2.0));
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[1, mu], [conj(mu), 1]] with |mu| = 1/sqrt(5): eigenvalues 1 -+ 1/sqrt5
        let mu = c(0.4, 0.2);
        let r = mu.norm();
        assert!((r - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        let h = vec![c(1.0, 0.0), mu, mu.conj(), c(1.0, 0.0)];
        let (lo, hi) = extreme_eigenvalues(&h, 2).unwrap();
        assert!((lo - (1.0 - r)).abs() < 1e-12);
        assert!((hi - (1.0 + r)).abs() < 1e-12);
    }

    #[test]
    fn random_hermitian_trace_and_gershgorin() {
        let mut rng = crate::rng::SplitMix64::keyed(11, 0);
        let mut unit = || (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0;
        for n in [3usize, 5, 8, 16] {
            let mut h = vec![c(0.0, 0.0); n * n];
            for i in 0..n {
                h[i * n + i] = c(unit(), 0.0);
                for j in i + 1..n {
                    let z = c(unit(), unit());
                    h[i * n + j] = z;
                    h[j * n + i] = z.conj();
                }
            }
            let evs = hermitian_eigenvalues(&h, n).unwrap();
            let trace: f64 = (0..n).map(|i| h[i * n + i].re).sum();
            let sum: f64 = evs.iter().sum();
            assert!((trace - sum).abs() < 1e-10, "n={n}");
            // Frobenius norm preserved
            let frob: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            let ev_sq: f64 = evs.iter().map(|v| v * v).sum();
            assert!((frob - ev_sq).abs() < 1e-8 * frob.max(1.0), "n={n}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(hermitian_eigenvalues(&h, 2), Err(EigenError::NotHermitian));
    }

    #[test]
    fn rejects_oversize() {
        let n = 65;
        let h = vec![c(0.0, 0.0); n * n];
        assert_eq!(hermitian_eigenvalues(&h, n), Err(EigenError::TooLarge(65)));
    }
}
