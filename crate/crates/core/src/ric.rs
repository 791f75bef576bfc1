//! Restricted-isometry-constant and coherence measurement.
//!
//! delta_k is computed from Gram spectra: for a support S with Gram matrix
//! G_S, the k-sparse extremes of ||Phi x||^2 / ||x||^2 are the extreme
//! eigenvalues of G_S, so delta_k = max_S max(lambda_max - 1, 1 - lambda_min).
//! Exhaustive scans are exact for the instance; sampled scans are lower
//! bounds. Both partition the support space deterministically, so the result
//! is identical for any worker count.

use crate::eigen::{self, EigenError};
use crate::matrix::DenseMatrix;
use crate::params::fmt_f64;
use crate::rng::SplitMix64;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RicError {
    #[error("column index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("duplicate column index {0}")]
    DuplicateIndex(usize),
    #[error("support sets overlap at column {0}")]
    OverlappingSets(usize),
    #[error("C({n},{k}) = {count} supports exceeds the exhaustive cap of {cap}")]
    TooManySupports { n: usize, k: usize, count: u128, cap: u128 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// A restricted-isometry-constant lower bound with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RicEstimate {
    pub k: usize,
    pub delta_lower: f64,
    pub method: RicMethod,
    pub supports_examined: u64,
    pub extremal_support: Vec<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicMethod {
    Exhaustive,
    Sampled,
}

impl RicEstimate {
    pub fn to_json(&self) -> String {
        let method = match self.method {
            RicMethod::Exhaustive => "exhaustive",
            RicMethod::Sampled => "sampled",
        };
        let support: Vec<String> = self.extremal_support.iter().map(|i| i.to_string()).collect();
        let seed = match self.seed {
            Some(s) => s.to_string(),
            None => "null".to_string(),
        };
        format!(
            "{{\"k\":{},\"delta_lower\":{},\"method\":\"{}\",\"supports_examined\":{},\"extremal_support\":[{}],\"seed\":{}}}",
            self.k,
            fmt_f64(self.delta_lower),
            method,
            self.supports_examined,
            support.join(","),
            seed
        )
    }
}

/// Pairwise inner products of all columns, row-major N x N.
pub struct Gram {
    n: usize,
    data: Vec<Complex64>,
}

impl Gram {
    pub fn of(mat: &DenseMatrix) -> Self {
        let n = mat.cols();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let g = mat.inner(i, j);
                data[i * n + j] = g;
                data[j * n + i] = g.conj();
            }
        }
        Gram { n, data }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    fn submatrix(&self, support: &[usize]) -> Vec<Complex64> {
        let k = support.len();
        let mut h = Vec::with_capacity(k * k);
        for &i in support {
            for &j in support {
                h.push(self.entry(i, j));
            }
        }
        h
    }
}

fn check_support(support: &[usize], n: usize) -> Result<(), RicError> {
    let mut seen = vec![false; n];
    for &i in support {
        if i >= n {
            return Err(RicError::IndexOutOfRange(i));
        }
        if seen[i] {
            return Err(RicError::DuplicateIndex(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// G[i][j] = <u_{c_i}, u_{c_j}>, Hermitian by construction; row-major k x k.
pub fn gram_submatrix(mat: &DenseMatrix, support: &[usize]) -> Result<Vec<Complex64>, RicError> {
    check_support(support, mat.cols())?;
    let k = support.len();
    let mut h = Vec::with_capacity(k * k);
    for &i in support {
        for &j in support {
            h.push(mat.inner(i, j));
        }
    }
    Ok(h)
}

/// max(lambda_max(G_S) - 1, 1 - lambda_min(G_S)).
fn support_objective(gram: &Gram, support: &[usize]) -> Result<f64, RicError> {
    let h = gram.submatrix(support);
    let (lo, hi) = eigen::extreme_eigenvalues(&h, support.len())?;
    Ok((hi - 1.0).max(1.0 - lo))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Advance a combination in lexicographic order; false when exhausted.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

const EXHAUSTIVE_CAP: u128 = 10_000_000;

/// Exact delta_k by scanning every k-support. Workers stride over the
/// lexicographic enumeration; the merge keeps the largest objective, ties to
/// the earliest support, so the outcome is worker-count invariant.
pub fn ric_exhaustive(mat: &DenseMatrix, k: usize, workers: usize) -> Result<RicEstimate, RicError> {
    assert!(k >= 1 && workers >= 1);
    let n = mat.cols();
    let count = binomial(n, k);
    if count > EXHAUSTIVE_CAP {
        return Err(RicError::TooManySupports { n, k, count, cap: EXHAUSTIVE_CAP });
    }
    let gram = Gram::of(mat);
    let worker_best = |w: usize| -> Result<Option<(f64, u64, Vec<usize>)>, RicError> {
        let mut support: Vec<usize> = (0..k).collect();
        let mut rank: u64 = 0;
        let mut best: Option<(f64, u64, Vec<usize>)> = None;
        loop {
            if rank as usize % workers == w {
                let obj = support_objective(&gram, &support)?;
                let replace = match &best {
                    None => true,
                    Some((b, _, _)) => obj > *b,
                };
                if replace {
                    best = Some((obj, rank, support.clone()));
                }
            }
            rank += 1;
            if !next_combination(&mut support, n) {
                return Ok(best);
            }
        }
    };
    let mut results: Vec<Option<(f64, u64, Vec<usize>)>> = Vec::new();
    if workers == 1 {
        results.push(worker_best(0)?);
    } else {
        let collected: Vec<Result<_, RicError>> = std::thread::scope(|scope| {
            let handles: Vec<_> =
                (0..workers).map(|w| scope.spawn(move || worker_best(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for r in collected {
            results.push(r?);
        }
    }
    let best = results
        .into_iter()
        .flatten()
        .max_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(b.1.cmp(&a.1)) // tie: smaller rank wins
        })
        .expect("at least one support");
    Ok(RicEstimate {
        k,
        delta_lower: best.0,
        method: RicMethod::Exhaustive,
        supports_examined: count as u64,
        extremal_support: best.2,
        seed: None,
    })
}

/// Lower bound on delta_k from `trials` seeded random supports. Trial i draws
/// its support from the stream keyed by (seed, i), so the estimate does not
/// depend on how trials are split across workers.
pub fn ric_sampled(
    mat: &DenseMatrix,
    k: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<RicEstimate, RicError> {
    assert!(k >= 1 && trials >= 1 && workers >= 1);
    let n = mat.cols();
    assert!(k <= n);
    let gram = Gram::of(mat);
    let worker_best = |w: usize| -> Result<Option<(f64, u64, Vec<usize>)>, RicError> {
        let mut best: Option<(f64, u64, Vec<usize>)> = None;
        let mut i = w as u64;
        while i < trials {
            let support = SplitMix64::keyed(seed, i).distinct_below(n, k);
            let obj = support_objective(&gram, &support)?;
            let replace = match &best {
                None => true,
                Some((b, _, _)) => obj > *b,
            };
            if replace {
                best = Some((obj, i, support));
            }
            i += workers as u64;
        }
        Ok(best)
    };
    let mut results: Vec<Option<(f64, u64, Vec<usize>)>> = Vec::new();
    if workers == 1 {
        results.push(worker_best(0)?);
    } else {
        let collected: Vec<Result<_, RicError>> = std::thread::scope(|scope| {
            let handles: Vec<_> =
                (0..workers).map(|w| scope.spawn(move || worker_best(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for r in collected {
            results.push(r?);
        }
    }
    let best = results
        .into_iter()
        .flatten()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1)))
        .expect("at least one trial");
    Ok(RicEstimate {
        k,
        delta_lower: best.0,
        method: RicMethod::Sampled,
        supports_examined: trials,
        extremal_support: best.2,
        seed: Some(seed),
    })
}

/// mu = max_{i != j} |<u_i, u_j>|.
pub fn coherence(mat: &DenseMatrix) -> f64 {
    assert!(mat.cols() >= 2);
    let gram = Gram::of(mat);
    let mut mu: f64 = 0.0;
    for i in 0..mat.cols() {
        for j in i + 1..mat.cols() {
            mu = mu.max(gram.entry(i, j).norm());
        }
    }
    mu
}

/// The double sum sum_{c1 in J1} sum_{c2 in J2} <u_{c1}, u_{c2}>, computed
/// both term-by-term and as <sum_{J1} u, sum_{J2} u>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatPairSum {
    pub double_sum: Complex64,
    pub aggregated: Complex64,
}

pub fn flat_pair_sum(
    mat: &DenseMatrix,
    j1: &[usize],
    j2: &[usize],
) -> Result<FlatPairSum, RicError> {
    check_support(j1, mat.cols())?;
    check_support(j2, mat.cols())?;
    for &i in j1 {
        if j2.contains(&i) {
            return Err(RicError::OverlappingSets(i));
        }
    }
    let mut double_sum = Complex64::new(0.0, 0.0);
    for &i in j1 {
        for &j in j2 {
            double_sum += mat.inner(i, j);
        }
    }
    let rows = mat.rows();
    let mut s1 = vec![Complex64::new(0.0, 0.0); rows];
    let mut s2 = vec![Complex64::new(0.0, 0.0); rows];
    for &i in j1 {
        for (acc, v) in s1.iter_mut().zip(mat.col(i)) {
            *acc += v;
        }
    }
    for &j in j2 {
        for (acc, v) in s2.iter_mut().zip(mat.col(j)) {
            *acc += v;
        }
    }
    let aggregated = crate::matrix::inner_product(&s1, &s2);
    Ok(FlatPairSum { double_sum, aggregated })
}

/// Random +-1/sqrt(n) matrix from the counter-based generator; the classical
/// random baseline for report context.
pub fn bernoulli_matrix(n: usize, n_cols: usize, seed: u64) -> DenseMatrix {
    assert!(n >= 1 && n_cols >= 1);
    let scale = 1.0 / (n as f64).sqrt();
    let cols = (0..n_cols)
        .map(|j| {
            let mut rng = SplitMix64::keyed(seed, j as u64);
            (0..n)
                .map(|_| if rng.next_u64() & 1 == 1 { scale } else { -scale })
                .collect()
        })
        .collect();
    DenseMatrix::from_real_columns(n, cols)
}
