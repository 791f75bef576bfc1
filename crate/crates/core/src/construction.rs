//! The explicit chirp-matrix construction: index sets A and B, the matrix of
//! normalized chirp columns u_{a,b}, realification, and the size/capacity
//! conditions tying (p, m, N) together.

use crate::matrix::DenseMatrix;
use crate::modmath::{self, mul_mod, ModMathError, PrimeModulus, UnitRoots};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("degenerate set: {0}")]
    DegenerateSet(String),
    #[error("set B overflows: max element {max} is not below p/2 = {p}/2")]
    Overflow { max: u64, p: u64 },
    #[error("requested N = {n} exceeds |A||B| = {cap}")]
    CapacityExceeded { n: u64, cap: u64 },
    #[error("interval bound exceeds the 62-bit range")]
    RangeTooLarge,
    #[error(transparent)]
    ModMath(#[from] ModMathError),
}

/// A finite set of residues modulo p, sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueSet {
    p: PrimeModulus,
    elements: Vec<u64>,
}

impl ResidueSet {
    /// Reduces mod p, deduplicates, sorts.
    pub fn new(p: PrimeModulus, elements: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = elements.into_iter().map(|x| x % p.get()).collect();
        v.sort_unstable();
        v.dedup();
        ResidueSet { p, elements: v }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&(x % self.p.get())).is_ok()
    }
}

/// Floor of the n-th root of x, by binary search with a verification
/// multiply. Never touches floating point.
pub fn integer_nth_root(x: u64, n: u32) -> u64 {
    assert!(n >= 1);
    if n == 1 || x <= 1 {
        return x;
    }
    let pow = |r: u64| -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..n {
            acc = acc.checked_mul(r as u128)?;
            if acc > u64::MAX as u128 {
                return Some(acc); // already exceeds any x
            }
        }
        Some(acc)
    };
    let (mut lo, mut hi) = (1u64, 1u64 << (64 / n + 1).min(63));
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        match pow(mid) {
            Some(v) if v <= x as u128 => lo = mid,
            _ => hi = mid - 1,
        }
    }
    lo
}

/// A = {1, ..., floor(p^{1/(2m)})}.
pub fn build_set_a(p: PrimeModulus, m: u64) -> Result<ResidueSet, ConstructionError> {
    assert!(m >= 2 && m % 2 == 0, "m must be an even integer >= 2");
    let bound = integer_nth_root(p.get(), (2 * m) as u32);
    if bound < 2 {
        return Err(ConstructionError::DegenerateSet(format!(
            "floor(p^(1/{})) = {bound} < 2 for p = {}",
            2 * m,
            p.get()
        )));
    }
    Ok(ResidueSet::new(p, 1..=bound))
}

/// Digit parameters (r, M) derived from (p, m):
/// beta = 1/(2.01 m), r = floor(beta * log p / log 2), M = floor(2^(2.01 m - 1)).
pub fn derive_b_params(p: PrimeModulus, m: u64) -> Result<(u32, u64), ConstructionError> {
    assert!(m >= 2 && m % 2 == 0);
    let log2p = (p.get() as f64).log2();
    let r = (log2p / (2.01 * m as f64)).floor() as u32;
    if r == 0 {
        return Err(ConstructionError::DegenerateSet(format!(
            "digit count r = 0 for p = {}, m = {m}",
            p.get()
        )));
    }
    let log2m_exp = 2.01 * m as f64 - 1.0;
    if log2m_exp >= 63.0 {
        return Err(ConstructionError::DegenerateSet(format!(
            "M = floor(2^{log2m_exp}) does not fit a machine word; materializing B \
             requires 2.01 m - 1 < 63"
        )));
    }
    let m_digits = log2m_exp.exp2().floor() as u64;
    Ok((r, m_digits))
}

/// B built from (p, m) via the derived digit parameters.
pub fn build_set_b(p: PrimeModulus, m: u64) -> Result<ResidueSet, ConstructionError> {
    let (r, m_digits) = derive_b_params(p, m)?;
    build_set_b_explicit(m_digits, r, p)
}

/// Max element of the digit set: (M-1) * ((2M)^r - 1) / (2M - 1).
fn b_max_element(m_digits: u64, r: u32) -> Option<u128> {
    let base = 2u128 * m_digits as u128;
    let mut pow: u128 = 1;
    for _ in 0..r {
        pow = pow.checked_mul(base)?;
    }
    Some((m_digits as u128 - 1) * (pow - 1) / (base - 1))
}

/// B = { sum_j x_j (2M)^{j-1} : x_j in {0, ..., M-1} }, caller-chosen (M, r).
pub fn build_set_b_explicit(
    m_digits: u64,
    r: u32,
    p: PrimeModulus,
) -> Result<ResidueSet, ConstructionError> {
    assert!(m_digits >= 2 && r >= 1);
    let max = b_max_element(m_digits, r).ok_or(ConstructionError::RangeTooLarge)?;
    // "all elements of B are at most p/2": strict half-interval check
    if 2 * max >= p.get() as u128 {
        return Err(ConstructionError::Overflow {
            max: max.min(u64::MAX as u128) as u64,
            p: p.get(),
        });
    }
    let base = 2 * m_digits;
    let count = (m_digits as u128).checked_pow(r).ok_or(ConstructionError::RangeTooLarge)?;
    assert!(count <= 1 << 28, "B of size {count} is beyond desk scale");
    let mut elems = Vec::with_capacity(count as usize);
    // r-digit counter in base 2M restricted to digits < M
    let mut digits = vec![0u64; r as usize];
    loop {
        let mut val: u64 = 0;
        let mut place: u64 = 1;
        for &d in &digits {
            val += d * place;
            place = place.saturating_mul(base);
        }
        elems.push(val);
        let mut j = 0;
        loop {
            if j == digits.len() {
                let set = ResidueSet::new(p, elems);
                debug_assert_eq!(set.len() as u128, count);
                return Ok(set);
            }
            digits[j] += 1;
            if digits[j] < m_digits {
                break;
            }
            digits[j] = 0;
            j += 1;
        }
    }
}

/// Smallest prime in [ceil(k^{2-eps}), floor(2 k^{2-eps})].
pub fn select_prime_for_k(k: u64, eps: f64) -> Result<PrimeModulus, ConstructionError> {
    assert!(k >= 2 && (0.0..1.0).contains(&eps));
    let x = (k as f64).powf(2.0 - eps);
    if 2.0 * x >= (1u64 << 61) as f64 {
        return Err(ConstructionError::RangeTooLarge);
    }
    let (lo, hi) = if eps == 0.0 {
        (k * k, 2 * k * k)
    } else {
        (x.ceil() as u64, (2.0 * x).floor() as u64)
    };
    let p = modmath::find_prime_in_interval(lo, hi)?;
    Ok(PrimeModulus::new(p)?)
}

/// Capacity report for the column-count condition
/// N <= p^{(2+eps)/(2-eps)} <= |A||B|, plus the eps <= 1/(403 m) gate.
#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub eps: f64,
    pub eps_limit: f64,
    pub eps_ok: bool,
    pub p_power: f64,
    pub ab_product: u64,
    pub n_le_p_power: bool,
    pub p_power_le_ab: bool,
}

pub fn capacity_check(
    p: PrimeModulus,
    m: u64,
    eps: f64,
    n_cols: u64,
) -> Result<CapacityReport, ConstructionError> {
    let a = build_set_a(p, m)?;
    let b = build_set_b(p, m)?;
    let ab = a.len() as u64 * b.len() as u64;
    let eps_limit = 1.0 / (403.0 * m as f64);
    let p_power = (p.get() as f64).powf((2.0 + eps) / (2.0 - eps));
    Ok(CapacityReport {
        eps,
        eps_limit,
        eps_ok: eps <= eps_limit,
        p_power,
        ab_product: ab,
        n_le_p_power: (n_cols as f64) <= p_power,
        p_power_le_ab: p_power <= ab as f64,
    })
}

/// One normalized chirp column: entry at x (x = 1..p) is
/// p^{-1/2} e_p(a x^2 + b x).
pub fn column(p: PrimeModulus, a: u64, b: u64) -> Vec<Complex64> {
    let roots = UnitRoots::new(p);
    column_with_roots(&roots, a, b)
}

pub fn column_with_roots(roots: &UnitRoots, a: u64, b: u64) -> Vec<Complex64> {
    let q = roots.modulus().get();
    let scale = 1.0 / (q as f64).sqrt();
    (1..=q)
        .map(|x| {
            let x = x % q;
            let phase = modmath::add_mod(mul_mod(a, mul_mod(x, x, q), q), mul_mod(b, x, q), q);
            roots.root(phase) * scale
        })
        .collect()
}

/// A chirp matrix given implicitly by its ordered (a, b) column index list.
#[derive(Debug, Clone)]
pub struct ChirpMatrix {
    p: PrimeModulus,
    columns: Vec<(u64, u64)>,
}

impl ChirpMatrix {
    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn n_rows(&self) -> u64 {
        self.p.get()
    }

    pub fn column_indices(&self) -> &[(u64, u64)] {
        &self.columns
    }

    /// Materialize as a dense complex matrix (root table built once).
    pub fn to_dense(&self) -> DenseMatrix {
        let roots = UnitRoots::new(self.p);
        let cols = self
            .columns
            .iter()
            .map(|&(a, b)| column_with_roots(&roots, a, b))
            .collect();
        DenseMatrix::from_columns(self.p.get() as usize, cols)
    }
}

/// First N columns of Phi_p in lexicographic (a, b) order.
///
/// The column order is a free choice in the construction; lexicographic order
/// makes builds reproducible.
pub fn build_matrix(
    p: PrimeModulus,
    m: u64,
    n_cols: u64,
) -> Result<ChirpMatrix, ConstructionError> {
    let a = build_set_a(p, m)?;
    let b = build_set_b(p, m)?;
    build_matrix_from_sets(&a, &b, n_cols)
}

pub fn build_matrix_from_sets(
    a: &ResidueSet,
    b: &ResidueSet,
    n_cols: u64,
) -> Result<ChirpMatrix, ConstructionError> {
    assert_eq!(a.modulus(), b.modulus());
    let cap = a.len() as u64 * b.len() as u64;
    if n_cols > cap {
        return Err(ConstructionError::CapacityExceeded { n: n_cols, cap });
    }
    let mut columns = Vec::with_capacity(n_cols as usize);
    'outer: for &ai in a.elements() {
        for &bi in b.elements() {
            if columns.len() as u64 == n_cols {
                break 'outer;
            }
            columns.push((ai, bi));
        }
    }
    Ok(ChirpMatrix { p: a.modulus(), columns })
}

/// Replace each entry a+ib by the 2x2 block [[a, b], [-b, a]], turning an
/// n x N complex matrix into a 2n x 2N real one.
pub fn realify(mat: &DenseMatrix) -> DenseMatrix {
    let (n, nc) = (mat.rows(), mat.cols());
    let mut cols = Vec::with_capacity(2 * nc);
    for j in 0..nc {
        let src = mat.col(j);
        let mut left = Vec::with_capacity(2 * n);
        let mut right = Vec::with_capacity(2 * n);
        for z in src {
            left.push(z.re);
            left.push(-z.im);
            right.push(z.im);
            right.push(z.re);
        }
        cols.push(left);
        cols.push(right);
    }
    DenseMatrix::from_real_columns(2 * n, cols)
}

/// The realification of a complex vector under the same block convention:
/// z maps to (Re z, -Im z) interleaved, so that ||Phi' v|| = ||Phi z||.
pub fn realify_vector(z: &[Complex64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * z.len());
    for w in z {
        v.push(w.re);
        v.push(-w.im);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::inner_product;

    fn pm(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn integer_nth_root_exact() {
        assert_eq!(integer_nth_root(101, 4), 3);
        assert_eq!(integer_nth_root(256, 4), 4);
        assert_eq!(integer_nth_root(255, 4), 3);
        assert_eq!(integer_nth_root(1 << 40, 4), 1024);
        assert_eq!(integer_nth_root((1 << 40) + 15, 4), 1024);
        assert_eq!(integer_nth_root(u64::MAX, 2), (1u64 << 32) - 1);
        assert_eq!(integer_nth_root(0, 5), 0);
    }

    #[test]
    fn set_a_examples() {
        let a = build_set_a(pm(101), 2).unwrap();
        assert_eq!(a.elements(), &[1, 2, 3]);
        assert!(matches!(
            build_set_a(pm(5), 2),
            Err(ConstructionError::DegenerateSet(_))
        ));
        let big = build_set_a(pm((1 << 40) + 15), 2).unwrap();
        assert_eq!(big.len(), 1024);
        assert_eq!(*big.elements().last().unwrap(), 1024);
    }

    #[test]
    fn set_b_derived_params() {
        // p = 101, m = 2: r = floor(log2(101)/4.02) = 1, M = floor(2^3.02) = 8
        let (r, m_digits) = derive_b_params(pm(101), 2).unwrap();
        assert_eq!((r, m_digits), (1, 8));
        let b = build_set_b(pm(101), 2).unwrap();
        assert_eq!(b.elements(), &[0, 1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn set_b_explicit_examples() {
        let b = build_set_b_explicit(4, 2, pm(101)).unwrap();
        assert_eq!(
            b.elements(),
            &[0, 1, 2, 3, 8, 9, 10, 11, 16, 17, 18, 19, 24, 25, 26, 27]
        );
        let b = build_set_b_explicit(2, 1, pm(101)).unwrap();
        assert_eq!(b.elements(), &[0, 1]);
        let b = build_set_b_explicit(4, 3, pm(4001)).unwrap();
        assert_eq!(b.len(), 64);
        assert_eq!(*b.elements().last().unwrap(), 219);
        let b = build_set_b_explicit(2, 2, pm(101)).unwrap();
        assert_eq!(b.elements(), &[0, 1, 4, 5]);
        assert!(matches!(
            build_set_b_explicit(4, 3, pm(101)),
            Err(ConstructionError::Overflow { max: 219, p: 101 })
        ));
    }

    #[test]
    fn select_prime_examples() {
        assert_eq!(select_prime_for_k(100, 0.0).unwrap().get(), 10007);
        assert_eq!(select_prime_for_k(2, 0.0).unwrap().get(), 5);
        assert!(matches!(
            select_prime_for_k(10_000_000_000, 0.0),
            Err(ConstructionError::RangeTooLarge)
        ));
    }

    #[test]
    fn capacity_report_toy() {
        let rep = capacity_check(pm(101), 2, 1.0 / 807.0, 24).unwrap();
        assert_eq!(rep.ab_product, 24);
        assert!(rep.eps_ok);
        assert!(rep.n_le_p_power);
        // the asymptotic inequality p^((2+eps)/(2-eps)) <= |A||B| does not
        // hold at desk scale; the report just records it
        assert!(!rep.p_power_le_ab);
        let rep = capacity_check(pm(101), 2, 0.01, 24).unwrap();
        assert!(!rep.eps_ok);
        let m = 2u64;
        let boundary = capacity_check(pm(101), m, 1.0 / (403.0 * m as f64), 24).unwrap();
        assert!(boundary.eps_ok);
    }

    #[test]
    fn column_examples() {
        let c00 = column(pm(5), 0, 0);
        for z in &c00 {
            assert!((z - Complex64::new(1.0 / 5f64.sqrt(), 0.0)).norm() < 1e-12);
        }
        // same a, different b: exact orthogonality
        let u = column(pm(5), 1, 0);
        let v = column(pm(5), 1, 1);
        assert!(inner_product(&u, &v).norm() < 1e-12);
        // distinct a: |<u,v>| = |G(a1-a2, b1-b2)|/p = 1/sqrt(p)
        let w = column(pm(5), 2, 0);
        assert!((inner_product(&u, &w).norm() - 1.0 / 5f64.sqrt()).abs() < 1e-9);
        // unit norms
        for (a, b) in [(0, 0), (1, 0), (2, 3), (4, 4)] {
            let c = column(pm(5), a, b);
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn build_matrix_lexicographic_and_capacity() {
        let m = build_matrix(pm(101), 2, 24).unwrap();
        assert_eq!(m.column_indices().len(), 24);
        assert_eq!(m.column_indices()[0], (1, 0));
        assert_eq!(m.column_indices()[7], (1, 7));
        assert_eq!(m.column_indices()[8], (2, 0));
        assert_eq!(m.column_indices()[23], (3, 7));
        assert!(matches!(
            build_matrix(pm(101), 2, 25),
            Err(ConstructionError::CapacityExceeded { n: 25, cap: 24 })
        ));
        let single = build_matrix(pm(101), 2, 1).unwrap();
        assert_eq!(single.column_indices(), &[(1, 0)]);
        // determinism: identical params give identical index lists
        let again = build_matrix(pm(101), 2, 24).unwrap();
        assert_eq!(m.column_indices(), again.column_indices());
    }

    #[test]
    fn ab_product_tracks_p_power() {
        // |A||B| tracks p^(1+1/(402 m)); the floors in |A| and the digit
        // count keep toy instances a bounded factor below it, never above
        for (p, m) in [(101u64, 2u64), (257, 2), (4001, 2), (10007, 2)] {
            let a = build_set_a(pm(p), m).unwrap();
            let b = build_set_b(pm(p), m).unwrap();
            let ab = (a.len() * b.len()) as f64;
            let target = (p as f64).powf(1.0 + 1.0 / (402.0 * m as f64));
            assert!(ab >= target / 16.0 && ab <= target, "p={p}: ab={ab} target={target}");
        }
    }

    #[test]
    fn realify_blocks() {
        let i_mat = DenseMatrix::from_columns(1, vec![vec![Complex64::new(0.0, 1.0)]]);
        let r = realify(&i_mat);
        assert_eq!(r.rows(), 2);
        assert_eq!(r.cols(), 2);
        assert_eq!(r.get(0, 0).re, 0.0);
        assert_eq!(r.get(0, 1).re, 1.0);
        assert_eq!(r.get(1, 0).re, -1.0);
        assert_eq!(r.get(1, 1).re, 0.0);

        let one = DenseMatrix::from_columns(1, vec![vec![Complex64::new(1.0, 0.0)]]);
        let r = realify(&one);
        assert_eq!(
            (r.get(0, 0).re, r.get(0, 1).re, r.get(1, 0).re, r.get(1, 1).re),
            (1.0, 0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn realify_preserves_image_norm() {
        let mut rng = crate::rng::SplitMix64::keyed(42, 0);
        let mut unit = || (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0;
        for _ in 0..20 {
            let cols = (0..4)
                .map(|_| (0..3).map(|_| Complex64::new(unit(), unit())).collect())
                .collect();
            let m = DenseMatrix::from_columns(3, cols);
            let z: Vec<Complex64> = (0..4).map(|_| Complex64::new(unit(), unit())).collect();
            let img = m.mul_vec(&z);
            let norm_c: f64 = img.iter().map(|w| w.norm_sqr()).sum();
            let r = realify(&m);
            let v: Vec<Complex64> = realify_vector(&z)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
            let img_r = r.mul_vec(&v);
            let norm_r: f64 = img_r.iter().map(|w| w.norm_sqr()).sum();
            assert!((norm_c - norm_r).abs() < 1e-10 * norm_c.max(1.0));
        }
    }
}
