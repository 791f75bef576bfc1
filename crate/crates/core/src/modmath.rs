//! Exact modular arithmetic over F_p, deterministic primality, and
//! brute-force exponential-sum oracles.
//!
//! All products of residues go through a 128-bit intermediate, so every
//! operation is exact for moduli below 2^62.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModMathError {
    #[error("no prime in interval [{lo}, {hi}]")]
    NoPrimeInInterval { lo: u64, hi: u64 },
    #[error("{0} is not an odd prime in [3, 2^62)")]
    NotAPrimeModulus(u64),
    #[error("interval bound {0} exceeds the 62-bit range")]
    RangeTooLarge(u64),
}

/// (a + b) mod q, assuming a, b < q < 2^63.
#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q { s - q } else { s }
}

/// (a - b) mod q, assuming a, b < q.
#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b { a - b } else { q - b + a }
}

/// (a * b) mod q via a widened 128-bit intermediate.
#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// a^e mod q by square-and-multiply.
pub fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut acc: u64 = 1 % q;
    a %= q;
    while e != 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, q);
        }
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    acc
}

/// Deterministic primality test, exact for all n < 2^63.
///
/// Miller-Rabin with the 12 smallest prime bases, a witness set known to be
/// exact for every n below 3.3 * 10^24 (Sorenson-Webster).
pub fn is_prime(n: u64) -> bool {
    debug_assert!(n < 1 << 63);
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let trailing = (n - 1).trailing_zeros();
    let odd_part = (n - 1) >> trailing;
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, odd_part, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..trailing {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime p with lo <= p <= hi.
pub fn find_prime_in_interval(lo: u64, hi: u64) -> Result<u64, ModMathError> {
    assert!(lo >= 2 && lo <= hi && hi < 1 << 62);
    let mut n = lo;
    if n == 2 && is_prime(2) && hi >= 2 {
        return Ok(2);
    }
    if n % 2 == 0 {
        n += 1;
    }
    while n <= hi {
        if is_prime(n) {
            return Ok(n);
        }
        n += 2;
    }
    Err(ModMathError::NoPrimeInInterval { lo, hi })
}

/// An odd prime modulus in [3, 2^62).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self, ModMathError> {
        if p >= 3 && p < (1 << 62) && p % 2 == 1 && is_prime(p) {
            Ok(PrimeModulus(p))
        } else {
            Err(ModMathError::NotAPrimeModulus(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

/// e^{2 pi i t / p} for a residue t.
pub fn unit_root(p: PrimeModulus, t: u64) -> Complex64 {
    debug_assert!(t < p.get());
    Complex64::from_polar(1.0, TAU * t as f64 / p.get() as f64)
}

const ROOT_TABLE_MAX: u64 = 1 << 22;

/// Table of all p-th roots of unity for one modulus, built once per matrix.
///
/// Above [`ROOT_TABLE_MAX`] the table would not fit comfortably in memory and
/// roots are evaluated directly; desk-scale matrix work never hits that path.
pub struct UnitRoots {
    p: PrimeModulus,
    table: Option<Vec<Complex64>>,
}

impl UnitRoots {
    pub fn new(p: PrimeModulus) -> Self {
        let table = if p.get() <= ROOT_TABLE_MAX {
            Some((0..p.get()).map(|t| unit_root(p, t)).collect())
        } else {
            None
        };
        UnitRoots { p, table }
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    #[inline]
    pub fn root(&self, t: u64) -> Complex64 {
        match &self.table {
            Some(tab) => tab[t as usize],
            None => unit_root(self.p, t),
        }
    }
}

/// Complete quadratic Gauss sum sum_{x=1}^{p} e_p(a x^2 + b x) by direct
/// summation. |result| = sqrt(p) when a != 0 mod p; 0 when a = 0, b != 0.
pub fn gauss_sum_bruteforce(p: PrimeModulus, a: u64, b: u64) -> Complex64 {
    debug_assert!(a < p.get() && b < p.get());
    let roots = UnitRoots::new(p);
    gauss_sum_with_roots(&roots, a, b)
}

/// Same sum, reusing a prebuilt root table.
pub fn gauss_sum_with_roots(roots: &UnitRoots, a: u64, b: u64) -> Complex64 {
    let q = roots.modulus().get();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..=q {
        let x = x % q;
        let phase = add_mod(mul_mod(a, mul_mod(x, x, q), q), mul_mod(b, x, q), q);
        acc += roots.root(phase);
    }
    acc
}
