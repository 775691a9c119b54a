//! Rational number theory: sieving, primality, Legendre and quartic symbols,
//! square roots modulo a prime.
//!
//! Moduli are `u64` and intermediate products are taken in `u128`, which is
//! exact for every modulus below 2^64.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symbol value in {-1, 0, +1}; zero only when the modulus divides the argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub struct ResidueSymbol(i8);

impl ResidueSymbol {
    pub const PLUS: ResidueSymbol = ResidueSymbol(1);
    pub const MINUS: ResidueSymbol = ResidueSymbol(-1);
    pub const ZERO: ResidueSymbol = ResidueSymbol(0);

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn from_sign(positive: bool) -> Self {
        if positive {
            Self::PLUS
        } else {
            Self::MINUS
        }
    }

    pub fn is_plus(self) -> bool {
        self.0 == 1
    }
}

impl From<ResidueSymbol> for i8 {
    fn from(s: ResidueSymbol) -> i8 {
        s.0
    }
}

impl TryFrom<i8> for ResidueSymbol {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1..=1 => Ok(ResidueSymbol(v)),
            _ => Err(format!("symbol value {v} outside {{-1,0,1}}")),
        }
    }
}

impl Mul for ResidueSymbol {
    type Output = ResidueSymbol;
    fn mul(self, rhs: Self) -> Self {
        ResidueSymbol(self.0 * rhs.0)
    }
}

impl std::ops::Neg for ResidueSymbol {
    type Output = ResidueSymbol;
    fn neg(self) -> Self {
        ResidueSymbol(-self.0)
    }
}

impl fmt::Display for ResidueSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with the first twelve primes as witnesses; deterministic below 2^64.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn reduce(a: i64, p: u64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p.is_multiple_of(2) || !is_prime(p) || p > i64::MAX as u64 {
        return Err(Error::InvalidModulus(p as i64));
    }
    Ok(())
}

/// Euler's criterion.
pub fn legendre(a: i64, p: u64) -> Result<ResidueSymbol> {
    check_odd_prime(p)?;
    let r = reduce(a, p);
    if r == 0 {
        return Ok(ResidueSymbol::ZERO);
    }
    let e = pow_mod(r, (p - 1) / 2, p);
    Ok(ResidueSymbol::from_sign(e == 1))
}

/// (a/p)_4 = a^((p-1)/4) mod p for a quadratic residue a and p ≡ 1 (mod 4).
pub fn quartic_residue_symbol(a: i64, p: u64) -> Result<ResidueSymbol> {
    check_odd_prime(p)?;
    if p % 4 != 1 {
        return Err(Error::SymbolUndefined(format!("{p} is not 1 mod 4")));
    }
    if legendre(a, p)? != ResidueSymbol::PLUS {
        return Err(Error::SymbolUndefined(format!("{a} is not a quadratic residue mod {p}")));
    }
    let e = pow_mod(reduce(a, p), (p - 1) / 4, p);
    Ok(ResidueSymbol::from_sign(e == 1))
}

/// (m/2)_4 = (-1)^((m-1)/8) for m ≡ 1 (mod 8).
pub fn quartic_symbol_of_two(m: i64) -> Result<ResidueSymbol> {
    if m.rem_euclid(8) != 1 {
        return Err(Error::SymbolUndefined(format!("{m} is not 1 mod 8")));
    }
    Ok(ResidueSymbol::from_sign(((m - 1) / 8).rem_euclid(2) == 0))
}

/// Tonelli-Shanks; returns the root in 0 < r ≤ (p-1)/2.
pub fn sqrt_mod_prime(a: i64, p: u64) -> Result<u64> {
    if legendre(a, p)? != ResidueSymbol::PLUS {
        return Err(Error::NoSquareRoot { a, p });
    }
    let a = reduce(a, p);
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Ok(r.min(p - r))
}

pub fn is_squarefree(m: i64) -> bool {
    let mut n = m.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return false;
            }
        }
        d += 1;
    }
    true
}

/// Exponent of 2 in n (n ≠ 0).
pub fn two_adic_valuation(n: u64) -> u32 {
    n.trailing_zeros()
}
