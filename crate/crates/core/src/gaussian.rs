//! Gaussian integers, the split primes π = e + 2if, and quadratic residue
//! symbols modulo a Gaussian prime.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ntheory::{is_prime, sqrt_mod_prime, ResidueSymbol};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussianInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        GaussianInt { re: re.into(), im: im.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn one_plus_i() -> Self {
        Self::new(1, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> Self {
        GaussianInt { re: self.re.clone(), im: -&self.im }
    }

    pub fn pow_mod(&self, exp: &BigInt, modulus: &GaussianInt) -> Result<GaussianInt> {
        let mut acc = gi_mod(&GaussianInt::one(), modulus)?;
        let mut base = gi_mod(self, modulus)?;
        let mut e = exp.clone();
        let two = BigInt::from(2);
        while e.is_positive() {
            if e.is_odd() {
                acc = gi_mod(&(&acc * &base), modulus)?;
            }
            base = gi_mod(&(&base * &base), modulus)?;
            e /= &two;
        }
        Ok(acc)
    }

    pub fn divides(&self, alpha: &GaussianInt) -> Result<bool> {
        Ok(gi_mod(alpha, self)?.is_zero())
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for &GaussianInt {
    type Output = GaussianInt;
    fn add(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &GaussianInt {
    type Output = GaussianInt;
    fn sub(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &GaussianInt {
    type Output = GaussianInt;
    fn mul(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt { re: -&self.re, im: -&self.im }
    }
}

/// Nearest integer to num/den (den > 0), ties toward negative infinity.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (&two * num - den).div_ceil(&(&two * den))
}

/// Remainder of α by μ with N(r) ≤ N(μ)/2.
pub fn gi_mod(alpha: &GaussianInt, mu: &GaussianInt) -> Result<GaussianInt> {
    if mu.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let n = mu.norm();
    let t = alpha * &mu.conj();
    let q = GaussianInt { re: round_div(&t.re, &n), im: round_div(&t.im, &n) };
    Ok(alpha - &(&q * mu))
}

/// The factorization p = π1·π2 with π1 = e + 2if, π2 = e - 2if, e odd, e,f > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianPrimePair {
    pub p: u64,
    pub pi1: GaussianInt,
    pub pi2: GaussianInt,
    pub e: u64,
    pub f: u64,
}

fn gi_gcd(a: &GaussianInt, b: &GaussianInt) -> GaussianInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = gi_mod(&a, &b).expect("nonzero divisor");
        a = b;
        b = r;
    }
    a
}

pub fn split_prime(p: u64) -> Result<GaussianPrimePair> {
    if p % 4 != 1 || !is_prime(p) {
        return Err(Error::NotSplit(p));
    }
    let r = sqrt_mod_prime(-1, p)?;
    let g = gi_gcd(&GaussianInt::new(p, 0), &GaussianInt::new(r, 1));
    let (x, y) = (g.re.abs(), g.im.abs());
    let (odd, even) = if x.is_odd() { (x, y) } else { (y, x) };
    let e: u64 = odd.try_into().map_err(|_| Error::NotSplit(p))?;
    let two_f: u64 = even.try_into().map_err(|_| Error::NotSplit(p))?;
    let f = two_f / 2;
    if e * e + 4 * f * f != p {
        return Err(Error::NotSplit(p));
    }
    Ok(GaussianPrimePair {
        p,
        pi1: GaussianInt::new(e, 2 * f),
        pi2: GaussianInt::new(e, -2 * (f as i64)),
        e,
        f,
    })
}

/// (α/π) = α^((N(π)-1)/2) mod π, for a Gaussian prime π of odd norm.
pub fn gi_quadratic_symbol(alpha: &GaussianInt, pi: &GaussianInt) -> Result<ResidueSymbol> {
    let n = pi.norm();
    if n.is_even() || n <= BigInt::one() {
        return Err(Error::InvalidPrime(pi.to_string()));
    }
    if pi.divides(alpha)? {
        return Err(Error::ZeroSymbol);
    }
    let r = alpha.pow_mod(&((&n - 1) / 2), pi)?;
    if pi.divides(&(&r - &GaussianInt::one()))? {
        Ok(ResidueSymbol::PLUS)
    } else if pi.divides(&(&r + &GaussianInt::one()))? {
        Ok(ResidueSymbol::MINUS)
    } else {
        Err(Error::InvalidPrime(pi.to_string()))
    }
}

pub fn symbol_one_plus_i(pi: &GaussianInt) -> Result<ResidueSymbol> {
    gi_quadratic_symbol(&GaussianInt::one_plus_i(), pi)
}
