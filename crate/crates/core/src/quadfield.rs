//! Quadratic fields Q(√m): binary quadratic forms, imaginary class groups,
//! narrow class numbers of real fields, fundamental units.
//!
//! Form coefficients are `i64`; every discriminant handled here satisfies
//! |D| < 2^40, far below the overflow threshold of the `i128` intermediates.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ntheory::is_squarefree;

/// Finite abelian 2-group Z/2^e1 × Z/2^e2 × ..., exponents nondecreasing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbelianType {
    pub exponents: Vec<u32>,
}

impl AbelianType {
    pub fn new(mut exponents: Vec<u32>) -> Self {
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable();
        AbelianType { exponents }
    }

    pub fn trivial() -> Self {
        AbelianType::default()
    }

    /// Type from cyclic orders given as powers of two, e.g. `[2, 4]`.
    pub fn from_orders(orders: &[u64]) -> Self {
        AbelianType::new(orders.iter().map(|o| o.trailing_zeros()).collect())
    }

    pub fn log_order(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn order(&self) -> u64 {
        1u64 << self.log_order()
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.exponents.iter().map(|&e| 1u64 << e).collect()
    }
}

impl fmt::Display for AbelianType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders().iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// 2-parts of a list of invariant factors.
pub fn two_part(factors: &[u64]) -> AbelianType {
    AbelianType::new(factors.iter().filter(|&&f| f > 0).map(|f| f.trailing_zeros()).collect())
}

pub fn discriminant_of(m: i64) -> Result<i64> {
    if m == 0 || m == 1 || !is_squarefree(m) {
        return Err(Error::InvalidRadicand(m));
    }
    Ok(if m.rem_euclid(4) == 1 { m } else { 4 * m })
}

/// Fundamental discriminant check: D ≡ 1 mod 4 squarefree, or D = 4m with m ≡ 2,3 mod 4 squarefree.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryQuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryQuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryQuadraticForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        BinaryQuadraticForm::new(1, b, (b * b - d) / 4)
    }

    pub fn inverse(&self) -> Self {
        BinaryQuadraticForm::new(self.a, -self.b, self.c).reduced()
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Reduction of a positive definite form.
    pub fn reduced(&self) -> Self {
        let d = self.disc();
        let (mut a, mut b, mut c) = (self.a, self.b, self.c);
        loop {
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
            }
            // bring b into (-a, a]
            let r = (b + a).rem_euclid(2 * a) - a;
            let r = if r == -a { a } else { r };
            if r != b {
                b = r;
                c = (b * b - d) / (4 * a);
                continue;
            }
            if a > c {
                continue;
            }
            if (a == c || b.abs() == a) && b < 0 {
                b = -b;
            }
            return BinaryQuadraticForm::new(a, b, c);
        }
    }

    /// Gaussian composition of two primitive definite forms of equal discriminant, reduced.
    pub fn compose(&self, other: &Self) -> Self {
        let (f1, f2) = if self.a > other.a { (other, self) } else { (self, other) };
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let g = a2.extended_gcd(&a1);
            (g.x, g.gcd)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let g = s.extended_gcd(&d);
            (g.x, -g.y, g.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
        BinaryQuadraticForm::new(a3 as i64, b3 as i64, c3 as i64).reduced()
    }
}

impl fmt::Display for BinaryQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// All reduced positive definite forms of discriminant D < 0 (primitive ones only).
pub fn reduced_forms(d: i64) -> Vec<BinaryQuadraticForm> {
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = BinaryQuadraticForm::new(a, b, c);
            if f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                out.push(f);
            }
        }
        a += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImaginaryClassGroup {
    pub h: u64,
    /// Invariant factors d1 | d2 | ..., ascending.
    pub invariant_factors: Vec<u64>,
    pub cl2: AbelianType,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Invariant factors of a finite abelian group from its element orders.
pub fn invariant_factors_from_orders(orders: &[u64]) -> Vec<u64> {
    let h = orders.len() as u64;
    let mut primary: Vec<Vec<u64>> = Vec::new();
    for l in prime_factors(h) {
        // count_k = #{g : g^(l^k) = 1}
        let mut exps: Vec<u32> = Vec::new();
        let mut prev = 1u64;
        let mut lk = 1u64;
        loop {
            lk *= l;
            let count = orders.iter().filter(|&&o| lk.is_multiple_of(o)).count() as u64;
            if count == prev {
                break;
            }
            let mut rank = 0;
            let mut ratio = count / prev;
            while ratio > 1 {
                ratio /= l;
                rank += 1;
            }
            exps.push(rank);
            prev = count;
        }
        // exps[k] = number of cyclic factors of order ≥ l^(k+1)
        let r0 = exps.first().copied().unwrap_or(0) as usize;
        let mut cyc = vec![1u64; r0];
        for (k, &r) in exps.iter().enumerate() {
            for c in cyc.iter_mut().take(r as usize) {
                *c = l.pow(k as u32 + 1);
            }
        }
        primary.push(cyc);
    }
    let width = primary.iter().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![1u64; width];
    for cyc in &primary {
        for (i, &c) in cyc.iter().enumerate() {
            factors[i] *= c;
        }
    }
    factors.sort_unstable();
    factors
}

pub fn class_group_imaginary(d: i64) -> Result<ImaginaryClassGroup> {
    if d >= 0 || !is_fundamental(d) {
        return Err(Error::InvalidDiscriminant(d));
    }
    let forms = reduced_forms(d);
    let index: HashMap<BinaryQuadraticForm, usize> =
        forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let id = BinaryQuadraticForm::principal(d).reduced();
    let mut orders = Vec::with_capacity(forms.len());
    for f in &forms {
        let mut g = *f;
        let mut o = 1u64;
        while g != id {
            g = g.compose(f);
            o += 1;
            debug_assert!(index.contains_key(&g));
            if o > forms.len() as u64 {
                return Err(Error::InvalidDiscriminant(d));
            }
        }
        orders.push(o);
    }
    let factors = invariant_factors_from_orders(&orders);
    let cl2 = two_part(&factors);
    Ok(ImaginaryClassGroup { h: forms.len() as u64, invariant_factors: factors, cl2 })
}

fn reduced_indefinite_forms(d: i64) -> Vec<BinaryQuadraticForm> {
    let s = d.sqrt();
    let mut out = Vec::new();
    let mut b = if d % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let n = (d - b * b) / 4; // -ac > 0
        let mut x = 1;
        while x * x <= n {
            if n % x == 0 {
                for a_abs in [x, n / x] {
                    let lo = 2 * a_abs + b;
                    let hi = 2 * a_abs - b;
                    if lo * lo > d && (hi < 0 || hi * hi < d) {
                        for sign in [1, -1] {
                            let a = sign * a_abs;
                            let c = -n / a;
                            out.push(BinaryQuadraticForm::new(a, b, c));
                        }
                    }
                    if x == n / x {
                        break;
                    }
                }
            }
            x += 1;
        }
        b += 2;
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn rho(f: &BinaryQuadraticForm, d: i64, s: i64) -> BinaryQuadraticForm {
    let c2 = 2 * f.c.abs();
    let b = s - (s + f.b).rem_euclid(c2);
    BinaryQuadraticForm::new(f.c, b, (b * b - d) / (4 * f.c))
}

/// h⁺(D) as the number of ρ-cycles of reduced indefinite forms.
pub fn narrow_class_number_real(d: i64) -> Result<u64> {
    if d <= 0 || !is_fundamental(d) || d.sqrt() * d.sqrt() == d {
        return Err(Error::InvalidDiscriminant(d));
    }
    let s = d.sqrt();
    let forms = reduced_indefinite_forms(d);
    let index: HashMap<BinaryQuadraticForm, usize> =
        forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut seen = vec![false; forms.len()];
    let mut cycles = 0;
    for start in 0..forms.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            let next = rho(&forms[i], d, s);
            i = *index.get(&next).ok_or(Error::InvalidDiscriminant(d))?;
        }
    }
    Ok(cycles)
}

/// ε = (x_num + y_num·√m)/denom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalUnit {
    pub x_num: BigInt,
    pub y_num: BigInt,
    pub denom: u8,
    pub radicand: i64,
    pub norm: i8,
}

impl FundamentalUnit {
    pub fn satisfies_norm_equation(&self) -> bool {
        let lhs = &self.x_num * &self.x_num - BigInt::from(self.radicand) * &self.y_num * &self.y_num;
        let d2 = BigInt::from(self.denom as i64 * self.denom as i64);
        lhs == d2 * BigInt::from(self.norm)
    }
}

/// Continued fraction of (P + √m)/Q; returns the first convergent p/q for which
/// `norm(p, q)` is ±1, with that norm.
fn first_unit_convergent(
    m: i64,
    p0: i64,
    q0: i64,
    norm: impl Fn(&BigInt, &BigInt) -> BigInt,
) -> (BigInt, BigInt, i8) {
    let s = m.sqrt();
    let (mut p, mut q) = (p0, q0);
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    loop {
        let a = Integer::div_floor(&(p + s), &q);
        let h_next = BigInt::from(a) * &h + &h_prev;
        let k_next = BigInt::from(a) * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let n = norm(&h, &k);
        if n.abs().is_one() {
            return (h, k, n.to_i8().expect("unit norm"));
        }
        p = a * q - p;
        q = (m - p * p) / q;
    }
}

pub fn fundamental_unit(m: i64) -> Result<FundamentalUnit> {
    if m <= 1 || !is_squarefree(m) {
        return Err(Error::InvalidRadicand(m));
    }
    let mb = BigInt::from(m);
    if m % 4 == 1 {
        let w = BigInt::from((m - 1) / 4);
        // convergents p/q of ω = (1+√m)/2; unit p - q·ω̄ = ((2p-q) + q√m)/2
        let (p, q, norm) = first_unit_convergent(m, 1, 2, |p, q| p * p - p * q - &w * q * q);
        let x = BigInt::from(2) * &p - &q;
        let (x_num, y_num, denom) = if x.is_even() && q.is_even() {
            (x / 2, q / 2, 1)
        } else {
            (x, q, 2)
        };
        Ok(FundamentalUnit { x_num, y_num, denom, radicand: m, norm })
    } else {
        let (p, q, norm) = first_unit_convergent(m, 0, 1, |p, q| p * p - &mb * q * q);
        Ok(FundamentalUnit { x_num: p, y_num: q, denom: 1, radicand: m, norm })
    }
}

/// h(m) and its 2-part for a real quadratic field.
pub fn class_number_real(m: i64) -> Result<(u64, u64)> {
    let d = discriminant_of(m)?;
    if m <= 1 {
        return Err(Error::InvalidRadicand(m));
    }
    let hp = narrow_class_number_real(d)?;
    let unit = fundamental_unit(m)?;
    let h = if unit.norm == -1 { hp } else { hp / 2 };
    Ok((h, 1 << h.trailing_zeros()))
}

/// Invariants of Q(√m) reused by the census and the cache.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadFieldData {
    pub radicand: i64,
    pub discriminant: i64,
    pub h: u64,
    pub h2: u64,
    pub cl2: Option<AbelianType>,
    /// Full invariant factors (imaginary case).
    pub structure: Option<Vec<u64>>,
    /// Narrow class number (real case).
    pub h_plus: Option<u64>,
    pub unit: Option<FundamentalUnit>,
}

pub fn quad_field_data(m: i64) -> Result<QuadFieldData> {
    let d = discriminant_of(m)?;
    if m < 0 {
        let cg = class_group_imaginary(d)?;
        Ok(QuadFieldData {
            radicand: m,
            discriminant: d,
            h: cg.h,
            h2: cg.cl2.order(),
            cl2: Some(cg.cl2),
            structure: Some(cg.invariant_factors),
            h_plus: None,
            unit: None,
        })
    } else {
        let hp = narrow_class_number_real(d)?;
        let unit = fundamental_unit(m)?;
        let h = if unit.norm == -1 { hp } else { hp / 2 };
        Ok(QuadFieldData {
            radicand: m,
            discriminant: d,
            h,
            h2: 1 << h.trailing_zeros(),
            cl2: None,
            structure: None,
            h_plus: Some(hp),
            unit: Some(unit),
        })
    }
}

/// Number of distinct prime divisors of a discriminant.
pub fn prime_discriminant_count(d: i64) -> usize {
    prime_factors(d.unsigned_abs()).len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SquareClassWitness {
    /// ε_{p1p2} = a + b√(p1p2) with 2p1(a + sign) = r1², 2p2(a - sign) = r2².
    PairUnit { sign: i8, r1: BigInt, r2: BigInt },
    /// ε_{p1p2q} = x + y√d with p1p2(x + sign) = r1², q(x - sign) = r2².
    TripleUnit { sign: i8, r1: BigInt, r2: BigInt },
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Square-class witness for ε_{p1p2} (norm +1) or ε_{p1p2q}.
pub fn unit_square_class(unit: &FundamentalUnit, p1: u64, p2: u64) -> Result<SquareClassWitness> {
    let pp = (p1 * p2) as i64;
    if unit.denom != 1 {
        return Err(Error::SquareClassViolation("unit is not integral".into()));
    }
    let x = &unit.x_num;
    let (f1, f2, pair) = if unit.radicand == pp {
        if unit.norm != 1 {
            return Err(Error::SquareClassViolation(format!("N(ε_{pp}) = -1, case (1) needs norm +1")));
        }
        (BigInt::from(2 * p1), BigInt::from(2 * p2), true)
    } else if unit.radicand % pp == 0 {
        let q = unit.radicand / pp;
        (BigInt::from(pp), BigInt::from(q), false)
    } else {
        return Err(Error::SquareClassViolation(format!("radicand {} unrelated to {p1}·{p2}", unit.radicand)));
    };
    for sign in [1i8, -1] {
        let s = BigInt::from(sign);
        if let (Some(r1), Some(r2)) = (exact_sqrt(&(&f1 * (x + &s))), exact_sqrt(&(&f2 * (x - &s)))) {
            return Ok(if pair {
                SquareClassWitness::PairUnit { sign, r1, r2 }
            } else {
                SquareClassWitness::TripleUnit { sign, r1, r2 }
            });
        }
    }
    Err(Error::SquareClassViolation(format!("no sign works for ε_{}", unit.radicand)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // independent oracle: count reduced forms by scanning all (a, b) with a naive bound
    fn brute_h(d: i64) -> u64 {
        let mut count = 0;
        for a in 1..=(-d) {
            if 3 * a * a > -d {
                break;
            }
            for b in -a..=a {
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || (b < 0 && (-b == a || a == c)) || b == -a {
                    continue;
                }
                if a.gcd(&b).gcd(&c) == 1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn discriminants() {
        assert_eq!(discriminant_of(65).unwrap(), 65);
        assert_eq!(discriminant_of(-455).unwrap(), -455);
        assert_eq!(discriminant_of(-65).unwrap(), -260);
        assert_eq!(discriminant_of(12), Err(Error::InvalidRadicand(12)));
    }

    #[test]
    fn imaginary_examples() {
        let g = class_group_imaginary(-4).unwrap();
        assert_eq!((g.h, g.cl2.clone()), (1, AbelianType::trivial()));
        let g = class_group_imaginary(-260).unwrap();
        assert_eq!(g.cl2, AbelianType::from_orders(&[2, 4]));
        assert_eq!(g.cl2.order(), 8);
        assert_eq!(class_group_imaginary(-455).unwrap().invariant_factors, vec![2, 10]);
        assert_eq!(class_group_imaginary(-12), Err(Error::InvalidDiscriminant(-12)));
    }

    #[test]
    fn composition_group_laws() {
        for d in (-5000..-2).filter(|&d| is_fundamental(d)) {
            let forms = reduced_forms(d);
            let h = forms.len() as u64;
            let e = BinaryQuadraticForm::principal(d).reduced();
            for f in &forms {
                assert_eq!(e.compose(f), *f, "D={d}");
                assert_eq!(f.compose(&f.inverse()), e, "D={d}");
                let mut g = e;
                for _ in 0..h {
                    g = g.compose(f);
                }
                assert_eq!(g, e, "order divides h, D={d}");
            }
            if forms.len() >= 3 {
                let (x, y, z) = (forms[1], forms[forms.len() / 2], forms[forms.len() - 1]);
                assert_eq!(x.compose(&y).compose(&z), x.compose(&y.compose(&z)));
                assert_eq!(x.compose(&y), y.compose(&x));
            }
        }
    }

    #[test]
    fn genus_two_rank() {
        for d in (-3000..-4).filter(|&d| is_fundamental(d)) {
            let g = class_group_imaginary(d).unwrap();
            assert_eq!(g.cl2.rank(), prime_discriminant_count(d) - 1, "D={d}");
        }
    }

    #[test]
    fn class_numbers_match_brute_force() {
        for d in (-2000..-2).filter(|&d| is_fundamental(d)) {
            assert_eq!(class_group_imaginary(d).unwrap().h, brute_h(d), "D={d}");
        }
    }

    #[test]
    fn narrow_examples() {
        assert_eq!(narrow_class_number_real(65).unwrap(), 2);
        assert_eq!(narrow_class_number_real(5).unwrap(), 1);
        assert_eq!(narrow_class_number_real(4 * 455).unwrap(), 8);
        assert!(narrow_class_number_real(9).is_err());
    }

    #[test]
    fn units() {
        let u = fundamental_unit(65).unwrap();
        assert_eq!((u.x_num.clone(), u.y_num.clone(), u.denom, u.norm), (8.into(), 1.into(), 1, -1));
        let u = fundamental_unit(5).unwrap();
        assert_eq!((u.x_num.clone(), u.y_num.clone(), u.denom, u.norm), (1.into(), 1.into(), 2, -1));
        let u = fundamental_unit(13).unwrap();
        assert_eq!((u.x_num.clone(), u.y_num.clone(), u.denom), (3.into(), 1.into(), 2));
        let u = fundamental_unit(3).unwrap();
        assert_eq!((u.x_num.clone(), u.y_num.clone(), u.norm), (2.into(), 1.into(), 1));
        assert_eq!(fundamental_unit(1), Err(Error::InvalidRadicand(1)));
        assert_eq!(fundamental_unit(18), Err(Error::InvalidRadicand(18)));
    }

    #[test]
    fn real_class_numbers() {
        assert_eq!(class_number_real(65).unwrap(), (2, 2));
        assert_eq!(class_number_real(145).unwrap().1, 4);
        assert_eq!(class_number_real(5).unwrap(), (1, 1));
    }

    #[test]
    fn integral_units_for_one_mod_eight() {
        for m in (2..3000).filter(|&m| m % 8 == 1 && is_squarefree(m)) {
            assert_eq!(fundamental_unit(m).unwrap().denom, 1, "m={m}");
        }
    }

    #[test]
    fn two_parts() {
        assert_eq!(two_part(&[66, 2, 2]).exponents, vec![1, 1, 1]);
        assert_eq!(two_part(&[88, 8]).exponents, vec![3, 3]);
        assert_eq!(two_part(&[1]), AbelianType::trivial());
        assert_eq!(AbelianType::from_orders(&[8, 2]).to_string(), "(2,8)");
    }

    #[test]
    fn square_class_precondition() {
        let u = fundamental_unit(65).unwrap();
        assert!(matches!(unit_square_class(&u, 5, 13), Err(Error::SquareClassViolation(_))));
        let u = fundamental_unit(455).unwrap();
        assert!(matches!(
            unit_square_class(&u, 5, 13),
            Ok(SquareClassWitness::TripleUnit { .. })
        ));
    }

    #[test]
    fn invariant_factor_decomposition() {
        // Z/2 × Z/10 element orders
        let mut orders = Vec::new();
        for a in 0..2u64 {
            for b in 0..10u64 {
                let oa = if a == 0 { 1 } else { 2 };
                let ob = 10 / b.gcd(&10);
                orders.push(oa.lcm(&ob));
            }
        }
        assert_eq!(invariant_factors_from_orders(&orders), vec![2, 10]);
        assert_eq!(invariant_factors_from_orders(&[1]), Vec::<u64>::new());
    }

    proptest! {
        #[test]
        fn composition_commutes_and_associates(d in -20000i64..-3, i in 0usize..1000, j in 0usize..1000, k in 0usize..1000) {
            prop_assume!(is_fundamental(d));
            let forms = reduced_forms(d);
            let (x, y, z) = (forms[i % forms.len()], forms[j % forms.len()], forms[k % forms.len()]);
            prop_assert_eq!(x.compose(&y), y.compose(&x));
            prop_assert_eq!(x.compose(&y).compose(&z), x.compose(&y.compose(&z)));
            prop_assert_eq!(x.compose(&y).disc(), d);
        }
    }
}
