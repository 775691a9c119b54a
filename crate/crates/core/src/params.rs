//! Prime triples (p1, p2, q), their invariant tuple (γ, δ, N, m, n, π, β, I),
//! the predicted order/class/coclass and label of G, and the census scan.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gi_quadratic_symbol, split_prime, symbol_one_plus_i};
use crate::ntheory::{
    is_prime, legendre, primes_up_to, quartic_residue_symbol, quartic_symbol_of_two, ResidueSymbol,
};
use crate::quadfield::{quad_field_data, QuadFieldData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldTriple {
    pub p1: u64,
    pub p2: u64,
    pub q: u64,
    pub d: u64,
}

impl fmt::Display for FieldTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}.{}.{}", self.d, self.p1, self.p2, self.q)
    }
}

fn sym(a: i64, p: u64) -> i8 {
    legendre(a, p).map(ResidueSymbol::value).unwrap_or(0)
}

/// Accepts (p1, p2, q) in either order of p1, p2; the stored triple has p1 < p2.
pub fn validate_triple(p1: u64, p2: u64, q: u64) -> Result<FieldTriple> {
    let mut failed = Vec::new();
    for (name, v) in [("p1", p1), ("p2", p2), ("q", q)] {
        if !is_prime(v) {
            failed.push(format!("{name} = {v} is not prime"));
        }
    }
    if !failed.is_empty() {
        return Err(Error::InvalidTriple(failed));
    }
    if p1 == p2 {
        failed.push("p1 = p2".to_string());
    }
    if p1 % 4 != 1 {
        failed.push("p1 ≢ 1 (mod 4)".to_string());
    }
    if p2 % 4 != 1 {
        failed.push("p2 ≢ 1 (mod 4)".to_string());
    }
    if q % 4 != 3 {
        failed.push("q ≢ 3 (mod 4)".to_string());
    }
    let checks = [
        ("legendre(2,p1) ≠ -1", 2, p1),
        ("legendre(2,p2) ≠ -1", 2, p2),
        ("legendre(p1,q) ≠ -1", p1 as i64, q),
        ("legendre(p2,q) ≠ -1", p2 as i64, q),
    ];
    for (name, a, p) in checks {
        if p > 2 && sym(a, p) != -1 {
            failed.push(name.to_string());
        }
    }
    if !failed.is_empty() {
        return Err(Error::InvalidTriple(failed));
    }
    let (p1, p2) = (p1.min(p2), p1.max(p2));
    Ok(FieldTriple { p1, p2, q, d: p1 * p2 * q })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TauIdeal {
    H1H3,
    H2H3,
}

impl fmt::Display for TauIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TauIdeal::H1H3 => "H1H3",
            TauIdeal::H2H3 => "H2H3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInvariants {
    pub triple: FieldTriple,
    pub gamma: i8,
    /// (p1/p2)_4 (p2/p1)_4, present iff γ = +1.
    pub delta: Option<i8>,
    pub unit_norm: i8,
    pub m: u32,
    pub n: u32,
    pub pi_symbol: i8,
    pub beta: i8,
    /// (p1p2/2)_4 (2p1/p2)_4 (2p2/p1)_4, present iff γ = -1.
    pub big_i: Option<i8>,
    pub disc_k: u128,
    pub order_g: u64,
    pub class_g: u32,
    pub coclass_g: u32,
    pub tau_ideal: TauIdeal,
    pub group_label: String,
}

/// Source of per-radicand quadratic-field data; the CLI substitutes a cached one.
pub trait QuadFieldSource: Sync {
    fn data(&self, m: i64) -> Result<QuadFieldData>;
}

pub struct DirectSource;

impl QuadFieldSource for DirectSource {
    fn data(&self, m: i64) -> Result<QuadFieldData> {
        quad_field_data(m)
    }
}

/// Radicands whose quadratic-field data the invariants consume.
pub fn radicands(t: &FieldTriple) -> [i64; 2] {
    let pp = (t.p1 * t.p2) as i64;
    [-pp, pp]
}

pub fn compute_invariants(t: &FieldTriple) -> Result<FieldInvariants> {
    compute_invariants_with(t, &DirectSource)
}

pub fn compute_invariants_with(t: &FieldTriple, src: &dyn QuadFieldSource) -> Result<FieldInvariants> {
    let (p1, p2) = (t.p1, t.p2);
    let pp = (p1 * p2) as i64;
    let gamma = legendre(p1 as i64, p2)?.value();
    let delta = if gamma == 1 {
        Some((quartic_residue_symbol(p1 as i64, p2)? * quartic_residue_symbol(p2 as i64, p1)?).value())
    } else {
        None
    };
    let big_i = if gamma == -1 {
        let v = quartic_symbol_of_two(pp)?
            * quartic_residue_symbol(2 * p1 as i64, p2)?
            * quartic_residue_symbol(2 * p2 as i64, p1)?;
        Some(v.value())
    } else {
        None
    };
    let imag = src.data(-pp)?;
    let real = src.data(pp)?;
    let unit = real.unit.as_ref().ok_or(Error::InvalidRadicand(pp))?;
    let m = imag.h2.trailing_zeros().checked_sub(1).ok_or(Error::InvalidRadicand(-pp))?;
    let n = real.h2.trailing_zeros();
    let s1 = split_prime(p1)?;
    let s2 = split_prime(p2)?;
    let pi_symbol = gi_quadratic_symbol(&s1.pi1, &s2.pi1)?.value();
    let beta = (symbol_one_plus_i(&s1.pi1)? * symbol_one_plus_i(&s2.pi1)?).value();
    let tau_ideal = match (gamma, big_i) {
        (1, _) if beta == 1 => TauIdeal::H1H3,
        (1, _) => TauIdeal::H2H3,
        (_, Some(i)) if i == pi_symbol => TauIdeal::H1H3,
        _ => TauIdeal::H2H3,
    };
    let mut inv = FieldInvariants {
        triple: *t,
        gamma,
        delta,
        unit_norm: unit.norm,
        m,
        n,
        pi_symbol,
        beta,
        big_i,
        disc_k: 16 * (t.d as u128).pow(2),
        order_g: 0,
        class_g: 0,
        coclass_g: 0,
        tau_ideal,
        group_label: String::new(),
    };
    let (order, class, coclass) = predicted_order_class_coclass(&inv);
    inv.order_g = order;
    inv.class_g = class;
    inv.coclass_g = coclass;
    inv.group_label = group_label(inv.m, inv.n, inv.unit_norm);
    Ok(inv)
}

pub fn predicted_order_class_coclass(inv: &FieldInvariants) -> (u64, u32, u32) {
    let order = 1u64 << (inv.m + inv.n + 3);
    let cc4 = inv.gamma == 1 && inv.unit_norm == 1 && inv.delta == Some(-1);
    let class = if inv.gamma == -1 {
        inv.m + 1
    } else if cc4 {
        inv.m
    } else {
        inv.n + 2
    };
    (order, class, if cc4 { 4 } else { 3 })
}

/// Group label keyed by (m, n, N).
pub fn group_label(m: u32, n: u32, norm: i8) -> String {
    let known = match (m, n, norm) {
        (2, 1, -1) => Some("64.180"),
        (2, 2, -1) => Some("128.985"),
        (2, 3, -1) => Some("256.6720"),
        (2, 4, -1) => Some("512.60892"),
        (3, 1, -1) => Some("128.986"),
        (4, 1, -1) => Some("256.6721"),
        (5, 1, -1) => Some("512.60893"),
        (6, 1, -1) => Some("512.60891-#1;3"),
        (2, 2, 1) => Some("128.986v"),
        (3, 1, 1) => Some("128.439"),
        (4, 1, 1) => Some("256.5492"),
        (5, 1, 1) => Some("512.58909"),
        _ => None,
    };
    match known {
        Some(l) => l.to_string(),
        None => format!("unlabeled({m},{n},{norm})"),
    }
}

/// All valid triples with d < max_d, ascending in d.
pub fn candidate_triples(max_d: u64) -> Vec<FieldTriple> {
    if max_d <= 3 * 5 * 13 {
        return Vec::new();
    }
    let ps = primes_up_to(max_d / (3 * 5) + 1);
    let split: Vec<u64> = ps.iter().copied().filter(|p| p % 8 == 5).collect();
    let inert: Vec<u64> = ps.iter().copied().filter(|p| p % 4 == 3).collect();
    let mut out = Vec::new();
    for (i, &p1) in split.iter().enumerate() {
        for &p2 in &split[i + 1..] {
            let pp = p1 * p2;
            if pp * 3 >= max_d {
                break;
            }
            for &q in &inert {
                if pp * q >= max_d {
                    break;
                }
                if sym(p1 as i64, q) == -1 && sym(p2 as i64, q) == -1 {
                    out.push(FieldTriple { p1, p2, q, d: pp * q });
                }
            }
        }
    }
    out.sort_unstable_by_key(|t| t.d);
    out
}

pub fn scan(max_d: u64) -> Result<Vec<(FieldTriple, FieldInvariants)>> {
    scan_with(max_d, &DirectSource)
}

pub fn scan_with(max_d: u64, src: &dyn QuadFieldSource) -> Result<Vec<(FieldTriple, FieldInvariants)>> {
    candidate_triples(max_d)
        .into_par_iter()
        .map(|t| compute_invariants_with(&t, src).map(|inv| (t, inv)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(p1: u64, p2: u64, q: u64) -> FieldInvariants {
        compute_invariants(&validate_triple(p1, p2, q).unwrap()).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(validate_triple(5, 13, 7).unwrap().d, 455);
        assert!(validate_triple(5, 61, 7).is_ok());
        match validate_triple(13, 17, 3) {
            Err(Error::InvalidTriple(c)) => assert!(c.contains(&"legendre(2,p2) ≠ -1".to_string())),
            other => panic!("{other:?}"),
        }
        match validate_triple(5, 13, 11) {
            Err(Error::InvalidTriple(c)) => assert_eq!(c, vec!["legendre(p1,q) ≠ -1".to_string()]),
            other => panic!("{other:?}"),
        }
        assert_eq!(validate_triple(13, 5, 7).unwrap().p1, 5);
    }

    #[test]
    fn invariant_examples() {
        let a = inv(5, 13, 7);
        assert_eq!((a.gamma, a.unit_norm, a.m, a.n, a.coclass_g, a.disc_k), (-1, -1, 2, 1, 3, 3312400));
        let b = inv(5, 61, 7);
        assert_eq!((b.gamma, b.delta, b.unit_norm, b.m, b.n, b.coclass_g), (1, Some(-1), 1, 3, 1, 4));
        let c = inv(5, 29, 3);
        assert_eq!((c.gamma, c.delta, c.unit_norm, c.m, c.n, c.coclass_g), (1, Some(1), -1, 2, 2, 3));
        assert_eq!(a.group_label, "64.180");
        assert_eq!(a.order_g, 64);
    }

    #[test]
    fn order_class_coclass_cases() {
        let mut x = inv(5, 13, 7);
        assert_eq!(predicted_order_class_coclass(&x), (64, 3, 3));
        x = inv(5, 61, 7);
        assert_eq!(predicted_order_class_coclass(&x), (128, 3, 4));
        x = inv(5, 29, 3);
        assert_eq!(predicted_order_class_coclass(&x), (128, 4, 3));
    }

    #[test]
    fn labels() {
        assert_eq!(group_label(2, 1, -1), "64.180");
        assert_eq!(group_label(3, 1, 1), "128.439");
        assert_eq!(group_label(6, 1, -1), "512.60891-#1;3");
        assert_eq!(group_label(2, 3, 1), "unlabeled(2,3,1)");
    }

    #[test]
    fn small_scans() {
        assert!(scan(105).unwrap().is_empty());
        let ds: Vec<u64> = scan(500).unwrap().iter().map(|(t, _)| t.d).collect();
        assert!(ds.contains(&435) && ds.contains(&455));
        assert!(ds.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn candidates_match_validation() {
        let fast: Vec<u64> = candidate_triples(20000).iter().map(|t| t.d).collect();
        let mut slow = Vec::new();
        let ps = primes_up_to(20000);
        for &p1 in ps.iter().take_while(|&&p| p * p * 2 < 20000) {
            for &p2 in ps.iter().filter(|&&p| p > p1).take_while(|&&p| p1 * p * 2 < 20000) {
                for &q in ps.iter().take_while(|&&q| p1 * p2 * q < 20000) {
                    if validate_triple(p1, p2, q).is_ok() {
                        slow.push(p1 * p2 * q);
                    }
                }
            }
        }
        slow.sort_unstable();
        assert_eq!(fast, slow);
    }
}
