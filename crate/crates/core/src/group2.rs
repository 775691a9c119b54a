//! Exact finite 2-groups.
//!
//! Two carriers share one element interface (elements are `u32` indices, the
//! identity is 0): the structural groups G = A ∪ ρA with A = Z²/Λ built from
//! the parametrized presentations, and multiplication tables obtained by coset
//! enumeration over the trivial subgroup.
//!
//! Commutators follow [a,b] = a⁻¹b⁻¹ab.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadfield::AbelianType;

pub type Elem = u32;

/// Cap on the number of elements any group may have.
pub const MAX_ORDER: usize = 1 << 13;

/// Cap on enumerated groups, whose multiplication table is quadratic in the order.
pub const MAX_TABLE_ORDER: usize = 1 << 12;

pub const DEFAULT_COSET_BUDGET: usize = 1 << 21;

/// Z²/Λ for a rank-2 lattice Λ, with canonical coordinates from the Smith form.
#[derive(Clone, Debug)]
pub struct AbelianLattice {
    pub rows: [[i64; 2]; 2],
    /// Column transform: x ↦ x·V sends Λ onto d1Z × d2Z.
    v: [[i64; 2]; 2],
    pub d1: i64,
    pub d2: i64,
}

fn col_swap(m: &mut [[i64; 2]; 2]) {
    for row in m.iter_mut() {
        row.swap(0, 1);
    }
}

/// Smith normal form of a nonsingular 2×2 integer matrix: (d1, d2, V) with d1 | d2.
pub fn smith_2x2(rows: [[i64; 2]; 2]) -> Result<(i64, i64, [[i64; 2]; 2])> {
    let mut m = rows;
    let mut v = [[1, 0], [0, 1]];
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] == 0 {
        return Err(Error::ConstructionInvariant("singular relation lattice".into()));
    }
    loop {
        // move the smallest nonzero entry to (0,0)
        let mut best = (0, 0);
        for i in 0..2 {
            for j in 0..2 {
                let cur = m[best.0][best.1];
                if m[i][j] != 0 && (cur == 0 || m[i][j].abs() < cur.abs()) {
                    best = (i, j);
                }
            }
        }
        if best.0 == 1 {
            m.swap(0, 1);
        }
        if best.1 == 1 {
            col_swap(&mut m);
            col_swap(&mut v);
        }
        let p = m[0][0];
        // clear column 0 by a row operation, row 0 by a column operation
        let qr = m[1][0].div_euclid(p);
        for j in 0..2 {
            m[1][j] -= qr * m[0][j];
        }
        let qc = m[0][1].div_euclid(p);
        for row in m.iter_mut() {
            row[1] -= qc * row[0];
        }
        for row in v.iter_mut() {
            row[1] -= qc * row[0];
        }
        if m[1][0] != 0 || m[0][1] != 0 {
            continue;
        }
        if m[1][1] % p != 0 {
            for j in 0..2 {
                m[0][j] += m[1][j];
            }
            continue;
        }
        break;
    }
    for k in 0..2 {
        if m[k][k] < 0 {
            m[k][k] = -m[k][k];
            for row in v.iter_mut() {
                row[k] = -row[k];
            }
        }
    }
    Ok((m[0][0], m[1][1], v))
}

impl AbelianLattice {
    pub fn new(rows: [[i64; 2]; 2]) -> Result<Self> {
        let (d1, d2, v) = smith_2x2(rows)?;
        Ok(AbelianLattice { rows, v, d1, d2 })
    }

    pub fn order(&self) -> usize {
        (self.d1 * self.d2) as usize
    }

    /// Canonical index of the class of s·σ + t·τ.
    pub fn index_of(&self, s: i64, t: i64) -> Elem {
        let y0 = s * self.v[0][0] + t * self.v[1][0];
        let y1 = s * self.v[0][1] + t * self.v[1][1];
        self.pack(y0, y1)
    }

    fn pack(&self, y0: i64, y1: i64) -> Elem {
        (y0.rem_euclid(self.d1) * self.d2 + y1.rem_euclid(self.d2)) as Elem
    }

    fn unpack(&self, a: Elem) -> (i64, i64) {
        let a = a as i64;
        (a / self.d2, a % self.d2)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let (a0, a1) = self.unpack(a);
        let (b0, b1) = self.unpack(b);
        self.pack(a0 + b0, a1 + b1)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let (a0, a1) = self.unpack(a);
        self.pack(-a0, -a1)
    }

    pub fn scale(&self, a: Elem, k: i64) -> Elem {
        let (a0, a1) = self.unpack(a);
        self.pack(a0 * k, a1 * k)
    }

    pub fn type_invariants(&self) -> AbelianType {
        AbelianType::new(vec![self.d1.trailing_zeros(), self.d2.trailing_zeros()])
    }
}

#[derive(Clone, Debug)]
struct Structural {
    lattice: AbelianLattice,
    phi: Vec<Elem>,
    r0: Elem,
}

impl Structural {
    fn mul(&self, x: Elem, y: Elem) -> Elem {
        let na = self.lattice.order() as Elem;
        let (e1, a1) = (x / na, x % na);
        let (e2, a2) = (y / na, y % na);
        let a1 = if e2 == 1 { self.phi[a1 as usize] } else { a1 };
        let mut a = self.lattice.add(a1, a2);
        if e1 == 1 && e2 == 1 {
            a = self.lattice.add(a, self.r0);
        }
        ((e1 ^ e2) * na) + a
    }

    fn inv(&self, x: Elem) -> Elem {
        let na = self.lattice.order() as Elem;
        let (e, a) = (x / na, x % na);
        if e == 0 {
            self.lattice.neg(a)
        } else {
            // (1,a)⁻¹ = (1, -φ(a) - r0)
            let b = self.lattice.neg(self.lattice.add(self.phi[a as usize], self.r0));
            na + b
        }
    }
}

#[derive(Clone, Debug)]
struct Table {
    n: usize,
    mul: Vec<Elem>,
    inv: Vec<Elem>,
}

#[derive(Clone, Debug)]
enum Carrier {
    Structural(Structural),
    Table(Table),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RhoVariant {
    A,
    B,
}

impl fmt::Display for RhoVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoVariant::A => "a",
            RhoVariant::B => "b",
        })
    }
}

/// A finite 2-group with three distinguished generators (ρ, σ, τ) or (x, y, z).
#[derive(Clone, Debug)]
pub struct FiniteTwoGroup {
    carrier: Carrier,
    order: usize,
    pub generators: Vec<Elem>,
    pub generator_names: Vec<String>,
}

impl FiniteTwoGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        0
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        match &self.carrier {
            Carrier::Structural(s) => s.mul(x, y),
            Carrier::Table(t) => t.mul[x as usize * t.n + y as usize],
        }
    }

    pub fn inv(&self, x: Elem) -> Elem {
        match &self.carrier {
            Carrier::Structural(s) => s.inv(x),
            Carrier::Table(t) => t.inv[x as usize],
        }
    }

    pub fn pow(&self, x: Elem, k: i64) -> Elem {
        let base = if k < 0 { self.inv(x) } else { x };
        let mut acc = 0;
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    pub fn comm(&self, a: Elem, b: Elem) -> Elem {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        self.mul(self.inv(ba), ab)
    }

    pub fn conj(&self, a: Elem, g: Elem) -> Elem {
        self.mul(self.mul(self.inv(g), a), g)
    }

    pub fn product(&self, xs: &[Elem]) -> Elem {
        xs.iter().fold(0, |acc, &x| self.mul(acc, x))
    }

    pub fn generator(&self, name: &str) -> Option<Elem> {
        self.generator_names.iter().position(|n| n == name).map(|i| self.generators[i])
    }

    pub fn is_structural(&self) -> bool {
        matches!(self.carrier, Carrier::Structural(_))
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order as Elem
    }

    pub fn element_order(&self, x: Elem) -> u64 {
        let mut y = x;
        let mut k = 1;
        while y != 0 {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    pub fn whole(&self) -> Subgroup {
        subgroup_closure(self, &self.generators)
    }
}

fn check_order(order: u64) -> Result<()> {
    if order > MAX_ORDER as u64 {
        return Err(Error::SizeCap { order, cap: MAX_ORDER as u64 });
    }
    Ok(())
}

/// The structural group for parameters (m, n, N) and, when N = +1, the ρ² variant.
pub fn build_structural_group(m: u32, n: u32, norm: i8, variant: RhoVariant) -> Result<FiniteTwoGroup> {
    build_structural_group_capped(m, n, norm, variant, MAX_ORDER)
}

/// As [`build_structural_group`] with an explicit element cap. The structural
/// carrier stores no table, so caps above `MAX_ORDER` stay cheap in memory.
pub fn build_structural_group_capped(m: u32, n: u32, norm: i8, variant: RhoVariant, cap: usize) -> Result<FiniteTwoGroup> {
    if m < 2 || n < 1 || !(norm == 1 || norm == -1) || m + n > 40 {
        return Err(Error::ParameterOutOfRange(format!("m={m}, n={n}, N={norm}")));
    }
    let order = 1u64 << (m + n + 3);
    if order > cap as u64 {
        return Err(Error::SizeCap { order, cap: cap as u64 });
    }
    let (pm, pn) = (1i64 << m, 1i64 << n);
    // rows of Λ, images of σ, τ under φ, and r0, all in (σ, τ) exponents
    let (rows, phi_s, phi_t, r0) = if norm == -1 {
        ([[pm, -2 * pn], [0, 4 * pn]], (pm - 1, 0), (0, -1), (pm / 2, pn))
    } else {
        let r0 = match variant {
            RhoVariant::A => (pm / 2, 2 * pn),
            RhoVariant::B => (pm / 2, 0),
        };
        ([[pm, 0], [0, 4 * pn]], (-1, 0), (0, 2 * pn - 1), r0)
    };
    let lattice = AbelianLattice::new(rows)?;
    let na = lattice.order();
    let phi_of = |s: i64, t: i64| {
        lattice.index_of(s * phi_s.0 + t * phi_t.0, s * phi_s.1 + t * phi_t.1)
    };
    for r in &rows {
        if phi_of(r[0], r[1]) != 0 {
            return Err(Error::ConstructionInvariant("φ does not preserve Λ".into()));
        }
    }
    let sigma = lattice.index_of(1, 0);
    let tau = lattice.index_of(0, 1);
    let (ps, pt) = (phi_of(1, 0), phi_of(0, 1));
    let mut phi = vec![0; na];
    for s in 0..2 * pm {
        for t in 0..8 * pn {
            let a = lattice.add(lattice.scale(sigma, s), lattice.scale(tau, t)) as usize;
            phi[a] = lattice.add(lattice.scale(ps, s), lattice.scale(pt, t));
        }
    }
    let r0 = lattice.index_of(r0.0, r0.1);
    for a in 0..na as Elem {
        if phi[phi[a as usize] as usize] != a {
            return Err(Error::ConstructionInvariant("φ² ≠ id".into()));
        }
    }
    if lattice.add(r0, r0) != 0 || phi[r0 as usize] != r0 {
        return Err(Error::ConstructionInvariant("r0 not a φ-fixed involution".into()));
    }
    let order = 2 * na;
    if order != 1 << (m + n + 3) {
        return Err(Error::ConstructionInvariant(format!("order {order} ≠ 2^{}", m + n + 3)));
    }
    let rho = na as Elem;
    Ok(FiniteTwoGroup {
        carrier: Carrier::Structural(Structural { lattice, phi, r0 }),
        order,
        generators: vec![rho, sigma, tau],
        generator_names: vec!["rho".into(), "sigma".into(), "tau".into()],
    })
}

/// Words over generators 0..k: entry +(g+1) for g, -(g+1) for g⁻¹.
pub type Word = Vec<i32>;

pub mod word {
    use super::Word;

    pub fn gen(g: usize) -> Word {
        vec![g as i32 + 1]
    }

    pub fn inv(w: &[i32]) -> Word {
        w.iter().rev().map(|x| -x).collect()
    }

    pub fn mul(parts: &[&[i32]]) -> Word {
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }

    pub fn pow(w: &[i32], k: i64) -> Word {
        let base = if k < 0 { inv(w) } else { w.to_vec() };
        let mut out = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            out.extend_from_slice(&base);
        }
        out
    }

    pub fn comm(a: &[i32], b: &[i32]) -> Word {
        mul(&[&inv(a), &inv(b), a, b])
    }

    /// The relator lhs·rhs⁻¹ of an equation lhs = rhs.
    pub fn eq(lhs: &[i32], rhs: &[i32]) -> Word {
        mul(&[lhs, &inv(rhs)])
    }
}

const UNDEF: u32 = u32::MAX;

struct CosetTable {
    cols: usize,
    table: Vec<u32>,
    forward: Vec<u32>,
    budget: usize,
}

impl CosetTable {
    fn get(&self, c: u32, x: usize) -> u32 {
        self.table[c as usize * self.cols + x]
    }

    fn set(&mut self, c: u32, x: usize, v: u32) {
        self.table[c as usize * self.cols + x] = v;
    }

    fn live(&self, c: u32) -> bool {
        self.forward[c as usize] == c
    }

    fn define(&mut self, c: u32, x: usize) -> Result<u32> {
        let d = self.forward.len();
        if d >= self.budget {
            return Err(Error::EnumerationOverflow(self.budget));
        }
        self.forward.push(d as u32);
        self.table.extend(std::iter::repeat_n(UNDEF, self.cols));
        self.set(c, x, d as u32);
        self.set(d as u32, x ^ 1, c);
        Ok(d as u32)
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut r = c;
        while self.forward[r as usize] != r {
            r = self.forward[r as usize];
        }
        let mut c = c;
        while self.forward[c as usize] != r {
            let next = self.forward[c as usize];
            self.forward[c as usize] = r;
            c = next;
        }
        r
    }

    fn merge(&mut self, k: u32, l: u32, queue: &mut Vec<u32>) {
        let (k, l) = (self.rep(k), self.rep(l));
        if k != l {
            let (lo, hi) = (k.min(l), k.max(l));
            self.forward[hi as usize] = lo;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let e = queue[i];
            i += 1;
            for x in 0..self.cols {
                let f = self.get(e, x);
                if f == UNDEF {
                    continue;
                }
                if self.get(f, x ^ 1) == e {
                    self.set(f, x ^ 1, UNDEF);
                }
                let (e1, f1) = (self.rep(e), self.rep(f));
                let ex = self.get(e1, x);
                if ex != UNDEF {
                    self.merge(f1, ex, &mut queue);
                } else {
                    let fx = self.get(f1, x ^ 1);
                    if fx != UNDEF {
                        self.merge(e1, fx, &mut queue);
                    } else {
                        self.set(e1, x, f1);
                        self.set(f1, x ^ 1, e1);
                    }
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: u32, w: &[usize]) -> Result<()> {
        let (mut f, mut b) = (c, c);
        let (mut i, mut j) = (0usize, w.len() as isize - 1);
        loop {
            while (i as isize) <= j && self.get(f, w[i]) != UNDEF {
                f = self.get(f, w[i]);
                i += 1;
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize && self.get(b, w[j as usize] ^ 1) != UNDEF {
                b = self.get(b, w[j as usize] ^ 1);
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            } else if j == i as isize {
                self.set(f, w[i], b);
                self.set(b, w[i] ^ 1, f);
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }
}

fn word_columns(w: &[i32]) -> Vec<usize> {
    w.iter()
        .map(|&x| {
            let g = x.unsigned_abs() as usize - 1;
            if x > 0 {
                2 * g
            } else {
                2 * g + 1
            }
        })
        .collect()
}

/// Free reduction, then cyclic reduction.
fn reduce_word(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    while out.len() >= 2 && out[0] == -out[out.len() - 1] {
        out.pop();
        out.remove(0);
    }
    out
}

/// Coset enumeration (HLT) over the trivial subgroup. Returns the right action
/// of each generator on cosets, coset 0 being the identity coset.
pub fn coset_table(ngens: usize, relators: &[Word], budget: usize) -> Result<Vec<Vec<u32>>> {
    let cols = 2 * ngens;
    let rels: Vec<Vec<usize>> = relators
        .iter()
        .map(|r| word_columns(&reduce_word(r)))
        .filter(|r| !r.is_empty())
        .collect();
    let mut ct = CosetTable { cols, table: vec![UNDEF; cols], forward: vec![0], budget };
    let mut c = 0u32;
    while (c as usize) < ct.forward.len() {
        if ct.live(c) {
            for r in &rels {
                ct.scan_and_fill(c, r)?;
                if !ct.live(c) {
                    break;
                }
            }
            if ct.live(c) {
                for x in 0..cols {
                    if ct.get(c, x) == UNDEF {
                        ct.define(c, x)?;
                    }
                }
            }
        }
        c += 1;
    }
    let total = ct.forward.len();
    let mut renum = vec![UNDEF; total];
    let mut live = Vec::new();
    for k in 0..total as u32 {
        if ct.live(k) {
            renum[k as usize] = live.len() as u32;
            live.push(k);
        }
    }
    let mut act = vec![vec![0u32; live.len()]; ngens];
    for (i, &k) in live.iter().enumerate() {
        for (g, row) in act.iter_mut().enumerate() {
            let t = ct.get(k, 2 * g);
            if t == UNDEF {
                return Err(Error::PresentationInterpretation("incomplete coset table".into()));
            }
            let t = ct.rep(t);
            row[i] = renum[t as usize];
        }
    }
    Ok(act)
}

/// Builds the multiplication table of the group from its regular action.
fn table_group(act: &[Vec<u32>], distinguished: &[usize], names: &[&str]) -> Result<FiniteTwoGroup> {
    let n = act.first().map_or(1, Vec::len);
    if n > MAX_TABLE_ORDER {
        return Err(Error::SizeCap { order: n as u64, cap: MAX_TABLE_ORDER as u64 });
    }
    // BFS tree: element j = parent(j)·gen(j)
    let mut parent = vec![(UNDEF, 0usize); n];
    let mut order = vec![0u32];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut qi = 0;
    while qi < order.len() {
        let c = order[qi];
        qi += 1;
        for (g, row) in act.iter().enumerate() {
            let d = row[c as usize];
            if !seen[d as usize] {
                seen[d as usize] = true;
                parent[d as usize] = (c, g);
                order.push(d);
            }
        }
    }
    if order.len() != n {
        return Err(Error::PresentationInterpretation("action is not transitive".into()));
    }
    let mut mul = vec![0u32; n * n];
    for i in 0..n {
        mul[i * n] = i as u32;
        for &j in &order[1..] {
            let (p, g) = parent[j as usize];
            let ip = mul[i * n + p as usize];
            mul[i * n + j as usize] = act[g][ip as usize];
        }
    }
    let mut inv = vec![0u32; n];
    for i in 0..n {
        let j = (0..n).find(|&j| mul[i * n + j] == 0).ok_or_else(|| {
            Error::PresentationInterpretation("regular action lacks inverses".into())
        })?;
        inv[i] = j as u32;
    }
    Ok(FiniteTwoGroup {
        carrier: Carrier::Table(Table { n, mul, inv }),
        order: n,
        generators: distinguished.iter().map(|&g| act[g][0]).collect(),
        generator_names: names.iter().map(|s| s.to_string()).collect(),
    })
}

/// Group given by generators and relators; all generators are distinguished.
pub fn coset_enumerate(names: &[&str], relators: &[Word]) -> Result<FiniteTwoGroup> {
    coset_enumerate_with_budget(names, relators, DEFAULT_COSET_BUDGET)
}

pub fn coset_enumerate_with_budget(names: &[&str], relators: &[Word], budget: usize) -> Result<FiniteTwoGroup> {
    let act = coset_table(names.len(), relators, budget)?;
    let idx: Vec<usize> = (0..names.len()).collect();
    table_group(&act, &idx, names)
}

/// Relators of the (ρ, σ, τ) presentation for parameters (m, n, N, variant).
pub fn presentation_relators(m: u32, n: u32, norm: i8, variant: RhoVariant) -> Vec<Word> {
    use word::*;
    let (r, s, t) = (gen(0), gen(1), gen(2));
    let (pm, pn) = (1i64 << m, 1i64 << n);
    if norm == -1 {
        vec![
            pow(&r, 4),
            pow(&s, 2 * pm),
            pow(&t, 4 * pn),
            eq(&pow(&s, pm), &pow(&t, 2 * pn)),
            eq(&pow(&r, 2), &mul(&[&pow(&t, pn), &pow(&s, pm / 2)])),
            comm(&t, &s),
            eq(&comm(&s, &r), &pow(&s, pm - 2)),
            eq(&comm(&r, &t), &pow(&t, 2)),
        ]
    } else {
        let r2 = match variant {
            RhoVariant::A => mul(&[&pow(&t, 2 * pn), &pow(&s, pm / 2)]),
            RhoVariant::B => pow(&s, pm / 2),
        };
        vec![
            pow(&r, 4),
            pow(&s, pm),
            pow(&t, 4 * pn),
            eq(&pow(&r, 2), &r2),
            comm(&t, &s),
            eq(&comm(&r, &s), &pow(&s, 2)),
            eq(&comm(&t, &r), &pow(&t, 2 * pn - 2)),
        ]
    }
}

pub fn enumerate_presentation_group(m: u32, n: u32, norm: i8, variant: RhoVariant) -> Result<FiniteTwoGroup> {
    check_order(1u64 << (m + n + 3))?;
    coset_enumerate(&["rho", "sigma", "tau"], &presentation_relators(m, n, norm, variant))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    MainlineCc3,
    Seq985,
    Seq986,
    MainlineCc4,
    Seq5492,
}

impl Family {
    pub fn min_param(self) -> u32 {
        match self {
            Family::MainlineCc3 | Family::Seq985 => 2,
            Family::Seq986 | Family::MainlineCc4 => 3,
            Family::Seq5492 => 3,
        }
    }

    pub fn expected_log_order(self, param: u32) -> u32 {
        match self {
            Family::MainlineCc3 | Family::Seq985 => param + 5,
            _ => param + 4,
        }
    }
}

/// pc-style presentation over x, y, z and the auxiliary generators s_j, t_j,
/// each defined by its commutator relation.
pub fn family_relators(family: Family, param: u32) -> (Vec<String>, Vec<Word>) {
    use word::*;
    let mut names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
    let idx = |names: &mut Vec<String>, s: String| {
        names.push(s);
        names.len() - 1
    };
    let (x, y, z) = (gen(0), gen(1), gen(2));
    let mut rels: Vec<Word> = Vec::new();
    // commutator definitions: (new generator, [a, x]) pairs in pc order
    let mut defined: Vec<(usize, usize, usize)> = Vec::new();
    let mut powers: Vec<(usize, Word)> = Vec::new();
    let cc3 = matches!(family, Family::MainlineCc3 | Family::Seq985 | Family::Seq986);
    let s2 = idx(&mut names, "s2".into());
    let t2 = idx(&mut names, "t2".into());
    defined.push((s2, 1, 0));
    defined.push((t2, 2, 0));
    if cc3 {
        let last = match family {
            Family::Seq986 => param + 1,
            _ => param + 2,
        };
        let mut t = vec![usize::MAX, usize::MAX, t2];
        for j in 3..=last as usize {
            let tj = idx(&mut names, format!("t{j}"));
            defined.push((tj, t[j - 1], 0));
            t.push(tj);
        }
        let g = |i: usize| gen(t[i]);
        powers.push((0, gen(s2)));
        let y_sq = match family {
            Family::Seq985 => mul(&[&gen(s2), &g(last as usize)]),
            _ => gen(s2),
        };
        powers.push((1, y_sq));
        let z_sq = match family {
            Family::Seq986 => mul(&[&g(2), &g(3), &g(last as usize)]),
            _ => mul(&[&g(2), &g(3)]),
        };
        powers.push((2, z_sq));
        powers.push((s2, vec![]));
        let top = last as usize;
        for j in 2..=top - 2 {
            powers.push((t[j], mul(&[&g(j + 1), &g(j + 2)])));
        }
        powers.push((t[top - 1], g(top)));
        powers.push((t[top], vec![]));
    } else {
        let mut s = vec![usize::MAX, usize::MAX, s2];
        for j in 3..=param as usize {
            let sj = idx(&mut names, format!("s{j}"));
            defined.push((sj, s[j - 1], 0));
            s.push(sj);
        }
        let t3 = idx(&mut names, "t3".into());
        defined.push((t3, t2, 0));
        let top = param as usize;
        let g = |i: usize| gen(s[i]);
        let x_sq = match family {
            Family::Seq5492 => g(top),
            _ => vec![],
        };
        powers.push((0, x_sq));
        powers.push((1, mul(&[&g(2), &g(3)])));
        powers.push((2, gen(t2)));
        for j in 2..=top - 2 {
            powers.push((s[j], mul(&[&g(j + 1), &g(j + 2)])));
        }
        powers.push((s[top - 1], g(top)));
        powers.push((s[top], vec![]));
        powers.push((t2, gen(t3)));
        powers.push((t3, vec![]));
    }
    for &(new, a, b) in &defined {
        rels.push(eq(&comm(&gen(a), &gen(b)), &gen(new)));
    }
    for (g, rhs) in &powers {
        rels.push(eq(&pow(&gen(*g), 2), rhs));
    }
    let k = names.len();
    for a in 0..k {
        for b in 0..a {
            if !defined.iter().any(|&(_, da, db)| (da, db) == (a, b)) {
                rels.push(comm(&gen(a), &gen(b)));
            }
        }
    }
    let _ = (&x, &y, &z);
    (names, rels)
}

pub fn build_family_group(family: Family, param: u32) -> Result<FiniteTwoGroup> {
    if param < family.min_param() {
        return Err(Error::ParameterOutOfRange(format!("{family:?}({param})")));
    }
    let log = family.expected_log_order(param);
    check_order(1u64 << log)?;
    let (names, rels) = family_relators(family, param);
    let act = coset_table(names.len(), &rels, DEFAULT_COSET_BUDGET)?;
    let g = table_group(&act, &[0, 1, 2], &["x", "y", "z"])?;
    if g.order() != 1 << log {
        return Err(Error::PresentationInterpretation(format!(
            "{family:?}({param}) has order {} instead of 2^{log}",
            g.order()
        )));
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    pub generators: Vec<Elem>,
    pub elements: Vec<Elem>,
    member: Vec<bool>,
    parent_order: usize,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index(&self) -> usize {
        self.parent_order / self.elements.len()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.member[x as usize]
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    /// Subgroup whose element set is given, with a small greedy generating set.
    pub fn from_elements(g: &FiniteTwoGroup, elems: &[Elem]) -> Subgroup {
        let mut gens = Vec::new();
        let mut cur = subgroup_closure(g, &[]);
        for &x in elems {
            if !cur.contains(x) {
                gens.push(x);
                cur = subgroup_closure(g, &gens);
            }
        }
        cur
    }
}

pub fn subgroup_closure(g: &FiniteTwoGroup, gens: &[Elem]) -> Subgroup {
    let n = g.order();
    let mut member = vec![false; n];
    member[0] = true;
    let mut elements = vec![0];
    let mut i = 0;
    while i < elements.len() {
        let x = elements[i];
        i += 1;
        for &s in gens {
            let y = g.mul(x, s);
            if !member[y as usize] {
                member[y as usize] = true;
                elements.push(y);
            }
        }
    }
    elements.sort_unstable();
    Subgroup { generators: gens.to_vec(), elements, member, parent_order: n }
}

/// Normal closure of `gens` under conjugation by `by`.
pub fn normal_closure(g: &FiniteTwoGroup, gens: &[Elem], by: &[Elem]) -> Subgroup {
    let mut gs: Vec<Elem> = gens.to_vec();
    let mut h = subgroup_closure(g, &gs);
    loop {
        let mut added = false;
        for i in 0..gs.len() {
            for &c in by {
                let y = g.conj(gs[i], c);
                if !h.contains(y) {
                    gs.push(y);
                    h = subgroup_closure(g, &gs);
                    added = true;
                }
            }
        }
        if !added {
            return h;
        }
    }
}

/// [H, K] for H, K given by generating sets, normalized by `ambient`.
pub fn commutator_subgroup(g: &FiniteTwoGroup, h: &[Elem], k: &[Elem], ambient: &[Elem]) -> Subgroup {
    let mut cs = Vec::new();
    for &a in h {
        for &b in k {
            let c = g.comm(a, b);
            if c != 0 && !cs.contains(&c) {
                cs.push(c);
            }
        }
    }
    normal_closure(g, &cs, ambient)
}

pub fn derived_subgroup_of(g: &FiniteTwoGroup, h: &Subgroup) -> Subgroup {
    commutator_subgroup(g, &h.generators, &h.generators, &h.generators)
}

pub fn derived_subgroup(g: &FiniteTwoGroup) -> Subgroup {
    derived_subgroup_of(g, &g.whole())
}

/// γ1 = G ⊇ γ2 = G′ ⊇ ... down to the trivial group.
pub fn lower_central_series(g: &FiniteTwoGroup) -> Vec<Subgroup> {
    let mut series = vec![g.whole()];
    loop {
        let last = series.last().expect("nonempty");
        if last.order() == 1 {
            return series;
        }
        let next = commutator_subgroup(g, &last.generators, &g.generators, &g.generators);
        if next.order() == last.order() {
            return series;
        }
        series.push(next);
    }
}

pub fn nilpotency_class(g: &FiniteTwoGroup) -> u32 {
    lower_central_series(g).len() as u32 - 1
}

pub fn center(g: &FiniteTwoGroup) -> Subgroup {
    let elems: Vec<Elem> = g
        .elements()
        .filter(|&x| g.generators.iter().all(|&s| g.mul(x, s) == g.mul(s, x)))
        .collect();
    Subgroup::from_elements(g, &elems)
}

fn type_from_counts(counts: &[u64]) -> AbelianType {
    // counts[i] = #{x : x^(2^i) ∈ K}/|K|; counts[i]/counts[i-1] = 2^#{e_j ≥ i}
    let mut ge: Vec<u32> = Vec::new();
    for w in counts.windows(2) {
        ge.push((w[1] / w[0]).trailing_zeros());
    }
    let mut exps = Vec::new();
    for (i, &c) in ge.iter().enumerate() {
        let next = ge.get(i + 1).copied().unwrap_or(0);
        for _ in next..c {
            exps.push(i as u32 + 1);
        }
    }
    AbelianType::new(exps)
}

/// Type of H/K for K ⊴ H with abelian quotient.
pub fn quotient_type(g: &FiniteTwoGroup, h: &Subgroup, k: &Subgroup) -> AbelianType {
    let mut counts = Vec::new();
    let mut powers: Vec<Elem> = h.elements.clone();
    loop {
        let c = powers.iter().filter(|&&x| k.contains(x)).count() as u64 / k.order() as u64;
        counts.push(c);
        if c as usize * k.order() == h.order() {
            break;
        }
        for x in powers.iter_mut() {
            *x = g.mul(*x, *x);
        }
    }
    type_from_counts(&counts)
}

pub fn is_abelian(g: &FiniteTwoGroup, h: &Subgroup) -> bool {
    h.generators
        .iter()
        .all(|&a| h.generators.iter().all(|&b| g.mul(a, b) == g.mul(b, a)))
}

pub fn abelian_invariants(g: &FiniteTwoGroup, h: &Subgroup) -> Result<AbelianType> {
    if !is_abelian(g, h) {
        return Err(Error::NotAbelian);
    }
    Ok(quotient_type(g, h, &subgroup_closure(g, &[])))
}

pub fn abelianization(g: &FiniteTwoGroup, h: &Subgroup) -> AbelianType {
    quotient_type(g, h, &derived_subgroup_of(g, h))
}

/// Homomorphism G → G/G′ ≅ F2³ with ρ̄, σ̄, τ̄ (or x̄, ȳ, z̄) as basis vectors 1, 2, 4.
#[derive(Clone, Debug)]
pub struct QuotientCoords {
    pub coords: Vec<u8>,
    pub derived: Subgroup,
    pub representatives: [Elem; 8],
}

pub fn quotient_coords(g: &FiniteTwoGroup) -> Result<QuotientCoords> {
    let derived = derived_subgroup(g);
    if g.generators.len() != 3 || derived.index() != 8 {
        return Err(Error::Rank(format!("G/G′ has order {}, expected 8", derived.index())));
    }
    let mut coords = vec![u8::MAX; g.order()];
    coords[0] = 0;
    let mut queue = VecDeque::from([0 as Elem]);
    while let Some(x) = queue.pop_front() {
        for (k, &s) in g.generators.iter().enumerate() {
            let y = g.mul(x, s);
            let v = coords[x as usize] ^ (1 << k);
            if coords[y as usize] == u8::MAX {
                coords[y as usize] = v;
                queue.push_back(y);
            } else if coords[y as usize] != v {
                return Err(Error::Rank("G/G′ is not elementary abelian on the generators".into()));
            }
        }
    }
    let mut representatives = [0; 8];
    let mut found = [false; 8];
    for x in g.elements() {
        let v = coords[x as usize] as usize;
        if v == 0 && !derived.contains(x) {
            return Err(Error::Rank("kernel of G → F2³ differs from G′".into()));
        }
        if !found[v] {
            found[v] = true;
            representatives[v] = x;
        }
    }
    Ok(QuotientCoords { coords, derived, representatives })
}

fn parity(x: u8) -> bool {
    x.count_ones().is_multiple_of(2)
}

impl QuotientCoords {
    /// Preimage of the F2-subspace spanned by `vectors`.
    pub fn preimage(&self, g: &FiniteTwoGroup, vectors: &[u8]) -> Subgroup {
        let span = span(vectors);
        let elems: Vec<Elem> = g.elements().filter(|&x| span & (1 << self.coords[x as usize]) != 0).collect();
        Subgroup::from_elements(g, &elems)
    }

    /// Image of a subgroup containing G′, as a bitmask over the 8 vectors.
    pub fn image(&self, h: &Subgroup) -> u8 {
        h.elements.iter().fold(0u8, |m, &x| m | (1 << self.coords[x as usize]))
    }

    pub fn kernel_of_functional(&self, g: &FiniteTwoGroup, lambda: u8) -> Subgroup {
        let elems: Vec<Elem> = g.elements().filter(|&x| parity(lambda & self.coords[x as usize])).collect();
        Subgroup::from_elements(g, &elems)
    }
}

/// Bitmask (bit v set for each vector v) of the F2-span of `vectors` in F2³.
pub fn span(vectors: &[u8]) -> u8 {
    let mut set = 1u8;
    for &v in vectors {
        let mut add = 0u8;
        for w in 0..8 {
            if set & (1 << w) != 0 {
                add |= 1 << (w ^ v);
            }
        }
        set |= add;
    }
    set
}

#[derive(Clone, Debug)]
pub struct Layers {
    /// (functional λ, kernel of λ): the seven subgroups of index 2.
    pub layer1: Vec<(u8, Subgroup)>,
    /// (vector w, preimage of ⟨w⟩): the seven subgroups of index 4 containing G′.
    pub layer2: Vec<(u8, Subgroup)>,
}

pub fn layer_subgroups(g: &FiniteTwoGroup, q: &QuotientCoords) -> Layers {
    let layer1 = (1..8u8).map(|l| (l, q.kernel_of_functional(g, l))).collect();
    let layer2 = (1..8u8).map(|w| (w, q.preimage(g, &[w]))).collect();
    Layers { layer1, layer2 }
}

/// Right transversal of H in G and, for each element, the index of its coset.
struct Transversal {
    reps: Vec<Elem>,
    coset_of: Vec<u32>,
}

fn right_transversal(g: &FiniteTwoGroup, h: &Subgroup) -> Transversal {
    let mut coset_of = vec![u32::MAX; g.order()];
    let mut reps = Vec::new();
    for x in g.elements() {
        if coset_of[x as usize] == u32::MAX {
            let c = reps.len() as u32;
            reps.push(x);
            for &y in &h.elements {
                coset_of[g.mul(y, x) as usize] = c;
            }
        }
    }
    Transversal { reps, coset_of }
}

/// Transfer G → H/H′, evaluated on elements of G; images are elements of H
/// meaningful modulo H′.
pub struct Transfer<'a> {
    g: &'a FiniteTwoGroup,
    pub target: Subgroup,
    pub target_derived: Subgroup,
    t: Transversal,
}

impl<'a> Transfer<'a> {
    pub fn new(g: &'a FiniteTwoGroup, h: &Subgroup) -> Self {
        Transfer { g, target: h.clone(), target_derived: derived_subgroup_of(g, h), t: right_transversal(g, h) }
    }

    pub fn with_representatives(g: &'a FiniteTwoGroup, h: &Subgroup, reps: Vec<Elem>) -> Self {
        let mut tr = Transfer::new(g, h);
        for (c, &r) in reps.iter().enumerate() {
            let k = tr.t.coset_of[r as usize] as usize;
            debug_assert_eq!(k, c);
        }
        tr.t.reps = reps;
        tr
    }

    pub fn image(&self, x: Elem) -> Elem {
        let g = self.g;
        let mut acc = 0;
        for &r in &self.t.reps {
            let rx = g.mul(r, x);
            let j = self.t.coset_of[rx as usize] as usize;
            let h = g.mul(rx, g.inv(self.t.reps[j]));
            acc = g.mul(acc, h);
        }
        acc
    }

    /// Whether a and b agree in H/H′.
    pub fn equal_mod_derived(&self, a: Elem, b: Elem) -> bool {
        self.target_derived.contains(self.g.mul(self.g.inv(a), b))
    }

    pub fn in_kernel(&self, x: Elem) -> bool {
        self.target_derived.contains(self.image(x))
    }

    pub fn coset_count(&self) -> usize {
        self.t.reps.len()
    }
}

pub fn transfer<'a>(g: &'a FiniteTwoGroup, h: &Subgroup) -> Transfer<'a> {
    Transfer::new(g, h)
}

/// Kernel of the transfer as a bitmask over G/G′ ≅ F2³.
pub fn transfer_kernel(g: &FiniteTwoGroup, q: &QuotientCoords, h: &Subgroup) -> u8 {
    let t = Transfer::new(g, h);
    (0..8u8).filter(|&v| t.in_kernel(q.representatives[v as usize])).fold(0, |m, v| m | (1 << v))
}

/// g²[g,z] for g ∈ H and g² otherwise, for an index-2 subgroup H and z ∉ H.
pub fn index2_transfer_closed_form(g: &FiniteTwoGroup, h: &Subgroup, x: Elem) -> Elem {
    let z = g.elements().find(|&e| !h.contains(e)).expect("proper subgroup");
    if h.contains(x) {
        g.mul(g.mul(x, x), g.comm(x, z))
    } else {
        g.mul(x, x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupFingerprint {
    pub order: usize,
    pub class: u32,
    pub coclass: u32,
    pub abelianization: AbelianType,
    pub derived_type: AbelianType,
    pub center_type: AbelianType,
    pub ttt_layer1: Vec<AbelianType>,
    pub ttt_layer2: Vec<AbelianType>,
    /// Sorted (layer-1 sizes, layer-2 sizes) of transfer kernels in G/G′.
    pub tkt_sizes: (Vec<u32>, Vec<u32>),
    /// Histogram of pair features; only for |G| ≤ PAIR_STATISTICS_MAX_ORDER.
    pub pair_statistics: Option<Vec<(Vec<u8>, u64)>>,
}

pub const PAIR_STATISTICS_MAX_ORDER: usize = 1 << 10;

/// Histogram over all (a, b) of orders of a, b, ab, [a,b], lower central depths
/// of [a,b], a²b², a²[a,b], b²[a,b], and the coincidences a² = b², [a,b] = a²,
/// [a,b] = b², (ab)² = a²b², [a,b] ∈ Z(G). Separates groups that agree on every
/// other fingerprint field, such as the siblings of order 128 with m = n = 2.
pub fn pair_statistics(g: &FiniteTwoGroup, lcs: &[Subgroup], z: &Subgroup) -> Vec<(Vec<u8>, u64)> {
    let n = g.order() as Elem;
    let depth: Vec<u8> = g
        .elements()
        .map(|x| lcs.iter().rposition(|c| c.contains(x)).unwrap_or(0) as u8)
        .collect();
    let ord: Vec<u8> = g.elements().map(|x| g.element_order(x).trailing_zeros() as u8).collect();
    let sq: Vec<Elem> = g.elements().map(|x| g.mul(x, x)).collect();
    let mut hist = std::collections::BTreeMap::<Vec<u8>, u64>::new();
    for a in 0..n {
        for b in 0..n {
            let (a2, b2) = (sq[a as usize], sq[b as usize]);
            let ab = g.mul(a, b);
            let c = g.comm(a, b);
            let a2b2 = g.mul(a2, b2);
            let key = vec![
                ord[a as usize],
                ord[b as usize],
                ord[ab as usize],
                ord[c as usize],
                depth[c as usize],
                depth[a2b2 as usize],
                depth[g.mul(a2, c) as usize],
                depth[g.mul(b2, c) as usize],
                (a2 == b2) as u8,
                (c == a2) as u8,
                (c == b2) as u8,
                (sq[ab as usize] == a2b2) as u8,
                z.contains(c) as u8,
            ];
            *hist.entry(key).or_default() += 1;
        }
    }
    hist.into_iter().collect()
}

pub fn fingerprint(g: &FiniteTwoGroup) -> Result<GroupFingerprint> {
    let q = quotient_coords(g)?;
    let layers = layer_subgroups(g, &q);
    let lcs = lower_central_series(g);
    let class = lcs.len() as u32 - 1;
    let log_order = g.order().trailing_zeros();
    let mut ttt1: Vec<AbelianType> = layers.layer1.iter().map(|(_, h)| abelianization(g, h)).collect();
    let mut ttt2: Vec<AbelianType> = layers.layer2.iter().map(|(_, h)| abelianization(g, h)).collect();
    ttt1.sort();
    ttt2.sort();
    let mut k1: Vec<u32> = layers.layer1.iter().map(|(_, h)| transfer_kernel(g, &q, h).count_ones()).collect();
    let mut k2: Vec<u32> = layers.layer2.iter().map(|(_, h)| transfer_kernel(g, &q, h).count_ones()).collect();
    k1.sort_unstable();
    k2.sort_unstable();
    let derived = &q.derived;
    let derived_type = if is_abelian(g, derived) {
        abelian_invariants(g, derived)?
    } else {
        abelianization(g, derived)
    };
    let z = center(g);
    let pairs = (g.order() <= PAIR_STATISTICS_MAX_ORDER).then(|| pair_statistics(g, &lcs, &z));
    Ok(GroupFingerprint {
        order: g.order(),
        class,
        coclass: log_order - class,
        abelianization: AbelianType::new(vec![1, 1, 1]),
        derived_type,
        center_type: abelian_invariants(g, &z)?,
        ttt_layer1: ttt1,
        ttt_layer2: ttt2,
        tkt_sizes: (k1, k2),
        pair_statistics: pairs,
    })
}

/// Order, class, coclass and G′ type forced by the presentation: σ and τ have
/// orders 2^(m+1) (N = -1) or 2^m (N = +1) and 2^(n+2), and
/// γ_(i+1) = ⟨σ^(2^i), τ^(2^i)⟩, so the class is the larger exponent. For
/// N = -1, G′ = 2Z²/Λ has type (2^min(m-1,n), 2^max(m,n+1)).
pub fn expected_structure(m: u32, n: u32, norm: i8) -> (usize, u32, u32, AbelianType) {
    let log_order = m + n + 3;
    let (class, derived) = if norm == -1 {
        (std::cmp::max(m + 1, n + 2), AbelianType::new(vec![std::cmp::min(m - 1, n), std::cmp::max(m, n + 1)]))
    } else {
        (std::cmp::max(m, n + 2), AbelianType::new(vec![n + 1, m - 1]))
    };
    (1 << log_order, class, log_order - class, derived)
}

/// Whether (m, n, N) satisfies the constraints a field can produce:
/// N = -1 forces n = 1 or m = 2; N = +1 forces n = 1 with m ≥ 3, or m = 2 with n ≥ 2.
pub fn realizable_parameters(m: u32, n: u32, norm: i8) -> bool {
    if norm == -1 {
        n == 1 || m == 2
    } else {
        (n == 1 && m >= 3) || (m == 2 && n >= 2)
    }
}

/// Elementwise identities relating ρ, σ, τ in a structural group; returns the
/// names of those that fail. For N = -1 conjugation by ρ inverts σ only modulo
/// the central σ^(2^m), so (σρ)² and (στρ)² pick up that factor.
pub fn square_identity_failures(g: &FiniteTwoGroup, m: u32, n: u32, norm: i8) -> Vec<String> {
    let (r, s, t) = (g.generators[0], g.generators[1], g.generators[2]);
    let mut fails = Vec::new();
    let mut check = |name: String, ok: bool| {
        if !ok {
            fails.push(name);
        }
    };
    let r2 = g.mul(r, r);
    let sq = |x: Elem| g.mul(x, x);
    check("[ρ²,σ]=1".into(), g.comm(r2, s) == 0);
    check("[ρ²,τ]=1".into(), g.comm(r2, t) == 0);
    let sigma_r2 = if norm == -1 { g.mul(r2, g.pow(s, 1 << m)) } else { r2 };
    check("(σρ)²".into(), sq(g.mul(s, r)) == sigma_r2);
    let tau_r2 = if norm == -1 { r2 } else { g.mul(r2, g.pow(t, 1 << (n + 1))) };
    let sigma_tau_r2 = if norm == -1 { sigma_r2 } else { tau_r2 };
    check("(στρ)²".into(), sq(g.product(&[s, t, r])) == sigma_tau_r2);
    check("(τρ)²".into(), sq(g.mul(t, r)) == tau_r2);
    let mut k = 2i64;
    while k < g.order() as i64 {
        let tk = g.pow(t, k);
        let sk = g.pow(s, k);
        check(format!("[ρ,τ^{k}]"), g.comm(r, tk) == g.pow(t, 2 * k));
        check(format!("[ρ,σ^{k}]"), g.comm(r, sk) == g.pow(s, 2 * k));
        k *= 2;
    }
    fails
}
