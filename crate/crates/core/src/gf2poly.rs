//! Arithmetic in F_{2^d} for d <= 16 and polynomial algebra over it.
//!
//! Each field uses the Conway polynomial of its degree as modulus, so the
//! embedding F_{2^d} -> F_{2^D} (d | D) sending the generator g_d to
//! g_D^{(2^D-1)/(2^d-1)} is a ring map and embeddings compose.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_FIELD_DEGREE: u32 = 16;

/// Multiply two polynomials over F_2 packed into integers.
fn clmul(a: u64, b: u64) -> u64 {
    let mut r = 0u64;
    let mut b = b;
    let mut a = a;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    r
}

fn bitlen(a: u64) -> u32 {
    64 - a.leading_zeros()
}

/// Remainder of `a` modulo the full polynomial `m` (leading bit included).
fn clmod(mut a: u64, m: u64) -> u64 {
    let dm = bitlen(m);
    while bitlen(a) >= dm {
        a ^= m << (bitlen(a) - dm);
    }
    a
}

fn mulmod_full(a: u64, b: u64, m: u64) -> u64 {
    clmod(clmul(a, b), m)
}

fn powmod_full(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    a = clmod(a, m);
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod_full(r, a, m);
        }
        a = mulmod_full(a, a, m);
        e >>= 1;
    }
    r
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

fn is_primitive(m: u64, d: u32) -> bool {
    let order = (1u64 << d) - 1;
    if powmod_full(2, order, m) != 1 {
        return false;
    }
    // x has order exactly 2^d - 1 only if m is irreducible and primitive.
    prime_factors(order)
        .into_iter()
        .all(|p| powmod_full(2, order / p, m) != 1)
}

fn divisors_proper(d: u32) -> Vec<u32> {
    (1..d).filter(|e| d.is_multiple_of(*e)).collect()
}

/// Conway polynomials for p = 2, computed by the defining search.
fn conway_table() -> &'static [u64; (MAX_FIELD_DEGREE + 1) as usize] {
    static TABLE: OnceLock<[u64; (MAX_FIELD_DEGREE + 1) as usize]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u64; (MAX_FIELD_DEGREE + 1) as usize];
        t[1] = 0b11;
        for d in 2..=MAX_FIELD_DEGREE {
            let top = 1u64 << d;
            let mut found = 0;
            for low in 1..top {
                if low & 1 == 0 {
                    continue;
                }
                let m = top | low;
                if !is_primitive(m, d) {
                    continue;
                }
                let ok = divisors_proper(d).into_iter().all(|e| {
                    let k = ((1u64 << d) - 1) / ((1u64 << e) - 1);
                    let root = powmod_full(2, k, m);
                    // evaluate the degree-e Conway polynomial at x^k
                    let ce = t[e as usize];
                    let mut acc = 0u64;
                    for i in (0..=e).rev() {
                        acc = mulmod_full(acc, root, m);
                        if (ce >> i) & 1 == 1 {
                            acc ^= 1;
                        }
                    }
                    acc == 0
                });
                if ok {
                    found = m;
                    break;
                }
            }
            t[d as usize] = found;
        }
        t
    })
}

/// Full Conway polynomial of degree `d` packed as bits (leading bit included).
pub fn conway_polynomial(d: u32) -> u64 {
    conway_table()[d as usize]
}

/// The field F_{2^d}. Elements are `u32` bit vectors in the basis 1, g, g^2, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GfField {
    d: u32,
    modulus: u64,
}

pub type GfElem = u32;

impl GfField {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("residue degree must be positive".into()));
        }
        if d > MAX_FIELD_DEGREE {
            return Err(Error::CapExceeded {
                what: "residue degree",
                requested: d as i64,
                max: MAX_FIELD_DEGREE as i64,
            });
        }
        Ok(GfField {
            d,
            modulus: conway_polynomial(d),
        })
    }

    pub fn f2() -> Self {
        GfField::new(1).unwrap()
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn size(&self) -> u64 {
        1u64 << self.d
    }

    /// The Conway generator g (a primitive element).
    pub fn generator(&self) -> GfElem {
        if self.d == 1 {
            1
        } else {
            2
        }
    }

    pub fn mul(&self, a: GfElem, b: GfElem) -> GfElem {
        mulmod_full(a as u64, b as u64, self.modulus) as GfElem
    }

    pub fn square(&self, a: GfElem) -> GfElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: GfElem, e: u64) -> GfElem {
        powmod_full(a as u64, e, self.modulus) as GfElem
    }

    pub fn inv(&self, a: GfElem) -> Option<GfElem> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.size() - 2))
        }
    }

    /// Inverse Frobenius: the unique s with s^2 = c.
    pub fn sqrt(&self, c: GfElem) -> GfElem {
        let mut s = c;
        for _ in 1..self.d {
            s = self.square(s);
        }
        s
    }

    /// Absolute trace to F_2.
    pub fn trace(&self, c: GfElem) -> u32 {
        let mut acc = 0;
        let mut t = c;
        for _ in 0..self.d {
            acc ^= t;
            t = self.square(t);
        }
        acc & 1
    }

    /// Embed `a` into `target`, which must contain this field.
    pub fn embed(&self, a: GfElem, target: &GfField) -> GfElem {
        assert!(target.d.is_multiple_of(self.d), "embedding needs d | D");
        if target.d == self.d {
            return a;
        }
        let k = (target.size() - 1) / (self.size() - 1);
        let img = target.pow(target.generator(), k);
        let mut acc = 0;
        for i in (0..self.d).rev() {
            acc = target.mul(acc, img);
            if (a >> i) & 1 == 1 {
                acc ^= 1;
            }
        }
        acc
    }

    /// Inverse of `embed`: returns `None` if `a` is not in the subfield.
    pub fn restrict(&self, a: GfElem, source: &GfField) -> Option<GfElem> {
        (0..self.size() as u32).find(|&c| self.embed(c, source) == a)
    }

    pub fn elements(&self) -> impl Iterator<Item = GfElem> {
        0..self.size() as u32
    }
}

/// The smallest field containing both.
pub fn compositum(a: &GfField, b: &GfField) -> Result<GfField> {
    GfField::new(num_integer::lcm(a.d, b.d))
}

// ---------------------------------------------------------------------------
// Polynomials

/// Dense polynomial over a field, coefficients low to high, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GfPoly {
    pub field: GfField,
    pub coeffs: Vec<GfElem>,
}

impl GfPoly {
    pub fn new(field: GfField, mut coeffs: Vec<GfElem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        GfPoly { field, coeffs }
    }

    pub fn zero(field: GfField) -> Self {
        GfPoly { field, coeffs: vec![] }
    }

    pub fn one(field: GfField) -> Self {
        GfPoly::new(field, vec![1])
    }

    pub fn x(field: GfField) -> Self {
        GfPoly::new(field, vec![0, 1])
    }

    /// Polynomial over F_2 from a bit mask (bit i = coefficient of x^i).
    pub fn from_bits(field: GfField, bits: u64) -> Self {
        GfPoly::new(
            field,
            (0..64).map(|i| ((bits >> i) & 1) as GfElem).collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with -1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> GfElem {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn coeff(&self, i: usize) -> GfElem {
        *self.coeffs.get(i).unwrap_or(&0)
    }

    pub fn add(&self, o: &GfPoly) -> GfPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        GfPoly::new(
            self.field,
            (0..n).map(|i| self.coeff(i) ^ o.coeff(i)).collect(),
        )
    }

    pub fn mul(&self, o: &GfPoly) -> GfPoly {
        if self.is_zero() || o.is_zero() {
            return GfPoly::zero(self.field);
        }
        let f = self.field;
        let mut out = vec![0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] ^= f.mul(a, b);
            }
        }
        GfPoly::new(f, out)
    }

    pub fn scale(&self, c: GfElem) -> GfPoly {
        let f = self.field;
        GfPoly::new(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn monic(&self) -> GfPoly {
        match self.field.inv(self.lead()) {
            Some(c) => self.scale(c),
            None => self.clone(),
        }
    }

    pub fn divrem(&self, d: &GfPoly) -> (GfPoly, GfPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let f = self.field;
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        let linv = f.inv(d.lead()).unwrap();
        if r.len() <= dd {
            return (GfPoly::zero(f), self.clone());
        }
        let mut q = vec![0; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            let t = f.mul(c, linv);
            q[i - dd] = t;
            for (j, &b) in d.coeffs.iter().enumerate() {
                r[i - dd + j] ^= f.mul(t, b);
            }
        }
        (GfPoly::new(f, q), GfPoly::new(f, r))
    }

    pub fn rem(&self, d: &GfPoly) -> GfPoly {
        self.divrem(d).1
    }

    pub fn gcd(&self, o: &GfPoly) -> GfPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> GfPoly {
        GfPoly::new(
            self.field,
            (1..self.coeffs.len())
                .map(|i| if i % 2 == 1 { self.coeffs[i] } else { 0 })
                .collect(),
        )
    }

    pub fn eval(&self, x: GfElem) -> GfElem {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
    }

    pub fn mulmod(&self, o: &GfPoly, m: &GfPoly) -> GfPoly {
        self.mul(o).rem(m)
    }

    /// self^(2^k) mod m.
    pub fn frobenius_mod(&self, k: u64, m: &GfPoly) -> GfPoly {
        let mut a = self.rem(m);
        for _ in 0..k {
            a = a.mulmod(&a, m);
        }
        a
    }

    /// Square root of a polynomial that is a square (all odd coefficients zero).
    pub fn sqrt(&self) -> GfPoly {
        let f = self.field;
        GfPoly::new(
            f,
            self.coeffs.iter().step_by(2).map(|&c| f.sqrt(c)).collect(),
        )
    }

    /// Move every coefficient into a larger field.
    pub fn embed(&self, target: &GfField) -> GfPoly {
        GfPoly::new(
            *target,
            self.coeffs.iter().map(|&c| self.field.embed(c, target)).collect(),
        )
    }
}

/// Squarefree factorization: pairs (squarefree monic part, multiplicity).
pub fn squarefree(p: &GfPoly) -> Vec<(GfPoly, u32)> {
    let mut out = Vec::new();
    sqf_rec(&p.monic(), 1, &mut out);
    out.sort_by_key(|a| a.1);
    out
}

fn sqf_rec(f: &GfPoly, mult: u32, out: &mut Vec<(GfPoly, u32)>) {
    if f.degree() <= 0 {
        return;
    }
    let d = f.derivative();
    if d.is_zero() {
        sqf_rec(&f.sqrt(), mult * 2, out);
        return;
    }
    let mut c = f.gcd(&d);
    let mut w = f.divrem(&c).0;
    let mut i = 1;
    while w.degree() > 0 {
        let y = w.gcd(&c);
        let z = w.divrem(&y).0;
        if z.degree() > 0 {
            out.push((z.monic(), i * mult));
        }
        i += 1;
        w = y;
        c = c.divrem(&w).0;
    }
    if c.degree() > 0 {
        // remaining part is a square
        sqf_rec(&c.sqrt(), mult * 2, out);
    }
}

/// Distinct-degree factorization of a squarefree monic polynomial.
fn distinct_degree(f: &GfPoly) -> Vec<(GfPoly, u32)> {
    let fld = f.field;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = GfPoly::x(fld);
    let mut h = x.rem(&rest);
    let mut i = 0u32;
    while rest.degree() >= 2 * (i as i64 + 1) {
        i += 1;
        h = h.frobenius_mod(fld.degree() as u64, &rest);
        let g = h.add(&x).gcd(&rest);
        if g.degree() > 0 {
            out.push((g.clone(), i));
            rest = rest.divrem(&g).0;
            h = h.rem(&rest);
        }
    }
    if rest.degree() > 0 {
        let deg = rest.degree() as u32;
        out.push((rest, deg));
    }
    out
}

/// Equal-degree splitting with the trace map; deterministic seed.
fn equal_degree(f: &GfPoly, r: u32, rng: &mut ChaCha8Rng) -> Vec<GfPoly> {
    if f.degree() as u32 == r {
        return vec![f.monic()];
    }
    let fld = f.field;
    let n = f.degree() as usize;
    loop {
        let a = GfPoly::new(fld, (0..n).map(|_| rng.gen_range(0..fld.size() as u32)).collect());
        if a.degree() <= 0 {
            continue;
        }
        // T(a) = a + a^2 + ... + a^(2^(d r - 1)) mod f
        let mut t = a.rem(f);
        let mut acc = t.clone();
        for _ in 1..(fld.degree() * r) {
            t = t.mulmod(&t, f);
            acc = acc.add(&t);
        }
        let g = acc.gcd(f);
        if g.degree() > 0 && g.degree() < f.degree() {
            let h = f.divrem(&g).0;
            let mut out = equal_degree(&g, r, rng);
            out.extend(equal_degree(&h.monic(), r, rng));
            return out;
        }
    }
}

/// Factor into monic irreducibles with multiplicities, in a canonical order.
pub fn factor(p: &GfPoly) -> Vec<(GfPoly, u32)> {
    assert!(!p.is_zero(), "factor of zero polynomial");
    let mut rng = ChaCha8Rng::seed_from_u64(0x6866_3272);
    let mut out = Vec::new();
    for (sf, m) in squarefree(p) {
        for (part, r) in distinct_degree(&sf) {
            for irr in equal_degree(&part, r, &mut rng) {
                out.push((irr, m));
            }
        }
    }
    out.sort_by(|a, b| {
        (a.0.degree(), a.1, a.0.coeffs.iter().rev().collect::<Vec<_>>())
            .cmp(&(b.0.degree(), b.1, b.0.coeffs.iter().rev().collect::<Vec<_>>()))
    });
    out
}

/// Roots of a polynomial over the algebraic closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSet {
    /// Smallest field containing every root.
    pub field: GfField,
    /// Extension degree of `field` over the coefficient field.
    pub extension: u32,
    /// (root in `field`, multiplicity, degree of the root over the coefficient field)
    pub roots: Vec<(GfElem, u32, u32)>,
}

pub fn roots_with_multiplicity(p: &GfPoly) -> Result<RootSet> {
    let base = p.field;
    let facs = factor(p);
    let mut e = 1u32;
    for (f, _) in &facs {
        e = num_integer::lcm(e, f.degree() as u32);
    }
    let big = GfField::new(base.degree() * e).map_err(|_| Error::CapExceeded {
        what: "residue degree",
        requested: (base.degree() * e) as i64,
        max: MAX_FIELD_DEGREE as i64,
    })?;
    let mut roots = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x726f_6f74);
    for (f, m) in &facs {
        let fb = f.embed(&big);
        for lin in equal_degree(&fb, 1, &mut rng) {
            // monic linear x + r
            roots.push((lin.coeff(0), *m, f.degree() as u32));
        }
    }
    roots.sort();
    Ok(RootSet {
        field: big,
        extension: e,
        roots,
    })
}

// ---------------------------------------------------------------------------
// Laurent polynomials and Artin-Schreier forms

/// Laurent polynomial over F_{2^d}; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GfLaurent {
    pub field: GfField,
    pub terms: BTreeMap<i64, GfElem>,
}

impl GfLaurent {
    pub fn zero(field: GfField) -> Self {
        GfLaurent {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(field: GfField, it: impl IntoIterator<Item = (i64, GfElem)>) -> Self {
        let mut out = GfLaurent::zero(field);
        for (i, c) in it {
            out.add_term(i, c);
        }
        out
    }

    pub fn add_term(&mut self, i: i64, c: GfElem) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(i).or_insert(0);
        *e ^= c;
        if *e == 0 {
            self.terms.remove(&i);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn ldeg(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn coeff(&self, i: i64) -> GfElem {
        *self.terms.get(&i).unwrap_or(&0)
    }

    pub fn add(&self, o: &GfLaurent) -> GfLaurent {
        let mut out = self.clone();
        for (&i, &c) in &o.terms {
            out.add_term(i, c);
        }
        out
    }

    pub fn mul(&self, o: &GfLaurent) -> GfLaurent {
        let f = self.field;
        let mut out = GfLaurent::zero(f);
        for (&i, &a) in &self.terms {
            for (&j, &b) in &o.terms {
                out.add_term(i + j, f.mul(a, b));
            }
        }
        out
    }

    pub fn scale(&self, c: GfElem) -> GfLaurent {
        let f = self.field;
        GfLaurent::from_terms(f, self.terms.iter().map(|(&i, &a)| (i, f.mul(a, c))))
    }

    pub fn shift(&self, k: i64) -> GfLaurent {
        GfLaurent::from_terms(self.field, self.terms.iter().map(|(&i, &a)| (i + k, a)))
    }

    pub fn derivative(&self) -> GfLaurent {
        GfLaurent::from_terms(
            self.field,
            self.terms
                .iter()
                .filter(|(&i, _)| i.rem_euclid(2) == 1)
                .map(|(&i, &a)| (i - 1, a)),
        )
    }

    /// True if every exponent is even.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|i| i % 2 == 0)
    }

    /// The polynomial part for ldeg >= 0 as a dense polynomial.
    pub fn to_poly(&self) -> Option<GfPoly> {
        if self.ldeg().unwrap_or(0) < 0 {
            return None;
        }
        let n = self.deg().map(|d| d as usize + 1).unwrap_or(0);
        let mut c = vec![0; n];
        for (&i, &a) in &self.terms {
            c[i as usize] = a;
        }
        Some(GfPoly::new(self.field, c))
    }

    pub fn embed(&self, target: &GfField) -> GfLaurent {
        GfLaurent::from_terms(
            *target,
            self.terms.iter().map(|(&i, &a)| (i, self.field.embed(a, target))),
        )
    }

    pub fn eval(&self, x: GfElem) -> Option<GfElem> {
        let f = self.field;
        let xinv = f.inv(x);
        let mut acc = 0;
        for (&i, &a) in &self.terms {
            let p = if i >= 0 {
                f.pow(x, i as u64)
            } else {
                f.pow(xinv?, (-i) as u64)
            };
            acc ^= f.mul(a, p);
        }
        Some(acc)
    }
}

/// Reduced form of t^2 + t = P over k(u).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ASForm {
    /// Right-hand side with only odd pole orders at 0 and infinity and no constant term.
    pub rhs: GfLaurent,
    /// Constant term removed during reduction.
    pub constant: GfElem,
    pub genus: i64,
    /// Split over the algebraic closure of the residue field.
    pub split: bool,
    /// Split already over the coefficient field (constant of absolute trace 0).
    pub split_over_base: bool,
}

/// Kill even-order pole parts at u = 0 and u = infinity by adding h^2 + h.
pub fn artin_schreier_reduce(p: &GfLaurent) -> ASForm {
    let f = p.field;
    let mut q = p.clone();
    // Highest even degree first: c u^{2m} ~ sqrt(c) u^m.
    while let Some((&i, &c)) = q.terms.iter().rev().find(|(&i, _)| i > 0 && i % 2 == 0) {
        q.add_term(i, c);
        q.add_term(i / 2, f.sqrt(c));
    }
    while let Some((&i, &c)) = q.terms.iter().find(|(&i, _)| i < 0 && i % 2 == 0) {
        q.add_term(i, c);
        q.add_term(i / 2, f.sqrt(c));
    }
    let constant = q.coeff(0);
    q.add_term(0, constant);
    let mut genus = -1i64;
    if let Some(d) = q.deg().filter(|&d| d > 0) {
        genus += (d + 1) / 2;
    }
    if let Some(l) = q.ldeg().filter(|&l| l < 0) {
        genus += (-l + 1) / 2;
    }
    let split = q.is_zero();
    ASForm {
        split,
        split_over_base: split && f.trace(constant) == 0,
        genus: if split { 0 } else { genus },
        constant,
        rhs: q,
    }
}

/// Genus and splitness of the normalization of t^2 + h t = r over the
/// algebraic closure. With s = t/h this is s^2 + s = r/h^2; at each pole the
/// principal part is reduced by s -> s + c t^{-j} until its order is odd.
/// Returns (genus, split); a split cover has two genus-0 components.
pub fn artin_schreier_rational(h: &GfLaurent, r: &GfLaurent) -> Result<(i64, bool)> {
    let k = h
        .ldeg()
        .ok_or_else(|| Error::InvalidParams("Artin-Schreier equation with h = 0".into()))?;
    let field = compositum(&h.field, &r.field)?;
    let (h, r) = (h.embed(&field), r.embed(&field));
    let h0 = h.shift(-k).to_poly().expect("ldeg removed");
    if h0.degree() == 0 {
        let c = field.inv(field.square(h0.coeff(0))).expect("nonzero");
        let a = artin_schreier_reduce(&r.shift(-2 * k).scale(c));
        return Ok((a.genus, a.split));
    }
    let l = match r.ldeg() {
        Some(l) => l,
        None => return Ok((0, true)),
    };
    // r / h^2 = x^e0 N / D
    let e0 = l - 2 * k;
    let rs = roots_with_multiplicity(&h0)?;
    let big = rs.field;
    let n = r.shift(-l).to_poly().expect("ldeg removed").embed(&big);
    let d = h0.mul(&h0).embed(&big);
    let mut orders = Vec::new();
    // x = 0
    if e0 < 0 {
        let s = series_div(&n.coeffs, &d.coeffs, (-e0) as usize, &big);
        orders.push(reduce_principal(&s, e0, &big));
    }
    // x = ∞, t = 1/x: R = t^{-(e0 + deg N - deg D)} Nrev(t)/Drev(t)
    let top = e0 + n.degree() - d.degree();
    if top > 0 {
        let rev = |p: &GfPoly| -> Vec<GfElem> { p.coeffs.iter().rev().copied().collect() };
        let s = series_div(&rev(&n), &rev(&d), top as usize, &big);
        orders.push(reduce_principal(&s, -top, &big));
    }
    for &(beta, m, _) in &rs.roots {
        let pole = 2 * m as i64;
        let nt = translate(&n, beta);
        let mut dt = translate(&d, beta);
        dt = GfPoly::new(big, dt.coeffs[pole as usize..].to_vec());
        let xb = translate(&GfPoly::x(big), beta);
        let (mut num, mut den) = (nt, dt);
        for _ in 0..e0.abs() {
            if e0 > 0 {
                num = num.mul(&xb);
            } else {
                den = den.mul(&xb);
            }
        }
        let s = series_div(&num.coeffs, &den.coeffs, pole as usize, &big);
        orders.push(reduce_principal(&s, -pole, &big));
    }
    if orders.iter().all(|&m| m == 0) {
        return Ok((0, true));
    }
    Ok((-1 + orders.iter().map(|&m| (m + 1) / 2).sum::<i64>(), false))
}

/// p(β + t) as a polynomial in t.
fn translate(p: &GfPoly, beta: GfElem) -> GfPoly {
    let f = p.field;
    let lin = GfPoly::new(f, vec![beta, 1]);
    p.coeffs
        .iter()
        .rev()
        .fold(GfPoly::zero(f), |acc, &c| acc.mul(&lin).add(&GfPoly::new(f, vec![c])))
}

/// First `n` coefficients of num/den as a power series (den(0) != 0).
fn series_div(num: &[GfElem], den: &[GfElem], n: usize, f: &GfField) -> Vec<GfElem> {
    let inv = f.inv(den[0]).expect("unit constant term");
    let mut rem: Vec<GfElem> = (0..n).map(|i| *num.get(i).unwrap_or(&0)).collect();
    let mut out = vec![0; n];
    for i in 0..n {
        let c = f.mul(rem[i], inv);
        out[i] = c;
        if c == 0 {
            continue;
        }
        for (j, &b) in den.iter().enumerate() {
            if i + j < n {
                rem[i + j] ^= f.mul(c, b);
            }
        }
    }
    out
}

/// Odd pole order left after killing even pole terms; `s[j]` is the
/// coefficient of t^{start + j}.
fn reduce_principal(s: &[GfElem], start: i64, f: &GfField) -> i64 {
    let mut part: BTreeMap<i64, GfElem> = BTreeMap::new();
    for (j, &c) in s.iter().enumerate() {
        let o = start + j as i64;
        if c != 0 && o < 0 {
            part.insert(o, c);
        }
    }
    while let Some((&o, &c)) = part.iter().next() {
        if o % 2 != 0 {
            return -o;
        }
        part.remove(&o);
        let e = part.entry(o / 2).or_insert(0);
        *e ^= f.sqrt(c);
        if *e == 0 {
            part.remove(&(o / 2));
        }
    }
    0
}

/// Solve t^2 + h t = r for a Laurent polynomial t over the algebraic closure.
///
/// The map t -> t^2 + h t is F_2-linear and its kernel is {0, h}, so a
/// solution over the closure already lives over the quadratic extension of
/// the coefficient field. Returns the solution together with its field.
pub fn solve_quadratic_laurent(h: &GfLaurent, r: &GfLaurent) -> Option<GfLaurent> {
    if r.is_zero() {
        return Some(GfLaurent::zero(r.field));
    }
    let base = if h.field.degree() >= r.field.degree() { h.field } else { r.field };
    let (h, r) = (h.embed(&base), r.embed(&base));
    if let Some(t) = solve_quadratic_over(&h, &r) {
        return Some(t);
    }
    let ext = GfField::new(base.degree() * 2).ok()?;
    solve_quadratic_over(&h.embed(&ext), &r.embed(&ext))
}

fn solve_quadratic_over(h: &GfLaurent, r: &GfLaurent) -> Option<GfLaurent> {
    let f = h.field;
    let d = f.degree() as usize;
    let (rd, rl) = (r.deg()?, r.ldeg()?);
    let (jmax, jmin) = match (h.deg(), h.ldeg()) {
        (Some(hd), Some(hl)) => (
            rd.div_euclid(2).max(rd - hd).max(hd),
            rl.div_euclid(2).min(rl - hl).min(hl),
        ),
        _ => (rd.div_euclid(2), rl.div_euclid(2)),
    };
    // columns: (degree j, basis bit b); rows: (degree k, bit c)
    let cols: Vec<(i64, usize)> = (jmin..=jmax)
        .flat_map(|j| (0..d).map(move |b| (j, b)))
        .collect();
    let images: Vec<GfLaurent> = cols
        .iter()
        .map(|&(j, b)| {
            let t = GfLaurent::from_terms(f, [(j, 1 << b)]);
            t.mul(&t).add(&h.mul(&t))
        })
        .collect();
    let mut klo = rl;
    let mut khi = rd;
    for im in &images {
        if let (Some(a), Some(b)) = (im.ldeg(), im.deg()) {
            klo = klo.min(a);
            khi = khi.max(b);
        }
    }
    let nrows = ((khi - klo + 1) as usize) * d;
    let ncols = cols.len();
    let words = (ncols + 1).div_ceil(64);
    let bit = |p: &GfLaurent, row: usize| -> bool {
        let k = klo + (row / d) as i64;
        (p.coeff(k) >> (row % d)) & 1 == 1
    };
    let mut m: Vec<Vec<u64>> = (0..nrows)
        .map(|row| {
            let mut w = vec![0u64; words];
            for (c, im) in images.iter().enumerate() {
                if bit(im, row) {
                    w[c / 64] |= 1 << (c % 64);
                }
            }
            if bit(r, row) {
                w[ncols / 64] |= 1 << (ncols % 64);
            }
            w
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..ncols {
        let Some(p) = (row..nrows).find(|&i| (m[i][c / 64] >> (c % 64)) & 1 == 1) else {
            continue;
        };
        m.swap(row, p);
        for i in 0..nrows {
            if i != row && (m[i][c / 64] >> (c % 64)) & 1 == 1 {
                let src = m[row].clone();
                for (a, b) in m[i].iter_mut().zip(&src) {
                    *a ^= b;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    let rhs_bit = |w: &Vec<u64>| (w[ncols / 64] >> (ncols % 64)) & 1 == 1;
    if m[row..].iter().any(rhs_bit) {
        return None;
    }
    let mut t = GfLaurent::zero(f);
    for (i, &c) in pivots.iter().enumerate() {
        if rhs_bit(&m[i]) {
            let (j, b) = cols[c];
            t.add_term(j, 1 << b);
        }
    }
    Some(t)
}
