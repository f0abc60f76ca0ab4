//! Finite-precision arithmetic in W(F_{2^d})[π]/(π^N - 2).
//!
//! An element is stored as π^e · m where m = Σ_{j<N} a_j π^j and each a_j lives
//! in W(F_{2^d})/2^64, written in the basis 1, ζ, ..., ζ^{d-1} for ζ the
//! Teichmüller lift of the Conway generator. The absolute precision `prec`
//! says the element is known modulo π^prec. Valuations and precisions are kept
//! as integers in units of v(π) = 1/N.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result, Q};
use crate::gf2poly::{GfElem, GfField, MAX_FIELD_DEGREE};

pub const DEFAULT_PRECISION: i64 = 12;
pub const DEFAULT_MAX_RAM_INDEX: u32 = 240;
pub const DEFAULT_MAX_RES_DEGREE: u32 = 16;
/// Relative precision kept per element, in units of v(2).
const STORE_BITS: i64 = 60;

// ---------------------------------------------------------------------------
// Unramified part: W(F_{2^d}) / 2^64

struct WittCtx {
    /// Low coefficients of the monic minimal polynomial of ζ.
    phi: Vec<u64>,
}

fn witt_table() -> &'static [OnceLock<WittCtx>] {
    static T: OnceLock<Vec<OnceLock<WittCtx>>> = OnceLock::new();
    T.get_or_init(|| (0..=MAX_FIELD_DEGREE).map(|_| OnceLock::new()).collect())
}

fn poly_mulmod(a: &[u64], b: &[u64], phi: &[u64]) -> Vec<u64> {
    let d = phi.len();
    let mut r = vec![0u64; 2 * d - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = r[i + j].wrapping_add(x.wrapping_mul(y));
        }
    }
    for k in (d..r.len()).rev() {
        let c = r[k];
        if c == 0 {
            continue;
        }
        for i in 0..d {
            r[k - d + i] = r[k - d + i].wrapping_sub(c.wrapping_mul(phi[i]));
        }
    }
    r.truncate(d);
    r
}

fn witt(d: u32) -> &'static WittCtx {
    witt_table()[d as usize].get_or_init(|| {
        let d = d as usize;
        let conway = crate::gf2poly::conway_polynomial(d as u32);
        // naive lift of the Conway polynomial
        let lift: Vec<u64> = (0..d).map(|i| (conway >> i) & 1).collect();
        let mut x = vec![0u64; d];
        if d == 1 {
            // F_2: the generator is 1 and so is its lift.
            return WittCtx { phi: vec![1u64.wrapping_neg()] };
        }
        x[1] = 1;
        // Teichmüller lift of X: X^{q^64}
        for _ in 0..64 * d {
            x = poly_mulmod(&x, &x, &lift);
        }
        // conjugates t^{2^i}
        let mut conj = Vec::with_capacity(d);
        let mut t = x.clone();
        for _ in 0..d {
            conj.push(t.clone());
            t = poly_mulmod(&t, &t, &lift);
        }
        // Π (T - t_i) with coefficients in A = Z/2^64[X]/(lift)
        let mut prod: Vec<Vec<u64>> = vec![{
            let mut one = vec![0u64; d];
            one[0] = 1;
            one
        }];
        for c in &conj {
            let mut next = vec![vec![0u64; d]; prod.len() + 1];
            for (k, p) in prod.iter().enumerate() {
                for i in 0..d {
                    next[k + 1][i] = next[k + 1][i].wrapping_add(p[i]);
                }
                let pc = poly_mulmod(p, c, &lift);
                for i in 0..d {
                    next[k][i] = next[k][i].wrapping_sub(pc[i]);
                }
            }
            prod = next;
        }
        let phi: Vec<u64> = (0..d)
            .map(|k| {
                debug_assert!(prod[k][1..].iter().all(|&c| c == 0));
                prod[k][0]
            })
            .collect();
        WittCtx { phi }
    })
}

fn wmul(a: &[u64], b: &[u64], d: u32) -> Vec<u64> {
    if d == 1 {
        return vec![a[0].wrapping_mul(b[0])];
    }
    poly_mulmod(a, b, &witt(d).phi)
}

fn wpow(a: &[u64], mut e: u64, d: u32) -> Vec<u64> {
    let mut r = vec![0u64; d as usize];
    r[0] = 1;
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            r = wmul(&r, &b, d);
        }
        b = wmul(&b, &b, d);
        e >>= 1;
    }
    r
}

/// Teichmüller lift of a residue class, as a W-coordinate vector.
fn wteich(c: GfElem, field: &GfField) -> Vec<u64> {
    let d = field.degree();
    let mut x: Vec<u64> = (0..d).map(|i| ((c >> i) & 1) as u64).collect();
    if c == 0 {
        return x;
    }
    let q = field.size();
    for _ in 0..64 {
        x = wpow(&x, q, d);
    }
    x
}

fn wtz(a: &[u64]) -> u32 {
    a.iter().map(|c| c.trailing_zeros()).min().unwrap_or(64)
}

// ---------------------------------------------------------------------------
// Ring descriptors

/// Ramification index N over Z_2 and residue field F_{2^d}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ring {
    pub n: u32,
    pub field: GfField,
}

impl Ring {
    pub fn new(n: u32, d: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("ramification index must be positive".into()));
        }
        Ok(Ring {
            n,
            field: GfField::new(d)?,
        })
    }

    pub fn d(&self) -> u32 {
        self.field.degree()
    }

    fn width(&self) -> usize {
        (self.n * self.d()) as usize
    }

    /// Smallest ring containing both.
    pub fn join(&self, o: &Ring) -> Result<Ring> {
        Ring::new(self.n.lcm(&o.n), self.d().lcm(&o.d()))
    }

    /// Ring with lattice refined so that `q` lies in (1/N)Z.
    pub fn with_value(&self, q: Q) -> Result<Ring> {
        Ring::new(self.n.lcm(&(*q.denom() as u32)), self.d())
    }

    pub fn contains(&self, o: &Ring) -> bool {
        self.n.is_multiple_of(o.n) && self.d().is_multiple_of(o.d())
    }

    /// q as an integer number of units 1/N, if it lies on the lattice.
    pub fn units(&self, q: Q) -> Option<i64> {
        let t = q * Q::from_integer(self.n as i64);
        t.is_integer().then(|| t.to_integer())
    }

    pub fn to_q(&self, units: i64) -> Q {
        Q::new(units, self.n as i64)
    }
}

/// Configuration of the working ring and its caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingParams {
    pub ring: Ring,
    /// Absolute precision P in units of v(2).
    pub precision: Q,
    pub max_n: u32,
    pub max_d: u32,
}

impl RingParams {
    pub fn new(n: u32, d: u32, precision: Q) -> Result<Self> {
        RingParams::with_caps(n, d, precision, DEFAULT_MAX_RAM_INDEX, DEFAULT_MAX_RES_DEGREE)
    }

    pub fn with_caps(n: u32, d: u32, precision: Q, max_n: u32, max_d: u32) -> Result<Self> {
        if precision <= Q::from_integer(3) {
            return Err(Error::InvalidParams("precision must exceed 3".into()));
        }
        if precision > Q::from_integer(STORE_BITS - 8) {
            return Err(Error::InvalidParams(format!(
                "precision at most {} is supported",
                STORE_BITS - 8
            )));
        }
        if max_d > MAX_FIELD_DEGREE {
            return Err(Error::InvalidParams(format!(
                "residue degree cap at most {MAX_FIELD_DEGREE}"
            )));
        }
        let p = RingParams {
            ring: Ring::new(n, d)?,
            precision,
            max_n,
            max_d,
        };
        p.check(&p.ring)?;
        Ok(p)
    }

    pub fn default_params() -> Self {
        RingParams::new(1, 1, Q::from_integer(DEFAULT_PRECISION)).unwrap()
    }

    /// Fail if `ring` exceeds the configured caps.
    pub fn check(&self, ring: &Ring) -> Result<()> {
        if ring.n > self.max_n {
            return Err(Error::CapExceeded {
                what: "ramification index",
                requested: ring.n as i64,
                max: self.max_n as i64,
            });
        }
        if ring.d() > self.max_d {
            return Err(Error::CapExceeded {
                what: "residue degree",
                requested: ring.d() as i64,
                max: self.max_d as i64,
            });
        }
        Ok(())
    }

    /// Same parameters over a larger ring (checked against the caps).
    pub fn refine(&self, n: u32, d: u32) -> Result<RingParams> {
        if !n.is_multiple_of(self.ring.n) || !d.is_multiple_of(self.ring.d()) {
            return Err(Error::InvalidParams("refinement must be a multiple".into()));
        }
        if d > MAX_FIELD_DEGREE || d > self.max_d {
            return Err(Error::CapExceeded {
                what: "residue degree",
                requested: d as i64,
                max: self.max_d.min(MAX_FIELD_DEGREE) as i64,
            });
        }
        let ring = Ring::new(n, d)?;
        self.check(&ring)?;
        Ok(RingParams { ring, ..*self })
    }

    pub fn with_ring(&self, ring: Ring) -> Result<RingParams> {
        self.refine(ring.n, ring.d())
    }

    /// Absolute precision of freshly constructed elements, in units.
    pub fn prec_units(&self) -> i64 {
        (self.precision * Q::from_integer(self.ring.n as i64))
            .ceil()
            .to_integer()
    }
}

// ---------------------------------------------------------------------------
// Elements

/// Result of a valuation query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Finite(Q),
    /// All digits below the cutoff vanish: v ≥ the given bound.
    AtLeast(Q),
}

#[derive(Clone)]
pub struct ValuedCoeff {
    ring: Ring,
    e: i64,
    m: Vec<u64>,
    prec: i64,
    zero_asserted: bool,
}

impl fmt::Debug for ValuedCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation() {
            Val::AtLeast(t) => write!(f, "O(2^{t})"),
            Val::Finite(v) => {
                let digits = self.digits();
                write!(f, "[v={v}; ")?;
                for (i, (u, c)) in digits.iter().take(6).enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{c}·π^{u}")?;
                }
                write!(f, " + O(2^{})]", self.ring.to_q(self.prec))
            }
        }
    }
}

impl ValuedCoeff {
    fn cap(ring: &Ring) -> i64 {
        STORE_BITS * ring.n as i64
    }

    fn raw(ring: Ring, e: i64, m: Vec<u64>, prec: i64) -> Self {
        let mut x = ValuedCoeff {
            ring,
            e,
            m,
            prec,
            zero_asserted: false,
        };
        x.normalize();
        x
    }

    /// Asserted zero, known to the given absolute precision (units).
    pub fn zero_units(ring: Ring, prec: i64) -> Self {
        ValuedCoeff {
            ring,
            e: prec,
            m: vec![0; ring.width()],
            prec,
            zero_asserted: true,
        }
    }

    pub fn zero(params: &RingParams) -> Self {
        Self::zero_units(params.ring, params.prec_units())
    }

    pub fn one(params: &RingParams) -> Self {
        Self::from_i64(params, 1)
    }

    pub fn from_i64(params: &RingParams, v: i64) -> Self {
        Self::from_i64_in(params.ring, v, params.prec_units())
    }

    pub fn from_i64_in(ring: Ring, v: i64, prec: i64) -> Self {
        if v == 0 {
            return Self::zero_units(ring, prec);
        }
        let mut m = vec![0u64; ring.width()];
        m[0] = v as u64;
        Self::raw(ring, 0, m, prec)
    }

    /// num/den · 2^shift where den is odd and num is given modulo 2^64.
    pub fn from_parts(params: &RingParams, num: u64, den_odd: u64, shift: Q) -> Result<Self> {
        let ring = params.ring;
        let s = ring
            .units(shift)
            .ok_or_else(|| Error::InvalidParams(format!("2^{shift} needs a finer lattice")))?;
        if den_odd.is_multiple_of(2) {
            return Err(Error::InvalidParams("denominator must be odd".into()));
        }
        if num == 0 {
            return Ok(Self::zero(params));
        }
        let inv = inv_odd_u64(den_odd);
        let mut m = vec![0u64; ring.width()];
        m[0] = num.wrapping_mul(inv);
        Ok(Self::raw(ring, s, m, s + params.prec_units()))
    }

    /// The chosen power 2^λ (λ must lie in (1/N)Z).
    pub fn pow2(params: &RingParams, lambda: Q) -> Result<Self> {
        Self::pow2_in(params.ring, lambda, params.prec_units())
    }

    /// 2^λ in `ring`, known to relative precision `rel` units.
    pub fn pow2_in(ring: Ring, lambda: Q, rel: i64) -> Result<Self> {
        let s = ring
            .units(lambda)
            .ok_or_else(|| Error::InvalidParams(format!("2^{lambda} needs a finer lattice")))?;
        let mut m = vec![0u64; ring.width()];
        m[0] = 1;
        Ok(Self::raw(ring, s, m, s + rel))
    }

    /// Teichmüller lift of a residue-field element.
    pub fn teichmuller(params: &RingParams, c: GfElem) -> Self {
        Self::teichmuller_in(params.ring, c, params.prec_units())
    }

    pub fn teichmuller_in(ring: Ring, c: GfElem, prec: i64) -> Self {
        if c == 0 {
            return Self::zero_units(ring, prec);
        }
        let w = wteich(c, &ring.field);
        let mut m = vec![0u64; ring.width()];
        m[..ring.d() as usize].copy_from_slice(&w);
        Self::raw(ring, 0, m, prec)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// Absolute precision in units of v(2).
    pub fn precision(&self) -> Q {
        self.ring.to_q(self.prec)
    }

    pub fn prec_units(&self) -> i64 {
        self.prec
    }

    pub fn is_zero_asserted(&self) -> bool {
        self.zero_asserted
    }

    /// Valuation of m in units, ignoring digits beyond the precision.
    fn m_val(&self) -> Option<i64> {
        let n = self.ring.n as i64;
        let d = self.ring.d() as usize;
        let rel = self.prec - self.e;
        let mut best: Option<i64> = None;
        for j in 0..self.ring.n as usize {
            let a = &self.m[j * d..(j + 1) * d];
            let tz = wtz(a) as i64;
            if tz >= 64 {
                continue;
            }
            let u = tz * n + j as i64;
            if u < rel && best.is_none_or(|b| u < b) {
                best = Some(u);
            }
        }
        best
    }

    fn normalize(&mut self) {
        let cap = Self::cap(&self.ring);
        if self.prec - self.e > cap {
            self.prec = self.e + cap;
        }
        match self.m_val() {
            None => {
                self.e = self.prec;
                self.m.iter_mut().for_each(|c| *c = 0);
            }
            Some(0) => {}
            Some(s) => {
                self.m = shift_down(&self.m, s, &self.ring);
                self.e += s;
            }
        }
        // relative precision can only have shrunk
    }

    /// Valuation in units, or `None` if zero to the stored precision.
    pub fn val_units(&self) -> Option<i64> {
        self.m_val().map(|s| self.e + s)
    }

    pub fn valuation(&self) -> Val {
        match self.val_units() {
            Some(u) => Val::Finite(self.ring.to_q(u)),
            None => Val::AtLeast(self.ring.to_q(self.prec)),
        }
    }

    /// Exact valuation; an unasserted zero-to-precision value is an error.
    pub fn val(&self) -> Result<Val> {
        match self.valuation() {
            Val::AtLeast(t) if !self.zero_asserted => Err(Error::PrecisionExhausted(t)),
            v => Ok(v),
        }
    }

    /// Exact finite valuation, failing on anything that looks like zero.
    pub fn val_exact(&self) -> Result<Q> {
        match self.valuation() {
            Val::Finite(v) => Ok(v),
            Val::AtLeast(t) => Err(Error::PrecisionExhausted(t)),
        }
    }

    /// Lower bound for the valuation (exact when finite).
    pub fn val_lower(&self) -> Q {
        match self.valuation() {
            Val::Finite(v) | Val::AtLeast(v) => v,
        }
    }

    fn val_lower_units(&self) -> i64 {
        self.val_units().unwrap_or(self.prec)
    }

    /// Certified comparison v(x) > t.
    pub fn val_gt(&self, t: Q) -> Result<bool> {
        match self.valuation() {
            Val::Finite(v) => Ok(v > t),
            Val::AtLeast(p) if p > t => Ok(true),
            Val::AtLeast(p) => Err(Error::PrecisionExhausted(p)),
        }
    }

    /// Certified comparison v(x) ≥ t.
    pub fn val_ge(&self, t: Q) -> Result<bool> {
        match self.valuation() {
            Val::Finite(v) => Ok(v >= t),
            Val::AtLeast(p) if p >= t => Ok(true),
            Val::AtLeast(p) => Err(Error::PrecisionExhausted(p)),
        }
    }

    /// True if zero at the stored precision.
    pub fn is_negligible(&self) -> bool {
        self.val_units().is_none()
    }

    fn aligned_m(&self, e: i64) -> Vec<u64> {
        // requires e ≤ self.e
        shift_up(&self.m, self.e - e, &self.ring)
    }

    fn same_ring(&self, o: &ValuedCoeff) {
        assert_eq!(self.ring, o.ring, "coefficients from different rings");
    }

    pub fn add(&self, o: &ValuedCoeff) -> ValuedCoeff {
        self.same_ring(o);
        let prec = self.prec.min(o.prec);
        let e = self.e.min(o.e).min(prec);
        let a = self.aligned_m(e);
        let b = o.aligned_m(e);
        let m = a.iter().zip(&b).map(|(x, y)| x.wrapping_add(*y)).collect();
        let mut r = Self::raw(self.ring, e, m, prec);
        r.zero_asserted = self.zero_asserted && o.zero_asserted;
        r
    }

    pub fn neg(&self) -> ValuedCoeff {
        let mut r = self.clone();
        r.m.iter_mut().for_each(|c| *c = c.wrapping_neg());
        r
    }

    pub fn sub(&self, o: &ValuedCoeff) -> ValuedCoeff {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ValuedCoeff) -> ValuedCoeff {
        self.same_ring(o);
        let prec = (self.prec + o.val_lower_units()).min(o.prec + self.val_lower_units());
        if self.is_negligible() || o.is_negligible() {
            let mut z = Self::zero_units(self.ring, prec);
            z.zero_asserted = self.zero_asserted || o.zero_asserted;
            return z;
        }
        let m = rmul(&self.m, &o.m, &self.ring);
        Self::raw(self.ring, self.e + o.e, m, prec)
    }

    pub fn mul_i64(&self, k: i64) -> ValuedCoeff {
        let c = Self::from_i64_in(self.ring, k, self.prec.max(0) + 64 * self.ring.n as i64);
        self.mul(&c)
    }

    /// Multiply by 2^λ (λ on the lattice).
    pub fn mul_pow2(&self, lambda: Q) -> Result<ValuedCoeff> {
        let s = self
            .ring
            .units(lambda)
            .ok_or_else(|| Error::InvalidParams(format!("2^{lambda} needs a finer lattice")))?;
        let mut r = self.clone();
        r.e += s;
        r.prec += s;
        Ok(r)
    }

    /// Inverse of a unit.
    pub fn inv_unit(&self) -> Result<ValuedCoeff> {
        match self.valuation() {
            Val::Finite(v) if v.is_zero() => self.inv(),
            Val::Finite(v) => Err(Error::NonUnitInverse(v)),
            Val::AtLeast(t) => Err(Error::PrecisionExhausted(t)),
        }
    }

    /// Inverse of a nonzero element (possibly of nonzero valuation).
    pub fn inv(&self) -> Result<ValuedCoeff> {
        let v = match self.val_units() {
            Some(v) => v,
            None => return Err(Error::PrecisionExhausted(self.precision())),
        };
        // after normalize, e == v and m is a unit
        let ring = self.ring;
        let rel = self.prec - v;
        let res = self.m_residue();
        let rinv = ring.field.inv(res).expect("unit residue");
        let w = wteich(rinv, &ring.field);
        let mut y = vec![0u64; ring.width()];
        y[..ring.d() as usize].copy_from_slice(&w);
        let mut two = vec![0u64; ring.width()];
        two[0] = 2;
        let steps = 64 - ((Self::cap(&ring) as u64).leading_zeros()) + 2;
        for _ in 0..steps {
            let my = rmul(&self.m, &y, &ring);
            let t: Vec<u64> = two.iter().zip(&my).map(|(a, b)| a.wrapping_sub(*b)).collect();
            y = rmul(&y, &t, &ring);
        }
        Ok(Self::raw(ring, -v, y, -v + rel))
    }

    pub fn div(&self, o: &ValuedCoeff) -> Result<ValuedCoeff> {
        Ok(self.mul(&o.inv()?))
    }

    /// Residue of m's constant digit (m is a unit after normalize).
    fn m_residue(&self) -> GfElem {
        let d = self.ring.d() as usize;
        (0..d).fold(0, |acc, k| acc | (((self.m[k] & 1) as GfElem) << k))
    }

    /// Residue class in the residue field (requires v ≥ 0).
    pub fn residue(&self) -> Result<GfElem> {
        match self.val_units() {
            None if self.prec >= 0 => Ok(0),
            None => Err(Error::PrecisionExhausted(self.precision())),
            Some(v) if v > 0 => Ok(0),
            Some(0) => Ok(self.m_residue()),
            Some(v) => Err(Error::InvalidParams(format!(
                "residue of an element of valuation {}",
                self.ring.to_q(v)
            ))),
        }
    }

    /// Residue of x / 2^γ (requires v(x) ≥ γ and γ on the lattice).
    pub fn residue_scaled(&self, gamma: Q) -> Result<GfElem> {
        let g = self
            .ring
            .units(gamma)
            .ok_or_else(|| Error::InvalidParams(format!("2^{gamma} needs a finer lattice")))?;
        if self.prec <= g {
            return Err(Error::PrecisionExhausted(self.precision()));
        }
        match self.val_units() {
            None => Ok(0),
            Some(v) if v > g => Ok(0),
            Some(v) if v == g => Ok(self.m_residue()),
            Some(v) => Err(Error::InvalidParams(format!(
                "reduction at {gamma} of an element of valuation {}",
                self.ring.to_q(v)
            ))),
        }
    }

    /// Re-encode in a ring containing this one.
    pub fn refine(&self, target: &Ring) -> ValuedCoeff {
        if *target == self.ring {
            return self.clone();
        }
        assert!(target.contains(&self.ring), "refine needs N | N' and d | d'");
        let k = (target.n / self.ring.n) as usize;
        let (d, dd) = (self.ring.d() as usize, target.d() as usize);
        let basis = embed_basis(&self.ring.field, &target.field);
        let mut m = vec![0u64; target.width()];
        for j in 0..self.ring.n as usize {
            let src = &self.m[j * d..(j + 1) * d];
            let dst = &mut m[j * k * dd..(j * k + 1) * dd];
            for (i, &c) in src.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (t, &b) in basis[i].iter().enumerate() {
                    dst[t] = dst[t].wrapping_add(c.wrapping_mul(b));
                }
            }
        }
        let mut r = Self::raw(*target, self.e * k as i64, m, self.prec * k as i64);
        r.zero_asserted = self.zero_asserted;
        r
    }

    /// Drop precision to at most `prec` units.
    pub fn truncate_prec(&self, prec: i64) -> ValuedCoeff {
        if prec >= self.prec {
            return self.clone();
        }
        let mut r = self.clone();
        r.prec = prec;
        if r.e > prec {
            r.e = prec;
        }
        r.normalize();
        r
    }

    /// Teichmüller digits (exponent in units, digit) below the precision.
    pub fn digits(&self) -> Vec<(Q, GfElem)> {
        let mut out = Vec::new();
        let mut t = self.clone();
        t.zero_asserted = false;
        while let Some(u) = t.val_units() {
            let c = t.m_residue();
            out.push((self.ring.to_q(u), c));
            let lift = Self::teichmuller_in(self.ring, c, t.prec - u).truncate_prec(t.prec - u);
            let mut lift = lift;
            lift.e += u;
            lift.prec += u;
            t = t.sub(&lift);
        }
        out
    }

    /// Certified equality at the common precision.
    pub fn approx_eq(&self, o: &ValuedCoeff) -> bool {
        self.sub(o).is_negligible()
    }

    /// Deterministic ordering by Teichmüller digits.
    pub fn digit_cmp(&self, o: &ValuedCoeff) -> Ordering {
        let a = self.digits();
        let b = o.digits();
        a.len().cmp(&b.len()).then_with(|| a.cmp(&b))
    }
}

/// Basis images ζ_d^i in W(F_{2^D}) under the Conway-compatible embedding.
fn embed_basis(from: &GfField, to: &GfField) -> Vec<Vec<u64>> {
    let (d, dd) = (from.degree(), to.degree());
    let zeta_to = wteich(to.generator(), to);
    let k = (to.size() - 1) / (from.size() - 1);
    let img = wpow(&zeta_to, k, dd);
    let mut out = Vec::with_capacity(d as usize);
    let mut cur = vec![0u64; dd as usize];
    cur[0] = 1;
    for _ in 0..d {
        out.push(cur.clone());
        cur = wmul(&cur, &img, dd);
    }
    out
}

fn inv_odd_u64(a: u64) -> u64 {
    let mut x = a; // correct to 3 bits
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}

/// m · π^s.
fn shift_up(m: &[u64], s: i64, ring: &Ring) -> Vec<u64> {
    if s == 0 {
        return m.to_vec();
    }
    let n = ring.n as i64;
    let d = ring.d() as usize;
    let (q, r) = (s / n, (s % n) as usize);
    let mut out = vec![0u64; m.len()];
    for j in 0..n as usize {
        let src = &m[j * d..(j + 1) * d];
        let (pos, extra) = if j + r < n as usize {
            (j + r, q)
        } else {
            (j + r - n as usize, q + 1)
        };
        for k in 0..d {
            out[pos * d + k] = if extra >= 64 { 0 } else { src[k] << extra };
        }
    }
    out
}

/// m / π^s, assuming divisibility.
fn shift_down(m: &[u64], s: i64, ring: &Ring) -> Vec<u64> {
    let n = ring.n as i64;
    let d = ring.d() as usize;
    let (q, r) = (s / n, (s % n) as usize);
    let mut out = vec![0u64; m.len()];
    for j in 0..n as usize {
        let src = &m[j * d..(j + 1) * d];
        let (pos, extra) = if j >= r {
            (j - r, q)
        } else {
            (j + n as usize - r, q + 1)
        };
        for k in 0..d {
            out[pos * d + k] = if extra >= 64 { 0 } else { src[k] >> extra };
        }
    }
    out
}

/// Product in W[π]/(π^N - 2) modulo 2^64.
fn rmul(a: &[u64], b: &[u64], ring: &Ring) -> Vec<u64> {
    let n = ring.n as usize;
    let d = ring.d();
    let du = d as usize;
    let mut out = vec![0u64; a.len()];
    for i in 0..n {
        let ai = &a[i * du..(i + 1) * du];
        if ai.iter().all(|&c| c == 0) {
            continue;
        }
        for j in 0..n {
            let bj = &b[j * du..(j + 1) * du];
            if bj.iter().all(|&c| c == 0) {
                continue;
            }
            let p = wmul(ai, bj, d);
            let (pos, twice) = if i + j < n { (i + j, false) } else { (i + j - n, true) };
            for k in 0..du {
                let v = if twice { p[k] << 1 } else { p[k] };
                out[pos * du + k] = out[pos * du + k].wrapping_add(v);
            }
        }
    }
    out
}

/// Floor of a rational as i64.
pub fn q_floor(q: Q) -> i64 {
    q.floor().to_integer()
}

pub fn q_ceil(q: Q) -> i64 {
    q.ceil().to_integer()
}

pub fn q_abs(q: Q) -> Q {
    q.abs()
}

pub fn q_is_one(q: Q) -> bool {
    q.is_one()
}
