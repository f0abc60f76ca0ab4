//! Laurent polynomials over the coefficient ring with the valuation calculus:
//! v(F), deg/ldeg, residues [F/2^γ], and the substitutions x -> 2^λ u,
//! x -> x + ξ, x -> 1/x.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::coeffring::{Ring, RingParams, ValuedCoeff};
use crate::error::{Error, Result, Q};
use crate::gf2poly::GfLaurent;

#[derive(Clone)]
pub struct LaurentPoly {
    params: RingParams,
    terms: BTreeMap<i64, ValuedCoeff>,
    /// Absolute precision (units of 1/N) to which absent terms are zero.
    prec: i64,
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly[")?;
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}·x^{k}")?;
        }
        write!(f, "]")
    }
}

/// The interval [0, α] on which F lies in R[x, 2^α/x].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnulusDomain {
    pub alpha: Q,
}

impl AnnulusDomain {
    /// The closed disc: only λ = 0 matters for polynomials.
    pub fn disc() -> Self {
        AnnulusDomain { alpha: Q::zero() }
    }

    pub fn new(alpha: Q) -> Self {
        AnnulusDomain { alpha }
    }

    /// Check v(a_i) ≥ α|i| for all i < 0.
    pub fn admits(&self, f: &LaurentPoly) -> Result<bool> {
        for (&i, c) in f.terms.range(..0) {
            if !c.val_ge(self.alpha * Q::from_integer(-i))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl LaurentPoly {
    pub fn zero(params: &RingParams) -> Self {
        LaurentPoly {
            params: *params,
            terms: BTreeMap::new(),
            prec: params.prec_units(),
        }
    }

    pub fn from_terms(
        params: &RingParams,
        terms: impl IntoIterator<Item = (i64, ValuedCoeff)>,
    ) -> Self {
        let mut f = LaurentPoly::zero(params);
        for (i, c) in terms {
            f.add_term(i, c);
        }
        f
    }

    /// Polynomial with integer coefficients, given as (degree, coefficient).
    pub fn from_ints(params: &RingParams, terms: &[(i64, i64)]) -> Self {
        LaurentPoly::from_terms(
            params,
            terms
                .iter()
                .map(|&(i, c)| (i, ValuedCoeff::from_i64(params, c))),
        )
    }

    pub fn monomial(params: &RingParams, i: i64, c: ValuedCoeff) -> Self {
        LaurentPoly::from_terms(params, [(i, c)])
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }

    pub fn ring(&self) -> Ring {
        self.params.ring
    }

    pub fn prec_units(&self) -> i64 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &ValuedCoeff)> {
        self.terms.iter().map(|(&i, c)| (i, c))
    }

    pub fn coeff(&self, i: i64) -> ValuedCoeff {
        self.terms
            .get(&i)
            .cloned()
            .unwrap_or_else(|| ValuedCoeff::zero_units(self.ring(), self.prec))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add c·x^i, dropping coefficients that vanish at their precision.
    pub fn add_term(&mut self, i: i64, c: ValuedCoeff) {
        assert_eq!(c.ring(), self.ring(), "coefficient from a different ring");
        let new = match self.terms.remove(&i) {
            Some(old) => old.add(&c),
            None => c,
        };
        if new.is_negligible() {
            self.prec = self.prec.min(new.prec_units());
        } else {
            self.terms.insert(i, new);
        }
    }

    /// Tighten the absent-term precision (used by callers who know more).
    pub fn with_prec(mut self, prec: i64) -> Self {
        self.prec = self.prec.min(prec);
        self
    }

    pub fn deg(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn ldeg(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// v(F) = min v(a_i).
    pub fn v(&self) -> Result<Q> {
        let mut best: Option<Q> = None;
        for c in self.terms.values() {
            let v = c.val_exact()?;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        match best {
            Some(b) if self.params.ring.to_q(self.prec) > b => Ok(b),
            Some(b) => Err(Error::PrecisionExhausted(b)),
            None => Err(Error::PrecisionExhausted(self.params.ring.to_q(self.prec))),
        }
    }

    /// Lower bound on v(F), never failing.
    pub fn v_lower(&self) -> Q {
        self.terms
            .values()
            .map(|c| c.val_lower())
            .fold(self.params.ring.to_q(self.prec), |a, b| a.min(b))
    }

    /// Certified v(F) > t.
    pub fn v_gt(&self, t: Q) -> Result<bool> {
        for c in self.terms.values() {
            if !c.val_gt(t)? {
                return Ok(false);
            }
        }
        if self.params.ring.to_q(self.prec) <= t {
            return Err(Error::PrecisionExhausted(self.params.ring.to_q(self.prec)));
        }
        Ok(true)
    }

    /// Points (i, v(a_i)) of the Newton diagram.
    pub fn lines(&self) -> Result<Vec<(i64, Q)>> {
        self.terms
            .iter()
            .map(|(&i, c)| Ok((i, c.val_exact()?)))
            .collect()
    }

    fn binop(&self, o: &LaurentPoly, sign: i64) -> LaurentPoly {
        let mut out = self.clone();
        out.prec = self.prec.min(o.prec);
        for (&i, c) in &o.terms {
            out.add_term(i, if sign < 0 { c.neg() } else { c.clone() });
        }
        out
    }

    pub fn add(&self, o: &LaurentPoly) -> LaurentPoly {
        self.binop(o, 1)
    }

    pub fn sub(&self, o: &LaurentPoly) -> LaurentPoly {
        self.binop(o, -1)
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            params: self.params,
            terms: self.terms.iter().map(|(&i, c)| (i, c.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &LaurentPoly) -> LaurentPoly {
        let ring = self.ring();
        let vs = self.v_lower();
        let vo = o.v_lower();
        let rs = ring.units(vs).unwrap_or(0);
        let ro = ring.units(vo).unwrap_or(0);
        let mut out = LaurentPoly::zero(&self.params);
        out.prec = (self.prec + ro).min(o.prec + rs);
        for (&i, a) in &self.terms {
            for (&j, b) in &o.terms {
                out.add_term(i + j, a.mul(b));
            }
        }
        out
    }

    pub fn square(&self) -> LaurentPoly {
        self.mul(self)
    }

    pub fn scale(&self, c: &ValuedCoeff) -> LaurentPoly {
        let cv = self.ring().units(c.val_lower()).unwrap_or(0);
        let mut out = LaurentPoly::zero(&self.params);
        out.prec = (self.prec + cv).min(c.prec_units() + self.ring().units(self.v_lower()).unwrap_or(0));
        for (&i, a) in &self.terms {
            out.add_term(i, a.mul(c));
        }
        out
    }

    /// Multiply by 2^λ (λ on the lattice).
    pub fn mul_pow2(&self, lambda: Q) -> Result<LaurentPoly> {
        let s = self
            .ring()
            .units(lambda)
            .ok_or_else(|| Error::InvalidParams(format!("2^{lambda} off the lattice")))?;
        let mut out = LaurentPoly::zero(&self.params);
        out.prec = self.prec + s;
        for (&i, a) in &self.terms {
            out.add_term(i, a.mul_pow2(lambda)?);
        }
        Ok(out)
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: i64) -> LaurentPoly {
        LaurentPoly {
            params: self.params,
            terms: self.terms.iter().map(|(&i, c)| (i + k, c.clone())).collect(),
            prec: self.prec,
        }
    }

    /// Re-encode in a larger ring, checked against the caps.
    pub fn refine(&self, target: Ring) -> Result<LaurentPoly> {
        if target == self.ring() {
            return Ok(self.clone());
        }
        let params = self.params.with_ring(target)?;
        let k = (target.n / self.ring().n) as i64;
        Ok(LaurentPoly {
            params,
            terms: self
                .terms
                .iter()
                .map(|(&i, c)| (i, c.refine(&target)))
                .collect(),
            prec: self.prec * k,
        })
    }

    /// [F/2^γ] in k[x^{±1}].
    pub fn reduce(&self, gamma: Q) -> Result<GfLaurent> {
        let g = self
            .ring()
            .units(gamma)
            .ok_or_else(|| Error::InvalidParams(format!("2^{gamma} off the lattice")))?;
        if self.prec <= g {
            return Err(Error::PrecisionExhausted(self.ring().to_q(self.prec)));
        }
        let mut out = GfLaurent::zero(self.ring().field);
        for (&i, c) in &self.terms {
            out.add_term(i, c.residue_scaled(gamma)?);
        }
        Ok(out)
    }

    /// F(2^λ u), refining the lattice if λ is not on it.
    pub fn subst_scale(&self, lambda: Q) -> Result<LaurentPoly> {
        let ring = self.ring().with_value(lambda)?;
        let f = self.refine(ring)?;
        let mut out = LaurentPoly::zero(&f.params);
        out.prec = f.prec + ring.units(lambda * Q::from_integer(f.ldeg().unwrap_or(0).min(0))).unwrap();
        for (&i, a) in &f.terms {
            out.add_term(i, a.mul_pow2(lambda * Q::from_integer(i))?);
        }
        Ok(out)
    }

    /// F(x + ξ) for a polynomial F.
    pub fn subst_translate(&self, xi: &ValuedCoeff) -> Result<LaurentPoly> {
        if self.ldeg().unwrap_or(0) < 0 {
            return Err(Error::InvalidParams(
                "translation of a Laurent polynomial with poles".into(),
            ));
        }
        // Horner: ((a_n)(x+ξ) + a_{n-1})(x+ξ) + ...
        let lin = LaurentPoly::from_terms(
            &self.params,
            [
                (1, ValuedCoeff::one(&self.params)),
                (0, xi.clone()),
            ],
        );
        let n = self.deg().unwrap_or(0);
        let mut acc = LaurentPoly::zero(&self.params).with_prec(self.prec);
        for i in (0..=n).rev() {
            acc = acc.mul(&lin);
            if let Some(c) = self.terms.get(&i) {
                acc.add_term(0, c.clone());
            }
        }
        Ok(acc)
    }

    /// F(1/x).
    pub fn subst_invert(&self) -> LaurentPoly {
        LaurentPoly {
            params: self.params,
            terms: self.terms.iter().map(|(&i, c)| (-i, c.clone())).collect(),
            prec: self.prec,
        }
    }

    pub fn derivative(&self) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.params).with_prec(self.prec);
        for (&i, c) in &self.terms {
            if i != 0 {
                out.add_term(i - 1, c.mul_i64(i));
            }
        }
        out
    }

    /// F = u · x^m · F' with F' of ldeg 0 and constant term 1.
    pub fn normalize_unit_monomial(&self) -> Result<(LaurentPoly, i64, ValuedCoeff)> {
        let m = self
            .ldeg()
            .ok_or_else(|| Error::PrecisionExhausted(self.ring().to_q(self.prec)))?;
        let u = self.terms[&m].clone();
        let uinv = u.inv()?;
        Ok((self.shift(-m).scale(&uinv), m, u))
    }

    /// Split into (even-degree part, odd-degree part).
    pub fn split_parity(&self) -> (LaurentPoly, LaurentPoly) {
        let mut even = LaurentPoly::zero(&self.params).with_prec(self.prec);
        let mut odd = even.clone();
        for (&i, c) in &self.terms {
            if i.rem_euclid(2) == 0 {
                even.add_term(i, c.clone());
            } else {
                odd.add_term(i, c.clone());
            }
        }
        (even, odd)
    }

    /// Certified equality at the common precision.
    pub fn approx_eq(&self, o: &LaurentPoly) -> bool {
        self.sub(o).terms.is_empty()
    }

    /// Truncate every coefficient to absolute precision `prec` units.
    pub fn truncate_prec(&self, prec: i64) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.params).with_prec(self.prec.min(prec));
        for (&i, c) in &self.terms {
            out.add_term(i, c.truncate_prec(prec));
        }
        out
    }
}

/// Smallest ring containing the rings of all polynomials.
pub fn common_ring<'a>(polys: impl IntoIterator<Item = &'a LaurentPoly>) -> Result<Ring> {
    let mut it = polys.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidParams("empty polynomial list".into()))?;
    let mut r = first.ring();
    for p in it {
        r = r.join(&p.ring())?;
    }
    Ok(r)
}
