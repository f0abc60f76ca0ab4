//! Curve descriptions read from JSON.

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Deserialize;

use hyperred_core::coeffring::{RingParams, ValuedCoeff};
use hyperred_core::error::Q;
use hyperred_core::laurent::LaurentPoly;

/// An integer given either as a JSON number or as a decimal string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntLike {
    Int(i64),
    Str(String),
}

impl IntLike {
    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            IntLike::Int(v) => Ok(BigInt::from(*v)),
            IntLike::Str(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| anyhow!("not an integer: {s:?}")),
        }
    }
}

fn one() -> IntLike {
    IntLike::Int(1)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub deg: i64,
    pub num: IntLike,
    #[serde(default = "one")]
    pub den: IntLike,
    #[serde(default)]
    pub pow2: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputOptions {
    pub precision: Option<String>,
    #[serde(rename = "max_N")]
    pub max_n: Option<u32>,
    pub max_d: Option<u32>,
    pub truncation: Option<bool>,
    pub thickness_annotation: Option<String>,
    pub invariant_check: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveInput {
    pub factors: Vec<Vec<Monomial>>,
    #[serde(default)]
    pub options: InputOptions,
}

pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    let q = match t.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| anyhow!("not a rational: {s:?}"))?;
            let b: i64 = b.trim().parse().map_err(|_| anyhow!("not a rational: {s:?}"))?;
            if b == 0 {
                bail!("zero denominator in {s:?}");
            }
            Q::new(a, b)
        }
        None => Q::from_integer(t.parse().map_err(|_| anyhow!("not a rational: {s:?}"))?),
    };
    Ok(q)
}

/// Low 64 bits of a nonnegative integer.
fn low_u64(n: &BigInt) -> u64 {
    n.magnitude().iter_u64_digits().next().unwrap_or(0)
}

/// Split a nonzero integer as sign, 2-adic valuation and odd part.
fn two_adic(n: &BigInt) -> (bool, i64, BigInt) {
    let negative = n.sign() == Sign::Minus;
    let v = n.trailing_zeros().unwrap_or(0);
    (negative, v as i64, n.abs() >> v)
}

/// num/den · 2^pow2 as (negative, odd numerator, odd denominator, exponent).
/// `None` for a zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub negative: bool,
    pub num_odd: BigInt,
    pub den_odd: BigInt,
    pub shift: Q,
}

impl Monomial {
    pub fn coefficient(&self) -> Result<Option<Coefficient>> {
        let num = self.num.to_bigint()?;
        let den = self.den.to_bigint()?;
        if den.is_zero() {
            bail!("zero denominator in the monomial of degree {}", self.deg);
        }
        let pow2 = match &self.pow2 {
            Some(s) => parse_rational(s)?,
            None => Q::zero(),
        };
        if num.is_zero() {
            return Ok(None);
        }
        let (sn, vn, on) = two_adic(&num);
        let (sd, vd, od) = two_adic(&den);
        let g = on.gcd(&od);
        Ok(Some(Coefficient {
            negative: sn != sd,
            num_odd: on / &g,
            den_odd: od / &g,
            shift: pow2 + Q::from_integer(vn - vd),
        }))
    }
}

impl CurveInput {
    pub fn from_json(text: &str) -> Result<CurveInput> {
        let c: CurveInput = serde_json::from_str(text).context("malformed input")?;
        if c.factors.is_empty() {
            bail!("malformed input: no factors");
        }
        for (k, f) in c.factors.iter().enumerate() {
            if f.is_empty() {
                bail!("malformed input: factor {k} has no monomials");
            }
            for m in f {
                if m.deg < 0 {
                    bail!("malformed input: negative degree {} in factor {k}", m.deg);
                }
                m.coefficient()
                    .with_context(|| format!("malformed input: factor {k}, degree {}", m.deg))?;
            }
        }
        Ok(c)
    }

    /// Smallest ramification index making every exponent integral.
    pub fn ramification(&self) -> Result<u32> {
        let mut n: i64 = 1;
        for f in &self.factors {
            for m in f {
                if let Some(c) = m.coefficient()? {
                    n = n.lcm(c.shift.denom());
                }
            }
        }
        u32::try_from(n).map_err(|_| anyhow!("exponent denominators too large"))
    }

    /// The factors as polynomials over the smallest ring containing them.
    pub fn polynomials(&self, base: &RingParams) -> Result<Vec<LaurentPoly>> {
        let params = base.refine(self.ramification()?, 1)?;
        let mut out = Vec::new();
        for f in &self.factors {
            let mut terms = Vec::new();
            for m in f {
                let Some(c) = m.coefficient()? else { continue };
                let mut x = ValuedCoeff::from_parts(
                    &params,
                    low_u64(&c.num_odd),
                    low_u64(&c.den_odd),
                    c.shift,
                )?;
                if c.negative {
                    x = x.neg();
                }
                terms.push((m.deg, x));
            }
            let p = LaurentPoly::from_terms(&params, terms);
            if p.is_empty() {
                bail!("a factor is zero");
            }
            out.push(p);
        }
        Ok(out)
    }
}
