//! Branch points: Newton polygons and roots of polynomials over the
//! coefficient ring, found by slope scaling, residue factorization, Hensel
//! lifting and translation by Teichmüller lifts.

use num_traits::{Signed, Zero};

use crate::coeffring::{Ring, RingParams, ValuedCoeff};
use crate::error::{Error, Result, Q};
use crate::laurent::LaurentPoly;

/// Recursion depth after which a cluster that refuses to split is reported
/// as wild.
const MAX_DEPTH: usize = 48;
const HENSEL_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NewtonSegment {
    /// Slope of the lower hull; the roots on it have valuation -slope.
    pub slope: Q,
    pub length: i64,
}

impl NewtonSegment {
    pub fn root_valuation(&self) -> Q {
        -self.slope
    }
}

/// Lower convex hull of {(i, v(a_i))} for the nonzero roots (degrees from
/// ldeg to deg), left to right.
pub fn newton_polygon(f: &LaurentPoly) -> Result<Vec<NewtonSegment>> {
    let pts = f.lines()?;
    if pts.is_empty() {
        return Err(Error::InvalidParams("newton polygon of the zero polynomial".into()));
    }
    let mut hull: Vec<(i64, Q)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above the segment a-p
            let lhs = (b.1 - a.1) * Q::from_integer(p.0 - a.0);
            let rhs = (p.1 - a.1) * Q::from_integer(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(hull
        .windows(2)
        .map(|w| NewtonSegment {
            slope: (w[1].1 - w[0].1) / Q::from_integer(w[1].0 - w[0].0),
            length: w[1].0 - w[0].0,
        })
        .collect())
}

/// Horner evaluation of a polynomial at a point of the same ring.
pub fn eval(f: &LaurentPoly, x: &ValuedCoeff) -> ValuedCoeff {
    let n = f.deg().unwrap_or(0);
    let mut acc = ValuedCoeff::zero_units(f.ring(), f.prec_units());
    for i in (0..=n).rev() {
        acc = acc.mul(x).add(&f.coeff(i));
    }
    acc
}

fn embed(c: &ValuedCoeff, ring: Ring) -> ValuedCoeff {
    c.refine(&ring)
}

/// All roots of a polynomial in the tame model, each in its own ring.
pub fn find_roots(f: &LaurentPoly) -> Result<Vec<ValuedCoeff>> {
    let ldeg = f
        .ldeg()
        .ok_or_else(|| Error::InvalidParams("roots of the zero polynomial".into()))?;
    if ldeg < 0 {
        return Err(Error::InvalidParams("roots of a Laurent polynomial with poles".into()));
    }
    if ldeg > 1 {
        return Err(Error::InvalidParams("polynomial is not separable (repeated root 0)".into()));
    }
    let mut roots = Vec::new();
    if ldeg == 1 {
        roots.push(ValuedCoeff::zero(f.params()));
    }
    let g = f.shift(-ldeg);
    let found = roots_above(&g, None, 0).map_err(|e| match e {
        Error::CapExceeded { .. } => Error::WildRootObstruction,
        e => e,
    })?;
    roots.extend(found);
    let want = f.deg().unwrap_or(0) as usize;
    if roots.len() != want {
        return Err(Error::WildRootObstruction);
    }
    check_distinct(&roots)?;
    Ok(roots)
}

/// Pairwise distinct at the working precision.
pub fn check_distinct(roots: &[ValuedCoeff]) -> Result<()> {
    for (a, r) in roots.iter().enumerate() {
        for s in &roots[a + 1..] {
            let ring = r.ring().join(&s.ring())?;
            if embed(r, ring).sub(&embed(s, ring)).is_negligible() {
                return Err(Error::InvalidParams(
                    "polynomial is not separable at the working precision; increase --precision"
                        .into(),
                ));
            }
        }
    }
    Ok(())
}

/// Roots of f with valuation strictly above `above`.
fn roots_above(f: &LaurentPoly, above: Option<Q>, depth: usize) -> Result<Vec<ValuedCoeff>> {
    if depth > MAX_DEPTH {
        return Err(Error::WildRootObstruction);
    }
    let mut out = Vec::new();
    match f.ldeg() {
        Some(k) if k > 1 => {
            return Err(Error::InvalidParams("polynomial is not separable".into()))
        }
        Some(1) => out.push(ValuedCoeff::zero(f.params())),
        _ => {}
    }
    let segs = newton_polygon(f)?;
    let mut start = f.ldeg().unwrap_or(0);
    for seg in segs {
        let i0 = start;
        start += seg.length;
        let mu = seg.root_valuation();
        if above.is_some_and(|a| mu <= a) {
            continue;
        }
        let ring = f.ring().with_value(mu)?;
        f.params().check(&ring)?;
        let fr = f.refine(ring)?;
        let scaled = fr.subst_scale(mu)?;
        let vmin = fr.coeff(i0).val_exact()? + mu * Q::from_integer(i0);
        let fs = scaled.mul_pow2(-vmin)?;
        let res = fs.reduce(Q::zero())?.shift(-i0);
        let poly = res
            .to_poly()
            .ok_or_else(|| Error::InvariantFailure("residue polynomial has poles".into()))?;
        let rs = crate::gf2poly::roots_with_multiplicity(&poly)?;
        let big = Ring {
            n: ring.n,
            field: rs.field,
        };
        fs.params().check(&big)?;
        let fb = fs.refine(big)?;
        let scale = ValuedCoeff::pow2_in(big, mu, fb.prec_units().max(1) + 64)?;
        for &(c, m, _) in &rs.roots {
            if c == 0 {
                continue;
            }
            let t = ValuedCoeff::teichmuller_in(big, c, fb.prec_units());
            let us = if m == 1 {
                vec![hensel(&fb, t)?]
            } else {
                let g = fb.subst_translate(&t)?;
                let ys = roots_above(&g, Some(Q::zero()), depth + 1)?;
                if ys.len() != m as usize {
                    return Err(Error::WildRootObstruction);
                }
                ys.into_iter()
                    .map(|y| {
                        let r = y.ring().join(&big).unwrap_or(big);
                        embed(&t, r).add(&embed(&y, r))
                    })
                    .collect()
            };
            for u in us {
                let r = u.ring();
                out.push(embed(&scale, r).mul(&u));
            }
        }
    }
    Ok(out)
}

/// Newton iteration from an approximate simple root with unit derivative.
fn hensel(f: &LaurentPoly, mut u: ValuedCoeff) -> Result<ValuedCoeff> {
    let df = f.derivative();
    for _ in 0..HENSEL_STEPS {
        let fu = eval(f, &u);
        if fu.is_negligible() {
            break;
        }
        let d = eval(&df, &u);
        let step = fu.div(&d)?;
        if step.is_negligible() {
            break;
        }
        u = u.sub(&step);
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Input,
    RootFound,
}

#[derive(Debug, Clone)]
pub enum Point {
    Finite(ValuedCoeff),
    Infinity,
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub point: Point,
    pub provenance: Provenance,
}

/// The 2g+2 branch points of z^2 = F, all finite ones in a common ring.
#[derive(Debug, Clone)]
pub struct BranchSet {
    pub params: RingParams,
    pub points: Vec<BranchPoint>,
}

impl BranchSet {
    /// Branch points of the product of the given factors. Linear factors
    /// give their roots directly; the others go through `find_roots`.
    pub fn from_factors(factors: &[LaurentPoly]) -> Result<BranchSet> {
        let mut pts: Vec<(ValuedCoeff, Provenance)> = Vec::new();
        let mut degree = 0;
        let base = factors
            .first()
            .ok_or_else(|| Error::InvalidParams("no factors given".into()))?
            .params()
            .to_owned();
        for f in factors {
            let d = f.deg().ok_or_else(|| Error::InvalidParams("zero factor".into()))?;
            if f.ldeg().unwrap_or(0) < 0 {
                return Err(Error::InvalidParams("factors must be polynomials".into()));
            }
            degree += d;
            match d {
                0 => {}
                1 => {
                    let r = f.coeff(0).neg().div(&f.coeff(1))?;
                    pts.push((r, Provenance::Input));
                }
                _ => {
                    for r in find_roots(f)? {
                        pts.push((r, Provenance::RootFound));
                    }
                }
            }
        }
        let mut ring = base.ring;
        for (r, _) in &pts {
            ring = ring.join(&r.ring())?;
        }
        let params = base.with_ring(ring)?;
        let finite: Vec<(ValuedCoeff, Provenance)> =
            pts.into_iter().map(|(r, p)| (embed(&r, ring), p)).collect();
        let roots: Vec<ValuedCoeff> = finite.iter().map(|(r, _)| r.clone()).collect();
        check_distinct(&roots)?;
        let mut points: Vec<BranchPoint> = finite
            .into_iter()
            .map(|(r, provenance)| BranchPoint {
                point: Point::Finite(r),
                provenance,
            })
            .collect();
        if degree % 2 == 1 {
            points.push(BranchPoint {
                point: Point::Infinity,
                provenance: Provenance::Input,
            });
        }
        if points.len() < 4 {
            return Err(Error::InvalidParams(format!(
                "need at least 4 branch points (genus >= 1), got {}",
                points.len()
            )));
        }
        Ok(BranchSet { params, points })
    }

    pub fn genus(&self) -> i64 {
        (self.points.len() as i64 - 2) / 2
    }

    pub fn has_infinity(&self) -> bool {
        self.points.iter().any(|p| matches!(p.point, Point::Infinity))
    }

    pub fn finite(&self) -> Vec<ValuedCoeff> {
        self.points
            .iter()
            .filter_map(|p| match &p.point {
                Point::Finite(r) => Some(r.clone()),
                Point::Infinity => None,
            })
            .collect()
    }

    /// Move a finite branch point to infinity by x -> r0 + 1/x when the
    /// degree is even, so that infinity is always a branch point.
    pub fn with_infinity(&self) -> Result<BranchSet> {
        if self.has_infinity() {
            return Ok(self.clone());
        }
        let mut pts = self.points.clone();
        let r0 = match pts.remove(0).point {
            Point::Finite(r) => r,
            Point::Infinity => unreachable!(),
        };
        let mut points = Vec::with_capacity(pts.len() + 1);
        for p in pts {
            if let Point::Finite(r) = p.point {
                points.push(BranchPoint {
                    point: Point::Finite(r.sub(&r0).inv()?),
                    provenance: p.provenance,
                });
            }
        }
        points.push(BranchPoint {
            point: Point::Infinity,
            provenance: Provenance::Input,
        });
        Ok(BranchSet {
            params: self.params,
            points,
        })
    }
}

/// Certified v(x) as an exact rational, or an error if x vanishes.
pub fn distance(a: &ValuedCoeff, b: &ValuedCoeff) -> Result<Q> {
    let d = a.sub(b);
    d.val_exact().map_err(|_| {
        Error::PrecisionExhausted(d.precision().abs())
    })
}
