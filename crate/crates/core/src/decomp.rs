//! Decompositions F = G + H^2 and the square defect w̄(F) = min{w(F), 2}.
//!
//! Exact oddness of G would need square roots of units, which live in wild
//! extensions. Instead an even term of G is eliminated only while its line
//! λ -> v(g_i) + iλ stays below 2 and touches or dips below the capped odd
//! envelope
//! E(λ) = min{2, min over odd i of v(g_i) + iλ} somewhere on the window [0, α].
//! Removing a term whose line is ℓ only changes G by terms with value at
//! least 1 + ℓ/2 > ℓ, so the remaining even terms can never alter E, the
//! odd part of [G/2^γ], or [dG/dx/2^γ]. Where E = 2 the even terms are
//! pushed to value ≥ 2, which leaves the Artin-Schreier class of [G/4] intact.
//!
//! When an even constant term has to be removed while H has a unit constant
//! term, F is rescaled by a unit constant c ≡ 1 instead; z^2 = cF defines the
//! same curve and the rescaled polynomial is returned with the decomposition.

use num_traits::Zero;

use crate::coeffring::ValuedCoeff;
use crate::error::{Error, Result, Q};
use crate::gf2poly::{artin_schreier_rational, solve_quadratic_laurent, GfLaurent};
use crate::laurent::{AnnulusDomain, LaurentPoly};

const MAX_STEPS: usize = 4096;

fn two() -> Q {
    Q::from_integer(2)
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// The polynomial actually decomposed (F times a unit constant ≡ 1).
    pub f: LaurentPoly,
    pub h: LaurentPoly,
    pub g: LaurentPoly,
    /// v(G), or `None` when G vanishes at the working precision.
    pub gamma: Option<Q>,
    pub wbar: Q,
    /// w(F) > 2, i.e. the double cover of the reduction splits.
    pub w_exceeds_2: bool,
    pub domain: AnnulusDomain,
    /// Even terms (degree, valuation) removed from G without updating H.
    /// Each is c·x^{2m} = (h_m + β)^2 - h_m^2 for a wildly ramified β whose
    /// cross terms with H lie strictly above the capped odd envelope, so
    /// F = G + H^2 holds only up to these terms.
    pub absorbed: Vec<(i64, Q)>,
}

impl Decomposition {
    /// [G/2^γ]: the odd part when γ < 2, all of G when γ = 2.
    pub fn g_reduced(&self) -> Result<GfLaurent> {
        if self.wbar < two() {
            self.g.split_parity().1.reduce(self.wbar)
        } else {
            self.g.reduce(self.wbar)
        }
    }

    /// [dG/dx / 2^γ] when γ < 2.
    pub fn dg_reduced(&self) -> Result<Option<GfLaurent>> {
        if self.wbar >= two() {
            return Ok(None);
        }
        Ok(Some(self.g.derivative().reduce(self.wbar)?))
    }

    /// Residue of H (defined because H is integral on the window at λ = 0).
    pub fn h_reduced(&self) -> Result<GfLaurent> {
        self.h.reduce(Q::zero())
    }

    /// The capped odd envelope E(λ).
    pub fn envelope_at(&self, lambda: Q) -> Result<Q> {
        let lines = odd_lines(&self.g)?;
        Ok(envelope(&lines, lambda))
    }

    /// (degree, valuation) of the odd terms of G.
    pub fn odd_lines(&self) -> Result<Vec<(i64, Q)>> {
        odd_lines(&self.g)
    }

    /// Reduction of the curve over the component with coordinate u = x/2^λ.
    pub fn reduction_at(&self, lambda: Q) -> Result<Reduction> {
        let e = self.envelope_at(lambda)?;
        let g = self.g.subst_scale(lambda)?;
        if e < two() {
            let p = g.split_parity().1.reduce(e)?;
            let dp = p.derivative();
            return Ok(Reduction::Inseparable { wbar: e, p, dp });
        }
        let h = self.h.subst_scale(lambda)?.reduce(Q::zero())?;
        if g.is_empty() || g.v_gt(two())? {
            return Ok(Reduction::Separable { genus: 0, split: true });
        }
        let r = g.reduce(two())?;
        if solve_quadratic_laurent(&h, &r).is_some() {
            return Ok(Reduction::Separable { genus: 0, split: true });
        }
        let (genus, split) = artin_schreier_rational(&h, &r)?;
        Ok(Reduction::Separable { genus, split })
    }
}

/// The reduction of z^2 = F over one component of the special fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    /// w̄ < 2: t^2 = P(u) with P = odd part of [G/2^w̄]; the preimage is a
    /// purely inseparable line and the smooth points with positive local
    /// genus are the roots of dP.
    Inseparable { wbar: Q, p: GfLaurent, dp: GfLaurent },
    /// w̄ = 2: t^2 + [H]t = [G/4], of the given geometric genus; a split
    /// cover consists of two lines.
    Separable { genus: i64, split: bool },
}

impl Reduction {
    pub fn wbar(&self) -> Q {
        match self {
            Reduction::Inseparable { wbar, .. } => *wbar,
            Reduction::Separable { .. } => two(),
        }
    }

    /// Contribution to the local genus at the generic point: the genus of the
    /// preimage, or -1 if it splits.
    pub fn generic_local_genus(&self) -> i64 {
        match self {
            Reduction::Inseparable { .. } => 0,
            Reduction::Separable { split: true, .. } => -1,
            Reduction::Separable { genus, .. } => *genus,
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self, Reduction::Separable { split: true, .. })
    }
}

/// Value of the line λ -> v + iλ at its lowest point on [0, α].
fn window_min(v: Q, i: i64, alpha: Q) -> Q {
    if i >= 0 {
        v
    } else {
        v + alpha * Q::from_integer(i)
    }
}

fn odd_lines(g: &LaurentPoly) -> Result<Vec<(i64, Q)>> {
    g.terms()
        .filter(|(i, _)| i.rem_euclid(2) == 1)
        .map(|(i, c)| Ok((i, c.val_exact()?)))
        .collect()
}

fn envelope(lines: &[(i64, Q)], lambda: Q) -> Q {
    lines
        .iter()
        .map(|&(i, v)| v + Q::from_integer(i) * lambda)
        .fold(two(), |a, b| a.min(b))
}

/// Points of [0, α] where E can bend, plus the endpoints.
fn candidate_points(lines: &[(i64, Q)], alpha: Q) -> Vec<Q> {
    let mut pts = vec![Q::zero(), alpha];
    if alpha.is_zero() {
        pts.pop();
        return pts;
    }
    let mut all: Vec<(i64, Q)> = lines.to_vec();
    all.push((0, two()));
    for (a, &(i, v)) in all.iter().enumerate() {
        for &(j, w) in &all[a + 1..] {
            if i != j {
                let l = (w - v) / Q::from_integer(i - j);
                if l > Q::zero() && l < alpha {
                    pts.push(l);
                }
            }
        }
    }
    pts
}

/// Points of (0, α) where the line (i, s) meets an odd line or the cap 2.
fn crossings(lines: &[(i64, Q)], (i, s): (i64, Q), alpha: Q) -> Vec<Q> {
    lines
        .iter()
        .copied()
        .chain([(0, two())])
        .filter(|&(j, _)| j != i)
        .map(|(j, w)| (w - s) / Q::from_integer(i - j))
        .filter(|&l| l > Q::zero() && l < alpha)
        .collect()
}

/// Whether c·x^i (v(c) = s) can be absorbed into H by a wild correction:
/// every cross term 2βh_j x^{j+i/2}, including those with earlier absorbed
/// corrections, must lie strictly above E on the window.
fn absorbable(
    h: &LaurentPoly,
    absorbed: &[(i64, Q)],
    (i, s): (i64, Q),
    _lines: &[(i64, Q)],
    pts: &[Q],
    env: &[Q],
) -> bool {
    let m = i / 2;
    let mut others: Vec<(i64, Q)> = Vec::new();
    for (j, c) in h.terms() {
        if j == m {
            continue;
        }
        match c.val_exact() {
            Ok(v) => others.push((j, v)),
            Err(_) => return false,
        }
    }
    others.extend(absorbed.iter().map(|&(k, t)| (k / 2, t / two())));
    pts.iter().zip(env).all(|(&l, &e)| {
        let beta = (s + Q::from_integer(i) * l) / two();
        others
            .iter()
            .all(|&(j, v)| Q::from_integer(1) + beta + v + Q::from_integer(j) * l > e)
    })
}

/// Effectively odd decomposition of F on the window [0, α].
pub fn odd_decompose(f: &LaurentPoly, domain: AnnulusDomain) -> Result<Decomposition> {
    let v = f.v()?;
    if !v.is_zero() {
        return Err(Error::InvalidParams(format!(
            "odd_decompose needs v(F) = 0, got {v}"
        )));
    }
    let alpha = domain.alpha;
    let mut f = f.clone();
    let mut h = LaurentPoly::zero(f.params()).with_prec(f.prec_units());
    let mut g = f.clone();
    let mut absorbed: Vec<(i64, Q)> = Vec::new();
    let mut done = false;
    for _ in 0..MAX_STEPS {
        let lines = odd_lines(&g)?;
        let pts = candidate_points(&lines, alpha);
        let env: Vec<Q> = pts.iter().map(|&l| envelope(&lines, l)).collect();
        // the offending even term with the lowest value on the window
        let mut pick: Option<(Q, i64, Q)> = None;
        for (i, c) in g.terms() {
            if i.rem_euclid(2) != 0 {
                continue;
            }
            let s = c.val_exact()?;
            let line = |l: Q| s + Q::from_integer(i) * l;
            let mut below = pts
                .iter()
                .zip(&env)
                .any(|(&l, &e)| line(l) < two() && line(l) <= e);
            if !below && !alpha.is_zero() {
                below = crossings(&lines, (i, s), alpha)
                    .into_iter()
                    .any(|l| line(l) < two() && line(l) <= envelope(&lines, l));
            }
            if !below {
                continue;
            }
            let e = window_min(s, i, alpha);
            if pick.is_none_or(|(pe, pi, _)| (e, i) < (pe, pi)) {
                pick = Some((e, i, s));
            }
        }
        let Some((_, i, s)) = pick else {
            done = true;
            break;
        };
        let h0 = h.coeff(0);
        if i == 0 && h0.val_exact().is_ok_and(|v| v.is_zero()) {
            // rescale F so that its constant term matches that of H^2
            let hsq0 = h.square().coeff(0);
            let c = hsq0.div(&f.coeff(0))?;
            f = f.scale(&c);
            g = f.sub(&h.square());
            continue;
        }
        let half = s / two();
        let ring = f.ring().with_value(half)?;
        if ring != f.ring() {
            let refined = f.params().check(&ring).and_then(|_| {
                Ok((f.refine(ring)?, h.refine(ring)?, g.refine(ring)?))
            });
            match refined {
                Ok((f2, h2, g2)) => (f, h, g) = (f2, h2, g2),
                Err(e) => {
                    if !absorbable(&h, &absorbed, (i, s), &lines, &pts, &env) {
                        return Err(e);
                    }
                    let c = g.coeff(i);
                    g.add_term(i, c.neg());
                    absorbed.push((i, s));
                    continue;
                }
            }
        }
        let a = g.coeff(i);
        let r = a.residue_scaled(s)?;
        let field = ring.field;
        let t = ValuedCoeff::teichmuller(f.params(), field.sqrt(r)).mul_pow2(half)?;
        h.add_term(i / 2, t);
        g = f.sub(&h.square());
    }
    if !done {
        return Err(Error::CapExceeded {
            what: "decomposition steps",
            requested: MAX_STEPS as i64 + 1,
            max: MAX_STEPS as i64,
        });
    }
    let gamma = if g.is_empty() {
        if f.ring().to_q(g.prec_units()) <= two() {
            return Err(Error::PrecisionExhausted(f.ring().to_q(g.prec_units())));
        }
        None
    } else {
        Some(g.v()?)
    };
    let wbar = gamma.map_or(two(), |gm| gm.min(two()));
    let w_exceeds_2 = match gamma {
        None => true,
        Some(gm) if gm > two() => true,
        Some(gm) if gm == two() => {
            // H + 2T improves the decomposition iff T^2 + [H]T = [G/4]
            let hr = h.reduce(Q::zero())?;
            solve_quadratic_laurent(&hr, &g.reduce(two())?).is_some()
        }
        Some(_) => false,
    };
    Ok(Decomposition {
        f,
        h,
        g,
        gamma,
        wbar,
        w_exceeds_2,
        domain,
        absorbed,
    })
}

/// w̄(F) at λ = 0.
pub fn wbar_of(f: &LaurentPoly, domain: AnnulusDomain) -> Result<Q> {
    Ok(odd_decompose(f, domain)?.wbar)
}

/// (w̄(F), [dG/dx/2^γ]) with the reduction present only when w̄ < 2.
pub fn square_defect_core(f: &LaurentPoly) -> Result<(Q, Option<GfLaurent>)> {
    let d = odd_decompose(f, AnnulusDomain::disc())?;
    let dg = d.dg_reduced()?;
    Ok((d.wbar, dg))
}

/// Certificate that F̃ may replace F.
///
/// Both are first scaled so that their constant terms agree when these are
/// units, since z^2 = cF and z^2 = F define the same curve.
/// Non-pointwise: v(F - F̃) > w̄(F) or v(F - F̃) ≥ 2.
/// Pointwise: v((F - F̃)(2^λ u)) > 2 at λ = 0 and λ = α.
pub fn approx_equiv(
    f: &LaurentPoly,
    ft: &LaurentPoly,
    domain: AnnulusDomain,
    pointwise: bool,
) -> Result<bool> {
    let ring = f.ring().join(&ft.ring())?;
    let f = f.refine(ring)?;
    let mut ft = ft.refine(ring)?;
    let (c0, ct0) = (f.coeff(0), ft.coeff(0));
    if c0.val_exact().is_ok_and(|v| v.is_zero())
        && ct0.val_exact().is_ok_and(|v| v.is_zero())
    {
        ft = ft.scale(&c0.div(&ct0)?);
    }
    let diff = f.sub(&ft);
    if pointwise {
        // degree by degree, so that a low absent-term precision only counts
        // where x^i can carry it
        let lo = f.ldeg().into_iter().chain(ft.ldeg()).min().unwrap_or(0).min(0);
        let hi = f.deg().into_iter().chain(ft.deg()).max().unwrap_or(0).max(0);
        let absent = f.ring().to_q(diff.prec_units());
        for lambda in [Q::zero(), domain.alpha] {
            for i in lo..=hi {
                let shift = lambda * Q::from_integer(i);
                let ok = match diff.terms().find(|(j, _)| *j == i) {
                    Some((_, c)) => c.val_gt(two() - shift)?,
                    None => absent + shift > two(),
                };
                if !ok {
                    return Ok(false);
                }
            }
        }
        return Ok(true);
    }
    if diff.v_gt(two())? || diff.is_empty() {
        return Ok(true);
    }
    let dv = diff.v()?;
    if dv >= two() {
        return Ok(true);
    }
    Ok(dv > wbar_of(&f, domain)?)
}
