//! Shared helpers for the integration tests.
#![allow(dead_code)]

use hyperred_core::coeffring::RingParams;
use hyperred_core::laurent::LaurentPoly;
use rand::Rng;

/// A random separable product of small factors of total degree 2g+1 or 2g+2,
/// returned as integer coefficient lists (constant term first). Every factor
/// has tamely ramified roots: linear factors, x^2 + bx + c with b odd,
/// x^2 - 2s^2 and cubics x^3 - c.
pub fn random_factored_curve(rng: &mut impl Rng, genus: usize) -> Vec<Vec<i64>> {
    let n = 2 * genus + 1 + rng.gen_range(0..=1);
    loop {
        let mut factors: Vec<Vec<i64>> = Vec::new();
        let mut deg = 0;
        while deg < n {
            let left = n - deg;
            let f = match rng.gen_range(0..12) {
                6 => vec![-(rng.gen_range(-9i64..=9) | 1), 2],
                7 | 8 if left >= 2 => vec![rng.gen_range(-6i64..=6), rng.gen_range(-3i64..=3) * 2 + 1, 1],
                9 if left >= 2 => {
                    let s = rng.gen_range(0i64..=2) * 2 + 1;
                    vec![-2 * s * s, 0, 1]
                }
                10 if left >= 3 => vec![-rng.gen_range(-12i64..=12), 0, 0, 1],
                _ => vec![-rng.gen_range(-9i64..=9), 1],
            };
            deg += f.len() - 1;
            factors.push(f);
        }
        if deg == n && separable(&factors) {
            return factors;
        }
    }
}

fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut c = vec![0i64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

pub fn product(factors: &[Vec<i64>]) -> Vec<i64> {
    factors.iter().fold(vec![1], |acc, f| mul(&acc, f))
}

/// Squarefree over Q: gcd(F, F') = 1.
pub fn separable(factors: &[Vec<i64>]) -> bool {
    let p = product(factors);
    let dp: Vec<i64> = p.iter().enumerate().skip(1).map(|(i, &c)| i as i64 * c).collect();
    poly_gcd_degree(&p, &dp) == 0
}

/// Degree of gcd(a, b) in Q[x], computed with exact rationals.
fn poly_gcd_degree(a: &[i64], b: &[i64]) -> usize {
    use num_rational::BigRational;
    use num_traits::Zero;
    let conv = |v: &[i64]| -> Vec<BigRational> {
        let mut w: Vec<BigRational> = v.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        while w.last().is_some_and(|c| c.is_zero()) {
            w.pop();
        }
        w
    };
    let (mut x, mut y) = (conv(a), conv(b));
    while !y.is_empty() {
        while x.len() >= y.len() {
            let k = x.len() - y.len();
            let c = x.last().unwrap().clone() / y.last().unwrap().clone();
            for (i, t) in y.iter().enumerate() {
                x[i + k] = x[i + k].clone() - c.clone() * t.clone();
            }
            while x.last().is_some_and(|c| c.is_zero()) {
                x.pop();
            }
            if x.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut x, &mut y);
    }
    x.len().saturating_sub(1)
}

pub fn poly(p: &RingParams, coeffs: &[i64]) -> LaurentPoly {
    let terms: Vec<(i64, i64)> = coeffs.iter().enumerate().map(|(i, &c)| (i as i64, c)).collect();
    LaurentPoly::from_ints(p, &terms)
}

pub fn polys(p: &RingParams, factors: &[Vec<i64>]) -> Vec<LaurentPoly> {
    factors.iter().map(|f| poly(p, f)).collect()
}

fn v2(n: i64) -> u32 {
    if n == 0 {
        64
    } else {
        n.trailing_zeros()
    }
}

/// max over H in Z[x], deg H <= 4, coefficients 0..3, of min{2, v(F - H^2)}
/// for an integer polynomial F of degree at most 8.
pub fn integer_search(f: &[i64]) -> u32 {
    let mut best = 0;
    for code in 0..1024u32 {
        let h: Vec<i64> = (0..5).map(|k| ((code >> (2 * k)) & 3) as i64).collect();
        let mut d = f.to_vec();
        d.resize(9, 0);
        for i in 0..5 {
            for j in 0..5 {
                d[i + j] -= h[i] * h[j];
            }
        }
        let v = d.iter().map(|&c| v2(c)).min().unwrap().min(2);
        best = best.max(v);
        if best == 2 {
            break;
        }
    }
    best
}

/// Random integer F of degree 1..=8 with v(F) = 0.
pub fn random_unit_poly(rng: &mut impl Rng) -> Vec<i64> {
    loop {
        let deg = rng.gen_range(1..=8);
        let f: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-20..=20)).collect();
        if f.iter().any(|c| c % 2 != 0) && f[deg] != 0 {
            return f;
        }
    }
}

/// Genus and splitness of t^2 + t = P(u) from character sums.
///
/// P has coefficients in F_q, q = 2^k, and pole orders at 0 and infinity
/// summing to at most `r_max`. With S_r = sum over u in F_{q^r}^* of
/// (-1)^Tr(P(u)), L(T) = exp(sum S_r T^r / r) is a polynomial of degree
/// m_0 + m_inf (reduced odd pole orders), so g = floor(deg L / 2). A constant
/// character (|S_r| = q^r - 1 for all r) means the cover splits.
pub fn as_genus_by_counting(
    p: &hyperred_core::gf2poly::GfLaurent,
    r_max: u32,
) -> (i64, bool) {
    use hyperred_core::gf2poly::GfField;
    use hyperred_core::Q;
    let k = p.field.degree();
    let q = 1i64 << k;
    let mut s = Vec::new();
    for r in 1..=r_max {
        let big = GfField::new(k * r).unwrap();
        let pe = p.embed(&big);
        let mut sum = 0i64;
        for u in big.elements().filter(|&u| u != 0) {
            let val = pe.eval(u).unwrap();
            sum += if big.trace(val) == 0 { 1 } else { -1 };
        }
        s.push(sum);
    }
    if s.iter().enumerate().all(|(i, &x)| x.abs() == q.pow(i as u32 + 1) - 1) {
        return (0, true);
    }
    // n a_n = sum_{j=1}^n S_j a_{n-j}
    let mut a = vec![Q::from_integer(1)];
    for n in 1..=r_max as usize {
        let mut acc = Q::from_integer(0);
        for j in 1..=n {
            acc += Q::from_integer(s[j - 1]) * a[n - j];
        }
        a.push(acc / Q::from_integer(n as i64));
    }
    assert!(a.iter().all(|c| c.is_integer()), "non-integral L coefficients {a:?}");
    let d = a.iter().rposition(|c| *c != Q::from_integer(0)).unwrap();
    let g = (d / 2) as i64;
    assert_eq!(a[d].to_integer().abs(), q.pow(g as u32), "leading coefficient {a:?}");
    (g, false)
}
