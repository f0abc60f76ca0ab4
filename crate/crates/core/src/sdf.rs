//! The square defect function λ -> w̄(F(2^λ u)) at an even node, its local
//! genus and the number of nodes of the cover over each piece.

use std::fmt;

use num_traits::Zero;

use crate::decomp::{odd_decompose, Decomposition};
use crate::error::{Error, Result, Q};
use crate::laurent::AnnulusDomain;
use crate::model::{DoublePointInfo, Parity};

fn two() -> Q {
    Q::from_integer(2)
}

/// Concave piecewise-linear function on [0, α] with integer slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLConcaveFn {
    pub alpha: Q,
    /// 0 = λ_0 < λ_1 < ... < λ_k = α.
    pub breaks: Vec<Q>,
    pub values: Vec<Q>,
    /// slopes[j] is the slope on [λ_j, λ_{j+1}].
    pub slopes: Vec<i64>,
}

impl fmt::Display for PLConcaveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, (l, v)) in self.breaks.iter().zip(&self.values).enumerate() {
            if j > 0 {
                write!(f, " -[{}]- ", self.slopes[j - 1])?;
            }
            write!(f, "({l}, {v})")?;
        }
        Ok(())
    }
}

impl PLConcaveFn {
    /// min{2, min_i (v_i + iλ)} on [0, α].
    pub fn from_lines(lines: &[(i64, Q)], alpha: Q) -> PLConcaveFn {
        let mut all: Vec<(i64, Q)> = lines.to_vec();
        all.push((0, two()));
        let at = |(i, v): (i64, Q), l: Q| v + Q::from_integer(i) * l;
        let mut active = *all
            .iter()
            .min_by(|a, b| at(**a, Q::zero()).cmp(&at(**b, Q::zero())).then(a.0.cmp(&b.0)))
            .unwrap();
        let mut lam = Q::zero();
        let mut out = PLConcaveFn {
            alpha,
            breaks: vec![lam],
            values: vec![at(active, lam)],
            slopes: Vec::new(),
        };
        if alpha.is_zero() {
            return out;
        }
        loop {
            let mut next: Option<(Q, (i64, Q))> = None;
            for &l in &all {
                if l.0 >= active.0 {
                    continue;
                }
                let c = (l.1 - active.1) / Q::from_integer(active.0 - l.0);
                if c <= lam {
                    continue;
                }
                let better = match next {
                    None => true,
                    Some((bc, bl)) => c < bc || (c == bc && l.0 < bl.0),
                };
                if better {
                    next = Some((c, l));
                }
            }
            out.slopes.push(active.0);
            match next {
                Some((c, l)) if c < alpha => {
                    lam = c;
                    active = l;
                    out.breaks.push(lam);
                    out.values.push(at(active, lam));
                }
                _ => {
                    out.breaks.push(alpha);
                    out.values.push(at(active, alpha));
                    return out;
                }
            }
        }
    }

    pub fn eval(&self, lambda: Q) -> Q {
        let j = match self.breaks.iter().rposition(|&b| b <= lambda) {
            Some(j) => j.min(self.slopes.len().saturating_sub(1)),
            None => 0,
        };
        self.values[j] + Q::from_integer(self.slopes.get(j).copied().unwrap_or(0)) * (lambda - self.breaks[j])
    }

    pub fn first_slope(&self) -> i64 {
        self.slopes[0]
    }

    pub fn last_slope(&self) -> i64 {
        *self.slopes.last().unwrap()
    }

    /// Break points strictly inside (0, α) with their values.
    pub fn interior(&self) -> Vec<(Q, Q)> {
        let k = self.breaks.len();
        (1..k.saturating_sub(1))
            .map(|j| (self.breaks[j], self.values[j]))
            .collect()
    }

    /// λ -> f(α - λ), the same function seen from the other side.
    pub fn reversed(&self) -> PLConcaveFn {
        PLConcaveFn {
            alpha: self.alpha,
            breaks: self.breaks.iter().rev().map(|&b| self.alpha - b).collect(),
            values: self.values.iter().rev().copied().collect(),
            slopes: self.slopes.iter().rev().map(|&s| -s).collect(),
        }
    }

    /// Violated structural properties (empty when all hold).
    pub fn check(&self, left: Q, right: Q) -> Vec<String> {
        let mut bad = Vec::new();
        if self.slopes.windows(2).any(|w| w[0] <= w[1]) {
            bad.push(format!("not strictly concave: {self}"));
        }
        if self.values.iter().any(|&v| v < Q::zero() || v > two()) {
            bad.push(format!("value outside [0, 2]: {self}"));
        }
        for (j, &s) in self.slopes.iter().enumerate() {
            if s == 0 && self.values[j] != two() {
                bad.push(format!("horizontal segment below 2: {self}"));
            }
            let l = self.breaks[j + 1] - self.breaks[j];
            if self.values[j] + Q::from_integer(s) * l != self.values[j + 1] {
                bad.push(format!("segment {j} inconsistent: {self}"));
            }
        }
        if self.values[0] != left {
            bad.push(format!("left end {} differs from w̄ = {left}", self.values[0]));
        }
        if *self.values.last().unwrap() != right {
            bad.push(format!(
                "right end {} differs from w̄ = {right}",
                self.values.last().unwrap()
            ));
        }
        bad
    }
}

/// Square defect function at an even node, seen from the parent component.
pub fn sdf_compute(dp: &DoublePointInfo) -> Result<(PLConcaveFn, Decomposition)> {
    if dp.parity != Parity::Even {
        return Err(Error::InvalidParams("square defect function of an odd node".into()));
    }
    let d = odd_decompose(&dp.equation, AnnulusDomain::new(dp.alpha))?;
    let f = PLConcaveFn::from_lines(&d.odd_lines()?, dp.alpha);
    Ok((f, d))
}

fn delta0(s: i64) -> i64 {
    i64::from(s == 0)
}

/// (s_1 - s_2 + δ_{0 s_1} + δ_{0 s_2}) / 2 for the largest and smallest slope.
pub fn local_genus_even_dp(f: &PLConcaveFn) -> i64 {
    let (s1, s2) = (f.first_slope(), f.last_slope());
    let twice = s1 - s2 + delta0(s1) + delta0(s2);
    debug_assert!(twice % 2 == 0, "odd numerator in local genus: {f}");
    twice / 2
}

/// Nodes of the cover over the node of the chain spanning segment j: two
/// exactly when the function is constant (= 2) there.
pub fn upstairs_nodes_over_dp(f: &PLConcaveFn, segment: usize) -> u8 {
    if f.slopes[segment] == 0 {
        2
    } else {
        1
    }
}

/// Thickness of the cover's node over an odd node of thickness α.
pub fn odd_node_thickness(alpha: Q) -> Q {
    alpha / two()
}
