//! The reduction over a smooth unmarked point of a component with w̄ < 2:
//! local genus from the root multiplicity of [dG/dx/2^γ], and the tree of
//! components blown up over the point.
//!
//! The tree follows the odd envelope of G(2^λ y) upward from λ = 0 with y
//! centered at the point. If the envelope reaches 2 without bending, a single
//! leaf carries t^2 + t = [G(2^ε y)/4]. Otherwise a purely inseparable
//! component sits at the first bend λ_1 with equation t^2 = P(u) u^s, and the
//! walk recurses at the nonzero roots of d(P u^s)/du and at u = 0.
//!
//! A bend with a single genus-carrying direction is not a component: the
//! Teichmüller center missed the disc of the leaf, and is moved one digit
//! toward it. When the leaf disc has no point in any ring we can reach, the
//! leaf is placed by the single-leaf equality and flagged.

use num_traits::Zero;

use crate::coeffring::{Ring, ValuedCoeff};
use crate::decomp::{odd_decompose, Reduction};
use crate::error::{Error, Result, Q};
use crate::gf2poly::{roots_with_multiplicity, GfElem, GfField, GfLaurent, GfPoly};
use crate::laurent::{AnnulusDomain, LaurentPoly};
use crate::sdf::PLConcaveFn;

const MAX_DEPTH: usize = 32;

fn two() -> Q {
    Q::from_integer(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    /// Inner component with purely inseparable genus-0 preimage.
    C,
    /// Leaf whose preimage has positive genus.
    D,
}

#[derive(Debug, Clone)]
pub struct FiberNode {
    pub kind: FiberKind,
    /// Parent node, or `None` for the node meeting the base component.
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Residue position on the parent where the node is attached.
    pub position: GfElem,
    pub position_field: GfField,
    /// Scale ε of the coordinate relative to the parent: the thickness of
    /// the node of the marked line joining them.
    pub scale: Q,
    pub wbar: Q,
    pub genus: i64,
    /// False when no center of a leaf disc was found in the coefficient
    /// ring and the leaf was placed by the single-leaf equality.
    pub center_found: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FiberTree {
    pub nodes: Vec<FiberNode>,
}

impl FiberTree {
    pub fn total_genus(&self) -> i64 {
        self.nodes.iter().map(|n| n.genus).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A single leaf over the point: its thickness is then exact.
    pub fn is_single_leaf(&self) -> bool {
        self.nodes.len() == 1 && self.nodes[0].kind == FiberKind::D
    }

    /// Structural checks: leaves are of type (d) with positive genus, inner
    /// nodes are of type (c), exactly one root.
    pub fn check(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if !self.nodes.is_empty() && self.nodes.iter().filter(|n| n.parent.is_none()).count() != 1 {
            bad.push("fiber tree does not have exactly one root".to_string());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let leaf = n.children.is_empty();
            if leaf != (n.kind == FiberKind::D) {
                bad.push(format!("fiber node {i}: leaf/type mismatch"));
            }
            if n.kind == FiberKind::D && n.genus <= 0 {
                bad.push(format!("fiber leaf {i} has genus {}", n.genus));
            }
            if n.kind == FiberKind::C && (n.genus != 0 || n.wbar >= two()) {
                bad.push(format!("fiber node {i} of type (c) is not inseparable"));
            }
        }
        bad
    }
}

/// Half the multiplicity of `point` as a root of [dG/dx/2^γ].
pub fn local_genus_smooth(dg: &GfLaurent, point: GfElem, field: &GfField) -> Result<i64> {
    let big = crate::gf2poly::compositum(&dg.field, field)?;
    let dg = dg.embed(&big);
    let point = field.embed(point, &big);
    let l = match dg.ldeg() {
        Some(l) => l,
        None => return Ok(0),
    };
    if point == 0 {
        return Ok(l.max(0) / 2);
    }
    let mut p = dg.shift(-l).to_poly().expect("ldeg removed");
    let lin = GfPoly::new(big, vec![point, 1]);
    let mut m = 0;
    loop {
        let (q, r) = p.divrem(&lin);
        if !r.is_zero() || p.is_zero() {
            break;
        }
        m += 1;
        p = q;
    }
    Ok(m / 2)
}

/// Nonzero roots of [dG/dx/2^γ] away from the special points, with their
/// multiplicities, in the field containing them.
pub fn smooth_points(
    dg: &GfLaurent,
    special: &[(GfElem, GfField)],
) -> Result<Vec<(GfElem, GfField, u32)>> {
    let l = match dg.ldeg() {
        Some(l) => l,
        None => return Ok(Vec::new()),
    };
    let p = dg.shift(-l).to_poly().expect("ldeg removed");
    if p.degree() <= 0 {
        return Ok(Vec::new());
    }
    let rs = roots_with_multiplicity(&p)?;
    let mut out = Vec::new();
    for &(r, m, _) in &rs.roots {
        if r == 0 {
            continue;
        }
        let is_special = special.iter().any(|&(s, f)| {
            crate::gf2poly::compositum(&f, &rs.field)
                .map(|big| f.embed(s, &big) == rs.field.embed(r, &big))
                .unwrap_or(false)
        });
        if !is_special {
            out.push((r, rs.field, m));
        }
    }
    Ok(out)
}

/// Thickness of the node between a component X and a positive-genus leaf
/// T over a smooth point: ε ≤ (2 - w̄(X)) / (2g(T) + 1), with equality
/// exactly when T is the only component over the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafThickness {
    Exact(Q),
    UpperBound(Q),
}

pub fn leaf_thickness(parent_sq_defect: Q, g_t: i64, unique: bool) -> LeafThickness {
    let b = (two() - parent_sq_defect) / Q::from_integer(2 * g_t + 1);
    if unique {
        LeafThickness::Exact(b)
    } else {
        LeafThickness::UpperBound(b)
    }
}

/// Fiber over the point with residue `beta` of a component whose equation
/// is the polynomial `f` (v(f) = 0, w̄ < 2), given the local genus there.
pub fn fiber_at(f: &LaurentPoly, beta: GfElem, field: &GfField, genus: i64) -> Result<FiberTree> {
    let mut tree = FiberTree::default();
    let w0 = odd_decompose(f, AnnulusDomain::disc())?.wbar;
    grow(f, beta, field, genus, w0, None, &mut tree, 0)?;
    Ok(tree)
}

/// Fiber over y = 0 of a polynomial already centered at the point.
pub fn fiber_tree(f: &LaurentPoly) -> Result<FiberTree> {
    let d = odd_decompose(f, AnnulusDomain::new(two()))?;
    let env = PLConcaveFn::from_lines(&d.odd_lines()?, two());
    let mut tree = FiberTree::default();
    if env.values[0] >= two() {
        return Ok(tree);
    }
    let n = (env.first_slope() - 1) / 2;
    grow(f, 0, &GfField::f2(), n, env.values[0], None, &mut tree, 0)?;
    Ok(tree)
}

/// Re-centering attempts before a lone genus-carrying direction is taken
/// to end in a single leaf.
const MAX_RECENTER: usize = 8;

#[allow(clippy::too_many_arguments)]
fn grow(
    f: &LaurentPoly,
    beta: GfElem,
    field: &GfField,
    n: i64,
    w0: Q,
    parent: Option<usize>,
    tree: &mut FiberTree,
    depth: usize,
) -> Result<()> {
    if n <= 0 {
        return Ok(());
    }
    if depth > MAX_DEPTH {
        return Err(Error::InvariantFailure("fiber recursion too deep".into()));
    }
    let leaf = |scale: Q, exact_center: bool| FiberNode {
        kind: FiberKind::D,
        parent,
        children: Vec::new(),
        position: beta,
        position_field: *field,
        scale,
        wbar: two(),
        genus: n,
        center_found: exact_center,
    };
    let lone_leaf = (two() - w0) / Q::from_integer(2 * n + 1);
    if n == 1 {
        // a (c) node needs two genus-carrying directions, so genus 1 is one leaf
        push(tree, leaf(lone_leaf, true));
        return Ok(());
    }
    let big = crate::gf2poly::compositum(&f.ring().field, field)?;
    let mut f = f.refine(Ring {
        n: f.ring().n,
        field: big,
    })?;
    let mut center = ValuedCoeff::teichmuller_in(f.ring(), field.embed(beta, &big), f.prec_units());
    for _ in 0..MAX_RECENTER {
        let step = (|| -> Result<Option<(ValuedCoeff, LaurentPoly)>> {
            let g = f.subst_translate(&center)?;
            let d = odd_decompose(&g, AnnulusDomain::new(two()))?;
            let env = PLConcaveFn::from_lines(&d.odd_lines()?, two());
            if env.values[0] != w0 || env.first_slope() != 2 * n + 1 {
                return Err(Error::InvariantFailure(format!(
                    "fiber of genus {n} over w̄ = {w0} walks {env}"
                )));
            }
            let (l1, v1) = (env.breaks[1], env.values[1]);
            let red = d.reduction_at(l1)?;
            if v1 >= two() {
                match red {
                    Reduction::Separable { genus, split: false } if genus == n => {}
                    r => {
                        return Err(Error::InvariantFailure(format!(
                            "leaf of genus {n} reduces to {r:?}"
                        )))
                    }
                }
                push(tree, leaf(l1, true));
                return Ok(None);
            }
            let dp = match red {
                Reduction::Inseparable { dp, .. } => dp,
                Reduction::Separable { .. } => unreachable!("envelope below 2"),
            };
            let tail = (env.slopes[1] - 1) / 2;
            let dirs = smooth_points(&dp, &[])?;
            let carrying = dirs.len() + usize::from(tail > 0);
            let ft = d.f.subst_scale(l1)?;
            if carrying >= 2 {
                let id = tree.nodes.len();
                push(
                    tree,
                    FiberNode {
                        kind: FiberKind::C,
                        parent,
                        children: Vec::new(),
                        position: beta,
                        position_field: *field,
                        scale: l1,
                        wbar: v1,
                        genus: 0,
                        center_found: true,
                    },
                );
                for &(b, bf, m) in &dirs {
                    grow(&ft, b, &bf, i64::from(m) / 2, v1, Some(id), tree, depth + 1)?;
                }
                grow(&ft, 0, &GfField::f2(), tail, v1, Some(id), tree, depth + 1)?;
                return Ok(None);
            }
            // the center left the genus-carrying disc at l1: move it along
            let Some(&(b, bf, _)) = dirs.first() else {
                return Err(Error::InvariantFailure(format!("lone tail at a bend of {env}")));
            };
            let ring = f.ring().with_value(l1)?.join(&Ring {
                n: 1,
                field: bf,
            })?;
            f.params().check(&ring)?;
            let f2 = f.refine(ring)?;
            let step = ValuedCoeff::teichmuller_in(ring, b, f2.prec_units()).mul_pow2(l1)?;
            Ok(Some((center.refine(&ring).add(&step), f2)))
        })();
        match step {
            Ok(None) => return Ok(()),
            Ok(Some((c, f2))) => {
                center = c;
                f = f2;
            }
            Err(Error::CapExceeded { .. }) | Err(Error::PrecisionExhausted(_)) => break,
            Err(e) => return Err(e),
        }
    }
    push(tree, leaf(lone_leaf, false));
    Ok(())
}

fn push(tree: &mut FiberTree, node: FiberNode) {
    let id = tree.nodes.len();
    if let Some(p) = node.parent {
        tree.nodes[p].children.push(id);
    }
    tree.nodes.push(node);
}

/// Scale of a fiber node's equation relative to the base point.
pub fn depth_scale(tree: &FiberTree, mut i: usize) -> Q {
    let mut acc = Q::zero();
    loop {
        acc += tree.nodes[i].scale;
        match tree.nodes[i].parent {
            Some(p) => i = p,
            None => return acc,
        }
    }
}
