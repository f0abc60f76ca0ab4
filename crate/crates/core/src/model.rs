//! The stable marked model of (P^1, branch points) as a cluster tree, with
//! the local equations of the curve on each component and at each node.
//!
//! Infinity is always made a branch point first (see
//! `BranchSet::with_infinity`). Then every disc that is the smallest disc
//! around two or more finite branch points carries at least three special
//! points, so the proper clusters are exactly the components.

use num_traits::Zero;

use crate::coeffring::{Ring, RingParams, ValuedCoeff};
use crate::decomp::{odd_decompose, Decomposition};
use crate::error::{Error, Result, Q};
use crate::gf2poly::GfElem;
use crate::laurent::{AnnulusDomain, LaurentPoly};
use crate::padroots::{distance, BranchSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Special {
    /// Index into `ModelTree::roots`.
    Marking(usize),
    /// A child component.
    Node(usize),
}

#[derive(Debug, Clone)]
pub struct Component {
    pub id: usize,
    /// Indices of the finite branch points in the disc.
    pub members: Vec<usize>,
    pub center: ValuedCoeff,
    /// The coordinate on the component is (x - center) / 2^radius.
    pub radius: Q,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Finite special points with their residue position.
    pub points: Vec<(GfElem, Special)>,
    /// Infinity on the root component is the marking at infinity; on other
    /// components it is the node to the parent.
    pub marked_infinity: bool,
}

impl Component {
    pub fn markings(&self) -> usize {
        self.points
            .iter()
            .filter(|(_, s)| matches!(s, Special::Marking(_)))
            .count()
            + usize::from(self.marked_infinity)
    }

    pub fn special_count(&self) -> usize {
        self.points.len() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct DoublePointInfo {
    /// The node joining `child` to its parent component.
    pub parent: usize,
    pub child: usize,
    pub alpha: Q,
    pub parity: Parity,
    pub grounded: bool,
    /// Local equation in the parent's scale centered at the child:
    /// F_1(x) F_2(2^α/x) with constant coefficient 1 (even), times x (odd).
    pub equation: LaurentPoly,
}

#[derive(Debug, Clone)]
pub struct ModelTree {
    pub params: RingParams,
    /// Finite branch points (infinity is always a branch point too).
    pub roots: Vec<ValuedCoeff>,
    pub components: Vec<Component>,
}

impl ModelTree {
    pub fn genus(&self) -> i64 {
        (self.roots.len() as i64 + 1 - 2) / 2
    }

    pub fn ring(&self) -> Ring {
        self.params.ring
    }

    pub fn root(&self) -> &Component {
        &self.components[0]
    }

    /// Number of finite branch points in the disc of a component.
    pub fn branch_count(&self, id: usize) -> usize {
        self.components[id].members.len()
    }

    /// The nodes, one per non-root component.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.components
            .iter()
            .filter_map(|c| c.parent.map(|p| (p, c.id)))
    }

    pub fn thickness(&self, child: usize) -> Q {
        let c = &self.components[child];
        c.radius - self.components[c.parent.expect("non-root")].radius
    }

    /// (r - c) / 2^ρ in the model ring.
    fn rel(&self, r: &ValuedCoeff, c: &ValuedCoeff, rho: Q) -> Result<ValuedCoeff> {
        r.sub(c).mul_pow2(-rho)
    }

    /// Equation of the curve on a component in its coordinate u: the product
    /// of (u - a) over branch points with a = (r - c)/2^ρ integral and of
    /// (1 - u/a) over the others. It has v = 0 and differs from F by a
    /// constant, which is a square over the algebraically closed field.
    pub fn component_equation(&self, id: usize) -> Result<LaurentPoly> {
        let comp = &self.components[id];
        let p = &self.params;
        let mut f = LaurentPoly::from_terms(p, [(0, ValuedCoeff::one(p))]);
        for r in &self.roots {
            let a = self.rel(r, &comp.center, comp.radius)?;
            let lin = if a.is_negligible() || a.val_lower() >= Q::zero() {
                LaurentPoly::from_terms(p, [(1, ValuedCoeff::one(p)), (0, a.neg())])
            } else {
                LaurentPoly::from_terms(p, [(0, ValuedCoeff::one(p)), (1, a.inv()?.neg())])
            };
            f = f.mul(&lin);
        }
        Ok(f)
    }

    /// Local equation at the node above `child`.
    pub fn node_equation(&self, child: usize) -> Result<LaurentPoly> {
        let c = &self.components[child];
        let parent = &self.components[c.parent.expect("non-root")];
        let p = &self.params;
        let mut f = LaurentPoly::from_terms(p, [(0, ValuedCoeff::one(p))]);
        let mut inside = 0;
        for (k, r) in self.roots.iter().enumerate() {
            let a = self.rel(r, &c.center, parent.radius)?;
            let lin = if c.members.contains(&k) {
                inside += 1;
                LaurentPoly::from_terms(p, [(0, ValuedCoeff::one(p)), (-1, a.neg())])
            } else {
                LaurentPoly::from_terms(p, [(0, ValuedCoeff::one(p)), (1, a.inv()?.neg())])
            };
            f = f.mul(&lin);
        }
        // the cross terms of F_1 F_2 move the constant off 1 by a unit ≡ 1
        let f = f.scale(&f.coeff(0).inv_unit()?);
        Ok(if inside % 2 == 1 { f.shift(1) } else { f })
    }
}

/// Cluster tree of the branch points.
pub fn build_marked_model(branch: &BranchSet) -> Result<ModelTree> {
    let branch = branch.with_infinity()?;
    let roots = branch.finite();
    let n = roots.len();
    if n + 1 < 4 {
        return Err(Error::InvalidParams("need at least 4 branch points".into()));
    }
    let mut dist = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = distance(&roots[i], &roots[j])?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut tree = ModelTree {
        params: branch.params,
        roots,
        components: Vec::new(),
    };
    let all: Vec<usize> = (0..n).collect();
    add_cluster(&mut tree, &dist, all, None)?;
    Ok(tree)
}

fn add_cluster(
    tree: &mut ModelTree,
    dist: &[Vec<Q>],
    members: Vec<usize>,
    parent: Option<usize>,
) -> Result<usize> {
    let rho = members
        .iter()
        .flat_map(|&i| members.iter().filter(move |&&j| j != i).map(move |&j| dist[i][j]))
        .min()
        .expect("cluster with two members");
    let center_idx = *members
        .iter()
        .min_by(|&&a, &&b| tree.roots[a].digit_cmp(&tree.roots[b]).then(a.cmp(&b)))
        .unwrap();
    let center = tree.roots[center_idx].clone();
    let id = tree.components.len();
    tree.components.push(Component {
        id,
        members: members.clone(),
        center: center.clone(),
        radius: rho,
        parent,
        children: Vec::new(),
        points: Vec::new(),
        marked_infinity: parent.is_none(),
    });
    // residue classes: d(i, j) > ρ
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &i in &members {
        match classes.iter_mut().find(|c| dist[c[0]][i] > rho) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    for class in classes {
        let pos = tree
            .rel(&tree.roots[class[0]], &center, rho)?
            .residue()?;
        if class.len() == 1 {
            tree.components[id].points.push((pos, Special::Marking(class[0])));
        } else {
            let child = add_cluster(tree, dist, class, Some(id))?;
            tree.components[id].children.push(child);
            tree.components[id].points.push((pos, Special::Node(child)));
        }
    }
    Ok(id)
}

/// w̄ of a component with the decomposition of its equation.
pub fn component_square_defect(tree: &ModelTree, id: usize) -> Result<Decomposition> {
    let f = tree.component_equation(id)?;
    odd_decompose(&f, AnnulusDomain::disc())
}

/// Parity, groundedness and local equation of every node, given the
/// square defects of all components.
pub fn classify_double_points(tree: &ModelTree, wbar: &[Q]) -> Result<Vec<DoublePointInfo>> {
    let mut out = Vec::new();
    for (parent, child) in tree.edges().collect::<Vec<_>>() {
        let parity = if tree.branch_count(child).is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        };
        let grounded =
            parity == Parity::Even && wbar[parent].is_zero() && wbar[child].is_zero();
        out.push(DoublePointInfo {
            parent,
            child,
            alpha: tree.thickness(child),
            parity,
            grounded,
            equation: tree.node_equation(child)?,
        });
    }
    Ok(out)
}
