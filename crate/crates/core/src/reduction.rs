//! Assembly of the three dual graphs: the stable marked model downstairs,
//! the intermediate model over it, and the special fiber of its
//! normalization upstairs. Every downstairs point gets its local genus, and
//! the global identities are checked on the result.

use std::fmt;

use num_traits::Zero;

use crate::coeffring::ValuedCoeff;
use crate::decomp::{approx_equiv, odd_decompose, Reduction};
use crate::error::{Error, Result, Q};
use crate::gf2poly::{GfElem, GfField};
use crate::laurent::{AnnulusDomain, LaurentPoly};
use crate::model::{
    build_marked_model, classify_double_points, DoublePointInfo, ModelTree, Parity, Special,
};
use crate::padroots::BranchSet;
use crate::sdf::{local_genus_even_dp, odd_node_thickness, sdf_compute, upstairs_nodes_over_dp, PLConcaveFn};
use crate::smoothfiber::{fiber_at, smooth_points, FiberKind, FiberTree};

fn two() -> Q {
    Q::from_integer(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CompType {
    A,
    B,
    C,
    D,
}

impl fmt::Display for CompType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CompType::A => "a",
            CompType::B => "b",
            CompType::C => "c",
            CompType::D => "d",
        };
        f.write_str(s)
    }
}

/// How a thickness was obtained, from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Annotation {
    PaperExact,
    Inferred,
    Heuristic,
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Annotation::PaperExact => "paper-exact",
            Annotation::Inferred => "inferred",
            Annotation::Heuristic => "heuristic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThicknessPolicy {
    PaperExactOnly,
    #[default]
    WithInferred,
    WithHeuristic,
}

impl ThicknessPolicy {
    pub fn admits(self, a: Annotation) -> bool {
        match self {
            ThicknessPolicy::PaperExactOnly => a == Annotation::PaperExact,
            ThicknessPolicy::WithInferred => a != Annotation::Heuristic,
            ThicknessPolicy::WithHeuristic => true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Replace every local equation by its truncation to valuation 2.
    pub truncate: bool,
    /// Run the expensive cross-checks as well.
    pub strict: bool,
}

/// A point of the downstairs special fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DownPoint {
    Generic(usize),
    /// A marking; `root` is `None` for infinity.
    Marking { component: usize, root: Option<usize> },
    Smooth { component: usize, residue: GfElem, field_degree: u32 },
    /// Index into `ReductionGraph::down_edges`.
    Node(usize),
}

#[derive(Debug, Clone)]
pub struct DownComponent {
    pub id: usize,
    pub parent: Option<usize>,
    pub markings: usize,
    pub wbar: Q,
    pub genus: i64,
    pub split: bool,
    /// The preimage is a purely inseparable line.
    pub inseparable: bool,
}

/// The cover over an even node as produced by the generic path, in the
/// form the grounded genus-1 pattern predicts it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpStructure {
    /// Thickness and upstairs node count of each node of the chain.
    pub chain: Vec<(Q, u8)>,
    /// w̄, genus and split flag of each type-(b) component.
    pub b: Vec<(Q, i64, bool)>,
    /// Type-(d) components meeting a type-(b) component directly:
    /// (index of the (b), thickness, genus).
    pub leaves: Vec<(usize, Q, i64)>,
}

#[derive(Debug, Clone)]
pub struct DownEdge {
    pub parent: usize,
    pub child: usize,
    pub alpha: Q,
    pub parity: Parity,
    pub grounded: bool,
    pub sdf: Option<PLConcaveFn>,
    pub structure: Option<DpStructure>,
    pub local_genus: i64,
}

#[derive(Debug, Clone)]
pub struct MidNode {
    pub id: usize,
    pub ty: CompType,
    pub over: DownPoint,
    pub wbar: Q,
    pub genus: i64,
    pub split: bool,
    pub markings: usize,
}

#[derive(Debug, Clone)]
pub struct MidEdge {
    pub a: usize,
    pub b: usize,
    pub thickness: Q,
    pub annotation: Annotation,
    pub parity: Parity,
    pub upstairs_nodes: u8,
    pub over: DownPoint,
}

#[derive(Debug, Clone)]
pub struct UpNode {
    pub id: usize,
    /// The intermediate component below, and which copy when it splits.
    pub mid: usize,
    pub copy: u8,
    pub genus: i64,
    /// Branch points on this component.
    pub markings: usize,
}

#[derive(Debug, Clone)]
pub struct UpEdge {
    pub a: usize,
    pub b: usize,
    pub thickness: Option<Q>,
    pub annotation: Annotation,
}

#[derive(Debug, Clone)]
pub struct LedgerEntry {
    pub point: DownPoint,
    pub local_genus: i64,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// A failed hard check makes the result unusable.
    pub hard: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Totals {
    pub genus: i64,
    pub local_genus_sum: i64,
    pub component_genus_sum: i64,
    pub betti: i64,
    pub toric_rank: i64,
}

#[derive(Debug, Clone, Default)]
pub struct ReductionGraph {
    pub genus: i64,
    pub down_components: Vec<DownComponent>,
    pub down_edges: Vec<DownEdge>,
    pub mid_nodes: Vec<MidNode>,
    pub mid_edges: Vec<MidEdge>,
    /// Special fiber of the normalization of the intermediate model.
    pub up_nodes: Vec<UpNode>,
    pub up_edges: Vec<UpEdge>,
    /// The stable model: `up_*` with unstable rational components contracted.
    pub stable_nodes: Vec<UpNode>,
    pub stable_edges: Vec<UpEdge>,
    pub ledger: Vec<LedgerEntry>,
    pub totals: Totals,
    pub checks: Vec<Check>,
}

impl ReductionGraph {
    pub fn hard_failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.hard && !c.passed).collect()
    }

    pub fn mid_of_type(&self, ty: CompType) -> Vec<&MidNode> {
        self.mid_nodes.iter().filter(|n| n.ty == ty).collect()
    }

    /// Sum of the ledger entries satisfying `pred`.
    pub fn local_genus_where(&self, pred: impl Fn(&DownPoint) -> bool) -> i64 {
        self.ledger
            .iter()
            .filter(|e| pred(&e.point))
            .map(|e| e.local_genus)
            .sum()
    }

    fn add_check(&mut self, name: impl Into<String>, hard: bool, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            hard,
            detail: detail.into(),
        });
    }

    fn add_mid(&mut self, ty: CompType, over: DownPoint, red: Option<&Reduction>, wbar: Q, genus: i64) -> usize {
        let id = self.mid_nodes.len();
        let (genus, split) = match red {
            Some(Reduction::Separable { genus, split }) => (if *split { 0 } else { *genus }, *split),
            Some(Reduction::Inseparable { .. }) => (0, false),
            None => (genus, false),
        };
        self.mid_nodes.push(MidNode {
            id,
            ty,
            over,
            wbar,
            genus,
            split,
            markings: 0,
        });
        id
    }

    #[allow(clippy::too_many_arguments)]
    fn add_mid_edge(
        &mut self,
        a: usize,
        b: usize,
        thickness: Q,
        annotation: Annotation,
        parity: Parity,
        upstairs_nodes: u8,
        over: DownPoint,
    ) {
        self.mid_edges.push(MidEdge {
            a,
            b,
            thickness,
            annotation,
            parity,
            upstairs_nodes,
            over,
        });
    }

    /// Adds the fiber tree over a smooth point below `base`; returns the
    /// type-(d) components meeting `base` directly.
    fn attach_fiber(&mut self, base: usize, over: DownPoint, tree: &FiberTree) -> Vec<(Q, i64)> {
        let exact = tree.is_single_leaf() && tree.nodes[0].center_found;
        let mut ids = Vec::with_capacity(tree.nodes.len());
        let mut direct = Vec::new();
        for n in &tree.nodes {
            let ty = match n.kind {
                FiberKind::C => CompType::C,
                FiberKind::D => CompType::D,
            };
            let id = self.add_mid(ty, over.clone(), None, n.wbar, n.genus);
            ids.push(id);
            let from = n.parent.map_or(base, |p| ids[p]);
            if n.parent.is_none() && ty == CompType::D {
                direct.push((n.scale, n.genus));
            }
            let ann = if exact {
                Annotation::PaperExact
            } else {
                Annotation::Inferred
            };
            self.add_mid_edge(from, id, n.scale, ann, Parity::Even, 1, over.clone());
        }
        direct
    }
}

/// F̃: every coefficient with its 2-adic digits of value above 2 on the
/// window dropped, with the pointwise certificate v(F - F̃) > 2.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub equation: LaurentPoly,
    pub dropped_digits: usize,
    pub certified: bool,
}

pub fn truncate_equation(f: &LaurentPoly, domain: AnnulusDomain) -> Result<Truncation> {
    let ring = f.ring();
    let prec = f.prec_units();
    let mut out = LaurentPoly::zero(f.params()).with_prec(prec);
    let mut dropped = 0;
    for (i, c) in f.terms() {
        let bound = if i < 0 {
            two() - domain.alpha * Q::from_integer(i)
        } else {
            two()
        };
        let mut acc = ValuedCoeff::zero_units(ring, prec);
        for (q, d) in c.digits() {
            if q > bound {
                dropped += 1;
                continue;
            }
            acc = acc.add(&ValuedCoeff::teichmuller_in(ring, d, prec).mul_pow2(q)?);
        }
        out.add_term(i, acc);
    }
    let certified = approx_equiv(f, &out, domain, true)?;
    Ok(Truncation {
        equation: out,
        dropped_digits: dropped,
        certified,
    })
}

/// The cover over a grounded even node of local genus 1 and thickness α.
pub fn grounded_shortcut(alpha: Q) -> DpStructure {
    let four = Q::from_integer(4);
    if alpha <= four {
        let half = alpha / two();
        let (genus, leaves) = if alpha < four {
            (0, vec![(0, (four - alpha) / Q::from_integer(6), 1)])
        } else {
            (1, Vec::new())
        };
        DpStructure {
            chain: vec![(half, 1), (half, 1)],
            b: vec![(half, genus, false)],
            leaves,
        }
    } else {
        DpStructure {
            chain: vec![(two(), 1), (alpha - four, 2), (two(), 1)],
            b: vec![(two(), 0, false), (two(), 0, false)],
            leaves: Vec::new(),
        }
    }
}

fn maybe_truncate(
    g: &mut ReductionGraph,
    opts: &Options,
    f: LaurentPoly,
    domain: AnnulusDomain,
    what: &str,
) -> Result<LaurentPoly> {
    if !opts.truncate {
        return Ok(f);
    }
    let t = truncate_equation(&f, domain)?;
    g.add_check(
        format!("truncation certificate ({what})"),
        true,
        t.certified,
        format!("{} digits dropped", t.dropped_digits),
    );
    if !t.certified {
        return Err(Error::InvariantFailure(format!("truncation of {what} not certified")));
    }
    Ok(t.equation)
}

fn generic_contribution(red: &Reduction) -> i64 {
    red.generic_local_genus()
}

/// Fibers over the smooth points of positive local genus of a component
/// with polynomial equation `f` and reduced derivative `dp`.
fn smooth_fibers(
    f: &LaurentPoly,
    dp: &crate::gf2poly::GfLaurent,
    special: &[(GfElem, GfField)],
) -> Result<Vec<(GfElem, GfField, i64, FiberTree)>> {
    let mut out = Vec::new();
    for (b, field, m) in smooth_points(dp, special)? {
        if m % 2 == 1 {
            return Err(Error::InvariantFailure(format!(
                "root of odd multiplicity {m} in the reduced derivative"
            )));
        }
        let n = i64::from(m / 2);
        let tree = fiber_at(f, b, &field, n)?;
        out.push((b, field, n, tree));
    }
    Ok(out)
}

/// Full pipeline from the factors of F.
pub fn build_reduction(factors: &[LaurentPoly], opts: &Options) -> Result<ReductionGraph> {
    let branch = BranchSet::from_factors(factors)?;
    let tree = build_marked_model(&branch)?;
    build_from_model(&tree, opts)
}

pub fn build_from_model(tree: &ModelTree, opts: &Options) -> Result<ReductionGraph> {
    let mut g = ReductionGraph {
        genus: tree.genus(),
        ..Default::default()
    };
    let n = tree.components.len();
    let field = tree.ring().field;

    // type (a)
    let mut reds = Vec::with_capacity(n);
    let mut equations = Vec::with_capacity(n);
    for comp in &tree.components {
        let f = tree.component_equation(comp.id)?;
        let f = maybe_truncate(&mut g, opts, f, AnnulusDomain::disc(), &format!("component {}", comp.id))?;
        let d = odd_decompose(&f, AnnulusDomain::disc())?;
        let red = d.reduction_at(Q::zero())?;
        g.down_components.push(DownComponent {
            id: comp.id,
            parent: comp.parent,
            markings: comp.markings(),
            wbar: d.wbar,
            genus: match &red {
                Reduction::Separable { genus, split: false } => *genus,
                _ => 0,
            },
            split: red.is_split(),
            inseparable: matches!(red, Reduction::Inseparable { .. }),
        });
        let id = g.add_mid(CompType::A, DownPoint::Generic(comp.id), Some(&red), d.wbar, 0);
        g.mid_nodes[id].markings = comp.markings();
        reds.push(red);
        equations.push(d.f);
    }

    // generic points, markings and smooth points of (a) components
    for comp in &tree.components {
        let red = &reds[comp.id];
        g.ledger.push(LedgerEntry {
            point: DownPoint::Generic(comp.id),
            local_genus: generic_contribution(red),
        });
        if comp.marked_infinity {
            g.ledger.push(LedgerEntry {
                point: DownPoint::Marking {
                    component: comp.id,
                    root: None,
                },
                local_genus: 0,
            });
        }
        for &(_, s) in &comp.points {
            if let Special::Marking(r) = s {
                g.ledger.push(LedgerEntry {
                    point: DownPoint::Marking {
                        component: comp.id,
                        root: Some(r),
                    },
                    local_genus: 0,
                });
            }
        }
        if let Reduction::Inseparable { dp, .. } = red {
            let special: Vec<(GfElem, GfField)> = comp.points.iter().map(|&(r, _)| (r, field)).collect();
            for (b, bf, n_genus, ft) in smooth_fibers(&equations[comp.id], dp, &special)? {
                let over = DownPoint::Smooth {
                    component: comp.id,
                    residue: b,
                    field_degree: bf.degree(),
                };
                g.add_check(
                    format!("fiber over {over:?}"),
                    true,
                    ft.total_genus() == n_genus && ft.check().is_empty(),
                    format!("multiplicity genus {n_genus}, tree genus {}; {:?}", ft.total_genus(), ft.check()),
                );
                g.attach_fiber(comp.id, over.clone(), &ft);
                g.ledger.push(LedgerEntry {
                    point: over,
                    local_genus: n_genus,
                });
            }
        }
    }

    // double points
    let wbars: Vec<Q> = g.down_components.iter().map(|c| c.wbar).collect();
    let dps = classify_double_points(tree, &wbars)?;
    for (k, dp) in dps.iter().enumerate() {
        let over = DownPoint::Node(k);
        let mut edge = DownEdge {
            parent: dp.parent,
            child: dp.child,
            alpha: dp.alpha,
            parity: dp.parity,
            grounded: dp.grounded,
            sdf: None,
            structure: None,
            local_genus: 0,
        };
        if dp.parity == Parity::Odd {
            g.add_mid_edge(dp.parent, dp.child, dp.alpha, Annotation::PaperExact, Parity::Odd, 1, over.clone());
        } else {
            let eq = maybe_truncate(
                &mut g,
                opts,
                dp.equation.clone(),
                AnnulusDomain::new(dp.alpha),
                &format!("node {k}"),
            )?;
            let dpi = DoublePointInfo {
                equation: eq,
                ..dp.clone()
            };
            let (f, d) = sdf_compute(&dpi)?;
            let mut structure = DpStructure {
                chain: Vec::new(),
                b: Vec::new(),
                leaves: Vec::new(),
            };
            let mut prev = dp.parent;
            let mut lg = 0;
            let interior = f.interior();
            for (j, &(lam, val)) in interior.iter().enumerate() {
                let red = d.reduction_at(lam)?;
                let t = g.add_mid(CompType::B, over.clone(), Some(&red), val, 0);
                let thick = f.breaks[j + 1] - f.breaks[j];
                let nup = upstairs_nodes_over_dp(&f, j);
                g.add_mid_edge(prev, t, thick, Annotation::PaperExact, Parity::Even, nup, over.clone());
                structure.chain.push((thick, nup));
                structure.b.push((val, g.mid_nodes[t].genus, red.is_split()));
                lg += generic_contribution(&red) + i64::from(nup) - 1;
                if let Reduction::Inseparable { dp: dpol, .. } = &red {
                    let ft = d.f.subst_scale(lam)?;
                    let k2 = ft.ldeg().map_or(0, |l| if l < 0 { (1 - l) / 2 } else { 0 });
                    let ft = ft.shift(2 * k2);
                    for (_, _, n_genus, tr) in smooth_fibers(&ft, dpol, &[])? {
                        g.add_check(
                            format!("fiber over a type-(b) point of node {k}"),
                            true,
                            tr.total_genus() == n_genus && tr.check().is_empty(),
                            format!("multiplicity genus {n_genus}, tree genus {}", tr.total_genus()),
                        );
                        for (s, gen) in g.attach_fiber(t, over.clone(), &tr) {
                            structure.leaves.push((j, s, gen));
                        }
                        lg += n_genus;
                    }
                }
                prev = t;
            }
            let last = f.slopes.len() - 1;
            let thick = f.breaks[last + 1] - f.breaks[last];
            let nup = upstairs_nodes_over_dp(&f, last);
            g.add_mid_edge(prev, dp.child, thick, Annotation::PaperExact, Parity::Even, nup, over.clone());
            structure.chain.push((thick, nup));
            lg += i64::from(nup) - 1;

            let formula = local_genus_even_dp(&f);
            g.add_check(
                format!("node {k}: local genus from structure and slopes"),
                true,
                formula == lg,
                format!("structure {lg}, slopes {formula}; sdf {f}"),
            );
            let bad = f.check(wbars[dp.parent], wbars[dp.child]);
            g.add_check(format!("node {k}: square defect function"), true, bad.is_empty(), bad.join("; "));
            if opts.strict {
                let rev = reversed_node_equation(&dpi)?;
                let (fr, _) = sdf_compute(&DoublePointInfo {
                    equation: rev,
                    ..dpi.clone()
                })?;
                g.add_check(
                    format!("node {k}: square defect function seen from the child"),
                    true,
                    fr == f.reversed(),
                    format!("{fr} vs {}", f.reversed()),
                );
            }
            if dp.grounded {
                g.add_check(
                    format!("node {k}: grounded node has positive local genus"),
                    true,
                    lg >= 1,
                    format!("local genus {lg}"),
                );
                if lg == 1 {
                    let short = grounded_shortcut(dp.alpha);
                    g.add_check(
                        format!("node {k}: grounded genus-1 pattern"),
                        true,
                        short == structure,
                        format!("pattern {short:?}, generic {structure:?}"),
                    );
                }
            }
            edge.local_genus = lg;
            edge.sdf = Some(f);
            edge.structure = Some(structure);
        }
        g.ledger.push(LedgerEntry {
            point: over,
            local_genus: edge.local_genus,
        });
        g.down_edges.push(edge);
    }

    build_upstairs(&mut g)?;
    global_checks(&mut g, tree, opts);
    Ok(g)
}

/// F(2^α/x): the node equation in the coordinate of the child.
fn reversed_node_equation(dp: &DoublePointInfo) -> Result<LaurentPoly> {
    Ok(dp.equation.subst_scale(dp.alpha)?.subst_invert())
}

fn build_upstairs(g: &mut ReductionGraph) -> Result<()> {
    let mut copies: Vec<Vec<usize>> = Vec::with_capacity(g.mid_nodes.len());
    for m in &g.mid_nodes {
        let k = if m.split { 2 } else { 1 };
        let mut ids = Vec::new();
        for c in 0..k {
            ids.push(g.up_nodes.len());
            g.up_nodes.push(UpNode {
                id: g.up_nodes.len(),
                mid: m.id,
                copy: c,
                genus: m.genus,
                markings: m.markings,
            });
        }
        copies.push(ids);
    }
    for e in &g.mid_edges {
        let (ca, cb) = (&copies[e.a], &copies[e.b]);
        let grounded_genus_one = match e.over {
            DownPoint::Node(k) => {
                let d = &g.down_edges[k];
                d.grounded && d.local_genus == 1 && d.alpha <= Q::from_integer(4)
            }
            _ => false,
        };
        let (thickness, annotation) = match (e.parity, e.upstairs_nodes) {
            (Parity::Odd, _) => (Some(odd_node_thickness(e.thickness)), Annotation::PaperExact),
            (_, 2) => (Some(e.thickness), e.annotation.max(Annotation::Inferred)),
            _ if grounded_genus_one => (Some(e.thickness / two()), Annotation::PaperExact),
            _ => (Some(e.thickness / two()), Annotation::Heuristic),
        };
        if (ca.len() == 2 || cb.len() == 2) && e.upstairs_nodes != 2 {
            return Err(Error::InvariantFailure(format!(
                "split component {} / {} meets a node with one preimage",
                e.a, e.b
            )));
        }
        for i in 0..usize::from(e.upstairs_nodes) {
            g.up_edges.push(UpEdge {
                a: ca[i.min(ca.len() - 1)],
                b: cb[i.min(cb.len() - 1)],
                thickness,
                annotation,
            });
        }
    }
    let (sn, se) = contract_unstable(&g.up_nodes, &g.up_edges);
    g.stable_nodes = sn;
    g.stable_edges = se;
    Ok(())
}

/// First Betti number and number of connected components.
pub fn betti(n_nodes: usize, edges: &[(usize, usize)]) -> (i64, usize) {
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n_nodes;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    (edges.len() as i64 - n_nodes as i64 + comps as i64, comps)
}

pub fn toric_rank(g: &ReductionGraph) -> i64 {
    let edges: Vec<(usize, usize)> = g.up_edges.iter().map(|e| (e.a, e.b)).collect();
    betti(g.up_nodes.len(), &edges).0
}

/// Contract rational components with fewer than three special points
/// (nodes and markings), adding thicknesses along merged chains. A marking
/// on a contracted tail moves to the neighbour.
pub fn contract_unstable(nodes: &[UpNode], edges: &[UpEdge]) -> (Vec<UpNode>, Vec<UpEdge>) {
    let mut alive: Vec<bool> = vec![true; nodes.len()];
    let mut markings: Vec<usize> = nodes.iter().map(|n| n.markings).collect();
    let mut edges: Vec<Option<UpEdge>> = edges.iter().cloned().map(Some).collect();
    loop {
        if alive.iter().filter(|&&a| a).count() <= 1 {
            break;
        }
        let mut changed = false;
        for v in 0..nodes.len() {
            if !alive[v] || nodes[v].genus != 0 {
                continue;
            }
            let inc: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter_map(|(i, e)| e.as_ref().filter(|e| e.a == v || e.b == v).map(|_| i))
                .collect();
            let has_loop = inc.iter().any(|&i| {
                let e = edges[i].as_ref().unwrap();
                e.a == e.b
            });
            let degree = inc.len() + usize::from(has_loop);
            if has_loop || degree + markings[v] > 2 || degree == 0 {
                continue;
            }
            if degree == 2 {
                let e1 = edges[inc[0]].take().unwrap();
                let e2 = edges[inc[1]].take().unwrap();
                let other = |e: &UpEdge| if e.a == v { e.b } else { e.a };
                edges.push(Some(UpEdge {
                    a: other(&e1),
                    b: other(&e2),
                    thickness: e1.thickness.zip(e2.thickness).map(|(x, y)| x + y),
                    annotation: e1.annotation.max(e2.annotation),
                }));
            } else {
                let e = edges[inc[0]].take().unwrap();
                let other = if e.a == v { e.b } else { e.a };
                markings[other] += markings[v];
            }
            alive[v] = false;
            changed = true;
            break;
        }
        if !changed {
            break;
        }
    }
    let mut index = vec![usize::MAX; nodes.len()];
    let mut out_nodes = Vec::new();
    for (v, n) in nodes.iter().enumerate() {
        if alive[v] {
            index[v] = out_nodes.len();
            out_nodes.push(UpNode {
                id: out_nodes.len(),
                markings: markings[v],
                ..n.clone()
            });
        }
    }
    let out_edges = edges
        .into_iter()
        .flatten()
        .map(|e| UpEdge {
            a: index[e.a],
            b: index[e.b],
            ..e
        })
        .collect();
    (out_nodes, out_edges)
}

/// Components in the subtree below `c`, including `c`.
fn subtree(tree: &ModelTree, c: usize) -> Vec<usize> {
    let mut out = vec![c];
    let mut i = 0;
    while i < out.len() {
        out.extend(tree.components[out[i]].children.iter().copied());
        i += 1;
    }
    out
}

fn point_component(g: &ReductionGraph, p: &DownPoint) -> Option<usize> {
    match p {
        DownPoint::Generic(c) => Some(*c),
        DownPoint::Marking { component, .. } | DownPoint::Smooth { component, .. } => Some(*component),
        DownPoint::Node(_) => None,
    }
    .or(match p {
        DownPoint::Node(k) => Some(g.down_edges[*k].child),
        _ => None,
    })
}

fn global_checks(g: &mut ReductionGraph, tree: &ModelTree, opts: &Options) {
    let genus = g.genus;
    let sum: i64 = g.ledger.iter().map(|e| e.local_genus).sum();
    let edges: Vec<(usize, usize)> = g.up_edges.iter().map(|e| (e.a, e.b)).collect();
    let (beta, comps) = betti(g.up_nodes.len(), &edges);
    let comp_sum: i64 = g.up_nodes.iter().map(|n| n.genus).sum();
    let two_node = g.mid_edges.iter().filter(|e| e.upstairs_nodes == 2).count() as i64;
    let split = g.mid_nodes.iter().filter(|n| n.split).count() as i64;
    g.totals = Totals {
        genus,
        local_genus_sum: sum,
        component_genus_sum: comp_sum,
        betti: beta,
        toric_rank: beta,
    };
    g.add_check("sum of local genera", true, sum == genus, format!("{sum} vs g = {genus}"));
    g.add_check(
        "arithmetic genus of the special fiber",
        true,
        comp_sum + beta == genus && comps == 1,
        format!("Σ g_i = {comp_sum}, β = {beta}, {comps} connected components"),
    );
    g.add_check(
        "Betti number from node and split counts",
        true,
        beta == two_node - split,
        format!("β = {beta}, doubled nodes {two_node}, split components {split}"),
    );
    let zero_ok = g.ledger.iter().all(|e| match e.point {
        DownPoint::Marking { .. } => e.local_genus == 0,
        DownPoint::Node(k) => g.down_edges[k].parity == Parity::Even || e.local_genus == 0,
        _ => true,
    });
    g.add_check("markings and odd nodes carry no genus", true, zero_ok, "");

    // leaves of the downstairs tree
    for comp in &tree.components {
        let degree = comp.children.len() + usize::from(comp.parent.is_some());
        if degree != 1 {
            continue;
        }
        let m = comp.markings() as i64;
        let node = g
            .down_edges
            .iter()
            .position(|e| e.child == comp.id || e.parent == comp.id)
            .expect("leaf has a node");
        let on_x = g.local_genus_where(|p| match p {
            DownPoint::Node(_) => false,
            p => point_component(g, p) == Some(comp.id),
        });
        if m % 2 == 0 {
            g.add_check(
                format!("even leaf {}: local genus at most N - 1", comp.id),
                true,
                on_x < m / 2,
                format!("{on_x} with {m} markings"),
            );
        } else {
            let with_node = on_x + g.down_edges[node].local_genus;
            g.add_check(
                format!("odd leaf {}: local genus equals N", comp.id),
                true,
                with_node == (m - 1) / 2,
                format!("{with_node} with {m} markings"),
            );
        }
    }

    if opts.strict {
        // both sides of every odd node (not a theorem; logged only)
        for (k, e) in g.down_edges.clone().iter().enumerate() {
            if e.parity != Parity::Odd {
                continue;
            }
            let below = subtree(tree, e.child);
            let inside = |p: &DownPoint| match p {
                DownPoint::Node(j) => *j != k && below.contains(&g.down_edges[*j].parent),
                p => point_component(g, p).is_some_and(|c| below.contains(&c)),
            };
            let s_below = g.local_genus_where(inside);
            let s_above = g.local_genus_where(|p| !inside(p) && *p != DownPoint::Node(k));
            let m_below = tree.branch_count(e.child) as i64;
            let m_above = 2 * genus + 2 - m_below;
            g.add_check(
                format!("odd node {k}: each side carries N"),
                false,
                s_below == (m_below - 1) / 2 && s_above == (m_above - 1) / 2,
                format!("{s_below} below with {m_below} markings, {s_above} above with {m_above}"),
            );
        }
    }
}
