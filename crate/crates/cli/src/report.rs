//! report.json and graph.dot.

use std::fmt::Write as _;

use serde_json::{json, Value};

use hyperred_core::error::Q;
use hyperred_core::model::Parity;
use hyperred_core::reduction::{
    Annotation, DownPoint, DpStructure, ReductionGraph, ThicknessPolicy, UpEdge, UpNode,
};
use hyperred_core::sdf::PLConcaveFn;

pub const SCHEMA: &str = "hyperred/1";

/// Always "p/q", also for integers.
pub fn rat(q: Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn parity(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

fn point(p: &DownPoint) -> Value {
    match p {
        DownPoint::Generic(c) => json!({"kind": "generic", "component": c}),
        DownPoint::Marking { component, root } => {
            json!({"kind": "marking", "component": component, "root": root})
        }
        DownPoint::Smooth { component, residue, field_degree } => json!({
            "kind": "smooth",
            "component": component,
            "residue": residue,
            "field_degree": field_degree,
        }),
        DownPoint::Node(k) => json!({"kind": "node", "double_point": k}),
    }
}

fn thickness(t: Option<Q>, a: Annotation, policy: ThicknessPolicy) -> Value {
    match t {
        Some(t) if policy.admits(a) => Value::String(rat(t)),
        _ => Value::String("unknown".into()),
    }
}

fn sdf_table(f: &PLConcaveFn) -> Value {
    json!({
        "alpha": rat(f.alpha),
        "breaks": f.breaks.iter().map(|&b| rat(b)).collect::<Vec<_>>(),
        "values": f.values.iter().map(|&v| rat(v)).collect::<Vec<_>>(),
        "slopes": f.slopes,
    })
}

fn structure(s: &DpStructure) -> Value {
    json!({
        "chain": s.chain.iter().map(|&(t, n)| json!({"thickness": rat(t), "upstairs_nodes": n})).collect::<Vec<_>>(),
        "b_components": s.b.iter().map(|&(w, g, split)| json!({"wbar": rat(w), "genus": g, "split": split})).collect::<Vec<_>>(),
        "leaves": s.leaves.iter().map(|&(b, t, g)| json!({"b_component": b, "thickness": rat(t), "genus": g})).collect::<Vec<_>>(),
    })
}

fn up_graph(nodes: &[UpNode], edges: &[UpEdge], policy: ThicknessPolicy) -> Value {
    json!({
        "components": nodes.iter().map(|n| json!({
            "id": n.id, "intermediate": n.mid, "copy": n.copy, "genus": n.genus,
            "markings": n.markings,
        })).collect::<Vec<_>>(),
        "double_points": edges.iter().map(|e| json!({
            "a": e.a, "b": e.b,
            "thickness": thickness(e.thickness, e.annotation, policy),
            "annotation": e.annotation.to_string(),
        })).collect::<Vec<_>>(),
    })
}

pub struct RunInfo {
    pub options: Value,
    pub ramification: u32,
}

pub fn report(g: &ReductionGraph, policy: ThicknessPolicy, info: &RunInfo) -> Value {
    let down = json!({
        "components": g.down_components.iter().map(|c| json!({
            "id": c.id, "parent": c.parent, "markings": c.markings,
            "wbar": rat(c.wbar), "genus": c.genus, "split": c.split,
            "inseparable": c.inseparable,
        })).collect::<Vec<_>>(),
        "double_points": g.down_edges.iter().map(|e| json!({
            "parent": e.parent, "child": e.child, "thickness": rat(e.alpha),
            "parity": parity(e.parity), "grounded": e.grounded,
            "local_genus": e.local_genus,
            "sdf": e.sdf.as_ref().map(sdf_table),
            "structure": e.structure.as_ref().map(structure),
        })).collect::<Vec<_>>(),
    });
    let mid = json!({
        "components": g.mid_nodes.iter().map(|n| json!({
            "id": n.id, "type": n.ty.to_string(), "over": point(&n.over),
            "wbar": rat(n.wbar), "genus": n.genus, "split": n.split,
            "markings": n.markings,
        })).collect::<Vec<_>>(),
        "double_points": g.mid_edges.iter().map(|e| json!({
            "a": e.a, "b": e.b,
            "thickness": thickness(Some(e.thickness), e.annotation, policy),
            "annotation": e.annotation.to_string(),
            "parity": parity(e.parity),
            "upstairs_nodes": e.upstairs_nodes,
            "over": point(&e.over),
        })).collect::<Vec<_>>(),
    });
    json!({
        "schema": SCHEMA,
        "options": info.options,
        "ramification_index": info.ramification,
        "genus": g.genus,
        "totals": {
            "genus": g.totals.genus,
            "local_genus_sum": g.totals.local_genus_sum,
            "component_genus_sum": g.totals.component_genus_sum,
            "betti": g.totals.betti,
            "toric_rank": g.totals.toric_rank,
        },
        "downstairs": down,
        "intermediate": mid,
        "upstairs": up_graph(&g.up_nodes, &g.up_edges, policy),
        "stable": up_graph(&g.stable_nodes, &g.stable_edges, policy),
        "local_genus": g.ledger.iter().map(|l| json!({
            "point": point(&l.point), "local_genus": l.local_genus,
        })).collect::<Vec<_>>(),
        "checks": g.checks.iter().map(|c| json!({
            "name": c.name, "passed": c.passed, "hard": c.hard, "detail": c.detail,
        })).collect::<Vec<_>>(),
    })
}

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

fn dot_thickness(t: Option<Q>, a: Annotation, policy: ThicknessPolicy) -> String {
    match t {
        Some(t) if policy.admits(a) => format!("{t} ({a})"),
        _ => format!("? ({a})"),
    }
}

pub fn dot(g: &ReductionGraph, policy: ThicknessPolicy) -> String {
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "digraph hyperred {{").unwrap();
    writeln!(w, "  node [shape=box];").unwrap();
    writeln!(w, "  edge [dir=none];").unwrap();

    writeln!(w, "  subgraph cluster_downstairs {{").unwrap();
    writeln!(w, "    label=\"C̄₀ (downstairs)\";").unwrap();
    for c in &g.down_components {
        let label = format!("X{}\ng={} w̄={}", c.id, c.genus, c.wbar);
        writeln!(w, "    d{} [label=\"{}\"];", c.id, esc(&label)).unwrap();
    }
    for e in &g.down_edges {
        let mut label = format!("{} {}", e.alpha, parity(e.parity));
        if e.grounded {
            label.push_str(" grounded");
        }
        writeln!(w, "    d{} -> d{} [label=\"{}\"];", e.parent, e.child, esc(&label)).unwrap();
    }
    writeln!(w, "  }}").unwrap();

    writeln!(w, "  subgraph cluster_intermediate {{").unwrap();
    writeln!(w, "    label=\"Ĉ₀ (intermediate)\";").unwrap();
    for n in &g.mid_nodes {
        let label = format!("({}) g={} w̄={}", n.ty, n.genus, n.wbar);
        writeln!(w, "    m{} [label=\"{}\"];", n.id, esc(&label)).unwrap();
    }
    for e in &g.mid_edges {
        let label = dot_thickness(Some(e.thickness), e.annotation, policy);
        writeln!(w, "    m{} -> m{} [label=\"{}\"];", e.a, e.b, esc(&label)).unwrap();
    }
    writeln!(w, "  }}").unwrap();

    writeln!(w, "  subgraph cluster_upstairs {{").unwrap();
    writeln!(w, "    label=\"C₀ (stable)\";").unwrap();
    for n in &g.stable_nodes {
        let mid = &g.mid_nodes[n.mid];
        let label = format!("({}) g={} w̄={}", mid.ty, n.genus, mid.wbar);
        writeln!(w, "    u{} [label=\"{}\"];", n.id, esc(&label)).unwrap();
    }
    for e in &g.stable_edges {
        let label = dot_thickness(e.thickness, e.annotation, policy);
        writeln!(w, "    u{} -> u{} [label=\"{}\"];", e.a, e.b, esc(&label)).unwrap();
    }
    writeln!(w, "  }}").unwrap();
    writeln!(w, "}}").unwrap();
    s
}
