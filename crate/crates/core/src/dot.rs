//! DOT renderings. Groupoids draw objects as nodes and non-identity arrows
//! as directed edges; lattice pairs draw two Hasse diagrams side by side
//! with dashed pairing edges; covers draw base and total with one fill
//! color per fiber. Output is deterministic byte for byte.

use std::fmt::Write as _;

use crate::correspondence::{CorrespondenceResult, GaloisConnection, Lattice, Subgroup};
use crate::covers::CoverInstance;
use crate::fieldext::FieldCorrespondence;
use crate::groupoid::FiniteGroupoid;
use crate::kernel::FinMap;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn set_label(xs: &[usize]) -> String {
    let inner: Vec<String> = xs.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

/// Classes of the codomain fibers in codomain order, e.g. {0,1}{2}.
fn fiber_label(q: &FinMap) -> String {
    let mut classes = vec![Vec::new(); q.cod.size];
    for (x, &v) in q.table.iter().enumerate() {
        classes[v].push(x);
    }
    classes.iter().filter(|c| !c.is_empty()).map(|c| set_label(c)).collect()
}

fn subgroup_label(s: &Subgroup) -> String {
    match s {
        Subgroup::Absolute(v) => set_label(v),
        Subgroup::Relative(fibers) => fibers.iter().map(|f| set_label(f)).collect(),
    }
}

/// Covering pairs of the order, lower listed first.
fn hasse_edges<P>(l: &Lattice<P>) -> Vec<(usize, usize)> {
    let n = l.nodes.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !l.le(i, j) {
                continue;
            }
            let covered = (0..n)
                .any(|k| k != i && k != j && l.le(i, k) && l.le(k, j));
            if !covered {
                out.push((i, j));
            }
        }
    }
    out
}

fn lattice_cluster<P>(out: &mut String, key: &str, title: &str, l: &Lattice<P>, labels: &[String]) {
    writeln!(out, "  subgraph cluster_{key} {{").unwrap();
    writeln!(out, "    label=\"{}\";", escape(title)).unwrap();
    for (i, label) in labels.iter().enumerate() {
        writeln!(out, "    \"{key}{i}\" [label=\"{}\"];", escape(label)).unwrap();
    }
    for (i, j) in hasse_edges(l) {
        writeln!(out, "    \"{key}{i}\" -> \"{key}{j}\" [dir=none];").unwrap();
    }
    writeln!(out, "  }}").unwrap();
}

fn paired_lattices<A, B>(
    left: (&str, &str, &Lattice<A>, Vec<String>),
    right: (&str, &str, &Lattice<B>, Vec<String>),
    pairs: &[(usize, usize)],
) -> String {
    let mut out = String::from("digraph correspondence {\n  rankdir=BT;\n");
    lattice_cluster(&mut out, left.0, left.1, left.2, &left.3);
    lattice_cluster(&mut out, right.0, right.1, right.2, &right.3);
    for &(i, j) in pairs {
        writeln!(
            out,
            "  \"{}{i}\" -> \"{}{j}\" [style=dashed, dir=none, constraint=false];",
            left.0, right.0
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn groupoid_dot(g: &FiniteGroupoid) -> String {
    let mut out = String::from("digraph groupoid {\n");
    for o in 0..g.objects.size {
        writeln!(out, "  \"o{o}\";").unwrap();
    }
    for a in 0..g.arrows.size {
        if g.is_identity(a) {
            continue;
        }
        writeln!(
            out,
            "  \"o{}\" -> \"o{}\" [label=\"a{a}\"];",
            g.src.table[a], g.tgt.table[a]
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Congruence lattice beside the quotient lattice, paired by coequalizer.
pub fn connection_dot(c: &GaloisConnection) -> String {
    let rel_labels: Vec<String> = c
        .relations
        .nodes
        .iter()
        .map(|r| r.classes().iter().map(|cl| set_label(cl)).collect())
        .collect();
    let quot_labels: Vec<String> = c.quotients.nodes.iter().map(fiber_label).collect();
    let pairs: Vec<(usize, usize)> = c.coeq.iter().copied().enumerate().collect();
    paired_lattices(
        ("r", "congruences", &c.relations, rel_labels),
        ("q", "quotients", &c.quotients, quot_labels),
        &pairs,
    )
}

/// Subgroup lattice beside the quotient lattice, paired by the bijection.
pub fn correspondence_dot(r: &CorrespondenceResult) -> String {
    let sub_labels: Vec<String> = r.subgroup_lattice.nodes.iter().map(subgroup_label).collect();
    let quot_labels: Vec<String> = r.quotient_lattice.nodes.iter().map(fiber_label).collect();
    paired_lattices(
        ("s", "subgroups", &r.subgroup_lattice, sub_labels),
        ("q", "quotients", &r.quotient_lattice, quot_labels),
        &r.bijection,
    )
}

/// Subgroup lattice beside the subfield lattice, paired by fixed field.
pub fn field_dot(c: &FieldCorrespondence) -> String {
    let sub_labels: Vec<String> = c.subgroup_lattice.nodes.iter().map(|v| set_label(v)).collect();
    let field_labels: Vec<String> = c
        .field_lattice
        .nodes
        .iter()
        .map(|f| format!("GF({})", f.elements.len()))
        .collect();
    paired_lattices(
        ("s", "subgroups", &c.subgroup_lattice, sub_labels),
        ("f", "subfields", &c.field_lattice, field_labels),
        &c.bijection,
    )
}

/// Base and total side by side; total vertices are filled with one color
/// per fiber, base vertices with their own fiber's color.
pub fn cover_dot(c: &CoverInstance) -> String {
    let palette = |u: usize| 1 + u % 9;
    let mut out = String::from("digraph cover {\n  node [colorscheme=set19, style=filled];\n");
    writeln!(out, "  subgraph cluster_base {{").unwrap();
    writeln!(out, "    label=\"base\";").unwrap();
    for v in 0..c.base.vertices.size {
        writeln!(out, "    \"b{v}\" [fillcolor={}];", palette(v)).unwrap();
    }
    for (e, &(s, t)) in c.base.edges.iter().enumerate() {
        writeln!(out, "    \"b{s}\" -> \"b{t}\" [label=\"e{e}\"];").unwrap();
    }
    writeln!(out, "  }}").unwrap();
    writeln!(out, "  subgraph cluster_total {{").unwrap();
    writeln!(out, "    label=\"total\";").unwrap();
    for v in 0..c.total.vertices.size {
        writeln!(out, "    \"t{v}\" [fillcolor={}];", palette(c.proj_v.table[v])).unwrap();
    }
    for (e, &(s, t)) in c.total.edges.iter().enumerate() {
        writeln!(out, "    \"t{s}\" -> \"t{t}\" [label=\"e{}.{e}\"];", c.proj_e.table[e]).unwrap();
    }
    writeln!(out, "  }}").unwrap();
    out.push_str("}\n");
    out
}
