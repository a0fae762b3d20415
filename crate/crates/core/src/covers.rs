//! Finite covers of finite graphs. Edges are directed in the data but read
//! as one-cells, so connectivity, components, and lifting all ignore
//! orientation while every lift preserves it. The covering condition is
//! combinatorial: each end of a base edge lifts uniquely at each point of
//! the fiber.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::algebra::{check_group, closure_of_permutations, subgroups, FiniteGroup, GroupAction};
use crate::correspondence::{full_correspondence, CorrespondenceResult, Subgroup};
use crate::galois::SplittingStructure;
use crate::kernel::{FinMap, FinSet, UnionFind};
use crate::{Caps, Error, Result};

/// A finite directed multigraph; loops and parallel edges allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphSchema", into = "GraphSchema")]
pub struct Graph {
    pub vertices: FinSet,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphSchema {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphSchema> for Graph {
    type Error = Error;
    fn try_from(s: GraphSchema) -> Result<Self> {
        Graph::new(FinSet::new(s.vertices), s.edges)
    }
}

impl From<Graph> for GraphSchema {
    fn from(g: Graph) -> Self {
        GraphSchema {
            vertices: g.vertices.size,
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn new(vertices: FinSet, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= vertices.size || v >= vertices.size {
                return Err(Error::malformed("Graph", format!("edge ({u},{v}) out of range")));
            }
        }
        Ok(Graph { vertices, edges })
    }

    /// Undirected connectivity; the empty graph does not count as connected.
    pub fn is_connected(&self) -> bool {
        let comps = self.components();
        comps.len() == 1
    }

    /// Undirected components as sorted vertex lists, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.vertices.size);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.classes()
    }
}

/// A covering of graphs: projections on vertices and edges satisfying the
/// unique-lifting condition at every vertex of the total space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CoverSchema", into = "CoverSchema")]
pub struct CoverInstance {
    pub base: Graph,
    pub total: Graph,
    pub proj_v: FinMap,
    pub proj_e: FinMap,
}

#[derive(Serialize, Deserialize)]
struct CoverSchema {
    base: Graph,
    total: Graph,
    proj_v: FinMap,
    proj_e: FinMap,
}

impl TryFrom<CoverSchema> for CoverInstance {
    type Error = Error;
    fn try_from(s: CoverSchema) -> Result<Self> {
        CoverInstance::new(s.base, s.total, s.proj_v, s.proj_e)
    }
}

impl From<CoverInstance> for CoverSchema {
    fn from(c: CoverInstance) -> Self {
        CoverSchema {
            base: c.base,
            total: c.total,
            proj_v: c.proj_v,
            proj_e: c.proj_e,
        }
    }
}

impl CoverInstance {
    pub fn new(base: Graph, total: Graph, proj_v: FinMap, proj_e: FinMap) -> Result<Self> {
        if proj_v.dom.size != total.vertices.size || proj_v.cod.size != base.vertices.size {
            return Err(Error::malformed("CoverInstance", "proj_v endpoints differ from the graphs"));
        }
        if proj_e.dom.size != total.edges.len() || proj_e.cod.size != base.edges.len() {
            return Err(Error::malformed("CoverInstance", "proj_e endpoints differ from the edge lists"));
        }
        if let Some(missing) = proj_v.first_missing() {
            return Err(Error::malformed(
                "CoverInstance",
                format!("base vertex {missing} has an empty fiber"),
            ));
        }
        let nbe = base.edges.len();
        let mut out = vec![vec![0usize; nbe]; total.vertices.size];
        let mut inn = vec![vec![0usize; nbe]; total.vertices.size];
        for (i, &(u, v)) in total.edges.iter().enumerate() {
            let e = proj_e.table[i];
            if base.edges[e] != (proj_v.table[u], proj_v.table[v]) {
                return Err(Error::malformed(
                    "CoverInstance",
                    format!("edge {i} does not lie over base edge {e}"),
                ));
            }
            out[u][e] += 1;
            inn[v][e] += 1;
        }
        for x in 0..total.vertices.size {
            let b = proj_v.table[x];
            for e in 0..nbe {
                if out[x][e] != usize::from(base.edges[e].0 == b) {
                    return Err(Error::malformed(
                        "CoverInstance",
                        format!("vertex {x} lifts the source end of base edge {e} {} times", out[x][e]),
                    ));
                }
                if inn[x][e] != usize::from(base.edges[e].1 == b) {
                    return Err(Error::malformed(
                        "CoverInstance",
                        format!("vertex {x} lifts the target end of base edge {e} {} times", inn[x][e]),
                    ));
                }
            }
        }
        Ok(CoverInstance { base, total, proj_v, proj_e })
    }

    /// Fiber size over base vertex 0; all fibers agree on connected bases.
    pub fn sheets(&self) -> usize {
        if self.base.vertices.size == 0 {
            0
        } else {
            self.proj_v.table.iter().filter(|&&b| b == 0).count()
        }
    }
}

/// Input forms accepted for covers: base plus monodromy row per base edge,
/// or the explicit instance.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoverInput {
    Monodromy { base: Graph, monodromy: Vec<Vec<usize>> },
    Explicit { base: Graph, total: Graph, proj_v: FinMap, proj_e: FinMap },
}

impl CoverInput {
    pub fn build(self) -> Result<CoverInstance> {
        match self {
            CoverInput::Monodromy { base, monodromy } => cover_from_monodromy(&base, &monodromy),
            CoverInput::Explicit { base, total, proj_v, proj_e } => {
                CoverInstance::new(base, total, proj_v, proj_e)
            }
        }
    }
}

/// The n-sheeted cover determined by one sheet permutation per base edge:
/// vertex (u, i) is u*n + i, and the lift of edge u→v at sheet i lands on
/// sheet perm(i). A base without edges yields the single-sheet cover.
pub fn cover_from_monodromy(base: &Graph, perms: &[Vec<usize>]) -> Result<CoverInstance> {
    if perms.len() != base.edges.len() {
        return Err(Error::SizeMismatch {
            context: "one monodromy permutation per base edge",
            expected: base.edges.len(),
            found: perms.len(),
        });
    }
    let n = perms.first().map_or(1, Vec::len);
    for (e, p) in perms.iter().enumerate() {
        if p.len() != n {
            return Err(Error::SizeMismatch {
                context: "monodromy degree",
                expected: n,
                found: p.len(),
            });
        }
        if !FinMap::from_table(p.clone(), n).is_ok_and(|m| m.is_bijective()) {
            return Err(Error::malformed("monodromy", format!("row {e} is not a permutation")));
        }
    }
    let nbv = base.vertices.size;
    let mut edges = Vec::with_capacity(base.edges.len() * n);
    let mut proj_e = Vec::with_capacity(base.edges.len() * n);
    for (e, &(u, v)) in base.edges.iter().enumerate() {
        for i in 0..n {
            edges.push((u * n + i, v * n + perms[e][i]));
            proj_e.push(e);
        }
    }
    let total = Graph::new(FinSet::new(nbv * n), edges)?;
    let proj_v: Vec<usize> = (0..nbv * n).map(|x| x / n).collect();
    CoverInstance::new(
        base.clone(),
        total,
        FinMap::from_table(proj_v, nbv)?,
        FinMap::from_table(proj_e, base.edges.len())?,
    )
}

/// lifts[x][e] = the unique total edge over e whose source (resp. target)
/// is x, or usize::MAX when e is not incident there.
fn lift_tables(c: &CoverInstance) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let nbe = c.base.edges.len();
    let mut out = vec![vec![usize::MAX; nbe]; c.total.vertices.size];
    let mut inn = vec![vec![usize::MAX; nbe]; c.total.vertices.size];
    for (i, &(u, v)) in c.total.edges.iter().enumerate() {
        let e = c.proj_e.table[i];
        out[u][e] = i;
        inn[v][e] = i;
    }
    (out, inn)
}

/// All deck transformations of the cover, as a permutation group with its
/// action on total vertices. A deck transformation is determined on each
/// component by the image of one vertex, via unique lifting; the search
/// propagates that choice and combines components under a global
/// bijectivity check.
pub fn deck_group(c: &CoverInstance, caps: &Caps) -> Result<(FiniteGroup, GroupAction)> {
    let nv = c.total.vertices.size;
    if nv == 0 {
        return closure_of_permutations(&[FinMap::from_table(vec![], 0)?], caps);
    }
    let (out_lift, in_lift) = lift_tables(c);
    let mut out_at = vec![Vec::new(); nv];
    let mut in_at = vec![Vec::new(); nv];
    for (i, &(u, v)) in c.total.edges.iter().enumerate() {
        out_at[u].push(i);
        in_at[v].push(i);
    }

    let comps = c.total.components();
    let mut phi = vec![usize::MAX; nv];
    // per component: every fiber-preserving lift of the root, fully
    // propagated, stored as (vertex, image) assignment lists
    let mut cands: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(comps.len());
    for comp in &comps {
        let root = comp[0];
        let mut maps = Vec::new();
        for y in 0..nv {
            if c.proj_v.table[y] != c.proj_v.table[root] {
                continue;
            }
            if let Some(assignment) = propagate(c, &out_at, &in_at, &out_lift, &in_lift, root, y, &mut phi) {
                maps.push(assignment);
            }
        }
        cands.push(maps);
    }

    let mut tables: Vec<Vec<usize>> = Vec::new();
    let mut used = vec![false; nv];
    let mut table = vec![usize::MAX; nv];
    combine(&cands, 0, &mut used, &mut table, &mut tables, caps)?;

    let maps: Vec<FinMap> = tables
        .into_iter()
        .map(|t| FinMap::from_table(t, nv))
        .collect::<Result<_>>()?;
    closure_of_permutations(&maps, caps)
}

/// Extends root ↦ image over the root's component. Returns the assignment
/// on success; always restores the scratch array.
fn propagate(
    c: &CoverInstance,
    out_at: &[Vec<usize>],
    in_at: &[Vec<usize>],
    out_lift: &[Vec<usize>],
    in_lift: &[Vec<usize>],
    root: usize,
    image: usize,
    phi: &mut [usize],
) -> Option<Vec<(usize, usize)>> {
    let mut assigned = vec![(root, image)];
    phi[root] = image;
    let mut stack = vec![root];
    let mut ok = true;
    'search: while let Some(x) = stack.pop() {
        let y = phi[x];
        let steps = out_at[x]
            .iter()
            .map(|&i| (c.total.edges[i].1, c.total.edges[out_lift[y][c.proj_e.table[i]]].1))
            .chain(
                in_at[x]
                    .iter()
                    .map(|&i| (c.total.edges[i].0, c.total.edges[in_lift[y][c.proj_e.table[i]]].0)),
            )
            .collect::<Vec<_>>();
        for (v, w) in steps {
            if phi[v] == usize::MAX {
                phi[v] = w;
                assigned.push((v, w));
                stack.push(v);
            } else if phi[v] != w {
                ok = false;
                break 'search;
            }
        }
    }
    for &(v, _) in &assigned {
        phi[v] = usize::MAX;
    }
    ok.then_some(assigned)
}

fn combine(
    cands: &[Vec<Vec<(usize, usize)>>],
    k: usize,
    used: &mut [bool],
    table: &mut [usize],
    tables: &mut Vec<Vec<usize>>,
    caps: &Caps,
) -> Result<()> {
    if k == cands.len() {
        tables.push(table.to_vec());
        return caps.closure_order(tables.len());
    }
    'cand: for assignment in &cands[k] {
        for (i, &(_, w)) in assignment.iter().enumerate() {
            if used[w] {
                for &(_, prev) in &assignment[..i] {
                    used[prev] = false;
                }
                continue 'cand;
            }
            used[w] = true;
        }
        for &(v, w) in assignment {
            table[v] = w;
        }
        combine(cands, k + 1, used, table, tables, caps)?;
        for &(_, w) in assignment {
            used[w] = false;
        }
    }
    Ok(())
}

/// Whether the pullback of the cover along itself is a trivial cover of the
/// total space: every component of M×_B M projects isomorphically onto M
/// under the first projection.
pub fn pullback_trivializes(c: &CoverInstance) -> Result<bool> {
    if !c.total.is_connected() {
        return Err(Error::ConnectednessRequired { which: "total" });
    }
    let nv = c.total.vertices.size;
    let ne = c.total.edges.len();
    let mut vid = vec![usize::MAX; nv * nv];
    let mut verts: Vec<(usize, usize)> = Vec::new();
    for x in 0..nv {
        for y in 0..nv {
            if c.proj_v.table[x] == c.proj_v.table[y] {
                vid[x * nv + y] = verts.len();
                verts.push((x, y));
            }
        }
    }
    let mut uf = UnionFind::new(verts.len());
    let mut pedges: Vec<(usize, usize)> = Vec::new(); // (src pullback vertex, first-factor edge)
    for i in 0..ne {
        for j in 0..ne {
            if c.proj_e.table[i] == c.proj_e.table[j] {
                let (ui, vi) = c.total.edges[i];
                let (uj, vj) = c.total.edges[j];
                let a = vid[ui * nv + uj];
                let b = vid[vi * nv + vj];
                uf.union(a, b);
                pedges.push((a, i));
            }
        }
    }
    let comps = uf.classes();
    let mut comp_of = vec![usize::MAX; verts.len()];
    for (ci, comp) in comps.iter().enumerate() {
        for &p in comp {
            comp_of[p] = ci;
        }
    }
    for (ci, comp) in comps.iter().enumerate() {
        if comp.len() != nv {
            return Ok(false);
        }
        let mut seen_v = vec![false; nv];
        for &p in comp {
            if std::mem::replace(&mut seen_v[verts[p].0], true) {
                return Ok(false);
            }
        }
        let mut seen_e = vec![false; ne];
        let mut count = 0usize;
        for &(a, i) in &pedges {
            if comp_of[a] == ci {
                if std::mem::replace(&mut seen_e[i], true) {
                    return Ok(false);
                }
                count += 1;
            }
        }
        if count != ne {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The splitting structure over the vertex projection carried by a subgroup
/// of the deck group; errors when the subgroup fails simple transitivity on
/// some fiber.
fn deck_splitting(
    c: &CoverInstance,
    deck: &FiniteGroup,
    action: &GroupAction,
    set: &[usize],
) -> Result<SplittingStructure> {
    let pos = |g: usize| set.binary_search(&g).expect("element of the subgroup");
    let cayley: Vec<Vec<usize>> = set
        .iter()
        .map(|&a| set.iter().map(|&b| pos(deck.mul(a, b))).collect())
        .collect();
    let sub = check_group(cayley)?;
    let act: Vec<Vec<usize>> = set.iter().map(|&g| action.act[g].clone()).collect();
    let action = GroupAction::new(sub.clone(), action.carrier.clone(), act)?;
    SplittingStructure::new_absolute(&c.proj_v, sub, action)
}

/// The three equivalent characterizations of a Galois cover, each computed
/// on its own, plus the deck group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverVerdict {
    pub galois_cover: bool,
    pub kp_splits: bool,
    pub deck_transitive: bool,
    pub group: FiniteGroup,
}

pub fn cover_galois_verdict(c: &CoverInstance, caps: &Caps) -> Result<CoverVerdict> {
    if !c.base.is_connected() {
        return Err(Error::ConnectednessRequired { which: "base" });
    }
    if !c.total.is_connected() {
        return Err(Error::ConnectednessRequired { which: "total" });
    }
    let galois_cover = pullback_trivializes(c)?;
    let (group, action) = deck_group(c, caps)?;

    let fiber0: Vec<usize> = (0..c.total.vertices.size)
        .filter(|&x| c.proj_v.table[x] == 0)
        .collect();
    let orbit: BTreeSet<usize> = (0..group.order).map(|g| action.act[g][fiber0[0]]).collect();
    let deck_transitive = fiber0.iter().all(|x| orbit.contains(x));

    let sheets = c.sheets();
    let subs = subgroups(&group);
    let split_flags = crate::par::map_vec(&subs, |h| {
        h.len() == sheets && deck_splitting(c, &group, &action, h).is_ok()
    });
    let kp_splits = split_flags.into_iter().any(|b| b);

    assert_eq!(galois_cover, kp_splits, "pullback and kernel-pair splitting disagree");
    assert_eq!(galois_cover, deck_transitive, "pullback and deck transitivity disagree");
    Ok(CoverVerdict {
        galois_cover,
        kp_splits,
        deck_transitive,
        group,
    })
}

/// The quotient of the total space by a subgroup of deck transformations,
/// as a cover of the same base. Vertex classes come from `q`; edge classes
/// are the orbits of the induced edge action.
fn quotient_cover(c: &CoverInstance, action: &GroupAction, h: &[usize], q: &FinMap) -> Result<CoverInstance> {
    let ne = c.total.edges.len();
    let (out_lift, _) = lift_tables(c);
    let mut uf = UnionFind::new(ne);
    for &g in h {
        for i in 0..ne {
            let (u, _) = c.total.edges[i];
            let e = c.proj_e.table[i];
            uf.union(i, out_lift[action.act[g][u]][e]);
        }
    }
    let orbits = uf.classes();
    let mut edges = Vec::with_capacity(orbits.len());
    let mut proj_e = Vec::with_capacity(orbits.len());
    for orbit in &orbits {
        let i = orbit[0];
        let (u, v) = c.total.edges[i];
        debug_assert!(orbit.iter().all(|&j| {
            c.proj_e.table[j] == c.proj_e.table[i]
                && q.table[c.total.edges[j].0] == q.table[u]
                && q.table[c.total.edges[j].1] == q.table[v]
        }));
        edges.push((q.table[u], q.table[v]));
        proj_e.push(c.proj_e.table[i]);
    }
    let total = Graph::new(FinSet::new(q.cod.size), edges)?;
    let mut proj_v = vec![usize::MAX; q.cod.size];
    for x in 0..c.total.vertices.size {
        if proj_v[q.table[x]] == usize::MAX {
            proj_v[q.table[x]] = c.proj_v.table[x];
        }
    }
    CoverInstance::new(
        c.base.clone(),
        total,
        FinMap::from_table(proj_v, c.base.vertices.size)?,
        FinMap::from_table(proj_e, c.base.edges.len())?,
    )
}

/// The subgroup/quotient correspondence run on the deck-group splitting,
/// plus one quotient cover per quotient-lattice node, in node order.
pub fn intermediate_covers(
    c: &CoverInstance,
    caps: &Caps,
) -> Result<(CorrespondenceResult, Vec<CoverInstance>)> {
    let verdict = cover_galois_verdict(c, caps)?;
    if !verdict.galois_cover {
        return Err(Error::NotGalois {
            detail: format!(
                "deck group of order {} does not act transitively on {} sheets",
                verdict.group.order,
                c.sheets()
            ),
        });
    }
    let (deck, action) = deck_group(c, caps)?;
    let all: Vec<usize> = (0..deck.order).collect();
    let splitting = deck_splitting(c, &deck, &action, &all)?;
    let corr = full_correspondence(&splitting, caps)?;

    let qidx: Vec<usize> = (0..corr.quotient_lattice.nodes.len()).collect();
    let covers = crate::par::map_vec(&qidx, |&qi| {
        let (si, _) = corr
            .bijection
            .iter()
            .find(|&&(_, j)| j == qi)
            .expect("the pairing reaches every quotient node");
        let Subgroup::Absolute(h) = &corr.subgroup_lattice.nodes[*si] else {
            unreachable!("deck splittings are absolute")
        };
        quotient_cover(c, &action, h, &corr.quotient_lattice.nodes[qi])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((corr, covers))
}
