//! Finite groupoids presented by tables: action groupoids, congruences as
//! groupoids, isomorphism over a fixed object set, and enumeration of wide
//! subgroupoids. Composition is written `comp[g][f] = g∘f`, defined exactly
//! when `tgt(f) = src(g)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::algebra::GroupAction;
use crate::bits::Bits;
use crate::kernel::{Congruence, FinMap, FinSet};
use crate::{Caps, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupoidSchema", into = "GroupoidSchema")]
pub struct FiniteGroupoid {
    pub objects: FinSet,
    pub arrows: FinSet,
    pub src: FinMap,
    pub tgt: FinMap,
    /// `comp[g][f] = Some(g∘f)` iff `tgt(f) = src(g)`.
    pub comp: Vec<Vec<Option<usize>>>,
    pub ident: FinMap,
    pub inv: FinMap,
}

#[derive(Serialize, Deserialize)]
struct GroupoidSchema {
    objects: usize,
    arrows: usize,
    src: Vec<usize>,
    tgt: Vec<usize>,
    comp: Vec<Vec<Option<usize>>>,
    ident: Vec<usize>,
    inv: Vec<usize>,
}

impl TryFrom<GroupoidSchema> for FiniteGroupoid {
    type Error = Error;
    fn try_from(s: GroupoidSchema) -> Result<Self> {
        FiniteGroupoid::new(
            FinSet::new(s.objects),
            FinSet::new(s.arrows),
            FinMap::from_table(s.src, s.objects)?,
            FinMap::from_table(s.tgt, s.objects)?,
            s.comp,
            FinMap::from_table(s.ident, s.arrows)?,
            FinMap::from_table(s.inv, s.arrows)?,
        )
    }
}

impl From<FiniteGroupoid> for GroupoidSchema {
    fn from(g: FiniteGroupoid) -> Self {
        GroupoidSchema {
            objects: g.objects.size,
            arrows: g.arrows.size,
            src: g.src.table,
            tgt: g.tgt.table,
            comp: g.comp,
            ident: g.ident.table,
            inv: g.inv.table,
        }
    }
}

impl FiniteGroupoid {
    /// Validates every groupoid law on the given tables.
    pub fn new(
        objects: FinSet,
        arrows: FinSet,
        src: FinMap,
        tgt: FinMap,
        comp: Vec<Vec<Option<usize>>>,
        ident: FinMap,
        inv: FinMap,
    ) -> Result<Self> {
        let n_obj = objects.size;
        let n_arr = arrows.size;
        let shape_ok = src.dom.size == n_arr
            && src.cod.size == n_obj
            && tgt.dom.size == n_arr
            && tgt.cod.size == n_obj
            && ident.dom.size == n_obj
            && ident.cod.size == n_arr
            && inv.dom.size == n_arr
            && inv.cod.size == n_arr
            && comp.len() == n_arr
            && comp.iter().all(|row| row.len() == n_arr);
        if !shape_ok {
            return Err(Error::malformed("FiniteGroupoid", "table shapes disagree"));
        }
        for x in 0..n_obj {
            let e = ident.table[x];
            if src.table[e] != x || tgt.table[e] != x {
                return Err(Error::malformed(
                    "FiniteGroupoid",
                    format!("identity of object {x} has wrong endpoints"),
                ));
            }
        }
        for g in 0..n_arr {
            for f in 0..n_arr {
                match comp[g][f] {
                    Some(h) => {
                        if tgt.table[f] != src.table[g] {
                            return Err(Error::malformed(
                                "FiniteGroupoid",
                                format!("composite defined for non-composable pair ({g},{f})"),
                            ));
                        }
                        if h >= n_arr || src.table[h] != src.table[f] || tgt.table[h] != tgt.table[g] {
                            return Err(Error::malformed(
                                "FiniteGroupoid",
                                format!("composite of ({g},{f}) has wrong endpoints"),
                            ));
                        }
                    }
                    None => {
                        if tgt.table[f] == src.table[g] {
                            return Err(Error::malformed(
                                "FiniteGroupoid",
                                format!("composable pair ({g},{f}) has no composite"),
                            ));
                        }
                    }
                }
            }
        }
        for f in 0..n_arr {
            let e_src = ident.table[src.table[f]];
            let e_tgt = ident.table[tgt.table[f]];
            if comp[f][e_src] != Some(f) || comp[e_tgt][f] != Some(f) {
                return Err(Error::malformed(
                    "FiniteGroupoid",
                    format!("identity laws fail at arrow {f}"),
                ));
            }
        }
        // associativity on composable triples
        for f in 0..n_arr {
            for g in 0..n_arr {
                let Some(gf) = comp[g][f] else { continue };
                for h in 0..n_arr {
                    let Some(hg) = comp[h][g] else { continue };
                    if comp[h][gf] != comp[hg][f] {
                        return Err(Error::malformed(
                            "FiniteGroupoid",
                            format!("associativity fails at ({h},{g},{f})"),
                        ));
                    }
                }
            }
        }
        for f in 0..n_arr {
            let i = inv.table[f];
            if src.table[i] != tgt.table[f] || tgt.table[i] != src.table[f] {
                return Err(Error::malformed(
                    "FiniteGroupoid",
                    format!("inverse of arrow {f} has wrong endpoints"),
                ));
            }
            if comp[i][f] != Some(ident.table[src.table[f]])
                || comp[f][i] != Some(ident.table[tgt.table[f]])
            {
                return Err(Error::malformed(
                    "FiniteGroupoid",
                    format!("inverse laws fail at arrow {f}"),
                ));
            }
        }
        Ok(FiniteGroupoid {
            objects,
            arrows,
            src,
            tgt,
            comp,
            ident,
            inv,
        })
    }

    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.comp[g][f]
    }

    pub fn is_identity(&self, f: usize) -> bool {
        self.ident.table[self.src.table[f]] == f
    }

    /// The full subgroupoid on a closed arrow subset, arrows reindexed in
    /// the order given. Fails if the subset is not closed.
    pub fn restrict(&self, arrows: &[usize]) -> Result<FiniteGroupoid> {
        let mut pos = vec![usize::MAX; self.arrows.size];
        for (k, &a) in arrows.iter().enumerate() {
            if a >= self.arrows.size || pos[a] != usize::MAX {
                return Err(Error::malformed("restriction", "arrow subset has bad or repeated entries"));
            }
            pos[a] = k;
        }
        let lookup = |a: usize| -> Result<usize> {
            if pos[a] == usize::MAX {
                Err(Error::malformed("restriction", format!("arrow subset not closed: misses {a}")))
            } else {
                Ok(pos[a])
            }
        };
        let n = arrows.len();
        let src = FinMap::from_table(arrows.iter().map(|&a| self.src.table[a]).collect(), self.objects.size)?;
        let tgt = FinMap::from_table(arrows.iter().map(|&a| self.tgt.table[a]).collect(), self.objects.size)?;
        let mut ident_tbl = Vec::with_capacity(self.objects.size);
        for x in 0..self.objects.size {
            ident_tbl.push(lookup(self.ident.table[x])?);
        }
        let mut inv_tbl = Vec::with_capacity(n);
        for &a in arrows {
            inv_tbl.push(lookup(self.inv.table[a])?);
        }
        let mut comp = vec![vec![None; n]; n];
        for (gi, &g) in arrows.iter().enumerate() {
            for (fi, &f) in arrows.iter().enumerate() {
                if let Some(h) = self.comp[g][f] {
                    comp[gi][fi] = Some(lookup(h)?);
                }
            }
        }
        FiniteGroupoid::new(
            self.objects.clone(),
            FinSet::new(n),
            src,
            tgt,
            comp,
            FinMap::from_table(ident_tbl, n)?,
            FinMap::from_table(inv_tbl, n)?,
        )
    }
}

/// The action groupoid of a group action. Arrow `g·m + x` stands for the
/// pair `(g, x)` with source `x`, target `g·x`, and `(h, g·x)∘(g, x) =
/// (hg, x)`.
pub fn action_groupoid(a: &GroupAction) -> FiniteGroupoid {
    let n = a.group.order;
    let m = a.carrier.size;
    let arrow = |g: usize, x: usize| g * m + x;
    let n_arr = n * m;
    let mut src = Vec::with_capacity(n_arr);
    let mut tgt = Vec::with_capacity(n_arr);
    for g in 0..n {
        for x in 0..m {
            src.push(x);
            tgt.push(a.act[g][x]);
        }
    }
    let ident = (0..m).map(|x| arrow(a.group.identity, x)).collect();
    let mut inv = Vec::with_capacity(n_arr);
    for g in 0..n {
        for x in 0..m {
            inv.push(arrow(a.group.inv(g), a.act[g][x]));
        }
    }
    let mut comp = vec![vec![None; n_arr]; n_arr];
    for g in 0..n {
        for x in 0..m {
            let f = arrow(g, x);
            let gx = a.act[g][x];
            for h in 0..n {
                comp[arrow(h, gx)][f] = Some(arrow(a.group.mul(h, g), x));
            }
        }
    }
    FiniteGroupoid::new(
        a.carrier.clone(),
        FinSet::new(n_arr),
        FinMap::from_table(src, m).expect("source table in range"),
        FinMap::from_table(tgt, m).expect("target table in range"),
        comp,
        FinMap::from_table(ident, n_arr).expect("identity table in range"),
        FinMap::from_table(inv, n_arr).expect("inverse table in range"),
    )
    .expect("action groupoid satisfies the groupoid laws")
}

/// An equivalence relation as a groupoid: one arrow per related pair,
/// `(y,z)∘(x,y) = (x,z)`.
pub fn congruence_as_groupoid(c: &Congruence) -> FiniteGroupoid {
    let pairs = c.pair_list();
    let index = |x: usize, y: usize| -> usize {
        pairs.binary_search(&(x, y)).expect("pair belongs to the congruence")
    };
    let n_arr = pairs.len();
    let m = c.carrier.size;
    let src = pairs.iter().map(|&(x, _)| x).collect();
    let tgt = pairs.iter().map(|&(_, y)| y).collect();
    let ident = (0..m).map(|x| index(x, x)).collect();
    let inv = pairs.iter().map(|&(x, y)| index(y, x)).collect();
    let mut comp = vec![vec![None; n_arr]; n_arr];
    for (fi, &(x, y)) in pairs.iter().enumerate() {
        for (gi, &(y2, z)) in pairs.iter().enumerate() {
            if y2 == y {
                comp[gi][fi] = Some(index(x, z));
            }
        }
    }
    FiniteGroupoid::new(
        c.carrier.clone(),
        FinSet::new(n_arr),
        FinMap::from_table(src, m).expect("source table in range"),
        FinMap::from_table(tgt, m).expect("target table in range"),
        comp,
        FinMap::from_table(ident, n_arr).expect("identity table in range"),
        FinMap::from_table(inv, n_arr).expect("inverse table in range"),
    )
    .expect("congruence groupoid satisfies the groupoid laws")
}

/// Whether a given arrow bijection is a groupoid isomorphism fixing each
/// object.
pub fn is_groupoid_iso_over_objects(g1: &FiniteGroupoid, g2: &FiniteGroupoid, phi: &FinMap) -> bool {
    if g1.objects.size != g2.objects.size
        || phi.dom.size != g1.arrows.size
        || phi.cod.size != g2.arrows.size
        || !phi.is_bijective()
    {
        return false;
    }
    let p = &phi.table;
    for f in 0..g1.arrows.size {
        if g2.src.table[p[f]] != g1.src.table[f]
            || g2.tgt.table[p[f]] != g1.tgt.table[f]
            || g2.inv.table[p[f]] != p[g1.inv.table[f]]
        {
            return false;
        }
    }
    for x in 0..g1.objects.size {
        if p[g1.ident.table[x]] != g2.ident.table[x] {
            return false;
        }
    }
    for g in 0..g1.arrows.size {
        for f in 0..g1.arrows.size {
            let lhs = g1.comp[g][f].map(|h| p[h]);
            let rhs = g2.comp[p[g]][p[f]];
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Searches for an arrow bijection commuting with all structure maps and
/// fixing objects pointwise. Backtracking over arrows grouped by endpoint
/// pair.
pub fn groupoid_iso_over_objects(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> Result<Option<FinMap>> {
    if g1.objects.size != g2.objects.size {
        return Err(Error::ObjectMismatch {
            left: g1.objects.size,
            right: g2.objects.size,
        });
    }
    let n = g1.arrows.size;
    if n != g2.arrows.size {
        return Ok(None);
    }
    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];
    // identities are forced
    for x in 0..g1.objects.size {
        let a = g1.ident.table[x];
        let b = g2.ident.table[x];
        if assign[a] != usize::MAX && assign[a] != b {
            return Ok(None);
        }
        assign[a] = b;
        used[b] = true;
    }
    fn consistent(g1: &FiniteGroupoid, g2: &FiniteGroupoid, assign: &[usize], f: usize) -> bool {
        let pf = assign[f];
        if g2.src.table[pf] != g1.src.table[f] || g2.tgt.table[pf] != g1.tgt.table[f] {
            return false;
        }
        let inv_f = g1.inv.table[f];
        if assign[inv_f] != usize::MAX && g2.inv.table[pf] != assign[inv_f] {
            return false;
        }
        for g in 0..g1.arrows.size {
            if assign[g] == usize::MAX {
                continue;
            }
            for (a, b) in [(f, g), (g, f)] {
                if let Some(c) = g1.comp[a][b] {
                    match g2.comp[assign[a]][assign[b]] {
                        None => return false,
                        Some(c2) => {
                            if assign[c] != usize::MAX && assign[c] != c2 {
                                return false;
                            }
                        }
                    }
                } else if g2.comp[assign[a]][assign[b]].is_some() {
                    return false;
                }
            }
        }
        true
    }
    fn search(
        g1: &FiniteGroupoid,
        g2: &FiniteGroupoid,
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let Some(f) = assign.iter().position(|&v| v == usize::MAX) else {
            return true;
        };
        for cand in 0..g2.arrows.size {
            if used[cand] {
                continue;
            }
            assign[f] = cand;
            used[cand] = true;
            if consistent(g1, g2, assign, f) && search(g1, g2, assign, used) {
                return true;
            }
            assign[f] = usize::MAX;
            used[cand] = false;
        }
        false
    }
    if !(0..n).filter(|&f| assign[f] != usize::MAX).all(|f| consistent(g1, g2, &assign, f)) {
        return Ok(None);
    }
    if !search(g1, g2, &mut assign, &mut used) {
        return Ok(None);
    }
    let phi = FinMap::from_table(assign, n)?;
    debug_assert!(is_groupoid_iso_over_objects(g1, g2, &phi));
    Ok(Some(phi))
}

/// All arrow subsets containing every identity and closed under composition
/// and inverse, as sorted arrow lists ordered lexicographically.
pub fn wide_subgroupoids(g: &FiniteGroupoid, caps: &Caps) -> Result<Vec<Vec<usize>>> {
    caps.arrows(g.arrows.size)?;
    let n = g.arrows.size;
    let base: Vec<usize> = {
        let mut ids: Vec<usize> = g.ident.table.clone();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    // close a seed set under comp and inv, composing new arrows against all
    let close = |seed: &[usize]| -> Vec<usize> {
        let mut set = Bits::new(n);
        let mut members: Vec<usize> = Vec::new();
        let mut queue: Vec<usize> = Vec::new();
        for &a in base.iter().chain(seed) {
            if !set.get(a) {
                set.set(a);
                members.push(a);
                queue.push(a);
            }
        }
        while let Some(a) = queue.pop() {
            let ia = g.inv.table[a];
            if !set.get(ia) {
                set.set(ia);
                members.push(ia);
                queue.push(ia);
            }
            let mut i = 0;
            while i < members.len() {
                let b = members[i];
                for c in [g.comp[a][b], g.comp[b][a]] {
                    if let Some(c) = c {
                        if !set.get(c) {
                            set.set(c);
                            members.push(c);
                            queue.push(c);
                        }
                    }
                }
                i += 1;
            }
        }
        members.sort_unstable();
        members
    };
    let root = close(&[]);
    let mut known: BTreeSet<Vec<usize>> = BTreeSet::from([root.clone()]);
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..n {
                if s.binary_search(&a).is_ok() {
                    continue;
                }
                let mut seed = s.clone();
                seed.push(a);
                let t = close(&seed);
                if known.insert(t.clone()) {
                    next.push(t);
                }
            }
        }
        frontier = next;
    }
    Ok(known.into_iter().collect())
}

/// If `sub` equals `{(h, x) | h ∈ H, x ∈ M}` for a subgroup `H` of the
/// acting group, returns `H` as a sorted element list.
pub fn is_h_ltimes_m(g: &FiniteGroupoid, sub: &[usize], a: &GroupAction) -> Result<Option<Vec<usize>>> {
    let expected = action_groupoid(a);
    if *g != expected {
        return Err(Error::NotActionGroupoid {
            detail: "arrows are not indexed as pairs (group element, carrier point)".into(),
        });
    }
    let m = a.carrier.size;
    let n = a.group.order;
    let mut per_group = vec![0usize; n];
    for &arrow in sub {
        if arrow >= n * m {
            return Err(Error::malformed("arrow subset", format!("arrow {arrow} out of range")));
        }
        per_group[arrow / m] += 1;
    }
    let mut h = Vec::new();
    for (gi, &count) in per_group.iter().enumerate() {
        if count == m {
            h.push(gi);
        } else if count != 0 {
            return Ok(None);
        }
    }
    if sub.len() != h.len() * m {
        return Ok(None);
    }
    if !a.group.is_subgroup(&h) {
        return Ok(None);
    }
    Ok(Some(h))
}
