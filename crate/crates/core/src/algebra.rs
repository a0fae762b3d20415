//! Finite groups by multiplication table, their actions, and base-indexed
//! families of groups (group bundles). Groups stay small here; every
//! algorithm is exhaustive and deterministic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kernel::{FinMap, FinSet};
use crate::{Caps, Error, Result};

/// A finite group: a validated Cayley table with cached identity and
/// inverses. `cayley[a][b]` is the product `a·b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupSchema", into = "GroupSchema")]
pub struct FiniteGroup {
    pub order: usize,
    pub cayley: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GroupSchema {
    order: usize,
    cayley: Vec<Vec<usize>>,
}

impl TryFrom<GroupSchema> for FiniteGroup {
    type Error = Error;
    fn try_from(s: GroupSchema) -> Result<Self> {
        if s.cayley.len() != s.order {
            return Err(Error::malformed("FiniteGroup", "cayley size differs from order"));
        }
        check_group(s.cayley)
    }
}

impl From<FiniteGroup> for GroupSchema {
    fn from(g: FiniteGroup) -> Self {
        GroupSchema {
            order: g.order,
            cayley: g.cayley,
        }
    }
}

impl FiniteGroup {
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn trivial() -> Self {
        FiniteGroup {
            order: 1,
            cayley: vec![vec![0]],
            identity: 0,
            inverse: vec![0],
        }
    }

    /// Cyclic group of order n, addition mod n.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let cayley = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let inverse = (0..n).map(|a| (n - a) % n).collect();
        FiniteGroup {
            order: n,
            cayley,
            identity: 0,
            inverse,
        }
    }

    /// The Klein four-group as bitwise xor on two bits.
    pub fn klein() -> Self {
        let cayley = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        FiniteGroup {
            order: 4,
            cayley,
            identity: 0,
            inverse: (0..4).collect(),
        }
    }

    /// Componentwise product of the given groups. Element indices are
    /// mixed-radix with the first factor most significant, so tuple order
    /// equals index order.
    pub fn direct_product(factors: &[&FiniteGroup]) -> Self {
        let order: usize = factors.iter().map(|g| g.order).product();
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].order;
        }
        let decode = |mut idx: usize| -> Vec<usize> {
            factors
                .iter()
                .zip(&strides)
                .map(|(g, &s)| {
                    let e = idx / s;
                    idx %= s;
                    debug_assert!(e < g.order);
                    e
                })
                .collect()
        };
        let encode =
            |tuple: &[usize]| -> usize { tuple.iter().zip(&strides).map(|(&e, &s)| e * s).sum() };
        let mut cayley = vec![vec![0; order]; order];
        for a in 0..order {
            let ta = decode(a);
            for b in 0..order {
                let tb = decode(b);
                let prod: Vec<usize> = factors
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g.mul(ta[i], tb[i]))
                    .collect();
                cayley[a][b] = encode(&prod);
            }
        }
        let identity = encode(
            &factors.iter().map(|g| g.identity).collect::<Vec<_>>(),
        );
        let inverse = (0..order)
            .map(|a| {
                let ta = decode(a);
                encode(
                    &factors
                        .iter()
                        .enumerate()
                        .map(|(i, g)| g.inv(ta[i]))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        FiniteGroup {
            order,
            cayley,
            identity,
            inverse,
        }
    }

    /// Multiplicative order of an element.
    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Closure of a subset under product (contains the identity).
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut members: BTreeSet<usize> = gens.iter().copied().collect();
        members.insert(self.identity);
        loop {
            let mut fresh = Vec::new();
            for &a in &members {
                for &b in &members {
                    let p = self.mul(a, b);
                    if !members.contains(&p) {
                        fresh.push(p);
                    }
                }
            }
            if fresh.is_empty() {
                return members.into_iter().collect();
            }
            members.extend(fresh);
        }
    }

    /// Whether a sorted element set is a subgroup.
    pub fn is_subgroup(&self, set: &[usize]) -> bool {
        let members: BTreeSet<usize> = set.iter().copied().collect();
        members.contains(&self.identity)
            && members.iter().all(|&a| {
                members.contains(&self.inv(a))
                    && members.iter().all(|&b| members.contains(&self.mul(a, b)))
            })
    }

    /// A small generating chain: greedily add the least element outside the
    /// running closure.
    pub fn generating_chain(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut closure = vec![self.identity];
        while closure.len() < self.order {
            let g = (0..self.order)
                .find(|x| !closure.contains(x))
                .expect("proper closure misses an element");
            gens.push(g);
            closure = self.generated_subgroup(&gens);
        }
        gens
    }

    /// Lexicographically minimal Cayley table over all relabelings. The
    /// minimum always pins the identity at 0 (an idempotent at 0 forces it),
    /// so the search runs over the (order-1)! relabelings fixing that.
    /// Intended for small groups; cost grows factorially.
    pub fn canonical_cayley(&self) -> Vec<Vec<usize>> {
        let n = self.order;
        if n == 1 {
            return vec![vec![0]];
        }
        let rest: Vec<usize> = (0..n).filter(|&x| x != self.identity).collect();
        let mut best: Option<Vec<Vec<usize>>> = None;
        for perm in crate::kernel::permutations_of(n - 1) {
            // relabel: identity ↦ 0, rest[i] ↦ 1 + perm[i]
            let mut label = vec![0; n];
            for (i, &x) in rest.iter().enumerate() {
                label[x] = 1 + perm[i];
            }
            let mut unlabel = vec![0; n];
            for (x, &l) in label.iter().enumerate() {
                unlabel[l] = x;
            }
            let table: Vec<Vec<usize>> = (0..n)
                .map(|i| (0..n).map(|j| label[self.mul(unlabel[i], unlabel[j])]).collect())
                .collect();
            if best.as_ref().is_none_or(|b| table < *b) {
                best = Some(table);
            }
        }
        best.expect("nonempty relabeling family")
    }
}

/// Validates a multiplication table and computes identity and inverses.
pub fn check_group(cayley: Vec<Vec<usize>>) -> Result<FiniteGroup> {
    let n = cayley.len();
    if n == 0 {
        return Err(Error::NotAGroup {
            reason: "empty table; a group has at least the identity".into(),
        });
    }
    for (a, row) in cayley.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotAGroup {
                reason: format!("row {a} has length {}, expected {n}", row.len()),
            });
        }
        if let Some(&bad) = row.iter().find(|&&v| v >= n) {
            return Err(Error::NotAGroup {
                reason: format!("entry {bad} in row {a} outside 0..{n}"),
            });
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|a| cayley[e][a] == a && cayley[a][e] == a))
        .ok_or_else(|| Error::NotAGroup {
            reason: "no two-sided identity".into(),
        })?;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]] {
                    return Err(Error::NotAGroup {
                        reason: format!("associativity fails at ({a},{b},{c})"),
                    });
                }
            }
        }
    }
    let mut inverse = vec![usize::MAX; n];
    for a in 0..n {
        let inv = (0..n)
            .find(|&b| cayley[a][b] == identity && cayley[b][a] == identity)
            .ok_or_else(|| Error::NotAGroup {
                reason: format!("element {a} has no two-sided inverse"),
            })?;
        inverse[a] = inv;
    }
    Ok(FiniteGroup {
        order: n,
        cayley,
        identity,
        inverse,
    })
}

/// All subgroups as sorted element sets, ordered by (size, elements).
/// Breadth-first closure: extend each known subgroup by one outside element.
/// Every subgroup is reached through its generating chain.
pub fn subgroups(g: &FiniteGroup) -> Vec<Vec<usize>> {
    let trivial = vec![g.identity];
    let mut known: BTreeSet<Vec<usize>> = BTreeSet::from([trivial.clone()]);
    let mut frontier = vec![trivial];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            for x in 0..g.order {
                if h.binary_search(&x).is_ok() {
                    continue;
                }
                let mut gens = h.clone();
                gens.push(x);
                let k = g.generated_subgroup(&gens);
                if known.insert(k.clone()) {
                    next.push(k);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<Vec<usize>> = known.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// An isomorphism `G → H` as an image table, if one exists. Backtracking
/// over images of a generating chain, pruned by element order and extended
/// by closure propagation.
pub fn group_iso(g: &FiniteGroup, h: &FiniteGroup) -> Option<Vec<usize>> {
    if g.order != h.order {
        return None;
    }
    let mut g_orders: Vec<usize> = (0..g.order).map(|a| g.element_order(a)).collect();
    let mut h_orders: Vec<usize> = (0..h.order).map(|a| h.element_order(a)).collect();
    let orders_g = g_orders.clone();
    let orders_h = h_orders.clone();
    g_orders.sort_unstable();
    h_orders.sort_unstable();
    if g_orders != h_orders {
        return None;
    }
    let gens = g.generating_chain();
    let mut image = vec![usize::MAX; g.order];
    image[g.identity] = h.identity;
    fn propagate(
        g: &FiniteGroup,
        h: &FiniteGroup,
        image: &mut Vec<usize>,
    ) -> bool {
        // close the partial map under products until stable or contradiction
        loop {
            let mut changed = false;
            let known: Vec<usize> = (0..g.order).filter(|&a| image[a] != usize::MAX).collect();
            for &a in &known {
                for &b in &known {
                    let p = g.mul(a, b);
                    let ip = h.mul(image[a], image[b]);
                    if image[p] == usize::MAX {
                        image[p] = ip;
                        changed = true;
                    } else if image[p] != ip {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }
    fn assign(
        g: &FiniteGroup,
        h: &FiniteGroup,
        gens: &[usize],
        k: usize,
        image: &Vec<usize>,
        orders_g: &[usize],
        orders_h: &[usize],
    ) -> Option<Vec<usize>> {
        if k == gens.len() {
            // total by construction of the generating chain; verify bijectivity
            let mut seen = vec![false; h.order];
            for &v in image.iter() {
                if v == usize::MAX || std::mem::replace(&mut seen[v], true) {
                    return None;
                }
            }
            return Some(image.clone());
        }
        let gen = gens[k];
        if image[gen] != usize::MAX {
            return assign(g, h, gens, k + 1, image, orders_g, orders_h);
        }
        let used: BTreeSet<usize> = image.iter().copied().filter(|&v| v != usize::MAX).collect();
        for cand in 0..h.order {
            if used.contains(&cand) || orders_h[cand] != orders_g[gen] {
                continue;
            }
            let mut trial = image.clone();
            trial[gen] = cand;
            if propagate(g, h, &mut trial) {
                if let Some(found) = assign(g, h, gens, k + 1, &trial, orders_g, orders_h) {
                    return Some(found);
                }
            }
        }
        None
    }
    assign(g, h, &gens, 0, &image, &orders_g, &orders_h)
}

/// A group acting on a finite carrier: `act[g][x] = g·x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    pub group: FiniteGroup,
    pub carrier: FinSet,
    pub act: Vec<Vec<usize>>,
}

impl GroupAction {
    /// Validates both action axioms exhaustively.
    pub fn new(group: FiniteGroup, carrier: FinSet, act: Vec<Vec<usize>>) -> Result<Self> {
        if act.len() != group.order {
            return Err(Error::malformed("GroupAction", "one row per group element required"));
        }
        for (gi, row) in act.iter().enumerate() {
            if row.len() != carrier.size {
                return Err(Error::malformed(
                    "GroupAction",
                    format!("row {gi} length differs from carrier"),
                ));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= carrier.size) {
                return Err(Error::malformed(
                    "GroupAction",
                    format!("image {bad} outside carrier in row {gi}"),
                ));
            }
        }
        for x in 0..carrier.size {
            if act[group.identity][x] != x {
                return Err(Error::malformed(
                    "GroupAction",
                    format!("identity moves {x}"),
                ));
            }
        }
        for g in 0..group.order {
            for h in 0..group.order {
                let gh = group.mul(g, h);
                for x in 0..carrier.size {
                    if act[g][act[h][x]] != act[gh][x] {
                        return Err(Error::malformed(
                            "GroupAction",
                            format!("action axiom fails at g={g}, h={h}, x={x}"),
                        ));
                    }
                }
            }
        }
        Ok(GroupAction { group, carrier, act })
    }

    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.act[g][x]
    }

    /// Orbit partition, classes by minimal representative.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut uf = crate::kernel::UnionFind::new(self.carrier.size);
        for row in &self.act {
            for (x, &y) in row.iter().enumerate() {
                uf.union(x, y);
            }
        }
        uf.classes()
    }
}

/// One finite group per base point: a group object of the category of sets
/// over the base. No compatibility between fibers is imposed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BundleSchema", into = "BundleSchema")]
pub struct GroupBundle {
    pub base: FinSet,
    pub fibers: Vec<FiniteGroup>,
}

#[derive(Serialize, Deserialize)]
struct BundleSchema {
    base: usize,
    fibers: Vec<FiniteGroup>,
}

impl TryFrom<BundleSchema> for GroupBundle {
    type Error = Error;
    fn try_from(s: BundleSchema) -> Result<Self> {
        GroupBundle::new(FinSet::new(s.base), s.fibers)
    }
}

impl From<GroupBundle> for BundleSchema {
    fn from(b: GroupBundle) -> Self {
        BundleSchema {
            base: b.base.size,
            fibers: b.fibers,
        }
    }
}

impl GroupBundle {
    pub fn new(base: FinSet, fibers: Vec<FiniteGroup>) -> Result<Self> {
        if fibers.len() != base.size {
            return Err(Error::malformed("GroupBundle", "one fiber group per base point required"));
        }
        Ok(GroupBundle { base, fibers })
    }
}

/// A bundle acting fiberwise on the total space of an arrow `pi`. The
/// action never moves a point out of its fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleAction {
    pub bundle: GroupBundle,
    pub pi: FinMap,
    /// Sorted carrier elements over each base point.
    pub fiber_elements: Vec<Vec<usize>>,
    /// `act[b][g][k]`: global image of `fiber_elements[b][k]` under `g`.
    pub act: Vec<Vec<Vec<usize>>>,
}

impl BundleAction {
    pub fn new(bundle: GroupBundle, pi: FinMap, act: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if bundle.base.size != pi.cod.size {
            return Err(Error::malformed("BundleAction", "bundle base differs from pi codomain"));
        }
        if act.len() != bundle.base.size {
            return Err(Error::malformed("BundleAction", "one action per base point required"));
        }
        let fiber_elements = pi.fibers();
        for (b, fiber) in fiber_elements.iter().enumerate() {
            let group = &bundle.fibers[b];
            let rows = &act[b];
            if rows.len() != group.order {
                return Err(Error::malformed(
                    "BundleAction",
                    format!("base point {b}: one row per group element required"),
                ));
            }
            for row in rows {
                if row.len() != fiber.len() {
                    return Err(Error::malformed(
                        "BundleAction",
                        format!("base point {b}: row length differs from fiber"),
                    ));
                }
                for &img in row {
                    if pi.table.get(img).copied() != Some(b) {
                        return Err(Error::malformed(
                            "BundleAction",
                            format!("base point {b}: image {img} leaves the fiber"),
                        ));
                    }
                }
            }
            // fiberwise action axioms
            for (k, &x) in fiber.iter().enumerate() {
                if rows[group.identity][k] != x {
                    return Err(Error::malformed(
                        "BundleAction",
                        format!("base point {b}: identity moves {x}"),
                    ));
                }
            }
            let pos: BTreeMap<usize, usize> = fiber.iter().enumerate().map(|(k, &x)| (x, k)).collect();
            for g in 0..group.order {
                for h in 0..group.order {
                    let gh = group.mul(g, h);
                    for k in 0..fiber.len() {
                        let hk = pos[&rows[h][k]];
                        if rows[g][hk] != rows[gh][k] {
                            return Err(Error::malformed(
                                "BundleAction",
                                format!("base point {b}: action axiom fails at g={g}, h={h}, k={k}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(BundleAction {
            bundle,
            pi,
            fiber_elements,
            act,
        })
    }

    /// Index of a carrier element inside its fiber list.
    pub fn position_in_fiber(&self, x: usize) -> usize {
        let b = self.pi.table[x];
        self.fiber_elements[b]
            .binary_search(&x)
            .expect("carrier element lies in its fiber")
    }

    /// Applies the fiber group element `g` (over the fiber of `x`) to `x`.
    pub fn apply(&self, g: usize, x: usize) -> usize {
        let b = self.pi.table[x];
        self.act[b][g][self.position_in_fiber(x)]
    }
}

/// Generated permutation group with its tautological action. Elements are
/// indexed by sorted permutation table, so the output is canonical
/// regardless of generator order.
pub fn closure_of_permutations(generators: &[FinMap], caps: &Caps) -> Result<(FiniteGroup, GroupAction)> {
    let n = match generators.first() {
        Some(g) => g.dom.size,
        None => {
            return Err(Error::malformed("closure_of_permutations", "at least one generator required"))
        }
    };
    for g in generators {
        if g.dom.size != n || g.cod.size != n {
            return Err(Error::malformed("closure_of_permutations", "generators on different carriers"));
        }
        if !g.is_bijective() {
            return Err(Error::malformed("closure_of_permutations", "generator is not a bijection"));
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut members: BTreeSet<Vec<usize>> = BTreeSet::from([identity.clone()]);
    let mut queue: Vec<Vec<usize>> = vec![identity.clone()];
    while let Some(cur) = queue.pop() {
        for g in generators {
            // left-multiply: (g ∘ cur)(x) = g(cur(x))
            let next: Vec<usize> = cur.iter().map(|&x| g.table[x]).collect();
            if members.insert(next.clone()) {
                caps.closure_order(members.len())?;
                queue.push(next);
            }
        }
    }
    let elements: Vec<Vec<usize>> = members.into_iter().collect();
    let index: BTreeMap<&Vec<usize>, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let order = elements.len();
    let mut cayley = vec![vec![0; order]; order];
    for (a, pa) in elements.iter().enumerate() {
        for (b, pb) in elements.iter().enumerate() {
            // product acts as pa after pb
            let prod: Vec<usize> = pb.iter().map(|&x| pa[x]).collect();
            cayley[a][b] = index[&prod];
        }
    }
    let group = check_group(cayley)?;
    let action = GroupAction::new(group.clone(), FinSet::new(n), elements)?;
    Ok((group, action))
}

/// The product group of all fibers: global sections of the bundle.
/// Indices are mixed-radix tuples, base point 0 most significant.
pub fn sections(bundle: &GroupBundle, caps: &Caps) -> Result<FiniteGroup> {
    let order: usize = bundle.fibers.iter().map(|g| g.order).product();
    caps.group_order(order)?;
    let refs: Vec<&FiniteGroup> = bundle.fibers.iter().collect();
    Ok(FiniteGroup::direct_product(&refs))
}

/// Decodes a sections-group index into one element per base point.
pub fn section_tuple(bundle: &GroupBundle, mut idx: usize) -> Vec<usize> {
    let mut strides = vec![1; bundle.fibers.len()];
    for i in (0..bundle.fibers.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * bundle.fibers[i + 1].order;
    }
    strides
        .iter()
        .zip(&bundle.fibers)
        .map(|(&s, g)| {
            let e = idx / s;
            idx %= s;
            debug_assert!(e < g.order);
            e
        })
        .collect()
}
