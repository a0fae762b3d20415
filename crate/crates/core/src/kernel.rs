//! Finite sets and maps: pullbacks, kernel pairs, coequalizers, fiberwise
//! automorphisms, and the epimorphism taxonomy.
//!
//! Elements are canonical indices `0..size`. Labels, when present, are
//! display metadata only; two sets interact through their sizes. Every
//! enumeration here emits lexicographically smallest representatives first,
//! so equal inputs give byte-equal outputs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite set: the indices `0..size`, optionally labeled for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSet {
    pub size: usize,
    pub labels: Option<Vec<String>>,
}

impl FinSet {
    pub fn new(size: usize) -> Self {
        FinSet { size, labels: None }
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::malformed("FinSet", "labels are not pairwise distinct"));
        }
        Ok(FinSet {
            size: labels.len(),
            labels: Some(labels),
        })
    }
}

/// A map between finite sets as an image table: `i ↦ table[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FinMapSchema", into = "FinMapSchema")]
pub struct FinMap {
    pub dom: FinSet,
    pub cod: FinSet,
    pub table: Vec<usize>,
}

/// Wire format: sizes plus the table, labels optional.
#[derive(Serialize, Deserialize)]
struct FinMapSchema {
    dom: usize,
    cod: usize,
    table: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels_dom: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels_cod: Option<Vec<String>>,
}

impl TryFrom<FinMapSchema> for FinMap {
    type Error = Error;
    fn try_from(s: FinMapSchema) -> Result<Self> {
        let dom = match s.labels_dom {
            Some(l) if l.len() != s.dom => {
                return Err(Error::malformed("FinMap", "labels_dom length differs from dom"))
            }
            Some(l) => FinSet::with_labels(l)?,
            None => FinSet::new(s.dom),
        };
        let cod = match s.labels_cod {
            Some(l) if l.len() != s.cod => {
                return Err(Error::malformed("FinMap", "labels_cod length differs from cod"))
            }
            Some(l) => FinSet::with_labels(l)?,
            None => FinSet::new(s.cod),
        };
        FinMap::new(dom, cod, s.table)
    }
}

impl From<FinMap> for FinMapSchema {
    fn from(m: FinMap) -> Self {
        FinMapSchema {
            dom: m.dom.size,
            cod: m.cod.size,
            table: m.table,
            labels_dom: m.dom.labels,
            labels_cod: m.cod.labels,
        }
    }
}

impl FinMap {
    pub fn new(dom: FinSet, cod: FinSet, table: Vec<usize>) -> Result<Self> {
        if table.len() != dom.size {
            return Err(Error::malformed(
                "FinMap",
                format!("table length {} differs from dom size {}", table.len(), dom.size),
            ));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= cod.size) {
            return Err(Error::malformed(
                "FinMap",
                format!("table entry {bad} outside codomain 0..{}", cod.size),
            ));
        }
        Ok(FinMap { dom, cod, table })
    }

    /// Shorthand for unlabeled maps given by the table alone.
    pub fn from_table(table: Vec<usize>, cod_size: usize) -> Result<Self> {
        FinMap::new(FinSet::new(table.len()), FinSet::new(cod_size), table)
    }

    pub fn identity(set: &FinSet) -> Self {
        FinMap {
            dom: set.clone(),
            cod: set.clone(),
            table: (0..set.size).collect(),
        }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// Smallest codomain element with empty fiber, if any.
    pub fn first_missing(&self) -> Option<usize> {
        let mut hit = vec![false; self.cod.size];
        for &v in &self.table {
            hit[v] = true;
        }
        hit.iter().position(|&h| !h)
    }

    pub fn is_surjective(&self) -> bool {
        self.first_missing().is_none()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.size];
        self.table.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.size == self.cod.size && self.is_injective()
    }

    /// Fibers in codomain order; elements ascending within each fiber.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fibers = vec![Vec::new(); self.cod.size];
        for (x, &b) in self.table.iter().enumerate() {
            fibers[b].push(x);
        }
        fibers
    }

    /// Inverse table of a bijection.
    pub fn inverse(&self) -> Result<FinMap> {
        if !self.is_bijective() {
            return Err(Error::malformed("FinMap", "inverse of a non-bijection"));
        }
        let mut table = vec![0; self.dom.size];
        for (x, &y) in self.table.iter().enumerate() {
            table[y] = x;
        }
        Ok(FinMap {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            table,
        })
    }
}

/// g∘f, the composite of `f: A→B` then `g: B→C`.
pub fn compose(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.cod.size != g.dom.size {
        return Err(Error::DomainMismatch {
            context: "compose",
            expected: f.cod.size,
            found: g.dom.size,
        });
    }
    Ok(FinMap {
        dom: f.dom.clone(),
        cod: g.cod.clone(),
        table: f.table.iter().map(|&x| g.table[x]).collect(),
    })
}

/// The pullback of `f: X→Z` and `g: Y→Z`: pairs with equal image, plus the
/// two projections.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub apex: FinSet,
    /// Element `k` of the apex is the pair `pairs[k]`, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    pub p1: FinMap,
    pub p2: FinMap,
}

pub fn fibered_product(f: &FinMap, g: &FinMap) -> Result<Pullback> {
    if f.cod.size != g.cod.size {
        return Err(Error::DomainMismatch {
            context: "fibered_product",
            expected: f.cod.size,
            found: g.cod.size,
        });
    }
    let mut pairs = Vec::new();
    for x in 0..f.dom.size {
        for y in 0..g.dom.size {
            if f.table[x] == g.table[y] {
                pairs.push((x, y));
            }
        }
    }
    let apex = FinSet::new(pairs.len());
    let p1 = FinMap {
        dom: apex.clone(),
        cod: f.dom.clone(),
        table: pairs.iter().map(|&(x, _)| x).collect(),
    };
    let p2 = FinMap {
        dom: apex.clone(),
        cod: g.dom.clone(),
        table: pairs.iter().map(|&(_, y)| y).collect(),
    };
    Ok(Pullback { apex, pairs, p1, p2 })
}

/// An internal equivalence relation on a carrier set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CongruenceSchema", into = "CongruenceSchema")]
pub struct Congruence {
    pub carrier: FinSet,
    pub pairs: BTreeSet<(usize, usize)>,
}

/// Wire format: carrier size plus the class partition. Labels are not
/// carried.
#[derive(Serialize, Deserialize)]
struct CongruenceSchema {
    carrier: usize,
    classes: Vec<Vec<usize>>,
}

impl TryFrom<CongruenceSchema> for Congruence {
    type Error = Error;
    fn try_from(s: CongruenceSchema) -> Result<Self> {
        Congruence::from_partition(FinSet::new(s.carrier), &s.classes)
    }
}

impl From<Congruence> for CongruenceSchema {
    fn from(c: Congruence) -> Self {
        CongruenceSchema {
            carrier: c.carrier.size,
            classes: c.classes(),
        }
    }
}

impl Congruence {
    /// Validates reflexivity, symmetry, transitivity, and range.
    pub fn new(carrier: FinSet, pairs: BTreeSet<(usize, usize)>) -> Result<Self> {
        for &(i, j) in &pairs {
            if i >= carrier.size || j >= carrier.size {
                return Err(Error::malformed("Congruence", format!("pair ({i},{j}) out of range")));
            }
            if !pairs.contains(&(j, i)) {
                return Err(Error::malformed("Congruence", format!("missing symmetric pair ({j},{i})")));
            }
        }
        for i in 0..carrier.size {
            if !pairs.contains(&(i, i)) {
                return Err(Error::malformed("Congruence", format!("missing reflexive pair ({i},{i})")));
            }
        }
        for &(i, j) in &pairs {
            for k in 0..carrier.size {
                if pairs.contains(&(j, k)) && !pairs.contains(&(i, k)) {
                    return Err(Error::malformed(
                        "Congruence",
                        format!("not transitive: ({i},{j}),({j},{k}) without ({i},{k})"),
                    ));
                }
            }
        }
        Ok(Congruence { carrier, pairs })
    }

    /// Builds the relation whose classes are the given blocks.
    pub fn from_partition(carrier: FinSet, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut pairs = BTreeSet::new();
        let mut seen = vec![false; carrier.size];
        for block in blocks {
            for &i in block {
                if i >= carrier.size || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::malformed("Congruence", "blocks do not partition the carrier"));
                }
                for &j in block {
                    pairs.insert((i, j));
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::malformed("Congruence", "blocks do not cover the carrier"));
        }
        Ok(Congruence { carrier, pairs })
    }

    /// Classes sorted by minimal representative; elements ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.carrier.size);
        for &(i, j) in &self.pairs {
            uf.union(i, j);
        }
        uf.classes()
    }

    /// The canonical quotient map onto class indices (classes ordered by
    /// minimal representative).
    pub fn quotient_map(&self) -> FinMap {
        let classes = self.classes();
        let mut table = vec![0; self.carrier.size];
        for (k, class) in classes.iter().enumerate() {
            for &x in class {
                table[x] = k;
            }
        }
        FinMap {
            dom: self.carrier.clone(),
            cod: FinSet::new(classes.len()),
            table,
        }
    }

    /// The two projection legs of the relation, pairs listed in `pairs` order.
    pub fn projections(&self) -> (FinMap, FinMap) {
        let apex = FinSet::new(self.pairs.len());
        let p1 = FinMap {
            dom: apex.clone(),
            cod: self.carrier.clone(),
            table: self.pairs.iter().map(|&(i, _)| i).collect(),
        };
        let p2 = FinMap {
            dom: apex,
            cod: self.carrier.clone(),
            table: self.pairs.iter().map(|&(_, j)| j).collect(),
        };
        (p1, p2)
    }

    /// Pair list in sorted order, for arrow indexing.
    pub fn pair_list(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().copied().collect()
    }

    /// Containment as relations on the same carrier.
    pub fn le(&self, other: &Congruence) -> bool {
        self.pairs.is_subset(&other.pairs)
    }
}

/// The kernel pair of any map: pairs with equal image.
pub fn kernel_pair(pi: &FinMap) -> Congruence {
    let mut pairs = BTreeSet::new();
    for x in 0..pi.dom.size {
        for y in 0..pi.dom.size {
            if pi.table[x] == pi.table[y] {
                pairs.insert((x, y));
            }
        }
    }
    Congruence {
        carrier: pi.dom.clone(),
        pairs,
    }
}

/// Coequalizer of a parallel pair: the quotient of the common codomain by
/// the equivalence closure of `{(f(x), g(x))}`. Classes are indexed by
/// minimal representative, ascending.
pub fn coequalizer(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.dom.size != g.dom.size {
        return Err(Error::DomainMismatch {
            context: "coequalizer",
            expected: f.dom.size,
            found: g.dom.size,
        });
    }
    if f.cod.size != g.cod.size {
        return Err(Error::DomainMismatch {
            context: "coequalizer",
            expected: f.cod.size,
            found: g.cod.size,
        });
    }
    let mut uf = UnionFind::new(f.cod.size);
    for x in 0..f.dom.size {
        uf.union(f.table[x], g.table[x]);
    }
    let classes = uf.classes();
    let mut table = vec![0; f.cod.size];
    for (k, class) in classes.iter().enumerate() {
        for &x in class {
            table[x] = k;
        }
    }
    Ok(FinMap {
        dom: f.cod.clone(),
        cod: FinSet::new(classes.len()),
        table,
    })
}

/// True iff `q` is a coequalizer of `(f, g)`: it must merge exactly what the
/// pair forces. Checked by comparing `q` with the canonical coequalizer
/// through a bijective comparison map.
pub fn is_coequalizer_of(f: &FinMap, g: &FinMap, q: &FinMap) -> bool {
    if q.dom.size != f.cod.size {
        return false;
    }
    if (0..f.dom.size).any(|x| q.table[f.table[x]] != q.table[g.table[x]]) {
        return false;
    }
    let canon = match coequalizer(f, g) {
        Ok(c) => c,
        Err(_) => return false,
    };
    // comparison u: canon classes -> cod(q), u(canon(x)) = q(x)
    let mut u = vec![usize::MAX; canon.cod.size];
    for x in 0..q.dom.size {
        let c = canon.table[x];
        if u[c] == usize::MAX {
            u[c] = q.table[x];
        } else if u[c] != q.table[x] {
            return false;
        }
    }
    // u total (canon surjective), must be a bijection onto cod(q)
    let mut seen = vec![false; q.cod.size];
    for &v in &u {
        if v == usize::MAX || std::mem::replace(&mut seen[v], true) {
            return false;
        }
    }
    seen.iter().all(|&s| s)
}

/// All bijections of the domain commuting with `pi`, i.e. the product of
/// the fiber symmetric groups, in lexicographic table order.
pub fn aut_over_base(pi: &FinMap) -> Vec<FinMap> {
    let fibers = pi.fibers();
    // cartesian product of per-fiber permutations
    let mut tables = vec![(0..pi.dom.size).collect::<Vec<usize>>()];
    for fiber in &fibers {
        if fiber.len() < 2 {
            continue;
        }
        let perms = permutations_of(fiber.len());
        let mut next = Vec::with_capacity(tables.len() * perms.len());
        for t in &tables {
            for perm in &perms {
                let mut t2 = t.clone();
                for (slot, &p) in perm.iter().enumerate() {
                    t2[fiber[slot]] = fiber[p];
                }
                next.push(t2);
            }
        }
        tables = next;
    }
    tables.sort();
    tables
        .into_iter()
        .map(|table| FinMap {
            dom: pi.dom.clone(),
            cod: pi.dom.clone(),
            table,
        })
        .collect()
}

/// Whether `pi` is the categorical quotient of its domain by the fiberwise
/// automorphism group. Decided by comparing the orbit partition with the
/// fibration; for |M| ≤ 6 the factorization property is additionally
/// confirmed by enumerating every invariant map into every codomain with
/// |Z| ≤ |M| (invariant maps are exactly the maps out of the orbit
/// quotient, so the enumeration is over those).
pub fn is_normal_epi(pi: &FinMap) -> Result<bool> {
    if let Some(missing) = pi.first_missing() {
        return Err(Error::NotEpi { missing });
    }
    let m = pi.dom.size;
    // orbits of the fiber symmetric groups, from transposition generators
    let mut uf = UnionFind::new(m);
    for fiber in pi.fibers() {
        for w in fiber.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let orbits = uf.classes();
    if orbits.len() != pi.cod.size {
        return Ok(false);
    }
    let mut seen = vec![false; pi.cod.size];
    for class in &orbits {
        let b = pi.table[class[0]];
        if class.iter().any(|&x| pi.table[x] != b) || std::mem::replace(&mut seen[b], true) {
            return Ok(false);
        }
    }
    if m <= 6 {
        let orbit_of = {
            let mut t = vec![0; m];
            for (k, class) in orbits.iter().enumerate() {
                for &x in class {
                    t[x] = k;
                }
            }
            t
        };
        for z in 1..=m {
            for q in all_tables(orbits.len(), z) {
                // the invariant map f = q ∘ orbit_of must factor through pi,
                // and the factorization is forced on each fiber
                let mut fbar = vec![usize::MAX; pi.cod.size];
                for class in &orbits {
                    fbar[pi.table[class[0]]] = q[orbit_of[class[0]]];
                }
                if (0..m).any(|x| fbar[pi.table[x]] != q[orbit_of[x]]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether every map constant on kernel-pair classes factors uniquely
/// through `pi`. Decided by checking the canonical map from the class set
/// onto the codomain is a bijection.
pub fn is_strict_epi(pi: &FinMap) -> Result<bool> {
    if let Some(missing) = pi.first_missing() {
        return Err(Error::NotEpi { missing });
    }
    let classes = kernel_pair(pi).classes();
    if classes.len() != pi.cod.size {
        return Ok(false);
    }
    let mut seen = vec![false; pi.cod.size];
    for class in &classes {
        let b = pi.table[class[0]];
        if std::mem::replace(&mut seen[b], true) {
            return Ok(false);
        }
    }
    Ok(seen.iter().all(|&s| s))
}

/// The five-flag record of the epimorphism taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpiClassification {
    pub epi: bool,
    pub regular: bool,
    pub effective: bool,
    pub strict: bool,
    pub normal: bool,
}

/// Classifies a map; all flags false when the map is not surjective.
/// The implication chain effective ⟹ regular ⟹ strict holds on every
/// output, each flag computed by its own route.
pub fn epi_classification(pi: &FinMap) -> EpiClassification {
    if !pi.is_surjective() {
        return EpiClassification {
            epi: false,
            regular: false,
            effective: false,
            strict: false,
            normal: false,
        };
    }
    let (p1, p2) = kernel_pair(pi).projections();
    let effective = is_coequalizer_of(&p1, &p2, pi);
    // a regular epi is the coequalizer of some pair, hence of its own
    // kernel pair; the kernel-pair route decides both flags here
    let regular = effective;
    let strict = is_strict_epi(pi).unwrap_or(false);
    let normal = is_normal_epi(pi).unwrap_or(false);
    EpiClassification {
        epi: true,
        regular,
        effective,
        strict,
        normal,
    }
}

/// All image tables of maps `0..len → 0..cod`, lexicographically.
pub fn all_tables(len: usize, cod: usize) -> Vec<Vec<usize>> {
    if cod == 0 {
        return if len == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::with_capacity(cod.pow(len as u32));
    let mut cur = vec![0; len];
    loop {
        out.push(cur.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < cod {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// All surjections `0..m → 0..b` as maps, in table order.
pub fn all_surjections(m: usize, b: usize) -> Vec<FinMap> {
    all_tables(m, b)
        .into_iter()
        .filter(|t| {
            let mut hit = vec![false; b];
            for &v in t {
                hit[v] = true;
            }
            hit.iter().all(|&h| h)
        })
        .map(|t| FinMap::from_table(t, b).expect("table in range"))
        .collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations_of(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as root so class representatives are minimal
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
    }

    /// Classes sorted by minimal representative.
    pub fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for x in 0..n {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}
