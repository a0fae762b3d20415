//! The subgroup/quotient correspondence for a split kernel pair: both
//! ordered sides, the pairing H ↦ q_H with its inverse recovered through
//! the splitting witness, and the restricted splitting for each
//! intermediate quotient. The two lattice adjoints (kernel pair and
//! coequalizer) are exposed separately; in finite sets they are mutually
//! inverse on the classes considered here.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algebra::{subgroups, BundleAction, GroupAction, GroupBundle};
use crate::bits::Bits;
use crate::galois::{is_galois_structure, SplittingData, SplittingStructure};
use crate::groupoid::{action_groupoid, is_h_ltimes_m, wide_subgroupoids};
use crate::kernel::{coequalizer, kernel_pair, Congruence, FinMap};
use crate::{Caps, Error, Result};

/// A finite poset with explicit node payloads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lattice<P> {
    pub nodes: Vec<P>,
    pub leq: BTreeSet<(usize, usize)>,
}

impl<P> Lattice<P> {
    /// Validates that `leq` is a partial order on the node indices.
    pub fn new(nodes: Vec<P>, leq: BTreeSet<(usize, usize)>) -> Result<Self> {
        let n = nodes.len();
        for &(i, j) in &leq {
            if i >= n || j >= n {
                return Err(Error::malformed("Lattice", format!("pair ({i},{j}) out of range")));
            }
            if i != j && leq.contains(&(j, i)) {
                return Err(Error::malformed("Lattice", format!("antisymmetry fails at ({i},{j})")));
            }
        }
        for i in 0..n {
            if !leq.contains(&(i, i)) {
                return Err(Error::malformed("Lattice", format!("reflexivity fails at {i}")));
            }
        }
        // transitivity via bitset rows
        let mut rows: Vec<Bits> = (0..n).map(|_| Bits::new(n)).collect();
        for &(i, j) in &leq {
            rows[i].set(j);
        }
        let idx: Vec<usize> = (0..n).collect();
        let breaches = crate::par::map_vec(&idx, |&i| {
            for j in rows[i].to_indices() {
                for k in rows[j].to_indices() {
                    if !rows[i].get(k) {
                        return Some((i, j, k));
                    }
                }
            }
            None
        });
        if let Some((i, j, k)) = breaches.into_iter().flatten().next() {
            return Err(Error::malformed(
                "Lattice",
                format!("transitivity fails at ({i},{j},{k})"),
            ));
        }
        Ok(Lattice { nodes, leq })
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.leq.contains(&(i, j))
    }
}

/// Both ordered sides of the kernel-pair interval, index-aligned: node `i`
/// of `relations` is the kernel pair of node `i` of `quotients`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaloisConnection {
    /// Congruences contained in the kernel pair, coarsest last.
    pub relations: Lattice<Congruence>,
    /// Quotients through which the arrow factors, ordered opposite to their
    /// kernel pairs (the identity quotient is the largest).
    pub quotients: Lattice<FinMap>,
    /// Quotient node -> its kernel pair's relation node.
    pub kp: Vec<usize>,
    /// Relation node -> its coequalizer's quotient node.
    pub coeq: Vec<usize>,
}

fn bell(n: usize) -> usize {
    // Bell triangle
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![*row.last().expect("row is nonempty")];
        for &v in &row {
            let last = *next.last().expect("row is nonempty");
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// All partitions of `0..k` as block lists, blocks ordered by least element.
fn partitions_of(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    rec(0, k, &mut blocks, &mut out);
    return out;

    fn rec(x: usize, k: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if x == k {
            out.push(blocks.clone());
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(x);
            rec(x + 1, k, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![x]);
        rec(x + 1, k, blocks, out);
        blocks.pop();
    }
}

/// Sort key placing finer partitions first and the coarsest last.
fn coarseness_key(classes: &[Vec<usize>]) -> (usize, Vec<Vec<usize>>) {
    (usize::MAX - classes.len(), classes.to_vec())
}

/// The interval of congruences below the kernel pair of `pi`, with the
/// matching quotients and the two adjoint assignments.
pub fn galois_connection(pi: &FinMap, caps: &Caps) -> Result<GaloisConnection> {
    if let Some(missing) = pi.first_missing() {
        return Err(Error::NotEpi { missing });
    }
    caps.set_size(pi.dom.size)?;
    let fibers = pi.fibers();
    let node_count: usize = fibers.iter().map(|f| bell(f.len())).product();
    caps.lattice_nodes(node_count)?;

    let per_fiber: Vec<Vec<Vec<Vec<usize>>>> = fibers
        .iter()
        .map(|f| {
            partitions_of(f.len())
                .into_iter()
                .map(|blocks| {
                    blocks
                        .into_iter()
                        .map(|block| block.into_iter().map(|k| f[k]).collect())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut congruences: Vec<Congruence> = Vec::with_capacity(node_count);
    let mut choice = vec![0usize; per_fiber.len()];
    'outer: loop {
        let blocks: Vec<Vec<usize>> = choice
            .iter()
            .zip(&per_fiber)
            .flat_map(|(&c, parts)| parts[c].iter().cloned())
            .collect();
        congruences.push(Congruence::from_partition(pi.dom.clone(), &blocks)?);
        let mut i = per_fiber.len();
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < per_fiber[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
    congruences.sort_by_key(|c| coarseness_key(&c.classes()));

    let quotients: Vec<FinMap> = crate::par::map_vec(&congruences, Congruence::quotient_map);
    let n = congruences.len();
    let idx: Vec<usize> = (0..n).collect();
    let rows = crate::par::map_vec(&idx, |&i| {
        (0..n).filter(|&j| congruences[i].le(&congruences[j])).collect::<Vec<usize>>()
    });
    let mut rel_leq = BTreeSet::new();
    let mut quot_leq = BTreeSet::new();
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            rel_leq.insert((i, j));
            quot_leq.insert((j, i));
        }
    }
    Ok(GaloisConnection {
        relations: Lattice::new(congruences, rel_leq)?,
        quotients: Lattice::new(quotients, quot_leq)?,
        kp: (0..n).collect(),
        coeq: (0..n).collect(),
    })
}

/// A subgroup of a splitting's group side: an element subset (absolute) or
/// one element subset per base point (relative).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Subgroup {
    Absolute(Vec<usize>),
    Relative(Vec<Vec<usize>>),
}

fn validate_subgroup(s: &SplittingStructure, h: &Subgroup) -> Result<()> {
    match (&s.data, h) {
        (SplittingData::Absolute { group, .. }, Subgroup::Absolute(set)) => {
            if !group.is_subgroup(set) {
                return Err(Error::NotASubgroup {
                    detail: format!("{set:?} is not a subgroup of the splitting group"),
                });
            }
            Ok(())
        }
        (SplittingData::Relative { bundle, .. }, Subgroup::Relative(family)) => {
            if family.len() != bundle.fibers.len() {
                return Err(Error::NotASubgroup {
                    detail: "one subgroup per base point required".into(),
                });
            }
            for (b, set) in family.iter().enumerate() {
                if !bundle.fibers[b].is_subgroup(set) {
                    return Err(Error::NotASubgroup {
                        detail: format!("{set:?} is not a subgroup of the fiber group over {b}"),
                    });
                }
            }
            Ok(())
        }
        _ => Err(Error::NotASubgroup {
            detail: "subgroup variant differs from the splitting structure".into(),
        }),
    }
}

/// The quotient of the total space by the restricted action: the
/// coequalizer of `(h, x) ↦ h·x` against the projection `(h, x) ↦ x`.
/// Classes are the orbits, labeled by first occurrence.
pub fn quotient_by_subgroup(s: &SplittingStructure, h: &Subgroup) -> Result<FinMap> {
    validate_subgroup(s, h)?;
    let m = s.pi.dom.size;
    let (alpha, proj): (Vec<usize>, Vec<usize>) = match (&s.data, h) {
        (SplittingData::Absolute { action, .. }, Subgroup::Absolute(set)) => set
            .iter()
            .flat_map(|&g| (0..m).map(move |x| (action.act[g][x], x)))
            .unzip(),
        (SplittingData::Relative { action, .. }, Subgroup::Relative(family)) => family
            .iter()
            .enumerate()
            .flat_map(|(b, set)| {
                let fiber = &action.fiber_elements[b];
                set.iter().flat_map(move |&g| {
                    fiber
                        .iter()
                        .enumerate()
                        .map(move |(k, &x)| (action.act[b][g][k], x))
                })
            })
            .unzip(),
        _ => unreachable!("validated above"),
    };
    let f = FinMap::from_table(alpha, m)?;
    let g = FinMap::from_table(proj, m)?;
    let q = coequalizer(&f, &g)?;
    debug_assert!(
        (0..m).all(|x| (0..m).all(|y| q.table[x] != q.table[y] || s.pi.table[x] == s.pi.table[y])),
        "orbits stay within fibers"
    );
    Ok(q)
}

/// Hypothesis check for the correspondence: (a) every wide subgroupoid of
/// the action groupoid is a subgroup acting on the whole carrier, with an
/// offending arrow set as certificate when false; (b) each subgroup's
/// quotient exists and is effective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub a: bool,
    pub a_certificate: Option<Vec<usize>>,
    pub b: bool,
}

/// Runs the hypothesis check on a bare group action; freeness is not
/// assumed.
pub fn check_hypotheses_action(a: &GroupAction, caps: &Caps) -> Result<HypothesisReport> {
    let g = action_groupoid(a);
    let mut report = HypothesisReport {
        a: true,
        a_certificate: None,
        b: true,
    };
    for sub in wide_subgroupoids(&g, caps)? {
        if is_h_ltimes_m(&g, &sub, a)?.is_none() {
            report.a = false;
            report.a_certificate = Some(sub);
            break;
        }
    }
    let m = a.carrier.size;
    for h in subgroups(&a.group) {
        let (alpha, proj): (Vec<usize>, Vec<usize>) = h
            .iter()
            .flat_map(|&gi| (0..m).map(move |x| (a.act[gi][x], x)))
            .unzip();
        let q = coequalizer(&FinMap::from_table(alpha, m)?, &FinMap::from_table(proj, m)?)?;
        let (p1, p2) = kernel_pair(&q).projections();
        report.b &= crate::kernel::is_coequalizer_of(&p1, &p2, &q);
    }
    Ok(report)
}

fn relative_product_form(a: &BundleAction, sub: &[usize]) -> Option<Vec<Vec<usize>>> {
    let nb = a.bundle.base.size;
    let mut offset = vec![0usize; nb + 1];
    for b in 0..nb {
        offset[b + 1] = offset[b] + a.bundle.fibers[b].order * a.fiber_elements[b].len();
    }
    let mut family: Vec<Vec<usize>> = vec![Vec::new(); nb];
    let mut counts: Vec<Vec<usize>> = (0..nb).map(|b| vec![0; a.bundle.fibers[b].order]).collect();
    for &arrow in sub {
        let b = (0..nb).rfind(|&b| offset[b] <= arrow)?;
        let local = arrow - offset[b];
        let fiber_len = a.fiber_elements[b].len();
        counts[b][local / fiber_len] += 1;
    }
    for b in 0..nb {
        let fiber_len = a.fiber_elements[b].len();
        for (g, &c) in counts[b].iter().enumerate() {
            if c == fiber_len {
                family[b].push(g);
            } else if c != 0 {
                return None;
            }
        }
        if !a.bundle.fibers[b].is_subgroup(&family[b]) {
            return None;
        }
    }
    Some(family)
}

/// Hypothesis check for a splitting structure of either variant.
pub fn check_hypotheses(s: &SplittingStructure, caps: &Caps) -> Result<HypothesisReport> {
    match &s.data {
        SplittingData::Absolute { action, .. } => check_hypotheses_action(action, caps),
        SplittingData::Relative { action, .. } => {
            let g = crate::galois::bundle_action_groupoid(action);
            let mut report = HypothesisReport {
                a: true,
                a_certificate: None,
                b: true,
            };
            for sub in wide_subgroupoids(&g, caps)? {
                if relative_product_form(action, &sub).is_none() {
                    report.a = false;
                    report.a_certificate = Some(sub);
                    break;
                }
            }
            for family in subgroup_families(s) {
                let q = quotient_by_subgroup(s, &family)?;
                let (p1, p2) = kernel_pair(&q).projections();
                report.b &= crate::kernel::is_coequalizer_of(&p1, &p2, &q);
            }
            Ok(report)
        }
    }
}

/// All subgroup-side nodes of a splitting, in canonical order.
pub fn subgroup_nodes(s: &SplittingStructure) -> Vec<Subgroup> {
    match &s.data {
        SplittingData::Absolute { group, .. } => {
            subgroups(group).into_iter().map(Subgroup::Absolute).collect()
        }
        SplittingData::Relative { .. } => subgroup_families(s),
    }
}

fn subgroup_families(s: &SplittingStructure) -> Vec<Subgroup> {
    let SplittingData::Relative { bundle, .. } = &s.data else {
        unreachable!("callers guarantee the relative variant")
    };
    let per_fiber: Vec<Vec<Vec<usize>>> = bundle.fibers.iter().map(subgroups).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_fiber.len()];
    loop {
        out.push(Subgroup::Relative(
            choice.iter().zip(&per_fiber).map(|(&c, subs)| subs[c].clone()).collect(),
        ));
        let mut i = per_fiber.len();
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < per_fiber[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Recovers the subgroup of a quotient by pulling the arrows of its kernel
/// pair back through the splitting witness and testing for product form.
pub fn recover_subgroup(s: &SplittingStructure, q: &FinMap) -> Result<Option<Subgroup>> {
    if q.dom.size != s.pi.dom.size {
        return Err(Error::malformed("recover_subgroup", "quotient domain differs from total space"));
    }
    let kp_pi = kernel_pair(&s.pi);
    let pairs = kp_pi.pair_list();
    let mut inverse = vec![usize::MAX; pairs.len()];
    for (arrow, &idx) in s.witness.table.iter().enumerate() {
        inverse[idx] = arrow;
    }
    let mut sub: Vec<usize> = Vec::new();
    for (idx, &(x, y)) in pairs.iter().enumerate() {
        if q.table[x] == q.table[y] {
            sub.push(inverse[idx]);
        }
    }
    sub.sort_unstable();
    match &s.data {
        SplittingData::Absolute { action, .. } => {
            let g = action_groupoid(action);
            Ok(is_h_ltimes_m(&g, &sub, action)?.map(Subgroup::Absolute))
        }
        SplittingData::Relative { action, .. } => {
            Ok(relative_product_form(action, &sub).map(Subgroup::Relative))
        }
    }
}

/// The restriction of a splitting to a subgroup, as a splitting structure
/// for the quotient by that subgroup. The constructor re-verifies the
/// witness onto the quotient's kernel pair.
pub fn restrict_splitting(s: &SplittingStructure, h: &Subgroup, q: &FinMap) -> Result<SplittingStructure> {
    match (&s.data, h) {
        (SplittingData::Absolute { group, action }, Subgroup::Absolute(set)) => {
            let pos = |g: usize| set.binary_search(&g).expect("element of the subgroup");
            let cayley: Vec<Vec<usize>> = set
                .iter()
                .map(|&a| set.iter().map(|&b| pos(group.mul(a, b))).collect())
                .collect();
            let sub = crate::algebra::check_group(cayley)?;
            let act: Vec<Vec<usize>> = set.iter().map(|&g| action.act[g].clone()).collect();
            let action = GroupAction::new(sub.clone(), action.carrier.clone(), act)?;
            SplittingStructure::new_absolute(q, sub, action)
        }
        (SplittingData::Relative { bundle, action }, Subgroup::Relative(family)) => {
            // one fiber group per quotient class, inherited from the class's
            // base point
            let classes = q.fibers();
            let mut sub_fibers = Vec::with_capacity(classes.len());
            let mut act = Vec::with_capacity(classes.len());
            for class in &classes {
                let b = s.pi.table[class[0]];
                let set = &family[b];
                let pos = |g: usize| set.binary_search(&g).expect("element of the subgroup");
                let parent = &bundle.fibers[b];
                let cayley: Vec<Vec<usize>> = set
                    .iter()
                    .map(|&x| set.iter().map(|&y| pos(parent.mul(x, y))).collect())
                    .collect();
                let sub = crate::algebra::check_group(cayley)?;
                let rows: Vec<Vec<usize>> = set
                    .iter()
                    .map(|&g| {
                        class
                            .iter()
                            .map(|&x| action.act[b][g][action.position_in_fiber(x)])
                            .collect()
                    })
                    .collect();
                sub_fibers.push(sub);
                act.push(rows);
            }
            let sub_bundle = GroupBundle::new(q.cod.clone(), sub_fibers)?;
            let action = BundleAction::new(sub_bundle.clone(), q.clone(), act)?;
            SplittingStructure::new_relative(q, sub_bundle, action)
        }
        _ => Err(Error::NotASubgroup {
            detail: "subgroup variant differs from the splitting structure".into(),
        }),
    }
}

/// The full correspondence report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrespondenceResult {
    pub hypothesis_a: bool,
    pub hypothesis_a_certificate: Option<Vec<usize>>,
    pub hypothesis_b: bool,
    pub subgroup_lattice: Lattice<Subgroup>,
    pub quotient_lattice: Lattice<FinMap>,
    /// Subgroup node -> quotient node, verified invertible through the
    /// witness.
    pub bijection: Vec<(usize, usize)>,
    pub order_reversal_verified: bool,
    /// Whether the quotient nodes exhaust the interval below the kernel
    /// pair; equivalent to hypothesis (a) for a splitting.
    pub covers_all_intermediate_quotients: bool,
    /// Restricted splitting per subgroup node, witnessing its quotient.
    pub restrictions: Vec<SplittingStructure>,
    /// Whether each restriction also passes the structure test for its
    /// quotient.
    pub restriction_is_galois_structure: Vec<bool>,
}

/// Builds the subgroup and quotient sides of the correspondence for a
/// splitting, pairs them, and verifies both round trips and order reversal.
/// Hypothesis flags qualify how much of the interval the pairing covers;
/// the mechanics are reported either way.
pub fn full_correspondence(s: &SplittingStructure, caps: &Caps) -> Result<CorrespondenceResult> {
    let hyp = check_hypotheses(s, caps)?;
    let subs = subgroup_nodes(s);
    let quotients: Vec<FinMap> = crate::par::map_vec(&subs, |h| quotient_by_subgroup(s, h))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..quotients.len()).collect();
    order.sort_by_key(|&i| coarseness_key(&kernel_pair(&quotients[i]).classes()));
    let mut position = vec![usize::MAX; quotients.len()];
    for (rank, &i) in order.iter().enumerate() {
        position[i] = rank;
    }
    let quotient_nodes: Vec<FinMap> = order.iter().map(|&i| quotients[i].clone()).collect();
    let bijection: Vec<(usize, usize)> = (0..subs.len()).map(|i| (i, position[i])).collect();

    {
        let mut tables: Vec<&Vec<usize>> = quotient_nodes.iter().map(|q| &q.table).collect();
        tables.sort();
        tables.dedup();
        if tables.len() != quotient_nodes.len() {
            return Err(Error::malformed(
                "full_correspondence",
                "distinct subgroups produced the same quotient",
            ));
        }
    }

    // round trip: the witness recovers each subgroup from its quotient
    let node_idx: Vec<usize> = (0..subs.len()).collect();
    let recovered = crate::par::map_vec(&node_idx, |&i| recover_subgroup(s, &quotients[i]));
    for (i, r) in recovered.into_iter().enumerate() {
        if r?.as_ref() != Some(&subs[i]) {
            return Err(Error::malformed(
                "full_correspondence",
                format!("round trip failed for subgroup node {i}"),
            ));
        }
    }

    let sub_le = |a: &Subgroup, b: &Subgroup| -> bool {
        match (a, b) {
            (Subgroup::Absolute(x), Subgroup::Absolute(y)) => {
                x.iter().all(|e| y.binary_search(e).is_ok())
            }
            (Subgroup::Relative(x), Subgroup::Relative(y)) => x
                .iter()
                .zip(y)
                .all(|(xs, ys)| xs.iter().all(|e| ys.binary_search(e).is_ok())),
            _ => false,
        }
    };
    let sub_rows = crate::par::map_vec(&node_idx, |&i| {
        (0..subs.len()).filter(|&j| sub_le(&subs[i], &subs[j])).collect::<Vec<usize>>()
    });
    let mut sub_leq = BTreeSet::new();
    for (i, row) in sub_rows.iter().enumerate() {
        for &j in row {
            sub_leq.insert((i, j));
        }
    }
    let kernel_pairs: Vec<Congruence> = crate::par::map_vec(&quotient_nodes, kernel_pair);
    let quot_rows = crate::par::map_vec(&node_idx, |&i| {
        (0..quotient_nodes.len()).filter(|&j| kernel_pairs[j].le(&kernel_pairs[i])).collect::<Vec<usize>>()
    });
    let mut quot_leq = BTreeSet::new();
    for (i, row) in quot_rows.iter().enumerate() {
        for &j in row {
            quot_leq.insert((i, j));
        }
    }
    let subgroup_lattice = Lattice::new(subs.clone(), sub_leq)?;
    let quotient_lattice = Lattice::new(quotient_nodes, quot_leq)?;

    let order_reversal_verified = (0..subs.len()).all(|i| {
        (0..subs.len()).all(|j| {
            subgroup_lattice.le(i, j) == quotient_lattice.le(bijection[j].1, bijection[i].1)
        })
    });

    let interval_size: usize = s.pi.fibers().iter().map(|f| bell(f.len())).product();
    let covers_all_intermediate_quotients = subs.len() == interval_size;

    let restricted = crate::par::map_vec(&node_idx, |&i| {
        restrict_splitting(s, &subs[i], &quotients[i]).map(|r| {
            let galois = is_galois_structure(&r);
            (r, galois)
        })
    });
    let mut restrictions = Vec::with_capacity(subs.len());
    let mut restriction_is_galois_structure = Vec::with_capacity(subs.len());
    for entry in restricted {
        let (r, galois) = entry?;
        restriction_is_galois_structure.push(galois);
        restrictions.push(r);
    }

    Ok(CorrespondenceResult {
        hypothesis_a: hyp.a,
        hypothesis_a_certificate: hyp.a_certificate,
        hypothesis_b: hyp.b,
        subgroup_lattice,
        quotient_lattice,
        bijection,
        order_reversal_verified,
        covers_all_intermediate_quotients,
        restrictions,
        restriction_is_galois_structure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteGroup;
    use crate::galois::{enumerate_splittings_absolute, enumerate_splittings_relative};
    use crate::kernel::{FinMap, FinSet};

    fn map(table: Vec<usize>, cod: usize) -> FinMap {
        FinMap::from_table(table, cod).unwrap()
    }

    #[test]
    fn bell_numbers() {
        assert_eq!((0..=6).map(bell).collect::<Vec<_>>(), vec![1, 1, 2, 5, 15, 52, 203]);
        assert_eq!(partitions_of(4).len(), 15);
    }

    #[test]
    fn connection_examples() {
        let caps = Caps::default();

        let bijection = map(vec![1, 0], 2);
        let gc = galois_connection(&bijection, &caps).unwrap();
        assert_eq!(gc.relations.nodes.len(), 1);
        assert_eq!(gc.quotients.nodes.len(), 1);

        let collapse = map(vec![0, 0, 0], 1);
        let gc = galois_connection(&collapse, &caps).unwrap();
        assert_eq!(gc.relations.nodes.len(), 5);
        assert_eq!(gc.quotients.nodes.len(), 5);

        let pi = map(vec![0, 0, 1, 1], 2);
        let gc = galois_connection(&pi, &caps).unwrap();
        assert_eq!(gc.relations.nodes.len(), 4);

        assert!(matches!(
            galois_connection(&map(vec![0, 0], 2), &caps),
            Err(Error::NotEpi { .. })
        ));
        let tight = Caps { max_lattice_nodes: 3, ..Caps::default() };
        assert!(matches!(
            galois_connection(&collapse, &tight),
            Err(Error::CapExceeded { what: "lattice node count", .. })
        ));
    }

    #[test]
    fn connection_adjoint_laws() {
        let caps = Caps::default();
        for pi in [map(vec![0, 0, 0], 1), map(vec![0, 0, 1, 1], 2)] {
            let gc = galois_connection(&pi, &caps).unwrap();
            let n = gc.relations.nodes.len();
            // every congruence here is effective: the two assignments invert
            for i in 0..n {
                assert_eq!(gc.kp[gc.coeq[i]], i);
                assert_eq!(
                    kernel_pair(&gc.quotients.nodes[i]).pairs,
                    gc.relations.nodes[i].pairs
                );
            }
            // R <= KP(q) iff coeq(R) >= q
            for r in 0..n {
                for q in 0..n {
                    let lhs = gc.relations.nodes[r].le(&gc.relations.nodes[gc.kp[q]]);
                    let rhs = gc.quotients.le(q, gc.coeq[r]);
                    assert_eq!(lhs, rhs, "adjunction fails at ({r},{q})");
                }
            }
            // coarsest node comes last and is the kernel pair itself
            assert_eq!(
                gc.relations.nodes.last().unwrap().pairs,
                kernel_pair(&pi).pairs
            );
        }
    }

    fn z4_torsor() -> SplittingStructure {
        let pi = map(vec![0, 0, 0, 0], 1);
        let splits = enumerate_splittings_absolute(&pi, &Caps::default()).unwrap();
        splits
            .into_iter()
            .find(|s| match &s.data {
                SplittingData::Absolute { group, .. } => {
                    crate::algebra::group_iso(group, &FiniteGroup::cyclic(4)).is_some()
                }
                _ => false,
            })
            .expect("the cyclic class exists")
    }

    fn k4_torsor() -> SplittingStructure {
        let pi = map(vec![0, 0, 0, 0], 1);
        let splits = enumerate_splittings_absolute(&pi, &Caps::default()).unwrap();
        splits
            .into_iter()
            .find(|s| match &s.data {
                SplittingData::Absolute { group, .. } => {
                    crate::algebra::group_iso(group, &FiniteGroup::klein()).is_some()
                }
                _ => false,
            })
            .expect("the Klein class exists")
    }

    #[test]
    fn quotient_examples() {
        let s = z4_torsor();
        let trivial = quotient_by_subgroup(&s, &Subgroup::Absolute(vec![0])).unwrap();
        assert!(trivial.is_bijective());

        let full = quotient_by_subgroup(&s, &Subgroup::Absolute(vec![0, 1, 2, 3])).unwrap();
        assert_eq!(full.cod.size, 1);

        let SplittingData::Absolute { group, .. } = &s.data else { unreachable!() };
        let two = (0..4).find(|&g| group.element_order(g) == 2).unwrap();
        let mut h = vec![0, two];
        h.sort_unstable();
        let q = quotient_by_subgroup(&s, &Subgroup::Absolute(h)).unwrap();
        assert_eq!(q.cod.size, 2);
        assert!(q.fibers().iter().all(|c| c.len() == 2));

        let four = (0..4).find(|&g| group.element_order(g) == 4).unwrap();
        assert!(matches!(
            quotient_by_subgroup(&s, &Subgroup::Absolute(vec![0, four])),
            Err(Error::NotASubgroup { .. })
        ));
    }

    #[test]
    fn hypothesis_examples() {
        let caps = Caps::default();

        let bijection = map(vec![0], 1);
        let s = &enumerate_splittings_absolute(&bijection, &caps).unwrap()[0];
        let rep = check_hypotheses(s, &caps).unwrap();
        assert!(rep.a && rep.b && rep.a_certificate.is_none());

        let pi = map(vec![0, 0], 1);
        let s = &enumerate_splittings_absolute(&pi, &caps).unwrap()[0];
        let rep = check_hypotheses(s, &caps).unwrap();
        assert!(rep.a && rep.b);

        // Klein group acting on two points through its quotient: the kernel
        // gives a wide subgroupoid that is not a subgroup times the carrier
        let k4 = FiniteGroup::klein();
        let act: Vec<Vec<usize>> = (0..4)
            .map(|g| if g & 1 == 1 { vec![1, 0] } else { vec![0, 1] })
            .collect();
        let action = GroupAction::new(k4, FinSet::new(2), act).unwrap();
        let rep = check_hypotheses_action(&action, &caps).unwrap();
        assert!(!rep.a);
        assert!(rep.b);
        let cert = rep.a_certificate.unwrap();
        let g = action_groupoid(&action);
        assert!(is_h_ltimes_m(&g, &cert, &action).unwrap().is_none());
        // the certificate is genuinely a wide subgroupoid
        assert!(wide_subgroupoids(&g, &caps).unwrap().contains(&cert));
    }

    #[test]
    fn torsor_correspondence_shapes() {
        let caps = Caps::default();

        let z4 = full_correspondence(&z4_torsor(), &caps).unwrap();
        assert_eq!(z4.subgroup_lattice.nodes.len(), 3);
        assert_eq!(z4.quotient_lattice.nodes.len(), 3);
        let sizes: Vec<usize> = z4.quotient_lattice.nodes.iter().map(|q| q.cod.size).collect();
        assert_eq!(sizes, vec![4, 2, 1]);
        assert!(z4.order_reversal_verified);
        assert!(!z4.hypothesis_a, "a four-point fiber has non-subgroup congruences");
        assert!(z4.hypothesis_a_certificate.is_some());
        assert!(z4.hypothesis_b);
        assert!(!z4.covers_all_intermediate_quotients);

        let k4 = full_correspondence(&k4_torsor(), &caps).unwrap();
        assert_eq!(k4.subgroup_lattice.nodes.len(), 5);
        assert_eq!(k4.quotient_lattice.nodes.len(), 5);
        assert!(k4.order_reversal_verified);

        // lattice shape distinguishes the two groups
        assert_ne!(z4.subgroup_lattice.nodes.len(), k4.subgroup_lattice.nodes.len());
    }

    #[test]
    fn bijection_correspondence_is_trivial() {
        let caps = Caps::default();
        let s = &enumerate_splittings_absolute(&map(vec![0, 1], 2), &caps).unwrap()[0];
        let r = full_correspondence(s, &caps).unwrap();
        assert_eq!(r.subgroup_lattice.nodes.len(), 1);
        assert_eq!(r.quotient_lattice.nodes.len(), 1);
        assert_eq!(r.bijection, vec![(0, 0)]);
        assert!(r.hypothesis_a && r.hypothesis_b);
        assert!(r.covers_all_intermediate_quotients);
    }

    #[test]
    fn relative_correspondence_covers_interval() {
        let caps = Caps::default();
        let pi = map(vec![0, 0, 1, 1], 2);
        let s = &enumerate_splittings_relative(&pi, &caps).unwrap()[0];
        let r = full_correspondence(s, &caps).unwrap();
        assert_eq!(r.subgroup_lattice.nodes.len(), 4);
        assert_eq!(r.quotient_lattice.nodes.len(), 4);
        assert!(r.hypothesis_a, "two-point fibers only carry coset congruences");
        assert!(r.hypothesis_b);
        assert!(r.covers_all_intermediate_quotients);
        assert!(r.order_reversal_verified);
        // matches the ambient interval computed independently
        let gc = galois_connection(&pi, &caps).unwrap();
        assert_eq!(gc.quotients.nodes.len(), r.quotient_lattice.nodes.len());
    }

    #[test]
    fn restrictions_witness_their_quotients() {
        let caps = Caps::default();
        for s in [z4_torsor(), k4_torsor()] {
            let r = full_correspondence(&s, &caps).unwrap();
            for (h, restriction) in r.subgroup_lattice.nodes.iter().zip(&r.restrictions) {
                let Subgroup::Absolute(set) = h else { unreachable!() };
                let SplittingData::Absolute { group, .. } = &restriction.data else {
                    unreachable!()
                };
                assert_eq!(group.order, set.len());
                // witness validity is enforced by the constructor; check the
                // quotient matches the subgroup's orbits
                let q = quotient_by_subgroup(&s, h).unwrap();
                assert_eq!(restriction.pi.table, q.table);
            }
            // direct recovery agrees with the witness route
            for (i, q) in r.quotient_lattice.nodes.iter().enumerate() {
                let (sub_idx, _) = r.bijection.iter().find(|&&(_, qi)| qi == i).unwrap();
                let Subgroup::Absolute(expected) = &r.subgroup_lattice.nodes[*sub_idx] else {
                    unreachable!()
                };
                let SplittingData::Absolute { group, action } = &s.data else { unreachable!() };
                let direct: Vec<usize> = (0..group.order)
                    .filter(|&g| (0..4).all(|x| q.table[action.act[g][x]] == q.table[x]))
                    .collect();
                assert_eq!(&direct, expected);
            }
        }
    }

    #[test]
    fn round_trip_quotient_to_subgroup_to_quotient() {
        let caps = Caps::default();
        for s in [z4_torsor(), k4_torsor()] {
            let r = full_correspondence(&s, &caps).unwrap();
            for q in &r.quotient_lattice.nodes {
                let h = recover_subgroup(&s, q).unwrap().expect("orbit quotients recover");
                let back = quotient_by_subgroup(&s, &h).unwrap();
                assert_eq!(
                    kernel_pair(&back).pairs,
                    kernel_pair(q).pairs,
                    "quotient round trip closes up to isomorphism"
                );
            }
        }
    }

    #[test]
    fn lattice_validation_rejects_bad_orders() {
        let nodes = vec![0u8, 1u8];
        let mut leq = BTreeSet::from([(0, 0), (1, 1), (0, 1), (1, 0)]);
        assert!(Lattice::new(nodes.clone(), leq.clone()).is_err());
        leq.remove(&(1, 0));
        assert!(Lattice::new(nodes.clone(), leq.clone()).is_ok());
        leq.remove(&(1, 1));
        assert!(Lattice::new(nodes, leq).is_err());
    }
}
