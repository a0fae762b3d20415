//! End-to-end checks, one test per shipping criterion. Every test prints a
//! single `acceptance: <name>: PASS` line with its elapsed time; budgets are
//! pinned as constants next to it. Oracles here recompute everything from
//! scratch, sharing no enumeration code with the library paths under test.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use galoisforge::algebra::{group_iso, FiniteGroup};
use galoisforge::correspondence::{
    full_correspondence, quotient_by_subgroup, recover_subgroup, CorrespondenceResult, Subgroup,
};
use galoisforge::covers::{cover_from_monodromy, cover_galois_verdict, deck_group, Graph};
use galoisforge::fieldext::{
    aut_group, field_correspondence, phi_basis_rank, tensor_trivialize, FieldExtension,
};
use galoisforge::galois::{
    all_sections, base_sections, end_from_section, enumerate_splittings_absolute, galois_verdict,
    group_classes, section_product, GaloisGroup, Section, SplittingData, SplittingStructure,
    Verdict,
};
use galoisforge::kernel::{
    all_surjections, all_tables, aut_over_base, epi_classification, kernel_pair, permutations_of,
    FinMap, FinSet,
};
use galoisforge::Caps;

const TORSOR_BUDGET: Duration = Duration::from_secs(1);
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(10);
const COVER_BUDGET: Duration = Duration::from_secs(30);
const FIELD_BUDGET: Duration = Duration::from_secs(30);

fn pass(name: &str, started: Instant, budget: Option<Duration>) {
    let elapsed = started.elapsed();
    if let Some(limit) = budget {
        assert!(elapsed < limit, "{name} took {elapsed:?}, budget is {limit:?}");
    }
    println!("acceptance: {name}: PASS ({elapsed:.2?})");
}

fn map(table: Vec<usize>, cod: usize) -> FinMap {
    FinMap::from_table(table, cod).unwrap()
}

fn graph(vertices: usize, edges: Vec<(usize, usize)>) -> Graph {
    Graph::new(FinSet::new(vertices), edges).unwrap()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn torsor_splittings_are_two_nonisomorphic_classes() {
    let started = Instant::now();
    let caps = Caps::default();
    let pi = map(vec![0, 0, 0, 0], 1);

    let splittings = enumerate_splittings_absolute(&pi, &caps).unwrap();
    assert_eq!(splittings.len(), 2);
    let groups: Vec<&FiniteGroup> = splittings
        .iter()
        .map(|s| match &s.data {
            SplittingData::Absolute { group, .. } => group,
            SplittingData::Relative { .. } => panic!("absolute enumeration only"),
        })
        .collect();
    assert!(group_iso(groups[0], groups[1]).is_none());
    assert!(groups.iter().any(|g| group_iso(g, &FiniteGroup::cyclic(4)).is_some()));
    assert!(groups.iter().any(|g| group_iso(g, &FiniteGroup::klein()).is_some()));

    // the kernel pair is the full relation on four points and each witness
    // hits all of it bijectively
    let kp_size = kernel_pair(&pi).pairs.len();
    assert_eq!(kp_size, 16);
    for s in &splittings {
        assert!(s.witness.is_bijective());
        assert_eq!(s.witness.cod.size, kp_size);
        assert_eq!(s.witness.dom.size, 4 * 4);
    }

    pass("torsor_splittings_are_two_nonisomorphic_classes", started, Some(TORSOR_BUDGET));
}

fn binom(n: usize, k: usize) -> i64 {
    let mut out: i64 = 1;
    for i in 0..k {
        out = out * (n - i) as i64 / (i + 1) as i64;
    }
    out
}

fn surjection_count(m: usize, b: usize) -> usize {
    let total: i64 = (0..=b)
        .map(|k| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            sign * binom(b, k) * ((b - k) as i64).pow(m as u32)
        })
        .sum();
    total as usize
}

#[test]
fn absolute_splittings_exist_iff_fibers_are_equinumerous() {
    let started = Instant::now();
    let caps = Caps::default();
    for m in 1..=6usize {
        for b in 1..=3usize {
            let surjections = all_surjections(m, b);
            assert_eq!(surjections.len(), surjection_count(m, b));
            for pi in &surjections {
                let fibers = pi.fibers();
                let equinumerous = fibers.iter().all(|f| f.len() == fibers[0].len());
                let exists = !enumerate_splittings_absolute(pi, &caps).unwrap().is_empty();
                assert_eq!(
                    exists, equinumerous,
                    "splitting existence mismatch on {:?}",
                    pi.table
                );
            }
        }
    }
    pass("absolute_splittings_exist_iff_fibers_are_equinumerous", started, Some(SWEEP_BUDGET));
}

#[test]
fn classification_flags_respect_the_implication_chain() {
    let started = Instant::now();
    let mut classified = 0usize;
    for m in 0..=6usize {
        for b in 1..=3usize {
            for table in all_tables(m, b) {
                let pi = map(table, b);
                let c = epi_classification(&pi);
                assert!(!c.normal || c.strict, "normal without strict on {:?}", pi.table);
                assert!(!c.effective || c.regular, "effective without regular on {:?}", pi.table);
                assert!(!c.regular || c.strict, "regular without strict on {:?}", pi.table);
                classified += 1;
            }
        }
    }
    assert_eq!(classified, 1227);
    pass("classification_flags_respect_the_implication_chain", started, None);
}

/// Closure of permutation generators under composition, abandoned as soon
/// as it outgrows `cap`. Finite order makes inverses reachable forwards.
fn closure_up_to(n: usize, gens: [&Vec<usize>; 2], cap: usize) -> Option<BTreeSet<Vec<usize>>> {
    let id: Vec<usize> = (0..n).collect();
    let mut set = BTreeSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(cur) = frontier.pop() {
        for g in gens {
            let next: Vec<usize> = cur.iter().map(|&x| g[x]).collect();
            if set.insert(next.clone()) {
                if set.len() > cap {
                    return None;
                }
                frontier.push(next);
            }
        }
    }
    Some(set)
}

/// Every simply transitive permutation group on `n` points, one canonical
/// representative per conjugacy class of Sym(n).
fn regular_action_classes(n: usize) -> Vec<BTreeSet<Vec<usize>>> {
    let perms = permutations_of(n);
    let mut found: BTreeSet<BTreeSet<Vec<usize>>> = BTreeSet::new();
    for i in 0..perms.len() {
        for j in i..perms.len() {
            let Some(set) = closure_up_to(n, [&perms[i], &perms[j]], n) else {
                continue;
            };
            if set.len() != n {
                continue;
            }
            let orbit: BTreeSet<usize> = set.iter().map(|t| t[0]).collect();
            if orbit.len() == n {
                found.insert(set);
            }
        }
    }
    let mut classes: BTreeSet<BTreeSet<Vec<usize>>> = BTreeSet::new();
    for h in &found {
        let canon = perms
            .iter()
            .map(|psi| {
                let mut inv = vec![0usize; n];
                for (x, &y) in psi.iter().enumerate() {
                    inv[y] = x;
                }
                h.iter()
                    .map(|t| (0..n).map(|x| psi[t[inv[x]]]).collect::<Vec<usize>>())
                    .collect::<BTreeSet<_>>()
            })
            .min()
            .unwrap();
        classes.insert(canon);
    }
    classes.into_iter().collect()
}

#[test]
fn single_fiber_verdicts_match_a_permutation_oracle() {
    let started = Instant::now();
    let caps = Caps::default();
    let mut class_counts = Vec::new();
    for n in 1..=5usize {
        let pi = map(vec![0; n], 1);
        let report = galois_verdict(&pi, &caps).unwrap();

        // automorphisms over the point are exactly the n! permutations
        let auts: BTreeSet<Vec<usize>> =
            aut_over_base(&pi).into_iter().map(|f| f.table).collect();
        let all_perms: BTreeSet<Vec<usize>> = permutations_of(n).into_iter().collect();
        assert_eq!(auts, all_perms);
        assert_eq!(auts.len(), factorial(n));

        let classes = regular_action_classes(n);
        class_counts.push(classes.len());
        assert_eq!(report.splittings_absolute.len(), classes.len());
        assert_eq!(report.splittings_relative.len(), classes.len());

        // a class carries the structure exactly when its permutations
        // already exhaust the automorphisms
        let passing = classes.iter().filter(|h| **h == all_perms).count();
        assert!(passing <= 1);
        match (&report.verdict_absolute, passing) {
            (Verdict::NoGaloisStructure, 0) => {}
            (Verdict::Galois(GaloisGroup::Group(g)), 1) => assert_eq!(g.order, n),
            other => panic!("absolute verdict disagrees with the oracle at n={n}: {other:?}"),
        }
        match (&report.verdict_relative, passing) {
            (Verdict::NoGaloisStructure, 0) => {}
            (Verdict::Galois(GaloisGroup::Bundle(b)), 1) => {
                assert_eq!(b.fibers.len(), 1);
                assert_eq!(b.fibers[0].order, n);
            }
            other => panic!("relative verdict disagrees with the oracle at n={n}: {other:?}"),
        }

        // two points: not a bijection, yet the lone class hits both
        // automorphisms, so the verdict is a pass
        if n == 2 {
            assert!(!pi.is_bijective());
            assert!(matches!(report.verdict_absolute, Verdict::Galois(_)));
        }
        // three points: the cyclic class gives 3 of the 6 automorphisms,
        // so splittings exist but none carries the structure
        if n == 3 {
            assert_eq!(report.verdict_absolute, Verdict::NoGaloisStructure);
            assert_eq!(report.verdict_relative, Verdict::NoGaloisStructure);
        }
    }
    assert_eq!(class_counts, vec![1, 1, 1, 2, 1]);
    pass("single_fiber_verdicts_match_a_permutation_oracle", started, None);
}

fn subgroup_contains(big: &Subgroup, small: &Subgroup) -> bool {
    match (big, small) {
        (Subgroup::Absolute(b), Subgroup::Absolute(s)) => {
            s.iter().all(|x| b.binary_search(x).is_ok())
        }
        (Subgroup::Relative(b), Subgroup::Relative(s)) => {
            b.len() == s.len()
                && b.iter()
                    .zip(s)
                    .all(|(bf, sf)| sf.iter().all(|x| bf.binary_search(x).is_ok()))
        }
        _ => false,
    }
}

/// Both round trips, order reversal on every node pair, and a bijective
/// witness onto the quotient's kernel pair for every restriction.
fn check_correspondence(s: &SplittingStructure, corr: &CorrespondenceResult) {
    let n = corr.subgroup_lattice.nodes.len();
    assert_eq!(corr.quotient_lattice.nodes.len(), n);
    assert_eq!(corr.bijection.len(), n);
    assert_eq!(corr.restrictions.len(), n);
    assert!(corr.order_reversal_verified);

    let mut quotient_of = vec![usize::MAX; n];
    for &(si, qi) in &corr.bijection {
        quotient_of[si] = qi;
    }

    for &(si, qi) in &corr.bijection {
        let h = &corr.subgroup_lattice.nodes[si];
        let q = &corr.quotient_lattice.nodes[qi];
        assert_eq!(&quotient_by_subgroup(s, h).unwrap(), q, "subgroup -> quotient reopens");
        assert_eq!(recover_subgroup(s, q).unwrap().as_ref(), Some(h), "quotient -> subgroup reopens");

        let r = &corr.restrictions[si];
        assert_eq!(&r.pi, q);
        assert!(r.witness.is_bijective());
        assert_eq!(r.witness.cod.size, kernel_pair(q).pairs.len());
        let expected_arrows = match &r.data {
            SplittingData::Absolute { group, .. } => group.order * q.dom.size,
            SplittingData::Relative { bundle, .. } => bundle
                .fibers
                .iter()
                .zip(q.fibers())
                .map(|(g, f)| g.order * f.len())
                .sum(),
        };
        assert_eq!(r.witness.dom.size, expected_arrows);
    }

    // a bigger subgroup identifies more: inclusion one side, kernel-pair
    // refinement the other
    let kp_pairs: Vec<BTreeSet<(usize, usize)>> = corr
        .quotient_lattice
        .nodes
        .iter()
        .map(|q| kernel_pair(q).pairs)
        .collect();
    for i in 0..n {
        for j in 0..n {
            let included =
                subgroup_contains(&corr.subgroup_lattice.nodes[j], &corr.subgroup_lattice.nodes[i]);
            assert_eq!(corr.subgroup_lattice.le(i, j), included);
            let coarser = kp_pairs[quotient_of[i]].is_subset(&kp_pairs[quotient_of[j]]);
            assert_eq!(included, coarser, "order reversal breaks at nodes {i}, {j}");
        }
    }
}

/// Connected covers given by base graph plus one sheet permutation per base
/// edge. Sheets stay at 8 or fewer.
fn cover_corpus() -> Vec<(&'static str, Graph, Vec<Vec<usize>>)> {
    let loop1 = || graph(1, vec![(0, 0)]);
    let wedge2 = || graph(1, vec![(0, 0), (0, 0)]);
    let triangle = || graph(3, vec![(0, 1), (1, 2), (2, 0)]);
    let theta = || graph(2, vec![(0, 1), (0, 1), (0, 1)]);

    // Cayley cover of the nonabelian group of order six over the wedge:
    // sheets are group elements, each edge multiplies on the right by a
    // generator, deck transformations multiply on the left
    let s3 = group_classes(6)
        .into_iter()
        .find(|g| group_iso(g, &FiniteGroup::cyclic(6)).is_none())
        .unwrap();
    let involution = (0..6)
        .find(|&g| g != s3.identity && s3.mul(g, g) == s3.identity)
        .unwrap();
    let rotation = (0..6)
        .find(|&g| g != s3.identity && s3.mul(g, g) != s3.identity)
        .unwrap();
    let right = |g: usize| (0..6).map(|x| s3.mul(x, g)).collect::<Vec<usize>>();

    vec![
        ("double loop", loop1(), vec![vec![1, 0]]),
        ("triple loop", loop1(), vec![vec![1, 2, 0]]),
        ("quadruple loop", loop1(), vec![vec![1, 2, 3, 0]]),
        ("octuple loop", loop1(), vec![vec![1, 2, 3, 4, 5, 6, 7, 0]]),
        ("klein wedge", wedge2(), vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]),
        ("cyclic wedge", wedge2(), vec![vec![1, 2, 3, 0], vec![2, 3, 0, 1]]),
        ("six cycle wedge", wedge2(), vec![vec![1, 2, 3, 4, 5, 0], vec![3, 4, 5, 0, 1, 2]]),
        ("sym3 wedge", wedge2(), vec![vec![1, 2, 0], vec![1, 0, 2]]),
        ("cayley sym3", wedge2(), vec![right(involution), right(rotation)]),
        ("hexagon over triangle", triangle(), vec![vec![0, 1], vec![0, 1], vec![1, 0]]),
        ("nonagon over triangle", triangle(), vec![vec![1, 2, 0], vec![0, 1, 2], vec![0, 1, 2]]),
        ("theta triple", theta(), vec![vec![0, 1, 2], vec![1, 2, 0], vec![1, 0, 2]]),
    ]
}

#[test]
fn correspondence_round_trips_close_on_torsors_and_covers() {
    let overall = Instant::now();
    let caps = Caps::default();

    let pi = map(vec![0, 0, 0, 0], 1);
    for s in &enumerate_splittings_absolute(&pi, &caps).unwrap() {
        let instant = Instant::now();
        let corr = full_correspondence(s, &caps).unwrap();
        check_correspondence(s, &corr);
        assert!(instant.elapsed() < ROUND_TRIP_BUDGET);
    }

    let mut galois_covers = 0usize;
    for (name, base, perms) in cover_corpus() {
        let c = cover_from_monodromy(&base, &perms).unwrap();
        if !cover_galois_verdict(&c, &caps).unwrap().galois_cover {
            continue;
        }
        galois_covers += 1;
        let instant = Instant::now();
        let (deck, action) = deck_group(&c, &caps).unwrap();
        let s = SplittingStructure::new_absolute(&c.proj_v, deck, action).unwrap();
        let corr = full_correspondence(&s, &caps).unwrap();
        check_correspondence(&s, &corr);
        assert!(instant.elapsed() < ROUND_TRIP_BUDGET, "{name} overran its budget");
    }
    assert!(galois_covers >= 8);

    pass("correspondence_round_trips_close_on_torsors_and_covers", overall, None);
}

#[test]
fn cover_characterizations_agree_on_the_corpus() {
    let started = Instant::now();
    let caps = Caps::default();
    let corpus = cover_corpus();
    assert!(corpus.len() >= 10);

    let mut positives = 0usize;
    let mut negatives = 0usize;
    for (name, base, perms) in &corpus {
        let c = cover_from_monodromy(base, perms).unwrap();
        assert!(c.total.is_connected(), "{name} must be connected");
        assert!(c.sheets() <= 8);
        let v = cover_galois_verdict(&c, &caps).unwrap();
        assert_eq!(v.galois_cover, v.kp_splits, "{name}: trivialization vs splitting");
        assert_eq!(v.kp_splits, v.deck_transitive, "{name}: splitting vs transitivity");
        if v.galois_cover {
            positives += 1;
        } else {
            negatives += 1;
        }
        if *name == "sym3 wedge" {
            assert!(!v.galois_cover);
            assert_eq!(v.group.order, 1);
        }
    }
    assert!(positives > 0 && negatives > 0);

    pass("cover_characterizations_agree_on_the_corpus", started, Some(COVER_BUDGET));
}

fn small_primes(limit: usize) -> Vec<usize> {
    (2..=limit)
        .filter(|&p| (2..p).all(|d| p % d != 0))
        .collect()
}

#[test]
fn prime_power_fields_satisfy_all_descent_conditions() {
    let started = Instant::now();
    let mut pairs = 0usize;
    for p in small_primes(64) {
        let mut q = p;
        let mut n = 1usize;
        while q <= 64 {
            pairs += 1;
            let e = FieldExtension::generate(p, n).unwrap();

            let (aut, _) = aut_group(&e);
            assert_eq!(aut.order, n, "GF({q}) automorphism count");

            let roots = tensor_trivialize(&e).unwrap();
            assert_eq!(roots.len(), n);
            assert!(roots.windows(2).all(|w| w[0] < w[1]), "roots must be distinct");
            for &r in &roots {
                assert_eq!(e.field.eval_modulus(r), 0);
            }

            assert_eq!(phi_basis_rank(&e), n * n);

            let corr = field_correspondence(&e).unwrap();
            assert!(corr.order_reversal_verified);
            assert!(corr.invariants_form_split_algebra);
            let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
            let k = divisors.len();
            assert_eq!(corr.bijection.len(), k);
            let sizes: Vec<usize> =
                corr.subgroup_lattice.nodes.iter().map(Vec::len).collect();
            assert_eq!(sizes, divisors);
            let degrees: Vec<usize> =
                corr.field_lattice.nodes.iter().map(|f| f.degree).collect();
            let mut descending = divisors.clone();
            descending.reverse();
            assert_eq!(degrees, descending);
            for &(si, fi) in &corr.bijection {
                assert_eq!(sizes[si] * degrees[fi], n);
            }
            // inclusion of fixed fields is divisibility of degrees
            for i in 0..k {
                for j in 0..k {
                    assert_eq!(corr.field_lattice.le(i, j), degrees[j] % degrees[i] == 0);
                    let included = corr.subgroup_lattice.nodes[i]
                        .iter()
                        .all(|x| corr.subgroup_lattice.nodes[j].binary_search(x).is_ok());
                    assert_eq!(corr.subgroup_lattice.le(i, j), included);
                }
            }

            q *= p;
            n += 1;
        }
    }
    assert_eq!(pairs, 27);
    pass("prime_power_fields_satisfy_all_descent_conditions", started, Some(FIELD_BUDGET));
}

#[test]
fn section_endomorphisms_compose_only_over_the_base() {
    let started = Instant::now();
    let caps = Caps::default();
    let pi = map(vec![0, 0], 1);
    let s = &enumerate_splittings_absolute(&pi, &caps).unwrap()[0];
    let sections = all_sections(s);
    assert_eq!(sections.len(), 4);

    let end = |g: &Section| end_from_section(s, g).unwrap();
    let defect = sections.iter().flat_map(|g| sections.iter().map(move |h| (g, h))).find(
        |(g, h)| {
            let joined = end(&section_product(s, g, h));
            let composite: Vec<usize> =
                end(h).table.iter().map(|&x| end(g).table[x]).collect();
            joined.table != composite
        },
    );
    let (g, h) = defect.expect("pointwise products must not all match composition");
    let exhibit = |sec: &Section| match sec {
        Section::Absolute(v) => format!("{v:?}"),
        Section::Relative(v) => format!("{v:?}"),
    };

    // constant sections pulled back from the base do compose
    for g in base_sections(s) {
        let ag = end(&g);
        for h in &sections {
            let joined = end(&section_product(s, &g, h));
            let composite: Vec<usize> = end(h).table.iter().map(|&x| ag.table[x]).collect();
            assert_eq!(joined.table, composite);
        }
    }

    pass(
        &format!(
            "section_endomorphisms_compose_only_over_the_base [defect at g={}, h={}]",
            exhibit(g),
            exhibit(h)
        ),
        started,
        None,
    );
}
