//! Randomized invariants over the map and congruence layers. Everything
//! here must hold for arbitrary inputs, not just the curated fixtures.

use proptest::prelude::*;

use galoisforge::kernel::{
    coequalizer, compose, epi_classification, kernel_pair, Congruence, FinMap, FinSet,
};

fn arb_map(max_dom: usize, max_cod: usize) -> impl Strategy<Value = FinMap> {
    (1..=max_cod).prop_flat_map(move |b| {
        proptest::collection::vec(0..b, 0..=max_dom)
            .prop_map(move |table| FinMap::from_table(table, b).unwrap())
    })
}

/// A partition of `0..n` encoded as a labeling, normalized to blocks.
fn arb_partition(max_size: usize) -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1..=max_size).prop_flat_map(|n| {
        proptest::collection::vec(0..n, n).prop_map(move |labels| {
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (x, &l) in labels.iter().enumerate() {
                blocks[l].push(x);
            }
            blocks.retain(|b| !b.is_empty());
            (n, blocks)
        })
    })
}

fn sorted_fibers(f: &FinMap) -> Vec<Vec<usize>> {
    let mut out = f.fibers();
    out.retain(|fiber| !fiber.is_empty());
    out.sort();
    out
}

proptest! {
    #[test]
    fn classification_flags_chain_and_detect_surjectivity(pi in arb_map(7, 4)) {
        let c = epi_classification(&pi);
        let onto = (0..pi.cod.size).all(|y| pi.table.contains(&y));
        prop_assert_eq!(c.epi, onto);
        prop_assert!(!c.normal || c.strict);
        prop_assert!(!c.effective || c.regular);
        prop_assert!(!c.regular || c.strict);
    }

    #[test]
    fn classification_ignores_domain_relabeling(pi in arb_map(7, 4), seed in any::<u64>()) {
        let m = pi.dom.size;
        let mut perm: Vec<usize> = (0..m).collect();
        let mut state = seed | 1;
        for i in (1..m).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let sigma = FinMap::from_table(perm, m).unwrap();
        let relabeled = compose(&sigma, &pi).unwrap();
        prop_assert_eq!(epi_classification(&relabeled), epi_classification(&pi));
    }

    #[test]
    fn quotient_maps_recover_their_congruence((n, blocks) in arb_partition(8)) {
        let congruence = Congruence::from_partition(FinSet::new(n), &blocks).unwrap();
        let q = congruence.quotient_map();
        prop_assert_eq!(kernel_pair(&q), congruence);
    }

    #[test]
    fn surjections_coequalize_their_kernel_pairs(pi in arb_map(7, 4)) {
        prop_assume!(epi_classification(&pi).epi);
        let m = pi.dom.size;
        let pairs = kernel_pair(&pi).pair_list();
        let p1 = FinMap::from_table(pairs.iter().map(|p| p.0).collect(), m).unwrap();
        let p2 = FinMap::from_table(pairs.iter().map(|p| p.1).collect(), m).unwrap();
        let q = coequalizer(&p1, &p2).unwrap();
        prop_assert_eq!(sorted_fibers(&q), sorted_fibers(&pi));
    }
}
