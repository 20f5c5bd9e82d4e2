use bmt_core::rmld::{rmld_certify, CertifyOptions};
use bmt_core::tree::{enumerate_topologies, parse_newick, star_tree};
use num_bigint::BigUint;

#[test]
fn nested_tree_certifies_sixteen() {
    let t = parse_newick("(1,2,(3,4,5));").unwrap();
    let r = rmld_certify(&t, 42, &CertifyOptions::default()).unwrap();
    assert_eq!(r.formula_value, BigUint::from(16u32));
    assert!(r.matches, "{r:?}");
}

#[test]
fn stars_three_to_five() {
    for (n, want) in [(3, 4u64), (4, 11), (5, 26)] {
        let r = rmld_certify(&star_tree(n).unwrap(), 7, &CertifyOptions::default()).unwrap();
        assert_eq!(r.certified_degree, want);
        assert!(r.matches && r.agree);
    }
}

#[test]
fn every_topology_up_to_six_leaves() {
    let opts = CertifyOptions::default();
    let mut count = 0;
    for n in 2..=5 {
        for t in enumerate_topologies(n) {
            let r = rmld_certify(&t, 11, &opts).unwrap();
            assert!(r.matches, "{}: formula {} runs {:?}", r.newick, r.formula_value, r.runs);
            count += 1;
        }
    }
    assert_eq!(count, 1 + 4 + 26 + 236);
}
