use bmt_core::field::Rationals;
use bmt_core::matrix::{rank_rref, rowspan_equal, ExactMatrix};
use bmt_core::model::{design_a, path_b, row_transform_b_of_a};
use bmt_core::rmld::{rmld_certify, rmld_formula, CertifyOptions};
use bmt_core::toric::{lattice_member, tfp_kernel_check, tree_binomials, TfpGluing, TfpOptions};
use bmt_core::tree::{enumerate_topologies, glue_trees, star_tree, QuartetKind, RootedTree};
use proptest::prelude::*;

fn all_trees(max_n: usize) -> Vec<RootedTree> {
    (2..=max_n).flat_map(enumerate_topologies).collect()
}

#[test]
fn rowspans_agree_up_to_seven_leaves() {
    let q = Rationals;
    for t in all_trees(6) {
        let a = ExactMatrix::from_integer(&q, &design_a(&t));
        let b = ExactMatrix::from_integer(&q, &path_b(&t));
        assert!(rowspan_equal(&q, &a, &b).unwrap(), "{}", t.to_newick());
        assert_eq!(rank_rref(&q, &a).rank, t.num_vertices() - 1);
        for v in t.non_root_vertices() {
            row_transform_b_of_a(&t, v).unwrap();
        }
    }
}

#[test]
fn binomials_lie_in_both_lattices_up_to_seven_leaves() {
    for t in all_trees(6) {
        let (a, b) = (design_a(&t), path_b(&t));
        for x in tree_binomials(&t) {
            assert!(lattice_member(&x, &a).unwrap() && lattice_member(&x, &b).unwrap());
        }
    }
}

#[test]
fn gluings_up_to_seven_leaves_pass_kernel_check() {
    for np in 2..=5 {
        for tp in enumerate_topologies(np) {
            for ell in 1..=np {
                for m in 2..=(6 + 1 - np) {
                    let g = TfpGluing::new(&tp, ell, m).unwrap();
                    let opts = TfpOptions { ideal_leaf_cap: 6, ..Default::default() };
                    let r = tfp_kernel_check(&g, &opts).unwrap();
                    assert!(r.passed(), "{} ell={ell} m={m}: {r:?}", tp.to_newick());
                }
            }
        }
    }
}

#[test]
fn certified_degree_is_multiplicative_under_gluing() {
    let opts = CertifyOptions::default();
    for np in 2..=4 {
        for tp in enumerate_topologies(np) {
            let dp = rmld_certify(&tp, 3, &opts).unwrap().certified_degree;
            for ell in 1..=np {
                for m in 2..=(5 - np + 1) {
                    let glued = glue_trees(&tp, ell, m).unwrap();
                    if glued.num_leaves() > 6 {
                        continue;
                    }
                    let ds = rmld_certify(&star_tree(m).unwrap(), 3, &opts).unwrap().certified_degree;
                    let dg = rmld_certify(&glued, 3, &opts).unwrap().certified_degree;
                    assert_eq!(dg, dp * ds, "{} at {ell} with m={m}", tp.to_newick());
                }
            }
        }
    }
}

fn tree_strategy() -> impl Strategy<Value = RootedTree> {
    let trees = all_trees(5);
    (0..trees.len()).prop_map(move |k| trees[k].clone())
}

proptest! {
    #[test]
    fn path_length_from_depths(t in tree_strategy(), a in 0usize..6, b in 0usize..6) {
        let (i, j) = (a % (t.n() + 1), b % (t.n() + 1));
        prop_assume!(i != j);
        let l = t.lca(i, j).unwrap();
        let p = t.path_edges(i, j).unwrap();
        prop_assert_eq!(p.len(), t.depth(i) + t.depth(j) - 2 * t.depth(l));
    }

    #[test]
    fn glue_adds_one_internal_vertex(t in tree_strategy(), k in 1usize..6, m in 2usize..4) {
        let ell = 1 + (k - 1) % t.n();
        let g = glue_trees(&t, ell, m).unwrap();
        prop_assert_eq!(g.internal_vertices().len(), t.internal_vertices().len() + 1);
        prop_assert!(g.internal_vertices().any(|v| g.outdeg(v) == m && g.leaf_set(v).len() == m));
    }

    #[test]
    fn quartet_invariant_under_cherry_swap(t in tree_strategy()) {
        prop_assume!(t.n() >= 3);
        let q = [0, 1, 2, 3];
        let topo = t.quartet_topology(q).unwrap();
        if let QuartetKind::Resolved([a, b], [c, d]) = topo.kind {
            let swapped = t.quartet_topology([b, a, d, c]).unwrap();
            prop_assert_eq!(swapped.kind, topo.kind);
        }
    }

    #[test]
    fn formula_invariant_under_relabeling(t in tree_strategy(), seed in any::<u64>()) {
        let n = t.n();
        let mut perm: Vec<usize> = (0..=n).collect();
        let mut s = seed;
        for i in (2..=n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = 1 + (s >> 33) as usize % i;
            perm.swap(i, j);
        }
        let r = t.relabel_leaves(&perm).unwrap();
        prop_assert_eq!(rmld_formula(&r), rmld_formula(&t));
    }
}
