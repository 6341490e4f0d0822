use proptest::prelude::*;

use properad_core::instance::DgAlgebra;
use properad_core::linalg::dense::{kernel, mul_vec, rank};
use properad_core::linalg::{check_homotopy, cohomology_sdr, format_scalar, int, parse_scalar, ratio, LinComb, Scalar};
use properad_core::shape::Relabel;
use properad_core::suite::graph_catalog;
use properad_core::trees::{enumerate_sequences, enumerate_trees, is_valid_tree, sequence_to_tree, TreeMode};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn lincomb() -> impl Strategy<Value = LinComb<usize>> {
    prop::collection::vec((0usize..5, scalar()), 0..6).prop_map(|terms| {
        let mut v = LinComb::zero();
        for (k, c) in terms {
            v.add_term(k, c);
        }
        v
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn scalars_print_and_parse_back(x in scalar()) {
        prop_assert_eq!(parse_scalar(&format_scalar(&x)).unwrap(), x);
    }

    #[test]
    fn linear_combinations_form_a_vector_space(a in lincomb(), b in lincomb(), c in scalar()) {
        let mut ab = a.clone();
        ab.add_assign(&b);
        let mut ba = b.clone();
        ba.add_assign(&a);
        prop_assert_eq!(&ab, &ba);
        let mut lhs = a.scaled(&c);
        lhs.add_assign(&b.scaled(&c));
        prop_assert_eq!(lhs, ab.scaled(&c));
        let mut zero = a.clone();
        zero.add_assign(&a.negated());
        prop_assert!(zero.is_zero());
        prop_assert!(zero.is_empty());
    }

    #[test]
    fn kernel_vectors_are_annihilated(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4)) {
        let m: Vec<Vec<Scalar>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let ker = kernel(&m, 4);
        for v in &ker {
            prop_assert!(mul_vec(&m, v).iter().all(|x| *x == int(0)));
        }
        prop_assert_eq!(rank(&m, 4) + ker.len(), 4);
    }

    #[test]
    fn random_complexes_retract_onto_cohomology(degrees in prop::collection::vec(0i32..3, 1..6), seed in 0u64..1000) {
        let (v, d) = DgAlgebra::random_complex(&degrees, seed).unwrap();
        let r = cohomology_sdr(&v, &d).unwrap();
        prop_assert!(check_homotopy(&d, &r.f, &r.g, &r.h).is_ok());
        prop_assert!(r.reduced.dim() <= v.dim());
        prop_assert_eq!((v.dim() - r.reduced.dim()) % 2, 0);
    }
}

fn catalog_case() -> impl Strategy<Value = (usize, Vec<usize>, Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let n = graph_catalog(3, 2).len();
    (0..n).prop_flat_map(|i| {
        let s = &graph_catalog(3, 2)[i];
        let outs: Vec<_> = s.verts.iter().map(|v| permutation(v.outs.len())).collect();
        let ins: Vec<_> = s.verts.iter().map(|v| permutation(v.ins.len())).collect();
        (Just(i), permutation(s.len()), outs, ins)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_presentation((i, order, out_perm, in_perm) in catalog_case()) {
        let s = graph_catalog(3, 2)[i].clone();
        let relabeled = s.relabeled(&Relabel { order, out_perm, in_perm });
        prop_assert_eq!(relabeled.canonical().shape, s.canonical().shape);
    }

    #[test]
    fn every_contraction_sequence_gives_a_valid_tree(i in 0usize..graph_catalog(4, 1).len()) {
        let dag = graph_catalog(4, 1)[i].dag();
        for mode in [TreeMode::Binary, TreeMode::General] {
            let trees = enumerate_trees(&dag, mode);
            for seq in enumerate_sequences(&dag, mode) {
                let t = sequence_to_tree(&dag, &seq).unwrap();
                prop_assert!(is_valid_tree(&dag, &t, mode));
                prop_assert!(trees.binary_search(&t).is_ok());
            }
            if mode == TreeMode::Binary {
                prop_assert!(trees.iter().all(|t| t.internal_node_count() + 1 == dag.len()));
            }
        }
    }
}
