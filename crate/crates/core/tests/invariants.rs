use deltaeq_core::cstar::{block_decompose, generated_algebra, multiplier_algebra, StarAlgebra};
use deltaeq_core::matcore::{herm_eig, random_matrix, random_unitary, CMatrix, MatSubspace, Tolerance};
use deltaeq_core::ncgraph::{
    canonical_form, decide_delta_graphs, graph_system, is_isomorphism, synthesize_graph_tro, twin_quotient,
    verify_pullback, Graph,
};
use deltaeq_core::tro::verify_tro_equivalence;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph() -> impl Strategy<Value = Graph> {
    (1usize..=8).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), 0u64..(1u64 << pairs).max(1)).prop_map(|(n, b)| Graph::from_pair_bits(n, b))
    })
}

fn shuffled(g: &Graph, seed: u64) -> Graph {
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    g.permuted(&perm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twin_quotients_are_twin_free_pullback_targets(g in graph()) {
        let (q, f) = twin_quotient(&g);
        prop_assert!(verify_pullback(&g, &q, &f));
        prop_assert!(f.is_surjective());
        for a in 0..q.n() {
            for b in a + 1..q.n() {
                prop_assert_ne!(q.closed_neighbourhood(a), q.closed_neighbourhood(b));
            }
        }
    }

    #[test]
    fn canonical_forms_ignore_labels(g in graph(), seed in any::<u64>()) {
        let h = shuffled(&g, seed);
        let (cg, ch) = (canonical_form(&g).unwrap(), canonical_form(&h).unwrap());
        prop_assert_eq!(&cg.graph, &ch.graph);
        prop_assert!(is_isomorphism(&g, &cg.graph, &cg.labelling));
    }

    #[test]
    fn decisions_are_symmetric_and_label_free(g in graph(), h in graph(), seed in any::<u64>()) {
        let d = decide_delta_graphs(&g, &h).unwrap();
        prop_assert_eq!(d.is_equivalent(), decide_delta_graphs(&h, &g).unwrap().is_equivalent());
        prop_assert_eq!(d.is_equivalent(), decide_delta_graphs(&shuffled(&g, seed), &h).unwrap().is_equivalent());
        if let Some(w) = d.witness() {
            prop_assert!(w.verify());
        }
        // adding a true twin of vertex 0 keeps the class
        let n = g.n();
        let mut edges = g.edges();
        edges.push((0, n));
        edges.extend(g.neighbours(0).into_iter().map(|v| (v, n)));
        let blown = Graph::new(n + 1, &edges).unwrap();
        prop_assert!(decide_delta_graphs(&shuffled(&g, seed), &blown).unwrap().is_equivalent());
    }

    #[test]
    fn subspace_dimension_formula(seed in any::<u64>(), a in 1usize..6, b in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = Tolerance::default();
        let shared = random_matrix(3, 3, &mut rng);
        let xs: Vec<CMatrix> = (0..a).map(|_| random_matrix(3, 3, &mut rng)).chain([shared.clone()]).collect();
        let ys: Vec<CMatrix> = (0..b).map(|_| random_matrix(3, 3, &mut rng)).chain([shared]).collect();
        let x = MatSubspace::new(3, 3, &xs, tol).unwrap();
        let y = MatSubspace::new(3, 3, &ys, tol).unwrap();
        let sum = x.sum(&y).unwrap();
        let meet = x.intersect(&y).unwrap();
        prop_assert_eq!(sum.dim() + meet.dim(), x.dim() + y.dim());
        prop_assert!(x.contains_space(&meet).unwrap().0 && y.contains_space(&meet).unwrap().0);
        prop_assert!(sum.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn eigendecompositions_reconstruct(seed in any::<u64>(), n in 1usize..8) {
        let x = random_matrix(n, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let h = &x + &x.adjoint();
        let (vals, v) = herm_eig(&h).unwrap();
        let lam = CMatrix::diag(&vals.iter().map(|&l| l.into()).collect::<Vec<_>>());
        prop_assert!(v.matmul(&lam).mul_adj(&v).dist(&h) < 1e-10 * (1.0 + h.norm()));
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn block_structure_of_conjugated_direct_sums(seed in any::<u64>(), d1 in 1usize..3, m1 in 1usize..3, d2 in 1usize..3, m2 in 1usize..3) {
        // ⊕ M_{d_j} ⊗ I_{m_j}, rotated by a random unitary
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = d1 * m1 + d2 * m2;
        let u = random_unitary(n, &mut rng);
        let mut mats = Vec::new();
        for (d, m, first) in [(d1, m1, true), (d2, m2, false)] {
            for i in 0..d {
                for j in 0..d {
                    let e = CMatrix::unit(d, d, i, j).kron(&CMatrix::identity(m));
                    let z1 = CMatrix::zeros(d1 * m1, d1 * m1);
                    let z2 = CMatrix::zeros(d2 * m2, d2 * m2);
                    let x = if first { e.direct_sum(&z2) } else { z1.direct_sum(&e) };
                    mats.push(u.matmul(&x).mul_adj(&u));
                }
            }
        }
        let a = StarAlgebra::new(MatSubspace::new(n, n, &mats, Tolerance::default()).unwrap()).unwrap();
        let dec = block_decompose(&a).unwrap();
        let mut got = dec.pairs();
        got.sort();
        let mut want = vec![(d1, m1), (d2, m2)];
        want.sort();
        prop_assert_eq!(got, want);
        prop_assert!(dec.pattern_residual(a.space().basis()) < 1e-8);
    }
}

/// Block sizes of `C*(S_G)` are component sizes, those of `A_{S_G}` are twin-class sizes.
#[test]
fn graph_structure_up_to_four_vertices() {
    let tol = Tolerance::default();
    for n in 1..=4 {
        for bits in 0..1u64 << (n * (n - 1) / 2) {
            let g = Graph::from_pair_bits(n, bits);
            let s = graph_system(&g, tol);
            let mut comp: Vec<usize> = g.components().iter().map(Vec::len).collect();
            let mut blocks = block_decompose(&generated_algebra(&s)).unwrap().sizes();
            comp.sort();
            blocks.sort();
            assert_eq!(blocks, comp, "{g:?}");
            let (_, f) = twin_quotient(&g);
            let mut twins: Vec<usize> = f.fibers().iter().map(Vec::len).collect();
            let mut mult = block_decompose(&multiplier_algebra(&s)).unwrap().sizes();
            twins.sort();
            mult.sort();
            assert_eq!(mult, twins, "{g:?}");
        }
    }
}

#[test]
fn synthesized_witnesses_are_equivalences() {
    let tol = Tolerance::default();
    let pairs = [
        (Graph::complete(2), Graph::complete(4)),
        (Graph::path(3), Graph::new(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap()),
        (Graph::cycle(5), Graph::cycle(5).permuted(&[2, 4, 1, 0, 3])),
    ];
    for (g, h) in pairs {
        let w = decide_delta_graphs(&g, &h).unwrap().witness().unwrap().clone();
        let m = synthesize_graph_tro(&w, tol).unwrap();
        let r = verify_tro_equivalence(&graph_system(&g, tol), &graph_system(&h, tol), m.space());
        assert!(r.passed(), "{:?}", r.failures());
    }
}
