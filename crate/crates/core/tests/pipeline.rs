//! Graph witness → TRO → contexts, induced representations and bimodule transport.

use deltaeq_core::cstar::OperatorSystem;
use deltaeq_core::funcsys::{theta_iso, ThetaMode};
use deltaeq_core::matcore::{CMatrix, Tolerance};
use deltaeq_core::morita::{
    atom_sum, bimodule_atoms, random_representation, roundtrip_unitary, transport_bimodule, Representation,
};
use deltaeq_core::ncgraph::{decide_delta_graphs, graph_system, synthesize_graph_tro, Graph};
use deltaeq_core::tro::{factorization_maps, verify_bihom_context, verify_delta_context, ContextBundle, Tro};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn witness(g: &Graph, h: &Graph) -> (OperatorSystem, OperatorSystem, Tro) {
    let w = decide_delta_graphs(g, h).unwrap().witness().unwrap().clone();
    (graph_system(g, tol()), graph_system(h, tol()), synthesize_graph_tro(&w, tol()).unwrap())
}

fn examples() -> Vec<(Graph, Graph)> {
    vec![
        (Graph::path(3), Graph::new(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap()),
        (Graph::complete(2).disjoint_union(&Graph::empty(1)), Graph::empty(2)),
        (Graph::cycle(4), Graph::cycle(4).permuted(&[1, 3, 0, 2])),
    ]
}

#[test]
fn bimodule_roundtrip_and_meets() {
    for (g, h) in examples() {
        let (s, t, m) = witness(&g, &h);
        let atoms = bimodule_atoms(&s).unwrap();
        let mut masks: Vec<u64> = (0..1u64 << atoms.len()).step_by(7).collect();
        masks.push((1 << atoms.len()) - 1);
        for &mask in &masks {
            let j = atom_sum(&atoms, mask, s.size(), tol()).unwrap();
            let f = transport_bimodule(&m, &s, &j).unwrap();
            let back = transport_bimodule(&m.adjoint(), &t, &f).unwrap();
            assert!(back.equals(&j).unwrap().0);
            let other = atom_sum(&atoms, mask.rotate_left(1) & ((1 << atoms.len()) - 1), s.size(), tol()).unwrap();
            let meet = transport_bimodule(&m, &s, &j.intersect(&other).unwrap()).unwrap();
            let both = f.intersect(&transport_bimodule(&m, &s, &other).unwrap()).unwrap();
            assert!(meet.equals(&both).unwrap().0);
        }
    }
}

#[test]
fn witnesses_carry_contexts_roundtrips_and_factorizations() {
    let mut rng = tol().rng("pipeline");
    for (g, h) in examples() {
        let (s, t, m) = witness(&g, &h);
        let ctx = ContextBundle::conjugation(s.clone(), t.clone(), m.space().clone(), 2).unwrap();
        assert!(verify_delta_context(&ctx).passed());
        assert!(verify_bihom_context(&ctx).passed());
        let rt = roundtrip_unitary(&m, &t, &Representation::identity(&s)).unwrap();
        assert!(rt.residual <= 1e-8, "{rt:?}");
        let rep = random_representation(&s, &mut rng).unwrap();
        assert!(roundtrip_unitary(&m, &t, &rep).unwrap().residual <= 1e-8);
        for x in s.space().basis() {
            assert!(factorization_maps(&m, x).unwrap().residual <= 1e-10);
        }
        let th = theta_iso(&m, &s, &t, ThetaMode::Centre).unwrap();
        assert!(th.report.passed(), "{:?}", th.report.failures());
    }
}

#[test]
fn transported_full_system_is_the_target() {
    let (s, t, m) = witness(&Graph::complete(2), &Graph::complete(3));
    let all = transport_bimodule(&m, &s, s.space()).unwrap();
    assert!(all.equals(t.space()).unwrap().0);
    assert!(CMatrix::identity(3).dist(&all.project(&CMatrix::identity(3))) < 1e-12);
}
