mod common;

use ars2d::graph::{
    builtin_graph, canonical_cycle, equivalent, euler_number, flip, total_chi, GraphEdge,
    GraphVertex,
};
use ars2d::{analyze, LabelledGraph};
use common::{fixture, islands_torus, random_graph, twisted_torus};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bundled(name: &str) -> LabelledGraph {
    builtin_graph(name).unwrap().unwrap()
}

/// Same graph with fresh ids in shuffled order and rotated cycles.
fn relabel(g: &LabelledGraph, rng: &mut ChaCha8Rng) -> LabelledGraph {
    let mut vperm: Vec<usize> = (0..g.vertices().len()).collect();
    vperm.shuffle(rng);
    let vid = |id: &str| {
        let k = g.vertices().iter().position(|v| v.id == id).unwrap();
        format!("w{}", vperm[k])
    };
    let vertices = g
        .vertices()
        .iter()
        .map(|v| GraphVertex {
            id: vid(&v.id),
            ..v.clone()
        })
        .collect();
    let mut eperm: Vec<usize> = (0..g.edges().len()).collect();
    eperm.shuffle(rng);
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut cycle = e.cycle.clone();
            if !cycle.is_empty() {
                let r = rng.gen_range(0..cycle.len());
                cycle.rotate_left(r);
            }
            GraphEdge {
                id: format!("d{}", eperm[k]),
                alpha: vid(&e.alpha),
                omega: vid(&e.omega),
                cycle,
            }
        })
        .collect();
    LabelledGraph::new(vertices, edges).unwrap()
}

#[test]
fn fig1_is_the_flip_of_fig5() {
    let w = equivalent(&bundled("fig1"), &bundled("fig5")).expect("equivalent");
    assert!(w.flipped);
    assert!(w.verify(&bundled("fig1"), &bundled("fig5")));
}

#[test]
fn fig3_pairs() {
    let (a, b, c) = (bundled("fig3a"), bundled("fig3b"), bundled("fig3c"));
    let w = equivalent(&a, &b).expect("a and b are equivalent");
    assert!(w.verify(&a, &b));
    assert!(equivalent(&a, &c).is_none());
    assert!(equivalent(&b, &c).is_none());
    assert!(equivalent(&c, &a).is_none());
}

#[test]
fn bundled_graph_invariants() {
    assert_eq!(euler_number(&bundled("fig1")), 3);
    assert_eq!(euler_number(&bundled("fig5")), -3);
    assert_eq!(total_chi(&bundled("fig1")), -6);
    assert_eq!(total_chi(&bundled("fig5")), -6);
    for name in ["fig3a", "fig3b", "fig3c"] {
        assert_eq!(euler_number(&bundled(name)), 0, "{name}");
        assert_eq!(total_chi(&bundled(name)), -6, "{name}");
    }
}

#[test]
fn canonical_cycles_are_least_rotations() {
    assert_eq!(canonical_cycle(&[1, -1, -1]), vec![-1, -1, 1]);
    assert_eq!(canonical_cycle(&[1, 1, -1, 1, -1]), vec![-1, 1, -1, 1, 1]);
    assert_eq!(canonical_cycle(&[]), Vec::<i8>::new());
}

#[test]
fn graph_json_round_trips() {
    for name in ars2d::graph::GRAPH_FIXTURE_NAMES {
        let g = bundled(name);
        assert_eq!(LabelledGraph::from_json(&g.to_json()).unwrap(), g);
    }
}

#[test]
fn invalid_graphs_are_rejected() {
    let bad = [
        r#"{"vertices":[{"id":"a","sign":2,"chi":0}],"edges":[]}"#,
        r#"{"vertices":[{"id":"a","sign":1,"chi":0},{"id":"a","sign":-1,"chi":0}],"edges":[]}"#,
        r#"{"vertices":[{"id":"a","sign":1,"chi":0},{"id":"b","sign":-1,"chi":0}],
            "edges":[{"id":"e","alpha":"a","omega":"b","cycle":[]}]}"#,
        r#"{"vertices":[{"id":"a","sign":-1,"chi":0},{"id":"b","sign":1,"chi":0}],
            "edges":[{"id":"e","alpha":"a","omega":"b","cycle":[0]}]}"#,
        r#"{"vertices":[{"id":"a","sign":-1,"chi":0}],
            "edges":[{"id":"e","alpha":"a","omega":"z","cycle":[]}]}"#,
    ];
    for text in bad {
        assert!(LabelledGraph::from_json(text).is_err(), "{text}");
    }
}

#[test]
fn random_graphs_are_equivalent_to_their_relabellings() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let g = random_graph(&mut rng);
        let h = relabel(&g, &mut rng);
        let w = equivalent(&g, &h).expect("relabelling is an equivalence");
        assert!(w.verify(&g, &h));
        let back = equivalent(&h, &g).expect("symmetric");
        assert!(back.verify(&h, &g));
        assert!(equivalent(&g, &g).unwrap().verify(&g, &g));
        assert_eq!(euler_number(&g), euler_number(&h));
    }
}

#[test]
fn flipped_relabellings_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let g = random_graph(&mut rng);
        let h = relabel(&flip(&g), &mut rng);
        let w = equivalent(&g, &h).expect("flip is an equivalence");
        assert!(w.verify(&g, &h));
        // A graph may already be isomorphic to its own flip; otherwise the
        // witness has to use it.
        if equivalent(&g, &flip(&g)).is_some_and(|w| !w.flipped) {
            continue;
        }
        assert!(w.flipped);
    }
}

#[test]
fn changing_a_label_breaks_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let g = random_graph(&mut rng);
        let h = relabel(&g, &mut rng);
        let mut vertices = h.vertices().to_vec();
        let k = rng.gen_range(0..vertices.len());
        vertices[k].chi += 1;
        let h = LabelledGraph::new(vertices, h.edges().to_vec()).unwrap();
        assert!(equivalent(&g, &h).is_none());

        if let Some(e) = g.edges().iter().position(|e| !e.cycle.is_empty()) {
            let mut edges = g.edges().to_vec();
            edges[e].cycle[0] = -edges[e].cycle[0];
            let h = LabelledGraph::new(g.vertices().to_vec(), edges).unwrap();
            if let Some(w) = equivalent(&g, &h) {
                assert!(w.verify(&g, &h));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flip_negates_the_euler_number(seed in any::<u64>()) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(euler_number(&flip(&g)), -euler_number(&g));
        prop_assert_eq!(total_chi(&flip(&g)), total_chi(&g));
    }

    #[test]
    fn flip_is_an_involution(seed in any::<u64>()) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(flip(&flip(&g)), g);
    }

    #[test]
    fn witnesses_always_verify(a in any::<u64>(), b in any::<u64>()) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(a));
        let h = random_graph(&mut ChaCha8Rng::seed_from_u64(b));
        if let Some(w) = equivalent(&g, &h) {
            prop_assert!(w.verify(&g, &h));
            prop_assert_eq!(euler_number(&g).abs(), euler_number(&h).abs());
        }
    }
}

#[test]
fn torus_graphs_have_zero_euler_number() {
    let specs = [
        ("grushin-torus", fixture("grushin-torus")),
        ("tangency-torus", fixture("tangency-torus")),
        ("riemannian-torus", fixture("riemannian-torus")),
        ("twisted", twisted_torus()),
        ("islands", islands_torus()),
    ];
    for (name, spec) in specs {
        let report = analyze(&spec, 256).unwrap();
        let g = report.graph.unwrap();
        assert_eq!(euler_number(&g), 0, "{name}");
        assert_eq!(total_chi(&g), 0, "{name}");
        assert_eq!(report.euler_number, Some(0));
    }
}

#[test]
fn island_regions() {
    let g = analyze(&islands_torus(), 256).unwrap().graph.unwrap();
    let mut labels: Vec<(i8, i64)> = g.vertices().iter().map(|v| (v.sign, v.chi)).collect();
    labels.sort();
    assert_eq!(labels, vec![(-1, 1), (-1, 1), (1, -2)]);
    assert_eq!(g.edges().len(), 2);
    for e in g.edges() {
        assert_eq!(e.cycle, vec![1, 1], "{}", e.id);
    }
}

#[test]
fn reversing_the_bundle_flips_the_graph() {
    for spec in [fixture("tangency-torus"), twisted_torus(), islands_torus()] {
        let g = analyze(&spec, 256).unwrap().graph.unwrap();
        let r = analyze(&spec.reversed(), 256).unwrap().graph.unwrap();
        let w = equivalent(&g, &r).expect("reversal is a flip");
        assert!(w.verify(&g, &r));
        assert!(equivalent(&flip(&g), &r).is_some());
    }
}

#[test]
fn tangency_torus_graph() {
    let g = analyze(&fixture("tangency-torus"), 256)
        .unwrap()
        .graph
        .unwrap();
    assert_eq!(g.vertices().len(), 2);
    assert!(g.vertices().iter().all(|v| v.chi == 0));
    assert_eq!(g.edges().len(), 2);
    for e in g.edges() {
        assert_eq!(e.cycle, vec![-1, 1]);
    }
}
