mod common;

use std::sync::Arc;

use common::{check_matching_instance, random_instance, OracleGraph};
use layercode::codes;
use layercode::lattice::{build_layer_code, SyndromeType};
use layercode::matching::{build_matching_graph, mwpm, LayerGraph, Terminal};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn empty_sites_give_only_virtual_nodes() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    let base = Arc::new(LayerGraph::new(&lat, lat.grey(0), SyndromeType::E));
    let g = build_matching_graph(base, &[]).unwrap();
    assert!(g.sites.is_empty());
    assert_eq!(g.num_classes(), 2);
    let dump = g.dump();
    assert_eq!(
        dump.lines().count(),
        2,
        "header plus the class-to-class edge:\n{dump}"
    );
}

#[test]
fn interior_pair_at_distance_three() {
    let lat = build_layer_code(&codes::four_two_two(), 4, false).unwrap();
    let grey = lat.grey(0);
    let l = &lat.layers[grey];
    let a = l.face(2, 3).unwrap();
    let b = l.face(5, 3).unwrap();
    let base = Arc::new(LayerGraph::new(&lat, grey, SyndromeType::M));
    let g = build_matching_graph(base.clone(), &[a, b]).unwrap();
    let (sa, sb) = (
        Terminal::Site(a - base.check_offset),
        Terminal::Site(b - base.check_offset),
    );
    assert_eq!(g.distance(sa, sb), Some(3));
    assert_eq!(g.path(sa, sb).len(), 3);
    let r = mwpm(&g).unwrap();
    assert_eq!(r.weight, 3);
    assert_eq!(r.pairs, vec![(sa, sb)]);
    let expected: Vec<usize> = (3..=5).map(|u| l.v_edge(u, 3).unwrap()).collect();
    assert_eq!(r.global_support(&base), expected);
}

#[test]
fn red_site_next_to_rough_side_has_unit_boundary_edge() {
    let lat = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
    let red = lat.red(0);
    let l = &lat.layers[red];
    let site = l.vertex(1, 1).unwrap();
    let base = Arc::new(LayerGraph::new(&lat, red, SyndromeType::E));
    assert_eq!(base.num_classes, 1);
    let g = build_matching_graph(base.clone(), &[site]).unwrap();
    let s = Terminal::Site(site - base.check_offset);
    assert_eq!(g.distance(s, Terminal::Boundary(0)), Some(1));
    let r = mwpm(&g).unwrap();
    assert_eq!(r.weight, 1);
    assert_eq!(r.pairs, vec![(s, Terminal::Boundary(0))]);
}

#[test]
fn distances_match_floyd_warshall() {
    let lat = build_layer_code(&codes::steane(), 2, false).unwrap();
    for layer in 0..lat.layers.len() {
        for ty in [SyndromeType::E, SyndromeType::M] {
            let oracle = OracleGraph::new(&lat, layer, ty);
            let base = Arc::new(LayerGraph::new(&lat, layer, ty));
            assert_eq!(base.num_classes, oracle.classes);
            let sites: Vec<usize> = oracle.checks.clone().step_by(3).collect();
            let g = build_matching_graph(base, &sites).unwrap();
            let local: Vec<usize> = sites.iter().map(|s| s - oracle.checks.start).collect();
            for &a in &local {
                for &b in &local {
                    assert_eq!(
                        g.distance(Terminal::Site(a), Terminal::Site(b)),
                        Some(oracle.dist[a][b])
                    );
                    assert_eq!(
                        g.path(Terminal::Site(a), Terminal::Site(b)).len() as u32,
                        oracle.dist[a][b]
                    );
                }
                for c in 0..oracle.classes {
                    let d = oracle.dist[a][oracle.checks.len() + c];
                    assert_eq!(
                        g.distance(Terminal::Site(a), Terminal::Boundary(c)),
                        Some(d)
                    );
                }
            }
        }
    }
}

#[test]
fn random_instances_match_exhaustive_oracle() {
    let lats = [
        build_layer_code(&codes::four_two_two(), 3, false).unwrap(),
        build_layer_code(&codes::steane(), 2, false).unwrap(),
        build_layer_code(&codes::repetition3(), 3, true).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..300 {
        let lat = &lats[trial % lats.len()];
        let (layer, ty, sites) = random_instance(lat, &mut rng, 8);
        if let Err(e) = check_matching_instance(lat, layer, ty, &sites) {
            panic!("trial {trial} layer {layer} {ty:?} sites {sites:?}: {e}");
        }
    }
}

#[test]
fn matching_is_deterministic() {
    let lat = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (layer, ty, sites) = random_instance(&lat, &mut rng, 8);
        let base = Arc::new(LayerGraph::new(&lat, layer, ty));
        let a = mwpm(&build_matching_graph(base.clone(), &sites).unwrap());
        let b = mwpm(&build_matching_graph(base, &sites).unwrap());
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grey_layer_minus_flips_sector(seed in any::<u64>()) {
        let lat = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (layer, ty, sites) = loop {
            let inst = random_instance(&lat, &mut rng, 6);
            if lat.layers[inst.0].boundary_classes(inst.1) == 2 {
                break inst;
            }
        };
        prop_assert_eq!(check_matching_instance(&lat, layer, ty, &sites), Ok(()));
    }
}
