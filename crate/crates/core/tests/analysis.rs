use std::cmp::Reverse;
use std::collections::BinaryHeap;

use layercode::analysis::{
    barrier_constant_report, decoder_barrier_test, distance_fraction_test, energy_barrier_search,
    epsilon_bound, exact_tail_log, halved_logical_witness, replay_path, replay_sequence,
    tmem_bound, AnalysisError, BarrierProblem, BarrierTarget, BoundParams, BoundRow, SearchMode,
};
use layercode::code::{CssCode, ExactCosetDecoder};
use layercode::codes;
use layercode::decoder::Decoder;
use layercode::gf2::BitVec;
use layercode::lattice::build_layer_code;
use layercode::pauli::PauliKind;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXACT: SearchMode = SearchMode::Exhaustive {
    max_states: 1_000_000,
};

/// Minimax penalty over the hypercube of all supports, from zero to any syndrome-free
/// support whose dual-logical signature satisfies `hit`.
fn hypercube_barrier(code: &CssCode, kind: PauliKind, hit: impl Fn(u64) -> bool) -> Option<usize> {
    let n = code.n;
    assert!(n <= 16);
    let h = code.detecting(kind);
    let support = |s: usize| BitVec::from_indices(n, (0..n).filter(|q| s >> q & 1 == 1));
    let energy: Vec<usize> = (0..1usize << n)
        .map(|s| h.mul_vec(&support(s)).weight())
        .collect();
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    let mut heap = BinaryHeap::from([Reverse((0, 0usize))]);
    while let Some(Reverse((b, s))) = heap.pop() {
        if b > best[s] {
            continue;
        }
        if energy[s] == 0 && hit(code.logical_signature(&support(s), kind)) {
            return Some(b);
        }
        for q in 0..n {
            let t = s ^ (1 << q);
            let nb = b.max(energy[t]);
            if nb < best[t] {
                best[t] = nb;
                heap.push(Reverse((nb, t)));
            }
        }
    }
    None
}

#[test]
fn input_barriers_match_hypercube_oracle() {
    for (name, code) in codes::small_catalogue() {
        let checks = code.check_matrices();
        for kind in [PauliKind::X, PauliKind::Z] {
            let problem = BarrierProblem::for_code(&checks, &code, kind);
            let mut targets = vec![BarrierTarget::AnyNontrivial];
            targets.extend((1..1u64 << code.k).map(BarrierTarget::Class));
            for target in targets {
                let expect = hypercube_barrier(&code, kind, |c| match target {
                    BarrierTarget::Class(t) => c == t,
                    BarrierTarget::AnyNontrivial => c != 0,
                });
                let got = energy_barrier_search(&problem, target, EXACT);
                match expect {
                    None => assert!(
                        matches!(got, Err(AnalysisError::Unreachable { .. })),
                        "{name}"
                    ),
                    Some(b) => {
                        let r = got.unwrap();
                        assert_eq!(r.barrier, b, "{name} {kind:?} {target:?}");
                        assert!(r.exhaustive);
                    }
                }
            }
        }
    }
}

#[test]
fn four_two_two_input_barrier() {
    let code = codes::four_two_two();
    let checks = code.check_matrices();
    let r = energy_barrier_search(
        &BarrierProblem::for_code(&checks, &code, PauliKind::X),
        BarrierTarget::Class(1),
        EXACT,
    )
    .unwrap();
    // The single weight-4 Z-check is lit by the first flip and cleared by the second.
    assert_eq!(r.barrier, 1);
    assert_eq!(r.path.len(), 2);
}

#[test]
fn bare_qubit_has_no_barrier() {
    let code = codes::bare_qubit();
    let checks = code.check_matrices();
    let r = energy_barrier_search(
        &BarrierProblem::for_code(&checks, &code, PauliKind::X),
        BarrierTarget::AnyNontrivial,
        EXACT,
    )
    .unwrap();
    assert_eq!((r.barrier, r.path.len()), (0, 1));
}

#[test]
fn layer_code_barrier_path_replays() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    for kind in [PauliKind::X, PauliKind::Z] {
        let problem = BarrierProblem::for_lattice(&lat, kind);
        let r = energy_barrier_search(&problem, BarrierTarget::AnyNontrivial, EXACT).unwrap();
        let (worst, support) = replay_path(&lat.checks, kind, &r.path);
        assert_eq!(worst, r.barrier);
        assert!(lat.checks.syndrome_of(&support, kind).is_zero());
        let dual = match kind {
            PauliKind::X => &lat.logicals_z,
            PauliKind::Z => &lat.logicals_x,
        };
        let sig = dual
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, l)| acc | (u64::from(l.dot(&support)) << i));
        assert_eq!(sig, r.reached);
        assert_ne!(sig, 0);
        let beam = energy_barrier_search(
            &problem,
            BarrierTarget::AnyNontrivial,
            SearchMode::Beam {
                width: 64,
                max_depth: 40,
            },
        )
        .unwrap();
        assert!(!beam.exhaustive);
        assert!(beam.barrier >= r.barrier);
    }
}

#[test]
fn search_budget_is_enforced() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    let r = energy_barrier_search(
        &BarrierProblem::for_lattice(&lat, PauliKind::X),
        BarrierTarget::AnyNontrivial,
        SearchMode::Exhaustive { max_states: 100 },
    );
    assert_eq!(r, Err(AnalysisError::BudgetExceeded { budget: 100 }));
}

#[test]
fn zero_budget_admits_only_the_empty_walk() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    let dec = Decoder::new(&lat);
    let input = ExactCosetDecoder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = decoder_barrier_test(&dec, &input, 0, 0, 50, &mut rng).unwrap();
    assert_eq!(r.success_fraction(), 1.0);
    assert_eq!(
        decoder_barrier_test(&dec, &input, 0, 1, 50, &mut rng),
        Err(AnalysisError::SamplerStuck { budget: 0, step: 0 })
    );
}

#[test]
fn barrier_path_is_a_failure_witness() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    let dec = Decoder::new(&lat);
    let input = ExactCosetDecoder::default();
    let r = energy_barrier_search(
        &BarrierProblem::for_lattice(&lat, PauliKind::X),
        BarrierTarget::AnyNontrivial,
        EXACT,
    )
    .unwrap();
    let flips: Vec<(usize, PauliKind)> = r.path.iter().map(|&q| (q, PauliKind::X)).collect();
    let (worst, ok) = replay_sequence(&dec, &input, &flips);
    assert_eq!(worst, r.barrier);
    assert!(!ok);
}

#[test]
fn walks_at_the_barrier_respect_the_budget() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    let dec = Decoder::new(&lat);
    let input = ExactCosetDecoder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = decoder_barrier_test(&dec, &input, 1, 40, 200, &mut rng).unwrap();
    assert_eq!(r.successes + r.failures.len(), 200);
    for f in &r.failures {
        let (worst, ok) = replay_sequence(&dec, &input, &f.flips);
        assert!(worst <= 1 && !ok);
        assert_eq!(worst, f.max_penalty);
    }
}

#[test]
fn distance_test_needs_extended_lattice() {
    let lat = build_layer_code(&codes::four_two_two(), 2, false).unwrap();
    let dec = Decoder::new(&lat);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = distance_fraction_test(
        &dec,
        &ExactCosetDecoder::default(),
        &[PauliKind::X],
        1,
        1000,
        10,
        &mut rng,
    );
    assert_eq!(r, Err(AnalysisError::NotExtended));
}

#[test]
fn extended_lattice_corrects_single_errors() {
    let lat = build_layer_code(&codes::four_two_two(), 2, true).unwrap();
    let dec = Decoder::new(&lat);
    let input = ExactCosetDecoder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = distance_fraction_test(
        &dec,
        &input,
        &[PauliKind::X, PauliKind::Z],
        2,
        1000,
        200,
        &mut rng,
    )
    .unwrap();
    assert_eq!(r.rows[0].weight, 0);
    assert_eq!(r.rows[1].trials, 2 * lat.num_qubits());
    assert!(r.rows[1].exhaustive);
    assert!(!r.rows[2].exhaustive);
    assert_eq!(r.rows[2].trials, 400);
    assert!(r.guaranteed_weight >= 1);
    for kind in [PauliKind::X, PauliKind::Z] {
        let w =
            halved_logical_witness(&dec, &input, kind, 0).expect("a prefix of the logical fails");
        let full = match kind {
            PauliKind::X => lat.logicals_x[0].weight(),
            PauliKind::Z => lat.logicals_z[0].weight(),
        };
        assert!(2 * w.len() >= full && w.len() <= full);
    }
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn params(a: f64, beta: f64, m: u64, n: u64) -> BoundParams {
    BoundParams {
        a,
        beta,
        m,
        k: 2,
        n_checks: n,
        l: 5,
        r: 0.1,
        c: 0.4,
        v: 3.0,
    }
}

#[test]
fn closed_form_dominates_exact_tail() {
    for n in [10u64, 20, 30] {
        for m in 2..=n / 2 {
            for beta in [0.5, 1.0, 2.0] {
                for a in [0.3, 0.5, 0.7] {
                    let p = params(a, beta, m, n);
                    let t = 3.0;
                    let direct: f64 = (m..=n)
                        .map(|j| binom(n, j) * (-beta * j as f64).exp())
                        .sum();
                    let direct_log = (t * n as f64).ln() + 2.0 * 2f64.ln() + direct.ln();
                    let exact = exact_tail_log(&p, t);
                    assert!((exact - direct_log).abs() < 1e-9, "N {n} m {m}");
                    let closed = epsilon_bound(&p, t).log_closed_form;
                    assert!(closed >= exact - 1e-9, "N {n} m {m} beta {beta} a {a}");
                }
            }
        }
    }
}

#[test]
fn epsilon_limits() {
    let p = params(0.5, 1.0, 4, 20);
    assert_eq!(epsilon_bound(&p, 0.0).log_closed_form, f64::NEG_INFINITY);
    let mut last = f64::INFINITY;
    for beta in [1.0, 10.0, 100.0, 1000.0] {
        let e = epsilon_bound(&params(0.5, beta, 4, 20), 1.0);
        assert!(e.log_closed_form < last && e.up_to_constant);
        last = e.log_closed_form;
    }
    assert!(last < -700.0);
}

#[test]
fn refined_cutoff_ratio() {
    let (a, beta, v, c) = (0.4, 7.0, 3.0, 0.4);
    let t = tmem_bound(&BoundParams {
        a,
        beta,
        v,
        c,
        ..params(a, beta, 4, 20)
    });
    let ratio = (a * c * beta / v).sqrt() * ((1.0 - a) * beta / 6.0).exp();
    assert!((t.l_star_refined / t.l_star_conservative - ratio).abs() < 1e-12 * ratio);
    let refined_log = (a * c * beta / v).sqrt() * a * c * beta * ((1.0 - a) * beta / 2.0).exp();
    assert!((t.log_tmem_star_refined - refined_log).abs() < 1e-9 * refined_log);
    assert!(t.large_beta);
}

#[test]
fn cutoff_collapses_as_a_approaches_one() {
    let t = tmem_bound(&params(1.0 - 1e-9, 5.0, 4, 20));
    assert!((t.l_star_conservative - 1.0).abs() < 1e-6);
    assert!(!t.large_beta);
}

#[test]
fn memory_bound_increases_with_beta() {
    for a in [0.3, 0.5, 0.7] {
        for m in [2u64, 4, 8] {
            let f = |beta: f64| tmem_bound(&params(a, beta, m, 20));
            for i in 0..50 {
                let beta = 0.2 * i as f64;
                let (lo, hi) = (f(beta), f(beta + 0.2));
                assert!(hi.log_tmem > lo.log_tmem);
                assert!(hi.log_tmem_family > lo.log_tmem_family);
                assert!(hi.log_tmem_star_conservative >= lo.log_tmem_star_conservative);
            }
        }
    }
}

#[test]
fn bound_rows_serialise_to_csv() {
    let row = BoundRow::new(&params(0.5, 1.0, 3, 10), 1.0);
    assert_eq!(
        BoundRow::CSV_HEADER.split(',').count(),
        row.csv().split(',').count()
    );
    assert!(row.csv().starts_with("0.5,1,5,3,2,10,"));
}

#[test]
fn barrier_constant_fractions() {
    let r = barrier_constant_report(&codes::four_two_two());
    assert_eq!((r.w, r.w_prime, r.fraction), (4, 2, 0.5));
    assert!(r.statement.contains("mu"));
    let rep = barrier_constant_report(&codes::repetition3());
    assert_eq!((rep.w, rep.w_prime, rep.fraction), (2, 2, 1.0));
    for (name, code) in codes::small_catalogue() {
        let r = barrier_constant_report(&code);
        if r.w >= 2 && r.w_prime >= 2 {
            assert!(r.fraction <= 1.0, "{name}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn paths_reach_their_class(class in 1u64..4, z in any::<bool>(), pick in 0usize..3) {
        let code = [codes::four_two_two(), codes::six_four_two(), codes::cube()][pick].clone();
        let class = class.min((1 << code.k) - 1);
        let kind = if z { PauliKind::Z } else { PauliKind::X };
        let checks = code.check_matrices();
        let r = energy_barrier_search(&BarrierProblem::for_code(&checks, &code, kind), BarrierTarget::Class(class), EXACT).unwrap();
        let (worst, support) = replay_path(&checks, kind, &r.path);
        prop_assert_eq!(worst, r.barrier);
        prop_assert!(code.detecting(kind).mul_vec(&support).is_zero());
        prop_assert_eq!(code.logical_signature(&support, kind), class);
        // Multiplying by a stabilizer keeps the class, so the barrier is a class property.
        let mut shifted = support.clone();
        shifted.xor_assign(code.stabilizers(kind).row(0));
        prop_assert_eq!(code.logical_signature(&shifted, kind), class);
    }
}
