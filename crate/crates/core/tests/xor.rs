use std::collections::BTreeSet;

use gatelim::circuit::{Basis, CircuitBuilder, Node};
use gatelim::harness::{
    generate, random_circuit, truth_table, verify_witness, FunctionTable, GenKind, GenSpec,
    RandomCircuit, SpecFunction,
};
use gatelim::rewrite::normalized;
use gatelim::xor::{detect_xor, xor_check, xor_refute, XorInstance, XorVerdict};
use gatelim::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;
use common::random_same_size;

fn x(i: usize) -> Node {
    Node::Input(i)
}

fn parity_table(n: usize, negated: bool) -> FunctionTable {
    FunctionTable::from_fn(n, |x| x.iter().fold(negated, |a, &b| a ^ b))
}

#[test]
fn corner_rewrite_on_constant_block() {
    // The bottom block collapses to x2, so x4 is never really used.
    let mut b = CircuitBuilder::demorgan(4);
    let g0 = b.or(x(4), x(2));
    let n4 = b.not(x(4));
    let g2 = b.or(n4, g0);
    let g3 = b.not(g2);
    let g4 = b.or(x(2), g3);
    let g5 = b.or(x(3), g4);
    let n3 = b.not(x(3));
    let g7 = b.not(g4);
    let g8 = b.or(n3, g7);
    let g9 = b.and(g5, g8);
    let g10 = b.or(g9, x(1));
    let g11 = b.not(g9);
    let n1 = b.not(x(1));
    let g13 = b.or(g11, n1);
    let out = b.and(g10, g13);
    let c = b.build(out);
    assert_eq!(normalized(&c).binary_gate_count(), 9);

    let w = xor_check(&XorInstance::new(c.clone(), false)).unwrap();
    assert_eq!(w.trace.cases(), vec!["corner", "case1"]);
    assert!(verify_witness(&c, &SpecFunction::xor_all(4, false), &w.bits).unwrap());
}

#[test]
fn corpus_reaches_every_branch() {
    let mut seen = BTreeSet::new();
    for n in 3..=8 {
        for seed in 0..200 {
            let g = generate(&GenSpec::new(GenKind::UndersizedXor, n, seed)).unwrap();
            let w = xor_refute(&XorInstance::new(g.circuit, g.meta.negated)).unwrap();
            seen.extend(w.trace.cases().into_iter().map(String::from));
            let g = generate(&GenSpec::new(GenKind::SabotagedXorTree, n, seed)).unwrap();
            let w = xor_check(&XorInstance::new(g.circuit, g.meta.negated)).unwrap();
            seen.extend(w.trace.cases().into_iter().map(String::from));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=8 {
        for _ in 0..100 {
            let c = random_same_size(n, &mut rng);
            if let Ok(w) = xor_check(&XorInstance::new(c, false)) {
                seen.extend(w.trace.cases().into_iter().map(String::from));
            }
        }
    }
    for case in ["base", "case1", "case2-3", "case4", "substitute", "check-remainder", "refute-remainder", "flip"] {
        assert!(seen.contains(case), "{case} never reached; saw {seen:?}");
    }
}

#[test]
fn checker_rejects_correct_trees() {
    for n in 2..=10 {
        for seed in 0..5 {
            let g = generate(&GenSpec::new(GenKind::XorTree, n, seed)).unwrap();
            let negated = g.meta.negated;
            assert!(matches!(
                xor_check(&XorInstance::new(g.circuit.clone(), negated)),
                Err(Error::CircuitIsCorrect)
            ));
            let w = xor_check(&XorInstance::new(g.circuit.clone(), !negated)).unwrap();
            assert!(verify_witness(&g.circuit, &SpecFunction::xor_all(n, !negated), &w.bits).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn refuter_is_total_below_threshold(n in 2usize..=10, gates in 0usize..40, negated: bool, seed: u64) {
        let spec = RandomCircuit { basis: Basis::DeMorgan, inputs: n, gates, constants: true, not_gates: true };
        let c = normalized(&random_circuit(&spec, seed));
        prop_assume!(c.binary_gate_count() < 3 * (n - 1));
        let w = xor_refute(&XorInstance::new(c.clone(), negated)).unwrap();
        prop_assert!(verify_witness(&c, &SpecFunction::xor_all(n, negated), &w.bits).unwrap());
        prop_assert_eq!(w.bits.len(), n);
    }

    #[test]
    fn checker_is_total_at_threshold(n in 2usize..=9, negated: bool, seed: u64) {
        let c = random_same_size(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let correct = truth_table(&c).unwrap() == parity_table(n, negated);
        match xor_check(&XorInstance::new(c.clone(), negated)) {
            Ok(w) => {
                prop_assert!(!correct);
                prop_assert!(verify_witness(&c, &SpecFunction::xor_all(n, negated), &w.bits).unwrap());
            }
            Err(Error::CircuitIsCorrect) => prop_assert!(correct),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn detector_matches_truth_table(n in 2usize..=9, seed: u64) {
        let c = random_same_size(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let tt = truth_table(&c).unwrap();
        let want = if tt == parity_table(n, false) {
            XorVerdict::Xor
        } else if tt == parity_table(n, true) {
            XorVerdict::NotXor
        } else {
            XorVerdict::Neither
        };
        prop_assert_eq!(detect_xor(&c).unwrap(), want);
    }
}
