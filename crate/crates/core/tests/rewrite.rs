use gatelim::circuit::{Basis, Circuit, Node};
use gatelim::harness::{random_circuit, truth_table, RandomCircuit};
use gatelim::rewrite::{normalize, normalized, replace_gate_with_const, substitute_circuit, substitute_const};
use proptest::prelude::*;

fn arb_circuit(max_inputs: usize) -> impl Strategy<Value = Circuit> {
    (any::<bool>(), 1..=max_inputs, 0usize..40, any::<bool>(), any::<u64>()).prop_map(
        |(b2, inputs, gates, constants, seed)| {
            let spec = RandomCircuit {
                basis: if b2 { Basis::B2 } else { Basis::DeMorgan },
                inputs,
                gates,
                constants,
                not_gates: true,
            };
            random_circuit(&spec, seed)
        },
    )
}

fn fix(x: &[bool], var: usize, b: bool) -> Vec<bool> {
    let mut y = x.to_vec();
    y[var - 1] = b;
    y
}

fn rows(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |r| (0..n).map(|i| (r >> (n - 1 - i)) & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn normalize_keeps_function_and_never_grows(c in arb_circuit(10)) {
        let (once, log) = normalize(&c);
        prop_assert_eq!(truth_table(&c).unwrap(), truth_table(&once).unwrap());
        prop_assert!(once.binary_gate_count() <= c.binary_gate_count());
        prop_assert!(once.validate().is_ok());
        prop_assert_eq!(normalized(&once), once.clone());
        prop_assert_eq!(log.replay(&c), once.clone());
        prop_assert_eq!(log.final_measures, once.measures());
    }

    #[test]
    fn normalized_circuits_have_no_constants(c in arb_circuit(8)) {
        let c = normalized(&c);
        let reads_const = c.gates().iter().flat_map(|g| g.sources().to_vec()).any(|s| matches!(s, Node::Const(_)));
        prop_assert!(!reads_const);
        prop_assert!(c.gates().is_empty() || !matches!(c.output(), Node::Const(_)));
    }

    #[test]
    fn substitution_fixes_the_variable(c in arb_circuit(8), var_seed: usize, b: bool) {
        let n = c.num_inputs();
        let var = var_seed % n + 1;
        let s = substitute_const(&c, var, b).unwrap();
        prop_assert!(!s.reads_input(var));
        for x in rows(n) {
            prop_assert_eq!(s.evaluate(&x).unwrap(), c.evaluate(&fix(&x, var, b)).unwrap());
        }
    }

    #[test]
    fn splicing_composes(b2: bool, n in 1usize..=6, gates in (0usize..30, 0usize..10), seeds: (u64, u64), var_seed: usize) {
        let basis = if b2 { Basis::B2 } else { Basis::DeMorgan };
        let spec = |gates| RandomCircuit { basis, inputs: n, gates, constants: true, not_gates: true };
        let c = random_circuit(&spec(gates.0), seeds.0);
        let s = random_circuit(&spec(gates.1), seeds.1);
        let var = var_seed % n + 1;
        let mentions_var = s.output() == Node::Input(var)
            || s.gates().iter().any(|g| g.sources().contains(&Node::Input(var)));
        prop_assume!(!mentions_var);
        let spliced = substitute_circuit(&c, var, &s).unwrap();
        prop_assert!(spliced.validate().is_ok());
        for x in rows(n) {
            let v = s.evaluate(&x).unwrap();
            prop_assert_eq!(spliced.evaluate(&x).unwrap(), c.evaluate(&fix(&x, var, v)).unwrap());
        }
    }

    #[test]
    fn gate_replacement_rewires_readers(c in arb_circuit(6), gate_seed: usize, b: bool) {
        prop_assume!(!c.gates().is_empty());
        let g = gate_seed % c.gates().len();
        let r = replace_gate_with_const(&c, g, b).unwrap();
        prop_assert!(r.binary_gate_count() <= c.binary_gate_count());
        prop_assert!(r.validate().is_ok());
    }
}
