#![allow(dead_code)]

use gatelim::circuit::{Basis, Circuit, CircuitBuilder, Gate, GateKind, InputLayout, Node};
use gatelim::rewrite::normalized;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random normalized DeMorgan circuit with exactly `3(n−1)` binary gates
/// reading all `n` inputs. Every new gate consumes at least one node nobody
/// reads yet, so the last gate is the only sink.
pub fn random_same_size(n: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let target = 3 * (n - 1);
    loop {
        let mut b = CircuitBuilder::demorgan(n);
        let mut nodes: Vec<Node> = (1..=n).map(Node::Input).collect();
        let mut pending = nodes.clone();
        for t in 0..target {
            let left = target - t;
            let take = |pending: &mut Vec<Node>, rng: &mut ChaCha8Rng| {
                let k = rng.gen_range(0..pending.len());
                pending.swap_remove(k)
            };
            let u = take(&mut pending, rng);
            let v = if pending.len() >= left || (!pending.is_empty() && rng.gen_bool(0.5)) {
                take(&mut pending, rng)
            } else {
                let others: Vec<Node> = nodes.iter().copied().filter(|&x| x != u).collect();
                others[rng.gen_range(0..others.len())]
            };
            let u = if rng.gen() { b.not(u) } else { u };
            let v = if rng.gen() { b.not(v) } else { v };
            let g = if rng.gen() { b.and(u, v) } else { b.or(u, v) };
            nodes.push(g);
            pending.push(g);
        }
        if pending.len() != 1 {
            continue;
        }
        let c = normalized(&b.build(pending[0]));
        if c.binary_gate_count() == target && c.read_inputs().len() == n {
            return c;
        }
    }
}

/// Moves an `m`-address circuit onto the live bits of an `n`-address layout.
pub fn embed_mux(c: &Circuit, m: usize, n: usize) -> Circuit {
    let shift = |s: Node| match s {
        Node::Input(i) if i <= m => Node::Input(i + n - m),
        Node::Input(i) => Node::Input(i - m + n),
        other => other,
    };
    let gates = c.gates().iter().map(|g| remap(g, shift)).collect();
    Circuit::from_parts(Basis::DeMorgan, InputLayout::mux(n), gates, shift(c.output()), c.output_negated())
}

fn remap(g: &Gate, f: impl Fn(Node) -> Node) -> Gate {
    let s = g.sources();
    match g.kind() {
        GateKind::Not => Gate::not(f(s[0])),
        kind => Gate::binary(kind, f(s[0]), f(s[1])),
    }
}
