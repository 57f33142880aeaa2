//! Gate elimination: substitutions and normalization.
//!
//! Normalization is one forward pass that resolves every gate to either a
//! literal (constant, or a node with a polarity) or a kept gate, followed by a
//! liveness sweep and renumbering. NOT gates never survive as resolved
//! literals; in DeMorgan circuits they are re-materialized once per negated
//! node right before their first consumer, in B2 circuits negations are folded
//! into the consuming truth tables and the output flag. The pass reaches the
//! fixpoint directly, because every rule looks only at already-resolved
//! sources.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::circuit::{Basis, Circuit, Gate, GateKind, Measures, Node, TruthTable, Unary};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    /// A constant source forces the gate's output.
    Fixing,
    /// The gate is replaced by one of its sources, possibly negated.
    Passing,
    /// Duplicate or complementary sources, or a double negation.
    Trivial,
    /// The gate no longer reaches the output.
    DeadGate,
    /// Both sources constant, or a constant-valued table.
    ConstFold,
    /// A NOT absorbed into a B2 truth table or the output flag.
    NegFold,
}

/// A resolved wire: a constant or a non-NOT node with a polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lit {
    Const(bool),
    Wire(Node, bool),
}

impl Lit {
    pub fn negate(self) -> Lit {
        match self {
            Lit::Const(b) => Lit::Const(!b),
            Lit::Wire(n, neg) => Lit::Wire(n, !neg),
        }
    }

    fn apply(u: Unary, node: Node, neg: bool) -> Lit {
        match u {
            Unary::Const(b) => Lit::Const(b),
            Unary::Identity => Lit::Wire(node, neg),
            Unary::Negation => Lit::Wire(node, !neg),
        }
    }
}

/// One rule application, in terms of the circuit that was normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: Rule,
    /// Gate id in the input circuit.
    pub gate: usize,
    /// What the gate resolved to; `None` for dead gates.
    pub result: Option<Lit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteLog {
    pub steps: Vec<RewriteStep>,
    pub initial: Measures,
    pub final_measures: Measures,
}

impl RewriteLog {
    /// Rebuilds the normalized circuit from `initial` using only the recorded
    /// decisions.
    pub fn replay(&self, initial: &Circuit) -> Circuit {
        let decided: HashMap<usize, (Rule, Lit)> = self
            .steps
            .iter()
            .filter_map(|s| s.result.map(|r| (s.gate, (s.rule, r))))
            .collect();
        rebuild(initial, |g, _, _| decided.get(&g).copied()).0
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.steps.iter().filter(|s| s.rule == rule).count()
    }
}

fn decide(gate: &Gate, basis: Basis, lits: &[Lit]) -> Option<(Rule, Lit)> {
    match gate.kind() {
        GateKind::Not => match lits[0] {
            Lit::Const(b) => Some((Rule::ConstFold, Lit::Const(!b))),
            Lit::Wire(n, true) => Some((Rule::Trivial, Lit::Wire(n, false))),
            Lit::Wire(n, false) if basis == Basis::B2 => Some((Rule::NegFold, Lit::Wire(n, true))),
            Lit::Wire(_, false) => None,
        },
        kind => {
            let t = kind.table().expect("binary kind");
            decide_binary(t, lits[0], lits[1])
        }
    }
}

fn decide_binary(t: TruthTable, l: Lit, r: Lit) -> Option<(Rule, Lit)> {
    let classify = |lit: Lit| match lit {
        Lit::Const(_) => Rule::Fixing,
        _ => Rule::Passing,
    };
    match (l, r) {
        (Lit::Const(a), Lit::Const(b)) => Some((Rule::ConstFold, Lit::Const(t.eval(a, b)))),
        (Lit::Const(a), Lit::Wire(n, neg)) => {
            let lit = Lit::apply(t.restrict_left(a), n, neg);
            Some((classify(lit), lit))
        }
        (Lit::Wire(n, neg), Lit::Const(b)) => {
            let lit = Lit::apply(t.restrict_right(b), n, neg);
            Some((classify(lit), lit))
        }
        (Lit::Wire(n1, g1), Lit::Wire(n2, g2)) => {
            let t = folded(t, g1, g2);
            if !t.depends_on_left() || !t.depends_on_right() {
                let lit = if t.depends_on_left() {
                    Lit::apply(t.restrict_right(false), n1, false)
                } else {
                    Lit::apply(t.restrict_left(false), n2, false)
                };
                let rule = match lit {
                    Lit::Const(_) => Rule::ConstFold,
                    _ => Rule::Passing,
                };
                Some((rule, lit))
            } else if n1 == n2 {
                Some((Rule::Trivial, Lit::apply(t.diagonal(), n1, false)))
            } else {
                None
            }
        }
    }
}

fn folded(mut t: TruthTable, neg_l: bool, neg_r: bool) -> TruthTable {
    if neg_l {
        t = t.negate_left();
    }
    if neg_r {
        t = t.negate_right();
    }
    t
}

enum Resolved {
    Lit(Lit),
    /// Kept binary gate with its kind and resolved, non-constant sources.
    Keep(GateKind, [(Node, bool); 2]),
}

/// The shared pass behind [`normalize`] and [`RewriteLog::replay`]. `choose`
/// returns the resolution of a gate, or `None` to keep a binary gate (or, for
/// a NOT, to pass the negated source through).
fn rebuild(
    circuit: &Circuit,
    mut choose: impl FnMut(usize, &Gate, &[Lit]) -> Option<(Rule, Lit)>,
) -> (Circuit, Vec<RewriteStep>) {
    let basis = circuit.basis();
    let gates = circuit.gates();
    let mut res: Vec<Resolved> = Vec::with_capacity(gates.len());
    let mut steps = Vec::new();

    let lit_of = |res: &Vec<Resolved>, node: Node| match node {
        Node::Const(b) => Lit::Const(b),
        Node::Input(_) => Lit::Wire(node, false),
        Node::Gate(g) => match res[g] {
            Resolved::Lit(l) => l,
            Resolved::Keep(..) => Lit::Wire(node, false),
        },
    };

    for (id, gate) in gates.iter().enumerate() {
        let lits: Vec<Lit> = gate.sources().iter().map(|&s| lit_of(&res, s)).collect();
        let r = match choose(id, gate, &lits) {
            Some((rule, lit)) => {
                steps.push(RewriteStep {
                    rule,
                    gate: id,
                    result: Some(lit),
                });
                Resolved::Lit(lit)
            }
            None if gate.kind() == GateKind::Not => Resolved::Lit(lits[0].negate()),
            None => {
                let (Lit::Wire(n1, g1), Lit::Wire(n2, g2)) = (lits[0], lits[1]) else {
                    unreachable!("kept gate with a constant source");
                };
                match basis {
                    Basis::B2 => {
                        let t = folded(gate.kind().table().expect("binary"), g1, g2);
                        Resolved::Keep(GateKind::Table(t), [(n1, false), (n2, false)])
                    }
                    Basis::DeMorgan => Resolved::Keep(gate.kind(), [(n1, g1), (n2, g2)]),
                }
            }
        };
        res.push(r);
    }

    let out_lit = lit_of(&res, circuit.output());
    let out_lit = if circuit.output_negated() {
        out_lit.negate()
    } else {
        out_lit
    };

    let mut live = vec![false; gates.len()];
    if let Lit::Wire(Node::Gate(g), _) = out_lit {
        live[g] = true;
    }
    for g in (0..gates.len()).rev() {
        if !live[g] {
            continue;
        }
        if let Resolved::Keep(_, srcs) = &res[g] {
            for &(n, _) in srcs {
                if let Node::Gate(h) = n {
                    live[h] = true;
                }
            }
        }
    }

    let mut new_gates: Vec<Gate> = Vec::new();
    let mut new_id = vec![usize::MAX; gates.len()];
    let mut not_cache: HashMap<Node, usize> = HashMap::new();
    let remap = |new_id: &Vec<usize>, n: Node| match n {
        Node::Gate(g) => Node::Gate(new_id[g]),
        other => other,
    };
    let wire = |new_gates: &mut Vec<Gate>, not_cache: &mut HashMap<Node, usize>, n: Node, neg: bool| {
        if !neg {
            return n;
        }
        let id = *not_cache.entry(n).or_insert_with(|| {
            new_gates.push(Gate::not(n));
            new_gates.len() - 1
        });
        Node::Gate(id)
    };
    for g in 0..gates.len() {
        if !live[g] {
            continue;
        }
        if let Resolved::Keep(kind, srcs) = res[g] {
            let a = wire(&mut new_gates, &mut not_cache, remap(&new_id, srcs[0].0), srcs[0].1);
            let b = wire(&mut new_gates, &mut not_cache, remap(&new_id, srcs[1].0), srcs[1].1);
            new_gates.push(Gate::binary(kind, a, b));
            new_id[g] = new_gates.len() - 1;
        }
    }
    let (output, output_negated) = match out_lit {
        Lit::Const(b) => (Node::Const(b), false),
        Lit::Wire(n, neg) => match basis {
            Basis::B2 => (remap(&new_id, n), neg),
            Basis::DeMorgan => (wire(&mut new_gates, &mut not_cache, remap(&new_id, n), neg), false),
        },
    };

    for (g, r) in res.iter().enumerate() {
        if let Resolved::Keep(..) = r {
            if !live[g] {
                steps.push(RewriteStep {
                    rule: Rule::DeadGate,
                    gate: g,
                    result: None,
                });
            }
        }
    }
    if basis == Basis::DeMorgan {
        // Surviving NOTs are shared per node; the first old NOT on a node
        // stands for the materialized one, later ones are duplicates.
        let mut seen: HashSet<Node> = HashSet::new();
        for (g, gate) in gates.iter().enumerate() {
            if gate.kind() != GateKind::Not || steps.iter().any(|s| s.gate == g) {
                continue;
            }
            let Resolved::Lit(Lit::Wire(n, true)) = res[g] else { continue };
            let materialized = match n {
                Node::Gate(h) if !live[h] => false,
                _ => not_cache.contains_key(&remap(&new_id, n)),
            };
            if !materialized {
                steps.push(RewriteStep {
                    rule: Rule::DeadGate,
                    gate: g,
                    result: None,
                });
            } else if !seen.insert(n) {
                steps.push(RewriteStep {
                    rule: Rule::Trivial,
                    gate: g,
                    result: Some(Lit::Wire(n, true)),
                });
            }
        }
    }

    let out = Circuit::from_parts(basis, circuit.layout(), new_gates, output, output_negated);
    (out, steps)
}

/// Applies the simplification rules until none applies.
pub fn normalize(circuit: &Circuit) -> (Circuit, RewriteLog) {
    let basis = circuit.basis();
    let initial = circuit.measures();
    let (out, steps) = rebuild(circuit, |_, gate, lits| decide(gate, basis, lits));
    let log = RewriteLog {
        steps,
        initial,
        final_measures: out.measures(),
    };
    (out, log)
}

/// [`normalize`] without the log.
pub fn normalized(circuit: &Circuit) -> Circuit {
    normalize(circuit).0
}

fn check_input(circuit: &Circuit, var: usize) -> Result<()> {
    if var == 0 || var > circuit.num_inputs() {
        return Err(Error::input(format!(
            "variable {var} is not an input of a {}-input circuit",
            circuit.num_inputs()
        )));
    }
    Ok(())
}

fn rewire(circuit: &Circuit, from: Node, to: Node) -> Circuit {
    let swap = |n: Node| if n == from { to } else { n };
    let gates = circuit.gates().iter().map(|g| g.map_sources(swap)).collect();
    Circuit::from_parts(
        circuit.basis(),
        circuit.layout(),
        gates,
        swap(circuit.output()),
        circuit.output_negated(),
    )
}

/// Sets input `var` to `b` and normalizes.
pub fn substitute_const(circuit: &Circuit, var: usize, b: bool) -> Result<Circuit> {
    check_input(circuit, var)?;
    Ok(normalized(&rewire(circuit, Node::Input(var), Node::Const(b))))
}

/// Rewires the readers of `gate` to the constant `b` and normalizes.
pub fn replace_gate_with_const(circuit: &Circuit, gate: usize, b: bool) -> Result<Circuit> {
    if gate >= circuit.gates().len() {
        return Err(Error::input(format!("unknown gate g{}", gate + 1)));
    }
    Ok(normalized(&rewire(circuit, Node::Gate(gate), Node::Const(b))))
}

/// Splices a copy of `s` in for input `var`. The result is not normalized.
pub fn substitute_circuit(circuit: &Circuit, var: usize, s: &Circuit) -> Result<Circuit> {
    splice(circuit, var, s).map(|(c, _)| c)
}

/// Like [`substitute_circuit`], also returning how far the original gate ids
/// were shifted.
pub(crate) fn splice(circuit: &Circuit, var: usize, s: &Circuit) -> Result<(Circuit, usize)> {
    check_input(circuit, var)?;
    let reads_var = s.gates().iter().flat_map(|g| g.sources()).any(|&n| n == Node::Input(var))
        || s.output() == Node::Input(var);
    if reads_var {
        return Err(Error::input(format!("substituted circuit reads x{var} itself")));
    }
    splice_node(circuit, Node::Input(var), s)
}

/// Rewires every reader of `target` (an input or a gate) to a copy of `s`.
pub(crate) fn splice_node(circuit: &Circuit, target: Node, s: &Circuit) -> Result<(Circuit, usize)> {
    if s.basis() != circuit.basis() {
        return Err(Error::input("substituted circuit has a different basis"));
    }
    if s.num_inputs() > circuit.num_inputs() {
        return Err(Error::input("substituted circuit has more inputs than the target"));
    }

    let mut gates: Vec<Gate> = s.gates().to_vec();
    let (mut s_out, mut s_neg) = (s.output(), s.output_negated());
    if let Node::Const(b) = s_out {
        s_out = Node::Const(b ^ s_neg);
        s_neg = false;
    }
    if s_neg && circuit.basis() == Basis::DeMorgan {
        gates.push(Gate::not(s_out));
        s_out = Node::Gate(gates.len() - 1);
        s_neg = false;
    }
    let offset = gates.len();
    let shift = |n: Node| match n {
        n if n == target => s_out,
        Node::Gate(g) => Node::Gate(g + offset),
        n => n,
    };
    for gate in circuit.gates() {
        let reads: Vec<bool> = gate.sources().iter().map(|&n| n == target).collect();
        let mut moved = gate.map_sources(shift);
        if s_neg {
            if let GateKind::Table(mut t) = gate.kind() {
                if reads[0] {
                    t = t.negate_left();
                }
                if reads.get(1) == Some(&true) {
                    t = t.negate_right();
                }
                moved = moved.with_kind(GateKind::Table(t));
            }
        }
        gates.push(moved);
    }
    let output_negated = circuit.output_negated() ^ (s_neg && circuit.output() == target);
    let out = Circuit::from_parts(
        circuit.basis(),
        circuit.layout(),
        gates,
        shift(circuit.output()),
        output_negated,
    );
    Ok((out, offset))
}

/// A constant for the given slot (0 = left, 1 = right) that forces the gate,
/// with the forced output. Tries 0 before 1; `None` for NOT and ⊕-type kinds.
pub fn fixing_value(kind: GateKind, slot: usize) -> Option<(bool, bool)> {
    let t = kind.table()?;
    [false, true].into_iter().find_map(|b| {
        let u = if slot == 0 {
            t.restrict_left(b)
        } else {
            t.restrict_right(b)
        };
        match u {
            Unary::Const(out) => Some((b, out)),
            _ => None,
        }
    })
}
