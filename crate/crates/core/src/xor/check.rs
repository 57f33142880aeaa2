use crate::circuit::{Basis, Circuit, CircuitBuilder, GateClass, Node, TruthTable};
use crate::error::{Error, Result};
use crate::rewrite::{normalized, splice_node};
use crate::trace::RefutationTrace;

use super::refute::{refute_level, Level, Shared};
use super::{detect_xor, finish, prepare, Witness, XorInstance, XorVerdict};

/// True when `circuit` computes `XOR_I ⊕ c`, decided structurally; the caller
/// guarantees `σ = 3(|I|−1)` and that only variables in `I` are read.
fn computes_parity(circuit: &Circuit, indices: &[usize], c: bool) -> Result<bool> {
    if circuit.read_inputs().len() != indices.len() {
        return Ok(false);
    }
    Ok(match detect_xor(circuit)? {
        XorVerdict::Xor => !c,
        XorVerdict::NotXor => c,
        XorVerdict::Neither => false,
    })
}

/// A DeMorgan circuit over inputs `p` and `q` with at most one binary gate
/// computing `f(x_p, x_q)`.
fn small_circuit(circuit: &Circuit, f: TruthTable, p: usize, q: usize) -> Option<Circuit> {
    let mut b = CircuitBuilder::new(Basis::DeMorgan, circuit.layout());
    let (xp, xq) = (Node::Input(p), Node::Input(q));
    let out = match f.class() {
        GateClass::XorType => return None,
        GateClass::Degenerate => {
            let (var, u) = if f.depends_on_left() {
                (xp, f.restrict_right(false))
            } else {
                (xq, f.restrict_left(false))
            };
            match u {
                crate::circuit::Unary::Const(v) => Node::Const(v),
                crate::circuit::Unary::Identity => var,
                crate::circuit::Unary::Negation => b.not(var),
            }
        }
        GateClass::AndType => {
            // f(p, q) = o ⊕ ((p ⊕ s) ∧ (q ⊕ t)) for exactly one (s, t, o).
            let (s, t, o) = (0..8u8)
                .map(|k| (k & 1 == 1, k & 2 == 2, k & 4 == 4))
                .find(|&(s, t, o)| TruthTable::from_fn(|l, r| o ^ ((l ^ s) && (r ^ t))) == f)?;
            let lit = |b: &mut CircuitBuilder, x: Node, neg: bool| if neg { b.not(x) } else { x };
            if o {
                let l = lit(&mut b, xp, !s);
                let r = lit(&mut b, xq, !t);
                b.or(l, r)
            } else {
                let l = lit(&mut b, xp, s);
                let r = lit(&mut b, xq, t);
                b.and(l, r)
            }
        }
    };
    Some(b.build(out))
}

/// The function `β` computes of `(x_p, x_q)` when its cone is `{α, β}`.
fn beta_function(circuit: &Circuit, beta: usize, p: usize, q: usize) -> TruthTable {
    let sub = circuit.induced_subcircuit(beta);
    TruthTable::from_fn(|l, r| {
        let mut x = vec![false; circuit.num_inputs()];
        x[p - 1] = l;
        x[q - 1] = r;
        sub.eval_unchecked(&x)
    })
}

fn check_level(mut lvl: Level<'_>) -> Result<Vec<bool>> {
    let k = lvl.indices.len();
    let sigma = lvl.circuit.binary_gate_count();
    if k < 2 || sigma != 3 * (k - 1) {
        return Err(Error::bug(
            format!("checker reached size {sigma} with {k} live variables"),
            lvl.trace,
        ));
    }
    let (alpha, beta, p) = match lvl.shared_cases()? {
        Shared::Found(w) => return Ok(w),
        Shared::Substitute { alpha, beta, p } => (alpha, beta, p),
    };
    let gamma = lvl
        .third_gate(beta)
        .ok_or_else(|| Error::bug(format!("g{} has no binary reader", beta + 1), lvl.trace))?;
    let ap = lvl.fix_beta(beta, p)?;
    let restricted = lvl.restrict(p, ap)?;
    let drop = sigma - restricted.binary_gate_count();
    let rest: Vec<usize> = lvl.indices.iter().copied().filter(|&i| i != p).collect();
    if drop < 3 {
        lvl.record_step("substitute", format!("x{p} <- {}", ap as u8), &restricted);
        return Err(Error::bug(
            format!("fixing x{p} removed {drop} gates, expected at least 3"),
            lvl.trace,
        ));
    }
    if drop > 3 {
        lvl.record_step(
            "refute-remainder",
            format!("x{p} <- {} fixes g{}, removed {drop} gates", ap as u8, beta + 1),
            &restricted,
        );
        return refute_level(lvl.child(restricted, p, ap));
    }
    if !computes_parity(&restricted, &rest, lvl.c ^ ap)? {
        lvl.record_step(
            "check-remainder",
            format!("x{p} <- {} fixes g{}, third gate g{}", ap as u8, beta + 1, gamma + 1),
            &restricted,
        );
        return check_level(lvl.child(restricted, p, ap));
    }

    // The restriction is correct, so the error lives on the other side.
    let ap = !ap;
    let q = match lvl
        .circuit
        .gate(alpha)
        .sources()
        .iter()
        .map(|&s| lvl.circuit.literal(s).0)
        .find(|&b| b != Node::Input(p))
    {
        Some(Node::Input(q)) => q,
        _ => return Err(Error::bug("minimal gate does not read two variables", lvl.trace)),
    };
    let alpha_readers: Vec<usize> = lvl
        .circuit
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_binary() && g.sources().iter().any(|&s| lvl.circuit.literal(s).0 == Node::Gate(alpha)))
        .map(|(id, _)| id)
        .collect();
    let alpha_is_output = lvl.circuit.literal(lvl.circuit.output()).0 == Node::Gate(alpha);
    if alpha_readers == [beta] && !alpha_is_output {
        let f = beta_function(&lvl.circuit, beta, p, q);
        let small = small_circuit(&lvl.circuit, f, p, q).ok_or_else(|| {
            Error::bug(format!("two gates over x{p}, x{q} compute a parity"), lvl.trace)
        })?;
        let (spliced, _) = splice_node(&lvl.circuit, Node::Gate(beta), &small)?;
        let smaller = normalized(&spliced);
        lvl.record_step(
            "corner",
            format!("g{} only feeds g{}; replaced by a {}-gate circuit for {f}", alpha + 1, beta + 1, small.binary_gate_count()),
            &smaller,
        );
        if smaller.binary_gate_count() >= 3 * (k - 1) {
            return Err(Error::bug("corner-case rewrite did not shrink the circuit", lvl.trace));
        }
        lvl.circuit = smaller;
        return refute_level(lvl);
    }

    let flipped = lvl.restrict(p, ap)?;
    let sigma2 = flipped.binary_gate_count();
    let budget = 3 * (k - 2);
    lvl.record_step(
        "flip",
        format!("x{p} <- {} after the opposite restriction computed the parity", ap as u8),
        &flipped,
    );
    if sigma2 < budget {
        refute_level(lvl.child(flipped, p, ap))
    } else if sigma2 == budget {
        check_level(lvl.child(flipped, p, ap))
    } else {
        Err(Error::bug(
            format!("flipped restriction of x{p} left {sigma2} gates, budget {budget}"),
            lvl.trace,
        ))
    }
}

/// Finds an input on which a DeMorgan circuit of size exactly `3(|I|−1)`
/// differs from `XOR_I ⊕ c`. Smaller circuits are handed to the refuter.
pub fn xor_check(inst: &XorInstance) -> Result<Witness> {
    let c = prepare(inst)?;
    let k = inst.indices.len();
    let sigma = c.binary_gate_count();
    let mut trace = RefutationTrace::new();
    if k >= 2 && sigma < 3 * (k - 1) {
        return super::xor_refute(inst);
    }
    if k < 2 || sigma > 3 * (k - 1) {
        return Err(Error::precondition(format!(
            "checker needs size 3(|I|-1) = {}, circuit has {sigma}",
            (3 * k).saturating_sub(3)
        )));
    }
    if computes_parity(&c, &inst.indices, inst.negated)? {
        return Err(Error::CircuitIsCorrect);
    }
    let w = check_level(Level {
        circuit: c,
        indices: inst.indices.clone(),
        c: inst.negated,
        a: inst.ambient.clone(),
        depth: 0,
        trace: &mut trace,
    })?;
    finish(inst, w, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::bits_to_string;
    use crate::harness::truth_table;
    use crate::xor::parity;

    fn x(i: usize) -> Node {
        Node::Input(i)
    }

    fn widget(b: &mut CircuitBuilder, u: Node, v: Node, top_or: bool) -> Node {
        let nu = b.not(u);
        let nv = b.not(v);
        let g1 = b.and(u, nv);
        let g2 = b.and(nu, v);
        if top_or {
            b.or(g1, g2)
        } else {
            b.and(g1, g2)
        }
    }

    #[test]
    fn base_case_on_and_circuit() {
        let mut b = CircuitBuilder::demorgan(2);
        let g1 = b.and(x(1), x(2));
        let g2 = b.or(x(1), x(2));
        let g3 = b.and(g1, g2);
        let c = b.build(g3);
        let w = xor_check(&XorInstance::new(c, false)).unwrap();
        assert_eq!(bits_to_string(&w.bits), "10");
    }

    #[test]
    fn sabotaged_tree_is_refuted() {
        let mut b = CircuitBuilder::demorgan(4);
        let w1 = widget(&mut b, x(1), x(2), true);
        let w2 = widget(&mut b, x(3), x(4), false);
        let top = widget(&mut b, w1, w2, true);
        let c = normalized(&b.build(top));
        assert_eq!(c.binary_gate_count(), 9);
        let tt = truth_table(&c).unwrap();
        assert!((0..16).any(|r| tt.get(r) != ((r as u32).count_ones() % 2 == 1)));
        let w = xor_check(&XorInstance::new(c.clone(), false)).unwrap();
        assert_ne!(c.evaluate(&w.bits).unwrap(), parity(&[1, 2, 3, 4], false, &w.bits));
    }

    #[test]
    fn correct_circuit_is_rejected() {
        let mut b = CircuitBuilder::demorgan(3);
        let w1 = widget(&mut b, x(1), x(2), true);
        let top = widget(&mut b, w1, x(3), true);
        let c = normalized(&b.build(top));
        assert!(matches!(
            xor_check(&XorInstance::new(c.clone(), false)),
            Err(Error::CircuitIsCorrect)
        ));
        let w = xor_check(&XorInstance::new(c, true)).unwrap();
        assert!(w.circuit_output != w.spec_output);
    }

    #[test]
    fn small_circuits_match_every_non_parity_table() {
        let layout = crate::circuit::InputLayout::Plain(2);
        let base = Circuit::constant(Basis::DeMorgan, layout, false);
        for bits in 0..16u8 {
            let f = TruthTable::from_bits(bits);
            match small_circuit(&base, f, 1, 2) {
                None => assert_eq!(f.class(), GateClass::XorType),
                Some(c) => {
                    assert!(c.binary_gate_count() <= 1);
                    assert_eq!(truth_table(&c).unwrap().to_string(), f.to_string());
                }
            }
        }
    }
}
