use crate::circuit::{Circuit, Gate, Node};
use crate::error::{Error, Result};
use crate::rewrite::{fixing_value, substitute_const};
use crate::trace::RefutationTrace;

use super::{finish, parity, prepare, Witness, XorInstance};

/// Mutable state of one recursion level.
pub(super) struct Level<'a> {
    pub circuit: Circuit,
    pub indices: Vec<usize>,
    pub c: bool,
    pub a: Vec<bool>,
    pub depth: usize,
    pub trace: &'a mut RefutationTrace,
}

/// Where the branches shared by the refuter and the checker ended up.
pub(super) enum Shared {
    Found(Vec<bool>),
    /// All four assertions hold; `beta` reads `x_p` and is not the output.
    Substitute { alpha: usize, beta: usize, p: usize },
}

impl Level<'_> {
    fn disagrees(&self, x: &[bool]) -> bool {
        self.circuit.eval_unchecked(x) != parity(&self.indices, self.c, x)
    }

    /// The first of `candidates` the circuit gets wrong.
    pub fn scan(&self, candidates: Vec<Vec<bool>>, case: &str) -> Result<Vec<bool>> {
        candidates
            .into_iter()
            .find(|x| self.disagrees(x))
            .ok_or_else(|| Error::bug(format!("{case}: no probe disagrees"), self.trace))
    }

    fn flipped(&self, bits: &[usize]) -> Vec<bool> {
        let mut x = self.a.clone();
        for &i in bits {
            x[i - 1] = !x[i - 1];
        }
        x
    }

    fn record(&mut self, case: &str, note: String, after: &Circuit) {
        let before = self.circuit.measures();
        self.trace.push(self.depth, case, note, before, after.measures());
    }

    /// Value of `x_var` that fixes `gate` through the slot reading `(¬)x_var`.
    fn fixing_input(&self, gate: usize, var: usize) -> Result<bool> {
        let g: &Gate = self.circuit.gate(gate);
        let (slot, neg) = g
            .sources()
            .iter()
            .enumerate()
            .find_map(|(slot, &s)| {
                let (base, neg) = self.circuit.literal(s);
                (base == Node::Input(var)).then_some((slot, neg))
            })
            .ok_or_else(|| Error::bug(format!("gate g{} does not read x{var}", gate + 1), self.trace))?;
        let (b, _) = fixing_value(g.kind(), slot)
            .ok_or_else(|| Error::bug(format!("gate g{} has no fixing value", gate + 1), self.trace))?;
        Ok(b ^ neg)
    }

    fn output_is(&self, gate: usize) -> bool {
        self.circuit.literal(self.circuit.output()).0 == Node::Gate(gate)
    }

    fn reads_base(&self, g: &Gate, base: Node) -> bool {
        g.is_binary() && g.sources().iter().any(|&s| self.circuit.literal(s).0 == base)
    }

    /// The base case and Cases 1 to 4, up to the point where `x_p` is fixed
    /// to eliminate three gates.
    pub fn shared_cases(&mut self) -> Result<Shared> {
        let k = self.indices.len();
        if k == 2 {
            let (i, j) = (self.indices[0], self.indices[1]);
            let probes = vec![self.a.clone(), self.flipped(&[i]), self.flipped(&[j]), self.flipped(&[i, j])];
            let w = self.scan(probes, "base")?;
            let c = self.circuit.clone();
            self.record("base", format!("scan over x{i}, x{j}"), &c);
            return Ok(Shared::Found(w));
        }

        let fanouts = self.circuit.fanouts();
        if let Some(&i) = self.indices.iter().find(|&&i| fanouts.input(i) == 0) {
            let w = self.scan(vec![self.a.clone(), self.flipped(&[i])], "case1")?;
            let c = self.circuit.clone();
            self.record("case1", format!("x{i} is not read"), &c);
            return Ok(Shared::Found(w));
        }

        let alpha = self
            .circuit
            .minimal_gate(|_, g| g.is_binary())
            .ok_or_else(|| Error::bug("no binary gate in a circuit reading three variables", self.trace))?;
        let srcs = self.circuit.gate(alpha).sources();
        let var_of = |n: Node| match self.circuit.literal(n).0 {
            Node::Input(i) => Ok(i),
            other => Err(Error::bug(format!("minimal gate reads non-input {other:?}"), self.trace)),
        };
        let (mut p, mut q) = (var_of(srcs[0])?, var_of(srcs[1])?);
        if fanouts.input(p) != 1 && fanouts.input(q) == 1 {
            std::mem::swap(&mut p, &mut q);
        }

        if fanouts.input(p) == 1 || self.output_is(alpha) {
            self.a[q - 1] = self.fixing_input(alpha, q)?;
            let w = self.scan(vec![self.a.clone(), self.flipped(&[p])], "case2-3")?;
            let c = self.circuit.clone();
            self.record("case2-3", format!("x{q} <- {} fixes g{}", self.a[q - 1] as u8, alpha + 1), &c);
            return Ok(Shared::Found(w));
        }

        let base_p = Node::Input(p);
        let beta = self
            .circuit
            .minimal_gate(|id, g| id != alpha && self.reads_base(g, base_p))
            .ok_or_else(|| Error::bug(format!("x{p} has no second binary reader"), self.trace))?;
        if self.output_is(beta) {
            self.a[p - 1] = self.fixing_input(beta, p)?;
            let w = self.scan(vec![self.a.clone(), self.flipped(&[q])], "case4")?;
            let c = self.circuit.clone();
            self.record("case4", format!("x{p} <- {} fixes output g{}", self.a[p - 1] as u8, beta + 1), &c);
            return Ok(Shared::Found(w));
        }
        Ok(Shared::Substitute { alpha, beta, p })
    }

    /// Fixes `x_p` to `value` and returns the simplified circuit.
    pub fn restrict(&self, p: usize, value: bool) -> Result<Circuit> {
        substitute_const(&self.circuit, p, value)
    }

    pub fn third_gate(&self, beta: usize) -> Option<usize> {
        self.circuit
            .minimal_gate(|_, g| self.reads_base(g, Node::Gate(beta)))
    }

    pub fn fix_beta(&self, beta: usize, p: usize) -> Result<bool> {
        self.fixing_input(beta, p)
    }

    pub fn record_step(&mut self, case: &str, note: String, after: &Circuit) {
        self.record(case, note, after);
    }

    pub fn child(&mut self, circuit: Circuit, p: usize, value: bool) -> Level<'_> {
        let mut a = self.a.clone();
        a[p - 1] = value;
        Level {
            circuit,
            indices: self.indices.iter().copied().filter(|&i| i != p).collect(),
            c: self.c ^ value,
            a,
            depth: self.depth + 1,
            trace: self.trace,
        }
    }
}

pub(super) fn refute_level(mut lvl: Level<'_>) -> Result<Vec<bool>> {
    let k = lvl.indices.len();
    let sigma = lvl.circuit.binary_gate_count();
    if k < 2 || sigma >= 3 * (k - 1) {
        return Err(Error::bug(
            format!("refuter reached size {sigma} with {k} live variables"),
            lvl.trace,
        ));
    }
    match lvl.shared_cases()? {
        Shared::Found(w) => Ok(w),
        Shared::Substitute { beta, p, .. } => {
            let gamma = lvl
                .third_gate(beta)
                .ok_or_else(|| Error::bug(format!("g{} has no binary reader", beta + 1), lvl.trace))?;
            let ap = lvl.fix_beta(beta, p)?;
            let next = lvl.restrict(p, ap)?;
            let drop = sigma - next.binary_gate_count();
            lvl.record_step(
                "substitute",
                format!("x{p} <- {} fixes g{}, third gate g{}", ap as u8, beta + 1, gamma + 1),
                &next,
            );
            if drop < 3 {
                return Err(Error::bug(
                    format!("fixing x{p} removed {drop} gates, expected at least 3"),
                    lvl.trace,
                ));
            }
            refute_level(lvl.child(next, p, ap))
        }
    }
}

/// Finds an input on which a DeMorgan circuit with `σ < 3(|I|−1)` differs
/// from `XOR_I ⊕ c`, keeping bits outside `I` at the ambient assignment.
pub fn xor_refute(inst: &XorInstance) -> Result<Witness> {
    let c = prepare(inst)?;
    let k = inst.indices.len();
    let sigma = c.binary_gate_count();
    if k < 2 || sigma >= 3 * (k - 1) {
        return Err(Error::precondition(format!(
            "refuter needs size below 3(|I|-1) = {}, circuit has {sigma}",
            (3 * k).saturating_sub(3)
        )));
    }
    let mut trace = RefutationTrace::new();
    let w = refute_level(Level {
        circuit: c,
        indices: inst.indices.clone(),
        c: inst.negated,
        a: inst.ambient.clone(),
        depth: 0,
        trace: &mut trace,
    })?;
    finish(inst, w, trace)
}
