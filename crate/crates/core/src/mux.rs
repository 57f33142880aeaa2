//! Refuting DeMorgan circuits that are too small to compute the multiplexer.

use serde::Serialize;

use crate::circuit::{Assignment, Basis, Circuit, InputLayout, Node};
use crate::error::{Error, Result};
use crate::rewrite::{fixing_value, normalized, substitute_const};
use crate::trace::RefutationTrace;

/// Address bits selecting live data index `i` (1-based) when only the last
/// `m` of `n` address bits are live. The live bits hold `i − 1` with
/// `a_{n−m+1}` most significant; the fixed bits are 0.
pub fn bin_addr(i: usize, m: usize, n: usize) -> Result<Vec<bool>> {
    if m > n || m >= usize::BITS as usize {
        return Err(Error::input(format!("{m} live address bits out of {n}")));
    }
    if i == 0 || i > 1 << m {
        return Err(Error::input(format!("index {i} outside [1, {}]", 1usize << m)));
    }
    let v = i - 1;
    Ok((1..=n)
        .map(|k| k > n - m && (v >> (n - k)) & 1 == 1)
        .collect())
}

/// The 1-based data index an address selects, `a_1` most significant.
pub fn int_addr(a: &[bool]) -> usize {
    a.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize) + 1
}

/// `MUX_n(a, x) = x_{int(a)}`.
pub fn mux_spec(a: &[bool], x: &[bool]) -> Result<bool> {
    if a.len() >= usize::BITS as usize || x.len() != 1 << a.len() {
        return Err(Error::input(format!(
            "{} address bits need {} data bits, got {}",
            a.len(),
            1u128 << a.len().min(127),
            x.len()
        )));
    }
    Ok(x[int_addr(a) - 1])
}

/// The threshold `2·2^m + m − 2`.
pub fn mux_size_bound(m: usize) -> usize {
    2 * (1 << m) + m - 2
}

#[derive(Clone, Debug)]
pub struct MuxInstance {
    /// DeMorgan circuit over `a_1..a_n, x_1..x_N`.
    pub circuit: Circuit,
    /// Live address bits: `a_{n−m+1}..a_n`.
    pub m: usize,
    /// Data assignment, length `N`.
    pub d: Vec<bool>,
}

impl MuxInstance {
    /// All address bits live, data bits zero.
    pub fn new(circuit: Circuit) -> Result<Self> {
        match circuit.layout() {
            InputLayout::Mux { addr, data } => Ok(MuxInstance {
                circuit,
                m: addr,
                d: vec![false; data],
            }),
            InputLayout::Plain(_) => Err(Error::input("circuit has no address/data layout")),
        }
    }

    fn dims(&self) -> Result<(usize, usize)> {
        match self.circuit.layout() {
            InputLayout::Mux { addr, data } => Ok((addr, data)),
            InputLayout::Plain(_) => Err(Error::input("circuit has no address/data layout")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MuxWitness {
    pub addr: Assignment,
    pub data: Assignment,
    pub circuit_output: bool,
    pub spec_output: bool,
    pub trace: RefutationTrace,
}

impl MuxWitness {
    /// Address then data, as the circuit reads them.
    pub fn joined(&self) -> Assignment {
        Assignment::from_mux(&self.addr, &self.data)
    }
}

struct Refuter {
    circuit: Circuit,
    n: usize,
    m: usize,
    d: Vec<bool>,
    depth: usize,
    trace: RefutationTrace,
}

impl Refuter {
    fn data_input(&self, i: usize) -> usize {
        self.n + i
    }

    fn addr_input(&self) -> usize {
        self.n - self.m + 1
    }

    fn disagrees(&self, addr: &[bool], data: &[bool]) -> bool {
        let x: Vec<bool> = addr.iter().chain(data).copied().collect();
        self.circuit.eval_unchecked(&x) != data[int_addr(addr) - 1]
    }

    fn flip(&self, j: usize) -> Vec<bool> {
        let mut d = self.d.clone();
        d[j - 1] = !d[j - 1];
        d
    }

    /// First erring probe among `(bin(i), data)` pairs.
    fn scan(&self, case: &str, probes: &[(usize, Vec<bool>)]) -> Result<(Vec<bool>, Vec<bool>)> {
        for (i, data) in probes {
            let addr = bin_addr(*i, self.m, self.n)?;
            if self.disagrees(&addr, data) {
                return Ok((addr, data.clone()));
            }
        }
        Err(Error::bug(format!("{case}: no probe disagrees"), &self.trace))
    }

    fn record(&mut self, case: &str, note: String, after: &Circuit) {
        let before = self.circuit.measures();
        self.trace.push(self.depth, case, note, before, after.measures());
    }

    fn reads(&self, g: &crate::circuit::Gate, input: usize) -> bool {
        g.is_binary()
            && g.sources()
                .iter()
                .any(|&s| self.circuit.literal(s).0 == Node::Input(input))
    }

    fn fixing_input(&self, gate: usize, input: usize) -> Result<bool> {
        let g = self.circuit.gate(gate);
        let (slot, neg) = g
            .sources()
            .iter()
            .enumerate()
            .find_map(|(slot, &s)| {
                let (base, neg) = self.circuit.literal(s);
                (base == Node::Input(input)).then_some((slot, neg))
            })
            .ok_or_else(|| Error::bug(format!("g{} does not read input {input}", gate + 1), &self.trace))?;
        let (b, _) = fixing_value(g.kind(), slot)
            .ok_or_else(|| Error::bug(format!("g{} has no fixing constant", gate + 1), &self.trace))?;
        Ok(b ^ neg)
    }

    fn run(&mut self) -> Result<(Vec<bool>, Vec<bool>)> {
        loop {
            let m = self.m;
            let sigma = self.circuit.binary_gate_count();
            if sigma >= mux_size_bound(m) {
                return Err(Error::bug(
                    format!("level m = {m} has {sigma} gates, bound {}", mux_size_bound(m)),
                    &self.trace,
                ));
            }
            if m == 1 {
                let mut probes = vec![
                    (1, self.d.clone()),
                    (1, self.flip(1)),
                    (2, self.d.clone()),
                    (2, self.flip(2)),
                ];
                // A two-gate circuit can agree with MUX_1 on all four, e.g.
                // x1 OR (a AND x2) with d = 00, so the rest of the cube follows.
                let both = {
                    let mut d = self.flip(1);
                    d[1] = !d[1];
                    d
                };
                probes.extend([(1, self.flip(2)), (1, both.clone()), (2, self.flip(1)), (2, both)]);
                let w = self.scan("base", &probes)?;
                let c = self.circuit.clone();
                self.record("base", "probes over a_n, x1, x2".into(), &c);
                return Ok(w);
            }

            let half = 1 << (m - 1);
            for i in half + 1..=2 * half {
                let input = self.data_input(i);
                if !self.circuit.reads_input(input) {
                    let probes = [(i, self.d.clone()), (i, self.flip(i))];
                    let w = self.scan("case1", &probes)?;
                    let c = self.circuit.clone();
                    self.record("case1", format!("x{i} is not read"), &c);
                    return Ok(w);
                }
                let out = self.circuit.literal(self.circuit.output()).0;
                let alpha = self.circuit.minimal_gate(|_, g| self.reads(g, input));
                let alpha = match alpha {
                    Some(alpha) => alpha,
                    None if out == Node::Input(input) => {
                        let probes = [(half, self.d.clone()), (half, self.flip(half))];
                        let w = self.scan("case2", &probes)?;
                        let c = self.circuit.clone();
                        self.record("case2", format!("output is the literal x{i}"), &c);
                        return Ok(w);
                    }
                    None => {
                        return Err(Error::bug(format!("x{i} is read by no binary gate"), &self.trace))
                    }
                };
                self.d[i - 1] = self.fixing_input(alpha, input)?;
                if out == Node::Gate(alpha) {
                    let probes = [(half, self.d.clone()), (half, self.flip(half))];
                    let w = self.scan("case2", &probes)?;
                    let c = self.circuit.clone();
                    self.record(
                        "case2",
                        format!("x{i} <- {} fixes output g{}", self.d[i - 1] as u8, alpha + 1),
                        &c,
                    );
                    return Ok(w);
                }
                let next = substitute_const(&self.circuit, input, self.d[i - 1])?;
                let drop = sigma_drop(&self.circuit, &next);
                self.record(
                    "data",
                    format!("x{i} <- {} fixes g{}", self.d[i - 1] as u8, alpha + 1),
                    &next,
                );
                if drop < 2 {
                    return Err(Error::bug(
                        format!("fixing x{i} removed {drop} gates, expected at least 2"),
                        &self.trace,
                    ));
                }
                self.circuit = next;
            }

            let a = self.addr_input();
            if !self.circuit.reads_input(a) {
                self.d[0] = !self.d[half];
                let probes = [(1, self.d.clone()), (half + 1, self.d.clone())];
                let w = self.scan("case3", &probes)?;
                let c = self.circuit.clone();
                self.record("case3", format!("a{a} is not read"), &c);
                return Ok(w);
            }
            let read_by_gate = self.circuit.gates().iter().any(|g| self.reads(g, a));
            let next = substitute_const(&self.circuit, a, false)?;
            let drop = sigma_drop(&self.circuit, &next);
            self.record("address", format!("a{a} <- 0"), &next);
            if read_by_gate && drop < 1 {
                return Err(Error::bug(format!("fixing a{a} removed no gate"), &self.trace));
            }
            let bound = mux_size_bound(m - 1);
            if next.binary_gate_count() >= bound {
                return Err(Error::bug(
                    format!("{} gates left for m = {}, bound {bound}", next.binary_gate_count(), m - 1),
                    &self.trace,
                ));
            }
            self.circuit = next;
            self.m -= 1;
            self.depth += 1;
        }
    }
}

fn sigma_drop(before: &Circuit, after: &Circuit) -> usize {
    before.binary_gate_count().saturating_sub(after.binary_gate_count())
}

/// Finds an input on which a DeMorgan circuit with `σ < 2·2^m + m − 2`
/// differs from the multiplexer. Fixed address bits stay 0 and data bits
/// past `2^m` keep their value in `d`.
pub fn mux_refute(inst: &MuxInstance) -> Result<MuxWitness> {
    let (n, data) = inst.dims()?;
    if inst.circuit.basis() != Basis::DeMorgan {
        return Err(Error::input("mux refutation expects a DeMorgan circuit"));
    }
    if let Err(errs) = inst.circuit.validate() {
        return Err(Error::input(format!("invalid circuit: {}", errs[0])));
    }
    if inst.m == 0 || inst.m > n {
        return Err(Error::input(format!("live address count {} outside [1, {n}]", inst.m)));
    }
    if inst.d.len() != data {
        return Err(Error::input(format!("data assignment has {} bits, expected {data}", inst.d.len())));
    }
    let circuit = normalized(&inst.circuit);
    let live = 1usize << inst.m;
    if let Some(stray) = circuit
        .read_inputs()
        .into_iter()
        .find(|&k| (k <= n && k <= n - inst.m) || (k > n && k - n > live))
    {
        return Err(Error::precondition(format!(
            "circuit reads fixed input {}",
            circuit.layout().name(stray)
        )));
    }
    let sigma = circuit.binary_gate_count();
    if sigma >= mux_size_bound(inst.m) {
        return Err(Error::precondition(format!(
            "refuter needs size below {}, circuit has {sigma}",
            mux_size_bound(inst.m)
        )));
    }

    let mut r = Refuter {
        circuit,
        n,
        m: inst.m,
        d: inst.d.clone(),
        depth: 0,
        trace: RefutationTrace::new(),
    };
    let (addr, data_bits) = r.run()?;
    let trace = r.trace;

    let x: Vec<bool> = addr.iter().chain(&data_bits).copied().collect();
    let circuit_output = inst.circuit.evaluate(&x)?;
    let spec_output = mux_spec(&addr, &data_bits)?;
    if circuit_output == spec_output {
        return Err(Error::bug("returned input does not refute the circuit", &trace));
    }
    let frame_ok = addr[..n - inst.m].iter().all(|&b| !b)
        && data_bits[live..] == inst.d[live..];
    if !frame_ok {
        return Err(Error::bug("witness changed a fixed bit", &trace));
    }
    Ok(MuxWitness {
        addr: Assignment(addr),
        data: Assignment(data_bits),
        circuit_output,
        spec_output,
        trace,
    })
}
