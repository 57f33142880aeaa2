//! Subcommands, reports and exit codes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gatelim::affine::{find_constant_subspace, verify_constant, AffineInstance};
use gatelim::circuit::{bits_to_string, parse_bits, Circuit, InputLayout, Measures};
use gatelim::gf2::AffineSubspace;
use gatelim::harness::{generate, GenKind, GenMeta, GenSpec, SpecFunction};
use gatelim::mux::{mux_refute, MuxInstance};
use gatelim::rewrite::normalize;
use gatelim::trace::{RefutationTrace, TraceStep};
use gatelim::xor::{detect_xor, xor_check, xor_refute, XorInstance, XorVerdict};
use serde::Serialize;
use thiserror::Error;

use crate::format::{parse_circuit, parse_subspace, print_circuit, subspace_strings, FormatError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AGREES: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_BUG: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gatelim", version, about = "Gate-elimination refuters for XOR, MUX and affine dispersers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Circuit file.
    #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
    pub circuit: Option<PathBuf>,
    /// Run on every `.ckt` file in a directory, one report per line.
    #[arg(long)]
    pub batch: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct XorArgs {
    #[command(flatten)]
    pub source: Source,
    /// Target `XOR_I ⊕ 1` instead of `XOR_I`.
    #[arg(long)]
    pub negated: bool,
    /// Comma-separated 1-based index set; defaults to the variables the circuit reads.
    #[arg(long, value_delimiter = ',')]
    pub indices: Option<Vec<usize>>,
    /// Values for variables outside the index set, x1 first; defaults to zeros.
    #[arg(long)]
    pub ambient: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find an input where a circuit below 3(|I|-1) gates errs on parity.
    RefuteXor(XorArgs),
    /// Find an input where a circuit of exactly 3(|I|-1) gates errs on parity.
    CheckXor(XorArgs),
    /// Decide whether a circuit of size 3(n-1) computes XOR, XNOR or neither.
    DetectXor {
        #[command(flatten)]
        source: Source,
    },
    /// Find an input where a small circuit errs on the multiplexer.
    RefuteMux {
        #[command(flatten)]
        source: Source,
        /// Live address bits m; defaults to every address bit.
        #[arg(long)]
        addr_bits: Option<usize>,
        /// Data assignment d, x1 first; defaults to zeros.
        #[arg(long)]
        data: Option<String>,
    },
    /// Find an affine subspace of dimension at least d where a B2 circuit is constant.
    RefuteAffine {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        dim: usize,
        /// Ambient subspace file; defaults to the whole space.
        #[arg(long)]
        subspace: Option<PathBuf>,
        /// Seed for sampled verification on large subspaces.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply the simplification rules.
    Normalize {
        #[command(flatten)]
        source: Source,
        /// Write the normalized circuit here instead of embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a test instance.
    Gen {
        /// xor-tree, sabotaged-xor-tree, undersized-xor, mux-candidate or random-b2-under-mu.
        #[arg(long)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1)]
        mutations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a circuit and a specification disagree on a witness.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = ["xor", "nxor", "mux", "constant-on-subspace"])]
        spec: String,
        /// Full input assignment, x1 first (a1 first for MUX circuits).
        #[arg(long)]
        witness: String,
        /// Index set for xor and nxor; defaults to every input.
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
        /// Subspace file for constant-on-subspace.
        #[arg(long)]
        subspace: Option<PathBuf>,
        /// Claimed constant for constant-on-subspace.
        #[arg(long, default_value_t = 0)]
        value: u8,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error("witness failed re-verification: {0}")]
    Unverified(String),
    #[error(transparent)]
    Core(#[from] gatelim::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } | CliError::Usage(_) => EXIT_PARSE,
            CliError::Core(e) => match e {
                gatelim::Error::Input(_) => EXIT_PARSE,
                gatelim::Error::Precondition(_)
                | gatelim::Error::CircuitIsCorrect
                | gatelim::Error::Resource(_) => EXIT_PRECONDITION,
                gatelim::Error::Bug { .. } => EXIT_BUG,
            },
            CliError::Unverified(_) => EXIT_BUG,
        }
    }
}

/// Circuit and spec outputs on the witness, recomputed from the files.
#[derive(Debug, Serialize)]
pub struct Echo {
    pub circuit_output: bool,
    pub spec_output: Option<bool>,
    pub disagrees: bool,
}

#[derive(Debug, Serialize)]
pub struct SubspaceReport {
    pub ambient: usize,
    pub dim: usize,
    pub directions: Vec<String>,
    pub offset: String,
    pub value: bool,
    pub exhaustive: bool,
    pub points_checked: usize,
}

#[derive(Debug, Serialize)]
pub struct TraceSummary {
    pub cases: Vec<String>,
    pub steps: Vec<TraceStep>,
}

impl From<&RefutationTrace> for TraceSummary {
    fn from(t: &RefutationTrace) -> Self {
        TraceSummary {
            cases: t.cases().into_iter().map(String::from).collect(),
            steps: t.steps.clone(),
        }
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub verdict: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub echo: Option<Echo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measures: Option<Measures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_measures: Option<Measures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<GenMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub elapsed_ms: f64,
}

impl Report {
    fn new(command: &str, verdict: &str) -> Self {
        Report {
            command: command.to_string(),
            verdict: verdict.to_string(),
            ..Default::default()
        }
    }

    fn failed(command: &str, err: &CliError) -> Self {
        let mut r = Report::new(command, "error");
        r.exit_code = err.exit_code();
        r.message = Some(err.to_string());
        if let CliError::Core(gatelim::Error::Bug { trace, .. }) = err {
            r.trace = Some(trace.into());
        }
        r
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    parse_circuit(&read(path)?).map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_subspace(path: &Path) -> Result<AffineSubspace, CliError> {
    parse_subspace(&read(path)?).map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

fn bits_arg(s: &str, len: usize, what: &str) -> Result<Vec<bool>, CliError> {
    let b = parse_bits(s).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
    if b.len() != len {
        return Err(CliError::Usage(format!("{what} needs {len} bits, got {}", b.len())));
    }
    Ok(b)
}

fn echo(circuit: &Circuit, spec: &SpecFunction, w: &[bool]) -> Result<Echo, CliError> {
    let circuit_output = circuit.evaluate(w)?;
    let spec_output = spec.eval(w)?;
    Ok(Echo {
        circuit_output,
        spec_output,
        disagrees: spec_output.is_some_and(|s| s != circuit_output),
    })
}

fn checked(e: Echo, w: &str) -> Result<Echo, CliError> {
    if e.disagrees {
        Ok(e)
    } else {
        Err(CliError::Unverified(format!("circuit and spec agree on {w}")))
    }
}

fn xor_instance(c: Circuit, args: &XorArgs) -> Result<XorInstance, CliError> {
    let n = c.num_inputs();
    let indices = match &args.indices {
        Some(i) => i.clone(),
        None => {
            let read = c.read_inputs();
            if read.is_empty() {
                (1..=n).collect()
            } else {
                read
            }
        }
    };
    let ambient = match &args.ambient {
        Some(a) => bits_arg(a, n, "--ambient")?,
        None => vec![false; n],
    };
    Ok(XorInstance {
        circuit: c,
        indices,
        negated: args.negated,
        ambient,
    })
}

fn run_xor(name: &str, c: Circuit, args: &XorArgs, check: bool) -> Result<Report, CliError> {
    let inst = xor_instance(c.clone(), args)?;
    let w = if check { xor_check(&inst)? } else { xor_refute(&inst)? };
    let spec = SpecFunction::Xor {
        indices: inst.indices.clone(),
        negated: inst.negated,
    };
    let mut r = Report::new(name, "refuted");
    r.echo = Some(checked(echo(&c, &spec, w.bits.bits())?, &w.bits.to_string())?);
    r.witness = Some(w.bits.to_string());
    r.measures = Some(c.measures());
    r.trace = Some((&w.trace).into());
    Ok(r)
}

fn run_mux(c: Circuit, addr_bits: Option<usize>, data: Option<&str>) -> Result<Report, CliError> {
    let InputLayout::Mux { addr, data: len } = c.layout() else {
        return Err(CliError::Usage("refute-mux needs a circuit declared with `inputs addr=n data=N`".into()));
    };
    let m = addr_bits.unwrap_or(addr);
    let d = match data {
        Some(s) => bits_arg(s, len, "--data")?,
        None => vec![false; len],
    };
    let w = mux_refute(&MuxInstance {
        circuit: c.clone(),
        m,
        d,
    })?;
    let mut r = Report::new("refute-mux", "refuted");
    let x = w.joined();
    r.echo = Some(checked(echo(&c, &SpecFunction::Mux { addr_bits: addr }, x.bits())?, &x.to_string())?);
    r.witness = Some(x.to_string());
    r.address = Some(bits_to_string(w.addr.bits()));
    r.data = Some(bits_to_string(w.data.bits()));
    r.measures = Some(c.measures());
    r.trace = Some((&w.trace).into());
    Ok(r)
}

fn run_affine(c: Circuit, d: usize, subspace: Option<&Path>, seed: u64) -> Result<Report, CliError> {
    let s = match subspace {
        Some(p) => load_subspace(p)?,
        None => AffineSubspace::full(c.num_inputs()),
    };
    let res = find_constant_subspace(&AffineInstance {
        circuit: c.clone(),
        subspace: s,
        d,
    })?;
    // Recheck from scratch rather than echoing the search's own verification.
    let v = verify_constant(&c, &res.subspace, res.value, seed)?;
    let (directions, offset) = subspace_strings(&res.subspace);
    let mut r = Report::new("refute-affine", "constant-subspace");
    r.subspace = Some(SubspaceReport {
        ambient: res.subspace.ambient(),
        dim: res.subspace.dim(),
        directions,
        offset,
        value: res.value,
        exhaustive: v.exhaustive,
        points_checked: v.points,
    });
    r.measures = Some(c.measures());
    r.trace = Some((&res.trace).into());
    Ok(r)
}

fn run_verify(
    c: Circuit,
    spec: &str,
    witness: &str,
    indices: Option<&[usize]>,
    subspace: Option<&Path>,
    value: u8,
) -> Result<Report, CliError> {
    let n = c.num_inputs();
    let spec = match spec {
        "xor" | "nxor" => SpecFunction::Xor {
            indices: indices.map(<[usize]>::to_vec).unwrap_or_else(|| (1..=n).collect()),
            negated: spec == "nxor",
        },
        "mux" => match c.layout() {
            InputLayout::Mux { addr, .. } => SpecFunction::Mux { addr_bits: addr },
            InputLayout::Plain(_) => {
                return Err(CliError::Usage("the mux spec needs a circuit declared with `inputs addr=n data=N`".into()))
            }
        },
        _ => {
            let path = subspace.ok_or_else(|| CliError::Usage("constant-on-subspace needs --subspace".into()))?;
            if value > 1 {
                return Err(CliError::Usage("--value must be 0 or 1".into()));
            }
            SpecFunction::ConstantOnSubspace {
                subspace: load_subspace(path)?,
                value: value == 1,
            }
        }
    };
    let w = bits_arg(witness, n, "--witness")?;
    let e = echo(&c, &spec, &w)?;
    let mut r = Report::new("verify", if e.disagrees { "disagrees" } else { "agrees" });
    if !e.disagrees {
        r.exit_code = EXIT_AGREES;
    }
    r.witness = Some(bits_to_string(&w));
    r.echo = Some(e);
    Ok(r)
}

fn run_on(command: &Command, c: Circuit) -> Result<Report, CliError> {
    match command {
        Command::RefuteXor(args) => run_xor("refute-xor", c, args, false),
        Command::CheckXor(args) => run_xor("check-xor", c, args, true),
        Command::DetectXor { .. } => {
            let v = detect_xor(&c)?;
            let mut r = Report::new(
                "detect-xor",
                match v {
                    XorVerdict::Xor => "xor",
                    XorVerdict::NotXor => "nxor",
                    XorVerdict::Neither => "neither",
                },
            );
            r.measures = Some(c.measures());
            Ok(r)
        }
        Command::RefuteMux { addr_bits, data, .. } => run_mux(c, *addr_bits, data.as_deref()),
        Command::RefuteAffine { dim, subspace, seed, .. } => run_affine(c, *dim, subspace.as_deref(), *seed),
        Command::Normalize { out, .. } => {
            let (n, _) = normalize(&c);
            let mut r = Report::new("normalize", "normalized");
            r.measures = Some(c.measures());
            r.normalized_measures = Some(n.measures());
            let text = print_circuit(&n);
            match out {
                Some(p) => write(p, &text)?,
                None => r.circuit = Some(text),
            }
            Ok(r)
        }
        Command::Verify {
            spec,
            witness,
            indices,
            subspace,
            value,
            ..
        } => run_verify(c, spec, witness, indices.as_deref(), subspace.as_deref(), *value),
        Command::Gen { .. } => unreachable!("gen reads no circuit"),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::RefuteXor(_) => "refute-xor",
        Command::CheckXor(_) => "check-xor",
        Command::DetectXor { .. } => "detect-xor",
        Command::RefuteMux { .. } => "refute-mux",
        Command::RefuteAffine { .. } => "refute-affine",
        Command::Normalize { .. } => "normalize",
        Command::Gen { .. } => "gen",
        Command::Verify { .. } => "verify",
    }
}

fn source(command: &Command) -> Option<&Source> {
    match command {
        Command::RefuteXor(a) | Command::CheckXor(a) => Some(&a.source),
        Command::DetectXor { source }
        | Command::RefuteMux { source, .. }
        | Command::RefuteAffine { source, .. }
        | Command::Normalize { source, .. }
        | Command::Verify { source, .. } => Some(source),
        Command::Gen { .. } => None,
    }
}

fn run_gen(command: &Command) -> Result<Report, CliError> {
    let Command::Gen {
        kind,
        n,
        seed,
        budget,
        mutations,
        out,
    } = command
    else {
        unreachable!()
    };
    let g = generate(&GenSpec {
        kind: *kind,
        n: *n,
        seed: *seed,
        budget: *budget,
        mutations: *mutations,
    })?;
    let mut r = Report::new("gen", "generated");
    r.measures = Some(g.circuit.measures());
    let mut text = format!("# {kind:?} n={n} seed={seed}: {}\n", g.meta.note);
    if !g.meta.indices.is_empty() {
        let idx: Vec<String> = g.meta.indices.iter().map(|i| i.to_string()).collect();
        text += &format!("# target: indices {} negated {}\n", idx.join(","), g.meta.negated);
    }
    text += &print_circuit(&g.circuit);
    match out {
        Some(p) => write(p, &text)?,
        None => r.circuit = Some(text),
    }
    r.meta = Some(g.meta);
    Ok(r)
}

fn timed(name: &str, file: Option<String>, f: impl FnOnce() -> Result<Report, CliError>) -> Report {
    let start = Instant::now();
    let mut r = f().unwrap_or_else(|e| Report::failed(name, &e));
    r.file = file;
    r.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    r
}

/// Runs one invocation; returns the reports to print and the exit code.
pub fn run(cli: &Cli) -> (Vec<Report>, i32) {
    let name = command_name(&cli.command);
    let reports = match source(&cli.command) {
        None => vec![timed(name, None, || run_gen(&cli.command))],
        Some(Source { circuit: Some(p), .. }) => {
            vec![timed(name, None, || run_on(&cli.command, load_circuit(p)?))]
        }
        Some(Source { batch: Some(dir), .. }) => match batch_files(dir) {
            Ok(files) => files
                .iter()
                .map(|p| {
                    timed(name, Some(p.display().to_string()), || {
                        run_on(&cli.command, load_circuit(p)?)
                    })
                })
                .collect(),
            Err(e) => vec![Report::failed(name, &e)],
        },
        Some(_) => vec![Report::failed(name, &CliError::Usage("--circuit or --batch is required".into()))],
    };
    let code = reports.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK);
    (reports, code)
}

fn batch_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |source| CliError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ckt"))
        .collect();
    files.sort();
    Ok(files)
}

