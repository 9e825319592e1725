//! Experiment runner: one subcommand per reproducible experiment, a JSON
//! report on stdout and CSV/JSON artifacts under `--out`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use shallow_sampler::adversary::{
    brute_force_min_tvd, output_pmf, search_space_size, test_pass_probability, InputSource, LocalFunction, PassSource,
    StatTestConfig, Thresholds, MAX_INPUTS, MAX_SEARCH_SPACE,
};
use shallow_sampler::bintree::{build_tree, layer_partition};
use shallow_sampler::circuits::{
    block_size_for_exponent, depth_of, draw_samples, nonunitary_majmod_circuit, pmmajmod_circuit,
    poor_mans_ghz_circuit, prime_for_exponent, reference, run_exact, simulate, unitary_majmod_circuit_with, Circuit,
    SizeParam,
};
use shallow_sampler::compiler::compile_circuit;
use shallow_sampler::statekit::MAX_QUBITS;
use shallow_sampler::targets::{
    augmented_target_pmf, biased_uniformity_envelope, is_prime, modp_weight_pmf, total_variation, uniformity_envelope,
    TargetKind,
};
use shallow_sampler::{Pmf, StateVector};

#[derive(Parser, Debug)]
#[command(name = "shallow-sampler", version, about = "Exact experiments on shallow sampling circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Exact output distribution of a circuit, optionally with sampled shots.
    Simulate,
    /// Exact TVD between a circuit's output and its target.
    Tvd,
    /// `Pr[Y_x = parity(x)]` as a function of `|x|`.
    Correlation,
    /// Depth-3 Poor Man's GHZ preparation check.
    Pmghz,
    /// Statistical-test pass probabilities for a random local function.
    Lowerbound,
    /// Exhaustive minimum TVD over small local functions.
    Bruteforce,
    /// Distance of a binary weight mod p from uniform.
    Modp,
    /// Compile multi-qubit gates to one- and two-qubit gates.
    Compile,
    /// Closed-form asymptote and finite-n bound.
    Bound,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CircuitKind {
    Majmod,
    MajmodUnitary,
    Pmmajmod,
    PmmajmodUnitary,
    Pmghz,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct Flags {
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Exponent with `p ≈ n^c`; also fixes the unitarized block size.
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    l: Option<usize>,
    /// Input bias: `Pr[0] = 1/2 + bias`.
    #[arg(long, global = true)]
    bias: Option<f64>,
    #[arg(long, global = true)]
    shots: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, env = "SHALLOW_SAMPLER_THREADS")]
    threads: Option<usize>,
    /// Directory for artifacts; nothing is written without it.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, global = true, value_enum)]
    circuit: Option<CircuitKind>,
    /// Number of weights for `correlation`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Serialize)]
struct ExperimentReport {
    experiment: String,
    parameters: Value,
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<String>,
    seed: u64,
    wall_time_s: f64,
    dry_run: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Library(shallow_sampler::Error),
    Io(std::io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Library(_) => "library",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Library(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<shallow_sampler::Error> for CliError {
    fn from(e: shallow_sampler::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

fn check_odd_prime(p: u64) -> CliResult<()> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(usage(format!("--p {p} must be an odd prime")));
    }
    Ok(())
}

fn check_bias(b: f64) -> CliResult<()> {
    if !(b.abs() < 0.5) {
        return Err(usage(format!("--bias {b} must lie in (-1/2, 1/2)")));
    }
    Ok(())
}

fn check_qubits(q: usize) -> CliResult<()> {
    if q > MAX_QUBITS {
        return Err(usage(format!("{q} qubits exceed the cap of {MAX_QUBITS}")));
    }
    Ok(())
}

struct Ctx {
    flags: Flags,
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<String>,
}

impl Ctx {
    fn metric(&mut self, name: &str, value: f64) -> CliResult<()> {
        if !value.is_finite() {
            return Err(usage(format!("metric {name} is not finite")));
        }
        self.metrics.insert(name.to_string(), value);
        Ok(())
    }

    fn write(&mut self, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> Value) -> CliResult<()> {
        let Some(dir) = &self.flags.out else { return Ok(()) };
        std::fs::create_dir_all(dir)?;
        let (path, text) = match self.flags.format {
            Format::Csv => (dir.join(format!("{stem}.csv")), csv()),
            Format::Json => (dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&json()).expect("json") + "\n"),
        };
        std::fs::write(&path, text)?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }

    fn write_pmf(&mut self, stem: &str, pmf: &Pmf) -> CliResult<()> {
        self.write(stem, || pmf.to_csv(), || pmf.to_json())
    }
}

/// A circuit, its input state and (when defined) its target.
struct Setup {
    circuit: Circuit,
    input: StateVector,
    target: Option<Pmf>,
    p: Option<u64>,
}

fn circuit_kind(f: &Flags) -> CircuitKind {
    f.circuit.unwrap_or(CircuitKind::Majmod)
}

fn validate_circuit(f: &Flags, kind: CircuitKind) -> CliResult<()> {
    let n = required(f.n, "n")?;
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    match kind {
        CircuitKind::Majmod => {
            check_odd_prime(required(f.p, "p")?)?;
            check_qubits(n)
        }
        CircuitKind::Pmmajmod => {
            check_odd_prime(required(f.p, "p")?)?;
            check_qubits(2 * n - 1)
        }
        CircuitKind::MajmodUnitary | CircuitKind::PmmajmodUnitary => {
            let c = required(f.c, "c")?;
            block_size_for_exponent(c)?;
            if let Some(p) = f.p {
                check_odd_prime(p)?;
            }
            check_qubits(if kind == CircuitKind::MajmodUnitary { n } else { 2 * n - 1 })
        }
        CircuitKind::Pmghz => check_qubits(2 * n - 1),
    }
}

fn build_setup(f: &Flags, kind: CircuitKind) -> CliResult<Setup> {
    let n = required(f.n, "n")?;
    Ok(match kind {
        CircuitKind::Majmod => {
            let p = required(f.p, "p")?;
            Setup {
                circuit: nonunitary_majmod_circuit(n, p)?,
                input: StateVector::ghz(n)?,
                target: Some(augmented_target_pmf(TargetKind::MajmodParity, n, p)?),
                p: Some(p),
            }
        }
        CircuitKind::MajmodUnitary => {
            let c = required(f.c, "c")?;
            let p = f.p.unwrap_or_else(|| prime_for_exponent(n, c));
            Setup {
                circuit: unitary_majmod_circuit_with(n, p, block_size_for_exponent(c)?)?,
                input: StateVector::ghz(n)?,
                target: Some(augmented_target_pmf(TargetKind::MajmodParity, n, p)?),
                p: Some(p),
            }
        }
        CircuitKind::Pmmajmod => {
            let p = required(f.p, "p")?;
            Setup {
                circuit: pmmajmod_circuit(n, SizeParam::Prime(p), false)?,
                input: StateVector::zero(2 * n - 1)?,
                target: Some(augmented_target_pmf(TargetKind::Pmmajmod, n, p)?),
                p: Some(p),
            }
        }
        CircuitKind::PmmajmodUnitary => {
            let c = required(f.c, "c")?;
            let p = f.p.unwrap_or_else(|| prime_for_exponent(n, c));
            let circuit = match f.p {
                Some(p) => pmmajmod_circuit(n, SizeParam::Prime(p), true)?,
                None => pmmajmod_circuit(n, SizeParam::Exponent(c), true)?,
            };
            Setup {
                circuit,
                input: StateVector::zero(2 * n - 1)?,
                target: Some(augmented_target_pmf(TargetKind::Pmmajmod, n, p)?),
                p: Some(p),
            }
        }
        CircuitKind::Pmghz => Setup {
            circuit: poor_mans_ghz_circuit(n)?,
            input: StateVector::zero(2 * n - 1)?,
            target: None,
            p: None,
        },
    })
}

fn run_simulate(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let kind = circuit_kind(&f);
    validate_circuit(&f, kind)?;
    if f.shots == Some(0) {
        return Err(usage("--shots must be positive"));
    }
    if f.dry_run {
        return Ok(());
    }
    let s = build_setup(&f, kind)?;
    let pmf = run_exact(&s.circuit, &s.input)?;
    ctx.metric("n_qubits", s.circuit.n_qubits as f64)?;
    ctx.metric("depth", depth_of(&s.circuit) as f64)?;
    ctx.metric("support_size", pmf.support_size() as f64)?;
    if let Some(t) = &s.target {
        ctx.metric("tvd_to_target", total_variation(&pmf, t)?)?;
    }
    ctx.write_pmf("pmf", &pmf)?;
    if let Some(shots) = f.shots {
        let samples = draw_samples(&s.circuit, &s.input, shots, f.seed)?;
        let emp = samples.empirical_pmf()?;
        ctx.metric("shots", shots as f64)?;
        ctx.metric("empirical_tvd", total_variation(&emp, &pmf)?)?;
        ctx.write_pmf("empirical_pmf", &emp)?;
    }
    Ok(())
}

fn run_tvd(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let kind = circuit_kind(&f);
    if kind == CircuitKind::Pmghz {
        return Err(usage("--circuit pmghz has no target distribution"));
    }
    validate_circuit(&f, kind)?;
    if f.dry_run {
        return Ok(());
    }
    let s = build_setup(&f, kind)?;
    let n = required(f.n, "n")?;
    let p = s.p.expect("target circuits carry p");
    let pmf = run_exact(&s.circuit, &s.input)?;
    ctx.metric("tvd", total_variation(&pmf, s.target.as_ref().expect("target"))?)?;
    ctx.metric("p", p as f64)?;
    ctx.metric("asymptote", reference::asymptote(p))?;
    match kind {
        CircuitKind::Majmod => {
            ctx.metric("closed_form", reference::majmod_tvd(n, p)?)?;
            ctx.metric("bound", reference::majmod_tvd_bound(n, p))?;
        }
        CircuitKind::Pmmajmod => ctx.metric("closed_form", reference::pmmajmod_tvd(n, p)?)?,
        _ => {}
    }
    ctx.write_pmf("pmf", &pmf)
}

fn run_correlation(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let p = required(f.p, "p")?;
    if p < 2 {
        return Err(usage("--p must be at least 2"));
    }
    let points = f.samples.unwrap_or(2 * p as usize + 1);
    if points == 0 {
        return Err(usage("--samples must be positive"));
    }
    if f.dry_run {
        return Ok(());
    }
    let rows: Vec<(usize, f64)> =
        (0..points).map(|w| (w, (-PI / 4.0 + PI * w as f64 / p as f64).cos().powi(2))).collect();
    ctx.metric("points", points as f64)?;
    ctx.metric("min", rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min))?;
    ctx.metric("max", rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max))?;
    ctx.write(
        "correlation",
        || {
            let mut s = String::from("weight,prob_parity\n");
            for (w, v) in &rows {
                let _ = writeln!(s, "{w},{v:.16e}");
            }
            s
        },
        || json!(rows.iter().map(|(w, v)| json!({"weight": w, "prob_parity": v})).collect::<Vec<_>>()),
    )
}

fn run_pmghz(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    validate_circuit(&f, CircuitKind::Pmghz)?;
    if f.dry_run {
        return Ok(());
    }
    let n = required(f.n, "n")?;
    let c = poor_mans_ghz_circuit(n)?;
    let state = simulate(&c, &StateVector::zero(2 * n - 1)?)?;
    ctx.metric("depth", depth_of(&c) as f64)?;
    ctx.metric("n_qubits", c.n_qubits as f64)?;
    ctx.metric("max_amplitude_error", state.max_abs_diff(&reference::poor_mans_ghz_state(n)?))?;
    ctx.write_pmf("pmf", &run_exact(&c, &StateVector::zero(2 * n - 1)?)?)
}

fn run_lowerbound(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let kind = circuit_kind(&f);
    let n = required(f.n, "n")?;
    let p = required(f.p, "p")?;
    let alpha = required(f.alpha, "alpha")?;
    let d = required(f.d, "d")?;
    let l = required(f.l, "l")?;
    check_odd_prime(p)?;
    let bias = f.bias.unwrap_or(0.0);
    check_bias(bias)?;
    if n < 2 || l == 0 || l > MAX_INPUTS {
        return Err(usage(format!("need n ≥ 2 and 1 ≤ l ≤ {MAX_INPUTS}")));
    }
    let (target_kind, size) = match kind {
        CircuitKind::Majmod => (TargetKind::MajmodParity, n - 1),
        CircuitKind::Pmmajmod => (TargetKind::Pmmajmod, 2 * (n - 1)),
        _ => return Err(usage("lowerbound supports --circuit majmod or pmmajmod")),
    };
    if size + 1 > 20 {
        return Err(usage("target length exceeds 20 bits"));
    }
    let thresholds = Thresholds::from_alpha(size, alpha)?;
    if f.dry_run {
        return Ok(());
    }
    let func = LocalFunction::random(l, size + 1, d, &mut ChaCha8Rng::seed_from_u64(f.seed))?;
    let cfg = match target_kind {
        TargetKind::MajmodParity => StatTestConfig::majmod(func.clone(), p, thresholds)?,
        TargetKind::Pmmajmod => StatTestConfig::tree(func.clone(), p, &layer_partition(&build_tree(n)?, d)?, thresholds)?,
    };
    let target = augmented_target_pmf(target_kind, n, p)?;
    let source = if bias == 0.0 { InputSource::Uniform } else { InputSource::Biased(bias) };
    let on_target = test_pass_probability(PassSource::Pmf(&target), &cfg)?;
    let on_function = test_pass_probability(PassSource::Function(&func, source), &cfg)?;
    let out = output_pmf(&func, source)?;
    ctx.metric("threshold_n0", thresholds.n0 as f64)?;
    ctx.metric("threshold_nf", thresholds.nf as f64)?;
    ctx.metric("threshold_nm", thresholds.nm as f64)?;
    ctx.metric("blocks", cfg.decomposition.s() as f64)?;
    ctx.metric("target_pass", on_target.total)?;
    ctx.metric("target_ts", on_target.ts)?;
    ctx.metric("function_pass", on_function.total)?;
    ctx.metric("function_ts", on_function.ts)?;
    ctx.metric("test_gap", on_target.total - on_function.total)?;
    ctx.metric("tvd", total_variation(&out, &target)?)?;
    ctx.write_pmf("function_pmf", &out)
}

fn run_bruteforce(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let n = required(f.n, "n")?;
    let p = required(f.p, "p")?;
    let d = required(f.d, "d")?;
    let l = required(f.l, "l")?;
    check_odd_prime(p)?;
    let bias = f.bias.unwrap_or(0.0);
    check_bias(bias)?;
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let space = search_space_size(n, d, l);
    if space > MAX_SEARCH_SPACE {
        return Err(usage(format!("search space {space} exceeds {MAX_SEARCH_SPACE}")));
    }
    if f.dry_run {
        return Ok(());
    }
    let target = augmented_target_pmf(TargetKind::MajmodParity, n, p)?;
    let source = if bias == 0.0 { InputSource::Uniform } else { InputSource::Biased(bias) };
    let r = brute_force_min_tvd(n, d, l, &target, source)?;
    ctx.metric("min_tvd", r.min_tvd)?;
    ctx.metric("space_size", r.space_size as f64)?;
    ctx.metric("minimizer_count", r.minimizer_count as f64)?;
    ctx.metric("witness_index", r.witness_index as f64)?;
    let witness = serde_json::to_value(&r.witness).expect("json");
    ctx.write_pmf("witness_pmf", &output_pmf(&r.witness, source)?)?;
    if let Some(dir) = &ctx.flags.out {
        let path = dir.join("witness.json");
        std::fs::write(&path, serde_json::to_string_pretty(&witness).expect("json") + "\n")?;
        ctx.artifacts.push(path.display().to_string());
    }
    Ok(())
}

fn run_modp(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let t = required(f.n, "n")?;
    let p = required(f.p, "p")?;
    if t == 0 || !is_prime(p) {
        return Err(usage("need --n ≥ 1 and a prime --p"));
    }
    let bias = f.bias.unwrap_or(0.0);
    check_bias(bias)?;
    if f.dry_run {
        return Ok(());
    }
    let r = modp_weight_pmf(t, p, &vec![1; t], bias)?;
    ctx.metric("tvd_to_uniform", r.tvd_to_uniform())?;
    ctx.metric("envelope", uniformity_envelope(t, p))?;
    ctx.metric("biased_envelope", biased_uniformity_envelope(t, p, bias))?;
    ctx.write("residues", || r.to_csv(), || serde_json::to_value(&r).expect("json"))
}

fn run_compile(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let kind = f.circuit.unwrap_or(CircuitKind::MajmodUnitary);
    validate_circuit(&f, kind)?;
    if f.dry_run {
        return Ok(());
    }
    let s = build_setup(&f, kind)?;
    let compiled = compile_circuit(&s.circuit)?;
    let before = run_exact(&s.circuit, &s.input)?;
    let after = run_exact(&compiled, &s.input)?;
    let max_diff = (0..1u64 << s.circuit.n_qubits).map(|z| (before.prob(z) - after.prob(z)).abs()).fold(0.0, f64::max);
    ctx.metric("depth_before", depth_of(&s.circuit) as f64)?;
    ctx.metric("depth_after", depth_of(&compiled) as f64)?;
    ctx.metric("gates_after", compiled.placements().count() as f64)?;
    ctx.metric("max_arity_after", compiled.placements().map(|p| p.targets.len()).max().unwrap_or(0) as f64)?;
    ctx.metric("max_prob_diff", max_diff)?;
    if let Some(dir) = &ctx.flags.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("compiled.json");
        std::fs::write(&path, compiled.to_json() + "\n")?;
        ctx.artifacts.push(path.display().to_string());
    }
    Ok(())
}

fn run_bound(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx.flags.clone();
    let p = required(f.p, "p")?;
    check_odd_prime(p)?;
    if f.dry_run {
        return Ok(());
    }
    ctx.metric("asymptote", reference::asymptote(p))?;
    if let Some(n) = f.n {
        ctx.metric("finite_n_bound", reference::majmod_tvd_bound(n, p))?;
        ctx.metric("uniformity_envelope", uniformity_envelope(n, p))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExperimentReport> {
    let start = Instant::now();
    if let Some(t) = cli.flags.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut ctx = Ctx { flags: cli.flags.clone(), metrics: BTreeMap::new(), artifacts: Vec::new() };
    let name = match cli.command {
        Command::Simulate => run_simulate(&mut ctx).map(|_| "simulate"),
        Command::Tvd => run_tvd(&mut ctx).map(|_| "tvd"),
        Command::Correlation => run_correlation(&mut ctx).map(|_| "correlation"),
        Command::Pmghz => run_pmghz(&mut ctx).map(|_| "pmghz"),
        Command::Lowerbound => run_lowerbound(&mut ctx).map(|_| "lowerbound"),
        Command::Bruteforce => run_bruteforce(&mut ctx).map(|_| "bruteforce"),
        Command::Modp => run_modp(&mut ctx).map(|_| "modp"),
        Command::Compile => run_compile(&mut ctx).map(|_| "compile"),
        Command::Bound => run_bound(&mut ctx).map(|_| "bound"),
    }?;
    Ok(ExperimentReport {
        experiment: name.to_string(),
        parameters: serde_json::to_value(&cli.flags).expect("json"),
        metrics: ctx.metrics,
        artifacts: ctx.artifacts,
        seed: cli.flags.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        dry_run: cli.flags.dry_run,
    })
}

/// Write JSON to stdout; a closed pipe is not an error worth panicking over.
fn print_stdout(value: &impl Serialize) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(value).expect("json"));
}

fn emit_error(err: &CliError) -> ExitCode {
    let body = json!({ "error": { "kind": err.kind(), "message": err.message() } });
    print_stdout(&body);
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return emit_error(&usage(e.to_string().trim().to_string())),
    };
    match run(cli) {
        Ok(report) => {
            print_stdout(&report);
            ExitCode::SUCCESS
        }
        Err(e) => emit_error(&e),
    }
}
