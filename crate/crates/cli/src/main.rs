//! `maxmin`: solve, verify, generate and benchmark restricted max-min
//! allocation instances.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 target infeasible (a
//! certificate was produced), 3 verification failed.

mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use maxmin::afs::{self, AfsConfig};
use maxmin::approx::{self, ApproxConfig};
use maxmin::generate::{generate, GeneratorKind, GeneratorParams};
use maxmin::instance::AllocationDoc;
use maxmin::oracle::{check_dual_with, Limits};
use maxmin::search::{ProbeRecord, SignatureTrace, TargetOutcome};
use maxmin::{AssertLevel, DualCertificate, Instance, Stats, Value};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "maxmin", version, about = "Restricted max-min allocation solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance, by bisection over targets or at one fixed target.
    Solve(SolveArgs),
    /// Check an allocation and/or a dual certificate against an instance.
    Verify(VerifyArgs),
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Run a solver over generated or stored instances and report per-instance rows.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum SolverKind {
    Approx,
    Afs,
}

/// Solver selection shared by `solve` and `bench`.
#[derive(Args, Clone)]
pub(crate) struct SolverArgs {
    #[arg(long, value_enum, default_value = "approx")]
    solver: SolverKind,
    /// Approximation slack for `approx`: the guarantee is OPT/(4+δ).
    #[arg(long)]
    delta: Option<Value>,
    /// Fraction of the target each player must receive. For `approx` this is
    /// an alternative to `--delta` (λ = 1/(4+δ)); for `afs` it defaults to 26/99.
    #[arg(long)]
    lambda: Option<Value>,
    /// Maximum number of targets probed by the bisection.
    #[arg(long, default_value_t = 64)]
    probes: usize,
    /// Invariant checking: off, sampled or full. MAXMIN_ASSERT overrides it.
    #[arg(long = "assert", default_value = "off")]
    assert_level: AssertLevel,
    /// Record wall-clock time in the stats (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

pub(crate) enum Solver {
    Approx(ApproxConfig),
    Afs(AfsConfig),
}

impl Solver {
    pub(crate) fn name(&self) -> &'static str {
        match self {
            Solver::Approx(_) => "approx",
            Solver::Afs(_) => "afs",
        }
    }

    pub(crate) fn solve(&self, inst: &Instance) -> Result<maxmin::SolveOutcome> {
        Ok(match self {
            Solver::Approx(cfg) => approx::solve(inst, cfg)?,
            Solver::Afs(cfg) => afs::solve(inst, cfg)?,
        })
    }

    fn solve_at(&self, inst: &Instance, target: &Value) -> Result<(TargetOutcome, Stats, Vec<SignatureTrace>)> {
        let mut traces = Vec::new();
        Ok(match self {
            Solver::Approx(cfg) => {
                let mut stats = Stats::new("approx", &["build", "collapse"]);
                let out = approx::solve_at_target(inst, target, cfg, &mut stats, &mut traces)?;
                (out, stats, traces)
            }
            Solver::Afs(cfg) => {
                let mut stats = Stats::new("afs", &["build", "contract"]);
                let out = afs::solve_at_target(inst, target, cfg, &mut stats, &mut traces)?;
                (out, stats, traces)
            }
        })
    }
}

fn assert_level(flag: AssertLevel) -> Result<AssertLevel> {
    match std::env::var("MAXMIN_ASSERT") {
        Ok(v) if !v.is_empty() => v.parse().map_err(|e: String| anyhow::anyhow!("MAXMIN_ASSERT: {e}")),
        _ => Ok(flag),
    }
}

impl SolverArgs {
    pub(crate) fn build(&self) -> Result<Solver> {
        let level = assert_level(self.assert_level)?;
        match self.solver {
            SolverKind::Approx => {
                let delta = match (&self.delta, &self.lambda) {
                    (Some(_), Some(_)) => bail!("give either --delta or --lambda for approx, not both"),
                    (Some(d), None) => d.clone(),
                    (None, Some(l)) => {
                        if !l.is_positive() {
                            bail!("--lambda must be positive");
                        }
                        let d = l.recip() - Value::from_integer(4);
                        if !d.is_positive() {
                            bail!("--lambda for approx must be below 1/4, got {l}");
                        }
                        d
                    }
                    (None, None) => Value::one(),
                };
                let mut cfg = ApproxConfig::new(&delta)?;
                cfg.assert = level;
                cfg.probes = self.probes;
                cfg.timing = self.timing;
                Ok(Solver::Approx(cfg))
            }
            SolverKind::Afs => {
                if self.delta.is_some() {
                    bail!("--delta applies to approx only; use --lambda for afs");
                }
                let lambda = self.lambda.clone().unwrap_or_else(afs::default_lambda);
                if !lambda.is_positive() {
                    bail!("--lambda must be positive");
                }
                Ok(Solver::Afs(AfsConfig {
                    lambda,
                    assert: level,
                    probes: self.probes,
                    iteration_cap: None,
                    timing: self.timing,
                }))
            }
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Run only at this target instead of bisecting.
    #[arg(long)]
    target: Option<Value>,
    /// Allocation output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write stats, probes and signature traces as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the certificate of the lowest rejected target, if any.
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    solver: &'a str,
    target: Value,
    stats: &'a Stats,
    probes: &'a [ProbeRecord],
    traces: &'a [SignatureTrace],
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Allocation JSON (`{"bundles": ..., "min_value": ...}`).
    #[arg(long)]
    allocation: Option<PathBuf>,
    /// Dual certificate JSON.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Also require the allocation's minimum value to be at least this.
    #[arg(long)]
    min_value: Option<Value>,
    #[command(flatten)]
    oracle: OracleArgs,
}

/// Size limits for the exact oracles. Inputs beyond them are refused.
#[derive(Args)]
pub(crate) struct OracleArgs {
    #[arg(long, default_value_t = Limits::default().max_players)]
    oracle_max_players: usize,
    #[arg(long, default_value_t = Limits::default().max_resources)]
    oracle_max_resources: usize,
    /// Desired resources per player when enumerating configurations.
    #[arg(long, default_value_t = Limits::default().max_desired)]
    oracle_max_desired: usize,
}

impl OracleArgs {
    pub(crate) fn limits(&self) -> Limits {
        Limits {
            max_players: self.oracle_max_players,
            max_resources: self.oracle_max_resources,
            max_desired: self.oracle_max_desired,
            ..Limits::default()
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// uniform, fat-heavy, thin-heavy or clustered.
    #[arg(long, default_value = "uniform")]
    kind: GeneratorKind,
    #[arg(long)]
    players: usize,
    #[arg(long)]
    resources: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Values are multiples of 1/denominator.
    #[arg(long, default_value_t = 10)]
    denominator: u32,
    /// Exclusive value bound for thin-heavy instances.
    #[arg(long, default_value = "1/4")]
    lambda_target: Value,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Bench(args) => bench::cmd_bench(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub(crate) fn read_instance(path: &Path) -> Result<Instance> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    maxmin::load_instance(&bytes).with_context(|| format!("loading {}", path.display()))
}

pub(crate) fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let inst = read_instance(&args.instance)?;
    let solver = args.solver.build()?;

    let (doc, stats, probes, traces, target, cert) = match &args.target {
        Some(t) => {
            if !t.is_positive() {
                bail!("--target must be positive");
            }
            let (outcome, stats, traces) = solver.solve_at(&inst, t)?;
            match outcome {
                TargetOutcome::Covered(alloc) => {
                    let probe = ProbeRecord {
                        target: t.clone(),
                        accepted: true,
                        certificate: None,
                    };
                    (Some(alloc.to_doc(&inst)), stats, vec![probe], traces, t.clone(), None)
                }
                TargetOutcome::Stuck(c) => {
                    let probe = ProbeRecord {
                        target: t.clone(),
                        accepted: false,
                        certificate: Some(c.clone()),
                    };
                    (None, stats, vec![probe], traces, Value::zero(), Some(c))
                }
            }
        }
        None => {
            let out = solver.solve(&inst)?;
            let cert = out
                .probes
                .iter()
                .filter_map(|p| p.certificate.as_ref())
                .min_by(|a, b| a.target.cmp(&b.target))
                .cloned();
            let doc = out.allocation.to_doc(&inst);
            (Some(doc), out.stats, out.probes, out.traces, out.target, cert)
        }
    };

    if let Some(doc) = &doc {
        write_output(args.out.as_deref(), &to_json_line(doc))?;
    }
    if let Some(path) = &args.stats {
        let report = SolveReport {
            solver: solver.name(),
            target: target.clone(),
            stats: &stats,
            probes: &probes,
            traces: &traces,
        };
        fs::write(path, to_json_line(&report)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let (Some(path), Some(c)) = (&args.certificate, &cert) {
        fs::write(path, c.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }

    let nothing_accepted = target.is_zero() && cert.is_some();
    if doc.is_none() || nothing_accepted {
        let c = cert.expect("a rejected probe carries a certificate");
        eprintln!("infeasible: no allocation reaches λ·{} (dual objective {})", c.target, c.objective);
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport {
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    allocation: Option<AllocationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<maxmin::oracle::DualReport>,
}

#[derive(Serialize)]
struct AllocationReport {
    min_value: Value,
    violations: Vec<String>,
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    if args.allocation.is_none() && args.certificate.is_none() {
        bail!("nothing to verify: give --allocation and/or --certificate");
    }
    let inst = read_instance(&args.instance)?;
    let mut ok = true;

    let allocation = match &args.allocation {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let doc: AllocationDoc =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let alloc = doc.allocation();
            let mut violations: Vec<String> = alloc.violations(&inst).iter().map(ToString::to_string).collect();
            let actual = if violations.is_empty() {
                maxmin::min_value(&inst, &alloc)
            } else {
                Value::zero()
            };
            if violations.is_empty() && actual != doc.min_value {
                violations.push(format!("stated min_value {} but the bundles give {actual}", doc.min_value));
            }
            if let Some(want) = &args.min_value {
                if &actual < want {
                    violations.push(format!("min_value {actual} is below the required {want}"));
                }
            }
            ok &= violations.is_empty();
            Some(AllocationReport {
                min_value: actual,
                violations,
            })
        }
        None => None,
    };

    let certificate = match &args.certificate {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cert: DualCertificate =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let report = check_dual_with(&inst, &cert.target, &cert, &args.oracle.limits())?;
            ok &= report.is_ok();
            Some(report)
        }
        None => None,
    };

    let report = VerifyReport {
        ok,
        allocation,
        certificate,
    };
    print!("{}", to_json_line(&report));
    if !ok {
        if let Some(a) = &report.allocation {
            for v in &a.violations {
                eprintln!("allocation: {v}");
            }
        }
        if let Some(c) = &report.certificate {
            for v in &c.violations {
                eprintln!("certificate: {}", serde_json::to_string(v).expect("violation serializes"));
            }
        }
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(0)
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let mut params = GeneratorParams::new(args.seed, args.players, args.resources);
    params.denominator = args.denominator;
    params.lambda_target = args.lambda_target.clone();
    let inst = generate(args.kind, &params)?;
    write_output(args.out.as_deref(), &inst.to_json())?;
    Ok(0)
}
