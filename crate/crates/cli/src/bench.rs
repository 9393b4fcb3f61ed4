use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use maxmin::generate::{generate, GeneratorKind, GeneratorParams};
use maxmin::oracle::brute_force_opt_with;
use maxmin::{Instance, Value};

use crate::{read_instance, write_output, OracleArgs, SolverArgs};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub(crate) struct BenchArgs {
    #[command(flatten)]
    solver: SolverArgs,
    /// Read every `*.json` instance in this directory instead of generating.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Generator kinds, cycled over instances (default: all four).
    #[arg(long, value_delimiter = ',')]
    kind: Vec<GeneratorKind>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    players: usize,
    #[arg(long, default_value_t = 10)]
    resources: usize,
    /// Instance `i` is generated from seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the brute-force optimum.
    #[arg(long)]
    no_oracle: bool,
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Row {
    id: String,
    solver: &'static str,
    players: usize,
    resources: usize,
    min_value: Value,
    target: Value,
    /// `None` when the oracle was skipped or the instance is too large.
    opt: Option<Value>,
    /// `opt / min_value`; `None` without an optimum or when both are zero.
    ratio: Option<Value>,
    build: u64,
    /// Collapses for `approx`, contractions for `afs`.
    shrink: u64,
    probes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    solver: &'static str,
    instances: usize,
    max_ratio: Option<Value>,
    rows: Vec<Row>,
}

fn instances(args: &BenchArgs) -> Result<Vec<(String, Instance)>> {
    if let Some(dir) = &args.dir {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        return paths
            .into_iter()
            .map(|p| {
                let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                Ok((name, read_instance(&p)?))
            })
            .collect();
    }
    let kinds = if args.kind.is_empty() {
        GeneratorKind::ALL.to_vec()
    } else {
        args.kind.clone()
    };
    (0..args.count)
        .map(|i| {
            let kind = kinds[i % kinds.len()];
            let seed = args.seed + i as u64;
            let params = GeneratorParams::new(seed, args.players, args.resources);
            Ok((format!("{kind}-{seed}"), generate(kind, &params)?))
        })
        .collect()
}

pub(crate) fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    let solver = args.solver.build()?;
    let insts = instances(args)?;
    let limits = args.oracle.limits();
    if insts.is_empty() {
        bail!("no instances to run");
    }
    let rows: Vec<Row> = insts
        .par_iter()
        .map(|(id, inst)| -> Result<Row> {
            let out = solver.solve(inst).with_context(|| format!("solving {id}"))?;
            let opt = if args.no_oracle {
                None
            } else {
                brute_force_opt_with(inst, &limits).ok().map(|(v, _)| v)
            };
            let ratio = opt.as_ref().and_then(|o| {
                if out.min_value.is_positive() {
                    Some(o / &out.min_value)
                } else if o.is_zero() {
                    Some(Value::one())
                } else {
                    None
                }
            });
            let shrink = out.stats.phase("collapse") + out.stats.phase("contract");
            Ok(Row {
                id: id.clone(),
                solver: solver.name(),
                players: inst.n_players(),
                resources: inst.n_resources(),
                build: out.stats.phase("build"),
                shrink,
                probes: out.stats.probes,
                wall_time_ms: out.stats.wall_time_ms,
                min_value: out.min_value,
                target: out.target,
                opt,
                ratio,
            })
        })
        .collect::<Result<_>>()?;

    let max_ratio = rows.iter().filter_map(|r| r.ratio.clone()).max();
    let report = Report {
        solver: solver.name(),
        instances: rows.len(),
        max_ratio,
        rows,
    };
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
        Format::Csv => csv(&report),
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(0)
}

fn csv(report: &Report) -> String {
    let opt_str = |v: &Option<Value>| v.as_ref().map(ToString::to_string).unwrap_or_default();
    let mut s = String::from("id,solver,players,resources,min_value,target,opt,ratio,build,shrink,probes,wall_time_ms\n");
    for r in &report.rows {
        let wall = r.wall_time_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.id,
            r.solver,
            r.players,
            r.resources,
            r.min_value,
            r.target,
            opt_str(&r.opt),
            opt_str(&r.ratio),
            r.build,
            r.shrink,
            r.probes,
            wall
        ));
    }
    s
}
