//! Command-line front end for the laboratory.
//!
//! Every subcommand is a thin wrapper over the library: parse flags,
//! resolve the budget, call one library operation, print JSON (or CSV for
//! the census).  Output is a pure function of the argument vector and the
//! machine version; the table cache only changes runtime, never bytes.
//!
//! Exit codes: 0 success, 2 for results that are undefined at the given
//! budget (distinct from failure, so scripts can escalate budgets), 1 for
//! errors, 64 for usage mistakes.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use aitlab_core::bits::BitString;
use aitlab_core::cache::TableStore;
use aitlab_core::depth_stats::{
    census, census_csv, kmss_with, logical_depth, structure_function_with, Conditioning,
    DepthStatsError,
};
use aitlab_core::dyadic::{parse_dyadic, Dyadic};
use aitlab_core::effective::{
    effective_complexity, tau_set_constrained, EffectiveError, StepBound, TauError,
};
use aitlab_core::ensembles::{
    ensemble_k, is_typical_detailed, total_information, ConstraintSet, Ensemble,
};
use aitlab_core::enumerator::{complexity_table, omega_lower};
use aitlab_core::omega_appendix::{
    build_appendix_ensemble, default_omega_schedule, OmegaSource,
};
use aitlab_core::vm::{Budget, MachineKind, MACHINE_VERSION};

const EXIT_OK: i32 = 0;
const EXIT_UNDEFINED: i32 = 2;
const EXIT_USAGE: i32 = 64;

const DEFAULT_MAX_LEN: u32 = 14;
const DEFAULT_MAX_STEPS: u64 = 256;
const DEFAULT_PRECISION: u32 = 32;

#[derive(Parser)]
#[command(name = "aitlab", version, about = "Exact algorithmic information theory on a fixed tiny machine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output format; csv affects the census, everything else is JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Program-length budget (bits).
    #[arg(long, global = true)]
    maxlen: Option<u32>,

    /// Step budget (fuel).
    #[arg(long, global = true)]
    fuel: Option<u64>,

    /// Interval precision in fractional bits (at least 16).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(16..))]
    precision: Option<u32>,

    /// Table cache directory; AITLAB_CACHE overrides the default.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Compute everything fresh, neither reading nor writing the cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Worker threads for enumeration; results are identical for any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// key=value config file supplying defaults for the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Expected machine version; the run aborts on mismatch.
    #[arg(long, global = true)]
    machine_version: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct EnsembleInput {
    /// Comma-separated entries "bits=p/2^q"; empty bits mean the empty string.
    #[arg(long)]
    weights: Option<String>,

    /// The ensemble's self-delimiting wire form, as a 0/1 string.
    #[arg(long)]
    wire: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plain complexity C(x) with a canonical witness.
    C {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
    },
    /// Prefix complexity K(x) with a canonical witness.
    K {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
    },
    /// Conditional prefix complexity with y fed directly as auxiliary input.
    Condk {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long, value_parser = parse_bits)]
        y: BitString,
    },
    /// Conditional prefix complexity given a shortest program for y.
    Chaitink {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long, value_parser = parse_bits)]
        y: BitString,
    },
    /// Kraft sum over halting prefix programs within budget.
    Omega,
    /// Validate an ensemble; report entropy, wire form, and K.
    Ensemble {
        #[command(flatten)]
        input: EnsembleInput,
    },
    /// Is x delta-typical for the ensemble?
    Typical {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long, value_parser = parse_dyadic_flag)]
        delta: Dyadic,
        #[command(flatten)]
        input: EnsembleInput,
    },
    /// Total information K(E) + H(E) as an interval.
    Sigma {
        #[command(flatten)]
        input: EnsembleInput,
    },
    /// Effective complexity with domain-stability check at a second budget.
    Effcomp {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long, value_parser = parse_dyadic_flag)]
        delta: Dyadic,
        #[arg(long = "Delta", value_parser = parse_dyadic_flag)]
        slack: Dyadic,
        /// Restrict the minimization domain ("fixed-length" ties it to x).
        #[arg(long)]
        constraint: Option<String>,
    },
    /// Strings computable by short programs in few steps.
    Tau {
        #[arg(long)]
        y: u32,
        #[arg(long, value_enum, default_value_t = StepFamily::Identity)]
        f: StepFamily,
        /// Explicit values for --f table, comma-separated and non-decreasing.
        #[arg(long)]
        table: Option<String>,
        /// Truncation for --f power-tower; defaults to the fuel budget.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Logical depth at significance level z.
    Depth {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long, default_value_t = 0)]
        z: u32,
    },
    /// Structure function: smallest simple set containing x at level k.
    Structure {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long)]
        k: u32,
        /// Condition on the raw length encoding instead of a shortest program.
        #[arg(long)]
        plain_conditioning: bool,
    },
    /// Minimal sufficient-statistic level at slack Delta.
    Kmss {
        #[arg(long, value_parser = parse_bits)]
        x: BitString,
        #[arg(long = "Delta")]
        slack: u32,
        #[arg(long)]
        plain_conditioning: bool,
    },
    /// Every measure for every string of length n.
    Census {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_dyadic_flag)]
        delta: Dyadic,
        #[arg(long = "Delta", value_parser = parse_dyadic_flag)]
        slack: Dyadic,
        #[arg(long, default_value_t = 0)]
        z: u32,
    },
    /// Blocks of the ensemble whose entropy encodes 2 plus the halting
    /// probability.
    Appendix {
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        n_blocks: u32,
        /// Derive the omega sequence from the machine (default).
        #[arg(long, conflicts_with = "omega_table")]
        omega_from_machine: bool,
        /// File of whitespace-separated dyadics to use as the omega sequence.
        #[arg(long)]
        omega_table: Option<PathBuf>,
    },
    /// Cache administration.
    Cache {
        #[command(subcommand)]
        op: CacheOp,
    },
}

#[derive(Subcommand)]
enum CacheOp {
    /// Summarize every cached table.
    List,
    /// Delete every cached table.
    Purge,
    /// Re-derive a 1% sample of each cached table and compare bit-exactly.
    Verify,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StepFamily {
    Identity,
    LinearExp,
    PowerTower,
    Table,
}

fn parse_bits(s: &str) -> Result<BitString, String> {
    let mut b = BitString::new();
    for ch in s.chars() {
        match ch {
            '0' => b.push(false),
            '1' => b.push(true),
            _ => return Err(format!("expected only 0 and 1, found {ch:?}")),
        }
    }
    Ok(b)
}

fn parse_dyadic_flag(s: &str) -> Result<Dyadic, String> {
    parse_dyadic(s)
}

/// Resolved run settings: flags beat the config file, which beats
/// environment and defaults.
struct Settings {
    budget: Budget,
    format: Format,
    cache_dir: PathBuf,
    no_cache: bool,
}

impl Settings {
    /// Table lookup through the cache unless bypassed; identical tables
    /// either way.
    fn table(
        &self,
        kind: MachineKind,
        aux: &BitString,
    ) -> Result<aitlab_core::enumerator::ComplexityTable> {
        if self.no_cache {
            return Ok(complexity_table(kind, aux, &self.budget));
        }
        let store = TableStore::new(&self.cache_dir)?;
        Ok(store.load_or_compute(kind, aux, &self.budget)?)
    }
}

fn load_config(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {} is not key=value", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    for key in map.keys() {
        if !matches!(
            key.as_str(),
            "maxlen" | "fuel" | "precision" | "format" | "cache-dir" | "jobs"
        ) {
            bail!("unknown config key {key:?}");
        }
    }
    Ok(map)
}

fn resolve(cli: &Cli) -> Result<(Settings, Option<usize>)> {
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let from_cfg = |key: &str| config.get(key).map(String::as_str);

    let maxlen = match (cli.maxlen, from_cfg("maxlen")) {
        (Some(v), _) => v,
        (None, Some(s)) => s.parse().context("config maxlen")?,
        (None, None) => DEFAULT_MAX_LEN,
    };
    let fuel = match (cli.fuel, from_cfg("fuel")) {
        (Some(v), _) => v,
        (None, Some(s)) => s.parse().context("config fuel")?,
        (None, None) => DEFAULT_MAX_STEPS,
    };
    let precision = match (cli.precision, from_cfg("precision")) {
        (Some(v), _) => v,
        (None, Some(s)) => s.parse().context("config precision")?,
        (None, None) => DEFAULT_PRECISION,
    };
    if precision < 16 {
        bail!("precision must be at least 16");
    }
    let format = match (cli.format, from_cfg("format")) {
        (Some(f), _) => f,
        (None, Some("json")) => Format::Json,
        (None, Some("csv")) => Format::Csv,
        (None, Some(other)) => bail!("config format must be json or csv, got {other:?}"),
        (None, None) => Format::Json,
    };
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| from_cfg("cache-dir").map(PathBuf::from))
        .or_else(|| std::env::var_os("AITLAB_CACHE").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(".aitlab-cache"));
    let jobs = match (cli.jobs, from_cfg("jobs")) {
        (Some(v), _) => Some(v),
        (None, Some(s)) => Some(s.parse().context("config jobs")?),
        (None, None) => None,
    };
    Ok((
        Settings {
            budget: Budget::new(maxlen, fuel).with_precision(precision),
            format,
            cache_dir,
            no_cache: cli.no_cache,
        },
        jobs,
    ))
}

struct CmdOutput {
    body: String,
    code: i32,
}

fn ok(v: serde_json::Value) -> Result<CmdOutput> {
    Ok(CmdOutput { body: serde_json::to_string_pretty(&v)?, code: EXIT_OK })
}

fn undefined(v: serde_json::Value) -> Result<CmdOutput> {
    Ok(CmdOutput { body: serde_json::to_string_pretty(&v)?, code: EXIT_UNDEFINED })
}

fn budget_json(b: &Budget) -> serde_json::Value {
    json!({ "max_len": b.max_len, "max_steps": b.max_steps, "precision": b.precision })
}

fn parse_ensemble(input: &EnsembleInput) -> Result<Ensemble> {
    if let Some(text) = &input.weights {
        let mut entries = Vec::new();
        for item in text.split(',') {
            let (bits, weight) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("weight entry {item:?} is not bits=p/2^q"))?;
            entries.push((
                parse_bits(bits.trim()).map_err(|e| anyhow!(e))?,
                parse_dyadic(weight.trim()).map_err(|e| anyhow!(e))?,
            ));
        }
        return Ok(Ensemble::from_weights(entries)?);
    }
    let wire = input.wire.as_ref().expect("clap guarantees one source");
    let bits = parse_bits(wire).map_err(|e| anyhow!(e))?;
    Ok(Ensemble::parse(&bits)?)
}

fn parse_constraint(name: Option<&str>, x: &BitString) -> Result<ConstraintSet> {
    match name {
        None => Ok(ConstraintSet::unconstrained()),
        Some("fixed-length") => Ok(ConstraintSet::fixed_length(x.len() as u32)),
        Some(other) => bail!("unknown constraint {other:?} (expected fixed-length)"),
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(v) = &cli.machine_version {
        if v != MACHINE_VERSION {
            eprintln!("error: machine version mismatch: built {MACHINE_VERSION}, requested {v}");
            return 1;
        }
    }
    let (settings, jobs) = match resolve(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let result = match jobs {
        None => dispatch(&cli.cmd, &settings),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build();
            match pool {
                Ok(pool) => pool.install(|| dispatch(&cli.cmd, &settings)),
                Err(e) => Err(anyhow!("building worker pool: {e}")),
            }
        }
    };
    match result {
        Ok(out) => {
            println!("{}", out.body);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cmd: &Cmd, st: &Settings) -> Result<CmdOutput> {
    let b = &st.budget;
    match cmd {
        Cmd::C { x } => {
            let table = st.table(MachineKind::Plain, &BitString::new())?;
            let body = json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "x": x,
                "C": table.complexity(x),
                "witness": table.witness(x),
            });
            if table.complexity(x).is_none() { undefined(body) } else { ok(body) }
        }
        Cmd::K { x } => {
            let table = st.table(MachineKind::Prefix, &BitString::new())?;
            let body = json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "x": x,
                "K": table.complexity(x),
                "witness": table.witness(x),
            });
            if table.complexity(x).is_none() { undefined(body) } else { ok(body) }
        }
        Cmd::Condk { x, y } => {
            let table = st.table(MachineKind::Prefix, y)?;
            let body = json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "x": x,
                "y": y,
                "K_cond": table.complexity(x),
                "witness": table.witness(x),
            });
            if table.complexity(x).is_none() { undefined(body) } else { ok(body) }
        }
        Cmd::Chaitink { x, y } => {
            let base = st.table(MachineKind::Prefix, &BitString::new())?;
            let y_star = base.witness(y).cloned();
            let (k, witness) = match &y_star {
                None => (None, None),
                Some(p) => {
                    let table = st.table(MachineKind::Prefix, p)?;
                    (table.complexity(x), table.witness(x).cloned())
                }
            };
            let body = json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "x": x,
                "y": y,
                "y_star": y_star,
                "K_chaitin": k,
                "witness": witness,
            });
            if k.is_none() { undefined(body) } else { ok(body) }
        }
        Cmd::Omega => {
            let w = omega_lower(b);
            ok(json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "omega": w.value,
            }))
        }
        Cmd::Ensemble { input } => {
            let e = parse_ensemble(input)?;
            let k = ensemble_k(&e, b);
            let body = json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "ensemble": e,
                "wire": e.serialize(),
                "entropy": e.entropy(b.precision),
                "K": k,
            });
            if k.is_none() { undefined(body) } else { ok(body) }
        }
        Cmd::Typical { x, delta, input } => {
            let e = parse_ensemble(input)?;
            let r = is_typical_detailed(x, &e, delta, b.precision);
            ok(json!({
                "machine_version": MACHINE_VERSION,
                "x": x,
                "delta": delta,
                "result": r,
            }))
        }
        Cmd::Sigma { input } => {
            let e = parse_ensemble(input)?;
            let k = ensemble_k(&e, b);
            let sigma = total_information(&e, b, b.precision);
            let body = json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "K": k,
                "entropy": e.entropy(b.precision),
                "sigma": sigma,
            });
            if sigma.is_none() { undefined(body) } else { ok(body) }
        }
        Cmd::Effcomp { x, delta, slack, constraint } => {
            let cs = parse_constraint(constraint.as_deref(), x)?;
            let result = match effective_complexity(x, delta, slack, b, &cs) {
                Ok(r) => r,
                Err(EffectiveError::KxUndefined) => {
                    return undefined(json!({
                        "machine_version": MACHINE_VERSION,
                        "budget": budget_json(b),
                        "result": null,
                        "undefined": "K(x) exceeds the budget",
                    }));
                }
                Err(e) => return Err(e.into()),
            };
            // Same minimization at a strictly larger budget, to show
            // whether the domain has stabilized.
            let second = Budget::new((b.max_len + 2).min(24), b.max_steps.saturating_mul(2))
                .with_precision(b.precision);
            let wider = effective_complexity(x, delta, slack, &second, &cs)?;
            let agrees = wider.value == result.value
                && wider.witness.as_ref().map(Ensemble::serialize)
                    == result.witness.as_ref().map(Ensemble::serialize);
            ok(json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "result": result,
                "stability": {
                    "max_len": second.max_len,
                    "max_steps": second.max_steps,
                    "domain_size": wider.domain_size,
                    "value": wider.value,
                    "agrees": agrees,
                },
            }))
        }
        Cmd::Tau { y, f, table, cap } => {
            let bound = match f {
                StepFamily::Identity => StepBound::Identity,
                StepFamily::LinearExp => StepBound::LinearExp,
                StepFamily::PowerTower => {
                    StepBound::PowerTower { cap: cap.unwrap_or(b.max_steps) }
                }
                StepFamily::Table => {
                    let text = table
                        .as_ref()
                        .ok_or_else(|| anyhow!("--f table requires --table values"))?;
                    let values = text
                        .split(',')
                        .map(|v| v.trim().parse::<u64>().context("table value"))
                        .collect::<Result<Vec<_>>>()?;
                    StepBound::table(values)
                        .ok_or_else(|| anyhow!("table must be nonempty and non-decreasing"))?
                }
            };
            match tau_set_constrained(*y, &bound, b, &ConstraintSet::unconstrained()) {
                Ok(tau) => ok(json!({
                    "machine_version": MACHINE_VERSION,
                    "budget": budget_json(b),
                    "f": bound.name(),
                    "tau": tau,
                    "size": tau.set.len(),
                })),
                Err(e @ (TauError::FuelExceeded { .. } | TauError::LengthExceeded { .. })) => {
                    undefined(json!({
                        "machine_version": MACHINE_VERSION,
                        "budget": budget_json(b),
                        "tau": null,
                        "undefined": e.to_string(),
                    }))
                }
            }
        }
        Cmd::Depth { x, z } => match logical_depth(x, *z, b) {
            Ok(d) => ok(json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "depth": d,
            })),
            Err(DepthStatsError::CxUndefined) => undefined(json!({
                "machine_version": MACHINE_VERSION,
                "budget": budget_json(b),
                "depth": null,
                "undefined": "C(x) exceeds the budget",
            })),
            Err(e) => Err(e.into()),
        },
        Cmd::Structure { x, k, plain_conditioning } => {
            let conditioning = if *plain_conditioning {
                Conditioning::PlainDirect
            } else {
                Conditioning::ShortestProgram
            };
            match structure_function_with(x, *k, b, conditioning) {
                Ok(r) => {
                    let body = json!({
                        "machine_version": MACHINE_VERSION,
                        "budget": budget_json(b),
                        "structure": r,
                    });
                    if r.witness_set.is_none() { undefined(body) } else { ok(body) }
                }
                Err(e @ (DepthStatsError::KxUndefined | DepthStatsError::AuxUndefined)) => {
                    undefined(json!({
                        "machine_version": MACHINE_VERSION,
                        "budget": budget_json(b),
                        "structure": null,
                        "undefined": e.to_string(),
                    }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Kmss { x, slack, plain_conditioning } => {
            let conditioning = if *plain_conditioning {
                Conditioning::PlainDirect
            } else {
                Conditioning::ShortestProgram
            };
            match kmss_with(x, *slack, b, conditioning) {
                Ok(Some(r)) => ok(json!({
                    "machine_version": MACHINE_VERSION,
                    "budget": budget_json(b),
                    "kmss": r,
                })),
                Ok(None) => undefined(json!({
                    "machine_version": MACHINE_VERSION,
                    "budget": budget_json(b),
                    "kmss": null,
                    "undefined": "no level qualifies within the budget",
                })),
                Err(e @ (DepthStatsError::KxUndefined | DepthStatsError::AuxUndefined)) => {
                    undefined(json!({
                        "machine_version": MACHINE_VERSION,
                        "budget": budget_json(b),
                        "kmss": null,
                        "undefined": e.to_string(),
                    }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Census { n, delta, slack, z } => {
            let rows = census(*n, delta, slack, *z, b);
            match st.format {
                Format::Csv => Ok(CmdOutput {
                    // census_csv ends with a newline already; trim so the
                    // final println adds exactly one.
                    body: census_csv(&rows).trim_end().to_string(),
                    code: EXIT_OK,
                }),
                Format::Json => ok(json!({
                    "machine_version": MACHINE_VERSION,
                    "budget": budget_json(b),
                    "rows": rows,
                })),
            }
        }
        Cmd::Appendix { n_blocks, omega_table, .. } => {
            let source = match omega_table {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading omega table {}", path.display()))?;
                    let values = text
                        .split_whitespace()
                        .map(|t| parse_dyadic(t).map_err(|e| anyhow!(e)))
                        .collect::<Result<Vec<_>>>()?;
                    OmegaSource::Table(values)
                }
                None => OmegaSource::MachineDerived {
                    schedule: default_omega_schedule(*n_blocks as usize + 1),
                },
            };
            let e = build_appendix_ensemble(*n_blocks, &source, b.precision)?;
            let limit = Dyadic::from_int(2).add(e.omega_seq_used.last().unwrap());
            let tail = Dyadic::power_of_two(-i64::from(*n_blocks))
                .mul_int(u64::from(*n_blocks) + 2);
            ok(json!({
                "machine_version": MACHINE_VERSION,
                "precision": b.precision,
                "ensemble": e,
                "comparison": {
                    "limit_target": limit,
                    "tail_bound": tail,
                    "note": "partial entropy approaches 2 plus the omega limit \
                             within tail_bound plus interval width",
                },
            }))
        }
        Cmd::Cache { op } => {
            let store = TableStore::new(&st.cache_dir)?;
            match op {
                CacheOp::List => ok(json!({
                    "cache_dir": store.dir(),
                    "entries": store.list()?,
                })),
                CacheOp::Purge => ok(json!({
                    "cache_dir": store.dir(),
                    "removed": store.purge()?,
                })),
                CacheOp::Verify => {
                    let reports = store.verify()?;
                    let bad: Vec<&str> = reports
                        .iter()
                        .filter(|r| r.mismatches > 0 || r.error.is_some())
                        .map(|r| r.file.as_str())
                        .collect();
                    let body = json!({
                        "cache_dir": store.dir(),
                        "reports": reports,
                        "corrupt_files": bad,
                    });
                    if bad.is_empty() {
                        ok(body)
                    } else {
                        let names = bad.join(", ");
                        let rendered = serde_json::to_string_pretty(&body)?;
                        eprintln!("error: cache verification failed: {names}");
                        Ok(CmdOutput { body: rendered, code: 1 })
                    }
                }
            }
        }
    }
}
