//! `gammaflow`: compute the `R_n` table, check it, and move between cumulants
//! and mmse derivatives.

mod bench;
mod dist;
mod error;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gammaflow::cumulants::CumulantSeq;
use gammaflow::format::serialize;
use gammaflow::mmse::{evaluate_derivs, recover_cumulants, DerivSeq, Recovery, RecoveryMode};
use gammaflow::rational::format_rational;
use gammaflow::seqfile::{SeqFile, SeqKind};
use gammaflow::{Partition, Poly, Rational, RnTable};
use serde_json::{json, Value};

use crate::dist::DistSpec;
use crate::error::{code, Failure};

const CACHE_ENV: &str = "GAMMAFLOW_CACHE";

#[derive(Parser)]
#[command(
    name = "gammaflow",
    version,
    about = "Exact heat-flow polynomials, cumulants and mmse derivatives"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Cache directory for computed polynomials. GAMMAFLOW_CACHE takes precedence.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Largest order any command may request.
    #[arg(long, global = true, default_value_t = 20, value_parser = clap::value_parser!(u32).range(2..))]
    order_cap: u32,
    #[arg(long, global = true, value_enum, default_value_t = Output::Pretty)]
    output: Output,
    /// Worker threads: a positive count or "auto".
    #[arg(long, global = true, default_value = "auto")]
    threads: Threads,
    /// Also write the command's file artifact here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Pretty,
}

#[derive(Clone, Copy)]
enum Threads {
    Auto,
    Count(usize),
}

impl std::str::FromStr for Threads {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(format!(
                "expected a positive integer or \"auto\", got {s:?}"
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute R_n (and every lower order) and report its term count.
    Compute {
        #[arg(long)]
        n: u32,
    },
    /// Print R_n.
    Show {
        #[arg(long)]
        n: u32,
    },
    /// Print one coefficient of R_n.
    Coeff {
        #[arg(long)]
        n: u32,
        /// Comma separated parts, e.g. 8,8,2.
        #[arg(long)]
        partition: String,
    },
    /// Run the structural, closed-form, Gaussian, count and golden checks.
    Verify {
        #[arg(long)]
        max_n: u32,
    },
    /// Cumulants K_2..K_orders of a distribution.
    Cumulants {
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        orders: u32,
    },
    /// mmse derivatives d_1..d_orders at s = 0.
    MmseDerivs {
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        orders: u32,
    },
    /// Recover cumulants from an mmse-derivs sequence file.
    Recover {
        input: PathBuf,
        #[arg(long)]
        mode: RecoveryMode,
        /// Defaults to the largest order in the input.
        #[arg(long)]
        max_n: Option<u32>,
    },
    /// Time R_3..R_max-n from an empty table.
    Bench {
        #[arg(long)]
        max_n: u32,
        #[arg(long, default_value_t = 1)]
        repetitions: u32,
    },
}

struct Ctx {
    global: Global,
}

impl Ctx {
    fn cache_dir(&self) -> Option<PathBuf> {
        if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return Some(dir.into());
        }
        if let Some(dir) = &self.global.cache_dir {
            return Some(dir.clone());
        }
        let base = std::env::var_os("XDG_CACHE_HOME")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("HOME").map(|h| Path::new(&h).join(".cache")))?;
        Some(base.join("gammaflow"))
    }

    fn table(&self) -> Result<RnTable, Failure> {
        match self.cache_dir() {
            Some(dir) => Ok(RnTable::with_cache_dir(dir)?),
            None => Ok(RnTable::in_memory()),
        }
    }

    fn order(&self, n: u32, min: u32, flag: &str) -> Result<u32, Failure> {
        if n < min {
            return Err(Failure::usage(format!(
                "{flag} must be at least {min}, got {n}"
            )));
        }
        if n > self.global.order_cap {
            return Err(Failure::usage(format!(
                "{flag} {n} exceeds the order cap {}; raise --order-cap",
                self.global.order_cap
            )));
        }
        Ok(n)
    }

    fn json(&self) -> bool {
        self.global.output == Output::Json
    }

    fn write_out(&self, contents: &str) -> Result<(), Failure> {
        if let Some(path) = &self.global.out {
            let mut text = contents.to_string();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            fs::write(path, text).map_err(|e| Failure::io(path, e))?;
        }
        Ok(())
    }
}

fn print(text: &str) -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

fn json_string(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON values serialize")
}

fn seq_lines(prefix: &str, values: &std::collections::BTreeMap<u32, Rational>) -> String {
    values
        .iter()
        .map(|(n, v)| format!("{prefix}{n} = {}", format_rational(v)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn seq_value(file: &SeqFile) -> Value {
    serde_json::from_str(&file.to_json()).expect("sequence JSON parses")
}

fn cmd_compute(ctx: &Ctx, n: u32) -> Result<(), Failure> {
    let n = ctx.order(n, 2, "--n")?;
    let table = ctx.table()?;
    let r = table.get(n)?;
    ctx.write_out(&serialize(&r, n))?;
    if ctx.json() {
        let dir = table.cache_dir().map(|d| d.display().to_string());
        print(&json_string(
            &json!({ "n": n, "terms": r.len(), "cache_dir": dir }),
        ))
    } else {
        print(&format!("R_{n}: {} terms", r.len()))
    }
}

fn cmd_show(ctx: &Ctx, n: u32) -> Result<(), Failure> {
    let n = ctx.order(n, 2, "--n")?;
    let r: Arc<Poly> = ctx.table()?.get(n)?;
    let file = serialize(&r, n);
    ctx.write_out(&file)?;
    if ctx.json() {
        print(&file)
    } else {
        print(&r.to_string())
    }
}

fn cmd_coeff(ctx: &Ctx, n: u32, partition: &str) -> Result<(), Failure> {
    let n = ctx.order(n, 2, "--n")?;
    let alpha = Partition::parse_list(partition)
        .map_err(|e| Failure::usage(format!("--partition: {e}")))?;
    let c = if alpha.weight() != 2 * n {
        eprintln!(
            "warning: partition {alpha} has weight {}, monomials of R_{n} have weight {}",
            alpha.weight(),
            2 * n
        );
        Default::default()
    } else {
        ctx.table()?.get(n)?.coeff_of(&alpha)
    };
    let parts: Vec<u16> = alpha.parts().to_vec();
    let doc = json_string(&json!({ "n": n, "partition": parts, "coeff": c.to_string() }));
    ctx.write_out(&doc)?;
    if ctx.json() {
        print(&doc)
    } else {
        print(&c.to_string())
    }
}

fn cmd_verify(ctx: &Ctx, max_n: u32) -> Result<(), Failure> {
    let max_n = ctx.order(max_n, 4, "--max-n")?;
    let report = verify::run(&ctx.table()?, max_n)?;
    let doc = json_string(&report.to_json());
    ctx.write_out(&doc)?;
    if report.passed() {
        print(&if ctx.json() { doc } else { report.to_pretty() })
    } else {
        print(&doc)?;
        Err(Failure {
            code: code::VERIFY,
            message: "verification failed".into(),
        })
    }
}

fn emit_seq(ctx: &Ctx, file: &SeqFile, prefix: &str) -> Result<(), Failure> {
    let doc = file.to_json();
    ctx.write_out(&doc)?;
    if ctx.json() {
        print(&doc)
    } else {
        print(&seq_lines(prefix, &file.values))
    }
}

fn cmd_cumulants(ctx: &Ctx, dist: &DistSpec, orders: u32) -> Result<(), Failure> {
    if orders < 2 {
        return Err(Failure::usage(format!(
            "--orders must be at least 2, got {orders}"
        )));
    }
    let k = dist.cumulants(orders)?;
    let file = SeqFile {
        kind: SeqKind::Cumulants,
        values: k.values().clone(),
    };
    emit_seq(ctx, &file, "K")
}

fn cmd_mmse_derivs(ctx: &Ctx, dist: &DistSpec, orders: u32) -> Result<(), Failure> {
    let n = ctx.order(orders, 1, "--orders")?;
    let k: CumulantSeq = dist.cumulants(n + 1)?;
    let d = evaluate_derivs(&k, n, &ctx.table()?)?;
    let file = SeqFile {
        kind: SeqKind::MmseDerivs,
        values: d.values().clone(),
    };
    emit_seq(ctx, &file, "d")
}

fn cmd_recover(
    ctx: &Ctx,
    input: &Path,
    mode: RecoveryMode,
    max_n: Option<u32>,
) -> Result<(), Failure> {
    let file = SeqFile::parse(&dist::read(input)?)?;
    if file.kind != SeqKind::MmseDerivs {
        return Err(Failure::usage(format!(
            "{} holds {}, recover needs mmse-derivs",
            input.display(),
            file.kind.as_str()
        )));
    }
    // R_{n+1} is needed for d_n.
    let n_max = max_n.unwrap_or(file.max_order());
    ctx.order(n_max + 1, 2, "--max-n + 1")?;
    let d = DerivSeq::new(file.values)?;
    let Recovery { cumulants, trace } = recover_cumulants(&d, mode, n_max, &ctx.table()?)?;
    let out = SeqFile {
        kind: SeqKind::Cumulants,
        values: cumulants.values().clone(),
    };
    ctx.write_out(&out.to_json())?;
    if ctx.json() {
        let trace = serde_json::to_value(&trace).expect("trace serializes");
        print(&json_string(
            &json!({ "cumulants": seq_value(&out), "trace": trace }),
        ))
    } else {
        let mut text = seq_lines("K", &out.values);
        for t in &trace {
            text.push_str(&format!(
                "\norder {}: |K| = {} from {}, sign: {}",
                t.order, t.abs_value, t.equation_used, t.sign_rule
            ));
            if let Some(a) = &t.a_tilde {
                text.push_str(&format!(", a~ = {a}"));
            }
        }
        print(&text)
    }
}

fn cmd_bench(ctx: &Ctx, max_n: u32, repetitions: u32) -> Result<(), Failure> {
    let max_n = ctx.order(max_n, 10, "--max-n")?;
    let rows = bench::run(max_n, repetitions)?;
    let doc = json_string(&bench::to_json(&rows, repetitions));
    ctx.write_out(&doc)?;
    print(&if ctx.json() {
        doc
    } else {
        bench::to_pretty(&rows)
    })?;
    match bench::non_monotone(&rows) {
        Some(n) => Err(Failure {
            code: code::VERIFY,
            message: format!("term count decreases at n = {n}"),
        }),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Threads::Count(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("--threads: {e}")))?;
    }
    let ctx = Ctx { global: cli.global };
    match &cli.command {
        Command::Compute { n } => cmd_compute(&ctx, *n),
        Command::Show { n } => cmd_show(&ctx, *n),
        Command::Coeff { n, partition } => cmd_coeff(&ctx, *n, partition),
        Command::Verify { max_n } => cmd_verify(&ctx, *max_n),
        Command::Cumulants { dist, orders } => cmd_cumulants(&ctx, dist, *orders),
        Command::MmseDerivs { dist, orders } => cmd_mmse_derivs(&ctx, dist, *orders),
        Command::Recover { input, mode, max_n } => cmd_recover(&ctx, input, *mode, *max_n),
        Command::Bench { max_n, repetitions } => cmd_bench(&ctx, *max_n, *repetitions),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(code::USAGE as u8),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
