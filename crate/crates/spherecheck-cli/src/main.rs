mod gindex_cmd;
mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spherecheck::areafeas::{feasible, system_from_json, witness_to_json, Feasibility};
use spherecheck::sphere_enum::{enumerate_sphere_classes, SphereClassQuery};
use spherecheck::Error;

#[derive(Parser)]
#[command(name = "spherecheck", version, about = "Exact checks for sphere configurations and cyclic-action fixed-point data")]
struct Cli {
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    /// Seed for the randomized property checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Timing and progress on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List sphere classes with A² = −α and K·A = α − 2.
    EnumerateSpheres(EnumArgs),
    /// Run named verifiers; exit 0 iff all pass.
    Verify {
        /// Targets, or `all`.
        #[arg(required = true)]
        targets: Vec<String>,
    },
    /// Equivariant index computations.
    Gindex {
        #[command(subcommand)]
        cmd: gindex_cmd::GCmd,
    },
    /// Linear feasibility of symplectic-area systems.
    Areafeas {
        #[command(subcommand)]
        cmd: AreaCmd,
    },
}

#[derive(Args)]
struct EnumArgs {
    /// JSON query file; overrides the flags below.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["n", "alpha"])]
    query: Option<PathBuf>,
    #[arg(long, required_unless_present = "query")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "query")]
    alpha: Option<i64>,
    /// A single a-coefficient.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["a_min", "a_max"])]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    a_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    a_max: Option<i64>,
    /// Keep only classes allowed by ω(A) < −K·[ω] in a reduced basis.
    #[arg(long)]
    area_bounded: bool,
    /// Include negative-a forms.
    #[arg(long)]
    allow_negative: bool,
}

#[derive(Subcommand)]
enum AreaCmd {
    /// Decide feasibility of a system given as JSON and print a witness.
    Check {
        #[arg(long, value_name = "FILE")]
        system: PathBuf,
    },
}

pub struct Report {
    pub value: Value,
    pub text: String,
    pub ok: bool,
}

pub fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn enumerate(args: &EnumArgs) -> Result<Report, Error> {
    let q = match &args.query {
        Some(p) => serde_json::from_str::<SphereClassQuery>(&read(p)?).map_err(|e| Error::Invalid(format!("query: {e}")))?,
        None => {
            let (n, alpha) = (args.n.unwrap(), args.alpha.unwrap());
            let (lo, hi) = match args.a {
                Some(a) => (a, a),
                None => (args.a_min.unwrap_or(if args.allow_negative { -alpha / 2 } else { 0 }), args.a_max.unwrap_or(12)),
            };
            SphereClassQuery { n, alpha, a_min: lo, a_max: hi, area_condition: args.area_bounded, allow_negative: args.allow_negative }
        }
    };
    if q.n == 0 || q.alpha < 1 || q.a_min > q.a_max {
        return Err(Error::Invalid(format!("need n >= 1, alpha >= 1 and a_min <= a_max (got n={}, alpha={}, a={}..={})", q.n, q.alpha, q.a_min, q.a_max)));
    }
    let classes = enumerate_sphere_classes(&q);
    let mut strata: BTreeMap<i64, usize> = BTreeMap::new();
    for c in &classes {
        *strata.entry(c.a).or_default() += 1;
    }
    if classes.is_empty() {
        eprintln!("warning: no classes with A^2 = -{}, K.A = {} for N = {} and a in {}..={}", q.alpha, q.alpha - 2, q.n, q.a_min, q.a_max);
    }
    let mut text = format!("N = {}, alpha = {}, a in {}..={}: {} classes\n", q.n, q.alpha, q.a_min, q.a_max, classes.len());
    for (a, k) in &strata {
        text += &format!("  a = {a}: {k}\n");
    }
    for c in &classes {
        text += &format!("  {c}\n");
    }
    let strata_json: Vec<Value> = strata.iter().map(|(a, k)| json!({ "a": a, "count": k })).collect();
    Ok(Report { value: json!({ "query": q, "count": classes.len(), "strata": strata_json, "classes": classes }), text, ok: true })
}

fn areafeas_check(path: &PathBuf) -> Result<Report, Error> {
    let sys = system_from_json(&read(path)?)?;
    let res = feasible(&sys);
    let (value, text) = match &res {
        Feasibility::Feasible(w) => {
            let wj = witness_to_json(w);
            let lines: Vec<String> = wj.as_object().unwrap().iter().map(|(k, v)| format!("  {k} = {}", v.as_str().unwrap())).collect();
            (json!({ "n": sys.n, "rows": sys.rows.len(), "feasible": true, "witness": wj }), format!("feasible ({} rows)\n{}\n", sys.rows.len(), lines.join("\n")))
        }
        Feasibility::Infeasible => (json!({ "n": sys.n, "rows": sys.rows.len(), "feasible": false }), format!("infeasible ({} rows)\n", sys.rows.len())),
    };
    Ok(Report { value, text, ok: true })
}

fn verify_cmd(targets: &[String], seed: u64, verbose: bool) -> Result<Report, Error> {
    let targets = verify::expand(targets)?;
    let t = Instant::now();
    let outcomes = verify::run_all(&targets, seed)?;
    if verbose {
        eprintln!("verified {} targets in {:.1}s", outcomes.len(), t.elapsed().as_secs_f64());
    }
    let ok = outcomes.iter().all(|o| o.passed);
    let mut text = String::new();
    for o in &outcomes {
        text += &format!("{} {}: {}\n", if o.passed { "PASS" } else { "FAIL" }, o.target, o.summary);
    }
    text += &format!("{} of {} passed\n", outcomes.iter().filter(|o| o.passed).count(), outcomes.len());
    Ok(Report { value: json!({ "passed": ok, "results": outcomes }), text, ok })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 || rayon::ThreadPoolBuilder::new().num_threads(k).build_global().is_err() {
            eprintln!("error: invalid --threads {k}");
            return ExitCode::from(2);
        }
    }
    let t = Instant::now();
    let res = match &cli.cmd {
        Cmd::EnumerateSpheres(a) => enumerate(a),
        Cmd::Verify { targets } => verify_cmd(targets, cli.seed, cli.verbose),
        Cmd::Gindex { cmd } => gindex_cmd::run(cmd),
        Cmd::Areafeas { cmd: AreaCmd::Check { system } } => areafeas_check(system),
    };
    let report = match res {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if matches!(e, Error::Invalid(_)) { 2 } else { 1 });
        }
    };
    let pretty = serde_json::to_string_pretty(&report.value).unwrap() + "\n";
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &pretty) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if cli.json {
        print!("{pretty}");
    } else {
        print!("{}", report.text);
    }
    if cli.verbose {
        eprintln!("done in {:.2}s", t.elapsed().as_secs_f64());
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
