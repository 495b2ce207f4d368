use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stein_poisson::harness::{
    bound_for, evaluate_exact, evaluate_mc, run_sweep, verify_pair, CertRecord, CsvSink, Evaluation,
    Grid, JsonSink, OutputFormat, PRecipe, PairVerification, Params, ProblemId, RecordSink,
    SweepSpec, Verdict,
};
use stein_poisson::pairs::substream;
use stein_poisson::{BoundReport, Convention, Error};

#[derive(Parser)]
#[command(name = "stein-poisson", version, about = "Poisson approximation bounds, exact laws and certification sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the bound for one instance.
    Bound(InstanceArgs),
    /// Exact distance to the Poisson target, checked against the bound.
    ExactTv(InstanceArgs),
    /// Simulated distance to the Poisson target, checked against the bound.
    McTv {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Certify every point of a parameter grid.
    Sweep(SweepArgs),
    /// Check an exchangeable-pair construction.
    VerifyPair {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate the pair measure instead of simulating.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args)]
struct InstanceArgs {
    problem: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Multiplicities, comma separated.
    #[arg(long)]
    l: Option<String>,
    /// Probabilities: a comma list, `uniform:LAMBDA` or `harmonic`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    convention: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    problem: String,
    /// Comma list or inclusive range `A..B`.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Multiplicity vector; repeat for several.
    #[arg(long)]
    l: Vec<String>,
    /// Probability recipe; repeat for several. Adds `random:COUNT:MAXLEN`.
    #[arg(long)]
    p: Vec<String>,
    /// Simulate with this many samples per point instead of exact laws.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure that maps to an exit code.
enum Failure {
    Usage(String),
    Dominance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let hint = match e {
            Error::OverCap { .. } | Error::NotEnumerable(_) => "; try mc-tv for large instances",
            _ => "",
        };
        Failure::Usage(format!("{e}{hint}"))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("io error: {e}"))
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .or_else(|_| usage(format!("cannot parse list '{s}'")))
}

fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().or_else(|_| usage(format!("bad range '{s}'")))?;
        let b: usize = b.trim().trim_start_matches('=').parse().or_else(|_| usage(format!("bad range '{s}'")))?;
        if a > b {
            return usage(format!("empty range '{s}'"));
        }
        return Ok((a..=b).collect());
    }
    parse_list(s)
}

fn problem(s: &str) -> Result<ProblemId, Failure> {
    Ok(s.parse::<ProblemId>()?)
}

fn convention(s: Option<&str>) -> Result<Option<Convention>, Failure> {
    match s {
        None => Ok(None),
        Some("tv") => Ok(Some(Convention::Tv)),
        Some("set") => Ok(Some(Convention::SetDistance)),
        Some(other) => usage(format!("unknown convention '{other}', expected tv or set")),
    }
}

fn format(s: Option<&str>) -> Result<Option<OutputFormat>, Failure> {
    s.map(|f| f.parse::<OutputFormat>().map_err(Failure::from)).transpose()
}

fn params(args: &InstanceArgs) -> Result<Params, Failure> {
    let l = args.l.as_deref().map(parse_list::<usize>).transpose()?;
    let p = match args.p.as_deref() {
        None => None,
        Some(s) => {
            let recipe: PRecipe = s.parse()?;
            if matches!(recipe, PRecipe::Random { .. }) {
                return usage("random p recipes are only available in sweep");
            }
            recipe.expand(args.n, 0)?.into_iter().next()
        }
    };
    Ok(Params {
        n: args.n,
        k: args.k,
        c: args.c,
        theta: args.theta,
        l,
        p,
    })
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e9) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn print_bound(out: &mut dyn Write, b: &BoundReport, conv: Option<Convention>) -> io::Result<()> {
    writeln!(out, "bound       {}", b.kind)?;
    writeln!(out, "inputs      {}", b.inputs)?;
    writeln!(out, "lambda      {}", b.lambda)?;
    let shown = conv.unwrap_or(b.convention);
    writeln!(out, "value       {} ({})", b.value_in(shown), shown)?;
    writeln!(out, "raw         {} ({})", b.raw, b.convention)?;
    let other = b.convention.other();
    writeln!(out, "as {:<8} {}", other.as_str(), b.value_in(other))?;
    writeln!(out, "surrogate   {}", b.surrogate)?;
    writeln!(out, "degenerate  {}", b.degenerate)?;
    if let Some(c) = &b.companion {
        writeln!(out, "companion   {} = {}", c.label, num(c.value))?;
    }
    Ok(())
}

fn print_record(out: &mut dyn Write, eval: &Evaluation, fmt: Option<OutputFormat>, conv: Option<Convention>) -> Result<(), Failure> {
    let r: &CertRecord = &eval.record;
    match fmt {
        Some(OutputFormat::Csv) => {
            let mut sink = CsvSink::new(&mut *out);
            sink.write(r)?;
            sink.flush()?;
        }
        Some(OutputFormat::Json) => {
            let mut sink = JsonSink::new(&mut *out);
            sink.write(r)?;
            sink.flush()?;
        }
        None => {
            let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| v.to_string());
            writeln!(out, "problem     {}", r.problem)?;
            writeln!(out, "params      {}", r.params)?;
            writeln!(out, "lambda      {}", r.lambda)?;
            writeln!(out, "exact_tv    {}", opt(r.exact_tv))?;
            writeln!(out, "mc_tv       {}", opt(r.mc_tv))?;
            writeln!(out, "mc_stderr   {}", opt(r.mc_stderr))?;
            let b = &eval.bound;
            let shown = conv.unwrap_or(b.convention);
            writeln!(out, "bound       {} ({}; raw {})", b.value_in(shown), shown, b.raw)?;
            writeln!(out, "as {:<8} {}", b.convention.other().as_str(), b.value_in(b.convention.other()))?;
            writeln!(out, "surrogate   {}", r.surrogate)?;
            writeln!(out, "verdict     {}", r.verdict)?;
            writeln!(out, "seconds     {}", r.seconds)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn verdict_result(v: Verdict) -> Result<(), Failure> {
    match v {
        Verdict::Pass => Ok(()),
        Verdict::Fail => Err(Failure::Dominance),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bound(args) => {
            let report = bound_for(problem(&args.problem)?, &params(&args)?)?;
            let conv = convention(args.convention.as_deref())?;
            let mut out = open_out(args.out.as_ref())?;
            match format(args.format.as_deref())? {
                Some(OutputFormat::Json) => {
                    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Usage(e.to_string()))?;
                    writeln!(out)?;
                }
                _ => print_bound(&mut out, &report, conv)?,
            }
            out.flush()?;
            Ok(())
        }
        Command::ExactTv(args) => {
            let eval = evaluate_exact(problem(&args.problem)?, &params(&args)?)?;
            let mut out = open_out(args.out.as_ref())?;
            print_record(&mut out, &eval, format(args.format.as_deref())?, convention(args.convention.as_deref())?)?;
            verdict_result(eval.record.verdict)
        }
        Command::McTv { instance, trials, seed } => {
            let mut rng = substream(seed, 0);
            let eval = evaluate_mc(problem(&instance.problem)?, &params(&instance)?, trials, &mut rng)?;
            let mut out = open_out(instance.out.as_ref())?;
            print_record(&mut out, &eval, format(instance.format.as_deref())?, convention(instance.convention.as_deref())?)?;
            verdict_result(eval.record.verdict)
        }
        Command::Sweep(args) => {
            let grid = Grid {
                n: args.n.as_deref().map(parse_range).transpose()?.unwrap_or_default(),
                k: args.k.as_deref().map(parse_range).transpose()?.unwrap_or_default(),
                c: args.c.as_deref().map(parse_range).transpose()?.unwrap_or_default(),
                theta: args.theta.as_deref().map(parse_list::<f64>).transpose()?.unwrap_or_default(),
                l: args.l.iter().map(|s| parse_list::<usize>(s)).collect::<Result<_, _>>()?,
                p: args.p.iter().map(|s| s.parse::<PRecipe>()).collect::<Result<_, _>>()?,
            };
            let spec = SweepSpec {
                problem: problem(&args.problem)?,
                grid,
                seed: args.seed,
                format: args.format.parse()?,
                mc_samples: args.trials,
            };
            // Validate the whole grid before creating the output file.
            spec.expand()?;
            let out = open_out(args.out.as_ref())?;
            let mut sink: Box<dyn RecordSink> = match spec.format {
                OutputFormat::Csv => Box::new(CsvSink::new(out)),
                OutputFormat::Json => Box::new(JsonSink::new(out)),
            };
            let summary = run_sweep(&spec, sink.as_mut())?;
            sink.flush()?;
            eprintln!("{} records, {} failing", summary.records, summary.failures);
            if summary.failures > 0 {
                return Err(Failure::Dominance);
            }
            Ok(())
        }
        Command::VerifyPair { instance, trials, seed, exact } => {
            let result = verify_pair(problem(&instance.problem)?, &params(&instance)?, trials, seed, exact)?;
            let mut out = open_out(instance.out.as_ref())?;
            match &result {
                PairVerification::Exact(r) => {
                    writeln!(out, "states              {}", r.states)?;
                    writeln!(out, "symmetry error      {:e}", r.max_asymmetry)?;
                    writeln!(out, "margin error        {:e}", r.max_margin_error)?;
                    writeln!(out, "up formula error    {:e}", r.max_up_error)?;
                    writeln!(out, "down formula error  {:e}", r.max_down_error)?;
                    writeln!(out, "mean up / down      {} / {}", r.mean_up, r.mean_down)?;
                }
                PairVerification::MonteCarlo(r) => {
                    writeln!(out, "trials              {}", r.trials)?;
                    writeln!(out, "z up / down         {:.3} / {:.3}", r.z_up, r.z_down)?;
                    writeln!(out, "up: formula / seen  {:.6} / {:.6}", r.mean_up, r.empirical_up)?;
                    writeln!(out, "down: formula/seen  {:.6} / {:.6}", r.mean_down, r.empirical_down)?;
                }
            }
            let pass = result.passes();
            writeln!(out, "result              {}", if pass { "pass" } else { "fail" })?;
            out.flush()?;
            if pass {
                Ok(())
            } else {
                Err(Failure::Dominance)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Dominance) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
