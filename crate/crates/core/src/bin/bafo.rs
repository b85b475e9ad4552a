use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use bafo::classes::{
    check_anonymous, check_concave_anonymous, check_gross_substitutes, check_submodular, AnonymityCheck, PriceGrid,
};
use bafo::descending::{DescOrdering, DescVerdict, DescendingAuction};
use bafo::io::{instance_hash, parse_instance, serialize_instance, LoadedInstance};
use bafo::nyb::{BidTieBreak, NybAuction, NybOrder, NybVerdict};
use bafo::random::{gen_random, RandomInstanceSpec, RandomKind};
use bafo::report::{to_json, AuctionFormat, Events, ReportHeader, SolveReport, Transcript, VerifyReport};
use bafo::strategy::StrategyFile;
use bafo::{experiments, Error, Money, Result, TieBreakRule, WorkBudget};

#[derive(Parser)]
#[command(name = "bafo", version, about = "Procurement auctions with best-and-final offers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play an auction with the given strategies and print the transcript.
    Run(AuctionArgs),
    /// Compute the exact subgame perfect equilibrium.
    Solve(SolveArgs),
    /// Check a strategy profile for profitable one-shot deviations.
    Verify(AuctionArgs),
    /// Report which valuation classes an instance belongs to.
    Check(CheckArgs),
    /// Run a preset experiment.
    Experiment(ExperimentArgs),
    /// Generate a random instance file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Nyb,
    Descending,
}

impl From<Format> for AuctionFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Nyb => AuctionFormat::Nyb,
            Format::Descending => AuctionFormat::Descending,
        }
    }
}

#[derive(Args)]
struct AuctionArgs {
    format: Format,
    instance: PathBuf,
    /// Approach order for Name-Your-BAFO, e.g. `1,2,0`.
    #[arg(long)]
    order: Option<String>,
    /// Descending ordering: `lowest-index` or a priority list such as `2,0,1`.
    #[arg(long)]
    ordering: Option<String>,
    /// Overrides the tie-break rule from the instance file.
    #[arg(long)]
    tiebreak: Option<String>,
    /// Descending starting price.
    #[arg(long)]
    h: Option<Money>,
    /// Name-Your-BAFO bid cap.
    #[arg(long)]
    bid_cap: Option<Money>,
    /// `canonical` or a strategy file.
    #[arg(long, default_value = "canonical")]
    strategies: String,
    /// Recorded in the report.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    auction: AuctionArgs,
    /// Bid chosen by indifferent Name-Your-BAFO sellers.
    #[arg(long, value_enum, default_value = "highest")]
    bid_ties: BidTies,
    /// Include wall-clock runtime in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BidTies {
    Highest,
    Lowest,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Price cap of the gross substitutes grid (default: max value).
    #[arg(long)]
    gs_cap: Option<Money>,
    /// Grid step (default: at most 5 points per seller).
    #[arg(long)]
    gs_step: Option<Money>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// chopsticks, cost-gap or concave-threshold.
    name: String,
    /// Seller count for cost-gap.
    #[arg(long)]
    n: Option<usize>,
    /// Starting price for concave-threshold's exact solve.
    #[arg(long)]
    h: Option<Money>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    max_value: Money,
    #[arg(long, default_value_t = 6)]
    max_cost: Money,
    /// explicit, anonymous, additive or unit-demand.
    #[arg(long, default_value = "explicit")]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    monotone: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Ok,
    Refuted,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    print!("{text}");
    if let Some(p) = out {
        write(p, text)?;
    }
    Ok(())
}

fn parse_ids(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| Error::InvalidOrder(format!("{list:?}: {e}"))))
        .collect()
}

fn load(args: &AuctionArgs) -> Result<LoadedInstance> {
    let mut loaded = parse_instance(&read(&args.instance)?)?;
    if let Some(name) = &args.tiebreak {
        loaded.tiebreak = TieBreakRule::from_name(name)?;
    }
    Ok(loaded)
}

fn nyb_auction<'a>(args: &AuctionArgs, loaded: &'a LoadedInstance) -> Result<NybAuction<'a>> {
    let n = loaded.instance.n();
    let order = match &args.order {
        Some(list) => NybOrder::fixed(parse_ids(list)?, n)?,
        None => NybOrder::identity(n),
    };
    let a = NybAuction::new(&loaded.instance, loaded.tiebreak.clone(), order)?;
    match args.bid_cap {
        Some(b) => a.with_bid_cap(b),
        None => Ok(a),
    }
}

fn desc_auction<'a>(args: &AuctionArgs, loaded: &'a LoadedInstance) -> Result<DescendingAuction<'a>> {
    let ordering = match args.ordering.as_deref() {
        None | Some("lowest-index") => DescOrdering::LowestEligibleIndex,
        Some(list) => {
            let ids = parse_ids(list.strip_prefix("priority:").unwrap_or(list))?;
            if let Some(bad) = ids.iter().find(|&&i| i >= loaded.instance.n()) {
                return Err(Error::InvalidOrder(format!("unknown seller {bad} in ordering")));
            }
            DescOrdering::FixedPriority(ids)
        }
    };
    let a = DescendingAuction::new(&loaded.instance, loaded.tiebreak.clone(), ordering)?;
    match args.h {
        Some(h) => a.with_h(h),
        None => Ok(a),
    }
}

fn strategies(args: &AuctionArgs) -> Result<StrategyFile> {
    if args.strategies == "canonical" {
        Ok(StrategyFile::canonical(args.format.into()))
    } else {
        StrategyFile::parse(&read(Path::new(&args.strategies))?)
    }
}

fn cmd_run(args: &AuctionArgs) -> Result<Outcome> {
    let loaded = load(args)?;
    let n = loaded.instance.n();
    let file = strategies(args)?;
    let transcript = match args.format {
        Format::Nyb => {
            let a = nyb_auction(args, &loaded)?;
            let run = a.run(&file.nyb_profile(n)?)?;
            Transcript { header: ReportHeader::nyb(&a, args.seed), events: Events::Nyb(run.events), outcome: run.outcome }
        }
        Format::Descending => {
            let a = desc_auction(args, &loaded)?;
            let run = a.run(&file.desc_profile(n)?)?;
            Transcript {
                header: ReportHeader::descending(&a, args.seed),
                events: Events::Descending(run.events),
                outcome: run.outcome,
            }
        }
    };
    emit(&to_json(&transcript), args.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let budget = WorkBudget::from_env()?;
    let loaded = load(&args.auction)?;
    let started = Instant::now();
    let mut report = match args.auction.format {
        Format::Nyb => {
            let a = nyb_auction(&args.auction, &loaded)?;
            let ties = match args.bid_ties {
                BidTies::Highest => BidTieBreak::Highest,
                BidTies::Lowest => BidTieBreak::Lowest,
            };
            let eq = a.solve_exact_with(budget, ties)?;
            SolveReport::new(ReportHeader::nyb(&a, args.auction.seed), &eq.outcome, eq.node_count, Events::Nyb(eq.path))
        }
        Format::Descending => {
            let a = desc_auction(&args.auction, &loaded)?;
            let eq = a.solve_exact(budget)?;
            SolveReport::new(
                ReportHeader::descending(&a, args.auction.seed),
                &eq.outcome,
                eq.state_count,
                Events::Descending(eq.path),
            )
        }
    };
    if args.timing {
        report.runtime_ms = Some(started.elapsed().as_millis());
    }
    emit(&to_json(&report), args.auction.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn cmd_verify(args: &AuctionArgs) -> Result<Outcome> {
    let budget = WorkBudget::from_env()?;
    let loaded = load(args)?;
    let n = loaded.instance.n();
    let file = strategies(args)?;
    let (text, refuted) = match args.format {
        Format::Nyb => {
            let a = nyb_auction(args, &loaded)?;
            let verdict = a.verify_spe(&file.nyb_profile(n)?, budget)?;
            let refuted = matches!(verdict, NybVerdict::Witness(_));
            (to_json(&VerifyReport { header: ReportHeader::nyb(&a, args.seed), verdict }), refuted)
        }
        Format::Descending => {
            let a = desc_auction(args, &loaded)?;
            let verdict = a.verify_spe(&file.desc_profile(n)?, budget)?;
            let refuted = matches!(verdict, DescVerdict::Witness(_));
            (to_json(&VerifyReport { header: ReportHeader::descending(&a, args.seed), verdict }), refuted)
        }
    };
    emit(&text, args.out.as_deref())?;
    Ok(if refuted { Outcome::Refuted } else { Outcome::Ok })
}

#[derive(Serialize)]
struct CheckReport {
    version: u32,
    engine: String,
    instance_hash: String,
    submodular: serde_json::Value,
    anonymous: serde_json::Value,
    concave: serde_json::Value,
    gross_substitutes: serde_json::Value,
}

fn budgeted<T: Serialize>(r: Result<T>) -> Result<serde_json::Value> {
    match r {
        Ok(v) => Ok(serde_json::to_value(v).expect("plain data")),
        Err(Error::BudgetExceeded { required, budget }) => {
            Ok(json!({ "result": "skipped", "reason": format!("needs {required} work units, budget is {budget}") }))
        }
        Err(e) => Err(e),
    }
}

fn cmd_check(args: &CheckArgs) -> Result<Outcome> {
    let budget = WorkBudget::from_env()?;
    let loaded = parse_instance(&read(&args.instance)?)?;
    let v = loaded.instance.valuation();
    let cap = args.gs_cap.unwrap_or_else(|| v.max_value().max(1));
    let grid = match args.gs_step {
        Some(step) if step >= 1 => PriceGrid { cap, step },
        Some(step) => return Err(Error::Parse(format!("grid step {step} must be at least 1"))),
        None => PriceGrid::coarse(cap, 5),
    };
    let anonymous = check_anonymous(v)?;
    let concave = match anonymous {
        AnonymityCheck::Pass { .. } => serde_json::to_value(check_concave_anonymous(v)?).expect("plain data"),
        AnonymityCheck::Counterexample { .. } => json!({ "result": "not-applicable" }),
    };
    let mut gs = budgeted(check_gross_substitutes(v, grid, budget))?;
    gs["grid"] = json!({ "cap": grid.cap, "step": grid.step });
    let report = CheckReport {
        version: bafo::io::FORMAT_VERSION,
        engine: concat!("bafo ", env!("CARGO_PKG_VERSION")).to_string(),
        instance_hash: instance_hash(&loaded.instance, &loaded.tiebreak),
        submodular: budgeted(check_submodular(v, budget))?,
        anonymous: serde_json::to_value(anonymous).expect("plain data"),
        concave,
        gross_substitutes: gs,
    };
    emit(&to_json(&report), args.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<Outcome> {
    let report = experiments::run(&args.name, args.n, args.h, args.seed)?;
    let json = to_json(&report);
    if args.json {
        print!("{json}");
    } else {
        print!("{}", report.human());
    }
    if let Some(p) = &args.out {
        write(p, &json)?;
    }
    Ok(if report.pass { Outcome::Ok } else { Outcome::Refuted })
}

fn cmd_gen(args: &GenArgs) -> Result<Outcome> {
    let spec = RandomInstanceSpec {
        seed: args.seed,
        n: args.n,
        max_value: args.max_value,
        max_cost: args.max_cost,
        kind: RandomKind::from_name(&args.kind)?,
        monotone: args.monotone,
    };
    let inst = gen_random(&spec)?;
    emit(&serialize_instance(&inst, &TieBreakRule::default()), args.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Check(a) => cmd_check(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Refuted) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
