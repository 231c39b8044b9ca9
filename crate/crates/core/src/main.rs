use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nc_ergodic::scenario::{self, OutputFormat, Report, Scenario, Task, TaskStatus};
use nc_ergodic::{Error, Verdict};

#[derive(Parser)]
#[command(name = "nc-ergodic", version, about = "Neveu decompositions and ergodic convergence certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task listed in the scenario.
    Run(RunArgs),
    /// Split the unit into invariant and weakly wandering parts.
    Decompose(RunArgs),
    /// Compute and validate the mean ergodic projection.
    Mean(RunArgs),
    /// Certify convergence of averages in measure and bilaterally almost uniformly.
    Certify(RunArgs),
    /// Run the corner-wise stochastic ergodic theorem.
    Stochastic(RunArgs),
    /// List the built-in scenarios, write them out, or run them all.
    Gallery(GalleryArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON); a report file replays its scenario.
    #[arg(long, conflicts_with = "gallery")]
    scenario: Option<PathBuf>,
    /// Built-in scenario by name.
    #[arg(long)]
    gallery: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GalleryArgs {
    /// Run every item instead of listing names.
    #[arg(long)]
    run: bool,
    /// Write `<name>.scn` files into this directory.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Directory for emitted files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; repeat for several. Defaults to report-json.
    #[arg(long)]
    format: Vec<OutputFormat>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_fixed: Option<f64>,
    #[arg(long)]
    decay_tol: Option<f64>,
    /// Largest averaging index kept in the schedule.
    #[arg(long)]
    n_max: Option<usize>,
}

impl Common {
    fn apply(&self, s: &mut Scenario) {
        if let Some(seed) = self.seed {
            s.seed = Some(seed);
        }
        if let Some(t) = self.tol_fixed {
            s.tolerances.tol_fixed = t;
        }
        if let Some(t) = self.decay_tol {
            s.tolerances.decay_tol = t;
        }
        if let Some(n) = self.n_max {
            s.truncate_schedule(n);
        }
    }

    fn formats(&self) -> Vec<OutputFormat> {
        if self.format.is_empty() {
            vec![OutputFormat::ReportJson]
        } else {
            self.format.clone()
        }
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Unknown => "unknown",
    }
}

fn print_summary(report: &Report) {
    println!("{}: {}", report.scenario.name, verdict_word(report.verdict));
    for t in &report.tasks {
        let status = match t.status {
            TaskStatus::Completed => "completed",
            TaskStatus::Failed => "failed",
            TaskStatus::Skipped => "skipped",
        };
        match &t.reason {
            Some(r) => println!("  {:<13} {:<9} {:<7} {r}", t.task.name(), status, verdict_word(t.verdict)),
            None => println!("  {:<13} {:<9} {}", t.task.name(), status, verdict_word(t.verdict)),
        }
    }
    if let Some(d) = report.decomposition() {
        println!("  rank e1 = {}, rank e2 = {}", d.e1.rank(), d.e2.rank());
    }
}

fn execute(mut s: Scenario, common: &Common) -> Result<Report, Error> {
    common.apply(&mut s);
    let report = scenario::run(&s)?;
    print_summary(&report);
    if let Some(dir) = &common.out {
        for f in common.formats() {
            let path = scenario::emit(&report, f, dir)?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(report)
}

fn load(args: &RunArgs, only: Option<Task>) -> Result<Scenario, Error> {
    let mut s = match (&args.scenario, &args.gallery) {
        (Some(path), _) => scenario::load_scenario(path)?,
        (None, Some(name)) => scenario::gallery_item(name)
            .ok_or_else(|| Error::Validation(format!("no gallery item named {name:?}")))?,
        (None, None) => return Err(Error::Validation("pass --scenario <path> or --gallery <name>".into())),
    };
    if let Some(task) = only {
        s.tasks = vec![task];
    }
    Ok(s)
}

fn exit_for(reports: &[Report]) -> ExitCode {
    if reports.iter().all(Report::all_pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => load(&args, None).and_then(|s| execute(s, &args.common)).map(|r| vec![r]),
        Command::Decompose(args) => single(&args, Task::Decompose),
        Command::Mean(args) => single(&args, Task::Mean),
        Command::Certify(args) => single(&args, Task::Certify),
        Command::Stochastic(args) => single(&args, Task::Stochastic),
        Command::Gallery(args) => gallery(&args),
    };
    match result {
        Ok(reports) => exit_for(&reports),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn single(args: &RunArgs, task: Task) -> Result<Vec<Report>, Error> {
    let s = load(args, Some(task))?;
    execute(s, &args.common).map(|r| vec![r])
}

fn gallery(args: &GalleryArgs) -> Result<Vec<Report>, Error> {
    let items = scenario::gallery();
    if let Some(dir) = &args.scenarios {
        std::fs::create_dir_all(dir)?;
        for s in &items {
            let path = dir.join(format!("{}.scn", s.name));
            std::fs::write(&path, s.to_json() + "\n")?;
            println!("wrote {}", path.display());
        }
    }
    if !args.run {
        if args.scenarios.is_none() {
            for s in &items {
                println!("{:<27} {}", s.name, s.description.as_deref().unwrap_or(""));
            }
        }
        return Ok(Vec::new());
    }
    items.into_iter().map(|s| execute(s, &args.common)).collect()
}
