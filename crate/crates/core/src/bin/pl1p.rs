//! Command-line front end. Counts go to standard output as `name=value`
//! lines; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 count mismatch under `--verify`.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use pl1p::catalog::{classify_to_file, Catalog};
use pl1p::minimality::RankTestConfig;
use pl1p::model::Problem;
use pl1p::monodromy::{monodromy_degree, MonodromyConfig, ParametricSystem};
use pl1p::signature::enumerate_balanced;
use pl1p::subfamilies::{self, CommonPoints, SubfamilyTag};
use pl1p::symmetry::enumerate_classes;
use pl1p::{ClassMode, Error, ReduceMode, Signature};

#[derive(Parser)]
#[command(name = "pl1p", version, about = "Point-line minimal problems in three calibrated views")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Exit with status 3 if a printed count differs from the published one.
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Label,
    SwapLabel,
}

impl From<Mode> for ClassMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Label => ClassMode::Label,
            Mode::SwapLabel => ClassMode::SwapLabel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduction {
    Minimal,
    CameraMinimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Filter {
    Pl0p,
    Onepin,
    Fivepoint,
    Registration,
}

#[derive(Subcommand)]
enum Command {
    /// List the balanced signatures.
    Enumerate {
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List one representative per equivalence class.
    Classes {
        #[arg(long, value_enum, default_value = "label")]
        mode: Mode,
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test every class representative for minimality and write a catalog.
    Classify {
        #[arg(long, value_enum, default_value = "label")]
        mode: Mode,
        /// Comma-separated primes.
        #[arg(long, env = "PL1P_PRIMES", value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce a problem.
    Reduce {
        #[command(flatten)]
        input: ProblemInput,
        #[arg(long, value_enum, default_value = "minimal")]
        mode: Reduction,
        /// Print the rules applied.
        #[arg(long)]
        trace: bool,
    },
    /// Lift a terminal problem to a minimal one, or go back with `--terminal`.
    Lift {
        #[command(flatten)]
        input: ProblemInput,
        #[arg(long)]
        terminal: bool,
    },
    /// Count solutions by monodromy.
    Degree {
        /// Omit both inputs for the five-point problem in two views.
        #[arg(long, conflicts_with = "problem")]
        signature: Option<Signature>,
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Loop budget.
        #[arg(long, default_value_t = 500)]
        loops: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Clustering tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Fruitless loops before stopping.
        #[arg(long, default_value_t = 10)]
        stabilization: usize,
        /// Record the degree in this catalog.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Published degree to check against under `--verify`.
        #[arg(long)]
        expect: Option<usize>,
    },
    /// Extract a subfamily from a catalog and tag its records.
    Subfamily {
        #[arg(long, value_enum)]
        filter: Filter,
        #[arg(long)]
        catalog: PathBuf,
        /// Print the members.
        #[arg(long)]
        list: bool,
        /// Leave the catalog file untouched.
        #[arg(long)]
        no_write: bool,
    },
    /// Counts over a catalog.
    Stats {
        #[arg(long)]
        catalog: PathBuf,
    },
}

#[derive(clap::Args)]
#[group(required = true, multiple = false)]
struct ProblemInput {
    /// 27 comma-separated counts.
    #[arg(long)]
    signature: Option<Signature>,
    /// File in the problem text format.
    #[arg(long)]
    problem: Option<PathBuf>,
}

fn read_problem(path: &Path) -> anyhow::Result<Problem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.parse()?)
}

impl ProblemInput {
    fn load(&self) -> anyhow::Result<Problem> {
        match (&self.signature, &self.problem) {
            (Some(s), _) => Ok(Problem::expand(s)),
            (None, Some(p)) => read_problem(p),
            (None, None) => bail!("no problem given"),
        }
    }
}

/// Prints the signature of `prob`, or its text when it has none.
fn emit_problem(name: &str, prob: &Problem) {
    match prob.signature() {
        Ok(s) => println!("{name}={s}"),
        Err(_) => print!("{name}=text\n{prob}"),
    }
}

enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Mismatch,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Degenerate(_) | Error::ChartFailure { .. }) => Failure::Numerical(e),
            _ => Failure::Usage(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from(anyhow::Error::from(e))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

/// Collects `name=value` lines and the published values to verify them
/// against.
struct Report {
    verify: bool,
    mismatch: bool,
}

impl Report {
    fn count(&mut self, name: &str, value: usize, expected: Option<usize>) {
        println!("{name}={value}");
        if let Some(e) = expected {
            if self.verify && e != value {
                eprintln!("mismatch: {name}={value}, expected {e}");
                self.mismatch = true;
            }
        }
    }

    fn value(&self, name: &str, value: impl std::fmt::Display) {
        println!("{name}={value}");
    }
}

fn writer(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_catalog(path: &Path) -> anyhow::Result<Catalog> {
    Catalog::read(path).with_context(|| format!("reading {}", path.display()))
}

fn catalog_mode(cat: &Catalog) -> anyhow::Result<ClassMode> {
    let mut modes = cat.records().iter().map(|r| r.mode);
    let first = modes.next().context("empty catalog")?;
    if modes.any(|m| m != first) {
        bail!("catalog mixes class modes");
    }
    Ok(first)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.into()))?;
    }
    let mut report = Report { verify: cli.verify, mismatch: false };
    match cli.command {
        Command::Enumerate { count_only, out } => {
            let mut n = 0;
            if count_only {
                n = enumerate_balanced().count();
            } else {
                let mut w = writer(&out)?;
                for s in enumerate_balanced() {
                    writeln!(w, "{s}")?;
                    n += 1;
                }
                w.flush()?;
            }
            report.count("balanced", n, Some(845161));
        }
        Command::Classes { mode, count_only, out } => {
            let mode = ClassMode::from(mode);
            let mut n = 0;
            if count_only {
                n = enumerate_classes(mode).count();
            } else {
                let mut w = writer(&out)?;
                for s in enumerate_classes(mode) {
                    writeln!(w, "{s}")?;
                    n += 1;
                }
                w.flush()?;
            }
            let expected = match mode {
                ClassMode::Label => 143494,
                ClassMode::SwapLabel => 76446,
            };
            report.count("classes", n, Some(expected));
        }
        Command::Classify { mode, primes, trials, out } => {
            let mode = ClassMode::from(mode);
            let mut config = RankTestConfig { trials, ..Default::default() };
            if let Some(p) = primes {
                config.primes = p;
            }
            let reps: Vec<Signature> = enumerate_classes(mode).collect();
            let total = reps.len();
            let cat = classify_to_file(&reps, mode, &config, &out, |done| eprintln!("classified {done}/{total}"))?;
            let s = cat.stats();
            let (min, non) = match mode {
                ClassMode::Label => (140616, 2878),
                ClassMode::SwapLabel => (74575, 1871),
            };
            report.count("minimal", s.minimal, Some(min));
            report.count("nonminimal", s.nonminimal, Some(non));
        }
        Command::Reduce { input, mode, trace } => {
            let mode = match mode {
                Reduction::Minimal => ReduceMode::Minimal,
                Reduction::CameraMinimal => ReduceMode::CameraMinimal,
            };
            let (reduced, steps) = input.load()?.reduce_traced(mode);
            if trace {
                for step in &steps {
                    eprintln!("{:?}", step.rule);
                }
            }
            report.value("steps", steps.len());
            report.value("balance_deficit", reduced.balance_deficit());
            emit_problem("reduced", &reduced);
        }
        Command::Lift { input, terminal } => {
            let prob = input.load()?;
            if terminal {
                emit_problem("terminal", &prob.terminalize());
            } else {
                emit_problem("lifted", &prob.lift_to_minimal()?);
            }
        }
        Command::Degree { signature, problem, loops, seed, tol, stabilization, catalog, expect } => {
            let prob = match (&signature, &problem) {
                (Some(s), _) => Some(Problem::expand(s)),
                (None, Some(p)) => Some(read_problem(p)?),
                (None, None) => None,
            };
            let sys = match prob {
                Some(p) => ParametricSystem::from_problem(&p.lift_to_minimal()?)?,
                None => ParametricSystem::five_point(),
            };
            let config = MonodromyConfig {
                seed,
                stabilization,
                max_loops: loops,
                cluster_tol: tol,
                ..Default::default()
            };
            let r = monodromy_degree(&sys, &config)?;
            report.count("count", r.count, expect);
            report.value("status", r.status);
            report.value("loops", r.loops);
            report.value("paths", r.paths_tracked);
            report.value("path_failures", r.path_failures);
            report.value("discarded", r.discarded);
            report.value("max_residual", format!("{:e}", r.max_residual));
            if let (Some(path), Some(sig)) = (catalog, signature) {
                let mut cat = read_catalog(&path)?;
                let rec = cat
                    .get_mut(&sig)
                    .with_context(|| format!("{sig} is not in {}", path.display()))?;
                rec.set_degree(r.count, r.status)?;
                cat.write_atomic(&path)?;
            }
        }
        Command::Subfamily { filter, catalog, list, no_write } => {
            let mut cat = read_catalog(&catalog)?;
            let mode = catalog_mode(&cat)?;
            let minimal = cat.minimal_signatures();
            let criterion = CommonPoints;
            let members: Vec<(Signature, SubfamilyTag)> = match filter {
                Filter::Pl0p => subfamilies::filter_pl0p(&minimal).into_iter().map(|s| (s, SubfamilyTag::Pl0p)).collect(),
                Filter::Onepin => subfamilies::filter_one_pin(&minimal).into_iter().map(|s| (s, SubfamilyTag::OnePin)).collect(),
                Filter::Fivepoint => minimal
                    .iter()
                    .filter_map(|s| {
                        let mut prob = Problem::expand(s);
                        if mode == ClassMode::SwapLabel {
                            prob = prob.terminalize();
                        }
                        subfamilies::detect_five_point_extension(&prob, &criterion)
                            .map(|pair| (*s, SubfamilyTag::FivePointExtension { pair }))
                    })
                    .collect(),
                Filter::Registration => minimal
                    .iter()
                    .filter_map(|s| {
                        subfamilies::detect_registration(&Problem::expand(s), &criterion)
                            .map(|(pair, registered)| (*s, SubfamilyTag::Registration { pair, registered }))
                    })
                    .collect(),
            };
            let (name, expected) = match (filter, mode) {
                (Filter::Pl0p, ClassMode::Label) => ("pl0p", Some(51)),
                (Filter::Pl0p, ClassMode::SwapLabel) => ("pl0p", None),
                (Filter::Onepin, ClassMode::SwapLabel) => ("onepin", Some(9533)),
                (Filter::Onepin, ClassMode::Label) => ("onepin", None),
                (Filter::Fivepoint, ClassMode::Label) => ("fivepoint", Some(6300)),
                (Filter::Fivepoint, ClassMode::SwapLabel) => ("fivepoint_terminal", Some(3648)),
                (Filter::Registration, ClassMode::Label) => ("registration", Some(61)),
                (Filter::Registration, ClassMode::SwapLabel) => ("registration", None),
            };
            if list {
                let mut out = BufWriter::new(io::stdout().lock());
                for (s, tag) in &members {
                    writeln!(out, "{s};{tag}")?;
                }
                out.flush()?;
            }
            report.count(name, members.len(), expected);
            if !no_write {
                for (s, tag) in members {
                    if let Some(rec) = cat.get_mut(&s) {
                        rec.add_tag(tag);
                    }
                }
                cat.write_atomic(&catalog)?;
            }
        }
        Command::Stats { catalog } => {
            let cat = read_catalog(&catalog)?;
            let s = cat.stats();
            let mode = catalog_mode(&cat).ok();
            let (min, non) = match mode {
                Some(ClassMode::Label) => (Some(140616), Some(2878)),
                Some(ClassMode::SwapLabel) => (Some(74575), Some(1871)),
                None => (None, None),
            };
            report.count("records", s.records, None);
            report.count("minimal", s.minimal, min);
            report.count("nonminimal", s.nonminimal, non);
            report.count("untested", s.untested, None);
            report.count("with_degree", s.with_degree, None);
            report.count("tagged", s.tagged, None);
        }
    }
    if report.mismatch {
        return Err(Failure::Mismatch);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch) => ExitCode::from(3),
    }
}
