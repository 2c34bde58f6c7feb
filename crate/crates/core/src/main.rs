use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use snv_core::io::{emit_report, parse_matrix, parse_sequences, Emit, Format, InputBundle, OracleReport, SourceKind};
use snv_core::oracle::{random_instance, snv_counts_oracle, RandomInstanceSpec};
use snv_core::{
    benchmark, classical_snv, deformed_snv, stability_report, verify_correspondence, ClassicalCap,
    ClassicalOptions, DeformedCap, DeformedOptions, Error, PrimeField, TimeLabels,
};

#[derive(Parser)]
#[command(name = "snv", version, about = "SNV cycles per time step, classically or from one deformed barcode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One barcode per time step.
    Classical(Common),
    /// One barcode of the time-deformed distances.
    Deformed(Common),
    /// Run both and check that they agree step by step.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Exit with status 2 when any discrepancy is found.
        #[arg(long)]
        strict: bool,
    },
    /// Time both analyses.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
    },
    /// Brute-force per-step counts.
    Oracle(Common),
    /// Lifespans of deformed SNV cycles and their step-to-step survival.
    Stability(Common),
}

#[derive(Args)]
struct Common {
    /// Aligned sequences, FASTA-like.
    #[arg(long, requires = "metadata", conflicts_with_all = ["matrix", "seed"])]
    fasta: Option<PathBuf>,
    /// Table with `id` and `time` columns (tab or comma separated).
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Strict lower-triangular distance matrix.
    #[arg(long, requires = "times", conflicts_with = "seed")]
    matrix: Option<PathBuf>,
    /// One time step per point, whitespace separated.
    #[arg(long)]
    times: Option<PathBuf>,
    /// Seed of a generated instance.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    dmax: u64,
    /// Raise the horizon above the largest time label.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 2)]
    prime: u32,
    /// Filtration cap: a natural number or `full`.
    #[arg(long)]
    cap: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Worker threads for per-step fan-out.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Tsv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Tsv => Format::Tsv,
        }
    }
}

enum Cap {
    Default,
    Full,
    Value(u64),
}

impl Common {
    fn cap(&self) -> Result<Cap, Error> {
        match self.cap.as_deref() {
            None => Ok(Cap::Default),
            Some("full") => Ok(Cap::Full),
            Some(s) => s
                .parse()
                .map(Cap::Value)
                .map_err(|_| Error::InvalidCap(format!("`{s}` is neither a natural number nor `full`"))),
        }
    }

    fn classical_cap(&self) -> Result<ClassicalCap, Error> {
        Ok(match self.cap()? {
            Cap::Default | Cap::Full => ClassicalCap::Full,
            Cap::Value(v) => ClassicalCap::Value(v),
        })
    }

    fn deformed_cap(&self) -> Result<DeformedCap, Error> {
        Ok(match self.cap()? {
            Cap::Default => DeformedCap::FirstBlock,
            Cap::Full => DeformedCap::Full,
            Cap::Value(v) => DeformedCap::Value(v),
        })
    }

    fn load(&self) -> Result<InputBundle, Error> {
        if let (Some(fasta), Some(meta)) = (&self.fasta, &self.metadata) {
            let mut bundle = parse_sequences(&read(fasta)?, &read(meta)?, self.horizon)?;
            bundle.notes.insert(0, format!("sequences from {}", fasta.display()));
            return Ok(bundle);
        }
        if let (Some(matrix), Some(times)) = (&self.matrix, &self.times) {
            let mut bundle = parse_matrix(&read(matrix)?, &read(times)?, self.horizon)?;
            bundle.notes.insert(0, format!("matrix from {}", matrix.display()));
            return Ok(bundle);
        }
        if let Some(seed) = self.seed {
            if self.n == 0 || self.dmax == 0 {
                return Err(Error::Parse("generated instances need --n >= 1 and --dmax >= 1".into()));
            }
            let (space, labels) = random_instance(RandomInstanceSpec {
                seed,
                n: self.n,
                horizon: self.m,
                d_max: self.dmax,
            });
            let labels = match self.horizon {
                Some(h) if h < labels.horizon() => {
                    return Err(Error::HorizonTooSmall {
                        requested: h,
                        largest: labels.horizon(),
                    })
                }
                Some(h) => TimeLabels::new(&space, h, labels.as_slice().to_vec())?,
                None => labels,
            };
            return Ok(InputBundle {
                source: SourceKind::Generated,
                space,
                labels,
                merges: Vec::new(),
                notes: vec![format!(
                    "generated: seed {seed}, n {}, m {}, dmax {}",
                    self.n, self.m, self.dmax
                )],
            });
        }
        Err(Error::Parse(
            "no input: pass --fasta/--metadata, --matrix/--times or --seed".into(),
        ))
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn print<R: Emit + ?Sized>(report: &R, format: OutputFormat) {
    print!("{}", emit_report(report, format.into()));
}

fn run(command: &Command, common: &Common) -> Result<ExitCode, Error> {
    let field = PrimeField::new(common.prime)?;
    let input = common.load()?;
    let (space, labels) = (&input.space, &input.labels);
    eprintln!(
        "{} points, horizon {}, F_{}",
        space.ids().len(),
        labels.horizon(),
        field.characteristic()
    );

    match command {
        Command::Classical(_) => {
            let options = ClassicalOptions {
                cap: common.classical_cap()?,
                track_transitions: true,
            };
            let mut report = classical_snv(space, labels, field, options)?;
            report.notes.extend(input.notes.iter().cloned());
            eprintln!("classical: {:.3} ms", report.elapsed.as_secs_f64() * 1e3);
            print(&report, common.format);
        }
        Command::Deformed(_) => {
            let options = DeformedOptions {
                cap: common.deformed_cap()?,
            };
            let mut report = deformed_snv(space, labels, field, options)?;
            report.notes.extend(input.notes.iter().cloned());
            eprintln!("deformed: {:.3} ms", report.elapsed.as_secs_f64() * 1e3);
            print(&report, common.format);
        }
        Command::Compare { strict, .. } => {
            let classical = classical_snv(
                space,
                labels,
                field,
                ClassicalOptions {
                    cap: common.classical_cap()?,
                    track_transitions: true,
                },
            )?;
            let deformed = deformed_snv(space, labels, field, DeformedOptions::default())?;
            let check = verify_correspondence(&classical, &deformed)?;
            print(&check, common.format);
            if !check.is_clean() {
                for d in &check.discrepancies {
                    eprintln!("discrepancy: {d}");
                }
                if *strict {
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Command::Bench { repetitions, .. } => {
            if *repetitions == 0 {
                return Err(Error::Parse("--repetitions must be at least 1".into()));
            }
            let report = benchmark(space, labels, field, *repetitions, common.classical_cap()?)?;
            print(&report, common.format);
        }
        Command::Oracle(_) => {
            let report = OracleReport {
                prime: field.characteristic(),
                per_step_counts: snv_counts_oracle(space, labels, field.characteristic()),
            };
            print(&report, common.format);
        }
        Command::Stability(_) => {
            let deformed = deformed_snv(space, labels, field, DeformedOptions::default())?;
            let report = stability_report(&deformed, space, labels, field)?;
            print(&report, common.format);
            if !report.violations.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Classical(c) | Command::Deformed(c) | Command::Oracle(c) | Command::Stability(c) => c,
        Command::Compare { common, .. } | Command::Bench { common, .. } => common,
    };
    let result = match common.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| run(&cli.command, common)),
            Err(e) => Err(Error::Invariant(format!("thread pool: {e}"))),
        },
        None => run(&cli.command, common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_invariant() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
