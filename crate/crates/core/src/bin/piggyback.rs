use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use piggyback::cli::{self, CodecFormat, ScenarioConfig, Transport};

#[derive(Parser)]
#[command(name = "piggyback", version, about = "Simulate and check repository replication over news and email")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundtripFormat {
    News,
    Email,
    Both,
}

#[derive(clap::Args)]
struct Overrides {
    /// Days to simulate.
    #[arg(long)]
    days: Option<u64>,
    /// Root random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicate over `news` or `email` instead of the scenario's transport.
    #[arg(long)]
    transport: Option<String>,
    /// Directory for CSV series and the JSON summary.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a preset name or a TOML file).
    Run {
        #[arg(long)]
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run several scenarios concurrently.
    Batch {
        /// Repeat for each scenario.
        #[arg(long = "scenario", required = true)]
        scenarios: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
        /// Scenarios run at once.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
    /// Evaluate one model equation, e.g. `calc c V=16866 b=1.6`.
    Calc {
        equation: String,
        /// key=value parameters.
        params: Vec<String>,
    },
    /// Encode every file in a directory, extract it again and compare bytes.
    CodecRoundtrip {
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        format: RoundtripFormat,
        /// Keep the rendered messages here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill the corpus directory with this many random files first.
        #[arg(long)]
        generate: Option<usize>,
        /// Largest generated file in bytes.
        #[arg(long, default_value_t = 4_900_000)]
        max_size: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn resolve(spec: &str, o: &Overrides) -> Result<(ScenarioConfig, PathBuf)> {
    let mut config = cli::load_scenario(spec).with_context(|| format!("loading scenario {spec:?}"))?;
    if let Some(d) = o.days {
        config.days = d;
    }
    if let Some(s) = o.seed {
        config.seed = s;
    }
    if let Some(t) = &o.transport {
        config.transport = t.parse::<Transport>()?;
    }
    config.validate()?;
    let out = o.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok((config, out))
}

fn report(output: &cli::RunOutput, dir: &std::path::Path) -> Result<()> {
    let files = cli::write_outputs(dir, output)?;
    println!("{}", output.summary.to_json());
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let args = Args::parse();
    match args.command {
        Command::Run { scenario, overrides } => {
            let (config, out) = resolve(&scenario, &overrides)?;
            let output = cli::run(&config)?;
            report(&output, &out)?;
        }
        Command::Batch { scenarios, overrides, jobs } => {
            let mut configs = Vec::new();
            let mut dir = None;
            for s in &scenarios {
                let (c, out) = resolve(s, &overrides)?;
                if configs.iter().any(|x: &ScenarioConfig| x.name == c.name) {
                    bail!("two scenarios are named {:?}; their outputs would collide", c.name);
                }
                dir.get_or_insert(out);
                configs.push(c);
            }
            let dir = dir.expect("at least one scenario");
            let mut failed = false;
            for (config, result) in configs.iter().zip(cli::batch(&configs, jobs)) {
                match result {
                    Ok(output) => report(&output, &dir)?,
                    Err(e) => {
                        eprintln!("error: scenario {}: {e}", config.name);
                        failed = true;
                    }
                }
            }
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Calc { equation, params } => {
            let r = cli::calc(&equation, &params)?;
            print!("{r}");
        }
        Command::CodecRoundtrip { corpus, format, out, generate, max_size, seed } => {
            if let Some(n) = generate {
                cli::write_synthetic_corpus(&corpus, n, max_size, seed)?;
            }
            let formats = match format {
                RoundtripFormat::News => vec![CodecFormat::News],
                RoundtripFormat::Email => vec![CodecFormat::Email],
                RoundtripFormat::Both => vec![CodecFormat::News, CodecFormat::Email],
            };
            let mut ok = true;
            for f in formats {
                let dir = out.as_ref().map(|d| d.join(format!("{f:?}").to_lowercase()));
                let r = cli::codec_roundtrip(&corpus, f, dir.as_deref())?;
                println!("{:?}: {}/{} intact", f, r.intact, r.total);
                for fail in &r.failures {
                    println!("  FAILED {}: {}", fail.file.display(), fail.reason);
                }
                ok &= r.passed();
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
