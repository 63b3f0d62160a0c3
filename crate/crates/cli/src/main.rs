use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spraylab::jets::TangentSample;
use spraylab_cli::quantities::Quantity;
use spraylab_cli::{
    cmd_eval, cmd_geodesic, cmd_verify, fmt_f64, load_config, riccati_demo, CliError, Format,
    Overrides,
};

#[derive(Parser)]
#[command(
    name = "spraylab",
    version,
    about = "Curvature of sprays and Finsler metrics, checked numerically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a quantity over the sample set of a model.
    Eval {
        #[arg(long)]
        config: String,
        #[arg(long)]
        quantity: Quantity,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run every applicable check on a config or a built-in suite.
    Verify {
        #[arg(long, conflicts_with = "suite")]
        config: Option<String>,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Integrate a geodesic, or run the scalar Riccati comparison.
    Geodesic {
        #[arg(long, required_unless_present = "riccati_xi0")]
        config: Option<String>,
        /// Start point, comma separated; defaults to the config's geodesic.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Start velocity, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Initial value of the scalar equation `Ξ' = −Ξ² − q`.
        #[arg(long, allow_hyphen_values = true)]
        riccati_xi0: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        riccati_q: f64,
        #[arg(long)]
        out: Option<String>,
    },
}

fn emit(text: &str, out: Option<&str>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Eval {
            config,
            quantity,
            samples,
            seed,
            format,
            out,
        } => {
            let model = load_config(&config)?;
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            let text = cmd_eval(&model, quantity, Overrides { samples, seed }, format)?;
            emit(&text, out.as_deref())?;
            Ok(0)
        }
        Command::Verify {
            config,
            suite,
            samples,
            seed,
            out,
        } => {
            let report = cmd_verify(
                config.as_deref(),
                suite.as_deref(),
                Overrides { samples, seed },
            )?;
            let json = report.to_json();
            println!("{json}");
            if let Some(path) = out {
                std::fs::write(&path, format!("{json}\n"))
                    .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}")))?;
            }
            for c in report.failures() {
                eprintln!(
                    "FAIL {}: max residual {} > {}{}",
                    c.id,
                    c.max_residual,
                    c.tolerance,
                    c.error
                        .as_deref()
                        .map(|e| format!(" ({e})"))
                        .unwrap_or_default()
                );
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Geodesic {
            config,
            x,
            y,
            tmax,
            step,
            riccati_xi0,
            riccati_q,
            out,
        } => {
            if let Some(xi0) = riccati_xi0 {
                let d = riccati_demo(xi0, riccati_q, tmax.unwrap_or(4.0), step.unwrap_or(1e-4))?;
                let mut csv = String::from("t,Xi\n");
                for (t, v) in d.times.iter().zip(&d.xi) {
                    csv.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*v)));
                }
                emit(&csv, out.as_deref())?;
                match d.blowup_time {
                    Some(t) => eprintln!("blow-up time: {}", fmt_f64(t)),
                    None => eprintln!("blow-up time: none within the horizon"),
                }
                if let Some(b) = d.bound {
                    eprintln!("-1/Xi(0): {}", fmt_f64(b));
                }
                eprintln!(
                    "comparison verdict: {}",
                    if d.verdict { "holds" } else { "violated" }
                );
                return Ok(if d.verdict { 0 } else { 1 });
            }
            let model = load_config(config.as_deref().expect("clap enforces --config"))?;
            let spec = model.geodesic.clone();
            let start = match (x, y, &spec) {
                (Some(x), Some(y), _) => {
                    TangentSample::new(x, y).map_err(|e| CliError::Usage(e.to_string()))?
                }
                (None, None, Some(g)) => g.start.clone(),
                _ => {
                    return Err(CliError::Usage(
                        "give both --x and --y, or a geodesic block in the config".into(),
                    ))
                }
            };
            let t_max = tmax.or(spec.as_ref().map(|g| g.t_max)).unwrap_or(1.0);
            let h = step.or(spec.as_ref().map(|g| g.step)).unwrap_or(1e-3);
            let run = cmd_geodesic(&model, &start, t_max, h)?;
            emit(&run.csv, out.as_deref())?;
            eprint!("{}", run.summary());
            Ok(if run.exit_time.is_some() { 1 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
