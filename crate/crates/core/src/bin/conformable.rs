use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use conformable::cli::{
    parse_spec, render_spec, run, CliError, Format, Kind, ProblemSpec, RunOptions, EXIT_NUMERICAL,
    EXIT_OK,
};

#[derive(Parser)]
#[command(name = "conformable", version, about = "Conformable fractional calculus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (JSON); the subcommand's default problem when omitted.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Certificate tolerance, overriding the problem file.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for the random points used to validate expressions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record the wall time in the output.
    #[arg(long, global = true)]
    timing: bool,
    /// Print the default problem file of the subcommand and exit.
    #[arg(long, global = true)]
    emit_default_spec: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Conformable derivative of an expression in x.
    Deriv,
    /// Conformable integral of an expression in x.
    Integrate,
    /// Extremal of a fixed-end problem by shooting.
    Extremal,
    /// DuBois-Reymond residual and energy along the extremal.
    Dubois,
    /// Invariance, Noether balance and charge drift for a transformation family.
    NoetherCheck,
    /// Pontryagin extremal of an optimal control problem.
    Control,
    /// Damped oscillator recovered from windowed friction actions.
    DissipativeDemo,
    /// Green's theorem on a rectangle.
    GreenCheck,
    /// Two-dimensional Euler-Lagrange residual.
    #[command(name = "el2d-check")]
    El2dCheck,
}

impl Command {
    fn kind(self) -> Kind {
        match self {
            Command::Deriv => Kind::Deriv,
            Command::Integrate => Kind::Integrate,
            Command::Extremal => Kind::Extremal,
            Command::Dubois => Kind::Dubois,
            Command::NoetherCheck => Kind::NoetherCheck,
            Command::Control => Kind::Control,
            Command::DissipativeDemo => Kind::DissipativeDemo,
            Command::GreenCheck => Kind::GreenCheck,
            Command::El2dCheck => Kind::El2dCheck,
        }
    }
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let kind = cli.command.kind();
    if cli.emit_default_spec {
        emit(cli, &render_spec(&ProblemSpec::default_for(kind)))?;
        return Ok(EXIT_OK);
    }
    let spec = match &cli.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let spec = parse_spec(&text)?;
            if spec.kind() != kind {
                return Err(CliError::Invalid(format!(
                    "problem file is of kind `{}`, not `{}`",
                    spec.kind().name(),
                    kind.name()
                )));
            }
            spec
        }
        None => ProblemSpec::default_for(kind),
    };
    let opts = RunOptions {
        seed: cli.seed,
        tol: cli.tol,
        timing: cli.timing,
    };
    let doc = run(&spec, &opts)?;
    let format = match cli.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
    };
    emit(cli, &doc.render(format))?;
    Ok(if doc.all_certified() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => {
            if code != EXIT_OK {
                eprintln!("conformable: a certificate failed");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("conformable: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
