use clap::{Parser, Subcommand};
use czq::cli::{run_and_write, run_wigner, ExperimentConfig, ExperimentKind, ResultTable};
use czq::{Error, C64};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "czq", version, about = "Corrected-trapezoid zeta quadrature experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Epstein zeta identities, residue, special values and Wigner agreement.
    ZetaSelftest {
        #[arg(long)]
        config: PathBuf,
    },
    /// Convergence study of a corrected rule or layer potential.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Dirichlet solve above a complexified plane chart.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the Wigner limit W^(N) with the zeta value.
    Wigner {
        /// Form entries `E,F,G`, each real or complex (`1+0.5i`).
        #[arg(long)]
        form: String,
        /// `re,im` or `re`.
        #[arg(long)]
        s: String,
        #[arg(long = "N")]
        n: usize,
    },
}

fn parse_c64(s: &str) -> Result<C64, Error> {
    s.trim()
        .parse::<C64>()
        .map_err(|e| Error::Config(format!("cannot parse {s:?}: {e}")))
}

fn print_table(table: &ResultTable) {
    for r in &table.rows {
        println!(
            "{:<5} {}  value={:.12e}{:+.12e}i  rel_error={:.3e}",
            if r.status.is_empty() { "-" } else { &r.status },
            r.parameters,
            r.value_re,
            r.value_im,
            r.rel_error
        );
    }
}

fn experiment(path: &Path, want: ExperimentKind) -> Result<ResultTable, Error> {
    let cfg = ExperimentConfig::load(path)?;
    if cfg.kind != want {
        return Err(Error::Config(format!(
            "{}: experiment.kind is {:?}, this command runs {want:?}",
            path.display(),
            cfg.kind
        )));
    }
    let table = run_and_write(&cfg)?;
    println!("wrote {}", cfg.output.display());
    Ok(table)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    czq::helmholtz::configure_threads();
    let result = match &cli.command {
        Command::ZetaSelftest { config } => experiment(config, ExperimentKind::ZetaSelftest),
        Command::Converge { config } => experiment(config, ExperimentKind::Convergence),
        Command::Solve { config } => experiment(config, ExperimentKind::HalfspaceSolve),
        Command::Wigner { form, s, n } => (|| {
            let parts: Vec<C64> = form.split(',').map(parse_c64).collect::<Result<_, _>>()?;
            let [e, f, g] = parts[..] else {
                return Err(Error::Config("--form needs three entries E,F,G".into()));
            };
            let sv: Vec<f64> = s
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Config(format!("--s: {e}"))))
                .collect::<Result<_, _>>()?;
            let s = match sv[..] {
                [re] => C64::new(re, 0.0),
                [re, im] => C64::new(re, im),
                _ => return Err(Error::Config("--s needs re or re,im".into())),
            };
            run_wigner((e, f, g), s, *n).map_err(|e| match e {
                Error::Inadmissible(_) | Error::SingularForm | Error::Domain(_) => Error::Config(e.to_string()),
                other => other,
            })
        })(),
    };
    match result {
        Ok(table) => {
            print_table(&table);
            let failures = table.failures();
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in failures {
                    eprintln!("check failed: {}", f.parameters);
                }
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
