use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use tcmc::cli::{run, tolerances_from_env, RunFlags};
use tcmc::export::MeshFormat;

#[derive(Parser)]
#[command(name = "tcmc", version, about = "Timelike CMC surfaces from loop-group potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the surface described by a config file.
    Build {
        config: PathBuf,
        /// Grid size, e.g. `201x101`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Spectral parameter used in the Sym formula.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Write the run report; `json` is the only report format.
        #[arg(long, value_enum)]
        report: Option<ReportFormat>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Ply,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad grid size `{t}`: {e}"));
    Ok((n(a)?, n(b)?))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Build { config, grid, lambda, format, out, report } = Cli::parse().command;
    let format = match format {
        Format::Obj => MeshFormat::Obj,
        Format::Ply => MeshFormat::Ply,
        Format::Csv => MeshFormat::Csv,
    };
    let flags = RunFlags { grid, lambda, format, out, report_json: report.is_some() };
    let result = tolerances_from_env().and_then(|tol| run(&config, &flags, &tol));
    match result {
        Ok(report) => {
            for d in &report.diagnostics {
                let at = d.at.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
                eprintln!("diagnostic function={} at={} message={:?}", d.function, at, d.message);
            }
            let counts: Vec<String> = report.grid.cells.iter().map(|(k, v)| format!("{k}={v}")).collect();
            eprintln!("cells {}", counts.join(" "));
            for path in &report.outputs {
                println!("{path}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error code={} message={:?}", e.exit_code(), e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
