use std::path::PathBuf;
use std::process::ExitCode;

use aswt::{CliError, CliResult, DworkOverrides, Format, Report, RouteChoice};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aswt", version, about = "L-functions and Newton polygons of Artin-Schreier-Witt towers")]
struct Cli {
    /// Tower description (JSON or TOML).
    #[arg(long, global = true)]
    tower: Option<PathBuf>,
    /// Single level m.
    #[arg(long, short = 'm', global = true)]
    m: Option<usize>,
    /// Highest level.
    #[arg(long = "m-max", global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true)]
    np: Option<u32>,
    #[arg(long, global = true)]
    nt: Option<usize>,
    #[arg(long, global = true)]
    ns: Option<usize>,
    /// Matrix truncation size.
    #[arg(long = "B", global = true)]
    b: Option<usize>,
    #[arg(long, global = true, default_value = "galois")]
    route: RouteChoice,
    /// Write `<command>.<format>` into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Also rerun with doubled truncation parameters (dwork).
    #[arg(long, global = true)]
    doubling: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// D, m~, delta, delta_1, m_0 and the degrees d(m).
    Constants,
    /// L*(psi, s) and L(psi, s) with their q-adic orders.
    Lfunction,
    /// Newton polygons of L and L*.
    Polygon,
    /// Truncated C*(psi, s) and its bound lines.
    Cstar,
    /// T-adic characteristic series from the Dwork operator.
    Dwork,
    /// Slope stability from level m_0 up to --m-max.
    VerifyStability,
}

fn run(cli: &Cli) -> CliResult<Report> {
    aswt::init_threads()?;
    let path = cli.tower.as_ref().ok_or_else(|| CliError::Input("--tower is required".into()))?;
    let spec = aswt::load_tower(path)?;
    match cli.cmd {
        Cmd::Constants => aswt::constants(&spec, cli.m_max),
        Cmd::Lfunction => aswt::lfunction(&spec, &aswt::levels(&spec, cli.m, cli.m_max)?, cli.route),
        Cmd::Polygon => aswt::polygon(&spec, &aswt::levels(&spec, cli.m, cli.m_max)?, cli.route),
        Cmd::Cstar => aswt::cstar(&spec, &aswt::levels(&spec, cli.m, cli.m_max)?, cli.ns, cli.np),
        Cmd::Dwork => {
            let ov = DworkOverrides {
                n_s: cli.ns,
                n_t: cli.nt,
                n_p: cli.np,
                b: cli.b,
            };
            aswt::dwork(&spec, ov, &aswt::levels(&spec, cli.m, cli.m_max)?, cli.doubling)
        }
        Cmd::VerifyStability => aswt::verify_stability_report(&spec, cli.m_max, cli.route),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match run(&cli) {
        Ok(rep) => (rep.render(cli.format), rep.exit_code()),
        Err(e) => {
            let mut s = serde_json::to_string_pretty(&e.to_json()).expect("error serializes");
            s.push('\n');
            print!("{s}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.out {
        None => print!("{text}"),
        Some(dir) => {
            let ext = match cli.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            let name = match cli.cmd {
                Cmd::Constants => "constants",
                Cmd::Lfunction => "lfunction",
                Cmd::Polygon => "polygon",
                Cmd::Cstar => "cstar",
                Cmd::Dwork => "dwork",
                Cmd::VerifyStability => "verify-stability",
            };
            let path = dir.join(format!("{name}.{ext}"));
            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, &text)) {
                let err = CliError::Input(format!("writing {}: {e}", path.display()));
                eprintln!("{}", err.to_json());
                return ExitCode::from(err.exit_code() as u8);
            }
            eprintln!("{}", path.display());
        }
    }
    ExitCode::from(code as u8)
}
