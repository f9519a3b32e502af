//! `ldg-study`: convergence studies for the built-in problems.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 solver failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use shishkin_ldg::mesh::{build_shishkin, MeshParams};
use shishkin_ldg::study::{
    csv_line, format_text, run_study_streaming, solve_on, study_problem, Mode, SigmaPolicy,
    StudyConfig, StudyRow, CSV_HEADER,
};
use shishkin_ldg::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SigmaArg {
    #[value(name = "khat_plus_1")]
    KhatPlus1,
    #[value(name = "k_plus_1")]
    KPlus1,
    Explicit,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    ExactError,
    TwoMesh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
    Both,
}

/// Run LDG convergence studies on Shishkin meshes.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Built-in problem: example1, example2 or polynomial.
    #[arg(long, default_value = "example1")]
    example: String,
    /// Polynomial degree.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Diffusion parameter; repeat for several values.
    #[arg(long = "eps", required = true)]
    eps: Vec<f64>,
    /// Number of mesh intervals per direction; repeat for several values.
    #[arg(long = "N", value_name = "N")]
    n: Vec<usize>,
    /// How the mesh transition parameter sigma is chosen.
    #[arg(long, value_enum, default_value = "khat_plus_1")]
    sigma_policy: SigmaArg,
    /// Value of sigma for `--sigma-policy explicit`.
    #[arg(long)]
    sigma: Option<f64>,
    /// Override of the problem's lower bound parameter beta.
    #[arg(long)]
    beta: Option<f64>,
    /// Gauss points per direction for assembly and errors.
    #[arg(long)]
    quad: Option<usize>,
    /// Error measurement; defaults to exact errors when a solution is known.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
    /// Allow N > 256 or k > 4.
    #[arg(long)]
    force: bool,
    /// Leave the solve_seconds column empty so output is reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Directory for JSON dumps of the discrete solutions.
    #[arg(long)]
    dump: Option<PathBuf>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn config_from(args: &Args) -> Result<StudyConfig, String> {
    let sigma_policy = match (args.sigma_policy, args.sigma) {
        (SigmaArg::Explicit, Some(s)) => SigmaPolicy::Explicit(s),
        (SigmaArg::Explicit, None) => return Err("--sigma-policy explicit needs --sigma".into()),
        (_, Some(_)) => return Err("--sigma requires --sigma-policy explicit".into()),
        (SigmaArg::KhatPlus1, None) => SigmaPolicy::KhatPlus1,
        (SigmaArg::KPlus1, None) => SigmaPolicy::KPlus1,
    };
    if !args.force {
        if let Some(&n) = args.n.iter().find(|&&n| n > 256) {
            return Err(format!("N = {n} exceeds 256; pass --force to run it anyway"));
        }
        if args.k > 4 {
            return Err(format!("k = {} exceeds 4; pass --force to run it anyway", args.k));
        }
    }
    let mut config = StudyConfig::new(&args.example, args.k, args.eps.clone(), args.n.clone());
    config.sigma_policy = sigma_policy;
    config.beta = args.beta;
    config.quad_points = args.quad;
    config.mode = args.mode.map(|m| match m {
        ModeArg::ExactError => Mode::ExactError,
        ModeArg::TwoMesh => Mode::TwoMesh,
    });
    config.record_timing = !args.no_timing;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidN(_) | Error::InvalidParam(_) | Error::UnknownProblem(_)
    )
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    })
}

fn dump_solutions(config: &StudyConfig, dir: &Path) -> shishkin_ldg::Result<()> {
    std::fs::create_dir_all(dir)?;
    let sigma = config.sigma_policy.sigma(config.degree);
    for &eps in &config.eps_list {
        let problem = study_problem(config, eps)?;
        for &n in &config.n_list {
            let params = MeshParams::new(n, eps, sigma, problem.beta, config.degree);
            let mesh = Arc::new(build_shishkin(params)?);
            let run = solve_on(&problem, mesh, config.quad_points())?;
            let path = dir.join(format!("{}_k{}_eps{eps:e}_N{n}.json", config.example, config.degree));
            let file = BufWriter::new(File::create(path)?);
            serde_json::to_writer(file, &run.output.solution.to_dumps())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = match config_from(&args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let csv_path = match args.format {
        Format::Text => None,
        _ => args.out.clone(),
    };
    let mut csv_out = if args.format == Format::Text {
        None
    } else {
        match open_output(csv_path.as_deref()) {
            Ok(w) => Some(w),
            Err(e) => {
                eprintln!("error: cannot open output: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    };
    if let Some(w) = csv_out.as_mut() {
        if let Err(e) = writeln!(w, "{CSV_HEADER}").and_then(|_| w.flush()) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SOLVER);
        }
    }

    let mut rows: Vec<StudyRow> = Vec::new();
    let result = run_study_streaming(&config, |row| {
        if let Some(w) = csv_out.as_mut() {
            writeln!(w, "{}", csv_line(row))?;
            w.flush()?;
        }
        rows.push(row.clone());
        Ok(())
    });
    drop(csv_out);

    if args.format != Format::Csv {
        let text = format_text(&rows);
        let written = match (&args.out, args.format) {
            (Some(p), Format::Text) => std::fs::write(p, &text),
            (Some(p), _) => std::fs::write(p.with_extension("txt"), &text),
            (None, Format::Text) => io::stdout().write_all(text.as_bytes()),
            (None, _) => io::stdout().write_all(format!("\n{text}").as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SOLVER);
        }
    }

    if let Err(e) = result {
        eprintln!("error: {e}");
        return ExitCode::from(if is_config_error(&e) { EXIT_CONFIG } else { EXIT_SOLVER });
    }
    if let Some(dir) = &args.dump {
        if let Err(e) = dump_solutions(&config, dir) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SOLVER);
        }
    }
    ExitCode::SUCCESS
}
