//! Convergence studies over grids of `(eps, N)` and their tabular output.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ldg::{assemble, solve, AssemblyOptions, ProblemSpec, SolveOutput};
use crate::mesh::{build_shishkin, khat, MeshParams, ShishkinMesh};
use crate::norms::{error_norms, rate_shishkin, two_mesh_error, ErrorReport};
use crate::polybasis::default_quadrature_points;
use crate::problems;

/// CSV header of study tables.
pub const CSV_HEADER: &str =
    "epsilon,N,k,sigma,energy_error,energy_rate,balanced_error,balanced_rate,linf_error,solve_seconds,residual";

/// How the mesh parameter `sigma` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SigmaPolicy {
    /// `k-hat + 1`, where `k-hat` is `k + 1` for even `k` and `k` for odd `k`.
    KhatPlus1,
    /// `k + 1`.
    KPlus1,
    Explicit(f64),
}

impl SigmaPolicy {
    pub fn sigma(self, degree: usize) -> f64 {
        match self {
            SigmaPolicy::KhatPlus1 => (khat(degree) + 1) as f64,
            SigmaPolicy::KPlus1 => (degree + 1) as f64,
            SigmaPolicy::Explicit(s) => s,
        }
    }
}

/// How errors are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Against the exact solution.
    ExactError,
    /// Against the solution on the midpoint-bisected mesh.
    TwoMesh,
}

/// A convergence study for one problem and degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyConfig {
    pub example: String,
    pub degree: usize,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub sigma_policy: SigmaPolicy,
    /// Overrides the problem's own `beta`.
    pub beta: Option<f64>,
    /// Gauss points per direction for assembly and error integrals.
    pub quad_points: Option<usize>,
    /// `None` picks exact errors when an exact solution exists, else two-mesh.
    pub mode: Option<Mode>,
    /// Record wall-clock solve times; off gives reproducible output bytes.
    pub record_timing: bool,
}

impl StudyConfig {
    pub fn new(example: &str, degree: usize, eps_list: Vec<f64>, n_list: Vec<usize>) -> Self {
        Self {
            example: example.to_string(),
            degree,
            eps_list,
            n_list,
            sigma_policy: SigmaPolicy::KhatPlus1,
            beta: None,
            quad_points: None,
            mode: None,
            record_timing: true,
        }
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
            .unwrap_or_else(|| default_quadrature_points(self.degree))
    }

    pub fn validate(&self) -> Result<()> {
        if !problems::CATALOG.contains(&self.example.as_str()) {
            return Err(Error::UnknownProblem(self.example.clone()));
        }
        for &n in &self.n_list {
            if n < 8 || n % 4 != 0 {
                return Err(Error::InvalidN(n));
            }
        }
        for &eps in &self.eps_list {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "epsilon must be positive, got {eps}"
                )));
            }
        }
        let sigma = self.sigma_policy.sigma(self.degree);
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParam(format!("sigma must be positive, got {sigma}")));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParam(format!("beta must be positive, got {b}")));
            }
        }
        if self.quad_points == Some(0) {
            return Err(Error::InvalidParam("quadrature needs at least one point".into()));
        }
        Ok(())
    }
}

/// One line of a study table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub epsilon: f64,
    pub n: usize,
    pub degree: usize,
    pub sigma: f64,
    pub energy_error: f64,
    pub energy_rate: Option<f64>,
    pub balanced_error: f64,
    pub balanced_rate: Option<f64>,
    pub linf_error: f64,
    pub solve_seconds: Option<f64>,
    pub residual: f64,
}

/// One discrete solve plus bookkeeping.
pub struct SolveRun {
    pub mesh: Arc<ShishkinMesh>,
    pub output: SolveOutput,
    pub seconds: f64,
}

/// Assembles and solves `problem` on `mesh`.
pub fn solve_on(problem: &ProblemSpec, mesh: Arc<ShishkinMesh>, quad_points: usize) -> Result<SolveRun> {
    let start = Instant::now();
    let degree = mesh.params().degree;
    let system = assemble(problem, &mesh, degree, AssemblyOptions { quad_points })?;
    let output = solve(&system)?;
    Ok(SolveRun {
        mesh,
        output,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Resolves the problem of a study at one `eps`.
pub fn study_problem(config: &StudyConfig, epsilon: f64) -> Result<ProblemSpec> {
    let mut problem = problems::by_name(&config.example, epsilon)?;
    if let Some(beta) = config.beta {
        problem.beta = beta;
    }
    Ok(problem)
}

/// Runs the study, returning all rows.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    run_study_streaming(config, |_| Ok(()))
}

/// Runs the study, handing each row to `sink` as soon as it is complete, so
/// a failure later in the grid leaves earlier rows delivered.
pub fn run_study_streaming(
    config: &StudyConfig,
    mut sink: impl FnMut(&StudyRow) -> Result<()>,
) -> Result<Vec<StudyRow>> {
    config.validate()?;
    let k = config.degree;
    let sigma = config.sigma_policy.sigma(k);
    let quad = config.quad_points();
    let rule = crate::polybasis::gauss_legendre(quad);
    let mut rows = Vec::new();
    for &eps in &config.eps_list {
        let problem = study_problem(config, eps)?;
        let mode = match (config.mode, &problem.exact) {
            (Some(Mode::ExactError), None) => {
                return Err(Error::InvalidParam(format!(
                    "{} has no exact solution; use two-mesh mode",
                    problem.name
                )))
            }
            (Some(m), _) => m,
            (None, Some(_)) => Mode::ExactError,
            (None, None) => Mode::TwoMesh,
        };
        let mut previous: Option<(usize, ErrorReport)> = None;
        for &n in &config.n_list {
            let params = MeshParams::new(n, eps, sigma, problem.beta, k);
            let mesh = Arc::new(build_shishkin(params)?);
            let run = solve_on(&problem, mesh.clone(), quad)?;
            let (report, seconds, residual) = match mode {
                Mode::ExactError => {
                    let exact = problem.exact.as_ref().expect("mode checked above");
                    let b = problem.b.clone();
                    let report = error_norms(&run.output.solution, exact, &*b, eps, &rule);
                    (report, run.seconds, run.output.residual)
                }
                Mode::TwoMesh => {
                    let fine = Arc::new(mesh.bisect());
                    let fine_run = solve_on(&problem, fine, quad)?;
                    let b = problem.b.clone();
                    let report = two_mesh_error(
                        &run.output.solution,
                        &fine_run.output.solution,
                        &*b,
                        eps,
                        &rule,
                    )?;
                    (
                        report,
                        run.seconds + fine_run.seconds,
                        run.output.residual.max(fine_run.output.residual),
                    )
                }
            };
            let rates = match &previous {
                Some((prev_n, prev)) if 2 * prev_n == n => Some((
                    rate_shishkin(prev.energy, report.energy, *prev_n)?,
                    rate_shishkin(prev.balanced, report.balanced, *prev_n)?,
                )),
                _ => None,
            };
            let row = StudyRow {
                epsilon: eps,
                n,
                degree: k,
                sigma,
                energy_error: report.energy,
                energy_rate: rates.map(|r| r.0),
                balanced_error: report.balanced,
                balanced_rate: rates.map(|r| r.1),
                linf_error: report.linf_u,
                solve_seconds: config.record_timing.then_some(seconds),
                residual,
            };
            log::info!(
                "eps={eps:e} N={n} k={k}: energy {:.4e} balanced {:.4e}",
                row.energy_error,
                row.balanced_error
            );
            sink(&row)?;
            rows.push(row);
            previous = Some((n, report));
        }
    }
    Ok(rows)
}

/// `d.dddd E sXX` scientific notation, e.g. `2.1412E-01`.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.4E}");
    let (mantissa, exp) = s.split_once('E').expect("E format always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

fn rate_cell(r: Option<f64>, missing: &str) -> String {
    r.map_or_else(|| missing.to_string(), |v| format!("{v:.4}"))
}

fn cells(row: &StudyRow, missing: &str) -> [String; 11] {
    [
        sci(row.epsilon),
        row.n.to_string(),
        row.degree.to_string(),
        format!("{:.4}", row.sigma),
        sci(row.energy_error),
        rate_cell(row.energy_rate, missing),
        sci(row.balanced_error),
        rate_cell(row.balanced_rate, missing),
        sci(row.linf_error),
        row.solve_seconds
            .map_or_else(|| missing.to_string(), |s| format!("{s:.4}")),
        sci(row.residual),
    ]
}

/// One CSV line (no trailing newline).
pub fn csv_line(row: &StudyRow) -> String {
    cells(row, "").join(",")
}

/// CSV with header, one line per row.
pub fn format_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    out
}

/// Right-aligned text table; missing values shown as `---`.
pub fn format_text(rows: &[StudyRow]) -> String {
    let header: Vec<String> = CSV_HEADER.split(',').map(str::to_string).collect();
    let body: Vec<[String; 11]> = rows.iter().map(|r| cells(r, "---")).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            body.iter()
                .map(|r| r[c].len())
                .chain(std::iter::once(header[c].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |items: &[String]| {
        items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(&header);
    out.push('\n');
    for r in &body {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> StudyRow {
        StudyRow {
            epsilon: 1e-4,
            n: 8,
            degree: 0,
            sigma: 2.0,
            energy_error: 0.21412,
            energy_rate: None,
            balanced_error: 0.0,
            balanced_rate: Some(1.58417),
            linf_error: 123.456,
            solve_seconds: None,
            residual: 3.2e-15,
        }
    }

    #[test]
    fn scientific_format() {
        assert_eq!(sci(0.21412), "2.1412E-01");
        assert_eq!(sci(0.0), "0.0000E+00");
        assert_eq!(sci(123.456), "1.2346E+02");
        assert_eq!(sci(-3.9745e-2), "-3.9745E-02");
        assert_eq!(sci(1e-120), "1.0000E-120");
    }

    #[test]
    fn csv_cells() {
        let text = format_csv(&[row()]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "1.0000E-04,8,0,2.0000,2.1412E-01,,0.0000E+00,1.5842,1.2346E+02,,3.2000E-15"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn text_marks_missing() {
        let text = format_text(&[row()]);
        assert!(text.contains("---"));
        assert!(text.contains("1.5842"));
        let lens: Vec<usize> = text.lines().map(str::len).collect();
        assert_eq!(lens[0], lens[1]);
    }

    #[test]
    fn sigma_policies() {
        assert_eq!(SigmaPolicy::KhatPlus1.sigma(0), 2.0);
        assert_eq!(SigmaPolicy::KhatPlus1.sigma(1), 2.0);
        assert_eq!(SigmaPolicy::KhatPlus1.sigma(2), 4.0);
        assert_eq!(SigmaPolicy::KPlus1.sigma(2), 3.0);
        assert_eq!(SigmaPolicy::Explicit(2.5).sigma(7), 2.5);
    }

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::new("example1", 1, vec![1e-4], vec![8, 16]);
        assert!(c.validate().is_ok());
        c.n_list = vec![10];
        assert!(matches!(c.validate(), Err(Error::InvalidN(10))));
        c.n_list = vec![4];
        assert!(c.validate().is_err());
        c.n_list = vec![8];
        c.example = "nope".into();
        assert!(matches!(c.validate(), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn empty_grid_gives_no_rows() {
        let c = StudyConfig::new("example1", 0, vec![1e-4], vec![]);
        assert!(run_study(&c).unwrap().is_empty());
        assert_eq!(format_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn exact_mode_needs_exact_solution() {
        let mut c = StudyConfig::new("example2", 0, vec![1e-4], vec![8]);
        c.mode = Some(Mode::ExactError);
        assert!(run_study(&c).is_err());
    }
}
